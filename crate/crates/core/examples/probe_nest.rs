use std::time::Instant;
use unimodal::arith::Prec;
use unimodal::complexity::*;
use unimodal::kneading::{parameter_bisection, BisectionOpts, Target};
use unimodal::map::{CriticalOrder, MapSpec};
use unimodal::nice::seed_nice_interval;

fn main() {
    let p = Prec::new(256, 4096);
    // fibonacci target: lock past 2e5 + slack
    let mut s = vec![1usize, 2];
    while *s.last().unwrap() < 230_000 {
        let n = s[s.len() - 1] + s[s.len() - 2];
        s.push(n);
    }
    println!("target len {} S_max {}", s.len(), s.last().unwrap());
    let t0 = Instant::now();
    let a = parameter_bisection(CriticalOrder::Int(2), &Target::SPrefix(s), 1e-12, p, &BisectionOpts::default()).unwrap();
    println!("bisection: {:?}  a = {:.15} width {:.2e}", t0.elapsed(), a.mid_f64(), a.width_f64());
    let m = MapSpec::new(a.mid.clone(), CriticalOrder::Int(2)).unwrap();

    for n_orbit in [20_000usize, 200_000] {
        let t0 = Instant::now();
        let base = seed_nice_interval(&m, p).unwrap();
        let opts = CoverOpts { n_orbit, n_max: 200, entry_slack: 2000 };
        let cover = build_nice_cover(&m, &base, &opts, p).unwrap();
        println!("N={n_orbit}: cover built in {:?} ({} elements, dropped {})", t0.elapsed(), cover.elements.len(), cover.dropped);
        let t1 = Instant::now();
        let q = q_curve(&cover).unwrap();
        println!("  q_curve in {:?}; q[0]={} q[100]={} q[200]={}", t1.elapsed(), q[0], q[100], q[200]);
        let t2 = Instant::now();
        let pw = p_curve(&cover, 201).unwrap();
        println!("  p_curve in {:?}; p[1]={} p[100]={} p[201]={}", t2.elapsed(), pw[0], pw[99], pw[200]);
        let minq: f64 = (100..=200).map(|n| q[n] as f64 / n as f64).fold(f64::INFINITY, f64::min);
        println!("  min q(n)/n over [100,200] = {minq:.4}");
        let mut cover = cover;
        let t3 = Instant::now();
        let nus = nu_counts(&mut cover, 200, 2000).unwrap();
        let total: usize = nus.nu.iter().sum();
        println!("  nu_counts in {:?}; total {} complete {} max_trans {:?}", t3.elapsed(), total, nus.complete, nus.max_transition.iter().max());
    }
}
