//! Interval-level combinatorics: nice intervals, first entry maps, entry and
//! return domains, pull-back chains, children with transition times, the
//! principal nest and central cascades.
//!
//! Every nice interval here descends from the seed `(q^, q)` by critical
//! pull-backs, so niceness is inherited structurally; `niceness_spot_check`
//! re-certifies it on demand by iterating the boundary. Pull-back chains are
//! computed by solving one lap-inverse per step inside the known monotone
//! branch, never by preimage trees.

use crate::arith::{Ball, Interval, Prec};
use crate::error::{Error, Result};
use crate::map::{critical_point, MapSpec, Orbit};
use std::cmp::Ordering;

/// How a nice interval was produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// The seed `(q^, q)` around the orientation-reversing fixed point.
    Seed,
    /// Critical pull-back of a seed-descended interval by `f^depth`.
    CriticalPullback { depth: usize },
}

/// A symmetric nice interval around the critical point, with provenance.
#[derive(Clone, Debug)]
pub struct NiceInterval {
    pub span: Interval,
    pub provenance: Provenance,
    /// Horizon up to which `f^j(boundary)` was certified to avoid the
    /// interior (0 until a spot check runs).
    pub certified_horizon: usize,
}

impl NiceInterval {
    pub fn contains(&self, x: &Ball, p: Prec) -> Option<bool> {
        self.span.contains(x, p)
    }

    pub fn contains_c(&self, p: Prec) -> Option<bool> {
        self.span.contains(&Ball::exact(critical_point()), p)
    }

    /// Symmetry invariant: the mirror of one endpoint encloses the other.
    pub fn is_symmetric(&self, m: &MapSpec, p: Prec) -> bool {
        let mirrored = m.hat_point(&self.span.lo, p);
        mirrored.intersects(&self.span.hi, p)
    }
}

/// The seed nice interval `(q^, q)`. Niceness is automatic: the orbit of the
/// boundary is the fixed point `q` itself, never interior.
pub fn seed_nice_interval(m: &MapSpec, p: Prec) -> Result<NiceInterval> {
    let q = m.fixed_point_q(p)?;
    let q_hat = m.hat_point(&q, p);
    let span = Interval::new(q_hat, q, p)?;
    Ok(NiceInterval { span, provenance: Provenance::Seed, certified_horizon: 0 })
}

/// Certify `f^j(boundary) not in interior` for `j <= horizon`, updating the
/// certificate horizon.
///
/// A boundary orbit reaches the seed boundary after `depth` steps and sits on
/// the fixed point `q` from then on, where strict comparisons are no longer
/// meaningful (the true value *is* the boundary). So the check is numeric for
/// `j < depth` and structural beyond: it certifies once that `q` and `q^`
/// avoid the interior, which covers every later iterate.
pub fn niceness_spot_check(
    m: &MapSpec,
    iv: &mut NiceInterval,
    horizon: usize,
    p: Prec,
) -> Result<()> {
    let depth = match iv.provenance {
        Provenance::Seed => 0,
        Provenance::CriticalPullback { depth } => depth,
    };
    let numeric_horizon = horizon.min(depth.saturating_sub(1));
    for endpoint in [iv.span.lo.clone(), iv.span.hi.clone()] {
        let mut x = endpoint;
        for j in 1..=numeric_horizon {
            x = m.eval(&x, p);
            match iv.span.contains(&x, p) {
                Some(false) => {}
                Some(true) => {
                    return Err(Error::NotInDomain(format!(
                        "boundary iterate {j} re-enters the interval: not nice"
                    )))
                }
                None => return Err(Error::Undecided("niceness spot check membership".into())),
            }
        }
    }
    if horizon >= depth && depth > 0 {
        // tail of the boundary orbit: q and its mirror, which must stay
        // outside the interior of a proper sub-interval of the seed
        let q = m.fixed_point_q(p)?;
        let q_hat = m.hat_point(&q, p);
        for pt in [q, q_hat] {
            match iv.span.contains(&pt, p) {
                Some(false) => {}
                Some(true) => {
                    return Err(Error::NotInDomain(
                        "seed boundary orbit inside the interval: not nice".into(),
                    ))
                }
                None => return Err(Error::Undecided("niceness spot check (fixed point)".into())),
            }
        }
    }
    iv.certified_horizon = iv.certified_horizon.max(horizon);
    Ok(())
}

pub(crate) fn ball_min(u: &Ball, v: &Ball, p: Prec) -> Ball {
    let lo = {
        let a = u.lo(p);
        let b = v.lo(p);
        if a < b { a } else { b }
    };
    let hi = {
        let a = u.hi(p);
        let b = v.hi(p);
        if a < b { a } else { b }
    };
    Ball::from_endpoints(&lo, &hi, p)
}

pub(crate) fn ball_max(u: &Ball, v: &Ball, p: Prec) -> Ball {
    let lo = {
        let a = u.lo(p);
        let b = v.lo(p);
        if a > b { a } else { b }
    };
    let hi = {
        let a = u.hi(p);
        let b = v.hi(p);
        if a > b { a } else { b }
    };
    Ball::from_endpoints(&lo, &hi, p)
}

/// Exact forward image of an interval under `f^steps`. The image of an
/// interval is always an interval: monotone steps map endpoints to
/// endpoints, and a step over the critical point folds the image to
/// `[min(f(lo), f(hi)), f(c)]`. Returns the final image and the fold steps.
pub fn hull_forward(
    m: &MapSpec,
    iv: &Interval,
    steps: usize,
    p: Prec,
) -> Result<(Interval, Vec<usize>)> {
    let c = critical_point();
    let mut lo = iv.lo.clone();
    let mut hi = iv.hi.clone();
    let mut folds = Vec::new();
    for j in 0..steps {
        let interior = {
            let below = match lo.cmp_point(&c, p) {
                Some(o) => o == Ordering::Less,
                None => return Err(Error::Undecided("fold test (lower endpoint vs c)".into())),
            };
            let above = match hi.cmp_point(&c, p) {
                Some(o) => o == Ordering::Greater,
                None => return Err(Error::Undecided("fold test (upper endpoint vs c)".into())),
            };
            below && above
        };
        let flo = m.eval(&lo, p);
        let fhi = m.eval(&hi, p);
        if interior {
            folds.push(j);
            lo = ball_min(&flo, &fhi, p);
            hi = m.critical_value();
        } else {
            lo = ball_min(&flo, &fhi, p);
            hi = ball_max(&flo, &fhi, p);
        }
    }
    Ok((Interval { lo, hi }, folds))
}

/// A critical pull-back chain: the component of `f^{-n}(target)` containing
/// `c`, together with the steps `0 < j < n` at which the chain interval
/// contains `c`. The chain order is `critical_steps.len() + 1` (the final
/// interval always contains `c`).
#[derive(Clone, Debug)]
pub struct CriticalChain {
    pub result: Interval,
    pub critical_steps: Vec<usize>,
    pub depth: usize,
}

impl CriticalChain {
    pub fn order(&self) -> usize {
        self.critical_steps.len() + 1
    }
}

/// Pull `target` back along the critical orbit: requires `f^n(c)` inside
/// `target` (certified). Intermediate components are selected by the orbit
/// points they must contain.
pub fn critical_chain(
    m: &MapSpec,
    orb: &mut Orbit,
    target: &Interval,
    n: usize,
    p: Prec,
) -> Result<CriticalChain> {
    orb.ensure(m, n)?;
    match target.contains(orb.pt(n), p) {
        Some(true) => {}
        Some(false) => {
            return Err(Error::NotInDomain(format!("f^{n}(c) is not in the pull-back target")))
        }
        None => return Err(Error::Undecided("chain precondition f^n(c) in target".into())),
    }
    let c = Ball::exact(critical_point());
    let mut cur = target.clone();
    let mut critical_steps = Vec::new();
    for j in (0..n).rev() {
        cur = m.pullback_component(&cur, orb.pt(j), p)?;
        if j > 0 {
            match cur.contains(&c, p) {
                Some(true) => critical_steps.push(j),
                Some(false) => {}
                None => return Err(Error::Undecided("chain interval against c".into())),
            }
        }
    }
    critical_steps.reverse();
    Ok(CriticalChain { result: cur, critical_steps, depth: n })
}

/// The component of `f^{-n}(T)` containing `c`, as a nice interval.
/// Precondition: `f^n(c)` lands in `T`.
pub fn critical_pullback(
    m: &MapSpec,
    orb: &mut Orbit,
    t: &NiceInterval,
    n: usize,
    p: Prec,
) -> Result<NiceInterval> {
    let chain = critical_chain(m, orb, &t.span, n, p)?;
    Ok(NiceInterval {
        span: chain.result,
        provenance: Provenance::CriticalPullback { depth: n },
        certified_horizon: 0,
    })
}

/// First entry time of `x` into `t`: minimal `k >= 1` with `f^k(x) in t`,
/// certified, together with the landing enclosure.
pub fn first_entry(
    m: &MapSpec,
    x: &Ball,
    t: &NiceInterval,
    budget: usize,
    p: Prec,
) -> Result<(usize, Ball)> {
    let mut y = x.clone();
    for k in 1..=budget {
        y = m.eval(&y, p);
        match t.contains(&y, p) {
            Some(true) => return Ok((k, y)),
            Some(false) => {}
            None => return Err(Error::Undecided(format!("membership of f^{k}(x) in the target"))),
        }
    }
    Err(Error::BudgetExceeded { what: "first entry search".into(), budget })
}

/// First entry time of the critical orbit point `f^start(c)` into `t`,
/// using the shared orbit cache.
pub fn first_entry_orbit(
    m: &MapSpec,
    orb: &mut Orbit,
    start: usize,
    t: &NiceInterval,
    budget: usize,
    p: Prec,
) -> Result<usize> {
    for k in 1..=budget {
        orb.ensure(m, start + k)?;
        match t.contains(orb.pt(start + k), p) {
            Some(true) => return Ok(k),
            Some(false) => {}
            None => {
                return Err(Error::Undecided(format!(
                    "membership of orbit point {} in the target",
                    start + k
                )))
            }
        }
    }
    Err(Error::BudgetExceeded { what: "first entry search (orbit)".into(), budget })
}

/// The entry domain of `x` into `t`: the component of `f^{-k}(t)` containing
/// `x`, where `k` is the first entry time. Its endpoints are order-`<= k`
/// preimages of the boundary of `t` (or of `c`).
pub fn entry_domain(
    m: &MapSpec,
    x: &Ball,
    t: &NiceInterval,
    budget: usize,
    p: Prec,
) -> Result<(usize, Interval)> {
    let (k, _) = first_entry(m, x, t, budget, p)?;
    let mut orbit_x = Vec::with_capacity(k + 1);
    orbit_x.push(x.clone());
    for _ in 0..k {
        let next = m.eval(orbit_x.last().unwrap(), p);
        orbit_x.push(next);
    }
    let mut cur = t.span.clone();
    for j in (0..k).rev() {
        cur = m.pullback_component(&cur, &orbit_x[j], p)?;
    }
    Ok((k, cur))
}

/// Deduplicated return domains of `t` hit by the sample, sorted by position,
/// with their return times. Sample points not returning within the budget
/// are dropped and counted.
pub struct ReturnDomains {
    pub domains: Vec<(Interval, usize)>,
    pub dropped: usize,
}

pub fn return_domains(
    m: &MapSpec,
    t: &NiceInterval,
    sample: &[Ball],
    budget: usize,
    p: Prec,
) -> Result<ReturnDomains> {
    let mut pts: Vec<Ball> = Vec::new();
    let mut dropped = 0usize;
    for x in sample {
        match t.contains(x, p) {
            Some(true) => pts.push(x.clone()),
            Some(false) => {}
            None => return Err(Error::Undecided("sample membership in the base interval".into())),
        }
    }
    let mut order_undecided = false;
    pts.sort_by(|a, b| match a.cmp(b, p) {
        Some(o) => o,
        None => {
            order_undecided = true;
            Ordering::Equal
        }
    });
    if order_undecided {
        return Err(Error::Undecided("ordering the sample".into()));
    }
    let mut domains: Vec<(Interval, usize)> = Vec::new();
    let mut cur_repr: Option<(Ball, usize)> = None;
    for x in pts {
        let k = match first_entry(m, &x, t, budget, p) {
            Ok((k, _)) => k,
            Err(Error::BudgetExceeded { .. }) => {
                dropped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let same = match &cur_repr {
            None => false,
            Some((prev, pk)) if *pk == k => {
                // same return domain iff f^k maps [prev, x] inside t: the
                // image is one interval, so containment of its hull decides
                let seg = Interval { lo: prev.clone(), hi: x.clone() };
                let (img, _) = hull_forward(m, &seg, k, p)?;
                matches!(img.subset_of(&t.span, p), Some(true))
            }
            Some(_) => false,
        };
        if !same {
            let (kk, dom) = entry_domain(m, &x, t, budget, p)?;
            debug_assert_eq!(kk, k);
            domains.push((dom, k));
        }
        cur_repr = Some((x, k));
    }
    Ok(ReturnDomains { domains, dropped })
}

/// Ratio by which `j` sits well inside `i`: the largest `tau` with both
/// components of `i \ j` at least `tau |j|` long, reported as the midpoint
/// estimate of a certified enclosure.
pub fn well_inside_margin(j: &Interval, i: &Interval, p: Prec) -> Result<f64> {
    match j.subset_of(i, p) {
        Some(true) => {}
        Some(false) => return Err(Error::NotContained),
        None => return Err(Error::Undecided("containment for the margin".into())),
    }
    let left = j.lo.sub(&i.lo, p);
    let right = i.hi.sub(&j.hi, p);
    let len = j.length(p);
    let gap = ball_min(&left, &right, p);
    let tau = gap.div(&len, p)?;
    Ok(tau.mid_f64().max(0.0))
}

/// One level of the principal nest.
#[derive(Clone, Debug)]
pub struct NestLevel {
    pub interval: NiceInterval,
    /// First return time of `c` to the parent level (the pull-back time that
    /// produced this level); for `I^{k+1}` this is `r_k`.
    pub return_time: usize,
    pub central: bool,
    pub high: bool,
}

#[derive(Clone, Debug)]
pub struct NestOpts {
    pub return_budget: usize,
    /// Central-run length that triggers the restrictive-interval test.
    pub cascade_probe: usize,
}

impl Default for NestOpts {
    fn default() -> Self {
        NestOpts { return_budget: 1 << 16, cascade_probe: 48 }
    }
}

/// The principal nest `I^0 = seed, I^{k+1} = central return domain of I^k`,
/// to the requested depth. Levels are tagged central/non-central and
/// high/low. A long central cascade with a certified invariant interval is
/// reported as `RenormalizationDetected`.
pub fn principal_nest(
    m: &MapSpec,
    orb: &mut Orbit,
    depth: usize,
    p: Prec,
    opts: &NestOpts,
) -> Result<Vec<NestLevel>> {
    let seed = seed_nice_interval(m, p)?;
    let mut levels: Vec<NestLevel> =
        vec![NestLevel { interval: seed, return_time: 0, central: false, high: false }];
    let mut central_run = 0usize;
    for _k in 0..depth {
        let parent = levels.last().unwrap().interval.clone();
        let r = first_entry_orbit(m, orb, 0, &parent, opts.return_budget, p)?;
        let next = critical_pullback(m, orb, &parent, r, p)?;
        let central = match next.contains(orb.pt(r), p) {
            Some(v) => v,
            None => return Err(Error::Undecided("central/non-central test".into())),
        };
        let (img, _) = hull_forward(m, &next.span, r, p)?;
        let c = Ball::exact(critical_point());
        let high = match img.contains(&c, p) {
            Some(v) => v,
            None => return Err(Error::Undecided("high/low test".into())),
        };
        if central {
            central_run += 1;
            if central_run >= opts.cascade_probe {
                // long central cascade: test for a restrictive interval
                if img.subset_of(&next.span, p) == Some(true) {
                    return Err(Error::RenormalizationDetected { period: r });
                }
            }
        } else {
            central_run = 0;
        }
        levels.push(NestLevel { interval: next, return_time: r, central, high });
    }
    Ok(levels)
}

/// A child of a nice interval: a unimodal pull-back, i.e. a critical chain
/// of order exactly 1, with its transition time.
#[derive(Clone, Debug)]
pub struct ChildRecord {
    pub child: NiceInterval,
    pub transition_time: usize,
}

/// All children of `t` with transition time at most `time_budget`, sorted by
/// transition time (hence nested decreasing). A transition time is possible
/// only when `f^s(c)` lands in `t`, so only those `s` are scanned.
pub fn children(
    m: &MapSpec,
    orb: &mut Orbit,
    t: &NiceInterval,
    time_budget: usize,
    p: Prec,
) -> Result<Vec<ChildRecord>> {
    let mut out = Vec::new();
    orb.ensure(m, time_budget)?;
    for s in 1..=time_budget {
        let inside = match t.contains(orb.pt(s), p) {
            Some(v) => v,
            None => return Err(Error::Undecided(format!("membership of f^{s}(c) in the base"))),
        };
        if !inside {
            continue;
        }
        let chain = critical_chain(m, orb, &t.span, s, p)?;
        if chain.order() == 1 {
            out.push(ChildRecord {
                child: NiceInterval {
                    span: chain.result,
                    provenance: Provenance::CriticalPullback { depth: s },
                    certified_horizon: 0,
                },
                transition_time: s,
            });
        }
    }
    Ok(out)
}

/// A maximal central cascade starting at `t`.
#[derive(Clone, Debug)]
pub struct CascadeRecord {
    /// `t = levels[0]` down to `t^m = levels[m]`.
    pub levels: Vec<NiceInterval>,
    pub shared_return_time: usize,
    pub maximal: bool,
}

/// The maximal central cascade from `t`: successive central return domains
/// while the critical return time stays equal to the first one. The flag is
/// set by the stopping rule `R_t(c) not in t^m`.
pub fn central_cascade(
    m: &MapSpec,
    orb: &mut Orbit,
    t: &NiceInterval,
    budget: usize,
    level_cap: usize,
    p: Prec,
) -> Result<CascadeRecord> {
    let s = first_entry_orbit(m, orb, 0, t, budget, p)?;
    let mut levels = vec![t.clone()];
    loop {
        if levels.len() > level_cap {
            return Err(Error::BudgetExceeded {
                what: "central cascade levels".into(),
                budget: level_cap,
            });
        }
        let cur = levels.last().unwrap();
        let next = critical_pullback(m, orb, cur, s, p)?;
        let still = match next.contains(orb.pt(s), p) {
            Some(v) => v,
            None => return Err(Error::Undecided("cascade stopping rule".into())),
        };
        levels.push(next);
        if !still {
            break;
        }
    }
    Ok(CascadeRecord { levels, shared_return_time: s, maximal: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kneading::{parameter_bisection, BisectionOpts, Target};
    use crate::map::CriticalOrder;

    fn p() -> Prec {
        Prec::new(128, 4096)
    }

    fn fib_map_to(s_max_index: usize) -> MapSpec {
        let mut s = vec![1usize, 2];
        while s.len() < s_max_index {
            let n = s[s.len() - 1] + s[s.len() - 2];
            s.push(n);
        }
        let a = parameter_bisection(
            CriticalOrder::Int(2),
            &Target::SPrefix(s),
            1e-13,
            p(),
            &BisectionOpts::default(),
        )
        .unwrap();
        MapSpec::new(a.mid.clone(), CriticalOrder::Int(2)).unwrap()
    }

    fn fib_map() -> MapSpec {
        fib_map_to(12) // cutting times locked through 233
    }

    #[test]
    fn seed_chebyshev_is_quarter_three_quarters() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let seed = seed_nice_interval(&m, p()).unwrap();
        assert!((seed.span.lo.mid_f64() - 0.25).abs() < 1e-12);
        assert!((seed.span.hi.mid_f64() - 0.75).abs() < 1e-12);
        assert!(seed.is_symmetric(&m, p()));
    }

    #[test]
    fn seed_requires_fixed_point() {
        let m = MapSpec::from_f64(0.4, 2.0).unwrap();
        assert!(matches!(seed_nice_interval(&m, p()), Err(Error::NoFixedPoint)));
    }

    #[test]
    fn seed_fibonacci_residual() {
        let m = fib_map();
        let seed = seed_nice_interval(&m, p()).unwrap();
        let res = m.eval(&seed.span.hi, p()).sub(&seed.span.hi, p());
        assert!(res.width_f64() < 1e-12);
        assert!(res.contains_zero(p()) != Some(false));
        // boundary orbits sit on the repelling fixed point: the enclosure
        // grows like |f'(q)|^j, so the check escalates precision with the
        // horizon it is asked to certify
        let certified = crate::arith::with_escalation(p(), "spot check", |pp| {
            let mut seed = seed_nice_interval(&m, pp)?;
            niceness_spot_check(&m, &mut seed, 500, pp)?;
            Ok(seed.certified_horizon)
        })
        .unwrap();
        assert_eq!(certified, 500);
    }

    #[test]
    fn hull_forward_folds_once_over_c() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let iv = Interval::from_f64(0.4, 0.6, p());
        let (img, folds) = hull_forward(&m, &iv, 1, p()).unwrap();
        assert_eq!(folds, vec![0]);
        assert!((img.lo.mid_f64() - 0.96).abs() < 1e-12);
        assert!((img.hi.mid_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_pullback_fibonacci_first_levels() {
        let m = fib_map();
        let mut orb = Orbit::new(p());
        let seed = seed_nice_interval(&m, p()).unwrap();
        // c_1 sits right of q and c_2 left of q-hat, so the first return
        // of c to the seed is at time 3 = S_2
        let (r, _) = first_entry(&m, &Ball::exact(critical_point()), &seed, 100, p()).unwrap();
        assert_eq!(r, 3);
        let i1 = critical_pullback(&m, &mut orb, &seed, r, p()).unwrap();
        assert!(i1.is_symmetric(&m, p()));
        assert_eq!(i1.span.subset_of(&seed.span, p()), Some(true));
        let i3 = critical_pullback(&m, &mut orb, &seed, 5, p()).unwrap();
        assert!(i3.is_symmetric(&m, p()));
        assert_eq!(i3.span.subset_of(&seed.span, p()), Some(true));
        // endpoints of a pull-back solve f^n(x) = boundary: check forward
        let (img, _) = hull_forward(&m, &i3.span, 5, p()).unwrap();
        assert!(img.lo.intersects(&seed.span.lo, p()) || img.lo.intersects(&seed.span.hi, p()));
    }

    #[test]
    fn pullback_composition() {
        let m = fib_map();
        let mut orb = Orbit::new(p());
        let seed = seed_nice_interval(&m, p()).unwrap();
        let i1 = critical_pullback(&m, &mut orb, &seed, 3, p()).unwrap();
        orb.ensure(&m, 40).unwrap();
        let mut n2 = None;
        for t in 1..=40 {
            if i1.contains(orb.pt(t), p()) == Some(true) {
                n2 = Some(t);
                break;
            }
        }
        let n2 = n2.expect("critical orbit returns to I^1");
        let inner = critical_pullback(&m, &mut orb, &i1, n2, p()).unwrap();
        let direct = critical_pullback(&m, &mut orb, &seed, n2 + 3, p()).unwrap();
        assert!(inner.span.lo.intersects(&direct.span.lo, p()));
        assert!(inner.span.hi.intersects(&direct.span.hi, p()));
    }

    #[test]
    fn first_entry_critical_point_fibonacci() {
        let m = fib_map();
        let seed = seed_nice_interval(&m, p()).unwrap();
        let (k, _) = first_entry(&m, &Ball::exact(critical_point()), &seed, 100, p()).unwrap();
        assert_eq!(k, 3); // S_2: c_1 > q and c_2 < q-hat keep the orbit out until time 3
    }

    #[test]
    fn entry_domain_of_critical_value() {
        let m = fib_map();
        let seed = seed_nice_interval(&m, p()).unwrap();
        let c1 = m.critical_value();
        let (k, dom) = entry_domain(&m, &c1, &seed, 100, p()).unwrap();
        assert_eq!(k, 2); // S_2 - 1
        // entry time is constant on the domain: probe near both ends
        let w = dom.length(p()).mid_f64();
        for frac in [0.1, 0.9] {
            let probe = Ball::from_f64(dom.lo.mid_f64() + frac * w, p());
            let (kk, _) = first_entry(&m, &probe, &seed, 100, p()).unwrap();
            assert_eq!(kk, k);
        }
    }

    #[test]
    fn return_domains_central_present_and_disjoint() {
        let m = fib_map_to(17); // locked through 1597, past the largest sample horizon
        let seed = seed_nice_interval(&m, p()).unwrap();
        let mut orb = Orbit::new(p());
        orb.ensure(&m, 150).unwrap();
        let sample: Vec<Ball> = (1..=150).map(|t| orb.pt(t).clone()).collect();
        let rd = return_domains(&m, &seed, &sample, 4096, p()).unwrap();
        assert_eq!(rd.dropped, 0);
        // the central domain (return time 3) must be present
        assert!(rd.domains.iter().any(|(dom, k)| {
            *k == 3 && dom.contains(&Ball::exact(critical_point()), p()) == Some(true)
        }));
        // domains may share an endpoint with the seed itself, so inclusion
        // is asserted as "not certified outside"
        for (dom, _) in &rd.domains {
            assert_ne!(dom.subset_of(&seed.span, p()), Some(false));
        }
        for pair in rd.domains.windows(2) {
            assert_ne!(pair[0].0.disjoint_from(&pair[1].0, p()), Some(false));
        }
        // count stabilizes as the sample grows
        orb.ensure(&m, 1500).unwrap();
        let sample10: Vec<Ball> = (1..=1500).map(|t| orb.pt(t).clone()).collect();
        let rd10 = return_domains(&m, &seed, &sample10, 4096, p()).unwrap();
        assert_eq!(rd.domains.len(), rd10.domains.len());
    }

    #[test]
    fn well_inside_margin_examples() {
        let i = Interval::from_f64(0.0, 3.0, p());
        let j = Interval::from_f64(1.0, 2.0, p());
        let tau = well_inside_margin(&j, &i, p()).unwrap();
        assert!((tau - 1.0).abs() < 1e-12);
        let j0 = Interval::from_f64(0.0, 1.0, p());
        let tau0 = well_inside_margin(&j0, &i, p()).unwrap();
        assert!(tau0.abs() < 1e-12);
        // (1 + 2 tau0) J = I concentric with tau0 = 0.25
        let i2 = Interval::from_f64(0.75, 2.25, p());
        let tau2 = well_inside_margin(&j, &i2, p()).unwrap();
        assert!((tau2 - 0.25).abs() < 1e-12);
        let outside = Interval::from_f64(2.5, 3.5, p());
        assert!(matches!(well_inside_margin(&outside, &i, p()), Err(Error::NotContained)));
    }

    #[test]
    fn principal_nest_fibonacci_return_times() {
        let m = fib_map();
        let mut orb = Orbit::new(p());
        let nest = principal_nest(&m, &mut orb, 6, p(), &NestOpts::default()).unwrap();
        let rts: Vec<usize> = nest.iter().skip(1).map(|l| l.return_time).collect();
        // the nest return times are the cutting times from S_2 on
        assert_eq!(rts, vec![3, 5, 8, 13, 21, 34]);
        // strictly increasing return times mean every return is non-central
        for l in nest.iter().skip(1) {
            assert!(!l.central);
        }
        for w in nest.windows(2) {
            assert_eq!(w[1].interval.span.subset_of(&w[0].interval.span, p()), Some(true));
        }
    }

    #[test]
    fn children_of_fibonacci_seed() {
        let m = fib_map();
        let mut orb = Orbit::new(p());
        let seed = seed_nice_interval(&m, p()).unwrap();
        let kids = children(&m, &mut orb, &seed, 64, p()).unwrap();
        assert!(!kids.is_empty());
        // the first child is the pull-back at the first return time
        assert_eq!(kids[0].transition_time, 3);
        for w in kids.windows(2) {
            assert!(w[0].transition_time < w[1].transition_time);
            assert_eq!(w[1].child.span.subset_of(&w[0].child.span, p()), Some(true));
        }
        // points of a child return no sooner than its transition time
        // (checked on the critical point itself)
        for ch in &kids {
            let (rt, _) =
                first_entry(&m, &Ball::exact(critical_point()), &ch.child, 4096, p()).unwrap();
            assert!(rt >= ch.transition_time, "return {rt} < transition {}", ch.transition_time);
        }
    }

    #[test]
    fn cascade_trivial_for_noncentral_return() {
        let m = fib_map();
        let mut orb = Orbit::new(p());
        let seed = seed_nice_interval(&m, p()).unwrap();
        let cas = central_cascade(&m, &mut orb, &seed, 4096, 64, p()).unwrap();
        assert_eq!(cas.shared_return_time, 3);
        assert_eq!(cas.levels.len(), 2); // T and T^1 only
        assert!(cas.maximal);
    }

    #[test]
    fn cascade_long_below_saddle_node() {
        // just below the period-3 saddle-node the orbit creeps through the
        // bottleneck: a long but finite central cascade with return time 3
        let m = MapSpec::from_f64(0.95708, 2.0).unwrap();
        let (cas_len, shared, central_run) =
            crate::arith::with_escalation(p(), "saddle-node cascade", |pp| {
                let mut orb = Orbit::new(pp);
                let seed = seed_nice_interval(&m, pp)?;
                let cas = central_cascade(&m, &mut orb, &seed, 1 << 14, 512, pp)?;
                for w in cas.levels.windows(2) {
                    assert_eq!(w[1].span.subset_of(&w[0].span, pp), Some(true));
                }
                let nest = principal_nest(&m, &mut orb, cas.levels.len() - 1, pp, &NestOpts::default())?;
                let run = nest.iter().skip(1).take_while(|l| l.central).count();
                Ok((cas.levels.len(), cas.shared_return_time, run))
            })
            .unwrap();
        assert_eq!(shared, 3);
        assert!(cas_len > 3, "cascade of {cas_len} levels");
        // oracle: cascade length = central run of the nest + 2
        assert_eq!(cas_len, central_run + 2);
    }
}
