//! Validation of the wild-example combinatorics: integer cross-checks of the
//! recursion data, the merged cutting-time pattern, the kneading-map
//! criterion, and (optionally) the principal nest of a realized parameter.

use crate::config::RunConfig;
use crate::presets::{order_from_ell, preset_target, LockDepth};
use unimodal::arith::{with_escalation, Prec};
use unimodal::kneading::{
    bruin_criterion, detect_bruin_lockin, kneading_map_from_s, parameter_bisection,
    BisectionOpts, WildCombinatorics,
};
use unimodal::map::Orbit;
use unimodal::nice::{principal_nest, NestOpts};
use unimodal::{Error, MapSpec};

type Check = (&'static str, bool, String);

/// Run every integer check on a combinatorics record. Each entry is
/// (name, pass, detail); tampered data fails at least one of them.
pub fn validate_wild(w: &WildCombinatorics) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(("seed-values", w.r.first() == Some(&3) && w.t.first() == Some(&2), format!("r0={:?} t0={:?}", w.r.first(), w.t.first())));

    let mut rec_ok = true;
    for k in 0..w.r.len() - 1 {
        if w.r[k + 1] != w.r[k] + w.t[k] {
            rec_ok = false;
            break;
        }
        let expect_t = if k % 2 == 1 { w.r[k] } else { w.r[k + 1] };
        if w.t[k + 1] != expect_t {
            rec_ok = false;
            break;
        }
    }
    out.push(("return-time-recursion", rec_ok, String::new()));

    // merged pattern: r_k for every k >= 1, with r_k + r_{k-1} after odd k
    let mut expect_merged = Vec::new();
    let kc = w.r.len() - 1;
    for k in 1..=kc {
        expect_merged.push(w.r[k]);
        if k % 2 == 1 && k + 1 <= kc {
            expect_merged.push(w.r[k] + w.r[k - 1]);
        }
    }
    out.push((
        "merged-cutting-pattern",
        w.merged_cutting_times == expect_merged,
        String::new(),
    ));
    out.push((
        "merged-strictly-increasing",
        w.merged_cutting_times.windows(2).all(|p| p[0] < p[1]),
        String::new(),
    ));

    let s = w.full_cutting_times();
    let q = match kneading_map_from_s(&s) {
        Ok(q) => q,
        Err(e) => {
            out.push(("cutting-sequence-admissible", false, e.to_string()));
            return out;
        }
    };
    out.push(("cutting-sequence-admissible", true, String::new()));

    let mut wk = w.clone();
    let k0 = wk.detect_k0(&s);
    out.push(("k0-detected", k0.is_some(), format!("k0={k0:?}")));

    match detect_bruin_lockin(&q, 5) {
        Some(k1) => {
            let viol = bruin_criterion(&q, k1, 5);
            out.push(("criterion-lockin", true, format!("k1={k1}")));
            out.push(("criterion-holds-with-n5", viol.is_empty(), format!("{} violations", viol.len())));
        }
        None => {
            out.push(("criterion-lockin", false, "no lock-in index".into()));
        }
    }

    if let Some(k0) = k0 {
        let mut cyc_ok = true;
        for k in k0 + 4..q.len() {
            let expect = match (k - k0) % 3 {
                0 => 5,
                1 => 3,
                _ => 2,
            };
            if k - q[k] != expect {
                cyc_ok = false;
                break;
            }
        }
        out.push(("kneading-gap-cycle", cyc_ok, "gaps cycle 3,2,5 beyond k0+4".into()));
    }
    out
}

/// Bisect for the wild parameter at the configured order and compare the
/// principal-nest return times against the `r_k` recursion values.
pub fn wild_nest_comparison(
    cfg: &RunConfig,
    depth: usize,
    p: Prec,
) -> Result<(Vec<usize>, Vec<usize>), Error> {
    let w = unimodal::kneading::wild_combinatorics(depth + 4);
    let expect: Vec<usize> = w.r.iter().take(depth).map(|&v| v as usize).collect();
    let horizon = (*w.r.get(depth + 1).unwrap_or(&1000) as usize * 8).max(1000);
    let target = preset_target("wild", LockDepth::Horizon(horizon))?
        .expect("wild preset always has a target");
    let order = order_from_ell(cfg.ell);
    let a = parameter_bisection(order.clone(), &target, cfg.bisection_tol, p, &BisectionOpts::default())?;
    let m = MapSpec::new(a.mid, order)?;
    let rts = with_escalation(p, "wild principal nest", |pp| {
        let mut orb = Orbit::new(pp);
        let nest = principal_nest(&m, &mut orb, depth, pp, &NestOpts::default())?;
        Ok(nest.iter().skip(1).map(|l| l.return_time).collect::<Vec<_>>())
    })?;
    Ok((rts, expect))
}
