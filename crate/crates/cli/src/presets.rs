//! Named parameters. Presets resolve to an exact parameter (chebyshev) or to
//! a bisection target deep enough that the whole run stays combinatorially
//! locked: counts at orbit horizon N are meaningful only when the kneading
//! prefix is pinned past N.

use crate::config::RunConfig;
use unimodal::arith::Prec;
use unimodal::kneading::{parameter_bisection, wild_combinatorics, BisectionOpts, Target};
use unimodal::map::CriticalOrder;
use unimodal::{Error, MapSpec};

#[derive(Copy, Clone, Debug)]
pub enum LockDepth {
    /// Need at least this many cutting times pinned.
    CuttingCount(usize),
    /// Need the last pinned cutting time to exceed this horizon.
    Horizon(usize),
}

pub fn order_from_ell(ell: f64) -> CriticalOrder {
    if ell.fract() == 0.0 && (2.0..64.0).contains(&ell) {
        CriticalOrder::Int(ell as u32)
    } else {
        CriticalOrder::Real(unimodal::astro_float::BigFloat::from_f64(ell, 64))
    }
}

fn extend_until(mut s: Vec<usize>, lock: LockDepth, step: impl Fn(&[usize]) -> usize) -> Vec<usize> {
    loop {
        let done = match lock {
            LockDepth::CuttingCount(k) => s.len() > k + 1,
            LockDepth::Horizon(h) => *s.last().unwrap() > h,
        };
        if done {
            return s;
        }
        let next = step(&s);
        s.push(next);
    }
}

pub fn preset_target(name: &str, lock: LockDepth) -> Result<Option<Target>, Error> {
    match name {
        "chebyshev" => Ok(None),
        "fibonacci" => {
            let s = extend_until(vec![1, 2], lock, |s| s[s.len() - 1] + s[s.len() - 2]);
            Ok(Some(Target::SPrefix(s)))
        }
        "feigenbaum" => {
            let s = extend_until(vec![1, 2], lock, |s| 2 * s[s.len() - 1]);
            Ok(Some(Target::SPrefix(s)))
        }
        "wild" => {
            // grow the merged cutting-time list until it covers the lock
            let mut k = 8;
            loop {
                let w = wild_combinatorics(k);
                let s = w.full_cutting_times();
                let done = match lock {
                    LockDepth::CuttingCount(kk) => s.len() > kk + 1,
                    LockDepth::Horizon(h) => *s.last().unwrap() > h,
                };
                if done {
                    return Ok(Some(Target::SPrefix(s)));
                }
                k += 4;
            }
        }
        other => Err(Error::Config(format!("unknown preset: {other}"))),
    }
}

/// Resolve the map from an explicit parameter or a preset (bisecting deep
/// enough for the requested lock).
pub fn resolve_map(cfg: &RunConfig, lock: LockDepth, p: Prec) -> Result<MapSpec, Error> {
    let order = order_from_ell(cfg.ell);
    if let Some(a) = &cfg.param {
        return MapSpec::new(a.clone(), order);
    }
    let preset = cfg
        .preset
        .as_deref()
        .ok_or_else(|| Error::Config("need either --param or --preset".into()))?;
    match preset_target(preset, lock)? {
        None => MapSpec::new(unimodal::astro_float::BigFloat::from_i8(1, 8), order),
        Some(target) => {
            let a = parameter_bisection(order.clone(), &target, cfg.bisection_tol, p, &BisectionOpts::default())?;
            MapSpec::new(a.mid, order)
        }
    }
}
