//! Browser demo bindings: map graphs with cobweb orbits, kneading data, and
//! principal-nest geometry for the static page in `static/`. Each export
//! takes plain numbers and returns JSON, so the page needs no framework.

use unimodal::arith::{with_escalation, Ball, Prec};
use unimodal::kneading::{
    cutting_times, parameter_bisection, wild_combinatorics, BisectionOpts, CuttingOpts, Symbol,
    Target,
};
use unimodal::map::{critical_point, CriticalOrder, Orbit};
use unimodal::nice::{principal_nest, NestOpts};
use unimodal::{Error, MapSpec};
use wasm_bindgen::prelude::*;

fn prec() -> Prec {
    Prec::new(128, 2048)
}

fn mk_map(a: f64, ell: f64) -> Result<MapSpec, Error> {
    MapSpec::from_f64(a, ell)
}

fn err_json(e: &Error) -> String {
    serde_json::json!({ "error": e.to_string() }).to_string()
}

/// Graph of `f^k` sampled on a grid, plus a cobweb orbit from the critical
/// point: `{ graph: [[x, y], ...], cobweb: [x0, x1, ...] }`.
#[wasm_bindgen]
pub fn map_graph(a: f64, ell: f64, power: usize, samples: usize, cobweb_len: usize) -> String {
    let p = prec();
    let m = match mk_map(a, ell) {
        Ok(m) => m,
        Err(e) => return err_json(&e),
    };
    let samples = samples.clamp(16, 4096);
    let power = power.clamp(1, 8);
    let mut graph = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let x = i as f64 / samples as f64;
        let y = m.iterate(&Ball::from_f64(x, p), power, p);
        graph.push(vec![x, y.mid_f64()]);
    }
    let mut cobweb = Vec::with_capacity(cobweb_len.min(512) + 1);
    let mut x = Ball::exact(critical_point());
    cobweb.push(x.mid_f64());
    for _ in 0..cobweb_len.min(512) {
        x = m.eval(&x, p);
        cobweb.push(x.mid_f64());
    }
    serde_json::json!({ "graph": graph, "cobweb": cobweb }).to_string()
}

/// Kneading data: cutting times, kneading map, itinerary prefix and the
/// closest precritical points.
#[wasm_bindgen]
pub fn kneading_json(a: f64, ell: f64, k_count: usize, horizon: usize) -> String {
    let p = prec();
    let m = match mk_map(a, ell) {
        Ok(m) => m,
        Err(e) => return err_json(&e),
    };
    let opts = CuttingOpts { horizon: horizon.clamp(64, 1 << 17), z_depth: 12 };
    match cutting_times(&m, k_count.clamp(1, 40), p, &opts) {
        Ok(kd) => {
            let sym: String = kd
                .symbols
                .iter()
                .take(120)
                .map(|s| match s {
                    Symbol::L => 'L',
                    Symbol::C => 'C',
                    Symbol::R => 'R',
                })
                .collect();
            let z: Vec<f64> = kd.z.iter().map(|b| b.mid_f64()).collect();
            serde_json::json!({ "S": kd.s, "Q": kd.q, "sym": sym, "z": z }).to_string()
        }
        Err(e) => err_json(&e),
    }
}

/// Principal nest levels with endpoints, return times and kinds, plus an
/// orbit prefix for drawing.
#[wasm_bindgen]
pub fn nest_json(a: f64, ell: f64, depth: usize) -> String {
    let p = prec();
    let m = match mk_map(a, ell) {
        Ok(m) => m,
        Err(e) => return err_json(&e),
    };
    let out = with_escalation(p, "nest", |pp| {
        let mut orb = Orbit::new(pp);
        let nest = principal_nest(
            &m,
            &mut orb,
            depth.clamp(1, 12),
            pp,
            &NestOpts { return_budget: 1 << 14, cascade_probe: 24 },
        )?;
        orb.ensure(&m, 64)?;
        let orbit: Vec<f64> = (1..=64).map(|t| orb.pt(t).mid_f64()).collect();
        let levels: Vec<serde_json::Value> = nest
            .iter()
            .map(|l| {
                serde_json::json!({
                    "lo": l.interval.span.lo.mid_f64(),
                    "hi": l.interval.span.hi.mid_f64(),
                    "return_time": l.return_time,
                    "central": l.central,
                    "high": l.high,
                })
            })
            .collect();
        Ok(serde_json::json!({ "levels": levels, "orbit": orbit }).to_string())
    });
    out.unwrap_or_else(|e| err_json(&e))
}

/// Resolve a preset parameter by certified bisection at the given order and
/// lock depth; returns the parameter and the realized cutting times.
#[wasm_bindgen]
pub fn preset_json(name: &str, ell: f64, lock_past: usize) -> String {
    let p = prec();
    let order = if ell.fract() == 0.0 && (2.0..64.0).contains(&ell) {
        CriticalOrder::Int(ell as u32)
    } else {
        CriticalOrder::Real(unimodal::astro_float::BigFloat::from_f64(ell, 64))
    };
    let lock = lock_past.clamp(64, 1 << 15);
    let target = match name {
        "chebyshev" => {
            return serde_json::json!({ "a": 1.0, "S": (1..=12usize).collect::<Vec<_>>() })
                .to_string()
        }
        "fibonacci" => {
            let mut s = vec![1usize, 2];
            while *s.last().unwrap() <= lock {
                s.push(s[s.len() - 1] + s[s.len() - 2]);
            }
            s
        }
        "feigenbaum" => {
            let mut s = vec![1usize, 2];
            while *s.last().unwrap() <= lock {
                s.push(2 * s[s.len() - 1]);
            }
            s
        }
        "wild" => {
            let mut k = 8;
            loop {
                let w = wild_combinatorics(k);
                let s = w.full_cutting_times();
                if *s.last().unwrap() > lock {
                    break s;
                }
                k += 4;
            }
        }
        other => return err_json(&Error::Config(format!("unknown preset {other}"))),
    };
    match parameter_bisection(
        order,
        &Target::SPrefix(target.clone()),
        1e-13,
        p,
        &BisectionOpts::default(),
    ) {
        Ok(ball) => {
            serde_json::json!({ "a": ball.mid_f64(), "width": ball.width_f64(), "S": target })
                .to_string()
        }
        Err(e) => err_json(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_and_kneading_smoke() {
        let g: serde_json::Value = serde_json::from_str(&map_graph(1.0, 2.0, 2, 64, 10)).unwrap();
        assert_eq!(g["graph"].as_array().unwrap().len(), 65);
        let k: serde_json::Value =
            serde_json::from_str(&kneading_json(1.0, 2.0, 5, 4096)).unwrap();
        assert_eq!(k["S"], serde_json::json!([1, 2, 3, 4, 5, 6]));
        let n: serde_json::Value = serde_json::from_str(&nest_json(0.95708, 2.0, 4)).unwrap();
        assert!(n["levels"].as_array().unwrap().len() >= 4);
        let pr: serde_json::Value =
            serde_json::from_str(&preset_json("fibonacci", 2.0, 200)).unwrap();
        assert!((pr["a"].as_f64().unwrap() - 0.9781).abs() < 1e-3);
    }
}
