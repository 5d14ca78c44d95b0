//! The symmetric-power unimodal family `f(x) = a (1 - |2x - 1|^ell)` and the
//! primitive certified operations everything else is built on: evaluation,
//! iteration, the symmetric point, the orientation-reversing fixed point and
//! monotone branch decomposition.
//!
//! The critical point is exactly `c = 1/2` and the family is exactly
//! symmetric, `f(x) = f(1 - x)`, which makes critical pull-backs symmetric
//! for free. Other two-lap maps can be plugged in by mirroring this module's
//! surface (evaluate / branch inverse / symmetric point); every downstream
//! module consumes only these operations.

use crate::arith::{with_escalation, Ball, Interval, Prec};
use crate::error::{Error, Result};
use astro_float::{BigFloat, RoundingMode as RM};
use std::cmp::Ordering;

/// Critical order of the family: an integer fast path (squaring for ell = 2)
/// and a general real path through certified `pow`.
#[derive(Clone, Debug)]
pub enum CriticalOrder {
    Int(u32),
    Real(BigFloat),
}

impl CriticalOrder {
    pub fn as_f64(&self) -> f64 {
        match self {
            CriticalOrder::Int(k) => *k as f64,
            CriticalOrder::Real(l) => crate::arith::bigfloat_to_f64(l),
        }
    }
}

/// A map of the family `x -> a (1 - |2x - 1|^ell)` with `0 < a <= 1`,
/// `ell > 1`. The parameter is an exact binary float, so evaluation error
/// comes only from the enclosure arithmetic itself.
#[derive(Clone, Debug)]
pub struct MapSpec {
    pub a: BigFloat,
    pub ell: CriticalOrder,
}

/// Side of the critical point.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

pub fn critical_point() -> BigFloat {
    BigFloat::from_f64(0.5, 8)
}

impl MapSpec {
    pub fn new(a: BigFloat, ell: CriticalOrder) -> Result<Self> {
        let zero = BigFloat::from_i8(0, 8);
        let one = BigFloat::from_i8(1, 8);
        if !(a > zero && a <= one) {
            return Err(Error::Config("parameter a must satisfy 0 < a <= 1".into()));
        }
        match &ell {
            CriticalOrder::Int(k) if *k >= 2 => {}
            CriticalOrder::Real(l) if *l > one => {}
            _ => return Err(Error::Config("critical order ell must be > 1".into())),
        }
        Ok(MapSpec { a, ell })
    }

    pub fn from_f64(a: f64, ell: f64) -> Result<Self> {
        let order = if ell.fract() == 0.0 && ell >= 2.0 && ell < 64.0 {
            CriticalOrder::Int(ell as u32)
        } else {
            CriticalOrder::Real(BigFloat::from_f64(ell, 64))
        };
        MapSpec::new(BigFloat::from_f64(a, 64), order)
    }

    /// `f(c) = a`, exactly.
    pub fn critical_value(&self) -> Ball {
        Ball::exact(self.a.clone())
    }

    /// Certified enclosure of `f(x) = a (1 - |2x-1|^ell)`.
    pub fn eval(&self, x: &Ball, p: Prec) -> Ball {
        let one = Ball::one(p);
        let u = x.mul_i(2, p).sub(&one, p).abs(p);
        let w = match &self.ell {
            CriticalOrder::Int(k) => u.powi_nonneg(*k, p),
            CriticalOrder::Real(l) => u.pow_nonneg(&Ball::exact(l.clone()), p),
        };
        one.sub(&w, p).mul(&Ball::exact(self.a.clone()), p)
    }

    /// Enclosure of `f^n(x)` at the given working precision.
    pub fn iterate(&self, x: &Ball, n: usize, p: Prec) -> Ball {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.eval(&y, p);
        }
        y
    }

    /// Enclosure of `f^n(x)` with the precision escalated until the output
    /// radius is at most `tol` (or the cap is hit).
    pub fn iterate_to_tolerance(&self, x: &Ball, n: usize, p0: Prec, tol: f64) -> Result<Ball> {
        with_escalation(p0, "iterating to requested tolerance", |p| {
            let y = self.iterate(x, n, p);
            if y.width_f64() <= 2.0 * tol {
                Ok(y)
            } else {
                Err(Error::Undecided("iterate radius above tolerance".into()))
            }
        })
    }

    /// The symmetric point: the preimage of `f(x)` other than `x` itself,
    /// with `hat(c) = c`. Exact for this family: `1 - x`.
    pub fn hat_point(&self, x: &Ball, p: Prec) -> Ball {
        Ball::one(p).sub(x, p)
    }

    /// Mirror image of an interval across the critical point.
    pub fn hat_interval(&self, iv: &Interval, p: Prec) -> Interval {
        Interval { lo: self.hat_point(&iv.hi, p), hi: self.hat_point(&iv.lo, p) }
    }

    /// Side of the critical point a ball lies on, certified.
    pub fn side_of_c(&self, x: &Ball, p: Prec) -> Result<Side> {
        let c = critical_point();
        match x.cmp_point(&c, p) {
            Some(Ordering::Less) => Ok(Side::Left),
            Some(Ordering::Greater) => Ok(Side::Right),
            Some(Ordering::Equal) => Err(Error::NotInDomain("point is the critical point".into())),
            None => Err(Error::Undecided("side of the critical point".into())),
        }
    }

    /// The orientation-reversing fixed point `q` in `(c, 1)`, certified by
    /// bisection on the sign of `f(x) - x`. Requires `f(c) > c`.
    pub fn fixed_point_q(&self, p: Prec) -> Result<Ball> {
        let c = critical_point();
        if !(self.a > c) {
            return Err(Error::NoFixedPoint);
        }
        with_escalation(p, "certifying the fixed point q", |pp| {
            // dyadic bracket [lo, hi] with f(lo) - lo > 0 > f(hi) - hi
            let mut lo = c.clone();
            let mut hi = BigFloat::from_i8(1, 8);
            // f(c) - c = a - 1/2 > 0; f(1) - 1 = -1 < 0. The bracket target
            // stays well above the evaluation radius at this precision, so
            // the sign tests near the root remain decidable.
            let target_exp = -((pp.bits * 3 / 4) as i64);
            let half = BigFloat::from_f64(0.5, 8);
            loop {
                let width = hi.sub(&lo, 64, RM::Up);
                let small = match width.exponent() {
                    Some(e) => (e as i64) < target_exp,
                    None => false,
                };
                if small || width.is_zero() {
                    break;
                }
                let mid = lo.add(&hi, pp.bits, RM::ToEven).mul(&half, pp.bits, RM::ToEven);
                let g = self.eval(&Ball::exact(mid.clone()), pp).sub(&Ball::exact(mid.clone()), pp);
                match g.sign(pp) {
                    Some(Ordering::Greater) => lo = mid,
                    Some(Ordering::Less) => hi = mid,
                    Some(Ordering::Equal) => {
                        return Ok(Ball::exact(mid));
                    }
                    None => return Err(Error::Undecided("sign of f(q)-q near the root".into())),
                }
            }
            Ok(Ball::from_endpoints(&lo, &hi, pp))
        })
    }

    fn root_inv(&self, w: &Ball, p: Prec) -> Ball {
        // w^(1/ell), w certified in [0, 1]
        match &self.ell {
            CriticalOrder::Int(2) => w.sqrt_nonneg(p),
            CriticalOrder::Int(k) => {
                let e = Ball::one(p).div(&Ball::exact(BigFloat::from_i32(*k as i32, 16)), p).expect("k >= 2");
                w.pow_nonneg(&e, p)
            }
            CriticalOrder::Real(l) => {
                let e = Ball::one(p).div(&Ball::exact(l.clone()), p).expect("ell > 1");
                w.pow_nonneg(&e, p)
            }
        }
    }

    /// Preimage of `y` on one lap: solves `f(x) = y` with `x` on the given
    /// side of `c`. `y` must satisfy `y <= f(c)` up to enclosure slack.
    pub fn lap_preimage(&self, y: &Ball, side: Side, p: Prec) -> Ball {
        let ya = y.div(&Ball::exact(self.a.clone()), p).expect("a > 0 exact");
        let w = self.root_inv(&Ball::one(p).sub(&ya, p), p);
        let half = Ball::exact(critical_point());
        let half_w = w.mul(&Ball::exact(BigFloat::from_f64(0.5, 8)), p);
        match side {
            Side::Left => half.sub(&half_w, p),
            Side::Right => half.add(&half_w, p),
        }
    }

    /// The component of `f^{-1}(target)` containing `through`, where
    /// `through` is a point with `f(through)` certified inside `target`.
    /// This is one backward step of a chain.
    pub fn pullback_component(&self, target: &Interval, through: &Ball, p: Prec) -> Result<Interval> {
        let a = Ball::exact(self.a.clone());
        // Does the critical value lie inside the target?
        let crit_inside = match (a.cmp(&target.lo, p), a.cmp(&target.hi, p)) {
            (Some(Ordering::Greater), Some(Ordering::Less)) => true,
            (Some(Ordering::Less), _) | (Some(Ordering::Equal), _) => {
                return Err(Error::NotInDomain("pull-back target above the critical value".into()))
            }
            (_, Some(Ordering::Greater)) | (_, Some(Ordering::Equal)) => false,
            _ => return Err(Error::Undecided("critical value against pull-back target".into())),
        };
        if crit_inside {
            // single component straddling c: (L-preimage of lo, R-preimage of lo)
            let lo = self.lap_preimage(&target.lo, Side::Left, p);
            let hi = self.lap_preimage(&target.lo, Side::Right, p);
            let comp = Interval::new(lo, hi, p)?;
            match comp.contains(through, p) {
                Some(true) => Ok(comp),
                Some(false) => Err(Error::NotInDomain("point not in the critical pull-back component".into())),
                None => Err(Error::Undecided("membership in the critical pull-back component".into())),
            }
        } else {
            // two monotone components; pick the lap by the side of `through`
            let side = self.side_of_c(through, p)?;
            let (lo, hi) = match side {
                Side::Left => (
                    self.lap_preimage(&target.lo, Side::Left, p),
                    self.lap_preimage(&target.hi, Side::Left, p),
                ),
                Side::Right => (
                    self.lap_preimage(&target.hi, Side::Right, p),
                    self.lap_preimage(&target.lo, Side::Right, p),
                ),
            };
            Interval::new(lo, hi, p)
        }
    }

    /// Ordered maximal intervals of monotonicity of `f^n` on `window`,
    /// with orientations. Branch endpoints are the preimages of `c` of
    /// order `< n` inside the window.
    pub fn monotone_branches(
        &self,
        n: usize,
        window: &Interval,
        p: Prec,
        branch_cap: usize,
    ) -> Result<Vec<(Interval, Orientation)>> {
        if n == 0 {
            return Err(Error::Config("monotone branch decomposition needs n >= 1".into()));
        }
        // separators[j] = certified enclosures of points with f^j(x) = c
        let mut seps: Vec<Ball> = Vec::new();
        let mut level: Vec<Ball> = vec![Ball::exact(critical_point())];
        let a_ball = Ball::exact(self.a.clone());
        for j in 0..n {
            if j > 0 {
                let mut next = Vec::new();
                for s in &level {
                    // preimages of s on both laps, when f can reach s
                    match s.cmp(&a_ball, p) {
                        Some(Ordering::Greater) => continue,
                        Some(_) => {}
                        None => return Err(Error::Undecided("separator against critical value".into())),
                    }
                    match s.sign(p) {
                        Some(Ordering::Less) => continue,
                        Some(_) => {}
                        None => return Err(Error::Undecided("separator sign".into())),
                    }
                    next.push(self.lap_preimage(s, Side::Left, p));
                    next.push(self.lap_preimage(s, Side::Right, p));
                }
                level = next;
            }
            for s in &level {
                if window.contains(s, p) == Some(true) {
                    seps.push(s.clone());
                }
            }
            if seps.len() > branch_cap {
                return Err(Error::BranchBudgetExceeded(branch_cap));
            }
        }
        // sort separators by certified order
        let mut order_err = None;
        seps.sort_by(|x, y| match x.cmp(y, p) {
            Some(o) => o,
            None => {
                order_err = Some(Error::Undecided("separator ordering".into()));
                Ordering::Equal
            }
        });
        if let Some(e) = order_err {
            return Err(e);
        }
        // branches between consecutive cut points
        let mut cuts = vec![window.lo.clone()];
        cuts.extend(seps);
        cuts.push(window.hi.clone());
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let iv = Interval::new(w[0].clone(), w[1].clone(), p)?;
            let orient = self.branch_orientation(&iv, n, p)?;
            out.push((iv, orient));
        }
        Ok(out)
    }

    /// Orientation of `f^n` on an interval containing no branch point:
    /// the parity of the number of iterates spent on the decreasing lap.
    fn branch_orientation(&self, iv: &Interval, n: usize, p: Prec) -> Result<Orientation> {
        let two = BigFloat::from_i8(2, 8);
        let mid = iv.lo.mid.add(&iv.hi.mid, p.bits, RM::ToEven).div(&two, p.bits, RM::ToEven);
        let mut x = Ball::exact(mid);
        let mut flips = 0usize;
        for _ in 0..n {
            match self.side_of_c(&x, p) {
                Ok(Side::Right) => flips += 1,
                Ok(Side::Left) => {}
                Err(e) => return Err(e),
            }
            x = self.eval(&x, p);
        }
        Ok(if flips % 2 == 0 { Orientation::Increasing } else { Orientation::Decreasing })
    }
}

/// Cached certified critical orbit `c, f(c), f^2(c), ...` with the side of
/// `c` each point lies on. Rebuilt from scratch when precision escalates.
pub struct Orbit {
    pub p: Prec,
    pts: Vec<Ball>,
    sides: Vec<Side>,
}

impl Orbit {
    pub fn new(p: Prec) -> Self {
        Orbit { p, pts: vec![Ball::exact(critical_point())], sides: vec![Side::Left] }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    /// Extend the orbit to `n + 1` points (indices `0..=n`).
    pub fn ensure(&mut self, map: &MapSpec, n: usize) -> Result<()> {
        let c = critical_point();
        while self.pts.len() <= n {
            let t = self.pts.len();
            let next = map.eval(&self.pts[t - 1], self.p);
            if next.is_exact() && next.mid == c {
                return Err(Error::Superattracting(t));
            }
            let side = match next.cmp_point(&c, self.p) {
                Some(Ordering::Less) => Side::Left,
                Some(Ordering::Greater) => Side::Right,
                Some(Ordering::Equal) => return Err(Error::Superattracting(t)),
                None => {
                    return Err(Error::Undecided(format!(
                        "side of critical orbit point {t} (near-superattracting?)"
                    )))
                }
            };
            self.pts.push(next);
            self.sides.push(side);
        }
        Ok(())
    }

    /// `f^t(c)` as a certified ball (must be ensured first).
    pub fn pt(&self, t: usize) -> &Ball {
        &self.pts[t]
    }

    /// Side of `c` of `f^t(c)`, `t >= 1`.
    pub fn side(&self, t: usize) -> Side {
        self.sides[t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::bigfloat_to_f64;

    fn p() -> Prec {
        Prec::new(64, 2048)
    }

    fn close(b: &Ball, v: f64, tol: f64) -> bool {
        (b.mid_f64() - v).abs() <= tol + b.width_f64()
    }

    #[test]
    fn eval_critical_point_gives_a() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let y = m.eval(&Ball::exact(critical_point()), p());
        assert!(close(&y, 1.0, 1e-15));
        let m = MapSpec::from_f64(0.8, 2.0).unwrap();
        let y0 = m.eval(&Ball::from_f64(0.0, p()), p());
        assert!(close(&y0, 0.0, 1e-15));
        let y1 = m.eval(&Ball::from_f64(1.0, p()), p());
        assert!(close(&y1, 0.0, 1e-15));
        // f(1/4) = 0.8 * (1 - (1/2)^2) = 0.6, exactly representable inputs
        let y = m.eval(&Ball::from_f64(0.25, p()), p());
        assert!(close(&y, 0.6, 1e-15));
    }

    #[test]
    fn iterate_identity_and_collapse() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let x = Ball::from_f64(0.3, p());
        let y = m.iterate(&x, 0, p());
        assert_eq!(y.mid_f64(), 0.3);
        // f(1/2) = 1, f(1) = 0
        let z = m.iterate(&Ball::exact(critical_point()), 2, p());
        assert!(close(&z, 0.0, 1e-15));
    }

    #[test]
    fn iterate_agrees_with_high_precision_reference() {
        let m = MapSpec::from_f64(0.9, 2.0).unwrap();
        let base = m.iterate(&Ball::exact(critical_point()), 10, Prec::new(64, 64));
        let refined = m.iterate(&Ball::exact(critical_point()), 10, Prec::new(256, 256));
        assert!(base.intersects(&refined, p()));
        assert!(refined.width_f64() < base.width_f64());
    }

    #[test]
    fn iterate_composition_encloses() {
        let m = MapSpec::from_f64(0.97, 2.0).unwrap();
        let x = Ball::from_f64(0.37, p());
        let whole = m.iterate(&x, 11, p());
        let parts = m.iterate(&m.iterate(&x, 7, p()), 4, p());
        assert!(whole.intersects(&parts, p()));
    }

    #[test]
    fn hat_point_symmetry() {
        let m = MapSpec::from_f64(0.8, 2.0).unwrap();
        let hp = m.hat_point(&Ball::from_f64(0.3, p()), p());
        assert!(close(&hp, 0.7, 1e-15));
        let c = Ball::exact(critical_point());
        let hc = m.hat_point(&c, p());
        assert!(close(&hc, 0.5, 1e-15));
        // f(hat x) = f(x) and hat(hat x) = x
        let x = Ball::from_f64(0.2371, p());
        let fx = m.eval(&x, p());
        let fhx = m.eval(&m.hat_point(&x, p()), p());
        assert!(fx.intersects(&fhx, p()));
        let hhx = m.hat_point(&m.hat_point(&x, p()), p());
        assert!(hhx.intersects(&x, p()));
    }

    #[test]
    fn fixed_point_chebyshev_is_three_quarters() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let q = m.fixed_point_q(p()).unwrap();
        assert!((q.mid_f64() - 0.75).abs() < 1e-12);
        // residual |f(q) - q| <= 2 rad after refinement
        let res = m.eval(&q, p()).sub(&q, p());
        assert!(res.contains_zero(p()) != Some(false));
        assert!(res.width_f64() < 1e-12);
    }

    #[test]
    fn fixed_point_requires_f_c_above_c() {
        let m = MapSpec::from_f64(0.4, 2.0).unwrap();
        assert!(matches!(m.fixed_point_q(p()), Err(Error::NoFixedPoint)));
    }

    #[test]
    fn fixed_point_residual_small_at_09() {
        let m = MapSpec::from_f64(0.9, 2.0).unwrap();
        let q = m.fixed_point_q(p()).unwrap();
        let res = m.eval(&q, p()).sub(&q, p());
        assert!(res.width_f64() < 1e-12);
        // closed form for ell = 2: q = 1 - 1/(4a)
        let expect = 1.0 - 1.0 / 3.6;
        assert!((q.mid_f64() - expect).abs() < 1e-12);
    }

    #[test]
    fn branches_of_f_and_f2() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let window = Interval::from_f64(0.0, 1.0, p());
        let b1 = m.monotone_branches(1, &window, p(), 64).unwrap();
        assert_eq!(b1.len(), 2);
        assert_eq!(b1[0].1, Orientation::Increasing);
        assert_eq!(b1[1].1, Orientation::Decreasing);
        let b2 = m.monotone_branches(2, &window, p(), 64).unwrap();
        assert_eq!(b2.len(), 4);
        // orientations alternate across separators
        for w in b2.windows(2) {
            assert_ne!(w[0].1, w[1].1);
        }
        // oracle: count slope sign changes of f^2 on a fine grid
        let mut changes = 0;
        let mut prev = None;
        let n = 2000;
        let f2 = |x: f64| {
            let f = |t: f64| 1.0 * (1.0 - (2.0 * t - 1.0) * (2.0 * t - 1.0));
            f(f(x))
        };
        for i in 0..n {
            let x0 = i as f64 / n as f64;
            let x1 = (i + 1) as f64 / n as f64;
            let slope = f2(x1) - f2(x0);
            if slope != 0.0 {
                let s = slope > 0.0;
                if let Some(ps) = prev {
                    if ps != s {
                        changes += 1;
                    }
                }
                prev = Some(s);
            }
        }
        assert_eq!(changes + 1, 4);
    }

    #[test]
    fn branch_inside_single_lap_is_whole_window() {
        let m = MapSpec::from_f64(0.95, 2.0).unwrap();
        let window = Interval::from_f64(0.05, 0.10, p());
        let b = m.monotone_branches(2, &window, p(), 64).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].0.lo.mid_f64(), 0.05);
        assert_eq!(b[0].0.hi.mid_f64(), 0.10);
    }

    #[test]
    fn branch_count_bound() {
        let m = MapSpec::from_f64(0.99, 2.0).unwrap();
        let window = Interval::from_f64(0.0, 1.0, p());
        for n in 1..=6 {
            let b = m.monotone_branches(n, &window, p(), 1 << 12).unwrap();
            assert!(b.len() <= 1 << n);
        }
    }

    #[test]
    fn lap_preimage_round_trips() {
        let m = MapSpec::from_f64(0.93, 2.0).unwrap();
        let y = Ball::from_f64(0.4, p());
        for side in [Side::Left, Side::Right] {
            let x = m.lap_preimage(&y, side, p());
            let back = m.eval(&x, p());
            assert!(back.intersects(&y, p()), "side {side:?}");
        }
    }

    #[test]
    fn pullback_component_infers_lap() {
        let m = MapSpec::from_f64(0.93, 2.0).unwrap();
        let target = Interval::from_f64(0.35, 0.45, p());
        // through a left-lap point whose image is inside the target
        let through = m.lap_preimage(&Ball::from_f64(0.4, p()), Side::Left, p());
        let comp = m.pullback_component(&target, &through, p()).unwrap();
        assert!(comp.contains(&through, p()) == Some(true));
        // image of the component endpoints lands on target endpoints
        let img_lo = m.eval(&comp.lo, p());
        assert!(img_lo.intersects(&target.lo, p()));
        // critical component when the target straddles the critical value
        let m2 = MapSpec::from_f64(0.9, 2.0).unwrap();
        let target2 = Interval::from_f64(0.85, 0.95, p());
        let comp2 = m2.pullback_component(&target2, &Ball::exact(critical_point()), p()).unwrap();
        assert!(comp2.contains(&Ball::exact(critical_point()), p()) == Some(true));
        let w = bigfloat_to_f64(&comp2.length(p()).mid);
        assert!(w > 0.0);
    }

    #[test]
    fn orbit_cache_sides() {
        let m = MapSpec::from_f64(0.9781, 2.0).unwrap();
        let mut orb = Orbit::new(p());
        orb.ensure(&m, 50).unwrap();
        assert_eq!(orb.side(1), Side::Right);
        for t in 1..=50 {
            let s = orb.side(t);
            let mid = orb.pt(t).mid_f64();
            assert_eq!(s == Side::Left, mid < 0.5, "t={t}");
        }
    }

    #[test]
    fn superattracting_detected_exactly() {
        // a = 1/2 makes f(c) = c exactly
        let m = MapSpec::from_f64(0.5, 2.0).unwrap();
        let mut orb = Orbit::new(p());
        assert!(matches!(orb.ensure(&m, 3), Err(Error::Superattracting(1))));
    }
}
