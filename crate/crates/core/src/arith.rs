//! Ball arithmetic with adaptive precision.
//!
//! Every geometric quantity in this crate is a [`Ball`]: a rigorous enclosure
//! `mid ± rad` of a real number. Midpoints are arbitrary-precision binary
//! floats, radii are one-word floats rounded away from zero, so every
//! operation returns an enclosure of the true image set. Comparisons are
//! certified: they either resolve or report [`Error::Undecided`], and the
//! caller retries at doubled precision up to the configured cap. Nothing in
//! the crate ever guesses a sign.

use crate::error::{Error, Result};
use astro_float::{BigFloat, Consts, RoundingMode as RM, Sign, Word, WORD_BIT_SIZE};
use std::cell::RefCell;
use std::cmp::Ordering;

/// Precision of radius arithmetic (radii are bounds, not measurements).
const RAD_PREC: usize = 64;

pub const DEFAULT_START_BITS: usize = 64;
pub const DEFAULT_PRECISION_CAP: usize = 4096;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Run `f` with the thread-local constants cache used by `pow`, `exp`, `ln`.
pub fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Working precision plus the escalation cap.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Prec {
    pub bits: usize,
    pub cap: usize,
}

impl Prec {
    pub fn new(bits: usize, cap: usize) -> Self {
        Prec { bits: bits.max(8), cap: cap.max(bits) }
    }

    pub fn start(cap: usize) -> Self {
        Prec::new(DEFAULT_START_BITS, cap)
    }

    /// Doubled precision, or `None` once the cap is reached.
    pub fn escalated(self) -> Option<Prec> {
        if self.bits >= self.cap {
            None
        } else {
            Some(Prec { bits: (self.bits * 2).min(self.cap), ..self })
        }
    }
}

impl Default for Prec {
    fn default() -> Self {
        Prec::new(DEFAULT_START_BITS, DEFAULT_PRECISION_CAP)
    }
}

/// Retry `f` with doubled precision while it reports `Undecided`.
pub fn with_escalation<T>(p0: Prec, what: &str, mut f: impl FnMut(Prec) -> Result<T>) -> Result<T> {
    let mut p = p0;
    loop {
        match f(p) {
            Err(Error::Undecided(_)) => match p.escalated() {
                Some(next) => p = next,
                None => return Err(Error::PrecisionExhausted(what.to_string())),
            },
            other => return other,
        }
    }
}

/// Exact power of two, `2^k`.
pub fn pow2(k: i64) -> BigFloat {
    debug_assert!(k > i32::MIN as i64 + 2 && k < i32::MAX as i64 - 2);
    // mantissa 0.1 (binary) scaled by 2^(k+1)
    BigFloat::from_words(&[(1 as Word) << (WORD_BIT_SIZE - 1)], Sign::Pos, (k + 1) as i32)
}

/// Upper bound on the rounding error of a correctly rounded result `r`
/// computed at precision `p`: one ulp, i.e. `2^(exp(r) - p)`.
fn ulp_of(r: &BigFloat, p: usize) -> BigFloat {
    if r.is_zero() {
        return BigFloat::from_i8(0, RAD_PREC);
    }
    match r.exponent() {
        Some(e) => pow2(e as i64 - p as i64),
        // NaN/Inf: poison the radius so downstream comparisons stay undecided
        None => BigFloat::from_f64(f64::INFINITY, RAD_PREC),
    }
}

fn rad_add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, RAD_PREC, RM::Up)
}

/// True if the float carries no rounding error (astro-float tracks this).
fn is_exact_value(x: &BigFloat) -> bool {
    match x.as_raw_parts() {
        Some((_, _, _, _, inexact)) => !inexact,
        None => false,
    }
}

/// A rigorous enclosure `mid ± rad` of a real number.
#[derive(Clone, Debug)]
pub struct Ball {
    pub mid: BigFloat,
    pub rad: BigFloat,
}

impl Ball {
    pub fn exact(mid: BigFloat) -> Self {
        Ball { mid, rad: BigFloat::from_i8(0, RAD_PREC) }
    }

    pub fn from_f64(x: f64, p: Prec) -> Self {
        Ball::exact(BigFloat::from_f64(x, p.bits))
    }

    pub fn zero() -> Self {
        Ball::exact(BigFloat::from_i8(0, RAD_PREC))
    }

    pub fn one(p: Prec) -> Self {
        Ball::exact(BigFloat::from_i8(1, p.bits))
    }

    pub fn with_rad(mid: BigFloat, rad: BigFloat) -> Self {
        Ball { mid, rad }
    }

    /// Enclosure of everything between `lo` and `hi` (inclusive).
    pub fn from_endpoints(lo: &BigFloat, hi: &BigFloat, p: Prec) -> Self {
        debug_assert!(lo <= hi);
        if lo == hi {
            return Ball::exact(lo.clone());
        }
        let mid = lo.add(hi, p.bits, RM::ToEven).mul(&BigFloat::from_f64(0.5, 8), p.bits, RM::ToEven);
        let half = hi.sub(lo, RAD_PREC, RM::Up).mul(&BigFloat::from_f64(0.5, 8), RAD_PREC, RM::Up);
        let rad = rad_add(&rad_add(&half, &ulp_of(&mid, p.bits)), &ulp_of(&half, RAD_PREC));
        Ball { mid, rad }
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Certified lower endpoint (rounded toward -inf).
    pub fn lo(&self, p: Prec) -> BigFloat {
        if self.rad.is_zero() { self.mid.clone() } else { self.mid.sub(&self.rad, p.bits, RM::Down) }
    }

    /// Certified upper endpoint (rounded toward +inf).
    pub fn hi(&self, p: Prec) -> BigFloat {
        if self.rad.is_zero() { self.mid.clone() } else { self.mid.add(&self.rad, p.bits, RM::Up) }
    }

    pub fn add(&self, other: &Ball, p: Prec) -> Ball {
        let mid = self.mid.add(&other.mid, p.bits, RM::ToEven);
        if self.rad.is_zero() && other.rad.is_zero() && is_exact_value(&mid) {
            return Ball::exact(mid);
        }
        let rad = rad_add(&rad_add(&self.rad, &other.rad), &ulp_of(&mid, p.bits));
        Ball { mid, rad }
    }

    pub fn sub(&self, other: &Ball, p: Prec) -> Ball {
        let mid = self.mid.sub(&other.mid, p.bits, RM::ToEven);
        if self.rad.is_zero() && other.rad.is_zero() && is_exact_value(&mid) {
            return Ball::exact(mid);
        }
        let rad = rad_add(&rad_add(&self.rad, &other.rad), &ulp_of(&mid, p.bits));
        Ball { mid, rad }
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: self.mid.neg(), rad: self.rad.clone() }
    }

    pub fn mul(&self, other: &Ball, p: Prec) -> Ball {
        let mid = self.mid.mul(&other.mid, p.bits, RM::ToEven);
        if self.rad.is_zero() && other.rad.is_zero() {
            if is_exact_value(&mid) {
                return Ball::exact(mid);
            }
            let rad = ulp_of(&mid, p.bits);
            return Ball { mid, rad };
        }
        // |a| rb + |b| ra + ra rb + ulp
        let am = self.mid.abs();
        let bm = other.mid.abs();
        let t1 = am.mul(&other.rad, RAD_PREC, RM::Up);
        let t2 = bm.mul(&self.rad, RAD_PREC, RM::Up);
        let t3 = self.rad.mul(&other.rad, RAD_PREC, RM::Up);
        let rad = rad_add(&rad_add(&rad_add(&t1, &t2), &t3), &ulp_of(&mid, p.bits));
        Ball { mid, rad }
    }

    /// Multiply by an exact small integer.
    pub fn mul_i(&self, k: i32, p: Prec) -> Ball {
        let kf = BigFloat::from_i32(k, p.bits);
        let mid = self.mid.mul(&kf, p.bits, RM::ToEven);
        if self.rad.is_zero() && is_exact_value(&mid) {
            return Ball::exact(mid);
        }
        let rad = rad_add(&self.rad.mul(&kf.abs(), RAD_PREC, RM::Up), &ulp_of(&mid, p.bits));
        Ball { mid, rad }
    }

    /// Division; requires the divisor enclosure to exclude zero.
    pub fn div(&self, other: &Ball, p: Prec) -> Result<Ball> {
        if other.contains_zero(p) != Some(false) {
            return Err(Error::Undecided("division by an enclosure touching zero".into()));
        }
        let (alo, ahi) = (self.lo(p), self.hi(p));
        let (blo, bhi) = (other.lo(p), other.hi(p));
        let mut lo: Option<BigFloat> = None;
        let mut hi: Option<BigFloat> = None;
        for num in [&alo, &ahi] {
            for den in [&blo, &bhi] {
                let qd = num.div(den, p.bits, RM::Down);
                let qu = num.div(den, p.bits, RM::Up);
                lo = Some(match lo {
                    None => qd.clone(),
                    Some(cur) => {
                        if qd < cur { qd.clone() } else { cur }
                    }
                });
                hi = Some(match hi {
                    None => qu.clone(),
                    Some(cur) => {
                        if qu > cur { qu.clone() } else { cur }
                    }
                });
            }
        }
        Ok(Ball::from_endpoints(&lo.unwrap(), &hi.unwrap(), p))
    }

    /// Enclosure of |x| over the ball.
    pub fn abs(&self, p: Prec) -> Ball {
        match self.sign(p) {
            Some(Ordering::Greater) | Some(Ordering::Equal) => self.clone(),
            Some(Ordering::Less) => self.neg(),
            None => {
                // straddles zero: [0, max(|lo|, |hi|)]
                let lo = self.lo(p).abs();
                let hi = self.hi(p).abs();
                let m = if lo > hi { lo } else { hi };
                Ball::from_endpoints(&BigFloat::from_i8(0, 8), &m, p)
            }
        }
    }

    /// Integer power of a certified-nonnegative ball (monotone endpoints).
    pub fn powi_nonneg(&self, k: u32, p: Prec) -> Ball {
        debug_assert!(k >= 1);
        let lo0 = self.lo(p);
        let lo0 = if lo0.is_negative() { BigFloat::from_i8(0, 8) } else { lo0 };
        let hi0 = self.hi(p);
        let mut lo = lo0.clone();
        let mut hi = hi0.clone();
        for _ in 1..k {
            lo = lo.mul(&lo0, p.bits, RM::Down);
            hi = hi.mul(&hi0, p.bits, RM::Up);
        }
        Ball::from_endpoints(&lo, &hi, p)
    }

    /// Real power `x^e` of a certified-nonnegative ball, `e` enclosed by a
    /// ball with positive lower endpoint.
    pub fn pow_nonneg(&self, e: &Ball, p: Prec) -> Ball {
        let lo = {
            let b = self.lo(p);
            if b.is_negative() { BigFloat::from_i8(0, 8) } else { b }
        };
        let hi = {
            let b = self.hi(p);
            if b.is_negative() { BigFloat::from_i8(0, 8) } else { b }
        };
        let (elo, ehi) = (e.lo(p), e.hi(p));
        let one = BigFloat::from_i8(1, 8);
        // x^e is increasing in x (e > 0); in e it is decreasing for x <= 1
        // and increasing for x >= 1.
        let lo_exp = if lo <= one { &ehi } else { &elo };
        let hi_exp = if hi <= one { &elo } else { &ehi };
        let out_lo = if lo.is_zero() {
            BigFloat::from_i8(0, 8)
        } else {
            with_consts(|cc| lo.pow(lo_exp, p.bits, RM::Down, cc))
        };
        let out_hi = if hi.is_zero() {
            BigFloat::from_i8(0, 8)
        } else {
            with_consts(|cc| hi.pow(hi_exp, p.bits, RM::Up, cc))
        };
        Ball::from_endpoints(&out_lo, &out_hi, p)
    }

    /// Square root of a certified-nonnegative ball.
    pub fn sqrt_nonneg(&self, p: Prec) -> Ball {
        let lo = {
            let b = self.lo(p);
            if b.is_negative() { BigFloat::from_i8(0, 8) } else { b }
        };
        let hi = {
            let b = self.hi(p);
            if b.is_negative() { BigFloat::from_i8(0, 8) } else { b }
        };
        let out_lo = lo.sqrt(p.bits, RM::Down);
        let out_hi = hi.sqrt(p.bits, RM::Up);
        Ball::from_endpoints(&out_lo, &out_hi, p)
    }

    /// Certified comparison. `None` means undecided at this precision.
    pub fn cmp(&self, other: &Ball, p: Prec) -> Option<Ordering> {
        if self.rad.is_zero() && other.rad.is_zero() {
            return self.mid.partial_cmp(&other.mid);
        }
        if self.hi(p) < other.lo(p) {
            return Some(Ordering::Less);
        }
        if self.lo(p) > other.hi(p) {
            return Some(Ordering::Greater);
        }
        None
    }

    /// Certified comparison against an exact point.
    pub fn cmp_point(&self, pt: &BigFloat, p: Prec) -> Option<Ordering> {
        if self.rad.is_zero() {
            return self.mid.partial_cmp(pt);
        }
        if self.hi(p) < *pt {
            return Some(Ordering::Less);
        }
        if self.lo(p) > *pt {
            return Some(Ordering::Greater);
        }
        None
    }

    pub fn sign(&self, p: Prec) -> Option<Ordering> {
        if self.mid.is_zero() && self.rad.is_zero() {
            return Some(Ordering::Equal);
        }
        self.cmp_point(&BigFloat::from_i8(0, 8), p)
    }

    pub fn contains_zero(&self, p: Prec) -> Option<bool> {
        self.sign(p).map(|s| s == Ordering::Equal)
    }

    /// Width of the enclosure (2 rad), as an f64 estimate for diagnostics.
    pub fn width_f64(&self) -> f64 {
        bigfloat_to_f64(&self.rad) * 2.0
    }

    pub fn mid_f64(&self) -> f64 {
        bigfloat_to_f64(&self.mid)
    }

    /// True if the two enclosures overlap (used by consistency oracles).
    pub fn intersects(&self, other: &Ball, p: Prec) -> bool {
        !(self.hi(p) < other.lo(p) || other.hi(p) < self.lo(p))
    }
}

/// Best-effort f64 view of a BigFloat (diagnostics and reports only;
/// saturates to 0/inf outside the f64 exponent range).
pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let e = match x.exponent() {
        Some(e) => e,
        None => return f64::NAN,
    };
    if e < -1060 {
        return 0.0;
    }
    if e > 1020 {
        return if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    let m = match x.mantissa_digits() {
        Some(words) if !words.is_empty() => words[words.len() - 1],
        _ => return f64::NAN,
    };
    // top word holds the leading bits: value ~ m / 2^WORD_BIT_SIZE * 2^e
    let frac = m as f64 / (WORD_BIT_SIZE as f64).exp2();
    let v = frac * (e as f64).exp2();
    if x.is_negative() { -v } else { v }
}

/// A real interval with certified endpoints, `lo < hi`.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: Ball,
    pub hi: Ball,
}

impl Interval {
    pub fn new(lo: Ball, hi: Ball, p: Prec) -> Result<Self> {
        match lo.cmp(&hi, p) {
            Some(Ordering::Less) => Ok(Interval { lo, hi }),
            Some(_) => Err(Error::NotInDomain("interval endpoints out of order".into())),
            None => Err(Error::Undecided("interval endpoint order".into())),
        }
    }

    pub fn from_f64(lo: f64, hi: f64, p: Prec) -> Self {
        Interval { lo: Ball::from_f64(lo, p), hi: Ball::from_f64(hi, p) }
    }

    /// Certified membership of a ball in the open interval.
    pub fn contains(&self, x: &Ball, p: Prec) -> Option<bool> {
        let above = match x.cmp(&self.lo, p) {
            Some(Ordering::Greater) => true,
            Some(_) => return Some(false),
            None => return None,
        };
        match x.cmp(&self.hi, p) {
            Some(Ordering::Less) => Some(above),
            Some(_) => Some(false),
            None => None,
        }
    }

    /// Certified inclusion `self subset-of other` (closures compared).
    pub fn subset_of(&self, other: &Interval, p: Prec) -> Option<bool> {
        let lo_ok = match self.lo.cmp(&other.lo, p) {
            Some(Ordering::Less) => Some(false),
            Some(_) => Some(true),
            None => None,
        }?;
        let hi_ok = match self.hi.cmp(&other.hi, p) {
            Some(Ordering::Greater) => Some(false),
            Some(_) => Some(true),
            None => None,
        }?;
        Some(lo_ok && hi_ok)
    }

    /// Certified disjointness of the open intervals.
    pub fn disjoint_from(&self, other: &Interval, p: Prec) -> Option<bool> {
        match self.hi.cmp(&other.lo, p) {
            Some(Ordering::Less) | Some(Ordering::Equal) => return Some(true),
            _ => {}
        }
        match self.lo.cmp(&other.hi, p) {
            Some(Ordering::Greater) | Some(Ordering::Equal) => return Some(true),
            _ => {}
        }
        // overlap is certain only if interiors demonstrably intersect
        let a = self.lo.cmp(&other.hi, p)?;
        let b = other.lo.cmp(&self.hi, p)?;
        if a == Ordering::Less && b == Ordering::Less {
            Some(false)
        } else {
            None
        }
    }

    /// Enclosure of the length `hi - lo`.
    pub fn length(&self, p: Prec) -> Ball {
        self.hi.sub(&self.lo, p)
    }

    pub fn width_f64(&self) -> f64 {
        self.hi.mid_f64() - self.lo.mid_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> Prec {
        Prec::new(64, 1024)
    }

    #[test]
    fn pow2_values() {
        assert_eq!(bigfloat_to_f64(&pow2(0)), 1.0);
        assert_eq!(bigfloat_to_f64(&pow2(3)), 8.0);
        assert_eq!(bigfloat_to_f64(&pow2(-2)), 0.25);
    }

    #[test]
    fn exact_ops_have_tiny_radius() {
        let a = Ball::from_f64(0.5, p());
        let b = Ball::from_f64(0.25, p());
        let s = a.add(&b, p());
        assert!(bigfloat_to_f64(&s.rad) <= 1e-18);
        assert_eq!(s.mid_f64(), 0.75);
    }

    #[test]
    fn division_by_zero_straddle_is_undecided() {
        let a = Ball::from_f64(1.0, p());
        let b = Ball::with_rad(BigFloat::from_f64(0.0, 64), BigFloat::from_f64(0.1, 64));
        assert!(a.div(&b, p()).is_err());
    }

    #[test]
    fn compare_resolves_separated_balls() {
        let a = Ball::with_rad(BigFloat::from_f64(0.3, 64), BigFloat::from_f64(1e-9, 64));
        let b = Ball::with_rad(BigFloat::from_f64(0.4, 64), BigFloat::from_f64(1e-9, 64));
        assert_eq!(a.cmp(&b, p()), Some(Ordering::Less));
        let c = Ball::with_rad(BigFloat::from_f64(0.3000000001, 64), BigFloat::from_f64(1e-3, 64));
        assert_eq!(a.cmp(&c, p()), None);
    }

    proptest! {
        // containment: ball ops enclose the pointwise f64 results
        #[test]
        fn prop_mul_contains(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let pa = Ball::from_f64(a, p());
            let pb = Ball::from_f64(b, p());
            let r = pa.mul(&pb, p());
            let truth = BigFloat::from_f64(a, 256).mul(&BigFloat::from_f64(b, 256), 256, RM::ToEven);
            prop_assert!(r.lo(p()) <= truth && truth <= r.hi(p()));
        }

        #[test]
        fn prop_pow_contains_square(x in 0.0f64..1.0) {
            let b = Ball::from_f64(x, p());
            let e = Ball::from_f64(2.0, p());
            let via_pow = b.pow_nonneg(&e, p());
            let via_mul = b.mul(&b, p());
            prop_assert!(via_pow.intersects(&via_mul, p()));
        }

        #[test]
        fn prop_sqrt_squares_back(x in 0.0f64..4.0) {
            let b = Ball::from_f64(x, p());
            let s = b.sqrt_nonneg(p());
            let sq = s.mul(&s, p());
            prop_assert!(sq.intersects(&b, p()));
        }
    }
}
