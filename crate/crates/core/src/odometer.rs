//! The abstract adding machine on a product of finite digit spaces, and the
//! cyclic-cover harness that witnesses adding-machine dynamics on the
//! critical omega-limit set.
//!
//! The harness takes a nice interval `T` with three distinguished return
//! domains `T'` (critical), `Q` and its mirror, checks the four hypotheses on
//! an orbit sample, and assembles the cyclically permuted cover
//! `U_j = f^j(T' cap sample)` for `j < k` and `f^{j-k}((Q cup Q^) cap sample)`
//! for `k <= j < k + l`, where `k` and `l` are the return times of `T'` and
//! `Q` into `T`.

use crate::arith::{Ball, Interval, Prec};
use crate::error::{Error, Result};
use crate::map::{MapSpec, Orbit};
use std::fmt::Write as _;

/// Base of an adding machine: digit moduli, each at least 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdometerBase {
    pub alpha: Vec<u32>,
}

impl OdometerBase {
    pub fn new(alpha: Vec<u32>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Config("odometer base must have at least one digit".into()));
        }
        if alpha.iter().any(|&p| p < 2) {
            return Err(Error::Config("every digit modulus must be at least 2".into()));
        }
        Ok(OdometerBase { alpha })
    }

    pub fn state_count(&self) -> u64 {
        self.alpha.iter().map(|&p| p as u64).product()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("alpha:");
        for p in &self.alpha {
            let _ = write!(s, " {p}");
        }
        s
    }
}

/// A point of the truncated adding machine.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OdometerState {
    pub digits: Vec<u32>,
}

impl OdometerState {
    pub fn zero(base: &OdometerBase) -> Self {
        OdometerState { digits: vec![0; base.alpha.len()] }
    }

    pub fn new(base: &OdometerBase, digits: Vec<u32>) -> Result<Self> {
        if digits.len() != base.alpha.len() {
            return Err(Error::Config("digit count does not match the base".into()));
        }
        for (d, p) in digits.iter().zip(&base.alpha) {
            if d >= p {
                return Err(Error::Config("digit out of range for its modulus".into()));
            }
        }
        Ok(OdometerState { digits })
    }
}

/// Add one with carry: zero out the maximal digits, increment the first
/// non-maximal one. If every digit is maximal the truncated machine wraps to
/// all zeros (the truncation of the infinite second case).
pub fn step(base: &OdometerBase, s: &OdometerState) -> OdometerState {
    let mut digits = s.digits.clone();
    for (d, &p) in digits.iter_mut().zip(&base.alpha) {
        if *d + 1 < p {
            *d += 1;
            return OdometerState { digits };
        }
        *d = 0;
    }
    OdometerState { digits }
}

/// Period of the orbit of `(0, ..., 0)` under `step`; equals the product of
/// the moduli exactly when the truncated machine is a single cycle.
pub fn orbit_period(base: &OdometerBase) -> u64 {
    let zero = OdometerState::zero(base);
    let mut s = step(base, &zero);
    let mut n = 1u64;
    while s != zero {
        s = step(base, &s);
        n += 1;
    }
    n
}

/// Exhaustive bijectivity check of `step` on the whole state space (caller
/// bounds the size). Every state must have exactly one preimage.
pub fn check_bijection(base: &OdometerBase) -> Result<()> {
    let total = base.state_count();
    if total > 10_000_000 {
        return Err(Error::BudgetExceeded { what: "exhaustive bijection check".into(), budget: 10_000_000 });
    }
    let total = total as usize;
    let encode = |s: &OdometerState| -> usize {
        let mut v = 0usize;
        for (d, &p) in s.digits.iter().zip(&base.alpha).rev() {
            v = v * p as usize + *d as usize;
        }
        v
    };
    let mut hit = vec![false; total];
    let mut s = OdometerState::zero(base);
    for _ in 0..total {
        let img = encode(&step(base, &s));
        if hit[img] {
            return Err(Error::HypothesisViolation {
                condition: "bijection",
                detail: format!("state {img} has two preimages"),
            });
        }
        hit[img] = true;
        s = step(base, &s);
        // advance the enumeration: step itself enumerates the cycle, but to
        // be exhaustive on non-cyclic counterexamples walk the mixed radix
        // counter instead
        if s == OdometerState::zero(base) {
            break;
        }
    }
    // mixed-radix enumeration covers states missed by a broken cycle
    let mut digits = vec![0u32; base.alpha.len()];
    loop {
        let st = OdometerState { digits: digits.clone() };
        let img = encode(&step(base, &st));
        if !hit[img] {
            hit[img] = true;
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                let missing = hit.iter().filter(|h| !**h).count();
                if missing > 0 {
                    return Err(Error::HypothesisViolation {
                        condition: "bijection",
                        detail: format!("{missing} states have no preimage"),
                    });
                }
                return Ok(());
            }
            digits[i] += 1;
            if digits[i] < base.alpha[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// A cyclic cover of the sampled omega-limit set: `sets[j]` holds the orbit
/// indices in `U_j`.
#[derive(Clone, Debug)]
pub struct CyclicCover {
    pub sets: Vec<Vec<usize>>,
    pub k_n: usize,
    pub l_n: usize,
    /// First orbit index inside `T'`; the cover tiles indices from here on.
    pub start: usize,
    pub horizon: usize,
}

/// Inputs to the harness: a nice base interval and its three distinguished
/// return domains.
pub struct CoverLevel {
    pub t: Interval,
    pub t_prime: Interval,
    pub q: Interval,
    pub q_hat: Interval,
}

fn member(iv: &Interval, x: &Ball, p: Prec, what: &str) -> Result<bool> {
    match iv.contains(x, p) {
        Some(v) => Ok(v),
        None => Err(Error::Undecided(format!("membership in {what}"))),
    }
}

/// Build the cyclic cover for one level and check hypotheses (ii)-(iv) on
/// the sample `f(c), ..., f^horizon(c)`. Hypothesis (i) concerns a sequence
/// of levels and is checked by [`check_shrinking`].
pub fn build_cyclic_cover(
    m: &MapSpec,
    level: &CoverLevel,
    orb: &mut Orbit,
    horizon: usize,
    p: Prec,
) -> Result<CyclicCover> {
    orb.ensure(m, horizon)?;
    // (ii) part 1: T' contains c
    let c = Ball::exact(crate::map::critical_point());
    if !member(&level.t_prime, &c, p, "T'")? {
        return Err(Error::HypothesisViolation {
            condition: "(ii) c in T'",
            detail: "critical point not inside the critical return domain".into(),
        });
    }
    // (ii) part 2: f(Q) = f(Q^), certified through the symmetric point
    let mirrored = Interval { lo: m.hat_point(&level.q.hi, p), hi: m.hat_point(&level.q.lo, p) };
    if !(mirrored.lo.intersects(&level.q_hat.lo, p) && mirrored.hi.intersects(&level.q_hat.hi, p)) {
        return Err(Error::HypothesisViolation {
            condition: "(ii) f(Q) = f(Q^)",
            detail: "mirror of Q does not coincide with Q^".into(),
        });
    }

    // membership flags along the sample
    let mut in_t = vec![false; horizon + 1];
    let mut in_tp = vec![false; horizon + 1];
    let mut in_q = vec![false; horizon + 1];
    let mut in_qh = vec![false; horizon + 1];
    for t in 1..=horizon {
        let x = orb.pt(t);
        in_t[t] = member(&level.t, x, p, "T")?;
        in_tp[t] = member(&level.t_prime, x, p, "T'")?;
        in_q[t] = member(&level.q, x, p, "Q")?;
        in_qh[t] = member(&level.q_hat, x, p, "Q^")?;
    }
    // return time to T from each sampled point (next visit to T)
    let ret = |t: usize| -> Option<usize> { (t + 1..=horizon).find(|&u| in_t[u]).map(|u| u - t) };

    // k_n, l_n: return times of T' and Q into T, constant on the domains
    let mut k_n = None;
    let mut l_n = None;
    for t in 1..=horizon {
        if in_tp[t] {
            if let Some(r) = ret(t) {
                match k_n {
                    None => k_n = Some(r),
                    Some(k) if k == r => {}
                    Some(k) => {
                        return Err(Error::HypothesisViolation {
                            condition: "constant return time on T'",
                            detail: format!("return {r} at index {t} differs from {k}"),
                        })
                    }
                }
            }
        }
        if in_q[t] || in_qh[t] {
            if let Some(r) = ret(t) {
                match l_n {
                    None => l_n = Some(r),
                    Some(l) if l == r => {}
                    Some(l) => {
                        return Err(Error::HypothesisViolation {
                            condition: "constant return time on Q and Q^",
                            detail: format!("return {r} at index {t} differs from {l}"),
                        })
                    }
                }
            }
        }
    }
    let k_n = k_n.ok_or_else(|| Error::InsufficientData("sample never visits T'".into()))?;
    let l_n = l_n.ok_or_else(|| Error::InsufficientData("sample never visits Q or Q^".into()))?;

    // (iii): returns from T' land in Q or Q^; (iv): returns from Q, Q^ land in T'
    for t in 1..=horizon {
        if in_tp[t] && t + k_n <= horizon && !(in_q[t + k_n] || in_qh[t + k_n]) {
            return Err(Error::HypothesisViolation {
                condition: "(iii) R_T(T') subset Q cup Q^",
                detail: format!("orbit index {t} returns outside Q cup Q^"),
            });
        }
        if (in_q[t] || in_qh[t]) && t + l_n <= horizon && !in_tp[t + l_n] {
            return Err(Error::HypothesisViolation {
                condition: "(iv) R_T(Q cup Q^) subset T'",
                detail: format!("orbit index {t} returns outside T'"),
            });
        }
    }

    // assemble U_0 .. U_{k+l-1}
    let period = k_n + l_n;
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); period];
    for t in 1..=horizon {
        if in_tp[t] {
            for j in 0..k_n {
                if t + j <= horizon {
                    sets[j].push(t + j);
                }
            }
        }
        if in_q[t] || in_qh[t] {
            for j in k_n..period {
                if t + (j - k_n) <= horizon {
                    sets[j].push(t + (j - k_n));
                }
            }
        }
    }
    for s in &mut sets {
        s.sort_unstable();
        s.dedup();
    }
    let start = (1..=horizon).find(|&t| in_tp[t]).unwrap();
    Ok(CyclicCover { sets, k_n, l_n, start, horizon })
}

impl CyclicCover {
    /// Pairwise disjointness of the sets (orbit indices are distinct points
    /// of a non-periodic orbit).
    pub fn check_disjoint(&self) -> Result<()> {
        let mut seen = vec![usize::MAX; self.horizon + 1];
        for (j, set) in self.sets.iter().enumerate() {
            for &t in set {
                if seen[t] != usize::MAX {
                    return Err(Error::HypothesisViolation {
                        condition: "cover disjointness",
                        detail: format!("orbit index {t} lies in U_{} and U_{j}", seen[t]),
                    });
                }
                seen[t] = j;
            }
        }
        Ok(())
    }

    /// Every sampled index from the first `T'` visit on lies in some set, and
    /// `f` maps each `U_j` into `U_{j+1}` (cyclically) along the sample.
    pub fn check_cyclic(&self) -> Result<()> {
        let period = self.sets.len();
        let mut owner = vec![usize::MAX; self.horizon + 2];
        for (j, set) in self.sets.iter().enumerate() {
            for &t in set {
                owner[t] = j;
            }
        }
        for t in self.start..=self.horizon {
            if owner[t] == usize::MAX {
                return Err(Error::HypothesisViolation {
                    condition: "cover covers the sample",
                    detail: format!("orbit index {t} belongs to no U_j"),
                });
            }
            if t + 1 <= self.horizon {
                let expect = (owner[t] + 1) % period;
                if owner[t + 1] != expect {
                    return Err(Error::HypothesisViolation {
                        condition: "f(U_j) subset U_{j+1}",
                        detail: format!("index {t} in U_{} maps to U_{}", owner[t], owner[t + 1]),
                    });
                }
            }
        }
        Ok(())
    }

    /// Text report: one line per set with index, cardinality and coordinate
    /// range of its sample points.
    pub fn to_text(&self, orb: &Orbit) -> String {
        let mut out = String::new();
        for (j, set) in self.sets.iter().enumerate() {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for &t in set {
                let v = orb.pt(t).mid_f64();
                min = min.min(v);
                max = max.max(v);
            }
            let _ = writeln!(out, "U_{j}: {} points in [{min:.9}, {max:.9}]", set.len());
        }
        out
    }
}

/// Hypothesis (i) of the harness: the base intervals shrink strictly along
/// the supplied sequence of levels.
pub fn check_shrinking(bases: &[Interval], p: Prec) -> Result<()> {
    for (i, w) in bases.windows(2).enumerate() {
        let outer = w[0].length(p);
        let inner = w[1].length(p);
        match inner.cmp(&outer, p) {
            Some(std::cmp::Ordering::Less) => {}
            Some(_) => {
                return Err(Error::HypothesisViolation {
                    condition: "(i) |T_n| decreasing",
                    detail: format!("level {} is not strictly smaller", i + 1),
                })
            }
            None => return Err(Error::Undecided("length comparison of levels".into())),
        }
    }
    Ok(())
}

/// True iff every set of the finer cover is contained in a set of the
/// coarser one (as subsets of the common orbit sample).
pub fn refinement_check(coarse: &CyclicCover, fine: &CyclicCover) -> bool {
    let horizon = coarse.horizon.min(fine.horizon);
    let mut owner = vec![usize::MAX; horizon + 1];
    for (j, set) in coarse.sets.iter().enumerate() {
        for &t in set {
            if t <= horizon {
                owner[t] = j;
            }
        }
    }
    for set in &fine.sets {
        let mut target = usize::MAX;
        for &t in set {
            if t > horizon || t < coarse.start {
                continue;
            }
            if owner[t] == usize::MAX {
                return false;
            }
            if target == usize::MAX {
                target = owner[t];
            } else if owner[t] != target {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(alpha: &[u32]) -> OdometerBase {
        OdometerBase::new(alpha.to_vec()).unwrap()
    }

    #[test]
    fn step_examples() {
        let b = base(&[2, 3]);
        let s = OdometerState::new(&b, vec![1, 2]).unwrap();
        assert_eq!(step(&b, &s).digits, vec![0, 0]);
        let s = OdometerState::new(&b, vec![1, 0]).unwrap();
        assert_eq!(step(&b, &s).digits, vec![0, 1]);
        let s = OdometerState::new(&b, vec![0, 1]).unwrap();
        assert_eq!(step(&b, &s).digits, vec![1, 1]);
    }

    #[test]
    fn invalid_bases_rejected() {
        assert!(OdometerBase::new(vec![2, 1]).is_err());
        assert!(OdometerBase::new(vec![]).is_err());
        let b = base(&[2, 3]);
        assert!(OdometerState::new(&b, vec![2, 0]).is_err());
        assert!(OdometerState::new(&b, vec![0]).is_err());
    }

    #[test]
    fn periods_by_exhaustion() {
        assert_eq!(orbit_period(&base(&[2, 3])), 6);
        assert_eq!(orbit_period(&base(&[2])), 2);
        assert_eq!(orbit_period(&base(&[2, 2, 2, 2])), 16);
        assert_eq!(orbit_period(&base(&[2, 3, 2])), 12);
        assert_eq!(orbit_period(&base(&[10, 3, 2])), 60);
    }

    #[test]
    fn bijection_exhaustive_small() {
        for alpha in [vec![2u32], vec![2, 3], vec![2, 2, 2, 2], vec![5, 5, 5], vec![7, 11, 13]] {
            check_bijection(&base(&alpha)).unwrap();
        }
    }

    #[test]
    fn orbit_visits_every_state_once() {
        let b = base(&[3, 4, 5]);
        let total = b.state_count();
        let mut seen = std::collections::HashSet::new();
        let mut s = OdometerState::zero(&b);
        for _ in 0..total {
            assert!(seen.insert(s.clone()));
            s = step(&b, &s);
        }
        assert_eq!(s, OdometerState::zero(&b));
        assert_eq!(seen.len() as u64, total);
    }

    #[test]
    fn base_text_format() {
        assert_eq!(base(&[10, 3, 2]).to_text(), "alpha: 10 3 2");
    }

    #[test]
    fn refinement_on_synthetic_covers() {
        let coarse = CyclicCover {
            sets: vec![vec![1, 3, 5, 7], vec![2, 4, 6, 8]],
            k_n: 1,
            l_n: 1,
            start: 1,
            horizon: 8,
        };
        let fine = CyclicCover {
            sets: vec![vec![1, 5], vec![2, 6], vec![3, 7], vec![4, 8]],
            k_n: 2,
            l_n: 2,
            start: 1,
            horizon: 8,
        };
        assert!(refinement_check(&coarse, &coarse));
        assert!(refinement_check(&coarse, &fine));
        assert!(!refinement_check(&fine, &coarse));
        // shuffled fine cover: mixes coarse classes
        let bad = CyclicCover {
            sets: vec![vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]],
            k_n: 2,
            l_n: 2,
            start: 1,
            horizon: 8,
        };
        assert!(!refinement_check(&coarse, &bad));
    }

    proptest::proptest! {
        #[test]
        fn prop_step_bijective_and_full_period(seed in 0u64..300) {
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as u32
            };
            // random base with product <= 10^4
            let mut alpha = Vec::new();
            let mut product = 1u64;
            loop {
                let p = 2 + next() % 9;
                if product * p as u64 > 10_000 || (alpha.len() >= 2 && next() % 3 == 0) {
                    break;
                }
                product *= p as u64;
                alpha.push(p);
            }
            if alpha.is_empty() {
                alpha.push(2);
                product = 2;
            }
            let b = OdometerBase::new(alpha).unwrap();
            check_bijection(&b).unwrap();
            proptest::prop_assert_eq!(orbit_period(&b), product);
        }
    }
}
