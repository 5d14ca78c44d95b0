//! The symbolic engine: itineraries, closest precritical points `z_k`,
//! cutting times `S_k`, the kneading map `Q`, the wild-example combinatorics
//! and the certified parameter search.
//!
//! Cutting times are detected from the critical orbit alone. While `f^m` is
//! monotone on `[z_k, c]`, its image is the interval spanned by the orbit
//! points `f^(m - S_k)(c)` and `f^m(c)`; the first `m > S_k` at which those
//! two land on opposite sides of `c` is `S_{k+1}`. This costs one certified
//! orbit point per time step instead of a preimage tree per candidate.

use crate::arith::{with_escalation, Ball, Prec};
use crate::error::{Error, Result};
use crate::map::{critical_point, MapSpec, Orbit, Side};
use std::cmp::Ordering;
use std::fmt::Write as _;

/// Itinerary symbol of an orbit point relative to the critical point.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Symbol {
    L,
    C,
    R,
}

impl From<Side> for Symbol {
    fn from(s: Side) -> Symbol {
        match s {
            Side::Left => Symbol::L,
            Side::Right => Symbol::R,
        }
    }
}

/// Kneading data of a map: the itinerary of `f(c)`, the closest precritical
/// points, the cutting times and the kneading map.
#[derive(Clone, Debug)]
pub struct KneadingData {
    /// Itinerary symbols of `f^j(c)`, `j = 1, ..., horizon`.
    pub symbols: Vec<Symbol>,
    /// Closest precritical points `z_0 < z_1 < ... < c` (as far as computed).
    pub z: Vec<Ball>,
    /// Cutting times `S_0 = 1 < S_1 < ...`.
    pub s: Vec<usize>,
    /// Kneading map values, `Q(0) = 0` and `S_{k+1} = S_k + S_{Q(k+1)}`.
    pub q: Vec<usize>,
}

impl KneadingData {
    /// Line-oriented text form: `S: ...`, `Q: ...`, `sym: ...`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("S:");
        for v in &self.s {
            let _ = write!(out, " {v}");
        }
        out.push_str("\nQ:");
        for v in &self.q {
            let _ = write!(out, " {v}");
        }
        out.push_str("\nsym: ");
        for sym in &self.symbols {
            out.push(match sym {
                Symbol::L => 'L',
                Symbol::C => 'C',
                Symbol::R => 'R',
            });
        }
        out.push('\n');
        out
    }
}

#[derive(Clone, Debug)]
pub struct CuttingOpts {
    /// Hard cap on the iterate horizon while hunting for cutting times.
    pub horizon: usize,
    /// How many closest precritical points to compute (they are not needed
    /// for the cutting times themselves).
    pub z_depth: usize,
}

impl Default for CuttingOpts {
    fn default() -> Self {
        CuttingOpts { horizon: 1 << 20, z_depth: 16 }
    }
}

/// Itinerary of `f(c)`: symbols of `f^j(c)` for `j = 1..=n`. A critical
/// orbit point falling on `c` makes the parameter superattracting, which is
/// reported as an error rather than as a `C` symbol.
pub fn itinerary(m: &MapSpec, n: usize, p: Prec) -> Result<Vec<Symbol>> {
    with_escalation(p, "computing the itinerary", |pp| {
        let mut orb = Orbit::new(pp);
        orb.ensure(m, n)?;
        Ok((1..=n).map(|t| Symbol::from(orb.side(t))).collect())
    })
}

/// Cutting times and kneading data of `m`, with `k_count + 1` entries
/// `S_0..S_K`. Fails with `HorizonExceeded` if the next cutting time would
/// exceed the configured horizon, and with `Superattracting` if the critical
/// orbit hits `c` first.
pub fn cutting_times(m: &MapSpec, k_count: usize, p: Prec, opts: &CuttingOpts) -> Result<KneadingData> {
    let c = critical_point();
    if !(m.a > c) {
        return Err(Error::NotInDomain(
            "cutting times need f(c) > c (otherwise the orbit never crosses c)".into(),
        ));
    }
    with_escalation(p, "computing cutting times", |pp| {
        let mut orb = Orbit::new(pp);
        orb.ensure(m, 1)?;
        let mut s = vec![1usize];
        let mut time = 1usize;
        while s.len() <= k_count {
            time += 1;
            if time > opts.horizon {
                return Err(Error::HorizonExceeded(opts.horizon));
            }
            orb.ensure(m, time)?;
            let s_k = *s.last().unwrap();
            if orb.side(time - s_k) != orb.side(time) {
                s.push(time);
            }
        }
        let q = kneading_map_from_s(&s)?;
        let symbols = (1..=time).map(|t| Symbol::from(orb.side(t))).collect();
        let z = closest_precriticals(m, &s, opts.z_depth.min(s.len()), &orb, pp);
        Ok(KneadingData { symbols, z, s, q })
    })
}

/// Closest precritical points by backward lap chains: `z_k` is the preimage
/// of `c` under `f^{S_k}` through the laps visited by `[z_k, c]`, and those
/// laps are the laps of the critical orbit itself.
fn closest_precriticals(m: &MapSpec, s: &[usize], depth: usize, orb: &Orbit, p: Prec) -> Vec<Ball> {
    let mut out = Vec::with_capacity(depth);
    for &sk in s.iter().take(depth) {
        let mut w = Ball::exact(critical_point());
        for t in (0..sk).rev() {
            let side = if t == 0 { Side::Left } else { orb.side(t) };
            w = m.lap_preimage(&w, side, p);
        }
        out.push(w);
    }
    out
}

/// The kneading map of a strictly increasing cutting-time sequence:
/// `Q[k+1]` is the unique index with `S[k+1] - S[k] = S[Q[k+1]]`.
pub fn kneading_map_from_s(s: &[usize]) -> Result<Vec<usize>> {
    if s.is_empty() || s[0] != 1 {
        return Err(Error::NotACuttingSequence { index: 0, index_prev: 0 });
    }
    let mut q = vec![0usize];
    for k in 1..s.len() {
        if s[k] <= s[k - 1] {
            return Err(Error::NotACuttingSequence { index: k, index_prev: k - 1 });
        }
        let diff = s[k] - s[k - 1];
        match s[..k].binary_search(&diff) {
            Ok(j) => q.push(j),
            Err(_) => return Err(Error::NotACuttingSequence { index: k, index_prev: k - 1 }),
        }
    }
    Ok(q)
}

/// The cutting times generated by a kneading-map prefix:
/// `S[0] = 1`, `S[k+1] = S[k] + S[Q[k+1]]`. Requires `Q[j] <= j - 1`.
pub fn s_from_q(q: &[usize], k_count: usize) -> Result<Vec<usize>> {
    let mut s = vec![1usize];
    for k in 1..=k_count {
        let qk = match q.get(k) {
            Some(&v) => v,
            None => return Err(Error::IndexOutOfRange(k)),
        };
        if qk > k - 1 {
            return Err(Error::IndexOutOfRange(k));
        }
        s.push(s[k - 1] + s[qk]);
    }
    Ok(s)
}

/// The wild-example combinatorics: `r_0 = 3`, `t_0 = 2`,
/// `r_{k+1} = r_k + t_k`, and `t_{k+1} = r_k` for odd `k`, `r_{k+1}` for
/// even `k`. `merged_cutting_times` lists the cutting times at and above
/// `r_1` in order: after each odd-index `r_k` the extra value `r_k + r_{k-1}`
/// appears, and nothing else does.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WildCombinatorics {
    pub r: Vec<u64>,
    pub t: Vec<u64>,
    pub merged_cutting_times: Vec<u64>,
    /// Index with `S_{k0} = r_0` once matched against a concrete
    /// cutting-time sequence; `None` until detected from data.
    pub k0_offset: Option<usize>,
}

pub fn wild_combinatorics(k_count: usize) -> WildCombinatorics {
    let mut r = vec![3u64];
    let mut t = vec![2u64];
    for k in 0..k_count {
        let rk1 = r[k] + t[k];
        r.push(rk1);
        let tk1 = if k % 2 == 1 { r[k] } else { rk1 };
        t.push(tk1);
    }
    let mut merged = Vec::new();
    for k in 1..=k_count {
        merged.push(r[k]);
        if k % 2 == 1 && k + 1 <= k_count {
            merged.push(r[k] + r[k - 1]);
        }
    }
    WildCombinatorics { r, t, merged_cutting_times: merged, k0_offset: None }
}

impl WildCombinatorics {
    /// The full cutting-time sequence of the wild example: the forced prefix
    /// `1, 2` and `S_{k0} = r_0 = 3`, followed by the merged tail.
    pub fn full_cutting_times(&self) -> Vec<usize> {
        let mut s = vec![1usize, 2, 3];
        s.extend(self.merged_cutting_times.iter().map(|&v| v as usize));
        s
    }

    /// Detect `k0` in a concrete cutting-time sequence: the index with
    /// `S_{k0} = r_0` immediately followed by `S_{k0+1} = r_1`.
    pub fn detect_k0(&mut self, s: &[usize]) -> Option<usize> {
        let r0 = self.r[0] as usize;
        let r1 = self.r.get(1).copied().unwrap_or(0) as usize;
        for k in 0..s.len().saturating_sub(1) {
            if s[k] == r0 && s[k + 1] == r1 {
                self.k0_offset = Some(k);
                return Some(k);
            }
        }
        None
    }
}

/// One failed inequality of the wild-attractor criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruinViolation {
    /// `Q(k+1) < Q(Q(k)) + 1` at this `k`.
    SquareGrowth { k: usize },
    /// `k - Q(k) > N` at this `k`.
    GapBound { k: usize, gap: usize },
}

/// Check `Q(k+1) >= Q^2(k) + 1` and `k - Q(k) <= N` for all `k >= k1` on the
/// available horizon. An empty report means the criterion holds there.
pub fn bruin_criterion(q: &[usize], k1: usize, n_bound: usize) -> Vec<BruinViolation> {
    let mut out = Vec::new();
    for k in k1..q.len() {
        let gap = k - q[k];
        if gap > n_bound {
            out.push(BruinViolation::GapBound { k, gap });
        }
        if k + 1 < q.len() && q[k + 1] < q[q[k]] + 1 {
            out.push(BruinViolation::SquareGrowth { k });
        }
    }
    out
}

/// Smallest `k1 >= 1` such that both criterion inequalities hold for every
/// `k >= k1` on the horizon, or `None` if they fail at the top.
pub fn detect_bruin_lockin(q: &[usize], n_bound: usize) -> Option<usize> {
    let mut k1 = None;
    for k in (1..q.len()).rev() {
        let gap_ok = k - q[k] <= n_bound;
        let sq_ok = k + 1 >= q.len() || q[k + 1] >= q[q[k]] + 1;
        if gap_ok && sq_ok {
            k1 = Some(k);
        } else {
            break;
        }
    }
    k1
}

/// Kneading sequence (itinerary of `f(c)`) reconstructed from cutting times,
/// up to `S_K`. Block rule: the symbols after position `S_k` repeat the
/// initial block of length `S_{Q(k+1)}` with the final symbol flipped.
pub fn symbols_from_cutting_times(s: &[usize]) -> Result<Vec<Symbol>> {
    let q = kneading_map_from_s(s)?;
    let last = *s.last().unwrap();
    let mut sym = Vec::with_capacity(last);
    sym.push(Symbol::R); // f(c) > c whenever cutting times exist
    for k in 0..s.len() - 1 {
        let block = s[q[k + 1]];
        for i in 1..block {
            sym.push(sym[i - 1]);
        }
        let flip = match sym[block - 1] {
            Symbol::R => Symbol::L,
            Symbol::L => Symbol::R,
            Symbol::C => Symbol::C,
        };
        sym.push(flip);
        debug_assert_eq!(sym.len(), s[k + 1]);
    }
    Ok(sym)
}

/// Parity-lexicographic ("signed") order on kneading sequences: at the first
/// difference the natural order L < R holds iff the common prefix carries an
/// even number of `R`s. The kneading sequence of family (23) is monotone
/// non-decreasing in `a` for this order. `Equal` means the candidate matches
/// the whole target prefix.
pub fn plex_cmp(candidate: &[Symbol], target: &[Symbol]) -> Ordering {
    let mut r_parity_even = true;
    for (i, tgt) in target.iter().enumerate() {
        let cand = match candidate.get(i) {
            Some(c) => *c,
            None => return Ordering::Equal,
        };
        if cand != *tgt {
            let natural = match (cand, *tgt) {
                (Symbol::L, Symbol::R) => Ordering::Less,
                _ => Ordering::Greater,
            };
            return if r_parity_even { natural } else { natural.reverse() };
        }
        if cand == Symbol::R {
            r_parity_even = !r_parity_even;
        }
    }
    Ordering::Equal
}

/// A bisection target: a cutting-time prefix or a kneading-map prefix.
#[derive(Clone, Debug)]
pub enum Target {
    SPrefix(Vec<usize>),
    QPrefix(Vec<usize>),
}

impl Target {
    pub fn cutting_times(&self) -> Result<Vec<usize>> {
        match self {
            Target::SPrefix(s) => {
                kneading_map_from_s(s)?;
                Ok(s.clone())
            }
            Target::QPrefix(q) => s_from_q(q, q.len().saturating_sub(1)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BisectionOpts {
    pub max_probes: usize,
    /// Initial parameter bracket (dyadic endpoints).
    pub bracket: (f64, f64),
}

impl Default for BisectionOpts {
    fn default() -> Self {
        BisectionOpts { max_probes: 4096, bracket: (0.5009765625, 1.0) }
    }
}

/// Compare the kneading sequence at a parameter against a target itinerary
/// prefix, lazily (the orbit is extended only to the first difference).
fn compare_parameter(m: &MapSpec, target: &[Symbol], p: Prec) -> Result<Ordering> {
    with_escalation(p, "comparing kneading sequences", |pp| {
        let mut orb = Orbit::new(pp);
        let mut r_parity_even = true;
        for (i, tgt) in target.iter().enumerate() {
            let t = i + 1;
            orb.ensure(m, t)?;
            let cand = Symbol::from(orb.side(t));
            if cand != *tgt {
                let natural = match (cand, *tgt) {
                    (Symbol::L, Symbol::R) => Ordering::Less,
                    _ => Ordering::Greater,
                };
                return Ok(if r_parity_even { natural } else { natural.reverse() });
            }
            if cand == Symbol::R {
                r_parity_even = !r_parity_even;
            }
        }
        Ok(Ordering::Equal)
    })
}

/// Certified parameter search in family (23): returns an enclosure of width
/// at most `tol` whose midpoint provably realizes the target cutting-time
/// prefix. Soundness rests on monotonicity of the kneading sequence in `a`
/// (the family is full); an unrealizable target surfaces as `NotFound`.
pub fn parameter_bisection(
    ell: crate::map::CriticalOrder,
    target: &Target,
    tol: f64,
    p: Prec,
    opts: &BisectionOpts,
) -> Result<Ball> {
    use astro_float::{BigFloat, RoundingMode as RM};
    let s_target = target.cutting_times()?;
    let syms = symbols_from_cutting_times(&s_target)?;
    let two = BigFloat::from_i8(2, 8);
    let wp = p.cap.max(128);

    let cmp_at = |a: &BigFloat| -> Result<Ordering> {
        let m = MapSpec::new(a.clone(), ell.clone())?;
        compare_parameter(&m, &syms, p)
    };

    let mut lo = BigFloat::from_f64(opts.bracket.0, 64);
    let mut hi = BigFloat::from_f64(opts.bracket.1, 64);
    let mut witness: Option<BigFloat> = None;
    match cmp_at(&lo)? {
        Ordering::Less => {}
        Ordering::Equal => witness = Some(lo.clone()),
        Ordering::Greater => return Err(Error::NotFound),
    }
    if witness.is_none() {
        match cmp_at(&hi)? {
            Ordering::Greater | Ordering::Equal => {
                if cmp_at(&hi)? == Ordering::Equal {
                    witness = Some(hi.clone());
                }
            }
            Ordering::Less => return Err(Error::NotFound),
        }
    }

    let tol_f = BigFloat::from_f64(tol, 64);
    let mut probes = 0usize;
    loop {
        let width = hi.sub(&lo, 64, RM::Up);
        if witness.is_some() && width <= tol_f {
            break;
        }
        if probes >= opts.max_probes {
            return Err(Error::NotFound);
        }
        probes += 1;
        let mid = lo.add(&hi, wp, RM::ToEven).div(&two, wp, RM::ToEven);
        match cmp_at(&mid) {
            Ok(Ordering::Less) => lo = mid,
            Ok(Ordering::Greater) => hi = mid,
            Ok(Ordering::Equal) => {
                // keep a realizing parameter inside the bracket and shrink
                // the wider side toward it
                let dl = mid.sub(&lo, 64, RM::Up);
                let dh = hi.sub(&mid, 64, RM::Up);
                witness = Some(mid.clone());
                if dl > dh {
                    let step = mid.sub(&lo, wp, RM::ToEven).div(&two, wp, RM::ToEven);
                    let cand = lo.add(&step, wp, RM::ToEven);
                    match cmp_at(&cand)? {
                        Ordering::Greater => hi = cand,
                        _ => lo = cand,
                    }
                } else {
                    hi = mid;
                }
            }
            Err(Error::PrecisionExhausted(_)) => {
                // likely brushed a (near-)superattracting parameter: probe a
                // deterministically nudged split point instead
                let quarter =
                    hi.sub(&lo, wp, RM::ToEven).div(&BigFloat::from_i8(4, 8), wp, RM::ToEven);
                let nudged = lo.add(&quarter, wp, RM::ToEven);
                match cmp_at(&nudged)? {
                    Ordering::Less => lo = nudged,
                    Ordering::Greater => hi = nudged,
                    Ordering::Equal => witness = Some(nudged),
                }
            }
            Err(e) => return Err(e),
        }
    }

    let w = witness.expect("loop exits only with a witness");
    let rad_lo = w.sub(&lo, 64, RM::Up);
    let rad_hi = hi.sub(&w, 64, RM::Up);
    let rad = if rad_lo > rad_hi { rad_lo } else { rad_hi };
    Ok(Ball::with_rad(w, rad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::CriticalOrder;

    fn p() -> Prec {
        Prec::new(64, 4096)
    }

    #[test]
    fn itinerary_trapped_left() {
        let m = MapSpec::from_f64(0.3, 2.0).unwrap();
        let w = itinerary(&m, 5, p()).unwrap();
        assert_eq!(w, vec![Symbol::L; 5]);
    }

    #[test]
    fn itinerary_full_map() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let w = itinerary(&m, 4, p()).unwrap();
        assert_eq!(w, vec![Symbol::R, Symbol::L, Symbol::L, Symbol::L]);
    }

    #[test]
    fn cutting_times_start_at_one() {
        // below the period-doubling regime only S_0 exists; the orbit falls
        // into the attracting fixed point and never crosses c again
        for a in [0.6, 0.7] {
            let m = MapSpec::from_f64(a, 2.0).unwrap();
            let kd = cutting_times(&m, 0, p(), &CuttingOpts::default()).unwrap();
            assert_eq!(kd.s, vec![1]);
            let opts = CuttingOpts { horizon: 2000, z_depth: 1 };
            assert!(matches!(cutting_times(&m, 1, p(), &opts), Err(Error::HorizonExceeded(_))));
        }
        for a in [0.9, 0.97, 1.0] {
            let m = MapSpec::from_f64(a, 2.0).unwrap();
            let kd = cutting_times(&m, 1, p(), &CuttingOpts::default()).unwrap();
            assert_eq!(kd.s[0], 1);
            assert_eq!(kd.s[1], 2);
        }
    }

    #[test]
    fn full_map_cutting_times_are_consecutive() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let kd = cutting_times(&m, 6, p(), &CuttingOpts::default()).unwrap();
        assert_eq!(kd.s, vec![1, 2, 3, 4, 5, 6, 7]);
        assert!(kd.q.iter().all(|&v| v == 0));
    }

    #[test]
    fn kneading_map_examples() {
        assert_eq!(kneading_map_from_s(&[1, 2, 3, 5, 8]).unwrap(), vec![0, 0, 0, 1, 2]);
        assert!(matches!(kneading_map_from_s(&[1, 2, 5]), Err(Error::NotACuttingSequence { .. })));
    }

    #[test]
    fn s_from_q_examples() {
        assert_eq!(s_from_q(&[0, 0, 0, 0, 0], 4).unwrap(), vec![1, 2, 3, 4, 5]);
        let q: Vec<usize> = (0..8).map(|k: usize| k.saturating_sub(2)).collect();
        assert_eq!(s_from_q(&q, 7).unwrap(), vec![1, 2, 3, 5, 8, 13, 21, 34]);
        let q: Vec<usize> = (0..7).map(|k: usize| k.saturating_sub(1)).collect();
        assert_eq!(s_from_q(&q, 6).unwrap(), vec![1, 2, 4, 8, 16, 32, 64]);
        assert!(matches!(s_from_q(&[0, 1], 1), Err(Error::IndexOutOfRange(1))));
    }

    #[test]
    fn wild_combinatorics_small() {
        let w = wild_combinatorics(2);
        assert_eq!(w.r, vec![3, 5, 10]);
        assert_eq!(w.t, vec![2, 5, 5]);
        let w = wild_combinatorics(6);
        assert_eq!(w.r, vec![3, 5, 10, 15, 30, 45, 90]);
        assert_eq!(w.t, vec![2, 5, 5, 15, 15, 45, 45]);
        assert_eq!(w.merged_cutting_times, vec![5, 8, 10, 15, 25, 30, 45, 75, 90]);
    }

    #[test]
    fn wild_combinatorics_growth_invariants() {
        let w = wild_combinatorics(30);
        for k in 0..30 {
            assert!(w.r[k + 1] > w.r[k]);
            assert!(w.t[k + 1] >= w.t[k]);
        }
        for pair in w.merged_cutting_times.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn wild_q_satisfies_bruin() {
        let mut w = wild_combinatorics(30);
        let s = w.full_cutting_times();
        let q = kneading_map_from_s(&s).unwrap();
        let k1 = detect_bruin_lockin(&q, 5).unwrap();
        assert!(k1 <= 2, "lock-in at {k1}");
        assert!(bruin_criterion(&q, k1, 5).is_empty());
        // closed form beyond the lock-in: the gaps k - Q(k) cycle 3, 2, 5
        let k0 = w.detect_k0(&s).unwrap();
        assert_eq!(k0, 2);
        for k in k0 + 4..q.len() {
            let expect = match (k - k0) % 3 {
                0 => 5,
                1 => 3,
                _ => 2,
            };
            assert_eq!(k - q[k], expect, "k={k}");
        }
    }

    #[test]
    fn fibonacci_q_satisfies_bruin_with_n2() {
        let q: Vec<usize> = (0..40).map(|k: usize| k.saturating_sub(2)).collect();
        assert!(bruin_criterion(&q, 2, 2).is_empty());
    }

    #[test]
    fn constant_q_fails_gap_bound() {
        let q = vec![0usize; 20];
        let viol = bruin_criterion(&q, 1, 5);
        assert!(viol.iter().any(|v| matches!(v, BruinViolation::GapBound { k, .. } if *k > 5)));
    }

    #[test]
    fn symbol_reconstruction_matches_fibonacci() {
        let s = vec![1, 2, 3, 5, 8];
        let sym = symbols_from_cutting_times(&s).unwrap();
        use Symbol::*;
        assert_eq!(sym, vec![R, L, L, R, R, R, L, R]);
    }

    #[test]
    fn plex_order_examples() {
        use Symbol::*;
        let feig = vec![R, L, R, R];
        let fib = vec![R, L, L, R, R];
        // doubling-type sequence sits below the Fibonacci one
        assert_eq!(plex_cmp(&feig, &fib), Ordering::Less);
        assert_eq!(plex_cmp(&fib, &feig[..3]), Ordering::Greater);
        // the full map sits above the Fibonacci one
        let full = vec![R, L, L, L, L];
        assert_eq!(plex_cmp(&full, &fib), Ordering::Greater);
    }

    #[test]
    fn reconstructed_symbols_match_computed_itinerary() {
        let target_s = vec![1usize, 2, 3, 5, 8, 13, 21];
        let predicted = symbols_from_cutting_times(&target_s).unwrap();
        let a = parameter_bisection(
            CriticalOrder::Int(2),
            &Target::SPrefix(target_s),
            1e-12,
            p(),
            &BisectionOpts::default(),
        )
        .unwrap();
        let m = MapSpec::new(a.mid.clone(), CriticalOrder::Int(2)).unwrap();
        let computed = itinerary(&m, predicted.len(), p()).unwrap();
        assert_eq!(computed, predicted);
    }

    #[test]
    fn bisection_realizes_fibonacci_prefix() {
        let target = Target::SPrefix(vec![1, 2, 3, 5, 8, 13]);
        let a =
            parameter_bisection(CriticalOrder::Int(2), &target, 1e-10, p(), &BisectionOpts::default())
                .unwrap();
        assert!(a.width_f64() <= 2.1e-10);
        let m = MapSpec::new(a.mid.clone(), CriticalOrder::Int(2)).unwrap();
        let kd = cutting_times(&m, 5, p(), &CuttingOpts::default()).unwrap();
        assert_eq!(kd.s, vec![1, 2, 3, 5, 8, 13]);
        // the Fibonacci parameter of the quadratic family is near 0.978
        assert!((a.mid_f64() - 0.978).abs() < 5e-3);
    }

    #[test]
    fn bisection_nested_on_smaller_tolerance() {
        let target = Target::SPrefix(vec![1, 2, 3, 5, 8]);
        let coarse =
            parameter_bisection(CriticalOrder::Int(2), &target, 1e-6, p(), &BisectionOpts::default())
                .unwrap();
        let fine =
            parameter_bisection(CriticalOrder::Int(2), &target, 1e-7, p(), &BisectionOpts::default())
                .unwrap();
        assert!(fine.width_f64() < coarse.width_f64());
        assert!(coarse.lo(p()) <= fine.lo(p()) && fine.hi(p()) <= coarse.hi(p()));
    }

    #[test]
    fn bisection_q_zero_prefix() {
        let target = Target::QPrefix(vec![0, 0, 0]);
        let a =
            parameter_bisection(CriticalOrder::Int(2), &target, 1e-6, p(), &BisectionOpts::default())
                .unwrap();
        let m = MapSpec::new(a.mid.clone(), CriticalOrder::Int(2)).unwrap();
        let kd = cutting_times(&m, 2, p(), &CuttingOpts::default()).unwrap();
        assert_eq!(kd.s, vec![1, 2, 3]);
    }

    #[test]
    fn cutting_times_against_preimage_tree_oracle() {
        // independent oracle: enumerate the full preimage tree of c and
        // check which orders place a preimage inside (z_k, c)
        let target = Target::SPrefix(vec![1, 2, 3, 5, 8, 13]);
        let a =
            parameter_bisection(CriticalOrder::Int(2), &target, 1e-12, p(), &BisectionOpts::default())
                .unwrap();
        let m = MapSpec::new(a.mid.clone(), CriticalOrder::Int(2)).unwrap();
        let kd = cutting_times(&m, 5, p(), &CuttingOpts { horizon: 1 << 12, z_depth: 6 }).unwrap();
        assert_eq!(kd.s, vec![1, 2, 3, 5, 8, 13]);

        let pp = Prec::new(256, 4096);
        let c = Ball::exact(critical_point());
        let a_ball = Ball::exact(m.a.clone());
        for k in 0..4usize {
            let zk = &kd.z[k];
            for n in kd.s[k] + 1..=kd.s[k + 1] {
                let mut level = vec![c.clone()];
                for _ in 0..n {
                    let mut next = Vec::new();
                    for y in &level {
                        if y.cmp(&a_ball, pp) == Some(Ordering::Greater) {
                            continue;
                        }
                        if y.sign(pp) == Some(Ordering::Less) {
                            continue;
                        }
                        next.push(m.lap_preimage(y, Side::Left, pp));
                        next.push(m.lap_preimage(y, Side::Right, pp));
                    }
                    level = next;
                }
                let mut found = false;
                for x in &level {
                    if x.cmp(zk, pp) == Some(Ordering::Greater)
                        && x.cmp(&c, pp) == Some(Ordering::Less)
                    {
                        found = true;
                        break;
                    }
                }
                let expect = n == kd.s[k + 1];
                assert_eq!(found, expect, "order {n} vs S[{}]={}", k + 1, kd.s[k + 1]);
            }
            let zk1 = &kd.z[k + 1];
            assert_eq!(zk.cmp(zk1, pp), Some(Ordering::Less));
            assert_eq!(zk1.cmp(&c, pp), Some(Ordering::Less));
        }
    }

    #[test]
    fn z_points_iterate_to_c() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let kd = cutting_times(&m, 5, p(), &CuttingOpts::default()).unwrap();
        let c = Ball::exact(critical_point());
        for (k, z) in kd.z.iter().enumerate() {
            let img = m.iterate(z, kd.s[k], Prec::new(256, 4096));
            assert!(img.intersects(&c, p()), "k={k}");
        }
    }

    #[test]
    fn kneading_text_format() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        let kd = cutting_times(&m, 3, p(), &CuttingOpts::default()).unwrap();
        let txt = kd.to_text();
        assert!(txt.starts_with("S: 1 2 3 4\n"));
        assert!(txt.contains("\nQ: 0 0 0 0\n"));
        assert!(txt.contains("\nsym: RLLL"));
    }

    proptest::proptest! {
        // round trip: admissible Q -> S -> Q is the identity
        #[test]
        fn prop_q_s_round_trip(seed in 0u64..2048) {
            let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as usize
            };
            let len = 2 + next() % 38;
            let mut q = vec![0usize];
            for j in 1..len {
                q.push(next() % j);
            }
            let s = s_from_q(&q, len - 1).unwrap();
            let q2 = kneading_map_from_s(&s).unwrap();
            proptest::prop_assert_eq!(q, q2);
        }
    }
}
