//! The counting layer: nice covers, the component count `q(n)`, the word
//! complexity `p(n)`, essential orders, the two-sided count sandwich, the
//! special-combinatorics test and growth classification.
//!
//! Everything here runs on the critical orbit sample. The workhorse is an
//! index sweep: the forward image of a segment between two orbit points is
//! always an interval whose endpoints are again orbit points (folding at `c`
//! replaces the upper endpoint by `f(c)`, which is orbit point 1), so image
//! tracking costs O(1) bookkeeping per step using precomputed side flags,
//! with a certified ball comparison only at folds. Segment containment in an
//! interval reduces to membership flags of the two endpoint indices, because
//! intervals are convex.

use crate::arith::{with_escalation, Interval, Prec};
use crate::error::{Error, Result};
use crate::map::{MapSpec, Orbit};
use crate::nice::{
    children, critical_chain, entry_domain, principal_nest, seed_nice_interval, NestOpts,
    NiceInterval,
};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

const NO_CODE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct CoverOpts {
    /// Sample size: the orbit points `f(c), ..., f^{n_orbit}(c)`.
    pub n_orbit: usize,
    /// Deepest preimage level `n` the cover data must support.
    pub n_max: usize,
    /// Entry-time budget for the coding (lookahead beyond `n_orbit + n_max`).
    pub entry_slack: usize,
}

impl Default for CoverOpts {
    fn default() -> Self {
        CoverOpts { n_orbit: 200_000, n_max: 200, entry_slack: 2000 }
    }
}

/// One element of a nice cover: the base interval itself or an entry domain
/// of it, identified by the sample.
#[derive(Clone, Debug)]
pub struct CoverElement {
    /// 0 is the base interval; entry domains follow in spatial order.
    pub id: u32,
    /// Entry time into the base (0 for the base itself).
    pub entry_time: usize,
    /// A representative orbit index inside the element.
    pub repr: usize,
    /// Sample points carrying this code.
    pub hits: usize,
}

/// A nice cover of the sampled omega-limit set, with the coding of the orbit
/// by cover elements and the flag arrays the counting sweeps run on.
pub struct NiceCover {
    pub map: MapSpec,
    pub base: NiceInterval,
    pub opts: CoverOpts,
    pub p: Prec,
    pub orbit: Orbit,
    /// Membership of `f^t(c)` in the base, `t <= horizon`.
    in_base: Vec<bool>,
    /// Cover-element id of `f^t(c)` (`NO_CODE` if unknown within the
    /// horizon), `t <= code_horizon`.
    code: Vec<u32>,
    /// Sample indices `1..=n_orbit` kept (coded through every level), in
    /// increasing spatial order.
    pub sorted_sample: Vec<u32>,
    pub elements: Vec<CoverElement>,
    /// Sample points dropped because some needed code was unknown.
    pub dropped: usize,
    code_horizon: usize,
}

impl NiceCover {
    pub fn code_of(&self, t: usize) -> Option<u32> {
        let c = *self.code.get(t)?;
        if c == NO_CODE {
            None
        } else {
            Some(c)
        }
    }

    pub fn in_base_flag(&self, t: usize) -> bool {
        self.in_base[t]
    }

    /// The interval of a cover element (the base itself, or the entry domain
    /// of its representative point).
    pub fn element_interval(&mut self, id: u32) -> Result<Interval> {
        if id == 0 {
            return Ok(self.base.span.clone());
        }
        let el = self
            .elements
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::Config(format!("no cover element {id}")))?;
        let x = self.orbit.pt(el.repr).clone();
        let (_, iv) = entry_domain(&self.map, &x, &self.base, el.entry_time + 1, self.p)?;
        Ok(iv)
    }
}

/// Track the hull of the segment between orbit points `i` and `j` for
/// `steps` iterates. The hull endpoints stay orbit points; a fold replaces
/// the far endpoint by orbit index 1. Returns the endpoint indices.
fn sweep_pair(
    orbit: &Orbit,
    mut i: usize,
    mut j: usize,
    steps: usize,
    p: Prec,
) -> Result<(usize, usize)> {
    for _ in 0..steps {
        if orbit.side(i) != orbit.side(j) {
            let ni = i + 1;
            let nj = j + 1;
            let lo = match orbit.pt(ni).cmp(orbit.pt(nj), p) {
                Some(Ordering::Less) | Some(Ordering::Equal) => ni,
                Some(Ordering::Greater) => nj,
                None => return Err(Error::Undecided("fold minimum".into())),
            };
            i = lo;
            j = 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    Ok((i, j))
}

/// Build the nice cover for `base` from the critical orbit sample: flags,
/// entry times, the coding by cover elements, and the element list.
pub fn build_nice_cover(
    m: &MapSpec,
    base: &NiceInterval,
    opts: &CoverOpts,
    p: Prec,
) -> Result<NiceCover> {
    let code_horizon = opts.n_orbit + opts.n_max + 1;
    let horizon = code_horizon + opts.entry_slack;
    let mut orbit = Orbit::new(p);
    orbit.ensure(m, horizon)?;

    let mut in_base = vec![false; horizon + 1];
    for t in 1..=horizon {
        in_base[t] = match base.contains(orbit.pt(t), p) {
            Some(v) => v,
            None => {
                return Err(Error::Undecided(format!("membership of orbit point {t} in the base")))
            }
        };
    }

    // entry times by backward recurrence
    let mut entry = vec![NO_CODE; code_horizon + 1];
    let mut next_known: u32 = NO_CODE;
    for t in (1..=horizon).rev() {
        if t <= code_horizon {
            entry[t] = next_known;
        }
        next_known = if in_base[t] {
            1
        } else if next_known == NO_CODE {
            NO_CODE
        } else {
            next_known.saturating_add(1)
        };
    }

    // spatial order of every coded point; base points carry code 0 and act
    // as separators between entry-domain groups
    let mut idx: Vec<u32> = (1..=code_horizon as u32).collect();
    let mut undecided = false;
    idx.sort_by(|&a, &b| match orbit.pt(a as usize).cmp(orbit.pt(b as usize), p) {
        Some(o) => o,
        None => {
            undecided = true;
            Ordering::Equal
        }
    });
    if undecided {
        return Err(Error::Undecided("sorting the orbit sample".into()));
    }

    let mut code = vec![NO_CODE; code_horizon + 1];
    let mut groups: Vec<(usize, usize)> = Vec::new(); // (repr index, entry time)
    let mut prev: Option<(usize, u32)> = None;
    let mut prev_was_base = false;
    for &ti in &idx {
        let t = ti as usize;
        if in_base[t] {
            code[t] = 0;
            prev_was_base = true;
            continue;
        }
        let k = entry[t];
        if k == NO_CODE {
            continue;
        }
        let same = if prev_was_base {
            false
        } else if let Some((pt_idx, pk)) = prev {
            pk == k && {
                // same entry domain iff the segment image at the entry time
                // lies inside the base
                let (lo, hi) = sweep_pair(&orbit, pt_idx, t, k as usize, p)?;
                in_base[lo] && in_base[hi]
            }
        } else {
            false
        };
        if !same {
            groups.push((t, k as usize));
        }
        code[t] = groups.len() as u32; // entry-domain ids start at 1
        prev = Some((t, k));
        prev_was_base = false;
    }

    // keep sample points whose whole code window is known
    let mut dropped = 0usize;
    let mut kept: Vec<u32> = Vec::with_capacity(opts.n_orbit);
    for &ti in &idx {
        let t = ti as usize;
        if t > opts.n_orbit {
            continue;
        }
        let ok = (0..=opts.n_max).all(|n| code[t + n] != NO_CODE);
        if ok {
            kept.push(ti);
        } else {
            dropped += 1;
        }
    }

    let mut hit_count: HashMap<u32, usize> = HashMap::new();
    for &ti in &kept {
        *hit_count.entry(code[ti as usize]).or_insert(0) += 1;
    }
    let mut elements = Vec::new();
    if let Some(&hits) = hit_count.get(&0) {
        elements.push(CoverElement { id: 0, entry_time: 0, repr: 0, hits });
    }
    for (gi, &(repr, k)) in groups.iter().enumerate() {
        let id = (gi + 1) as u32;
        if let Some(&hits) = hit_count.get(&id) {
            elements.push(CoverElement { id, entry_time: k, repr, hits });
        }
    }

    Ok(NiceCover {
        map: m.clone(),
        base: base.clone(),
        opts: opts.clone(),
        p,
        orbit,
        in_base,
        code,
        sorted_sample: kept,
        elements,
        dropped,
        code_horizon,
    })
}

/// `q(n)` for `n = 0..=n_max`: the number of components of the `n`-th
/// preimage of the cover union hit by the sample. Adjacent sample points
/// share a component iff the tracked segment image lies in one cover
/// element, decided by code equality of the hull-endpoint indices.
pub fn q_curve(cover: &NiceCover) -> Result<Vec<u64>> {
    let n_max = cover.opts.n_max;
    let pts = &cover.sorted_sample;
    if pts.len() < 2 {
        return Ok(vec![pts.len() as u64; n_max + 1]);
    }
    let pair_merges = |w: &[u32]| -> Result<Vec<u64>> {
        let (mut i, mut j) = (w[0] as usize, w[1] as usize);
        let mut m = vec![0u64; n_max + 1];
        for n in 0..=n_max {
            let ci = cover.code[i];
            let cj = cover.code[j];
            if ci != NO_CODE && ci == cj {
                m[n] = 1;
            }
            if n == n_max {
                break;
            }
            if cover.orbit.side(i) != cover.orbit.side(j) {
                let ni = i + 1;
                let nj = j + 1;
                let lo = match cover.orbit.pt(ni).cmp(cover.orbit.pt(nj), cover.p) {
                    Some(Ordering::Less) | Some(Ordering::Equal) => ni,
                    Some(Ordering::Greater) => nj,
                    None => return Err(Error::Undecided("fold minimum in q sweep".into())),
                };
                i = lo;
                j = 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        Ok(m)
    };
    #[cfg(feature = "parallel")]
    let merges = pts.par_windows(2).map(pair_merges).try_reduce(
        || vec![0u64; n_max + 1],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            Ok(a)
        },
    )?;
    #[cfg(not(feature = "parallel"))]
    let merges = {
        let mut acc = vec![0u64; n_max + 1];
        for w in pts.windows(2) {
            let m = pair_merges(w)?;
            for (x, y) in acc.iter_mut().zip(m) {
                *x += y;
            }
        }
        acc
    };
    let total = pts.len() as u64;
    Ok(merges.into_iter().map(|m| total - m).collect())
}

/// Word complexity `p(n)` of the cover coding for `n = 1..=n_max`: the
/// number of distinct length-`n` words realized by the sampled orbit,
/// computed by iterated partition refinement of positions. Cover elements
/// are pairwise disjoint, so the minimal subcover of the n-fold join counts
/// exactly the realized words.
pub fn p_curve(cover: &NiceCover, n_max: usize) -> Result<Vec<u64>> {
    let n_orbit = cover.opts.n_orbit;
    let limit = cover.code_horizon;
    if n_orbit + n_max > limit {
        return Err(Error::InsufficientHorizon(format!(
            "coding horizon {limit} cannot support words of length {n_max}"
        )));
    }
    for t in 1..=n_orbit + n_max {
        if cover.code[t] == NO_CODE {
            return Err(Error::InsufficientHorizon(format!("orbit point {t} is uncoded")));
        }
    }
    let mut cls: Vec<u32> = cover.code[..=n_orbit + n_max].to_vec();
    let mut out = Vec::with_capacity(n_max);
    let mut remap: HashMap<(u32, u32), u32> = HashMap::new();
    for n in 1..=n_max {
        let mut seen: std::collections::HashSet<u32> = std::collections::HashSet::new();
        for &c in cls.iter().take(n_orbit + 1).skip(1) {
            seen.insert(c);
        }
        out.push(seen.len() as u64);
        if n == n_max {
            break;
        }
        remap.clear();
        let last = n_orbit + n_max - n;
        for t in 1..=last {
            let key = (cls[t], cls[t + 1]);
            let next_id = remap.len() as u32;
            let id = *remap.entry(key).or_insert(next_id);
            cls[t] = id;
        }
    }
    Ok(out)
}

/// The essential-order record of the depth-`n` critical pull-back of the
/// base: transition times along the chain, their jump structure and the
/// number of distinct values.
#[derive(Clone, Debug, Serialize)]
pub struct EssentialOrderRecord {
    pub n: usize,
    /// Transition times `s_1 <= s_2 <= ...` between consecutive critical
    /// chain intervals, from the base inward.
    pub transition_times: Vec<usize>,
    /// Jump indices `m(1) = 1 < m(2) < ...` (1-based positions into
    /// `transition_times`) where the transition time strictly increases.
    pub jumps: Vec<usize>,
    pub essential_order: usize,
}

/// Essential order of `Y_{-n}` (the critical pull-back of the base by
/// `f^n`): requires `f^n(c)` inside the base.
pub fn essential_order(
    m: &MapSpec,
    orb: &mut Orbit,
    base: &NiceInterval,
    n: usize,
    p: Prec,
) -> Result<EssentialOrderRecord> {
    let chain = critical_chain(m, orb, &base.span, n, p)?;
    // chain positions containing c, from the base (position n) down to 0
    let mut crit_positions: Vec<usize> = vec![n];
    for &j in chain.critical_steps.iter().rev() {
        crit_positions.push(j);
    }
    crit_positions.push(0);
    let transition_times: Vec<usize> = crit_positions.windows(2).map(|w| w[0] - w[1]).collect();
    let mut jumps = vec![1usize];
    for idx in 1..transition_times.len() {
        if transition_times[idx] > transition_times[jumps[jumps.len() - 1] - 1] {
            jumps.push(idx + 1);
        }
    }
    let mut distinct = transition_times.clone();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(EssentialOrderRecord { n, transition_times, jumps, essential_order: distinct.len() })
}

/// Children counts of the critical components `Y_{-i}` of
/// `f^{-i}(base union D(base))` for `i < n_max`, feeding the sandwich upper
/// bound. Each count scans transition times up to `child_budget`.
pub struct NuCounts {
    pub nu: Vec<usize>,
    pub max_transition: Vec<usize>,
    /// True when the deepest child found leaves factor-two headroom below
    /// the budget, suggesting the scan did not truncate the family.
    pub complete: bool,
    pub budget: usize,
}

pub fn nu_counts(cover: &mut NiceCover, n_max: usize, child_budget: usize) -> Result<NuCounts> {
    let m = cover.map.clone();
    let p = cover.p;
    let mut nu = Vec::with_capacity(n_max);
    let mut max_transition = Vec::with_capacity(n_max);
    for i in 0..n_max {
        let span = if i == 0 {
            cover.base.span.clone()
        } else {
            let id = cover
                .code_of(i)
                .ok_or_else(|| Error::InsufficientHorizon(format!("orbit point {i} is uncoded")))?;
            let w = cover.element_interval(id)?;
            critical_chain(&m, &mut cover.orbit, &w, i, p)?.result
        };
        let y_minus_i = NiceInterval {
            span,
            provenance: crate::nice::Provenance::CriticalPullback { depth: i },
            certified_horizon: 0,
        };
        let kids = children(&m, &mut cover.orbit, &y_minus_i, child_budget, p)?;
        nu.push(kids.len());
        max_transition.push(kids.last().map(|k| k.transition_time).unwrap_or(0));
    }
    let deepest = max_transition.iter().copied().max().unwrap_or(0);
    Ok(NuCounts { nu, max_transition, complete: deepest * 2 <= child_budget, budget: child_budget })
}

/// Per-`n` row of a complexity curve.
#[derive(Clone, Debug, Serialize)]
pub struct CurveRow {
    pub n: usize,
    pub q: Option<u64>,
    pub p: Option<u64>,
    pub m_essential: Option<usize>,
    pub nu_sum: Option<u64>,
    pub notes: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveMeta {
    pub a_decimal: String,
    pub a_exact_hex: String,
    pub ell: f64,
    pub n_orbit: usize,
    pub n_max: usize,
    pub entry_slack: usize,
    pub child_budget: usize,
    pub precision_bits: usize,
    pub precision_cap: usize,
    pub dropped_points: usize,
    pub nu_complete: bool,
}

/// A complexity curve with its provenance metadata.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexityCurve {
    pub rows: Vec<CurveRow>,
    pub meta: CurveMeta,
}

impl ComplexityCurve {
    /// CSV with the documented schema `n,q,p,M,nu_sum,notes`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,q,p,M,nu_sum,notes\n");
        for r in &self.rows {
            let q = r.q.map(|v| v.to_string()).unwrap_or_default();
            let p = r.p.map(|v| v.to_string()).unwrap_or_default();
            let me = r.m_essential.map(|v| v.to_string()).unwrap_or_default();
            let nu = r.nu_sum.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{q},{p},{me},{nu},{}", r.n, r.notes);
        }
        out
    }
}

fn hex_of(x: &astro_float::BigFloat) -> String {
    match x.as_raw_parts() {
        Some((words, _, sign, exp, _)) => {
            let mut s = String::new();
            if matches!(sign, astro_float::Sign::Neg) {
                s.push('-');
            }
            s.push_str("0x");
            let width = astro_float::WORD_BIT_SIZE / 4;
            for w in words.iter().rev() {
                let _ = write!(s, "{w:0width$x}");
            }
            let _ = write!(s, "p{exp}");
            s
        }
        None => "nan".into(),
    }
}

/// Assemble the full curve: `q(n)`, `p(n)`, essential orders at the return
/// times in range, and cumulative children counts.
pub fn complexity_curve(
    m: &MapSpec,
    base: &NiceInterval,
    opts: &CoverOpts,
    child_budget: usize,
    p: Prec,
) -> Result<(ComplexityCurve, NiceCover)> {
    let mut cover = build_nice_cover(m, base, opts, p)?;
    let q = q_curve(&cover)?;
    let pw = p_curve(&cover, opts.n_max + 1)?;
    let nus = nu_counts(&mut cover, opts.n_max, child_budget)?;
    let mut rows = Vec::with_capacity(opts.n_max + 1);
    let mut nu_cum = 0u64;
    for n in 0..=opts.n_max {
        let mut notes = String::new();
        let m_essential = if n >= 1 && cover.in_base[n] {
            Some(essential_order(m, &mut cover.orbit, base, n, p)?.essential_order)
        } else {
            None
        };
        let nu_sum = if n == 0 {
            Some(0)
        } else {
            nu_cum += nus.nu[n - 1] as u64;
            Some(nu_cum)
        };
        if !nus.complete {
            notes.push_str("nu_budget_tight");
        }
        rows.push(CurveRow {
            n,
            q: Some(q[n]),
            p: if n >= 1 { Some(pw[n - 1]) } else { None },
            m_essential,
            nu_sum,
            notes,
        });
    }
    let meta = CurveMeta {
        a_decimal: format!("{}", m.a),
        a_exact_hex: hex_of(&m.a),
        ell: m.ell.as_f64(),
        n_orbit: opts.n_orbit,
        n_max: opts.n_max,
        entry_slack: opts.entry_slack,
        child_budget,
        precision_bits: p.bits,
        precision_cap: p.cap,
        dropped_points: cover.dropped,
        nu_complete: nus.complete,
    };
    Ok((ComplexityCurve { rows, meta }, cover))
}

/// Full curve run with escalation: retries the whole pipeline at doubled
/// precision when any certified comparison stays undecided.
pub fn complexity_curve_escalating(
    m: &MapSpec,
    opts: &CoverOpts,
    child_budget: usize,
    p: Prec,
) -> Result<(ComplexityCurve, NiceCover)> {
    with_escalation(p, "building the complexity curve", |pp| {
        let base = seed_nice_interval(m, pp)?;
        complexity_curve(m, &base, opts, child_budget, pp)
    })
}

/// One sandwich violation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SandwichViolation {
    /// `p(n+1) > q(n)`.
    Lower { n: usize, p: u64, q: u64 },
    /// `q(n)` exceeds the cumulative children count.
    Upper { n: usize, q: u64, nu_sum: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub violations: Vec<SandwichViolation>,
    /// Level from which the upper bound applies (just past the largest
    /// transition time of a child of the base).
    pub upper_from: usize,
    /// False when the children scan may be incomplete; the upper bound is
    /// then skipped with this notice.
    pub upper_checked: bool,
}

/// Check both count inequalities on a computed curve: `p(n+1) <= q(n)` for
/// every `n`, and `q(n) <= sum_{i<n} nu(Y_{-i})` for `n` beyond the largest
/// child transition time of the base.
pub fn sandwich_check(curve: &ComplexityCurve, max_child_transition_of_base: usize) -> SandwichReport {
    let mut violations = Vec::new();
    let rows = &curve.rows;
    for w in rows.windows(2) {
        if w[1].n != w[0].n + 1 {
            continue;
        }
        if let (Some(q), Some(p1)) = (w[0].q, w[1].p) {
            if p1 > q {
                violations.push(SandwichViolation::Lower { n: w[0].n, p: p1, q });
            }
        }
    }
    let upper_checked = curve.meta.nu_complete;
    if upper_checked {
        for row in rows.iter() {
            if row.n <= max_child_transition_of_base {
                continue;
            }
            if let (Some(q), Some(nu_sum)) = (row.q, row.nu_sum) {
                if q > nu_sum {
                    violations.push(SandwichViolation::Upper { n: row.n, q, nu_sum });
                }
            }
        }
    }
    SandwichReport { violations, upper_from: max_child_transition_of_base + 1, upper_checked }
}

/// Per-level result of the special-combinatorics test: how many of the two
/// gap components of `Y_n \ Y_{n+1}` are hit by the sample.
#[derive(Clone, Debug, Serialize)]
pub struct AnnulusHits {
    pub level: usize,
    pub left_hits: usize,
    pub right_hits: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecialCombinatoricsReport {
    pub levels: Vec<AnnulusHits>,
    /// True iff every tested annulus has exactly one side hit.
    pub special: bool,
}

/// Count, for each principal-nest level `n < depth`, the components of
/// `Y_n \ Y_{n+1}` hit by the orbit sample `f(c), ..., f^{horizon}(c)`.
pub fn special_combinatorics_check(
    m: &MapSpec,
    depth: usize,
    sample_horizon: usize,
    p: Prec,
) -> Result<SpecialCombinatoricsReport> {
    let mut orb = Orbit::new(p);
    orb.ensure(m, sample_horizon)?;
    let nest = principal_nest(m, &mut orb, depth, p, &NestOpts::default())?;
    let mut levels = Vec::new();
    let mut special = true;
    for n in 0..depth {
        let outer = &nest[n].interval.span;
        let inner = &nest[n + 1].interval.span;
        let left = Interval { lo: outer.lo.clone(), hi: inner.lo.clone() };
        let right = Interval { lo: inner.hi.clone(), hi: outer.hi.clone() };
        let mut lh = 0usize;
        let mut rh = 0usize;
        for t in 1..=sample_horizon {
            let x = orb.pt(t);
            match left.contains(x, p) {
                Some(true) => lh += 1,
                Some(false) => {}
                None => return Err(Error::Undecided("annulus membership (left)".into())),
            }
            match right.contains(x, p) {
                Some(true) => rh += 1,
                Some(false) => {}
                None => return Err(Error::Undecided("annulus membership (right)".into())),
            }
        }
        if (lh > 0) == (rh > 0) {
            special = false;
        }
        levels.push(AnnulusHits { level: n, left_hits: lh, right_hits: rh });
    }
    Ok(SpecialCombinatoricsReport { levels, special })
}

/// Growth models fitted by least squares.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthModel {
    Constant,
    Linear,
    NLogN,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    pub best: GrowthModel,
    pub coefficient: f64,
    /// Root-mean-square residual per model (constant, linear, n log n).
    pub rms: [f64; 3],
    /// `sup value / (n log n)` over the tail (upper half of the n-range).
    pub sup_over_nlogn: f64,
    /// `inf value / n` over the tail.
    pub inf_over_n: f64,
}

/// Least-squares classification of a series against `C`, `C n`, `C n log n`,
/// plus tail ratios. Requires at least 20 points spread over a decade.
pub fn growth_classify(series: &[(usize, f64)]) -> Result<GrowthFit> {
    if series.len() < 20 {
        return Err(Error::InsufficientData(format!("{} points, need 20", series.len())));
    }
    let n_min = series.iter().map(|(n, _)| *n).min().unwrap().max(1);
    let n_max = series.iter().map(|(n, _)| *n).max().unwrap();
    if n_max < 10 * n_min {
        return Err(Error::InsufficientData("n-range narrower than one decade".into()));
    }
    let models: [fn(f64) -> f64; 3] = [|_| 1.0, |n| n, |n| if n > 1.0 { n * n.ln() } else { 0.0 }];
    let mut coef = [0.0f64; 3];
    let mut rms = [0.0f64; 3];
    for (mi, g) in models.iter().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(n, v) in series {
            let gn = g(n as f64);
            num += v * gn;
            den += gn * gn;
        }
        let c = if den > 0.0 { num / den } else { 0.0 };
        coef[mi] = c;
        let mut ss = 0.0;
        for &(n, v) in series {
            let e = v - c * g(n as f64);
            ss += e * e;
        }
        rms[mi] = (ss / series.len() as f64).sqrt();
    }
    let best_i = (0..3).min_by(|&a, &b| rms[a].partial_cmp(&rms[b]).unwrap()).unwrap();
    let best = [GrowthModel::Constant, GrowthModel::Linear, GrowthModel::NLogN][best_i];
    let tail_from = n_min + (n_max - n_min) / 2;
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for &(n, v) in series {
        if n < tail_from || n < 2 {
            continue;
        }
        let nf = n as f64;
        sup = sup.max(v / (nf * nf.ln()));
        inf = inf.min(v / nf);
    }
    Ok(GrowthFit { best, coefficient: coef[best_i], rms, sup_over_nlogn: sup, inf_over_n: inf })
}

/// Report line for a nice interval (tab-separated: provenance, endpoints
/// with radius, certified horizon).
pub fn interval_report_line(iv: &NiceInterval) -> String {
    let prov = match iv.provenance {
        crate::nice::Provenance::Seed => "seed".to_string(),
        crate::nice::Provenance::CriticalPullback { depth } => format!("pullback[{depth}]"),
    };
    format!(
        "{prov}\t{:.17e}+-{:.2e}\t{:.17e}+-{:.2e}\t{}",
        iv.span.lo.mid_f64(),
        iv.span.lo.width_f64() / 2.0,
        iv.span.hi.mid_f64(),
        iv.span.hi.width_f64() / 2.0,
        iv.certified_horizon
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kneading::{parameter_bisection, BisectionOpts, Target};
    use crate::map::CriticalOrder;

    fn p() -> Prec {
        Prec::new(128, 4096)
    }

    fn fib_map(prefix: usize) -> MapSpec {
        let mut s = vec![1usize, 2];
        while s.len() < prefix {
            let n = s[s.len() - 1] + s[s.len() - 2];
            s.push(n);
        }
        let a = parameter_bisection(
            CriticalOrder::Int(2),
            &Target::SPrefix(s),
            1e-12,
            p(),
            &BisectionOpts::default(),
        )
        .unwrap();
        MapSpec::new(a.mid.clone(), CriticalOrder::Int(2)).unwrap()
    }

    #[test]
    fn small_fibonacci_pipeline_counts() {
        let m = fib_map(16); // locked through 987
        let base = seed_nice_interval(&m, p()).unwrap();
        let opts = CoverOpts { n_orbit: 600, n_max: 30, entry_slack: 300 };
        let cover = build_nice_cover(&m, &base, &opts, p()).unwrap();
        assert_eq!(cover.dropped, 0);
        let q = q_curve(&cover).unwrap();
        let pw = p_curve(&cover, 31).unwrap();
        // q(0) and p(1) both count the cover elements
        assert_eq!(q[0] as usize, cover.elements.len());
        assert_eq!(pw[0] as usize, cover.elements.len());
        // the first count inequality, exactly, on every level
        for n in 0..=30usize {
            assert!(pw[n] <= q[n], "p({}) = {} > q({}) = {}", n + 1, pw[n], n, q[n]);
        }
        for w in pw.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for &v in &q {
            assert!(v >= 1 && v <= 600);
        }
    }

    #[test]
    fn p_word_complexity_matches_brute_force_on_small_codings() {
        let m = fib_map(12);
        let base = seed_nice_interval(&m, p()).unwrap();
        let opts = CoverOpts { n_orbit: 120, n_max: 12, entry_slack: 200 };
        let cover = build_nice_cover(&m, &base, &opts, p()).unwrap();
        let pw = p_curve(&cover, 12).unwrap();
        let codes: Vec<u32> = (1..=132).map(|t| cover.code_of(t).unwrap()).collect();
        for n in 1..=12usize {
            let mut set = std::collections::HashSet::new();
            for t in 0..120 {
                set.insert(&codes[t..t + n]);
            }
            assert_eq!(pw[n - 1] as usize, set.len(), "n={n}");
        }
    }

    #[test]
    fn submultiplicative_word_counts() {
        let m = fib_map(14);
        let base = seed_nice_interval(&m, p()).unwrap();
        let opts = CoverOpts { n_orbit: 400, n_max: 24, entry_slack: 300 };
        let cover = build_nice_cover(&m, &base, &opts, p()).unwrap();
        let pw = p_curve(&cover, 24).unwrap();
        for i in 1..=12usize {
            for j in 1..=12usize {
                assert!(pw[i + j - 1] <= pw[i - 1] * pw[j - 1], "p({}) > p({})p({})", i + j, i, j);
            }
        }
    }

    #[test]
    fn essential_order_first_return_is_one() {
        let m = fib_map(12);
        let base = seed_nice_interval(&m, p()).unwrap();
        let mut orb = Orbit::new(p());
        let rec = essential_order(&m, &mut orb, &base, 3, p()).unwrap();
        assert_eq!(rec.transition_times, vec![3]);
        assert_eq!(rec.essential_order, 1);
        assert_eq!(rec.jumps, vec![1]);
    }

    #[test]
    fn essential_order_monotone_transitions() {
        let m = fib_map(14);
        let base = seed_nice_interval(&m, p()).unwrap();
        let mut orb = Orbit::new(p());
        orb.ensure(&m, 120).unwrap();
        let mut tested = 0;
        for n in 1..=100usize {
            if base.contains(orb.pt(n), p()) != Some(true) {
                continue;
            }
            let rec = essential_order(&m, &mut orb, &base, n, p()).unwrap();
            for w in rec.transition_times.windows(2) {
                assert!(w[0] <= w[1], "transition times decrease at n={n}");
            }
            let s = &rec.transition_times;
            let mj = &rec.jumps;
            for j in 2..mj.len() {
                let sj = s[mj[j] - 1];
                let sj1 = s[mj[j - 1] - 1];
                let sj2 = s[mj[j - 2] - 1];
                let gap = mj[j] - mj[j - 1];
                assert!(sj >= sj1 * gap + sj2, "growth bound fails at n={n}, j={j}");
            }
            tested += 1;
        }
        assert!(tested > 10);
    }

    #[test]
    fn sandwich_flags_injected_fault() {
        let rows = vec![
            CurveRow {
                n: 4,
                q: Some(5),
                p: Some(4),
                m_essential: None,
                nu_sum: Some(100),
                notes: String::new(),
            },
            CurveRow {
                n: 5,
                q: Some(6),
                p: Some(9),
                m_essential: None,
                nu_sum: Some(100),
                notes: String::new(),
            },
        ];
        let meta = CurveMeta {
            a_decimal: String::new(),
            a_exact_hex: String::new(),
            ell: 2.0,
            n_orbit: 0,
            n_max: 5,
            entry_slack: 0,
            child_budget: 0,
            precision_bits: 64,
            precision_cap: 64,
            dropped_points: 0,
            nu_complete: true,
        };
        let curve = ComplexityCurve { rows, meta };
        let rep = sandwich_check(&curve, 0);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, SandwichViolation::Lower { n: 4, p: 9, q: 5 })));
    }

    #[test]
    fn special_combinatorics_fibonacci_true() {
        let m = fib_map(14);
        let rep = special_combinatorics_check(&m, 4, 400, p()).unwrap();
        assert!(rep.special, "{:?}", rep.levels);
        for l in &rep.levels {
            assert_eq!((l.left_hits > 0) as usize + (l.right_hits > 0) as usize, 1);
        }
    }

    #[test]
    fn special_combinatorics_full_map_not_applicable() {
        let m = MapSpec::from_f64(1.0, 2.0).unwrap();
        // the critical orbit falls onto the fixed point 0 and never returns:
        // the nest cannot be built
        assert!(special_combinatorics_check(&m, 3, 200, p()).is_err());
    }

    #[test]
    fn growth_classify_synthetic() {
        let series: Vec<(usize, f64)> = (1..=120).map(|n| (n, 42.0)).collect();
        let fit = growth_classify(&series).unwrap();
        assert_eq!(fit.best, GrowthModel::Constant);
        assert!((fit.coefficient - 42.0).abs() < 1e-9);
        assert!(fit.rms[0] < 1e-12);

        let series: Vec<(usize, f64)> = (1..=120).map(|n| (n, 7.0 * n as f64)).collect();
        let fit = growth_classify(&series).unwrap();
        assert_eq!(fit.best, GrowthModel::Linear);
        assert!((fit.coefficient - 7.0).abs() < 1e-9);

        let series: Vec<(usize, f64)> =
            (2..=140).map(|n| (n, 3.0 * n as f64 * (n as f64).ln())).collect();
        let fit = growth_classify(&series).unwrap();
        assert_eq!(fit.best, GrowthModel::NLogN);
        assert!((fit.coefficient - 3.0).abs() < 1e-6);

        assert!(growth_classify(&series[..10]).is_err());
    }

    #[test]
    fn csv_schema_and_determinism() {
        let m = fib_map(12);
        let base = seed_nice_interval(&m, p()).unwrap();
        let opts = CoverOpts { n_orbit: 150, n_max: 10, entry_slack: 200 };
        let (curve1, _) = complexity_curve(&m, &base, &opts, 200, p()).unwrap();
        let (curve2, _) = complexity_curve(&m, &base, &opts, 200, p()).unwrap();
        let csv1 = curve1.to_csv();
        assert!(csv1.starts_with("n,q,p,M,nu_sum,notes\n"));
        assert_eq!(csv1, curve2.to_csv());
        assert_eq!(curve1.rows.len(), 11);
        assert!(curve1.rows[0].q.is_some() && curve1.rows[0].p.is_none());
    }
}
