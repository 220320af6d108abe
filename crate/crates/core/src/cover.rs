//! Level-n covers of the limsup set: repeated-root intervals plus the
//! per-pair unions chopped into pieces of length in `[δ/2, δ]`, and their
//! Hausdorff g-sums.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{gcd_i64, qi_compare, qi_sub_enclose, Enclosure, QuadIrr, Rational};
use crate::poly::{DyadicBlock, IntegerQuadratic, DEFAULT_LEVEL_CAP};
use crate::scale::{decay_threshold, DimFnSpec, PreparedDimFn, PsiSpec, DECAY_CAP};
use crate::sets::fast::{component_exact, pair_sets, pair_sets_exact, Component, FastThreshold};
use crate::sets::{delta_set, Interval, IntervalUnion, Threshold};

/// Per-pair piece bound `640·2ⁿ`.
pub fn chop_bound(n: u32) -> u64 {
    640u64 << n
}

/// Chopping scale `δ = ψ(2ⁿ) / (20·2ⁿ)`.
pub fn chop_scale(t: &Rational, n: u32) -> Rational {
    t / Rational::from(20i64 << n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChopPiece {
    pub lo: QuadIrr,
    pub hi: QuadIrr,
    /// Whole component shorter than `δ/2`.
    pub short: bool,
}

impl ChopPiece {
    pub fn length(&self) -> Enclosure {
        qi_sub_enclose(&self.hi, &self.lo).clamp_nonneg()
    }
}

/// Greedy left-to-right chop of each component: full pieces of length `δ`,
/// then a remainder `r`. A remainder below `δ/2` is absorbed by splitting the
/// last `δ + r` into `δ/2` and `δ/2 + r`. Components shorter than `δ/2` are
/// kept whole and tagged.
pub fn chop(u: &IntervalUnion, delta: &Rational) -> Vec<ChopPiece> {
    u.intervals().iter().flat_map(|iv| chop_interval(iv, delta)).collect()
}

/// How one component is cut; `k` counts the cut points `lo + jδ` used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cut {
    Short,
    Whole,
    /// `k` pieces of `δ`, the last one ending at `hi`.
    Exact(i64),
    /// `k - 1` pieces of `δ`, then `δ/2` and `δ/2 + r` with `0 < r < δ/2`.
    Split(i64),
    /// `k` pieces of `δ` and a remainder of at least `δ/2`.
    Tail(i64),
}

fn plan(iv: &Interval, delta: &Rational) -> Cut {
    let (lo, hi) = (&iv.lo, &iv.hi);
    let half = delta / Rational::from(2);
    let at = |k: &Rational| lo.add_rational(k);
    if qi_compare(hi, &at(&half)) == Ordering::Less {
        return Cut::Short;
    }
    if qi_compare(hi, &at(delta)) != Ordering::Greater {
        return Cut::Whole;
    }
    // k = floor(L / δ) from a float guess, then fixed up exactly
    let guess = (iv.length().mid() / delta.to_f64()).floor().max(1.0) as i64;
    let mut k = guess;
    while qi_compare(&at(&(delta * Rational::from(k + 1))), hi) != Ordering::Greater {
        k += 1;
    }
    while k > 1 && qi_compare(&at(&(delta * Rational::from(k))), hi) == Ordering::Greater {
        k -= 1;
    }
    let tail_start = at(&(delta * Rational::from(k)));
    match qi_compare(hi, &tail_start.add_rational(&half)) {
        Ordering::Less if qi_compare(hi, &tail_start) == Ordering::Greater => Cut::Split(k),
        Ordering::Less => Cut::Exact(k),
        _ => Cut::Tail(k),
    }
}

fn chop_interval(iv: &Interval, delta: &Rational) -> Vec<ChopPiece> {
    let (lo, hi) = (&iv.lo, &iv.hi);
    let cut = |j: i64| lo.add_rational(&(delta * Rational::from(j)));
    let piece = |a: QuadIrr, b: QuadIrr| ChopPiece { lo: a, hi: b, short: false };
    match plan(iv, delta) {
        Cut::Short => vec![ChopPiece { lo: lo.clone(), hi: hi.clone(), short: true }],
        Cut::Whole => vec![piece(lo.clone(), hi.clone())],
        Cut::Exact(k) => (0..k).map(|j| piece(cut(j), if j + 1 == k { hi.clone() } else { cut(j + 1) })).collect(),
        Cut::Split(k) => {
            let mut out: Vec<ChopPiece> = (0..k - 1).map(|j| piece(cut(j), cut(j + 1))).collect();
            let mid = cut(k - 1).add_rational(&(delta / Rational::from(2)));
            out.push(piece(cut(k - 1), mid.clone()));
            out.push(piece(mid, hi.clone()));
            out
        }
        Cut::Tail(k) => {
            let mut out: Vec<ChopPiece> = (0..k).map(|j| piece(cut(j), cut(j + 1))).collect();
            out.push(piece(cut(k), hi.clone()));
            out
        }
    }
}

/// Piece lengths of a chopped component, in closed form.
#[derive(Clone, Copy, Debug)]
enum Shape {
    /// One piece of the whole length.
    Whole,
    /// `k` pieces of length `δ`.
    Exact(u64),
    /// `k` pieces of `δ` and one remainder `r >= δ/2`.
    Tail(u64, Enclosure),
    /// `k - 1` pieces of `δ`, then `δ/2` and `δ/2 + r`.
    Split(u64, Enclosure),
}

impl Shape {
    fn count(&self) -> u64 {
        match *self {
            Shape::Whole => 1,
            Shape::Exact(k) => k,
            Shape::Tail(k, _) | Shape::Split(k, _) => k + 1,
        }
    }
}

fn shape_exact(iv: &Interval, delta: &Rational) -> Shape {
    let rest = |k: i64| qi_sub_enclose(&iv.hi, &iv.lo.add_rational(&(delta * Rational::from(k)))).clamp_nonneg();
    match plan(iv, delta) {
        Cut::Short | Cut::Whole => Shape::Whole,
        Cut::Exact(k) => Shape::Exact(k as u64),
        Cut::Split(k) => Shape::Split(k as u64, rest(k)),
        Cut::Tail(k) => Shape::Tail(k as u64, rest(k)),
    }
}

/// Certified shape from an enclosed length; `None` when `L/δ` sits too close
/// to a multiple of `1/2` to decide.
fn shape_fast(length: &Enclosure, delta_enc: &Enclosure) -> Option<Shape> {
    let q = *length / *delta_enc;
    let (lo2, hi2) = ((2.0 * q.lo).floor(), (2.0 * q.hi).floor());
    if lo2 != hi2 || 2.0 * q.lo == lo2 {
        return None;
    }
    let k2 = lo2 as u64;
    if k2 <= 1 {
        return Some(Shape::Whole);
    }
    let k = k2 / 2;
    let r = (*length - delta_enc.scale(k as f64)).clamp_nonneg();
    Some(if k2 % 2 == 1 { Shape::Tail(k, r) } else { Shape::Split(k, r) })
}

/// `g`-values at the level constants `δ` and `δ/2`.
struct LevelG {
    g: PreparedDimFn,
    at_delta: Enclosure,
    at_half: Enclosure,
}

impl LevelG {
    fn sum(&self, shape: Shape, length: Enclosure, delta_half: Enclosure) -> Result<Enclosure> {
        Ok(match shape {
            Shape::Whole => self.g.eval_at(length)?,
            Shape::Exact(k) => self.at_delta.scale(k as f64),
            Shape::Tail(k, r) => self.at_delta.scale(k as f64) + self.g.eval_at(r)?,
            Shape::Split(k, r) => {
                self.at_delta.scale((k - 1) as f64) + self.at_half + self.g.eval_at(delta_half + r)?
            }
        })
    }
}

/// How repeated-root intervals are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepeatedMode {
    /// Parameter grid `k = 1`, `2^((n-3)/2) < u < 2^((n+1)/2)`, `-1 < v <= 1 + u`
    /// (restricted to block members), plus realized `k > 1` members.
    #[default]
    Grid,
    /// Only realized `D = 0` block members with nonempty `Δ`.
    Realized,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverOptions {
    pub repeated_mode: RepeatedMode,
    /// Levels above this are sampled by pairs.
    pub exhaustive_max_level: u32,
    /// Approximate number of polynomials processed per sampled level.
    pub sample_budget: u64,
    pub cap_level: u32,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            repeated_mode: RepeatedMode::Grid,
            exhaustive_max_level: 6,
            sample_budget: 1 << 24,
            cap_level: DEFAULT_LEVEL_CAP,
        }
    }
}

/// `(u, v)` for the `k = 1` parameter grid at level `n`.
pub fn repeated_grid(n: u32) -> Vec<(i64, i64)> {
    let block = DyadicBlock::new(n);
    let mut out = Vec::new();
    let mut u = 1i64;
    // u < 2^((n+1)/2)  <=>  u² < 2^(n+1)
    while u * u < block.high() {
        // u > 2^((n-3)/2)  <=>  8u² > 2^n
        if 8 * u * u > block.low() {
            for v in 0..=u + 1 {
                let f = IntegerQuadratic::new(u * u, -2 * u * v, v * v).expect("u > 0");
                if gcd_i64(u, v) == 1 && block.contains(&f) {
                    out.push((u, v));
                }
            }
        }
        u += 1;
    }
    out
}

/// Realized `D = 0` members of block `n` with `Δ(n, F) ≠ ∅`.
pub fn realized_repeated(n: u32, t: &Threshold) -> Vec<IntegerQuadratic> {
    DyadicBlock::new(n).repeated_members().into_iter().filter(|f| t.delta_nonempty(f)).collect()
}

/// `(v/u - √(t/k)/u, v/u + √(t/k)/u) ∩ [0, 1]`.
pub fn repeated_interval(k: i64, u: i64, v: i64, t: &Rational) -> Option<Interval> {
    let rho = QuadIrr::new(Rational::zero(), Rational::new(1, u), t / Rational::from(k));
    let c = Rational::new(v, u);
    Interval::open(rho.neg().add_rational(&c), rho.add_rational(&c)).and_then(Interval::clip_unit)
}

/// Repeated-root intervals of the level cover.
pub fn repeated_cover(n: u32, t: &Threshold, mode: RepeatedMode) -> Vec<Interval> {
    let mut out = Vec::new();
    if mode == RepeatedMode::Grid {
        out.extend(repeated_grid(n).into_iter().filter_map(|(u, v)| repeated_interval(1, u, v, t.value())));
    }
    for f in realized_repeated(n, t) {
        let p = crate::poly::classify(&f).repeated.expect("D = 0");
        if mode == RepeatedMode::Grid && p.k == 1 {
            continue;
        }
        let d = delta_set(&f, t.value());
        out.extend(d.into_intervals());
    }
    out
}

pub fn cover_repeated(n: u32, psi: &PsiSpec, g: &DimFnSpec, mode: RepeatedMode) -> Result<(u64, Enclosure)> {
    let t = Threshold::for_level(psi, n)?;
    let ivs = repeated_cover(n, &t, mode);
    let sums: Vec<Enclosure> = ivs.iter().map(|iv| g.eval_at(iv.length())).collect::<Result<_>>()?;
    Ok((ivs.len() as u64, Enclosure::sum(&sums)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Sampling {
    pub stride: u64,
    pub sampled_pairs: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverLevelReport {
    pub n: u32,
    pub repeated_count: u64,
    pub repeated_gsum: Enclosure,
    pub distinct_pair_count: u64,
    pub chopped_piece_count: u64,
    pub chop_bound: u64,
    pub max_pieces_per_pair: u64,
    pub distinct_gsum: Enclosure,
    pub total_gsum: Enclosure,
    pub exact_fallbacks: u64,
    /// Pairs whose piece count exceeds the bound: `(a2, a1, pieces)`.
    pub violations: Vec<(i64, i64, u64)>,
    /// Present when pairs were sampled; counts and sums are then scaled estimates.
    pub sampling: Option<Sampling>,
}

struct PairCover {
    pieces: u64,
    gsums: Vec<Enclosure>,
    fallback: bool,
}

fn cover_pair(
    a2: i64,
    a1: i64,
    n: u32,
    t: &FastThreshold,
    delta: &Rational,
    delta_enc: Enclosure,
    gs: &[LevelG],
) -> Result<PairCover> {
    let half = delta_enc.scale(0.5);
    let mut sets = pair_sets(a2, a1, n, t);
    let mut shapes = Vec::with_capacity(sets.components.len());
    for c in sets.components.iter_mut() {
        let shape = match shape_of(c, delta, delta_enc) {
            Some(s) => s,
            None => {
                // ambiguous against δ: redo this component exactly
                let Some(iv) = component_exact(a2, a1, t, c) else { break };
                *c = Component { a0: c.a0, ..Component::from_exact(iv) };
                sets.exact_fallback = true;
                shape_of(c, delta, delta_enc).expect("exact shape")
            }
        };
        shapes.push(shape);
    }
    if shapes.len() < sets.components.len() {
        sets = pair_sets_exact(a2, a1, n, t);
        shapes = sets.components.iter().map(|c| shape_of(c, delta, delta_enc).expect("exact shape")).collect();
    }
    let pieces = shapes.iter().map(Shape::count).sum();
    let mut gsums = Vec::with_capacity(gs.len());
    for lg in gs {
        let mut acc = Enclosure::zero();
        for (s, c) in shapes.iter().zip(&sets.components) {
            acc = acc + lg.sum(*s, c.length, half)?;
        }
        gsums.push(acc);
    }
    Ok(PairCover { pieces, gsums, fallback: sets.exact_fallback })
}

fn shape_of(c: &Component, delta: &Rational, delta_enc: Enclosure) -> Option<Shape> {
    shape_fast(&c.length, &delta_enc).or_else(|| c.exact.as_ref().map(|iv| shape_exact(iv, delta)))
}

fn check_level(n: u32, psi: &PsiSpec, opts: &CoverOptions) -> Result<()> {
    if n > opts.cap_level {
        return Err(Error::ResourceCap { level: n, cap: opts.cap_level });
    }
    let n0 = decay_threshold(psi, 2, DECAY_CAP)?;
    if n < n0 {
        return Err(Error::Domain(format!("level {n} is below the decay threshold {n0}")));
    }
    Ok(())
}

/// Level cover for several dimension functions at once (the cover itself does not depend on `g`).
pub fn cover_level(n: u32, psi: &PsiSpec, gs: &[DimFnSpec], opts: &CoverOptions) -> Result<Vec<CoverLevelReport>> {
    check_level(n, psi, opts)?;
    let exact_t = Threshold::for_level(psi, n)?;
    let t = FastThreshold::new(exact_t.clone());
    let delta = chop_scale(t.value(), n);
    let delta_enc = delta.enclose();
    let half_r = &delta / Rational::from(2);
    let level_gs: Vec<LevelG> = gs
        .iter()
        .map(|g| {
            let g = g.prepare();
            Ok(LevelG { at_delta: g.eval_at(delta_enc)?, at_half: g.eval_at(half_r.enclose())?, g })
        })
        .collect::<Result<_>>()?;

    let block = DyadicBlock::new(n);
    let total_pairs = block.pair_count();
    let (pairs, sampling): (Vec<(i64, i64)>, Option<Sampling>) = if n <= opts.exhaustive_max_level {
        (block.pairs().collect(), None)
    } else {
        // about 3·2^n nonempty a0 per pair
        let per_pair = 3u64 << n;
        let wanted = (opts.sample_budget / per_pair).max(1);
        let stride = (total_pairs.div_ceil(wanted)) | 1;
        let picked: Vec<_> = block.pairs().step_by(stride as usize).collect();
        let s = Sampling { stride, sampled_pairs: picked.len() as u64 };
        (picked, Some(s))
    };

    let results: Vec<PairCover> = pairs
        .par_iter()
        .map(|&(a2, a1)| cover_pair(a2, a1, n, &t, &delta, delta_enc, &level_gs))
        .collect::<Result<_>>()?;

    let bound = chop_bound(n);
    let mut pieces = 0u64;
    let mut max_pieces = 0u64;
    let mut fallbacks = 0u64;
    let mut violations = Vec::new();
    let mut sums = vec![Enclosure::zero(); gs.len()];
    for (&(a2, a1), r) in pairs.iter().zip(&results) {
        pieces += r.pieces;
        max_pieces = max_pieces.max(r.pieces);
        fallbacks += r.fallback as u64;
        if r.pieces > bound {
            violations.push((a2, a1, r.pieces));
        }
        for (s, g) in sums.iter_mut().zip(&r.gsums) {
            *s = *s + *g;
        }
    }
    if let Some(s) = &sampling {
        let scale = total_pairs as f64 / s.sampled_pairs as f64;
        pieces = (pieces as f64 * scale).round() as u64;
        for s in sums.iter_mut() {
            *s = s.scale(scale);
        }
    }

    let rep = repeated_cover(n, &exact_t, opts.repeated_mode);
    let rep_lengths: Vec<Enclosure> = rep.iter().map(Interval::length).collect();
    let mut out = Vec::with_capacity(gs.len());
    for (lg, distinct_gsum) in level_gs.iter().zip(sums) {
        let g = &lg.g;
        let rep_vals: Vec<Enclosure> = rep_lengths.iter().map(|l| g.eval_at(*l)).collect::<Result<_>>()?;
        let repeated_gsum = Enclosure::sum(&rep_vals);
        out.push(CoverLevelReport {
            n,
            repeated_count: rep.len() as u64,
            repeated_gsum,
            distinct_pair_count: total_pairs,
            chopped_piece_count: pieces,
            chop_bound: bound,
            max_pieces_per_pair: max_pieces,
            distinct_gsum,
            total_gsum: repeated_gsum + distinct_gsum,
            exact_fallbacks: fallbacks,
            violations: violations.clone(),
            sampling: sampling.clone(),
        });
    }
    Ok(out)
}

pub fn cover_distinct(n: u32, psi: &PsiSpec, g: &DimFnSpec, opts: &CoverOptions) -> Result<(u64, u64, Enclosure)> {
    let r = cover_level(n, psi, std::slice::from_ref(g), opts)?.remove(0);
    Ok((r.distinct_pair_count, r.chopped_piece_count, r.distinct_gsum))
}

#[derive(Clone, Debug, Serialize)]
pub struct TailSumReport {
    pub n_start: u32,
    pub n_end: u32,
    pub tail: Enclosure,
    /// `(N, Σ_{n=N}^{n_end} total_gsum(n))` for each `N` in the range.
    pub trend: Vec<(u32, Enclosure)>,
    pub levels: Vec<CoverLevelReport>,
}

pub fn tail_sum(n_start: u32, n_end: u32, psi: &PsiSpec, g: &DimFnSpec, opts: &CoverOptions) -> Result<TailSumReport> {
    Ok(tail_sums(n_start, n_end, psi, std::slice::from_ref(g), opts)?.remove(0))
}

/// Tail sums for several dimension functions sharing one pass over the levels.
pub fn tail_sums(
    n_start: u32,
    n_end: u32,
    psi: &PsiSpec,
    gs: &[DimFnSpec],
    opts: &CoverOptions,
) -> Result<Vec<TailSumReport>> {
    if n_start > n_end {
        return Err(Error::Invalid(format!("empty level range {n_start}..={n_end}")));
    }
    let mut per_g: Vec<Vec<CoverLevelReport>> = vec![Vec::new(); gs.len()];
    for n in n_start..=n_end {
        for (i, r) in cover_level(n, psi, gs, opts)?.into_iter().enumerate() {
            per_g[i].push(r);
        }
    }
    Ok(per_g.into_iter().map(|levels| tail_report(n_start, n_end, levels)).collect())
}

/// Tail sums `Σ_{n=N}^{n_end}` from per-level reports ordered by `n`.
pub fn tail_report(n_start: u32, n_end: u32, levels: Vec<CoverLevelReport>) -> TailSumReport {
    let mut trend = Vec::with_capacity(levels.len());
    let mut acc = Enclosure::zero();
    for r in levels.iter().rev() {
        acc = acc + r.total_gsum;
        trend.push((r.n, acc));
    }
    trend.reverse();
    TailSumReport { n_start, n_end, tail: acc, trend, levels }
}
