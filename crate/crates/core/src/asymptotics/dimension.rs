//! Box-counting estimate of the dimension of the level covers for `ψ(q) = q^-τ`.
//!
//! At level `n` the boxes have side `δ(n)` (the chopping scale). Repeated-root
//! intervals are few and long, so their boxes are counted exactly. The distinct-root
//! sets are counted inside `S` evenly spread stripes of width `2^-W`, where only the
//! boxes not already covered by a repeated interval are added; the stripe total is
//! scaled by `1 / (S·2^-W)`.
//!
//! Inside a stripe starting at the dyadic point `x0` every polynomial is shifted to
//! `G(y) = F(x0 + y)`, whose coefficients are exact, so root positions are known to
//! `2^-53·2^-W` absolute and box indices relative to the stripe stay exact in f64.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{chop_scale, repeated_cover, RepeatedMode};
use crate::error::{Error, Result};
use crate::exact::{qi_sub_enclose, QuadIrr, Rational};
use crate::poly::{DyadicBlock, DEFAULT_LEVEL_CAP};
use crate::scale::{decay_threshold, PsiSpec, DECAY_CAP};
use crate::sets::{Interval, Threshold};

use super::series::ls_slope;

#[derive(Clone, Debug, Serialize)]
pub struct DimensionOptions {
    pub stripes: u32,
    /// Lower bound on the stripe width exponent `W`.
    pub min_width_exp: u32,
    pub repeated_mode: RepeatedMode,
    pub cap_level: u32,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        DimensionOptions { stripes: 16, min_width_exp: 4, repeated_mode: RepeatedMode::Grid, cap_level: DEFAULT_LEVEL_CAP }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxCount {
    pub n: u32,
    pub count: u64,
    pub box_size: f64,
    pub box_size_exact: Rational,
    /// Boxes meeting a repeated-root interval, counted exactly.
    pub repeated_boxes: u64,
    /// Estimated boxes meeting only distinct-root sets.
    pub distinct_boxes: f64,
    pub width_exp: u32,
    pub sampled_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub tau: Rational,
    pub levels: Vec<u32>,
    pub box_counts: Vec<BoxCount>,
    /// Least-squares slope of `ln count` against `-ln δ`.
    pub slope_estimate: Option<f64>,
    pub target: Rational,
    pub warnings: Vec<String>,
}

/// Number of integers in the union of closed integer ranges.
fn union_size<T>(mut ranges: Vec<(T, T)>) -> u64
where
    T: Ord + Copy + std::ops::Sub<Output = T> + Into<i128>,
{
    ranges.sort_unstable();
    let mut total: i128 = 0;
    let mut cur: Option<(T, T)> = None;
    for (lo, hi) in ranges {
        match cur {
            Some((clo, chi)) if lo.into() <= chi.into() + 1 => cur = Some((clo, chi.max(hi))),
            _ => {
                if let Some((clo, chi)) = cur {
                    total += chi.into() - clo.into() + 1;
                }
                cur = Some((lo, hi));
            }
        }
    }
    if let Some((clo, chi)) = cur {
        total += chi.into() - clo.into() + 1;
    }
    total as u64
}

fn to_i128(b: BigInt) -> i128 {
    b.to_i128().expect("box index fits in i128")
}

/// Boxes `[kδ, (k+1)δ)` meeting the open interval, as an index range.
fn exact_box_range(iv: &Interval, inv_delta: &Rational) -> Option<(i128, i128)> {
    let lo = to_i128(iv.lo.scale(inv_delta).floor());
    let hi = -to_i128(iv.hi.neg().scale(inv_delta).floor()) - 1;
    (hi >= lo).then_some((lo, hi))
}

/// Exact number of boxes meeting the repeated-root intervals.
pub fn repeated_box_count(intervals: &[Interval], delta: &Rational) -> u64 {
    let inv = delta.recip();
    union_size(intervals.iter().filter_map(|iv| exact_box_range(iv, &inv)).collect())
}

/// Roots of `a y² + b y + c` (`disc = b² - 4ac > 0` given separately), ascending.
fn stable_roots(a: f64, b: f64, c: f64, disc: f64) -> (f64, f64) {
    let sq = disc.sqrt();
    let q = if b >= 0.0 { -0.5 * (b + sq) } else { 0.5 * (sq - b) };
    let (x1, x2) = (q / a, c / q);
    if x1 <= x2 { (x1, x2) } else { (x2, x1) }
}

struct Stripe {
    /// `x0 = j / 2^k`.
    j: i128,
    k: u32,
    width: f64,
    /// `frac(x0 / δ)`.
    phase: f64,
}

struct LevelGeometry {
    n: u32,
    t: f64,
    inv_delta: f64,
}

impl LevelGeometry {
    fn push_range(&self, s: &Stripe, lo: f64, hi: f64, out: &mut Vec<(i64, i64)>) {
        let (lo, hi) = (lo.max(0.0), hi.min(s.width));
        if lo >= hi {
            return;
        }
        let klo = (lo * self.inv_delta + s.phase).floor() as i64;
        let khi = (hi * self.inv_delta + s.phase).ceil() as i64 - 1;
        if khi >= klo {
            out.push((klo, khi));
        }
    }

    /// Box ranges of the distinct-root sets of block `n` inside the stripe.
    fn distinct_ranges(&self, s: &Stripe) -> Vec<(i64, i64)> {
        let block = DyadicBlock::new(self.n);
        let (low, high, bound) = (block.low(), block.high(), block.a0_bound());
        let scale_k = (s.k as f64).exp2();
        let x0 = s.j as f64 / scale_k;
        let x1 = x0 + s.width;
        let t = self.t;
        let pad = 1e-9 * (high as f64);
        let inv_k = (-(s.k as f64)).exp2();
        let inv_2k = inv_k * inv_k;
        let mut out = Vec::new();
        for a2 in 1..high {
            let af = a2 as f64;
            for a1 in -(high - 1)..high {
                if a2 < low && a1.abs() < low {
                    continue;
                }
                let p = |x: f64| (af * x + a1 as f64) * x;
                let (p0, p1) = (p(x0), p(x1));
                let (mut pmin, pmax) = (p0.min(p1), p0.max(p1));
                let xv = -(a1 as f64) / (2.0 * af);
                if xv > x0 && xv < x1 {
                    pmin = pmin.min(p(xv));
                }
                let a0_lo = ((-t - pmax - pad).ceil() as i64).max(-bound + 1);
                let a0_hi = ((t - pmin + pad).floor() as i64).min(bound - 1);
                for a0 in a0_lo..=a0_hi {
                    let d = a1 * a1 - 4 * a2 * a0;
                    if d <= 0 {
                        continue;
                    }
                    let num = a2 as i128 * s.j * s.j + ((a1 as i128 * s.j) << s.k) + ((a0 as i128) << (2 * s.k));
                    let c0 = num as f64 * inv_2k;
                    let b1 = ((2 * a2 as i128 * s.j) + ((a1 as i128) << s.k)) as f64 * inv_k;
                    let df = d as f64;
                    let (r1, r2) = stable_roots(af, b1, c0 - t, df + 4.0 * af * t);
                    let dm = df - 4.0 * af * t;
                    if dm > 0.0 {
                        let (s1, s2) = stable_roots(af, b1, c0 + t, dm);
                        self.push_range(s, r1, s1, &mut out);
                        self.push_range(s, s2, r2, &mut out);
                    } else {
                        self.push_range(s, r1, r2, &mut out);
                    }
                }
            }
        }
        out
    }

    fn repeated_ranges(&self, s: &Stripe, rep: &[Interval]) -> Vec<(i64, i64)> {
        let x0 = QuadIrr::rational(Rational::new(BigInt::from(s.j), BigInt::from(1) << s.k));
        let x0f = x0.approx();
        let mut out = Vec::new();
        for iv in rep {
            let (lo, hi) = (iv.lo.approx(), iv.hi.approx());
            if hi.hi < x0f.lo || lo.lo > x0f.hi + s.width {
                continue;
            }
            let ylo = qi_sub_enclose(&iv.lo, &x0).mid();
            let yhi = qi_sub_enclose(&iv.hi, &x0).mid();
            self.push_range(s, ylo, yhi, &mut out);
        }
        out
    }
}

/// Stripe width exponent: about `2^20` polynomials per stripe, and root positions
/// (absolute error `2^-53·2^-W`) well below `δ`.
fn width_exp(n: u32, log2_inv_delta: f64, opts: &DimensionOptions) -> u32 {
    let by_work = (3 * n as i64 - 14).max(0) as u32;
    let by_precision = (log2_inv_delta - 43.0).ceil().max(0.0) as u32;
    opts.min_width_exp.max(by_work).max(by_precision).max(opts.stripes.next_power_of_two().trailing_zeros())
}

/// Box count of the level-`n` cover at scale `δ(n)`.
pub fn box_count(psi: &PsiSpec, n: u32, opts: &DimensionOptions) -> Result<BoxCount> {
    if n > opts.cap_level {
        return Err(Error::ResourceCap { level: n, cap: opts.cap_level });
    }
    if opts.stripes == 0 {
        return Err(Error::Invalid("at least one stripe is needed".into()));
    }
    let th = Threshold::for_level(psi, n)?;
    let delta = chop_scale(th.value(), n);
    let log2_inv_delta = -delta.to_f64().log2();
    let w_exp = width_exp(n, log2_inv_delta, opts);
    let k = w_exp + 4;
    if 2 * k + n + 4 > 120 {
        return Err(Error::Invalid(format!("stripe resolution 2^-{k} too fine at level {n}")));
    }
    let rep = repeated_cover(n, &th, opts.repeated_mode);
    let repeated_boxes = repeated_box_count(&rep, &delta);

    let geo = LevelGeometry { n, t: th.value().to_f64(), inv_delta: delta.recip().to_f64() };
    let s_count = opts.stripes as i128;
    let grid = 1i128 << k;
    let w_units = 1i128 << (k - w_exp);
    let stripes: Vec<Stripe> = (0..s_count)
        .map(|i| {
            // centred in the i-th of S equal slots
            let j = (i * grid + (grid - s_count * w_units) / 2) / s_count;
            let x0 = Rational::new(BigInt::from(j), BigInt::from(1) << k);
            let ratio = &x0 / &delta;
            let phase = (&ratio - &Rational::from_integer(ratio.floor())).to_f64();
            Stripe { j, k, width: (-(w_exp as f64)).exp2(), phase }
        })
        .collect();
    let extra: Vec<u64> = stripes
        .par_iter()
        .map(|s| {
            let reps = geo.repeated_ranges(s, &rep);
            let mut all = geo.distinct_ranges(s);
            let rep_only = union_size(reps.clone());
            all.extend(reps);
            union_size(all) - rep_only
        })
        .collect();
    let fraction = (opts.stripes as f64 * (-(w_exp as f64)).exp2()).min(1.0);
    let distinct_boxes = extra.iter().sum::<u64>() as f64 / fraction;
    Ok(BoxCount {
        n,
        count: repeated_boxes + distinct_boxes.round() as u64,
        box_size: delta.to_f64(),
        box_size_exact: delta,
        repeated_boxes,
        distinct_boxes,
        width_exp: w_exp,
        sampled_fraction: fraction,
    })
}

pub fn estimate_dimension(tau: &Rational, n_min: u32, n_max: u32, opts: &DimensionOptions) -> Result<DimensionReport> {
    if *tau <= Rational::from(2) {
        return Err(Error::Domain(format!("dimension estimate needs tau > 2, got {tau}")));
    }
    if n_min > n_max {
        return Err(Error::Invalid(format!("empty level range {n_min}..={n_max}")));
    }
    let psi = PsiSpec::power(tau.clone())?;
    let n0 = decay_threshold(&psi, 2, DECAY_CAP)?;
    if n_min < n0 {
        return Err(Error::Domain(format!("level {n_min} is below the decay threshold {n0}")));
    }
    let mut box_counts = Vec::new();
    for n in n_min..=n_max {
        box_counts.push(box_count(&psi, n, opts)?);
    }
    let pts: Vec<(f64, f64)> =
        box_counts.iter().filter(|b| b.count > 0).map(|b| (-b.box_size.ln(), (b.count as f64).ln())).collect();
    let mut warnings = Vec::new();
    if box_counts.len() < 3 {
        warnings.push(format!("only {} level(s); the slope is unreliable", box_counts.len()));
    }
    Ok(DimensionReport {
        tau: tau.clone(),
        levels: (n_min..=n_max).collect(),
        box_counts,
        slope_estimate: ls_slope(&pts),
        target: Rational::from(3) / (tau + &Rational::one()),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::pair_union;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Global exact box count: every pair union and repeated interval with exact floors.
    fn exact_count(psi: &PsiSpec, n: u32) -> u64 {
        let th = Threshold::for_level(psi, n).unwrap();
        let delta = chop_scale(th.value(), n);
        let inv = delta.recip();
        let mut ranges = Vec::new();
        for (a2, a1) in DyadicBlock::new(n).pairs() {
            for iv in pair_union(a2, a1, n, &th).intervals() {
                ranges.extend(exact_box_range(iv, &inv));
            }
        }
        for iv in repeated_cover(n, &th, RepeatedMode::Grid) {
            ranges.extend(exact_box_range(&iv, &inv));
        }
        union_size(ranges)
    }

    #[test]
    fn union_size_examples() {
        assert_eq!(union_size::<i64>(vec![]), 0);
        assert_eq!(union_size(vec![(0i64, 3), (2, 5), (7, 7), (6, 6)]), 8);
        assert_eq!(union_size(vec![(-3i128, -1), (10, 12)]), 6);
    }

    #[test]
    fn full_tiling_matches_exact_count() {
        // W = 4 with 16 stripes tiles [0, 1], so the estimate is a full count
        let psi = PsiSpec::power(r(4, 1)).unwrap();
        for n in [2u32, 3, 4] {
            let b = box_count(&psi, n, &DimensionOptions::default()).unwrap();
            assert_eq!(b.sampled_fraction, 1.0);
            let want = exact_count(&psi, n);
            assert_eq!(b.count, want, "n={n}");
        }
    }

    #[test]
    fn repeated_boxes_match_float_count() {
        // radius 2^-2n/u at τ = 4: boxes per interval ≈ 2ρ/δ, endpoints far from 0 and 1
        let psi = PsiSpec::power(r(4, 1)).unwrap();
        let n = 5;
        let th = Threshold::for_level(&psi, n).unwrap();
        let delta = chop_scale(th.value(), n);
        let rep = repeated_cover(n, &th, RepeatedMode::Grid);
        let d = delta.to_f64();
        let mut ranges = Vec::new();
        for iv in &rep {
            let (lo, hi) = (iv.lo.approx().mid(), iv.hi.approx().mid());
            ranges.push(((lo / d).floor() as i64, (hi / d).ceil() as i64 - 1));
        }
        assert_eq!(repeated_box_count(&rep, &delta), union_size(ranges));
    }

    #[test]
    fn sampled_level_close_to_full() {
        let psi = PsiSpec::power(r(4, 1)).unwrap();
        let full = box_count(&psi, 6, &DimensionOptions::default()).unwrap();
        assert_eq!(full.sampled_fraction, 1.0);
        let opts = DimensionOptions { min_width_exp: 7, ..DimensionOptions::default() };
        let part = box_count(&psi, 6, &opts).unwrap();
        assert_eq!(part.sampled_fraction, 1.0 / 8.0);
        assert_eq!(part.repeated_boxes, full.repeated_boxes);
        let rel = (part.distinct_boxes / full.distinct_boxes - 1.0).abs();
        assert!(rel < 0.05, "relative deviation {rel}");
    }

    #[test]
    fn single_level_warns() {
        let rep = estimate_dimension(&r(4, 1), 3, 3, &DimensionOptions::default()).unwrap();
        assert!(rep.slope_estimate.is_none());
        assert_eq!(rep.warnings.len(), 1);
        assert_eq!(rep.target, r(3, 5));
        let rep = estimate_dimension(&r(4, 1), 3, 4, &DimensionOptions::default()).unwrap();
        assert!(rep.slope_estimate.is_some() && !rep.warnings.is_empty());
        assert!(estimate_dimension(&r(2, 1), 3, 4, &DimensionOptions::default()).is_err());
    }

    #[test]
    fn slope_decreases_with_tau() {
        let slope = |tau: Rational| estimate_dimension(&tau, 4, 7, &DimensionOptions::default()).unwrap().slope_estimate.unwrap();
        let (s3, s4, s6) = (slope(r(3, 1)), slope(r(4, 1)), slope(r(6, 1)));
        assert!(s3 >= s4 && s4 >= s6, "{s3} {s4} {s6}");
        let near = slope(r(21, 10));
        assert!(near > s3, "{near} vs {s3}");
    }
}
