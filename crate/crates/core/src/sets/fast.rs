//! Certified float evaluation of solution sets.
//!
//! Every branch decision (sign of a discriminant, clipping against 0 and 1,
//! overlap of neighbouring components) must be certain from the enclosures;
//! otherwise the caller gets `None` and recomputes with exact endpoints.

use std::cmp::Ordering;

use crate::exact::{Enclosure, Rational};
use crate::poly::{DyadicBlock, IntegerQuadratic};

use super::{delta_parts, pair_union, pair_union_over, Interval, Threshold};

/// Component of a solution set on `[0, 1]` with enclosed endpoints and length.
#[derive(Clone, Debug)]
pub struct Component {
    pub lo: Enclosure,
    pub hi: Enclosure,
    pub length: Enclosure,
    /// Exact endpoints when the component came from the exact path.
    pub exact: Option<Interval>,
    /// Smallest and largest `a0` contributing to the component.
    pub a0: (i64, i64),
}

impl Component {
    pub fn from_exact(iv: Interval) -> Self {
        Component { lo: iv.lo.approx(), hi: iv.hi.approx(), length: iv.length(), exact: Some(iv), a0: (0, 0) }
    }
}

/// Threshold with its float enclosure.
#[derive(Clone, Debug)]
pub struct FastThreshold {
    pub exact: Threshold,
    pub enc: Enclosure,
}

impl FastThreshold {
    pub fn new(exact: Threshold) -> Self {
        let enc = exact.value().enclose();
        FastThreshold { exact, enc }
    }

    pub fn value(&self) -> &Rational {
        self.exact.value()
    }
}

fn sign(e: &Enclosure) -> Option<Ordering> {
    if e.lo > 0.0 {
        Some(Ordering::Greater)
    } else if e.hi < 0.0 {
        Some(Ordering::Less)
    } else if e.lo == 0.0 && e.hi == 0.0 {
        Some(Ordering::Equal)
    } else {
        None
    }
}

fn pt(x: f64) -> Enclosure {
    Enclosure::point(x)
}

/// Float view of the roots of `F ∓ t`.
struct Geometry {
    m: Enclosure,
    /// Roots of `F - t`.
    r: (Enclosure, Enclosure),
    /// Roots of `F + t`; `None` when `D - 4 a2 t < 0` and the parts meet at the vertex.
    s: Option<(Enclosure, Enclosure)>,
    half_plus: Enclosure,
    half_minus: Option<Enclosure>,
    /// `(√D+ - √D-) / (2 a2) = 4t / (√D+ + √D-)`.
    inner: Option<Enclosure>,
}

/// Roots of `a2 x² + a1 x + c` given `√disc`, without cancellation:
/// `q = -(a1 + sign(a1)·√disc) / 2`, roots `q / a2` and `c / q`.
fn stable_roots(a2: f64, a1: f64, c: Enclosure, sq: Enclosure) -> (Enclosure, Enclosure) {
    if a1 >= 0.0 {
        let q = -(pt(a1) + sq).scale(0.5);
        (q / pt(a2), c / q)
    } else {
        let q = (pt(-a1) + sq).scale(0.5);
        (c / q, q / pt(a2))
    }
}

fn geometry(f: &IntegerQuadratic, t: &FastThreshold) -> Option<Geometry> {
    let d = f.discriminant();
    if d.unsigned_abs() >= 1u128 << 53 {
        return None;
    }
    let (a2, a1, a0) = (f.a2() as f64, f.a1() as f64, f.a0() as f64);
    let four_a2_t = pt(4.0 * a2) * t.enc;
    let dp = pt(d as f64) + four_a2_t;
    let dm = pt(d as f64) - four_a2_t;
    if sign(&dp)? != Ordering::Greater {
        return None;
    }
    let two_a2 = pt(2.0 * a2);
    let m = pt(-a1) / two_a2;
    let sp = dp.sqrt();
    let half_plus = sp / two_a2;
    let r = stable_roots(a2, a1, pt(a0) - t.enc, sp);
    match sign(&dm)? {
        Ordering::Greater => {
            let sm = dm.sqrt();
            let s = stable_roots(a2, a1, pt(a0) + t.enc, sm);
            let inner = (pt(4.0) * t.enc) / (sp + sm);
            Some(Geometry { m, r, s: Some(s), half_plus, half_minus: Some(sm / two_a2), inner: Some(inner) })
        }
        Ordering::Less => Some(Geometry { m, r, s: None, half_plus, half_minus: None, inner: None }),
        Ordering::Equal => None,
    }
}

/// Clips the open interval `(lo, hi)` of length `len` to `[0, 1]`.
/// `Some(None)` is a certain empty result, `None` an undecided one.
fn clip(lo: Enclosure, hi: Enclosure, len: Enclosure) -> Option<Option<Component>> {
    let zero = pt(0.0);
    let one = pt(1.0);
    if hi.hi <= 0.0 || lo.lo >= 1.0 {
        return Some(None);
    }
    if hi.lo <= 0.0 || lo.hi >= 1.0 {
        return None;
    }
    let lo_clipped = match sign(&lo)? {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => return None,
    };
    let hi_clipped = match sign(&(hi - one))? {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => return None,
    };
    let c = match (lo_clipped, hi_clipped) {
        (false, false) => Component { lo, hi, length: len, exact: None, a0: (0, 0) },
        (true, false) => Component { lo: zero, hi, length: hi, exact: None, a0: (0, 0) },
        (false, true) => Component { lo, hi: one, length: one - lo, exact: None, a0: (0, 0) },
        (true, true) => Component { lo: zero, hi: one, length: one, exact: None, a0: (0, 0) },
    };
    Some(Some(c))
}

/// `(Δ₁, Δ₂)` components of a distinct-root `F`, or `None` if undecided.
pub fn split_components(f: &IntegerQuadratic, t: &FastThreshold) -> Option<(Option<Component>, Option<Component>)> {
    let g = geometry(f, t)?;
    let (r1, r2) = g.r;
    match (g.s, g.inner) {
        (Some((s1, s2)), Some(inner)) => {
            let left = clip(r1, s1, inner)?;
            let right = clip(s2, r2, inner)?;
            Some((left, right))
        }
        _ => {
            let left = clip(r1, g.m, g.half_plus)?;
            let right = clip(g.m, r2, g.half_plus)?;
            Some((left, right))
        }
    }
}

/// Components of `Δ₁ ∪ Δ₂` for one distinct-root `F`, vertex re-attached when it lies in `Δ`.
fn delta_components(f: &IntegerQuadratic, t: &FastThreshold) -> Option<Vec<Component>> {
    let g = geometry(f, t)?;
    let (r1, r2) = g.r;
    let mut out = Vec::with_capacity(2);
    match (g.s, g.inner) {
        (Some((s1, s2)), Some(inner)) => {
            out.extend(clip(r1, s1, inner)?);
            out.extend(clip(s2, r2, inner)?);
        }
        _ => {
            // both halves plus the vertex form (r1, r2); the vertex itself is excluded from Δ₁, Δ₂
            let left = clip(r1, g.m, g.half_plus)?;
            let right = clip(g.m, r2, g.half_plus)?;
            match (left, right) {
                (Some(l), Some(r)) => {
                    // measure of the union equals the sum; keep them as one component
                    out.push(Component { lo: l.lo, hi: r.hi, length: l.length + r.length, exact: None, a0: (0, 0) });
                }
                (l, r) => out.extend(l.into_iter().chain(r)),
            }
        }
    }
    Some(out)
}

/// Merges components sorted by left end; `None` if an overlap is undecided.
fn merge(mut comps: Vec<Component>) -> Option<Vec<Component>> {
    comps.sort_by(|a, b| a.lo.mid().total_cmp(&b.lo.mid()).then(a.hi.mid().total_cmp(&b.hi.mid())));
    let mut out: Vec<Component> = Vec::with_capacity(comps.len());
    for c in comps {
        if let Some(last) = out.last_mut() {
            if last.hi.hi < c.lo.lo {
                out.push(c);
            } else if last.hi.lo > c.lo.hi {
                last.lo = last.lo.min(&c.lo);
                last.hi = last.hi.max(&c.hi);
                last.length = (last.hi - last.lo).clamp_nonneg();
                last.exact = None;
                last.a0 = (last.a0.0.min(c.a0.0), last.a0.1.max(c.a0.1));
            } else {
                return None;
            }
            continue;
        }
        out.push(c);
    }
    Some(out)
}

/// Merged components of the union of `Δ(a2 x² + a1 x + a0)` over `a0`.
#[derive(Clone, Debug)]
pub struct PairSets {
    pub components: Vec<Component>,
    pub measure: Enclosure,
    /// The exact path was needed for this pair.
    pub exact_fallback: bool,
}

pub fn pair_sets(a2: i64, a1: i64, n: u32, t: &FastThreshold) -> PairSets {
    pair_sets_fast(a2, a1, n, t).unwrap_or_else(|| pair_sets_exact(a2, a1, n, t))
}

pub fn pair_sets_exact(a2: i64, a1: i64, n: u32, t: &FastThreshold) -> PairSets {
    let union = pair_union(a2, a1, n, &t.exact);
    let measure = union.measure();
    let components = union.into_intervals().into_iter().map(Component::from_exact).collect();
    PairSets { components, measure, exact_fallback: true }
}

/// Exact endpoints of one fast component, recomputed from its contributing `a0` only.
pub fn component_exact(a2: i64, a1: i64, t: &FastThreshold, c: &Component) -> Option<Interval> {
    let union = pair_union_over(a2, a1, c.a0.0..c.a0.1 + 1, &t.exact);
    let mut hits = union.into_intervals().into_iter().filter(|iv| {
        let (lo, hi) = (iv.lo.approx(), iv.hi.approx());
        lo.lo <= c.hi.hi && hi.hi >= c.lo.lo
    });
    let iv = hits.next()?;
    hits.next().is_none().then_some(iv)
}

fn pair_sets_fast(a2: i64, a1: i64, n: u32, t: &FastThreshold) -> Option<PairSets> {
    let mut comps = Vec::new();
    let mut exact = false;
    for a0 in nonempty_a0(a2, a1, n, &t.exact) {
        let f = IntegerQuadratic::new(a2, a1, a0).expect("a2 > 0");
        if f.discriminant() <= 0 {
            continue;
        }
        match delta_components(&f, t) {
            Some(cs) => comps.extend(cs.into_iter().map(|c| Component { a0: (a0, a0), ..c })),
            None => {
                // an endpoint within rounding of 0 or 1: this polynomial alone goes exact
                exact = true;
                let u = pair_union_over(a2, a1, a0..a0 + 1, &t.exact);
                comps.extend(u.into_intervals().into_iter().map(|iv| Component { a0: (a0, a0), ..Component::from_exact(iv) }));
            }
        }
    }
    let components = merge(comps)?;
    let measure = Enclosure::sum(components.iter().map(|c| &c.length));
    Some(PairSets { components, measure, exact_fallback: exact })
}

/// The `a0` of block `n` for which `Δ(F, t)` is nonempty, as a contiguous range.
///
/// `|F| < t` somewhere on `[0, 1]` iff `a0` lies strictly between
/// `-t - max P` and `t - min P` with `P = a2 x² + a1 x`; the endpoints are
/// re-checked with the exact predicate.
pub fn nonempty_a0(a2: i64, a1: i64, n: u32, t: &Threshold) -> std::ops::Range<i64> {
    let block = DyadicBlock::new(n);
    let bound = block.a0_bound();
    let p_max = 0i64.max(a2 + a1);
    // min of P on [0, 1] is at 0, 1 or the vertex; floor of the vertex value is enough here
    let mut p_min = 0i64.min(a2 + a1);
    if -a1 > 0 && -a1 < 2 * a2 {
        p_min = p_min.min((-(a1 as i128 * a1 as i128)).div_euclid(4 * a2 as i128) as i64);
    }
    let t_ceil = t.value().ceil();
    let t_ceil: i64 = num_traits::ToPrimitive::to_i64(&t_ceil).unwrap_or(i64::MAX / 4).min(1 << 40);
    let lo = (-t_ceil - p_max).max(-(bound - 1));
    let hi = (t_ceil - p_min + 1).min(bound);
    let ok = |a0: i64| t.delta_nonempty(&IntegerQuadratic::new(a2, a1, a0).expect("a2 > 0"));
    let mut lo = lo;
    while lo < hi && !ok(lo) {
        lo += 1;
    }
    let mut hi = hi;
    while hi > lo && !ok(hi - 1) {
        hi -= 1;
    }
    lo..hi
}

/// `σ₂ ⊆ Δ₁` and `σ₁ ⊆ σ₂` before clipping, certified in floats.
/// `false` means undecided, not violated.
pub fn inclusion_certain(f: &IntegerQuadratic, n: u32, t: &FastThreshold) -> bool {
    let d = f.discriminant();
    if d <= 0 || d > 100 * (1i128 << (2 * n)) {
        return false;
    }
    let Some(g) = geometry(f, t) else { return false };
    let sd = pt(d as f64).sqrt();
    let rho2 = t.enc / (pt(2.0) * sd);
    // α₁ - r₁ = (√D+ - √D) / (2 a2) = 2t / (√D+ + √D)
    let below = (pt(2.0) * t.enc) / (g.half_plus * pt(2.0 * f.a2() as f64) + sd);
    let above = match g.half_minus {
        // s₁ - α₁ = (√D - √D-) / (2 a2) = 2t / (√D + √D-)
        Some(hm) => (pt(2.0) * t.enc) / (sd + hm * pt(2.0 * f.a2() as f64)),
        // s₁ is the vertex: m - α₁ = √D / (2 a2)
        None => sd / pt(2.0 * f.a2() as f64),
    };
    (below - rho2).lo > 0.0 && (above - rho2).lo > 0.0
}

/// Exact cross-check of [`delta_components`] for one polynomial.
pub fn exact_components(f: &IntegerQuadratic, t: &Rational) -> Vec<Component> {
    let parts = delta_parts(f, t);
    let mut all = parts.left.into_intervals();
    all.extend(parts.right.into_intervals());
    if parts.vertex_in {
        all.push(Interval::point(crate::exact::QuadIrr::rational(f.vertex())));
    }
    super::IntervalUnion::from_intervals(all).into_intervals().into_iter().map(Component::from_exact).collect()
}
