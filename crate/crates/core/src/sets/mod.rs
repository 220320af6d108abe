//! Solution sets `Δ(F, t) = {x ∈ [0,1] : |F(x)| < t}` with exact endpoints,
//! their left/right split, the σ neighbourhoods of the left root and the
//! per-pair union bound.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{qi_compare, qi_sub_enclose, Enclosure, QuadIrr, Rational};
use crate::poly::{classify, DyadicBlock, IntegerQuadratic, RootKind};
use crate::scale::PsiSpec;

pub mod census;
pub mod fast;

/// Interval with exact endpoints and per-end openness. Never empty.
#[derive(Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: QuadIrr,
    pub hi: QuadIrr,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    /// `None` when the described set is empty.
    pub fn new(lo: QuadIrr, hi: QuadIrr, lo_open: bool, hi_open: bool) -> Option<Self> {
        match qi_compare(&lo, &hi) {
            Ordering::Less => Some(Interval { lo, hi, lo_open, hi_open }),
            Ordering::Equal if !lo_open && !hi_open => Some(Interval { lo, hi, lo_open, hi_open }),
            _ => None,
        }
    }

    pub fn open(lo: QuadIrr, hi: QuadIrr) -> Option<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn closed(lo: QuadIrr, hi: QuadIrr) -> Option<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn point(x: QuadIrr) -> Self {
        Interval { lo: x.clone(), hi: x, lo_open: false, hi_open: false }
    }

    pub fn contains(&self, x: &QuadIrr) -> bool {
        let above = match qi_compare(&self.lo, x) {
            Ordering::Less => true,
            Ordering::Equal => !self.lo_open,
            Ordering::Greater => false,
        };
        above
            && match qi_compare(x, &self.hi) {
                Ordering::Less => true,
                Ordering::Equal => !self.hi_open,
                Ordering::Greater => false,
            }
    }

    /// `self ⊆ other`.
    pub fn within(&self, other: &Interval) -> bool {
        let lo_ok = match qi_compare(&other.lo, &self.lo) {
            Ordering::Less => true,
            Ordering::Equal => !other.lo_open || self.lo_open,
            Ordering::Greater => false,
        };
        lo_ok
            && match qi_compare(&self.hi, &other.hi) {
                Ordering::Less => true,
                Ordering::Equal => !other.hi_open || self.hi_open,
                Ordering::Greater => false,
            }
    }

    /// Intersection with `[0, 1]`.
    pub fn clip_unit(self) -> Option<Interval> {
        let zero = QuadIrr::from_int(0);
        let one = QuadIrr::from_int(1);
        let (lo, lo_open) = if qi_compare(&self.lo, &zero) == Ordering::Less {
            (zero, false)
        } else {
            (self.lo, self.lo_open)
        };
        let (hi, hi_open) = if qi_compare(&self.hi, &one) == Ordering::Greater {
            (one, false)
        } else {
            (self.hi, self.hi_open)
        };
        Interval::new(lo, hi, lo_open, hi_open)
    }

    pub fn length(&self) -> Enclosure {
        qi_sub_enclose(&self.hi, &self.lo).clamp_nonneg()
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_open { '(' } else { '[' };
        let r = if self.hi_open { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Interval", 5)?;
        s.serialize_field("lo", &self.lo)?;
        s.serialize_field("hi", &self.hi)?;
        s.serialize_field("lo_open", &self.lo_open)?;
        s.serialize_field("hi_open", &self.hi_open)?;
        s.serialize_field("length", &self.length())?;
        s.end()
    }
}

fn lo_order(a: &Interval, b: &Interval) -> Ordering {
    qi_compare(&a.lo, &b.lo).then(a.lo_open.cmp(&b.lo_open))
}

/// Sorted, pairwise disjoint and non-touching intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    pub fn from_intervals(mut items: Vec<Interval>) -> Self {
        items.sort_by(lo_order);
        let mut out: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            if let Some(last) = out.last_mut() {
                let joins = match qi_compare(&iv.lo, &last.hi) {
                    Ordering::Less => true,
                    Ordering::Equal => !(last.hi_open && iv.lo_open),
                    Ordering::Greater => false,
                };
                if joins {
                    match qi_compare(&iv.hi, &last.hi) {
                        Ordering::Greater => {
                            last.hi = iv.hi;
                            last.hi_open = iv.hi_open;
                        }
                        Ordering::Equal => last.hi_open &= iv.hi_open,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalUnion { intervals: out }
    }

    pub fn single(iv: Option<Interval>) -> Self {
        IntervalUnion { intervals: iv.into_iter().collect() }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn into_intervals(self) -> Vec<Interval> {
        self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        IntervalUnion::from_intervals(all)
    }

    pub fn clip_unit(self) -> IntervalUnion {
        IntervalUnion::from_intervals(self.intervals.into_iter().filter_map(Interval::clip_unit).collect())
    }

    pub fn contains(&self, x: &QuadIrr) -> bool {
        // components are sorted and disjoint: only the first one ending at or after x can hold it
        let i = self.intervals.partition_point(|iv| qi_compare(&iv.hi, x) == Ordering::Less);
        self.intervals.get(i).is_some_and(|iv| iv.contains(x))
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.contains(&QuadIrr::rational(x.clone()))
    }

    /// Exact containment; each component must sit inside one component of `other`.
    pub fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        self.intervals.iter().all(|iv| other.intervals.iter().any(|o| iv.within(o)))
    }

    pub fn measure(&self) -> Enclosure {
        Enclosure::sum(self.intervals.iter().map(|iv| iv.length()).collect::<Vec<_>>().iter())
    }
}

/// Threshold `t > 0` with a small-integer form for fast exact comparisons.
#[derive(Clone, Debug)]
pub struct Threshold {
    value: Rational,
    small: Option<(i128, i128)>,
}

impl Threshold {
    pub fn new(value: Rational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::Domain(format!("threshold must be positive, got {value}")));
        }
        let small = match (value.numer().to_i128(), value.denom().to_i128()) {
            (Some(n), Some(d)) if n < 1 << 62 && d < 1 << 62 => Some((n, d)),
            _ => None,
        };
        Ok(Threshold { value, small })
    }

    pub fn for_level(psi: &PsiSpec, n: u32) -> Result<Self> {
        Self::new(psi.level_threshold(n)?)
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    /// `value > num / den` for `den > 0`.
    fn gt_ratio(&self, num: i128, den: i128) -> bool {
        if let Some((tn, td)) = self.small {
            if let (Some(l), Some(r)) = (tn.checked_mul(den), num.checked_mul(td)) {
                return l > r;
            }
        }
        self.value > Rational::new(BigInt::from(num), BigInt::from(den))
    }

    /// `Δ(F, t) ≠ ∅`, decided exactly from the range of `F` on `[0, 1]`:
    /// `inf F < t` and `sup F > -t`.
    pub fn delta_nonempty(&self, f: &IntegerQuadratic) -> bool {
        let (a2, a1, a0) = (f.a2() as i128, f.a1() as i128, f.a0() as i128);
        let (e0, e1) = (a0, a2 + a1 + a0);
        if !self.gt_ratio(-e0.max(e1), 1) {
            return false;
        }
        if -a1 >= 0 && -a1 <= 2 * a2 {
            // vertex value -D/(4 a2)
            self.gt_ratio(4 * a2 * a0 - a1 * a1, 4 * a2)
        } else {
            self.gt_ratio(e0.min(e1), 1)
        }
    }
}

/// `Δ(F, t)` split at the vertex, together with whether the vertex itself lies in `Δ`.
#[derive(Clone, Debug)]
pub struct DeltaParts {
    pub left: IntervalUnion,
    pub right: IntervalUnion,
    pub vertex_in: bool,
}

/// Exact pieces of `{|F| < t}`: `(r1, s1)` and `(s2, r2)` where `r` are the
/// roots of `F - t` and `s` those of `F + t`; when `F + t` has no two real
/// roots the pieces meet at the vertex.
pub fn delta_parts(f: &IntegerQuadratic, t: &Rational) -> DeltaParts {
    let empty = DeltaParts { left: IntervalUnion::empty(), right: IntervalUnion::empty(), vertex_in: false };
    let a2 = Rational::from(f.a2());
    let d = Rational::from_integer(f.discriminant());
    let four_a2_t = Rational::from(4) * &a2 * t;
    let d_plus = &d + &four_a2_t;
    if !d_plus.is_positive() {
        return empty;
    }
    let d_minus = &d - &four_a2_t;
    let m = f.vertex();
    let h = Rational::new(1, 2 * f.a2());
    let r1 = QuadIrr::new(m.clone(), -&h, d_plus.clone());
    let r2 = QuadIrr::new(m.clone(), h.clone(), d_plus);
    let (s1, s2) = if d_minus.is_positive() {
        (QuadIrr::new(m.clone(), -&h, d_minus.clone()), QuadIrr::new(m.clone(), h, d_minus.clone()))
    } else {
        let mq = QuadIrr::rational(m.clone());
        (mq.clone(), mq)
    };
    let left = IntervalUnion::single(Interval::open(r1, s1).and_then(Interval::clip_unit));
    let right = IntervalUnion::single(Interval::open(s2, r2).and_then(Interval::clip_unit));
    let in_unit = !m.is_negative() && m <= Rational::one();
    DeltaParts { left, right, vertex_in: d_minus.is_negative() && in_unit }
}

pub fn delta_set(f: &IntegerQuadratic, t: &Rational) -> IntervalUnion {
    let parts = delta_parts(f, t);
    let mut all = parts.left.into_intervals();
    all.extend(parts.right.into_intervals());
    if parts.vertex_in {
        all.push(Interval::point(QuadIrr::rational(f.vertex())));
    }
    IntervalUnion::from_intervals(all)
}

fn require_distinct(f: &IntegerQuadratic) -> Result<()> {
    let kind = classify(f).kind;
    if kind != RootKind::DistinctReal {
        return Err(Error::Invalid(format!("{f:?} has {} roots, distinct real roots required", kind.as_str())));
    }
    Ok(())
}

/// `(Δ₁, Δ₂)`: the parts of `Δ` left and right of the vertex, vertex excluded.
pub fn split_delta(f: &IntegerQuadratic, t: &Rational) -> Result<(IntervalUnion, IntervalUnion)> {
    require_distinct(f)?;
    let parts = delta_parts(f, t);
    Ok((parts.left, parts.right))
}

/// `Δ₁ ⊆ (α₁ - w, α₁ + w)` and `Δ₂ ⊆ (α₂ - w, α₂ + w)` with `w = 2t/√D`.
pub fn width_bound_check(f: &IntegerQuadratic, t: &Rational) -> Result<bool> {
    let (left, right) = split_delta(f, t)?;
    let d = Rational::from_integer(f.discriminant());
    // 2t/√D = (2t/D)·√D
    let w = QuadIrr::new(Rational::zero(), Rational::from(2) * t / &d, d);
    let roots = classify(f).roots.expect("distinct roots");
    let around = |alpha: &QuadIrr| {
        let lo = alpha.checked_sub(&w).expect("same field");
        let hi = alpha.checked_add(&w).expect("same field");
        IntervalUnion::single(Interval::open(lo, hi))
    };
    Ok(left.is_subset_of(&around(&roots.0)) && right.is_subset_of(&around(&roots.1)))
}

/// Radius of `σ₁`: `ψ(2ⁿ) / (20·2ⁿ)`.
pub fn sigma1_radius(t: &Rational, n: u32) -> Rational {
    t / Rational::from(20i64 << n)
}

/// Radius of `σ₂` as an element of `Q(√D)`: `t / (2√D) = (t/(2D))·√D`.
pub fn sigma2_radius(t: &Rational, d: i128) -> QuadIrr {
    let d = Rational::from_integer(d);
    QuadIrr::new(Rational::zero(), t / (Rational::from(2) * &d), d)
}

/// Closed neighbourhoods `σ₁`, `σ₂` of the left root, clipped to `[0, 1]`.
pub fn sigma_sets(f: &IntegerQuadratic, n: u32, psi: &PsiSpec) -> Result<(IntervalUnion, IntervalUnion)> {
    let t = psi.level_threshold(n)?;
    sigma_sets_at(f, n, &t)
}

pub fn sigma_sets_at(f: &IntegerQuadratic, n: u32, t: &Rational) -> Result<(IntervalUnion, IntervalUnion)> {
    require_distinct(f)?;
    let alpha1 = classify(f).roots.expect("distinct roots").0;
    let rho1 = sigma1_radius(t, n);
    let s1 = Interval::closed(alpha1.sub_rational(&rho1), alpha1.add_rational(&rho1)).and_then(Interval::clip_unit);
    let rho2 = sigma2_radius(t, f.discriminant());
    let s2 = Interval::closed(
        alpha1.checked_sub(&rho2).expect("same field"),
        alpha1.checked_add(&rho2).expect("same field"),
    )
    .and_then(Interval::clip_unit);
    Ok((IntervalUnion::single(s1), IntervalUnion::single(s2)))
}

/// `σ₁ ⊆ σ₂ ⊆ Δ₁` as exact set containments.
pub fn inclusion_check(f: &IntegerQuadratic, n: u32, psi: &PsiSpec) -> Result<bool> {
    let t = psi.level_threshold(n)?;
    inclusion_check_at(f, n, &t)
}

pub fn inclusion_check_at(f: &IntegerQuadratic, n: u32, t: &Rational) -> Result<bool> {
    let (s1, s2) = sigma_sets_at(f, n, t)?;
    let (d1, _) = split_delta(f, t)?;
    Ok(s1.is_subset_of(&s2) && s2.is_subset_of(&d1))
}

/// Union over `|a0| < 2^(n+2)` of `Δ(n, F)` for distinct-root members of the pair.
///
/// This is `Δ₁ ∪ Δ₂` plus the vertices that lie in `Δ`, so the measure is
/// the same while components are not cut at the vertex.
pub fn pair_union(a2: i64, a1: i64, n: u32, t: &Threshold) -> IntervalUnion {
    pair_union_over(a2, a1, fast::nonempty_a0(a2, a1, n, t), t)
}

pub(crate) fn pair_union_over(a2: i64, a1: i64, a0s: std::ops::Range<i64>, t: &Threshold) -> IntervalUnion {
    let mut all = Vec::new();
    for a0 in a0s {
        let f = IntegerQuadratic::new(a2, a1, a0).expect("a2 > 0");
        if f.discriminant() <= 0 {
            continue;
        }
        let parts = delta_parts(&f, t.value());
        all.extend(parts.left.into_intervals());
        all.extend(parts.right.into_intervals());
        if parts.vertex_in {
            all.push(Interval::point(QuadIrr::rational(f.vertex())));
        }
    }
    IntervalUnion::from_intervals(all)
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaOneReport {
    pub a2: i64,
    pub a1: i64,
    pub n: u32,
    pub measure: Enclosure,
    pub bound: Rational,
    pub components: usize,
    pub passed: bool,
}

pub fn lemma1_verify(a2: i64, a1: i64, n: u32, psi: &PsiSpec) -> Result<LemmaOneReport> {
    let block = DyadicBlock::new(n);
    if a2 < 1 || !block.contains(&IntegerQuadratic::new(a2, a1, 0)?) {
        return Err(Error::Invalid(format!("pair ({a2}, {a1}) is not in block {n}")));
    }
    let t = Threshold::for_level(psi, n)?;
    let union = pair_union(a2, a1, n, &t);
    Ok(lemma1_report(a2, a1, n, t.value(), union.measure(), union.len()))
}

pub fn lemma1_report(a2: i64, a1: i64, n: u32, t: &Rational, measure: Enclosure, components: usize) -> LemmaOneReport {
    let bound = Rational::from(16) * t;
    let passed = Rational::from_f64(measure.hi).is_some_and(|hi| hi <= bound);
    LemmaOneReport { a2, a1, n, measure, bound, components, passed }
}

/// Smallest `n` from which `ψ(2ⁿ) <= 1 / (4·(2^(n+1) - 1))` holds up to `max_n`.
///
/// For complex roots `F(x) >= |D| / (4 a2) >= 1 / (4 a2)` on the whole line,
/// so beyond this level no complex-root member of a block meets the threshold.
pub fn complex_exclusion_level(psi: &PsiSpec, max_n: u32) -> Result<u32> {
    let mut candidate = None;
    for n in (0..=max_n).rev() {
        let t = psi.level_threshold(n)?;
        let a2_max = Rational::from((1i64 << (n + 1)) - 1);
        if Rational::from(4) * a2_max * t <= Rational::one() {
            candidate = Some(n);
        } else {
            break;
        }
    }
    candidate.ok_or(Error::NotFound { what: "complex exclusion level".into(), cap: max_n })
}

/// Complex-root members of block `n` with nonempty `Δ` (exhaustive scan).
pub fn complex_violations(n: u32, t: &Threshold) -> Vec<IntegerQuadratic> {
    DyadicBlock::new(n)
        .triples()
        .filter(|f| f.discriminant() < 0 && t.delta_nonempty(f))
        .collect()
}
