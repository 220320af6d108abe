//! Integer quadratic polynomials `a2·x² + a1·x + a0`, their roots and dyadic blocks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{gcd_i64, QuadIrr, Rational};

/// Largest level accepted by the block enumerators unless configured otherwise.
pub const DEFAULT_LEVEL_CAP: u32 = 14;

/// Coefficients are normalized to `a2 > 0`; `|Δ(n, F)| = |Δ(n, -F)|` makes the
/// sign of `F` irrelevant for the solution sets.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntegerQuadratic {
    a2: i64,
    a1: i64,
    a0: i64,
}

impl IntegerQuadratic {
    pub fn new(a2: i64, a1: i64, a0: i64) -> Result<Self> {
        match a2.signum() {
            0 => Err(Error::Invalid("leading coefficient a2 must be nonzero".into())),
            1 => Ok(IntegerQuadratic { a2, a1, a0 }),
            _ => Ok(IntegerQuadratic { a2: -a2, a1: -a1, a0: -a0 }),
        }
    }

    pub fn a2(&self) -> i64 {
        self.a2
    }

    pub fn a1(&self) -> i64 {
        self.a1
    }

    pub fn a0(&self) -> i64 {
        self.a0
    }

    pub fn coefficients(&self) -> (i64, i64, i64) {
        (self.a2, self.a1, self.a0)
    }

    /// `max(a2, |a1|)`: the norm over the non-constant coefficients.
    pub fn height(&self) -> i64 {
        height(self)
    }

    /// `D = a1² - 4·a2·a0`.
    pub fn discriminant(&self) -> i128 {
        let (a2, a1, a0) = (self.a2 as i128, self.a1 as i128, self.a0 as i128);
        a1 * a1 - 4 * a2 * a0
    }

    /// Dyadic level `n` with `2^n <= height < 2^(n+1)`.
    pub fn level(&self) -> u32 {
        63 - self.height().leading_zeros()
    }

    /// Abscissa of the vertex, `-a1 / (2·a2)`, which is also the midpoint of the roots.
    pub fn vertex(&self) -> Rational {
        Rational::new(-self.a1, 2 * self.a2)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let (a2, a1, a0) = (Rational::from(self.a2), Rational::from(self.a1), Rational::from(self.a0));
        (a2 * x + a1) * x + a0
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        (self.a2 as f64 * x + self.a1 as f64) * x + self.a0 as f64
    }

    pub fn negated_raw(&self) -> (i64, i64, i64) {
        (-self.a2, -self.a1, -self.a0)
    }
}

impl fmt::Debug for IntegerQuadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a2, self.a1, self.a0)
    }
}

impl fmt::Display for IntegerQuadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x^2 + {}x + {}", self.a2, self.a1, self.a0)
    }
}

pub fn height(f: &IntegerQuadratic) -> i64 {
    f.a2.max(f.a1.abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Repeated,
    DistinctReal,
    Complex,
}

impl RootKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootKind::Repeated => "repeated",
            RootKind::DistinctReal => "distinct_real",
            RootKind::Complex => "complex",
        }
    }
}

/// `F = k·(u·x - v)²` with `gcd(u, v) = 1`, `k >= 1`, `u > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepeatedParams {
    pub k: i64,
    pub u: i64,
    pub v: i64,
}

impl RepeatedParams {
    pub fn polynomial(&self) -> IntegerQuadratic {
        let RepeatedParams { k, u, v } = *self;
        IntegerQuadratic { a2: k * u * u, a1: -2 * k * u * v, a0: k * v * v }
    }

    pub fn root(&self) -> Rational {
        Rational::new(self.v, self.u)
    }
}

#[derive(Clone, Debug)]
pub struct RootData {
    pub kind: RootKind,
    pub discriminant: i128,
    /// `(α1, α2)` with `α1 <= α2`, present iff `D >= 0`.
    pub roots: Option<(QuadIrr, QuadIrr)>,
    /// `|F'(α1)| = |F'(α2)| = √D`, present iff `D >= 0`.
    pub deriv_abs: Option<QuadIrr>,
    pub repeated: Option<RepeatedParams>,
}

impl RootData {
    pub fn left_root(&self) -> Option<&QuadIrr> {
        self.roots.as_ref().map(|r| &r.0)
    }

    pub fn right_root(&self) -> Option<&QuadIrr> {
        self.roots.as_ref().map(|r| &r.1)
    }
}

/// Roots `(-a1 ∓ √D) / (2·a2)` and, for `D = 0`, the factorization `k·(ux - v)²`.
pub fn classify(f: &IntegerQuadratic) -> RootData {
    let d = f.discriminant();
    if d < 0 {
        return RootData { kind: RootKind::Complex, discriminant: d, roots: None, deriv_abs: None, repeated: None };
    }
    let vertex = f.vertex();
    if d == 0 {
        let params = repeated_params(f);
        let root = QuadIrr::rational(vertex);
        return RootData {
            kind: RootKind::Repeated,
            discriminant: 0,
            roots: Some((root.clone(), root)),
            deriv_abs: Some(QuadIrr::from_int(0)),
            repeated: Some(params),
        };
    }
    let dr = Rational::from_integer(d);
    let half = Rational::new(1, 2 * f.a2);
    let alpha1 = QuadIrr::new(vertex.clone(), -&half, dr.clone());
    let alpha2 = QuadIrr::new(vertex, half, dr.clone());
    RootData {
        kind: RootKind::DistinctReal,
        discriminant: d,
        roots: Some((alpha1, alpha2)),
        deriv_abs: Some(QuadIrr::sqrt_of(&dr)),
        repeated: None,
    }
}

fn repeated_params(f: &IntegerQuadratic) -> RepeatedParams {
    // root v/u = -a1 / (2 a2) in lowest terms
    let g = gcd_i64(f.a1, 2 * f.a2);
    let (u, v) = (2 * f.a2 / g, -f.a1 / g);
    assert!(f.a2 % (u * u) == 0, "D = 0 but u² ∤ a2 for {f:?}");
    let params = RepeatedParams { k: f.a2 / (u * u), u, v };
    assert_eq!(params.polynomial(), *f, "repeated-root reconstruction failed");
    params
}

/// `1 <= |F'(α)| <= 10·2^n`, checked as `1 <= D <= 100·4^n`.
pub fn deriv_bound_check(f: &IntegerQuadratic, n: u32) -> bool {
    let d = f.discriminant();
    d >= 1 && d <= 100 * (1i128 << (2 * n))
}

/// Coefficient region `2^n <= max(a2, |a1|) < 2^(n+1)`, `|a0| < 2^(n+2)`, `a2 >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicBlock {
    pub n: u32,
}

impl DyadicBlock {
    pub fn new(n: u32) -> Self {
        DyadicBlock { n }
    }

    pub fn with_cap(n: u32, cap: u32) -> Result<Self> {
        if n > cap {
            return Err(Error::ResourceCap { level: n, cap });
        }
        Ok(DyadicBlock { n })
    }

    /// `2^n`.
    pub fn low(&self) -> i64 {
        1 << self.n
    }

    /// `2^(n+1)`, exclusive bound on the height.
    pub fn high(&self) -> i64 {
        1 << (self.n + 1)
    }

    /// Exclusive bound `2^(n+2)` on `|a0|`.
    pub fn a0_bound(&self) -> i64 {
        1 << (self.n + 2)
    }

    pub fn contains(&self, f: &IntegerQuadratic) -> bool {
        let h = f.height();
        self.low() <= h && h < self.high() && f.a0.abs() < self.a0_bound()
    }

    /// `a1` values paired with `a2` inside the block, increasing.
    pub fn a1_values(&self, a2: i64) -> impl Iterator<Item = i64> + Clone {
        let (low, high) = (self.low(), self.high());
        (-(high - 1)..high).filter(move |a1| a2.max(a1.abs()) >= low)
    }

    /// All `(a2, a1)` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (i64, i64)> + Clone {
        let block = *self;
        (1..self.high()).flat_map(move |a2| block.a1_values(a2).map(move |a1| (a2, a1)))
    }

    pub fn a0_values(&self) -> std::ops::Range<i64> {
        -(self.a0_bound() - 1)..self.a0_bound()
    }

    /// Closed form: `(2^(n+1)-1)(2^(n+2)-1) - (2^n-1)(2^(n+1)-1)`.
    pub fn pair_count(&self) -> u64 {
        let (l, h) = (self.low() as u64, self.high() as u64);
        (h - 1) * (2 * h - 1) - (l - 1) * (2 * l - 1)
    }

    pub fn triple_count(&self) -> u64 {
        self.pair_count() * (2 * self.a0_bound() as u64 - 1)
    }

    /// Every triple of the block in lexicographic `(a2, a1, a0)` order.
    pub fn triples(&self) -> impl Iterator<Item = IntegerQuadratic> + Clone {
        let a0s = self.a0_values();
        self.pairs()
            .flat_map(move |(a2, a1)| a0s.clone().map(move |a0| IntegerQuadratic { a2, a1, a0 }))
    }

    /// Every `D = 0` member of the block, generated from `k·(ux - v)²` and
    /// returned in lexicographic order.
    pub fn repeated_members(&self) -> Vec<IntegerQuadratic> {
        let mut out = Vec::new();
        let (low, high, a0b) = (self.low(), self.high(), self.a0_bound());
        let mut u = 1i64;
        while u * u < high {
            let mut k = 1i64;
            while k * u * u < high {
                // |v| bounded by both |a1| = 2k·u·|v| < high and k·v² < a0b
                let mut v_abs = 0i64;
                while 2 * k * u * v_abs < high && k * v_abs * v_abs < a0b {
                    let signs: &[i64] = if v_abs == 0 { &[1] } else { &[1, -1] };
                    if gcd_i64(u, v_abs) == 1 {
                        for &s in signs {
                            let p = RepeatedParams { k, u, v: s * v_abs }.polynomial();
                            if p.height() >= low {
                                out.push(p);
                            }
                        }
                    }
                    v_abs += 1;
                }
                k += 1;
            }
            u += 1;
        }
        out.sort();
        out
    }
}

/// Streams the block in lexicographic order after checking the level cap.
pub fn enumerate_block(n: u32, cap: u32) -> Result<impl Iterator<Item = IntegerQuadratic> + Clone> {
    Ok(DyadicBlock::with_cap(n, cap)?.triples())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a2: i64, a1: i64, a0: i64) -> IntegerQuadratic {
        IntegerQuadratic::new(a2, a1, a0).unwrap()
    }

    #[test]
    fn normalization_and_height() {
        assert_eq!(q(-2, 3, -1).coefficients(), (2, -3, 1));
        assert!(IntegerQuadratic::new(0, 1, 1).is_err());
        assert_eq!(height(&q(4, -4, 1)), 4);
        assert_eq!(height(&q(1, 0, 0)), 1);
        assert_eq!(height(&q(2, 3, 1)), 3);
        assert_eq!(q(2, 3, 1).level(), 1);
        assert_eq!(q(4, -4, 1).level(), 2);
    }

    #[test]
    fn classify_examples() {
        let c = classify(&q(1, 0, 0));
        assert_eq!(c.kind, RootKind::Repeated);
        assert_eq!(c.repeated, Some(RepeatedParams { k: 1, u: 1, v: 0 }));
        assert_eq!(c.left_root().unwrap().as_rational(), Some(&Rational::zero()));

        let c = classify(&q(1, -1, 0));
        assert_eq!(c.kind, RootKind::DistinctReal);
        assert_eq!(c.discriminant, 1);
        let (a1, a2) = c.roots.clone().unwrap();
        assert_eq!(a1, QuadIrr::from_int(0));
        assert_eq!(a2, QuadIrr::from_int(1));
        assert_eq!(c.deriv_abs.unwrap(), QuadIrr::from_int(1));

        let c = classify(&q(1, 0, 1));
        assert_eq!(c.kind, RootKind::Complex);
        assert_eq!(c.discriminant, -4);
        assert!(c.roots.is_none());

        let c = classify(&q(4, -4, 1));
        assert_eq!(c.kind, RootKind::Repeated);
        assert_eq!(c.repeated, Some(RepeatedParams { k: 1, u: 2, v: 1 }));
        assert_eq!(c.left_root().unwrap().as_rational(), Some(&Rational::new(1, 2)));

        let c = classify(&q(12, -12, 3));
        assert_eq!(c.repeated, Some(RepeatedParams { k: 3, u: 2, v: 1 }));
    }

    #[test]
    fn deriv_bound_examples() {
        assert!(deriv_bound_check(&q(2, 3, 1), 1));
        assert!(deriv_bound_check(&q(1, -1, 0), 0));
        assert!(!deriv_bound_check(&q(1, 0, 0), 0));
        assert!(!deriv_bound_check(&q(1, 0, -101), 0));
    }

    // independent counting oracle: scan a bounding box and filter
    fn brute_force_count(n: u32) -> u64 {
        let (low, high, a0b) = (1i64 << n, 1i64 << (n + 1), 1i64 << (n + 2));
        let mut count = 0;
        for a2 in -high..=high {
            for a1 in -high..=high {
                if a2 < 1 {
                    continue;
                }
                let h = a2.max(a1.abs());
                if h < low || h >= high {
                    continue;
                }
                count += (-a0b..=a0b).filter(|a0| a0.abs() < a0b).count() as u64;
            }
        }
        count
    }

    #[test]
    fn block_counts() {
        assert_eq!(DyadicBlock::new(0).triple_count(), 21);
        assert_eq!(DyadicBlock::new(0).triples().count(), 21);
        assert_eq!(DyadicBlock::new(2).pair_count(), 84);
        assert_eq!(DyadicBlock::new(2).triple_count(), 2604);
        for n in 0..=5 {
            let b = DyadicBlock::new(n);
            let oracle = brute_force_count(n);
            assert_eq!(b.triple_count(), oracle, "closed form n={n}");
            assert_eq!(b.triples().count() as u64, oracle, "stream n={n}");
            assert_eq!(b.pairs().count() as u64, b.pair_count());
        }
    }

    #[test]
    fn block_order_and_membership() {
        let b = DyadicBlock::new(3);
        let all: Vec<_> = enumerate_block(3, DEFAULT_LEVEL_CAP).unwrap().collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for f in &all {
            assert!(b.contains(f));
            assert!((8..16).contains(&f.height()));
        }
        assert!(matches!(enumerate_block(20, DEFAULT_LEVEL_CAP), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn repeated_members_match_scan() {
        for n in 0..=6 {
            let b = DyadicBlock::new(n);
            let scanned: Vec<_> = b.triples().filter(|f| f.discriminant() == 0).collect();
            assert_eq!(b.repeated_members(), scanned, "n={n}");
        }
    }

    #[test]
    fn root_identities_in_small_blocks() {
        for n in 0..=3 {
            for f in DyadicBlock::new(n).triples() {
                let c = classify(&f);
                match c.kind {
                    RootKind::Repeated => {
                        assert_eq!(c.repeated.unwrap().polynomial(), f);
                    }
                    RootKind::DistinctReal => {
                        let (a1, a2) = c.roots.unwrap();
                        assert!(a1 < a2);
                        let gap = a2.checked_sub(&a1).unwrap();
                        // either p = 0 (irrational gap) or q = 0 (square D)
                        assert!(gap.p().is_zero() || gap.is_rational());
                        let a2r = Rational::from(f.a2());
                        let gap_sq = gap.p() * gap.p() + gap.q() * gap.q() * Rational::from_integer(gap.radicand().clone());
                        let sq = &a2r * &a2r * gap_sq;
                        assert_eq!(sq, Rational::from_integer(f.discriminant()));
                    }
                    RootKind::Complex => assert!(c.discriminant < 0),
                }
            }
        }
    }

    proptest! {
        #[test]
        fn roots_vanish(a2 in 1i64..200, a1 in -400i64..400, a0 in -800i64..800) {
            let f = q(a2, a1, a0);
            let c = classify(&f);
            prop_assert_eq!(c.kind == RootKind::Repeated, f.discriminant() == 0);
            prop_assert_eq!(c.kind == RootKind::Complex, f.discriminant() < 0);
            if let Some((r1, r2)) = c.roots {
                // Vieta: r1 + r2 = -a1/a2 exactly
                let sum = r1.checked_add(&r2).unwrap();
                prop_assert_eq!(sum.as_rational().cloned(), Some(Rational::new(-a1, a2)));
                let e = r1.approx();
                let val = f.eval_f64(e.mid());
                prop_assert!(val.abs() < 1e-6 * (1.0 + a1.abs() as f64 + a2 as f64));
            }
        }
    }
}
