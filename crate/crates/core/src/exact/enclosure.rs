use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Closed float interval `[lo, hi]` certified to contain a real value.
///
/// Every operation rounds outward: the exact result of a correctly rounded
/// IEEE operation is within half an ulp, so stepping one ulp outward keeps
/// containment. Library transcendentals are not correctly rounded and get a
/// wider margin of [`TRANSCENDENTAL_ULPS`].
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

/// Outward margin applied after `ln`, `exp` and `powf`.
pub const TRANSCENDENTAL_ULPS: u32 = 4;

fn down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_down())
}

fn up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_up())
}

impl Enclosure {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan(), "NaN enclosure bound");
        assert!(lo <= hi, "inverted enclosure [{lo}, {hi}]");
        Enclosure { lo, hi }
    }

    /// An exactly representable value.
    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    pub fn zero() -> Self {
        Self::point(0.0)
    }

    fn rounded(lo: f64, hi: f64) -> Self {
        Self::new(lo.next_down(), hi.next_up())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_enclosure(&self, other: &Enclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Every value in `self` is strictly below every value in `other`.
    pub fn certainly_lt(&self, other: &Enclosure) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &Enclosure) -> bool {
        self.hi <= other.lo
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lo >= 0.0
    }

    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Pointwise max of the enclosed values.
    pub fn max(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn min(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    /// Clamps the lower end at zero for quantities known to be nonnegative.
    pub fn clamp_nonneg(&self) -> Enclosure {
        Enclosure::new(self.lo.max(0.0), self.hi.max(0.0))
    }

    pub fn sqrt(&self) -> Enclosure {
        assert!(self.hi >= 0.0, "sqrt of negative enclosure");
        let lo = self.lo.max(0.0);
        let s_lo = if lo == 0.0 { 0.0 } else { lo.sqrt().next_down().max(0.0) };
        Enclosure::new(s_lo, self.hi.sqrt().next_up())
    }

    pub fn ln(&self) -> Enclosure {
        assert!(self.lo > 0.0, "log of non-positive enclosure");
        Enclosure::new(down(self.lo.ln(), TRANSCENDENTAL_ULPS), up(self.hi.ln(), TRANSCENDENTAL_ULPS))
    }

    pub fn exp(&self) -> Enclosure {
        let lo = down(self.lo.exp(), TRANSCENDENTAL_ULPS).max(0.0);
        Enclosure::new(lo, up(self.hi.exp(), TRANSCENDENTAL_ULPS))
    }

    /// `self^e` for a positive base, via `exp(e * ln self)`.
    pub fn powf(&self, e: f64) -> Enclosure {
        if e == 0.0 {
            return Enclosure::point(1.0);
        }
        (self.ln() * Enclosure::point(e)).exp()
    }

    /// `self^e` for a positive base with an enclosed exponent.
    pub fn pow_enc(&self, e: &Enclosure) -> Enclosure {
        (self.ln() * *e).exp()
    }

    pub fn scale(&self, k: f64) -> Enclosure {
        *self * Enclosure::point(k)
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Enclosure>>(items: I) -> Enclosure {
        items.into_iter().fold(Enclosure::zero(), |acc, x| acc + *x)
    }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: Enclosure) -> Enclosure {
        Enclosure::rounded(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: Enclosure) -> Enclosure {
        Enclosure::rounded(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure::new(-self.hi, -self.lo)
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: Enclosure) -> Enclosure {
        let c = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Enclosure::rounded(lo, hi)
    }
}

impl Div for Enclosure {
    type Output = Enclosure;
    fn div(self, rhs: Enclosure) -> Enclosure {
        assert!(rhs.lo > 0.0 || rhs.hi < 0.0, "division by an enclosure containing zero");
        let c = [self.lo / rhs.lo, self.lo / rhs.hi, self.hi / rhs.lo, self.hi / rhs.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Enclosure::rounded(lo, hi)
    }
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}
