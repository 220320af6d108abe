use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::rational::{exact_sqrt, sqrt_bracket};
use super::{Enclosure, Rational};

const SMALL_PRIMES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Bit precisions tried by [`qi_compare`] before the exact squaring fallback.
const REFINE_BITS: [u64; 2] = [96, 192];

/// Exact real number `p + q·√d` with rational `p`, `q` and an integer radicand `d ≥ 0`.
///
/// A rational radicand `a/b` is folded into `q` as `√(ab)/b`, and square factors
/// over small primes are pulled out, so `d` is always a nonnegative integer.
/// Representation is not unique; `==` and ordering compare values.
#[derive(Clone)]
pub struct QuadIrr {
    p: Rational,
    q: Rational,
    d: BigInt,
    approx: Enclosure,
}

impl QuadIrr {
    /// `p + q·√d`. Panics if `d < 0`.
    pub fn new(p: Rational, q: Rational, d: Rational) -> Self {
        assert!(!d.is_negative(), "negative radicand {d}");
        if q.is_zero() || d.is_zero() {
            return Self::rational(p);
        }
        // √(a/b) = √(ab)/b
        let mut q = q / Rational::from_integer(d.denom().clone());
        let mut m: BigInt = d.numer() * d.denom();
        extract_square_factors(&mut m, &mut q);
        if let Some(s) = exact_sqrt(&m) {
            return Self::rational(p + q * Rational::from_integer(s));
        }
        Self::from_parts(p, q, m)
    }

    pub fn rational(p: Rational) -> Self {
        let approx = p.enclose();
        QuadIrr { p, q: Rational::zero(), d: BigInt::zero(), approx }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(Rational::from(n))
    }

    /// `√r` for a nonnegative rational.
    pub fn sqrt_of(r: &Rational) -> Self {
        Self::new(Rational::zero(), Rational::one(), r.clone())
    }

    fn from_parts(p: Rational, q: Rational, d: BigInt) -> Self {
        if q.is_zero() || d.is_zero() {
            return Self::rational(p);
        }
        let root = Rational::from_integer(d.clone()).enclose().sqrt();
        let approx = p.enclose() + q.enclose() * root;
        QuadIrr { p, q, d, approx }
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.p)
    }

    /// Cheap float enclosure computed at construction.
    pub fn approx(&self) -> Enclosure {
        self.approx
    }

    /// Exact sign of the value.
    pub fn signum(&self) -> i8 {
        sign_in_field(&self.p, &self.q, &self.d)
    }

    pub fn neg(&self) -> QuadIrr {
        QuadIrr { p: -&self.p, q: -&self.q, d: self.d.clone(), approx: -self.approx }
    }

    pub fn add_rational(&self, r: &Rational) -> QuadIrr {
        Self::from_parts(&self.p + r, self.q.clone(), self.d.clone())
    }

    pub fn sub_rational(&self, r: &Rational) -> QuadIrr {
        Self::from_parts(&self.p - r, self.q.clone(), self.d.clone())
    }

    pub fn scale(&self, r: &Rational) -> QuadIrr {
        Self::from_parts(&self.p * r, &self.q * r, self.d.clone())
    }

    fn shares_field(&self, other: &QuadIrr) -> bool {
        self.is_rational() || other.is_rational() || self.d == other.d
    }

    /// Sum when both operands live in the same quadratic field (or one is rational).
    pub fn checked_add(&self, other: &QuadIrr) -> Option<QuadIrr> {
        if !self.shares_field(other) {
            return None;
        }
        let d = if self.is_rational() { other.d.clone() } else { self.d.clone() };
        Some(Self::from_parts(&self.p + &other.p, &self.q + &other.q, d))
    }

    pub fn checked_sub(&self, other: &QuadIrr) -> Option<QuadIrr> {
        self.checked_add(&other.neg())
    }

    /// Rational bracket `[lo, hi]` of width at most `|q|·2^-bits`.
    pub fn bracket(&self, bits: u64) -> (Rational, Rational) {
        if self.is_rational() {
            return (self.p.clone(), self.p.clone());
        }
        let (s_lo, s_hi) = sqrt_bracket(&self.d, bits);
        let a = &self.p + &self.q * &s_lo;
        let b = &self.p + &self.q * &s_hi;
        if a <= b { (a, b) } else { (b, a) }
    }

    /// Exact `⌊x⌋`.
    pub fn floor(&self) -> BigInt {
        let mut bits = 64;
        loop {
            let (lo, hi) = self.bracket(bits);
            let (fl, fh) = (lo.floor(), hi.floor());
            if fl == fh {
                return fl;
            }
            if &fh - &fl == BigInt::from(1) {
                // the bracket straddles the integer fh
                let m = QuadIrr::rational(Rational::from_integer(fh.clone()));
                return if qi_compare(&m, self) == Ordering::Greater { fl } else { fh };
            }
            bits *= 2;
        }
    }

    /// Enclosure of width at most `abs_tol`, refined by precision doubling.
    ///
    /// When `abs_tol` is below the float spacing at the value the narrowest
    /// float enclosure (a few ulps) is returned instead.
    pub fn enclose(&self, abs_tol: &Rational) -> Enclosure {
        assert!(abs_tol.is_positive(), "tolerance must be positive");
        if Rational::from_f64(self.approx.width()).is_some_and(|w| w <= *abs_tol) {
            return self.approx;
        }
        let mut best = self.approx;
        let mut bits = 64;
        while bits <= 8192 {
            let (lo, hi) = self.bracket(bits);
            let e = Enclosure::new(lo.enclose().lo, hi.enclose().hi);
            if e.width() < best.width() {
                best = e;
            }
            let exact_width = &hi - &lo;
            if Rational::from_f64(best.width()).is_some_and(|w| w <= *abs_tol) || exact_width.is_zero() {
                return best;
            }
            // no further progress possible once float spacing dominates
            if exact_width < Rational::from_f64(best.width()).unwrap_or_else(Rational::zero) * Rational::pow2(-8) {
                return best;
            }
            bits *= 2;
        }
        best
    }

    /// Exact integer form `(P + Q·√D) / R` with `R > 0`.
    pub fn integer_form(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        let r = self.p.denom().lcm(self.q.denom());
        let rr = Rational::from_integer(r.clone());
        let p = (&self.p * &rr).numer().clone();
        let q = (&self.q * &rr).numer().clone();
        (p, q, self.d.clone(), r)
    }
}

fn extract_square_factors(m: &mut BigInt, q: &mut Rational) {
    if m.is_zero() {
        return;
    }
    if let Some(mut small) = m.to_u64() {
        let mut factor: u64 = 1;
        for &pr in &SMALL_PRIMES {
            let sq = pr * pr;
            while small % sq == 0 {
                small /= sq;
                factor *= pr;
            }
        }
        if factor > 1 {
            *m = BigInt::from(small);
            *q = &*q * Rational::from_integer(BigInt::from(factor));
        }
        return;
    }
    for &pr in &SMALL_PRIMES {
        let sq = BigInt::from(pr * pr);
        loop {
            let (quo, rem) = m.div_rem(&sq);
            if !rem.is_zero() {
                break;
            }
            *m = quo;
            *q = &*q * Rational::from(pr as i64);
        }
    }
}

/// Exact sign of `a + b·√m` for an integer `m ≥ 0`.
fn sign_in_field(a: &Rational, b: &Rational, m: &BigInt) -> i8 {
    let sa = a.signum();
    let sb = if m.is_zero() { 0 } else { b.signum() };
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    let aa = a * a;
    let bb = b * b * Rational::from_integer(m.clone());
    match aa.cmp(&bb) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => 0,
    }
}

fn ordering_from_sign(s: i8) -> Ordering {
    s.cmp(&0)
}

/// Exact ordering of two quadratic irrationals.
///
/// Float enclosures are tried first, then rational brackets at increasing
/// precision; if those fail to separate the values, the sign of the
/// difference is decided algebraically by squaring away one radical.
pub fn qi_compare(x: &QuadIrr, y: &QuadIrr) -> Ordering {
    if x.approx.certainly_lt(&y.approx) {
        return Ordering::Less;
    }
    if y.approx.certainly_lt(&x.approx) {
        return Ordering::Greater;
    }
    if let Some(diff) = x.checked_sub(y) {
        return ordering_from_sign(diff.signum());
    }
    for bits in REFINE_BITS {
        let (xl, xh) = x.bracket(bits);
        let (yl, yh) = y.bracket(bits);
        if xh < yl {
            return Ordering::Less;
        }
        if yh < xl {
            return Ordering::Greater;
        }
    }
    exact_compare_distinct_fields(x, y)
}

// sign(A - C) with A = (p1 - p2) + q1·√d1 and C = q2·√d2
fn exact_compare_distinct_fields(x: &QuadIrr, y: &QuadIrr) -> Ordering {
    let a = &x.p - &y.p;
    let sa = sign_in_field(&a, &x.q, &x.d);
    let sc = y.q.signum();
    if sa != sc || sa == 0 {
        return sa.cmp(&sc);
    }
    // same nonzero sign: compare squares, A² - C² = (a² + q1²d1 - q2²d2) + 2·a·q1·√d1
    let d1 = Rational::from_integer(x.d.clone());
    let d2 = Rational::from_integer(y.d.clone());
    let rational_part = &a * &a + &x.q * &x.q * &d1 - &y.q * &y.q * &d2;
    let radical_coeff = Rational::from(2) * &a * &x.q;
    let s = sign_in_field(&rational_part, &radical_coeff, &x.d);
    let by_square = ordering_from_sign(s);
    if sa > 0 { by_square } else { by_square.reverse() }
}

/// Enclosure of `x - y` that avoids cancellation between nearby values.
///
/// Both radicals are rationalised when their coefficients share a sign:
/// `q1√d1 - q2√d2 = (q1²d1 - q2²d2) / (q1√d1 + q2√d2)`.
pub fn qi_sub_enclose(x: &QuadIrr, y: &QuadIrr) -> Enclosure {
    if let Some(diff) = x.checked_sub(y) {
        return refine_relative(&diff);
    }
    let a = &x.p - &y.p;
    let rx = QuadIrr::from_parts(Rational::zero(), x.q.clone(), x.d.clone()).approx;
    let ry = QuadIrr::from_parts(Rational::zero(), y.q.clone(), y.d.clone()).approx;
    let radical_diff = if x.q.signum() == y.q.signum() {
        let d1 = Rational::from_integer(x.d.clone());
        let d2 = Rational::from_integer(y.d.clone());
        let numer = &x.q * &x.q * &d1 - &y.q * &y.q * &d2;
        numer.enclose() / (rx + ry)
    } else {
        rx - ry
    };
    let e = a.enclose() + radical_diff;
    if a.is_zero() || relative_ok(&e) {
        return e;
    }
    // cancellation against the rational part: fall back to brackets
    let mut bits = 128;
    let mut best = e;
    while bits <= 4096 {
        let (xl, xh) = x.bracket(bits);
        let (yl, yh) = y.bracket(bits);
        let cand = Enclosure::new((&xl - &yh).enclose().lo, (&xh - &yl).enclose().hi);
        if cand.width() < best.width() {
            best = cand;
        }
        if relative_ok(&best) {
            break;
        }
        bits *= 2;
    }
    best
}

fn relative_ok(e: &Enclosure) -> bool {
    let mag = e.lo.abs().max(e.hi.abs());
    mag == 0.0 || e.width() <= mag * 1e-12 || (e.lo > 0.0 && e.width() <= e.lo * 1e-12)
}

fn refine_relative(v: &QuadIrr) -> Enclosure {
    let e = v.approx;
    if v.is_rational() || relative_ok(&e) {
        return e;
    }
    let mut bits = 128;
    let mut best = e;
    while bits <= 4096 {
        let (lo, hi) = v.bracket(bits);
        let cand = Enclosure::new(lo.enclose().lo, hi.enclose().hi);
        if cand.width() < best.width() {
            best = cand;
        }
        if relative_ok(&best) {
            break;
        }
        bits *= 2;
    }
    best
}

impl PartialEq for QuadIrr {
    fn eq(&self, other: &Self) -> bool {
        qi_compare(self, other) == Ordering::Equal
    }
}

impl Eq for QuadIrr {}

impl PartialOrd for QuadIrr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadIrr {
    fn cmp(&self, other: &Self) -> Ordering {
        qi_compare(self, other)
    }
}

impl From<Rational> for QuadIrr {
    fn from(r: Rational) -> Self {
        QuadIrr::rational(r)
    }
}

impl fmt::Display for QuadIrr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.p)
        } else if self.p.is_zero() {
            write!(f, "({})·√{}", self.q, self.d)
        } else {
            write!(f, "{} + ({})·√{}", self.p, self.q, self.d)
        }
    }
}

impl fmt::Debug for QuadIrr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} ≈ {:?}", self.approx)
    }
}

/// Serialized as the integer form `{"p","q","d","r"}` with value `(p + q√d)/r`.
impl Serialize for QuadIrr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let (p, q, d, r) = self.integer_form();
        let mut st = serializer.serialize_struct("QuadIrr", 4)?;
        st.serialize_field("p", &p.to_string())?;
        st.serialize_field("q", &q.to_string())?;
        st.serialize_field("d", &d.to_string())?;
        st.serialize_field("r", &r.to_string())?;
        st.end()
    }
}

/// `x^2` is not closed in general; the product of conjugates is.
pub fn norm(x: &QuadIrr) -> Rational {
    &x.p * &x.p - &x.q * &x.q * Rational::from_integer(x.d.clone())
}
