//! Empirical dual exponent of a point: how fast `|F(x)|` can shrink with the height of `F`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Rational;

/// Exponents above this are reported as near-algebraic.
pub const NEAR_ALGEBRAIC_EXPONENT: f64 = 8.0;

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseReport {
    pub x: Rational,
    pub q_max: u64,
    /// `max -ln|F(x)| / ln H(F)` over `F(x) != 0`, `2 <= H(F) <= q_max`.
    pub exponent: Option<f64>,
    /// `-ln min|F(x)| / ln q_max` over the same `F`: the exponent at the scale `q_max`.
    pub scale_exponent: Option<f64>,
    /// Coefficients `(a2, a1, a0)` attaining the maximum.
    pub best: Option<(i64, i64, i64)>,
    /// Lowest-height `F` with `F(x) = 0`: `x` is algebraic of degree at most 2.
    pub algebraic: Option<(i64, i64, i64)>,
    pub near_algebraic: bool,
}

/// `F(x)·d²` for `x = p/d`, exactly.
fn scaled_value(a2: i64, a1: i64, a0: i64, p: &BigInt, d: &BigInt) -> BigInt {
    BigInt::from(a2) * p * p + BigInt::from(a1) * p * d + BigInt::from(a0) * d * d
}

fn ln_abs(v: &BigInt) -> f64 {
    match v.to_f64() {
        Some(f) if f.is_finite() && f != 0.0 => f.abs().ln(),
        _ => {
            // beyond f64 range: shift down first
            let bits = v.bits();
            let shifted: BigInt = v.abs() >> (bits - 64);
            shifted.to_f64().unwrap().ln() + (bits - 64) as f64 * std::f64::consts::LN_2
        }
    }
}

/// Scans every `F = a2 x² + a1 x + a0` with height at most `q_max`.
///
/// For fixed `(a2, a1)` only the two `a0` nearest `-(a2 x² + a1 x)` can give
/// `|F(x)| < 1`, so the scan is quadratic in `q_max`. `F` and `-F` are the same
/// case, so the leading nonzero coefficient is taken positive.
pub fn pointwise_exponent(x: &Rational, q_max: u64) -> Result<PointwiseReport> {
    if x.is_negative() || *x > Rational::one() {
        return Err(Error::Domain(format!("pointwise exponent needs x in [0, 1], got {x}")));
    }
    if !(2..=1 << 20).contains(&q_max) {
        return Err(Error::Invalid(format!("q_max must lie in [2, 2^20], got {q_max}")));
    }
    let (p, d) = (x.numer().clone(), x.denom().clone());
    let ln_d2 = 2.0 * ln_abs(&d);
    let x2 = x * x;
    let h = q_max as i64;
    let mut best: Option<(f64, (i64, i64, i64))> = None;
    let mut smallest: Option<f64> = None;
    let mut algebraic: Option<(u64, (i64, i64, i64))> = None;
    for a2 in 0..=h {
        let a1_range = if a2 == 0 { 1..=h } else { -h..=h };
        for a1 in a1_range {
            let pv = &(&x2 * &Rational::from(a2)) + &(x * &Rational::from(a1));
            let f = (-pv).floor();
            let f = f.to_i64().expect("bounded by 2·q_max");
            for a0 in [f, f + 1] {
                if a0.abs() > h {
                    continue;
                }
                let height = a2.max(a1.abs()).max(a0.abs()) as u64;
                let v = scaled_value(a2, a1, a0, &p, &d);
                if v.is_zero() {
                    if algebraic.is_none_or(|(hh, _)| height < hh) {
                        algebraic = Some((height, (a2, a1, a0)));
                    }
                    continue;
                }
                if height < 2 {
                    continue;
                }
                let ln_f = ln_abs(&v) - ln_d2;
                smallest = Some(smallest.map_or(ln_f, |m| m.min(ln_f)));
                let e = -ln_f / (height as f64).ln();
                if best.is_none_or(|(b, _)| e > b) {
                    best = Some((e, (a2, a1, a0)));
                }
            }
        }
    }
    let exponent = best.map(|b| b.0);
    Ok(PointwiseReport {
        x: x.clone(),
        q_max,
        exponent,
        scale_exponent: smallest.map(|m| -m / (q_max as f64).ln()),
        best: best.map(|b| b.1),
        algebraic: algebraic.map(|a| a.1),
        near_algebraic: exponent.is_some_and(|e| e > NEAR_ALGEBRAIC_EXPONENT),
    })
}
