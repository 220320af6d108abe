//! Exact rational and quadratic-irrational arithmetic with certified float enclosures.

mod enclosure;
mod quadirr;
mod rational;

pub use enclosure::{Enclosure, TRANSCENDENTAL_ULPS};
pub use quadirr::{norm, qi_compare, qi_sub_enclose, QuadIrr};
pub use rational::{gcd_i64, Rational};
