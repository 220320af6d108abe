pub mod error;
pub mod exact;

pub use error::{Error, Result};
pub use exact::{Enclosure, QuadIrr, Rational};
pub mod scale;
pub mod poly;
pub mod sets;
pub mod cover;
pub mod asymptotics;
