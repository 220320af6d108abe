//! Series convergence, condensation, box-counting dimension and pointwise exponents.

pub mod dimension;
pub mod pointwise;
pub mod series;

pub use dimension::{box_count, estimate_dimension, BoxCount, DimensionOptions, DimensionReport};
pub use pointwise::{pointwise_exponent, PointwiseReport};
pub use series::{
    bertrand, classify_series, condensation_compare, ls_slope, term_shape, CondensationReport, SeriesClass, SeriesOptions,
    SeriesReport, TermShape,
};
