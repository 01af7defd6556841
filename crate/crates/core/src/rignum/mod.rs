//! Verified arithmetic on dyadic intervals and interval matrices.

pub mod dyadic;
pub mod elementary;
pub mod interval;
pub mod matrix;
pub mod powexpr;

pub use dyadic::{Dyadic, Round};
pub use interval::{certified_compare, max_precision, Cmp, DyInterval, DEFAULT_PREC};
pub use matrix::{exp_minus_linear, mat_exp_enclosure, mat_log_enclosure, product_log_deviation, IMatrix};
pub use powexpr::{floor_pow, PowProduct};
