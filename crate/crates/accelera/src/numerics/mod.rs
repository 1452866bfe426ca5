//! Sound scalar arithmetic: outward-rounded real intervals, complex
//! rectangular intervals and polar ranges.
//!
//! Every floating-point quantity that feeds a reachability bound goes
//! through these types so that rounding cannot flip a verdict. Endpoints
//! are nudged outward only when the underlying hardware operation was
//! inexact (detected with error-free transformations), so integer-exact
//! arithmetic stays exact.

mod complex;
mod interval;
mod polar;

pub use complex::CInterval;
pub use interval::{ival_op, ArithOp, Interval};
pub use polar::{polar_pow_range, PolarRange};
