//! Numerical eigen/Jordan machinery with a certified reconstruction
//! residual.
//!
//! The decomposition is floating point; soundness is recovered downstream
//! by inflating eigenvalue ranges with the residual `delta_max`, which is
//! itself an interval-certified upper bound on `|A - S J S^-1|` and
//! `|S S^-1 - I|` (entrywise max norm).

mod imat;
mod jordan;

pub use imat::{imat_mul, imat_of, imat_sub, max_abs_hi, IMat};
pub use jordan::{
    block_sigma_max, jordan_decompose, realify, reconstruction_error, ComplexJordan, JordanBlock,
    JordanForm,
};
