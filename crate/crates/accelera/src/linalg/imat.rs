use crate::numerics::Interval;
use nalgebra::DMatrix;

/// Matrix with interval entries; arithmetic through nalgebra's generic
/// kernels picks up the outward rounding of [`Interval`].
pub type IMat = DMatrix<Interval>;

pub fn imat_of(m: &DMatrix<f64>) -> IMat {
    IMat::from_fn(m.nrows(), m.ncols(), |i, j| Interval::point(m[(i, j)]))
}

pub fn imat_mul(a: &IMat, b: &IMat) -> IMat {
    a * b
}

pub fn imat_sub(a: &IMat, b: &IMat) -> IMat {
    IMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

/// Upper bound on the entrywise max norm.
pub fn max_abs_hi(m: &IMat) -> f64 {
    m.iter().map(|iv| iv.abs().hi).fold(0.0, f64::max)
}
