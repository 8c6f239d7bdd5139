//! Named operators used throughout the examples and tests.

use crate::error::Result;
use crate::operators::{make_bayart_shift, DenseMatrix, Field, NormKind, OperatorSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn real(rows: &[&[f64]], norm: NormKind) -> OperatorSpec {
    OperatorSpec::Dense(DenseMatrix::real(rows, norm).expect("fixture matrix is valid"))
}

/// `[[1,1],[0,1]]` on `(C^2, l2)`: a strict `(3,2)`-isometry.
pub fn jordan() -> OperatorSpec {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]).map(|v| Complex64::new(v, 0.0));
    OperatorSpec::Dense(DenseMatrix::new(Field::Complex, m, NormKind::l2()).expect("fixture matrix is valid"))
}

/// Weighted shift with Bayart weights on `l_{p_w}`: a strict `(2, p_w)`-isometry.
pub fn bayart_shift(lambda: f64, p_w: f64, truncation: usize) -> Result<OperatorSpec> {
    make_bayart_shift(lambda, p_w, NormKind::P(p_w), truncation)
}

/// `[[0,1],[-1,1]]`, whose cube is `-I`.
pub fn rot3(norm: NormKind) -> OperatorSpec {
    real(&[&[0.0, 1.0], &[-1.0, 1.0]], norm)
}

/// `[[4,5],[-3,-4]]`, an involution.
pub fn involution(norm: NormKind) -> OperatorSpec {
    real(&[&[4.0, 5.0], &[-3.0, -4.0]], norm)
}

/// Plane rotation by `theta`.
pub fn rotation(theta: f64, norm: NormKind) -> OperatorSpec {
    let (s, c) = theta.sin_cos();
    real(&[&[c, -s], &[s, c]], norm)
}

pub const PRESETS: [&str; 4] = ["jordan", "bayart-shift", "rot3", "involution"];
