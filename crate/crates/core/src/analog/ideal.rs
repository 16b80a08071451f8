//! Transfer-function models of the two circuits.

use crate::error::{Error, Result};
use crate::linalg::{Lu, Vector};
use crate::mapping::ProgrammedArray;

/// `v_out = −(G/G₀)·v_in`.
pub fn mvm_ideal(arr: &ProgrammedArray, v_in: &[f64]) -> Result<Vector> {
    if arr.cols() != v_in.len() {
        return Err(Error::Dimension(format!(
            "array has {} columns, input has {} entries",
            arr.cols(),
            v_in.len()
        )));
    }
    Ok(arr.effective().matvec(v_in)?.neg())
}

/// Factors `G/G₀` for repeated inversions.
pub fn factor_ideal(arr: &ProgrammedArray) -> Result<Lu> {
    if arr.rows() != arr.cols() {
        return Err(Error::Dimension(format!(
            "INV needs a square array, got {}x{}",
            arr.rows(),
            arr.cols()
        )));
    }
    Lu::factor(&arr.effective())
}

/// Equilibrium of `G₀·v_in + G·v_out = 0`, i.e. `v_out = −(G/G₀)⁻¹·v_in`.
pub fn inv_ideal(arr: &ProgrammedArray, v_in: &[f64]) -> Result<Vector> {
    inv_with_factor(&factor_ideal(arr)?, v_in)
}

pub(crate) fn inv_with_factor(lu: &Lu, v_in: &[f64]) -> Result<Vector> {
    Ok(lu.solve(v_in)?.neg())
}
