//! Extremal eigenvalues of dense Hermitian operators.
//!
//! Operators whose entries are all real go through the real symmetric
//! solver; anything else uses the complex Hermitian one.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{hermitian_deviation, HermitianOperator, StateVector};

/// Largest operator dimension accepted by the dense solvers.
pub const MAX_DENSE_DIM: usize = 4096;

const HERMITIAN_TOL: f64 = 1e-12;
const SOLVER_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 10_000;

fn checked_real(op: &HermitianOperator) -> Result<Option<DMatrix<f64>>> {
    if op.dim() > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge(op.dim()));
    }
    let deviation = hermitian_deviation(op.matrix());
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let m = op.matrix();
    Ok(m.iter().all(|z| z.im == 0.0).then(|| m.map(|z| z.re)))
}

/// Eigenvalues sorted ascending, with eigenvectors as matching columns.
fn decompose(op: &HermitianOperator) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let (values, vectors) = match checked_real(op)? {
        Some(real) => {
            let eig = SymmetricEigen::try_new(real, SOLVER_EPS, MAX_SWEEPS).ok_or(Error::ConvergenceFailure)?;
            (
                eig.eigenvalues.as_slice().to_vec(),
                eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            )
        }
        None => {
            let eig = SymmetricEigen::try_new(op.matrix().clone(), SOLVER_EPS, MAX_SWEEPS)
                .ok_or(Error::ConvergenceFailure)?;
            (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
        }
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = order.iter().map(|&i| values[i]).collect();
    let columns = DMatrix::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    Ok((sorted, columns))
}

/// All eigenvalues, ascending.
pub fn eigenvalues(op: &HermitianOperator) -> Result<Vec<f64>> {
    match checked_real(op)? {
        Some(real) => {
            let values = SymmetricEigen::try_new(real, SOLVER_EPS, MAX_SWEEPS)
                .ok_or(Error::ConvergenceFailure)?
                .eigenvalues;
            let mut v = values.as_slice().to_vec();
            v.sort_by(f64::total_cmp);
            Ok(v)
        }
        None => Ok(decompose(op)?.0),
    }
}

pub fn max_eigenvalue(op: &HermitianOperator) -> Result<f64> {
    eigenvalues(op)?.last().copied().ok_or(Error::ConvergenceFailure)
}

/// Largest eigenvalue and a normalized eigenvector for it.
pub fn top_eigenpair(op: &HermitianOperator) -> Result<(f64, StateVector)> {
    let (values, vectors) = decompose(op)?;
    let top = values.len() - 1;
    let column = vectors.column(top).iter().copied().collect();
    Ok((values[top], StateVector::new(op.n_sites(), column)?))
}
