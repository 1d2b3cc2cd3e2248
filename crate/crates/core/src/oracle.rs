//! Classical solution of an absorbing chain: `N = (I - Q)^-1`, `B = N R`,
//! in exact arithmetic. Serves as the reference the abacus is checked
//! against.

use crate::chain::{canonical_form, ChainSpec};
use crate::engine::ResultMatrices;
use crate::matrix::{MatrixError, RationalMatrix};

pub fn fundamental_matrix(q: &RationalMatrix) -> Result<RationalMatrix, MatrixError> {
    if q.rows() != q.cols() {
        return Err(MatrixError::NotSquare {
            rows: q.rows(),
            cols: q.cols(),
        });
    }
    RationalMatrix::identity(q.rows()).sub(q)?.inverse()
}

pub fn absorption_matrix(n: &RationalMatrix, r: &RationalMatrix) -> Result<RationalMatrix, MatrixError> {
    n.mul(r)
}

/// `N` and `B` for a chain via its canonical form.
pub fn matrix_solve(spec: &ChainSpec) -> Result<ResultMatrices, MatrixError> {
    let cf = canonical_form(spec);
    let n = fundamental_matrix(&cf.q)?;
    let b = absorption_matrix(&n, &cf.r)?;
    Ok(ResultMatrices {
        n,
        b,
        transient: cf.transient,
        absorbing: cf.absorbing,
    })
}
