//! Dense reference path: Cholesky of the mass matrix, then a symmetric
//! eigendecomposition of `L⁻¹ A L⁻ᵀ`.

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Par, Side};

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

fn to_dense(m: &CsrMatrix) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for (j, v) in m.row(i) {
            out[(i, j)] += v;
        }
    }
    out
}

/// All eigenpairs of `A x = λ M x`, ascending, with `M`-orthonormal vectors.
pub fn eigen_all(a: &CsrMatrix, m: &CsrMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.nrows();
    let llt = to_dense(m).llt(Side::Lower).map_err(|_| Error::SingularMass { pivot: 0, value: f64::NAN })?;
    let l = llt.L();
    // C = L⁻¹ A L⁻ᵀ, symmetrized against rounding
    let mut la = to_dense(a);
    solve_lower_triangular_in_place(l, la.as_mut(), Par::Seq);
    let mut c = la.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let c = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let eig = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NoConvergence(format!("dense symmetric eigensolver: {e:?}")))?;
    let s = eig.S().column_vector();
    let mut x = eig.U().to_owned();
    solve_upper_triangular_in_place(l.transpose(), x.as_mut(), Par::Seq);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let values = order.iter().map(|&i| s[i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|r| x[(r, i)]).collect()).collect();
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pencil() {
        let a = CsrMatrix::from_diagonal(&[3.0, 1.0, 8.0]);
        let m = CsrMatrix::from_diagonal(&[1.0, 1.0, 2.0]);
        let (v, x) = eigen_all(&a, &m).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 3.0).abs() < 1e-14 && (v[2] - 4.0).abs() < 1e-14);
        assert!((m.quadratic_form(&x[2]) - 1.0).abs() < 1e-14);
    }
}
