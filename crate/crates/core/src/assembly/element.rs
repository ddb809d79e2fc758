//! P1 matrices on a 1D mesh against power weights `x^p`, integrated exactly.

use super::Mesh1D;
use crate::quadrature::CellMoments;
use crate::sparse::{CsrMatrix, Triplets};

/// `M[a][b] = ∫ x^p φa φb dx`.
pub fn weighted_mass(mesh: &Mesh1D, p: i32) -> CsrMatrix {
    let n = mesh.nodes().len();
    let mut t = Triplets::with_capacity(n, n, 4 * mesh.cells());
    for (i, w) in mesh.nodes().windows(2).enumerate() {
        let m = CellMoments::new(w[0], w[1] - w[0], p);
        t.push(i, i, m.phi00);
        t.push(i, i + 1, m.phi01);
        t.push(i + 1, i, m.phi01);
        t.push(i + 1, i + 1, m.phi11);
    }
    t.to_csr()
}

/// `K[a][b] = ∫ x^p φa' φb' dx`.
pub fn weighted_stiffness(mesh: &Mesh1D, p: i32) -> CsrMatrix {
    let n = mesh.nodes().len();
    let mut t = Triplets::with_capacity(n, n, 4 * mesh.cells());
    for (i, w) in mesh.nodes().windows(2).enumerate() {
        let h = w[1] - w[0];
        let k = CellMoments::new(w[0], h, p).one / (h * h);
        t.push(i, i, k);
        t.push(i, i + 1, -k);
        t.push(i + 1, i, -k);
        t.push(i + 1, i + 1, k);
    }
    t.to_csr()
}

/// `D[a][b] = ∫ x^p φa' φb dx` (derivative on the row index; not symmetric).
pub fn weighted_derivative(mesh: &Mesh1D, p: i32) -> CsrMatrix {
    let n = mesh.nodes().len();
    let mut t = Triplets::with_capacity(n, n, 4 * mesh.cells());
    for (i, w) in mesh.nodes().windows(2).enumerate() {
        let h = w[1] - w[0];
        let m = CellMoments::new(w[0], h, p);
        t.push(i, i, -m.phi0 / h);
        t.push(i, i + 1, -m.phi1 / h);
        t.push(i + 1, i, m.phi0 / h);
        t.push(i + 1, i + 1, m.phi1 / h);
    }
    t.to_csr()
}

/// Rank-one matrix `e_i e_iᵀ` of size `n`.
pub fn point_mass(n: usize, i: usize, weight: f64) -> CsrMatrix {
    let mut t = Triplets::new(n, n);
    t.push(i, i, weight);
    t.to_csr()
}
