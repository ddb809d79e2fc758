//! The generalized eigensolver on its own: a Dirichlet Laplacian pencil on
//! `(0, π)`, solved densely and by shift-invert Lanczos, certified from the
//! matrices, against the discrete sine transform values.

use std::f64::consts::PI;

use conespec::assembly::element::{weighted_mass, weighted_stiffness};
use conespec::assembly::Mesh1D;
use conespec::eigensolve::{residual, solve_pencil, Shift, SolveOptions};

fn main() -> conespec::Result<()> {
    let cells = 1500;
    let mesh = Mesh1D::uniform(0.0, PI, cells)?;
    let keep: Vec<usize> = (1..cells).collect();
    let (k, m) = (weighted_stiffness(&mesh, 0).restrict(&keep), weighted_mass(&mesh, 0).restrict(&keep));
    let h = PI / cells as f64;
    let exact = |j: usize| {
        let c = (j as f64 * h).cos();
        6.0 / (h * h) * (1.0 - c) / (2.0 + c)
    };
    for (label, dense_threshold) in [("dense", usize::MAX), ("lanczos", 0)] {
        let opts = SolveOptions { k: 6, dense_threshold, shift: Shift::Value(0.0), ..Default::default() };
        let s = solve_pencil(&k, &m, 0.0, &opts)?;
        println!("{label}: {:?} dim {} iterations {} passes {}", s.stats.path, s.stats.dim, s.stats.iterations, s.stats.passes);
        for (j, (&v, x)) in s.values.iter().zip(&s.vectors).enumerate() {
            println!(
                "  E_{} = {v:.14}  |E - exact| = {:.1e}  backward error = {:.1e}",
                j + 1,
                (v - exact(j + 1)).abs(),
                residual(&k, &m, v, x)
            );
        }
    }
    Ok(())
}
