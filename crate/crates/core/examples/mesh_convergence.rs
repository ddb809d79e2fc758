//! Nested refinement of the round cone at ε = 0.2: errors against the
//! exact ground state and the observed order.

use conespec::asymptotics::{mesh_convergence, truncation_rule, MeshRules};
use conespec::assembly::ConeMode;
use conespec::eigensolve::SolveOptions;
use conespec::geometry::{make_cross_section, CrossSectionSpec};
use conespec::oracles::round_cone_exact;

fn main() -> conespec::Result<()> {
    let cs = make_cross_section(&CrossSectionSpec::ball(2, 1.0))?;
    let eps = 0.2;
    let a = truncation_rule(eps, 1, cs.n_omega, cs.n());
    let base = MeshRules { s_cells: 40, first_cell: 0.05, grading: None, t_cells: 4 };
    let study = mesh_convergence(&cs, eps, 1, a, 5, ConeMode::Fourier { m: 0 }, &base, &SolveOptions::default())?;
    let exact = round_cone_exact(eps)?.value;
    println!("{:>8} {:>18} {:>12} {:>8}", "dof", "E1", "E1 - exact", "ratio");
    let mut previous = None;
    for (&v, &dof) in study.values.iter().zip(&study.dofs) {
        let err = v - exact;
        let ratio = previous.map(|p: f64| format!("{:.2}", p / err)).unwrap_or_default();
        println!("{dof:>8} {v:>18.12} {err:>12.3e} {ratio:>8}");
        previous = Some(err);
    }
    println!("observed order from successive differences: {:?}", study.order);
    Ok(())
}
