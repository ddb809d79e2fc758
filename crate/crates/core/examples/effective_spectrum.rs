//! The hydrogen-like effective operator: discrete eigenvalues on `(0, b)`
//! against `−N_ω²/(2j + n − 2)²`, and how the Dirichlet end at `b` limits
//! the third eigenvalue.

use conespec::assembly::{assemble_effective, EndCondition, Mesh1D};
use conespec::eigensolve::{solve, SolveOptions};
use conespec::oracles::{effective_exact, EffectiveSpec};
use conespec::verify::{EFFECTIVE_CELLS, EFFECTIVE_FIRST_CELL};

fn main() -> conespec::Result<()> {
    for (n, n_omega) in [(2, 2.0), (3, 3.0)] {
        let spec = EffectiveSpec { n, n_omega, lambda: 1.0 };
        println!("n = {n}, N_ω = {n_omega}, λ = 1");
        println!("{:>5} {:>3} {:>20} {:>20} {:>12}", "b", "j", "E_j (discrete)", "E_j (exact)", "gap/|E_j|");
        for b in [40.0, 60.0, 80.0] {
            let mesh = Mesh1D::with_first_cell(0.0, b, EFFECTIVE_CELLS, EFFECTIVE_FIRST_CELL * b / 40.0)?;
            let asm = assemble_effective(&spec, &mesh, EndCondition::Dirichlet)?;
            let spectrum = solve(&asm, 0.0, &SolveOptions::smallest(3))?;
            for j in 1..=3 {
                let (e, exact) = (spectrum.value(j)?, effective_exact(&spec, j)?);
                println!("{b:>5} {j:>3} {e:>20.14} {exact:>20.14} {:>12.3e}", (e - exact) / exact.abs());
            }
        }
        println!();
    }
    Ok(())
}
