//! The trace constant `C_δ` of the truncated disk cone at ε = 0.3, a = 1:
//! the largest eigenvalue of `(boundary − δ·energy, mass)`, on three
//! refinement levels.

use conespec::asymptotics::MeshRules;
use conespec::assembly::{assemble_trace_problem, ConeMode};
use conespec::eigensolve::{solve, SolveOptions};
use conespec::geometry::{make_cross_section, CrossSectionSpec};
use conespec::verify::TRACE_LEVELS;

fn main() -> conespec::Result<()> {
    let cs = make_cross_section(&CrossSectionSpec::ball(2, 1.0))?;
    let (eps, a) = (0.3, 1.0);
    println!("{:>8} {:>8} {:>16} {:>16} {:>16}", "s-cells", "dof", "δ = 0.1", "δ = 0.5", "δ = 1");
    for s_cells in TRACE_LEVELS {
        let rules = MeshRules::trace(s_cells);
        let s_mesh = rules.s_mesh(eps, a)?;
        let mut line = String::new();
        let mut dof = 0;
        for delta in [0.1, 0.5, 1.0] {
            let asm = assemble_trace_problem(&cs, eps, a, delta, &s_mesh, rules.t_mesh(), ConeMode::Fourier { m: 0 })?;
            let coupling = asm.meta.coupling.unwrap_or(-1.0);
            let c = solve(&asm, coupling, &SolveOptions::largest(1))?.value(1)?.max(0.0);
            dof = asm.dim();
            line.push_str(&format!(" {c:>16.8}"));
        }
        println!("{s_cells:>8} {dof:>8}{line}");
    }
    Ok(())
}
