//! Ground state of the cone over a disk, where the exact value
//! `−(1 + ε²)/ε²` is known, on the default mesh.

use conespec::asymptotics::{truncation_rule, MeshRules};
use conespec::assembly::{assemble_cone, ConeMode};
use conespec::eigensolve::{solve, SolveOptions};
use conespec::geometry::{make_cross_section, CrossSectionSpec};
use conespec::oracles::round_cone_exact;

fn main() -> conespec::Result<()> {
    let cs = make_cross_section(&CrossSectionSpec::ball(2, 1.0))?;
    let rules = MeshRules::for_cross_section(&cs);
    println!("{:>6} {:>16} {:>16} {:>10} {:>8} {:>9}", "eps", "E1 (discrete)", "E1 (exact)", "rel gap", "dof", "ms");
    for eps in [0.3, 0.2, 0.1, 0.05] {
        let a = truncation_rule(eps, 1, cs.n_omega, cs.n());
        let s_mesh = rules.s_mesh(eps, a)?;
        let asm = assemble_cone(&cs, eps, a, &s_mesh, rules.t_mesh(), ConeMode::Fourier { m: 0 })?;
        let spectrum = solve(&asm, 1.0, &SolveOptions::smallest(1))?;
        let exact = round_cone_exact(eps)?.value;
        let e1 = spectrum.values[0];
        println!(
            "{eps:>6} {e1:>16.9} {exact:>16.9} {:>10.2e} {:>8} {:>9.1}",
            (e1 - exact) / exact.abs(),
            asm.dim(),
            spectrum.stats.wall_ms
        );
    }
    Ok(())
}
