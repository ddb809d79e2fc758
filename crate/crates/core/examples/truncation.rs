//! Doubling the truncation length on nested meshes: `E_j` can only go
//! down, and for small ε it barely moves.

use conespec::asymptotics::{a_insensitivity, default_mode, truncation_rule, MeshRules};
use conespec::eigensolve::SolveOptions;
use conespec::geometry::{make_cross_section, CrossSectionSpec};

fn main() -> conespec::Result<()> {
    println!(
        "{:<16} {:>5} {:>2} {:>7} {:>18} {:>18} {:>10} {:>9}",
        "cross-section", "eps", "j", "a", "E_j(a)", "E_j(2a)", "shift", "monotone"
    );
    for name in ["disk", "interval"] {
        let cs = make_cross_section(&CrossSectionSpec::from_name(name)?)?;
        let rules = MeshRules::for_cross_section(&cs);
        for eps in [0.2, 0.1, 0.05] {
            for j in [1, 2] {
                let a = truncation_rule(eps, j, cs.n_omega, cs.n());
                let r = a_insensitivity(&cs, eps, j, a, 2.0, default_mode(&cs), &rules, &SolveOptions::default())?;
                println!(
                    "{:<16} {eps:>5} {j:>2} {a:>7.2} {:>18.12} {:>18.12} {:>10.2e} {:>9}",
                    cs.id(),
                    r.e_a,
                    r.e_scaled,
                    r.shift,
                    r.monotone
                );
            }
        }
    }
    Ok(())
}
