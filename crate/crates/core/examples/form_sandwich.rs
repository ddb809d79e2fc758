//! The cone form between its two comparison forms, `p⁻(u) ≤ p(u) ≤ p⁺(u)`,
//! on random vectors; prints the tightest margins seen per configuration.

use conespec::asymptotics::{default_mode, truncation_rule, MeshRules};
use conespec::assembly::cone_form_bounds;
use conespec::verify::shipped_configurations;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> conespec::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:<22} {:>5} {:>8} {:>14} {:>14}", "cross-section", "eps", "dof", "min (p-p⁻)/|p|", "min (p⁺-p)/|p|");
    for (cs, eps) in shipped_configurations()? {
        let rules = MeshRules { s_cells: 40, first_cell: 0.05, grading: None, t_cells: 6 };
        let a = truncation_rule(eps, 1, cs.n_omega, cs.n());
        let forms = cone_form_bounds(&cs, eps, a, &rules.s_mesh(eps, a)?, rules.t_mesh(), default_mode(&cs))?;
        let (mut below, mut above) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..100 {
            let u: Vec<f64> = (0..forms.exact.nrows()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = forms.exact.quadratic_form(&u);
            below = below.min((p - forms.lower.quadratic_form(&u)) / p.abs());
            above = above.min((forms.upper.quadratic_form(&u) - p) / p.abs());
        }
        println!("{:<22} {:>5} {:>8} {:>14.3e} {:>14.3e}", cs.id(), eps, forms.exact.nrows(), below, above);
    }
    Ok(())
}
