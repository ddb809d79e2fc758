//! Default ε-sweeps of the disk and interval cones and the least-squares
//! fit `E_j ≈ −C/ε² + D/ε`, with `C` compared to `N_ω²/(2j + n − 2)²`.

use conespec::asymptotics::{default_mode, fit_leading, sweep, MeshRules, DEFAULT_EPS};
use conespec::eigensolve::SolveOptions;
use conespec::geometry::{make_cross_section, CrossSectionSpec};

fn main() -> conespec::Result<()> {
    for name in ["disk", "interval"] {
        let cs = make_cross_section(&CrossSectionSpec::from_name(name)?)?;
        let rules = MeshRules::for_cross_section(&cs);
        let table = sweep(&cs, &DEFAULT_EPS, 2, default_mode(&cs), &rules, &SolveOptions::default())?;
        println!("{}", cs.id());
        println!("{:>6} {:>3} {:>18} {:>12}", "eps", "j", "E_j", "E_j·ε²");
        for row in &table.rows {
            if let Some(v) = row.value {
                println!("{:>6} {:>3} {:>18.10} {:>12.6}", row.eps, row.j, v, v * row.eps * row.eps);
            }
        }
        for j in [1, 2] {
            let fit = fit_leading(&table, j)?;
            println!(
                "  j = {j}: C = {:.6}  D = {:.4}  target = {:.6}  rel_error = {:.2}%",
                fit.c,
                fit.d,
                fit.target,
                100.0 * fit.rel_error
            );
        }
        println!();
    }
    Ok(())
}
