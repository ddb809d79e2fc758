//! `dE₁(ω; r)/dr` at `r = 0` equals `−|∂ω|/|ω| = −N_ω`: Richardson
//! extrapolated centered differences of the reference values and of the
//! discrete ground state.

use conespec::assembly::{assemble_cross_section_robin, TransverseMesh};
use conespec::eigensolve::{solve, SolveOptions};
use conespec::geometry::{make_cross_section, CrossSectionSpec, Shape};
use conespec::oracles::{ball_robin_radial_oracle, interval_robin_oracle, rectangle_separation, richardson_slope};

fn main() -> conespec::Result<()> {
    let h = 1e-3;
    println!("{:<18} {:>8} {:>18} {:>18}", "cross-section", "-N_ω", "slope (reference)", "slope (discrete)");
    for name in ["interval", "disk", "ball3", "rect:2x1"] {
        let cs = make_cross_section(&CrossSectionSpec::from_name(name)?)?;
        let reference = richardson_slope(
            |r| match &cs.shape {
                Shape::Interval { half_length } => Ok(interval_robin_oracle(r, *half_length, 1)?.values[0]),
                Shape::Rectangle { sides } => Ok(rectangle_separation(r, sides, 1)?[0]),
                Shape::Ball { n, .. } => ball_robin_radial_oracle(*n, r, 1e-15),
                Shape::Annulus { .. } => unreachable!(),
            },
            h,
        )?;
        let cells = if matches!(cs.shape, Shape::Rectangle { .. }) { 64 } else { 2000 };
        let asm = assemble_cross_section_robin(&cs, TransverseMesh { cells })?;
        let discrete = richardson_slope(|r| solve(&asm, r, &SolveOptions::smallest(1))?.value(1), h)?;
        println!("{:<18} {:>8.4} {:>18.12} {:>18.12}", cs.id(), -cs.n_omega, reference, discrete);
    }
    Ok(())
}
