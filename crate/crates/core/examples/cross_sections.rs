//! The cross-section catalog: measures, `N_ω`, `R`, and the Robin ground
//! state at `r = 1` against the reference value where one exists.

use conespec::assembly::{assemble_cross_section_robin, TransverseMesh};
use conespec::eigensolve::{solve, SolveOptions};
use conespec::geometry::{make_cross_section, CrossSectionSpec, Shape};
use conespec::oracles::{ball_robin_radial_oracle, interval_robin_oracle, rectangle_separation};

fn main() -> conespec::Result<()> {
    println!(
        "{:<22} {:>2} {:>10} {:>10} {:>8} {:>8} {:>16} {:>16}",
        "cross-section", "n", "|ω|", "|∂ω|", "N_ω", "R", "E1(r=1)", "reference"
    );
    for name in ["interval", "disk", "ball3", "ball4", "square", "rect:2x1", "annulus:0.5:1"] {
        let cs = make_cross_section(&CrossSectionSpec::from_name(name)?)?;
        let cells = if matches!(cs.shape, Shape::Rectangle { .. }) { 64 } else { 2000 };
        let asm = assemble_cross_section_robin(&cs, TransverseMesh { cells })?;
        let e1 = solve(&asm, 1.0, &SolveOptions::smallest(1))?.value(1)?;
        let reference = match &cs.shape {
            Shape::Interval { half_length } => Some(interval_robin_oracle(1.0, *half_length, 1)?.values[0]),
            Shape::Rectangle { sides } => Some(rectangle_separation(1.0, sides, 1)?[0]),
            Shape::Ball { n, radius } => Some(ball_robin_radial_oracle(*n, *radius, 1e-15)? / (radius * radius)),
            Shape::Annulus { .. } => None,
        };
        println!(
            "{:<22} {:>2} {:>10.6} {:>10.6} {:>8.4} {:>8.4} {:>16.10} {:>16}",
            cs.id(),
            cs.n(),
            cs.vol_n,
            cs.surf,
            cs.n_omega,
            cs.radius_r,
            e1,
            reference.map(|r| format!("{r:.10}")).unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}
