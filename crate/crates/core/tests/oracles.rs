//! Pinned oracle values and their cross-checks against the assembled
//! discretizations.

use approx::assert_relative_eq;
use conespec::assembly::{assemble_cross_section_robin, assemble_effective, EndCondition, Mesh1D, TransverseMesh};
use conespec::eigensolve::{solve, SolveOptions};
use conespec::geometry::{make_cross_section, CrossSectionSpec};
use conespec::oracles::{
    ball_robin_radial_oracle, effective_exact, exterior_lower_bound, interval_robin_oracle, rectangle_separation,
    EffectiveSpec,
};
use proptest::prelude::*;

/// Radial Robin ground state of the unit disk at r = 1.
/// Generated by `ball_robin_radial_oracle(2, 1.0, 1e-15)`; an independent
/// root of `k I₁(k)/I₀(k) = 1` (SciPy `iv` + `brentq`) gives
/// −2.5865628591780894.
const DISK_R1_GOLDEN: f64 = -2.586562859178089;

#[test]
fn disk_golden_value() {
    let e = ball_robin_radial_oracle(2, 1.0, 1e-15).unwrap();
    assert_relative_eq!(e, DISK_R1_GOLDEN, max_relative = 1e-14);
}

#[test]
fn disk_golden_matches_radial_assembly() {
    let cs = make_cross_section(&CrossSectionSpec::ball(2, 1.0)).unwrap();
    let asm = assemble_cross_section_robin(&cs, TransverseMesh { cells: 8000 }).unwrap();
    let e = solve(&asm, 1.0, &SolveOptions::smallest(1)).unwrap().value(1).unwrap();
    assert!(e > DISK_R1_GOLDEN, "Rayleigh-Ritz value {e} below the exact one");
    assert!(e - DISK_R1_GOLDEN < 1e-8, "gap {:e}", e - DISK_R1_GOLDEN);
}

#[test]
fn zero_coupling_gives_the_neumann_ground_state() {
    for name in ["interval", "disk", "ball3", "rect:2x1", "annulus:0.5:1"] {
        let cs = make_cross_section(&CrossSectionSpec::from_name(name).unwrap()).unwrap();
        let asm = assemble_cross_section_robin(&cs, TransverseMesh { cells: 40 }).unwrap();
        let s = solve(&asm, 0.0, &SolveOptions::smallest(1)).unwrap();
        assert!(s.values[0].abs() < 1e-10, "{name}: {}", s.values[0]);
        let x = &s.vectors[0];
        let spread = x.iter().fold(0.0f64, |m, v| m.max((v - x[0]).abs()));
        assert!(spread < 1e-8 * x[0].abs(), "{name}: eigenvector not constant");
    }
}

#[test]
fn small_coupling_on_the_disk() {
    // E₁ = −N_ω r + O(r²) with N_ω = 2
    let e = ball_robin_radial_oracle(2, 0.01, 1e-15).unwrap();
    assert!((e + 0.02).abs() < 1e-4, "{e}");
}

#[test]
fn exterior_bound_examples() {
    assert_eq!(exterior_lower_bound(2.0, 0.1, 1.0).unwrap(), -20.0);
    assert_relative_eq!(exterior_lower_bound(2.0, 0.1, 0.25).unwrap(), -80.0, max_relative = 1e-15);
    let spec = EffectiveSpec { n: 2, n_omega: 2.0, lambda: 0.1 };
    let asm = assemble_effective(&spec, &Mesh1D::uniform(1.0, 50.0, 800).unwrap(), EndCondition::Dirichlet).unwrap();
    let s = solve(&asm, 0.0, &SolveOptions::smallest(5)).unwrap();
    assert!(s.values.iter().all(|&v| v >= -20.0), "{:?}", s.values);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_roots_solve_their_equations(r in 0.05f64..20.0, l in 0.1f64..5.0) {
        let roots = interval_robin_oracle(r, l, 4).unwrap();
        let k = (-roots.values[0]).sqrt();
        prop_assert!((k * (k * l).tanh() - r).abs() <= 1e-12 * r.max(1.0));
        prop_assert!(roots.values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rectangle_ground_state_is_the_sum_of_sides(r in -3.0f64..3.0, a in 0.2f64..4.0, b in 0.2f64..4.0) {
        let sum = interval_robin_oracle(r, 0.5 * a, 1).unwrap().values[0] + interval_robin_oracle(r, 0.5 * b, 1).unwrap().values[0];
        let rect = rectangle_separation(r, &[a, b], 1).unwrap()[0];
        prop_assert!((rect - sum).abs() <= 1e-12 * sum.abs().max(1.0));
    }

    #[test]
    fn ball_oracle_scales_with_radius(n in 2usize..6, r in 0.1f64..5.0, radius in 0.3f64..3.0) {
        // E(B_R, r) = E(B_1, rR)/R², the identity the CLI uses for radius ≠ 1
        let cs = make_cross_section(&CrossSectionSpec::ball(n, radius)).unwrap();
        let asm = assemble_cross_section_robin(&cs, TransverseMesh { cells: 400 }).unwrap();
        let discrete = solve(&asm, r, &SolveOptions::smallest(1)).unwrap().value(1).unwrap();
        let oracle = ball_robin_radial_oracle(n, r * radius, 1e-15).unwrap() / (radius * radius);
        prop_assert!(discrete >= oracle - 1e-12 * oracle.abs());
        prop_assert!((discrete - oracle).abs() <= 1e-4 * oracle.abs().max(1.0));
    }

    #[test]
    fn effective_closed_form_scales(n in 2usize..5, n_omega in 0.5f64..6.0, lambda in 0.1f64..10.0, j in 1usize..5) {
        let base = effective_exact(&EffectiveSpec { n, n_omega, lambda: 1.0 }, j).unwrap();
        let scaled = effective_exact(&EffectiveSpec { n, n_omega, lambda }, j).unwrap();
        prop_assert!((scaled - base / (lambda * lambda)).abs() <= 1e-14 * base.abs() / (lambda * lambda));
    }
}
