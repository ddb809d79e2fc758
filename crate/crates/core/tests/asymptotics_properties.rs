//! Sweep, fit and refinement-study behaviour on the shipped cross-sections.

use std::sync::OnceLock;

use conespec::assembly::element::{weighted_mass, weighted_stiffness};
use conespec::assembly::Mesh1D;
use conespec::asymptotics::{
    convergence_order, default_mode, fit_samples, leading_target, mesh_convergence, sweep, ConvergenceOrder,
    MeshRules, SweepTable, DEFAULT_EPS,
};
use conespec::eigensolve::{solve_pencil, SolveOptions};
use conespec::geometry::{make_cross_section, CrossSection, CrossSectionSpec};
use conespec::sparse::CsrMatrix;

/// Lower sanity constant `k′` in `E_j ≥ −target/ε² − k′/ε`; calibrated
/// once at ε = 0.3 on the disk and interval and kept fixed.
const K_PRIME: f64 = 0.3;

fn disk() -> CrossSection {
    make_cross_section(&CrossSectionSpec::ball(2, 1.0)).unwrap()
}

fn interval() -> CrossSection {
    make_cross_section(&CrossSectionSpec::interval(1.0)).unwrap()
}

fn table(cs: &CrossSection, eps: &[f64]) -> SweepTable {
    sweep(cs, eps, 2, default_mode(cs), &MeshRules::for_cross_section(cs), &SolveOptions::default()).unwrap()
}

fn default_tables() -> &'static [(CrossSection, SweepTable); 2] {
    static TABLES: OnceLock<[(CrossSection, SweepTable); 2]> = OnceLock::new();
    TABLES.get_or_init(|| {
        let (d, i) = (disk(), interval());
        let (td, ti) = (table(&d, &DEFAULT_EPS), table(&i, &DEFAULT_EPS));
        [(d, td), (i, ti)]
    })
}

#[test]
fn default_sweeps_respect_the_lower_sanity_bound() {
    for (cs, t) in default_tables() {
        for row in &t.rows {
            let e = row.value.unwrap_or_else(|| panic!("{} eps {} failed: {:?}", cs.id(), row.eps, row.error));
            let bound = -leading_target(cs.n_omega, cs.n(), row.j) / (row.eps * row.eps) - K_PRIME / row.eps;
            assert!(e >= bound, "{} eps {} j {}: {e} below {bound}", cs.id(), row.eps, row.j);
        }
    }
}

#[test]
fn sweep_rows_are_ordered_and_certified() {
    for (cs, t) in default_tables() {
        assert_eq!(t.rows.len(), 2 * DEFAULT_EPS.len());
        for pair in t.rows.chunks(2) {
            assert_eq!(pair[0].eps, pair[1].eps);
            assert!(pair[0].value.unwrap() <= pair[1].value.unwrap(), "{} eps {}", cs.id(), pair[0].eps);
            for r in pair {
                assert!(r.residual.unwrap() <= t.tol, "{} residual {:?}", cs.id(), r.residual);
            }
        }
    }
}

#[test]
fn smaller_eps_windows_fit_better() {
    let coarse = [0.3, 0.2, 0.15, 0.1];
    let fine = [0.15, 0.1, 0.07, 0.05];
    for (cs, t) in default_tables() {
        let extra = table(cs, &[0.3]);
        for j in 1..=2 {
            let target = leading_target(cs.n_omega, cs.n(), j);
            let samples = |window: &[f64]| -> Vec<(f64, f64)> {
                let mut all = t.values(j);
                all.extend(extra.values(j));
                all.into_iter().filter(|(e, _)| window.contains(e)).collect()
            };
            let c = fit_samples(&samples(&coarse), j, target).unwrap();
            let f = fit_samples(&samples(&fine), j, target).unwrap();
            assert_eq!(f.eps.len(), 4);
            assert!(f.rel_error <= c.rel_error, "{} j {j}: fine {} vs coarse {}", cs.id(), f.rel_error, c.rel_error);
        }
    }
}

#[test]
fn round_cone_converges_at_second_order() {
    let rules = MeshRules { s_cells: 20, first_cell: 0.05, grading: None, t_cells: 2 };
    let study = mesh_convergence(&disk(), 0.2, 1, 2.0, 4, default_mode(&disk()), &rules, &SolveOptions::default())
        .unwrap();
    match study.order {
        ConvergenceOrder::Observed(p) => assert!((1.8..=2.2).contains(&p), "order {p}, values {:?}", study.values),
        other => panic!("unexpected {other:?}"),
    }
    assert!(study.dofs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn constants_in_the_space_are_reported_as_exact() {
    // free-ended weighted pencil (K_s + M_s, M_s) on (1/2, 2): the constant
    // is the ground state with value 1 on every mesh
    let mut mesh = Mesh1D::with_first_cell(0.5, 2.0, 6, 0.05).unwrap();
    let mut values = Vec::new();
    for _ in 0..3 {
        let (k, m) = (weighted_stiffness(&mesh, 1), weighted_mass(&mesh, 1));
        let a = CsrMatrix::linear_combination(&[(1.0, &k), (1.0, &m)]).unwrap();
        let s = solve_pencil(&a, &m, 0.5, &SolveOptions::smallest(1)).unwrap();
        values.push(s.values[0]);
        mesh = mesh.refine();
    }
    assert!(values.iter().all(|v| (v - 1.0).abs() < 1e-12), "{values:?}");
    assert_eq!(convergence_order(&values).unwrap(), ConvergenceOrder::Exact);
}
