//! ε-sweeps of cone eigenvalues and what is done with them: truncation
//! and mesh choices, the least-squares fit of the leading `−C/ε²` term,
//! truncation insensitivity, and observed convergence orders.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{assemble_cone, ConeMode, Mesh1D, TransverseMesh};
use crate::eigensolve::{rayleigh_rounding_bound, solve, SolveOptions, SolveStats};
use crate::geometry::{CrossSection, Shape};
use crate::{Error, Result};

/// Default ε window for sweeps and fits.
pub const DEFAULT_EPS: [f64; 5] = [0.2, 0.15, 0.1, 0.07, 0.05];

/// `a = max(1, 40 ε (2j + n − 2)² / N_ω)`: forty length scales of the
/// `j`-th effective eigenfunction, never shorter than 1.
pub fn truncation_rule(eps: f64, j: usize, n_omega: f64, n: usize) -> f64 {
    let q = (2 * j + n) as f64 - 2.0;
    (40.0 * eps * q * q / n_omega).max(1.0)
}

/// `N_ω² / (2j + n − 2)²`, the coefficient of `−1/ε²`.
pub fn leading_target(n_omega: f64, n: usize, j: usize) -> f64 {
    let q = (2 * j + n) as f64 - 2.0;
    n_omega * n_omega / (q * q)
}

/// Mesh sizes for cone problems: a geometric s-mesh on `(0, a)` whose
/// first cell is `first_cell · ε` (or whose ratio is `grading` when set),
/// and a uniform transverse mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshRules {
    pub s_cells: usize,
    pub first_cell: f64,
    pub grading: Option<f64>,
    pub t_cells: usize,
}

impl MeshRules {
    /// Shipped defaults. The tensor grid of a rectangle grows with the
    /// square of `t_cells`, so it gets a coarser transverse mesh.
    pub fn for_cross_section(cs: &CrossSection) -> Self {
        let t_cells = match cs.shape {
            Shape::Rectangle { .. } => 8,
            _ => 24,
        };
        MeshRules { s_cells: 320, first_cell: 0.05, grading: None, t_cells }
    }

    /// Trace-constant meshes: the extremal functions concentrate at the
    /// boundary on scale `δε`, hence the finer first cell.
    pub fn trace(s_cells: usize) -> Self {
        MeshRules { s_cells, first_cell: 1e-3, grading: None, t_cells: (s_cells / 10).max(2) }
    }

    pub fn s_mesh(&self, eps: f64, a: f64) -> Result<Mesh1D> {
        match self.grading {
            Some(g) => crate::assembly::build_mesh_1d(0.0, a, self.s_cells, g),
            None => Mesh1D::with_first_cell(0.0, a, self.s_cells, self.first_cell * eps),
        }
    }

    pub fn t_mesh(&self) -> TransverseMesh {
        TransverseMesh { cells: self.t_cells }
    }
}

/// Default reduction: the symmetric sector for balls and annuli, the full
/// grid otherwise.
pub fn default_mode(cs: &CrossSection) -> ConeMode {
    match cs.shape {
        Shape::Ball { .. } | Shape::Annulus { .. } => ConeMode::Fourier { m: 0 },
        _ => ConeMode::FullTensor,
    }
}

/// Worker pool capped by `CONESPEC_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CONESPEC_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("CONESPEC_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::Config("CONESPEC_THREADS must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub a: f64,
    pub j: usize,
    pub mode: ConeMode,
    /// `None` when the row failed; see `error`.
    pub value: Option<f64>,
    pub residual: Option<f64>,
    pub dof: usize,
    pub wall_ms: f64,
    pub mesh: String,
    pub solver: Option<SolveStats>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.value.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub cross_section: String,
    pub n: usize,
    pub n_omega: f64,
    pub tol: f64,
    /// Sorted by ε descending, then j ascending.
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn rows_for(&self, j: usize) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.j == j)
    }

    /// `E_j(ε)` for the successful rows of index `j`, in table order.
    pub fn values(&self, j: usize) -> Vec<(f64, f64)> {
        self.rows_for(j).filter_map(|r| r.value.map(|v| (r.eps, v))).collect()
    }
}

fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("empty eps list".into()));
    }
    for (i, &e) in eps_list.iter().enumerate() {
        if !(e > 0.0 && e <= 0.5) {
            return Err(Error::InvalidInput(format!("eps must lie in (0, 0.5], got {e}")));
        }
        if eps_list[..i].contains(&e) {
            return Err(Error::InvalidInput(format!("duplicate eps {e}")));
        }
    }
    Ok(())
}

/// Solves the cone once per ε for the `j_max` lowest eigenvalues, with
/// `a` from [`truncation_rule`] at `j_max`. Rows are computed in parallel
/// and ordered by key, so the table does not depend on scheduling.
pub fn sweep(
    cs: &CrossSection,
    eps_list: &[f64],
    j_max: usize,
    mode: ConeMode,
    rules: &MeshRules,
    opts: &SolveOptions,
) -> Result<SweepTable> {
    check_eps_list(eps_list)?;
    if j_max == 0 {
        return Err(Error::InvalidInput("j_max must be at least 1".into()));
    }
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    let pool = thread_pool()?;
    let blocks: Vec<Vec<SweepRow>> =
        pool.install(|| eps_sorted.par_iter().map(|&eps| sweep_rows(cs, eps, j_max, mode, rules, opts)).collect());
    Ok(SweepTable {
        cross_section: cs.id(),
        n: cs.n(),
        n_omega: cs.n_omega,
        tol: opts.tol,
        rows: blocks.into_iter().flatten().collect(),
    })
}

fn sweep_rows(
    cs: &CrossSection,
    eps: f64,
    j_max: usize,
    mode: ConeMode,
    rules: &MeshRules,
    opts: &SolveOptions,
) -> Vec<SweepRow> {
    let a = truncation_rule(eps, j_max, cs.n_omega, cs.n());
    let start = std::time::Instant::now();
    let outcome = (|| -> Result<(Vec<f64>, Vec<f64>, usize, String, SolveStats)> {
        let s_mesh = rules.s_mesh(eps, a)?;
        let assembly = assemble_cone(cs, eps, a, &s_mesh, rules.t_mesh(), mode)?;
        let spectrum = solve(&assembly, 1.0, &SolveOptions { k: j_max, ..opts.clone() })?;
        if !spectrum.converged {
            return Err(Error::NoConvergence(format!("eps = {eps}")));
        }
        Ok((spectrum.values, spectrum.residuals, assembly.dim(), assembly.meta.mesh, spectrum.stats))
    })();
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    (1..=j_max)
        .map(|j| {
            let mut row = SweepRow {
                eps,
                a,
                j,
                mode,
                value: None,
                residual: None,
                dof: 0,
                wall_ms,
                mesh: String::new(),
                solver: None,
                error: None,
            };
            match &outcome {
                Ok((values, residuals, dof, mesh, stats)) => {
                    row.dof = *dof;
                    row.mesh = mesh.clone();
                    row.solver = Some(stats.clone());
                    match (values.get(j - 1), residuals.get(j - 1)) {
                        (Some(&v), Some(&r)) if r <= opts.tol => {
                            row.value = Some(v);
                            row.residual = Some(r);
                        }
                        (Some(_), Some(&r)) => row.error = Some(format!("residual {r:e} above tolerance")),
                        _ => row.error = Some("fewer eigenvalues than requested".into()),
                    }
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub j: usize,
    /// Coefficient of `−1/ε²`.
    pub c: f64,
    /// Coefficient of `1/ε`.
    pub d: f64,
    pub residual_norm: f64,
    pub target: f64,
    pub rel_error: f64,
    pub eps: Vec<f64>,
}

/// Least squares of `E(ε) ≈ −C/ε² + D/ε` over the given samples.
pub fn fit_samples(samples: &[(f64, f64)], j: usize, target: f64) -> Result<AsymptoticFit> {
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::RankDeficient(format!("{} distinct eps values", distinct.len())));
    }
    let m = samples.len();
    let x = Mat::<f64>::from_fn(m, 2, |i, k| {
        let e = samples[i].0;
        if k == 0 {
            -1.0 / (e * e)
        } else {
            1.0 / e
        }
    });
    let y = Mat::<f64>::from_fn(m, 1, |i, _| samples[i].1);
    let qr = x.qr();
    let r = qr.thin_R();
    if r[(0, 0)].abs() < 1e-300 || r[(1, 1)].abs() < 1e-12 * r[(0, 0)].abs() {
        return Err(Error::RankDeficient("design matrix is singular".into()));
    }
    let coef = qr.solve_lstsq(&y);
    let residual_norm = (&y - &x * &coef).norm_l2();
    let coef = [coef[(0, 0)], coef[(1, 0)]];
    let c = coef[0];
    Ok(AsymptoticFit {
        j,
        c,
        d: coef[1],
        residual_norm,
        target,
        rel_error: (c - target).abs() / target,
        eps: samples.iter().map(|s| s.0).collect(),
    })
}

/// Fits index `j` of a sweep. Every row of that index must have
/// succeeded: failed rows are never dropped silently (select rows and
/// call [`fit_samples`] to fit a subset).
pub fn fit_leading(table: &SweepTable, j: usize) -> Result<AsymptoticFit> {
    let rows: Vec<&SweepRow> = table.rows_for(j).collect();
    if let Some(bad) = rows.iter().find(|r| !r.ok()) {
        return Err(Error::InvalidInput(format!(
            "row eps = {} j = {j} failed ({}); select rows explicitly to fit without it",
            bad.eps,
            bad.error.as_deref().unwrap_or("unknown")
        )));
    }
    if rows.len() < 3 {
        return Err(Error::InvalidInput(format!("fit needs at least 3 rows for j = {j}, got {}", rows.len())));
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps, r.value.unwrap())).collect();
    fit_samples(&samples, j, leading_target(table.n_omega, table.n, j))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Insensitivity {
    pub e_a: f64,
    pub e_scaled: f64,
    /// `|E(a) − E(factor·a)| / |E(a)|`
    pub shift: f64,
    /// Rounding bound of the two computed values together; the exact
    /// change is usually far below it.
    pub rounding: f64,
    /// `E(factor·a) ≤ E(a)` up to `rounding`.
    pub monotone: bool,
}

/// Compares `E_j` on `(0, a)` with `E_j` on `(0, factor·a)`, the longer
/// mesh being the shorter one continued, so the discrete spaces are nested.
pub fn a_insensitivity(
    cs: &CrossSection,
    eps: f64,
    j: usize,
    a: f64,
    factor: f64,
    mode: ConeMode,
    rules: &MeshRules,
    opts: &SolveOptions,
) -> Result<Insensitivity> {
    if !(factor >= 1.0) {
        return Err(Error::InvalidInput(format!("factor must be >= 1, got {factor}")));
    }
    let short = rules.s_mesh(eps, a)?;
    let long = if factor == 1.0 { short.clone() } else { short.extend_to(factor * a)? };
    let k_opts = SolveOptions { k: j, ..opts.clone() };
    let e = |mesh: &Mesh1D| -> Result<(f64, f64)> {
        let asm = assemble_cone(cs, eps, mesh.end(), mesh, rules.t_mesh(), mode)?;
        let s = solve(&asm, 1.0, &k_opts)?;
        let value = s.value(j)?;
        Ok((value, rayleigh_rounding_bound(&asm.pencil(1.0), &asm.mass, value, &s.vectors[j - 1])))
    };
    let (e_a, r_a) = e(&short)?;
    let (e_scaled, r_scaled) = if factor == 1.0 { (e_a, 0.0) } else { e(&long)? };
    let rounding = r_a + r_scaled;
    Ok(Insensitivity {
        e_a,
        e_scaled,
        shift: (e_a - e_scaled).abs() / e_a.abs(),
        rounding,
        monotone: e_scaled <= e_a + rounding,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ConvergenceOrder {
    /// Differences vanish to rounding: the discrete space contains the
    /// eigenfunction.
    Exact,
    Observed(f64),
    /// Values not decreasing under refinement; no order is extrapolated.
    NonMonotone,
}

/// Observed order from the last three values of a nested refinement
/// sequence (mesh size halved per level).
pub fn convergence_order(values: &[f64]) -> Result<ConvergenceOrder> {
    if values.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 refinement levels, got {}", values.len())));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let noise = 1e-13 * scale;
    let diffs: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
    if diffs.iter().all(|d| d.abs() <= noise) {
        return Ok(ConvergenceOrder::Exact);
    }
    if diffs.iter().any(|&d| d < -noise) {
        return Ok(ConvergenceOrder::NonMonotone);
    }
    let (d1, d2) = (diffs[diffs.len() - 2], diffs[diffs.len() - 1]);
    if d2 <= noise {
        return Ok(ConvergenceOrder::NonMonotone);
    }
    Ok(ConvergenceOrder::Observed((d1 / d2).log2()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshStudy {
    pub values: Vec<f64>,
    pub dofs: Vec<usize>,
    pub order: ConvergenceOrder,
}

/// `E_j` of the cone on `levels` nested meshes, each level bisecting
/// every s-cell and doubling the transverse cell count.
pub fn mesh_convergence(
    cs: &CrossSection,
    eps: f64,
    j: usize,
    a: f64,
    levels: usize,
    mode: ConeMode,
    base: &MeshRules,
    opts: &SolveOptions,
) -> Result<MeshStudy> {
    if levels < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 refinement levels, got {levels}")));
    }
    let mut s_mesh = base.s_mesh(eps, a)?;
    let mut t_cells = base.t_cells;
    let mut values = Vec::with_capacity(levels);
    let mut dofs = Vec::with_capacity(levels);
    let k_opts = SolveOptions { k: j, ..opts.clone() };
    for _ in 0..levels {
        let asm = assemble_cone(cs, eps, a, &s_mesh, TransverseMesh { cells: t_cells }, mode)?;
        let s = solve(&asm, 1.0, &k_opts)?;
        values.push(s.value(j)?);
        dofs.push(asm.dim());
        s_mesh = s_mesh.refine();
        t_cells *= 2;
    }
    let order = convergence_order(&values)?;
    Ok(MeshStudy { values, dofs, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn truncation_examples() {
        assert_relative_eq!(truncation_rule(0.1, 1, 2.0, 2), 8.0, max_relative = 1e-14);
        assert_eq!(truncation_rule(0.01, 1, 2.0, 2), 1.0);
        assert!(truncation_rule(0.1, 2, 2.0, 2) >= truncation_rule(0.1, 1, 2.0, 2));
    }

    #[test]
    fn exact_model_is_recovered() {
        let samples: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&e| (e, -5.0 / (e * e) + 3.0 / e)).collect();
        let fit = fit_samples(&samples, 1, 5.0).unwrap();
        assert_relative_eq!(fit.c, 5.0, max_relative = 1e-12);
        assert_relative_eq!(fit.d, 3.0, max_relative = 1e-10);
        assert!(fit.rel_error < 1e-12);
        assert!(fit_samples(&[(0.1, 1.0), (0.1, 2.0)], 1, 1.0).is_err());
    }

    #[test]
    fn eps_list_validation() {
        assert!(check_eps_list(&[0.2, 0.1, 0.2]).is_err());
        assert!(check_eps_list(&[0.6]).is_err());
        assert!(check_eps_list(&[0.2, 0.1]).is_ok());
    }

    #[test]
    fn orders() {
        let v: Vec<f64> = (0..4).map(|l| 1.0 + 0.25f64.powi(l)).collect();
        match convergence_order(&v).unwrap() {
            ConvergenceOrder::Observed(p) => assert_relative_eq!(p, 2.0, max_relative = 1e-10),
            other => panic!("{other:?}"),
        }
        assert_eq!(convergence_order(&[0.0, 0.0, 0.0]).unwrap(), ConvergenceOrder::Exact);
        assert_eq!(convergence_order(&[1.0, 0.5, 0.7]).unwrap(), ConvergenceOrder::NonMonotone);
        assert!(convergence_order(&[1.0, 0.5]).is_err());
    }
}
