//! Generalized symmetric eigenproblems `A x = E M x` with `M` positive
//! definite.
//!
//! Large problems go through shift-invert Lanczos on an envelope `LDLᵀ`
//! factorization of `A − σM`; the shift is placed below the spectrum and
//! confirmed by the factor's inertia. Once `k` pairs are locked, a second
//! factorization slightly above the `k`-th value counts the eigenvalues
//! below it (Sylvester), which catches missed members of degenerate
//! clusters. Small problems use a dense Cholesky + symmetric eigensolver.

mod dense;
mod lanczos;
pub mod ldlt;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::{Assembly, ProblemKind};
use crate::sparse::{norm2, CsrMatrix};
use crate::{Error, Result};
use lanczos::Lanczos;
use ldlt::Ldlt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WhichEnd {
    Smallest,
    Largest,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shift {
    /// Derived from the assembly's prediction (see [`auto_shift`]).
    Auto,
    Value(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub k: usize,
    pub which_end: WhichEnd,
    pub shift: Shift,
    /// Backward-error tolerance per pair.
    pub tol: f64,
    /// Budget of Lanczos steps (each one factor solve).
    pub max_iter: usize,
    pub seed: u64,
    /// Problems of at most this dimension are solved densely.
    pub dense_threshold: usize,
    /// Eigenvalues above this value (below it for the largest end) are not
    /// reported; a short list is flagged.
    pub cutoff: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            k: 1,
            which_end: WhichEnd::Smallest,
            shift: Shift::Auto,
            tol: 1e-9,
            max_iter: 5000,
            seed: 0,
            dense_threshold: 2000,
            cutoff: None,
        }
    }
}

impl SolveOptions {
    pub fn smallest(k: usize) -> Self {
        SolveOptions { k, ..Default::default() }
    }

    pub fn largest(k: usize) -> Self {
        SolveOptions { k, which_end: WhichEnd::Largest, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > 32 {
            return Err(Error::InvalidInput(format!("k must be in 1..=32, got {}", self.k)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Dense,
    ShiftInvertLanczos,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveStats {
    pub path: SolverPath,
    pub dim: usize,
    pub iterations: usize,
    pub passes: usize,
    /// Stored entries of the `LDLᵀ` factor (0 on the dense path).
    pub factor_fill: usize,
    /// Shift actually used (absent on the dense path).
    pub shift: Option<f64>,
    pub shift_retries: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Backward errors `‖Ax − EMx‖ / ((‖A‖ + |E|‖M‖)‖x‖)`.
    pub residuals: Vec<f64>,
    /// `M`-orthonormal; first significant coefficient positive.
    pub vectors: Vec<Vec<f64>>,
    pub stats: SolveStats,
    /// Fewer than `k` pairs exist (dimension or cutoff).
    pub short_count: bool,
    /// Pairs `(i, i+1)` whose gap is below `10·tol·|E|`.
    pub degenerate: Vec<(usize, usize)>,
    /// False when the iteration budget ran out before `k` pairs converged.
    pub converged: bool,
    pub tol: f64,
}

impl Spectrum {
    /// `E_j` (1-based), or an error when the solve did not deliver it.
    pub fn value(&self, j: usize) -> Result<f64> {
        j.checked_sub(1).and_then(|i| self.values.get(i)).copied().ok_or_else(|| {
            Error::NoConvergence(format!(
                "E_{j} not available: {} pairs{}",
                self.values.len(),
                if self.short_count { ", short count" } else { "" }
            ))
        })
    }

    /// Value at the requested end: the lowest, or the largest for
    /// [`WhichEnd::Largest`].
    pub fn extreme(&self, end: WhichEnd) -> Option<f64> {
        match end {
            WhichEnd::Smallest => self.values.first().copied(),
            WhichEnd::Largest => self.values.last().copied(),
        }
    }
}

/// Normwise backward error `‖Ax − λMx‖ / ((‖A‖ + |λ|‖M‖)‖x‖)` of an
/// approximate pair, with the symmetric 2-norms bounded by `‖·‖_∞`.
pub fn residual(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - lambda * q).collect();
    let denom = (a.norm_inf() + lambda.abs() * m.norm_inf()) * norm2(x);
    if denom == 0.0 {
        return norm2(&r);
    }
    norm2(&r) / denom
}

/// Forward rounding bound `γ_w (|x|ᵀ|A||x| + |λ| |x|ᵀ|M||x|) / xᵀMx` on
/// a computed Rayleigh quotient, `w` being the widest row plus one.
/// Differences between eigenvalues below this size are not resolved.
pub fn rayleigh_rounding_bound(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, x: &[f64]) -> f64 {
    let w = (a.max_row_nnz().max(m.max_row_nnz()) + 1) as f64 * f64::EPSILON / 2.0;
    let gamma = w / (1.0 - w);
    gamma * (a.abs_quadratic_form(x) + lambda.abs() * m.abs_quadratic_form(x)) / m.quadratic_form(x)
}

/// Shift for the pencil `energy − coupling·boundary`, oriented so that
/// the wanted end is the bottom: `1.5×` the predicted extreme eigenvalue
/// for cone and effective problems, `−2 N_ω |r| − 1` for cross-sections.
pub fn auto_shift(assembly: &Assembly, coupling: f64, end: WhichEnd) -> f64 {
    let meta = &assembly.meta;
    if meta.kind == ProblemKind::CrossSectionRobin {
        return -2.0 * meta.n_omega * coupling.abs() - 1.0;
    }
    let predicted = meta.prediction.map(|p| if end == WhichEnd::Largest { -p } else { p });
    match predicted {
        Some(p) if p < 0.0 => 1.5 * p,
        _ => -1.0,
    }
}

/// Eigenpairs of `(energy − coupling·boundary) x = E · mass · x` at the
/// requested end.
pub fn solve(assembly: &Assembly, coupling: f64, opts: &SolveOptions) -> Result<Spectrum> {
    let shift = match opts.shift {
        Shift::Auto => auto_shift(assembly, coupling, opts.which_end),
        Shift::Value(s) => s,
    };
    solve_pencil(&assembly.pencil(coupling), &assembly.mass, shift, opts)
}

/// Same as [`solve`] on explicit matrices. `shift` is used in the
/// orientation where the wanted end is the bottom of the spectrum.
pub fn solve_pencil(a: &CsrMatrix, m: &CsrMatrix, shift: f64, opts: &SolveOptions) -> Result<Spectrum> {
    opts.validate()?;
    let n = a.nrows();
    if m.nrows() != n || a.ncols() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty pencil".into()));
    }
    let start = Instant::now();
    let flipped;
    let a_eff = match opts.which_end {
        WhichEnd::Smallest => a,
        WhichEnd::Largest => {
            flipped = a.scale(-1.0);
            &flipped
        }
    };
    let cutoff = opts.cutoff.map(|c| if opts.which_end == WhichEnd::Largest { -c } else { c });
    let (mut values, mut vectors, mut stats, converged) = if n <= opts.dense_threshold {
        let (v, x) = dense::eigen_all(a_eff, m)?;
        let stats = SolveStats {
            path: SolverPath::Dense,
            dim: n,
            iterations: 0,
            passes: 0,
            factor_fill: 0,
            shift: None,
            shift_retries: 0,
            wall_ms: 0.0,
        };
        (v, x, stats, true)
    } else {
        sparse_lowest(a_eff, m, shift, opts, cutoff)?
    };

    // keep the k lowest (in the solving orientation) below the cutoff
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    order.retain(|&i| cutoff.is_none_or(|c| values[i] <= c));
    order.truncate(opts.k);
    let short_count = order.len() < opts.k;
    let mut pairs: Vec<(f64, Vec<f64>)> =
        order.into_iter().map(|i| (values[i], std::mem::take(&mut vectors[i]))).collect();
    if opts.which_end == WhichEnd::Largest {
        pairs.iter_mut().for_each(|p| p.0 = -p.0);
        pairs.reverse();
    }
    for (_, x) in pairs.iter_mut() {
        normalize_sign(x);
    }
    values = pairs.iter().map(|p| p.0).collect();
    let vectors: Vec<Vec<f64>> = pairs.into_iter().map(|p| p.1).collect();
    let residuals: Vec<f64> = values.iter().zip(&vectors).map(|(&e, x)| residual(a, m, e, x)).collect();
    let degenerate = values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] - w[0]).abs() < 10.0 * opts.tol * w[0].abs().max(w[1].abs()))
        .map(|(i, _)| (i, i + 1))
        .collect();
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Spectrum { values, residuals, vectors, stats, short_count, degenerate, converged, tol: opts.tol })
}

type SparseOutcome = (Vec<f64>, Vec<Vec<f64>>, SolveStats, bool);

fn shifted(a: &CsrMatrix, m: &CsrMatrix, sigma: f64) -> Result<CsrMatrix> {
    CsrMatrix::linear_combination(&[(1.0, a), (-sigma, m)])
}

fn sparse_lowest(a: &CsrMatrix, m: &CsrMatrix, shift: f64, opts: &SolveOptions, cutoff: Option<f64>) -> Result<SparseOutcome> {
    let n = a.nrows();
    let mut sigma = shift;
    let mut retries = 0;
    let factor = loop {
        let f = Ldlt::factor(&shifted(a, m, sigma)?);
        let ok = matches!(&f, Ok(f) if f.first_nonpositive_pivot().is_none());
        if ok {
            break f?;
        }
        retries += 1;
        if retries > 40 {
            return Err(Error::Factorization { shift: sigma, reason: "no shift below the spectrum found".into() });
        }
        sigma = sigma - 2.0 * sigma.abs() - 1.0;
    };
    let rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut lz = Lanczos::new(a, m, &factor, sigma, opts.tol, rng, opts.max_iter);
    let k = opts.k.min(n);
    let mut stalls = 0;
    let mut verified = false;
    while !lz.exhausted() {
        let have = count_below(&lz.values, cutoff);
        if have < k {
            // a pass that locks nothing restarts from its best Ritz vectors
            if lz.pass(k - have) == 0 {
                stalls += 1;
                if stalls > 50 {
                    break;
                }
            }
            continue;
        }
        // Sturm check just above the k-th locked value
        let mut sorted = lz.values.clone();
        sorted.sort_by(f64::total_cmp);
        let kth = sorted[k - 1];
        let tau = kth + 1e-7 * kth.abs().max(1e-300) + 1e-12 * (kth - sigma).abs();
        let below = match Ldlt::factor(&shifted(a, m, tau)?) {
            Ok(f) => f.inertia().negative,
            Err(_) => break,
        };
        let found = sorted.iter().filter(|&&v| v < tau).count();
        if below <= found {
            verified = true;
            break;
        }
        if lz.pass(below - found + 1) == 0 {
            stalls += 1;
            if stalls > 50 {
                break;
            }
        }
    }
    let converged = verified || (lz.values.len() >= n);
    let stats = SolveStats {
        path: SolverPath::ShiftInvertLanczos,
        dim: n,
        iterations: lz.iterations,
        passes: lz.passes,
        factor_fill: factor.fill(),
        shift: Some(sigma),
        shift_retries: retries,
        wall_ms: 0.0,
    };
    Ok((lz.values, lz.vectors, stats, converged))
}

fn count_below(values: &[f64], cutoff: Option<f64>) -> usize {
    values.iter().filter(|&&v| cutoff.is_none_or(|c| v <= c)).count()
}

/// Flips `x` so that its first coefficient above `1e-8·max|x|` is positive.
fn normalize_sign(x: &mut [f64]) {
    let big = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(&first) = x.iter().find(|v| v.abs() > 1e-8 * big) {
        if first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCheck {
    pub index: usize,
    pub value: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub tol: f64,
    pub pairs: Vec<PairCheck>,
}

impl ResidualReport {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }
}

/// Recomputes every residual from the assembly, independent of the
/// iteration that produced the spectrum.
pub fn certify(assembly: &Assembly, coupling: f64, spectrum: &Spectrum) -> Result<ResidualReport> {
    let a = assembly.pencil(coupling);
    let n = assembly.dim();
    let mut pairs = Vec::with_capacity(spectrum.values.len());
    for (index, (&value, x)) in spectrum.values.iter().zip(&spectrum.vectors).enumerate() {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let residual = residual(&a, &assembly.mass, value, x);
        pairs.push(PairCheck { index, value, residual, pass: residual <= spectrum.tol });
    }
    Ok(ResidualReport { tol: spectrum.tol, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{element, Mesh1D};
    use std::f64::consts::PI;

    fn dirichlet_1d(cells: usize) -> (CsrMatrix, CsrMatrix) {
        let mesh = Mesh1D::uniform(0.0, PI, cells).unwrap();
        let keep: Vec<usize> = (1..cells).collect();
        (element::weighted_stiffness(&mesh, 0).restrict(&keep), element::weighted_mass(&mesh, 0).restrict(&keep))
    }

    /// P1 on a uniform mesh: `E_j = (6/h²)(1 − cos jh)/(2 + cos jh)`.
    fn discrete_sine(j: usize, h: f64) -> f64 {
        let c = (j as f64 * h).cos();
        6.0 / (h * h) * (1.0 - c) / (2.0 + c)
    }

    #[test]
    fn identity_pencil() {
        let id = CsrMatrix::identity(5);
        let s = solve_pencil(&id, &id, -1.0, &SolveOptions::smallest(3)).unwrap();
        assert!(s.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        assert_eq!(s.degenerate.len(), 2);
    }

    #[test]
    fn sparse_and_dense_match_discrete_sine_transform() {
        let cells = 3000;
        let (k, m) = dirichlet_1d(cells);
        let h = PI / cells as f64;
        let mut opts = SolveOptions::smallest(4);
        let sparse = solve_pencil(&k, &m, -1.0, &opts).unwrap();
        assert_eq!(sparse.stats.path, SolverPath::ShiftInvertLanczos);
        assert!(sparse.converged);
        for (j, v) in sparse.values.iter().enumerate() {
            let e = discrete_sine(j + 1, h);
            assert!((v - e).abs() < 1e-10 * e, "{v} vs {e}");
        }
        opts.dense_threshold = 10_000;
        let (k2, m2) = dirichlet_1d(200);
        let dense = solve_pencil(&k2, &m2, -1.0, &opts).unwrap();
        assert_eq!(dense.stats.path, SolverPath::Dense);
        for (j, v) in dense.values.iter().enumerate() {
            let e = discrete_sine(j + 1, PI / 200.0);
            assert!((v - e).abs() < 1e-10 * e);
        }
    }

    #[test]
    fn largest_end() {
        let (k, m) = dirichlet_1d(50);
        let s = solve_pencil(&k, &m, -1.0, &SolveOptions::largest(2)).unwrap();
        let h = PI / 50.0;
        assert!((s.values[1] - discrete_sine(49, h)).abs() < 1e-9 * s.values[1]);
        assert!(s.values[0] < s.values[1]);
    }

    #[test]
    fn repeated_eigenvalues_are_all_found() {
        // block diagonal with two copies of the same 1D problem
        let (k, m) = dirichlet_1d(1500);
        let id2 = CsrMatrix::identity(2);
        let (kk, mm) = (id2.kron(&k), id2.kron(&m));
        let s = solve_pencil(&kk, &mm, -1.0, &SolveOptions::smallest(4)).unwrap();
        let h = PI / 1500.0;
        let e1 = discrete_sine(1, h);
        let e2 = discrete_sine(2, h);
        for (v, e) in s.values.iter().zip([e1, e1, e2, e2]) {
            assert!((v - e).abs() < 1e-9 * e);
        }
        assert_eq!(s.degenerate, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn shift_above_spectrum_is_lowered() {
        let (k, m) = dirichlet_1d(2500);
        let s = solve_pencil(&k, &m, 10.0, &SolveOptions::smallest(1)).unwrap();
        assert!(s.stats.shift.unwrap() < 1.0);
        assert!(s.stats.shift_retries > 0);
        assert!((s.values[0] - discrete_sine(1, PI / 2500.0)).abs() < 1e-10);
    }

    #[test]
    fn certify_flags_perturbed_value() {
        let id = CsrMatrix::identity(3);
        let assembly = Assembly {
            energy: CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]),
            boundary: CsrMatrix::zeros(3, 3),
            mass: id,
            meta: crate::assembly::AssemblyMeta::new(ProblemKind::Effective, 1, 1.0, "diag".into()),
        };
        let mut s = solve(&assembly, 0.0, &SolveOptions::smallest(2)).unwrap();
        assert!(certify(&assembly, 0.0, &s).unwrap().all_pass());
        s.values[1] += 1e-3;
        let report = certify(&assembly, 0.0, &s).unwrap();
        assert!(report.pairs[0].pass && !report.pairs[1].pass);
        s.values.clear();
        s.vectors.clear();
        assert!(certify(&assembly, 0.0, &s).unwrap().pairs.is_empty());
    }
}
