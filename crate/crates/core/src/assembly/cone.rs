//! Truncated cone `{(s, εst) : 0 < s < a, t ∈ ω}` in stretched coordinates.
//!
//! With `x = (s, εst)` the Dirichlet energy becomes the sum of squares
//!
//! ```text
//! εⁿ ∫∫ sⁿ [ (∂s u − t·∇t u / s)² + |∇t u|² / (ε² s²) ] dt ds,
//! ```
//!
//! the `L²` weight is `εⁿ sⁿ` and the lateral surface density is
//! `εⁿ⁻¹ sⁿ⁻¹ √(1 + ε² ρ)`. Expanding the square gives four tensor
//! blocks. Unknowns are the tip value (when present) followed by
//! `(i_s, i_t)` ordered `i_s · n_t + i_t` for s-nodes `1..` before `a`.

use super::element::{weighted_derivative, weighted_mass, weighted_stiffness};
use super::transverse::{transverse_ops, TransverseKind, TransverseMesh, TransverseOps};
use super::{require_positive, Assembly, AssemblyMeta, ConeMode, Mesh1D, ProblemKind};
use crate::geometry::{CrossSection, Shape};
use crate::sparse::{CsrMatrix, Triplets};
use crate::{Error, Result};

/// The s-weighted tensor blocks shared by the cone, its comparison forms
/// and the trace problem. Nothing here depends on ε except through the
/// transverse faces' `ρ`.
pub(crate) struct ConeBlocks {
    /// `∫ sⁿ ∂s u ∂s u` ⊗ `∫ ψψ`
    pub axial: CsrMatrix,
    /// `2 ∫ sⁿ⁻¹ ∂s u (t·∇u)` as a symmetric matrix
    pub cross: CsrMatrix,
    /// `∫ sⁿ⁻² (t·∇u)²`
    pub dilation: CsrMatrix,
    /// `∫ sⁿ⁻² |∇t u|²`
    pub transverse: CsrMatrix,
    /// `∫ sⁿ u²`
    pub mass: CsrMatrix,
    /// `∫ sⁿ⁻¹ (s-factor) ⊗ B_face` per face, with the face's `ρ`
    pub faces: Vec<(f64, CsrMatrix)>,
    pub n: usize,
    pub descriptor: String,
}

pub(crate) fn cone_blocks(
    cs: &CrossSection,
    a: f64,
    s_mesh: &Mesh1D,
    t_mesh: TransverseMesh,
    mode: ConeMode,
) -> Result<ConeBlocks> {
    require_positive("a", a)?;
    if s_mesh.start() != 0.0 {
        return Err(Error::InvalidMesh(format!("cone s-mesh must start at 0, starts at {}", s_mesh.start())));
    }
    if (s_mesh.end() - a).abs() > 1e-12 * a {
        return Err(Error::InvalidMesh(format!("cone s-mesh ends at {}, expected a = {a}", s_mesh.end())));
    }
    let kind = match (&cs.shape, mode) {
        (Shape::Ball { .. } | Shape::Annulus { .. }, ConeMode::Fourier { m }) => TransverseKind::Radial { m },
        (Shape::Interval { .. }, ConeMode::FullTensor) => TransverseKind::Full,
        (Shape::Rectangle { sides }, ConeMode::FullTensor) if sides.len() == 2 => TransverseKind::Full,
        (Shape::Ball { .. }, ConeMode::FullTensor) => {
            return Err(Error::Unsupported("ball cross-sections are reduced by Fourier sector; use mode m0".into()))
        }
        (_, ConeMode::Fourier { .. }) => {
            return Err(Error::InvalidInput(format!("Fourier mode needs a ball or annulus cross-section, got {}", cs.id())))
        }
        _ => return Err(Error::Unsupported(format!("cone over {}", cs.id()))),
    };
    let ops: TransverseOps = transverse_ops(cs, t_mesh, kind)?;
    let n = cs.n() as i32;
    if s_mesh.cells() < 2 {
        return Err(Error::InvalidMesh("cone s-mesh needs at least 2 cells".into()));
    }
    // Dirichlet at s = a. The tip s = 0 is a single point of the cone: it
    // carries one unknown, constant in t, when the transverse space holds
    // constants (a Fourier mode m ≥ 1 vanishes there instead).
    let tip = !matches!(kind, TransverseKind::Radial { m } if m > 0);
    let keep: Vec<usize> = (0..s_mesh.nodes().len() - 1).collect();
    let s = |m: CsrMatrix| m.restrict(&keep);
    let s11 = s(weighted_stiffness(s_mesh, n));
    let s10 = s(weighted_derivative(s_mesh, n - 1));
    let s00_m1 = s(weighted_mass(s_mesh, n - 1));
    let s00 = s(weighted_mass(s_mesh, n));
    // `sⁿ⁻²` may be non-integrable at the tip; constants are annihilated by
    // both transverse operators it multiplies, so the tip never needs it
    let s00_m2 = weighted_mass(s_mesh, n - 2).restrict(&keep[1..]);

    let x = tip_kron(&s10, &ops.dmass, tip);
    let cross = CsrMatrix::linear_combination(&[(1.0, &x), (1.0, &x.transpose())])?;
    let blocks = ConeBlocks {
        axial: tip_kron(&s11, &ops.mass, tip),
        cross,
        dilation: pad_tip(s00_m2.kron(&ops.dd), tip),
        transverse: pad_tip(s00_m2.kron(&ops.stiff), tip),
        mass: tip_kron(&s00, &ops.mass, tip),
        faces: ops.faces.iter().map(|f| (f.rho, tip_kron(&s00_m1, &f.matrix, tip))).collect(),
        n: cs.n(),
        descriptor: format!("s: {s_mesh}; t: {}; tip: {}", ops.descriptor, if tip { "free" } else { "dirichlet" }),
    };
    for m in [&blocks.axial, &blocks.dilation, &blocks.transverse, &blocks.mass] {
        if !m.all_finite() {
            return Err(Error::InvalidMesh("non-finite cone block".into()));
        }
    }
    Ok(blocks)
}

/// `S ⊗ T` on the unknowns `[tip] ∪ {(i_s, i_t) : i_s ≥ 1}` where `S`
/// lives on s-nodes `0..` and the tip function is `φ₀ ⊗ 1`. Without a tip
/// the node-0 row and column of `S` are dropped.
fn tip_kron(s: &CsrMatrix, t: &CsrMatrix, tip: bool) -> CsrMatrix {
    let ns = s.nrows();
    let inner: Vec<usize> = (1..ns).collect();
    let body = s.restrict(&inner).kron(t);
    if !tip {
        return body;
    }
    let nt = t.nrows();
    let ones = vec![1.0; nt];
    let t_one = t.mul_vec(&ones);
    let one_t = t.transpose().mul_vec(&ones);
    let total: f64 = t_one.iter().sum();
    let dim = 1 + body.nrows();
    let mut trip = Triplets::with_capacity(dim, dim, body.nnz() + 4 * nt * 2 + 1);
    trip.push(0, 0, s.get(0, 0) * total);
    for (b, v) in s.row(0).filter(|&(b, _)| b > 0) {
        for (j, w) in one_t.iter().enumerate() {
            trip.push(0, 1 + (b - 1) * nt + j, v * w);
        }
    }
    for a in 1..ns {
        let v = s.get(a, 0);
        if v != 0.0 {
            for (i, w) in t_one.iter().enumerate() {
                trip.push(1 + (a - 1) * nt + i, 0, v * w);
            }
        }
    }
    for i in 0..body.nrows() {
        for (j, v) in body.row(i) {
            trip.push(1 + i, 1 + j, v);
        }
    }
    trip.to_csr()
}

/// Adds an empty tip row and column.
fn pad_tip(m: CsrMatrix, tip: bool) -> CsrMatrix {
    if !tip {
        return m;
    }
    let dim = 1 + m.nrows();
    let mut trip = Triplets::with_capacity(dim, dim, m.nnz());
    for i in 0..m.nrows() {
        for (j, v) in m.row(i) {
            trip.push(1 + i, 1 + j, v);
        }
    }
    trip.to_csr()
}

impl ConeBlocks {
    pub fn energy(&self, eps: f64) -> CsrMatrix {
        let en = eps.powi(self.n as i32);
        CsrMatrix::linear_combination(&[
            (en, &self.axial),
            (-en, &self.cross),
            (en, &self.dilation),
            (en / (eps * eps), &self.transverse),
        ])
        .expect("blocks share a dimension")
    }

    pub fn mass(&self, eps: f64) -> CsrMatrix {
        self.mass.scale(eps.powi(self.n as i32))
    }

    /// `εⁿ⁻¹ Σ_faces factor(ρ) ∫ sⁿ⁻¹ u² dτ`.
    pub fn boundary_with(&self, eps: f64, factor: impl Fn(f64) -> f64) -> CsrMatrix {
        let en1 = eps.powi(self.n as i32 - 1);
        let terms: Vec<(f64, &CsrMatrix)> = self.faces.iter().map(|(rho, m)| (en1 * factor(*rho), m)).collect();
        CsrMatrix::linear_combination(&terms).expect("faces share a dimension")
    }

    /// Boundary matrix with the exact lateral density.
    pub fn boundary(&self, eps: f64) -> CsrMatrix {
        self.boundary_with(eps, |rho| (1.0 + eps * eps * rho).sqrt())
    }
}

/// Exact lateral surface density `εⁿ⁻¹ sⁿ⁻¹ √(1 + ε²ρ)` of the cone at
/// stretched point `(s, t)` with `ρ = (t·ν)²`.
pub fn lateral_density(n: usize, eps: f64, s: f64, rho: f64) -> f64 {
    (eps * s).powi(n as i32 - 1) * (1.0 + eps * eps * rho).sqrt()
}

/// Assembles the truncated cone problem with coupling 1 (α = 1).
pub fn assemble_cone(
    cs: &CrossSection,
    eps: f64,
    a: f64,
    s_mesh: &Mesh1D,
    t_mesh: TransverseMesh,
    mode: ConeMode,
) -> Result<Assembly> {
    require_positive("eps", eps)?;
    let blocks = cone_blocks(cs, a, s_mesh, t_mesh, mode)?;
    let meta = cone_meta(cs, eps, a, mode, &blocks, ProblemKind::Cone);
    let assembly = Assembly { energy: blocks.energy(eps), boundary: blocks.boundary(eps), mass: blocks.mass(eps), meta };
    assembly.validate()?;
    Ok(assembly)
}

pub(crate) fn cone_meta(
    cs: &CrossSection,
    eps: f64,
    a: f64,
    mode: ConeMode,
    blocks: &ConeBlocks,
    kind: ProblemKind,
) -> AssemblyMeta {
    let mut meta = AssemblyMeta::new(kind, cs.n(), cs.n_omega, blocks.descriptor.clone());
    meta.cross_section = Some(cs.id());
    meta.radius_r = Some(cs.radius_r);
    meta.eps = Some(eps);
    meta.a = Some(a);
    meta.s0 = Some(0.0);
    meta.mode = Some(mode);
    meta.coupling = Some(1.0);
    // ground state of the effective operator with λ = ε
    meta.prediction = Some(-(cs.n_omega / (cs.n() as f64 * eps)).powi(2));
    meta
}

/// Pencils of the comparison forms `p⁻ ≤ p ≤ p⁺` (as `energy − boundary`)
/// together with the cone form itself, all on the same discrete space.
#[derive(Clone, Debug)]
pub struct FormBounds {
    pub lower: CsrMatrix,
    pub exact: CsrMatrix,
    pub upper: CsrMatrix,
}

/// The two-sided metric estimate: the cross term and the dilation term are
/// absorbed with `|t| ≤ R`, giving factors `1 ± nRε` on `|∂s u|²` and
/// `1 ± (nR²ε² + Rε)` on `|∇t u|²/(ε²s²)`; the surface density lies
/// between `εⁿ⁻¹sⁿ⁻¹` and `√(1+R²ε²)·εⁿ⁻¹sⁿ⁻¹`.
pub fn cone_form_bounds(
    cs: &CrossSection,
    eps: f64,
    a: f64,
    s_mesh: &Mesh1D,
    t_mesh: TransverseMesh,
    mode: ConeMode,
) -> Result<FormBounds> {
    require_positive("eps", eps)?;
    let b = cone_blocks(cs, a, s_mesh, t_mesh, mode)?;
    let (n, r) = (cs.n() as f64, cs.radius_r);
    let en = eps.powi(cs.n() as i32);
    let axial = n * r * eps;
    let trans = n * r * r * eps * eps + r * eps;
    let plain = b.boundary_with(eps, |_| 1.0);
    let widest = b.boundary_with(eps, |_| (1.0 + r * r * eps * eps).sqrt());
    let comparison = |sign: f64, boundary: &CsrMatrix| {
        CsrMatrix::linear_combination(&[
            ((1.0 + sign * axial) * en, &b.axial),
            ((1.0 + sign * trans) * en / (eps * eps), &b.transverse),
            (-1.0, boundary),
        ])
        .expect("blocks share a dimension")
    };
    let exact = CsrMatrix::linear_combination(&[(1.0, &b.energy(eps)), (-1.0, &b.boundary(eps))])?;
    Ok(FormBounds { lower: comparison(-1.0, &widest), exact, upper: comparison(1.0, &plain) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_cross_section, CrossSectionSpec};

    fn disk() -> CrossSection {
        make_cross_section(&CrossSectionSpec::ball(2, 1.0)).unwrap()
    }

    #[test]
    fn assembled_matrices_are_symmetric_and_finite() {
        let s = Mesh1D::with_first_cell(0.0, 2.0, 20, 0.01).unwrap();
        for (cs, mode) in [
            (disk(), ConeMode::Fourier { m: 0 }),
            (disk(), ConeMode::Fourier { m: 1 }),
            (make_cross_section(&CrossSectionSpec::interval(1.0)).unwrap(), ConeMode::FullTensor),
            (make_cross_section(&CrossSectionSpec::rectangle(&[2.0, 1.0])).unwrap(), ConeMode::FullTensor),
            (make_cross_section(&CrossSectionSpec::ball(3, 1.0)).unwrap(), ConeMode::Fourier { m: 0 }),
        ] {
            let a = assemble_cone(&cs, 0.2, 2.0, &s, TransverseMesh { cells: 4 }, mode).unwrap();
            a.validate().unwrap();
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = Mesh1D::uniform(0.0, 1.0, 8).unwrap();
        let t = TransverseMesh { cells: 4 };
        let interval = make_cross_section(&CrossSectionSpec::interval(1.0)).unwrap();
        assert!(assemble_cone(&interval, 0.2, 1.0, &s, t, ConeMode::Fourier { m: 0 }).is_err());
        assert!(assemble_cone(&disk(), 0.0, 1.0, &s, t, ConeMode::Fourier { m: 0 }).is_err());
        assert!(assemble_cone(&disk(), 0.2, -1.0, &s, t, ConeMode::Fourier { m: 0 }).is_err());
        assert!(assemble_cone(&disk(), 0.2, 2.0, &s, t, ConeMode::Fourier { m: 0 }).is_err());
    }

    #[test]
    fn constant_in_t_sees_only_axial_energy() {
        // u(s, t) = φ(s): the cross and dilation terms vanish and the
        // transverse gradient is zero
        let s = Mesh1D::uniform(0.0, 1.0, 6).unwrap();
        let cs = make_cross_section(&CrossSectionSpec::interval(0.5)).unwrap();
        let t = TransverseMesh { cells: 3 };
        let b = cone_blocks(&cs, 1.0, &s, t, ConeMode::FullTensor).unwrap();
        let nt = 4;
        let ns = 5;
        assert_eq!(b.mass.nrows(), 1 + ns * nt);
        let u: Vec<f64> = std::iter::once(0.3).chain((0..ns * nt).map(|k| ((k / nt) as f64 + 1.0).sin())).collect();
        assert!(b.cross.quadratic_form(&u).abs() < 1e-12);
        assert!(b.dilation.quadratic_form(&u).abs() < 1e-12);
        assert!(b.transverse.quadratic_form(&u).abs() < 1e-12);
    }

    #[test]
    fn density_bounds() {
        let d = lateral_density(2, 0.1, 3.0, 0.5);
        assert!(d > 0.3 && d < 0.3 * (1.01f64).sqrt());
        assert_eq!(lateral_density(1, 0.1, 3.0, 0.0), 1.0);
    }
}
