//! Cross-section matrices: every form on ω that the cone and cross-section
//! problems need, for P1 (radial or interval) and bilinear (rectangle)
//! elements.

use super::element::{point_mass, weighted_derivative, weighted_mass, weighted_stiffness};
use super::Mesh1D;
use crate::geometry::{CrossSection, Shape};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Transverse resolution: cells per radial direction or per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransverseMesh {
    pub cells: usize,
}

impl Default for TransverseMesh {
    fn default() -> Self {
        TransverseMesh { cells: 24 }
    }
}

/// A boundary piece of ω on which `ρ = (t·ν)²` is constant, with its
/// surface mass matrix `∫_piece ψc ψd dτ`.
#[derive(Clone, Debug)]
pub struct Face {
    pub rho: f64,
    pub matrix: CsrMatrix,
}

/// Forms on ω in the transverse basis `ψ`.
///
/// - `mass`: `∫ ψc ψd`
/// - `dmass`: `∫ ψc (t·∇ψd)`
/// - `dd`: `∫ (t·∇ψc)(t·∇ψd)`
/// - `stiff`: `∫ ∇ψc·∇ψd` (plus `m² ∫ ψc ψd / |t|²` for Fourier mode `m`)
///
/// Radial reductions integrate against `|t|^{n-1} d|t|`, i.e. per unit
/// solid angle; the common angular factor cancels in every quotient.
#[derive(Clone, Debug)]
pub struct TransverseOps {
    pub mass: CsrMatrix,
    pub dmass: CsrMatrix,
    pub dd: CsrMatrix,
    pub stiff: CsrMatrix,
    pub faces: Vec<Face>,
    pub descriptor: String,
}

impl TransverseOps {
    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    /// `Σ_faces factor(ρ) · B_face`.
    pub fn boundary_with(&self, factor: impl Fn(f64) -> f64) -> CsrMatrix {
        let terms: Vec<(f64, &CsrMatrix)> = self.faces.iter().map(|f| (factor(f.rho), &f.matrix)).collect();
        CsrMatrix::linear_combination(&terms).expect("faces share the transverse dimension")
    }

    /// Plain surface mass `∫_∂ω ψc ψd dτ`.
    pub fn boundary(&self) -> CsrMatrix {
        self.boundary_with(|_| 1.0)
    }
}

/// Which transverse discretization to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransverseKind {
    /// Full discretization of ω (interval or rectangle).
    Full,
    /// Radial functions times `cos(mθ)` (ball, annulus; `m ≥ 1` only for n = 2).
    Radial { m: usize },
}

pub fn transverse_ops(cs: &CrossSection, mesh: TransverseMesh, kind: TransverseKind) -> Result<TransverseOps> {
    if mesh.cells < 2 {
        return Err(Error::InvalidMesh(format!("transverse mesh needs at least 2 cells, got {}", mesh.cells)));
    }
    match (&cs.shape, kind) {
        (Shape::Interval { half_length }, TransverseKind::Full) => Ok(interval_ops(*half_length, mesh.cells)),
        (Shape::Rectangle { sides }, TransverseKind::Full) if sides.len() == 2 => Ok(rectangle_ops(sides, mesh.cells)),
        (Shape::Ball { n, radius }, TransverseKind::Radial { m }) => {
            if m > 0 && *n != 2 {
                return Err(Error::Unsupported(format!("Fourier mode m = {m} needs a disk cross-section, got n = {n}")));
            }
            radial_ops(*n, 0.0, *radius, mesh.cells, m)
        }
        (Shape::Annulus { inner, outer }, TransverseKind::Radial { m }) => radial_ops(2, *inner, *outer, mesh.cells, m),
        (shape, kind) => Err(Error::Unsupported(format!("no {kind:?} discretization for {shape:?}"))),
    }
}

struct Axis {
    mass: CsrMatrix,
    d1: CsrMatrix,  // ∫ ψc t ψd'
    d2: CsrMatrix,  // ∫ t² ψc' ψd'
    stiff: CsrMatrix,
    n: usize,
}

fn axis(half: f64, cells: usize) -> Axis {
    let mesh = Mesh1D::uniform(-half, half, cells).expect("positive length");
    Axis {
        mass: weighted_mass(&mesh, 0),
        d1: weighted_derivative(&mesh, 1).transpose(),
        d2: weighted_stiffness(&mesh, 2),
        stiff: weighted_stiffness(&mesh, 0),
        n: cells + 1,
    }
}

fn interval_ops(l: f64, cells: usize) -> TransverseOps {
    let ax = axis(l, cells);
    let faces = vec![
        Face { rho: l * l, matrix: point_mass(ax.n, 0, 1.0) },
        Face { rho: l * l, matrix: point_mass(ax.n, ax.n - 1, 1.0) },
    ];
    TransverseOps {
        mass: ax.mass,
        dmass: ax.d1,
        dd: ax.d2,
        stiff: ax.stiff,
        faces,
        descriptor: format!("interval P1 cells={cells}"),
    }
}

fn rectangle_ops(sides: &[f64], cells: usize) -> TransverseOps {
    let (lx, ly) = (0.5 * sides[0], 0.5 * sides[1]);
    let x = axis(lx, cells);
    let y = axis(ly, cells);
    let sum = |a: CsrMatrix, b: CsrMatrix| CsrMatrix::linear_combination(&[(1.0, &a), (1.0, &b)]).unwrap();
    let mass = x.mass.kron(&y.mass);
    let stiff = sum(x.stiff.kron(&y.mass), x.mass.kron(&y.stiff));
    let dmass = sum(x.d1.kron(&y.mass), x.mass.kron(&y.d1));
    // (x∂x + y∂y)ψc (x∂x + y∂y)ψd: the two mixed products are transposes of each other
    let mixed = x.d1.transpose().kron(&y.d1);
    let mixed_sym = sum(mixed.clone(), mixed.transpose());
    let dd = CsrMatrix::linear_combination(&[
        (1.0, &x.d2.kron(&y.mass)),
        (1.0, &mixed_sym),
        (1.0, &x.mass.kron(&y.d2)),
    ])
    .unwrap();
    let faces = vec![
        Face { rho: lx * lx, matrix: point_mass(x.n, 0, 1.0).kron(&y.mass) },
        Face { rho: lx * lx, matrix: point_mass(x.n, x.n - 1, 1.0).kron(&y.mass) },
        Face { rho: ly * ly, matrix: x.mass.kron(&point_mass(y.n, 0, 1.0)) },
        Face { rho: ly * ly, matrix: x.mass.kron(&point_mass(y.n, y.n - 1, 1.0)) },
    ];
    TransverseOps { mass, dmass, dd, stiff, faces, descriptor: format!("rectangle Q1 cells={cells}x{cells}") }
}

fn radial_ops(n: usize, inner: f64, outer: f64, cells: usize, m: usize) -> Result<TransverseOps> {
    let mesh = Mesh1D::uniform(inner, outer, cells)?;
    let np = n as i32;
    let mass = weighted_mass(&mesh, np - 1);
    let dmass = weighted_derivative(&mesh, np).transpose();
    let dd = weighted_stiffness(&mesh, np + 1);
    let mut stiff = weighted_stiffness(&mesh, np - 1);
    let nodes = cells + 1;
    let mut faces = vec![Face { rho: outer * outer, matrix: point_mass(nodes, nodes - 1, outer.powi(np - 1)) }];
    if inner > 0.0 {
        faces.push(Face { rho: inner * inner, matrix: point_mass(nodes, 0, inner.powi(np - 1)) });
    }
    let mut keep: Vec<usize> = (0..nodes).collect();
    if m > 0 {
        let m2 = (m * m) as f64;
        let centrifugal = weighted_mass(&mesh, np - 3);
        if inner == 0.0 {
            // u ~ |t|^m at the axis: the center node carries no unknown
            keep.remove(0);
        }
        let full = CsrMatrix::linear_combination(&[(1.0, &stiff), (m2, &centrifugal)])?;
        stiff = full;
    }
    let r = |a: &CsrMatrix| a.restrict(&keep);
    let ops = TransverseOps {
        mass: r(&mass),
        dmass: r(&dmass),
        dd: r(&dd),
        stiff: r(&stiff),
        faces: faces.into_iter().map(|f| Face { rho: f.rho, matrix: r(&f.matrix) }).collect(),
        descriptor: format!("radial P1 n={n} cells={cells} m={m}"),
    };
    if !ops.stiff.all_finite() || !ops.mass.all_finite() {
        return Err(Error::InvalidMesh("non-finite transverse matrix".into()));
    }
    Ok(ops)
}
