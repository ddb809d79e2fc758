//! Conforming P1 discretizations of the quadratic forms: the Robin form on
//! a cross-section, the 1D effective operators, the truncated cone form in
//! stretched coordinates, and the trace-inequality pencil.
//!
//! Every assembly is a triple `(energy, boundary, mass)` and the pencil
//! solved downstream is `(energy − coupling·boundary) x = E · mass · x`.
//! Weights with powers of `s` are integrated exactly, so each discrete
//! problem is a Rayleigh–Ritz restriction of its continuous form.

mod cone;
mod cross_section;
mod effective;
pub mod element;
mod mesh;
mod trace;
mod transverse;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use cone::{assemble_cone, cone_form_bounds, lateral_density, FormBounds};
pub use cross_section::assemble_cross_section_robin;
pub use effective::{assemble_effective, EndCondition};
pub use mesh::{build_mesh_1d, Mesh1D};
pub use trace::assemble_trace_problem;
pub use transverse::{transverse_ops, Face, TransverseKind, TransverseMesh, TransverseOps};

use crate::eigensolve::ldlt::Ldlt;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    CrossSectionRobin,
    Effective,
    Exterior,
    Cone,
    Trace,
}

/// Transverse reduction of a cone problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeMode {
    /// Full discretization of ω (interval and rectangle cross-sections).
    FullTensor,
    /// Sector `u(s, |t|)·cos(mθ)` of a ball or annulus cross-section.
    /// `m = 0` is the radially symmetric sector in any dimension; `m ≥ 1`
    /// needs n = 2.
    Fourier { m: usize },
}

impl fmt::Display for ConeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeMode::FullTensor => write!(f, "full"),
            ConeMode::Fourier { m } => write!(f, "m{m}"),
        }
    }
}

impl FromStr for ConeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(ConeMode::FullTensor);
        }
        s.strip_prefix('m')
            .and_then(|m| m.parse().ok())
            .map(|m| ConeMode::Fourier { m })
            .ok_or_else(|| Error::InvalidInput(format!("mode must be `full` or `m<k>`, got `{s}`")))
    }
}

impl Serialize for ConeMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Provenance of an assembly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssemblyMeta {
    pub kind: ProblemKind,
    pub cross_section: Option<String>,
    pub n: usize,
    pub n_omega: f64,
    pub radius_r: Option<f64>,
    pub eps: Option<f64>,
    /// Truncation length for cone problems, right end `b` for effective ones.
    pub a: Option<f64>,
    pub s0: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub mode: Option<ConeMode>,
    /// `None` leaves the coupling symbolic (the Robin parameter `r`).
    pub coupling: Option<f64>,
    pub mesh: String,
    /// Predicted eigenvalue at the end of interest (lowest; largest for
    /// trace problems), used to place the shift.
    pub prediction: Option<f64>,
}

impl AssemblyMeta {
    pub fn new(kind: ProblemKind, n: usize, n_omega: f64, mesh: String) -> Self {
        AssemblyMeta {
            kind,
            cross_section: None,
            n,
            n_omega,
            radius_r: None,
            eps: None,
            a: None,
            s0: None,
            lambda: None,
            delta: None,
            mode: None,
            coupling: None,
            mesh,
            prediction: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Assembly {
    pub energy: CsrMatrix,
    pub boundary: CsrMatrix,
    pub mass: CsrMatrix,
    pub meta: AssemblyMeta,
}

impl Assembly {
    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    /// `energy − coupling · boundary`. The subtraction is skipped at zero
    /// coupling so the energy matrix is reused bit for bit.
    pub fn pencil(&self, coupling: f64) -> CsrMatrix {
        if coupling == 0.0 {
            return self.energy.clone();
        }
        CsrMatrix::linear_combination(&[(1.0, &self.energy), (-coupling, &self.boundary)])
            .expect("assembly matrices share a dimension")
    }

    /// Checks the structural invariants: equal dimensions, finite entries,
    /// bitwise symmetry, and a positive definite mass matrix.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for (name, m) in [("energy", &self.energy), ("boundary", &self.boundary), ("mass", &self.mass)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
            }
            if !m.all_finite() {
                return Err(Error::InvalidMesh(format!("{name} matrix has non-finite entries")));
            }
            if !m.is_symmetric() {
                return Err(Error::InvalidMesh(format!("{name} matrix is not symmetric")));
            }
        }
        let f = Ldlt::factor(&self.mass)?;
        if let Some((pivot, value)) = f.first_nonpositive_pivot() {
            return Err(Error::SingularMass { pivot, value });
        }
        Ok(())
    }
}

pub(crate) fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_round_trip() {
        for s in ["full", "m0", "m3"] {
            assert_eq!(s.parse::<ConeMode>().unwrap().to_string(), s);
        }
        assert!("x1".parse::<ConeMode>().is_err());
        assert!("m".parse::<ConeMode>().is_err());
    }

    #[test]
    fn identity_pencil_validates() {
        let id = CsrMatrix::identity(4);
        let a = Assembly {
            energy: id.clone(),
            boundary: CsrMatrix::zeros(4, 4),
            mass: id,
            meta: AssemblyMeta::new(ProblemKind::Effective, 2, 2.0, "test".into()),
        };
        a.validate().unwrap();
        assert_eq!(a.pencil(0.0), a.energy);
    }

    #[test]
    fn indefinite_mass_is_rejected() {
        let a = Assembly {
            energy: CsrMatrix::identity(2),
            boundary: CsrMatrix::zeros(2, 2),
            mass: CsrMatrix::from_diagonal(&[1.0, -1.0]),
            meta: AssemblyMeta::new(ProblemKind::Effective, 2, 2.0, "test".into()),
        };
        assert!(matches!(a.validate(), Err(Error::SingularMass { pivot: 1, .. })));
    }
}
