use super::element::{weighted_mass, weighted_stiffness};
use super::{Assembly, AssemblyMeta, Mesh1D, ProblemKind};
use crate::oracles::EffectiveSpec;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Condition at the left end `s0` of an effective problem. The right end
/// is always Dirichlet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EndCondition {
    #[default]
    Dirichlet,
    /// Free end; only meaningful away from the singular point `s = 0`.
    Natural,
}

/// `∫ f'² + ((n² − 2n)/(4s²) − N_ω/(λs)) f²` on the mesh interval.
///
/// With `s0 = 0` this is `M_{λ,b}`; with `s0 > 0` it is the exterior
/// operator on `(s0, b)`. Both potentials are integrated exactly per cell.
pub fn assemble_effective(spec: &EffectiveSpec, mesh: &Mesh1D, left: EndCondition) -> Result<Assembly> {
    spec.validate()?;
    let s0 = mesh.start();
    if s0 < 0.0 {
        return Err(Error::InvalidMesh(format!("effective problems live on s >= 0, mesh starts at {s0}")));
    }
    if s0 == 0.0 && left == EndCondition::Natural {
        return Err(Error::InvalidInput("the node at s = 0 must be Dirichlet".into()));
    }
    let n = spec.n as f64;
    let centrifugal = (n * n - 2.0 * n) / 4.0;
    let coulomb = spec.n_omega / spec.lambda;
    let nodes = mesh.nodes().len();
    let first = if left == EndCondition::Dirichlet { 1 } else { 0 };
    let keep: Vec<usize> = (first..nodes - 1).collect();

    let mut terms = vec![(1.0, weighted_stiffness(mesh, 0).restrict(&keep))];
    if centrifugal != 0.0 {
        terms.push((centrifugal, weighted_mass(mesh, -2).restrict(&keep)));
    }
    terms.push((-coulomb, weighted_mass(mesh, -1).restrict(&keep)));
    let refs: Vec<(f64, &CsrMatrix)> = terms.iter().map(|(c, m)| (*c, m)).collect();
    let energy = CsrMatrix::linear_combination(&refs)?;
    let mass = weighted_mass(mesh, 0).restrict(&keep);

    let kind = if s0 > 0.0 { ProblemKind::Exterior } else { ProblemKind::Effective };
    let mut meta = AssemblyMeta::new(kind, spec.n, spec.n_omega, mesh.to_string());
    meta.lambda = Some(spec.lambda);
    meta.a = Some(mesh.end());
    meta.s0 = Some(s0);
    meta.coupling = Some(0.0);
    meta.prediction = Some(if s0 > 0.0 {
        // the exterior spectrum sits above -N_ω/(s0 λ)
        -coulomb / s0
    } else {
        -(spec.n_omega / (spec.lambda * (spec.n as f64).max(1.0))).powi(2)
    });
    let dim = keep.len();
    let assembly = Assembly { energy, boundary: CsrMatrix::zeros(dim, dim), mass, meta };
    assembly.validate()?;
    Ok(assembly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> EffectiveSpec {
        EffectiveSpec { n, n_omega: n as f64, lambda: 1.0 }
    }

    #[test]
    fn dirichlet_ends_are_removed() {
        let mesh = Mesh1D::uniform(0.0, 10.0, 20).unwrap();
        let a = assemble_effective(&spec(2), &mesh, EndCondition::Dirichlet).unwrap();
        assert_eq!(a.dim(), 19);
        assert_eq!(a.meta.kind, ProblemKind::Effective);
    }

    #[test]
    fn free_end_at_origin_is_forbidden() {
        let mesh = Mesh1D::uniform(0.0, 10.0, 20).unwrap();
        assert!(assemble_effective(&spec(2), &mesh, EndCondition::Natural).is_err());
        let ext = Mesh1D::uniform(1.0, 10.0, 20).unwrap();
        let a = assemble_effective(&spec(2), &ext, EndCondition::Natural).unwrap();
        assert_eq!(a.dim(), 20);
        assert_eq!(a.meta.kind, ProblemKind::Exterior);
    }

    #[test]
    fn potential_on_hat_function_is_exact() {
        // one interior hat on (0, 2) peaking at 1: ∫ φ²/s over (0,1) is 1/2,
        // over (1,2) it is ∫ (2-s)²/s = 4 ln 2 - 5/2
        let mesh = Mesh1D::uniform(0.0, 2.0, 2).unwrap();
        let s = EffectiveSpec { n: 2, n_omega: 1.0, lambda: 1.0 };
        let a = assemble_effective(&s, &mesh, EndCondition::Dirichlet).unwrap();
        let expected = 2.0 - (0.5 + 4.0 * 2f64.ln() - 2.5);
        approx::assert_relative_eq!(a.energy.get(0, 0), expected, max_relative = 1e-14);
    }
}
