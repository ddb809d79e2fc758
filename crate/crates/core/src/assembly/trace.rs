use super::cone::{cone_blocks, cone_meta};
use super::{require_positive, Assembly, ConeMode, Mesh1D, ProblemKind, TransverseMesh};
use crate::geometry::CrossSection;
use crate::Result;

/// Pencil `(boundary − δ·energy) x = C · mass · x` on the truncated cone.
/// Its largest eigenvalue is the discrete optimal constant in
/// `‖u‖²_∂ ≤ δ‖∇u‖² + C_δ‖u‖²`.
///
/// Stored as energy `−δ·∇-form`, boundary with coupling `−1`, so
/// [`Assembly::pencil`] with the recorded coupling yields the pencil above.
pub fn assemble_trace_problem(
    cs: &CrossSection,
    eps: f64,
    a: f64,
    delta: f64,
    s_mesh: &Mesh1D,
    t_mesh: TransverseMesh,
    mode: ConeMode,
) -> Result<Assembly> {
    require_positive("eps", eps)?;
    require_positive("delta", delta)?;
    let blocks = cone_blocks(cs, a, s_mesh, t_mesh, mode)?;
    let mut meta = cone_meta(cs, eps, a, mode, &blocks, ProblemKind::Trace);
    meta.delta = Some(delta);
    meta.coupling = Some(-1.0);
    // Robin scaling: C_δ = −δ E₁(α = 1/δ) = −E₁(α = 1)/δ
    meta.prediction = meta.prediction.map(|e| -e / delta);
    let assembly = Assembly {
        energy: blocks.energy(eps).scale(-delta),
        boundary: blocks.boundary(eps),
        mass: blocks.mass(eps),
        meta,
    };
    assembly.validate()?;
    Ok(assembly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_cross_section, CrossSectionSpec};

    #[test]
    fn delta_must_be_positive() {
        let cs = make_cross_section(&CrossSectionSpec::ball(2, 1.0)).unwrap();
        let s = Mesh1D::uniform(0.0, 1.0, 6).unwrap();
        let t = TransverseMesh { cells: 3 };
        assert!(assemble_trace_problem(&cs, 0.3, 1.0, 0.0, &s, t, ConeMode::Fourier { m: 0 }).is_err());
        let a = assemble_trace_problem(&cs, 0.3, 1.0, 0.5, &s, t, ConeMode::Fourier { m: 0 }).unwrap();
        assert_eq!(a.meta.coupling, Some(-1.0));
    }
}
