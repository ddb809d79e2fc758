use super::transverse::{transverse_ops, TransverseKind, TransverseMesh};
use super::{Assembly, AssemblyMeta, ProblemKind};
use crate::geometry::{CrossSection, Shape};
use crate::{Error, Result};

/// Robin form `b_r(f) = ∫_ω |∇f|² − r ∫_∂ω f²` on ω, with `r` left symbolic.
///
/// Balls and annuli use the radial reduction (the ground state is radial),
/// rectangles a bilinear tensor grid, intervals 1D elements.
pub fn assemble_cross_section_robin(cs: &CrossSection, mesh: TransverseMesh) -> Result<Assembly> {
    let kind = match &cs.shape {
        Shape::Interval { .. } => TransverseKind::Full,
        Shape::Rectangle { sides } if sides.len() == 2 => TransverseKind::Full,
        Shape::Rectangle { sides } => {
            return Err(Error::Unsupported(format!("rectangle cross-sections in n = {} dimensions", sides.len())))
        }
        Shape::Ball { .. } | Shape::Annulus { .. } => TransverseKind::Radial { m: 0 },
    };
    let ops = transverse_ops(cs, mesh, kind)?;
    if ops.dim() < 4 {
        return Err(Error::InvalidMesh(format!("cross-section mesh too coarse: {} unknowns", ops.dim())));
    }
    let mut meta = AssemblyMeta::new(ProblemKind::CrossSectionRobin, cs.n(), cs.n_omega, ops.descriptor.clone());
    meta.cross_section = Some(cs.id());
    meta.radius_r = Some(cs.radius_r);
    let assembly = Assembly { boundary: ops.boundary(), energy: ops.stiff, mass: ops.mass, meta };
    assembly.validate()?;
    Ok(assembly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_cross_section, CrossSectionSpec};

    #[test]
    fn too_coarse_is_rejected() {
        let cs = make_cross_section(&CrossSectionSpec::interval(1.0)).unwrap();
        assert!(assemble_cross_section_robin(&cs, TransverseMesh { cells: 2 }).is_err());
        assert_eq!(assemble_cross_section_robin(&cs, TransverseMesh { cells: 3 }).unwrap().dim(), 4);
    }

    #[test]
    fn box_in_three_dimensions_is_unsupported() {
        let cs = make_cross_section(&CrossSectionSpec::rectangle(&[1.0, 1.0, 1.0])).unwrap();
        assert!(matches!(assemble_cross_section_robin(&cs, TransverseMesh::default()), Err(Error::Unsupported(_))));
    }
}
