use std::fmt;

use crate::{Error, Result};

/// Strictly increasing node list on `[s0, s1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    grading: f64,
}

/// Geometric mesh on `[s0, s1]` with `cells` cells whose sizes grow by
/// the factor `grading` away from `s0`.
pub fn build_mesh_1d(s0: f64, s1: f64, cells: usize, grading: f64) -> Result<Mesh1D> {
    if !(s0.is_finite() && s1.is_finite()) || s0 >= s1 {
        return Err(Error::InvalidMesh(format!("degenerate interval [{s0}, {s1}]")));
    }
    if cells < 2 {
        return Err(Error::InvalidMesh(format!("need at least 2 cells, got {cells}")));
    }
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(Error::InvalidMesh(format!("grading must be >= 1, got {grading}")));
    }
    let len = s1 - s0;
    let mut nodes = Vec::with_capacity(cells + 1);
    nodes.push(s0);
    if grading == 1.0 {
        for i in 1..cells {
            nodes.push(s0 + len * i as f64 / cells as f64);
        }
    } else {
        // partial sums of h0 γ^i, normalized so the last node is s1
        let total = (grading.powi(cells as i32) - 1.0) / (grading - 1.0);
        for i in 1..cells {
            let partial = (grading.powi(i as i32) - 1.0) / (grading - 1.0);
            nodes.push(s0 + len * partial / total);
        }
    }
    nodes.push(s1);
    for w in nodes.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidMesh(format!("grading {grading} underflows the cell size on [{s0}, {s1}]")));
        }
    }
    Ok(Mesh1D { nodes, grading })
}

impl Mesh1D {
    pub fn uniform(s0: f64, s1: f64, cells: usize) -> Result<Self> {
        build_mesh_1d(s0, s1, cells, 1.0)
    }

    /// Geometric mesh whose first cell has size at most `first_cell`.
    /// The grading is found by bisection; a uniform mesh is returned when
    /// it already satisfies the bound.
    pub fn with_first_cell(s0: f64, s1: f64, cells: usize, first_cell: f64) -> Result<Self> {
        if !(first_cell > 0.0) {
            return Err(Error::InvalidMesh(format!("first cell size must be positive, got {first_cell}")));
        }
        let len = s1 - s0;
        if len / cells as f64 <= first_cell {
            return build_mesh_1d(s0, s1, cells, 1.0);
        }
        let first = |g: f64| len * (g - 1.0) / (g.powi(cells as i32) - 1.0);
        let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
        while first(hi) > first_cell {
            hi = 1.0 + 2.0 * (hi - 1.0);
            if hi > 1e3 {
                return Err(Error::InvalidMesh("requested first cell is too small".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if first(mid) > first_cell {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        build_mesh_1d(s0, s1, cells, hi)
    }

    /// Mesh from explicit nodes.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidMesh("need at least 2 cells".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh("nodes must be finite and strictly increasing".into()));
        }
        Ok(Mesh1D { nodes, grading: f64::NAN })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Grading ratio; NaN for meshes given by explicit nodes.
    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn cell_sizes(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    /// Splits every cell in two. The result contains all current nodes.
    pub fn refine(&self) -> Mesh1D {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.end());
        Mesh1D { nodes, grading: self.grading.sqrt() }
    }

    /// Appends cells beyond the current end until `new_end` is reached,
    /// continuing the size of the last cell with the mesh grading. The
    /// existing nodes are kept, so the old discrete space embeds into the
    /// new one by zero extension.
    pub fn extend_to(&self, new_end: f64) -> Result<Mesh1D> {
        if !(new_end > self.end()) {
            return Err(Error::InvalidMesh(format!("cannot extend mesh ending at {} to {new_end}", self.end())));
        }
        let growth = if self.grading.is_finite() { self.grading } else { 1.0 };
        let mut nodes = self.nodes.clone();
        let mut h = self.cell_sizes().last().unwrap();
        loop {
            h *= growth;
            let x = *nodes.last().unwrap() + h;
            if x >= new_end - 0.5 * h {
                break;
            }
            nodes.push(x);
        }
        nodes.push(new_end);
        Ok(Mesh1D { nodes, grading: self.grading })
    }
}

impl fmt::Display for Mesh1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hmin = self.cell_sizes().fold(f64::INFINITY, f64::min);
        write!(
            f,
            "[{}, {}] cells={} grading={:.6} hmin={:.3e}",
            self.start(),
            self.end(),
            self.cells(),
            self.grading,
            hmin
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_partition() {
        let m = build_mesh_1d(0.0, 1.0, 4, 1.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn geometric_partition() {
        let m = build_mesh_1d(0.0, 1.0, 3, 2.0).unwrap();
        let h: Vec<f64> = m.cell_sizes().collect();
        assert_relative_eq!(h[0], 1.0 / 7.0, epsilon = 1e-15);
        assert_relative_eq!(h[1], 2.0 / 7.0, epsilon = 1e-15);
        assert_relative_eq!(h[2], 4.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_mesh_1d(1.0, 1.0, 4, 1.0).is_err());
        assert!(build_mesh_1d(0.0, 1.0, 1, 1.0).is_err());
        assert!(build_mesh_1d(0.0, 1.0, 4, 0.9).is_err());
    }

    #[test]
    fn first_cell_target() {
        let m = Mesh1D::with_first_cell(0.0, 8.0, 200, 0.005).unwrap();
        let h0 = m.cell_sizes().next().unwrap();
        assert!(h0 <= 0.005 * (1.0 + 1e-9));
        assert_relative_eq!(h0, 0.005, max_relative = 1e-6);
        assert_eq!(m.end(), 8.0);
    }

    #[test]
    fn refine_and_extend_are_nested() {
        let m = build_mesh_1d(0.0, 2.0, 5, 1.3).unwrap();
        let r = m.refine();
        assert_eq!(r.cells(), 10);
        assert!(m.nodes().iter().all(|x| r.nodes().contains(x)));
        let e = m.extend_to(4.0).unwrap();
        assert_eq!(&e.nodes()[..m.nodes().len()], m.nodes());
        assert_eq!(e.end(), 4.0);
    }

    proptest::proptest! {
        #[test]
        fn node_count_is_cells_plus_one(cells in 2usize..200, g in 1.0f64..1.2) {
            let m = build_mesh_1d(0.0, 3.0, cells, g).unwrap();
            proptest::prop_assert_eq!(m.nodes().len(), cells + 1);
            let h: Vec<f64> = m.cell_sizes().collect();
            proptest::prop_assert!(h.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)));
        }
    }
}
