//! Envelope (skyline) `LDLᵀ` factorization of sparse symmetric matrices
//! with a reverse Cuthill–McKee ordering. Without pivoting it is only used
//! on matrices that are definite or whose inertia is the point of the
//! exercise (Sylvester's law: the pivot signs count the eigenvalues below
//! a shift).

use std::collections::VecDeque;

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Ldlt {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// first column of the envelope of each (permuted) row
    first: Vec<usize>,
    /// offsets of each row's envelope in `lower`
    ptr: Vec<usize>,
    lower: Vec<f64>,
    d: Vec<f64>,
}

/// Inertia of a factored symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl Ldlt {
    /// Factors `a`, choosing between the natural and the RCM ordering by
    /// envelope size.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
        }
        let natural: Vec<usize> = (0..a.nrows()).collect();
        let rcm = reverse_cuthill_mckee(a);
        let perm = if profile(a, &rcm) < profile(a, &natural) { rcm } else { natural };
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                let nj = inv[j];
                if nj < first[new] {
                    first[new] = nj;
                }
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for i in 0..n {
            ptr[i + 1] = ptr[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; ptr[n]];
        let mut d = vec![0.0; n];
        let mut row = Vec::new();
        let diag_scale = (0..a.nrows()).fold(f64::MIN_POSITIVE, |m, i| m.max(a.get(i, i).abs()));
        for i in 0..n {
            let fi = first[i];
            row.clear();
            row.resize(i - fi + 1, 0.0);
            for (j, v) in a.row(perm[i]) {
                let nj = inv[j];
                if nj <= i {
                    row[nj - fi] += v;
                }
            }
            // u_ij = a_ij − Σ_k u_ik L_jk, stored in `row` until scaled
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let lj = &lower[ptr[j]..ptr[j + 1]];
                let mut acc = row[j - fi];
                for k in lo..j {
                    acc -= row[k - fi] * lj[k - fj];
                }
                row[j - fi] = acc;
            }
            let mut di = row[i - fi];
            let li = &mut lower[ptr[i]..ptr[i + 1]];
            for j in fi..i {
                let u = row[j - fi];
                let l = u / d[j];
                li[j - fi] = l;
                di -= u * l;
            }
            if di == 0.0 {
                // exact cancellation: perturb by a rounding-sized amount, as
                // Sturm-count codes do, so the factorization (and the count)
                // continues for the nearby matrix
                di = -f64::EPSILON * diag_scale;
            }
            if !di.is_finite() {
                return Err(Error::Factorization { shift: f64::NAN, reason: format!("non-finite pivot at row {i}") });
            }
            d[i] = di;
        }
        Ok(Ldlt { n, perm, first, ptr, lower, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` (strictly lower envelope).
    pub fn fill(&self) -> usize {
        self.lower.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    /// Signs of the pivots. Exact zeros were already perturbed during the
    /// factorization, so this is the inertia of a nearby matrix.
    pub fn inertia(&self) -> Inertia {
        let mut out = Inertia { negative: 0, zero: 0, positive: 0 };
        for &v in &self.d {
            if v == 0.0 {
                out.zero += 1;
            } else if v < 0.0 {
                out.negative += 1;
            } else {
                out.positive += 1;
            }
        }
        out
    }

    /// First pivot (in elimination order) that is not strictly positive.
    pub fn first_nonpositive_pivot(&self) -> Option<(usize, f64)> {
        let scale = self.d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.d.iter().enumerate().find(|(_, &v)| v <= 1e-14 * scale).map(|(i, &v)| (i, v))
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let li = &self.lower[self.ptr[i]..self.ptr[i + 1]];
            let mut acc = y[i];
            for (k, l) in li.iter().enumerate() {
                acc -= l * y[fi + k];
            }
            y[i] = acc;
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let li = &self.lower[self.ptr[i]..self.ptr[i + 1]];
            for (k, l) in li.iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Envelope size `Σ_i (i − first_i)` under `perm`.
pub fn profile(a: &CsrMatrix, perm: &[usize]) -> usize {
    let n = a.nrows();
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut total = 0;
    for (new, &old) in perm.iter().enumerate() {
        let f = a.row(old).map(|(j, _)| inv[j]).filter(|&j| j < new).min().unwrap_or(new);
        total += new - f;
    }
    total
}

/// Reverse Cuthill–McKee ordering of the symmetric pattern of `a`,
/// component by component from pseudo-peripheral start nodes.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect()).collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, &degree, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut v = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(adj, v);
        let max_level = *levels.iter().filter_map(|l| l.as_ref()).max().unwrap();
        if max_level <= ecc && v != seed {
            break;
        }
        ecc = max_level;
        let far = (0..adj.len())
            .filter(|&w| levels[w] == Some(max_level))
            .min_by_key(|&w| (degree[w], w))
            .unwrap();
        if far == v {
            break;
        }
        v = far;
    }
    v
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Triplets;

    fn laplacian_2d(k: usize) -> CsrMatrix {
        let n = k * k;
        let mut t = Triplets::new(n, n);
        for i in 0..k {
            for j in 0..k {
                let p = i * k + j;
                t.push(p, p, 4.0);
                if i + 1 < k {
                    t.push(p, p + k, -1.0);
                    t.push(p + k, p, -1.0);
                }
                if j + 1 < k {
                    t.push(p, p + 1, -1.0);
                    t.push(p + 1, p, -1.0);
                }
            }
        }
        t.to_csr()
    }

    #[test]
    fn solves_spd_system() {
        let a = laplacian_2d(7);
        let x: Vec<f64> = (0..49).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&x);
        let f = Ldlt::factor(&a).unwrap();
        let y = f.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
        assert_eq!(f.inertia(), Inertia { negative: 0, zero: 0, positive: 49 });
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        // eigenvalues of tridiag(-1, 2, -1) of size 10: 2 - 2cos(kπ/11)
        let n = 10;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        let a = t.to_csr();
        let sigma = 1.0;
        let shifted = CsrMatrix::linear_combination(&[(1.0, &a), (-sigma, &CsrMatrix::identity(n))]).unwrap();
        let expected = (1..=n).filter(|&k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 11.0).cos() < sigma).count();
        assert_eq!(Ldlt::factor(&shifted).unwrap().inertia().negative, expected);
    }

    #[test]
    fn rcm_is_a_permutation_that_does_not_grow_a_band() {
        let a = laplacian_2d(9);
        let p = reverse_cuthill_mckee(&a);
        let mut sorted = p.clone();
        sorted.sort();
        assert_eq!(sorted, (0..81).collect::<Vec<_>>());
        let natural: Vec<usize> = (0..81).collect();
        assert!(profile(&a, &p) <= profile(&a, &natural));
    }
}
