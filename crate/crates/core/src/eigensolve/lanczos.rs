//! Shift-invert Lanczos for `A x = λ M x` on `(A − σM)⁻¹ M`, which is
//! self-adjoint in the `M` inner product. Full reorthogonalization,
//! explicit restarts and locking: each pass runs in the `M`-orthogonal
//! complement of the pairs locked so far, so repeated eigenvalues surface
//! in later passes.

use faer::{Mat, Side};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::ldlt::Ldlt;
use crate::sparse::{dot, CsrMatrix};

pub(crate) struct Lanczos<'a> {
    a: &'a CsrMatrix,
    m: &'a CsrMatrix,
    factor: &'a Ldlt,
    sigma: f64,
    tol: f64,
    rng: ChaCha8Rng,
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    mvectors: Vec<Vec<f64>>,
    pub iterations: usize,
    pub passes: usize,
    budget: usize,
    restart: Option<Vec<f64>>,
}

struct Ritz {
    lambda: f64,
    x: Vec<f64>,
    residual: f64,
}

impl<'a> Lanczos<'a> {
    pub fn new(
        a: &'a CsrMatrix,
        m: &'a CsrMatrix,
        factor: &'a Ldlt,
        sigma: f64,
        tol: f64,
        rng: ChaCha8Rng,
        budget: usize,
    ) -> Self {
        Lanczos {
            a,
            m,
            factor,
            sigma,
            tol,
            rng,
            values: Vec::new(),
            vectors: Vec::new(),
            mvectors: Vec::new(),
            iterations: 0,
            passes: 0,
            budget,
            restart: None,
        }
    }

    pub fn exhausted(&self) -> bool {
        self.iterations >= self.budget || self.values.len() >= self.a.nrows()
    }

    fn random_vector(&mut self) -> Vec<f64> {
        (0..self.a.nrows()).map(|_| self.rng.random_range(-1.0..1.0)).collect()
    }

    /// `M`-orthogonalizes `w` against `basis` (given with `M·basis`), twice.
    fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], mbasis: &[Vec<f64>]) {
        for _ in 0..2 {
            for (q, mq) in basis.iter().zip(mbasis) {
                let c = dot(mq, w);
                if c != 0.0 {
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
        }
    }

    /// One Lanczos pass aiming at the `want` lowest unlocked eigenpairs.
    /// Returns the number of newly locked pairs.
    pub fn pass(&mut self, want: usize) -> usize {
        let dim = self.a.nrows();
        let free = dim - self.values.len();
        if free == 0 || self.iterations >= self.budget {
            return 0;
        }
        self.passes += 1;
        let ncv = free.min((2 * want + 20).max(40)).min(160);
        let mut v = self.restart.take().unwrap_or_else(|| self.random_vector());
        Self::orthogonalize(&mut v, &self.vectors, &self.mvectors);
        let mut mv = self.m.mul_vec(&v);
        let mut norm = dot(&v, &mv).sqrt();
        if !(norm > 1e-300) {
            v = self.random_vector();
            Self::orthogonalize(&mut v, &self.vectors, &self.mvectors);
            mv = self.m.mul_vec(&v);
            norm = dot(&v, &mv).sqrt();
            if !(norm > 1e-300) {
                return 0;
            }
        }
        v.iter_mut().for_each(|x| *x /= norm);
        mv.iter_mut().for_each(|x| *x /= norm);

        let mut q = vec![v];
        let mut mq = vec![mv];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let ritz = loop {
            let j = q.len() - 1;
            let mut w = self.factor.solve(&mq[j]);
            self.iterations += 1;
            let a_j = dot(&mq[j], &w);
            alpha.push(a_j);
            Self::orthogonalize(&mut w, &self.vectors, &self.mvectors);
            Self::orthogonalize(&mut w, &q, &mq);
            let mw = self.m.mul_vec(&w);
            let b = dot(&w, &mw).max(0.0).sqrt();
            let scale = alpha.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            let breakdown = !(b > 1e-13 * scale);
            let steps = q.len();
            let at_end = breakdown || steps >= ncv || self.iterations >= self.budget;
            if steps % 10 == 0 || at_end {
                let ritz = self.ritz_pairs(&alpha, &beta, b, &q, want + 2);
                let converged = ritz.iter().take(want).filter(|r| r.residual <= self.tol).count();
                if converged >= want.min(ritz.len()) || at_end {
                    break ritz;
                }
            }
            beta.push(b);
            q.push(w.iter().map(|x| x / b).collect());
            mq.push(mw.iter().map(|x| x / b).collect());
        };
        let mut locked = 0;
        let mut pending: Vec<Vec<f64>> = Vec::new();
        for r in ritz {
            if r.residual <= self.tol {
                let mut x = r.x;
                // keep the locked set M-orthonormal against rounding drift
                Self::orthogonalize(&mut x, &self.vectors, &self.mvectors);
                let mut mx = self.m.mul_vec(&x);
                let nx = dot(&x, &mx).sqrt();
                x.iter_mut().for_each(|v| *v /= nx);
                mx.iter_mut().for_each(|v| *v /= nx);
                let ax = self.a.mul_vec(&x);
                self.values.push(dot(&x, &ax));
                self.vectors.push(x);
                self.mvectors.push(mx);
                locked += 1;
            } else if pending.len() < want {
                pending.push(r.x);
            }
        }
        if !pending.is_empty() {
            let mut v = vec![0.0; dim];
            for x in &pending {
                v.iter_mut().zip(x).for_each(|(a, b)| *a += b);
            }
            self.restart = Some(v);
        }
        locked
    }

    /// Lowest `count` Ritz pairs of the current tridiagonal matrix. The
    /// residual is that of the shift-inverted operator in the `M` norm,
    /// `β_m |y_m| / θ`, which bounds the eigenvalue error quadratically and
    /// stays attainable when `‖A‖` dwarfs `|λ|‖M‖`.
    fn ritz_pairs(&self, alpha: &[f64], beta: &[f64], next_beta: f64, q: &[Vec<f64>], count: usize) -> Vec<Ritz> {
        let m = alpha.len();
        let t = Mat::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let Ok(eig) = t.self_adjoint_eigen(Side::Lower) else {
            return Vec::new();
        };
        let theta_all = eig.S().column_vector();
        let vecs = eig.U();
        let mut order: Vec<usize> = (0..m).filter(|&i| theta_all[i] > 0.0).collect();
        // largest θ = 1/(λ − σ) is the lowest λ
        order.sort_by(|&i, &j| theta_all[j].total_cmp(&theta_all[i]));
        order
            .into_iter()
            .take(count)
            .map(|i| {
                let theta = theta_all[i];
                let y = vecs.col(i);
                let mut x = vec![0.0; self.a.nrows()];
                for (k, qk) in q.iter().enumerate().take(m) {
                    let c = y[k];
                    x.iter_mut().zip(qk).for_each(|(xi, qi)| *xi += c * qi);
                }
                let lambda = self.sigma + 1.0 / theta;
                let residual = (next_beta * y[m - 1]).abs() / theta;
                Ritz { lambda, x, residual }
            })
            .filter(|r| r.lambda.is_finite())
            .collect()
    }
}
