//! Reference eigenvalues: the hydrogen-like effective operator, the round
//! cone, the planar-sector law, interval and rectangle Robin spectra, the
//! radial Robin ground state of the unit ball, and the exterior bound.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};
use special::{bessel_i_ratio, bessel_j_ratio, bisect};

/// `A_λ = −d²/ds² + ((n² − 2n)/(4s²) − N_ω/(λs))` on the half-line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSpec {
    pub n: usize,
    pub n_omega: f64,
    pub lambda: f64,
}

impl EffectiveSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::spec("n", "must be at least 1"));
        }
        if !(self.n_omega.is_finite() && self.n_omega > 0.0) {
            return Err(Error::spec("n_omega", format!("must be positive, got {}", self.n_omega)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::spec("lambda", format!("must be positive, got {}", self.lambda)));
        }
        Ok(())
    }
}

fn check_index(j: usize) -> Result<()> {
    if j < 1 {
        return Err(Error::InvalidInput("eigenvalue index j starts at 1".into()));
    }
    Ok(())
}

/// `E_j(A_λ) = −N_ω² / ((2j + n − 2)² λ²)`.
pub fn effective_exact(spec: &EffectiveSpec, j: usize) -> Result<f64> {
    spec.validate()?;
    check_index(j)?;
    if spec.n < 2 {
        return Err(Error::spec("n", "the effective operator needs n >= 2; use sector_law for n = 1"));
    }
    let q = (2 * j + spec.n - 2) as f64;
    Ok(-(spec.n_omega / (q * spec.lambda)).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundCone {
    /// Ground-state energy `−(1 + ε²)/ε²`.
    pub value: f64,
    /// Decay rate `√(1 + ε²)/ε` of `exp(−x₁ √(1+ε²)/ε)` along the axis.
    pub decay_rate: f64,
}

/// Exact ground state of the cone over the unit disk with α = 1.
pub fn round_cone_exact(eps: f64) -> Result<RoundCone> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    Ok(RoundCone { value: -(1.0 + eps * eps) / (eps * eps), decay_rate: (1.0 + eps * eps).sqrt() / eps })
}

/// `−1 / ((2j − 1)² ε²)`, the leading term for the planar sector.
pub fn sector_law(j: usize, eps: f64) -> Result<f64> {
    check_index(j)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let q = (2 * j - 1) as f64;
    Ok(-1.0 / (q * q * eps * eps))
}

/// `−N_ω/(cλ)`: the Coulomb tail on `(c, ∞)` bounds the exterior
/// effective operator from below.
pub fn exterior_lower_bound(n_omega: f64, lambda: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && lambda > 0.0 && n_omega > 0.0) {
        return Err(Error::InvalidInput(format!("need positive n_omega, lambda, c; got {n_omega}, {lambda}, {c}")));
    }
    Ok(-n_omega / (c * lambda))
}

/// Eigenvalues of `−f'' ` on `(−L, L)` with `f'(±L) = ±r f(±L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RobinRoots {
    /// Ascending.
    pub values: Vec<f64>,
    /// How many of `values` are negative.
    pub negative: usize,
}

/// Separated eigenvalues of the interval Robin problem:
///
/// - negative, even `cosh`: `k tanh kL = r`; odd `sinh`: `k coth kL = r`
///   (only when `rL > 1`)
/// - positive, even `cos`: `κ sin κL + r cos κL = 0`; odd `sin`:
///   `κ cos κL − r sin κL = 0`
///
/// Every root is bracketed between consecutive quarter periods and
/// bisected to full precision. Any real `r` is accepted; `E = 0` appears
/// exactly when `rL = 1` (the linear mode) or `r = 0` (the constant).
pub fn interval_robin_oracle(r: f64, half_length: f64, count: usize) -> Result<RobinRoots> {
    let l = half_length;
    if !(l > 0.0 && l.is_finite() && r.is_finite()) {
        return Err(Error::InvalidInput(format!("need finite r and positive L, got r = {r}, L = {l}")));
    }
    let mut values = Vec::with_capacity(count + 2);
    if r > 0.0 {
        let k = root_increasing(|k| k * (k * l).tanh() - r)?;
        values.push(-k * k);
        if r * l > 1.0 {
            let k = root_increasing(|k| if k == 0.0 { 1.0 / l - r } else { k / (k * l).tanh() - r })?;
            values.push(-k * k);
        }
    }
    if r == 0.0 || r * l == 1.0 {
        values.push(0.0);
    }
    let negative = values.iter().filter(|&&v| v < 0.0).count();
    let half_pi = std::f64::consts::FRAC_PI_2 / l;
    let even = |k: f64| k * (k * l).sin() + r * (k * l).cos();
    let odd = |k: f64| k * (k * l).cos() - r * (k * l).sin();
    // quarter-period brackets: [(q)·π/(2L), (q+1)·π/(2L)], q = 0, 1, ...
    let mut q = 0usize;
    while values.len() < count + 2 && q < 4 * count + 8 {
        let (lo, hi) = (q as f64 * half_pi, (q + 1) as f64 * half_pi);
        let lo_open = if q == 0 { 1e-9 * half_pi } else { lo };
        for g in [&even as &dyn Fn(f64) -> f64, &odd] {
            let (a, b) = (g(lo_open), g(hi));
            if a != 0.0 && b != 0.0 && a.signum() != b.signum() {
                let k = bisect(lo_open, hi, g)?;
                values.push(k * k);
            } else if b == 0.0 && q > 0 {
                // root exactly on a quarter period (r = 0)
                values.push(hi * hi);
            }
        }
        q += 1;
    }
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(1.0));
    values.truncate(count);
    Ok(RobinRoots { negative: negative.min(values.len()), values })
}

fn root_increasing(h: impl Fn(f64) -> f64) -> Result<f64> {
    let mut hi = 1.0;
    while h(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoConvergence("no bracket for increasing root".into()));
        }
    }
    bisect(0.0, hi, h)
}

/// Lowest `count` eigenvalues of the Robin problem on a centered box,
/// as sorted sums of the per-axis interval eigenvalues.
pub fn rectangle_separation(r: f64, sides: &[f64], count: usize) -> Result<Vec<f64>> {
    if sides.is_empty() {
        return Err(Error::InvalidInput("rectangle needs at least one side".into()));
    }
    let mut sums = vec![0.0];
    for &side in sides {
        let axis = interval_robin_oracle(r, 0.5 * side, count)?.values;
        let mut next: Vec<f64> = sums.iter().flat_map(|s| axis.iter().map(move |a| s + a)).collect();
        next.sort_by(f64::total_cmp);
        next.truncate(count);
        sums = next;
    }
    Ok(sums)
}

/// Radial Robin ground state of the unit ball in ℝⁿ,
/// `−(ρⁿ⁻¹ f')'/ρⁿ⁻¹ = E f`, `f'(1) = r f(1)`, for any real `r`.
///
/// With `ν = n/2 − 1` the regular solutions are `ρ^{−ν} I_ν(kρ)` for
/// `E = −k²` and `ρ^{−ν} J_ν(κρ)` for `E = κ²`, so the boundary condition
/// reads `k I_{ν+1}(k)/I_ν(k) = r` or `κ J_{ν+1}(κ)/J_ν(κ) = −r`. Both
/// left sides increase from 0 (the latter up to the first zero of `J_ν`),
/// and the ratios come from continued fractions, so `tol` only bounds
/// the bisection width.
pub fn ball_robin_radial_oracle(n: usize, r: f64, tol: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::spec("n", "ball oracle needs n >= 2"));
    }
    if !(tol > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("need finite r and positive tol, got r = {r}, tol = {tol}")));
    }
    let nu = n as f64 / 2.0 - 1.0;
    if r == 0.0 {
        return Ok(0.0);
    }
    let root = if r > 0.0 {
        let h = |k: f64| if k == 0.0 { -r } else { k * bessel_i_ratio(nu, k).unwrap_or(f64::NAN) - r };
        let mut hi = 1.0;
        while !(h(hi) > 0.0) {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::NoConvergence(format!("no bracket for r = {r}")));
            }
        }
        -bisect(0.0, hi, h)?.powi(2)
    } else {
        // past the first zero of J_ν the ratio turns negative: treat as +∞
        let target = -r;
        let h = |k: f64| {
            if k == 0.0 {
                return -target;
            }
            let q = bessel_j_ratio(nu, k).unwrap_or(f64::INFINITY);
            if q < 0.0 || !q.is_finite() {
                f64::INFINITY
            } else {
                k * q - target
            }
        };
        let mut hi = 0.05;
        while !(h(hi) > 0.0) {
            hi += 0.05;
            if hi > 1e6 {
                return Err(Error::NoConvergence(format!("no bracket for r = {r}")));
            }
        }
        bisect(0.0, hi, h)?.powi(2)
    };
    if !root.is_finite() {
        return Err(Error::NoConvergence(format!("radial oracle failed at r = {r}")));
    }
    Ok(root)
}

/// Centered difference `(E(h) − E(−h))/(2h)` with one Richardson step,
/// `(4 D(h/2) − D(h))/3`.
pub fn richardson_slope(e: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((e(h)? - e(-h)?) / (2.0 * h)) };
    let (coarse, fine) = (d(h)?, d(0.5 * h)?);
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn effective_values() {
        let s = EffectiveSpec { n: 2, n_omega: 2.0, lambda: 1.0 };
        assert_eq!(effective_exact(&s, 1).unwrap(), -1.0);
        assert_eq!(effective_exact(&EffectiveSpec { lambda: 2.0, ..s }, 1).unwrap(), -0.25);
        assert_eq!(effective_exact(&EffectiveSpec { n: 3, n_omega: 3.0, lambda: 1.0 }, 1).unwrap(), -1.0);
        assert!(effective_exact(&s, 0).is_err());
        assert!(effective_exact(&EffectiveSpec { n: 1, ..s }, 1).is_err());
    }

    #[test]
    fn round_cone_values() {
        assert_eq!(round_cone_exact(1.0).unwrap().value, -2.0);
        assert_relative_eq!(round_cone_exact(0.2).unwrap().value, -26.0, max_relative = 1e-14);
        assert_relative_eq!(round_cone_exact(0.1).unwrap().value, -101.0, max_relative = 1e-14);
        assert!(round_cone_exact(0.0).is_err());
    }

    #[test]
    fn sector_and_exterior() {
        assert_relative_eq!(sector_law(1, 0.1).unwrap(), -100.0, max_relative = 1e-14);
        assert_relative_eq!(sector_law(2, 0.1).unwrap(), -100.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(exterior_lower_bound(2.0, 0.1, 1.0).unwrap(), -20.0, max_relative = 1e-14);
        assert_relative_eq!(exterior_lower_bound(2.0, 0.1, 0.25).unwrap(), -80.0, max_relative = 1e-14);
    }

    #[test]
    fn interval_roots_satisfy_their_equations() {
        let roots = interval_robin_oracle(1.0, 1.0, 1).unwrap();
        let k = (-roots.values[0]).sqrt();
        assert!((k * k.tanh() - 1.0).abs() < 1e-12);
        assert_eq!(roots.negative, 1);
        assert_eq!(interval_robin_oracle(2.0, 1.0, 3).unwrap().negative, 2);
        // r = 1, L = 1: one negative eigenvalue, then the linear mode at 0
        let r = interval_robin_oracle(1.0, 1.0, 3).unwrap();
        assert_eq!(r.values[1], 0.0);
        let kappa = r.values[2].sqrt();
        assert!((kappa * kappa.sin() + kappa.cos()).abs() < 1e-12);
    }

    #[test]
    fn neumann_interval() {
        let r = interval_robin_oracle(0.0, 1.0, 4).unwrap();
        let pi2 = std::f64::consts::FRAC_PI_2;
        for (j, v) in r.values.iter().enumerate() {
            assert_relative_eq!(*v, (j as f64 * pi2).powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn rectangle_is_sum() {
        let e = rectangle_separation(1.0, &[2.0, 2.0], 3).unwrap();
        let one = interval_robin_oracle(1.0, 1.0, 2).unwrap().values;
        assert_relative_eq!(e[0], 2.0 * one[0], max_relative = 1e-15);
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
        assert!(rectangle_separation(1e-8, &[2.0, 2.0], 1).unwrap()[0].abs() < 1e-7);
    }

    #[test]
    fn ball_oracle_small_r_and_signs() {
        assert_eq!(ball_robin_radial_oracle(2, 0.0, 1e-12).unwrap(), 0.0);
        let e = ball_robin_radial_oracle(2, 0.01, 1e-12).unwrap();
        assert!((e + 0.02).abs() < 1e-4);
        assert!(ball_robin_radial_oracle(2, -0.01, 1e-12).unwrap() > 0.0);
        // n = 3 reduces to k coth k − 1 = r
        let e3 = ball_robin_radial_oracle(3, 1.5, 1e-12).unwrap();
        let k = (-e3).sqrt();
        assert!((k / k.tanh() - 1.0 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn slopes_at_zero() {
        let disk = richardson_slope(|r| ball_robin_radial_oracle(2, r, 1e-14), 1e-3).unwrap();
        assert!((disk + 2.0).abs() < 1e-4 * 2.0);
        let interval = richardson_slope(|r| Ok(interval_robin_oracle(r, 1.0, 1)?.values[0]), 1e-3).unwrap();
        assert!((interval + 1.0).abs() < 1e-6);
    }
}
