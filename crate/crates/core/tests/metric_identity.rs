//! The assembled cone forms against brute-force integrals over the physical
//! cone. A random discrete function is pulled back to Cartesian
//! coordinates; its gradient comes from central differences in `x`, the
//! volume and surface elements from the parametrization, and every mesh
//! cell is integrated with Gauss–Legendre. Nothing here uses the
//! stretched-coordinate form of the energy.

use conespec::assembly::{assemble_cone, ConeMode, Mesh1D, TransverseMesh};
use conespec::geometry::{make_cross_section, CrossSectionSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gauss–Legendre nodes and weights on (−1, 1) by Newton on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn on_cell(rule: &[(f64, f64)], a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    rule.iter().map(move |&(x, w)| (0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w))
}

fn hat(nodes: &[f64], i: usize, x: f64) -> f64 {
    let left = i > 0 && x >= nodes[i - 1] && x <= nodes[i];
    let right = i + 1 < nodes.len() && x >= nodes[i] && x <= nodes[i + 1];
    if left {
        (x - nodes[i - 1]) / (nodes[i] - nodes[i - 1])
    } else if right {
        (nodes[i + 1] - x) / (nodes[i + 1] - nodes[i])
    } else {
        0.0
    }
}

/// P1 ⊗ P1 function on `(0, a) × ω`: a tip value constant in t, interior
/// s-nodes times transverse nodes, zero at `s = a`.
struct Discrete {
    s: Vec<f64>,
    t: Vec<f64>,
    coef: Vec<f64>,
}

impl Discrete {
    fn eval(&self, s: f64, t: f64) -> f64 {
        let nt = self.t.len();
        let mut v = self.coef[0] * hat(&self.s, 0, s);
        for is in 1..self.s.len() - 1 {
            let phi = hat(&self.s, is, s);
            if phi != 0.0 {
                let g: f64 = (0..nt).map(|it| self.coef[1 + (is - 1) * nt + it] * hat(&self.t, it, t)).sum();
                v += phi * g;
            }
        }
        v
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `|∇U|²` by central differences of `U` in every Cartesian direction.
fn grad_sq(u: impl Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
    let h = 1e-6 * norm(x).max(1e-3);
    (0..x.len())
        .map(|k| {
            let (mut p, mut m) = (x.to_vec(), x.to_vec());
            p[k] += h;
            m[k] -= h;
            ((u(&p) - u(&m)) / (2.0 * h)).powi(2)
        })
        .sum()
}

struct Forms {
    energy: f64,
    boundary: f64,
    mass: f64,
}

fn compare(label: &str, assembled: Forms, brute: Forms) {
    for (name, a, b, tol) in [
        ("energy", assembled.energy, brute.energy, 1e-7),
        ("boundary", assembled.boundary, brute.boundary, 1e-10),
        ("mass", assembled.mass, brute.mass, 1e-10),
    ] {
        let rel = (a - b).abs() / b.abs();
        assert!(rel < tol, "{label} {name}: assembled {a}, physical {b}, rel {rel:e}");
    }
}

#[test]
fn interval_cone_matches_planar_integrals() {
    let (eps, a, l) = (0.3, 2.0, 1.0);
    let cs = make_cross_section(&CrossSectionSpec::interval(l)).unwrap();
    let s_mesh = Mesh1D::with_first_cell(0.0, a, 7, 0.05).unwrap();
    let t_cells = 4;
    let asm = assemble_cone(&cs, eps, a, &s_mesh, TransverseMesh { cells: t_cells }, ConeMode::FullTensor).unwrap();
    let t: Vec<f64> = (0..=t_cells).map(|i| -l + 2.0 * l * i as f64 / t_cells as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rule = gauss_legendre(12);
    for trial in 0..3 {
        let coef: Vec<f64> = (0..asm.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = Discrete { s: s_mesh.nodes().to_vec(), t: t.clone(), coef: coef.clone() };
        // x = (s, εst)
        let pulled = |x: &[f64]| u.eval(x[0], x[1] / (eps * x[0]));
        let (mut energy, mut mass, mut boundary) = (0.0, 0.0, 0.0);
        for sc in s_mesh.nodes().windows(2) {
            for tc in t.windows(2) {
                for (s, ws) in on_cell(&rule, sc[0], sc[1]) {
                    for (tt, wt) in on_cell(&rule, tc[0], tc[1]) {
                        let jac = (1.0 * (eps * s) - 0.0 * (eps * tt)).abs();
                        let x = [s, eps * s * tt];
                        energy += ws * wt * jac * grad_sq(pulled, &x);
                        mass += ws * wt * jac * u.eval(s, tt).powi(2);
                    }
                }
            }
            // the lateral lines x = (s, ±εls)
            for (s, ws) in on_cell(&rule, sc[0], sc[1]) {
                let speed = norm(&[1.0, eps * l]);
                boundary += ws * speed * (u.eval(s, l).powi(2) + u.eval(s, -l).powi(2));
            }
        }
        compare(
            &format!("interval trial {trial}"),
            Forms {
                energy: asm.energy.quadratic_form(&coef),
                boundary: asm.boundary.quadratic_form(&coef),
                mass: asm.mass.quadratic_form(&coef),
            },
            Forms { energy, boundary, mass },
        );
    }
}

#[test]
fn disk_cone_matches_spatial_integrals() {
    let (eps, a) = (0.25, 1.5);
    let cs = make_cross_section(&CrossSectionSpec::ball(2, 1.0)).unwrap();
    let s_mesh = Mesh1D::with_first_cell(0.0, a, 6, 0.04).unwrap();
    let t_cells = 4;
    let asm = assemble_cone(&cs, eps, a, &s_mesh, TransverseMesh { cells: t_cells }, ConeMode::Fourier { m: 0 }).unwrap();
    let t: Vec<f64> = (0..=t_cells).map(|i| i as f64 / t_cells as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rule = gauss_legendre(12);
    let two_pi = 2.0 * std::f64::consts::PI;
    for trial in 0..3 {
        let coef: Vec<f64> = (0..asm.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = Discrete { s: s_mesh.nodes().to_vec(), t: t.clone(), coef: coef.clone() };
        // x = (s, εsρ cos θ, εsρ sin θ); the integrands do not depend on θ
        let pulled = |x: &[f64]| u.eval(x[0], (x[1] * x[1] + x[2] * x[2]).sqrt() / (eps * x[0]));
        let (mut energy, mut mass, mut boundary) = (0.0, 0.0, 0.0);
        for sc in s_mesh.nodes().windows(2) {
            for tc in t.windows(2) {
                for (s, ws) in on_cell(&rule, sc[0], sc[1]) {
                    for (rho, wr) in on_cell(&rule, tc[0], tc[1]) {
                        // columns ∂/∂s, ∂/∂ρ, ∂/∂θ at θ = 0
                        let jac = det3([[1.0, 0.0, 0.0], [eps * rho, eps * s, 0.0], [0.0, 0.0, eps * s * rho]]).abs();
                        let x = [s, eps * s * rho, 0.0];
                        energy += two_pi * ws * wr * jac * grad_sq(pulled, &x);
                        mass += two_pi * ws * wr * jac * u.eval(s, rho).powi(2);
                    }
                }
            }
            // lateral surface ρ = 1: |∂s x × ∂θ x|
            for (s, ws) in on_cell(&rule, sc[0], sc[1]) {
                let (ds, dth) = ([1.0, eps, 0.0], [0.0, 0.0, eps * s]);
                let cross = [ds[1] * dth[2] - ds[2] * dth[1], ds[2] * dth[0] - ds[0] * dth[2], ds[0] * dth[1] - ds[1] * dth[0]];
                boundary += two_pi * ws * norm(&cross) * u.eval(s, 1.0).powi(2);
            }
        }
        // the assembly drops the common angular factor 2π
        compare(
            &format!("disk trial {trial}"),
            Forms {
                energy: asm.energy.quadratic_form(&coef),
                boundary: asm.boundary.quadratic_form(&coef),
                mass: asm.mass.quadratic_form(&coef),
            },
            Forms { energy: energy / two_pi, boundary: boundary / two_pi, mass: mass / two_pi },
        );
    }
}
