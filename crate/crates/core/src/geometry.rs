//! Cross-section catalog: intervals, n-balls, boxes and annuli centered at
//! the origin, their measures, the surface-to-volume ratio `N_ω`, the
//! radius `R = sup |t|`, and boundary facets carrying the exact
//! `ρ = (t·ν)²` factor of the lateral surface density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quadrature::gauss;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Interval,
    Ball,
    Rectangle,
    Annulus,
}

/// Kind-specific lengths. Exactly the fields belonging to the kind must be set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<f64>,
}

/// Serialized as `{"kind": ..., "n": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSectionSpec {
    pub kind: ShapeKind,
    pub n: usize,
    pub params: ShapeParams,
}

impl CrossSectionSpec {
    pub fn interval(half_length: f64) -> Self {
        CrossSectionSpec {
            kind: ShapeKind::Interval,
            n: 1,
            params: ShapeParams { half_length: Some(half_length), ..Default::default() },
        }
    }

    pub fn ball(n: usize, radius: f64) -> Self {
        CrossSectionSpec { kind: ShapeKind::Ball, n, params: ShapeParams { radius: Some(radius), ..Default::default() } }
    }

    pub fn rectangle(sides: &[f64]) -> Self {
        CrossSectionSpec {
            kind: ShapeKind::Rectangle,
            n: sides.len(),
            params: ShapeParams { sides: Some(sides.to_vec()), ..Default::default() },
        }
    }

    pub fn annulus(inner: f64, outer: f64) -> Self {
        CrossSectionSpec {
            kind: ShapeKind::Annulus,
            n: 2,
            params: ShapeParams { inner: Some(inner), outer: Some(outer), ..Default::default() },
        }
    }

    /// Short names used on the command line: `interval`, `disk`, `ballN`,
    /// `square`, `rect:AxB[x...]`, `annulus:IN:OUT`.
    pub fn from_name(name: &str) -> Result<Self> {
        let bad = || Error::spec("kind", format!("unknown cross-section name `{name}`"));
        let spec = match name {
            "interval" => Self::interval(1.0),
            "disk" => Self::ball(2, 1.0),
            "square" => Self::rectangle(&[2.0, 2.0]),
            _ => {
                if let Some(rest) = name.strip_prefix("ball") {
                    let n: usize = rest.parse().map_err(|_| bad())?;
                    Self::ball(n, 1.0)
                } else if let Some(rest) = name.strip_prefix("rect:") {
                    let sides = rest.split('x').map(|s| s.parse::<f64>()).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?;
                    Self::rectangle(&sides)
                } else if let Some(rest) = name.strip_prefix("annulus:") {
                    let parts: Vec<f64> = rest.split(':').map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
                    if parts.len() != 2 {
                        return Err(bad());
                    }
                    Self::annulus(parts[0], parts[1])
                } else {
                    return Err(bad());
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let positive = |field: &'static str, v: Option<f64>| -> Result<f64> {
            match v {
                None => Err(Error::spec(field, "missing")),
                Some(x) if !(x.is_finite() && x > 0.0) => Err(Error::spec(field, format!("must be positive, got {x}"))),
                Some(x) => Ok(x),
            }
        };
        let forbid = |field: &'static str, present: bool| -> Result<()> {
            if present {
                Err(Error::spec(field, format!("not a parameter of {:?}", self.kind)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ShapeKind::Interval => {
                if self.n != 1 {
                    return Err(Error::spec("n", "interval requires n = 1"));
                }
                positive("half_length", p.half_length)?;
                forbid("radius", p.radius.is_some())?;
                forbid("sides", p.sides.is_some())?;
                forbid("inner", p.inner.is_some())?;
                forbid("outer", p.outer.is_some())?;
            }
            ShapeKind::Ball => {
                if self.n < 2 {
                    return Err(Error::spec("n", "ball requires n >= 2"));
                }
                positive("radius", p.radius)?;
                forbid("half_length", p.half_length.is_some())?;
                forbid("sides", p.sides.is_some())?;
                forbid("inner", p.inner.is_some())?;
                forbid("outer", p.outer.is_some())?;
            }
            ShapeKind::Rectangle => {
                if self.n < 2 {
                    return Err(Error::spec("n", "rectangle requires n >= 2"));
                }
                let sides = p.sides.as_ref().ok_or_else(|| Error::spec("sides", "missing"))?;
                if sides.len() != self.n {
                    return Err(Error::spec("sides", format!("expected {} side lengths, got {}", self.n, sides.len())));
                }
                for &s in sides {
                    positive("sides", Some(s))?;
                }
                forbid("half_length", p.half_length.is_some())?;
                forbid("radius", p.radius.is_some())?;
                forbid("inner", p.inner.is_some())?;
                forbid("outer", p.outer.is_some())?;
            }
            ShapeKind::Annulus => {
                if self.n != 2 {
                    return Err(Error::spec("n", "annulus requires n = 2"));
                }
                let inner = positive("inner", p.inner)?;
                let outer = positive("outer", p.outer)?;
                if inner >= outer {
                    return Err(Error::spec("inner", format!("inner radius {inner} must be below outer radius {outer}")));
                }
                forbid("half_length", p.half_length.is_some())?;
                forbid("radius", p.radius.is_some())?;
                forbid("sides", p.sides.is_some())?;
            }
        }
        Ok(())
    }
}

/// Validated shape with its parameters unpacked.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Interval { half_length: f64 },
    Ball { n: usize, radius: f64 },
    Rectangle { sides: Vec<f64> },
    Annulus { inner: f64, outer: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossSection {
    pub spec: CrossSectionSpec,
    pub shape: Shape,
    pub vol_n: f64,
    pub surf: f64,
    pub n_omega: f64,
    pub radius_r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFacet {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
    pub rho: f64,
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Builds the cross-section with closed-form measures.
pub fn make_cross_section(spec: &CrossSectionSpec) -> Result<CrossSection> {
    spec.validate()?;
    let p = &spec.params;
    let (shape, vol_n, surf, radius_r) = match spec.kind {
        ShapeKind::Interval => {
            let l = p.half_length.unwrap();
            (Shape::Interval { half_length: l }, 2.0 * l, 2.0, l)
        }
        ShapeKind::Ball => {
            let (n, r) = (spec.n, p.radius.unwrap());
            let w = unit_ball_volume(n);
            (Shape::Ball { n, radius: r }, w * r.powi(n as i32), n as f64 * w * r.powi(n as i32 - 1), r)
        }
        ShapeKind::Rectangle => {
            let sides = p.sides.clone().unwrap();
            let vol: f64 = sides.iter().product();
            let surf: f64 = (0..sides.len())
                .map(|i| 2.0 * sides.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, s)| s).product::<f64>())
                .sum();
            let r = 0.5 * sides.iter().map(|s| s * s).sum::<f64>().sqrt();
            (Shape::Rectangle { sides }, vol, surf, r)
        }
        ShapeKind::Annulus => {
            let (a, b) = (p.inner.unwrap(), p.outer.unwrap());
            (Shape::Annulus { inner: a, outer: b }, PI * (b * b - a * a), 2.0 * PI * (a + b), b)
        }
    };
    Ok(CrossSection { spec: spec.clone(), shape, vol_n, surf, n_omega: surf / vol_n, radius_r })
}

impl CrossSection {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Short identifier used in result metadata.
    pub fn id(&self) -> String {
        match &self.shape {
            Shape::Interval { half_length } => format!("interval(L={half_length})"),
            Shape::Ball { n, radius } => format!("ball(n={n},r={radius})"),
            Shape::Rectangle { sides } => {
                let s: Vec<String> = sides.iter().map(|v| v.to_string()).collect();
                format!("rectangle({})", s.join("x"))
            }
            Shape::Annulus { inner, outer } => format!("annulus({inner},{outer})"),
        }
    }

    /// Distinct values of `ρ = (t·ν)²` on the boundary pieces, each with the
    /// piece's total measure. Every catalog shape has `ρ` constant per piece.
    pub fn boundary_pieces(&self) -> Vec<(f64, f64)> {
        match &self.shape {
            Shape::Interval { half_length: l } => vec![(l * l, 1.0), (l * l, 1.0)],
            Shape::Ball { .. } => vec![(self.radius_r * self.radius_r, self.surf)],
            Shape::Rectangle { sides } => {
                let mut out = Vec::new();
                for i in 0..sides.len() {
                    let area: f64 = sides.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, s)| s).product();
                    let rho = 0.25 * sides[i] * sides[i];
                    out.push((rho, area));
                    out.push((rho, area));
                }
                out
            }
            Shape::Annulus { inner, outer } => {
                vec![(inner * inner, 2.0 * PI * inner), (outer * outer, 2.0 * PI * outer)]
            }
        }
    }
}

/// Midpoint-rule boundary facets with exact surface weights.
///
/// Curved boundaries are split in their angular parametrization and each
/// patch weight is the exact patch measure, so the weights sum to `surf`.
pub fn boundary_quadrature(cs: &CrossSection, resolution: usize) -> Result<Vec<BoundaryFacet>> {
    if resolution < 2 {
        return Err(Error::InvalidInput(format!("boundary resolution must be >= 2, got {resolution}")));
    }
    let facets = match &cs.shape {
        Shape::Interval { half_length: l } => vec![
            BoundaryFacet { point: vec![-l], normal: vec![-1.0], weight: 1.0, rho: l * l },
            BoundaryFacet { point: vec![*l], normal: vec![1.0], weight: 1.0, rho: l * l },
        ],
        Shape::Ball { n, radius } => sphere_facets(*n, *radius, resolution, false),
        Shape::Annulus { inner, outer } => {
            let mut f = sphere_facets(2, *outer, resolution, false);
            f.extend(sphere_facets(2, *inner, resolution, true));
            f
        }
        Shape::Rectangle { sides } => box_facets(sides, resolution),
    };
    Ok(facets)
}

fn sphere_facets(n: usize, r: f64, res: usize, inward: bool) -> Vec<BoundaryFacet> {
    // hyperspherical angles φ_1..φ_{n-2} ∈ [0, π], φ_{n-1} ∈ [0, 2π)
    let dims = n - 1;
    let rule = gauss();
    let mut facets = Vec::with_capacity(res.pow(dims as u32));
    let mut idx = vec![0usize; dims];
    loop {
        let mut angles = vec![0.0; dims];
        let mut weight = r.powi(dims as i32);
        for (k, &i) in idx.iter().enumerate() {
            let last = k + 1 == dims;
            let span = if last { 2.0 * PI } else { PI };
            let (lo, hi) = (span * i as f64 / res as f64, span * (i + 1) as f64 / res as f64);
            angles[k] = 0.5 * (lo + hi);
            let power = (dims - 1 - k) as i32;
            weight *= if power == 0 { hi - lo } else { rule.integrate(lo, hi, |phi| phi.sin().powi(power)) };
        }
        let mut point = vec![0.0; n];
        let mut sin_prod = 1.0;
        for k in 0..dims {
            point[k] = r * sin_prod * angles[k].cos();
            sin_prod *= angles[k].sin();
        }
        point[n - 1] = r * sin_prod;
        let sign = if inward { -1.0 } else { 1.0 };
        let normal: Vec<f64> = point.iter().map(|x| sign * x / r).collect();
        let tn: f64 = point.iter().zip(&normal).map(|(a, b)| a * b).sum();
        facets.push(BoundaryFacet { point, normal, weight, rho: tn * tn });

        // odometer increment
        let mut k = dims;
        loop {
            if k == 0 {
                return facets;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < res {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn box_facets(sides: &[f64], res: usize) -> Vec<BoundaryFacet> {
    let n = sides.len();
    let mut facets = Vec::new();
    for axis in 0..n {
        let others: Vec<usize> = (0..n).filter(|&k| k != axis).collect();
        let cell: f64 = others.iter().map(|&k| sides[k] / res as f64).product();
        for sign in [-1.0, 1.0] {
            let mut idx = vec![0usize; others.len()];
            loop {
                let mut point = vec![0.0; n];
                point[axis] = sign * 0.5 * sides[axis];
                for (m, &k) in others.iter().enumerate() {
                    point[k] = -0.5 * sides[k] + sides[k] * (idx[m] as f64 + 0.5) / res as f64;
                }
                let mut normal = vec![0.0; n];
                normal[axis] = sign;
                let rho = point[axis] * point[axis];
                facets.push(BoundaryFacet { point, normal, weight: cell, rho });
                let mut m = others.len();
                let done = loop {
                    if m == 0 {
                        break true;
                    }
                    m -= 1;
                    idx[m] += 1;
                    if idx[m] < res {
                        break false;
                    }
                    idx[m] = 0;
                };
                if done {
                    break;
                }
            }
        }
    }
    facets
}
