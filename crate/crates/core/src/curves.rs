//! Closed parametric curves (knots) and periodic quadrature along them.
//!
//! All curves are parametrized by `tau` in `[0, 2 pi)`. The torus geometry is
//! fixed: major radius 2, minor radius 1, so every torus knot lies on
//! `(rho - 2)^2 + z^2 = 1` and inside a sphere of radius 3.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::periodic_nodes;
use crate::vec3::{self, Vec3};
use crate::DEFAULT_CURVE_SAMPLES;

/// Minimum number of points defining a sampled curve.
pub const MIN_SAMPLED_POINTS: usize = 8;
/// Minimum number of quadrature samples for [`curve_integral`].
pub const MIN_INTEGRAL_SAMPLES: usize = 8;
/// Minimum number of samples for [`min_enclosing_radius`].
pub const MIN_RADIUS_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub position: Vec3,
    /// `d position / d tau`
    pub derivative: Vec3,
}

/// A `(p, q)` torus knot with coprime winding numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusKnot {
    p: u32,
    q: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl TorusKnot {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidArgument(format!(
                "torus knot winding numbers must be positive, got ({p}, {q})"
            )));
        }
        if gcd(p, q) != 1 {
            return Err(Error::NotCoprime { p, q });
        }
        Ok(TorusKnot { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    fn eval(&self, t: f64) -> CurvePoint {
        let (p, q) = (self.p as f64, self.q as f64);
        let (sq, cq) = (q * t).sin_cos();
        let (sp, cp) = (p * t).sin_cos();
        let rho = 2.0 + cq;
        CurvePoint {
            position: [rho * cp, rho * sp, -sq],
            derivative: [
                -q * sq * cp - p * rho * sp,
                -q * sq * sp + p * rho * cp,
                -q * cq,
            ],
        }
    }
}

/// Closed curve through an ordered list of points, interpolated by a
/// trigonometric polynomial. The first point is not repeated at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    points: Vec<Vec3>,
    // Real Fourier coefficients per axis: x(t) = a0 + sum_k a_k cos kt + b_k sin kt
    a0: Vec3,
    cos_coef: Vec<Vec3>,
    sin_coef: Vec<Vec3>,
}

impl SampledCurve {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        if n < MIN_SAMPLED_POINTS {
            return Err(Error::TooFewSamples {
                got: n,
                min: MIN_SAMPLED_POINTS,
            });
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("sampled curve has non-finite coordinates".into()));
        }
        let nf = n as f64;
        let mut a0 = [0.0; 3];
        for p in &points {
            a0 = vec3::add(a0, *p);
        }
        a0 = vec3::scale(a0, 1.0 / nf);
        let kmax = n / 2;
        let mut cos_coef = Vec::with_capacity(kmax);
        let mut sin_coef = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            for (j, p) in points.iter().enumerate() {
                // exact reduction of k*j mod n keeps the phase accurate
                let phase = 2.0 * PI * ((k * j) % n) as f64 / nf;
                let (s, c) = phase.sin_cos();
                a = vec3::add(a, vec3::scale(*p, c));
                b = vec3::add(b, vec3::scale(*p, s));
            }
            let w = if n % 2 == 0 && k == kmax { 1.0 / nf } else { 2.0 / nf };
            cos_coef.push(vec3::scale(a, w));
            sin_coef.push(if n % 2 == 0 && k == kmax { [0.0; 3] } else { vec3::scale(b, w) });
        }
        Ok(SampledCurve {
            points,
            a0,
            cos_coef,
            sin_coef,
        })
    }

    /// Parse `{"points": [[x, y, z], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            points: Vec<Vec3>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        Self::new(doc.points)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "points": self.points }).to_string()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    fn eval(&self, t: f64) -> CurvePoint {
        let mut pos = self.a0;
        let mut der = [0.0; 3];
        let (s1, c1) = t.sin_cos();
        let (mut sk, mut ck) = (0.0f64, 1.0f64);
        for (idx, (a, b)) in self.cos_coef.iter().zip(&self.sin_coef).enumerate() {
            let k = (idx + 1) as f64;
            // advance (cos kt, sin kt) by one step of t
            (ck, sk) = (ck * c1 - sk * s1, sk * c1 + ck * s1);
            if idx % 64 == 63 {
                (sk, ck) = (k * t).sin_cos();
            }
            for ax in 0..3 {
                pos[ax] += a[ax] * ck + b[ax] * sk;
                der[ax] += k * (b[ax] * ck - a[ax] * sk);
            }
        }
        CurvePoint {
            position: pos,
            derivative: der,
        }
    }
}

/// Knot selection: torus knots, three reference unknots, or sampled data.
#[derive(Debug, Clone, PartialEq)]
pub enum KnotSpec {
    Torus(TorusKnot),
    /// Circle of radius 3 in the xy-plane.
    UnknotXY,
    /// Unit circle in the xz-plane centred at (2, 0, 0).
    UnknotXZ,
    /// Unit circle in the yz-plane centred at (0, 2, 0).
    UnknotYZ,
    Sampled(SampledCurve),
}

impl KnotSpec {
    pub fn torus(p: u32, q: u32) -> Result<Self> {
        TorusKnot::new(p, q).map(KnotSpec::Torus)
    }

    pub fn sampled(points: Vec<Vec3>) -> Result<Self> {
        SampledCurve::new(points).map(KnotSpec::Sampled)
    }

    /// Short human-readable label, e.g. `torus:2,3`.
    pub fn label(&self) -> String {
        match self {
            KnotSpec::Torus(t) => format!("torus:{},{}", t.p, t.q),
            KnotSpec::UnknotXY => "unknot-xy".into(),
            KnotSpec::UnknotXZ => "unknot-xz".into(),
            KnotSpec::UnknotYZ => "unknot-yz".into(),
            KnotSpec::Sampled(s) => format!("sampled:{}", s.points.len()),
        }
    }

    /// Samples `n` equally spaced points of this curve into a [`SampledCurve`].
    pub fn resample(&self, n: usize) -> Result<SampledCurve> {
        SampledCurve::new(periodic_nodes(n).map(|t| eval_curve(self, t).position).collect())
    }
}

impl std::str::FromStr for KnotSpec {
    type Err = Error;

    /// `torus:P,Q | unknot-xy | unknot-xz | unknot-yz | file:PATH`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "unknot-xy" => return Ok(KnotSpec::UnknotXY),
            "unknot-xz" => return Ok(KnotSpec::UnknotXZ),
            "unknot-yz" => return Ok(KnotSpec::UnknotYZ),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("torus:") {
            let (p, q) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected torus:P,Q, got '{s}'")))?;
            let p = p.trim().parse().map_err(|_| Error::Parse(format!("bad p in '{s}'")))?;
            let q = q.trim().parse().map_err(|_| Error::Parse(format!("bad q in '{s}'")))?;
            return KnotSpec::torus(p, q);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return SampledCurve::from_json_file(Path::new(path)).map(KnotSpec::Sampled);
        }
        Err(Error::Parse(format!("unknown knot '{s}'")))
    }
}

/// Position and derivative of the curve at parameter `tau`.
pub fn eval_curve(spec: &KnotSpec, tau: f64) -> CurvePoint {
    match spec {
        KnotSpec::Torus(t) => t.eval(tau),
        KnotSpec::UnknotXY => {
            let (s, c) = tau.sin_cos();
            CurvePoint {
                position: [3.0 * c, 3.0 * s, 0.0],
                derivative: [-3.0 * s, 3.0 * c, 0.0],
            }
        }
        KnotSpec::UnknotXZ => {
            let (s, c) = tau.sin_cos();
            CurvePoint {
                position: [2.0 + c, 0.0, s],
                derivative: [-s, 0.0, c],
            }
        }
        KnotSpec::UnknotYZ => {
            let (s, c) = tau.sin_cos();
            CurvePoint {
                position: [0.0, 2.0 + c, s],
                derivative: [0.0, -s, c],
            }
        }
        KnotSpec::Sampled(s) => s.eval(tau),
    }
}

/// Equal-spacing periodic trapezoid sum of `integrand` over `[0, 2 pi)`.
pub fn curve_integral<F>(spec: &KnotSpec, mut integrand: F, n_samples: usize) -> Result<f64>
where
    F: FnMut(&CurvePoint, f64) -> f64,
{
    if n_samples < MIN_INTEGRAL_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n_samples,
            min: MIN_INTEGRAL_SAMPLES,
        });
    }
    let h = 2.0 * PI / n_samples as f64;
    let sum: f64 = periodic_nodes(n_samples)
        .map(|t| integrand(&eval_curve(spec, t), t))
        .sum();
    Ok(sum * h)
}

/// Curve samples at the periodic trapezoid nodes, reused by several
/// integrals over the same curve.
pub fn sample_curve(spec: &KnotSpec, n_samples: usize) -> Result<Vec<CurvePoint>> {
    if n_samples < MIN_INTEGRAL_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n_samples,
            min: MIN_INTEGRAL_SAMPLES,
        });
    }
    Ok(periodic_nodes(n_samples).map(|t| eval_curve(spec, t)).collect())
}

/// Largest sampled distance of the curve from the origin.
pub fn min_enclosing_radius(spec: &KnotSpec, n_samples: usize) -> Result<f64> {
    if n_samples < MIN_RADIUS_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n_samples,
            min: MIN_RADIUS_SAMPLES,
        });
    }
    Ok(periodic_nodes(n_samples)
        .map(|t| vec3::norm(eval_curve(spec, t).position))
        .fold(0.0, f64::max))
}

/// Default-resolution convenience wrapper around [`curve_integral`].
pub fn curve_integral_default<F>(spec: &KnotSpec, integrand: F) -> f64
where
    F: FnMut(&CurvePoint, f64) -> f64,
{
    curve_integral(spec, integrand, DEFAULT_CURVE_SAMPLES).expect("default sample count is valid")
}
