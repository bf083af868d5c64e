//! Vector potential of the knotted dipole line: exact Biot-Savart line
//! integral and the quadrupole + octopole far-field truncation.
//!
//! Units: the prefactor `mu_0 M / (4 pi)` is 1 unless rescaled with
//! [`VectorPotentialValue::with_prefactor`].

use std::io::Write;

use serde::Serialize;

use crate::curves::{sample_curve, KnotSpec};
use crate::error::{Error, Result};
use crate::multipole::{sorted_triples, MomentSet};
use crate::vec3::{self, Vec3};

/// Distance below which a field point counts as lying on the curve.
pub const ON_CURVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl FieldPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) || !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "field point needs finite r > 0, got ({r}, {theta}, {phi})"
            )));
        }
        Ok(FieldPoint { r, theta, phi })
    }

    pub fn from_cartesian(x: Vec3) -> Result<Self> {
        let r = vec3::norm(x);
        if r == 0.0 {
            return Err(Error::InvalidArgument("field point at the origin".into()));
        }
        let (theta, phi) = vec3::to_angles(x);
        Self::new(r, theta, phi)
    }

    /// `(R_1, R_2, R_3) = (sin θ cos φ, sin θ sin φ, cos θ)`
    pub fn direction(&self) -> Vec3 {
        vec3::from_angles(self.theta, self.phi)
    }

    pub fn position(&self) -> Vec3 {
        vec3::scale(self.direction(), self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VectorPotentialValue {
    pub components: Vec3,
}

impl VectorPotentialValue {
    pub fn with_prefactor(self, g0: f64) -> Self {
        VectorPotentialValue {
            components: vec3::scale(self.components, g0),
        }
    }

    pub fn norm(&self) -> f64 {
        vec3::norm(self.components)
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorPotentialValue {
            components: vec3::sub(self.components, other.components),
        }
    }
}

/// `A(r) = ∫ dr'/dτ × (r - r') / |r - r'|^3 dτ`
pub fn biot_savart_dipole_line(spec: &KnotSpec, point: &FieldPoint, n_samples: usize) -> Result<VectorPotentialValue> {
    biot_savart_at(spec, point.position(), n_samples)
}

/// Cartesian-position form of [`biot_savart_dipole_line`].
pub fn biot_savart_at(spec: &KnotSpec, x: Vec3, n_samples: usize) -> Result<VectorPotentialValue> {
    let samples = sample_curve(spec, n_samples)?;
    let h = 2.0 * std::f64::consts::PI / n_samples as f64;
    let mut a = [0.0; 3];
    let mut dmin = f64::INFINITY;
    for c in &samples {
        let d = vec3::sub(x, c.position);
        let dn = vec3::norm(d);
        dmin = dmin.min(dn);
        a = vec3::add(a, vec3::scale(vec3::cross(c.derivative, d), 1.0 / (dn * dn * dn)));
    }
    if dmin < ON_CURVE_TOLERANCE {
        return Err(Error::PointOnCurve(dmin));
    }
    Ok(VectorPotentialValue {
        components: vec3::scale(a, h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultipoleOrder {
    QuadrupoleOnly,
    ThroughOctopole,
}

/// Truncated multipole potential at `point`.
pub fn multipole_potential(moments: &MomentSet, point: &FieldPoint, order: MultipoleOrder) -> VectorPotentialValue {
    let rr = point.direction();
    let r = point.r;
    let q = &moments.quadrupole;
    let o = &moments.octopole;
    let mut a = [0.0; 3];
    for i in 0..3 {
        let mut quad = q.q_trace[i];
        for j in 0..3 {
            for k in j..3 {
                quad += 3.0 * q.q_tensor[i][j][k] * rr[j] * rr[k];
            }
        }
        a[i] = quad / r.powi(3);
        if order == MultipoleOrder::ThroughOctopole {
            let mut cubic = 0.0;
            for [j, k, l] in sorted_triples() {
                cubic += o.o_tensor[i][j][k][l] * rr[j] * rr[k] * rr[l];
            }
            let mut linear = 0.0;
            for p in 0..3 {
                linear += o.o_contracted[i][p] * rr[p];
            }
            a[i] += (7.5 * cubic - 1.5 * linear) / r.powi(4);
        }
    }
    VectorPotentialValue { components: a }
}

/// Central-difference divergence of a vector field at `x` with step `h`.
pub fn divergence<F: Fn(Vec3) -> Vec3>(f: F, x: Vec3, h: f64) -> f64 {
    let mut div = 0.0;
    for ax in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[ax] += h;
        xm[ax] -= h;
        div += (f(xp)[ax] - f(xm)[ax]) / (2.0 * h);
    }
    div
}

/// Evaluation path for the potential grid sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialMethod {
    BiotSavart,
    Quadrupole,
    Multipole,
}

impl PotentialMethod {
    pub fn label(self) -> &'static str {
        match self {
            PotentialMethod::BiotSavart => "biot_savart",
            PotentialMethod::Quadrupole => "quadrupole",
            PotentialMethod::Multipole => "multipole",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialRow {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    #[serde(rename = "Ax")]
    pub ax: f64,
    #[serde(rename = "Ay")]
    pub ay: f64,
    #[serde(rename = "Az")]
    pub az: f64,
    pub method: &'static str,
}

pub const CSV_HEADER: &str = "r,theta,phi,Ax,Ay,Az,method";

impl PotentialRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e},{}",
            self.r, self.theta, self.phi, self.ax, self.ay, self.az, self.method
        )
    }
}

/// Evaluate every method at every point, in input order.
pub fn sample_potential(
    spec: &KnotSpec,
    moments: &MomentSet,
    points: &[FieldPoint],
    methods: &[PotentialMethod],
    n_samples: usize,
) -> Result<Vec<PotentialRow>> {
    let mut rows = Vec::with_capacity(points.len() * methods.len());
    for p in points {
        for &m in methods {
            let v = match m {
                PotentialMethod::BiotSavart => biot_savart_dipole_line(spec, p, n_samples)?,
                PotentialMethod::Quadrupole => multipole_potential(moments, p, MultipoleOrder::QuadrupoleOnly),
                PotentialMethod::Multipole => multipole_potential(moments, p, MultipoleOrder::ThroughOctopole),
            };
            rows.push(PotentialRow {
                r: p.r,
                theta: p.theta,
                phi: p.phi,
                ax: v.components[0],
                ay: v.components[1],
                az: v.components[2],
                method: m.label(),
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(mut out: W, rows: &[PotentialRow]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipole::moment_set;
    use crate::DEFAULT_CURVE_SAMPLES;
    use std::f64::consts::PI;

    #[test]
    fn field_point_round_trip() {
        let p = FieldPoint::new(7.0, 1.2, -0.4).unwrap();
        let q = FieldPoint::from_cartesian(p.position()).unwrap();
        assert!((q.r - 7.0).abs() < 1e-12 && (q.theta - 1.2).abs() < 1e-12 && (q.phi + 0.4).abs() < 1e-12);
        assert!((vec3::norm(p.direction()) - 1.0).abs() < 1e-15);
        assert!(FieldPoint::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn on_axis_torus_quadrupole() {
        for p in [2u32, 3, 5] {
            let m = moment_set(&KnotSpec::torus(p, 7).unwrap());
            let r = 20.0;
            let a = multipole_potential(&m, &FieldPoint::new(r, 0.0, 0.0).unwrap(), MultipoleOrder::QuadrupoleOnly);
            assert!(a.components[0].abs() < 1e-12 && a.components[1].abs() < 1e-12);
            let expect = 9.0 * p as f64 * PI / r.powi(3);
            assert!((a.components[2] - expect).abs() < 1e-12 * expect.abs());
        }
    }

    #[test]
    fn quadrupole_part_scales_as_inverse_cube() {
        let m = moment_set(&KnotSpec::torus(2, 3).unwrap());
        let a = multipole_potential(&m, &FieldPoint::new(5.0, 0.7, 1.1).unwrap(), MultipoleOrder::QuadrupoleOnly);
        let b = multipole_potential(&m, &FieldPoint::new(10.0, 0.7, 1.1).unwrap(), MultipoleOrder::QuadrupoleOnly);
        for ax in 0..3 {
            assert!((a.components[ax] / 8.0 - b.components[ax]).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_biot_savart_at_r100() {
        let spec = KnotSpec::torus(2, 3).unwrap();
        let m = moment_set(&spec);
        for (t, f) in [(0.4, 0.3), (1.3, 2.0), (2.5, -1.0)] {
            let p = FieldPoint::new(100.0, t, f).unwrap();
            let bs = biot_savart_dipole_line(&spec, &p, DEFAULT_CURVE_SAMPLES).unwrap();
            let mp = multipole_potential(&m, &p, MultipoleOrder::ThroughOctopole);
            assert!(bs.sub(&mp).norm() < 1e-3 * bs.norm(), "{t},{f}");
        }
    }

    #[test]
    fn on_axis_unknot_agrees_with_multipole() {
        let spec = KnotSpec::UnknotXY;
        let p = FieldPoint::new(10.0, 0.0, 0.0).unwrap();
        let bs = biot_savart_dipole_line(&spec, &p, 512).unwrap();
        let mp = multipole_potential(&moment_set(&spec), &p, MultipoleOrder::ThroughOctopole);
        assert!(bs.components[0].abs() < 1e-12 && bs.components[1].abs() < 1e-12);
        let exact = 18.0 * PI / 109f64.powf(1.5);
        assert!((bs.components[2] - exact).abs() < 1e-12 * exact);
        // next omitted order is about 1.5 (3/10)^2 relative
        assert!(bs.sub(&mp).norm() < 0.15 * bs.norm());
    }

    #[test]
    fn rejects_points_on_curve() {
        let e = biot_savart_at(&KnotSpec::UnknotXY, [3.0, 0.0, 0.0], 64).unwrap_err();
        assert!(matches!(e, Error::PointOnCurve(_)));
    }

    #[test]
    fn multipole_is_divergence_free() {
        let m = moment_set(&KnotSpec::torus(3, 4).unwrap());
        let f = |x: Vec3| {
            multipole_potential(&m, &FieldPoint::from_cartesian(x).unwrap(), MultipoleOrder::ThroughOctopole).components
        };
        for x in [[10.0, 3.0, -4.0], [-7.0, 12.0, 5.0], [0.5, -0.3, 25.0]] {
            let r = vec3::norm(x);
            let div = divergence(f, x, 1e-4 * r);
            let amp = vec3::norm(f(x));
            assert!(div.abs() <= 1e-6 * amp / r, "{x:?}: {div}");
        }
    }

    #[test]
    fn far_field_slope() {
        let spec = KnotSpec::torus(2, 3).unwrap();
        let m = moment_set(&spec);
        let rs: Vec<f64> = (0..10).map(|i| 30.0 * 10f64.powf(i as f64 / 9.0)).collect();
        for (t, f) in [(0.9, 0.4), (2.0, 2.6)] {
            let diffs: Vec<f64> = rs
                .iter()
                .map(|&r| {
                    let p = FieldPoint::new(r, t, f).unwrap();
                    let bs = biot_savart_dipole_line(&spec, &p, DEFAULT_CURVE_SAMPLES).unwrap();
                    bs.sub(&multipole_potential(&m, &p, MultipoleOrder::ThroughOctopole)).norm()
                })
                .collect();
            let s = log_log_slope(&rs, &diffs);
            assert!((s + 5.0).abs() <= 0.3, "slope {s}");
        }
    }

    #[test]
    fn no_dipole_term() {
        let spec = KnotSpec::torus(2, 5).unwrap();
        let v: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&r| biot_savart_dipole_line(&spec, &FieldPoint::new(r, 1.0, 0.2).unwrap(), 1024).unwrap().norm() * r.powi(3))
            .collect();
        assert!((v[2] / v[1] - 1.0).abs() < 0.01 && (v[1] / v[0] - 1.0).abs() < 0.1);
    }

    #[test]
    fn biot_savart_rotation_covariance() {
        let axis = [0.3, -0.5, 0.8];
        let rot = vec3::rotation(axis, 0.9);
        let base = KnotSpec::torus(2, 3).unwrap();
        let pts: Vec<Vec3> = crate::quadrature::periodic_nodes(256)
            .map(|t| crate::curves::eval_curve(&base, t).position)
            .collect();
        let rotated = KnotSpec::sampled(pts.iter().map(|p| vec3::mat_vec(&rot, *p)).collect()).unwrap();
        let orig = KnotSpec::sampled(pts).unwrap();
        let x = [6.0, -2.0, 4.5];
        let a = biot_savart_at(&orig, x, 512).unwrap().components;
        let b = biot_savart_at(&rotated, vec3::mat_vec(&rot, x), 512).unwrap().components;
        let ra = vec3::mat_vec(&rot, a);
        for ax in 0..3 {
            assert!((ra[ax] - b[ax]).abs() < 1e-9 * vec3::norm(a));
        }
    }

    #[test]
    fn csv_output() {
        let spec = KnotSpec::UnknotXY;
        let m = moment_set(&spec);
        let pts = [FieldPoint::new(10.0, 0.5, 0.5).unwrap()];
        let rows = sample_potential(&spec, &m, &pts, &[PotentialMethod::BiotSavart, PotentialMethod::Multipole], 256).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",biot_savart") && lines[2].ends_with(",multipole"));
    }
}
