//! First-order Born matrix element `V_ni` between plane waves `e^{ik.r}`.
//!
//! The energy delta of the S-matrix is stripped: everything here is the
//! on-shell `V_ni`, split into quadrupole tensor/trace and octopole
//! tensor/contracted parts.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::angular::{angular_bracket, DirectionCosineMonomial};
use crate::curves::{KnotSpec, TorusKnot};
use crate::error::{Error, Result};
use crate::multipole::{moment_set, sorted_triples, MomentSet, OctopoleMoments, QuadrupoleMoments};
use crate::potential::{biot_savart_at, multipole_potential, FieldPoint, MultipoleOrder};
use crate::quadrature::{gauss_legendre, periodic_nodes};
use crate::radial::{radial_coefficients, RadialCoefficients};
use crate::vec3::{self, Mat3, Vec3};

/// Relative tolerance on `| |k_i| - |k_n| |`.
pub const ON_SHELL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringKinematics {
    k_i: Vec3,
    k_n: Vec3,
    lambda0: f64,
}

impl ScatteringKinematics {
    pub fn new(k_i: Vec3, k_n: Vec3, lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda0 must be positive, got {lambda0}")));
        }
        if k_i.iter().chain(&k_n).any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("wave vectors must be finite".into()));
        }
        let (ki, kn) = (vec3::norm(k_i), vec3::norm(k_n));
        if ki == 0.0 {
            return Err(Error::InvalidArgument("incident wave vector is zero".into()));
        }
        if (ki - kn).abs() > ON_SHELL_TOLERANCE * ki {
            return Err(Error::OffShell { ki, kn });
        }
        if vec3::norm(vec3::sub(k_i, k_n)) == 0.0 {
            return Err(Error::ForwardScattering);
        }
        Ok(ScatteringKinematics { k_i, k_n, lambda0 })
    }

    /// Both wave vectors of magnitude `k`, directions in radians.
    pub fn from_angles(k: f64, ki: (f64, f64), kn: (f64, f64), lambda0: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
        }
        Self::new(
            vec3::scale(vec3::from_angles(ki.0, ki.1), k),
            vec3::scale(vec3::from_angles(kn.0, kn.1), k),
            lambda0,
        )
    }

    pub fn k_i(&self) -> Vec3 {
        self.k_i
    }

    pub fn k_n(&self) -> Vec3 {
        self.k_n
    }

    pub fn k(&self) -> f64 {
        vec3::norm(self.k_i)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Momentum transfer `k_i - k_n`.
    pub fn q_vec(&self) -> Vec3 {
        vec3::sub(self.k_i, self.k_n)
    }

    pub fn q_mag(&self) -> f64 {
        vec3::norm(self.q_vec())
    }

    pub fn q_hat(&self) -> Vec3 {
        vec3::scale(self.q_vec(), 1.0 / self.q_mag())
    }

    /// Momentum sum `k_i + k_n`.
    pub fn k_sum(&self) -> Vec3 {
        vec3::add(self.k_i, self.k_n)
    }

    /// Incoming and outgoing roles exchanged.
    pub fn swapped(&self) -> Self {
        ScatteringKinematics {
            k_i: self.k_n,
            k_n: self.k_i,
            lambda0: self.lambda0,
        }
    }

    pub fn rotated(&self, rot: &Mat3) -> Self {
        ScatteringKinematics {
            k_i: vec3::mat_vec(rot, self.k_i),
            k_n: vec3::mat_vec(rot, self.k_n),
            lambda0: self.lambda0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    g: f64,
}

impl CouplingConfig {
    pub fn new(g: f64) -> Result<Self> {
        if g == 0.0 || !g.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling must be finite and nonzero, got {g}")));
        }
        Ok(CouplingConfig { g })
    }

    pub fn g(&self) -> f64 {
        self.g
    }
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig { g: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornAmplitude {
    pub kin: ScatteringKinematics,
    pub v1: Complex64,
    pub v2: Complex64,
    pub v3: Complex64,
    pub v4: Complex64,
    pub total: Complex64,
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

impl BornAmplitude {
    pub fn from_parts(kin: ScatteringKinematics, v: [Complex64; 4]) -> Self {
        BornAmplitude {
            kin,
            v1: v[0],
            v2: v[1],
            v3: v[2],
            v4: v[3],
            total: v[0] + v[1] + v[2] + v[3],
        }
    }

    pub fn parts(&self) -> [Complex64; 4] {
        [self.v1, self.v2, self.v3, self.v4]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("amplitude serializes")
    }
}

impl Serialize for BornAmplitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut parts = std::collections::BTreeMap::new();
        for (name, v) in ["v1", "v2", "v3", "v4"].iter().zip(self.parts()) {
            parts.insert(*name, pair(v));
        }
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("kin", &self.kin)?;
        m.serialize_entry("v", &parts)?;
        m.serialize_entry("total", &pair(self.total))?;
        m.end()
    }
}

fn mono(axes: &[usize]) -> DirectionCosineMonomial {
    DirectionCosineMonomial::from_axes(axes).expect("degree at most 3")
}

/// Quadrupole tensor and trace parts `(v1, v2)`.
pub fn vni_quadrupole(
    moments: &QuadrupoleMoments,
    kin: &ScatteringKinematics,
    radial: &RadialCoefficients,
    g: f64,
) -> Result<(Complex64, Complex64)> {
    let kv = kin.k_sum();
    let mut v1 = Complex64::new(0.0, 0.0);
    for j in 0..3 {
        for k in j..3 {
            let c: f64 = (0..3).map(|i| 3.0 * kv[i] * moments.q_tensor[i][j][k]).sum();
            if c != 0.0 {
                v1 += c * angular_bracket(&mono(&[j, k]), &radial.a)?;
            }
        }
    }
    let trace: f64 = (0..3).map(|i| kv[i] * moments.q_trace[i]).sum();
    let a00 = radial.a.get(&(0, 0)).ok_or(Error::MissingCoefficient { l: 0, m: 0 })?;
    let v2 = trace * (4.0 * PI).sqrt() * a00;
    Ok((-g * v1, -g * v2))
}

/// Octopole tensor and contracted parts `(v3, v4)`.
pub fn vni_octopole(
    moments: &OctopoleMoments,
    kin: &ScatteringKinematics,
    radial: &RadialCoefficients,
    g: f64,
) -> Result<(Complex64, Complex64)> {
    let kv = kin.k_sum();
    let mut v3 = Complex64::new(0.0, 0.0);
    for jkl in sorted_triples() {
        let c: f64 = (0..3).map(|i| kv[i] * moments.o_tensor[i][jkl[0]][jkl[1]][jkl[2]]).sum();
        if c != 0.0 {
            v3 += c * angular_bracket(&mono(&jkl), &radial.b)?;
        }
    }
    let mut v4 = Complex64::new(0.0, 0.0);
    for p in 0..3 {
        let c: f64 = (0..3).map(|i| kv[i] * moments.o_contracted[i][p]).sum();
        if c != 0.0 {
            v4 += c * angular_bracket(&mono(&[p]), &radial.b)?;
        }
    }
    Ok((-7.5 * g * v3, 1.5 * g * v4))
}

pub fn born_amplitude_with_moments(
    moments: &MomentSet,
    kin: &ScatteringKinematics,
    radial: &RadialCoefficients,
    g: f64,
) -> Result<BornAmplitude> {
    let (v1, v2) = vni_quadrupole(&moments.quadrupole, kin, radial, g)?;
    let (v3, v4) = vni_octopole(&moments.octopole, kin, radial, g)?;
    Ok(BornAmplitude::from_parts(*kin, [v1, v2, v3, v4]))
}

pub fn born_amplitude(spec: &KnotSpec, kin: &ScatteringKinematics, g: f64) -> Result<BornAmplitude> {
    let radial = radial_coefficients(kin)?;
    born_amplitude_with_moments(&moment_set(spec), kin, &radial, g)
}

/// Which vector potential the volume oracle integrates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSource {
    Multipole(MultipoleOrder),
    /// Exact line integral for `r <= switch_radius`, octopole expansion beyond.
    BiotSavart { n_samples: usize, switch_radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceGrid {
    /// Gauss-Legendre order per radial panel.
    pub radial_order: usize,
    /// Upper bound on radial panel length.
    pub max_panel: f64,
    /// Extra polar nodes beyond `q * r_max`.
    pub polar_extra: usize,
    pub n_phi: usize,
    pub field: FieldSource,
}

impl Default for BruteForceGrid {
    fn default() -> Self {
        BruteForceGrid {
            radial_order: 16,
            max_panel: 4.0,
            polar_extra: 40,
            n_phi: 8,
            field: FieldSource::Multipole(MultipoleOrder::ThroughOctopole),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceResult {
    /// Quadrature over `lambda0 < r < r_max`.
    pub body: Complex64,
    /// Asymptotic estimate of `r > r_max`.
    pub tail: Complex64,
    /// Size of the first neglected tail term.
    pub tail_error: f64,
}

impl BruteForceResult {
    pub fn value(&self) -> Complex64 {
        self.body + self.tail
    }
}

/// Orthonormal frame whose third axis is `n`.
fn frame(n: Vec3) -> [Vec3; 3] {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = vec3::cross(helper, n);
    let e1 = vec3::scale(e1, 1.0 / vec3::norm(e1));
    let e2 = vec3::cross(n, e1);
    [e1, e2, n]
}

/// `int_R^inf e^{iqr} r^{-n} dr` by repeated integration by parts.
fn oscillatory_tail(q: f64, n: i32, r: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, q * r);
    let iq = Complex64::new(0.0, 1.0) / q;
    let mut term = iq * r.powi(-n);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..6 {
        sum += term;
        term *= -iq * f64::from(n + j) / r;
    }
    phase * sum
}

/// `K . A` at unit radius per inverse power of `r`: `(r^-3 part, r^-4 part)`.
fn far_field_polynomials(moments: &MomentSet, kv: Vec3, d: Vec3) -> (f64, f64) {
    let pt = FieldPoint::from_cartesian(d).expect("unit vector");
    let quad = multipole_potential(moments, &pt, MultipoleOrder::QuadrupoleOnly).components;
    let full = multipole_potential(moments, &pt, MultipoleOrder::ThroughOctopole).components;
    let p3 = vec3::dot(kv, quad);
    (p3, vec3::dot(kv, full) - p3)
}

/// Direct volume quadrature of `-(g / 4 pi) int_{lambda0 < r} e^{iq.r} K.A dV`.
///
/// The angular grid uses `q` as its pole; the radial grid uses
/// Gauss-Legendre panels. The region beyond `r_max` is estimated from the
/// leading far-field asymptotics of the multipole potential.
pub fn vni_bruteforce_detailed(
    spec: &KnotSpec,
    kin: &ScatteringKinematics,
    g: f64,
    r_max: f64,
    grid: &BruteForceGrid,
) -> Result<BruteForceResult> {
    let lambda0 = kin.lambda0();
    if !(r_max >= 30.0 * lambda0) {
        return Err(Error::InvalidArgument(format!(
            "r_max = {r_max} must be at least 30 lambda0 = {}",
            30.0 * lambda0
        )));
    }
    if grid.radial_order == 0 || grid.n_phi < 8 || !(grid.max_panel > 0.0) {
        return Err(Error::InvalidArgument("brute-force grid too coarse".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let empty = BruteForceResult {
        body: zero,
        tail: zero,
        tail_error: 0.0,
    };
    if g == 0.0 {
        return Ok(empty);
    }
    let moments = moment_set(spec);
    let q = kin.q_mag();
    let kv = kin.k_sum();
    let axes = frame(kin.q_hat());
    let polar = gauss_legendre((q * r_max).ceil() as usize + grid.polar_extra);
    let dphi = 2.0 * PI / grid.n_phi as f64;
    let direction = |u: f64, phi: f64| {
        let s = (1.0 - u * u).max(0.0).sqrt();
        let mut d = [0.0; 3];
        for c in 0..3 {
            d[c] = s * phi.cos() * axes[0][c] + s * phi.sin() * axes[1][c] + u * axes[2][c];
        }
        d
    };

    // Ring sums of the far-field polynomials for every polar node.
    let mut rings3 = Vec::with_capacity(polar.order());
    let mut rings4 = Vec::with_capacity(polar.order());
    for &u in &polar.nodes {
        let (mut s3, mut s4) = (0.0, 0.0);
        for phi in periodic_nodes(grid.n_phi) {
            let (p3, p4) = far_field_polynomials(&moments, kv, direction(u, phi));
            s3 += p3;
            s4 += p4;
        }
        rings3.push(s3 * dphi);
        rings4.push(s4 * dphi);
    }

    let shell = |r: f64| -> Result<Complex64> {
        let mut sum = zero;
        let line_samples = match grid.field {
            FieldSource::BiotSavart { n_samples, switch_radius } if r <= switch_radius => Some(n_samples),
            _ => None,
        };
        let quad_only = grid.field == FieldSource::Multipole(MultipoleOrder::QuadrupoleOnly);
        for (idx, (&u, &w)) in polar.nodes.iter().zip(&polar.weights).enumerate() {
            let phase = Complex64::from_polar(1.0, q * r * u);
            let f = match line_samples {
                None if quad_only => rings3[idx] / r,
                None => rings3[idx] / r + rings4[idx] / (r * r),
                Some(n) => {
                    let mut s = 0.0;
                    for phi in periodic_nodes(grid.n_phi) {
                        let x = vec3::scale(direction(u, phi), r);
                        s += vec3::dot(kv, biot_savart_at(spec, x, n)?.components);
                    }
                    s * dphi * r * r
                }
            };
            sum += phase * (w * f);
        }
        Ok(sum)
    };

    let radial = gauss_legendre(grid.radial_order);
    let panel = (PI / q).min(grid.max_panel);
    let n_panels = ((r_max - lambda0) / panel).ceil() as usize;
    let h = (r_max - lambda0) / n_panels as f64;
    let mut body = zero;
    for p in 0..n_panels {
        let a = lambda0 + p as f64 * h;
        let (half, mid) = (0.5 * h, a + 0.5 * h);
        for (x, w) in radial.nodes.iter().zip(&radial.weights) {
            body += shell(mid + half * x)? * (w * half);
        }
    }

    // Leading far-field asymptotics of the angular integral at radius r:
    // (2 pi / (i q r)) [e^{iqr} P(q_hat) - e^{-iqr} P(-q_hat)].
    let qh = kin.q_hat();
    let (f3, f4) = far_field_polynomials(&moments, kv, qh);
    let (b3, b4) = far_field_polynomials(&moments, kv, vec3::scale(qh, -1.0));
    let pref = Complex64::new(0.0, -2.0 * PI / q);
    let e2 = oscillatory_tail(q, 2, r_max);
    let e3 = oscillatory_tail(q, 3, r_max);
    let mut tail = pref * (f3 * e2 - b3 * e2.conj());
    if !matches!(grid.field, FieldSource::Multipole(MultipoleOrder::QuadrupoleOnly)) {
        tail += pref * (f4 * e3 - b4 * e3.conj());
    }
    let tail_error = tail.norm() / (q * r_max);
    let s = -g / (4.0 * PI);
    let result = BruteForceResult {
        body: body * s,
        tail: tail * s,
        tail_error: tail_error * s.abs(),
    };
    if !result.value().is_finite() {
        return Err(Error::NonConvergence("volume quadrature produced a non-finite value".into()));
    }
    if result.tail_error > 1e-3 * result.value().norm().max(f64::MIN_POSITIVE) {
        return Err(Error::NonConvergence(format!(
            "tail beyond r_max = {r_max} not converged (error estimate {:e})",
            result.tail_error
        )));
    }
    Ok(result)
}

pub fn vni_bruteforce(
    spec: &KnotSpec,
    kin: &ScatteringKinematics,
    g: f64,
    r_max: f64,
    grid: &BruteForceGrid,
) -> Result<Complex64> {
    vni_bruteforce_detailed(spec, kin, g, r_max, grid).map(|r| r.value())
}

/// Amplitude of the unknot triad that stands in for the `(p, q)` torus knot.
pub fn triad_amplitude(p: u32, q: u32, kin: &ScatteringKinematics, g: f64) -> Result<BornAmplitude> {
    TorusKnot::new(p, q)?;
    let xy = born_amplitude(&KnotSpec::UnknotXY, kin, g)?;
    let xz = born_amplitude(&KnotSpec::UnknotXZ, kin, g)?;
    let yz = born_amplitude(&KnotSpec::UnknotYZ, kin, g)?;
    let (hp, hq) = (0.5 * f64::from(p), 0.5 * f64::from(q));
    Ok(BornAmplitude::from_parts(
        *kin,
        [hp * xy.v1, hp * xy.v2, -hq * (xz.v3 + yz.v3), -hq * (xz.v4 + yz.v4)],
    ))
}

/// `max |born - triad| / |born|` over the samples.
pub fn factorization_residual(p: u32, q: u32, samples: &[ScatteringKinematics], g: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("need at least one kinematics sample".into()));
    }
    let spec = KnotSpec::torus(p, q)?;
    let mut worst: f64 = 0.0;
    for kin in samples {
        let direct = born_amplitude(&spec, kin, g)?.total;
        let triad = triad_amplitude(p, q, kin, g)?.total;
        worst = worst.max((direct - triad).norm() / direct.norm().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Uniform directions on the sphere and `k` uniform in `[k_min, k_max]`.
///
/// Draws are rejected when the two directions nearly coincide.
pub fn random_kinematics(seed: u64, n: usize, k_min: f64, k_max: f64, lambda0: f64) -> Result<Vec<ScatteringKinematics>> {
    if !(k_min > 0.0 && k_max >= k_min && k_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad k range [{k_min}, {k_max}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = |rng: &mut ChaCha8Rng| {
        let theta = rng.gen_range(-1.0f64..=1.0).acos();
        (theta, rng.gen_range(0.0..2.0 * PI))
    };
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let k = if k_max > k_min { rng.gen_range(k_min..=k_max) } else { k_min };
        let (ki, kn) = (dir(&mut rng), dir(&mut rng));
        let a = vec3::from_angles(ki.0, ki.1);
        let b = vec3::from_angles(kn.0, kn.1);
        if vec3::norm(vec3::sub(a, b)) < 1e-6 {
            continue;
        }
        out.push(ScatteringKinematics::from_angles(k, ki, kn, lambda0)?);
    }
    Ok(out)
}

pub const SWEEP_CSV_HEADER: &str =
    "index,k,ki_theta,ki_phi,kn_theta,kn_phi,v1_re,v1_im,v2_re,v2_im,v3_re,v3_im,v4_re,v4_im,total_re,total_im,total_abs2";

/// One CSV line per amplitude, in the given order.
pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[BornAmplitude]) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for (idx, a) in rows.iter().enumerate() {
        let (ti, pi) = vec3::to_angles(a.kin.k_i());
        let (tn, pn) = vec3::to_angles(a.kin.k_n());
        let mut line = format!("{idx},{:e},{ti:e},{pi:e},{tn:e},{pn:e}", a.kin.k());
        for v in a.parts().iter().chain(std::iter::once(&a.total)) {
            line.push_str(&format!(",{:e},{:e}", v.re, v.im));
        }
        line.push_str(&format!(",{:e}", a.total.norm_sqr()));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::sample_curve;

    fn kin(k: f64, a: Vec3, b: Vec3) -> ScatteringKinematics {
        ScatteringKinematics::new(vec3::scale(a, k), vec3::scale(b, k), 3.5).unwrap()
    }

    fn generic() -> ScatteringKinematics {
        kin(1.0, [0.6, 0.0, 0.8], [0.0, 0.6, 0.8])
    }

    fn torus23() -> KnotSpec {
        KnotSpec::torus(2, 3).unwrap()
    }

    #[test]
    fn kinematics_validation() {
        assert!(matches!(
            ScatteringKinematics::new([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], 3.5),
            Err(Error::ForwardScattering)
        ));
        assert!(matches!(
            ScatteringKinematics::new([0.0, 0.0, 1.0], [0.0, 1.0 + 1e-9, 0.0], 3.5),
            Err(Error::OffShell { .. })
        ));
        assert!(ScatteringKinematics::new([0.0, 0.0, 1.0], [0.0, 1.0, 0.0], 0.0).is_err());
        let k = generic();
        assert_eq!(k.q_vec(), [0.6, -0.6, 0.0]);
        assert_eq!(k.k_sum(), [0.6, 0.6, 1.6]);
        assert!(CouplingConfig::new(0.0).is_err());
    }

    #[test]
    fn parts_sum_to_total() {
        let a = born_amplitude(&torus23(), &generic(), 1.0).unwrap();
        assert_eq!(a.total, a.v1 + a.v2 + a.v3 + a.v4);
        assert!(a.total.norm() > 0.0);
    }

    #[test]
    fn coupling_is_linear() {
        let a = born_amplitude(&torus23(), &generic(), 1.0).unwrap();
        let b = born_amplitude(&torus23(), &generic(), 2.0).unwrap();
        for (x, y) in a.parts().iter().zip(b.parts()) {
            assert!((2.0 * x - y).norm() <= 1e-15 * y.norm().max(1.0));
        }
    }

    #[test]
    fn planar_unknot_has_no_octopole_part() {
        let a = born_amplitude(&KnotSpec::UnknotXY, &generic(), 1.0).unwrap();
        assert!(a.v3.norm() < 1e-12 && a.v4.norm() < 1e-12);
        assert!(a.v1.norm() > 1e-3);
    }

    #[test]
    fn axial_momentum_sum_kills_torus_octopole() {
        let s = 60f64.to_radians();
        let k = kin(1.0, [s.sin(), 0.0, s.cos()], [-s.sin(), 0.0, s.cos()]);
        assert_eq!(k.k_sum()[0], 0.0);
        let a = born_amplitude(&torus23(), &k, 1.0).unwrap();
        assert!(a.v3.norm() < 1e-12 && a.v4.norm() < 1e-12);
    }

    #[test]
    fn backscattering_vanishes() {
        let k = kin(0.7, [0.0, 0.6, 0.8], [0.0, -0.6, -0.8]);
        let a = born_amplitude(&torus23(), &k, 1.0).unwrap();
        for v in a.parts() {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn hermiticity() {
        for k in random_kinematics(5, 10, 0.2, 2.0, 3.5).unwrap() {
            let a = born_amplitude(&torus23(), &k, 1.0).unwrap().total;
            let b = born_amplitude(&torus23(), &k.swapped(), 1.0).unwrap().total;
            assert!((a - b.conj()).norm() <= 1e-10 * a.norm().max(1e-300), "{a} {b}");
        }
    }

    #[test]
    fn joint_rotation_covariance() {
        let pts: Vec<Vec3> = sample_curve(&torus23(), 1024).unwrap().iter().map(|c| c.position).collect();
        let rot = vec3::rotation([1.0, 2.0, -0.5], 0.83);
        let rotated = KnotSpec::sampled(pts.iter().map(|&p| vec3::mat_vec(&rot, p)).collect()).unwrap();
        for k in random_kinematics(11, 3, 0.3, 1.5, 3.5).unwrap() {
            let a = born_amplitude(&torus23(), &k, 1.0).unwrap().total;
            let b = born_amplitude(&rotated, &k.rotated(&rot), 1.0).unwrap().total;
            assert!((a - b).norm() <= 1e-9 * a.norm(), "{a} {b}");
        }
    }

    #[test]
    fn triad_matches_torus() {
        let ks = random_kinematics(42, 5, 0.2, 2.0, 3.5).unwrap();
        for (p, q) in [(2, 3), (3, 4), (2, 5)] {
            assert!(factorization_residual(p, q, &ks, 1.0).unwrap() < 1e-9, "({p},{q})");
        }
        assert!(matches!(factorization_residual(2, 4, &ks, 1.0), Err(Error::NotCoprime { .. })));
        assert!(factorization_residual(2, 3, &[], 1.0).is_err());
    }

    #[test]
    fn triad_scales_linearly_in_winding_numbers() {
        let k = generic();
        let a = triad_amplitude(2, 3, &k, 1.0).unwrap();
        let b = triad_amplitude(3, 2, &k, 1.0).unwrap();
        assert!((b.v1 - 1.5 * a.v1).norm() < 1e-12 * a.v1.norm());
        assert!((b.v3 - a.v3 * (2.0 / 3.0)).norm() < 1e-12 * a.v3.norm());
    }

    #[test]
    fn resonant_windings_break_the_triad_identity() {
        // (3,2) and (1,1) have extra resonant Fourier terms in their octopole moments.
        let ks = random_kinematics(42, 5, 0.2, 2.0, 3.5).unwrap();
        assert!(factorization_residual(3, 2, &ks, 1.0).unwrap() > 1e-3);
        assert!(factorization_residual(1, 1, &ks, 1.0).unwrap() > 1e-3);
    }

    #[test]
    fn json_shape() {
        let a = born_amplitude(&torus23(), &generic(), 1.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(v["v"]["v3"].as_array().unwrap().len(), 2);
        assert_eq!(v["total"][0].as_f64().unwrap(), a.total.re);
        assert_eq!(v["kin"]["lambda0"].as_f64().unwrap(), 3.5);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let a = random_kinematics(9, 4, 0.2, 2.0, 3.5).unwrap();
        assert_eq!(a, random_kinematics(9, 4, 0.2, 2.0, 3.5).unwrap());
        assert_ne!(a, random_kinematics(10, 4, 0.2, 2.0, 3.5).unwrap());
        for k in &a {
            assert!((0.2..=2.0).contains(&k.k()));
        }
    }

    #[test]
    fn oscillatory_tail_matches_quadrature() {
        let (q, r) = (0.5, 100.0);
        let gl = gauss_legendre(40);
        let mut direct = Complex64::new(0.0, 0.0);
        let mut a = r;
        // long but finite range; remainder handled by the same expansion
        while a < 5000.0 {
            let b = a + PI / q;
            direct += Complex64::new(
                gl.integrate(a, b, |x| (q * x).cos() / (x * x)),
                gl.integrate(a, b, |x| (q * x).sin() / (x * x)),
            );
            a = b;
        }
        direct += oscillatory_tail(q, 2, a);
        assert!((direct - oscillatory_tail(q, 2, r)).norm() < 1e-10);
    }

    #[test]
    fn bruteforce_matches_quadrupole_part() {
        let k = generic();
        let grid = BruteForceGrid {
            field: FieldSource::Multipole(MultipoleOrder::QuadrupoleOnly),
            ..Default::default()
        };
        let brute = vni_bruteforce(&torus23(), &k, 1.0, 120.0, &grid).unwrap();
        let a = born_amplitude(&torus23(), &k, 1.0).unwrap();
        let exact = a.v1 + a.v2;
        assert!((brute - exact).norm() < 0.01 * exact.norm(), "{brute} {exact}");
    }

    fn octopole_residual(spec: &KnotSpec, k: &ScatteringKinematics) -> (Complex64, BornAmplitude) {
        let full = vni_bruteforce(spec, k, 1.0, 120.0, &BruteForceGrid::default()).unwrap();
        let grid = BruteForceGrid {
            field: FieldSource::Multipole(MultipoleOrder::QuadrupoleOnly),
            ..Default::default()
        };
        let quad = vni_bruteforce(spec, k, 1.0, 120.0, &grid).unwrap();
        (full - quad, born_amplitude(spec, k, 1.0).unwrap())
    }

    #[test]
    fn bruteforce_octopole_residual() {
        let k = random_kinematics(4, 1, 0.2, 2.0, 3.5).unwrap()[0];
        let (resid, a) = octopole_residual(&KnotSpec::UnknotXZ, &k);
        let oct = a.v3 + a.v4;
        assert!(oct.norm() > 1e-2 * (a.v1 + a.v2).norm(), "{oct}");
        assert!((resid - oct).norm() < 0.1 * oct.norm(), "{resid} {oct}");
    }

    #[test]
    fn torus_octopole_parts_cancel() {
        // the cubic part reduces to R_beta on the unit sphere and cancels the contracted part
        let k = generic();
        let (resid, a) = octopole_residual(&torus23(), &k);
        assert!(a.v3.norm() > 1e-3 && a.v4.norm() > 1e-3);
        assert!((a.v3 + a.v4).norm() < 1e-12 * a.v3.norm().max(1.0));
        assert!(resid.norm() < 1e-9 * a.total.norm(), "{resid}");
    }

    #[test]
    fn bruteforce_conjugates_under_swap_and_vanishes_at_zero_coupling() {
        let k = generic();
        let a = vni_bruteforce(&torus23(), &k, 1.0, 105.0, &BruteForceGrid::default()).unwrap();
        let b = vni_bruteforce(&torus23(), &k.swapped(), 1.0, 105.0, &BruteForceGrid::default()).unwrap();
        assert!((a - b.conj()).norm() < 1e-9 * a.norm());
        assert_eq!(vni_bruteforce(&torus23(), &k, 0.0, 105.0, &BruteForceGrid::default()).unwrap(), Complex64::new(0.0, 0.0));
        assert!(vni_bruteforce(&torus23(), &k, 1.0, 50.0, &BruteForceGrid::default()).is_err());
    }

    #[test]
    fn sweep_csv_layout() {
        let ks = random_kinematics(1, 2, 0.5, 0.5, 3.5).unwrap();
        let rows: Vec<_> = ks.iter().map(|k| born_amplitude(&torus23(), k, 1.0).unwrap()).collect();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), SWEEP_CSV_HEADER.split(',').count());
        assert!(lines[2].starts_with("1,5e-1,"));
    }
}
