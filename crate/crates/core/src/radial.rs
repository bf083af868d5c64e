//! Semi-infinite radial integrals of spherical Bessel functions.
//!
//! With `a = k lambda0` the two scalar integrals are
//!
//! * `rho_A(l) = ∫_a^∞ j_l(x) / x   dx` (quadrupole order, `1/r^3` potential)
//! * `rho_B(l) = ∫_a^∞ j_l(x) / x^2 dx` (octopole order, `1/r^4` potential)
//!
//! and the expansion coefficients are `A(l,m) = i^l Y_lm(q̂) rho_A(l)`,
//! `B(l,m) = i^l k Y_lm(q̂) rho_B(l)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::born::ScatteringKinematics;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::specfun::{gamma, gamma_ratio, hyp1f2, spherical_bessel_j, spherical_harmonic_dir};
use crate::vec3::{self, Vec3};

/// Largest `k lambda0` accepted by the closed forms.
pub const MAX_CLOSED_FORM_ARG: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RadialKind {
    /// weight `x^-1`
    A,
    /// weight `x^-2`
    B,
}

impl RadialKind {
    fn power(self) -> i32 {
        match self {
            RadialKind::A => 1,
            RadialKind::B => 2,
        }
    }
}

fn check_args(k: f64, lambda0: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) || !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radial integral needs k > 0 and lambda0 > 0, got k = {k}, lambda0 = {lambda0}"
        )));
    }
    Ok(k * lambda0)
}

/// Gamma / 1F2 closed form of `rho_A(l)`, `l >= 1`.
pub fn radial_a_closed(l: u32, k: f64, lambda0: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::DegenerateClosedForm { l });
    }
    let a = check_args(k, lambda0)?;
    if a > MAX_CLOSED_FORM_ARG {
        return Err(Error::OutOfRange(format!("k lambda0 = {a} exceeds {MAX_CLOSED_FORM_ARG}")));
    }
    let lf = l as f64;
    let head = 2f64.powf(-1.5) * gamma_ratio(lf / 2.0, (lf + 3.0) / 2.0)?;
    let f = hyp1f2(lf / 2.0, lf + 1.5, (lf + 2.0) / 2.0, -a * a / 4.0)?;
    let tail = a.powi(l as i32) / (2f64.powf(lf + 0.5) * lf * gamma(lf + 1.5)?) * f;
    Ok((PI / 2.0).sqrt() * (head - tail))
}

/// Gamma / 1F2 closed form of `rho_B(l)`, `l >= 2`.
pub fn radial_b_closed(l: u32, k: f64, lambda0: f64) -> Result<f64> {
    if l <= 1 {
        return Err(Error::DegenerateClosedForm { l });
    }
    let a = check_args(k, lambda0)?;
    if a > MAX_CLOSED_FORM_ARG {
        return Err(Error::OutOfRange(format!("k lambda0 = {a} exceeds {MAX_CLOSED_FORM_ARG}")));
    }
    let lf = l as f64;
    let head = 2f64.powf(-2.5) * gamma_ratio((lf - 1.0) / 2.0, (lf + 4.0) / 2.0)?;
    let f = hyp1f2((lf - 1.0) / 2.0, lf + 1.5, (lf + 1.0) / 2.0, -a * a / 4.0)?;
    let tail = a.powi(l as i32 - 1) / (2f64.powf(lf + 0.5) * (lf - 1.0) * gamma(lf + 1.5)?) * f;
    Ok((PI / 2.0).sqrt() * (head - tail))
}

pub fn radial_closed(kind: RadialKind, l: u32, k: f64, lambda0: f64) -> Result<f64> {
    match kind {
        RadialKind::A => radial_a_closed(l, k, lambda0),
        RadialKind::B => radial_b_closed(l, k, lambda0),
    }
}

const PANEL_ORDER: usize = 24;
const MIN_PANELS: usize = 16;
const MAX_PANELS: usize = 600;

/// Next sign change of `j_l` beyond `x + skip`, located by a 0.25 scan and bisection.
fn next_zero(l: u32, x: f64, skip: f64) -> f64 {
    let step = 0.25;
    let mut lo = x + skip;
    let mut flo = spherical_bessel_j(l, lo);
    loop {
        let hi = lo + step;
        let fhi = spherical_bessel_j(l, hi);
        if flo == 0.0 && lo > x {
            return lo;
        }
        if flo * fhi < 0.0 {
            let (mut a, mut b, mut fa) = (lo, hi, flo);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = spherical_bessel_j(l, m);
                if fm * fa <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
                if b - a < 1e-14 * b {
                    break;
                }
            }
            return 0.5 * (a + b);
        }
        lo = hi;
        flo = fhi;
    }
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
pub fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    if n < 3 {
        return *s.last().unwrap_or(&0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            if d == 0.0 {
                return cur[j + 1];
            }
            next.push(prev[j + 1] + 1.0 / d);
        }
        col += 1;
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}

/// `∫_lo^hi j_l(x) x^-p dx` by Gauss-Legendre, split geometrically when `lo`
/// is close to the origin.
fn panel(l: u32, p: i32, lo: f64, hi: f64) -> f64 {
    let gl = gauss_legendre(PANEL_ORDER);
    let f = |x: f64| spherical_bessel_j(l, x) / x.powi(p);
    let mut total = 0.0;
    let mut a = lo;
    while a < hi {
        let b = if hi > 4.0 * a { (2.0 * a).min(hi) } else { hi };
        total += gl.integrate(a, b, f);
        a = b;
    }
    total
}

/// Zero-aligned panels with Wynn-accelerated partial sums.
///
/// Returns `∫_{k lambda0}^∞ j_l(x) x^-p dx` where `p = 1` for `A` and `p = 2` for `B`.
pub fn radial_quadrature(kind: RadialKind, l: u32, k: f64, lambda0: f64) -> Result<f64> {
    let a = check_args(k, lambda0)?;
    if l > 10 {
        return Err(Error::OutOfRange(format!("radial order l = {l} exceeds 10")));
    }
    let p = kind.power();
    let mut partial = Vec::new();
    let mut sum = 0.0;
    let mut lo = a;
    let mut last_estimate: Option<f64> = None;
    for n in 1..=MAX_PANELS {
        // consecutive zeros are more than 2 apart
        let hi = next_zero(l, lo, if n == 1 { 0.0 } else { 1.0 });
        sum += panel(l, p, lo, hi);
        partial.push(sum);
        lo = hi;
        if n >= MIN_PANELS && n % 8 == 0 {
            let window = &partial[partial.len().saturating_sub(24)..];
            let est = wynn_epsilon(window);
            if let Some(prev) = last_estimate {
                if (est - prev).abs() <= 1e-13 * est.abs().max(1e-3) {
                    return Ok(est);
                }
            }
            last_estimate = Some(est);
        }
    }
    Err(Error::NonConvergence(format!(
        "radial tail for l = {l}, k lambda0 = {a} did not settle within {MAX_PANELS} panels"
    )))
}

/// Coefficients of the exact finite asymptotic form
/// `j_l(x) = (1/x) [P(1/x) sin(x - l pi/2) + Q(1/x) cos(x - l pi/2)]`.
/// Entry `c` of the returned vector multiplies `x^-c` inside the bracket;
/// even `c` goes with `sin`, odd `c` with `cos`.
fn hankel_coefficients(l: u32) -> Vec<f64> {
    (0..=l)
        .map(|c| {
            let mut v = 1.0;
            // (l+c)! / (2^c c! (l-c)!)
            for t in (l - c + 1)..=(l + c) {
                v *= t as f64;
            }
            for t in 1..=c {
                v /= 2.0 * t as f64;
            }
            let sign = if (c / 2) % 2 == 0 { 1.0 } else { -1.0 };
            sign * v
        })
        .collect()
}

/// `∫_X^∞ x^-m e^{ix} dx` from its asymptotic series, for large `X`.
fn oscillatory_tail(m: i32, x: f64) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut term = Complex64::new(x.powi(-m), 0.0);
    let mut sum = term;
    let mut prev_mag = term.norm();
    for j in 0..60 {
        term *= -i * (m as f64 + j as f64) / x;
        let mag = term.norm();
        if mag > prev_mag {
            return Err(Error::NonConvergence(format!("oscillatory tail series diverges at X = {x}")));
        }
        sum += term;
        if mag < 1e-18 * sum.norm() {
            return Ok(i * Complex64::from_polar(1.0, x) * sum);
        }
        prev_mag = mag;
    }
    Err(Error::NonConvergence(format!("oscillatory tail series did not settle at X = {x}")))
}

/// Second, independent scheme: fixed composite Gauss-Legendre on
/// `[a, X]` plus the analytic tail beyond `X` from the finite asymptotic
/// form of `j_l`.
pub fn radial_quadrature_tail(kind: RadialKind, l: u32, k: f64, lambda0: f64) -> Result<f64> {
    let a = check_args(k, lambda0)?;
    if l > 10 {
        return Err(Error::OutOfRange(format!("radial order l = {l} exceeds 10")));
    }
    let p = kind.power();
    let cutoff = a + 400.0;
    let gl = gauss_legendre(32);
    let f = |x: f64| spherical_bessel_j(l, x) / x.powi(p);
    let mut body = 0.0;
    // graded panels near a small lower limit, then pi-length panels
    let mut lo = a;
    while lo < cutoff {
        let width = if lo < PI { lo.max(0.05).min(PI) } else { PI };
        let hi = (lo + width).min(cutoff);
        body += gl.integrate(lo, hi, f);
        lo = hi;
    }
    let phase = Complex64::from_polar(1.0, -(l as f64) * PI / 2.0);
    let mut tail = 0.0;
    for (c, coef) in hankel_coefficients(l).into_iter().enumerate() {
        let m = 1 + p + c as i32;
        let z = phase * oscillatory_tail(m, cutoff)?;
        tail += coef * if c % 2 == 0 { z.im } else { z.re };
    }
    Ok(body + tail)
}

/// Expansion coefficients for one momentum transfer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialCoefficients {
    pub k: f64,
    pub lambda0: f64,
    pub khat: Vec3,
    /// `rho_A(l)` for `l` in `{0, 2}`
    pub rho_a: BTreeMap<u32, f64>,
    /// `rho_B(l)` for `l` in `{1, 3}`
    pub rho_b: BTreeMap<u32, f64>,
    #[serde(skip)]
    pub a: BTreeMap<(u32, i32), Complex64>,
    #[serde(skip)]
    pub b: BTreeMap<(u32, i32), Complex64>,
}

fn i_pow(l: u32) -> Complex64 {
    match l % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Closed form where it applies and is numerically usable, quadrature otherwise.
fn rho(kind: RadialKind, l: u32, k: f64, lambda0: f64) -> Result<f64> {
    match radial_closed(kind, l, k, lambda0) {
        Ok(v) => Ok(v),
        Err(Error::DegenerateClosedForm { .. } | Error::NonConvergence(_) | Error::OutOfRange(_)) => {
            radial_quadrature(kind, l, k, lambda0)
        }
        Err(e) => Err(e),
    }
}

impl RadialCoefficients {
    /// Build from the momentum-transfer vector `q = k_i - k_n`.
    pub fn from_transfer(q: Vec3, lambda0: f64) -> Result<Self> {
        let k = vec3::norm(q);
        if k == 0.0 {
            return Err(Error::ForwardScattering);
        }
        check_args(k, lambda0)?;
        let khat = vec3::scale(q, 1.0 / k);
        let mut rho_a = BTreeMap::new();
        let mut rho_b = BTreeMap::new();
        for l in [0u32, 2] {
            rho_a.insert(l, rho(RadialKind::A, l, k, lambda0)?);
        }
        for l in [1u32, 3] {
            rho_b.insert(l, rho(RadialKind::B, l, k, lambda0)?);
        }
        Self::assemble(k, lambda0, khat, rho_a, rho_b)
    }

    fn assemble(
        k: f64,
        lambda0: f64,
        khat: Vec3,
        rho_a: BTreeMap<u32, f64>,
        rho_b: BTreeMap<u32, f64>,
    ) -> Result<Self> {
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        for (&l, &r) in &rho_a {
            for m in -(l as i32)..=(l as i32) {
                a.insert((l, m), i_pow(l) * spherical_harmonic_dir(l, m, khat)? * r);
            }
        }
        for (&l, &r) in &rho_b {
            for m in -(l as i32)..=(l as i32) {
                b.insert((l, m), i_pow(l) * spherical_harmonic_dir(l, m, khat)? * (k * r));
            }
        }
        Ok(RadialCoefficients {
            k,
            lambda0,
            khat,
            rho_a,
            rho_b,
            a,
            b,
        })
    }

    /// Same coefficients with every `rho` taken from [`radial_quadrature`].
    pub fn by_quadrature(q: Vec3, lambda0: f64) -> Result<Self> {
        let k = vec3::norm(q);
        if k == 0.0 {
            return Err(Error::ForwardScattering);
        }
        let mut rho_a = BTreeMap::new();
        let mut rho_b = BTreeMap::new();
        for l in [0u32, 2] {
            rho_a.insert(l, radial_quadrature(RadialKind::A, l, k, lambda0)?);
        }
        for l in [1u32, 3] {
            rho_b.insert(l, radial_quadrature(RadialKind::B, l, k, lambda0)?);
        }
        Self::assemble(k, lambda0, vec3::scale(q, 1.0 / k), rho_a, rho_b)
    }
}

pub fn radial_coefficients(kin: &ScatteringKinematics) -> Result<RadialCoefficients> {
    RadialCoefficients::from_transfer(kin.q_vec(), kin.lambda0())
}
