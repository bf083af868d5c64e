//! Special functions and angular-momentum coefficients.
//!
//! Spherical harmonics use the Condon-Shortley phase, so that
//! `sin(theta) cos(phi) = sqrt(2 pi / 3) (Y_{1,-1} - Y_{1,1})`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre_p(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Associated Legendre function `P_l^m(x)` for `0 <= m <= l`, including the
/// Condon-Shortley factor `(-1)^m`.
fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * s;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pmm1;
    }
    for ll in (m + 2)..=l {
        let p = ((2 * ll - 1) as f64 * x * pmm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmm1;
        pmm1 = p;
    }
    pmm1
}

/// Spherical harmonic `Y_lm(theta, phi)`.
pub fn spherical_harmonic(l: u32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return Err(Error::InvalidArgument(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    Ok(ylm_unchecked(l, m, theta, phi))
}

pub(crate) fn ylm_unchecked(l: u32, m: i32, theta: f64, phi: f64) -> Complex64 {
    let am = m.unsigned_abs();
    // (l - m)! / (l + m)!
    let mut ratio = 1.0;
    for k in (l - am + 1)..=(l + am) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    let p = assoc_legendre(l, am, theta.cos());
    let y = Complex64::from_polar(norm * p, am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Spherical harmonic evaluated in the direction of a nonzero vector.
pub fn spherical_harmonic_dir(l: u32, m: i32, dir: Vec3) -> Result<Complex64> {
    let (theta, phi) = vec3::to_angles(dir);
    spherical_harmonic(l, m, theta, phi)
}

/// Spherical Bessel function of the first kind `j_l(x)` for `x >= 0`.
///
/// Power series below 0.5, Miller's downward recurrence for `x <= l`, and
/// upward recurrence from `j_0`, `j_1` otherwise.
pub fn spherical_bessel_j(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x < 0.5 {
        return spherical_bessel_j_series(l, x);
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let j1 = (s / x - c) / x;
    if x > l as f64 {
        let (mut jm, mut j) = (j0, j1);
        for n in 1..l {
            let jp = (2 * n + 1) as f64 / x * j - jm;
            jm = j;
            j = jp;
        }
        return j;
    }
    // Miller: recur down from well above l, normalize against j0 or j1.
    let start = (l + 30) as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-30;
    for n in (1..=start).rev() {
        vals[n - 1] = (2 * n + 1) as f64 / x * vals[n] - vals[n + 1];
        if vals[n - 1].abs() > 1e250 {
            vals.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    if j0.abs() >= j1.abs() {
        vals[l as usize] * (j0 / vals[0])
    } else {
        vals[l as usize] * (j1 / vals[1])
    }
}

/// `j_l(x)` by its ascending power series; accurate for moderate `x`.
pub fn spherical_bessel_j_series(l: u32, x: f64) -> f64 {
    let mut lead = 1.0;
    for k in 1..=l {
        lead *= x / (2 * k + 1) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500u32 {
        term *= y / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `(sign, ln|Gamma(x)|)`; `x` must not be a non-positive integer.
fn signed_ln_gamma(x: f64) -> (f64, f64) {
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let s = (PI * x).sin();
        let (sg, lg) = signed_ln_gamma(1.0 - x);
        let sign = if s < 0.0 { -sg } else { sg };
        return (sign, PI.ln() - s.abs().ln() - lg);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (
        1.0,
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln(),
    )
}

/// `ln|Gamma(x)|`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if is_pole(x) {
        return Err(Error::ParameterPole(format!("Gamma({x})")));
    }
    Ok(signed_ln_gamma(x).1)
}

pub fn gamma(x: f64) -> Result<f64> {
    if is_pole(x) {
        return Err(Error::ParameterPole(format!("Gamma({x})")));
    }
    let (s, l) = signed_ln_gamma(x);
    Ok(s * l.exp())
}

/// `Gamma(a) / Gamma(b)` via log-Gamma differences.
pub fn gamma_ratio(numerator_arg: f64, denominator_arg: f64) -> Result<f64> {
    for x in [numerator_arg, denominator_arg] {
        if is_pole(x) {
            return Err(Error::ParameterPole(format!("Gamma({x}) in ratio")));
        }
    }
    let (sa, la) = signed_ln_gamma(numerator_arg);
    let (sb, lb) = signed_ln_gamma(denominator_arg);
    Ok(sa * sb * (la - lb).exp())
}

/// Largest `|z|` accepted by [`hyp1f2`].
pub const HYP1F2_MAX_ABS_Z: f64 = 1e4;
const HYP1F2_MAX_TERMS: usize = 10_000;
/// Relative error tolerated from cancellation among series terms.
const HYP1F2_MAX_REL_ERR: f64 = 1e-9;

/// Generalized hypergeometric `1F2(a; b1, b2; z)` by direct summation.
///
/// Terms alternate for negative `z`; the sum is rejected when round-off from
/// the largest term would exceed a relative error of 1e-9.
pub fn hyp1f2(a: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    for b in [b1, b2] {
        if is_pole(b) {
            return Err(Error::ParameterPole(format!("1F2 lower parameter {b}")));
        }
    }
    if !z.is_finite() || z.abs() > HYP1F2_MAX_ABS_Z {
        return Err(Error::OutOfRange(format!("1F2 argument |z| = {} > {HYP1F2_MAX_ABS_Z}", z.abs())));
    }
    let mut term = 1.0f64;
    // Neumaier compensated sum
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    let mut max_term = 1.0f64;
    for n in 0..HYP1F2_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * z / ((b1 + nf) * (b2 + nf) * (nf + 1.0));
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        max_term = max_term.max(term.abs());
        let total = sum + comp;
        let past_peak = (a + nf + 1.0).abs() * z.abs() < (b1 + nf + 1.0).abs() * (b2 + nf + 1.0).abs() * (nf + 2.0);
        if term == 0.0 || (past_peak && term.abs() <= 1e-14 * total.abs().max(f64::MIN_POSITIVE)) {
            let value = total;
            let rel_err = max_term * f64::EPSILON * 4.0 / value.abs().max(f64::MIN_POSITIVE);
            if rel_err > HYP1F2_MAX_REL_ERR {
                return Err(Error::NonConvergence(format!(
                    "1F2 series cancellation: relative error {rel_err:.1e} at z = {z}"
                )));
            }
            return Ok(value);
        }
    }
    Err(Error::NonConvergence(format!(
        "1F2 series did not converge within {HYP1F2_MAX_TERMS} terms"
    )))
}

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Clebsch-Gordan coefficient as an exact signed square: returns
/// `(sign, c^2)` with `c^2` a reduced rational.
pub fn clebsch_gordan_exact(l1: u32, l2: u32, m1: i32, m2: i32, l: u32, m: i32) -> (i32, BigRational) {
    let zero = (0, BigRational::zero());
    let (j1, j2, j) = (l1 as i64, l2 as i64, l as i64);
    let (m1, m2, m) = (m1 as i64, m2 as i64, m as i64);
    if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return zero;
    }
    if m != m1 + m2 || j < (j1 - j2).abs() || j > j1 + j2 {
        return zero;
    }
    let f = |n: i64| BigRational::from_integer(factorial(n));
    let pre = BigRational::from_integer(BigInt::from(2 * j + 1)) * f(j + j1 - j2) * f(j - j1 + j2) * f(j1 + j2 - j)
        / f(j1 + j2 + j + 1)
        * f(j + m)
        * f(j - m)
        * f(j1 - m1)
        * f(j1 + m1)
        * f(j2 - m2)
        * f(j2 + m2);
    let mut sum = BigRational::zero();
    let kmin = 0.max(j2 - j - m1).max(j1 - j + m2);
    let kmax = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    for k in kmin..=kmax {
        let den = f(k) * f(j1 + j2 - j - k) * f(j1 - m1 - k) * f(j2 + m2 - k) * f(j - j2 + m1 + k) * f(j - j1 - m2 + k);
        let term = den.recip();
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return zero;
    }
    let sign = if sum.is_negative() { -1 } else { 1 };
    (sign, &sum * &sum * pre)
}

/// Clebsch-Gordan coefficient `<l1, l2; m1, m2 | l, m>`; zero when the
/// selection rules fail.
pub fn clebsch_gordan(l1: u32, l2: u32, m1: i32, m2: i32, l: u32, m: i32) -> f64 {
    let (sign, sq) = clebsch_gordan_exact(l1, l2, m1, m2, l, m);
    if sign == 0 {
        return 0.0;
    }
    sign as f64 * sq.to_f64().unwrap_or(f64::NAN).sqrt()
}

/// Gaunt coefficient `integral of conj(Y_{l m}) Y_{l1 m1} Y_{l2 m2} dOmega`.
pub fn gaunt(l1: u32, m1: i32, l2: u32, m2: i32, l: u32, m: i32) -> f64 {
    if m != m1 + m2 || l < l1.abs_diff(l2) || l > l1 + l2 || (l1 + l2 + l) % 2 == 1 {
        return 0.0;
    }
    if m1.unsigned_abs() > l1 || m2.unsigned_abs() > l2 || m.unsigned_abs() > l {
        return 0.0;
    }
    let pre = ((2 * l1 + 1) as f64 * (2 * l2 + 1) as f64 / (4.0 * PI * (2 * l + 1) as f64)).sqrt();
    pre * clebsch_gordan(l1, l2, 0, 0, l, 0) * clebsch_gordan(l1, l2, m1, m2, l, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SphereRule;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_p(0, 0.37), 1.0);
        assert_eq!(legendre_p(1, 0.3), 0.3);
        assert!((legendre_p(2, 0.5) + 0.125).abs() < 1e-15);
        for n in 0..8 {
            assert!((legendre_p(n, 1.0) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn harmonic_low_orders() {
        let y00 = spherical_harmonic(0, 0, 0.4, 1.2).unwrap();
        assert!((y00.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y00.im == 0.0);
        let y10 = spherical_harmonic(1, 0, 0.0, 0.0).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        assert!(spherical_harmonic(1, 2, 0.1, 0.1).is_err());
    }

    #[test]
    fn condon_shortley_direction_cosines() {
        let (t, p) = (0.83, -1.9);
        let c = (2.0 * PI / 3.0).sqrt();
        let ym = ylm_unchecked(1, -1, t, p);
        let yp = ylm_unchecked(1, 1, t, p);
        let alpha = (ym - yp) * c;
        let beta = Complex64::i() * (ym + yp) * c;
        assert!((alpha.re - t.sin() * p.cos()).abs() < 1e-14 && alpha.im.abs() < 1e-14);
        assert!((beta.re - t.sin() * p.sin()).abs() < 1e-14 && beta.im.abs() < 1e-14);
    }

    #[test]
    fn harmonic_norm_by_sphere_quadrature() {
        let v = SphereRule::default().integrate_real(|t, p| ylm_unchecked(2, 1, t, p).norm_sqr());
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_closed_forms() {
        assert!((spherical_bessel_j(0, 1.0) - 0.841_470_984_807_896_5).abs() < 1e-15);
        assert_eq!(spherical_bessel_j(0, 0.0), 1.0);
        assert_eq!(spherical_bessel_j(3, 0.0), 0.0);
        // j_2(x) = (3/x^3 - 1/x) sin x - 3 cos x / x^2
        for &x in &[0.7f64, 1.3, 2.9, 7.5, 40.0, 600.0] {
            let exact = (3.0 / x.powi(3) - 1.0 / x) * x.sin() - 3.0 * x.cos() / (x * x);
            assert!(close(spherical_bessel_j(2, x), exact, 1e-12), "x = {x}");
        }
    }

    #[test]
    fn bessel_recurrence_matches_series() {
        for l in 0..=10 {
            for &x in &[0.6, 1.0, 2.5, 5.0, 8.0] {
                let a = spherical_bessel_j(l, x);
                let b = spherical_bessel_j_series(l, x);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-17, "l={l} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gamma_values() {
        assert!((gamma_ratio(3.0, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((gamma_ratio(0.5, 1.0).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!(matches!(gamma_ratio(-1.0, 2.0), Err(Error::ParameterPole(_))));
        assert!(matches!(gamma(0.0), Err(Error::ParameterPole(_))));
    }

    #[test]
    fn hyp1f2_trivial_and_reduction() {
        assert_eq!(hyp1f2(0.3, 1.7, 2.2, 0.0).unwrap(), 1.0);
        // 1F2(a; a, 3/2; -x^2/4) = 0F1(3/2; -x^2/4) = sin(x)/x
        let x: f64 = 2.7;
        let v = hyp1f2(0.8, 0.8, 1.5, -x * x / 4.0).unwrap();
        assert!((v - x.sin() / x).abs() < 1e-14);
        assert!(matches!(hyp1f2(1.0, -2.0, 1.0, 0.5), Err(Error::ParameterPole(_))));
        assert!(matches!(hyp1f2(1.0, 2.0, 1.0, -2e4), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn hyp1f2_reports_cancellation() {
        assert!(matches!(hyp1f2(1.0, 3.5, 2.0, -9000.0), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn clebsch_gordan_worked_values() {
        assert!((clebsch_gordan(1, 1, 0, 0, 0, 0) + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(1, 1, 0, 0, 2, 0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(clebsch_gordan(1, 1, 0, 0, 1, 0), 0.0);
        assert_eq!(clebsch_gordan(1, 1, 1, 0, 2, 0), 0.0);
        assert!((clebsch_gordan(1, 1, 1, -1, 2, 0) - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(2, 1, 2, -1, 2, 1) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clebsch_gordan_orthogonality() {
        for l1 in 0..=3u32 {
            for l2 in 0..=3u32 {
                let ls: Vec<u32> = (l1.abs_diff(l2)..=l1 + l2).collect();
                for &a in &ls {
                    for &b in &ls {
                        for ma in -(a as i32)..=a as i32 {
                            for mb in -(b as i32)..=b as i32 {
                                let mut s = 0.0;
                                for m1 in -(l1 as i32)..=l1 as i32 {
                                    for m2 in -(l2 as i32)..=l2 as i32 {
                                        s += clebsch_gordan(l1, l2, m1, m2, a, ma)
                                            * clebsch_gordan(l1, l2, m1, m2, b, mb);
                                    }
                                }
                                let e = if a == b && ma == mb { 1.0 } else { 0.0 };
                                assert!((s - e).abs() < 1e-13);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gaunt_selection_rule() {
        assert_eq!(gaunt(1, 1, 1, 0, 2, 0), 0.0);
        assert_eq!(gaunt(1, 0, 1, 0, 1, 0), 0.0);
    }

    #[test]
    fn gaunt_y11_y1m1_row() {
        // sum over (l, m) of A(l, m) * gaunt = A(2,0)/sqrt(20 pi) - A(0,0)/sqrt(4 pi)
        assert!((gaunt(1, 1, 1, -1, 2, 0) - 1.0 / (20.0 * PI).sqrt()).abs() < 1e-15);
        assert!((gaunt(1, 1, 1, -1, 0, 0) + 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
    }
}
