//! Spherical-harmonic expansions of direction-cosine monomials and the
//! angular brackets `Σ_{l,m} C(l,m) ∫ Y*_lm R_1^a R_2^b R_3^c dΩ`.
//!
//! Expansions are generated from the three degree-one expansions by Gaunt
//! linearization. The printed reference tables further down are kept only as
//! fixtures and are compared against the generated values.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::SphereRule;
use crate::specfun::{gaunt, ylm_unchecked};
use crate::vec3;

pub type LmMap = BTreeMap<(u32, i32), Complex64>;

/// Coefficients below this magnitude are treated as cancellation noise.
const PRUNE: f64 = 1e-14;

/// `R_1^n1 R_2^n2 R_3^n3` with total degree at most 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectionCosineMonomial {
    exponents: [u32; 3],
}

impl DirectionCosineMonomial {
    pub const MAX_DEGREE: u32 = 3;

    pub fn new(n1: u32, n2: u32, n3: u32) -> Result<Self> {
        let d = n1 + n2 + n3;
        if d > Self::MAX_DEGREE {
            return Err(Error::MonomialDegree(d));
        }
        Ok(DirectionCosineMonomial { exponents: [n1, n2, n3] })
    }

    /// Monomial for a sorted or unsorted list of axis indices `0..3`.
    pub fn from_axes(axes: &[usize]) -> Result<Self> {
        let mut e = [0u32; 3];
        for &a in axes {
            if a > 2 {
                return Err(Error::InvalidArgument(format!("axis index {a} out of range")));
            }
            e[a] += 1;
        }
        Self::new(e[0], e[1], e[2])
    }

    pub fn exponents(&self) -> [u32; 3] {
        self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        let r = vec3::from_angles(theta, phi);
        (0..3).map(|ax| r[ax].powi(self.exponents[ax] as i32)).product()
    }

    /// All 20 monomials of degree 0 through 3.
    pub fn all() -> Vec<Self> {
        let mut v = Vec::new();
        for d in 0..=Self::MAX_DEGREE {
            for n1 in (0..=d).rev() {
                for n2 in (0..=d - n1).rev() {
                    v.push(DirectionCosineMonomial { exponents: [n1, n2, d - n1 - n2] });
                }
            }
        }
        v
    }
}

impl fmt::Display for DirectionCosineMonomial {
    /// `1`, `R1`, `R1R3R3`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        for ax in 0..3 {
            for _ in 0..self.exponents[ax] {
                write!(f, "R{}", ax + 1)?;
            }
        }
        Ok(())
    }
}

/// `Σ c_lm Y_lm(θ, φ)`
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonicExpansion {
    pub terms: LmMap,
}

impl HarmonicExpansion {
    pub fn eval(&self, theta: f64, phi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(l, m), c)| c * ylm_unchecked(l, m, theta, phi))
            .sum()
    }

    /// Product of two expansions, re-expanded with Gaunt coefficients.
    pub fn multiply(&self, other: &HarmonicExpansion) -> HarmonicExpansion {
        let mut out = LmMap::new();
        for (&(l1, m1), a) in &self.terms {
            for (&(l2, m2), b) in &other.terms {
                let m = m1 + m2;
                for l in l1.abs_diff(l2)..=(l1 + l2) {
                    if (m.unsigned_abs()) > l {
                        continue;
                    }
                    let g = gaunt(l1, m1, l2, m2, l, m);
                    if g != 0.0 {
                        *out.entry((l, m)).or_default() += a * b * g;
                    }
                }
            }
        }
        out.retain(|_, c| c.norm() > PRUNE);
        HarmonicExpansion { terms: out }
    }
}

fn degree_one(axis: usize) -> HarmonicExpansion {
    let s = (2.0 * PI / 3.0).sqrt();
    let mut t = LmMap::new();
    match axis {
        0 => {
            t.insert((1, -1), Complex64::new(s, 0.0));
            t.insert((1, 1), Complex64::new(-s, 0.0));
        }
        1 => {
            t.insert((1, -1), Complex64::new(0.0, s));
            t.insert((1, 1), Complex64::new(0.0, s));
        }
        _ => {
            t.insert((1, 0), Complex64::new((4.0 * PI / 3.0).sqrt(), 0.0));
        }
    }
    HarmonicExpansion { terms: t }
}

fn expansion_table() -> &'static BTreeMap<DirectionCosineMonomial, HarmonicExpansion> {
    static TABLE: OnceLock<BTreeMap<DirectionCosineMonomial, HarmonicExpansion>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = BTreeMap::new();
        for mono in DirectionCosineMonomial::all() {
            let mut e = HarmonicExpansion {
                terms: LmMap::from([((0, 0), Complex64::new((4.0 * PI).sqrt(), 0.0))]),
            };
            for ax in 0..3 {
                for _ in 0..mono.exponents[ax] {
                    e = e.multiply(&degree_one(ax));
                }
            }
            table.insert(mono, e);
        }
        table
    })
}

/// Finite spherical-harmonic expansion of a monomial.
pub fn monomial_expansion(mono: &DirectionCosineMonomial) -> &'static HarmonicExpansion {
    &expansion_table()[mono]
}

/// `Σ_{l,m} coeffs(l,m) ∫ Y*_lm mono dΩ`, evaluated from the expansion.
pub fn angular_bracket(mono: &DirectionCosineMonomial, coeffs: &LmMap) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (&(l, m), e) in &monomial_expansion(mono).terms {
        let c = coeffs.get(&(l, m)).ok_or(Error::MissingCoefficient { l, m })?;
        sum += c * e;
    }
    Ok(sum)
}

/// The same bracket by direct quadrature of each `∫ Y*_lm mono dΩ`.
pub fn sphere_quadrature_bracket(mono: &DirectionCosineMonomial, coeffs: &LmMap, l_max: u32) -> Result<Complex64> {
    if l_max < 3 {
        return Err(Error::InvalidArgument(format!("l_max must be at least 3, got {l_max}")));
    }
    let rule = SphereRule::default();
    let mut sum = Complex64::new(0.0, 0.0);
    for (&(l, m), c) in coeffs {
        if l > l_max {
            continue;
        }
        let overlap = rule.integrate(|t, p| ylm_unchecked(l, m, t, p).conj() * mono.eval(t, p));
        sum += c * overlap;
    }
    Ok(sum)
}

/// `Σ coeffs(L,M) ∫ Y*_LM Y_{l1 m1} Y_{l2 m2} dΩ`
pub fn product_bracket(l1: u32, m1: i32, l2: u32, m2: i32, coeffs: &LmMap) -> Complex64 {
    coeffs
        .iter()
        .map(|(&(l, m), c)| c * gaunt(l1, m1, l2, m2, l, m))
        .sum()
}

/// Expansion of `Y_{l,m}` products, left to right.
pub fn harmonic_product(factors: &[(u32, i32)]) -> HarmonicExpansion {
    let mut e = HarmonicExpansion {
        terms: LmMap::from([((0, 0), Complex64::new((4.0 * PI).sqrt(), 0.0))]),
    };
    for &(l, m) in factors {
        e = e.multiply(&HarmonicExpansion {
            terms: LmMap::from([((l, m), Complex64::new(1.0, 0.0))]),
        });
    }
    e
}

/// What a printed table entry expands.
#[derive(Debug, Clone, PartialEq)]
pub enum TableSubject {
    Monomial(DirectionCosineMonomial),
    /// product of `Y_{l,m}` factors
    Harmonics(Vec<(u32, i32)>),
}

impl fmt::Display for TableSubject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableSubject::Monomial(m) => write!(f, "{m}"),
            TableSubject::Harmonics(v) => {
                for (l, m) in v {
                    write!(f, "Y{l},{m}")?;
                }
                Ok(())
            }
        }
    }
}

/// One printed expansion: the coefficient of each `(l,m)`; absent keys are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    pub subject: TableSubject,
    pub source: &'static str,
    pub terms: LmMap,
}

impl ReferenceEntry {
    pub fn computed(&self) -> LmMap {
        match &self.subject {
            TableSubject::Monomial(m) => monomial_expansion(m).terms.clone(),
            TableSubject::Harmonics(f) => harmonic_product(f).terms,
        }
    }
}

pub const SOURCE_BRACKETS: &str = "bracket_table";
pub const SOURCE_AMPLITUDE: &str = "amplitude_table";
pub const SOURCE_PAIRS: &str = "pair_product_table";
pub const SOURCE_TRIPLES: &str = "triple_product_table";

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn im(v: f64) -> Complex64 {
    Complex64::new(0.0, v)
}

fn mono(n1: u32, n2: u32, n3: u32) -> TableSubject {
    TableSubject::Monomial(DirectionCosineMonomial { exponents: [n1, n2, n3] })
}

fn entry(subject: TableSubject, source: &'static str, terms: &[((u32, i32), Complex64)]) -> ReferenceEntry {
    ReferenceEntry {
        subject,
        source,
        terms: terms.iter().copied().collect(),
    }
}

/// Printed monomial brackets, coefficient of `C(l,m)` per monomial.
fn bracket_table(source: &'static str) -> Vec<ReferenceEntry> {
    let s = f64::sqrt;
    let p3 = (2.0 * PI / 3.0).powf(1.5);
    let t3 = (4.0 * PI / 3.0).powf(1.5);
    let a = s(2.0 * PI / 15.0);
    let b = s(2.0 * PI / 105.0);
    let c33 = 3.0 / (2.0 * PI) * s(3.0 / 70.0);
    let n = |v: Complex64, k: Complex64| v * k;
    vec![
        entry(mono(0, 0, 0), source, &[((0, 0), re(s(4.0 * PI)))]),
        entry(mono(2, 0, 0), source, &[
            ((2, -2), re(a)),
            ((2, 2), re(a)),
            ((2, 0), re(-2.0 / 3.0 * s(PI / 5.0))),
            ((0, 0), re(2.0 * s(PI) / 3.0)),
        ]),
        entry(mono(0, 2, 0), source, &[
            ((2, -2), re(-a)),
            ((2, 2), re(-a)),
            ((2, 0), re(-2.0 / 3.0 * s(PI / 5.0))),
            ((0, 0), re(2.0 * s(PI) / 3.0)),
        ]),
        entry(mono(0, 0, 2), source, &[
            ((0, 0), re(2.0 / 3.0 * s(PI))),
            ((2, 0), re(4.0 / 3.0 * s(PI / 5.0))),
        ]),
        entry(mono(1, 1, 0), source, &[
            ((2, -2), im(2.0 * PI / 3.0 * s(3.0 / (10.0 * PI)))),
            ((2, 2), im(-2.0 * PI / 3.0 * s(3.0 / (10.0 * PI)))),
        ]),
        entry(mono(1, 0, 1), source, &[((2, -1), re(a)), ((2, 1), re(-a))]),
        entry(mono(0, 1, 1), source, &[((2, -1), im(a)), ((2, 1), im(a))]),
        entry(mono(1, 0, 0), source, &[((1, -1), re(s(2.0 * PI / 3.0))), ((1, 1), re(-s(2.0 * PI / 3.0)))]),
        entry(mono(0, 1, 0), source, &[((1, -1), im(s(2.0 * PI / 3.0))), ((1, 1), im(s(2.0 * PI / 3.0)))]),
        entry(mono(0, 0, 1), source, &[((1, 0), re(s(4.0 * PI / 3.0)))]),
        entry(mono(3, 0, 0), source, &[
            ((3, -3), re(p3 * c33)),
            ((1, -1), re(p3 * 9.0 / (10.0 * PI))),
            ((3, -1), re(-p3 * 9.0 / (10.0 * PI) * s(1.0 / 14.0))),
            ((1, 1), re(-p3 * 9.0 / (10.0 * PI))),
            ((3, 1), re(p3 * 9.0 / (10.0 * PI * s(14.0)))),
            ((3, 3), re(-p3 * c33)),
        ]),
        entry(mono(0, 3, 0), source, &[
            ((3, -3), n(im(-p3), re(c33))),
            ((1, -1), n(im(-p3), re(-9.0 / (10.0 * PI)))),
            ((3, -1), n(im(-p3), re(9.0 / (10.0 * PI) * s(1.0 / 14.0)))),
            ((1, 1), n(im(-p3), re(-9.0 / (10.0 * PI)))),
            ((3, 1), n(im(-p3), re(9.0 / (10.0 * PI * s(14.0))))),
            ((3, 3), n(im(-p3), re(c33))),
        ]),
        entry(mono(0, 0, 3), source, &[
            ((1, 0), re(t3 * 9.0 / (20.0 * PI))),
            ((3, 0), re(t3 * 3.0 / (10.0 * PI) * s(3.0 / 7.0))),
        ]),
        entry(mono(1, 2, 0), source, &[
            ((3, -3), re(-p3 * c33)),
            ((1, -1), re(-p3 * -3.0 / (10.0 * PI))),
            ((3, -1), re(-p3 * 3.0 / (10.0 * PI) * s(1.0 / 14.0))),
            ((1, 1), re(-p3 * 3.0 / (10.0 * PI))),
            ((3, 1), re(-p3 * -3.0 / (10.0 * PI * s(14.0)))),
            ((3, 3), re(-p3 * -c33)),
        ]),
        entry(mono(2, 1, 0), source, &[
            ((3, -3), im(p3 * c33)),
            ((1, -1), im(p3 * 3.0 / (10.0 * PI))),
            ((3, -1), im(p3 * -3.0 / (10.0 * PI) * s(1.0 / 14.0))),
            ((1, 1), im(p3 * 3.0 / (10.0 * PI))),
            ((3, 1), im(p3 * -3.0 / (10.0 * PI * s(14.0)))),
            ((3, 3), im(p3 * c33)),
        ]),
        entry(mono(1, 0, 2), source, &[
            ((1, -1), re(0.2 * s(2.0 * PI / 3.0))),
            ((3, -1), re(0.8 * s(PI / 21.0))),
            ((1, 1), re(-0.2 * s(2.0 * PI / 3.0))),
            ((3, 1), re(-0.8 * s(PI / 21.0))),
        ]),
        entry(mono(2, 0, 1), source, &[
            ((3, -2), re(b)),
            ((1, 0), re(0.4 * s(PI / 3.0))),
            ((3, 0), re(-0.4 * s(PI / 7.0))),
            ((3, 2), re(b)),
        ]),
        entry(mono(0, 2, 1), source, &[
            ((3, -2), re(-b)),
            ((1, 0), re(0.4 * s(PI / 3.0))),
            ((3, 0), re(-0.4 * s(PI / 7.0))),
            ((3, 2), re(-b)),
        ]),
        entry(mono(0, 1, 2), source, &[
            ((1, -1), im(0.2 * s(2.0 * PI / 3.0))),
            ((3, -1), im(0.8 * s(PI / 21.0))),
            ((1, 1), im(0.2 * s(2.0 * PI / 3.0))),
            ((3, 1), im(0.8 * s(PI / 21.0))),
        ]),
        entry(mono(1, 1, 1), source, &[((3, -2), im(b)), ((3, 2), im(-b))]),
    ]
}

/// Printed two-harmonic products `∫ Y*_LM Y_{1,m1} Y_{1,m2} dΩ`.
fn pair_table() -> Vec<ReferenceEntry> {
    let s = f64::sqrt;
    let h = |a: i32, b: i32| TableSubject::Harmonics(vec![(1, a), (1, b)]);
    vec![
        entry(h(0, 0), SOURCE_PAIRS, &[((0, 0), re(s(1.0 / (4.0 * PI)))), ((2, 0), re(s(1.0 / (5.0 * PI))))]),
        entry(h(-1, -1), SOURCE_PAIRS, &[((2, -2), re(s(3.0 / (10.0 * PI))))]),
        entry(h(1, 1), SOURCE_PAIRS, &[((2, 2), re(s(3.0 / (10.0 * PI))))]),
        entry(h(0, 1), SOURCE_PAIRS, &[((2, 1), re(s(3.0 / (20.0 * PI))))]),
        entry(h(0, -1), SOURCE_PAIRS, &[((2, -1), re(s(3.0 / (20.0 * PI))))]),
        entry(h(1, -1), SOURCE_PAIRS, &[((2, 0), re(1.0 / s(20.0 * PI))), ((0, 0), re(-1.0 / s(4.0 * PI)))]),
    ]
}

/// Printed reductions of three degree-one harmonics.
pub fn triple_table() -> Vec<ReferenceEntry> {
    let s = f64::sqrt;
    let h = |a: i32, b: i32, c: i32| TableSubject::Harmonics(vec![(1, a), (1, b), (1, c)]);
    let t = 3.0 / (10.0 * PI);
    vec![
        entry(h(0, 1, 1), SOURCE_TRIPLES, &[((3, 2), re(3.0 / (2.0 * PI * s(70.0))))]),
        entry(h(1, 1, 1), SOURCE_TRIPLES, &[((3, 3), re(3.0 / (2.0 * PI) * s(3.0 / 70.0)))]),
        entry(h(-1, 1, 1), SOURCE_TRIPLES, &[((1, 1), re(-t)), ((3, 1), re(t / s(14.0)))]),
        entry(h(-1, -1, -1), SOURCE_TRIPLES, &[((3, -3), re(3.0 / (2.0 * PI) * s(3.0 / 70.0)))]),
        entry(h(1, -1, -1), SOURCE_TRIPLES, &[((1, -1), re(-t)), ((3, -1), re(t * s(1.0 / 14.0)))]),
        entry(h(0, -1, -1), SOURCE_TRIPLES, &[((3, -2), re(3.0 / (2.0 * PI) * s(1.0 / 70.0)))]),
        entry(h(-1, 0, 0), SOURCE_TRIPLES, &[((1, -1), re(3.0 / (20.0 * PI))), ((3, -1), re(t * s(2.0 / 7.0)))]),
        entry(h(1, 0, 0), SOURCE_TRIPLES, &[((1, 1), re(3.0 / (20.0 * PI))), ((3, 1), re(t * s(2.0 / 7.0)))]),
        entry(h(0, 0, 0), SOURCE_TRIPLES, &[((1, 0), re(9.0 / (20.0 * PI))), ((3, 0), re(t * s(3.0 / 7.0)))]),
        entry(h(0, -1, 1), SOURCE_TRIPLES, &[((1, 0), re(-3.0 / (20.0 * PI))), ((3, 0), re(3.0 / (20.0 * PI) * s(3.0 / 7.0)))]),
    ]
}

/// Every printed table entry used as a fixture.
pub fn reference_tables() -> Vec<ReferenceEntry> {
    let mut v = pair_table();
    v.extend(bracket_table(SOURCE_BRACKETS));
    // The amplitude listing repeats the brackets except for one coefficient.
    let mut amp = bracket_table(SOURCE_AMPLITUDE);
    for e in &mut amp {
        if e.subject == mono(1, 0, 2) {
            e.terms.insert((1, 1), re(-4.0 * PI / (3.0 * 10f64.sqrt())));
        }
    }
    v.extend(amp);
    v.extend(triple_table());
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub monomial: String,
    pub lm: (u32, i32),
    pub paper_value: [f64; 2],
    pub computed_value: [f64; 2],
    pub source: String,
}

/// Absolute tolerance for matching a printed coefficient.
pub const TABLE_TOLERANCE: f64 = 1e-11;

/// Entries whose printed coefficient disagrees with the generated expansion.
pub fn discrepancy_report() -> Vec<Discrepancy> {
    let mut out = Vec::new();
    for e in reference_tables() {
        let computed = e.computed();
        let mut keys: Vec<(u32, i32)> = computed.keys().chain(e.terms.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        for lm in keys {
            let p = e.terms.get(&lm).copied().unwrap_or_default();
            let c = computed.get(&lm).copied().unwrap_or_default();
            if (p - c).norm() > TABLE_TOLERANCE {
                out.push(Discrepancy {
                    monomial: e.subject.to_string(),
                    lm,
                    paper_value: [p.re, p.im],
                    computed_value: [c.re, c.im],
                    source: e.source.to_string(),
                });
            }
        }
    }
    out
}

pub fn discrepancy_report_json(report: &[Discrepancy]) -> String {
    serde_json::to_string_pretty(report).expect("discrepancies serialize")
}

/// Largest pointwise deviation of the printed triple-product reductions at
/// the given angles.
pub fn triple_identity_residual(angles: &[(f64, f64)]) -> f64 {
    let mut worst: f64 = 0.0;
    for e in triple_table() {
        let TableSubject::Harmonics(f) = &e.subject else { continue };
        let printed = HarmonicExpansion { terms: e.terms.clone() };
        for &(t, p) in angles {
            let lhs: Complex64 = f.iter().map(|&(l, m)| ylm_unchecked(l, m, t, p)).product();
            worst = worst.max((lhs - printed.eval(t, p)).norm());
        }
    }
    worst
}
