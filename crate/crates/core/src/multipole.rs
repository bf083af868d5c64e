//! Quadrupole and octopole moment tensors of a knot.
//!
//! Indices run over `0..3` for `x, y, z` (equivalently `R_1, R_2, R_3`). No
//! implicit summation is used anywhere; every sum is written out.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::curves::{sample_curve, CurvePoint, KnotSpec};
use crate::error::Result;
use crate::vec3::Vec3;
use crate::DEFAULT_CURVE_SAMPLES;

pub type Tensor3 = [[[f64; 3]; 3]; 3];
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

/// Levi-Civita symbol.
#[inline]
pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[inline]
fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrupoleMoments {
    /// `(K^1, K^2, K^3)`
    #[serde(rename = "K")]
    pub k: Vec3,
    /// `Q[i][j][k]`, symmetric in `(j, k)`.
    #[serde(rename = "Q")]
    pub q_tensor: Tensor3,
    /// `Q^{r_i} = -2 K^i`
    #[serde(rename = "Q_trace")]
    pub q_trace: Vec3,
}

impl QuadrupoleMoments {
    /// Assemble the tensor from the three scalars `K^i`.
    pub fn from_k(k: Vec3) -> Self {
        let mut q_tensor = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    if i != j && j != l && i != l {
                        continue;
                    }
                    q_tensor[i][j][l] = delta(j, l) * k[i] * (1.0 - delta(i, j))
                        - delta(i, l) * k[j] * (1.0 - delta(i, j))
                        - delta(i, j) * k[l] * (1.0 - delta(i, l));
                }
            }
        }
        let q_trace = [-2.0 * k[0], -2.0 * k[1], -2.0 * k[2]];
        QuadrupoleMoments { k, q_tensor, q_trace }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_k([s * self.k[0], s * self.k[1], s * self.k[2]])
    }
}

/// Curve-integrated octopole tensor.
///
/// `o_tensor[i][j][k][l]` is the coefficient of `R_j R_k R_l` in the sum over
/// `j <= k <= l`, copied to every permutation of the lower indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctopoleMoments {
    #[serde(rename = "O")]
    pub o_tensor: Tensor4,
    /// `O_contracted[i][p]`
    #[serde(rename = "O_contracted")]
    pub o_contracted: [[f64; 3]; 3],
}

impl OctopoleMoments {
    /// Symmetric completion from the independent components `(i; j<=k<=l)`.
    pub fn from_independent(independent: &BTreeMap<(usize, [usize; 3]), f64>) -> Self {
        let mut o = [[[[0.0; 3]; 3]; 3]; 3];
        for (&(i, jkl), &v) in independent {
            for [a, b, c] in permutations(jkl) {
                o[i][a][b][c] = v;
            }
        }
        let mut oc = [[0.0; 3]; 3];
        for i in 0..3 {
            for p in 0..3 {
                let mut s = 0.0;
                for m in 0..3 {
                    s += (1.0 + 2.0 * delta(p, m)) * o[i][p][m][m];
                }
                oc[i][p] = s;
            }
        }
        OctopoleMoments {
            o_tensor: o,
            o_contracted: oc,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in out.o_tensor.iter_mut().flatten().flatten().flatten() {
            *v *= s;
        }
        for v in out.o_contracted.iter_mut().flatten() {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..3 {
            for p in 0..3 {
                out.o_contracted[i][p] += other.o_contracted[i][p];
                for k in 0..3 {
                    for l in 0..3 {
                        out.o_tensor[i][p][k][l] += other.o_tensor[i][p][k][l];
                    }
                }
            }
        }
        out
    }
}

/// All orderings of three indices (with repeats when indices coincide).
pub(crate) fn permutations([a, b, c]: [usize; 3]) -> [[usize; 3]; 6] {
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

/// Independent index triples `j <= k <= l`, in lexicographic order.
pub fn sorted_triples() -> Vec<[usize; 3]> {
    let mut v = Vec::with_capacity(10);
    for j in 0..3 {
        for k in j..3 {
            for l in k..3 {
                v.push([j, k, l]);
            }
        }
    }
    v
}

/// Pointwise octopole integrand for one independent component, dispatched on
/// the index coincidence pattern of the sorted triple `(j, k, l)`.
pub fn octopole_integrand(i: usize, [j, k, l]: [usize; 3], c: &CurvePoint) -> f64 {
    debug_assert!(j <= k && k <= l);
    let r = &c.position;
    let dr = &c.derivative;
    let eps = levi_civita;
    let (djk, dkl) = (delta(j, k), delta(k, l));

    if j == k && k == l {
        let mut s = 0.0;
        for m in 0..3 {
            s += eps(j, i, m) * r[j] * r[j] * dr[m];
        }
        return s;
    }
    if j != k && k != l && j != l {
        let mut s = 0.0;
        for m in 0..3 {
            for n in 0..3 {
                s += 2.0 * eps(i, m, n) * r[i] * r[m] * dr[m];
            }
        }
        return s;
    }
    // exactly two indices equal; k is always part of the pair
    if i != j && i != k && i != l {
        return djk * (eps(k, l, i) * r[k] * r[k] * dr[k] - 2.0 * eps(i, k, l) * r[k] * r[l] * dr[l])
            + dkl * (2.0 * eps(i, j, l) * r[j] * r[l] * dr[j] - eps(j, k, i) * r[k] * r[k] * dr[k]);
    }
    if (i == j && dkl == 1.0) || (i == l && djk == 1.0) {
        let mut s = 0.0;
        for m in 0..3 {
            s += 2.0
                * (delta(i, l) * eps(j, l, m) * r[j] * r[l] * dr[m]
                    - delta(i, j) * eps(i, k, m) * r[i] * r[k] * dr[m]);
        }
        return s;
    }
    debug_assert_eq!(i, k);
    let mut s = 0.0;
    for m in 0..3 {
        s += r[k] * r[k] * (dkl * eps(j, k, m) * dr[m] - djk * eps(j, l, m) * dr[m]);
    }
    s
}

fn integrate(samples: &[CurvePoint], f: impl Fn(&CurvePoint) -> f64) -> f64 {
    let h = 2.0 * std::f64::consts::PI / samples.len() as f64;
    samples.iter().map(f).sum::<f64>() * h
}

/// `(K^1, K^2, K^3)` from the three defining line integrals.
fn k_scalars(samples: &[CurvePoint]) -> Vec3 {
    [
        integrate(samples, |c| c.position[2] * c.derivative[1]),
        integrate(samples, |c| c.position[0] * c.derivative[2]),
        integrate(samples, |c| c.position[1] * c.derivative[0]),
    ]
}

fn octopole_from_samples(samples: &[CurvePoint]) -> OctopoleMoments {
    let mut ind = BTreeMap::new();
    for i in 0..3 {
        for t in sorted_triples() {
            ind.insert((i, t), integrate(samples, |c| octopole_integrand(i, t, c)));
        }
    }
    OctopoleMoments::from_independent(&ind)
}

pub fn quadrupole_moments_with(spec: &KnotSpec, n_samples: usize) -> Result<QuadrupoleMoments> {
    Ok(QuadrupoleMoments::from_k(k_scalars(&sample_curve(spec, n_samples)?)))
}

pub fn octopole_moments_with(spec: &KnotSpec, n_samples: usize) -> Result<OctopoleMoments> {
    Ok(octopole_from_samples(&sample_curve(spec, n_samples)?))
}

pub fn quadrupole_moments(spec: &KnotSpec) -> QuadrupoleMoments {
    moment_set(spec).quadrupole.clone()
}

pub fn octopole_moments(spec: &KnotSpec) -> OctopoleMoments {
    moment_set(spec).octopole.clone()
}

/// Total dipole moment `∮ dr'/dτ dτ` (zero for any closed curve).
pub fn dipole_moment(spec: &KnotSpec) -> Vec3 {
    let s = sample_curve(spec, DEFAULT_CURVE_SAMPLES).expect("default sample count is valid");
    [
        integrate(&s, |c| c.derivative[0]),
        integrate(&s, |c| c.derivative[1]),
        integrate(&s, |c| c.derivative[2]),
    ]
}

/// Quadrupole and octopole moments of one knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    #[serde(flatten)]
    pub quadrupole: QuadrupoleMoments,
    #[serde(flatten)]
    pub octopole: OctopoleMoments,
}

impl MomentSet {
    pub fn compute(spec: &KnotSpec, n_samples: usize) -> Result<Self> {
        let s = sample_curve(spec, n_samples)?;
        Ok(MomentSet {
            quadrupole: QuadrupoleMoments::from_k(k_scalars(&s)),
            octopole: octopole_from_samples(&s),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("moment set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Componentwise `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &MomentSet, b: f64) -> MomentSet {
        let k = [
            a * self.quadrupole.k[0] + b * other.quadrupole.k[0],
            a * self.quadrupole.k[1] + b * other.quadrupole.k[1],
            a * self.quadrupole.k[2] + b * other.quadrupole.k[2],
        ];
        MomentSet {
            quadrupole: QuadrupoleMoments::from_k(k),
            octopole: self.octopole.scaled(a).add(&other.octopole.scaled(b)),
        }
    }
}

/// Moments at the default resolution, memoized for preset knots.
pub fn moment_set(spec: &KnotSpec) -> Arc<MomentSet> {
    static CACHE: OnceLock<Mutex<BTreeMap<String, Arc<MomentSet>>>> = OnceLock::new();
    let compute = || {
        Arc::new(MomentSet::compute(spec, DEFAULT_CURVE_SAMPLES).expect("default sample count is valid"))
    };
    if let KnotSpec::Sampled(_) = spec {
        return compute();
    }
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let key = spec.label();
    if let Some(m) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return m.clone();
    }
    let m = compute();
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .entry(key)
        .or_insert(m)
        .clone()
}

/// Oracle: `F[i][a][b][c] = ∫ (dr' × e_a)_i r_b r_c dτ`, straight from the
/// cross-product form of the integrand.
pub fn cross_product_tensor(spec: &KnotSpec, n_samples: usize) -> Result<Tensor4> {
    let s = sample_curve(spec, n_samples)?;
    let mut f = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                for c in b..3 {
                    let v = integrate(&s, |p| {
                        let mut e = [0.0; 3];
                        e[a] = 1.0;
                        crate::vec3::cross(p.derivative, e)[i] * p.position[b] * p.position[c]
                    });
                    f[i][a][b][c] = v;
                    f[i][a][c][b] = v;
                }
            }
        }
    }
    Ok(f)
}

/// Oracle octopole: coefficient of `R_j R_k R_l` in `Σ_{a,b,c} F[i][a][b][c] R_a R_b R_c`.
pub fn octopole_from_cross_product(f: &Tensor4) -> OctopoleMoments {
    let mut ind = BTreeMap::new();
    for i in 0..3 {
        for t in sorted_triples() {
            let mut seen: Vec<[usize; 3]> = permutations(t).to_vec();
            seen.sort();
            seen.dedup();
            let v = seen.iter().map(|&[a, b, c]| f[i][a][b][c]).sum();
            ind.insert((i, t), v);
        }
    }
    OctopoleMoments::from_independent(&ind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::SampledCurve;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn torus_quadrupole_values() {
        for (p, q) in [(2u32, 3u32), (3, 2), (5, 7), (1, 2)] {
            let qm = quadrupole_moments(&KnotSpec::torus(p, q).unwrap());
            let pf = p as f64;
            assert!(qm.k[0].abs() < 1e-10 && qm.k[1].abs() < 1e-10);
            assert!(close(qm.k[2], -9.0 * pf * PI / 2.0, 1e-12));
            assert!(close(qm.q_tensor[0][0][2], 9.0 * pf * PI / 2.0, 1e-12));
            assert!(close(qm.q_tensor[1][1][2], 9.0 * pf * PI / 2.0, 1e-12));
            assert!(close(qm.q_tensor[2][0][0], -9.0 * pf * PI / 2.0, 1e-12));
            assert!(close(qm.q_tensor[2][1][1], -9.0 * pf * PI / 2.0, 1e-12));
            // trace relation; the sign is fixed by Q = -2K
            assert!(close(qm.q_trace[2], 9.0 * pf * PI, 1e-12));
        }
    }

    #[test]
    fn single_meridian_winding_breaks_planar_k() {
        // with q = 1 the x dz term no longer averages out
        for p in [1u32, 2] {
            let qm = quadrupole_moments(&KnotSpec::torus(p, 1).unwrap());
            assert!(close(qm.k[1], -2.0 * PI / (p * p) as f64, 1e-12), "{p}: {:?}", qm.k);
        }
    }

    #[test]
    fn q_tensor_structure() {
        let qm = QuadrupoleMoments::from_k([1.3, -0.4, 2.2]);
        for i in 0..3 {
            let mut tr = 0.0;
            for j in 0..3 {
                tr += qm.q_tensor[i][j][j];
                for k in 0..3 {
                    assert_eq!(qm.q_tensor[i][j][k], qm.q_tensor[i][k][j]);
                    if i != j && j != k && i != k {
                        assert_eq!(qm.q_tensor[i][j][k], 0.0);
                    }
                }
            }
            assert!((qm.q_trace[i] + tr).abs() < 1e-14);
        }
    }

    #[test]
    fn unknot_quadrupoles() {
        let qm = quadrupole_moments(&KnotSpec::UnknotXY);
        assert!(close(qm.k[2], -9.0 * PI, 1e-12));
        assert!(close(qm.q_tensor[0][0][2], 9.0 * PI, 1e-12));
        assert!(close(qm.q_trace[2], 18.0 * PI, 1e-12));
        assert!(qm.k[0].abs() < 1e-12 && qm.k[1].abs() < 1e-12);
    }

    #[test]
    fn torus_octopole_values() {
        for (p, q) in [(2u32, 3u32), (3, 4), (5, 7)] {
            let o = octopole_moments(&KnotSpec::torus(p, q).unwrap());
            let qf = q as f64;
            let t = &o.o_tensor;
            assert!(close(t[0][1][1][1], 2.0 * qf * PI, 1e-10), "({p},{q})");
            assert!(close(t[0][0][0][1], 2.0 * qf * PI, 1e-10));
            assert!(close(t[0][1][2][2], 2.0 * qf * PI, 1e-10));
            assert!(close(o.o_contracted[0][1], 10.0 * qf * PI, 1e-10));
            assert!(close(t[1][0][0][0], -2.0 * qf * PI, 1e-10));
            assert!(t[2][0][1][2].abs() < 1e-9);
        }
    }

    #[test]
    fn unknot_octopole_values() {
        let o = octopole_moments(&KnotSpec::UnknotXZ);
        assert!(close(o.o_tensor[0][0][0][1], -4.0 * PI, 1e-12));
        assert!(close(o.o_tensor[1][0][0][0], 4.0 * PI, 1e-12));
        assert!(close(o.o_contracted[1][0], 16.0 * PI, 1e-12));
        assert!(close(o.o_tensor[2][0][1][2], -4.0 * PI, 1e-12));
        let o = octopole_moments(&KnotSpec::UnknotYZ);
        assert!(close(o.o_tensor[0][1][1][1], -4.0 * PI, 1e-12));
        assert!(close(o.o_contracted[0][1], -16.0 * PI, 1e-12));
        assert!(close(o.o_tensor[2][0][1][2], 4.0 * PI, 1e-12));
    }

    #[test]
    fn symmetric_completion_and_contraction() {
        let o = octopole_moments(&KnotSpec::torus(2, 5).unwrap());
        for i in 0..3 {
            for t in sorted_triples() {
                for [a, b, c] in permutations(t) {
                    assert_eq!(o.o_tensor[i][a][b][c], o.o_tensor[i][t[0]][t[1]][t[2]]);
                }
            }
            for p in 0..3 {
                let s: f64 = (0..3).map(|m| (1.0 + 2.0 * delta(p, m)) * o.o_tensor[i][p][m][m]).sum();
                assert_eq!(o.o_contracted[i][p], s);
            }
        }
    }

    #[test]
    fn dipole_vanishes() {
        for spec in [KnotSpec::torus(2, 3).unwrap(), KnotSpec::UnknotXY] {
            let d = dipole_moment(&spec);
            assert!(d.iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn torus_relations_with_unknots() {
        let xy = moment_set(&KnotSpec::UnknotXY);
        let xz = moment_set(&KnotSpec::UnknotXZ);
        let yz = moment_set(&KnotSpec::UnknotYZ);
        for (p, q) in [(2u32, 3u32), (3, 4), (5, 7), (7, 4)] {
            let m = moment_set(&KnotSpec::torus(p, q).unwrap());
            let qexp = xy.quadrupole.scaled(p as f64 / 2.0);
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        assert!(close(m.quadrupole.q_tensor[i][j][k], qexp.q_tensor[i][j][k], 1e-10));
                    }
                }
            }
            let oexp = xz.octopole.add(&yz.octopole).scaled(-(q as f64) / 2.0);
            for i in 0..3 {
                for t in sorted_triples() {
                    let (a, b) = (m.octopole.o_tensor[i][t[0]][t[1]][t[2]], oexp.o_tensor[i][t[0]][t[1]][t[2]]);
                    assert!(close(a, b, 1e-10), "({p},{q}) i={i} {t:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let m = moment_set(&KnotSpec::torus(2, 3).unwrap());
        let text = m.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["K", "Q", "Q_trace", "O", "O_contracted"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(&MomentSet::from_json(&text).unwrap(), m.as_ref());
    }

    fn wobbly_curve(seed: u64) -> KnotSpec {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coef: Vec<[f64; 6]> = (0..4).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
        let pts = (0..96)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 96.0;
                let mut p = [0.0; 3];
                for (h, c) in coef.iter().enumerate() {
                    let (s, co) = ((h + 1) as f64 * t).sin_cos();
                    for ax in 0..3 {
                        p[ax] += c[2 * ax] * co + c[2 * ax + 1] * s;
                    }
                }
                p
            })
            .collect();
        KnotSpec::Sampled(SampledCurve::new(pts).unwrap())
    }

    #[test]
    fn case_table_matches_cross_product_oracle() {
        for seed in 0..5 {
            let spec = wobbly_curve(seed);
            let table = octopole_moments_with(&spec, 256).unwrap();
            let oracle = octopole_from_cross_product(&cross_product_tensor(&spec, 256).unwrap());
            for i in 0..3 {
                for t in sorted_triples() {
                    let (a, b) = (table.o_tensor[i][t[0]][t[1]][t[2]], oracle.o_tensor[i][t[0]][t[1]][t[2]]);
                    assert!((a - b).abs() < 1e-9, "seed {seed} i={i} {t:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn scaling_of_moments() {
        let spec = wobbly_curve(11);
        let KnotSpec::Sampled(c) = &spec else { unreachable!() };
        let s = 1.7;
        let scaled = KnotSpec::sampled(c.points().iter().map(|p| crate::vec3::scale(*p, s)).collect()).unwrap();
        let a = MomentSet::compute(&spec, 256).unwrap();
        let b = MomentSet::compute(&scaled, 256).unwrap();
        for i in 0..3 {
            assert!(close(b.quadrupole.k[i], s * s * a.quadrupole.k[i], 1e-10));
            for p in 0..3 {
                assert!(close(b.octopole.o_contracted[i][p], s.powi(3) * a.octopole.o_contracted[i][p], 1e-10));
            }
        }
    }
}
