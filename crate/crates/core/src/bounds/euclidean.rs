//! Bounds for squared Euclidean distances, where the quadratic form
//! `Σ Q(x) Q(x') d(x, x')` is concave on the simplex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{BoundPoint, Method};
use crate::distances::DistanceMatrix;
use crate::embedding::{check_negative_type, PSD_REL_TOL};
use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};
use crate::simplex::{entropy, Composition, StochasticMatrix};

const RATE_SLACK: f64 = 1e-9;

fn finite_profile(d: &DistanceMatrix) -> Result<Vec<f64>> {
    if !d.is_circularly_symmetric() {
        return Err(Error::WrongSymmetry);
    }
    d.profile()
        .into_iter()
        .map(|v| v.finite().ok_or(Error::InfiniteDistance("this bound")))
        .collect()
}

fn squared_euclidean_rows(d: &DistanceMatrix) -> Result<Vec<Vec<f64>>> {
    let rows = d
        .finite_rows()
        .ok_or_else(|| Error::WrongClass("distance has infinite entries".into()))?;
    if !check_negative_type(d, PSD_REL_TOL)?.passed {
        return Err(Error::WrongClass(
            "distance is not a squared Euclidean distance".into(),
        ));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerlekampResult {
    pub point: BoundPoint,
    /// Smallest average distance from 0 among distributions with `H(Q) ≥ ln K - R`.
    pub t: f64,
    /// Exponent of the minimizer `Q*(x) ∝ e^{-μ d(0,x)}`; infinite when `Q*` is degenerate.
    pub mu: ExtReal,
    pub q_star: Composition,
    pub d_uniform: f64,
    /// `|H(Q*) - (ln K - R)|`; zero when the entropy constraint is inactive.
    pub entropy_residual: f64,
    /// Relative spread of `Q*(x) e^{μ d(0,x)}` over `x`.
    pub exponential_residual: f64,
}

/// `δ*(R) ≤ t (2 - t/d(U))` for circularly symmetric distances.
pub fn berlekamp_bound(d: &DistanceMatrix, r: f64) -> Result<BerlekampResult> {
    let profile = finite_profile(d)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!("rate {r} is negative")));
    }
    let k = profile.len();
    let ln_k = (k as f64).ln();
    let target = ln_k - r;
    let d_uniform = profile.iter().sum::<f64>() / k as f64;
    let zeros: Vec<usize> = (0..k).filter(|&x| profile[x] == 0.0).collect();

    let (q, mu, active) = if target <= (zeros.len() as f64).ln() {
        let mut q = vec![0.0; k];
        zeros.iter().for_each(|&x| q[x] = 1.0 / zeros.len() as f64);
        (Composition::new(q)?, Infinity, false)
    } else if target >= ln_k {
        (Composition::uniform(k), Finite(0.0), true)
    } else {
        let h = |mu: f64| Composition::tilted(&profile, mu).entropy();
        let mut hi = 1.0 / d_uniform.max(f64::MIN_POSITIVE);
        while h(hi) > target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        let mu = if (h(lo) - target).abs() < (h(hi) - target).abs() {
            lo
        } else {
            hi
        };
        (Composition::tilted(&profile, mu), Finite(mu), true)
    };

    let t: f64 = q.as_slice().iter().zip(&profile).map(|(a, b)| a * b).sum();
    let delta = if d_uniform > 0.0 {
        t * (2.0 - t / d_uniform)
    } else {
        0.0
    };
    let entropy_residual = if active {
        (q.entropy() - target).abs()
    } else {
        0.0
    };
    let exponential_residual = match mu {
        Finite(m) => {
            let v: Vec<f64> = (0..k).map(|x| q[x] * (m * profile[x]).exp()).collect();
            let mean = v.iter().sum::<f64>() / k as f64;
            v.iter()
                .map(|a| (a - mean).abs() / mean)
                .fold(0.0, f64::max)
        }
        Infinity => 0.0,
    };
    let point = BoundPoint::new(
        r,
        Finite(delta.max(0.0)),
        Method::Berlekamp,
        json!({"t": t, "mu": mu, "q": q.as_slice()}),
    );
    Ok(BerlekampResult {
        point,
        t,
        mu,
        q_star: q,
        d_uniform,
        entropy_residual,
        exponential_residual,
    })
}

/// The distribution maximizing the quadratic form subject to average distance
/// `t` from 0; its quadratic form equals `t (2 - t/d(U))`.
pub fn berlekamp_capped_q(d: &DistanceMatrix, t: f64) -> Result<Composition> {
    let profile = finite_profile(d)?;
    let k = profile.len() as f64;
    let du = profile.iter().sum::<f64>() / k;
    if !(t >= 0.0 && t <= du) {
        return Err(Error::InvalidInput(format!("t = {t} outside [0, d(U)]")));
    }
    let rest = t / (k * du);
    let q = (0..profile.len())
        .map(|x| if x == 0 { rest + 1.0 - t / du } else { rest })
        .collect();
    Composition::new(q)
}

/// `δ*(R) ≤ Σ Q(x) Q(x') d(x, x')` whenever `R > ln K - H(Q)`.
pub fn piret_bound(d: &DistanceMatrix, q: &Composition, r: f64) -> Result<BoundPoint> {
    if !d.is_circularly_symmetric() {
        return Err(Error::WrongSymmetry);
    }
    let rows = squared_euclidean_rows(d)?;
    if q.len() != d.k() {
        return Err(Error::InvalidInput(
            "composition and alphabet sizes differ".into(),
        ));
    }
    let threshold = (d.k() as f64).ln() - q.entropy();
    if r < threshold - RATE_SLACK {
        return Err(Error::ConditionNotMet(format!(
            "rate {r} is not above ln K - H(Q) = {threshold}"
        )));
    }
    Ok(BoundPoint::new(
        r,
        Finite(q.quadratic_form(&rows).max(0.0)),
        Method::Piret,
        json!({"q": q.as_slice(), "threshold": threshold, "boundary": r <= threshold}),
    ))
}

fn conditional_form(rows: &[Vec<f64>], f: &Composition, v: &StochasticMatrix) -> f64 {
    v.rows()
        .iter()
        .zip(f.as_slice())
        .filter(|(_, fa)| **fa > 0.0)
        .map(|(va, fa)| fa * va.quadratic_form(rows))
        .sum()
}

/// `δ*(R, FV) ≤ Σ_a F(a) Σ V_a(x) V_a(x') d(x, x')` whenever `I(F, V) ≤ R`.
pub fn blahut_eval(
    d: &DistanceMatrix,
    f: &Composition,
    v: &StochasticMatrix,
    r: f64,
) -> Result<BoundPoint> {
    let rows = squared_euclidean_rows(d)?;
    if v.n_cols() != d.k() {
        return Err(Error::InvalidInput(
            "V rows do not match the alphabet".into(),
        ));
    }
    let info = v.mutual_information(f)?;
    if info > r + RATE_SLACK {
        return Err(Error::ConditionNotMet(format!(
            "I(F, V) = {info} exceeds the rate {r}"
        )));
    }
    let p = v.output(f)?;
    Ok(BoundPoint::new(
        r,
        Finite(conditional_form(&rows, f, v).max(0.0)),
        Method::Blahut,
        json!({
            "F": f.as_slice(),
            "V": v.rows().iter().map(Composition::as_slice).collect::<Vec<_>>(),
            "P": p.as_slice(),
            "I": info,
        }),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlahutOptions {
    pub seed: u64,
    /// Local moves per descent.
    pub iterations: usize,
    /// Grid size for the one-parameter seed families.
    pub family_points: usize,
}

impl Default for BlahutOptions {
    fn default() -> Self {
        BlahutOptions {
            seed: 0xb1a4,
            iterations: 3000,
            family_points: 24,
        }
    }
}

/// A joint distribution `J(a, x)` with `x`-marginal `P`.
#[derive(Debug, Clone)]
struct Joint {
    j: Vec<Vec<f64>>,
}

impl Joint {
    fn split(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let f: Vec<f64> = self.j.iter().map(|r| r.iter().sum()).collect();
        let v = self
            .j
            .iter()
            .zip(&f)
            .map(|(r, fa)| {
                if *fa > 0.0 {
                    r.iter().map(|v| v / fa).collect()
                } else {
                    vec![1.0 / r.len() as f64; r.len()]
                }
            })
            .collect();
        (f, v)
    }

    fn information(&self, p: &[f64]) -> f64 {
        let (f, v) = self.split();
        let cond: f64 = f.iter().zip(&v).map(|(fa, va)| fa * entropy(va)).sum();
        (entropy(p) - cond).max(0.0)
    }

    fn form(&self, rows: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for r in &self.j {
            let fa: f64 = r.iter().sum();
            if fa <= 0.0 {
                continue;
            }
            let mut q = 0.0;
            for (x, jx) in r.iter().enumerate() {
                if *jx == 0.0 {
                    continue;
                }
                for (y, jy) in r.iter().enumerate() {
                    q += jx * jy * rows[x][y];
                }
            }
            s += q / fa;
        }
        s
    }

    fn to_fv(&self) -> Result<(Composition, StochasticMatrix)> {
        let (f, v) = self.split();
        let fs: f64 = f.iter().sum();
        let f = Composition::new(f.iter().map(|a| a / fs).collect())?;
        let v = StochasticMatrix::new(
            v.into_iter()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    r.into_iter().map(|a| a / s).collect()
                })
                .collect(),
        )?;
        Ok((f, v))
    }
}

fn mixing_joint(p: &[f64], theta: f64) -> Joint {
    let k = p.len();
    Joint {
        j: (0..k)
            .map(|a| {
                (0..k)
                    .map(|x| p[a] * (theta * p[x] + if a == x { 1.0 - theta } else { 0.0 }))
                    .collect()
            })
            .collect(),
    }
}

fn circulant_joint(q: &[f64]) -> Joint {
    let k = q.len();
    Joint {
        j: (0..k)
            .map(|a| (0..k).map(|x| q[(x + k - a) % k] / k as f64).collect())
            .collect(),
    }
}

/// Heuristic minimization of the conditional quadratic form over `(F, V)`
/// with `FV = P` and `I(F, V) ≤ R`.
///
/// Seeds: the single-row choice `V = P`, the mixing family
/// `V_x = (1-θ) e_x + θ P`, and, for circularly symmetric distances with
/// uniform `P`, circulant rows drawn from the exponential family of the
/// distance profile. The best seed is then improved by random mass
/// transfers that preserve the `x`-marginal.
pub fn blahut_search(
    d: &DistanceMatrix,
    p: &Composition,
    r: f64,
    opts: &BlahutOptions,
) -> Result<BoundPoint> {
    let rows = squared_euclidean_rows(d)?;
    let k = d.k();
    if p.len() != k {
        return Err(Error::InvalidInput(
            "composition and alphabet sizes differ".into(),
        ));
    }
    let ps = p.as_slice();
    let feasible = |j: &Joint| j.information(ps) <= r + 1e-12;

    let mut seeds: Vec<(Joint, &'static str)> = Vec::new();
    let mut single = vec![vec![0.0; k]; k];
    single[0] = ps.to_vec();
    seeds.push((Joint { j: single }, "single"));

    // Smallest θ in the mixing family meeting the rate constraint.
    if mixing_joint(ps, 0.0).information(ps) <= r {
        seeds.push((mixing_joint(ps, 0.0), "mixing"));
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mixing_joint(ps, mid).information(ps) <= r {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        seeds.push((mixing_joint(ps, hi), "mixing"));
    }

    let uniform = ps.iter().all(|v| (v - 1.0 / k as f64).abs() < 1e-12);
    if d.is_circularly_symmetric() && uniform {
        let profile: Vec<f64> = rows[0].clone();
        if let Ok(b) = berlekamp_bound(d, r) {
            seeds.push((circulant_joint(b.q_star.as_slice()), "circulant_berlekamp"));
        }
        let n = opts.family_points.max(2);
        let scale = profile
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for i in 0..n {
            let mu = (i as f64 / (n - 1) as f64 * 8.0).exp2() / scale - 1.0 / scale;
            let q = Composition::tilted(&profile, mu);
            let j = circulant_joint(q.as_slice());
            if feasible(&j) {
                seeds.push((j, "circulant_exponential"));
            }
        }
    }

    let (mut best, mut label) = seeds
        .into_iter()
        .filter(|(j, _)| feasible(j))
        .min_by(|a, b| a.0.form(&rows).total_cmp(&b.0.form(&rows)))
        .expect("the single-row seed is always feasible");
    let mut best_val = best.form(&rows);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut step = 0.5;
    let mut improved = false;
    for it in 0..opts.iterations {
        let x = rng.random_range(0..k);
        if ps[x] == 0.0 {
            continue;
        }
        let a = rng.random_range(0..k);
        let b = rng.random_range(0..k);
        if a == b || best.j[a][x] <= 0.0 {
            continue;
        }
        let amount = best.j[a][x] * step * rng.random_range(0.0..1.0);
        let mut cand = best.clone();
        cand.j[a][x] -= amount;
        cand.j[b][x] += amount;
        if feasible(&cand) {
            let v = cand.form(&rows);
            if v < best_val - 1e-15 {
                best = cand;
                best_val = v;
                improved = true;
                continue;
            }
        }
        if it % 200 == 199 {
            step = (step * 0.7).max(1e-4);
        }
    }
    if improved {
        label = "local_descent";
    }

    let (f, v) = best.to_fv()?;
    let mut point = blahut_eval(d, &f, &v, r.max(v.mutual_information(&f)?))?;
    point.r = r;
    if let Some(obj) = point.params.as_object_mut() {
        obj.insert("search".into(), json!(label));
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{build_hamming, build_lee, build_qpsk};
    use crate::simplex::binary_entropy;
    use std::f64::consts::LN_2;

    #[test]
    fn berlekamp_binary_zero_rate() {
        let b = berlekamp_bound(&build_hamming(2).unwrap(), 0.0).unwrap();
        assert!((b.t - 0.5).abs() < 1e-15);
        assert!((b.point.delta.to_f64() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn berlekamp_full_rate() {
        let b = berlekamp_bound(&build_hamming(3).unwrap(), 3f64.ln()).unwrap();
        assert_eq!(b.t, 0.0);
        assert_eq!(b.point.delta, Finite(0.0));
    }

    #[test]
    fn berlekamp_lee_kkt() {
        let d = build_lee(5).unwrap();
        let b = berlekamp_bound(&d, 0.5).unwrap();
        assert!(b.entropy_residual <= 1e-8);
        assert!(b.exponential_residual <= 1e-8);
        // Grid search over symmetric distributions (the optimum is symmetric).
        let prof = [0.0, 1.0, 2.0, 2.0, 1.0];
        let mut best = f64::INFINITY;
        let n = 400;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let q0 = i as f64 / n as f64;
                let q1 = j as f64 / n as f64 / 2.0;
                let q2 = (1.0 - q0 - 2.0 * q1) / 2.0;
                if q2 < 0.0 {
                    continue;
                }
                let q = [q0, q1, q2, q2, q1];
                if entropy(&q) + 0.5 >= 5f64.ln() {
                    best = best.min(q.iter().zip(&prof).map(|(a, b)| a * b).sum());
                }
            }
        }
        assert!(b.t <= best + 1e-9);
        assert!(best - b.t < 5e-3);
    }

    #[test]
    fn berlekamp_needs_circular() {
        let d = DistanceMatrix::from_finite(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ])
        .unwrap();
        assert_eq!(berlekamp_bound(&d, 0.1).unwrap_err(), Error::WrongSymmetry);
    }

    #[test]
    fn capped_q_reproduces_berlekamp() {
        for d in [
            build_hamming(4).unwrap(),
            build_lee(5).unwrap(),
            build_qpsk(),
        ] {
            for r in [0.1, 0.4, 0.8] {
                let b = berlekamp_bound(&d, r).unwrap();
                let q = berlekamp_capped_q(&d, b.t).unwrap();
                let rows = d.finite_rows().unwrap();
                assert!((q.quadratic_form(&rows) - b.point.delta.to_f64()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn piret_examples() {
        let d = build_qpsk();
        let p = piret_bound(&d, &Composition::uniform(4), 4f64.ln()).unwrap();
        assert!((p.delta.to_f64() - 2.0).abs() < 1e-12);
        let pm = piret_bound(&d, &Composition::point_mass(4, 0), 4f64.ln() + 0.01).unwrap();
        assert_eq!(pm.delta, Finite(0.0));
        assert!(matches!(
            piret_bound(&d, &Composition::point_mass(4, 0), 1.0),
            Err(Error::ConditionNotMet(_))
        ));
        let pent = crate::distances::build_pentagon();
        assert!(matches!(
            piret_bound(&pent, &Composition::uniform(5), 2.0),
            Err(Error::WrongClass(_))
        ));
    }

    #[test]
    fn blahut_eval_examples() {
        let d = build_hamming(2).unwrap();
        let lambda = 0.2;
        let pt = blahut_eval(
            &d,
            &Composition::uniform(2),
            &StochasticMatrix::binary_flip(lambda),
            1.0,
        )
        .unwrap();
        assert!((pt.delta.to_f64() - 2.0 * lambda * (1.0 - lambda)).abs() < 1e-15);
        let i = pt.params["I"].as_f64().unwrap();
        assert!((i - (LN_2 - binary_entropy(lambda))).abs() < 1e-14);
        let det = blahut_eval(
            &d,
            &Composition::uniform(2),
            &StochasticMatrix::identity(2),
            LN_2,
        )
        .unwrap();
        assert_eq!(det.delta, Finite(0.0));
        let p = Composition::new(vec![0.3, 0.7]).unwrap();
        let single = StochasticMatrix::from_rows(vec![p.clone()]).unwrap();
        let s = blahut_eval(&d, &Composition::uniform(1), &single, 0.0).unwrap();
        assert!((s.delta.to_f64() - 2.0 * 0.3 * 0.7).abs() < 1e-15);
        assert!(blahut_eval(
            &d,
            &Composition::uniform(2),
            &StochasticMatrix::identity(2),
            0.1
        )
        .is_err());
    }

    #[test]
    fn blahut_search_beats_elias_and_uniform() {
        let d = build_hamming(2).unwrap();
        for lambda in [0.05, 0.2, 0.35] {
            let r = LN_2 - binary_entropy(lambda);
            let pt =
                blahut_search(&d, &Composition::uniform(2), r, &BlahutOptions::default()).unwrap();
            assert!(pt.delta.to_f64() <= 2.0 * lambda * (1.0 - lambda) + 1e-9);
        }
        let q = build_qpsk();
        let pt = blahut_search(
            &q,
            &Composition::uniform(4),
            4f64.ln(),
            &BlahutOptions::default(),
        )
        .unwrap();
        assert!(pt.delta.to_f64() <= 2.0 + 1e-12);
        let full = blahut_search(
            &q,
            &Composition::uniform(4),
            4f64.ln() + 0.1,
            &BlahutOptions::default(),
        )
        .unwrap();
        assert!(full.delta.to_f64() < 1e-9);
    }
}
