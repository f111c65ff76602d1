//! Generalized theta functions of a distance.
//!
//! A representation of degree `ρ` is a set of unit vectors `u_x` with
//! `|⟨u_x, u_x'⟩| ≤ e^{-d(x,x')/ρ}` together with a unit handle `f`. Its
//! cost for symbol `x` is `-ln ⟨u_x, f⟩²`. The max-type theta minimizes the
//! largest cost, the weighted one minimizes the average under `P`, and the
//! conditional one averages weighted thetas over an auxiliary variable.
//! At `ρ = ∞` only orthogonality on infinite-distance pairs remains, which
//! gives the logarithm of the classical Lovász theta.

mod analytic;
mod barrier;

pub use analytic::{binary_theta_analytic, binary_theta_analytic_with, spherical_bound};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::distances::{DistanceMatrix, WeightedGraph};
use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};
use crate::simplex::{Composition, StochasticMatrix};
use barrier::{Objective, Outcome, Pair, PairKind, Problem};

/// Values above this are reported as infinite.
pub const INFINITE_VALUE: f64 = 1e6;
/// Tolerance of the feasibility certificate on returned Gram matrices.
pub const CERTIFICATE_TOL: f64 = 1e-8;
/// Similarity caps below this are treated as exact orthogonality.
const ZERO_CAP: f64 = 1e-10;
const WEIGHT_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub starts: usize,
    pub seed: u64,
    /// Cap on the total number of Newton steps per start.
    pub max_iter: usize,
    pub gap_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            starts: 8,
            seed: 0x7e7a,
            max_iter: 50_000,
            gap_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    Infeasible,
}

/// Gram matrix of `(f, u_1, ..., u_K)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representation {
    pub gram: Vec<Vec<f64>>,
    pub rho: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaResult {
    pub value: ExtReal,
    pub representation: Representation,
    pub per_symbol_cost: Vec<ExtReal>,
    pub solver_status: SolverStatus,
    pub iterations: usize,
}

impl ThetaResult {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("theta result serializes")
    }
}

fn check_rho(rho: ExtReal) -> Result<()> {
    match rho {
        Finite(r) if r > 0.0 && r.is_finite() => Ok(()),
        Infinity => Ok(()),
        other => Err(Error::InvalidInput(format!(
            "ρ must be positive, got {other}"
        ))),
    }
}

/// `e^{-d/ρ}`, or the `ρ = ∞` pattern.
fn cap(d: ExtReal, rho: ExtReal) -> f64 {
    d.exp_neg_scaled(rho.finite())
}

fn clamp_value(v: f64) -> ExtReal {
    if v.is_finite() && v <= INFINITE_VALUE {
        Finite(v.max(0.0))
    } else {
        Infinity
    }
}

/// Builds the program over the symbols in `support` (matrix indices follow that order).
fn build_problem(
    d: &DistanceMatrix,
    rho: ExtReal,
    support: &[usize],
    objective: Objective,
) -> Problem {
    let mut pairs = Vec::new();
    for (a, &x) in support.iter().enumerate() {
        for (b, &y) in support.iter().enumerate().skip(a + 1) {
            let c = cap(d.get(x, y), rho);
            let kind = if c < ZERO_CAP {
                continue;
            } else if c >= 1.0 {
                PairKind::Free
            } else {
                PairKind::Boxed(c)
            };
            pairs.push(Pair {
                i: a + 1,
                j: b + 1,
                kind,
            });
        }
    }
    Problem {
        k: support.len(),
        pairs,
        objective,
    }
}

/// Embeds a solution on `support` into the full `(K+1)×(K+1)` Gram matrix.
/// Symbols outside the support get vectors orthogonal to everything else.
fn expand(k: usize, support: &[usize], sub: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let mut full = vec![vec![0.0; k + 1]; k + 1];
    for (i, row) in full.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let idx: Vec<usize> = std::iter::once(0)
        .chain(support.iter().map(|x| x + 1))
        .collect();
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            full[i][j] = sub[(a, b)];
        }
    }
    full
}

/// Checks unit diagonal, symmetry, sign-normalized handle entries, the
/// similarity caps and positive semidefiniteness, all to [`CERTIFICATE_TOL`].
pub fn certify(d: &DistanceMatrix, rho: ExtReal, gram: &[Vec<f64>]) -> bool {
    let k = d.k();
    if gram.len() != k + 1 || gram.iter().any(|r| r.len() != k + 1) {
        return false;
    }
    for i in 0..=k {
        if (gram[i][i] - 1.0).abs() > CERTIFICATE_TOL {
            return false;
        }
        for j in 0..=k {
            if (gram[i][j] - gram[j][i]).abs() > CERTIFICATE_TOL {
                return false;
            }
        }
    }
    for x in 1..=k {
        if gram[0][x] < -CERTIFICATE_TOL {
            return false;
        }
        for y in (x + 1)..=k {
            if gram[x][y].abs() > cap(d.get(x - 1, y - 1), rho) + CERTIFICATE_TOL {
                return false;
            }
        }
    }
    let m = DMatrix::from_fn(k + 1, k + 1, |i, j| gram[i][j]);
    let min = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    min >= -CERTIFICATE_TOL
}

fn per_symbol_cost(gram: &[Vec<f64>]) -> Vec<ExtReal> {
    gram[0][1..]
        .iter()
        .map(|&h| ExtReal::neg_ln(h.max(0.0) * h.max(0.0)))
        .collect()
}

/// Solves on `support` with the given weights (`None` for the max-type objective).
fn solve_on(
    d: &DistanceMatrix,
    rho: ExtReal,
    support: &[usize],
    weights: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<ThetaResult> {
    check_rho(rho)?;
    if opts.starts == 0 {
        return Err(Error::InvalidInput("at least one start is needed".into()));
    }
    let k = d.k();
    let objective = match weights {
        None => Objective::Max,
        Some(w) => Objective::Weighted(support.iter().map(|&x| w[x]).collect()),
    };
    let problem = build_problem(d, rho, support, objective);
    let unconstrained = problem.pairs.iter().all(|p| p.kind == PairKind::Free)
        && problem.pairs.len() == support.len() * (support.len().saturating_sub(1)) / 2;

    let (sub, iterations, converged) = if unconstrained {
        // Every vector may coincide with the handle.
        let n = support.len() + 1;
        (DMatrix::from_element(n, n, 1.0), 0, true)
    } else {
        let runs: Vec<_> = (0..opts.starts)
            .into_par_iter()
            .map(|s| problem.solve_from(s, opts.seed, opts.max_iter, opts.gap_tol))
            .collect();
        let mut best = 0;
        for (i, r) in runs.iter().enumerate() {
            if r.value < runs[best].value {
                best = i;
            }
        }
        let total: usize = runs.iter().map(|r| r.iterations).sum();
        let r = &runs[best];
        (r.gram.clone(), total, r.outcome == Outcome::Converged)
    };

    let gram = expand(k, support, &sub);
    let costs = per_symbol_cost(&gram);
    let raw = match weights {
        None => costs.iter().fold(ExtReal::ZERO, |m, c| m.max(*c)),
        Some(w) => support.iter().map(|&x| costs[x].scale(w[x])).sum(),
    };
    let certified = certify(d, rho, &gram);
    let value = if certified {
        clamp_value(raw.to_f64())
    } else {
        Infinity
    };
    let solver_status = if !certified {
        SolverStatus::Infeasible
    } else if converged {
        SolverStatus::Converged
    } else {
        SolverStatus::MaxIterations
    };
    Ok(ThetaResult {
        value,
        representation: Representation { gram, rho },
        per_symbol_cost: costs,
        solver_status,
        iterations,
    })
}

/// `ϑ(ρ)`: the smallest achievable largest per-symbol cost.
pub fn solve_theta(d: &DistanceMatrix, rho: ExtReal, opts: &SolverOptions) -> Result<ThetaResult> {
    let support: Vec<usize> = (0..d.k()).collect();
    solve_on(d, rho, &support, None, opts)
}

/// `ϑ(ρ, P)`: the smallest achievable `P`-average cost.
pub fn solve_theta_p(
    d: &DistanceMatrix,
    rho: ExtReal,
    p: &Composition,
    opts: &SolverOptions,
) -> Result<ThetaResult> {
    if p.len() != d.k() {
        return Err(Error::InvalidInput(format!(
            "composition over {} symbols for an alphabet of {}",
            p.len(),
            d.k()
        )));
    }
    let support: Vec<usize> = (0..d.k()).filter(|&x| p[x] > WEIGHT_FLOOR).collect();
    solve_on(d, rho, &support, Some(p.as_slice()), opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalThetaResult {
    pub value: ExtReal,
    /// One weighted solve per auxiliary symbol with positive `F(a)`.
    pub components: Vec<Option<ThetaResult>>,
}

/// `ϑ(ρ, V|F) = Σ_a F(a) ϑ(ρ, V_a)`.
pub fn solve_theta_vf(
    d: &DistanceMatrix,
    rho: ExtReal,
    v: &StochasticMatrix,
    f: &Composition,
    opts: &SolverOptions,
) -> Result<ConditionalThetaResult> {
    if v.n_rows() != f.len() {
        return Err(Error::InvalidInput(format!(
            "F has {} entries but V has {} rows",
            f.len(),
            v.n_rows()
        )));
    }
    let components: Vec<Option<ThetaResult>> = (0..f.len())
        .into_par_iter()
        .map(|a| {
            if f[a] > WEIGHT_FLOOR {
                solve_theta_p(d, rho, v.row(a), opts).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let value = components
        .iter()
        .enumerate()
        .filter_map(|(a, c)| c.as_ref().map(|c| c.value.scale(f[a])))
        .sum();
    Ok(ConditionalThetaResult { value, components })
}

/// `ϑ(ρ)` of a weighted graph, with `d = -ln g`.
pub fn solve_theta_graph(
    g: &WeightedGraph,
    rho: ExtReal,
    opts: &SolverOptions,
) -> Result<ThetaResult> {
    solve_theta(&g.to_distance(), rho, opts)
}

/// Logarithm of the classical Lovász theta: orthogonality on zero-similarity pairs only.
pub fn lovasz_classical(g: &WeightedGraph, opts: &SolverOptions) -> Result<ThetaResult> {
    solve_theta(&g.to_distance(), Infinity, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{build_hamming, build_pentagon, to_similarity};

    fn fast() -> SolverOptions {
        SolverOptions {
            starts: 2,
            ..Default::default()
        }
    }

    fn empty_graph(k: usize) -> DistanceMatrix {
        let e = (0..k)
            .map(|x| {
                (0..k)
                    .map(|y| if x == y { ExtReal::ZERO } else { Infinity })
                    .collect()
            })
            .collect();
        DistanceMatrix::new(e).unwrap()
    }

    #[test]
    fn single_symbol_is_free() {
        let d = DistanceMatrix::from_finite(vec![vec![0.0]]).unwrap();
        let r = solve_theta(&d, Finite(1.0), &fast()).unwrap();
        assert_eq!(r.value, Finite(0.0));
        let z = DistanceMatrix::from_finite(vec![vec![0.0; 3]; 3]).unwrap();
        assert_eq!(
            solve_theta(&z, Finite(0.3), &fast()).unwrap().value,
            Finite(0.0)
        );
    }

    #[test]
    fn empty_graph_gives_ln_k() {
        for k in 2..6 {
            let r = solve_theta(&empty_graph(k), Infinity, &fast()).unwrap();
            assert!(
                (r.value_f64() - (k as f64).ln()).abs() < 1e-6,
                "K={k}: {:?}",
                r.value
            );
            assert_eq!(r.solver_status, SolverStatus::Converged);
        }
    }

    #[test]
    fn binary_hamming_matches_closed_form() {
        let d = build_hamming(2).unwrap();
        let p = Composition::uniform(2);
        let r = solve_theta_p(&d, Finite(1.0), &p, &fast()).unwrap();
        let exact = binary_theta_analytic(Finite(1.0), &p).unwrap();
        assert!((r.value_f64() - exact).abs() < 1e-6);
        assert!((exact - 0.379885).abs() < 1e-6);
    }

    #[test]
    fn point_mass_costs_nothing() {
        let d = build_hamming(3).unwrap();
        let r = solve_theta_p(&d, Finite(1.0), &Composition::point_mass(3, 1), &fast()).unwrap();
        assert_eq!(r.value, Finite(0.0));
        assert!(certify(&d, Finite(1.0), &r.representation.gram));
    }

    #[test]
    fn pentagon_lovasz() {
        let g = to_similarity(&build_pentagon());
        let r = lovasz_classical(&g, &fast()).unwrap();
        assert!((r.value_f64() - 0.5 * 5f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn weighted_below_max() {
        let d = DistanceMatrix::from_finite(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 0.5],
            vec![2.0, 0.5, 0.0],
        ])
        .unwrap();
        let t = solve_theta(&d, Finite(1.0), &fast()).unwrap().value_f64();
        let p = Composition::new(vec![0.2, 0.5, 0.3]).unwrap();
        let tp = solve_theta_p(&d, Finite(1.0), &p, &fast())
            .unwrap()
            .value_f64();
        assert!(tp <= t + 1e-9);
    }

    #[test]
    fn conditional_reductions() {
        let d = build_hamming(2).unwrap();
        let q = Composition::new(vec![0.8, 0.2]).unwrap();
        let single = StochasticMatrix::from_rows(vec![q.clone()]).unwrap();
        let vf =
            solve_theta_vf(&d, Finite(2.0), &single, &Composition::uniform(1), &fast()).unwrap();
        let tp = solve_theta_p(&d, Finite(2.0), &q, &fast()).unwrap();
        assert!((vf.value.to_f64() - tp.value_f64()).abs() < 1e-9);
        let flip = StochasticMatrix::binary_flip(0.2);
        let vf = solve_theta_vf(&d, Finite(2.0), &flip, &Composition::uniform(2), &fast()).unwrap();
        assert!((vf.value.to_f64() - tp.value_f64()).abs() < 1e-7);
        let pm = solve_theta_vf(
            &d,
            Finite(2.0),
            &flip,
            &Composition::point_mass(2, 1),
            &fast(),
        )
        .unwrap();
        assert!(pm.components[0].is_none());
    }

    #[test]
    fn rejects_bad_rho() {
        let d = build_hamming(2).unwrap();
        assert!(solve_theta(&d, Finite(0.0), &fast()).is_err());
        assert!(solve_theta(&d, Finite(-1.0), &fast()).is_err());
    }

    #[test]
    fn result_json_has_gram() {
        let d = build_hamming(2).unwrap();
        let r = solve_theta(&d, Finite(1.0), &fast()).unwrap();
        let j = r.to_json();
        assert_eq!(j["representation"]["gram"].as_array().unwrap().len(), 3);
        assert_eq!(j["solver_status"], "converged");
    }
}
