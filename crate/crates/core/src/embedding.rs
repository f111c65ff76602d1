//! Squared-Euclidean distances.
//!
//! For a finite distance the following are equivalent, and each has its own
//! check here: `e^{-d/ρ}` is positive semidefinite for every `ρ > 0`; the
//! quadratic form `sum c(x) c(x') d(x, x')` is nonpositive on zero-sum
//! vectors; that form is concave on the simplex; and `d` is a squared
//! Euclidean distance. The centered matrix `D̃` is the Gram matrix of the
//! embedding (up to a factor of two), which gives both the eigenvalue test
//! and the explicit vectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};

/// Eigenvalues above `-PSD_REL_TOL · max|λ|` count as nonnegative.
pub const PSD_REL_TOL: f64 = 1e-9;

/// Default ρ grid for the divisibility test.
///
/// Large values are included because a small violation of negative type
/// shows up in `e^{-d/ρ}` only at order `1/ρ`, behind an order `1/ρ²` term.
pub const DEFAULT_RHO_GRID: [f64; 10] = [0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e3, 1e4, 1e5];

pub const DEFAULT_EMBED_TOL: f64 = 1e-8;
pub const DEFAULT_CONCAVITY_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x0d15_7a2c;

/// `d̃(x, x') = -d(x, x') + s(x) + s(x') - s` with row means `s(x)` and grand mean `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix {
    pub entries: Vec<Vec<f64>>,
    pub row_means: Vec<f64>,
    pub grand_mean: f64,
}

impl CenteredMatrix {
    fn to_dmatrix(&self) -> DMatrix<f64> {
        let k = self.entries.len();
        DMatrix::from_fn(k, k, |i, j| self.entries[i][j])
    }
}

pub fn center(d: &DistanceMatrix) -> Result<CenteredMatrix> {
    let rows = d
        .finite_rows()
        .ok_or(Error::InfiniteDistance("centering"))?;
    Ok(center_rows(&rows))
}

fn center_rows(rows: &[Vec<f64>]) -> CenteredMatrix {
    let k = rows.len();
    let row_means: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().sum::<f64>() / k as f64)
        .collect();
    let grand_mean = row_means.iter().sum::<f64>() / k as f64;
    let entries = (0..k)
        .map(|x| {
            (0..k)
                .map(|y| -rows[x][y] + row_means[x] + row_means[y] - grand_mean)
                .collect()
        })
        .collect();
    CenteredMatrix {
        entries,
        row_means,
        grand_mean,
    }
}

/// `sum_{x,x'} c(x) c(x') d(x, x')`.
pub fn quadratic_form(rows: &[Vec<f64>], c: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, cx) in c.iter().enumerate() {
        for (y, cy) in c.iter().enumerate() {
            s += cx * cy * rows[x][y];
        }
    }
    s
}

fn psd_margin(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> (f64, usize) {
    let (imin, lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .unwrap();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return (0.0, imin);
    }
    (lmin / scale, imin)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeTypeCheck {
    pub passed: bool,
    /// Smallest eigenvalue of `D̃` relative to its largest magnitude.
    pub relative_min_eigenvalue: f64,
    /// Unit zero-sum vector with a positive quadratic form, on failure.
    pub witness: Option<Vec<f64>>,
    pub form: Option<f64>,
}

/// Whether `D̃` is positive semidefinite, with `tol` relative to its spectral radius.
pub fn check_negative_type(d: &DistanceMatrix, tol: f64) -> Result<NegativeTypeCheck> {
    let rows = d
        .finite_rows()
        .ok_or(Error::InfiniteDistance("the negative-type test"))?;
    let centered = center_rows(&rows);
    let eig = SymmetricEigen::new(centered.to_dmatrix());
    let (margin, imin) = psd_margin(&eig);
    if margin >= -tol {
        return Ok(NegativeTypeCheck {
            passed: true,
            relative_min_eigenvalue: margin,
            witness: None,
            form: None,
        });
    }
    let mut c: Vec<f64> = eig.eigenvectors.column(imin).iter().cloned().collect();
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    c.iter_mut().for_each(|v| *v -= mean);
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= norm);
    let form = quadratic_form(&rows, &c);
    Ok(NegativeTypeCheck {
        passed: false,
        relative_min_eigenvalue: margin,
        witness: Some(c),
        form: Some(form),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibilityCheck {
    pub passed: bool,
    /// First grid value at which `e^{-d/ρ}` has a negative eigenvalue.
    pub failing_rho: Option<f64>,
}

/// Whether `e^{-d/ρ}` (with `e^{-∞} = 0`) is positive semidefinite at every grid `ρ`.
pub fn check_divisible(
    d: &DistanceMatrix,
    rho_grid: &[f64],
    tol: f64,
) -> Result<DivisibilityCheck> {
    if rho_grid.is_empty() || rho_grid.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput(
            "ρ grid must be nonempty and positive".into(),
        ));
    }
    let k = d.k();
    for &rho in rho_grid {
        let g = DMatrix::from_fn(k, k, |i, j| d.get(i, j).exp_neg_scaled(Some(rho)));
        let eig = SymmetricEigen::new(g);
        if psd_margin(&eig).0 < -tol {
            return Ok(DivisibilityCheck {
                passed: false,
                failing_rho: Some(rho),
            });
        }
    }
    Ok(DivisibilityCheck {
        passed: true,
        failing_rho: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityCheck {
    pub passed: bool,
    pub witness: Option<Vec<f64>>,
    pub form: Option<f64>,
}

/// Samples random zero-sum directions and tests the sign of the quadratic form.
///
/// Each Gaussian sample is improved by a few steps of Rayleigh-quotient
/// ascent restricted to two-dimensional subspaces, so that narrow cones of
/// violating directions are still found. The form is evaluated from the
/// distance entries only.
pub fn check_concavity_sampled(
    d: &DistanceMatrix,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<ConcavityCheck> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is needed".into()));
    }
    let rows = d
        .finite_rows()
        .ok_or(Error::InfiniteDistance("the concavity test"))?;
    let k = rows.len();
    if k < 2 {
        return Ok(ConcavityCheck {
            passed: true,
            witness: None,
            form: None,
        });
    }
    let dm = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
    let scale = dm.iter().fold(0.0f64, |m, v| m.max(v.abs())) * k as f64;
    let threshold = tol * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = 4 * k;
    for _ in 0..trials {
        let mut c = zero_sum_unit(DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng)));
        for step in 0..=steps {
            let form = c.dot(&(&dm * &c));
            if form > threshold {
                return Ok(ConcavityCheck {
                    passed: false,
                    witness: Some(c.iter().cloned().collect()),
                    form: Some(quadratic_form(&rows, c.as_slice())),
                });
            }
            if step == steps {
                break;
            }
            let grad = zero_sum(&dm * &c) - &c * form;
            let gn = grad.norm();
            if gn <= 1e-14 * scale.max(1.0) {
                break;
            }
            let q2 = &grad / gn;
            let a11 = form;
            let a12 = c.dot(&(&dm * &q2));
            let a22 = q2.dot(&(&dm * &q2));
            let theta = 0.5 * (2.0 * a12).atan2(a11 - a22);
            c = zero_sum_unit(&c * theta.cos() + &q2 * theta.sin());
        }
    }
    Ok(ConcavityCheck {
        passed: true,
        witness: None,
        form: None,
    })
}

fn zero_sum(mut v: DVector<f64>) -> DVector<f64> {
    let mean = v.mean();
    v.add_scalar_mut(-mean);
    v
}

fn zero_sum_unit(v: DVector<f64>) -> DVector<f64> {
    let v = zero_sum(v);
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// Vectors `u_x` with `‖u_x - u_x'‖² = d(x, x')`.
pub fn euclidean_embed(d: &DistanceMatrix, tol: f64) -> Result<Vec<Vec<f64>>> {
    let check = check_negative_type(d, PSD_REL_TOL)?;
    if !check.passed {
        return Err(Error::NotEmbeddable {
            witness: check.witness.unwrap_or_default(),
            form: check.form.unwrap_or(0.0),
        });
    }
    let rows = d.finite_rows().expect("checked finite");
    let k = rows.len();
    let eig = SymmetricEigen::new(center_rows(&rows).to_dmatrix());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let keep: Vec<usize> = (0..k)
        .filter(|&i| eig.eigenvalues[i] > PSD_REL_TOL * scale)
        .collect();
    let vectors: Vec<Vec<f64>> = (0..k)
        .map(|x| {
            keep.iter()
                .map(|&i| (eig.eigenvalues[i] / 2.0).sqrt() * eig.eigenvectors[(x, i)])
                .collect()
        })
        .collect();
    let err = reconstruction_error(d, &vectors);
    if err > tol {
        return Err(Error::ConditionNotMet(format!(
            "embedding reconstruction error {err:.3e} exceeds {tol:.3e}"
        )));
    }
    Ok(vectors)
}

/// `max |‖u_x - u_x'‖² - d(x, x')|`; infinite if `d` has infinite entries.
pub fn reconstruction_error(d: &DistanceMatrix, vectors: &[Vec<f64>]) -> f64 {
    let k = d.k();
    let mut worst = 0.0f64;
    for x in 0..k {
        for y in (x + 1)..k {
            let sq: f64 = vectors[x]
                .iter()
                .zip(&vectors[y])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            worst = worst.max((sq - d.get(x, y).to_f64()).abs());
        }
    }
    worst
}

/// All four conditions. The centering-based ones are `None` when `d` has
/// infinite entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub divisible: bool,
    pub negative_type: Option<bool>,
    pub concave_form: Option<bool>,
    pub embeddable: Option<bool>,
    pub failing_rho: Option<f64>,
    pub witness_vectors: Option<Vec<Vec<f64>>>,
    pub witness_violation: Option<Vec<f64>>,
    pub max_reconstruction_error: Option<f64>,
}

impl EmbeddingReport {
    /// The conditions that were evaluated, in order.
    pub fn evaluated(&self) -> Vec<bool> {
        let mut v = vec![self.divisible];
        v.extend(self.negative_type);
        v.extend(self.concave_form);
        v.extend(self.embeddable);
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

pub fn classify(d: &DistanceMatrix) -> EmbeddingReport {
    let div = check_divisible(d, &DEFAULT_RHO_GRID, PSD_REL_TOL).expect("default grid is valid");
    let mut report = EmbeddingReport {
        divisible: div.passed,
        negative_type: None,
        concave_form: None,
        embeddable: None,
        failing_rho: div.failing_rho,
        witness_vectors: None,
        witness_violation: None,
        max_reconstruction_error: None,
    };
    if !d.is_finite() {
        return report;
    }
    let nt = check_negative_type(d, PSD_REL_TOL).expect("finite");
    let cc = check_concavity_sampled(d, DEFAULT_CONCAVITY_TRIALS, DEFAULT_SEED, PSD_REL_TOL)
        .expect("finite");
    report.negative_type = Some(nt.passed);
    report.concave_form = Some(cc.passed);
    report.witness_violation = nt.witness.or(cc.witness);
    match euclidean_embed(d, DEFAULT_EMBED_TOL) {
        Ok(v) => {
            report.max_reconstruction_error = Some(reconstruction_error(d, &v));
            report.witness_vectors = Some(v);
            report.embeddable = Some(true);
        }
        Err(_) => report.embeddable = Some(false),
    }
    report
}

/// Classifies each block of a user-supplied partition separately.
///
/// Every symbol must appear in exactly one block and distances inside a
/// block must be finite.
pub fn classify_blocks(d: &DistanceMatrix, blocks: &[Vec<usize>]) -> Result<Vec<EmbeddingReport>> {
    let k = d.k();
    let mut seen = vec![false; k];
    for &x in blocks.iter().flatten() {
        if x >= k || seen[x] {
            return Err(Error::InvalidInput(format!(
                "symbol {x} is out of range or repeated in the partition"
            )));
        }
        seen[x] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidInput(
            "partition does not cover the alphabet".into(),
        ));
    }
    blocks
        .iter()
        .map(|b| {
            let sub: Vec<Vec<f64>> = b
                .iter()
                .map(|&x| b.iter().map(|&y| d.get(x, y).to_f64()).collect())
                .collect();
            if sub.iter().flatten().any(|v| v.is_infinite()) {
                return Err(Error::InfiniteDistance("a block of the partition"));
            }
            Ok(classify(&DistanceMatrix::from_finite(sub)?))
        })
        .collect()
}
