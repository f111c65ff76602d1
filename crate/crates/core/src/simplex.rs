//! Probability vectors, stochastic matrices and the entropy functionals
//! used throughout (natural logarithms, `0 ln 0 = 0`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// A probability distribution on `0..K`. Also used for compositions (types).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition(Vec<f64>);

impl Composition {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidInput("empty distribution".into()));
        }
        if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "distribution entry {bad} is not a nonnegative number"
            )));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "distribution sums to {s}, not 1"
            )));
        }
        Ok(Composition(p))
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k >= 1);
        Composition(vec![1.0 / k as f64; k])
    }

    pub fn point_mass(k: usize, at: usize) -> Self {
        let mut p = vec![0.0; k];
        p[at] = 1.0;
        Composition(p)
    }

    /// Empirical composition of a sequence over `0..k`.
    pub fn of_sequence(seq: &[usize], k: usize) -> Self {
        let mut p = vec![0.0; k];
        for &s in seq {
            p[s] += 1.0;
        }
        let n = seq.len() as f64;
        p.iter_mut().for_each(|v| *v /= n);
        Composition(p)
    }

    /// Exponential family `Q(x) ∝ e^{-mu w(x)}`.
    pub fn tilted(weights: &[f64], mu: f64) -> Self {
        let wmin = weights.iter().cloned().fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = weights.iter().map(|w| (-mu * (w - wmin)).exp()).collect();
        let z: f64 = raw.iter().sum();
        Composition(raw.into_iter().map(|v| v / z).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.0)
    }

    /// Integer symbol counts `n P(x)` when they are all integral.
    pub fn counts(&self, n: usize) -> Result<Vec<usize>> {
        self.0
            .iter()
            .map(|p| {
                let c = p * n as f64;
                let r = c.round();
                if (c - r).abs() > 1e-9 {
                    Err(Error::InvalidComposition(format!(
                        "n·P = {c} is not an integer for n = {n}"
                    )))
                } else {
                    Ok(r as usize)
                }
            })
            .collect()
    }

    /// `sum_{x,x'} P(x) P(x') m[x][x']`.
    pub fn quadratic_form(&self, m: &[Vec<f64>]) -> f64 {
        let p = &self.0;
        let mut s = 0.0;
        for (x, px) in p.iter().enumerate() {
            if *px == 0.0 {
                continue;
            }
            for (y, py) in p.iter().enumerate() {
                s += px * py * m[x][y];
            }
        }
        s
    }
}

impl std::ops::Index<usize> for Composition {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Rows are distributions: `rows[a][x] = V_a(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StochasticMatrix(Vec<Composition>);

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("stochastic matrix has no rows".into()));
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidInput("ragged stochastic matrix".into()));
        }
        Ok(StochasticMatrix(
            rows.into_iter()
                .map(Composition::new)
                .collect::<Result<_>>()?,
        ))
    }

    pub fn from_rows(rows: Vec<Composition>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("stochastic matrix has no rows".into()));
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidInput("ragged stochastic matrix".into()));
        }
        Ok(StochasticMatrix(rows))
    }

    pub fn identity(k: usize) -> Self {
        StochasticMatrix((0..k).map(|x| Composition::point_mass(k, x)).collect())
    }

    /// Binary flip family: `V_0 = (1-λ, λ)`, `V_1 = (λ, 1-λ)`.
    pub fn binary_flip(lambda: f64) -> Self {
        StochasticMatrix(vec![
            Composition(vec![1.0 - lambda, lambda]),
            Composition(vec![lambda, 1.0 - lambda]),
        ])
    }

    /// Circulant rows `V_x(x') = Q(x' - x mod K)`.
    pub fn circulant(q: &Composition) -> Self {
        let k = q.len();
        StochasticMatrix(
            (0..k)
                .map(|x| Composition((0..k).map(|y| q[(y + k - x) % k]).collect()))
                .collect(),
        )
    }

    /// Rows `(1-θ) e_x + θ P`; keeps `P V = P`.
    pub fn mixing(p: &Composition, theta: f64) -> Self {
        let k = p.len();
        StochasticMatrix(
            (0..k)
                .map(|x| {
                    Composition(
                        (0..k)
                            .map(|y| theta * p[y] + if x == y { 1.0 - theta } else { 0.0 })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Composition] {
        &self.0
    }

    pub fn row(&self, a: usize) -> &Composition {
        &self.0[a]
    }

    pub fn n_rows(&self) -> usize {
        self.0.len()
    }

    pub fn n_cols(&self) -> usize {
        self.0[0].len()
    }

    /// Output distribution `F V`.
    pub fn output(&self, f: &Composition) -> Result<Composition> {
        if f.len() != self.n_rows() {
            return Err(Error::InvalidInput(format!(
                "input distribution has {} entries, matrix has {} rows",
                f.len(),
                self.n_rows()
            )));
        }
        let mut out = vec![0.0; self.n_cols()];
        for (fa, row) in f.as_slice().iter().zip(&self.0) {
            for (o, v) in out.iter_mut().zip(row.as_slice()) {
                *o += fa * v;
            }
        }
        Ok(Composition(out))
    }

    /// Mutual information `I(F, V) = H(FV) - sum_a F(a) H(V_a)` in nats.
    pub fn mutual_information(&self, f: &Composition) -> Result<f64> {
        let out = self.output(f)?;
        let cond: f64 = f
            .as_slice()
            .iter()
            .zip(&self.0)
            .map(|(fa, row)| fa * row.entropy())
            .sum();
        Ok((out.entropy() - cond).max(0.0))
    }
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|v| **v > 0.0).map(|v| -v * v.ln()).sum()
}

/// Binary entropy `h(t) = -t ln t - (1-t) ln(1-t)`.
pub fn binary_entropy(t: f64) -> f64 {
    entropy(&[t, 1.0 - t])
}

/// Inverse of the binary entropy on `[0, 1/2]`.
pub fn binary_entropy_inverse(h: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    if h <= 0.0 {
        return 0.0;
    }
    if h >= ln2 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}
