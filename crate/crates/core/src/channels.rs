//! Discrete memoryless channels: Chernoff and Bhattacharyya distances between
//! input letters, pairwise reversibility, and reliability-function upper
//! bounds obtained from minimum-distance bounds.

use serde::{Deserialize, Serialize};

use crate::bounds::{best_curve, BoundCurve, CurveOptions};
use crate::distances::{build_bhattacharyya, DistanceMatrix};
use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};

const ROW_TOL: f64 = 1e-12;
const GOLDEN_TOL: f64 = 1e-12;
const PRESCAN_POINTS: usize = 64;

/// Transition probabilities `W[x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    w: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    #[serde(rename = "X")]
    x: usize,
    #[serde(rename = "Y")]
    y: usize,
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(w: Vec<Vec<f64>>) -> Result<Self> {
        if w.is_empty() || w[0].is_empty() {
            return Err(Error::InvalidChannel("empty transition matrix".into()));
        }
        let ny = w[0].len();
        for (x, row) in w.iter().enumerate() {
            if row.len() != ny {
                return Err(Error::InvalidChannel("ragged transition matrix".into()));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has a negative entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidChannel(format!("row {x} sums to {s}")));
            }
        }
        Ok(Channel { w })
    }

    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("crossover {p} outside [0, 1]")));
        }
        Channel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn inputs(&self) -> usize {
        self.w.len()
    }

    pub fn outputs(&self) -> usize {
        self.w[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.w[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn bhattacharyya_coefficient(&self, x: usize, y: usize) -> f64 {
        self.w[x]
            .iter()
            .zip(&self.w[y])
            .map(|(a, b)| (a * b).sqrt())
            .sum()
    }

    /// Output distribution of the `n`-fold product channel for an input sequence.
    pub fn product_output(&self, seq: &[usize]) -> Vec<f64> {
        let mut out = vec![1.0];
        for &x in seq {
            let mut next = Vec::with_capacity(out.len() * self.outputs());
            for p in &out {
                for q in &self.w[x] {
                    next.push(p * q);
                }
            }
            out = next;
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ChannelJson {
            x: self.inputs(),
            y: self.outputs(),
            w: self.w.clone(),
        })
        .expect("channel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ChannelJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("channel JSON: {e}")))?;
        if raw.w.len() != raw.x || raw.w.iter().any(|r| r.len() != raw.y) {
            return Err(Error::InvalidChannel(format!(
                "declared {}×{} but W has a different shape",
                raw.x, raw.y
            )));
        }
        Channel::new(raw.w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffResult {
    pub value: ExtReal,
    pub argmin_s: f64,
    /// The infimum is attained at `s = 0` or `s = 1`.
    pub boundary: bool,
    pub pairwise_reversible_pair: bool,
}

fn validate_distribution(q: &[f64]) -> Result<()> {
    if q.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(
            "distribution has a negative entry".into(),
        ));
    }
    let s: f64 = q.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("distribution sums to {s}")));
    }
    Ok(())
}

/// `ln sum_y Q1(y)^{1-s} Q2(y)^s` over the common support, as a closure in `s`.
fn log_overlap<'a>(q1: &'a [f64], q2: &'a [f64]) -> Option<impl Fn(f64) -> f64 + 'a> {
    let common: Vec<(f64, f64)> = q1
        .iter()
        .zip(q2)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if common.is_empty() {
        return None;
    }
    Some(move |s: f64| {
        let terms: Vec<f64> = common.iter().map(|(a, b)| (1.0 - s) * a + s * b).collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimizes the convex `s ↦ ln f(s)` on `[0, 1]`; returns `(s*, ln f(s*), boundary)`.
fn minimize_on_unit_interval(f: &impl Fn(f64) -> f64) -> (f64, f64, bool) {
    let grid: Vec<f64> = (0..=PRESCAN_POINTS)
        .map(|i| f(i as f64 / PRESCAN_POINTS as f64))
        .collect();
    debug_assert!(
        grid.windows(3)
            .all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-9 * (1.0 + w[1].abs())),
        "log overlap is not convex on the grid"
    );
    let i = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let lo = i.saturating_sub(1) as f64 / PRESCAN_POINTS as f64;
    let hi = (i + 1).min(PRESCAN_POINTS) as f64 / PRESCAN_POINTS as f64;
    let s = golden_section(f, lo, hi, GOLDEN_TOL);
    let mut best = (s, f(s), false);
    for (edge, v) in [(0.0, grid[0]), (1.0, grid[PRESCAN_POINTS])] {
        if v <= best.1 {
            best = (edge, v, true);
        }
    }
    best
}

/// `D_C(Q1, Q2) = -ln inf_{0<s<1} sum_y Q1(y)^{1-s} Q2(y)^s`.
///
/// The infimum over the open interval is computed as the minimum over
/// `[0, 1]`, which has the same value by continuity; `boundary` reports
/// whether the minimum sits at an endpoint.
pub fn chernoff_distance(q1: &[f64], q2: &[f64]) -> Result<ChernoffResult> {
    if q1.len() != q2.len() {
        return Err(Error::InvalidInput(
            "distributions over different output sets".into(),
        ));
    }
    validate_distribution(q1)?;
    validate_distribution(q2)?;
    if q1 == q2 {
        return Ok(ChernoffResult {
            value: ExtReal::ZERO,
            argmin_s: 0.5,
            boundary: false,
            pairwise_reversible_pair: true,
        });
    }
    let Some(f) = log_overlap(q1, q2) else {
        return Ok(ChernoffResult {
            value: Infinity,
            argmin_s: 0.5,
            boundary: false,
            pairwise_reversible_pair: true,
        });
    };
    let (s, lf, boundary) = minimize_on_unit_interval(&f);
    Ok(ChernoffResult {
        value: Finite((-lf).max(0.0)),
        argmin_s: s,
        boundary,
        pairwise_reversible_pair: !boundary && (s - 0.5).abs() <= 1e-6,
    })
}

/// Chernoff distance between the output distributions of two input
/// sequences on the product channel, computed from the per-letter factors.
pub fn sequence_chernoff(w: &Channel, x: &[usize], y: &[usize]) -> Result<ChernoffResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("sequence lengths differ".into()));
    }
    let mut factors = Vec::with_capacity(x.len());
    for (a, b) in x.iter().zip(y) {
        match log_overlap(w.row(*a), w.row(*b)) {
            Some(f) => factors.push(f),
            None => {
                return Ok(ChernoffResult {
                    value: Infinity,
                    argmin_s: 0.5,
                    boundary: false,
                    pairwise_reversible_pair: true,
                })
            }
        }
    }
    let f = |s: f64| factors.iter().map(|g| g(s)).sum::<f64>();
    let (s, lf, boundary) = minimize_on_unit_interval(&f);
    Ok(ChernoffResult {
        value: Finite((-lf).max(0.0)),
        argmin_s: s,
        boundary,
        pairwise_reversible_pair: !boundary && (s - 0.5).abs() <= 1e-6,
    })
}

/// `d(x, x') = D_C(W_x, W_x')`, extended additively to sequences.
pub fn additive_chernoff_matrix(w: &Channel) -> Result<DistanceMatrix> {
    let k = w.inputs();
    let mut e = vec![vec![ExtReal::ZERO; k]; k];
    for x in 0..k {
        for y in (x + 1)..k {
            let v = chernoff_distance(w.row(x), w.row(y))?.value;
            e[x][y] = v;
            e[y][x] = v;
        }
    }
    DistanceMatrix::new(e)
}

/// Whether `d_B = D_C` on every pair of distinct input rows (within 1e-9).
pub fn pairwise_reversible(w: &Channel) -> bool {
    let k = w.inputs();
    for x in 0..k {
        for y in (x + 1)..k {
            if w.row(x) == w.row(y) {
                continue;
            }
            let db = ExtReal::neg_ln(w.bhattacharyya_coefficient(x, y));
            let dc = match chernoff_distance(w.row(x), w.row(y)) {
                Ok(r) => r.value,
                Err(_) => return false,
            };
            match (db, dc) {
                (Infinity, Infinity) => {}
                (Finite(a), Finite(b)) if (b - a).abs() <= 1e-9 => {}
                _ => return false,
            }
        }
    }
    true
}

/// `W_x(y_x) = 1-ε`, `W_x(y_{x+1 mod 3}) = ε`.
pub fn ternary_unilateral(eps: f64) -> Result<Channel> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("ε = {eps} outside (0, 1)")));
    }
    let mut w = vec![vec![0.0; 3]; 3];
    for x in 0..3 {
        w[x][x] = 1.0 - eps;
        w[x][(x + 1) % 3] = eps;
    }
    Channel::new(w)
}

/// `sum_y Q(y) ln(W_x(y) / W_x'(y))` where `Q ∝ sqrt(W_x W_x')` on the product channel.
pub fn tilted_log_ratio(w: &Channel, x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("sequence lengths differ".into()));
    }
    let mut total = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (ra, rb) = (w.row(*a), w.row(*b));
        let z = w.bhattacharyya_coefficient(*a, *b);
        if z <= 0.0 {
            return Err(Error::ConditionNotMet(
                "codeword letters with disjoint output supports".into(),
            ));
        }
        total += ra
            .iter()
            .zip(rb)
            .filter(|(p, q)| **p > 0.0 && **q > 0.0)
            .map(|(p, q)| (p * q).sqrt() / z * (p / q).ln())
            .sum::<f64>();
    }
    Ok(total)
}

/// The tilted log-likelihood ratio between the equal-composition codewords
/// `(2,3,1)` and `(1,2,3)` of the ternary unilateral channel, `3 ln((1-ε)/ε)`.
pub fn blahut_counterexample(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("ε = {eps} outside (0, 1/2)")));
    }
    let w = ternary_unilateral(eps)?;
    tilted_log_ratio(&w, &[1, 2, 0], &[0, 1, 2])
}

/// Which additive distance a reliability bound was built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReliabilityDistance {
    Bhattacharyya,
    AdditiveChernoff,
}

/// Upper bound on the reliability function `E(R)` from a minimum-distance
/// bound: on `d_B` for pairwise reversible channels, otherwise on the
/// additive Chernoff distance.
pub fn reliability_upper(
    w: &Channel,
    rates: &[f64],
    opts: &CurveOptions,
) -> Result<(ReliabilityDistance, BoundCurve)> {
    let (kind, d) = if pairwise_reversible(w) {
        (ReliabilityDistance::Bhattacharyya, build_bhattacharyya(w)?)
    } else {
        (
            ReliabilityDistance::AdditiveChernoff,
            additive_chernoff_matrix(w)?,
        )
    };
    let mut curve = best_curve(&d, rates, opts)?;
    curve.distance_id = match kind {
        ReliabilityDistance::Bhattacharyya => "E(R) upper bound on d_B".into(),
        ReliabilityDistance::AdditiveChernoff => "E(R) upper bound on additive d_C".into(),
    };
    Ok((kind, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_rows_have_zero_distance() {
        let r = chernoff_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!(r.value, Finite(0.0));
        assert!(!r.boundary);
    }

    #[test]
    fn bsc_is_symmetric_at_half() {
        let w = Channel::bsc(0.1).unwrap();
        let r = chernoff_distance(w.row(0), w.row(1)).unwrap();
        let expect = -(2.0 * 0.09f64.sqrt()).ln();
        assert!((r.value.to_f64() - expect).abs() < 1e-12);
        assert!((r.argmin_s - 0.5).abs() < 1e-6);
        assert!(r.pairwise_reversible_pair);
        assert!(pairwise_reversible(&w));
    }

    #[test]
    fn unilateral_pair_hits_boundary() {
        let w = ternary_unilateral(0.01).unwrap();
        let r = chernoff_distance(w.row(0), w.row(1)).unwrap();
        assert!((r.value.to_f64() + 0.01f64.ln()).abs() < 1e-12);
        assert!(r.boundary);
        assert_eq!(r.argmin_s, 0.0);
        assert!(!pairwise_reversible(&w));
        // Grid check of the minimum.
        let f = |s: f64| 0.01f64.powf(1.0 - s) * 0.99f64.powf(s);
        let grid_min = (0..=1000)
            .map(|i| f(i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((r.value.to_f64() + grid_min.ln()).abs() < 1e-12);
    }

    #[test]
    fn disjoint_support_is_infinite() {
        let r = chernoff_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(r.value, Infinity);
        let ident = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d = additive_chernoff_matrix(&ident).unwrap();
        assert_eq!(d.get(0, 1), Infinity);
    }

    #[test]
    fn channel_validation() {
        assert!(Channel::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(Channel::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(ternary_unilateral(0.0).is_err());
        let w = ternary_unilateral(0.2).unwrap();
        for r in w.rows() {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unilateral_bhattacharyya() {
        let eps = 0.05;
        let w = ternary_unilateral(eps).unwrap();
        let d = build_bhattacharyya(&w).unwrap();
        let expect = -(eps * (1.0f64 - eps)).sqrt().ln();
        assert!((d.get(0, 1).to_f64() - expect).abs() < 1e-14);
    }

    #[test]
    fn counterexample_value() {
        let v = blahut_counterexample(0.1).unwrap();
        assert!((v - 3.0 * 9f64.ln()).abs() < 1e-12);
        assert!(blahut_counterexample(0.5 - 1e-9).unwrap().abs() < 1e-7);
        assert!(blahut_counterexample(0.6).is_err());
    }

    #[test]
    fn identical_inputs_are_skipped() {
        let w = Channel::new(vec![vec![0.2, 0.8], vec![0.2, 0.8], vec![0.9, 0.1]]).unwrap();
        // Two distinct rows of a binary-output channel are never reversible in general;
        // the identical pair alone must not break the check.
        let same = Channel::new(vec![vec![0.2, 0.8], vec![0.2, 0.8]]).unwrap();
        assert!(pairwise_reversible(&same));
        let _ = pairwise_reversible(&w);
    }

    #[test]
    fn json_contract() {
        let w = Channel::from_json(r#"{"X": 2, "Y": 2, "W": [[0.9, 0.1], [0.1, 0.9]]}"#).unwrap();
        assert_eq!(w, Channel::bsc(0.1).unwrap());
        assert!(Channel::from_json(r#"{"X": 3, "Y": 2, "W": [[0.9, 0.1], [0.1, 0.9]]}"#).is_err());
        assert_eq!(w.to_json()["X"], 2);
    }
}
