//! Symbol distances, their similarity graphs, and the additive extension to
//! sequences and codes.

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};

/// Input asymmetry or diagonal mass above this is rejected; below it is averaged away.
pub const SYMMETRY_TOL: f64 = 1e-9;
const CIRCULAR_REL_TOL: f64 = 1e-12;

/// Symmetric `K×K` matrix of pairwise symbol distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: Vec<Vec<ExtReal>>,
    circular: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistanceJson {
    #[serde(rename = "K")]
    k: usize,
    entries: Vec<Vec<ExtReal>>,
}

impl DistanceMatrix {
    /// Validates and normalizes a user-supplied matrix.
    ///
    /// Entries must be nonnegative. Asymmetry and diagonal values up to
    /// [`SYMMETRY_TOL`] are repaired, larger ones rejected. Circular symmetry
    /// is detected and, when present, the entries are snapped to the exact
    /// circulant values.
    pub fn new(mut entries: Vec<Vec<ExtReal>>) -> Result<Self> {
        let k = entries.len();
        if k == 0 {
            return Err(Error::InvalidAlphabet("alphabet must be nonempty".into()));
        }
        if entries.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput("distance matrix is not square".into()));
        }
        for (x, row) in entries.iter().enumerate() {
            for (y, v) in row.iter().enumerate() {
                if let Finite(d) = v {
                    if !d.is_finite() || *d < 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "d({x},{y}) = {d} is not a nonnegative distance"
                        )));
                    }
                }
            }
        }
        for x in 0..k {
            match entries[x][x] {
                Finite(d) if d <= SYMMETRY_TOL => entries[x][x] = ExtReal::ZERO,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "d({x},{x}) = {other} must be 0"
                    )))
                }
            }
            for y in (x + 1)..k {
                let merged = match (entries[x][y], entries[y][x]) {
                    (Infinity, Infinity) => Infinity,
                    (Finite(a), Finite(b)) if (a - b).abs() <= SYMMETRY_TOL => {
                        Finite(0.5 * (a + b))
                    }
                    (a, b) => {
                        return Err(Error::InvalidInput(format!(
                            "asymmetric distance: d({x},{y}) = {a}, d({y},{x}) = {b}"
                        )))
                    }
                };
                entries[x][y] = merged;
                entries[y][x] = merged;
            }
        }
        let circular = snap_circulant(&mut entries);
        Ok(DistanceMatrix { entries, circular })
    }

    pub fn from_finite(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|v| {
                        ExtReal::from_f64(v)
                            .ok_or_else(|| Error::InvalidInput("NaN distance".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Circularly symmetric matrix from the profile `d(0, x)`, `x = 0..K`.
    pub fn circulant(profile: &[ExtReal]) -> Result<Self> {
        let k = profile.len();
        let entries = (0..k)
            .map(|x| (0..k).map(|y| profile[(y + k - x) % k]).collect())
            .collect();
        Self::new(entries)
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, x: usize, y: usize) -> ExtReal {
        self.entries[x][y]
    }

    pub fn entries(&self) -> &[Vec<ExtReal>] {
        &self.entries
    }

    pub fn is_circularly_symmetric(&self) -> bool {
        self.circular
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_finite())
    }

    /// Finite entries as plain floats, or `None` if any entry is infinite.
    pub fn finite_rows(&self) -> Option<Vec<Vec<f64>>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|v| v.finite()).collect())
            .collect()
    }

    /// The profile `d(0, x)`.
    pub fn profile(&self) -> Vec<ExtReal> {
        self.entries[0].clone()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.entries
                .iter()
                .map(|r| r.iter().map(|v| v.scale(c)).collect())
                .collect(),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(DistanceJson {
            k: self.k(),
            entries: self.entries.clone(),
        })
        .expect("distance matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DistanceJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("distance JSON: {e}")))?;
        if raw.entries.len() != raw.k {
            return Err(Error::InvalidInput(format!(
                "K = {} but {} rows given",
                raw.k,
                raw.entries.len()
            )));
        }
        Self::new(raw.entries)
    }
}

/// Sets the entries to their exact circulant values if they are circulant
/// within a relative tolerance. Returns whether they are.
fn snap_circulant(entries: &mut [Vec<ExtReal>]) -> bool {
    let k = entries.len();
    let scale = entries
        .iter()
        .flatten()
        .filter_map(|v| v.finite())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let profile = entries[0].clone();
    let close = |a: ExtReal, b: ExtReal| match (a, b) {
        (Infinity, Infinity) => true,
        (Finite(a), Finite(b)) => (a - b).abs() <= CIRCULAR_REL_TOL * scale,
        _ => false,
    };
    for x in 0..k {
        for y in 0..k {
            if !close(entries[x][y], profile[(y + k - x) % k]) {
                return false;
            }
        }
    }
    for x in 0..k {
        for y in 0..k {
            entries[x][y] = profile[(y + k - x) % k];
        }
    }
    true
}

pub fn build_hamming(k: usize) -> Result<DistanceMatrix> {
    if k < 2 {
        return Err(Error::InvalidAlphabet(format!(
            "Hamming distance needs K >= 2, got {k}"
        )));
    }
    let profile: Vec<ExtReal> = (0..k)
        .map(|x| if x == 0 { ExtReal::ZERO } else { Finite(1.0) })
        .collect();
    DistanceMatrix::circulant(&profile)
}

pub fn build_lee(k: usize) -> Result<DistanceMatrix> {
    if k < 2 {
        return Err(Error::InvalidAlphabet(format!(
            "Lee distance needs K >= 2, got {k}"
        )));
    }
    let profile: Vec<ExtReal> = (0..k).map(|x| Finite(x.min(k - x) as f64)).collect();
    DistanceMatrix::circulant(&profile)
}

/// Squared Euclidean distances between points.
pub fn build_from_points(points: &[Vec<f64>]) -> Result<DistanceMatrix> {
    if points.is_empty() {
        return Err(Error::InvalidAlphabet("no points given".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidInput(
            "points have different dimensions".into(),
        ));
    }
    let k = points.len();
    let mut rows = vec![vec![0.0; k]; k];
    for x in 0..k {
        for y in (x + 1)..k {
            let d: f64 = points[x]
                .iter()
                .zip(&points[y])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            rows[x][y] = d;
            rows[y][x] = d;
        }
    }
    DistanceMatrix::from_finite(rows)
}

/// `d_B(x, x') = -ln sum_y sqrt(W_x(y) W_x'(y))`, infinite for disjoint supports.
pub fn build_bhattacharyya(channel: &Channel) -> Result<DistanceMatrix> {
    let k = channel.inputs();
    let mut entries = vec![vec![ExtReal::ZERO; k]; k];
    for x in 0..k {
        for y in (x + 1)..k {
            let d = ExtReal::neg_ln(channel.bhattacharyya_coefficient(x, y));
            entries[x][y] = d;
            entries[y][x] = d;
        }
    }
    DistanceMatrix::new(entries)
}

/// The four-cycle: adjacent vertices at distance 1, opposite vertices at infinity.
pub fn build_square() -> DistanceMatrix {
    DistanceMatrix::circulant(&[ExtReal::ZERO, Finite(1.0), Infinity, Finite(1.0)])
        .expect("square is valid")
}

/// The five-cycle: adjacent vertices at distance 1, all others at infinity.
pub fn build_pentagon() -> DistanceMatrix {
    DistanceMatrix::circulant(&[ExtReal::ZERO, Finite(1.0), Infinity, Infinity, Finite(1.0)])
        .expect("pentagon is valid")
}

/// Unit-circle QPSK constellation with squared Euclidean distance.
pub fn build_qpsk() -> DistanceMatrix {
    let pts: Vec<Vec<f64>> = (0..4)
        .map(|k| {
            let a = k as f64 * std::f64::consts::FRAC_PI_2;
            vec![a.cos(), a.sin()]
        })
        .collect();
    build_from_points(&pts).expect("qpsk is valid")
}

/// Additive extension of `d` to equal-length sequences.
pub fn sequence_distance(x: &[usize], y: &[usize], d: &DistanceMatrix) -> Result<ExtReal> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "sequence lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let k = d.k();
    if let Some(s) = x.iter().chain(y).find(|s| **s >= k) {
        return Err(Error::InvalidInput(format!(
            "symbol {s} outside alphabet of size {k}"
        )));
    }
    Ok(x.iter().zip(y).map(|(a, b)| d.get(*a, *b)).sum())
}

/// A block code: `M` codewords of common length `n` over `0..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Code {
    words: Vec<Vec<usize>>,
}

impl Code {
    pub fn new(words: Vec<Vec<usize>>) -> Result<Self> {
        let Some(first) = words.first() else {
            return Err(Error::InvalidInput(
                "a code needs at least one codeword".into(),
            ));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidInput(
                "block length must be at least 1".into(),
            ));
        }
        if words.iter().any(|w| w.len() != n) {
            return Err(Error::InvalidInput(
                "codewords have different lengths".into(),
            ));
        }
        Ok(Code { words })
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn n(&self) -> usize {
        self.words[0].len()
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    /// `ln M / n` in nats.
    pub fn rate(&self) -> f64 {
        (self.size() as f64).ln() / self.n() as f64
    }

    /// The shared composition if every codeword has the same one.
    pub fn constant_composition(&self, k: usize) -> Option<Vec<usize>> {
        let counts = |w: &[usize]| {
            let mut c = vec![0usize; k];
            w.iter().for_each(|s| c[*s] += 1);
            c
        };
        let c0 = counts(&self.words[0]);
        self.words[1..]
            .iter()
            .all(|w| counts(w) == c0)
            .then_some(c0)
    }
}

/// Smallest distance over unordered pairs of distinct positions in the code.
pub fn code_min_distance(code: &Code, d: &DistanceMatrix) -> Result<ExtReal> {
    let m = code.size();
    if m < 2 {
        return Err(Error::UndefinedMinDistance(m));
    }
    let w = code.words();
    let mut best = Infinity;
    for i in 0..m {
        for j in (i + 1)..m {
            best = best.min(sequence_distance(&w[i], &w[j], d)?);
        }
    }
    Ok(best)
}

/// Edge-weighted graph `g(x, x') ∈ [0, 1]` with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    g: Vec<Vec<f64>>,
}

impl WeightedGraph {
    pub fn new(mut g: Vec<Vec<f64>>) -> Result<Self> {
        let k = g.len();
        if k == 0 || g.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput(
                "similarity matrix must be square and nonempty".into(),
            ));
        }
        for x in 0..k {
            if (g[x][x] - 1.0).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidInput(format!("g({x},{x}) must be 1")));
            }
            g[x][x] = 1.0;
            for y in (x + 1)..k {
                let (a, b) = (g[x][y], g[y][x]);
                if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                    return Err(Error::InvalidInput(format!(
                        "similarity g({x},{y}) outside [0, 1]"
                    )));
                }
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric similarity at ({x},{y})"
                    )));
                }
                let m = 0.5 * (a + b);
                g[x][y] = m;
                g[y][x] = m;
            }
        }
        Ok(WeightedGraph { g })
    }

    /// Unweighted graph: similarity 1 on edges and the diagonal, 0 elsewhere.
    pub fn from_adjacency(adj: &[Vec<bool>]) -> Result<Self> {
        let k = adj.len();
        Self::new(
            (0..k)
                .map(|x| {
                    (0..k)
                        .map(|y| if x == y || adj[x][y] { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.g.len()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.g[x][y]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.g
    }

    /// Entries `g^{1/ρ}`; `rho = None` is the `ρ = ∞` pattern (1 where `g > 0`).
    pub fn powered(&self, rho: Option<f64>) -> Vec<Vec<f64>> {
        self.g
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| match rho {
                        _ if v <= 0.0 => 0.0,
                        None => 1.0,
                        Some(r) => (v.ln() / r).exp(),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_distance(&self) -> DistanceMatrix {
        DistanceMatrix::new(
            self.g
                .iter()
                .map(|r| r.iter().map(|&v| ExtReal::neg_ln(v)).collect())
                .collect(),
        )
        .expect("similarity graph maps to a valid distance")
    }

    /// Kronecker product `G₁ ⊗ G₂`, symbol `(a, b)` at index `a·K₂ + b`.
    pub fn kronecker(&self, other: &WeightedGraph) -> WeightedGraph {
        let (k1, k2) = (self.k(), other.k());
        let mut g = vec![vec![0.0; k1 * k2]; k1 * k2];
        for a in 0..k1 {
            for b in 0..k2 {
                for c in 0..k1 {
                    for e in 0..k2 {
                        g[a * k2 + b][c * k2 + e] = self.g[a][c] * other.g[b][e];
                    }
                }
            }
        }
        WeightedGraph { g }
    }
}

/// `g = e^{-d}` elementwise, with `e^{-∞} = 0`.
pub fn to_similarity(d: &DistanceMatrix) -> WeightedGraph {
    let g = d
        .entries()
        .iter()
        .enumerate()
        .map(|(x, r)| {
            r.iter()
                .enumerate()
                .map(|(y, v)| if x == y { 1.0 } else { v.exp_neg() })
                .collect()
        })
        .collect();
    WeightedGraph { g }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_binary() {
        let d = build_hamming(2).unwrap();
        assert_eq!(d.get(0, 1), Finite(1.0));
        assert_eq!(d.get(0, 0), Finite(0.0));
        assert!(d.is_circularly_symmetric());
        let d3 = build_hamming(3).unwrap();
        assert_eq!(d3.get(1, 1), Finite(0.0));
        assert_eq!(build_hamming(4).unwrap().get(1, 3), Finite(1.0));
        assert!(matches!(build_hamming(1), Err(Error::InvalidAlphabet(_))));
    }

    #[test]
    fn lee_examples() {
        let d5 = build_lee(5).unwrap();
        assert_eq!(d5.get(0, 2), Finite(2.0));
        assert_eq!(d5.get(1, 4), Finite(2.0));
        assert_eq!(build_lee(6).unwrap().get(0, 3), Finite(3.0));
        assert!(build_lee(0).is_err());
    }

    #[test]
    fn qpsk_distances() {
        let d = build_qpsk();
        assert!((d.get(0, 1).to_f64() - 2.0).abs() < 1e-12);
        assert!((d.get(0, 2).to_f64() - 4.0).abs() < 1e-12);
        assert!(d.is_circularly_symmetric());
    }

    #[test]
    fn repeated_point_is_all_zero() {
        let d = build_from_points(&vec![vec![1.0, 2.0]; 3]).unwrap();
        assert!(d.entries().iter().flatten().all(|v| *v == Finite(0.0)));
        assert!(build_from_points(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn lee_figure_embedding_gives_lee_distance() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let rows = [
            [0.0, a, a, 0.0, 0.0],
            [0.0, a, a, a, 0.0],
            [0.0, 0.0, a, a, 0.0],
            [0.0, 0.0, a, a, a],
            [0.0, 0.0, 0.0, a, a],
        ];
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|c| rows.iter().map(|r| r[c]).collect())
            .collect();
        let d = build_from_points(&pts).unwrap();
        let lee = build_lee(5).unwrap();
        for x in 0..5 {
            for y in 0..5 {
                assert!((d.get(x, y).to_f64() - lee.get(x, y).to_f64()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sequence_distance_cases() {
        let h = build_hamming(2).unwrap();
        assert_eq!(
            sequence_distance(&[0, 1, 0], &[1, 1, 0], &h).unwrap(),
            Finite(1.0)
        );
        assert_eq!(
            sequence_distance(&[0, 1], &[0, 1], &h).unwrap(),
            Finite(0.0)
        );
        assert!(sequence_distance(&[0], &[0, 1], &h).is_err());
        assert!(sequence_distance(&[2], &[0], &h).is_err());
        let p = build_pentagon();
        assert_eq!(sequence_distance(&[0, 0], &[1, 2], &p).unwrap(), Infinity);
    }

    #[test]
    fn min_distance_cases() {
        let h = build_hamming(2).unwrap();
        let rep = Code::new(vec![vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        assert_eq!(code_min_distance(&rep, &h).unwrap(), Finite(3.0));
        let dup = Code::new(vec![vec![0, 1], vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(code_min_distance(&dup, &h).unwrap(), Finite(0.0));
        let inf = DistanceMatrix::circulant(&[ExtReal::ZERO, Infinity]).unwrap();
        let c = Code::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(code_min_distance(&c, &inf).unwrap(), Infinity);
        let single = Code::new(vec![vec![0]]).unwrap();
        assert_eq!(
            code_min_distance(&single, &h),
            Err(Error::UndefinedMinDistance(1))
        );
    }

    #[test]
    fn similarity_values() {
        let g = to_similarity(&build_hamming(2).unwrap());
        assert!((g.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(to_similarity(&build_pentagon()).get(0, 2), 0.0);
    }

    #[test]
    fn symmetrization_and_rejection() {
        let ok = DistanceMatrix::from_finite(vec![vec![0.0, 1.0 + 1e-10], vec![1.0, 0.0]]).unwrap();
        assert_eq!(ok.get(0, 1), ok.get(1, 0));
        assert!(DistanceMatrix::from_finite(vec![vec![0.0, 1.1], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_finite(vec![vec![0.1, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_finite(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
    }

    #[test]
    fn circular_detection() {
        let not_circ = DistanceMatrix::from_finite(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(!not_circ.is_circularly_symmetric());
        assert!(build_pentagon().is_circularly_symmetric());
    }

    #[test]
    fn json_contract() {
        let text = r#"{"K": 2, "entries": [[0, "inf"], ["inf", 0]]}"#;
        let d = DistanceMatrix::from_json(text).unwrap();
        assert_eq!(d.get(0, 1), Infinity);
        let v = d.to_json();
        assert_eq!(v["K"], 2);
        assert_eq!(v["entries"][0][1], "inf");
        assert!(DistanceMatrix::from_json(r#"{"K": 3, "entries": [[0]]}"#).is_err());
    }
}
