//! Exhaustive ground truth for short block lengths: stable sets of Kronecker
//! powers, optimal minimum distances, and the constructive steps behind the
//! constant-composition reductions.

mod clique;

pub use clique::{BitSet, Graph};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distances::{code_min_distance, sequence_distance, Code, DistanceMatrix, WeightedGraph};
use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};
use crate::simplex::{Composition, StochasticMatrix};

pub const DEFAULT_VERTEX_BUDGET: usize = 20_000;
const RANDOM_SHIFTS: usize = 512;
const EXHAUSTIVE_SHIFTS: u128 = 4096;

fn pow_sat(k: usize, n: usize) -> u128 {
    (0..n).fold(1u128, |acc, _| acc.saturating_mul(k as u128))
}

fn multinomial(counts: &[usize]) -> u128 {
    let mut total = 0u128;
    let mut acc = 1u128;
    for &c in counts {
        for i in 1..=c as u128 {
            total += 1;
            acc = acc.saturating_mul(total) / i;
        }
    }
    acc
}

/// All sequences of length `n` over `0..k`, in lexicographic order.
fn all_sequences(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < k {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// All sequences with the given symbol counts, in lexicographic order.
fn type_class(counts: &[usize]) -> Vec<Vec<usize>> {
    fn rec(counts: &mut [usize], left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for x in 0..counts.len() {
            if counts[x] > 0 {
                counts[x] -= 1;
                cur.push(x);
                rec(counts, left - 1, cur, out);
                cur.pop();
                counts[x] += 1;
            }
        }
    }
    let mut c = counts.to_vec();
    let n = c.iter().sum();
    let mut out = Vec::new();
    rec(&mut c, n, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Vertices of `𝒳ⁿ` or of the type class of `P`, within the budget.
fn vertices(k: usize, n: usize, p: Option<&Composition>, budget: usize) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "block length must be at least 1".into(),
        ));
    }
    match p {
        None => {
            let needed = pow_sat(k, n);
            if needed > budget as u128 {
                return Err(Error::Budget {
                    what: "vertices",
                    needed,
                    limit: budget as u128,
                });
            }
            Ok(all_sequences(k, n))
        }
        Some(p) => {
            if p.len() != k {
                return Err(Error::InvalidInput(
                    "composition and alphabet sizes differ".into(),
                ));
            }
            let counts = p.counts(n)?;
            let needed = multinomial(&counts);
            if needed > budget as u128 {
                return Err(Error::Budget {
                    what: "vertices",
                    needed,
                    limit: budget as u128,
                });
            }
            Ok(type_class(&counts))
        }
    }
}

/// `G^{⊗n}`, optionally restricted to a type class, with entries evaluated on demand.
#[derive(Debug, Clone)]
pub struct KroneckerPower {
    pub g: WeightedGraph,
    pub n: usize,
    pub vertices: Vec<Vec<usize>>,
}

impl KroneckerPower {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `Π_t g(x_t, x'_t)` for vertices `i` and `j`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.vertices[i]
            .iter()
            .zip(&self.vertices[j])
            .map(|(a, b)| self.g.get(*a, *b))
            .product()
    }
}

pub fn kronecker_power(
    g: &WeightedGraph,
    n: usize,
    p: Option<&Composition>,
    budget: usize,
) -> Result<KroneckerPower> {
    Ok(KroneckerPower {
        g: g.clone(),
        n,
        vertices: vertices(g.k(), n, p, budget)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableSet {
    pub size: usize,
    pub witness: Vec<Vec<usize>>,
}

fn within_eps(v: f64, eps: f64) -> bool {
    v <= eps * (1.0 + 1e-12)
}

/// Largest set of vertices with pairwise similarity at most `eps`.
pub fn max_stable_set(graph: &KroneckerPower, eps: f64) -> Result<StableSet> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidInput(format!("ε = {eps} outside [0, 1]")));
    }
    let allowed = Graph::from_fn(graph.len(), |i, j| within_eps(graph.entry(i, j), eps));
    let clique = allowed.max_clique(None);
    for (a, &i) in clique.iter().enumerate() {
        for &j in &clique[a + 1..] {
            if !within_eps(graph.entry(i, j), eps) {
                return Err(Error::Infeasible(
                    "stable set witness failed re-validation".into(),
                ));
            }
        }
    }
    Ok(StableSet {
        size: clique.len(),
        witness: clique.iter().map(|&i| graph.vertices[i].clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalCode {
    pub distance: ExtReal,
    pub witness: Code,
}

/// Every value a sum of `n` symbol distances can take, ascending.
fn candidate_distances(d: &DistanceMatrix, n: usize) -> Vec<ExtReal> {
    let mut symbol: Vec<f64> = d
        .entries()
        .iter()
        .flatten()
        .filter_map(|v| v.finite())
        .collect();
    symbol.sort_by(f64::total_cmp);
    symbol.dedup();
    let mut sums = vec![0.0];
    for _ in 0..n {
        let mut next: Vec<f64> = sums
            .iter()
            .flat_map(|s| symbol.iter().map(move |v| s + v))
            .collect();
        next.sort_by(f64::total_cmp);
        next.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
        sums = next;
    }
    let mut out: Vec<ExtReal> = sums.into_iter().map(Finite).collect();
    if !d.is_finite() {
        out.push(Infinity);
    }
    out
}

fn at_least(v: ExtReal, tau: ExtReal) -> bool {
    match (v, tau) {
        (Infinity, _) => true,
        (Finite(_), Infinity) => false,
        (Finite(a), Finite(b)) => a >= b - 1e-9 * b.abs().max(1.0),
    }
}

/// The largest minimum distance of an `M`-word code of length `n`,
/// optionally of constant composition `P`, with a witness code.
pub fn optimal_min_distance(
    n: usize,
    m: usize,
    d: &DistanceMatrix,
    p: Option<&Composition>,
    budget: usize,
) -> Result<OptimalCode> {
    if m < 2 {
        return Err(Error::UndefinedMinDistance(m));
    }
    let verts = vertices(d.k(), n, p, budget)?;
    if m > verts.len() {
        return Err(Error::Infeasible(format!(
            "{m} codewords requested but only {} sequences exist",
            verts.len()
        )));
    }
    let nv = verts.len();
    let mut dist = vec![ExtReal::ZERO; nv * nv];
    for i in 0..nv {
        for j in (i + 1)..nv {
            let v = sequence_distance(&verts[i], &verts[j], d)?;
            dist[i * nv + j] = v;
            dist[j * nv + i] = v;
        }
    }
    let feasible = |tau: ExtReal| -> Option<Vec<usize>> {
        let g = Graph::from_fn(nv, |i, j| at_least(dist[i * nv + j], tau));
        let c = g.max_clique(Some(m));
        (c.len() >= m).then(|| c[..m].to_vec())
    };
    let cands = candidate_distances(d, n);
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    let mut best = feasible(cands[0]).expect("threshold zero admits any M distinct words");
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        match feasible(cands[mid]) {
            Some(w) => {
                lo = mid;
                best = w;
            }
            None => hi = mid - 1,
        }
    }
    let witness = Code::new(best.iter().map(|&i| verts[i].clone()).collect())?;
    let distance = code_min_distance(&witness, d)?;
    if !at_least(distance, cands[lo]) {
        return Err(Error::Infeasible(
            "witness code failed re-validation".into(),
        ));
    }
    Ok(OptimalCode { distance, witness })
}

fn composition_counts(w: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0; k];
    w.iter().for_each(|s| c[*s] += 1);
    c
}

fn largest_class(words: &[Vec<usize>], k: usize) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
    for w in words {
        classes
            .entry(composition_counts(w, k))
            .or_default()
            .push(w.clone());
    }
    classes
        .into_values()
        .max_by(|a, b| a.len().cmp(&b.len()).then(std::cmp::Ordering::Greater))
        .unwrap_or_default()
}

/// Adds a common shift `x̄ ∈ Z_Kⁿ` to every codeword and keeps the largest
/// constant-composition class. Shifts preserve circularly symmetric
/// distances, so the minimum distance cannot decrease.
pub fn shift_to_constant_composition(code: &Code, k: usize, seed: u64) -> Result<Code> {
    if let Some(s) = code.words().iter().flatten().find(|s| **s >= k) {
        return Err(Error::InvalidInput(format!("symbol {s} outside Z_{k}")));
    }
    let n = code.n();
    let apply = |shift: &[usize]| -> Vec<Vec<usize>> {
        code.words()
            .iter()
            .map(|w| w.iter().zip(shift).map(|(a, b)| (a + b) % k).collect())
            .collect()
    };
    let mut best = largest_class(code.words(), k);
    let mut consider = |shift: &[usize]| {
        let c = largest_class(&apply(shift), k);
        if c.len() > best.len() {
            best = c;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_SHIFTS {
        let shift: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        consider(&shift);
    }
    if pow_sat(k, n) <= EXHAUSTIVE_SHIFTS {
        for shift in all_sequences(k, n) {
            consider(&shift);
        }
    }
    Code::new(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveredSubcode {
    pub a: Vec<usize>,
    pub subcode: Code,
    /// `M |T_V̂(x)| / |T_F|`, the pigeonhole guarantee.
    pub floor: f64,
}

/// Finds `a ∈ T_Fⁿ` (with `F = P V̂`) jointly typed `P × V̂` with the most
/// codewords of a constant-composition code.
pub fn best_covered_subcode(
    code: &Code,
    k: usize,
    vhat: &StochasticMatrix,
    budget: usize,
) -> Result<CoveredSubcode> {
    let counts = code
        .constant_composition(k)
        .ok_or_else(|| Error::InvalidComposition("code is not constant composition".into()))?;
    if vhat.n_rows() != k {
        return Err(Error::InvalidInput("V̂ needs one row per symbol".into()));
    }
    let na = vhat.n_cols();
    let mut joint = vec![vec![0usize; na]; k];
    for x in 0..k {
        for a in 0..na {
            let v = counts[x] as f64 * vhat.row(x)[a];
            let r = v.round();
            if (v - r).abs() > 1e-9 {
                return Err(Error::InvalidComposition(format!(
                    "n P({x}) V̂_{x}({a}) = {v} is not an integer"
                )));
            }
            joint[x][a] = r as usize;
        }
    }
    let f_counts: Vec<usize> = (0..na).map(|a| (0..k).map(|x| joint[x][a]).sum()).collect();
    let t_f = multinomial(&f_counts);
    if t_f > budget as u128 {
        return Err(Error::Budget {
            what: "auxiliary type class",
            needed: t_f,
            limit: budget as u128,
        });
    }
    let t_v: f64 = joint.iter().map(|row| multinomial(row) as f64).product();
    let floor = code.size() as f64 * t_v / t_f as f64;

    let mut best: Option<(Vec<usize>, Vec<Vec<usize>>)> = None;
    for a in type_class(&f_counts) {
        let members: Vec<Vec<usize>> = code
            .words()
            .iter()
            .filter(|w| {
                let mut c = vec![vec![0usize; na]; k];
                w.iter().zip(&a).for_each(|(x, s)| c[*x][*s] += 1);
                c == joint
            })
            .cloned()
            .collect();
        if best.as_ref().is_none_or(|(_, b)| members.len() > b.len()) {
            best = Some((a, members));
        }
    }
    let (a, members) = best.expect("type class is nonempty");
    if (members.len() as f64) < floor - 1e-9 {
        return Err(Error::Infeasible(
            "covering count below the pigeonhole floor".into(),
        ));
    }
    Ok(CoveredSubcode {
        a,
        subcode: Code::new(members)?,
        floor,
    })
}
