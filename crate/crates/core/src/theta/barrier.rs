//! Log-barrier interior-point solver for the Gram-matrix programs.
//!
//! The unknowns are the off-diagonal entries of a `(K+1)×(K+1)` Gram matrix
//! with unit diagonal, index 0 being the handle. Handle entries `h_x` must be
//! positive, symbol pairs are either fixed at zero, free, or boxed in
//! `[-c, c]`. The max-type objective uses an epigraph variable `s ≤ h_x`.
//! Each centering step is a damped Newton iteration on
//! `t·f₀ - ln det X + Σ box and epigraph barriers`; `t` grows until the
//! central-path gap `m/t` drops below the tolerance.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PairKind {
    Free,
    Boxed(f64),
}

#[derive(Debug, Clone)]
pub(crate) struct Pair {
    pub i: usize,
    pub j: usize,
    pub kind: PairKind,
}

#[derive(Debug, Clone)]
pub(crate) enum Objective {
    /// `max_x -2 ln h_x`.
    Max,
    /// `Σ w_x (-2 ln h_x)` with all weights positive.
    Weighted(Vec<f64>),
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    /// Number of symbols; the matrix is `(k+1)×(k+1)`.
    pub k: usize,
    /// Symbol pairs `(i, j)` in matrix indices `1..=k`, excluding fixed zeros.
    pub pairs: Vec<Pair>,
    pub objective: Objective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub gram: DMatrix<f64>,
    pub value: f64,
    pub outcome: Outcome,
    pub iterations: usize,
}

const CENTER_TOL: f64 = 1e-11;
const T_GROWTH: f64 = 10.0;

impl Problem {
    fn n_vars(&self) -> usize {
        self.k + self.pairs.len() + usize::from(matches!(self.objective, Objective::Max))
    }

    fn barrier_count(&self) -> f64 {
        let boxes = self
            .pairs
            .iter()
            .filter(|p| matches!(p.kind, PairKind::Boxed(_)))
            .count();
        let epi = match self.objective {
            Objective::Max => self.k,
            Objective::Weighted(_) => 0,
        };
        (self.k + 1 + 2 * boxes + epi) as f64
    }

    fn gram(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let n = self.k + 1;
        let mut x = DMatrix::identity(n, n);
        for s in 0..self.k {
            x[(0, s + 1)] = z[s];
            x[(s + 1, 0)] = z[s];
        }
        for (p, pair) in self.pairs.iter().enumerate() {
            let v = z[self.k + p];
            x[(pair.i, pair.j)] = v;
            x[(pair.j, pair.i)] = v;
        }
        x
    }

    fn epigraph(&self, z: &DVector<f64>) -> Option<f64> {
        matches!(self.objective, Objective::Max).then(|| z[self.n_vars() - 1])
    }

    /// Objective on a strictly feasible point.
    pub fn objective_value(&self, z: &DVector<f64>) -> f64 {
        let h = z.rows(0, self.k);
        match &self.objective {
            Objective::Max => h
                .iter()
                .map(|v| -2.0 * v.ln())
                .fold(f64::NEG_INFINITY, f64::max),
            Objective::Weighted(w) => w.iter().zip(h.iter()).map(|(w, v)| -2.0 * w * v.ln()).sum(),
        }
    }

    fn smooth_objective(&self, z: &DVector<f64>) -> f64 {
        match self.epigraph(z) {
            Some(s) => -2.0 * s.ln(),
            None => self.objective_value(z),
        }
    }

    /// `t f₀ + φ`, or `None` outside the domain.
    fn merit(&self, z: &DVector<f64>, t: f64) -> Option<f64> {
        let h = z.rows(0, self.k);
        if h.iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        let mut phi = 0.0;
        if let Some(s) = self.epigraph(z) {
            if !(s > 0.0) {
                return None;
            }
            for v in h.iter() {
                let slack = v - s;
                if !(slack > 0.0) {
                    return None;
                }
                phi -= slack.ln();
            }
        }
        for (p, pair) in self.pairs.iter().enumerate() {
            if let PairKind::Boxed(c) = pair.kind {
                let v = z[self.k + p];
                let (a, b) = (c - v, c + v);
                if !(a > 0.0 && b > 0.0) {
                    return None;
                }
                phi -= a.ln() + b.ln();
            }
        }
        let chol = Cholesky::new(self.gram(z))?;
        let logdet: f64 = chol.l_dirty().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        if !logdet.is_finite() {
            return None;
        }
        Some(t * self.smooth_objective(z) + phi - logdet)
    }

    /// Gradient and Hessian of the merit function at a feasible point.
    fn derivatives(&self, z: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let nv = self.n_vars();
        let mut g = DVector::zeros(nv);
        let mut hess = DMatrix::zeros(nv, nv);
        let y = Cholesky::new(self.gram(z))?.inverse();

        let index: Vec<(usize, usize)> = (0..self.k)
            .map(|s| (0, s + 1))
            .chain(self.pairs.iter().map(|p| (p.i, p.j)))
            .collect();
        for (a, &(i, j)) in index.iter().enumerate() {
            g[a] -= 2.0 * y[(i, j)];
            for (b, &(k, l)) in index.iter().enumerate().skip(a) {
                let v = 2.0 * (y[(j, k)] * y[(i, l)] + y[(j, l)] * y[(i, k)]);
                hess[(a, b)] += v;
                if a != b {
                    hess[(b, a)] += v;
                }
            }
        }
        for (p, pair) in self.pairs.iter().enumerate() {
            if let PairKind::Boxed(c) = pair.kind {
                let a = self.k + p;
                let v = z[a];
                let (lo, hi) = (c + v, c - v);
                g[a] += 1.0 / hi - 1.0 / lo;
                hess[(a, a)] += 1.0 / (hi * hi) + 1.0 / (lo * lo);
            }
        }
        match &self.objective {
            Objective::Max => {
                let si = nv - 1;
                let s = z[si];
                g[si] -= 2.0 * t / s;
                hess[(si, si)] += 2.0 * t / (s * s);
                for x in 0..self.k {
                    let slack = z[x] - s;
                    let inv = 1.0 / slack;
                    let inv2 = inv * inv;
                    g[x] -= inv;
                    g[si] += inv;
                    hess[(x, x)] += inv2;
                    hess[(si, si)] += inv2;
                    hess[(x, si)] -= inv2;
                    hess[(si, x)] -= inv2;
                }
            }
            Objective::Weighted(w) => {
                for x in 0..self.k {
                    let h = z[x];
                    g[x] -= 2.0 * t * w[x] / h;
                    hess[(x, x)] += 2.0 * t * w[x] / (h * h);
                }
            }
        }
        Some((g, hess))
    }

    fn newton_direction(g: &DVector<f64>, h: &DMatrix<f64>) -> Option<DVector<f64>> {
        let n = g.len();
        let diag_scale = h
            .diagonal()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let mut reg = 0.0;
        for _ in 0..12 {
            let mut hr = h.clone();
            if reg > 0.0 {
                for i in 0..n {
                    hr[(i, i)] += reg;
                }
            }
            if let Some(ch) = Cholesky::new(hr) {
                return Some(-ch.solve(g));
            }
            reg = if reg == 0.0 {
                1e-14 * diag_scale
            } else {
                reg * 100.0
            };
        }
        None
    }

    /// A strictly feasible start. Start 0 is deterministic, others are random.
    fn start(&self, rng: &mut ChaCha8Rng, randomize: bool) -> DVector<f64> {
        let nv = self.n_vars();
        let a = 0.5 / (self.k as f64).sqrt();
        let mut z = DVector::zeros(nv);
        if !randomize {
            for x in 0..self.k {
                z[x] = a;
            }
        } else {
            for x in 0..self.k {
                z[x] = a * rng.random_range(0.2..1.0);
            }
            for (p, pair) in self.pairs.iter().enumerate() {
                let c = match pair.kind {
                    PairKind::Free => 1.0,
                    PairKind::Boxed(c) => c,
                };
                z[self.k + p] = 0.9 * c * rng.random_range(-1.0..1.0);
            }
            // Shrinking the symbol block towards zero eventually restores definiteness.
            for _ in 0..60 {
                if Cholesky::new(self.gram(&z)).is_some() {
                    break;
                }
                for p in 0..self.pairs.len() {
                    z[self.k + p] *= 0.5;
                }
            }
            if Cholesky::new(self.gram(&z)).is_none() {
                return self.start(rng, false);
            }
        }
        if let Objective::Max = self.objective {
            let hmin = (0..self.k).map(|x| z[x]).fold(f64::INFINITY, f64::min);
            z[nv - 1] = 0.5 * hmin;
        }
        z
    }

    /// Runs the barrier method from one start.
    pub fn solve_from(
        &self,
        start_index: usize,
        seed: u64,
        max_iter: usize,
        gap_tol: f64,
    ) -> Solution {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(start_index as u64));
        let mut z = self.start(&mut rng, start_index > 0);
        let m = self.barrier_count();
        let mut t = 1.0;
        let mut iterations = 0;
        let mut best = z.clone();
        let mut best_value = self.objective_value(&z);
        let mut last_center_value = f64::INFINITY;
        let mut outcome = Outcome::MaxIterations;

        'outer: loop {
            // Centering.
            loop {
                if iterations >= max_iter {
                    break 'outer;
                }
                iterations += 1;
                let Some((g, h)) = self.derivatives(&z, t) else {
                    break;
                };
                let Some(dz) = Self::newton_direction(&g, &h) else {
                    break;
                };
                let lambda2 = -g.dot(&dz);
                if !(lambda2 > 2.0 * CENTER_TOL) {
                    break;
                }
                let f0 = self.merit(&z, t).expect("current point is feasible");
                let lambda = lambda2.sqrt();
                let mut alpha = if lambda > 0.25 {
                    1.0 / (1.0 + lambda)
                } else {
                    1.0
                };
                let slack = 1e-13 * (1.0 + f0.abs());
                let mut decrease = None;
                for _ in 0..60 {
                    let trial = &z + &dz * alpha;
                    if let Some(f1) = self.merit(&trial, t) {
                        if f1 <= f0 - 0.25 * alpha * lambda2 + slack {
                            z = trial;
                            decrease = Some(f0 - f1);
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                // Progress below rounding level means the point is as centered as it gets.
                match decrease {
                    Some(df) if df > slack => {}
                    _ => break,
                }
            }
            let v = self.objective_value(&z);
            debug_assert!(
                v <= last_center_value + 1e-6 * (1.0 + v.abs()),
                "central path value increased: {last_center_value} -> {v}"
            );
            last_center_value = v;
            if v <= best_value {
                best_value = v;
                best = z.clone();
            }
            if m / t < gap_tol {
                outcome = Outcome::Converged;
                break;
            }
            t *= T_GROWTH;
        }
        let v = self.objective_value(&z);
        if v <= best_value {
            best_value = v;
            best = z;
        }
        Solution {
            gram: self.gram(&best),
            value: best_value,
            outcome,
            iterations,
        }
    }
}
