//! Best-of curves over all applicable bound families.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::euclidean::{berlekamp_bound, blahut_search, piret_bound, BlahutOptions};
use super::theta_bounds::{circ_sym_point, general_elias_point, umbrella_p_point, umbrella_point};
use super::{elias_binary_at, BoundCurve, BoundPoint, Method};
use crate::distances::DistanceMatrix;
use crate::embedding::{check_negative_type, PSD_REL_TOL};
use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};
use crate::simplex::{Composition, StochasticMatrix};
use crate::theta::{solve_theta, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveOptions {
    pub methods: Vec<Method>,
    pub solver: SolverOptions,
    pub rho_grid: Vec<f64>,
    /// Evaluate composition-constrained bounds at this `P`. The curve then
    /// bounds `δ*(R, P)`.
    pub composition: Option<Composition>,
    pub blahut: BlahutOptions,
    /// Size of the one-parameter `Q` and `θ` families.
    pub family_points: usize,
    /// Bisection steps on `ln ρ` when refining the umbrella bound.
    pub refine_steps: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            methods: Method::ALL.to_vec(),
            solver: SolverOptions::default(),
            rho_grid: (-4..=20).map(|e| 2f64.powi(e)).collect(),
            composition: None,
            blahut: BlahutOptions::default(),
            family_points: 8,
            refine_steps: 12,
        }
    }
}

impl CurveOptions {
    fn uses(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}

/// Bounds of the form "for `R` above a threshold, `δ ≤ value`".
#[derive(Debug, Clone)]
struct Threshold {
    point: BoundPoint,
}

fn is_uniform(p: &Composition) -> bool {
    let k = p.len() as f64;
    p.as_slice().iter().all(|v| (v - 1.0 / k).abs() < 1e-12)
}

/// One-parameter families of distributions concentrated around symbol 0.
fn q_family(d: &DistanceMatrix, n: usize) -> Vec<Composition> {
    let k = d.k();
    let profile: Vec<f64> = d.profile().iter().map(|v| v.to_f64()).collect();
    let finite_max = profile
        .iter()
        .cloned()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for i in 1..=n {
        let lambda = 0.5 * i as f64 / (n + 1) as f64;
        // Mass λ on the nearest neighbour.
        let mut q = vec![0.0; k];
        q[0] = 1.0 - lambda;
        q[1 % k] += lambda;
        out.push(Composition::new(q).expect("valid"));
        // Exponential family of the profile; infinite distances get no mass.
        let mu = (8.0 * (1.0 - i as f64 / (n + 1) as f64)).exp2() / finite_max / 16.0;
        let w: Vec<f64> = profile
            .iter()
            .map(|v| if v.is_finite() { (-mu * v).exp() } else { 0.0 })
            .collect();
        let s: f64 = w.iter().sum();
        out.push(Composition::new(w.into_iter().map(|v| v / s).collect()).expect("valid"));
    }
    out
}

/// Evaluates every requested method over its parameter space and keeps, for
/// each rate, the smallest bound that applies there. The result is made
/// nonincreasing in `R`.
///
/// Without a user composition, composition-constrained methods are used only
/// for circularly symmetric distances (where the uniform composition is
/// optimal). With one, every point bounds `δ*(R, P)`.
pub fn best_curve(d: &DistanceMatrix, rates: &[f64], opts: &CurveOptions) -> Result<BoundCurve> {
    if rates.is_empty() {
        return Err(Error::InvalidInput("empty rate grid".into()));
    }
    if opts.rho_grid.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput("ρ grid must be positive".into()));
    }
    let k = d.k();
    if let Some(p) = &opts.composition {
        if p.len() != k {
            return Err(Error::InvalidInput(
                "composition and alphabet sizes differ".into(),
            ));
        }
    }
    let cc: Option<Composition> = opts
        .composition
        .clone()
        .or_else(|| d.is_circularly_symmetric().then(|| Composition::uniform(k)));
    let cc_uniform = cc.as_ref().is_some_and(is_uniform);
    let euclidean = d.is_finite() && check_negative_type(d, PSD_REL_TOL)?.passed;
    let distance_id = if opts.composition.is_some() {
        "delta*(R,P) upper bound"
    } else {
        "delta*(R) upper bound"
    };

    let rhos: Vec<ExtReal> = opts.rho_grid.iter().map(|r| Finite(*r)).collect();
    let mut jobs: Vec<Box<dyn Fn() -> Result<BoundPoint> + Sync + Send + '_>> = Vec::new();
    if opts.uses(Method::Umbrella) {
        for &rho in &rhos {
            jobs.push(Box::new(move || umbrella_point(d, rho, &opts.solver)));
        }
    }
    if let Some(p) = &cc {
        if opts.uses(Method::UmbrellaP) {
            for &rho in &rhos {
                jobs.push(Box::new(move || umbrella_p_point(d, rho, p, &opts.solver)));
            }
        }
        if opts.uses(Method::GeneralElias) {
            for i in 1..=opts.family_points {
                let theta = i as f64 / (opts.family_points + 1) as f64;
                let v = StochasticMatrix::mixing(p, theta);
                for &rho in &rhos {
                    let v = v.clone();
                    jobs.push(Box::new(move || {
                        general_elias_point(d, rho, p, &v, &opts.solver)
                    }));
                }
            }
        }
    }
    if d.is_circularly_symmetric() && cc_uniform && opts.uses(Method::CircSym) {
        for q in q_family(d, opts.family_points) {
            for &rho in &rhos {
                let q = q.clone();
                jobs.push(Box::new(move || circ_sym_point(d, &q, rho, &opts.solver)));
            }
        }
    }
    let thresholds: Vec<Threshold> = jobs
        .par_iter()
        .map(|job| job().map(|point| Threshold { point }))
        .collect::<Result<_>>()?;

    let umbrella: Vec<(f64, f64)> = thresholds
        .iter()
        .filter(|t| t.point.method == Method::Umbrella)
        .filter_map(|t| t.point.params["rho"].as_f64().map(|r| (r, t.point.r)))
        .collect();

    let points: Vec<BoundPoint> = rates
        .par_iter()
        .map(|&r| -> Result<BoundPoint> {
            let mut cands: Vec<BoundPoint> = thresholds
                .iter()
                .filter(|t| t.point.r <= r && t.point.delta.is_finite())
                .map(|t| t.point.clone())
                .collect();
            if opts.uses(Method::Umbrella) {
                cands.extend(refine_umbrella(d, r, &umbrella, opts)?);
            }
            if let (2, true, Finite(d01)) = (k, opts.uses(Method::EliasBinary), d.get(0, 1)) {
                cands.push(elias_binary_at(r, d01));
            }
            let circular = euclidean && d.is_circularly_symmetric() && cc_uniform && r >= 0.0;
            if circular && (opts.uses(Method::Berlekamp) || opts.uses(Method::Piret)) {
                let b = berlekamp_bound(d, r)?;
                if opts.uses(Method::Piret) {
                    if let Ok(p) = piret_bound(d, &b.q_star, r) {
                        cands.push(p);
                    }
                }
                if opts.uses(Method::Berlekamp) {
                    cands.push(b.point);
                }
            }
            if euclidean && opts.uses(Method::Blahut) && r >= 0.0 {
                if let Some(p) = &cc {
                    cands.push(blahut_search(d, p, r, &opts.blahut)?);
                }
            }
            let best = cands
                .into_iter()
                .min_by(|a, b| a.delta.total_cmp(&b.delta))
                .map(|mut p| {
                    if let Some(o) = p.params.as_object_mut() {
                        o.insert("threshold".into(), json!(p.r));
                    }
                    p.r = r;
                    p
                });
            Ok(best.unwrap_or_else(|| {
                BoundPoint::new(r, Infinity, Method::Umbrella, json!({"vacuous": true}))
            }))
        })
        .collect::<Result<_>>()?;

    let mut curve = BoundCurve::new(points, distance_id);
    let mut best: Option<BoundPoint> = None;
    for p in curve.points.iter_mut() {
        match &best {
            Some(b) if b.delta < p.delta => {
                let r = p.r;
                *p = b.clone();
                p.r = r;
            }
            _ => best = Some(p.clone()),
        }
    }
    Ok(curve)
}

/// Bisects `ln ρ` between the last grid value whose threshold exceeds `r`
/// and the first whose threshold does not.
fn refine_umbrella(
    d: &DistanceMatrix,
    r: f64,
    grid: &[(f64, f64)],
    opts: &CurveOptions,
) -> Result<Vec<BoundPoint>> {
    if opts.refine_steps == 0 {
        return Ok(vec![]);
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let Some(i) = sorted.iter().position(|(_, thr)| *thr <= r) else {
        return Ok(vec![]);
    };
    if i == 0 {
        return Ok(vec![]);
    }
    let (mut lo, mut hi) = (sorted[i - 1].0.ln(), sorted[i].0.ln());
    let mut out = Vec::new();
    for _ in 0..opts.refine_steps {
        let mid = 0.5 * (lo + hi);
        let rho = mid.exp();
        let th = solve_theta(d, Finite(rho), &opts.solver)?.value;
        if th.to_f64() <= r {
            hi = mid;
            out.push(BoundPoint::new(
                th.to_f64(),
                th.scale(rho),
                Method::Umbrella,
                json!({"rho": rho, "theta": th, "boundary": true}),
            ));
        } else {
            lo = mid;
        }
    }
    Ok(out)
}
