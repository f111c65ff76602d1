//! Bounds driven by the theta functions.

use serde::Serialize;
use serde_json::{json, Value};

use super::{BoundPoint, Method};
use crate::distances::{DistanceMatrix, WeightedGraph};
use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};
use crate::simplex::{Composition, StochasticMatrix};
use crate::theta::{solve_theta, solve_theta_graph, solve_theta_p, solve_theta_vf, SolverOptions};

/// `ρ ϑ`, with the `ρ = ∞` path giving a finite value only when `ϑ = 0`.
fn scaled(rho: ExtReal, theta: ExtReal) -> ExtReal {
    match (rho, theta) {
        (_, Finite(0.0)) => ExtReal::ZERO,
        (Finite(r), t) => t.scale(r),
        (Infinity, _) => Infinity,
    }
}

fn rho_json(rho: ExtReal) -> Value {
    serde_json::to_value(rho).expect("extended real serializes")
}

/// `(ϑ(ρ), ρ ϑ(ρ))`: for rates above `ϑ(ρ)`, `δ*(R) ≤ ρ ϑ(ρ)`.
pub fn umbrella_point(
    d: &DistanceMatrix,
    rho: ExtReal,
    opts: &SolverOptions,
) -> Result<BoundPoint> {
    let th = solve_theta(d, rho, opts)?;
    Ok(BoundPoint::new(
        th.value.to_f64(),
        scaled(rho, th.value),
        Method::Umbrella,
        json!({"rho": rho_json(rho), "theta": th.value, "boundary": true}),
    ))
}

/// `(ϑ(ρ, P), ρ ϑ(ρ, P))`, a bound on `δ*(R, P)`.
pub fn umbrella_p_point(
    d: &DistanceMatrix,
    rho: ExtReal,
    p: &Composition,
    opts: &SolverOptions,
) -> Result<BoundPoint> {
    let th = solve_theta_p(d, rho, p, opts)?;
    Ok(BoundPoint::new(
        th.value.to_f64(),
        scaled(rho, th.value),
        Method::UmbrellaP,
        json!({"rho": rho_json(rho), "P": p.as_slice(), "theta": th.value, "boundary": true}),
    ))
}

/// `(I(F, V) + ϑ(ρ, V|F), ρ ϑ(ρ, V|F))`, a bound on `δ*(R, FV)`.
pub fn general_elias_point(
    d: &DistanceMatrix,
    rho: ExtReal,
    f: &Composition,
    v: &StochasticMatrix,
    opts: &SolverOptions,
) -> Result<BoundPoint> {
    let th = solve_theta_vf(d, rho, v, f, opts)?;
    let info = v.mutual_information(f)?;
    let p = v.output(f)?;
    Ok(BoundPoint::new(
        info + th.value.to_f64(),
        scaled(rho, th.value),
        Method::GeneralElias,
        json!({
            "rho": rho_json(rho),
            "F": f.as_slice(),
            "V": v.rows().iter().map(Composition::as_slice).collect::<Vec<_>>(),
            "P": p.as_slice(),
            "I": info,
            "theta": th.value,
            "boundary": true,
        }),
    ))
}

/// Circularly symmetric specialization with circulant rows `V_x(x') = Q(x' - x)`:
/// `(ln K - H(Q) + ϑ(ρ, Q), ρ ϑ(ρ, Q))`.
pub fn circ_sym_point(
    d: &DistanceMatrix,
    q: &Composition,
    rho: ExtReal,
    opts: &SolverOptions,
) -> Result<BoundPoint> {
    if !d.is_circularly_symmetric() {
        return Err(Error::WrongSymmetry);
    }
    let th = solve_theta_p(d, rho, q, opts)?;
    let info = (d.k() as f64).ln() - q.entropy();
    Ok(BoundPoint::new(
        info + th.value.to_f64(),
        scaled(rho, th.value),
        Method::CircSym,
        json!({"rho": rho_json(rho), "Q": q.as_slice(), "theta": th.value, "boundary": true}),
    ))
}

/// `α(G^{⊗n}; εⁿ) ≤ (1 - ε^{n/ρ}) / (e^{-nϑ} - ε^{n/ρ})`, infinite when the
/// denominator is not positive.
pub fn stable_set_bound(theta: f64, eps: f64, rho: ExtReal, n: usize) -> ExtReal {
    let n = n as f64;
    let e = if eps == 0.0 {
        0.0
    } else {
        match rho {
            Finite(r) => eps.powf(n / r),
            Infinity => 1.0,
        }
    };
    let den = (-n * theta).exp() - e;
    if den <= 0.0 {
        Infinity
    } else {
        Finite((1.0 - e) / den)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsCapacityBound {
    pub theta: ExtReal,
    /// Bound on the size of an ε-stable set of `G`.
    pub alpha_bound: ExtReal,
    pub vacuous: bool,
    /// `C(G; ε) ≤ ϑ(G, ρ)`, stated when `ε < e^{-ρ ϑ}`.
    pub capacity_bound: ExtReal,
    pub capacity_valid: bool,
}

pub fn eps_capacity_bound(
    g: &WeightedGraph,
    eps: f64,
    rho: ExtReal,
    opts: &SolverOptions,
) -> Result<EpsCapacityBound> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidInput(format!("ε = {eps} outside [0, 1)")));
    }
    let th = solve_theta_graph(g, rho, opts)?;
    let alpha = stable_set_bound(th.value.to_f64(), eps, rho, 1);
    let threshold = scaled(rho, th.value).exp_neg();
    let capacity_valid = eps < threshold || (eps == 0.0 && th.value.is_finite());
    Ok(EpsCapacityBound {
        theta: th.value,
        alpha_bound: alpha,
        vacuous: alpha.is_infinite(),
        capacity_bound: th.value,
        capacity_valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{build_hamming, build_pentagon, to_similarity};

    fn opts() -> SolverOptions {
        SolverOptions {
            starts: 2,
            ..Default::default()
        }
    }

    #[test]
    fn umbrella_binary() {
        let p = umbrella_point(&build_hamming(2).unwrap(), Finite(1.0), &opts()).unwrap();
        assert!((p.r - 0.379885).abs() < 1e-6);
        assert!((p.delta.to_f64() - 0.379885).abs() < 1e-6);
        let z = DistanceMatrix::from_finite(vec![vec![0.0; 2]; 2]).unwrap();
        let p = umbrella_point(&z, Finite(3.0), &opts()).unwrap();
        assert_eq!((p.r, p.delta), (0.0, Finite(0.0)));
    }

    #[test]
    fn umbrella_pentagon_capacity() {
        let p = umbrella_point(&build_pentagon(), Infinity, &opts()).unwrap();
        assert!((p.r - 0.5 * 5f64.ln()).abs() < 1e-6);
        assert_eq!(p.delta, Infinity);
    }

    #[test]
    fn general_elias_reductions() {
        let d = build_hamming(2).unwrap();
        let p = Composition::new(vec![0.3, 0.7]).unwrap();
        let single = StochasticMatrix::from_rows(vec![p.clone()]).unwrap();
        let ge = general_elias_point(&d, Finite(2.0), &Composition::uniform(1), &single, &opts())
            .unwrap();
        let up = umbrella_p_point(&d, Finite(2.0), &p, &opts()).unwrap();
        assert!((ge.r - up.r).abs() < 1e-9 && (ge.delta.to_f64() - up.delta.to_f64()).abs() < 1e-8);
        let det = general_elias_point(
            &d,
            Finite(2.0),
            &Composition::uniform(2),
            &StochasticMatrix::identity(2),
            &opts(),
        )
        .unwrap();
        assert!((det.r - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(det.delta, Finite(0.0));
    }

    #[test]
    fn circ_sym_uniform_matches_umbrella_p() {
        let d = build_hamming(3).unwrap();
        let u = Composition::uniform(3);
        let c = circ_sym_point(&d, &u, Finite(1.0), &opts()).unwrap();
        let up = umbrella_p_point(&d, Finite(1.0), &u, &opts()).unwrap();
        assert!((c.r - up.r).abs() < 1e-9);
    }

    #[test]
    fn eps_capacity_examples() {
        let g = to_similarity(&build_pentagon());
        let b = eps_capacity_bound(&g, 0.0, Infinity, &opts()).unwrap();
        assert!((b.alpha_bound.to_f64() - 5f64.sqrt()).abs() < 1e-5);
        assert!((b.capacity_bound.to_f64() - 0.5 * 5f64.ln()).abs() < 1e-6);
        assert!(b.capacity_valid);
        let h = to_similarity(&build_hamming(2).unwrap());
        let b = eps_capacity_bound(&h, 0.0, Finite(1.0), &opts()).unwrap();
        assert!((b.alpha_bound.to_f64() - b.theta.to_f64().exp()).abs() < 1e-12);
        assert!(stable_set_bound(0.5, 0.99, Finite(1.0), 1).is_infinite());
        assert!(eps_capacity_bound(&h, 1.0, Finite(1.0), &opts()).is_err());
    }
}
