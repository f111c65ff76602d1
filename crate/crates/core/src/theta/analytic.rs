use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::simplex::Composition;

/// Closed-form `ϑ(ρ, Q)` for two symbols at distance 1.
pub fn binary_theta_analytic(rho: ExtReal, q: &Composition) -> Result<f64> {
    binary_theta_analytic_with(1.0, rho, q)
}

/// Closed-form `ϑ(ρ, Q)` for two symbols at distance `d01`.
///
/// The optimal vectors lie in a plane at angle `2α` with `cos 2α = e^{-d01/ρ}`,
/// and the handle sits at `α - β` from `u_0` with `sin 2β = (Q(0) - Q(1)) sin 2α`.
pub fn binary_theta_analytic_with(d01: f64, rho: ExtReal, q: &Composition) -> Result<f64> {
    if q.len() != 2 {
        return Err(Error::InvalidInput(
            "binary theta needs a distribution on two symbols".into(),
        ));
    }
    if !(d01 >= 0.0) {
        return Err(Error::InvalidInput(format!("distance {d01} is negative")));
    }
    if let ExtReal::Finite(r) = rho {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("ρ must be positive, got {r}")));
        }
    }
    let c = if d01.is_infinite() {
        0.0
    } else {
        ExtReal::Finite(d01).exp_neg_scaled(rho.finite())
    };
    let alpha = 0.5 * c.clamp(-1.0, 1.0).acos();
    let beta = 0.5
        * ((q[0] - q[1]) * (2.0 * alpha).sin())
            .clamp(-1.0, 1.0)
            .asin();
    let term = |w: f64, angle: f64| {
        if w == 0.0 {
            0.0
        } else {
            -2.0 * w * angle.cos().ln()
        }
    };
    Ok(term(q[0], alpha - beta) + term(q[1], alpha + beta))
}

/// Lower bound `(Mc - 1)/(M - 1)` on the largest pairwise inner product of
/// `M` unit vectors whose squared inner products with a common unit vector
/// are at least `c`.
pub fn spherical_bound(m: usize, c: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two vectors, got {m}"
        )));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidInput(format!("c = {c} outside (0, 1]")));
    }
    Ok((m as f64 * c - 1.0) / (m as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::{Finite, Infinity};
    use rand::{Rng, SeedableRng};

    #[test]
    fn uniform_at_rho_one() {
        let v = binary_theta_analytic(Finite(1.0), &Composition::uniform(2)).unwrap();
        let alpha = 0.5 * (-1f64).exp().acos();
        assert!((v + 2.0 * alpha.cos().ln()).abs() < 1e-15);
        assert!((v - 0.379885).abs() < 1e-6);
    }

    #[test]
    fn point_mass_is_zero() {
        let v = binary_theta_analytic(Finite(1.0), &Composition::point_mass(2, 0)).unwrap();
        assert!(v.abs() < 1e-15);
        assert_eq!(
            binary_theta_analytic(Infinity, &Composition::uniform(2)).unwrap(),
            0.0
        );
    }

    #[test]
    fn orthogonal_limit() {
        let v = binary_theta_analytic_with(f64::INFINITY, Finite(1.0), &Composition::uniform(2))
            .unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-14);
    }

    #[test]
    fn spherical_examples() {
        assert_eq!(spherical_bound(5, 0.5).unwrap(), 0.375);
        assert_eq!(spherical_bound(9, 1.0).unwrap(), 1.0);
        assert!(spherical_bound(1, 0.5).is_err());
    }

    #[test]
    fn spherical_bound_holds_on_random_sets() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let dim = rng.random_range(2..5);
            let m = rng.random_range(2..7);
            let unit = |v: Vec<f64>| {
                let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.into_iter().map(|a| a / n).collect::<Vec<f64>>()
            };
            let w = unit((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
            let vs: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    let v: Vec<f64> = (0..dim)
                        .map(|i| w[i] + 0.7 * rng.random_range(-1.0..1.0))
                        .collect();
                    unit(v)
                })
                .collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let c = vs
                .iter()
                .map(|v| dot(v, &w).powi(2))
                .fold(f64::INFINITY, f64::min);
            if c <= 0.0 {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for i in 0..m {
                for j in (i + 1)..m {
                    best = best.max(dot(&vs[i], &vs[j]).abs());
                }
            }
            assert!(best >= spherical_bound(m, c).unwrap() - 1e-12);
        }
    }
}
