//! Closed-form performance analytics on the objective (J) scale.
//!
//! The universal lower bound holds for every admissible policy; each policy
//! has its own upper bound, and the guarantee ratio `rho = U_B / L_B`
//! certifies that policy within that factor of optimal. All values here are
//! long-horizon limits; simulations at large K land between the matching
//! bounds.

use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// Universal lower bound on the objective:
///
/// ```text
/// L_B = (1/(2MT)) * (sum_i sqrt(alpha_i/p_i))^2 + (1/(2M)) * sum_i alpha_i
/// ```
pub fn lower_bound(config: &NetworkConfig) -> f64 {
    let m = config.num_clients() as f64;
    let t = config.slots_per_frame() as f64;
    let s = sqrt_alpha_over_p_sum(config);
    s * s / (2.0 * m * t) + config.sum_alpha() / (2.0 * m)
}

fn sqrt_alpha_over_p_sum(config: &NetworkConfig) -> f64 {
    config
        .alpha()
        .iter()
        .zip(config.p())
        .map(|(&a, &p)| (a / p).sqrt())
        .sum()
}

/// Population mean and variance of `1/p_i`, computed on values shifted by the
/// first entry so that identical inputs give a variance of exactly zero.
fn inverse_p_moments(p: &[f64]) -> (f64, f64) {
    let m = p.len() as f64;
    let shift = 1.0 / p[0];
    let shifted: Vec<f64> = p.iter().map(|&pi| 1.0 / pi - shift).collect();
    let mean_shifted = shifted.iter().sum::<f64>() / m;
    let var = shifted
        .iter()
        .map(|&y| (y - mean_shifted) * (y - mean_shifted))
        .sum::<f64>()
        / m;
    (shift + mean_shifted, var)
}

/// Coefficient of variation of `{1/p_i}`: zero exactly when all reliabilities
/// are equal.
pub fn coeff_variation(p: &[f64]) -> f64 {
    let (mean, var) = inverse_p_moments(p);
    var.sqrt() / mean
}

/// Upper bound on the Greedy objective.
///
/// The finite-population form (`asymptotic = false`) is a true bound for any
/// M but requires `(1/T) * sum(1/p_i) > 1`; otherwise it reports
/// [`Error::GreedyBoundInfeasible`]. The asymptotic form is the large-M
/// simplification used by [`rho_greedy`] and is not a valid bound for small
/// networks.
pub fn ub_greedy(config: &NetworkConfig, asymptotic: bool) -> Result<f64> {
    let m = config.num_clients() as f64;
    let t = config.slots_per_frame() as f64;
    let a = config.sum_alpha();
    let b: f64 = config.p().iter().map(|&p| 1.0 / p).sum();
    if asymptotic {
        let cv = coeff_variation(config.p());
        return Ok(a * b * (1.0 + cv * cv / m) / (2.0 * m * t) + a / (2.0 * m));
    }
    let load = b / t;
    if load <= 1.0 {
        return Err(Error::GreedyBoundInfeasible { load });
    }
    let l = load - 1.0;
    let (_, var) = inverse_p_moments(config.p());
    let y = 1.0
        + 1.0 / m
        + (4.0 - 1.0 / t + 2.0 / m) / l
        + (4.0 - 1.0 / t + 1.0 / m + m / (t * t) * var) / (l * l);
    Ok(a * l * y / (2.0 * m) + a / (2.0 * m))
}

/// Greedy guarantee ratio (asymptotic bound over the lower bound):
///
/// ```text
/// rho_G = [ A*B*(1 + C_V^2/M) + T*A ] / [ S^2 + T*A ]
/// ```
///
/// with `A = sum(alpha)`, `B = sum(1/p)`, `S = sum(sqrt(alpha/p))`. Computed
/// as `1 + gap/denominator` where the Cauchy-Schwarz gap `A*B - S^2` is the
/// pair sum `sum_{i<j} (sqrt(a_i*b_j) - sqrt(a_j*b_i))^2`: both gap pieces are
/// sums of squares, so `rho >= 1` always and `rho == 1.0` exactly on
/// symmetric networks.
pub fn rho_greedy(config: &NetworkConfig) -> f64 {
    let m = config.num_clients() as f64;
    let t = config.slots_per_frame() as f64;
    let a = config.sum_alpha();
    let b: f64 = config.p().iter().map(|&p| 1.0 / p).sum();
    let s = sqrt_alpha_over_p_sum(config);
    let cv = coeff_variation(config.p());

    let mut pair_gap = 0.0;
    let (alpha, p) = (config.alpha(), config.p());
    for i in 0..alpha.len() {
        for j in (i + 1)..alpha.len() {
            let d = (alpha[i] / p[j]).sqrt() - (alpha[j] / p[i]).sqrt();
            pair_gap += d * d;
        }
    }
    1.0 + (pair_gap + a * b * cv * cv / m) / (s * s + t * a)
}

/// Probability that the stationary randomized policy delivers a packet to
/// client `i` within one frame.
///
/// `exact = true` conditions on the binomial number of slots in which the
/// client is selected:
///
/// ```text
/// E[d_i] = sum_{s=0}^{T} [1 - (1-p_i)^s] * C(T,s) * q^s * (1-q)^(T-s),
/// q = beta_i / sum(beta)
/// ```
///
/// `exact = false` returns the closed-form lower bound
/// `p_i*T*beta_i / (sum(beta) + (T-1)*beta_i)` used inside the upper bounds.
pub fn expected_delivery_prob(
    config: &NetworkConfig,
    beta: &[f64],
    client: usize,
    exact: bool,
) -> f64 {
    debug_assert_eq!(beta.len(), config.num_clients());
    debug_assert!(beta.iter().all(|&b| b > 0.0));
    let t = config.slots_per_frame();
    let p = config.p()[client];
    let total: f64 = beta.iter().sum();
    if !exact {
        return p * t as f64 * beta[client] / (total + (t as f64 - 1.0) * beta[client]);
    }
    let q = beta[client] / total;
    let mut sum = 0.0;
    let mut binom = 1.0; // C(T, s), updated multiplicatively
    for s in 0..=t {
        let weight = binom * q.powi(s as i32) * (1.0 - q).powi((t - s) as i32);
        sum += (1.0 - (1.0 - p).powi(s as i32)) * weight;
        binom *= (t - s) as f64 / (s + 1) as f64;
    }
    sum
}

/// Long-horizon objective of the randomized policy, exact via renewal-reward:
/// `(1/M) * sum_i alpha_i / E[d_i]` with the exact delivery probability.
pub fn randomized_analytic_objective(config: &NetworkConfig, beta: &[f64]) -> f64 {
    let m = config.num_clients() as f64;
    config
        .alpha()
        .iter()
        .enumerate()
        .map(|(i, &a)| a / expected_delivery_prob(config, beta, i, true))
        .sum::<f64>()
        / m
}

/// Upper bound on the randomized policy's objective:
///
/// ```text
/// U_B^R = (1/(TM)) * sum(beta) * sum(alpha_i/(p_i*beta_i))
///       + ((T-1)/(TM)) * sum(alpha_i/p_i)
/// ```
pub fn ub_randomized(config: &NetworkConfig, beta: &[f64]) -> f64 {
    let m = config.num_clients() as f64;
    let t = config.slots_per_frame() as f64;
    let total_beta: f64 = beta.iter().sum();
    let weighted: f64 = config
        .alpha()
        .iter()
        .zip(config.p())
        .zip(beta)
        .map(|((&a, &p), &b)| a / (p * b))
        .sum();
    let inv_weighted: f64 = config
        .alpha()
        .iter()
        .zip(config.p())
        .map(|(&a, &p)| a / p)
        .sum();
    total_beta * weighted / (t * m) + (t - 1.0) * inv_weighted / (t * m)
}

/// Randomized guarantee ratio (equals `ub_randomized / lower_bound`).
pub fn rho_randomized(config: &NetworkConfig, beta: &[f64]) -> f64 {
    ub_randomized(config, beta) / lower_bound(config)
}

/// Upper bound on the Max-Weight objective:
/// `U_B^MW = (2/(MT)) * [ S^2 + (T-1) * sum(alpha/p) ]`.
pub fn ub_maxweight(config: &NetworkConfig) -> f64 {
    let m = config.num_clients() as f64;
    let t = config.slots_per_frame() as f64;
    let s = sqrt_alpha_over_p_sum(config);
    let inv_weighted: f64 = config
        .alpha()
        .iter()
        .zip(config.p())
        .map(|(&a, &p)| a / p)
        .sum();
    2.0 / (m * t) * (s * s + (t - 1.0) * inv_weighted)
}

/// Max-Weight guarantee ratio (equals `ub_maxweight / lower_bound`).
pub fn rho_maxweight(config: &NetworkConfig) -> f64 {
    ub_maxweight(config) / lower_bound(config)
}

/// Inflated weights entering the Whittle bound:
/// `alpha~_i = (alpha_i/2) * (2/(1-(1-p_i)^T) + 1)^2`. Always exceeds
/// `alpha_i`, and equals `4.5 * alpha_i` at `p_i = 1`.
pub fn alpha_tilde(alpha: &[f64], p: &[f64], slots_per_frame: u32) -> Vec<f64> {
    alpha
        .iter()
        .zip(p)
        .map(|(&a, &pi)| {
            let q = 1.0 - (1.0 - pi).powi(slots_per_frame as i32);
            let factor = 2.0 / q + 1.0;
            a / 2.0 * factor * factor
        })
        .collect()
}

/// Upper bound on the Whittle index policy's objective: the Max-Weight bound
/// with `alpha` replaced by `alpha~` in the numerator sums.
pub fn ub_whittle(config: &NetworkConfig) -> f64 {
    let m = config.num_clients() as f64;
    let t = config.slots_per_frame() as f64;
    let tilde = alpha_tilde(config.alpha(), config.p(), config.slots_per_frame());
    let s: f64 = tilde
        .iter()
        .zip(config.p())
        .map(|(&a, &p)| (a / p).sqrt())
        .sum();
    let inv_weighted: f64 = tilde.iter().zip(config.p()).map(|(&a, &p)| a / p).sum();
    2.0 / (m * t) * (s * s + (t - 1.0) * inv_weighted)
}

/// Whittle guarantee ratio (equals `ub_whittle / lower_bound`).
pub fn rho_whittle(config: &NetworkConfig) -> f64 {
    ub_whittle(config) / lower_bound(config)
}

/// All analytics for one network, evaluated with the given randomized
/// weights. Everything is on the J scale; convert through
/// [`crate::model::ewsaoi_from_objective`] for the AoI metric scale.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub lower_bound: f64,
    pub cv: f64,
    /// Finite-population Greedy bound; `None` when `(1/T)*sum(1/p) <= 1`.
    pub ub_greedy: Option<f64>,
    /// Large-M Greedy expression backing `rho_greedy` (not a bound at small M).
    pub ub_greedy_asymptotic: f64,
    pub ub_randomized: f64,
    pub ub_maxweight: f64,
    pub ub_whittle: f64,
    pub rho_greedy: f64,
    pub rho_randomized: f64,
    pub rho_maxweight: f64,
    pub rho_whittle: f64,
    pub alpha_tilde: Vec<f64>,
    pub analytic_randomized_objective: f64,
    /// The randomized weights the randomized entries were evaluated with.
    pub beta: Vec<f64>,
}

pub fn bounds_report(config: &NetworkConfig, beta: &[f64]) -> BoundsReport {
    BoundsReport {
        lower_bound: lower_bound(config),
        cv: coeff_variation(config.p()),
        ub_greedy: ub_greedy(config, false).ok(),
        ub_greedy_asymptotic: ub_greedy(config, true).expect("asymptotic form is total"),
        ub_randomized: ub_randomized(config, beta),
        ub_maxweight: ub_maxweight(config),
        ub_whittle: ub_whittle(config),
        rho_greedy: rho_greedy(config),
        rho_randomized: rho_randomized(config, beta),
        rho_maxweight: rho_maxweight(config),
        rho_whittle: rho_whittle(config),
        alpha_tilde: alpha_tilde(config.alpha(), config.p(), config.slots_per_frame()),
        analytic_randomized_objective: randomized_analytic_objective(config, beta),
        beta: beta.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(t: u32, p: Vec<f64>, alpha: Vec<f64>) -> NetworkConfig {
        let m = p.len();
        NetworkConfig::new(t, 1000, p, alpha, vec![1; m]).unwrap()
    }

    #[test]
    fn lower_bound_hand_values() {
        let c = cfg(1, vec![1.0, 1.0], vec![1.0, 1.0]);
        assert!((lower_bound(&c) - 1.5).abs() < 1e-15);
        let c = cfg(1, vec![0.5], vec![1.0]);
        assert!((lower_bound(&c) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn coeff_variation_values() {
        assert_eq!(coeff_variation(&[0.3, 0.3, 0.3]), 0.0);
        // 1/p = [1, 3]: mean 2, population variance 1, C_V = 1/2.
        assert!((coeff_variation(&[1.0, 1.0 / 3.0]) - 0.5).abs() < 1e-15);
        assert!(coeff_variation(&[0.9, 0.2]) > 0.0);
    }

    #[test]
    fn greedy_bound_forms() {
        // M=2, T=1, p=[0.5,0.5]: asymptotic = (1/4)*2*4 + (1/4)*2 = 2.5.
        let c = cfg(1, vec![0.5, 0.5], vec![1.0, 1.0]);
        assert!((ub_greedy(&c, true).unwrap() - 2.5).abs() < 1e-12);

        // Finite form: L = 3, Y = 1.5 + 4/3 + 3.5/9, U = (1/4)*2*L*Y + 0.5.
        let y = 1.5 + 4.0 / 3.0 + 3.5 / 9.0;
        assert!((ub_greedy(&c, false).unwrap() - (1.5 * y + 0.5)).abs() < 1e-12);

        // Infeasible when (1/T)*sum(1/p) <= 1.
        let c = cfg(2, vec![1.0, 1.0], vec![1.0, 1.0]);
        assert!(matches!(
            ub_greedy(&c, false),
            Err(Error::GreedyBoundInfeasible { .. })
        ));
        assert!(ub_greedy(&c, true).is_ok());
    }

    #[test]
    fn rho_greedy_symmetric_is_exactly_one() {
        for m in [2usize, 3, 5, 17] {
            for p in [0.1, 1.0 / 3.0, 0.62, 1.0] {
                let c = cfg(3, vec![p; m], vec![0.7; m]);
                assert_eq!(rho_greedy(&c), 1.0, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn rho_greedy_matches_direct_formula() {
        let c = cfg(1, vec![1.0, 0.25], vec![1.0, 1.0]);
        let cv = coeff_variation(c.p());
        let direct = (2.0 * 5.0 * (1.0 + cv * cv / 2.0) + 2.0)
            / ((1.0f64.sqrt() + 4.0f64.sqrt()).powi(2) + 2.0);
        assert!((rho_greedy(&c) - direct).abs() < 1e-12);
        assert!(rho_greedy(&c) > 1.0);
        // Also consistent with the asymptotic bound ratio.
        let ratio = ub_greedy(&c, true).unwrap() / lower_bound(&c);
        assert!((rho_greedy(&c) - ratio).abs() < 1e-12);
    }

    #[test]
    fn delivery_prob_examples() {
        // T=1 collapses to q*p.
        let c = cfg(1, vec![0.7, 0.2], vec![1.0, 1.0]);
        let b = [2.0, 1.0];
        assert!((expected_delivery_prob(&c, &b, 0, true) - 2.0 / 3.0 * 0.7).abs() < 1e-15);

        // M=1, T=2: 1 - (1-p)^2.
        let c = cfg(2, vec![0.3], vec![1.0]);
        assert!((expected_delivery_prob(&c, &[1.0], 0, true) - (1.0 - 0.49)).abs() < 1e-12);

        // M=2, T=2, beta=[1,1], p0=0.5: exact 0.4375, bound 1/3.
        let c = cfg(2, vec![0.5, 0.9], vec![1.0, 1.0]);
        let b = [1.0, 1.0];
        assert!((expected_delivery_prob(&c, &b, 0, true) - 0.4375).abs() < 1e-12);
        assert!((expected_delivery_prob(&c, &b, 0, false) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn randomized_objective_and_bound() {
        // M=1, T=1, p=0.5: J = 2.
        let c = cfg(1, vec![0.5], vec![1.0]);
        assert!((randomized_analytic_objective(&c, &[1.0]) - 2.0).abs() < 1e-12);
        // M=1, T=1, p=0.5: U_B^R = 2, rho = 2/1.5.
        assert!((ub_randomized(&c, &[1.0]) - 2.0).abs() < 1e-12);
        assert!((rho_randomized(&c, &[1.0]) - 4.0 / 3.0).abs() < 1e-12);

        // M=2, T=1, p=1: J = 2.
        let c = cfg(1, vec![1.0, 1.0], vec![1.0, 1.0]);
        assert!((randomized_analytic_objective(&c, &[1.0, 1.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn maxweight_and_whittle_ratios() {
        // M=1, T=1, p=1: rho_MW = 4*1/(1+1) = 2.
        let c = cfg(1, vec![1.0], vec![1.0]);
        assert!((rho_maxweight(&c) - 2.0).abs() < 1e-12);

        // Symmetric T=1: rho_MW simplifies to 4M/(M+p).
        for m in [1usize, 2, 8, 32] {
            for p in [0.25, 0.8] {
                let c = cfg(1, vec![p; m], vec![1.0; m]);
                let simplified = 4.0 * m as f64 / (m as f64 + p);
                assert!((rho_maxweight(&c) - simplified).abs() < 1e-9, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn alpha_tilde_values() {
        let tilde = alpha_tilde(&[1.0, 2.0], &[1.0, 1.0], 3);
        assert!((tilde[0] - 4.5).abs() < 1e-12);
        assert!((tilde[1] - 9.0).abs() < 1e-12);
        // p=0.5, T=1: (1/2)*(4+1)^2 = 12.5.
        let tilde = alpha_tilde(&[1.0], &[0.5], 1);
        assert!((tilde[0] - 12.5).abs() < 1e-12);
    }

    #[test]
    fn whittle_ratio_dominates_maxweight() {
        let configs = [
            cfg(1, vec![0.9, 0.2], vec![1.0, 3.0]),
            cfg(2, vec![0.5, 0.5, 0.8], vec![1.0, 1.0, 0.4]),
            cfg(4, vec![0.33], vec![2.0]),
        ];
        for c in &configs {
            assert!(rho_whittle(c) >= rho_maxweight(c));
            assert!(rho_whittle(c) >= 1.0 && rho_maxweight(c) > 1.0);
        }
    }
}
