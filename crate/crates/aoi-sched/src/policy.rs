//! Per-slot scheduling rules.
//!
//! All deterministic policies break ties by lowest client index so that
//! replays and cross-policy equivalence checks are exact. On a symmetric
//! network (shared `p` and `alpha`) the Greedy, Max-Weight and Whittle rules
//! rank clients identically and therefore pick the same client in every
//! state.

use rand::Rng;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// The four scheduling rules.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// Serve the undelivered client with the highest age.
    Greedy,
    /// Sample a client from fixed weights each slot; idle if it was already
    /// served this frame.
    Randomized { beta: Vec<f64> },
    /// Serve the undelivered client with the highest `p*alpha*h*(h+2)`.
    MaxWeight,
    /// Serve the undelivered client with the highest closed-form index.
    WhittleIndex,
}

impl PolicyKind {
    /// Stationary weights `beta_i = sqrt(alpha_i / p_i)`.
    pub fn randomized_sqrt_rule(config: &NetworkConfig) -> Self {
        let beta = config
            .alpha()
            .iter()
            .zip(config.p())
            .map(|(&a, &p)| (a / p).sqrt())
            .collect();
        PolicyKind::Randomized { beta }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::Randomized { .. } => "randomized",
            PolicyKind::MaxWeight => "maxweight",
            PolicyKind::WhittleIndex => "whittle",
        }
    }

    /// Dispatches to the policy's decision rule for one slot.
    pub fn decide<R: Rng + ?Sized>(
        &self,
        aoi: &[u64],
        delivered: &[bool],
        config: &NetworkConfig,
        rng: &mut R,
    ) -> Option<usize> {
        match self {
            PolicyKind::Greedy => greedy_decide(aoi, delivered),
            PolicyKind::Randomized { beta } => randomized_decide(delivered, beta, rng),
            PolicyKind::MaxWeight => maxweight_decide(aoi, delivered, config),
            PolicyKind::WhittleIndex => whittle_decide(aoi, delivered, config),
        }
    }
}

fn argmax_undelivered<F: Fn(usize) -> f64>(delivered: &[bool], key: F) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..delivered.len() {
        if delivered[i] {
            continue;
        }
        let k = key(i);
        match best {
            Some((_, bk)) if k <= bk => {}
            _ => best = Some((i, k)),
        }
    }
    best.map(|(i, _)| i)
}

/// Highest-age-first rule; idles only when every packet is delivered.
pub fn greedy_decide(aoi: &[u64], delivered: &[bool]) -> Option<usize> {
    argmax_undelivered(delivered, |i| aoi[i] as f64)
}

/// Samples client `i` with probability `beta_i / sum(beta)` regardless of
/// delivery status, then idles if that client was already served this frame.
/// The age vector plays no role.
pub fn randomized_decide<R: Rng + ?Sized>(
    delivered: &[bool],
    beta: &[f64],
    rng: &mut R,
) -> Option<usize> {
    debug_assert_eq!(delivered.len(), beta.len());
    debug_assert!(beta.iter().all(|&b| b > 0.0));
    let total: f64 = beta.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut cum = 0.0;
    let mut chosen = beta.len() - 1;
    for (i, &b) in beta.iter().enumerate() {
        cum += b;
        if u < cum {
            chosen = i;
            break;
        }
    }
    if delivered[chosen] {
        None
    } else {
        Some(chosen)
    }
}

/// Drift-minimizing rule: serve the undelivered client maximizing
/// `p_i * alpha_i * h_i * (h_i + 2)`.
pub fn maxweight_decide(aoi: &[u64], delivered: &[bool], config: &NetworkConfig) -> Option<usize> {
    let (p, alpha) = (config.p(), config.alpha());
    argmax_undelivered(delivered, |i| {
        p[i] * alpha[i] * (aoi[i] as f64) * (aoi[i] as f64 + 2.0)
    })
}

/// Closed-form index of a client at age `h`:
///
/// ```text
/// C(h) = p * alpha * h * [ h + (1 + (1-p)^T) / (1 - (1-p)^T) ]
/// ```
///
/// Strictly increasing in `h`; for `p = 1` the bracket collapses to `h + 1`.
pub fn whittle_index(h: u64, p: f64, alpha: f64, slots_per_frame: u32) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::ZeroChannelProbability);
    }
    let fail = (1.0 - p).powi(slots_per_frame as i32);
    let h = h as f64;
    Ok(p * alpha * h * (h + (1.0 + fail) / (1.0 - fail)))
}

/// Serve the undelivered client with the highest [`whittle_index`].
pub fn whittle_decide(aoi: &[u64], delivered: &[bool], config: &NetworkConfig) -> Option<usize> {
    let (p, alpha, t) = (config.p(), config.alpha(), config.slots_per_frame());
    argmax_undelivered(delivered, |i| {
        // p > 0 is a config invariant, so the index is always defined.
        whittle_index(aoi[i], p[i], alpha[i], t).expect("validated config")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(t: u32, p: Vec<f64>, alpha: Vec<f64>) -> NetworkConfig {
        let m = p.len();
        NetworkConfig::new(t, 100, p, alpha, vec![1; m]).unwrap()
    }

    #[test]
    fn greedy_examples() {
        let none = vec![false; 5];
        assert_eq!(greedy_decide(&[7, 5, 4, 2, 2], &none), Some(0));
        let mut d = none.clone();
        d[0] = true;
        assert_eq!(greedy_decide(&[7, 5, 4, 2, 2], &d), Some(1));
        assert_eq!(greedy_decide(&[3, 3], &[false, false]), Some(0));
        assert_eq!(greedy_decide(&[3, 3], &[true, true]), None);
    }

    #[test]
    fn maxweight_examples() {
        let config = cfg(1, vec![0.5, 1.0], vec![1.0, 1.0]);
        // Weights: 0.5*3*5 = 7.5 vs 1*2*4 = 8.
        assert_eq!(maxweight_decide(&[3, 2], &[false, false], &config), Some(1));
        assert_eq!(maxweight_decide(&[3, 2], &[true, true], &config), None);
    }

    #[test]
    fn whittle_index_examples() {
        assert_eq!(whittle_index(3, 1.0, 1.0, 1).unwrap(), 12.0);
        assert_eq!(whittle_index(1, 0.5, 1.0, 1).unwrap(), 2.0);
        assert!(whittle_index(1, 0.0, 1.0, 1).is_err());
        // Strictly increasing in h.
        let mut prev = 0.0;
        for h in 1..=100 {
            let v = whittle_index(h, 0.37, 0.8, 3).unwrap();
            assert!(v > prev, "index not increasing at h={h}");
            prev = v;
        }
    }

    #[test]
    fn whittle_decide_examples() {
        let config = cfg(1, vec![1.0, 1.0], vec![1.0, 1.0]);
        // Indices (6, 12).
        assert_eq!(whittle_decide(&[2, 3], &[false, false], &config), Some(1));
        assert_eq!(whittle_decide(&[2, 3], &[true, true], &config), None);
    }

    #[test]
    fn symmetric_policies_agree_with_greedy() {
        let config = cfg(4, vec![0.6; 3], vec![2.0; 3]);
        for h in [[1, 1, 1], [5, 2, 9], [4, 4, 1], [7, 7, 7]] {
            for mask in 0..8u32 {
                let delivered: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
                let g = greedy_decide(&h, &delivered);
                assert_eq!(g, maxweight_decide(&h, &delivered, &config));
                assert_eq!(g, whittle_decide(&h, &delivered, &config));
            }
        }
    }

    #[test]
    fn randomized_single_client_and_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(randomized_decide(&[false], &[1.0], &mut rng), Some(0));

        // M=2, beta=[1,1], client 0 already served: idle w.p. 1/2.
        let mut idles = 0u32;
        let n = 100_000;
        for _ in 0..n {
            match randomized_decide(&[true, false], &[1.0, 1.0], &mut rng) {
                None => idles += 1,
                Some(1) => {}
                Some(i) => panic!("sampled delivered client {i}"),
            }
        }
        // 3 sigma around n/2 for a fair coin.
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((idles as f64 - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn randomized_sqrt_rule_weights() {
        let config = cfg(1, vec![0.25, 1.0], vec![1.0, 4.0]);
        match PolicyKind::randomized_sqrt_rule(&config) {
            PolicyKind::Randomized { beta } => {
                assert!((beta[0] - 2.0).abs() < 1e-15);
                assert!((beta[1] - 2.0).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
    }
}
