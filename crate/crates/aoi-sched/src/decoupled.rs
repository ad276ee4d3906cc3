//! Single-client model with a per-transmission service charge.
//!
//! Viewed frame by frame, the optimal policy is a threshold rule: idle while
//! the age is below `H`, otherwise transmit until the packet is delivered or
//! the frame ends. The threshold and the long-run average cost per frame both
//! have closed forms; [`simulate`] provides an empirical cross-check of the
//! latter at slot-level charge accounting.

use rand::Rng;

use crate::error::{Error, Result};

/// Parameters of the charged single-client problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoupledParams {
    /// Service charge per transmission attempt.
    pub charge: f64,
    /// Channel reliability.
    pub p: f64,
    /// Age weight.
    pub alpha: f64,
    /// Slots per frame.
    pub slots_per_frame: u32,
}

impl DecoupledParams {
    pub fn new(charge: f64, p: f64, alpha: f64, slots_per_frame: u32) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidConfig {
                field: "p",
                detail: format!("p must lie in (0, 1], got {p}"),
            });
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidConfig {
                field: "alpha",
                detail: format!("alpha must be positive, got {alpha}"),
            });
        }
        if !(charge >= 0.0) {
            return Err(Error::InvalidConfig {
                field: "charge",
                detail: format!("charge must be nonnegative, got {charge}"),
            });
        }
        if slots_per_frame == 0 {
            return Err(Error::InvalidConfig {
                field: "T",
                detail: "slots per frame must be >= 1".into(),
            });
        }
        Ok(Self { charge, p, alpha, slots_per_frame })
    }

    /// Probability that a transmitting frame fails to deliver: `(1-p)^T`.
    pub fn frame_failure_prob(&self) -> f64 {
        (1.0 - self.p).powi(self.slots_per_frame as i32)
    }

    /// Probability that a transmitting frame delivers: `1 - (1-p)^T`.
    pub fn frame_delivery_prob(&self) -> f64 {
        1.0 - self.frame_failure_prob()
    }

    /// `Z = 1/2 + (1-p)^T / (1 - (1-p)^T)`.
    pub fn z(&self) -> f64 {
        let fail = self.frame_failure_prob();
        0.5 + fail / (1.0 - fail)
    }

    /// Expected charge of a transmitting frame: `C * (1 - (1-p)^T) / p`,
    /// i.e. the charge times the expected number of attempts.
    pub fn expected_frame_charge(&self) -> f64 {
        self.charge * self.frame_delivery_prob() / self.p
    }
}

/// Optimal transmission threshold:
///
/// ```text
/// H = floor( 1 - Z + sqrt(Z^2 + 2C / (p*T*alpha)) )
/// ```
///
/// clamped to at least 1. `H` is nondecreasing in the charge, equals 1 at
/// `C = 0` and grows without bound as `C` does. A tiny epsilon inside the
/// floor keeps boundary charges (where the radical lands exactly on an
/// integer) from rounding down a step.
pub fn threshold_h(params: &DecoupledParams) -> u64 {
    let z = params.z();
    let t = params.slots_per_frame as f64;
    let x = 1.0 - z + (z * z + 2.0 * params.charge / (params.p * t * params.alpha)).sqrt();
    ((x + 1e-9).floor() as u64).max(1)
}

/// Long-run average cost per frame of the threshold policy:
///
/// ```text
/// lambda(H) = alpha / q + [ C/(T*p) + alpha*H*(H-1)/2 ] / [ H + (1-q)/q ]
/// ```
///
/// with `q = 1 - (1-p)^T`. At the threshold from [`threshold_h`] this is the
/// optimal average cost; evaluated at other integer thresholds it gives that
/// suboptimal policy's average cost, which is what the brute-force sweep
/// tests rely on.
pub fn avg_cost(params: &DecoupledParams, threshold: u64) -> f64 {
    debug_assert!(threshold >= 1);
    let q = params.frame_delivery_prob();
    let fail_ratio = params.frame_failure_prob() / q;
    let h = threshold as f64;
    let t = params.slots_per_frame as f64;
    params.alpha / q
        + (params.charge / (t * params.p) + params.alpha * h * (h - 1.0) / 2.0) / (h + fail_ratio)
}

/// Simulates the frame chain under a threshold policy and returns the
/// empirical average cost per frame, `(1/frames) * sum_k (T*alpha*h_k +
/// C*attempts_k) / T`. Charges are accounted per transmission attempt
/// actually made, which matches [`avg_cost`] in expectation.
pub fn simulate<R: Rng + ?Sized>(
    params: &DecoupledParams,
    threshold: u64,
    frames: u64,
    rng: &mut R,
) -> f64 {
    debug_assert!(frames >= 1 && threshold >= 1);
    let t = params.slots_per_frame;
    let mut h: u64 = 1;
    let mut total = 0.0;
    for _ in 0..frames {
        let mut cost = t as f64 * params.alpha * h as f64;
        if h >= threshold {
            let mut delivered = false;
            for _ in 0..t {
                cost += params.charge;
                if rng.gen_bool(params.p) {
                    delivered = true;
                    break;
                }
            }
            h = if delivered { 1 } else { h + 1 };
        } else {
            h += 1;
        }
        total += cost;
    }
    total / (frames as f64 * t as f64)
}
