//! Network instance description.

use crate::error::{Error, Result};

/// A problem instance: `M` clients served over `K` frames of `T` slots,
/// with per-client channel reliability `p_i`, weight `alpha_i` and initial
/// age `h1_i` (in frames).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    slots_per_frame: u32,
    horizon: u64,
    channel_reliability: Vec<f64>,
    weight: Vec<f64>,
    initial_aoi: Vec<u64>,
}

impl NetworkConfig {
    /// Builds and validates a network instance. `p`, `alpha` and `h1` must
    /// all have one entry per client.
    pub fn new(
        slots_per_frame: u32,
        horizon: u64,
        p: Vec<f64>,
        alpha: Vec<f64>,
        h1: Vec<u64>,
    ) -> Result<Self> {
        let m = p.len();
        if m == 0 {
            return Err(Error::InvalidConfig {
                field: "clients",
                detail: "at least one client is required".into(),
            });
        }
        if alpha.len() != m || h1.len() != m {
            return Err(Error::InvalidConfig {
                field: "clients",
                detail: format!(
                    "per-client vectors disagree on length: p={}, alpha={}, h1={}",
                    m,
                    alpha.len(),
                    h1.len()
                ),
            });
        }
        if slots_per_frame == 0 {
            return Err(Error::InvalidConfig {
                field: "T",
                detail: "slots per frame must be >= 1".into(),
            });
        }
        if horizon == 0 {
            return Err(Error::InvalidConfig {
                field: "K",
                detail: "horizon must be >= 1 frame".into(),
            });
        }
        for (i, &pi) in p.iter().enumerate() {
            if !(pi > 0.0 && pi <= 1.0) {
                return Err(Error::InvalidConfig {
                    field: "p",
                    detail: format!("client {i}: p must lie in (0, 1], got {pi}"),
                });
            }
        }
        for (i, &ai) in alpha.iter().enumerate() {
            if !(ai > 0.0 && ai.is_finite()) {
                return Err(Error::InvalidConfig {
                    field: "alpha",
                    detail: format!("client {i}: alpha must be positive, got {ai}"),
                });
            }
        }
        for (i, &hi) in h1.iter().enumerate() {
            if hi == 0 {
                return Err(Error::InvalidConfig {
                    field: "h1",
                    detail: format!("client {i}: initial AoI must be >= 1 frame"),
                });
            }
        }
        Ok(Self {
            slots_per_frame,
            horizon,
            channel_reliability: p,
            weight: alpha,
            initial_aoi: h1,
        })
    }

    /// Instance with every client sharing the same `p` and `alpha`, and
    /// `h1 = 1` everywhere.
    pub fn symmetric(num_clients: usize, slots_per_frame: u32, horizon: u64, p: f64, alpha: f64) -> Result<Self> {
        Self::new(
            slots_per_frame,
            horizon,
            vec![p; num_clients],
            vec![alpha; num_clients],
            vec![1; num_clients],
        )
    }

    pub fn num_clients(&self) -> usize {
        self.channel_reliability.len()
    }

    pub fn slots_per_frame(&self) -> u32 {
        self.slots_per_frame
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn p(&self) -> &[f64] {
        &self.channel_reliability
    }

    pub fn alpha(&self) -> &[f64] {
        &self.weight
    }

    pub fn h1(&self) -> &[u64] {
        &self.initial_aoi
    }

    pub fn sum_alpha(&self) -> f64 {
        self.weight.iter().sum()
    }

    /// True when all clients share the same `p` and `alpha`.
    pub fn is_symmetric(&self) -> bool {
        self.channel_reliability.windows(2).all(|w| w[0] == w[1])
            && self.weight.windows(2).all(|w| w[0] == w[1])
    }
}
