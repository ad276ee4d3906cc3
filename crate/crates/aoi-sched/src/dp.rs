//! Exact finite-horizon optimum by backward induction over slots.
//!
//! The state inside a frame is the age vector plus the set of clients already
//! served this frame; the age cost is accrued once per frame at its start.
//! Ages are never truncated: the per-client range at frame `k` is
//! `1..=k-1+h1_i`, so the recursion is exact, at the price of a state space
//! that grows like `(K + max h1)^M * 2^M * T`. A budget guard refuses
//! instances that would blow past it (the practical regime is M <= 3; note
//! the solve *time* additionally scales with K).
//!
//! Value storage is rolling: two slot layers plus two frame-start layers.
//! Retaining the per-slot decision table is opt-in and multiplies memory by
//! the number of frame-slots.

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::model::ewsaoi_from_objective;

/// Solver knobs.
#[derive(Debug, Clone)]
pub struct DpOptions {
    /// Maximum `h_cap^M * 2^M * T` state-slots before refusing.
    pub state_budget: f64,
    /// Keep the per-slot argmin table so decisions can be queried afterwards.
    pub retain_policy: bool,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self {
            state_budget: 1e9,
            retain_policy: false,
        }
    }
}

/// A slot-level state for decision lookups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpStateKey {
    /// Frame index, 1..=K.
    pub frame: u64,
    /// Slot index within the frame, 1..=T.
    pub slot: u32,
    /// Frame-start age vector.
    pub aoi: Vec<u64>,
    /// Bit i set means client i already received its packet this frame.
    pub delivered_mask: u32,
}

/// Output of [`dp_optimal`].
#[derive(Debug, Clone)]
pub struct DpSolution {
    /// Exact minimum of the expected objective over all admissible policies.
    pub optimal_objective: f64,
    /// The same optimum on the weighted-sum AoI scale.
    pub optimal_ewsaoi: f64,
    /// The guard metric `h_cap^M * 2^M * T` of this instance.
    pub state_slots: f64,
    num_clients: usize,
    horizon: u64,
    slots_per_frame: u32,
    h1: Vec<u64>,
    h_cap: u64,
    strides: Vec<usize>,
    // table[(k-1)*T + (n-1)][mask * S_h + h_idx] = 0 for idle, i+1 for client i.
    table: Option<Vec<Vec<u8>>>,
}

/// Computes the guard metric for an instance without solving it.
pub fn state_slots(config: &NetworkConfig) -> f64 {
    let h_cap = (config.horizon() + config.h1().iter().copied().max().unwrap_or(1)) as f64;
    let m = config.num_clients();
    h_cap.powi(m as i32) * 2f64.powi(m as i32) * config.slots_per_frame() as f64
}

/// Do-while counter over the age box `[1..=caps[i]]^M`, maintaining the flat
/// row-major index as it steps.
struct AgeBox<'a> {
    caps: &'a [u64],
    strides: &'a [usize],
    comps: Vec<u64>,
    idx: usize,
    done: bool,
}

impl<'a> AgeBox<'a> {
    fn new(caps: &'a [u64], strides: &'a [usize]) -> Self {
        Self {
            caps,
            strides,
            comps: vec![1; caps.len()],
            idx: 0,
            done: false,
        }
    }

    fn step(&mut self) {
        for dim in (0..self.comps.len()).rev() {
            if self.comps[dim] < self.caps[dim] {
                self.comps[dim] += 1;
                self.idx += self.strides[dim];
                return;
            }
            self.idx -= (self.comps[dim] - 1) as usize * self.strides[dim];
            self.comps[dim] = 1;
        }
        self.done = true;
    }
}

/// Solves the instance exactly. Errors with [`Error::DpBudgetExceeded`] when
/// the state space is over budget.
pub fn dp_optimal(config: &NetworkConfig, options: &DpOptions) -> Result<DpSolution> {
    let slots = state_slots(config);
    if slots > options.state_budget {
        return Err(Error::DpBudgetExceeded {
            state_slots: slots,
            budget: options.state_budget,
        });
    }
    if options.retain_policy {
        let table_bytes = slots * config.horizon() as f64;
        if table_bytes > options.state_budget {
            return Err(Error::DpBudgetExceeded {
                state_slots: table_bytes,
                budget: options.state_budget,
            });
        }
    }

    let m = config.num_clients();
    let k_max = config.horizon();
    let t = config.slots_per_frame();
    let h1 = config.h1().to_vec();
    let h_cap = k_max + h1.iter().copied().max().unwrap();

    let mut strides = vec![1usize; m];
    for i in (0..m.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * h_cap as usize;
    }
    let num_h = strides[0] * h_cap as usize;
    let num_masks = 1usize << m;

    let mut f_next = vec![0.0f64; num_h]; // frame-start values of frame k+1
    let mut f_curr = vec![0.0f64; num_h];
    let mut w_next = vec![0.0f64; num_masks * num_h]; // slot layer n+1 of frame k
    let mut w_curr = vec![0.0f64; num_masks * num_h];
    let mut table: Option<Vec<Vec<u8>>> = options
        .retain_policy
        .then(|| vec![Vec::new(); (k_max * t as u64) as usize]);

    let cost_scale = 1.0 / (k_max as f64 * m as f64);
    let p = config.p();
    let alpha = config.alpha();
    let mut adv_idx = vec![0usize; num_masks];

    for k in (1..=k_max).rev() {
        let caps: Vec<u64> = h1.iter().map(|&h| (k - 1 + h).min(h_cap)).collect();
        for n in (1..=t).rev() {
            let mut layer_table = table.as_mut().map(|tab| {
                let layer = &mut tab[((k - 1) * t as u64 + (n - 1) as u64) as usize];
                layer.resize(num_masks * num_h, 0);
                layer
            });

            let last_slot = n == t;
            let mut ages = AgeBox::new(&caps, &strides);
            while !ages.done {
                let h_idx = ages.idx;
                if last_slot {
                    // Frame-boundary continuation per delivered set:
                    // delivered clients restart at age 1 (component index 0),
                    // the rest advance to h+1 (component index h).
                    for (mask, slot) in adv_idx.iter_mut().enumerate() {
                        let mut idx = 0usize;
                        for i in 0..m {
                            if mask >> i & 1 == 0 {
                                idx += ages.comps[i] as usize * strides[i];
                            }
                        }
                        *slot = idx;
                    }
                }
                for mask in 0..num_masks {
                    let value_of = |mm: usize| -> f64 {
                        if last_slot {
                            f_next[adv_idx[mm]]
                        } else {
                            w_next[mm * num_h + h_idx]
                        }
                    };
                    let mut best = value_of(mask); // idle
                    let mut best_action = 0u8;
                    for i in 0..m {
                        if mask >> i & 1 == 1 {
                            continue;
                        }
                        let val = p[i] * value_of(mask | 1 << i) + (1.0 - p[i]) * value_of(mask);
                        if val < best {
                            best = val;
                            best_action = i as u8 + 1;
                        }
                    }
                    w_curr[mask * num_h + h_idx] = best;
                    if let Some(layer) = layer_table.as_deref_mut() {
                        layer[mask * num_h + h_idx] = best_action;
                    }
                }
                ages.step();
            }
            std::mem::swap(&mut w_curr, &mut w_next);
        }

        // Frame-start value: stage cost plus slot layer 1 with an empty
        // delivered set (held in w_next after the swaps).
        let mut ages = AgeBox::new(&caps, &strides);
        while !ages.done {
            let stage: f64 = ages
                .comps
                .iter()
                .zip(alpha)
                .map(|(&h, &a)| a * h as f64)
                .sum::<f64>()
                * cost_scale;
            f_curr[ages.idx] = stage + w_next[ages.idx];
            ages.step();
        }
        std::mem::swap(&mut f_curr, &mut f_next);
    }

    let start_idx: usize = h1
        .iter()
        .zip(&strides)
        .map(|(&h, &s)| (h - 1) as usize * s)
        .sum();
    let optimal_objective = f_next[start_idx];
    Ok(DpSolution {
        optimal_objective,
        optimal_ewsaoi: ewsaoi_from_objective(optimal_objective, config),
        state_slots: slots,
        num_clients: m,
        horizon: k_max,
        slots_per_frame: t,
        h1,
        h_cap,
        strides,
        table,
    })
}

/// Looks up a minimizing action for a slot-level state. Ties were resolved
/// during the solve in favor of idling, then by lowest client index.
pub fn dp_policy_decide(solution: &DpSolution, key: &DpStateKey) -> Result<Option<usize>> {
    let table = solution.table.as_ref().ok_or(Error::DpPolicyNotRetained)?;
    let m = solution.num_clients;
    if key.frame < 1 || key.frame > solution.horizon {
        return Err(Error::DpStateOutOfRange {
            detail: format!("frame {} outside 1..={}", key.frame, solution.horizon),
        });
    }
    if key.slot < 1 || key.slot > solution.slots_per_frame {
        return Err(Error::DpStateOutOfRange {
            detail: format!("slot {} outside 1..={}", key.slot, solution.slots_per_frame),
        });
    }
    if key.aoi.len() != m || key.delivered_mask >= 1 << m {
        return Err(Error::DpStateOutOfRange {
            detail: "age vector length or delivered mask does not match the instance".into(),
        });
    }
    let mut h_idx = 0usize;
    for (i, &h) in key.aoi.iter().enumerate() {
        let cap = (key.frame - 1 + solution.h1[i]).min(solution.h_cap);
        if h < 1 || h > cap {
            return Err(Error::DpStateOutOfRange {
                detail: format!("client {i} age {h} outside 1..={cap} at frame {}", key.frame),
            });
        }
        h_idx += (h - 1) as usize * solution.strides[i];
    }
    let layer = &table
        [((key.frame - 1) * solution.slots_per_frame as u64 + (key.slot - 1) as u64) as usize];
    let num_h = solution.strides[0] * solution.h_cap as usize;
    let action = layer[key.delivered_mask as usize * num_h + h_idx];
    Ok((action > 0).then(|| action as usize - 1))
}
