//! Reproducible Monte Carlo engine.
//!
//! Every episode owns one logical RNG stream seeded by hashing the master
//! seed with the replication index, so results are independent of execution
//! order and thread count. Within a slot the draw order is fixed: the
//! randomized policy's selection draw first, then the channel draw if a
//! transmission happens. Deterministic policies consume no selection draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::NetworkConfig;
use crate::model::{
    ewsaoi_from_objective, weighted_age_sum, DeliveryTrace, EpisodeResult, FrameState,
};
use crate::policy::PolicyKind;
use crate::{bounds, bounds::BoundsReport};

/// SplitMix64-style seed derivation: stream `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The RNG backing one episode stream.
pub fn episode_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One policy evaluation campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub config: NetworkConfig,
    pub policy: PolicyKind,
    pub runs: u32,
    pub master_seed: u64,
}

/// Aggregated replication statistics. Standard errors use the (runs - 1)
/// divisor; with a single run they are reported as zero and flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub runs: u32,
    pub mean_objective: f64,
    pub stderr_objective: f64,
    pub mean_ewsaoi: f64,
    pub stderr_ewsaoi: f64,
    /// True when `runs == 1` made the standard error meaningless.
    pub insufficient_replication: bool,
    /// Per-run objectives in replication order.
    pub per_run_objective: Vec<f64>,
}

/// Everything observed during an episode, for structural tests: frame-start
/// age vectors plus each slot's decision and channel outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub frame_start_aoi: Vec<Vec<u64>>,
    pub slots: Vec<SlotRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRecord {
    pub frame: u64,
    pub slot: u32,
    pub decision: Option<usize>,
    pub success: bool,
}

trait Observer {
    fn frame_start(&mut self, _aoi: &[u64]) {}
    fn slot(&mut self, _record: SlotRecord) {}
}

struct NoObserver;
impl Observer for NoObserver {}

impl Observer for EpisodeLog {
    fn frame_start(&mut self, aoi: &[u64]) {
        self.frame_start_aoi.push(aoi.to_vec());
    }
    fn slot(&mut self, record: SlotRecord) {
        self.slots.push(record);
    }
}

fn run_episode_inner<O: Observer>(
    config: &NetworkConfig,
    policy: &PolicyKind,
    seed: u64,
    observer: &mut O,
) -> EpisodeResult {
    let m = config.num_clients();
    let k_max = config.horizon();
    let t = config.slots_per_frame();
    let mut rng = episode_rng(seed);
    let mut state = FrameState::initial(config);
    let mut trace = DeliveryTrace::new(m);
    let mut last_delivery = vec![0u64; m];
    let mut weighted_total = 0.0f64;

    for k in 1..=k_max {
        observer.frame_start(state.aoi());
        weighted_total += weighted_age_sum(state.aoi(), config.alpha());
        for n in 1..=t {
            let decision = policy.decide(state.aoi(), state.delivered(), config, &mut rng);
            let mut success = false;
            if let Some(client) = decision {
                trace.record_transmission(client);
                success = rng.gen_bool(config.p()[client]);
                if success {
                    trace.record_delivery(client, k, last_delivery[client]);
                    last_delivery[client] = k;
                }
            }
            observer.slot(SlotRecord { frame: k, slot: n, decision, success });
            state
                .advance_slot(config, decision, success)
                .expect("policy decisions respect the delivered set");
        }
    }
    for (i, &last) in last_delivery.iter().enumerate() {
        trace.set_residual(i, k_max - last);
    }

    let objective = weighted_total / (k_max as f64 * m as f64);
    EpisodeResult {
        objective,
        ewsaoi: ewsaoi_from_objective(objective, config),
        trace,
        seed,
    }
}

/// Simulates one episode: K frames of T slots, the policy deciding each slot
/// and channel outcomes drawn Bernoulli(p_i). Deterministic in
/// `(config, policy, seed)`.
pub fn run_episode(config: &NetworkConfig, policy: &PolicyKind, seed: u64) -> EpisodeResult {
    run_episode_inner(config, policy, seed, &mut NoObserver)
}

/// [`run_episode`] plus a full slot-level log of the same episode.
pub fn run_episode_logged(
    config: &NetworkConfig,
    policy: &PolicyKind,
    seed: u64,
) -> (EpisodeResult, EpisodeLog) {
    let mut log = EpisodeLog { frame_start_aoi: Vec::new(), slots: Vec::new() };
    let result = run_episode_inner(config, policy, seed, &mut log);
    (result, log)
}

/// Sums in a fixed pairwise order, so the result does not depend on how work
/// was scheduled across threads.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Runs the campaign's replications (in parallel) and aggregates them.
/// Per-run seeds come from `derive_seed(master_seed, run_index)`.
pub fn monte_carlo(spec: &ExperimentSpec) -> SummaryStats {
    let objectives: Vec<f64> = (0..spec.runs as u64)
        .into_par_iter()
        .map(|r| run_episode(&spec.config, &spec.policy, derive_seed(spec.master_seed, r)).objective)
        .collect();
    summarize(&spec.config, objectives)
}

fn summarize(config: &NetworkConfig, objectives: Vec<f64>) -> SummaryStats {
    let n = objectives.len() as f64;
    let mean = pairwise_sum(&objectives) / n;
    let insufficient = objectives.len() < 2;
    let stderr = if insufficient {
        0.0
    } else {
        let sq: Vec<f64> = objectives.iter().map(|&x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&sq) / (n - 1.0)).sqrt() / n.sqrt()
    };
    let t = config.slots_per_frame() as f64;
    SummaryStats {
        runs: objectives.len() as u32,
        mean_objective: mean,
        stderr_objective: stderr,
        mean_ewsaoi: ewsaoi_from_objective(mean, config),
        stderr_ewsaoi: t * stderr,
        insufficient_replication: insufficient,
        per_run_objective: objectives,
    }
}

/// One sweep row: the campaign, its statistics, and the analytic bounds
/// evaluated with the campaign's randomized weights (or the sqrt rule for
/// the deterministic policies).
pub type SweepRow = (ExperimentSpec, SummaryStats, BoundsReport);

/// Maps [`monte_carlo`] and [`bounds::bounds_report`] over a grid, keeping
/// the input order.
pub fn sweep(specs: &[ExperimentSpec]) -> Vec<SweepRow> {
    specs
        .iter()
        .map(|spec| {
            let stats = monte_carlo(spec);
            let beta = match &spec.policy {
                PolicyKind::Randomized { beta } => beta.clone(),
                _ => match PolicyKind::randomized_sqrt_rule(&spec.config) {
                    PolicyKind::Randomized { beta } => beta,
                    _ => unreachable!(),
                },
            };
            let report = bounds::bounds_report(&spec.config, &beta);
            (spec.clone(), stats, report)
        })
        .collect()
}
