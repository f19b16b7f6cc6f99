//! Slotted Monte Carlo simulation of entanglement distribution along a
//! repeater chain with PQC-protected feedforward.
//!
//! Time advances in slots of `slot_duration`. In every slot each missing
//! elementary link makes one Bernoulli attempt; a success stores a pair
//! stamped with the slot's start time. Any repeater holding two adjacent
//! pairs swaps them immediately (zero measurement time) and, in the
//! parallel-chain protocol, sends its outcome to the destination end node.
//! A stored qubit whose age reaches its node's `t_coh` is discarded
//! together with every link already swapped into the same segment, and
//! those links regenerate.
//!
//! `t_dist` runs from the first attempt (time 0) to the moment the last
//! feedforward message is decrypted. The trial succeeds iff `t_dist` stays
//! strictly under the end-node coherence window: the destination's `t_coh`
//! for single-hop and parallel-chain, the shorter of the two end memories
//! for sequential rounds. With `p_success = 1` every pair exists at time 0,
//! so the verdict reduces exactly to the matching timing check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary;
use crate::error::{Error, Result};
use crate::fidelity::{self, Fidelity};
use crate::model::{Network, Protocol, ScenarioConfig};
use crate::timing::TimingPlan;

/// Slots a trial may run before it is abandoned.
pub const HORIZON_SLOTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// The end-node window closed before the chain was connected.
    MemoryExpired,
    /// The chain connected but feedforward finished too late.
    MessageLate,
    HorizonExceeded,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::MemoryExpired => "memory_expired",
            FailureReason::MessageLate => "message_late",
            FailureReason::HorizonExceeded => "horizon_exceeded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    /// Present whenever the protocol ran to completion, late or not.
    pub t_dist: Option<f64>,
    pub f_end: Option<Fidelity>,
    pub failure_reason: Option<FailureReason>,
    pub slots_used: u64,
}

impl TrialOutcome {
    fn failed(reason: FailureReason, slots_used: u64, t_dist: Option<f64>) -> Self {
        Self {
            success: false,
            t_dist,
            f_end: None,
            failure_reason: Some(reason),
            slots_used,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounts {
    pub memory_expired: u64,
    pub message_late: u64,
    pub horizon_exceeded: u64,
}

/// R_e·T_coh for one link, using the shorter-lived of its two memories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDiagnostic {
    pub link: usize,
    pub endpoints: [String; 2],
    pub entanglement_rate: f64,
    pub t_coh: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_trials: u64,
    pub n_successes: u64,
    pub success_rate: f64,
    /// Mean over successful trials; null when none succeeded.
    pub mean_t_dist: Option<f64>,
    pub mean_slots_used: f64,
    pub f_end_mean: Option<f64>,
    pub f_end_min: Option<f64>,
    pub failures: FailureCounts,
    pub re_tcoh_product: Vec<LinkDiagnostic>,
    /// Where `t_dist` is measured from.
    pub t_dist_origin: String,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index`: `splitmix64(master_seed ^ splitmix64(index))`.
/// Each trial then draws from `ChaCha8Rng::seed_from_u64(trial_seed)`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

struct Segment {
    left: usize,
    right: usize,
    /// Arrival times of correction messages from swaps inside this segment.
    arrivals: Vec<f64>,
}

/// A network prepared for repeated trials.
pub struct Simulator {
    net: Network,
    window: f64,
    /// Fidelity each link starts from (after interception, if any).
    start_fidelity: Vec<Fidelity>,
    /// Delay from swap at chain position j to decryption at the destination.
    swap_message_delay: Vec<f64>,
    /// Post-connection feedforward delay for single-hop and sequential plans.
    feedforward_delay: f64,
}

impl Simulator {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        Self::from_network(Network::resolve(config)?)
    }

    pub fn from_network(net: Network) -> Result<Self> {
        let (plan, window) = TimingPlan::for_network(&net);
        let feedforward_delay = match net.protocol {
            Protocol::ParallelChain => 0.0,
            _ => plan.delay()?,
        };
        let dest = net.destination_index();
        let dec_end = net.destination().t_decrypt;
        let swap_message_delay = (0..net.nodes.len())
            .map(|j| {
                if j == 0 || j == dest || net.protocol != Protocol::ParallelChain {
                    0.0
                } else {
                    let m = net.message(j, dest);
                    crate::timing::HopTiming::new(m.t_encrypt, m.t_comm, dec_end).total()
                }
            })
            .collect();
        let start_fidelity = net
            .links
            .iter()
            .enumerate()
            .map(|(i, link)| {
                let f = Fidelity::new(link.base_fidelity)?;
                match (&net.adversary, net.intercepted) {
                    (Some(adv), Some(k)) if k == i => adversary::intercepted_fidelity(f, adv),
                    _ => Ok(f),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            net,
            window,
            start_fidelity,
            swap_message_delay,
            feedforward_delay,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    /// End-node coherence window `t_dist` has to beat.
    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn run_trial(&self, seed: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = &self.net.nodes;
        let n_links = self.net.links.len();
        let last = nodes.len() - 1;
        let tau = self.net.slot_duration;

        // Slot index at which each link's current pair was generated.
        let mut stamp: Vec<Option<u64>> = vec![None; n_links];
        // When each link's left / right qubit stopped waiting.
        let mut left_done = vec![0.0; n_links];
        let mut right_done = vec![0.0; n_links];
        let mut segments: Vec<Segment> = Vec::with_capacity(n_links);

        for k in 0..HORIZON_SLOTS {
            let now = k as f64 * tau;
            if now >= self.window {
                return TrialOutcome::failed(FailureReason::MemoryExpired, k, None);
            }

            segments.retain(|s| {
                let l = stamp[s.left].expect("segment links are stored");
                let r = stamp[s.right - 1].expect("segment links are stored");
                let alive = (k - l) as f64 * tau < nodes[s.left].t_coh && (k - r) as f64 * tau < nodes[s.right].t_coh;
                if !alive {
                    stamp[s.left..s.right].iter_mut().for_each(|t| *t = None);
                }
                alive
            });

            for (i, link) in self.net.links.iter().enumerate() {
                if stamp[i].is_none() && rng.random::<f64>() < link.p_success {
                    stamp[i] = Some(k);
                    segments.push(Segment {
                        left: i,
                        right: i + 1,
                        arrivals: Vec::new(),
                    });
                }
            }

            segments.sort_by_key(|s| s.left);
            let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
            for s in segments.drain(..) {
                match merged.last_mut() {
                    Some(prev) if prev.right == s.left => {
                        let j = s.left;
                        right_done[j - 1] = now;
                        left_done[j] = now;
                        prev.arrivals.extend(s.arrivals);
                        if self.net.protocol == Protocol::ParallelChain {
                            prev.arrivals.push(now + self.swap_message_delay[j]);
                        }
                        prev.right = s.right;
                    }
                    _ => merged.push(s),
                }
            }
            segments = merged;

            if let [whole] = segments.as_slice() {
                if whole.left == 0 && whole.right == last {
                    let t_final = match self.net.protocol {
                        Protocol::ParallelChain => whole.arrivals.iter().copied().fold(now, f64::max),
                        _ => now + self.feedforward_delay,
                    };
                    if t_final >= self.window {
                        return TrialOutcome::failed(FailureReason::MessageLate, k + 1, Some(t_final));
                    }
                    left_done[0] = t_final;
                    right_done[n_links - 1] = t_final;
                    let f_end = self.end_fidelity(&stamp, &left_done, &right_done);
                    return TrialOutcome {
                        success: true,
                        t_dist: Some(t_final),
                        f_end: Some(f_end),
                        failure_reason: None,
                        slots_used: k + 1,
                    };
                }
            }
        }
        TrialOutcome::failed(FailureReason::HorizonExceeded, HORIZON_SLOTS, None)
    }

    fn end_fidelity(&self, stamp: &[Option<u64>], left_done: &[f64], right_done: &[f64]) -> Fidelity {
        let nodes = &self.net.nodes;
        let links: Vec<Fidelity> = (0..self.net.links.len())
            .map(|i| {
                let t0 = stamp[i].expect("connected chain has every link") as f64 * self.net.slot_duration;
                let f = fidelity::decay(self.start_fidelity[i], left_done[i] - t0, nodes[i].t_coh)
                    .expect("waits are non-negative");
                fidelity::decay(f, right_done[i] - t0, nodes[i + 1].t_coh).expect("waits are non-negative")
            })
            .collect();
        fidelity::chain_fidelity(&links).expect("chain has at least one link")
    }

    fn diagnostics(&self, config: &ScenarioConfig) -> Vec<LinkDiagnostic> {
        let mut out: Vec<LinkDiagnostic> = self
            .net
            .links
            .iter()
            .enumerate()
            .map(|(i, link)| {
                let spec = &config.quantum_links[link.config_index];
                let rate = spec.entanglement_rate(self.net.slot_duration);
                let t_coh = self.net.nodes[i].t_coh.min(self.net.nodes[i + 1].t_coh);
                LinkDiagnostic {
                    link: link.config_index,
                    endpoints: spec.endpoints.clone(),
                    entanglement_rate: rate,
                    t_coh,
                    product: rate * t_coh,
                }
            })
            .collect();
        out.sort_by_key(|d| d.link);
        out
    }
}

pub fn run_trial(config: &ScenarioConfig, trial_seed: u64) -> Result<TrialOutcome> {
    Ok(Simulator::new(config)?.run_trial(trial_seed))
}

/// Outcomes of `n_trials` trials, in trial-index order.
pub fn run_trials(config: &ScenarioConfig, n_trials: u64, master_seed: u64) -> Result<Vec<TrialOutcome>> {
    let sim = Simulator::new(config)?;
    Ok(simulate(&sim, n_trials, master_seed))
}

fn simulate(sim: &Simulator, n_trials: u64, master_seed: u64) -> Vec<TrialOutcome> {
    (0..n_trials)
        .into_par_iter()
        .map(|i| sim.run_trial(trial_seed(master_seed, i)))
        .collect()
}

pub fn summarize(config: &ScenarioConfig, outcomes: &[TrialOutcome]) -> Result<RunSummary> {
    let sim = Simulator::new(config)?;
    Ok(summarize_with(&sim, config, outcomes))
}

fn summarize_with(sim: &Simulator, config: &ScenarioConfig, outcomes: &[TrialOutcome]) -> RunSummary {
    let n = outcomes.len() as u64;
    let mut failures = FailureCounts::default();
    let mut successes = 0u64;
    let mut t_dist_sum = 0.0;
    let mut f_sum = 0.0;
    let mut f_min = f64::INFINITY;
    let mut slots = 0u64;
    for o in outcomes {
        slots += o.slots_used;
        match o.failure_reason {
            None => {
                successes += 1;
                t_dist_sum += o.t_dist.expect("success has t_dist");
                let f = o.f_end.expect("success has f_end").value();
                f_sum += f;
                f_min = f_min.min(f);
            }
            Some(FailureReason::MemoryExpired) => failures.memory_expired += 1,
            Some(FailureReason::MessageLate) => failures.message_late += 1,
            Some(FailureReason::HorizonExceeded) => failures.horizon_exceeded += 1,
        }
    }
    let over_successes = |sum: f64| (successes > 0).then(|| sum / successes as f64);
    RunSummary {
        n_trials: n,
        n_successes: successes,
        success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
        mean_t_dist: over_successes(t_dist_sum),
        mean_slots_used: if n == 0 { 0.0 } else { slots as f64 / n as f64 },
        f_end_mean: over_successes(f_sum),
        f_end_min: (successes > 0).then_some(f_min),
        failures,
        re_tcoh_product: sim.diagnostics(config),
        t_dist_origin: "first_attempt".to_string(),
    }
}

pub fn run_monte_carlo(config: &ScenarioConfig, n_trials: u64, master_seed: u64) -> Result<RunSummary> {
    if n_trials < 1 {
        return Err(Error::input("n_trials must be at least 1"));
    }
    let sim = Simulator::new(config)?;
    let outcomes = simulate(&sim, n_trials, master_seed);
    Ok(summarize_with(&sim, config, &outcomes))
}

/// Copy of `config` with the numeric field at dotted `path` (for example
/// `nodes.2.memory.t_coh`) set to `value`.
pub fn set_parameter(config: &ScenarioConfig, path: &str, value: f64) -> Result<ScenarioConfig> {
    let bad = |reason: &str| Error::InvalidPath {
        path: path.to_string(),
        reason: reason.to_string(),
    };
    let mut doc = serde_json::to_value(config)?;
    let mut slot = &mut doc;
    for seg in path.split('.') {
        slot = match slot {
            serde_json::Value::Object(map) => map.get_mut(seg),
            serde_json::Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| bad("no such field"))?;
    }
    *slot = match slot {
        serde_json::Value::Number(n) if n.is_u64() => {
            if value >= 0.0 && value.fract() == 0.0 && value <= u64::MAX as f64 {
                serde_json::Value::from(value as u64)
            } else {
                return Err(bad("integer field needs a non-negative whole value"));
            }
        }
        serde_json::Value::Number(_) => serde_json::Number::from_f64(value)
            .map(serde_json::Value::Number)
            .ok_or_else(|| bad("value must be finite"))?,
        _ => return Err(bad("not a numeric field")),
    };
    let updated: ScenarioConfig = serde_json::from_value(doc).map_err(|e| bad(&e.to_string()))?;
    Ok(updated)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub summary: RunSummary,
}

/// One Monte Carlo run per value, all with the same master seed, so each row
/// equals a standalone `run_monte_carlo` on the modified scenario.
pub fn sweep(
    config: &ScenarioConfig,
    path: &str,
    values: &[f64],
    n_trials: u64,
    master_seed: u64,
) -> Result<Vec<SweepRow>> {
    values
        .iter()
        .map(|&value| {
            let cfg = set_parameter(config, path, value)?;
            Ok(SweepRow {
                value,
                summary: run_monte_carlo(&cfg, n_trials, master_seed)?,
            })
        })
        .collect()
}
