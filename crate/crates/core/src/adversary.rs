//! Hybrid man-in-the-middle model.
//!
//! The adversary holds an intercepted qubit for `t_eve` and spends `t_pqc`
//! tampering with the PQC-protected classical traffic. The attack completes
//! only if the total hold `t_eve + t_pqc` stays under the adversary's memory
//! coherence time; either way the held pair depolarizes for the full hold,
//! which shows up as a QBER shift a threshold detector can flag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::engine;
use crate::error::{Error, Result};
use crate::fidelity::{self, Fidelity};
use crate::model::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    /// Interception and storage latency on the quantum side.
    pub t_eve: f64,
    /// Extra delay from manipulating classical messages.
    pub t_pqc: f64,
    /// Coherence time of the adversary's memory.
    pub t_coh_eve: f64,
    /// Index into the scenario's `quantum_links`.
    pub intercept_link: usize,
}

impl AdversaryConfig {
    pub fn delta_t(&self) -> f64 {
        self.t_eve + self.t_pqc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackOutcome {
    UndetectableSuccess,
    Decoheres,
}

pub fn attack_outcome(a: &AdversaryConfig) -> AttackOutcome {
    if a.delta_t() < a.t_coh_eve {
        AttackOutcome::UndetectableSuccess
    } else {
        AttackOutcome::Decoheres
    }
}

/// Fidelity of a pair after sitting in the adversary's memory for the whole
/// hold time.
pub fn intercepted_fidelity(f_in: Fidelity, a: &AdversaryConfig) -> Result<Fidelity> {
    fidelity::decay(f_in, a.delta_t(), a.t_coh_eve)
}

/// Single-basis error rate of a Werner pair, 2(1 - F)/3.
pub fn qber_of(f: f64) -> Result<f64> {
    let f = Fidelity::new(f)?;
    Ok(2.0 * (1.0 - f.value()) / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub baseline_mean_qber: f64,
    pub observed_mean_qber: f64,
    /// Infinite (serialized as null) when the baseline has zero variance.
    pub z_score: f64,
    pub flagged: bool,
    pub threshold_sigma: f64,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One-sided z-test of the observed mean QBER against the baseline spread.
pub fn detect(baseline: &[f64], observed: &[f64], threshold_sigma: f64) -> Result<DetectionReport> {
    if baseline.len() < 2 || observed.len() < 2 {
        return Err(Error::input(format!(
            "detector needs at least 2 samples per side, got {} baseline and {} observed",
            baseline.len(),
            observed.len()
        )));
    }
    if !(threshold_sigma.is_finite() && threshold_sigma > 0.0) {
        return Err(Error::input("threshold_sigma must be finite and positive"));
    }
    let (mb, sb) = mean_sd(baseline);
    let (mo, _) = mean_sd(observed);
    let (z_score, flagged) = if sb > 0.0 {
        let z = (mo - mb) / (sb / (observed.len() as f64).sqrt());
        (z, z > threshold_sigma)
    } else if mo > mb {
        (f64::INFINITY, true)
    } else if mo < mb {
        (f64::NEG_INFINITY, false)
    } else {
        (0.0, false)
    };
    Ok(DetectionReport {
        baseline_mean_qber: mb,
        observed_mean_qber: mo,
        z_score,
        flagged,
        threshold_sigma,
    })
}

/// Error rate estimated from `pairs` measured pairs of fidelity `f`.
pub fn measured_qber<R: rand::Rng>(f: Fidelity, pairs: u64, rng: &mut R) -> f64 {
    let q = 2.0 * (1.0 - f.value()) / 3.0;
    let errors = Binomial::new(pairs, q).expect("q in [0, 0.5]").sample(rng);
    errors as f64 / pairs as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QberSample {
    pub trial_index: u64,
    pub f_end: f64,
    pub qber: f64,
    pub measured_qber: f64,
}

/// QBER samples from a simulated run: one per successful trial, each
/// estimated from `pairs` measurements of that trial's end-to-end pair.
///
/// Measurement randomness comes from stream 1 of the trial's own ChaCha
/// seed, so it never overlaps the stream that drove the trial.
pub fn qber_samples(config: &ScenarioConfig, n_trials: u64, pairs: u64, master_seed: u64) -> Result<Vec<QberSample>> {
    if pairs == 0 {
        return Err(Error::input("pairs per sample must be at least 1"));
    }
    let outcomes = engine::run_trials(config, n_trials, master_seed)?;
    let samples = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.f_end.map(|f| (i as u64, f)))
        .map(|(i, f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(engine::trial_seed(master_seed, i));
            rng.set_stream(1);
            QberSample {
                trial_index: i,
                f_end: f.value(),
                qber: 2.0 * (1.0 - f.value()) / 3.0,
                measured_qber: measured_qber(f, pairs, &mut rng),
            }
        })
        .collect();
    Ok(samples)
}

/// Baseline and intercepted QBER samples plus the detector verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionRun {
    pub delta_t: f64,
    pub attack_outcome: AttackOutcome,
    pub report: DetectionReport,
    pub baseline: Vec<QberSample>,
    pub observed: Vec<QberSample>,
}

/// Seed labels for the two sides of a detection run.
const BASELINE_STREAM: u64 = 0xBA5E;
const OBSERVED_STREAM: u64 = 0x0B5E;

/// Runs `config` without its adversary for the baseline and with it for the
/// observed side, then applies [`detect`] to the measured QBER samples.
/// Both sides derive their master seeds from `master_seed`.
pub fn run_detection(
    config: &ScenarioConfig,
    baseline_trials: u64,
    observed_trials: u64,
    pairs: u64,
    threshold_sigma: f64,
    master_seed: u64,
) -> Result<DetectionRun> {
    let adversary = config
        .adversary
        .clone()
        .ok_or_else(|| Error::input("scenario has no adversary section"))?;
    let clean = ScenarioConfig {
        adversary: None,
        ..config.clone()
    };
    let baseline = qber_samples(
        &clean,
        baseline_trials,
        pairs,
        engine::trial_seed(master_seed, BASELINE_STREAM),
    )?;
    let observed = qber_samples(
        config,
        observed_trials,
        pairs,
        engine::trial_seed(master_seed, OBSERVED_STREAM),
    )?;
    let measured = |xs: &[QberSample]| xs.iter().map(|s| s.measured_qber).collect::<Vec<_>>();
    let report = detect(&measured(&baseline), &measured(&observed), threshold_sigma)?;
    Ok(DetectionRun {
        delta_t: adversary.delta_t(),
        attack_outcome: attack_outcome(&adversary),
        report,
        baseline,
        observed,
    })
}
