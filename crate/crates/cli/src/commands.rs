use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use pqnet::adversary::{self, AttackOutcome, DetectionReport};
use pqnet::engine::{self, Simulator};
use pqnet::kms::{KmsConfig, KmsMode, KmsRow};
use pqnet::model::{CryptoKind, Registry};
use pqnet::timing::{self, FeasibilityResult, TimingPlan};
use pqnet::{Error, Network, Protocol, ScenarioConfig};
use serde::{Deserialize, Serialize};

use crate::output::{self, json_bytes, num, write_artifact};
use crate::{Cli, Command, Format, KmsModeArg, Verdict};

pub fn run(cli: &Cli) -> Result<Verdict> {
    match &cli.command {
        Command::Check { scenario } => check(cli, scenario),
        Command::Simulate { scenario, trials } => simulate(cli, scenario, *trials),
        Command::Adversary {
            scenario,
            trials,
            baseline_trials,
            pairs,
            threshold,
        } => detect(cli, scenario, *trials, *baseline_trials, *pairs, *threshold),
        Command::Kms {
            config,
            nodes,
            mode,
            cluster_size,
            handshake_time,
            t_auth,
            parallelism,
        } => kms(
            cli,
            KmsArgs {
                config: config.as_deref(),
                nodes,
                mode: *mode,
                cluster_size: *cluster_size,
                handshake_time: *handshake_time,
                t_auth: *t_auth,
                parallelism: *parallelism,
            },
        ),
        Command::Sweep {
            scenario,
            param,
            values,
            trials,
        } => sweep(cli, scenario, param, values, *trials),
        Command::Profiles { scenario } => profiles(cli, scenario.as_deref()),
    }
}

/// Loads and validates a scenario. On violations the list is printed to
/// stdout as JSON before the error is returned.
fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match ScenarioConfig::from_json(&text) {
        Ok(cfg) => Ok(cfg),
        Err(Error::InvalidScenario(violations)) => {
            output::print(&json_bytes(&serde_json::json!({ "violations": violations }))?);
            Err(anyhow!("{} has {} violation(s)", path.display(), violations.len()))
        }
        Err(e) => Err(e).with_context(|| format!("loading {}", path.display())),
    }
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

#[derive(Serialize)]
struct AdversaryBound {
    delta_t: f64,
    t_coh_eve: f64,
    outcome: AttackOutcome,
}

#[derive(Serialize)]
struct CheckReport {
    protocol: Protocol,
    t_coh: f64,
    result: FeasibilityResult,
    min_required_coherence: f64,
    plan: TimingPlan,
    #[serde(skip_serializing_if = "Option::is_none")]
    adversary: Option<AdversaryBound>,
}

fn check(cli: &Cli, scenario: &Path) -> Result<Verdict> {
    let cfg = load_scenario(scenario)?;
    let net = Network::resolve(&cfg)?;
    let (plan, t_coh) = TimingPlan::for_network(&net);
    let result = plan.check(t_coh)?;
    let report = CheckReport {
        protocol: cfg.protocol,
        t_coh,
        result,
        min_required_coherence: timing::min_required_coherence(&plan)?,
        plan,
        adversary: cfg.adversary.as_ref().map(|a| AdversaryBound {
            delta_t: a.delta_t(),
            t_coh_eve: a.t_coh_eve,
            outcome: adversary::attack_outcome(a),
        }),
    };
    match cli.format {
        Format::Json => output::print(&json_bytes(&report)?),
        Format::Csv => {
            println!("protocol,feasible,slack,binding_index,t_coh,min_required_coherence");
            println!(
                "{},{},{},{},{},{}",
                serde_json::to_value(report.protocol)?.as_str().unwrap_or_default(),
                result.feasible,
                num(result.slack),
                result.binding_index.map(|i| i.to_string()).unwrap_or_default(),
                num(t_coh),
                num(report.min_required_coherence),
            );
        }
    }
    Ok(if result.feasible {
        Verdict::Ok
    } else {
        Verdict::Negative
    })
}

fn trial_count(flag: Option<u64>, cfg: &ScenarioConfig) -> Result<u64> {
    let n = flag.unwrap_or(cfg.n_trials);
    if n < 1 {
        bail!("trial count must be at least 1");
    }
    Ok(n)
}

fn simulate(cli: &Cli, scenario: &Path, trials: Option<u64>) -> Result<Verdict> {
    let cfg = load_scenario(scenario)?;
    let n = trial_count(trials, &cfg)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    Simulator::new(&cfg)?;
    let outcomes = engine::run_trials(&cfg, n, seed)?;
    let summary = engine::summarize(&cfg, &outcomes)?;
    let written = vec![
        write_artifact(&cli.out, "trials.csv", &output::trials_csv(&outcomes)?)?,
        write_artifact(&cli.out, "summary.json", &json_bytes(&summary)?)?,
    ];
    match cli.format {
        Format::Json => output::print(&json_bytes(&summary)?),
        Format::Csv => output::print(&output::summary_csv(&summary)?),
    }
    announce(&written);
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct AdversaryReport {
    delta_t: f64,
    t_coh_eve: f64,
    attack_outcome: AttackOutcome,
    baseline_samples: usize,
    observed_samples: usize,
    pairs_per_sample: u64,
    #[serde(flatten)]
    report: DetectionReport,
}

fn detect(
    cli: &Cli,
    scenario: &Path,
    trials: Option<u64>,
    baseline_trials: Option<u64>,
    pairs: u64,
    threshold: f64,
) -> Result<Verdict> {
    let cfg = load_scenario(scenario)?;
    let adv = cfg
        .adversary
        .clone()
        .ok_or_else(|| anyhow!("{} has no adversary section", scenario.display()))?;
    let observed = trial_count(trials, &cfg)?;
    let baseline = baseline_trials.unwrap_or(observed);
    let seed = cli.seed.unwrap_or(cfg.seed);
    let run = adversary::run_detection(&cfg, baseline, observed, pairs, threshold, seed)?;
    let report = AdversaryReport {
        delta_t: run.delta_t,
        t_coh_eve: adv.t_coh_eve,
        attack_outcome: run.attack_outcome,
        baseline_samples: run.baseline.len(),
        observed_samples: run.observed.len(),
        pairs_per_sample: pairs,
        report: run.report,
    };
    let written = vec![
        write_artifact(&cli.out, "report.json", &json_bytes(&report)?)?,
        write_artifact(
            &cli.out,
            "samples.csv",
            &output::samples_csv(&run.baseline, &run.observed)?,
        )?,
    ];
    match cli.format {
        Format::Json => output::print(&json_bytes(&report)?),
        Format::Csv => {
            println!("baseline_mean_qber,observed_mean_qber,z_score,flagged,threshold_sigma");
            let r = run.report;
            println!(
                "{},{},{},{},{}",
                num(r.baseline_mean_qber),
                num(r.observed_mean_qber),
                num(r.z_score),
                r.flagged,
                num(r.threshold_sigma)
            );
        }
    }
    announce(&written);
    Ok(if run.report.flagged {
        Verdict::Negative
    } else {
        Verdict::Ok
    })
}

struct KmsArgs<'a> {
    config: Option<&'a Path>,
    nodes: &'a [u64],
    mode: KmsModeArg,
    cluster_size: Option<u64>,
    handshake_time: Option<f64>,
    t_auth: Option<f64>,
    parallelism: Option<u64>,
}

/// KMS configuration file; unknown keys are rejected.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KmsFile {
    n_nodes: Option<u64>,
    cluster_size: Option<u64>,
    per_handshake_time: Option<f64>,
    t_auth: Option<f64>,
    parallelism: Option<u64>,
}

const DEFAULT_HANDSHAKE_TIME: f64 = 1e-3;

fn kms(cli: &Cli, args: KmsArgs<'_>) -> Result<Verdict> {
    let file = match args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<KmsFile>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => KmsFile {
            n_nodes: None,
            cluster_size: None,
            per_handshake_time: None,
            t_auth: None,
            parallelism: None,
        },
    };
    let nodes: Vec<u64> = if args.nodes.is_empty() {
        file.n_nodes.into_iter().collect()
    } else {
        args.nodes.to_vec()
    };
    if nodes.is_empty() {
        bail!("no node count given; pass --nodes or a config with n_nodes");
    }
    let per_handshake_time = args
        .handshake_time
        .or(file.per_handshake_time)
        .unwrap_or(DEFAULT_HANDSHAKE_TIME);
    if !(per_handshake_time.is_finite() && per_handshake_time > 0.0) {
        bail!("per-handshake time must be finite and positive");
    }
    let cluster_size = args.cluster_size.or(file.cluster_size);
    let modes: Vec<KmsMode> = match args.mode {
        KmsModeArg::FullMesh => vec![KmsMode::FullMesh],
        KmsModeArg::Hierarchical => vec![KmsMode::Hierarchical],
        KmsModeArg::Both if cluster_size.is_some() => vec![KmsMode::FullMesh, KmsMode::Hierarchical],
        KmsModeArg::Both => vec![KmsMode::FullMesh],
    };
    let mut rows: Vec<KmsRow> = Vec::new();
    for &n in &nodes {
        let cfg = KmsConfig {
            n_nodes: n,
            cluster_size,
            per_handshake_time,
            t_auth: args.t_auth.or(file.t_auth).unwrap_or(0.0),
            parallelism: args.parallelism.or(file.parallelism).unwrap_or(1),
        };
        for &mode in &modes {
            rows.push(cfg.evaluate(mode)?);
        }
    }
    let csv = output::kms_csv(&rows)?;
    let written = vec![write_artifact(&cli.out, "kms.csv", &csv)?];
    match cli.format {
        Format::Csv => output::print(&csv),
        Format::Json => output::print(&json_bytes(&rows)?),
    }
    announce(&written);
    Ok(Verdict::Ok)
}

fn sweep(cli: &Cli, scenario: &Path, param: &str, values: &[f64], trials: Option<u64>) -> Result<Verdict> {
    let cfg = load_scenario(scenario)?;
    let n = trial_count(trials, &cfg)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let rows = engine::sweep(&cfg, param, values, n, seed)?;
    let csv = output::sweep_csv(&rows)?;
    let written = vec![
        write_artifact(&cli.out, "sweep.csv", &csv)?,
        write_artifact(&cli.out, "sweep.json", &json_bytes(&rows)?)?,
    ];
    match cli.format {
        Format::Csv => output::print(&csv),
        Format::Json => output::print(&json_bytes(&rows)?),
    }
    announce(&written);
    Ok(Verdict::Ok)
}

fn profiles(cli: &Cli, scenario: Option<&Path>) -> Result<Verdict> {
    let registry = match scenario {
        Some(path) => load_scenario(path)?.registry(),
        None => Registry::defaults(),
    };
    match cli.format {
        Format::Json => {
            let all: Vec<_> = registry.iter().collect();
            output::print(&json_bytes(&all)?);
        }
        Format::Csv => {
            println!("name,kind,t_encrypt,t_decrypt,public_key_bytes,ciphertext_or_sig_bytes,claimed_security_bits,illustrative");
            for p in registry.iter() {
                let kind = match p.kind {
                    CryptoKind::Kem => "kem",
                    CryptoKind::Signature => "signature",
                };
                println!(
                    "{},{},{},{},{},{},{},{}",
                    p.name,
                    kind,
                    num(p.t_encrypt),
                    num(p.t_decrypt),
                    p.public_key_bytes,
                    p.ciphertext_or_sig_bytes,
                    p.claimed_security_bits,
                    p.illustrative
                );
            }
        }
    }
    Ok(Verdict::Ok)
}
