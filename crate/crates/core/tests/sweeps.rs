use std::fs;
use std::path::Path;

use pqnet::engine::{self, sweep};
use pqnet::model::{CryptoKind, CryptoProfile};
use pqnet::timing::TimingPlan;
use pqnet::{Network, ScenarioConfig};

fn load(name: &str) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    ScenarioConfig::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Rates from a sweep must not move against `direction` by more than three
/// pooled standard errors between neighbouring points.
fn assert_monotone(rates: &[f64], n: u64, direction: f64) {
    for w in rates.windows(2) {
        let pooled = ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / n as f64).sqrt();
        assert!(
            direction * (w[1] - w[0]) >= -3.0 * pooled,
            "{rates:?} not monotone at {w:?}"
        );
    }
}

#[test]
fn bundled_scenarios_load() {
    for name in [
        "single_hop.json",
        "repeater_chain.json",
        "sequential.json",
        "intercepted.json",
    ] {
        let cfg = load(name);
        let (plan, t_coh) = TimingPlan::for_network(&Network::resolve(&cfg).unwrap());
        assert!(plan.check(t_coh).unwrap().feasible, "{name}");
    }
}

#[test]
fn success_rises_with_destination_coherence() {
    let cfg = load("single_hop.json");
    let n = 4000;
    let values = [0.001, 0.002, 0.003, 0.005, 0.008];
    let rows = sweep(&cfg, "nodes.1.memory.t_coh", &values, n, 17).unwrap();
    let rates: Vec<f64> = rows.iter().map(|r| r.summary.success_rate).collect();
    assert_monotone(&rates, n, 1.0);
    assert!(rates[0] < rates[4]);
}

#[test]
fn success_falls_with_encryption_time() {
    let mut cfg = load("single_hop.json");
    cfg.crypto_profiles.push(CryptoProfile {
        name: "slow".into(),
        kind: CryptoKind::Kem,
        t_encrypt: 0.0,
        t_decrypt: 1e-4,
        public_key_bytes: 0,
        ciphertext_or_sig_bytes: 0,
        claimed_security_bits: 128,
        illustrative: false,
    });
    for node in &mut cfg.nodes {
        node.crypto = "slow".into();
    }
    cfg.nodes[1].memory.t_coh = 0.004;
    let n = 4000;
    let values = [0.0, 5e-4, 1e-3, 2e-3, 3e-3, 4e-3];
    let rows = sweep(&cfg, "crypto_profiles.0.t_encrypt", &values, n, 23).unwrap();
    let rates: Vec<f64> = rows.iter().map(|r| r.summary.success_rate).collect();
    assert_monotone(&rates, n, -1.0);
    assert_eq!(*rates.last().unwrap(), 0.0);
}

#[test]
fn sweep_rows_equal_standalone_runs() {
    let cfg = load("repeater_chain.json");
    let rows = sweep(&cfg, "quantum_links.1.p_success", &[0.2, 0.9], 500, 5).unwrap();
    for row in rows {
        let single = engine::set_parameter(&cfg, "quantum_links.1.p_success", row.value).unwrap();
        assert_eq!(row.summary, engine::run_monte_carlo(&single, 500, 5).unwrap());
    }
}

#[test]
fn sweep_rejects_invalid_values() {
    let cfg = load("single_hop.json");
    assert!(sweep(&cfg, "nodes.1.memory.t_coh", &[-1.0], 10, 1).is_err());
    assert!(sweep(&cfg, "quantum_links.0.p_success", &[1.5], 10, 1).is_err());
    assert!(sweep(&cfg, "n_trials", &[2.5], 10, 1).is_err());
    assert!(sweep(&cfg, "protocol", &[1.0], 10, 1).is_err());
}
