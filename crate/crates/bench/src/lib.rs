//! Criterion benchmarks for the analysis and simulation paths.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use pqnet::engine;
use pqnet::fidelity::{chain_fidelity, Fidelity};
use pqnet::kms;
use pqnet::model::{
    ClassicalChannelSpec, CryptoKind, CryptoProfile, MemorySpec, MemoryTier, NodeRole, NodeSpec, QuantumLinkSpec,
};
use pqnet::timing::{check_parallel, check_sequential, check_single_hop, HopTiming};
use pqnet::{Protocol, ScenarioConfig};

/// Repeater chain with `links` links, success probability `p` per slot.
pub fn chain(links: usize, p: f64) -> ScenarioConfig {
    let ids: Vec<String> = (0..=links).map(|i| format!("n{i:02}")).collect();
    let node = |i: usize| NodeSpec {
        id: ids[i].clone(),
        role: if i == 0 || i == links {
            NodeRole::EndNode
        } else {
            NodeRole::Repeater
        },
        memory: MemorySpec {
            t_coh: 0.1,
            tier: MemoryTier::LongLived,
        },
        crypto: "kem".into(),
    };
    ScenarioConfig {
        nodes: (0..=links).map(node).collect(),
        quantum_links: ids
            .windows(2)
            .map(|w| QuantumLinkSpec {
                endpoints: [w[0].clone(), w[1].clone()],
                gen_rate: None,
                p_success: p,
                base_fidelity: 0.97,
            })
            .collect(),
        classical_channels: ids[1..links]
            .iter()
            .map(|id| ClassicalChannelSpec {
                endpoints: [id.clone(), ids[links].clone()],
                propagation_delay: 1e-3,
                processing_delay: 1e-4,
            })
            .chain((links == 1).then(|| ClassicalChannelSpec {
                endpoints: [ids[0].clone(), ids[1].clone()],
                propagation_delay: 1e-3,
                processing_delay: 1e-4,
            }))
            .collect(),
        protocol: if links == 1 {
            Protocol::SingleHop
        } else {
            Protocol::ParallelChain
        },
        rounds_l: 1,
        adversary: None,
        seed: 1,
        n_trials: 1000,
        slot_duration: 1e-3,
        crypto_profiles: vec![CryptoProfile {
            name: "kem".into(),
            kind: CryptoKind::Kem,
            t_encrypt: 3e-5,
            t_decrypt: 4e-5,
            public_key_bytes: 800,
            ciphertext_or_sig_bytes: 768,
            claimed_security_bits: 128,
            illustrative: true,
        }],
    }
}

pub fn timing(c: &mut Criterion) {
    let hops: Vec<HopTiming> = (0..64).map(|i| HopTiming::new(1e-4 * i as f64, 1e-3, 2e-4)).collect();
    let mut g = c.benchmark_group("timing");
    g.bench_function("single_hop", |b| b.iter(|| check_single_hop(black_box(&hops[3]), 1e-2)));
    g.bench_function("parallel_64", |b| {
        b.iter(|| check_parallel(black_box(&hops), 2e-4, 1e-2))
    });
    g.bench_function("sequential_64", |b| b.iter(|| check_sequential(black_box(&hops), 1e-2)));
    g.finish();
}

pub fn fidelity(c: &mut Criterion) {
    let mut g = c.benchmark_group("chain_fidelity");
    for len in [2usize, 8, 64] {
        let links: Vec<Fidelity> = (0..len)
            .map(|i| Fidelity::new(0.9 + 0.001 * i as f64).unwrap())
            .collect();
        g.bench_with_input(BenchmarkId::from_parameter(len), &links, |b, l| {
            b.iter(|| chain_fidelity(black_box(l)))
        });
    }
    g.finish();
}

pub fn engine(c: &mut Criterion) {
    let n = 1000;
    let mut g = c.benchmark_group("monte_carlo");
    g.throughput(Throughput::Elements(n));
    g.sample_size(20);
    for links in [1usize, 4, 8] {
        let cfg = chain(links, 0.3);
        g.bench_with_input(BenchmarkId::new("links", links), &cfg, |b, cfg| {
            b.iter(|| engine::run_monte_carlo(cfg, n, 7).unwrap())
        });
    }
    g.finish();
}

pub fn kms(c: &mut Criterion) {
    let mut g = c.benchmark_group("kms");
    g.bench_function("hierarchical_sweep_1e4", |b| {
        b.iter(|| {
            (100..10_000u64)
                .map(|n| kms::hierarchical_handshakes(n, 10).unwrap())
                .sum::<u64>()
        })
    });
    g.finish();
}
