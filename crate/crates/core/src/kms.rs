//! Handshake counts and re-key cycle time for network-wide key rotation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmsMode {
    FullMesh,
    Hierarchical,
}

impl KmsMode {
    pub fn as_str(self) -> &'static str {
        match self {
            KmsMode::FullMesh => "full_mesh",
            KmsMode::Hierarchical => "hierarchical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmsConfig {
    pub n_nodes: u64,
    /// Members per cluster; only used in hierarchical mode.
    #[serde(default)]
    pub cluster_size: Option<u64>,
    /// Seconds per handshake, KEM latency included.
    pub per_handshake_time: f64,
    /// Authentication overhead added to every handshake.
    #[serde(default)]
    pub t_auth: f64,
    #[serde(default = "one")]
    pub parallelism: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmsRow {
    pub n: u64,
    pub mode: KmsMode,
    pub cluster_size: Option<u64>,
    pub handshakes: u64,
    pub t_key_s: f64,
}

impl KmsConfig {
    pub fn evaluate(&self, mode: KmsMode) -> Result<KmsRow> {
        let (handshakes, cluster_size) = match mode {
            KmsMode::FullMesh => (full_mesh_handshakes(self.n_nodes)?, None),
            KmsMode::Hierarchical => {
                let c = self
                    .cluster_size
                    .ok_or_else(|| Error::input("hierarchical mode needs cluster_size"))?;
                (hierarchical_handshakes(self.n_nodes, c)?, Some(c))
            }
        };
        Ok(KmsRow {
            n: self.n_nodes,
            mode,
            cluster_size,
            handshakes,
            t_key_s: rekey_cycle_time(handshakes, self.per_handshake_time, self.t_auth, self.parallelism)?,
        })
    }
}

/// One handshake per unordered node pair.
pub fn full_mesh_handshakes(n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::input(format!("need at least 2 nodes, got {n}")));
    }
    Ok(n * (n - 1) / 2)
}

/// Single-level hierarchy: `ceil(n / c)` clusters, each member keyed with
/// its head, heads fully meshed among themselves.
pub fn hierarchical_handshakes(n: u64, cluster_size: u64) -> Result<u64> {
    if n < 2 || cluster_size < 2 || cluster_size > n {
        return Err(Error::input(format!(
            "need 2 <= cluster_size <= n, got n = {n}, cluster_size = {cluster_size}"
        )));
    }
    let heads = n.div_ceil(cluster_size);
    Ok((n - heads) + heads * (heads - 1) / 2)
}

/// Re-key time with handshakes batched greedily over `parallelism` lanes.
pub fn rekey_cycle_time(handshakes: u64, per_handshake_time: f64, t_auth: f64, parallelism: u64) -> Result<f64> {
    if parallelism < 1 {
        return Err(Error::input("parallelism must be at least 1"));
    }
    if !(per_handshake_time.is_finite() && per_handshake_time >= 0.0) {
        return Err(Error::input("per_handshake_time must be finite and non-negative"));
    }
    if !(t_auth.is_finite() && t_auth >= 0.0) {
        return Err(Error::input("t_auth must be finite and non-negative"));
    }
    let batches = handshakes.div_ceil(parallelism);
    Ok(batches as f64 * (per_handshake_time + t_auth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn enumerate_pairs(n: u64) -> u64 {
        let mut count = 0;
        for a in 0..n {
            for b in 0..n {
                if a < b {
                    count += 1;
                }
            }
        }
        count
    }

    /// Lays out clusters explicitly (node i in cluster i / c, first member is
    /// head) and counts distinct key-sharing pairs.
    fn enumerate_hierarchy(n: u64, c: u64) -> u64 {
        let head_of = |i: u64| (i / c) * c;
        let mut pairs = std::collections::BTreeSet::new();
        for i in 0..n {
            if head_of(i) != i {
                pairs.insert((head_of(i), i));
            }
        }
        let heads: Vec<u64> = (0..n).filter(|&i| head_of(i) == i).collect();
        for (x, &a) in heads.iter().enumerate() {
            for &b in &heads[x + 1..] {
                pairs.insert((a, b));
            }
        }
        pairs.len() as u64
    }

    /// Assigns each handshake to the lane that frees up first.
    fn schedule(handshakes: u64, dur: f64, lanes: u64) -> f64 {
        let mut free = vec![0.0f64; lanes as usize];
        for _ in 0..handshakes {
            let lane = (0..free.len())
                .min_by(|&a, &b| free[a].partial_cmp(&free[b]).unwrap())
                .unwrap();
            free[lane] += dur;
        }
        free.into_iter().fold(0.0, f64::max)
    }

    #[test]
    fn full_mesh_examples() {
        assert_eq!(full_mesh_handshakes(2).unwrap(), 1);
        assert_eq!(full_mesh_handshakes(4).unwrap(), 6);
        assert_eq!(full_mesh_handshakes(100).unwrap(), 4950);
        assert!(full_mesh_handshakes(1).is_err());
        let ratio = full_mesh_handshakes(100_000).unwrap() as f64 / 1e10;
        assert!((ratio - 0.5).abs() < 1e-4);
    }

    #[test]
    fn hierarchical_examples() {
        assert_eq!(hierarchical_handshakes(4, 4).unwrap(), 3);
        assert_eq!(hierarchical_handshakes(4, 2).unwrap(), 3);
        assert_eq!(hierarchical_handshakes(1000, 10).unwrap(), 5850);
        assert_eq!(enumerate_hierarchy(1000, 10), 5850);
        assert!(hierarchical_handshakes(4, 5).is_err());
        assert!(hierarchical_handshakes(4, 1).is_err());
    }

    #[test]
    fn rekey_examples() {
        assert_eq!(rekey_cycle_time(0, 2e-3, 0.0, 3).unwrap(), 0.0);
        assert_relative_eq!(rekey_cycle_time(6, 2e-3, 0.0, 1).unwrap(), 12e-3);
        assert_relative_eq!(rekey_cycle_time(6, 2e-3, 0.0, 4).unwrap(), 4e-3);
        assert_relative_eq!(schedule(6, 2e-3, 4), 4e-3);
        assert!(rekey_cycle_time(6, 2e-3, 0.0, 0).is_err());
    }

    #[test]
    fn config_rows() {
        let cfg = KmsConfig {
            n_nodes: 4,
            cluster_size: Some(2),
            per_handshake_time: 2e-3,
            t_auth: 1e-3,
            parallelism: 2,
        };
        let full = cfg.evaluate(KmsMode::FullMesh).unwrap();
        assert_eq!((full.handshakes, full.cluster_size), (6, None));
        assert_relative_eq!(full.t_key_s, 9e-3);
        let hier = cfg.evaluate(KmsMode::Hierarchical).unwrap();
        assert_eq!(hier.handshakes, 3);
        let no_cluster = KmsConfig {
            cluster_size: None,
            ..cfg
        };
        assert!(no_cluster.evaluate(KmsMode::Hierarchical).is_err());
    }

    #[test]
    fn full_mesh_matches_enumeration() {
        for n in 2..=200 {
            assert_eq!(full_mesh_handshakes(n).unwrap(), enumerate_pairs(n));
        }
    }

    proptest! {
        #[test]
        fn hierarchy_matches_layout(n in 2u64..400, c in 2u64..40) {
            prop_assume!(c <= n);
            prop_assert_eq!(hierarchical_handshakes(n, c).unwrap(), enumerate_hierarchy(n, c));
            prop_assert!(hierarchical_handshakes(n, c).unwrap() <= full_mesh_handshakes(n).unwrap());
        }

        #[test]
        fn rekey_matches_greedy_schedule(h in 0u64..200, lanes in 1u64..16) {
            let got = rekey_cycle_time(h, 1.0, 0.0, lanes).unwrap();
            prop_assert_eq!(got, schedule(h, 1.0, lanes));
        }

        #[test]
        fn more_lanes_never_slower(h in 0u64..1000, p in 1u64..50) {
            let a = rekey_cycle_time(h, 1e-3, 1e-4, p).unwrap();
            let b = rekey_cycle_time(h, 1e-3, 1e-4, p + 1).unwrap();
            prop_assert!(b <= a);
        }

        #[test]
        fn inverse_proportional_when_divisible(batches in 1u64..100, p in 1u64..20) {
            let h = batches * p;
            let serial = rekey_cycle_time(h, 1.0, 0.5, 1).unwrap();
            let par = rekey_cycle_time(h, 1.0, 0.5, p).unwrap();
            prop_assert_eq!(serial, par * p as f64);
        }
    }
}
