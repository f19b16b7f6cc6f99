//! Domain types shared by every analysis: crypto profiles, memories, nodes,
//! links, and the scenario document that ties them together.

mod registry;
mod scenario;

pub use registry::Registry;
pub use scenario::{
    parse_scenario, validate_scenario, ClassicalChannelSpec, Network, NetworkLink, NetworkNode, ParsedScenario,
    Protocol, QuantumLinkSpec, ScenarioConfig,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CryptoKind {
    Kem,
    Signature,
}

/// Latency and size profile of a post-quantum primitive.
///
/// For signature profiles `t_encrypt` is the signing time and `t_decrypt`
/// the verification time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CryptoProfile {
    pub name: String,
    pub kind: CryptoKind,
    pub t_encrypt: f64,
    pub t_decrypt: f64,
    pub public_key_bytes: u64,
    pub ciphertext_or_sig_bytes: u64,
    pub claimed_security_bits: u32,
    /// Set on shipped defaults whose numbers are placeholders, not measurements.
    #[serde(default)]
    pub illustrative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryTier {
    ShortLived,
    LongLived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemorySpec {
    pub t_coh: f64,
    pub tier: MemoryTier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    EndNode,
    Repeater,
    Core,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub role: NodeRole,
    pub memory: MemorySpec,
    /// Name of the crypto profile this node runs.
    pub crypto: String,
}

/// Hardness family used to discount a claimed security level against a
/// quantum-capable attacker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecurityFamily {
    Symmetric,
    FactoringOrDlogBased,
    Pqc,
}

/// Security bits left once a quantum adversary is assumed.
///
/// Grover search halves symmetric strength (floor division), Shor breaks
/// factoring and discrete-log schemes outright, and PQC claims pass through.
pub fn effective_security(claimed_bits: u32, family: SecurityFamily) -> u32 {
    match family {
        SecurityFamily::Symmetric => claimed_bits / 2,
        SecurityFamily::FactoringOrDlogBased => 0,
        SecurityFamily::Pqc => claimed_bits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn aes128_drops_to_64_bits() {
        assert_eq!(effective_security(128, SecurityFamily::Symmetric), 64);
    }

    #[test]
    fn shor_zeroes_rsa() {
        assert_eq!(effective_security(112, SecurityFamily::FactoringOrDlogBased), 0);
        assert_eq!(effective_security(0, SecurityFamily::Symmetric), 0);
        assert_eq!(effective_security(192, SecurityFamily::Pqc), 192);
    }

    #[test]
    fn odd_symmetric_levels_round_down() {
        assert_eq!(effective_security(129, SecurityFamily::Symmetric), 64);
    }

    proptest! {
        #[test]
        fn halving_is_exact_on_even_inputs(k in 0u32..(u32::MAX / 2)) {
            prop_assert_eq!(effective_security(2 * k, SecurityFamily::Symmetric), k);
        }

        #[test]
        fn monotone_in_claimed_bits(a in any::<u32>(), b in any::<u32>()) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for family in [
                SecurityFamily::Symmetric,
                SecurityFamily::FactoringOrDlogBased,
                SecurityFamily::Pqc,
            ] {
                prop_assert!(effective_security(lo, family) <= effective_security(hi, family));
            }
        }
    }
}
