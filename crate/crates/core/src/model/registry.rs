use std::collections::BTreeMap;

use super::{CryptoKind, CryptoProfile};
use crate::error::{Error, Result};

/// Read-only set of crypto profiles keyed by unique name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registry {
    profiles: BTreeMap<String, CryptoProfile>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Shipped profiles. The latencies are placeholders of plausible order
    /// and every entry is marked `illustrative`.
    pub fn defaults() -> Self {
        let profiles = [
            CryptoProfile {
                name: "kyber512-class".into(),
                kind: CryptoKind::Kem,
                t_encrypt: 30e-6,
                t_decrypt: 40e-6,
                public_key_bytes: 800,
                ciphertext_or_sig_bytes: 768,
                claimed_security_bits: 128,
                illustrative: true,
            },
            CryptoProfile {
                name: "frodo1344-class".into(),
                kind: CryptoKind::Kem,
                t_encrypt: 1.5e-3,
                t_decrypt: 1.4e-3,
                public_key_bytes: 21_520,
                ciphertext_or_sig_bytes: 21_632,
                claimed_security_bits: 256,
                illustrative: true,
            },
            CryptoProfile {
                name: "dilithium-class".into(),
                kind: CryptoKind::Signature,
                t_encrypt: 150e-6,
                t_decrypt: 50e-6,
                public_key_bytes: 1_952,
                ciphertext_or_sig_bytes: 3_293,
                claimed_security_bits: 192,
                illustrative: true,
            },
            CryptoProfile {
                name: "sphincs-class".into(),
                kind: CryptoKind::Signature,
                t_encrypt: 50e-3,
                t_decrypt: 1e-3,
                public_key_bytes: 32,
                ciphertext_or_sig_bytes: 7_856,
                claimed_security_bits: 128,
                illustrative: true,
            },
        ];
        Self::from_profiles(profiles).expect("default profile names are unique")
    }

    /// Builds a registry, rejecting duplicate names.
    pub fn from_profiles(profiles: impl IntoIterator<Item = CryptoProfile>) -> Result<Self> {
        let mut registry = Self::empty();
        for profile in profiles {
            if registry.profiles.contains_key(&profile.name) {
                return Err(Error::input(format!("duplicate crypto profile `{}`", profile.name)));
            }
            registry.profiles.insert(profile.name.clone(), profile);
        }
        Ok(registry)
    }

    /// Returns a copy with `profiles` added, replacing same-named entries.
    pub fn with_overrides<'a>(&self, profiles: impl IntoIterator<Item = &'a CryptoProfile>) -> Self {
        let mut merged = self.clone();
        for p in profiles {
            merged.profiles.insert(p.name.clone(), p.clone());
        }
        merged
    }

    pub fn lookup(&self, name: &str) -> Result<&CryptoProfile> {
        self.profiles
            .get(name)
            .ok_or_else(|| Error::ProfileNotFound(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.profiles.contains_key(name)
    }

    /// Profiles in name order.
    pub fn iter(&self) -> impl Iterator<Item = &CryptoProfile> {
        self.profiles.values()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_shipped_profile() {
        let reg = Registry::defaults();
        let p = reg.lookup("kyber512-class").unwrap();
        assert_eq!(p.kind, CryptoKind::Kem);
        assert!(p.illustrative);
    }

    #[test]
    fn missing_profile_names_the_identifier() {
        let err = Registry::defaults().lookup("absent").unwrap_err();
        assert!(matches!(err, Error::ProfileNotFound(ref n) if n == "absent"));
        assert!(err.to_string().contains("absent"));
    }

    #[test]
    fn empty_registry_has_nothing() {
        assert!(Registry::empty().lookup("kyber512-class").is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let p = Registry::defaults().lookup("kyber512-class").unwrap().clone();
        assert!(Registry::from_profiles([p.clone(), p]).is_err());
    }

    #[test]
    fn overrides_replace_by_name() {
        let mut p = Registry::defaults().lookup("kyber512-class").unwrap().clone();
        p.t_encrypt = 1.0;
        p.illustrative = false;
        let reg = Registry::defaults().with_overrides([&p]);
        assert_eq!(reg.len(), 4);
        assert_eq!(reg.lookup("kyber512-class").unwrap().t_encrypt, 1.0);
    }
}
