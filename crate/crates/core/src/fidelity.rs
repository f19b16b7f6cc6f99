//! Werner-state fidelity bookkeeping: memory depolarization, entanglement
//! swapping, and end-to-end fidelity of a swapped chain.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fidelity of the maximally mixed two-qubit state.
pub const MIXED: f64 = 0.25;

/// Werner-state fidelity, always within [0.25, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Fidelity(f64);

impl Fidelity {
    pub const PERFECT: Fidelity = Fidelity(1.0);
    pub const MIXED: Fidelity = Fidelity(MIXED);

    pub fn new(value: f64) -> Result<Self> {
        if (MIXED..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::input(format!("fidelity {value} outside [0.25, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn clamped(value: f64) -> Self {
        Self(value.clamp(MIXED, 1.0))
    }
}

impl TryFrom<f64> for Fidelity {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Fidelity::new(value)
    }
}

impl From<Fidelity> for f64 {
    fn from(f: Fidelity) -> f64 {
        f.0
    }
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Depolarization of a stored pair: exponential relaxation toward 0.25 with
/// time constant `t_coh`.
pub fn decay(f0: Fidelity, wait: f64, t_coh: f64) -> Result<Fidelity> {
    if !(wait.is_finite() && wait >= 0.0) {
        return Err(Error::input(format!(
            "wait must be finite and non-negative, got {wait}"
        )));
    }
    if t_coh.is_nan() || t_coh <= 0.0 {
        return Err(Error::input(format!("t_coh must be positive, got {t_coh}")));
    }
    let f = MIXED + (f0.0 - MIXED) * (-wait / t_coh).exp();
    Ok(Fidelity::clamped(f.min(f0.0)))
}

/// Entanglement swap of two Werner pairs.
///
/// Evaluated as `lo + (1 - hi)(1 - 4 lo) / 3` with `lo`/`hi` the smaller and
/// larger input. That is algebraically `f1 f2 + (1 - f1)(1 - f2) / 3`, but the
/// correction term is never positive, so the result cannot round above the
/// weaker input, and the min/max ordering makes it exactly symmetric.
pub fn swap(f1: Fidelity, f2: Fidelity) -> Fidelity {
    let (lo, hi) = if f1.0 <= f2.0 { (f1.0, f2.0) } else { (f2.0, f1.0) };
    Fidelity::clamped(lo + (1.0 - hi) * (1.0 - 4.0 * lo) / 3.0)
}

/// End-to-end fidelity of a chain: left fold of [`swap`] along the path.
pub fn chain_fidelity(links: &[Fidelity]) -> Result<Fidelity> {
    let (first, rest) = links
        .split_first()
        .ok_or_else(|| Error::input("chain needs at least one link"))?;
    Ok(rest.iter().fold(*first, |acc, &f| swap(acc, f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn f(v: f64) -> Fidelity {
        Fidelity::new(v).unwrap()
    }

    /// Textbook product form, used as the reference for `swap`.
    fn swap_reference(a: f64, b: f64) -> f64 {
        a * b + (1.0 - a) * (1.0 - b) / 3.0
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(Fidelity::new(1.2).is_err());
        assert!(Fidelity::new(0.2).is_err());
        assert!(Fidelity::new(f64::NAN).is_err());
        assert!(serde_json::from_str::<Fidelity>("0.1").is_err());
        assert_eq!(serde_json::from_str::<Fidelity>("0.5").unwrap().value(), 0.5);
    }

    #[test]
    fn decay_examples() {
        assert_eq!(decay(f(1.0), 0.0, 1.0).unwrap().value(), 1.0);
        assert_eq!(decay(f(0.25), 123.0, 1.0).unwrap().value(), 0.25);
        // 0.25 + 0.75 / e
        assert_relative_eq!(
            decay(f(1.0), 2.5, 2.5).unwrap().value(),
            0.525_909_580_878_581_8,
            max_relative = 1e-12
        );
        assert!(decay(f(1.0), -1.0, 1.0).is_err());
        assert!(decay(f(1.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn swap_examples() {
        assert_eq!(swap(f(1.0), f(1.0)).value(), 1.0);
        assert_eq!(swap(f(1.0), f(0.7)).value(), 0.7);
        assert_eq!(swap(f(0.7), f(1.0)).value(), 0.7);
        assert_eq!(swap(f(0.25), f(0.25)).value(), 0.25);
    }

    #[test]
    fn chain_examples() {
        assert!(chain_fidelity(&[]).is_err());
        assert_eq!(chain_fidelity(&[f(0.8)]).unwrap(), f(0.8));
        assert_eq!(chain_fidelity(&[f(1.0); 4]).unwrap(), f(1.0));
        let expected = swap_reference(swap_reference(0.95, 0.95), 0.95);
        assert_relative_eq!(
            chain_fidelity(&[f(0.95); 3]).unwrap().value(),
            expected,
            max_relative = 1e-12
        );
    }

    fn fid() -> impl Strategy<Value = Fidelity> {
        (0.25..=1.0f64).prop_map(f)
    }

    proptest! {
        #[test]
        fn swap_matches_product_form(a in fid(), b in fid()) {
            let got = swap(a, b).value();
            prop_assert!((got - swap_reference(a.value(), b.value())).abs() <= 1e-15);
        }

        #[test]
        fn swap_is_symmetric_and_dominated(a in fid(), b in fid()) {
            prop_assert_eq!(swap(a, b), swap(b, a));
            prop_assert!(swap(a, b).value() <= a.value().min(b.value()));
        }

        #[test]
        fn swap_is_monotone(a in fid(), b in fid(), c in fid()) {
            let (lo, hi) = if b <= c { (b, c) } else { (c, b) };
            prop_assert!(swap(a, lo).value() <= swap(a, hi).value() + 1e-15);
        }

        #[test]
        fn chain_dominated_and_reversible(links in prop::collection::vec(fid(), 1..9)) {
            let fwd = chain_fidelity(&links).unwrap().value();
            let min = links.iter().map(|l| l.value()).fold(1.0, f64::min);
            prop_assert!(fwd <= min);
            let mut rev = links.clone();
            rev.reverse();
            let back = chain_fidelity(&rev).unwrap().value();
            prop_assert!((fwd - back).abs() <= 1e-12 * fwd);
        }

        #[test]
        fn decay_semigroup(f0 in fid(), a in 0.0..5.0f64, b in 0.0..5.0f64, t in 0.1..3.0f64) {
            let two = decay(decay(f0, a, t).unwrap(), b, t).unwrap().value();
            let one = decay(f0, a + b, t).unwrap().value();
            prop_assert!((two - one).abs() <= 1e-12 * one);
        }

        #[test]
        fn decay_strictly_decreasing(f0 in 0.3..=1.0f64, a in 0.0..2.0f64, extra in 0.01..2.0f64) {
            let early = decay(f(f0), a, 1.0).unwrap().value();
            let late = decay(f(f0), a + extra, 1.0).unwrap().value();
            prop_assert!(late < early);
        }
    }
}
