//! Trust factor values.
//!
//! A trust factor is the pair `[T U]` where `T` is trust and `U` is untrust
//! (the complement of trust, so `U = 1 - T` for every well-formed pair).
//! This module also holds the five-label linguistic scale and the display
//! truncation used when values are printed.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for `|trust + untrust - 1|`.
pub const COMPLEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrustError {
    #[error("{name} value {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error(
        "trust {trust} and untrust {untrust} are not complementary (sum differs from 1 by {gap:e})"
    )]
    NotComplementary { trust: f64, untrust: f64, gap: f64 },
}

/// How strictly `trust + untrust = 1` is enforced when building pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Complementarity {
    /// Reject pairs whose sum is further than `tolerance` from 1.
    Strict { tolerance: f64 },
    /// Accept any pair with both components in [0, 1].
    Relaxed,
}

impl Complementarity {
    pub fn strict() -> Self {
        Complementarity::Strict {
            tolerance: COMPLEMENT_TOLERANCE,
        }
    }

    pub fn from_flag(strict: bool) -> Self {
        if strict {
            Self::strict()
        } else {
            Complementarity::Relaxed
        }
    }
}

impl Default for Complementarity {
    fn default() -> Self {
        Self::strict()
    }
}

/// A `(trust, untrust)` pair, both components in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustPair {
    trust: f64,
    untrust: f64,
}

fn check_unit(name: &'static str, value: f64) -> Result<f64, TrustError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(TrustError::OutOfRange { name, value })
    }
}

impl TrustPair {
    /// The maximum-confidentiality pair `[1 0]` a packet holds at the source.
    pub const FULL_TRUST: TrustPair = TrustPair {
        trust: 1.0,
        untrust: 0.0,
    };
    pub const NO_TRUST: TrustPair = TrustPair {
        trust: 0.0,
        untrust: 1.0,
    };
    pub const INDIFFERENT: TrustPair = TrustPair {
        trust: 0.5,
        untrust: 0.5,
    };

    /// Strictly validated pair.
    pub fn new(trust: f64, untrust: f64) -> Result<Self, TrustError> {
        Self::with_rule(trust, Some(untrust), Complementarity::strict())
    }

    /// Pair whose untrust is the complement `1 - trust`.
    pub fn from_trust(trust: f64) -> Result<Self, TrustError> {
        Self::with_rule(trust, None, Complementarity::strict())
    }

    pub fn with_rule(
        trust: f64,
        untrust: Option<f64>,
        rule: Complementarity,
    ) -> Result<Self, TrustError> {
        let trust = check_unit("trust", trust)?;
        let untrust = match untrust {
            Some(u) => check_unit("untrust", u)?,
            None => 1.0 - trust,
        };
        if let Complementarity::Strict { tolerance } = rule {
            let gap = (trust + untrust - 1.0).abs();
            if gap > tolerance {
                return Err(TrustError::NotComplementary {
                    trust,
                    untrust,
                    gap,
                });
            }
        }
        Ok(TrustPair { trust, untrust })
    }

    /// Builds a raw propagation vector without any validation. Hop outputs
    /// fed forward under output chaining are neither complementary nor
    /// guaranteed to stay inside [0, 1].
    pub(crate) fn unchecked(trust: f64, untrust: f64) -> Self {
        TrustPair { trust, untrust }
    }

    pub fn trust(&self) -> f64 {
        self.trust
    }

    pub fn untrust(&self) -> f64 {
        self.untrust
    }

    /// Swaps the components: `[T U]` becomes `[U T]`.
    pub fn complement(&self) -> TrustPair {
        TrustPair {
            trust: self.untrust,
            untrust: self.trust,
        }
    }

    pub fn is_complementary(&self, tolerance: f64) -> bool {
        (self.trust + self.untrust - 1.0).abs() <= tolerance
    }
}

impl fmt::Display for TrustPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}]", self.trust, self.untrust)
    }
}

/// Builds a pair, deriving untrust as `1 - trust` when omitted.
pub fn make_pair(trust: f64, untrust: Option<f64>) -> Result<TrustPair, TrustError> {
    TrustPair::with_rule(trust, untrust, Complementarity::strict())
}

pub fn complement(p: TrustPair) -> TrustPair {
    p.complement()
}

/// Linguistic trust label. Variants are declared low to high so the derived
/// ordering is the scale ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrustClass {
    VeryLow,
    Low,
    Indifferent,
    High,
    VeryHigh,
}

impl TrustClass {
    pub const ALL: [TrustClass; 5] = [
        TrustClass::VeryLow,
        TrustClass::Low,
        TrustClass::Indifferent,
        TrustClass::High,
        TrustClass::VeryHigh,
    ];

    /// Lower bound of trust for this label.
    pub fn lower_bound(self) -> f64 {
        match self {
            TrustClass::VeryHigh => 0.85,
            TrustClass::High => 0.70,
            TrustClass::Indifferent => 0.50,
            TrustClass::Low => 0.30,
            TrustClass::VeryLow => 0.0,
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            TrustClass::VeryHigh => "VH",
            TrustClass::High => "H",
            TrustClass::Indifferent => "I",
            TrustClass::Low => "L",
            TrustClass::VeryLow => "VL",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrustClass::VeryHigh => "very high",
            TrustClass::High => "high",
            TrustClass::Indifferent => "indifferent",
            TrustClass::Low => "low",
            TrustClass::VeryLow => "very low",
        }
    }
}

impl fmt::Display for TrustClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbreviation())
    }
}

/// Label of the greatest scale anchor at or below `trust`.
pub fn classify(trust: f64) -> Result<TrustClass, TrustError> {
    let trust = check_unit("trust", trust)?;
    Ok(TrustClass::ALL
        .iter()
        .rev()
        .copied()
        .find(|class| trust >= class.lower_bound())
        .unwrap_or(TrustClass::VeryLow))
}

/// Matrix constants for the trust and untrust tests.
///
/// The trust test multiplies the arrival vector by
/// `[[theta_min, U_next], [theta_max, theta_ind]]`, the untrust test by
/// `[[upsilon_min, T_next], [upsilon_max, upsilon_ind]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_ind: f64,
    pub upsilon_min: f64,
    pub upsilon_max: f64,
    pub upsilon_ind: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            theta_min: 0.51,
            theta_max: 1.00,
            theta_ind: 0.50,
            upsilon_min: 0.49,
            upsilon_max: 0.00,
            upsilon_ind: 0.50,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<(), TrustError> {
        check_unit("theta_min", self.theta_min)?;
        check_unit("theta_max", self.theta_max)?;
        check_unit("theta_ind", self.theta_ind)?;
        check_unit("upsilon_min", self.upsilon_min)?;
        check_unit("upsilon_max", self.upsilon_max)?;
        check_unit("upsilon_ind", self.upsilon_ind)?;
        Ok(())
    }
}

/// Formats `x` with exactly `decimals` fractional digits, truncating toward
/// zero. Works on the shortest round-trip decimal form of `x`, so the result
/// never exceeds `x` once parsed back.
pub fn display_round(x: f64, decimals: usize) -> String {
    let repr = format!("{}", x.abs());
    let (int_part, frac_part) = match repr.split_once('.') {
        Some((i, f)) => (i, f),
        None => (repr.as_str(), ""),
    };
    let mut frac: String = frac_part.chars().take(decimals).collect();
    while frac.len() < decimals {
        frac.push('0');
    }
    let negative = x.is_sign_negative()
        && (int_part.bytes().any(|b| b != b'0') || frac.bytes().any(|b| b != b'0'));
    let sign = if negative { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}
