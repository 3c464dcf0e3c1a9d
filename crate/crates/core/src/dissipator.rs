//! Effective transition rates of the global dissipator.
//!
//! Projecting `L_c = |0⟩⟨1|` and `L_h = |0⟩⟨2|` onto the instantaneous
//! eigenbasis gives decay `ε₁ → ε₀` with weight `cos²(θ/2)` from the cold
//! bath and `sin²(θ/2)` from the hot bath, and the mirror image for
//! `ε₂ → ε₀`. Upward rates follow from detailed balance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CouplingTable, EngineParams, SpectralData};

/// The named coupling patterns, each scaled by a rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CouplingScheme {
    /// `γ_c(ε₁₀) = γ_h(ε₂₀) = γ`, cross terms zero.
    Resonant {
        gamma: f64,
    },
    /// Cross terms `γ_c(ε₂₀) = γ_h(ε₁₀) = ratio · γ` with `0 < ratio < 1`.
    Intermediate {
        gamma: f64,
        ratio: f64,
    },
    /// All four rates equal `γ`.
    Uniform {
        gamma: f64,
    },
    Custom {
        table: CouplingTable,
    },
}

impl CouplingScheme {
    pub fn build_table(&self) -> Result<CouplingTable> {
        let check_gamma = |gamma: f64| {
            if gamma > 0.0 && gamma.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidScheme(format!(
                    "gamma must be positive, got {gamma}"
                )))
            }
        };
        match *self {
            CouplingScheme::Resonant { gamma } => {
                check_gamma(gamma)?;
                Ok(CouplingTable::new(gamma, 0.0, 0.0, gamma))
            }
            CouplingScheme::Intermediate { gamma, ratio } => {
                check_gamma(gamma)?;
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::InvalidScheme(format!(
                        "intermediate ratio must lie in (0, 1), got {ratio}"
                    )));
                }
                let cross = ratio * gamma;
                Ok(CouplingTable::new(gamma, cross, cross, gamma))
            }
            CouplingScheme::Uniform { gamma } => {
                check_gamma(gamma)?;
                Ok(CouplingTable::new(gamma, gamma, gamma, gamma))
            }
            CouplingScheme::Custom { table } => {
                if table
                    .entries()
                    .iter()
                    .any(|g| !(g.is_finite() && *g >= 0.0))
                {
                    return Err(Error::InvalidScheme(
                        "custom rates must be finite and nonnegative".into(),
                    ));
                }
                Ok(table)
            }
        }
    }

    pub fn is_resonant(&self) -> bool {
        matches!(self, CouplingScheme::Resonant { .. })
    }
}

/// Per-reservoir pieces of one transition channel `ε_n ↔ ε₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRates {
    /// Transition energy `ε_n − ε₀`.
    pub energy: f64,
    pub down_cold: f64,
    pub down_hot: f64,
    pub up_cold: f64,
    pub up_hot: f64,
}

impl ChannelRates {
    pub fn down(&self) -> f64 {
        self.down_cold + self.down_hot
    }

    pub fn up(&self) -> f64 {
        self.up_cold + self.up_hot
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipatorRates {
    pub g1: f64,
    pub g2: f64,
    pub g1m: f64,
    pub g2m: f64,
    /// Fraction of `g₁` carried by the hot bath.
    pub q1: f64,
    /// Fraction of `g₂` carried by the cold bath.
    pub q2: f64,
    /// Threshold ratios of the positive-power condition. Infinite or NaN
    /// when the bath exponentials make the ratio meaningless (for example
    /// at equal temperatures); use [`DissipatorRates::q_load`] instead of
    /// dividing by them.
    pub q10: f64,
    pub q20: f64,
    pub channel1: ChannelRates,
    pub channel2: ChannelRates,
    bath: BathFactors,
}

/// `e^{−β ε}` for both baths and both gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BathFactors {
    c10: f64,
    h10: f64,
    c20: f64,
    h20: f64,
}

impl DissipatorRates {
    pub fn new(params: &EngineParams, spec: &SpectralData) -> Result<Self> {
        let table = params.couplings;
        let (s, c) = (0.5 * spec.theta).sin_cos();
        let (s2, c2) = (s * s, c * c);
        let (e10, e20) = (spec.eps10(), spec.eps20());
        let bath = BathFactors {
            c10: (-params.beta_c * e10).exp(),
            h10: (-params.beta_h * e10).exp(),
            c20: (-params.beta_c * e20).exp(),
            h20: (-params.beta_h * e20).exp(),
        };

        let down_c1 = table.gamma_c_10 * c2;
        let down_h1 = table.gamma_h_10 * s2;
        let down_h2 = table.gamma_h_20 * c2;
        let down_c2 = table.gamma_c_20 * s2;
        let channel1 = ChannelRates {
            energy: e10,
            down_cold: down_c1,
            down_hot: down_h1,
            up_cold: bath.c10 * down_c1,
            up_hot: bath.h10 * down_h1,
        };
        let channel2 = ChannelRates {
            energy: e20,
            down_cold: down_c2,
            down_hot: down_h2,
            up_cold: bath.c20 * down_c2,
            up_hot: bath.h20 * down_h2,
        };

        let g1 = channel1.down();
        let g2 = channel2.down();
        if !(g1 > 0.0) {
            return Err(Error::ZeroChannel("g1"));
        }
        if !(g2 > 0.0) {
            return Err(Error::ZeroChannel("g2"));
        }

        let numerator = bath.h20 - bath.c10;
        Ok(Self {
            g1,
            g2,
            g1m: channel1.up(),
            g2m: channel2.up(),
            q1: down_h1 / g1,
            q2: down_c2 / g2,
            q10: numerator / (bath.h10 - bath.c10),
            q20: numerator / (bath.h20 - bath.c20),
            channel1,
            channel2,
            bath,
        })
    }

    /// `g₁⁻/g₁`.
    pub fn ratio1(&self) -> f64 {
        self.g1m / self.g1
    }

    /// `g₂⁻/g₂`.
    pub fn ratio2(&self) -> f64 {
        self.g2m / self.g2
    }

    /// `q₁/q₁₀ + q₂/q₂₀`, evaluated without forming the thresholds so that a
    /// vanishing `q` contributes exactly zero.
    pub fn q_load(&self) -> f64 {
        self.load1() + self.load2()
    }

    /// `q₁/q₁₀`.
    pub fn load1(&self) -> f64 {
        let b = &self.bath;
        self.q1 * (b.h10 - b.c10) / (b.h20 - b.c10)
    }

    /// `q₂/q₂₀`.
    pub fn load2(&self) -> f64 {
        let b = &self.bath;
        self.q2 * (b.h20 - b.c20) / (b.h20 - b.c10)
    }

    /// `e^{−β_h ε₂₀} − e^{−β_c ε₁₀}`; positive exactly when `β_c ε₁₀ > β_h ε₂₀`.
    pub fn threshold_gap(&self) -> f64 {
        self.bath.h20 - self.bath.c10
    }

    /// Direct-flow coefficient `P₀`.
    pub fn direct_flow(&self) -> f64 {
        let b = &self.bath;
        self.channel1.energy * self.g1 * self.q1 * (1.0 - self.q1) * (b.h10 - b.c10)
            + self.channel2.energy * self.g2 * self.q2 * (1.0 - self.q2) * (b.h20 - b.c20)
    }
}
