//! Physical parameters, the driven Hamiltonian and its spectrum.
//!
//! The system has three bare levels `|0⟩, |1⟩, |2⟩` with energies
//! `ω₀ < ω₁ < ω₂`. A field of amplitude `λ` and frequency `ω` couples
//! `|1⟩` and `|2⟩`:
//!
//! ```text
//!        ⎛ ω₀  0          0        ⎞
//! H(t) = ⎜ 0   ω₁         λ e^{iωt} ⎟
//!        ⎝ 0   λ e^{-iωt} ω₂        ⎠
//! ```
//!
//! The eigenvalues do not depend on `t`; the eigenvectors rotate with the
//! drive phase. Units: ħ = k_B = 1.

use nalgebra::{Complex, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Rates `γ_α(ε)` at the two positive transition energies.
///
/// Negative-energy rates are never stored: they follow from detailed
/// balance, `γ_α(−ε) = e^{−β_α ε} γ_α(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingTable {
    pub gamma_c_10: f64,
    pub gamma_c_20: f64,
    pub gamma_h_10: f64,
    pub gamma_h_20: f64,
}

impl CouplingTable {
    pub fn new(gamma_c_10: f64, gamma_c_20: f64, gamma_h_10: f64, gamma_h_20: f64) -> Self {
        Self {
            gamma_c_10,
            gamma_c_20,
            gamma_h_10,
            gamma_h_20,
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        [
            self.gamma_c_10,
            self.gamma_c_20,
            self.gamma_h_10,
            self.gamma_h_20,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub omega0: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// Drive amplitude.
    pub lambda: f64,
    /// Drive frequency.
    pub omega: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    pub couplings: CouplingTable,
}

/// A violated parameter constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    NonFinite,
    LevelOrdering,
    NegativeField,
    /// `λ² ≥ ω₁₀ ω₂₀`: the drive would reorder `ε₀` and `ε₁`.
    FieldTooStrong,
    NonPositiveFrequency,
    NonPositiveBeta,
    /// The cold bath must not be hotter than the hot bath (`β_c ≥ β_h`).
    TemperatureOrder,
    NegativeRate,
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::NonFinite => "non-finite input",
            Violation::LevelOrdering => "omega0 < omega1 < omega2",
            Violation::NegativeField => "lambda >= 0",
            Violation::FieldTooStrong => "lambda^2 < omega10 * omega20",
            Violation::NonPositiveFrequency => "omega > 0",
            Violation::NonPositiveBeta => "beta_h > 0",
            Violation::TemperatureOrder => "beta_c >= beta_h",
            Violation::NegativeRate => "coupling rates >= 0",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidParams(self.violations))
        }
    }
}

/// Time-independent spectrum of `H(t)` and the mixing angle `θ`,
/// `tan θ = 2λ / (ω₂ − ω₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub theta: f64,
}

impl SpectralData {
    pub fn eps10(&self) -> f64 {
        self.eps1 - self.eps0
    }

    pub fn eps20(&self) -> f64 {
        self.eps2 - self.eps0
    }

    pub fn eps21(&self) -> f64 {
        self.eps2 - self.eps1
    }
}

impl EngineParams {
    pub fn omega10(&self) -> f64 {
        self.omega1 - self.omega0
    }

    pub fn omega20(&self) -> f64 {
        self.omega2 - self.omega0
    }

    /// Carnot efficiency `1 − β_h/β_c`.
    pub fn eta_carnot(&self) -> f64 {
        1.0 - self.beta_h / self.beta_c
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let scalars = [
            self.omega0,
            self.omega1,
            self.omega2,
            self.lambda,
            self.omega,
            self.beta_c,
            self.beta_h,
        ];
        if scalars
            .iter()
            .chain(self.couplings.entries().iter())
            .any(|x| !x.is_finite())
        {
            violations.push(Violation::NonFinite);
            return ValidationReport { violations };
        }
        if !(self.omega0 < self.omega1 && self.omega1 < self.omega2) {
            violations.push(Violation::LevelOrdering);
        }
        if self.lambda < 0.0 {
            violations.push(Violation::NegativeField);
        }
        if self.lambda * self.lambda >= self.omega10() * self.omega20() {
            violations.push(Violation::FieldTooStrong);
        }
        if self.omega <= 0.0 {
            violations.push(Violation::NonPositiveFrequency);
        }
        if self.beta_h <= 0.0 {
            violations.push(Violation::NonPositiveBeta);
        }
        if self.beta_c < self.beta_h {
            violations.push(Violation::TemperatureOrder);
        }
        if self.couplings.entries().iter().any(|&g| g < 0.0) {
            violations.push(Violation::NegativeRate);
        }
        ValidationReport { violations }
    }

    /// Real symmetric Hamiltonian at `t = 0`.
    pub fn hamiltonian_at_zero(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.omega0,
            0.0,
            0.0,
            0.0,
            self.omega1,
            self.lambda,
            0.0,
            self.lambda,
            self.omega2,
        )
    }

    pub fn hamiltonian(&self, t: f64) -> Matrix3<C64> {
        let z = C64::new(0.0, 0.0);
        let phase = C64::from_polar(self.lambda, self.omega * t);
        Matrix3::new(
            C64::from(self.omega0),
            z,
            z,
            z,
            C64::from(self.omega1),
            phase,
            z,
            phase.conj(),
            C64::from(self.omega2),
        )
    }

    /// Mixing angle on the branch `[0, π/2)`.
    pub fn mixing_angle(&self) -> Result<f64> {
        let split = self.omega2 - self.omega1;
        if split == 0.0 && self.lambda == 0.0 {
            return Err(Error::Degenerate);
        }
        if self.lambda == 0.0 {
            return Ok(0.0);
        }
        Ok((2.0 * self.lambda).atan2(split))
    }

    /// Eigenvalues from a dense eigendecomposition of `H(0)`, cross-checked
    /// against `ε₁,₂ = (ω₁+ω₂)/2 ∓ √(((ω₂−ω₁)/2)² + λ²)`.
    pub fn spectrum(&self) -> Result<SpectralData> {
        self.validate().into_result()?;
        let theta = self.mixing_angle()?;

        let eig = SymmetricEigen::new(self.hamiltonian_at_zero());
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));

        let closed = closed_form_eigenvalues(self);
        let scale = closed.iter().fold(1e-300_f64, |m, e| m.max(e.abs()));
        let dev = ev
            .iter()
            .zip(closed.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            / scale;
        if dev > 1e-12 {
            return Err(Error::SpectrumMismatch(dev));
        }

        Ok(SpectralData {
            eps0: ev[0],
            eps1: ev[1],
            eps2: ev[2],
            theta,
        })
    }

    /// Instantaneous eigenvectors `|ε₀(t)⟩, |ε₁(t)⟩, |ε₂(t)⟩` in the bare basis.
    pub fn instantaneous_eigenvectors(&self, t: f64) -> Result<[Vector3<C64>; 3]> {
        let theta = self.mixing_angle()?;
        Ok(eigenvectors_for_angle(theta, self.omega, t))
    }
}

/// Closed-form eigenvalues, centred on `(ω₁+ω₂)/2`.
pub fn closed_form_eigenvalues(p: &EngineParams) -> [f64; 3] {
    let half_split = 0.5 * (p.omega2 - p.omega1);
    let r = half_split.hypot(p.lambda);
    let centre = 0.5 * (p.omega1 + p.omega2);
    [p.omega0, centre - r, centre + r]
}

pub(crate) fn eigenvectors_for_angle(theta: f64, omega: f64, t: f64) -> [Vector3<C64>; 3] {
    let (s, c) = (0.5 * theta).sin_cos();
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let rot = C64::from_polar(1.0, omega * t);
    [
        Vector3::new(one, z, z),
        Vector3::new(z, C64::from(c), -rot.conj() * s),
        Vector3::new(z, rot * s, C64::from(c)),
    ]
}
