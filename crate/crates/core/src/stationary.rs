//! Stationary limit of the master equation and its thermodynamics.
//!
//! In the rotating eigenframe the populations `ρ₀, ρ₁, ρ₂` and the
//! coherence `⟨ε₁|ρ|ε₂⟩ = e^{iωt}(Δ₁ + iΔ₂)` obey a linear system with
//! constant coefficients, so the long-time state is a fixed point. Every
//! quantity here is available in closed form; the closed forms are checked
//! at runtime against a dense solve of the same linear system.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix3, Matrix5, Vector3, Vector5};

use crate::dissipator::DissipatorRates;
use crate::error::{Error, Result};
use crate::model::{eigenvectors_for_angle, EngineParams, SpectralData, C64};

/// Relative margin for the strict engine inequalities.
pub const DOMAIN_MARGIN: f64 = 1e-12;

/// Tolerance of the closed-form vs. linear-solve cross-check.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// The five rotating-frame variables `(ρ₀, ρ₁, ρ₂, Δ₁, Δ₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryState {
    pub rho0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl StationaryState {
    pub fn ground() -> Self {
        Self::from_vector(&Vector5::new(1.0, 0.0, 0.0, 0.0, 0.0))
    }

    pub fn from_vector(v: &Vector5<f64>) -> Self {
        Self {
            rho0: v[0],
            rho1: v[1],
            rho2: v[2],
            delta1: v[3],
            delta2: v[4],
        }
    }

    pub fn to_vector(&self) -> Vector5<f64> {
        Vector5::new(self.rho0, self.rho1, self.rho2, self.delta1, self.delta2)
    }

    /// Stationary value of `Δ₂`.
    pub fn delta0(&self) -> f64 {
        self.delta2
    }

    pub fn trace(&self) -> f64 {
        self.rho0 + self.rho1 + self.rho2
    }

    /// `|Δ₁ + iΔ₂|`.
    pub fn coherence(&self) -> f64 {
        self.delta1.hypot(self.delta2)
    }

    /// Density matrix in the bare basis at time `t`. `aux` holds the
    /// rotating-frame coherences `⟨0|ρ|ε₁⟩` and `e^{−iωt}⟨0|ρ|ε₂⟩`.
    pub fn bare_density(&self, theta: f64, omega: f64, t: f64, aux: [C64; 2]) -> Matrix3<C64> {
        let e = eigenvectors_for_angle(theta, omega, t);
        let proj = |a: &Vector3<C64>, b: &Vector3<C64>| a * b.adjoint();
        let rot = C64::from_polar(1.0, omega * t);
        let z = rot * C64::new(self.delta1, self.delta2);
        let c1 = aux[0];
        let c2 = rot * aux[1];
        proj(&e[0], &e[0]) * C64::from(self.rho0)
            + proj(&e[1], &e[1]) * C64::from(self.rho1)
            + proj(&e[2], &e[2]) * C64::from(self.rho2)
            + proj(&e[1], &e[2]) * z
            + proj(&e[2], &e[1]) * z.conj()
            + proj(&e[0], &e[1]) * c1
            + proj(&e[1], &e[0]) * c1.conj()
            + proj(&e[0], &e[2]) * c2
            + proj(&e[2], &e[0]) * c2.conj()
    }
}

/// Closed-form auxiliary scalars of the stationary solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryAlgebra {
    /// `ω² sin²θ`.
    pub drive_sq: f64,
    pub g_big: f64,
    pub z: f64,
    pub power: f64,
    /// `P / (g₂⁻/g₂ − g₁⁻/g₁)`, finite even where the power vanishes.
    pub power_per_gap: f64,
    pub rho0: f64,
    pub p0: f64,
    pub delta0: f64,
}

/// Which engine condition decided the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    Power,
    HotFlux,
    ColdFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainStatus {
    Engine,
    /// The condition holds but only within the relative margin.
    Boundary(Condition),
    Out(Condition),
}

impl fmt::Display for DomainStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainStatus::Engine => f.write_str("in"),
            DomainStatus::Out(Condition::Power) => f.write_str("out: P<=0"),
            DomainStatus::Out(Condition::HotFlux) => f.write_str("out: Qh<=0"),
            DomainStatus::Out(Condition::ColdFlux) => f.write_str("out: Qc>=0"),
            DomainStatus::Boundary(Condition::Power) => f.write_str("boundary: P"),
            DomainStatus::Boundary(Condition::HotFlux) => f.write_str("boundary: Qh"),
            DomainStatus::Boundary(Condition::ColdFlux) => f.write_str("boundary: Qc"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainVerdict {
    pub status: DomainStatus,
    /// `g₁⁻/g₁ < g₂⁻/g₂`.
    pub ratio_test: bool,
    /// `β_c ε₁₀ > β_h ε₂₀`.
    pub necessary: bool,
    /// `q₁/q₁₀ + q₂/q₂₀ < 1`, meaningful only together with `necessary`.
    pub q_plane: bool,
    /// Bounds on `ω₂₀/ω₁₀` and `λ/ω₁₀` implied by the necessary condition.
    pub hamiltonian_bounds: bool,
}

impl DomainVerdict {
    pub fn is_engine(&self) -> bool {
        self.status == DomainStatus::Engine
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    pub eta: f64,
    pub eta_ssd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    pub power: f64,
    pub qdot_c: f64,
    pub qdot_h: f64,
    /// `None` outside the engine domain.
    pub eta: Option<f64>,
    pub eta_ssd: f64,
    pub eta_carnot: f64,
    pub p0: f64,
    pub rho0: f64,
    pub g_big: f64,
    pub z: f64,
    /// Drive period `2π/ω`.
    pub t0: f64,
    pub verdict: DomainVerdict,
}

impl ThermoReport {
    pub fn is_engine(&self) -> bool {
        self.verdict.is_engine()
    }
}

/// A validated parameter set with its spectrum and rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engine {
    params: EngineParams,
    spectrum: SpectralData,
    rates: DissipatorRates,
}

impl Engine {
    pub fn new(params: EngineParams) -> Result<Self> {
        let spectrum = params.spectrum()?;
        let rates = DissipatorRates::new(&params, &spectrum)?;
        Ok(Self {
            params,
            spectrum,
            rates,
        })
    }

    /// Same engine driven at another frequency; spectrum and rates do not
    /// depend on `ω`.
    pub fn with_frequency(&self, omega: f64) -> Result<Self> {
        let mut params = self.params;
        params.omega = omega;
        params.validate().into_result()?;
        Ok(Self { params, ..*self })
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn spectrum(&self) -> &SpectralData {
        &self.spectrum
    }

    pub fn rates(&self) -> &DissipatorRates {
        &self.rates
    }

    /// `ω sin θ`.
    pub fn drive(&self) -> f64 {
        self.params.omega * self.spectrum.theta.sin()
    }

    /// `ε̃ = ε₂₁ − ω cos θ`.
    pub fn detuning(&self) -> f64 {
        self.spectrum.eps21() - self.params.omega * self.spectrum.theta.cos()
    }

    /// Generator of the rotating-frame dynamics, `∂ₜv = M v`.
    pub fn generator(&self) -> Matrix5<f64> {
        let r = &self.rates;
        let ws = self.drive();
        let g = 0.5 * (r.g1 + r.g2);
        let et = self.detuning();
        Matrix5::new(
            -(r.g1m + r.g2m),
            r.g1,
            r.g2,
            0.0,
            0.0,
            r.g1m,
            -r.g1,
            0.0,
            0.0,
            -ws,
            r.g2m,
            0.0,
            -r.g2,
            0.0,
            ws,
            0.0,
            0.0,
            0.0,
            -g,
            -et,
            0.0,
            0.5 * ws,
            -0.5 * ws,
            et,
            -g,
        )
    }

    /// The generator with its first row replaced by the normalization row
    /// `(1, 1, 1, 0, 0)`; the stationary state solves `𝓛 v = e₁`.
    pub fn liouvillian(&self) -> Matrix5<f64> {
        with_normalization_row(self.generator())
    }

    pub fn algebra(&self) -> StationaryAlgebra {
        let r = &self.rates;
        let s = &self.spectrum;
        let sin = s.theta.sin();
        let drive_sq = (self.params.omega * sin).powi(2);
        let g = 0.5 * (r.g1 + r.g2);
        let et = self.detuning();
        let g_big = g + et * et / g;
        let (r1, r2) = (r.ratio1(), r.ratio2());
        let gap = r2 - r1;
        let a = drive_sq / (2.0 * g_big);
        let z = (1.0 + a * (1.0 / r.g1 + 1.0 / r.g2)) * (1.0 + r1 + r2)
            + a * (1.0 / r.g1 - 1.0 / r.g2) * gap;
        let power_per_gap = s.eps21() * a / z;
        let power = power_per_gap * gap;
        let rho0 = (1.0 - (1.0 / r.g1 - 1.0 / r.g2) * power / s.eps21()) / (1.0 + r1 + r2);
        let delta0 = -self.params.omega * sin / (2.0 * g_big) * gap / z;
        StationaryAlgebra {
            drive_sq,
            g_big,
            z,
            power,
            power_per_gap,
            rho0,
            p0: r.direct_flow(),
            delta0,
        }
    }

    /// Closed-form stationary state, verified against a dense solve.
    pub fn stationary_state(&self) -> Result<StationaryState> {
        let closed = self.closed_form_state()?;
        let solved = self.solve_stationary()?;
        let dev = relative_deviation(&closed.to_vector(), &solved.to_vector());
        if dev > ORACLE_TOLERANCE {
            return Err(Error::OracleMismatch(dev));
        }
        Ok(closed)
    }

    pub fn closed_form_state(&self) -> Result<StationaryState> {
        let alg = self.algebra();
        if !(alg.g_big > 0.0) {
            return Err(Error::Singular("G <= 0"));
        }
        if !(alg.z > 0.0 && alg.z.is_finite()) {
            return Err(Error::Singular("Z <= 0"));
        }
        let r = &self.rates;
        let ws = self.drive();
        let g = 0.5 * (r.g1 + r.g2);
        Ok(StationaryState {
            rho0: alg.rho0,
            rho1: r.ratio1() * alg.rho0 - ws / r.g1 * alg.delta0,
            rho2: r.ratio2() * alg.rho0 + ws / r.g2 * alg.delta0,
            delta1: -self.detuning() / g * alg.delta0,
            delta2: alg.delta0,
        })
    }

    /// Dense LU solve of `𝓛 v = e₁`.
    pub fn solve_stationary(&self) -> Result<StationaryState> {
        let rhs = Vector5::new(1.0, 0.0, 0.0, 0.0, 0.0);
        self.liouvillian()
            .lu()
            .solve(&rhs)
            .map(|v| StationaryState::from_vector(&v))
            .ok_or(Error::Singular("Liouvillian is not invertible"))
    }

    pub fn power(&self) -> f64 {
        self.algebra().power
    }

    /// `(Q̇_c, Q̇_h)` at stationarity.
    pub fn heat_fluxes(&self) -> (f64, f64) {
        let alg = self.algebra();
        self.fluxes_from(&alg)
    }

    fn fluxes_from(&self, alg: &StationaryAlgebra) -> (f64, f64) {
        let (w_c, w_h) = self.flux_weights();
        let direct = alg.rho0 * alg.p0;
        (w_c * alg.power - direct, w_h * alg.power + direct)
    }

    /// Coefficients of `P` in `Q̇_c` and `Q̇_h`.
    fn flux_weights(&self) -> (f64, f64) {
        let s = &self.spectrum;
        let (q1, q2) = (self.rates.q1, self.rates.q2);
        let (e10, e20, e21) = (s.eps10(), s.eps20(), s.eps21());
        (
            (e20 * q2 - e10 * (1.0 - q1)) / e21,
            (e20 * (1.0 - q2) - e10 * q1) / e21,
        )
    }

    /// Scovil–Schulz-DuBois-like bound `η^SSD`.
    pub fn eta_ssd(&self) -> f64 {
        let s = &self.spectrum;
        let ratio = s.eps10() / s.eps20();
        (1.0 - ratio) / (1.0 - self.rates.q2 - ratio * self.rates.q1)
    }

    pub fn efficiency(&self) -> Result<Efficiency> {
        let alg = self.algebra();
        self.efficiency_from(&alg)
    }

    fn efficiency_from(&self, alg: &StationaryAlgebra) -> Result<Efficiency> {
        if !(alg.power > 0.0) {
            return Err(Error::NotAnEngine("P<=0".into()));
        }
        let (_, qdot_h) = self.fluxes_from(alg);
        if !(qdot_h > 0.0) {
            return Err(Error::NotAnEngine("Qh<=0".into()));
        }
        let eta_ssd = self.eta_ssd();
        // η^SSD · (P/η^SSD) / (P/η^SSD + ρ₀P₀), arranged so that η = η^SSD
        // exactly when ρ₀P₀ = 0 and never rounds above it otherwise
        let reduced = alg.power / eta_ssd;
        Ok(Efficiency {
            eta: eta_ssd / (1.0 + alg.rho0 * alg.p0 / reduced),
            eta_ssd,
        })
    }

    pub fn engine_domain(&self) -> DomainVerdict {
        let alg = self.algebra();
        self.domain_from(&alg)
    }

    fn domain_from(&self, alg: &StationaryAlgebra) -> DomainVerdict {
        let r = &self.rates;
        let (r1, r2) = (r.ratio1(), r.ratio2());
        let (w_c, w_h) = self.flux_weights();
        let (qdot_c, qdot_h) = self.fluxes_from(alg);
        let direct = (alg.rho0 * alg.p0).abs();

        let status = classify(
            alg.power,
            alg.power_per_gap.abs() * (r1 + r2),
            Condition::Power,
        )
        .or_else(|| classify(qdot_h, (w_h * alg.power).abs() + direct, Condition::HotFlux))
        .or_else(|| {
            classify(
                -qdot_c,
                (w_c * alg.power).abs() + direct,
                Condition::ColdFlux,
            )
        })
        .unwrap_or(DomainStatus::Engine);

        let necessary = r.threshold_gap() > 0.0;
        DomainVerdict {
            status,
            ratio_test: r1 < r2,
            necessary,
            q_plane: necessary && r.q_load() < 1.0,
            hamiltonian_bounds: self.hamiltonian_bounds(),
        }
    }

    /// `ω₂₀/ω₁₀ < 1/(1−η^C)` and
    /// `(λ/ω₁₀)² < [x − (1−η^C)][1 − (1−η^C)x] / (2−η^C)²` with `x = ω₂₀/ω₁₀`.
    pub fn hamiltonian_bounds(&self) -> bool {
        let p = &self.params;
        let x = p.omega20() / p.omega10();
        let l = p.lambda / p.omega10();
        let tau = 1.0 - p.eta_carnot();
        let eta_c = p.eta_carnot();
        x < 1.0 / tau && l * l < (x - tau) * (1.0 - tau * x) / (2.0 - eta_c).powi(2)
    }

    /// Drive frequency maximizing the power.
    pub fn optimal_frequency(&self) -> f64 {
        let g = self.rates.g1 + self.rates.g2;
        let e21 = self.spectrum.eps21();
        (e21 * e21 + 0.25 * g * g) / (self.params.omega2 - self.params.omega1)
    }

    pub fn thermo_report(&self) -> ThermoReport {
        let alg = self.algebra();
        let (qdot_c, qdot_h) = self.fluxes_from(&alg);
        let verdict = self.domain_from(&alg);
        let eta = if verdict.is_engine() {
            self.efficiency_from(&alg).ok().map(|e| e.eta)
        } else {
            None
        };
        ThermoReport {
            power: alg.power,
            qdot_c,
            qdot_h,
            eta,
            eta_ssd: self.eta_ssd(),
            eta_carnot: self.params.eta_carnot(),
            p0: alg.p0,
            rho0: alg.rho0,
            g_big: alg.g_big,
            z: alg.z,
            t0: 2.0 * PI / self.params.omega,
            verdict,
        }
    }
}

pub(crate) fn with_normalization_row(mut m: Matrix5<f64>) -> Matrix5<f64> {
    m.set_row(0, &nalgebra::RowVector5::new(1.0, 1.0, 1.0, 0.0, 0.0));
    m
}

/// `Some(status)` when the condition `value > 0` fails or sits within the
/// margin, `None` when it clearly holds.
fn classify(value: f64, scale: f64, cond: Condition) -> Option<DomainStatus> {
    if !(value > 0.0) {
        Some(DomainStatus::Out(cond))
    } else if value <= DOMAIN_MARGIN * scale {
        Some(DomainStatus::Boundary(cond))
    } else {
        None
    }
}

/// `‖a − b‖∞ / ‖b‖∞`.
pub fn relative_deviation(a: &Vector5<f64>, b: &Vector5<f64>) -> f64 {
    (a - b).amax() / b.amax()
}
