//! Population/coherence split of the stationary heat flux.
//!
//! The stationary density operator has time-independent eigenvalues; its
//! eigenvectors rotate with the drive. Heat exchanged through changes of the
//! eigenvalues is the diagonal part, which sums to zero over both baths. The
//! rest, carried by the rotating eigenvectors, is the nondiagonal part and
//! produces all the work.

use crate::error::{Error, Result};
use crate::stationary::{Engine, StationaryState};

/// Eigenvalues and rotation of the stationary density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEigensystem {
    pub p0: f64,
    /// Lower eigenvalue of the `ε₁/ε₂` block.
    pub p1: f64,
    pub p2: f64,
    /// `atan2(|Δ|, (ρ₂−ρ₁)/2)`.
    pub big_theta: f64,
    /// `arg(Δ₁ + iΔ₂)`; the eigenvector phase is `ωt` plus this offset.
    pub phi_offset: f64,
}

impl DensityEigensystem {
    pub fn new(state: &StationaryState) -> Self {
        let half = 0.5 * (state.rho2 - state.rho1);
        let mod_delta = state.coherence();
        let mean = 0.5 * (state.rho1 + state.rho2);
        let r = half.hypot(mod_delta);
        Self {
            p0: state.rho0,
            p1: mean - r,
            p2: mean + r,
            big_theta: mod_delta.atan2(half),
            phi_offset: state.delta2.atan2(state.delta1),
        }
    }

    /// `ρ₁ = ρ₂` with no coherence: any rotation diagonalizes the block and
    /// `Θ` is pinned to 0.
    pub fn is_degenerate(&self) -> bool {
        self.p1 == self.p2
    }

    pub fn sorted(&self) -> [f64; 3] {
        let mut p = [self.p0, self.p1, self.p2];
        p.sort_by(f64::total_cmp);
        p
    }
}

/// Heat-flow pattern, read off the signs of
/// `(Q^d_h, Q^d_c, Q^nd_h, Q^nd_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowPattern {
    /// `(+, −, −, +)`: coherent flow runs backwards through the hot bath.
    I,
    /// `(+, −, +, +)`: `η^nd > 1`, both coherent flows feed the work.
    II,
    /// `(+, −, +, −)`: `0 < η^nd < 1`.
    III,
    /// Some flow is zero within tolerance.
    Boundary,
    Other,
}

impl FlowPattern {
    pub fn label(&self) -> &'static str {
        match self {
            FlowPattern::I => "pattern-i",
            FlowPattern::II => "pattern-ii",
            FlowPattern::III => "pattern-iii",
            FlowPattern::Boundary => "boundary",
            FlowPattern::Other => "other",
        }
    }
}

/// Relative size below which a flow counts as zero when classifying.
pub const PATTERN_TOLERANCE: f64 = 1e-12;

/// Heat flows are per unit time (per-period values divided by `T₀`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionReport {
    pub eigensystem: DensityEigensystem,
    pub qd_h: f64,
    pub qd_c: f64,
    pub qnd_h: f64,
    pub qnd_c: f64,
    pub inv_eta_nd: f64,
    pub eta_nd: f64,
    /// Always 0: the diagonal flows cancel.
    pub eta_d: f64,
    pub g_aux1: f64,
    pub g_aux2: f64,
    pub pattern: FlowPattern,
}

impl DecompositionReport {
    /// `η = η^d Q^d_h/Q_h + η^nd Q^nd_h/Q_h`.
    pub fn reconstructed_efficiency(&self) -> f64 {
        let qh = self.qd_h + self.qnd_h;
        self.eta_d * self.qd_h / qh + self.eta_nd * self.qnd_h / qh
    }
}

/// `1/η^nd` in closed form together with `G₁, G₂`.
pub fn inverse_eta_nd(engine: &Engine) -> Result<(f64, f64, f64)> {
    let r = engine.rates();
    let alg = engine.algebra();
    // 4λ²ω²/ε₂₁² = ω² sin²θ
    let g_aux1 = alg.g_big + alg.drive_sq / r.g1;
    let g_aux2 = alg.g_big + alg.drive_sq / r.g2;
    let (x1, x2) = (r.load1(), r.load2());
    let denom = 1.0 - x1 - x2;
    if !(denom != 0.0 && denom.is_finite()) {
        return Err(Error::Boundary("1 - q1/q10 - q2/q20 = 0"));
    }
    let weight = r.g1 * g_aux1 + r.g2 * g_aux2;
    let inv = (r.g1 * r.q1 * g_aux1 + r.g2 * (1.0 - r.q2) * g_aux2) / weight
        + (-r.g1 * (1.0 - r.q1) * x1 + r.g2 * (1.0 - r.q2) * x2) / denom * (g_aux1 + g_aux2)
            / weight;
    Ok((inv, g_aux1, g_aux2))
}

pub fn decompose_heat(engine: &Engine) -> Result<DecompositionReport> {
    let state = engine.stationary_state()?;
    let (inv_eta_nd, g_aux1, g_aux2) = inverse_eta_nd(engine)?;
    let alg = engine.algebra();
    let (qdot_c, qdot_h) = engine.heat_fluxes();

    let qd_h = (1.0 / engine.eta_ssd() - inv_eta_nd) * alg.power + alg.rho0 * alg.p0;
    let qd_c = -qd_h;
    let qnd_h = qdot_h - qd_h;
    let qnd_c = qdot_c - qd_c;

    let mut report = DecompositionReport {
        eigensystem: DensityEigensystem::new(&state),
        qd_h,
        qd_c,
        qnd_h,
        qnd_c,
        inv_eta_nd,
        eta_nd: 1.0 / inv_eta_nd,
        eta_d: 0.0,
        g_aux1,
        g_aux2,
        pattern: FlowPattern::Other,
    };
    report.pattern = classify_flow_pattern(&report);
    Ok(report)
}

pub fn classify_flow_pattern(report: &DecompositionReport) -> FlowPattern {
    let flows = [report.qd_h, report.qd_c, report.qnd_h, report.qnd_c];
    let scale = flows.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
    if flows.iter().any(|f| f.abs() <= PATTERN_TOLERANCE * scale) {
        return FlowPattern::Boundary;
    }
    let s = flows.map(|f| f > 0.0);
    match s {
        [true, false, false, true] => FlowPattern::I,
        [true, false, true, true] => FlowPattern::II,
        [true, false, true, false] => FlowPattern::III,
        _ => FlowPattern::Other,
    }
}
