//! Power fluctuations and the thermodynamic uncertainty relation.
//!
//! Counting the energy exchanged with the baths tilts the jump terms of the
//! generator by `e^{∓χε}`. The leading eigenvalue of the tilted generator is
//! the scaled cumulant generating function of the transferred energy, whose
//! first two derivatives at `χ = 0` give the power and its variance.

use nalgebra::{Matrix5, Vector5};

use crate::error::{Error, Result};
use crate::stationary::{with_normalization_row, Engine};

/// Default counting-field step in units of `1/ε₂₀`.
pub const DEFAULT_CHI_STEP: f64 = 1e-2;

/// The four closed-form variance parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceParts {
    pub var1: f64,
    pub var2: f64,
    pub var3: f64,
    pub var4: f64,
}

impl VarianceParts {
    pub fn total(&self) -> f64 {
        self.var1 + self.var2 + self.var3 + self.var4
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcsReport {
    pub sigma_dot: f64,
    pub var1: f64,
    pub var2: f64,
    pub var3: f64,
    pub var4: f64,
    pub var_total: f64,
    /// `None` when the power vanishes.
    pub tur_product: Option<f64>,
}

/// Entropy production rate `σ̇ = −β_c Q̇_c − β_h Q̇_h`.
///
/// Written as `(β_c − β_h)[(1/η^SSD − 1/η^C)P + ρ₀P₀]` with
/// `(β_c − β_h)/η^C = β_c` substituted, which stays finite at equal
/// temperatures.
pub fn entropy_production(engine: &Engine) -> f64 {
    let p = engine.params();
    let alg = engine.algebra();
    let hot = alg.power / engine.eta_ssd() + alg.rho0 * alg.p0;
    (p.beta_c - p.beta_h) * hot - p.beta_c * alg.power
}

/// Closed-form variance parts.
///
/// Every part is proportional to `P/(g₂⁻/g₂ − g₁⁻/g₁)`, which is finite at
/// zero power, so the parts stay well defined on the domain boundary.
pub fn power_variance(engine: &Engine) -> VarianceParts {
    let r = engine.rates();
    let alg = engine.algebra();
    let e21 = engine.spectrum().eps21();
    let (r1, r2) = (r.ratio1(), r.ratio2());
    let s = 1.0 + r1 + r2;
    let a = 1.0 / r.g1 + 1.0 / r.g2;
    let b = 1.0 / r.g1 - 1.0 / r.g2;
    let k = a - 4.0 / (r.g1 + r.g2) + 4.0 / alg.g_big;
    let dr = r2 - r1;
    let p = alg.power;
    let per_gap = alg.power_per_gap;

    VarianceParts {
        var1: e21 * (r1 + r2) * per_gap,
        var2: -((a + b * dr) / s + k) * p * p,
        var3: (b * b + a * k * s) * p * p * per_gap / e21,
        var4: (a * (1.0 + 1.0 / s) + b * dr / s + k) * b * p * p * p / e21,
    }
}

/// `U = σ̇ var P / P²`.
pub fn tur_product(engine: &Engine) -> Result<f64> {
    let p = engine.power();
    if p == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(entropy_production(engine) * power_variance(engine).total() / (p * p))
}

/// `x / tanh(x/2)`: the resonant TUR product restricted to the first
/// variance part, with `x = β_c ε₁₀ − β_h ε₂₀`. Never below 2.
pub fn resonant_tur_floor(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // series: 2 + x²/6 − x⁴/360
        let x2 = x * x;
        2.0 + x2 / 6.0 - x2 * x2 / 360.0
    } else {
        x / (0.5 * x).tanh()
    }
}

pub fn fcs_report(engine: &Engine) -> FcsReport {
    let parts = power_variance(engine);
    let sigma_dot = entropy_production(engine);
    let var_total = parts.total();
    let p = engine.power();
    FcsReport {
        sigma_dot,
        var1: parts.var1,
        var2: parts.var2,
        var3: parts.var3,
        var4: parts.var4,
        var_total,
        tur_product: (p != 0.0).then(|| sigma_dot * var_total / (p * p)),
    }
}

/// Generator with the jump terms tilted per reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedLiouvillian {
    pub chi_c: f64,
    pub chi_h: f64,
    /// Tilted dynamical generator (no normalization row).
    pub matrix: Matrix5<f64>,
}

impl TiltedLiouvillian {
    /// Same counting field on both baths.
    pub fn new(engine: &Engine, chi: f64) -> Self {
        Self::per_reservoir(engine, chi, chi)
    }

    pub fn per_reservoir(engine: &Engine, chi_c: f64, chi_h: f64) -> Self {
        let r = engine.rates();
        let mut m = engine.generator();
        let (c1, c2) = (&r.channel1, &r.channel2);
        let down =
            |e: f64, cold: f64, hot: f64| cold * (-chi_c * e).exp() + hot * (-chi_h * e).exp();
        let up = |e: f64, cold: f64, hot: f64| cold * (chi_c * e).exp() + hot * (chi_h * e).exp();
        m[(0, 1)] = down(c1.energy, c1.down_cold, c1.down_hot);
        m[(0, 2)] = down(c2.energy, c2.down_cold, c2.down_hot);
        m[(1, 0)] = up(c1.energy, c1.up_cold, c1.up_hot);
        m[(2, 0)] = up(c2.energy, c2.up_cold, c2.up_hot);
        Self {
            chi_c,
            chi_h,
            matrix: m,
        }
    }

    /// Layout with the first row replaced by the normalization row, for
    /// comparison against [`Engine::liouvillian`].
    pub fn with_normalization_row(&self) -> Matrix5<f64> {
        with_normalization_row(self.matrix)
    }

    /// Eigenvalue with the largest real part.
    pub fn leading_eigenvalue(&self) -> f64 {
        self.matrix
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// First two cumulants of the transferred energy per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cumulants {
    pub mean: f64,
    pub variance: f64,
}

/// Cumulants from central differences of the leading tilted eigenvalue,
/// with one Richardson level. `step` is in units of `1/ε₂₀`.
pub fn scgf_cumulants(engine: &Engine, step: f64) -> Cumulants {
    let h = step / engine.spectrum().eps20();
    let lam = |chi: f64| TiltedLiouvillian::new(engine, chi).leading_eigenvalue();
    let l0 = lam(0.0);
    let diffs = |h: f64| {
        let (lp, lm) = (lam(h), lam(-h));
        ((lp - lm) / (2.0 * h), (lp - 2.0 * l0 + lm) / (h * h))
    };
    let (d1, d2) = diffs(h);
    let (d1h, d2h) = diffs(0.5 * h);
    Cumulants {
        mean: (4.0 * d1h - d1) / 3.0,
        variance: (4.0 * d2h - d2) / 3.0,
    }
}

/// Cumulants from first- and second-order perturbation theory of the
/// tilted generator around its stationary state.
pub fn perturbative_cumulants(engine: &Engine) -> Result<Cumulants> {
    let r = engine.rates();
    let v = engine.stationary_state()?.to_vector();
    let (e10, e20) = (r.channel1.energy, r.channel2.energy);

    let mut m1 = Matrix5::zeros();
    m1[(0, 1)] = -e10 * r.g1;
    m1[(0, 2)] = -e20 * r.g2;
    m1[(1, 0)] = e10 * r.g1m;
    m1[(2, 0)] = e20 * r.g2m;
    let mut m2 = Matrix5::zeros();
    m2[(0, 1)] = e10 * e10 * r.g1;
    m2[(0, 2)] = e20 * e20 * r.g2;
    m2[(1, 0)] = e10 * e10 * r.g1m;
    m2[(2, 0)] = e20 * e20 * r.g2m;

    let trace = |x: &Vector5<f64>| x[0] + x[1] + x[2];
    let m1v = m1 * v;
    let k1 = trace(&m1v);

    let mut rhs = -(m1v - v * k1);
    rhs[0] = 0.0;
    let x = engine
        .liouvillian()
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("Liouvillian is not invertible"))?;
    let k2 = trace(&(m2 * v)) + 2.0 * trace(&(m1 * x));
    Ok(Cumulants {
        mean: k1,
        variance: k2,
    })
}
