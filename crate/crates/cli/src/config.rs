//! Run configuration.
//!
//! A JSON object whose physical inputs are multiples of `ω₁₀` (energies,
//! rates, frequencies) or of `1/ω₁₀` (inverse temperatures, times).

use std::fmt;

use clap::ValueEnum;
use maser_core::CouplingScheme;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Stationary,
    Sweep,
    Dynamics,
    Fcs,
    TurScan,
    Flows,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Stationary => "stationary",
            Mode::Sweep => "sweep",
            Mode::Dynamics => "dynamics",
            Mode::Fcs => "fcs",
            Mode::TurScan => "tur-scan",
            Mode::Flows => "flows",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyPolicy {
    /// `ω = ω*`, the power maximum.
    Optimal,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Omega20,
    Lambda,
    Omega,
    BetaC,
    BetaH,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Omega20 => "omega20",
            Axis::Lambda => "lambda",
            Axis::Omega => "omega",
            Axis::BetaC => "beta_c",
            Axis::BetaH => "beta_h",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridAxis {
    /// Grid values; the end points are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == n - 1 {
                    return self.max;
                }
                let s = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min * (1.0 - s) + self.max * s,
                    Spacing::Log => (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialSpec {
    Ground,
    /// Bare-basis populations `(ρ₀₀, ρ₁₁, ρ₂₂)` with no coherence.
    Diagonal([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub t_end: f64,
    /// Defaults to the stability limit of the generator.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Keep every `stride`-th step.
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_initial")]
    pub initial: InitialSpec,
}

fn default_stride() -> usize {
    1
}

fn default_initial() -> InitialSpec {
    InitialSpec::Ground
}

fn default_frequency() -> FrequencyPolicy {
    FrequencyPolicy::Optimal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: CouplingScheme,
    #[serde(default)]
    pub omega20: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    pub beta_c: Option<f64>,
    pub beta_h: Option<f64>,
    #[serde(default = "default_frequency")]
    pub frequency: FrequencyPolicy,
    /// Outer axis first.
    #[serde(default)]
    pub grid: Vec<GridAxis>,
    #[serde(default)]
    pub dynamics: Option<DynamicsConfig>,
    #[serde(default)]
    pub workers: Option<usize>,
}

/// Parse a config document, naming the offending field and position.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("field `{path}`: {inner}"))
        }
    })
}

/// Canonical sweep box: `ω₂₀/ω₁₀ < 1/(1−η^C)` and the largest `λ/ω₁₀`
/// allowed by the matching field bound, `η^C / (2√(1−η^C))`.
pub fn default_sweep_grid(beta_c: f64, beta_h: f64) -> Vec<GridAxis> {
    let tau = beta_h / beta_c;
    vec![
        GridAxis {
            axis: Axis::Omega20,
            min: 1.0,
            max: 1.0 / tau,
            count: 101,
            spacing: Spacing::Linear,
        },
        GridAxis {
            axis: Axis::Lambda,
            min: 0.0,
            max: (1.0 - tau) / (2.0 * tau.sqrt()),
            count: 101,
            spacing: Spacing::Linear,
        },
    ]
}

impl RunConfig {
    fn swept(&self, axis: Axis) -> bool {
        self.grid.iter().any(|g| g.axis == axis)
    }

    /// Fill defaults for `mode` and check every structural constraint.
    pub fn resolve(mut self, mode: Mode) -> Result<RunConfig, CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.scheme
            .build_table()
            .map_err(|e| CliError::Config(format!("field `scheme`: {e}")))?;

        if mode == Mode::Sweep && self.grid.is_empty() {
            if let (Some(bc), Some(bh)) = (self.beta_c, self.beta_h) {
                if bc > bh && bh > 0.0 {
                    self.grid = default_sweep_grid(bc, bh);
                }
            }
        }

        match mode {
            Mode::Stationary | Mode::Dynamics if !self.grid.is_empty() => {
                return bad(format!(
                    "field `grid`: mode {mode} evaluates a single point"
                ));
            }
            Mode::Sweep | Mode::Fcs | Mode::TurScan | Mode::Flows if self.grid.is_empty() => {
                return bad(format!("field `grid`: mode {mode} needs at least one axis"));
            }
            _ => {}
        }
        if self.grid.len() > 2 {
            return bad("field `grid`: at most two axes".into());
        }
        for (i, g) in self.grid.iter().enumerate() {
            let at = format!("field `grid[{i}]`");
            if g.count < 2 {
                return bad(format!("{at}: count must be at least 2, got {}", g.count));
            }
            if !(g.min.is_finite() && g.max.is_finite() && g.min < g.max) {
                return bad(format!(
                    "{at}: need finite min < max, got [{}, {}]",
                    g.min, g.max
                ));
            }
            if g.spacing == Spacing::Log && g.min <= 0.0 {
                return bad(format!("{at}: log spacing needs min > 0"));
            }
            if self.grid[..i].iter().any(|h| h.axis == g.axis) {
                return bad(format!("{at}: axis `{}` swept twice", g.axis.name()));
            }
        }
        if self.swept(Axis::Omega) && self.frequency == FrequencyPolicy::Optimal {
            return bad(
                "field `frequency`: policy \"optimal\" cannot be combined with an omega axis"
                    .into(),
            );
        }
        if let FrequencyPolicy::Fixed(w) = self.frequency {
            if !(w > 0.0 && w.is_finite()) {
                return bad(format!(
                    "field `frequency.fixed`: must be positive, got {w}"
                ));
            }
        }
        for (axis, value) in [
            (Axis::Omega20, self.omega20),
            (Axis::Lambda, self.lambda),
            (Axis::BetaC, self.beta_c),
            (Axis::BetaH, self.beta_h),
        ] {
            match value {
                None if !self.swept(axis) => {
                    return bad(format!("missing field `{}`", axis.name()));
                }
                Some(v) if !v.is_finite() => {
                    return bad(format!("field `{}`: must be finite", axis.name()));
                }
                _ => {}
            }
        }

        if mode == Mode::Dynamics {
            let Some(d) = self.dynamics else {
                return bad("missing field `dynamics` for mode dynamics".into());
            };
            if !(d.t_end > 0.0 && d.t_end.is_finite()) {
                return bad(format!(
                    "field `dynamics.t_end`: must be positive, got {}",
                    d.t_end
                ));
            }
            if let Some(dt) = d.dt {
                if !(dt > 0.0 && dt.is_finite()) {
                    return bad(format!("field `dynamics.dt`: must be positive, got {dt}"));
                }
            }
            if d.stride == 0 {
                return bad("field `dynamics.stride`: must be at least 1".into());
            }
        } else if self.dynamics.is_some() {
            return bad(format!(
                "field `dynamics`: only used by mode dynamics, not {mode}"
            ));
        }
        if self.workers == Some(0) {
            return bad("field `workers`: must be at least 1".into());
        }
        Ok(self)
    }
}
