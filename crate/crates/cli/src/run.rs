//! Point evaluation and the per-mode tables.

use maser_core::decomposition::{decompose_heat, DecompositionReport};
use maser_core::dynamics::{integrate_with_stride, observables, step_limit, InitialState};
use maser_core::fcs::{fcs_report, FcsReport};
use maser_core::{CouplingTable, Engine, EngineParams, Error, ThermoReport, C64};
use nalgebra::Matrix3;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Axis, FrequencyPolicy, InitialSpec, Mode, RunConfig};
use crate::table::{Cell, Table};
use crate::CliError;

/// Relative size of roundoff tolerated by the per-row invariant checks.
pub const ROW_TOLERANCE: f64 = 1e-12;

const INPUTS: &[&str] = &[
    "omega20_over_omega10",
    "lambda_over_omega10",
    "omega_over_omega10",
    "beta_c_times_omega10",
    "beta_h_times_omega10",
];

const STATIONARY: &[&str] = &[
    "eps10_over_omega10",
    "eps20_over_omega10",
    "omega_star_over_omega10",
    "P_over_omega10sq",
    "Qc_over_omega10sq",
    "Qh_over_omega10sq",
    "P0_over_omega10sq",
    "rho0",
    "eta",
    "eta_ssd",
    "eta_carnot",
    "Qd_h_over_omega10sq",
    "Qd_c_over_omega10sq",
    "Qnd_h_over_omega10sq",
    "Qnd_c_over_omega10sq",
    "inv_eta_nd",
    "eta_nd",
    "pattern",
    "sigma_dot_over_omega10",
    "var1_over_omega10cu",
    "var2_over_omega10cu",
    "var3_over_omega10cu",
    "var4_over_omega10cu",
    "varP_over_omega10cu",
    "U",
];

const SWEEP: &[&str] = &[
    "P_over_omega10sq",
    "Qc_over_omega10sq",
    "Qh_over_omega10sq",
    "eta",
    "eta_ssd",
    "eta_nd",
    "pattern",
    "sigma_dot_over_omega10",
    "varP_over_omega10cu",
    "U",
];

const FCS: &[&str] = &[
    "P_over_omega10sq",
    "sigma_dot_over_omega10",
    "var1_over_omega10cu",
    "var2_over_omega10cu",
    "var3_over_omega10cu",
    "var4_over_omega10cu",
    "varP_over_omega10cu",
    "U",
];

const TUR: &[&str] = &[
    "P_over_omega10sq",
    "sigma_dot_over_omega10",
    "varP_over_omega10cu",
    "U",
];

const FLOWS: &[&str] = &[
    "Qh_over_omega10sq",
    "Qd_h_over_omega10sq",
    "Qnd_h_over_omega10sq",
    "Qnd_c_over_omega10sq",
    "inv_eta_nd",
    "eta_nd",
    "pattern",
];

const FLAG: &str = "domain_flag";

/// Everything computed at one parameter point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub omega20: f64,
    pub lambda: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    pub omega: Option<f64>,
    pub engine: Option<Engine>,
    pub thermo: Option<ThermoReport>,
    pub fcs: Option<FcsReport>,
    pub decomposition: Option<DecompositionReport>,
    pub flag: String,
}

impl PointResult {
    fn in_domain(&self) -> bool {
        self.thermo.is_some_and(|t| t.is_engine())
    }

    pub fn cell(&self, name: &str) -> Cell {
        let num = Cell::Num;
        let thermo = |f: fn(&ThermoReport) -> f64| Cell::opt(self.thermo.as_ref().map(f));
        let fcs = |f: fn(&FcsReport) -> f64| Cell::opt(self.fcs.as_ref().map(f));
        let dec =
            |f: fn(&DecompositionReport) -> f64| Cell::opt(self.decomposition.as_ref().map(f));
        let spec = self.engine.map(|e| *e.spectrum());
        match name {
            "omega20_over_omega10" => num(self.omega20),
            "lambda_over_omega10" => num(self.lambda),
            "omega_over_omega10" => Cell::opt(self.omega),
            "beta_c_times_omega10" => num(self.beta_c),
            "beta_h_times_omega10" => num(self.beta_h),
            "eps10_over_omega10" => Cell::opt(spec.map(|s| s.eps10())),
            "eps20_over_omega10" => Cell::opt(spec.map(|s| s.eps20())),
            "omega_star_over_omega10" => Cell::opt(self.engine.map(|e| e.optimal_frequency())),
            "P_over_omega10sq" => thermo(|t| t.power),
            "Qc_over_omega10sq" => thermo(|t| t.qdot_c),
            "Qh_over_omega10sq" => thermo(|t| t.qdot_h),
            "P0_over_omega10sq" => thermo(|t| t.p0),
            "rho0" => thermo(|t| t.rho0),
            "eta" => Cell::opt(self.thermo.and_then(|t| t.eta)),
            "eta_ssd" => thermo(|t| t.eta_ssd),
            "eta_carnot" => thermo(|t| t.eta_carnot),
            "Qd_h_over_omega10sq" => dec(|d| d.qd_h),
            "Qd_c_over_omega10sq" => dec(|d| d.qd_c),
            "Qnd_h_over_omega10sq" => dec(|d| d.qnd_h),
            "Qnd_c_over_omega10sq" => dec(|d| d.qnd_c),
            "inv_eta_nd" => dec(|d| d.inv_eta_nd),
            "eta_nd" => dec(|d| d.eta_nd),
            "pattern" => self
                .decomposition
                .map_or(Cell::Missing, |d| Cell::Text(d.pattern.label().into())),
            "sigma_dot_over_omega10" => fcs(|f| f.sigma_dot),
            "var1_over_omega10cu" => fcs(|f| f.var1),
            "var2_over_omega10cu" => fcs(|f| f.var2),
            "var3_over_omega10cu" => fcs(|f| f.var3),
            "var4_over_omega10cu" => fcs(|f| f.var4),
            "varP_over_omega10cu" => fcs(|f| f.var_total),
            "U" if self.in_domain() => Cell::opt(self.fcs.and_then(|f| f.tur_product)),
            "U" => Cell::Missing,
            FLAG => Cell::Text(self.flag.clone()),
            _ => unreachable!("unknown column {name}"),
        }
    }

    /// First law, second law and the heat split, up to roundoff.
    pub fn check_invariants(&self) -> Result<(), String> {
        let Some(t) = self.thermo else { return Ok(()) };
        let (p, qc, qh) = (t.power, t.qdot_c, t.qdot_h);
        let scale = p.abs().max(qc.abs()).max(qh.abs());
        let resid = qc + qh - p;
        if !(resid.abs() <= ROW_TOLERANCE * scale) {
            return Err(format!("first law violated: Qc + Qh - P = {resid:e}"));
        }
        let sigma = -self.beta_c * qc - self.beta_h * qh;
        if !(sigma >= -ROW_TOLERANCE * (self.beta_c * qc.abs() + self.beta_h * qh.abs())) {
            return Err(format!("second law violated: entropy production {sigma:e}"));
        }
        if let Some(d) = self.decomposition {
            let scale = qh.abs().max(d.qd_h.abs());
            if d.qd_h + d.qd_c != 0.0
                || !((d.qd_h + d.qnd_h - qh).abs() <= ROW_TOLERANCE * scale)
                || !((d.qd_c + d.qnd_c - qc).abs() <= ROW_TOLERANCE * scale)
            {
                return Err("heat split does not add up to the total flux".into());
            }
        }
        Ok(())
    }
}

/// Build the engine for one point; `Ok(Err(reason))` marks invalid input.
fn build_engine(
    table: CouplingTable,
    [omega20, lambda, beta_c, beta_h]: [f64; 4],
    frequency: FrequencyPolicy,
) -> Result<std::result::Result<Engine, String>, CliError> {
    let omega = match frequency {
        FrequencyPolicy::Fixed(w) => w,
        FrequencyPolicy::Optimal => 1.0,
    };
    let params = EngineParams {
        omega0: 0.0,
        omega1: 1.0,
        omega2: omega20,
        lambda,
        omega,
        beta_c,
        beta_h,
        couplings: table,
    };
    let engine = match Engine::new(params) {
        Ok(e) => e,
        Err(e @ (Error::InvalidParams(_) | Error::Degenerate | Error::ZeroChannel(_))) => {
            return Ok(Err(e.to_string()));
        }
        Err(e) => return Err(CliError::Numerical(e)),
    };
    Ok(Ok(match frequency {
        FrequencyPolicy::Fixed(_) => engine,
        FrequencyPolicy::Optimal => engine.with_frequency(engine.optimal_frequency())?,
    }))
}

pub fn evaluate_point(
    table: CouplingTable,
    values: [f64; 4],
    frequency: FrequencyPolicy,
) -> Result<PointResult, CliError> {
    let [omega20, lambda, beta_c, beta_h] = values;
    let mut out = PointResult {
        omega20,
        lambda,
        beta_c,
        beta_h,
        omega: None,
        engine: None,
        thermo: None,
        fcs: None,
        decomposition: None,
        flag: String::new(),
    };
    let engine = match build_engine(table, values, frequency)? {
        Ok(e) => e,
        Err(reason) => {
            out.flag = reason.replacen("invalid engine parameters", "invalid", 1);
            return Ok(out);
        }
    };
    // cross-checks the closed form against the linear solve
    engine.stationary_state()?;
    let thermo = engine.thermo_report();
    out.omega = Some(engine.params().omega);
    out.flag = thermo.verdict.status.to_string();
    out.decomposition = if thermo.is_engine() {
        decompose_heat(&engine).ok()
    } else {
        None
    };
    out.fcs = Some(fcs_report(&engine));
    out.thermo = Some(thermo);
    out.engine = Some(engine);
    Ok(out)
}

/// Cartesian product of the grid axes, outer axis first. Sweeping `ω`
/// turns the frequency policy into a fixed value per point.
fn grid_points(cfg: &RunConfig) -> Vec<([f64; 4], FrequencyPolicy)> {
    let base = [
        cfg.omega20.unwrap_or(f64::NAN),
        cfg.lambda.unwrap_or(f64::NAN),
        cfg.beta_c.unwrap_or(f64::NAN),
        cfg.beta_h.unwrap_or(f64::NAN),
    ];
    let mut points = vec![(base, cfg.frequency)];
    for axis in &cfg.grid {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|(p, f)| {
                values.iter().map(move |v| {
                    let mut p = p;
                    let mut f = f;
                    match axis.axis {
                        Axis::Omega20 => p[0] = *v,
                        Axis::Lambda => p[1] = *v,
                        Axis::BetaC => p[2] = *v,
                        Axis::BetaH => p[3] = *v,
                        Axis::Omega => f = FrequencyPolicy::Fixed(*v),
                    }
                    (p, f)
                })
            })
            .collect();
    }
    points
}

fn columns(mode: Mode) -> Vec<String> {
    let body = match mode {
        Mode::Stationary => STATIONARY,
        Mode::Sweep => SWEEP,
        Mode::Fcs => FCS,
        Mode::TurScan => TUR,
        Mode::Flows => FLOWS,
        Mode::Dynamics => unreachable!(),
    };
    INPUTS
        .iter()
        .chain(body)
        .chain([&FLAG])
        .map(|s| s.to_string())
        .collect()
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(std::io::Error::other(e)))
}

/// Evaluate every grid point of a resolved config and tabulate `mode`.
pub fn run_grid(cfg: &RunConfig, mode: Mode, workers: usize) -> Result<Table, CliError> {
    let table = cfg.scheme.build_table()?;
    let points = grid_points(cfg);
    let results: Vec<Result<PointResult, CliError>> = pool(workers)?.install(|| {
        points
            .par_iter()
            .map(|(values, freq)| evaluate_point(table, *values, *freq))
            .collect()
    });

    if mode == Mode::Stationary {
        if let Some(Ok(r)) = results.first() {
            if r.engine.is_none() {
                return Err(CliError::Config(r.flag.clone()));
            }
        }
    }

    let header = columns(mode);
    let mut out = Table::new(header.clone());
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        r.check_invariants()
            .map_err(|msg| CliError::Invariant(format!("row {}: {msg}", i + 1)))?;
        out.push(header.iter().map(|h| r.cell(h)).collect());
    }
    Ok(out)
}

pub fn run_stationary(cfg: &RunConfig) -> Result<Table, CliError> {
    run_grid(cfg, Mode::Stationary, 1)
}

pub fn run_sweep(cfg: &RunConfig, workers: usize) -> Result<Table, CliError> {
    run_grid(cfg, Mode::Sweep, workers)
}

pub fn run_dynamics(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = cfg
        .dynamics
        .ok_or_else(|| CliError::Config("missing field `dynamics`".into()))?;
    let values = [
        cfg.omega20.unwrap_or(f64::NAN),
        cfg.lambda.unwrap_or(f64::NAN),
        cfg.beta_c.unwrap_or(f64::NAN),
        cfg.beta_h.unwrap_or(f64::NAN),
    ];
    let engine = build_engine(cfg.scheme.build_table()?, values, cfg.frequency)?
        .map_err(CliError::Config)?;
    let initial = match d.initial {
        InitialSpec::Ground => InitialState::ground(),
        InitialSpec::Diagonal(p) => InitialState::Bare(Matrix3::from_diagonal(
            &nalgebra::Vector3::new(C64::from(p[0]), C64::from(p[1]), C64::from(p[2])),
        )),
    };
    let dt = d.dt.unwrap_or_else(|| step_limit(&engine));
    let traj =
        integrate_with_stride(&engine, &initial, d.t_end, dt, d.stride).map_err(|e| match e {
            Error::StepTooLarge { .. } | Error::InvalidInitialState(_) => {
                CliError::Config(format!("field `dynamics`: {e}"))
            }
            e => CliError::Numerical(e),
        })?;
    let obs = observables(&traj, &engine);
    let header: Vec<String> = [
        "t_times_omega10",
        "rho0",
        "rho1",
        "rho2",
        "delta1",
        "delta2",
        "trace",
        "aux1_abs",
        "aux2_abs",
        "Qc_over_omega10sq",
        "Qh_over_omega10sq",
        "Wdot_over_omega10sq",
        "energy_over_omega10",
        "first_law_residual_over_omega10sq",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut out = Table::new(header);
    for (i, s) in traj.states.iter().enumerate() {
        let trace = s.trace();
        let scale = obs.qdot_c[i].abs() + obs.qdot_h[i].abs() + obs.wdot[i].abs();
        if (trace - 1.0).abs() > 1e-9 {
            return Err(CliError::Invariant(format!("row {}: trace {trace}", i + 1)));
        }
        if obs.first_law_residual[i].abs() > 1e-10 * scale.max(1e-300) {
            return Err(CliError::Invariant(format!(
                "row {}: energy balance residual {:e}",
                i + 1,
                obs.first_law_residual[i]
            )));
        }
        let aux = traj.aux[i];
        out.push(
            [
                traj.times[i],
                s.rho0,
                s.rho1,
                s.rho2,
                s.delta1,
                s.delta2,
                trace,
                aux[0].norm(),
                aux[1].norm(),
                obs.qdot_c[i],
                obs.qdot_h[i],
                obs.wdot[i],
                obs.energy[i],
                obs.first_law_residual[i],
            ]
            .into_iter()
            .map(Cell::Num)
            .collect(),
        );
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig, mode: Mode, workers: usize) -> Result<Table, CliError> {
    match mode {
        Mode::Dynamics => run_dynamics(cfg),
        Mode::Stationary => run_stationary(cfg),
        _ => run_grid(cfg, mode, workers),
    }
}

/// Sidecar metadata echoing the resolved config.
pub fn metadata(cfg: &RunConfig, mode: Mode, workers: usize, table: &Table) -> serde_json::Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "mode": mode,
        "workers": workers,
        "rows": table.rows.len(),
        "columns": table.header,
        "config": cfg,
    })
}
