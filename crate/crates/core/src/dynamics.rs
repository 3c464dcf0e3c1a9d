//! Transient dynamics in the rotating eigenframe.
//!
//! The five variables `(ρ₀, ρ₁, ρ₂, Δ₁, Δ₂)` obey `∂ₜv = M v` with the
//! constant generator of [`Engine::generator`]. The coherences between the
//! ground state and the driven pair form a separate 2×2 complex block that
//! never feeds back; they only decay.

use nalgebra::{Matrix2, Matrix3, Matrix5, SymmetricEigen, Vector2, Vector5};

use crate::error::{Error, Result};
use crate::model::C64;
use crate::stationary::{Engine, StationaryState};

/// Steps must satisfy `dt · max|eig M| ≤` this.
pub const STABILITY_FACTOR: f64 = 0.1;

/// Trace and positivity tolerance for initial states.
pub const STATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Rotating-frame variables plus `⟨0|ρ|ε₁⟩` and `e^{−iωt}⟨0|ρ|ε₂⟩`.
    Frame {
        state: StationaryState,
        aux: [C64; 2],
    },
    /// Density matrix in the bare basis at `t = 0`.
    Bare(Matrix3<C64>),
}

impl InitialState {
    pub fn ground() -> Self {
        InitialState::Frame {
            state: StationaryState::ground(),
            aux: [C64::new(0.0, 0.0); 2],
        }
    }

    /// Split into frame variables after checking that the state is a
    /// density operator.
    pub fn resolve(&self, engine: &Engine) -> Result<(StationaryState, [C64; 2])> {
        let theta = engine.spectrum().theta;
        let omega = engine.params().omega;
        let (state, aux) = match self {
            InitialState::Frame { state, aux } => (*state, *aux),
            InitialState::Bare(rho) => {
                let e = crate::model::eigenvectors_for_angle(theta, omega, 0.0);
                let el = |m: usize, n: usize| (e[m].adjoint() * rho * e[n])[(0, 0)];
                let z = el(1, 2);
                let state = StationaryState {
                    rho0: el(0, 0).re,
                    rho1: el(1, 1).re,
                    rho2: el(2, 2).re,
                    delta1: z.re,
                    delta2: z.im,
                };
                (state, [el(0, 1), el(0, 2)])
            }
        };
        let rho = state.bare_density(theta, omega, 0.0, aux);
        check_density(&rho)?;
        if let InitialState::Bare(given) = self {
            let dev = (given - rho).camax();
            if dev > STATE_TOLERANCE {
                return Err(Error::InvalidInitialState(format!(
                    "matrix is not Hermitian (deviation {dev:.3e})"
                )));
            }
        }
        Ok((state, aux))
    }
}

fn check_density(rho: &Matrix3<C64>) -> Result<()> {
    let tr = rho.trace();
    if !((tr.re - 1.0).abs() <= STATE_TOLERANCE && tr.im.abs() <= STATE_TOLERANCE) {
        return Err(Error::InvalidInitialState(format!("trace is {tr}")));
    }
    let min = min_eigenvalue(rho);
    if min < -STATE_TOLERANCE {
        return Err(Error::InvalidInitialState(format!(
            "negative eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(rho: &Matrix3<C64>) -> f64 {
    let herm = (rho + rho.adjoint()) * C64::from(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Generator of `(⟨0|ρ|ε₁⟩, e^{−iωt}⟨0|ρ|ε₂⟩)`.
pub fn aux_generator(engine: &Engine) -> Matrix2<C64> {
    let r = engine.rates();
    let s = engine.spectrum();
    let omega = engine.params().omega;
    let s2 = (0.5 * s.theta).sin().powi(2);
    let gamma0 = r.g1m + r.g2m;
    let mix = C64::new(0.0, 0.5 * omega * s.theta.sin());
    Matrix2::new(
        C64::new(-0.5 * (gamma0 + r.g1), s.eps10() - omega * s2),
        mix,
        mix,
        C64::new(-0.5 * (gamma0 + r.g2), s.eps20() + omega * s2 - omega),
    )
}

/// Largest step accepted by [`integrate`].
pub fn step_limit(engine: &Engine) -> f64 {
    let max = engine
        .generator()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    STABILITY_FACTOR / max
}

/// Slowest decay time of the transient: inverse of the smallest nonzero
/// decay rate over both blocks.
pub fn relaxation_time(engine: &Engine) -> f64 {
    let main = engine.generator().complex_eigenvalues();
    let aux = aux_generator(engine)
        .eigenvalues()
        .map(|v| v.iter().map(|z| -z.re).collect::<Vec<_>>());
    let scale = main.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut rates: Vec<f64> = main.iter().map(|z| -z.re).collect();
    rates.extend(aux.unwrap_or_default());
    let slowest = rates
        .into_iter()
        .filter(|r| *r > 1e-12 * scale)
        .fold(f64::INFINITY, f64::min);
    1.0 / slowest
}

/// One classical RK4 step of a linear constant system, as a matrix.
fn rk4_propagator5(m: &Matrix5<f64>, h: f64) -> Matrix5<f64> {
    let a = m * h;
    let a2 = a * a;
    let a3 = a2 * a;
    Matrix5::identity() + a + a2 / 2.0 + a3 / 6.0 + a3 * a / 24.0
}

fn rk4_propagator2(m: &Matrix2<C64>, h: f64) -> Matrix2<C64> {
    let a = m * C64::from(h);
    let a2 = a * a;
    let a3 = a2 * a;
    Matrix2::identity()
        + a
        + a2 * C64::from(0.5)
        + a3 * C64::from(1.0 / 6.0)
        + a3 * a * C64::from(1.0 / 24.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StationaryState>,
    /// `⟨0|ρ|ε₁⟩` and `e^{−iωt}⟨0|ρ|ε₂⟩`.
    pub aux: Vec<[C64; 2]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&StationaryState> {
        self.states.last()
    }

    /// `|⟨0|ρ|ε₁⟩|, |⟨0|ρ|ε₂⟩|` per sample.
    pub fn aux_magnitudes(&self) -> Vec<[f64; 2]> {
        self.aux
            .iter()
            .map(|a| [a[0].norm(), a[1].norm()])
            .collect()
    }

    pub fn bare_density(&self, engine: &Engine, i: usize) -> Matrix3<C64> {
        self.states[i].bare_density(
            engine.spectrum().theta,
            engine.params().omega,
            self.times[i],
            self.aux[i],
        )
    }
}

/// Fixed-step RK4 from `t = 0` to `t_end`, sampling every step. The step is
/// shrunk so that it divides `t_end` exactly.
pub fn integrate(
    engine: &Engine,
    initial: &InitialState,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_with_stride(engine, initial, t_end, dt, 1)
}

/// As [`integrate`], keeping every `stride`-th step (the endpoints are
/// always kept).
pub fn integrate_with_stride(
    engine: &Engine,
    initial: &InitialState,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    let limit = step_limit(engine);
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let (state, aux) = initial.resolve(engine)?;
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let stride = stride.max(1);

    let prop = rk4_propagator5(&engine.generator(), h);
    let prop_aux = rk4_propagator2(&aux_generator(engine), h);
    let mut v = state.to_vector();
    let mut c = Vector2::new(aux[0], aux[1]);

    let cap = steps / stride + 2;
    let mut out = Trajectory {
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        aux: Vec::with_capacity(cap),
    };
    let mut push = |t: f64, v: &Vector5<f64>, c: &Vector2<C64>| {
        out.times.push(t);
        out.states.push(StationaryState::from_vector(v));
        out.aux.push([c[0], c[1]]);
    };
    push(0.0, &v, &c);
    for k in 1..=steps {
        v = prop * v;
        c = prop_aux * c;
        if k % stride == 0 || k == steps {
            push(k as f64 * h, &v, &c);
        }
    }
    Ok(out)
}

/// Exact solution at time `t` through the matrix exponential.
pub fn exact_state(
    engine: &Engine,
    initial: &InitialState,
    t: f64,
) -> Result<(StationaryState, [C64; 2])> {
    let (state, aux) = initial.resolve(engine)?;
    let v = (engine.generator() * t).exp() * state.to_vector();
    let c = (aux_generator(engine) * C64::from(t)).exp() * Vector2::new(aux[0], aux[1]);
    Ok((StationaryState::from_vector(&v), [c[0], c[1]]))
}

/// Instantaneous energy bookkeeping along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub qdot_c: Vec<f64>,
    pub qdot_h: Vec<f64>,
    /// Power delivered to the field, `−2λωΔ₂`.
    pub wdot: Vec<f64>,
    /// `Σ εₙ ρₙ`.
    pub energy: Vec<f64>,
    /// `Q̇_c + Q̇_h − Ẇ − dE/dt`, with `dE/dt` taken from the generator.
    pub first_law_residual: Vec<f64>,
}

pub fn observables(trajectory: &Trajectory, engine: &Engine) -> Observables {
    let r = engine.rates();
    let s = engine.spectrum();
    let p = engine.params();
    let m = engine.generator();
    let (c1, c2) = (&r.channel1, &r.channel2);
    let eps = [s.eps0, s.eps1, s.eps2];
    let n = trajectory.len();
    let mut obs = Observables {
        qdot_c: Vec::with_capacity(n),
        qdot_h: Vec::with_capacity(n),
        wdot: Vec::with_capacity(n),
        energy: Vec::with_capacity(n),
        first_law_residual: Vec::with_capacity(n),
    };
    for st in &trajectory.states {
        let qc = -c1.energy * (c1.down_cold * st.rho1 - c1.up_cold * st.rho0)
            - c2.energy * (c2.down_cold * st.rho2 - c2.up_cold * st.rho0);
        let qh = -c1.energy * (c1.down_hot * st.rho1 - c1.up_hot * st.rho0)
            - c2.energy * (c2.down_hot * st.rho2 - c2.up_hot * st.rho0);
        let w = -2.0 * p.lambda * p.omega * st.delta2;
        let dv = m * st.to_vector();
        let de: f64 = (0..3).map(|i| eps[i] * dv[i]).sum();
        obs.qdot_c.push(qc);
        obs.qdot_h.push(qh);
        obs.wdot.push(w);
        obs.energy
            .push(eps[0] * st.rho0 + eps[1] * st.rho1 + eps[2] * st.rho2);
        obs.first_law_residual.push(qc + qh - w - de);
    }
    obs
}
