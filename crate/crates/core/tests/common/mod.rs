//! Independent reference implementations used across the integration tests.
//!
//! Nothing here goes through the rotating-frame algebra of the library: the
//! dissipator is assembled from jump operators in the bare basis and the
//! dynamics is integrated with the explicitly time-dependent Hamiltonian.

#![allow(dead_code)]

use maser_core::{CouplingScheme, Engine, EngineParams, C64};
use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type M3 = Matrix3<C64>;

pub const SCHEMES: [&str; 3] = ["resonant", "intermediate", "uniform"];

pub fn scheme(name: &str, gamma: f64) -> CouplingScheme {
    match name {
        "resonant" => CouplingScheme::Resonant { gamma },
        "intermediate" => CouplingScheme::Intermediate { gamma, ratio: 0.25 },
        "uniform" => CouplingScheme::Uniform { gamma },
        _ => unreachable!(),
    }
}

pub fn params(
    scheme: CouplingScheme,
    omega20: f64,
    lambda: f64,
    omega: f64,
    beta_c: f64,
    beta_h: f64,
) -> EngineParams {
    EngineParams {
        omega0: 0.0,
        omega1: 1.0,
        omega2: omega20,
        lambda,
        omega,
        beta_c,
        beta_h,
        couplings: scheme.build_table().unwrap(),
    }
}

/// Engine at `ω = ω*`.
pub fn at_optimum(p: EngineParams) -> Engine {
    let e = Engine::new(p).unwrap();
    e.with_frequency(e.optimal_frequency()).unwrap()
}

/// Fig. 3 parameter set.
pub fn fig3(name: &str) -> EngineParams {
    params(scheme(name, 2.0), 2.5, 0.5, 1.0, 5.0, 1.0)
}

/// Random valid parameters in ω₁₀ units.
pub fn random_params(rng: &mut ChaCha8Rng, name: &str) -> EngineParams {
    let omega20: f64 = rng.gen_range(1.2..4.0);
    let lmax = omega20.sqrt();
    let beta_h = rng.gen_range(0.1..1.5);
    params(
        scheme(name, rng.gen_range(0.3..3.0)),
        omega20,
        rng.gen_range(0.02..0.95) * lmax,
        rng.gen_range(0.05..6.0),
        beta_h * rng.gen_range(1.2..8.0),
        beta_h,
    )
}

/// Random parameters inside the engine domain.
pub fn random_engine(rng: &mut ChaCha8Rng, name: &str) -> Engine {
    loop {
        let e = Engine::new(random_params(rng, name)).unwrap();
        if e.engine_domain().is_engine() {
            return e;
        }
    }
}

fn ket_bra(a: &Vector3<C64>, b: &Vector3<C64>) -> M3 {
    a * b.adjoint()
}

/// Jump operators and rates of one bath at time `t`, from `L_c = |0⟩⟨1|`
/// or `L_h = |0⟩⟨2|` projected on the instantaneous eigenbasis.
pub fn jumps(p: &EngineParams, hot: bool, t: f64) -> Vec<(M3, f64)> {
    let h = p.hamiltonian(t);
    let (evals, evecs) = eigen_sorted(&h);
    let mut bare = M3::zeros();
    bare[(0, if hot { 2 } else { 1 })] = C64::from(1.0);
    let (gamma10, gamma20, beta) = if hot {
        (p.couplings.gamma_h_10, p.couplings.gamma_h_20, p.beta_h)
    } else {
        (p.couplings.gamma_c_10, p.couplings.gamma_c_20, p.beta_c)
    };
    let mut out = Vec::new();
    for (n, gamma) in [(1usize, gamma10), (2, gamma20)] {
        let amp = (evecs[0].adjoint() * bare * evecs[n])[(0, 0)];
        let l = ket_bra(&evecs[0], &evecs[n]) * amp;
        let eps = evals[n] - evals[0];
        out.push((l, gamma));
        out.push((l.adjoint(), (-beta * eps).exp() * gamma));
    }
    out
}

/// Eigenpairs of a Hermitian matrix, ascending. Phases are arbitrary.
pub fn eigen_sorted(h: &M3) -> ([f64; 3], [Vector3<C64>; 3]) {
    let eig = SymmetricEigen::new(*h);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.map(|i| eig.eigenvalues[i]);
    let vecs = idx.map(|i| {
        let v: Vector3<C64> = eig.eigenvectors.column(i).into();
        v
    });
    (vals, vecs)
}

pub fn dissipator(jumps: &[(M3, f64)], rho: &M3) -> M3 {
    let half = C64::from(0.5);
    jumps.iter().fold(M3::zeros(), |acc, (l, g)| {
        let ld = l.adjoint();
        let ldl = ld * l;
        acc + (l * rho * ld - (ldl * rho + rho * ldl) * half) * C64::from(*g)
    })
}

pub fn lab_rhs(p: &EngineParams, t: f64, rho: &M3) -> M3 {
    let h = p.hamiltonian(t);
    let i = C64::new(0.0, 1.0);
    let mut d = (h * rho - rho * h) * (-i);
    d += dissipator(&jumps(p, false, t), rho);
    d += dissipator(&jumps(p, true, t), rho);
    d
}

/// RK4 in the bare basis with the time-dependent Hamiltonian.
pub fn lab_integrate(p: &EngineParams, rho0: M3, t_end: f64, steps: usize) -> M3 {
    let h = t_end / steps as f64;
    let c = |x: f64| C64::from(x);
    let mut rho = rho0;
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = lab_rhs(p, t, &rho);
        let k2 = lab_rhs(p, t + 0.5 * h, &(rho + k1 * c(0.5 * h)));
        let k3 = lab_rhs(p, t + 0.5 * h, &(rho + k2 * c(0.5 * h)));
        let k4 = lab_rhs(p, t + h, &(rho + k3 * c(h)));
        rho += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
    }
    rho
}

/// `Tr(D_α[ρ] H)`.
pub fn bath_heat(p: &EngineParams, hot: bool, t: f64, rho: &M3) -> f64 {
    (dissipator(&jumps(p, hot, t), rho) * p.hamiltonian(t))
        .trace()
        .re
}

/// `Σₙ ⟨ρₙ|D_α[ρ]|ρₙ⟩⟨ρₙ|H|ρₙ⟩` with `|ρₙ⟩` from a dense eigensolver.
pub fn diagonal_heat(p: &EngineParams, hot: bool, t: f64, rho: &M3) -> f64 {
    let d = dissipator(&jumps(p, hot, t), rho);
    let h = p.hamiltonian(t);
    let (_, vecs) = eigen_sorted(rho);
    vecs.iter()
        .map(|v| {
            let dn = (v.adjoint() * d * v)[(0, 0)].re;
            let hn = (v.adjoint() * h * v)[(0, 0)].re;
            dn * hn
        })
        .sum()
}

/// Golden-section maximization on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Random density matrix: `A A† / Tr(A A†)` with Gaussian-ish entries.
pub fn random_density(rng: &mut ChaCha8Rng) -> M3 {
    let a = M3::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = a * a.adjoint();
    m / m.trace()
}
