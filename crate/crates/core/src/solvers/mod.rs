//! Periodic steady states of a [`LiouvillianBlocks`] generator.
//!
//! Three independent strategies are provided: a truncated linear system for
//! the Fourier components, brute-force time integration, and the eigenvector
//! of the one-period propagator. All work in the Floquet frame with
//! `ρ(t) = Σ_k e^{−ikωt} ρ_k`.

mod adapt;
mod fourier;
mod monodromy;
mod propagation;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::liouvillian::LiouvillianBlocks;
use crate::linalg::{hermiticity_defect, min_eigenvalue, unvectorize, vectorize, Superop, VecOp, ZERO};
use crate::model::Op4;

pub use adapt::{adapt_kmax, Adapted, KmaxPolicy, Level, DEFAULT_KMAX_SCHEDULE};
pub use fourier::solve_fourier;
pub use monodromy::{one_period_propagator, solve_monodromy, DEFAULT_MONODROMY_STEPS};
pub use propagation::{solve_time_propagation, PropagationOptions};

/// Positivity violations below this are tolerated in Redfield dynamics.
pub const POSITIVITY_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    FourierSpace,
    TimePropagation,
    Monodromy,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::FourierSpace, Method::TimePropagation, Method::Monodromy];

    pub fn name(self) -> &'static str {
        match self {
            Method::FourierSpace => "fourier-space",
            Method::TimePropagation => "time-propagation",
            Method::Monodromy => "monodromy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("steady state is not unique ({0})")]
    Degenerate(String),
    #[error("no periodic steady state: closest propagator eigenvalue is {distance:e} from 1")]
    NoPeriodicSteadyState { distance: f64 },
    #[error("trace drifted by {drift:e} during time propagation; use a smaller step")]
    TraceDrift { drift: f64 },
    #[error("k_max adaptation did not converge up to k_max = {k_max} (last change {last_delta:e})")]
    NoConvergence { k_max: usize, last_delta: f64 },
    #[error("initial state is not a density matrix: {0}")]
    InvalidInitialState(String),
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error("non-finite values in the solution")]
    NonFinite,
}

/// What to do when the generator has more than one steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegeneracyPolicy {
    /// Report [`SolverError::Degenerate`].
    Error,
    /// Return the long-time limit reached from the given Floquet-frame state.
    Attractor(Op4),
}

impl DegeneracyPolicy {
    /// Attractor of the maximally mixed state.
    pub fn attractor_of_mixed() -> Self {
        DegeneracyPolicy::Attractor(Op4::identity() * Complex64::new(0.25, 0.0))
    }
}

/// A periodic steady state in the Floquet frame.
#[derive(Debug, Clone)]
pub struct SteadyStateSolution {
    pub method: Method,
    /// Drive frequency; zero for a time-independent generator.
    pub frequency: f64,
    /// Harmonic cutoff of the Fourier components the generator was built from.
    pub k_max_used: usize,
    /// `ρ_k` for `|k| ≤ rho_k_max`.
    rho_fourier: Vec<Op4>,
    /// `ρ(t_m)` on a uniform grid over one period, `t_m = mT/M`.
    pub rho_time: Vec<Op4>,
    /// Frobenius norm of `ikωρ_k + Σ_q L_q ρ_{k−q}` over the stored harmonics.
    pub residual: f64,
    /// Most negative eigenvalue of `ρ(t)` on the time grid.
    pub positivity_floor: f64,
    /// `(ρ(t_f) − ρ(t_f − T))/T` for time-integrated solutions, else zero.
    pub final_period_drift: Op4,
    /// Whether the steady state is not unique and an attractor was selected.
    pub degenerate: bool,
    /// Eigenvalues `log(λ)/T` of the one-period propagator (monodromy only).
    pub floquet_exponents: Vec<Complex64>,
}

impl SteadyStateSolution {
    fn new(method: Method, blocks: &LiouvillianBlocks, k_max_used: usize, rho_fourier: Vec<Op4>, rho_time: Vec<Op4>) -> Self {
        let mut s = Self {
            method,
            frequency: blocks.frequency(),
            k_max_used,
            rho_fourier,
            rho_time,
            residual: 0.0,
            positivity_floor: 0.0,
            final_period_drift: Op4::zeros(),
            degenerate: false,
            floquet_exponents: Vec::new(),
        };
        s.residual = fourier_residual(blocks, &s);
        s.positivity_floor = s.rho_time.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min).min(0.0);
        s
    }

    pub fn is_static(&self) -> bool {
        self.frequency == 0.0
    }

    pub fn period(&self) -> f64 {
        if self.is_static() {
            f64::INFINITY
        } else {
            2.0 * PI / self.frequency
        }
    }

    /// Largest stored harmonic of `ρ`.
    pub fn rho_k_max(&self) -> usize {
        (self.rho_fourier.len() - 1) / 2
    }

    /// `ρ_k`, zero outside the stored range.
    pub fn rho_k(&self, k: i64) -> Op4 {
        let km = self.rho_k_max() as i64;
        if k.abs() > km {
            Op4::zeros()
        } else {
            self.rho_fourier[(k + km) as usize]
        }
    }

    pub fn harmonics(&self) -> impl Iterator<Item = (i64, &Op4)> {
        let km = self.rho_k_max() as i64;
        self.rho_fourier.iter().enumerate().map(move |(i, m)| (i as i64 - km, m))
    }

    /// `Σ_k e^{−ikωt} ρ_k`.
    pub fn rho_at(&self, t: f64) -> Op4 {
        if self.is_static() {
            return self.rho_k(0);
        }
        self.harmonics()
            .fold(Op4::zeros(), |acc, (k, m)| acc + m * Complex64::from_polar(1.0, -(k as f64) * self.frequency * t))
    }

    /// Largest `|Tr ρ_k − δ_{k0}|` over the stored harmonics.
    pub fn trace_defect(&self) -> f64 {
        self.harmonics()
            .map(|(k, m)| (m.trace() - if k == 0 { Complex64::new(1.0, 0.0) } else { ZERO }).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.rho_time.iter().map(hermiticity_defect).fold(0.0, f64::max)
    }

    /// Whether positivity violations stay within [`POSITIVITY_TOLERANCE`].
    pub fn is_physical(&self) -> bool {
        self.positivity_floor >= -POSITIVITY_TOLERANCE
    }
}

/// Frobenius norm of the truncated Fourier-space equations, with harmonics
/// outside the stored range taken as zero.
fn fourier_residual(blocks: &LiouvillianBlocks, sol: &SteadyStateSolution) -> f64 {
    let km = sol.rho_k_max() as i64;
    let vecs: Vec<VecOp> = sol.rho_fourier.iter().map(vectorize).collect();
    let qm = blocks.q_max() as i64;
    let mut total = 0.0;
    for k in -km..=km {
        let mut r = vecs[(k + km) as usize] * Complex64::new(0.0, k as f64 * blocks.frequency());
        for q in -qm..=qm {
            let j = k - q;
            if j.abs() <= km {
                r += blocks.block(q) * vecs[(j + km) as usize];
            }
        }
        total += r.norm_squared();
    }
    total.sqrt()
}

/// DFT of samples `ρ(t_m)`, `t_m = mT/M`, into `ρ_k` for `|k| ≤ k_max`.
fn harmonics_from_samples(samples: &[Op4], k_max: usize) -> Vec<Op4> {
    let m = samples.len();
    let inv = Complex64::new(1.0 / m as f64, 0.0);
    (-(k_max as i64)..=k_max as i64)
        .map(|k| {
            let mut acc = Op4::zeros();
            for (i, s) in samples.iter().enumerate() {
                let phase = 2.0 * PI * ((k * i as i64).rem_euclid(m as i64)) as f64 / m as f64;
                acc += s * Complex64::from_polar(1.0, phase);
            }
            acc * inv
        })
        .collect()
}

/// `ρ(t_m)` for `m = 0..M` from Fourier components.
fn samples_from_harmonics(harmonics: &[Op4], frequency: f64, m: usize) -> Vec<Op4> {
    let km = (harmonics.len() - 1) / 2;
    let period = 2.0 * PI / frequency;
    (0..m)
        .map(|i| {
            let t = period * i as f64 / m as f64;
            harmonics.iter().enumerate().fold(Op4::zeros(), |acc, (j, h)| {
                let k = j as f64 - km as f64;
                acc + h * Complex64::from_polar(1.0, -k * frequency * t)
            })
        })
        .collect()
}

fn check_density_matrix(rho: &Op4) -> Result<(), SolverError> {
    if (rho.trace() - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(SolverError::InvalidInitialState(format!("trace {}", rho.trace())));
    }
    if hermiticity_defect(rho) > 1e-10 {
        return Err(SolverError::InvalidInitialState("not Hermitian".into()));
    }
    if min_eigenvalue(rho) < -1e-10 {
        return Err(SolverError::InvalidInitialState("not positive semidefinite".into()));
    }
    Ok(())
}

fn normalize_trace(v: &VecOp) -> Result<Op4, SolverError> {
    let rho = unvectorize(v);
    let tr = rho.trace();
    if !(tr.norm() > 0.0) || !tr.re.is_finite() {
        return Err(SolverError::NonFinite);
    }
    Ok(rho / tr)
}

/// Converts a 16×16 nalgebra matrix to faer.
fn to_faer(m: &Superop) -> faer::Mat<faer::complex_native::c64> {
    faer::Mat::from_fn(16, 16, |i, j| faer::complex_native::c64::new(m[(i, j)].re, m[(i, j)].im))
}

#[cfg(test)]
mod tests;
