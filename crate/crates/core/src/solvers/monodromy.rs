use num_complex::Complex64;

use super::{
    harmonics_from_samples, normalize_trace, to_faer, DegeneracyPolicy, Method, SolverError, SteadyStateSolution,
};
use crate::liouvillian::LiouvillianBlocks;
use crate::linalg::{max_abs, unvectorize, vectorize, Superop, VecOp};
use crate::model::Op4;

/// Default number of steps per period for the one-period propagator.
pub const DEFAULT_MONODROMY_STEPS: usize = 1000;

/// Distance from 1 within which a propagator eigenvalue counts as stationary.
const UNIT_EIGENVALUE_TOL: f64 = 1e-6;

/// Fourth-order Magnus step maps
/// `exp((L_1 + L_2) dt/2 + (√3/12) dt² [L_2, L_1])` over one period, with
/// `L_1`, `L_2` at the two Gauss points of each step. A time-independent
/// generator gets a single map `exp(L_0 τ)` with `τ` set by its scale.
fn step_maps(blocks: &LiouvillianBlocks, m: usize) -> Vec<Superop> {
    if blocks.frequency() == 0.0 {
        let l0 = blocks.block(0);
        let scale = max_abs(&l0).max(f64::MIN_POSITIVE);
        return vec![(l0 * Complex64::new(1.0 / scale, 0.0)).exp()];
    }
    let period = 2.0 * std::f64::consts::PI / blocks.frequency();
    let dt = period / m as f64;
    let offset = 3f64.sqrt() / 6.0;
    let half = Complex64::new(0.5 * dt, 0.0);
    let comm = Complex64::new(3f64.sqrt() / 12.0 * dt * dt, 0.0);
    (0..m)
        .map(|i| {
            let t = i as f64 * dt;
            let l1 = blocks.evaluate_at_time(t + (0.5 - offset) * dt);
            let l2 = blocks.evaluate_at_time(t + (0.5 + offset) * dt);
            ((l1 + l2) * half + (l2 * l1 - l1 * l2) * comm).exp()
        })
        .collect()
}

/// Ordered product of the step maps over one period.
pub fn one_period_propagator(blocks: &LiouvillianBlocks, m: usize) -> Superop {
    step_maps(blocks, m.max(1)).iter().fold(Superop::identity(), |acc, s| s * acc)
}

fn samples_over_period(maps: &[Superop], rho0: &Op4) -> Vec<Op4> {
    let mut v = vectorize(rho0);
    let mut out = Vec::with_capacity(maps.len());
    for s in maps {
        out.push(unvectorize(&v));
        v = s * v;
    }
    out
}

fn solution_from_initial(
    blocks: &LiouvillianBlocks,
    method: Method,
    maps: &[Superop],
    rho0: Op4,
) -> SteadyStateSolution {
    let k_max_used = blocks.q_max() / 2;
    if blocks.frequency() == 0.0 {
        return SteadyStateSolution::new(method, blocks, k_max_used, vec![rho0], vec![rho0]);
    }
    let samples = samples_over_period(maps, &rho0);
    let k_rho = (samples.len() / 2 - 1).min(blocks.q_max() + 8);
    let harmonics = harmonics_from_samples(&samples, k_rho);
    SteadyStateSolution::new(method, blocks, k_max_used, harmonics, samples)
}

/// Long-time limit of `initial` under the periodic dynamics, sampled over
/// one period and labelled with `method`.
pub(crate) fn attractor(
    blocks: &LiouvillianBlocks,
    initial: &Op4,
    m: usize,
    method: Method,
) -> Result<SteadyStateSolution, SolverError> {
    let maps = step_maps(blocks, m.max(1));
    let mut q = maps.iter().fold(Superop::identity(), |acc, s| s * acc);
    // repeated squaring reaches 2^j periods; stops once Q is a projector
    for _ in 0..200 {
        let q2 = q * q;
        let done = max_abs(&(q2 - q)) < 1e-13;
        q = q2;
        if done {
            break;
        }
    }
    let rho0 = normalize_trace(&(q * vectorize(initial)))?;
    let rho0 = (rho0 + rho0.adjoint()) * Complex64::new(0.5, 0.0);
    let mut sol = solution_from_initial(blocks, method, &maps, rho0);
    sol.degenerate = true;
    Ok(sol)
}

/// Steady state as the unit-eigenvalue eigenvector of the one-period propagator.
pub fn solve_monodromy(
    blocks: &LiouvillianBlocks,
    m: usize,
    policy: DegeneracyPolicy,
) -> Result<SteadyStateSolution, SolverError> {
    if blocks.frequency() != 0.0 && m < 200 {
        return Err(SolverError::InvalidInput(format!("monodromy needs at least 200 steps per period, got {m}")));
    }
    let static_gen = blocks.frequency() == 0.0;
    let maps = step_maps(blocks, m);
    let (target, period) = if static_gen {
        (blocks.block(0), 1.0)
    } else {
        (
            maps.iter().fold(Superop::identity(), |acc, s| s * acc),
            2.0 * std::f64::consts::PI / blocks.frequency(),
        )
    };

    let eig = to_faer(&target).complex_eigendecomposition();
    let s = eig.s().column_vector();
    let u = eig.u();
    let values: Vec<Complex64> = (0..16).map(|i| Complex64::new(s.read(i).re, s.read(i).im)).collect();

    let (stationary, exponents): (Vec<usize>, Vec<Complex64>) = if static_gen {
        let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let idx = (0..16).filter(|&i| values[i].norm() < 1e-9 * scale).collect();
        (idx, values.clone())
    } else {
        let idx = (0..16).filter(|&i| (values[i] - 1.0).norm() < UNIT_EIGENVALUE_TOL).collect();
        (idx, values.iter().map(|l| l.ln() / period).collect())
    };

    let mut sol = match stationary.len() {
        0 => {
            let distance = if static_gen {
                values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
            } else {
                values.iter().map(|z| (z - 1.0).norm()).fold(f64::INFINITY, f64::min)
            };
            return Err(SolverError::NoPeriodicSteadyState { distance });
        }
        1 => {
            let i = stationary[0];
            let v = VecOp::from_fn(|r, _| {
                let z = u.read(r, i);
                Complex64::new(z.re, z.im)
            });
            let rho0 = normalize_trace(&v)?;
            let rho0 = (rho0 + rho0.adjoint()) * Complex64::new(0.5, 0.0);
            solution_from_initial(blocks, Method::Monodromy, &maps, rho0)
        }
        n => match policy {
            DegeneracyPolicy::Error => {
                return Err(SolverError::Degenerate(format!("{n} propagator eigenvalues at 1")));
            }
            DegeneracyPolicy::Attractor(init) => attractor(blocks, &init, m, Method::Monodromy)?,
        },
    };
    sol.floquet_exponents = exponents;
    Ok(sol)
}
