use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_density_matrix, harmonics_from_samples, Method, SolverError, SteadyStateSolution};
use crate::liouvillian::LiouvillianBlocks;
use crate::linalg::{unvectorize, vectorize, Superop, VecOp};
use crate::model::Op4;

/// Largest tolerated `|Tr ρ − 1|` along a trajectory.
const TRACE_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Integration time in units of `1/γ`.
    pub final_time_gammas: f64,
    /// Lower bound on steps per drive period.
    pub min_steps_per_period: usize,
    /// Upper bound on `γ·dt`.
    pub max_gamma_step: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            final_time_gammas: 10.0,
            min_steps_per_period: 512,
            max_gamma_step: 0.02,
        }
    }
}

fn rk4_step(l0: &Superop, lh: &Superop, l1: &Superop, v: &VecOp, dt: f64) -> VecOp {
    let h = Complex64::new(dt, 0.0);
    let half = Complex64::new(0.5 * dt, 0.0);
    let k1 = l0 * v;
    let k2 = lh * (v + k1 * half);
    let k3 = lh * (v + k2 * half);
    let k4 = l1 * (v + k3 * h);
    v + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0)
}

fn trace_drift(v: &VecOp) -> f64 {
    (v[0] + v[5] + v[10] + v[15] - Complex64::new(1.0, 0.0)).norm()
}

/// Integrates `dρ/dt = L(t)ρ` with classical RK4 from `t = 0` to a whole
/// number of periods past `t_f`, then records the final period.
///
/// `initial` is a density matrix in the Floquet frame at `t = 0`. The step is
/// `T/S` with `S` large enough to resolve the period, the largest generator
/// harmonic and the dissipative scale `gamma_scale`.
pub fn solve_time_propagation(
    blocks: &LiouvillianBlocks,
    initial: &Op4,
    gamma_scale: f64,
    opts: PropagationOptions,
) -> Result<SteadyStateSolution, SolverError> {
    check_density_matrix(initial)?;
    if !(gamma_scale > 0.0 && gamma_scale.is_finite()) {
        return Err(SolverError::InvalidInput(format!("gamma scale must be positive, got {gamma_scale}")));
    }
    let t_final = opts.final_time_gammas / gamma_scale;
    let k_max_used = blocks.q_max() / 2;
    let mut v = vectorize(initial);
    let mut max_drift = 0.0_f64;

    if blocks.frequency() == 0.0 {
        let l = blocks.block(0);
        let radius = (0..16).map(|r| l.row(r).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
        let dt_cap = if radius > 0.0 { 0.2 / radius } else { f64::INFINITY };
        let steps = (t_final / (opts.max_gamma_step / gamma_scale).min(dt_cap)).ceil().max(1.0) as usize;
        let dt = t_final / steps as f64;
        for _ in 0..steps {
            v = rk4_step(&l, &l, &l, &v, dt);
            max_drift = max_drift.max(trace_drift(&v));
            if max_drift > TRACE_DRIFT_LIMIT {
                return Err(SolverError::TraceDrift { drift: max_drift });
            }
        }
        let rho = unvectorize(&v);
        let mut sol = SteadyStateSolution::new(Method::TimePropagation, blocks, k_max_used, vec![rho], vec![rho]);
        sol.final_period_drift = unvectorize(&(l * v));
        return Ok(sol);
    }

    let period = 2.0 * PI / blocks.frequency();
    let mut s = opts
        .min_steps_per_period
        .max(8 * (blocks.max_harmonic() + 1))
        .max((period * gamma_scale / opts.max_gamma_step).ceil() as usize);
    s += s % 2;
    let dt = period / s as f64;
    // generator at every half step of one period, reused for all periods
    let table: Vec<Superop> = (0..2 * s).map(|j| blocks.evaluate_at_time(0.5 * dt * j as f64)).collect();
    let periods = ((t_final / period).ceil() as usize).max(1);

    let mut samples = Vec::with_capacity(s);
    let mut start_of_last = Op4::zeros();
    for p in 0..periods {
        let last = p + 1 == periods;
        if last {
            start_of_last = unvectorize(&v);
        }
        for i in 0..s {
            if last {
                samples.push(unvectorize(&v));
            }
            let (a, b, c) = (2 * i, 2 * i + 1, (2 * i + 2) % (2 * s));
            v = rk4_step(&table[a], &table[b], &table[c], &v, dt);
            max_drift = max_drift.max(trace_drift(&v));
            if max_drift > TRACE_DRIFT_LIMIT {
                return Err(SolverError::TraceDrift { drift: max_drift });
            }
        }
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let end = unvectorize(&v);
    let k_rho = (s / 2 - 1).min(blocks.q_max() + 8);
    let harmonics = harmonics_from_samples(&samples, k_rho);
    let mut sol = SteadyStateSolution::new(Method::TimePropagation, blocks, k_max_used, harmonics, samples);
    sol.final_period_drift = (end - start_of_last) / Complex64::new(period, 0.0);
    Ok(sol)
}
