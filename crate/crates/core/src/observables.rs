//! Period-averaged particle currents and the analytic undriven current.
//!
//! Currents are positive when atoms leave the junction: `I_ℓ` into lead `ℓ`,
//! `I_loss` out of the trap, and `I_mol` as pairs converted into molecules.
//! Particle number obeys `I_S + I_L + I_R + 2 I_mol + I_loss = 0`, where
//! `I_S` is the rate of change of the junction occupation.
//!
//! Period averages of products of periodic functions are evaluated exactly
//! in harmonic space: with `O(t) = Σ_p e^{ipωt} O^p` in the Floquet frame and
//! `X(t) = Σ_m e^{−imωt} X_m`, the average of `Tr[O(t) X(t)]` is `Σ_m Tr[O^m X_m]`.

use num_complex::Complex64;

use crate::bath::{fermi_occupation, ReservoirParams};
use crate::floquet::{fourier_components, FloquetDecomposition, FloquetError, OperatorHarmonics};
use crate::liouvillian::LiouvillianBlocks;
use crate::linalg::{unvectorize, vectorize, VecOp};
use crate::model::{FermionOps, JunctionParams, Op4};
use crate::solvers::SteadyStateSolution;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObservableError {
    #[error("peak detection needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("peak detection needs a strictly increasing bias grid")]
    UnsortedGrid,
    #[error("the analytic current needs equal tunnelling rates (got {0} and {1})")]
    UnequalRates(f64, f64),
    #[error("drive detuning {detuning} is not a harmonic of the drive frequency {frequency}")]
    IncommensurateDrive { detuning: f64, frequency: f64 },
    #[error(transparent)]
    Floquet(#[from] FloquetError),
}

/// Period-averaged currents of one steady state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurrentReport {
    pub i_left: f64,
    pub i_right: f64,
    /// Total molecular conversion current.
    pub i_mol: f64,
    /// Molecular current through each drive field, in drive order (up to two).
    pub i_mol_per_drive: [f64; 2],
    /// Rate of change of the junction occupation over the final period.
    pub i_s_avg: f64,
    pub i_loss: f64,
    /// `|I_S + I_L + I_R + 2 I_mol + I_loss|`.
    pub conservation_residual: f64,
}

impl CurrentReport {
    pub fn new(i_left: f64, i_right: f64, i_mol_per_drive: [f64; 2], i_loss: f64, i_s_avg: f64) -> Self {
        let i_mol = i_mol_per_drive[0] + i_mol_per_drive[1];
        Self {
            i_left,
            i_right,
            i_mol,
            i_mol_per_drive,
            i_s_avg,
            i_loss,
            conservation_residual: (i_s_avg + i_left + i_right + 2.0 * i_mol + i_loss).abs(),
        }
    }
}

/// Harmonics of the occupation and pair-creation operators in the Floquet frame.
#[derive(Debug, Clone)]
pub struct FrameOperators {
    pub number: OperatorHarmonics,
    pub pair_raise: OperatorHarmonics,
    /// `N` in the Floquet frame at `t = 0`.
    pub number_at_zero: Op4,
    frequency: f64,
}

impl FrameOperators {
    /// Harmonics up to `k_cap`, clipped to what the decomposition grid resolves.
    pub fn new(decomp: &FloquetDecomposition, ops: &FermionOps, k_cap: usize) -> Result<Self, ObservableError> {
        let k = if decomp.is_static() {
            0
        } else {
            k_cap.min((decomp.grid_size() - 1) / 4)
        };
        let n = ops.total_number();
        Ok(Self {
            number: fourier_components(decomp, &n, k)?,
            pair_raise: fourier_components(decomp, &ops.pair_raise(), k)?,
            number_at_zero: decomp.in_frame(&n, 0),
            frequency: decomp.frequency(),
        })
    }
}

fn trace_product(a: &Op4, b: &Op4) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Average of `Tr[O(t) · (L(t)ρ(t))]` over one period.
fn averaged_action(op: &OperatorHarmonics, blocks: &LiouvillianBlocks, sol: &SteadyStateSolution) -> f64 {
    let rho: Vec<(i64, VecOp)> = sol.harmonics().map(|(k, m)| (k, vectorize(m))).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (q, lq) in blocks.iter() {
        if lq.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            continue;
        }
        for (k, v) in &rho {
            let m = q + k;
            if m.unsigned_abs() as usize > op.k_max() {
                continue;
            }
            total += trace_product(&op.get(m), &unvectorize(&(lq * v)));
        }
    }
    total.re
}

/// `⟨I_ℓ⟩ = −avg Tr[N · L_ℓ[ρ]]` for the generator part of one lead.
pub fn reservoir_current(sol: &SteadyStateSolution, lead_blocks: &LiouvillianBlocks, frame: &FrameOperators) -> f64 {
    -averaged_action(&frame.number, lead_blocks, sol)
}

/// Atoms removed per unit time by the loss dissipator.
pub fn loss_current(sol: &SteadyStateSolution, loss_blocks: &LiouvillianBlocks, frame: &FrameOperators) -> f64 {
    -averaged_action(&frame.number, loss_blocks, sol)
}

/// `⟨I_mol⟩ = Σ_ℓ avg i(g_ℓ* e^{−iδ_ℓ t}⟨c↑†c↓†⟩ − c.c.)`, per drive.
pub fn molecular_current(
    sol: &SteadyStateSolution,
    params: &JunctionParams,
    frame: &FrameOperators,
) -> Result<[f64; 2], ObservableError> {
    let mut out = [0.0; 2];
    for (slot, drive) in params.drives.iter().enumerate().take(2) {
        if drive.amplitude == Complex64::new(0.0, 0.0) {
            continue;
        }
        // the average keeps the harmonic p − k = δ/ω of ⟨c↑†c↓†⟩(t)
        let shift = if frame.frequency == 0.0 {
            if drive.detuning != 0.0 {
                return Err(ObservableError::IncommensurateDrive {
                    detuning: drive.detuning,
                    frequency: 0.0,
                });
            }
            0
        } else {
            let s = drive.detuning / frame.frequency;
            if (s - s.round()).abs() > 1e-9 {
                return Err(ObservableError::IncommensurateDrive {
                    detuning: drive.detuning,
                    frequency: frame.frequency,
                });
            }
            s.round() as i64
        };
        let mut pair = Complex64::new(0.0, 0.0);
        for (k, rho_k) in sol.harmonics() {
            let p = k + shift;
            if p.unsigned_abs() as usize <= frame.pair_raise.k_max() {
                pair += trace_product(&frame.pair_raise.get(p), rho_k);
            }
        }
        let z = drive.amplitude.conj() * pair;
        out[slot] = -2.0 * z.im;
    }
    Ok(out)
}

/// Rate of change of the junction occupation left in the solution.
pub fn junction_drift(sol: &SteadyStateSolution, frame: &FrameOperators) -> f64 {
    trace_product(&frame.number_at_zero, &sol.final_period_drift).re
}

/// All currents of a steady state.
pub fn current_report(
    sol: &SteadyStateSolution,
    params: &JunctionParams,
    left: &LiouvillianBlocks,
    right: &LiouvillianBlocks,
    loss: Option<&LiouvillianBlocks>,
    frame: &FrameOperators,
) -> Result<CurrentReport, ObservableError> {
    let i_left = reservoir_current(sol, left, frame);
    let i_right = reservoir_current(sol, right, frame);
    let i_loss = loss.map_or(0.0, |l| loss_current(sol, l, frame));
    let mol = molecular_current(sol, params, frame)?;
    Ok(CurrentReport::new(i_left, i_right, mol, i_loss, junction_drift(sol, frame)))
}

/// Steady-state current into the right lead of the undriven junction, from the
/// sequential-tunnelling rate equations.
///
/// At the particle-hole symmetric point with symmetric biases and equal
/// temperatures this is the smooth step
/// `2γ sinh(Δμ/2T)/(cosh(U/2T) + cosh(Δμ/2T))`, whose `T = 0` limit is
/// `2γ sgn(Δμ)` above `|U|`, `γ sgn(Δμ)` at `|Δμ| = |U|` and zero below.
/// Otherwise the general expression is used, with Fermi functions equal to ½
/// exactly at a zero-temperature edge. When both the empty and the doubly
/// occupied state are absorbing the expression is `0/0`; the current is then
/// zero, as in every steady state of that case.
pub fn analytic_current_g0(params: &JunctionParams, leads: &[ReservoirParams; 2]) -> Result<f64, ObservableError> {
    let [l, r] = leads;
    if l.gamma != r.gamma {
        return Err(ObservableError::UnequalRates(l.gamma, r.gamma));
    }
    let gamma = l.gamma;
    let (w, u) = (params.omega, params.interaction);
    let symmetric = u + 2.0 * w == 0.0 && l.temperature == r.temperature && l.mu == -r.mu;
    if symmetric {
        let dmu = l.mu - r.mu;
        let t = l.temperature;
        if t == 0.0 {
            let (a, b) = (dmu.abs(), u.abs());
            let mag = if a > b {
                2.0
            } else if a == b {
                1.0
            } else {
                0.0
            };
            return Ok(gamma * mag * dmu.signum() * if dmu == 0.0 { 0.0 } else { 1.0 });
        }
        let x = dmu / (2.0 * t);
        let y = (u / (2.0 * t)).abs();
        let ax = x.abs();
        // divide numerator and denominator by e^{|x|}/2
        let num = x.signum() * (1.0 - (-2.0 * ax).exp());
        let den = (y - ax).exp() + (-y - ax).exp() + 1.0 + (-2.0 * ax).exp();
        return Ok(2.0 * gamma * num / den);
    }
    let nl = |e: f64| fermi_occupation(e, l.temperature);
    let nr = |e: f64| fermi_occupation(e, r.temperature);
    let num = nr(w - r.mu) * (nl(u + w - l.mu) - 1.0) - nl(w - l.mu) * (nr(u + w - r.mu) - 1.0);
    let den = nl(w - l.mu) - nl(u + w - l.mu) + nr(w - r.mu) - nr(u + w - r.mu) + 2.0;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * gamma * num / den)
}

/// Positions of local maxima of `(x, y)` samples.
///
/// A point is a peak when it is strictly above both neighbours and its
/// prominence (height above the higher of the two minima separating it from
/// higher ground on either side) is at least 5% of the range of `y`.
pub fn detect_peaks(curve: &[(f64, f64)]) -> Result<Vec<f64>, ObservableError> {
    if curve.len() < 3 {
        return Err(ObservableError::TooFewPoints(curve.len()));
    }
    if curve.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(ObservableError::UnsortedGrid);
    }
    let ys: Vec<f64> = curve.iter().map(|p| p.1).collect();
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = 0.05 * (hi - lo);
    let mut peaks = Vec::new();
    for i in 1..ys.len() - 1 {
        if !(ys[i] > ys[i - 1] && ys[i] > ys[i + 1]) {
            continue;
        }
        if prominence(&ys, i) >= threshold && threshold > 0.0 {
            peaks.push(curve[i].0);
        }
    }
    Ok(peaks)
}

/// Height of `ys[i]` above its higher key col.
pub fn prominence(ys: &[f64], i: usize) -> f64 {
    let h = ys[i];
    let mut left_min = h;
    for &y in ys[..i].iter().rev() {
        if y > h {
            break;
        }
        left_min = left_min.min(y);
    }
    let mut right_min = h;
    for &y in &ys[i + 1..] {
        if y > h {
            break;
        }
        right_min = right_min.min(y);
    }
    h - left_min.max(right_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::Side;
    use approx::assert_abs_diff_eq;

    fn leads(gamma: f64, dmu: f64, t: f64) -> [ReservoirParams; 2] {
        ReservoirParams::symmetric_pair(gamma, dmu, t)
    }

    #[test]
    fn analytic_examples() {
        let p = JunctionParams::particle_hole_symmetric(-2.0);
        assert_eq!(analytic_current_g0(&p, &leads(1.0, 0.0, 0.5)).unwrap(), 0.0);
        assert_eq!(analytic_current_g0(&p, &leads(1.0, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(analytic_current_g0(&p, &leads(0.1, 1.9, 0.0)).unwrap(), 0.0);
        assert_eq!(analytic_current_g0(&p, &leads(0.1, 2.0, 0.0)).unwrap(), 0.1);
        assert_eq!(analytic_current_g0(&p, &leads(0.1, 2.1, 0.0)).unwrap(), 0.2);
        assert_eq!(analytic_current_g0(&p, &leads(0.1, -2.1, 0.0)).unwrap(), -0.2);
        assert_abs_diff_eq!(analytic_current_g0(&p, &leads(1.0, 2.0, 0.5)).unwrap(), 2.0f64.tanh(), epsilon = 1e-14);
    }

    #[test]
    fn smooth_step_matches_its_low_temperature_form() {
        let p = JunctionParams::particle_hole_symmetric(-2.0);
        let exact = analytic_current_g0(&p, &leads(1.0, 1.8, 0.1)).unwrap();
        let approx = 2.0 / (1.0f64.exp() + 1.0);
        assert!((exact - approx).abs() < 0.02 * approx);
    }

    #[test]
    fn symmetric_and_general_forms_agree() {
        let p = JunctionParams::particle_hole_symmetric(-2.0);
        for t in [0.05, 0.1, 0.5, 2.0] {
            for i in 1..60 {
                let dmu = 0.1 * i as f64;
                let sym = analytic_current_g0(&p, &leads(1.0, dmu, t)).unwrap();
                // shift μ off the symmetric form while keeping the physics
                let mut l = leads(1.0, dmu, t);
                l[1].temperature = t * (1.0 + 1e-15);
                let gen = analytic_current_g0(&p, &l).unwrap();
                assert!((sym - gen).abs() < 1e-10, "t={t} dmu={dmu}: {sym} vs {gen}");
            }
        }
        // zero-temperature general form with the ½ edge convention
        let p = JunctionParams::new(1.0, -2.0 + 1e-16);
        let l = leads(1.0, 2.0, 0.0);
        assert_abs_diff_eq!(analytic_current_g0(&p, &l).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn analytic_needs_equal_rates() {
        let p = JunctionParams::particle_hole_symmetric(-2.0);
        let l = [
            ReservoirParams::new(Side::Left, 0.1, 1.0, 0.0),
            ReservoirParams::new(Side::Right, 0.2, -1.0, 0.0),
        ];
        assert!(analytic_current_g0(&p, &l).is_err());
    }

    #[test]
    fn conservation_residual_uses_pair_weight() {
        let r = CurrentReport::new(-1.0, 3.0, [-0.5, -0.5], 0.0, 0.0);
        assert_eq!(r.i_mol, -1.0);
        assert_eq!(r.conservation_residual, 0.0);
    }

    #[test]
    fn peaks_on_synthetic_curve() {
        let centres = [2.0, 2.0 / 3.0, 0.4];
        let xs: Vec<f64> = (0..300).map(|i| 0.1 + 0.01 * i as f64).collect();
        let curve: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| {
                let y: f64 = centres.iter().map(|c| (-((x - c) / 0.03).powi(2)).exp()).sum();
                (x, y + 0.1 * x)
            })
            .collect();
        let peaks = detect_peaks(&curve).unwrap();
        assert_eq!(peaks.len(), 3);
        for c in centres {
            let nearest = xs.iter().copied().min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs())).unwrap();
            assert!(peaks.iter().any(|p| (p - nearest).abs() < 1e-12), "{c}");
        }
    }

    #[test]
    fn monotone_or_flat_curves_have_no_peaks() {
        let step: Vec<(f64, f64)> = (0..100).map(|i| (i as f64, if i < 50 { 0.0 } else { 2.0 })).collect();
        assert!(detect_peaks(&step).unwrap().is_empty());
        let plateau = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 0.0)];
        assert!(detect_peaks(&plateau).unwrap().is_empty());
        // tiny ripple below the prominence threshold
        let ripple: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, i as f64 + 0.01 * (i % 2) as f64)).collect();
        assert!(detect_peaks(&ripple).unwrap().is_empty());
    }

    #[test]
    fn peak_input_checks() {
        assert_eq!(detect_peaks(&[(0.0, 1.0), (1.0, 2.0)]), Err(ObservableError::TooFewPoints(2)));
        assert_eq!(detect_peaks(&[(0.0, 1.0), (0.0, 2.0), (1.0, 0.0)]), Err(ObservableError::UnsortedGrid));
    }
}
