//! Floquet decomposition of the periodically driven junction.
//!
//! The one-period propagator is an ordered product of fourth-order Magnus
//! steps on a uniform grid. Its
//! eigenphases give the quasienergies, folded into `[−ω/2, ω/2)`, and its
//! eigenvectors the Floquet modes at `t = 0`. Modes at later grid times follow
//! from `|φ_a(t)⟩ = e^{iE_a t} U(t) |φ_a(0)⟩`.

use std::f64::consts::PI;

use nalgebra::{SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::linalg::{expm_hermitian, max_abs, unitarity_defect, ZERO};
use crate::model::{hamiltonian_at, FermionOps, JunctionParams, ModelError, Op4, Spin, DIM};

/// Default number of propagator steps per period.
pub const DEFAULT_GRID: usize = 1000;

/// Eigenvector residual above which a decomposition is flagged.
const DEGENERACY_WARN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FloquetError {
    #[error("propagation needs a periodic drive with nonzero frequency")]
    NotPeriodic,
    #[error("grid size must be at least 1")]
    EmptyGrid,
    #[error("k_max = {k_max} is not resolved by a grid of {grid} points (need grid > 4 k_max)")]
    Resolution { k_max: usize, grid: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Diagnostics attached to a decomposition that is numerically suspect.
#[derive(Debug, Clone, PartialEq)]
pub enum FloquetWarning {
    /// `U(T)` is far from normal, or its eigenvectors are ill conditioned.
    NumericalDegeneracy { eigen_residual: f64 },
}

/// Quasienergies and Floquet modes on a uniform time grid.
///
/// A time-independent Hamiltonian is represented with `frequency == 0`, an
/// infinite period and a single grid point holding its eigenbasis.
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    frequency: f64,
    period: f64,
    quasienergies: [f64; DIM],
    modes: Vec<Op4>,
    one_period: Op4,
    warnings: Vec<FloquetWarning>,
}

impl FloquetDecomposition {
    /// Drive angular frequency `ω = 2π/T`; zero for a static Hamiltonian.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_static(&self) -> bool {
        self.frequency == 0.0
    }

    pub fn grid_size(&self) -> usize {
        self.modes.len()
    }

    pub fn quasienergies(&self) -> &[f64; DIM] {
        &self.quasienergies
    }

    /// Mode matrix at grid time `t_n = nT/N`; column `a` is `|φ_a(t_n)⟩`.
    pub fn modes(&self, n: usize) -> &Op4 {
        &self.modes[n]
    }

    pub fn initial_modes(&self) -> &Op4 {
        &self.modes[0]
    }

    /// `U(T)` (identity for static Hamiltonians).
    pub fn one_period_propagator(&self) -> &Op4 {
        &self.one_period
    }

    pub fn grid_time(&self, n: usize) -> f64 {
        if self.is_static() {
            0.0
        } else {
            self.period * n as f64 / self.modes.len() as f64
        }
    }

    pub fn warnings(&self) -> &[FloquetWarning] {
        &self.warnings
    }

    /// `⟨φ_a(t_n)| op |φ_b(t_n)⟩` for all `a, b`.
    pub fn in_frame(&self, op: &Op4, n: usize) -> Op4 {
        let m = &self.modes[n];
        m.adjoint() * op * m
    }

    /// Expresses a lab-frame density matrix in the Floquet basis at `t = 0`.
    pub fn to_floquet_frame(&self, rho: &Op4) -> Op4 {
        self.in_frame(rho, 0)
    }

    /// Max over `a` of `|e^{iE_a T} U(T)|φ_a(0)⟩ − |φ_a(0)⟩|`.
    pub fn periodicity_defect(&self) -> f64 {
        if self.is_static() {
            return 0.0;
        }
        let phases = Op4::from_diagonal(&Vector4::from_fn(|a, _| {
            Complex64::from_polar(1.0, self.quasienergies[a] * self.period)
        }));
        max_abs(&(self.one_period * self.modes[0] * phases - self.modes[0]))
    }

    /// Largest unitarity defect over all stored mode matrices.
    pub fn max_mode_unitarity_defect(&self) -> f64 {
        self.modes.iter().map(unitarity_defect).fold(0.0, f64::max)
    }

    /// `E_a − E_b + kω`.
    pub fn transition_energy(&self, a: usize, b: usize, k: i64) -> f64 {
        self.quasienergies[a] - self.quasienergies[b] + k as f64 * self.frequency
    }
}

/// `U(t_n)` for `n = 0..=N`, `dt = T/N`, with fourth-order Magnus steps
/// `U(t_{n+1}) = exp(−i H̄_n dt) U(t_n)`, where
/// `H̄_n = (H_1 + H_2)/2 − i(√3/12) dt [H_2, H_1]` at the two Gauss points of the step.
pub fn propagate_period(
    params: &JunctionParams,
    ops: &FermionOps,
    n: usize,
) -> Result<Vec<Op4>, FloquetError> {
    params.validate()?;
    if n == 0 {
        return Err(FloquetError::EmptyGrid);
    }
    let freq = params.drive_frequency()?;
    if freq == 0.0 {
        return Err(FloquetError::NotPeriodic);
    }
    let period = 2.0 * PI / freq;
    let dt = period / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut u = Op4::identity();
    out.push(u);
    let offset = 3f64.sqrt() / 6.0;
    let comm = Complex64::new(0.0, -3f64.sqrt() / 12.0 * dt);
    for step in 0..n {
        let t = step as f64 * dt;
        let h1 = hamiltonian_at(params, ops, t + (0.5 - offset) * dt);
        let h2 = hamiltonian_at(params, ops, t + (0.5 + offset) * dt);
        let h = (h1 + h2) * Complex64::new(0.5, 0.0) + (h2 * h1 - h1 * h2) * comm;
        u = expm_hermitian(&h, dt) * u;
        out.push(u);
    }
    Ok(out)
}

/// Folds an energy into `[−ω/2, ω/2)`.
pub fn fold_to_zone(e: f64, frequency: f64) -> f64 {
    let folded = e - frequency * ((e + 0.5 * frequency) / frequency).floor();
    // rounding can land exactly on the excluded upper edge
    if folded >= 0.5 * frequency {
        folded - frequency
    } else {
        folded
    }
}

/// Orthonormal eigenvectors of a unitary matrix. Eigenvectors of distinct
/// eigenvalues are already orthogonal; QR fixes up degenerate clusters.
fn unitary_eigenvectors(u: &Op4) -> Op4 {
    let m = faer::Mat::from_fn(DIM, DIM, |i, j| faer::complex_native::c64::new(u[(i, j)].re, u[(i, j)].im));
    let eig = m.complex_eigendecomposition();
    let v = eig.u();
    let raw = Op4::from_fn(|i, j| {
        let z = v.read(i, j);
        Complex64::new(z.re, z.im)
    });
    raw.qr().q()
}

/// Builds quasienergies and modes from the output of [`propagate_period`].
pub fn quasienergies_and_modes(
    propagators: &[Op4],
    period: f64,
) -> Result<FloquetDecomposition, FloquetError> {
    if propagators.len() < 2 {
        return Err(FloquetError::EmptyGrid);
    }
    let n = propagators.len() - 1;
    let frequency = 2.0 * PI / period;
    let u_t = propagators[n];

    let q = unitary_eigenvectors(&u_t);
    let t = q.adjoint() * u_t * q;
    let eigenvalues: Vec<Complex64> = (0..DIM).map(|i| t[(i, i)]).collect();
    let energies: Vec<f64> = eigenvalues
        .iter()
        .map(|l| fold_to_zone(-l.arg() / period, frequency))
        .collect();

    let (energies, initial) = canonical_basis(&energies, &q, 1e-9 * frequency);

    let mut warnings = Vec::new();
    let lambda = Op4::from_diagonal(&Vector4::from_fn(|a, _| {
        Complex64::from_polar(1.0, -energies[a] * period)
    }));
    let residual = max_abs(&(u_t * initial - initial * lambda));
    if residual > DEGENERACY_WARN {
        warnings.push(FloquetWarning::NumericalDegeneracy {
            eigen_residual: residual,
        });
    }

    let dt = period / n as f64;
    let modes = (0..n)
        .map(|step| {
            let t_n = step as f64 * dt;
            let phases = Op4::from_diagonal(&Vector4::from_fn(|a, _| {
                Complex64::from_polar(1.0, energies[a] * t_n)
            }));
            propagators[step] * initial * phases
        })
        .collect();

    Ok(FloquetDecomposition {
        frequency,
        period,
        quasienergies: energies,
        modes,
        one_period: u_t,
        warnings,
    })
}

/// Eigenbasis of a time-independent Hamiltonian, as a one-point decomposition.
pub fn static_decomposition(h: &Op4) -> FloquetDecomposition {
    let eig = SymmetricEigen::new(*h);
    let energies: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let scale = energies.iter().fold(1.0_f64, |m, e| m.max(e.abs()));
    let (energies, initial) = canonical_basis(&energies, &eig.eigenvectors, 1e-12 * scale);
    FloquetDecomposition {
        frequency: 0.0,
        period: f64::INFINITY,
        quasienergies: energies,
        modes: vec![initial],
        one_period: Op4::identity(),
        warnings: Vec::new(),
    }
}

/// Decomposes the junction Hamiltonian, dispatching on whether it is driven
/// periodically or static.
pub fn decompose(
    params: &JunctionParams,
    ops: &FermionOps,
    grid: usize,
) -> Result<FloquetDecomposition, FloquetError> {
    params.validate()?;
    let freq = params.drive_frequency()?;
    if freq == 0.0 {
        return Ok(static_decomposition(&hamiltonian_at(params, ops, 0.0)));
    }
    let props = propagate_period(params, ops, grid)?;
    quasienergies_and_modes(&props, 2.0 * PI / freq)
}

/// Orders eigenvectors by ascending energy, aligns degenerate clusters with
/// the bare basis and fixes phases (largest component real positive).
fn canonical_basis(energies: &[f64], vectors: &Op4, tol: f64) -> ([f64; DIM], Op4) {
    let mut order: Vec<usize> = (0..DIM).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));

    let mut sorted_e = [0.0; DIM];
    let mut sorted_v = Op4::zeros();
    for (dst, &src) in order.iter().enumerate() {
        sorted_e[dst] = energies[src];
        sorted_v.set_column(dst, &vectors.column(src));
    }

    // degenerate clusters
    let mut start = 0;
    while start < DIM {
        let mut end = start + 1;
        while end < DIM && (sorted_e[end] - sorted_e[end - 1]).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            align_cluster(&mut sorted_v, start, end);
            let mean = sorted_e[start..end].iter().sum::<f64>() / (end - start) as f64;
            sorted_e[start..end].iter_mut().for_each(|e| *e = mean);
        }
        start = end;
    }

    for a in 0..DIM {
        let col = sorted_v.column(a);
        let mut best = 0;
        for i in 1..DIM {
            if col[i].norm() > col[best].norm() + 1e-12 {
                best = i;
            }
        }
        let pivot = col[best];
        let phase = pivot.conj() / pivot.norm();
        let fixed = col * phase;
        sorted_v.set_column(a, &fixed);
    }
    (sorted_e, sorted_v)
}

/// Replaces columns `start..end` by the projections of the bare basis vectors
/// with largest weight in their span, orthonormalized in bare-index order.
fn align_cluster(v: &mut Op4, start: usize, end: usize) {
    let m = end - start;
    let block = v.columns(start, m).into_owned();
    let projector = &block * block.adjoint();
    let mut weights: Vec<(usize, f64)> = (0..DIM).map(|j| (j, projector[(j, j)].re)).collect();
    weights.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut chosen: Vec<usize> = weights[..m].iter().map(|w| w.0).collect();
    chosen.sort_unstable();

    let mut basis: Vec<Vector4<Complex64>> = Vec::with_capacity(m);
    for j in chosen {
        let mut x: Vector4<Complex64> = projector.column(j).into_owned();
        for b in &basis {
            let overlap = b.dotc(&x);
            x -= b * overlap;
        }
        let norm = x.norm();
        if norm < 1e-8 {
            // bare vector nearly inside the span already covered; keep original ordering
            return;
        }
        basis.push(x / Complex64::new(norm, 0.0));
    }
    for (i, b) in basis.iter().enumerate() {
        v.set_column(start + i, b);
    }
}

/// Fourier harmonics `O^{abk} = (1/T)∫ e^{−ikωt} ⟨φ_a(t)|O|φ_b(t)⟩ dt` for `|k| ≤ k_max`,
/// so that `⟨φ_a(t)|O|φ_b(t)⟩ = Σ_k e^{ikωt} O^{abk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorHarmonics {
    k_max: usize,
    harmonics: Vec<Op4>,
}

impl OperatorHarmonics {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Harmonic `k`; zero outside the stored range.
    pub fn get(&self, k: i64) -> Op4 {
        if k.unsigned_abs() as usize > self.k_max {
            Op4::zeros()
        } else {
            self.harmonics[(k + self.k_max as i64) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Op4)> {
        let k_max = self.k_max as i64;
        self.harmonics.iter().enumerate().map(move |(i, m)| (i as i64 - k_max, m))
    }

    /// `Σ_k e^{ikωt} O^{k}`.
    pub fn reconstruct(&self, frequency: f64, t: f64) -> Op4 {
        self.iter()
            .fold(Op4::zeros(), |acc, (k, m)| acc + m * Complex64::from_polar(1.0, k as f64 * frequency * t))
    }

    /// `Σ_k |O^{abk}|²` per entry.
    pub fn power(&self) -> nalgebra::Matrix4<f64> {
        self.harmonics
            .iter()
            .fold(nalgebra::Matrix4::zeros(), |acc, m| acc + m.map(|z| z.norm_sqr()))
    }
}

/// Discrete quadrature of the defining integral over the decomposition grid.
pub fn fourier_components(
    decomp: &FloquetDecomposition,
    op: &Op4,
    k_max: usize,
) -> Result<OperatorHarmonics, FloquetError> {
    let n = decomp.grid_size();
    if decomp.is_static() {
        let mut harmonics = vec![Op4::zeros(); 2 * k_max + 1];
        harmonics[k_max] = decomp.in_frame(op, 0);
        return Ok(OperatorHarmonics { k_max, harmonics });
    }
    if n <= 4 * k_max {
        return Err(FloquetError::Resolution { k_max, grid: n });
    }
    let samples: Vec<Op4> = (0..n).map(|i| decomp.in_frame(op, i)).collect();
    let inv_n = Complex64::new(1.0 / n as f64, 0.0);
    let harmonics = (-(k_max as i64)..=k_max as i64)
        .map(|k| {
            let mut acc = Op4::zeros();
            for (i, s) in samples.iter().enumerate() {
                let phase = -2.0 * PI * ((k * i as i64).rem_euclid(n as i64)) as f64 / n as f64;
                acc += s * Complex64::from_polar(1.0, phase);
            }
            flush_noise(acc * inv_n)
        })
        .collect();
    Ok(OperatorHarmonics { k_max, harmonics })
}

/// Fourier harmonics of `c_s` and `c_s†` for both spins, together with the
/// quasienergies they were computed from.
#[derive(Debug, Clone)]
pub struct FourierComponents {
    k_max: usize,
    frequency: f64,
    quasienergies: [f64; DIM],
    lowering: [OperatorHarmonics; 2],
    raising: [OperatorHarmonics; 2],
}

impl FourierComponents {
    pub fn new(
        decomp: &FloquetDecomposition,
        ops: &FermionOps,
        k_max: usize,
    ) -> Result<Self, FloquetError> {
        let lowering = [
            fourier_components(decomp, &ops.c_down, k_max)?,
            fourier_components(decomp, &ops.c_up, k_max)?,
        ];
        let raising = [
            fourier_components(decomp, &ops.c_down.adjoint(), k_max)?,
            fourier_components(decomp, &ops.c_up.adjoint(), k_max)?,
        ];
        Ok(Self {
            k_max,
            frequency: decomp.frequency(),
            quasienergies: *decomp.quasienergies(),
            lowering,
            raising,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn quasienergies(&self) -> &[f64; DIM] {
        &self.quasienergies
    }

    /// Harmonics of `c_s`.
    pub fn lowering(&self, spin: Spin) -> &OperatorHarmonics {
        &self.lowering[spin.index()]
    }

    /// Harmonics of `c_s†`.
    pub fn raising(&self, spin: Spin) -> &OperatorHarmonics {
        &self.raising[spin.index()]
    }

    /// `Δ_{abk} = E_a − E_b + kω`.
    pub fn transition_energy(&self, a: usize, b: usize, k: i64) -> f64 {
        self.quasienergies[a] - self.quasienergies[b] + k as f64 * self.frequency
    }

    /// Table of `Δ_{abk}` for a fixed `k`.
    pub fn transition_energies(&self, k: i64) -> nalgebra::Matrix4<f64> {
        nalgebra::Matrix4::from_fn(|a, b| self.transition_energy(a, b, k))
    }
}

/// Entries below this magnitude are quadrature round-off and are set to zero,
/// so undriven problems keep exactly vanishing harmonics.
const HARMONIC_FLOOR: f64 = 1e-12;

fn flush_noise(mut m: Op4) -> Op4 {
    m.iter_mut().for_each(|z| {
        if z.norm() < HARMONIC_FLOOR {
            *z = ZERO;
        }
    });
    m
}
