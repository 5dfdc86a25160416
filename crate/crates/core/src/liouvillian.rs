//! Harmonics of the periodic Floquet-Redfield generator.
//!
//! The density matrix is expressed in the Floquet basis, `ρ^{ab}(t)`, and the
//! generator is stored as `L(t) = Σ_q e^{−iqωt} L_q` with each `L_q` a 16×16
//! matrix acting on row-major vectorized 4×4 matrices.
//!
//! For a lead with rates `Γ_±`, write `A_k`, `B_k` for the harmonics of `c_s`
//! and `c_s†` and dress them with the rates at the transitions they drive:
//! `B̃_k^{ab} = B_k^{ab} Γ_+(−Δ_{abk})`, `Ã_k^{ab} = A_k^{ab} Γ_−(−Δ_{abk})`.
//! The term carrying `e^{i(k+k')ωt}` is
//!
//! `X[ρ] = A_k B̃_{k'} ρ + B_k Ã_{k'} ρ − B̃_k ρ A_{k'} − Ã_k ρ B_{k'}`
//!
//! and enters `L_{−(k+k')}` with a minus sign, its Hermitian conjugate
//! `ρ ↦ (X[ρ†])†` entering `L_{k+k'}`.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::bath::{complex_rates, BathError, LambShift, ReservoirParams, Side};
use crate::floquet::FourierComponents;
use crate::linalg::{add_sandwich, adjoint_partner, max_abs, vec_index, Superop, VecOp, ONE};
use crate::model::{Op4, Spin, DIM};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiouvillianError {
    #[error("cannot combine generators with drive frequencies {0} and {1}")]
    FrequencyMismatch(f64, f64),
    #[error("loss rate must be finite and nonnegative, got {0}")]
    InvalidLossRate(f64),
    #[error("a positive loss rate needs at least one loss channel")]
    NoLossChannels,
    #[error(transparent)]
    Bath(#[from] BathError),
}

/// Which physical process a set of blocks describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Contribution {
    Reservoir(SideTag),
    Coherent,
    Loss,
}

/// Orderable stand-in for [`Side`] in contribution sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SideTag {
    Left,
    Right,
}

impl From<Side> for SideTag {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => SideTag::Left,
            Side::Right => SideTag::Right,
        }
    }
}

/// Harmonics `L_q`, `|q| ≤ q_max`, of a periodic generator.
#[derive(Debug, Clone)]
pub struct LiouvillianBlocks {
    frequency: f64,
    q_max: usize,
    blocks: Vec<Superop>,
    contributions: BTreeSet<Contribution>,
}

impl LiouvillianBlocks {
    pub fn zeros(frequency: f64, q_max: usize) -> Self {
        Self {
            frequency,
            q_max,
            blocks: vec![Superop::zeros(); 2 * q_max + 1],
            contributions: BTreeSet::new(),
        }
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    pub fn contributions(&self) -> &BTreeSet<Contribution> {
        &self.contributions
    }

    /// `L_q`, zero outside the stored range.
    pub fn block(&self, q: i64) -> Superop {
        if q.unsigned_abs() as usize > self.q_max {
            Superop::zeros()
        } else {
            self.blocks[(q + self.q_max as i64) as usize]
        }
    }

    fn block_mut(&mut self, q: i64) -> &mut Superop {
        let idx = (q + self.q_max as i64) as usize;
        &mut self.blocks[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Superop)> {
        let q_max = self.q_max as i64;
        self.blocks.iter().enumerate().map(move |(i, b)| (i as i64 - q_max, b))
    }

    /// Largest `|q|` whose block is not identically zero.
    pub fn max_harmonic(&self) -> usize {
        self.iter()
            .filter(|(_, b)| b.iter().any(|z| z.norm() > 0.0))
            .map(|(q, _)| q.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Whether only `L_0` is nonzero.
    pub fn is_time_independent(&self) -> bool {
        self.max_harmonic() == 0
    }

    /// `L(t) = Σ_q e^{−iqωt} L_q`.
    pub fn evaluate_at_time(&self, t: f64) -> Superop {
        let mut out = Superop::zeros();
        for (q, b) in self.iter() {
            if q == 0 || self.frequency == 0.0 {
                out += b;
            } else {
                out += b * Complex64::from_polar(1.0, -(q as f64) * self.frequency * t);
            }
        }
        out
    }

    /// `L(t) ρ` without forming `L(t)`.
    pub fn apply_at_time(&self, t: f64, rho: &VecOp) -> VecOp {
        self.evaluate_at_time(t) * rho
    }

    /// Sum of two generators on the same drive.
    pub fn combined(&self, other: &Self) -> Result<Self, LiouvillianError> {
        if self.frequency != other.frequency {
            return Err(LiouvillianError::FrequencyMismatch(self.frequency, other.frequency));
        }
        let q_max = self.q_max.max(other.q_max);
        let mut out = Self::zeros(self.frequency, q_max);
        for q in -(q_max as i64)..=q_max as i64 {
            *out.block_mut(q) = self.block(q) + other.block(q);
        }
        out.contributions = self.contributions.union(&other.contributions).copied().collect();
        Ok(out)
    }

    /// Largest entry magnitude over all blocks.
    pub fn max_entry(&self) -> f64 {
        self.blocks.iter().map(max_abs).fold(0.0, f64::max)
    }
}

/// Loss of atoms from the junction via Lindblad operators `c_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipatorSpec {
    pub rate: f64,
    pub channels: Vec<Spin>,
}

impl DissipatorSpec {
    pub fn none() -> Self {
        Self {
            rate: 0.0,
            channels: Vec::new(),
        }
    }

    pub fn both_spins(rate: f64) -> Self {
        Self {
            rate,
            channels: Spin::BOTH.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), LiouvillianError> {
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(LiouvillianError::InvalidLossRate(self.rate));
        }
        if self.rate > 0.0 && self.channels.is_empty() {
            return Err(LiouvillianError::NoLossChannels);
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.rate > 0.0 && !self.channels.is_empty()
    }
}

impl Default for DissipatorSpec {
    fn default() -> Self {
        Self::none()
    }
}

/// Generator contribution of one lead, summed over both spins.
pub fn assemble_reservoir_blocks(
    fc: &FourierComponents,
    res: &ReservoirParams,
    lamb: Option<LambShift>,
) -> Result<LiouvillianBlocks, LiouvillianError> {
    res.validate()?;
    let k_max = fc.k_max();
    let km = k_max as i64;
    let mut out = LiouvillianBlocks::zeros(fc.frequency(), 2 * k_max);
    out.contributions.insert(Contribution::Reservoir(res.side.into()));
    if res.gamma == 0.0 {
        return Ok(out);
    }

    // rate tables Γ_±(−Δ_{abk})
    let mut gamma_plus = Vec::with_capacity(2 * k_max + 1);
    let mut gamma_minus = Vec::with_capacity(2 * k_max + 1);
    for k in -km..=km {
        let mut gp = Op4::zeros();
        let mut gm = Op4::zeros();
        for a in 0..DIM {
            for b in 0..DIM {
                let (p, m) = complex_rates(-fc.transition_energy(a, b, k), res, lamb)?;
                gp[(a, b)] = p;
                gm[(a, b)] = m;
            }
        }
        gamma_plus.push(gp);
        gamma_minus.push(gm);
    }

    let mut x = vec![Superop::zeros(); 4 * k_max + 1];
    for spin in Spin::BOTH {
        let lower = fc.lowering(spin);
        let raise = fc.raising(spin);
        let a: Vec<Op4> = (-km..=km).map(|k| lower.get(k)).collect();
        let b: Vec<Op4> = (-km..=km).map(|k| raise.get(k)).collect();
        let bp: Vec<Op4> = b.iter().zip(&gamma_plus).map(|(m, g)| m.component_mul(g)).collect();
        let am: Vec<Op4> = a.iter().zip(&gamma_minus).map(|(m, g)| m.component_mul(g)).collect();
        let nonzero: Vec<bool> = a.iter().zip(&b).map(|(x, y)| max_abs(x) > 0.0 || max_abs(y) > 0.0).collect();

        // one-sided terms collapse to a single left multiplication per harmonic
        let mut left = vec![Op4::zeros(); 4 * k_max + 1];
        for i in 0..a.len() {
            if !nonzero[i] {
                continue;
            }
            for j in 0..a.len() {
                if !nonzero[j] {
                    continue;
                }
                // k + k' = (i − km) + (j − km); stored at index q + 2km with q = −(k + k')
                let slot = 4 * k_max - (i + j);
                left[slot] += a[i] * bp[j] + b[i] * am[j];
                add_sandwich(&mut x[slot], &bp[i], &a[j], -ONE);
                add_sandwich(&mut x[slot], &am[i], &b[j], -ONE);
            }
        }
        for (slot, m) in left.iter().enumerate() {
            if max_abs(m) > 0.0 {
                add_sandwich(&mut x[slot], m, &Op4::identity(), ONE);
            }
        }
    }

    let q_max = 2 * km;
    for (slot, xq) in x.iter().enumerate() {
        let q = slot as i64 - q_max;
        *out.block_mut(q) -= xq;
        *out.block_mut(-q) -= adjoint_partner(xq);
    }
    Ok(out)
}

/// Adds `−i(E_a − E_b)` on the diagonal of `L_0`.
pub fn add_coherent_term(blocks: &mut LiouvillianBlocks, quasienergies: &[f64; DIM]) {
    let l0 = blocks.block_mut(0);
    for a in 0..DIM {
        for b in 0..DIM {
            let i = vec_index(a, b);
            l0[(i, i)] += Complex64::new(0.0, -(quasienergies[a] - quasienergies[b]));
        }
    }
    blocks.contributions.insert(Contribution::Coherent);
}

/// Coherent generator alone.
pub fn coherent_blocks(fc: &FourierComponents) -> LiouvillianBlocks {
    let mut out = LiouvillianBlocks::zeros(fc.frequency(), 2 * fc.k_max());
    add_coherent_term(&mut out, fc.quasienergies());
    out
}

/// `γ_I Σ_s (2 L ρ L† − L†L ρ − ρ L†L)` with `L = c_s`, in harmonics.
pub fn assemble_loss_blocks(
    spec: &DissipatorSpec,
    fc: &FourierComponents,
) -> Result<LiouvillianBlocks, LiouvillianError> {
    spec.validate()?;
    let k_max = fc.k_max();
    let km = k_max as i64;
    let mut out = LiouvillianBlocks::zeros(fc.frequency(), 2 * k_max);
    out.contributions.insert(Contribution::Loss);
    if !spec.is_active() {
        return Ok(out);
    }
    let rate = Complex64::new(spec.rate, 0.0);
    let mut channels = spec.channels.clone();
    channels.sort_by_key(|s| s.index());
    channels.dedup();
    for spin in channels {
        let l: Vec<Op4> = (-km..=km).map(|k| fc.lowering(spin).get(k)).collect();
        let ld: Vec<Op4> = (-km..=km).map(|k| fc.raising(spin).get(k)).collect();
        let mut anti = vec![Op4::zeros(); 4 * k_max + 1];
        for i in 0..l.len() {
            if max_abs(&l[i]) == 0.0 {
                continue;
            }
            for j in 0..l.len() {
                if max_abs(&l[j]) == 0.0 {
                    continue;
                }
                let slot = 4 * k_max - (i + j);
                let q = slot as i64 - 2 * km;
                add_sandwich(out.block_mut(q), &l[i], &ld[j], rate * 2.0);
                anti[slot] += ld[i] * l[j];
            }
        }
        for (slot, m) in anti.iter().enumerate() {
            if max_abs(m) > 0.0 {
                let q = slot as i64 - 2 * km;
                add_sandwich(out.block_mut(q), m, &Op4::identity(), -rate);
                add_sandwich(out.block_mut(q), &Op4::identity(), m, -rate);
            }
        }
    }
    Ok(out)
}
