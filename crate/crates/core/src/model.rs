//! The junction Hilbert space, its fermionic operators and the driven
//! effective Hamiltonian.
//!
//! The junction is a single site holding up to two fermions of opposite spin.
//! Basis ordering is fixed to `(|0⟩, |↓⟩, |↑⟩, |↓↑⟩)` with
//! `|↓↑⟩ = c↑† c↓† |0⟩`.

use nalgebra::Matrix4;
use num_complex::Complex64;

/// Complex 4×4 matrix on the junction Hilbert space.
pub type Op4 = Matrix4<Complex64>;

/// Dimension of the junction Hilbert space.
pub const DIM: usize = 4;

/// Basis index of the empty state.
pub const EMPTY: usize = 0;
/// Basis index of the spin-down state.
pub const DOWN: usize = 1;
/// Basis index of the spin-up state.
pub const UP: usize = 2;
/// Basis index of the doubly occupied state.
pub const PAIR: usize = 3;

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("at most two drive fields are supported, got {0}")]
    TooManyDrives(usize),
    #[error("drive detunings {0} and {1} do not share a common period")]
    NonPeriodic(f64, f64),
    #[error("non-finite model parameter `{0}`")]
    NonFinite(&'static str),
    #[error("particle-hole symmetry requires omega = -U/2 (omega = {omega}, U = {interaction})")]
    NotParticleHoleSymmetric { omega: f64, interaction: f64 },
}

/// Spin species of a junction fermion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Down, Spin::Up];

    pub fn index(self) -> usize {
        match self {
            Spin::Down => 0,
            Spin::Up => 1,
        }
    }
}

/// One pair-conversion field: amplitude `g` and detuning `δ`, entering the
/// Hamiltonian as `g e^{iδt} c↓c↑ + h.c.`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    pub amplitude: Complex64,
    pub detuning: f64,
}

/// Parameters of the driven junction. `omega` is the on-site energy already
/// shifted into the frame rotating with the molecular transition.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionParams {
    pub omega: f64,
    pub interaction: f64,
    pub drives: Vec<Drive>,
}

impl JunctionParams {
    /// Undriven junction.
    pub fn new(omega: f64, interaction: f64) -> Self {
        Self {
            omega,
            interaction,
            drives: Vec::new(),
        }
    }

    /// Undriven junction at the particle-hole symmetric point `ω = −U/2`.
    pub fn particle_hole_symmetric(interaction: f64) -> Self {
        Self::new(-interaction / 2.0, interaction)
    }

    /// Adds the standard pair of drives with detunings `δ_L = Δμ`, `δ_R = −Δμ`.
    pub fn with_bias_drives(mut self, g_left: Complex64, g_right: Complex64, delta_mu: f64) -> Self {
        self.drives = vec![
            Drive {
                amplitude: g_left,
                detuning: delta_mu,
            },
            Drive {
                amplitude: g_right,
                detuning: -delta_mu,
            },
        ];
        self
    }

    /// Adds an arbitrary drive field.
    pub fn with_drive(mut self, amplitude: Complex64, detuning: f64) -> Self {
        self.drives.push(Drive { amplitude, detuning });
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.omega.is_finite() {
            return Err(ModelError::NonFinite("omega"));
        }
        if !self.interaction.is_finite() {
            return Err(ModelError::NonFinite("interaction"));
        }
        if self.drives.len() > 2 {
            return Err(ModelError::TooManyDrives(self.drives.len()));
        }
        for d in &self.drives {
            if !(d.amplitude.re.is_finite() && d.amplitude.im.is_finite()) {
                return Err(ModelError::NonFinite("drive amplitude"));
            }
            if !d.detuning.is_finite() {
                return Err(ModelError::NonFinite("drive detuning"));
            }
        }
        self.drive_frequency().map(|_| ())
    }

    /// Enforces `ω = −U/2` exactly.
    pub fn check_particle_hole_symmetric(&self) -> Result<(), ModelError> {
        if self.omega == -self.interaction / 2.0 {
            Ok(())
        } else {
            Err(ModelError::NotParticleHoleSymmetric {
                omega: self.omega,
                interaction: self.interaction,
            })
        }
    }

    /// Angular frequency of the Hamiltonian's periodicity, or `0.0` when it is
    /// time independent. Every nonzero detuning must have the same magnitude.
    pub fn drive_frequency(&self) -> Result<f64, ModelError> {
        let mut freq = 0.0_f64;
        for d in &self.drives {
            let f = d.detuning.abs();
            if f == 0.0 {
                continue;
            }
            if freq == 0.0 {
                freq = f;
            } else if (f - freq).abs() > REL_TOL * freq.max(f) {
                return Err(ModelError::NonPeriodic(freq, f));
            }
        }
        Ok(freq)
    }

    /// Largest drive amplitude modulus (zero when undriven).
    pub fn max_amplitude(&self) -> f64 {
        self.drives.iter().map(|d| d.amplitude.norm()).fold(0.0, f64::max)
    }
}

/// Fermionic operator matrices in the junction basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOps {
    pub c_down: Op4,
    pub c_up: Op4,
    pub number_down: Op4,
    pub number_up: Op4,
    /// `c↓ c↑`
    pub pair_lower: Op4,
}

impl FermionOps {
    pub fn new() -> Self {
        build_fermion_operators()
    }

    pub fn lowering(&self, spin: Spin) -> &Op4 {
        match spin {
            Spin::Down => &self.c_down,
            Spin::Up => &self.c_up,
        }
    }

    pub fn number(&self, spin: Spin) -> &Op4 {
        match spin {
            Spin::Down => &self.number_down,
            Spin::Up => &self.number_up,
        }
    }

    /// Total occupation `n↓ + n↑`.
    pub fn total_number(&self) -> Op4 {
        self.number_down + self.number_up
    }

    /// `c↑† c↓†`, the adjoint of [`Self::pair_lower`].
    pub fn pair_raise(&self) -> Op4 {
        self.pair_lower.adjoint()
    }
}

impl Default for FermionOps {
    fn default() -> Self {
        Self::new()
    }
}

pub fn build_fermion_operators() -> FermionOps {
    let one = Complex64::new(1.0, 0.0);
    let mut c_down = Op4::zeros();
    let mut c_up = Op4::zeros();
    // c↓|↓⟩ = |0⟩, c↑|↑⟩ = |0⟩
    c_down[(EMPTY, DOWN)] = one;
    c_up[(EMPTY, UP)] = one;
    // |↓↑⟩ = c↑†|↓⟩, so c↑|↓↑⟩ = |↓⟩ and c↓|↓↑⟩ = −|↑⟩
    c_up[(DOWN, PAIR)] = one;
    c_down[(UP, PAIR)] = -one;

    let number_down = c_down.adjoint() * c_down;
    let number_up = c_up.adjoint() * c_up;
    let pair_lower = c_down * c_up;
    FermionOps {
        c_down,
        c_up,
        number_down,
        number_up,
        pair_lower,
    }
}

/// `H(t) = ω(n↑+n↓) + U n↑n↓ + Σ_ℓ (g_ℓ e^{iδ_ℓ t} c↓c↑ + h.c.)`
pub fn hamiltonian_at(params: &JunctionParams, ops: &FermionOps, t: f64) -> Op4 {
    let omega = Complex64::new(params.omega, 0.0);
    let u = Complex64::new(params.interaction, 0.0);
    let mut h = (ops.number_down + ops.number_up) * omega + ops.number_up * ops.number_down * u;
    let mut pair = Complex64::new(0.0, 0.0);
    for d in &params.drives {
        pair += d.amplitude * Complex64::from_polar(1.0, d.detuning * t);
    }
    if pair != Complex64::new(0.0, 0.0) {
        let term = ops.pair_lower * pair;
        h += term + term.adjoint();
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn anticommutator(a: &Op4, b: &Op4) -> Op4 {
        a * b + b * a
    }

    fn basis(i: usize) -> nalgebra::Vector4<Complex64> {
        let mut v = nalgebra::Vector4::zeros();
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    fn max_abs(m: &Op4) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn canonical_anticommutation() {
        let ops = build_fermion_operators();
        let id = Op4::identity();
        for (i, a) in [&ops.c_down, &ops.c_up].into_iter().enumerate() {
            for (j, b) in [&ops.c_down, &ops.c_up].into_iter().enumerate() {
                let expected = if i == j { id } else { Op4::zeros() };
                assert!(max_abs(&(anticommutator(a, &b.adjoint()) - expected)) < 1e-12);
                assert!(max_abs(&anticommutator(a, b)) < 1e-12);
            }
        }
    }

    #[test]
    fn annihilation_and_pair_matrix_elements() {
        let ops = build_fermion_operators();
        assert_eq!(ops.c_down * basis(DOWN), basis(EMPTY));
        assert_eq!(ops.pair_lower * basis(PAIR), basis(EMPTY));
        // |↓↑⟩ = c↑† c↓† |0⟩
        let built = ops.c_up.adjoint() * ops.c_down.adjoint() * basis(EMPTY);
        assert_eq!(built, basis(PAIR));
        assert_eq!(ops.number_down, ops.c_down.adjoint() * ops.c_down);
        assert_eq!(ops.pair_lower, ops.c_down * ops.c_up);
    }

    #[test]
    fn undriven_hamiltonian_is_diagonal() {
        let ops = FermionOps::new();
        let p = JunctionParams::new(0.7, 0.3);
        let h = hamiltonian_at(&p, &ops, 1.3);
        let expected = [0.0, 0.7, 0.7, 1.7];
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { expected[i] } else { 0.0 };
                assert_abs_diff_eq!(h[(i, j)].re, e, epsilon = 1e-15);
                assert_abs_diff_eq!(h[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
        let sym = JunctionParams::new(1.0, -2.0);
        let h = hamiltonian_at(&sym, &ops, 0.0);
        assert_eq!(
            h.diagonal().map(|z| z.re),
            nalgebra::Vector4::new(0.0, 1.0, 1.0, 0.0)
        );
    }

    #[test]
    fn pair_coupling_at_time_zero() {
        let ops = FermionOps::new();
        let g = Complex64::new(0.5, 0.0);
        let p = JunctionParams::particle_hole_symmetric(-2.0).with_bias_drives(g, g, 1.0);
        let h = hamiltonian_at(&p, &ops, 0.0);
        assert_abs_diff_eq!(h[(EMPTY, PAIR)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(PAIR, EMPTY)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn drive_frequency_rules() {
        let g = Complex64::new(0.3, 0.0);
        let p = JunctionParams::new(1.0, -2.0).with_bias_drives(g, g, 0.8);
        assert_eq!(p.drive_frequency().unwrap(), 0.8);
        assert_eq!(JunctionParams::new(1.0, -2.0).drive_frequency().unwrap(), 0.0);
        let bad = JunctionParams::new(1.0, -2.0).with_drive(g, 1.0).with_drive(g, 1.5);
        assert!(matches!(bad.drive_frequency(), Err(ModelError::NonPeriodic(..))));
        let three = bad.with_drive(g, 1.0);
        assert!(matches!(three.validate(), Err(ModelError::TooManyDrives(3))));
    }

    #[test]
    fn particle_hole_mode_is_exact() {
        let p = JunctionParams::particle_hole_symmetric(-3.0);
        assert!(p.check_particle_hole_symmetric().is_ok());
        assert!(JunctionParams::new(1.0, -3.0).check_particle_hole_symmetric().is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn commutator(a: &Op4, b: &Op4) -> Op4 {
            a * b - b * a
        }

        proptest! {
            #[test]
            fn hamiltonian_is_hermitian_periodic_and_spin_balanced(
                omega in -3.0..3.0f64,
                u in -4.0..4.0f64,
                gr in -1.0..1.0f64, gi in -1.0..1.0f64,
                hr in -1.0..1.0f64,
                dmu in 0.1..3.0f64,
                t in 0.0..50.0f64,
            ) {
                let ops = FermionOps::new();
                let p = JunctionParams::new(omega, u)
                    .with_bias_drives(Complex64::new(gr, gi), Complex64::new(hr, 0.0), dmu);
                let h = hamiltonian_at(&p, &ops, t);
                prop_assert!(max_abs(&(h - h.adjoint())) < 1e-14);
                let period = 2.0 * std::f64::consts::PI / dmu;
                let shifted = hamiltonian_at(&p, &ops, t + period);
                let scale = max_abs(&h).max(1.0);
                prop_assert!(max_abs(&(shifted - h)) <= 1e-12 * scale * (1.0 + t));
                let spin = ops.number_up - ops.number_down;
                prop_assert!(max_abs(&commutator(&h, &spin)) < 1e-14);
                let undriven = hamiltonian_at(&JunctionParams::new(omega, u), &ops, t);
                prop_assert!(max_abs(&commutator(&undriven, &ops.total_number())) < 1e-14);
            }
        }
    }
}
