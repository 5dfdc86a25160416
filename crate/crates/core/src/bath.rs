//! Reservoir thermodynamics for flat-band fermionic leads.
//!
//! Each lead enters only through its tunnelling rate `γ_ℓ`, chemical
//! potential `μ_ℓ` and temperature `T_ℓ`. Rates are
//! `γ_{ℓ±}(E) = γ_ℓ [1 − n_ℓ(E ± μ_ℓ)]`; the optional shifts are the
//! cutoff-regularized principal-value integrals
//! `Ω_{ℓ±}(E) = (γ_ℓ/π) P.V.∫ n_ℓ(ω)/(E + ω ± μ_ℓ) dω`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BathError {
    #[error("reservoir {side:?}: {field} must be finite and nonnegative, got {value}")]
    Invalid {
        side: Side,
        field: &'static str,
        value: f64,
    },
    #[error("{0} must be positive, got {1}")]
    Domain(&'static str, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    pub side: Side,
    pub gamma: f64,
    pub mu: f64,
    pub temperature: f64,
}

impl ReservoirParams {
    pub fn new(side: Side, gamma: f64, mu: f64, temperature: f64) -> Self {
        Self {
            side,
            gamma,
            mu,
            temperature,
        }
    }

    /// The symmetric pair of leads with `μ_L = Δμ/2 = −μ_R`.
    pub fn symmetric_pair(gamma: f64, delta_mu: f64, temperature: f64) -> [Self; 2] {
        [
            Self::new(Side::Left, gamma, delta_mu / 2.0, temperature),
            Self::new(Side::Right, gamma, -delta_mu / 2.0, temperature),
        ]
    }

    pub fn validate(&self) -> Result<(), BathError> {
        let check = |field, value: f64| {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(BathError::Invalid {
                    side: self.side,
                    field,
                    value,
                })
            }
        };
        check("gamma", self.gamma)?;
        check("temperature", self.temperature)?;
        if !self.mu.is_finite() {
            return Err(BathError::Invalid {
                side: self.side,
                field: "mu",
                value: self.mu,
            });
        }
        Ok(())
    }

    /// Occupation `n_ℓ(E)` of this lead, measured from its own chemical potential.
    pub fn occupation(&self, e: f64) -> f64 {
        fermi_occupation(e, self.temperature)
    }
}

/// `1/(1 + e^{E/T})`; at `T = 0` the step `θ(−E)` with value ½ at `E = 0`.
pub fn fermi_occupation(e: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        if e < 0.0 {
            1.0
        } else if e > 0.0 {
            0.0
        } else {
            0.5
        }
    } else {
        // tanh form stays finite for large |E/T|
        0.5 * (1.0 - (0.5 * e / temperature).tanh())
    }
}

/// `(γ_{ℓ+}(E), γ_{ℓ−}(E))`.
pub fn gamma_rates(e: f64, res: &ReservoirParams) -> (f64, f64) {
    let plus = res.gamma * (1.0 - res.occupation(e + res.mu));
    let minus = res.gamma * (1.0 - res.occupation(e - res.mu));
    (plus, minus)
}

/// Cutoff for the Lamb-shift integrals. There is no default: the integrals
/// diverge without one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambShift {
    pub cutoff: f64,
}

/// `(Ω_{ℓ+}(E), Ω_{ℓ−}(E))` with the frequency integral restricted to `[−cutoff, cutoff]`.
///
/// At `T = 0` the integral is elementary. At finite temperature the pole is
/// subtracted analytically and the smooth remainder integrated numerically.
/// A pole sitting exactly on the zero-temperature Fermi edge gives a
/// logarithmic divergence and a non-finite result.
pub fn lamb_shift(e: f64, res: &ReservoirParams, cutoff: f64) -> Result<(f64, f64), BathError> {
    if !(cutoff > 0.0) {
        return Err(BathError::Domain("cutoff", cutoff));
    }
    if res.gamma == 0.0 {
        return Ok((0.0, 0.0));
    }
    let pref = res.gamma / PI;
    let plus = pref * pv_fermi_integral(-(e + res.mu), res.temperature, cutoff);
    let minus = pref * pv_fermi_integral(-(e - res.mu), res.temperature, cutoff);
    Ok((plus, minus))
}

/// `P.V.∫_{−c}^{c} n(ω)/(ω − x0) dω`.
fn pv_fermi_integral(x0: f64, temperature: f64, c: f64) -> f64 {
    let log_abs = |x: f64| x.abs().ln();
    if temperature == 0.0 {
        // ∫_{−c}^{0} dω/(ω − x0)
        return log_abs(x0) - log_abs(-c - x0);
    }
    // pole part n(x0)·P.V.∫ dω/(ω − x0), valid inside and outside the window
    let pole = fermi_occupation(x0, temperature) * (log_abs(c - x0) - log_abs(-c - x0));
    let n0 = fermi_occupation(x0, temperature);
    let dn0 = -0.25 / (temperature * (0.5 * x0 / temperature).cosh().powi(2));
    let smooth = |w: f64| {
        let d = w - x0;
        if d.abs() < 1e-9 * temperature.max(1e-300) {
            dn0
        } else {
            (fermi_occupation(w, temperature) - n0) / d
        }
    };
    // split at the features: pole and Fermi edge, each with a thermal window
    let mut cuts = vec![-c, c];
    for centre in [0.0, x0] {
        for off in [-20.0 * temperature, 0.0, 20.0 * temperature] {
            let p = centre + off;
            if p > -c && p < c {
                cuts.push(p);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let remainder: f64 = cuts
        .windows(2)
        .map(|w| quadrature::integrate(smooth, w[0], w[1], 1e-13).integral)
        .sum();
    pole + remainder
}

/// Complex rates `Γ_{ℓ±}(E) = γ_{ℓ±}(E) + iΩ_{ℓ±}(E)`; the shifts are included
/// only when a cutoff is given.
pub fn complex_rates(
    e: f64,
    res: &ReservoirParams,
    lamb: Option<LambShift>,
) -> Result<(Complex64, Complex64), BathError> {
    let (gp, gm) = gamma_rates(e, res);
    let (op, om) = match lamb {
        Some(l) => lamb_shift(e, res, l.cutoff)?,
        None => (0.0, 0.0),
    };
    Ok((Complex64::new(gp, op), Complex64::new(gm, om)))
}

/// Regular part of the zero-temperature lead correlation
/// `f_{ℓ+}(τ) = (γ/π)∫ e^{iωτ} n(ω − μ) dω`, which is `−iγ e^{iμτ}/(πτ)`;
/// the contact term `γδ(τ)` is excluded.
pub fn correlation_zero_t(tau: f64, mu: f64, gamma: f64) -> Result<Complex64, BathError> {
    if !(tau > 0.0) {
        return Err(BathError::Domain("tau", tau));
    }
    Ok(Complex64::new(0.0, -gamma / (PI * tau)) * Complex64::from_polar(1.0, mu * tau))
}

/// Regular part of the zero-chemical-potential lead correlation at finite
/// temperature, `−iγT/sinh(πTτ)`.
pub fn correlation_zero_mu(tau: f64, temperature: f64, gamma: f64) -> Result<Complex64, BathError> {
    if !(tau > 0.0) {
        return Err(BathError::Domain("tau", tau));
    }
    if !(temperature > 0.0) {
        return Err(BathError::Domain("temperature", temperature));
    }
    let x = PI * temperature * tau;
    // 1/sinh(x) = 2e^{−x}/(1 − e^{−2x}) avoids overflow at large x
    let inv_sinh = 2.0 * (-x).exp() / (-(-2.0 * x).exp_m1());
    Ok(Complex64::new(0.0, -gamma * temperature * inv_sinh))
}
