use faer::complex_native::c64;
use faer::prelude::SpSolver;
use faer::Mat;
use num_complex::Complex64;

use super::monodromy::{attractor, DEFAULT_MONODROMY_STEPS};
use super::{samples_from_harmonics, DegeneracyPolicy, Method, SolverError, SteadyStateSolution};
use crate::liouvillian::LiouvillianBlocks;
use crate::linalg::vec_index;
use crate::model::Op4;

/// Pivot ratio below which the normalized system is treated as singular.
const RANK_TOL: f64 = 1e-12;

/// Solves `0 = ikω ρ_k + Σ_q L_q ρ_{k−q}` for `|k| ≤ k_max`, with the
/// `(0,0)` equation of the `k = 0` block replaced by `Tr ρ_0 = 1`.
///
/// A time-independent generator reduces to the single `k = 0` block.
pub fn solve_fourier(
    blocks: &LiouvillianBlocks,
    k_max: usize,
    policy: DegeneracyPolicy,
) -> Result<SteadyStateSolution, SolverError> {
    let static_gen = blocks.frequency() == 0.0;
    let k_max = if static_gen { 0 } else { k_max };
    let km = k_max as i64;
    let size = 16 * (2 * k_max + 1);
    let omega = blocks.frequency();
    let q_max = blocks.q_max() as i64;

    let mut m = Mat::<c64>::zeros(size, size);
    for k in -km..=km {
        let row0 = 16 * (k + km) as usize;
        for j in (k - q_max).max(-km)..=(k + q_max).min(km) {
            let b = blocks.block(k - j);
            let col0 = 16 * (j + km) as usize;
            for r in 0..16 {
                for c in 0..16 {
                    let z = b[(r, c)];
                    if z.re != 0.0 || z.im != 0.0 {
                        m.write(row0 + r, col0 + c, c64::new(z.re, z.im));
                    }
                }
            }
        }
        for r in 0..16 {
            let z = m.read(row0 + r, row0 + r);
            m.write(row0 + r, row0 + r, c64::new(z.re, z.im + k as f64 * omega));
        }
    }

    let norm_row = 16 * k_max;
    for c in 0..size {
        m.write(norm_row, c, c64::new(0.0, 0.0));
    }
    for a in 0..4 {
        m.write(norm_row, norm_row + vec_index(a, a), c64::new(1.0, 0.0));
    }
    let mut rhs = Mat::<c64>::zeros(size, 1);
    rhs.write(norm_row, 0, c64::new(1.0, 0.0));

    let lu = m.partial_piv_lu();
    let u = lu.compute_u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..size {
        let p = u.read(i, i).abs();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if !(lo > RANK_TOL * hi) {
        return match policy {
            DegeneracyPolicy::Error => Err(SolverError::Degenerate(format!(
                "Fourier system pivot ratio {:e}",
                lo / hi
            ))),
            DegeneracyPolicy::Attractor(init) => {
                let mut sol = attractor(blocks, &init, DEFAULT_MONODROMY_STEPS, Method::FourierSpace)?;
                sol.k_max_used = k_max;
                Ok(sol)
            }
        };
    }
    let x = lu.solve(&rhs);

    let harmonics: Vec<Op4> = (0..2 * k_max + 1)
        .map(|i| {
            Op4::from_fn(|a, b| {
                let z = x.read(16 * i + vec_index(a, b), 0);
                Complex64::new(z.re, z.im)
            })
        })
        .collect();
    if harmonics.iter().any(|h| h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(SolverError::NonFinite);
    }
    let samples = if static_gen {
        vec![harmonics[0]]
    } else {
        samples_from_harmonics(&harmonics, omega, (4 * k_max + 4).max(64))
    };
    Ok(SteadyStateSolution::new(Method::FourierSpace, blocks, k_max, harmonics, samples))
}
