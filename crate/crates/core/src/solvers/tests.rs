use num_complex::Complex64;

use super::*;
use crate::bath::ReservoirParams;
use crate::floquet::{decompose, FloquetDecomposition, FourierComponents};
use crate::liouvillian::{add_coherent_term, assemble_loss_blocks, assemble_reservoir_blocks, DissipatorSpec};
use crate::model::{FermionOps, JunctionParams};

struct Case {
    decomp: FloquetDecomposition,
    blocks: LiouvillianBlocks,
}

fn case(g: f64, dmu: f64, gamma: f64, t: f64, k_max: usize) -> Case {
    let ops = FermionOps::new();
    let gc = Complex64::new(g, 0.0);
    let p = JunctionParams::particle_hole_symmetric(-2.0).with_bias_drives(gc, gc, dmu);
    let decomp = decompose(&p, &ops, 1000).unwrap();
    let fc = FourierComponents::new(&decomp, &ops, k_max).unwrap();
    let [l, r] = ReservoirParams::symmetric_pair(gamma, dmu, t);
    let mut blocks = assemble_reservoir_blocks(&fc, &l, None)
        .unwrap()
        .combined(&assemble_reservoir_blocks(&fc, &r, None).unwrap())
        .unwrap()
        .combined(&assemble_loss_blocks(&DissipatorSpec::none(), &fc).unwrap())
        .unwrap();
    add_coherent_term(&mut blocks, decomp.quasienergies());
    Case { decomp, blocks }
}

fn mixed() -> Op4 {
    Op4::identity() * Complex64::new(0.25, 0.0)
}

#[test]
fn undriven_fourier_solution_is_static_null_vector() {
    let c = case(0.0, 1.0, 0.1, 0.3, 8);
    let sol = solve_fourier(&c.blocks, 8, DegeneracyPolicy::Error).unwrap();
    for (k, m) in sol.harmonics() {
        if k != 0 {
            assert!(max_abs_op(m) < 1e-12, "k={k}");
        }
    }
    let r = c.blocks.block(0) * vectorize(&sol.rho_k(0));
    assert!(r.norm() < 1e-12);
    assert!(sol.residual < 1e-10 * 0.1);
    assert!(sol.trace_defect() < 1e-12);
    assert!(sol.is_physical());
}

fn max_abs_op(m: &Op4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn zero_bias_steady_state_is_thermal() {
    let c = case(0.0, 0.0, 0.1, 0.5, 4);
    assert!(c.blocks.frequency() == 0.0);
    let sol = solve_fourier(&c.blocks, 4, DegeneracyPolicy::Error).unwrap();
    assert_eq!(sol.rho_k_max(), 0);
    // H = −U/2 (n↑ + n↓) + U n↑n↓ with U = −2, μ = 0
    let energies = [0.0, 1.0, 1.0, 0.0];
    let weights: Vec<f64> = energies.iter().map(|e: &f64| (-e / 0.5).exp()).collect();
    let z: f64 = weights.iter().sum();
    let phi = c.decomp.initial_modes();
    let rho = phi * sol.rho_k(0) * phi.adjoint();
    for a in 0..4 {
        for b in 0..4 {
            let want = if a == b { weights[a] / z } else { 0.0 };
            let got = rho[(a, b)];
            assert!((got - want).norm() <= 1e-8 * want.max(1e-2), "{a}{b}: {got} vs {want}");
        }
    }
}

#[test]
fn driven_residual_is_small_and_state_is_physical() {
    let c = case(0.5, 1.0, 0.1, 0.0, 16);
    let sol = solve_fourier(&c.blocks, 16, DegeneracyPolicy::Error).unwrap();
    assert!(sol.residual < 1e-10 * 0.1, "{}", sol.residual);
    assert!(sol.trace_defect() < 1e-10);
    assert!(sol.max_hermiticity_defect() < 1e-10);
    assert!(sol.is_physical(), "{}", sol.positivity_floor);
    assert!(!sol.degenerate);
    let rho = sol.rho_at(0.3);
    assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn blocked_transport_is_degenerate() {
    let c = case(0.0, 1.0, 0.1, 0.0, 4);
    assert!(matches!(
        solve_fourier(&c.blocks, 4, DegeneracyPolicy::Error),
        Err(SolverError::Degenerate(_))
    ));
    assert!(matches!(
        solve_monodromy(&c.blocks, 400, DegeneracyPolicy::Error),
        Err(SolverError::Degenerate(_))
    ));
    let sol = solve_fourier(&c.blocks, 4, DegeneracyPolicy::attractor_of_mixed()).unwrap();
    assert!(sol.degenerate);
    assert!(sol.trace_defect() < 1e-10);
    // the mixed state splits evenly between the absorbing empty and paired states
    let rho = sol.rho_k(0);
    assert!((rho[(0, 0)].re - 0.5).abs() < 1e-6 && (rho[(3, 3)].re - 0.5).abs() < 1e-6);
}

#[test]
fn monodromy_spectrum_and_agreement() {
    let c = case(0.5, 1.0, 0.1, 0.2, 16);
    let f = solve_fourier(&c.blocks, 16, DegeneracyPolicy::Error).unwrap();
    let m = solve_monodromy(&c.blocks, DEFAULT_MONODROMY_STEPS, DegeneracyPolicy::Error).unwrap();
    assert_eq!(m.floquet_exponents.len(), 16);
    assert!(m.floquet_exponents.iter().all(|e| e.re < 1e-6));
    let diff = (m.rho_k(0) - f.rho_k(0)).norm();
    assert!(diff < 1e-4, "{diff}");
    let p = one_period_propagator(&c.blocks, 400);
    let eig = to_faer(&p).complex_eigendecomposition();
    let s = eig.s().column_vector();
    assert!((0..16).all(|i| s.read(i).abs() <= 1.0 + 1e-8));
}

#[test]
fn monodromy_static_generator() {
    let c = case(0.0, 0.0, 0.1, 0.5, 4);
    let f = solve_fourier(&c.blocks, 0, DegeneracyPolicy::Error).unwrap();
    let m = solve_monodromy(&c.blocks, 10, DegeneracyPolicy::Error).unwrap();
    assert!((m.rho_k(0) - f.rho_k(0)).norm() < 1e-10);
}

#[test]
fn time_propagation_conserves_trace_and_matches() {
    let c = case(0.0, 1.0, 0.1, 0.3, 4);
    let init = c.decomp.to_floquet_frame(&mixed());
    let opts = PropagationOptions {
        final_time_gammas: 40.0,
        ..Default::default()
    };
    let p = solve_time_propagation(&c.blocks, &init, 0.1, opts).unwrap();
    let f = solve_fourier(&c.blocks, 4, DegeneracyPolicy::Error).unwrap();
    assert!(p.rho_time.iter().all(|r| (r.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-9));
    let diff = (p.rho_k(0) - f.rho_k(0)).norm();
    assert!(diff < 1e-5, "{diff}");
}

#[test]
fn driven_time_propagation_approaches_fourier() {
    let c = case(0.5, 2.5, 0.1, 0.2, 8);
    let init = c.decomp.to_floquet_frame(&mixed());
    let opts = PropagationOptions {
        final_time_gammas: 30.0,
        ..Default::default()
    };
    let p = solve_time_propagation(&c.blocks, &init, 0.1, opts).unwrap();
    let f = solve_fourier(&c.blocks, 8, DegeneracyPolicy::Error).unwrap();
    let diff = (p.rho_k(0) - f.rho_k(0)).norm();
    assert!(diff < 1e-4, "{diff}");
    assert!(p.final_period_drift.norm() < 1e-4);
}

#[test]
fn propagation_rejects_bad_input() {
    let c = case(0.0, 1.0, 0.1, 0.3, 4);
    let bad = Op4::identity();
    assert!(matches!(
        solve_time_propagation(&c.blocks, &bad, 0.1, PropagationOptions::default()),
        Err(SolverError::InvalidInitialState(_))
    ));
    assert!(solve_time_propagation(&c.blocks, &mixed(), 0.0, PropagationOptions::default()).is_err());
    assert!(solve_monodromy(&c.blocks, 50, DegeneracyPolicy::Error).is_err());
}

#[test]
fn sample_transforms_round_trip() {
    let c = case(0.5, 1.0, 0.1, 0.2, 8);
    let f = solve_fourier(&c.blocks, 8, DegeneracyPolicy::Error).unwrap();
    let harmonics: Vec<Op4> = f.harmonics().map(|(_, m)| *m).collect();
    let samples = samples_from_harmonics(&harmonics, f.frequency, 64);
    let back = harmonics_from_samples(&samples, 8);
    for (a, b) in harmonics.iter().zip(&back) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(Method::from_name(m.name()), Some(m));
    }
    assert_eq!(Method::from_name("euler"), None);
}
