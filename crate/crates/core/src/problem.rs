//! One junction configuration from parameters to currents.

use num_complex::Complex64;

use crate::bath::{LambShift, ReservoirParams, Side};
use crate::floquet::{decompose, FloquetDecomposition, FourierComponents, DEFAULT_GRID};
use crate::liouvillian::{add_coherent_term, assemble_loss_blocks, assemble_reservoir_blocks, DissipatorSpec, LiouvillianBlocks};
use crate::model::{FermionOps, JunctionParams, Op4, Spin};
use crate::observables::{current_report, CurrentReport, FrameOperators};
use crate::solvers::{
    adapt_kmax, solve_fourier, solve_monodromy, solve_time_propagation, DegeneracyPolicy, KmaxPolicy, Level, Method,
    PropagationOptions, SteadyStateSolution, DEFAULT_MONODROMY_STEPS,
};
use crate::Error;

/// Physical description of a junction.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionSetup {
    pub params: JunctionParams,
    /// Left and right leads, in that order.
    pub leads: [ReservoirParams; 2],
    pub loss: DissipatorSpec,
    pub lamb: Option<LambShift>,
    /// Time steps per period for the Floquet decomposition.
    pub grid: usize,
}

impl JunctionSetup {
    /// Particle-hole symmetric junction with symmetric biases `±Δμ/2`, equal
    /// lead couplings `gamma` and equal drive amplitudes `g` on both pair fields.
    pub fn symmetric(interaction: f64, g: f64, delta_mu: f64, gamma: f64, temperature: f64) -> Self {
        let gc = Complex64::new(g, 0.0);
        Self {
            params: JunctionParams::particle_hole_symmetric(interaction).with_bias_drives(gc, gc, delta_mu),
            leads: ReservoirParams::symmetric_pair(gamma, delta_mu, temperature),
            loss: DissipatorSpec::none(),
            lamb: None,
            grid: DEFAULT_GRID,
        }
    }

    pub fn with_loss(mut self, loss: DissipatorSpec) -> Self {
        self.loss = loss;
        self
    }

    /// Largest dissipative rate; sets time scales and tolerances.
    pub fn gamma_scale(&self) -> f64 {
        let mut g = self.leads[0].gamma.max(self.leads[1].gamma);
        if self.loss.is_active() {
            g = g.max(self.loss.rate);
        }
        g
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.params.validate()?;
        for (lead, side) in self.leads.iter().zip(Side::BOTH) {
            lead.validate()?;
            if lead.side != side {
                return Err(Error::InvalidInput(format!("lead {} is labelled {}", side.label(), lead.side.label())));
            }
        }
        self.loss.validate()?;
        if self.grid == 0 {
            return Err(Error::InvalidInput("decomposition grid must be positive".into()));
        }
        if !(self.gamma_scale() > 0.0) {
            return Err(Error::InvalidInput("at least one dissipative rate must be positive".into()));
        }
        Ok(())
    }

    /// Validates and diagonalizes the Hamiltonian.
    pub fn prepare(&self) -> Result<PreparedJunction, Error> {
        self.validate()?;
        let ops = FermionOps::new();
        let decomp = decompose(&self.params, &ops, self.grid)?;
        Ok(PreparedJunction {
            setup: self.clone(),
            ops,
            decomp,
        })
    }
}

/// Generator parts at one harmonic cutoff.
#[derive(Debug, Clone)]
pub struct Generator {
    pub k_max: usize,
    pub left: LiouvillianBlocks,
    pub right: LiouvillianBlocks,
    pub loss: Option<LiouvillianBlocks>,
    pub total: LiouvillianBlocks,
    /// Weight `Σ_s (‖c_s‖² − Σ_{|k|≤k_max} ‖c_s^k‖²)` lost to the cutoff.
    pub truncated_power: f64,
}

/// Largest truncated fraction of the lowering-operator weight at which a
/// cutoff counts as resolved.
pub const RESOLVED_POWER_FRACTION: f64 = 1e-6;

impl Generator {
    pub fn level(&self) -> Level {
        // Σ_s ‖c_s‖² = 4 in the four-state space
        let fraction = self.truncated_power / 4.0;
        if self.total.is_time_independent() && fraction < 1e-12 {
            Level::Exact
        } else if fraction < RESOLVED_POWER_FRACTION {
            Level::Resolved
        } else {
            Level::Unresolved
        }
    }
}

/// Solver settings other than the method and the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub degeneracy: DegeneracyPolicy,
    pub propagation: PropagationOptions,
    /// Minimum steps per period for the one-period propagator.
    pub monodromy_steps: usize,
    /// Lab-frame state at `t = 0` for time propagation.
    pub initial_state: Op4,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            degeneracy: DegeneracyPolicy::attractor_of_mixed(),
            propagation: PropagationOptions::default(),
            monodromy_steps: DEFAULT_MONODROMY_STEPS,
            initial_state: Op4::identity() * Complex64::new(0.25, 0.0),
        }
    }
}

/// A solved steady state with its currents.
#[derive(Debug, Clone)]
pub struct Solved {
    pub solution: SteadyStateSolution,
    pub currents: CurrentReport,
    pub k_max: usize,
    /// `(k_max, I_R)` at every cutoff tried.
    pub history: Vec<(usize, f64)>,
    /// See [`Generator::level`].
    pub level: Level,
}

/// A junction whose Floquet decomposition has been computed.
#[derive(Debug, Clone)]
pub struct PreparedJunction {
    setup: JunctionSetup,
    ops: FermionOps,
    decomp: FloquetDecomposition,
}

impl PreparedJunction {
    pub fn setup(&self) -> &JunctionSetup {
        &self.setup
    }

    pub fn decomposition(&self) -> &FloquetDecomposition {
        &self.decomp
    }

    pub fn generator(&self, k_max: usize) -> Result<Generator, Error> {
        let k_max = if self.decomp.is_static() { 0 } else { k_max };
        let fc = FourierComponents::new(&self.decomp, &self.ops, k_max)?;
        let left = assemble_reservoir_blocks(&fc, &self.setup.leads[0], self.setup.lamb)?;
        let right = assemble_reservoir_blocks(&fc, &self.setup.leads[1], self.setup.lamb)?;
        let mut total = left.combined(&right)?;
        let loss = if self.setup.loss.is_active() {
            let l = assemble_loss_blocks(&self.setup.loss, &fc)?;
            total = total.combined(&l)?;
            Some(l)
        } else {
            None
        };
        add_coherent_term(&mut total, self.decomp.quasienergies());
        let truncated_power = Spin::BOTH
            .iter()
            .map(|&s| self.ops.lowering(s).norm_squared() - fc.lowering(s).power().sum())
            .sum::<f64>()
            .max(0.0);
        Ok(Generator {
            k_max,
            left,
            right,
            loss,
            total,
            truncated_power,
        })
    }

    pub fn steady_state(&self, gen: &Generator, method: Method, opts: &SolveOptions) -> Result<SteadyStateSolution, Error> {
        let degeneracy = match opts.degeneracy {
            DegeneracyPolicy::Attractor(init) => DegeneracyPolicy::Attractor(self.decomp.to_floquet_frame(&init)),
            DegeneracyPolicy::Error => DegeneracyPolicy::Error,
        };
        let sol = match method {
            Method::FourierSpace => solve_fourier(&gen.total, gen.k_max, degeneracy)?,
            Method::Monodromy => {
                let steps = opts.monodromy_steps.max(16 * gen.total.max_harmonic());
                solve_monodromy(&gen.total, steps, degeneracy)?
            }
            Method::TimePropagation => {
                let init = self.decomp.to_floquet_frame(&opts.initial_state);
                solve_time_propagation(&gen.total, &init, self.setup.gamma_scale(), opts.propagation)?
            }
        };
        Ok(sol)
    }

    pub fn currents(&self, gen: &Generator, sol: &SteadyStateSolution) -> Result<CurrentReport, Error> {
        let frame = FrameOperators::new(&self.decomp, &self.ops, sol.rho_k_max() + gen.total.q_max())?;
        Ok(current_report(sol, &self.setup.params, &gen.left, &gen.right, gen.loss.as_ref(), &frame)?)
    }

    /// Steady state and currents at a fixed cutoff.
    pub fn solve(&self, method: Method, k_max: usize, opts: &SolveOptions) -> Result<Solved, Error> {
        let gen = self.generator(k_max)?;
        let solution = self.steady_state(&gen, method, opts)?;
        let currents = self.currents(&gen, &solution)?;
        Ok(Solved {
            history: vec![(gen.k_max, currents.i_right)],
            k_max: gen.k_max,
            level: gen.level(),
            solution,
            currents,
        })
    }

    /// Steady state and currents with the cutoff chosen by `policy`; adaptive
    /// tolerances are in units of the largest lead coupling.
    pub fn solve_with(&self, method: Method, policy: &KmaxPolicy, opts: &SolveOptions) -> Result<Solved, Error> {
        match policy {
            KmaxPolicy::Fixed(k) => self.solve(method, *k, opts),
            KmaxPolicy::Adaptive { tol, schedule } => {
                let gamma = self.setup.leads[0].gamma.max(self.setup.leads[1].gamma);
                let scale = if gamma > 0.0 { gamma } else { self.setup.gamma_scale() };
                let adapted = adapt_kmax(schedule, tol * scale, |k| -> Result<_, Error> {
                    let s = self.solve(method, k, opts)?;
                    let (i, level) = (s.currents.i_right, s.level);
                    Ok((s, i, level))
                })?;
                let mut solved = adapted.value;
                solved.history = adapted.history;
                Ok(solved)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::DissipatorSpec;
    use crate::observables::analytic_current_g0;

    #[test]
    fn undriven_current_matches_rate_equations() {
        for (dmu, t) in [(1.0, 0.3), (2.5, 0.0), (1.9, 0.1), (0.5, 1.0), (-1.7, 0.2)] {
            let s = JunctionSetup::symmetric(-2.0, 0.0, dmu, 0.1, t);
            let p = s.prepare().unwrap();
            let r = p.solve(Method::FourierSpace, 8, &SolveOptions::default()).unwrap();
            let want = analytic_current_g0(&s.params, &s.leads).unwrap();
            assert!((r.currents.i_right - want).abs() < 1e-9, "dmu={dmu} t={t}: {} vs {want}", r.currents.i_right);
            assert!((r.currents.i_left + want).abs() < 1e-9);
            assert!(r.currents.conservation_residual < 1e-10);
            assert_eq!(r.currents.i_mol, 0.0);
        }
    }

    #[test]
    fn blocked_undriven_current_is_zero() {
        let s = JunctionSetup::symmetric(-2.0, 0.0, 1.0, 0.1, 0.0);
        let r = s.prepare().unwrap().solve(Method::FourierSpace, 4, &SolveOptions::default()).unwrap();
        assert!(r.solution.degenerate);
        assert!(r.currents.i_right.abs() < 1e-12);
    }

    #[test]
    fn driven_currents_are_conserved() {
        for method in Method::ALL {
            let s = JunctionSetup::symmetric(-2.0, 0.5, 1.0, 0.1, 0.1).with_loss(DissipatorSpec::both_spins(0.02));
            let r = s.prepare().unwrap().solve(method, 16, &SolveOptions::default()).unwrap();
            let c = r.currents;
            assert!(c.conservation_residual < 1e-6 * 0.1, "{method}: {c:?}");
            assert!(c.i_loss > 0.0);
            assert!(c.i_mol.abs() > 1e-4);
        }
    }

    #[test]
    fn adaptive_cutoff_converges() {
        let s = JunctionSetup::symmetric(-2.0, 0.5, 2.5, 0.1, 0.0);
        let r = s
            .prepare()
            .unwrap()
            .solve_with(Method::FourierSpace, &KmaxPolicy::adaptive(1e-2), &SolveOptions::default())
            .unwrap();
        assert!(r.k_max <= 8, "{:?}", r.history);
        assert!((r.currents.i_right / 0.1 - 1.8447).abs() < 1e-2, "{}", r.currents.i_right);
    }

    #[test]
    fn static_problems_use_one_level() {
        let s = JunctionSetup::symmetric(-2.0, 0.5, 0.0, 0.1, 0.2);
        let r = s
            .prepare()
            .unwrap()
            .solve_with(Method::FourierSpace, &KmaxPolicy::adaptive(1e-2), &SolveOptions::default())
            .unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.k_max, 0);
        assert!(r.currents.i_right.abs() < 1e-12);
    }

    #[test]
    fn folded_transitions_need_a_larger_cutoff() {
        // the bare transition at energy 1 is the fifth harmonic of ω_d = 0.2
        let s = JunctionSetup::symmetric(-2.0, 0.0, 0.2, 1e-2, 0.5);
        let p = s.prepare().unwrap();
        assert!(p.generator(4).unwrap().truncated_power > 1.0);
        assert!(p.generator(8).unwrap().truncated_power < 1e-12);
        let r = p
            .solve_with(Method::FourierSpace, &KmaxPolicy::adaptive(1e-2), &SolveOptions::default())
            .unwrap();
        let want = analytic_current_g0(&s.params, &s.leads).unwrap();
        assert!((r.currents.i_right - want).abs() < 1e-12);
        assert!(r.k_max >= 8 && r.k_max <= 16);
    }

    #[test]
    fn rejects_bad_setups() {
        let mut s = JunctionSetup::symmetric(-2.0, 0.5, 1.0, 0.1, 0.1);
        s.leads.swap(0, 1);
        assert!(s.prepare().is_err());
        let s = JunctionSetup::symmetric(-2.0, 0.5, 1.0, 0.0, 0.1);
        assert!(s.prepare().is_err());
    }
}
