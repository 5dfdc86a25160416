use super::SolverError;

/// Harmonic cutoffs tried by adaptive solves, in order.
pub const DEFAULT_KMAX_SCHEDULE: [usize; 6] = [4, 8, 16, 32, 64, 96];

/// How the Fourier cutoff is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum KmaxPolicy {
    Fixed(usize),
    /// Increase `k_max` along `schedule` until the monitored current changes
    /// by less than `tol` (in units of `γ`) between consecutive levels.
    Adaptive { tol: f64, schedule: Vec<usize> },
}

impl KmaxPolicy {
    pub fn adaptive(tol: f64) -> Self {
        KmaxPolicy::Adaptive {
            tol,
            schedule: DEFAULT_KMAX_SCHEDULE.to_vec(),
        }
    }
}

impl Default for KmaxPolicy {
    fn default() -> Self {
        Self::adaptive(1e-2)
    }
}

/// Result of an adaptive solve.
#[derive(Debug, Clone)]
pub struct Adapted<T> {
    pub value: T,
    pub k_max: usize,
    /// `(k_max, observable)` for every level evaluated.
    pub history: Vec<(usize, f64)>,
}

/// How completely a cutoff represents the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Nothing is truncated and the generator has no harmonics; larger
    /// cutoffs give the same answer.
    Exact,
    /// The truncation drops negligible weight.
    Resolved,
    /// The truncation drops significant weight, so agreement with the
    /// previous level may be accidental.
    Unresolved,
}

/// Runs `evaluate` along `schedule` until two consecutive observables differ
/// by less than `tol_abs` and the finer level is resolved, returning the
/// finer level. An exact level is accepted at once.
pub fn adapt_kmax<T, E, F>(schedule: &[usize], tol_abs: f64, mut evaluate: F) -> Result<Adapted<T>, E>
where
    F: FnMut(usize) -> Result<(T, f64, Level), E>,
    E: From<SolverError>,
{
    if schedule.is_empty() {
        return Err(SolverError::InvalidInput("empty k_max schedule".into()).into());
    }
    if !(tol_abs > 0.0) {
        return Err(SolverError::InvalidInput(format!("tolerance must be positive, got {tol_abs}")).into());
    }
    let mut history = Vec::new();
    let mut last_delta = f64::INFINITY;
    for &k in schedule {
        let (value, obs, level) = evaluate(k)?;
        if !obs.is_finite() {
            return Err(SolverError::NonFinite.into());
        }
        let prev = history.last().map(|&(_, o)| o);
        history.push((k, obs));
        if level == Level::Exact {
            return Ok(Adapted { value, k_max: k, history });
        }
        if let Some(p) = prev {
            last_delta = (obs - p).abs();
            if last_delta < tol_abs && level == Level::Resolved {
                return Ok(Adapted { value, k_max: k, history });
            }
        }
    }
    Err(SolverError::NoConvergence {
        k_max: *schedule.last().unwrap(),
        last_delta,
    }
    .into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stops_at_first_small_change() {
        let values = [1.0, 1.5, 1.52, 1.521];
        let r: Adapted<usize> = adapt_kmax::<_, SolverError, _>(&[4, 8, 16, 32], 0.05, |k| {
            let i = [4, 8, 16, 32].iter().position(|&x| x == k).unwrap();
            Ok((k, values[i], Level::Resolved))
        })
        .unwrap();
        assert_eq!(r.k_max, 16);
        assert_eq!(r.value, 16);
        assert_eq!(r.history.len(), 3);
    }

    #[test]
    fn unresolved_levels_are_never_accepted() {
        let levels = [Level::Unresolved, Level::Unresolved, Level::Resolved, Level::Resolved];
        let values = [0.0, 0.0, 0.7, 0.7];
        let r = adapt_kmax::<_, SolverError, _>(&[4, 8, 16, 32], 1e-3, |k| {
            let i = [4, 8, 16, 32].iter().position(|&x| x == k).unwrap();
            Ok((k, values[i], levels[i]))
        })
        .unwrap();
        assert_eq!(r.k_max, 32);
    }

    #[test]
    fn static_problem_converges_immediately() {
        let r = adapt_kmax::<_, SolverError, _>(&[4, 8], 1e-9, |k| Ok((k, 0.3, Level::Exact))).unwrap();
        assert_eq!(r.k_max, 4);
    }

    #[test]
    fn reports_last_delta_on_failure() {
        let err = adapt_kmax::<(), SolverError, _>(&[4, 8, 16], 1e-3, |k| Ok(((), k as f64, Level::Resolved))).unwrap_err();
        assert_eq!(
            err,
            SolverError::NoConvergence {
                k_max: 16,
                last_delta: 8.0
            }
        );
        assert!(adapt_kmax::<(), SolverError, _>(&[], 1e-3, |_| Ok(((), 0.0, Level::Resolved))).is_err());
    }
}
