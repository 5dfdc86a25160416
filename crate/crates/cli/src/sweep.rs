//! Running sweeps point by point.

use floquet_junction::bath::{ReservoirParams, Side};
use floquet_junction::liouvillian::DissipatorSpec;
use floquet_junction::model::JunctionParams;
use floquet_junction::observables::{analytic_current_g0, CurrentReport};
use floquet_junction::{Error, JunctionSetup, KmaxPolicy, Method, SolveOptions, Solved};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Axis, PointParams, SolverChoice, SweepConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// The steady state is not unique; the attractor of the mixed state was used.
    Degenerate,
    /// Positivity violated beyond tolerance.
    Unphysical,
    Error(String),
}

impl Status {
    pub fn label(&self) -> String {
        match self {
            Status::Ok => "ok".into(),
            Status::Degenerate => "degenerate".into(),
            Status::Unphysical => "unphysical".into(),
            Status::Error(m) => format!("error: {m}"),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Status::Error(_))
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub series: usize,
    pub label: String,
    /// Swept value as given in the configuration.
    pub x: f64,
    pub params: PointParams,
    pub currents: Option<CurrentReport>,
    pub k_max_used: Option<usize>,
    pub solver: String,
    pub status: Status,
}

impl Row {
    pub fn gamma(&self) -> f64 {
        self.params.gamma()
    }

    /// Current over `γ`, NaN for failed points.
    pub fn scaled(&self, f: impl Fn(&CurrentReport) -> f64) -> f64 {
        self.currents.as_ref().map_or(f64::NAN, |c| f(c) / self.gamma())
    }
}

/// Builds the junction for one set of parameters.
pub fn junction_setup(p: &PointParams, grid: usize) -> JunctionSetup {
    let params = JunctionParams::new(p.omega(), p.u).with_bias_drives(
        Complex64::new(p.g_left, 0.0),
        Complex64::new(p.g_right, 0.0),
        p.delta_mu,
    );
    JunctionSetup {
        params,
        leads: [
            ReservoirParams::new(Side::Left, p.gamma_left, p.delta_mu / 2.0, p.temperature_left),
            ReservoirParams::new(Side::Right, p.gamma_right, -p.delta_mu / 2.0, p.temperature_right),
        ],
        loss: DissipatorSpec {
            rate: p.loss_rate,
            channels: p.channels.clone(),
        },
        lamb: None,
        grid,
    }
}

/// A point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub series: usize,
    pub x: f64,
    pub params: PointParams,
}

/// All points of a sweep, series-major.
pub fn sweep_points(cfg: &SweepConfig) -> Vec<SweepPoint> {
    let values = cfg.axis_values();
    let mut out = Vec::with_capacity(values.len() * cfg.series.len());
    for (i, s) in cfg.series.iter().enumerate() {
        for &v in &values {
            let mut p = s.params.with_axis(cfg.axis, v);
            if cfg.bias_in_units_of_u {
                p.delta_mu *= p.u.abs();
            }
            out.push(SweepPoint { series: i, x: v, params: p });
        }
    }
    out
}

fn row_from(cfg: &SweepConfig, pt: &SweepPoint, method: Method, result: Result<Solved, Error>) -> Row {
    let mut row = Row {
        series: pt.series,
        label: cfg.series[pt.series].label.clone(),
        x: pt.x,
        params: pt.params.clone(),
        currents: None,
        k_max_used: None,
        solver: method.name().to_string(),
        status: Status::Ok,
    };
    match result {
        Ok(s) => {
            row.currents = Some(s.currents);
            row.k_max_used = Some(s.k_max);
            if s.solution.degenerate {
                row.status = Status::Degenerate;
            } else if !s.solution.is_physical() {
                row.status = Status::Unphysical;
            }
        }
        Err(e) => row.status = Status::Error(e.to_string()),
    }
    row
}

/// Solves one sweep point; cross-checks yield one row per method.
pub fn solve_point(cfg: &SweepConfig, pt: &SweepPoint) -> Vec<Row> {
    let p = &pt.params;
    let opts = SolveOptions::default();
    let prepared = match junction_setup(p, cfg.grid).prepare() {
        Ok(j) => j,
        Err(e) => {
            let methods: Vec<Method> = match cfg.solver {
                SolverChoice::Single(m) => vec![m],
                SolverChoice::CrossCheck => Method::ALL.to_vec(),
            };
            return methods
                .into_iter()
                .map(|m| row_from(cfg, pt, m, Err(e.clone())))
                .collect();
        }
    };
    match cfg.solver {
        SolverChoice::Single(m) => vec![row_from(cfg, pt, m, prepared.solve_with(m, &cfg.kmax, &opts))],
        SolverChoice::CrossCheck => {
            let first = prepared.solve_with(Method::FourierSpace, &cfg.kmax, &opts);
            let k = first.as_ref().map(|s| s.k_max).ok();
            let mut rows = vec![row_from(cfg, pt, Method::FourierSpace, first)];
            for m in [Method::TimePropagation, Method::Monodromy] {
                let r = match k {
                    Some(k) => prepared.solve_with(m, &KmaxPolicy::Fixed(k), &opts),
                    None => prepared.solve_with(m, &cfg.kmax, &opts),
                };
                rows.push(row_from(cfg, pt, m, r));
            }
            rows
        }
    }
}

fn pool(workers: Option<usize>) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}

/// Solves every point on a worker pool; rows come back in sweep order.
pub fn run_sweep(cfg: &SweepConfig, workers: Option<usize>) -> Vec<Row> {
    let points = sweep_points(cfg);
    pool(workers).install(|| {
        points
            .par_iter()
            .map(|pt| solve_point(cfg, pt))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    })
}

/// Numeric against analytic undriven current at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticComparison {
    pub params: PointParams,
    pub numeric_over_gamma: f64,
    pub analytic_over_gamma: f64,
    /// Zero-temperature point exactly on a Fermi edge; excluded from the maximum.
    pub on_edge: bool,
    pub error: Option<String>,
}

impl AnalyticComparison {
    pub fn deviation(&self) -> f64 {
        (self.numeric_over_gamma - self.analytic_over_gamma).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    pub points: Vec<AnalyticComparison>,
}

impl AnalyticReport {
    /// Largest deviation over non-edge points that solved.
    pub fn max_deviation(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| !p.on_edge && p.error.is_none())
            .map(AnalyticComparison::deviation)
            .fold(0.0, f64::max)
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}

fn on_fermi_edge(p: &PointParams) -> bool {
    let w = p.omega();
    let edges = |mu: f64, t: f64| t == 0.0 && (w - mu == 0.0 || p.u + w - mu == 0.0);
    edges(p.delta_mu / 2.0, p.temperature_left) || edges(-p.delta_mu / 2.0, p.temperature_right)
}

/// Compares every point of an undriven sweep against the rate-equation current.
pub fn compare_analytic(cfg: &SweepConfig, workers: Option<usize>) -> Result<AnalyticReport, String> {
    for s in &cfg.series {
        if s.params.g_left != 0.0 || s.params.g_right != 0.0 || matches!(cfg.axis, Axis::G) {
            return Err(format!("series '{}': the analytic comparison needs g = 0", s.label));
        }
        if s.params.loss_rate != 0.0 || matches!(cfg.axis, Axis::GammaI) {
            return Err(format!("series '{}': the analytic comparison has no loss channel", s.label));
        }
        if s.params.gamma_left != s.params.gamma_right {
            return Err(format!("series '{}': the analytic comparison needs equal couplings", s.label));
        }
    }
    let points = sweep_points(cfg);
    let out = pool(workers).install(|| {
        points
            .par_iter()
            .map(|pt| {
                let p = &pt.params;
                let setup = junction_setup(p, cfg.grid);
                let gamma = p.gamma();
                let analytic = analytic_current_g0(&setup.params, &setup.leads);
                let numeric = setup
                    .prepare()
                    .and_then(|j| j.solve_with(Method::FourierSpace, &cfg.kmax, &SolveOptions::default()));
                let (num, err) = match (numeric, &analytic) {
                    (Ok(s), Ok(_)) => (s.currents.i_right / gamma, None),
                    (Err(e), _) => (f64::NAN, Some(e.to_string())),
                    (_, Err(e)) => (f64::NAN, Some(e.to_string())),
                };
                AnalyticComparison {
                    params: p.clone(),
                    numeric_over_gamma: num,
                    analytic_over_gamma: analytic.map_or(f64::NAN, |a| a / gamma),
                    on_edge: on_fermi_edge(p),
                    error: err,
                }
            })
            .collect()
    });
    Ok(AnalyticReport { points: out })
}
