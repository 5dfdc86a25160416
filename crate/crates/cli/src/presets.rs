//! Built-in sweeps for the standard current-bias figures.

use floquet_junction::model::Spin;
use floquet_junction::{KmaxPolicy, Method};

use crate::config::{Axis, OutputSpec, PointParams, Range, Series, SolverChoice, SweepConfig};

pub const NAMES: [&str; 4] = ["fig2a", "fig2b", "fig3", "fig4"];

fn base(u: f64, g: f64, gamma: f64, temperature: f64) -> PointParams {
    PointParams {
        omega: None,
        u,
        g_left: g,
        g_right: g,
        delta_mu: 0.0,
        gamma_left: gamma,
        gamma_right: gamma,
        temperature_left: temperature,
        temperature_right: temperature,
        loss_rate: 0.0,
        channels: vec![Spin::Down, Spin::Up],
    }
}

fn bias_sweep(series: Vec<Series>) -> SweepConfig {
    SweepConfig {
        series,
        axis: Axis::DeltaMu,
        range: Range {
            start: 0.1,
            stop: 3.0,
            points: 150,
        },
        bias_in_units_of_u: false,
        solver: SolverChoice::Single(Method::FourierSpace),
        kmax: KmaxPolicy::default(),
        grid: floquet_junction::floquet::DEFAULT_GRID,
        output: OutputSpec::default(),
    }
}

/// Current against bias at `T = 0` for several drive amplitudes.
pub fn fig2a() -> SweepConfig {
    bias_sweep(
        [0.0, 0.1, 0.3, 0.5]
            .iter()
            .map(|&g| Series {
                label: format!("g={g}"),
                params: base(-2.0, g, 1e-2, 0.0),
            })
            .collect(),
    )
}

/// Current against bias at several temperatures, driven and undriven.
pub fn fig2b() -> SweepConfig {
    let mut series = Vec::new();
    for t in [0.0, 0.25, 0.5, 2.0] {
        for g in [0.5, 0.0] {
            series.push(Series {
                label: format!("T={t} g={g}"),
                params: base(-2.0, g, 1e-2, t),
            });
        }
    }
    bias_sweep(series)
}

/// Current against `Δμ/|U|` for several interaction strengths.
pub fn fig3() -> SweepConfig {
    let mut cfg = bias_sweep(
        [-0.75, -1.0, -1.5, -2.0, -3.0, -5.0]
            .iter()
            .map(|&u| Series {
                label: format!("U={u}"),
                params: base(u, 0.5, 1e-3, 0.0),
            })
            .collect(),
    );
    cfg.range = Range {
        start: 0.1,
        stop: 1.5,
        points: 141,
    };
    cfg.bias_in_units_of_u = true;
    cfg.output.rescaled_bias = true;
    cfg
}

/// Current against bias with particle loss on one or both spin channels.
pub fn fig4() -> SweepConfig {
    let gamma = 1e-2;
    let mut series = Vec::new();
    for (rate, channels, name) in [
        (0.0, vec![Spin::Down, Spin::Up], "none"),
        (0.5 * gamma, vec![Spin::Down, Spin::Up], "both"),
        (gamma, vec![Spin::Down, Spin::Up], "both"),
        (0.5 * gamma, vec![Spin::Down], "down"),
        (gamma, vec![Spin::Down], "down"),
    ] {
        let mut p = base(-2.0, 0.5, gamma, 0.0);
        p.loss_rate = rate;
        p.channels = channels;
        series.push(Series {
            label: format!("gamma_I={rate} channels={name}"),
            params: p,
        });
    }
    bias_sweep(series)
}

pub fn by_name(name: &str) -> Option<SweepConfig> {
    match name {
        "fig2a" => Some(fig2a()),
        "fig2b" => Some(fig2b()),
        "fig3" => Some(fig3()),
        "fig4" => Some(fig4()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::sweep_points;

    #[test]
    fn presets_are_valid() {
        for name in NAMES {
            by_name(name).unwrap().validate().unwrap();
        }
        assert!(by_name("fig5").is_none());
    }

    #[test]
    fn fig2a_has_four_curves_of_150() {
        let c = fig2a();
        assert_eq!(sweep_points(&c).len(), 4 * 150);
    }

    #[test]
    fn fig3_biases_scale_with_interaction() {
        let c = fig3();
        let pts = sweep_points(&c);
        let last = pts.last().unwrap();
        assert_eq!(last.x, 1.5);
        assert_eq!(last.params.delta_mu, 7.5);
        assert_eq!(last.params.omega(), 2.5);
    }
}
