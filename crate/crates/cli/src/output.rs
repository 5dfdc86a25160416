//! CSV and plot-data writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::sweep::Row;

pub const COLUMNS: [&str; 13] = [
    "delta_mu",
    "temperature",
    "g",
    "U",
    "gamma_I",
    "I_R_over_gamma",
    "I_L_over_gamma",
    "I_mol_over_gamma",
    "I_loss_over_gamma",
    "conservation_residual",
    "k_max_used",
    "solver",
    "status",
];

/// Extra column for sweeps plotted against `Δμ/|U|`.
pub const RESCALED_COLUMN: &str = "delta_mu_over_abs_U";

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

/// Writes the result table. Currents and the conservation residual are in
/// units of the lead coupling; failed points have empty numeric fields.
pub fn write_csv<W: Write>(rows: &[Row], out: W, rescaled_bias: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if rescaled_bias {
        header.push(RESCALED_COLUMN);
    }
    w.write_record(&header)?;
    for r in rows {
        let p = &r.params;
        let mut rec = vec![
            num(p.delta_mu),
            num(p.temperature_left),
            num(p.g_left),
            num(p.u),
            num(p.loss_rate),
            num(r.scaled(|c| c.i_right)),
            num(r.scaled(|c| c.i_left)),
            num(r.scaled(|c| c.i_mol)),
            num(r.scaled(|c| c.i_loss)),
            num(r.scaled(|c| c.conservation_residual)),
            r.k_max_used.map(|k| k.to_string()).unwrap_or_default(),
            r.solver.clone(),
            r.status.label(),
        ];
        if rescaled_bias {
            rec.push(num(p.delta_mu / p.u.abs()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[Row], path: &Path, rescaled_bias: bool) -> io::Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_csv(rows, file, rescaled_bias).map_err(io::Error::other)
}

/// Two-column `x  I_R/γ` blocks, one per series and solver, separated by
/// blank lines.
pub fn write_plot_data<W: Write>(rows: &[Row], mut out: W) -> io::Result<()> {
    let mut keys: Vec<(usize, &str)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.series, r.solver.as_str())) {
            keys.push((r.series, r.solver.as_str()));
        }
    }
    for (i, (series, solver)) in keys.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
            writeln!(out)?;
        }
        let mut block = rows.iter().filter(|r| r.series == *series && r.solver == *solver).peekable();
        if let Some(first) = block.peek() {
            writeln!(out, "# {} ({})", first.label, solver)?;
        }
        for r in block {
            let y = r.scaled(|c| c.i_right);
            if y.is_finite() {
                writeln!(out, "{} {}", r.x, y)?;
            }
        }
    }
    out.flush()
}

pub fn write_plot_data_file(rows: &[Row], path: &Path) -> io::Result<()> {
    write_plot_data(rows, BufWriter::new(File::create(path)?))
}
