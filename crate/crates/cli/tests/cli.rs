use std::path::Path;
use std::process::Command;

const UNDRIVEN: &str = r#"
[model]
U = -2.0
g = 0.0

[reservoirs]
gamma = 0.01
temperature = 0.5

[sweep]
axis = "delta_mu"
start = 0.2
stop = 4.0
points = 12
"#;

const DRIVEN: &str = r#"
[model]
U = -2.0

[reservoirs]
gamma = 0.01
temperature = 0.0

[sweep]
axis = "delta_mu"
start = 1.6
stop = 2.9
points = 6

[[series]]
g = 0.5

[[series]]
g = 0.3
gamma_I = 0.005
"#;

fn fjunction() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fjunction"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn sweep_writes_csv_with_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "driven.toml", DRIVEN);
    let out = dir.path().join("out.csv");
    let plot = dir.path().join("out.dat");
    let status = fjunction()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--plot-data")
        .arg(&plot)
        .args(["--workers", "2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "delta_mu,temperature,g,U,gamma_I,I_R_over_gamma,I_L_over_gamma,I_mol_over_gamma,I_loss_over_gamma,conservation_residual,k_max_used,solver,status"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.ends_with(",fourier-space,ok")));
    // sweep order: first series, then second
    assert!(rows[0].starts_with("1.6,0,0.5,-2,0,"));
    assert!(rows[6].starts_with("1.6,0,0.3,-2,0.005,"));
    let plot_text = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(plot_text.matches("# ").count(), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "driven.toml", DRIVEN);
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let status = fjunction()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--workers", workers])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert_eq!(a, b);
}

#[test]
fn empty_sweep_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", &DRIVEN.replace("points = 6", "points = 0"));
    let out = fjunction().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 13"), "{err}");
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "driven.toml", DRIVEN);
    let code = |args: &[&str]| fjunction().args(args).output().unwrap().status.code();
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&["sweep", "--config", c, "--solver", "euler"]), Some(2));
    assert_eq!(code(&["sweep", "--config", c, "--kmax", "many"]), Some(2));
    assert_eq!(code(&["sweep", "--config", "/nonexistent/config.toml"]), Some(2));
    assert_eq!(code(&["preset", "fig9"]), Some(2));
    assert_eq!(code(&["sweep"]), Some(2));
    let driven = write(dir.path(), "g.toml", DRIVEN);
    assert_eq!(code(&["compare-analytic", "--config", driven.to_str().unwrap()]), Some(2));
}

#[test]
fn unwritable_output_is_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "driven.toml", &DRIVEN.replace("points = 6", "points = 2"));
    let status = fjunction()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--out", "/nonexistent/dir/out.csv"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn compare_analytic_passes_for_undriven_junction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g0.toml", UNDRIVEN);
    let out = fjunction().args(["compare-analytic", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max |I_R - I_R(analytic)| / gamma"));
}

#[test]
fn compare_analytic_excludes_fermi_edges() {
    let dir = tempfile::tempdir().unwrap();
    let body = UNDRIVEN
        .replace("temperature = 0.5", "temperature = 0.0")
        .replace("start = 0.2", "start = 1.0")
        .replace("stop = 4.0", "stop = 3.0")
        .replace("points = 12", "points = 5");
    let cfg = write(dir.path(), "edge.toml", &body);
    let out = fjunction().args(["compare-analytic", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Fermi edge"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("1 edge points excluded"));
}

#[test]
fn cross_check_emits_one_row_per_solver() {
    let dir = tempfile::tempdir().unwrap();
    let body = DRIVEN.replace("points = 6", "points = 2");
    let cfg = write(dir.path(), "x.toml", &body);
    let out = fjunction()
        .args(["sweep", "--solver", "cross-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    for (i, solver) in ["fourier-space", "time-propagation", "monodromy"].iter().enumerate() {
        assert!(rows[i].contains(solver));
    }
}
