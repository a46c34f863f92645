use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use robinwave::ParitySector;
use wgcli::output::{spectrum_csv, wavefunction_text, SPECTRUM_HEADER};
use wgcli::{run_existence, run_oracle_compare, run_spectrum, run_sweep, run_wavefunction, RunConfig};

const BASELINE: &str = "[well]\nalpha0 = 20\nalpha1 = 5\na = 0.3\nd = 1\n";

fn cfg(extra: &str) -> RunConfig {
    RunConfig::from_toml(&format!("{BASELINE}{extra}")).unwrap()
}

#[test]
fn spectrum_of_baseline_well() {
    let result = run_spectrum(&cfg("")).unwrap();
    assert!(!result.rows.is_empty());
    let ground = &result.rows[0];
    assert_eq!(ground.sector, ParitySector::Symmetric);
    assert_eq!(ground.n, 1);
    for r in &result.rows {
        assert_eq!(r.lambda_pi2, r.lambda * (1.0 / PI).powi(2));
        assert!(r.bracket_lo <= r.lambda && r.lambda <= r.bracket_hi);
    }
    assert!(ground.gap1.unwrap() > 0.0);
}

#[test]
fn uniform_coupling_gives_no_rows() {
    let c = RunConfig::from_toml("[well]\nalpha0 = 20\nalpha1 = 20\na = 0.3\n").unwrap();
    assert!(run_spectrum(&c).unwrap().rows.is_empty());
    assert_eq!(spectrum_csv(&run_spectrum(&c).unwrap()), format!("{SPECTRUM_HEADER}\n"));
}

#[test]
fn empty_sweep_is_empty() {
    let sweeps = run_sweep(&cfg("[sweep]\nparameter = \"a_over_d\"\nvalues = []\n")).unwrap();
    assert_eq!(sweeps.len(), 1);
    assert!(sweeps[0].result.rows.is_empty());
}

#[test]
fn width_sweep_is_sorted_monotone_and_bracketed() {
    let c = RunConfig::from_toml(
        "[well]\nalpha0 = 1e5\nalpha1 = 1e-5\na = 1\n[matching]\nN = 16\n\
         [sweep]\nparameter = \"a_over_d\"\nvalues = [2.0, 0.1, 0.5, 1.0, 1.5]\n",
    )
    .unwrap();
    let rows = &run_sweep(&c).unwrap()[0].result.rows;
    for w in rows.windows(2) {
        assert!((w[0].sweep_value, w[0].lambda) < (w[1].sweep_value, w[1].lambda));
    }
    let values = [0.1, 0.5, 1.0, 1.5, 2.0];
    let count = |v: f64| rows.iter().filter(|r| r.sweep_value == v).count();
    for w in values.windows(2) {
        assert!(count(w[1]) >= count(w[0]));
    }
    for n in 1..=4 {
        let branch: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.lambda).collect();
        assert!(branch.windows(2).all(|w| w[1] <= w[0]), "branch {n}: {branch:?}");
    }
    for r in rows {
        assert!(r.bracket_lo <= r.lambda && r.lambda <= r.bracket_hi);
        assert_eq!(r.gap1.is_some(), r.n == 1);
    }
}

#[test]
fn families_approach_the_reference() {
    let c = RunConfig::from_toml(
        "[well]\nalpha0 = 1e5\nalpha1 = 1e-5\na = 0.8\n\
         [sweep]\nparameter = \"a_over_d\"\nvalues = [0.8]\n\
         families = [[1e5, 1e-5], [50, 3], [70, 2], [100, 1], [200, 0.5]]\n",
    )
    .unwrap();
    let sweeps = run_sweep(&c).unwrap();
    let ground: Vec<f64> = sweeps.iter().map(|s| s.result.rows[0].lambda).collect();
    let dist: Vec<f64> = ground[1..].iter().map(|g| (g - ground[0]).abs()).collect();
    assert!(dist.windows(2).all(|w| w[1] < w[0]), "{dist:?}");
}

#[test]
fn wavefunction_exports_are_normalized_and_symmetric() {
    let c = cfg("[sweep]\nparameter = \"alpha1\"\nvalues = [5, 10, 15]\n[wavefunction]\nnx = 201\nny = 21\n");
    let exports = run_wavefunction(&c).unwrap();
    assert_eq!(exports.len(), 3);
    assert!(exports.windows(2).all(|w| w[1].second_moment > w[0].second_moment));
    for e in &exports {
        let g = &e.grid;
        assert!((g.l2_norm() - 1.0).abs() < 1e-12);
        for i in 0..g.nx() {
            for j in 0..g.ny() {
                assert_eq!(g.at(i, j), g.at(g.nx() - 1 - i, j));
            }
        }
        let text = wavefunction_text(g);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# nx ny x0 x1 y0 y1 lambda parity"));
        let meta: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
        assert_eq!(meta[1..3], ["201", "21"]);
        assert_eq!(meta[8], "symmetric");
        assert_eq!(lines.count(), 201);
    }
}

#[test]
fn oracle_comparison_pairs_states() {
    let (rows, oracle) = run_oracle_compare(&cfg("[oracle]\nL = 4\nh0 = 0.03125\n")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].sector_mm, rows[0].sector_fd);
    assert!(rows[0].diff.unwrap().abs() < 5e-3 * PI * PI);
    assert_eq!(oracle.levels.len(), 3);
}

#[test]
fn existence_report() {
    let report = run_existence(&cfg("")).unwrap();
    assert!(report.first_negative_n.unwrap() <= 64);
}

fn wgcli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wgcli")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn binary_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sweep.toml",
        &format!("{BASELINE}[matching]\nN = 16\n[sweep]\nparameter = \"a_over_d\"\nvalues = [0.3, 1.0, 2.0]\n"),
    );
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = wgcli(&["sweep", &config, "--out", out.to_str().unwrap()]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let files: Vec<Vec<u8>> = ["sweep.csv", "sweep.json", "sweep.svg"]
            .iter()
            .map(|f| fs::read(out.join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert!(csv.starts_with(SPECTRUM_HEADER));
    assert!(!csv.contains('\r'));
    let svg = String::from_utf8(outputs[0][2].clone()).unwrap();
    assert!(svg.contains(">a/d<") && svg.contains("E/(π/d)^2"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "[well]\nalpha0 = 20\nalpha1 = -5\na = 0.3\n");
    assert_eq!(wgcli(&["spectrum", &bad]).status.code(), Some(2));
    let missing_sweep = write_config(dir.path(), "nosweep.toml", BASELINE);
    assert_eq!(wgcli(&["sweep", &missing_sweep]).status.code(), Some(2));
    // The uniform strip has no ground state to sample.
    let flat = write_config(
        dir.path(),
        "flat.toml",
        &format!(
            "[well]\nalpha0 = 20\nalpha1 = 20\na = 0.3\n[output]\ndir = \"{}\"\n",
            dir.path().join("o").display()
        ),
    );
    let out = wgcli(&["wavefunction", &flat]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
    let ok = write_config(
        dir.path(),
        "ok.toml",
        &format!("{BASELINE}[output]\ndir = \"{}\"\n", dir.path().join("ok").display()),
    );
    assert_eq!(wgcli(&["existence", &ok]).status.code(), Some(0));
    assert!(dir.path().join("ok/existence.json").exists());
}
