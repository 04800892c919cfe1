//! End-to-end runs of the `ftnsim` binary.

use std::path::Path;
use std::process::{Command, Output};

fn ftnsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftnsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn selfcheck_passes() {
    let out = ftnsim(&["selfcheck"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 8);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn ber_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"mode":"ber_overlap","gamma":[1.0,0.8],"ebn0_db":[2,4],"n":64,"p":12,"q":12,
            "min_bits":2000,"max_errors":10}"#,
    );
    let csv = dir.path().join("out.csv");
    let out = ftnsim(&["ber", "--config", &cfg, "--out", csv.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mode,gamma,rate_bps_hz,ebn0_db,bits,errors,ber,seconds");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("ber_overlap,1,"));
    let err = stderr(&out);
    assert!(err.contains("\"rng_seed\":5"));
    assert!(err.contains("stop when bits >= 2000"));
}

#[test]
fn config_echo_reparses_to_the_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"mode":"ber_cp","gamma":0.8,"ebn0_db":[5],"n":64,"cp_len":20,"min_bits":3000,"max_errors":5}"#,
    );
    let first = ftnsim(&["ber", "--config", &cfg, "--set", "weight_kind=white"]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let err = stderr(&first);
    let echo = err
        .lines()
        .find_map(|l| l.strip_prefix("config: "))
        .expect("config echo");
    let stamp = err.lines().find_map(|l| l.strip_prefix("run: ")).unwrap().to_string();
    let cfg2 = write(dir.path(), "echo.json", echo);
    let second = ftnsim(&["ber", "--config", &cfg2]);
    assert_eq!(second.status.code(), Some(0));
    let err2 = stderr(&second);
    assert!(err2.contains(&format!("run: {stamp}")));
    // timing column aside, the CSV is identical
    let strip = |o: &Output| -> Vec<String> {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn config_errors_exit_1_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.json", r#"{"mode":"ber_cp","gamma":0.8,"ebn0_db":[5],"cp_len":20,"colour":1}"#);
    let out = ftnsim(&["ber", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("colour"));

    let cp_in_overlap = write(
        dir.path(),
        "o.json",
        r#"{"mode":"ber_overlap","gamma":0.8,"ebn0_db":[5],"p":4,"q":4,"cp_len":20}"#,
    );
    let out = ftnsim(&["ber", "--config", &cp_in_overlap]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cp_len"));

    let out = ftnsim(&["ber", "--config", &cp_in_overlap, "--set", "cp_len=null", "--set", "gamma=1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("gamma"));

    let out = ftnsim(&["ber", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(1));

    let out = ftnsim(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spectral_null_at_zero_noise_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(dir.path(), "dead.json", r#"{"delays_s":[0.0],"gains_re":[0.0],"gains_im":[0.0]}"#);
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(r#"{{"mode":"rmse_position","gamma":0.8,"n":64,"n0":0.0,"channel":"file:{ch}"}}"#),
    );
    let out = ftnsim(&["rmse", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let out = ftnsim(&["weights", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

fn weight_table(cfg: &str, extra: &[&str]) -> Vec<Vec<f64>> {
    let mut args = vec!["weights", "--config", cfg];
    args.extend_from_slice(extra);
    let out = ftnsim(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("bin,lambda_re,lambda_im,psd,w_white_re,w_white_im,w_colored_re,w_colored_im")
    );
    lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn weight_dump_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "w.json", r#"{"mode":"rmse_position","gamma":1.0,"n":64,"n0":0.2}"#);

    // Nyquist: the colored weight collapses to the white one
    for row in weight_table(&cfg, &[]) {
        assert!((row[4] - row[6]).abs() < 1e-12 && (row[5] - row[7]).abs() < 1e-12);
    }

    // zero noise at γ = 0.8: W̃_c·Λ ≈ 1 wherever Λ is not tiny
    let rows = weight_table(&cfg, &["--set", "gamma=0.8", "--set", "n0=0"]);
    for row in &rows {
        let l = ftnsim::C64::new(row[1], row[2]);
        let w = ftnsim::C64::new(row[6], row[7]);
        if l.norm() > 1e-3 {
            assert!((l * w - 1.0).norm() < 1e-9);
        }
    }

    // γ = 0.8, N = 64: the PSD column equals the literal double sum
    let rows = weight_table(&cfg, &["--set", "gamma=0.8"]);
    let spec = ftnsim::pulse::PulseSpec::new(0.5, 1.0, 10).unwrap();
    let want = ftnsim::oracle::psd_double_sum(&spec, 0.8, 0.2, 64);
    assert_eq!(rows.len(), 64);
    for (row, w) in rows.iter().zip(&want) {
        assert!((row[3] - w.re).abs() < 1e-10, "bin {}: {} vs {}", row[0], row[3], w.re);
    }
}

#[test]
fn rmse_and_channel_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.json", r#"{"mode":"rmse_position","gamma":0.8,"n":128,"blocks":10}"#);
    let out = ftnsim(&["rmse", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("position,rmse"));
    assert_eq!(text.lines().count(), 129);

    let out = ftnsim(&["channel", "--gamma", "0.8", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let ch: ftnsim::channel::TapDelayLine = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(ch.num_taps(), 10);
    assert!((ch.t_max() - 16.0 * 0.8).abs() < 1e-12);
    let again = ftnsim(&["channel", "--gamma", "0.8", "--seed", "3"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn canned_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["fig2", "fig3", "fig4", "fig4_cp", "fig5", "fig5_cp"] {
        let text = std::fs::read_to_string(root.join(format!("{name}.json"))).unwrap();
        ftnsim::harness::ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
