use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use submig_cli::{load_config, parse_config, verify, Setup};

fn shipped_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/paper_figure1.json")
}

fn submig(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_submig"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--output")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_passes_on_shipped_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = submig(&["verify"], &shipped_config(), tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["lemma_decay"]["samples"].as_array().unwrap().len(), 4);
    assert!(report["lemma_decay"]["samples"][0]["kr"].is_number());
    assert!(report["lemma_decay"]["fitted_exponent"].is_number());
    assert!(report["theorem_single"]["localization_errors"].is_array());
    assert!(report["theorem_single"]["peak_to_sidelobe"].is_number());
}

#[test]
fn truncated_bessel_series_fails_named_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let o = submig(&["verify", "--debug-truncate-bessel", "3"], &shipped_config(), tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("antiderivative_identity"), "{}", stderr(&o));
}

#[test]
fn empty_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("empty.json");
    fs::write(&cfg, "").unwrap();
    let o = submig(&["image"], &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("byte offset 0"), "{}", stderr(&o));
}

#[test]
fn inverted_band_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    let text = fs::read_to_string(shipped_config()).unwrap().replace("\"lambda_max\": 0.6", "\"lambda_max\": 0.1");
    fs::write(&cfg, text).unwrap();
    let o = submig(&["all"], &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`frequencies`"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_a_stage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = submig(&["simulate"], &shipped_config(), &blocker);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("simulate"), "{}", stderr(&o));
}

#[test]
fn simulate_writes_one_matrix_per_frequency() {
    let tmp = tempfile::tempdir().unwrap();
    let o = submig(&["simulate"], &shipped_config(), tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in 1..=10 {
        let text = fs::read_to_string(tmp.path().join(format!("msr_f{f:02}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 24);
    }
}

#[test]
fn image_writes_maps_and_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let o = submig(&["image"], &shipped_config(), tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for stem in ["map_single", "map_multi", "map_analytic_single", "map_analytic_multi"] {
        let csv = fs::read_to_string(tmp.path().join(format!("{stem}.csv"))).unwrap();
        assert!(csv.starts_with("x,y,value\n"));
        assert_eq!(csv.lines().count(), 1 + 101 * 101);
        let pgm = fs::read_to_string(tmp.path().join(format!("{stem}.pgm"))).unwrap();
        assert!(pgm.starts_with("P2\n#"));
    }
    let metrics: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["signal_dimensions"], serde_json::json!([3, 3, 3, 3, 3, 3, 3, 3, 3, 3]));
    assert_eq!(metrics["multi"]["localization_errors"].as_array().unwrap().len(), 3);
    assert_eq!(
        fs::read_dir(tmp.path())
            .unwrap()
            .filter(|e| { e.as_ref().unwrap().file_name().to_string_lossy().starts_with("singular_values_") })
            .count(),
        10
    );
}

#[test]
fn noisy_runs_are_reproducible_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, seed: &str| {
        let out = tmp.path().join(dir);
        let o = submig(&["simulate", "--noise", "0.05", "--seed", seed], &shipped_config(), &out);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(out.join("msr_f10.csv")).unwrap()
    };
    assert_eq!(run("a", "11"), run("b", "11"));
    assert_ne!(run("a", "11"), run("c", "12"));
}

#[test]
fn full_view_override_cancels_the_arc_remainder() {
    let mut config = load_config(&shipped_config()).unwrap();
    config.array.full_view = true;
    config.array.count = 64;
    let report = verify(&Setup::new(config).unwrap()).unwrap();
    assert!(report.lemma_decay.full_view);
    assert!(report.lemma_decay.samples.iter().all(|s| s.error < 1e-8));
    assert!(report.theorem_single.rms < 0.05);
    assert!(report.passed, "{:?}", report.failed_checks());
}

#[test]
fn shipped_config_round_trips_canonically() {
    let config = load_config(&shipped_config()).unwrap();
    let text = config.to_json();
    assert_eq!(parse_config(&text).unwrap().to_json(), text);
}
