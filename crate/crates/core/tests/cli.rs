use fraclab::monitor::{BlowupReport, MonitorSeries};
use std::path::Path;
use std::process::{Command, Output};

fn fraclab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclab")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn unknown_key_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", "{\n  \"preset\": \"riccati\",\n  \"polcy\": {}\n}\n");
    let o = fraclab(&["evolve", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("polcy") && err.contains("line 3"), "{err}");
}

#[test]
fn invalid_values_give_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", "{\n  \"params\": {\n    \"alpha\": \"half\"\n  }\n}\n");
    let o = fraclab(&["evolve", "--config", &cfg], dir.path());
    assert_ne!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn unknown_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", "{}");
    let o = fraclab(&["explode", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evolve_then_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"preset": "riccati", "params": {"n_points": 256}, "policy": {"t_max": 0.3}}"#,
    );
    let out = dir.path().join("run");
    let o = fraclab(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));

    let csv = std::fs::read_to_string(out.join("monitors.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), MonitorSeries::CSV_HEADER);
    assert_eq!(MonitorSeries::CSV_HEADER, "t,mass,min_u,max_u,max_ux,weighted_functional,lambda_u0,tail_fraction,G_linf");
    let series = MonitorSeries::read_csv(csv.as_bytes()).unwrap();
    let mut again = Vec::new();
    series.write_csv(&mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), csv);

    let rep: BlowupReport = serde_json::from_str(&std::fs::read_to_string(out.join("blowup.json")).unwrap()).unwrap();
    assert!(!rep.detected);
    assert!(fraclab::evolution::read_checkpoint(&out.join("final.ckpt")).is_ok());

    let rcfg = write(dir.path(), "r.json", &format!(r#"{{"report": {{"input_dir": {:?}}}}}"#, out.to_str().unwrap()));
    let figs = dir.path().join("figs");
    let o = fraclab(&["report", "--config", &rcfg, "--out", figs.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let svgs: Vec<_> = std::fs::read_dir(&figs)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "svg"))
        .collect();
    assert!(!svgs.is_empty());
    for e in svgs {
        let text = std::fs::read_to_string(e.path()).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn scan_names_cells_by_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"params": {"n_points": 128}, "policy": {"t_max": 0.05}, "sweep": {"alphas": [0.5], "amplitudes": [1, 2]}}"#,
    );
    let out = dir.path().join("scan");
    let o = Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(["blowup-scan", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("FRACLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    for cell in ["cell_alpha0.5_amp1", "cell_alpha0.5_amp2"] {
        assert!(out.join(format!("{cell}.csv")).exists(), "{cell}.csv");
        assert!(out.join(format!("{cell}.json")).exists(), "{cell}.json");
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", "{}");
    let o = fraclab(&["selftest", "--config", &cfg, "--out", dir.path().join("st").to_str().unwrap()], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(!stdout.contains("FAIL"));
}
