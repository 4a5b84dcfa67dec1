use std::fs;
use std::path::Path;

use chiral_cavity::cli::{exit_code, main_entry, run, Cli, Command, FigureName};
use chiral_cavity::Error;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn cli(command: Command, config: Option<std::path::PathBuf>, out: &Path) -> Cli {
    Cli {
        command,
        config,
        out: out.to_path_buf(),
        workers: 1,
        tol: None,
    }
}

const POINT: &str = r#"{
    "params": {"delta": 1.0, "g": 0.4, "b_field": 0.2, "inertia": 20.0, "n_dimers": 1},
    "trunc": {"n_max": 4, "k_max": 3}
}"#;

#[test]
fn ground_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", POINT);
    let out = dir.path().join("out");
    let s = run(&cli(Command::Ground, Some(cfg), &out)).unwrap();
    let text = fs::read_to_string(&s.csv[0]).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("energy,l_opt,dl_opt,l_mech,sector,converged"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[4], "0");
    assert_eq!(row[5], "true");
    assert!(row[0].contains('e'));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&s.metadata).unwrap()).unwrap();
    for key in [
        "params",
        "trunc",
        "all_converged",
        "tool_version",
        "wall_time_s",
        "timestamp_unix",
    ] {
        assert!(meta.get(key).is_some(), "{key}");
    }
    assert_eq!(meta["params"]["g"], 0.4);
}

#[test]
fn malformed_config_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (i, bad) in [
        "{\"params\": ",
        r#"{"params": {"delta": 1.0, "g": 0.4, "b_field": 0.2, "inertia": 20.0}}"#,
        r#"{"params": {"delta": -1.0, "g": 0.4, "b_field": 0.2, "inertia": 20.0, "n_dimers": 1}}"#,
        r#"{"params": {"delta": 1.0, "g": 0.4, "b_field": 0.2, "inertia": 20.0, "n_dimers": 1}, "task": "rpa"}"#,
    ]
    .iter()
    .enumerate()
    {
        let cfg = write(dir.path(), &format!("bad{i}.json"), bad);
        let e = run(&cli(Command::Ground, Some(cfg), &out)).unwrap_err();
        assert_eq!(exit_code(&e), 1, "{bad}: {e}");
        assert!(matches!(e, Error::Config(_)));
    }
    assert!(!out.exists());
}

#[test]
fn sweep_flags_failed_points_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    // the second dimension cap is exceeded only for N = 3
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{
            "params": {"delta": 1.0, "g": 0.4, "b_field": 0.2, "inertia": 20.0, "n_dimers": 1},
            "trunc": {"n_max": 3, "k_max": 2, "max_dimension": 300},
            "sweep": [{"parameter": "n_dimers", "start": 1, "stop": 3, "count": 3}]
        }"#,
    );
    let out = dir.path().join("out");
    let s = run(&cli(Command::Sweep, Some(cfg), &out)).unwrap();
    assert!(!s.all_converged);
    let mut r = csv::Reader::from_path(&s.csv[0]).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][5], "true");
    assert_eq!(&rows[0][7], "");
    assert_eq!(&rows[2][5], "false");
    assert!(rows[2][7].contains("dimension"), "{:?}", rows[2]);
}

#[test]
fn perturbation_rpa_and_bo_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{
            "params": {"delta": 1.0, "g": 0.1, "b_field": 0.0, "inertia": 1e6, "n_dimers": 2},
            "trunc": {"n_max": 3, "k_max": 0},
            "bo": {"points": 128, "source": "rpa_g4"}
        }"#,
    );
    let out = dir.path().join("out");
    for c in [Command::Perturbation, Command::Rpa, Command::Bo] {
        let s = run(&cli(c.clone(), Some(cfg.clone()), &out)).unwrap();
        assert!(fs::metadata(&s.csv[0]).unwrap().len() > 0, "{c:?}");
    }
    let rpa = fs::read_to_string(out.join("rpa.csv")).unwrap();
    assert!(rpa.contains("closed_form_b0") && rpa.contains("angle_correction"));
    let bo = fs::read_to_string(out.join("bo.csv")).unwrap();
    assert!(bo.starts_with("theta,V,psi\n"));
    assert_eq!(bo.lines().count(), 130);
}

#[test]
fn feasibility_reports_both_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let s = run(&cli(Command::Feasibility { hbar_omega_mev: 100.0 }, None, dir.path())).unwrap();
    let text = fs::read_to_string(&s.csv[0]).unwrap();
    assert!(text.starts_with("quantity,computed,quoted"));
    assert!(text.contains("height_uev_two_dimers,9.765625000000e-3,1.000000000000e0"));
}

#[test]
fn figure_writes_named_file() {
    let dir = tempfile::tempdir().unwrap();
    let s = run(&cli(
        Command::Figure {
            name: FigureName::Fig2b,
        },
        None,
        dir.path(),
    ))
    .unwrap();
    assert!(s.csv[0].ends_with("fig2b.csv"));
    assert!(dir.path().join("fig2b.json").exists());
}

#[test]
fn entry_point_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().to_string();
    assert_eq!(main_entry(["chiral-cavity", "ground", "--out", &out]), 1);
    assert_eq!(main_entry(["chiral-cavity", "nonsense"]), 1);
    let cfg = write(dir.path(), "c.json", POINT);
    let cfg = cfg.to_string_lossy().to_string();
    assert_eq!(
        main_entry([
            "chiral-cavity",
            "ground",
            "--config",
            &cfg,
            "--out",
            &out,
            "--tol",
            "1e-10"
        ]),
        0
    );
    assert_eq!(
        main_entry([
            "chiral-cavity",
            "ground",
            "--config",
            &cfg,
            "--out",
            &out,
            "--tol",
            "-1"
        ]),
        1
    );
}
