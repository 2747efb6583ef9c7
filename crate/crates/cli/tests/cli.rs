use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn harvest(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harvest"))
        .args(args)
        .env("HARVEST_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

#[test]
fn point_prints_a_row() {
    let cache = tempfile::tempdir().unwrap();
    let out = harvest(
        &[
            "point", "--l", "10", "--mass", "0.01", "--dA", "7", "--dAB", "7", "--gap", "1", "--zeta", "1",
        ],
        cache.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let row: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(row["status"], "ok");
    assert_eq!(row["r_h"], 1.0);
    let l_aa = row["L_AA"].as_f64().unwrap();
    assert!(l_aa > 0.09 && l_aa < 0.11, "{l_aa}");
    assert!(row["I_AB"].as_f64().unwrap() > 0.0);
}

#[test]
fn point_accepts_negative_zeta_and_eta() {
    let cache = tempfile::tempdir().unwrap();
    let args = [
        "point", "--mass", "0.01", "--dA", "3", "--dAB", "7", "--gap", "1", "--zeta", "-1",
    ];
    let saddle = harvest(&args, cache.path());
    let mut shifted_args = args.to_vec();
    shifted_args.extend(["--eta", "-0.5"]);
    let shifted = harvest(&shifted_args, cache.path());
    assert!(saddle.status.success() && shifted.status.success());
    let a: serde_json::Value = serde_json::from_slice(&saddle.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&shifted.stdout).unwrap();
    assert_eq!(a["zeta"], -1.0);
    let (x, y) = (a["L_AB_re"].as_f64().unwrap(), b["L_AB_re"].as_f64().unwrap());
    assert!(((x - y) / x).abs() < 1e-8);
}

#[test]
fn point_failure_sets_exit_code() {
    let cache = tempfile::tempdir().unwrap();
    let out = harvest(
        &["point", "--mass", "0.01", "--dA", "0", "--dAB", "7", "--gap", "1"],
        cache.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizon"));
}

#[test]
fn sweep_writes_table_and_manifest_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let config = dir.path().join("spec.json");
    let table = dir.path().join("out/grid.csv");
    fs::write(
        &config,
        format!(
            r#"{{
                "preset": "fig1",
                "axes": [
                    {{"variable": "omega", "grid": "log", "min": 0.1, "max": 1, "count": 3}},
                    {{"variable": "d_a", "grid": "linear", "min": 1, "max": 5, "count": 2}}
                ],
                "output": {{"path": "{}", "format": "csv"}},
                "jobs": 2
            }}"#,
            table.display()
        ),
    )
    .unwrap();
    let config_arg = config.to_str().unwrap();
    let first = harvest(&["sweep", "--config", config_arg], &cache);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let csv = fs::read_to_string(&table).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("ads_length,mass,r_h,zeta,omega,d_a"));
    assert_eq!(lines.count(), 6);
    assert!(dir.path().join("out/grid.manifest.json").exists());
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 6);

    let second = harvest(&["sweep", "--config", config_arg, "--jobs", "1"], &cache);
    assert!(second.status.success());
    assert_eq!(fs::read_to_string(&table).unwrap(), csv);

    let uncached = dir.path().join("fresh.csv");
    let third = harvest(
        &[
            "sweep",
            "--config",
            config_arg,
            "--no-cache",
            "--out",
            uncached.to_str().unwrap(),
        ],
        &dir.path().join("unused"),
    );
    assert!(third.status.success());
    assert_eq!(fs::read_to_string(&uncached).unwrap(), csv);
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn sweep_without_output_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("spec.json");
    fs::write(
        &config,
        r#"{"preset": "fig3", "axes": [{"variable": "t_a", "grid": "log", "min": 0.1, "max": 0.1, "count": 1}],
            "fixed": {"gamma_a": 1}}"#,
    )
    .unwrap();
    let out = harvest(
        &["sweep", "--config", config.to_str().unwrap(), "--no-cache"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn invalid_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = harvest(&["preset", "fig9", "--out", dir.path().to_str().unwrap()], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));

    let config = dir.path().join("mixed.json");
    fs::write(&config, r#"{"preset": "fig1", "fixed": {"t_a": 1}}"#).unwrap();
    let out = harvest(&["sweep", "--config", config.to_str().unwrap()], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not both"));

    let out = harvest(
        &[
            "point", "--mass", "0.01", "--dA", "3", "--dAB", "7", "--gap", "1", "--eta", "0.5",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
}
