//! CLI acceptance: deterministic outputs, exit-code contract, and the
//! negative control of the validation harness.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_datrans"))
}

const SCENARIO: &str = r#"
[system]
e_d = 1.0
e_a = -1.0
n_d = 3
n_a = 2
v = 0.35
g_d = 1.0
g_a = -1.0
lambda = 0.1
beta = 1.0

[spectral]
family = "ohmic"
eta = 0.5
omega_c = 10.0
ir_cutoff = 1e-6

[time_grid]
t_max = 40.0
points = 81
spacing = "linear"

[sweep]
axis = "eta"
min = 0.0
max = 5.0
points = 21
"#;

fn write_scenario(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn criterion_12_determinism_and_negative_control() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_scenario(tmp.path(), SCENARIO);

    // two independent runs of every data-producing verb
    for verb in ["evolve", "sweep", "resonances"] {
        for run in ["a", "b"] {
            let out = tmp.path().join(format!("{verb}_{run}"));
            let status = bin()
                .args([verb, "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .arg("--workers")
                .arg(if run == "a" { "1" } else { "4" })
                .status()
                .unwrap();
            assert!(status.success(), "{verb} run {run} failed");
        }
    }
    for (verb, file) in [
        ("evolve", "timeseries.csv"),
        ("sweep", "sweep.csv"),
        ("resonances", "resonances.json"),
    ] {
        let a = std::fs::read(tmp.path().join(format!("{verb}_a")).join(file)).unwrap();
        let b = std::fs::read(tmp.path().join(format!("{verb}_b")).join(file)).unwrap();
        assert_eq!(a, b, "{verb}/{file} is not byte-identical across runs");
    }

    // validate passes at the stock tolerances ...
    let out = tmp.path().join("validate_ok");
    let status = bin()
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "validate should pass at stock tolerances");
    let report = std::fs::read_to_string(out.join("validation.json")).unwrap();
    assert!(report.contains("\"all_pass\": true"));

    // ... and fails with exit code 3 when the zero-coupling tolerance is
    // tightened beyond machine precision (harness negative control)
    let strict = format!("{SCENARIO}\n[validate]\nunitary_tol = 1e-15\n");
    let cfg_strict = tmp.path().join("strict.toml");
    std::fs::write(&cfg_strict, strict).unwrap();
    let out = tmp.path().join("validate_strict");
    let status = bin()
        .args(["validate", "--config"])
        .arg(&cfg_strict)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(
        status.code(),
        Some(3),
        "tightened tolerance must fail with code 3"
    );
    let report = std::fs::read_to_string(out.join("validation.json")).unwrap();
    assert!(report.contains("\"all_pass\": false"));

    println!(
        "criterion 12 (CLI determinism): PASS (byte-identical data files; \
         negative control exits 3)"
    );
}

#[test]
fn evolve_final_row_reaches_the_coherent_asymptote() {
    // t_max chosen so t * (slowest rate) ~ 14: the last CSV row must sit on
    // the closed-form asymptotic donor population
    let tmp = tempfile::tempdir().unwrap();
    let scenario = SCENARIO.replace("t_max = 40.0", "t_max = 400.0");
    let cfg = write_scenario(tmp.path(), &scenario);
    let out = tmp.path().join("out");
    assert!(bin()
        .args(["evolve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let csv = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let p_d: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    // closed form for the uniform coherent seeding of N_D = 3
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let alpha = manifest["derived"]["alpha"].as_f64().unwrap();
    let gap = manifest["derived"]["gap"].as_f64().unwrap();
    let a2 = alpha * alpha;
    let x = (-gap).exp(); // beta = 1
    let factor = (a2 * x + 1.0) / ((1.0 + a2) * (1.0 + x));
    let expect = 1.0 - factor; // (sum sqrt p)^2 / N_D = 1 for uniform
    assert!(
        (p_d - expect).abs() < 1e-6,
        "final p_d {p_d} vs closed form {expect}"
    );
}

#[test]
fn sweep_over_site_count_approaches_full_retention() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = SCENARIO
        .replace("axis = \"eta\"", "axis = \"n_d\"")
        .replace("min = 0.0", "min = 1.0")
        .replace("max = 5.0", "max = 64.0")
        .replace("points = 21", "points = 8");
    let cfg = write_scenario(tmp.path(), &scenario);
    let out = tmp.path().join("out");
    assert!(bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    // incoherent retention p_D -> 1 like 1/N_D at fixed v_eff
    for w in rows.windows(2) {
        assert!(w[1][1] > w[0][1], "p_d_inc not increasing with N_D");
    }
    let last = rows.last().unwrap();
    let deficit = 1.0 - last[1];
    assert!(deficit > 0.0 && deficit < 1.0 / last[0]);
}

#[test]
fn sweep_interpolates_between_point_mass_and_uniform_seeding() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = SCENARIO
        .replace("axis = \"eta\"", "axis = \"p_interp\"")
        .replace("max = 5.0", "max = 1.0")
        .replace("points = 21", "points = 11");
    let cfg = write_scenario(tmp.path(), &scenario);
    let out = tmp.path().join("out");
    assert!(bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    // point mass end matches the incoherent value; uniform end attains the
    // maximal acceptor yield; coherent retention decreases monotonically
    let first = &rows[0];
    let last = rows.last().unwrap();
    assert!((first[2] - first[1]).abs() < 1e-12);
    assert!((1.0 - last[2] - last[3]).abs() < 1e-12);
    for w in rows.windows(2) {
        assert!(w[1][2] <= w[0][2] + 1e-12);
    }
}

#[test]
fn config_errors_exit_with_code_1() {
    let tmp = tempfile::tempdir().unwrap();

    // unknown keys are hard errors
    let bad = format!("{SCENARIO}\nunknown_key = 1\n");
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, bad).unwrap();
    let out = bin()
        .args(["evolve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));

    // zero-length grid
    let bad = SCENARIO.replace("points = 81", "points = 0");
    std::fs::write(&cfg, bad).unwrap();
    let out = bin()
        .args(["evolve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // missing file
    let out = bin()
        .args(["evolve", "--config"])
        .arg(tmp.path().join("nope.toml"))
        .arg("--out")
        .arg(tmp.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn explicit_state_file_round_trip_and_stationarity() {
    let tmp = tempfile::tempdir().unwrap();
    // state supported on the donor complement: (|D_1> - |D_2>)/sqrt(2),
    // which must produce constant columns
    let mut state = String::from("3 2\n");
    let amp = 0.5;
    for row in 1..=5 {
        for col in 1..=5 {
            let v = match (row, col) {
                (1, 1) | (2, 2) => amp,
                (1, 2) | (2, 1) => -amp,
                _ => 0.0,
            };
            state.push_str(&format!("{row} {col} {v} 0.0\n"));
        }
    }
    let state_path = tmp.path().join("rho0.txt");
    std::fs::write(&state_path, state).unwrap();

    let scenario = format!(
        "{SCENARIO}\n[initial]\nkind = \"file\"\npath = {:?}\n",
        state_path
    );
    let cfg = tmp.path().join("scenario.toml");
    std::fs::write(&cfg, scenario).unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args(["evolve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let csv = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let p_d_col = header.iter().position(|h| *h == "p_d").unwrap();
    let d11_col = header.iter().position(|h| *h == "re_rho_D1_D1").unwrap();
    let mut first: Option<(f64, f64)> = None;
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let now = (cells[p_d_col], cells[d11_col]);
        match first {
            None => first = Some(now),
            Some(init) => {
                assert!((now.0 - init.0).abs() < 1e-12, "p_d drifted");
                assert!((now.1 - init.1).abs() < 1e-12, "rho_D1_D1 drifted");
            }
        }
    }

    // a non-Hermitian state file is rejected as a config error
    let broken = std::fs::read_to_string(&state_path)
        .unwrap()
        .replace("1 2 -0.5 0.0", "1 2 -0.4 0.1");
    std::fs::write(&state_path, broken).unwrap();
    let out2 = bin()
        .args(["evolve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out2"))
        .output()
        .unwrap();
    assert_eq!(out2.status.code(), Some(1));
}

#[test]
fn tabulated_spectral_density_from_file() {
    let tmp = tempfile::tempdir().unwrap();
    // tabulated ohmic J with eta = 0.5, omega_c = 10
    let mut table = String::new();
    let n = 2000;
    for i in 0..n {
        let w = 400.0 * (i as f64 / (n - 1) as f64).powi(2);
        let j = 0.5 * w * (-w / 10.0).exp();
        table.push_str(&format!("{w} {j}\n"));
    }
    let table_path = tmp.path().join("j.dat");
    std::fs::write(&table_path, table).unwrap();

    let scenario = SCENARIO.replace(
        "family = \"ohmic\"\neta = 0.5\nomega_c = 10.0\nir_cutoff = 1e-6",
        &format!("family = \"tabulated\"\ntable = {table_path:?}\nir_cutoff = 1e-6"),
    );
    let cfg = tmp.path().join("scenario.toml");
    std::fs::write(&cfg, scenario).unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args(["resonances", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json = std::fs::read_to_string(out.join("resonances.json")).unwrap();
    assert!(json.contains("\"sector\": 1"));
}

#[test]
fn validate_passes_at_zero_coupling() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = SCENARIO.replace("lambda = 0.1", "lambda = 0.0");
    let cfg = write_scenario(tmp.path(), &scenario);
    let out = tmp.path().join("out");
    let status = bin()
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "zero-coupling scenario must validate");
    let report = std::fs::read_to_string(out.join("validation.json")).unwrap();
    assert!(report.contains("\"all_pass\": true"));
}

#[test]
fn divergent_mu_without_cutoff_is_reported_not_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = SCENARIO.replace("ir_cutoff = 1e-6\n", "");
    let cfg = tmp.path().join("scenario.toml");
    std::fs::write(&cfg, scenario).unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(
        status.success(),
        "rates must still validate without a cutoff"
    );
    let report = std::fs::read_to_string(out.join("validation.json")).unwrap();
    assert!(report.contains("\"lamb_shifts_available\": false"));
    assert!(report.contains("\"all_pass\": true"));
}
