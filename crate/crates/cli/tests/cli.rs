//! End-to-end tests of the `ehk` binary: output formats, the overwrite
//! guard, error records, and thread-count independence of the CSV bytes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ehk_core::{coherent_overlap, GaussianPacket};

fn ehk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ehk"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("the binary runs")
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).expect("config written");
    path
}

/// Small static-barrier correlation document used across the tests.
fn small_correlate(out: &Path, n_traj: usize, seed: u64, t_max: f64) -> String {
    format!(
        r#"
schema_version = 1
hbar = 0.4
propagator = "ehk"

[potential]
family = "eckart"
v0 = 1.0
l = 1.0

[packets.initial]
gamma = 6.0
q = 40.0
p = -0.5

[packets.final]
gamma = 6.0
q = -40.0
p = -0.5

[sampling]
n_traj = {n_traj}
seed = {seed}
tol = 1e-8

[times]
t_max = {t_max}
n_samples = 40

[output]
dir = "{}"
"#,
        out.display()
    )
}

#[test]
fn zero_window_writes_the_closed_form_overlap() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    // Overlapping packets so c(0) is far from zero.
    let body = r#"
schema_version = 1
hbar = 0.4

[potential]
family = "eckart"
v0 = 1.0
l = 1.0

[packets.initial]
gamma = 2.0
q = 12.0
p = -0.5

[packets.final]
gamma = 3.0
q = 12.5
p = -0.3

[times]
t_max = 0.0
n_samples = 400
"#;
    let config = write_config(tmp.path(), body);
    let output = run(ehk().args(["correlate", "--config"]).arg(&config).arg("--out").arg(&out));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let text = fs::read_to_string(out.join("correlation.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_sha256 = "));
    assert_eq!(lines.next().unwrap(), "t,re_c,im_c,stderr");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(lines.next(), None, "exactly one data row");
    assert_eq!(row[0], "0");
    assert_eq!(row[3], "", "no ensemble ran, so no standard error");

    let psi_i = GaussianPacket { gamma: 2.0, q: 12.0, p: -0.5 };
    let psi_f = GaussianPacket { gamma: 3.0, q: 12.5, p: -0.3 };
    let c0 = coherent_overlap(&psi_f, &psi_i, 0.4);
    assert_eq!(row[1].parse::<f64>().unwrap(), c0.re, "shortest round-trip floats");
    assert_eq!(row[2].parse::<f64>().unwrap(), c0.im);
}

#[test]
fn outputs_refuse_a_directory_holding_a_different_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let config = write_config(tmp.path(), &small_correlate(&out, 200, 1, 0.0));
    assert!(run(ehk().args(["correlate", "--config"]).arg(&config)).status.success());

    // Same document, different seed: a different configuration hash.
    let output = run(ehk().args(["correlate", "--seed", "2", "--config"]).arg(&config));
    assert!(!output.status.success());
    let record: serde_json::Value =
        serde_json::from_slice(&output.stderr).expect("stderr is one JSON record");
    assert_eq!(record["error"]["kind"], "output_conflict");

    // --force replaces the directory contents.
    let output = run(ehk().args(["correlate", "--seed", "2", "--force", "--config"]).arg(&config));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 2);
}

#[test]
fn failures_exit_with_a_machine_readable_record() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    // Transmission energies far outside the band the packets resolve.
    let body = format!(
        "{}\n[transmission]\ne_min_over_v0 = 9.0\ne_max_over_v0 = 10.0\nn_energies = 3\nmethods = [\"hk\"]\n",
        small_correlate(&out, 200, 1, 40.0)
    );
    let config = write_config(tmp.path(), &body);
    let output = run(ehk().args(["transmit", "--config"]).arg(&config));
    assert!(!output.status.success());
    let record: serde_json::Value =
        serde_json::from_slice(&output.stderr).expect("stderr is one JSON record");
    assert_eq!(record["error"]["kind"], "band_exceeded");
    let message = record["error"]["message"].as_str().unwrap();
    assert!(
        message.contains("resolvable band"),
        "message should name the band: {message}"
    );

    // A missing section is a config error.
    let config2 = write_config(tmp.path(), &small_correlate(&out, 200, 1, 40.0));
    let output = run(ehk().args(["wkb", "--config"]).arg(&config2));
    assert!(!output.status.success());
    let record: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(record["error"]["kind"], "config");
}

#[test]
fn csv_bytes_do_not_depend_on_the_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        &small_correlate(&tmp.path().join("unused"), 3000, 9, 120.0),
    );
    let mut bytes = Vec::new();
    for threads in ["1", "2", "5"] {
        let out = tmp.path().join(format!("run{threads}"));
        let output = run(ehk()
            .args(["correlate", "--threads", threads, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out));
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        bytes.push(fs::read(out.join("correlation.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "1 vs 2 workers");
    assert_eq!(bytes[0], bytes[2], "1 vs 5 workers");
}

#[test]
fn atlas_preset_emits_classified_polylines_and_line_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("atlas");
    let output = run(ehk().args(["atlas", "--preset", "fig1", "--out"]).arg(&out));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    // One class per orbit id; two distinct class-(c) orbits lead the preset.
    let orbits = fs::read_to_string(out.join("orbits.csv")).unwrap();
    let mut per_orbit: Vec<(&str, &str)> = orbits
        .lines()
        .skip(2)
        .map(|l| {
            let mut cells = l.split(',');
            (cells.next().unwrap(), cells.next().unwrap())
        })
        .collect();
    per_orbit.dedup();
    let classes: Vec<&str> = per_orbit.iter().map(|(_, class)| *class).collect();
    assert_eq!(classes, vec!["c", "c", "a", "b"]);

    let lines = fs::read_to_string(out.join("burning_lines.csv")).unwrap();
    let kinds: Vec<&str> = lines
        .lines()
        .skip(2)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(kinds.iter().filter(|k| **k == "burning_line").count(), 4);
    assert_eq!(kinds.iter().filter(|k| **k == "turning_point").count(), 2);
}

#[test]
fn wkb_cells_above_the_barrier_top_stay_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("wkb");
    let body = r#"
schema_version = 1
hbar = 0.4

[potential]
family = "eckart"
v0 = 1.0
l = 1.0

[wkb]
e_min_over_v0 = 0.5
e_max_over_v0 = 1.2
n_energies = 3
"#;
    let config = write_config(tmp.path(), body);
    let output = run(ehk().args(["wkb", "--config"]).arg(&config).arg("--out").arg(&out));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = fs::read_to_string(out.join("wkb.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(2).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    // E = 0.5 and 0.85 lie below the top and carry an action; E = 1.2 does not.
    assert!(!rows[0][1].is_empty() && !rows[1][1].is_empty());
    assert!(rows[2][1].is_empty() && rows[2][2].is_empty());
    for row in &rows {
        assert!(row[3].parse::<f64>().unwrap() > 0.0);
    }
}
