use std::fs;
use std::process::{Command, Output};

fn secstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secstab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn point_reports_a_stable_equilibrium() {
    let out = secstab(&["point", "--a", "0.4", "--ej", "0.3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("FOUND"));
    assert!(text.contains("LinearlyStable"));
    assert!(text.contains("ratio"));
}

#[test]
fn point_json_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = secstab(&[
        "point",
        "--a",
        "0.4",
        "--ej",
        "0.3",
        "--json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rec = &v["cell"]["record"];
    assert!(rec["abar"].as_f64().unwrap() < 0.0);
    assert!(rec["cbar"].as_f64().unwrap() < 0.0);
    assert_eq!(rec["spatial_verdict"], "LINEARLY_STABLE");
    let file: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("point.json")).unwrap()).unwrap();
    assert_eq!(file, v);
}

#[test]
fn point_exit_codes() {
    let crossing = secstab(&["point", "--a", "1.0", "--ej", "0.3"]);
    assert_eq!(code(&crossing), 4);
    assert!(stderr(&crossing).contains("cross"));
    assert_eq!(code(&secstab(&["point", "--a", "0.4", "--ej", "1.2"])), 2);
    assert_eq!(code(&secstab(&["point", "--a", "0.4"])), 2);
    assert_eq!(code(&secstab(&["point", "--a", "-1", "--ej", "0.3"])), 2);
    assert_eq!(
        code(&secstab(&[
            "point", "--a", "0.4", "--ej", "0.3", "--tol", "0"
        ])),
        2
    );
    // circular planet: no aligned equilibrium to certify
    assert_eq!(code(&secstab(&["point", "--a", "0.3", "--ej", "0"])), 3);
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(&path, "# point query\na = 0.4\nej = 0.85\nmu = 0.001\n").unwrap();
    let out = secstab(&[
        "point",
        "--config",
        path.to_str().unwrap(),
        "--ej",
        "0.3",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cell"]["e_j"], 0.3);
    assert_eq!(v["cell"]["a"], 0.4);
    assert_eq!(v["mu"], 0.001);

    fs::write(&path, "shape = round\n").unwrap();
    assert_eq!(
        code(&secstab(&[
            "point",
            "--config",
            path.to_str().unwrap(),
            "--a",
            "0.4",
            "--ej",
            "0.3"
        ])),
        2
    );
}

#[test]
fn crossing_sweep_records_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = secstab(&[
        "sweep",
        "--a-range",
        "0.9999:1.0001:2",
        "--ej-range",
        "0.3:0.4:2",
        "--out",
        d,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "a,e_J,status,e_star,Rbar,Abar,Bbar,Cbar,hess_pp,hess_qq,hess_pq,omega_plane,omega_z,ratio,err_R,err_A,err_C"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(2) == Some("ORBIT_CROSSING")));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(meta["status_counts"]["ORBIT_CROSSING"], 4);
    assert_eq!(meta["metadata"]["settings"]["quad"]["tol"], 1e-10);
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let run = |jobs: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = secstab(&[
            "sweep",
            "--a-range",
            "0.1:0.5:3",
            "--ej-range",
            "0.2:0.6:3",
            "--jobs",
            jobs,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        fs::read(dir.path().join("sweep.csv")).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(
        String::from_utf8(one).unwrap().matches(",FOUND,").count(),
        9
    );
}

#[test]
fn sweep_input_errors() {
    assert_eq!(
        code(&secstab(&[
            "sweep",
            "--a-range",
            "0.1:0.5",
            "--ej-range",
            "0.2:0.6:3"
        ])),
        2
    );
    assert_eq!(code(&secstab(&["sweep", "--ej-range", "0.2:0.6:3"])), 2);
    assert_eq!(
        code(&secstab(&[
            "sweep",
            "--a-range",
            "0.1:0.5:2",
            "--ej-range",
            "0.2:1.6:3"
        ])),
        2
    );
    assert_eq!(
        code(&secstab(&[
            "sweep",
            "--a-range",
            "0.1:0.5:2",
            "--ej-range",
            "0.2:0.6:2",
            "--jobs",
            "0"
        ])),
        2
    );
}

#[test]
fn validate_passes_and_refuses_empty_runs() {
    let out = secstab(&["validate", "--points", "3", "--seed", "5"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("hessian_diagonal"));
    assert_eq!(code(&secstab(&["validate", "--points", "0"])), 2);
}

#[test]
fn validate_catches_injected_fault() {
    let out = secstab(&["validate", "--points", "1", "--inject-fault", "abar-sign"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("abar_negative"), "{}", stderr(&out));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn resonance_curve_and_empty_curve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    // ratio stays close to 1 here
    let out = secstab(&[
        "resonance",
        "--a-range",
        "0.1:0.3:2",
        "--ej-range",
        "0.1:0.3:2",
        "--k",
        "2",
        "--out",
        d,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        fs::read_to_string(dir.path().join("resonance.csv")).unwrap(),
        "a,e_J,ratio\n"
    );

    let out = secstab(&[
        "resonance",
        "--a-range",
        "3:4:2",
        "--ej-range",
        "0.8:0.95:2",
        "--k",
        "1/2",
        "--out",
        d,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("resonance.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| (r[2] - 0.5).abs() < 1e-3));

    assert_eq!(
        code(&secstab(&[
            "resonance",
            "--a-range",
            "3:4:2",
            "--ej-range",
            "0.8:0.95:2",
            "--k",
            "0"
        ])),
        2
    );
}
