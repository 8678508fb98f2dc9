use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stirap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stirap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stirap_with_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stirap"))
        .env("STIRAP_THREADS", threads)
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_writes_exact_header_and_all_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let res = stirap(&[
        "sweep",
        "--gamma",
        "0.1,0.2",
        "--t-min",
        "10",
        "--t-max",
        "12",
        "--t-step",
        "1",
        "--methods",
        "suboptimal,optimal,poly8",
        "--steps",
        "2000",
        "--out",
        path_str(&out),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,gamma,duration,efficiency,spring_cost,valid")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 18);
    assert!(rows[0].starts_with("suboptimal,0.1,10,"));
    assert!(rows[17].starts_with("poly8,0.2,12,"));
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn sweep_output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let res = stirap_with_threads(
            threads,
            &[
                "sweep",
                "--gamma",
                "0.1",
                "--t-min",
                "10",
                "--t-max",
                "14",
                "--t-step",
                "1",
                "--steps",
                "2000",
                "--out",
                path_str(&out),
            ],
        );
        assert!(res.status.success());
        fs::read(out).unwrap()
    };
    let serial = run("1", "a.csv");
    assert_eq!(serial, run("4", "b.csv"));
    assert_eq!(serial, run("4", "c.csv"));
}

#[test]
fn empty_method_list_succeeds_with_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let res = stirap(&[
        "sweep",
        "--gamma",
        "0.1",
        "--t-min",
        "10",
        "--t-max",
        "30",
        "--t-step",
        "1",
        "--methods",
        "",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(fs::read_to_string(out).unwrap().lines().count(), 1);
}

#[test]
fn all_invalid_sweep_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let res = stirap(&[
        "sweep",
        "--gamma",
        "0.1",
        "--t-min",
        "2",
        "--t-max",
        "5",
        "--t-step",
        "1",
        "--methods",
        "suboptimal",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(res.status.code(), Some(3));
    let text = fs::read_to_string(out).unwrap();
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.ends_with(",,,duration_too_short")));
}

#[test]
fn bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = path_str(&out);
    assert_eq!(
        stirap(&[
            "sweep", "--gamma", "0.1", "--t-min", "10", "--t-max", "12", "--t-step", "0", "--out",
            o
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        stirap(&[
            "sweep",
            "--gamma",
            "0.1",
            "--t-min",
            "10",
            "--t-max",
            "12",
            "--t-step",
            "1",
            "--methods",
            "bang",
            "--out",
            o
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        stirap(&[
            "contour",
            "--gamma",
            "0.1",
            "--duration",
            "20",
            "--t1",
            "1:2",
            "--t2",
            "3:4:2",
            "--out",
            o
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        stirap(&[
            "solve",
            "--method",
            "optimal",
            "--gamma",
            "2.5",
            "--duration",
            "20"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        stirap(&[
            "simulate",
            "--method",
            "optimal",
            "--gamma",
            "0.1",
            "--duration",
            "20",
            "--steps",
            "10",
            "--out",
            o
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn contour_flags_unordered_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("contour.csv");
    let res = stirap(&[
        "contour",
        "--gamma",
        "0.1",
        "--duration",
        "20",
        "--t1",
        "4:6:3",
        "--t2",
        "5:15:3",
        "--steps",
        "2000",
        "--out",
        path_str(&out),
    ]);
    assert!(res.status.success());
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t1,t2,efficiency,valid");
    assert_eq!(lines.len(), 10);
    assert!(lines.contains(&"5,5,,switch_ordering"));
    assert!(lines.contains(&"6,5,,switch_ordering"));
}

#[test]
fn simulate_reproduces_sweep_efficiency() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let json = dir.path().join("seq.json");
    let res = stirap(&[
        "simulate",
        "--method",
        "optimal",
        "--gamma",
        "0.1",
        "--duration",
        "20",
        "--out",
        path_str(&traj),
        "--json",
        path_str(&json),
    ]);
    assert!(res.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    let header = fs::read_to_string(&traj)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned();
    assert_eq!(header, "t,theta,X,Y,Z,pop1,pop2,pop3");
    let seq: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(seq["signal"]["impulses"].as_array().unwrap().len(), 4);

    let sweep = dir.path().join("sweep.csv");
    let res = stirap(&[
        "sweep",
        "--gamma",
        "0.1",
        "--t-min",
        "20",
        "--t-max",
        "20",
        "--t-step",
        "1",
        "--methods",
        "optimal",
        "--out",
        path_str(&sweep),
    ]);
    assert!(res.status.success());
    let text = fs::read_to_string(sweep).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let from_sweep: f64 = row[3].parse().unwrap();
    let from_simulate = summary["efficiency"].as_f64().unwrap();
    assert!((from_sweep - from_simulate).abs() < 1e-14);
}

#[test]
fn extra_rows_are_appended_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let extra = dir.path().join("extra.csv");
    fs::write(
        &extra,
        "method,gamma,duration,efficiency,spring_cost,valid\nnumerical,0.1,10,0.91,,true\n",
    )
    .unwrap();
    let out = dir.path().join("sweep.csv");
    let res = stirap(&[
        "sweep",
        "--gamma",
        "0.1",
        "--t-min",
        "10",
        "--t-max",
        "10",
        "--t-step",
        "1",
        "--methods",
        "suboptimal",
        "--steps",
        "2000",
        "--out",
        path_str(&out),
        "--extra-csv",
        path_str(&extra),
    ]);
    assert!(res.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().last(), Some("numerical,0.1,10,0.91,,true"));

    fs::write(&extra, "a,b\n").unwrap();
    let res = stirap(&[
        "sweep",
        "--gamma",
        "0.1",
        "--t-min",
        "10",
        "--t-max",
        "10",
        "--t-step",
        "1",
        "--out",
        path_str(&out),
        "--extra-csv",
        path_str(&extra),
    ]);
    assert_eq!(res.status.code(), Some(2));
}
