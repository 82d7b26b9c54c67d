use std::path::Path;
use std::process::{Command, Output};

use dhom_cli::check::{run_suite, Fixture, Suite};

const EXAMPLE: &str = "\
# third-order example
generator = 3 0 0; 0 2 0; 0 0 1
gain = -5.5055 -15.8387 -16.3807
norm_power = 4
nu = 0.7
delta_angle = 0.15707963267948966
x0 = 1 1 1
step = 1e-4
t_end = 0.01
";

fn dhom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let data = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, data)
}

#[test]
fn simulate_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", EXAMPLE);
    let out = dir.path().join("traj.csv");
    let res = dhom(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let (header, data) = rows(&out);
    assert_eq!(header.join(","), "t,x1,x2,x3,q1,q2,q3,u1,hnorm");
    assert_eq!(data.len(), 101);
    assert_eq!(&data[0][..4], &[0.0, 1.0, 1.0, 1.0]);
    assert!((data[100][0] - 0.01).abs() < 1e-15);
}

#[test]
fn simulate_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", EXAMPLE);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert_eq!(
            dhom(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()])
                .status
                .code(),
            Some(0)
        );
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn zero_initial_state_stays_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "zero.cfg",
        &EXAMPLE.replace("x0 = 1 1 1", "x0 = 0 0 0"),
    );
    let out = dir.path().join("zero.csv");
    assert_eq!(
        dhom(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let (_, data) = rows(&out);
    assert!(data.iter().all(|r| r[1..].iter().all(|&v| v == 0.0)));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", EXAMPLE);
    let out = dir.path().join("missing").join("traj.csv");
    assert_eq!(
        dhom(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    let res = dhom(&[
        "simulate",
        "--config",
        "/nonexistent/run.cfg",
        "--out",
        "x.csv",
    ]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn blow_up_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = EXAMPLE
        .replace("gain = -5.5055 -15.8387 -16.3807", "gain = 50 50 50")
        .replace("x0 = 1 1 1", "x0 = 5 5 5")
        .replace("t_end = 0.01", "t_end = 5")
        .replace("step = 1e-4", "step = 1e-3")
        + "quantized = false\n";
    let cfg = write(dir.path(), "bad.cfg", &text);
    let out = dir.path().join("bad.csv");
    let res = dhom(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        res.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn invalid_config_exits_4_and_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "nu.cfg",
        &EXAMPLE.replace("nu = 0.7", "nu = 1.2"),
    );
    let res = dhom(&["simulate", "--config", &cfg, "--out", "unused.csv"]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("`nu`"));
}

#[test]
fn planar_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let text = "generator = 1 0; 0 1\ngain = -1 -1\nnu = 0.5\ndelta_angle = 1.5707963267948966\nx0 = 1 0\n";
    let cfg = write(dir.path(), "seeds.cfg", text);
    let out = dir.path().join("seeds.csv");
    let res = dhom(&[
        "seeds",
        "--config",
        &cfg,
        "--levels",
        "-1..1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let (header, data) = rows(&out);
    assert_eq!(header.join(","), "level,angle_index,s1,s2,hnorm");
    assert_eq!(data.len(), 12);
    for r in &data {
        let expect = 0.5f64.powi(r[0] as i32) * 4.0 / 3.0;
        assert!((r[4] - expect).abs() < 1e-12);
        assert!((r[2].hypot(r[3]) - expect).abs() < 1e-12);
    }
    let mut radii: Vec<f64> = data.iter().map(|r| r[4]).collect();
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    assert_eq!(radii.len(), 3);
}

#[test]
fn seeds_reject_four_states() {
    let dir = tempfile::tempdir().unwrap();
    let text = "generator = 1 0 0 0; 0 1 0 0; 0 0 1 0; 0 0 0 1\ngain = -1 -1 -1 -1\nnu = 0.5\ndelta_angle = 0.5\nx0 = 1 0 0 0\n";
    let cfg = write(dir.path(), "four.cfg", text);
    let res = dhom(&[
        "seeds",
        "--config",
        &cfg,
        "--levels",
        "0..0",
        "--out",
        "unused.csv",
    ]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn check_suite_exit_codes() {
    let res = dhom(&["check", "--suite", "dilation"]);
    assert_eq!(res.status.code(), Some(0));
    let stdout = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l.starts_with("PASS dilation.")));
    let mut sorted = lines.clone();
    sorted.sort_by_key(|l| l.split(' ').nth(1).unwrap().to_string());
    assert_eq!(lines, sorted);

    assert_eq!(
        dhom(&["check", "--suite", "nonsense"]).status.code(),
        Some(4)
    );
    assert_eq!(dhom(&["frobnicate"]).status.code(), Some(4));
}

#[test]
fn corrupted_fixture_fails_all() {
    let fx = Fixture {
        nu: 1.2,
        samples: 50,
        ..Fixture::default()
    };
    let lines = run_suite(Suite::All, &fx);
    assert!(lines
        .iter()
        .any(|l| !l.pass && l.name.starts_with("quantizer")));
    assert!(lines
        .iter()
        .filter(|l| l.name.starts_with("dilation"))
        .all(|l| l.pass));
}
