//! End-to-end tests of the `cavf` binary: exit codes, file outputs, and
//! override handling.

use std::path::Path;
use std::process::{Command, Output};

fn cavf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// One avoidable obstacle dead ahead.
const SCENARIO: &str = r#"
[agent]
x = -1.0
y = 0.05
v = 1.0
psi_d = 0.0
r_s = 10.0

[control]
gain_mode = "fixed"
gain = 25.0

[mixing]
min_separation = 0.5

[sim]
dt = 0.01
t_final = 8.0

[[obstacles]]
x = 3.0
y = 0.0
r_o = 0.5
r_i = 2.0
a = 1.0
"#;

/// Sensing range too short to react: the vehicle flies into the obstacle.
const BLIND_SCENARIO: &str = r#"
[agent]
x = 0.0
y = 0.0
v = 1.0
psi_d = 0.0
r_s = 0.05

[control]
gain_mode = "fixed"
gain = 25.0

[mixing]
min_separation = 0.5

[sim]
dt = 0.01
t_final = 5.0

[[obstacles]]
x = 2.0
y = 0.0
r_o = 0.3
r_i = 1.0
a = 1.0
"#;

fn write_scenario(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let help = cavf(tmp.path(), &["--help"]);
    assert_eq!(code(&help), 0);
    for sub in ["simulate", "field", "check", "plot", "generate"] {
        assert!(stdout(&help).contains(sub), "--help does not mention {sub}");
    }
    assert!(stdout(&help).contains("Exit codes"));
    assert_eq!(code(&cavf(tmp.path(), &["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&cavf(tmp.path(), &["frobnicate"])), 1);
    assert_eq!(code(&cavf(tmp.path(), &["simulate"])), 1);
    assert_eq!(code(&cavf(tmp.path(), &[])), 1);
}

#[test]
fn missing_scenario_file_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cavf(tmp.path(), &["simulate", "no_such.toml"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("no_such.toml"), "stderr: {}", stderr(&out));
}

#[test]
fn check_reports_scenario_ok() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "sc.toml", SCENARIO);
    let out = cavf(tmp.path(), &["check", "sc.toml"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("scenario OK"), "stdout: {text}");
    assert!(text.contains("1 obstacle(s)"), "stdout: {text}");
}

#[test]
fn check_rejects_a_broken_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "bad.toml", &SCENARIO.replace("r_i = 2.0", "r_i = 0.2"));
    let out = cavf(tmp.path(), &["check", "bad.toml"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("error:"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_writes_the_trajectory_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "sc.toml", SCENARIO);
    let out = cavf(tmp.path(), &["simulate", "sc.toml"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("wrote"), "stdout: {text}");
    assert!(text.contains("collision: no"), "stdout: {text}");
    assert!(text.contains("min clearance"), "stdout: {text}");
    let csv = std::fs::read_to_string(tmp.path().join("sc_trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x,y,psi,u,min_clearance"));
    assert_eq!(csv.lines().count(), 1 + 801, "8 s at dt = 0.01");
}

#[test]
fn simulate_flags_override_the_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "sc.toml", SCENARIO);
    let out = cavf(tmp.path(), &["simulate", "sc.toml", "--t-final", "1.0", "--dt", "0.1"]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(tmp.path().join("sc_trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 11, "1 s at dt = 0.1");
}

#[test]
fn gain_flag_coherence_is_enforced() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "sc.toml", SCENARIO);
    let cases: [(&[&str], &str); 4] = [
        (&["--gain", "25"], "--gain-mode"),
        (&["--gain-mode", "fixed"], "--gain"),
        (&["--gain-mode", "adaptive", "--c-num", "11.5", "--gain", "5"], "--gain"),
        (&["--gain-mode", "separation", "--gain", "3"], "separation"),
    ];
    for (flags, needle) in cases {
        let mut args = vec!["simulate", "sc.toml"];
        args.extend_from_slice(flags);
        let out = cavf(tmp.path(), &args);
        assert_eq!(code(&out), 1, "{flags:?} should be rejected");
        assert!(stderr(&out).contains(needle), "{flags:?} stderr: {}", stderr(&out));
    }
    // A coherent override is accepted.
    let ok = cavf(
        tmp.path(),
        &["simulate", "sc.toml", "--gain-mode", "adaptive", "--c-num", "11.5"],
    );
    assert_eq!(code(&ok), 0, "stderr: {}", stderr(&ok));
}

#[test]
fn collision_sets_exit_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "blind.toml", BLIND_SCENARIO);
    let out = cavf(tmp.path(), &["simulate", "blind.toml"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("collision: yes"), "stdout: {}", stdout(&out));
}

#[test]
fn check_traj_audits_a_flown_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "sc.toml", SCENARIO);
    write_scenario(tmp.path(), "blind.toml", BLIND_SCENARIO);

    // Clean run: exit 0.
    assert_eq!(code(&cavf(tmp.path(), &["simulate", "sc.toml"])), 0);
    let ok = cavf(tmp.path(), &["check", "sc.toml", "--traj", "sc_trajectory.csv"]);
    assert_eq!(code(&ok), 0, "stderr: {}", stderr(&ok));

    // Colliding run: exit 2 and the violation time is reported.
    assert_eq!(code(&cavf(tmp.path(), &["simulate", "blind.toml"])), 2);
    let hit = cavf(tmp.path(), &["check", "blind.toml", "--traj", "blind_trajectory.csv"]);
    assert_eq!(code(&hit), 2);
    assert!(stdout(&hit).contains("first violation at t ="), "stdout: {}", stdout(&hit));

    // Truncated run that never restores the desired heading: exit 1.
    let cut = cavf(tmp.path(), &["simulate", "sc.toml", "--t-final", "3.5"]);
    assert_eq!(code(&cut), 0);
    let miss = cavf(tmp.path(), &["check", "sc.toml", "--traj", "sc_trajectory.csv"]);
    assert_eq!(code(&miss), 1);
    assert!(stderr(&miss).contains("heading not restored"), "stderr: {}", stderr(&miss));
}

#[test]
fn field_exports_the_requested_grid() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "sc.toml", SCENARIO);
    let out = cavf(
        tmp.path(),
        &["field", "sc.toml", "--res", "12", "--bounds", "-2", "6", "-3", "3"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("144 rows"), "stdout: {}", stdout(&out));
    let csv = std::fs::read_to_string(tmp.path().join("sc_field.csv")).unwrap();
    assert!(csv.starts_with("x,y,hx,hy,lambda_min,w_snap"));
    assert_eq!(csv.lines().count(), 1 + 144);
}

#[test]
fn plot_renders_an_svg() {
    let tmp = tempfile::tempdir().unwrap();
    write_scenario(tmp.path(), "sc.toml", SCENARIO);
    let out = cavf(tmp.path(), &["plot", "sc.toml", "--out", "run.svg", "--quiver", "0"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let svg = std::fs::read_to_string(tmp.path().join("run.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "not an SVG: {}", &svg[..svg.len().min(60)]);
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn generate_is_deterministic_and_loadable() {
    let tmp = tempfile::tempdir().unwrap();
    let a = cavf(tmp.path(), &["generate", "--seed", "7", "--count", "4", "--moving", "2"]);
    let b = cavf(tmp.path(), &["generate", "--seed", "7", "--count", "4", "--moving", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "same seed must give identical output");
    let c = cavf(tmp.path(), &["generate", "--seed", "8", "--count", "4", "--moving", "2"]);
    assert_ne!(a.stdout, c.stdout, "different seeds should differ");

    std::fs::write(tmp.path().join("gen.toml"), &a.stdout).unwrap();
    let check = cavf(tmp.path(), &["check", "gen.toml"]);
    assert_eq!(code(&check), 0, "stderr: {}", stderr(&check));
    assert!(stdout(&check).contains("4 obstacle(s)"), "stdout: {}", stdout(&check));
}
