//! Acceptance suite: one test per criterion, each printing a
//! `[acceptance] criterion N (<name>): PASS/FAIL` line and panicking on
//! failure. Criteria with a stated runtime budget are timed and fail when
//! the budget is exceeded; the suite is serialized so timings are not
//! distorted by parallel test execution.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::Vector2;

use cavf::angles::wrap_angle;
use cavf::{
    cavf_moving, cavf_static, check_collision, control_mixed, control_tracking, gamma, lambda,
    load_scenario, mixed_cavf_with, run, solve_relative_speed, step, tracking_gain, AgentState,
    CavfParams, ControlConfig, GainMode, MixConfig, Obstacle, RelativeState, Scenario, SimConfig,
    SimMode, TieBreak,
};

static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(n: usize, name: &str, budget: Option<Duration>, body: impl FnOnce()) {
    let _guard = SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    match result {
        Ok(()) => {
            if let Some(budget) = budget {
                if elapsed > budget {
                    println!(
                        "[acceptance] criterion {n} ({name}): FAIL \
                         (runtime {elapsed:.2?} exceeds budget {budget:.2?})"
                    );
                    panic!("criterion {n} exceeded its runtime budget: {elapsed:?} > {budget:?}");
                }
            }
            println!("[acceptance] criterion {n} ({name}): PASS ({elapsed:.2?})");
        }
        Err(cause) => {
            println!("[acceptance] criterion {n} ({name}): FAIL ({elapsed:.2?})");
            resume_unwind(cause);
        }
    }
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("..").join("..").join("scenarios")
}

fn obstacle(a: f64, r_o: f64, r_i: f64, psi_d: f64, v_o: f64, theta_o: f64) -> Obstacle {
    Obstacle { center: Vector2::zeros(), v_o, theta_o, cavf: CavfParams::new(a, r_o, r_i, psi_d).unwrap() }
}

// ---------------------------------------------------------------------------
// 1. Field definition: surface compliance over >= 720 samples per config.
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_cavf_definition() {
    criterion(1, "CAVF definition suite", Some(Duration::from_secs(1)), || {
        let v = 1.0;
        let angles: Vec<f64> = (0..720).map(|k| (k as f64 + 0.31) * TAU / 720.0).collect();
        for a in [0.1, 0.3, 1.0, 3.0, 10.0] {
            let obs = obstacle(a, 1.0, 3.0, 0.0, 0.0, 0.0);
            for &th in &angles {
                let p = obs.surface_point(th);
                let e_r = p - obs.center;
                let sample = cavf_static(p, &obs, v).unwrap();
                let radial = sample.velocity.dot(&e_r);
                assert!(radial.abs() < 1e-9, "static a={a} th={th}: radial {radial}");
                assert!((sample.velocity.norm() - v).abs() < 1e-9);
            }
        }
        let obs = obstacle(1.0, 1.0, 3.0, 0.0, 0.9, 2.35);
        let o_hat = Vector2::new(obs.theta_o.cos(), obs.theta_o.sin());
        for &th in &angles {
            let p = obs.surface_point(th);
            let e_r = p - obs.center;
            let alpha = obs.v_o * o_hat.dot(&e_r);
            let sample = cavf_moving(p, &obs, v).unwrap();
            let radial = sample.velocity.dot(&e_r);
            assert!((radial - alpha).abs() < 1e-9, "moving th={th}: {radial} vs {alpha}");
            assert!((sample.velocity.norm() - v).abs() < 1e-9);
        }
    });
}

// ---------------------------------------------------------------------------
// 2. Direction profile: exact boundary values, range, sector continuity,
//    monotone radial modulation.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_lambda_gamma() {
    criterion(2, "lambda/gamma suite", Some(Duration::from_secs(1)), || {
        for (a, psi_d) in [(1.0, 0.0), (0.3, 2.5), (10.0, 0.0)] {
            let params = CavfParams::new(a, 1.0, 3.0, psi_d).unwrap();
            // Exact boundary values.
            assert_eq!(gamma(1.0, &params).unwrap(), 0.0);
            assert_eq!(gamma(3.0, &params).unwrap(), 1.0);
            assert_eq!(gamma(2.0, &params).unwrap(), 0.5);
            for k in 0..36 {
                let th = k as f64 * TAU / 36.0;
                assert_eq!(lambda(1.0, th, &params).unwrap(), 0.0);
                assert_eq!(lambda(3.5, th, &params).unwrap(), 1.0);
            }
            // Monotone gamma over a 3600-point radial grid.
            let mut prev = -1.0;
            for k in 0..=3600 {
                let r = 1.0 + 2.0 * k as f64 / 3600.0;
                let g = gamma(r, &params).unwrap();
                assert!(g >= prev, "gamma not monotone at r={r}: {g} < {prev}");
                prev = g;
            }
            // 3600-point angular sweeps: range, smoothness, and one-sided
            // limits at the two sector boundaries psi_d +/- pi/2.
            let boundaries = [wrap_angle(psi_d + FRAC_PI_2), wrap_angle(psi_d - FRAC_PI_2)];
            for r in [1.3, 2.0, 2.7] {
                let sweep: Vec<(f64, f64)> = (0..3600)
                    .map(|k| {
                        let th = -PI + (k as f64 + 0.5) * TAU / 3600.0;
                        (th, lambda(r, th, &params).unwrap())
                    })
                    .collect();
                for pair in sweep.windows(2) {
                    let (th0, l0) = pair[0];
                    let (th1, l1) = pair[1];
                    assert!((0.0..=1.0).contains(&l0), "lambda({r},{th0}) = {l0}");
                    assert!(
                        (l1 - l0).abs() < 1.2e-3,
                        "rough sweep at r={r}, th={th1}: |{l1} - {l0}|"
                    );
                    for b in boundaries {
                        if (th0 < b && b <= th1) || (th0 < b - TAU && b - TAU <= th1) {
                            let b = if th0 < b && b <= th1 { b } else { b - TAU };
                            let eps = 1e-9;
                            let below = lambda(r, b - eps, &params).unwrap();
                            let above = lambda(r, b + eps, &params).unwrap();
                            let jump = (above - below).abs();
                            assert!(jump < 1e-6, "jump {jump} at r={r}, boundary {b}");
                        }
                    }
                }
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 3. Streamline conservation in the exact single-obstacle closed loop.
// ---------------------------------------------------------------------------

/// Inertial heading whose relative velocity points along `psi_b`, i.e. the
/// entry-manifold condition `phi = beta` at the influence boundary.
fn entry_heading(obs: &Obstacle, v: f64) -> (f64, f64) {
    let probe = obs.center + Vector2::new(2.0 * obs.r_i(), 0.0);
    let psi_b = RelativeState::from_inertial(probe, 0.0, v, obs).unwrap().psi_b;
    // The library's chi is measured between the reversed relative course and
    // the obstacle course.
    let chi = wrap_angle(psi_b + PI - obs.theta_o);
    let v_b = solve_relative_speed(v, obs.v_o, chi).unwrap();
    let vel = v_b * Vector2::new(psi_b.cos(), psi_b.sin())
        + obs.v_o * Vector2::new(obs.theta_o.cos(), obs.theta_o.sin());
    assert!((vel.norm() - v).abs() < 1e-12);
    (psi_b, vel.y.atan2(vel.x))
}

/// `|V_b (cos phi - lambda cos beta)|` for samples inside the annulus.
fn manifold_residual(t: f64, x: f64, y: f64, psi: f64, obs: &Obstacle, v: f64) -> Option<f64> {
    let advanced = obs.advanced(t);
    let p = Vector2::new(x, y);
    let r = (p - advanced.center).norm();
    if !(r >= advanced.r_o() && r <= advanced.r_i()) {
        return None;
    }
    let state = RelativeState::from_inertial(p, psi, v, &advanced).unwrap();
    let params = CavfParams { psi_d: state.psi_b, ..advanced.cavf };
    let lam = lambda(state.r, state.theta, &params).unwrap();
    Some((state.v_b * (state.phi.cos() - lam * state.beta.cos())).abs())
}

#[test]
fn criterion_3_streamline_conservation() {
    criterion(3, "streamline conservation", Some(Duration::from_secs(10)), || {
        let v = 1.0;
        let configs = [
            (obstacle(1.0, 1.0, 3.0, 0.0, 0.0, 0.0), 16.0),
            (obstacle(1.0, 1.0, 3.0, 0.0, 0.9, 2.35), 40.0),
        ];
        for (obs, t_final) in configs {
            let (psi_b, psi_i) = entry_heading(&obs, v);
            for k in 0..36 {
                // Entry bearings spanning the upstream half of the influence
                // circle in the relative frame.
                let th = psi_b + FRAC_PI_2 + (k as f64 + 0.5) * PI / 36.0;
                let p0 = obs.center + obs.r_i() * Vector2::new(th.cos(), th.sin());
                let agent =
                    AgentState { x: p0.x, y: p0.y, psi: psi_i, v, psi_d: 0.0, r_s: 12.0 };
                let sc = Scenario {
                    name: None,
                    agent,
                    obstacles: vec![obs.clone()],
                    control: ControlConfig::default(),
                    mixing: MixConfig::default(),
                    sim: SimConfig { dt: 0.005, t_final, mode: SimMode::ExactSingle, seed: 0 },
                };
                let traj = run(&sc).unwrap();
                assert!(traj.collision.is_none(), "entry {k}: collision");
                let report = check_collision(&traj);
                assert!(report.min_clearance > 0.0, "entry {k}: {report:?}");
                let mut worst: f64 = 0.0;
                for s in &traj.samples {
                    if let Some(res) = manifold_residual(s.t, s.x, s.y, s.psi, &obs, v) {
                        worst = worst.max(res);
                    }
                }
                assert!(worst < 1e-6, "v_o={} entry {k}: residual {worst}", obs.v_o);
                let last = traj.samples.last().unwrap();
                let adv = obs.advanced(last.t);
                let r_end = (Vector2::new(last.x, last.y) - adv.center).norm();
                assert!(r_end > adv.r_i(), "v_o={} entry {k}: still inside", obs.v_o);
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 4. Mixing: surface identity, and heading-rate consistency against a
//    finite-difference oracle on a two-obstacle overlap.
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_mixing() {
    criterion(4, "mixing suite", Some(Duration::from_secs(5)), || {
        let v = 1.0;
        let mix = MixConfig::default();
        let tie = TieBreak::default();
        let cfg = ControlConfig::default();
        let mut upper = obstacle(1.0, 1.0, 3.0, 0.0, 0.0, 0.0);
        upper.center = Vector2::new(0.0, 1.6);
        let mut lower = upper.clone();
        lower.center = Vector2::new(0.0, -1.6);
        let obstacles = [upper.clone(), lower.clone()];

        // Surface identity: on either surface the blend snaps to that
        // obstacle and reproduces its own field.
        for (j, obs) in obstacles.iter().enumerate() {
            for k in 0..360 {
                let p = obs.surface_point(k as f64 * TAU / 360.0);
                let mixed = mixed_cavf_with(p, &obstacles, v, &mix, tie).unwrap();
                assert_eq!(mixed.weights.snapped_index, Some(j), "no snap at surface {j}");
                let own = cavf_moving(p, obs, v).unwrap();
                let gap = (mixed.field.velocity - own.velocity).norm();
                assert!(gap < 1e-9, "surface identity off by {gap} on obstacle {j}");
            }
        }

        // Finite-difference heading-rate oracle (probe step h = 1e-4 s):
        // the numerical rate of the blended-field heading along the flow
        // must match the weighted commanded rate.
        let field =
            |p: Vector2<f64>| mixed_cavf_with(p, &obstacles, v, &mix, tie).unwrap().field.velocity;
        let fd_oracle = |p: Vector2<f64>, vel: Vector2<f64>| -> f64 {
            let h = 1e-4;
            let fwd = field(p + h * vel);
            let bwd = field(p - h * vel);
            wrap_angle(fwd.y.atan2(fwd.x) - bwd.y.atan2(bwd.x)) / (2.0 * h)
        };
        let weighted_rate = |p: Vector2<f64>, vel: Vector2<f64>| -> f64 {
            let psi = vel.y.atan2(vel.x);
            let agent = AgentState { x: p.x, y: p.y, psi, v, psi_d: 0.0, r_s: 20.0 };
            control_mixed(&agent, &obstacles, &cfg, &mix).unwrap().u
        };

        // First pass: ride the blended field down the shared corridor
        // between the two influence regions and probe while both obstacles
        // are in range.
        let dt = 1e-3;
        let mut p = Vector2::new(-5.5, 0.0);
        let mut corridor = 0;
        for i in 0..11_000 {
            if i % 50 == 0
                && (p - upper.center).norm() < upper.r_i()
                && (p - lower.center).norm() < lower.r_i()
            {
                let vel = field(p);
                let (u_m, fd) = (weighted_rate(p, vel), fd_oracle(p, vel));
                assert!((u_m - fd).abs() < 1e-3, "corridor {p:?}: u_m = {u_m}, fd = {fd}");
                corridor += 1;
            }
            let k1 = field(p);
            let k2 = field(p + 0.5 * dt * k1);
            let k3 = field(p + 0.5 * dt * k2);
            let k4 = field(p + dt * k3);
            p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert!(corridor >= 80, "only {corridor} corridor probes in range");

        // Second pass: points hugging the upper ring inside the overlap,
        // where the blend is pinned to the nearest obstacle and the
        // commanded rate is far from zero.
        for k in 0..40 {
            let th = -2.6 + 2.0 * k as f64 / 39.0;
            let p = upper.center + 1.05 * Vector2::new(th.cos(), th.sin());
            assert!((p - lower.center).norm() < lower.r_i(), "arc point left the overlap");
            let mixed = mixed_cavf_with(p, &obstacles, v, &mix, tie).unwrap();
            assert_eq!(mixed.weights.snapped_index, Some(0), "no snap at {p:?}");
            let vel = mixed.field.velocity;
            let (u_m, fd) = (weighted_rate(p, vel), fd_oracle(p, vel));
            assert!((u_m - fd).abs() < 1e-3, "ring {p:?}: u_m = {u_m}, fd = {fd}");
        }
    });
}

// ---------------------------------------------------------------------------
// 5. Tracking-gain bound.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_tracking_gain() {
    criterion(5, "tracking-gain bound", Some(Duration::from_secs(1)), || {
        let (v, e_psi, delta) = (1.0, 0.01, 0.516);
        let k_formula = tracking_gain(v, e_psi, delta).unwrap();
        assert!((k_formula - 22.29).abs() < 0.01, "gain formula gave {k_formula}");
        let dt = 1e-3;
        let n_steps = (delta / (2.0 * v) / dt).round() as usize;
        for k in [k_formula, 25.0] {
            for c in [PI, FRAC_PI_2, 0.1] {
                let mut agent = AgentState { x: 0.0, y: 0.0, psi: c, v, psi_d: 0.0, r_s: 1.0 };
                for _ in 0..n_steps {
                    let u = control_tracking(&agent, 0.0, 0.0, k).u;
                    agent = step(&agent, u, dt);
                }
                let e = wrap_angle(agent.psi).abs();
                assert!(e <= e_psi, "K={k}, c={c}: error {e} after delta/2");
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 6. Bundled scenario reproduction.
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_scenario_reproduction() {
    criterion(6, "scenario reproduction", Some(Duration::from_secs(30)), || {
        let dir = scenarios_dir();
        let s1 = load_scenario(dir.join("scenario1_forest.toml")).unwrap();
        assert_eq!(s1.obstacles.len(), 12);
        assert!(s1.obstacles.iter().all(|o| o.v_o == 0.0 && o.r_o() == 0.3 && o.r_i() == 2.0));
        assert!(s1.obstacles.iter().all(|o| o.cavf.a == 1.0));
        assert_eq!((s1.agent.x, s1.agent.y), (0.0, 1.3));
        assert_eq!((s1.agent.v, s1.agent.psi_d, s1.agent.r_s), (1.0, 0.0, 12.0));
        assert_eq!(s1.agent.psi, s1.agent.psi_d);
        assert_eq!(s1.control.gain_mode, GainMode::Fixed { k: 25.0 });
        assert_eq!(s1.control.e_psi, 0.01);
        assert_eq!(s1.mixing.min_separation, 0.516);

        let s2 = load_scenario(dir.join("scenario2_airspace.toml")).unwrap();
        assert_eq!(s2.obstacles.len(), 5);
        assert!(s2.obstacles.iter().all(|o| o.v_o > 0.0 && o.v_o < 1.0));
        assert!(s2.obstacles.iter().all(|o| o.r_o() == 0.3 && o.r_i() == 3.0));
        assert_eq!((s2.agent.x, s2.agent.y), (-3.3, 0.0));
        assert_eq!(s2.control.gain_mode, GainMode::Adaptive { c_num: 11.5 });

        let s3 = load_scenario(dir.join("scenario3_clutter.toml")).unwrap();
        assert!(s3.obstacles.len() >= 6);
        assert!(s3.obstacles.iter().any(|o| o.v_o > 0.0) && s3.obstacles.iter().any(|o| o.v_o == 0.0));
        assert_eq!(s3.control.gain_mode, GainMode::Adaptive { c_num: 11.5 });

        for (name, sc) in [("scenario 1", &s1), ("scenario 2", &s2), ("scenario 3", &s3)] {
            let traj = run(sc).unwrap();
            assert!(traj.collision.is_none(), "{name}: collision");
            let report = check_collision(&traj);
            assert!(report.min_clearance > 0.0, "{name}: {report:?}");
            assert!(
                report.final_heading_error <= sc.control.e_psi,
                "{name}: final heading error {}",
                report.final_heading_error
            );
            assert!(report.ok, "{name}: {report:?}");
        }
    });
}

// ---------------------------------------------------------------------------
// 7. Integrator order of convergence.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_integrator_order() {
    criterion(7, "integrator order", None, || {
        // Analytic constant-rate arc endpoint for V = 1, u = 1, T = 2.
        let target = Vector2::new(0.90929742682568171, 1.4161468365471424);
        let endpoint_error = |dt: f64| {
            let mut a = AgentState { x: 0.0, y: 0.0, psi: 0.0, v: 1.0, psi_d: 0.0, r_s: 1.0 };
            for _ in 0..(2.0 / dt).round() as usize {
                a = step(&a, 1.0, dt);
            }
            (Vector2::new(a.x, a.y) - target).norm()
        };
        let errors: Vec<f64> =
            [0.2, 0.1, 0.05, 0.025].iter().map(|&dt| endpoint_error(dt)).collect();
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(
                (14.0..=18.0).contains(&ratio),
                "error ratio {ratio} outside [14, 18] ({errors:?})"
            );
        }
    });
}

// ---------------------------------------------------------------------------
// 8. Byte-identical repeated simulation through the CLI.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_determinism() {
    criterion(8, "determinism", None, || {
        let bin = env!("CARGO_BIN_EXE_cavf");
        let dir = scenarios_dir();
        for name in ["scenario1_forest", "scenario2_airspace", "scenario3_clutter"] {
            let scenario = dir.join(format!("{name}.toml"));
            let tmp = tempfile::tempdir().unwrap();
            let mut outputs = Vec::new();
            for sub in ["first", "second"] {
                let out = tmp.path().join(sub);
                let result = Command::new(bin)
                    .arg("simulate")
                    .arg(&scenario)
                    .arg("--out")
                    .arg(&out)
                    .output()
                    .unwrap();
                assert!(
                    result.status.success(),
                    "{name}: simulate exited with {}",
                    result.status
                );
                outputs.push(std::fs::read(out.join(format!("{name}_trajectory.csv"))).unwrap());
            }
            assert_eq!(outputs[0], outputs[1], "{name}: trajectory files differ");
            assert!(!outputs[0].is_empty());
        }
    });
}
