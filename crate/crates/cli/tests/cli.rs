//! End-to-end checks of the `ezone` binary: file formats, documented
//! example values, and exit-code behavior.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn ezone(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ezone"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn ezone")
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

fn scenario() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios/paper.json")
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn frontier_c_contains_straight_dash_vertex() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ezone(
        &[
            "frontier", "--kind", "c", "--config", &scenario(), "--nodes", "201", "--out",
            "c.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let rows = read_csv(&tmp.path().join("c.csv"));
    assert_eq!(rows.len(), 201);
    let mid = &rows[100];
    assert_eq!(mid[0], 0.0);
    assert!((mid[1] - PI / 2.0).abs() < 1e-12);
    assert_eq!(mid[2], 0.0);

    // Sidecar carries the minimum-turn circles.
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("c.json")).unwrap())
            .unwrap();
    let circles = sidecar["min_turn_circles"].as_array().unwrap();
    assert_eq!(circles.len(), 2);
    assert_eq!(circles[0]["radius"].as_f64().unwrap(), 0.25);
}

#[test]
fn frontier_disk_has_constant_radius() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ezone(
        &[
            "frontier", "--kind", "disk", "--v", "1", "--abar", "1", "--t", "2", "--nodes",
            "32", "--out", "d.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    for row in read_csv(&tmp.path().join("d.csv")) {
        let r = row[1].hypot(row[2]);
        assert!((r - 2.0).abs() < 1e-12);
    }
}

#[test]
fn frontier_cs_passes_through_quarter_turn_point() {
    // The quarter-turn endpoint (1, 3 - pi/2) lies on the curve; a uniform
    // parameter grid has no vertex exactly there, so check polyline
    // proximity instead.
    let tmp = tempfile::tempdir().unwrap();
    let out = ezone(
        &[
            "frontier", "--kind", "cs", "--v", "1", "--abar", "1", "--t", "2", "--nodes",
            "201", "--out", "cs.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let rows = read_csv(&tmp.path().join("cs.csv"));
    let target = (1.0, 3.0 - PI / 2.0);
    let mut best = f64::INFINITY;
    for w in rows.windows(2) {
        let (ax, ay) = (w[0][1], w[0][2]);
        let (bx, by) = (w[1][1], w[1][2]);
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((target.0 - ax) * dx + (target.1 - ay) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (px, py) = (ax + t * dx - target.0, ay + t * dy - target.1);
        best = best.min(px.hypot(py));
    }
    assert!(best < 1e-4, "closest polyline distance {best:.2e}");
}

#[test]
fn ez_eval_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    // Stationary target at exactly range R: margin 0, outside.
    let out = ezone(
        &[
            "ez-eval", "--model", "bez", "--v", "1", "--abar", "0.25", "--t", "2", "--mu",
            "0", "--pursuer-x", "0", "--pursuer-y", "0", "--pursuer-heading", "0",
            "--target-x", "2", "--target-y", "0", "--target-heading", "0",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));

    // Target on the shifted center with the zone ahead: inside.
    let out = ezone(
        &[
            "ez-eval", "--model", "cbez", "--v", "1", "--abar", "0.25", "--t", "2", "--mu",
            "0", "--pursuer-x", "0", "--pursuer-y", "0", "--pursuer-heading", "0",
            "--target-x", "0", "--target-y", "0", "--target-heading", "0",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));

    // Boundary case: quarter-turn endpoint of the turn-straight zone. The
    // reported margin must vanish to 1e-8 and the exit code must agree with
    // its sign.
    let out = ezone(
        &[
            "ez-eval", "--model", "csbez", "--v", "1", "--abar", "1", "--t", "2", "--mu",
            "0", "--pursuer-x", "0", "--pursuer-y", "0", "--pursuer-heading", "0",
            "--target-x", "1", "--target-y", "1.4292036732051034", "--target-heading", "0",
        ],
        tmp.path(),
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let margin: f64 = stdout
        .split_whitespace()
        .find_map(|f| f.strip_prefix("margin="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(margin.abs() <= 1e-8, "boundary margin {margin:e}");
    let expected = if margin >= 0.0 { 0 } else { 3 };
    assert_eq!(out.status.code(), Some(expected));
}

#[test]
fn plan_straight_corridor_and_infeasible_start() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ezone(
        &[
            "plan", "--config", &scenario(), "--start", "-3,5", "--goal", "3,5", "--nodes",
            "30", "--out", "p.csv",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("p.json")).unwrap())
            .unwrap();
    let t_f = summary["t_f"].as_f64().unwrap();
    assert!((t_f - 6.0 / 0.9).abs() / (6.0 / 0.9) < 1e-6, "t_f {t_f}");
    assert!(summary["feasible"].as_bool().unwrap());
    // Trajectory rows: t,x,y,psi_T,margin.
    let rows = read_csv(&tmp.path().join("p.csv"));
    assert_eq!(rows.len(), 30);
    assert_eq!(rows[0].len(), 5);

    // A start on the pursuer is inside the disk zone for every heading
    // (d' = mu R < R regardless), so strict avoidance has no feasible
    // initial point. The turn-only zone is different: it vanishes behind
    // the pursuer, so a heading away always escapes it.
    let out = ezone(
        &[
            "plan", "--config", &scenario(), "--model", "bez", "--start", "0,0", "--goal",
            "4,0", "--nodes", "30", "--out", "bad.csv",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(5));
    assert!(tmp.path().join("bad.csv").exists(), "best attempt written");
}

#[test]
fn snapshots_translate_rigidly_with_heading() {
    let tmp = tempfile::tempdir().unwrap();
    // Hand-built trajectory with a rotating heading exercises the orbit of
    // the zone center about the pursuer.
    let mut csv = String::from("t,x,y,psi_T,margin\n");
    for i in 0..5 {
        let t = i as f64;
        let psi = 0.3 * t;
        csv.push_str(&format!("{t},{},{},{psi},1.0\n", 3.0 + t, 2.0));
    }
    std::fs::write(tmp.path().join("traj.csv"), csv).unwrap();

    let out = ezone(
        &[
            "snapshots", "--plan", "traj.csv", "--config", &scenario(), "--model", "cbez",
            "-k", "4", "--nodes", "64", "--out", "snap.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mu = 0.9;
    let range = PI / 2.0;
    let mut edge_lengths: Option<Vec<f64>> = None;
    for i in 0..4 {
        let rows = read_csv(&tmp.path().join(format!("snap_{i}.csv")));
        assert_eq!(rows.len(), 64);
        let lengths: Vec<f64> = rows
            .windows(2)
            .map(|w| (w[1][1] - w[0][1]).hypot(w[1][2] - w[0][2]))
            .collect();
        match &edge_lengths {
            None => edge_lengths = Some(lengths),
            Some(reference) => {
                for (a, b) in reference.iter().zip(&lengths) {
                    assert!((a - b).abs() < 1e-9, "snapshots are congruent");
                }
            }
        }

        let sidecar: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(tmp.path().join(format!("snap_{i}.json"))).unwrap(),
        )
        .unwrap();
        let time = sidecar["time"].as_f64().unwrap();
        let psi = 0.3 * time;
        let cx = sidecar["ez_center"]["x"].as_f64().unwrap();
        let cy = sidecar["ez_center"]["y"].as_f64().unwrap();
        assert!((cx - (-mu * range * psi.cos())).abs() < 1e-9);
        assert!((cy - (-mu * range * psi.sin())).abs() < 1e-9);
    }
}

#[test]
fn validate_rejects_tiny_sample_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ezone(
        &[
            "validate", "--kind", "c", "--config", &scenario(), "--samples", "10", "--out",
            "v.json",
        ],
        tmp.path(),
    );
    assert_ne!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("samples"), "stderr: {stderr}");
}

#[test]
fn validate_passes_on_scenario_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ezone(
        &[
            "validate", "--kind", "cs", "--config", &scenario(), "--samples", "5000",
            "--seed", "3", "--out", "v.json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("v.json")).unwrap())
            .unwrap();
    assert_eq!(report["report"]["violations"].as_u64().unwrap(), 0);
    assert!(report["config"]["mu"].as_f64().unwrap() == 0.9);
}
