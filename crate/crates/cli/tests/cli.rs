use std::path::PathBuf;
use std::process::{Command, Output};

fn formation(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formation"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn scenario(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "scenarios", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

const BAD_AREA: &str = r#"
agents = 3
[[edges]]
agents = [1, 2]
distance = 2.0
[[edges]]
agents = [2, 3]
distance = 6.082762530298219
[[edges]]
agents = [1, 3]
distance = 6.082762530298219
[[cliques]]
agents = [1, 2, 3]
signed_area = 10.0
gain = 4.0
"#;

#[test]
fn validate_accepts_bundled_scenarios() {
    for name in ["eight_agents.toml", "canonical_b6_c1_k4.toml"] {
        let out = formation(&["validate", &scenario(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert_eq!(stdout(&out).trim(), "valid");
    }
}

#[test]
fn validate_rejects_inconsistent_area() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, BAD_AREA).unwrap();
    let out = formation(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[1, 2, 3]"), "{}", stdout(&out));
}

#[test]
fn unreadable_or_malformed_input_exits_2() {
    let out = formation(&["validate", "/definitely/missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.toml");
    std::fs::write(&path, "agents = \"three\"").unwrap();
    assert_eq!(
        formation(&["validate", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        formation(&["simulate", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(formation(&["analyze", "--b", "1"]).status.code(), Some(2));
    assert_eq!(
        formation(&["analyze", "--b", "0", "--c", "1", "--K", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn analyze_isosceles_reports_thresholds_and_cases() {
    let out = formation(&["analyze", "--b", "6", "--c", "1", "--K", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("K_* = 18"), "{text}");
    assert!(text.contains("K_0 = 1.97142273814"), "{text}");
    assert!(text.contains("equilibria: 1"), "{text}");
    assert!(text.contains("globally convergent: yes"), "{text}");

    let text = stdout(&formation(&["analyze", "--b", "6", "--c", "1", "--K", "4"]));
    assert!(text.contains("equilibria: 3"), "{text}");
    assert!(text.contains("globally convergent: no"), "{text}");
    assert!(text.contains("almost globally convergent: yes"), "{text}");
}

#[test]
fn analyze_flags_boundary_as_degenerate() {
    let text = stdout(&formation(&[
        "analyze", "--b", "1", "--c", "1", "--K", "0.5",
    ]));
    assert!(text.contains("Degenerate"), "{text}");
    assert!(text.contains("boundary"), "{text}");
}

#[test]
fn analyze_offset_target_reports_large_k_verdict() {
    let text = stdout(&formation(&["analyze", "--a", "3", "--b", "1", "--c", "1"]));
    assert!(
        text.contains("a^2/c^2 = 9 > 8: incorrect stable equilibrium exists at large K"),
        "{text}"
    );
    assert!(text.contains("[-2, 1]"), "{text}");
    let text = stdout(&formation(&["analyze", "--a", "1", "--b", "1", "--c", "1"]));
    assert!(text.contains("< 8: unique stable equilibrium"), "{text}");
    let text = stdout(&formation(&[
        "analyze", "--a", "-3", "--b", "1", "--c", "1", "--K", "80",
    ]));
    assert!(text.contains("equilibria at K = 80"), "{text}");
    assert!(text.contains("[1.85536612662, 1.15054485581]"), "{text}");
}

#[test]
fn simulate_eight_agents_converges_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = formation(&[
        "simulate",
        &scenario("eight_agents.toml"),
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("target set (tol 0.001): reached"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x1,y1,x2,y2,x3,y3,x4,y4,x5,y5,x6,y6,x7,y7,x8,y8"
    );
    assert!(lines.next().unwrap().starts_with("0,-4,7.5,"));

    // Same inputs give identical bytes.
    let again = dir.path().join("again.csv");
    formation(&[
        "simulate",
        &scenario("eight_agents.toml"),
        "--output",
        again.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn simulate_reports_flipped_follower_with_exit_1() {
    let out = formation(&["simulate", &scenario("canonical_b6_c1_k4.toml")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("wrong signed area on clique [1, 2, 3]"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn simulate_flags_override_file_settings() {
    let out = formation(&[
        "simulate",
        &scenario("eight_agents.toml"),
        "--method",
        "rk45",
        "--t-max",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("TimeLimit"), "{}", stdout(&out));
    let out = formation(&["simulate", &scenario("eight_agents.toml"), "--step", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn basin_counts_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("basin.csv");
    let out = formation(&[
        "basin",
        "--b",
        "6",
        "--c",
        "1",
        "--K",
        "20",
        "--grid",
        "-10",
        "10",
        "-10",
        "10",
        "--res",
        "5",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("nodes: 25"), "{text}");
    assert!(text.contains("Pa [0, 6] Stable: 25"), "{text}");
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        rows.lines().next().unwrap(),
        "x0,y0,label,x_end,y_end,terminal"
    );
    assert_eq!(rows.lines().count(), 26);
}

#[test]
fn basin_offset_target_finds_two_stable_labels() {
    let out = formation(&[
        "basin", "--a", "3", "--b", "1", "--c", "1", "--K", "80", "--grid", "-6", "6", "-6", "6",
        "--res", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let stable: Vec<&str> = text.lines().filter(|l| l.contains("Stable:")).collect();
    assert_eq!(stable.len(), 2, "{text}");
    assert!(text.contains("[3, 1] Stable"), "{text}");
}

#[test]
fn basin_rejects_bad_grid() {
    let out = formation(&[
        "basin", "--b", "6", "--c", "1", "--K", "20", "--grid", "1", "-1", "0", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = formation(&["basin", "--b", "6", "--c", "1", "--K", "20", "--res", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
