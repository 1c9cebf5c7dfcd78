use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bayesrank_core::io::{read_draws, StatementReport};
use bayesrank_core::{compute_statement, count_pairwise, Action, RewardConfig};
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn bayesrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bayesrank"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("BAYESRANK_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = bayesrank(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Samples the tiny fixture into `dir` with the given draw count.
fn tiny_draws(dir: &Path, draws: usize) -> PathBuf {
    let n = draws.to_string();
    ok(&[
        "sample",
        "--encounters",
        s(&fixture("tiny_encounters.csv")),
        "--out-dir",
        s(dir),
        "--chains",
        "2",
        "--burn-in",
        "20",
        "--thin",
        "1",
        "--draws",
        &n,
        "--seed",
        "7",
    ]);
    dir.join("players.csv")
}

#[test]
fn sample_writes_the_requested_rows_and_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 10);
    let text = fs::read_to_string(&players).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 12);
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(
        diag["diagnostics"]["draws_per_chain"],
        serde_json::json!([5, 5])
    );
    assert_eq!(diag["prior"]["kind"], "half-cauchy-normal");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sample.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["subcommand"], "sample");
    assert_eq!(manifest["seed"], 7);
    let outputs = manifest["outputs"].as_array().unwrap();
    let players_entry = outputs
        .iter()
        .find(|o| o["path"].as_str().unwrap().ends_with("players.csv"))
        .unwrap();
    assert_eq!(players_entry["sha256"], sha256(&players));
}

#[test]
fn golden_seed_reproduces_the_checked_in_digest() {
    let golden = fs::read_to_string(fixture("golden_draws.sha256")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 10);
    assert_eq!(sha256(&players), golden.trim());
}

#[test]
fn worker_count_does_not_change_the_draws() {
    let mut digests = Vec::new();
    for workers in ["1", "3"] {
        let dir = tempfile::tempdir().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_bayesrank"))
            .args([
                "sample",
                "--encounters",
                s(&fixture("tiny_encounters.csv")),
                "--out-dir",
                s(dir.path()),
                "--chains",
                "3",
                "--burn-in",
                "10",
                "--thin",
                "2",
                "--draws",
                "30",
            ])
            .env("BAYESRANK_WORKERS", workers)
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        assert!(out.status.success());
        digests.push(sha256(&dir.path().join("players.csv")));
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = bayesrank(&[
        "sample",
        "--encounters",
        s(&missing),
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
}

#[test]
fn out_of_range_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 10);
    for flag in [["--alpha", "1.5"], ["--q", "-0.1"], ["--epsilon", "1"]] {
        let out = bayesrank(&["statements", "--draws", s(&players), flag[0], flag[1]]);
        assert_eq!(out.status.code(), Some(2), "{flag:?}");
    }
    let out = bayesrank(&["sample", "--encounters", "x.csv", "--prior", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 10);
    let out = bayesrank(&[
        "statements",
        "--draws",
        s(&players),
        "--out-dir",
        s(&dir.path().join("st")),
        "--entities",
        "T01_P01,nobody",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = bayesrank(&[
        "sample",
        "--encounters",
        s(&fixture("tiny_encounters.csv")),
        "--out-dir",
        s(&dir.path().join("x")),
        "--burn-in",
        "100",
        "--max-iterations",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_never_replace_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 10);
    let clash = dir.path().join("caterpillar.csv");
    fs::copy(&players, &clash).unwrap();
    let before = fs::read(&clash).unwrap();
    let out = bayesrank(&[
        "export",
        "caterpillar",
        "--draws",
        s(&clash),
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read(&clash).unwrap(), before);
}

/// Naive statement at alpha = 0.025, t = 0.1, gamma = 0.05, q = 0.1 in
/// integer arithmetic: `(members, hold_count, identity cost)`.
fn naive_fixed_statement(rows: &[Vec<f64>]) -> (Vec<usize>, usize, usize) {
    let m = rows.len();
    let l = rows[0].len();
    let wins = |hi: usize, lo: usize| rows.iter().filter(|r| r[hi] > r[lo]).count();
    let mut sets = Vec::new();
    for e in 0..l {
        let below: Vec<usize> = (0..l)
            .filter(|&o| o != e && wins(e, o) * 1000 > 975 * m)
            .collect();
        let above: Vec<usize> = (0..l)
            .filter(|&o| o != e && wins(o, e) * 1000 > 975 * m)
            .collect();
        sets.push((below, above));
    }
    let holds = |i: usize, e: usize| {
        let (below, above) = &sets[e];
        let r = &rows[i];
        let failures = below.iter().filter(|&&o| !(r[e] > r[o])).count()
            + above.iter().filter(|&&o| !(r[o] > r[e])).count();
        failures <= (below.len() + above.len()) / 10
    };
    let members: Vec<usize> = (0..l)
        .filter(|&e| (0..m).filter(|&i| holds(i, e)).count() * 100 >= 95 * m)
        .collect();
    let g = members.len();
    let hold = (0..m)
        .filter(|&i| members.iter().filter(|&&e| !holds(i, e)).count() <= g / 10)
        .count();
    let sizes: usize = members
        .iter()
        .map(|&e| {
            let n = sets[e].0.len() + sets[e].1.len();
            n - n / 10
        })
        .sum();
    (members, if g == 0 { m } else { hold }, (g - g / 10) * sizes)
}

#[test]
fn fixed_action_report_matches_naive_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 200);
    let out_dir = dir.path().join("st");
    ok(&[
        "statements",
        "--draws",
        s(&players),
        "--out-dir",
        s(&out_dir),
    ]);
    let report =
        StatementReport::from_json(&fs::read_to_string(out_dir.join("statement.json")).unwrap())
            .unwrap();
    let draws = read_draws(fs::File::open(&players).unwrap()).unwrap();
    let rows: Vec<Vec<f64>> = (0..draws.num_draws()).map(|i| draws.row(i)).collect();
    let (members, hold, cost) = naive_fixed_statement(&rows);
    let ids: Vec<&str> = members.iter().map(|&e| draws.ids()[e].as_str()).collect();
    let got: Vec<&str> = report.members.iter().map(|m| m.id.as_str()).collect();
    assert_eq!(got, ids);
    assert_eq!(report.hold_count, hold);
    assert_eq!(report.cost, cost as f64);
    assert_eq!(report.action, Action::new(0.025, 0.1, 0.05, 0.1));
    assert!(!out_dir.join("graph.dot").exists());
}

#[test]
fn error_free_action_exports_the_graph() {
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 200);
    let out_dir = dir.path().join("st");
    ok(&[
        "statements",
        "--draws",
        s(&players),
        "--out-dir",
        s(&out_dir),
        "--t",
        "0",
        "--q",
        "0",
        "--gamma",
        "0.5",
    ]);
    let dot = fs::read_to_string(out_dir.join("graph.dot")).unwrap();
    assert!(dot.starts_with("digraph ranking {"));
    // the graph export from the saved report draws the same diagram
    let again = dir.path().join("again");
    ok(&[
        "export",
        "graph",
        "--report",
        s(&out_dir.join("statement.json")),
        "--out-dir",
        s(&again),
    ]);
    let edges = |text: &str| {
        let mut v: Vec<String> = text
            .lines()
            .filter(|l| l.contains("->"))
            .map(String::from)
            .collect();
        v.sort();
        v
    };
    assert_eq!(
        edges(&dot),
        edges(&fs::read_to_string(again.join("graph.dot")).unwrap())
    );
    assert_eq!(
        fs::read_to_string(out_dir.join("rankings.txt"))
            .unwrap()
            .lines()
            .count(),
        fs::read_to_string(again.join("rankings.txt"))
            .unwrap()
            .lines()
            .count()
    );
}

#[test]
fn concentrated_draws_give_the_full_chain() {
    let dir = tempfile::tempdir().unwrap();
    let order = ["e3", "e0", "e5", "e1", "e4", "e2"];
    let ids = ["e0", "e1", "e2", "e3", "e4", "e5"];
    let mut text = ids.join(",") + "\n";
    for _ in 0..50 {
        let row: Vec<String> = ids
            .iter()
            .map(|id| (order.iter().position(|o| o == id).unwrap() as f64 * 2.0).to_string())
            .collect();
        text += &(row.join(",") + "\n");
    }
    let draws = dir.path().join("draws.csv");
    fs::write(&draws, text).unwrap();
    let out_dir = dir.path().join("opt");
    ok(&["optimize", "--draws", s(&draws), "--out-dir", s(&out_dir)]);
    let report =
        StatementReport::from_json(&fs::read_to_string(out_dir.join("optimal.json")).unwrap())
            .unwrap();
    assert_eq!((report.action.t, report.action.q), (0.0, 0.0));
    assert_eq!(report.prob, 1.0);
    assert_eq!(report.search.as_ref().unwrap().starts, 17);
    let rankings = fs::read_to_string(out_dir.join("rankings.txt")).unwrap();
    assert_eq!(rankings, order.join(" < ") + "\n");
}

#[test]
fn optimizer_matches_an_exhaustive_breakpoint_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 200);
    let out_dir = dir.path().join("opt");
    ok(&[
        "optimize",
        "--draws",
        s(&players),
        "--out-dir",
        s(&out_dir),
        "--epsilon",
        "0.1",
    ]);
    let report =
        StatementReport::from_json(&fs::read_to_string(out_dir.join("optimal.json")).unwrap())
            .unwrap();
    assert!(report.prob >= 0.9);

    // Every statement value is attained at a breakpoint of t, gamma or q.
    let draws = read_draws(fs::File::open(&players).unwrap()).unwrap();
    let (l, m) = (draws.num_entities(), draws.num_draws());
    let config = RewardConfig::default().with_epsilon(0.1);
    let b = config.search_box;
    let within = |iv: [f64; 2], v: &f64| iv[0] <= *v && *v <= iv[1];
    let mut ts: Vec<f64> = (1..l)
        .flat_map(|n| (0..=n).map(move |j| j as f64 / n as f64))
        .collect();
    ts.extend(b.t);
    ts.retain(|v| within(b.t, v));
    let mut gammas: Vec<f64> = (0..=m).map(|k| 1.0 - k as f64 / m as f64).collect();
    gammas.extend(b.gamma);
    gammas.retain(|v| within(b.gamma, v));
    let mut qs: Vec<f64> = (1..=l)
        .flat_map(|g| (0..=g).map(move |j| j as f64 / g as f64))
        .collect();
    qs.extend(b.q);
    qs.retain(|v| within(b.q, v));
    let counts = count_pairwise(&draws);
    let mut best = 0.0f64;
    for &alpha in &config.grid() {
        for &t in &ts {
            for &gamma in &gammas {
                for &q in &qs {
                    let st = compute_statement(
                        &draws,
                        &counts,
                        &Action::new(alpha, t, gamma, q),
                        &config,
                    )
                    .unwrap();
                    best = best.max(st.reward);
                }
            }
        }
    }
    assert!(
        report.reward <= best + 1e-9,
        "{} > sweep {best}",
        report.reward
    );
    assert_eq!(report.reward, best);
}

#[test]
fn reward_config_file_is_applied_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let players = tiny_draws(dir.path(), 100);
    let config = dir.path().join("reward.toml");
    fs::write(&config, "h = \"log1p\"\nepsilon = 0.2\n[box]\nalpha = [0.0, 0.05]\nt = [0.0, 0.0]\ngamma = [0.0, 0.5]\nq = [0.0, 0.0]\n").unwrap();
    let out_dir = dir.path().join("opt");
    ok(&[
        "optimize",
        "--draws",
        s(&players),
        "--out-dir",
        s(&out_dir),
        "--config",
        s(&config),
    ]);
    let report =
        StatementReport::from_json(&fs::read_to_string(out_dir.join("optimal.json")).unwrap())
            .unwrap();
    assert_eq!(report.epsilon, Some(0.2));
    assert_eq!((report.action.t, report.action.q), (0.0, 0.0));
    assert!(out_dir.join("graph.dot").exists());

    fs::write(&config, "delta = 3\n").unwrap();
    let out = bayesrank(&[
        "optimize",
        "--draws",
        s(&players),
        "--out-dir",
        s(&out_dir),
        "--config",
        s(&config),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn simulate(dir: &Path, seed: &str) -> String {
    ok(&[
        "simulate",
        "--encounters",
        s(&fixture("tiny_encounters.csv")),
        "--out-dir",
        s(dir),
        "--ks",
        "3",
        "--ms",
        "3",
        "--ss",
        "1",
        "--replicates",
        "1",
        "--chains",
        "2",
        "--burn-in",
        "50",
        "--thin",
        "1",
        "--draws",
        "100",
        "--seed",
        seed,
    ]);
    fs::read_to_string(dir.join("metrics.csv")).unwrap()
}

/// Drops the two timing columns.
fn without_timings(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            f[..f.len() - 2].join(",")
        })
        .collect()
}

#[test]
fn one_cell_simulation_is_one_reproducible_row() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = simulate(a.path(), "5");
    assert_eq!(first.lines().count(), 2);
    assert!(first.starts_with("k,m,d,s,j,level,"));
    assert_eq!(
        without_timings(&first),
        without_timings(&simulate(b.path(), "5"))
    );
}

#[test]
fn generate_and_lineup_export() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "generate",
        "--out-dir",
        s(dir.path()),
        "--teams",
        "2",
        "--players-per-team",
        "6",
        "--encounters",
        "40",
        "--seed",
        "1",
    ]);
    assert_eq!(
        fs::read(dir.path().join("encounters.csv")).unwrap(),
        fs::read(fixture("tiny_encounters.csv")).unwrap()
    );
    let players = tiny_draws(&dir.path().join("fit"), 10);
    let out_dir = dir.path().join("ex");
    ok(&[
        "export",
        "lineups",
        "--draws",
        s(&players),
        "--encounters",
        s(&fixture("tiny_encounters.csv")),
        "--out-dir",
        s(&out_dir),
        "--team",
        "T01",
    ]);
    let lineups = read_draws(fs::File::open(out_dir.join("lineups.csv")).unwrap()).unwrap();
    assert!(lineups.num_entities() > 0);
    let draws = read_draws(fs::File::open(&players).unwrap()).unwrap();
    for (j, id) in lineups.ids().iter().enumerate() {
        let parts: Vec<&str> = id.split('|').collect();
        assert_eq!(parts.len(), 5);
        assert!(parts.iter().all(|p| p.starts_with("T01_")));
        for i in 0..draws.num_draws() {
            let sum: f64 = parts
                .iter()
                .map(|p| draws.value(i, draws.index_of(p).unwrap()))
                .sum();
            assert!((sum - lineups.value(i, j)).abs() < 1e-9);
        }
    }
    ok(&[
        "export",
        "caterpillar",
        "--draws",
        s(&players),
        "--out-dir",
        s(&out_dir),
        "--team",
        "T02",
    ]);
    let cat = fs::read_to_string(out_dir.join("caterpillar.csv")).unwrap();
    assert_eq!(cat.lines().next(), Some("id,q1,median,q3"));
    assert!(cat.lines().skip(1).all(|l| l.starts_with("T02_")));
}
