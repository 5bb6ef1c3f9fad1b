use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn walkmeet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkmeet"))
        .args(args)
        .env_remove("WALKMEET_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Data rows of a CSV, skipping the comment line and the header.
fn rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# walkmeet "));
    lines.next().expect("header");
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn generate_writes_edge_list_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ba.txt");
    let out = walkmeet(&["generate", "--model", "ba", "--n", "1000", "--davg", "6", "--seed", "7", "-o", file.to_str().unwrap()]);
    assert!(out.status.success());
    let stats = rows(&stdout(&out));
    assert_eq!(stats[0][0], "1000");
    assert_eq!(stats[0][3], "5.98800000");
    let graph: walkmeet::Graph = walkmeet::parse_edge_list(&fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(graph.edge_count(), 2994);
}

#[test]
fn generate_small_ba_is_complete() {
    let out = walkmeet(&["generate", "--model", "ba", "--n", "4", "--davg", "6"]);
    assert!(out.status.success());
    let graph: walkmeet::Graph = walkmeet::parse_edge_list(&stdout(&out)).unwrap();
    assert_eq!(graph, walkmeet::Graph::complete(4).unwrap());
    assert!(stderr(&out).contains("n,s1,s2,d_avg,d_std,d_min,w_max"));
}

#[test]
fn sparse_er_generation_fails() {
    let out = walkmeet(&["generate", "--model", "er", "--n", "1000", "--davg", "2", "--max-retries", "20"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("no connected graph after 20 attempts"), "{}", stderr(&out));
}

#[test]
fn analyze_complete_graph_row() {
    let out = walkmeet(&["analyze", "--model", "ba", "--n", "4", "--davg", "6", "--a", "1", "--b", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().nth(1).unwrap() == "a,b,mu_spectral,mu_decomposed,principal,error_bound,lambda2");
    assert_eq!(rows(&text)[0].join(","), "1,2,4.50000000,4.50000000,4.00000000,0.0432098765,-0.333333333");
}

#[test]
fn analyze_default_sweep_gives_ten_close_rows() {
    let out = walkmeet(&["analyze", "--seed", "5"]);
    assert!(out.status.success());
    let mut mus: Vec<f64> = rows(&stdout(&out)).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(mus.len(), 10);
    mus.sort_by(f64::total_cmp);
    let median = (mus[4] + mus[5]) / 2.0;
    assert!(mus.iter().all(|m| (m - median).abs() / median <= 0.05), "{mus:?}");
}

#[test]
fn analyze_odd_ring_principal_is_n() {
    let dir = tempfile::tempdir().unwrap();
    let ring = write(dir.path(), "ring.txt", "0 1\n1 2\n2 3\n3 4\n4 0\n");
    let out = walkmeet(&["analyze", "--graph", &ring, "--b", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(rows(&stdout(&out))[0][4], "5.00000000");
}

#[test]
fn analyze_rejects_bipartite_and_disconnected() {
    let dir = tempfile::tempdir().unwrap();
    let square = write(dir.path(), "square.txt", "0 1\n1 2\n2 3\n3 0\n");
    let out = walkmeet(&["analyze", "--graph", &square, "--b", "3"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("bipartite"));
    let split = write(dir.path(), "split.txt", "0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n");
    let out = walkmeet(&["analyze", "--graph", &split, "--b", "3"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("disconnected"));
}

#[test]
fn node_ids_are_one_based_unless_asked() {
    let out = walkmeet(&["analyze", "--model", "ba", "--n", "4", "--b", "0"]);
    assert!(!out.status.success());
    let out = walkmeet(&["analyze", "--model", "ba", "--n", "4", "--a", "0", "--b", "3", "--zero-based"]);
    assert!(out.status.success());
    assert!(rows(&stdout(&out))[0][..2] == ["0".to_string(), "3".to_string()]);
}

#[test]
fn simulate_complete_graph() {
    let out = walkmeet(&["simulate", "--model", "ba", "--n", "3", "--davg", "4", "--a", "1", "--b", "2", "--runs", "10000"]);
    assert!(out.status.success());
    let row = &rows(&stdout(&out))[0];
    let (mean, se): (f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap());
    assert!((mean - 4.0).abs() <= 3.0 * se, "{mean} ± {se}");
    assert_eq!(row[5], "0");
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let freq = dir.path().join("freq.csv");
    let args = ["simulate", "--n", "200", "--runs", "300", "--b", "50", "--freq-output", freq.to_str().unwrap()];
    let first = walkmeet(&args);
    let first_freq = fs::read(&freq).unwrap();
    let second = walkmeet(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first_freq, fs::read(&freq).unwrap());

    let with_env = Command::new(env!("CARGO_BIN_EXE_walkmeet"))
        .args(&args[..8])
        .env("WALKMEET_SEED", "9")
        .output()
        .unwrap();
    let with_flag = walkmeet(&[&args[..8], &["--seed", "9"]].concat());
    assert_eq!(with_env.stdout, with_flag.stdout);
    assert_ne!(with_env.stdout, first.stdout);
}

#[test]
fn simulate_bipartite_truncates_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "path.txt", "0 1\n1 2\n");
    let out = walkmeet(&["simulate", "--graph", &path, "--a", "1", "--b", "2", "--runs", "20", "--t-max", "100"]);
    assert!(out.status.success());
    let row = &rows(&stdout(&out))[0];
    assert_eq!(row[3], "NaN");
    assert_eq!(row[5], "20");
    assert!(stderr(&out).contains("never meet"));
}

#[test]
fn sweep_marks_failed_cells_and_exits_nonzero() {
    let out = walkmeet(&["sweep", "--ns", "150", "--davgs", "2,6", "--runs", "200", "--pairs", "2", "--max-retries", "30"]);
    assert!(!out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "n,d_avg,model,eps_avg,eps_max,eps_prime_avg,principal,mu_sim,error");
    let table = rows(&text);
    let cells: Vec<String> = table.iter().map(|r| format!("{},{}", r[1], r[2])).collect();
    assert_eq!(cells, ["2.00000000,ba", "2.00000000,er", "6.00000000,ba", "6.00000000,er"]);
    assert!(table[1][8].contains("no connected graph"));
    assert!(table.iter().filter(|r| r[2] == "ba").all(|r| r[8].is_empty()));
}

#[test]
fn sweep_succeeds_when_every_cell_does() {
    let out = walkmeet(&["sweep", "--ns", "150", "--davgs", "6", "--models", "ba", "--runs", "200", "--random-pairs"]);
    assert!(out.status.success());
    let row = &rows(&stdout(&out))[0];
    assert!(row[3].is_empty() && !row[5].is_empty() && row[8].is_empty());
}

#[test]
fn oracle_complete_graph() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("dist.csv");
    let out = walkmeet(&["oracle", "--model", "ba", "--n", "4", "--a", "1", "--b", "2", "--distribution", dist.to_str().unwrap()]);
    assert!(out.status.success());
    let row = &rows(&stdout(&out))[0];
    assert_eq!(&row[2..4], ["4.50000000", "4.50000000"]);
    let probs: Vec<f64> = rows(&fs::read_to_string(&dist).unwrap()).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-8);

    let out = walkmeet(&["oracle", "--model", "ba", "--n", "4", "--target", "3"]);
    assert_eq!(rows(&stdout(&out))[0][2], "3.00000000");
    let out = walkmeet(&["oracle", "--n", "100"]);
    assert!(stderr(&out).contains("above the limit"));
}
