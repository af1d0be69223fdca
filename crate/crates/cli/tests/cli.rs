use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wmlq_cli::format::{parse_instance, render_instance, InstanceFile};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn wmlq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmlq")).args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut all = vec!["generate"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = wmlq(&all);
    assert!(out.status.success(), "{}", text(&out.stderr));
    path
}

#[test]
fn tight_a_greedy_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "ta.txt", &["tight-a", "--k", "4"]);
    let f: InstanceFile = parse_instance(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!((f.instance.num_posts(), f.instance.num_applicants()), (5, 20));

    let out = wmlq(&["solve", inst.to_str().unwrap(), "--algo", "greedy"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).starts_with("sol 4 4\n"));
    let summary = text(&out.stderr);
    assert!(summary.contains("objective 4") && summary.contains("approximate factor 5"), "{summary}");

    let sol = dir.path().join("o.sol");
    let out = wmlq(&["solve", inst.to_str().unwrap(), "--algo", "oracle", "--out", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = text(&out.stderr);
    assert!(summary.contains("objective 20") && summary.contains("exact"), "{summary}");
    let out = wmlq(&["verify", inst.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout), "ok objective 20\n");
}

#[test]
fn auto_routes_small_quotas_to_u2() {
    let out = wmlq(&["solve", fixture("instances/five_posts.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = text(&out.stderr);
    assert!(summary.contains("algorithm u2") && summary.contains("exact"), "{summary}");
}

#[test]
fn exit_codes() {
    let heavy = fixture("instances/closed_heavy.txt");
    let out = wmlq(&["solve", heavy.to_str().unwrap(), "--algo", "all-open"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "tri.txt", &["triangle", "--k", "4", "--u", "6"]);
    let out = wmlq(&["solve", inst.to_str().unwrap(), "--algo", "twdp", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let out = wmlq(&["solve", "/nonexistent/file"]);
    assert_eq!(out.status.code(), Some(1));
    let out = wmlq(&["solve", inst.to_str().unwrap(), "--algo", "u2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("post"));
}

#[test]
fn verify_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture("instances/weighted_mixed.txt");
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let twice = write("twice.sol", "sol 12 2\na 1 1\na 1 2\n");
    let out = wmlq(&["verify", inst.to_str().unwrap(), twice.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains("applicant a1"), "{}", text(&out.stdout));
    let off = write("off.sol", "sol 10 1\na 2 3\n");
    let out = wmlq(&["verify", inst.to_str().unwrap(), off.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains("objective"));
    let ok = write("ok.sol", "sol 9 1\na 2 3\n");
    assert_eq!(wmlq(&["verify", inst.to_str().unwrap(), ok.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn generate_is_deterministic_and_canonical() {
    let args = ["generate", "random", "--seed", "1", "--applicants", "30", "--posts", "6"];
    let a = wmlq(&args);
    let b = wmlq(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let body = text(&a.stdout);
    let f: InstanceFile = parse_instance(&body).unwrap();
    assert_eq!(render_instance(&f), body);
    let mis = wmlq(&["generate", "mis-cubic", "--graph", fixture("graphs/k4.txt").to_str().unwrap()]);
    let f: InstanceFile = parse_instance(&text(&mis.stdout)).unwrap();
    assert_eq!((f.instance.num_posts(), f.instance.num_applicants()), (4, 6));
    let bad = wmlq(&["generate", "mis-cubic", "--graph", fixture("graphs/triangle.txt").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(text(&bad.stderr).contains("not cubic"));
}

#[test]
fn bench_over_directory_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let out = wmlq(&[
        "bench",
        "--dir",
        fixture("instances").to_str().unwrap(),
        "--algos",
        "greedy,oracle,twdp",
        "--csv",
        csv.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5 * 3);
    let keys: Vec<(String, String)> = rows.iter().map(|r| (r[0].to_string(), r[6].to_string())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &rows {
        assert_eq!(&r[12], "ok");
        let ratio: f64 = r[11].parse().unwrap();
        let u_max: f64 = r[4].parse().unwrap();
        assert!(ratio >= 1.0 && ratio <= u_max + 1.0, "{r:?}");
    }

    let out = wmlq(&["bench", "--sweep", "triangle:k=4,u=1..6", "--algos", "twdp"]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let cells: Vec<u64> = rdr.records().map(|r| r.unwrap()[9].parse().unwrap()).collect();
    assert_eq!(cells.len(), 6);
    assert!(cells.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn bench_on_empty_directory_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = wmlq(&["bench", "--dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        text(&out.stdout),
        "instance,num_applicants,num_posts,num_edges,u_max,width_estimate,algorithm,objective,exact,cells,elapsed_ms,ratio,status\n"
    );
}

#[test]
fn bench_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a_broken.txt"), "wmlq 1 1 2\np 1 1 1\ne 1 1 1\n").unwrap();
    std::fs::copy(fixture("instances/single_edge.txt"), dir.path().join("b_ok.txt")).unwrap();
    let out = wmlq(&["bench", "--dir", dir.path().to_str().unwrap(), "--algos", "greedy"]);
    assert!(out.status.success());
    let body = text(&out.stdout);
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("a_broken.txt") && lines[1].contains("error"));
    assert!(lines[2].starts_with("b_ok.txt") && lines[2].ends_with(",ok"));
}

#[test]
fn bench_greedy_ratio_stays_within_bound() {
    let out = wmlq(&["bench", "--sweep", "random:seed=0..99,a=6,p=3", "--algos", "greedy,oracle", "--jobs", "4"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 200);
    for r in rows.iter().filter(|r| &r[6] == "greedy") {
        let ratio: f64 = r[11].parse().unwrap();
        let u_max: f64 = r[4].parse().unwrap();
        assert!(ratio <= u_max + 1.0, "{r:?}");
    }
}
