use std::fs;
use std::process::{Command, Output};

fn mvchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvchain"))
        .args(args)
        .env_remove("MVCHAIN_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn roundtrip_examples_pass() {
    for (args, r_th) in [
        (vec!["--scheme", "mv2", "--parts", "2,2,2,2", "--dims", "8,8,8,8"], 36),
        (vec!["--scheme", "mv1", "--parts", "1,1,1"], 1),
        (vec!["--scheme", "mv1", "--parts", "2,3,2", "--dims", "4,6,4"], 36),
    ] {
        let mut full = vec!["roundtrip"];
        full.extend(args);
        let out = mvchain(&full);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let text = stdout(&out);
        assert!(text.contains(&format!("R_th achieved {r_th}, formula {r_th}")), "{text}");
        assert!(text.trim_end().ends_with("PASS"));
    }
}

#[test]
fn roundtrip_plus_grid_and_fixtures() {
    let out = mvchain(&["roundtrip", "--scheme", "mv2", "--parts", "2,2,2,2", "--grid-convention", "plus"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("grid axes [2, 5, 5, 2], evaluations computed 100"));

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "2 2\n1 2\n3 4\n").unwrap();
    fs::write(&b, "# identity\n2 2\n1 0\n0 1\n").unwrap();
    let dump = dir.path().join("dump");
    let out = mvchain(&[
        "roundtrip", "--scheme", "mv1", "--parts", "2,2,1",
        "--matrix", a.to_str().unwrap(), "--matrix", b.to_str().unwrap(),
        "--modulus", "101", "--dump-dir", dump.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(fs::read_to_string(dump.join("product.txt")).unwrap(), "2 2\n1 2\n3 4\n");
    assert_eq!(fs::read_dir(&dump).unwrap().count(), 1 + 4 * 2);
}

#[test]
fn usage_errors_exit_2() {
    let out = mvchain(&["analyze", "--figure", "2", "--p", "10..2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mvchain(&["analyze", "--figure", "7"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mvchain(&["roundtrip", "--scheme", "mv3", "--parts", "2,2,2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mvchain(&["roundtrip", "--scheme", "mv1", "--parts", "2,2,2", "--modulus", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mvchain(&["roundtrip", "--scheme", "mv1", "--parts", "2,2,2", "--dims", "3,4,4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_plan_quotes_constraint() {
    let out = mvchain(&[
        "simulate", "--scheme", "mv1", "--parts", "2,2,2", "--memory", "dedicated",
        "--workers", "3", "--fractions", "1/2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("N * prod s_i >= 1"), "{}", stderr(&out));
}

#[test]
fn analyze_writes_sorted_csv_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_mvchain"))
        .args(["analyze", "--m", "10,5"])
        .env("MVCHAIN_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["fig2.csv", "fig3.csv", "fig4.csv", "table1.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("scheme,memory,m,p,N,metric,value_percent\n"));
        let ms: Vec<u32> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
        assert!(ms.windows(2).all(|w| w[0] <= w[1]));
    }
    let fig2 = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(fig2.lines().count(), 1 + 2 * 49 * 3);
}

#[test]
fn outputs_are_byte_identical() {
    let args = ["simulate", "--scheme", "mv1,mv2", "--parts", "2,2,2", "--workers", "2,3", "--seeds", "0..4"];
    let a = mvchain(&args);
    let b = mvchain(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let a = mvchain(&["analyze", "--table", "1"]);
    let b = mvchain(&["analyze", "--table", "1"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn deterministic_simulation_matches_queue_length() {
    let out = mvchain(&[
        "simulate", "--scheme", "mv1", "--parts", "2,2,2", "--workers", "1,4,5",
        "--latency", "det:0.5", "--seeds", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // R_th = 16: queue lengths 16, 4 and 4 (ceil(16/5)).
    assert!(text.contains("mv1-S-n1,MV1,S,1,3,8.000000,16,0,0"), "{text}");
    assert!(text.contains("mv1-S-n4,MV1,S,4,3,2.000000,16,0,0"));
    assert!(text.contains("mv1-S-n5,MV1,S,5,3,2.000000,16,0,0"));
}

#[test]
fn shared_plans_need_no_extra_results() {
    let out = mvchain(&[
        "simulate", "--scheme", "mv2", "--parts", "2,2,2", "--memory", "shared,dedicated",
        "--workers", "4", "--fractions", "1/2,1,1/2", "--seeds", "0..9",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let runs: Vec<&str> = text.lines().take_while(|l| !l.starts_with("plan_id,scheme,memory,N,runs")).collect();
    let shared: Vec<&&str> = runs.iter().filter(|l| l.starts_with("mv2-S-")).collect();
    assert_eq!(shared.len(), 10);
    assert!(shared.iter().all(|l| l.ends_with(",0")));
    assert_eq!(runs.iter().filter(|l| l.starts_with("mv2-D-")).count(), 10);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "scheme = mv1\nparts = 2,2,2\nseed = 5\nlatency = det:2\nseeds = 1\nworkers = 2\n").unwrap();
    let out = mvchain(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("mv1-S-n2,MV1,S,2,1,16.000000"));
    let out = mvchain(&["simulate", "--config", cfg.to_str().unwrap(), "--workers", "4"]);
    assert!(stdout(&out).contains("mv1-S-n4,MV1,S,4,1,8.000000"));

    fs::write(&cfg, "scheme = mv1\nbogus = 1\n").unwrap();
    let out = mvchain(&["roundtrip", "--config", cfg.to_str().unwrap(), "--parts", "1,1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown key 'bogus'"));
}

#[test]
fn help_lists_commands() {
    let out = mvchain(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for cmd in ["analyze", "roundtrip", "simulate"] {
        assert!(text.contains(cmd));
    }
}
