use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn simulate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .output()
        .expect("spawn simulate")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_csv_is_byte_identical_across_invocations_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let base = [
        "--strategy",
        "mcs",
        "--sweep",
        "delta:1,2,4",
        "--cache-sizes",
        "2,8",
        "--runs",
        "2",
        "--seed",
        "42",
        "--events",
        "2000",
    ];
    let first = simulate(&[&base[..], &["--out", path_str(&a), "--workers", "1"]].concat());
    let second = simulate(&[&base[..], &["--out", path_str(&b), "--workers", "3"]].concat());
    assert!(first.status.success() && second.status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "strategy,param,M,beta,n_runs,events,avg_cost,ci95_cost,avg_wait,ci95_wait,avg_queries"
    );
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("mcs,1,2,0.8,2,2000,"));
    assert!(lines[6].starts_with("mcs,4,8,0.8,2,2000,"));

    let stdout = simulate(&base);
    assert!(stdout.status.success());
    assert_eq!(String::from_utf8(stdout.stdout).unwrap(), text);
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    for args in [
        &["--strategy", "pss:1.5"][..],
        &["--strategy", "fastest"],
        &["--strategy", "mcs", "--sweep", "zeta:0,1"],
        &["--strategy", "mincost", "--cache-sizes", "71"],
        &["--config", "/nonexistent/sim.conf", "--strategy", "mincost"],
        &[],
    ] {
        let out = simulate(args);
        assert!(!out.status.success(), "{args:?} succeeded");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}

#[test]
fn config_file_with_cost_matrix_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let costs = dir.path().join("costs.csv");
    fs::write(&costs, "0,1,2\n2,1,0\n").unwrap();
    let conf = dir.path().join("sim.conf");
    fs::write(
        &conf,
        format!(
            "# three servers, two users\nn_servers = 3\nn_users = 2\nn_files = 2\ncache_size = 1\narrival_rate = 0.4\n\
             horizon_events = 500\nstrategy = mincost\ncost_matrix = {}\n",
            costs.display()
        ),
    )
    .unwrap();
    let trace = dir.path().join("trace.txt");
    let out = simulate(&["--config", path_str(&conf), "--runs", "1", "--trace", path_str(&trace)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("mincost,,1,0.8,1,500,"));

    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# time user file server queue_len queries"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().all(|r| r.len() == 6 && r[5] == "0"));
}

#[test]
fn trace_needs_a_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.txt");
    let out = simulate(&[
        "--strategy",
        "pss",
        "--sweep",
        "zeta:0,1",
        "--events",
        "100",
        "--runs",
        "1",
        "--trace",
        path_str(&trace),
    ]);
    assert!(!out.status.success());
}

#[test]
fn allocation_dump_lists_every_server() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("alloc.txt");
    let out = simulate(&[
        "--strategy",
        "minqueue",
        "--cache-sizes",
        "2,8",
        "--events",
        "100",
        "--runs",
        "1",
        "--dump-allocation",
        path_str(&dump),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&dump).unwrap();
    let sections: Vec<&str> = text.lines().filter(|l| l.starts_with("# M=")).collect();
    assert_eq!(sections, ["# M=2", "# M=8"]);
    let line = text.lines().find(|l| l.starts_with("0: ")).unwrap();
    assert_eq!(line[3..].split(',').count(), 2);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 200);
}

#[test]
fn oracle_subcommand() {
    let out = simulate(&["oracle", "mm1", "--lambda", "0.5"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim().parse::<f64>().unwrap(),
        2.0
    );
    let out = simulate(&["oracle", "supermarket", "--lambda", "0.9", "--d", "2"]);
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((value - 2.3527).abs() < 1e-4);
    assert!(!simulate(&["oracle", "mm1", "--lambda", "1.2"]).status.success());
}
