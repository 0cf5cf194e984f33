use std::path::Path;

use ncsync::cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["ncsync"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn fixtures(dir: &Path) {
    let (code, out, _) = run(&["fixtures", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("path3.json"));
}

#[test]
fn simulate_path3_summary() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let topo = dir.path().join("path3.json");
    let trace = dir.path().join("trace.jsonl");
    let (code, out, err) = run(&[
        "simulate",
        "--topology",
        topo.to_str().unwrap(),
        "--scheme",
        "c-dbs",
        "--pe",
        "0",
        "--seed",
        "1",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().next(), Some("slots=4 converged=true"));
    assert_eq!(std::fs::read_to_string(trace).unwrap().lines().count(), 4);
}

#[test]
fn bad_probability_names_the_flag() {
    let (code, _, err) = run(&[
        "simulate",
        "--topology",
        "x.json",
        "--scheme",
        "u-dbs",
        "--pe",
        "1.5",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("--pe"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["simulate", "--bogus"]).0, 2);
    assert_eq!(
        run(&["simulate", "--topology", "x.json", "--scheme", "fast"]).0,
        2
    );
}

#[test]
fn missing_topology_file_is_reported() {
    let (code, _, err) = run(&[
        "simulate",
        "--topology",
        "/nonexistent/t.json",
        "--scheme",
        "u-dbs",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent/t.json"));
}

#[test]
fn disconnected_topology_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let topo = dir.path().join("disconnected4.json");
    let (code, _, err) = run(&[
        "simulate",
        "--topology",
        topo.to_str().unwrap(),
        "--scheme",
        "u-dbs",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("disconnected"));
}

#[test]
fn help_documents_every_flag() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("NCSYNC_THREADS"));
    for sub in ["simulate", "sweep", "fixtures"] {
        assert!(out.contains(sub));
    }
    let (code, sim_help, _) = run(&["simulate", "--help"]);
    assert_eq!(code, 0);
    for flag in [
        "--scheme",
        "--pe",
        "--seed",
        "--topology",
        "--trace",
        "--loss",
    ] {
        assert!(sim_help.contains(flag), "{flag}");
    }
    let (_, sweep_help, _) = run(&["sweep", "--help"]);
    for flag in ["--config", "--out"] {
        assert!(sweep_help.contains(flag), "{flag}");
    }
}

#[test]
fn sweep_writes_identical_csv_twice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "node_sizes = [5, 6]\npe_values = [0.0, 0.1]\nradius_grid = [0.5, 0.8]\nsamples_per_cell = 20\nroot_seed = 3\n",
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let json = dir.path().join("a.json");
    for out in [&a, &b] {
        let (code, stdout, err) = run(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--json",
            json.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(stdout.starts_with("samples=80"));
    }
    let csv = std::fs::read(&a).unwrap();
    assert_eq!(csv, std::fs::read(&b).unwrap());
    assert!(String::from_utf8(csv).unwrap().starts_with(
        "scheme,n,pe,degree_bucket,n_samples,mean_slots,mean_rpg,mean_ops,convergence_rate\n"
    ));
}

#[test]
fn example_sweep_config_parses() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    ncsync::experiment::SweepConfig::load(dir.path().join("sweep.toml")).unwrap();
}
