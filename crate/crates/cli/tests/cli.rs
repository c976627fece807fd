//! End-to-end tests of the `streamsched` binary.

use std::path::Path;
use std::process::{Command, Output};

fn streamsched(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamsched"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_success(output: &Output, what: &str) {
    assert!(
        output.status.success(),
        "{what} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn generate_schedule_simulate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();

    let out = streamsched(
        &[
            "generate", "--family", "montage", "--size", "small", "--seed", "7", "--out",
            "workflow.json",
        ],
        path,
    );
    assert_success(&out, "generate");
    let workflow_text = std::fs::read_to_string(path.join("workflow.json")).unwrap();
    assert!(workflow_text.contains("unit_dp_rate"));
    assert!(workflow_text.contains("\"seed\": 7"));

    let out = streamsched(&["env", "--network", "medium", "--cost", "low", "--seed", "3", "--out", "env.json"], path);
    assert_success(&out, "env");
    let env_text = std::fs::read_to_string(path.join("env.json")).unwrap();
    assert!(env_text.contains("n1-standard-1"));
    assert!(env_text.contains("m4.large"));
    assert!(env_text.contains("F16"));

    for algo in ["greedy", "ga", "fair-share"] {
        let schedule_file = format!("{algo}.json");
        let mut args = vec![
            "schedule",
            "--workflow",
            "workflow.json",
            "--env",
            "env.json",
            "--algo",
            algo,
            "--out",
            &schedule_file,
        ];
        let ga_args = ["--population", "10", "--generations", "4", "--seed", "5"];
        if algo == "ga" {
            args.extend_from_slice(&ga_args);
        }
        let out = streamsched(&args, path);
        assert_success(&out, algo);
        assert!(String::from_utf8_lossy(&out.stderr).contains("objective over 180s"));

        let out = streamsched(
            &[
                "simulate",
                "--workflow",
                "workflow.json",
                "--env",
                "env.json",
                "--schedule",
                &schedule_file,
                "--out",
                "metrics.json",
                "--tick-trace",
                "trace.csv",
            ],
            path,
        );
        assert_success(&out, "simulate");
        let metrics: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path.join("metrics.json")).unwrap()).unwrap();
        assert!(metrics["total_cost_cents"].as_f64().unwrap() > 0.0);
        assert!(metrics["avg_latency_s"].as_f64().unwrap() >= 0.0);
        let trace = std::fs::read_to_string(path.join("trace.csv")).unwrap();
        assert!(trace.lines().count() > 100);
    }
}

#[test]
fn greedy_trace_and_ga_generation_log() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();
    assert_success(
        &streamsched(
            &["generate", "--family", "inspiral", "--size", "30", "--seed", "2", "--out", "wf.json"],
            path,
        ),
        "generate",
    );
    assert_success(&streamsched(&["env", "--out", "env.json"], path), "env");

    let out = streamsched(
        &[
            "schedule", "--workflow", "wf.json", "--env", "env.json", "--algo", "greedy",
            "--trace", "--out", "sched.json",
        ],
        path,
    );
    assert_success(&out, "greedy with trace");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cloud"), "trace missing: {stderr}");

    let out = streamsched(
        &[
            "schedule", "--workflow", "wf.json", "--env", "env.json", "--algo", "ga",
            "--population", "8", "--generations", "3", "--gen-log", "gens.csv", "--out", "ga.json",
        ],
        path,
    );
    assert_success(&out, "ga with generation log");
    let log = std::fs::read_to_string(path.join("gens.csv")).unwrap();
    let mut lines = log.lines();
    assert_eq!(lines.next().unwrap(), "generation,best,mean,worst");
    // Initial population plus three generations.
    assert_eq!(lines.count(), 4);
}

#[test]
fn experiment_and_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();
    let out = streamsched(
        &[
            "experiment", "--scenario", "7", "--range", "high", "--families", "epigenomics",
            "--sizes", "small", "--seeds", "1,2", "--ga-runs", "1", "--out", "results.csv",
            "--timings", "timings.csv",
        ],
        path,
    );
    assert_success(&out, "experiment");

    let results = std::fs::read_to_string(path.join("results.csv")).unwrap();
    let lines: Vec<&str> = results.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 4, "2 seeds x 4 algorithms plus header");
    assert!(lines[0].starts_with("scenario,range,family,size,algorithm,seed,status"));
    assert!(!results.contains("time_ms"), "results CSV must not carry wall-clock columns");
    let timings = std::fs::read_to_string(path.join("timings.csv")).unwrap();
    assert!(timings.lines().next().unwrap().ends_with("time_ms"));

    let out = streamsched(
        &["compare", "--results", "results.csv", "--timings", "timings.csv", "--out", "summary.csv"],
        path,
    );
    assert_success(&out, "compare");
    let summary = std::fs::read_to_string(path.join("summary.csv")).unwrap();
    assert!(summary.contains("median_total_cents"));
    // One summary row per algorithm.
    assert_eq!(summary.lines().count(), 1 + 4);

    // Byte-identical when re-run on the same inputs.
    let out = streamsched(
        &["compare", "--results", "results.csv", "--timings", "timings.csv", "--out", "summary2.csv"],
        path,
    );
    assert_success(&out, "compare rerun");
    assert_eq!(
        std::fs::read(path.join("summary.csv")).unwrap(),
        std::fs::read(path.join("summary2.csv")).unwrap()
    );
}

#[test]
fn schema_errors_exit_nonzero_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();
    std::fs::write(
        path.join("bad.json"),
        r#"{"unit_dp_rate": 1.0, "services": [{"id": "a", "mi": 1000.0, "lambda": 1.0, "gamma": 1.0, "movable": false}], "edges": []}"#,
    )
    .unwrap();
    assert_success(&streamsched(&["env", "--out", "env.json"], path), "env");

    let out = streamsched(
        &["schedule", "--workflow", "bad.json", "--env", "env.json", "--algo", "greedy"],
        path,
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("placement_cloud"), "unexpected error: {stderr}");
}
