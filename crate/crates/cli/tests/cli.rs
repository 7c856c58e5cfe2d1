mod common;

use std::fs;

use common::{check_golden, code, edraw, fixtures, run_fixture, stderr, DRAWINGS};
use serde_json::Value;

fn path(rel: &str) -> String {
    fixtures().join(rel).to_str().unwrap().to_string()
}

#[test]
fn run_matches_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fixture(dir.path(), 2);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), DRAWINGS.len());
    assert!(stdout.contains("flange: views=2 annotations=6 parse_errors=1"));
    for id in DRAWINGS {
        let bytes = fs::read(dir.path().join(format!("{id}.unified.json"))).unwrap();
        check_golden(
            &fixtures().join(format!("run/golden/{id}.unified.json")),
            &bytes,
        )
        .unwrap();
    }
}

#[test]
fn run_outputs_validate() {
    for id in DRAWINGS {
        let out = edraw(&[
            "validate",
            "--input",
            &path(&format!("run/golden/{id}.unified.json")),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
}

#[test]
fn run_failures() {
    let dir = tempfile::tempdir().unwrap();
    let run = fixtures().join("run");
    let out = edraw(&[
        "run",
        "--input",
        run.join("images").to_str().unwrap(),
        "--replay",
        "/nonexistent/replay.json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("/nonexistent/replay.json"));

    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"drawings":{}}"#).unwrap();
    let out = edraw(&[
        "run",
        "--input",
        run.join("images").to_str().unwrap(),
        "--replay",
        empty.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert_eq!(
        err.lines()
            .filter(|l| l.contains("not in replay manifest"))
            .count(),
        DRAWINGS.len(),
        "{err}"
    );

    let bad_cfg = dir.path().join("bad.toml");
    fs::write(&bad_cfg, "crop_padding = -3\n").unwrap();
    let out = edraw(&[
        "run",
        "--input",
        run.join("images").to_str().unwrap(),
        "--replay",
        run.join("replay.json").to_str().unwrap(),
        "--config",
        bad_cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("crop_padding"));
}

#[test]
fn run_stamp_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let run = fixtures().join("run");
    let out = edraw(&[
        "run",
        "--input",
        run.join("images").to_str().unwrap(),
        "--replay",
        run.join("replay.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--stamp",
    ]);
    assert_eq!(code(&out), 0);
    let doc: Value =
        serde_json::from_slice(&fs::read(dir.path().join("shaft.unified.json")).unwrap()).unwrap();
    assert!(doc["extra"]["generated_at"].is_u64());
    let plain = fs::read_to_string(fixtures().join("run/golden/shaft.unified.json")).unwrap();
    assert!(!plain.contains("generated_at"));
}

#[test]
fn parse_command() {
    let out = edraw(&["parse", "--class", "gdt", "⌖|⌀0.1|A|B|C"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["characteristic"], "position");
    assert_eq!(v["datums"].as_array().unwrap().len(), 3);

    let out = edraw(&["parse", "--class", "measure", "R5"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        (v["kind"].as_str(), v["nominal"].as_f64()),
        (Some("radius"), Some(5.0))
    );

    let out = edraw(&["parse", "--class", "roughness", "Rx 1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("at offset 0"));

    let out = edraw(&["parse", "--class", "weld", "x"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn split_command() {
    let dir = tempfile::tempdir().unwrap();
    let ids = dir.path().join("ids.txt");
    fs::write(
        &ids,
        (0..10).map(|i| format!("id{i}\n")).collect::<String>(),
    )
    .unwrap();
    let args = [
        "split",
        "--input",
        ids.to_str().unwrap(),
        "--ratios",
        "0.7,0.2,0.1",
        "--seed",
        "42",
    ];
    let a = edraw(&args);
    let b = edraw(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let sizes: Vec<usize> = v["parts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_array().unwrap().len())
        .collect();
    assert_eq!(sizes, [7, 2, 1]);
    assert_eq!(v["parts"][0][0], "id0");
    assert_eq!(v["parts"][2][0], "id3");

    let out = edraw(&[
        "split",
        "--input",
        ids.to_str().unwrap(),
        "--ratios",
        "0.7,0.2",
    ]);
    assert_eq!(code(&out), 2);
    fs::write(&ids, "a\nb\na\n").unwrap();
    let out = edraw(&["split", "--input", ids.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("duplicate id 'a'"));
}

#[test]
fn stats_command() {
    let out = edraw(&["stats", "--input", &path("dataset")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    check_golden(&fixtures().join("golden/stats.json"), &out.stdout).unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["totals"]["regions"], 10);
    assert_eq!(v["totals"]["annotations"], 5);
    assert_eq!(v["drawings"], 3);

    let out = edraw(&["stats", "--input", "/nonexistent"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn eval_detect_identity() {
    for sub in ["regions", "annotations"] {
        let out = edraw(&[
            "eval-detect",
            "--pred",
            &path(&format!("eval/detect_{sub}/pred")),
            "--gt",
            &path(&format!("eval/detect_{sub}/gt")),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        check_golden(
            &fixtures().join(format!("golden/eval_detect_{sub}.json")),
            &out.stdout,
        )
        .unwrap();
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let group = v["groups"]
            .as_object()
            .unwrap()
            .values()
            .next()
            .unwrap()
            .clone();
        for (_, m) in group["per_class"].as_object().unwrap() {
            assert_eq!(
                (m["precision"].as_f64(), m["recall"].as_f64()),
                (Some(1.0), Some(1.0))
            );
            assert_eq!(
                (m["f1_score"].as_f64(), m["hallucination"].as_f64()),
                (Some(1.0), Some(0.0))
            );
        }
    }
}

#[test]
fn eval_detect_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let (p, g) = (dir.path().join("p"), dir.path().join("g"));
    fs::create_dir_all(&p).unwrap();
    fs::create_dir_all(&g).unwrap();
    fs::write(g.join("a.txt"), "0 0.5 0.5 0.2 0.2\n").unwrap();
    fs::write(p.join("a.txt"), "0 0.5 0.5 0.2 0.2\n").unwrap();
    let args = [
        "eval-detect",
        "--pred",
        p.to_str().unwrap(),
        "--gt",
        g.to_str().unwrap(),
    ];
    let out = edraw(&args);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 1"));

    fs::write(p.join("a.txt"), "0 0.5 0.5 0.2 0.2 0.9\n").unwrap();
    let out = edraw(&[&args[..], &["--iou-threshold", "0"]].concat());
    assert_eq!(code(&out), 2);
    let out = edraw(&[&args[..], &["--format", "csv"]].concat());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("group,class,"));
}

#[test]
fn eval_parse_reproduces_table() {
    let args = [
        "eval-parse",
        "--pred",
        &path("eval/table1_pred.jsonl"),
        "--gt",
        &path("eval/table1_gt.jsonl"),
    ];
    let out = edraw(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    check_golden(
        &fixtures().join("golden/eval_parse_table1.json"),
        &out.stdout,
    )
    .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let m = &v["groups"]["numerical"]["per_class"]["measure"];
    assert_eq!(
        (m["tp"].as_u64(), m["fp"].as_u64(), m["fn"].as_u64()),
        (Some(108), Some(17), Some(1))
    );
    assert!((m["precision"].as_f64().unwrap() - 0.864).abs() < 5e-4);
    assert!((m["recall"].as_f64().unwrap() - 0.991).abs() < 5e-4);
    assert!((m["f1_score"].as_f64().unwrap() - 0.923).abs() < 5e-4);

    let csv = edraw(&[&args[..], &["--format", "csv"]].concat());
    check_golden(
        &fixtures().join("golden/eval_parse_table1.csv"),
        &csv.stdout,
    )
    .unwrap();
}

#[test]
fn validate_rejects_broken_documents() {
    let dir = tempfile::tempdir().unwrap();
    let doc = fs::read_to_string(fixtures().join("run/golden/bracket.unified.json")).unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, doc.replace("\"view-2\"", "\"view-1\"")).unwrap();
    let out = edraw(&["validate", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("unique_view_id"), "{}", stderr(&out));

    fs::write(&bad, &doc[..doc.len() / 2]).unwrap();
    let out = edraw(&["validate", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("byte"));

    let out = edraw(&["validate", "--input", "/nonexistent.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn outputs_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let args = [
        "eval-parse",
        "--pred",
        &path("eval/table1_pred.jsonl"),
        "--gt",
        &path("eval/table1_gt.jsonl"),
    ];
    let out = edraw(&[&args[..], &["--out", report.to_str().unwrap()]].concat());
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read(&report).unwrap(), edraw(&args).stdout);

    let stamped = edraw(&[&args[..], &["--stamp"]].concat());
    let v: Value = serde_json::from_slice(&stamped.stdout).unwrap();
    assert!(v["generated_at"].is_u64());
}

#[test]
fn help_documents_every_flag() {
    let cases: [(&str, &[&str]); 7] = [
        (
            "run",
            &[
                "--input",
                "--replay",
                "--config",
                "--out",
                "--workers",
                "--stamp",
            ],
        ),
        ("parse", &["--class"]),
        ("stats", &["--input", "--out", "--stamp"]),
        (
            "split",
            &[
                "--input",
                "--ratios",
                "--seed",
                "--out",
                "[default: 0.8,0.2]",
                "[default: 42]",
            ],
        ),
        (
            "eval-detect",
            &[
                "--pred",
                "--gt",
                "--iou-threshold",
                "--format",
                "--out",
                "[default: 0.5]",
                "[default: json]",
            ],
        ),
        ("eval-parse", &["--pred", "--gt", "--format", "--out"]),
        ("validate", &["--input"]),
    ];
    for (cmd, flags) in cases {
        let out = edraw(&[cmd, "--help"]);
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
    let out = edraw(&["frobnicate"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}
