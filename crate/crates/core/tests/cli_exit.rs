use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zloch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zloch"))
        .args(args)
        .env_remove("ZLOCH_TOLERANCE")
        .output()
        .expect("spawn zloch")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pipeline_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle.json");
    let section = dir.path().join("section.json");
    let report = dir.path().join("report.json");
    let o = zloch(&[
        "gen-bundle",
        "--dims",
        "8,8,8",
        "--class",
        "1,0,-1",
        "--gauge-seed",
        "4",
        "--out",
        path(&bundle),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = zloch(&[
        "gen-section",
        "--bundle",
        path(&bundle),
        "--seed",
        "9",
        "--out",
        path(&section),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = zloch(&[
        "analyze",
        "--bundle",
        path(&bundle),
        "--section",
        path(&section),
        "--report",
        path(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["class"], serde_json::json!([1, 0, -1]));
}

#[test]
fn obstructed_class_falsifies() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.json");
    fs::write(
        &graph,
        r#"{"vertices":["a"],"edges":[{"id":"e","tail":"a","head":"a","polyline":[[1,1,0],[1,1,4]]}]}"#,
    )
    .unwrap();
    let run = |class: &str| {
        code(&zloch(&[
            "obstruction",
            "--graph",
            path(&graph),
            "--dims",
            "4,4,4",
            "--class",
            class,
        ]))
    };
    assert_eq!(run("0,0,-3"), 0);
    assert_eq!(run("1,0,0"), 1);
}

#[test]
fn bad_input_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle.json");
    let section = dir.path().join("section.json");
    zloch(&[
        "gen-bundle",
        "--dims",
        "6,6,6",
        "--class",
        "0,0,1",
        "--out",
        path(&bundle),
    ]);
    zloch(&[
        "gen-section",
        "--bundle",
        path(&bundle),
        "--out",
        path(&section),
    ]);
    let bad = dir.path().join("bad.json");
    zloch(&[
        "gen-bundle",
        "--dims",
        "6,6,6",
        "--class",
        "0,0,1",
        "--corrupt",
        "--out",
        path(&bad),
    ]);
    assert_eq!(
        code(&zloch(&[
            "analyze",
            "--bundle",
            path(&bad),
            "--section",
            path(&section)
        ])),
        2
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&zloch(&[
            "analyze",
            "--bundle",
            path(&missing),
            "--section",
            path(&section)
        ])),
        2
    );
    assert_eq!(
        code(&zloch(&[
            "shortest-flow",
            "--dims",
            "4,0,4",
            "--class",
            "1,0,0"
        ])),
        2
    );
    assert_eq!(
        code(&zloch(&[
            "shortest-flow",
            "--dims",
            "4,4,4",
            "--class",
            "1,0"
        ])),
        2
    );
}

#[test]
fn output_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle.json");
    let section = dir.path().join("section.json");
    zloch(&[
        "gen-bundle",
        "--dims",
        "10,10,10",
        "--class",
        "2,-1,0",
        "--gauge-seed",
        "1",
        "--out",
        path(&bundle),
    ]);
    zloch(&[
        "gen-section",
        "--bundle",
        path(&bundle),
        "--seed",
        "2",
        "--out",
        path(&section),
    ]);
    let run = |t: &str| {
        zloch(&[
            "analyze",
            "--json",
            "--threads",
            t,
            "--bundle",
            path(&bundle),
            "--section",
            path(&section),
        ])
        .stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("2"));
    let mu = |t: &str| zloch(&["mu-check", "--json", "--samples", "200", "--threads", t]).stdout;
    assert_eq!(mu("1"), mu("2"));
}
