use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pattern(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/patterns")
        .join(format!("{name}.pat.json"))
}

fn example_word() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/patterns/example.tw")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptmatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Second row, given column of a tab-separated stats table.
fn stat(o: &Output, column: usize) -> String {
    let text = stdout(o);
    let row = text.lines().nth(1).expect("stats row");
    row.split('\t').nth(column).unwrap().to_string()
}

fn match_example(dir: &TempDir) -> PathBuf {
    let out = dir.path().join("example.match.json");
    let o = run(&[
        "match",
        "--pattern",
        p(&pattern("example")),
        "--word",
        p(&example_word()),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stat(&o, 1), "3");
    out
}

#[test]
fn match_example_has_three_disjuncts() {
    let dir = TempDir::new().unwrap();
    let out = match_example(&dir);
    let m = ptmatch::io::parse_result(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(m.set.len(), 3);
}

#[test]
fn match_with_valuation() {
    let o = run(&[
        "match",
        "--pattern",
        p(&pattern("example")),
        "--word",
        p(&example_word()),
        "--valuation",
        "p1=1,p2=1",
        "--show",
    ]);
    assert!(o.status.success());
    assert_eq!(stat(&o, 1), "1");
    assert!(stdout(&o).contains("t > 37/10"), "{}", stdout(&o));
}

#[test]
fn match_blowup_200_events() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("b.tw");
    assert!(run(&["gen", "blowup", "--events", "200", "--seed", "4", "--out", p(&w)]).status.success());
    let o = run(&["match", "--pattern", p(&pattern("blowup")), "--word", p(&w)]);
    assert!(o.status.success());
    assert_eq!(stat(&o, 1), "5050");
}

#[test]
fn opt_example() {
    let opt = |param: &str, dir: &str| {
        run(&[
            "opt",
            "--pattern",
            p(&pattern("example")),
            "--word",
            p(&example_word()),
            "--param",
            param,
            "--direction",
            dir,
        ])
    };
    let o = opt("p2", "min");
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("p2 > 7/10 (infimum, not attained)\n"), "{}", stdout(&o));
    assert!(stdout(&opt("p1", "max")).starts_with("p1 < 6/5 (supremum, not attained)\n"));
    assert!(stdout(&opt("p2", "max")).starts_with("p2 unbounded above\n"));
    assert_eq!(opt("q", "min").status.code(), Some(4));
}

#[test]
fn opt_infeasible() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.tw");
    fs::write(&w, "g2 1\ng3 2\n").unwrap();
    let o = run(&[
        "opt", "--pattern", p(&pattern("gear")), "--word", p(&w), "--param", "p", "--direction", "min",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("infeasible\n"));
}

#[test]
fn oracle_agrees_and_detects_tampering() {
    let dir = TempDir::new().unwrap();
    let out = match_example(&dir);
    let check = |file: &Path| {
        run(&[
            "oracle",
            "--pattern",
            p(&pattern("example")),
            "--word",
            p(&example_word()),
            "--valuation",
            "p1=1,p2=1",
            "--compare",
            p(file),
        ])
    };
    let o = check(&out);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o), "SEMANTICALLY-EQUAL\n");

    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"-37/10\""));
    let tampered = dir.path().join("tampered.match.json");
    fs::write(&tampered, text.replace("\"-37/10\"", "\"-18/5\"")).unwrap();
    let o = check(&tampered);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("MISMATCH"));
    assert!(stdout(&o).contains("not a match: "), "{}", stdout(&o));
}

#[test]
fn oracle_gear_random_word() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("g.tw");
    let out = dir.path().join("g.match.json");
    assert!(run(&["gen", "gear", "--events", "18", "--seed", "3", "--out", p(&w)]).status.success());
    let o = run(&["match", "--pattern", p(&pattern("gear")), "--word", p(&w), "--out", p(&out)]);
    assert!(o.status.success());
    for v in ["p=0.3", "p=0.75", "p=2"] {
        let o = run(&[
            "oracle",
            "--pattern",
            p(&pattern("gear")),
            "--word",
            p(&w),
            "--valuation",
            v,
            "--compare",
            p(&out),
        ]);
        assert_eq!(stdout(&o), "SEMANTICALLY-EQUAL\n", "{v}");
    }
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.tw"), dir.path().join("b.tw"));
    for f in [&a, &b] {
        assert!(run(&["gen", "blowup", "--events", "4", "--seed", "1", "--out", p(f)]).status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<(&str, f64)> = text
        .lines()
        .map(|l| {
            let (act, t) = l.split_once(' ').unwrap();
            (act, t.parse().unwrap())
        })
        .collect();
    assert_eq!(lines.iter().map(|l| l.0).collect::<Vec<_>>(), ["a", "b", "a", "b"]);
    assert!(lines.windows(2).all(|w| w[0].1 < w[1].1));
    assert_eq!(run(&["gen", "blowup", "--events", "5"]).status.code(), Some(2));
}

#[test]
fn project_example() {
    let dir = TempDir::new().unwrap();
    let result = match_example(&dir);
    let csv = dir.path().join("tt.csv");
    let gp = dir.path().join("tt.gp");
    let o = run(&[
        "project",
        "--input",
        p(&result),
        "--vars",
        "t,t_prime",
        "--box",
        "0,8,0,8",
        "--out",
        p(&csv),
        "--gnuplot",
        p(&gp),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o), "polygons\t3\n");
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.matches("# polygon").count(), 3);
    assert!(fs::read_to_string(&gp).unwrap().contains(p(&csv)));

    let o = run(&[
        "project", "--input", p(&result), "--vars", "p1,p2", "--box", "0,2,0,3", "--out", p(&csv),
    ]);
    assert!(o.status.success());
    let o = run(&[
        "project", "--input", p(&result), "--vars", "p1,zz", "--box", "0,2,0,3", "--out", p(&csv),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn project_empty_result() {
    let dir = TempDir::new().unwrap();
    let result = dir.path().join("empty.match.json");
    let o = run(&[
        "match",
        "--pattern",
        p(&pattern("example")),
        "--word",
        p(&example_word()),
        "--valuation",
        "p1=2,p2=1",
        "--out",
        p(&result),
    ]);
    assert!(o.status.success());
    assert_eq!(stat(&o, 1), "0");
    let csv = dir.path().join("e.csv");
    let o = run(&[
        "project", "--input", p(&result), "--vars", "t,t_prime", "--box", "0,8,0,8", "--out", p(&csv),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&csv).unwrap(), "");
}

#[test]
fn bench_blowup_directory() {
    let dir = TempDir::new().unwrap();
    for (n, seed) in [(20, "1"), (40, "2")] {
        let f = dir.path().join(format!("b{n:03}.tw"));
        assert!(run(&["gen", "blowup", "--events", &n.to_string(), "--seed", seed, "--out", p(&f)]).status.success());
    }
    fs::write(dir.path().join("bad.tw"), "a 2\na 1\n").unwrap();
    let o = run(&["bench", "--pattern", p(&pattern("blowup")), "--words", p(dir.path())]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 2, "{text}");
    assert_eq!(rows[0][3], "55");
    assert_eq!(rows[1][3], "210");
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.tw"));

    let o = run(&[
        "bench", "--pattern", p(&pattern("blowup")), "--words", p(dir.path()), "--mode", "opt", "--param", "p1",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("p1 > "));

    let empty = TempDir::new().unwrap();
    let o = run(&["bench", "--pattern", p(&pattern("blowup")), "--words", p(empty.path())]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad_word = dir.path().join("bad.tw");
    fs::write(&bad_word, "a 1\na 1\n").unwrap();
    let o = run(&["match", "--pattern", p(&pattern("example")), "--word", p(&bad_word)]);
    assert_eq!(o.status.code(), Some(2));

    let ill = dir.path().join("ill.pat.json");
    fs::write(
        &ill,
        r#"{"alphabet": ["a"], "clocks": ["x"], "parameters": [],
            "locations": ["l0", "l1", "l2"], "initial": "l0", "accepting": ["l2"],
            "edges": [{"source": "l0", "target": "l1", "action": "$"},
                      {"source": "l0", "target": "l2", "action": "$"}]}"#,
    )
    .unwrap();
    let o = run(&["match", "--pattern", p(&ill), "--word", p(&example_word())]);
    assert_eq!(o.status.code(), Some(3), "{o:?}");

    assert_eq!(run(&["match", "--pattern"]).status.code(), Some(4));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(4));
    let o = run(&[
        "match",
        "--pattern",
        p(&pattern("example")),
        "--word",
        p(&example_word()),
        "--valuation",
        "p1=1",
    ]);
    assert_eq!(o.status.code(), Some(4));
}
