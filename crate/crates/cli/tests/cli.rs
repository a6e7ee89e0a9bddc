use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn listcolor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_listcolor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const C4: &str = "bipartite 2 2 4\n0 0\n0 1\n1 0\n1 1\n";

#[test]
fn generate_is_deterministic() {
    let a = listcolor(&["generate", "--n", "10", "--delta", "3", "--seed", "5"]);
    let b = listcolor(&["generate", "--n", "10", "--delta", "3", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("bipartite 10 10 30\n"));
}

#[test]
fn generate_then_color() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let lists = dir.path().join("l.txt");
    let coloring = dir.path().join("c.txt");
    let report = dir.path().join("r.json");
    let g = graph.to_str().unwrap();
    let l = lists.to_str().unwrap();
    assert!(
        listcolor(&["generate", "--n", "8", "--delta", "2", "--out", g])
            .status
            .success()
    );
    assert!(listcolor(&[
        "lists", "--graph", g, "--k", "6", "--pool", "12", "--seed", "1", "--out", l
    ])
    .status
    .success());
    let o = listcolor(&[
        "color",
        "--graph",
        g,
        "--lists",
        l,
        "--profile",
        "linear",
        "--seed",
        "3",
        "--out",
        coloring.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&coloring).unwrap().lines().count(), 16);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["success"], true);
    assert_eq!(json["seed"], 3);
}

#[test]
fn color_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "bipartite 1 1 1\n0 0\n");
    let l = write(dir.path(), "l.txt", "lists 2 1\n1\n1\n");
    let o = listcolor(&["color", "--graph", &g, "--lists", &l, "--max-rounds", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_csv() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", C4);
    let l = write(dir.path(), "l.txt", "lists 4 2\n1 2\n1 2\n1 2\n3 4\n");
    let o = listcolor(&["stats", "--graph", &g, "--lists", &l]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("w,Z,z,y,alpha,ell_bar\n"));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn coupon_csv_schema() {
    let o = listcolor(&[
        "coupon",
        "--delta",
        "3",
        "--k",
        "2",
        "--pool",
        "4",
        "--trials",
        "500",
        "--instances",
        "3",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("trial_count,empirical,exact_or_na,product_bound,analytic_bound")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn oracle_queries() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c4.txt", C4);
    assert_eq!(
        stdout(&listcolor(&["oracle", "choosability", "--graph", &g])),
        "choosability 2\n"
    );
    assert_eq!(
        stdout(&listcolor(&["oracle", "chromatic", "--graph", &g])),
        "chromatic number 2\n"
    );
    let k24 = write(
        dir.path(),
        "k24.txt",
        "bipartite 2 4 8\n0 0\n0 1\n0 2\n0 3\n1 0\n1 1\n1 2\n1 3\n",
    );
    let ce = dir.path().join("ce.txt");
    let o = listcolor(&[
        "oracle",
        "choosability",
        "--graph",
        &k24,
        "--counterexample",
        ce.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&o), "choosability 3\n");
    let ce = ce.to_str().unwrap();
    assert_eq!(
        stdout(&listcolor(&[
            "oracle", "lcolor", "--graph", &k24, "--lists", ce
        ])),
        "not colorable\n"
    );
    let bad = write(dir.path(), "bad.txt", "lists 4 1\n1\n2\n1\n2\n");
    assert_eq!(
        stdout(&listcolor(&[
            "oracle", "lcolor", "--graph", &g, "--lists", &bad
        ])),
        "not colorable\n"
    );
    let good = write(dir.path(), "good.txt", "lists 4 1\n1\n1\n2\n2\n");
    assert_eq!(
        stdout(&listcolor(&[
            "oracle", "lcolor", "--graph", &g, "--lists", &good
        ])),
        "0 1\n1 1\n2 2\n3 2\n"
    );
}

#[test]
fn certify_json_and_text() {
    let o = listcolor(&["optimize", "certify", "--grid-step", "0.01", "--json"]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let max = json["branch_two"]["value"].as_f64().unwrap();
    assert!((max - 0.796309237086).abs() < 1e-9);
    let text = stdout(&listcolor(&["optimize", "certify", "--grid-step", "0.01"]));
    assert!(text.contains("both branches below threshold"));
    assert_eq!(
        text,
        stdout(&listcolor(&["optimize", "certify", "--grid-step", "0.01"]))
    );
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.conf",
        "[run]\nmode = sweep\ntrials = 3\nseed = 4\nout = out.csv\n[graph]\nn = 10\ndelta = 3\n[lists]\nk = 4\n[sweep]\nprofiles = uniform, piecewise\n",
    );
    let plot = dir.path().join("plot.txt");
    let o = listcolor(&[
        "experiment",
        "--config",
        &cfg,
        "--plot",
        "success-vs-k",
        "--plot-out",
        plot.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(dir.path().join("out.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 1 + 3 * 2);
    assert!(fs::read_to_string(&plot)
        .unwrap()
        .starts_with("# kind: success-vs-k\n"));
    assert!(listcolor(&["experiment", "--config", &cfg])
        .status
        .success());
    assert_eq!(fs::read(dir.path().join("out.csv")).unwrap(), first);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write(
        dir.path(),
        "m.conf",
        "[graph]\nsource = file\nfile = nowhere.txt\n",
    );
    assert_eq!(
        listcolor(&["experiment", "--config", &missing])
            .status
            .code(),
        Some(1)
    );
    let bad = write(
        dir.path(),
        "b.conf",
        "[graph]\nn = 4\ndelta = 2\nwhat = 1\n",
    );
    let o = listcolor(&["experiment", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    assert_eq!(
        listcolor(&["color", "--no-such-flag"]).status.code(),
        Some(1)
    );
}

#[test]
fn compare_profiles_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.conf",
        "trials = 20\n[graph]\nn = 20\ndelta = 6\n[lists]\nk = 4\nmode = planted\ntheta = 0.6667\n",
    );
    let o = listcolor(&["compare", "--config", &cfg]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("uniform") && text.contains("piecewise - uniform"));
    assert_eq!(
        listcolor(&["compare", "--config", &cfg, "--profiles", "uniform"])
            .status
            .code(),
        Some(1)
    );
}
