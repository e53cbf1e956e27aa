use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn ttno(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ttno"));
    cmd.args(args).env_remove("TTNO_DENSE_CAP");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn toy_args() -> Vec<String> {
    vec![
        "build".into(),
        "--tree".into(),
        data("toy_tree.json").display().to_string(),
        "--hamiltonian".into(),
        data("toy_hamiltonian.json").display().to_string(),
    ]
}

fn build(extra: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut args = toy_args();
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ttno(&refs, envs)
}

#[test]
fn build_toy_with_verify() {
    let dir = TempDir::new().unwrap();
    let (dump, report) = (dir.path().join("toy.dump"), dir.path().join("bonds.csv"));
    let o = build(&["--verify", "--out", p(&dump), "--report", p(&report)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("max_bond 3"));
    let csv = std::fs::read_to_string(report).unwrap();
    assert!(csv.starts_with("edge,bond_dim\n"));
    assert_eq!(csv.lines().count(), 8);
    assert!(std::fs::read_to_string(dump).unwrap().starts_with("ttno-dump 1"));
}

#[test]
fn build_error_codes() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"root\": 1,\n \"edges\": [[1, 2]").unwrap();
    let o = ttno(&["build", "--tree", p(&bad), "--hamiltonian", p(&data("toy_hamiltonian.json"))], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let h = dir.path().join("h.json");
    std::fs::write(&h, r#"{"terms": [{"factors": {"9": "X"}}]}"#).unwrap();
    let o = ttno(&["build", "--tree", p(&data("toy_tree.json")), "--hamiltonian", p(&h)], &[]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let o = build(&["--verify"], &[("TTNO_DENSE_CAP", "16")]);
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("TTNO_DENSE_CAP"));
}

/// Every stored non-zero element, negated, must make verification fail.
#[test]
fn corrupted_dumps_never_verify() {
    let dir = TempDir::new().unwrap();
    let dump = dir.path().join("toy.dump");
    assert_eq!(code(&build(&["--out", p(&dump)], &[])), 0);
    let text = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(code(&build(&["--verify-dump", p(&dump)], &[])), 0);

    let lines: Vec<&str> = text.lines().collect();
    let targets: Vec<(usize, usize)> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.starts_with(|c: char| c.is_ascii_alphabetic()))
        .flat_map(|(i, l)| {
            l.split_whitespace()
                .enumerate()
                .filter(|(_, v)| v.parse::<f64>().unwrap() != 0.0)
                .map(move |(k, _)| (i, k))
                .collect::<Vec<_>>()
        })
        .collect();
    assert!(targets.len() >= 20, "{} non-zeros", targets.len());
    let bad = dir.path().join("bad.dump");
    for (i, k) in targets {
        let mut mutated: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        let mut parts: Vec<String> = mutated[i].split_whitespace().map(String::from).collect();
        parts[k] = format!("{:?}", -parts[k].parse::<f64>().unwrap());
        mutated[i] = parts.join(" ");
        std::fs::write(&bad, mutated.join("\n") + "\n").unwrap();
        let o = build(&["--verify-dump", p(&bad)], &[]);
        assert_eq!(code(&o), 4, "mutation at line {i} part {k} verified: {}", stdout(&o));
    }
}

#[test]
fn bench_is_deterministic_and_needs_a_seed() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = ttno(
            &[
                "bench",
                "--tree",
                p(&data("toy_tree.json")),
                "--terms",
                "30",
                "--samples",
                "100",
                "--seed",
                "5",
                "--out",
                p(&out),
            ],
            &[],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));

    let out = dir.path().join("z.csv");
    let o = ttno(
        &[
            "bench",
            "--tree",
            p(&data("toy_tree.json")),
            "--terms",
            "5",
            "--samples",
            "2",
            "--seed",
            "0",
            "--out",
            p(&out),
        ],
        &[],
    );
    assert_ne!(code(&o), 0);
    let o = ttno(
        &[
            "bench",
            "--tree",
            p(&data("toy_tree.json")),
            "--terms",
            "5",
            "--samples",
            "2",
            "--seed",
            "3",
            "--out",
            p(&out),
        ],
        &[("TTNO_DENSE_CAP", "64")],
    );
    assert_eq!(code(&o), 5);
}

fn summary_r_diff(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn leaf_root_has_a_heavier_tail_and_plotdata_works() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str, extra: &[&str]| {
        let (rec, sum) = (dir.path().join(format!("{tag}.csv")), dir.path().join(format!("{tag}-summary.csv")));
        let tree = data("toy_tree.json");
        let mut args = vec!["bench", "--tree", p(&tree), "--terms", "30", "--samples", "100", "--seed", "9"];
        args.extend(["--out", p(&rec), "--summary", p(&sum)]);
        args.extend(extra);
        let o = ttno(&args, &[]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (rec, sum)
    };
    let (rec, sum) = run("default", &[]);
    let (leaf_rec, leaf_sum) = run("leaf", &["--root-at-leaf"]);
    assert!(summary_r_diff(&leaf_sum)[0] > summary_r_diff(&sum)[0]);
    let max_excess = |path: &Path| {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<i64> = l.split(',').skip(3).map(|x| x.parse().unwrap()).collect();
                f[0] - f[1]
            })
            .max()
            .unwrap()
    };
    assert!(max_excess(&leaf_rec) > max_excess(&rec));

    let plot = dir.path().join("plot");
    let o = ttno(&["plotdata", "--records", p(&rec), "--summary", p(&sum), "--out-dir", p(&plot)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let hist = std::fs::read_to_string(plot.join("histogram.dat")).unwrap();
    let cells: Vec<(usize, usize, usize)> = hist
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<usize> = l.split(' ').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    let densest = cells.iter().max_by_key(|c| c.2).unwrap();
    assert_eq!(densest.0, densest.1);
    for opt in cells.iter().map(|c| c.1).collect::<std::collections::BTreeSet<_>>() {
        let col: Vec<_> = cells.iter().filter(|c| c.1 == opt).collect();
        let best = col.iter().max_by_key(|c| c.2).unwrap();
        assert_eq!(best.0, opt, "densest cell off the diagonal for opt {opt}");
    }
    assert!(std::fs::read_to_string(plot.join("diagonal.dat")).unwrap().contains("\n3 3\n"));
    assert_eq!(std::fs::read_to_string(plot.join("r_diff.dat")).unwrap().lines().count(), 2);
}

#[test]
fn plotdata_inputs() {
    let dir = TempDir::new().unwrap();
    let perfect = dir.path().join("perfect.csv");
    std::fs::write(&perfect, "seed,n_terms,edge,alg_dim,opt_dim\n1,5,1-2,3,3\n1,5,2-3,2,2\n2,5,1-2,2,2\n2,5,2-3,2,2\n")
        .unwrap();
    let out = dir.path().join("out");
    let o = ttno(&["plotdata", "--records", p(&perfect), "--out-dir", p(&out)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let hist = std::fs::read_to_string(out.join("histogram.dat")).unwrap();
    assert_eq!(hist, "# alg_dim opt_dim count\n2 2 3\n3 3 1\n");

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&ttno(&["plotdata", "--records", p(&empty), "--out-dir", p(&out)], &[])), 2);
    let header_only = dir.path().join("header.csv");
    std::fs::write(&header_only, "seed,n_terms,edge,alg_dim,opt_dim\n").unwrap();
    assert_eq!(code(&ttno(&["plotdata", "--records", p(&header_only), "--out-dir", p(&out)], &[])), 2);
    let junk = dir.path().join("junk.csv");
    std::fs::write(&junk, "seed,n_terms,edge,alg_dim,opt_dim\n1,5,1-2,three,3\n").unwrap();
    assert_eq!(code(&ttno(&["plotdata", "--records", p(&junk), "--out-dir", p(&out)], &[])), 2);
}

#[test]
fn cayley_tables() {
    let o = ttno(&["cayley", "--degree", "2", "--depth", "5"], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    for line in text.lines().skip(1).take_while(|l| l.starts_with("2,5,")) {
        let f: Vec<u128> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[3], f[4], "{line}");
        if f[2] <= 5 {
            assert_eq!(f[3], f[2] + 2, "{line}");
        }
    }
    let o = ttno(&["cayley", "--degree", "3", "--depth", "3", "--all-to-all"], &[]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "all");
    assert_eq!(row[3], row[4]);
    assert_eq!(code(&ttno(&["cayley", "--degree", "1", "--depth", "2"], &[])), 3);
}

#[test]
fn oqs_report() {
    let dir = TempDir::new().unwrap();
    let (report, dump) = (dir.path().join("r.csv"), dir.path().join("o.dump"));
    let o = ttno(
        &["oqs", "--topology", "ftp", "--spins", "4", "--baths", "3", "--report", p(&report), "--out", p(&dump)],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("site 4 spin (5,5,3)"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(report).unwrap();
    assert!(csv.starts_with("kind,id,value\n"));
    assert!(csv.contains("edge,4-8,5\n"));
    assert!(csv.ends_with("total,all,1056\n"));
    assert_eq!(code(&ttno(&["oqs", "--topology", "ring", "--spins", "2", "--baths", "1"], &[])), 3);
}
