//! The `ttno` command line: `build`, `bench`, `cayley`, `oqs`, `plotdata`.
//!
//! Exit codes: 0 success, 2 parse errors, 3 validation errors, 4 failed
//! verification, 5 dense cap exceeded. `TTNO_DENSE_CAP` overrides the cap.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::bench::{self, fmt_float, BenchConfig};
use crate::closed_form::{self as cf, CayleySpec};
use crate::dense::max_abs_diff;
use crate::diagram::{DiagramOptions, StateDiagram};
use crate::error::{Error, Result};
use crate::hamiltonian::DEFAULT_DENSE_CAP;
use crate::io;
use crate::operator::OperatorRegistry;
use crate::oqs::{self, OqsSpec, Topology};
use crate::tree::SiteId;
use crate::ttno::{ttno_from_diagram, Ttno};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_CAP: i32 = 5;

/// Element-wise tolerance for `--verify`.
pub const VERIFY_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "ttno", about = "Compile tree Hamiltonians into tree tensor network operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a TTNO from a tree and a Hamiltonian file.
    Build(BuildArgs),
    /// Random-Hamiltonian study: diagram bond dimensions against the rank optimum.
    Bench(BenchArgs),
    /// Cayley-tree bond-dimension bounds against brute-force pair counting.
    Cayley(CayleyArgs),
    /// Spin-boson model on chain, fork or star trees.
    Oqs(OqsArgs),
    /// Histogram and r_diff curve files for plotting.
    Plotdata(PlotArgs),
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// TTNO dump to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-edge bond dimension CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Compare the contracted TTNO with the dense Hamiltonian.
    #[arg(long)]
    pub verify: bool,
    /// Verify an existing dump instead of building one.
    #[arg(long, value_name = "DUMP")]
    pub verify_dump: Option<PathBuf>,
    /// Re-root the tree before building.
    #[arg(long)]
    pub root: Option<u32>,
    /// Disable subtree reuse (one disjoint path per term).
    #[arg(long)]
    pub naive: bool,
    /// Print the state diagram.
    #[arg(long)]
    pub dump_diagram: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub tree: PathBuf,
    /// Comma-separated term counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub terms: Vec<usize>,
    #[arg(long)]
    pub samples: usize,
    /// Mandatory, non-zero.
    #[arg(long)]
    pub seed: u64,
    /// Per-sample, per-edge CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-term-count r_diff CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub root: Option<u32>,
    /// Re-root at the smallest leaf.
    #[arg(long, conflicts_with = "root")]
    pub root_at_leaf: bool,
    #[arg(long)]
    pub max_support: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "X,Y,Z")]
    pub labels: Vec<String>,
}

#[derive(Args, Debug)]
pub struct CayleyArgs {
    #[arg(long)]
    pub degree: usize,
    #[arg(long)]
    pub depth: usize,
    /// One interaction range; default sweeps 1..=2D-1.
    #[arg(long, conflicts_with = "all_to_all")]
    pub range: Option<usize>,
    #[arg(long)]
    pub all_to_all: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OqsArgs {
    #[arg(long, default_value = "chain")]
    pub topology: String,
    #[arg(long)]
    pub spins: usize,
    #[arg(long)]
    pub baths: usize,
    #[arg(long, default_value_t = 2)]
    pub boson_dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    #[arg(long, default_value_t = 0.5)]
    pub g_re: f64,
    #[arg(long, default_value_t = 0.25)]
    pub g_im: f64,
    #[arg(long, default_value_t = 0.75)]
    pub omega: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Records CSV from `bench --out`.
    #[arg(long)]
    pub records: PathBuf,
    /// Summary CSV from `bench --summary`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) => EXIT_PARSE,
            Error::DenseCapExceeded { .. } | Error::PathCapExceeded { .. } => EXIT_CAP,
            _ => EXIT_INVALID,
        };
        let mut message = e.to_string();
        if code == EXIT_CAP {
            message.push_str("; raise TTNO_DENSE_CAP or use a smaller system");
        }
        Failure { code, message }
    }
}

type CliResult = std::result::Result<(), Failure>;

pub fn dense_cap() -> std::result::Result<usize, Failure> {
    match std::env::var("TTNO_DENSE_CAP") {
        Ok(v) => {
            v.trim().parse().map_err(|_| Failure { code: EXIT_INVALID, message: format!("bad TTNO_DENSE_CAP `{v}`") })
        }
        Err(_) => Ok(DEFAULT_DENSE_CAP),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Runs one parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Build(a) => build(a, out),
        Command::Bench(a) => bench_cmd(a, out),
        Command::Cayley(a) => cayley(a, out),
        Command::Oqs(a) => oqs_cmd(a, out),
        Command::Plotdata(a) => plotdata(a, out),
    }
}

fn verify(ttno: &Ttno, h: &crate::hamiltonian::Hamiltonian, reg: &OperatorRegistry, out: &mut dyn Write) -> CliResult {
    let cap = dense_cap()?;
    let order = h.tree().preorder();
    let diff = max_abs_diff(&ttno.contract_to_dense(&order, cap)?, &h.to_dense(&order, reg, cap)?);
    writeln!(out, "verify max_abs_diff {}", fmt_float(diff)).map_err(Error::from)?;
    if diff.is_nan() || diff > VERIFY_TOL {
        return Err(Failure { code: EXIT_VERIFY, message: format!("verification failed: max |diff| = {diff:e}") });
    }
    Ok(())
}

fn build(a: BuildArgs, out: &mut dyn Write) -> CliResult {
    let mut tree = io::read_tree(&a.tree)?;
    if let Some(r) = a.root {
        tree = tree.reroot(r)?;
    }
    let mut reg = OperatorRegistry::default();
    let h = io::read_hamiltonian(&a.hamiltonian, &tree, &mut reg)?;

    if let Some(path) = &a.verify_dump {
        let f = File::open(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let ttno = Ttno::read_dump(BufReader::new(f))?;
        if ttno.tree() != h.tree() {
            return Err(Failure { code: EXIT_VERIFY, message: "dump tree differs from the input tree".into() });
        }
        return verify(&ttno, &h, &reg, out);
    }

    let opts = if a.naive { DiagramOptions::naive() } else { DiagramOptions::default() };
    let diagram = StateDiagram::from_hamiltonian(&h, opts)?;
    let ttno = ttno_from_diagram(&diagram, &reg)?;
    let bonds = diagram.bond_dimensions();
    let w = |r: std::io::Result<()>| r.map_err(Error::from);
    for (e, d) in &bonds {
        w(writeln!(out, "bond {e} {d}"))?;
    }
    w(writeln!(out, "max_bond {}", diagram.max_bond_dimension()))?;
    w(writeln!(out, "elements {}", ttno.element_count()))?;
    if a.dump_diagram {
        w(write!(out, "{}", diagram.dump()))?;
    }
    if let Some(p) = &a.out {
        let mut f = create(p)?;
        ttno.write_dump(&mut f)?;
        f.flush().map_err(Error::from)?;
    }
    if let Some(p) = &a.report {
        let mut f = create(p)?;
        w(writeln!(f, "edge,bond_dim"))?;
        for (e, d) in &bonds {
            w(writeln!(f, "{e},{d}"))?;
        }
        w(f.flush())?;
    }
    if a.verify {
        verify(&ttno, &h, &reg, out)?;
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs, out: &mut dyn Write) -> CliResult {
    let tree = io::read_tree(&a.tree)?;
    let mut cfg = BenchConfig::new(a.terms, a.samples, a.seed);
    cfg.labels = a.labels;
    cfg.dense_cap = dense_cap()?;
    if let Some(k) = a.max_support {
        cfg.max_support = k;
    }
    cfg.root = match (a.root, a.root_at_leaf) {
        (Some(r), _) => Some(SiteId(r)),
        (None, true) => tree.nodes().find(|&s| tree.neighbours(s).map(|n| n.len() == 1).unwrap_or(false)),
        _ => None,
    };
    let samples = bench::run_bench(&tree, &cfg)?;
    let violations: usize = samples.iter().map(|s| s.record.report.violations().len()).sum();
    bench::write_records_csv(create(&a.out)?, &samples)?;
    let rows = bench::summarize(&samples)?;
    if let Some(p) = &a.summary {
        bench::write_summary_csv(create(p)?, &rows)?;
    }
    let w = |r: std::io::Result<()>| r.map_err(Error::from);
    for r in &rows {
        w(writeln!(
            out,
            "n_terms {} r_diff {} stderr {} samples {}",
            r.n_terms,
            fmt_float(r.r_diff),
            fmt_float(r.stderr),
            r.n_samples
        ))?;
    }
    w(writeln!(out, "dominance_violations {violations}"))?;
    if violations > 0 {
        return Err(Failure { code: EXIT_VERIFY, message: format!("{violations} edges beat the rank optimum") });
    }
    Ok(())
}

fn cayley(a: CayleyArgs, out: &mut dyn Write) -> CliResult {
    let spec = CayleySpec::new(a.degree, a.depth)?;
    let mut rows: Vec<[String; 6]> = Vec::new();
    let mut mismatch = false;
    let head = |x: String, c: u128, p: u128, b: u128| {
        [spec.degree.to_string(), spec.depth.to_string(), x, c.to_string(), b.to_string(), p.to_string()]
    };
    if a.all_to_all {
        let (c, b) = (cf::all_to_all_bound(spec), cf::brute_force_all_to_all(spec)?);
        mismatch |= c != b;
        rows.push(head("all".into(), c, cf::printed_all_to_all_bound(spec), b));
    } else {
        let ranges: Vec<usize> = match a.range {
            Some(x) => vec![x],
            None => (1..2 * spec.depth).collect(),
        };
        for x in ranges {
            let c = cf::fixed_range_bond_bound(spec, x)?;
            let b = cf::brute_force_root_bond(spec, x)?;
            mismatch |= c != b;
            rows.push(head(x.to_string(), c, cf::printed_fixed_range_bound(spec, x)?, b));
        }
    }
    let mut text = String::from("degree,depth,range,closed_form,brute_force,printed_form\n");
    for r in &rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(Error::from)?;
    writeln!(out, "site_count {} printed_site_count {}", cf::cayley_site_count(spec), cf::printed_site_count(spec))
        .map_err(Error::from)?;
    if let Some(p) = &a.out {
        let mut f = create(p)?;
        f.write_all(text.as_bytes()).map_err(Error::from)?;
        f.flush().map_err(Error::from)?;
    }
    if mismatch {
        return Err(Failure { code: EXIT_VERIFY, message: "closed form disagrees with brute force".into() });
    }
    Ok(())
}

fn oqs_cmd(a: OqsArgs, out: &mut dyn Write) -> CliResult {
    let kind: Topology = a.topology.parse()?;
    let spec = OqsSpec {
        spins: a.spins,
        baths: a.baths,
        j: a.j,
        g: Complex64::new(a.g_re, a.g_im),
        omega: a.omega,
        boson_dim: a.boson_dim,
    }
    .validated()?;
    let reg = OperatorRegistry::default();
    let h = oqs::oqs_hamiltonian(&spec, kind)?;
    let diagram = StateDiagram::from_hamiltonian(&h, DiagramOptions::default())?;
    let ttno = ttno_from_diagram(&diagram, &reg)?;
    let bonds = diagram.bond_dimensions();
    let w = |r: std::io::Result<()>| r.map_err(Error::from);
    for s in h.tree().nodes() {
        let role = if spec.spin_index(s).is_some() { "spin" } else { "boson" };
        let prof: Vec<String> = oqs::site_profile(&spec, kind, &bonds, s).iter().map(|d| d.to_string()).collect();
        w(writeln!(out, "site {s} {role} ({})", prof.join(",")))?;
    }
    w(writeln!(out, "elements {}", ttno.element_count()))?;
    if let Some(p) = &a.out {
        let mut f = create(p)?;
        ttno.write_dump(&mut f)?;
        w(f.flush())?;
    }
    if let Some(p) = &a.report {
        let mut f = create(p)?;
        w(writeln!(f, "kind,id,value"))?;
        for (e, d) in &bonds {
            w(writeln!(f, "edge,{e},{d}"))?;
        }
        for (s, t) in ttno.tensors() {
            w(writeln!(f, "site,{s},{}", t.shape().iter().product::<usize>()))?;
        }
        w(writeln!(f, "total,all,{}", ttno.element_count()))?;
        w(f.flush())?;
    }
    Ok(())
}

fn plotdata(a: PlotArgs, out: &mut dyn Write) -> CliResult {
    let f = File::open(&a.records).map_err(|e| Error::InvalidInput(format!("{}: {e}", a.records.display())))?;
    let records = bench::read_records_csv(BufReader::new(f))?;
    std::fs::create_dir_all(&a.out_dir).map_err(Error::from)?;
    let hist = bench::histogram(&records);
    let w = |r: std::io::Result<()>| r.map_err(Error::from);

    let mut f = create(&a.out_dir.join("histogram.dat"))?;
    w(writeln!(f, "# alg_dim opt_dim count"))?;
    for ((alg, opt), n) in &hist {
        w(writeln!(f, "{alg} {opt} {n}"))?;
    }
    w(f.flush())?;

    let top = hist.keys().map(|&(x, y)| x.max(y)).max().unwrap_or(1);
    let mut f = create(&a.out_dir.join("diagonal.dat"))?;
    w(writeln!(f, "# y = x"))?;
    for k in 0..=top {
        w(writeln!(f, "{k} {k}"))?;
    }
    w(f.flush())?;

    if let Some(s) = &a.summary {
        let rows = read_summary(s)?;
        let mut f = create(&a.out_dir.join("r_diff.dat"))?;
        w(writeln!(f, "# n_terms r_diff stderr"))?;
        for (n, r, e) in rows {
            w(writeln!(f, "{n} {} {}", fmt_float(r), fmt_float(e)))?;
        }
        w(f.flush())?;
    }
    let diagonal: usize = hist.iter().filter(|((x, y), _)| x == y).map(|(_, n)| n).sum();
    let total: usize = hist.values().sum();
    w(writeln!(out, "bonds {total} on_diagonal {diagonal}"))?;
    Ok(())
}

fn read_summary(path: &Path) -> Result<Vec<(usize, f64, f64)>> {
    #[derive(serde::Deserialize)]
    struct Row {
        n_terms: usize,
        r_diff: f64,
        #[serde(default)]
        stderr: f64,
    }
    let f = File::open(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(f);
    let rows: Vec<(usize, f64, f64)> = rdr
        .deserialize::<Row>()
        .map(|r| r.map(|r| (r.n_terms, r.r_diff, r.stderr)).map_err(|e| Error::Parse(format!("summary csv: {e}"))))
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::Parse("summary csv has no rows".into()));
    }
    Ok(rows)
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
