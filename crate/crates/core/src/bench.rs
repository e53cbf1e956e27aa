//! Random-Hamiltonian benchmark: state-diagram bond dimensions against the
//! rank optimum, reproducible from one seed.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagram::{DiagramOptions, StateDiagram};
use crate::error::{Error, Result};
use crate::hamiltonian::random_hamiltonian;
use crate::operator::OperatorRegistry;
use crate::rank::{optimal_bond_dims, r_diff_with_error, BenchRecord, BondReport};
use crate::tree::{Edge, SiteId, TreeTopology};

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub terms: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub labels: Vec<String>,
    pub max_support: usize,
    /// Re-root the tree before building diagrams.
    pub root: Option<SiteId>,
    pub dense_cap: usize,
}

impl BenchConfig {
    pub fn new(terms: Vec<usize>, samples: usize, seed: u64) -> Self {
        BenchConfig {
            terms,
            samples,
            seed,
            labels: ["X", "Y", "Z"].map(String::from).to_vec(),
            max_support: usize::MAX,
            root: None,
            dense_cap: crate::hamiltonian::DEFAULT_DENSE_CAP,
        }
    }
}

/// One sample plus the diagram's work counter.
#[derive(Clone, Debug)]
pub struct Sample {
    pub index: usize,
    pub record: BenchRecord,
    pub work: u64,
}

/// Per-sample seeds for one term count: a ChaCha stream keyed by the term count.
pub fn sample_seeds(seed: u64, n_terms: usize, samples: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n_terms as u64);
    (0..samples).map(|_| rng.random()).collect()
}

pub fn run_sample(tree: &TreeTopology, n_terms: usize, seed: u64, config: &BenchConfig) -> Result<(BenchRecord, u64)> {
    let labels: Vec<&str> = config.labels.iter().map(String::as_str).collect();
    let mut h = random_hamiltonian(tree, n_terms, &labels, config.max_support, seed)?;
    if let Some(r) = config.root {
        h = h.rerooted(r)?;
    }
    let diagram = StateDiagram::from_hamiltonian(&h, DiagramOptions::default())?;
    let opt = optimal_bond_dims(&h, &OperatorRegistry::default(), config.dense_cap)?;
    let report = BondReport::new(&diagram, &opt)?;
    Ok((BenchRecord { seed, n_terms, report }, diagram.work()))
}

/// All samples, ordered by term count (as configured) and then sample index.
pub fn run_bench(tree: &TreeTopology, config: &BenchConfig) -> Result<Vec<Sample>> {
    if config.seed == 0 {
        return Err(Error::InvalidInput("seed 0 is reserved; pass an explicit non-zero seed".into()));
    }
    if config.samples == 0 || config.terms.is_empty() {
        return Err(Error::InvalidInput("need at least one sample and one term count".into()));
    }
    let jobs: Vec<(usize, usize, u64)> = config
        .terms
        .iter()
        .flat_map(|&n| {
            sample_seeds(config.seed, n, config.samples).into_iter().enumerate().map(move |(i, s)| (n, i, s))
        })
        .collect();
    jobs.par_iter()
        .map(|&(n, index, seed)| run_sample(tree, n, seed, config).map(|(record, work)| Sample { index, record, work }))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub n_terms: usize,
    pub r_diff: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

pub fn summarize(samples: &[Sample]) -> Result<Vec<SummaryRow>> {
    let mut groups: BTreeMap<usize, Vec<BenchRecord>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.record.n_terms).or_default().push(s.record.clone());
    }
    groups
        .into_iter()
        .map(|(n, recs)| {
            let (r, e) = r_diff_with_error(&recs)?;
            Ok(SummaryRow { n_terms: n, r_diff: r, stderr: e, n_samples: recs.len() })
        })
        .collect()
}

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `seed,n_terms,edge,alg_dim,opt_dim`, one row per sample and edge.
pub fn write_records_csv<W: Write>(w: W, samples: &[Sample]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["seed", "n_terms", "edge", "alg_dim", "opt_dim"]).map_err(csv_err)?;
    for s in samples {
        for (e, (a, o)) in &s.record.report.bonds {
            out.write_record([
                s.record.seed.to_string(),
                s.record.n_terms.to_string(),
                e.to_string(),
                a.to_string(),
                o.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `n_terms,r_diff,n_samples,stderr`.
pub fn write_summary_csv<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n_terms", "r_diff", "n_samples", "stderr"]).map_err(csv_err)?;
    for r in rows {
        out.write_record([r.n_terms.to_string(), fmt_float(r.r_diff), r.n_samples.to_string(), fmt_float(r.stderr)])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct RecordRow {
    seed: u64,
    n_terms: usize,
    edge: String,
    alg_dim: usize,
    opt_dim: usize,
}

/// Reads a records CSV back into per-sample records (grouped by seed and term count).
pub fn read_records_csv<R: std::io::Read>(r: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut grouped: Vec<BenchRecord> = Vec::new();
    for row in rdr.deserialize::<RecordRow>() {
        let row = row.map_err(|e| Error::Parse(format!("records csv: {e}")))?;
        let (a, b) = row.edge.split_once('-').ok_or_else(|| Error::Parse(format!("bad edge `{}`", row.edge)))?;
        let parse =
            |x: &str| x.parse::<u32>().map(SiteId).map_err(|_| Error::Parse(format!("bad edge `{}`", row.edge)));
        let edge = Edge::new(parse(a)?, parse(b)?);
        match grouped.last_mut() {
            Some(last)
                if last.seed == row.seed && last.n_terms == row.n_terms && !last.report.bonds.contains_key(&edge) =>
            {
                last.report.bonds.insert(edge, (row.alg_dim, row.opt_dim));
            }
            _ => grouped.push(BenchRecord {
                seed: row.seed,
                n_terms: row.n_terms,
                report: BondReport { bonds: BTreeMap::from([(edge, (row.alg_dim, row.opt_dim))]) },
            }),
        }
    }
    if grouped.is_empty() {
        return Err(Error::Parse("records csv has no rows".into()));
    }
    Ok(grouped)
}

/// `(alg_dim, opt_dim) → count` over every bond of every record.
pub fn histogram(records: &[BenchRecord]) -> BTreeMap<(usize, usize), usize> {
    let mut h = BTreeMap::new();
    for r in records {
        for &(a, o) in r.report.bonds.values() {
            *h.entry((a, o)).or_insert(0) += 1;
        }
    }
    h
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
