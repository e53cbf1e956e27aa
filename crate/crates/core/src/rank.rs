//! Minimal bond dimensions from operator Schmidt ranks, and the averaged
//! excess statistic used by the random benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::dense::permute_sites;
use crate::diagram::StateDiagram;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::operator::{Matrix, OperatorRegistry};
use crate::tree::{Edge, SiteId};

/// Singular values at or below `RANK_TOL · σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Iteration budget per SVD attempt.
const SVD_MAX_ITER: usize = 5_000;

/// Singular values of `m`. The complex SVD occasionally stalls on highly
/// structured input; the adjoint and the triangular QR factor have the same
/// singular values and usually converge when `m` itself does not.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let attempts: [&dyn Fn() -> Matrix; 3] = [&|| m.clone(), &|| m.adjoint(), &|| {
        if m.nrows() >= m.ncols() {
            m.clone().qr().r()
        } else {
            m.adjoint().qr().r()
        }
    }];
    for (i, make) in attempts.iter().enumerate() {
        if let Some(svd) = make().try_svd(false, false, f64::EPSILON, SVD_MAX_ITER) {
            if i > 0 {
                log::debug!("svd fallback {i} used for a {}x{} matrix", m.nrows(), m.ncols());
            }
            return Ok(svd.singular_values.iter().copied().collect());
        }
    }
    Err(Error::NoConvergence { rows: m.nrows(), cols: m.ncols() })
}

/// Numerical rank of `m` relative to its largest singular value.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> Result<usize> {
    // zero rows and columns carry no singular values
    let rows: Vec<usize> = (0..m.nrows()).filter(|&i| m.row(i).iter().any(|x| *x != Complex64::ZERO)).collect();
    let cols: Vec<usize> = (0..m.ncols()).filter(|&j| m.column(j).iter().any(|x| *x != Complex64::ZERO)).collect();
    if rows.is_empty() || cols.is_empty() {
        return Ok(0);
    }
    let sv = singular_values(&m.select_rows(&rows).select_columns(&cols))?;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * max).count())
}

/// Reshapes `h`, whose leading tensor factors span `left_dim`,
/// into the matrix with rows `(out_L, in_L)` and columns `(out_R, in_R)`.
pub fn matricize(h: &Matrix, left_dim: usize) -> Matrix {
    let n = h.nrows();
    assert_eq!(n % left_dim, 0);
    let right_dim = n / left_dim;
    let mut m = Matrix::zeros(left_dim * left_dim, right_dim * right_dim);
    for r in 0..n {
        let (ra, rb) = (r / right_dim, r % right_dim);
        for c in 0..n {
            let (ca, cb) = (c / right_dim, c % right_dim);
            m[(ra * left_dim + ca, rb * right_dim + cb)] = h[(r, c)];
        }
    }
    m
}

/// Operator Schmidt rank of `h` across every tree edge: the minimal TTNO bond
/// dimension on that edge.
pub fn optimal_bond_dims(h: &Hamiltonian, registry: &OperatorRegistry, cap: usize) -> Result<BTreeMap<Edge, usize>> {
    let tree = h.tree();
    let base: Vec<SiteId> = tree.preorder();
    let dense = h.to_dense(&base, registry, cap)?;
    let dims: Vec<usize> = base.iter().map(|&s| tree.phys_dim(s)).collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    for e in tree.edges() {
        let below = tree.subtree(tree.lower_endpoint(e)?)?;
        let order: Vec<SiteId> = base
            .iter()
            .filter(|s| below.contains(s))
            .chain(base.iter().filter(|s| !below.contains(s)))
            .copied()
            .collect();
        let left_dim: usize = below.iter().map(|&s| tree.phys_dim(s)).product::<Result<usize>>()?;
        let permuted = permute_sites(&dense, &base, &dims, &order);
        out.insert(e, numerical_rank(&matricize(&permuted, left_dim), RANK_TOL)?);
    }
    Ok(out)
}

/// Per-edge dimensions from the state diagram next to the rank optimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BondReport {
    pub bonds: BTreeMap<Edge, (usize, usize)>,
}

impl BondReport {
    pub fn new(diagram: &StateDiagram, optimal: &BTreeMap<Edge, usize>) -> Result<Self> {
        let alg = diagram.bond_dimensions();
        if alg.keys().collect::<BTreeSet<_>>() != optimal.keys().collect::<BTreeSet<_>>() {
            return Err(Error::InvalidInput("edge sets differ".into()));
        }
        Ok(BondReport { bonds: alg.into_iter().map(|(e, a)| (e, (a, optimal[&e]))).collect() })
    }

    /// `Σ_e (alg − opt)`.
    pub fn excess(&self) -> i64 {
        self.bonds.values().map(|&(a, o)| a as i64 - o as i64).sum()
    }

    /// Edges where the diagram beats the rank, which would be a bug.
    pub fn violations(&self) -> Vec<Edge> {
        self.bonds.iter().filter(|(_, &(a, o))| o > a).map(|(&e, _)| e).collect()
    }
}

/// One random sample of the benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub seed: u64,
    pub n_terms: usize,
    pub report: BondReport,
}

impl BenchRecord {
    /// Mean excess over this sample's bonds.
    pub fn r_diff(&self) -> f64 {
        self.report.excess() as f64 / self.report.bonds.len() as f64
    }
}

/// `Σ (D_alg − D_opt) / (N_samples · N_bonds)`.
pub fn r_diff(records: &[BenchRecord]) -> Result<f64> {
    let first = records.first().ok_or_else(|| Error::InvalidInput("no records".into()))?;
    let edges: Vec<&Edge> = first.report.bonds.keys().collect();
    if edges.is_empty() {
        return Err(Error::InvalidInput("records have no bonds".into()));
    }
    let mut total = 0i64;
    for r in records {
        if r.report.bonds.keys().collect::<Vec<_>>() != edges {
            return Err(Error::InvalidInput("records have different edge sets".into()));
        }
        total += r.report.excess();
    }
    Ok(total as f64 / (records.len() * edges.len()) as f64)
}

/// `r_diff` and the standard error of the per-sample means.
pub fn r_diff_with_error(records: &[BenchRecord]) -> Result<(f64, f64)> {
    let mean = r_diff(records)?;
    let n = records.len() as f64;
    if records.len() < 2 {
        return Ok((mean, 0.0));
    }
    let var = records.iter().map(|r| (r.r_diff() - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
