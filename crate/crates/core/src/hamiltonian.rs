//! Sums of tensor-product terms on a tree.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{Matrix, OperatorRegistry, SiteOperator};
use crate::tree::{SiteId, TreeTopology};

/// Largest total Hilbert-space dimension materialised densely unless overridden.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Canonical symbolic identity of a term: its non-identity factors as
/// `(site, label, dim)`, ascending by site.
pub type TermKey = Vec<(SiteId, String, usize)>;

/// `coefficient · ⊗_s A^{[s]}`. Sites missing from `factors` carry the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    coefficient: Complex64,
    factors: BTreeMap<SiteId, SiteOperator>,
}

impl ProductTerm {
    pub fn new(coefficient: Complex64, factors: impl IntoIterator<Item = (SiteId, SiteOperator)>) -> Result<Self> {
        if coefficient == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidTerm("coefficient is zero".into()));
        }
        let mut map = BTreeMap::new();
        for (s, op) in factors {
            if op.is_identity() {
                return Err(Error::InvalidTerm(format!("explicit identity factor at site {s}")));
            }
            if map.insert(s, op).is_some() {
                return Err(Error::InvalidTerm(format!("two factors at site {s}")));
            }
        }
        Ok(ProductTerm { coefficient, factors: map })
    }

    /// Convenience constructor taking dimensions from the tree. Identity labels are skipped.
    pub fn from_labels<S, L>(
        coefficient: Complex64,
        tree: &TreeTopology,
        factors: impl IntoIterator<Item = (S, L)>,
    ) -> Result<Self>
    where
        S: Into<SiteId>,
        L: AsRef<str>,
    {
        let mut ops = Vec::new();
        for (s, label) in factors {
            let s = s.into();
            let label = label.as_ref();
            if label == crate::operator::IDENTITY {
                continue;
            }
            ops.push((s, SiteOperator::new(label, tree.phys_dim(s)?)?));
        }
        ProductTerm::new(coefficient, ops)
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn factors(&self) -> &BTreeMap<SiteId, SiteOperator> {
        &self.factors
    }

    pub fn factor(&self, s: SiteId) -> Option<&SiteOperator> {
        self.factors.get(&s)
    }

    /// The operator at `s`, identity where the term acts trivially.
    pub fn operator_at(&self, s: SiteId, dim: usize) -> SiteOperator {
        self.factors.get(&s).cloned().unwrap_or_else(|| SiteOperator::identity(dim))
    }

    /// Absorbs the coefficient into the factor at the smallest site (or an explicit
    /// scaled identity at the root for the all-identity term). The result has
    /// coefficient 1 and a derived label `"{c}*{label}"`.
    pub fn fold_coefficient(&self, tree: &TreeTopology) -> Result<ProductTerm> {
        let one = Complex64::new(1.0, 0.0);
        if self.coefficient == one {
            return Ok(self.clone());
        }
        let mut factors = self.factors.clone();
        match factors.iter_mut().next() {
            Some((_, op)) => *op = op.scaled(self.coefficient),
            None => {
                let root = tree.root();
                factors.insert(root, SiteOperator::identity(tree.phys_dim(root)?).scaled(self.coefficient));
            }
        }
        Ok(ProductTerm { coefficient: one, factors })
    }

    /// Symbolic key of this term as written (call on folded terms for matching).
    pub fn key(&self) -> TermKey {
        self.factors.iter().map(|(&s, op)| (s, op.label().to_string(), op.dim())).collect()
    }

    fn validate_on(&self, tree: &TreeTopology) -> Result<()> {
        for (&s, op) in &self.factors {
            let d = tree.phys_dim(s)?;
            if op.dim() != d {
                return Err(Error::InvalidTerm(format!(
                    "operator `{}` at site {s} has dimension {}, site has {d}",
                    op.label(),
                    op.dim()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ProductTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficient != Complex64::new(1.0, 0.0) {
            write!(f, "{} ", crate::operator::format_coefficient(self.coefficient))?;
        }
        if self.factors.is_empty() {
            return f.write_str("I");
        }
        let parts: Vec<String> = self.factors.iter().map(|(s, op)| format!("{}@{}", op.label(), s)).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Debug)]
pub struct Hamiltonian {
    tree: TreeTopology,
    terms: Vec<ProductTerm>,
}

impl Hamiltonian {
    /// Validates every term against the tree and rejects terms that coincide
    /// symbolically after coefficient folding.
    pub fn new(tree: TreeTopology, terms: Vec<ProductTerm>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &terms {
            t.validate_on(&tree)?;
            let folded = t.fold_coefficient(&tree)?;
            if !seen.insert(folded.key()) {
                return Err(Error::DuplicateTerm(folded.to_string()));
            }
        }
        Ok(Hamiltonian { tree, terms })
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms with coefficients folded into their factors.
    pub fn folded_terms(&self) -> Vec<ProductTerm> {
        self.terms.iter().map(|t| t.fold_coefficient(&self.tree).expect("validated")).collect()
    }

    /// Same terms on a re-rooted copy of the tree.
    pub fn rerooted(&self, root: impl Into<SiteId>) -> Result<Self> {
        Hamiltonian::new(self.tree.reroot(root)?, self.terms.clone())
    }

    /// Dense matrix `Σ_j c_j ⊗_{s ∈ ordering} A_j^{[s]}`, Kronecker factors taken in
    /// `ordering` (first site is the most significant index).
    pub fn to_dense(&self, ordering: &[SiteId], registry: &OperatorRegistry, cap: usize) -> Result<Matrix> {
        let dims = check_ordering(&self.tree, ordering)?;
        let total = checked_dim(&dims, cap)?;
        let mut out = Matrix::zeros(total, total);
        for term in &self.terms {
            let mut acc = Matrix::from_element(1, 1, term.coefficient);
            for (&s, &d) in ordering.iter().zip(&dims) {
                let m = match term.factor(s) {
                    Some(op) => op.matrix(registry)?,
                    None => Matrix::identity(d, d),
                };
                acc = acc.kronecker(&m);
            }
            out += acc;
        }
        Ok(out)
    }
}

/// Checks that `ordering` lists every site exactly once and returns their dimensions.
pub(crate) fn check_ordering(tree: &TreeTopology, ordering: &[SiteId]) -> Result<Vec<usize>> {
    let mut seen = HashSet::new();
    for &s in ordering {
        tree.phys_dim(s)?;
        if !seen.insert(s) {
            return Err(Error::InvalidInput(format!("site {s} appears twice in the ordering")));
        }
    }
    if seen.len() != tree.len() {
        return Err(Error::InvalidInput(format!("ordering lists {} of {} sites", seen.len(), tree.len())));
    }
    ordering.iter().map(|&s| tree.phys_dim(s)).collect()
}

pub(crate) fn checked_dim(dims: &[usize], cap: usize) -> Result<usize> {
    let mut total: usize = 1;
    for &d in dims {
        total = total
            .checked_mul(d)
            .filter(|&t| t <= cap)
            .ok_or(Error::DenseCapExceeded { dim: dims.iter().fold(1usize, |a, &b| a.saturating_mul(b)), cap })?;
    }
    Ok(total)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of distinct terms with support size in `1..=max_support` over `labels` labels.
pub fn distinct_term_count(n_sites: usize, n_labels: usize, max_support: usize) -> f64 {
    (1..=max_support.min(n_sites)).map(|k| binomial(n_sites, k) * (n_labels as f64).powi(k as i32)).sum()
}

/// Random Hamiltonian of `n_terms` pairwise-distinct unit-coefficient terms.
///
/// Each term's support is drawn uniformly among the non-empty site subsets of
/// size at most `max_support`; every supported site gets a label drawn uniformly
/// from `labels`. Deterministic in `seed`.
pub fn random_hamiltonian(
    tree: &TreeTopology,
    n_terms: usize,
    labels: &[&str],
    max_support: usize,
    seed: u64,
) -> Result<Hamiltonian> {
    if n_terms == 0 {
        return Err(Error::InvalidInput("at least one term is required".into()));
    }
    if labels.is_empty() || labels.iter().any(|&l| l == crate::operator::IDENTITY || l.is_empty()) {
        return Err(Error::InvalidInput("labels must be non-empty and identity-free".into()));
    }
    if max_support == 0 {
        return Err(Error::InvalidInput("max_support must be positive".into()));
    }
    let sites: Vec<SiteId> = tree.nodes().collect();
    let n = sites.len();
    let kmax = max_support.min(n);
    if n_terms as f64 > distinct_term_count(n, labels.len(), kmax) {
        return Err(Error::InvalidInput(format!(
            "{n_terms} distinct terms requested, only {} exist",
            distinct_term_count(n, labels.len(), kmax)
        )));
    }
    let weights: Vec<f64> = (1..=kmax).map(|k| binomial(n, k)).collect();
    let total: f64 = weights.iter().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut terms = Vec::with_capacity(n_terms);
    while terms.len() < n_terms {
        let mut u = rng.random_range(0.0..total);
        let mut k = kmax;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                k = i + 1;
                break;
            }
            u -= w;
        }
        let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
        picked.sort_unstable();
        let factors: Vec<(SiteId, &str)> =
            picked.into_iter().map(|i| (sites[i], labels[rng.random_range(0..labels.len())])).collect();
        let term = ProductTerm::from_labels(Complex64::new(1.0, 0.0), tree, factors)?;
        if seen.insert(term.key()) {
            terms.push(term);
        }
    }
    Hamiltonian::new(tree.clone(), terms)
}
