//! Single-site operators and the label → matrix registry.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

/// Reserved label of the identity operator.
pub const IDENTITY: &str = "I";

#[derive(Clone, Debug)]
enum Numeric {
    /// Resolved through the registry, multiplied by `scale`.
    Registry {
        base: String,
        scale: Complex64,
    },
    Explicit(Arc<Matrix>),
}

/// A labelled operator acting on one site.
///
/// Equality, ordering and hashing look only at `(label, dim)`: two operators
/// with the same symbol are the same operator, whatever numbers back them.
#[derive(Clone, Debug)]
pub struct SiteOperator {
    label: String,
    dim: usize,
    numeric: Numeric,
}

impl SiteOperator {
    /// An operator whose matrix is looked up in the registry by its label.
    pub fn new(label: impl Into<String>, dim: usize) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::InvalidOperator("empty label".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidOperator(format!("`{label}` has dimension 0")));
        }
        Ok(SiteOperator {
            numeric: Numeric::Registry { base: label.clone(), scale: Complex64::new(1.0, 0.0) },
            label,
            dim,
        })
    }

    /// An operator carrying its own matrix.
    pub fn with_matrix(label: impl Into<String>, matrix: Matrix) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::InvalidOperator("empty label".into()));
        }
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidOperator(format!(
                "`{label}` matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dim = matrix.nrows();
        if label == IDENTITY && matrix != Matrix::identity(dim, dim) {
            return Err(Error::InvalidOperator("label `I` is reserved for the identity".into()));
        }
        Ok(SiteOperator { label, dim, numeric: Numeric::Explicit(Arc::new(matrix)) })
    }

    pub fn identity(dim: usize) -> Self {
        SiteOperator::new(IDENTITY, dim).expect("identity dimension must be positive")
    }

    /// Registry operator `base` multiplied by `scale`, published under `label`.
    pub fn scaled_registry(
        label: impl Into<String>,
        base: impl Into<String>,
        scale: Complex64,
        dim: usize,
    ) -> Result<Self> {
        let mut op = SiteOperator::new(label, dim)?;
        op.numeric = Numeric::Registry { base: base.into(), scale };
        Ok(op)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.label == IDENTITY
    }

    /// `c * self`, labelled `"{c}*{label}"`.
    pub fn scaled(&self, c: Complex64) -> SiteOperator {
        let label = format!("{}*{}", format_coefficient(c), self.label);
        let numeric = match &self.numeric {
            Numeric::Registry { base, scale } => Numeric::Registry { base: base.clone(), scale: scale * c },
            Numeric::Explicit(m) => Numeric::Explicit(Arc::new(m.as_ref() * c)),
        };
        SiteOperator { label, dim: self.dim, numeric }
    }

    pub fn matrix(&self, registry: &OperatorRegistry) -> Result<Matrix> {
        match &self.numeric {
            Numeric::Explicit(m) => Ok(m.as_ref().clone()),
            Numeric::Registry { base, scale } => {
                let m = registry
                    .get(base, self.dim)
                    .ok_or_else(|| Error::UnknownLabel { label: base.clone(), dim: self.dim })?;
                Ok(if *scale == Complex64::new(1.0, 0.0) { m } else { m * *scale })
            }
        }
    }
}

impl PartialEq for SiteOperator {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.dim == other.dim
    }
}

impl Eq for SiteOperator {}

impl Hash for SiteOperator {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.label.hash(state);
        self.dim.hash(state);
    }
}

impl PartialOrd for SiteOperator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SiteOperator {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.label, self.dim).cmp(&(&other.label, other.dim))
    }
}

impl fmt::Display for SiteOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Shortest exact text for a coefficient: `-0.5` for reals, `(1+2i)` otherwise.
pub fn format_coefficient(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

/// Maps labels to dense matrices per physical dimension.
///
/// Built-ins: `I` at any dimension, Pauli `X`, `Y`, `Z` at dimension 2, and the
/// truncated bosonic `B`, `Bdag`, `N` at any dimension. Custom entries shadow
/// built-ins.
#[derive(Clone, Debug)]
pub struct OperatorRegistry {
    custom: BTreeMap<(String, usize), Matrix>,
    builtins: bool,
}

impl Default for OperatorRegistry {
    fn default() -> Self {
        OperatorRegistry { custom: BTreeMap::new(), builtins: true }
    }
}

impl OperatorRegistry {
    pub fn empty() -> Self {
        OperatorRegistry { custom: BTreeMap::new(), builtins: false }
    }

    pub fn insert(&mut self, label: impl Into<String>, matrix: Matrix) -> Result<()> {
        let label = label.into();
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidOperator(format!("`{label}` matrix is not square")));
        }
        let dim = matrix.nrows();
        if label == IDENTITY && matrix != Matrix::identity(dim, dim) {
            return Err(Error::InvalidOperator("label `I` is reserved for the identity".into()));
        }
        self.custom.insert((label, dim), matrix);
        Ok(())
    }

    pub fn get(&self, label: &str, dim: usize) -> Option<Matrix> {
        if let Some(m) = self.custom.get(&(label.to_string(), dim)) {
            return Some(m.clone());
        }
        if self.builtins {
            builtin(label, dim)
        } else {
            None
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn builtin(label: &str, dim: usize) -> Option<Matrix> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match (label, dim) {
        (IDENTITY, d) if d > 0 => Some(Matrix::identity(d, d)),
        ("X", 2) => Some(Matrix::from_row_slice(2, 2, &[zero, one, one, zero])),
        ("Y", 2) => Some(Matrix::from_row_slice(2, 2, &[zero, c(0.0, -1.0), c(0.0, 1.0), zero])),
        ("Z", 2) => Some(Matrix::from_row_slice(2, 2, &[one, zero, zero, -one])),
        ("B", d) if d > 0 => {
            Some(Matrix::from_fn(d, d, |r, col| if col == r + 1 { c((col as f64).sqrt(), 0.0) } else { zero }))
        }
        ("Bdag", d) if d > 0 => {
            Some(Matrix::from_fn(d, d, |r, col| if r == col + 1 { c((r as f64).sqrt(), 0.0) } else { zero }))
        }
        ("N", d) if d > 0 => Some(Matrix::from_fn(d, d, |r, col| if r == col { c(r as f64, 0.0) } else { zero })),
        _ => None,
    }
}
