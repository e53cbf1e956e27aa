//! JSON files for trees and Hamiltonians.
//!
//! Tree: `{"root": 1, "phys_dims": {"3": 4}, "edges": [[1, 2], ...]}`, with
//! `phys_dims` optional (default 2).
//!
//! Hamiltonian: `{"terms": [{"coeff": [re, im], "factors": {"2": "X"}}],
//! "operators": {"A": [[[re, im], ...], ...]}}`. `coeff` defaults to 1;
//! `operators` holds row-major matrices for custom labels.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ProductTerm};
use crate::operator::{Matrix, OperatorRegistry, SiteOperator};
use crate::tree::{SiteId, TreeTopology, DEFAULT_PHYS_DIM};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    root: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    phys_dims: BTreeMap<u32, usize>,
    edges: Vec<[u32; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    #[serde(default = "unit")]
    coeff: [f64; 2],
    factors: BTreeMap<u32, String>,
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianFile {
    terms: Vec<TermFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    operators: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn parse_tree(text: &str) -> Result<TreeTopology> {
    let f: TreeFile = parse(text, "tree")?;
    let mut nodes: BTreeSet<SiteId> = f.edges.iter().flatten().map(|&i| SiteId(i)).collect();
    nodes.insert(SiteId(f.root));
    nodes.extend(f.phys_dims.keys().map(|&i| SiteId(i)));
    let mut dims: BTreeMap<SiteId, usize> = nodes.iter().map(|&s| (s, DEFAULT_PHYS_DIM)).collect();
    dims.extend(f.phys_dims.iter().map(|(&i, &d)| (SiteId(i), d)));
    let edges: Vec<(SiteId, SiteId)> = f.edges.iter().map(|&[a, b]| (SiteId(a), SiteId(b))).collect();
    TreeTopology::from_parts(SiteId(f.root), nodes, &edges, dims)
}

pub fn read_tree(path: impl AsRef<Path>) -> Result<TreeTopology> {
    let path = path.as_ref();
    parse_tree(&read(path)?).map_err(|e| with_path(e, path))
}

pub fn tree_to_json(tree: &TreeTopology) -> String {
    let f = TreeFile {
        root: tree.root().0,
        phys_dims: tree.phys_dims().iter().filter(|(_, &d)| d != DEFAULT_PHYS_DIM).map(|(s, &d)| (s.0, d)).collect(),
        edges: tree.edges().iter().map(|e| [e.endpoints().0 .0, e.endpoints().1 .0]).collect(),
    };
    serde_json::to_string_pretty(&f).expect("plain data serialises")
}

/// Parses terms against `tree`; custom operator matrices go into `registry`.
pub fn parse_hamiltonian(text: &str, tree: &TreeTopology, registry: &mut OperatorRegistry) -> Result<Hamiltonian> {
    let f: HamiltonianFile = parse(text, "hamiltonian")?;
    for (label, rows) in &f.operators {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidOperator(format!("`{label}` matrix is not square")));
        }
        let m = Matrix::from_fn(n, n, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1]));
        registry.insert(label.clone(), m)?;
    }
    let mut terms = Vec::with_capacity(f.terms.len());
    for t in &f.terms {
        let mut ops = Vec::new();
        for (&site, label) in &t.factors {
            let s = SiteId(site);
            if label == crate::operator::IDENTITY {
                continue;
            }
            ops.push((s, SiteOperator::new(label.clone(), tree.phys_dim(s)?)?));
        }
        terms.push(ProductTerm::new(Complex64::new(t.coeff[0], t.coeff[1]), ops)?);
    }
    Hamiltonian::new(tree.clone(), terms)
}

pub fn read_hamiltonian(
    path: impl AsRef<Path>,
    tree: &TreeTopology,
    registry: &mut OperatorRegistry,
) -> Result<Hamiltonian> {
    let path = path.as_ref();
    parse_hamiltonian(&read(path)?, tree, registry).map_err(|e| with_path(e, path))
}

/// Labels and coefficients only; registry-backed labels are assumed.
pub fn hamiltonian_to_json(h: &Hamiltonian) -> String {
    let f = HamiltonianFile {
        terms: h
            .terms()
            .iter()
            .map(|t| TermFile {
                coeff: [t.coefficient().re, t.coefficient().im],
                factors: t.factors().iter().map(|(s, op)| (s.0, op.label().to_string())).collect(),
            })
            .collect(),
        operators: BTreeMap::new(),
    };
    serde_json::to_string_pretty(&f).expect("plain data serialises")
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"{"root": 1, "edges": [[1,2],[2,3],[2,4],[1,5],[5,6],[5,7],[7,8]]}"#;

    #[test]
    fn tree_round_trip() {
        let t = parse_tree(TOY).unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(parse_tree(&tree_to_json(&t)).unwrap(), t);
        let d = parse_tree(r#"{"root": 0, "phys_dims": {"1": 3}, "edges": [[1,0]]}"#).unwrap();
        assert_eq!(d.phys_dim(SiteId(1)).unwrap(), 3);
        assert_eq!(parse_tree(&tree_to_json(&d)).unwrap(), d);
        assert_eq!(parse_tree(r#"{"root": 4, "edges": []}"#).unwrap().len(), 1);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_tree("{\"root\": 1,\n \"edges\": [[1,2]") {
            Err(Error::Parse(m)) => assert!(m.contains("line 2"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_tree(r#"{"root": 1, "edges": [[1,2],[2,1]]}"#), Err(Error::InvalidTree(_))));
    }

    #[test]
    fn hamiltonian_round_trip_and_custom_matrices() {
        let t = parse_tree(TOY).unwrap();
        let mut reg = OperatorRegistry::default();
        let text = r#"{"terms": [{"coeff": [0.5, -1], "factors": {"2": "A", "3": "X"}}, {"factors": {"1": "Z"}}],
                       "operators": {"A": [[[0,0],[1,0]],[[2,0],[0,0]]]}}"#;
        let h = parse_hamiltonian(text, &t, &mut reg).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(reg.get("A", 2).unwrap()[(1, 0)], Complex64::new(2.0, 0.0));
        let again = parse_hamiltonian(&hamiltonian_to_json(&h), &t, &mut reg).unwrap();
        assert_eq!(again.terms(), h.terms());
        assert!(matches!(
            parse_hamiltonian(r#"{"terms": [{"factors": {"9": "X"}}]}"#, &t, &mut reg),
            Err(Error::UnknownSite(_))
        ));
    }
}
