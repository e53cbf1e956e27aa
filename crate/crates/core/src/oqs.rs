//! Heisenberg spin chain coupled to bosonic baths, on chain, fork and star
//! trees.
//!
//! Site ids do not depend on the topology: spin `s` is `s(M+1)`, boson
//! `(s, b)` is `s(M+1) + 1 + b`.
//!
//! `−J` and `ω` are ordinary term coefficients and fold onto the first spin of
//! an exchange pair and onto the number operator. The spin-boson coupling is
//! written as `Z ⊗ (g·B)` and `Z ⊗ (g*·B†)`: with `g` folded onto the spin the
//! two coupling terms would get distinct spin factors and every bond behind
//! the spin would need one more index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ProductTerm};
use crate::operator::{format_coefficient, Matrix, OperatorRegistry, SiteOperator};
use crate::tree::{Edge, SiteId, TreeTopology};
use crate::ttno::Ttno;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OqsSpec {
    pub spins: usize,
    pub baths: usize,
    pub j: f64,
    pub g: Complex64,
    pub omega: f64,
    pub boson_dim: usize,
}

impl OqsSpec {
    pub fn new(spins: usize, baths: usize) -> Result<Self> {
        OqsSpec { spins, baths, j: 1.0, g: Complex64::new(0.5, 0.25), omega: 0.75, boson_dim: 2 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.spins < 1 {
            return Err(Error::InvalidInput("at least one spin is needed".into()));
        }
        if self.boson_dim < 2 {
            return Err(Error::InvalidInput("boson dimension must be at least 2".into()));
        }
        Ok(self)
    }

    pub fn spin(&self, s: usize) -> SiteId {
        SiteId((s * (self.baths + 1)) as u32)
    }

    pub fn boson(&self, s: usize, b: usize) -> SiteId {
        SiteId((s * (self.baths + 1) + 1 + b) as u32)
    }

    pub fn site_count(&self) -> usize {
        self.spins * (self.baths + 1)
    }

    /// `Some(s)` for spin sites, `None` for bosons.
    pub fn spin_index(&self, site: SiteId) -> Option<usize> {
        let i = site.0 as usize;
        i.is_multiple_of(self.baths + 1).then_some(i / (self.baths + 1))
    }

    /// `(s, b)` for boson sites.
    pub fn boson_index(&self, site: SiteId) -> Option<(usize, usize)> {
        let i = site.0 as usize;
        let r = i % (self.baths + 1);
        (r != 0).then(|| (i / (self.baths + 1), r - 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    Chain,
    Ftp,
    Star,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Chain, Topology::Ftp, Topology::Star];
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Chain => "chain",
            Topology::Ftp => "ftp",
            Topology::Star => "star",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Topology::Chain),
            "ftp" => Ok(Topology::Ftp),
            "star" => Ok(Topology::Star),
            _ => Err(Error::InvalidInput(format!("unknown topology `{s}`"))),
        }
    }
}

fn with_boson_dims(spec: &OqsSpec, root: SiteId, edges: Vec<(SiteId, SiteId)>) -> Result<TreeTopology> {
    let t = if edges.is_empty() { TreeTopology::single_site(root) } else { TreeTopology::new(root, edges)? };
    let dims: Vec<(SiteId, usize)> =
        (0..spec.spins).flat_map(|s| (0..spec.baths).map(move |b| (spec.boson(s, b), spec.boson_dim))).collect();
    t.with_phys_dims(dims)
}

/// Spin 0, its bosons, spin 1, … as one path, rooted at its middle site.
pub fn chain_topology(spec: &OqsSpec) -> Result<TreeTopology> {
    let n = spec.site_count() as u32;
    let edges = (1..n).map(|i| (SiteId(i - 1), SiteId(i))).collect();
    with_boson_dims(spec, SiteId((n - 1) / 2), edges)
}

/// Spin backbone with one pendant boson chain per spin, rooted at the middle spin.
pub fn ftp_topology(spec: &OqsSpec) -> Result<TreeTopology> {
    let mut edges = Vec::new();
    for s in 0..spec.spins {
        if s > 0 {
            edges.push((spec.spin(s - 1), spec.spin(s)));
        }
        let mut prev = spec.spin(s);
        for b in 0..spec.baths {
            edges.push((prev, spec.boson(s, b)));
            prev = spec.boson(s, b);
        }
    }
    with_boson_dims(spec, spec.spin((spec.spins - 1) / 2), edges)
}

/// Spin backbone with every boson attached directly to its spin.
pub fn star_topology(spec: &OqsSpec) -> Result<TreeTopology> {
    let mut edges = Vec::new();
    for s in 0..spec.spins {
        if s > 0 {
            edges.push((spec.spin(s - 1), spec.spin(s)));
        }
        for b in 0..spec.baths {
            edges.push((spec.spin(s), spec.boson(s, b)));
        }
    }
    with_boson_dims(spec, spec.spin((spec.spins - 1) / 2), edges)
}

pub fn topology(spec: &OqsSpec, kind: Topology) -> Result<TreeTopology> {
    match kind {
        Topology::Chain => chain_topology(spec),
        Topology::Ftp => ftp_topology(spec),
        Topology::Star => star_topology(spec),
    }
}

fn scaled(label: &str, c: Complex64, dim: usize) -> Result<SiteOperator> {
    SiteOperator::scaled_registry(format!("{}*{label}", format_coefficient(c)), label, c, dim)
}

/// `H_S + H_SE + H_E` on `tree`: exchange terms per neighbouring spin pair,
/// then `Z B` and `Z B†` per boson, then `N` per boson.
pub fn oqs_hamiltonian_on(spec: &OqsSpec, tree: &TreeTopology) -> Result<Hamiltonian> {
    let one = Complex64::new(1.0, 0.0);
    let d = spec.boson_dim;
    let mj = Complex64::new(-spec.j, 0.0);
    let mut terms = Vec::new();
    for s in 1..spec.spins {
        for p in ["X", "Y", "Z"] {
            terms.push(ProductTerm::new(
                mj,
                [(spec.spin(s - 1), SiteOperator::new(p, 2)?), (spec.spin(s), SiteOperator::new(p, 2)?)],
            )?);
        }
    }
    for s in 0..spec.spins {
        for b in 0..spec.baths {
            let z = SiteOperator::new("Z", 2)?;
            terms
                .push(ProductTerm::new(one, [(spec.spin(s), z.clone()), (spec.boson(s, b), scaled("B", spec.g, d)?)])?);
            terms.push(ProductTerm::new(
                one,
                [(spec.spin(s), z), (spec.boson(s, b), scaled("Bdag", spec.g.conj(), d)?)],
            )?);
        }
    }
    for s in 0..spec.spins {
        for b in 0..spec.baths {
            terms.push(ProductTerm::new(
                Complex64::new(spec.omega, 0.0),
                [(spec.boson(s, b), SiteOperator::new("N", d)?)],
            )?);
        }
    }
    Hamiltonian::new(tree.clone(), terms)
}

pub fn oqs_hamiltonian(spec: &OqsSpec, kind: Topology) -> Result<Hamiltonian> {
    oqs_hamiltonian_on(spec, &topology(spec, kind)?)
}

/// Bond dimensions of one site's legs, in the customary reporting order:
/// chain `(left, right)`; fork spin `(left spin, right spin, bath)` and boson
/// `(towards spin, away)`; star spin `(left spin, right spin)` then baths.
/// Missing legs at the ends are skipped.
pub fn site_profile(spec: &OqsSpec, kind: Topology, bonds: &BTreeMap<Edge, usize>, site: SiteId) -> Vec<usize> {
    let dim = |a: SiteId, b: SiteId| bonds.get(&Edge::new(a, b)).copied();
    let n = spec.site_count() as u32;
    let mut out = Vec::new();
    match (kind, spec.spin_index(site), spec.boson_index(site)) {
        (Topology::Chain, _, _) => {
            if site.0 > 0 {
                out.extend(dim(SiteId(site.0 - 1), site));
            }
            if site.0 + 1 < n {
                out.extend(dim(site, SiteId(site.0 + 1)));
            }
        }
        (_, Some(s), _) => {
            if s > 0 {
                out.extend(dim(spec.spin(s - 1), site));
            }
            if s + 1 < spec.spins {
                out.extend(dim(site, spec.spin(s + 1)));
            }
            let baths = if kind == Topology::Ftp { spec.baths.min(1) } else { spec.baths };
            for b in 0..baths {
                out.extend(dim(site, spec.boson(s, b)));
            }
        }
        (_, None, Some((s, b))) => {
            let towards = if b == 0 || kind == Topology::Star { spec.spin(s) } else { spec.boson(s, b - 1) };
            out.extend(dim(towards, site));
            if kind == Topology::Ftp && b + 1 < spec.baths {
                out.extend(dim(site, spec.boson(s, b + 1)));
            }
        }
        _ => unreachable!("every site is a spin or a boson"),
    }
    out
}

/// Profiles quoted for non-boundary sites (spins `1..N−1`, their bosons).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportedProfile {
    pub spin: Vec<usize>,
    pub boson: Vec<usize>,
    /// Chain only: the last boson of each group.
    pub last_boson: Option<Vec<usize>>,
}

pub fn reported_bond_dims(kind: Topology, spec: &OqsSpec) -> Result<ReportedProfile> {
    if spec.spins < 3 || spec.baths < 2 {
        return Err(Error::InvalidInput("need N ≥ 3 and M ≥ 2 for non-boundary sites".into()));
    }
    Ok(match kind {
        Topology::Chain => ReportedProfile { spin: vec![5, 6], boson: vec![6, 6], last_boson: Some(vec![6, 5]) },
        Topology::Ftp => ReportedProfile { spin: vec![5, 5, 3], boson: vec![3, 3], last_boson: None },
        Topology::Star => {
            let mut spin = vec![5, 5];
            spin.extend(std::iter::repeat_n(3, spec.baths));
            ReportedProfile { spin, boson: vec![3], last_boson: None }
        }
    })
}

/// Operator-valued matrix: each entry a sum of `coefficient · label`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeMap<(usize, usize), Vec<(Complex64, &'static str)>>,
}

impl OpMatrix {
    fn new(rows: usize, cols: usize) -> Self {
        OpMatrix { rows, cols, entries: BTreeMap::new() }
    }

    fn set(&mut self, r: usize, c: usize, parts: &[(Complex64, &'static str)]) {
        self.entries.insert((r, c), parts.to_vec());
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    pub fn dense_entry(&self, r: usize, c: usize, dim: usize, registry: &OperatorRegistry) -> Result<Matrix> {
        let mut m = Matrix::zeros(dim, dim);
        for &(coef, label) in self.entries.get(&(r, c)).map_or(&[][..], Vec::as_slice) {
            let op = registry.get(label, dim).ok_or_else(|| Error::UnknownLabel { label: label.into(), dim })?;
            m += op * coef;
        }
        Ok(m)
    }

    pub fn dense(&self, dim: usize, registry: &OperatorRegistry) -> Result<Vec<Vec<Matrix>>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.dense_entry(r, c, dim, registry)).collect()).collect()
    }
}

/// Interior MPO tensors of the chain: spin (5×6), boson (6×6) and last boson
/// of a group (6×5). Rows index the left bond, columns the right bond.
pub struct MpoFixtures {
    pub spin: OpMatrix,
    pub boson: OpMatrix,
    pub boson_end: OpMatrix,
}

pub fn mpo_fixtures(spec: &OqsSpec) -> MpoFixtures {
    let one = Complex64::new(1.0, 0.0);
    let mj = Complex64::new(-spec.j, 0.0);
    let w = Complex64::new(spec.omega, 0.0);
    let coupling = [(spec.g, "B"), (spec.g.conj(), "Bdag")];

    let mut spin = OpMatrix::new(5, 6);
    spin.set(0, 0, &[(one, "I")]);
    spin.set(1, 0, &[(mj, "X")]);
    spin.set(2, 0, &[(mj, "Y")]);
    spin.set(3, 0, &[(mj, "Z")]);
    for (c, l) in [(1, "Z"), (2, "X"), (3, "Y"), (4, "Z"), (5, "I")] {
        spin.set(4, c, &[(one, l)]);
    }

    let mut boson = OpMatrix::new(6, 6);
    boson.set(0, 0, &[(one, "I")]);
    boson.set(1, 0, &coupling);
    boson.set(5, 0, &[(w, "N")]);
    for k in 1..6 {
        boson.set(k, k, &[(one, "I")]);
    }

    let mut boson_end = OpMatrix::new(6, 5);
    boson_end.set(0, 0, &[(one, "I")]);
    boson_end.set(1, 0, &coupling);
    boson_end.set(5, 0, &[(w, "N")]);
    for k in 2..6 {
        boson_end.set(k, k - 1, &[(one, "I")]);
    }
    MpoFixtures { spin, boson, boson_end }
}

/// Bond gauge that moves `−J` from the completing spin of an exchange pair to
/// the starting one: `1/(−J)` on the three exchange channels of a bond of size
/// 5 (left of a spin) or 6 (right of a spin and between bosons).
pub fn exchange_gauge(spec: &OqsSpec, bond: usize) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mj = Complex64::new(-spec.j, 0.0);
    let channels = if bond == 5 { 1..4 } else { 2..5 };
    (0..bond).map(|i| if channels.contains(&i) { mj } else { one }).collect()
}

/// `D_L⁻¹ · m · D_R` for diagonal bond gauges `D_L`, `D_R`.
pub fn regauge(m: &OpMatrix, left: &[Complex64], right: &[Complex64]) -> OpMatrix {
    let mut out = OpMatrix::new(m.rows, m.cols);
    for (&(r, c), parts) in &m.entries {
        let f = right[c] / left[r];
        out.entries.insert((r, c), parts.iter().map(|&(k, l)| (k * f, l)).collect());
    }
    out
}

/// A chain TTNO tensor as an operator-valued matrix `[left][right]`.
pub fn chain_site_matrix(ttno: &Ttno, site: SiteId) -> Result<Vec<Vec<Matrix>>> {
    let t = ttno.tensor(site).ok_or(Error::UnknownSite(site))?;
    let legs = t.legs();
    if legs.len() != 2 {
        return Err(Error::InvalidInput(format!("site {site} is not an interior chain site")));
    }
    let left_first = legs[0].0.endpoints().0 < site;
    let (rows, cols) = if left_first { (legs[0].1, legs[1].1) } else { (legs[1].1, legs[0].1) };
    Ok((0..rows)
        .map(|r| (0..cols).map(|c| if left_first { t.slice(&[r, c]) } else { t.slice(&[c, r]) }).collect())
        .collect())
}

/// Searches row and column permutations mapping `a` onto `b` entry-wise
/// within `tol`. Returns `(row_perm, col_perm)` with `a[r][c] ≈ b[row[r]][col[c]]`.
pub fn match_up_to_permutation(a: &[Vec<Matrix>], b: &[Vec<Matrix>], tol: f64) -> Option<(Vec<usize>, Vec<usize>)> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if b.len() != rows || b.first().map_or(0, Vec::len) != cols {
        return None;
    }
    let close = |x: &Matrix, y: &Matrix| x.iter().zip(y.iter()).all(|(p, q)| (p - q).norm() <= tol);
    let mut row_perm = vec![usize::MAX; rows];
    let mut used = vec![false; rows];
    fn rows_rec(
        k: usize,
        a: &[Vec<Matrix>],
        b: &[Vec<Matrix>],
        row_perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        close: &dyn Fn(&Matrix, &Matrix) -> bool,
    ) -> Option<Vec<usize>> {
        let cols = a[0].len();
        if k == a.len() {
            let mut col_perm = vec![usize::MAX; cols];
            let mut cused = vec![false; cols];
            return cols_rec(0, a, b, row_perm, &mut col_perm, &mut cused, close).then_some(col_perm);
        }
        for cand in 0..b.len() {
            if used[cand] {
                continue;
            }
            // cheap filter: same multiset of zero pattern sizes
            let nz = |m: &[Matrix]| m.iter().filter(|x| x.iter().any(|z| z.norm() > 0.0)).count();
            if nz(&a[k]) != nz(&b[cand]) {
                continue;
            }
            used[cand] = true;
            row_perm[k] = cand;
            if let Some(c) = rows_rec(k + 1, a, b, row_perm, used, close) {
                return Some(c);
            }
            used[cand] = false;
        }
        None
    }
    fn cols_rec(
        k: usize,
        a: &[Vec<Matrix>],
        b: &[Vec<Matrix>],
        row_perm: &[usize],
        col_perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        close: &dyn Fn(&Matrix, &Matrix) -> bool,
    ) -> bool {
        if k == col_perm.len() {
            return true;
        }
        for cand in 0..col_perm.len() {
            if used[cand] || !(0..a.len()).all(|r| close(&a[r][k], &b[row_perm[r]][cand])) {
                continue;
            }
            used[cand] = true;
            col_perm[k] = cand;
            if cols_rec(k + 1, a, b, row_perm, col_perm, used, close) {
                return true;
            }
            used[cand] = false;
        }
        false
    }
    rows_rec(0, a, b, &mut row_perm, &mut used, &close).map(|c| (row_perm, c))
}
