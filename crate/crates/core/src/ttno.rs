//! Tree tensor network operators read off a state diagram, their dense
//! contraction, and a bit-exact text dump.
//!
//! Every site tensor has one bond leg per incident tree edge, in canonical
//! order (parent edge first, then children by ascending id; the root has no
//! parent leg), followed by the two physical legs `(out, in)`. Storage is dense
//! and row-major.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::dense::{is_zero, permute_sites};
use crate::diagram::{StateDiagram, VertexId};
use crate::error::{Error, Result};
use crate::hamiltonian::{check_ordering, checked_dim};
use crate::operator::{Matrix, OperatorRegistry};
use crate::tree::{Edge, SiteId, TreeTopology};

#[derive(Clone, Debug, PartialEq)]
pub struct TtnoTensor {
    site: SiteId,
    legs: Vec<(Edge, usize)>,
    phys_dim: usize,
    data: Vec<Complex64>,
}

impl TtnoTensor {
    pub fn zeros(site: SiteId, legs: Vec<(Edge, usize)>, phys_dim: usize) -> Self {
        let len = legs.iter().map(|&(_, d)| d).product::<usize>() * phys_dim * phys_dim;
        TtnoTensor { site, legs, phys_dim, data: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn site(&self) -> SiteId {
        self.site
    }

    pub fn legs(&self) -> &[(Edge, usize)] {
        &self.legs
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    /// `(bond dims…, d, d)`.
    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.legs.iter().map(|&(_, d)| d).collect();
        s.extend([self.phys_dim, self.phys_dim]);
        s
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn bond_dim(&self, e: Edge) -> Option<usize> {
        self.legs.iter().find(|(x, _)| *x == e).map(|&(_, d)| d)
    }

    /// Number of bond index combinations.
    pub fn slice_count(&self) -> usize {
        self.legs.iter().map(|&(_, d)| d).product()
    }

    fn offset(&self, bond: &[usize]) -> usize {
        assert_eq!(bond.len(), self.legs.len(), "one index per bond leg");
        let mut flat = 0;
        for (&i, &(e, d)) in bond.iter().zip(&self.legs) {
            assert!(i < d, "index {i} out of range on {e}");
            flat = flat * d + i;
        }
        flat * self.phys_dim * self.phys_dim
    }

    /// The `d × d` operator at fixed bond indices.
    pub fn slice(&self, bond: &[usize]) -> Matrix {
        let o = self.offset(bond);
        let d = self.phys_dim;
        Matrix::from_row_slice(d, d, &self.data[o..o + d * d])
    }

    pub fn set_slice(&mut self, bond: &[usize], m: &Matrix) {
        let o = self.offset(bond);
        let d = self.phys_dim;
        for r in 0..d {
            for c in 0..d {
                self.data[o + r * d + c] = m[(r, c)];
            }
        }
    }

    pub fn add_to_slice(&mut self, bond: &[usize], m: &Matrix) {
        let o = self.offset(bond);
        let d = self.phys_dim;
        for r in 0..d {
            for c in 0..d {
                self.data[o + r * d + c] += m[(r, c)];
            }
        }
    }

    /// Bond index tuples of all slices, row-major.
    pub fn bond_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let dims: Vec<usize> = self.legs.iter().map(|&(_, d)| d).collect();
        (0..self.slice_count()).map(move |flat| {
            let mut idx = vec![0; dims.len()];
            crate::dense::digits(flat, &dims, &mut idx);
            idx
        })
    }

    pub fn nonzero_slices(&self) -> usize {
        let dd = self.phys_dim * self.phys_dim;
        self.data.chunks(dd).filter(|c| c.iter().any(|z| *z != Complex64::new(0.0, 0.0))).count()
    }

    pub fn nonzero_elements(&self) -> usize {
        self.data.iter().filter(|z| **z != Complex64::new(0.0, 0.0)).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ttno {
    tree: TreeTopology,
    tensors: BTreeMap<SiteId, TtnoTensor>,
}

impl Ttno {
    /// Checks leg order, physical dimensions and bond agreement across edges.
    pub fn new(tree: TreeTopology, tensors: BTreeMap<SiteId, TtnoTensor>) -> Result<Self> {
        let sites: BTreeSet<SiteId> = tree.nodes().collect();
        if tensors.keys().copied().collect::<BTreeSet<_>>() != sites {
            return Err(Error::Consistency("tensor sites differ from tree sites".into()));
        }
        for (&s, t) in &tensors {
            let expected = tree.incident_edges(s)?;
            let legs: Vec<Edge> = t.legs.iter().map(|&(e, _)| e).collect();
            if legs != expected || t.site != s {
                return Err(Error::Consistency(format!("tensor at {s} has non-canonical legs")));
            }
            if t.phys_dim != tree.phys_dim(s)? {
                return Err(Error::Consistency(format!("tensor at {s} has the wrong physical dimension")));
            }
            if t.legs.iter().any(|&(_, d)| d == 0) {
                return Err(Error::Consistency(format!("tensor at {s} has an empty bond")));
            }
        }
        for e in tree.edges() {
            let (a, b) = e.endpoints();
            if tensors[&a].bond_dim(e) != tensors[&b].bond_dim(e) {
                return Err(Error::Consistency(format!("bond {e} has different sizes on its endpoints")));
            }
        }
        Ok(Ttno { tree, tensors })
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn tensors(&self) -> &BTreeMap<SiteId, TtnoTensor> {
        &self.tensors
    }

    pub fn tensor(&self, s: SiteId) -> Option<&TtnoTensor> {
        self.tensors.get(&s)
    }

    pub fn tensor_mut(&mut self, s: SiteId) -> Option<&mut TtnoTensor> {
        self.tensors.get_mut(&s)
    }

    pub fn bond_dimensions(&self) -> BTreeMap<Edge, usize> {
        self.tree.edges().into_iter().map(|e| (e, self.tensors[&e.endpoints().0].bond_dim(e).unwrap())).collect()
    }

    /// `Σ_s Π(bond dims) · d_s²`, computed from the leg dimensions.
    pub fn element_count(&self) -> usize {
        self.tensors.values().map(|t| t.shape().iter().product::<usize>()).sum()
    }

    /// Number of stored entries.
    pub fn dense_element_count(&self) -> usize {
        self.tensors.values().map(|t| t.data.len()).sum()
    }

    pub fn nonzero_element_count(&self) -> usize {
        self.tensors.values().map(TtnoTensor::nonzero_elements).sum()
    }

    /// Contracts every bond and returns the operator with tensor factors in
    /// `ordering`.
    pub fn contract_to_dense(&self, ordering: &[SiteId], cap: usize) -> Result<Matrix> {
        let dims = check_ordering(&self.tree, ordering)?;
        checked_dim(&dims, cap)?;
        let (order, mut mats) = self.contract_below(self.tree.root());
        let m = mats.pop().expect("root has a single trivial index");
        let order_dims: Vec<usize> = order.iter().map(|&s| self.tree.phys_dim(s).unwrap()).collect();
        Ok(permute_sites(&m, &order, &order_dims, ordering))
    }

    /// Dense operators on the subtree of `s` (in pre-order), one per index of
    /// the leg towards the parent.
    fn contract_below(&self, s: SiteId) -> (Vec<SiteId>, Vec<Matrix>) {
        let t = &self.tensors[&s];
        let children = self.tree.children(s).unwrap();
        let sub: Vec<(Vec<SiteId>, Vec<Matrix>)> = children.iter().map(|&c| self.contract_below(c)).collect();
        let mut order = vec![s];
        for (o, _) in &sub {
            order.extend(o);
        }
        let has_parent = self.tree.parent(s).unwrap().is_some();
        let parent_dim = if has_parent { t.legs[0].1 } else { 1 };
        let size: usize = t.phys_dim * sub.iter().map(|(_, m)| m[0].nrows()).product::<usize>();
        let mut out = vec![Matrix::zeros(size, size); parent_dim];
        for bond in t.bond_indices() {
            let slice = t.slice(&bond);
            if is_zero(&slice) {
                continue;
            }
            let p = if has_parent { bond[0] } else { 0 };
            let child_idx = &bond[usize::from(has_parent)..];
            let mut acc = slice;
            for (k, &i) in child_idx.iter().enumerate() {
                acc = acc.kronecker(&sub[k].1[i]);
            }
            out[p] += acc;
        }
        (order, out)
    }

    /// Writes the dump format: header with the tree and leg orders, then each
    /// site's row-major elements as `re im` pairs in shortest round-trip form.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "ttno-dump 1")?;
        writeln!(w, "root {}", self.tree.root())?;
        for (s, d) in self.tree.phys_dims() {
            writeln!(w, "site {s} {d}")?;
        }
        for e in self.tree.edges() {
            let (a, b) = e.endpoints();
            writeln!(w, "edge {a} {b}")?;
        }
        for t in self.tensors.values() {
            let legs: Vec<String> = t.legs.iter().map(|(e, d)| format!("{e}:{d}")).collect();
            writeln!(w, "tensor {} phys {} legs {}", t.site, t.phys_dim, legs.join(" "))?;
            for z in &t.data {
                writeln!(w, "{:?} {:?}", z.re, z.im)?;
            }
        }
        writeln!(w, "end")?;
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(Error::Parse(format!("unexpected end of dump, expected {what}"))),
            }
        };
        let perr = |line: usize, msg: &str| Error::Parse(format!("line {line}: {msg}"));

        let (n, header) = next("header")?;
        if header.trim() != "ttno-dump 1" {
            return Err(perr(n, "not a ttno dump"));
        }
        let (n, root_line) = next("root")?;
        let root: u32 = root_line
            .strip_prefix("root ")
            .and_then(|x| x.trim().parse().ok())
            .ok_or_else(|| perr(n, "bad root line"))?;

        let mut nodes = BTreeSet::new();
        let mut dims = BTreeMap::new();
        let mut edges = Vec::new();
        let mut tensors = BTreeMap::new();
        let mut tree: Option<TreeTopology> = None;
        loop {
            let (n, line) = next("section")?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.first().copied() {
                Some("site") if parts.len() == 3 => {
                    let s = SiteId(parts[1].parse().map_err(|_| perr(n, "bad site id"))?);
                    let d: usize = parts[2].parse().map_err(|_| perr(n, "bad dimension"))?;
                    nodes.insert(s);
                    dims.insert(s, d);
                }
                Some("edge") if parts.len() == 3 => {
                    let a = SiteId(parts[1].parse().map_err(|_| perr(n, "bad edge"))?);
                    let b = SiteId(parts[2].parse().map_err(|_| perr(n, "bad edge"))?);
                    edges.push((a, b));
                }
                Some("tensor") if parts.len() >= 4 && parts[2] == "phys" => {
                    if tree.is_none() {
                        tree = Some(TreeTopology::from_parts(SiteId(root), nodes.clone(), &edges, dims.clone())?);
                    }
                    let s = SiteId(parts[1].parse().map_err(|_| perr(n, "bad site id"))?);
                    let phys: usize = parts[3].parse().map_err(|_| perr(n, "bad dimension"))?;
                    let start = if parts.get(4) == Some(&"legs") { 5 } else { 4 };
                    let mut legs = Vec::new();
                    for leg in &parts[start..] {
                        let (e, d) = leg.split_once(':').ok_or_else(|| perr(n, "bad leg"))?;
                        let (a, b) = e.split_once('-').ok_or_else(|| perr(n, "bad leg"))?;
                        let a = SiteId(a.parse().map_err(|_| perr(n, "bad leg"))?);
                        let b = SiteId(b.parse().map_err(|_| perr(n, "bad leg"))?);
                        legs.push((Edge::new(a, b), d.parse().map_err(|_| perr(n, "bad leg"))?));
                    }
                    let mut t = TtnoTensor::zeros(s, legs, phys);
                    for slot in t.data.iter_mut() {
                        let (n, l) = next("tensor element")?;
                        let (re, im) = l.trim().split_once(' ').ok_or_else(|| perr(n, "bad element"))?;
                        let re: f64 = re.parse().map_err(|_| perr(n, "bad element"))?;
                        let im: f64 = im.trim().parse().map_err(|_| perr(n, "bad element"))?;
                        *slot = Complex64::new(re, im);
                    }
                    tensors.insert(s, t);
                }
                Some("end") => break,
                _ => return Err(perr(n, "unrecognised line")),
            }
        }
        let tree = match tree {
            Some(t) => t,
            None => TreeTopology::from_parts(SiteId(root), nodes, &edges, dims)?,
        };
        Ttno::new(tree, tensors)
    }
}

/// Per-edge bijection from vertices to bond index values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexAssignment {
    per_edge: BTreeMap<Edge, HashMap<VertexId, usize>>,
}

impl IndexAssignment {
    pub fn index(&self, e: Edge, v: VertexId) -> Option<usize> {
        self.per_edge.get(&e).and_then(|m| m.get(&v).copied())
    }

    pub fn dimension(&self, e: Edge) -> usize {
        self.per_edge.get(&e).map_or(0, HashMap::len)
    }
}

/// Numbers the vertices of every `w_e` by insertion order.
pub fn assign_indices(diagram: &StateDiagram) -> IndexAssignment {
    let per_edge = diagram
        .tree()
        .edges()
        .into_iter()
        .map(|e| (e, diagram.vertices_on(e).iter().enumerate().map(|(i, &v)| (v, i)).collect()))
        .collect();
    IndexAssignment { per_edge }
}

/// Writes each hyperedge's operator into the slice addressed by its vertices.
/// Hyperedges with different labels on the same vertices add up.
pub fn emit_tensors(diagram: &StateDiagram, assignment: &IndexAssignment, registry: &OperatorRegistry) -> Result<Ttno> {
    let tree = diagram.tree();
    let mut tensors = BTreeMap::new();
    for s in tree.nodes() {
        let legs: Vec<(Edge, usize)> = diagram.legs(s).iter().map(|&e| (e, assignment.dimension(e))).collect();
        let mut t = TtnoTensor::zeros(s, legs, tree.phys_dim(s)?);
        for &y in diagram.hyperedges_at(s) {
            let he = diagram.hyperedge(y);
            let mut bond = Vec::with_capacity(he.vertices().len());
            for (&v, &e) in he.vertices().iter().zip(diagram.legs(s)) {
                bond.push(
                    assignment
                        .index(e, v)
                        .ok_or_else(|| Error::Consistency(format!("vertex {} has no index on {e}", v.index())))?,
                );
            }
            let m = he.label().matrix(registry)?;
            if m.nrows() != t.phys_dim {
                return Err(Error::Consistency(format!("operator `{}` has the wrong dimension", he.label())));
            }
            t.add_to_slice(&bond, &m);
        }
        tensors.insert(s, t);
    }
    Ttno::new(tree.clone(), tensors)
}

/// Convenience: diagram → indices → tensors.
pub fn ttno_from_diagram(diagram: &StateDiagram, registry: &OperatorRegistry) -> Result<Ttno> {
    emit_tensors(diagram, &assign_indices(diagram), registry)
}
