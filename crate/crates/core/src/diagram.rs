//! State diagrams: directed hypergraphs whose vertices are bond-index values and
//! whose labelled hyperedges are the non-zero elements of the operator tensors.
//!
//! Vertices are grouped by tree edge (`w_e`), hyperedges by site (`ε_s`). A
//! hyperedge at site `s` connects exactly one vertex on every tree edge incident
//! to `s`, listed in canonical leg order (parent edge first, then children by
//! ascending id). Single paths pick one hyperedge per site such that neighbours
//! agree on the shared vertex; the product of their labels is one term.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ProductTerm, TermKey};
use crate::operator::SiteOperator;
use crate::tree::{Edge, SiteId, TreeTopology};

/// Default cap on the number of single paths materialised by enumeration.
pub const DEFAULT_PATH_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperEdgeId(usize);

impl HyperEdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
pub struct Vertex {
    edge: Edge,
    // hyperedges attached from the lower-id endpoint, then from the higher-id one
    lo: Vec<HyperEdgeId>,
    hi: Vec<HyperEdgeId>,
}

impl Vertex {
    pub fn edge(&self) -> Edge {
        self.edge
    }

    /// Hyperedges of `ε_s` connected to this vertex; `s` must be an endpoint.
    pub fn hyperedges_at(&self, s: SiteId) -> &[HyperEdgeId] {
        let (lo, _) = self.edge.endpoints();
        if s == lo {
            &self.lo
        } else {
            &self.hi
        }
    }

    fn attach(&mut self, s: SiteId, y: HyperEdgeId) {
        let (lo, _) = self.edge.endpoints();
        if s == lo {
            self.lo.push(y)
        } else {
            self.hi.push(y)
        }
    }
}

#[derive(Clone, Debug)]
pub struct HyperEdge {
    site: SiteId,
    label: SiteOperator,
    vertices: Vec<VertexId>,
}

impl HyperEdge {
    pub fn site(&self) -> SiteId {
        self.site
    }

    pub fn label(&self) -> &SiteOperator {
        &self.label
    }

    /// One vertex per incident tree edge, in canonical leg order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }
}

/// One hyperedge per site, consistent on every shared vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinglePath {
    pub chosen: BTreeMap<SiteId, HyperEdgeId>,
}

#[derive(Clone, Copy, Debug)]
pub struct DiagramOptions {
    /// When false, every term gets a disconnected path of its own (naive union).
    pub reuse_subtrees: bool,
    pub path_cap: u128,
}

impl Default for DiagramOptions {
    fn default() -> Self {
        DiagramOptions { reuse_subtrees: true, path_cap: DEFAULT_PATH_CAP }
    }
}

impl DiagramOptions {
    pub fn naive() -> Self {
        DiagramOptions { reuse_subtrees: false, ..Default::default() }
    }
}

#[derive(Clone, Debug)]
pub struct StateDiagram {
    tree: TreeTopology,
    options: DiagramOptions,
    incident: BTreeMap<SiteId, Vec<Edge>>,
    vertices: Vec<Vertex>,
    hyperedges: Vec<HyperEdge>,
    vertex_collections: BTreeMap<Edge, Vec<VertexId>>,
    hyperedge_collections: BTreeMap<SiteId, Vec<HyperEdgeId>>,
    // (label, vertices) → hyperedge, per site
    lookup: HashMap<SiteId, HashMap<(SiteOperator, Vec<VertexId>), HyperEdgeId>>,
    terms: HashSet<TermKey>,
    work: u64,
}

/// Vertices marked while matching one new term.
struct Marks {
    set: HashSet<VertexId>,
    by_edge: HashMap<Edge, Vec<VertexId>>,
}

impl Marks {
    fn new() -> Self {
        Marks { set: HashSet::new(), by_edge: HashMap::new() }
    }

    fn contains(&self, v: VertexId) -> bool {
        self.set.contains(&v)
    }

    fn mark(&mut self, v: VertexId, e: Edge) {
        if self.set.insert(v) {
            self.by_edge.entry(e).or_default().push(v);
        }
    }

    fn on_edge(&self, e: Edge) -> &[VertexId] {
        self.by_edge.get(&e).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl StateDiagram {
    fn empty(tree: &TreeTopology, options: DiagramOptions) -> Self {
        let incident = tree.nodes().map(|s| (s, tree.incident_edges(s).unwrap())).collect();
        StateDiagram {
            tree: tree.clone(),
            options,
            incident,
            vertices: Vec::new(),
            hyperedges: Vec::new(),
            vertex_collections: tree.edges().into_iter().map(|e| (e, Vec::new())).collect(),
            hyperedge_collections: tree.nodes().map(|s| (s, Vec::new())).collect(),
            lookup: tree.nodes().map(|s| (s, HashMap::new())).collect(),
            terms: HashSet::new(),
            work: 0,
        }
    }

    /// Diagram of a single term: one vertex per tree edge, one hyperedge per site.
    pub fn single_term(tree: &TreeTopology, term: &ProductTerm, options: DiagramOptions) -> Result<Self> {
        let term = prepare(tree, term)?;
        let mut d = StateDiagram::empty(tree, options);
        let mut edge_vertex: HashMap<Edge, VertexId> = HashMap::new();
        for s in tree.nodes() {
            let mut vs = Vec::new();
            for &e in &d.incident[&s].clone() {
                let v = match edge_vertex.get(&e) {
                    Some(&v) => v,
                    None => {
                        let v = d.new_vertex(e);
                        edge_vertex.insert(e, v);
                        v
                    }
                };
                vs.push(v);
            }
            let label = term.operator_at(s, tree.phys_dim(s)?);
            d.new_hyperedge(s, label, vs)?;
        }
        d.terms.insert(term.key());
        Ok(d)
    }

    /// Builds the diagram of a whole Hamiltonian: coefficients are folded, the
    /// first term seeds the diagram and the rest are added in list order.
    pub fn from_hamiltonian(h: &Hamiltonian, options: DiagramOptions) -> Result<Self> {
        let tree = h.tree();
        if tree.len() > 2 && tree.neighbours(tree.root())?.len() == 1 {
            log::warn!("root {} has a single neighbour; bond dimensions will be larger", tree.root());
        }
        let mut terms = h.folded_terms().into_iter();
        let mut d = match terms.next() {
            Some(first) => StateDiagram::single_term(tree, &first, options)?,
            None => StateDiagram::empty(tree, options),
        };
        for t in terms {
            d.add_term(&t)?;
        }
        Ok(d)
    }

    /// Adds exactly one new single path representing `term`, reusing existing
    /// subtree paths that can be shared without creating extra paths.
    pub fn add_term(&mut self, term: &ProductTerm) -> Result<()> {
        let term = prepare(&self.tree, term)?;
        let key = term.key();
        if self.terms.contains(&key) {
            return Err(Error::DuplicateTerm(term.to_string()));
        }
        let ops: BTreeMap<SiteId, SiteOperator> =
            self.tree.nodes().map(|s| (s, term.operator_at(s, self.tree.phys_dim(s).unwrap()))).collect();

        let mut marks = Marks::new();
        if self.options.reuse_subtrees {
            for leaf in self.tree.leaves() {
                self.match_from_leaf(leaf, &ops, &mut marks);
            }
        }

        for s in self.tree.nodes().collect::<Vec<_>>() {
            let edges = self.incident[&s].clone();
            for &e in &edges {
                if marks.on_edge(e).is_empty() {
                    let v = self.new_vertex(e);
                    marks.mark(v, e);
                }
            }
            let label = ops[&s].clone();
            let exists = self.hyperedge_collections[&s].iter().any(|&y| {
                let he = &self.hyperedges[y.0];
                he.label == label && he.vertices.iter().all(|&v| marks.contains(v))
            });
            if !exists {
                let vs: Vec<VertexId> = edges.iter().map(|&e| marks.on_edge(e)[0]).collect();
                self.new_hyperedge(s, label, vs)?;
            }
        }
        self.terms.insert(key);
        Ok(())
    }

    /// Walks from `leaf` towards the rest of the tree, marking vertices whose
    /// partial path already reproduces the new term on the walked side.
    fn match_from_leaf(&mut self, leaf: SiteId, ops: &BTreeMap<SiteId, SiteOperator>, marks: &mut Marks) {
        let mut site = leaf;
        let mut candidates: Vec<HyperEdgeId> = self.hyperedge_collections[&leaf].clone();
        loop {
            let label = &ops[&site];
            let mut next = None;
            for &y in &candidates {
                let he = &self.hyperedges[y.0];
                if &he.label != label {
                    continue;
                }
                self.work += 1;
                let mut unmarked = he.vertices.iter().filter(|&&v| !marks.contains(v));
                let (Some(&v), None) = (unmarked.next(), unmarked.next()) else {
                    continue;
                };
                let vertex = &self.vertices[v.0];
                if vertex.hyperedges_at(site).len() != 1 {
                    continue;
                }
                let e = vertex.edge;
                // one mark per edge: walks arriving from opposite sides must not both claim it
                if !marks.on_edge(e).is_empty() {
                    continue;
                }
                marks.mark(v, e);
                let other = e.other(site).expect("vertex edge contains site");
                next = Some((other, self.vertices[v.0].hyperedges_at(other).to_vec()));
                break;
            }
            match next {
                Some((s, j)) => {
                    site = s;
                    candidates = j;
                }
                None => break,
            }
        }
    }

    fn new_vertex(&mut self, e: Edge) -> VertexId {
        let id = VertexId(self.vertices.len());
        self.vertices.push(Vertex { edge: e, lo: Vec::new(), hi: Vec::new() });
        self.vertex_collections.get_mut(&e).expect("tree edge").push(id);
        id
    }

    fn new_hyperedge(&mut self, s: SiteId, label: SiteOperator, vertices: Vec<VertexId>) -> Result<HyperEdgeId> {
        let id = HyperEdgeId(self.hyperedges.len());
        let key = (label.clone(), vertices.clone());
        let site_lookup = self.lookup.get_mut(&s).expect("tree site");
        if site_lookup.contains_key(&key) {
            return Err(Error::Consistency(format!("mergeable hyperedges `{}` at site {s}", label.label())));
        }
        site_lookup.insert(key, id);
        for &v in &vertices {
            self.vertices[v.0].attach(s, id);
        }
        self.hyperedges.push(HyperEdge { site: s, label, vertices });
        self.hyperedge_collections.get_mut(&s).expect("tree site").push(id);
        Ok(id)
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn options(&self) -> DiagramOptions {
        self.options
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn hyperedge(&self, y: HyperEdgeId) -> &HyperEdge {
        &self.hyperedges[y.0]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn hyperedge_count(&self) -> usize {
        self.hyperedges.len()
    }

    /// `w_e`, in insertion order.
    pub fn vertices_on(&self, e: Edge) -> &[VertexId] {
        self.vertex_collections.get(&e).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `ε_s`, in insertion order.
    pub fn hyperedges_at(&self, s: SiteId) -> &[HyperEdgeId] {
        self.hyperedge_collections.get(&s).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Canonical leg order at `s`.
    pub fn legs(&self, s: SiteId) -> &[Edge] {
        &self.incident[&s]
    }

    /// Number of terms represented, which equals the number of single paths.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Hyperedges inspected while matching terms against existing subtrees.
    pub fn work(&self) -> u64 {
        self.work
    }

    /// `|w_e|` for every tree edge.
    pub fn bond_dimensions(&self) -> BTreeMap<Edge, usize> {
        self.vertex_collections.iter().map(|(&e, vs)| (e, vs.len())).collect()
    }

    pub fn max_bond_dimension(&self) -> usize {
        self.vertex_collections.values().map(Vec::len).max().unwrap_or(1)
    }

    /// Number of single paths, saturating at `u128::MAX`.
    pub fn path_count(&self) -> u128 {
        let root = self.tree.root();
        let mut below: HashMap<VertexId, u128> = HashMap::new();
        for s in self.tree.postorder() {
            if s == root {
                continue;
            }
            let up = self.incident[&s][0];
            for &v in &self.vertex_collections[&up] {
                let total = self.vertices[v.0]
                    .hyperedges_at(s)
                    .iter()
                    .map(|&y| self.product_below(y, &below))
                    .fold(0u128, u128::saturating_add);
                below.insert(v, total);
            }
        }
        self.hyperedge_collections[&root]
            .iter()
            .map(|&y| self.product_below(y, &below))
            .fold(0u128, u128::saturating_add)
    }

    fn product_below(&self, y: HyperEdgeId, below: &HashMap<VertexId, u128>) -> u128 {
        let he = &self.hyperedges[y.0];
        let skip = usize::from(he.site != self.tree.root());
        he.vertices[skip..].iter().map(|v| below[v]).fold(1u128, u128::saturating_mul)
    }

    /// Every single path of the diagram.
    pub fn single_paths(&self) -> Result<Vec<SinglePath>> {
        let count = self.path_count();
        if count > self.options.path_cap {
            return Err(Error::PathCapExceeded { count, cap: self.options.path_cap });
        }
        let root = self.tree.root();
        let mut out = Vec::new();
        for &y in &self.hyperedge_collections[&root] {
            let mut partials = vec![BTreeMap::from([(root, y)])];
            for &v in &self.hyperedges[y.0].vertices {
                let subs = self.partials_below(v, root);
                partials = partials
                    .into_iter()
                    .flat_map(|p| {
                        subs.iter().map(move |sub| {
                            let mut merged = p.clone();
                            merged.extend(sub.iter().map(|(k, v)| (*k, *v)));
                            merged
                        })
                    })
                    .collect();
            }
            out.extend(partials.into_iter().map(|chosen| SinglePath { chosen }));
        }
        Ok(out)
    }

    /// Partial paths on the far side of `v` as seen from `from`.
    fn partials_below(&self, v: VertexId, from: SiteId) -> Vec<BTreeMap<SiteId, HyperEdgeId>> {
        let vertex = &self.vertices[v.0];
        let s = vertex.edge.other(from).expect("endpoint");
        let mut out = Vec::new();
        for &y in vertex.hyperedges_at(s) {
            let mut partials = vec![BTreeMap::from([(s, y)])];
            for &w in &self.hyperedges[y.0].vertices {
                if w == v {
                    continue;
                }
                let subs = self.partials_below(w, s);
                partials = partials
                    .into_iter()
                    .flat_map(|p| {
                        subs.iter().map(move |sub| {
                            let mut merged = p.clone();
                            merged.extend(sub.iter().map(|(k, v)| (*k, *v)));
                            merged
                        })
                    })
                    .collect();
            }
            out.extend(partials);
        }
        out
    }

    /// The term encoded by one single path (identities left implicit).
    pub fn path_term(&self, path: &SinglePath) -> Result<ProductTerm> {
        let factors = path
            .chosen
            .iter()
            .map(|(&s, &y)| (s, self.hyperedges[y.0].label.clone()))
            .filter(|(_, op)| !op.is_identity());
        ProductTerm::new(num_complex::Complex64::new(1.0, 0.0), factors)
    }

    /// Products of hyperedge labels along every single path.
    pub fn enumerate_single_paths(&self) -> Result<Vec<ProductTerm>> {
        self.single_paths()?.iter().map(|p| self.path_term(p)).collect()
    }

    /// Checks the structural invariants: covering, leg consistency, every
    /// vertex reachable from both sides, no mergeable hyperedges.
    pub fn check_consistency(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (e, vs) in &self.vertex_collections {
            for &v in vs {
                if !seen.insert(v) || self.vertices[v.0].edge != *e {
                    return Err(Error::Consistency(format!("vertex {} misfiled", v.0)));
                }
                let (a, b) = e.endpoints();
                let vx = &self.vertices[v.0];
                if vx.hyperedges_at(a).is_empty() || vx.hyperedges_at(b).is_empty() {
                    return Err(Error::Consistency(format!("vertex {} on {e} is dangling", v.0)));
                }
            }
        }
        if seen.len() != self.vertices.len() {
            return Err(Error::Consistency("vertex collections do not cover all vertices".into()));
        }
        let mut keys = HashSet::new();
        let mut count = 0;
        for (s, ys) in &self.hyperedge_collections {
            for &y in ys {
                count += 1;
                let he = &self.hyperedges[y.0];
                if he.site != *s || he.vertices.len() != self.incident[s].len() {
                    return Err(Error::Consistency(format!("hyperedge {} misfiled", y.0)));
                }
                for (&v, &e) in he.vertices.iter().zip(&self.incident[s]) {
                    if self.vertices[v.0].edge != e {
                        return Err(Error::Consistency(format!("hyperedge {} leg mismatch", y.0)));
                    }
                }
                if !keys.insert((*s, he.label.clone(), he.vertices.clone())) {
                    return Err(Error::Consistency(format!("mergeable hyperedges at site {s}")));
                }
            }
        }
        if count != self.hyperedges.len() {
            return Err(Error::Consistency("hyperedge collections do not cover all hyperedges".into()));
        }
        Ok(())
    }

    /// Line-oriented text listing, stable for identical inputs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "state-diagram root={}", self.tree.root()).unwrap();
        for (e, vs) in &self.vertex_collections {
            let ids: Vec<String> = vs.iter().map(|v| format!("v{}", v.0)).collect();
            writeln!(out, "edge {e}: {}", ids.join(" ")).unwrap();
        }
        for (s, ys) in &self.hyperedge_collections {
            for &y in ys {
                let he = &self.hyperedges[y.0];
                let ids: Vec<String> = he.vertices.iter().map(|v| format!("v{}", v.0)).collect();
                writeln!(out, "site {s}: y{} [{}] ({})", y.0, he.label.label(), ids.join(",")).unwrap();
            }
        }
        out
    }
}

fn prepare(tree: &TreeTopology, term: &ProductTerm) -> Result<ProductTerm> {
    let folded = term.fold_coefficient(tree)?;
    for (&s, op) in folded.factors() {
        let d = tree.phys_dim(s)?;
        if op.dim() != d {
            return Err(Error::InvalidTerm(format!("operator at site {s} has dimension {}, site has {d}", op.dim())));
        }
    }
    Ok(folded)
}
