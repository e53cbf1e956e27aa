//! Rooted trees of quantum sites.
//!
//! The tree is stored undirected with the root recorded separately. Parent and
//! child relations are derived at construction, so [`TreeTopology::reroot`] is a
//! pure function returning a new topology over the same edges.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque site identifier. Iteration everywhere follows ascending id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteId(pub u32);

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for SiteId {
    fn from(v: u32) -> Self {
        SiteId(v)
    }
}

/// Unordered tree edge, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    lo: SiteId,
    hi: SiteId,
}

impl Edge {
    pub fn new(a: SiteId, b: SiteId) -> Self {
        if a <= b {
            Edge { lo: a, hi: b }
        } else {
            Edge { lo: b, hi: a }
        }
    }

    pub fn endpoints(&self) -> (SiteId, SiteId) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, s: SiteId) -> bool {
        self.lo == s || self.hi == s
    }

    /// The endpoint that is not `s`, if `s` is an endpoint.
    pub fn other(&self, s: SiteId) -> Option<SiteId> {
        if self.lo == s {
            Some(self.hi)
        } else if self.hi == s {
            Some(self.lo)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

/// The unique path between two sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub nodes: Vec<SiteId>,
    pub edges: Vec<Edge>,
}

pub const DEFAULT_PHYS_DIM: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeTopology {
    root: SiteId,
    adjacency: BTreeMap<SiteId, Vec<SiteId>>,
    phys_dims: BTreeMap<SiteId, usize>,
    parent: BTreeMap<SiteId, Option<SiteId>>,
    level: BTreeMap<SiteId, usize>,
}

impl TreeTopology {
    /// Builds a tree from its edge list. The node set is the root plus every edge
    /// endpoint; all physical dimensions default to 2.
    pub fn new<I, A>(root: A, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, A)>,
        A: Into<SiteId>,
    {
        let root = root.into();
        let edges: Vec<(SiteId, SiteId)> = edges.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let mut nodes = BTreeSet::new();
        nodes.insert(root);
        for &(a, b) in &edges {
            nodes.insert(a);
            nodes.insert(b);
        }
        Self::from_parts(root, nodes, &edges, BTreeMap::new())
    }

    pub fn single_site(root: impl Into<SiteId>) -> Self {
        let root = root.into();
        Self::from_parts(root, BTreeSet::from([root]), &[], BTreeMap::new()).expect("a single node is always a tree")
    }

    pub(crate) fn from_parts(
        root: SiteId,
        nodes: BTreeSet<SiteId>,
        edges: &[(SiteId, SiteId)],
        dims: BTreeMap<SiteId, usize>,
    ) -> Result<Self> {
        if !nodes.contains(&root) {
            return Err(Error::InvalidTree(format!("root {root} is not a node")));
        }
        let mut adjacency: BTreeMap<SiteId, Vec<SiteId>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidTree(format!("self-loop at {a}")));
            }
            if !nodes.contains(&a) || !nodes.contains(&b) {
                return Err(Error::InvalidTree(format!("edge {a}-{b} has an unknown endpoint")));
            }
            if !seen.insert(Edge::new(a, b)) {
                return Err(Error::InvalidTree(format!("duplicate edge {}", Edge::new(a, b))));
            }
            adjacency.get_mut(&a).unwrap().push(b);
            adjacency.get_mut(&b).unwrap().push(a);
        }
        if edges.len() + 1 != nodes.len() {
            return Err(Error::InvalidTree(format!(
                "{} nodes need {} edges, got {}",
                nodes.len(),
                nodes.len() - 1,
                edges.len()
            )));
        }
        for list in adjacency.values_mut() {
            list.sort_unstable();
        }

        let mut parent = BTreeMap::new();
        let mut level = BTreeMap::new();
        parent.insert(root, None);
        level.insert(root, 0usize);
        let mut queue = VecDeque::from([root]);
        while let Some(s) = queue.pop_front() {
            for &n in &adjacency[&s] {
                if !level.contains_key(&n) {
                    parent.insert(n, Some(s));
                    level.insert(n, level[&s] + 1);
                    queue.push_back(n);
                }
            }
        }
        if level.len() != nodes.len() {
            return Err(Error::InvalidTree("graph is not connected".into()));
        }

        let mut phys_dims: BTreeMap<SiteId, usize> = nodes.iter().map(|&n| (n, DEFAULT_PHYS_DIM)).collect();
        for (s, d) in dims {
            if !nodes.contains(&s) {
                return Err(Error::InvalidTree(format!("physical dimension given for unknown site {s}")));
            }
            if d == 0 {
                return Err(Error::InvalidTree(format!("site {s} has physical dimension 0")));
            }
            phys_dims.insert(s, d);
        }

        Ok(TreeTopology { root, adjacency, phys_dims, parent, level })
    }

    pub fn with_phys_dim(mut self, site: impl Into<SiteId>, dim: usize) -> Result<Self> {
        let site = site.into();
        if dim == 0 {
            return Err(Error::InvalidTree(format!("site {site} has physical dimension 0")));
        }
        match self.phys_dims.get_mut(&site) {
            Some(d) => *d = dim,
            None => return Err(Error::UnknownSite(site)),
        }
        Ok(self)
    }

    pub fn with_phys_dims(mut self, dims: impl IntoIterator<Item = (SiteId, usize)>) -> Result<Self> {
        for (s, d) in dims {
            self = self.with_phys_dim(s, d)?;
        }
        Ok(self)
    }

    /// Same edges and dimensions, rooted at `new_root`.
    pub fn reroot(&self, new_root: impl Into<SiteId>) -> Result<Self> {
        let new_root = new_root.into();
        self.check(new_root)?;
        let edges: Vec<(SiteId, SiteId)> = self.edges().iter().map(|e| e.endpoints()).collect();
        Self::from_parts(new_root, self.adjacency.keys().copied().collect(), &edges, self.phys_dims.clone())
    }

    fn check(&self, s: SiteId) -> Result<()> {
        if self.adjacency.contains_key(&s) {
            Ok(())
        } else {
            Err(Error::UnknownSite(s))
        }
    }

    pub fn root(&self) -> SiteId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn contains(&self, s: SiteId) -> bool {
        self.adjacency.contains_key(&s)
    }

    /// Sites in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = SiteId> + '_ {
        self.adjacency.keys().copied()
    }

    /// All edges in ascending order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .adjacency
            .iter()
            .flat_map(|(&s, ns)| ns.iter().filter(move |&&n| s < n).map(move |&n| Edge::new(s, n)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn phys_dim(&self, s: SiteId) -> Result<usize> {
        self.phys_dims.get(&s).copied().ok_or(Error::UnknownSite(s))
    }

    pub fn phys_dims(&self) -> &BTreeMap<SiteId, usize> {
        &self.phys_dims
    }

    pub fn neighbours(&self, s: SiteId) -> Result<&[SiteId]> {
        self.adjacency.get(&s).map(Vec::as_slice).ok_or(Error::UnknownSite(s))
    }

    pub fn parent(&self, s: SiteId) -> Result<Option<SiteId>> {
        self.parent.get(&s).copied().ok_or(Error::UnknownSite(s))
    }

    pub fn children(&self, s: SiteId) -> Result<Vec<SiteId>> {
        let p = self.parent(s)?;
        Ok(self.adjacency[&s].iter().copied().filter(|&n| Some(n) != p).collect())
    }

    pub fn is_leaf(&self, s: SiteId) -> Result<bool> {
        Ok(self.children(s)?.is_empty())
    }

    /// Sites without children, ascending. A rooted tree's root is a leaf only
    /// when it is the sole site.
    pub fn leaves(&self) -> Vec<SiteId> {
        self.nodes().filter(|&s| self.is_leaf(s).unwrap()).collect()
    }

    /// Distance from the root to `s`.
    pub fn level(&self, s: SiteId) -> Result<usize> {
        self.level.get(&s).copied().ok_or(Error::UnknownSite(s))
    }

    /// Largest distance of any site from the root.
    pub fn depth(&self) -> usize {
        self.level.values().copied().max().unwrap_or(0)
    }

    /// Edges at `s` in canonical leg order: parent edge first, then child edges
    /// by ascending child id.
    pub fn incident_edges(&self, s: SiteId) -> Result<Vec<Edge>> {
        let mut out = Vec::new();
        if let Some(p) = self.parent(s)? {
            out.push(Edge::new(s, p));
        }
        out.extend(self.children(s)?.into_iter().map(|c| Edge::new(s, c)));
        Ok(out)
    }

    /// The child-side endpoint of a tree edge.
    pub fn lower_endpoint(&self, e: Edge) -> Result<SiteId> {
        let (a, b) = e.endpoints();
        if self.parent(a)? == Some(b) {
            Ok(a)
        } else if self.parent(b)? == Some(a) {
            Ok(b)
        } else {
            Err(Error::InvalidInput(format!("{e} is not an edge of the tree")))
        }
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        let (a, b) = e.endpoints();
        self.adjacency.get(&a).is_some_and(|ns| ns.binary_search(&b).is_ok())
    }

    pub fn route(&self, a: SiteId, b: SiteId) -> Result<Route> {
        self.check(a)?;
        self.check(b)?;
        let mut left = vec![a];
        let mut right = vec![b];
        let (mut x, mut y) = (a, b);
        while self.level[&x] > self.level[&y] {
            x = self.parent[&x].unwrap();
            left.push(x);
        }
        while self.level[&y] > self.level[&x] {
            y = self.parent[&y].unwrap();
            right.push(y);
        }
        while x != y {
            x = self.parent[&x].unwrap();
            y = self.parent[&y].unwrap();
            left.push(x);
            right.push(y);
        }
        right.pop();
        left.extend(right.into_iter().rev());
        let edges = left.windows(2).map(|w| Edge::new(w[0], w[1])).collect();
        Ok(Route { nodes: left, edges })
    }

    pub fn distance(&self, a: SiteId, b: SiteId) -> Result<usize> {
        Ok(self.route(a, b)?.edges.len())
    }

    /// All sites within `radius` of `center`.
    pub fn ball(&self, center: SiteId, radius: usize) -> Result<BTreeSet<SiteId>> {
        Ok(self.distances_from(center)?.into_iter().filter(|&(_, d)| d <= radius).map(|(s, _)| s).collect())
    }

    /// Sites at distance exactly `radius` from `center`.
    pub fn boundary(&self, center: SiteId, radius: usize) -> Result<BTreeSet<SiteId>> {
        Ok(self.distances_from(center)?.into_iter().filter(|&(_, d)| d == radius).map(|(s, _)| s).collect())
    }

    fn distances_from(&self, center: SiteId) -> Result<BTreeMap<SiteId, usize>> {
        self.check(center)?;
        let mut dist = BTreeMap::from([(center, 0usize)]);
        let mut queue = VecDeque::from([center]);
        while let Some(s) = queue.pop_front() {
            let d = dist[&s];
            for &n in &self.adjacency[&s] {
                if let std::collections::btree_map::Entry::Vacant(v) = dist.entry(n) {
                    v.insert(d + 1);
                    queue.push_back(n);
                }
            }
        }
        Ok(dist)
    }

    /// `s` together with all of its descendants.
    pub fn subtree(&self, s: SiteId) -> Result<BTreeSet<SiteId>> {
        self.check(s)?;
        let mut out = BTreeSet::new();
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            out.insert(x);
            stack.extend(self.children(x)?);
        }
        Ok(out)
    }

    /// Depth-first pre-order from the root, children visited by ascending id.
    pub fn preorder(&self) -> Vec<SiteId> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(s) = stack.pop() {
            out.push(s);
            let mut ch = self.children(s).unwrap();
            ch.reverse();
            stack.extend(ch);
        }
        out
    }

    /// Children before parents.
    pub fn postorder(&self) -> Vec<SiteId> {
        let mut out = self.preorder();
        out.reverse();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TreeTopology {
        TreeTopology::new(1u32, [(1u32, 2u32), (2, 3), (2, 4), (1, 5), (5, 6), (5, 7), (7, 8)]).unwrap()
    }

    fn ids(v: &[u32]) -> BTreeSet<SiteId> {
        v.iter().map(|&x| SiteId(x)).collect()
    }

    #[test]
    fn distances_on_toy_tree() {
        let t = toy();
        assert_eq!(t.distance(SiteId(3), SiteId(3)).unwrap(), 0);
        assert_eq!(t.distance(SiteId(3), SiteId(4)).unwrap(), 2);
        assert_eq!(t.distance(SiteId(3), SiteId(8)).unwrap(), 5);
        let r = t.route(SiteId(3), SiteId(8)).unwrap();
        assert_eq!(r.nodes, vec![SiteId(3), SiteId(2), SiteId(1), SiteId(5), SiteId(7), SiteId(8)]);
    }

    #[test]
    fn balls_and_boundaries() {
        let t = toy();
        assert_eq!(t.ball(SiteId(1), 0).unwrap(), ids(&[1]));
        assert_eq!(t.ball(SiteId(1), 1).unwrap(), ids(&[1, 2, 5]));
        assert_eq!(t.boundary(SiteId(1), 2).unwrap(), ids(&[3, 4, 6, 7]));
    }

    #[test]
    fn subtrees_and_structure() {
        let t = toy();
        assert_eq!(t.subtree(SiteId(1)).unwrap(), ids(&[1, 2, 3, 4, 5, 6, 7, 8]));
        assert_eq!(t.subtree(SiteId(5)).unwrap(), ids(&[5, 6, 7, 8]));
        assert_eq!(t.subtree(SiteId(6)).unwrap(), ids(&[6]));
        assert_eq!(t.children(SiteId(5)).unwrap(), vec![SiteId(6), SiteId(7)]);
        assert_eq!(t.leaves(), vec![SiteId(3), SiteId(4), SiteId(6), SiteId(8)]);
        assert_eq!(t.depth(), 3);
        assert_eq!(t.parent(SiteId(1)).unwrap(), None);
        assert_eq!(t.parent(SiteId(7)).unwrap(), Some(SiteId(5)));
        assert_eq!(
            t.incident_edges(SiteId(5)).unwrap(),
            vec![Edge::new(SiteId(5), SiteId(1)), Edge::new(SiteId(5), SiteId(6)), Edge::new(SiteId(5), SiteId(7))]
        );
    }

    #[test]
    fn unknown_sites_are_rejected() {
        let t = toy();
        assert!(matches!(t.distance(SiteId(1), SiteId(99)), Err(Error::UnknownSite(_))));
        assert!(matches!(t.subtree(SiteId(0)), Err(Error::UnknownSite(_))));
        assert!(t.reroot(42u32).is_err());
    }

    #[test]
    fn invalid_trees_are_rejected() {
        assert!(TreeTopology::new(1u32, [(1u32, 2u32), (2, 3), (3, 1)]).is_err());
        assert!(TreeTopology::new(1u32, [(1u32, 1u32)]).is_err());
        assert!(TreeTopology::new(1u32, [(1u32, 2u32), (3, 4)]).is_err());
        assert!(TreeTopology::new(1u32, [(1u32, 2u32), (2, 1)]).is_err());
        assert!(toy().with_phys_dim(3u32, 0).is_err());
    }

    #[test]
    fn reroot_keeps_edges() {
        let t = toy().with_phys_dim(6u32, 3).unwrap();
        let r = t.reroot(6u32).unwrap();
        assert_eq!(r.edges(), t.edges());
        assert_eq!(r.phys_dim(SiteId(6)).unwrap(), 3);
        assert_eq!(r.leaves(), vec![SiteId(3), SiteId(4), SiteId(8)]);
        assert_eq!(r.parent(SiteId(5)).unwrap(), Some(SiteId(6)));
    }

    #[test]
    fn single_site_tree() {
        let t = TreeTopology::single_site(0u32);
        assert_eq!(t.leaves(), vec![SiteId(0)]);
        assert_eq!(t.depth(), 0);
        assert!(t.edges().is_empty());
    }
}
