//! Nearest-neighbour TTNOs written down directly.
//!
//! Bond index semantics on the edge between `s` and its parent, seen from the
//! subtree of `s`: `0` identity everywhere below, `1` the operator pairing `s`
//! with its parent sits at `s`, `2` a complete term lives inside the subtree.
//! Leaves never carry a complete term unless they have a field, so the reduced
//! form drops index 2 on leaf bonds.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ProductTerm};
use crate::operator::{OperatorRegistry, SiteOperator};
use crate::tree::{Edge, SiteId, TreeTopology};
use crate::ttno::{Ttno, TtnoTensor};

/// `Σ_{s∼s'} A^{[s]}_{s'} A^{[s']}_s + Σ_s Z_s`.
#[derive(Clone, Debug, Default)]
pub struct NnInteraction {
    /// `(site, partner)` → operator acting on `site` in the pair term.
    ops: BTreeMap<(SiteId, SiteId), SiteOperator>,
    fields: BTreeMap<SiteId, SiteOperator>,
}

impl NnInteraction {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same label on every edge, optionally with a uniform field label.
    pub fn uniform(tree: &TreeTopology, label: &str, field: Option<&str>) -> Result<Self> {
        let mut x = NnInteraction::new();
        for e in tree.edges() {
            let (a, b) = e.endpoints();
            x.set_pair(
                a,
                SiteOperator::new(label, tree.phys_dim(a)?)?,
                b,
                SiteOperator::new(label, tree.phys_dim(b)?)?,
            );
        }
        if let Some(f) = field {
            for s in tree.nodes() {
                x.set_field(s, SiteOperator::new(f, tree.phys_dim(s)?)?);
            }
        }
        Ok(x)
    }

    pub fn set_pair(&mut self, a: SiteId, op_a: SiteOperator, b: SiteId, op_b: SiteOperator) {
        self.ops.insert((a, b), op_a);
        self.ops.insert((b, a), op_b);
    }

    pub fn set_field(&mut self, s: SiteId, op: SiteOperator) {
        self.fields.insert(s, op);
    }

    pub fn operator(&self, site: SiteId, partner: SiteId) -> Option<&SiteOperator> {
        self.ops.get(&(site, partner))
    }

    pub fn field(&self, s: SiteId) -> Option<&SiteOperator> {
        self.fields.get(&s)
    }

    pub fn has_fields(&self) -> bool {
        !self.fields.is_empty()
    }

    fn check(&self, tree: &TreeTopology) -> Result<()> {
        for e in tree.edges() {
            let (a, b) = e.endpoints();
            if !self.ops.contains_key(&(a, b)) || !self.ops.contains_key(&(b, a)) {
                return Err(Error::InvalidInput(format!("no interaction on edge {e}")));
            }
        }
        for &(a, b) in self.ops.keys() {
            if !tree.contains(a) || !tree.contains(b) || !tree.has_edge(Edge::new(a, b)) {
                return Err(Error::InvalidInput(format!("interaction {a}-{b} is not a tree edge")));
            }
        }
        for (&s, op) in self.ops.iter().map(|((s, _), op)| (s, op)).chain(self.fields.iter()) {
            if op.dim() != tree.phys_dim(s)? || op.is_identity() {
                return Err(Error::InvalidInput(format!("bad operator `{op}` at site {s}")));
            }
        }
        Ok(())
    }

    /// The same operator as a term list: edges in canonical order, then fields.
    pub fn to_hamiltonian(&self, tree: &TreeTopology) -> Result<Hamiltonian> {
        self.check(tree)?;
        let one = Complex64::new(1.0, 0.0);
        let mut terms = Vec::new();
        for e in tree.edges() {
            let (a, b) = e.endpoints();
            terms.push(ProductTerm::new(one, [(a, self.ops[&(a, b)].clone()), (b, self.ops[&(b, a)].clone())])?);
        }
        for (&s, op) in &self.fields {
            terms.push(ProductTerm::new(one, [(s, op.clone())])?);
        }
        Hamiltonian::new(tree.clone(), terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NnForm {
    /// Bond dimension 2 into leaves.
    Reduced,
    /// Bond dimension 3 everywhere.
    Unreduced,
}

/// Reduced form without fields, unreduced with fields.
pub fn nn_ttno(tree: &TreeTopology, interaction: &NnInteraction, registry: &OperatorRegistry) -> Result<Ttno> {
    let form = if interaction.has_fields() { NnForm::Unreduced } else { NnForm::Reduced };
    nn_ttno_with(tree, interaction, registry, form)
}

pub fn nn_ttno_with(
    tree: &TreeTopology,
    interaction: &NnInteraction,
    registry: &OperatorRegistry,
    form: NnForm,
) -> Result<Ttno> {
    interaction.check(tree)?;
    if form == NnForm::Reduced && interaction.has_fields() {
        return Err(Error::InvalidInput("single-site fields need index 2 on leaf bonds".into()));
    }
    let full = |c: SiteId| -> Result<bool> { Ok(form == NnForm::Unreduced || !tree.is_leaf(c)?) };
    let mut tensors = BTreeMap::new();
    for s in tree.nodes() {
        let d = tree.phys_dim(s)?;
        let parent = tree.parent(s)?;
        let children = tree.children(s)?;
        let mut legs = Vec::new();
        if let Some(p) = parent {
            legs.push((Edge::new(s, p), if full(s)? { 3 } else { 2 }));
        }
        for &c in &children {
            legs.push((Edge::new(s, c), if full(c)? { 3 } else { 2 }));
        }
        let off = usize::from(parent.is_some());
        let mut t = TtnoTensor::zeros(s, legs.clone(), d);
        let identity = SiteOperator::identity(d);
        {
            let mut at = |idx: Vec<usize>, op: &SiteOperator| -> Result<()> {
                t.set_slice(&idx, &op.matrix(registry)?);
                Ok(())
            };
            let zeros = vec![0; legs.len()];
            if let Some(p) = parent {
                at(zeros.clone(), &identity)?;
                let mut i = zeros.clone();
                i[0] = 1;
                at(i, interaction.operator(s, p).unwrap())?;
            }
            for (k, &c) in children.iter().enumerate() {
                let mut i = zeros.clone();
                if parent.is_some() {
                    i[0] = 2;
                }
                i[off + k] = 1;
                at(i.clone(), interaction.operator(s, c).unwrap())?;
                if full(c)? {
                    i[off + k] = 2;
                    at(i, &identity)?;
                }
            }
            if let Some(z) = interaction.field(s) {
                let mut i = zeros.clone();
                if parent.is_some() {
                    i[0] = 2;
                }
                at(i, z)?;
            }
        }
        tensors.insert(s, t);
    }
    Ttno::new(tree.clone(), tensors)
}
