//! Full Cayley trees and the bond dimensions that long-range pair
//! interactions require at the root.
//!
//! With pairwise-distinct operators no two terms share a non-trivial subtree,
//! so a bond carries one index per term whose route crosses it, plus two for
//! the identity subtrees on either side. The brute-force counters below count
//! exactly that and serve as ground truth for the closed forms.

use std::collections::{BTreeSet, VecDeque};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ProductTerm};
use crate::operator::SiteOperator;
use crate::tree::{SiteId, TreeTopology};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CayleySpec {
    pub degree: usize,
    pub depth: usize,
}

impl CayleySpec {
    pub fn new(degree: usize, depth: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidInput(format!("Cayley degree must be at least 2, got {degree}")));
        }
        if depth < 1 {
            return Err(Error::InvalidInput("Cayley depth must be at least 1".into()));
        }
        Ok(CayleySpec { degree, depth })
    }

    fn branch(&self) -> u128 {
        self.degree as u128 - 1
    }
}

/// Root 0, ids assigned breadth-first.
pub fn cayley_tree(spec: CayleySpec) -> Result<TreeTopology> {
    let mut edges = Vec::new();
    let mut frontier = vec![0u32];
    let mut next = 1u32;
    for level in 0..spec.depth {
        let fanout = if level == 0 { spec.degree } else { spec.degree - 1 };
        let mut new = Vec::new();
        for &p in &frontier {
            for _ in 0..fanout {
                edges.push((p, next));
                new.push(next);
                next += 1;
            }
        }
        frontier = new;
    }
    TreeTopology::new(0u32, edges)
}

/// `1 + Σ_{Δ=1}^{D} κ(κ−1)^{Δ−1}`, the node count of [`cayley_tree`].
pub fn cayley_site_count(spec: CayleySpec) -> u128 {
    1 + (1..=spec.depth as u32).map(|d| spec.degree as u128 * spec.branch().pow(d - 1)).sum::<u128>()
}

/// `1 + D κ (κ−1)^{D−1}`: the sum with a Δ-independent summand, as it is often
/// quoted. Disagrees with the construction for `D ≥ 2, κ ≥ 3`.
pub fn printed_site_count(spec: CayleySpec) -> u128 {
    1 + spec.depth as u128 * spec.degree as u128 * spec.branch().pow(spec.depth as u32 - 1)
}

/// Number of nodes in the first child's subtree at distance `radius` from the
/// root, counted on the constructed tree.
pub fn cayley_shell_count(spec: CayleySpec, radius: usize) -> Result<u128> {
    if radius < 1 {
        return Err(Error::InvalidInput("shell radius must be at least 1".into()));
    }
    let t = cayley_tree(spec)?;
    let child = t.children(t.root())?[0];
    let sub = t.subtree(child)?;
    Ok(t.boundary(t.root(), radius)?.intersection(&sub).count() as u128)
}

/// `(Σ_{δ=1}^{χ−1} (κ−1)^{δ−1}(κ−1)^{χ−δ−1}, (χ−1)(κ−1)^{χ−2})`.
pub fn pair_count_identity(degree: usize, range: usize) -> (u128, u128) {
    let b = degree as u128 - 1;
    let lhs = (1..range as u32).map(|d| b.pow(d - 1) * b.pow(range as u32 - d - 1)).sum();
    let rhs = if range < 2 { 0 } else { (range as u128 - 1) * b.pow(range as u32 - 2) };
    (lhs, rhs)
}

fn check_range(spec: CayleySpec, range: usize) -> Result<()> {
    if range < 1 || range > 2 * spec.depth - 1 {
        return Err(Error::InvalidInput(format!("range {range} outside 1..={}", 2 * spec.depth - 1)));
    }
    Ok(())
}

/// Crossing terms on a root edge for range `χ`.
fn crossing_terms(spec: CayleySpec, range: usize) -> u128 {
    let (d, x) = (spec.depth, range);
    let b = spec.branch();
    // one endpoint at depth δ below the child, the other at depth χ−δ in a sibling subtree
    let lo = 1.max(x.saturating_sub(d));
    let hi = d.min(x.saturating_sub(1));
    let siblings = if hi >= lo { (hi - lo + 1) as u128 * b.pow(x as u32 - 1) } else { 0 };
    let with_root = if x <= d { b.pow(x as u32 - 1) } else { 0 };
    siblings + with_root
}

/// Maximum root bond dimension for range-`χ` interactions, `1 ≤ χ ≤ 2D−1`:
/// `2 + χ(κ−1)^{χ−1}` for `χ ≤ D`, `2 + (2D−χ+1)(κ−1)^{χ−1}` beyond.
pub fn fixed_range_bond_bound(spec: CayleySpec, range: usize) -> Result<u128> {
    check_range(spec, range)?;
    Ok(2 + crossing_terms(spec, range))
}

/// The widely quoted form: `2 + χ(κ−1)^{χ−1}` for `χ ≤ D`, and for `χ > D` the
/// sibling pairs `(κ−1)·(2D−χ)(κ−1)^{χ−2}·θ(χ−2D)`, which vanish on the whole
/// range `D < χ < 2D`.
pub fn printed_fixed_range_bound(spec: CayleySpec, range: usize) -> Result<u128> {
    check_range(spec, range)?;
    let (d, x) = (spec.depth, range);
    if x <= d {
        return Ok(2 + x as u128 * spec.branch().pow(x as u32 - 1));
    }
    let step = if x >= 2 * d { 1 } else { 0 };
    Ok(2 + spec.branch() * (2 * d).saturating_sub(x) as u128 * spec.branch().pow(x as u32 - 2) * step)
}

/// Bound for all ranges `1..=2D−1` at once.
pub fn all_to_all_bound(spec: CayleySpec) -> u128 {
    2 + (1..2 * spec.depth).map(|x| crossing_terms(spec, x)).sum::<u128>()
}

/// `2 + Σ_{χ≤D} χ(κ−1)^{χ−1} + Σ_{D<χ<2D} (2D−χ)(κ−1)^{χ−1}` as printed.
pub fn printed_all_to_all_bound(spec: CayleySpec) -> u128 {
    let (d, b) = (spec.depth, spec.branch());
    let near: u128 = (1..=d).map(|x| x as u128 * b.pow(x as u32 - 1)).sum();
    let far: u128 = (d + 1..2 * d).map(|x| (2 * d - x) as u128 * b.pow(x as u32 - 1)).sum();
    2 + near + far
}

fn distances_from(t: &TreeTopology, a: SiteId) -> Vec<(SiteId, usize)> {
    let mut seen = BTreeSet::from([a]);
    let mut out = Vec::new();
    let mut q = VecDeque::from([(a, 0usize)]);
    while let Some((s, d)) = q.pop_front() {
        out.push((s, d));
        for &n in t.neighbours(s).expect("known site") {
            if seen.insert(n) {
                q.push_back((n, d + 1));
            }
        }
    }
    out
}

/// `2 +` the largest number of site pairs at a distance accepted by `keep`
/// whose route crosses one root edge.
fn brute_force(spec: CayleySpec, keep: impl Fn(usize) -> bool) -> Result<u128> {
    let t = cayley_tree(spec)?;
    let mut best = 0u128;
    for c in t.children(t.root())? {
        let below = t.subtree(c)?;
        let mut n = 0u128;
        for &a in &below {
            n += distances_from(&t, a).into_iter().filter(|&(b, d)| !below.contains(&b) && keep(d)).count() as u128;
        }
        best = best.max(n);
    }
    Ok(best + 2)
}

/// Exhaustive pair count at distance exactly `χ`.
pub fn brute_force_root_bond(spec: CayleySpec, range: usize) -> Result<u128> {
    brute_force(spec, |d| d == range)
}

/// Exhaustive pair count over distances `1..=2D−1`.
pub fn brute_force_all_to_all(spec: CayleySpec) -> Result<u128> {
    brute_force(spec, |d| d >= 1 && d < 2 * spec.depth)
}

/// `Σ_{(s,s'): keep(d(s,s'))} A^{[s]}_{s'} A^{[s']}_s` with a distinct label
/// for every operator, so no subtree can be shared between terms.
pub fn long_range_hamiltonian(tree: &TreeTopology, keep: impl Fn(usize) -> bool) -> Result<Hamiltonian> {
    let one = Complex64::new(1.0, 0.0);
    let nodes: Vec<SiteId> = tree.nodes().collect();
    let mut terms = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if keep(tree.distance(a, b)?) {
                let fa = SiteOperator::new(format!("A{a}_{b}"), tree.phys_dim(a)?)?;
                let fb = SiteOperator::new(format!("A{b}_{a}"), tree.phys_dim(b)?)?;
                terms.push(ProductTerm::new(one, [(a, fa), (b, fb)])?);
            }
        }
    }
    Hamiltonian::new(tree.clone(), terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(k: usize, d: usize) -> CayleySpec {
        CayleySpec::new(k, d).unwrap()
    }

    #[test]
    fn construction_counts() {
        let chain = cayley_tree(spec(2, 3)).unwrap();
        assert_eq!(chain.len(), 7);
        assert!(chain.nodes().all(|s| chain.neighbours(s).unwrap().len() <= 2));
        assert_eq!(chain.depth(), 3);
        assert_eq!(cayley_tree(spec(3, 2)).unwrap().len(), 10);
        assert_eq!(cayley_tree(spec(4, 2)).unwrap().len(), 17);
        for k in 2..5 {
            for d in 1..5 {
                let t = cayley_tree(spec(k, d)).unwrap();
                assert_eq!(cayley_site_count(spec(k, d)), t.len() as u128);
                assert!(t.leaves().iter().all(|&l| t.level(l).unwrap() == d));
            }
        }
        assert_eq!(printed_site_count(spec(3, 2)), 13);
        assert!(CayleySpec::new(1, 2).is_err());
    }

    #[test]
    fn shells() {
        assert_eq!(cayley_shell_count(spec(3, 2), 1).unwrap(), 1);
        assert_eq!(cayley_shell_count(spec(3, 2), 2).unwrap(), 2);
        assert_eq!(cayley_shell_count(spec(4, 3), 3).unwrap(), 9);
        assert_eq!(cayley_shell_count(spec(3, 2), 3).unwrap(), 0);
    }

    #[test]
    fn bounds_against_brute_force() {
        for k in 2..5 {
            for d in 1..5 {
                for x in 1..2 * d {
                    assert_eq!(
                        fixed_range_bond_bound(spec(k, d), x).unwrap(),
                        brute_force_root_bond(spec(k, d), x).unwrap()
                    );
                }
                assert_eq!(all_to_all_bound(spec(k, d)), brute_force_all_to_all(spec(k, d)).unwrap());
            }
        }
        assert_eq!(fixed_range_bond_bound(spec(3, 3), 2).unwrap(), 6);
        assert_eq!(brute_force_root_bond(spec(2, 4), 3).unwrap(), 5);
        assert_eq!(brute_force_root_bond(spec(3, 2), 3).unwrap(), 10);
        assert_eq!(printed_fixed_range_bound(spec(3, 2), 3).unwrap(), 2);
        assert_eq!(all_to_all_bound(spec(3, 1)), 3);
        assert!(fixed_range_bond_bound(spec(3, 2), 4).is_err());
    }

    #[test]
    fn pair_identity() {
        for k in 2..=5 {
            for x in 1..=8 {
                let (l, r) = pair_count_identity(k, x);
                assert_eq!(l, r);
            }
        }
    }
}
