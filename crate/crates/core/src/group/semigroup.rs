use std::collections::HashSet;

use super::element::{self, GroupElement};
use super::key::CanonicalKey;
use super::spec::GroupSpec;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymmetryReport {
    SymmetricWithinRadius,
    /// `witness` is reachable within the radius but its inverse is not.
    AsymmetricWitness(GroupElement),
}

/// Closes `support` under products of length `1..=radius` and looks for an
/// element whose inverse is not reached within the same radius.
///
/// This is a bounded search: a symmetric answer says nothing about longer
/// products. The witness is the first offending element in breadth-first
/// order, ties broken by canonical key.
pub fn semigroup_symmetric_bounded(
    spec: &GroupSpec,
    support: &[GroupElement],
    radius: usize,
    cap: usize,
) -> Result<SymmetryReport> {
    let mut seen: HashSet<GroupElement> = HashSet::new();
    let mut order: Vec<GroupElement> = Vec::new();
    let mut frontier: Vec<GroupElement> = Vec::new();

    let mut layer: Vec<GroupElement> = support.to_vec();
    for _ in 0..radius {
        layer.sort_by_cached_key(CanonicalKey::of);
        layer.dedup();
        let mut next_frontier = Vec::new();
        for g in layer {
            if seen.insert(g.clone()) {
                if seen.len() > cap {
                    return Err(Error::ClosureCap { cap });
                }
                order.push(g.clone());
                next_frontier.push(g);
            }
        }
        frontier = next_frontier;
        if frontier.is_empty() {
            break;
        }
        layer = Vec::with_capacity(frontier.len() * support.len());
        for g in &frontier {
            for s in support {
                layer.push(element::multiply(spec, g, s)?);
            }
        }
    }
    drop(frontier);

    for g in &order {
        if !seen.contains(&element::inverse(spec, g)?) {
            return Ok(SymmetryReport::AsymmetricWitness(g.clone()));
        }
    }
    Ok(SymmetryReport::SymmetricWithinRadius)
}
