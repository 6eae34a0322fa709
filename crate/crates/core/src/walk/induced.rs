use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::{element, GroupElement};
use crate::measures::{Atom, FiniteMeasure, Weight};

/// Law of the walk at its first return time `τ` to a subgroup, restricted
/// to `τ <= horizon`, together with the mass `P(τ > horizon)` that was not
/// assigned.
#[derive(Clone, Debug)]
pub struct InducedMeasure<W: Weight> {
    pub atoms: Vec<Atom<W>>,
    pub leaked: W,
    pub horizon: usize,
}

impl<W: Weight> InducedMeasure<W> {
    pub fn assigned_mass(&self) -> W {
        self.atoms.iter().fold(W::zero(), |acc, a| acc.add(&a.weight))
    }

    /// The induced measure itself; fails unless the leaked mass is zero
    /// (within the float tolerance in binary64 mode).
    pub fn measure(&self, spec: &crate::group::GroupSpec) -> Result<FiniteMeasure<W>> {
        FiniteMeasure::new(spec.clone(), self.atoms.iter().map(|a| (a.element.clone(), a.weight.clone())))
    }
}

/// `μ_H(h) = P(w_τ = h)`, `τ = min{n >= 1 : w_n ∈ H}`, for the subgroup `H`
/// given by `member`. Walks are followed exactly up to `horizon` steps; the
/// remaining mass is reported and must not exceed `mass_tol`.
pub fn induced_measure_on_subgroup<W: Weight, P>(
    mu: &FiniteMeasure<W>,
    member: P,
    horizon: usize,
    mass_tol: f64,
    cap: usize,
) -> Result<InducedMeasure<W>>
where
    P: Fn(&GroupElement) -> bool,
{
    let spec = mu.spec();
    let e = element::identity(spec);
    if !member(&e) {
        return Err(Error::Precondition("subgroup predicate rejects the identity".into()));
    }
    let mut hit: HashMap<GroupElement, W> = HashMap::new();
    let mut outside: HashMap<GroupElement, W> = HashMap::from([(e, W::one())]);
    for _ in 0..horizon {
        if outside.is_empty() {
            break;
        }
        let mut next: HashMap<GroupElement, W> = HashMap::new();
        let mut cur: Vec<_> = outside.into_iter().collect();
        cur.sort_by_cached_key(|(g, _)| crate::group::CanonicalKey::of(g));
        for (g, p) in &cur {
            for a in mu.atoms() {
                let h = element::multiply(spec, g, &a.element)?;
                let w = p.mul(&a.weight);
                let target = if member(&h) { &mut hit } else { &mut next };
                target.entry(h).or_insert_with(W::zero).add_assign(&w);
            }
        }
        if next.len() > cap {
            return Err(Error::SupportCap { cap, completed: 0 });
        }
        outside = next;
    }
    let leaked = outside.values().fold(W::zero(), |acc, w| acc.add(w));
    if leaked.to_f64() > mass_tol {
        return Err(Error::TailMass { leaked: leaked.to_f64(), tol: mass_tol, horizon });
    }
    let mut atoms: Vec<Atom<W>> = hit.into_iter().map(|(element, weight)| Atom { element, weight }).collect();
    atoms.sort_by_cached_key(|a| crate::group::CanonicalKey::of(&a.element));
    Ok(InducedMeasure { atoms, leaked, horizon })
}
