use std::collections::BTreeMap;
use std::fmt;

use super::element::{self, GroupElement};
use super::spec::GroupSpec;
use crate::error::Result;

/// Finitely supported configuration `B -> A`. Identity lamp values are never
/// stored.
pub type LampMap = BTreeMap<GroupElement, GroupElement>;

/// Element `(f, x)` of `A ≀ B`: lamp configuration `f` and base position `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathElement {
    lamps: LampMap,
    position: GroupElement,
}

impl WreathElement {
    /// Builds an element, dropping identity-valued lamps.
    pub fn new(lamp: &GroupSpec, lamps: LampMap, position: GroupElement) -> Self {
        let lamps = lamps.into_iter().filter(|(_, v)| !element::is_identity(lamp, v)).collect();
        WreathElement { lamps, position }
    }

    pub(crate) fn new_unchecked(lamps: LampMap, position: GroupElement) -> Self {
        WreathElement { lamps, position }
    }

    /// Lamp `value` at the base identity, base position at the identity.
    pub fn lamp_at_identity(lamp: &GroupSpec, base: &GroupSpec, value: GroupElement) -> Self {
        let mut lamps = LampMap::new();
        lamps.insert(element::identity(base), value);
        Self::new(lamp, lamps, element::identity(base))
    }

    /// Empty configuration at `position`.
    pub fn at(position: GroupElement) -> Self {
        WreathElement { lamps: LampMap::new(), position }
    }

    pub fn lamps(&self) -> &LampMap {
        &self.lamps
    }

    pub fn position(&self) -> &GroupElement {
        &self.position
    }

    pub fn into_parts(self) -> (LampMap, GroupElement) {
        (self.lamps, self.position)
    }
}

pub(crate) fn validate(lamp: &GroupSpec, base: &GroupSpec, w: &WreathElement) -> Result<()> {
    element::validate(base, &w.position)?;
    for (pos, value) in &w.lamps {
        element::validate(base, pos)?;
        element::validate(lamp, value)?;
        if element::is_identity(lamp, value) {
            return Err(element::mismatch(&GroupSpec::wreath(lamp.clone(), base.clone())));
        }
    }
    Ok(())
}

/// Pointwise product `f · g` of two configurations.
fn combine_into(lamp: &GroupSpec, acc: &mut LampMap, pos: GroupElement, value: &GroupElement) -> Result<()> {
    match acc.get_mut(&pos) {
        Some(existing) => {
            element::mul_assign(lamp, existing, value)?;
            if element::is_identity(lamp, existing) {
                acc.remove(&pos);
            }
        }
        None => {
            acc.insert(pos, value.clone());
        }
    }
    Ok(())
}

/// `(x · f)(y) = f(x^-1 y)`: translates the support of `f` by `x` on the left.
pub fn act_on_lamps(base: &GroupSpec, x: &GroupElement, f: &LampMap) -> Result<LampMap> {
    let mut out = LampMap::new();
    for (pos, value) in f {
        out.insert(element::multiply(base, x, pos)?, value.clone());
    }
    Ok(out)
}

/// `(f, x)(f', x') = (f · (x · f'), x x')`.
pub fn multiply(lamp: &GroupSpec, base: &GroupSpec, g: &WreathElement, h: &WreathElement) -> Result<WreathElement> {
    let mut lamps = g.lamps.clone();
    for (pos, value) in &h.lamps {
        let moved = element::multiply(base, &g.position, pos)?;
        combine_into(lamp, &mut lamps, moved, value)?;
    }
    let position = element::multiply(base, &g.position, &h.position)?;
    Ok(WreathElement { lamps, position })
}

/// `(f, x)^-1 = (y ↦ f(x y)^-1, x^-1)`.
pub fn inverse(lamp: &GroupSpec, base: &GroupSpec, g: &WreathElement) -> Result<WreathElement> {
    let xinv = element::inverse(base, &g.position)?;
    let mut lamps = LampMap::new();
    for (pos, value) in &g.lamps {
        lamps.insert(element::multiply(base, &xinv, pos)?, element::inverse(lamp, value)?);
    }
    Ok(WreathElement { lamps, position: xinv })
}

impl fmt::Display for WreathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({{")?;
        for (i, (pos, value)) in self.lamps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{pos}->{value}")?;
        }
        write!(f, "}}, {})", self.position)
    }
}
