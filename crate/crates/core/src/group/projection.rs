use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::element::{self, mismatch, GroupElement};
use super::spec::GroupSpec;
use crate::error::{Error, Result};
use crate::magnus::SdmImage;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProjectionKind {
    /// `A ≀ B -> B`, forgetting the lamps.
    WreathToBase,
    /// Iterated wreath tower to level `j` (1 = innermost base).
    TowerToLevel(usize),
    ProductLeft,
    ProductRight,
    /// `S(d, m) -> S(d, j)`.
    FreeSolvableToLevel(usize),
    Abelianization,
    /// `D∞ -> Z/2`, `(shift, flip) ↦ flip`.
    DihedralFlip,
    /// Applies the listed projections in order.
    Compose(Vec<ProjectionKind>),
}

/// A canonical epimorphism between two group specs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    source: GroupSpec,
    target: GroupSpec,
    kind: ProjectionKind,
}

impl Projection {
    pub fn new(source: GroupSpec, kind: ProjectionKind) -> Result<Self> {
        let target = target_of(&source, &kind)?;
        Ok(Projection { source, target, kind })
    }

    pub fn source(&self) -> &GroupSpec {
        &self.source
    }

    pub fn target(&self) -> &GroupSpec {
        &self.target
    }

    pub fn kind(&self) -> &ProjectionKind {
        &self.kind
    }

    pub fn apply(&self, g: &GroupElement) -> Result<GroupElement> {
        project_with(&self.source, &self.kind, g)
    }
}

fn target_of(source: &GroupSpec, kind: &ProjectionKind) -> Result<GroupSpec> {
    match (source, kind) {
        (GroupSpec::Wreath { base, .. }, ProjectionKind::WreathToBase) => Ok((**base).clone()),
        (_, ProjectionKind::TowerToLevel(j)) => source.tower_level(*j).cloned(),
        (GroupSpec::Product(a, _), ProjectionKind::ProductLeft) => Ok((**a).clone()),
        (GroupSpec::Product(_, b), ProjectionKind::ProductRight) => Ok((**b).clone()),
        (GroupSpec::FreeSolvable { rank, length }, ProjectionKind::FreeSolvableToLevel(j)) => {
            if *j == 0 || j > length {
                return Err(Error::LevelOutOfRange { level: *j, max: *length });
            }
            GroupSpec::free_solvable(*rank, *j)
        }
        (_, ProjectionKind::Abelianization) => abelianization_target(source),
        (GroupSpec::Dihedral, ProjectionKind::DihedralFlip) => Ok(GroupSpec::Cyclic(2)),
        (_, ProjectionKind::Compose(kinds)) => {
            let mut cur = source.clone();
            for k in kinds {
                cur = target_of(&cur, k)?;
            }
            Ok(cur)
        }
        _ => Err(Error::InvalidSpec(format!("projection {kind:?} is not defined on {source}"))),
    }
}

fn abelianization_target(source: &GroupSpec) -> Result<GroupSpec> {
    Ok(match source {
        GroupSpec::Lattice(_) | GroupSpec::Cyclic(_) => source.clone(),
        GroupSpec::Free(d) | GroupSpec::FreeSolvable { rank: d, .. } => GroupSpec::Lattice(*d),
        GroupSpec::Dihedral => GroupSpec::product(GroupSpec::Cyclic(2), GroupSpec::Cyclic(2)),
        GroupSpec::BaumslagSolitar => GroupSpec::product(GroupSpec::Cyclic(2), GroupSpec::Lattice(1)),
        GroupSpec::Product(a, b) => GroupSpec::product(abelianization_target(a)?, abelianization_target(b)?),
        GroupSpec::Wreath { lamp, base } => {
            GroupSpec::product(abelianization_target(lamp)?, abelianization_target(base)?)
        }
    })
}

pub(crate) fn bigints_to_vector(v: &[BigInt]) -> Result<GroupElement> {
    v.iter()
        .map(|x| x.to_i64().ok_or(Error::Overflow))
        .collect::<Result<Vec<_>>>()
        .map(GroupElement::Vector)
}

fn project_with(source: &GroupSpec, kind: &ProjectionKind, g: &GroupElement) -> Result<GroupElement> {
    match (source, kind, g) {
        (GroupSpec::Wreath { .. }, ProjectionKind::WreathToBase, GroupElement::Wreath(w)) => Ok(w.position().clone()),
        (_, ProjectionKind::TowerToLevel(j), _) => {
            let height = source.tower_height();
            if *j == 0 || *j > height {
                return Err(Error::LevelOutOfRange { level: *j, max: height });
            }
            let mut spec = source;
            let mut cur = g.clone();
            for _ in 0..(height - j) {
                cur = project_with(spec, &ProjectionKind::WreathToBase, &cur)?;
                spec = match spec {
                    GroupSpec::Wreath { base, .. } => base,
                    _ => unreachable!(),
                };
            }
            Ok(cur)
        }
        (GroupSpec::Product(..), ProjectionKind::ProductLeft, GroupElement::Pair(a, _)) => Ok((**a).clone()),
        (GroupSpec::Product(..), ProjectionKind::ProductRight, GroupElement::Pair(_, b)) => Ok((**b).clone()),
        (GroupSpec::FreeSolvable { length, .. }, ProjectionKind::FreeSolvableToLevel(j), GroupElement::Solvable(s)) => {
            if *j == 0 || j > length {
                return Err(Error::LevelOutOfRange { level: *j, max: *length });
            }
            let image = s.project_to_level(*j)?;
            match image {
                SdmImage::Abelian(v) => bigints_to_vector(&v),
                other => Ok(GroupElement::Solvable(other)),
            }
        }
        (_, ProjectionKind::Abelianization, _) => abelianize(source, g),
        (GroupSpec::Dihedral, ProjectionKind::DihedralFlip, GroupElement::Dihedral { flip, .. }) => {
            Ok(GroupElement::Residue(*flip as u64))
        }
        (_, ProjectionKind::Compose(kinds), _) => {
            let mut spec = source.clone();
            let mut cur = g.clone();
            for k in kinds {
                cur = project_with(&spec, k, &cur)?;
                spec = target_of(&spec, k)?;
            }
            Ok(cur)
        }
        _ => Err(mismatch(source)),
    }
}

fn abelianize(source: &GroupSpec, g: &GroupElement) -> Result<GroupElement> {
    match (source, g) {
        (GroupSpec::Lattice(_), GroupElement::Vector(_)) | (GroupSpec::Cyclic(_), GroupElement::Residue(_)) => {
            Ok(g.clone())
        }
        (GroupSpec::Free(d), GroupElement::Word(w)) => {
            let mut v = vec![0i64; *d];
            for &l in w.letters() {
                let i = l.unsigned_abs() as usize;
                if i > *d {
                    return Err(Error::LetterOutOfRange { letter: l, rank: *d });
                }
                v[i - 1] += l.signum() as i64;
            }
            Ok(GroupElement::Vector(v))
        }
        (GroupSpec::FreeSolvable { .. }, GroupElement::Solvable(s)) => match s.project_to_level(1)? {
            SdmImage::Abelian(v) => bigints_to_vector(&v),
            _ => unreachable!("level 1 image is abelian"),
        },
        // a = (0,1) ↦ (1,0), b = (1,1) ↦ (0,1); (n, ε) = (ba)^n a^ε.
        (GroupSpec::Dihedral, GroupElement::Dihedral { shift, flip }) => {
            let n = shift.rem_euclid(2) as u64;
            Ok(GroupElement::pair(GroupElement::Residue((n + *flip as u64) % 2), GroupElement::Residue(n)))
        }
        (GroupSpec::BaumslagSolitar, GroupElement::Bs { a_exp, b_exp }) => Ok(GroupElement::pair(
            GroupElement::Residue(a_exp.rem_euclid(2) as u64),
            GroupElement::scalar(*b_exp),
        )),
        (GroupSpec::Product(a, b), GroupElement::Pair(x, y)) => Ok(GroupElement::pair(abelianize(a, x)?, abelianize(b, y)?)),
        (GroupSpec::Wreath { lamp, base }, GroupElement::Wreath(w)) => {
            let lamp_ab = abelianization_target(lamp)?;
            let mut total = element::identity(&lamp_ab);
            // summing abelian images, so the traversal order is irrelevant
            let images: BTreeMap<_, _> = w.lamps().iter().collect();
            for value in images.values() {
                element::mul_assign(&lamp_ab, &mut total, &abelianize(lamp, value)?)?;
            }
            Ok(GroupElement::pair(total, abelianize(base, w.position())?))
        }
        _ => Err(mismatch(source)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::wreath::{LampMap, WreathElement};

    #[test]
    fn wreath_to_base_drops_lamps() {
        let spec = GroupSpec::wreath(GroupSpec::Cyclic(2), GroupSpec::Lattice(1));
        let mut lamps = LampMap::new();
        lamps.insert(GroupElement::scalar(0), GroupElement::Residue(1));
        lamps.insert(GroupElement::scalar(3), GroupElement::Residue(1));
        let g = GroupElement::Wreath(Box::new(WreathElement::new(&GroupSpec::Cyclic(2), lamps, GroupElement::scalar(5))));
        let p = Projection::new(spec.clone(), ProjectionKind::WreathToBase).unwrap();
        assert_eq!(p.apply(&g).unwrap(), GroupElement::scalar(5));
        assert_eq!(p.apply(&element::identity(&spec)).unwrap(), GroupElement::scalar(0));
        assert_eq!(p.target(), &GroupSpec::Lattice(1));
    }

    #[test]
    fn tower_level_out_of_range() {
        let spec = GroupSpec::tower(vec![GroupSpec::Lattice(2)], GroupSpec::Lattice(2));
        assert!(Projection::new(spec.clone(), ProjectionKind::TowerToLevel(3)).is_err());
        assert!(Projection::new(spec, ProjectionKind::TowerToLevel(0)).is_err());
    }

    #[test]
    fn dihedral_flip() {
        let p = Projection::new(GroupSpec::Dihedral, ProjectionKind::DihedralFlip).unwrap();
        assert_eq!(p.apply(&GroupElement::dihedral_a()).unwrap(), GroupElement::Residue(1));
        assert_eq!(p.apply(&GroupElement::Dihedral { shift: 4, flip: false }).unwrap(), GroupElement::Residue(0));
    }

    #[test]
    fn projection_on_wrong_group_fails() {
        assert!(Projection::new(GroupSpec::Dihedral, ProjectionKind::WreathToBase).is_err());
        let p = Projection::new(GroupSpec::Dihedral, ProjectionKind::DihedralFlip).unwrap();
        assert!(p.apply(&GroupElement::scalar(1)).is_err());
    }
}
