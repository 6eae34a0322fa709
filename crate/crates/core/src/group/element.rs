use std::fmt;

use super::free::FreeWord;
use super::spec::GroupSpec;
use super::wreath::{self, WreathElement};
use crate::error::{Error, Result};
use crate::magnus::{self, SdmImage};

/// Normal form of a group element. The variant is determined by the
/// [`GroupSpec`] the element belongs to; structural equality coincides with
/// equality in the group because every variant is a unique normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Z^d
    Vector(Vec<i64>),
    /// Z/q
    Residue(u64),
    /// F_d
    Word(FreeWord),
    /// D∞ ≅ Z ⋊ Z/2: `(shift, flip)` with `a = (0, 1)` and `b = (1, 1)`.
    Dihedral { shift: i64, flip: bool },
    /// BS(1,-1): `a^a_exp b^b_exp`.
    Bs { a_exp: i64, b_exp: i64 },
    Pair(Box<GroupElement>, Box<GroupElement>),
    Wreath(Box<WreathElement>),
    Solvable(SdmImage),
}

pub(crate) fn mismatch(spec: &GroupSpec) -> Error {
    Error::SpecMismatch { spec: spec.to_string() }
}

impl GroupElement {
    pub fn pair(left: GroupElement, right: GroupElement) -> Self {
        GroupElement::Pair(Box::new(left), Box::new(right))
    }

    pub fn scalar(x: i64) -> Self {
        GroupElement::Vector(vec![x])
    }

    pub fn dihedral_a() -> Self {
        GroupElement::Dihedral { shift: 0, flip: true }
    }

    pub fn dihedral_b() -> Self {
        GroupElement::Dihedral { shift: 1, flip: true }
    }

    pub fn bs_a() -> Self {
        GroupElement::Bs { a_exp: 1, b_exp: 0 }
    }

    pub fn bs_b() -> Self {
        GroupElement::Bs { a_exp: 0, b_exp: 1 }
    }

    pub fn as_vector(&self) -> Option<&[i64]> {
        match self {
            GroupElement::Vector(v) => Some(v),
            _ => None,
        }
    }
}

/// Two-sided identity of `spec`.
pub fn identity(spec: &GroupSpec) -> GroupElement {
    match spec {
        GroupSpec::Lattice(d) => GroupElement::Vector(vec![0; *d]),
        GroupSpec::Cyclic(_) => GroupElement::Residue(0),
        GroupSpec::Free(_) => GroupElement::Word(FreeWord::identity()),
        GroupSpec::Dihedral => GroupElement::Dihedral { shift: 0, flip: false },
        GroupSpec::BaumslagSolitar => GroupElement::Bs { a_exp: 0, b_exp: 0 },
        GroupSpec::Product(a, b) => GroupElement::pair(identity(a), identity(b)),
        GroupSpec::Wreath { base, .. } => {
            GroupElement::Wreath(Box::new(WreathElement::new_unchecked(Default::default(), identity(base))))
        }
        GroupSpec::FreeSolvable { rank, length } => GroupElement::Solvable(SdmImage::identity(*rank, *length)),
    }
}

pub fn is_identity(spec: &GroupSpec, g: &GroupElement) -> bool {
    match g {
        GroupElement::Vector(v) => v.iter().all(|&x| x == 0),
        GroupElement::Residue(r) => *r == 0,
        GroupElement::Word(w) => w.is_empty(),
        GroupElement::Dihedral { shift, flip } => *shift == 0 && !*flip,
        GroupElement::Bs { a_exp, b_exp } => *a_exp == 0 && *b_exp == 0,
        _ => *g == identity(spec),
    }
}

/// Checks that `g` is a well-formed normal form of `spec`.
pub fn validate(spec: &GroupSpec, g: &GroupElement) -> Result<()> {
    let ok = match (spec, g) {
        (GroupSpec::Lattice(d), GroupElement::Vector(v)) => v.len() == *d,
        (GroupSpec::Cyclic(q), GroupElement::Residue(r)) => r < q,
        (GroupSpec::Free(d), GroupElement::Word(w)) => {
            w.check_rank(*d)?;
            FreeWord::from_letters(w.letters().iter().copied())? == *w
        }
        (GroupSpec::Dihedral, GroupElement::Dihedral { .. }) => true,
        (GroupSpec::BaumslagSolitar, GroupElement::Bs { .. }) => true,
        (GroupSpec::Product(a, b), GroupElement::Pair(x, y)) => {
            validate(a, x)?;
            validate(b, y)?;
            true
        }
        (GroupSpec::Wreath { lamp, base }, GroupElement::Wreath(w)) => {
            wreath::validate(lamp, base, w)?;
            true
        }
        (GroupSpec::FreeSolvable { rank, length }, GroupElement::Solvable(s)) => {
            s.rank() == *rank && s.level() == *length
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(mismatch(spec))
    }
}

/// Normal form of `g h`.
pub fn multiply(spec: &GroupSpec, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    let mut out = g.clone();
    mul_assign(spec, &mut out, h)?;
    Ok(out)
}

/// Replaces `g` with `g h`. Cheap variants are updated in place.
pub fn mul_assign(spec: &GroupSpec, g: &mut GroupElement, h: &GroupElement) -> Result<()> {
    match (spec, &mut *g, h) {
        (GroupSpec::Lattice(d), GroupElement::Vector(x), GroupElement::Vector(y)) => {
            if x.len() != *d || y.len() != *d {
                return Err(mismatch(spec));
            }
            for (a, b) in x.iter_mut().zip(y) {
                *a = a.checked_add(*b).ok_or(Error::Overflow)?;
            }
            Ok(())
        }
        (GroupSpec::Cyclic(q), GroupElement::Residue(x), GroupElement::Residue(y)) => {
            if *x >= *q || *y >= *q {
                return Err(mismatch(spec));
            }
            *x = ((*x as u128 + *y as u128) % *q as u128) as u64;
            Ok(())
        }
        (GroupSpec::Free(_), GroupElement::Word(x), GroupElement::Word(y)) => {
            *x = x.mul(y);
            Ok(())
        }
        (
            GroupSpec::Dihedral,
            GroupElement::Dihedral { shift, flip },
            GroupElement::Dihedral { shift: s2, flip: f2 },
        ) => {
            let delta = if *flip { s2.checked_neg() } else { Some(*s2) };
            *shift = delta.and_then(|d| shift.checked_add(d)).ok_or(Error::Overflow)?;
            *flip ^= *f2;
            Ok(())
        }
        (
            GroupSpec::BaumslagSolitar,
            GroupElement::Bs { a_exp, b_exp },
            GroupElement::Bs { a_exp: a2, b_exp: b2 },
        ) => {
            let delta = if b_exp.rem_euclid(2) == 1 { a2.checked_neg() } else { Some(*a2) };
            *a_exp = delta.and_then(|d| a_exp.checked_add(d)).ok_or(Error::Overflow)?;
            *b_exp = b_exp.checked_add(*b2).ok_or(Error::Overflow)?;
            Ok(())
        }
        (GroupSpec::Product(sa, sb), GroupElement::Pair(x1, y1), GroupElement::Pair(x2, y2)) => {
            mul_assign(sa, x1, x2)?;
            mul_assign(sb, y1, y2)
        }
        (GroupSpec::Wreath { lamp, base }, GroupElement::Wreath(x), GroupElement::Wreath(y)) => {
            **x = wreath::multiply(lamp, base, x, y)?;
            Ok(())
        }
        (GroupSpec::FreeSolvable { .. }, GroupElement::Solvable(x), GroupElement::Solvable(y)) => {
            *x = magnus::sdm_multiply(x, y)?;
            Ok(())
        }
        _ => Err(mismatch(spec)),
    }
}

pub fn inverse(spec: &GroupSpec, g: &GroupElement) -> Result<GroupElement> {
    match (spec, g) {
        (GroupSpec::Lattice(d), GroupElement::Vector(x)) if x.len() == *d => x
            .iter()
            .map(|a| a.checked_neg().ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()
            .map(GroupElement::Vector),
        (GroupSpec::Cyclic(q), GroupElement::Residue(x)) if x < q => {
            Ok(GroupElement::Residue(if *x == 0 { 0 } else { q - x }))
        }
        (GroupSpec::Free(_), GroupElement::Word(w)) => Ok(GroupElement::Word(w.inverse())),
        (GroupSpec::Dihedral, GroupElement::Dihedral { shift, flip }) => {
            if *flip {
                Ok(g.clone())
            } else {
                Ok(GroupElement::Dihedral { shift: shift.checked_neg().ok_or(Error::Overflow)?, flip: false })
            }
        }
        (GroupSpec::BaumslagSolitar, GroupElement::Bs { a_exp, b_exp }) => {
            // (m, n)^-1 = (-(-1)^n m, -n)
            let a = if b_exp.rem_euclid(2) == 1 { Some(*a_exp) } else { a_exp.checked_neg() };
            Ok(GroupElement::Bs {
                a_exp: a.ok_or(Error::Overflow)?,
                b_exp: b_exp.checked_neg().ok_or(Error::Overflow)?,
            })
        }
        (GroupSpec::Product(sa, sb), GroupElement::Pair(x, y)) => {
            Ok(GroupElement::pair(inverse(sa, x)?, inverse(sb, y)?))
        }
        (GroupSpec::Wreath { lamp, base }, GroupElement::Wreath(w)) => {
            Ok(GroupElement::Wreath(Box::new(wreath::inverse(lamp, base, w)?)))
        }
        (GroupSpec::FreeSolvable { .. }, GroupElement::Solvable(s)) => Ok(GroupElement::Solvable(magnus::sdm_inverse(s))),
        _ => Err(mismatch(spec)),
    }
}

/// `g^e` for a signed exponent, by repeated squaring.
pub fn power(spec: &GroupSpec, g: &GroupElement, e: i64) -> Result<GroupElement> {
    let mut base = if e < 0 { inverse(spec, g)? } else { g.clone() };
    let mut e = e.unsigned_abs();
    let mut acc = identity(spec);
    while e > 0 {
        if e & 1 == 1 {
            mul_assign(spec, &mut acc, &base)?;
        }
        e >>= 1;
        if e > 0 {
            base = multiply(spec, &base, &base)?;
        }
    }
    Ok(acc)
}

/// Product of a sequence of elements, left to right.
pub fn product_of<'a, I>(spec: &GroupSpec, items: I) -> Result<GroupElement>
where
    I: IntoIterator<Item = &'a GroupElement>,
{
    let mut acc = identity(spec);
    for g in items {
        mul_assign(spec, &mut acc, g)?;
    }
    Ok(acc)
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Vector(v) if v.len() == 1 => write!(f, "{}", v[0]),
            GroupElement::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            GroupElement::Residue(r) => write!(f, "{r}"),
            GroupElement::Word(w) => write!(f, "{w}"),
            GroupElement::Dihedral { shift, flip } => write!(f, "dinf({shift},{})", *flip as u8),
            GroupElement::Bs { a_exp, b_exp } => write!(f, "bs({a_exp},{b_exp})"),
            GroupElement::Pair(a, b) => write!(f, "<{a} | {b}>"),
            GroupElement::Wreath(w) => write!(f, "{w}"),
            GroupElement::Solvable(s) => write!(f, "{s}"),
        }
    }
}
