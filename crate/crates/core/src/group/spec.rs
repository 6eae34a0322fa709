use std::fmt;

use crate::error::{Error, Result};

/// Descriptor of one of the supported groups.
///
/// Wreath towers are stored as nested [`GroupSpec::Wreath`] values and
/// `FreeSolvable(d, 1)` is stored as `Lattice(d)`; use the constructors
/// [`GroupSpec::tower`] and [`GroupSpec::free_solvable`] to get these
/// canonical forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupSpec {
    /// Z^d
    Lattice(usize),
    /// Z/q
    Cyclic(u64),
    /// Free group of rank d
    Free(usize),
    /// Infinite dihedral group <a, b | a^2 = b^2 = 1>
    Dihedral,
    /// BS(1,-1) = <a, b | b a b^-1 = a^-1>
    BaumslagSolitar,
    Product(Box<GroupSpec>, Box<GroupSpec>),
    Wreath { lamp: Box<GroupSpec>, base: Box<GroupSpec> },
    /// F_d / F_d^(m) with m >= 2
    FreeSolvable { rank: usize, length: usize },
}

impl GroupSpec {
    pub fn lattice(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("Z^d needs d >= 1".into()));
        }
        Ok(GroupSpec::Lattice(d))
    }

    pub fn cyclic(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidSpec("C_q needs q >= 2".into()));
        }
        Ok(GroupSpec::Cyclic(q))
    }

    pub fn free(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("F_d needs d >= 1".into()));
        }
        Ok(GroupSpec::Free(d))
    }

    pub fn product(left: GroupSpec, right: GroupSpec) -> Self {
        GroupSpec::Product(Box::new(left), Box::new(right))
    }

    pub fn wreath(lamp: GroupSpec, base: GroupSpec) -> Self {
        GroupSpec::Wreath { lamp: Box::new(lamp), base: Box::new(base) }
    }

    /// `B_1 = base`, `B_{j+1} = lamps[j-1] ≀ B_j`. The lamp list is ordered
    /// innermost first; an empty list yields `base`.
    pub fn tower(lamps: Vec<GroupSpec>, base: GroupSpec) -> Self {
        lamps.into_iter().fold(base, |acc, lamp| GroupSpec::wreath(lamp, acc))
    }

    pub fn free_solvable(rank: usize, length: usize) -> Result<Self> {
        if rank == 0 || length == 0 {
            return Err(Error::InvalidSpec("S(d,m) needs d >= 1 and m >= 1".into()));
        }
        if length == 1 {
            return Ok(GroupSpec::Lattice(rank));
        }
        Ok(GroupSpec::FreeSolvable { rank, length })
    }

    /// Number of levels when read as a wreath tower: a non-wreath group has
    /// one level, `A ≀ B` has one more level than `B`.
    pub fn tower_height(&self) -> usize {
        match self {
            GroupSpec::Wreath { base, .. } => 1 + base.tower_height(),
            _ => 1,
        }
    }

    /// Level `j` of the tower (1 = innermost base).
    pub fn tower_level(&self, j: usize) -> Result<&GroupSpec> {
        let height = self.tower_height();
        if j == 0 || j > height {
            return Err(Error::LevelOutOfRange { level: j, max: height });
        }
        let mut cur = self;
        for _ in 0..(height - j) {
            match cur {
                GroupSpec::Wreath { base, .. } => cur = base,
                _ => unreachable!(),
            }
        }
        Ok(cur)
    }

    /// True when multiplication is commutative for every pair of elements.
    pub fn is_abelian(&self) -> bool {
        match self {
            GroupSpec::Lattice(_) | GroupSpec::Cyclic(_) => true,
            GroupSpec::Free(d) => *d == 1,
            GroupSpec::Product(a, b) => a.is_abelian() && b.is_abelian(),
            _ => false,
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Lattice(1) => write!(f, "Z"),
            GroupSpec::Lattice(d) => write!(f, "Z^{d}"),
            GroupSpec::Cyclic(q) => write!(f, "C{q}"),
            GroupSpec::Free(d) => write!(f, "F{d}"),
            GroupSpec::Dihedral => write!(f, "Dinf"),
            GroupSpec::BaumslagSolitar => write!(f, "BS(1,-1)"),
            GroupSpec::Product(a, b) => write!(f, "product({a}, {b})"),
            GroupSpec::Wreath { lamp, base } => write!(f, "wreath({lamp}, {base})"),
            GroupSpec::FreeSolvable { rank, length } => write!(f, "S({rank},{length})"),
        }
    }
}
