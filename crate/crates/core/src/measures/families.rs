//! Constructors for the parametrised measure families used by the
//! experiments. Every family has a fixed finite support set for `k >= 2`,
//! a declared pointwise limit, and member weights that are exact rational
//! functions of `k` (and of `p` where present).

use std::fmt;

use crate::error::{Error, Result};
use crate::group::{element, GroupElement, GroupSpec};

use super::measure::{product_measure, FiniteMeasure};
use super::weight::Weight;

fn check_k(k: u64) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!("family index k must be >= 1, got {k}")));
    }
    if k > i64::MAX as u64 / 4 {
        return Err(Error::InvalidParameter(format!("family index k = {k} too large")));
    }
    Ok(())
}

fn check_p<W: Weight>(p: &W) -> Result<()> {
    if p.is_negative() || p.cmp_weight(&W::one()).is_gt() {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn ab() -> GroupElement {
    element::multiply(&GroupSpec::Dihedral, &GroupElement::dihedral_a(), &GroupElement::dihedral_b()).expect("D∞")
}

fn ba() -> GroupElement {
    element::multiply(&GroupSpec::Dihedral, &GroupElement::dihedral_b(), &GroupElement::dihedral_a()).expect("D∞")
}

/// `(1 - 1/k)(p δ_ab + (1-p) δ_ba) + (1/k) δ_a` on D∞.
pub fn dinf_family<W: Weight>(p: &W, k: u64) -> Result<FiniteMeasure<W>> {
    check_p(p)?;
    check_k(k)?;
    let bulk = W::from_ratio(k as i64 - 1, k as i64);
    let q = W::one().sub(p);
    FiniteMeasure::new(
        GroupSpec::Dihedral,
        [
            (ab(), bulk.mul(p)),
            (ba(), bulk.mul(&q)),
            (GroupElement::dihedral_a(), W::from_ratio(1, k as i64)),
        ],
    )
}

/// `p δ_ab + (1-p) δ_ba` on D∞.
pub fn dinf_limit<W: Weight>(p: &W) -> Result<FiniteMeasure<W>> {
    check_p(p)?;
    FiniteMeasure::new(GroupSpec::Dihedral, [(ab(), p.clone()), (ba(), W::one().sub(p))])
}

fn bs(m: i64, n: i64) -> GroupElement {
    GroupElement::Bs { a_exp: m, b_exp: n }
}

/// `⅓(1 - 1/k)(δ_{b²} + δ_{b⁻²} + p δ_a + (1-p) δ_{a⁻¹}) + (1/2k)(δ_b + δ_{b⁻¹})`
/// on BS(1,-1).
pub fn bs11_family<W: Weight>(p: &W, k: u64) -> Result<FiniteMeasure<W>> {
    check_p(p)?;
    check_k(k)?;
    let k = k as i64;
    let third = W::from_ratio(k - 1, 3 * k);
    let half_k = W::from_ratio(1, 2 * k);
    FiniteMeasure::new(
        GroupSpec::BaumslagSolitar,
        [
            (bs(0, 2), third.clone()),
            (bs(0, -2), third.clone()),
            (bs(1, 0), third.mul(p)),
            (bs(-1, 0), third.mul(&W::one().sub(p))),
            (bs(0, 1), half_k.clone()),
            (bs(0, -1), half_k),
        ],
    )
}

/// `⅓(δ_{b²} + δ_{b⁻²} + p δ_a + (1-p) δ_{a⁻¹})` on BS(1,-1).
pub fn bs11_limit<W: Weight>(p: &W) -> Result<FiniteMeasure<W>> {
    check_p(p)?;
    let third = W::from_ratio(1, 3);
    FiniteMeasure::new(
        GroupSpec::BaumslagSolitar,
        [
            (bs(0, 2), third.clone()),
            (bs(0, -2), third.clone()),
            (bs(1, 0), third.mul(p)),
            (bs(-1, 0), third.mul(&W::one().sub(p))),
        ],
    )
}

/// Mean-zero measures on Z converging to the drifted `¾ δ₁ + ¼ δ₋₁`:
/// `μ_k(1) = ¾·2k/(1+2k)`, `μ_k(-1) = ¼·2k/(1+2k)`, `μ_k(-k) = 1/(1+2k)`.
///
/// The supports are not contained in a common finite set; this is the
/// counterexample showing the fixed-support hypothesis is needed.
pub fn z_drift_family<W: Weight>(k: u64) -> Result<FiniteMeasure<W>> {
    check_k(k)?;
    let k = k as i64;
    let den = 1 + 2 * k;
    FiniteMeasure::new(
        GroupSpec::Lattice(1),
        [
            (GroupElement::scalar(1), W::from_ratio(3 * 2 * k, 4 * den)),
            (GroupElement::scalar(-1), W::from_ratio(2 * k, 4 * den)),
            (GroupElement::scalar(-k), W::from_ratio(1, den)),
        ],
    )
}

pub fn z_drift_limit<W: Weight>() -> Result<FiniteMeasure<W>> {
    FiniteMeasure::new(
        GroupSpec::Lattice(1),
        [(GroupElement::scalar(1), W::from_ratio(3, 4)), (GroupElement::scalar(-1), W::from_ratio(1, 4))],
    )
}

/// Fixed-support family on Z: `μ_k(1) = ¾ - 1/(4k)`, `μ_k(-1) = ¼ + 1/(4k)`.
/// `μ_1` is the simple random walk; the limit is `¾ δ₁ + ¼ δ₋₁`.
pub fn z_fixed_family<W: Weight>(k: u64) -> Result<FiniteMeasure<W>> {
    check_k(k)?;
    let k = k as i64;
    FiniteMeasure::new(
        GroupSpec::Lattice(1),
        [
            (GroupElement::scalar(1), W::from_ratio(3 * k - 1, 4 * k)),
            (GroupElement::scalar(-1), W::from_ratio(k + 1, 4 * k)),
        ],
    )
}

fn z2(x: i64, y: i64) -> GroupElement {
    GroupElement::Vector(vec![x, y])
}

/// Fixed-support family on Z²: `(1 - 1/k) ν + (1/k) u` with `u` uniform on
/// `±e₁, ±e₂` and `ν = ⅝ δ_{e₁} + ⅛ (δ_{-e₁} + δ_{e₂} + δ_{-e₂})`.
pub fn z2_fixed_family<W: Weight>(k: u64) -> Result<FiniteMeasure<W>> {
    check_k(k)?;
    let k = k as i64;
    let bulk = W::from_ratio(k - 1, k);
    let uni = W::from_ratio(1, 4 * k);
    let nu = [(z2(1, 0), 5), (z2(-1, 0), 1), (z2(0, 1), 1), (z2(0, -1), 1)];
    FiniteMeasure::new(
        GroupSpec::Lattice(2),
        nu.into_iter().map(|(g, w8)| (g, bulk.mul(&W::from_ratio(w8, 8)).add(&uni))).collect::<Vec<_>>(),
    )
}

pub fn z2_fixed_limit<W: Weight>() -> Result<FiniteMeasure<W>> {
    FiniteMeasure::new(
        GroupSpec::Lattice(2),
        [
            (z2(1, 0), W::from_ratio(5, 8)),
            (z2(-1, 0), W::from_ratio(1, 8)),
            (z2(0, 1), W::from_ratio(1, 8)),
            (z2(0, -1), W::from_ratio(1, 8)),
        ],
    )
}

/// `½ η̂ + ½ μ̂` on `lamp ≀ base`, hats denoting the canonical inclusions.
pub fn lamplighter_mix<W: Weight>(eta: &FiniteMeasure<W>, mu: &FiniteMeasure<W>) -> Result<FiniteMeasure<W>> {
    let wreath = GroupSpec::wreath(eta.spec().clone(), mu.spec().clone());
    let half = W::from_ratio(1, 2);
    let lamps = eta.include_as_lamp(&wreath)?;
    let base = mu.include_as_base(&wreath)?;
    FiniteMeasure::mixture(&[(half.clone(), &lamps), (half, &base)])
}

/// Uniform measure on the `2d` free generators and their inverses.
pub fn free_generators_uniform<W: Weight>(d: usize) -> Result<FiniteMeasure<W>> {
    let spec = GroupSpec::free(d)?;
    let gens = (1..=d as i32)
        .flat_map(|i| [i, -i])
        .map(|l| GroupElement::Word(crate::group::FreeWord::generator(l)))
        .collect();
    FiniteMeasure::uniform(spec, gens)
}

/// Lamp measure `δ_1` on `C_q`: every lamp step toggles the lamp at the
/// current position.
pub fn toggle<W: Weight>(q: u64) -> Result<FiniteMeasure<W>> {
    FiniteMeasure::dirac(GroupSpec::cyclic(q)?, GroupElement::Residue(1))
}

/// A named, parametrised family with a declared limit.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureFamily<W: Weight> {
    Dinf { p: W },
    Bs11 { p: W },
    ZDrift,
    ZFixed,
    Z2Fixed,
    LamplighterMix { eta: FiniteMeasure<W>, inner: Box<MeasureFamily<W>> },
    Product { eta: FiniteMeasure<W>, inner: Box<MeasureFamily<W>> },
}

impl<W: Weight> MeasureFamily<W> {
    pub fn member(&self, k: u64) -> Result<FiniteMeasure<W>> {
        match self {
            MeasureFamily::Dinf { p } => dinf_family(p, k),
            MeasureFamily::Bs11 { p } => bs11_family(p, k),
            MeasureFamily::ZDrift => z_drift_family(k),
            MeasureFamily::ZFixed => z_fixed_family(k),
            MeasureFamily::Z2Fixed => z2_fixed_family(k),
            MeasureFamily::LamplighterMix { eta, inner } => lamplighter_mix(eta, &inner.member(k)?),
            MeasureFamily::Product { eta, inner } => Ok(product_measure(eta, &inner.member(k)?)),
        }
    }

    pub fn limit(&self) -> Result<FiniteMeasure<W>> {
        match self {
            MeasureFamily::Dinf { p } => dinf_limit(p),
            MeasureFamily::Bs11 { p } => bs11_limit(p),
            MeasureFamily::ZDrift => z_drift_limit(),
            MeasureFamily::ZFixed => z_fixed_limit(),
            MeasureFamily::Z2Fixed => z2_fixed_limit(),
            MeasureFamily::LamplighterMix { eta, inner } => lamplighter_mix(eta, &inner.limit()?),
            MeasureFamily::Product { eta, inner } => Ok(product_measure(eta, &inner.limit()?)),
        }
    }

    /// Member `k`, or the limit when `k` is `None`.
    pub fn at(&self, k: Option<u64>) -> Result<FiniteMeasure<W>> {
        match k {
            Some(k) => self.member(k),
            None => self.limit(),
        }
    }

    pub fn spec(&self) -> GroupSpec {
        match self {
            MeasureFamily::Dinf { .. } => GroupSpec::Dihedral,
            MeasureFamily::Bs11 { .. } => GroupSpec::BaumslagSolitar,
            MeasureFamily::ZDrift | MeasureFamily::ZFixed => GroupSpec::Lattice(1),
            MeasureFamily::Z2Fixed => GroupSpec::Lattice(2),
            MeasureFamily::LamplighterMix { eta, inner } => GroupSpec::wreath(eta.spec().clone(), inner.spec()),
            MeasureFamily::Product { eta, inner } => GroupSpec::product(eta.spec().clone(), inner.spec()),
        }
    }

    /// Whether all members share a common finite support.
    pub fn has_fixed_support(&self) -> bool {
        match self {
            MeasureFamily::ZDrift => false,
            MeasureFamily::LamplighterMix { inner, .. } | MeasureFamily::Product { inner, .. } => inner.has_fixed_support(),
            _ => true,
        }
    }
}

impl<W: Weight> fmt::Display for MeasureFamily<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureFamily::Dinf { p } => write!(f, "dinf(p={p})"),
            MeasureFamily::Bs11 { p } => write!(f, "bs11(p={p})"),
            MeasureFamily::ZDrift => write!(f, "z-drift"),
            MeasureFamily::ZFixed => write!(f, "z-fixed"),
            MeasureFamily::Z2Fixed => write!(f, "z2-fixed"),
            MeasureFamily::LamplighterMix { eta, inner } => write!(f, "lamplighter-mix(eta on {}, {inner})", eta.spec()),
            MeasureFamily::Product { eta, inner } => write!(f, "product(eta on {}, {inner})", eta.spec()),
        }
    }
}

fn z_fixed_limit<W: Weight>() -> Result<FiniteMeasure<W>> {
    z_drift_limit()
}
