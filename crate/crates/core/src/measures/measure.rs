use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::group::{element, CanonicalKey, GroupElement, GroupSpec, Projection, WreathElement};

use super::weight::{Entropy, Rational, Weight};

/// Default hard cap on the number of atoms produced by a convolution.
pub const DEFAULT_SUPPORT_CAP: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<W> {
    pub element: GroupElement,
    pub weight: W,
}

/// A finitely supported probability measure on a group.
///
/// Atoms are indexed by canonical key, so iteration order is deterministic
/// and independent of how the measure was built.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasure<W: Weight = Rational> {
    spec: GroupSpec,
    atoms: BTreeMap<CanonicalKey, Atom<W>>,
}

impl<W: Weight> FiniteMeasure<W> {
    /// Builds a measure, merging atoms at equal elements and dropping zero
    /// weights. Fails on invalid elements, negative weights or a total mass
    /// other than one.
    pub fn new<I>(spec: GroupSpec, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, W)>,
    {
        let mut merged: BTreeMap<CanonicalKey, Atom<W>> = BTreeMap::new();
        for (g, w) in atoms {
            element::validate(&spec, &g)?;
            if w.is_negative() {
                return Err(Error::InvalidMeasure(format!("negative weight {w} at {g}")));
            }
            let key = CanonicalKey::of(&g);
            match merged.get_mut(&key) {
                Some(a) => a.weight.add_assign(&w),
                None => {
                    merged.insert(key, Atom { element: g, weight: w });
                }
            }
        }
        merged.retain(|_, a| !a.weight.is_zero());
        let m = FiniteMeasure { spec, atoms: merged };
        let total = m.total_mass();
        if !W::is_unit_mass(&total) {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not 1")));
        }
        Ok(m)
    }

    /// Trusted constructor for internal results that are probability
    /// measures by construction.
    pub(crate) fn from_map(spec: GroupSpec, atoms: BTreeMap<CanonicalKey, Atom<W>>) -> Self {
        FiniteMeasure { spec, atoms }
    }

    pub(crate) fn from_accumulator(spec: GroupSpec, acc: HashMap<GroupElement, W>) -> Self {
        let atoms = acc
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(g, w)| (CanonicalKey::of(&g), Atom { element: g, weight: w }))
            .collect();
        FiniteMeasure { spec, atoms }
    }

    pub fn dirac(spec: GroupSpec, g: GroupElement) -> Result<Self> {
        Self::new(spec, [(g, W::one())])
    }

    pub fn identity_mass(spec: GroupSpec) -> Self {
        let e = element::identity(&spec);
        let mut atoms = BTreeMap::new();
        atoms.insert(CanonicalKey::of(&e), Atom { element: e, weight: W::one() });
        FiniteMeasure { spec, atoms }
    }

    /// Uniform measure on the given elements (duplicates are merged).
    pub fn uniform(spec: GroupSpec, elements: Vec<GroupElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidMeasure("uniform measure on an empty set".into()));
        }
        let n = elements.len() as i64;
        Self::new(spec, elements.into_iter().map(|g| (g, W::from_ratio(1, n))))
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom<W>> {
        self.atoms.values()
    }

    pub fn keyed_atoms(&self) -> impl Iterator<Item = (&CanonicalKey, &Atom<W>)> {
        self.atoms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.atoms.values().map(|a| &a.element)
    }

    pub fn weight_of_key(&self, key: &CanonicalKey) -> W {
        self.atoms.get(key).map(|a| a.weight.clone()).unwrap_or_else(W::zero)
    }

    pub fn weight_of(&self, g: &GroupElement) -> W {
        self.weight_of_key(&CanonicalKey::of(g))
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.atoms.contains_key(&CanonicalKey::of(g))
    }

    pub fn total_mass(&self) -> W {
        self.atoms.values().fold(W::zero(), |acc, a| acc.add(&a.weight))
    }

    /// `-Σ μ(g) ln μ(g)`, in nats.
    pub fn entropy(&self) -> W::H {
        self.atoms.values().fold(W::H::zero(), |acc, a| acc.add(&a.weight.entropy_term()))
    }

    pub fn entropy_f64(&self) -> f64 {
        self.entropy().to_f64()
    }

    pub fn map_weights<V: Weight, F: Fn(&W) -> V>(&self, f: F) -> FiniteMeasure<V> {
        let atoms = self
            .atoms
            .iter()
            .map(|(k, a)| (k.clone(), Atom { element: a.element.clone(), weight: f(&a.weight) }))
            .filter(|(_, a)| !a.weight.is_zero())
            .collect();
        FiniteMeasure { spec: self.spec.clone(), atoms }
    }

    pub fn to_float(&self) -> FiniteMeasure<f64> {
        self.map_weights(|w| w.to_f64())
    }

    /// Mean vector of a measure on `Z^d`.
    pub fn lattice_mean(&self) -> Result<Vec<W>> {
        let d = match self.spec {
            GroupSpec::Lattice(d) => d,
            _ => return Err(Error::Precondition(format!("mean requires a lattice, got {}", self.spec))),
        };
        let mut mean = vec![W::zero(); d];
        for a in self.atoms.values() {
            let v = a.element.as_vector().expect("validated lattice element");
            for (m, x) in mean.iter_mut().zip(v) {
                m.add_assign(&a.weight.scale_int(*x));
            }
        }
        Ok(mean)
    }

    /// Closed interval `[a, b]` containing the support of a measure on `Z`.
    pub fn integer_support_bounds(&self) -> Result<(i64, i64)> {
        if self.spec != GroupSpec::Lattice(1) {
            return Err(Error::Precondition(format!("integer support requires Z, got {}", self.spec)));
        }
        let xs = self.atoms.values().map(|a| a.element.as_vector().expect("lattice")[0]);
        let lo = xs.clone().min().expect("nonempty");
        let hi = xs.max().expect("nonempty");
        Ok((lo, hi))
    }

    fn same_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::InvalidMeasure(format!("measures live on {} and {}", self.spec, other.spec)));
        }
        Ok(())
    }

    /// `(μ * ν)(g) = Σ_h μ(h) ν(h⁻¹ g)`.
    pub fn convolve(&self, other: &Self, cap: usize) -> Result<Self> {
        self.same_spec(other)?;
        let mut acc: HashMap<GroupElement, W> = HashMap::with_capacity(self.len().saturating_mul(other.len()).min(cap));
        for a in self.atoms.values() {
            for b in other.atoms.values() {
                let g = element::multiply(&self.spec, &a.element, &b.element)?;
                let w = a.weight.mul(&b.weight);
                match acc.get_mut(&g) {
                    Some(x) => x.add_assign(&w),
                    None => {
                        if acc.len() >= cap {
                            return Err(Error::SupportCap { cap, completed: 0 });
                        }
                        acc.insert(g, w);
                    }
                }
            }
        }
        Ok(Self::from_accumulator(self.spec.clone(), acc))
    }

    /// `μ^{*n}` by repeated convolution; `μ^{*0}` is the identity mass. A cap
    /// failure reports the largest exponent that was completed.
    pub fn convolution_power(&self, n: usize, cap: usize) -> Result<Self> {
        let mut cur = Self::identity_mass(self.spec.clone());
        for i in 0..n {
            cur = cur.convolve(self, cap).map_err(|e| match e {
                Error::SupportCap { cap, .. } => Error::SupportCap { cap, completed: i },
                other => other,
            })?;
        }
        Ok(cur)
    }

    pub fn pushforward(&self, p: &Projection) -> Result<Self> {
        if p.source() != &self.spec {
            return Err(Error::InvalidMeasure(format!("projection source {} differs from {}", p.source(), self.spec)));
        }
        let mut acc: HashMap<GroupElement, W> = HashMap::new();
        for a in self.atoms.values() {
            acc.entry(p.apply(&a.element)?).or_insert_with(W::zero).add_assign(&a.weight);
        }
        Ok(Self::from_accumulator(p.target().clone(), acc))
    }

    /// `½ Σ |μ(g) - ν(g)|`.
    pub fn total_variation(&self, other: &Self) -> Result<W> {
        let mut sum = W::zero();
        for (_, w) in self.diffs(other)? {
            sum.add_assign(&w);
        }
        Ok(sum.mul(&W::from_ratio(1, 2)))
    }

    /// `max_g |μ(g) - ν(g)|` over the union of supports.
    pub fn pointwise_sup_diff(&self, other: &Self) -> Result<W> {
        let mut best = W::zero();
        for (_, w) in self.diffs(other)? {
            if w.cmp_weight(&best).is_gt() {
                best = w;
            }
        }
        Ok(best)
    }

    fn diffs(&self, other: &Self) -> Result<Vec<(CanonicalKey, W)>> {
        self.same_spec(other)?;
        let mut keys: Vec<&CanonicalKey> = self.atoms.keys().chain(other.atoms.keys()).collect();
        keys.sort();
        keys.dedup();
        Ok(keys
            .into_iter()
            .map(|k| (k.clone(), self.weight_of_key(k).sub(&other.weight_of_key(k)).abs()))
            .collect())
    }

    /// Convex combination `Σ c_i μ_i`; the coefficients must sum to one.
    pub fn mixture(parts: &[(W, &Self)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidMeasure("empty mixture".into()))?;
        let spec = first.1.spec.clone();
        let mut atoms = Vec::new();
        for (c, m) in parts {
            if m.spec != spec {
                return Err(Error::InvalidMeasure("mixture of measures on different groups".into()));
            }
            for a in m.atoms.values() {
                atoms.push((a.element.clone(), c.mul(&a.weight)));
            }
        }
        Self::new(spec, atoms)
    }

    /// Image under the inclusion of a lamp group into `lamp ≀ base` at the
    /// base identity.
    pub fn include_as_lamp(&self, wreath: &GroupSpec) -> Result<Self> {
        let (lamp, base) = wreath_parts(wreath)?;
        if lamp != &self.spec {
            return Err(Error::InvalidMeasure(format!("lamp measure lives on {}, wreath lamp is {lamp}", self.spec)));
        }
        let atoms = self.atoms.values().map(|a| {
            let w = WreathElement::lamp_at_identity(lamp, base, a.element.clone());
            (GroupElement::Wreath(Box::new(w)), a.weight.clone())
        });
        Self::new(wreath.clone(), atoms.collect::<Vec<_>>())
    }

    /// Image under the inclusion of the base group into `lamp ≀ base`.
    pub fn include_as_base(&self, wreath: &GroupSpec) -> Result<Self> {
        let (_, base) = wreath_parts(wreath)?;
        if base != &self.spec {
            return Err(Error::InvalidMeasure(format!("base measure lives on {}, wreath base is {base}", self.spec)));
        }
        let atoms = self
            .atoms
            .values()
            .map(|a| (GroupElement::Wreath(Box::new(WreathElement::at(a.element.clone()))), a.weight.clone()));
        Self::new(wreath.clone(), atoms.collect::<Vec<_>>())
    }
}

fn wreath_parts(spec: &GroupSpec) -> Result<(&GroupSpec, &GroupSpec)> {
    match spec {
        GroupSpec::Wreath { lamp, base } => Ok((lamp, base)),
        other => Err(Error::InvalidSpec(format!("{other} is not a wreath product"))),
    }
}

/// Independent product `η ⊗ μ` on `G₁ × G₂`.
pub fn product_measure<W: Weight>(eta: &FiniteMeasure<W>, mu: &FiniteMeasure<W>) -> FiniteMeasure<W> {
    let spec = GroupSpec::product(eta.spec.clone(), mu.spec.clone());
    let mut atoms = BTreeMap::new();
    for a in eta.atoms.values() {
        for b in mu.atoms.values() {
            let g = GroupElement::pair(a.element.clone(), b.element.clone());
            atoms.insert(CanonicalKey::of(&g), Atom { element: g, weight: a.weight.mul(&b.weight) });
        }
    }
    FiniteMeasure::from_map(spec, atoms)
}
