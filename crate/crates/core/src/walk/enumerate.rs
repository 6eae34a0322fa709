use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{element, CanonicalKey, GroupElement, GroupSpec};
use crate::measures::{Entropy, FiniteMeasure, Weight};

/// Default cap on the number of enumerated increment sequences.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

/// Increments `g_1..g_n` and positions `w_0..w_n`, `w_0 = e`, `w_i = w_{i-1} g_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub increments: Vec<GroupElement>,
    pub positions: Vec<GroupElement>,
}

impl Trajectory {
    pub fn from_increments(spec: &GroupSpec, increments: Vec<GroupElement>) -> Result<Self> {
        let mut positions = Vec::with_capacity(increments.len() + 1);
        let mut cur = element::identity(spec);
        positions.push(cur.clone());
        for g in &increments {
            element::mul_assign(spec, &mut cur, g)?;
            positions.push(cur.clone());
        }
        Ok(Trajectory { increments, positions })
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn endpoint(&self) -> &GroupElement {
        self.positions.last().expect("w_0 is always present")
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord<W> {
    pub trajectory: Trajectory,
    pub weight: W,
}

/// Exact joint law of the first `n` steps: every increment sequence with
/// its probability `Π μ(g_i)`.
#[derive(Clone, Debug)]
pub struct TrajectoryEnumeration<W: Weight> {
    spec: GroupSpec,
    n: usize,
    records: Vec<TrajectoryRecord<W>>,
}

pub fn enumerate_trajectories<W: Weight>(
    mu: &FiniteMeasure<W>,
    n: usize,
    cap: usize,
) -> Result<TrajectoryEnumeration<W>> {
    let s = mu.len();
    let count = (s as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::SupportCap { cap, completed: 0 });
    }
    let spec = mu.spec().clone();
    let atoms: Vec<_> = mu.atoms().collect();
    let mut records = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; n];
    loop {
        let increments: Vec<GroupElement> = idx.iter().map(|&i| atoms[i].element.clone()).collect();
        let weight = idx.iter().fold(W::one(), |acc, &i| acc.mul(&atoms[i].weight));
        records.push(TrajectoryRecord { trajectory: Trajectory::from_increments(&spec, increments)?, weight });
        // odometer over index tuples, last coordinate fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(TrajectoryEnumeration { spec, n, records });
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < s {
                break;
            }
            idx[pos] = 0;
        }
    }
}

impl<W: Weight> TrajectoryEnumeration<W> {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn records(&self) -> &[TrajectoryRecord<W>] {
        &self.records
    }

    pub fn total_weight(&self) -> W {
        self.records.iter().fold(W::zero(), |acc, r| acc.add(&r.weight))
    }

    /// Law of the labels of `view`.
    pub fn view_law(&self, view: &PartitionView) -> Result<BTreeMap<Vec<u8>, W>> {
        let mut law: BTreeMap<Vec<u8>, W> = BTreeMap::new();
        for r in &self.records {
            let label = view.label(&r.trajectory)?;
            law.entry(label).or_insert_with(W::zero).add_assign(&r.weight);
        }
        Ok(law)
    }
}

/// A deterministic labelling of trajectories; equal labels are the cells of
/// the corresponding partition of path space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionView {
    /// Position `w_i`.
    Position(usize),
    /// Increment `g_i`, `1 <= i <= n`.
    Increment(usize),
    /// `(w_{t₀}, w_{2t₀}, …, w_{⌊n/t₀⌋ t₀})`.
    Coarse { t0: usize },
    /// The whole increment sequence.
    Full,
    /// The one-cell partition.
    Trivial,
    /// Common refinement.
    Joint(Vec<PartitionView>),
}

impl PartitionView {
    pub fn join(self, other: PartitionView) -> PartitionView {
        PartitionView::Joint(vec![self, other])
    }

    /// Label bytes. Canonical keys are self-delimiting, so concatenating
    /// them under a fixed view structure stays injective.
    pub fn label(&self, t: &Trajectory) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_label(t, &mut out)?;
        Ok(out)
    }

    fn write_label(&self, t: &Trajectory, out: &mut Vec<u8>) -> Result<()> {
        let n = t.len();
        match self {
            PartitionView::Position(i) => {
                let w = t.positions.get(*i).ok_or_else(|| out_of_range(*i, n))?;
                out.extend_from_slice(CanonicalKey::of(w).as_bytes());
            }
            PartitionView::Increment(i) => {
                if *i == 0 || *i > n {
                    return Err(out_of_range(*i, n));
                }
                out.extend_from_slice(CanonicalKey::of(&t.increments[i - 1]).as_bytes());
            }
            PartitionView::Coarse { t0 } => {
                if *t0 == 0 {
                    return Err(Error::InvalidParameter("t0 must be >= 1".into()));
                }
                for j in 1..=(n / t0) {
                    out.extend_from_slice(CanonicalKey::of(&t.positions[j * t0]).as_bytes());
                }
            }
            PartitionView::Full => {
                for g in &t.increments {
                    out.extend_from_slice(CanonicalKey::of(g).as_bytes());
                }
            }
            PartitionView::Trivial => {}
            PartitionView::Joint(views) => {
                for v in views {
                    v.write_label(t, out)?;
                }
            }
        }
        Ok(())
    }
}

fn out_of_range(i: usize, n: usize) -> Error {
    Error::InvalidParameter(format!("view index {i} outside a trajectory of length {n}"))
}

/// `H(A)` under the enumerated law.
pub fn view_entropy<W: Weight>(e: &TrajectoryEnumeration<W>, view: &PartitionView) -> Result<W::H> {
    Ok(e.view_law(view)?.values().fold(W::H::zero(), |acc, w| acc.add(&w.entropy_term())))
}

/// `H(A | B) = H(A ∨ B) - H(B)`.
pub fn conditional_entropy<W: Weight>(
    e: &TrajectoryEnumeration<W>,
    a: &PartitionView,
    b: &PartitionView,
) -> Result<W::H> {
    let joint = view_entropy(e, &a.clone().join(b.clone()))?;
    Ok(joint.sub(&view_entropy(e, b)?))
}

/// `H(P_n^{t₀}) = ⌊n/t₀⌋ · H(μ^{*t₀})`: the coarse trajectory is in bijection
/// with its `⌊n/t₀⌋` independent block increments, each distributed as
/// `μ^{*t₀}`.
pub fn coarse_entropy<W: Weight>(mu: &FiniteMeasure<W>, n: usize, t0: usize, cap: usize) -> Result<W::H> {
    if t0 == 0 || n < t0 {
        return Err(Error::InvalidParameter(format!("coarse entropy needs 1 <= t0 <= n, got t0 = {t0}, n = {n}")));
    }
    let block = mu.convolution_power(t0, cap)?.entropy();
    Ok(block.times((n / t0) as u64))
}

/// `H(P_n^{t₀} | w_n)` on an enumeration of length `n`.
pub fn coarse_entropy_given_endpoint<W: Weight>(e: &TrajectoryEnumeration<W>, t0: usize) -> Result<W::H> {
    conditional_entropy(e, &PartitionView::Coarse { t0 }, &PartitionView::Position(e.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{LogLinear, Rational};

    fn pm1() -> FiniteMeasure<Rational> {
        FiniteMeasure::uniform(GroupSpec::Lattice(1), vec![GroupElement::scalar(1), GroupElement::scalar(-1)]).unwrap()
    }

    #[test]
    fn empty_enumeration() {
        let e = enumerate_trajectories(&pm1(), 0, 10).unwrap();
        assert_eq!(e.records().len(), 1);
        assert_eq!(e.records()[0].weight, Rational::from_ratio(1, 1));
        assert!(e.records()[0].trajectory.is_empty());
    }

    #[test]
    fn two_steps() {
        let e = enumerate_trajectories(&pm1(), 2, 10).unwrap();
        assert_eq!(e.records().len(), 4);
        assert!(e.records().iter().all(|r| r.weight == Rational::from_ratio(1, 4)));
        assert_eq!(e.total_weight(), Rational::from_ratio(1, 1));
    }

    #[test]
    fn cap_is_checked_up_front() {
        assert!(enumerate_trajectories(&pm1(), 20, 1000).is_err());
    }

    #[test]
    fn self_conditioning_vanishes() {
        let e = enumerate_trajectories(&pm1(), 3, 100).unwrap();
        let a = PartitionView::Position(2);
        assert!(conditional_entropy(&e, &a, &a).unwrap().is_zero());
    }

    #[test]
    fn coarse_identity_example() {
        let h = coarse_entropy(&pm1(), 4, 2, 1000).unwrap();
        assert!(h.sub(&LogLinear::ln_of(2, Rational::from_ratio(3, 1))).is_zero());
        let e = enumerate_trajectories(&pm1(), 4, 1000).unwrap();
        let via_view = view_entropy(&e, &PartitionView::Coarse { t0: 2 }).unwrap();
        assert!(h.sub(&via_view).is_zero());
    }

    #[test]
    fn single_block_is_endpoint_entropy() {
        let h = coarse_entropy(&pm1(), 3, 3, 1000).unwrap();
        let direct = pm1().convolution_power(3, 1000).unwrap().entropy();
        assert!(h.sub(&direct).is_zero());
    }

    #[test]
    fn bad_views() {
        let e = enumerate_trajectories(&pm1(), 2, 100).unwrap();
        assert!(view_entropy(&e, &PartitionView::Position(3)).is_err());
        assert!(view_entropy(&e, &PartitionView::Increment(0)).is_err());
        assert!(view_entropy(&e, &PartitionView::Coarse { t0: 0 }).is_err());
    }
}
