use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;
use walklab::group::{element, Projection, ProjectionKind};
use walklab::measures::families::{dinf_family, dinf_limit, free_generators_uniform, z_drift_family};
use walklab::measures::{product_measure, Entropy, FiniteMeasure, LogLinear, Rational, Weight, DEFAULT_SUPPORT_CAP};
use walklab::walk::{
    coarse_entropy, coarse_entropy_given_endpoint, conditional_entropy, entropy_ladder, enumerate_trajectories,
    exact_escape_drifted_z, free_group_srw_ladder, hoeffding_bound, induced_measure_on_subgroup, mc_escape,
    mc_escape_nested, range_rate, return_probabilities_z, rigorous_escape, view_entropy, PartitionView,
    DEFAULT_ENUMERATION_CAP,
};
use walklab::{Error, GroupElement, GroupSpec};

const CAP: usize = DEFAULT_SUPPORT_CAP;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn on_z<W: Weight>(atoms: &[(i64, W)]) -> FiniteMeasure<W> {
    FiniteMeasure::new(GroupSpec::Lattice(1), atoms.iter().map(|(x, w)| (GroupElement::scalar(*x), w.clone()))).unwrap()
}

fn pm1() -> FiniteMeasure<Rational> {
    on_z(&[(1, q(1, 2)), (-1, q(1, 2))])
}

fn drifted() -> FiniteMeasure<Rational> {
    on_z(&[(1, q(3, 4)), (-1, q(1, 4))])
}

fn exactly_equal(a: &LogLinear, b: &LogLinear) -> bool {
    a.sub(b).is_zero()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn enumeration_basics() {
    let e0 = enumerate_trajectories(&pm1(), 0, CAP).unwrap();
    assert_eq!(e0.records().len(), 1);
    assert_eq!(e0.records()[0].weight, q(1, 1));
    let e2 = enumerate_trajectories(&pm1(), 2, CAP).unwrap();
    assert_eq!(e2.records().len(), 4);
    assert!(e2.records().iter().all(|r| r.weight == q(1, 4)));
    let mu = dinf_family(&q(3, 4), 3).unwrap();
    assert_eq!(enumerate_trajectories(&mu, 5, CAP).unwrap().total_weight(), q(1, 1));
    assert!(matches!(enumerate_trajectories(&mu, 20, 1000), Err(Error::SupportCap { .. })));
}

#[test]
fn binomial_ladder_matches_closed_form() {
    // H(μ^{*n}) for uniform{±1}: Σ_k C(n,k) 2^{-n} (n ln 2 - ln C(n,k)).
    let ladder = entropy_ladder(&pm1(), 12, CAP).unwrap();
    for n in 0..=12u64 {
        let mut oracle = LogLinear::zero();
        for k in 0..=n {
            let c = binomial(n, k);
            let p = BigRational::new(BigInt::from(c), BigInt::from(1u64 << n));
            oracle = oracle.add(&LogLinear::ln_of(2, p.clone() * BigInt::from(n)));
            if c > 1 {
                oracle = oracle.sub(&LogLinear::term(&BigUint::from(c), &p));
            }
        }
        assert!(exactly_equal(ladder.h(n as usize), &oracle), "n = {n}");
    }
    assert!(ladder.check_invariants().unwrap().all_hold());
}

/// The three entropy properties for partitions ρ, γ, δ, checked exactly.
fn check_partition_properties<W: Weight>(mu: &FiniteMeasure<W>, n: usize, triples: &[[PartitionView; 3]]) {
    let e = enumerate_trajectories(mu, n, DEFAULT_ENUMERATION_CAP).unwrap();
    for [rho, gamma, delta] in triples {
        let j = |a: &PartitionView, b: &PartitionView| a.clone().join(b.clone());
        // H(ρ∨γ | δ) = H(ρ | γ∨δ) + H(γ | δ)
        let lhs = conditional_entropy(&e, &j(rho, gamma), delta).unwrap();
        let rhs = conditional_entropy(&e, rho, &j(gamma, delta))
            .unwrap()
            .add(&conditional_entropy(&e, gamma, delta).unwrap());
        assert!(lhs.compare(&rhs).unwrap().is_eq(), "chain rule for {rho:?}, {gamma:?}, {delta:?}");
        // H(ρ | γ) <= H(ρ∨δ | γ)
        let a = conditional_entropy(&e, rho, gamma).unwrap();
        let b = conditional_entropy(&e, &j(rho, delta), gamma).unwrap();
        assert!(a.compare(&b).unwrap().is_le());
        // H(ρ | γ∨δ) <= H(ρ | γ)
        let c = conditional_entropy(&e, rho, &j(gamma, delta)).unwrap();
        assert!(c.compare(&a).unwrap().is_le());
    }
}

fn triples(n: usize) -> Vec<[PartitionView; 3]> {
    use PartitionView::*;
    vec![
        [Position(1), Position(2), Position(n)],
        [Increment(1), Coarse { t0: 2 }, Position(n)],
        [Position(n - 1), Increment(n), Joint(vec![Position(1), Increment(2)])],
    ]
}

#[test]
fn partition_properties_hold_exactly() {
    for n in [3, 6, 10] {
        check_partition_properties(&pm1(), n, &triples(n));
    }
    let mu = dinf_family(&q(3, 4), 3).unwrap();
    for n in [3, 7] {
        check_partition_properties(&mu, n, &triples(n));
    }
    check_partition_properties(&mu.to_float(), 6, &triples(6));
}

#[test]
fn trivial_view_identities() {
    let e = enumerate_trajectories(&drifted(), 4, CAP).unwrap();
    let a = PartitionView::Position(3);
    assert!(conditional_entropy(&e, &a, &a).unwrap().is_zero());
    assert!(view_entropy(&e, &PartitionView::Trivial).unwrap().is_zero());
    // the full path determines every position
    assert!(conditional_entropy(&e, &a, &PartitionView::Full).unwrap().is_zero());
    // independent increments: H(full) = n H(μ)
    assert!(exactly_equal(&view_entropy(&e, &PartitionView::Full).unwrap(), &drifted().entropy().times(4)));
}

#[test]
fn coarse_identity_matches_enumeration() {
    for (mu, cases) in [
        (pm1(), vec![(4, 2), (6, 2), (6, 3), (5, 2)]),
        (dinf_family(&q(3, 4), 3).unwrap(), vec![(4, 2), (6, 3)]),
    ] {
        for (n, t0) in cases {
            let closed = coarse_entropy(&mu, n, t0, CAP).unwrap();
            let e = enumerate_trajectories(&mu, n, CAP).unwrap();
            let direct = view_entropy(&e, &PartitionView::Coarse { t0 }).unwrap();
            assert!(exactly_equal(&closed, &direct), "n = {n}, t0 = {t0}");
            let given = coarse_entropy_given_endpoint(&e, t0).unwrap();
            let by_views = view_entropy(&e, &PartitionView::Coarse { t0 }.join(PartitionView::Position(n)))
                .unwrap()
                .sub(&view_entropy(&e, &PartitionView::Position(n)).unwrap());
            assert!(exactly_equal(&given, &by_views));
        }
    }
    // H(P_4^2) = 2 H(μ^{*2}) = 3 ln 2
    let v = coarse_entropy(&pm1(), 4, 2, CAP).unwrap();
    assert!(exactly_equal(&v, &LogLinear::ln_of(2, q(3, 1))));
    let f = coarse_entropy(&pm1().to_float(), 4, 2, CAP).unwrap();
    assert!((f - 3.0 * std::f64::consts::LN_2).abs() <= 1e-12);
    assert!(coarse_entropy(&pm1(), 2, 3, CAP).is_err());
}

#[test]
fn product_entropy_decomposes() {
    let eta = free_generators_uniform::<Rational>(2).unwrap();
    let mu = dinf_family(&q(3, 4), 5).unwrap();
    let nu = product_measure(&eta, &mu);
    let (ln, le, lm) = (
        entropy_ladder(&nu, 3, CAP).unwrap(),
        entropy_ladder(&eta, 3, CAP).unwrap(),
        entropy_ladder(&mu, 3, CAP).unwrap(),
    );
    for n in 0..=3 {
        assert!(exactly_equal(ln.h(n), &le.h(n).add(lm.h(n))));
    }
}

#[test]
fn pushforward_commutes_with_convolution() {
    let mu = dinf_family(&q(2, 3), 4).unwrap();
    let p = Projection::new(GroupSpec::Dihedral, ProjectionKind::DihedralFlip).unwrap();
    for n in 1..=5 {
        let lhs = mu.convolution_power(n, CAP).unwrap().pushforward(&p).unwrap();
        let rhs = mu.pushforward(&p).unwrap().convolution_power(n, CAP).unwrap();
        assert!(lhs.total_variation(&rhs).unwrap().is_zero());
        // data processing
        assert!(lhs.entropy().compare(&mu.convolution_power(n, CAP).unwrap().entropy()).unwrap().is_le());
    }
}

#[test]
fn family_members_converge_pointwise() {
    let p = q(3, 4);
    let limit = dinf_limit(&p).unwrap();
    let mut last = None;
    for k in [1u64, 2, 4, 8, 16, 32] {
        let d = dinf_family(&p, k).unwrap().pointwise_sup_diff(&limit).unwrap();
        assert_eq!(d, q(3, 4 * k as i64).max(q(1, k as i64)));
        if let Some(prev) = last {
            assert!(d < prev);
        }
        last = Some(d);
    }
}

#[test]
fn free_group_radial_ladder() {
    let l = free_group_srw_ladder::<Rational>(2, 6).unwrap();
    assert!(exactly_equal(l.h(1), &LogLinear::ln_of(2, q(2, 1))));
    assert!(l.check_invariants().unwrap().all_hold());
    // agrees with brute-force convolution on F2
    let mu = free_generators_uniform::<Rational>(2).unwrap();
    let brute = entropy_ladder(&mu, 4, CAP).unwrap();
    for n in 0..=4 {
        assert!(exactly_equal(l.h(n), brute.h(n)));
    }
}

#[test]
fn hoeffding_values() {
    // ℓ = 1/2 and b - a = 2: n = 8 gives 2 e^{-1}.
    assert!((hoeffding_bound(8, 0.5, 2) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    let probs = return_probabilities_z(&drifted(), 40).unwrap();
    for (n, p) in probs.iter().enumerate() {
        // μ^{*2k}(0) = C(2k, k) (3/16)^k, odd steps cannot return
        let oracle = if n % 2 == 1 {
            q(0, 1)
        } else {
            let k = (n / 2) as u32;
            let c: BigInt = (0..k).fold(BigInt::from(1), |acc, i| acc * (2 * k - i) / (i + 1));
            BigRational::new(c * BigInt::from(3).pow(k), BigInt::from(16).pow(k))
        };
        assert_eq!(p, &oracle, "n = {n}");
        let bound = Rational::from_f64(hoeffding_bound(n, 0.5, 2)).unwrap();
        assert!(p <= &bound);
    }
}

#[test]
fn drifted_series_escape() {
    let s = exact_escape_drifted_z(&drifted(), 1e-6, 1_000_000).unwrap();
    assert!(s.estimate.contains(0.5) && s.estimate.width() <= 1e-6);
    let (lo, hi) = s.series_interval();
    assert!(lo <= 2.0 && 2.0 <= hi && hi - lo < 1e-5);
    let unit = on_z(&[(1, q(1, 1))]);
    let s = exact_escape_drifted_z(&unit, 1e-9, 10).unwrap();
    assert_eq!((s.estimate.lo, s.estimate.hi), (1.0, 1.0));
    assert!(matches!(exact_escape_drifted_z(&pm1(), 1e-3, 1000), Err(Error::Precondition(_))));
    // {2: 1/2, -1: 1/2}: 1 - P(return), P(return) from a numpy hitting-probability
    // solve on a truncated window
    let skip = on_z(&[(2, q(1, 2)), (-1, q(1, 2))]);
    let est = rigorous_escape(&skip, 1e-6, 1_000_000).unwrap();
    assert!(est.contains(0.42705098312484235), "{est:?}");
}

#[test]
fn planar_and_transferred_escape() {
    let mu = walklab::measures::families::z2_fixed_family::<Rational>(4).unwrap();
    let est = rigorous_escape(&mu, 1e-3, 1_000_000).unwrap();
    assert!(est.width() <= 1e-3);
    // centred planar walks are recurrent
    let axes = [(1, 0), (-1, 0), (0, 1), (0, -1)].map(|(x, y)| (GroupElement::Vector(vec![x, y]), q(1, 4)));
    let srw = FiniteMeasure::new(GroupSpec::Lattice(2), axes).unwrap();
    assert_eq!(rigorous_escape(&srw, 1e-3, 1000).unwrap().hi, 0.0);
    // BS(1,-1) limit through the translation subgroup; value frozen from an
    // independent numpy evaluation of the Z² return series
    let bs = walklab::measures::families::bs11_limit(&q(3, 4)).unwrap();
    let est = rigorous_escape(&bs, 1e-2, 1_000_000).unwrap();
    assert!(est.contains(0.5660042739), "{est:?}");
    assert!(est.note.as_deref().unwrap_or("").contains("translation subgroup"));
}

#[test]
fn monte_carlo_trivial_cases() {
    let unit = on_z(&[(1, q(1, 1))]);
    let est = mc_escape(&unit, 1000, 200, 1).unwrap();
    assert_eq!(est.value, 1.0);
    let r = range_rate(&unit, 100, 50, 1).unwrap();
    assert!((r.value - 101.0 / 100.0).abs() < 1e-15);
    let stay = FiniteMeasure::<Rational>::identity_mass(GroupSpec::Lattice(1));
    assert!((range_rate(&stay, 100, 10, 1).unwrap().value - 1.0 / 100.0).abs() < 1e-15);
    assert_eq!(mc_escape(&stay, 10, 10, 1).unwrap().value, 0.0);
}

#[test]
fn nested_horizons_are_monotone_and_seeded() {
    let mu = z_drift_family::<Rational>(2).unwrap();
    let a = mc_escape_nested(&mu, &[10, 100, 1000], 500, 9).unwrap();
    assert!(a.windows(2).all(|w| w[1].value <= w[0].value));
    assert_eq!(a, mc_escape_nested(&mu, &[10, 100, 1000], 500, 9).unwrap());
    assert!(a.iter().all(|e| e.seed == Some(9) && e.samples == Some(500)));
    let recurrent = mc_escape(&pm1(), 10_000, 400, 3).unwrap();
    assert!(recurrent.value > 0.0 && recurrent.value < 0.05);
}

#[test]
fn induced_measures() {
    let spec = GroupSpec::Lattice(1);
    let all = induced_measure_on_subgroup(&pm1(), |_| true, 1, 0.0, CAP).unwrap();
    assert!(all.leaked.is_zero());
    assert!(all.measure(&spec).unwrap().total_variation(&pm1()).unwrap().is_zero());
    let even = |g: &GroupElement| g.as_vector().unwrap()[0] % 2 == 0;
    let ind = induced_measure_on_subgroup(&pm1(), even, 2, 0.0, CAP).unwrap();
    let m = ind.measure(&spec).unwrap();
    assert_eq!(m.weight_of(&GroupElement::scalar(2)), q(1, 4));
    assert_eq!(m.weight_of(&GroupElement::scalar(-2)), q(1, 4));
    assert_eq!(m.weight_of(&GroupElement::scalar(0)), q(1, 2));
    // translations of D∞ have index 2
    let mu = dinf_family(&q(3, 4), 3).unwrap();
    let trans = |g: &GroupElement| matches!(g, GroupElement::Dihedral { flip: false, .. });
    // after a flip the walk stays off the subgroup with probability 2/3 per step
    let ind = induced_measure_on_subgroup(&mu, trans, 2, 0.25, CAP).unwrap();
    assert_eq!(ind.leaked, q(2, 9));
    assert!(ind.atoms.iter().all(|a| trans(&a.element)));
    assert!(ind.measure(&GroupSpec::Dihedral).is_err());
    let ind = induced_measure_on_subgroup(&mu, trans, 40, 1e-6, CAP).unwrap();
    assert_eq!(ind.assigned_mass().add(&ind.leaked), q(1, 1));
    assert!(matches!(
        induced_measure_on_subgroup(&mu, trans, 2, 0.0, CAP),
        Err(Error::TailMass { .. })
    ));
    // leaking more than allowed is an error
    let walk = on_z(&[(1, q(1, 2)), (-1, q(1, 2))]);
    assert!(induced_measure_on_subgroup(&walk, |g| g.as_vector().unwrap()[0] == 0, 3, 0.01, CAP).is_err());
}

#[test]
fn convolution_is_associative_with_identity() {
    let spec = GroupSpec::Dihedral;
    let mu = dinf_family(&q(3, 4), 2).unwrap();
    let nu = dinf_family(&q(1, 3), 5).unwrap();
    let e = FiniteMeasure::<Rational>::identity_mass(spec.clone());
    let left = mu.convolve(&nu, CAP).unwrap().convolve(&mu, CAP).unwrap();
    let right = mu.convolve(&nu.convolve(&mu, CAP).unwrap(), CAP).unwrap();
    assert!(left.total_variation(&right).unwrap().is_zero());
    assert!(mu.convolve(&e, CAP).unwrap().total_variation(&mu).unwrap().is_zero());
    assert_eq!(left.total_mass(), q(1, 1));
    let g = element::multiply(&spec, &GroupElement::dihedral_a(), &GroupElement::dihedral_b()).unwrap();
    assert!(FiniteMeasure::<Rational>::dirac(spec, g).unwrap().entropy().is_zero());
}

fn small_measure_on_z() -> impl Strategy<Value = FiniteMeasure<Rational>> {
    prop::collection::btree_map(-3i64..=3, 1i64..6, 1..4).prop_map(|m| {
        let total: i64 = m.values().sum();
        on_z(&m.into_iter().map(|(x, w)| (x, q(w, total))).collect::<Vec<_>>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ladder_invariants_hold_exactly(mu in small_measure_on_z()) {
        let l = entropy_ladder(&mu, 8, CAP).unwrap();
        let inv = l.check_invariants().unwrap();
        prop_assert!(inv.all_hold(), "{inv:?}");
        // float mode agrees to rounding
        let lf = entropy_ladder(&mu.to_float(), 8, CAP).unwrap();
        for n in 0..=8 {
            prop_assert!((l.h_f64(n) - lf.h(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_is_subadditive_under_convolution(a in small_measure_on_z(), b in small_measure_on_z()) {
        let ab = a.convolve(&b, CAP).unwrap();
        prop_assert!(ab.entropy().compare(&a.entropy().add(&b.entropy())).unwrap().is_le());
    }
}
