mod common;

use std::collections::BTreeMap;

use common::Oracle;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use walklab::magnus::{is_identity_in_sdm, magnus_embed, random_derived_series_word, sdm_inverse, sdm_multiply};
use walklab::FreeWord;

fn word(d: i32, max: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(prop_oneof![1..=d, -d..=-1], 0..=max)
}

fn free(w: &[i32]) -> FreeWord {
    FreeWord::from_letters(w.iter().copied()).unwrap()
}

fn dm() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=3, 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn embedding_matches_matrix_oracle(((d, m), w) in dm().prop_flat_map(|dm| (Just(dm), word(dm.0 as i32, 12)))) {
        let image = magnus_embed(&free(&w), d, m).unwrap();
        prop_assert_eq!(Oracle::of_image(&image), Oracle::of_word(&w, d, m));
    }

    #[test]
    fn embedding_is_a_homomorphism(
        ((d, m), u, v) in dm().prop_flat_map(|dm| (Just(dm), word(dm.0 as i32, 12), word(dm.0 as i32, 12)))
    ) {
        let (fu, fv) = (free(&u), free(&v));
        let uv = magnus_embed(&fu.mul(&fv), d, m).unwrap();
        let prod = sdm_multiply(&magnus_embed(&fu, d, m).unwrap(), &magnus_embed(&fv, d, m).unwrap()).unwrap();
        prop_assert_eq!(&uv, &prod);
        let inv = magnus_embed(&fu.inverse(), d, m).unwrap();
        prop_assert_eq!(inv, sdm_inverse(&magnus_embed(&fu, d, m).unwrap()));
    }

    #[test]
    fn levels_project_consistently(((d, m), w) in dm().prop_flat_map(|dm| (Just(dm), word(dm.0 as i32, 12)))) {
        let top = magnus_embed(&free(&w), d, m).unwrap();
        for j in 1..=m {
            prop_assert_eq!(top.project_to_level(j).unwrap(), magnus_embed(&free(&w), d, j).unwrap());
        }
    }

    #[test]
    fn unreduced_words_embed_like_their_reductions(w in word(2, 10), at in 0usize..11, l in prop_oneof![1..=2i32, -2..=-1]) {
        let at = at.min(w.len());
        let mut padded = w[..at].to_vec();
        padded.extend([l, -l]);
        padded.extend_from_slice(&w[at..]);
        prop_assert_eq!(Oracle::of_word(&padded, 2, 3), Oracle::of_word(&w, 2, 3));
        prop_assert_eq!(magnus_embed(&free(&padded), 2, 3).unwrap(), magnus_embed(&free(&w), 2, 3).unwrap());
    }
}

#[test]
fn commutator_lamp_map_at_level_two() {
    let w = [1, 2, -1, -2];
    let expected = Oracle::Mat(
        Box::new(Oracle::Ab(vec![0, 0])),
        BTreeMap::from([
            (Oracle::Ab(vec![0, 0]), vec![1, -1]),
            (Oracle::Ab(vec![1, 0]), vec![0, 1]),
            (Oracle::Ab(vec![0, 1]), vec![-1, 0]),
        ]),
    );
    assert_eq!(Oracle::of_word(&w, 2, 2), expected);
    assert_eq!(Oracle::of_image(&magnus_embed(&free(&w), 2, 2).unwrap()), expected);
    assert!(is_identity_in_sdm(&free(&w), 2, 1).unwrap());
    assert!(!is_identity_in_sdm(&free(&w), 2, 2).unwrap());
}

#[test]
fn metabelian_and_three_step_relations() {
    let x = |i| FreeWord::generator(i);
    let c12 = FreeWord::commutator(&x(1), &x(2));
    let c13 = FreeWord::commutator(&x(1), &x(3));
    let double = FreeWord::commutator(&c12, &c13);
    assert!(is_identity_in_sdm(&double, 3, 2).unwrap());
    assert!(!is_identity_in_sdm(&double, 3, 3).unwrap());
    assert!(Oracle::of_word(double.letters(), 3, 2) == Oracle::identity(3, 2));
    assert!(Oracle::of_word(double.letters(), 3, 3) != Oracle::identity(3, 3));
}

#[test]
fn derived_series_words_vanish_exactly_at_their_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (d, m) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        for _ in 0..25 {
            let w = random_derived_series_word(d, m, 256, &mut rng).unwrap();
            assert!(is_identity_in_sdm(&w, d, m).unwrap(), "{w} at ({d}, {m})");
            assert_eq!(Oracle::of_word(w.letters(), d, m), Oracle::identity(d, m));
        }
        // a level-(m-1) word is generically nontrivial at level m
        let witness = (0..50)
            .map(|_| random_derived_series_word(d, m - 1, 256, &mut rng).unwrap())
            .find(|w| Oracle::of_word(w.letters(), d, m) != Oracle::identity(d, m));
        let w = witness.expect("some level-(m-1) word survives");
        assert!(!is_identity_in_sdm(&w, d, m).unwrap());
    }
}
