mod common;

use common::{fixture, naive_bisimilarity, sorted_blocks, w};
use proptest::prelude::*;
use wtl_core::bisim::{bisimilarity, refine_once, Partition};
use wtl_core::wts::{random_wts, RandomWtsConfig};
use wtl_core::{
    are_bisimilar, distinguishing_formula, generalized_bisimilarity, model_check, quotient_model,
    weighted_bisimilarity, BisimError, Flavor, Formula, Wts,
};

fn small() -> RandomWtsConfig {
    RandomWtsConfig {
        max_states: 5,
        max_out_degree: 4,
        weight_pool: vec![w("0"), w("1"), w("2"), w("3")],
        prop_pool: vec!["p".into()],
    }
}

fn names(blocks: &[&[&str]]) -> Vec<Vec<String>> {
    sorted_blocks(
        blocks
            .iter()
            .map(|b| b.iter().map(|s| s.to_string()).collect())
            .collect(),
    )
}

fn splits(m: &Wts, f: &Formula, s: &str, t: &str) -> bool {
    model_check(m, s, f).unwrap() != model_check(m, t, f).unwrap()
}

#[test]
fn coarse_example() {
    let m = fixture("coarse.json");
    let expected = names(&[&["s", "t"], &["sprime", "tprime"]]);
    assert_eq!(
        sorted_blocks(generalized_bisimilarity(&m).to_names(&m)),
        expected
    );
    let weighted = sorted_blocks(weighted_bisimilarity(&m).to_names(&m));
    assert_eq!(weighted, names(&[&["s"], &["t"], &["sprime", "tprime"]]));
    assert!(are_bisimilar(&m, "s", "s", Flavor::Weighted).unwrap());
    assert_eq!(distinguishing_formula(&m, "s", "t").unwrap(), None);
}

#[test]
fn label_distinct_states_stay_apart() {
    let m = fixture("vacuum.json");
    assert_eq!(generalized_bisimilarity(&m).num_blocks(), 3);
    let chi = distinguishing_formula(&m, "s1", "s2").unwrap().unwrap();
    assert!(splits(&m, &chi, "s1", "s2"));
}

#[test]
fn weight_gap_yields_bounded_modality() {
    let m = Wts::new(
        [
            ("a", vec![]),
            ("b", vec![]),
            ("x", vec!["p"]),
            ("y", vec!["p"]),
        ],
        [("a", w("2"), "x"), ("b", w("3"), "y")],
    )
    .unwrap();
    let chi = distinguishing_formula(&m, "a", "b").unwrap().unwrap();
    assert!(splits(&m, &chi, "a", "b"));
    let modal = match &chi {
        Formula::Not(inner) => inner.as_ref(),
        other => other,
    };
    let index = match modal {
        Formula::L(r, _) | Formula::M(r, _) => r.clone(),
        other => panic!("expected a bounded modality, got {other}"),
    };
    assert!(w("2") < index && index < w("3"), "{chi}");
}

#[test]
fn quotient_of_coarse_example() {
    let m = fixture("coarse.json");
    let q = quotient_model(&m, &generalized_bisimilarity(&m)).unwrap();
    assert_eq!(q.num_states(), 2);
    let ws: Vec<_> = q.transitions().map(|(_, wt, _)| wt.clone()).collect();
    assert_eq!(ws, vec![w("1"), w("3")]);
    assert_eq!(generalized_bisimilarity(&q).num_blocks(), 2);
}

#[test]
fn quotient_rejects_a_weighted_only_partition() {
    let m = fixture("coarse.json");
    let too_coarse = Partition::from_blocks(4, vec![vec![0, 1, 2, 3]]).unwrap();
    assert!(matches!(
        quotient_model(&m, &too_coarse),
        Err(BisimError::NotABisimulation(_))
    ));
}

#[test]
fn duplicate_states_share_a_block() {
    let m = Wts::new(
        [("a", vec!["p"]), ("b", vec!["p"]), ("c", vec![])],
        [("a", w("1"), "c"), ("b", w("1"), "c")],
    )
    .unwrap();
    assert!(are_bisimilar(&m, "a", "b", Flavor::Weighted).unwrap());
    assert_eq!(
        sorted_blocks(weighted_bisimilarity(&m).to_names(&m)),
        naive_bisimilarity(&m, true)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn refinement_matches_fixpoint_oracle(seed: u64) {
        let m = random_wts(seed, &small());
        prop_assert_eq!(sorted_blocks(generalized_bisimilarity(&m).to_names(&m)), naive_bisimilarity(&m, false));
        prop_assert_eq!(sorted_blocks(weighted_bisimilarity(&m).to_names(&m)), naive_bisimilarity(&m, true));
    }

    #[test]
    fn outputs_are_stable_and_nested(seed: u64) {
        let m = random_wts(seed, &small());
        let g = bisimilarity(&m, Flavor::Generalized);
        let wp = bisimilarity(&m, Flavor::Weighted);
        prop_assert_eq!(&refine_once(&m, &g, Flavor::Generalized), &g);
        prop_assert_eq!(&refine_once(&m, &wp, Flavor::Weighted), &wp);
        prop_assert!(wp.refines(&g));
    }

    #[test]
    fn block_members_share_bounds_and_images(seed: u64) {
        let m = random_wts(seed, &small());
        let g = bisimilarity(&m, Flavor::Generalized);
        let wp = bisimilarity(&m, Flavor::Weighted);
        for block in g.blocks() {
            for t in 0..g.num_blocks() {
                let target = g.block_set(t);
                for &s in block {
                    prop_assert_eq!(m.theta_min(s, &target), m.theta_min(block[0], &target));
                    prop_assert_eq!(m.theta_max(s, &target), m.theta_max(block[0], &target));
                }
            }
        }
        for block in wp.blocks() {
            for t in 0..wp.num_blocks() {
                let target = wp.block_set(t);
                for &s in block {
                    prop_assert_eq!(m.image_set(s, &target), m.image_set(block[0], &target));
                }
            }
        }
    }

    #[test]
    fn quotient_states_are_bisimilar_to_their_members(seed: u64) {
        let m = random_wts(seed, &small());
        let g = generalized_bisimilarity(&m);
        let q = quotient_model(&m, &g).unwrap();
        prop_assert_eq!(q.num_states(), g.num_blocks());
        prop_assert_eq!(generalized_bisimilarity(&q).num_blocks(), q.num_states());
        let union = m.disjoint_union(&q, "q_").unwrap();
        for block in g.blocks() {
            let rep = format!("q_{}", m.state_name(block[0]));
            for &s in block {
                prop_assert!(are_bisimilar(&union, m.state_name(s), &rep, Flavor::Generalized).unwrap());
            }
        }
    }

    #[test]
    fn distinguishing_formulas_split_exactly_the_non_bisimilar(seed: u64) {
        let m = random_wts(seed, &small());
        for s in m.states() {
            for t in m.states() {
                let bisimilar = are_bisimilar(&m, s, t, Flavor::Generalized).unwrap();
                match distinguishing_formula(&m, s, t).unwrap() {
                    None => prop_assert!(bisimilar),
                    Some(chi) => {
                        prop_assert!(!bisimilar);
                        prop_assert!(model_check(&m, s, &chi).unwrap());
                        prop_assert!(!model_check(&m, t, &chi).unwrap());
                    }
                }
            }
        }
    }
}
