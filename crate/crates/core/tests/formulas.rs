mod common;

use common::{fixture, w};
use proptest::prelude::*;
use wtl_core::formula::{random_formula, RandomFormulaConfig};
use wtl_core::wts::{random_wts, RandomWtsConfig};
use wtl_core::{model_check, parse_formula, sat_set, syntactic_measures, Formula, Wts};

/// Pointwise evaluation straight from the satisfaction clauses.
fn holds(m: &Wts, s: usize, f: &Formula) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Atom(p) => m.has_label(s, p),
        Formula::Not(g) => !holds(m, s, g),
        Formula::And(a, b) => holds(m, s, a) && holds(m, s, b),
        Formula::L(r, g) => {
            let ws: Vec<_> = m
                .transitions()
                .filter(|(from, _, to)| *from == s && holds(m, *to, g))
                .collect();
            !ws.is_empty() && ws.iter().all(|(_, wt, _)| *wt >= r)
        }
        Formula::M(r, g) => {
            let ws: Vec<_> = m
                .transitions()
                .filter(|(from, _, to)| *from == s && holds(m, *to, g))
                .collect();
            !ws.is_empty() && ws.iter().all(|(_, wt, _)| *wt <= r)
        }
    }
}

fn f(text: &str) -> Formula {
    parse_formula(text).unwrap()
}

fn formulas() -> RandomFormulaConfig {
    RandomFormulaConfig::new(&["p", "q"], 3, &["0", "1/2", "1", "2", "3"])
}

#[test]
fn upper_bound_example() {
    let m = fixture("vacuum.json");
    assert!(!model_check(&m, "s1", &f("M[1] charging")).unwrap());
    assert!(model_check(&m, "s1", &f("M[2] charging")).unwrap());
    assert!(model_check(&m, "s1", &f("L[1] charging & !L[2] charging")).unwrap());
    assert!(model_check(&m, "s2", &f("L[5] waiting & M[15] waiting")).unwrap());
}

#[test]
fn desugaring_shapes() {
    assert_eq!(
        f("M[1] charging"),
        Formula::upper(w("1"), Formula::atom("charging"))
    );
    assert_eq!(f("<> p"), Formula::lower(w("0"), Formula::atom("p")));
    assert_eq!(
        f("p -> q"),
        Formula::not(Formula::and(
            Formula::atom("p"),
            Formula::not(Formula::atom("q"))
        ))
    );
    assert_eq!(
        f("[] p"),
        Formula::not(Formula::lower(w("0"), Formula::not(Formula::atom("p"))))
    );
}

#[test]
fn measures_add_zero() {
    let m = syntactic_measures(&f("L[3/2] p & M[2] q"));
    assert_eq!(m.granularity, 2.into());
    let range: Vec<_> = m.range.into_iter().collect();
    assert_eq!(range, vec![w("0"), w("3/2"), w("2")]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sat_sets_match_pointwise_semantics(mseed: u64, fseed: u64) {
        let m = random_wts(mseed, &RandomWtsConfig::default());
        let phi = random_formula(fseed, &formulas());
        let set = sat_set(&m, &phi);
        for s in 0..m.num_states() {
            prop_assert_eq!(set.contains(s), holds(&m, s, &phi), "{} at {}", phi, m.state_name(s));
        }
    }

    #[test]
    fn boolean_connectives_are_set_operations(mseed: u64, a: u64, b: u64) {
        let m = random_wts(mseed, &RandomWtsConfig::default());
        let (phi, psi) = (random_formula(a, &formulas()), random_formula(b, &formulas()));
        let (x, y) = (sat_set(&m, &phi), sat_set(&m, &psi));
        prop_assert_eq!(sat_set(&m, &Formula::not(phi.clone())), x.complement());
        prop_assert_eq!(sat_set(&m, &Formula::and(phi.clone(), psi.clone())), x.intersection(&y));
        prop_assert_eq!(sat_set(&m, &Formula::or(phi, psi)), x.union(&y));
    }

    #[test]
    fn lower_modality_is_antitone_in_its_index(mseed: u64, fseed: u64) {
        let m = random_wts(mseed, &RandomWtsConfig::default());
        let phi = random_formula(fseed, &formulas());
        let strong = sat_set(&m, &Formula::lower(w("2"), phi.clone()));
        let weak = sat_set(&m, &Formula::lower(w("1"), phi.clone()));
        prop_assert!(strong.is_subset(&weak));
        let tight = sat_set(&m, &Formula::upper(w("1"), phi.clone()));
        let loose = sat_set(&m, &Formula::upper(w("2"), phi));
        prop_assert!(tight.is_subset(&loose));
    }

    #[test]
    fn printed_formulas_reparse(seed: u64) {
        let phi = random_formula(seed, &formulas());
        let text = phi.to_string();
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(&back, &phi);
        prop_assert_eq!(back.to_string(), text);
    }
}
