//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use num_integer::Integer;
use num_traits::ToPrimitive;
use wtl_core::{parse_wts, syntactic_measures, Formula, Weight, Wts};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> Wts {
    let bytes = std::fs::read(fixture_path(name)).expect("fixture readable");
    parse_wts(&bytes).expect("fixture parses")
}

pub fn w(s: &str) -> Weight {
    s.parse().expect("weight literal")
}

// ---------------------------------------------------------------------------
// Bounded model enumeration for formulas of modal depth at most one.
// ---------------------------------------------------------------------------

/// Compact formula over integer-scaled weights; indices are multiples of
/// `1 / scale`.
#[derive(Debug, Clone)]
enum Small {
    Top,
    Bot,
    Atom(usize),
    Not(Box<Small>),
    And(Box<Small>, Box<Small>),
    L(u64, Box<Small>),
    M(u64, Box<Small>),
}

fn lower(f: &Formula, atoms: &[String], scale: u64) -> Small {
    let idx = |r: &Weight| {
        let v = r.value() * num_rational::BigRational::from_integer(scale.into());
        assert!(v.is_integer());
        v.to_integer().to_u64().unwrap()
    };
    match f {
        Formula::Top => Small::Top,
        Formula::Bottom => Small::Bot,
        Formula::Atom(a) => Small::Atom(atoms.iter().position(|x| x == a).unwrap()),
        Formula::Not(g) => Small::Not(Box::new(lower(g, atoms, scale))),
        Formula::And(a, b) => Small::And(
            Box::new(lower(a, atoms, scale)),
            Box::new(lower(b, atoms, scale)),
        ),
        Formula::L(r, g) => Small::L(idx(r), Box::new(lower(g, atoms, scale))),
        Formula::M(r, g) => Small::M(idx(r), Box::new(lower(g, atoms, scale))),
    }
}

/// A pointed two-state model: state 0 is designated. `edges[j]` holds the
/// weights of the transitions from state 0 to state j. Outgoing
/// transitions of state 1 never matter below modal depth two.
struct Tiny<'a> {
    labels: [u32; 2],
    edges: [&'a [u64]; 2],
}

fn eval(f: &Small, m: &Tiny, s: usize) -> bool {
    match f {
        Small::Top => true,
        Small::Bot => false,
        Small::Atom(i) => m.labels[s] >> i & 1 == 1,
        Small::Not(g) => !eval(g, m, s),
        Small::And(a, b) => eval(a, m, s) && eval(b, m, s),
        Small::L(r, g) | Small::M(r, g) => {
            let image: Vec<u64> = if s == 0 {
                (0..2)
                    .filter(|&j| eval(g, m, j))
                    .flat_map(|j| m.edges[j].iter().copied())
                    .collect()
            } else {
                Vec::new()
            };
            match (f, image.is_empty()) {
                (_, true) => false,
                (Small::L(..), false) => image.iter().min().unwrap() >= r,
                _ => image.iter().max().unwrap() <= r,
            }
        }
    }
}

/// Candidate transition weights for `f`: its index range (with 0), the
/// midpoints of consecutive range values and one more than the largest.
pub fn candidate_weights(f: &Formula) -> Vec<Weight> {
    let mut range = syntactic_measures(f).range;
    range.insert(Weight::zero());
    let values: Vec<Weight> = range.iter().cloned().collect();
    let mut out: BTreeSet<Weight> = range;
    for pair in values.windows(2) {
        out.insert(pair[0].midpoint(&pair[1]));
    }
    out.insert(values.last().unwrap().plus_one());
    out.into_iter().collect()
}

/// A satisfying pointed model found by enumeration.
#[derive(Debug, Clone)]
pub struct Found {
    pub labels: [BTreeSet<String>; 2],
    pub edges: [Vec<Weight>; 2],
}

impl Found {
    pub fn to_wts(&self) -> Wts {
        let mut transitions = Vec::new();
        for (j, ws) in self.edges.iter().enumerate() {
            for wt in ws {
                transitions.push(("s0".to_string(), wt.clone(), format!("s{j}")));
            }
        }
        Wts::new(
            [
                (
                    "s0".to_string(),
                    self.labels[0].iter().cloned().collect::<Vec<_>>(),
                ),
                (
                    "s1".to_string(),
                    self.labels[1].iter().cloned().collect::<Vec<_>>(),
                ),
            ],
            transitions,
        )
        .expect("enumerated model is well formed")
    }
}

/// Searches every pointed model with at most two states, labels over the
/// atoms of `f` and weights from [`candidate_weights`] for one satisfying
/// `f`. Requires modal depth at most one. One-state models appear as the
/// two-state models where the second state is unreachable.
pub fn enumerate_model(f: &Formula) -> Option<Found> {
    assert!(
        f.modal_depth() <= 1,
        "enumeration assumes modal depth at most one"
    );
    let atoms: Vec<String> = f.atoms().into_iter().collect();
    let cands = candidate_weights(f);
    let scale = cands
        .iter()
        .fold(1u64, |acc, c| acc.lcm(&c.denom().to_u64().unwrap()));
    let scaled: Vec<u64> = cands
        .iter()
        .map(|c| {
            (c.value() * num_rational::BigRational::from_integer(scale.into()))
                .to_integer()
                .to_u64()
                .unwrap()
        })
        .collect();
    let small = lower(f, &atoms, scale);
    let subsets: Vec<Vec<u64>> = (0u32..1 << scaled.len())
        .map(|mask| {
            (0..scaled.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| scaled[i])
                .collect()
        })
        .collect();
    let label_count = 1u32 << atoms.len();
    for l0 in 0..label_count {
        for l1 in 0..label_count {
            for (m0, e0) in subsets.iter().enumerate() {
                for (m1, e1) in subsets.iter().enumerate() {
                    let tiny = Tiny {
                        labels: [l0, l1],
                        edges: [e0, e1],
                    };
                    if eval(&small, &tiny, 0) {
                        let label_set = |l: u32| -> BTreeSet<String> {
                            atoms
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| l >> i & 1 == 1)
                                .map(|(_, a)| a.clone())
                                .collect()
                        };
                        let pick = |m: usize| -> Vec<Weight> {
                            (0..cands.len())
                                .filter(|i| m >> i & 1 == 1)
                                .map(|i| cands[i].clone())
                                .collect()
                        };
                        return Some(Found {
                            labels: [label_set(l0), label_set(l1)],
                            edges: [pick(m0), pick(m1)],
                        });
                    }
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Naive greatest-fixpoint bisimilarity over explicit state pairs.
// ---------------------------------------------------------------------------

fn classes(n: usize, rel: &HashSet<(usize, usize)>) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&t| rel.contains(&(s, t))).collect();
        for &t in &class {
            seen[t] = true;
        }
        out.push(class);
    }
    out
}

fn image(model: &Wts, s: usize, class: &[usize]) -> BTreeSet<Weight> {
    model
        .transitions()
        .filter(|(from, _, to)| *from == s && class.contains(to))
        .map(|(_, wt, _)| wt.clone())
        .collect()
}

/// Largest relation closed under the bisimulation transfer condition,
/// computed by deleting violating pairs until nothing changes. Returns the
/// equivalence classes as sorted lists of state names, sorted.
pub fn naive_bisimilarity(model: &Wts, weighted: bool) -> Vec<Vec<String>> {
    let n = model.num_states();
    let mut rel: HashSet<(usize, usize)> = HashSet::new();
    for s in 0..n {
        for t in 0..n {
            if model.labels(s) == model.labels(t) {
                rel.insert((s, t));
            }
        }
    }
    loop {
        let cls = classes(n, &rel);
        let keep: HashSet<(usize, usize)> = rel
            .iter()
            .copied()
            .filter(|&(s, t)| {
                cls.iter().all(|c| {
                    let (a, b) = (image(model, s, c), image(model, t, c));
                    if weighted {
                        a == b
                    } else {
                        a.first() == b.first() && a.last() == b.last()
                    }
                })
            })
            .collect();
        if keep.len() == rel.len() {
            break;
        }
        rel = keep;
    }
    let mut named: Vec<Vec<String>> = classes(n, &rel)
        .into_iter()
        .map(|c| {
            let mut v: Vec<String> = c
                .into_iter()
                .map(|i| model.state_name(i).to_string())
                .collect();
            v.sort();
            v
        })
        .collect();
    named.sort();
    named
}

pub fn sorted_blocks(blocks: Vec<Vec<String>>) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = blocks
        .into_iter()
        .map(|mut b| {
            b.sort();
            b
        })
        .collect();
    out.sort();
    out
}
