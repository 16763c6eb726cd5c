//! Generalized and classical weighted bisimilarity by signature-based
//! partition refinement, quotienting, and distinguishing formulas.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::check::sat_set;
use crate::formula::Formula;
use crate::weight::{ExtendedBound, Weight};
use crate::wts::{StateSet, Wts, WtsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// Equal labels and equal lower/upper image bounds into every class.
    Generalized,
    /// Equal labels and exact matching of transition weights into classes.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error(transparent)]
    Model(#[from] WtsError),
    #[error("partition does not cover the model's states exactly once")]
    MalformedPartition,
    #[error("partition is not a generalized weighted bisimulation: {0}")]
    NotABisimulation(String),
}

/// Disjoint blocks of state indices covering a model. Blocks are sorted
/// internally and ordered by their least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Canonicalizes arbitrary blocks; fails unless they partition
    /// `0..num_states`.
    pub fn from_blocks(num_states: usize, blocks: Vec<Vec<usize>>) -> Result<Self, BisimError> {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(BisimError::MalformedPartition);
        }
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![usize::MAX; num_states];
        for (i, block) in blocks.iter().enumerate() {
            for &s in block {
                if s >= num_states || block_of[s] != usize::MAX {
                    return Err(BisimError::MalformedPartition);
                }
                block_of[s] = i;
            }
        }
        if block_of.contains(&usize::MAX) {
            return Err(BisimError::MalformedPartition);
        }
        Ok(Partition { blocks, block_of })
    }

    /// Groups states by key; the block order is canonical regardless of the
    /// key type.
    fn group_by<K: Ord>(num_states: usize, key: impl Fn(usize) -> K) -> Self {
        let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
        for s in 0..num_states {
            groups.entry(key(s)).or_default().push(s);
        }
        Self::from_blocks(num_states, groups.into_values().collect())
            .expect("grouping partitions the states")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, state: usize) -> usize {
        self.block_of[state]
    }

    pub fn same_block(&self, s: usize, t: usize) -> bool {
        self.block_of[s] == self.block_of[t]
    }

    pub fn block_set(&self, block: usize) -> StateSet {
        StateSet::from_indices(self.block_of.len(), self.blocks[block].iter().copied())
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&s| coarser.same_block(s, b[0])))
    }

    /// Blocks as sorted lists of state ids.
    pub fn to_names(&self, model: &Wts) -> Vec<Vec<String>> {
        let mut named: Vec<Vec<String>> = self
            .blocks
            .iter()
            .map(|b| {
                let mut names: Vec<String> =
                    b.iter().map(|&s| model.state_name(s).to_string()).collect();
                names.sort();
                names
            })
            .collect();
        named.sort();
        named
    }
}

fn label_partition(model: &Wts) -> Partition {
    Partition::group_by(model.num_states(), |s| model.labels(s).clone())
}

fn bound_signature(model: &Wts, p: &Partition, s: usize) -> Vec<(ExtendedBound, ExtendedBound)> {
    (0..p.num_blocks())
        .map(|b| {
            let target = p.block_set(b);
            (model.theta_min(s, &target), model.theta_max(s, &target))
        })
        .collect()
}

fn weight_signature(model: &Wts, p: &Partition, s: usize) -> BTreeSet<(Weight, usize)> {
    model
        .outgoing(s)
        .iter()
        .map(|(w, t)| (w.clone(), p.block_of(*t)))
        .collect()
}

/// One refinement round: splits every block by its members' signatures
/// with respect to all blocks of `p`.
pub fn refine_once(model: &Wts, p: &Partition, flavor: Flavor) -> Partition {
    match flavor {
        Flavor::Generalized => Partition::group_by(model.num_states(), |s| {
            (p.block_of(s), bound_signature(model, p, s))
        }),
        Flavor::Weighted => Partition::group_by(model.num_states(), |s| {
            (p.block_of(s), weight_signature(model, p, s))
        }),
    }
}

/// The partitions produced by successive rounds, starting from the label
/// partition and ending at the fixpoint.
pub fn refinement_history(model: &Wts, flavor: Flavor) -> Vec<Partition> {
    let mut history = vec![label_partition(model)];
    loop {
        let current = history.last().unwrap();
        let next = refine_once(model, current, flavor);
        if next.num_blocks() == current.num_blocks() {
            return history;
        }
        history.push(next);
    }
}

pub fn bisimilarity(model: &Wts, flavor: Flavor) -> Partition {
    refinement_history(model, flavor).pop().unwrap()
}

/// The classes of the largest generalized weighted bisimulation.
pub fn generalized_bisimilarity(model: &Wts) -> Partition {
    bisimilarity(model, Flavor::Generalized)
}

/// The classes of the largest weighted bisimulation.
pub fn weighted_bisimilarity(model: &Wts) -> Partition {
    bisimilarity(model, Flavor::Weighted)
}

pub fn are_bisimilar(model: &Wts, s: &str, t: &str, flavor: Flavor) -> Result<bool, WtsError> {
    let (s, t) = (model.state_index(s)?, model.state_index(t)?);
    Ok(bisimilarity(model, flavor).same_block(s, t))
}

/// Checks that `p` is a generalized weighted bisimulation on `model`:
/// labels agree within blocks and every block sees constant bounds.
pub fn check_generalized_bisimulation(model: &Wts, p: &Partition) -> Result<(), BisimError> {
    for block in p.blocks() {
        let rep = block[0];
        let rep_sig = bound_signature(model, p, rep);
        for &s in &block[1..] {
            if model.labels(s) != model.labels(rep) {
                return Err(BisimError::NotABisimulation(format!(
                    "{} and {} carry different labels",
                    model.state_name(rep),
                    model.state_name(s)
                )));
            }
            if bound_signature(model, p, s) != rep_sig {
                return Err(BisimError::NotABisimulation(format!(
                    "{} and {} have different bounds into some class",
                    model.state_name(rep),
                    model.state_name(s)
                )));
            }
        }
    }
    Ok(())
}

/// Collapses each block of a generalized bisimulation into one state named
/// after its least member. Between classes the quotient keeps only the
/// lower and upper bound as transition weights.
pub fn quotient_model(model: &Wts, p: &Partition) -> Result<Wts, BisimError> {
    if p.block_of.len() != model.num_states() {
        return Err(BisimError::MalformedPartition);
    }
    check_generalized_bisimulation(model, p)?;
    let name = |b: usize| model.state_name(p.blocks()[b][0]).to_string();
    let states: Vec<(String, Vec<String>)> = (0..p.num_blocks())
        .map(|b| {
            (
                name(b),
                model.labels(p.blocks()[b][0]).iter().cloned().collect(),
            )
        })
        .collect();
    let mut transitions = Vec::new();
    for b in 0..p.num_blocks() {
        let rep = p.blocks()[b][0];
        for target in 0..p.num_blocks() {
            let set = p.block_set(target);
            for bound in [model.theta_min(rep, &set), model.theta_max(rep, &set)] {
                if let ExtendedBound::Finite(w) = bound {
                    transitions.push((name(b), w, name(target)));
                }
            }
        }
    }
    Ok(Wts::new(states, transitions)?)
}

/// A formula separating `s` from `t`, or `None` when they are generalized
/// bisimilar. The returned formula holds at `s` and fails at `t`.
pub fn distinguishing_formula(model: &Wts, s: &str, t: &str) -> Result<Option<Formula>, WtsError> {
    let (s, t) = (model.state_index(s)?, model.state_index(t)?);
    let mut builder = Distinguisher::new(model);
    Ok(builder.distinguish(s, t))
}

/// Builds separating formulas round by round along the refinement history.
/// A formula produced for a pair split in round `k` has modal depth at most
/// `k`, so it is constant on the blocks of round `k`.
pub struct Distinguisher<'a> {
    model: &'a Wts,
    history: Vec<Partition>,
    pairs: HashMap<(usize, usize), Formula>,
    characteristic: HashMap<(usize, usize), Formula>,
}

impl<'a> Distinguisher<'a> {
    pub fn new(model: &'a Wts) -> Self {
        Distinguisher {
            model,
            history: refinement_history(model, Flavor::Generalized),
            pairs: HashMap::new(),
            characteristic: HashMap::new(),
        }
    }

    pub fn final_partition(&self) -> &Partition {
        self.history.last().unwrap()
    }

    pub fn distinguish(&mut self, s: usize, t: usize) -> Option<Formula> {
        let last = self.final_partition();
        if last.same_block(s, t) {
            return None;
        }
        // Formulas are constant on final blocks, so work with representatives.
        let s = last.blocks()[last.block_of(s)][0];
        let t = last.blocks()[last.block_of(t)][0];
        Some(self.separate(s, t))
    }

    fn separate(&mut self, s: usize, t: usize) -> Formula {
        if let Some(f) = self.pairs.get(&(s, t)) {
            return f.clone();
        }
        let round = self
            .history
            .iter()
            .position(|p| !p.same_block(s, t))
            .expect("states are separated in some round");
        let f = if round == 0 {
            self.literal(s, t)
        } else {
            self.modal(s, t, round)
        };
        let sat = sat_set(self.model, &f);
        assert!(
            sat.contains(s) && !sat.contains(t),
            "distinguishing formula {f} does not separate {} from {}",
            self.model.state_name(s),
            self.model.state_name(t)
        );
        self.pairs.insert((s, t), f.clone());
        f
    }

    fn literal(&self, s: usize, t: usize) -> Formula {
        let (ls, lt) = (self.model.labels(s), self.model.labels(t));
        if let Some(p) = ls.difference(lt).next() {
            Formula::atom(p.clone())
        } else {
            let p = lt.difference(ls).next().expect("labels differ");
            Formula::not(Formula::atom(p.clone()))
        }
    }

    /// χ_T for block `block` of the round-`round` partition: its
    /// satisfaction set is exactly that block.
    fn characteristic(&mut self, round: usize, block: usize) -> Formula {
        if let Some(f) = self.characteristic.get(&(round, block)) {
            return f.clone();
        }
        let blocks = self.history[round].blocks().to_vec();
        let rep = blocks[block][0];
        let mut conjuncts: Vec<Formula> = Vec::new();
        for (i, other) in blocks.iter().enumerate() {
            if i == block {
                continue;
            }
            let f = self.separate(rep, other[0]);
            if !conjuncts.contains(&f) {
                conjuncts.push(f);
            }
        }
        let chi = Formula::conjunction(conjuncts);
        self.characteristic.insert((round, block), chi.clone());
        chi
    }

    fn modal(&mut self, s: usize, t: usize, round: usize) -> Formula {
        let previous = self.history[round - 1].clone();
        for block in 0..previous.num_blocks() {
            let target = previous.block_set(block);
            let (min_s, min_t) = (
                self.model.theta_min(s, &target),
                self.model.theta_min(t, &target),
            );
            let (max_s, max_t) = (
                self.model.theta_max(s, &target),
                self.model.theta_max(t, &target),
            );
            if min_s == min_t && max_s == max_t {
                continue;
            }
            let chi = self.characteristic(round - 1, block);
            let f = if min_s != min_t {
                match (min_s.finite(), min_t.finite()) {
                    (Some(a), Some(b)) => Formula::lower(a.midpoint(b), chi),
                    _ => Formula::diamond(chi),
                }
            } else {
                let (a, b) = (max_s.finite().unwrap(), max_t.finite().unwrap());
                Formula::upper(a.midpoint(b), chi)
            };
            return if sat_set(self.model, &f).contains(s) {
                f
            } else {
                Formula::not(f)
            };
        }
        unreachable!("states split in round {round} must differ on some block")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::model_check;

    fn w(s: &str) -> Weight {
        s.parse().unwrap()
    }

    fn no_transitions() -> Vec<(&'static str, Weight, &'static str)> {
        Vec::new()
    }

    #[test]
    fn self_loop_is_one_block() {
        let m = Wts::new([("a", vec!["p"])], [("a", w("1"), "a")]).unwrap();
        assert_eq!(weighted_bisimilarity(&m).num_blocks(), 1);
        assert_eq!(generalized_bisimilarity(&m).num_blocks(), 1);
        assert!(are_bisimilar(&m, "a", "a", Flavor::Weighted).unwrap());
    }

    #[test]
    fn separates_by_weight_between_dead_states() {
        let m = Wts::new(
            [("a", vec![]), ("b", vec![]), ("x", vec!["p"])],
            [("a", w("2"), "x"), ("b", w("3"), "x")],
        )
        .unwrap();
        let f = distinguishing_formula(&m, "a", "b").unwrap().unwrap();
        assert!(model_check(&m, "a", &f).unwrap());
        assert!(!model_check(&m, "b", &f).unwrap());
        // the q-between-bounds step picks the mean
        let inner_index = |f: &Formula| match f {
            Formula::L(r, _) | Formula::M(r, _) => Some(r.clone()),
            Formula::Not(g) => match &**g {
                Formula::L(r, _) | Formula::M(r, _) => Some(r.clone()),
                _ => None,
            },
            _ => None,
        };
        assert_eq!(inner_index(&f), Some(w("5/2")));
    }

    #[test]
    fn empty_image_uses_diamond() {
        let m = Wts::new(
            [("a", vec![]), ("b", vec![]), ("x", vec!["p"])],
            [("a", w("2"), "x")],
        )
        .unwrap();
        let f = distinguishing_formula(&m, "b", "a").unwrap().unwrap();
        assert!(model_check(&m, "b", &f).unwrap());
        assert!(!model_check(&m, "a", &f).unwrap());
    }

    #[test]
    fn quotient_rejects_non_bisimulation() {
        let m = Wts::new([("a", vec!["p"]), ("b", vec![])], no_transitions()).unwrap();
        let p = Partition::from_blocks(2, vec![vec![0, 1]]).unwrap();
        assert!(matches!(
            quotient_model(&m, &p),
            Err(BisimError::NotABisimulation(_))
        ));
        assert!(Partition::from_blocks(2, vec![vec![0]]).is_err());
        assert!(Partition::from_blocks(2, vec![vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn minimal_model_quotients_to_itself() {
        let m = Wts::new(
            [("a", vec!["p"]), ("b", vec![])],
            [("a", w("1"), "b"), ("b", w("2"), "a")],
        )
        .unwrap();
        let q = quotient_model(&m, &generalized_bisimilarity(&m)).unwrap();
        assert_eq!(q, m);
    }

    #[test]
    fn unknown_states() {
        let m = Wts::new([("a", Vec::<&str>::new())], no_transitions()).unwrap();
        assert!(are_bisimilar(&m, "a", "z", Flavor::Generalized).is_err());
        assert!(distinguishing_formula(&m, "z", "a").is_err());
    }
}
