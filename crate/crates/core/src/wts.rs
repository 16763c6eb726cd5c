//! Weighted transition systems, their JSON file format, and image-set bounds.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weight::{ExtendedBound, Weight, WeightError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WtsError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("transition {from} -> {to} refers to unknown state `{missing}`")]
    DanglingState {
        from: String,
        to: String,
        missing: String,
    },
    #[error("transition {from} -> {to}: {source}")]
    BadWeight {
        from: String,
        to: String,
        source: WeightError,
    },
    #[error("a model needs at least one state")]
    NoStates,
    #[error("unknown state `{0}`")]
    UnknownState(String),
}

/// True if `name` belongs to the identifier class `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut bytes = name.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// A subset of the states of one model, indexed like [`Wts::states`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    members: Vec<bool>,
}

impl StateSet {
    pub fn empty(len: usize) -> Self {
        StateSet {
            members: vec![false; len],
        }
    }

    pub fn full(len: usize) -> Self {
        StateSet {
            members: vec![true; len],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(len);
        for i in indices {
            set.members[i] = true;
        }
        set
    }

    pub fn universe_len(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members[index]
    }

    pub fn insert(&mut self, index: usize) {
        self.members[index] = true;
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn is_full(&self) -> bool {
        self.members.iter().all(|&m| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn complement(&self) -> Self {
        StateSet {
            members: self.members.iter().map(|m| !m).collect(),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        StateSet {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a && *b)
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        StateSet {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(a, b)| !*a || *b)
    }
}

/// A finite weighted transition system.
///
/// States are kept in lexicographic order of their ids; every index-based
/// query refers to that order. Transitions form a set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wts {
    states: Vec<String>,
    index: HashMap<String, usize>,
    labels: Vec<BTreeSet<String>>,
    // (from, to, weight), sorted
    transitions: BTreeSet<(usize, usize, Weight)>,
    outgoing: Vec<Vec<(Weight, usize)>>,
}

impl Wts {
    /// Builds a model from named states and transitions, enforcing every
    /// structural invariant. Duplicate transitions collapse.
    pub fn new<S, L, P>(
        states: impl IntoIterator<Item = (S, L)>,
        transitions: impl IntoIterator<Item = (S, Weight, S)>,
    ) -> Result<Self, WtsError>
    where
        S: AsRef<str>,
        L: IntoIterator<Item = P>,
        P: AsRef<str>,
    {
        let mut labelled: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (id, props) in states {
            let id = id.as_ref();
            if !is_identifier(id) {
                return Err(WtsError::InvalidIdentifier(id.to_string()));
            }
            let mut set = BTreeSet::new();
            for p in props {
                let p = p.as_ref();
                if !is_identifier(p) {
                    return Err(WtsError::InvalidIdentifier(p.to_string()));
                }
                set.insert(p.to_string());
            }
            if labelled.insert(id.to_string(), set).is_some() {
                return Err(WtsError::DuplicateState(id.to_string()));
            }
        }
        if labelled.is_empty() {
            return Err(WtsError::NoStates);
        }
        let (names, labels): (Vec<_>, Vec<_>) = labelled.into_iter().unzip();
        let index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();

        let mut set = BTreeSet::new();
        for (from, weight, to) in transitions {
            let (from, to) = (from.as_ref(), to.as_ref());
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| WtsError::DanglingState {
                        from: from.to_string(),
                        to: to.to_string(),
                        missing: name.to_string(),
                    })
            };
            set.insert((lookup(from)?, lookup(to)?, weight));
        }
        Ok(Self::from_parts(names, index, labels, set))
    }

    fn from_parts(
        states: Vec<String>,
        index: HashMap<String, usize>,
        labels: Vec<BTreeSet<String>>,
        transitions: BTreeSet<(usize, usize, Weight)>,
    ) -> Self {
        let mut outgoing = vec![Vec::new(); states.len()];
        for (from, to, w) in &transitions {
            outgoing[*from].push((w.clone(), *to));
        }
        Wts {
            states,
            index,
            labels,
            transitions,
            outgoing,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, index: usize) -> &str {
        &self.states[index]
    }

    pub fn state_index(&self, name: &str) -> Result<usize, WtsError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| WtsError::UnknownState(name.to_string()))
    }

    pub fn labels(&self, index: usize) -> &BTreeSet<String> {
        &self.labels[index]
    }

    pub fn has_label(&self, index: usize, prop: &str) -> bool {
        self.labels[index].contains(prop)
    }

    /// Outgoing `(weight, target)` pairs of a state.
    pub fn outgoing(&self, index: usize) -> &[(Weight, usize)] {
        &self.outgoing[index]
    }

    /// All transitions as `(from, weight, to)` index triples, sorted by
    /// source, then target, then weight.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, &Weight, usize)> + '_ {
        self.transitions.iter().map(|(f, t, w)| (*f, w, *t))
    }

    pub fn all_states(&self) -> StateSet {
        StateSet::full(self.num_states())
    }

    pub fn state_set<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<StateSet, WtsError> {
        let mut set = StateSet::empty(self.num_states());
        for n in names {
            set.insert(self.state_index(n)?);
        }
        Ok(set)
    }

    /// θ(s)(T): weights of transitions from `source` into `targets`.
    pub fn image_set(&self, source: usize, targets: &StateSet) -> BTreeSet<Weight> {
        self.outgoing[source]
            .iter()
            .filter(|(_, t)| targets.contains(*t))
            .map(|(w, _)| w.clone())
            .collect()
    }

    /// θ⁻(s)(T): the least weight into `targets`, or −∞ when there is none.
    pub fn theta_min(&self, source: usize, targets: &StateSet) -> ExtendedBound {
        self.outgoing[source]
            .iter()
            .filter(|(_, t)| targets.contains(*t))
            .map(|(w, _)| w)
            .min()
            .map_or(ExtendedBound::NegInf, |w| ExtendedBound::Finite(w.clone()))
    }

    /// θ⁺(s)(T): the greatest weight into `targets`, or +∞ when there is none.
    pub fn theta_max(&self, source: usize, targets: &StateSet) -> ExtendedBound {
        self.outgoing[source]
            .iter()
            .filter(|(_, t)| targets.contains(*t))
            .map(|(w, _)| w)
            .max()
            .map_or(ExtendedBound::PosInf, |w| ExtendedBound::Finite(w.clone()))
    }

    /// Name-based convenience wrapper around [`Wts::image_set`].
    pub fn image_set_named(
        &self,
        source: &str,
        targets: &[&str],
    ) -> Result<BTreeSet<Weight>, WtsError> {
        let s = self.state_index(source)?;
        Ok(self.image_set(s, &self.state_set(targets.iter().copied())?))
    }

    pub fn theta_min_named(
        &self,
        source: &str,
        targets: &[&str],
    ) -> Result<ExtendedBound, WtsError> {
        let s = self.state_index(source)?;
        Ok(self.theta_min(s, &self.state_set(targets.iter().copied())?))
    }

    pub fn theta_max_named(
        &self,
        source: &str,
        targets: &[&str],
    ) -> Result<ExtendedBound, WtsError> {
        let s = self.state_index(source)?;
        Ok(self.theta_max(s, &self.state_set(targets.iter().copied())?))
    }

    /// Disjoint union with `other`; states of `other` get `prefix` prepended.
    pub fn disjoint_union(&self, other: &Wts, prefix: &str) -> Result<Wts, WtsError> {
        let rename = |n: &str| format!("{prefix}{n}");
        let states = self
            .states
            .iter()
            .cloned()
            .zip(self.labels.iter().cloned())
            .chain(
                other
                    .states
                    .iter()
                    .map(|n| rename(n))
                    .zip(other.labels.iter().cloned()),
            );
        let transitions = self
            .transitions()
            .map(|(f, w, t)| (self.states[f].clone(), w.clone(), self.states[t].clone()))
            .chain(other.transitions().map(|(f, w, t)| {
                (
                    rename(&other.states[f]),
                    w.clone(),
                    rename(&other.states[t]),
                )
            }))
            .collect::<Vec<_>>();
        Wts::new(states, transitions)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    states: Vec<StateEntry>,
    #[serde(default)]
    transitions: Vec<TransitionEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateEntry {
    id: String,
    #[serde(default)]
    labels: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: String,
    weight: String,
    to: String,
}

/// Parses a model from its JSON file format.
pub fn parse_wts(text: &[u8]) -> Result<Wts, WtsError> {
    let file: ModelFile = serde_json::from_slice(text).map_err(|e| WtsError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut transitions = Vec::with_capacity(file.transitions.len());
    for t in file.transitions {
        let weight = t
            .weight
            .parse::<Weight>()
            .map_err(|source| WtsError::BadWeight {
                from: t.from.clone(),
                to: t.to.clone(),
                source,
            })?;
        transitions.push((t.from, weight, t.to));
    }
    Wts::new(
        file.states.into_iter().map(|s| (s.id, s.labels)),
        transitions,
    )
}

/// Canonical JSON rendering: states, labels and transitions sorted; weights
/// in lowest terms. Ends with a newline.
pub fn serialize_wts(model: &Wts) -> Vec<u8> {
    let file = ModelFile {
        states: model
            .states
            .iter()
            .zip(&model.labels)
            .map(|(id, labels)| StateEntry {
                id: id.clone(),
                labels: labels.iter().cloned().collect(),
            })
            .collect(),
        transitions: model
            .transitions()
            .map(|(f, w, t)| TransitionEntry {
                from: model.states[f].clone(),
                weight: w.to_string(),
                to: model.states[t].clone(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("model serializes");
    out.push(b'\n');
    out
}

/// Parameters for [`random_wts`].
#[derive(Debug, Clone)]
pub struct RandomWtsConfig {
    pub max_states: usize,
    pub max_out_degree: usize,
    pub weight_pool: Vec<Weight>,
    pub prop_pool: Vec<String>,
}

impl Default for RandomWtsConfig {
    fn default() -> Self {
        RandomWtsConfig {
            max_states: 4,
            max_out_degree: 3,
            weight_pool: ["0", "1/2", "1", "2", "3"]
                .iter()
                .map(|w| w.parse().unwrap())
                .collect(),
            prop_pool: vec!["p".into(), "q".into()],
        }
    }
}

/// A pseudo-random model, deterministic in `seed`. States are named
/// `s0, s1, ...`; each proposition labels each state with probability 1/2.
pub fn random_wts(seed: u64, config: &RandomWtsConfig) -> Wts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_wts_with(&mut rng, config)
}

pub fn random_wts_with<R: Rng>(rng: &mut R, config: &RandomWtsConfig) -> Wts {
    assert!(config.max_states >= 1, "max_states must be at least 1");
    let n = rng.random_range(1..=config.max_states);
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let states: Vec<(String, Vec<String>)> = names
        .iter()
        .map(|name| {
            let props = config
                .prop_pool
                .iter()
                .filter(|_| rng.random_bool(0.5))
                .cloned()
                .collect();
            (name.clone(), props)
        })
        .collect();
    let mut transitions = Vec::new();
    if !config.weight_pool.is_empty() {
        for name in &names {
            let degree = rng.random_range(0..=config.max_out_degree);
            for _ in 0..degree {
                let target = names[rng.random_range(0..n)].clone();
                let weight =
                    config.weight_pool[rng.random_range(0..config.weight_pool.len())].clone();
                transitions.push((name.clone(), weight, target));
            }
        }
    }
    Wts::new(states, transitions).expect("generated model is well-formed")
}
