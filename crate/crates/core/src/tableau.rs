//! Tableau decision procedure for satisfiability, with finite model
//! extraction from successful tableaux.
//!
//! Nodes carry a formula set Γ and two intervals: `lower` bounds the least
//! weight and `upper` the greatest weight of any transition into the node.
//! Boolean rules rewrite Γ in place; the modal rule fires only when Γ holds
//! nothing but literals and modal literals, and creates one child per
//! minimal operand of the positive modal formulas. Deciding which operands
//! are minimal needs semantic entailment, which is itself answered by a
//! recursive tableau on formulas of strictly smaller modal depth.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::check::sat_set;
use crate::formula::Formula;
use crate::weight::{ExtendedBound, Weight};
use crate::wts::Wts;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("modal rule precondition violated: `{0}` still admits a boolean rule")]
    BooleanRuleApplicable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub bound: ExtendedBound,
    pub closed: bool,
}

/// An interval over extended bounds. Infinite endpoints are always open.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lower: Endpoint,
    pub upper: Endpoint,
}

impl Interval {
    pub fn new(
        lower: ExtendedBound,
        lower_closed: bool,
        upper: ExtendedBound,
        upper_closed: bool,
    ) -> Self {
        let lower_closed = lower_closed && lower != ExtendedBound::NegInf;
        let upper_closed = upper_closed && upper != ExtendedBound::PosInf;
        Interval {
            lower: Endpoint {
                bound: lower,
                closed: lower_closed,
            },
            upper: Endpoint {
                bound: upper,
                closed: upper_closed,
            },
        }
    }

    /// `[w, w]`
    pub fn point(w: Weight) -> Self {
        Interval::new(w.clone().into(), true, w.into(), true)
    }

    /// `[0, ∞)`
    pub fn unbounded() -> Self {
        Interval::new(Weight::zero().into(), true, ExtendedBound::PosInf, false)
    }

    /// Non-empty: `a < b`, or `a = b` with both ends closed.
    pub fn is_consistent(&self) -> bool {
        match self.lower.bound.cmp(&self.upper.bound) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Equal => self.lower.closed && self.upper.closed,
            std::cmp::Ordering::Greater => false,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "lower": self.lower.bound.to_string(),
            "lower_closed": self.lower.closed,
            "upper": self.upper.bound.to_string(),
            "upper_closed": self.upper.closed,
            "text": self.to_string(),
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lower.closed { '[' } else { '(' },
            self.lower.bound,
            self.upper.bound,
            if self.upper.closed { ']' } else { ')' }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    And,
    NegAnd,
    NegNeg,
    Mod,
}

impl Rule {
    fn name(self) -> &'static str {
        match self {
            Rule::And => "and",
            Rule::NegAnd => "neg_and",
            Rule::NegNeg => "neg_neg",
            Rule::Mod => "mod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Interior,
    Leaf,
    Modal,
}

impl NodeKind {
    pub fn is_terminal(self) -> bool {
        matches!(self, NodeKind::Leaf | NodeKind::Modal)
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableauNode {
    /// Insertion-ordered, without duplicates.
    pub gamma: Vec<Formula>,
    pub lower: Interval,
    pub upper: Interval,
    pub kind: NodeKind,
    pub rule: Option<Rule>,
    pub children: Vec<NodeId>,
}

impl TableauNode {
    pub fn is_consistent(&self) -> bool {
        node_consistent(&self.gamma, &self.lower, &self.upper)
    }
}

/// Consistency of a node: no complementary literals and no falsum in Γ,
/// both intervals non-empty, and the least weight can lie below the
/// greatest one.
pub fn node_consistent(gamma: &[Formula], lower: &Interval, upper: &Interval) -> bool {
    let clash = gamma.iter().any(|f| match f {
        Formula::Bottom => true,
        Formula::Not(inner) => match &**inner {
            Formula::Top => true,
            Formula::Atom(_) => gamma.contains(inner),
            _ => false,
        },
        _ => false,
    });
    if clash || !lower.is_consistent() || !upper.is_consistent() {
        return false;
    }
    match lower.lower.bound.cmp(&upper.upper.bound) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Equal => lower.lower.closed && upper.upper.closed,
        std::cmp::Ordering::Greater => false,
    }
}

/// A complete rule-derivation tree, stored as an arena; the root is node 0
/// and every child has a larger id than its parent.
#[derive(Debug, Clone)]
pub struct Tableau {
    pub formula: Formula,
    nodes: Vec<TableauNode>,
}

impl Tableau {
    pub const ROOT: NodeId = 0;

    pub fn root(&self) -> &TableauNode {
        &self.nodes[Self::ROOT]
    }

    pub fn node(&self, id: NodeId) -> &TableauNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TableauNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// JSON rendering of the tree, each node with its printed Γ, intervals,
    /// kind, applied rule and consistency.
    pub fn to_json(&self) -> Value {
        self.node_json(Self::ROOT)
    }

    fn node_json(&self, id: NodeId) -> Value {
        let node = &self.nodes[id];
        json!({
            "gamma": node.gamma.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "lower_interval": node.lower.to_json(),
            "upper_interval": node.upper.to_json(),
            "kind": match node.kind {
                NodeKind::Interior => "interior",
                NodeKind::Leaf => "leaf",
                NodeKind::Modal => "modal",
            },
            "rule": node.rule.map(Rule::name),
            "consistent": node.is_consistent(),
            "children": node.children.iter().map(|&c| self.node_json(c)).collect::<Vec<_>>(),
        })
    }
}

/// Nodes of a tableau selected as a success witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessSubtree {
    pub nodes: BTreeSet<NodeId>,
}

impl WitnessSubtree {
    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains(&id)
    }
}

/// AND–OR evaluation of success: leaves must be consistent, modal nodes
/// must be consistent with every child good, single-child rules inherit
/// their child's status and a branching node needs one good child. The
/// leftmost good child is chosen at branching nodes.
pub fn find_witness(tableau: &Tableau) -> Option<WitnessSubtree> {
    let good = good_nodes(tableau);
    if !good[Tableau::ROOT] {
        return None;
    }
    let mut nodes = BTreeSet::new();
    let mut stack = vec![Tableau::ROOT];
    while let Some(id) = stack.pop() {
        nodes.insert(id);
        let node = tableau.node(id);
        match node.rule {
            Some(Rule::Mod) => stack.extend(node.children.iter().copied()),
            Some(_) => {
                let child = node
                    .children
                    .iter()
                    .copied()
                    .find(|&c| good[c])
                    .expect("good node has a good child");
                stack.push(child);
            }
            None => {}
        }
    }
    Some(WitnessSubtree { nodes })
}

fn good_nodes(tableau: &Tableau) -> Vec<bool> {
    let mut good = vec![false; tableau.len()];
    for id in (0..tableau.len()).rev() {
        let node = tableau.node(id);
        good[id] = match node.rule {
            None => node.is_consistent(),
            Some(Rule::Mod) => node.is_consistent() && node.children.iter().all(|&c| good[c]),
            Some(Rule::And) | Some(Rule::NegNeg) => good[node.children[0]],
            Some(Rule::NegAnd) => node.children.iter().any(|&c| good[c]),
        };
    }
    good
}

/// A model built from a witness, with the outcome of checking the root
/// formula at the designated state.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub model: Wts,
    pub state: String,
    pub verified: bool,
}

/// Builds a finite model from a success witness: every leaf or modal node
/// visited labels its state with the atoms in Γ, and every child of a modal
/// node becomes a fresh successor reached with the least admissible weight
/// of its lower interval and a weight inside its upper interval.
pub fn extract_model(tableau: &Tableau, witness: &WitnessSubtree) -> Extraction {
    let mut labels: Vec<BTreeSet<String>> = vec![BTreeSet::new()];
    let mut transitions: Vec<(usize, Weight, usize)> = Vec::new();
    let mut stack: Vec<(usize, NodeId)> = vec![(0, Tableau::ROOT)];
    while let Some((state, id)) = stack.pop() {
        let node = tableau.node(id);
        if !node.kind.is_terminal() {
            let child = node
                .children
                .iter()
                .copied()
                .find(|&c| witness.contains(c))
                .expect("witness includes a child of every interior node");
            stack.push((state, child));
            continue;
        }
        for f in &node.gamma {
            if let Formula::Atom(p) = f {
                labels[state].insert(p.clone());
            }
        }
        if node.kind == NodeKind::Modal {
            for &child in &node.children {
                let c = tableau.node(child);
                let (x, y) = transition_weights(&c.lower, &c.upper);
                let fresh = labels.len();
                labels.push(BTreeSet::new());
                transitions.push((state, x, fresh));
                transitions.push((state, y, fresh));
                stack.push((fresh, child));
            }
        }
    }
    let name = |i: usize| format!("s{i}");
    let model = Wts::new(
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| (name(i), l.iter().cloned().collect::<Vec<_>>())),
        transitions
            .into_iter()
            .map(|(f, w, t)| (name(f), w, name(t))),
    )
    .expect("extracted model is well-formed");
    let root = model.state_index("s0").expect("root state");
    let verified = sat_set(&model, &tableau.formula).contains(root);
    Extraction {
        model,
        state: name(0),
        verified,
    }
}

/// The two weights a modal child contributes: the lower interval's left
/// endpoint, and a point of the upper interval not below it.
pub fn transition_weights(lower: &Interval, upper: &Interval) -> (Weight, Weight) {
    let a = lower
        .lower
        .bound
        .finite()
        .expect("modal children have a finite closed lower endpoint")
        .clone();
    let c = upper
        .lower
        .bound
        .finite()
        .expect("finite upper-interval start")
        .clone();
    let candidate = match upper.upper.bound.finite() {
        Some(d) => c.midpoint(d),
        None => c.plus_one(),
    };
    let y = if a >= candidate { a.clone() } else { candidate };
    (a, y)
}

/// Outcome of a satisfiability query.
#[derive(Debug, Clone)]
pub enum Verdict {
    Sat {
        model: Wts,
        state: String,
        verified: bool,
    },
    Unsat,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat { .. })
    }

    /// True for a satisfiable verdict whose extracted model fails the
    /// post-hoc model check.
    pub fn is_extraction_gap(&self) -> bool {
        matches!(
            self,
            Verdict::Sat {
                verified: false,
                ..
            }
        )
    }
}

/// Rule-selection policy for boolean rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOrder {
    /// Leftmost `∧`, then leftmost `¬¬`, then leftmost `¬∧`; branches in
    /// order.
    Canonical,
    /// Uniformly random reducible formula and random branch order.
    Shuffled(u64),
}

/// One child produced by the modal rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalChild {
    pub formula: Formula,
    pub lower: Interval,
    pub upper: Interval,
}

/// Tableau builder with a memo for entailment queries. One engine should be
/// used per top-level query or batch of related queries.
pub struct Engine {
    entailment: HashMap<(Formula, Formula), bool>,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine {
            entailment: HashMap::new(),
        }
    }

    /// `⊨ φ → ψ`, decided by refuting `φ ∧ ¬ψ`.
    pub fn entails(&mut self, phi: &Formula, psi: &Formula) -> bool {
        let key = (phi.clone(), psi.clone());
        if let Some(&known) = self.entailment.get(&key) {
            return known;
        }
        let query = Formula::and(phi.clone(), Formula::not(psi.clone()));
        let tableau = self.build(&query, RuleOrder::Canonical);
        let result = find_witness(&tableau).is_none();
        self.entailment.insert(key, result);
        result
    }

    fn equivalent(&mut self, a: &Formula, b: &Formula) -> bool {
        self.entails(a, b) && self.entails(b, a)
    }

    /// Drops every operand equivalent to an earlier one, then every operand
    /// strictly entailed by another survivor. Input order is kept.
    pub fn minimal_representatives(&mut self, operands: &[Formula]) -> Vec<Formula> {
        let mut distinct: Vec<Formula> = Vec::new();
        for (i, f) in operands.iter().enumerate() {
            let duplicate = (0..i).any(|j| self.equivalent(&operands[j], f));
            if !duplicate {
                distinct.push(f.clone());
            }
        }
        let mut minimal = Vec::new();
        for (i, f) in distinct.iter().enumerate() {
            let dominated = (0..distinct.len()).any(|j| j != i && self.entails(&distinct[j], f));
            if !dominated {
                minimal.push(f.clone());
            }
        }
        minimal
    }

    /// Children of the modal rule for a Γ containing only literals and
    /// (negated) modal formulas.
    pub fn mod_children(&mut self, gamma: &[Formula]) -> Result<Vec<ModalChild>, TableauError> {
        let mut positive: Vec<(bool, &Weight, &Formula)> = Vec::new();
        let mut negative: Vec<(bool, &Weight, &Formula)> = Vec::new();
        for f in gamma {
            match f {
                Formula::L(r, g) => positive.push((true, r, g)),
                Formula::M(r, g) => positive.push((false, r, g)),
                Formula::Not(inner) => match &**inner {
                    Formula::L(r, g) => negative.push((true, r, g)),
                    Formula::M(r, g) => negative.push((false, r, g)),
                    Formula::Top | Formula::Bottom | Formula::Atom(_) => {}
                    _ => return Err(TableauError::BooleanRuleApplicable(f.to_string())),
                },
                Formula::Top | Formula::Bottom | Formula::Atom(_) => {}
                Formula::And(..) => return Err(TableauError::BooleanRuleApplicable(f.to_string())),
            }
        }
        let depth = gamma.iter().map(Formula::modal_depth).max().unwrap_or(0);
        let operands: Vec<Formula> = positive.iter().map(|(_, _, g)| (*g).clone()).collect();
        for g in operands.iter().chain(negative.iter().map(|(_, _, g)| *g)) {
            assert!(
                g.modal_depth() < depth,
                "entailment queries must lower the modal depth"
            );
        }
        let representatives = self.minimal_representatives(&operands);

        let mut children = Vec::with_capacity(representatives.len());
        for psi in representatives {
            let mut l_pos: Vec<&Weight> = Vec::new();
            let mut m_pos: Vec<&Weight> = Vec::new();
            for (is_l, r, g) in &positive {
                if self.entails(&psi, g) {
                    if *is_l {
                        l_pos.push(r)
                    } else {
                        m_pos.push(r)
                    }
                }
            }
            let mut l_neg: Vec<&Weight> = Vec::new();
            let mut m_neg: Vec<&Weight> = Vec::new();
            for (is_l, r, g) in &negative {
                if self.entails(&psi, g) {
                    if *is_l {
                        l_neg.push(r)
                    } else {
                        m_neg.push(r)
                    }
                }
            }
            let zero = || ExtendedBound::Finite(Weight::zero());
            let fin = |w: &Weight| ExtendedBound::Finite(w.clone());
            let lower = Interval::new(
                l_pos.iter().max().map_or_else(zero, |w| fin(w)),
                true,
                l_neg.iter().min().map_or(ExtendedBound::PosInf, |w| fin(w)),
                false,
            );
            let upper = match m_neg.iter().max() {
                Some(w) => Interval::new(
                    fin(w),
                    false,
                    m_pos.iter().min().map_or(ExtendedBound::PosInf, |w| fin(w)),
                    true,
                ),
                None => Interval::new(
                    zero(),
                    true,
                    m_pos.iter().min().map_or(ExtendedBound::PosInf, |w| fin(w)),
                    true,
                ),
            };
            children.push(ModalChild {
                formula: psi,
                lower,
                upper,
            });
        }
        Ok(children)
    }

    /// Builds the complete tableau rooted at `⟨{φ}, [0,0], [0,0]⟩`.
    pub fn build(&mut self, phi: &Formula, order: RuleOrder) -> Tableau {
        let mut rng = match order {
            RuleOrder::Canonical => None,
            RuleOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        let mut tableau = Tableau {
            formula: phi.clone(),
            nodes: Vec::new(),
        };
        let zero = Interval::point(Weight::zero());
        self.expand(
            &mut tableau,
            vec![phi.clone()],
            zero.clone(),
            zero,
            &mut rng,
        );
        tableau
    }

    fn expand(
        &mut self,
        tableau: &mut Tableau,
        gamma: Vec<Formula>,
        lower: Interval,
        upper: Interval,
        rng: &mut Option<ChaCha8Rng>,
    ) -> NodeId {
        let id = tableau.nodes.len();
        tableau.nodes.push(TableauNode {
            gamma: gamma.clone(),
            lower: lower.clone(),
            upper: upper.clone(),
            kind: NodeKind::Interior,
            rule: None,
            children: Vec::new(),
        });

        if let Some((index, rule)) = select_rule(&gamma, rng) {
            let mut branches: Vec<Vec<Formula>> = match (rule, &gamma[index]) {
                (Rule::And, Formula::And(a, b)) => {
                    vec![replace(&gamma, index, &[(**a).clone(), (**b).clone()])]
                }
                (Rule::NegNeg, Formula::Not(inner)) => match &**inner {
                    Formula::Not(g) => vec![replace(&gamma, index, &[(**g).clone()])],
                    _ => unreachable!(),
                },
                (Rule::NegAnd, Formula::Not(inner)) => match &**inner {
                    Formula::And(a, b) => vec![
                        replace(&gamma, index, &[Formula::not((**a).clone())]),
                        replace(&gamma, index, &[Formula::not((**b).clone())]),
                    ],
                    _ => unreachable!(),
                },
                _ => unreachable!("selected rule matches its principal formula"),
            };
            if let Some(rng) = rng.as_mut() {
                branches.shuffle(rng);
            }
            let children = branches
                .into_iter()
                .map(|g| self.expand(tableau, g, lower.clone(), upper.clone(), rng))
                .collect();
            let node = &mut tableau.nodes[id];
            node.rule = Some(rule);
            node.children = children;
            return id;
        }

        let has_modal = gamma.iter().any(|f| match f {
            Formula::Not(inner) => inner.is_modal(),
            other => other.is_modal(),
        });
        if !has_modal {
            tableau.nodes[id].kind = NodeKind::Leaf;
            return id;
        }
        let specs = self
            .mod_children(&gamma)
            .expect("boolean rules are exhausted before the modal rule");
        let children = specs
            .into_iter()
            .map(|c| self.expand(tableau, vec![c.formula], c.lower, c.upper, rng))
            .collect();
        let node = &mut tableau.nodes[id];
        node.kind = NodeKind::Modal;
        node.rule = Some(Rule::Mod);
        node.children = children;
        id
    }

    /// Builds one tableau, searches one witness, and extracts a model.
    pub fn decide(&mut self, phi: &Formula, order: RuleOrder) -> Decision {
        let tableau = self.build(phi, order);
        let witness = find_witness(&tableau);
        let verdict = match &witness {
            Some(w) => {
                let e = extract_model(&tableau, w);
                Verdict::Sat {
                    model: e.model,
                    state: e.state,
                    verified: e.verified,
                }
            }
            None => Verdict::Unsat,
        };
        Decision {
            tableau,
            witness,
            verdict,
        }
    }
}

/// A tableau together with the witness and verdict derived from it.
#[derive(Debug, Clone)]
pub struct Decision {
    pub tableau: Tableau,
    pub witness: Option<WitnessSubtree>,
    pub verdict: Verdict,
}

fn reducible(f: &Formula) -> Option<Rule> {
    match f {
        Formula::And(..) => Some(Rule::And),
        Formula::Not(inner) => match &**inner {
            Formula::Not(_) => Some(Rule::NegNeg),
            Formula::And(..) => Some(Rule::NegAnd),
            _ => None,
        },
        _ => None,
    }
}

fn select_rule(gamma: &[Formula], rng: &mut Option<ChaCha8Rng>) -> Option<(usize, Rule)> {
    let candidates: Vec<(usize, Rule)> = gamma
        .iter()
        .enumerate()
        .filter_map(|(i, f)| reducible(f).map(|r| (i, r)))
        .collect();
    if candidates.is_empty() {
        return None;
    }
    if let Some(rng) = rng.as_mut() {
        return Some(candidates[rng.random_range(0..candidates.len())]);
    }
    [Rule::And, Rule::NegNeg, Rule::NegAnd]
        .into_iter()
        .find_map(|rule| candidates.iter().copied().find(|&(_, r)| r == rule))
}

/// Γ with the formula at `index` replaced in place by `with`; formulas
/// already present are not repeated.
fn replace(gamma: &[Formula], index: usize, with: &[Formula]) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::with_capacity(gamma.len() + with.len());
    for (i, f) in gamma.iter().enumerate() {
        let items: &[Formula] = if i == index {
            with
        } else {
            std::slice::from_ref(f)
        };
        for g in items {
            if !out.contains(g) {
                out.push(g.clone());
            }
        }
    }
    out
}

/// Children of the modal rule, with a fresh entailment memo.
pub fn mod_children(gamma: &[Formula]) -> Result<Vec<ModalChild>, TableauError> {
    Engine::new().mod_children(gamma)
}

pub fn minimal_representatives(operands: &[Formula]) -> Vec<Formula> {
    Engine::new().minimal_representatives(operands)
}

pub fn entails(phi: &Formula, psi: &Formula) -> bool {
    Engine::new().entails(phi, psi)
}

pub fn build_tableau(phi: &Formula) -> Tableau {
    Engine::new().build(phi, RuleOrder::Canonical)
}

pub fn is_satisfiable(phi: &Formula) -> Verdict {
    Engine::new().decide(phi, RuleOrder::Canonical).verdict
}

/// `⊨ φ` iff `¬φ` has no successful tableau.
pub fn is_valid(phi: &Formula) -> bool {
    let tableau = Engine::new().build(&Formula::not(phi.clone()), RuleOrder::Canonical);
    find_witness(&tableau).is_none()
}
