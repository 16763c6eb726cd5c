//! The axiom schemes, derived theorems and inference rules of the proof
//! system, instantiated over random formulas and checked on random models.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::check::holds_everywhere;
use crate::formula::{random_formula_with, Formula, RandomFormulaConfig};
use crate::weight::Weight;
use crate::wts::{random_wts_with, serialize_wts, RandomWtsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Schema {
    A1,
    A2,
    A2p,
    A3,
    A3p,
    A4,
    A5,
    A5p,
    A6,
    A7,
    R1,
    R1p,
    R2,
    T1,
    T1p,
    T2,
    T2p,
    T3,
    T4,
    T5,
    /// `L_r φ ∧ L_r ψ → L_r(φ ∧ ψ)`: not sound, kept as a negative control.
    ConjunctionControl,
}

impl Schema {
    pub const ALL: [Schema; 21] = [
        Schema::A1,
        Schema::A2,
        Schema::A2p,
        Schema::A3,
        Schema::A3p,
        Schema::A4,
        Schema::A5,
        Schema::A5p,
        Schema::A6,
        Schema::A7,
        Schema::R1,
        Schema::R1p,
        Schema::R2,
        Schema::T1,
        Schema::T1p,
        Schema::T2,
        Schema::T2p,
        Schema::T3,
        Schema::T4,
        Schema::T5,
        Schema::ConjunctionControl,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Schema::A1 => "A1",
            Schema::A2 => "A2",
            Schema::A2p => "A2'",
            Schema::A3 => "A3",
            Schema::A3p => "A3'",
            Schema::A4 => "A4",
            Schema::A5 => "A5",
            Schema::A5p => "A5'",
            Schema::A6 => "A6",
            Schema::A7 => "A7",
            Schema::R1 => "R1",
            Schema::R1p => "R1'",
            Schema::R2 => "R2",
            Schema::T1 => "T1",
            Schema::T1p => "T1'",
            Schema::T2 => "T2",
            Schema::T2p => "T2'",
            Schema::T3 => "T3",
            Schema::T4 => "T4",
            Schema::T5 => "T5",
            Schema::ConjunctionControl => "NC",
        }
    }

    pub fn is_sound(self) -> bool {
        self != Schema::ConjunctionControl
    }

    /// Rules derive a conclusion from a premise instead of stating a formula.
    pub fn is_rule(self) -> bool {
        matches!(
            self,
            Schema::R1 | Schema::R1p | Schema::R2 | Schema::T2 | Schema::T2p | Schema::T4
        )
    }

    pub fn uses_psi(self) -> bool {
        !matches!(
            self,
            Schema::A1
                | Schema::A2
                | Schema::A2p
                | Schema::A6
                | Schema::A7
                | Schema::T3
                | Schema::T4
        )
    }

    pub fn uses_q(self) -> bool {
        matches!(
            self,
            Schema::A2
                | Schema::A2p
                | Schema::A3
                | Schema::A3p
                | Schema::A6
                | Schema::T1
                | Schema::T1p
        )
    }

    /// Schemes whose second index must be strictly positive.
    pub fn needs_positive_q(self) -> bool {
        matches!(self, Schema::A2 | Schema::A2p | Schema::A6)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Schema {
    type Err = AxiomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Schema::ALL
            .into_iter()
            .find(|schema| schema.id() == s || schema.id().replace('\'', "p") == s)
            .ok_or_else(|| AxiomError::UnknownSchema(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error("{0} requires a strictly positive second index")]
    NonPositiveIndex(Schema),
    #[error("{schema} requires the `{slot}` slot")]
    MissingSlot { schema: Schema, slot: &'static str },
}

/// An instantiated scheme: a formula for axioms and theorems, or a
/// premise/conclusion pair for rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub premise: Option<Formula>,
    pub conclusion: Formula,
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.premise {
            Some(p) => write!(f, "{p} ==> {}", self.conclusion),
            None => write!(f, "{}", self.conclusion),
        }
    }
}

/// Substitutes formulas and indices into a scheme.
pub fn instantiate(
    schema: Schema,
    phi: &Formula,
    psi: Option<&Formula>,
    r: &Weight,
    q: Option<&Weight>,
) -> Result<Instance, AxiomError> {
    let psi = || {
        psi.cloned().ok_or(AxiomError::MissingSlot {
            schema,
            slot: "psi",
        })
    };
    let q = || {
        q.cloned()
            .ok_or(AxiomError::MissingSlot { schema, slot: "q" })
    };
    if schema.needs_positive_q() && q()?.is_zero() {
        return Err(AxiomError::NonPositiveIndex(schema));
    }
    let phi = phi.clone();
    let r = r.clone();
    let l = Formula::lower;
    let m = Formula::upper;
    let zero = Weight::zero;
    let imp = Formula::implies;
    let and = Formula::and;
    let or = Formula::or;
    let not = Formula::not;

    let axiom = |conclusion: Formula| {
        Ok(Instance {
            premise: None,
            conclusion,
        })
    };
    let rule = |premise: Formula, conclusion: Formula| {
        Ok(Instance {
            premise: Some(premise),
            conclusion,
        })
    };

    match schema {
        Schema::A1 => axiom(not(l(zero(), Formula::Bottom))),
        Schema::A2 => axiom(imp(l(r.add(&q()?), phi.clone()), l(r, phi))),
        Schema::A2p => axiom(imp(m(r.clone(), phi.clone()), m(r.add(&q()?), phi))),
        Schema::A3 => {
            let (psi, q) = (psi()?, q()?);
            let lo = r.clone().min(q.clone());
            axiom(imp(
                and(l(r, phi.clone()), l(q, psi.clone())),
                l(lo, or(phi, psi)),
            ))
        }
        Schema::A3p => {
            let (psi, q) = (psi()?, q()?);
            let hi = r.clone().max(q.clone());
            axiom(imp(
                and(m(r, phi.clone()), m(q, psi.clone())),
                m(hi, or(phi, psi)),
            ))
        }
        Schema::A4 => {
            let psi = psi()?;
            axiom(imp(
                l(r.clone(), or(phi.clone(), psi.clone())),
                or(l(r.clone(), phi), l(r, psi)),
            ))
        }
        Schema::A5 => {
            let psi = psi()?;
            axiom(imp(
                not(l(zero(), psi.clone())),
                imp(l(r.clone(), phi.clone()), l(r, or(phi, psi))),
            ))
        }
        Schema::A5p => {
            let psi = psi()?;
            axiom(imp(
                not(l(zero(), psi.clone())),
                imp(m(r.clone(), phi.clone()), m(r, or(phi, psi))),
            ))
        }
        Schema::A6 => axiom(imp(l(r.add(&q()?), phi.clone()), not(m(r, phi)))),
        Schema::A7 => axiom(imp(m(r, phi.clone()), l(zero(), phi))),
        Schema::R1 => {
            let psi = psi()?;
            rule(
                imp(phi.clone(), psi.clone()),
                imp(and(l(r.clone(), psi), l(zero(), phi.clone())), l(r, phi)),
            )
        }
        Schema::R1p => {
            let psi = psi()?;
            rule(
                imp(phi.clone(), psi.clone()),
                imp(and(m(r.clone(), psi), l(zero(), phi.clone())), m(r, phi)),
            )
        }
        Schema::R2 => {
            let psi = psi()?;
            rule(
                imp(phi.clone(), psi.clone()),
                imp(l(zero(), phi), l(zero(), psi)),
            )
        }
        Schema::T1 => {
            let (psi, q) = (psi()?, q()?);
            let hi = r.clone().max(q.clone());
            let both = and(phi.clone(), psi.clone());
            axiom(imp(
                and(and(l(r, phi), l(q, psi)), l(zero(), both.clone())),
                l(hi, both),
            ))
        }
        Schema::T1p => {
            let (psi, q) = (psi()?, q()?);
            let lo = r.clone().min(q.clone());
            let both = and(phi.clone(), psi.clone());
            axiom(imp(
                and(and(m(r, phi), m(q, psi)), l(zero(), both.clone())),
                m(lo, both),
            ))
        }
        Schema::T2 => {
            let psi = psi()?;
            rule(
                Formula::iff(phi.clone(), psi.clone()),
                Formula::iff(l(r.clone(), phi), l(r, psi)),
            )
        }
        Schema::T2p => {
            let psi = psi()?;
            rule(
                Formula::iff(phi.clone(), psi.clone()),
                Formula::iff(m(r.clone(), phi), m(r, psi)),
            )
        }
        Schema::T3 => axiom(not(l(r, Formula::Bottom))),
        Schema::T4 => rule(imp(phi.clone(), Formula::Bottom), not(l(r, phi))),
        Schema::T5 => {
            let psi = psi()?;
            axiom(imp(
                m(r.clone(), or(phi.clone(), psi.clone())),
                or(m(r.clone(), phi), m(r, psi)),
            ))
        }
        Schema::ConjunctionControl => {
            let psi = psi()?;
            axiom(imp(
                and(l(r.clone(), phi.clone()), l(r.clone(), psi.clone())),
                l(r, and(phi, psi)),
            ))
        }
    }
}

/// Sampling parameters for [`run_suite`].
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub models: RandomWtsConfig,
    pub formulas: RandomFormulaConfig,
    pub index_pool: Vec<Weight>,
    pub schemas: Vec<Schema>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let pool = ["0", "1/2", "1", "2", "3"];
        let mut formulas = RandomFormulaConfig::new(&["p", "q"], 2, &pool);
        formulas.max_nesting = 3;
        SuiteConfig {
            models: RandomWtsConfig::default(),
            formulas,
            index_pool: pool.iter().map(|r| r.parse().unwrap()).collect(),
            schemas: Schema::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub trial: u64,
    pub trial_seed: u64,
    pub instance: String,
    pub model: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemaReport {
    pub schema: String,
    pub sound: bool,
    /// Instances checked (for rules: instances whose premise held).
    pub checked: u64,
    /// For rules, instances whose premise failed and were skipped.
    pub premise_failed: u64,
    pub violations: u64,
    pub first_failure: Option<Failure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: u64,
    pub schemas: Vec<SchemaReport>,
}

impl SuiteReport {
    /// Violations of sound schemes only.
    pub fn sound_violations(&self) -> u64 {
        self.schemas
            .iter()
            .filter(|s| s.sound)
            .map(|s| s.violations)
            .sum()
    }

    pub fn report(&self, schema: Schema) -> Option<&SchemaReport> {
        self.schemas.iter().find(|s| s.schema == schema.id())
    }
}

fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Rule premises rarely hold for independent random formulas, so each rule
/// is also checked on a second operand built to satisfy its premise.
fn premise_forcing_psi(schema: Schema, phi: &Formula, psi: &Formula) -> Option<(Formula, Formula)> {
    match schema {
        Schema::R1 | Schema::R1p | Schema::R2 => {
            Some((phi.clone(), Formula::or(phi.clone(), psi.clone())))
        }
        Schema::T2 | Schema::T2p => Some((
            phi.clone(),
            Formula::or(
                Formula::and(phi.clone(), psi.clone()),
                Formula::and(phi.clone(), Formula::not(psi.clone())),
            ),
        )),
        Schema::T4 => Some((
            Formula::and(phi.clone(), Formula::not(phi.clone())),
            psi.clone(),
        )),
        _ => None,
    }
}

/// Checks every selected scheme on `trials` random models and formula
/// instances. Each trial is reproducible from its own seed.
pub fn run_suite(seed: u64, trials: u64, config: &SuiteConfig) -> SuiteReport {
    let mut reports: Vec<SchemaReport> = config
        .schemas
        .iter()
        .map(|s| SchemaReport {
            schema: s.id().to_string(),
            sound: s.is_sound(),
            checked: 0,
            premise_failed: 0,
            violations: 0,
            first_failure: None,
        })
        .collect();
    let positive: Vec<Weight> = config
        .index_pool
        .iter()
        .filter(|w| !w.is_zero())
        .cloned()
        .collect();

    for trial in 0..trials {
        let tseed = trial_seed(seed, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(tseed);
        let model = random_wts_with(&mut rng, &config.models);
        let phi = random_formula_with(&mut rng, &config.formulas);
        let psi = random_formula_with(&mut rng, &config.formulas);
        let r = config.index_pool[rng.random_range(0..config.index_pool.len())].clone();
        let q_any = config.index_pool[rng.random_range(0..config.index_pool.len())].clone();
        let q_pos = if positive.is_empty() {
            Weight::from_integer(1)
        } else {
            positive[rng.random_range(0..positive.len())].clone()
        };

        for (schema, report) in config.schemas.iter().zip(reports.iter_mut()) {
            let q = if schema.needs_positive_q() {
                &q_pos
            } else {
                &q_any
            };
            let mut pairs = vec![(phi.clone(), psi.clone())];
            pairs.extend(premise_forcing_psi(*schema, &phi, &psi));
            for (a, b) in pairs {
                let instance = instantiate(*schema, &a, Some(&b), &r, Some(q))
                    .expect("slots and side conditions met");
                if let Some(premise) = &instance.premise {
                    if !holds_everywhere(&model, premise) {
                        report.premise_failed += 1;
                        continue;
                    }
                }
                report.checked += 1;
                if !holds_everywhere(&model, &instance.conclusion) {
                    report.violations += 1;
                    if report.first_failure.is_none() {
                        report.first_failure = Some(Failure {
                            trial,
                            trial_seed: tseed,
                            instance: instance.to_string(),
                            model: String::from_utf8(serialize_wts(&model)).expect("utf-8"),
                        });
                    }
                }
            }
        }
    }
    SuiteReport {
        seed,
        trials,
        schemas: reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn w(s: &str) -> Weight {
        s.parse().unwrap()
    }

    #[test]
    fn a6_instance() {
        let i = instantiate(Schema::A6, &f("p"), None, &w("2"), Some(&w("1"))).unwrap();
        assert_eq!(i.premise, None);
        assert_eq!(i.conclusion, f("L[3] p -> !M[2] p"));
    }

    #[test]
    fn a1_instance() {
        let i = instantiate(Schema::A1, &f("p"), None, &w("0"), None).unwrap();
        assert_eq!(i.conclusion, f("!L[0] false"));
    }

    #[test]
    fn a3_instance() {
        let i = instantiate(Schema::A3, &f("p"), Some(&f("q")), &w("2"), Some(&w("5"))).unwrap();
        assert_eq!(i.conclusion, f("L[2] p & L[5] q -> L[2] (p | q)"));
    }

    #[test]
    fn side_conditions() {
        assert_eq!(
            instantiate(Schema::A2, &f("p"), None, &w("1"), Some(&w("0"))),
            Err(AxiomError::NonPositiveIndex(Schema::A2))
        );
        assert!(matches!(
            instantiate(Schema::A3, &f("p"), None, &w("1"), Some(&w("1"))),
            Err(AxiomError::MissingSlot { slot: "psi", .. })
        ));
        assert!(matches!(
            instantiate(Schema::A6, &f("p"), None, &w("1"), None),
            Err(AxiomError::MissingSlot { slot: "q", .. })
        ));
    }

    #[test]
    fn schema_names_parse() {
        for s in Schema::ALL {
            assert_eq!(s.id().parse::<Schema>().unwrap(), s);
        }
        assert_eq!("A2p".parse::<Schema>().unwrap(), Schema::A2p);
        assert!("A9".parse::<Schema>().is_err());
    }

    #[test]
    fn single_trial_is_reproducible() {
        let cfg = SuiteConfig::default();
        let a = run_suite(5, 1, &cfg);
        let b = run_suite(5, 1, &cfg);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
