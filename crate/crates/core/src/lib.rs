//! Weighted transition systems and a modal logic whose modalities bound the
//! least and greatest transition weight into a set of states.
//!
//! The crate provides image-set bound queries, a model checker, generalized
//! and classical weighted bisimilarity, an executable soundness check for the
//! axiom system, and a tableau decision procedure that builds finite models
//! for satisfiable formulas.

pub mod axioms;
pub mod bisim;
pub mod check;
pub mod cli;
pub mod formula;
pub mod tableau;
pub mod weight;
pub mod wts;

pub use bisim::{
    are_bisimilar, distinguishing_formula, generalized_bisimilarity, quotient_model,
    weighted_bisimilarity, BisimError, Flavor, Partition,
};
pub use check::{holds_everywhere, model_check, sat_set};
pub use formula::{parse_formula, print_formula, syntactic_measures, Formula, FormulaError};
pub use tableau::{is_satisfiable, is_valid, Verdict};
pub use weight::{ExtendedBound, Weight, WeightError};
pub use wts::{parse_wts, random_wts, serialize_wts, StateSet, Wts, WtsError};
