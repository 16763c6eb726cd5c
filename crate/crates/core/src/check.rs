//! Satisfaction semantics: bottom-up computation of satisfaction sets.

use crate::formula::Formula;
use crate::weight::ExtendedBound;
use crate::wts::{StateSet, Wts, WtsError};

/// ⟦φ⟧: the states of `model` satisfying `f`. Atoms absent from the labels
/// are false everywhere.
pub fn sat_set(model: &Wts, f: &Formula) -> StateSet {
    let n = model.num_states();
    match f {
        Formula::Top => StateSet::full(n),
        Formula::Bottom => StateSet::empty(n),
        Formula::Atom(p) => StateSet::from_indices(n, (0..n).filter(|&s| model.has_label(s, p))),
        Formula::Not(g) => sat_set(model, g).complement(),
        Formula::And(a, b) => sat_set(model, a).intersection(&sat_set(model, b)),
        Formula::L(r, g) => {
            let target = sat_set(model, g);
            let bound = ExtendedBound::Finite(r.clone());
            StateSet::from_indices(n, (0..n).filter(|&s| model.theta_min(s, &target) >= bound))
        }
        Formula::M(r, g) => {
            let target = sat_set(model, g);
            let bound = ExtendedBound::Finite(r.clone());
            StateSet::from_indices(n, (0..n).filter(|&s| model.theta_max(s, &target) <= bound))
        }
    }
}

/// `M, s ⊨ φ` for a state given by name.
pub fn model_check(model: &Wts, state: &str, f: &Formula) -> Result<bool, WtsError> {
    let s = model.state_index(state)?;
    Ok(sat_set(model, f).contains(s))
}

/// True iff `f` holds at every state of `model`.
pub fn holds_everywhere(model: &Wts, f: &Formula) -> bool {
    sat_set(model, f).is_full()
}
