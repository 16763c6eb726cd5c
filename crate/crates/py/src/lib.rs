use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use wtl_core::axioms::{run_suite, Schema, SuiteConfig};
use wtl_core::tableau;
use wtl_core::{
    are_bisimilar, distinguishing_formula, parse_formula, parse_wts, quotient_model, serialize_wts,
    Flavor, Formula as CoreFormula, Verdict, Wts,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn flavor(weighted: bool) -> Flavor {
    if weighted {
        Flavor::Weighted
    } else {
        Flavor::Generalized
    }
}

/// A weighted transition system.
#[pyclass(name = "Model", module = "pywtl", frozen, from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: Wts,
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        parse_wts(json.as_bytes())
            .map(|inner| PyModel { inner })
            .map_err(value_error)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let bytes = std::fs::read(path).map_err(value_error)?;
        parse_wts(&bytes)
            .map(|inner| PyModel { inner })
            .map_err(value_error)
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.states().to_vec()
    }

    #[getter]
    fn num_transitions(&self) -> usize {
        self.inner.num_transitions()
    }

    fn to_json(&self) -> String {
        String::from_utf8(serialize_wts(&self.inner)).expect("serializer emits UTF-8")
    }

    /// Smallest weight from `source` into `targets`; None when there is none.
    fn theta_min(&self, source: &str, targets: Vec<String>) -> PyResult<Option<String>> {
        let names: Vec<&str> = targets.iter().map(String::as_str).collect();
        let b = self
            .inner
            .theta_min_named(source, &names)
            .map_err(value_error)?;
        Ok(b.finite().map(ToString::to_string))
    }

    fn theta_max(&self, source: &str, targets: Vec<String>) -> PyResult<Option<String>> {
        let names: Vec<&str> = targets.iter().map(String::as_str).collect();
        let b = self
            .inner
            .theta_max_named(source, &names)
            .map_err(value_error)?;
        Ok(b.finite().map(ToString::to_string))
    }

    fn check(&self, state: &str, formula: FormulaArg) -> PyResult<bool> {
        let f = formula.into_formula()?;
        wtl_core::model_check(&self.inner, state, &f).map_err(value_error)
    }

    #[pyo3(signature = (weighted = false))]
    fn bisimulation_classes(&self, weighted: bool) -> PyResult<Vec<Vec<String>>> {
        let p = wtl_core::bisim::bisimilarity(&self.inner, flavor(weighted));
        Ok(p.to_names(&self.inner))
    }

    #[pyo3(signature = (s, t, weighted = false))]
    fn bisimilar(&self, s: &str, t: &str, weighted: bool) -> PyResult<bool> {
        are_bisimilar(&self.inner, s, t, flavor(weighted)).map_err(value_error)
    }

    fn distinguish(&self, s: &str, t: &str) -> PyResult<Option<PyFormula>> {
        let f = distinguishing_formula(&self.inner, s, t).map_err(value_error)?;
        Ok(f.map(|inner| PyFormula { inner }))
    }

    fn quotient(&self) -> PyResult<PyModel> {
        let p = wtl_core::generalized_bisimilarity(&self.inner);
        quotient_model(&self.inner, &p)
            .map(|inner| PyModel { inner })
            .map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(states={}, transitions={})",
            self.inner.num_states(),
            self.inner.num_transitions()
        )
    }
}

/// A formula of the logic.
#[pyclass(name = "Formula", module = "pywtl", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyFormula {
    inner: CoreFormula,
}

#[pymethods]
impl PyFormula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_formula(text)
            .map(|inner| PyFormula { inner })
            .map_err(value_error)
    }

    #[getter]
    fn modal_depth(&self) -> usize {
        self.inner.modal_depth()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.inner.to_string())
    }
}

#[derive(FromPyObject)]
enum FormulaArg {
    Formula(PyFormula),
    Text(String),
}

impl FormulaArg {
    fn into_formula(self) -> PyResult<CoreFormula> {
        match self {
            FormulaArg::Formula(f) => Ok(f.inner),
            FormulaArg::Text(s) => parse_formula(&s).map_err(value_error),
        }
    }
}

/// Result of a satisfiability query.
#[pyclass(name = "SatResult", module = "pywtl", frozen)]
struct PySatResult {
    #[pyo3(get)]
    satisfiable: bool,
    #[pyo3(get)]
    verified: bool,
    #[pyo3(get)]
    state: Option<String>,
    model: Option<Wts>,
}

#[pymethods]
impl PySatResult {
    #[getter]
    fn model(&self) -> Option<PyModel> {
        self.model.clone().map(|inner| PyModel { inner })
    }

    fn __bool__(&self) -> bool {
        self.satisfiable
    }

    fn __repr__(&self) -> String {
        format!(
            "SatResult(satisfiable={}, verified={})",
            self.satisfiable, self.verified
        )
    }
}

#[pyfunction]
fn parse(text: &str) -> PyResult<PyFormula> {
    PyFormula::new(text)
}

#[pyfunction]
fn is_satisfiable(formula: FormulaArg) -> PyResult<PySatResult> {
    let f = formula.into_formula()?;
    Ok(match tableau::is_satisfiable(&f) {
        Verdict::Sat {
            model,
            state,
            verified,
        } => PySatResult {
            satisfiable: true,
            verified,
            state: Some(state),
            model: Some(model),
        },
        Verdict::Unsat => PySatResult {
            satisfiable: false,
            verified: true,
            state: None,
            model: None,
        },
    })
}

#[pyfunction]
fn is_valid(formula: FormulaArg) -> PyResult<bool> {
    Ok(tableau::is_valid(&formula.into_formula()?))
}

#[pyfunction]
fn entails(phi: FormulaArg, psi: FormulaArg) -> PyResult<bool> {
    Ok(tableau::entails(&phi.into_formula()?, &psi.into_formula()?))
}

/// Runs the axiom soundness suite and returns its report as JSON text.
#[pyfunction]
#[pyo3(signature = (seed, trials, schemas = None))]
fn run_axioms(
    py: Python<'_>,
    seed: u64,
    trials: u64,
    schemas: Option<Vec<String>>,
) -> PyResult<String> {
    let mut config = SuiteConfig::default();
    if let Some(ids) = schemas {
        config.schemas = ids
            .iter()
            .map(|s| s.parse::<Schema>())
            .collect::<Result<_, _>>()
            .map_err(value_error)?;
    }
    let report = py.detach(|| run_suite(seed, trials, &config));
    serde_json::to_string(&report).map_err(value_error)
}

#[pymodule]
fn pywtl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyFormula>()?;
    m.add_class::<PySatResult>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(is_satisfiable, m)?)?;
    m.add_function(wrap_pyfunction!(is_valid, m)?)?;
    m.add_function(wrap_pyfunction!(entails, m)?)?;
    m.add_function(wrap_pyfunction!(run_axioms, m)?)?;
    Ok(())
}
