//! Python bindings: load machines, convert them to normal form, and compute
//! stringsums and runsums.

use pyo3::exceptions::{PyArithmeticError, PyNotImplementedError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wpda::oracle::{self as oracle_mod, EnumerationBudget};
use wpda::runsum::SolverOptions;
use wpda::stringsum::{self, Algorithm};
use wpda::transform::{Mode, Pass};
use wpda::{Error, Semiring, SemiringKind};

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Io(_) => PyOSError::new_err(msg),
        Error::Divergence { .. } | Error::StarUndefined { .. } | Error::MatrixStarUndefined { .. } => {
            PyArithmeticError::new_err(msg)
        }
        Error::Capability { .. } => PyNotImplementedError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn semiring(name: Option<&str>) -> PyResult<Option<Semiring>> {
    name.map(|n| n.parse::<SemiringKind>().map(Semiring::new).map_err(to_py)).transpose()
}

/// A weighted pushdown automaton.
#[pyclass(name = "Wpda", module = "pywpda", frozen)]
struct PyWpda {
    inner: wpda::Wpda,
}

#[pymethods]
impl PyWpda {
    /// Parses a machine from its JSON text, optionally overriding the semiring.
    #[staticmethod]
    #[pyo3(signature = (text, semiring=None))]
    fn from_json(text: &str, semiring: Option<&str>) -> PyResult<Self> {
        let (inner, _) = wpda::Wpda::load_str(text, self::semiring(semiring)?).map_err(to_py)?;
        Ok(PyWpda { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, semiring=None))]
    fn load(path: &str, semiring: Option<&str>) -> PyResult<Self> {
        let (inner, _) = wpda::Wpda::load(path, self::semiring(semiring)?).map_err(to_py)?;
        Ok(PyWpda { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn semiring(&self) -> &'static str {
        self.inner.semiring().kind().name()
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn num_symbols(&self) -> usize {
        self.inner.num_symbols()
    }

    #[getter]
    fn num_transitions(&self) -> usize {
        self.inner.transitions().len()
    }

    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.classify();
        let d = PyDict::new(py);
        d.set_item("is_bottom_up", r.is_bottom_up)?;
        d.set_item("is_top_down", r.is_top_down)?;
        d.set_item("is_simple", r.is_simple)?;
        d.set_item("is_normal_form_bu", r.is_normal_form_bu)?;
        d.set_item("is_normal_form_td", r.is_normal_form_td)?;
        d.set_item("max_pop", r.max_pop)?;
        d.set_item("max_push", r.max_push)?;
        Ok(d)
    }

    /// `mode` is "bottom-up" or "top-down".
    #[pyo3(signature = (mode="bottom-up"))]
    fn normal_form(&self, mode: &str) -> PyResult<Self> {
        let mode: Mode = mode.parse().map_err(to_py)?;
        let inner = wpda::transform::normal_form(&self.inner, mode).map_err(to_py)?;
        Ok(PyWpda { inner })
    }

    /// Applies one named pass such as "binarize" or "remove-nullary".
    fn transform(&self, pass: &str) -> PyResult<Self> {
        let pass: Pass = pass.parse().map_err(to_py)?;
        Ok(PyWpda { inner: pass.apply(&self.inner).map_err(to_py)? })
    }

    #[pyo3(signature = (string, algo="bu-fast"))]
    fn stringsum(&self, py: Python<'_>, string: &str, algo: &str) -> PyResult<f64> {
        let algo: Algorithm = algo.parse().map_err(to_py)?;
        let y = self.inner.encode(string).map_err(to_py)?;
        py.detach(|| stringsum::stringsum(&self.inner, &y, algo)).map_err(to_py)
    }

    #[pyo3(signature = (max_iters=10_000, tol=1e-12, jacobi=false))]
    fn runsum(&self, py: Python<'_>, max_iters: usize, tol: f64, jacobi: bool) -> PyResult<f64> {
        let opts = SolverOptions { max_iters, tol, jacobi };
        py.detach(|| wpda::runsum::runsum(&self.inner, &opts)).map_err(to_py)
    }

    /// Brute-force stringsum. Returns `(value, complete)`; `complete` is
    /// false when the budget cut some runs off.
    #[pyo3(signature = (string, max_transitions=None, max_stack_depth=None))]
    fn oracle(
        &self,
        string: &str,
        max_transitions: Option<usize>,
        max_stack_depth: Option<usize>,
    ) -> PyResult<(f64, bool)> {
        let y = self.inner.encode(string).map_err(to_py)?;
        let d = EnumerationBudget::for_length(y.len());
        let budget = EnumerationBudget::new(
            max_transitions.unwrap_or(d.max_transitions).max(1),
            max_stack_depth.unwrap_or(d.max_stack_depth).max(1),
        );
        let v = oracle_mod::stringsum_oracle(&self.inner, &y, budget);
        Ok((v.value, v.complete))
    }

    fn __repr__(&self) -> String {
        format!(
            "Wpda(semiring={}, states={}, transitions={})",
            self.semiring(),
            self.inner.num_states(),
            self.inner.transitions().len()
        )
    }
}

/// The `aⁿbⁿ` example machine in bottom-up normal form.
#[pyfunction]
#[pyo3(signature = (semiring="real"))]
fn p1(semiring: &str) -> PyResult<PyWpda> {
    let sr = self::semiring(Some(semiring))?.expect("name given");
    Ok(PyWpda { inner: oracle_mod::p1(sr) })
}

/// Balanced brackets over "(" and ")".
#[pyfunction]
#[pyo3(signature = (semiring="real"))]
fn dyck1(semiring: &str) -> PyResult<PyWpda> {
    let sr = self::semiring(Some(semiring))?.expect("name given");
    Ok(PyWpda { inner: oracle_mod::dyck1(sr) })
}

#[pymodule]
fn pywpda(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWpda>()?;
    m.add_function(wrap_pyfunction!(p1, m)?)?;
    m.add_function(wrap_pyfunction!(dyck1, m)?)?;
    Ok(())
}
