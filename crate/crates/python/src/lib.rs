//! Python bindings for `apnlab_core`.

use std::collections::BTreeMap;
use std::sync::Arc;

use apnlab_core::catalog;
use apnlab_core::invariants::{build_af, build_graph_element, ideal_dimension as closure_dim, ideal_dimension_oracle};
use apnlab_core::search::{search_binomials, PairSelection, SearchSpace};
use apnlab_core::spectra;
use apnlab_core::{FieldSpec, VectorialFunction};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: apnlab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// GF(2^m) with a fixed reduction polynomial.
#[pyclass(name = "Field", frozen, module = "apnlab")]
struct PyField(Arc<FieldSpec>);

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (m, poly=None))]
    fn new(m: u32, poly: Option<u32>) -> PyResult<Self> {
        Ok(PyField(Arc::new(FieldSpec::new(m, poly).map_err(value_err)?)))
    }

    #[getter]
    fn m(&self) -> u32 {
        self.0.m()
    }

    #[getter]
    fn poly(&self) -> u32 {
        self.0.poly()
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    #[getter]
    fn generator(&self) -> u32 {
        self.0.generator()
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        self.0.check(a).and_then(|_| self.0.check(b)).map_err(value_err)?;
        Ok(self.0.mul(a, b))
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        self.0.check(a).map_err(value_err)?;
        Ok(self.0.inv(a))
    }

    fn pow(&self, a: u32, e: u64) -> PyResult<u32> {
        self.0.check(a).map_err(value_err)?;
        Ok(self.0.pow(a, e))
    }

    fn trace(&self, a: u32) -> PyResult<u32> {
        self.0.check(a).map_err(value_err)?;
        Ok(self.0.trace(a))
    }

    fn element_order(&self, a: u32) -> PyResult<u64> {
        self.0.check(a).map_err(value_err)?;
        self.0.element_order(a).map_err(value_err)
    }

    fn in_subfield(&self, a: u32, k: u32) -> PyResult<bool> {
        self.0.check(a).map_err(value_err)?;
        self.0.in_subfield(a, k).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("Field(m={}, poly={:#x})", self.0.m(), self.0.poly())
    }
}

/// A map GF(2^m) -> GF(2^m), stored as a lookup table.
#[pyclass(name = "Function", frozen, module = "apnlab")]
struct PyFunction(VectorialFunction);

#[pymethods]
impl PyFunction {
    /// Builds `sum c x^e` from `(e, c)` pairs.
    #[staticmethod]
    fn from_polynomial(field: &PyField, terms: Vec<(u64, u32)>) -> PyResult<Self> {
        Ok(PyFunction(VectorialFunction::from_polynomial(&field.0, &terms).map_err(value_err)?))
    }

    #[staticmethod]
    fn power(field: &PyField, d: u64) -> Self {
        PyFunction(VectorialFunction::power(&field.0, d))
    }

    #[staticmethod]
    fn from_lut(field: &PyField, lut: Vec<u32>) -> PyResult<Self> {
        Ok(PyFunction(VectorialFunction::from_lut(&field.0, lut).map_err(value_err)?))
    }

    #[getter]
    fn m(&self) -> u32 {
        self.0.m()
    }

    #[getter]
    fn lut(&self) -> Vec<u32> {
        self.0.lut().to_vec()
    }

    fn __call__(&self, x: u32) -> PyResult<u32> {
        self.0.field().check(x).map_err(value_err)?;
        Ok(self.0.eval(x))
    }

    fn algebraic_degree(&self) -> u32 {
        self.0.algebraic_degree()
    }

    fn is_bijective(&self) -> bool {
        self.0.is_bijective()
    }

    fn is_apn(&self, py: Python<'_>) -> bool {
        py.detach(|| spectra::is_apn(&self.0))
    }

    fn is_ab(&self, py: Python<'_>) -> bool {
        py.detach(|| spectra::is_ab(&self.0))
    }

    fn is_crooked(&self, py: Python<'_>) -> bool {
        py.detach(|| spectra::is_crooked(&self.0))
    }

    /// `(uniformity, {delta: count})` over `(a, b) != (0, 0)`.
    fn differential_spectrum(&self, py: Python<'_>) -> (u32, BTreeMap<u32, u64>) {
        let s = py.detach(|| spectra::differential_spectrum(&self.0));
        (s.uniformity, s.histogram)
    }

    /// `(linearity, {|W|: count})` over all characters.
    fn walsh_spectrum(&self, py: Python<'_>) -> (u64, BTreeMap<u64, u64>) {
        let s = py.detach(|| spectra::walsh_spectrum(&self.0));
        (s.linearity, s.abs_values)
    }

    fn __repr__(&self) -> String {
        match self.0.source() {
            Some(terms) => {
                let t: Vec<String> = terms.iter().map(|(e, c)| format!("{c:#x}*x^{e}")).collect();
                format!("Function(m={}, {})", self.0.m(), t.join(" + "))
            }
            None => format!("Function(m={}, lut)", self.0.m()),
        }
    }
}

/// Dimension of the ideal generated by `A_F` (`target="af"`) or by the graph
/// of `F` (`target="graph"`).
#[pyfunction]
#[pyo3(signature = (f, target="af", oracle=false))]
fn ideal_dimension(py: Python<'_>, f: &PyFunction, target: &str, oracle: bool) -> PyResult<usize> {
    let element = match target {
        "af" => build_af(&f.0).map_err(value_err)?,
        "graph" => build_graph_element(&f.0),
        other => return Err(PyValueError::new_err(format!("unknown target {other:?}"))),
    };
    py.detach(|| if oracle { ideal_dimension_oracle(&element) } else { closure_dim(&element) }).map_err(value_err)
}

/// Known APN power maps for GF(2^m), as dicts.
#[pyfunction]
fn known_apn_functions(py: Python<'_>, m: u32) -> PyResult<Vec<Bound<'_, PyDict>>> {
    catalog::known_apn_functions(m)
        .map_err(value_err)?
        .into_iter()
        .map(|e| {
            let d = PyDict::new(py);
            d.set_item("family", e.family.to_string())?;
            d.set_item("parameter", e.parameter)?;
            d.set_item("value", e.value)?;
            d.set_item("exponent", e.exponent)?;
            d.set_item("condition", e.condition)?;
            Ok(d)
        })
        .collect()
}

/// The coefficients `u` for which `x^3 + u x^36` is APN on `field` (m = 10).
#[pyfunction]
fn theorem1_valid_us(field: &PyField) -> PyResult<Vec<u32>> {
    catalog::theorem1_valid_us(&field.0).map_err(value_err)
}

/// APN binomials `x^d1 + u x^d2`, one dict per orbit.
#[pyfunction]
#[pyo3(signature = (field, d1=None, d2=None, u_range=None))]
fn search<'py>(
    py: Python<'py>,
    field: &PyField,
    d1: Option<u64>,
    d2: Option<u64>,
    u_range: Option<(u32, u32)>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let pairs = match (d1, d2) {
        (Some(a), Some(b)) => PairSelection::Fixed(a, b),
        (None, None) => PairSelection::All,
        _ => return Err(PyValueError::new_err("d1 and d2 go together")),
    };
    let space = SearchSpace { m: field.0.m(), pairs, u_range };
    let hits = py.detach(|| search_binomials(&field.0, &space)).map_err(value_err)?;
    hits.into_iter()
        .map(|h| {
            let d = PyDict::new(py);
            d.set_item("d1", h.d1)?;
            d.set_item("d2", h.d2)?;
            d.set_item("u", h.u)?;
            d.set_item("apn_verified", h.apn_verified)?;
            d.set_item("orbit_size", h.orbit_size)?;
            d.set_item("monomial_like", h.monomial_like)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
mod apnlab {
    #[pymodule_export]
    use super::{ideal_dimension, known_apn_functions, search, theorem1_valid_us, PyField, PyFunction};
}
