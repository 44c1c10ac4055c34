//! Python bindings: symmetric matrices, the scalar/cone difference
//! operators, the inequality margin evaluators and the campaign harness.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use hlawka_core::cone::{
    bernstein_pq_values, cone_iterated_difference_margin, double_divided_difference,
    resolve_multi, sz_alternating_sum_margin, ConePoint,
};
use hlawka_core::harness::{
    builtin_counterexamples, lookup, replay_witness, run_campaign, search_counterexample,
    Distribution, SearchConfig, REGISTRY,
};
use hlawka_core::inequalities as ineq;
use hlawka_core::matrix::{self, CharacterSpec};
use hlawka_core::scalar::{self, resolve_function, ProbeConfig};
use hlawka_core::tol::TolerancePolicy;

fn err(e: hlawka_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A real symmetric matrix; entries are symmetrized on construction.
#[pyclass(name = "SymMatrix", from_py_object)]
#[derive(Clone)]
struct PySymMatrix {
    inner: matrix::SymMatrix,
}

#[pymethods]
impl PySymMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: matrix::SymMatrix::from_rows(&rows).map_err(err)? })
    }

    #[staticmethod]
    fn identity(dim: usize) -> Self {
        Self { inner: matrix::SymMatrix::identity(dim) }
    }

    #[staticmethod]
    fn diagonal(entries: Vec<f64>) -> Self {
        Self { inner: matrix::SymMatrix::diagonal(&entries) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn det(&self) -> f64 {
        self.inner.det()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        self.inner.eigenvalues().map_err(err)
    }

    fn esym(&self, k: usize) -> PyResult<f64> {
        matrix::esym(&self.inner, k).map_err(err)
    }

    fn permanent(&self) -> PyResult<f64> {
        matrix::permanent(&self.inner).map_err(err)
    }

    fn immanant(&self, character: &str) -> PyResult<f64> {
        matrix::immanant(&self.inner, &parse_character(character)?).map_err(err)
    }

    fn add(&self, other: &PySymMatrix) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn scale(&self, c: f64) -> Self {
        Self { inner: self.inner.scale(c) }
    }

    fn kron(&self, other: &PySymMatrix) -> Self {
        Self { inner: self.inner.kron(&other.inner) }
    }

    fn __repr__(&self) -> String {
        format!("SymMatrix(dim={}, rows={:?})", self.inner.dim(), self.inner.rows())
    }
}

fn parse_character(s: &str) -> PyResult<CharacterSpec> {
    match s {
        "sign" => Ok(CharacterSpec::Sign),
        "trivial" => Ok(CharacterSpec::Trivial),
        other => Err(PyValueError::new_err(format!(
            "unknown character '{other}' (use sign or trivial)"
        ))),
    }
}

fn margin_dict<'py>(py: Python<'py>, m: hlawka_core::Margin) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", m.value)?;
    d.set_item("scale", m.scale)?;
    d.set_item("passed", m.passes(TolerancePolicy::default()))?;
    Ok(d)
}

// scalar catalog operations

#[pyfunction]
#[pyo3(signature = (function, x, alpha = 1.0))]
fn eval_function(function: &str, x: f64, alpha: f64) -> PyResult<f64> {
    let f = resolve_function(function, alpha).map_err(err)?;
    scalar::eval_function(&f, x).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (function, points, alpha = 1.0))]
fn divided_difference(function: &str, points: Vec<f64>, alpha: f64) -> PyResult<f64> {
    let f = resolve_function(function, alpha).map_err(err)?;
    scalar::divided_difference(&f, &points).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (function, base, steps, alpha = 1.0))]
fn iterated_difference(function: &str, base: f64, steps: Vec<f64>, alpha: f64) -> PyResult<f64> {
    let f = resolve_function(function, alpha).map_err(err)?;
    scalar::iterated_difference(&f, base, &steps).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (function, degree, x, alpha = 1.0))]
fn bernstein_poly(function: &str, degree: usize, x: f64, alpha: f64) -> PyResult<f64> {
    let f = resolve_function(function, alpha).map_err(err)?;
    scalar::bernstein_poly(&f, degree, x).map_err(err)
}

fn verdict_dict<'py>(py: Python<'py>, v: scalar::Verdict) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("min_margin", v.min_margin)?;
    d.set_item("scale", v.scale)?;
    d.set_item("witness", v.witness)?;
    d.set_item("passed", v.passed)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (function, lo, hi, order, grid = 16, seed = 0, alpha = 1.0))]
#[allow(clippy::too_many_arguments)]
fn n_convexity_probe<'py>(
    py: Python<'py>,
    function: &str,
    lo: f64,
    hi: f64,
    order: usize,
    grid: usize,
    seed: u64,
    alpha: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let f = resolve_function(function, alpha).map_err(err)?;
    let cfg = ProbeConfig { grid, seed, ..ProbeConfig::default() };
    let v = scalar::n_convexity_probe(&f, lo, hi, order, &cfg).map_err(err)?;
    verdict_dict(py, v)
}

#[pyfunction]
#[pyo3(signature = (function, lo, hi, order, grid = 16, seed = 0, alpha = 1.0))]
#[allow(clippy::too_many_arguments)]
fn positive_difference_probe<'py>(
    py: Python<'py>,
    function: &str,
    lo: f64,
    hi: f64,
    order: usize,
    grid: usize,
    seed: u64,
    alpha: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let f = resolve_function(function, alpha).map_err(err)?;
    let cfg = ProbeConfig { grid, seed, ..ProbeConfig::default() };
    let v = scalar::positive_difference_probe(&f, lo, hi, order, &cfg).map_err(err)?;
    verdict_dict(py, v)
}

// cone operations

#[pyfunction]
#[pyo3(signature = (function, base, steps, alpha = 1.0))]
fn cone_iterated_difference(
    function: &str,
    base: Vec<f64>,
    steps: Vec<Vec<f64>>,
    alpha: f64,
) -> PyResult<f64> {
    let dim = base.len();
    let f = resolve_multi(function, alpha, dim).map_err(err)?;
    let base = ConePoint::new(base).map_err(err)?;
    let steps: Result<Vec<ConePoint>, _> = steps.into_iter().map(ConePoint::new).collect();
    cone_iterated_difference_margin(&f, &base, &steps.map_err(err)?)
        .map(|m| m.value)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (function, points, alpha = 1.0))]
fn sz_alternating_sum(function: &str, points: Vec<Vec<f64>>, alpha: f64) -> PyResult<f64> {
    let dim = points.first().map(|p| p.len()).unwrap_or(1);
    let f = resolve_multi(function, alpha, dim).map_err(err)?;
    let pts: Result<Vec<ConePoint>, _> = points.into_iter().map(ConePoint::new).collect();
    sz_alternating_sum_margin(&f, &pts.map_err(err)?)
        .map(|m| m.value)
        .map_err(err)
}

#[pyfunction]
fn bernstein_pq(alphas: Vec<f64>) -> PyResult<(f64, f64)> {
    bernstein_pq_values(&alphas).map_err(err)
}

#[pyfunction]
fn double_divided_diff(xs: Vec<f64>, ys: Vec<f64>, f: Bound<'_, PyAny>) -> PyResult<f64> {
    let call = |x: f64, y: f64| -> f64 {
        f.call1((x, y))
            .and_then(|v| v.extract::<f64>())
            .unwrap_or(f64::NAN)
    };
    let v = double_divided_difference(&xs, &ys, &call).map_err(err)?;
    if v.is_nan() {
        return Err(PyValueError::new_err("callback failed or returned NaN"));
    }
    Ok(v)
}

// matrix operations and inequality margins

#[pyfunction]
fn loewner_margin<'py>(
    py: Python<'py>,
    a: &PySymMatrix,
    b: &PySymMatrix,
) -> PyResult<Bound<'py, PyDict>> {
    margin_dict(py, matrix::loewner_margin(&a.inner, &b.inner).map_err(err)?)
}

#[pyfunction]
fn tensor_power(a: &PySymMatrix, p: usize) -> PyResult<PySymMatrix> {
    Ok(PySymMatrix { inner: matrix::tensor_power(&a.inner, p).map_err(err)? })
}

#[pyfunction]
fn compound_matrix(a: &PySymMatrix, k: usize) -> PyResult<PySymMatrix> {
    Ok(PySymMatrix { inner: matrix::compound_matrix(&a.inner, k).map_err(err)? })
}

#[pyfunction]
fn mixed_tensor(x: &PySymMatrix, k: usize, v: &PySymMatrix, l: usize) -> PyResult<PySymMatrix> {
    Ok(PySymMatrix { inner: matrix::mixed_tensor(&x.inner, k, &v.inner, l).map_err(err)? })
}

#[pyfunction]
fn det_alternating_difference<'py>(
    py: Python<'py>,
    steps: Vec<PySymMatrix>,
    x: &PySymMatrix,
) -> PyResult<Bound<'py, PyDict>> {
    let steps: Vec<matrix::SymMatrix> = steps.into_iter().map(|m| m.inner).collect();
    margin_dict(py, ineq::det_alternating_difference(&steps, &x.inner).map_err(err)?)
}

#[pyfunction]
fn det_hlawka<'py>(
    py: Python<'py>,
    a: &PySymMatrix,
    b: &PySymMatrix,
    c: &PySymMatrix,
    x: &PySymMatrix,
) -> PyResult<Bound<'py, PyDict>> {
    margin_dict(
        py,
        ineq::det_hlawka_with_base_margin(&a.inner, &b.inner, &c.inner, &x.inner).map_err(err)?,
    )
}

#[pyfunction]
fn esym_hlawka<'py>(
    py: Python<'py>,
    a: &PySymMatrix,
    b: &PySymMatrix,
    c: &PySymMatrix,
    k: usize,
) -> PyResult<Bound<'py, PyDict>> {
    margin_dict(py, ineq::esym_hlawka_margin(&a.inner, &b.inner, &c.inner, k).map_err(err)?)
}

#[pyfunction]
fn immanant_hh<'py>(
    py: Python<'py>,
    a: &PySymMatrix,
    b: &PySymMatrix,
    c: &PySymMatrix,
    x: &PySymMatrix,
    character: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let chi = parse_character(character)?;
    margin_dict(
        py,
        ineq::immanant_hh_margin(&a.inner, &b.inner, &c.inner, &x.inner, &chi).map_err(err)?,
    )
}

#[pyfunction]
fn operator_hh<'py>(
    py: Python<'py>,
    a: &PySymMatrix,
    b: &PySymMatrix,
    c: &PySymMatrix,
    x: &PySymMatrix,
    p: usize,
) -> PyResult<Bound<'py, PyDict>> {
    margin_dict(
        py,
        ineq::operator_hh_margin(&a.inner, &b.inner, &c.inner, &x.inner, p).map_err(err)?,
    )
}

#[pyfunction]
fn lemma_main<'py>(
    py: Python<'py>,
    x: &PySymMatrix,
    y: &PySymMatrix,
    z: &PySymMatrix,
    v: &PySymMatrix,
    k: usize,
    l: usize,
) -> PyResult<Bound<'py, PyDict>> {
    margin_dict(
        py,
        ineq::lemma_main_margin(&x.inner, &y.inner, &z.inner, &v.inner, k, l).map_err(err)?,
    )
}

#[pyfunction]
fn generalized_sk<'py>(
    py: Python<'py>,
    terms: Vec<PySymMatrix>,
    x: &PySymMatrix,
    p: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let terms: Vec<matrix::SymMatrix> = terms.into_iter().map(|m| m.inner).collect();
    margin_dict(py, ineq::generalized_sk_margin(&terms, &x.inner, p).map_err(err)?)
}

#[pyfunction]
fn serre_reverse<'py>(
    py: Python<'py>,
    a: &PySymMatrix,
    b: &PySymMatrix,
    c: &PySymMatrix,
) -> PyResult<Bound<'py, PyDict>> {
    margin_dict(py, ineq::serre_reverse_margin(&a.inner, &b.inner, &c.inner).map_err(err)?)
}

#[pyfunction]
fn minkowski_like<'py>(
    py: Python<'py>,
    a: &PySymMatrix,
    b: &PySymMatrix,
    c: &PySymMatrix,
) -> PyResult<Bound<'py, PyDict>> {
    margin_dict(py, ineq::minkowski_like_margin(&a.inner, &b.inner, &c.inner).map_err(err)?)
}

#[pyfunction]
fn detrho_alternating<'py>(
    py: Python<'py>,
    terms: Vec<PySymMatrix>,
    rho: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let terms: Vec<matrix::SymMatrix> = terms.into_iter().map(|m| m.inner).collect();
    margin_dict(py, ineq::detrho_alternating_sum(&terms, rho).map_err(err)?)
}

#[pyfunction]
fn derivative_formula_check(z: &PySymMatrix, v: &PySymMatrix, p: usize, h: f64) -> PyResult<f64> {
    ineq::derivative_formula_check(&z.inner, &v.inner, p, h).map_err(err)
}

// campaign harness

fn config_from_kwargs(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<SearchConfig> {
    let mut cfg = SearchConfig::default();
    let Some(kw) = kwargs else { return Ok(cfg) };
    for (key, value) in kw.iter() {
        let key: String = key.extract()?;
        match key.as_str() {
            "seed" => cfg.seed = value.extract()?,
            "trials" => cfg.trials = value.extract()?,
            "dim" => cfg.dim = value.extract()?,
            "order" => cfg.order = value.extract()?,
            "power" | "p" => cfg.power = value.extract()?,
            "rho" => cfg.rho = value.extract()?,
            "alpha" => cfg.alpha = value.extract()?,
            "function" => cfg.function = Some(value.extract()?),
            "tol" => cfg.tol = TolerancePolicy::new(value.extract()?),
            "cond_cap" => cfg.cond_cap = value.extract()?,
            "distribution" => {
                let s: String = value.extract()?;
                cfg.distribution = Distribution::parse(&s).map_err(err)?;
            }
            other => return Err(PyValueError::new_err(format!("unknown config key '{other}'"))),
        }
    }
    Ok(cfg)
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        serde_json::Value::Null => py.None().into_bound(py),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.into_any()
        }
    })
}

/// List the registered inequality identifiers with their statements.
#[pyfunction]
fn list_inequalities<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
    let list = PyList::empty(py);
    for info in REGISTRY {
        let d = PyDict::new(py);
        d.set_item("id", info.id)?;
        d.set_item("statement", info.statement)?;
        d.set_item("loewner", info.loewner)?;
        list.append(d)?;
    }
    Ok(list)
}

/// Run a verification campaign; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (id, **kwargs))]
fn campaign<'py>(
    py: Python<'py>,
    id: &str,
    kwargs: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config_from_kwargs(kwargs)?;
    let report = run_campaign(id, &cfg).map_err(err)?;
    // the stored witness must reproduce the reported margin
    let replayed = replay_witness(&report).map_err(err)?;
    debug_assert_eq!(replayed.value, report.witness.margin);
    let value = serde_json::to_value(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

/// Search for a violation; returns the witness dict or None.
#[pyfunction]
#[pyo3(signature = (id, **kwargs))]
fn search<'py>(
    py: Python<'py>,
    id: &str,
    kwargs: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config_from_kwargs(kwargs)?;
    match search_counterexample(id, &cfg).map_err(err)? {
        Some(w) => {
            let value =
                serde_json::to_value(&w).map_err(|e| PyValueError::new_err(e.to_string()))?;
            json_to_py(py, &value)
        }
        None => Ok(py.None().into_bound(py)),
    }
}

/// The built-in known violations with canonical witnesses.
#[pyfunction]
fn demo_counterexamples<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
    let list = PyList::empty(py);
    for (id, inputs, margin) in builtin_counterexamples() {
        let d = PyDict::new(py);
        d.set_item("id", &id)?;
        d.set_item("statement", lookup(&id).map_err(err)?.statement)?;
        d.set_item("margin", margin.value)?;
        d.set_item("scale", margin.scale)?;
        let value =
            serde_json::to_value(&inputs).map_err(|e| PyValueError::new_err(e.to_string()))?;
        d.set_item("inputs", json_to_py(py, &value)?)?;
        list.append(d)?;
    }
    Ok(list)
}

#[pymodule]
fn hlawka(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymMatrix>()?;
    m.add_function(wrap_pyfunction!(eval_function, m)?)?;
    m.add_function(wrap_pyfunction!(divided_difference, m)?)?;
    m.add_function(wrap_pyfunction!(iterated_difference, m)?)?;
    m.add_function(wrap_pyfunction!(bernstein_poly, m)?)?;
    m.add_function(wrap_pyfunction!(n_convexity_probe, m)?)?;
    m.add_function(wrap_pyfunction!(positive_difference_probe, m)?)?;
    m.add_function(wrap_pyfunction!(cone_iterated_difference, m)?)?;
    m.add_function(wrap_pyfunction!(sz_alternating_sum, m)?)?;
    m.add_function(wrap_pyfunction!(bernstein_pq, m)?)?;
    m.add_function(wrap_pyfunction!(double_divided_diff, m)?)?;
    m.add_function(wrap_pyfunction!(loewner_margin, m)?)?;
    m.add_function(wrap_pyfunction!(tensor_power, m)?)?;
    m.add_function(wrap_pyfunction!(compound_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(det_alternating_difference, m)?)?;
    m.add_function(wrap_pyfunction!(det_hlawka, m)?)?;
    m.add_function(wrap_pyfunction!(esym_hlawka, m)?)?;
    m.add_function(wrap_pyfunction!(immanant_hh, m)?)?;
    m.add_function(wrap_pyfunction!(operator_hh, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_main, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_sk, m)?)?;
    m.add_function(wrap_pyfunction!(serre_reverse, m)?)?;
    m.add_function(wrap_pyfunction!(minkowski_like, m)?)?;
    m.add_function(wrap_pyfunction!(detrho_alternating, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_formula_check, m)?)?;
    m.add_function(wrap_pyfunction!(list_inequalities, m)?)?;
    m.add_function(wrap_pyfunction!(campaign, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(demo_counterexamples, m)?)?;
    Ok(())
}
