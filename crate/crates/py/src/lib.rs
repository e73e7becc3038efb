//! Python bindings.
//!
//! Ranks come back as strings (`"3"`, `"inf"`), tuples as lists of point
//! indices, and certificates as JSON text that the matching `check_*`
//! function accepts again.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use scott_core::cas;
use scott_core::game::{self, Strategy, ToleranceSchedule};
use scott_core::metric::{fixtures, validate_document};
use scott_core::{oracle, Budget, Error, PointTuple};

fn py_err(e: Error) -> PyErr {
    if e.is_internal() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| py_err(e.into()))
}

fn tuple(v: Vec<usize>) -> PointTuple {
    PointTuple::from(v)
}

fn budget(alpha: &str) -> PyResult<Budget> {
    alpha.parse().map_err(py_err)
}

/// A finite metric space with exact rational distances.
#[pyclass(frozen, module = "scott")]
struct MetricSpace {
    inner: scott_core::MetricSpace,
}

#[pymethods]
impl MetricSpace {
    /// Parses `{"labels": [...], "dist": [["p/q", ...], ...]}`.
    #[new]
    fn new(document: &str) -> PyResult<Self> {
        scott_core::parse_metric_space(document)
            .map(|inner| MetricSpace { inner })
            .map_err(py_err)
    }

    /// One of `path3`, `square`, `line`, `single`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        fixtures::by_name(name)
            .map(|inner| MetricSpace { inner })
            .ok_or_else(|| PyValueError::new_err(format!("no fixture named `{name}`")))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("MetricSpace({:?})", self.inner.labels())
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn distance(&self, x: usize, y: usize) -> PyResult<String> {
        self.inner.check_point(x).and_then(|_| self.inner.check_point(y)).map_err(py_err)?;
        Ok(self.inner.d(x, y).to_string())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

/// Violated metric axioms of a space document, as JSON; `[]` when valid.
#[pyfunction]
fn validate(document: &str) -> PyResult<String> {
    validate_document(document).map(|r| json(&r.violations)).map_err(py_err)
}

#[pyfunction]
fn scott_rank_pair(space: &MetricSpace, a: Vec<usize>, b: Vec<usize>) -> PyResult<String> {
    scott_core::scott_rank_pair(&space.inner, &tuple(a), &tuple(b))
        .map(|r| r.to_string())
        .map_err(py_err)
}

/// Rank of the whole space with the tuple realizing it, as JSON.
#[pyfunction]
fn scott_rank_space(space: &MetricSpace) -> PyResult<String> {
    scott_core::scott_rank_space(&space.inner).map(|r| json(&r)).map_err(py_err)
}

#[pyfunction]
fn bf_table(space: &MetricSpace, p_max: usize) -> PyResult<String> {
    scott_core::compute_bf_table(&space.inner, p_max)
        .map(|t| json(&t.export()))
        .map_err(py_err)
}

/// Upper bound from the approximation games; `schedules` are `geometric:q,r`
/// strings and default to the two standard ones.
#[pyfunction]
#[pyo3(signature = (space, a, b, schedules=None))]
fn metric_rank_upper(
    space: &MetricSpace,
    a: Vec<usize>,
    b: Vec<usize>,
    schedules: Option<Vec<String>>,
) -> PyResult<String> {
    let family = match schedules {
        None => ToleranceSchedule::default_family(),
        Some(s) => s.iter().map(|f| f.parse()).collect::<Result<_, Error>>().map_err(py_err)?,
    };
    game::metric_rank_upper(&space.inner, &tuple(a), &tuple(b), &family)
        .map(|r| r.to_string())
        .map_err(py_err)
}

/// Solves the Ehrenfeucht–Fraïssé game; `alpha` is a number or `"omega"`.
/// Returns the outcome with the winner's strategy as JSON.
#[pyfunction]
fn solve_ef_game(space: &MetricSpace, a: Vec<usize>, b: Vec<usize>, alpha: &str) -> PyResult<String> {
    game::solve_ef_game(&space.inner, &tuple(a), &tuple(b), budget(alpha)?)
        .map(|o| json(&o))
        .map_err(py_err)
}

#[pyfunction]
fn solve_approx_game(space: &MetricSpace, a: Vec<usize>, b: Vec<usize>, alpha: &str, f: &str) -> PyResult<String> {
    let schedule: ToleranceSchedule = f.parse().map_err(py_err)?;
    game::solve_approx_game(&space.inner, &tuple(a), &tuple(b), budget(alpha)?, schedule)
        .map(|o| json(&o))
        .map_err(py_err)
}

#[pyfunction]
fn distinguishing_strategy(space: &MetricSpace, a: Vec<usize>, b: Vec<usize>) -> PyResult<String> {
    scott_core::distinguishing_strategy(&space.inner, &tuple(a), &tuple(b))
        .map(|s| json(&s))
        .map_err(py_err)
}

/// Replays a strategy against every opponent line; returns the report as JSON.
#[pyfunction]
fn check_strategy(space: &MetricSpace, strategy: &str) -> PyResult<String> {
    let strategy: Strategy = parse(strategy)?;
    game::exhaustive_check(&space.inner, &strategy).map(|r| json(&r)).map_err(py_err)
}

#[pyfunction]
fn autoisometries(space: &MetricSpace) -> PyResult<Vec<Vec<usize>>> {
    oracle::enumerate_autoisometries(&space.inner, oracle::DEFAULT_AUTO_CAP).map_err(py_err)
}

#[pyfunction]
fn exists_autoisometry(space: &MetricSpace, a: Vec<usize>, b: Vec<usize>) -> PyResult<bool> {
    oracle::exists_autoisometry_mapping(&space.inner, &a, &b, oracle::DEFAULT_AUTO_CAP).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (space, a, b, cap=oracle::MAX_RANK_BUDGET))]
fn brute_scott_rank_pair(space: &MetricSpace, a: Vec<usize>, b: Vec<usize>, cap: u32) -> PyResult<String> {
    oracle::brute_scott_rank_pair(&space.inner, &a, &b, cap)
        .map(|r| r.to_string())
        .map_err(py_err)
}

/// Searches for a `depth`-system; returns the found system or the exhaustion report as JSON.
#[pyfunction]
fn search_k_system(space: &MetricSpace, a: Vec<usize>, b: Vec<usize>, depth: usize) -> PyResult<String> {
    let nets = scott_core::build_net_family(&space.inner, depth);
    cas::search_k_system(&space.inner, &tuple(a), &tuple(b), &nets, depth)
        .map(|o| json(&o))
        .map_err(py_err)
}

/// Builds a `depth`-system from a Player 2 strategy given as JSON.
#[pyfunction]
fn strategy_to_k_system(space: &MetricSpace, strategy: &str, depth: usize) -> PyResult<String> {
    let strategy: Strategy = parse(strategy)?;
    let nets = scott_core::build_net_family(&space.inner, depth);
    cas::strategy_to_k_system(&space.inner, &nets, &strategy, depth)
        .map(|s| json(&s))
        .map_err(py_err)
}

/// Clause violations of a system given as JSON; `[]` when valid.
#[pyfunction]
fn verify_k_system(space: &MetricSpace, system: &str) -> PyResult<String> {
    let system: cas::KSystem = parse(system)?;
    cas::verify_k_system(&space.inner, &system.nets, &system)
        .map(|v| json(&v))
        .map_err(py_err)
}

/// The autoisometry read off a system past the snap depth.
#[pyfunction]
fn system_to_isometry(space: &MetricSpace, system: &str) -> PyResult<Vec<usize>> {
    let system: cas::KSystem = parse(system)?;
    cas::system_to_isometry(&space.inner, &system.nets, &system)
        .map(|m| m.perm)
        .map_err(py_err)
}

#[pymodule]
fn scott(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MetricSpace>()?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(scott_rank_pair, m)?)?;
    m.add_function(wrap_pyfunction!(scott_rank_space, m)?)?;
    m.add_function(wrap_pyfunction!(bf_table, m)?)?;
    m.add_function(wrap_pyfunction!(metric_rank_upper, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ef_game, m)?)?;
    m.add_function(wrap_pyfunction!(solve_approx_game, m)?)?;
    m.add_function(wrap_pyfunction!(distinguishing_strategy, m)?)?;
    m.add_function(wrap_pyfunction!(check_strategy, m)?)?;
    m.add_function(wrap_pyfunction!(autoisometries, m)?)?;
    m.add_function(wrap_pyfunction!(exists_autoisometry, m)?)?;
    m.add_function(wrap_pyfunction!(brute_scott_rank_pair, m)?)?;
    m.add_function(wrap_pyfunction!(search_k_system, m)?)?;
    m.add_function(wrap_pyfunction!(strategy_to_k_system, m)?)?;
    m.add_function(wrap_pyfunction!(verify_k_system, m)?)?;
    m.add_function(wrap_pyfunction!(system_to_isometry, m)?)?;
    Ok(())
}
