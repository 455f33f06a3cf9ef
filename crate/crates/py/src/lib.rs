//! Python bindings. Reports come back as plain dicts and lists; exact
//! probabilities come back as `fractions.Fraction`.

use std::collections::BTreeMap;

use ballast_core::analysis::{self, PhaseConfig, PlacementProbs};
use ballast_core::experiment::{self, ExperimentSpec, PolicyKind, PolicyParams, VerifyOptions};
use ballast_core::policies::{self as core_policies, Rational};
use ballast_core::sim::{self, SimConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: ballast_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((*r.numer(), *r.denom()))
}

/// Accepts ints, floats, strings like "1/3" and `Fraction`s.
fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let f = obj.py().import("fractions")?.getattr("Fraction")?.call1((obj,))?;
    let num: i64 = f.getattr("numerator")?.extract()?;
    let den: i64 = f.getattr("denominator")?.extract()?;
    Ok(Rational::new(num, den))
}

fn kind(name: &str) -> PyResult<PolicyKind> {
    name.parse().map_err(err)
}

/// An allocation policy with its memory.
#[pyclass(name = "Policy", module = "ballast")]
struct PyPolicy {
    inner: Box<dyn core_policies::Policy>,
}

#[pymethods]
impl PyPolicy {
    #[new]
    #[pyo3(signature = (name, n, delta=0.5, cluster_size=None, counter_cap=None, advice_threshold=None))]
    fn new(
        name: &str,
        n: usize,
        delta: f64,
        cluster_size: Option<usize>,
        counter_cap: Option<u32>,
        advice_threshold: Option<u32>,
    ) -> PyResult<Self> {
        let params = PolicyParams {
            cluster_size,
            counter_cap,
            advice_threshold,
        };
        let mut inner = experiment::build_policy(kind(name)?, n, delta, &params).map_err(err)?;
        inner.reset(n, n as u64);
        inner.observe(&vec![0; n], None);
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    fn reset(&mut self, n: usize, balls: u64) {
        self.inner.reset(n, balls);
        self.inner.observe(&vec![0; n], None);
    }

    fn memory_bits(&self) -> u64 {
        self.inner.memory_bits()
    }

    fn state_id(&self) -> u64 {
        self.inner.state_id()
    }

    fn state_key(&self) -> Vec<u32> {
        self.inner.state_key()
    }

    /// Place one ball offered the pair `(a, b)` and return the chosen bin.
    fn step(&mut self, a: usize, b: usize, seed: u64) -> usize {
        let mut rng = ballast_core::rng::sim_rng(seed);
        let chosen = self.inner.decide(a, b, &mut rng);
        self.inner.update(a, b, chosen);
        chosen
    }

    fn __repr__(&self) -> String {
        format!("Policy({:?}, dims={:?})", self.inner.name(), self.inner.dims())
    }
}

/// Simulate one run. `policy` is a name or a `Policy`; a `Policy` object is
/// copied, not advanced.
#[pyfunction]
#[pyo3(signature = (policy, n, seed=0, balls=None, trace=false, delta=0.5))]
fn simulate_run<'py>(
    py: Python<'py>,
    policy: &Bound<'py, PyAny>,
    n: usize,
    seed: u64,
    balls: Option<u64>,
    trace: bool,
    delta: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut p = match policy.cast::<PyPolicy>() {
        Ok(obj) => obj.borrow().inner.clone(),
        Err(_) => experiment::build_policy(kind(policy.extract::<&str>()?)?, n, delta, &PolicyParams::default())
            .map_err(err)?,
    };
    let config = SimConfig::new(n, seed)
        .with_balls(balls.unwrap_or(n as u64))
        .with_trace(trace);
    let run = py.detach(|| sim::simulate_run(&config, p.as_mut())).map_err(err)?;
    to_py(py, &run)
}

#[pyfunction]
fn max_load(loads: Vec<u32>) -> PyResult<u32> {
    sim::max_load(&loads).map_err(err)
}

#[pyfunction]
fn load_histogram(loads: Vec<u32>) -> PyResult<BTreeMap<u32, usize>> {
    sim::load_histogram(&loads).map_err(err)
}

#[pyfunction]
fn theoretical_bounds(py: Python<'_>, n: u64, delta: f64) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &analysis::theoretical_bounds(n, delta).map_err(err)?)
}

#[pyfunction]
fn poisson_upper_tail(py: Python<'_>, lam: f64, t: u64) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &analysis::poisson_upper_tail(lam, t).map_err(err)?)
}

#[pyfunction]
fn advice_list_size_check(py: Python<'_>, loads: Vec<u32>, n: u64, delta: f64) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &analysis::advice_list_size_check(&loads, n, delta).map_err(err)?)
}

#[pyfunction]
fn build_advice(py: Python<'_>, loads: Vec<u32>, threshold: u32) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &core_policies::build_advice(&loads, threshold).map_err(err)?)
}

#[pyfunction]
fn exact_placement_probs<'py>(py: Python<'py>, policy: PyRef<'_, PyPolicy>) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let n = policy
        .inner
        .dims()
        .ok_or_else(|| PyValueError::new_err("policy has not been reset"))?
        .0;
    let p = analysis::exact_placement_probs(policy.inner.as_ref(), n).map_err(err)?;
    p.probs.iter().map(|r| fraction(py, r)).collect()
}

fn probs_from(values: &[Bound<'_, PyAny>]) -> PyResult<PlacementProbs> {
    Ok(PlacementProbs {
        n: values.len(),
        memory_state_id: 0,
        probs: values.iter().map(rational).collect::<PyResult<_>>()?,
    })
}

#[pyfunction]
fn forbidden_set(probs: Vec<Bound<'_, PyAny>>, epsilon: &Bound<'_, PyAny>) -> PyResult<Vec<usize>> {
    let p = probs_from(&probs)?;
    Ok(analysis::forbidden_set(&p, rational(epsilon)?).map_err(err)?.members)
}

#[pyfunction]
fn check_claim1<'py>(
    py: Python<'py>,
    probs: Vec<Bound<'py, PyAny>>,
    epsilon: &Bound<'py, PyAny>,
    subset: Vec<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = probs_from(&probs)?;
    to_py(
        py,
        &analysis::check_claim1(&p, rational(epsilon)?, &subset).map_err(err)?,
    )
}

/// Phase report for a live run. `phases` defaults to the value derived from
/// `n` and `delta`.
#[pyfunction]
#[pyo3(signature = (policy, n, phases=None, delta=0.5, seed=0, balls=None))]
fn phase_report<'py>(
    py: Python<'py>,
    policy: &str,
    n: usize,
    phases: Option<usize>,
    delta: f64,
    seed: u64,
    balls: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let pc = match phases {
        Some(l) => PhaseConfig::new(n, l, delta),
        None => PhaseConfig::from_bounds(n, delta),
    }
    .map_err(err)?;
    let mut p = experiment::build_policy(kind(policy)?, n, delta, &PolicyParams::default()).map_err(err)?;
    let config = SimConfig::new(n, seed).with_balls(balls.unwrap_or(n as u64));
    let (_, report) = py
        .detach(|| analysis::phase_report_run(&config, p.as_mut(), pc, None))
        .map_err(err)?;
    to_py(py, &report)
}

/// Run a scan described by a TOML document and return its rows.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, spec: &str) -> PyResult<Bound<'py, PyAny>> {
    let spec = ExperimentSpec::from_toml_str(spec).map_err(err)?;
    let rows = py.detach(|| experiment::run_experiment(&spec)).map_err(err)?;
    to_py(py, &rows)
}

#[pyfunction]
#[pyo3(signature = (policy, n, balls=0, epsilons=None, subsets=1000, seed=0))]
fn verify<'py>(
    py: Python<'py>,
    policy: &str,
    n: usize,
    balls: u64,
    epsilons: Option<Vec<Bound<'py, PyAny>>>,
    subsets: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut opts = VerifyOptions::new(kind(policy)?, n);
    if let Some(eps) = epsilons {
        opts.epsilons = eps.iter().map(rational).collect::<PyResult<_>>()?;
    }
    opts.depth = balls;
    opts.subsets = subsets;
    opts.seed = seed;
    let report = py.detach(|| experiment::cli_verify(&opts)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn ballast(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolicy>()?;
    m.add_function(wrap_pyfunction!(simulate_run, m)?)?;
    m.add_function(wrap_pyfunction!(max_load, m)?)?;
    m.add_function(wrap_pyfunction!(load_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_upper_tail, m)?)?;
    m.add_function(wrap_pyfunction!(advice_list_size_check, m)?)?;
    m.add_function(wrap_pyfunction!(build_advice, m)?)?;
    m.add_function(wrap_pyfunction!(exact_placement_probs, m)?)?;
    m.add_function(wrap_pyfunction!(forbidden_set, m)?)?;
    m.add_function(wrap_pyfunction!(check_claim1, m)?)?;
    m.add_function(wrap_pyfunction!(phase_report, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("POLICIES", PolicyKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>())?;
    Ok(())
}
