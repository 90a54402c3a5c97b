//! Python bindings. Configuration errors surface as `ValueError`, numerical
//! failures as `RuntimeError`.

use adia_core::dynamics::{self, Drive, EvolutionReport, GUARANTEE_SLACK};
use adia_core::hamiltonian::{final_pauli, initial_pauli};
use adia_core::runtime::{self, OptimalSchedule};
use adia_core::spectral::{self, DEFAULT_GRID};
use adia_core::{Error, MarkedState, Precision, Schedule, Splitting};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::QuadratureNonConvergence { .. }
        | Error::NormDrift { .. }
        | Error::DegenerateGround { .. }
        | Error::UnsupportedOperator(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn marked_or_zeros(n: usize, marked: Option<&str>) -> PyResult<MarkedState> {
    match marked {
        None => Ok(MarkedState::zeros(n)),
        Some(bits) => {
            let m = MarkedState::parse(bits).map_err(to_py)?;
            if m.len() != n {
                return Err(PyValueError::new_err(format!(
                    "marked state has {} bits, expected {n}",
                    m.len()
                )));
            }
            Ok(m)
        }
    }
}

/// Partition of `n` qubits into contiguous blocks.
#[pyclass(name = "Splitting", module = "adia", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PySplitting(Splitting);

#[pymethods]
impl PySplitting {
    /// `Splitting(n)` is one block, `Splitting(n, parts=[..])` explicit sizes,
    /// `Splitting(n, m=k)` k equal blocks.
    #[new]
    #[pyo3(signature = (n, parts=None, m=None))]
    fn new(n: usize, parts: Option<Vec<usize>>, m: Option<usize>) -> PyResult<Self> {
        let s = match (parts, m) {
            (Some(_), Some(_)) => return Err(PyValueError::new_err("give parts or m, not both")),
            (Some(p), None) => Splitting::new(n, p),
            (None, Some(m)) => Splitting::equal(n, m),
            (None, None) => Splitting::unstructured(n),
        };
        s.map(PySplitting).map_err(to_py)
    }

    #[staticmethod]
    fn maximal(n: usize) -> PyResult<Self> {
        Splitting::maximal(n).map(PySplitting).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn parts(&self) -> Vec<usize> {
        self.0.parts().to_vec()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn block_dims(&self) -> Vec<f64> {
        self.0.block_dims()
    }

    fn global_gap(&self, f: f64, g: f64) -> PyResult<f64> {
        spectral::global_gap(&self.0, f, g).map_err(to_py)
    }

    /// ε·T for the linear schedule, by quadrature.
    fn eps_t(&self) -> PyResult<f64> {
        runtime::running_time_integral(&self.0, &Schedule::linear(), &Precision::default())
            .map(|r| r.eps_t)
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Splitting(n={}, parts={:?})", self.0.n(), self.0.parts())
    }
}

/// Saturated time reparameterization.
#[pyclass(name = "OptimalSchedule", module = "adia", frozen)]
struct PyOptimalSchedule(OptimalSchedule);

#[pymethods]
impl PyOptimalSchedule {
    #[getter]
    fn total_time(&self) -> f64 {
        self.0.total_time()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    fn t_at(&self, s: f64) -> f64 {
        self.0.t_at(s)
    }

    fn s_at(&self, t: f64) -> f64 {
        self.0.s_at(t)
    }

    fn ds_dt_at(&self, t: f64) -> f64 {
        self.0.ds_dt_at(t)
    }

    /// `(t, s, ds_dt)` node triples.
    fn nodes(&self) -> Vec<(f64, f64, f64)> {
        self.0.nodes().collect()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "EvolutionReport", module = "adia", frozen)]
struct PyEvolutionReport(EvolutionReport);

#[pymethods]
impl PyEvolutionReport {
    #[getter]
    fn success_probability(&self) -> f64 {
        self.0.success_probability
    }

    #[getter]
    fn total_time(&self) -> f64 {
        self.0.total_time
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps
    }

    #[getter]
    fn norm_drift(&self) -> f64 {
        self.0.norm_drift
    }

    #[getter]
    fn max_lhs(&self) -> f64 {
        self.0.max_lhs
    }

    /// `(t, s, ground_overlap, lhs, norm)` per checkpoint.
    fn checkpoints(&self) -> Vec<(f64, f64, f64, f64, f64)> {
        self.0
            .checkpoints
            .iter()
            .map(|c| (c.t, c.s, c.ground_overlap, c.lhs, c.norm))
            .collect()
    }

    #[pyo3(signature = (epsilon, slack=GUARANTEE_SLACK))]
    fn meets_guarantee(&self, epsilon: f64, slack: f64) -> bool {
        self.0.meets_guarantee(epsilon, slack)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "EvolutionReport(p={:.6}, T={}, steps={})",
            self.0.success_probability, self.0.total_time, self.0.steps
        )
    }
}

#[pyfunction]
fn subsystem_gap(block_dim: f64, f: f64, g: f64) -> PyResult<f64> {
    spectral::subsystem_gap(block_dim, f, g).map_err(to_py)
}

/// Returns `(s, global_gap, omega_min, s_min)`.
#[pyfunction]
#[pyo3(signature = (splitting, grid=DEFAULT_GRID))]
fn gap_profile(splitting: &PySplitting, grid: usize) -> PyResult<(Vec<f64>, Vec<f64>, f64, f64)> {
    let p = spectral::gap_profile(&splitting.0, &Schedule::linear(), grid).map_err(to_py)?;
    let s = p.samples.iter().map(|x| x.s).collect();
    let w = p.samples.iter().map(|x| x.global).collect();
    Ok((s, w, p.omega_min, p.s_min))
}

#[pyfunction]
fn closed_form_eps_t(n: usize, m: usize) -> PyResult<f64> {
    runtime::closed_form_eps_t(n, m).map_err(to_py)
}

#[pyfunction]
fn max_structured_eps_t(n: usize) -> PyResult<f64> {
    runtime::max_structured_time(n)
        .map(|r| r.eps_t)
        .map_err(to_py)
}

/// `(alpha, beta)`; beta is `inf` for one block.
#[pyfunction]
fn scaling_coefficients(eps_t: f64, n: usize, m: usize) -> PyResult<(f64, f64)> {
    runtime::scaling_coefficients(eps_t, n, m).map_err(to_py)
}

type Row = (usize, f64, f64, f64, f64);

/// Rows `(m, n_per_m, eps_t, alpha, beta)` for every divisor m of n.
#[pyfunction]
fn reproduce_table(n: usize) -> PyResult<Vec<Row>> {
    let rows = runtime::reproduce_table(n, &Precision::default()).map_err(to_py)?;
    Ok(rows
        .iter()
        .map(|r| {
            let row = r.row();
            (row.m, row.n_per_m, row.eps_t, row.alpha, row.beta)
        })
        .collect())
}

#[pyfunction]
fn table_csv(n: usize) -> PyResult<String> {
    let rows = runtime::reproduce_table(n, &Precision::default()).map_err(to_py)?;
    Ok(runtime::table_csv(&rows))
}

#[pyfunction]
#[pyo3(signature = (splitting, epsilon=0.2, grid=DEFAULT_GRID))]
fn optimal_schedule(
    splitting: &PySplitting,
    epsilon: f64,
    grid: usize,
) -> PyResult<PyOptimalSchedule> {
    let p = Precision::with_epsilon(epsilon).map_err(to_py)?;
    runtime::optimal_schedule(&splitting.0, &Schedule::linear(), &p, grid)
        .map(PyOptimalSchedule)
        .map_err(to_py)
}

/// `(coefficient, word)` pairs of the oracle (`"final"`) or driver
/// (`"initial"`) Hamiltonian.
#[pyfunction]
#[pyo3(signature = (splitting, marked=None, operator="final"))]
fn pauli_terms(
    splitting: &PySplitting,
    marked: Option<&str>,
    operator: &str,
) -> PyResult<Vec<(f64, String)>> {
    let terms = match operator {
        "final" => {
            let m = marked_or_zeros(splitting.0.n(), marked)?;
            final_pauli(&splitting.0, &m)
        }
        "initial" => initial_pauli(&splitting.0),
        other => return Err(PyValueError::new_err(format!("unknown operator {other:?}"))),
    }
    .map_err(to_py)?;
    Ok(terms.terms().map(|(w, c)| (c, w.to_string())).collect())
}

/// `|<E1|dH/ds|E0>|·|ds/dt| / ω²` from the dense spectrum, linear schedule.
#[pyfunction]
fn adiabaticity_lhs(splitting: &PySplitting, s: f64, ds_dt: f64) -> PyResult<f64> {
    dynamics::adiabaticity_lhs(&splitting.0, &Schedule::linear(), s, ds_dt)
        .map(|r| r.value)
        .map_err(to_py)
}

/// Runs the Schrödinger equation along the saturated schedule, or along the
/// same path stretched to `total_time`.
#[pyfunction]
#[pyo3(signature = (splitting, marked=None, epsilon=0.2, steps=50.0, total_time=None))]
fn evolve(
    py: Python<'_>,
    splitting: &PySplitting,
    marked: Option<&str>,
    epsilon: f64,
    steps: f64,
    total_time: Option<f64>,
) -> PyResult<PyEvolutionReport> {
    let m = marked_or_zeros(splitting.0.n(), marked)?;
    let split = splitting.0.clone();
    py.detach(move || {
        let p = Precision::new(epsilon, Precision::default().quad_tol, steps)?;
        let sched = runtime::optimal_schedule(&split, &Schedule::linear(), &p, DEFAULT_GRID)?;
        let mut drive = Drive::saturated(sched);
        if let Some(t) = total_time {
            drive = drive.with_total_time(t);
        }
        dynamics::evolve(&split, &m, &drive, &p)
    })
    .map(PyEvolutionReport)
    .map_err(to_py)
}

#[pymodule]
fn adia(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySplitting>()?;
    m.add_class::<PyOptimalSchedule>()?;
    m.add_class::<PyEvolutionReport>()?;
    m.add_function(wrap_pyfunction!(subsystem_gap, m)?)?;
    m.add_function(wrap_pyfunction!(gap_profile, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_eps_t, m)?)?;
    m.add_function(wrap_pyfunction!(max_structured_eps_t, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_table, m)?)?;
    m.add_function(wrap_pyfunction!(table_csv, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_terms, m)?)?;
    m.add_function(wrap_pyfunction!(adiabaticity_lhs, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add("GUARANTEE_SLACK", GUARANTEE_SLACK)?;
    Ok(())
}
