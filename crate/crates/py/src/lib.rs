//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! inputs also accept `int`, `str` such as `"9/2"`, or anything whose `str`
//! parses as a rational. Decision vectors are bit strings such as `"100001"`.

use std::path::PathBuf;

use hopskip::dse::{dse_hs, dse_ps, dse_xs, pareto_filter, ExploredPoint, Strategy, DEFAULT_GROUP_CAP};
use hopskip::graph::{unroll, DEFAULT_INSTANCE_CAP};
use hopskip::io::{generate_random, load_sdf3, load_sdf3_file, write_sdf3, Annotations, GeneratorParams};
use hopskip::timing::{min_period, schedule_for, verify_schedule, Schedule, StartAnchor};
use hopskip::{fixtures, DecisionVector, MarkedGraph, Rational};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: hopskip::Error) -> PyErr {
    match e {
        hopskip::Error::ArithmeticOverflow(_) | hopskip::Error::DivisionByZero => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((r.to_fraction_string(),))
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    Rational::parse(&obj.str()?.to_cow()?).map_err(err)
}

fn decisions(g: &MarkedGraph, bits: Option<&str>) -> PyResult<DecisionVector> {
    let x = match bits {
        Some(b) => b.parse().map_err(err)?,
        None => DecisionVector::zeros(g.groups()),
    };
    g.check_decisions(&x).map_err(err)?;
    Ok(x)
}

fn anchor(name: &str) -> PyResult<StartAnchor> {
    match name {
        "fireability" => Ok(StartAnchor::Fireability),
        "execution-start" => Ok(StartAnchor::ExecutionStart),
        _ => Err(PyValueError::new_err(format!("unknown anchor {name:?}"))),
    }
}

/// `(period, energy, x)` as seen from Python.
type PyPoint<'py> = (Bound<'py, PyAny>, Bound<'py, PyAny>, String);

/// A marked graph with timing and power annotations.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    name: String,
    graph: MarkedGraph,
}

#[pymethods]
impl PyGraph {
    /// The six-actor echo-cancellation example.
    #[staticmethod]
    fn aec() -> Self {
        PyGraph {
            name: "aec".into(),
            graph: fixtures::aec(),
        }
    }

    /// The six-actor sample-rate converter, unrolled to 612 instances.
    #[staticmethod]
    fn samplerate() -> PyResult<Self> {
        let graph = unroll(&fixtures::samplerate(), DEFAULT_INSTANCE_CAP)
            .map_err(err)?
            .graph;
        Ok(PyGraph {
            name: "samplerate".into(),
            graph,
        })
    }

    /// Parses SDF3 XML with an optional annotation sidecar and unrolls it.
    #[staticmethod]
    #[pyo3(signature = (xml, annotations=None, cap=DEFAULT_INSTANCE_CAP))]
    fn from_sdf3(xml: &str, annotations: Option<&str>, cap: u64) -> PyResult<Self> {
        let (name, sdf) = load_sdf3(xml, annotations).map_err(err)?;
        let graph = unroll(&sdf, cap).map_err(err)?.graph;
        Ok(PyGraph { name, graph })
    }

    /// Loads an SDF3 file; a `<stem>.annotations.json` next to it is used
    /// when `annotations` is not given.
    #[staticmethod]
    #[pyo3(signature = (path, annotations=None, cap=DEFAULT_INSTANCE_CAP))]
    fn load(path: PathBuf, annotations: Option<PathBuf>, cap: u64) -> PyResult<Self> {
        let (name, sdf) = load_sdf3_file(&path, annotations.as_deref()).map_err(err)?;
        let graph = unroll(&sdf, cap).map_err(err)?.graph;
        Ok(PyGraph { name, graph })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.name
    }

    #[getter]
    fn groups(&self) -> usize {
        self.graph.groups()
    }

    #[getter]
    fn group_names(&self) -> Vec<String> {
        self.graph.group_names().to_vec()
    }

    fn __len__(&self) -> usize {
        self.graph.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph({:?}, actors={}, groups={})",
            self.name,
            self.graph.len(),
            self.graph.groups()
        )
    }

    /// Minimum period for configuration `x` (all always-active by default).
    #[pyo3(signature = (x=None))]
    fn min_period<'py>(&self, py: Python<'py>, x: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let x = decisions(&self.graph, x)?;
        fraction(py, &min_period(&self.graph, &x).map_err(err)?)
    }

    /// Energy per iteration of configuration `x` at `period`.
    #[pyo3(signature = (period, x=None))]
    fn energy<'py>(&self, py: Python<'py>, period: &Bound<'py, PyAny>, x: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let x = decisions(&self.graph, x)?;
        fraction(
            py,
            &hopskip::total_energy(&self.graph, &rational(period)?, &x).map_err(err)?,
        )
    }

    /// A schedule for `x` at `period` as a dict with `period`, `starts` and
    /// `anchor`.
    #[pyo3(signature = (period, x=None))]
    fn schedule<'py>(
        &self,
        py: Python<'py>,
        period: &Bound<'py, PyAny>,
        x: Option<&str>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let x = decisions(&self.graph, x)?;
        let s = schedule_for(&self.graph, &x, &rational(period)?).map_err(err)?;
        schedule_dict(py, &s)
    }

    /// Violated constraints of the schedule, as messages; empty when valid.
    #[pyo3(signature = (x, period, starts, anchor="fireability"))]
    fn verify(
        &self,
        x: &str,
        period: &Bound<'_, PyAny>,
        starts: Vec<Bound<'_, PyAny>>,
        anchor: &str,
    ) -> PyResult<Vec<String>> {
        let x = decisions(&self.graph, Some(x))?;
        let sched = Schedule {
            period: rational(period)?,
            starts: starts.iter().map(rational).collect::<PyResult<_>>()?,
            anchor: self::anchor(anchor)?,
        };
        let violations = verify_schedule(&self.graph, &x, &sched).map_err(err)?;
        Ok(violations.iter().map(|v| v.to_string()).collect())
    }

    /// Minimum-energy configuration at `period` as `(x, energy, schedule)`.
    fn min_energy_config<'py>(
        &self,
        py: Python<'py>,
        period: &Bound<'py, PyAny>,
    ) -> PyResult<(String, Bound<'py, PyAny>, Bound<'py, PyDict>)> {
        let p = rational(period)?;
        let sol = py.detach(|| hopskip::min_energy_config(&self.graph, &p)).map_err(err)?;
        Ok((
            sol.x.to_string(),
            fraction(py, &sol.energy)?,
            schedule_dict(py, &sol.schedule)?,
        ))
    }

    /// Explores the design space and returns every point as
    /// `(period, energy, x)`. `epsilon` defaults to `1/10`.
    #[pyo3(signature = (strategy="hs", epsilon=None, workers=None))]
    fn explore<'py>(
        &self,
        py: Python<'py>,
        strategy: &str,
        epsilon: Option<&Bound<'py, PyAny>>,
        workers: Option<usize>,
    ) -> PyResult<Vec<PyPoint<'py>>> {
        let strategy: Strategy = strategy.parse().map_err(err)?;
        let eps = match epsilon {
            Some(e) => rational(e)?,
            None => Rational::new(1, 10).map_err(err)?,
        };
        let run = py
            .detach(|| match strategy {
                Strategy::Xs => dse_xs(&self.graph, DEFAULT_GROUP_CAP, workers),
                Strategy::Ps => dse_ps(&self.graph, workers),
                Strategy::Hs => dse_hs(&self.graph, &eps),
            })
            .map_err(err)?;
        points_out(py, &run.points)
    }
}

fn schedule_dict<'py>(py: Python<'py>, s: &Schedule) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("period", fraction(py, &s.period)?)?;
    let starts: Vec<Bound<'py, PyAny>> = s.starts.iter().map(|t| fraction(py, t)).collect::<PyResult<_>>()?;
    d.set_item("starts", starts)?;
    let anchor = match s.anchor {
        StartAnchor::Fireability => "fireability",
        StartAnchor::ExecutionStart => "execution-start",
    };
    d.set_item("anchor", anchor)?;
    Ok(d)
}

fn points_out<'py>(py: Python<'py>, points: &[ExploredPoint]) -> PyResult<Vec<PyPoint<'py>>> {
    points
        .iter()
        .map(|p| Ok((fraction(py, &p.period)?, fraction(py, &p.energy)?, p.x.to_string())))
        .collect()
}

fn points_in(points: Vec<PyPoint<'_>>) -> PyResult<Vec<ExploredPoint>> {
    points
        .into_iter()
        .map(|(p, e, x)| {
            Ok(ExploredPoint::new(
                rational(&p)?,
                rational(&e)?,
                x.parse().map_err(err)?,
            ))
        })
        .collect()
}

/// Non-dominated subset of `(period, energy, x)` points, sorted by period.
#[pyfunction]
fn pareto_front<'py>(py: Python<'py>, points: Vec<PyPoint<'py>>) -> PyResult<Vec<PyPoint<'py>>> {
    let front = pareto_filter(&points_in(points)?);
    points_out(py, &front.points)
}

/// Area dominated by normalized `(period, energy)` points up to `(1, 1)`.
#[pyfunction]
fn hypervolume<'py>(
    py: Python<'py>,
    points: Vec<(Bound<'py, PyAny>, Bound<'py, PyAny>)>,
) -> PyResult<Bound<'py, PyAny>> {
    let pts: Vec<(Rational, Rational)> = points
        .iter()
        .map(|(p, e)| Ok((rational(p)?, rational(e)?)))
        .collect::<PyResult<_>>()?;
    fraction(py, &hopskip::hypervolume(&pts))
}

/// Hypervolume of `front` relative to `reference`, both given as
/// `(period, energy, x)` points and normalized over their union.
#[pyfunction]
fn hypervolume_ratio<'py>(
    py: Python<'py>,
    front: Vec<PyPoint<'py>>,
    reference: Vec<PyPoint<'py>>,
) -> PyResult<Bound<'py, PyAny>> {
    let app = pareto_filter(&points_in(front)?);
    let reference = pareto_filter(&points_in(reference)?);
    fraction(py, &hopskip::metrics::compare_fronts(&app, &reference).map_err(err)?)
}

/// A seeded random graph as `(sdf3_xml, annotations_json)`.
#[pyfunction]
#[pyo3(signature = (seed=1, actors=15, repetition_sum=250))]
fn generate(seed: u64, actors: usize, repetition_sum: u64) -> PyResult<(String, String)> {
    let params = GeneratorParams {
        seed,
        actors,
        repetition_sum,
        ..Default::default()
    };
    let g = generate_random(&params).map_err(err)?;
    Ok((write_sdf3("random", &g), Annotations::from_graph(&g).to_json()))
}

#[pymodule]
fn hopskip_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(pareto_front, m)?)?;
    m.add_function(wrap_pyfunction!(hypervolume, m)?)?;
    m.add_function(wrap_pyfunction!(hypervolume_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
