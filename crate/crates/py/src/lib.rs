// pyo3 0.22 macros expand to an `.into()` clippy reads as redundant
#![allow(clippy::useless_conversion)]

use std::collections::BTreeMap;

use datum_core::baselines::{from_uflp, to_uflp, UflpFormat, UflpInstance};
use datum_core::experiment::{self, Algorithm, SolveConfig};
use datum_core::model::split_by_provider;
use datum_core::rational::{format_decimal, parse_decimal};
use datum_core::scenario::{self, ScenarioParams};
use datum_core::{io, CostBreakdown, DatumConfig, Error, ExhaustiveBudget, MarketInstance, Plan};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(datum_py, DatumError, PyException);
create_exception!(datum_py, OversizeError, DatumError);
create_exception!(datum_py, InvalidInstanceError, DatumError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::OversizeInstance { .. } => OversizeError::new_err(e.to_string()),
        Error::InvalidInstance(_) | Error::UnsatisfiableDemand { .. } | Error::Parse(_) => {
            InvalidInstanceError::new_err(e.to_string())
        }
        Error::UnknownAlgorithm(_) | Error::InvalidParams(_) | Error::InvalidRatioTargets(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => DatumError::new_err(e.to_string()),
    }
}

fn cost_map(c: &CostBreakdown) -> BTreeMap<&'static str, String> {
    BTreeMap::from([
        ("oper", format_decimal(&c.oper)),
        ("exec", format_decimal(&c.exec)),
        ("purch", format_decimal(&c.purch)),
        ("total", format_decimal(&c.total)),
    ])
}

/// A validated market instance.
#[pyclass(module = "datum_py", frozen)]
struct Instance {
    inner: MarketInstance,
}

#[pymethods]
impl Instance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::load_instance(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| InvalidInstanceError::new_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Synthetic case-study instance; ratios are log10 targets.
    #[staticmethod]
    #[pyo3(signature = (seed=0, data_centers=10, providers=20, clients=100, levels=8, ratio_bf=-0.5, ratio_ie=-1.0))]
    fn generate(
        seed: u64,
        data_centers: usize,
        providers: usize,
        clients: usize,
        levels: usize,
        ratio_bf: f64,
        ratio_ie: f64,
    ) -> PyResult<Self> {
        let params = ScenarioParams {
            seed,
            num_data_centers: data_centers,
            num_providers: providers,
            num_clients: clients,
            levels_per_provider: levels,
            ratio_band_to_fee: ratio_bf,
            ratio_internal_to_external: ratio_ie,
            ..ScenarioParams::default()
        };
        Ok(Self { inner: scenario::generate(&params).map_err(to_py)? })
    }

    /// Market instance equivalent to a UFLP document.
    #[staticmethod]
    fn from_uflp(text: &str) -> PyResult<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| InvalidInstanceError::new_err(e.to_string()))?;
        let uflp = UflpInstance::from_json(&value).map_err(to_py)?;
        Ok(Self { inner: from_uflp(&uflp).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        io::instance_to_json(&self.inner)
    }

    fn fingerprint(&self) -> String {
        io::fingerprint(&self.inner)
    }

    #[getter]
    fn num_providers(&self) -> usize {
        self.inner.providers.len()
    }

    #[getter]
    fn num_data_centers(&self) -> usize {
        self.inner.data_centers.len()
    }

    #[getter]
    fn num_clients(&self) -> usize {
        self.inner.clients.len()
    }

    /// Runs `algorithm` (datum, single-dc, optcost, optband, nearestdc).
    #[pyo3(signature = (algorithm="datum", max_replicas=2, mu1="0", mu2=0.0, budget=None))]
    fn solve(
        &self,
        py: Python<'_>,
        algorithm: &str,
        max_replicas: usize,
        mu1: &str,
        mu2: f64,
        budget: Option<u64>,
    ) -> PyResult<Solution> {
        let algorithm: Algorithm = algorithm.parse().map_err(to_py)?;
        let config = SolveConfig {
            datum: DatumConfig {
                max_replicas,
                mu1: parse_decimal(mu1).map_err(|e| PyValueError::new_err(e.to_string()))?,
                mu2,
                ..DatumConfig::default()
            },
            budget: match budget {
                Some(n) => ExhaustiveBudget::new(n),
                None => ExhaustiveBudget::from_env(),
            }
            .map_err(to_py)?,
        };
        let (plan, cost) = py.allow_threads(|| experiment::solve(&self.inner, algorithm, &config)).map_err(to_py)?;
        Ok(Solution {
            algorithm: algorithm.name().to_string(),
            plan_json: io::plan_to_json(&self.inner, &plan, Some(&cost)),
            plan,
            cost,
        })
    }

    /// Recomputes the cost of a plan document against this instance.
    fn evaluate(&self, plan_json: &str) -> PyResult<BTreeMap<&'static str, String>> {
        let (plan, _) = io::parse_plan(&self.inner, plan_json).map_err(to_py)?;
        let cost = datum_core::evaluate_cost(&self.inner, &plan).map_err(to_py)?;
        Ok(cost_map(&cost))
    }

    /// UFLP document for one provider's subproblem.
    #[pyo3(signature = (provider=None, format="dense"))]
    fn to_uflp(&self, provider: Option<&str>, format: &str) -> PyResult<String> {
        let format = match format {
            "dense" => UflpFormat::Dense,
            "sparse" => UflpFormat::Sparse,
            other => return Err(PyValueError::new_err(format!("unknown UFLP format {other:?}"))),
        };
        let subs = split_by_provider(&self.inner).map_err(to_py)?;
        let sub = match provider {
            Some(id) => subs
                .iter()
                .find(|s| s.provider_id == id)
                .ok_or_else(|| PyValueError::new_err(format!("no provider {id:?}")))?,
            None if subs.len() == 1 => &subs[0],
            None => return Err(PyValueError::new_err("several providers; pass provider=")),
        };
        let value = to_uflp(sub).map_err(to_py)?.to_json(format);
        Ok(serde_json::to_string_pretty(&value).expect("JSON values serialize"))
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(providers={}, data_centers={}, clients={})",
            self.num_providers(),
            self.num_data_centers(),
            self.num_clients()
        )
    }
}

/// A plan with its exact cost breakdown.
#[pyclass(module = "datum_py", frozen)]
struct Solution {
    #[pyo3(get)]
    algorithm: String,
    #[pyo3(get)]
    plan_json: String,
    plan: Plan,
    cost: CostBreakdown,
}

#[pymethods]
impl Solution {
    /// Cost components as six-place decimal strings.
    #[getter]
    fn cost(&self) -> BTreeMap<&'static str, String> {
        cost_map(&self.cost)
    }

    #[getter]
    fn total(&self) -> String {
        format_decimal(&self.cost.total)
    }

    #[getter]
    fn num_placements(&self) -> usize {
        self.plan.placements.len()
    }

    fn __repr__(&self) -> String {
        format!("Solution(algorithm={:?}, total={})", self.algorithm, self.total())
    }
}

/// Compare CSV over generated instances, as the `compare` subcommand emits.
#[pyfunction]
#[pyo3(signature = (seeds, algorithms="datum,optcost,optband,nearestdc", data_centers=10, providers=20, clients=100, levels=8))]
fn compare(
    py: Python<'_>,
    seeds: Vec<u64>,
    algorithms: &str,
    data_centers: usize,
    providers: usize,
    clients: usize,
    levels: usize,
) -> PyResult<String> {
    let algorithms = experiment::parse_algorithms(algorithms).map_err(to_py)?;
    let base = ScenarioParams {
        num_data_centers: data_centers,
        num_providers: providers,
        num_clients: clients,
        levels_per_provider: levels,
        ..ScenarioParams::default()
    };
    let config = SolveConfig { budget: ExhaustiveBudget::from_env().map_err(to_py)?, ..SolveConfig::default() };
    let records =
        py.allow_threads(|| experiment::compare(&base, &seeds, &algorithms, &config, false)).map_err(to_py)?;
    Ok(experiment::compare_csv(&records))
}

#[pymodule]
fn datum_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add("DatumError", m.py().get_type_bound::<DatumError>())?;
    m.add("OversizeError", m.py().get_type_bound::<OversizeError>())?;
    m.add("InvalidInstanceError", m.py().get_type_bound::<InvalidInstanceError>())?;
    Ok(())
}
