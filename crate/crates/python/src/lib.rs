//! Python bindings: `fundindex.FundGroup` and module-level checks.

use std::path::PathBuf;

use fundindex_core::demo::{run_demo, Demo};
use fundindex_core::fairness::{
    axiom_suite_for, sampling_interpretation_check, verify_fairness_exact, verify_unit_ratio_identity, AxiomConfig,
    Property,
};
use fundindex_core::indices::{index, index_series, merged_fund_return, period_return};
use fundindex_core::io::{export_history, load_history, CsvPaths, RunConfig};
use fundindex_core::ledger::{ValidationScope, DEFAULT_BALANCE_TOL};
use fundindex_core::scenario::{build_tree, StrategySpec};
use fundindex_core::{Error, FundId, FundLedger, GroupHistory, IndexKind, MergerEvent};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(
    fundindex,
    DomainError,
    PyException,
    "The data are valid but the operation is undefined."
);

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        DomainError::new_err(e.to_string())
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for fundindex_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Serializable values cross into Python through `json.loads`.
fn to_object<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn kind(name: &str) -> PyResult<IndexKind> {
    match name.to_ascii_lowercase().as_str() {
        "ra" => Ok(IndexKind::Ra),
        "rpl" => Ok(IndexKind::Rpl),
        "rv" => Ok(IndexKind::Rv),
        other => Err(PyValueError::new_err(format!("unknown index `{other}` (ra, rpl, rv)"))),
    }
}

/// A group of funds observed at times `0..=horizon`.
#[pyclass(module = "fundindex", frozen)]
struct FundGroup {
    history: GroupHistory,
}

#[pymethods]
impl FundGroup {
    /// Load from CSV files; `mergers` are applied on load.
    #[staticmethod]
    #[pyo3(signature = (funds, prices=None, holdings=None, mergers=None))]
    fn from_csv(
        funds: PathBuf,
        prices: Option<PathBuf>,
        holdings: Option<PathBuf>,
        mergers: Option<PathBuf>,
    ) -> PyResult<Self> {
        let loaded = load_history(CsvPaths {
            funds: Some(&funds),
            prices: prices.as_deref(),
            holdings: holdings.as_deref(),
            mergers: mergers.as_deref(),
        })
        .py()?;
        Ok(Self {
            history: loaded.history,
        })
    }

    /// `units[i][t]` and `values[i][t]` for fund `ids[i]`.
    #[staticmethod]
    fn from_arrays(ids: Vec<String>, units: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> PyResult<Self> {
        if ids.len() != units.len() || ids.len() != values.len() {
            return Err(PyValueError::new_err("ids, units and values need one entry per fund"));
        }
        let funds = ids
            .into_iter()
            .zip(units.iter().zip(&values))
            .map(|(id, (k, w))| FundLedger::from_series(id, k, w))
            .collect::<fundindex_core::Result<Vec<_>>>()
            .py()?;
        Ok(Self {
            history: GroupHistory::new(funds, None).py()?,
        })
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.history.horizon()
    }

    #[getter]
    fn fund_ids(&self) -> Vec<String> {
        self.history.funds().iter().map(|f| f.id().to_string()).collect()
    }

    #[pyo3(signature = (kind="ra", start=0, end=None))]
    fn index(&self, kind: &str, start: usize, end: Option<usize>) -> PyResult<f64> {
        let end = end.unwrap_or(self.history.horizon());
        index(&self.history, self::kind(kind)?, start, end).py()
    }

    /// Index values from `start` to every later time.
    #[pyo3(signature = (kind="ra", start=0))]
    fn series(&self, kind: &str, start: usize) -> PyResult<Vec<f64>> {
        Ok(index_series(&self.history, self::kind(kind)?, start).py()?.values)
    }

    /// Assets of each fund at time `t`, with weights and total.
    fn assets<'py>(&self, py: Python<'py>, t: usize) -> PyResult<Bound<'py, PyAny>> {
        to_object(py, &self.history.assets(t).py()?)
    }

    fn period_return(&self, fund: &str, t: usize) -> PyResult<f64> {
        period_return(self.history.fund(&FundId::from(fund)).py()?, t).py()
    }

    fn merged_fund_return(&self, a: &str, b: &str, start: usize, tau: usize) -> PyResult<f64> {
        merged_fund_return(&self.history, &a.into(), &b.into(), start, tau).py()
    }

    /// A new group with fund `absorbed` merged into `survivor` at `time`.
    fn merge(&self, absorbed: &str, survivor: &str, time: usize, post_units: f64) -> PyResult<Self> {
        let event = MergerEvent::new(absorbed, survivor, time, post_units);
        Ok(Self {
            history: self.history.apply_merger(&event).py()?,
        })
    }

    /// Balance identities; `structural=False` needs prices and holdings.
    #[pyo3(signature = (structural=true, tol=DEFAULT_BALANCE_TOL))]
    fn validate<'py>(&self, py: Python<'py>, structural: bool, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let scope = if structural {
            ValidationScope::Structural
        } else {
            ValidationScope::Full
        };
        let report = self.history.validate_balance(scope, tol).py()?;
        let out = to_object(py, &report)?;
        out.set_item("passed", report.passed())?;
        Ok(out)
    }

    /// Random-fund sampling estimate of the chain-linked index.
    #[pyo3(signature = (start, end, n_samples=100_000, seed=0))]
    fn sampling_check<'py>(
        &self,
        py: Python<'py>,
        start: usize,
        end: usize,
        n_samples: u64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        to_object(
            py,
            &sampling_interpretation_check(&self.history, start, end, n_samples, seed).py()?,
        )
    }

    /// Write funds.csv (and prices, holdings, mergers when present) to `dir`.
    fn to_csv(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        export_history(&self.history, &dir).py()
    }

    fn __repr__(&self) -> String {
        format!(
            "FundGroup(funds={}, horizon={}, mergers={})",
            self.history.funds().len(),
            self.history.horizon(),
            self.history.mergers().len()
        )
    }
}

/// Exact fairness verdicts for the scenario tree of a TOML run configuration.
#[pyfunction]
#[pyo3(signature = (config, kind=None, tol=1e-9))]
fn verify_fairness<'py>(py: Python<'py>, config: &str, kind: Option<&str>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::from_toml(config, "<config>").py()?;
    let model = cfg.model().py()?;
    let policy = cfg.policy().py()?;
    let tree = build_tree(&model).py()?;
    let spec = StrategySpec::with_root(&tree, policy.root, policy.rest);
    let kinds = match kind {
        Some(k) => vec![self::kind(k)?],
        None => IndexKind::ALL.to_vec(),
    };
    let verdicts = kinds
        .into_iter()
        .map(|k| verify_fairness_exact(&tree, &spec, &policy.initial, k, tol))
        .collect::<fundindex_core::Result<Vec<_>>>()
        .py()?;
    let unit_ratio = verify_unit_ratio_identity(&tree, &spec, &policy.initial, tol).py()?;
    to_object(
        py,
        &serde_json::json!({ "verdicts": verdicts, "unit_ratio": unit_ratio, "nodes": tree.len() }),
    )
}

/// One of `merger`, `grouping`, `remark31`, `axioms`.
#[pyfunction]
fn demo<'py>(py: Python<'py>, selector: &str) -> PyResult<Bound<'py, PyAny>> {
    let d: Demo = selector.parse().py()?;
    to_object(py, &run_demo(d).py()?)
}

#[pyfunction]
#[pyo3(signature = (seed=None, instances=None, properties=None))]
fn axiom_suite<'py>(
    py: Python<'py>,
    seed: Option<u64>,
    instances: Option<usize>,
    properties: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = AxiomConfig::default();
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.instances = instances.unwrap_or(cfg.instances);
    let props = match properties {
        Some(ps) => ps
            .iter()
            .map(|p| p.parse())
            .collect::<fundindex_core::Result<Vec<Property>>>()
            .py()?,
        None => Property::ALL.to_vec(),
    };
    to_object(py, &axiom_suite_for(&cfg, &props).py()?)
}

/// Random-fund sampling estimate of the chain-linked index of `group`.
#[pyfunction]
#[pyo3(signature = (group, start, end, n_samples=100_000, seed=0))]
fn sampling_check<'py>(
    py: Python<'py>,
    group: &FundGroup,
    start: usize,
    end: usize,
    n_samples: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    group.sampling_check(py, start, end, n_samples, seed)
}

#[pymodule]
pub fn fundindex(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<FundGroup>()?;
    m.add_function(wrap_pyfunction!(verify_fairness, m)?)?;
    m.add_function(wrap_pyfunction!(demo, m)?)?;
    m.add_function(wrap_pyfunction!(axiom_suite, m)?)?;
    m.add_function(wrap_pyfunction!(sampling_check, m)?)?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
