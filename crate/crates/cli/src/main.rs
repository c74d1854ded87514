//! `fundindex`: average rates of return for groups of funds from CSV ledgers.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fundindex_core::demo::{run_axiom_demo, run_demo, Demo};
use fundindex_core::fairness::{
    axiom_suite_for, mc_fairness_test, verify_fairness_exact, verify_unit_ratio_identity, AxiomConfig, Property,
};
use fundindex_core::fixtures::{grouping_instance, merger_example_history};
use fundindex_core::indices::{index, merged_fund_return, ra_factors};
use fundindex_core::io::report::percent;
use fundindex_core::io::{export_history, load_axiom_config, load_history, CsvPaths, LoadedHistory, RunConfig};
use fundindex_core::ledger::{ValidationScope, DEFAULT_BALANCE_TOL};
use fundindex_core::scenario::{build_tree, evolve_path, simulate_path, ProcessClass, StrategySpec};
use fundindex_core::{Error, IndexKind, Result};
use serde::Serialize;
use serde_json::json;

use crate::output::{num, opt, Format, Report};

#[derive(Parser)]
#[command(
    name = "fundindex",
    version,
    about = "Average rates of return for groups of investment funds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Inputs {
    /// Per fund and time: units, unit value, optional post-split state and flows.
    #[arg(long)]
    funds: Option<PathBuf>,
    #[arg(long)]
    prices: Option<PathBuf>,
    #[arg(long)]
    holdings: Option<PathBuf>,
    #[arg(long)]
    mergers: Option<PathBuf>,
}

impl Inputs {
    fn load(&self) -> Result<LoadedHistory> {
        load_history(CsvPaths {
            funds: self.funds.as_deref(),
            prices: self.prices.as_deref(),
            holdings: self.holdings.as_deref(),
            mergers: self.mergers.as_deref(),
        })
    }
}

#[derive(Args, Clone, Copy)]
struct Window {
    #[arg(long = "from")]
    from: Option<usize>,
    #[arg(long = "to")]
    to: Option<usize>,
}

impl Window {
    fn resolve(&self, horizon: usize) -> (usize, usize) {
        (self.from.unwrap_or(0), self.to.unwrap_or(horizon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Ra,
    Rpl,
    Rv,
}

impl From<Kind> for IndexKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Ra => IndexKind::Ra,
            Kind::Rpl => IndexKind::Rpl,
            Kind::Rv => IndexKind::Rv,
        }
    }
}

fn kinds(k: Option<Kind>) -> Vec<IndexKind> {
    k.map_or_else(|| IndexKind::ALL.to_vec(), |k| vec![k.into()])
}

#[derive(Subcommand)]
enum Command {
    /// Compute an index over a window.
    Compute {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "ra")]
        index: Kind,
        #[command(flatten)]
        window: Window,
        /// Print the per-period factors of the chain-linked index.
        #[arg(long)]
        decompose: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Check the accounting identities of a history.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        /// Only split/merger conservation and aggregate flows.
        #[arg(long)]
        structural: bool,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Apply the mergers in --mergers and report the merged funds.
    Merge {
        #[command(flatten)]
        inputs: Inputs,
        /// Start of the window for the merged-fund returns.
        #[arg(long = "from", default_value_t = 0)]
        from: usize,
        /// Directory to write the merged history to.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Simulate market paths and fund histories from a TOML configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<u64>,
        /// Directory for the simulated CSVs (one subdirectory per path if more than one).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Verify martingale fairness exactly on the scenario tree of a configuration.
    Fairness {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        index: Option<Kind>,
        #[arg(long)]
        tol: Option<f64>,
        /// Also run a Monte Carlo test with this many paths.
        #[arg(long)]
        paths: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the randomized property suite.
    Axioms {
        /// TOML file with an [axioms] table.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        instances: Option<usize>,
        /// Restrict to some properties (p1..p8); repeatable.
        #[arg(long = "property")]
        properties: Vec<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Reproduce a worked example on embedded data.
    Demo {
        #[arg(value_parser = parse_demo)]
        selector: Demo,
        /// Write the example's CSV inputs to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn parse_demo(s: &str) -> std::result::Result<Demo, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What a command produced, and whether its checks passed.
struct Outcome {
    report: Report,
    format: Format,
    passed: bool,
    /// Printed to stderr when the checks fail.
    messages: Vec<String>,
}

impl Outcome {
    fn ok(report: Report, format: Format) -> Self {
        Self {
            report,
            format,
            passed: true,
            messages: Vec::new(),
        }
    }
}

fn class_name(c: ProcessClass) -> &'static str {
    match c {
        ProcessClass::Martingale => "martingale",
        ProcessClass::Submartingale => "submartingale",
        ProcessClass::Supermartingale => "supermartingale",
        ProcessClass::None => "none",
    }
}

fn compute(inputs: &Inputs, kind: IndexKind, window: Window, decompose: bool, format: Format) -> Result<Outcome> {
    let loaded = inputs.load()?;
    let h = &loaded.history;
    let (s, t) = window.resolve(h.horizon());
    if s > t {
        return Err(Error::InvalidModel(format!("--from {s} is after --to {t}")));
    }
    let value = index(h, kind, s, t)?;
    if !decompose {
        let body = json!({ "index": kind, "from": s, "to": t, "value": value, "percent": percent(value) });
        let mut r = Report::new("compute", vec!["index", "from", "to", "value", "percent"], &body)?;
        r.row(vec![
            kind.to_string(),
            s.to_string(),
            t.to_string(),
            num(value),
            percent(value),
        ]);
        return Ok(Outcome::ok(r, format));
    }
    if kind != IndexKind::Ra {
        return Err(Error::InvalidModel("--decompose applies to --index ra only".into()));
    }
    let factors = ra_factors(h, s, t)?;
    let body = json!({ "index": kind, "from": s, "to": t, "value": value, "factors": factors });
    let mut r = Report::new("compute", vec!["period", "fund", "weight", "return", "factor"], &body)?;
    for f in &factors {
        for ((id, w), ret) in f.funds.iter().zip(&f.weights).zip(&f.returns) {
            r.row(vec![
                f.period.to_string(),
                id.to_string(),
                num(*w),
                num(*ret),
                num(f.factor),
            ]);
        }
    }
    Ok(Outcome::ok(r, format))
}

#[derive(Serialize)]
struct Failure {
    equation: &'static str,
    fund: Option<String>,
    time: usize,
    residual: f64,
    location: String,
}

fn validate(inputs: &Inputs, structural: bool, tol: Option<f64>, format: Format) -> Result<Outcome> {
    let tol = tol.unwrap_or(DEFAULT_BALANCE_TOL);
    if !(tol > 0.0) {
        return Err(Error::InvalidModel("--tol must be positive".into()));
    }
    let scope = if structural {
        ValidationScope::Structural
    } else {
        ValidationScope::Full
    };
    if scope == ValidationScope::Full && (inputs.prices.is_none() || inputs.holdings.is_none()) {
        return Err(Error::MissingData(
            "full validation needs --prices and --holdings (use --structural otherwise)".into(),
        ));
    }
    let loaded = inputs.load()?;
    let report = loaded.history.validate_balance(scope, tol)?;
    let file = &loaded.source.file;
    let failures: Vec<Failure> = report
        .failures()
        .map(|r| Failure {
            equation: r.equation.name(),
            fund: r.fund.as_ref().map(|f| f.to_string()),
            time: r.time,
            residual: r.value,
            location: match r.fund.as_ref().and_then(|f| loaded.source.line(f, r.time)) {
                Some(line) => format!("{file}:{line}"),
                None => format!("{file}: time {}", r.time),
            },
        })
        .collect();
    let messages = failures
        .iter()
        .map(|f| {
            format!(
                "{}: {} residual {:.3e} exceeds {tol:e} (fund {}, time {})",
                f.location,
                f.equation,
                f.residual,
                f.fund.as_deref().unwrap_or("all"),
                f.time
            )
        })
        .collect();
    let passed = report.passed();
    let body = json!({ "passed": passed, "report": report, "failures": failures });
    let mut r = Report::new("validate", vec!["equation", "fund", "time", "residual", "pass"], &body)?;
    for res in &report.residuals {
        r.row(vec![
            res.equation.name().to_string(),
            opt(res.fund.as_ref()),
            res.time.to_string(),
            num(res.value),
            (res.value < tol).to_string(),
        ]);
    }
    Ok(Outcome {
        report: r,
        format,
        passed,
        messages,
    })
}

fn merge(inputs: &Inputs, from: usize, out: Option<&Path>, format: Format) -> Result<Outcome> {
    if inputs.mergers.is_none() {
        return Err(Error::MissingData("merge needs --mergers".into()));
    }
    let loaded = inputs.load()?;
    let h = &loaded.history;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for m in h.mergers() {
        let e = &m.event;
        let merged = (from < e.time)
            .then(|| merged_fund_return(h, &e.survivor, &e.absorbed, from, e.time))
            .transpose()?;
        table.push(vec![
            e.absorbed.to_string(),
            e.survivor.to_string(),
            e.time.to_string(),
            num(e.post_units),
            num(m.post_value),
            from.to_string(),
            opt(merged),
        ]);
        rows.push(json!({
            "absorbed": e.absorbed, "survivor": e.survivor, "time": e.time,
            "post_units": e.post_units, "post_value": m.post_value,
            "from": from, "merged_return": merged,
        }));
    }
    let written = match out {
        Some(dir) => export_history(h, dir)?,
        None => Vec::new(),
    };
    let mut r = Report::new(
        "merge",
        vec![
            "absorbed",
            "survivor",
            "time",
            "post_units",
            "post_value",
            "from",
            "merged_return",
        ],
        &json!({ "mergers": rows, "written": written }),
    )?;
    table.into_iter().for_each(|row| r.row(row));
    Ok(Outcome::ok(r, format))
}

fn simulate(
    config: &Path,
    seed: Option<u64>,
    paths: Option<u64>,
    out: Option<&Path>,
    format: Format,
) -> Result<Outcome> {
    let cfg = RunConfig::load(config)?;
    let model = cfg.model()?;
    let policy = cfg.policy()?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let n = paths.or(cfg.n_paths).unwrap_or(1);
    if n == 0 {
        return Err(Error::InvalidModel("--paths must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for p in 0..n {
        let market = simulate_path(&model, seed, p);
        let h = evolve_path(&market, &policy.initial, &policy.root, &policy.rest)?;
        let t = h.horizon();
        let values: Vec<f64> = IndexKind::ALL
            .iter()
            .map(|&k| index(&h, k, 0, t))
            .collect::<Result<_>>()?;
        if let Some(dir) = out {
            let target = if n == 1 {
                dir.to_path_buf()
            } else {
                dir.join(format!("path_{p}"))
            };
            export_history(&h, &target)?;
        }
        table.push(vec![p.to_string(), num(values[0]), num(values[1]), num(values[2])]);
        rows.push(json!({ "path": p, "ra": values[0], "rpl": values[1], "rv": values[2] }));
    }
    let mut r = Report::new(
        "simulate",
        vec!["path", "ra", "rpl", "rv"],
        &json!({ "seed": seed, "n_paths": n, "horizon": model.horizon, "paths": rows }),
    )?;
    table.into_iter().for_each(|row| r.row(row));
    Ok(Outcome::ok(r, format))
}

fn fairness(
    config: &Path,
    kind: Option<Kind>,
    tol: Option<f64>,
    paths: Option<u64>,
    seed: Option<u64>,
    format: Format,
) -> Result<Outcome> {
    let cfg = RunConfig::load(config)?;
    let tol = tol.or(cfg.tol).unwrap_or(1e-9);
    if !(tol > 0.0) {
        return Err(Error::InvalidModel("--tol must be positive".into()));
    }
    let model = cfg.model()?;
    let policy = cfg.policy()?;
    let tree = build_tree(&model)?;
    let spec = StrategySpec::with_root(&tree, policy.root.clone(), policy.rest.clone());
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let mut verdicts = Vec::new();
    let mut table = Vec::new();
    for k in kinds(kind) {
        let v = verify_fairness_exact(&tree, &spec, &policy.initial, k, tol)?;
        let mc = match paths {
            Some(n) => Some(mc_fairness_test(&model, &policy, k, n, seed)?),
            None => None,
        };
        table.push(vec![
            k.to_string(),
            class_name(v.classification).to_string(),
            num(v.max_violation),
            opt(v.witness),
            num(v.witness_drift),
            num(v.min_drift),
            num(v.max_drift),
            opt(mc.as_ref().map(|m| m.max_abs_z())),
        ]);
        verdicts.push(json!({ "verdict": v, "monte_carlo": mc }));
    }
    let unit_ratio = verify_unit_ratio_identity(&tree, &spec, &policy.initial, tol)?;
    let mut r = Report::new(
        "fairness",
        vec![
            "index",
            "classification",
            "max_violation",
            "witness",
            "witness_drift",
            "min_drift",
            "max_drift",
            "mc_max_abs_z",
        ],
        &json!({
            "drift": model.drift_class(tol),
            "nodes": tree.len(),
            "seed": seed,
            "verdicts": verdicts,
            "unit_ratio": unit_ratio,
        }),
    )?;
    table.into_iter().for_each(|row| r.row(row));
    Ok(Outcome::ok(r, format))
}

fn axioms(
    config: Option<&Path>,
    seed: Option<u64>,
    instances: Option<usize>,
    properties: &[String],
    format: Format,
) -> Result<Outcome> {
    let mut cfg = config.map_or_else(|| Ok(AxiomConfig::default()), load_axiom_config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = instances {
        cfg.instances = n;
    }
    let props = if properties.is_empty() {
        Property::ALL.to_vec()
    } else {
        properties
            .iter()
            .map(|p| p.parse())
            .collect::<Result<Vec<Property>>>()?
    };
    let report = axiom_suite_for(&cfg, &props)?;
    let mut r = Report::new(
        "axioms",
        vec![
            "property",
            "index",
            "instances",
            "skipped",
            "failures",
            "passed",
            "worst_residual",
            "counterexample_seed",
        ],
        &report,
    )?;
    let mut messages = Vec::new();
    for res in &report.results {
        r.row(vec![
            format!("{:?}", res.property),
            res.kind.to_string(),
            res.instances.to_string(),
            res.skipped.to_string(),
            res.failures.to_string(),
            res.passed.to_string(),
            num(res.worst_residual),
            opt(res.counterexample.as_ref().map(|c| c.instance_seed)),
        ]);
        if res.kind == IndexKind::Ra && !res.passed {
            let detail = res.counterexample.as_ref().map_or(String::new(), |c| c.detail.clone());
            messages.push(format!("{:?} fails for ra: {detail}", res.property));
        }
    }
    let passed = messages.is_empty();
    Ok(Outcome {
        report: r,
        format,
        passed,
        messages,
    })
}

fn demo(
    selector: Demo,
    out: Option<&Path>,
    seed: Option<u64>,
    instances: Option<usize>,
    format: Format,
) -> Result<Outcome> {
    let report = if selector == Demo::Axioms && (seed.is_some() || instances.is_some()) {
        let mut cfg = AxiomConfig::default();
        cfg.seed = seed.unwrap_or(cfg.seed);
        cfg.instances = instances.unwrap_or(cfg.instances);
        run_axiom_demo(&cfg)?
    } else {
        run_demo(selector)?
    };
    let written = match (out, selector) {
        (Some(dir), Demo::Merger) => export_history(&merger_example_history()?, dir)?,
        (Some(dir), Demo::Grouping) => export_history(&grouping_instance(4.19e6)?, dir)?,
        (Some(_), _) => {
            return Err(Error::InvalidModel(format!(
                "demo {selector} has no input files to export"
            )))
        }
        (None, _) => Vec::new(),
    };
    let messages = report
        .checks
        .iter()
        .filter(|c| c.pass == Some(false))
        .map(|c| format!("{}: computed {} expected {}", c.name, c.computed, opt(c.expected)))
        .collect();
    let passed = report.passed;
    let mut r = Report::new(
        "demo",
        vec!["check", "computed", "percent", "expected", "tolerance", "pass", "note"],
        &json!({ "demo": report, "written": written }),
    )?;
    for c in &report.checks {
        r.row(vec![
            c.name.clone(),
            num(c.computed),
            c.percent.clone(),
            opt(c.expected),
            opt(c.tolerance),
            opt(c.pass),
            c.note.clone().unwrap_or_default(),
        ]);
    }
    Ok(Outcome {
        report: r,
        format,
        passed,
        messages,
    })
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Compute {
            inputs,
            index,
            window,
            decompose,
            format,
        } => compute(&inputs, index.into(), window, decompose, format),
        Command::Validate {
            inputs,
            structural,
            tol,
            format,
        } => validate(&inputs, structural, tol, format),
        Command::Merge {
            inputs,
            from,
            out,
            format,
        } => merge(&inputs, from, out.as_deref(), format),
        Command::Simulate {
            config,
            seed,
            paths,
            out,
            format,
        } => simulate(&config, seed, paths, out.as_deref(), format),
        Command::Fairness {
            config,
            index,
            tol,
            paths,
            seed,
            format,
        } => fairness(&config, index, tol, paths, seed, format),
        Command::Axioms {
            config,
            seed,
            instances,
            properties,
            format,
        } => axioms(config.as_deref(), seed, instances, &properties, format),
        Command::Demo {
            selector,
            out,
            seed,
            instances,
            format,
        } => demo(selector, out.as_deref(), seed, instances, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            if let Err(e) = outcome.report.emit(outcome.format, std::io::stdout().lock()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            for m in &outcome.messages {
                eprintln!("{m}");
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
