//! Command implementations and output records for the `chbound` binary.
//!
//! Every command returns an [`OutputRecord`], rendered as one JSON object
//! or as CSV. Floats are written in shortest round-trip form, so a value
//! parsed back from either format is bit-identical to the computed one.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chbound_core::{
    build_delta, build_nsite_ch, comparison_eta_grid, critical_eta, critical_eta_limit, delta_vs_eigen_ratio,
    joint_probability, k_value, lhv_certify, violation_scan, DeltaParams, MeasurementContext, OutcomePattern,
    SearchGrid, Setting,
};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

/// Largest `n_max` accepted by `bounds`.
pub const MAX_BOUNDS_N: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] chbound_core::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Fields are declared in alphabetical order so that the serialized
/// object matches a sorted-key re-serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub results: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    pub version: u32,
}

impl OutputRecord {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            results: BTreeMap::new(),
            table: None,
            version: FORMAT_VERSION,
        }
    }

    fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    fn result(&mut self, key: impl Into<String>, value: f64) {
        self.results.insert(key.into(), positive_zero(value));
    }

    fn set_table(&mut self, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.table = Some(Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: rows
                .into_iter()
                .map(|row| row.into_iter().map(positive_zero).collect())
                .collect(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records hold only finite numbers and strings")
    }

    /// The table if there is one, otherwise the results as a single
    /// header row and a single value row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.table {
            Some(table) => {
                out.push_str(&table.columns.join(","));
                out.push('\n');
                for row in &table.rows {
                    let cells: Vec<_> = row.iter().map(|v| format_number(*v)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            None => {
                let keys: Vec<_> = self.results.keys().map(String::as_str).collect();
                let values: Vec<_> = self.results.values().map(|v| format_number(*v)).collect();
                let _ = writeln!(out, "{}", keys.join(","));
                let _ = writeln!(out, "{}", values.join(","));
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// `-0.0` prints as `-0.0`; a zero residual should not.
fn positive_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Rows `(n, n/(2n-1))` for `n = 2..=n_max`.
pub fn cmd_bounds(n_max: usize) -> Result<OutputRecord> {
    if !(2..=MAX_BOUNDS_N).contains(&n_max) {
        return Err(chbound_core::Error::InvalidN(n_max).into());
    }
    let mut record = OutputRecord::new("bounds").param("n_max", n_max);
    let rows = (2..=n_max)
        .map(|n| Ok(vec![n as f64, critical_eta_limit(n)?]))
        .collect::<std::result::Result<Vec<_>, chbound_core::Error>>()?;
    record.result("limit", 0.5);
    record.set_table(&["n", "critical_eta"], rows);
    Ok(record)
}

/// Probability structure and critical efficiency of `|δ(ε)>`.
pub fn cmd_delta(n: usize, epsilon: f64) -> Result<OutputRecord> {
    // the multi-B check visits 2^n settings at 2^n amplitudes each
    if n > chbound_core::MAX_LHV_SITES {
        return Err(chbound_core::Error::InvalidN(n).into());
    }
    let params = DeltaParams::new(n, epsilon)?;
    let state = build_delta(&params)?;
    let theta = params.theta();
    let k = k_value(&params)?;
    let target = k * (1.0 + epsilon * epsilon);

    let mut marginal_dev: f64 = 0.0;
    let mut one_b_dev: f64 = 0.0;
    let all_one = OutcomePattern::all_one(n)?;
    for site in 0..n {
        let marginal = joint_probability(&state, &params.all_a_context(), &OutcomePattern::all_but(n, site)?)?;
        marginal_dev = marginal_dev.max((marginal - target).abs());
        let mut settings = vec![Setting::A; n];
        settings[site] = Setting::B;
        let one_b = joint_probability(&state, &MeasurementContext::new(settings, theta)?, &all_one)?;
        one_b_dev = one_b_dev.max((one_b - k).abs());
    }
    let mut multi_b: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() >= 2 {
            let settings = (0..n)
                .map(|s| if mask >> s & 1 == 1 { Setting::B } else { Setting::A })
                .collect();
            let p = joint_probability(&state, &MeasurementContext::new(settings, theta)?, &all_one)?;
            multi_b = multi_b.max(p.abs());
        }
    }
    let bound = critical_eta(&state, theta, n)?;

    let mut record = OutputRecord::new("delta").param("n", n).param("epsilon", epsilon);
    record.result("theta", theta);
    record.result("k", k);
    record.result("k_one_plus_eps_sq", target);
    record.result("max_marginal_deviation", marginal_dev);
    record.result("max_one_b_deviation", one_b_dev);
    record.result("max_multi_b_probability", multi_b);
    record.result("critical_eta", bound.critical_eta);
    record.result(
        "critical_eta_expected",
        critical_eta_limit(n)? * (1.0 + epsilon * epsilon),
    );
    record.result("numerator", bound.numerator);
    record.result("denominator", bound.denominator);
    let width = ((1usize << n) - 1).to_string().len();
    let mut max_imag: f64 = 0.0;
    for (i, a) in state.amplitudes().iter().enumerate() {
        record.result(format!("amplitude_{i:0width$}"), a.re);
        max_imag = max_imag.max(a.im.abs());
    }
    record.result("max_amplitude_imag", max_imag);
    Ok(record)
}

#[derive(Debug, Clone)]
pub struct LhvOutcome {
    pub record: OutputRecord,
    pub certified: bool,
}

/// Exhaustive deterministic-strategy certification of the n-site inequality.
pub fn cmd_lhv(n: usize, etas: &[f64]) -> Result<LhvOutcome> {
    if n < 2 {
        return Err(chbound_core::Error::InvalidN(n).into());
    }
    if n > chbound_core::MAX_LHV_SITES {
        return Err(chbound_core::Error::TooManySites {
            n,
            limit: chbound_core::MAX_LHV_SITES,
        }
        .into());
    }
    let report = lhv_certify(&build_nsite_ch(n)?, etas)?;
    let certified = report.certified();
    let mut record = OutputRecord::new("lhv")
        .param("n", n)
        .param("eta", etas.to_vec())
        .param("argmax_strategy_outcomes", report.argmax_strategy.describe());
    record.result("max_residual", report.max_residual);
    record.result("argmax_strategy", report.argmax_strategy.index() as f64);
    record.result("argmax_eta", report.argmax_eta);
    record.result("strategies_checked", report.strategies_checked as f64);
    record.result("certified", if certified { 1.0 } else { 0.0 });
    Ok(LhvOutcome { record, certified })
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return usage("--steps must be at least 1");
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return usage(format!("invalid efficiency range [{lo}, {hi}]"));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + step * i as f64 })
        .collect())
}

/// Top eigenvalue scan over an efficiency range.
pub fn cmd_scan(n: usize, eta_min: f64, eta_max: f64, steps: usize, tol: f64) -> Result<OutputRecord> {
    let etas = linspace(eta_min, eta_max, steps)?;
    if !(tol >= 0.0 && tol.is_finite()) {
        return usage(format!("invalid tolerance {tol}"));
    }
    let grid = SearchGrid::default();
    let mut rows = Vec::with_capacity(etas.len());
    let mut transition = None;
    for &eta in &etas {
        let scan = violation_scan(n, eta, &grid, tol)?;
        if scan.exists && transition.is_none() {
            transition = Some(eta);
        }
        rows.push(vec![
            eta,
            scan.best_theta,
            scan.best_eigenvalue,
            if scan.exists { 1.0 } else { 0.0 },
        ]);
    }
    let mut record = OutputRecord::new("scan")
        .param("n", n)
        .param("eta_min", eta_min)
        .param("eta_max", eta_max)
        .param("steps", steps)
        .param("tol", tol);
    record.result("critical_eta", critical_eta_limit(n)?);
    if let Some(eta) = transition {
        record.result("first_violating_eta", eta);
    }
    record.set_table(&["eta", "best_theta", "best_eigenvalue", "violation"], rows);
    Ok(record)
}

/// Best |δ> violation relative to the best eigenvector violation, per efficiency.
pub fn cmd_compare(n: usize, etas: Option<&[f64]>) -> Result<OutputRecord> {
    if !(2..=3).contains(&n) {
        return usage(format!(
            "compare supports n = 2 or 3 only (got {n}); the eigen comparison grows too costly beyond"
        ));
    }
    let etas = match etas {
        Some(list) if !list.is_empty() => list.to_vec(),
        Some(_) => return usage("--eta list is empty"),
        None => comparison_eta_grid(n, 0.95)?,
    };
    let grid = SearchGrid::default();
    let mut rows = Vec::with_capacity(etas.len());
    for &eta in &etas {
        let r = delta_vs_eigen_ratio(n, eta, &grid)?;
        rows.push(vec![
            eta,
            r.ratio,
            r.delta_violation,
            r.eigen_violation,
            r.best_epsilon,
            r.best_theta,
        ]);
    }
    let ratios = rows.iter().map(|r| r[1]);
    let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let mut record = OutputRecord::new("compare").param("n", n).param("eta", etas);
    record.result("min_ratio", lo);
    record.result("max_ratio", hi);
    record.set_table(
        &[
            "eta",
            "ratio",
            "delta_violation",
            "eigen_violation",
            "best_epsilon",
            "best_theta",
        ],
        rows,
    );
    Ok(record)
}
