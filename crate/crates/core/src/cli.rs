//! Command-line front end.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{
    analyze_with_precision, estimate_from_report, exact_coefficients, exact_cumulative, expectation_slope_with_precision,
    AsymptoticsError, SingularityKind,
};
use crate::classes::{ClassError, ClassSpec, Parameter};
use crate::oeis::{catalog_rows, fetch, refresh, run_catalog, CatalogReport, FetchConfig, OeisError, Table};
use crate::oracle::{count_and_accumulate_with_bound, OracleError, DEFAULT_SAFETY_BOUND};
use crate::real::Real;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_OUT_OF_SCOPE: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const EXIT_NETWORK: i32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "flowertrees", version, about = "Enumerate and analyse trees with flowers")]
pub struct Cli {
    /// Number of coefficients is order + 1.
    #[arg(long, global = true, default_value_t = 64)]
    pub order: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Allow downloads from the OEIS.
    #[arg(long, global = true)]
    pub net: bool,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 96)]
    pub precision_bits: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients of f, or of the cumulative function of a parameter.
    Coeffs {
        spec: String,
        #[arg(long)]
        param: Option<String>,
    },
    /// Dominant singularity and asymptotic estimate against exact values.
    Asym {
        spec: String,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        samples: Vec<usize>,
    },
    /// Linear slope of the expected parameter value.
    Expect {
        spec: String,
        #[arg(long, default_value = "petals")]
        param: String,
    },
    /// Brute-force enumeration against the series.
    OracleCheck {
        spec: String,
        #[arg(long, default_value_t = 10)]
        max_size: usize,
    },
    /// Reproduce the catalog of OEIS identifications.
    Catalog {
        #[arg(long, value_delimiter = ',')]
        table: Vec<String>,
    },
    /// Download b-files again; without ids, every id in the catalog.
    Refresh { ids: Vec<String> },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    OutOfScope(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Network(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::OutOfScope(_) => EXIT_OUT_OF_SCOPE,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            CliError::Network(_) => EXIT_NETWORK,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

impl From<ClassError> for CliError {
    fn from(e: ClassError) -> Self {
        match e {
            ClassError::Parse { .. } => CliError::Parse(e.to_string()),
            ClassError::Mismatch { .. } => CliError::Mismatch(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::OutOfScopeAnalysis(_) | AsymptoticsError::NonSimpleDominantRoot(_) => CliError::OutOfScope(e.to_string()),
            AsymptoticsError::Class(c) => c.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<OeisError> for CliError {
    fn from(e: OeisError) -> Self {
        match e {
            OeisError::Network(_) | OeisError::CacheMiss(_) => CliError::Network(e.to_string()),
            OeisError::MalformedId(_) => CliError::Parse(e.to_string()),
            OeisError::Class(c) => c.into(),
            OeisError::Asymptotics(a) => a.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Other(e.to_string())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SingularityRecord {
    pub kind: String,
    pub zeta_or_alpha: String,
    pub period: usize,
    pub residue: usize,
    pub simple: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub n: usize,
    pub exact: String,
    pub estimate: String,
    pub ratio: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub constant: String,
    pub growth_base: String,
    pub polynomial_exponent: String,
    pub n0: usize,
    pub samples: Vec<SampleRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRecord {
    pub c: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display: Option<String>,
    pub empirical: String,
    pub empirical_index: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub size: usize,
    pub oracle: [String; 3],
    pub series: [String; 3],
    pub equal: bool,
}

/// Everything a command reports; absent parts are omitted from JSON.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singularity: Option<SingularityRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation: Option<ExpectationRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<OracleRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<CatalogReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refreshed: Vec<String>,
}

impl OutputRecord {
    fn new(command: &str) -> Self {
        OutputRecord { command: command.to_string(), ..OutputRecord::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain record")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.coeffs.is_empty() {
            out += "n,coefficient\n";
            for (n, c) in self.coeffs.iter().enumerate() {
                let _ = writeln!(out, "{n},{c}");
            }
        }
        if let Some(e) = &self.estimate {
            out += "n,exact,estimate,ratio\n";
            for s in &e.samples {
                let _ = writeln!(out, "{},{},{},{}", s.n, s.exact, s.estimate, s.ratio);
            }
        }
        if let Some(x) = &self.expectation {
            out += "c,display,empirical,n\n";
            let _ = writeln!(out, "{},{},{},{}", x.c, x.display.as_deref().unwrap_or(""), x.empirical, x.empirical_index);
        }
        if !self.oracle.is_empty() {
            out += "size,oracle_count,oracle_petals,oracle_edges,series_count,series_petals,series_edges,equal\n";
            for r in &self.oracle {
                let _ = writeln!(out, "{},{},{},{}", r.size, r.oracle.join(","), r.series.join(","), r.equal);
            }
        }
        if let Some(c) = &self.catalog {
            out += "table,spec,column,id,flags,status\n";
            for e in &c.entries {
                let _ = writeln!(out, "{},{},{},{},{},{:?}", e.table, e.spec, e.column, e.id.as_deref().unwrap_or(""), e.flags, e.status);
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        if let Some(s) = &self.spec {
            let _ = writeln!(out, "spec: {s}");
        }
        if let Some(p) = &self.parameter {
            let _ = writeln!(out, "parameter: {p}");
        }
        if !self.coeffs.is_empty() {
            let _ = writeln!(out, "coefficients: {}", self.coeffs.join(", "));
        }
        if let Some(s) = &self.singularity {
            let _ = writeln!(out, "singularity: {} at {} (period {}, residue {}, simple {})", s.kind, s.zeta_or_alpha, s.period, s.residue, s.simple);
        }
        if let Some(e) = &self.estimate {
            let _ = writeln!(
                out,
                "estimate: {} * n^{} * {}^n  (exact coefficients positive from n = {})",
                e.constant, e.polynomial_exponent, e.growth_base, e.n0
            );
            for s in &e.samples {
                let _ = writeln!(out, "  n = {:>5}  exact/estimate = {}", s.n, s.ratio);
            }
        }
        if let Some(x) = &self.expectation {
            let _ = writeln!(out, "slope c: {}", x.c);
            if let Some(d) = &x.display {
                let _ = writeln!(out, "closed formula: {d}");
            }
            let _ = writeln!(out, "empirical at n = {}: {}", x.empirical_index, x.empirical);
        }
        if !self.oracle.is_empty() {
            let _ = writeln!(out, "size  oracle (count, petals, edges)  series (count, petals, edges)  equal");
            for r in &self.oracle {
                let _ = writeln!(out, "{:>4}  {:<30}  {:<30}  {}", r.size, r.oracle.join(", "), r.series.join(", "), r.equal);
            }
        }
        if let Some(c) = &self.catalog {
            out += &c.to_text();
            let _ = writeln!(out, "{}", if c.passed() { "all identifications reproduced" } else { "some identifications failed" });
        }
        for id in &self.refreshed {
            let _ = writeln!(out, "refreshed {id}");
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json() + "\n",
            Format::Csv => self.to_csv(),
            Format::Table => self.to_table(),
        }
    }
}

fn parse_spec(s: &str) -> Result<ClassSpec, CliError> {
    Ok(s.parse::<ClassSpec>()?)
}

fn parse_param(s: &str) -> Result<Parameter, CliError> {
    s.parse::<Parameter>().map_err(|e| CliError::Parse(e.to_string()))
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn digits(x: &Real) -> String {
    format!("{:.12e}", x.to_f64())
}

fn fetch_config(cli: &Cli) -> FetchConfig {
    let mut config = FetchConfig { network: cli.net, ..FetchConfig::default() };
    if let Some(dir) = &cli.cache_dir {
        config.cache_dir = dir.clone();
    }
    config
}

pub fn cmd_coeffs(spec: &str, order: usize, param: Option<&str>) -> Result<OutputRecord, CliError> {
    let s = parse_spec(spec)?;
    let mut rec = OutputRecord::new("coeffs");
    rec.spec = Some(s.to_string());
    rec.order = Some(order);
    let coeffs = match param {
        None => exact_coefficients(&s, order)?,
        Some(p) => {
            let p = parse_param(p)?;
            rec.parameter = Some(p.to_string());
            exact_cumulative(&s, p, order)?
        }
    };
    rec.coeffs = strings(&coeffs);
    Ok(rec)
}

pub fn cmd_asym(spec: &str, samples: &[usize], bits: usize) -> Result<OutputRecord, CliError> {
    let s = parse_spec(spec)?;
    let report = analyze_with_precision(&s, bits)?;
    let est = estimate_from_report(&s, &report)?;
    let mut rec = OutputRecord::new("asym");
    rec.spec = Some(s.to_string());
    rec.singularity = Some(SingularityRecord {
        kind: match report.kind {
            SingularityKind::SqrtBranch => "square-root branch point".to_string(),
            SingularityKind::Pole(r) => format!("pole of order {r}"),
            SingularityKind::PolynomialGrowth(k) => format!("polynomial growth of degree {k}"),
        },
        zeta_or_alpha: report.zeta_or_alpha.to_string(),
        period: report.period,
        residue: report.residue,
        simple: report.simple,
    });
    let ns: Vec<usize> = samples
        .iter()
        .map(|&n| n - (n + est.period - est.residue) % est.period)
        .filter(|&n| n >= est.n0)
        .collect();
    let top = ns.iter().copied().max().unwrap_or(0);
    let exact = exact_coefficients(&s, top)?;
    let prec = report.zeta_or_alpha.precision();
    let samples = ns
        .iter()
        .map(|&n| {
            let e = est.estimate(n);
            let ratio = Real::from_bigint(&exact[n], prec).div(&e);
            SampleRecord { n, exact: exact[n].to_string(), estimate: digits(&e), ratio: format!("{:.10}", ratio.to_f64()) }
        })
        .collect();
    rec.estimate = Some(EstimateRecord {
        constant: est.constant.to_string(),
        growth_base: est.growth_base.to_string(),
        polynomial_exponent: format!("{}", est.polynomial_exponent()),
        n0: est.n0,
        samples,
    });
    Ok(rec)
}

pub fn cmd_expect(spec: &str, param: &str, bits: usize) -> Result<OutputRecord, CliError> {
    let s = parse_spec(spec)?;
    let p = parse_param(param)?;
    let slope = expectation_slope_with_precision(&s, p, bits)?;
    let mut rec = OutputRecord::new("expect");
    rec.spec = Some(s.to_string());
    rec.parameter = Some(p.to_string());
    rec.expectation = Some(ExpectationRecord {
        c: slope.c.to_string(),
        display: slope.display.map(|d| d.to_string()),
        empirical: format!("{:.10}", slope.empirical),
        empirical_index: slope.empirical_index,
    });
    Ok(rec)
}

pub fn cmd_oracle_check(spec: &str, max_size: usize) -> Result<OutputRecord, CliError> {
    let s = parse_spec(spec)?;
    let totals = count_and_accumulate_with_bound(&s, max_size, DEFAULT_SAFETY_BOUND.max(max_size))?;
    let f = exact_coefficients(&s, max_size)?;
    let chi = exact_cumulative(&s, Parameter::Petals, max_size)?;
    let xi = exact_cumulative(&s, Parameter::PetalEdges, max_size)?;
    let mut rec = OutputRecord::new("oracle-check");
    rec.spec = Some(s.to_string());
    rec.order = Some(max_size);
    rec.oracle = (0..=max_size)
        .map(|n| {
            let t = &totals[n];
            let oracle = [t.count.to_string(), t.petals.to_string(), t.petal_edges.to_string()];
            let series = [f[n].to_string(), chi[n].to_string(), xi[n].to_string()];
            OracleRow { size: n, equal: oracle == series, oracle, series }
        })
        .collect();
    Ok(rec)
}

pub fn cmd_catalog(tables: &[Table], config: &FetchConfig) -> Result<OutputRecord, CliError> {
    let mut rec = OutputRecord::new("catalog");
    rec.catalog = Some(run_catalog(tables, config)?);
    Ok(rec)
}

pub fn cmd_refresh(ids: &[String], config: &FetchConfig) -> Result<OutputRecord, CliError> {
    let mut ids: Vec<String> = if ids.is_empty() {
        let mut all: Vec<String> = catalog_rows()
            .iter()
            .flat_map(|r| r.cells.iter())
            .filter_map(|c| match c {
                crate::oeis::Cell::Ids(v) => Some(v.iter().map(|i| i.id.clone()).collect::<Vec<_>>()),
                _ => None,
            })
            .flatten()
            .collect();
        all.sort();
        all.dedup();
        all
    } else {
        ids.to_vec()
    };
    ids.retain(|i| !i.is_empty());
    let mut rec = OutputRecord::new("refresh");
    for id in ids {
        if config.network {
            refresh(&id, config)?;
        } else {
            fetch(&id, config)?;
        }
        rec.refreshed.push(id);
    }
    Ok(rec)
}

/// Run a parsed command; the record is returned even when it signals a mismatch.
pub fn execute(cli: &Cli) -> Result<(OutputRecord, bool), CliError> {
    let bits = cli.precision_bits;
    let rec = match &cli.command {
        Command::Coeffs { spec, param } => cmd_coeffs(spec, cli.order, param.as_deref())?,
        Command::Asym { spec, samples } => cmd_asym(spec, samples, bits)?,
        Command::Expect { spec, param } => cmd_expect(spec, param, bits)?,
        Command::OracleCheck { spec, max_size } => cmd_oracle_check(spec, *max_size)?,
        Command::Catalog { table } => {
            let tables = if table.is_empty() {
                Table::ALL.to_vec()
            } else {
                table.iter().map(|t| t.parse::<Table>().map_err(CliError::Parse)).collect::<Result<_, _>>()?
            };
            cmd_catalog(&tables, &fetch_config(cli))?
        }
        Command::Refresh { ids } => cmd_refresh(ids, &fetch_config(cli))?,
    };
    let ok = rec.oracle.iter().all(|r| r.equal) && rec.catalog.as_ref().is_none_or(|c| c.passed());
    Ok((rec, ok))
}

/// Parse arguments, run, print, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok((rec, ok)) => {
            print!("{}", rec.render(cli.format));
            if ok {
                0
            } else {
                EXIT_MISMATCH
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_coefficients() {
        let rec = cmd_coeffs("T*:K=1:N=1:flower=plane", 8, None).unwrap();
        assert_eq!(rec.coeffs, ["0", "1", "1", "2", "3", "5", "8", "13", "21"]);
        let rec = cmd_coeffs("R:K=1:N=2:flower=plane", 5, None).unwrap();
        assert_eq!(rec.coeffs, ["1", "1", "2", "2", "3", "3"]);
        let rec = cmd_coeffs("R:K=1:N=2:flower=plane", 0, None).unwrap();
        assert_eq!(rec.coeffs, ["1"]);
    }

    #[test]
    fn json_round_trip() {
        let rec = cmd_asym("R:K=all:N=all:flower=plane", &[50, 100], 96).unwrap();
        let text = rec.to_json();
        let back: OutputRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["flowertrees", "coeffs", "Q:K=1"]), EXIT_PARSE);
        assert_eq!(run(["flowertrees", "asym", "R:K=1:N=all:flower=nonplane"]), EXIT_OUT_OF_SCOPE);
        assert_eq!(run(["flowertrees", "--format", "csv", "coeffs", "R:K=1:N=1", "--order", "3"]), 0);
    }
}
