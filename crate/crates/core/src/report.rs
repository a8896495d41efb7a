//! Scenario configuration, execution and output.
//!
//! Output bytes are a pure function of the scientific part of [`RunConfig`]:
//! sampling goes through [`crate::montecarlo`], every reduction is sequential
//! over an ordered sample vector, and numbers are printed in shortest
//! round-trip form. The worker count and the output path never reach the
//! output.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bound::{evaluate_curve, BoundCurve, BoundInputs, DiscrepancySource, TailModel};
use crate::chaos::{
    exact_cdf_q2_rank1, fourth_moment_from_samples, moment_q2, stein_discrepancy_upper, DiagonalChaosSpec, McPlan,
};
use crate::empirical::{certify, discrepancy_curve, CertifyReport, EmpiricalCdf, Slack};
use crate::error::{Error, Result};
use crate::expfun::{self, ExpFunParams, PathConfig};
use crate::gaussian::SQRT_2PI;
use crate::stein::{center_derivative_bound, center_value_bound, stein_unchecked, LEMMA_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SteinCheck,
    ChaosCompare,
    #[serde(rename = "expfun-compare")]
    ExpFunCompare,
    BoundOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TailChoice {
    Exact,
    Markov,
    Major,
    Expfun,
    Unit,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl ZGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        let last = (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + span * i as f64 / last).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Config(format!("{what} bounds must be finite")));
        }
        if self.count == 0 {
            return Err(Error::Config(format!("{what} count must be >= 1")));
        }
        if self.min > self.max {
            return Err(Error::Config(format!(
                "{what} min ({}) must not exceed max ({})",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub samples: usize,
    pub z_grid: ZGrid,
    /// x-grid of the stein-check scenario
    pub x_grid: ZGrid,
    pub q: u32,
    pub alphas: Vec<f64>,
    pub c_q: Option<f64>,
    pub a: f64,
    pub t: f64,
    pub n_steps: usize,
    pub tail: TailChoice,
    pub markov_p: f64,
    pub markov_moment: Option<f64>,
    pub mean_abs: f64,
    pub discrepancy: Option<f64>,
    pub slack_k: f64,
    #[serde(skip)]
    pub output: PathBuf,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub workers: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(
    name = "nubound",
    version,
    about = "Non-uniform Berry-Esseen bounds: evaluation and Monte Carlo certification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate f_z, f'_z and the ODE residual; check the lemma estimates.
    SteinCheck(Flags),
    /// Compare a sampled chaos against the normal law and its bound.
    ChaosCompare(Flags),
    /// Compare the standardized exponential functional against its bound.
    #[command(name = "expfun-compare")]
    ExpFunCompare(Flags),
    /// Evaluate a bound curve without sampling.
    BoundOnly(Flags),
}

/// Flags shared by all subcommands. Every flag may also be given as a key of
/// the `--config` JSON document; flags win.
#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// JSON file with keys mirroring the flags
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_max: Option<f64>,
    #[arg(long)]
    pub z_count: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_count: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub slack_k: Option<f64>,
    #[arg(long)]
    pub q: Option<u32>,
    /// comma-separated coefficients
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub c_q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub tail: Option<TailChoice>,
    #[arg(long)]
    pub markov_p: Option<f64>,
    #[arg(long)]
    pub markov_moment: Option<f64>,
    #[arg(long)]
    pub mean_abs: Option<f64>,
    #[arg(long)]
    pub discrepancy: Option<f64>,
    /// worker threads (does not affect output)
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Flags {
    /// Fills every unset field from `base`.
    fn or(self, base: Flags) -> Flags {
        Flags {
            config: self.config,
            seed: self.seed.or(base.seed),
            samples: self.samples.or(base.samples),
            z_min: self.z_min.or(base.z_min),
            z_max: self.z_max.or(base.z_max),
            z_count: self.z_count.or(base.z_count),
            x_min: self.x_min.or(base.x_min),
            x_max: self.x_max.or(base.x_max),
            x_count: self.x_count.or(base.x_count),
            output: self.output.or(base.output),
            format: self.format.or(base.format),
            slack_k: self.slack_k.or(base.slack_k),
            q: self.q.or(base.q),
            alphas: self.alphas.or(base.alphas),
            c_q: self.c_q.or(base.c_q),
            a: self.a.or(base.a),
            t: self.t.or(base.t),
            n_steps: self.n_steps.or(base.n_steps),
            tail: self.tail.or(base.tail),
            markov_p: self.markov_p.or(base.markov_p),
            markov_moment: self.markov_moment.or(base.markov_moment),
            mean_abs: self.mean_abs.or(base.mean_abs),
            discrepancy: self.discrepancy.or(base.discrepancy),
            workers: self.workers.or(base.workers),
        }
    }
}

/// Parses argv (program name first) into a validated configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    RunConfig::from_cli(cli)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let (scenario, flags) = match cli.command {
            Command::SteinCheck(f) => (Scenario::SteinCheck, f),
            Command::ChaosCompare(f) => (Scenario::ChaosCompare, f),
            Command::ExpFunCompare(f) => (Scenario::ExpFunCompare, f),
            Command::BoundOnly(f) => (Scenario::BoundOnly, f),
        };
        let flags = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                let file: Flags =
                    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                flags.or(file)
            }
            None => flags,
        };
        Self::resolve(scenario, flags)
    }

    fn resolve(scenario: Scenario, f: Flags) -> Result<Self> {
        let (z_min, z_max, z_count) = match scenario {
            Scenario::SteinCheck => (-6.0, 6.0, 49),
            Scenario::ChaosCompare | Scenario::ExpFunCompare => (-5.0, 5.0, 101),
            Scenario::BoundOnly => (-8.0, 8.0, 161),
        };
        let q = f.q.unwrap_or(2);
        let alphas = f.alphas.unwrap_or_else(|| vec![1.0]);
        let t = f.t.unwrap_or(0.1);
        let q2_rank1 = q == 2 && alphas.len() == 1;
        let tail = f.tail.unwrap_or(match scenario {
            Scenario::ExpFunCompare => TailChoice::Expfun,
            _ if q2_rank1 => TailChoice::Exact,
            _ if f.c_q.is_some() => TailChoice::Major,
            _ => TailChoice::Unit,
        });
        let cfg = RunConfig {
            scenario,
            seed: f.seed.unwrap_or(1),
            samples: f.samples.unwrap_or(match scenario {
                Scenario::ExpFunCompare => 200_000,
                _ => 1_000_000,
            }),
            z_grid: ZGrid {
                min: f.z_min.unwrap_or(z_min),
                max: f.z_max.unwrap_or(z_max),
                count: f.z_count.unwrap_or(z_count),
            },
            x_grid: ZGrid {
                min: f.x_min.unwrap_or(-12.0),
                max: f.x_max.unwrap_or(12.0),
                count: f.x_count.unwrap_or(481),
            },
            q,
            alphas,
            c_q: f.c_q,
            a: f.a.unwrap_or(0.0),
            t,
            n_steps: f.n_steps.unwrap_or_else(|| PathConfig::default_for(t).n_steps),
            tail,
            markov_p: f.markov_p.unwrap_or(6.0),
            markov_moment: f.markov_moment,
            mean_abs: f.mean_abs.unwrap_or(0.0),
            discrepancy: f.discrepancy,
            slack_k: f.slack_k.unwrap_or(3.0),
            output: f.output.unwrap_or_else(|| PathBuf::from("-")),
            format: f.format.unwrap_or(Format::Csv),
            workers: f.workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.z_grid.validate("z-grid")?;
        if self.scenario == Scenario::SteinCheck {
            self.x_grid.validate("x-grid")?;
        }
        let sampling = matches!(self.scenario, Scenario::ChaosCompare | Scenario::ExpFunCompare);
        if sampling && self.samples == 0 {
            return Err(Error::Config("--samples must be >= 1".into()));
        }
        if self.q < 2 {
            return Err(Error::Config(format!("--q must be >= 2, got {}", self.q)));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config(
                "--alphas must be a nonempty list of finite numbers".into(),
            ));
        }
        if let Some(c) = self.c_q {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("--c-q must be > 0, got {c}")));
            }
        }
        if !(self.t > 0.0 && self.t.is_finite()) || !self.a.is_finite() {
            return Err(Error::Config(format!(
                "need finite --a and --t > 0, got a = {}, t = {}",
                self.a, self.t
            )));
        }
        if self.n_steps < 2 {
            return Err(Error::Config("--n-steps must be >= 2".into()));
        }
        if !(self.slack_k >= 0.0 && self.slack_k.is_finite()) {
            return Err(Error::Config(format!("--slack-k must be >= 0, got {}", self.slack_k)));
        }
        if !(self.mean_abs >= 0.0 && self.mean_abs.is_finite()) {
            return Err(Error::Config(format!("--mean-abs must be >= 0, got {}", self.mean_abs)));
        }
        if let Some(d) = self.discrepancy {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("--discrepancy must be >= 0, got {d}")));
            }
        }
        if self.tail == TailChoice::Major && self.c_q.is_none() {
            return Err(Error::Config(
                "--tail major needs --c-q (the constant is not known in closed form)".into(),
            ));
        }
        if self.tail == TailChoice::Exact && !(self.q == 2 && self.alphas.len() == 1) {
            return Err(Error::Config(
                "--tail exact is only available for q = 2 with a single coefficient".into(),
            ));
        }
        if self.tail == TailChoice::Empirical && self.scenario == Scenario::BoundOnly {
            return Err(Error::Config(
                "--tail empirical needs samples; not available for bound-only".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cell {
    Num(f64),
    Bool(bool),
    Flags([u8; 3]),
}

impl Cell {
    fn csv(&self) -> String {
        match *self {
            Cell::Num(v) => fmt_num(v),
            Cell::Bool(b) => b.to_string(),
            Cell::Flags(f) => String::from_utf8_lossy(&f).into_owned(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Num(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Flags(f) => json!(String::from_utf8_lossy(&f)),
        }
    }
}

/// Shortest decimal that parses back to the same f64.
pub fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

/// Tabular result of a run plus a summary object.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    summary: Value,
}

impl Table {
    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn summary(&self) -> &Value {
        &self.summary
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        self.rows
            .iter()
            .map(|r| match r[i] {
                Cell::Num(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// `{"scenario", "config", "summary", "columns", "rows"}` in that order;
    /// rows are arrays in column order.
    pub fn to_json(&self, config: &RunConfig) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            scenario: Scenario,
            config: &'a RunConfig,
            summary: &'a Value,
            columns: &'a [&'static str],
            rows: Vec<Vec<Value>>,
        }
        let doc = Doc {
            scenario: config.scenario,
            config,
            summary: &self.summary,
            columns: &self.columns,
            rows: self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub table: Table,
    pub rendered: String,
}

/// Runs the scenario and writes the rendered table to `config.output`
/// (`-` for stdout). Exit code 0 on success, 2 if any bound is violated.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let outcome = execute(config)?;
    write_output(&config.output, &outcome.rendered)?;
    Ok(outcome)
}

/// Like [`run`] without touching the filesystem.
pub fn execute(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let compute = || -> Result<(Table, i32)> {
        match config.scenario {
            Scenario::SteinCheck => stein_check(config),
            Scenario::ChaosCompare => chaos_compare(config),
            Scenario::ExpFunCompare => expfun_compare(config),
            Scenario::BoundOnly => bound_only(config),
        }
    };
    let (table, exit_code) = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(compute)?,
        None => compute()?,
    };
    let rendered = match config.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(config)?,
    };
    Ok(RunOutcome {
        exit_code,
        table,
        rendered,
    })
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        print!("{text}");
        return Ok(());
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Fourth-order finite-difference derivative of f_z at x, taken from the side
/// of the seam that x belongs to.
pub fn finite_difference_derivative(z: f64, x: f64) -> f64 {
    const H: f64 = 1e-3;
    let f = |y: f64| stein_unchecked(z, y).value;
    if (x - z).abs() > 2.0 * H {
        (f(x - 2.0 * H) - 8.0 * f(x - H) + 8.0 * f(x + H) - f(x + 2.0 * H)) / (12.0 * H)
    } else {
        // one-sided five-point stencil; x ≤ z looks left, x > z looks right
        let s = if x <= z { -H } else { H };
        (-25.0 * f(x) + 48.0 * f(x + s) - 36.0 * f(x + 2.0 * s) + 16.0 * f(x + 3.0 * s) - 3.0 * f(x + 4.0 * s))
            / (12.0 * s)
    }
}

fn stein_check(config: &RunConfig) -> Result<(Table, i32)> {
    use rayon::prelude::*;

    let zs = config.z_grid.points();
    let xs = config.x_grid.points();
    let value_cap = 0.25 * SQRT_2PI;
    let per_z: Vec<Vec<Vec<Cell>>> = zs
        .par_iter()
        .map(|&z| {
            xs.iter()
                .map(|&x| {
                    let p = stein_unchecked(z, x);
                    let indicator = if x <= z { 1.0 } else { 0.0 };
                    let fd = finite_difference_derivative(z, x);
                    let residual = (fd - x * p.value - (indicator - crate::gaussian::cdf_unchecked(z))).abs();
                    let tf = |ok: bool| if ok { b'T' } else { b'F' };
                    let global =
                        p.value > 0.0 && p.value <= value_cap + LEMMA_SLACK && p.derivative.abs() <= 1.0 + LEMMA_SLACK;
                    let (cv, cd) = if z > 0.0 && x.abs() <= 0.5 * z {
                        (
                            tf(p.value <= center_value_bound(z) + LEMMA_SLACK),
                            tf(p.derivative.abs() <= center_derivative_bound(z) + LEMMA_SLACK),
                        )
                    } else {
                        (b'-', b'-')
                    };
                    vec![
                        Cell::Num(z),
                        Cell::Num(x),
                        Cell::Num(p.value),
                        Cell::Num(p.derivative),
                        Cell::Num(residual),
                        Cell::Flags([tf(global), cv, cd]),
                    ]
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<Cell>> = per_z.into_iter().flatten().collect();
    let violations = rows
        .iter()
        .filter(|r| matches!(r[5], Cell::Flags(f) if f.contains(&b'F')))
        .count();
    let max_residual = rows
        .iter()
        .filter_map(|r| match r[4] {
            Cell::Num(v) => Some(v),
            _ => None,
        })
        .fold(0.0, f64::max);
    let table = Table {
        columns: vec!["z", "x", "f", "f_prime", "ode_residual", "lemma_flags"],
        rows,
        summary: json!({
            "rows": zs.len() * xs.len(),
            "lemma_violations": violations,
            "max_ode_residual": max_residual,
        }),
    };
    Ok((table, if violations == 0 { 0 } else { 2 }))
}

fn comparison_table(report: &CertifyReport, uniform: f64, summary: Value) -> Table {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::Num(r.z),
                Cell::Num(r.empirical_cdf),
                Cell::Num(r.normal_cdf),
                Cell::Num(r.discrepancy),
                Cell::Num(r.standard_error),
                Cell::Num(r.bound.unwrap_or(f64::NAN)),
                Cell::Num(uniform),
                Cell::Bool(r.violated),
            ]
        })
        .collect();
    Table {
        columns: vec![
            "z",
            "empirical_cdf",
            "normal_cdf",
            "discrepancy",
            "se",
            "bound",
            "uniform_bound",
            "violated",
        ],
        rows,
        summary,
    }
}

fn chaos_spec(config: &RunConfig) -> Result<DiagonalChaosSpec> {
    Ok(DiagonalChaosSpec::new(config.q, config.alphas.clone())?.normalize())
}

/// E|F|^p: exact for q = 2 and even integer p, otherwise from samples.
fn markov_moment(config: &RunConfig, spec: &DiagonalChaosSpec, samples: Option<&[f64]>) -> Result<f64> {
    if let Some(m) = config.markov_moment {
        return Ok(m);
    }
    let p = config.markov_p;
    if spec.q() == 2 && p.fract() == 0.0 && p > 0.0 && (p as u32).is_multiple_of(2) {
        return moment_q2(spec, p as u32);
    }
    match samples {
        Some(s) => Ok(s.iter().map(|v| v.abs().powf(p)).sum::<f64>() / s.len() as f64),
        None => Err(Error::Config("--tail markov needs --markov-moment here".into())),
    }
}

fn tail_model(
    config: &RunConfig,
    spec: Option<&DiagonalChaosSpec>,
    samples: Option<&Arc<EmpiricalCdf>>,
    raw: Option<&[f64]>,
) -> Result<TailModel> {
    Ok(match config.tail {
        TailChoice::Exact => TailModel::exact_cdf(exact_cdf_q2_rank1),
        TailChoice::Markov => {
            let moment = match spec {
                Some(s) => markov_moment(config, s, raw)?,
                None => match (config.markov_moment, raw) {
                    (Some(m), _) => m,
                    (None, Some(r)) => r.iter().map(|v| v.abs().powf(config.markov_p)).sum::<f64>() / r.len() as f64,
                    (None, None) => return Err(Error::Config("--tail markov needs --markov-moment".into())),
                },
            };
            TailModel::markov(config.markov_p, moment)?
        }
        TailChoice::Major => TailModel::major_chaos(config.q, config.c_q.expect("validated"))?,
        TailChoice::Expfun => TailModel::ExpFunTwoSided(ExpFunParams::new(config.a, config.t)?),
        TailChoice::Unit => TailModel::Unit,
        TailChoice::Empirical => TailModel::Empirical(
            samples
                .cloned()
                .ok_or_else(|| Error::Config("--tail empirical needs samples".into()))?,
        ),
    })
}

fn chaos_compare(config: &RunConfig) -> Result<(Table, i32)> {
    let spec = chaos_spec(config)?;
    let samples = spec.sample_many(config.samples, config.seed);
    let m4 = if spec.q() == 2 {
        crate::chaos::fourth_moment(
            &spec,
            McPlan {
                samples: 0,
                seed: config.seed,
            },
        )?
    } else {
        fourth_moment_from_samples(&samples)
    };
    let d = match config.discrepancy {
        Some(d) => crate::chaos::DiscrepancyUpper {
            value: d,
            clamped: false,
        },
        None => stein_discrepancy_upper(spec.q(), m4.value)?,
    };
    let ecdf = Arc::new(EmpiricalCdf::new(samples.clone())?);
    let tail = tail_model(config, Some(&spec), Some(&ecdf), Some(&samples))?;
    let inputs = BoundInputs::new(config.mean_abs, d.value, tail)?.with_source(DiscrepancySource::FourthMoment);
    let grid = config.z_grid.points();
    let bounds = evaluate_curve(&inputs, &grid)?;
    let curve = discrepancy_curve(&ecdf, &grid);
    let report = certify(&curve, &bounds, Slack::StandardErrors(config.slack_k))?;
    let summary = json!({
        "samples": ecdf.len(),
        "fourth_moment": m4.value,
        "fourth_moment_se": m4.standard_error,
        "stein_discrepancy": d.value,
        "discrepancy_clamped": d.clamped,
        "tail": inputs.tail().name(),
        "violations": report.violations,
        "worst_ratio": report.worst_ratio,
    });
    let code = report.exit_code();
    Ok((comparison_table(&report, d.value, summary), code))
}

fn expfun_compare(config: &RunConfig) -> Result<(Table, i32)> {
    let params = ExpFunParams::new(config.a, config.t)?;
    let path = PathConfig::new(config.n_steps, expfun::Scheme::Trapezoid)?;
    let moments = params.moments();
    let standardized = expfun::sample_many(&params, &path, config.samples, config.seed)
        .into_iter()
        .map(|f| expfun::standardize(f, &moments))
        .collect::<Result<Vec<_>>>()?;
    let ecdf = Arc::new(EmpiricalCdf::new(standardized.clone())?);
    let d = expfun::vnms_prefactor(&params, &moments);
    let grid = config.z_grid.points();
    let bounds = if config.tail == TailChoice::Expfun {
        let rows = grid
            .iter()
            .map(|&z| {
                let bound = expfun::vnms_bound(&params, &moments, z).map_err(|e| e.at(z))?;
                Ok(crate::bound::BoundRow {
                    z,
                    tail_term: expfun::two_sided_tail(z, &params, &moments)?,
                    gaussian_term: 2.0 * (-0.25 * z * z).exp(),
                    bound,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        BoundCurve { rows }
    } else {
        let tail = tail_model(config, None, Some(&ecdf), Some(&standardized))?;
        let inputs = BoundInputs::new(config.mean_abs, d, tail)?.with_source(DiscrepancySource::Skorokhod);
        evaluate_curve(&inputs, &grid)?
    };
    let curve = discrepancy_curve(&ecdf, &grid);
    let mut report = certify(&curve, &bounds, Slack::StandardErrors(config.slack_k))?;
    report.notes.push(format!(
        "samples carry trapezoid discretization bias (n_steps = {}); no allowance is budgeted for it",
        config.n_steps
    ));
    let summary = json!({
        "samples": ecdf.len(),
        "m_t": moments.m_t,
        "sigma2_t": moments.sigma2_t,
        "n_steps": config.n_steps,
        "gamma_second_moment_upper": expfun::gamma_second_moment_upper(&params, &moments),
        "tail": config.tail,
        "violations": report.violations,
        "worst_ratio": report.worst_ratio,
        "notes": report.notes,
    });
    let code = report.exit_code();
    Ok((comparison_table(&report, d, summary), code))
}

fn bound_only(config: &RunConfig) -> Result<(Table, i32)> {
    let spec = chaos_spec(config)?;
    let plan = McPlan {
        samples: config.samples,
        seed: config.seed,
    };
    let (d, source) = match (config.discrepancy, config.tail) {
        (Some(d), _) => (d, DiscrepancySource::UserSupplied),
        (None, TailChoice::Expfun) => {
            let p = ExpFunParams::new(config.a, config.t)?;
            (expfun::vnms_prefactor(&p, &p.moments()), DiscrepancySource::Skorokhod)
        }
        (None, _) => {
            let m4 = crate::chaos::fourth_moment(&spec, plan)?;
            (
                stein_discrepancy_upper(spec.q(), m4.value)?.value,
                DiscrepancySource::FourthMoment,
            )
        }
    };
    let tail = tail_model(config, Some(&spec), None, None)?;
    let inputs = BoundInputs::new(config.mean_abs, d, tail)?.with_source(source);
    let curve = evaluate_curve(&inputs, &config.z_grid.points())?;
    let rows = curve
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::Num(r.z),
                Cell::Num(r.tail_term),
                Cell::Num(r.gaussian_term),
                Cell::Num(r.bound),
                Cell::Num(d),
            ]
        })
        .collect();
    let summary = json!({
        "stein_discrepancy": d,
        "mean_abs": config.mean_abs,
        "discrepancy_source": source,
        "tail": inputs.tail().name(),
        "crossover_below_uniform": curve.crossover_below(d),
    });
    Ok((
        Table {
            columns: vec!["z", "tail_term", "gaussian_term", "bound", "uniform_bound"],
            rows,
            summary,
        },
        0,
    ))
}
