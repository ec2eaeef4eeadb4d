//! Command front end: flat `key = value` configuration, CSV output.
//!
//! ```text
//! # two pairs, light PU load
//! N = 2
//! p = 0.02
//! scheme = random
//! sweep = p:0.01,0.05,0.1
//! ```
//!
//! Blank lines and `#` comments are ignored. Later assignments override
//! earlier ones, so command-line pairs appended after the file text win.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::contention::counts::{s_count, s_count_oracle, AccessTable, ORACLE_BOUND};
use crate::error::{Error, Result};
use crate::handoff::{analyze, Analysis, ModelParams};
use crate::sim::{self, SimConfig, SimResult};

/// Every key the parser accepts.
pub const VALID_KEYS: [&str; 17] = [
    "command",
    "M",
    "N",
    "c",
    "h",
    "p",
    "s",
    "v",
    "Ts",
    "scheme",
    "slots",
    "warmup",
    "seed",
    "exclude_su",
    "sweep",
    "tolerance",
    "oracle_bound",
];

/// Keys that may appear as a sweep axis.
pub const SWEEP_KEYS: [&str; 8] = ["M", "N", "c", "h", "p", "s", "v", "Ts"];

pub const DEFAULT_TOLERANCE: f64 = 0.08;
pub const DEFAULT_ORACLE_BOUND: i64 = 6;

pub const ANALYTIC_HEADER: &str = "M,N,c,h,p,s,v,Ts,scheme,u,q,theta,pr_collision,ds";
pub const SIM_COLUMNS: &str = "slots,warmup,seed,theta_sim,pr_collision_sim,ds_sim,q_hat";
pub const VALIDATE_COLUMNS: &str = "rel_theta,rel_pr_collision,rel_ds";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Command {
    #[default]
    Analytic,
    Simulate,
    Sweep,
    Validate,
    Oracle,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Command::Analytic),
            "simulate" => Ok(Command::Simulate),
            "sweep" => Ok(Command::Sweep),
            "validate" => Ok(Command::Validate),
            "oracle" => Ok(Command::Oracle),
            other => Err(Error::invalid(
                "command",
                other,
                "one of analytic, simulate, sweep, validate, oracle",
            )),
        }
    }
}

/// One parameter and the values it takes, in output order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub params: ModelParams,
    pub sim: SimConfig,
    pub sweep: Option<SweepAxis>,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
    /// Largest relative difference `validate` accepts.
    pub tolerance: f64,
    /// `oracle` checks every `n1, θ ≤ oracle_bound`.
    pub oracle_bound: i64,
    /// `Ts` was not given, so it follows `c` (also across a `c` sweep).
    ts_follows_c: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        let params = ModelParams::default();
        Self {
            command: Command::default(),
            params,
            sim: SimConfig::new(params),
            sweep: None,
            output: None,
            tolerance: DEFAULT_TOLERANCE,
            oracle_bound: DEFAULT_ORACLE_BOUND,
            ts_follows_c: true,
        }
    }
}

impl RunSpec {
    /// Parameter sets in grid order; a single point without a sweep.
    pub fn grid(&self) -> Result<Vec<ModelParams>> {
        let Some(axis) = &self.sweep else {
            return Ok(vec![self.params]);
        };
        axis.values
            .iter()
            .map(|&x| {
                let mut params = self.params;
                set_numeric(&mut params, &axis.key, x)?;
                if axis.key == "c" && self.ts_follows_c {
                    params.sensing_delay = params.frame_slots;
                }
                params.validate()?;
                Ok(params)
            })
            .collect()
    }

    fn sim_for(&self, params: ModelParams) -> SimConfig {
        SimConfig { params, ..self.sim }
    }
}

/// Splits config text into `(key, value)` pairs, in order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{}`",
                lineno + 1,
                line
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Parses config text into a validated [`RunSpec`].
pub fn parse_config(text: &str) -> Result<RunSpec> {
    build_spec(&parse_pairs(text)?)
}

/// Applies `pairs` over the defaults and validates the result.
pub fn build_spec(pairs: &[(String, String)]) -> Result<RunSpec> {
    let mut spec = RunSpec::default();
    let mut ts: Option<usize> = None;
    for (key, value) in pairs {
        match key.as_str() {
            "command" => spec.command = value.parse()?,
            "M" => spec.params.channels = parse_int(key, value)?,
            "N" => spec.params.pairs = parse_int(key, value)?,
            "c" => spec.params.frame_slots = parse_int(key, value)?,
            "h" => spec.params.frames = parse_int(key, value)?,
            "p" => spec.params.pu_arrival = parse_prob(key, value)?,
            "s" => spec.params.su_arrival = parse_prob(key, value)?,
            "v" => spec.params.pu_completion = parse_float(key, value)?,
            "Ts" => ts = Some(parse_int(key, value)?),
            "scheme" => spec.params.scheme = value.parse()?,
            "slots" => spec.sim.slots = parse_int(key, value)?,
            "warmup" => spec.sim.warmup = parse_int(key, value)?,
            "seed" => spec.sim.seed = parse_int(key, value)?,
            "exclude_su" => spec.sim.exclude_su_occupied = parse_bool(key, value)?,
            "sweep" => spec.sweep = Some(parse_axis(value)?),
            "tolerance" => {
                spec.tolerance = parse_float(key, value)?;
                if spec.tolerance < 0.0 {
                    return Err(Error::invalid(key, value, "a nonnegative number"));
                }
            }
            "oracle_bound" => {
                spec.oracle_bound = parse_int(key, value)?;
                if !(1..=ORACLE_BOUND).contains(&spec.oracle_bound) {
                    return Err(Error::invalid(
                        key,
                        value,
                        &format!("an integer in [1, {ORACLE_BOUND}]"),
                    ));
                }
            }
            _ => {
                return Err(Error::UnknownKey {
                    key: key.clone(),
                    valid: VALID_KEYS.join(", "),
                })
            }
        }
    }
    spec.ts_follows_c = ts.is_none();
    spec.params.sensing_delay = ts.unwrap_or(spec.params.frame_slots);
    spec.params.validate()?;
    spec.sim.params = spec.params;
    spec.sim.validate()?;
    if spec.sweep.is_some() {
        // Surface a bad grid value before any work starts.
        spec.grid()?;
    }
    Ok(spec)
}

fn parse_int<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(key, value, "a nonnegative integer"))
}

fn parse_float(key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::invalid(key, value, "a finite number")),
    }
}

fn parse_prob(key: &str, value: &str) -> Result<f64> {
    let x = parse_float(key, value)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(key, value, "range [0,1]"));
    }
    Ok(x)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::invalid(key, value, "true or false")),
    }
}

fn parse_axis(value: &str) -> Result<SweepAxis> {
    let Some((key, list)) = value.split_once(':') else {
        return Err(Error::invalid("sweep", value, "`key:v1,v2,...`"));
    };
    let key = key.trim();
    if !SWEEP_KEYS.contains(&key) {
        return Err(Error::invalid(
            "sweep",
            key,
            &format!("one of {}", SWEEP_KEYS.join(", ")),
        ));
    }
    let values = list
        .split(',')
        .map(|v| parse_float(key, v.trim()))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::invalid("sweep", value, "at least one value"));
    }
    Ok(SweepAxis {
        key: key.to_string(),
        values,
    })
}

fn set_numeric(params: &mut ModelParams, key: &str, x: f64) -> Result<()> {
    let as_int = || {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(Error::invalid(key, x, "a nonnegative integer"))
        }
    };
    match key {
        "M" => params.channels = as_int()?,
        "N" => params.pairs = as_int()?,
        "c" => params.frame_slots = as_int()?,
        "h" => params.frames = as_int()?,
        "Ts" => params.sensing_delay = as_int()?,
        "p" => params.pu_arrival = x,
        "s" => params.su_arrival = x,
        "v" => params.pu_completion = x,
        _ => return Err(Error::invalid("sweep", key, &SWEEP_KEYS.join(", "))),
    }
    Ok(())
}

/// Formats with 10 significant digits, `%g` style.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.9e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn param_fields(params: &ModelParams) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        params.channels,
        params.pairs,
        params.frame_slots,
        params.frames,
        fmt_num(params.pu_arrival),
        fmt_num(params.su_arrival),
        fmt_num(params.pu_completion),
        params.sensing_delay,
        params.scheme
    )
}

fn analytic_fields(a: &Analysis) -> String {
    format!(
        "{},{},{},{},{},{}",
        param_fields(&a.params),
        fmt_num(a.u),
        fmt_num(a.q),
        fmt_num(a.metrics.theta),
        fmt_num(a.metrics.pr_collision),
        fmt_num(a.metrics.ds)
    )
}

fn sim_fields(config: &SimConfig, r: &SimResult) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        config.slots,
        config.warmup,
        config.seed,
        fmt_num(r.throughput),
        fmt_num(r.pr_collision),
        fmt_num(r.mean_backlog_dwell),
        fmt_num(r.q_hat)
    )
}

/// Relative difference against the analytic value; absolute when that is 0.
pub fn relative_diff(analytic: f64, simulated: f64) -> f64 {
    if analytic.is_infinite() || simulated.is_infinite() {
        return if analytic == simulated {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let gap = (analytic - simulated).abs();
    if analytic.abs() > 1e-12 {
        gap / analytic.abs()
    } else {
        gap
    }
}

/// Result of [`run_command`]: the exit status to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// `validate` exceeded its tolerance or `oracle` found a mismatch.
    ValidationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::ValidationFailed => 1,
        }
    }
}

/// Runs `spec` and writes its CSV (or oracle report) to `out`.
pub fn run_command(spec: &RunSpec, out: &mut dyn Write) -> Result<Outcome> {
    let (text, outcome) = render(spec)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(outcome)
}

/// Builds the full output in memory so nothing is written on error.
pub fn render(spec: &RunSpec) -> Result<(String, Outcome)> {
    let mut text = String::new();
    let mut outcome = Outcome::Success;
    match spec.command {
        Command::Analytic => {
            writeln!(text, "{ANALYTIC_HEADER}").unwrap();
            for a in analyze_grid(&spec.grid()?)? {
                writeln!(text, "{}", analytic_fields(&a)).unwrap();
            }
        }
        Command::Simulate | Command::Sweep => {
            writeln!(text, "{ANALYTIC_HEADER},{SIM_COLUMNS}").unwrap();
            for (a, config, r) in both_engines(spec)? {
                writeln!(text, "{},{}", analytic_fields(&a), sim_fields(&config, &r)).unwrap();
            }
        }
        Command::Validate => {
            writeln!(text, "{ANALYTIC_HEADER},{SIM_COLUMNS},{VALIDATE_COLUMNS}").unwrap();
            let mut worst = [0.0f64; 3];
            for (a, config, r) in both_engines(spec)? {
                let rel = [
                    relative_diff(a.metrics.theta, r.throughput),
                    relative_diff(a.metrics.pr_collision, r.pr_collision),
                    relative_diff(a.metrics.ds, r.mean_backlog_dwell),
                ];
                for (w, x) in worst.iter_mut().zip(rel) {
                    *w = w.max(x);
                }
                writeln!(
                    text,
                    "{},{},{},{},{}",
                    analytic_fields(&a),
                    sim_fields(&config, &r),
                    fmt_num(rel[0]),
                    fmt_num(rel[1]),
                    fmt_num(rel[2])
                )
                .unwrap();
            }
            // Summary row: only the relative-difference columns are filled.
            let blanks =
                ",".repeat(ANALYTIC_HEADER.split(',').count() + SIM_COLUMNS.split(',').count() - 1);
            writeln!(
                text,
                "max{},{},{},{}",
                blanks,
                fmt_num(worst[0]),
                fmt_num(worst[1]),
                fmt_num(worst[2])
            )
            .unwrap();
            // Backlog dwell is reported but not gated: with saturated fixed-length
            // frames the simulated pairs fall into lock-step.
            if worst[0] > spec.tolerance || worst[1] > spec.tolerance {
                outcome = Outcome::ValidationFailed;
            }
        }
        Command::Oracle => {
            let report = oracle_report(spec.oracle_bound);
            text.push_str(&report.text);
            if report.mismatches > 0 || report.pmf_failures > 0 {
                outcome = Outcome::ValidationFailed;
            }
        }
    }
    Ok((text, outcome))
}

fn analyze_grid(grid: &[ModelParams]) -> Result<Vec<Analysis>> {
    grid.par_iter().map(analyze).collect()
}

fn both_engines(spec: &RunSpec) -> Result<Vec<(Analysis, SimConfig, SimResult)>> {
    spec.grid()?
        .into_par_iter()
        .map(|params| {
            let config = spec.sim_for(params);
            let a = analyze(&params)?;
            let r = sim::run(&config)?;
            Ok((a, config, r))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub cases: usize,
    pub mismatches: usize,
    pub pmf_failures: usize,
    pub text: String,
}

/// Compares the recursion with enumeration for every `n1, θ ≤ bound` and
/// checks that each access row sums to 1 within 1e-12.
pub fn oracle_report(bound: i64) -> OracleReport {
    let bound = bound.clamp(1, ORACLE_BOUND);
    let mut text = String::new();
    let (mut cases, mut mismatches, mut pmf_failures) = (0, 0, 0);
    let mut table = AccessTable::new();
    for n1 in 1..=bound {
        for theta in 1..=bound {
            for d in 0..=n1 {
                cases += 1;
                let fast = s_count(n1, theta, d);
                let slow = s_count_oracle(n1, theta, d).expect("within oracle bound") as i128;
                if fast != slow {
                    mismatches += 1;
                    writeln!(text, "mismatch n1={n1} theta={theta} d={d}: recursion {fast}, enumeration {slow}").unwrap();
                }
            }
            let sum: f64 = table.row(n1, theta).iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                pmf_failures += 1;
                writeln!(
                    text,
                    "access pmf n1={n1} theta={theta} sums to {}",
                    fmt_num(sum)
                )
                .unwrap();
            }
        }
    }
    writeln!(
        text,
        "checked {cases} cases for n1, theta <= {bound}: {mismatches} mismatches"
    )
    .unwrap();
    OracleReport {
        cases,
        mismatches,
        pmf_failures,
        text,
    }
}
