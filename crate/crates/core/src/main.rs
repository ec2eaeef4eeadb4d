use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use specmarkov::cli::{build_spec, parse_pairs, run_command};
use specmarkov::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Analytic,
    Simulate,
    Sweep,
    Validate,
    Oracle,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Analytic => "analytic",
            Cmd::Simulate => "simulate",
            Cmd::Sweep => "sweep",
            Cmd::Validate => "validate",
            Cmd::Oracle => "oracle",
        }
    }
}

/// Spectrum handoff analysis: analytic Markov model and slot simulator.
///
/// Parameters come from a flat `key = value` file and/or `--key value`
/// pairs, which override the file. Keys: M N c h p s v Ts scheme slots
/// warmup seed exclude_su sweep tolerance oracle_bound.
#[derive(Debug, Parser)]
#[command(name = "specmarkov", version)]
struct Args {
    command: Cmd,

    /// Config file in `key = value` form.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Parameter overrides: `--p 0.1 --N 4 --scheme greedy` (or `p=0.1`).
    #[arg(allow_hyphen_values = true, trailing_var_arg = true, num_args = 0..)]
    overrides: Vec<String>,
}

fn override_pairs(raw: &[String]) -> Result<Vec<(String, String)>, Error> {
    let mut pairs = Vec::new();
    let mut iter = raw.iter();
    while let Some(arg) = iter.next() {
        let arg = arg.strip_prefix("--").unwrap_or(arg);
        if let Some((k, v)) = arg.split_once('=') {
            pairs.push((k.to_string(), v.to_string()));
            continue;
        }
        let value = iter
            .next()
            .ok_or_else(|| Error::Config(format!("missing value for `{arg}`")))?;
        pairs.push((arg.to_string(), value.clone()));
    }
    Ok(pairs)
}

fn execute(args: &Args) -> Result<i32, Error> {
    let mut overrides = override_pairs(&args.overrides)?;
    // `--config`/`--out` after the first override land in the trailing list.
    let mut config = args.config.clone();
    let mut out = args.out.clone();
    overrides.retain(|(k, v)| match k.as_str() {
        "config" => {
            config = Some(PathBuf::from(v));
            false
        }
        "out" => {
            out = Some(PathBuf::from(v));
            false
        }
        _ => true,
    });

    let mut pairs = vec![("command".to_string(), args.command.name().to_string())];
    if let Some(path) = &config {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        pairs.extend(parse_pairs(&text)?);
    }
    pairs.extend(overrides);
    let mut spec = build_spec(&pairs)?;
    spec.output = out;

    let outcome = match &spec.output {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            let outcome = run_command(&spec, &mut file)?;
            file.flush()?;
            outcome
        }
        None => run_command(&spec, &mut io::stdout().lock())?,
    };
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("specmarkov: {err}");
            ExitCode::from(2)
        }
    }
}
