//! `nsubdiv` command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{self, CatalogParams};
use crate::checker::{self, ConditionReport, StepwiseReport, Verdict};
use crate::engine::{self, refine};
use crate::error::{Error, Result};
use crate::io::{
    read_json, to_json_pretty, write_grid_csv, write_samples_csv, GridFile, SchemeFile, SpaceFile,
};
use crate::lattice::Parametrization;
use crate::scheme::SchemeSpec;
use crate::space::ExpPolySpace;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nsubdiv",
    version,
    about = "Check exponential polynomial generation and reproduction of subdivision schemes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Generation,
    Reproduction,
    Stepwise,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the algebraic conditions and/or the one-step test.
    Check {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        space: PathBuf,
        /// Comma or space separated; defaults to the scheme's tau, then to a solved one.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        #[arg(long, default_value_t = 0)]
        kmin: usize,
        #[arg(long, default_value_t = 5)]
        kmax: usize,
        #[arg(long, default_value_t = checker::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        mode: Mode,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve for the shift parameter and print it.
    SolveTau {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = 0)]
        kprobe: usize,
        #[arg(long, default_value_t = checker::DEFAULT_TOL)]
        tol: f64,
    },
    /// Apply the subdivision operators to grid data.
    Refine {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        levels: usize,
        /// Defaults to the level stored in the input.
        #[arg(long)]
        start_level: Option<usize>,
        #[arg(long, value_enum, default_value_t = GridFormat::Json)]
        out: GridFormat,
        /// Output file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Refine a delta and write (t.., re, im) samples of the basic limit function as CSV.
    Limit {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        start_level: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List or instantiate catalog schemes.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    /// Write a scheme file for a catalog entry.
    Emit {
        #[arg(long)]
        id: String,
        /// JSON object, or @path to a JSON file.
        #[arg(long, default_value = "{}")]
        params: String,
        /// Write levels 0..N explicitly with level N as the tail.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub scheme: String,
    pub mode: Mode,
    pub k_min: usize,
    pub k_max: usize,
    pub tolerance: f64,
    pub tau: Option<Vec<f64>>,
    pub tau_source: Option<&'static str>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproduction: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stepwise: Option<StepwiseReport>,
}

/// Command outcome before it becomes an exit code.
enum Failure {
    Condition(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = std::result::Result<u8, Failure>;

pub fn main() -> u8 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            };
        }
    };
    let stdout = io::stdout();
    run(cli, &mut stdout.lock())
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> u8 {
    let result = match cli.command {
        Command::Check {
            scheme,
            space,
            tau,
            kmin,
            kmax,
            tol,
            mode,
            report,
        } => cmd_check(
            out,
            &scheme,
            &space,
            tau.as_deref(),
            kmin,
            kmax,
            tol,
            mode,
            report.as_deref(),
        ),
        Command::SolveTau {
            scheme,
            space,
            kprobe,
            tol,
        } => cmd_solve_tau(out, &scheme, &space, kprobe, tol),
        Command::Refine {
            scheme,
            input,
            levels,
            start_level,
            out: format,
            output,
        } => cmd_refine(
            out,
            &scheme,
            &input,
            levels,
            start_level,
            format,
            output.as_deref(),
        ),
        Command::Limit {
            scheme,
            rounds,
            start_level,
            out: path,
        } => cmd_limit(out, &scheme, rounds, start_level, path.as_deref()),
        Command::Catalog { action } => match action {
            CatalogAction::List => cmd_catalog_list(out),
            CatalogAction::Emit {
                id,
                params,
                levels,
                out: path,
            } => cmd_catalog_emit(out, &id, &params, levels, path.as_deref()),
        },
    };
    match result {
        Ok(code) => code,
        Err(Failure::Condition(msg)) => {
            eprintln!("nsubdiv: {msg}");
            EXIT_FAIL
        }
        Err(Failure::Input(e)) => {
            eprintln!("nsubdiv: {e}");
            EXIT_INPUT
        }
    }
}

pub fn parse_tau(text: &str) -> Result<Parametrization> {
    let vals = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("tau component {s:?} is not a real number"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Err(Error::InvalidParameter("empty tau".into()));
    }
    Ok(Parametrization::new(vals))
}

/// Rounded to 1e-12, without negative zero.
pub fn format_tau(tau: &Parametrization) -> String {
    tau.as_slice()
        .iter()
        .map(|x| {
            let r = (x * 1e12).round() / 1e12;
            let r = if r == 0.0 { 0.0 } else { r };
            format!("{r}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn load_scheme(path: &Path) -> Result<SchemeSpec> {
    read_json::<SchemeFile>(path)?.to_scheme()
}

fn load_space(path: &Path, scheme: &SchemeSpec) -> Result<ExpPolySpace> {
    let space = read_json::<SpaceFile>(path)?.to_space()?;
    if space.dim() != scheme.dim() {
        return Err(Error::DimensionMismatch {
            expected: scheme.dim(),
            found: space.dim(),
        });
    }
    Ok(space)
}

fn write_target<W: Write>(out: &mut W, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

fn is_solve_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NoAdmissibleTau(_)
            | Error::ComplexTau(_)
            | Error::SymbolAtOne { .. }
            | Error::BranchAmbiguity { .. }
    )
}

fn fmt_lambda(l: &[num_complex::Complex64]) -> String {
    let parts: Vec<String> = l
        .iter()
        .map(|c| {
            if c.im == 0.0 {
                format!("{}", c.re)
            } else {
                format!("{}{:+}i", c.re, c.im)
            }
        })
        .collect();
    format!("({})", parts.join(","))
}

fn print_conditions<W: Write>(out: &mut W, label: &str, rep: &ConditionReport) -> io::Result<()> {
    writeln!(
        out,
        "{label}: {:?}  max residual {:.3e}  ({} conditions)",
        rep.verdict,
        rep.max_residual,
        rep.records.len()
    )?;
    writeln!(
        out,
        "  {:>3}  {:<10} {:<22} {:>9}  {:>12}  status",
        "k", "gamma", "lambda", "eps", "residual"
    )?;
    let mut keys: Vec<(usize, &Vec<u32>, &Vec<num_complex::Complex64>, bool)> = Vec::new();
    for r in &rep.records {
        let key = (r.k, &r.gamma, &r.lambda, r.eps_is_one);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (k, gamma, lambda, one) in keys {
        let worst = rep
            .records
            .iter()
            .filter(|r| r.k == k && &r.gamma == gamma && &r.lambda == lambda && r.eps_is_one == one)
            .map(|r| r.residual)
            .fold(
                0.0,
                |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) },
            );
        let status = if worst <= rep.tolerance { "ok" } else { "FAIL" };
        writeln!(
            out,
            "  {k:>3}  {:<10} {:<22} {:>9}  {worst:>12.3e}  {status}",
            format!("{gamma:?}"),
            fmt_lambda(lambda),
            if one { "1" } else { "other" },
        )?;
    }
    Ok(())
}

fn print_stepwise<W: Write>(out: &mut W, rep: &StepwiseReport) -> io::Result<()> {
    writeln!(
        out,
        "stepwise: {:?}  max scaled error {:.3e}  max abs error {:.3e}",
        rep.verdict, rep.max_scaled_error, rep.max_abs_error
    )?;
    writeln!(
        out,
        "  {:>3}  {:<10} {:<22} {:>8}  {:>12}  {:>12}",
        "k", "gamma", "lambda", "points", "scaled", "abs"
    )?;
    for r in &rep.records {
        writeln!(
            out,
            "  {:>3}  {:<10} {:<22} {:>8}  {:>12.3e}  {:>12.3e}",
            r.k,
            format!("{:?}", r.gamma),
            fmt_lambda(&r.lambda),
            r.interior_points,
            r.max_scaled_error,
            r.max_abs_error
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_check<W: Write>(
    out: &mut W,
    scheme_path: &Path,
    space_path: &Path,
    tau_arg: Option<&str>,
    kmin: usize,
    kmax: usize,
    tol: f64,
    mode: Mode,
    report_path: Option<&Path>,
) -> CmdResult {
    if kmin > kmax {
        return Err(Error::InvalidRange {
            start: kmin,
            end: kmax,
        }
        .into());
    }
    let scheme = load_scheme(scheme_path)?;
    let space = load_space(space_path, &scheme)?;
    let needs_tau = mode != Mode::Generation;

    let (tau, tau_source) = if let Some(t) = tau_arg {
        (Some(parse_tau(t)?), Some("argument"))
    } else if let Some(t) = &scheme.tau {
        (Some(t.clone()), Some("scheme file"))
    } else if needs_tau {
        let t = checker::solve_tau(&scheme, &space, kmin, tol).map_err(|e| {
            Error::InvalidParameter(format!("no tau given and none could be solved for: {e}"))
        })?;
        (Some(t), Some("solved"))
    } else {
        (None, None)
    };
    if let Some(t) = &tau {
        if t.dim() != scheme.dim() {
            return Err(Error::DimensionMismatch {
                expected: scheme.dim(),
                found: t.dim(),
            }
            .into());
        }
    }

    let range = kmin..=kmax;
    let run_gen = matches!(mode, Mode::Generation | Mode::All);
    let run_rep = matches!(mode, Mode::Reproduction | Mode::All);
    let run_step = matches!(mode, Mode::Stepwise | Mode::All);
    let generation = run_gen
        .then(|| checker::check_generation(&scheme, &space, range.clone(), tol))
        .transpose()?;
    let reproduction = match (&tau, run_rep) {
        (Some(t), true) => Some(checker::check_reproduction(
            &scheme,
            &space,
            t,
            range.clone(),
            tol,
        )?),
        _ => None,
    };
    let stepwise = match (&tau, run_step) {
        (Some(t), true) => Some(checker::stepwise_test(
            &scheme,
            &space,
            t,
            range.clone(),
            None,
            tol,
        )?),
        _ => None,
    };

    let ok = generation.as_ref().is_none_or(|r| r.passed())
        && reproduction.as_ref().is_none_or(|r| r.passed())
        && stepwise.as_ref().is_none_or(|r| r.passed());
    let report = CheckReport {
        scheme: scheme.name.clone(),
        mode,
        k_min: kmin,
        k_max: kmax,
        tolerance: tol,
        tau: tau.as_ref().map(|t| t.as_slice().to_vec()),
        tau_source,
        verdict: Verdict::from_bool(ok),
        generation,
        reproduction,
        stepwise,
    };

    let write = |out: &mut W| -> io::Result<()> {
        writeln!(
            out,
            "scheme: {}  levels {kmin}..={kmax}  tol {tol:e}",
            report.scheme
        )?;
        if let (Some(t), Some(src)) = (&tau, tau_source) {
            writeln!(out, "tau: {} ({src})", format_tau(t))?;
        }
        if let Some(r) = &report.generation {
            print_conditions(out, "generation", r)?;
        }
        if let Some(r) = &report.reproduction {
            print_conditions(out, "reproduction", r)?;
        }
        if let Some(r) = &report.stepwise {
            print_stepwise(out, r)?;
        }
        writeln!(out, "verdict: {:?}", report.verdict)
    };
    write(out).map_err(Error::from)?;
    if let Some(p) = report_path {
        fs::write(p, to_json_pretty(&report)?).map_err(Error::from)?;
    }
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_solve_tau<W: Write>(
    out: &mut W,
    scheme_path: &Path,
    space_path: &Path,
    kprobe: usize,
    tol: f64,
) -> CmdResult {
    let scheme = load_scheme(scheme_path)?;
    let space = load_space(space_path, &scheme)?;
    match checker::solve_tau(&scheme, &space, kprobe, tol) {
        Ok(t) => {
            writeln!(out, "{}", format_tau(&t)).map_err(Error::from)?;
            Ok(EXIT_PASS)
        }
        Err(e) if is_solve_failure(&e) => Err(Failure::Condition(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn cmd_refine<W: Write>(
    out: &mut W,
    scheme_path: &Path,
    input: &Path,
    levels: usize,
    start_level: Option<usize>,
    format: GridFormat,
    output: Option<&Path>,
) -> CmdResult {
    let scheme = load_scheme(scheme_path)?;
    let file: GridFile = read_json(input)?;
    if file.dimension != scheme.dim() {
        return Err(Error::DimensionMismatch {
            expected: scheme.dim(),
            found: file.dimension,
        }
        .into());
    }
    let mut data = file.to_grid()?;
    if file.tau.is_none() {
        if let Some(t) = &scheme.tau {
            data.tau = t.clone();
        }
    }
    let start = start_level.unwrap_or(data.level);
    let refined = refine(&scheme, &data, start, levels)?;
    let mut bytes = Vec::new();
    match format {
        GridFormat::Json => {
            bytes = to_json_pretty(&GridFile::from_grid(&refined, Some(&scheme.dilation))?)?
                .into_bytes();
            bytes.push(b'\n');
        }
        GridFormat::Csv => write_grid_csv(&mut bytes, &refined, &scheme.dilation)?,
    }
    write_target(out, output, &bytes)?;
    Ok(EXIT_PASS)
}

fn cmd_limit<W: Write>(
    out: &mut W,
    scheme_path: &Path,
    rounds: usize,
    start_level: usize,
    path: Option<&Path>,
) -> CmdResult {
    let scheme = load_scheme(scheme_path)?;
    let samples = engine::basic_limit_samples(&scheme, rounds, start_level)?;
    let mut bytes = Vec::new();
    write_samples_csv(&mut bytes, scheme.dim(), &samples)?;
    write_target(out, path, &bytes)?;
    Ok(EXIT_PASS)
}

fn cmd_catalog_list<W: Write>(out: &mut W) -> CmdResult {
    writeln!(out, "{}", to_json_pretty(&catalog::entries())?).map_err(Error::from)?;
    Ok(EXIT_PASS)
}

fn cmd_catalog_emit<W: Write>(
    out: &mut W,
    id: &str,
    params: &str,
    levels: Option<usize>,
    path: Option<&Path>,
) -> CmdResult {
    let text = match params.strip_prefix('@') {
        Some(file) => fs::read_to_string(file).map_err(Error::from)?,
        None => params.to_string(),
    };
    let params: CatalogParams = serde_json::from_str(&text).map_err(Error::from)?;
    let scheme = catalog::instantiate(id, &params)?;
    let file = SchemeFile::from_scheme(&scheme, levels)?;
    let mut bytes = to_json_pretty(&file)?.into_bytes();
    bytes.push(b'\n');
    write_target(out, path, &bytes)?;
    Ok(EXIT_PASS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Parametrization;

    #[test]
    fn tau_parsing() {
        assert_eq!(parse_tau("-0.5").unwrap().as_slice(), &[-0.5]);
        assert_eq!(parse_tau("1, 2").unwrap().as_slice(), &[1.0, 2.0]);
        assert_eq!(parse_tau("1 2").unwrap().as_slice(), &[1.0, 2.0]);
        assert!(parse_tau("1+2i").is_err());
        assert!(parse_tau("").is_err());
        assert!(parse_tau("nan").is_err());
    }

    #[test]
    fn tau_formatting() {
        assert_eq!(
            format_tau(&Parametrization::new(vec![-0.25000000000001])),
            "-0.25"
        );
        assert_eq!(
            format_tau(&Parametrization::new(vec![-1e-17, 3e-15])),
            "0 0"
        );
        assert_eq!(
            format_tau(&Parametrization::new(vec![1.0, 0.999999999999999])),
            "1 1"
        );
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
