//! `cstar-compact`: run the axiom suite, certify scenarios, replay reports, build nets
//! and witnesses from JSON inputs.
//!
//! Exit codes: 0 pass, 1 property failure, 2 certificate failure, 3 inconclusive,
//! 64 usage error, 65 malformed input, 66 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use cstar_compact::axioms::{run_axiom_suite, AxiomsConfig};
use cstar_compact::certifier::{
    certify, replay, report_tables, CertificationReport, ScenarioConfig, Verdict,
};
use cstar_compact::hilbert::ModuleElement;
use cstar_compact::uniformity::{
    epsilon_net, noncompactness_witness, PseudoMetricSpec, WitnessOutcome,
};
use cstar_compact::Error;

const EXIT_CERTIFICATE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 66;

#[derive(Parser)]
#[command(
    name = "cstar-compact",
    version,
    about = "Compactness certificates for operators on Hilbert C*-modules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Directory for JSON and CSV outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Verification tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Spec battery size override.
    #[arg(long)]
    specs: Option<usize>,
    /// Only print failures.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pseudo-metric property suite; the config file is optional.
    Axioms {
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Certify a scenario config.
    Certify {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Re-verify a report, against its embedded config or an explicit one.
    Replay {
        report: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a greedy ε-net for a list of points under one spec.
    Net {
        points: PathBuf,
        spec: PathBuf,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Build the non-compactness witness for a scenario's operator at one length.
    Witness {
        config: PathBuf,
        #[arg(long)]
        d: usize,
        /// Row-norm threshold; defaults to the smallest upper-half row norm.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

/// A failure that ends the run with a specific exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::HashMismatch { .. } => EXIT_CERTIFICATE,
            _ => EXIT_DATA,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    write_file(dir, name, &(text + "\n"))
}

fn out_dir(common: &Common) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_axioms(path: Option<&Path>, common: &Common) -> Outcome {
    let mut config = match path {
        Some(p) => read_json::<AxiomsConfig>(p)?,
        None => AxiomsConfig::default(),
    };
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(t) = common.tol {
        config.tolerance = t;
    }
    if let Some(n) = common.specs {
        config.specs = n;
    }
    let report = run_axiom_suite(&config)?;
    if let Some(dir) = &common.out {
        write_json(dir, "axioms_report.json", &report)?;
    }
    for a in report.admissibility.iter().filter(|a| !a.ok) {
        eprintln!(
            "spec {} is not admissible: violation {:e}",
            a.spec_id, a.worst_violation
        );
    }
    for c in &report.checks {
        if !c.passed {
            eprintln!("FAIL {}: worst {:e} > {:e}", c.name, c.worst, c.tolerance);
            if let Some(case) = &c.offending {
                eprintln!("{}", serde_json::to_string(case).expect("case serializes"));
            }
        } else if !common.quiet {
            println!(
                "ok   {}: worst {:e} over {} evaluations",
                c.name, c.worst, c.evaluations
            );
        }
    }
    // 1 for a failed property, 2 for an inadmissible system.
    Ok(report.exit_code() as u8)
}

fn apply_overrides(config: &mut ScenarioConfig, common: &Common) {
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(t) = common.tol {
        config.tolerances.verify = t;
    }
    if let Some(n) = common.specs {
        config.specs = n;
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        _ => 0,
    }
}

fn cmd_certify(path: &Path, common: &Common) -> Outcome {
    let mut config: ScenarioConfig = read_json(path)?;
    apply_overrides(&mut config, common);
    let report = certify(&config)?;
    let dir = out_dir(common);
    write_json(&dir, "report.json", &report)?;
    for (name, table) in report_tables(&report) {
        write_file(&dir, &name, &table)?;
    }
    if !common.quiet {
        println!("{}: {}", report.name, report.verdict);
    }
    for d in &report.diagnostics {
        eprintln!("{}: {d}", report.name);
    }
    Ok(verdict_code(report.verdict))
}

fn cmd_replay(path: &Path, config: Option<&Path>, common: &Common) -> Outcome {
    let report: CertificationReport = read_json(path)?;
    let config = match config {
        Some(p) => read_json(p)?,
        None => report.config.clone(),
    };
    let outcome = replay(&report, &config)?;
    if let Some(dir) = &common.out {
        write_json(dir, "replay.json", &outcome)?;
    }
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    if !common.quiet {
        println!(
            "{}: replay {} ({} checks)",
            report.name, outcome.ok, outcome.checks
        );
    }
    Ok(if outcome.ok { 0 } else { EXIT_CERTIFICATE })
}

fn cmd_net(points: &Path, spec: &Path, eps: f64, common: &Common) -> Outcome {
    let points: Vec<ModuleElement> = read_json(points)?;
    let spec: PseudoMetricSpec = read_json(spec)?;
    let net = epsilon_net(&points, &spec, eps)?;
    if let Some(dir) = &common.out {
        write_json(dir, "net_report.json", &net)?;
    }
    if !common.quiet {
        println!(
            "net: {} centers, radius {:e}, covered {}",
            net.size(),
            net.max_uncovered_distance,
            net.covered
        );
    }
    Ok(if net.covered { 0 } else { EXIT_CERTIFICATE })
}

fn cmd_witness(path: &Path, d: usize, delta: Option<f64>, common: &Common) -> Outcome {
    let config: ScenarioConfig = read_json(path)?;
    config.validate()?;
    if d == 0 {
        return Err(Failure::new(EXIT_USAGE, "--d must be positive"));
    }
    let delta = match delta {
        Some(x) => x,
        None => {
            let f = config.generator.build(&config.algebra, d)?;
            let rows = cstar_compact::uniformity::row_norms(&f);
            rows[d.div_ceil(2)..]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        }
    };
    let outcome = if delta > 0.0 && delta.is_finite() {
        noncompactness_witness(&config.generator, &config.algebra, d, delta)?
    } else {
        WitnessOutcome::Inconclusive {
            reason: format!("upper-half rows of A^{d} vanish"),
        }
    };
    if let Some(dir) = &common.out {
        write_json(dir, "witness.json", &outcome)?;
    }
    match &outcome {
        WitnessOutcome::Witnessed(w) => {
            if !common.quiet {
                println!(
                    "witness: {} points, bound {:e}, min pairwise {:e}",
                    w.points.len(),
                    w.bound,
                    w.min_pairwise
                );
            }
            Ok(0)
        }
        WitnessOutcome::Inconclusive { reason } => {
            if !common.quiet {
                println!("witness: inconclusive ({reason})");
            }
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Axioms { config, common } => cmd_axioms(config.as_deref(), common),
        Command::Certify { config, common } => cmd_certify(config, common),
        Command::Replay {
            report,
            config,
            common,
        } => cmd_replay(report, config.as_deref(), common),
        Command::Net {
            points,
            spec,
            eps,
            common,
        } => cmd_net(points, spec, *eps, common),
        Command::Witness {
            config,
            d,
            delta,
            common,
        } => cmd_witness(config, *d, *delta, common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
