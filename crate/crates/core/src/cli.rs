//! The `qselftest` command line.
//!
//! Exit codes: 0 on success or PASS, 1 on FAIL, 2 on usage and
//! specification errors, 3 on numeric failures (non-convergence, a gate that
//! is not CP or not TP).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::angle::Angle;
use crate::channel::{dist_to_family_with, sup_norm, Channel, GateSpec, NoiseKind, SupNormOptions};
use crate::equations::EquationSet;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::oracle::Oracle;
use crate::roblab::{noise_scan_with, write_csv};
use crate::tester::{lemma7_bound, run_tester, Verdict};
use crate::TOOL_VERSION;

#[derive(Parser, Debug)]
#[command(name = "qselftest", version, about = "Classical self-testing of quantum gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the equation set of a family as JSON.
    Equations {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact violation and distance to the family for the given gates.
    Check {
        #[command(flatten)]
        gates: GateArgs,
        #[command(flatten)]
        target: TargetArgs,
        /// Seed of the distance optimizer's random starts.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the sampling self-tester against a simulated oracle.
    Selftest {
        #[command(flatten)]
        gates: GateArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        /// Rejection radius to report when the family has no explicit one.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Violation and distance along a grid of noise strengths.
    Scan {
        #[command(flatten)]
        family: FamilyArgs,
        /// Base gates; defaults to the family member at phi = 0.
        #[arg(long = "gate", value_name = "SPEC")]
        gates: Vec<String>,
        #[arg(long, value_parser = parse_noise)]
        noise: NoiseKind,
        /// Comma-separated strengths.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["from", "to", "points"])]
        grid: Vec<f64>,
        #[arg(long, requires_all = ["to", "points"])]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Space the `--from/--to` grid logarithmically.
        #[arg(long)]
        log: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Superoperator-norm distance between two gates.
    Distance {
        #[command(flatten)]
        gates: GateArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long)]
    family: String,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
}

#[derive(Args, Debug)]
struct TargetArgs {
    #[arg(long, conflicts_with = "equations", required_unless_present = "equations")]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// An equation-set JSON file, instead of a built-in family.
    #[arg(long)]
    equations: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GateArgs {
    /// A gate-spec JSON file, or the JSON itself. Repeat for tuples.
    #[arg(long = "gate", value_name = "SPEC", required = true)]
    gates: Vec<String>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_noise(s: &str) -> std::result::Result<NoiseKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_angle(s: &Option<String>) -> Result<Option<Angle>> {
    s.as_deref().map(str::parse).transpose()
}

fn family_of(id: &str, alpha: &Option<String>, theta: &Option<String>) -> Result<Family> {
    Family::from_id(id, parse_angle(alpha)?.as_ref(), parse_angle(theta)?.as_ref())
}

fn load_gate(spec: &str) -> Result<Channel> {
    let spec = if spec.trim_start().starts_with('{') {
        GateSpec::from_json(spec)?
    } else {
        GateSpec::from_path(spec.as_ref())?
    };
    let gate = spec.build()?;
    gate.ensure_cptp()?;
    Ok(gate)
}

fn load_gates(specs: &[String]) -> Result<Vec<Channel>> {
    specs.iter().map(|s| load_gate(s)).collect()
}

fn load_target(t: &TargetArgs) -> Result<EquationSet> {
    match (&t.family, &t.equations) {
        (Some(id), None) => family_of(id, &t.alpha, &t.theta)?.equations(),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
            EquationSet::from_json(&text)
        }
        _ => Err(Error::Spec("give exactly one of --family and --equations".into())),
    }
}

fn optimizer(seed: Option<u64>) -> SupNormOptions {
    let mut opts = SupNormOptions::default();
    if let Some(s) = seed {
        opts.seed = s;
    }
    opts
}

fn family_json(set: &EquationSet) -> Value {
    set.family()
        .map_or(Value::Null, |f| serde_json::to_value(f.descriptor()).expect("plain data"))
}

fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_json(out: &OutputArgs, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn grid_of(grid: &[f64], from: Option<f64>, to: Option<f64>, points: Option<usize>, log: bool) -> Result<Vec<f64>> {
    match (from, to, points) {
        (Some(a), Some(b), Some(n)) => {
            if n < 2 {
                return Err(Error::Spec("--points must be at least 2".into()));
            }
            if log && !(a > 0.0 && b > 0.0) {
                return Err(Error::Spec("a logarithmic grid needs positive endpoints".into()));
            }
            Ok((0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    if log {
                        (a.ln() + t * (b.ln() - a.ln())).exp()
                    } else {
                        a + t * (b - a)
                    }
                })
                .collect())
        }
        _ if !grid.is_empty() => Ok(grid.to_vec()),
        _ => Err(Error::Spec("give --grid or --from/--to/--points".into())),
    }
}

/// Returns the process exit code.
fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Equations { family, out } => {
            let set = family_of(&family.family, &family.alpha, &family.theta)?.equations()?;
            let mut value = set.to_json();
            value["tool_version"] = json!(TOOL_VERSION);
            value["seed"] = Value::Null;
            emit_json(&out, &value)?;
            Ok(0)
        }
        Command::Check { gates, target, seed, out } => {
            let gates = load_gates(&gates.gates)?;
            let set = load_target(&target)?;
            set.check_gates(&gates)?;
            let opts = optimizer(seed);
            let violations = set.violations(&gates)?;
            let max_violation = violations.iter().copied().fold(0.0, f64::max);
            let mut value = json!({
                "tool_version": TOOL_VERSION,
                "seed": opts.seed,
                "family": family_json(&set),
                "d": set.d(),
                "k_max": set.k_max(),
                "violations": violations,
                "max_violation": max_violation,
            });
            if let Some(family) = set.family() {
                let dist = dist_to_family_with(&gates, family, &opts)?;
                value["lemma7_bound"] = json!(lemma7_bound(&set, dist.distance));
                value["distance"] = serde_json::to_value(&dist)?;
                if let Some(delta) = family.explicit_delta(max_violation) {
                    value["robustness_bound"] = json!(delta);
                }
            }
            emit_json(&out, &value)?;
            Ok(0)
        }
        Command::Selftest { gates, target, eps, seed, delta, out } => {
            let gates = load_gates(&gates.gates)?;
            let set = load_target(&target)?;
            let mut oracle = Oracle::new(gates, seed)?;
            let verdict = run_tester(&mut oracle, &set, eps, delta)?;
            let mut value = serde_json::to_value(&verdict)?;
            value["tool_version"] = json!(TOOL_VERSION);
            value["seed"] = json!(seed);
            value["family"] = family_json(&set);
            emit_json(&out, &value)?;
            Ok(match verdict.verdict {
                Verdict::Pass => 0,
                Verdict::Fail => 1,
            })
        }
        Command::Scan {
            family,
            gates,
            noise,
            grid,
            from,
            to,
            points,
            log,
            seed,
            format,
            out,
        } => {
            let fam = family_of(&family.family, &family.alpha, &family.theta)?;
            let base = if gates.is_empty() {
                fam.member(0.0, 1)?
            } else {
                load_gates(&gates)?
            };
            let grid = grid_of(&grid, from, to, points, log)?;
            let opts = optimizer(seed);
            let records = noise_scan_with(&fam, noise, &grid, &base, &opts)?;
            match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&records, &mut buf)?;
                    emit(&out, &String::from_utf8(buf).expect("ascii"))?;
                }
                Format::Json => emit_json(
                    &out,
                    &json!({
                        "tool_version": TOOL_VERSION,
                        "seed": opts.seed,
                        "family": serde_json::to_value(fam.descriptor())?,
                        "noise_kind": noise,
                        "records": records,
                    }),
                )?,
            }
            Ok(0)
        }
        Command::Distance { gates, seed, out } => {
            if gates.gates.len() != 2 {
                return Err(Error::Spec("distance takes exactly two --gate arguments".into()));
            }
            let g = load_gates(&gates.gates)?;
            let opts = optimizer(seed);
            let s = sup_norm(&g[0].sub(&g[1])?, &opts)?;
            emit_json(
                &out,
                &json!({
                    "tool_version": TOOL_VERSION,
                    "seed": opts.seed,
                    "distance": s.value,
                    "spread": s.spread,
                    "converged": s.converged,
                }),
            )?;
            Ok(0)
        }
    }
}

fn error_code(e: &Error) -> i32 {
    if e.is_numeric() {
        3
    } else {
        2
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}
