use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blowup::delta::{delta_power, max_order};
use blowup::driver::{run, Aborted, Budgets, Goal, Problem, ResolutionTrace};
use blowup::trace::{verify, TraceFile, VerifyError};
use blowup::{Ideal, VariableContext};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "blowup", version, about = "Resolution of singularities by blowing up, chart by chart")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true)]
    max_steps: Option<usize>,
    #[arg(long, global = true)]
    gb_budget: Option<u64>,
    /// Seed for the random overlap checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal order of J and the singular locus at that bound.
    Maxord { spec: PathBuf },
    /// Sing(J, b) as a reduced Gröbner basis.
    Singlocus { spec: PathBuf },
    /// Resolve (J, 1) and report the monomial exponents of the total transform.
    Principalize { spec: PathBuf },
    /// Resolve (J, 1) until the strict transform is smooth and transversal.
    Desing { spec: PathBuf },
    /// Resolve (J, b).
    Resolve {
        spec: PathBuf,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Replay a JSON trace and check every recorded step.
    Verify { trace: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpec {
    vars: Vec<String>,
    gens: Vec<String>,
    #[serde(default)]
    bound: Option<u64>,
    #[serde(default)]
    divisors: Vec<String>,
    #[serde(default)]
    budgets: BudgetSpec,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BudgetSpec {
    max_steps: Option<usize>,
    gb_budget: Option<u64>,
    factorial_cap: Option<u64>,
    overlap_samples: Option<usize>,
}

enum Failure {
    Input(String),
    Aborted(String),
}

struct Loaded {
    ideal: Ideal,
    bound: Option<u64>,
    divisors: Vec<usize>,
    budgets: Budgets,
}

fn load(path: &Path, cli: &Cli) -> Result<Loaded, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))?;
    let spec: ProblemSpec =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))?;
    let ctx = VariableContext::new(&spec.vars).map_err(|e| Failure::Input(e.to_string()))?;
    if spec.gens.is_empty() {
        return Err(Failure::Input("no generators given".into()));
    }
    let gens: Vec<&str> = spec.gens.iter().map(String::as_str).collect();
    let ideal = Ideal::parse(&gens, &ctx).map_err(|e| Failure::Input(format!("generator: {}", e)))?;
    if ideal.is_zero() {
        return Err(Failure::Input("the ideal is zero".into()));
    }
    if spec.bound == Some(0) {
        return Err(Failure::Input("bound must be positive".into()));
    }
    let mut divisors = Vec::new();
    for d in &spec.divisors {
        let v = ctx.index_of(d).ok_or_else(|| Failure::Input(format!("unknown divisor variable '{}'", d)))?;
        if divisors.contains(&v) {
            return Err(Failure::Input(format!("divisor '{}' listed twice", d)));
        }
        divisors.push(v);
    }
    let mut budgets = Budgets::default();
    let b = &spec.budgets;
    if let Some(v) = cli.max_steps.or(b.max_steps) {
        budgets.max_steps = v;
    }
    if let Some(v) = cli.gb_budget.or(b.gb_budget) {
        budgets.gb_budget = v;
    }
    if let Some(v) = b.factorial_cap {
        budgets.factorial_cap = v;
    }
    if let Some(v) = b.overlap_samples {
        budgets.overlap_samples = v;
    }
    if let Some(v) = cli.seed {
        budgets.seed = v;
    }
    Ok(Loaded { ideal, bound: spec.bound, divisors, budgets })
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn render(cli: &Cli, t: &ResolutionTrace) -> String {
    let f = TraceFile::from_trace(t);
    match cli.format {
        Format::Json => f.to_json(),
        Format::Dot => f.to_dot(),
        Format::Text => f.to_text(),
    }
}

fn resolve(cli: &Cli, spec: &Path, bound: Option<u64>, goal: Goal) -> Result<(), Failure> {
    let l = load(spec, cli)?;
    let b = match goal {
        Goal::Desing => 1,
        Goal::Resolve => bound.or(l.bound).unwrap_or(1),
    };
    if b == 0 {
        return Err(Failure::Input("bound must be positive".into()));
    }
    let problem = Problem::new(&l.ideal, b).with_divisors(l.divisors);
    match run(&problem, &l.budgets, goal) {
        Ok(t) => {
            emit(cli, &render(cli, &t))?;
            eprintln!("{} after {} steps", t.status, t.steps());
            Ok(())
        }
        Err(Aborted { trace, error, stage }) => {
            emit(cli, &render(cli, &trace))?;
            Err(Failure::Aborted(format!("stage {}: {}", stage, error)))
        }
    }
}

fn sing_report(cli: &Cli, spec: &Path, use_max: bool) -> Result<(), Failure> {
    let l = load(spec, cli)?;
    let out = blowup::ideal::with_gb_budget(l.budgets.gb_budget, || -> Result<String, blowup::ResolveError> {
        let m = max_order(&l.ideal)?;
        let b = match (use_max, l.bound) {
            (_, Some(b)) => b,
            (true, None) => m.max(1),
            (false, None) => 1,
        };
        let sing = delta_power(&l.ideal, b - 1)?;
        let gb = sing.groebner()?;
        let gens: Vec<String> = gb.elements().iter().map(|g| g.to_string()).collect();
        let dim = sing.dimension()?;
        Ok(match cli.format {
            Format::Json => {
                let v = serde_json::json!({ "max_order": m, "bound": b, "sing": gens, "dimension": dim });
                format!("{}\n", serde_json::to_string_pretty(&v).expect("json value"))
            }
            _ => {
                let mut s = String::new();
                if use_max {
                    s.push_str(&format!("max order: {}\n", m));
                }
                s.push_str(&format!("Sing(J, {}) = <{}>\n", b, gens.join(", ")));
                s.push_str(&format!("dimension: {}\n", dim));
                s
            }
        })
    });
    match out {
        Ok(s) => emit(cli, &s),
        Err(e) => Err(Failure::Aborted(e.to_string())),
    }
}

fn verify_file(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))?;
    let t = TraceFile::from_json(&text).map_err(|e| Failure::Input(e.to_string()))?;
    match verify(&t) {
        Ok(r) => emit(cli, &format!("ok: {} nodes, {} leaves certified\n", r.nodes, r.leaves)),
        Err(VerifyError::Input(m)) => Err(Failure::Input(m)),
        Err(e) => Err(Failure::Aborted(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.format == Format::Dot && matches!(cli.command, Command::Maxord { .. } | Command::Singlocus { .. } | Command::Verify { .. }) {
        eprintln!("error: dot output is only available for resolution runs");
        return ExitCode::from(1);
    }
    let r = match &cli.command {
        Command::Maxord { spec } => sing_report(&cli, spec, true),
        Command::Singlocus { spec } => sing_report(&cli, spec, false),
        Command::Principalize { spec } => resolve(&cli, spec, Some(1), Goal::Resolve),
        Command::Desing { spec } => resolve(&cli, spec, None, Goal::Desing),
        Command::Resolve { spec, bound } => resolve(&cli, spec, *bound, Goal::Resolve),
        Command::Verify { trace } => verify_file(&cli, trace),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {}", m);
            ExitCode::from(1)
        }
        Err(Failure::Aborted(m)) => {
            eprintln!("failed: {}", m);
            ExitCode::from(2)
        }
    }
}
