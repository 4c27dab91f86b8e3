//! The `wpda` command-line tool.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::automaton::{InputId, Wpda};
use crate::error::{Error, Result};
use crate::oracle::{self, EnumerationBudget};
use crate::runsum::{runsum, SolverOptions};
use crate::semiring::{Semiring, SemiringKind};
use crate::stringsum::{self, stack_automaton, Algorithm};
use crate::transform::{Mode, Pass};

#[derive(Debug, Parser)]
#[command(name = "wpda", version, about = "Weighted pushdown automata toolkit")]
pub struct Cli {
    /// Override the semiring named in the machine file.
    #[arg(long, global = true)]
    pub semiring: Option<String>,
    /// Equality tolerance for real and log weights; also the stopping
    /// tolerance of `runsum`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Machine file (JSON).
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a machine and report its subclasses.
    Validate(Input),
    /// Print the subclass report as JSON.
    Classify(Input),
    /// Apply one transformation.
    Transform {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        pass: String,
        #[arg(long)]
        out: PathBuf,
        /// Normal-form direction: bottom-up or top-down.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Compute the stringsum of one string.
    Stringsum {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "bu-fast")]
        algo: String,
        #[arg(long, default_value = "")]
        string: String,
        /// Also print ⊕/⊗ counts as CSV.
        #[arg(long)]
        counters: bool,
        /// Write the stack automaton after PREFIX_LEN symbols to OUT.
        #[arg(long, num_args = 2, value_names = ["PREFIX_LEN", "OUT"])]
        emit_wfsa: Option<Vec<String>>,
    },
    /// Total weight of all accepting runs.
    Runsum {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        /// Simultaneous instead of in-place updates.
        #[arg(long)]
        jacobi: bool,
    },
    /// Brute-force stringsum by run enumeration.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "")]
        string: String,
        #[arg(long)]
        budget_steps: Option<usize>,
        #[arg(long)]
        budget_depth: Option<usize>,
    },
    /// Apply passes in order and certify the result against the oracle.
    Pipeline {
        #[command(flatten)]
        input: Input,
        /// Comma-separated pass names.
        #[arg(long, default_value = "")]
        passes: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Operation counts on a scaling family, as CSV.
    Bench {
        /// `bu` or `lang-vs-fast`.
        #[arg(long, default_value = "bu")]
        family: String,
        /// Comma-separated numbers of states.
        #[arg(long, default_value = "2,4,8")]
        sizes: String,
        #[arg(long, default_value_t = 12)]
        length: usize,
        #[arg(long, default_value_t = 2)]
        gamma: usize,
        /// Add a wall_time column (not reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Context {
    semiring: Option<Semiring>,
    tol: Option<f64>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let semiring = match &cli.semiring {
            Some(name) => {
                let kind: SemiringKind = name.parse()?;
                let sr = Semiring::new(kind);
                Some(match cli.tol {
                    Some(t) => sr.with_tolerance(t),
                    None => sr,
                })
            }
            None => None,
        };
        Ok(Context { semiring, tol: cli.tol })
    }

    fn load(&self, input: &Input, err: &mut dyn Write) -> Result<Wpda> {
        let (p, warnings) = Wpda::load(&input.input, self.semiring)?;
        for w in warnings {
            writeln!(err, "warning: {w}")?;
        }
        Ok(match (self.semiring, self.tol) {
            (None, Some(t)) => p.with_semiring(p.semiring().with_tolerance(t)),
            _ => p,
        })
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Validate(input) => {
            let p = ctx.load(input, err)?;
            writeln!(
                out,
                "{} states, {} stack symbols, {} transitions",
                p.num_states(),
                p.num_symbols(),
                p.transitions().len()
            )?;
            writeln!(out, "{}", p.classify().summary())?;
        }
        Command::Classify(input) => {
            let p = ctx.load(input, err)?;
            let report = serde_json::to_string_pretty(&p.classify()).expect("report serializes");
            writeln!(out, "{report}")?;
        }
        Command::Transform { input, pass, out: path, mode } => {
            let p = ctx.load(input, err)?;
            let mut pass: Pass = pass.parse()?;
            if let (Pass::NormalForm(_), Some(m)) = (pass, mode) {
                pass = Pass::NormalForm(m.parse::<Mode>()?);
            }
            let q = pass.apply(&p)?;
            q.save(path)?;
            writeln!(out, "{pass}: {} transitions, {}", q.transitions().len(), q.classify().summary())?;
        }
        Command::Stringsum { input, algo, string, counters, emit_wfsa } => {
            let p = ctx.load(input, err)?;
            let algo: Algorithm = algo.parse()?;
            let y = p.encode(string)?;
            let chart = stringsum::chart_items(&p, &y, algo)?;
            writeln!(out, "{}", p.semiring().format(chart.value()))?;
            if *counters {
                writeln!(out, "algo,n,Q,Gamma,oplus,otimes")?;
                writeln!(
                    out,
                    "{algo},{},{},{},{},{}",
                    y.len(),
                    p.num_states(),
                    p.num_symbols(),
                    chart.ops.oplus,
                    chart.ops.otimes
                )?;
            }
            if let Some(args) = emit_wfsa {
                let m: usize = args[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad prefix length `{}`", args[0])))?;
                let wfsa = stack_automaton(&p, &y, m)?;
                let text = serde_json::to_string_pretty(&wfsa.to_json(&p)).expect("json serializes");
                std::fs::write(&args[1], text + "\n")?;
            }
        }
        Command::Runsum { input, max_iters, jacobi } => {
            let p = ctx.load(input, err)?;
            let opts = SolverOptions { max_iters: *max_iters, tol: ctx.tol.unwrap_or(1e-12), jacobi: *jacobi };
            let z = runsum(&p, &opts)?;
            writeln!(out, "{}", p.semiring().format(z))?;
        }
        Command::Oracle { input, string, budget_steps, budget_depth } => {
            let p = ctx.load(input, err)?;
            let y = p.encode(string)?;
            let default = EnumerationBudget::for_length(y.len());
            let budget = EnumerationBudget::new(
                budget_steps.unwrap_or(default.max_transitions),
                budget_depth.unwrap_or(default.max_stack_depth),
            );
            let e = oracle::enumerate_runs(&p, &y, budget);
            let v = oracle::stringsum_oracle(&p, &y, budget);
            writeln!(out, "runs: {}", e.runs.len())?;
            writeln!(out, "weight: {}", p.semiring().format(v.value))?;
            writeln!(out, "complete: {}", e.complete && v.complete)?;
        }
        Command::Pipeline { input, passes, out: path } => {
            let p = ctx.load(input, err)?;
            return pipeline(&p, passes, path, out, err);
        }
        Command::Bench { family, sizes, length, gamma, timing, out: path } => {
            let sizes = parse_list(sizes)?;
            let sr = ctx.semiring.unwrap_or(Semiring::new(SemiringKind::Real));
            let csv = bench(sr, family, &sizes, *length, *gamma, *timing)?;
            match path {
                Some(path) => std::fs::write(path, csv)?,
                None => write!(out, "{csv}")?,
            }
        }
    }
    Ok(0)
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size `{t}`"))))
        .collect()
}

/// Warnings for pass lists that run a step before the one it expects.
pub fn pass_order_warnings(passes: &[Pass]) -> Vec<String> {
    let pos = |p: Pass| passes.iter().position(|&q| q == p);
    let mut out = Vec::new();
    let unary = pos(Pass::RemoveUnary).or(pos(Pass::RemoveUnaryFast));
    if let (Some(u), Some(n)) = (unary, pos(Pass::RemoveNullary)) {
        if u < n {
            out.push("unary removal runs before nullary removal; it expects a nullary-free machine".into());
        }
    }
    if let (Some(n), Some(b)) = (pos(Pass::RemoveNullary), pos(Pass::Binarize)) {
        if n < b {
            out.push("nullary removal runs before binarization; it expects a binarized machine".into());
        }
    }
    out
}

/// Evaluates `q` on `y` with whichever algorithm applies, falling back to
/// the oracle.
fn evaluate(q: &Wpda, y: &[InputId]) -> Option<f64> {
    let report = q.classify();
    let algo = if report.is_normal_form_bu {
        Some(Algorithm::BuFast)
    } else if report.is_normal_form_td {
        Some(Algorithm::TopDown)
    } else if report.is_simple && q.initial().stack.is_empty() && q.final_config().stack.len() <= 1 {
        Some(Algorithm::Lang)
    } else {
        None
    };
    match algo {
        Some(a) => stringsum::stringsum(q, y, a).ok(),
        None => {
            let v = oracle::stringsum_oracle(q, y, EnumerationBudget::for_length(y.len()));
            v.complete.then_some(v.value)
        }
    }
}

fn pipeline(p: &Wpda, passes: &str, path: &PathBuf, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let passes: Vec<Pass> =
        passes.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect::<Result<_>>()?;
    for w in pass_order_warnings(&passes) {
        writeln!(err, "warning: {w}")?;
    }
    let mut q = p.clone();
    for pass in &passes {
        q = pass.apply(&q).map_err(|e| match e {
            Error::Precondition(m) => Error::Precondition(format!("{pass}: {m}")),
            Error::Structural(m) => Error::Structural(format!("{pass}: {m}")),
            other => other,
        })?;
    }
    q.save(path)?;

    let sr = p.semiring();
    let mut failures = 0;
    writeln!(out, "string\tbefore\tafter\tverdict")?;
    for y in oracle::all_strings(p.inputs().len(), 3) {
        let before = oracle::stringsum_oracle(p, &y, EnumerationBudget::for_length(y.len()));
        // the transformed machine keeps the input alphabet
        let after = evaluate(&q, &y);
        let verdict = match (before.complete, after) {
            (true, Some(a)) if sr.approx_eq_tol(before.value, a, 1e-6) => "pass",
            (true, Some(_)) => {
                failures += 1;
                "FAIL"
            }
            _ => "skip",
        };
        let shown = if y.is_empty() { "ε".to_string() } else { p.decode(&y) };
        let after = after.map(|a| sr.format(a)).unwrap_or_else(|| "?".into());
        writeln!(out, "{shown}\t{}\t{after}\t{verdict}", sr.format(before.value))?;
    }
    if failures == 0 {
        writeln!(out, "certificate: pass")?;
        Ok(0)
    } else {
        writeln!(out, "certificate: FAIL ({failures} strings)")?;
        Ok(2)
    }
}

/// Runs the algorithms of `family` on `aⁿ` for each machine size and
/// returns the CSV.
pub fn bench(sr: Semiring, family: &str, sizes: &[usize], n: usize, gamma: usize, timing: bool) -> Result<String> {
    type Family = (&'static [Algorithm], fn(Semiring, usize, usize) -> Wpda);
    let (algos, build): Family = match family {
        "bu" => (&[Algorithm::BuBasic, Algorithm::BuFast, Algorithm::BuAlt], oracle::scaling_family),
        "lang-vs-fast" => (&[Algorithm::Lang, Algorithm::LangFast], oracle::lang_family),
        other => return Err(Error::Parse(format!("unknown bench family `{other}`"))),
    };
    let mut csv = String::from("algo,n,Q,Gamma,oplus,otimes");
    if timing {
        csv.push_str(",wall_time");
    }
    csv.push('\n');
    for &k in sizes {
        if k == 0 {
            return Err(Error::Parse("machine sizes must be positive".into()));
        }
        let p = build(sr, k, gamma);
        let y = vec![0; n];
        for &algo in algos {
            let t0 = Instant::now();
            let chart = stringsum::chart_items(&p, &y, algo)?;
            let secs = t0.elapsed().as_secs_f64();
            csv.push_str(&format!("{algo},{n},{k},{gamma},{},{}", chart.ops.oplus, chart.ops.otimes));
            if timing {
                csv.push_str(&format!(",{secs:.6}"));
            }
            csv.push('\n');
        }
    }
    Ok(csv)
}
