use std::f64::consts::E;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use knn_lab_core::harness::{
    aggregate, read_jsonl, report_csv, run_experiment_with, ExperimentConfig, Mode, RunOptions,
    RunOutcome, ScaledOverrides, StatsReport,
};
use knn_lab_core::local::{
    check_claim_inequalities, compute_constants, scaled_constants, ConstantsBundle,
    DEFAULT_SCALED_LAMBDA2, DEFAULT_SCALED_M, DEFAULT_SCALED_N_TILES,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "knn-lab",
    version,
    about = "Experiments on k-nearest-neighbour random geometric graphs"
)]
#[command(subcommand_required = true, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a global or local experiment and write one JSON line per trial.
    Simulate(ExperimentArgs),
    /// Same as simulate, over the range --k-min..=--k-max.
    SweepK(ExperimentArgs),
    /// Local box experiment: rates of A_k, B_k and the bad set C.
    LocalEvents(ExperimentArgs),
    /// Global experiment followed by the Chen-Stein report for each k.
    VerifyPoisson(ExperimentArgs),
    /// Print the local-analysis constants and check their guards.
    Constants(ConstantsArgs),
    /// Monte Carlo search for counterexamples to the two planar claims.
    ClaimsCheck(ClaimsArgs),
    /// Aggregate a JSON Lines results file into CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Global,
    Local,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Args)]
struct ScaledArgs {
    /// Box multiplier M for scaled local constants.
    #[arg(long)]
    scaled_m: Option<f64>,
    /// Tile count N for scaled local constants.
    #[arg(long)]
    scaled_n_tiles: Option<u64>,
    #[arg(long)]
    scaled_lambda2: Option<f64>,
}

impl ScaledArgs {
    fn overrides(&self) -> Option<ScaledOverrides> {
        if self.scaled_m.is_none() && self.scaled_n_tiles.is_none() && self.scaled_lambda2.is_none()
        {
            return None;
        }
        Some(ScaledOverrides {
            m: self.scaled_m.unwrap_or(DEFAULT_SCALED_M),
            n_tiles: self.scaled_n_tiles.unwrap_or(DEFAULT_SCALED_N_TILES),
            lambda2: self.scaled_lambda2.unwrap_or(DEFAULT_SCALED_LAMBDA2),
        })
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    n: f64,
    #[arg(long, conflicts_with_all = ["k_min", "k_max"])]
    k: Option<usize>,
    #[arg(long, requires = "k_max")]
    k_min: Option<usize>,
    #[arg(long, requires = "k_min")]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = E * E)]
    lambda: f64,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[command(flatten)]
    scaled: ScaledArgs,
    #[arg(long, default_value_t = 64)]
    grid_samples: usize,
    /// Trial records are written here as JSON Lines.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of the summary printed on stdout.
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Continue an interrupted --out file.
    #[arg(long)]
    resume: bool,
    /// Record wall-clock time per trial (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value_t = E * E)]
    lambda: f64,
    #[arg(long)]
    n: f64,
    #[command(flatten)]
    scaled: ScaledArgs,
}

#[derive(Args)]
struct ClaimsArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = E * E)]
    lambda: f64,
    #[arg(long, default_value_t = 1e6)]
    n: f64,
    #[command(flatten)]
    scaled: ScaledArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON Lines file written by simulate, sweep-k or verify-poisson.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate(a) => experiment(a, None, false),
        Command::SweepK(a) => {
            if a.k.is_some() || a.k_min.is_none() {
                bail!("sweep-k needs --k-min and --k-max");
            }
            experiment(a, None, false)
        }
        Command::LocalEvents(a) => experiment(a, Some(Mode::Local), false),
        Command::VerifyPoisson(a) => experiment(a, Some(Mode::Global), true),
        Command::Constants(a) => constants(a),
        Command::ClaimsCheck(a) => claims(a),
        Command::Report(a) => report(a),
    }
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("KNN_LAB_THREADS") {
        Ok(v) => {
            let t: usize = v
                .trim()
                .parse()
                .with_context(|| format!("KNN_LAB_THREADS={v:?}"))?;
            if t == 0 {
                bail!("KNN_LAB_THREADS must be at least 1");
            }
            Ok(Some(t))
        }
        Err(_) => Ok(None),
    }
}

fn k_sweep(a: &ExperimentArgs) -> Result<Vec<usize>> {
    match (a.k, a.k_min, a.k_max) {
        (Some(k), _, _) => Ok(vec![k]),
        (None, Some(lo), Some(hi)) if lo <= hi => Ok((lo..=hi).collect()),
        (None, Some(lo), Some(hi)) => bail!("--k-min {lo} exceeds --k-max {hi}"),
        _ => bail!("give --k or --k-min with --k-max"),
    }
}

fn experiment(a: ExperimentArgs, forced: Option<Mode>, chen_stein: bool) -> Result<ExitCode> {
    let mut config = ExperimentConfig::new(a.n, k_sweep(&a)?, a.trials, a.seed);
    config.lambda = a.lambda;
    config.mode = match (forced, a.mode) {
        (Some(Mode::Global), Some(ModeArg::Local)) => bail!("verify-poisson needs --mode global"),
        (Some(m), _) => m,
        (None, Some(ModeArg::Local)) => Mode::Local,
        (None, _) => Mode::Global,
    };
    config.scaled_constants = a.scaled.overrides();
    config.grid_sample_count = a.grid_samples;
    config.record_timing = a.timing;
    config.output_path = a.out.clone();
    let options = RunOptions {
        threads: thread_cap()?,
        resume: a.resume,
    };
    let RunOutcome {
        report, warnings, ..
    } = run_experiment_with(&config, options)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let mut stdout = std::io::stdout().lock();
    match (a.format, chen_stein) {
        (Format::Csv, _) => stdout.write_all(report_csv(&report).as_bytes())?,
        (Format::Jsonl, false) => writeln!(stdout, "{}", serde_json::to_string(&report)?)?,
        (Format::Jsonl, true) => {
            for s in &report.per_k {
                let line = json!({
                    "k": s.k,
                    "tv_X_vs_Po_nu": s.tv_vs_poisson,
                    "chen_stein": s.chen_stein,
                    "reconciliation": s.reconciliation,
                });
                writeln!(stdout, "{line}")?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bundle(lambda: f64, n: f64, scaled: &ScaledArgs) -> Result<ConstantsBundle> {
    Ok(match scaled.overrides() {
        Some(s) => scaled_constants(lambda, n, s.m, s.n_tiles, s.lambda2)?,
        None => compute_constants(lambda, n)?,
    })
}

fn constants(a: ConstantsArgs) -> Result<ExitCode> {
    let c = bundle(a.lambda, a.n, &a.scaled)?;
    let g = &c.guards;
    println!("mode      {:?}", c.mode);
    println!("lambda    {}", c.lambda);
    println!("M         {}", c.m);
    println!("lambda1   {:.20e}", c.lambda1);
    println!("lambda2   {:.20}", c.lambda2);
    println!("N1        {}", c.n1);
    println!("N2        {}", c.n2);
    println!("N3        {}", c.n3);
    println!("N         {}", c.n_tiles);
    println!("c3        {:.20e}", c.c3);
    println!("c4        {:.20e}", c.c4);
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!(
        "guard 1   {:.20e} < lambda1 : {}",
        g.guard1_lhs,
        verdict(g.guard1_holds)
    );
    println!(
        "guard 2   {:.6e} < {:.6e} : {}",
        g.guard2_lhs,
        g.guard2_rhs,
        verdict(g.guard2_holds)
    );
    println!("guard check {}", verdict(g.all()));
    Ok(if g.all() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn claims(a: ClaimsArgs) -> Result<ExitCode> {
    if a.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let c = bundle(a.lambda, a.n, &a.scaled)?;
    let r = check_claim_inequalities(a.samples, a.seed, &c);
    for (name, t) in [("claim1", &r.claim1), ("claim2", &r.claim2)] {
        println!(
            "{name}: accepted {} rejected {} counterexamples {} max_ratio {:.6}",
            t.accepted,
            t.rejected,
            t.counterexamples.len(),
            t.max_ratio
        );
        for cx in t.counterexamples.iter().take(5) {
            println!("  {}", serde_json::to_string(cx)?);
        }
    }
    Ok(if r.counterexample_count() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn report(a: ReportArgs) -> Result<ExitCode> {
    let parsed = read_jsonl(&a.input)?;
    let report: StatsReport = match (parsed.summary, parsed.config) {
        (Some(s), _) => s.report,
        (None, Some(config)) => {
            eprintln!(
                "warning: {} is incomplete ({} of {} trials)",
                a.input.display(),
                parsed.records.len(),
                config.trial_count
            );
            aggregate(&parsed.records, &config)?
        }
        (None, None) => bail!("{} has no config line", a.input.display()),
    };
    let text = match a.format {
        Format::Csv => report_csv(&report),
        Format::Jsonl => format!("{}\n", serde_json::to_string(&report)?),
    };
    match a.out {
        Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}
