use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use driftsquint::envsim::{scenario, SCENARIOS};
use driftsquint::harness::{
    self, compare, evaluate_bounds, intervals, read_config, run, run_seeds, structural_suite,
    verify_seeds, write_bound_csv, write_bounds, write_comparison, write_comparison_csv,
    write_config, write_run_csv, Algorithm, BoundReport, ExperimentConfig, IntervalPolicy,
    RunVerification, StructuralLimits,
};
use driftsquint::Result;

#[derive(Parser)]
#[command(
    name = "driftsquint",
    version,
    about = "Expert-advice learners for changing environments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trace and bound report.
    Run(RunArgs),
    /// Print or write the bound report of one experiment.
    Bounds(RunArgs),
    /// Run the structural suite and verify runs over several seeds.
    Verify(VerifyArgs),
    /// Compare algorithms on one environment, averaged over seeds.
    Compare(CompareArgs),
    /// List the built-in scenarios, optionally writing them as configs.
    Scenarios(ScenarioArgs),
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<Algorithm>,
    /// Built-in scenario, used when no config is given.
    #[arg(long, default_value = "single-switch")]
    scenario: String,
    #[arg(long, default_value_t = 4)]
    experts: usize,
    /// Horizon.
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exhaustive, dyadic, sampled:<n>, dyadic+sampled:<n> or auto.
    #[arg(long)]
    intervals: Option<IntervalPolicy>,
}

const DEFAULT_HORIZON: usize = 256;

impl ExperimentArgs {
    fn build(&self, default_algo: Algorithm) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => read_config(path)?,
            None => ExperimentConfig::new(
                self.algo.unwrap_or(default_algo),
                scenario(
                    &self.scenario,
                    self.experts,
                    self.horizon.unwrap_or(DEFAULT_HORIZON),
                    self.seed.unwrap_or(0),
                )?,
            ),
        };
        if let Some(a) = self.algo {
            c.algorithm = a;
        }
        if let Some(t) = self.horizon {
            c.environment.horizon = t;
        }
        if let Some(s) = self.seed {
            c.environment.seed = s;
        }
        if let Some(p) = self.intervals {
            c.intervals = p;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Number of seeds, counting up from --seed.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Only run the structural suite.
    #[arg(long)]
    structural_only: bool,
    /// Skip the structural suite.
    #[arg(long)]
    skip_structural: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Algorithms to compare, comma separated; all when absent.
    #[arg(long, value_delimiter = ',')]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, default_value_t = 4)]
    experts: usize,
    #[arg(long = "T", default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write one config per scenario into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_bound_summary(report: &BoundReport) {
    let violations = report.violations();
    let slack = report
        .min_slack()
        .map(|s| format!("{s:.6}"))
        .unwrap_or_else(|| "n/a".into());
    println!(
        "bounds: {} rows, {} asserted, {} violations, min asserted slack {slack}",
        report.rows.len(),
        report.asserted_rows(),
        violations.len()
    );
    for v in violations.iter().take(10) {
        println!(
            "  VIOLATION {} {} K={} R={} bound={} slack={}",
            v.bound_name, v.interval, v.comparator, v.regret, v.bound, v.slack
        );
    }
}

fn output_dir(cli_out: &Option<PathBuf>, config: &ExperimentConfig) -> Option<PathBuf> {
    cli_out.clone().or_else(|| config.output.clone())
}

fn cmd_run(args: &RunArgs) -> Result<bool> {
    let config = args.experiment.build(Algorithm::SquintCeUniform)?;
    let record = run(&config)?;
    let report = evaluate_bounds(&record, &config)?;
    let k = record.experts();
    let t = record.horizon();
    let full = driftsquint::domain::Interval::new(1, t)?;
    let worst = (0..k)
        .map(|e| record.ledger.regret(e, full))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    println!(
        "{} on {}×{} (seed {}): max_k R_T^k = {worst:.6}",
        config.algorithm, t, k, config.environment.seed
    );
    print_bound_summary(&report);
    if let Some(dir) = output_dir(&args.out, &config) {
        fs::create_dir_all(&dir)?;
        write_run_csv(&record, &dir.join("run.csv"))?;
        write_bound_csv(&report, &dir.join("bounds.csv"))?;
        write_config(&config, &dir.join("config.json"))?;
        println!("wrote {}", dir.display());
    }
    Ok(report.is_clean())
}

fn cmd_bounds(args: &RunArgs) -> Result<bool> {
    let config = args.experiment.build(Algorithm::SquintCeUniform)?;
    let record = run(&config)?;
    let report = evaluate_bounds(&record, &config)?;
    match output_dir(&args.out, &config) {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            write_bound_csv(&report, &dir.join("bounds.csv"))?;
            print_bound_summary(&report);
        }
        None => write_bounds(&report, io::stdout().lock())?,
    }
    Ok(report.is_clean())
}

fn print_verification(v: &RunVerification) {
    let slack = v
        .bounds
        .min_slack()
        .map(|s| format!("{s:.6}"))
        .unwrap_or_else(|| "n/a".into());
    println!(
        "{} {} seed {}: {} bound rows, {} violations, min slack {slack}",
        if v.is_clean() { "PASS" } else { "FAIL" },
        v.algorithm,
        v.seed,
        v.bounds.rows.len(),
        v.bounds.violations().len()
    );
    for p in &v.trace_problems {
        println!("  trace: {p}");
    }
    for c in &v.surrogates.checks {
        println!(
            "  {:<26} {:>8} checks, worst margin {:.3e}, {} violations",
            c.name,
            c.count,
            c.worst_margin,
            c.violations.len()
        );
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let mut ok = true;
    if !args.skip_structural {
        for c in structural_suite(StructuralLimits::default()) {
            println!(
                "{} {} ({} cases, {} failed)",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.failed
            );
            for e in &c.examples {
                println!("  {e}");
            }
            ok &= c.passed();
        }
    }
    if args.structural_only {
        return Ok(ok);
    }
    let config = args.experiment.build(Algorithm::SquintCeUniform)?;
    let first = config.environment.seed;
    let seeds: Vec<u64> = (first..first + args.seeds).collect();
    for v in verify_seeds(&config, &seeds)? {
        print_verification(&v);
        ok &= v.is_clean();
    }
    Ok(ok)
}

fn cmd_compare(args: &CompareArgs) -> Result<bool> {
    let config = args.experiment.build(Algorithm::SquintCeUniform)?;
    let algos = if args.algos.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        args.algos.clone()
    };
    let first = config.environment.seed;
    let seeds: Vec<u64> = (first..first + args.seeds).collect();
    let records = run_seeds(&config, &algos, &seeds)?;
    let ivs = intervals(config.intervals, config.horizon(), config.environment.seed)?;
    let table = compare(&records, &ivs)?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_comparison_csv(&table, &dir.join("compare.csv"))?;
            println!("wrote {}", dir.join("compare.csv").display());
        }
        None => write_comparison(&table, io::stdout().lock())?,
    }
    Ok(true)
}

fn cmd_scenarios(args: &ScenarioArgs) -> Result<bool> {
    let mut stdout = io::stdout().lock();
    for name in SCENARIOS {
        let env = scenario(name, args.experts, args.horizon, args.seed)?;
        writeln!(
            stdout,
            "{name}: K={} T={} segments starting at {:?}",
            env.experts,
            env.horizon,
            env.boundaries()
        )?;
        if let Some(dir) = &args.out {
            fs::create_dir_all(dir)?;
            let config = ExperimentConfig::new(Algorithm::SquintCeUniform, env);
            write_config(&config, &Path::new(dir).join(format!("{name}.json")))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    harness::init_thread_pool();
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Scenarios(a) => cmd_scenarios(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
