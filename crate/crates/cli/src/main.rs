use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use qsynth_core::domain::{KarelDomain, ListDomain};
use qsynth_core::harness::{
    check_runs, comparison_table, read_jsonl, run_experiment, summarize, write_csv, write_report, Dsl,
    ExperimentConfig, ExperimentReport, RunRecord, Stage, StrategySpec, StrategySummary, TaskSource, RUNS_FILE,
    SUMMARY_FILE,
};
use qsynth_core::synth::{consistent, synthesize, Enumerate, SynthMode};

/// Query-driven program synthesis experiments.
///
/// Exit status is 0 on success, 1 when an invariant check fails and 2 on
/// any other error.
#[derive(Parser)]
#[command(name = "qsynth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the tasks of an experiment and write tasks.jsonl.
    Gen(RunArgs),
    /// Run every configured query strategy and write the histories.
    Query(RunArgs),
    /// Synthesize programs consistent with a file of examples.
    Synth(SynthArgs),
    /// Query, synthesize and score; write every artifact and a comparison table.
    Eval(RunArgs),
    /// Re-summarize the runs of an earlier eval and re-check its invariants.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Directory for the artifacts.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Experiment configuration (TOML); its dsl and synth sections are used.
    #[arg(short, long)]
    config: PathBuf,
    /// Line-delimited JSON records with `input` and `output` fields.
    #[arg(short, long)]
    examples: PathBuf,
    /// Only use records of this task.
    #[arg(long)]
    task: Option<usize>,
    /// Only use records of this strategy.
    #[arg(long)]
    strategy: Option<StrategySpec>,
    /// Number of programs to print, one JSON record per line.
    #[arg(short = 'k', long, default_value_t = 1)]
    top: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory written by `eval`.
    #[arg(short, long)]
    dir: PathBuf,
}

#[derive(Deserialize)]
struct ExampleLine {
    input: String,
    output: String,
    #[serde(default)]
    task: Option<usize>,
    #[serde(default)]
    strategy: Option<StrategySpec>,
    #[serde(default)]
    step: Option<usize>,
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
}

fn report_violations(violations: &[String]) -> bool {
    for v in violations {
        eprintln!("violation: {v}");
    }
    violations.is_empty()
}

fn write_artifacts(report: &ExperimentReport, out: &Path) -> Result<()> {
    for p in write_report(report, out)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn query_table(summaries: &[StrategySummary]) -> String {
    let mut s = format!(
        "{:<18} {:>6} {:>10} {:>10} {:>10}\n",
        "strategy", "tasks", "surviving", "calls/step", "rej/step"
    );
    for r in summaries {
        s.push_str(&format!(
            "{:<18} {:>6} {:>10.2} {:>10.2} {:>10.2}\n",
            r.strategy.as_str(),
            r.tasks - r.failures,
            r.mean_surviving,
            r.calls_per_step,
            r.rejected_per_step
        ));
    }
    s
}

fn gen(args: &RunArgs) -> Result<bool> {
    let cfg = load_config(&args.config)?;
    let report = run_experiment(&cfg, Stage::Generate)?;
    write_artifacts(&report, &args.out)?;
    println!("{} of {} tasks generated", report.tasks.len(), cfg.tasks);
    Ok(report_violations(&report.violations))
}

fn query(args: &RunArgs) -> Result<bool> {
    let cfg = load_config(&args.config)?;
    let report = run_experiment(&cfg, Stage::Query)?;
    write_artifacts(&report, &args.out)?;
    print!("{}", query_table(&report.summaries));
    Ok(report_violations(&report.violations))
}

fn eval(args: &RunArgs) -> Result<bool> {
    let cfg = load_config(&args.config)?;
    let report = run_experiment(&cfg, Stage::Full)?;
    write_artifacts(&report, &args.out)?;
    print!("{}", comparison_table(&report.summaries));
    Ok(report_violations(&report.violations))
}

fn report(args: &ReportArgs) -> Result<bool> {
    let runs: Vec<RunRecord> = read_jsonl(&args.dir.join(RUNS_FILE))?;
    let mut order: Vec<StrategySpec> = Vec::new();
    for r in &runs {
        if !order.contains(&r.strategy) {
            order.push(r.strategy);
        }
    }
    let summaries = summarize(&runs, &order);
    let mut violations = check_runs(&runs, &summaries);
    for r in runs.iter().filter(|r| r.error.is_none() && !r.truth_survived) {
        violations.push(format!("task {} {}: ground truth eliminated from the pool", r.task, r.strategy));
    }
    write_csv(&args.dir.join(SUMMARY_FILE), &summaries)?;
    print!("{}", comparison_table(&summaries));
    Ok(report_violations(&violations))
}

fn synth_in<D: TaskSource + Enumerate>(domain: &D, cfg: &ExperimentConfig, args: &SynthArgs) -> Result<bool> {
    let lines: Vec<ExampleLine> = read_jsonl(&args.examples)?;
    let mut examples = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        let keep = args.task.is_none_or(|t| l.task == Some(t))
            && args.strategy.is_none_or(|s| l.strategy == Some(s))
            && l.step != Some(0);
        if !keep {
            continue;
        }
        let x = domain
            .decode_input(&l.input)
            .map_err(|e| anyhow::anyhow!("record {}: input: {e}", i + 1))?;
        let y = domain
            .decode_output(&l.output)
            .map_err(|e| anyhow::anyhow!("record {}: output: {e}", i + 1))?;
        examples.push((x, y));
    }
    if examples.is_empty() {
        bail!("no examples selected from {}", args.examples.display());
    }
    let mode = if args.top <= 1 {
        SynthMode::First
    } else {
        SynthMode::TopK(args.top)
    };
    let result = synthesize(domain, &examples, cfg.synth.budget(), &mode)?;
    for (rank, p) in result.candidates.iter().enumerate() {
        let line = serde_json::json!({ "rank": rank + 1, "size": domain.program_size(p), "program": domain.encode_program(p) });
        println!("{line}");
    }
    eprintln!(
        "{} candidates, {} explored, stop {}",
        result.candidates.len(),
        result.stats.explored,
        result.stats.stop.as_str()
    );
    let unsound: Vec<String> = result
        .candidates
        .iter()
        .filter(|p| !consistent(domain, p, &examples))
        .map(|p| format!("candidate contradicts the examples: {}", domain.encode_program(p)))
        .collect();
    Ok(report_violations(&unsound))
}

fn synth(args: &SynthArgs) -> Result<bool> {
    let cfg = load_config(&args.config)?;
    match cfg.dsl {
        Dsl::Karel => synth_in(&KarelDomain::for_config(&cfg), &cfg, args),
        Dsl::List => synth_in(&ListDomain::for_config(&cfg), &cfg, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Query(a) => query(a),
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
