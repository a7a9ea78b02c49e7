use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Dsl, ExperimentConfig, StrategySpec, SynthMethod};
use super::metrics::{coverage_report, coverage_row, evaluate_metrics, CoverageRow, MetricRow};
use super::task::{make_task, task_rng, Task, TaskRecord, TaskSource, QUERY_STREAM};
use super::HarnessError;
use crate::domain::{Domain, KarelDomain, ListDomain};
use crate::fspace::{train_recurrent, EncoderParams, TrainReport};
use crate::query::{
    replays, run_query_loop, CandidatePool, FspaceStrategy, IgStrategy, QbcStrategy, QueryRun, RandomStrategy,
    Strategy,
};
use crate::synth::{consistent, pool_search, synthesize, Enumerate, SynthMode};

const TRAIN_STREAM: u64 = 2;

/// How far to take each task.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Draw tasks only.
    Generate,
    /// Draw tasks and run the query loops.
    Query,
    /// Query, synthesize and score.
    Full,
}

/// Outcome of one strategy on one task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub task: usize,
    pub strategy: StrategySpec,
    pub truth: String,
    pub predicted: Option<String>,
    pub pool_size: usize,
    pub surviving: usize,
    pub truth_survived: bool,
    pub steps: usize,
    pub oracle_calls: usize,
    pub rejected: usize,
    /// Kept examples whose response is not evidence.
    pub crash_examples: usize,
    pub semantics: bool,
    pub generalization: bool,
    pub fe: bool,
    pub exact: bool,
    pub cov_semantics: Option<f64>,
    pub cov_generalization: Option<f64>,
    pub cov_fe: Option<f64>,
    pub synth_stop: Option<String>,
    pub synth_explored: u64,
    pub error: Option<String>,
}

impl RunRecord {
    fn failed(task: usize, strategy: StrategySpec, truth: String, pool_size: usize, error: String) -> Self {
        RunRecord {
            task,
            strategy,
            truth,
            predicted: None,
            pool_size,
            surviving: pool_size,
            truth_survived: true,
            steps: 0,
            oracle_calls: 0,
            rejected: 0,
            crash_examples: 0,
            semantics: false,
            generalization: false,
            fe: false,
            exact: false,
            cov_semantics: None,
            cov_generalization: None,
            cov_fe: None,
            synth_stop: None,
            synth_explored: 0,
            error: Some(error),
        }
    }

    pub fn metrics(&self) -> MetricRow {
        MetricRow {
            semantics: self.semantics,
            generalization: self.generalization,
            fe: self.fe,
            exact: self.exact,
        }
    }

    pub fn coverage(&self) -> Option<CoverageRow> {
        Some(CoverageRow {
            semantics: self.cov_semantics?,
            generalization: self.cov_generalization?,
            fe: self.cov_fe?,
        })
    }
}

/// One example of a query history; step 0 is the start signal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub task: usize,
    pub strategy: StrategySpec,
    pub step: usize,
    pub input: String,
    pub output: String,
    pub evidence: bool,
    pub oracle_calls: usize,
    pub rejected: usize,
}

/// Aggregates for one strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: StrategySpec,
    pub tasks: usize,
    pub failures: usize,
    pub mean_pool: f64,
    pub mean_surviving: f64,
    pub semantics: usize,
    pub generalization: usize,
    pub fe: usize,
    pub exact: usize,
    pub semantics_rate: f64,
    pub generalization_rate: f64,
    pub fe_rate: f64,
    pub exact_rate: f64,
    pub cov_semantics: Option<f64>,
    pub cov_generalization: Option<f64>,
    pub cov_fe: Option<f64>,
    /// Mean oracle calls per query step.
    pub calls_per_step: f64,
    /// Mean discarded probes per query step.
    pub rejected_per_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub dsl: Dsl,
    pub seed: u64,
    pub tasks: Vec<TaskRecord>,
    pub runs: Vec<RunRecord>,
    pub histories: Vec<HistoryRecord>,
    pub summaries: Vec<StrategySummary>,
    pub violations: Vec<String>,
    pub training: Option<TrainReport>,
}

impl ExperimentReport {
    pub fn summary(&self, s: StrategySpec) -> Option<&StrategySummary> {
        self.summaries.iter().find(|x| x.strategy == s)
    }
}

/// Run `cfg` up to `stage`. Tasks run in parallel; results are assembled in
/// task order, so the report depends only on the configuration.
pub fn run_experiment(cfg: &ExperimentConfig, stage: Stage) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    match cfg.dsl {
        Dsl::Karel => run_domain(&KarelDomain::for_config(cfg), cfg, stage),
        Dsl::List => run_domain(&ListDomain::for_config(cfg), cfg, stage),
    }
}

fn train_fspace<D: TaskSource>(
    domain: &D,
    cfg: &ExperimentConfig,
) -> Result<(Arc<EncoderParams>, TrainReport), HarnessError> {
    let mut rng = task_rng(cfg.seed, 0, TRAIN_STREAM);
    let mut seen = HashSet::new();
    let mut programs = Vec::new();
    for _ in 0..cfg.fspace.training_programs * 50 {
        if programs.len() == cfg.fspace.training_programs {
            break;
        }
        let p = domain.sample_truth(cfg, &mut rng);
        if seen.insert(p.clone()) {
            programs.push(p);
        }
    }
    let mut params = EncoderParams::init(domain.feature_dim(), cfg.fspace.encoder(), &mut rng);
    let report = train_recurrent(&mut params, domain, &programs, &cfg.fspace.train(), &mut rng)?;
    Ok((Arc::new(params), report))
}

fn build_strategy<D: Domain>(
    spec: StrategySpec,
    cfg: &ExperimentConfig,
    params: Option<&Arc<EncoderParams>>,
) -> Result<Box<dyn Strategy<D>>, String> {
    let s = &cfg.strategy;
    let qbc = |crash_aware| QbcStrategy {
        committee: s.committee,
        candidates: s.candidates,
        crash_aware,
        max_rounds: s.max_rounds,
    };
    Ok(match spec {
        StrategySpec::Random => Box::new(RandomStrategy {
            crash_filter: true,
            max_tries: s.max_tries,
        }),
        StrategySpec::RandomUnfiltered => Box::new(RandomStrategy {
            crash_filter: false,
            max_tries: s.max_tries,
        }),
        StrategySpec::QbcAware => Box::new(qbc(true)),
        StrategySpec::QbcUnaware => Box::new(qbc(false)),
        StrategySpec::Ig => Box::new(IgStrategy {
            candidates: s.candidates,
            lookahead: s.lookahead,
            crash_aware: s.ig_crash_aware,
            max_rounds: s.max_rounds,
        }),
        StrategySpec::Fspace => {
            let params = params.ok_or("fspace parameters are unavailable")?;
            Box::new(FspaceStrategy {
                params: Arc::clone(params),
                committee: s.committee,
                candidates: s.candidates,
                crash_aware: s.fspace_crash_aware,
                max_rounds: s.max_rounds,
            })
        }
    })
}

struct TaskOutput {
    task: Option<TaskRecord>,
    runs: Vec<RunRecord>,
    histories: Vec<HistoryRecord>,
    violations: Vec<String>,
}

fn run_domain<D: TaskSource + Enumerate>(
    domain: &D,
    cfg: &ExperimentConfig,
    stage: Stage,
) -> Result<ExperimentReport, HarnessError> {
    let mut training = None;
    let mut params = None;
    let mut train_error = None;
    if stage != Stage::Generate && cfg.strategies.contains(&StrategySpec::Fspace) {
        match train_fspace(domain, cfg) {
            Ok((p, r)) => {
                params = Some(p);
                training = Some(r);
            }
            Err(e) => train_error = Some(format!("fspace training failed: {e}")),
        }
    }
    let outputs: Vec<TaskOutput> = (0..cfg.tasks)
        .into_par_iter()
        .map(|id| run_task(domain, cfg, stage, id, params.as_ref(), train_error.as_deref()))
        .collect();
    let mut report = ExperimentReport {
        name: cfg.name.clone(),
        dsl: cfg.dsl,
        seed: cfg.seed,
        tasks: Vec::new(),
        runs: Vec::new(),
        histories: Vec::new(),
        summaries: Vec::new(),
        violations: Vec::new(),
        training,
    };
    for out in outputs {
        report.tasks.extend(out.task);
        report.runs.extend(out.runs);
        report.histories.extend(out.histories);
        report.violations.extend(out.violations);
    }
    if stage == Stage::Full {
        report.summaries = summarize(&report.runs, &cfg.strategies);
        report.violations.extend(check_runs(&report.runs, &report.summaries));
    } else if stage == Stage::Query {
        report.summaries = summarize(&report.runs, &cfg.strategies);
    }
    Ok(report)
}

fn run_task<D: TaskSource + Enumerate>(
    domain: &D,
    cfg: &ExperimentConfig,
    stage: Stage,
    id: usize,
    params: Option<&Arc<EncoderParams>>,
    train_error: Option<&str>,
) -> TaskOutput {
    let mut out = TaskOutput {
        task: None,
        runs: Vec::new(),
        histories: Vec::new(),
        violations: Vec::new(),
    };
    let task = match make_task(domain, cfg, id) {
        Ok(t) => t,
        Err(e) => {
            for &spec in &cfg.strategies {
                out.runs
                    .push(RunRecord::failed(id, spec, String::new(), 0, e.to_string()));
            }
            return out;
        }
    };
    out.task = Some(task.record(domain));
    if stage == Stage::Generate {
        return out;
    }
    let truth_text = domain.encode_program(&task.truth);
    for &spec in &cfg.strategies {
        let strategy = match (spec, train_error) {
            (StrategySpec::Fspace, Some(e)) => Err(e.to_string()),
            _ => build_strategy::<D>(spec, cfg, params),
        };
        let mut strategy = match strategy {
            Ok(s) => s,
            Err(e) => {
                out.runs
                    .push(RunRecord::failed(id, spec, truth_text.clone(), task.pool.len(), e));
                continue;
            }
        };
        let mut pool = CandidatePool::new(task.pool.clone());
        let mut rng = task_rng(cfg.seed, id, QUERY_STREAM);
        let run = match run_query_loop(domain, &task.truth, strategy.as_mut(), &mut pool, cfg.queries, &mut rng) {
            Ok(r) => r,
            Err(e) => {
                out.runs.push(RunRecord::failed(
                    id,
                    spec,
                    truth_text.clone(),
                    task.pool.len(),
                    e.to_string(),
                ));
                continue;
            }
        };
        out.histories.extend(history_records(domain, id, spec, &run));
        let (record, violations) = score_run(domain, cfg, stage, &task, spec, &pool, &run);
        out.runs.push(record);
        out.violations.extend(violations);
    }
    out
}

fn history_records<D: Domain>(domain: &D, task: usize, spec: StrategySpec, run: &QueryRun<D>) -> Vec<HistoryRecord> {
    run.history
        .iter()
        .enumerate()
        .map(|(step, (x, y))| {
            let stats = step.checked_sub(1).map(|i| run.steps[i]).unwrap_or_default();
            HistoryRecord {
                task,
                strategy: spec,
                step,
                input: domain.encode_input(x),
                output: domain.encode_output(y),
                evidence: domain.is_evidence(y),
                oracle_calls: stats.oracle_calls,
                rejected: stats.rejected,
            }
        })
        .collect()
}

fn score_run<D: TaskSource + Enumerate>(
    domain: &D,
    cfg: &ExperimentConfig,
    stage: Stage,
    task: &Task<D>,
    spec: StrategySpec,
    pool: &CandidatePool<D::Program>,
    run: &QueryRun<D>,
) -> (RunRecord, Vec<String>) {
    let tag = format!("task {} {spec}", task.id);
    let mut violations = Vec::new();
    let truth_survived = pool.is_alive(task.truth_index());
    if !truth_survived {
        violations.push(format!("{tag}: ground truth eliminated from the pool"));
    }
    if !replays(domain, &task.truth, run.examples()) {
        violations.push(format!("{tag}: history does not replay against the ground truth"));
    }
    let aware = matches!(spec, StrategySpec::Random | StrategySpec::QbcAware)
        || (spec == StrategySpec::Fspace && cfg.strategy.fspace_crash_aware)
        || (spec == StrategySpec::Ig && cfg.strategy.ig_crash_aware);
    let crash_examples = run.examples().iter().filter(|(_, y)| !domain.is_evidence(y)).count();
    if aware && crash_examples > 0 {
        violations.push(format!("{tag}: crash-aware strategy kept a crash example"));
    }
    let mut record = RunRecord {
        task: task.id,
        strategy: spec,
        truth: domain.encode_program(&task.truth),
        predicted: None,
        pool_size: pool.len(),
        surviving: pool.surviving(),
        truth_survived,
        steps: run.steps.len(),
        oracle_calls: run.total_calls(),
        rejected: run.steps.iter().map(|s| s.rejected).sum(),
        crash_examples,
        ..RunRecord::failed(task.id, spec, String::new(), 0, String::new())
    };
    record.error = None;
    if stage != Stage::Full {
        return (record, violations);
    }
    let evidence = run.evidence(domain);
    let first = SynthMode::First;
    let from_pool = || pool_search(domain, &task.pool, &evidence, &first);
    let result = match cfg.synth.method {
        SynthMethod::Pool => from_pool(),
        SynthMethod::Enumerate => match synthesize(domain, &evidence, cfg.synth.budget(), &first) {
            Ok(r) if !r.candidates.is_empty() => r,
            _ => from_pool(),
        },
    };
    record.synth_stop = Some(result.stats.stop.as_str().to_string());
    record.synth_explored = result.stats.explored;
    let predicted = result.candidates.first();
    if let Some(p) = predicted {
        if !consistent(domain, p, &evidence) {
            violations.push(format!("{tag}: synthesized program contradicts its examples"));
        }
        record.predicted = Some(domain.encode_program(p));
    }
    let inputs: Vec<D::Input> = run.examples().iter().map(|(x, _)| x.clone()).collect();
    let heldout = task.heldout_excluding(domain, &inputs, cfg.heldout);
    let m = evaluate_metrics(domain, predicted, &task.truth, &inputs, &heldout);
    record.semantics = m.semantics;
    record.generalization = m.generalization;
    record.fe = m.fe;
    record.exact = m.exact;
    if let Some(c) = coverage_row(domain, &task.truth, &inputs, &heldout) {
        record.cov_semantics = Some(c.semantics);
        record.cov_generalization = Some(c.generalization);
        record.cov_fe = Some(c.fe);
    }
    (record, violations)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Per-strategy aggregates over successful runs, in `order`.
pub fn summarize(runs: &[RunRecord], order: &[StrategySpec]) -> Vec<StrategySummary> {
    order
        .iter()
        .map(|&spec| {
            let all: Vec<&RunRecord> = runs.iter().filter(|r| r.strategy == spec).collect();
            let ok: Vec<&RunRecord> = all.iter().copied().filter(|r| r.error.is_none()).collect();
            let n = ok.len().max(1) as f64;
            let count = |f: fn(&RunRecord) -> bool| ok.iter().filter(|r| f(r)).count();
            let covs: Vec<CoverageRow> = ok.iter().filter_map(|r| r.coverage()).collect();
            let cov = coverage_report(&covs);
            let steps: usize = ok.iter().map(|r| r.steps).sum();
            let per_step = |total: usize| if steps == 0 { 0.0 } else { total as f64 / steps as f64 };
            let (semantics, generalization, fe, exact) = (
                count(|r| r.semantics),
                count(|r| r.generalization),
                count(|r| r.fe),
                count(|r| r.exact),
            );
            StrategySummary {
                strategy: spec,
                tasks: all.len(),
                failures: all.len() - ok.len(),
                mean_pool: mean(ok.iter().map(|r| r.pool_size as f64)),
                mean_surviving: mean(ok.iter().map(|r| r.surviving as f64)),
                semantics,
                generalization,
                fe,
                exact,
                semantics_rate: semantics as f64 / n,
                generalization_rate: generalization as f64 / n,
                fe_rate: fe as f64 / n,
                exact_rate: exact as f64 / n,
                cov_semantics: cov.map(|c| c.semantics),
                cov_generalization: cov.map(|c| c.generalization),
                cov_fe: cov.map(|c| c.fe),
                calls_per_step: per_step(ok.iter().map(|r| r.oracle_calls).sum()),
                rejected_per_step: per_step(ok.iter().map(|r| r.rejected).sum()),
            }
        })
        .collect()
}

/// Metric-ladder and coverage-monotonicity checks over scored runs.
pub fn check_runs(runs: &[RunRecord], summaries: &[StrategySummary]) -> Vec<String> {
    let mut v = Vec::new();
    for r in runs.iter().filter(|r| r.error.is_none()) {
        let m = r.metrics();
        if (m.fe && !m.generalization) || (m.generalization && !m.semantics) {
            v.push(format!("task {} {}: metric ladder violated", r.task, r.strategy));
        }
        if let Some(c) = r.coverage() {
            if c.semantics > c.generalization + 1e-12 || c.generalization > c.fe + 1e-12 {
                v.push(format!("task {} {}: coverage not monotone", r.task, r.strategy));
            }
        }
    }
    for s in summaries {
        if s.fe > s.generalization || s.generalization > s.semantics {
            v.push(format!("{}: metric counts out of order", s.strategy));
        }
        if let (Some(a), Some(b), Some(c)) = (s.cov_semantics, s.cov_generalization, s.cov_fe) {
            if a > b + 1e-12 || b > c + 1e-12 {
                v.push(format!("{}: mean coverage not monotone", s.strategy));
            }
        }
    }
    v
}
