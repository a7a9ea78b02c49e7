use qsynth_core::harness::{
    read_csv, read_jsonl, run_experiment, write_report, Dsl, ExperimentConfig, RunRecord, Stage, StrategySpec,
    StrategySummary, TaskRecord, RUNS_CSV, RUNS_FILE, SUMMARY_FILE, TASKS_FILE,
};

fn small(dsl: Dsl) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk(dsl);
    cfg.tasks = 3;
    cfg.heldout = 15;
    cfg.pool.distractors = 16;
    cfg.strategy.candidates = 12;
    cfg.strategies = StrategySpec::ALL.to_vec();
    cfg.fspace.iterations = 3;
    cfg.fspace.training_programs = 3;
    cfg
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    for dsl in [Dsl::List, Dsl::Karel] {
        let cfg = small(dsl);
        let a = run_experiment(&cfg, Stage::Full).unwrap();
        let b = run_experiment(&cfg, Stage::Full).unwrap();
        assert_eq!(a, b);
        assert!(a.violations.is_empty(), "{:?}", a.violations);
        let dir = tempfile::tempdir().unwrap();
        write_report(&a, dir.path()).unwrap();
        let tasks: Vec<TaskRecord> = read_jsonl(&dir.path().join(TASKS_FILE)).unwrap();
        assert_eq!(tasks, a.tasks);
        let runs: Vec<RunRecord> = read_jsonl(&dir.path().join(RUNS_FILE)).unwrap();
        assert_eq!(runs, a.runs);
        let csv_runs: Vec<RunRecord> = read_csv(&dir.path().join(RUNS_CSV)).unwrap();
        assert_eq!(csv_runs.len(), a.runs.len());
        let sums: Vec<StrategySummary> = read_csv(&dir.path().join(SUMMARY_FILE)).unwrap();
        assert_eq!(sums.len(), StrategySpec::ALL.len());
    }
}

#[test]
fn stages_build_on_each_other() {
    let cfg = small(Dsl::List);
    let g = run_experiment(&cfg, Stage::Generate).unwrap();
    let q = run_experiment(&cfg, Stage::Query).unwrap();
    let f = run_experiment(&cfg, Stage::Full).unwrap();
    assert!(g.runs.is_empty() && g.histories.is_empty());
    assert_eq!(g.tasks, q.tasks);
    assert_eq!(q.histories, f.histories);
    for (a, b) in q.runs.iter().zip(&f.runs) {
        assert_eq!((a.surviving, a.oracle_calls), (b.surviving, b.oracle_calls));
        assert!(a.predicted.is_none());
    }
}

#[test]
fn aware_strategies_keep_no_crash_examples_on_karel() {
    let mut cfg = small(Dsl::Karel);
    cfg.tasks = 4;
    let r = run_experiment(&cfg, Stage::Query).unwrap();
    for run in &r.runs {
        if matches!(run.strategy, StrategySpec::Random | StrategySpec::QbcAware | StrategySpec::Ig) {
            assert_eq!(run.crash_examples, 0, "{:?}", run.strategy);
            assert_eq!(run.oracle_calls, run.steps + run.rejected);
        }
    }
}
