use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::fspace::{EncoderConfig, TrainConfig};
use crate::karel::{ProgramBounds, WorldDensity};
use crate::listproc::Regime;
use crate::synth::Budget;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dsl {
    Karel,
    List,
}

impl fmt::Display for Dsl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dsl::Karel => "karel",
            Dsl::List => "list",
        })
    }
}

impl FromStr for Dsl {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "karel" => Ok(Dsl::Karel),
            "list" => Ok(Dsl::List),
            _ => Err(HarnessError::Config(format!("unknown dsl {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategySpec {
    /// Random inputs, redrawn while the response is a crash.
    Random,
    /// Random inputs kept whatever the response.
    RandomUnfiltered,
    QbcAware,
    QbcUnaware,
    Ig,
    Fspace,
}

impl StrategySpec {
    pub const ALL: [StrategySpec; 6] = [
        StrategySpec::Random,
        StrategySpec::RandomUnfiltered,
        StrategySpec::QbcAware,
        StrategySpec::QbcUnaware,
        StrategySpec::Ig,
        StrategySpec::Fspace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategySpec::Random => "random",
            StrategySpec::RandomUnfiltered => "random-unfiltered",
            StrategySpec::QbcAware => "qbc-aware",
            StrategySpec::QbcUnaware => "qbc-unaware",
            StrategySpec::Ig => "ig",
            StrategySpec::Fspace => "fspace",
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategySpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategySpec::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown strategy {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KarelConfig {
    pub max_depth: usize,
    pub max_stmts: usize,
    pub obstacle_density: f64,
    pub marker_density: f64,
}

impl Default for KarelConfig {
    fn default() -> Self {
        let b = ProgramBounds::default();
        let d = WorldDensity::default();
        KarelConfig {
            max_depth: b.max_depth,
            max_stmts: b.max_stmts,
            obstacle_density: d.obstacle,
            marker_density: d.marker,
        }
    }
}

impl KarelConfig {
    pub fn bounds(&self) -> ProgramBounds {
        ProgramBounds {
            max_depth: self.max_depth,
            max_stmts: self.max_stmts,
        }
    }

    pub fn density(&self) -> WorldDensity {
        WorldDensity {
            obstacle: self.obstacle_density,
            marker: self.marker_density,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeSpec {
    D1,
    D2,
}

impl RegimeSpec {
    pub fn regime(self) -> Regime {
        match self {
            RegimeSpec::D1 => Regime::D1,
            RegimeSpec::D2 => Regime::D2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ListConfig {
    pub regime: RegimeSpec,
    /// Fixed program length overriding the regime's.
    pub program_len: Option<usize>,
}

impl Default for ListConfig {
    fn default() -> Self {
        ListConfig {
            regime: RegimeSpec::D1,
            program_len: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolConfig {
    /// Distinct programs sampled next to the ground truth.
    pub distractors: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig { distractors: 128 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyParams {
    pub committee: usize,
    pub candidates: usize,
    pub lookahead: usize,
    pub max_rounds: usize,
    pub max_tries: usize,
    /// Whether the learned strategy probes past crashing queries.
    pub fspace_crash_aware: bool,
    /// Whether the information-gain strategy probes past crashing queries.
    pub ig_crash_aware: bool,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            committee: 32,
            candidates: 100,
            lookahead: 1,
            max_rounds: 50,
            max_tries: 5000,
            fspace_crash_aware: false,
            ig_crash_aware: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthMethod {
    /// First surviving program of the ranked task pool.
    Pool,
    /// Enumerative search, falling back to the pool when it finds nothing.
    Enumerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub method: SynthMethod,
    pub max_size: usize,
    pub max_explored: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            method: SynthMethod::Pool,
            max_size: 4,
            max_explored: 200_000,
        }
    }
}

impl SynthConfig {
    pub fn budget(&self) -> Budget {
        Budget {
            max_size: self.max_size,
            max_explored: self.max_explored,
            max_millis: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FspaceConfig {
    pub dim: usize,
    pub hidden: usize,
    pub training_programs: usize,
    pub iterations: usize,
    pub steps: usize,
    pub candidates: usize,
    pub learning_rate: f64,
    pub clip: f64,
}

impl Default for FspaceConfig {
    fn default() -> Self {
        let e = EncoderConfig::default();
        FspaceConfig {
            dim: e.dim,
            hidden: e.hidden,
            training_programs: 16,
            iterations: 150,
            steps: 3,
            candidates: 4,
            learning_rate: 0.05,
            clip: 5.0,
        }
    }
}

impl FspaceConfig {
    pub fn encoder(&self) -> EncoderConfig {
        EncoderConfig {
            dim: self.dim,
            hidden: self.hidden,
            ..EncoderConfig::default()
        }
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            iterations: self.iterations,
            steps: self.steps,
            candidates: self.candidates,
            learning_rate: self.learning_rate,
            clip: self.clip,
        }
    }
}

/// One experiment: which tasks to draw, which strategies to compare, and
/// how to synthesize and score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dsl: Dsl,
    pub seed: u64,
    pub tasks: usize,
    /// Query steps per task.
    #[serde(default = "default_queries")]
    pub queries: usize,
    /// Held-out inputs per task; the first one is the generalization input.
    #[serde(default = "default_heldout")]
    pub heldout: usize,
    pub strategies: Vec<StrategySpec>,
    #[serde(default)]
    pub pool: PoolConfig,
    #[serde(default)]
    pub strategy: StrategyParams,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub karel: KarelConfig,
    #[serde(default)]
    pub list: ListConfig,
    #[serde(default)]
    pub fspace: FspaceConfig,
}

fn default_queries() -> usize {
    5
}

fn default_heldout() -> usize {
    95
}

impl ExperimentConfig {
    /// Desk-scale defaults for a DSL.
    pub fn desk(dsl: Dsl) -> Self {
        ExperimentConfig {
            name: format!("{dsl}-desk"),
            dsl,
            seed: 1,
            tasks: 200,
            queries: default_queries(),
            heldout: default_heldout(),
            strategies: vec![
                StrategySpec::Random,
                StrategySpec::QbcAware,
                StrategySpec::QbcUnaware,
                StrategySpec::Ig,
                StrategySpec::Fspace,
            ],
            pool: PoolConfig::default(),
            strategy: StrategyParams::default(),
            synth: SynthConfig::default(),
            karel: KarelConfig::default(),
            list: ListConfig::default(),
            fspace: FspaceConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.tasks == 0 {
            return bad("tasks must be positive");
        }
        if self.queries == 0 {
            return bad("queries must be positive");
        }
        if self.heldout == 0 {
            return bad("heldout must be positive");
        }
        if self.strategies.is_empty() {
            return bad("at least one strategy is required");
        }
        if self.strategies.iter().collect::<HashSet<_>>().len() != self.strategies.len() {
            return bad("strategies must be distinct");
        }
        if self.strategy.committee == 0 || self.strategy.candidates == 0 {
            return bad("committee and candidates must be positive");
        }
        if self.synth.max_size == 0 {
            return bad("synth.max_size must be positive");
        }
        if self.karel.max_stmts == 0 || self.karel.max_depth == 0 {
            return bad("karel bounds must be positive");
        }
        let dens = [self.karel.obstacle_density, self.karel.marker_density];
        if dens.iter().any(|d| !(0.0..1.0).contains(d)) {
            return bad("densities must lie in [0, 1)");
        }
        if self.list.program_len == Some(0) {
            return bad("list.program_len must be positive");
        }
        if self.strategies.contains(&StrategySpec::Fspace) && self.fspace.training_programs < 2 {
            return bad("fspace.training_programs must be at least 2");
        }
        Ok(())
    }
}
