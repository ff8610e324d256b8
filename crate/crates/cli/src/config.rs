use std::path::PathBuf;

use qmc_basket::market::{equal_weights, uniform_grid};
use qmc_basket::path::DEFAULT_LT_COLUMNS;
use qmc_basket::sampling::MAX_SOBOL_DIMS;
use qmc_basket::{MarketSpec, Method, SamplerKind};
use serde::{Deserialize, Serialize};

use crate::RunError;

/// Monitoring dates and points per replication under `--quick`.
pub const QUICK_MONITORING: usize = 25;
pub const QUICK_POINTS: usize = 1024;

/// Seed used when the configuration does not name one.
pub const DEFAULT_SEED: u64 = 20_080_101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Price,
    Delta,
    Effdim,
    Dump,
}

impl std::str::FromStr for Task {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        match s {
            "price" => Ok(Task::Price),
            "delta" => Ok(Task::Delta),
            "effdim" => Ok(Task::Effdim),
            "dump" => Ok(Task::Dump),
            other => Err(RunError::Config(format!("unknown task '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(RunError::Config(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Report file (a directory for `dump`); `None` writes the report to stdout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// One batch experiment. Every field has a default, and the defaults describe
/// the ten-asset benchmark: 250 dates, ρ ∈ {0, 0.4}, K ∈ {90, 100, 110},
/// 10 replications of 8192 points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub market: MarketSpec,
    pub constructions: Vec<Method>,
    pub samplers: Vec<SamplerKind>,
    /// Strikes to evaluate; empty means the market's own strike.
    pub strikes: Vec<f64>,
    /// Equicorrelations to evaluate; empty means the market's own correlation.
    pub rho: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub sobol_dims: usize,
    pub lt_columns: usize,
    pub effdim_threshold: f64,
    pub task: Task,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            market: MarketSpec::benchmark(250, 0.0, 100.0).expect("benchmark market is valid"),
            constructions: Method::ALL.to_vec(),
            samplers: SamplerKind::ALL.to_vec(),
            strikes: vec![90.0, 100.0, 110.0],
            rho: vec![0.0, 0.4],
            n: 8192,
            reps: 10,
            seed: DEFAULT_SEED,
            sobol_dims: MAX_SOBOL_DIMS,
            lt_columns: DEFAULT_LT_COLUMNS,
            effdim_threshold: 0.99,
            task: Task::Price,
            output: OutputSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let fail = |msg: String| Err(RunError::Config(msg));
        if self.constructions.is_empty() {
            return fail("no constructions selected".into());
        }
        if matches!(self.task, Task::Price | Task::Delta) && self.samplers.is_empty() {
            return fail("no samplers selected".into());
        }
        if self.n == 0 {
            return fail("n must be positive".into());
        }
        if self.reps < 2 {
            return fail("reps must be at least 2".into());
        }
        if self.sobol_dims > MAX_SOBOL_DIMS {
            return fail(format!("sobol_dims must not exceed {MAX_SOBOL_DIMS}"));
        }
        if !(self.effdim_threshold > 0.0 && self.effdim_threshold < 1.0) {
            return fail("effdim_threshold must lie in (0, 1)".into());
        }
        if self.strikes.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
            return fail("strikes must be non-negative".into());
        }
        for rho in &self.rho {
            self.market
                .with_equicorrelation(*rho)
                .map_err(|e| RunError::Config(format!("rho = {rho}: {e}")))?;
        }
        Ok(())
    }

    /// Shrinks the experiment to 25 monitoring dates and 1024 points.
    pub fn quick(mut self) -> Result<Self, RunError> {
        let m = &self.market;
        let spots = m.spots().to_vec();
        let market = MarketSpec::new(
            spots,
            m.rate(),
            m.maturity(),
            uniform_grid(m.maturity(), QUICK_MONITORING),
            m.correlation().clone(),
            m.curves().to_vec(),
            equal_weights(m.assets(), QUICK_MONITORING),
            m.strike(),
        )
        .map_err(|e| RunError::Config(e.to_string()))?;
        self.market = market;
        self.n = QUICK_POINTS;
        Ok(self)
    }

    pub fn strikes_or_default(&self) -> Vec<f64> {
        if self.strikes.is_empty() {
            vec![self.market.strike()]
        } else {
            self.strikes.clone()
        }
    }

    /// Markets to run, paired with the equicorrelation label (`None` when the
    /// market's own correlation is used).
    pub fn markets(&self) -> Result<Vec<(Option<f64>, MarketSpec)>, RunError> {
        if self.rho.is_empty() {
            return Ok(vec![(None, self.market.clone())]);
        }
        self.rho
            .iter()
            .map(|rho| {
                self.market
                    .with_equicorrelation(*rho)
                    .map(|m| (Some(*rho), m))
                    .map_err(|e| RunError::Config(e.to_string()))
            })
            .collect()
    }
}
