use std::path::PathBuf;

use qmc_basket::greeks::estimate_deltas;
use qmc_basket::linalg::write_csv;
use qmc_basket::market::{build_covariance_blocks, drift_vector};
use qmc_basket::path::{build_from_blocks, effective_truncation_dimension};
use qmc_basket::pricing::price_strikes;
use qmc_basket::{Construction, Error, MarketSpec, Method, SamplerKind, SamplerSpec};

use crate::config::{ExperimentConfig, Task};
use crate::report::{self, DeltaRow, DumpRow, EffdimRow, PriceRow, Rows};
use crate::RunError;

/// Everything a run produces; nothing is written to disk here.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Rows,
    /// Report in the configured format.
    pub report: String,
    /// Table-shaped summary for the terminal.
    pub summary: String,
    /// Extra files (matrix dumps), relative to the output directory.
    pub files: Vec<(PathBuf, String)>,
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    config.validate()?;
    let mut files = Vec::new();
    let rows = match config.task {
        Task::Price => Rows::Price(run_price(config)?),
        Task::Delta => Rows::Delta(run_delta(config)?),
        Task::Effdim => Rows::Effdim(run_effdim(config)?),
        Task::Dump => Rows::Dump(run_dump(config, &mut files)?),
    };
    Ok(RunOutput {
        report: report::render(config, &rows),
        summary: report::summary(&rows),
        rows,
        files,
    })
}

/// Replication-0 point set of the first configured sampler over the path
/// dimensions, as CSV.
pub fn dump_points(config: &ExperimentConfig) -> Result<String, RunError> {
    let kind = *config
        .samplers
        .first()
        .ok_or_else(|| RunError::Config("no samplers selected".into()))?;
    let sampler = sampler_spec(config, kind, config.market.path_dim());
    let points = sampler.points(0).map_err(RunError::from_core)?;
    let mut out = Vec::new();
    points.write_csv(&mut out)?;
    Ok(String::from_utf8(out).expect("CSV is UTF-8"))
}

fn sampler_spec(config: &ExperimentConfig, kind: SamplerKind, dim: usize) -> SamplerSpec {
    let spec = SamplerSpec::new(kind, config.n, dim, config.seed);
    match kind {
        SamplerKind::RqmcHybrid => spec.with_sobol_dims(config.sobol_dims.min(dim)),
        _ => spec,
    }
}

/// Builds a construction; a Kronecker factor that is not positive definite
/// becomes a per-cell error instead of aborting the run.
fn construct(
    config: &ExperimentConfig,
    spec: &MarketSpec,
    blocks: &qmc_basket::linalg::BlockBoomerangMatrix,
    method: Method,
) -> Result<Result<Construction, String>, RunError> {
    match build_from_blocks(method, spec, blocks, config.lt_columns) {
        Ok(c) => Ok(Ok(c)),
        Err(e @ Error::IndefiniteKroneckerFactor { .. }) => Ok(Err(e.to_string())),
        Err(e) => Err(RunError::from_core(e)),
    }
}

fn run_price(config: &ExperimentConfig) -> Result<Vec<PriceRow>, RunError> {
    let strikes = config.strikes_or_default();
    let mut rows = Vec::new();
    for (rho, spec) in config.markets()? {
        let blocks = build_covariance_blocks(&spec).map_err(RunError::from_core)?;
        for &method in &config.constructions {
            let built = construct(config, &spec, &blocks, method)?;
            for &kind in &config.samplers {
                let results = match &built {
                    Ok(c) => {
                        let sampler = sampler_spec(config, kind, spec.path_dim());
                        price_strikes(&spec, c, &sampler, &strikes, config.reps)
                            .map_err(RunError::from_core)?
                            .into_iter()
                            .map(|e| (Some(e.value), Some(e.rmse), None))
                            .collect()
                    }
                    Err(msg) => vec![(None, None, Some(msg.clone())); strikes.len()],
                };
                for (strike, (price, rmse, error)) in strikes.iter().zip(results) {
                    rows.push(PriceRow {
                        sampler: kind.to_string(),
                        construction: method.to_string(),
                        rho,
                        strike: *strike,
                        price,
                        rmse,
                        reps: config.reps,
                        n: config.n,
                        seed: config.seed,
                        error,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn run_delta(config: &ExperimentConfig) -> Result<Vec<DeltaRow>, RunError> {
    let strikes = config.strikes_or_default();
    let mut rows = Vec::new();
    for (rho, spec) in config.markets()? {
        let blocks = build_covariance_blocks(&spec).map_err(RunError::from_core)?;
        let m = spec.assets();
        for &method in &config.constructions {
            let built = construct(config, &spec, &blocks, method)?;
            for &kind in &config.samplers {
                for &strike in &strikes {
                    let results: Vec<(Option<f64>, Option<f64>, Option<String>)> = match &built {
                        Ok(c) => {
                            let market = spec.with_strike(strike).map_err(RunError::from_core)?;
                            let sampler = sampler_spec(config, kind, spec.path_dim() + m)
                                .with_sobol_dims(match kind {
                                    SamplerKind::RqmcHybrid => config.sobol_dims.min(spec.path_dim()),
                                    _ => 0,
                                });
                            estimate_deltas(&market, c, &sampler, config.reps)
                                .map_err(RunError::from_core)?
                                .into_iter()
                                .map(|e| (Some(e.value), Some(e.rmse), None))
                                .collect()
                        }
                        Err(msg) => vec![(None, None, Some(msg.clone())); m],
                    };
                    for (k, (delta, rmse, error)) in results.into_iter().enumerate() {
                        rows.push(DeltaRow {
                            k: k + 1,
                            construction: method.to_string(),
                            sampler: kind.to_string(),
                            rho,
                            strike,
                            delta,
                            rmse,
                            reps: config.reps,
                            n: config.n,
                            seed: config.seed,
                            error,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn run_effdim(config: &ExperimentConfig) -> Result<Vec<EffdimRow>, RunError> {
    let mut rows = Vec::new();
    for (rho, spec) in config.markets()? {
        let blocks = build_covariance_blocks(&spec).map_err(RunError::from_core)?;
        let mu = drift_vector(&spec).map_err(RunError::from_core)?;
        for &method in &config.constructions {
            let (effective_dimension, error) = match construct(config, &spec, &blocks, method)? {
                Ok(c) => (
                    Some(
                        effective_truncation_dimension(&c, &mu, config.effdim_threshold)
                            .map_err(RunError::from_core)?,
                    ),
                    None,
                ),
                Err(msg) => (None, Some(msg)),
            };
            rows.push(EffdimRow {
                construction: method.to_string(),
                rho,
                threshold: config.effdim_threshold,
                effective_dimension,
                dimension: spec.path_dim(),
                error,
            });
        }
    }
    Ok(rows)
}

fn matrix_csv(m: faer::MatRef<'_, f64>) -> String {
    let mut out = Vec::new();
    write_csv(&mut out, m).expect("writing to memory cannot fail");
    String::from_utf8(out).expect("CSV is UTF-8")
}

fn run_dump(
    config: &ExperimentConfig,
    files: &mut Vec<(PathBuf, String)>,
) -> Result<Vec<DumpRow>, RunError> {
    let mut rows = Vec::new();
    for (rho, spec) in config.markets()? {
        let suffix = rho.map_or(String::new(), |r| format!("_rho{r}"));
        let blocks = build_covariance_blocks(&spec).map_err(RunError::from_core)?;
        let dim = spec.path_dim();
        let name = format!("covariance{suffix}.csv");
        files.push((name.clone().into(), matrix_csv(blocks.to_dense().as_ref())));
        rows.push(DumpRow {
            rho,
            matrix: "covariance".into(),
            file: name,
            rows: dim,
            cols: dim,
        });
        for &method in &config.constructions {
            if let Ok(c) = construct(config, &spec, &blocks, method)? {
                let name = format!("factor_{method}{suffix}.csv");
                files.push((name.clone().into(), matrix_csv(c.factor_matrix().as_ref())));
                rows.push(DumpRow {
                    rho,
                    matrix: format!("factor_{method}"),
                    file: name,
                    rows: dim,
                    cols: dim,
                });
            }
        }
    }
    Ok(rows)
}
