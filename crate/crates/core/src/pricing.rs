//! Replicated (randomized) quasi-Monte Carlo estimation.
//!
//! Replications run one after another; inside a replication the points are
//! cut into fixed-size chunks that may be evaluated in parallel. Per-path
//! values are stored in point order and reduced pairwise, so the result does
//! not depend on the number of worker threads.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{drift_vector, MarketSpec};
use crate::path::Construction;
use crate::sampling::{SamplerKind, SamplerSpec};

/// Points per parallel work unit.
const CHUNK: usize = 256;

/// A replicated estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Standard error of the replication mean.
    pub rmse: f64,
    pub replications: usize,
    pub per_replication: Vec<f64>,
    pub paths_per_replication: usize,
}

impl Estimate {
    pub fn from_replications(per_replication: Vec<f64>, paths_per_replication: usize) -> Self {
        let r = per_replication.len();
        let value = pairwise_sum(&per_replication) / r as f64;
        let rmse = if r > 1 {
            let ss: f64 = per_replication.iter().map(|x| (x - value) * (x - value)).sum();
            (ss / (r * (r - 1)) as f64).sqrt()
        } else {
            f64::NAN
        };
        Self {
            value,
            rmse,
            replications: r,
            per_replication,
            paths_per_replication,
        }
    }
}

/// Fixed-order pairwise summation.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 32 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

/// Estimates `E[f(Z, η)]` for a vector-valued path functional.
///
/// The first `c.dim()` point coordinates drive the path `Z = C·Φ^{−1}(u)`; the
/// next `extra_dims` coordinates are passed to `f` as standard normals `η`.
/// `f` writes its `outputs` values into the output slice.
pub fn simulate<F>(
    c: &Construction,
    sampler: &SamplerSpec,
    reps: usize,
    outputs: usize,
    extra_dims: usize,
    f: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(&[f64], &[f64], &mut [f64]) + Sync,
{
    if reps < 2 {
        return Err(Error::InvalidInput(format!(
            "at least two replications are needed for an error estimate, got {reps}"
        )));
    }
    let dim = c.dim();
    if sampler.d != dim + extra_dims {
        return Err(Error::DimensionMismatch {
            expected: dim + extra_dims,
            actual: sampler.d,
        });
    }
    if sampler.kind == SamplerKind::RqmcHybrid && sampler.sobol_dims > dim {
        return Err(Error::InvalidInput(
            "Sobol coordinates must not extend past the path dimensions".into(),
        ));
    }
    let n = sampler.n;
    let mut means = vec![Vec::with_capacity(reps); outputs];
    for rep in 0..reps {
        let normals = sampler.points(rep as u64)?.into_normals();
        let eps = normals.as_mat();
        let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|ci| {
                let start = ci * CHUNK;
                let len = CHUNK.min(n - start);
                let block = eps.subrows(start, len);
                let mut z = Mat::<f64>::zeros(dim, len);
                c.apply_batch_into(block.subcols(0, dim).transpose(), z.as_mut());
                let mut values = vec![0.0; len * outputs];
                let mut extra = vec![0.0; extra_dims];
                for b in 0..len {
                    let col = z.col(b);
                    let path = col.try_as_col_major().expect("owned columns are contiguous").as_slice();
                    for (e, slot) in extra.iter_mut().enumerate() {
                        *slot = block[(b, dim + e)];
                    }
                    f(path, &extra, &mut values[b * outputs..(b + 1) * outputs]);
                }
                values
            })
            .collect();
        let mut column = vec![0.0; n];
        for (o, out) in means.iter_mut().enumerate() {
            let mut idx = 0;
            for chunk in &chunks {
                for row in chunk.chunks(outputs) {
                    column[idx] = row[o];
                    idx += 1;
                }
            }
            out.push(pairwise_sum(&column) / n as f64);
        }
    }
    Ok(means
        .into_iter()
        .map(|m| Estimate::from_replications(m, n))
        .collect())
}

/// Discounted Asian basket payoffs for several strikes at once.
pub(crate) fn price_strikes_with_drift(
    spec: &MarketSpec,
    mu: &[f64],
    c: &Construction,
    sampler: &SamplerSpec,
    strikes: &[f64],
    reps: usize,
) -> Result<Vec<Estimate>> {
    check_construction(spec, c)?;
    let disc = spec.discount_factor();
    simulate(c, sampler, reps, strikes.len(), 0, |z, _, out| {
        let g = crate::market::basket_sum(mu, z);
        for (slot, k) in out.iter_mut().zip(strikes) {
            *slot = disc * (g - k).max(0.0);
        }
    })
}

pub(crate) fn check_construction(spec: &MarketSpec, c: &Construction) -> Result<()> {
    if c.dim() != spec.path_dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.path_dim(),
            actual: c.dim(),
        });
    }
    Ok(())
}

/// Price of the contract in `spec`.
pub fn price(spec: &MarketSpec, c: &Construction, sampler: &SamplerSpec, reps: usize) -> Result<Estimate> {
    let mut out = price_strikes(spec, c, sampler, &[spec.strike()], reps)?;
    Ok(out.remove(0))
}

/// Prices for several strikes from the same paths.
pub fn price_strikes(
    spec: &MarketSpec,
    c: &Construction,
    sampler: &SamplerSpec,
    strikes: &[f64],
    reps: usize,
) -> Result<Vec<Estimate>> {
    if strikes.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
        return Err(Error::InvalidInput("strikes must be non-negative".into()));
    }
    let mu = drift_vector(spec)?;
    price_strikes_with_drift(spec, &mu, c, sampler, strikes, reps)
}

/// One cell of a pricing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub construction: crate::path::Method,
    pub sampler: SamplerKind,
    pub strike: f64,
    pub estimate: Estimate,
}

/// Prices every (construction, sampler, strike) combination. The sampler
/// dimension is set to the path dimension; strikes share paths.
pub fn price_grid(
    spec: &MarketSpec,
    constructions: &[Construction],
    samplers: &[SamplerSpec],
    strikes: &[f64],
    reps: usize,
) -> Result<Vec<GridCell>> {
    let mu = drift_vector(spec)?;
    let mut cells = Vec::new();
    for c in constructions {
        for s in samplers {
            let sampler = s.clone().with_dim(spec.path_dim());
            let estimates = price_strikes_with_drift(spec, &mu, c, &sampler, strikes, reps)?;
            for (k, estimate) in strikes.iter().zip(estimates) {
                cells.push(GridCell {
                    construction: c.method(),
                    sampler: s.kind,
                    strike: *k,
                    estimate,
                });
            }
        }
    }
    Ok(cells)
}

/// Closed-form price of the zero-strike contract: `e^{−rT}Σ w_ij S_i(0) e^{r t_j}`.
pub fn zero_strike_price(spec: &MarketSpec) -> f64 {
    let mut total = 0.0;
    for i in 0..spec.assets() {
        for (j, t) in spec.times().iter().enumerate() {
            total += spec.weight(i, j) * spec.spots()[i] * (spec.rate() * t).exp();
        }
    }
    spec.discount_factor() * total
}
