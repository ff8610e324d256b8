//! Point sets on the unit cube: pseudo-random, Latin hypercube, and the hybrid
//! of scrambled Sobol leading coordinates with Latin hypercube padding.
//!
//! Every column is generated from its own ChaCha stream keyed by the master
//! seed, the replication index and the column index, so output does not
//! depend on how columns are scheduled across threads.

mod directions;
mod normal;
mod sobol;

use std::fmt;
use std::str::FromStr;

use faer::MatRef;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use normal::inverse_normal_cdf;
pub use sobol::MAX_SOBOL_DIMS;

/// Identifies the embedded direction-number table.
pub const SOBOL_DIRECTION_SOURCE: &str = directions::SOURCE;

/// Largest supported number of points per replication.
pub const MAX_POINTS: usize = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SamplerKind {
    #[serde(rename = "PRNG")]
    Prng,
    #[serde(rename = "LHS")]
    Lhs,
    #[serde(rename = "RQMC_HYBRID")]
    RqmcHybrid,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [SamplerKind::Prng, SamplerKind::Lhs, SamplerKind::RqmcHybrid];

    pub fn label(self) -> &'static str {
        match self {
            SamplerKind::Prng => "PRNG",
            SamplerKind::Lhs => "LHS",
            SamplerKind::RqmcHybrid => "RQMC_HYBRID",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PRNG" | "MC" => Ok(SamplerKind::Prng),
            "LHS" => Ok(SamplerKind::Lhs),
            "RQMC_HYBRID" | "RQMC" => Ok(SamplerKind::RqmcHybrid),
            _ => Err(Error::InvalidInput(format!("unknown sampler '{s}'"))),
        }
    }
}

/// How to draw `n` points in `[0, 1)^d` for each replication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub n: usize,
    pub d: usize,
    /// Leading coordinates drawn from scrambled Sobol (hybrid sampler only).
    pub sobol_dims: usize,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, n: usize, d: usize, seed: u64) -> Self {
        let sobol_dims = match kind {
            SamplerKind::RqmcHybrid => d.min(MAX_SOBOL_DIMS),
            _ => 0,
        };
        Self {
            kind,
            n,
            d,
            sobol_dims,
            seed,
        }
    }

    pub fn with_sobol_dims(mut self, sobol_dims: usize) -> Self {
        self.sobol_dims = sobol_dims;
        self
    }

    pub fn with_dim(mut self, d: usize) -> Self {
        self.d = d;
        if self.kind == SamplerKind::RqmcHybrid {
            self.sobol_dims = self.sobol_dims.min(d);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_POINTS {
            return Err(Error::InvalidInput(format!(
                "point count {} must be in 1..={MAX_POINTS}",
                self.n
            )));
        }
        if self.d == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if self.kind == SamplerKind::RqmcHybrid {
            if self.sobol_dims > self.d {
                return Err(Error::InvalidInput(format!(
                    "sobol_dims {} exceeds dimension {}",
                    self.sobol_dims, self.d
                )));
            }
            if self.sobol_dims > MAX_SOBOL_DIMS {
                return Err(Error::InvalidInput(format!(
                    "sobol_dims {} exceeds the {MAX_SOBOL_DIMS} dimensions with direction numbers",
                    self.sobol_dims
                )));
            }
        }
        Ok(())
    }

    /// The point set of replication `rep`.
    pub fn points(&self, rep: u64) -> Result<PointSet> {
        self.validate()?;
        let sobol_dims = match self.kind {
            SamplerKind::RqmcHybrid => self.sobol_dims,
            _ => 0,
        };
        let column = match self.kind {
            SamplerKind::Prng => ColumnKind::Uniform,
            _ => ColumnKind::Latin,
        };
        Ok(generate(self.n, self.d, |j, out| {
            if j < sobol_dims {
                scrambled_sobol_column(self.seed, rep, j, out);
            } else {
                fill_column(column, self.seed, rep, j, out);
            }
        }))
    }
}

/// An `n × d` matrix of sample points stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.d).map(|j| self.get(i, j)).collect()
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.n, self.d)
    }

    /// Maps every coordinate through the inverse normal distribution function.
    pub fn into_normals(mut self) -> PointSet {
        self.data
            .par_chunks_mut(self.n.max(1))
            .for_each(|col| {
                crate::linalg::clear_simd_upper();
                col.iter_mut().for_each(|u| *u = inverse_normal_cdf(*u));
            });
        self
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        crate::linalg::write_csv(out, self.as_mat())
    }
}

/// Standard-normal image of a point set.
pub fn to_normal(points: &PointSet) -> PointSet {
    points.clone().into_normals()
}

/// First `n` Sobol points in `d` dimensions.
///
/// Scrambled sets start at index 0 so that `n = 2^m` points form a full net;
/// the unscrambled sequence skips the origin and starts at index 1.
pub fn sobol_points(n: usize, d: usize, seed: u64, scramble: bool) -> Result<PointSet> {
    if d > MAX_SOBOL_DIMS {
        return Err(Error::InvalidInput(format!(
            "Sobol dimension {d} exceeds the {MAX_SOBOL_DIMS} dimensions with direction numbers"
        )));
    }
    if n > MAX_POINTS {
        return Err(Error::InvalidInput(format!("point count {n} exceeds {MAX_POINTS}")));
    }
    Ok(generate(n, d, |j, out| {
        if scramble {
            scrambled_sobol_column(seed, 0, j, out);
        } else {
            sobol::fill_coordinate(j, 1, None, out);
        }
    }))
}

/// Latin hypercube sample: each column places one point in every stratum
/// `[k/n, (k+1)/n)` under an independent random permutation.
pub fn lhs_points(n: usize, d: usize, seed: u64) -> PointSet {
    generate(n, d, |j, out| fill_column(ColumnKind::Latin, seed, 0, j, out))
}

/// Independent uniforms.
pub fn prng_points(n: usize, d: usize, seed: u64) -> PointSet {
    generate(n, d, |j, out| fill_column(ColumnKind::Uniform, seed, 0, j, out))
}

/// The hybrid sampler's point set for replication `rep`.
pub fn hybrid_points(spec: &SamplerSpec, rep: u64) -> Result<PointSet> {
    if spec.kind != SamplerKind::RqmcHybrid {
        return Err(Error::InvalidInput(format!("{} is not the hybrid sampler", spec.kind)));
    }
    spec.points(rep)
}

#[derive(Clone, Copy)]
enum ColumnKind {
    Uniform,
    Latin,
}

const STREAM_SOBOL: u64 = 1;
const STREAM_LATIN: u64 = 2;
const STREAM_UNIFORM: u64 = 3;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn column_rng(seed: u64, rep: u64, stream: u64, column: usize) -> ChaCha8Rng {
    let key = splitmix(splitmix(splitmix(splitmix(seed) ^ rep) ^ stream) ^ column as u64);
    ChaCha8Rng::seed_from_u64(key)
}

fn scrambled_sobol_column(seed: u64, rep: u64, j: usize, out: &mut [f64]) {
    let scramble = sobol::Scramble::random(&mut column_rng(seed, rep, STREAM_SOBOL, j));
    sobol::fill_coordinate(j, 0, Some(&scramble), out);
}

fn fill_column(kind: ColumnKind, seed: u64, rep: u64, j: usize, out: &mut [f64]) {
    match kind {
        ColumnKind::Uniform => {
            let mut rng = column_rng(seed, rep, STREAM_UNIFORM, j);
            out.iter_mut().for_each(|u| *u = rng.random::<f64>());
        }
        ColumnKind::Latin => {
            let mut rng = column_rng(seed, rep, STREAM_LATIN, j);
            let n = out.len();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let inv = 1.0 / n as f64;
            for (slot, stratum) in out.iter_mut().zip(perm) {
                *slot = (stratum as f64 + rng.random::<f64>()) * inv;
            }
        }
    }
}

fn generate<F>(n: usize, d: usize, fill: F) -> PointSet
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let mut data = vec![0.0; n * d];
    if n > 0 {
        data.par_chunks_mut(n)
            .enumerate()
            .for_each(|(j, col)| {
                crate::linalg::clear_simd_upper();
                fill(j, col)
            });
    }
    PointSet { n, d, data }
}
