//! Multi-asset Black–Scholes market with exponentially decaying volatilities.
//!
//! Log-path vectors use time-major ordering throughout the crate: entry
//! `n * M + i` holds `Z_i(t_n)`, so assets vary fastest inside a time block.
//! This is the ordering under which the covariance of the sampled path is the
//! block boomerang matrix with blocks `Σ(t_1), …, Σ(t_N)`, and under which a
//! constant-volatility market factors as `R ⊗ Σ`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, BlockBoomerangMatrix};

/// Weights must sum to one within this absolute tolerance.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// `σ(t) = (sigma0 − sigma_inf)·exp(−t/tau) + sigma_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityCurve {
    pub sigma0: f64,
    pub sigma_inf: f64,
    pub tau: f64,
}

impl VolatilityCurve {
    pub fn new(sigma0: f64, sigma_inf: f64, tau: f64) -> Result<Self> {
        let curve = Self {
            sigma0,
            sigma_inf,
            tau,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn constant(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0 >= 0.0 && self.sigma0.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma0 must be >= 0, got {}", self.sigma0)));
        }
        if !(self.sigma_inf >= 0.0 && self.sigma_inf.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sigma_inf must be >= 0, got {}",
                self.sigma_inf
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidInput(format!("tau must be > 0, got {}", self.tau)));
        }
        Ok(())
    }

    /// Amplitude of the decaying part, `sigma0 − sigma_inf`.
    pub fn decay_amplitude(&self) -> f64 {
        self.sigma0 - self.sigma_inf
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
        }
        Ok(self.eval(t))
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        self.decay_amplitude() * (-t / self.tau).exp() + self.sigma_inf
    }

    /// `∫_0^t σ(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        self.decay_amplitude() * self.tau * one_minus_exp(t / self.tau) + self.sigma_inf * t
    }

    /// `∫_0^t σ(s)·σ_other(s) ds` in closed form.
    pub fn product_integral(&self, other: &VolatilityCurve, t: f64) -> f64 {
        let (a, b) = (self.decay_amplitude(), other.decay_amplitude());
        let rate = 1.0 / self.tau + 1.0 / other.tau;
        a * b * one_minus_exp(t * rate) / rate
            + a * other.sigma_inf * self.tau * one_minus_exp(t / self.tau)
            + self.sigma_inf * b * other.tau * one_minus_exp(t / other.tau)
            + self.sigma_inf * other.sigma_inf * t
    }
}

fn one_minus_exp(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Instantaneous correlation between the driving Brownian motions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Correlation {
    Equicorrelation { equicorrelation: f64 },
    Matrix(Vec<Vec<f64>>),
}

impl Correlation {
    fn dense(&self, m: usize) -> Result<Vec<f64>> {
        match self {
            Correlation::Equicorrelation { equicorrelation: rho } => {
                if !rho.is_finite() {
                    return Err(Error::InvalidInput("equicorrelation must be finite".into()));
                }
                Ok((0..m * m)
                    .map(|idx| if idx / m == idx % m { 1.0 } else { *rho })
                    .collect())
            }
            Correlation::Matrix(rows) => {
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(Error::InvalidInput(format!(
                        "correlation matrix must be {m}x{m}"
                    )));
                }
                Ok(rows.iter().flatten().copied().collect())
            }
        }
    }
}

/// A validated market and contract description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarketDoc", into = "MarketDoc")]
pub struct MarketSpec {
    spots: Vec<f64>,
    rate: f64,
    maturity: f64,
    times: Vec<f64>,
    corr: Correlation,
    corr_dense: Vec<f64>,
    curves: Vec<VolatilityCurve>,
    /// Row-major `M × N`, asset index first.
    weights: Vec<f64>,
    strike: f64,
}

impl MarketSpec {
    /// Builds and validates a market. `weights` is row-major `M × N`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        spots: Vec<f64>,
        rate: f64,
        maturity: f64,
        times: Vec<f64>,
        corr: Correlation,
        curves: Vec<VolatilityCurve>,
        weights: Vec<f64>,
        strike: f64,
    ) -> Result<Self> {
        let m = spots.len();
        let corr_dense = corr.dense(m)?;
        let spec = Self {
            spots,
            rate,
            maturity,
            times,
            corr,
            corr_dense,
            curves,
            weights,
            strike,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Equally weighted contract on an equally spaced grid `t_j = j·T/N`.
    pub fn with_uniform_grid(
        spots: Vec<f64>,
        rate: f64,
        maturity: f64,
        monitoring: usize,
        corr: Correlation,
        curves: Vec<VolatilityCurve>,
        strike: f64,
    ) -> Result<Self> {
        let m = spots.len();
        let times = uniform_grid(maturity, monitoring);
        let weights = equal_weights(m, monitoring);
        Self::new(spots, rate, maturity, times, corr, curves, weights, strike)
    }

    /// The ten-asset benchmark market: spots 100, r = 4%, T = 1,
    /// σ_i(0) = 10% + (i−1)/9·40%, σ_i(∞) = 9%, τ_i = 1.5, equicorrelation `rho`.
    pub fn benchmark(monitoring: usize, rho: f64, strike: f64) -> Result<Self> {
        let m = 10;
        let curves = (0..m)
            .map(|i| VolatilityCurve::new(0.10 + 0.40 * i as f64 / 9.0, 0.09, 1.5))
            .collect::<Result<Vec<_>>>()?;
        Self::with_uniform_grid(
            vec![100.0; m],
            0.04,
            1.0,
            monitoring,
            Correlation::Equicorrelation {
                equicorrelation: rho,
            },
            curves,
            strike,
        )
    }

    fn validate(&self) -> Result<()> {
        let m = self.spots.len();
        let n = self.times.len();
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("market needs at least one asset and one date".into()));
        }
        if self.spots.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput("all spots must be positive".into()));
        }
        if !self.rate.is_finite() {
            return Err(Error::InvalidInput("rate must be finite".into()));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::InvalidInput("maturity must be positive".into()));
        }
        if !(self.strike >= 0.0 && self.strike.is_finite()) {
            return Err(Error::InvalidInput("strike must be non-negative".into()));
        }
        if !(self.times[0] > 0.0) || self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "monitoring times must be positive and strictly increasing".into(),
            ));
        }
        let last = self.times[n - 1];
        if (last - self.maturity).abs() > 1e-12 * self.maturity.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "last monitoring time {last} must equal maturity {}",
                self.maturity
            )));
        }
        if self.curves.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: self.curves.len(),
            });
        }
        for c in &self.curves {
            c.validate()?;
        }
        if self.weights.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                actual: self.weights.len(),
            });
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
        }
        self.validate_correlation()
    }

    fn validate_correlation(&self) -> Result<()> {
        let m = self.spots.len();
        let c = &self.corr_dense;
        for i in 0..m {
            if (c[i * m + i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput("correlation diagonal must be 1".into()));
            }
            for k in 0..i {
                if (c[i * m + k] - c[k * m + i]).abs() > 1e-12 {
                    return Err(Error::InvalidInput("correlation must be symmetric".into()));
                }
                if c[i * m + k].abs() > 1.0 {
                    return Err(Error::InvalidInput("correlations must lie in [-1, 1]".into()));
                }
            }
        }
        let eig = linalg::eig_sym(self.correlation_matrix().as_ref())?;
        let min = *eig.values.last().unwrap_or(&0.0);
        if !linalg::psd_within_tolerance(min, eig.values[0]) {
            return Err(Error::InvalidInput(format!(
                "correlation matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    pub fn assets(&self) -> usize {
        self.spots.len()
    }

    pub fn monitoring(&self) -> usize {
        self.times.len()
    }

    /// Length of a log-path vector, `M·N`.
    pub fn path_dim(&self) -> usize {
        self.assets() * self.monitoring()
    }

    pub fn spots(&self) -> &[f64] {
        &self.spots
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn curves(&self) -> &[VolatilityCurve] {
        &self.curves
    }

    pub fn correlation(&self) -> &Correlation {
        &self.corr
    }

    pub fn corr(&self, i: usize, k: usize) -> f64 {
        self.corr_dense[i * self.assets() + k]
    }

    pub fn correlation_matrix(&self) -> Mat<f64> {
        let m = self.assets();
        Mat::from_fn(m, m, |i, k| self.corr_dense[i * m + k])
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    /// Weight of asset `i` at monitoring date `j` (0-based).
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.monitoring() + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn discount_factor(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }

    pub fn with_strike(&self, strike: f64) -> Result<Self> {
        let mut next = self.clone();
        next.strike = strike;
        next.validate()?;
        Ok(next)
    }

    pub fn with_correlation(&self, corr: Correlation) -> Result<Self> {
        let mut next = self.clone();
        next.corr_dense = corr.dense(self.assets())?;
        next.corr = corr;
        next.validate()?;
        Ok(next)
    }

    pub fn with_equicorrelation(&self, rho: f64) -> Result<Self> {
        self.with_correlation(Correlation::Equicorrelation {
            equicorrelation: rho,
        })
    }

    pub fn with_spot(&self, asset: usize, spot: f64) -> Result<Self> {
        check_index(asset, self.assets())?;
        let mut next = self.clone();
        next.spots[asset] = spot;
        next.validate()?;
        Ok(next)
    }
}

pub fn uniform_grid(maturity: f64, monitoring: usize) -> Vec<f64> {
    (1..=monitoring)
        .map(|j| {
            if j == monitoring {
                maturity
            } else {
                j as f64 * maturity / monitoring as f64
            }
        })
        .collect()
}

pub fn equal_weights(assets: usize, monitoring: usize) -> Vec<f64> {
    vec![1.0 / (assets * monitoring) as f64; assets * monitoring]
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index >= len {
        Err(Error::IndexOutOfRange { index, len })
    } else {
        Ok(())
    }
}

pub fn instantaneous_vol(curve: &VolatilityCurve, t: f64) -> Result<f64> {
    curve.at(t)
}

/// `ρ_ik·∫_0^t σ_i(s)σ_k(s) ds` (asset indices are 0-based).
pub fn integrated_cross_vol(spec: &MarketSpec, i: usize, k: usize, t: f64) -> Result<f64> {
    check_index(i, spec.assets())?;
    check_index(k, spec.assets())?;
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
    }
    let rho = spec.corr(i, k);
    if rho == 0.0 {
        return Ok(0.0);
    }
    Ok(rho * spec.curves[i].product_integral(&spec.curves[k], t))
}

/// Elementary block vector `(Σ(t_1), …, Σ(t_N))` of the log-path covariance.
pub fn build_covariance_blocks(spec: &MarketSpec) -> Result<BlockBoomerangMatrix> {
    let m = spec.assets();
    let mut blocks = Vec::with_capacity(spec.monitoring());
    for &t in spec.times() {
        let mut block = Mat::<f64>::zeros(m, m);
        for i in 0..m {
            for k in 0..=i {
                let v = integrated_cross_vol(spec, i, k, t)?;
                block[(i, k)] = v;
                block[(k, i)] = v;
            }
        }
        blocks.push(block);
    }
    let blocks = BlockBoomerangMatrix::new(blocks)?;
    for h in 0..blocks.block_count() {
        let inc = blocks.increment(h);
        let eig = linalg::eig_sym(inc.as_ref())?;
        let min = *eig.values.last().unwrap_or(&0.0);
        if !linalg::psd_within_tolerance(min, eig.values[0]) {
            return Err(Error::IndefiniteIncrement { block: h });
        }
    }
    Ok(blocks)
}

/// `μ_k = ln(w S(0)) + r·t − ½∫_0^t σ²` in time-major order.
pub fn drift_vector(spec: &MarketSpec) -> Result<Vec<f64>> {
    let (m, n) = (spec.assets(), spec.monitoring());
    let mut mu = Vec::with_capacity(m * n);
    for j in 0..n {
        let t = spec.times[j];
        for i in 0..m {
            let w = spec.weight(i, j);
            if !(w > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "weight w[{i}][{j}] = {w} must be positive for the log drift"
                )));
            }
            let curve = &spec.curves[i];
            mu.push((w * spec.spots[i]).ln() + spec.rate * t - 0.5 * curve.product_integral(curve, t));
        }
    }
    Ok(mu)
}

/// Arithmetic basket `g(Z) = Σ_k exp(μ_k + Z_k)`.
pub fn basket_value(mu: &[f64], z: &[f64]) -> Result<f64> {
    if mu.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            actual: z.len(),
        });
    }
    Ok(basket_sum(mu, z))
}

pub(crate) fn basket_sum(mu: &[f64], z: &[f64]) -> f64 {
    mu.iter().zip(z).map(|(m, z)| (m + z).exp()).sum()
}

/// Time-zero value of the payoff `(g − K)^+` paid at maturity.
pub fn discounted_payoff(spec: &MarketSpec, g: f64) -> f64 {
    spec.discount_factor() * (g - spec.strike).max(0.0)
}

#[derive(Serialize, Deserialize)]
struct MarketDoc {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    spots: Vec<f64>,
    rate: f64,
    maturity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    times: Option<Vec<f64>>,
    corr: Correlation,
    curves: Vec<VolatilityCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Vec<f64>>>,
    strike: f64,
}

impl TryFrom<MarketDoc> for MarketSpec {
    type Error = Error;

    fn try_from(doc: MarketDoc) -> Result<Self> {
        if doc.spots.len() != doc.m {
            return Err(Error::DimensionMismatch {
                expected: doc.m,
                actual: doc.spots.len(),
            });
        }
        let times = doc.times.unwrap_or_else(|| uniform_grid(doc.maturity, doc.n));
        if times.len() != doc.n {
            return Err(Error::DimensionMismatch {
                expected: doc.n,
                actual: times.len(),
            });
        }
        let weights = match doc.weights {
            None => equal_weights(doc.m, doc.n),
            Some(rows) => {
                if rows.len() != doc.m || rows.iter().any(|r| r.len() != doc.n) {
                    return Err(Error::InvalidInput(format!(
                        "weights must be an {}x{} matrix",
                        doc.m, doc.n
                    )));
                }
                rows.into_iter().flatten().collect()
            }
        };
        MarketSpec::new(
            doc.spots,
            doc.rate,
            doc.maturity,
            times,
            doc.corr,
            doc.curves,
            weights,
            doc.strike,
        )
    }
}

impl From<MarketSpec> for MarketDoc {
    fn from(spec: MarketSpec) -> Self {
        let (m, n) = (spec.assets(), spec.monitoring());
        let times = (spec.times != uniform_grid(spec.maturity, n)).then(|| spec.times.clone());
        let weights = (spec.weights != equal_weights(m, n))
            .then(|| spec.weights.chunks(n).map(<[f64]>::to_vec).collect());
        MarketDoc {
            m,
            n,
            spots: spec.spots,
            rate: spec.rate,
            maturity: spec.maturity,
            times,
            corr: spec.corr,
            curves: spec.curves,
            weights,
            strike: spec.strike,
        }
    }
}
