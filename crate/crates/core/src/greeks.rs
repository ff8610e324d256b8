//! Spot deltas by Malliavin integration by parts, plus a finite-difference
//! oracle with common random numbers.
//!
//! For asset `k` the weight is `δ(G_k/L_k)` with `G_k = ∂m(T)/∂x_k` and
//! `L_k = ∫_0^T D^k_s m(T) ds`, where `D^k` differentiates along the `k`-th
//! independent Brownian component only. It needs the terminal value `W_k(T)`
//! of that component, which the path does not determine; [`TerminalBrownian`]
//! samples it from its exact conditional law given the path.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{chol_dense, spd_inverse};
use crate::market::{drift_vector, MarketSpec};
use crate::path::Construction;
use crate::pricing::{check_construction, simulate, Estimate};
use crate::sampling::SamplerSpec;

/// Paths with `|L_k|` below this are rejected.
pub const MIN_DERIVATIVE_INTEGRAL: f64 = 1e-300;

/// Lower-triangular `α` with `α·αᵀ = ρ`: `W_i = Σ_m α_im B_m` for independent
/// Brownian motions `B_m`.
#[derive(Debug, Clone)]
pub struct CorrelationLoadings {
    alpha: Mat<f64>,
}

impl CorrelationLoadings {
    pub fn alpha(&self) -> &Mat<f64> {
        &self.alpha
    }

    pub fn get(&self, i: usize, m: usize) -> f64 {
        self.alpha[(i, m)]
    }

    pub fn assets(&self) -> usize {
        self.alpha.nrows()
    }
}

pub fn correlation_loadings(rho: faer::MatRef<'_, f64>) -> Result<CorrelationLoadings> {
    let alpha = chol_dense(rho)?;
    if (0..alpha.nrows()).any(|k| !(alpha[(k, k)] > 0.0)) {
        return Err(Error::NotPositiveSemidefinite { value: 0.0 });
    }
    Ok(CorrelationLoadings { alpha })
}

/// Conditional sampler for the terminal values of the independent Brownian
/// components given the log path.
///
/// Over step `j` the increments `ΔZ_j` and `ΔB_j` are jointly Gaussian with
/// `Cov(ΔB_j, ΔZ_j) = U_j` (`(U_j)_{mi} = α_im ∫σ_i` over the step) and
/// `Var(ΔZ_j) = V_j`; steps are independent, so
/// `B(T) = Σ_j U_j V_j^{−1} ΔZ_j + C_res·η`.
#[derive(Debug, Clone)]
pub struct TerminalBrownian {
    assets: usize,
    gains: Vec<Mat<f64>>,
    residual_chol: Mat<f64>,
    residual_cov: Mat<f64>,
}

impl TerminalBrownian {
    pub fn new(spec: &MarketSpec, loadings: &CorrelationLoadings) -> Result<Self> {
        let m = spec.assets();
        if loadings.assets() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: loadings.assets(),
            });
        }
        let blocks = crate::market::build_covariance_blocks(spec)?;
        let mut gains = Vec::with_capacity(spec.monitoring());
        let mut residual = Mat::<f64>::zeros(m, m);
        let mut prev_t = 0.0;
        for (j, &t) in spec.times().iter().enumerate() {
            let v = blocks.increment(j);
            let v_inv = spd_inverse(v.as_ref()).map_err(|_| Error::SingularIncrement { block: j })?;
            let step: Vec<f64> = spec
                .curves()
                .iter()
                .map(|c| c.integral(t) - c.integral(prev_t))
                .collect();
            let u = Mat::from_fn(m, m, |r, i| loadings.get(i, r) * step[i]);
            let gain = crate::linalg::mul(u.as_ref(), v_inv.as_ref());
            let explained = crate::linalg::mul(gain.as_ref(), u.transpose());
            let dt = t - prev_t;
            for r in 0..m {
                for c in 0..m {
                    residual[(r, c)] += if r == c { dt } else { 0.0 } - explained[(r, c)];
                }
            }
            gains.push(gain);
            prev_t = t;
        }
        let residual = crate::linalg::symmetrize(residual);
        let residual_chol = chol_dense(residual.as_ref())?;
        Ok(Self {
            assets: m,
            gains,
            residual_chol,
            residual_cov: residual,
        })
    }

    /// Covariance of `B(T)` left unexplained by the path.
    pub fn residual_covariance(&self) -> &Mat<f64> {
        &self.residual_cov
    }

    /// Writes `B(T)` into `out` given the log path `z` (time-major) and `M`
    /// residual standard normals.
    pub fn sample_into(&self, z: &[f64], residual_normals: &[f64], out: &mut [f64]) {
        let m = self.assets;
        out[..m].fill(0.0);
        for (j, gain) in self.gains.iter().enumerate() {
            for i in 0..m {
                let dz = z[j * m + i] - if j == 0 { 0.0 } else { z[(j - 1) * m + i] };
                if dz == 0.0 {
                    continue;
                }
                for r in 0..m {
                    out[r] += gain[(r, i)] * dz;
                }
            }
        }
        for r in 0..m {
            for c in 0..=r {
                out[r] += self.residual_chol[(r, c)] * residual_normals[c];
            }
        }
    }

    pub fn sample(&self, z: &[f64], residual_normals: &[f64]) -> Result<Vec<f64>> {
        let m = self.assets;
        if z.len() != m * self.gains.len() {
            return Err(Error::DimensionMismatch {
                expected: m * self.gains.len(),
                actual: z.len(),
            });
        }
        if residual_normals.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: residual_normals.len(),
            });
        }
        let mut out = vec![0.0; m];
        self.sample_into(z, residual_normals, &mut out);
        Ok(out)
    }
}

/// `B(T)` for one path; builds the conditioning operator on every call.
pub fn terminal_bm(spec: &MarketSpec, z: &[f64], residual_normals: &[f64]) -> Result<Vec<f64>> {
    let loadings = correlation_loadings(spec.correlation_matrix().as_ref())?;
    TerminalBrownian::new(spec, &loadings)?.sample(z, residual_normals)
}

/// The ingredients of asset `k`'s weight on one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaWeightParts {
    pub g: f64,
    pub l: f64,
    pub dg: f64,
    pub dl: f64,
    pub w: f64,
}

impl DeltaWeightParts {
    /// `(G/L)·W − (L·∫DG − G·∫DL)/L²`.
    pub fn weight(&self) -> Result<f64> {
        if !(self.l.abs() >= MIN_DERIVATIVE_INTEGRAL) {
            return Err(Error::Numerical(format!(
                "derivative integral L = {} is too small",
                self.l
            )));
        }
        Ok(self.g / self.l * self.w - (self.l * self.dg - self.g * self.dl) / (self.l * self.l))
    }
}

/// Per-path weight evaluation with the integrated volatilities precomputed.
#[derive(Debug, Clone)]
struct WeightKernel {
    assets: usize,
    dates: usize,
    spots: Vec<f64>,
    alpha: Mat<f64>,
    /// `∫_0^{t_j} σ_i`, time-major.
    vol_integrals: Vec<f64>,
}

impl WeightKernel {
    fn new(spec: &MarketSpec, loadings: &CorrelationLoadings) -> Self {
        let (m, n) = (spec.assets(), spec.monitoring());
        let mut vol_integrals = Vec::with_capacity(m * n);
        for &t in spec.times() {
            for c in spec.curves() {
                vol_integrals.push(c.integral(t));
            }
        }
        Self {
            assets: m,
            dates: n,
            spots: spec.spots().to_vec(),
            alpha: loadings.alpha().clone(),
            vol_integrals,
        }
    }

    /// `terms[n·M + i] = w_in·S_i(t_n)`; fills `parts` for every asset.
    fn parts(&self, terms: &[f64], w: &[f64], parts: &mut [DeltaWeightParts], scratch: &mut [f64]) {
        let m = self.assets;
        let (sums, rest) = scratch.split_at_mut(m);
        let (first, second) = rest.split_at_mut(m);
        sums.fill(0.0);
        first.fill(0.0);
        second.fill(0.0);
        for n in 0..self.dates {
            for i in 0..m {
                let t = terms[n * m + i];
                let iv = self.vol_integrals[n * m + i];
                sums[i] += t;
                first[i] += t * iv;
                second[i] += t * iv * iv;
            }
        }
        for k in 0..m {
            let mut l = 0.0;
            let mut dl = 0.0;
            for i in k..m {
                let a = self.alpha[(i, k)];
                l += a * first[i];
                dl += a * a * second[i];
            }
            let x = self.spots[k];
            parts[k] = DeltaWeightParts {
                g: sums[k] / x,
                l,
                dg: self.alpha[(k, k)] * first[k] / x,
                dl,
                w: w[k],
            };
        }
    }
}

/// Weight for asset `k` given the monitored prices `S_i(t_j)` (time-major)
/// and `W_k(T)`, the terminal value of the `k`-th independent component.
pub fn malliavin_weight(
    spec: &MarketSpec,
    prices: &[f64],
    loadings: &CorrelationLoadings,
    k: usize,
    w_k: f64,
) -> Result<f64> {
    let m = spec.assets();
    if k >= m {
        return Err(Error::IndexOutOfRange { index: k, len: m });
    }
    if prices.len() != spec.path_dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.path_dim(),
            actual: prices.len(),
        });
    }
    let kernel = WeightKernel::new(spec, loadings);
    let terms: Vec<f64> = prices
        .iter()
        .enumerate()
        .map(|(idx, s)| spec.weight(idx % m, idx / m) * s)
        .collect();
    let mut w = vec![0.0; m];
    w[k] = w_k;
    let mut parts = vec![
        DeltaWeightParts {
            g: 0.0,
            l: 0.0,
            dg: 0.0,
            dl: 0.0,
            w: 0.0
        };
        m
    ];
    let mut scratch = vec![0.0; 3 * m];
    kernel.parts(&terms, &w, &mut parts, &mut scratch);
    parts[k].weight()
}

/// Malliavin estimates of all `M` deltas. The sampler dimension must be
/// `M·N + M`; the trailing `M` coordinates feed the residual normals.
pub fn estimate_deltas(
    spec: &MarketSpec,
    c: &Construction,
    sampler: &SamplerSpec,
    reps: usize,
) -> Result<Vec<Estimate>> {
    check_construction(spec, c)?;
    let m = spec.assets();
    let mu = drift_vector(spec)?;
    let loadings = correlation_loadings(spec.correlation_matrix().as_ref())?;
    let terminal = TerminalBrownian::new(spec, &loadings)?;
    let kernel = WeightKernel::new(spec, &loadings);
    let disc = spec.discount_factor();
    let strike = spec.strike();
    let dim = spec.path_dim();
    let rejected = std::sync::atomic::AtomicBool::new(false);
    let estimates = simulate(c, sampler, reps, m, m, |z, eta, out| {
        let mut terms = vec![0.0; dim];
        let mut basket = 0.0;
        for k in 0..dim {
            terms[k] = (mu[k] + z[k]).exp();
            basket += terms[k];
        }
        let payoff = basket - strike;
        if payoff <= 0.0 {
            out.fill(0.0);
            return;
        }
        let mut w = vec![0.0; m];
        terminal.sample_into(z, eta, &mut w);
        let mut parts = vec![
            DeltaWeightParts {
                g: 0.0,
                l: 0.0,
                dg: 0.0,
                dl: 0.0,
                w: 0.0
            };
            m
        ];
        let mut scratch = vec![0.0; 3 * m];
        kernel.parts(&terms, &w, &mut parts, &mut scratch);
        for (slot, p) in out.iter_mut().zip(&parts) {
            *slot = match p.weight() {
                Ok(weight) => disc * payoff * weight,
                Err(_) => {
                    rejected.store(true, std::sync::atomic::Ordering::Relaxed);
                    0.0
                }
            };
        }
    })?;
    if rejected.into_inner() {
        return Err(Error::Numerical(
            "a path produced a vanishing derivative integral".into(),
        ));
    }
    Ok(estimates)
}

/// Central finite-difference deltas for every asset with relative bump `h`.
///
/// Bumping `x_k` by a factor `1 ± h` scales every `S_k(t_j)` by the same
/// factor, so both bumped baskets come from the unbumped path and the two
/// prices share their random numbers exactly.
pub fn finite_difference_deltas(
    spec: &MarketSpec,
    c: &Construction,
    sampler: &SamplerSpec,
    bump: f64,
    reps: usize,
) -> Result<Vec<Estimate>> {
    if !(1e-4..=1e-1).contains(&bump) {
        return Err(Error::InvalidInput(format!("bump {bump} must lie in [1e-4, 1e-1]")));
    }
    check_construction(spec, c)?;
    let m = spec.assets();
    let mu = drift_vector(spec)?;
    let disc = spec.discount_factor();
    let strike = spec.strike();
    let spots = spec.spots().to_vec();
    let dim = spec.path_dim();
    simulate(c, sampler, reps, m, 0, |z, _, out| {
        let mut per_asset = vec![0.0; m];
        let mut basket = 0.0;
        for k in 0..dim {
            let t = (mu[k] + z[k]).exp();
            per_asset[k % m] += t;
            basket += t;
        }
        for (k, slot) in out.iter_mut().enumerate() {
            let up = (basket + bump * per_asset[k] - strike).max(0.0);
            let down = (basket - bump * per_asset[k] - strike).max(0.0);
            *slot = disc * (up - down) / (2.0 * spots[k] * bump);
        }
    })
}

/// Central finite-difference delta of asset `k`.
pub fn finite_difference_delta(
    spec: &MarketSpec,
    c: &Construction,
    sampler: &SamplerSpec,
    k: usize,
    bump: f64,
    reps: usize,
) -> Result<Estimate> {
    if k >= spec.assets() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: spec.assets(),
        });
    }
    Ok(finite_difference_deltas(spec, c, sampler, bump, reps)?.swap_remove(k))
}

/// Closed-form delta of the zero-strike contract: `e^{−rT}Σ_j w_kj e^{r t_j}`.
pub fn zero_strike_delta(spec: &MarketSpec, k: usize) -> f64 {
    let total: f64 = spec
        .times()
        .iter()
        .enumerate()
        .map(|(j, t)| spec.weight(k, j) * (spec.rate() * t).exp())
        .sum();
    spec.discount_factor() * total
}
