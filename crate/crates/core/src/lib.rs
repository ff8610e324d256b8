//! Quasi-Monte Carlo pricing and hedging of Asian basket options under a
//! multi-asset Black–Scholes model with time-dependent volatilities.
//!
//! The pipeline is: [`market`] builds the log-path covariance as a block
//! boomerang matrix, [`path`] factors it (Cholesky, PCA, linear transformation
//! or Kronecker PCA), [`sampling`] produces randomized point sets,
//! [`pricing`] averages discounted payoffs over independent replications and
//! [`greeks`] estimates spot deltas with Malliavin weights.

pub mod error;
pub mod greeks;
pub mod linalg;
pub mod market;
pub mod path;
pub mod pricing;
pub mod sampling;

pub use error::{Error, Result};
pub use market::{MarketSpec, VolatilityCurve};
pub use path::{Construction, Method};
pub use pricing::Estimate;
pub use sampling::{SamplerKind, SamplerSpec};
