//! Monte Carlo pricing of European call options in a market whose volatility
//! is driven by an Ornstein-Uhlenbeck process.
//!
//! The asset follows `dS = mu S dt + sigma(Y) S dB` with an independent
//! mean-reverting driver `dY = -alpha Y dt + k dZ`. Conditioning on the
//! volatility path reduces the inner expectation to a Black-Scholes formula
//! evaluated at the time-averaged variance, so only the driver needs to be
//! discretized: each trajectory yields one averaged variance and one
//! conditional price, and the Monte Carlo average prices the option.
//!
//! Modules:
//! - [`rng`]: reproducible per-trajectory noise streams.
//! - [`sde`]: Euler, exact-transition, and deterministic driver paths.
//! - [`volatility`]: the sigma^2 families and averaged variance.
//! - [`pricing`]: the conditional Black-Scholes formula.
//! - [`montecarlo`]: pricing runs, step-size studies, discretization-error
//!   statistics.
//! - [`convergence`]: empirical strong-convergence order fits.

pub mod convergence;
pub mod error;
pub mod montecarlo;
pub mod pricing;
pub mod rng;
pub mod sde;
pub mod volatility;

pub use convergence::{em_vs_exact_strong_error, price_error_order, sigma_bar_error_order, OrderFit};
pub use error::{Error, Result};
pub use montecarlo::{
    discretization_error_study, price_option_mc, sample_stats, step_size_study, ErrorStats,
    PriceEstimate,
};
pub use pricing::{bs_price_conditional, d1_d2, norm_cdf, ConditionalPrice, MarketParams};
pub use rng::NoiseStream;
pub use sde::{
    deterministic_path, ou_exact_moments, simulate_em_path, simulate_exact_path, subsample_path,
    GridSpec, OUParams, Path, Scheme,
};
pub use volatility::{
    avg_sigma_sq_discrete, avg_sigma_sq_exact_deterministic, VolFunction, VolKind,
};
