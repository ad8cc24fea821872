//! Conditional Black-Scholes evaluation for an averaged volatility.
//!
//! Conditioning a European call on the volatility path turns the inner
//! expectation into a Black-Scholes price whose volatility input is the
//! root-mean-square volatility over `[0, T]`:
//!
//! ```text
//! P  = S e^{rT} Phi(d1) - K Phi(d2)          (undiscounted)
//! V  = e^{-rT} P
//! d1 = (ln(S/K) + (r + sigma_bar^2/2) T) / (sigma_bar sqrt(T))
//! d2 = d1 - sigma_bar sqrt(T)
//! ```
//!
//! The degenerate limit `sigma_bar -> 0` is priced by continuity as the
//! discounted intrinsic value `(S - K e^{-rT})^+`.

use crate::error::{Error, Result};

/// Threshold on `sigma_bar * sqrt(T)` below which the zero-volatility limit
/// is used; keeps d1/d2 out of the overflow region in double precision.
pub const DEGENERATE_VOL_EPS: f64 = 1e-12;

/// Market and contract parameters for a European call.
///
/// `drift` is the physical drift of the underlying; it plays no role in
/// risk-neutral pricing and is carried only so run configurations can record
/// it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    spot: f64,
    strike: f64,
    rate: f64,
    maturity: f64,
    drift: f64,
}

impl MarketParams {
    pub fn new(spot: f64, strike: f64, rate: f64, maturity: f64, drift: f64) -> Result<Self> {
        if !(spot > 0.0) {
            return Err(Error::InvalidParameter(format!("spot must be > 0, got {spot}")));
        }
        if !(strike > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "strike must be > 0, got {strike}"
            )));
        }
        if !(rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("rate must be >= 0, got {rate}")));
        }
        if !(maturity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "maturity must be > 0, got {maturity}"
            )));
        }
        if !drift.is_finite() {
            return Err(Error::InvalidParameter(format!("drift must be finite, got {drift}")));
        }
        Ok(Self {
            spot,
            strike,
            rate,
            maturity,
            drift,
        })
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn discount_factor(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }
}

/// Price of the call conditional on one averaged volatility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalPrice {
    /// Inner expectation before discounting.
    pub undiscounted: f64,
    /// `e^{-rT}` times the undiscounted price.
    pub discounted: f64,
    /// Upper Black-Scholes quantile; `+/-inf` in the degenerate limit.
    pub d1: f64,
    /// Lower Black-Scholes quantile; `d1 - sigma_bar sqrt(T)`.
    pub d2: f64,
}

/// Standard normal CDF, `Phi(x) = erfc(-x / sqrt(2)) / 2`.
///
/// Backed by libm's erfc (the SunPro rational approximation), which keeps the
/// absolute error well below 1e-12 everywhere and gives full relative
/// precision in the tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.3989422804014327;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// The two Black-Scholes quantiles for a positive averaged volatility.
pub fn d1_d2(mkt: &MarketParams, sigma_bar: f64) -> Result<(f64, f64)> {
    if !(sigma_bar > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_bar must be > 0 for d1/d2, got {sigma_bar}"
        )));
    }
    let h = sigma_bar * mkt.maturity.sqrt();
    let x = (mkt.spot / mkt.strike).ln() + mkt.rate * mkt.maturity;
    Ok((x / h + 0.5 * h, x / h - 0.5 * h))
}

/// Conditional Black-Scholes price for a given averaged volatility.
///
/// For `sigma_bar * sqrt(T)` below [`DEGENERATE_VOL_EPS`] the analytic
/// zero-volatility limit is returned, with `d1`/`d2` reported as infinite
/// sentinels of the moneyness sign.
pub fn bs_price_conditional(mkt: &MarketParams, sigma_bar: f64) -> ConditionalPrice {
    assert!(
        sigma_bar >= 0.0,
        "sigma_bar must be non-negative, got {sigma_bar}"
    );
    let df = mkt.discount_factor();
    if sigma_bar * mkt.maturity.sqrt() <= DEGENERATE_VOL_EPS {
        let x = (mkt.spot / mkt.strike).ln() + mkt.rate * mkt.maturity;
        let discounted = (mkt.spot - mkt.strike * df).max(0.0);
        let sentinel = if x > 0.0 {
            f64::INFINITY
        } else if x < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return ConditionalPrice {
            undiscounted: discounted / df,
            discounted,
            d1: sentinel,
            d2: sentinel,
        };
    }
    let (d1, d2) = d1_d2(mkt, sigma_bar).expect("sigma_bar > 0 checked above");
    let undiscounted = mkt.spot / df * norm_cdf(d1) - mkt.strike * norm_cdf(d2);
    ConditionalPrice {
        undiscounted,
        discounted: df * undiscounted,
        d1,
        d2,
    }
}
