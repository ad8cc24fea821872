//! Trajectory generation, per-path pricing, and the three experiment designs:
//! pricing tables, step-size studies, and discretization-error statistics.
//!
//! Trajectories are independent work items: path `i` of a run draws from
//! substream `substream_base + i`, results are collected into an indexed
//! buffer, and aggregation runs sequentially in trajectory order. Output is
//! therefore bit-identical for any worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pricing::{bs_price_conditional, MarketParams};
use crate::rng::NoiseStream;
use crate::sde::{simulate_em_path, subsample_path, GridSpec, OUParams};
use crate::volatility::{avg_sigma_sq_discrete, VolFunction};

/// Monte Carlo aggregate of a pricing run.
///
/// Per-path conditional prices are averaged first and discounted once, which
/// for a deterministic rate is the same as discounting per path. The d1/d2
/// entries are per-path averages (not the quantiles of the average variance);
/// degenerate zero-volatility paths contribute infinite sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEstimate {
    /// Discounted sample-average price.
    pub mean_discounted_price: f64,
    /// Sample average of the path-averaged variance.
    pub mean_avg_var: f64,
    /// Per-path averages of the conditional d1 / d2.
    pub mean_d1: f64,
    pub mean_d2: f64,
    /// Standard error of the discounted price (0 by convention for n = 1).
    pub std_error_price: f64,
    /// Standard error of the averaged variance.
    pub std_error_avg_var: f64,
    pub n_paths: usize,
}

/// Descriptive statistics of an error sample, one table column per field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub average: f64,
    pub std_error: f64,
    pub median: f64,
    pub std_deviation: f64,
    pub excess_kurtosis: f64,
    pub skewness: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Full descriptive statistics of a sample.
///
/// Mean, sample (n-1) standard deviation, midpoint median, and 1/n
/// central-moment skewness and excess kurtosis. Zero-variance samples report
/// zero skewness and excess by convention.
pub fn sample_stats(data: &[f64]) -> Result<ErrorStats> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let n = data.len();
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in data {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    let std_deviation = if n > 1 {
        (m2 * nf / (nf - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(ErrorStats {
        average: mean,
        std_error: std_deviation / nf.sqrt(),
        median,
        std_deviation,
        excess_kurtosis,
        skewness,
        min: sorted[0],
        max: sorted[n - 1],
        count: n,
    })
}

fn check_maturity(mkt: &MarketParams, g: &GridSpec) -> Result<()> {
    if (mkt.maturity() - g.maturity()).abs() > 1e-12 * mkt.maturity() {
        return Err(Error::InvalidParameter(format!(
            "grid maturity {} does not match market maturity {}",
            g.maturity(),
            mkt.maturity()
        )));
    }
    Ok(())
}

fn warn_if_not_contractive(ou: &OUParams, g: &GridSpec) {
    if !g.euler_is_contractive(ou) {
        log::warn!(
            "alpha * dt = {} >= 1: the Euler contraction factor is non-positive",
            ou.alpha() * g.dt()
        );
    }
}

/// Prices the option from `n_paths` Euler trajectories on substreams
/// `master_seed x {0, .., n_paths - 1}`.
pub fn price_option_mc(
    mkt: &MarketParams,
    ou: &OUParams,
    f: &VolFunction,
    g: &GridSpec,
    n_paths: usize,
    master_seed: u64,
) -> Result<PriceEstimate> {
    price_option_mc_with_base(mkt, ou, f, g, n_paths, master_seed, 0)
}

/// As [`price_option_mc`], with trajectory `i` reading substream
/// `substream_base + i`. Callers running several arms under one master seed
/// use disjoint bases so no noise is shared between arms.
pub fn price_option_mc_with_base(
    mkt: &MarketParams,
    ou: &OUParams,
    f: &VolFunction,
    g: &GridSpec,
    n_paths: usize,
    master_seed: u64,
    substream_base: u64,
) -> Result<PriceEstimate> {
    if n_paths < 1 {
        return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
    }
    check_maturity(mkt, g)?;
    warn_if_not_contractive(ou, g);

    let records: Vec<(f64, f64, f64, f64)> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let noise = NoiseStream::new(master_seed, substream_base + i as u64);
            let path = simulate_em_path(ou, g, &noise);
            let avg_var = avg_sigma_sq_discrete(f, &path);
            let cp = bs_price_conditional(mkt, avg_var.sqrt());
            (avg_var, cp.undiscounted, cp.d1, cp.d2)
        })
        .collect();

    let nf = n_paths as f64;
    let df = mkt.discount_factor();
    let mut sum_var = 0.0;
    let mut sum_price = 0.0;
    let mut sum_d1 = 0.0;
    let mut sum_d2 = 0.0;
    for &(v, p, d1, d2) in &records {
        sum_var += v;
        sum_price += p;
        sum_d1 += d1;
        sum_d2 += d2;
    }
    let mean_var = sum_var / nf;
    let mean_price = sum_price / nf;
    let (se_price, se_var) = if n_paths > 1 {
        let mut ssp = 0.0;
        let mut ssv = 0.0;
        for &(v, p, _, _) in &records {
            ssp += (p - mean_price) * (p - mean_price);
            ssv += (v - mean_var) * (v - mean_var);
        }
        let var_p = ssp / (nf - 1.0);
        let var_v = ssv / (nf - 1.0);
        (df * (var_p / nf).sqrt(), (var_v / nf).sqrt())
    } else {
        (0.0, 0.0)
    };

    Ok(PriceEstimate {
        mean_discounted_price: df * mean_price,
        mean_avg_var: mean_var,
        mean_d1: sum_d1 / nf,
        mean_d2: sum_d2 / nf,
        std_error_price: se_price,
        std_error_avg_var: se_var,
        n_paths,
    })
}

/// One independent pricing run per step size, on disjoint substream ranges
/// (row `j` uses substreams `j * n_paths ..`), mirroring independently
/// re-simulated table rows.
pub fn step_size_study(
    mkt: &MarketParams,
    ou: &OUParams,
    f: &VolFunction,
    dt_list: &[f64],
    n_paths: usize,
    master_seed: u64,
) -> Result<Vec<PriceEstimate>> {
    step_size_study_with_base(mkt, ou, f, dt_list, n_paths, master_seed, 0)
}

/// As [`step_size_study`] with an extra substream offset applied to every row.
pub fn step_size_study_with_base(
    mkt: &MarketParams,
    ou: &OUParams,
    f: &VolFunction,
    dt_list: &[f64],
    n_paths: usize,
    master_seed: u64,
    substream_base: u64,
) -> Result<Vec<PriceEstimate>> {
    if dt_list.is_empty() {
        return Err(Error::InvalidParameter("dt_list must be non-empty".into()));
    }
    dt_list
        .iter()
        .enumerate()
        .map(|(row, &dt)| {
            let g = GridSpec::from_dt(mkt.maturity(), dt)?;
            let base = substream_base + (row * n_paths) as u64;
            price_option_mc_with_base(mkt, ou, f, &g, n_paths, master_seed, base)
        })
        .collect()
}

/// Per-trajectory discretization errors of the averaged variance.
///
/// Each trajectory is simulated once on the fine grid and treated as the
/// "true" value; every coarse factor then re-averages the same trajectory on
/// the subsampled grid. Errors are signed relative differences
/// `(coarse - true) / true`.
pub fn discretization_error_study(
    mkt: &MarketParams,
    ou: &OUParams,
    f: &VolFunction,
    fine_dt: f64,
    coarse_factors: &[usize],
    n_paths: usize,
    master_seed: u64,
) -> Result<BTreeMap<usize, ErrorStats>> {
    discretization_error_study_with_base(mkt, ou, f, fine_dt, coarse_factors, n_paths, master_seed, 0)
}

/// As [`discretization_error_study`] with a substream offset for arm isolation.
#[allow(clippy::too_many_arguments)]
pub fn discretization_error_study_with_base(
    mkt: &MarketParams,
    ou: &OUParams,
    f: &VolFunction,
    fine_dt: f64,
    coarse_factors: &[usize],
    n_paths: usize,
    master_seed: u64,
    substream_base: u64,
) -> Result<BTreeMap<usize, ErrorStats>> {
    if n_paths < 1 {
        return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
    }
    if coarse_factors.is_empty() {
        return Err(Error::InvalidParameter("coarse_factors must be non-empty".into()));
    }
    let g = GridSpec::from_dt(mkt.maturity(), fine_dt)?;
    for &factor in coarse_factors {
        if factor < 1 || g.m() % factor != 0 {
            return Err(Error::NonDivisibleFactor { factor, m: g.m() });
        }
    }
    warn_if_not_contractive(ou, &g);

    let per_path: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let noise = NoiseStream::new(master_seed, substream_base + i as u64);
            let path = simulate_em_path(ou, &g, &noise);
            let v_true = avg_sigma_sq_discrete(f, &path);
            if v_true == 0.0 {
                return Err(Error::InvalidParameter(
                    "true averaged variance is zero; relative errors are undefined".into(),
                ));
            }
            coarse_factors
                .iter()
                .map(|&factor| {
                    let sub = subsample_path(&path, factor).expect("validated above");
                    Ok((avg_sigma_sq_discrete(f, &sub) - v_true) / v_true)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut out = BTreeMap::new();
    for (j, &factor) in coarse_factors.iter().enumerate() {
        let sample: Vec<f64> = per_path.iter().map(|errs| errs[j]).collect();
        out.insert(factor, sample_stats(&sample)?);
    }
    Ok(out)
}
