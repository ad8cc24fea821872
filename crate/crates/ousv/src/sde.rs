//! Volatility-driver trajectories.
//!
//! The driver is the mean-reverting diffusion
//!
//! ```text
//! dY_t = -alpha Y_t dt + k dZ_t,   Y_0 = y0,
//! ```
//!
//! simulated either with the Euler recursion
//!
//! ```text
//! Y_{l+1} = (1 - alpha dt) Y_l + k dZ_l,   dZ_l ~ N(0, dt),
//! ```
//!
//! or with the exact Gaussian transition
//!
//! ```text
//! Y_{l+1} = e^{-alpha dt} Y_l + k sqrt((1 - e^{-2 alpha dt}) / (2 alpha)) xi_l.
//! ```
//!
//! Both schemes consume one standard normal `xi_l` per step from the same
//! [`NoiseStream`] position, with the Euler increment `dZ_l = sqrt(dt) xi_l`,
//! so paths produced from the same stream are coupled through shared Brownian
//! increments.

use crate::error::{Error, Result};
use crate::rng::NoiseStream;

/// Parameters of the driver process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OUParams {
    alpha: f64,
    k: f64,
    y0: f64,
}

impl OUParams {
    /// `alpha` is the mean-reversion rate (> 0), `k` the noise scale (>= 0;
    /// zero gives the deterministic decay), `y0` the initial driver value.
    pub fn new(alpha: f64, k: f64, y0: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mean-reversion rate must be > 0, got {alpha}"
            )));
        }
        if !(k >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise scale must be >= 0, got {k}"
            )));
        }
        if !y0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "initial value must be finite, got {y0}"
            )));
        }
        Ok(Self { alpha, k, y0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }
}

/// Uniform time grid on `[0, T]` with `m` steps of width `dt = T / m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    maturity: f64,
    m: usize,
}

impl GridSpec {
    pub fn new(maturity: f64, m: usize) -> Result<Self> {
        if !(maturity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "maturity must be > 0, got {maturity}"
            )));
        }
        if m < 1 {
            return Err(Error::InvalidParameter("step count must be >= 1".into()));
        }
        Ok(Self { maturity, m })
    }

    /// Grid with `m = round(T / dt)` steps, the convention used when a run is
    /// configured by step size rather than step count.
    pub fn from_dt(maturity: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let m = (maturity / dt).round() as usize;
        Self::new(maturity, m)
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.m as f64
    }

    /// True when the Euler contraction factor `1 - alpha dt` is positive.
    /// The drivers warn (but do not fail) when this is violated; the
    /// reference experiments themselves run `alpha = 100` at `dt = 0.01`.
    pub fn euler_is_contractive(&self, p: &OUParams) -> bool {
        p.alpha() * self.dt() < 1.0
    }
}

/// Scheme that produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    Exact,
    Deterministic,
}

/// Driver values on a grid: `m + 1` entries including `Y_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    grid: GridSpec,
    values: Vec<f64>,
    scheme: Scheme,
}

impl Path {
    fn new(grid: GridSpec, values: Vec<f64>, scheme: Scheme) -> Self {
        debug_assert_eq!(values.len(), grid.m() + 1);
        Self {
            grid,
            values,
            scheme,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths hold m+1 >= 2 values")
    }
}

/// Mean and variance of the driver at time `t`:
/// `E[Y_t] = y0 e^{-alpha t}`, `Var[Y_t] = k^2 / (2 alpha) (1 - e^{-2 alpha t})`.
pub fn ou_exact_moments(p: &OUParams, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let mean = p.y0() * (-p.alpha() * t).exp();
    let variance = p.k() * p.k() / (2.0 * p.alpha()) * (1.0 - (-2.0 * p.alpha() * t).exp());
    Ok((mean, variance))
}

/// Euler path on the grid, consuming one standard normal per step.
pub fn simulate_em_path(p: &OUParams, g: &GridSpec, noise: &NoiseStream) -> Path {
    let dt = g.dt();
    let contraction = 1.0 - p.alpha() * dt;
    let scale = p.k() * dt.sqrt();
    let mut values = Vec::with_capacity(g.m() + 1);
    values.push(p.y0());
    let mut draws = noise.normals();
    let mut y = p.y0();
    for _ in 0..g.m() {
        y = contraction * y + scale * draws.next_normal();
        values.push(y);
    }
    Path::new(*g, values, Scheme::Euler)
}

/// Exact-transition path on the grid, consuming the same standard normals the
/// Euler scheme would, so the two stay coupled on a shared stream.
pub fn simulate_exact_path(p: &OUParams, g: &GridSpec, noise: &NoiseStream) -> Path {
    let dt = g.dt();
    let decay = (-p.alpha() * dt).exp();
    let scale = p.k() * ((1.0 - (-2.0 * p.alpha() * dt).exp()) / (2.0 * p.alpha())).sqrt();
    let mut values = Vec::with_capacity(g.m() + 1);
    values.push(p.y0());
    let mut draws = noise.normals();
    let mut y = p.y0();
    for _ in 0..g.m() {
        y = decay * y + scale * draws.next_normal();
        values.push(y);
    }
    Path::new(*g, values, Scheme::Exact)
}

/// Noiseless decay `Y_l = y0 e^{-alpha l dt}` sampled on the grid.
pub fn deterministic_path(p: &OUParams, g: &GridSpec) -> Path {
    let dt = g.dt();
    let values = (0..=g.m())
        .map(|l| p.y0() * (-p.alpha() * l as f64 * dt).exp())
        .collect();
    Path::new(*g, values, Scheme::Deterministic)
}

/// Path restricted to every `factor`-th grid point (coarse grid `m / factor`).
pub fn subsample_path(path: &Path, factor: usize) -> Result<Path> {
    let m = path.grid().m();
    if factor < 1 || m % factor != 0 {
        return Err(Error::NonDivisibleFactor { factor, m });
    }
    let coarse = GridSpec::new(path.grid().maturity(), m / factor)?;
    let values = path.values().iter().copied().step_by(factor).collect();
    Ok(Path::new(coarse, values, path.scheme()))
}
