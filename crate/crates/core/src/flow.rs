//! One-dimensional transport maps and scheduled interpolation flows.
//!
//! Particles follow `X(x, t) = (1 - tau(t)) x + tau(t) T(x)`, driven by the
//! velocity `v(y, t) = tau'(t) (T(x) - x)` where `x` is the pre-image of `y`
//! under `X(., t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lipschitz::lambda_of_schedule;
use crate::mixture::GaussianMixture;
use crate::quadrature::{bisect_increasing, uniform_grid};
use crate::schedule::Schedule;
use crate::spectral::SpectralBounds;

/// Default source-quantile truncation for CDF-composed maps.
pub const DEFAULT_DELTA: f64 = 1e-4;
/// Default number of cached `(x, T(x))` nodes.
pub const DEFAULT_CACHE: usize = 4096;

/// Monotone map `F_target^{-1} o F_source` on the source's `[delta, 1 - delta]`
/// quantile box.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfMap {
    source: GaussianMixture,
    target: GaussianMixture,
    delta: f64,
    cache_x: Vec<f64>,
    cache_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransportMap1D {
    /// `T(x) = slope * x + intercept`.
    Affine { slope: f64, intercept: f64 },
    CdfComposed(CdfMap),
}

/// Optimal map between `N(mu1, theta1^2)` and `N(mu2, theta2^2)`.
pub fn gaussian_map(mu1: f64, theta1: f64, mu2: f64, theta2: f64) -> Result<TransportMap1D> {
    if !(theta1 > 0.0 && theta2 > 0.0) || !mu1.is_finite() || !mu2.is_finite() {
        return Err(Error::input("gaussian map needs finite means and positive scales"));
    }
    let slope = theta2 / theta1;
    Ok(TransportMap1D::Affine { slope, intercept: mu2 - slope * mu1 })
}

/// Monotone rearrangement of `source` onto `target`, truncated to the source
/// quantiles `[delta, 1 - delta]`.
pub fn gmm_map(source: GaussianMixture, target: GaussianMixture, delta: f64, n_cache: usize) -> Result<TransportMap1D> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::input(format!("delta = {delta} must lie in (0, 0.5)")));
    }
    if n_cache < 2 {
        return Err(Error::input("cache needs at least two nodes"));
    }
    let lo = source.quantile(delta)?;
    let hi = source.quantile(1.0 - delta)?;
    let cache_x = uniform_grid(lo, hi, n_cache);
    let mut cache_t = Vec::with_capacity(n_cache);
    for &x in &cache_x {
        let y = target.quantile(source.cdf(x))?;
        if let Some(&prev) = cache_t.last() {
            if y < prev {
                return Err(Error::Quantile(format!("non-monotone quantile at x = {x}")));
            }
        }
        cache_t.push(y);
    }
    Ok(TransportMap1D::CdfComposed(CdfMap { source, target, delta, cache_x, cache_t }))
}

impl CdfMap {
    pub fn source(&self) -> &GaussianMixture {
        &self.source
    }

    pub fn target(&self) -> &GaussianMixture {
        &self.target
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn cell(&self, x: f64) -> usize {
        let n = self.cache_x.len();
        self.cache_x.partition_point(|&v| v <= x).clamp(1, n - 1) - 1
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let u = self.source.cdf(x);
        let lo = self.cache_t[i.saturating_sub(1)];
        let hi = self.cache_t[(i + 2).min(self.cache_t.len() - 1)];
        self.target.quantile_in(u, lo, hi)
    }

    fn deriv(&self, x: f64) -> f64 {
        self.source.pdf(x) / self.target.pdf(self.eval(x))
    }
}

impl TransportMap1D {
    /// Interval on which the map is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            TransportMap1D::Affine { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            TransportMap1D::CdfComposed(m) => (m.cache_x[0], *m.cache_x.last().unwrap()),
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::domain(format!("x = {x} outside the map domain [{lo}, {hi}]")))
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            TransportMap1D::Affine { slope, intercept } => slope * x + intercept,
            TransportMap1D::CdfComposed(m) => m.eval(x),
        })
    }

    /// `T'(x)`; for CDF maps `p_source(x) / p_target(T(x))`.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            TransportMap1D::Affine { slope, .. } => *slope,
            TransportMap1D::CdfComposed(m) => m.deriv(x),
        })
    }

    /// Solves `(1 - tau) x + tau T(x) = y` for `x`.
    pub fn interpolant_preimage(&self, y: f64, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            self.check(y)?;
            return Ok(y);
        }
        match self {
            TransportMap1D::Affine { slope, intercept } => Ok((y - tau * intercept) / ((1.0 - tau) + tau * slope)),
            TransportMap1D::CdfComposed(m) => {
                let n = m.cache_x.len();
                let at = |i: usize| (1.0 - tau) * m.cache_x[i] + tau * m.cache_t[i];
                let (lo, hi) = (at(0), at(n - 1));
                if !(y >= lo && y <= hi) {
                    return Err(Error::domain(format!(
                        "y = {y} outside the flow range [{lo}, {hi}] at tau = {tau}"
                    )));
                }
                let (mut k, mut upper) = (0, n - 1);
                while upper - k > 1 {
                    let mid = (k + upper) / 2;
                    if at(mid) <= y {
                        k = mid;
                    } else {
                        upper = mid;
                    }
                }
                let a = m.cache_x[k.saturating_sub(1)];
                let b = m.cache_x[(k + 2).min(n - 1)];
                Ok(bisect_increasing(|x| (1.0 - tau) * x + tau * m.eval(x) - y, a, b, 1e-13))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMethod {
    Exact,
    Euler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub x0: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub method: FlowMethod,
    /// Step size for Euler trajectories.
    pub step_size: Option<f64>,
}

impl FlowTrajectory {
    pub fn endpoint(&self) -> f64 {
        *self.positions.last().expect("trajectories are non-empty")
    }
}

/// Writes trajectories as `x0,t,x` rows.
pub fn trajectories_csv(trajs: &[FlowTrajectory]) -> String {
    crate::io::csv_table(
        &["x0", "t", "x"],
        trajs
            .iter()
            .flat_map(|tr| tr.times.iter().zip(&tr.positions).map(move |(&t, &x)| vec![tr.x0, t, x])),
    )
}

/// `X(x0, t) = (1 - tau(t)) x0 + tau(t) T(x0)`.
pub fn exact_position(map: &TransportMap1D, schedule: &Schedule, x0: f64, t: f64) -> Result<f64> {
    let tau = schedule.eval(t)?;
    let tx = map.eval(x0)?;
    Ok((1.0 - tau) * x0 + tau * tx)
}

pub fn exact_flow(map: &TransportMap1D, schedule: &Schedule, x0: f64, times: &[f64]) -> Result<FlowTrajectory> {
    if times.first() != Some(&0.0) || times.windows(2).any(|w| w[1] <= w[0]) || times.last().is_some_and(|&t| t > 1.0) {
        return Err(Error::input("times must start at 0, increase strictly and stay within [0, 1]"));
    }
    let tx = map.eval(x0)?;
    let positions = times
        .iter()
        .map(|&t| {
            let tau = schedule.value(t);
            (1.0 - tau) * x0 + tau * tx
        })
        .collect();
    Ok(FlowTrajectory { x0, times: times.to_vec(), positions, method: FlowMethod::Exact, step_size: None })
}

/// Scheduled velocity `v(y, t) = tau'(t) (T(x) - x)` with `X(x, t) = y`.
pub fn velocity(map: &TransportMap1D, schedule: &Schedule, y: f64, t: f64) -> Result<f64> {
    let tau = schedule.eval(t)?;
    let rate = schedule.deriv(t);
    let x = map.interpolant_preimage(y, tau)?;
    let mut tx = map.eval(x)?;
    if tau > 0.0 {
        // Where T is steeper than the x resolution (a mode gap), T(x) is only
        // pinned down by the interpolation identity itself.
        tx += (y - ((1.0 - tau) * x + tau * tx)) / tau;
    }
    Ok(rate * (tx - x))
}

/// Forward Euler with `n_steps` uniform steps from `t = 0` to `t = 1`.
pub fn euler_flow(map: &TransportMap1D, schedule: &Schedule, x0: f64, n_steps: usize) -> Result<FlowTrajectory> {
    if n_steps == 0 {
        return Err(Error::input("euler_flow needs at least one step"));
    }
    let h = 1.0 / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut positions = Vec::with_capacity(n_steps + 1);
    let mut y = x0;
    times.push(0.0);
    positions.push(y);
    for k in 0..n_steps {
        let t = k as f64 * h;
        y += h * velocity(map, schedule, y, t)?;
        times.push(if k + 1 == n_steps { 1.0 } else { (k + 1) as f64 * h });
        positions.push(y);
    }
    Ok(FlowTrajectory { x0, times, positions, method: FlowMethod::Euler, step_size: Some(h) })
}

/// Ingredients and value of the forward-Euler global error bound
/// `h M / (2 L) (e^L - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerBound {
    pub h: f64,
    /// `sup |tau''| * sup |T(x) - x|`
    pub m: f64,
    /// Uniform Lipschitz constant of the scheduled velocity.
    pub lambda: f64,
    pub bound: f64,
}

/// Euler error bound with `M` from a grid sup over `omega`.
pub fn error_bound(
    bounds: &SpectralBounds,
    map: &TransportMap1D,
    schedule: &Schedule,
    h: f64,
    omega: (f64, f64),
) -> Result<EulerBound> {
    if !(h > 0.0) {
        return Err(Error::input("step size must be positive"));
    }
    let disp = uniform_grid(omega.0, omega.1, 1001)
        .into_iter()
        .map(|x| map.eval(x).map(|tx| (tx - x).abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let m = schedule.max_abs_second_deriv(4097) * disp;
    let lambda = lambda_of_schedule(bounds, schedule, 4096);
    let growth = if lambda > 1e-12 { lambda.exp_m1() / lambda } else { 1.0 };
    let bound = if m == 0.0 { 0.0 } else { 0.5 * h * m * growth };
    Ok(EulerBound { h, m, lambda, bound })
}
