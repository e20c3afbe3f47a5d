//! Shape-preserving piecewise cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Monotone cubic Hermite interpolant through `(x_i, y_i)`.
///
/// Node slopes are either estimated (PCHIP, Fritsch-Butland weighted
/// harmonic mean) or supplied by the caller; in both cases the
/// Fritsch-Carlson limiter is applied so that monotone data yield a
/// monotone curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_nodes(&x, &y)?;
        let d = pchip_slopes(&x, &y);
        Ok(Self::limited(x, y, d))
    }

    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        check_nodes(&x, &y)?;
        if d.len() != x.len() || d.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("slopes must be finite and match the node count"));
        }
        Ok(Self::limited(x, y, d))
    }

    fn limited(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Self {
        for i in 0..x.len() - 1 {
            let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            if delta == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let a = d[i] / delta;
            let b = d[i + 1] / delta;
            if a < 0.0 {
                d[i] = 0.0;
            }
            if b < 0.0 {
                d[i + 1] = 0.0;
            }
            let (a, b) = (a.max(0.0), b.max(0.0));
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                d[i] = tau * a * delta;
                d[i + 1] = tau * b * delta;
            }
        }
        MonotoneCubic { x, y, d }
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.x.len();
        let k = self.x.partition_point(|&v| v <= x);
        k.clamp(1, n - 1) - 1
    }

    /// Returns the segment index, local coordinate in `[0,1]`, and width.
    fn local(&self, x: f64) -> (usize, f64, f64) {
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        (i, (x - self.x[i]) / h, h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, s, h) = self.local(x);
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i] * h, self.d[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (i, s, h) = self.local(x);
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i] * h, self.d[i + 1] * h);
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * d1) / h
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        let (i, s, h) = self.local(x);
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i] * h, self.d[i + 1] * h);
        ((12.0 * s - 6.0) * y0 + (6.0 * s - 4.0) * d0 + (-12.0 * s + 6.0) * y1 + (6.0 * s - 2.0) * d1) / (h * h)
    }
}

fn check_nodes(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::input("interpolation needs matching x/y with at least two nodes"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::input("interpolation nodes must be finite"));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("interpolation knots must be strictly increasing"));
    }
    Ok(())
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
