//! The uniform Lipschitz objective of a scheduled flow.
//!
//! At time `t` the velocity's spatial Lipschitz constant is
//! `tau'(t) * sup_s max{|f(s)/(1 + tau f(s))|, |g(s)/(1 + tau g(s))|}`.
//! Because `x -> x/(1 + tau x)` is increasing, the spatial sup only sees the
//! extremes, giving the reduced form `tau'(t) * max{f*/(1 + tau f*), -g*/(1 + tau g*)}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::quadrature::golden_max;
use crate::schedule::{transition_time, Schedule};
use crate::spectral::{bounds_from_field, SpectralBounds, SpectralField};

/// Default time grid for supremum evaluation.
pub const DEFAULT_TIME_GRID: usize = 4096;

/// Spectral input of the objective: extremes only, or the full sampled field.
#[derive(Debug, Clone, Copy)]
pub enum Spectrum<'a> {
    Bounds(&'a SpectralBounds),
    Field(&'a SpectralField),
}

impl Spectrum<'_> {
    pub fn bounds(&self) -> Result<SpectralBounds> {
        match self {
            Spectrum::Bounds(b) => Ok(**b),
            Spectrum::Field(f) => bounds_from_field(f),
        }
    }

    fn lipschitz_at(&self, schedule: &Schedule, t: f64) -> f64 {
        match self {
            Spectrum::Bounds(b) => reduced_at(b, schedule, t),
            Spectrum::Field(f) => field_at(f, schedule, t),
        }
    }
}

fn reduced_at(bounds: &SpectralBounds, schedule: &Schedule, t: f64) -> f64 {
    schedule.deriv(t) * bounds.rate(schedule.value(t))
}

fn field_at(field: &SpectralField, schedule: &Schedule, t: f64) -> f64 {
    let tau = schedule.value(t);
    let sup = field
        .f_values()
        .iter()
        .zip(field.g_values())
        .map(|(&f, &g)| (f / (1.0 + tau * f)).abs().max((g / (1.0 + tau * g)).abs()))
        .fold(0.0, f64::max);
    schedule.deriv(t).abs() * sup
}

/// Grid supremum over `[0, 1]` refined by golden-section search around the
/// discrete argmax.
fn sup_over_time<F: Fn(f64) -> f64 + Sync>(h: F, n_time: usize) -> f64 {
    let n = n_time.max(3);
    let grid: Vec<f64> = (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 }).collect();
    let values: Vec<f64> = grid.par_iter().map(|&t| h(t)).collect();
    let (k, &best) = values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(n - 1)];
    let (_, refined) = golden_max(&h, a, b, 80);
    best.max(refined)
}

/// `Lambda[tau]` in reduced form from the spectral extremes.
pub fn lambda_of_schedule(bounds: &SpectralBounds, schedule: &Schedule, n_time: usize) -> f64 {
    sup_over_time(|t| reduced_at(bounds, schedule, t), n_time)
}

/// `Lambda[tau]` as a supremum over the full `(s, t)` product grid.
pub fn lambda_of_schedule_field(field: &SpectralField, schedule: &Schedule, n_time: usize) -> f64 {
    sup_over_time(|t| field_at(field, schedule, t), n_time)
}

/// `Lambda` for `tau(t) = t`: `max{sigma*_max - 1, (1 - sigma*_min)/sigma*_min}`.
pub fn lambda_trivial_closed(bounds: &SpectralBounds) -> f64 {
    let (smax, smin) = (bounds.sigma_max(), bounds.sigma_min());
    (smax - 1.0).max((1.0 - smin) / smin)
}

/// `Lambda` at the optimal schedule.
pub fn lambda_optimal_closed(bounds: &SpectralBounds) -> f64 {
    let (smax, smin) = (bounds.sigma_max(), bounds.sigma_min());
    if transition_time(bounds).is_some() {
        let (f, one_minus_smin) = (bounds.f_star(), -bounds.g_star());
        (f / smin).ln() + (0.25 * (1.0 / one_minus_smin + one_minus_smin / (f * f) + 2.0 / f)).ln()
    } else if smax + smin >= 2.0 {
        bounds.f_star().ln_1p()
    } else {
        -bounds.g_star().ln_1p()
    }
}

/// Pointwise spatial Lipschitz constant `t -> Lip(v(., t))` on `n_time` points.
pub fn lipschitz_curve(spectrum: Spectrum<'_>, schedule: &Schedule, n_time: usize) -> Vec<(f64, f64)> {
    let n = n_time.max(2);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let t = if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
            (t, spectrum.lipschitz_at(schedule, t))
        })
        .collect()
}

pub fn curve_csv(curve: &[(f64, f64)]) -> String {
    crate::io::csv_table(&["t", "lipschitz"], curve.iter().map(|&(t, v)| vec![t, v]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub f_star: f64,
    pub g_star: f64,
    pub lambda_trivial: f64,
    pub lambda_optimal: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_of_input: Option<f64>,
    /// `lambda_trivial / lambda_optimal`
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<(f64, f64)>>,
}

/// Closed-form trivial and optimal values, plus the objective and its time
/// profile for `schedule` when one is given.
pub fn report(spectrum: Spectrum<'_>, schedule: Option<&Schedule>, n_time: usize) -> Result<LipschitzReport> {
    let bounds = spectrum.bounds()?;
    let lambda_trivial = lambda_trivial_closed(&bounds);
    let lambda_optimal = lambda_optimal_closed(&bounds);
    let (lambda_of_input, curve) = match schedule {
        Some(s) => {
            let lam = match spectrum {
                Spectrum::Bounds(b) => lambda_of_schedule(b, s, n_time),
                Spectrum::Field(f) => lambda_of_schedule_field(f, s, n_time),
            };
            (Some(lam), Some(lipschitz_curve(spectrum, s, n_time)))
        }
        None => (None, None),
    };
    Ok(LipschitzReport {
        f_star: bounds.f_star(),
        g_star: bounds.g_star(),
        lambda_trivial,
        lambda_optimal,
        lambda_of_input,
        ratio: lambda_trivial / lambda_optimal,
        curve,
    })
}
