//! Time reparameterization schedules and the closed-form optimal schedule.
//!
//! A schedule is a non-decreasing `tau: [0,1] -> [0,1]` with `tau(0) = 0`
//! and `tau(1) = 1`. The optimal schedule equalizes the binding Lipschitz
//! term over time: `tau'(t) * max{f*/(1 + tau f*), -g*/(1 + tau g*)}` is
//! constant. That ODE is linear on each side of the transition point
//! `tau0 = -(1/f* + 1/g*)/2`, which gives exponential branches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::bisect_increasing;
use crate::spectral::{SpectralBounds, ISOMETRY_TOL};

/// Time at which the binding term switches from dilation to contraction,
/// together with the schedule value there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub t0: f64,
    pub tau0: f64,
}

/// Closed-form transition time and value, if the transition happens
/// inside `[0, 1]`. Requires `g* < 0 < f*`.
pub fn transition_time(bounds: &SpectralBounds) -> Option<Transition> {
    let (f, g) = (bounds.f_star(), bounds.g_star());
    if !(g < 0.0 && f > 0.0) {
        return None;
    }
    // tau0 * f + 1 and tau0 * g + 1
    let a = 0.5 * (1.0 - f / g);
    let b = 0.5 * (1.0 - g / f);
    let num = a.ln();
    let den = num + b.ln() - g.ln_1p();
    let t0 = num / den;
    let tau0 = -0.5 * (1.0 / f + 1.0 / g);
    (0.0..=1.0).contains(&t0).then_some(Transition { t0, tau0 })
}

/// A monotone tabulated schedule, interpolated by a shape-preserving cubic.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSchedule {
    curve: MonotoneCubic,
}

impl TabulatedSchedule {
    /// Builds from knots; slopes are estimated when not given.
    pub fn new(t: Vec<f64>, tau: Vec<f64>, tau_dot: Option<Vec<f64>>) -> Result<Self> {
        let n = t.len();
        if n < 2 || tau.len() != n {
            return Err(Error::input("tabulated schedule needs matching t/tau with at least two knots"));
        }
        if t[0] != 0.0 || t[n - 1] != 1.0 {
            return Err(Error::input("tabulated schedule must span t in [0, 1]"));
        }
        if tau[0].abs() > 1e-12 || (tau[n - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::input("tabulated schedule must satisfy tau(0) = 0 and tau(1) = 1"));
        }
        if tau.windows(2).any(|w| w[1] < w[0]) || tau.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::input("tabulated tau must be non-decreasing within [0, 1]"));
        }
        let curve = match tau_dot {
            Some(d) => {
                if d.iter().any(|&v| v < 0.0) {
                    return Err(Error::input("tabulated slopes must be non-negative"));
                }
                MonotoneCubic::with_slopes(t, tau, d)?
            }
            None => MonotoneCubic::new(t, tau)?,
        };
        Ok(TabulatedSchedule { curve })
    }

    pub fn t(&self) -> &[f64] {
        self.curve.knots()
    }

    pub fn tau(&self) -> &[f64] {
        self.curve.values()
    }

    pub fn tau_dot(&self) -> &[f64] {
        self.curve.slopes()
    }
}

/// Which closed form (or table) a schedule uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Trivial,
    SimpleF,
    SimpleG,
    Piecewise,
    Tabulated,
}

impl ScheduleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleKind::Trivial => "trivial",
            ScheduleKind::SimpleF => "simple_f",
            ScheduleKind::SimpleG => "simple_g",
            ScheduleKind::Piecewise => "piecewise",
            ScheduleKind::Tabulated => "tabulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// `tau(t) = t`.
    Trivial,
    /// `tau(t) = ((1 + c)^t - 1) / c`, with `c = f*` (dilation-bound) or
    /// `c = g*` (contraction-bound); `log_base = ln(1 + c)`.
    Exponential {
        kind: ScheduleKind,
        f_star: f64,
        g_star: f64,
        log_base: f64,
    },
    /// Two exponential branches joined at `t0`.
    Piecewise {
        f_star: f64,
        g_star: f64,
        t0: f64,
        tau0: f64,
        /// `1/Z`, the constant value of the equalized Lipschitz term.
        rate: f64,
        /// Second branch is `k * exp(log_c - rate * t) - 1/g*`, with
        /// `log_c = ln(tau0 f* + 1)` and `k = (1/g* - 1/f*) / 2`.
        log_c: f64,
        k: f64,
    },
    Tabulated(TabulatedSchedule),
}

/// Result of the optimal-schedule construction from raw deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOutcome {
    pub schedule: Schedule,
    /// Set when the deviations describe an isometry and the trivial
    /// schedule was returned instead.
    pub trivial_fallback: bool,
}

/// Closed-form minimizer of the uniform Lipschitz bound.
pub fn optimal_schedule(bounds: &SpectralBounds) -> Schedule {
    let (f, g) = (bounds.f_star(), bounds.g_star());
    if let Some(Transition { t0, tau0 }) = transition_time(bounds) {
        let ln_a = (0.5 * (1.0 - f / g)).ln();
        let ln_b = (0.5 * (1.0 - g / f)).ln();
        let rate = ln_a + ln_b - g.ln_1p();
        return Schedule::Piecewise {
            f_star: f,
            g_star: g,
            t0,
            tau0,
            rate,
            log_c: ln_a,
            k: 0.5 * (1.0 / g - 1.0 / f),
        };
    }
    if f >= -g {
        Schedule::Exponential { kind: ScheduleKind::SimpleF, f_star: f, g_star: g, log_base: f.ln_1p() }
    } else {
        Schedule::Exponential { kind: ScheduleKind::SimpleG, f_star: f, g_star: g, log_base: g.ln_1p() }
    }
}

/// Like [`optimal_schedule`], but accepts raw deviations and falls back to
/// the trivial schedule (flagged) for an isometry.
pub fn optimal_schedule_or_trivial(f_star: f64, g_star: f64) -> Result<ScheduleOutcome> {
    if f_star.abs() < ISOMETRY_TOL && g_star.abs() < ISOMETRY_TOL {
        return Ok(ScheduleOutcome { schedule: Schedule::Trivial, trivial_fallback: true });
    }
    let bounds = SpectralBounds::new(f_star, g_star)?;
    Ok(ScheduleOutcome { schedule: optimal_schedule(&bounds), trivial_fallback: false })
}

pub fn trivial_schedule() -> Schedule {
    Schedule::Trivial
}

fn check_unit(t: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} = {t} outside [0, 1]")))
    }
}

impl Schedule {
    pub fn kind(&self) -> ScheduleKind {
        match self {
            Schedule::Trivial => ScheduleKind::Trivial,
            Schedule::Exponential { kind, .. } => *kind,
            Schedule::Piecewise { .. } => ScheduleKind::Piecewise,
            Schedule::Tabulated(_) => ScheduleKind::Tabulated,
        }
    }

    /// Interior time where the closed form switches branch, if any.
    pub fn breakpoint(&self) -> Option<f64> {
        match self {
            Schedule::Piecewise { t0, .. } => Some(*t0),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_unit(t, "t")?;
        Ok(self.value(t))
    }

    pub fn eval_deriv(&self, t: f64) -> Result<f64> {
        check_unit(t, "t")?;
        Ok(self.deriv(t))
    }

    pub fn eval_second_deriv(&self, t: f64) -> Result<f64> {
        check_unit(t, "t")?;
        Ok(self.second_deriv(t))
    }

    /// `tau(t)` for `t` already known to lie in `[0, 1]`.
    pub(crate) fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::Trivial => t,
            Schedule::Exponential { f_star, g_star, log_base, kind } => {
                if t == 1.0 {
                    return 1.0;
                }
                let c = if *kind == ScheduleKind::SimpleF { *f_star } else { *g_star };
                (t * log_base).exp_m1() / c
            }
            Schedule::Piecewise { f_star, g_star, t0, rate, log_c, k, .. } => {
                if t <= *t0 {
                    (t * rate).exp_m1() / f_star
                } else if t == 1.0 {
                    1.0
                } else {
                    k * (log_c - rate * t).exp() - 1.0 / g_star
                }
            }
            Schedule::Tabulated(tab) => tab.curve.eval(t).clamp(0.0, 1.0),
        }
    }

    pub(crate) fn deriv(&self, t: f64) -> f64 {
        match self {
            Schedule::Trivial => 1.0,
            Schedule::Exponential { f_star, g_star, log_base, kind } => {
                let c = if *kind == ScheduleKind::SimpleF { *f_star } else { *g_star };
                log_base / c * (t * log_base).exp()
            }
            Schedule::Piecewise { f_star, t0, rate, log_c, k, .. } => {
                if t <= *t0 {
                    rate / f_star * (t * rate).exp()
                } else {
                    -rate * k * (log_c - rate * t).exp()
                }
            }
            Schedule::Tabulated(tab) => tab.curve.deriv(t).max(0.0),
        }
    }

    pub(crate) fn second_deriv(&self, t: f64) -> f64 {
        match self {
            Schedule::Trivial => 0.0,
            Schedule::Exponential { f_star, g_star, log_base, kind } => {
                let c = if *kind == ScheduleKind::SimpleF { *f_star } else { *g_star };
                log_base * log_base / c * (t * log_base).exp()
            }
            Schedule::Piecewise { .. } => self.second_deriv_sided(t, false),
            Schedule::Tabulated(tab) => tab.curve.second_deriv(t),
        }
    }

    /// Second derivative taken from the right branch at a breakpoint when
    /// `right` is set; equal to [`Schedule::eval_second_deriv`] elsewhere.
    pub fn second_deriv_sided(&self, t: f64, right: bool) -> f64 {
        match self {
            Schedule::Piecewise { f_star, t0, rate, log_c, k, .. } => {
                if t < *t0 || (t == *t0 && !right) {
                    rate * rate / f_star * (t * rate).exp()
                } else {
                    rate * rate * k * (log_c - rate * t).exp()
                }
            }
            _ => self.second_deriv(t),
        }
    }

    /// `sup_t |tau''(t)|` over an `n`-point grid, including both one-sided
    /// limits at a branch point.
    pub fn max_abs_second_deriv(&self, n: usize) -> f64 {
        let mut m = (0..n)
            .map(|i| self.second_deriv(i as f64 / (n - 1) as f64).abs())
            .fold(0.0, f64::max);
        if let Some(t0) = self.breakpoint() {
            m = m
                .max(self.second_deriv_sided(t0, false).abs())
                .max(self.second_deriv_sided(t0, true).abs());
        }
        m
    }

    /// Time `t` with `tau(t) = value`.
    pub fn inverse(&self, value: f64) -> Result<f64> {
        check_unit(value, "tau")?;
        if value == 0.0 {
            return Ok(0.0);
        }
        if value == 1.0 {
            return Ok(1.0);
        }
        let t = match self {
            Schedule::Trivial => value,
            Schedule::Exponential { f_star, g_star, log_base, kind } => {
                let c = if *kind == ScheduleKind::SimpleF { *f_star } else { *g_star };
                (value * c).ln_1p() / log_base
            }
            Schedule::Piecewise { f_star, g_star, tau0, rate, log_c, k, .. } => {
                if value <= *tau0 {
                    (value * f_star).ln_1p() / rate
                } else {
                    (log_c - ((value + 1.0 / g_star) / k).ln()) / rate
                }
            }
            Schedule::Tabulated(_) => bisect_increasing(|t| self.value(t) - value, 0.0, 1.0, 1e-15),
        };
        Ok(t.clamp(0.0, 1.0))
    }

    /// `tau(phi(t))` with the monotone time warp
    /// `phi(t) = t + sum_j a_j sin(k_j pi t) / (k_j pi)`, tabulated on `n`
    /// uniform knots with exact slopes. Needs `sum_j |a_j| < 1`.
    pub fn warped(&self, modes: &[(u32, f64)], n: usize) -> Result<Schedule> {
        if n < 2 || modes.iter().any(|&(k, _)| k == 0) {
            return Err(Error::input("time warp needs n >= 2 and positive mode numbers"));
        }
        if modes.iter().map(|(_, a)| a.abs()).sum::<f64>() >= 1.0 {
            return Err(Error::input("time warp amplitudes must sum to less than one"));
        }
        let pi = std::f64::consts::PI;
        let phi = |t: f64| {
            let s: f64 = modes.iter().map(|&(k, a)| a * (k as f64 * pi * t).sin() / (k as f64 * pi)).sum();
            (t + s).clamp(0.0, 1.0)
        };
        let dphi = |t: f64| 1.0 + modes.iter().map(|&(k, a)| a * (k as f64 * pi * t).cos()).sum::<f64>();
        let t: Vec<f64> = (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 }).collect();
        let tau: Vec<f64> = t.iter().map(|&ti| if ti == 1.0 { 1.0 } else { self.value(phi(ti)) }).collect();
        let dot: Vec<f64> = t.iter().map(|&ti| self.deriv(phi(ti)) * dphi(ti)).collect();
        Ok(Schedule::Tabulated(TabulatedSchedule::new(t, tau, Some(dot))?))
    }

    /// Samples `t, tau, tau_dot, tau_ddot` on `n` uniform points.
    pub fn sample(&self, n: usize) -> Vec<[f64; 4]> {
        (0..n)
            .map(|i| {
                let t = if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
                [t, self.value(t), self.deriv(t), self.second_deriv(t)]
            })
            .collect()
    }

    pub fn sample_csv(&self, n: usize) -> String {
        crate::io::csv_table(&["t", "tau", "tau_dot", "tau_ddot"], self.sample(n).into_iter().map(|r| r.to_vec()))
    }

    pub fn to_doc(&self) -> ScheduleDoc {
        let mut doc = ScheduleDoc { kind: self.kind(), ..Default::default() };
        match self {
            Schedule::Trivial => {}
            Schedule::Exponential { f_star, g_star, .. } => {
                doc.f_star = Some(*f_star);
                doc.g_star = Some(*g_star);
            }
            Schedule::Piecewise { f_star, g_star, t0, tau0, .. } => {
                doc.f_star = Some(*f_star);
                doc.g_star = Some(*g_star);
                doc.t0 = Some(*t0);
                doc.tau0 = Some(*tau0);
            }
            Schedule::Tabulated(tab) => {
                doc.t = Some(tab.t().to_vec());
                doc.tau = Some(tab.tau().to_vec());
                doc.tau_dot = Some(tab.tau_dot().to_vec());
            }
        }
        doc
    }

    pub fn from_doc(doc: &ScheduleDoc) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::input(format!("schedule JSON lacks {name}")));
        match doc.kind {
            ScheduleKind::Trivial => Ok(Schedule::Trivial),
            ScheduleKind::SimpleF | ScheduleKind::SimpleG | ScheduleKind::Piecewise => {
                let bounds = SpectralBounds::new(need(doc.f_star, "f_star")?, need(doc.g_star, "g_star")?)?;
                let s = optimal_schedule(&bounds);
                if s.kind() != doc.kind {
                    return Err(Error::input(format!(
                        "schedule kind {} inconsistent with bounds (expected {})",
                        doc.kind.as_str(),
                        s.kind().as_str()
                    )));
                }
                Ok(s)
            }
            ScheduleKind::Tabulated => {
                let t = doc.t.clone().ok_or_else(|| Error::input("schedule JSON lacks t"))?;
                let tau = doc.tau.clone().ok_or_else(|| Error::input("schedule JSON lacks tau"))?;
                Ok(Schedule::Tabulated(TabulatedSchedule::new(t, tau, doc.tau_dot.clone())?))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }
}

/// Random warp modes for [`Schedule::warped`]: one to four modes with
/// `k <= 8` and total amplitude in `[0.05, 0.9]`.
pub fn random_warp_modes<R: rand::Rng>(rng: &mut R) -> Vec<(u32, f64)> {
    let count = rng.gen_range(1..=4);
    let raw: Vec<(u32, f64)> = (0..count).map(|_| (rng.gen_range(1..=8), rng.gen_range(-1.0..1.0))).collect();
    let total: f64 = raw.iter().map(|(_, a)| a.abs()).sum::<f64>().max(1e-3);
    let scale = rng.gen_range(0.05..0.9) / total;
    raw.into_iter().map(|(k, a)| (k, a * scale)).collect()
}

/// Serialized form of a [`Schedule`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub kind: ScheduleKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau_dot: Option<Vec<f64>>,
}
