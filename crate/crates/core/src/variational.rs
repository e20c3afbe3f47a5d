//! Smooth `L^{2p}` relaxations of the Lipschitz objective and their solutions.
//!
//! The relaxed Lagrangian depends on time only through `tau` and `tau'`,
//! `lambda_p(tau, tau') = tau'^{2p} K_p(tau)` with
//! `K_p(u) = int_Omega (f/(1 + u f))^{2p} + (g/(1 + u g))^{2p} ds`.
//! Its minimizer satisfies `tau' K_p(tau)^{1/2p} = 1/Z_p`, which separates:
//! `t(tau) = Z_p int_0^tau K_p(u)^{1/2p} du`. We integrate that in `tau` and
//! tabulate the inverse, so both boundary conditions hold exactly and no
//! shooting is needed. The `L^inf` problem is the same construction with the
//! integrand `max{f*/(1 + u f*), -g*/(1 + u g*)}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{chebyshev_unit_nodes, gauss5, log_weighted_sum_exp, trapezoid_weights, uniform_grid, GAUSS_LEGENDRE_5};
use crate::schedule::{transition_time, Schedule, ScheduleDoc, TabulatedSchedule};
use crate::spectral::{bounds_from_field, SpectralBounds, SpectralField};

pub const DEFAULT_N_TAU: usize = 2048;

/// `ln K_p(x)`, evaluated with a max shift so large `p` cannot overflow.
pub fn k_p(field: &SpectralField, x: f64, p: u32) -> f64 {
    let two_p = 2.0 * p as f64;
    let n = field.len();
    let mut logs = Vec::with_capacity(2 * n);
    let mut weights = Vec::with_capacity(2 * n);
    for ((&f, &g), &w) in field.f_values().iter().zip(field.g_values()).zip(field.weights()) {
        logs.push(two_p * (f / (1.0 + x * f)).abs().ln());
        logs.push(two_p * (g / (1.0 + x * g)).abs().ln());
        weights.push(w);
        weights.push(w);
    }
    log_weighted_sum_exp(&logs, &weights)
}

/// `K_p(x)^{1/2p}`.
fn k_root(field: &SpectralField, x: f64, p: u32) -> f64 {
    (k_p(field, x, p) / (2.0 * p as f64)).exp()
}

/// `(int_0^1 lambda_p(tau, tau') dt)^{1/2p}` by composite Gauss quadrature
/// on `n_time` uniform cells, accumulated in log scale.
pub fn lp_objective(field: &SpectralField, schedule: &Schedule, p: u32, n_time: usize) -> Result<f64> {
    bounds_from_field(field)?;
    let two_p = 2.0 * p as f64;
    let cells = n_time.max(1);
    let h = 1.0 / cells as f64;
    let terms: Vec<(f64, f64)> = (0..cells)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mid = (c as f64 + 0.5) * h;
            GAUSS_LEGENDRE_5.iter().map(move |&(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
        })
        .map(|(t, w)| (two_p * schedule.deriv(t).ln() + k_p(field, schedule.value(t), p), w))
        .collect();
    let (logs, weights): (Vec<f64>, Vec<f64>) = terms.into_iter().unzip();
    Ok((log_weighted_sum_exp(&logs, &weights) / two_p).exp())
}

/// Minimizer of the `p`-relaxed problem.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub p: u32,
    pub schedule: Schedule,
    /// Normalization constant `Z_p = 1 / int_0^1 K_p^{1/2p}`.
    pub z_p: f64,
    pub grid_size: usize,
    /// Sup of `|tau' K_p(tau)^{1/2p} Z_p - 1|` on interior off-knot times.
    pub residual_sup: f64,
}

#[derive(Serialize)]
struct LpSolutionDoc<'a> {
    #[serde(flatten)]
    schedule: &'a ScheduleDoc,
    p: u32,
    z_p: f64,
    residual_sup: f64,
}

impl LpSolution {
    pub fn to_json(&self) -> Result<String> {
        let doc = self.schedule.to_doc();
        Ok(serde_json::to_string_pretty(&LpSolutionDoc {
            schedule: &doc,
            p: self.p,
            z_p: self.z_p,
            residual_sup: self.residual_sup,
        })?)
    }

    /// `Z_p` recomputed on the time side: `int_0^1 K_p(tau_p(t))^{-1/2p} dt`.
    pub fn z_time_side(&self, field: &SpectralField, n_cells: usize) -> f64 {
        let h = 1.0 / n_cells as f64;
        let cells: Vec<f64> = (0..n_cells)
            .into_par_iter()
            .map(|c| {
                let a = c as f64 * h;
                gauss5(|t| 1.0 / k_root(field, self.schedule.value(t), self.p), a, a + h)
            })
            .collect();
        cells.iter().sum()
    }
}

/// Tabulates `tau(t)` from the separable form `dt/dtau = Z m(tau)`.
///
/// `nodes` must be increasing from 0 to 1; `m` must be positive. Returns
/// the schedule and `Z = 1 / int_0^1 m`.
fn separable_schedule<M: Fn(f64) -> f64 + Sync>(m: M, nodes: &[f64]) -> Result<(Schedule, f64)> {
    let cells: Vec<f64> = nodes.par_windows(2).map(|w| gauss5(&m, w[0], w[1])).collect();
    let node_m: Vec<f64> = nodes.par_iter().map(|&u| m(u)).collect();
    if cells.iter().chain(&node_m).any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::Numeric("separable integrand is not finite and positive".into()));
    }
    let mut cumulative = Vec::with_capacity(nodes.len());
    cumulative.push(0.0);
    for c in &cells {
        cumulative.push(cumulative.last().unwrap() + c);
    }
    let total = *cumulative.last().unwrap();
    let mut t: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
    *t.last_mut().unwrap() = 1.0;
    let slopes: Vec<f64> = node_m.iter().map(|mi| total / mi).collect();
    let mut tau = nodes.to_vec();
    *tau.last_mut().unwrap() = 1.0;
    let tab = TabulatedSchedule::new(t, tau, Some(slopes))?;
    Ok((Schedule::Tabulated(tab), 1.0 / total))
}

/// Solves the `p`-relaxed problem on `n_tau` Chebyshev-clustered nodes.
pub fn solve_lp(field: &SpectralField, p: u32, n_tau: usize) -> Result<LpSolution> {
    if p == 0 {
        return Err(Error::input("p must be a positive integer"));
    }
    if n_tau < 16 {
        return Err(Error::input("n_tau must be at least 16"));
    }
    bounds_from_field(field)?;
    let nodes = chebyshev_unit_nodes(n_tau);
    let (schedule, z_p) = separable_schedule(|u| k_root(field, u, p), &nodes)?;
    let residual_sup = (1..1000)
        .into_par_iter()
        .map(|i| {
            let t = (i as f64 - 0.5) / 999.0;
            (schedule.deriv(t) * k_root(field, schedule.value(t), p) * z_p - 1.0).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(LpSolution { p, schedule, z_p, grid_size: n_tau, residual_sup })
}

/// Numerical solution of the `L^inf` optimality ODE, independent of the
/// closed form. The kink at the transition value is added as a node.
pub fn solve_linf_numeric(bounds: &SpectralBounds, n_tau: usize) -> Result<Schedule> {
    if n_tau < 16 {
        return Err(Error::input("n_tau must be at least 16"));
    }
    let mut nodes = chebyshev_unit_nodes(n_tau);
    if let Some(tr) = transition_time(bounds) {
        if tr.tau0 > 0.0 && tr.tau0 < 1.0 {
            let k = nodes.partition_point(|&u| u < tr.tau0);
            let gap = 1e-12;
            if (nodes[k] - tr.tau0).abs() < gap {
                nodes[k] = tr.tau0;
            } else if (nodes[k - 1] - tr.tau0).abs() < gap {
                nodes[k - 1] = tr.tau0;
            } else {
                nodes.insert(k, tr.tau0);
            }
        }
    }
    Ok(separable_schedule(|u| bounds.rate(u), &nodes)?.0)
}

/// `L^2([0,1])` distance on `n` trapezoid nodes.
pub fn l2_distance(a: &Schedule, b: &Schedule, n: usize) -> f64 {
    let grid = uniform_grid(0.0, 1.0, n.max(2));
    let w = trapezoid_weights(&grid);
    grid.iter()
        .zip(&w)
        .map(|(&t, &wi)| {
            let d = a.value(t) - b.value(t);
            wi * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Sup-norm distance on `n` uniform points.
pub fn sup_distance(a: &Schedule, b: &Schedule, n: usize) -> f64 {
    uniform_grid(0.0, 1.0, n.max(2))
        .into_iter()
        .map(|t| (a.value(t) - b.value(t)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{optimal_schedule, trivial_schedule};

    fn unit_constant(v: f64) -> SpectralField {
        SpectralField::constant(0.0, 1.0, 11, v, v).unwrap()
    }

    #[test]
    fn k_p_constant_fields() {
        assert!((k_p(&unit_constant(1.0), 0.0, 1) - 2f64.ln()).abs() < 1e-14);
        assert!((k_p(&unit_constant(1.0), 1.0, 2) - (1.0f64 / 8.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn k_p_matches_direct_sum_for_p1() {
        let grid = uniform_grid(-1.0, 2.0, 31);
        let f: Vec<f64> = grid.iter().map(|s| 0.5 + s * s).collect();
        let g: Vec<f64> = grid.iter().map(|s| -0.3 + 0.1 * s).collect();
        let w = trapezoid_weights(&grid);
        let field = SpectralField::new(grid, f.clone(), g.clone(), w.clone()).unwrap();
        let direct: f64 = (0..f.len()).map(|i| w[i] * (f[i] * f[i] + g[i] * g[i])).sum();
        assert!((k_p(&field, 0.0, 1) - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn k_p_survives_large_p() {
        let field = SpectralField::constant(0.0, 1.0, 5, 50.0, -0.99).unwrap();
        let v = k_p(&field, 0.3, 512);
        assert!(v.is_finite());
    }

    #[test]
    fn lp_objective_trivial_schedule_unit_field() {
        let v = lp_objective(&unit_constant(1.0), &trivial_schedule(), 1, 64).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn lp_objective_rejects_zero_field() {
        let zero = SpectralField::constant(0.0, 1.0, 3, 0.0, 0.0).unwrap();
        assert!(matches!(lp_objective(&zero, &trivial_schedule(), 1, 8), Err(Error::TrivialTransport)));
        assert!(solve_lp(&zero, 1, 32).is_err());
    }

    #[test]
    fn lp_solution_on_constant_field_is_gaussian_schedule() {
        for r in [0.1, 2.0] {
            let field = SpectralField::constant(-1.0, 1.0, 9, r - 1.0, r - 1.0).unwrap();
            let exact = optimal_schedule(&SpectralBounds::new(r - 1.0, r - 1.0).unwrap());
            for p in [1, 3] {
                let sol = solve_lp(&field, p, 512).unwrap();
                assert!(sup_distance(&sol.schedule, &exact, 1000) < 1e-8);
                assert!(sol.residual_sup < 1e-6);
            }
        }
    }

    #[test]
    fn linf_numeric_matches_closed_form() {
        for (f, g) in [(1.0, -0.5), (0.5, -0.9), (1.0, 1.0), (-0.9, -0.9)] {
            let bd = SpectralBounds::new(f, g).unwrap();
            let num = solve_linf_numeric(&bd, 2048).unwrap();
            let d = sup_distance(&num, &optimal_schedule(&bd), 1000);
            assert!(d < 1e-8, "({f}, {g}): {d}");
        }
    }

    #[test]
    fn l2_distance_oracle() {
        let a = trivial_schedule();
        assert_eq!(l2_distance(&a, &a, 101), 0.0);
        let b = optimal_schedule(&SpectralBounds::new(1.0, 1.0).unwrap());
        // int_0^1 (2^t - 1 - t)^2 dt by Simpson on a fine grid
        let n = 20_001;
        let h = 1.0 / (n - 1) as f64;
        let simpson: f64 = (0..n)
            .map(|i| {
                let t = i as f64 * h;
                let d = 2f64.powf(t) - 1.0 - t;
                let c = if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                c * d * d
            })
            .sum::<f64>()
            * h
            / 3.0;
        let d = l2_distance(&a, &b, 4001);
        assert!((d - simpson.sqrt()).abs() < 1e-6);
        assert_eq!(d, l2_distance(&b, &a, 4001));
    }

    #[test]
    fn lp_solution_json() {
        let sol = solve_lp(&unit_constant(1.0), 2, 32).unwrap();
        let v: serde_json::Value = serde_json::from_str(&sol.to_json().unwrap()).unwrap();
        assert_eq!(v["kind"], "tabulated");
        assert_eq!(v["p"], 2);
        assert!(v["z_p"].as_f64().unwrap() > 0.0);
        assert!(v["t"].as_array().unwrap().len() == 32);
    }
}
