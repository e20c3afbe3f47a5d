use lipsched::flow::{exact_flow, exact_position, gaussian_map, gmm_map, velocity, TransportMap1D};
use lipsched::lipschitz::{
    lambda_of_schedule, lambda_optimal_closed, lambda_trivial_closed, report, Spectrum,
};
use lipsched::mixture::{Component, GaussianMixture};
use lipsched::quadrature::{trapezoid_weights, uniform_grid};
use lipsched::schedule::{optimal_schedule, random_warp_modes, trivial_schedule, Schedule};
use lipsched::spectral::{bounds_from_field, bounds_from_potential, field_from_map1d, SpectralBounds, SpectralField};
use lipsched::variational::{k_p, lp_objective, solve_lp, sup_distance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn any_bounds() -> impl Strategy<Value = SpectralBounds> {
    (-3.0f64..3.0, -3.0f64..-0.01)
        .prop_filter_map("ordered, non-trivial", |(lf, lg)| {
            let smax = 10f64.powf(lf);
            let smin = 10f64.powf(lg).max(1e-3);
            let (hi, lo) = if smax >= smin { (smax, smin) } else { (smin, smax) };
            SpectralBounds::from_sigmas(hi, lo).ok()
        })
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 }).collect()
}

fn bimodal() -> TransportMap1D {
    let target = GaussianMixture::new(vec![
        Component { weight: 0.8, mean: -2.0, std: 0.02 },
        Component { weight: 0.2, mean: 2.0, std: 0.01 },
    ])
    .unwrap();
    gmm_map(GaussianMixture::gaussian(0.0, 1.0).unwrap(), target, 1e-4, 4096).unwrap()
}

/// A smooth non-constant field on `[0, 1]`.
fn wavy_field(n: usize) -> SpectralField {
    let s = uniform_grid(0.0, 1.0, n);
    let f: Vec<f64> = s.iter().map(|x| 1.0 + (3.0 * x).sin()).collect();
    let g: Vec<f64> = s.iter().map(|x| -0.6 + 0.3 * x * x).collect();
    let w = trapezoid_weights(&s);
    SpectralField::new(s, f, g, w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedules_are_admissible(b in any_bounds()) {
        let s = optimal_schedule(&b);
        prop_assert!(s.eval(0.0).unwrap().abs() <= 1e-12);
        prop_assert!((s.eval(1.0).unwrap() - 1.0).abs() <= 1e-12);
        let values: Vec<f64> = grid(10_000).into_iter().map(|t| s.eval(t).unwrap()).collect();
        prop_assert!(values.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(grid(1000).into_iter().all(|t| s.eval_deriv(t).unwrap() >= -1e-12));
    }

    #[test]
    fn lipschitz_term_is_constant_along_optimal_schedule(b in any_bounds()) {
        let s = optimal_schedule(&b);
        let vals: Vec<f64> = grid(2001).into_iter().map(|t| s.eval_deriv(t).unwrap() * b.rate(s.eval(t).unwrap())).collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        prop_assert!((hi - lo) / lo < 1e-8);
        prop_assert!((hi - lambda_optimal_closed(&b)).abs() / hi < 1e-8);
    }

    #[test]
    fn inverse_round_trip(b in any_bounds(), tau in 0.0f64..=1.0) {
        let s = optimal_schedule(&b);
        let t = s.inverse(tau).unwrap();
        prop_assert!((s.eval(t).unwrap() - tau).abs() <= 1e-10);
    }

    #[test]
    fn derivatives_match_finite_differences(b in any_bounds(), t in 1e-3f64..0.999) {
        let s = optimal_schedule(&b);
        if let Some(t0) = s.breakpoint() {
            prop_assume!((t - t0).abs() > 1e-5);
        }
        let h = 1e-6;
        let fd1 = (s.eval(t + h).unwrap() - s.eval(t - h).unwrap()) / (2.0 * h);
        let fd2 = (s.eval_deriv(t + h).unwrap() - s.eval_deriv(t - h).unwrap()) / (2.0 * h);
        let scale = 1.0f64.max(s.eval_deriv(t).unwrap().abs()).max(s.eval_second_deriv(t).unwrap().abs());
        prop_assert!((fd1 - s.eval_deriv(t).unwrap()).abs() <= 1e-6 * scale);
        prop_assert!((fd2 - s.eval_second_deriv(t).unwrap()).abs() <= 1e-6 * scale);
    }

    #[test]
    fn optimal_never_worse_than_trivial(b in any_bounds()) {
        let rep = report(Spectrum::Bounds(&b), None, 256).unwrap();
        prop_assert!(rep.lambda_optimal <= rep.lambda_trivial + 1e-9);
        prop_assert!(rep.ratio >= 1.0 - 1e-9);
    }

    #[test]
    fn closed_forms_match_grid_sup(b in any_bounds()) {
        let triv = lambda_of_schedule(&b, &trivial_schedule(), 4096);
        prop_assert!((triv - lambda_trivial_closed(&b)).abs() <= 1e-8 * triv.max(1.0));
        let opt = lambda_of_schedule(&b, &optimal_schedule(&b), 4096);
        prop_assert!((opt - lambda_optimal_closed(&b)).abs() <= 1e-6);
    }

    #[test]
    fn exact_trajectories_do_not_cross(x in -2.9f64..2.9, gap in 1e-3f64..1.0, theta2 in 0.05f64..5.0) {
        let map = gaussian_map(0.3, 1.0, -1.0, theta2).unwrap();
        let s = optimal_schedule(&SpectralBounds::new(theta2 - 1.0, theta2 - 1.0).unwrap());
        let times = grid(101);
        let a = exact_flow(&map, &s, x, &times).unwrap();
        let b = exact_flow(&map, &s, x + gap, &times).unwrap();
        prop_assert!(a.positions.iter().zip(&b.positions).all(|(p, q)| p < q));
        prop_assert_eq!(a.endpoint(), map.eval(x).unwrap());
    }
}

#[test]
fn near_isometry_is_nearly_trivial() {
    let s = optimal_schedule(&SpectralBounds::new(1e-6, 1e-6).unwrap());
    let dev = grid(10_001).into_iter().map(|t| (s.eval(t).unwrap() - t).abs()).fold(0.0, f64::max);
    assert!(dev <= 1e-5, "{dev}");
}

#[test]
fn potential_bounds_equal_constant_field() {
    let b = bounds_from_potential(0.5, 2.0).unwrap();
    let field = SpectralField::constant(0.0, 1.0, 33, 1.0, -0.5).unwrap();
    let fb = bounds_from_field(&field).unwrap();
    assert!(sup_distance(&optimal_schedule(&b), &optimal_schedule(&fb), 1000) <= 1e-10);
    let s = optimal_schedule(&b);
    let direct = lambda_of_schedule(&b, &s, 4096);
    let via_field = lipsched::lipschitz::lambda_of_schedule_field(&field, &s, 4096);
    assert!((direct - via_field).abs() <= 1e-10);
}

#[test]
fn affine_map_field_is_constant() {
    let field = field_from_map1d(&gaussian_map(0.0, 1.0, 0.0, 0.1).unwrap(), (-3.0, 3.0), 5).unwrap();
    let (lo, hi) = field.f_values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi - lo < 1e-12);
    assert!((lo + 0.9).abs() < 1e-12);
}

#[test]
fn bimodal_field_changes_sign() {
    let map = bimodal();
    let field = field_from_map1d(&map, map.domain(), 2049).unwrap();
    let b = bounds_from_field(&field).unwrap();
    assert!(b.g_star() < 0.0 && b.f_star() > 0.0);
    // brute-force scan of T' on an independent grid
    let (lo, hi) = map.domain();
    let d: Vec<f64> = uniform_grid(lo, hi, 3001).into_iter().map(|x| map.deriv(x).unwrap()).collect();
    assert!(d.iter().any(|&v| v > 1.0) && d.iter().any(|&v| v < 1.0));
    let report = report(Spectrum::Field(&field), Some(&trivial_schedule()), 1024).unwrap();
    assert!(report.lambda_of_input.unwrap() >= 2.0, "at least half the mode separation");
}

#[test]
fn pushforward_identity() {
    let map = bimodal();
    let TransportMap1D::CdfComposed(m) = &map else { panic!("expected a cdf map") };
    let (lo, hi) = map.domain();
    for x in uniform_grid(lo, hi, 1000) {
        let err = (m.target().cdf(map.eval(x).unwrap()) - m.source().cdf(x)).abs();
        assert!(err <= 1e-10, "x = {x}: {err}");
    }
}

#[test]
fn velocity_matches_time_derivative_of_flow() {
    let bimodal = bimodal();
    let affine = gaussian_map(0.0, 1.0, 0.0, 0.1).unwrap();
    for (map, b) in [
        (&affine, SpectralBounds::new(-0.9, -0.9).unwrap()),
        (&bimodal, SpectralBounds::new(2.14, -0.989).unwrap()),
    ] {
        for s in [trivial_schedule(), optimal_schedule(&b)] {
            for x0 in [-2.5, -1.0, 0.3, 1.7, 2.6] {
                for t in [0.05, 0.3, 0.5, 0.77, 0.95] {
                    let h = 1e-6;
                    let fd = (exact_position(map, &s, x0, t + h).unwrap() - exact_position(map, &s, x0, t - h).unwrap())
                        / (2.0 * h);
                    let v = velocity(map, &s, exact_position(map, &s, x0, t).unwrap(), t).unwrap();
                    assert!((fd - v).abs() <= 1e-5, "x0 {x0} t {t}: {fd} vs {v}");
                }
            }
        }
    }
}

#[test]
fn random_time_warps_never_beat_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for b in [(1.0, -0.5), (0.5, -0.9), (9.0, 9.0), (-0.9, -0.9), (99.0, -0.99)] {
        let b = SpectralBounds::new(b.0, b.1).unwrap();
        let opt = optimal_schedule(&b);
        let floor = lambda_optimal_closed(&b);
        for _ in 0..100 {
            let w = opt.warped(&random_warp_modes(&mut rng), 1025).unwrap();
            assert!(lambda_of_schedule(&b, &w, 4096) >= floor - 1e-8);
        }
    }
}

#[test]
fn scaling_law_for_ill_conditioned_maps() {
    for smax in [1e2, 1e3, 1e4] {
        let b = SpectralBounds::from_sigmas(smax, 1.0 / smax).unwrap();
        let ratio = lambda_optimal_closed(&b) / (2.0 * smax.ln());
        assert!((0.5..=2.0).contains(&ratio), "{smax}: {ratio}");
    }
}

#[test]
fn lp_solutions_satisfy_their_ode_and_z_identity() {
    let field = wavy_field(257);
    for p in [1, 2, 4, 16] {
        let sol = solve_lp(&field, p, 1024).unwrap();
        assert!(sol.residual_sup <= 1e-5, "p {p}: {}", sol.residual_sup);
        assert!((sol.z_p - sol.z_time_side(&field, 2048)).abs() <= 1e-6);
        assert_eq!(sol.schedule.eval(0.0).unwrap(), 0.0);
        assert_eq!(sol.schedule.eval(1.0).unwrap(), 1.0);
    }
}

#[test]
fn lp_solutions_are_minimal_among_candidates() {
    let field = wavy_field(129);
    let b = bounds_from_field(&field).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in [1, 2, 4] {
        let sol = solve_lp(&field, p, 1024).unwrap().schedule;
        let best = lp_objective(&field, &sol, p, 2048).unwrap();
        let mut rivals: Vec<Schedule> = vec![trivial_schedule(), optimal_schedule(&b)];
        for _ in 0..20 {
            rivals.push(sol.warped(&random_warp_modes(&mut rng), 1025).unwrap());
        }
        for r in &rivals {
            assert!(best <= lp_objective(&field, r, p, 2048).unwrap() + 1e-12);
        }
    }
    let constant = SpectralField::constant(0.0, 1.0, 9, 1.0, 1.0).unwrap();
    let sol = solve_lp(&constant, 1, 512).unwrap().schedule;
    let best = lp_objective(&constant, &sol, 1, 2048).unwrap();
    assert!(best <= lp_objective(&constant, &trivial_schedule(), 1, 2048).unwrap());
    let closed = optimal_schedule(&SpectralBounds::new(1.0, 1.0).unwrap());
    assert!(best <= lp_objective(&constant, &closed, 1, 2048).unwrap() + 1e-8);
}

#[test]
fn lp_objective_approaches_the_sup_objective() {
    let wavy = wavy_field(513);
    let constant = SpectralField::constant(0.0, 1.0, 9, 1.0, -0.5).unwrap();
    let wavy_opt = optimal_schedule(&bounds_from_field(&wavy).unwrap());
    let const_opt = optimal_schedule(&bounds_from_field(&constant).unwrap());
    for (field, s) in [(&wavy, &wavy_opt), (&constant, &trivial_schedule()), (&constant, &const_opt)] {
        let sup = lipsched::lipschitz::lambda_of_schedule_field(field, s, 4096);
        let lp = lp_objective(field, s, 128, 4096).unwrap();
        assert!((lp - sup).abs() / sup <= 0.02, "{lp} vs {sup}");
    }
    // a peak that is sharp in both s and t converges more slowly, but from below and monotonically
    let sup = lipsched::lipschitz::lambda_of_schedule_field(&wavy, &trivial_schedule(), 4096);
    let gaps: Vec<f64> = [32, 64, 128, 256, 512]
        .iter()
        .map(|&p| sup - lp_objective(&wavy, &trivial_schedule(), p, 4096).unwrap())
        .collect();
    assert!(gaps.iter().all(|&g| g > 0.0));
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert!(gaps[4] / sup < 0.02);
    assert!(k_p(&wavy, 0.5, 512).is_finite());
}
