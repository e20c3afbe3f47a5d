//! Grids, quadrature rules and overflow-safe reductions shared by the solvers.

/// `n` equally spaced points covering `[a, b]`, endpoints included.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "uniform grid needs at least two points");
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
        .collect()
}

/// Composite trapezoid weights for an ordered (not necessarily uniform) grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// Chebyshev-Lobatto nodes mapped onto `[0, 1]`; they cluster near both ends.
pub fn chebyshev_unit_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => 0.0,
            i if i == n - 1 => 1.0,
            // sin^2 form avoids cancellation of 1 - cos near zero
            _ => {
                let s = (std::f64::consts::FRAC_PI_2 * i as f64 / m).sin();
                s * s
            }
        })
        .collect()
}

/// Five-point Gauss-Legendre rule on `[-1, 1]` as (node, weight) pairs.
pub const GAUSS_LEGENDRE_5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
];

/// Integrates `f` over `[a, b]` with the five-point Gauss rule.
pub fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    GAUSS_LEGENDRE_5
        .iter()
        .map(|&(x, w)| w * f(c + r * x))
        .sum::<f64>()
        * r
}

/// `ln(sum_i w_i exp(a_i))` with a max shift. Terms with `w_i == 0` or
/// `a_i == -inf` drop out; an empty effective sum returns `-inf`.
pub fn log_weighted_sum_exp(log_terms: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(log_terms.len(), weights.len());
    let shift = log_terms
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&a, _)| a)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if shift == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = log_terms
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&a, &w)| w * (a - shift).exp())
        .sum();
    shift + s.ln()
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for the root of an increasing function on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` or cannot shrink further
/// in floating point. Assumes `f(lo) <= 0 <= f(hi)`.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
