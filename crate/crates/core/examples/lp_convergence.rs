//! The `p`-relaxed schedules approach the closed-form optimum as `p` grows.

use lipsched::variational::{l2_distance, lp_objective, solve_lp, sup_distance};
use lipsched::{optimal_schedule, SpectralField};
use lipsched::spectral::bounds_from_field;

fn main() -> lipsched::Result<()> {
    // a field whose extremes sit at different points of the domain
    let n = 257;
    let s: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let f: Vec<f64> = s.iter().map(|x| 2.0 * (-(x - 0.3f64).powi(2) * 40.0).exp()).collect();
    let g: Vec<f64> = s.iter().map(|x| -0.8 * (-(x - 0.7f64).powi(2) * 40.0).exp()).collect();
    let w = lipsched::quadrature::trapezoid_weights(&s);
    let field = SpectralField::new(s, f, g, w)?;
    let opt = optimal_schedule(&bounds_from_field(&field)?);

    println!("{:>4} {:>10} {:>10} {:>10} {:>10}", "p", "l2", "sup", "Z_p", "J_p");
    for p in [1, 2, 4, 8, 16, 32, 64] {
        let sol = solve_lp(&field, p, 512)?;
        println!(
            "{p:>4} {:>10.3e} {:>10.3e} {:>10.5} {:>10.5}",
            l2_distance(&sol.schedule, &opt, 2001),
            sup_distance(&sol.schedule, &opt, 2001),
            sol.z_p,
            lp_objective(&field, &sol.schedule, p, 1024)?
        );
    }
    Ok(())
}
