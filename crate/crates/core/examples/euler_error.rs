//! Forward Euler on the scheduled flow against the exact interpolation,
//! with the a priori global error bound.

use lipsched::flow::{error_bound, euler_flow, exact_position, gaussian_map};
use lipsched::{optimal_schedule, trivial_schedule, SpectralBounds};

fn main() -> lipsched::Result<()> {
    let map = gaussian_map(0.0, 1.0, 1.0, 0.1)?;
    let bounds = SpectralBounds::new(-0.9, -0.9)?;
    let omega = (-3.0, 3.0);
    let starts: Vec<f64> = (0..21).map(|i| -3.0 + 6.0 * (i as f64 + 0.5) / 21.0).collect();

    for (name, s) in [("trivial", trivial_schedule()), ("optimal", optimal_schedule(&bounds))] {
        for n in [16, 32, 64, 128] {
            let mut err = 0.0f64;
            for &x0 in &starts {
                let y = euler_flow(&map, &s, x0, n)?.endpoint();
                err = err.max((y - exact_position(&map, &s, x0, 1.0)?).abs());
            }
            let b = error_bound(&bounds, &map, &s, 1.0 / n as f64, omega)?;
            println!("{name} n = {n:>3}: error {err:.3e}  bound {:.3e}  (lambda {:.3})", b.bound, b.lambda);
        }
    }
    Ok(())
}
