//! Optimal schedule for a 1D Gaussian-to-Gaussian map `T(x) = r x`.
//!
//! For a constant spectrum the optimal `tau` is a single exponential and the
//! trivial schedule loses by `max(r - 1, 1/r - 1) / |ln r|`.

use lipsched::lipschitz::{lambda_optimal_closed, lambda_trivial_closed};
use lipsched::{optimal_schedule, SpectralBounds};

fn main() -> lipsched::Result<()> {
    for r in [0.01, 0.1, 0.5, 2.0, 10.0, 100.0] {
        let bounds = SpectralBounds::new(r - 1.0, r - 1.0)?;
        let s = optimal_schedule(&bounds);
        let (triv, opt) = (lambda_trivial_closed(&bounds), lambda_optimal_closed(&bounds));
        println!(
            "r = {r:>6}: kind {:<9} tau(0.5) = {:.4}  trivial {triv:8.4}  optimal {opt:.4}  ratio {:.2}",
            s.kind().as_str(),
            s.eval(0.5)?,
            triv / opt
        );
    }
    Ok(())
}
