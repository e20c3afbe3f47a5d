//! Random monotone time warps of the optimal schedule never lower the
//! uniform Lipschitz bound.

use lipsched::lipschitz::{lambda_of_schedule, lambda_optimal_closed};
use lipsched::schedule::random_warp_modes;
use lipsched::{optimal_schedule, SpectralBounds};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lipsched::Result<()> {
    let b = SpectralBounds::new(3.0, -0.7)?;
    let opt = optimal_schedule(&b);
    let best = lambda_optimal_closed(&b);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_margin = f64::INFINITY;
    for _ in 0..50 {
        let w = opt.warped(&random_warp_modes(&mut rng), 513)?;
        let margin = lambda_of_schedule(&b, &w, 2048) - best;
        worst_margin = worst_margin.min(margin);
    }
    println!("optimum {best:.5}; smallest excess over 50 warps {worst_margin:.3e}");
    Ok(())
}
