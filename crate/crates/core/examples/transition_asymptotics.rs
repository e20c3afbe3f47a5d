//! Where the optimal schedule switches branches when the map both expands
//! and contracts, and how the gain grows as the conditioning worsens.

use lipsched::lipschitz::{lambda_optimal_closed, lambda_trivial_closed};
use lipsched::{optimal_schedule, transition_time, SpectralBounds};

fn main() -> lipsched::Result<()> {
    println!("{:>8} {:>8} {:>8} {:>8} {:>10} {:>8}", "f*", "g*", "t0", "tau0", "trivial", "optimal");
    for k in 1..=6 {
        let f = 10f64.powi(k - 2);
        let g = -1.0 + 10f64.powi(-k);
        let b = SpectralBounds::new(f, g)?;
        let Some(tr) = transition_time(&b) else {
            println!("{f:>8.2} {g:>8.5}  no transition");
            continue;
        };
        println!(
            "{f:>8.2} {g:>8.5} {:>8.4} {:>8.4} {:>10.2} {:>8.3}",
            tr.t0,
            tr.tau0,
            lambda_trivial_closed(&b),
            lambda_optimal_closed(&b)
        );
        // both branches meet at the transition
        let s = optimal_schedule(&b);
        assert!((s.eval(tr.t0)? - tr.tau0).abs() < 1e-9);
    }
    Ok(())
}
