//! Time profile of the velocity's Lipschitz constant under both schedules.

use lipsched::lipschitz::{lipschitz_curve, report, Spectrum};
use lipsched::schedule::trivial_schedule;
use lipsched::{optimal_schedule, SpectralBounds};

fn main() -> lipsched::Result<()> {
    let b = SpectralBounds::new(2.0, -0.9)?;
    let opt = optimal_schedule(&b);
    let rep = report(Spectrum::Bounds(&b), Some(&opt), 2048)?;
    println!("trivial {:.4}  optimal {:.4}  ratio {:.2}", rep.lambda_trivial, rep.lambda_optimal, rep.ratio);

    let triv = lipschitz_curve(Spectrum::Bounds(&b), &trivial_schedule(), 11);
    let flat = lipschitz_curve(Spectrum::Bounds(&b), &opt, 11);
    for ((t, a), (_, c)) in triv.iter().zip(&flat) {
        println!("t = {t:.1}  trivial {a:8.4}  optimal {c:.4}");
    }
    Ok(())
}
