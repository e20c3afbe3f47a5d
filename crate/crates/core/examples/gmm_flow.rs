//! Transport from N(0, 1) to a sharply bimodal mixture: spectral field,
//! optimal schedule and a few exact trajectories.

use lipsched::flow::{exact_flow, gmm_map};
use lipsched::spectral::{bounds_from_field, field_from_map1d};
use lipsched::{optimal_schedule, transition_time, Component, GaussianMixture};

fn main() -> lipsched::Result<()> {
    let target = GaussianMixture::new(vec![
        Component { weight: 0.8, mean: -2.0, std: 0.02 },
        Component { weight: 0.2, mean: 2.0, std: 0.01 },
    ])?;
    let map = gmm_map(GaussianMixture::gaussian(0.0, 1.0)?, target, 1e-4, 4096)?;
    let field = field_from_map1d(&map, map.domain(), 2049)?;
    let bounds = bounds_from_field(&field)?;
    println!("domain {:?}  f* = {:.4}  g* = {:.5}", map.domain(), bounds.f_star(), bounds.g_star());
    if let Some(tr) = transition_time(&bounds) {
        println!("transition at t0 = {:.4}, tau0 = {:.4}", tr.t0, tr.tau0);
    }

    let s = optimal_schedule(&bounds);
    let times: Vec<f64> = (0..=4).map(|k| k as f64 / 4.0).collect();
    for x0 in [-2.0, -0.5, 0.5, 1.0, 2.0] {
        let tr = exact_flow(&map, &s, x0, &times)?;
        let xs: Vec<String> = tr.positions.iter().map(|x| format!("{x:7.3}")).collect();
        println!("x0 = {x0:5.2}: {}", xs.join(" "));
    }
    Ok(())
}
