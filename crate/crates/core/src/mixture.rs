//! Univariate Gaussian mixtures: density, CDF and quantile by bisection.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature::bisect_increasing;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

/// `sum_k w_k N(mean_k, std_k^2)`. Reads and writes the JSON form
/// `{"components": [{"weight": .., "mean": .., "std": ..}, ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct GaussianMixture {
    components: Vec<Component>,
}

#[derive(Deserialize)]
struct RawMixture {
    components: Vec<Component>,
}

impl TryFrom<RawMixture> for GaussianMixture {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        GaussianMixture::new(raw.components)
    }
}

impl GaussianMixture {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::input("mixture needs at least one component"));
        }
        for c in &components {
            if !(c.weight > 0.0) || !(c.std > 0.0) || !c.mean.is_finite() || !c.std.is_finite() {
                return Err(Error::input(format!(
                    "mixture component needs positive weight and std, got {c:?}"
                )));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(GaussianMixture { components })
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        Self::new(vec![Component { weight: 1.0, mean, std }])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let z = (x - c.mean) / c.std;
                c.weight * INV_SQRT_2PI / c.std * (-0.5 * z * z).exp()
            })
            .sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * 0.5 * erfc(-(x - c.mean) / (c.std * std::f64::consts::SQRT_2)))
            .sum()
    }

    /// Bracket `[min_k q_k(u), max_k q_k(u)]` from the component quantiles.
    pub fn quantile_bracket(&self, u: f64) -> (f64, f64) {
        let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(u);
        self.components.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            let q = c.mean + c.std * z;
            (lo.min(q), hi.max(q))
        })
    }

    /// Quantile by bisection inside the component bracket.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Quantile(format!("level {u} outside (0, 1)")));
        }
        let (lo, hi) = self.quantile_bracket(u);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Quantile(format!("no finite bracket for level {u}")));
        }
        if lo == hi {
            return Ok(lo);
        }
        Ok(self.quantile_in(u, lo, hi))
    }

    /// Bisection for `F(y) = u` on a bracket known to contain the root.
    pub(crate) fn quantile_in(&self, u: f64, lo: f64, hi: f64) -> f64 {
        bisect_increasing(|y| self.cdf(y) - u, lo, hi, 1e-13)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bimodal() -> GaussianMixture {
        GaussianMixture::new(vec![
            Component { weight: 0.8, mean: -2.0, std: 0.02 },
            Component { weight: 0.2, mean: 2.0, std: 0.01 },
        ])
        .unwrap()
    }

    #[test]
    fn standard_normal_values() {
        let n = GaussianMixture::gaussian(0.0, 1.0).unwrap();
        assert!((n.cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((n.pdf(0.0) - INV_SQRT_2PI).abs() < 1e-16);
        assert!((n.quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let m = bimodal();
        for u in [1e-4, 0.1, 0.5, 0.79, 0.81, 0.95, 1.0 - 1e-4] {
            let q = m.quantile(u).unwrap();
            assert!((m.cdf(q) - u).abs() < 1e-11, "u = {u}");
        }
    }

    #[test]
    fn rejects_bad_mixtures() {
        let c = |w, s| Component { weight: w, mean: 0.0, std: s };
        assert!(GaussianMixture::new(vec![]).is_err());
        assert!(GaussianMixture::new(vec![c(0.5, 1.0)]).is_err());
        assert!(GaussianMixture::new(vec![c(1.0, 0.0)]).is_err());
        assert!(GaussianMixture::new(vec![c(1.2, 1.0), c(-0.2, 1.0)]).is_err());
        assert!(bimodal().quantile(1.0).is_err());
    }

    #[test]
    fn json_shape() {
        let m: GaussianMixture =
            serde_json::from_str(r#"{"components":[{"weight":0.8,"mean":-2,"std":0.02},{"weight":0.2,"mean":2,"std":0.01}]}"#)
                .unwrap();
        assert_eq!(m, bimodal());
        assert!(serde_json::from_str::<GaussianMixture>(r#"{"components":[{"weight":0.5,"mean":0,"std":1}]}"#).is_err());
    }
}
