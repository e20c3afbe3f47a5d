//! Spectral data of a transport map's Jacobian.
//!
//! Every schedule formula depends on the map only through the per-point
//! deviations `f(s) = sigma_max(s) - 1` and `g(s) = sigma_min(s) - 1`, and
//! most closed forms only through their extremes `f* = sup f`, `g* = inf g`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::TransportMap1D;
use crate::quadrature::{trapezoid_weights, uniform_grid};

/// Deviations below this magnitude everywhere count as an isometry.
pub const ISOMETRY_TOL: f64 = 1e-14;

/// Extreme spectral deviations `f* = sigma*_max - 1` and `g* = sigma*_min - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds")]
pub struct SpectralBounds {
    f_star: f64,
    g_star: f64,
}

#[derive(Deserialize)]
struct RawBounds {
    f_star: f64,
    g_star: f64,
}

impl TryFrom<RawBounds> for SpectralBounds {
    type Error = Error;

    fn try_from(raw: RawBounds) -> Result<Self> {
        SpectralBounds::new(raw.f_star, raw.g_star)
    }
}

impl SpectralBounds {
    pub fn new(f_star: f64, g_star: f64) -> Result<Self> {
        if !f_star.is_finite() || !g_star.is_finite() {
            return Err(Error::InvalidSpectrum("bounds must be finite".into()));
        }
        if g_star <= -1.0 {
            return Err(Error::InvalidSpectrum(format!(
                "g_star = {g_star} must exceed -1 (Jacobian must be positive definite)"
            )));
        }
        if g_star > f_star {
            return Err(Error::InvalidSpectrum(format!(
                "g_star = {g_star} exceeds f_star = {f_star}"
            )));
        }
        if f_star.abs() < ISOMETRY_TOL && g_star.abs() < ISOMETRY_TOL {
            return Err(Error::TrivialTransport);
        }
        Ok(SpectralBounds { f_star, g_star })
    }

    /// Bounds from the extreme eigenvalues `sigma*_max`, `sigma*_min`.
    pub fn from_sigmas(sigma_max: f64, sigma_min: f64) -> Result<Self> {
        Self::new(sigma_max - 1.0, sigma_min - 1.0)
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn g_star(&self) -> f64 {
        self.g_star
    }

    pub fn sigma_max(&self) -> f64 {
        self.f_star + 1.0
    }

    pub fn sigma_min(&self) -> f64 {
        self.g_star + 1.0
    }

    /// The binding term of the reduced objective at interpolation parameter `u`:
    /// `max{ f*/(1 + u f*), -g*/(1 + u g*) }`.
    pub fn rate(&self, u: f64) -> f64 {
        let (f, g) = (self.f_star, self.g_star);
        (f / (1.0 + u * f)).max(-g / (1.0 + u * g))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Bounds implied by a strongly convex, smooth Brenier potential with
/// `alpha I <= Hess(phi) <= beta I`, taken as tight.
pub fn bounds_from_potential(alpha: f64, beta: f64) -> Result<SpectralBounds> {
    if !(alpha > 0.0) {
        return Err(Error::input(format!("alpha = {alpha} must be positive")));
    }
    if !(beta >= alpha) {
        return Err(Error::input(format!("beta = {beta} must be at least alpha = {alpha}")));
    }
    SpectralBounds::new(beta - 1.0, alpha - 1.0)
}

/// Per-point spectral deviations sampled on a discretized domain, with
/// quadrature weights summing to the domain's measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Vec<f64>,
    f_values: Vec<f64>,
    g_values: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRow {
    s: f64,
    f: f64,
    g: f64,
    weight: f64,
}

impl SpectralField {
    pub fn new(grid: Vec<f64>, f_values: Vec<f64>, g_values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if n == 0 {
            return Err(Error::InvalidSpectrum("empty field".into()));
        }
        if f_values.len() != n || g_values.len() != n || weights.len() != n {
            return Err(Error::InvalidSpectrum("column lengths differ".into()));
        }
        for i in 0..n {
            let (s, f, g, w) = (grid[i], f_values[i], g_values[i], weights[i]);
            if !(s.is_finite() && f.is_finite() && g.is_finite() && w.is_finite()) {
                return Err(Error::InvalidSpectrum(format!("non-finite entry at row {i}")));
            }
            if g <= -1.0 {
                return Err(Error::InvalidSpectrum(format!("g = {g} <= -1 at s = {s}")));
            }
            if f < g {
                return Err(Error::InvalidSpectrum(format!("f = {f} < g = {g} at s = {s}")));
            }
            if w <= 0.0 {
                return Err(Error::InvalidSpectrum(format!("non-positive weight at s = {s}")));
            }
        }
        Ok(SpectralField { grid, f_values, g_values, weights })
    }

    /// A field with constant deviations on `n` trapezoid nodes of `[a, b]`.
    pub fn constant(a: f64, b: f64, n: usize, f: f64, g: f64) -> Result<Self> {
        if !(b > a) || n < 2 {
            return Err(Error::input("constant field needs a < b and n >= 2"));
        }
        let grid = uniform_grid(a, b, n);
        let weights = trapezoid_weights(&grid);
        Self::new(grid, vec![f; n], vec![g; n], weights)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g_values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Lebesgue measure of the domain as seen by the quadrature.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "f", "g", "weight"])?;
        for i in 0..self.len() {
            w.write_record([
                crate::io::fmt_f64(self.grid[i]),
                crate::io::fmt_f64(self.f_values[i]),
                crate::io::fmt_f64(self.g_values[i]),
                crate::io::fmt_f64(self.weights[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ascii"))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["s", "f", "g", "weight"] {
            return Err(Error::InvalidSpectrum(format!(
                "expected header s,f,g,weight, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut s, mut f, mut g, mut w) = (vec![], vec![], vec![], vec![]);
        for row in r.deserialize() {
            let row: FieldRow = row?;
            s.push(row.s);
            f.push(row.f);
            g.push(row.g);
            w.push(row.weight);
        }
        Self::new(s, f, g, w)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// `f* = max f`, `g* = min g` over the sampled field.
pub fn bounds_from_field(field: &SpectralField) -> Result<SpectralBounds> {
    let f_star = field.f_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let g_star = field.g_values.iter().copied().fold(f64::INFINITY, f64::min);
    let isometry = field
        .f_values
        .iter()
        .chain(&field.g_values)
        .all(|v| v.abs() < ISOMETRY_TOL);
    if isometry {
        return Err(Error::TrivialTransport);
    }
    SpectralBounds::new(f_star, g_star)
}

/// Samples `T' - 1` of a scalar map on `n` uniform points of `omega`.
///
/// In one dimension both eigenvalue deviations coincide.
pub fn field_from_map1d(map: &TransportMap1D, omega: (f64, f64), n: usize) -> Result<SpectralField> {
    let (a, b) = omega;
    if n < 2 {
        return Err(Error::input("field needs at least two grid points"));
    }
    if !(b > a) {
        return Err(Error::input(format!("empty interval [{a}, {b}]")));
    }
    let (lo, hi) = map.domain();
    if a < lo || b > hi {
        return Err(Error::domain(format!(
            "interval [{a}, {b}] leaves the map's working domain [{lo}, {hi}]"
        )));
    }
    let grid = uniform_grid(a, b, n);
    let mut dev = Vec::with_capacity(n);
    for &s in &grid {
        let d = map.deriv(s)?;
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::MapNotAdmissible(format!("T'({s}) = {d}")));
        }
        dev.push(d - 1.0);
    }
    let weights = trapezoid_weights(&grid);
    SpectralField::new(grid, dev.clone(), dev, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(f: Vec<f64>, g: Vec<f64>) -> Result<SpectralField> {
        let n = f.len();
        let grid = uniform_grid(0.0, 1.0, n.max(2))[..n].to_vec();
        SpectralField::new(grid, f, g, vec![1.0 / n as f64; n])
    }

    #[test]
    fn bounds_are_extremes_of_field() {
        let fl = field(vec![0.0, 0.5, 1.0], vec![-0.5, -0.2, 0.0]).unwrap();
        let b = bounds_from_field(&fl).unwrap();
        assert_eq!((b.f_star(), b.g_star()), (1.0, -0.5));
    }

    #[test]
    fn gaussian_field_bounds() {
        let r = 0.1;
        let fl = SpectralField::constant(-3.0, 3.0, 7, r - 1.0, r - 1.0).unwrap();
        let b = bounds_from_field(&fl).unwrap();
        assert_eq!((b.f_star(), b.g_star()), (r - 1.0, r - 1.0));
    }

    #[test]
    fn zero_field_is_trivial_transport() {
        let fl = field(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(bounds_from_field(&fl), Err(Error::TrivialTransport)));
    }

    #[test]
    fn field_rejects_non_positive_jacobian() {
        assert!(matches!(field(vec![0.0], vec![-1.0]), Err(Error::InvalidSpectrum(_))));
        assert!(matches!(field(vec![-0.5], vec![0.0]), Err(Error::InvalidSpectrum(_))));
    }

    #[test]
    fn potential_bounds() {
        let b = bounds_from_potential(0.5, 2.0).unwrap();
        assert_eq!((b.f_star(), b.g_star()), (1.0, -0.5));
        let b = bounds_from_potential(0.1, 10.0).unwrap();
        assert!((b.f_star() - 9.0).abs() < 1e-15 && (b.g_star() + 0.9).abs() < 1e-15);
        assert!(matches!(bounds_from_potential(1.0, 1.0), Err(Error::TrivialTransport)));
        assert!(matches!(bounds_from_potential(0.0, 1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(bounds_from_potential(2.0, 1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn bounds_validation() {
        assert!(SpectralBounds::new(1.0, -1.0).is_err());
        assert!(SpectralBounds::new(-0.5, 0.5).is_err());
        assert!(SpectralBounds::new(f64::NAN, 0.0).is_err());
        assert!(SpectralBounds::new(1e-6, 1e-6).is_ok());
    }

    #[test]
    fn bounds_json_shape() {
        let b = SpectralBounds::new(1.0, -0.5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&b.to_json().unwrap()).unwrap();
        assert_eq!(v["f_star"], 1.0);
        assert_eq!(v["g_star"], -0.5);
        assert_eq!(SpectralBounds::from_json(&b.to_json().unwrap()).unwrap(), b);
        assert!(SpectralBounds::from_json(r#"{"f_star":0,"g_star":0}"#).is_err());
    }

    #[test]
    fn field_csv_round_trip() {
        let fl = field(vec![0.0, 0.5, 1.0], vec![-0.5, -0.2, 0.0]).unwrap();
        let csv = fl.to_csv_string().unwrap();
        assert!(csv.starts_with("s,f,g,weight\n"));
        let back = SpectralField::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(back, fl);
        assert!(SpectralField::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn bounds_invariant_under_permutation(
            vals in prop::collection::vec((-0.9f64..3.0, 0.0f64..1.0), 2..40),
            seed in any::<u64>(),
        ) {
            let f: Vec<f64> = vals.iter().map(|(g, d)| g + d).collect();
            let g: Vec<f64> = vals.iter().map(|(g, _)| *g).collect();
            let a = field(f.clone(), g.clone()).unwrap();
            let mut idx: Vec<usize> = (0..f.len()).collect();
            let k = (seed as usize) % idx.len();
            idx.rotate_left(k);
            idx.reverse();
            let b = field(idx.iter().map(|&i| f[i]).collect(), idx.iter().map(|&i| g[i]).collect()).unwrap();
            let (ba, bb) = (bounds_from_field(&a), bounds_from_field(&b));
            if let (Ok(ba), Ok(bb)) = (ba, bb) {
                prop_assert_eq!(ba, bb);
                prop_assert!(f.iter().all(|&v| v <= ba.f_star()));
                prop_assert!(g.iter().all(|&v| v >= ba.g_star()));
            }
        }
    }
}
