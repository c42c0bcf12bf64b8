use rayon::prelude::*;
use serde::Serialize;

use super::spectrum::PopulationSpectrum;
use super::stieltjes::StieltjesSolver;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub mass_at_zero: f64,
}

impl DensityCurve {
    /// Trapezoid integral of the sampled density.
    pub fn trapezoid(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,rho\n");
        for (x, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{x:.12e},{v:.12e}\n"));
        }
        out
    }
}

pub fn density(spec: &PopulationSpectrum, x: f64) -> Result<f64> {
    StieltjesSolver::new(spec).density(x)
}

pub fn density_grid(
    spec: &PopulationSpectrum,
    x_min: f64,
    x_max: f64,
    n_points: usize,
) -> Result<DensityCurve> {
    if !(x_min > 0.0 && x_max > x_min && x_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "density grid needs 0 < x_min < x_max, got [{x_min}, {x_max}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidArgument("density grid needs at least two points".into()));
    }
    let h = (x_max - x_min) / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| if i + 1 == n_points { x_max } else { x_min + h * i as f64 })
        .collect();
    let solver = StieltjesSolver::new(spec);
    let values = grid
        .par_iter()
        .map(|&x| solver.density(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve {
        grid,
        values,
        mass_at_zero: (1.0 - spec.gamma()).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mp() -> PopulationSpectrum {
        PopulationSpectrum::dirac(1.0, 1.0).unwrap()
    }

    fn mp_density(x: f64) -> f64 {
        ((4.0 - x) / x).sqrt() / (2.0 * PI)
    }

    /// Distribution function of the gamma = 1 law on [0, 4].
    fn mp_cdf(x: f64) -> f64 {
        (4.0 * (x.sqrt() / 2.0).asin() + (x * (4.0 - x)).sqrt()) / (2.0 * PI)
    }

    #[test]
    fn pointwise_values() {
        assert!((density(&mp(), 1.0).unwrap() - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-10);
        assert_eq!(density(&mp(), 5.0).unwrap(), 0.0);
        assert!(density(&mp(), 0.0).is_err());
    }

    #[test]
    fn matches_closed_form_on_a_grid() {
        let c = density_grid(&mp(), 0.1, 3.9, 381).unwrap();
        let err = c
            .grid
            .iter()
            .zip(&c.values)
            .map(|(x, v)| (v - mp_density(*x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "sup error {err}");
    }

    #[test]
    fn grid_mass_matches_distribution_function() {
        let c = density_grid(&mp(), 0.01, 3.99, 400).unwrap();
        let exact = mp_cdf(3.99) - mp_cdf(0.01);
        assert!((c.trapezoid() - exact).abs() < 2e-3);
        assert!((exact - 0.936).abs() < 1e-3);
        assert_eq!(c.mass_at_zero, 0.0);
    }

    #[test]
    fn two_point_grid() {
        let c = density_grid(&mp(), 1.0, 2.0, 2).unwrap();
        assert_eq!(c.grid, vec![1.0, 2.0]);
        assert!(c.to_csv().starts_with("x,rho\n"));
    }

    #[test]
    fn mass_at_zero_for_small_gamma() {
        let s = PopulationSpectrum::dirac(0.25, 1.0).unwrap();
        let c = density_grid(&s, 0.2, 2.3, 4001).unwrap();
        assert_eq!(c.mass_at_zero, 0.75);
        assert!((c.mass_at_zero + c.trapezoid() - 1.0).abs() < 1e-3);
    }
}
