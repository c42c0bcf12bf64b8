//! The inverse Stieltjes transform g and its derivatives.

use num_complex::Complex64;

use super::spectrum::PopulationSpectrum;
use crate::error::{Error, Result};

/// Distance to a pole below which evaluation is refused.
pub const POLE_TOL: f64 = 1e-13;

/// Flat copy of the quantities g depends on, for tight loops.
#[derive(Debug, Clone)]
pub struct InverseMap {
    pub gamma: f64,
    pub lambdas: Vec<f64>,
    pub weights: Vec<f64>,
}

const FACT: [f64; 7] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

impl InverseMap {
    pub fn new(spec: &PopulationSpectrum) -> Self {
        Self {
            gamma: spec.gamma(),
            lambdas: spec.lambdas(),
            weights: spec.weights(),
        }
    }

    pub fn pole_distance(&self, m: Complex64) -> f64 {
        self.lambdas
            .iter()
            .map(|l| (m - 1.0 / l).norm())
            .fold(m.norm(), f64::min)
    }

    pub fn check_pole(&self, m: Complex64) -> Result<()> {
        let d = self.pole_distance(m);
        if d < POLE_TOL {
            Err(Error::PoleProximity { m: m.re, distance: d })
        } else {
            Ok(())
        }
    }

    /// k-th derivative of g at real m, k <= 6.
    pub fn real(&self, m: f64, k: usize) -> f64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut s = 0.0;
        for (l, w) in self.lambdas.iter().zip(&self.weights) {
            let r = l / (1.0 - m * l);
            s += w * r.powi(k as i32 + 1);
        }
        FACT[k] * (sign / m.powi(k as i32 + 1) + self.gamma * s)
    }

    /// k-th derivative of g at complex m, k <= 6.
    pub fn complex(&self, m: Complex64, k: usize) -> Complex64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut s = Complex64::new(0.0, 0.0);
        for (l, w) in self.lambdas.iter().zip(&self.weights) {
            let r = *l / (1.0 - m * l);
            s += w * r.powi(k as i32 + 1);
        }
        FACT[k] * (sign / m.powi(k as i32 + 1) + self.gamma * s)
    }

    /// Sum of the absolute values of the terms making up g^{(k)}(m); the natural
    /// scale against which a computed g^{(k)} is judged to be zero.
    pub fn real_scale(&self, m: f64, k: usize) -> f64 {
        let mut s = 1.0 / m.abs().powi(k as i32 + 1);
        for (l, w) in self.lambdas.iter().zip(&self.weights) {
            s += self.gamma * w * (l / (1.0 - m * l)).abs().powi(k as i32 + 1);
        }
        FACT[k] * s
    }

    /// The fixed-point defect |m - (z - gamma * sum w lambda/(1 - m lambda))^{-1}|.
    pub fn defect(&self, z: Complex64, m: Complex64) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (l, w) in self.lambdas.iter().zip(&self.weights) {
            s += w * *l / (1.0 - m * l);
        }
        (m - 1.0 / (z - self.gamma * s)).norm()
    }
}

/// g^{(order)}(m) for the limiting (or, with `finite_n_mode`, the finite-size) spectrum.
pub fn g_eval(
    spec: &PopulationSpectrum,
    m: Complex64,
    order: usize,
    finite_n_mode: bool,
) -> Result<Complex64> {
    if order > 5 {
        return Err(Error::InvalidArgument(format!("derivative order {order} exceeds 5")));
    }
    let eff = spec.effective(finite_n_mode)?;
    let g = InverseMap::new(&eff);
    g.check_pole(m)?;
    Ok(g.complex(m, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp() -> PopulationSpectrum {
        PopulationSpectrum::dirac(1.0, 1.0).unwrap()
    }

    #[test]
    fn marchenko_pastur_values() {
        let v = g_eval(&mp(), Complex64::new(-1.0, 0.0), 0, false).unwrap();
        assert!((v.re + 0.5).abs() < 1e-15 && v.im == 0.0);
        let d = g_eval(&mp(), Complex64::new(0.5, 0.0), 1, false).unwrap();
        assert!(d.norm() < 1e-14);
    }

    #[test]
    fn refuses_poles() {
        assert!(matches!(
            g_eval(&mp(), Complex64::new(1.0, 0.0), 0, false),
            Err(Error::PoleProximity { .. })
        ));
        assert!(g_eval(&mp(), Complex64::new(0.0, 0.0), 2, false).is_err());
        assert!(g_eval(&mp(), Complex64::new(0.3, 0.0), 6, false).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = PopulationSpectrum::from_pairs(0.336, &[1.0, 3.0], &[0.7, 0.3]).unwrap();
        let g = InverseMap::new(&s);
        let h = 1e-5;
        for &m in &[-0.7, 0.2, 0.6, 1.7] {
            for k in 0..5 {
                let fd = (g.real(m + h, k) - g.real(m - h, k)) / (2.0 * h);
                let exact = g.real(m, k + 1);
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "m={m} k={k}");
                let c = g.complex(Complex64::new(m, 0.0), k + 1);
                assert!((c.re - exact).abs() < 1e-12 * (1.0 + exact.abs()));
            }
        }
    }

    #[test]
    fn inverse_map_has_asymptotes_at_the_poles() {
        let s = PopulationSpectrum::from_pairs(0.336, &[1.0, 3.0], &[0.7, 0.3]).unwrap();
        let g = InverseMap::new(&s);
        for &p in &[1.0 / 3.0, 1.0] {
            assert!(g.real(p - 1e-9, 0).abs() > 1e7);
            assert!(g.real(p + 1e-9, 0).abs() > 1e7);
            assert!(g.real(p - 1e-9, 0).signum() != g.real(p + 1e-9, 0).signum());
        }
    }
}
