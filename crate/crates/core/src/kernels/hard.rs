//! Exact finite-size kernel near the hard edge, scaled by N^2 sigma_N.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::KernelEvaluator;
use crate::error::{Error, Result};
use crate::quadrature::circle;
use crate::spectral_model::PopulationSpectrum;

/// Population eigenvalues, dimensions and the radii of the two circles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardEdgeKernelSpec {
    /// Distinct population eigenvalues.
    pub lambdas: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub big_n: usize,
    pub alpha: i32,
    pub r: f64,
    pub big_r: f64,
    pub nodes: usize,
}

impl HardEdgeKernelSpec {
    /// Finite-size data of `spec`, with radii adapted to the box (0, s_box].
    pub fn new(spec: &PopulationSpectrum, s_box: f64) -> Result<Self> {
        let f = spec
            .finite_n()
            .ok_or_else(|| Error::InvalidArgument("hard-edge kernel needs finite_n data".into()))?;
        let mult = spec.multiplicities().expect("finite_n present");
        let (lambdas, multiplicities): (Vec<f64>, Vec<usize>) = spec
            .lambdas()
            .into_iter()
            .zip(mult)
            .filter(|(_, k)| *k > 0)
            .unzip();
        let root = s_box.max(0.25).sqrt();
        let out = Self {
            lambdas,
            multiplicities,
            big_n: f.big_n,
            alpha: f.n as i32 - f.big_n as i32,
            r: 1.6 * root,
            big_r: 2.5 * root,
            nodes: 128,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// (4/N) sum_j 1/lambda_j over the n population eigenvalues.
    pub fn sigma_n(&self) -> f64 {
        let s: f64 = self
            .lambdas
            .iter()
            .zip(&self.multiplicities)
            .map(|(l, &k)| k as f64 / l)
            .sum();
        4.0 * s / self.big_n as f64
    }

    /// (8/N) sum_j 1/lambda_j^2 over the n population eigenvalues.
    pub fn zeta_n(&self) -> f64 {
        let s: f64 = self
            .lambdas
            .iter()
            .zip(&self.multiplicities)
            .map(|(l, &k)| k as f64 / (l * l))
            .sum();
        8.0 * s / self.big_n as f64
    }

    /// Radius below which every logarithm in the exponent stays on its principal branch
    /// with margin: half of N sigma_N lambda_min.
    pub fn radius_limit(&self) -> f64 {
        let lmin = self.lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        0.5 * self.big_n as f64 * self.sigma_n() * lmin
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.big_n == 0 {
            return Err(Error::InvalidArgument("empty population spectrum".into()));
        }
        if !(0.0 < self.r && self.r < self.big_r && self.big_r < self.radius_limit()) {
            return Err(Error::InvalidArgument(format!(
                "hard-edge radii must satisfy 0 < r < R < {:.4}, got r = {}, R = {}",
                self.radius_limit(),
                self.r,
                self.big_r
            )));
        }
        if self.nodes < 16 {
            return Err(Error::InvalidArgument("hard-edge contours need at least 16 nodes".into()));
        }
        Ok(())
    }

    /// N (G_N(z) - G_N(0)) = sum_j log(1 - z / (N sigma_N lambda_j)).
    fn shifted_potential(&self, z: Complex64) -> Complex64 {
        let ns = self.big_n as f64 * self.sigma_n();
        self.lambdas
            .iter()
            .zip(&self.multiplicities)
            .map(|(l, &k)| k as f64 * (1.0 - z / (ns * l)).ln())
            .sum()
    }
}

/// Precomputed quadrature for a given spec.
#[derive(Debug, Clone)]
pub struct HardEdgeKernel {
    spec: HardEdgeKernelSpec,
    z: Vec<Complex64>,
    a: Vec<Complex64>,
    w: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl HardEdgeKernel {
    pub fn new(spec: HardEdgeKernelSpec) -> Result<Self> {
        spec.validate()?;
        let o = Complex64::new(0.0, 0.0);
        let zc = circle(o, spec.r, spec.nodes);
        let wc = circle(o, spec.big_r, spec.nodes);
        let alpha = spec.alpha;
        let a = zc
            .z
            .iter()
            .zip(&zc.dz)
            .map(|(z, dz)| dz / z * z.powi(alpha) * (-spec.shifted_potential(*z)).exp())
            .collect();
        let b = wc
            .z
            .iter()
            .zip(&wc.dz)
            .map(|(w, dw)| dw / w * w.powi(-alpha) * spec.shifted_potential(*w).exp())
            .collect();
        Ok(Self {
            z: zc.z,
            a,
            w: wc.z,
            b,
            spec,
        })
    }

    pub fn spec(&self) -> &HardEdgeKernelSpec {
        &self.spec
    }

    fn check(&self, x: f64) -> Result<()> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("hard-edge kernel needs x > 0, got {x}")))
        }
    }
}

const NORM: f64 = -1.0 / (4.0 * PI * PI);

impl KernelEvaluator for HardEdgeKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (z, a) in self.z.iter().zip(&self.a) {
            let az = a * (-x / z).exp();
            let mut s = Complex64::new(0.0, 0.0);
            for (w, b) in self.w.iter().zip(&self.b) {
                s += b * (y / w).exp() / (z - w);
            }
            total += az * s;
        }
        Ok((total * NORM).re)
    }

    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Mat<f64>> {
        for &x in xs.iter().chain(ys) {
            self.check(x)?;
        }
        let a = Mat::<Complex64>::from_fn(xs.len(), self.z.len(), |i, k| {
            self.a[k] * (-xs[i] / self.z[k]).exp()
        });
        let c = Mat::<Complex64>::from_fn(self.z.len(), self.w.len(), |k, l| {
            Complex64::new(1.0, 0.0) / (self.z[k] - self.w[l])
        });
        let b = Mat::<Complex64>::from_fn(self.w.len(), ys.len(), |l, j| {
            self.b[l] * (ys[j] / self.w[l]).exp()
        });
        let m = &a * &c * &b;
        Ok(Mat::from_fn(xs.len(), ys.len(), |i, j| (m[(i, j)] * NORM).re))
    }
}

/// Pointwise evaluation with a node-doubling convergence check.
pub fn finite_kernel_hard(spec: &HardEdgeKernelSpec, x: f64, y: f64) -> Result<f64> {
    let coarse = HardEdgeKernel::new(spec.clone())?.eval(x, y)?;
    let mut fine_spec = spec.clone();
    fine_spec.nodes *= 2;
    let fine = HardEdgeKernel::new(fine_spec)?.eval(x, y)?;
    let err = (fine - coarse).abs();
    if err > 1e-8 {
        return Err(Error::Nonconvergence {
            what: format!("hard-edge kernel at ({x}, {y})"),
            estimate: err,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BesselKernel, ExpansionKernel};

    fn identity_spec(big_n: usize, alpha: i32) -> PopulationSpectrum {
        PopulationSpectrum::dirac(1.0, 1.0)
            .unwrap()
            .with_finite_n(big_n, (big_n as i32 + alpha) as usize)
            .unwrap()
    }

    #[test]
    fn scaling_constants_for_identity() {
        let s = HardEdgeKernelSpec::new(&identity_spec(100, 2), 4.0).unwrap();
        assert!((s.sigma_n() - 4.08).abs() < 1e-14);
        assert!((s.zeta_n() - 8.16).abs() < 1e-14);
        assert_eq!(s.alpha, 2);
    }

    #[test]
    fn radius_independence_and_node_convergence() {
        let mut s = HardEdgeKernelSpec::new(&identity_spec(50, 1), 4.0).unwrap();
        let k1 = HardEdgeKernel::new(s.clone()).unwrap().eval(1.2, 3.1).unwrap();
        s.r *= 0.8;
        s.big_r *= 1.1;
        let k2 = HardEdgeKernel::new(s.clone()).unwrap().eval(1.2, 3.1).unwrap();
        assert!((k1 - k2).abs() < 1e-10);
        assert!(finite_kernel_hard(&s, 0.5, 2.0).is_ok());
    }

    #[test]
    fn matrix_fill_matches_pointwise() {
        let k = HardEdgeKernel::new(HardEdgeKernelSpec::new(&identity_spec(60, -1), 4.0).unwrap())
            .unwrap();
        let xs = [0.3, 1.0, 3.5];
        let m = k.matrix(&xs, &xs).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[(i, j)] - k.eval(xs[i], xs[j]).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn approaches_bessel_and_expansion() {
        let errs: Vec<(f64, f64)> = [50usize, 100, 200]
            .iter()
            .map(|&n| {
                let spec = HardEdgeKernelSpec::new(&identity_spec(n, 2), 4.0).unwrap();
                let exp = ExpansionKernel {
                    alpha: 2,
                    sigma_n: spec.sigma_n(),
                    zeta_n: spec.zeta_n(),
                    big_n: n,
                };
                let k = HardEdgeKernel::new(spec).unwrap();
                let (x, y) = (1.3, 2.9);
                let v = k.eval(x, y).unwrap();
                let b = BesselKernel { alpha: 2 }.eval(x, y).unwrap();
                ((v - b).abs(), (v - exp.eval(x, y).unwrap()).abs())
            })
            .collect();
        for w in errs.windows(2) {
            let r1 = w[0].0 / w[1].0;
            let r2 = w[0].1 / w[1].1;
            assert!((1.6..2.4).contains(&r1), "first-order ratio {r1}");
            assert!((3.2..4.8).contains(&r2), "second-order ratio {r2}");
        }
    }

    #[test]
    fn rejects_radii_outside_the_branch_disc() {
        let mut s = HardEdgeKernelSpec::new(&identity_spec(10, 0), 1.0).unwrap();
        s.big_r = s.radius_limit() * 1.01;
        assert!(s.validate().is_err());
        s.big_r = s.r * 0.5;
        assert!(s.validate().is_err());
    }
}
