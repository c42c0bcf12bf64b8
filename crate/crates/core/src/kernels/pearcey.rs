//! Pearcey-type integrals and the Pearcey kernel.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::KernelEvaluator;
use crate::error::{Error, Result};
use crate::quadrature::{arc, gauss_legendre_unit, segment, ContourNodes};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Offset of the symmetric differencing used on the diagonal.
pub const DIAGONAL_OFFSET: f64 = 1e-5;
/// Below this separation the quotient form is replaced by interpolation.
const NEAR_DIAGONAL: f64 = 2e-4;
/// Cap on the log-magnitude of the integrands inside the validated box.
const PEAK_EXPONENT: f64 = 14.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PearceyParams {
    pub tau: f64,
    #[serde(default = "default_truncation")]
    pub truncation_t: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_truncation() -> f64 {
    8.0
}

fn default_nodes() -> usize {
    200
}

impl PearceyParams {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            truncation_t: default_truncation(),
            nodes: default_nodes(),
        }
    }

    /// Bound on the discarded tail of the integrands when |x| <= s.
    pub fn tail_bound(&self, s: f64) -> f64 {
        let t = self.truncation_t;
        (-t.powi(4) / 4.0 + s * t + self.tau.abs() * t * t / 2.0).exp()
    }

    /// Largest |x| for which the tail bound stays below 1e-14 and the integrands peak below
    /// e^14, which keeps cancellation in the quadrature sums near 1e-10.
    pub fn box_radius(&self) -> f64 {
        let t = self.truncation_t;
        let tail = (t.powi(4) / 4.0 - self.tau.abs() * t * t / 2.0 + 1e-14f64.ln()) / t;
        let peak = |x: f64| {
            (0..=2000)
                .map(|i| {
                    let u = t * i as f64 / 2000.0;
                    -u.powi(4) / 4.0 + self.tau.abs() * u * u / 2.0 + x * u
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let (mut lo, mut hi) = (0.0, tail.max(0.0));
        if peak(hi) <= PEAK_EXPONENT {
            return hi;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if peak(mid) <= PEAK_EXPONENT {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Functions,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Phi,
    Psi,
}

/// Quadrature data for phi (on the contour Sigma) and psi (on the imaginary axis).
#[derive(Debug, Clone)]
pub struct PearceyKernel {
    params: PearceyParams,
    sigma_z: Vec<Complex64>,
    sigma_w: Vec<Complex64>,
    axis_t: Vec<f64>,
    axis_w: Vec<f64>,
    radius: f64,
}

/// The two components of Sigma, truncated at modulus `t`.
pub fn sigma_contour(t: f64, n: usize) -> ContourNodes {
    let ray = |angle: f64, inward: bool| {
        let e = Complex64::from_polar(1.0, angle);
        if inward {
            segment(e * t, e, n)
        } else {
            segment(e, e * t, n)
        }
    };
    let origin = Complex64::new(0.0, 0.0);
    let mut c = ContourNodes::default();
    // Right component: in along arg = pi/4, clockwise over z = 1, out along arg = -pi/4.
    c.extend(ray(FRAC_PI_4, true));
    c.extend(arc(origin, 1.0, FRAC_PI_4, -FRAC_PI_4, n));
    c.extend(ray(-FRAC_PI_4, false));
    // Left component: in along arg = -3pi/4, clockwise over z = -1, out along arg = 3pi/4.
    c.extend(ray(-3.0 * FRAC_PI_4, true));
    c.extend(arc(origin, 1.0, 5.0 * FRAC_PI_4, 3.0 * FRAC_PI_4, n));
    c.extend(ray(3.0 * FRAC_PI_4, false));
    c
}

impl PearceyKernel {
    pub fn new(params: PearceyParams) -> Result<Self> {
        if !(params.truncation_t > 1.0) || params.nodes < 16 {
            return Err(Error::InvalidArgument(
                "Pearcey truncation must exceed 1 and use at least 16 nodes".into(),
            ));
        }
        let tau = params.tau;
        let t = params.truncation_t;
        let sigma = sigma_contour(t, params.nodes);
        let sigma_w = sigma
            .z
            .iter()
            .zip(&sigma.dz)
            .map(|(z, dz)| dz * (-tau * z * z / 2.0 + z.powi(4) / 4.0).exp() / (2.0 * PI * I))
            .collect();
        let (u, uw) = gauss_legendre_unit(params.nodes);
        let mut axis_t = Vec::with_capacity(2 * params.nodes);
        let mut axis_w = Vec::with_capacity(2 * params.nodes);
        for (lo, hi) in [(-t, 0.0), (0.0, t)] {
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (s, w) in u.iter().zip(&uw) {
                let x: f64 = mid + half * s;
                axis_t.push(x);
                axis_w.push(half * w * (-tau * x * x / 2.0 - x.powi(4) / 4.0).exp() / (2.0 * PI));
            }
        }
        Ok(Self {
            params,
            sigma_z: sigma.z,
            sigma_w,
            axis_t,
            axis_w,
            radius: params.box_radius(),
        })
    }

    pub fn params(&self) -> &PearceyParams {
        &self.params
    }

    fn check_box(&self, x: f64) -> Result<()> {
        if x.abs() > self.radius {
            Err(Error::Truncation(format!(
                "|x| = {} exceeds the validated box {:.3} for T = {}",
                x.abs(),
                self.radius,
                self.params.truncation_t
            )))
        } else {
            Ok(())
        }
    }

    /// k-th derivative of phi at x, as computed (imaginary part is roundoff).
    pub fn phi_complex(&self, x: f64, k: u32) -> Complex64 {
        self.sigma_z
            .iter()
            .zip(&self.sigma_w)
            .map(|(z, w)| w * z.powu(k) * (x * z).exp())
            .sum()
    }

    /// k-th derivative of psi at y, as computed (imaginary part is roundoff).
    pub fn psi_complex(&self, y: f64, k: u32) -> Complex64 {
        self.axis_t
            .iter()
            .zip(&self.axis_w)
            .map(|(t, w)| w * (-I * t).powu(k) * Complex64::from_polar(1.0, -y * t))
            .sum()
    }

    pub fn phi_psi(&self, which: Which, t: f64, order: u32) -> Result<f64> {
        self.check_box(t)?;
        Ok(match which {
            Which::Phi => self.phi_complex(t, order).re,
            Which::Psi => self.psi_complex(t, order).re,
        })
    }

    fn numerator(&self, x: f64, y: f64) -> f64 {
        let p: Vec<f64> = (0..3).map(|k| self.phi_complex(x, k).re).collect();
        let q: Vec<f64> = (0..3).map(|k| self.psi_complex(y, k).re).collect();
        p[2] * q[0] - p[1] * q[1] + p[0] * q[2] - self.params.tau * p[0] * q[0]
    }

    fn quotient(&self, x: f64, y: f64) -> f64 {
        self.numerator(x, y) / (x - y)
    }

    /// Diagonal value by Richardson extrapolation of symmetric offsets.
    fn diagonal(&self, x: f64) -> Result<f64> {
        let sym = |h: f64| 0.5 * (self.quotient(x + h, x - h) + self.quotient(x - h, x + h));
        let h = DIAGONAL_OFFSET;
        let coarse = sym(h);
        let fine = sym(h / 2.0);
        if (coarse - fine).abs() > 1e-7 {
            return Err(Error::Nonconvergence {
                what: format!("Pearcey diagonal at x = {x}"),
                estimate: (coarse - fine).abs(),
            });
        }
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// Kernel from the functions phi, psi.
    pub fn eval_functions(&self, x: f64, y: f64) -> Result<f64> {
        self.check_box(x)?;
        self.check_box(y)?;
        let d = x - y;
        if d.abs() <= 1e-12 * (1.0 + x.abs()) {
            return self.diagonal(0.5 * (x + y));
        }
        if d.abs() >= NEAR_DIAGONAL {
            return Ok(self.quotient(x, y));
        }
        // Cubic interpolation along x - y at fixed midpoint, from well-separated samples.
        let mid = 0.5 * (x + y);
        let h = NEAR_DIAGONAL / 2.0;
        let ds = [-2.0 * h, -h, h, 2.0 * h];
        let vals: Vec<f64> = ds.iter().map(|&s| self.quotient(mid + s, mid - s)).collect();
        let target = d / 2.0;
        let mut out = 0.0;
        for i in 0..4 {
            let mut l = 1.0;
            for j in 0..4 {
                if i != j {
                    l *= (target - ds[j]) / (ds[i] - ds[j]);
                }
            }
            out += l * vals[i];
        }
        Ok(out)
    }

    /// Kernel from the double contour integral, returned with its imaginary residue.
    pub fn contour_complex(&self, x: f64, y: f64) -> Complex64 {
        let a: Vec<Complex64> = self
            .sigma_z
            .iter()
            .zip(&self.sigma_w)
            .map(|(z, w)| w * (x * z).exp())
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (t, w) in self.axis_t.iter().zip(&self.axis_w) {
            let b = w * Complex64::from_polar(1.0, -y * t);
            let iw = I * t;
            let mut s = Complex64::new(0.0, 0.0);
            for (z, av) in self.sigma_z.iter().zip(&a) {
                s += av / (iw - z);
            }
            total += b * s;
        }
        total
    }

    pub fn eval_contour(&self, x: f64, y: f64) -> Result<f64> {
        self.check_box(x)?;
        self.check_box(y)?;
        Ok(self.contour_complex(x, y).re)
    }

    pub fn eval_with(&self, x: f64, y: f64, repr: Representation) -> Result<f64> {
        match repr {
            Representation::Functions => self.eval_functions(x, y),
            Representation::Contour => self.eval_contour(x, y),
        }
    }
}

impl KernelEvaluator for PearceyKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_functions(x, y)
    }
}

pub fn pearcey_phi_psi(tau: f64, t: f64, which: Which, order: u32) -> Result<f64> {
    PearceyKernel::new(PearceyParams::new(tau))?.phi_psi(which, t, order)
}

pub fn pearcey_kernel(params: PearceyParams, x: f64, y: f64, repr: Representation) -> Result<f64> {
    PearceyKernel::new(params)?.eval_with(x, y, repr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ode_residuals() {
        for &tau in &[-1.0, 0.0, 2.0] {
            let k = PearceyKernel::new(PearceyParams::new(tau)).unwrap();
            for &t in &[-2.0, 0.0, 3.0] {
                let p: Vec<f64> = (0..4).map(|j| k.phi_complex(t, j).re).collect();
                let q: Vec<f64> = (0..4).map(|j| k.psi_complex(t, j).re).collect();
                assert!((p[3] - tau * p[1] + t * p[0]).abs() < 1e-8);
                assert!((q[3] - tau * q[1] - t * q[0]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn functions_are_real() {
        let k = PearceyKernel::new(PearceyParams::new(1.0)).unwrap();
        for &t in &[-2.5, 0.3, 2.0] {
            for j in 0..3 {
                assert!(k.psi_complex(t, j).im.abs() < 1e-12);
                assert!(k.phi_complex(t, j).im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_is_converged() {
        let a = PearceyKernel::new(PearceyParams::new(0.0)).unwrap();
        let mut p = PearceyParams::new(0.0);
        p.truncation_t = 10.0;
        p.nodes = 260;
        let b = PearceyKernel::new(p).unwrap();
        assert!((a.phi_complex(0.0, 0).re - b.phi_complex(0.0, 0).re).abs() < 1e-13);
        assert!(p.tail_bound(3.0) < 1e-14);
        assert!(PearceyParams::new(2.0).tail_bound(3.0) < 1e-14);
        for tau in [-2.0, 0.0, 2.0] {
            let r = PearceyParams::new(tau).box_radius();
            assert!(r > 3.0 && r < 10.0, "tau {tau}: {r}");
        }
        assert!(a.eval_functions(50.0, 0.0).is_err());
    }

    #[test]
    fn representations_agree_and_symmetry_holds() {
        let k = PearceyKernel::new(PearceyParams::new(1.0)).unwrap();
        let a = k.eval_functions(1.5, -0.3).unwrap();
        let b = k.eval_functions(-1.5, 0.3).unwrap();
        assert!((a - b).abs() < 1e-10);
        let c = k.contour_complex(1.5, -0.3);
        assert!((a - c.re).abs() < 1e-8);
        assert!(c.im.abs() < 1e-12);
    }

    #[test]
    fn diagonal_is_a_positive_density() {
        let k = PearceyKernel::new(PearceyParams::new(0.0)).unwrap();
        for &x in &[-2.0, 0.0, 1.0] {
            let d = k.eval_functions(x, x).unwrap();
            assert!(d > 0.0);
            assert!((d - k.eval_contour(x, x).unwrap()).abs() < 1e-8);
            let near = k.eval_functions(x + 1e-5, x).unwrap();
            assert!((near - k.eval_contour(x + 1e-5, x).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn refuses_points_outside_the_box() {
        let k = PearceyKernel::new(PearceyParams::new(0.0)).unwrap();
        assert!(k.eval_functions(500.0, 0.0).is_err());
    }
}
