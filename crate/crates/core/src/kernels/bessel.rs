//! Bessel kernel and the first-order finite-size correction at the hard edge.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::KernelEvaluator;
use crate::error::{Error, Result};
use crate::quadrature::circle;
use crate::special::{jn, BESSEL_MAX_ARG};

/// Separation below which the quotient is replaced by interpolation.
const NEAR_DIAGONAL: f64 = 1e-3;

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || x.sqrt() > BESSEL_MAX_ARG {
        return Err(Error::InvalidArgument(format!("Bessel kernel needs 0 < x <= 1e4, got {x}")));
    }
    Ok(())
}

fn quotient(alpha: i32, x: f64, y: f64) -> f64 {
    let (sx, sy) = (x.sqrt(), y.sqrt());
    let jx = jn(alpha, sx);
    let jy = jn(alpha, sy);
    let dx = 0.5 * (jn(alpha - 1, sx) - jn(alpha + 1, sx));
    let dy = 0.5 * (jn(alpha - 1, sy) - jn(alpha + 1, sy));
    (sy * jx * dy - sx * dx * jy) / (2.0 * (x - y))
}

fn diagonal(alpha: i32, x: f64) -> f64 {
    let s = x.sqrt();
    let j = jn(alpha, s);
    0.25 * (j * j - jn(alpha + 1, s) * jn(alpha - 1, s))
}

/// K_Be^(alpha)(x, y).
pub fn bessel_kernel(alpha: i32, x: f64, y: f64) -> Result<f64> {
    check_arg(x)?;
    check_arg(y)?;
    Ok(bessel_kernel_unchecked(alpha, x, y))
}

pub(crate) fn bessel_kernel_unchecked(alpha: i32, x: f64, y: f64) -> f64 {
    let d = x - y;
    let scale = 1.0 + x.abs();
    if d.abs() <= 1e-14 * scale {
        return diagonal(alpha, 0.5 * (x + y));
    }
    let band = NEAR_DIAGONAL * scale;
    let mid = 0.5 * (x + y);
    if d.abs() >= band || mid <= 2.0 * band {
        return quotient(alpha, x, y);
    }
    // Interpolate along x - y at a fixed midpoint from well-separated samples
    // and the diagonal value, avoiding cancellation in the quotient.
    let h = band / 2.0;
    let ds = [-2.0 * h, -h, 0.0, h, 2.0 * h];
    let vals: Vec<f64> = ds
        .iter()
        .map(|&s| {
            if s == 0.0 {
                diagonal(alpha, mid)
            } else {
                quotient(alpha, mid + s, mid - s)
            }
        })
        .collect();
    lagrange(&ds, &vals, d / 2.0)
}

pub(crate) fn lagrange(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let mut out = 0.0;
    for i in 0..xs.len() {
        let mut l = 1.0;
        for j in 0..xs.len() {
            if i != j {
                l *= (t - xs[j]) / (xs[i] - xs[j]);
            }
        }
        out += l * ys[i];
    }
    out
}

/// Double contour representation over |z| = r, |w| = R with `nodes` trapezoid
/// points per circle; requires 0 < r < R.
pub fn bessel_kernel_contour(alpha: i32, x: f64, y: f64, r: f64, big_r: f64, nodes: usize) -> Result<f64> {
    check_arg(x)?;
    check_arg(y)?;
    if !(0.0 < r && r < big_r) {
        return Err(Error::InvalidArgument("contour radii must satisfy 0 < r < R".into()));
    }
    let o = Complex64::new(0.0, 0.0);
    let zs = circle(o, r, nodes);
    let ws = circle(o, big_r, nodes);
    let a: Vec<Complex64> = zs
        .z
        .iter()
        .zip(&zs.dz)
        .map(|(z, dz)| dz / z * z.powi(alpha) * (-x / z + z / 4.0).exp())
        .collect();
    let b: Vec<Complex64> = ws
        .z
        .iter()
        .zip(&ws.dz)
        .map(|(w, dw)| dw / w * w.powi(-alpha) * (y / w - w / 4.0).exp())
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (z, av) in zs.z.iter().zip(&a) {
        for (w, bv) in ws.z.iter().zip(&b) {
            total += av * bv / (z - w);
        }
    }
    let norm = -1.0 / (4.0 * PI * PI);
    Ok((y / x).powf(alpha as f64 / 2.0) * (total * norm).re)
}

/// The bounded conjugate (x/y)^{alpha/2} K_Be^(alpha)(x, y), whose Fredholm
/// determinant on (0, s) equals that of K_Be^(alpha).
#[derive(Debug, Clone, Copy)]
pub struct BesselKernel {
    pub alpha: i32,
}

impl KernelEvaluator for BesselKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        check_arg(x)?;
        check_arg(y)?;
        Ok((x / y).powf(self.alpha as f64 / 2.0) * bessel_kernel_unchecked(self.alpha, x, y))
    }
}

/// Coefficient of the first-order correction bracket, zeta / (4 sigma^2 N).
pub fn correction_coefficient(sigma_n: f64, zeta_n: f64, big_n: usize) -> f64 {
    zeta_n / (4.0 * sigma_n * sigma_n * big_n as f64)
}

/// alpha J_a(sqrt x) J_a(sqrt y) + (x - y) K_Be(x, y).
pub fn correction_bracket(alpha: i32, x: f64, y: f64) -> f64 {
    alpha as f64 * jn(alpha, x.sqrt()) * jn(alpha, y.sqrt())
        + (x - y) * bessel_kernel_unchecked(alpha, x, y)
}

/// The same bracket written as a half-sum of products with shifted orders.
pub fn correction_bracket_shifted(alpha: i32, x: f64, y: f64) -> f64 {
    let (sx, sy) = (x.sqrt(), y.sqrt());
    0.5 * (sx * jn(alpha + 1, sx) * jn(alpha, sy) + sy * jn(alpha, sx) * jn(alpha - 1, sy))
}

/// Hard-edge kernel through first order in 1/N.
pub fn hard_edge_expansion_kernel(
    alpha: i32,
    sigma_n: f64,
    zeta_n: f64,
    big_n: usize,
    x: f64,
    y: f64,
) -> Result<f64> {
    check_arg(x)?;
    check_arg(y)?;
    let c = correction_coefficient(sigma_n, zeta_n, big_n);
    let k = bessel_kernel_unchecked(alpha, x, y);
    Ok((x / y).powf(alpha as f64 / 2.0) * (k - c * correction_bracket(alpha, x, y)))
}

/// Kernel evaluator for the first-order expansion.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionKernel {
    pub alpha: i32,
    pub sigma_n: f64,
    pub zeta_n: f64,
    pub big_n: usize,
}

impl KernelEvaluator for ExpansionKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        hard_edge_expansion_kernel(self.alpha, self.sigma_n, self.zeta_n, self.big_n, x, y)
    }
}
