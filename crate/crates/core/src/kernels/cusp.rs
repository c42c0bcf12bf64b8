//! Exact finite-size kernel near a cusp, in the variables x/(N^{3/4} sigma_N) around a_N.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::KernelEvaluator;
use crate::error::{Error, Result};
use crate::quadrature::circle;
use crate::spectral_model::PopulationSpectrum;

/// Data entering the exponent N f_N(z) = -N a_N (z - c_N) + N log z - sum_j log(1 - lambda_j z).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspKernelIntegrand {
    /// Distinct population eigenvalues.
    pub lambdas: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub big_n: usize,
    pub n: usize,
    pub c_n: f64,
    pub a_n: f64,
    /// Shift of the exponential factors; kept equal to c_n.
    pub q: f64,
}

impl CuspKernelIntegrand {
    pub fn new(spec: &PopulationSpectrum, c_n: f64, a_n: f64) -> Result<Self> {
        let f = spec
            .finite_n()
            .ok_or_else(|| Error::InvalidArgument("cusp kernel needs finite_n data".into()))?;
        let mult = spec.multiplicities().expect("finite_n present");
        let (lambdas, multiplicities): (Vec<f64>, Vec<usize>) = spec
            .lambdas()
            .into_iter()
            .zip(mult)
            .filter(|(_, k)| *k > 0)
            .unzip();
        let out = Self {
            lambdas,
            multiplicities,
            big_n: f.big_n,
            n: f.n,
            c_n,
            a_n,
            q: c_n,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q != self.c_n {
            return Err(Error::InvalidArgument("q must equal c_N".into()));
        }
        if !(self.c_n > 0.0 && self.c_n.is_finite() && self.a_n.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid c_N = {}", self.c_n)));
        }
        if self.multiplicities.iter().sum::<usize>() != self.n {
            return Err(Error::InvalidArgument("multiplicities must sum to n".into()));
        }
        for &l in &self.lambdas {
            if (1.0 / l - self.c_n).abs() < 1e-6 * self.c_n {
                return Err(Error::InvalidArgument(format!(
                    "c_N = {} sits on the pole 1/{l}",
                    self.c_n
                )));
            }
        }
        Ok(())
    }

    /// N f_N(z) with per-atom principal logarithms; exact after exponentiation.
    pub fn exponent(&self, z: Complex64) -> Complex64 {
        let nn = self.big_n as f64;
        let mut s = -nn * self.a_n * (z - self.c_n) + nn * z.ln();
        for (l, &k) in self.lambdas.iter().zip(&self.multiplicities) {
            s -= k as f64 * (1.0 - l * z).ln();
        }
        s
    }

    fn poles_below(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| 1.0 / l).filter(|p| *p < self.c_n).collect()
    }

    fn poles_above(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| 1.0 / l).filter(|p| *p > self.c_n).collect()
    }
}

/// Three circles centred on the real axis: Gamma+ over [c_N + d, r_plus] around the poles
/// right of c_N, Gamma- over [-e, c_N - d] around the poles left of c_N (omitted when there
/// are none), and Theta over [-l, c_N] enclosing Gamma-. Here d = d_scale sigma_N N^{-1/4}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuspContours {
    pub d_scale: f64,
    pub r_plus: f64,
    pub e: f64,
    pub l: f64,
    pub nodes: usize,
}

impl CuspContours {
    fn gap(&self, it: &CuspKernelIntegrand, sigma_n: f64) -> f64 {
        self.d_scale * sigma_n * (it.big_n as f64).powf(-0.25)
    }

    /// Circle (center, radius) triples for Gamma+, Gamma- and Theta.
    pub fn circles(
        &self,
        it: &CuspKernelIntegrand,
        sigma_n: f64,
    ) -> ((f64, f64), Option<(f64, f64)>, (f64, f64)) {
        let d = self.gap(it, sigma_n);
        let c = it.c_n;
        let span = |a: f64, b: f64| (0.5 * (a + b), 0.5 * (b - a));
        let minus = if it.poles_below().is_empty() {
            None
        } else {
            Some(span(-self.e, c - d))
        };
        (span(c + d, self.r_plus), minus, span(-self.l, c))
    }

    pub fn validate(&self, it: &CuspKernelIntegrand, sigma_n: f64) -> Result<()> {
        let d = self.gap(it, sigma_n);
        let c = it.c_n;
        let bad = |msg: String| Err(Error::InvalidArgument(format!("cusp contours: {msg}")));
        if self.nodes < 16 {
            return bad("at least 16 nodes per circle".into());
        }
        if !(d > 0.0 && d < c) {
            return bad(format!("gap d = {d} must lie in (0, c_N)"));
        }
        if !(self.e > 0.0 && self.l > self.e) {
            return bad(format!("need 0 < e < l, got e = {}, l = {}", self.e, self.l));
        }
        for p in it.poles_above() {
            if !(c + d < p && p < self.r_plus) {
                return bad(format!("pole {p} not strictly inside Gamma+"));
            }
        }
        for p in it.poles_below() {
            if !(p < c - d) {
                return bad(format!("pole {p} not strictly inside Gamma-"));
            }
        }
        Ok(())
    }

    /// Grid search for the circles that minimise the largest exponent met on the contours
    /// for |x|, |y| <= s_box.
    pub fn tune(it: &CuspKernelIntegrand, sigma_n: f64, s_box: f64, nodes: usize) -> Result<Self> {
        let c = it.c_n;
        let above = it.poles_above();
        let pmax = above.iter().cloned().fold(c, f64::max);
        let f0 = it.exponent(Complex64::new(c, 0.0)).re;
        let k = (it.big_n as f64).powf(0.25) / sigma_n;
        let probe = 256;
        let worst = |cand: &CuspContours| -> f64 {
            let (gp, gm, th) = cand.circles(it, sigma_n);
            let mut m = f64::NEG_INFINITY;
            let mut scan = |(cc, r): (f64, f64), sign: f64| {
                for z in circle(Complex64::new(cc, 0.0), r, probe).z {
                    let v = sign * (it.exponent(z).re - f0) + s_box * k * (z.re - c).abs();
                    m = m.max(v);
                }
            };
            scan(gp, 1.0);
            if let Some(g) = gm {
                scan(g, 1.0);
            }
            scan(th, -1.0);
            m
        };
        let mut best: Option<(f64, CuspContours)> = None;
        for &d_scale in &[0.6, 0.8, 1.0, 1.2] {
            for &rho in &[0.05, 0.1, 0.2, 0.4] {
                for &e in &[0.02, 0.05, 0.1] {
                    for &l in &[0.2, 0.35, 0.55, 0.9, 1.4] {
                        let cand = CuspContours {
                            d_scale,
                            r_plus: pmax + rho * pmax.max(c),
                            e: e * c,
                            l: l * c,
                            nodes,
                        };
                        if cand.validate(it, sigma_n).is_err() {
                            continue;
                        }
                        let w = worst(&cand);
                        if w.is_finite() && best.as_ref().is_none_or(|(b, _)| w < *b) {
                            best = Some((w, cand));
                        }
                    }
                }
            }
        }
        best.map(|(_, c)| c).ok_or_else(|| {
            Error::InvalidArgument("no admissible cusp contour geometry found".into())
        })
    }
}

/// Precomputed quadrature for the scaled cusp kernel.
#[derive(Debug, Clone)]
pub struct CuspKernel {
    integrand: CuspKernelIntegrand,
    contours: CuspContours,
    sigma_n: f64,
    scale: f64,
    z: Vec<Complex64>,
    a: Vec<Complex64>,
    w: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl CuspKernel {
    pub fn new(integrand: CuspKernelIntegrand, sigma_n: f64, contours: CuspContours) -> Result<Self> {
        integrand.validate()?;
        if !(sigma_n > 0.0 && sigma_n.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma_N must be positive, got {sigma_n}")));
        }
        contours.validate(&integrand, sigma_n)?;
        let (gp, gm, th) = contours.circles(&integrand, sigma_n);
        let f0 = integrand.exponent(Complex64::new(integrand.c_n, 0.0)).re;
        let mut zs = circle(Complex64::new(gp.0, 0.0), gp.1, contours.nodes);
        if let Some(g) = gm {
            zs.extend(circle(Complex64::new(g.0, 0.0), g.1, contours.nodes));
        }
        let ws = circle(Complex64::new(th.0, 0.0), th.1, contours.nodes);
        let a = zs
            .z
            .iter()
            .zip(&zs.dz)
            .map(|(z, dz)| dz * (integrand.exponent(*z) - f0).exp())
            .collect();
        let b = ws
            .z
            .iter()
            .zip(&ws.dz)
            .map(|(w, dw)| dw * (f0 - integrand.exponent(*w)).exp())
            .collect();
        let scale = (integrand.big_n as f64).powf(0.25) / sigma_n;
        Ok(Self {
            integrand,
            contours,
            sigma_n,
            scale,
            z: zs.z,
            a,
            w: ws.z,
            b,
        })
    }

    /// Kernel with contours tuned for the box [-s_box, s_box].
    pub fn tuned(integrand: CuspKernelIntegrand, sigma_n: f64, s_box: f64, nodes: usize) -> Result<Self> {
        let contours = CuspContours::tune(&integrand, sigma_n, s_box, nodes)?;
        Self::new(integrand, sigma_n, contours)
    }

    pub fn integrand(&self) -> &CuspKernelIntegrand {
        &self.integrand
    }

    pub fn contours(&self) -> CuspContours {
        self.contours
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    fn prefactor(&self) -> f64 {
        -self.scale / (4.0 * PI * PI)
    }

    fn check(x: f64) -> Result<()> {
        if x.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("non-finite kernel argument {x}")))
        }
    }
}

impl KernelEvaluator for CuspKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Self::check(x)?;
        Self::check(y)?;
        let c = self.integrand.c_n;
        let mut total = Complex64::new(0.0, 0.0);
        for (z, a) in self.z.iter().zip(&self.a) {
            let az = a * (-self.scale * x * (z - c)).exp();
            let mut s = Complex64::new(0.0, 0.0);
            for (w, b) in self.w.iter().zip(&self.b) {
                s += b * (self.scale * y * (w - c)).exp() / (w - z);
            }
            total += az * s;
        }
        Ok((total * self.prefactor()).re)
    }

    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Mat<f64>> {
        for &x in xs.iter().chain(ys) {
            Self::check(x)?;
        }
        let c = self.integrand.c_n;
        let a = Mat::<Complex64>::from_fn(xs.len(), self.z.len(), |i, k| {
            self.a[k] * (-self.scale * xs[i] * (self.z[k] - c)).exp()
        });
        let cm = Mat::<Complex64>::from_fn(self.z.len(), self.w.len(), |k, l| {
            Complex64::new(1.0, 0.0) / (self.w[l] - self.z[k])
        });
        let b = Mat::<Complex64>::from_fn(self.w.len(), ys.len(), |l, j| {
            self.b[l] * (self.scale * ys[j] * (self.w[l] - c)).exp()
        });
        let m = &a * &cm * &b;
        let p = self.prefactor();
        Ok(Mat::from_fn(xs.len(), ys.len(), |i, j| (m[(i, j)] * p).re))
    }
}

/// Pointwise evaluation on tuned contours with a node-doubling convergence check.
pub fn finite_kernel_cusp(spec: &CuspKernelIntegrand, sigma_n: f64, x: f64, y: f64) -> Result<f64> {
    let s_box = x.abs().max(y.abs()).max(1.0);
    let contours = CuspContours::tune(spec, sigma_n, s_box, 256)?;
    let coarse = CuspKernel::new(spec.clone(), sigma_n, contours)?.eval(x, y)?;
    let fine_contours = CuspContours {
        nodes: 512,
        ..contours
    };
    let fine = CuspKernel::new(spec.clone(), sigma_n, fine_contours)?.eval(x, y)?;
    let err = (fine - coarse).abs();
    if err > 1e-8 {
        return Err(Error::Nonconvergence {
            what: format!("cusp kernel at ({x}, {y})"),
            estimate: err,
        });
    }
    Ok(fine)
}
