//! Fredholm determinants by Nyström discretisation, Bessel and Pearcey gap probabilities.

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{
    bessel_kernel, BesselKernel, HardEdgeKernel, HardEdgeKernelSpec, KernelEvaluator,
    PearceyKernel, PearceyParams,
};
use crate::quadrature::QuadratureRule;
use crate::special::bessel_j;

/// Default number of Gauss-Legendre nodes.
pub const DEFAULT_ORDER: usize = 40;
/// Self-convergence target for accepted determinants.
pub const TARGET_ERROR: f64 = 1e-8;
/// Largest tolerated error after the last doubling.
pub const MAX_ERROR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapResult {
    pub value: f64,
    pub order: usize,
    /// |value at order - value at order / 2|.
    pub error_estimate: f64,
}

/// Nyström matrix I - sqrt(w_i) K(x_i, x_j) sqrt(w_j).
fn nystrom<K: KernelEvaluator + ?Sized>(kernel: &K, rule: &QuadratureRule) -> Result<Mat<f64>> {
    let k = kernel.matrix(&rule.nodes, &rule.nodes)?;
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    Ok(Mat::from_fn(rule.len(), rule.len(), |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - sw[i] * k[(i, j)] * sw[j]
    }))
}

/// det(I - K) on L^2(a, b) with `order` Gauss-Legendre nodes, no refinement.
pub fn fredholm_det_fixed<K: KernelEvaluator + ?Sized>(
    kernel: &K,
    a: f64,
    b: f64,
    order: usize,
) -> Result<f64> {
    if order == 0 || a == b {
        return Ok(1.0);
    }
    let rule = QuadratureRule::gauss_legendre(a, b, order);
    Ok(nystrom(kernel, &rule)?.determinant())
}

/// det(I - K) on L^2(a, b), doubling the order from `order` up to four times it until two
/// successive orders agree to 1e-8.
pub fn fredholm_det<K: KernelEvaluator + ?Sized>(
    kernel: &K,
    a: f64,
    b: f64,
    order: usize,
) -> Result<GapResult> {
    if order < 8 {
        return Err(Error::InvalidArgument(format!("Nyström order must be >= 8, got {order}")));
    }
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidArgument(format!("invalid interval ({a}, {b})")));
    }
    let mut prev = fredholm_det_fixed(kernel, a, b, order / 2)?;
    let mut o = order;
    loop {
        let value = fredholm_det_fixed(kernel, a, b, o)?;
        let err = (value - prev).abs();
        if err <= TARGET_ERROR || o >= 4 * order {
            if err > MAX_ERROR {
                return Err(Error::Nonconvergence {
                    what: format!("Fredholm determinant on ({a}, {b}) at order {o}"),
                    estimate: err,
                });
            }
            return Ok(GapResult {
                value,
                order: o,
                error_estimate: err,
            });
        }
        prev = value;
        o *= 2;
    }
}

/// F_alpha(s) = det(I - K_Be^(alpha)) on L^2(0, s).
pub fn f_alpha(alpha: i32, s: f64, order: usize) -> Result<GapResult> {
    check_s(s)?;
    fredholm_det(&BesselKernel { alpha }, 0.0, s, order)
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("s must be positive, got {s}")))
    }
}

struct SymmetricBessel(i32);

impl KernelEvaluator for SymmetricBessel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        bessel_kernel(self.0, x, y)
    }
}

/// s F_alpha'(s) = -(1/4) <J, (I - K_Be)^{-1} J> F_alpha(s) with J = J_alpha(sqrt(.)) on (0, s).
pub fn s_df_ds(alpha: i32, s: f64, order: usize) -> Result<f64> {
    let f = f_alpha(alpha, s, order)?;
    let rule = QuadratureRule::gauss_legendre(0.0, s, f.order);
    let a = nystrom(&SymmetricBessel(alpha), &rule)?;
    let jhat = Mat::<f64>::from_fn(rule.len(), 1, |i, _| {
        rule.weights[i].sqrt() * bessel_j(alpha, rule.nodes[i].sqrt()).unwrap_or(f64::NAN)
    });
    if jhat.col(0).iter().any(|v| !v.is_finite()) {
        return Err(Error::BesselRange(s.sqrt()));
    }
    let v = a.partial_piv_lu().solve(&jhat);
    let resid = &a * &v - &jhat;
    let rnorm = resid.norm_l2() / jhat.norm_l2().max(f64::MIN_POSITIVE);
    if rnorm > 1e-10 {
        return Err(Error::IllConditioned(rnorm));
    }
    let q: f64 = (0..rule.len()).map(|i| jhat[(i, 0)] * v[(i, 0)]).sum();
    Ok(-0.25 * q * f.value)
}

/// One row of the hard-edge expansion: F_alpha(s) and its 1/N correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardEdgePrediction {
    pub s: f64,
    pub f_alpha: f64,
    pub s_df_ds: f64,
    /// -(1/N)(alpha zeta_N / sigma_N^2) s F_alpha'(s).
    pub correction: f64,
    pub prediction: f64,
}

pub fn hard_edge_prediction(
    alpha: i32,
    s: f64,
    big_n: usize,
    sigma_n: f64,
    zeta_n: f64,
    order: usize,
) -> Result<HardEdgePrediction> {
    let f = f_alpha(alpha, s, order)?.value;
    let sd = if alpha == 0 { 0.0 } else { s_df_ds(alpha, s, order)? };
    let correction = -(alpha as f64) * zeta_n / (sigma_n * sigma_n) / big_n as f64 * sd;
    Ok(HardEdgePrediction {
        s,
        f_alpha: f,
        s_df_ds: sd,
        correction,
        prediction: f + correction,
    })
}

/// det(I - K~_N) on (0, s) for the exact finite-size hard-edge kernel.
pub fn finite_hard_edge_det(spec: &HardEdgeKernelSpec, s: f64, order: usize) -> Result<GapResult> {
    check_s(s)?;
    let kernel = HardEdgeKernel::new(spec.clone())?;
    fredholm_det(&kernel, 0.0, s, order)
}

/// det(I - K_Pe^(tau)) on L^2(s, t).
pub fn pearcey_gap(tau: f64, s: f64, t: f64, order: usize) -> Result<GapResult> {
    if !(s <= t) {
        return Err(Error::InvalidArgument(format!("need s <= t, got ({s}, {t})")));
    }
    let kernel = PearceyKernel::new(PearceyParams::new(tau))?;
    fredholm_det(&kernel, s, t, order)
}
