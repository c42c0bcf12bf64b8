//! Correlation kernels: Pearcey, Bessel and the exact finite-size kernels.

mod bessel;
mod cusp;
mod hard;
mod pearcey;

pub use bessel::{
    bessel_kernel, bessel_kernel_contour, correction_bracket, correction_bracket_shifted,
    correction_coefficient, hard_edge_expansion_kernel, BesselKernel, ExpansionKernel,
};
pub use cusp::{finite_kernel_cusp, CuspContours, CuspKernel, CuspKernelIntegrand};
pub use hard::{finite_kernel_hard, HardEdgeKernel, HardEdgeKernelSpec};
pub use pearcey::{
    pearcey_kernel, pearcey_phi_psi, sigma_contour, PearceyKernel, PearceyParams,
    Representation, Which, DIAGONAL_OFFSET,
};

use faer::Mat;
use rayon::prelude::*;

use crate::error::Result;

/// A kernel K(x, y) that can be evaluated pointwise.
pub trait KernelEvaluator: Sync {
    fn eval(&self, x: f64, y: f64) -> Result<f64>;

    /// Values K(xs[i], ys[j]); kernels with separable quadrature override this.
    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Mat<f64>> {
        let rows = xs
            .par_iter()
            .map(|&x| ys.iter().map(|&y| self.eval(x, y)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Mat::from_fn(xs.len(), ys.len(), |i, j| rows[i][j]))
    }
}

impl<K: KernelEvaluator + ?Sized> KernelEvaluator for &K {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        (**self).eval(x, y)
    }

    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Mat<f64>> {
        (**self).matrix(xs, ys)
    }
}

/// Kernel values on a tensor grid as CSV with header "x,y,K".
pub fn grid_csv(kernel: &dyn KernelEvaluator, xs: &[f64], ys: &[f64]) -> Result<String> {
    let m = kernel.matrix(xs, ys)?;
    let mut out = String::from("x,y,K\n");
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            out.push_str(&format!("{x:.12e},{y:.12e},{:.15e}\n", m[(i, j)]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Ones;

    impl KernelEvaluator for Ones {
        fn eval(&self, _: f64, _: f64) -> Result<f64> {
            Ok(1.0)
        }
    }

    #[test]
    fn grid_dump_layout() {
        let csv = grid_csv(&Ones, &[0.0, 1.0], &[2.0]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,K");
        assert_eq!(lines.len(), 3);
    }
}
