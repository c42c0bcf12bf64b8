//! Stieltjes transform of the limiting eigenvalue distribution.

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::inverse::{InverseMap, POLE_TOL};
use super::spectrum::PopulationSpectrum;
use crate::error::{Error, Result};

/// Roots with fixed-point defect below this are genuine solutions.
const ROOT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StieltjesValue {
    pub z: Complex64,
    pub m: Complex64,
    pub residual: f64,
}

/// Solver for the fixed-point equation, reusable across query points.
#[derive(Debug, Clone)]
pub struct StieltjesSolver {
    map: InverseMap,
}

impl StieltjesSolver {
    pub fn new(spec: &PopulationSpectrum) -> Self {
        Self {
            map: InverseMap::new(spec),
        }
    }

    pub fn map(&self) -> &InverseMap {
        &self.map
    }

    /// Coefficients (ascending powers of m) of the cleared fixed-point equation
    /// prod(1 - m l_k)(1 - z m) + gamma m sum_k w_k l_k prod_{j != k}(1 - m l_j).
    pub fn polynomial(&self, z: Complex64) -> Vec<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let lam = &self.map.lambdas;
        let mut full = vec![one];
        for &l in lam {
            full = mul_linear(&full, -l);
        }
        let mut p = mul_linear(&full, 0.0);
        for (i, c) in full.iter().enumerate() {
            p[i + 1] -= z * c;
        }
        for k in 0..lam.len() {
            let mut partial = vec![one];
            for (j, &l) in lam.iter().enumerate() {
                if j != k {
                    partial = mul_linear(&partial, -l);
                }
            }
            let coef = self.map.gamma * self.map.weights[k] * lam[k];
            for (i, c) in partial.iter().enumerate() {
                p[i + 1] += coef * c;
            }
        }
        while p.len() > 1 {
            let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if p.last().unwrap().norm() <= 1e-14 * scale {
                p.pop();
            } else {
                break;
            }
        }
        p
    }

    /// All solutions of g(m) = z, Newton-polished.
    pub fn all_roots(&self, z: Complex64) -> Result<Vec<Complex64>> {
        let p = self.polynomial(z);
        let mut roots = companion_roots(&p)?;
        for r in &mut roots {
            *r = self.polish(z, *r, 8);
        }
        Ok(roots)
    }

    fn polish(&self, z: Complex64, mut m: Complex64, iters: usize) -> Complex64 {
        let mut best = (self.distance(z, m), m);
        for _ in 0..iters {
            if self.map.pole_distance(m) < POLE_TOL {
                break;
            }
            let d = self.map.complex(m, 1);
            if d.norm() == 0.0 {
                break;
            }
            let step = (self.map.complex(m, 0) - z) / d;
            m -= step;
            let r = self.distance(z, m);
            if r < best.0 {
                best = (r, m);
            }
            if step.norm() <= 1e-16 * (1.0 + m.norm()) {
                break;
            }
        }
        best.1
    }

    fn distance(&self, z: Complex64, m: Complex64) -> f64 {
        if self.map.pole_distance(m) < POLE_TOL {
            return f64::INFINITY;
        }
        (self.map.complex(m, 0) - z).norm()
    }

    /// The root in the lower half-plane for Im z > 0.
    fn select_upper(&self, z: Complex64) -> Result<Complex64> {
        let roots = self.all_roots(z)?;
        let cands: Vec<Complex64> = roots
            .into_iter()
            .filter(|m| m.im < 0.0 && self.map.defect(z, *m) < ROOT_TOL)
            .collect();
        match cands.len() {
            0 => Err(Error::NoAdmissibleRoot { re: z.re, im: z.im }),
            1 => Ok(cands[0]),
            count => {
                let firm: Vec<&Complex64> = cands
                    .iter()
                    .filter(|m| m.im < -1e-12 * (1.0 + m.norm()))
                    .collect();
                if firm.len() == 1 {
                    Ok(*firm[0])
                } else {
                    Err(Error::AmbiguousRoot {
                        re: z.re,
                        im: z.im,
                        count,
                    })
                }
            }
        }
    }

    /// Boundary value at real x, continued from x + i eps.
    fn select_real(&self, x: f64) -> Result<Complex64> {
        let eps = 1e-9 * (1.0 + x.abs());
        let start = self.select_upper(Complex64::new(x, eps))?;
        let z = Complex64::new(x, 0.0);

        let mut m = start;
        let mut best = (self.distance(z, m), m);
        for _ in 0..80 {
            if self.map.pole_distance(m) < POLE_TOL {
                break;
            }
            let d = self.map.complex(m, 1);
            if d.norm() == 0.0 {
                break;
            }
            let mut next = m - (self.map.complex(m, 0) - z) / d;
            if next.im > 0.0 {
                next.im = 0.0;
            }
            let step = (next - m).norm();
            m = next;
            let r = self.distance(z, m);
            if r < best.0 {
                best = (r, m);
            }
            if step <= 1e-16 * (1.0 + m.norm()) {
                break;
            }
        }
        let mut m = best.1;

        if m.im.abs() < 1e-4 * (1.0 + m.norm()) {
            if let Some(t) = self.real_root_near(x, m.re) {
                m = Complex64::new(t, 0.0);
            }
        }
        if self.map.pole_distance(m) < POLE_TOL {
            return Err(Error::PoleProximity {
                m: m.re,
                distance: self.map.pole_distance(m),
            });
        }
        Ok(m)
    }

    /// A real solution of g(t) = x near `t0` at which g is non-increasing,
    /// i.e. a witness that x is outside the support or on its boundary.
    fn real_root_near(&self, x: f64, t0: f64) -> Option<f64> {
        let mut t = t0;
        for _ in 0..200 {
            let d = self.map.real(t, 1);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let step = (self.map.real(t, 0) - x) / d;
            t -= step;
            if !t.is_finite() || self.map.pole_distance(Complex64::new(t, 0.0)) < POLE_TOL {
                return None;
            }
            if step.abs() <= 1e-16 * (1.0 + t.abs()) {
                break;
            }
        }
        let res = (self.map.real(t, 0) - x).abs();
        let ok_res = res <= 1e-12 * self.map.real_scale(t, 0);
        let ok_slope = self.map.real(t, 1) <= 1e-8 * self.map.real_scale(t, 1);
        let ok_near = (t - t0).abs() <= 1e-2 * (1.0 + t0.abs());
        (ok_res && ok_slope && ok_near).then_some(t)
    }

    pub fn solve(&self, z: Complex64) -> Result<StieltjesValue> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.im < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "query point must lie in the closed upper half-plane, got {z}"
            )));
        }
        let m = if z.im > 0.0 {
            self.select_upper(z)?
        } else {
            if z.re == 0.0 {
                return Err(Error::InvalidArgument("real query point must be nonzero".into()));
            }
            self.select_real(z.re)?
        };
        Ok(StieltjesValue {
            z,
            m,
            residual: self.map.defect(z, m),
        })
    }

    /// Density -Im m(x)/pi, clamped to be nonnegative.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidArgument(format!("density needs x > 0, got {x}")));
        }
        let m = self.solve(Complex64::new(x, 0.0))?.m;
        let rho = -m.im / std::f64::consts::PI;
        Ok(if rho < 1e-13 { 0.0 } else { rho })
    }
}

fn mul_linear(p: &[Complex64], a: f64) -> Vec<Complex64> {
    // p(m) * (1 + a m)
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i] += c;
        out[i + 1] += c * a;
    }
    out
}

/// Roots of a polynomial given by ascending coefficients, as eigenvalues of
/// its companion matrix.
pub fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[d];
    if d == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }
    let c = Mat::<Complex64>::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -coeffs[i] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    c.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))
}

pub fn solve_stieltjes(spec: &PopulationSpectrum, z: Complex64) -> Result<StieltjesValue> {
    StieltjesSolver::new(spec).solve(z)
}
