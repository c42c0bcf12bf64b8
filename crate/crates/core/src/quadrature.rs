//! Gauss-Legendre rules and contour discretisation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights of an interval quadrature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// Gauss-Legendre rule with `order` nodes on [a, b].
    pub fn gauss_legendre(a: f64, b: f64, order: usize) -> Self {
        let (x, w) = gauss_legendre_unit(order);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| half * v).collect(),
            order,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[n - 1 - i] = t;
        x[i] = -t;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// P_n(t) and P_n'(t) by the three-term recurrence.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Quadrature nodes `z` with complex weights `dz` along a contour.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContourNodes {
    pub z: Vec<Complex64>,
    pub dz: Vec<Complex64>,
}

impl ContourNodes {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn extend(&mut self, other: ContourNodes) {
        self.z.extend(other.z);
        self.dz.extend(other.dz);
    }

    pub fn reversed(mut self) -> Self {
        for d in &mut self.dz {
            *d = -*d;
        }
        self
    }

    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.z.iter().zip(&self.dz).map(|(z, d)| f(*z) * d).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContourPiece {
    /// Counter-clockwise circle.
    Circle { center: [f64; 2], radius: f64 },
    Segment { from: [f64; 2], to: [f64; 2] },
    /// Arc of a circle from angle `theta0` to `theta1`.
    Arc {
        center: [f64; 2],
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

/// Piecewise contour description; circles use the periodic trapezoid rule,
/// segments and arcs use Gauss-Legendre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    pub pieces: Vec<ContourPiece>,
    pub nodes_per_piece: usize,
}

fn c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_piece < 16 {
            return Err(Error::InvalidArgument("contours need at least 16 nodes per piece".into()));
        }
        for p in &self.pieces {
            let r = match p {
                ContourPiece::Circle { radius, .. } | ContourPiece::Arc { radius, .. } => *radius,
                ContourPiece::Segment { .. } => 1.0,
            };
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!("contour radius must be positive, got {r}")));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> Result<ContourNodes> {
        self.validate()?;
        let mut out = ContourNodes::default();
        for p in &self.pieces {
            out.extend(match *p {
                ContourPiece::Circle { center, radius } => {
                    circle(c(center), radius, self.nodes_per_piece)
                }
                ContourPiece::Segment { from, to } => segment(c(from), c(to), self.nodes_per_piece),
                ContourPiece::Arc {
                    center,
                    radius,
                    theta0,
                    theta1,
                } => arc(c(center), radius, theta0, theta1, self.nodes_per_piece),
            });
        }
        Ok(out)
    }
}

/// Periodic trapezoid rule on a counter-clockwise circle.
pub fn circle(center: Complex64, radius: f64, n: usize) -> ContourNodes {
    let mut out = ContourNodes::default();
    for k in 0..n {
        let theta = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        let e = Complex64::from_polar(1.0, theta);
        out.z.push(center + radius * e);
        out.dz.push(Complex64::new(0.0, 2.0 * PI * radius / n as f64) * e);
    }
    out
}

pub fn segment(from: Complex64, to: Complex64, n: usize) -> ContourNodes {
    let (x, w) = gauss_legendre_unit(n);
    let half = 0.5 * (to - from);
    let mid = 0.5 * (to + from);
    ContourNodes {
        z: x.iter().map(|t| mid + half * t).collect(),
        dz: w.iter().map(|v| half * v).collect(),
    }
}

pub fn arc(center: Complex64, radius: f64, theta0: f64, theta1: f64, n: usize) -> ContourNodes {
    let (x, w) = gauss_legendre_unit(n);
    let half = 0.5 * (theta1 - theta0);
    let mid = 0.5 * (theta1 + theta0);
    let mut out = ContourNodes::default();
    for (t, v) in x.iter().zip(&w) {
        let e = Complex64::from_polar(1.0, mid + half * t);
        out.z.push(center + radius * e);
        out.dz.push(Complex64::new(0.0, radius * half * v) * e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        for n in [8, 20, 40, 80, 160] {
            let r = QuadratureRule::gauss_legendre(0.0, 2.0, n);
            for deg in 0..(2 * n).min(60) {
                let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
                let got = r.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13 * exact.max(1.0), "n={n} deg={deg}");
            }
            assert!(r.weights.iter().all(|w| *w > 0.0));
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn circle_gives_residues() {
        let z0 = Complex64::new(0.3, -0.2);
        let nodes = circle(Complex64::new(0.0, 0.0), 1.0, 64);
        let v = nodes.integrate(|z| 1.0 / (z - z0));
        assert!((v - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
        let v = nodes.integrate(|z| z.exp());
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn arc_and_segments_close_a_loop() {
        // Upper half disc boundary: segment [-1, 1] then the arc back.
        let spec = ContourSpec {
            pieces: vec![
                ContourPiece::Segment {
                    from: [-1.0, 0.0],
                    to: [1.0, 0.0],
                },
                ContourPiece::Arc {
                    center: [0.0, 0.0],
                    radius: 1.0,
                    theta0: 0.0,
                    theta1: PI,
                },
            ],
            nodes_per_piece: 40,
        };
        let nodes = spec.nodes().unwrap();
        let z0 = Complex64::new(0.1, 0.4);
        let v = nodes.integrate(|z| 1.0 / (z - z0));
        assert!((v - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-10);
    }

    #[test]
    fn contour_spec_validation() {
        let bad = ContourSpec {
            pieces: vec![ContourPiece::Circle {
                center: [0.0, 0.0],
                radius: 1.0,
            }],
            nodes_per_piece: 8,
        };
        assert!(bad.nodes().is_err());
        let json = r#"{"pieces":[{"kind":"circle","center":[0,0],"radius":-1}],"nodes_per_piece":32}"#;
        let spec: ContourSpec = serde_json::from_str(json).unwrap();
        assert!(spec.validate().is_err());
    }
}
