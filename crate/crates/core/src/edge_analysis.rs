//! Soft edges, cusp points and the hard edge, with the finite-size scaling constants.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral_model::{
    critical_points_with, density, CriticalKind, CriticalPoint, InverseMap, PopulationSpectrum,
    DEFAULT_SCAN_POINTS,
};

/// Minimal distance from a cusp preimage to the poles 1/lambda_j below which a warning is issued.
pub const REGULARITY_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftEdgeDescriptor {
    pub a: f64,
    pub c: f64,
    pub g2: f64,
    pub side: Side,
    /// Coefficient C in rho(x) ~ C |x - a|^{1/2}.
    pub sqrt_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspDescriptor {
    pub a: f64,
    pub c: f64,
    pub g3: f64,
    pub sigma_limit: f64,
    pub kappa: Option<f64>,
    pub tau: Option<f64>,
    /// Coefficient C in rho(x) ~ C |x - a|^{1/3}.
    pub cube_root_coefficient: f64,
    /// Distance from c to the nearest pole 1/lambda_j.
    pub pole_distance: f64,
    pub warnings: Vec<String>,
}

impl CuspDescriptor {
    /// Attach kappa from a finite-size family; tau = -kappa (6/g3)^{1/2}.
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self.tau = Some(tau_from_kappa(kappa, self.g3));
        self
    }
}

pub fn tau_from_kappa(kappa: f64, g3: f64) -> f64 {
    -kappa * (6.0 / g3).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardEdgeConstants {
    pub present: bool,
    /// g'(infinity) = 1 - gamma.
    pub g1_inf: f64,
    pub g2_inf: f64,
    /// Coefficient C in rho(x) ~ C x^{-1/2} as x -> 0+ when the hard edge is present.
    pub blowup_coeff: f64,
    pub sigma_n: f64,
    pub zeta_n: f64,
    pub alpha: i32,
    pub big_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteNCuspSequence {
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub c_n: f64,
    pub a_n: f64,
    pub sigma_n: f64,
    pub kappa_n: f64,
    pub g1_n: f64,
    pub g2_n: f64,
    pub g3_n: f64,
    pub pole_distance: f64,
    pub warnings: Vec<String>,
}

/// Real critical points of g with their classification.
pub fn find_critical_points(spec: &PopulationSpectrum) -> (Vec<CriticalPoint>, Vec<String>) {
    critical_points_with(spec, DEFAULT_SCAN_POINTS)
}

/// Soft edges: critical points with g'' bounded away from zero.
pub fn soft_edges(spec: &PopulationSpectrum) -> Vec<SoftEdgeDescriptor> {
    let (points, _) = find_critical_points(spec);
    points
        .into_iter()
        .filter(|p| p.kind == CriticalKind::SoftEdge && p.g2.abs() > 1e-8)
        .map(|p| SoftEdgeDescriptor {
            a: p.value,
            c: p.m,
            g2: p.g2,
            side: if p.g2 > 0.0 { Side::Right } else { Side::Left },
            sqrt_coefficient: (2.0 / p.g2.abs()).sqrt() / PI,
        })
        .collect()
}

fn pole_distance(spec: &PopulationSpectrum, c: f64) -> f64 {
    spec.poles().iter().map(|p| (c - p).abs()).fold(f64::INFINITY, f64::min)
}

/// Newton on g'' from `seed`, kept inside the pole gap containing the seed.
fn inflection(map: &InverseMap, poles: &[f64], seed: f64) -> Result<f64> {
    let lo = poles.iter().cloned().filter(|p| *p < seed).fold(f64::NEG_INFINITY, f64::max);
    let hi = poles.iter().cloned().filter(|p| *p > seed).fold(f64::INFINITY, f64::min);
    let mut c = seed;
    let mut history = Vec::new();
    for _ in 0..100 {
        let g2 = map.real(c, 2);
        let g3 = map.real(c, 3);
        history.push(g2);
        let step = g2 / g3;
        let next = c - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            return Err(Error::NewtonFailure {
                what: format!("g'' = 0 left the pole gap ({lo}, {hi})"),
                residuals: history,
            });
        }
        c = next;
        if step.abs() <= 1e-15 * c.abs().max(1.0) {
            break;
        }
    }
    let res = map.real(c, 2);
    let scale = 2.0 / c.abs().powi(3);
    if res.abs() > 1e-10 * scale.max(1.0) {
        history.push(res);
        return Err(Error::NewtonFailure {
            what: "g'' = 0 did not converge".into(),
            residuals: history,
        });
    }
    Ok(c)
}

/// Descriptor of the cusp with preimage near `c`.
pub fn classify_cusp(spec: &PopulationSpectrum, c: f64) -> Result<CuspDescriptor> {
    let map = InverseMap::new(spec);
    let c = inflection(&map, &spec.poles(), c)?;
    let g1 = map.real(c, 1);
    let g3 = map.real(c, 3);
    let tol = 1e-8 * (1.0 + g3.abs() * c.abs());
    if g1.abs() > tol {
        return Err(Error::InvalidArgument(format!(
            "g'({c}) = {g1:e} is not zero: no cusp here"
        )));
    }
    if g3 <= 0.0 {
        return Err(Error::NonPositiveThirdDerivative { g3 });
    }
    let dist = pole_distance(spec, c);
    let mut warnings = Vec::new();
    if dist <= REGULARITY_MARGIN {
        warnings.push(format!("cusp preimage {c} within {dist:e} of a pole"));
    }
    Ok(CuspDescriptor {
        a: map.real(c, 0),
        c,
        g3,
        sigma_limit: (6.0 / g3).powf(0.25),
        kappa: None,
        tau: None,
        cube_root_coefficient: 3f64.sqrt() / (2.0 * PI) * (6.0 / g3).powf(1.0 / 3.0),
        pole_distance: dist,
        warnings,
    })
}

/// All cusps of the spectrum.
pub fn cusps(spec: &PopulationSpectrum) -> Result<Vec<CuspDescriptor>> {
    let (points, _) = find_critical_points(spec);
    points
        .iter()
        .filter(|p| p.kind == CriticalKind::CuspCandidate)
        .map(|p| classify_cusp(spec, p.m))
        .collect()
}

/// Hard-edge constants for dimensions N x n with n = N + alpha.
pub fn hard_edge(spec: &PopulationSpectrum, big_n: usize, alpha: i32) -> Result<HardEdgeConstants> {
    let n = big_n as i64 + alpha as i64;
    if n <= 0 {
        return Err(Error::InvalidArgument(format!("n = N + alpha = {n} must be positive")));
    }
    let fin = spec.clone().with_finite_n(big_n, n as usize)?;
    let lam = fin.expanded_lambdas().expect("finite_n present");
    let g2_inf = -2.0 * spec.gamma() * spec.moment(-1);
    let nn = big_n as f64;
    Ok(HardEdgeConstants {
        present: (spec.gamma() - 1.0).abs() < 1e-12,
        g1_inf: 1.0 - spec.gamma(),
        g2_inf,
        blowup_coeff: (-g2_inf / 2.0).sqrt() / PI,
        sigma_n: 4.0 / nn * lam.iter().map(|l| 1.0 / l).sum::<f64>(),
        zeta_n: 8.0 / nn * lam.iter().map(|l| 1.0 / (l * l)).sum::<f64>(),
        alpha,
        big_n,
    })
}

/// Inflection point c_N of g_N near the limiting preimage `c_seed`.
pub fn finite_n_cusp(spec: &PopulationSpectrum, c_seed: f64) -> Result<FiniteNCuspSequence> {
    let f = spec
        .finite_n()
        .ok_or_else(|| Error::InvalidArgument("finite_n data required".into()))?;
    let view = spec.finite_view()?;
    let map = InverseMap::new(&view);
    let c = inflection(&map, &view.poles(), c_seed)?;
    let g3 = map.real(c, 3);
    if g3 <= 0.0 {
        return Err(Error::NonPositiveThirdDerivative { g3 });
    }
    let g1 = map.real(c, 1);
    let dist = pole_distance(&view, c);
    let mut warnings = Vec::new();
    if dist <= REGULARITY_MARGIN {
        warnings.push(format!("c_N = {c} within {dist:e} of a pole"));
    }
    Ok(FiniteNCuspSequence {
        big_n: f.big_n,
        n: f.n,
        c_n: c,
        a_n: map.real(c, 0),
        sigma_n: (6.0 / g3).powf(0.25),
        kappa_n: (f.big_n as f64).sqrt() * g1,
        g1_n: g1,
        g2_n: map.real(c, 2),
        g3_n: g3,
        pole_distance: dist,
        warnings,
    })
}

/// Moves the atom `tunable` of `template` so that g_N has an exact cusp at size N with
/// n = round(gamma N). Both g'_N and g''_N vanish at c_N after a 2D Newton solve in
/// (lambda, c_N). The weights are integers over n at finite size, so the atom location
/// rather than a weight is the continuous parameter.
pub fn tune_exact_cusp(
    template: &PopulationSpectrum,
    big_n: usize,
    tunable: usize,
) -> Result<(PopulationSpectrum, FiniteNCuspSequence)> {
    if template.atoms().len() < 2 || tunable >= template.atoms().len() {
        return Err(Error::InvalidArgument(
            "tuning needs at least two atoms and a valid atom index".into(),
        ));
    }
    let limit = cusps(template)?;
    let seed = limit
        .first()
        .ok_or_else(|| Error::InvalidArgument("template has no cusp to seed from".into()))?;
    let n = (template.gamma() * big_n as f64).round() as usize;
    let base = template.clone().with_finite_n(big_n, n)?;
    let view = base.finite_view()?;
    let mut map = InverseMap::new(&view);
    let idx = view
        .lambdas()
        .iter()
        .position(|&l| l == template.atoms()[tunable].lambda)
        .ok_or_else(|| Error::InvalidArgument("tunable atom receives no eigenvalues".into()))?;

    let mut c = seed.c;
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..60 {
        let (f1, f2) = (map.real(c, 1), map.real(c, 2));
        residuals.push(f1.hypot(f2));
        let lam = map.lambdas[idx];
        let w = map.weights[idx];
        let om = 1.0 - c * lam;
        // d/dlambda of k! gamma w (lambda / (1 - c lambda))^{k+1}
        let dl = |k: usize, fact: f64| {
            fact * map.gamma * w * (k as f64 + 1.0) * lam.powi(k as i32) / om.powi(k as i32 + 2)
        };
        let (j11, j12) = (map.real(c, 2), dl(1, 1.0));
        let (j21, j22) = (map.real(c, 3), dl(2, 2.0));
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dc = (f1 * j22 - f2 * j12) / det;
        let dlam = (j11 * f2 - j21 * f1) / det;
        c -= dc;
        map.lambdas[idx] = lam - dlam;
        if dc.abs() < 1e-16 * c.abs() && dlam.abs() < 1e-16 * lam.abs() {
            converged = true;
            break;
        }
        if f1.hypot(f2) < 1e-14 && dc.abs() < 1e-14 && dlam.abs() < 1e-13 {
            converged = true;
        }
    }
    let (f1, f2) = (map.real(c, 1), map.real(c, 2));
    residuals.push(f1.hypot(f2));
    if !converged && f1.abs().max(f2.abs()) > 1e-12 {
        return Err(Error::NewtonFailure {
            what: "exact finite-size cusp tuning".into(),
            residuals,
        });
    }
    let mut atoms = template.atoms().to_vec();
    atoms[tunable].lambda = map.lambdas[idx];
    let tuned = PopulationSpectrum::new(template.gamma(), atoms)?.with_finite_n(big_n, n)?;
    let seq = finite_n_cusp(&tuned, c)?;
    Ok((tuned, seq))
}

/// Aspect ratios at which the population measure produces a cusp. In every gap between
/// consecutive positive poles, solves sum w (lam/(1-c lam))^2 + c sum w (lam/(1-c lam))^3 = 0
/// and returns (gamma, c) with gamma = 1 / (c^2 sum w (lam/(1-c lam))^2).
pub fn cusp_gammas(lambdas: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    let s = |m: f64, k: i32| -> f64 {
        lambdas
            .iter()
            .zip(weights)
            .map(|(l, w)| w * (l / (1.0 - m * l)).powi(k))
            .sum()
    };
    let h = |m: f64| s(m, 2) + m * s(m, 3);
    let mut poles: Vec<f64> = lambdas.iter().map(|l| 1.0 / l).collect();
    poles.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for p in poles.windows(2) {
        let (lo, hi) = (p[0], p[1]);
        let width = hi - lo;
        let grid: Vec<f64> = (1..2048).map(|i| lo + width * i as f64 / 2048.0).collect();
        for w in grid.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            if h(a).signum() == h(b).signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if h(mid).signum() == h(a).signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let c = 0.5 * (a + b);
            let gamma = 1.0 / (c * c * s(c, 2));
            out.push((gamma, c));
        }
    }
    out
}

/// Least-squares fit of log rho(center + dir * delta) against log delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub prefactor: f64,
}

/// Fits rho(center + dir * delta) ~ C delta^p on log-spaced delta in [lo, hi].
pub fn fit_power_law(
    spec: &PopulationSpectrum,
    center: f64,
    dir: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<PowerLawFit> {
    if !(0.0 < lo && lo < hi) || points < 2 {
        return Err(Error::InvalidArgument("need 0 < lo < hi and two points".into()));
    }
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let delta = (lo.ln() + t * (hi / lo).ln()).exp();
        let rho = density(spec, center + dir.signum() * delta)?;
        if rho <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "density vanishes at offset {delta:e}: not inside the support"
            )));
        }
        xs.push(delta.ln());
        ys.push(rho.ln());
    }
    let k = points as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(PowerLawFit {
        slope,
        prefactor: (my - slope * mx).exp(),
    })
}
