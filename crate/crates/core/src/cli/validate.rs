//! Numerical self-checks run by the `validate` command.

use std::f64::consts::PI;

use serde::Serialize;

use crate::edge_analysis::{cusps, hard_edge, tune_exact_cusp};
use crate::error::Result;
use crate::fredholm::{f_alpha, fredholm_det, hard_edge_prediction, finite_hard_edge_det, s_df_ds};
use crate::kernels::{
    bessel_kernel, bessel_kernel_contour, CuspKernel, CuspKernelIntegrand, HardEdgeKernelSpec,
    KernelEvaluator, PearceyKernel, PearceyParams,
};
use crate::spectral_model::{density, PopulationSpectrum};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn outcome(name: &'static str, r: Result<(bool, String)>) -> CheckOutcome {
    match r {
        Ok((pass, detail)) => CheckOutcome { name, pass, detail },
        Err(e) => CheckOutcome {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn mp_density(points: usize) -> Result<(bool, String)> {
    let mp = PopulationSpectrum::dirac(1.0, 1.0)?;
    let mut sup: f64 = 0.0;
    for i in 0..points {
        let x = 0.1 + 3.8 * i as f64 / (points - 1) as f64;
        let exact = ((4.0 - x) / x).sqrt() / (2.0 * PI);
        sup = sup.max((density(&mp, x)? - exact).abs());
    }
    Ok((sup < 1e-8, format!("sup error {sup:.3e}")))
}

fn two_atom_cusp() -> Result<(bool, String)> {
    let spec = PopulationSpectrum::from_pairs(0.33731678219683325, &[1.0, 3.0], &[0.7, 0.3])?;
    let found = cusps(&spec)?;
    let Some(c) = found.first() else {
        return Ok((false, "no cusp found".into()));
    };
    let rho = density(&spec, c.a)?;
    let ok = found.len() == 1 && rho < 1e-6 && c.c > 1.0 / 3.0 && c.c < 1.0;
    Ok((ok, format!("a = {:.10}, c = {:.10}, rho(a) = {rho:.2e}", c.a, c.c)))
}

fn pearcey_dual(taus: &[f64]) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let grid = [-3.0, -1.5, 0.0, 1.5, 3.0];
    for &tau in taus {
        let k = PearceyKernel::new(PearceyParams::new(tau))?;
        for &x in &grid {
            for &y in &grid {
                let f = k.eval_functions(x, y)?;
                worst = worst.max((f - k.eval_contour(x, y)?).abs());
                sym = sym.max((f - k.eval_functions(-x, -y)?).abs());
            }
        }
    }
    Ok((
        worst < 1e-8 && sym < 1e-10,
        format!("representation gap {worst:.2e}, symmetry {sym:.2e}"),
    ))
}

fn bessel_contour() -> Result<(bool, String)> {
    let a = bessel_kernel(0, 1.0, 2.0)?;
    let b = bessel_kernel_contour(0, 1.0, 2.0, 1.0, 2.0, 256)?;
    Ok(((a - b).abs() < 1e-10, format!("difference {:.2e}", (a - b).abs())))
}

struct Outer;

impl KernelEvaluator for Outer {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(x * y)
    }
}

fn rank_one() -> Result<(bool, String)> {
    let d = fredholm_det(&Outer, 0.0, 1.0, 16)?.value;
    let err = (d - 2.0 / 3.0).abs();
    Ok((err < 1e-12, format!("error {err:.2e}")))
}

fn tracy_widom(alphas: &[i32], ss: &[f64]) -> Result<(bool, String)> {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for &alpha in alphas {
        for &s in ss {
            let fd = s * (f_alpha(alpha, s + h, 40)?.value - f_alpha(alpha, s - h, 40)?.value) / (2.0 * h);
            worst = worst.max((s_df_ds(alpha, s, 40)? - fd).abs());
        }
    }
    Ok((worst < 1e-6, format!("max deviation {worst:.2e}")))
}

fn expansion_order(alphas: &[i32], ss: &[f64]) -> Result<(bool, String)> {
    let identity = PopulationSpectrum::dirac(1.0, 1.0)?;
    let mut ratios = Vec::new();
    for &alpha in alphas {
        for &s in ss {
            let mut res = Vec::new();
            for big_n in [50usize, 100, 200] {
                let c = hard_edge(&identity, big_n, alpha)?;
                let fam = identity
                    .clone()
                    .with_finite_n(big_n, (big_n as i32 + alpha) as usize)?;
                let det = finite_hard_edge_det(&HardEdgeKernelSpec::new(&fam, s)?, s, 40)?.value;
                let p = hard_edge_prediction(alpha, s, big_n, c.sigma_n, c.zeta_n, 40)?;
                res.push(det - p.prediction);
            }
            ratios.push(res[0] / res[1]);
            ratios.push(res[1] / res[2]);
        }
    }
    let ok = ratios.iter().all(|r| (3.2..=4.8).contains(r));
    let text: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Ok((ok, format!("ratios {}", text.join(" "))))
}

fn cusp_convergence() -> Result<(bool, String)> {
    let template = PopulationSpectrum::from_pairs(0.33731678219683325, &[1.0, 3.0], &[0.7, 0.3])?;
    let pe = PearceyKernel::new(PearceyParams::new(0.0))?;
    let xs: Vec<f64> = (0..13).map(|i| -3.0 + 0.5 * i as f64).collect();
    let limit = pe.matrix(&xs, &xs)?;
    let mut sups = Vec::new();
    for big_n in [50usize, 100, 200] {
        let (spec, seq) = tune_exact_cusp(&template, big_n, 1)?;
        let it = CuspKernelIntegrand::new(&spec, seq.c_n, seq.a_n)?;
        let k = CuspKernel::tuned(it, seq.sigma_n, 3.0, 256)?.matrix(&xs, &xs)?;
        let mut sup: f64 = 0.0;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                sup = sup.max((k[(i, j)] - limit[(i, j)]).abs());
            }
        }
        sups.push(sup);
    }
    let ok = sups.windows(2).all(|w| w[1] < w[0]);
    let text: Vec<String> = sups.iter().map(|r| format!("{r:.4}")).collect();
    Ok((ok, format!("sup errors {}", text.join(" "))))
}

/// Runs the self-check suite; `quick` trims the parameter panels.
pub fn run_checks(quick: bool) -> Vec<CheckOutcome> {
    let mut out = vec![
        outcome("mp_density", mp_density(if quick { 80 } else { 400 })),
        outcome("two_atom_cusp", two_atom_cusp()),
        outcome(
            "pearcey_dual",
            pearcey_dual(if quick { &[0.0] } else { &[-2.0, 0.0, 2.0] }),
        ),
        outcome("bessel_contour", bessel_contour()),
        outcome("fredholm_rank_one", rank_one()),
    ];
    if quick {
        out.push(outcome("tracy_widom_identity", tracy_widom(&[0, 1], &[2.0])));
        out.push(outcome("hard_edge_order", expansion_order(&[1], &[1.0])));
    } else {
        out.push(outcome(
            "tracy_widom_identity",
            tracy_widom(&[-1, 0, 1, 2], &[1.0, 2.0, 4.0]),
        ));
        out.push(outcome("hard_edge_order", expansion_order(&[1, 2], &[1.0, 4.0])));
        out.push(outcome("cusp_kernel_convergence", cusp_convergence()));
    }
    out
}
