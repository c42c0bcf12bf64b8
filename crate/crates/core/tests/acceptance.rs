//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rmtedge::edge_analysis::{cusp_gammas, cusps, fit_power_law, hard_edge, tune_exact_cusp};
use rmtedge::fredholm::{
    f_alpha, finite_hard_edge_det, fredholm_det, hard_edge_prediction, pearcey_gap, s_df_ds,
};
use rmtedge::kernels::{
    BesselKernel, CuspKernel, CuspKernelIntegrand, ExpansionKernel, HardEdgeKernel,
    HardEdgeKernelSpec, KernelEvaluator, PearceyKernel, PearceyParams,
};
use rmtedge::montecarlo::{empirical_smallest_cdf, simulate, Mode};
use rmtedge::spectral_model::{density, support, PopulationSpectrum};
use rmtedge::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// g'''(m) straight from the closed form of g, used as an independent oracle.
fn g3_oracle(gamma: f64, lambdas: &[f64], weights: &[f64], m: f64) -> f64 {
    let s: f64 = lambdas
        .iter()
        .zip(weights)
        .map(|(l, w)| w * (l / (1.0 - m * l)).powi(4))
        .sum();
    6.0 * (-1.0 / m.powi(4) + gamma * s)
}

fn g_oracle(gamma: f64, lambdas: &[f64], weights: &[f64], m: f64) -> f64 {
    let s: f64 = lambdas.iter().zip(weights).map(|(l, w)| w * l / (1.0 - m * l)).sum();
    1.0 / m + gamma * s
}

const TWO_ATOM_LAMBDAS: [f64; 2] = [1.0, 3.0];
const TWO_ATOM_WEIGHTS: [f64; 2] = [0.7, 0.3];

fn cusp_gamma() -> f64 {
    // the cusp-producing gamma closest to 0.336 for 0.7 delta_1 + 0.3 delta_3
    cusp_gammas(&TWO_ATOM_LAMBDAS, &TWO_ATOM_WEIGHTS)
        .into_iter()
        .map(|(g, _)| g)
        .min_by(|a, b| (a - 0.336).abs().total_cmp(&(b - 0.336).abs()))
        .expect("a cusp gamma exists")
}

fn two_atom() -> Result<PopulationSpectrum> {
    PopulationSpectrum::from_pairs(cusp_gamma(), &TWO_ATOM_LAMBDAS, &TWO_ATOM_WEIGHTS)
}

fn mp_oracle() -> Result<Outcome> {
    let t = Instant::now();
    let mp = PopulationSpectrum::dirac(1.0, 1.0)?;
    let mut sup: f64 = 0.0;
    for x in linspace(0.1, 3.9, 2001) {
        let exact = ((4.0 - x) / x).sqrt() / (2.0 * PI);
        sup = sup.max((density(&mp, x)? - exact).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(sup < 1e-8 && secs < 5.0, format!("sup error {sup:.2e} in {secs:.2} s"))
}

fn two_atom_spectrum() -> Result<Outcome> {
    let gamma = cusp_gamma();
    let spec = two_atom()?;
    let sup = support(&spec)?;
    let found = cusps(&spec)?;
    let Some(cusp) = found.first() else {
        return outcome(false, "no cusp".into());
    };
    let a = g_oracle(gamma, &TWO_ATOM_LAMBDAS, &TWO_ATOM_WEIGHTS, cusp.c);
    let inside = sup.intervals.len() == 1 && sup.intervals[0].0 < a && a < sup.intervals[0].1;
    let rho_a = density(&spec, a)?;
    let mut punctured = true;
    for d in [1e-8, 1e-6, 1e-4, 1e-2, 1e-1] {
        punctured &= density(&spec, a - d)? > 0.0 && density(&spec, a + d)? > 0.0;
    }
    let c_ok = cusp.c > 1.0 / 3.0 && cusp.c < 1.0;
    outcome(
        (gamma - 0.336).abs() < 2e-3
            && found.len() == 1
            && inside
            && rho_a < 1e-6
            && punctured
            && c_ok
            && (a - cusp.a).abs() < 1e-10,
        format!(
            "gamma {gamma:.8}, intervals {:?}, a {a:.10}, rho(a) {rho_a:.1e}, c {:.10}",
            sup.intervals, cusp.c
        ),
    )
}

fn cube_root_law() -> Result<Outcome> {
    let gamma = cusp_gamma();
    let spec = two_atom()?;
    let cusp = cusps(&spec)?.remove(0);
    let g3 = g3_oracle(gamma, &TWO_ATOM_LAMBDAS, &TWO_ATOM_WEIGHTS, cusp.c);
    let target = 3f64.sqrt() / (2.0 * PI) * (6.0 / g3).cbrt();
    let mut pass = true;
    let mut parts = Vec::new();
    for dir in [-1.0, 1.0] {
        let fit = fit_power_law(&spec, cusp.a, dir, 1e-11, 1e-9, 20)?;
        let rel = fit.prefactor / target - 1.0;
        pass &= (fit.slope - 1.0 / 3.0).abs() < 0.02 && rel.abs() < 0.01;
        parts.push(format!("side {dir:+}: slope {:.5}, prefactor rel {rel:+.2e}", fit.slope));
    }
    outcome(pass, parts.join("; "))
}

fn hard_edge_law() -> Result<Outcome> {
    let cases: [(&[f64], &[f64]); 2] = [(&[1.0], &[1.0]), (&[1.0, 2.0], &[0.5, 0.5])];
    let mut pass = true;
    let mut parts = Vec::new();
    for (lambdas, weights) in cases {
        let spec = PopulationSpectrum::from_pairs(1.0, lambdas, weights)?;
        let inv_mean: f64 = lambdas.iter().zip(weights).map(|(l, w)| w / l).sum();
        let target = inv_mean.sqrt() / PI;
        let lib = hard_edge(&spec, 100, 0)?;
        let fit = fit_power_law(&spec, 0.0, 1.0, 1e-9, 1e-7, 20)?;
        let rel = fit.prefactor / target - 1.0;
        pass &= lib.present
            && (lib.blowup_coeff / target - 1.0).abs() < 1e-12
            && (fit.slope + 0.5).abs() < 0.02
            && rel.abs() < 0.01;
        parts.push(format!("{lambdas:?}: slope {:.6}, coefficient rel {rel:+.2e}", fit.slope));
    }
    outcome(pass, parts.join("; "))
}

fn pearcey_dual() -> Result<Outcome> {
    let grid = linspace(-3.0, 3.0, 13);
    let mut gap: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut ode: f64 = 0.0;
    let h = 1e-3;
    for tau in [-2.0, 0.0, 2.0] {
        let k = PearceyKernel::new(PearceyParams::new(tau))?;
        for &x in &grid {
            for &y in &grid {
                let f = k.eval_functions(x, y)?;
                gap = gap.max((f - k.eval_contour(x, y)?).abs());
                sym = sym.max((f - k.eval_functions(-x, -y)?).abs());
            }
        }
        for &t in &[-2.0, -1.0, 0.0, 1.5, 3.0] {
            let p = |j: u32, t: f64| k.phi_complex(t, j).re;
            let q = |j: u32, t: f64| k.psi_complex(t, j).re;
            // third derivatives from a five-point stencil on the second derivatives
            let d3 = |f: &dyn Fn(f64) -> f64| {
                (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
            };
            let p3 = d3(&|s| p(2, s));
            let q3 = d3(&|s| q(2, s));
            ode = ode
                .max((p3 - tau * p(1, t) + t * p(0, t)).abs())
                .max((q3 - tau * q(1, t) - t * q(0, t)).abs())
                .max((p(3, t) - tau * p(1, t) + t * p(0, t)).abs())
                .max((q(3, t) - tau * q(1, t) - t * q(0, t)).abs());
        }
    }
    outcome(
        gap < 1e-8 && sym < 1e-10 && ode < 1e-8,
        format!("representations {gap:.2e}, symmetry {sym:.2e}, ODE residual {ode:.2e}"),
    )
}

fn cusp_kernel_convergence() -> Result<Outcome> {
    let t = Instant::now();
    let template = two_atom()?;
    let xs = linspace(-3.0, 3.0, 25);
    let limit = PearceyKernel::new(PearceyParams::new(0.0))?.matrix(&xs, &xs)?;
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
    let secs = t.elapsed().as_secs_f64();
    outcome(
        sups.windows(2).all(|w| w[1] < w[0]) && secs < 300.0,
        format!("sup errors {sups:.4?} for N = 50, 100, 200 in {secs:.1} s"),
    )
}

fn hard_edge_order() -> Result<Outcome> {
    let t = Instant::now();
    let mut ratios = Vec::new();
    let mut pass = true;
    for alpha in [1, 2] {
        for s in [1.0, 4.0] {
            let mut res = Vec::new();
            for big_n in [50usize, 100, 200] {
                let n = (big_n as i32 + alpha) as usize;
                let fam = PopulationSpectrum::dirac(1.0, 1.0)?.with_finite_n(big_n, n)?;
                // Sigma = I: sigma_N = 4n/N and zeta_N = 8n/N
                let sigma = 4.0 * n as f64 / big_n as f64;
                let zeta = 8.0 * n as f64 / big_n as f64;
                let c = hard_edge(&fam, big_n, alpha)?;
                pass &= (c.sigma_n - sigma).abs() < 1e-12 && (c.zeta_n - zeta).abs() < 1e-12;
                let det = finite_hard_edge_det(&HardEdgeKernelSpec::new(&fam, s)?, s, 40)?.value;
                let p = hard_edge_prediction(alpha, s, big_n, sigma, zeta, 40)?;
                res.push(det - p.prediction);
            }
            for (w, big_n) in res.windows(2).zip([50, 100]) {
                let r = w[0] / w[1];
                pass &= (3.2..=4.8).contains(&r);
                ratios.push(format!("a={alpha},s={s},N={big_n}: {r:.3}"));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        pass && secs < 120.0,
        format!("R_N/R_2N {} in {secs:.1} s", ratios.join(", ")),
    )
}

fn tracy_widom_identity() -> Result<Outcome> {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for alpha in [-1, 0, 1, 2] {
        for s in [1.0, 2.0, 4.0] {
            let fd = s * (f_alpha(alpha, s + h, 40)?.value - f_alpha(alpha, s - h, 40)?.value)
                / (2.0 * h);
            worst = worst.max((s_df_ds(alpha, s, 40)? - fd).abs());
        }
    }
    outcome(worst < 1e-6, format!("max deviation {worst:.2e}"))
}

struct Separable<F: Fn(f64) -> f64 + Sync, G: Fn(f64) -> f64 + Sync>(F, G);

impl<F: Fn(f64) -> f64 + Sync, G: Fn(f64) -> f64 + Sync> KernelEvaluator for Separable<F, G> {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok((self.0)(x) * (self.1)(y))
    }
}

fn fredholm_engine() -> Result<Outcome> {
    // det(I - u (x) v) = 1 - int u v
    let e = std::f64::consts::E;
    let rank_one = [
        fredholm_det(&Separable(|x| x, |y| y), 0.0, 1.0, 16)?.value - (1.0 - 1.0 / 3.0),
        fredholm_det(&Separable(f64::exp, f64::exp), 0.0, 1.0, 16)?.value
            - (1.0 - (e * e - 1.0) / 2.0),
        fredholm_det(&Separable(f64::cos, |y| 0.5 * y.cos()), 0.0, PI, 32)?.value
            - (1.0 - PI / 4.0),
        fredholm_det(&Separable(|x| x * x, |_| 1.0), -1.0, 2.0, 16)?.value - (1.0 - 3.0),
    ];
    let closed = rank_one.iter().fold(0.0f64, |m, d| m.max(d.abs()));

    let mut worst: f64 = 0.0;
    let mut names = Vec::new();
    let mut track = |name: &str, err: f64| {
        worst = worst.max(err);
        names.push(format!("{name} {err:.1e}"));
    };
    for alpha in [-1, 0, 1, 2] {
        track(&format!("Be{alpha}"), fredholm_det(&BesselKernel { alpha }, 0.0, 4.0, 40)?.error_estimate);
    }
    track(
        "expansion",
        fredholm_det(
            &ExpansionKernel {
                alpha: 2,
                sigma_n: 4.08,
                zeta_n: 8.16,
                big_n: 100,
            },
            0.0,
            4.0,
            40,
        )?
        .error_estimate,
    );
    for tau in [-2.0, 0.0, 2.0] {
        track(&format!("Pe{tau}"), pearcey_gap(tau, -2.0, 2.0, 40)?.error_estimate);
    }
    let fam = PopulationSpectrum::dirac(1.0, 1.0)?.with_finite_n(100, 102)?;
    let hard = HardEdgeKernel::new(HardEdgeKernelSpec::new(&fam, 4.0)?)?;
    track("finite hard", fredholm_det(&hard, 0.0, 4.0, 40)?.error_estimate);
    let (spec, seq) = tune_exact_cusp(&two_atom()?, 100, 1)?;
    let it = CuspKernelIntegrand::new(&spec, seq.c_n, seq.a_n)?;
    let cusp = CuspKernel::tuned(it, seq.sigma_n, 2.0, 256)?;
    track("finite cusp", fredholm_det(&cusp, -2.0, 2.0, 40)?.error_estimate);
    outcome(
        closed < 1e-12 && worst < 1e-8,
        format!("rank-one max error {closed:.1e}; self-convergence {}", names.join(", ")),
    )
}

/// Seed fixed before the first run.
const MC_SEED: u64 = 20_240_601;

fn monte_carlo() -> Result<Outcome> {
    let t = Instant::now();
    let (big_n, alpha, reps) = (100usize, 2i32, 100_000usize);
    let n = big_n + alpha as usize;
    let fam = PopulationSpectrum::dirac(1.0, 1.0)?;
    let c = hard_edge(&fam, big_n, alpha)?;
    let lambdas = vec![1.0; n];
    let run = simulate(&lambdas, big_n, reps, MC_SEED, Mode::HardEdge { sigma_n: c.sigma_n })?;
    let surv = empirical_smallest_cdf(&run, &[1.0, 4.0])?;
    let mut pass = true;
    let mut parts = Vec::new();
    for pt in surv {
        let p = hard_edge_prediction(alpha, pt.s, big_n, c.sigma_n, c.zeta_n, 40)?;
        let d_pred = (pt.p - p.prediction).abs();
        let d_plain = (pt.p - p.f_alpha).abs();
        let ok = d_pred < d_plain && d_pred < 3.0 * pt.stderr;
        pass &= ok;
        // diagnostic only: the exact finite-N gap probability and z-scores
        let spec = PopulationSpectrum::dirac(1.0, 1.0)?.with_finite_n(big_n, n)?;
        let exact = finite_hard_edge_det(&HardEdgeKernelSpec::new(&spec, pt.s)?, pt.s, 40)?.value;
        parts.push(format!(
            "s={}: empirical {:.5} +- {:.5}, prediction {:.5} (z {:+.2}), F {:.5} (z {:+.2}), \
             exact finite-N {:.5} (z {:+.2}) ({})",
            pt.s,
            pt.p,
            pt.stderr,
            p.prediction,
            (pt.p - p.prediction) / pt.stderr,
            p.f_alpha,
            (pt.p - p.f_alpha) / pt.stderr,
            exact,
            (pt.p - exact) / pt.stderr,
            if ok { "ok" } else { "miss" }
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(pass && secs < 600.0, format!("{} in {secs:.0} s", parts.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Result<Outcome>); 10] = [
        (1, "Marchenko-Pastur density oracle", mp_oracle),
        (2, "two-atom cusp spectrum", two_atom_spectrum),
        (3, "cube-root law at the cusp", cube_root_law),
        (4, "inverse square-root law at the hard edge", hard_edge_law),
        (5, "Pearcey kernel representations", pearcey_dual),
        (6, "finite-size cusp kernel convergence", cusp_kernel_convergence),
        (7, "hard-edge expansion remainder order", hard_edge_order),
        (8, "resolvent derivative identity", tracy_widom_identity),
        (9, "Fredholm engine", fredholm_engine),
        (10, "Monte Carlo hard-edge survival", monte_carlo),
    ];
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failures = 0;
    for (id, name, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {id} ({name}): {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
