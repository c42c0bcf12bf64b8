//! Sampling of complex correlated Wishart matrices and empirical edge statistics.

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues of M = (1/N) X diag(lambdas) X^* with X an N x n standard complex Gaussian
/// matrix, ascending. The generator is seeded by `seed` and uses `replica` as its stream.
pub fn sample_eigenvalues(lambdas: &[f64], big_n: usize, seed: u64, replica: u64) -> Result<Vec<f64>> {
    let n = lambdas.len();
    if big_n == 0 || n == 0 {
        return Err(Error::InvalidArgument("N and n must be positive".into()));
    }
    if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument("population eigenvalues must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    // Y = X diag(sqrt(lambda)), filled column by column.
    let mut y = Mat::<Complex64>::zeros(big_n, n);
    for j in 0..n {
        let s = lambdas[j].sqrt() * half;
        for i in 0..big_n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            y[(i, j)] = Complex64::new(s * re, s * im);
        }
    }
    let scale = Complex64::new(1.0 / big_n as f64, 0.0);
    let (gram, zeros) = if n >= big_n {
        (&y * y.adjoint(), 0)
    } else {
        (y.adjoint() * &y, big_n - n)
    };
    let gram = Mat::<Complex64>::from_fn(gram.nrows(), gram.ncols(), |i, j| gram[(i, j)] * scale);
    let mut ev = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    for v in ev.iter_mut() {
        *v = v.max(0.0);
    }
    let mut out = vec![0.0; zeros];
    out.extend(ev);
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// What is collected from each replica.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Mode {
    /// N^2 sigma_N x_min, with x_min the smallest eigenvalue not forced to vanish.
    HardEdge { sigma_n: f64 },
    /// N^{3/4} sigma_N (x_i - a_N) for eigenvalues with rescaled value in [-window, window].
    Cusp { a_n: f64, sigma_n: f64, window: f64 },
    /// All eigenvalues.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRun {
    pub seed: u64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub reps: usize,
    pub mode: Mode,
    /// One entry per replica: the scaled smallest eigenvalue (hard edge), the rescaled
    /// eigenvalues in the window (cusp) or the full spectrum (global).
    pub samples: Vec<Vec<f64>>,
}

/// Runs `reps` independent replicas in parallel; results are ordered by replica index.
pub fn simulate(lambdas: &[f64], big_n: usize, reps: usize, seed: u64, mode: Mode) -> Result<SimulationRun> {
    let n = lambdas.len();
    let skip = big_n.saturating_sub(n);
    let samples = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let ev = sample_eigenvalues(lambdas, big_n, seed, r)?;
            Ok(match mode {
                Mode::HardEdge { sigma_n } => {
                    vec![(big_n * big_n) as f64 * sigma_n * ev[skip]]
                }
                Mode::Cusp { a_n, sigma_n, window } => {
                    let k = (big_n as f64).powf(0.75) * sigma_n;
                    ev.iter()
                        .map(|x| k * (x - a_n))
                        .filter(|u| u.abs() <= window)
                        .collect()
                }
                Mode::Global => ev,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationRun {
        seed,
        big_n,
        n,
        lambdas: lambdas.to_vec(),
        reps,
        mode,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub s: f64,
    pub p: f64,
    pub stderr: f64,
}

/// Empirical P(N^2 sigma_N x_min >= s) with binomial standard errors.
pub fn empirical_smallest_cdf(run: &SimulationRun, s_grid: &[f64]) -> Result<Vec<SurvivalPoint>> {
    if !matches!(run.mode, Mode::HardEdge { .. }) {
        return Err(Error::InvalidArgument("run was not collected in hard-edge mode".into()));
    }
    let mut xs: Vec<f64> = run.samples.iter().map(|v| v[0]).collect();
    xs.sort_by(f64::total_cmp);
    let total = xs.len() as f64;
    Ok(s_grid
        .iter()
        .map(|&s| {
            let below = xs.partition_point(|&x| x < s);
            let p = (xs.len() - below) as f64 / total;
            SurvivalPoint {
                s,
                p,
                stderr: (p * (1.0 - p) / total).sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountStatistics {
    pub mean: f64,
    pub stderr: f64,
    pub variance: f64,
}

/// Mean number of rescaled eigenvalues in [s, t] per replica.
pub fn empirical_cusp_counts(run: &SimulationRun, window: (f64, f64)) -> Result<CountStatistics> {
    let Mode::Cusp { window: w, .. } = run.mode else {
        return Err(Error::InvalidArgument("run was not collected in cusp mode".into()));
    };
    let (s, t) = window;
    if !(s <= t && s >= -w && t <= w) {
        return Err(Error::InvalidArgument(format!(
            "window ({s}, {t}) must lie inside the collected range [-{w}, {w}]"
        )));
    }
    if s == t {
        return Ok(CountStatistics {
            mean: 0.0,
            stderr: 0.0,
            variance: 0.0,
        });
    }
    let counts: Vec<f64> = run
        .samples
        .iter()
        .map(|v| v.iter().filter(|u| **u >= s && **u <= t).count() as f64)
        .collect();
    let k = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / k;
    let variance = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    Ok(CountStatistics {
        mean,
        stderr: (variance / k).sqrt(),
        variance,
    })
}

/// Kolmogorov-Smirnov distance between the pooled eigenvalues above `floor` and a reference
/// distribution function.
pub fn ks_distance(run: &SimulationRun, floor: f64, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = run.samples.iter().flatten().cloned().filter(|x| *x > floor).collect();
    xs.sort_by(f64::total_cmp);
    let k = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / k).abs().max((f - (i + 1) as f64 / k).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case_is_exponential() {
        let reps = 100_000u64;
        let mean = (0..reps)
            .map(|r| sample_eigenvalues(&[1.0], 1, 9, r).unwrap()[0])
            .sum::<f64>()
            / reps as f64;
        assert!((mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn trace_identity() {
        let lambdas = [1.0, 1.0, 2.0, 3.0, 3.0];
        let reps = 4000u64;
        let traces: Vec<f64> = (0..reps)
            .map(|r| sample_eigenvalues(&lambdas, 8, 3, r).unwrap().iter().sum())
            .collect();
        let m = traces.iter().sum::<f64>() / reps as f64;
        let v = traces.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((m - 10.0).abs() < 3.0 * (v / reps as f64).sqrt());
    }

    #[test]
    fn forced_zeros_and_determinism() {
        let ev = sample_eigenvalues(&[1.0, 2.0, 3.0], 7, 1, 0).unwrap();
        assert_eq!(ev.len(), 7);
        assert_eq!(ev.iter().filter(|x| **x < 1e-10).count(), 4);
        let a = simulate(&[1.0; 5], 5, 20, 42, Mode::Global).unwrap();
        let b = simulate(&[1.0; 5], 5, 20, 42, Mode::Global).unwrap();
        assert_eq!(a, b);
        let c = simulate(&[1.0; 5], 5, 20, 43, Mode::Global).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn survival_and_counts() {
        let run = simulate(&[1.0; 12], 10, 500, 5, Mode::HardEdge { sigma_n: 4.8 }).unwrap();
        let surv = empirical_smallest_cdf(&run, &[0.0, 0.5, 1.0, 4.0]).unwrap();
        assert_eq!(surv[0].p, 1.0);
        assert!(surv.windows(2).all(|w| w[1].p <= w[0].p));
        let cusp = simulate(
            &[1.0; 12],
            10,
            200,
            5,
            Mode::Cusp {
                a_n: 1.0,
                sigma_n: 1.0,
                window: 3.0,
            },
        )
        .unwrap();
        assert_eq!(empirical_cusp_counts(&cusp, (1.0, 1.0)).unwrap().mean, 0.0);
        assert!(empirical_cusp_counts(&cusp, (-4.0, 1.0)).is_err());
    }
}
