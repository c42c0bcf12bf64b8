use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One atom of the population measure: mass `weight` at eigenvalue `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub lambda: f64,
    pub weight: f64,
}

/// Matrix dimensions for finite-size variants: `N` rows, `n` population eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteN {
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    gamma: f64,
    atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    finite_n: Option<FiniteN>,
}

/// Atomic population measure together with the aspect ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum", into = "RawSpectrum")]
pub struct PopulationSpectrum {
    gamma: f64,
    atoms: Vec<Atom>,
    finite_n: Option<FiniteN>,
}

impl TryFrom<RawSpectrum> for PopulationSpectrum {
    type Error = Error;

    fn try_from(raw: RawSpectrum) -> Result<Self> {
        let spec = PopulationSpectrum::new(raw.gamma, raw.atoms)?;
        match raw.finite_n {
            Some(f) => spec.with_finite_n(f.big_n, f.n),
            None => Ok(spec),
        }
    }
}

impl From<PopulationSpectrum> for RawSpectrum {
    fn from(s: PopulationSpectrum) -> Self {
        RawSpectrum {
            gamma: s.gamma,
            atoms: s.atoms,
            finite_n: s.finite_n,
        }
    }
}

impl PopulationSpectrum {
    pub fn new(gamma: f64, atoms: Vec<Atom>) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidSpectrum(format!("gamma must be positive, got {gamma}")));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidSpectrum("at least one atom is required".into()));
        }
        for a in &atoms {
            if !(a.lambda.is_finite() && a.lambda > 0.0) {
                return Err(Error::InvalidSpectrum(format!("lambda must be positive, got {}", a.lambda)));
            }
            if !(a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidSpectrum(format!("weight must be positive, got {}", a.weight)));
            }
        }
        for pair in atoms.windows(2) {
            if pair[1].lambda <= pair[0].lambda {
                return Err(Error::InvalidSpectrum(
                    "atoms must have strictly increasing lambdas".into(),
                ));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpectrum(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self {
            gamma,
            atoms,
            finite_n: None,
        })
    }

    /// Convenience constructor from parallel slices.
    pub fn from_pairs(gamma: f64, lambdas: &[f64], weights: &[f64]) -> Result<Self> {
        if lambdas.len() != weights.len() {
            return Err(Error::InvalidSpectrum("lambdas and weights differ in length".into()));
        }
        let atoms = lambdas
            .iter()
            .zip(weights)
            .map(|(&lambda, &weight)| Atom { lambda, weight })
            .collect();
        Self::new(gamma, atoms)
    }

    /// Point mass at `lambda`.
    pub fn dirac(gamma: f64, lambda: f64) -> Result<Self> {
        Self::new(gamma, vec![Atom { lambda, weight: 1.0 }])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpectrum(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum serializes")
    }

    pub fn with_finite_n(mut self, big_n: usize, n: usize) -> Result<Self> {
        if big_n == 0 || n == 0 {
            return Err(Error::InvalidSpectrum("N and n must be positive".into()));
        }
        self.finite_n = Some(FiniteN { big_n, n });
        let mult = self.multiplicities().expect("finite_n just set");
        if mult.iter().all(|&k| k == 0) {
            return Err(Error::InvalidSpectrum("no atom receives a positive multiplicity".into()));
        }
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn finite_n(&self) -> Option<FiniteN> {
        self.finite_n
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.lambda).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    /// Number of population eigenvalues carried by each atom at size `n`,
    /// by largest-remainder rounding of `weight * n`.
    pub fn multiplicities(&self) -> Option<Vec<usize>> {
        let n = self.finite_n?.n;
        Some(largest_remainder(&self.weights(), n))
    }

    /// The `n` population eigenvalues of the finite-size model, sorted.
    pub fn expanded_lambdas(&self) -> Option<Vec<f64>> {
        let mult = self.multiplicities()?;
        let mut out = Vec::with_capacity(self.finite_n?.n);
        for (a, &k) in self.atoms.iter().zip(&mult) {
            out.extend(std::iter::repeat_n(a.lambda, k));
        }
        Some(out)
    }

    /// Spectrum whose limiting quantities equal the finite-size ones:
    /// aspect ratio n/N and the empirical measure of the `n` eigenvalues.
    pub fn finite_view(&self) -> Result<Self> {
        let f = self
            .finite_n
            .ok_or_else(|| Error::InvalidArgument("spectrum has no finite_n data".into()))?;
        let mult = self.multiplicities().expect("finite_n present");
        let atoms = self
            .atoms
            .iter()
            .zip(&mult)
            .filter(|(_, &k)| k > 0)
            .map(|(a, &k)| Atom {
                lambda: a.lambda,
                weight: k as f64 / f.n as f64,
            })
            .collect::<Vec<_>>();
        let mut view = Self::new(f.n as f64 / f.big_n as f64, renormalize(atoms))?;
        view.finite_n = Some(f);
        Ok(view)
    }

    /// Returns `self` or its finite-size view.
    pub fn effective(&self, finite_n_mode: bool) -> Result<std::borrow::Cow<'_, Self>> {
        if finite_n_mode {
            Ok(std::borrow::Cow::Owned(self.finite_view()?))
        } else {
            Ok(std::borrow::Cow::Borrowed(self))
        }
    }

    /// Poles of g on the real line: 0 and the reciprocals 1/lambda, ascending.
    pub fn poles(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.atoms.iter().rev().map(|a| 1.0 / a.lambda).collect();
        p.insert(0, 0.0);
        p
    }

    /// Integral of lambda^k against the population measure.
    pub fn moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.lambda.powi(k)).sum()
    }
}

fn renormalize(mut atoms: Vec<Atom>) -> Vec<Atom> {
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    for a in &mut atoms {
        a.weight /= total;
    }
    atoms
}

pub(crate) fn largest_remainder(weights: &[f64], n: usize) -> Vec<usize> {
    let scaled: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = scaled[i] - scaled[i].floor();
        let fj = scaled[j] - scaled[j].floor();
        fj.partial_cmp(&fi).unwrap().then(i.cmp(&j))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}
