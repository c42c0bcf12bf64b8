//! Support of the limiting density from the critical points of g.

use num_complex::Complex64;
use serde::Serialize;

use super::inverse::InverseMap;
use super::spectrum::PopulationSpectrum;
use crate::error::Result;

pub const DEFAULT_SCAN_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    SoftEdge,
    CuspCandidate,
}

/// A real zero of g' in the domain of g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub m: f64,
    pub kind: CriticalKind,
    pub value: f64,
    pub g2: f64,
    pub g3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportDescription {
    /// Closed support intervals, sorted and disjoint.
    pub intervals: Vec<(f64, f64)>,
    /// Critical points of g mapped to each interval end; `None` for the hard edge.
    pub preimages: Vec<(Option<f64>, Option<f64>)>,
    pub critical_points: Vec<CriticalPoint>,
    pub hard_edge: bool,
    /// Scan cells in which two nearby zeros of g' were only found by refinement.
    pub warnings: Vec<String>,
}

impl SupportDescription {
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    pub fn cusp_candidates(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.critical_points
            .iter()
            .filter(|c| c.kind == CriticalKind::CuspCandidate)
    }
}

/// One of the maximal open intervals of the real line avoiding 0 and 1/lambda_j.
#[derive(Debug, Clone, Copy)]
struct Gap {
    lo: f64,
    hi: f64,
    scale: f64,
}

impl Gap {
    fn at(&self, s: f64) -> f64 {
        let q = std::f64::consts::FRAC_PI_2;
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let u = 0.5 * (1.0 - (std::f64::consts::PI * s).cos());
                self.lo + (self.hi - self.lo) * u
            }
            (false, true) => self.hi - self.scale * (q * (1.0 - s)).tan(),
            (true, false) => self.lo + self.scale * (q * s).tan(),
            (false, false) => unreachable!("g always has a pole at 0"),
        }
    }

    fn interior(&self, a: f64, b: f64) -> f64 {
        match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (false, true) => b - self.scale * (1.0 + b.abs()),
            (true, false) => a + self.scale * (1.0 + a.abs()),
            (false, false) => unreachable!(),
        }
    }
}

fn gaps(spec: &PopulationSpectrum) -> Vec<Gap> {
    let poles = spec.poles();
    let scale = *poles.last().unwrap();
    let mut out = vec![Gap {
        lo: f64::NEG_INFINITY,
        hi: 0.0,
        scale,
    }];
    for w in poles.windows(2) {
        out.push(Gap {
            lo: w[0],
            hi: w[1],
            scale,
        });
    }
    out.push(Gap {
        lo: scale,
        hi: f64::INFINITY,
        scale,
    });
    out
}

/// Bisection for a sign change of g^{(k)} on [a, b], finished by Newton.
fn refine(map: &InverseMap, k: usize, mut a: f64, mut b: f64) -> f64 {
    let mut fa = map.real(a, k);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || (b - a) <= 1e-14 * (1.0 + mid.abs()) {
            break;
        }
        let fm = map.real(mid, k);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let (lo, hi) = (a, b);
    let mut t = 0.5 * (a + b);
    for _ in 0..3 {
        let d = map.real(t, k + 1);
        if d == 0.0 {
            break;
        }
        let next = t - map.real(t, k) / d;
        if next < lo - (hi - lo) || next > hi + (hi - lo) {
            break;
        }
        t = next;
    }
    t
}

struct Scan {
    roots: Vec<(f64, bool)>,
    warnings: Vec<String>,
}

fn scan_gap(map: &InverseMap, gap: &Gap, n: usize) -> Scan {
    let ms: Vec<f64> = (1..n).map(|i| gap.at(i as f64 / n as f64)).collect();
    let d1: Vec<f64> = ms.iter().map(|&m| map.real(m, 1)).collect();
    let d2: Vec<f64> = ms.iter().map(|&m| map.real(m, 2)).collect();
    let mut roots: Vec<(f64, bool)> = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..ms.len().saturating_sub(1) {
        let (a, b) = (ms[i], ms[i + 1]);
        let (a, b, fa, fb, sa, sb) = if a < b {
            (a, b, d1[i], d1[i + 1], d2[i], d2[i + 1])
        } else {
            (b, a, d1[i + 1], d1[i], d2[i + 1], d2[i])
        };
        let g1_change = (fa > 0.0) != (fb > 0.0);
        let g2_change = (sa > 0.0) != (sb > 0.0);
        if g2_change {
            let r = refine(map, 2, a, b);
            let v = map.real(r, 1);
            if v.abs() <= 1e-10 * map.real_scale(r, 1) {
                roots.push((r, true));
                continue;
            }
            if !g1_change && (v > 0.0) != (fa > 0.0) {
                roots.push((refine(map, 1, a, r), false));
                roots.push((refine(map, 1, r, b), false));
                warnings.push(format!(
                    "two zeros of g' inside one scan cell [{a:.6e}, {b:.6e}]"
                ));
                continue;
            }
        }
        if g1_change {
            roots.push((refine(map, 1, a, b), false));
        }
    }
    roots.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    // A cusp found through g'' may also show up as a nearby sign change of g'.
    let mut merged: Vec<(f64, bool)> = Vec::new();
    for r in roots {
        if let Some(last) = merged.last_mut() {
            if (r.0 - last.0).abs() <= 1e-7 * (1.0 + r.0.abs()) {
                last.1 |= r.1;
                continue;
            }
        }
        merged.push(r);
    }
    Scan {
        roots: merged,
        warnings,
    }
}

fn is_cusp(map: &InverseMap, m: f64) -> bool {
    map.real(m, 2).abs() < 1e-8 * (1.0 + map.real(m, 3).abs() * m.abs())
}

/// Value of g at a piece end, with limits at poles and at infinity.
fn end_value(map: &InverseMap, m: f64, from_right: bool, is_pole: bool) -> f64 {
    if !m.is_finite() {
        return 0.0;
    }
    if is_pole {
        // g -> -inf approaching 0 from the left, +inf from the right;
        // the opposite holds at every 1/lambda.
        let at_zero = m == 0.0;
        return if at_zero == from_right { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    map.real(m, 0)
}

/// Critical points of g on the real domain, with scan diagnostics.
pub fn critical_points_with(
    spec: &PopulationSpectrum,
    scan_points: usize,
) -> (Vec<CriticalPoint>, Vec<String>) {
    let map = InverseMap::new(spec);
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for gap in gaps(spec) {
        let scan = scan_gap(&map, &gap, scan_points.max(16));
        warnings.extend(scan.warnings);
        for (m, flagged) in scan.roots {
            let kind = if flagged || is_cusp(&map, m) {
                CriticalKind::CuspCandidate
            } else {
                CriticalKind::SoftEdge
            };
            points.push(CriticalPoint {
                m,
                kind,
                value: map.real(m, 0),
                g2: map.real(m, 2),
                g3: map.real(m, 3),
            });
        }
    }
    (points, warnings)
}

pub fn support_with(spec: &PopulationSpectrum, scan_points: usize) -> Result<SupportDescription> {
    let map = InverseMap::new(spec);
    let (points, warnings) = critical_points_with(spec, scan_points);

    // Complement pieces on (0, inf): images of the decreasing stretches of g.
    let mut pieces: Vec<(f64, f64, Option<f64>, Option<f64>)> = Vec::new();
    for gap in gaps(spec) {
        let mut ends = vec![(gap.lo, true)];
        ends.extend(
            points
                .iter()
                .filter(|p| p.m > gap.lo && p.m < gap.hi)
                .map(|p| (p.m, false)),
        );
        ends.push((gap.hi, true));
        for w in ends.windows(2) {
            let (a, a_pole) = w[0];
            let (b, b_pole) = w[1];
            let mid = gap.interior(a, b);
            if map.real(mid, 1) >= 0.0 {
                continue;
            }
            let hi = end_value(&map, a, true, a_pole && a.is_finite());
            let lo = end_value(&map, b, false, b_pole && b.is_finite());
            if hi <= 0.0 {
                continue;
            }
            let lo_pre = (!b_pole).then_some(b);
            let hi_pre = (!a_pole).then_some(a);
            pieces.push((lo.max(0.0), hi, lo_pre, hi_pre));
        }
    }
    pieces.retain(|p| p.1 - p.0 > 1e-9 * (1.0 + p.0.abs()));
    pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let mut intervals = Vec::new();
    let mut preimages = Vec::new();
    let mut cur: f64 = 0.0;
    let mut cur_pre: Option<f64> = None;
    for (lo, hi, lo_pre, hi_pre) in pieces {
        if lo > cur + 1e-12 * (1.0 + cur.abs()) {
            intervals.push((cur, lo));
            preimages.push((cur_pre, lo_pre));
        }
        if hi > cur {
            cur = hi;
            cur_pre = hi_pre;
        }
    }
    let hard_edge = intervals.first().is_some_and(|iv| iv.0 == 0.0);
    Ok(SupportDescription {
        intervals,
        preimages,
        critical_points: points,
        hard_edge,
        warnings,
    })
}

pub fn support(spec: &PopulationSpectrum) -> Result<SupportDescription> {
    support_with(spec, DEFAULT_SCAN_POINTS)
}

/// Real m in the domain of g whose image is `x` and where g is decreasing, if any.
pub fn complement_witness(spec: &PopulationSpectrum, x: f64) -> Option<f64> {
    let v = super::stieltjes::solve_stieltjes(spec, Complex64::new(x, 0.0)).ok()?;
    let map = InverseMap::new(spec);
    (v.m.im == 0.0 && map.real(v.m.re, 1) < 0.0).then_some(v.m.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_model::density::density;

    #[test]
    fn marchenko_pastur_support() {
        let s = PopulationSpectrum::dirac(1.0, 1.0).unwrap();
        let d = support(&s).unwrap();
        assert_eq!(d.intervals.len(), 1);
        assert_eq!(d.intervals[0].0, 0.0);
        assert!((d.intervals[0].1 - 4.0).abs() < 1e-12);
        assert!(d.hard_edge);
        assert_eq!(d.critical_points.len(), 1);
        assert!((d.critical_points[0].m - 0.5).abs() < 1e-12);
        assert_eq!(d.preimages[0], (None, Some(d.critical_points[0].m)));
    }

    #[test]
    fn small_gamma_support_is_away_from_zero() {
        let s = PopulationSpectrum::dirac(0.5, 1.0).unwrap();
        let d = support(&s).unwrap();
        let r = 0.5f64.sqrt();
        assert_eq!(d.intervals.len(), 1);
        assert!((d.intervals[0].0 - (1.0 - r).powi(2)).abs() < 1e-12);
        assert!((d.intervals[0].1 - (1.0 + r).powi(2)).abs() < 1e-12);
        assert!(!d.hard_edge);
    }

    #[test]
    fn separated_atoms_give_two_intervals() {
        let s = PopulationSpectrum::from_pairs(0.1, &[1.0, 10.0], &[0.5, 0.5]).unwrap();
        let d = support(&s).unwrap();
        assert_eq!(d.intervals.len(), 2, "{:?}", d.intervals);
        // Brute-force cross-check against density positivity.
        let (a0, b0) = d.intervals[0];
        let (a1, b1) = d.intervals[1];
        let gap_mid = 0.5 * (b0 + a1);
        assert_eq!(density(&s, gap_mid).unwrap(), 0.0);
        for (a, b) in [(a0, b0), (a1, b1)] {
            for k in 1..20 {
                let x = a + (b - a) * k as f64 / 20.0;
                assert!(density(&s, x).unwrap() > 0.0);
            }
        }
        for &(a, b) in &d.intervals {
            let below = a * (1.0 - 1e-6);
            let above = b * (1.0 + 1e-6);
            assert!(complement_witness(&s, below).is_some());
            assert!(complement_witness(&s, above).is_some());
        }
    }
}
