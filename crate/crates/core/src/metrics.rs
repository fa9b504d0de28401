//! Distances between probability measures on the line and Monte-Carlo
//! estimators for tail probabilities and medians.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use thiserror::Error;

use crate::quad;
use crate::reference_laws::ReferenceLaw;
use crate::spectra::Esd;

pub const DEFAULT_CONFIDENCE: f64 = 0.999;
pub const MIN_SAMPLES: usize = 100;

/// Cells used to discretize a reference law in [`bl_distance`].
const BL_LAW_CELLS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{n} samples given, at least {MIN_SAMPLES} needed")]
    TooFewSamples { n: usize },
    #[error("bad measure: {0}")]
    BadMeasure(String),
    #[error("samples contain a non-finite value")]
    NotFinite,
    #[error("confidence {0} must lie in (0, 1)")]
    BadConfidence(f64),
}

/// A probability measure on the line: finitely many atoms or a reference law.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure1D {
    /// Sorted distinct positions with positive weights summing to 1.
    Atoms(Vec<(f64, f64)>),
    Law(ReferenceLaw),
}

impl Measure1D {
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Result<Self, MetricsError> {
        if atoms.is_empty() {
            return Err(MetricsError::BadMeasure("no atoms".into()));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() || !(w > 0.0 && w.is_finite()) {
                return Err(MetricsError::BadMeasure(format!("atom ({x}, {w}) needs a finite position and positive weight")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MetricsError::BadMeasure(format!("weights sum to {total}")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        Ok(Measure1D::Atoms(merged))
    }

    /// Uniform weights on `values` (repeats add up).
    pub fn empirical(values: &[f64]) -> Result<Self, MetricsError> {
        if values.is_empty() {
            return Err(MetricsError::BadMeasure("no atoms".into()));
        }
        let w = 1.0 / values.len() as f64;
        let mut atoms: Vec<(f64, f64)> = values.iter().map(|&x| (x, w)).collect();
        // renormalize against rounding in the sum of `n` copies of 1/n
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        for a in atoms.iter_mut() {
            a.1 /= total;
        }
        Self::from_atoms(atoms)
    }

    pub fn from_esd(esd: &Esd) -> Result<Self, MetricsError> {
        Self::empirical(&esd.atoms)
    }

    pub fn law(law: ReferenceLaw) -> Self {
        Measure1D::Law(law)
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Measure1D::Atoms(a) => (a[0].0, a[a.len() - 1].0),
            Measure1D::Law(l) => l.support(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Measure1D::Atoms(a) => {
                let k = a.partition_point(|p| p.0 <= x);
                a[..k].iter().map(|p| p.1).sum::<f64>().min(1.0)
            }
            Measure1D::Law(l) => l.cdf(x),
        }
    }

    /// Atoms, with a reference law replaced by `cells` atoms at the
    /// conditional means of equal-width cells.
    fn discretize(&self, cells: usize) -> Vec<(f64, f64)> {
        match self {
            Measure1D::Atoms(a) => a.clone(),
            Measure1D::Law(l) => {
                let (lo, hi) = l.support();
                let step = (hi - lo) / cells as f64;
                let mut out = Vec::with_capacity(cells);
                let (mut f0, mut g0) = (0.0, 0.0);
                for i in 1..=cells {
                    let x = if i == cells { hi } else { lo + step * i as f64 };
                    let (f1, g1) = (l.cdf(x), l.partial_moment(x));
                    let m = f1 - f0;
                    if m > 0.0 {
                        out.push(((g1 - g0) / m, m));
                    }
                    (f0, g0) = (f1, g1);
                }
                out
            }
        }
    }
}

/// `∫_a^b |F(x) - c| dx` for a reference law `F`.
fn law_gap_integral(law: &ReferenceLaw, c: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (law.cdf(a), law.cdf(b));
    let above = |lo: f64, hi: f64| law.cdf_integral(lo, hi) - c * (hi - lo);
    if fa >= c {
        return above(a, b).max(0.0);
    }
    if fb <= c {
        return (-above(a, b)).max(0.0);
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if law.cdf(m) < c {
            lo = m;
        } else {
            hi = m;
        }
    }
    let z = 0.5 * (lo + hi);
    (-above(a, z)).max(0.0) + above(z, b).max(0.0)
}

/// Wasserstein-1 distance `∫ |F₁ - F₂| dx`, integrated exactly between
/// merged breakpoints.
pub fn w1(mu1: &Measure1D, mu2: &Measure1D) -> f64 {
    use Measure1D::*;
    match (mu1, mu2) {
        (Atoms(a), Atoms(b)) => {
            let mut events: Vec<(f64, f64)> = a.to_vec();
            events.extend(b.iter().map(|&(x, w)| (x, -w)));
            events.sort_by(|p, q| p.0.total_cmp(&q.0));
            let mut gap = 0.0;
            let mut total = 0.0;
            for w in events.windows(2) {
                gap += w[0].1;
                total += gap.abs() * (w[1].0 - w[0].0);
            }
            total
        }
        (Atoms(a), Law(law)) | (Law(law), Atoms(a)) => {
            let (lo, hi) = law.support();
            let mut events: Vec<(f64, f64)> = a.clone();
            events.push((lo, 0.0));
            events.push((hi, 0.0));
            events.sort_by(|p, q| p.0.total_cmp(&q.0));
            let mut c = 0.0;
            let mut total = 0.0;
            for w in events.windows(2) {
                c += w[0].1;
                total += law_gap_integral(law, c.min(1.0), w[0].0, w[1].0);
            }
            total
        }
        (Law(l1), Law(l2)) => {
            if l1 == l2 {
                return 0.0;
            }
            let (a1, b1) = l1.support();
            let (a2, b2) = l2.support();
            let mut pts = [a1, b1, a2, b2];
            pts.sort_by(f64::total_cmp);
            pts.windows(2)
                .map(|w| quad::gauss_kronrod(|x| (l1.cdf(x) - l2.cdf(x)).abs(), w[0], w[1], 1e-13, 1e-11, 2000).value)
                .sum()
        }
    }
}

/// Concave piecewise-linear function on `[-b, b]` given by its breakpoints.
struct ConcavePl {
    pts: Vec<(f64, f64)>,
}

impl ConcavePl {
    fn linear(b: f64, slope: f64) -> Self {
        Self { pts: vec![(-b, -slope * b), (b, slope * b)] }
    }

    fn at(&self, x: f64) -> f64 {
        let k = self.pts.partition_point(|p| p.0 < x).clamp(1, self.pts.len() - 1);
        let (x0, y0) = self.pts[k - 1];
        let (x1, y1) = self.pts[k];
        if x1 == x0 {
            return y0.max(y1);
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    fn max(&self) -> f64 {
        self.pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `f ↦ max{V(g) : |g - f| ≤ d}`, restricted back to `[-b, b]`.
    fn dilate(&mut self, d: f64, b: f64) {
        let top = self.max();
        let il = self.pts.iter().position(|p| p.1 == top).expect("nonempty");
        let ir = self.pts.iter().rposition(|p| p.1 == top).expect("nonempty");
        let mut wide: Vec<(f64, f64)> = self.pts[..=il].iter().map(|&(x, y)| (x - d, y)).collect();
        wide.extend(self.pts[ir..].iter().map(|&(x, y)| (x + d, y)));
        let wide = ConcavePl { pts: wide };
        let mut pts = vec![(-b, wide.at(-b))];
        pts.extend(wide.pts.iter().copied().filter(|p| p.0 > -b && p.0 < b));
        pts.push((b, wide.at(b)));
        self.pts = pts;
    }

    fn add_linear(&mut self, slope: f64) {
        for p in self.pts.iter_mut() {
            p.1 += slope * p.0;
        }
    }
}

/// `sup Σ f(x_i) w_i` over `f` with `|f| ≤ b` and Lipschitz constant 1,
/// by dynamic programming over the sorted positions.
fn bl_dual(points: &[(f64, f64)], b: f64) -> f64 {
    let mut v = ConcavePl::linear(b, points[0].1);
    for w in points.windows(2) {
        v.dilate(w[1].0 - w[0].0, b);
        v.add_linear(w[1].1);
    }
    v.max().max(0.0)
}

/// Bounded-Lipschitz distance `sup{∫ f d(μ₁ - μ₂) : |f| ≤ b, f ∈ Lip(1)}`.
///
/// Equals [`w1`] when `b` is at least half the diameter of the union of
/// the supports. Otherwise the dual is solved exactly on the atoms; a
/// reference law is first replaced by 4096 atoms, which moves the value by
/// at most the cell width over two.
pub fn bl_distance(mu1: &Measure1D, mu2: &Measure1D, b: f64) -> f64 {
    assert!(b > 0.0, "b must be positive");
    let (a1, b1) = mu1.support();
    let (a2, b2) = mu2.support();
    let half_diameter = 0.5 * (b1.max(b2) - a1.min(a2));
    if b >= half_diameter {
        return w1(mu1, mu2);
    }
    let mut pts: Vec<(f64, f64)> = mu1.discretize(BL_LAW_CELLS);
    pts.extend(mu2.discretize(BL_LAW_CELLS).into_iter().map(|(x, w)| (x, -w)));
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (x, w) in pts {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => merged.push((x, w)),
        }
    }
    bl_dual(&merged, b)
}

/// Empirical tail probability with a Hoeffding confidence band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
    pub confidence: f64,
    pub radius: f64,
}

/// `√(ln(2/(1 - confidence))/(2n))`.
pub fn hoeffding_radius(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

fn check_confidence(confidence: f64) -> Result<(), MetricsError> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(MetricsError::BadConfidence(confidence))
    }
}

/// Fraction of samples `≥ threshold`.
pub fn tail_estimate(samples: &[f64], threshold: f64, confidence: f64) -> Result<TailEstimate, MetricsError> {
    check_confidence(confidence)?;
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(MetricsError::TooFewSamples { n });
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(MetricsError::NotFinite);
    }
    let hits = samples.iter().filter(|&&x| x >= threshold).count();
    let p_hat = hits as f64 / n as f64;
    let radius = hoeffding_radius(n, confidence);
    Ok(TailEstimate {
        p_hat,
        lower: (p_hat - radius).max(0.0),
        upper: (p_hat + radius).min(1.0),
        n,
        confidence,
        radius,
    })
}

/// Sample median with a distribution-free order-statistic interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianEstimate {
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
    pub confidence: f64,
}

pub fn median_estimate(samples: &[f64], confidence: f64) -> Result<MedianEstimate, MetricsError> {
    check_confidence(confidence)?;
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(MetricsError::TooFewSamples { n });
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(MetricsError::NotFinite);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
    // largest k with P(Bin(n, 1/2) ≤ k) ≤ (1 - confidence)/2; the interval
    // [X_(k+1), X_(n-k)] then covers the median with probability ≥ confidence
    let bin = Binomial::new(0.5, n as u64).expect("valid binomial");
    let half_alpha = 0.5 * (1.0 - confidence);
    let (mut lo, mut hi) = (0u64, (n as u64 - 1) / 2);
    if bin.cdf(0) > half_alpha {
        return Ok(MedianEstimate { median, lower: s[0], upper: s[n - 1], n, confidence });
    }
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if bin.cdf(mid) <= half_alpha {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let k = lo as usize;
    Ok(MedianEstimate { median, lower: s[k], upper: s[n - 1 - k], n, confidence })
}
