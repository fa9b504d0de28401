//! From an entry vector `x` to the Hermitian matrix `X_A`.
//!
//! Layout of `x ∈ R^{N²}`: the `N` diagonal entries `ω^R_{i,i}`, then the
//! `N(N-1)/2` real parts `ω^R_{i,j}` (`i < j`, row-major), then the
//! imaginary parts `ω^I_{i,j}` in the same order. Entries of `X_A` are
//! `A_{i,j}(ω^R_{i,j} + √-1 ω^I_{i,j})/√N`.
//!
//! The Wishart pattern uses `x ∈ R^{2KN}`: the real parts of the `K × N`
//! matrix `Y` row-major, then its imaginary parts, and returns the
//! unnormalized block matrix `[[0, Y*], [Y, 0]]` of order `K + N`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampler::RngState;

/// Stream reserved for the random pattern of diluted ensembles.
const DILUTION_STREAM: u64 = 0xD11_u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    RealSymmetric,
    #[default]
    ComplexHermitian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pattern {
    /// `A_{i,i} = 1`, `A_{i,j} = 1/√2`.
    GuePattern,
    /// `A_{i,i} = √2`, `A_{i,j} = 1`.
    GoePattern,
    /// `A_{i,j} = 1` everywhere.
    Flat,
    /// `A_{i,j} = 1_{|i-j| ≤ width}`.
    Band { width: usize },
    /// Symmetric iid Bernoulli(p) pattern drawn from its own stream.
    Diluted { p: f64, seed: u64 },
    /// Real symmetric `N × N` weights, given row by row.
    Custom { weights: Vec<Vec<f64>> },
    /// Block embedding of a `K × N` matrix.
    Wishart { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    #[serde(flatten)]
    pub pattern: Pattern,
    #[serde(default)]
    pub field: Field,
}

impl EnsembleSpec {
    pub fn new(n: usize, pattern: Pattern) -> Self {
        Self { n, pattern, field: Field::ComplexHermitian }
    }

    pub fn real(mut self) -> Self {
        self.field = Field::RealSymmetric;
        self
    }

    /// Length of the entry vector.
    pub fn entry_dim(&self) -> usize {
        match self.pattern {
            Pattern::Wishart { k } => 2 * k * self.n,
            _ => self.n * self.n,
        }
    }

    /// Order of `X_A`.
    pub fn order(&self) -> usize {
        match self.pattern {
            Pattern::Wishart { k } => k + self.n,
            _ => self.n,
        }
    }

    /// Uniform bound `a` on `|A_{i,j}|`.
    pub fn a(&self) -> f64 {
        match &self.pattern {
            Pattern::GoePattern => std::f64::consts::SQRT_2,
            Pattern::Custom { weights } => weights.iter().flatten().fold(0.0, |m, w| m.max(w.abs())),
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |m: String| Err(EnsembleError::InvalidSpec(m));
        if self.n == 0 {
            return bad("N must be positive".into());
        }
        match &self.pattern {
            Pattern::Diluted { p, .. } if !(*p > 0.0 && *p <= 1.0) => bad(format!("dilution p = {p} not in (0, 1]")),
            Pattern::Custom { weights } => {
                if weights.len() != self.n || weights.iter().any(|r| r.len() != self.n) {
                    return bad(format!("custom weights must be {n} × {n}", n = self.n));
                }
                for i in 0..self.n {
                    for j in 0..self.n {
                        if !weights[i][j].is_finite() || weights[i][j] != weights[j][i] {
                            return bad("custom weights must be finite and symmetric".into());
                        }
                    }
                }
                if self.a() == 0.0 {
                    return bad("custom weights vanish".into());
                }
                Ok(())
            }
            Pattern::Wishart { k } if *k <= self.n => bad(format!("Wishart needs K > N, got K = {k}, N = {}", self.n)),
            _ => Ok(()),
        }
    }
}

/// Hermitian matrix stored as its packed upper triangle, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    upper: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, upper: vec![Complex64::new(0.0, 0.0); n * (n + 1) / 2] }
    }

    /// Builds from a dense row-major matrix, reading the upper triangle and
    /// keeping only the real part of the diagonal.
    pub fn from_dense(n: usize, dense: &[Complex64]) -> Self {
        assert_eq!(dense.len(), n * n);
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(dense[i * n + i].re, 0.0));
            for j in i + 1..n {
                m.set(i, j, dense[i * n + j]);
            }
        }
        m
    }

    pub fn from_real(n: usize, dense: &[f64]) -> Self {
        let c: Vec<Complex64> = dense.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_dense(n, &c)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i <= j {
            self.upper[self.index(i, j)]
        } else {
            self.upper[self.index(j, i)].conj()
        }
    }

    /// Sets entry `(i, j)` with `i ≤ j`; the lower triangle follows.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.index(i, j);
        self.upper[k] = if i == j { Complex64::new(v.re, 0.0) } else { v };
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut d = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.get(i, j);
            }
        }
        d
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    /// Hilbert–Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.get(i, i).norm_sqr();
            for j in i + 1..self.n {
                s += 2.0 * self.get(i, j).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a - b).collect() }
    }

    /// `M v` for a dense vector.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Pattern weights cached for repeated assembly.
#[derive(Debug, Clone)]
pub struct Assembler {
    spec: EnsembleSpec,
    /// Packed upper-triangle weights `A_{i,j}`, `i ≤ j` (unused for Wishart).
    weights: Vec<f64>,
}

impl Assembler {
    pub fn new(spec: &EnsembleSpec) -> Result<Self, EnsembleError> {
        spec.validate()?;
        let n = spec.n;
        let mut weights = Vec::with_capacity(n * (n + 1) / 2);
        let mut dilution = match spec.pattern {
            Pattern::Diluted { p, seed } => Some((RngState::new(seed, DILUTION_STREAM), p)),
            _ => None,
        };
        if !matches!(spec.pattern, Pattern::Wishart { .. }) {
            for i in 0..n {
                for j in i..n {
                    let w = match &spec.pattern {
                        Pattern::GuePattern => {
                            if i == j {
                                1.0
                            } else {
                                std::f64::consts::FRAC_1_SQRT_2
                            }
                        }
                        Pattern::GoePattern => {
                            if i == j {
                                std::f64::consts::SQRT_2
                            } else {
                                1.0
                            }
                        }
                        Pattern::Flat => 1.0,
                        Pattern::Band { width } => f64::from(u8::from(j - i <= *width)),
                        Pattern::Diluted { .. } => {
                            let (rng, p) = dilution.as_mut().expect("diluted rng");
                            f64::from(u8::from(rng.open01() < *p))
                        }
                        Pattern::Custom { weights } => weights[i][j],
                        Pattern::Wishart { .. } => unreachable!(),
                    };
                    weights.push(w);
                }
            }
        }
        Ok(Self { spec: spec.clone(), weights })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// Pattern weight `A_{i,j}`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.spec.n;
        self.weights[i * n - i * (i + 1) / 2 + j]
    }

    pub fn assemble(&self, x: &[f64]) -> Result<HermitianMatrix, EnsembleError> {
        let expected = self.spec.entry_dim();
        if x.len() != expected {
            return Err(EnsembleError::DimensionMismatch { expected, got: x.len() });
        }
        let n = self.spec.n;
        let complex = self.spec.field == Field::ComplexHermitian;
        if let Pattern::Wishart { k } = self.spec.pattern {
            let (re, im) = x.split_at(k * n);
            let y: Vec<Complex64> = re
                .iter()
                .zip(im)
                .map(|(&r, &i)| Complex64::new(r, if complex { i } else { 0.0 }))
                .collect();
            return wishart_embed(&y, k, n);
        }
        let scale = 1.0 / (n as f64).sqrt();
        let mut m = HermitianMatrix::zeros(n);
        let off = n * (n - 1) / 2;
        let mut slot = 0;
        let mut packed = 0;
        for i in 0..n {
            for j in i..n {
                let w = self.weights[packed] * scale;
                packed += 1;
                if i == j {
                    m.set(i, i, Complex64::new(w * x[i], 0.0));
                } else {
                    let re = x[n + slot];
                    let im = if complex { x[n + off + slot] } else { 0.0 };
                    slot += 1;
                    m.set(i, j, Complex64::new(w * re, w * im));
                }
            }
        }
        Ok(m)
    }
}

/// `X_A` for the entry vector `x`.
pub fn assemble(spec: &EnsembleSpec, x: &[f64]) -> Result<HermitianMatrix, EnsembleError> {
    Assembler::new(spec)?.assemble(x)
}

/// `[[0, Y*], [Y, 0]]` for a `K × N` matrix `Y` given row-major.
pub fn wishart_embed(y: &[Complex64], k: usize, n: usize) -> Result<HermitianMatrix, EnsembleError> {
    if y.len() != k * n {
        return Err(EnsembleError::DimensionMismatch { expected: k * n, got: y.len() });
    }
    if !(k > n && n >= 1) {
        return Err(EnsembleError::InvalidSpec(format!("Wishart needs K > N >= 1, got K = {k}, N = {n}")));
    }
    let mut m = HermitianMatrix::zeros(k + n);
    for i in 0..n {
        for r in 0..k {
            // row i of Y* is the conjugated column i of Y
            m.set(i, n + r, y[r * n + i].conj());
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_vector_gives_zero_matrix() {
        let m = assemble(&EnsembleSpec::new(3, Pattern::GuePattern), &[0.0; 9]).unwrap();
        assert_eq!(m, HermitianMatrix::zeros(3));
    }

    #[test]
    fn hand_substituted_gue_example() {
        let m = assemble(&EnsembleSpec::new(2, Pattern::GuePattern), &[2.0, 0.0, 1.0, 1.0]).unwrap();
        let s = 2f64.sqrt();
        assert!((m.get(0, 0) - c(s, 0.0)).norm() < 1e-15);
        assert!((m.get(0, 1) - c(0.5, 0.5)).norm() < 1e-15);
        assert!((m.get(1, 0) - c(0.5, -0.5)).norm() < 1e-15);
        assert_eq!(m.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn real_field_ignores_imaginary_slots() {
        let spec = EnsembleSpec::new(2, Pattern::GoePattern).real();
        let m = assemble(&spec, &[1.0, 1.0, 1.0, 5.0]).unwrap();
        assert_eq!(m.get(0, 1).im, 0.0);
        assert!((m.get(0, 0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let spec = EnsembleSpec::new(3, Pattern::GuePattern);
        assert_eq!(assemble(&spec, &[0.0; 8]), Err(EnsembleError::DimensionMismatch { expected: 9, got: 8 }));
    }

    #[test]
    fn band_and_dilution_patterns() {
        let a = Assembler::new(&EnsembleSpec::new(5, Pattern::Band { width: 1 })).unwrap();
        assert_eq!(a.weight(0, 1), 1.0);
        assert_eq!(a.weight(0, 2), 0.0);
        let spec = EnsembleSpec::new(6, Pattern::Diluted { p: 0.5, seed: 3 });
        let d1 = Assembler::new(&spec).unwrap();
        let d2 = Assembler::new(&spec).unwrap();
        assert_eq!(d1.weights, d2.weights);
        assert!(d1.weights.iter().all(|&w| w == 0.0 || w == 1.0));
        assert_eq!(d1.weight(2, 4), d1.weight(4, 2));
    }

    #[test]
    fn pattern_bounds() {
        assert_eq!(EnsembleSpec::new(2, Pattern::GoePattern).a(), 2f64.sqrt());
        assert_eq!(EnsembleSpec::new(2, Pattern::GuePattern).a(), 1.0);
        let custom = Pattern::Custom { weights: vec![vec![0.5, -3.0], vec![-3.0, 1.0]] };
        assert_eq!(EnsembleSpec::new(2, custom).a(), 3.0);
        let asym = Pattern::Custom { weights: vec![vec![0.5, 1.0], vec![2.0, 1.0]] };
        assert!(EnsembleSpec::new(2, asym).validate().is_err());
    }

    #[test]
    fn wishart_small_example() {
        let m = wishart_embed(&[c(1.0, 0.0), c(0.0, 1.0)], 2, 1).unwrap();
        assert_eq!(m.order(), 3);
        assert_eq!(m.get(0, 1), c(1.0, 0.0));
        assert_eq!(m.get(0, 2), c(0.0, -1.0));
        assert_eq!(m.get(2, 0), c(0.0, 1.0));
        assert_eq!(m.get(1, 2), c(0.0, 0.0));
        assert!(wishart_embed(&[c(1.0, 0.0)], 1, 1).is_err());
    }

    #[test]
    fn serde_forms() {
        let spec: EnsembleSpec = serde_json::from_str(r#"{"n": 4, "kind": "band", "width": 2}"#).unwrap();
        assert_eq!(spec.pattern, Pattern::Band { width: 2 });
        assert_eq!(spec.field, Field::ComplexHermitian);
        let w: EnsembleSpec =
            serde_json::from_str(r#"{"n": 2, "kind": "wishart", "k": 3, "field": "real_symmetric"}"#).unwrap();
        assert_eq!(w.entry_dim(), 12);
        assert_eq!(w.order(), 5);
    }
}
