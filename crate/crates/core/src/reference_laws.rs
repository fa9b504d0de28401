//! Limiting spectral laws: the semicircle law and the Marčenko–Pastur law.
//!
//! The CDF and the first-moment primitive `G(x) = ∫_{-∞}^x t p(t) dt` are
//! tabulated on a uniform grid of [`GRID_CELLS`] cells when the law is
//! built; queries add the quadrature of the density over the partial cell,
//! which keeps every evaluation monotone.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad;

pub const GRID_CELLS: usize = 10_000;

const CELL_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("bad reference-law parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawKind {
    /// Density `√(4s² - x²)/(2πs²)` on `[-2s, 2s]`; `s = 1` is the standard law.
    Semicircle {
        #[serde(default = "unit")]
        scale: f64,
    },
    /// Limit of the spectrum of `Y*Y/K` with `K/N → γ > 1` and entry variance `σ²`.
    MarchenkoPastur {
        gamma_aspect: f64,
        #[serde(default = "unit")]
        sigma2: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl LawKind {
    fn support(&self) -> (f64, f64) {
        match *self {
            LawKind::Semicircle { scale } => (-2.0 * scale, 2.0 * scale),
            LawKind::MarchenkoPastur { gamma_aspect, sigma2 } => {
                let r = gamma_aspect.powf(-0.5);
                (sigma2 * (1.0 - r).powi(2), sigma2 * (1.0 + r).powi(2))
            }
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x > lo && x < hi) {
            return 0.0;
        }
        match *self {
            LawKind::Semicircle { scale } => ((hi - x) * (x - lo)).sqrt() / (2.0 * PI * scale * scale),
            LawKind::MarchenkoPastur { gamma_aspect, sigma2 } => {
                gamma_aspect * ((hi - x) * (x - lo)).sqrt() / (2.0 * PI * sigma2 * x)
            }
        }
    }
}

#[derive(Debug)]
struct Table {
    lo: f64,
    step: f64,
    norm: f64,
    cdf: Vec<f64>,
    moment: Vec<f64>,
}

/// A reference law with its precomputed tables; cheap to clone.
#[derive(Debug, Clone)]
pub struct ReferenceLaw {
    kind: LawKind,
    table: Arc<Table>,
}

impl PartialEq for ReferenceLaw {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl ReferenceLaw {
    pub fn new(kind: LawKind) -> Result<Self, ReferenceError> {
        match kind {
            LawKind::Semicircle { scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(ReferenceError::BadParams(format!("semicircle scale {scale} must be positive")));
                }
            }
            LawKind::MarchenkoPastur { gamma_aspect, sigma2 } => {
                if !(gamma_aspect > 1.0 && gamma_aspect.is_finite()) {
                    return Err(ReferenceError::BadParams(format!("aspect ratio {gamma_aspect} must exceed 1")));
                }
                if !(sigma2 > 0.0 && sigma2.is_finite()) {
                    return Err(ReferenceError::BadParams(format!("sigma2 {sigma2} must be positive")));
                }
            }
        }
        let (lo, hi) = kind.support();
        let step = (hi - lo) / GRID_CELLS as f64;
        let mut cdf = Vec::with_capacity(GRID_CELLS + 1);
        let mut moment = Vec::with_capacity(GRID_CELLS + 1);
        let (mut f, mut g) = (0.0, 0.0);
        cdf.push(0.0);
        moment.push(0.0);
        for i in 0..GRID_CELLS {
            let a = lo + step * i as f64;
            let b = if i + 1 == GRID_CELLS { hi } else { lo + step * (i + 1) as f64 };
            f += cell_integral(&kind, a, b, false);
            g += cell_integral(&kind, a, b, true);
            cdf.push(f);
            moment.push(g);
        }
        // absorb the quadrature residue into the normalization
        let total = f;
        for v in cdf.iter_mut() {
            *v /= total;
        }
        for v in moment.iter_mut() {
            *v /= total;
        }
        Ok(Self { kind, table: Arc::new(Table { lo, step, norm: 1.0 / total, cdf, moment }) })
    }

    pub fn semicircle(scale: f64) -> Result<Self, ReferenceError> {
        Self::new(LawKind::Semicircle { scale })
    }

    pub fn marchenko_pastur(gamma_aspect: f64, sigma2: f64) -> Result<Self, ReferenceError> {
        Self::new(LawKind::MarchenkoPastur { gamma_aspect, sigma2 })
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LawKind::Semicircle { .. } => "semicircle",
            LawKind::MarchenkoPastur { .. } => "marchenko_pastur",
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.kind.support()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.kind.pdf(x)
    }

    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let (lo, hi) = self.support();
        if x <= lo || x >= hi {
            return None;
        }
        let t = &self.table;
        let i = (((x - t.lo) / t.step) as usize).min(GRID_CELLS - 1);
        Some((i, t.lo + t.step * i as f64))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, _) = self.support();
        match self.locate(x) {
            None => {
                if x <= lo {
                    0.0
                } else {
                    1.0
                }
            }
            Some((i, left)) => {
                let v = self.table.cdf[i] + cell_integral(&self.kind, left, x, false) * self.table.norm;
                v.clamp(self.table.cdf[i], self.table.cdf[i + 1])
            }
        }
    }

    /// `∫_{-∞}^x t p(t) dt`.
    pub fn partial_moment(&self, x: f64) -> f64 {
        let (lo, _) = self.support();
        match self.locate(x) {
            None => {
                if x <= lo {
                    0.0
                } else {
                    self.table.moment[GRID_CELLS]
                }
            }
            Some((i, left)) => self.table.moment[i] + cell_integral(&self.kind, left, x, true) * self.table.norm,
        }
    }

    pub fn mean(&self) -> f64 {
        self.table.moment[GRID_CELLS]
    }

    /// `∫_a^b F(x) dx` for `a ≤ b`.
    pub fn cdf_integral(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        (b * self.cdf(b) - a * self.cdf(a)) - (self.partial_moment(b) - self.partial_moment(a))
    }

    /// Smallest `x` with `F(x) ≥ p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        let t = &self.table;
        let i = t.cdf.partition_point(|&c| c < p).clamp(1, GRID_CELLS);
        let (mut a, mut b) = (t.lo + t.step * (i - 1) as f64, (t.lo + t.step * i as f64).min(hi));
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.cdf(m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        b
    }
}

fn cell_integral(kind: &LawKind, a: f64, b: f64, moment: bool) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (lo, hi) = kind.support();
    let edge = a <= lo || b >= hi;
    let f = |x: f64| if moment { x * kind.pdf(x) } else { kind.pdf(x) };
    if edge {
        quad::tanh_sinh(|x, _| f(x), a, b, CELL_TOL)
    } else {
        quad::gauss_kronrod(f, a, b, 1e-17, CELL_TOL, 64).value
    }
}

/// Closed-form semicircle CDF `1/2 + x√(4s²-x²)/(4πs²) + arcsin(x/2s)/π`.
pub fn semicircle_cdf_closed(scale: f64, x: f64) -> f64 {
    let u = x / (2.0 * scale);
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
}

pub fn law_cdf(law: &ReferenceLaw, x: f64) -> f64 {
    law.cdf(x)
}

pub fn law_pdf(law: &ReferenceLaw, x: f64) -> f64 {
    law.pdf(x)
}
