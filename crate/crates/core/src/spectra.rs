//! Hermitian eigensolver, spectral functionals and Lipschitz test functions.
//!
//! The solver reduces the matrix to a Hermitian tridiagonal form with
//! complex Householder reflections, turns it into a real symmetric
//! tridiagonal matrix with a diagonal unitary phase change, and finishes
//! with implicit QL iterations using Wilkinson shifts.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::HermitianMatrix;

/// QL iterations allowed per eigenvalue.
pub const MAX_SWEEPS: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("QL iteration did not converge for eigenvalue {index} after {MAX_SWEEPS} sweeps")]
    NoConvergence { index: usize },
    #[error("matrix has non-finite entries")]
    NotFinite,
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// Eigenvalues sorted nonincreasing, with the residual
/// `max_i ‖M v_i - λ_i v_i‖` when eigenvectors were formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub residual: Option<f64>,
}

/// `λ_max`, `ρ` and `tr_N f` of one spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functionals {
    pub lambda_max: f64,
    pub rho: f64,
    pub tr_n_f: f64,
}

impl Spectrum {
    pub fn from_values(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { eigenvalues, residual: None }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// Spectral radius.
    pub fn rho(&self) -> f64 {
        self.lambda_max().abs().max(self.lambda_min().abs())
    }

    /// `(1/N) Σ f(λ_i)`.
    pub fn tr_n<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F) -> f64 {
        self.eigenvalues.iter().map(|&l| f(l)).sum::<f64>() / self.len() as f64
    }

    pub fn functionals<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F) -> Functionals {
        Functionals { lambda_max: self.lambda_max(), rho: self.rho(), tr_n_f: self.tr_n(f) }
    }

    /// Empirical spectral measure.
    pub fn esd(&self) -> Esd {
        let mut atoms = self.eigenvalues.clone();
        atoms.reverse();
        Esd { atoms }
    }
}

/// Empirical spectral measure: atoms of weight `1/N`, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Esd {
    pub atoms: Vec<f64>,
}

impl Esd {
    pub fn new(mut atoms: Vec<f64>) -> Self {
        atoms.sort_by(f64::total_cmp);
        Self { atoms }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `F_N(x) = (1/N) #{i : λ_i ≤ x}`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.partition_point(|&a| a <= x) as f64 / self.len() as f64
    }

    pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F) -> f64 {
        self.atoms.iter().map(|&a| f(a)).sum::<f64>() / self.len() as f64
    }
}

/// Householder reduction to Hermitian tridiagonal form. Returns the real
/// diagonal, the complex subdiagonal `T_{k+1,k}` and, if requested, the
/// accumulated unitary `Q` (row-major) with `A = Q T Q*`.
fn tridiagonalize(m: &HermitianMatrix, want_q: bool) -> (Vec<f64>, Vec<Complex64>, Option<Vec<Complex64>>) {
    let n = m.order();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = m.to_dense();
    let mut q = want_q.then(|| {
        let mut q = vec![zero; n * n];
        for i in 0..n {
            q[i * n + i] = Complex64::new(1.0, 0.0);
        }
        q
    });
    let mut sub = vec![zero; n.saturating_sub(1)];
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let x0 = a[(k + 1) * n + k];
        let tail: f64 = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            sub[k] = x0;
            continue;
        }
        let norm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        // v = x - α e₁, normalized
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= alpha;
        let vn: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for i in k + 1..n {
            v[i] /= vn;
        }
        // trailing block B ← B - 2(v w* + w v*), w = p - (v* p) v, p = B v
        for i in k + 1..n {
            p[i] = (k + 1..n).map(|j| a[i * n + j] * v[j]).sum();
        }
        let c: Complex64 = (k + 1..n).map(|i| v[i].conj() * p[i]).sum();
        for i in k + 1..n {
            p[i] -= c * v[i];
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] -= 2.0 * (v[i] * p[j].conj() + p[i] * v[j].conj());
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = zero;
            a[k * n + i] = zero;
        }
        sub[k] = alpha;
        if let Some(q) = q.as_mut() {
            // Q ← Q H, H = I - 2 v v*
            for r in 0..n {
                let s: Complex64 = (k + 1..n).map(|j| q[r * n + j] * v[j]).sum();
                for j in k + 1..n {
                    q[r * n + j] -= 2.0 * s * v[j].conj();
                }
            }
        }
    }
    if n >= 2 {
        sub[n - 2] = a[(n - 1) * n + n - 2];
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (diag, sub, q)
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal
/// matrix; `e[i]` couples `i` and `i + 1`. Rotations are applied to the
/// columns of `z` (row-major `n × n`) when given.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<(), SpectraError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(SpectraError::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Real symmetric tridiagonal data `(d, |e|)` and the phases `φ` with
/// `T = Φ T_real Φ*`.
fn phase_reduce(sub: &[Complex64], n: usize) -> (Vec<f64>, Vec<Complex64>) {
    let mut e = vec![0.0; n];
    let mut phi = vec![Complex64::new(1.0, 0.0); n];
    for k in 0..sub.len() {
        let mag = sub[k].norm();
        e[k] = mag;
        phi[k + 1] = if mag > 0.0 { phi[k] * sub[k] / mag } else { phi[k] };
    }
    (e, phi)
}

fn sorted_desc(values: Vec<f64>) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    (order.iter().map(|&i| values[i]).collect(), order)
}

/// Full spectrum with eigenvectors formed for the residual check.
pub fn eigen_sorted(m: &HermitianMatrix) -> Result<Spectrum, SpectraError> {
    if !m.is_finite() {
        return Err(SpectraError::NotFinite);
    }
    let n = m.order();
    let (mut d, sub, q) = tridiagonalize(m, true);
    let (mut e, phi) = phase_reduce(&sub, n);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, Some(&mut z))?;
    let q = q.expect("requested");
    // V = Q Φ Z
    let mut residual: f64 = 0.0;
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for col in 0..n {
        for r in 0..n {
            v[r] = (0..n).map(|k| q[r * n + k] * phi[k] * z[k * n + col]).sum();
        }
        let mv = m.mul_vec(&v);
        let res: f64 = mv.iter().zip(&v).map(|(a, b)| (a - b * d[col]).norm_sqr()).sum::<f64>().sqrt();
        residual = residual.max(res);
    }
    let (eigenvalues, _) = sorted_desc(d);
    Ok(Spectrum { eigenvalues, residual: Some(residual) })
}

/// Eigenvalues only; the fast path used by replica loops.
pub fn eigenvalues(m: &HermitianMatrix) -> Result<Spectrum, SpectraError> {
    if !m.is_finite() {
        return Err(SpectraError::NotFinite);
    }
    let n = m.order();
    let (mut d, sub, _) = tridiagonalize(m, false);
    let (mut e, _) = phase_reduce(&sub, n);
    tql(&mut d, &mut e, None)?;
    Ok(Spectrum { eigenvalues: sorted_desc(d).0, residual: None })
}

// ---------------------------------------------------------------------------
// Lipschitz test functions

/// `g_v(x) = min(max(x, 0), v)`.
pub fn g_v(v: f64, x: f64) -> f64 {
    x.clamp(0.0, v)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LipKind {
    Clamp { v: f64 },
    Shifted { x0: f64, x1: f64 },
    Truncated { tau: f64 },
    Staircase { delta: f64, k_lo: f64, k_hi: f64, pieces: usize },
    Named(String),
}

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function with `‖f‖_Lip ≤ 1`, evaluated by exact piecewise formulas.
#[derive(Clone)]
pub struct LipFn {
    kind: LipKind,
    eval: Eval,
    sup_norm: Option<f64>,
}

impl fmt::Debug for LipFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipFn").field("kind", &self.kind).field("sup_norm", &self.sup_norm).finish()
    }
}

fn bad(msg: impl Into<String>) -> SpectraError {
    SpectraError::BadParams(msg.into())
}

impl LipFn {
    /// Wraps an arbitrary function after checking `|f(x) - f(y)| ≤ |x - y|`
    /// between neighbouring points of a 10⁴-point grid on `[-range, range]`.
    pub fn from_fn<F>(name: &str, f: F, sup_norm: Option<f64>, range: f64) -> Result<Self, SpectraError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let grid = 10_000;
        let h = 2.0 * range / grid as f64;
        let mut prev = f(-range);
        for k in 1..=grid {
            let x = -range + k as f64 * h;
            let cur = f(x);
            if !cur.is_finite() || (cur - prev).abs() > h * (1.0 + 1e-9) + 1e-12 {
                return Err(bad(format!("{name} is not 1-Lipschitz near x = {x}")));
            }
            prev = cur;
        }
        Ok(Self { kind: LipKind::Named(name.into()), eval: Arc::new(f), sup_norm })
    }

    pub fn clamp(v: f64) -> Result<Self, SpectraError> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(bad(format!("g_v needs v > 0, got {v}")));
        }
        Ok(Self { kind: LipKind::Clamp { v }, eval: Arc::new(move |x| g_v(v, x)), sup_norm: Some(v) })
    }

    /// `g_{x₀,x₁}(x) = g_{x₁}(x - x₀)`.
    pub fn shifted(x0: f64, x1: f64) -> Result<Self, SpectraError> {
        if !(x1 > 0.0 && x1.is_finite() && x0.is_finite()) {
            return Err(bad(format!("g_{{x0,x1}} needs x1 > 0, got {x1}")));
        }
        Ok(Self { kind: LipKind::Shifted { x0, x1 }, eval: Arc::new(move |x| g_v(x1, x - x0)), sup_norm: Some(x1) })
    }

    /// `f` on `(-τ, τ)`, continued by slope-one ramps down to zero.
    pub fn truncate(base: &LipFn, tau: f64) -> Result<Self, SpectraError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(bad(format!("f_tau needs tau > 0, got {tau}")));
        }
        let f = base.eval.clone();
        let (fp, fm) = (f(tau), f(-tau));
        let eval = move |x: f64| {
            if x.abs() < tau {
                f(x)
            } else if x >= tau && x < tau + fp.abs() {
                fp - fp.signum() * (x - tau)
            } else if x <= -tau && x > -tau - fm.abs() {
                fm + fm.signum() * (x + tau)
            } else {
                0.0
            }
        };
        Ok(Self { kind: LipKind::Truncated { tau }, eval: Arc::new(eval), sup_norm: base.sup_norm })
    }

    /// Sum of `⌈|K|/Δ⌉` signed translates of `g_Δ` tracking `f` on
    /// `K = [k_lo, k_hi]` to within `Δ`.
    pub fn staircase(base: &LipFn, delta: f64, k_lo: f64, k_hi: f64) -> Result<Self, SpectraError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(bad(format!("staircase needs delta > 0, got {delta}")));
        }
        if !(k_hi > k_lo && k_lo.is_finite() && k_hi.is_finite()) {
            return Err(bad(format!("compact set [{k_lo}, {k_hi}] is empty")));
        }
        let pieces = ((k_hi - k_lo) / delta).ceil() as usize;
        let mut signs = Vec::with_capacity(pieces);
        let mut level = 0.0;
        for j in 1..=pieces {
            let up = base.eval(k_lo + j as f64 * delta) > level;
            let s = if up { 1.0 } else { -1.0 };
            level += s * delta;
            signs.push(s);
        }
        let eval = move |x: f64| {
            let t = x - k_lo;
            if t <= 0.0 {
                return 0.0;
            }
            let full = ((t / delta).floor() as usize).min(signs.len());
            let mut v: f64 = signs[..full].iter().sum::<f64>() * delta;
            if full < signs.len() {
                v += signs[full] * g_v(delta, t - full as f64 * delta);
            }
            v
        };
        Ok(Self {
            kind: LipKind::Staircase { delta, k_lo, k_hi, pieces },
            eval: Arc::new(eval),
            sup_norm: None,
        })
    }

    pub fn kind(&self) -> &LipKind {
        &self.kind
    }

    /// `‖f‖_∞` when known.
    pub fn sup_norm(&self) -> Option<f64> {
        self.sup_norm
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// The function as a plain closure.
    pub fn as_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.eval(x)
    }
}

/// Serializable description of a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LipSpec {
    Identity,
    Abs,
    Sin,
    Tanh,
    /// Triangle of half-width `width` and height `width` centred at `center`.
    Hat { center: f64, width: f64 },
    Clamp { v: f64 },
    Shifted { x0: f64, x1: f64 },
    Truncated { base: Box<LipSpec>, tau: f64 },
    Staircase { base: Box<LipSpec>, delta: f64, k_lo: f64, k_hi: f64 },
}

impl LipSpec {
    pub fn build(&self) -> Result<LipFn, SpectraError> {
        let named = |name: &str, f: fn(f64) -> f64, sup: Option<f64>| LipFn {
            kind: LipKind::Named(name.into()),
            eval: Arc::new(f),
            sup_norm: sup,
        };
        Ok(match self {
            LipSpec::Identity => named("identity", |x| x, None),
            LipSpec::Abs => named("abs", f64::abs, None),
            LipSpec::Sin => named("sin", f64::sin, Some(1.0)),
            LipSpec::Tanh => named("tanh", f64::tanh, Some(1.0)),
            LipSpec::Hat { center, width } => {
                if !(*width > 0.0) {
                    return Err(bad("hat needs width > 0"));
                }
                let (c, w) = (*center, *width);
                LipFn {
                    kind: LipKind::Named(format!("hat({c},{w})")),
                    eval: Arc::new(move |x| (w - (x - c).abs()).max(0.0)),
                    sup_norm: Some(w),
                }
            }
            LipSpec::Clamp { v } => LipFn::clamp(*v)?,
            LipSpec::Shifted { x0, x1 } => LipFn::shifted(*x0, *x1)?,
            LipSpec::Truncated { base, tau } => LipFn::truncate(&base.build()?, *tau)?,
            LipSpec::Staircase { base, delta, k_lo, k_hi } => LipFn::staircase(&base.build()?, *delta, *k_lo, *k_hi)?,
        })
    }
}
