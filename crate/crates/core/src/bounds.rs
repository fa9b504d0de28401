//! Closed-form concentration bounds as functions of the deviation `δ`.
//!
//! Every bound is evaluated pointwise into a [`BoundCurve`] that records
//! the value (capped at 1), the validity predicate of the statement at each
//! `δ`, and the constants solved along the way. [`evaluate`] dispatches on
//! the string tags used by configs and the command line.

use std::collections::BTreeMap;
use std::f64::consts::{E, SQRT_2};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::levy::{LevyError, LevyModel};
use crate::rate::{self, BennettRate, RateError, RateFunction};
use crate::roots::{self, RootError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("the model has no exponential moments")]
    NoExponentialMoment,
    #[error("no δ in the grid satisfies the validity condition")]
    EmptyValidityRange,
    #[error("the Lévy measure has unbounded support")]
    UnboundedSupport,
    #[error("alpha = {alpha} is outside the range of this bound")]
    BadAlpha { alpha: f64 },
    #[error("gamma = {gamma} gives ν̄(p_γ) = {tail} > 1/4")]
    InvalidGamma { gamma: f64, tail: f64 },
    #[error("δ = {delta} is below the validity threshold {threshold}")]
    BelowValidity { delta: f64, threshold: f64 },
    #[error("δ = {delta} is not below η(ε) = {eta}")]
    AboveEta { delta: f64, eta: f64 },
    #[error("unknown bound tag {0:?}")]
    UnknownTag(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Levy(LevyError),
    #[error(transparent)]
    Root(#[from] RootError),
}

impl From<LevyError> for BoundError {
    fn from(e: LevyError) -> Self {
        match e {
            LevyError::NoExponentialMoment => BoundError::NoExponentialMoment,
            other => BoundError::Levy(other),
        }
    }
}

impl From<RateError> for BoundError {
    fn from(e: RateError) -> Self {
        BoundError::Levy(e.into())
    }
}

fn bad(msg: impl Into<String>) -> BoundError {
    BoundError::BadParams(msg.into())
}

// ---------------------------------------------------------------------------
// Curves

/// One evaluated point of a bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub value: f64,
    pub valid: bool,
    pub reason: Option<String>,
}

impl Point {
    pub fn valid(value: f64) -> Self {
        Self { value: value.clamp(0.0, 1.0), valid: true, reason: None }
    }

    pub fn invalid(value: f64, reason: impl Into<String>) -> Self {
        let value = if value.is_nan() { value } else { value.clamp(0.0, 1.0) };
        Self { value, valid: false, reason: Some(reason.into()) }
    }

    fn checked(value: f64, ok: bool, reason: impl FnOnce() -> String) -> Self {
        if ok {
            Self::valid(value)
        } else {
            Self::invalid(value, reason())
        }
    }
}

/// Bound values over a grid of deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub source: String,
    pub params: BTreeMap<String, Value>,
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    pub reasons: Vec<Option<String>>,
    pub aux: BTreeMap<String, Value>,
}

impl BoundCurve {
    pub fn from_fn<F: FnMut(f64) -> Point>(source: &str, deltas: &[f64], mut f: F) -> Self {
        let mut curve = Self {
            source: source.into(),
            params: BTreeMap::new(),
            deltas: deltas.to_vec(),
            values: Vec::with_capacity(deltas.len()),
            valid: Vec::with_capacity(deltas.len()),
            reasons: Vec::with_capacity(deltas.len()),
            aux: BTreeMap::new(),
        };
        for &d in deltas {
            let p = f(d);
            curve.values.push(p.value);
            curve.valid.push(p.valid);
            curve.reasons.push(p.reason);
        }
        curve
    }

    pub fn with_aux(mut self, key: &str, value: Value) -> Self {
        self.aux.insert(key.into(), value);
        self
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn point(&self, i: usize) -> Point {
        Point { value: self.values[i], valid: self.valid[i], reason: self.reasons[i].clone() }
    }

    /// Errors with [`BoundError::EmptyValidityRange`] when no point is valid.
    pub fn require_valid(self) -> Result<Self, BoundError> {
        if self.valid.iter().any(|&v| v) {
            Ok(self)
        } else {
            Err(BoundError::EmptyValidityRange)
        }
    }
}

/// Turns a bound on deviations from the mean into one on deviations from
/// a median: `P(|F - m| ≥ δ) ≤ P(|F - E F| ≥ δ/4)`.
pub fn median_from_mean<F: Fn(f64) -> Point>(f: F) -> impl Fn(f64) -> Point {
    move |delta| f(delta / 4.0)
}

/// `n` equally spaced points from `d0` to `d1` inclusive.
pub fn linear_grid(d0: f64, d1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![d0],
        _ => (0..n).map(|i| d0 + (d1 - d0) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Parses `d0:d1:n` into a linear grid and `log:d0:d1:n` into a log-spaced one.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, BoundError> {
    let (log, body) = match text.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let parts: Vec<&str> = body.split(':').collect();
    let err = || bad(format!("grid {text:?} must look like d0:d1:n or log:d0:d1:n"));
    if parts.len() != 3 {
        return Err(err());
    }
    let d0: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let d1: f64 = parts[1].trim().parse().map_err(|_| err())?;
    let n: usize = parts[2].trim().parse().map_err(|_| err())?;
    if n == 0 || !d0.is_finite() || !d1.is_finite() || d1 < d0 || (log && d0 <= 0.0) {
        return Err(err());
    }
    Ok(if log { log_grid(d0, d1, n) } else { linear_grid(d0, d1, n) })
}

/// `n` log-spaced points from `d0` to `d1` inclusive.
pub fn log_grid(d0: f64, d1: f64, n: usize) -> Vec<f64> {
    linear_grid(d0.ln(), d1.ln(), n).into_iter().map(f64::exp).collect()
}

// ---------------------------------------------------------------------------
// Constants

/// `ℓ(x) = (1 + x) ln(1 + x) - x`, accurate near zero.
pub fn ell(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 * (0.5 + x * (-1.0 / 6.0 + x * (1.0 / 12.0 + x * (-1.0 / 20.0 + x / 30.0))))
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

/// Root in `y > 0` of `y - (y + γ) ln(1 + y/γ) = ln x`, `0 < x < 1`.
pub fn k_gamma(gamma: f64, x: f64) -> f64 {
    assert!(gamma > 0.0, "gamma must be positive");
    assert!(x > 0.0 && x < 1.0, "x must lie in (0, 1)");
    // with y = γu the equation reads γ ℓ(u) = -ln x
    let target = -x.ln() / gamma;
    let u = roots::solve_increasing(ell, target, 0.0, 1.0, Tolerance::RELATIVE).expect("ℓ is unbounded");
    gamma * u
}

/// Constants of the stable bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableConstants {
    pub alpha: f64,
    pub c_thm15: f64,
    pub c_lem24: f64,
    pub c3: f64,
    pub c4: f64,
    /// Only for `α ∈ (1, 2)`.
    pub c_253: Option<f64>,
    /// The same constant with denominator `α(2 - α)`.
    pub c_253_eq_variant: Option<f64>,
    pub k: Option<f64>,
    pub l: Option<f64>,
}

impl StableConstants {
    pub fn new(alpha: f64) -> Result<Self, BoundError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(BoundError::BadAlpha { alpha });
        }
        let two = 2.0 - alpha;
        let c_thm15 = 4f64.powf(alpha) * (two + E * alpha) / (alpha * two);
        let c_lem24 = 2f64.powf(2.5 * alpha) * (2.0 * E * alpha + two) / (alpha * two);
        let twelve = 12f64.powf(alpha);
        let (c_253, c_253_eq_variant, k, l) = if alpha > 1.0 {
            let c = 2f64.powf(alpha) * (E * alpha + two) / (2.0 * two);
            let c_eq = 2f64.powf(alpha) * (E * alpha + two) / (alpha * two);
            let k = (2f64.powf(alpha) / (alpha - 1.0)).max(c);
            let l = ((alpha - 1.0) / alpha).powf(alpha / (alpha - 1.0)) * two / 10.0;
            (Some(c), Some(c_eq), Some(k), Some(l))
        } else {
            (None, None, None, None)
        };
        Ok(Self {
            alpha,
            c_thm15,
            c_lem24,
            c3: 2f64.powf(4.0 + 2.0 * alpha) * twelve * c_lem24,
            c4: 2.0 * twelve * c_lem24,
            c_253,
            c_253_eq_variant,
            k,
            l,
        })
    }

    fn need_above_one(&self) -> Result<(f64, f64, f64), BoundError> {
        match (self.c_253, self.k, self.l) {
            (Some(c), Some(k), Some(l)) => Ok((c, k, l)),
            _ => Err(BoundError::BadAlpha { alpha: self.alpha }),
        }
    }
}

// ---------------------------------------------------------------------------
// Location of medians and means

/// `G₁(γ)`, `G₂(γ)` and their ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianMean {
    pub gamma: f64,
    pub p_gamma: f64,
    pub k_quarter: f64,
    pub e_gamma: f64,
    pub tail: f64,
    pub g1: f64,
    pub g2: f64,
}

/// Relative slack granted to the `ν̄(p_γ) ≤ 1/4` check.
const QUARTER_SLACK: f64 = 1e-12;

pub fn median_mean_bounds(model: &LevyModel, gamma: f64) -> Result<MedianMean, BoundError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(bad(format!("gamma = {gamma} must be positive")));
    }
    let p = model.p_gamma(gamma);
    let tail = model.nu_bar(p);
    if tail > 0.25 * (1.0 + QUARTER_SLACK) {
        return Err(BoundError::InvalidGamma { gamma, tail });
    }
    let k = k_gamma(gamma, 0.25);
    let e = model.e_at_radius(p);
    let root = gamma.sqrt();
    Ok(MedianMean {
        gamma,
        p_gamma: p,
        k_quarter: k,
        e_gamma: e,
        tail,
        g1: p * (root + 3.0 * k) + e,
        g2: p * (root + k) + e,
    })
}

/// The `γ` grid searched by [`default_median_mean`].
pub fn gamma_grid() -> Vec<f64> {
    log_grid(1e-4, 1e4, 161)
}

/// Minimizes `G₂` over [`gamma_grid`] among admissible `γ`.
pub fn default_median_mean(model: &LevyModel) -> Result<MedianMean, BoundError> {
    let mut best: Option<MedianMean> = None;
    for g in gamma_grid() {
        if let Ok(mm) = median_mean_bounds(model, g) {
            if best.is_none_or(|b| mm.g2 < b.g2) {
                best = Some(mm);
            }
        }
    }
    best.ok_or(BoundError::EmptyValidityRange)
}

/// Which prefactor feeds `J₁`, `J₂` in the stable location bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorVariant {
    /// `(σ/(4α))^{1/α}`.
    #[default]
    Printed,
    /// `(4σ/α)^{1/α}`, the value of `p_γ` at `γ = α/(4(2-α))`.
    Consistent,
}

/// An `α`-stable law summarized by `α`, `σ(S^{d-1})` and the location
/// correction `E` at radius `(4σ/α)^{1/α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    pub alpha: f64,
    pub sigma_total: f64,
    pub e: f64,
}

impl StableLaw {
    /// A law with zero location correction (e.g. symmetric).
    pub fn symmetric(alpha: f64, sigma_total: f64) -> Self {
        Self { alpha, sigma_total, e: 0.0 }
    }

    pub fn from_model(model: &LevyModel) -> Result<Self, BoundError> {
        let alpha = model.alpha().ok_or_else(|| bad("model has no stable component"))?;
        if model.has_atoms() {
            return Err(bad("stable bounds need a purely stable model"));
        }
        let sigma = model.sigma_total();
        let p = (4.0 * sigma / alpha).powf(1.0 / alpha);
        Ok(Self { alpha, sigma_total: sigma, e: model.e_at_radius(p) })
    }

    fn check(&self) -> Result<StableConstants, BoundError> {
        if !(self.sigma_total > 0.0 && self.sigma_total.is_finite()) {
            return Err(bad(format!("sigma_total = {} must be positive", self.sigma_total)));
        }
        StableConstants::new(self.alpha)
    }
}

/// `J₁`, `J₂` from both prefactors, and `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLocation {
    pub gamma: f64,
    pub k_quarter: f64,
    pub prefactor_printed: f64,
    pub prefactor_consistent: f64,
    pub j1: f64,
    pub j2: f64,
    pub j1_consistent: f64,
    pub j2_consistent: f64,
    pub e: f64,
}

impl StableLocation {
    pub fn j1_for(&self, variant: PrefactorVariant) -> f64 {
        match variant {
            PrefactorVariant::Printed => self.j1,
            PrefactorVariant::Consistent => self.j1_consistent,
        }
    }

    pub fn j2_for(&self, variant: PrefactorVariant) -> f64 {
        match variant {
            PrefactorVariant::Printed => self.j2,
            PrefactorVariant::Consistent => self.j2_consistent,
        }
    }
}

pub fn stable_location_bounds(law: &StableLaw) -> Result<StableLocation, BoundError> {
    law.check()?;
    let (alpha, sigma) = (law.alpha, law.sigma_total);
    let gamma = alpha / (4.0 * (2.0 - alpha));
    let k = k_gamma(gamma, 0.25);
    let printed = (sigma / (4.0 * alpha)).powf(1.0 / alpha);
    let consistent = (4.0 * sigma / alpha).powf(1.0 / alpha);
    let root = gamma.sqrt();
    Ok(StableLocation {
        gamma,
        k_quarter: k,
        prefactor_printed: printed,
        prefactor_consistent: consistent,
        j1: printed * (root + 3.0 * k) + law.e,
        j2: printed * (root + k) + law.e,
        j1_consistent: consistent * (root + 3.0 * k) + law.e,
        j2_consistent: consistent * (root + k) + law.e,
        e: law.e,
    })
}

// ---------------------------------------------------------------------------
// Finite exponential moments

/// Inputs shared by the matrix bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    /// Matrix size `N`.
    #[serde(alias = "N")]
    pub n: usize,
    /// Bound on the pattern entries.
    pub a: f64,
    /// Sup-norm bound of the test functions.
    pub b: f64,
    /// Diameter `|K|` of the compact support of the test functions.
    pub k_diameter: f64,
    /// Lipschitz norm of the test function.
    pub lip_norm: f64,
    /// Universal constant multiplying `C(δ, b)`.
    pub universal_c: f64,
    /// Fixed `γ`; the default minimizes `G₂`.
    pub gamma: Option<f64>,
    /// Replaces `G₂(γ)` (e.g. by an estimate of `E‖X‖`).
    pub g2_override: Option<f64>,
    pub prefactor: PrefactorVariant,
    /// Stable index and spherical mass when no model is given.
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    /// Location correction `E` when no model is given.
    pub e: f64,
    /// `η₀(ε)` and `ε` of the lower-range bound.
    pub eta0: Option<f64>,
    pub epsilon: f64,
    /// Lemma-type `x₁`.
    pub x1: f64,
    /// Lipschitz constant for the mean-deviation stable bound; defaults to
    /// that of `λ_max`, `√2 a/√N`.
    pub lipschitz: Option<f64>,
    /// Number of rows `K` for the Wishart bounds.
    pub k_rows: Option<usize>,
    /// Median of `λ_max(M^{1/2})` and the spherical mass in the
    /// `λ`-norm for the lower tail bound.
    pub median: f64,
    pub sigma_tilde: Option<f64>,
    /// Uses `ν(‖X‖_λ ≥ 2x)` without dropping the factor `2^α`.
    pub halved_radius: bool,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            n: 1,
            a: 1.0,
            b: 1.0,
            k_diameter: 1.0,
            lip_norm: 1.0,
            universal_c: 1.0,
            gamma: None,
            g2_override: None,
            prefactor: PrefactorVariant::Printed,
            alpha: None,
            sigma: None,
            e: 0.0,
            eta0: None,
            epsilon: 0.0,
            x1: 1.0,
            lipschitz: None,
            k_rows: None,
            median: 0.0,
            sigma_tilde: None,
            halved_radius: false,
        }
    }
}

impl BoundParams {
    pub fn new(n: usize, a: f64) -> Self {
        Self { n, a, ..Self::default() }
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn check(&self) -> Result<(), BoundError> {
        if self.n == 0 {
            return Err(bad("N must be positive"));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("k_diameter", self.k_diameter), ("lip_norm", self.lip_norm)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.universal_c > 0.0) {
            return Err(bad("universal_c must be positive"));
        }
        Ok(())
    }

    fn echo(&self) -> BTreeMap<String, Value> {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
            _ => BTreeMap::new(),
        }
    }
}

/// `exp{-∫₀ˣ h⁻¹}` with the range check `x < h(T⁻)`.
fn legendre_tail<R: RateFunction>(rate: &R, x: f64, prefactor: f64) -> Point {
    let limit = rate.rate_limit();
    if !(x < limit) {
        return Point::invalid(f64::NAN, format!("upper limit {x} is not below h(T-) = {limit}"));
    }
    match rate::inverse_integral(rate, x) {
        Ok(i) => Point::valid(prefactor * (-i).exp()),
        Err(e) => Point::invalid(f64::NAN, e.to_string()),
    }
}

fn g2_for(model: &LevyModel, p: &BoundParams) -> Result<(f64, Option<MedianMean>), BoundError> {
    if let Some(g2) = p.g2_override {
        return Ok((g2, None));
    }
    let mm = match p.gamma {
        Some(g) => median_mean_bounds(model, g)?,
        None => default_median_mean(model)?,
    };
    Ok((mm.g2, Some(mm)))
}

fn median_mean_aux(curve: BoundCurve, g2: f64, mm: Option<MedianMean>) -> BoundCurve {
    let curve = curve.with_aux("g2", json!(g2));
    match mm {
        Some(mm) => curve.with_aux("median_mean", serde_json::to_value(mm).expect("serializable")),
        None => curve.with_aux("g2_override", json!(true)),
    }
}

/// `sup` over 1-Lipschitz functions supported in a compact set of diameter `|K|`.
pub fn trace_compact(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = model.rate()?;
    let (n, a, k) = (p.nf(), p.a, p.k_diameter);
    Ok(BoundCurve::from_fn("thm1.1i", deltas, |d| {
        legendre_tail(&rate, n * d * d / (8.0 * SQRT_2 * a * k), 8.0 * k / d)
    }))
}

/// `t₀` solving `t h(t) - H(t) = ln(12b/δ)`.
pub fn solve_t0<R: RateFunction>(rate: &R, b: f64, delta: f64) -> Result<f64, BoundError> {
    let level = (12.0 * b / delta).ln();
    if !(level > 0.0) {
        return Err(bad(format!("ln(12b/δ) = {level} must be positive (δ < 12b)")));
    }
    Ok(rate::solve_gap(rate, level)?)
}

/// `sup` over `Lip_b(1)` with the constant `C(δ, b)`.
pub fn trace_bounded(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = model.rate()?;
    let (g2, mm) = g2_for(model, p)?;
    let (n, a, b) = (p.nf(), p.a, p.b);
    let scale = SQRT_2 * a / n.sqrt();
    let mut t0s = Vec::new();
    let mut cs = Vec::new();
    let curve = BoundCurve::from_fn("thm1.1ii", deltas, |d| {
        let t0 = match solve_t0(&rate, b, d) {
            Ok(t) => t,
            Err(e) => {
                t0s.push(Value::Null);
                cs.push(Value::Null);
                return Point::invalid(f64::NAN, e.to_string());
            }
        };
        let c = p.universal_c * (scale * (g2 + rate.rate(t0)) + b);
        t0s.push(json!(t0));
        cs.push(json!(c));
        legendre_tail(&rate, n * d * d / (SQRT_2 * a * c), c / d)
    });
    Ok(median_mean_aux(curve, g2, mm).with_aux("t0", Value::Array(t0s)).with_aux("c_delta_b", Value::Array(cs)))
}

/// Wasserstein distance to a fixed law, deviation above its mean.
pub fn wasserstein_mean(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = model.rate()?;
    let (n, a) = (p.nf(), p.a);
    Ok(BoundCurve::from_fn("prop1.3", deltas, |d| legendre_tail(&rate, n * d / (SQRT_2 * a), 1.0)))
}

/// `tr_N f` for one Lipschitz `f`, deviation above its mean.
pub fn trace_lipschitz(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = model.rate()?;
    let (n, a, l) = (p.nf(), p.a, p.lip_norm);
    Ok(BoundCurve::from_fn("prop2.1i", deltas, |d| legendre_tail(&rate, n * d / (SQRT_2 * a * l), 1.0)))
}

/// `λ_max`, deviation above its mean.
pub fn lambda_max_mean(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = model.rate()?;
    let (n, a) = (p.nf(), p.a);
    Ok(BoundCurve::from_fn("prop2.1ii", deltas, |d| legendre_tail(&rate, n.sqrt() * d / (SQRT_2 * a), 1.0)))
}

/// Returns one curve per finite-exponential-moment statement.
pub fn exp_tail_bounds(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<Vec<BoundCurve>, BoundError> {
    Ok(vec![
        trace_compact(model, p, deltas)?,
        trace_bounded(model, p, deltas)?,
        wasserstein_mean(model, p, deltas)?,
        trace_lipschitz(model, p, deltas)?,
        lambda_max_mean(model, p, deltas)?,
    ])
}

// ---------------------------------------------------------------------------
// Bounded support

/// `R` and `V² = V²(R)` of a boundedly supported model.
pub fn bennett_rate(model: &LevyModel) -> Result<BennettRate, BoundError> {
    let radius = model.support_radius().ok_or(BoundError::UnboundedSupport)?;
    Ok(BennettRate { v2: model.v2(radius), radius })
}

/// `exp{-(V²/R²) ℓ(R x / V²)}`, the Legendre transform of the Bennett rate at `x`.
pub fn bennett_exponent(rate: &BennettRate, x: f64) -> f64 {
    let (v2, r) = (rate.v2, rate.radius);
    (-(v2 / (r * r)) * ell(r * x / v2)).exp()
}

pub fn bennett_trace_bounded(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = bennett_rate(model)?;
    let (g2, mm) = g2_for(model, p)?;
    let (n, a, b) = (p.nf(), p.a, p.b);
    let (v2, r) = (rate.v2, rate.radius);
    let mut t0s = Vec::new();
    let curve = BoundCurve::from_fn("cor1.4i", deltas, |d| {
        let t0 = match solve_t0(&rate, b, d) {
            Ok(t) => t,
            Err(e) => {
                t0s.push(Value::Null);
                return Point::invalid(f64::NAN, e.to_string());
            }
        };
        t0s.push(json!(t0));
        let c = p.universal_c * (SQRT_2 * a / n.sqrt() * (g2 + v2 / r * (t0 * r).exp_m1()) + b);
        let u = n * r * d * d / (SQRT_2 * a * c * v2);
        Point::valid(c / d * (-(v2 / (r * r)) * ell(u)).exp())
    });
    Ok(median_mean_aux(curve, g2, mm)
        .with_aux("t0", Value::Array(t0s))
        .with_aux("radius", json!(r))
        .with_aux("v2", json!(v2)))
}

/// Wasserstein deviation for bounded support in the Legendre-consistent
/// form `exp{-(V²/R²) ℓ(N R δ/(√2 a V²))}`.
pub fn bennett_wasserstein(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = bennett_rate(model)?;
    let (n, a) = (p.nf(), p.a);
    Ok(BoundCurve::from_fn("cor1.4ii", deltas, |d| Point::valid(bennett_exponent(&rate, n * d / (SQRT_2 * a))))
        .with_aux("radius", json!(rate.radius))
        .with_aux("v2", json!(rate.v2)))
}

/// The same statement with `δ²` inside the logarithm, as printed.
pub fn bennett_wasserstein_printed(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = bennett_rate(model)?;
    let (n, a, v2, r) = (p.nf(), p.a, rate.v2, rate.radius);
    Ok(BoundCurve::from_fn("cor1.4ii_printed", deltas, |d| {
        let s = n * d / (SQRT_2 * a * r);
        Point::valid((s - (s + v2 / (r * r)) * (n * r * d * d / (SQRT_2 * a * v2)).ln_1p()).exp())
    }))
}

/// Bennett form of the `λ_max` mean-deviation bound.
pub fn bennett_lambda_max(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    let rate = bennett_rate(model)?;
    let (n, a) = (p.nf(), p.a);
    Ok(BoundCurve::from_fn("bennett_lambda_max", deltas, |d| {
        Point::valid(bennett_exponent(&rate, n.sqrt() * d / (SQRT_2 * a)))
    }))
}

pub fn bennett_bounds(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<Vec<BoundCurve>, BoundError> {
    Ok(vec![
        bennett_trace_bounded(model, p, deltas)?,
        bennett_wasserstein(model, p, deltas)?,
        bennett_wasserstein_printed(model, p, deltas)?,
        bennett_lambda_max(model, p, deltas)?,
    ])
}

// ---------------------------------------------------------------------------
// Stable laws

/// Functional targeted by [`stable_tail_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "target")]
pub enum StableTarget {
    TrNf,
    LambdaMax,
    Wasserstein,
    /// Deviation from the mean of a functional with the given Lipschitz constant.
    MeanDev { lipschitz: f64 },
}

impl StableTarget {
    fn tag(&self) -> &'static str {
        match self {
            StableTarget::TrNf => "thm1.5i",
            StableTarget::LambdaMax => "thm1.5ii",
            StableTarget::Wasserstein => "thm1.7ii",
            StableTarget::MeanDev { .. } => "eq2.53",
        }
    }
}

/// Median-deviation (or mean-deviation) polynomial tails of stable matrices.
pub fn stable_tail_bound(
    law: &StableLaw,
    n: usize,
    a: f64,
    target: StableTarget,
    deltas: &[f64],
) -> Result<BoundCurve, BoundError> {
    let c = law.check()?;
    let (alpha, sigma, nf) = (law.alpha, law.sigma_total, n as f64);
    let threshold_base = SQRT_2 * a * (2.0 * sigma * c.c_thm15).powf(1.0 / alpha);
    let numerator = c.c_thm15 * (SQRT_2 * a).powf(alpha) * sigma;
    let curve = match target {
        StableTarget::TrNf => {
            let th = threshold_base / nf;
            BoundCurve::from_fn(target.tag(), deltas, |d| {
                Point::checked(numerator / (nf.powf(alpha) * d.powf(alpha)), d > th, || format!("needs δ > {th}"))
            })
            .with_aux("threshold", json!(th))
        }
        StableTarget::LambdaMax => {
            let th = threshold_base / nf.sqrt();
            BoundCurve::from_fn(target.tag(), deltas, |d| {
                Point::checked(numerator / (nf.powf(alpha / 2.0) * d.powf(alpha)), d > th, || format!("needs δ > {th}"))
            })
            .with_aux("threshold", json!(th))
        }
        StableTarget::Wasserstein => {
            let th = threshold_base / nf;
            BoundCurve::from_fn(target.tag(), deltas, |d| {
                Point::checked(numerator / (nf.powf(alpha) * d.powf(alpha)), d >= th, || format!("needs δ ≥ {th}"))
            })
            .with_aux("threshold", json!(th))
        }
        StableTarget::MeanDev { lipschitz } => {
            let (c253, k, _) = c.need_above_one()?;
            if !(lipschitz > 0.0) {
                return Err(bad("lipschitz constant must be positive"));
            }
            let th = lipschitz * (k * sigma).powf(1.0 / alpha);
            BoundCurve::from_fn(target.tag(), deltas, |d| {
                Point::checked(c253 * sigma * (lipschitz / d).powf(alpha), d >= th, || format!("needs δ ≥ {th}"))
            })
            .with_aux("threshold", json!(th))
            .with_aux("c_253_eq_variant", json!(c.c_253_eq_variant))
        }
    };
    Ok(curve.with_aux("constants", serde_json::to_value(c).expect("serializable")))
}

/// `sup` over `Lip_b(1)` for stable matrices, assembled with the explicit
/// proof constants `C₃`, `C₄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableSup {
    pub value: f64,
    pub tau: f64,
    pub k_diameter: f64,
    pub j1: f64,
    /// Smallest `δ` satisfying both range conditions.
    pub threshold: f64,
}

struct SupSetup {
    alpha: f64,
    sigma: f64,
    nf: f64,
    a: f64,
    b: f64,
    j1: f64,
    c: StableConstants,
}

impl SupSetup {
    fn scale(&self) -> f64 {
        SQRT_2 * self.a / self.nf.sqrt()
    }

    fn tau(&self, d: f64) -> f64 {
        self.scale() * (self.j1 + d)
    }

    fn range_compact(&self, d: f64) -> bool {
        let k = 2.0 * (self.tau(d) + self.b);
        d * d / (8.0 * k) > 2.0 * SQRT_2 * self.a / self.nf * (self.sigma * d / (4.0 * self.alpha)).powf(1.0 / (1.0 + self.alpha))
    }

    fn range_clamp(&self, d: f64) -> f64 {
        let th = (2.0 * SQRT_2 * self.a / self.nf).powf(1.0 + self.alpha) * 12f64.powf(1.0 + self.alpha) * self.sigma * self.b
            / self.alpha;
        th.powf(1.0 / (1.0 + self.alpha)) - d
    }

    fn valid(&self, d: f64) -> bool {
        self.range_compact(d) && self.range_clamp(d) < 0.0
    }

    fn value(&self, d: f64) -> f64 {
        let (alpha, nf, a) = (self.alpha, self.nf, self.a);
        let inner = self.scale() * self.j1 + self.b + self.scale() * d;
        let common = a.powf(alpha) * self.sigma / nf.powf(alpha);
        self.c.c3 * common * inner.powf(1.0 + alpha) / d.powf(1.0 + 2.0 * alpha) + self.c.c4 * common / d.powf(alpha)
    }

    fn threshold(&self) -> f64 {
        let mut hi = 1.0;
        while !self.valid(hi) {
            hi *= 2.0;
        }
        let mut lo = hi;
        while self.valid(lo) && lo > 1e-300 {
            lo *= 0.5;
        }
        if self.valid(lo) {
            return 0.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.valid(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn sup_setup(law: &StableLaw, p: &BoundParams) -> Result<SupSetup, BoundError> {
    p.check()?;
    let c = law.check()?;
    let loc = stable_location_bounds(law)?;
    Ok(SupSetup {
        alpha: law.alpha,
        sigma: law.sigma_total,
        nf: p.nf(),
        a: p.a,
        b: p.b,
        j1: loc.j1_for(p.prefactor),
        c,
    })
}

pub fn stable_sup_bound(law: &StableLaw, p: &BoundParams, delta: f64) -> Result<StableSup, BoundError> {
    let s = sup_setup(law, p)?;
    let threshold = s.threshold();
    if !s.valid(delta) {
        return Err(BoundError::BelowValidity { delta, threshold });
    }
    let tau = s.tau(delta);
    Ok(StableSup {
        value: s.value(delta).min(1.0),
        tau,
        k_diameter: 2.0 * (tau + s.b),
        j1: s.j1,
        threshold,
    })
}

pub fn stable_sup_curve(law: &StableLaw, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    let s = sup_setup(law, p)?;
    let threshold = s.threshold();
    Ok(BoundCurve::from_fn("thm1.7i", deltas, |d| {
        Point::checked(s.value(d), s.valid(d), || format!("range conditions need δ > {threshold}"))
    })
    .with_aux("threshold", json!(threshold))
    .with_aux("j1", json!(s.j1))
    .with_aux("prefactor_variant", json!(p.prefactor))
    .with_aux("constants", serde_json::to_value(s.c).expect("serializable")))
}

/// The small-deviation stable bound and its constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerRange {
    pub value: f64,
    pub d_star: f64,
    pub d1: f64,
    pub d1_doubled: f64,
    pub d2: f64,
    pub eta: f64,
    pub j2: f64,
}

fn lower_range_constants(law: &StableLaw, p: &BoundParams) -> Result<LowerRange, BoundError> {
    p.check()?;
    let c = law.check()?;
    let (c253, k, l) = c.need_above_one()?;
    let eta0 = p.eta0.ok_or_else(|| bad("eta0 must be supplied for the lower-range bound"))?;
    let loc = stable_location_bounds(law)?;
    let j2 = loc.j2_for(p.prefactor);
    let (alpha, sigma, nf, a, b) = (law.alpha, law.sigma_total, p.nf(), p.a, p.b);
    let s = SQRT_2 * a / nf.sqrt();
    let ratio = (12.0 * c253 / k).powf(1.0 / alpha);
    let d_star = 2.0 * s.powf((2.0 * alpha - 1.0) / alpha) * ratio * j2 * b.powf(1.0 / alpha)
        + 2.0 * s.powf((alpha - 1.0) / alpha) * ratio * b.powf((alpha + 1.0) / alpha)
        + 2.0 * s * (12.0 * c253 * sigma).powf(1.0 / alpha) * b.powf(1.0 / alpha);
    let q = alpha / (alpha - 1.0);
    let d2 = l / sigma.powf(1.0 / (alpha - 1.0)) * (nf / (SQRT_2 * a)).powf(q) / (72.0 * d_star).powf(q);
    let eta = (72.0 * SQRT_2 * a / nf * (s * j2 + b + (s * k * sigma).powf(1.0 / alpha)) * eta0).sqrt();
    Ok(LowerRange { value: f64::NAN, d_star, d1: 24.0 * d_star, d1_doubled: 48.0 * d_star, d2, eta, j2 })
}

fn lower_range_value(lr: &LowerRange, alpha: f64, epsilon: f64, d: f64) -> f64 {
    (1.0 + epsilon) * lr.d1 / d.powf((alpha + 1.0) / alpha) * (-lr.d2 * d.powf((2.0 * alpha + 1.0) / (alpha - 1.0))).exp()
}

pub fn lower_range_bound(law: &StableLaw, p: &BoundParams, delta: f64) -> Result<LowerRange, BoundError> {
    let mut lr = lower_range_constants(law, p)?;
    if !(delta > 0.0 && delta < lr.eta) {
        return Err(BoundError::AboveEta { delta, eta: lr.eta });
    }
    lr.value = lower_range_value(&lr, law.alpha, p.epsilon, delta).min(1.0);
    Ok(lr)
}

pub fn lower_range_curve(law: &StableLaw, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    let lr = lower_range_constants(law, p)?;
    Ok(BoundCurve::from_fn("thm1.8", deltas, |d| {
        Point::checked(lower_range_value(&lr, law.alpha, p.epsilon, d), d > 0.0 && d < lr.eta, || {
            format!("needs δ < η(ε) = {}", lr.eta)
        })
    })
    .with_aux("lower_range", serde_json::to_value(lr).expect("serializable"))
    .with_aux("eta0", json!(p.eta0))
    .with_aux("epsilon", json!(p.epsilon)))
}

/// Clamp functions `g_{x₀,x₁}` of stable matrices.
pub fn lemma24_bound(law: &StableLaw, n: usize, a: f64, x1: f64, delta: f64) -> Result<f64, BoundError> {
    let c = law.check()?;
    let (alpha, sigma, nf) = (law.alpha, law.sigma_total, n as f64);
    let threshold = ((2.0 * SQRT_2 * a).powf(1.0 + alpha) * sigma * x1 / (alpha * nf.powf(1.0 + alpha))).powf(1.0 / (1.0 + alpha));
    if !(delta > threshold) {
        return Err(BoundError::BelowValidity { delta, threshold });
    }
    Ok((c.c_lem24 * a.powf(alpha) * sigma / (nf.powf(alpha) * delta.powf(alpha))).min(1.0))
}

pub fn lemma24_curve(law: &StableLaw, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    p.check()?;
    law.check()?;
    Ok(BoundCurve::from_fn("lemma2.4", deltas, |d| match lemma24_bound(law, p.n, p.a, p.x1, d) {
        Ok(v) => Point::valid(v),
        Err(e) => Point::invalid(f64::NAN, e.to_string()),
    }))
}

// ---------------------------------------------------------------------------
// Wishart

fn k_rows(p: &BoundParams) -> Result<usize, BoundError> {
    match p.k_rows {
        Some(k) if k > p.n => Ok(k),
        Some(k) => Err(bad(format!("Wishart bounds need K > N, got K = {k}, N = {}", p.n))),
        None => Err(bad("k_rows must be given for the Wishart bounds")),
    }
}

/// `λ_max(M^{1/2})`, deviation above its mean, finite exponential moments.
pub fn wishart_lambda_id(model: &LevyModel, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    let rate = model.rate()?;
    Ok(BoundCurve::from_fn("cor1.10i", deltas, |d| legendre_tail(&rate, d / SQRT_2, 1.0)))
}

/// `λ_max(M^{1/2})`, deviation above a median, stable entries.
pub fn wishart_lambda_stable(law: &StableLaw, a: f64, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    let c = law.check()?;
    let (alpha, sigma) = (law.alpha, law.sigma_total);
    let th = SQRT_2 * a * (2.0 * sigma * c.c_thm15).powf(1.0 / alpha);
    Ok(BoundCurve::from_fn("cor1.10ii", deltas, |d| {
        Point::checked(c.c_thm15 * SQRT_2.powf(alpha) * sigma / d.powf(alpha), d > th, || format!("needs δ > {th}"))
    })
    .with_aux("threshold", json!(th)))
}

/// `tr_N f(M)`, deviation `δ(K+N)/N` above its mean, for `x ↦ f(x²)` with
/// Lipschitz norm `lip_norm`.
pub fn wishart_trace_id(model: &LevyModel, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    let k = k_rows(p)?;
    let rate = model.rate()?;
    let s = (2.0 * (k + p.n) as f64).sqrt();
    Ok(BoundCurve::from_fn("rem1.12iii", deltas, |d| legendre_tail(&rate, s * d / p.lip_norm, 1.0)))
}

/// Stable counterpart of [`wishart_trace_id`], deviation above a median.
pub fn wishart_trace_stable(law: &StableLaw, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    let k = k_rows(p)?;
    let c = law.check()?;
    let (alpha, sigma, f) = (law.alpha, law.sigma_total, p.lip_norm);
    let kn = (k + p.n) as f64;
    let th = f * (2.0 * sigma * c.c_thm15).powf(1.0 / alpha) / (2.0 * kn).sqrt();
    Ok(BoundCurve::from_fn("rem1.12iv", deltas, |d| {
        let v = c.c_thm15 * f.powf(alpha) / (2f64.powf(alpha) * kn.powf(alpha)).sqrt() * sigma / d.powf(alpha);
        Point::checked(v, d > th, || format!("needs δ > {th}"))
    })
    .with_aux("threshold", json!(th)))
}

pub fn wishart_bounds(
    model: &LevyModel,
    p: &BoundParams,
    deltas: &[f64],
) -> Result<Vec<BoundCurve>, BoundError> {
    if model.alpha().is_some() {
        let law = StableLaw::from_model(model)?;
        Ok(vec![wishart_lambda_stable(&law, 1.0, deltas)?, wishart_trace_stable(&law, p, deltas)?])
    } else {
        Ok(vec![wishart_lambda_id(model, deltas)?, wishart_trace_id(model, p, deltas)?])
    }
}

/// Lower bound `¼(1 - exp{-σ̃/(α(δ+m)^α)})` on the upper tail of
/// `λ_max(M^{1/2})` above its median `m`; with `halved_radius` the mass of
/// `{‖X‖_λ ≥ 2(δ+m)}` keeps its factor `2^{-α}`.
pub fn lower_tail_bound(alpha: f64, sigma_tilde: f64, delta: f64, median: f64, halved_radius: bool) -> f64 {
    let r = delta + median;
    let mut mass = sigma_tilde / (alpha * r.powf(alpha));
    if halved_radius {
        mass /= 2f64.powf(alpha);
    }
    0.25 * (-(-mass).exp_m1())
}

pub fn lower_tail_curve(law: &StableLaw, p: &BoundParams, deltas: &[f64]) -> Result<BoundCurve, BoundError> {
    law.check()?;
    let sigma_tilde = p.sigma_tilde.unwrap_or(law.sigma_total);
    Ok(BoundCurve::from_fn("rem1.12ii", deltas, |d| {
        Point::valid(lower_tail_bound(law.alpha, sigma_tilde, d, p.median, p.halved_radius))
    })
    .with_aux("sigma_tilde", json!(sigma_tilde))
    .with_aux("direction", json!("lower")))
}

// ---------------------------------------------------------------------------
// Dispatch

/// Tags accepted by [`evaluate`], with a one-line description.
pub const TAGS: &[(&str, &str)] = &[
    ("thm1.1i", "sup over Lip_K(1), exponential moments"),
    ("thm1.1ii", "sup over Lip_b(1), exponential moments"),
    ("prop1.3", "Wasserstein deviation from the mean, exponential moments"),
    ("prop2.1i", "tr_N f deviation from the mean, exponential moments"),
    ("prop2.1ii", "lambda_max deviation from the mean, exponential moments"),
    ("cor1.4i", "sup over Lip_b(1), bounded support"),
    ("cor1.4ii", "Wasserstein deviation, bounded support"),
    ("cor1.4ii_printed", "Wasserstein deviation, bounded support, printed form"),
    ("bennett_lambda_max", "lambda_max deviation, bounded support"),
    ("thm1.5i", "tr_N f deviation from a median, stable"),
    ("thm1.5ii", "lambda_max deviation from a median, stable"),
    ("thm1.7i", "sup over Lip_b(1), stable"),
    ("thm1.7ii", "Wasserstein deviation from a median, stable"),
    ("eq2.53", "mean deviation of a Lipschitz functional, stable, alpha in (1,2)"),
    ("thm1.8", "small-deviation sup over Lip_b(1), stable, alpha in (1,2)"),
    ("lemma2.4", "clamp function g_{x0,x1}, stable"),
    ("cor1.10i", "Wishart lambda_max, exponential moments"),
    ("cor1.10ii", "Wishart lambda_max, stable"),
    ("rem1.12ii", "Wishart lambda_max lower tail, stable"),
    ("rem1.12iii", "Wishart trace, exponential moments"),
    ("rem1.12iv", "Wishart trace, stable"),
    ("trivial", "the constant bound 1"),
];

fn stable_law(model: Option<&LevyModel>, p: &BoundParams) -> Result<StableLaw, BoundError> {
    match (model, p.alpha, p.sigma) {
        (Some(m), _, _) => StableLaw::from_model(m),
        (None, Some(alpha), Some(sigma)) => Ok(StableLaw { alpha, sigma_total: sigma, e: p.e }),
        _ => Err(bad("stable bounds need a model or both alpha and sigma")),
    }
}

/// Evaluates the bound named `tag` on `deltas`.
pub fn evaluate(
    tag: &str,
    model: Option<&LevyModel>,
    p: &BoundParams,
    deltas: &[f64],
) -> Result<BoundCurve, BoundError> {
    let need_model = || model.ok_or_else(|| bad(format!("{tag} needs a Lévy model")));
    let curve = match tag {
        "thm1.1i" => trace_compact(need_model()?, p, deltas)?,
        "thm1.1ii" => trace_bounded(need_model()?, p, deltas)?,
        "prop1.3" => wasserstein_mean(need_model()?, p, deltas)?,
        "prop2.1i" => trace_lipschitz(need_model()?, p, deltas)?,
        "prop2.1ii" => lambda_max_mean(need_model()?, p, deltas)?,
        "cor1.4i" => bennett_trace_bounded(need_model()?, p, deltas)?,
        "cor1.4ii" => bennett_wasserstein(need_model()?, p, deltas)?,
        "cor1.4ii_printed" => bennett_wasserstein_printed(need_model()?, p, deltas)?,
        "bennett_lambda_max" => bennett_lambda_max(need_model()?, p, deltas)?,
        "thm1.5i" => stable_tail_bound(&stable_law(model, p)?, p.n, p.a, StableTarget::TrNf, deltas)?,
        "thm1.5ii" => stable_tail_bound(&stable_law(model, p)?, p.n, p.a, StableTarget::LambdaMax, deltas)?,
        "thm1.7ii" => stable_tail_bound(&stable_law(model, p)?, p.n, p.a, StableTarget::Wasserstein, deltas)?,
        "eq2.53" => {
            let lipschitz = p.lipschitz.unwrap_or(SQRT_2 * p.a / p.nf().sqrt());
            stable_tail_bound(&stable_law(model, p)?, p.n, p.a, StableTarget::MeanDev { lipschitz }, deltas)?
        }
        "thm1.7i" => stable_sup_curve(&stable_law(model, p)?, p, deltas)?,
        "thm1.8" => lower_range_curve(&stable_law(model, p)?, p, deltas)?,
        "lemma2.4" => lemma24_curve(&stable_law(model, p)?, p, deltas)?,
        "cor1.10i" => wishart_lambda_id(need_model()?, deltas)?,
        "cor1.10ii" => wishart_lambda_stable(&stable_law(model, p)?, p.a, deltas)?,
        "rem1.12ii" => lower_tail_curve(&stable_law(model, p)?, p, deltas)?,
        "rem1.12iii" => wishart_trace_id(need_model()?, p, deltas)?,
        "rem1.12iv" => wishart_trace_stable(&stable_law(model, p)?, p, deltas)?,
        "trivial" => BoundCurve::from_fn("trivial", deltas, |_| Point::valid(1.0)),
        other => return Err(BoundError::UnknownTag(other.into())),
    };
    let mut curve = curve;
    curve.params = p.echo();
    if let Some(m) = model {
        curve.params.insert("model_fingerprint".into(), json!(m.fingerprint()));
    }
    Ok(curve)
}

/// True for bounds that hold from below (`P(·) ≥ bound`).
pub fn is_lower_bound(tag: &str) -> bool {
    tag == "rem1.12ii"
}
