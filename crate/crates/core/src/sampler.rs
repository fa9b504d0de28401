//! Exact sampling of `ID(β, 0, ν)` vectors for every [`LevyModel`].
//!
//! Components are independent, so a draw is the sum of one draw per
//! component family:
//!
//! - atoms: compensated compound Poisson, one Poisson count per atom;
//! - axis stable rays: one two-sided scalar stable draw per axis;
//! - vector stable rays: `Z ξ` with `Z` one-sided stable;
//! - rotation invariant stable: sub-Gaussian representation `√A · G` with
//!   `A` positive `α/2`-stable and `G` Gaussian (exact), or a truncated
//!   LePage series as an alternative.
//!
//! Scalar stable draws use the Chambers–Mallows–Stuck transform in the
//! `S₁(σ, β, μ)` parameterization, shifted so that every scalar law has
//! Lévy density `c₊ r^{-1-α}` / `c₋ |r|^{-1-α}` and characteristic exponent
//! compensated on `{|r| ≤ 1}`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::DiscreteCDF;
use statrs::function::gamma::gamma;

use crate::levy::{AtomSite, Axis, LevyComponent, LevyModel, RayDirection};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arrival epochs used by [`UniformMethod::LePage`] unless told otherwise.
pub const LEPAGE_TERMS: usize = 10_000;

/// SplitMix64 finalizer applied to `master ^ golden · (index + 1)`; used to
/// derive one independent stream per replica.
pub fn mix64(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 keyed by `seed` with word stream `stream`. Output is identical
/// on every platform.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    /// Stream of replica `index` under `master_seed`.
    pub fn replica(master_seed: u64, index: u64) -> Self {
        Self::new(master_seed, mix64(master_seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn open01(&mut self) -> f64 {
        self.inner.sample(Open01)
    }

    pub fn exponential(&mut self) -> f64 {
        -self.open01().ln()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn poisson(&mut self, dist: &Poisson<f64>) -> f64 {
        dist.sample(&mut self.inner)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }
}

/// `S₁(1, β, 0)` draw by the Chambers–Mallows–Stuck transform.
fn cms_standard(alpha: f64, beta: f64, rng: &mut RngState) -> f64 {
    let v = PI * (rng.open01() - 0.5);
    let w = rng.exponential();
    if alpha == 1.0 {
        let a = FRAC_PI_2 + beta * v;
        (a * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / a).ln()) / FRAC_PI_2
    } else {
        let t = beta * (PI * alpha / 2.0).tan();
        let b = t.atan() / alpha;
        let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
        let num = (alpha * (v + b)).sin();
        let den = v.cos().powf(1.0 / alpha);
        let tail = ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
        s * num / den * tail
    }
}

/// `C_α = (1 - α) / (Γ(2 - α) cos(πα/2))`, `α ≠ 1`.
pub fn stable_constant(alpha: f64) -> f64 {
    (1.0 - alpha) / (gamma(2.0 - alpha) * (PI * alpha / 2.0).cos())
}

/// Parameters `(σ, β, μ)` of the `S₁` law with Lévy density
/// `c₊ r^{-1-α}` on `r > 0`, `c₋ |r|^{-1-α}` on `r < 0`, compensated on
/// `{|r| ≤ 1}` with zero drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarStable {
    pub alpha: f64,
    pub scale: f64,
    pub skew: f64,
    pub location: f64,
}

impl ScalarStable {
    pub fn from_density(alpha: f64, c_plus: f64, c_minus: f64) -> Self {
        assert!(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2)");
        assert!(c_plus >= 0.0 && c_minus >= 0.0 && c_plus + c_minus > 0.0, "need c₊ + c₋ > 0");
        let total = c_plus + c_minus;
        let skew = (c_plus - c_minus) / total;
        if alpha == 1.0 {
            Self { alpha, scale: total * FRAC_PI_2, skew, location: (c_plus - c_minus) * (1.0 - EULER_GAMMA) }
        } else {
            let scale = (total / (alpha * stable_constant(alpha))).powf(1.0 / alpha);
            Self { alpha, scale, skew, location: (c_plus - c_minus) / (alpha - 1.0) }
        }
    }

    pub fn sample(&self, rng: &mut RngState) -> f64 {
        let z = cms_standard(self.alpha, self.skew, rng);
        if self.alpha == 1.0 {
            self.scale * z + 2.0 / PI * self.skew * self.scale * self.scale.ln() + self.location
        } else {
            self.scale * z + self.location
        }
    }
}

/// One draw of the scalar stable law with Lévy density `c₊ r^{-1-α}` on
/// `r > 0` and `c₋ |r|^{-1-α}` on `r < 0`.
pub fn sample_scalar_stable(alpha: f64, c_plus: f64, c_minus: f64, rng: &mut RngState) -> f64 {
    ScalarStable::from_density(alpha, c_plus, c_minus).sample(rng)
}

/// How rotation invariant stable components are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum UniformMethod {
    /// Exact: `√A · G`, `A` positive `α/2`-stable, `G ~ N(0, s² I)`.
    #[default]
    SubGaussian,
    /// `Σ_{i≤M} (αΓᵢ/σ)^{-1/α} ξᵢ` over the first `M` Poisson epochs.
    LePage { terms: usize },
}

/// `∫₀^∞ (1 - cos r) r^{-1-α} dr`.
fn cosine_integral(alpha: f64) -> f64 {
    if alpha == 1.0 {
        FRAC_PI_2
    } else {
        -gamma(-alpha) * (PI * alpha / 2.0).cos()
    }
}

/// `E|ξ₁|^α` for `ξ` uniform on `S^{d-1}`.
fn sphere_abs_moment(dim: usize, alpha: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let d = dim as f64;
    (ln_gamma(d / 2.0) + ln_gamma((alpha + 1.0) / 2.0) - 0.5 * PI.ln() - ln_gamma((d + alpha) / 2.0)).exp()
}

#[derive(Debug, Clone)]
struct UniformPlan {
    alpha: f64,
    sigma: f64,
    gauss_scale: f64,
    mixing: ScalarStable,
}

#[derive(Debug, Clone)]
struct AtomPlan {
    target: AtomTarget,
    poisson: Poisson<f64>,
}

#[derive(Debug, Clone)]
enum AtomTarget {
    Axis(usize, f64),
    AllAxes(f64),
    Vector(Vec<f64>),
}

/// Precomputed sampling plan for one model.
#[derive(Debug, Clone)]
pub struct Sampler {
    dim: usize,
    drift: Vec<f64>,
    atoms: Vec<AtomPlan>,
    axis_stable: Vec<(usize, ScalarStable)>,
    vector_rays: Vec<(ScalarStable, Vec<f64>)>,
    uniform: Vec<UniformPlan>,
    method: UniformMethod,
    fingerprint: String,
}

impl Sampler {
    pub fn new(model: &LevyModel) -> Self {
        Self::with_method(model, UniformMethod::SubGaussian)
    }

    pub fn with_method(model: &LevyModel, method: UniformMethod) -> Self {
        let dim = model.dim();
        let mut drift = model.shift().to_vec();
        let mut atoms = Vec::new();
        let mut c_plus = vec![0.0; dim];
        let mut c_minus = vec![0.0; dim];
        let mut alpha = 0.0;
        let mut vector_rays = Vec::new();
        let mut uniform = Vec::new();
        for c in model.components() {
            match c {
                LevyComponent::Atom { site, mass } => {
                    let poisson = Poisson::new(*mass).expect("positive mass");
                    let target = match site {
                        AtomSite::Axis { axis: Axis::Index(i), value } => AtomTarget::Axis(*i, *value),
                        AtomSite::Axis { axis: Axis::All, value } => AtomTarget::AllAxes(*value),
                        AtomSite::Vector(v) => AtomTarget::Vector(v.clone()),
                    };
                    match &target {
                        AtomTarget::Axis(i, v) if v.abs() <= 1.0 => drift[*i] -= mass * v,
                        AtomTarget::AllAxes(v) if v.abs() <= 1.0 => drift.iter_mut().for_each(|d| *d -= mass * v),
                        AtomTarget::Vector(v) if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 => {
                            drift.iter_mut().zip(v).for_each(|(d, x)| *d -= mass * x)
                        }
                        _ => {}
                    }
                    atoms.push(AtomPlan { target, poisson });
                }
                LevyComponent::StableRay { alpha: a, direction, weight } => {
                    alpha = *a;
                    match direction {
                        RayDirection::Axis { axis, positive } => {
                            let side = if *positive { &mut c_plus } else { &mut c_minus };
                            match axis {
                                Axis::Index(i) => side[*i] += weight,
                                Axis::All => side.iter_mut().for_each(|s| *s += weight),
                            }
                        }
                        RayDirection::Vector(v) => {
                            vector_rays.push((ScalarStable::from_density(*a, *weight, 0.0), v.clone()))
                        }
                    }
                }
                LevyComponent::UniformStable { alpha: a, total_mass, dim } => {
                    let moment = sphere_abs_moment(*dim, *a);
                    let gauss_scale = 2f64.sqrt() * (total_mass * cosine_integral(*a) * moment).powf(1.0 / a);
                    let half = a / 2.0;
                    let mixing = ScalarStable {
                        alpha: half,
                        scale: (PI * half / 2.0).cos().powf(1.0 / half),
                        skew: 1.0,
                        location: 0.0,
                    };
                    uniform.push(UniformPlan { alpha: *a, sigma: *total_mass, gauss_scale, mixing });
                }
            }
        }
        let axis_stable = (0..dim)
            .filter(|&k| c_plus[k] + c_minus[k] > 0.0)
            .map(|k| (k, ScalarStable::from_density(alpha, c_plus[k], c_minus[k])))
            .collect();
        Self { dim, drift, atoms, axis_stable, vector_rays, uniform, method, fingerprint: model.fingerprint() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Writes one draw into `out` (length `dim`).
    pub fn sample_into(&self, rng: &mut RngState, out: &mut [f64]) {
        assert_eq!(out.len(), self.dim, "output buffer has the wrong length");
        out.copy_from_slice(&self.drift);
        for atom in &self.atoms {
            match &atom.target {
                AtomTarget::Axis(i, v) => out[*i] += rng.poisson(&atom.poisson) * v,
                AtomTarget::AllAxes(v) => {
                    for o in out.iter_mut() {
                        *o += rng.poisson(&atom.poisson) * v;
                    }
                }
                AtomTarget::Vector(v) => {
                    let n = rng.poisson(&atom.poisson);
                    if n > 0.0 {
                        out.iter_mut().zip(v).for_each(|(o, x)| *o += n * x);
                    }
                }
            }
        }
        for (k, law) in &self.axis_stable {
            out[*k] += law.sample(rng);
        }
        for (law, dir) in &self.vector_rays {
            let z = law.sample(rng);
            out.iter_mut().zip(dir).for_each(|(o, x)| *o += z * x);
        }
        for plan in &self.uniform {
            match self.method {
                UniformMethod::SubGaussian => {
                    let a = plan.mixing.sample(rng).max(0.0);
                    let s = a.sqrt() * plan.gauss_scale;
                    for o in out.iter_mut() {
                        *o += s * rng.normal();
                    }
                }
                UniformMethod::LePage { terms } => {
                    let mut epoch = 0.0;
                    let mut dir = vec![0.0; self.dim];
                    for _ in 0..terms {
                        epoch += rng.exponential();
                        let r = (plan.alpha * epoch / plan.sigma).powf(-1.0 / plan.alpha);
                        let mut n2 = 0.0;
                        for d in dir.iter_mut() {
                            *d = rng.normal();
                            n2 += *d * *d;
                        }
                        let scale = r / n2.sqrt();
                        out.iter_mut().zip(&dir).for_each(|(o, d)| *o += scale * d);
                    }
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut RngState) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, &mut out);
        out
    }

    pub fn batch(&self, count: usize, rng: &mut RngState) -> SampleBatch {
        let mut values = vec![0.0; count * self.dim];
        for row in values.chunks_exact_mut(self.dim.max(1)) {
            self.sample_into(rng, row);
        }
        SampleBatch { dim: self.dim, count, values, fingerprint: self.fingerprint.clone() }
    }
}

/// One draw of `X ~ ID(β, 0, ν)`.
pub fn sample_id_vector(model: &LevyModel, rng: &mut RngState) -> Vec<f64> {
    Sampler::new(model).sample(rng)
}

/// `count` draws stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub dim: usize,
    pub count: usize,
    pub values: Vec<f64>,
    pub fingerprint: String,
}

impl SampleBatch {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }
}

/// Reference tail `P(‖X‖ > x)`: `ν̄(x)` for models with a stable part, the
/// exact Poisson tail for a one-dimensional single-atom model.
fn reference_tail(model: &LevyModel, x: f64) -> Option<f64> {
    if model.alpha().is_some() {
        return Some(model.nu_bar(x));
    }
    let [LevyComponent::Atom { site: AtomSite::Axis { value: v, .. }, mass }] = model.components() else {
        return None;
    };
    if model.dim() != 1 {
        return None;
    }
    let law = statrs::distribution::Poisson::new(*mass).ok()?;
    let cdf = |k: f64| if k < 0.0 { 0.0 } else { law.cdf(k as u64) };
    // X = v N + c
    let c = model.shift()[0] - if v.abs() <= 1.0 { mass * v } else { 0.0 };
    let (above, below) = if *v > 0.0 { ((x - c) / v, (-x - c) / v) } else { ((-x - c) / v, (x - c) / v) };
    let upper = 1.0 - cdf(above.floor());
    let lower = if below > 0.0 { cdf(below.ceil() - 1.0) } else { 0.0 };
    Some(upper + lower)
}

/// Outcome of the tail-equivalence check at an empirical quantile of `‖X‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRatio {
    pub draws: usize,
    pub quantile: f64,
    pub x: f64,
    pub empirical: f64,
    pub reference: f64,
    pub ratio: f64,
}

/// Compares `P̂(‖X‖ > x)` at the `quantile` of `draws` norms with the
/// reference tail. `None` when the model has no reference tail.
pub fn tail_ratio(model: &LevyModel, method: UniformMethod, draws: usize, seed: u64, quantile: f64) -> Option<TailRatio> {
    use rayon::prelude::*;
    const CHUNK: usize = 4096;
    let sampler = Sampler::with_method(model, method);
    let mut norms: Vec<f64> = (0..draws.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = RngState::replica(seed, c as u64);
            let len = CHUNK.min(draws - c * CHUNK);
            let mut buf = vec![0.0; sampler.dim()];
            (0..len)
                .map(|_| {
                    sampler.sample_into(&mut rng, &mut buf);
                    buf.iter().map(|v| v * v).sum::<f64>().sqrt()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    norms.sort_by(f64::total_cmp);
    let x = norms[((quantile * draws as f64) as usize).min(draws - 1)];
    let empirical = norms.iter().filter(|&&r| r > x).count() as f64 / draws as f64;
    let reference = reference_tail(model, x)?;
    Some(TailRatio { draws, quantile, x, empirical, reference, ratio: empirical / reference })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(alpha: f64, cp: f64, cm: f64, n: usize, seed: u64) -> Vec<f64> {
        let law = ScalarStable::from_density(alpha, cp, cm);
        let mut rng = RngState::new(seed, 0);
        (0..n).map(|_| law.sample(&mut rng)).collect()
    }

    #[test]
    fn mix64_spreads_indices() {
        assert_ne!(mix64(1, 0), mix64(1, 1));
        assert_ne!(mix64(1, 0), mix64(2, 0));
        assert_eq!(mix64(7, 3), mix64(7, 3));
    }

    #[test]
    fn same_seed_same_stream_is_reproducible() {
        let a = draws(1.3, 1.0, 0.5, 100, 9);
        let b = draws(1.3, 1.0, 0.5, 100, 9);
        assert_eq!(a, b);
        let mut r1 = RngState::new(9, 1);
        let mut r2 = RngState::new(9, 2);
        assert_ne!(r1.next_u64(), r2.next_u64());
    }

    #[test]
    fn standard_cauchy_parameters() {
        let law = ScalarStable::from_density(1.0, 1.0 / PI, 1.0 / PI);
        assert!((law.scale - 1.0).abs() < 1e-15);
        assert_eq!(law.skew, 0.0);
        assert_eq!(law.location, 0.0);
    }

    #[test]
    fn cauchy_quantiles() {
        let mut x = draws(1.0, 1.0 / PI, 1.0 / PI, 200_000, 1);
        let above = x.iter().filter(|&&v| v > 1.0).count() as f64 / x.len() as f64;
        assert!((above - 0.25).abs() < 0.005, "{above}");
        x.sort_by(f64::total_cmp);
        assert!(x[x.len() / 2].abs() < 0.01);
    }

    #[test]
    fn stable_constant_matches_gamma_identity() {
        // 1/(α C_α) = Γ(1-α) cos(πα/2)/α
        for &a in &[0.3, 0.7, 1.2, 1.8] {
            let lhs = 1.0 / (a * stable_constant(a));
            let rhs = gamma(1.0 - a) * (PI * a / 2.0).cos() / a;
            assert!((lhs / rhs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_integral_matches_quadrature() {
        for &a in &[0.5, 1.0, 1.5] {
            let f = |r: f64| (1.0 - r.cos()) * r.powf(-1.0 - a);
            let head = crate::quad::tanh_sinh(|r, _| f(r), 0.0, 1.0, 1e-13);
            // tail: ∫₁^∞ r^{-1-α} - ∫₁^∞ cos r r^{-1-α}, the second by panels
            let mut osc = 0.0;
            let mut lo = 1.0;
            while lo < 4000.0 {
                osc += crate::quad::integrate(|r| r.cos() * r.powf(-1.0 - a), lo, lo + PI);
                lo += PI;
            }
            let tail = 1.0 / a - osc;
            assert!(((head + tail) / cosine_integral(a) - 1.0).abs() < 2e-3, "alpha={a}");
        }
    }

    #[test]
    fn tail_index_matches_density() {
        // α x^α P(X > x) → c₊ at high quantiles
        for &(a, cp, cm) in &[(0.6, 1.0, 0.5), (1.0, 0.7, 0.2), (1.5, 2.0, 1.0)] {
            let mut x = draws(a, cp, cm, 400_000, 3);
            x.sort_by(f64::total_cmp);
            let q = x[(0.999 * x.len() as f64) as usize];
            let p = x.iter().filter(|&&v| v > q).count() as f64 / x.len() as f64;
            let ratio = a * q.powf(a) * p / cp;
            assert!((0.8..1.25).contains(&ratio), "alpha={a}: {ratio}");
        }
    }

    #[test]
    fn centered_poisson_has_zero_mean() {
        let model = LevyModel::iid_atoms(1, &[(1.0, 3.0)]).unwrap();
        let s = Sampler::new(&model);
        let mut rng = RngState::new(5, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| s.sample(&mut rng)[0]).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * 3f64.sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn batch_is_deterministic() {
        let model = LevyModel::uniform_stable(4, 1.5, 4.0).unwrap();
        let s = Sampler::new(&model);
        let a = s.batch(50, &mut RngState::new(1, 2));
        let b = s.batch(50, &mut RngState::new(1, 2));
        assert_eq!(a, b);
        assert!(a.values.iter().all(|v| v.is_finite()));
        assert_eq!(a.fingerprint, model.fingerprint());
    }
}
