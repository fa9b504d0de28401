//! Lévy measures without Gaussian part and the scalar functionals of
//! `ID(β, 0, ν)` laws that feed the concentration bounds.
//!
//! Three component kinds are supported: point masses (compound Poisson
//! jumps), stable rays `w δ_ξ ⊗ r^{-1-α} dr`, and the rotation invariant
//! stable measure `σ(S^{d-1}) · uniform ⊗ r^{-1-α} dr`. Every radial
//! functional only depends on the norms of the atoms and on the total
//! spherical mass of the stable part, so they are evaluated from a
//! [`RadialProfile`] in closed form.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rate::{self, AtomRate, RateError, RateFunction};
use crate::roots::{self, RootError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("invalid Lévy model: {0}")]
    InvalidModel(String),
    #[error("first-moment tail diverges for a stable component with alpha = {alpha} <= 1")]
    Divergent { alpha: f64 },
    #[error("stable components have no exponential moments")]
    NoExponentialMoment,
    #[error("t = {t} is beyond the exponential-moment horizon T = {horizon}")]
    BeyondT { t: f64, horizon: f64 },
    #[error("argument {x} outside (0, {limit})")]
    OutOfRange { x: f64, limit: f64 },
    #[error(transparent)]
    Root(#[from] RootError),
}

impl From<RateError> for LevyError {
    fn from(e: RateError) -> Self {
        match e {
            RateError::OutOfRange { x, limit } => LevyError::OutOfRange { x, limit },
            RateError::Root(r) => LevyError::Root(r),
        }
    }
}

/// Which coordinate axis an axis-supported component lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Index(usize),
    /// The same one-dimensional component repeated on every axis.
    All,
}

/// Support point of an atom.
#[derive(Debug, Clone, PartialEq)]
pub enum AtomSite {
    Axis { axis: Axis, value: f64 },
    Vector(Vec<f64>),
}

/// Direction of a stable ray.
#[derive(Debug, Clone, PartialEq)]
pub enum RayDirection {
    /// `sign · e_axis`, with `positive = true` for `+e_axis`.
    Axis { axis: Axis, positive: bool },
    /// A unit vector.
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevyComponent {
    Atom { site: AtomSite, mass: f64 },
    StableRay { alpha: f64, direction: RayDirection, weight: f64 },
    UniformStable { alpha: f64, total_mass: f64, dim: usize },
}

/// Norm-level summary of a Lévy measure: atoms `(‖u‖, mass)` sorted by
/// radius with equal radii merged, plus the stable part `σ r^{-1-α} dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub atoms: Vec<(f64, f64)>,
    pub stable: Option<(f64, f64)>,
}

impl RadialProfile {
    fn stable_sigma(&self) -> f64 {
        self.stable.map_or(0.0, |(_, s)| s)
    }
}

/// Value of a functional together with its derivative where defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarFunctional {
    pub value: f64,
    pub derivative: Option<f64>,
    pub valid: bool,
}

impl ScalarFunctional {
    fn ok(value: f64, derivative: Option<f64>) -> Self {
        Self { value, derivative, valid: true }
    }

    fn invalid() -> Self {
        Self { value: f64::NAN, derivative: None, valid: false }
    }
}

/// Selector for [`LevyModel::evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    V2,
    NuBar,
    MTail,
    Rate,
    RatePrimitive,
}

/// Marcus–Rosiński bracket on `E‖X‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanNormBracket {
    pub x0: f64,
    pub lower: f64,
    pub upper: f64,
}

/// A Lévy measure on `R^dim` with shift `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDocument", into = "ModelDocument")]
pub struct LevyModel {
    dim: usize,
    components: Vec<LevyComponent>,
    shift: Vec<f64>,
    profile: RadialProfile,
}

fn check_alpha(alpha: f64) -> Result<(), LevyError> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(LevyError::InvalidModel(format!("alpha = {alpha} not in (0, 2)")))
    }
}

fn check_positive(what: &str, v: f64) -> Result<(), LevyError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LevyError::InvalidModel(format!("{what} = {v} must be positive and finite")))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl LevyModel {
    pub fn new(dim: usize, components: Vec<LevyComponent>, shift: Option<Vec<f64>>) -> Result<Self, LevyError> {
        if dim == 0 {
            return Err(LevyError::InvalidModel("dimension must be positive".into()));
        }
        if components.is_empty() {
            return Err(LevyError::InvalidModel("Lévy measure must not vanish".into()));
        }
        let shift = shift.unwrap_or_else(|| vec![0.0; dim]);
        if shift.len() != dim || shift.iter().any(|b| !b.is_finite()) {
            return Err(LevyError::InvalidModel(format!("shift must be {dim} finite numbers")));
        }

        let check_axis = |axis: Axis| match axis {
            Axis::Index(i) if i >= dim => {
                Err(LevyError::InvalidModel(format!("axis {i} out of range for dimension {dim}")))
            }
            _ => Ok(()),
        };
        let mut stable_alpha: Option<f64> = None;
        let mut atom_keys = HashSet::new();
        let mut ray_keys = HashSet::new();
        for c in &components {
            match c {
                LevyComponent::Atom { site, mass } => {
                    check_positive("atom mass", *mass)?;
                    match site {
                        AtomSite::Axis { axis, value } => {
                            check_axis(*axis)?;
                            if *value == 0.0 || !value.is_finite() {
                                return Err(LevyError::InvalidModel("atom at the origin".into()));
                            }
                            if !atom_keys.insert((*axis, value.to_bits())) {
                                return Err(LevyError::InvalidModel(format!(
                                    "duplicate atom at {value} on {axis:?}"
                                )));
                            }
                        }
                        AtomSite::Vector(v) => {
                            if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
                                return Err(LevyError::InvalidModel(format!(
                                    "atom position must have {dim} finite coordinates"
                                )));
                            }
                            if norm(v) == 0.0 {
                                return Err(LevyError::InvalidModel("atom at the origin".into()));
                            }
                        }
                    }
                }
                LevyComponent::StableRay { alpha, direction, weight } => {
                    check_alpha(*alpha)?;
                    check_positive("ray weight", *weight)?;
                    match direction {
                        RayDirection::Axis { axis, positive } => {
                            check_axis(*axis)?;
                            if !ray_keys.insert((*axis, *positive)) {
                                return Err(LevyError::InvalidModel(format!("duplicate stable ray on {axis:?}")));
                            }
                        }
                        RayDirection::Vector(v) => {
                            if v.len() != dim || (norm(v) - 1.0).abs() > 1e-9 {
                                return Err(LevyError::InvalidModel(format!(
                                    "ray direction must be a unit vector of length {dim}"
                                )));
                            }
                        }
                    }
                    stable_alpha = Self::merge_alpha(stable_alpha, *alpha)?;
                }
                LevyComponent::UniformStable { alpha, total_mass, dim: d } => {
                    check_alpha(*alpha)?;
                    check_positive("spherical mass", *total_mass)?;
                    if *d != dim {
                        return Err(LevyError::InvalidModel(format!(
                            "uniform stable component has dimension {d}, model has {dim}"
                        )));
                    }
                    stable_alpha = Self::merge_alpha(stable_alpha, *alpha)?;
                }
            }
        }
        // overlap between a per-axis atom and an all-axes atom at the same value
        for (axis, bits) in &atom_keys {
            if *axis != Axis::All && atom_keys.contains(&(Axis::All, *bits)) {
                return Err(LevyError::InvalidModel("atom repeated by an all-axes component".into()));
            }
        }
        for (axis, sign) in &ray_keys {
            if *axis != Axis::All && ray_keys.contains(&(Axis::All, *sign)) {
                return Err(LevyError::InvalidModel("stable ray repeated by an all-axes component".into()));
            }
        }

        let profile = Self::build_profile(dim, &components);
        Ok(Self { dim, components, shift, profile })
    }

    fn merge_alpha(current: Option<f64>, alpha: f64) -> Result<Option<f64>, LevyError> {
        match current {
            Some(a) if a != alpha => Err(LevyError::InvalidModel(format!(
                "stable components with different alpha ({a} and {alpha})"
            ))),
            _ => Ok(Some(alpha)),
        }
    }

    fn build_profile(dim: usize, components: &[LevyComponent]) -> RadialProfile {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut stable: Option<(f64, f64)> = None;
        for c in components {
            match c {
                LevyComponent::Atom { site, mass } => {
                    let (r, copies) = match site {
                        AtomSite::Axis { axis: Axis::All, value } => (value.abs(), dim as f64),
                        AtomSite::Axis { value, .. } => (value.abs(), 1.0),
                        AtomSite::Vector(v) => (norm(v), 1.0),
                    };
                    atoms.push((r, mass * copies));
                }
                LevyComponent::StableRay { alpha, direction, weight } => {
                    let copies = match direction {
                        RayDirection::Axis { axis: Axis::All, .. } => dim as f64,
                        _ => 1.0,
                    };
                    let s = stable.map_or(0.0, |(_, s)| s);
                    stable = Some((*alpha, s + weight * copies));
                }
                LevyComponent::UniformStable { alpha, total_mass, .. } => {
                    let s = stable.map_or(0.0, |(_, s)| s);
                    stable = Some((*alpha, s + total_mass));
                }
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (r, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == r => last.1 += m,
                _ => merged.push((r, m)),
            }
        }
        RadialProfile { atoms: merged, stable }
    }

    /// Unit atoms of the given values and masses on every axis.
    pub fn iid_atoms(dim: usize, atoms: &[(f64, f64)]) -> Result<Self, LevyError> {
        let components = atoms
            .iter()
            .map(|&(value, mass)| LevyComponent::Atom { site: AtomSite::Axis { axis: Axis::All, value }, mass })
            .collect();
        Self::new(dim, components, None)
    }

    /// Independent identically distributed stable coordinates with Lévy
    /// density `c₊ r^{-1-α}` on `r > 0` and `c₋ |r|^{-1-α}` on `r < 0`.
    pub fn iid_stable(dim: usize, alpha: f64, c_plus: f64, c_minus: f64) -> Result<Self, LevyError> {
        let mut components = Vec::new();
        for (positive, weight) in [(true, c_plus), (false, c_minus)] {
            if weight > 0.0 {
                components.push(LevyComponent::StableRay {
                    alpha,
                    direction: RayDirection::Axis { axis: Axis::All, positive },
                    weight,
                });
            }
        }
        Self::new(dim, components, None)
    }

    /// Rotation invariant stable vector with spherical mass `total_mass`.
    pub fn uniform_stable(dim: usize, alpha: f64, total_mass: f64) -> Result<Self, LevyError> {
        Self::new(dim, vec![LevyComponent::UniformStable { alpha, total_mass, dim }], None)
    }

    pub fn with_shift(self, shift: Vec<f64>) -> Result<Self, LevyError> {
        Self::new(self.dim, self.components, Some(shift))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[LevyComponent] {
        &self.components
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// Common α of the stable components, if any.
    pub fn alpha(&self) -> Option<f64> {
        self.profile.stable.map(|(a, _)| a)
    }

    /// `σ(S^{d-1})`, the total spherical mass of the stable part.
    pub fn sigma_total(&self) -> f64 {
        self.profile.stable_sigma()
    }

    pub fn has_atoms(&self) -> bool {
        !self.profile.atoms.is_empty()
    }

    /// True when every component is supported on the coordinate axes.
    pub fn is_axis_supported(&self) -> bool {
        self.components.iter().all(|c| {
            matches!(
                c,
                LevyComponent::Atom { site: AtomSite::Axis { .. }, .. }
                    | LevyComponent::StableRay { direction: RayDirection::Axis { .. }, .. }
            )
        })
    }

    /// Exponential-moment supremum `T`: `+∞` for atom-only models, `0` once
    /// a stable component is present.
    pub fn horizon(&self) -> f64 {
        if self.profile.stable.is_some() {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// `R = inf{r : ν(‖u‖ > r) = 0}`, `None` for unbounded support.
    pub fn support_radius(&self) -> Option<f64> {
        if self.profile.stable.is_some() {
            None
        } else {
            self.profile.atoms.last().map(|a| a.0)
        }
    }

    /// Short digest of the canonical document form.
    pub fn fingerprint(&self) -> String {
        let doc = serde_json::to_string(self).expect("model serializes");
        let digest = Sha256::digest(doc.as_bytes());
        hex::encode(&digest[..8])
    }

    /// `V²(x) = ∫_{‖u‖≤x} ‖u‖² ν(du)`.
    pub fn v2(&self, x: f64) -> f64 {
        let atoms: f64 = self.profile.atoms.iter().take_while(|a| a.0 <= x).map(|(r, m)| m * r * r).sum();
        let stable = match self.profile.stable {
            Some((alpha, s)) => s * x.powf(2.0 - alpha) / (2.0 - alpha),
            None => 0.0,
        };
        atoms + stable
    }

    /// `ν̄(x) = ν(‖u‖ > x)`.
    pub fn nu_bar(&self, x: f64) -> f64 {
        let atoms: f64 = self.profile.atoms.iter().filter(|a| a.0 > x).map(|a| a.1).sum();
        let stable = match self.profile.stable {
            Some((alpha, s)) => s * x.powf(-alpha) / alpha,
            None => 0.0,
        };
        atoms + stable
    }

    /// `M(x) = ∫_{‖u‖≥x} ‖u‖ ν(du)`.
    pub fn m_tail(&self, x: f64) -> Result<f64, LevyError> {
        let atoms: f64 = self.profile.atoms.iter().filter(|a| a.0 >= x).map(|(r, m)| m * r).sum();
        let stable = match self.profile.stable {
            Some((alpha, _)) if alpha <= 1.0 => return Err(LevyError::Divergent { alpha }),
            Some((alpha, s)) => s * x.powf(1.0 - alpha) / (alpha - 1.0),
            None => 0.0,
        };
        Ok(atoms + stable)
    }

    /// The exponential rate `h` of an atom-only model.
    pub fn rate(&self) -> Result<AtomRate, LevyError> {
        if self.profile.stable.is_some() {
            return Err(LevyError::NoExponentialMoment);
        }
        Ok(AtomRate::new(self.profile.atoms.clone()))
    }

    /// `(h(t), H(t))`.
    pub fn h_and_big_h(&self, t: f64) -> Result<(f64, f64), LevyError> {
        let rate = self.rate()?;
        let horizon = self.horizon();
        if !(t >= 0.0) || t >= horizon || !t.is_finite() {
            return Err(LevyError::BeyondT { t, horizon });
        }
        Ok((rate.rate(t), rate.primitive(t)))
    }

    /// `h⁻¹(x)`.
    pub fn h_inverse(&self, x: f64) -> Result<f64, LevyError> {
        Ok(rate::inverse(&self.rate()?, x)?)
    }

    /// `∫₀ˣ h⁻¹(s) ds` through the Legendre identity.
    pub fn hinv_integral(&self, x: f64) -> Result<f64, LevyError> {
        Ok(rate::inverse_integral(&self.rate()?, x)?)
    }

    pub fn evaluate(&self, functional: Functional, x: f64) -> ScalarFunctional {
        let stable_density = |power: f64| self.profile.stable.map_or(0.0, |(a, s)| s * x.powf(power - a));
        let on_atom = self.profile.atoms.iter().any(|a| a.0 == x);
        match functional {
            Functional::V2 => ScalarFunctional::ok(self.v2(x), (!on_atom).then(|| stable_density(1.0))),
            Functional::NuBar => ScalarFunctional::ok(self.nu_bar(x), (!on_atom).then(|| -stable_density(-1.0))),
            Functional::MTail => match self.m_tail(x) {
                Ok(v) => ScalarFunctional::ok(v, (!on_atom).then(|| -stable_density(0.0))),
                Err(_) => ScalarFunctional::invalid(),
            },
            Functional::Rate | Functional::RatePrimitive => match (self.rate(), self.h_and_big_h(x)) {
                (Ok(rate), Ok((h, big_h))) => {
                    if functional == Functional::Rate {
                        let dh = rate.atoms().iter().map(|&(r, m)| m * r * r * (x * r).exp()).sum();
                        ScalarFunctional::ok(h, Some(dh))
                    } else {
                        ScalarFunctional::ok(big_h, Some(h))
                    }
                }
                _ => ScalarFunctional::invalid(),
            },
        }
    }

    /// `p_γ = inf{x > 0 : 0 < V²(x)/x² ≤ γ}`.
    pub fn p_gamma(&self, gamma: f64) -> f64 {
        assert!(gamma > 0.0, "gamma must be positive");
        let atoms = &self.profile.atoms;
        if atoms.is_empty() {
            let (alpha, s) = self.profile.stable.expect("validated model is nonzero");
            return (s / ((2.0 - alpha) * gamma)).powf(1.0 / alpha);
        }
        let sigma = self.profile.stable_sigma();
        let stable_part = |x: f64| match self.profile.stable {
            Some((alpha, s)) => s * x.powf(2.0 - alpha) / (2.0 - alpha),
            None => 0.0,
        };
        // Pieces [r_j, r_{j+1}) on which V² has constant atom part `acc`.
        let mut acc = 0.0;
        let mut left = 0.0;
        for j in 0..=atoms.len() {
            let right = atoms.get(j).map_or(f64::INFINITY, |a| a.0);
            if acc > 0.0 || sigma > 0.0 {
                let ratio = |x: f64| (acc + stable_part(x)) / (x * x);
                if left > 0.0 && ratio(left) <= gamma {
                    return left;
                }
                let below_at_right = right.is_infinite() || ratio(right) < gamma;
                if below_at_right {
                    let start = if left > 0.0 { left } else { right.min(1.0) };
                    let root = if right.is_infinite() {
                        roots::solve_decreasing(ratio, gamma, start.max(f64::MIN_POSITIVE), Tolerance::RELATIVE)
                    } else {
                        let lo = if left > 0.0 { left } else { right * 1e-300_f64.max(f64::EPSILON) };
                        let mut lo = lo;
                        while ratio(lo) <= gamma && lo > f64::MIN_POSITIVE {
                            lo *= 0.5;
                        }
                        roots::bisect(|x| ratio(x) - gamma, lo, right, Tolerance::RELATIVE)
                    };
                    return root.expect("ratio is strictly decreasing on each piece");
                }
            }
            if let Some(a) = atoms.get(j) {
                acc += a.1 * a.0 * a.0;
                left = a.0;
            }
        }
        unreachable!("the ratio tends to zero at infinity")
    }

    /// Shift-corrected first moment at truncation radius `p`:
    /// `‖β - ∫_{p<‖y‖≤1} y ν + ∫_{1<‖y‖≤p} y ν‖`.
    pub fn e_at_radius(&self, p: f64) -> f64 {
        let mut coords = self.shift.clone();
        let (lo, hi, sign) = if p < 1.0 { (p, 1.0, -1.0) } else { (1.0, p, 1.0) };
        if lo == hi {
            return norm(&coords);
        }
        let in_shell = |r: f64| r > lo && r <= hi;
        let dim = self.dim;
        let add_axis = |axis: Axis, amount: f64, coords: &mut Vec<f64>| match axis {
            Axis::Index(i) => coords[i] += amount,
            Axis::All => coords.iter_mut().for_each(|c| *c += amount),
        };
        for c in &self.components {
            match c {
                LevyComponent::Atom { site, mass } => match site {
                    AtomSite::Axis { axis, value } => {
                        if in_shell(value.abs()) {
                            add_axis(*axis, sign * mass * value, &mut coords);
                        }
                    }
                    AtomSite::Vector(v) => {
                        if in_shell(norm(v)) {
                            for k in 0..dim {
                                coords[k] += sign * mass * v[k];
                            }
                        }
                    }
                },
                LevyComponent::StableRay { alpha, direction, weight } => {
                    let shell = if (*alpha - 1.0).abs() < 1e-12 {
                        (hi / lo).ln()
                    } else {
                        (hi.powf(1.0 - alpha) - lo.powf(1.0 - alpha)) / (1.0 - alpha)
                    };
                    let amount = sign * weight * shell;
                    match direction {
                        RayDirection::Axis { axis, positive } => {
                            add_axis(*axis, if *positive { amount } else { -amount }, &mut coords)
                        }
                        RayDirection::Vector(v) => {
                            for k in 0..dim {
                                coords[k] += amount * v[k];
                            }
                        }
                    }
                }
                // symmetric: no net first moment in any shell
                LevyComponent::UniformStable { .. } => {}
            }
        }
        norm(&coords)
    }

    /// `E_γ`, the location correction at `p_γ`.
    pub fn e_gamma(&self, gamma: f64) -> f64 {
        self.e_at_radius(self.p_gamma(gamma))
    }

    /// Solves `V²(x)/x² + M(x)/x = 1` for the Marcus–Rosiński scale `x₀`.
    pub fn x0_mean_norm(&self) -> Result<MeanNormBracket, LevyError> {
        self.m_tail(1.0)?;
        let lhs = |x: f64| self.v2(x) / (x * x) + self.m_tail(x).unwrap_or(f64::INFINITY) / x;
        let x0 = roots::solve_decreasing(lhs, 1.0, 1.0, Tolerance::RELATIVE)?;
        Ok(MeanNormBracket { x0, lower: x0 / 4.0, upper: 17.0 * x0 / 8.0 })
    }
}

impl fmt::Display for LevyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevyModel(dim={}, components={}, fingerprint={})", self.dim, self.components.len(), self.fingerprint())
    }
}

// ---------------------------------------------------------------------------
// Document form

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum AxisDoc {
    Index(usize),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PointDoc {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ComponentDoc {
    Atom {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<AxisDoc>,
        position: PointDoc,
        mass: f64,
    },
    StableRay {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<AxisDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sign: Option<i8>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
        weight: f64,
    },
    UniformStable {
        alpha: f64,
        total_mass: f64,
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    dim: usize,
    components: Vec<ComponentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shift: Option<Vec<f64>>,
}

fn axis_from_doc(doc: AxisDoc) -> Result<Axis, LevyError> {
    match doc {
        AxisDoc::Index(i) => Ok(Axis::Index(i)),
        AxisDoc::Keyword(k) if k == "all" => Ok(Axis::All),
        AxisDoc::Keyword(k) => Err(LevyError::InvalidModel(format!("unknown axis selector {k:?}"))),
    }
}

fn axis_to_doc(axis: Axis) -> AxisDoc {
    match axis {
        Axis::Index(i) => AxisDoc::Index(i),
        Axis::All => AxisDoc::Keyword("all".into()),
    }
}

impl TryFrom<ModelDocument> for LevyModel {
    type Error = LevyError;

    fn try_from(doc: ModelDocument) -> Result<Self, Self::Error> {
        let mut components = Vec::with_capacity(doc.components.len());
        for c in doc.components {
            components.push(match c {
                ComponentDoc::Atom { axis, position, mass } => {
                    let site = match (axis, position) {
                        (Some(a), PointDoc::Scalar(value)) => AtomSite::Axis { axis: axis_from_doc(a)?, value },
                        (None, PointDoc::Vector(v)) => AtomSite::Vector(v),
                        _ => {
                            return Err(LevyError::InvalidModel(
                                "atom needs either axis + scalar position or a vector position".into(),
                            ))
                        }
                    };
                    LevyComponent::Atom { site, mass }
                }
                ComponentDoc::StableRay { alpha, axis, sign, direction, weight } => {
                    let direction = match (axis, direction) {
                        (Some(a), None) => {
                            let positive = match sign.unwrap_or(1) {
                                1 => true,
                                -1 => false,
                                s => return Err(LevyError::InvalidModel(format!("ray sign must be ±1, got {s}"))),
                            };
                            RayDirection::Axis { axis: axis_from_doc(a)?, positive }
                        }
                        (None, Some(v)) if sign.is_none() => RayDirection::Vector(v),
                        _ => {
                            return Err(LevyError::InvalidModel(
                                "stable ray needs either axis (+ sign) or a direction vector".into(),
                            ))
                        }
                    };
                    LevyComponent::StableRay { alpha, direction, weight }
                }
                ComponentDoc::UniformStable { alpha, total_mass, dim } => {
                    LevyComponent::UniformStable { alpha, total_mass, dim }
                }
            });
        }
        LevyModel::new(doc.dim, components, doc.shift)
    }
}

impl From<LevyModel> for ModelDocument {
    fn from(m: LevyModel) -> Self {
        let components = m
            .components
            .into_iter()
            .map(|c| match c {
                LevyComponent::Atom { site: AtomSite::Axis { axis, value }, mass } => {
                    ComponentDoc::Atom { axis: Some(axis_to_doc(axis)), position: PointDoc::Scalar(value), mass }
                }
                LevyComponent::Atom { site: AtomSite::Vector(v), mass } => {
                    ComponentDoc::Atom { axis: None, position: PointDoc::Vector(v), mass }
                }
                LevyComponent::StableRay { alpha, direction: RayDirection::Axis { axis, positive }, weight } => {
                    ComponentDoc::StableRay {
                        alpha,
                        axis: Some(axis_to_doc(axis)),
                        sign: Some(if positive { 1 } else { -1 }),
                        direction: None,
                        weight,
                    }
                }
                LevyComponent::StableRay { alpha, direction: RayDirection::Vector(v), weight } => {
                    ComponentDoc::StableRay { alpha, axis: None, sign: None, direction: Some(v), weight }
                }
                LevyComponent::UniformStable { alpha, total_mass, dim } => {
                    ComponentDoc::UniformStable { alpha, total_mass, dim }
                }
            })
            .collect();
        let shift = m.shift.iter().any(|&b| b != 0.0).then_some(m.shift);
        ModelDocument { dim: m.dim, components, shift }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn unit_atom() -> LevyModel {
        LevyModel::new(1, vec![LevyComponent::Atom { site: AtomSite::Axis { axis: Axis::Index(0), value: 1.0 }, mass: 1.0 }], None)
            .unwrap()
    }

    #[test]
    fn v2_examples() {
        let m = unit_atom();
        assert_eq!(m.v2(0.5), 0.0);
        assert_eq!(m.v2(2.0), 1.0);
        let s = LevyModel::uniform_stable(3, 1.0, 1.0).unwrap();
        assert!((s.v2(2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nu_bar_examples() {
        let m = unit_atom();
        assert_eq!(m.nu_bar(2.0), 0.0);
        assert_eq!(m.nu_bar(0.5), 1.0);
        let s = LevyModel::uniform_stable(3, 1.0, 2.0).unwrap();
        assert!((s.nu_bar(4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn m_tail_examples() {
        assert_eq!(unit_atom().m_tail(0.5).unwrap(), 1.0);
        let s = LevyModel::uniform_stable(2, 1.5, 1.0).unwrap();
        assert!((s.m_tail(1.0).unwrap() - 2.0).abs() < 1e-15);
        let s = LevyModel::uniform_stable(2, 0.8, 1.0).unwrap();
        assert!(matches!(s.m_tail(3.0), Err(LevyError::Divergent { .. })));
    }

    #[test]
    fn h_examples() {
        let m = unit_atom();
        let (h, big_h) = m.h_and_big_h(1.0).unwrap();
        assert!((h - (E - 1.0)).abs() < 1e-14);
        assert!((big_h - (E - 2.0)).abs() < 1e-14);
        let (h, _) = m.h_and_big_h(1e-9).unwrap();
        assert!(h < 2e-9);
        let s = LevyModel::uniform_stable(2, 1.5, 1.0).unwrap();
        assert_eq!(s.h_and_big_h(1.0), Err(LevyError::NoExponentialMoment));
        assert!(matches!(m.h_and_big_h(f64::INFINITY), Err(LevyError::BeyondT { .. })));
    }

    #[test]
    fn h_inverse_examples() {
        let m = unit_atom();
        assert!((m.h_inverse(E - 1.0).unwrap() - 1.0).abs() < 1e-13);
        assert!(m.h_inverse(1e-14).unwrap() < 1e-13);
        assert!(matches!(m.h_inverse(f64::INFINITY), Err(LevyError::OutOfRange { .. })));
        assert!((m.hinv_integral(E - 1.0).unwrap() - 1.0).abs() < 1e-13);
        assert!(m.hinv_integral(1e-12).unwrap() < 1e-20);
    }

    #[test]
    fn p_gamma_examples() {
        let m = unit_atom();
        assert!((m.p_gamma(1.0) - 1.0).abs() < 1e-15);
        assert!((m.p_gamma(4.0) - 1.0).abs() < 1e-15);
        // ratio 1/x² crosses 1/4 at x = 2
        assert!((m.p_gamma(0.25) - 2.0).abs() < 1e-12);
        for &alpha in &[0.5, 1.0, 1.5] {
            let sigma = 3.0;
            let s = LevyModel::uniform_stable(4, alpha, sigma).unwrap();
            let gamma = alpha / (4.0 * (2.0 - alpha));
            let p = s.p_gamma(gamma);
            assert!((p - (4.0 * sigma / alpha).powf(1.0 / alpha)).abs() < 1e-12 * p);
            assert!((s.nu_bar(p) - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn p_gamma_mixed_model_matches_definition() {
        // atoms plus stable: check infimum property on a fine scan
        let m = LevyModel::new(
            2,
            vec![
                LevyComponent::Atom { site: AtomSite::Axis { axis: Axis::Index(0), value: 0.5 }, mass: 2.0 },
                LevyComponent::Atom { site: AtomSite::Axis { axis: Axis::Index(1), value: -3.0 }, mass: 0.1 },
                LevyComponent::StableRay {
                    alpha: 1.2,
                    direction: RayDirection::Axis { axis: Axis::Index(1), positive: true },
                    weight: 0.2,
                },
            ],
            None,
        )
        .unwrap();
        for &gamma in &[0.05, 0.3, 1.0, 5.0] {
            let p = m.p_gamma(gamma);
            let ratio = |x: f64| m.v2(x) / (x * x);
            assert!(ratio(p) <= gamma * (1.0 + 1e-9), "gamma={gamma}");
            for k in 1..2000 {
                let x = p * k as f64 / 2000.0;
                assert!(!(ratio(x) <= gamma * (1.0 - 1e-9) && m.v2(x) > 0.0), "x={x} below p={p}");
            }
        }
    }

    #[test]
    fn e_gamma_examples() {
        let sym = LevyModel::iid_atoms(3, &[(1.5, 0.5), (-1.5, 0.5)]).unwrap();
        assert!(sym.e_gamma(0.7).abs() < 1e-15);
        let shifted = sym.clone().with_shift(vec![1.0, 0.0, 0.0]).unwrap();
        assert!((shifted.e_gamma(0.7) - 1.0).abs() < 1e-15);
        let ray = LevyModel::new(
            2,
            vec![LevyComponent::StableRay {
                alpha: 1.5,
                direction: RayDirection::Axis { axis: Axis::Index(0), positive: true },
                weight: 1.0,
            }],
            None,
        )
        .unwrap();
        let expected = (1.0 - 2f64.powf(-0.5)) / 0.5;
        assert!((ray.e_at_radius(2.0) - expected).abs() < 1e-14);
        // γ for which p_γ = 2: σ/((2-α)2^α)
        let gamma = 1.0 / (0.5 * 2f64.powf(1.5));
        assert!((ray.p_gamma(gamma) - 2.0).abs() < 1e-12);
        assert!((ray.e_gamma(gamma) - expected).abs() < 1e-11);
    }

    #[test]
    fn x0_examples() {
        let m = LevyModel::iid_atoms(1, &[(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        assert!((m.x0_mean_norm().unwrap().x0 - 1.0).abs() < 1e-12);
        let s = LevyModel::uniform_stable(3, 1.5, 1.0).unwrap();
        let b = s.x0_mean_norm().unwrap();
        assert!((b.x0 - 4f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((b.lower - b.x0 / 4.0).abs() < 1e-15 && (b.upper - 17.0 * b.x0 / 8.0).abs() < 1e-15);
        let s2 = LevyModel::uniform_stable(3, 1.5, 2.0).unwrap();
        assert!((s2.x0_mean_norm().unwrap().x0 / b.x0 - 2f64.powf(1.0 / 1.5)).abs() < 1e-12);
        let s3 = LevyModel::uniform_stable(3, 0.9, 2.0).unwrap();
        assert!(matches!(s3.x0_mean_norm(), Err(LevyError::Divergent { .. })));
    }

    #[test]
    fn validation_rejects_bad_models() {
        assert!(LevyModel::new(2, vec![], None).is_err());
        assert!(LevyModel::uniform_stable(2, 2.0, 1.0).is_err());
        assert!(LevyModel::uniform_stable(2, 1.0, 0.0).is_err());
        assert!(LevyModel::iid_atoms(2, &[(0.0, 1.0)]).is_err());
        assert!(LevyModel::iid_atoms(2, &[(1.0, 1.0), (1.0, 2.0)]).is_err());
        let mixed = vec![
            LevyComponent::UniformStable { alpha: 1.0, total_mass: 1.0, dim: 2 },
            LevyComponent::StableRay {
                alpha: 1.5,
                direction: RayDirection::Axis { axis: Axis::Index(0), positive: true },
                weight: 1.0,
            },
        ];
        assert!(LevyModel::new(2, mixed, None).is_err());
        let far = vec![LevyComponent::Atom { site: AtomSite::Axis { axis: Axis::Index(5), value: 1.0 }, mass: 1.0 }];
        assert!(LevyModel::new(2, far, None).is_err());
    }

    #[test]
    fn document_round_trip() {
        let text = r#"{
            "dim": 3,
            "components": [
                {"kind": "atom", "axis": "all", "position": 1.0, "mass": 0.5},
                {"kind": "atom", "position": [0.0, 2.0, 0.0], "mass": 0.25},
                {"kind": "stable_ray", "alpha": 1.5, "axis": 1, "sign": -1, "weight": 2.0},
                {"kind": "stable_ray", "alpha": 1.5, "direction": [0.6, 0.8, 0.0], "weight": 1.0}
            ],
            "shift": [0.0, 1.0, 0.0]
        }"#;
        let m: LevyModel = serde_json::from_str(text).unwrap();
        assert_eq!(m.sigma_total(), 3.0);
        assert_eq!(m.profile().atoms, vec![(1.0, 1.5), (2.0, 0.25)]);
        let back: LevyModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.fingerprint(), m.fingerprint());
        let bad = r#"{"dim": 1, "components": [{"kind": "blob", "mass": 1.0}]}"#;
        assert!(serde_json::from_str::<LevyModel>(bad).is_err());
    }
}
