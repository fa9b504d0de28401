//! Exponential-moment rate functions `h`, their primitives `H`, and the
//! Legendre evaluation of `∫₀ˣ h⁻¹(s) ds` that every finite-exponential-moment
//! bound reduces to.

use thiserror::Error;

use crate::roots::{self, RootError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("argument {x} outside (0, {limit})")]
    OutOfRange { x: f64, limit: f64 },
    #[error(transparent)]
    Root(#[from] RootError),
}

/// A strictly increasing rate `h` on `(0, T)` with `h(0+) = 0`.
pub trait RateFunction {
    /// `h(t)`.
    fn rate(&self, t: f64) -> f64;

    /// `H(t) = ∫₀ᵗ h(s) ds`.
    fn primitive(&self, t: f64) -> f64;

    /// `t h(t) - H(t)`, the Legendre gap. Implementations with a
    /// cancellation-free form should override this.
    fn legendre_gap(&self, t: f64) -> f64 {
        t * self.rate(t) - self.primitive(t)
    }

    /// The exponential-moment supremum `T`.
    fn horizon(&self) -> f64 {
        f64::INFINITY
    }

    /// `h(T⁻)`.
    fn rate_limit(&self) -> f64 {
        f64::INFINITY
    }
}

/// `h⁻¹(x)` by bisection on the increasing map `t ↦ h(t)`.
pub fn inverse<R: RateFunction + ?Sized>(rate: &R, x: f64) -> Result<f64, RateError> {
    let limit = rate.rate_limit();
    if !(x >= 0.0 && x < limit) || !x.is_finite() {
        return Err(RateError::OutOfRange { x, limit });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(roots::solve_increasing(|t| rate.rate(t), x, 0.0, 1.0, Tolerance::RELATIVE)?)
}

/// `∫₀ˣ h⁻¹(s) ds = x t* - H(t*)` with `t* = h⁻¹(x)`.
pub fn inverse_integral<R: RateFunction + ?Sized>(rate: &R, x: f64) -> Result<f64, RateError> {
    let t = inverse(rate, x)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok((x * t - rate.primitive(t)).max(0.0))
}

/// Solves `t h(t) - H(t) = level` for `t > 0`.
pub fn solve_gap<R: RateFunction + ?Sized>(rate: &R, level: f64) -> Result<f64, RateError> {
    if !(level > 0.0) || !level.is_finite() {
        return Err(RateError::OutOfRange { x: level, limit: f64::INFINITY });
    }
    Ok(roots::solve_increasing(|t| rate.legendre_gap(t), level, 0.0, 1.0, Tolerance::RELATIVE)?)
}

/// `e^y - 1 - y`, accurate near zero.
pub(crate) fn exp_defect(y: f64) -> f64 {
    if y.abs() < 1e-2 {
        let y2 = y * y;
        y2 * (0.5 + y * (1.0 / 6.0 + y * (1.0 / 24.0 + y * (1.0 / 120.0 + y / 720.0))))
    } else {
        y.exp_m1() - y
    }
}

/// `(y - 1) e^y + 1`, accurate near zero.
pub(crate) fn gap_kernel(y: f64) -> f64 {
    if y.abs() < 1e-2 {
        let y2 = y * y;
        y2 * (0.5 + y * (1.0 / 3.0 + y * (1.0 / 8.0 + y * (1.0 / 30.0 + y * (1.0 / 144.0 + y / 840.0)))))
    } else {
        (y - 1.0) * y.exp() + 1.0
    }
}

/// Rate of a Lévy measure made of finitely many atoms, seen through their
/// norms: `h(t) = Σ m r (e^{t r} - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomRate {
    atoms: Vec<(f64, f64)>,
}

impl AtomRate {
    /// `atoms` are `(radius, mass)` pairs with positive entries.
    pub fn new(atoms: Vec<(f64, f64)>) -> Self {
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

impl RateFunction for AtomRate {
    fn rate(&self, t: f64) -> f64 {
        self.atoms.iter().map(|&(r, m)| m * r * (t * r).exp_m1()).sum()
    }

    fn primitive(&self, t: f64) -> f64 {
        self.atoms.iter().map(|&(r, m)| m * exp_defect(t * r)).sum()
    }

    fn legendre_gap(&self, t: f64) -> f64 {
        self.atoms.iter().map(|&(r, m)| m * gap_kernel(t * r)).sum()
    }
}

/// Bennett-type majorant `h(t) = V² (e^{tR} - 1) / R` of the rate of any
/// Lévy measure supported in the ball of radius `R` with `∫‖u‖²ν = V²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BennettRate {
    pub v2: f64,
    pub radius: f64,
}

impl RateFunction for BennettRate {
    fn rate(&self, t: f64) -> f64 {
        self.v2 * (t * self.radius).exp_m1() / self.radius
    }

    fn primitive(&self, t: f64) -> f64 {
        self.v2 / (self.radius * self.radius) * exp_defect(t * self.radius)
    }

    fn legendre_gap(&self, t: f64) -> f64 {
        self.v2 / (self.radius * self.radius) * gap_kernel(t * self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn unit_atom_values() {
        let r = AtomRate::new(vec![(1.0, 1.0)]);
        assert!((r.rate(1.0) - (E - 1.0)).abs() < 1e-15);
        assert!((r.primitive(1.0) - (E - 2.0)).abs() < 1e-15);
        assert!((inverse(&r, E - 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((inverse_integral(&r, E - 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(inverse(&r, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_is_relatively_accurate_near_zero() {
        let r = AtomRate::new(vec![(1.0, 3.0), (0.5, 2.0)]);
        for &x in &[1e-12, 1e-6, 1e-2, 10.0, 1e6] {
            let t = inverse(&r, x).unwrap();
            assert!((r.rate(t) - x).abs() <= 1e-10 * x, "x={x}");
        }
    }

    #[test]
    fn out_of_range_is_reported() {
        let r = AtomRate::new(vec![(1.0, 1.0)]);
        assert!(matches!(inverse(&r, f64::INFINITY), Err(RateError::OutOfRange { .. })));
        assert!(matches!(inverse(&r, -1.0), Err(RateError::OutOfRange { .. })));
    }

    #[test]
    fn gap_root_for_unit_atom() {
        // (t-1)e^t + 1 = 1  ⇔  t = 1
        let r = AtomRate::new(vec![(1.0, 1.0)]);
        assert!((solve_gap(&r, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernels_match_direct_forms() {
        for &y in &[1e-3_f64, 5e-3, 0.0099, 0.0101, 0.3, 2.0] {
            let d1 = y.exp() - 1.0 - y;
            let d2 = (y - 1.0) * y.exp() + 1.0;
            assert!((exp_defect(y) / d1 - 1.0).abs() < 1e-9, "{y}");
            assert!((gap_kernel(y) / d2 - 1.0).abs() < 1e-9, "{y}");
        }
    }
}
