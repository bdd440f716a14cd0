use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;

/// What a sector angle stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AngleRole {
    /// Optimal angle ω of a numerical range.
    Optimal,
    /// Coercivity estimate α.
    Estimate,
    /// Norm-based comparison angle ᾱ.
    Comparison,
    /// Spectral angle φ.
    Spectral,
    /// H∞ calculus angle ψ.
    HInf,
    /// Free angle ϑ chosen by the caller.
    Free,
    /// Optimal angle ω_p of a p-numerical range.
    PRange,
    /// L^p angle bound α_p.
    AlphaP,
    /// Uniform-data L^p angle bound.
    AlphaPUniform,
}

impl AngleRole {
    pub fn label(self) -> &'static str {
        match self {
            AngleRole::Optimal => "optimal",
            AngleRole::Estimate => "estimate",
            AngleRole::Comparison => "comparison",
            AngleRole::Spectral => "spectral",
            AngleRole::HInf => "hinf",
            AngleRole::Free => "free",
            AngleRole::PRange => "p_range",
            AngleRole::AlphaP => "alpha_p",
            AngleRole::AlphaPUniform => "alpha_p_uniform",
        }
    }
}

/// A closed-sector half angle θ ∈ [0, π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorAngle {
    theta: f64,
    role: AngleRole,
}

impl SectorAngle {
    /// Returns `None` unless `0 ≤ theta < π`.
    pub fn new(theta: f64, role: AngleRole) -> Option<Self> {
        (theta.is_finite() && (0.0..PI).contains(&theta)).then_some(Self { theta, role })
    }

    /// Clamps tiny negative rounding to zero and panics on anything else out of range.
    pub(crate) fn from_computed(theta: f64, role: AngleRole) -> Self {
        let theta = if theta < 0.0 && theta > -1e-14 { 0.0 } else { theta };
        Self::new(theta, role).unwrap_or_else(|| panic!("angle {theta} outside [0, π)"))
    }

    pub fn from_tan(t: f64, role: AngleRole) -> Self {
        Self::from_computed(t.atan(), role)
    }

    pub fn right_angle(role: AngleRole) -> Self {
        Self::from_computed(FRAC_PI_2, role)
    }

    pub fn radians(self) -> f64 {
        self.theta
    }

    pub fn degrees(self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn tan(self) -> f64 {
        self.theta.tan()
    }

    pub fn role(self) -> AngleRole {
        self.role
    }

    pub fn with_role(self, role: AngleRole) -> Self {
        Self { role, ..self }
    }

    /// Whether `z` lies in Σ_θ enlarged by `slack` radians.
    pub fn contains(self, z: Complex64, slack: f64) -> bool {
        z == Complex64::new(0.0, 0.0) || z.arg().abs() <= self.theta + slack
    }
}

impl fmt::Display for SectorAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {:.12} rad ({:.6}°)", self.role.label(), self.theta, self.degrees())
    }
}

/// Distance from `z` to the closed sector Σ_θ.
pub fn sector_distance(z: Complex64, theta: f64) -> f64 {
    let phi = z.arg().abs();
    if phi <= theta {
        0.0
    } else if phi >= theta + FRAC_PI_2 {
        z.norm()
    } else {
        z.norm() * (phi - theta).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_range_is_enforced() {
        assert!(SectorAngle::new(-0.1, AngleRole::Free).is_none());
        assert!(SectorAngle::new(PI, AngleRole::Free).is_none());
        assert!(SectorAngle::new(f64::NAN, AngleRole::Free).is_none());
        assert!(SectorAngle::new(0.0, AngleRole::Free).is_some());
    }

    #[test]
    fn distance_to_sector() {
        let z = Complex64::new(-1.0, 0.0);
        assert_eq!(sector_distance(z, 0.0), 1.0);
        assert!((sector_distance(z, PI / 4.0) - 1.0).abs() < 1e-15);
        let w = Complex64::new(0.0, 2.0);
        assert!((sector_distance(w, PI / 4.0) - 2.0 * (PI / 4.0).sin()).abs() < 1e-15);
        assert_eq!(sector_distance(Complex64::new(1.0, 0.1), 0.2), 0.0);
    }
}
