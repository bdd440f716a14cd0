//! Matrices treated as sectorial operators: resolvent and semigroup bounds,
//! regularizing approximants, a contour-integral functional calculus and
//! ratio checks against Crouzeix and von Neumann type inequalities.

mod bounds;
mod contour;
mod function;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::numkernel::{eigvalsh, expm, solve_matrix, spectral_norm, ComplexMatrix, NumError};
use crate::range::{optimal_angle, sector_distance, AngleRole, RangeError, SectorAngle};

pub use bounds::{crouzeix_ratio, sup_on_imaginary_axis, von_neumann_check, CrouzeixReport, Region, VonNeumannReport, CROUZEIX_BOUND};
pub use contour::{
    calculus_convergence, default_nu, dunford_riesz, dunford_riesz_with, evaluate, ContourOptions, ContourReport,
    ConvergenceReport, DEFAULT_QUAD_NODES, MIN_CONTOUR_MARGIN,
};
pub use function::{parse_complex, CalcFunction};

/// Slack used by the resolvent bound checks.
pub const RESOLVENT_SLACK: f64 = 1e-9;
/// Slack used by the contraction check.
pub const CONTRACTION_SLACK: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalcError {
    #[error("matrix is not accretive (min Re N(B) = {min_re:.6e})")]
    NotAccretive { min_re: f64 },
    #[error("λ = {lambda} lies in the sector of half-angle {theta:.6}")]
    InsideSector { lambda: Complex64, theta: f64 },
    #[error("contour margin {margin:.4} rad is below {min:.4} rad")]
    ContourTooTight { margin: f64, min: f64 },
    #[error("ray truncation failed: {0}")]
    TruncationError(String),
    #[error("function {0} is outside the calculus class")]
    NotInClass(String),
    #[error("numerical range hull is degenerate and the function is not finite on it")]
    DegenerateRange,
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// A matrix together with a certified sector containing its numerical range.
#[derive(Clone, Debug)]
pub struct SectorialMatrix {
    b: ComplexMatrix,
    theta: SectorAngle,
    min_re: f64,
    shift: f64,
}

impl SectorialMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn theta(&self) -> SectorAngle {
        self.theta
    }

    /// `λ_min(ReOp B)`.
    pub fn min_re(&self) -> f64 {
        self.min_re
    }

    /// The shift δ with `B = B₀ + δI`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }
}

fn accretivity_tol(b: &ComplexMatrix) -> f64 {
    1e-12 * b.max_abs().max(1.0) * b.dim() as f64
}

pub fn certify(b: &ComplexMatrix) -> Result<SectorialMatrix, CalcError> {
    certify_shifted(b, 0.0)
}

/// Certifies `B₀ + δI`.
pub fn certify_shifted(b0: &ComplexMatrix, delta: f64) -> Result<SectorialMatrix, CalcError> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(CalcError::Domain(format!("shift δ = {delta} must be finite and nonnegative")));
    }
    if !b0.is_finite() {
        return Err(NumError::NonFinite.into());
    }
    let b = b0.shift(Complex64::new(delta, 0.0));
    let min_re = eigvalsh(&b.hermitian_part())?[0];
    let tol = accretivity_tol(&b);
    if min_re < -tol {
        return Err(CalcError::NotAccretive { min_re });
    }
    let theta = if min_re <= tol {
        match optimal_angle(&b) {
            Ok(t) => t,
            Err(RangeError::NotSectorialValued { .. }) => SectorAngle::right_angle(AngleRole::Optimal),
            Err(e) => return Err(e.into()),
        }
    } else {
        optimal_angle(&b)?
    };
    Ok(SectorialMatrix { b, theta, min_re, shift: delta })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolventReport {
    pub lambda: Complex64,
    pub norm: f64,
    pub distance: f64,
    /// `‖(B−λ)⁻¹‖·dist(λ, Σ_θ)`, at most 1.
    pub distance_product: f64,
    pub distance_passed: bool,
    /// `(ϑ, ‖λ(B−λ)⁻¹‖, 1/sin(ϑ−θ))` when a wider angle was supplied.
    pub angle_bound: Option<(f64, f64, f64)>,
    pub angle_passed: bool,
}

impl ResolventReport {
    pub fn passed(&self) -> bool {
        self.distance_passed && self.angle_passed
    }
}

/// `(B − λ)⁻¹` for `λ ∉ Σ_θ`, with the distance bound and, when `vartheta` is
/// given and `λ ∉ Σ_ϑ`, the uniform bound `‖λ(B−λ)⁻¹‖ ≤ 1/sin(ϑ−θ)`.
pub fn resolvent(
    s: &SectorialMatrix,
    lambda: Complex64,
    vartheta: Option<f64>,
) -> Result<(ComplexMatrix, ResolventReport), CalcError> {
    let theta = s.theta.radians();
    let distance = sector_distance(lambda, theta);
    if distance <= 0.0 {
        return Err(CalcError::InsideSector { lambda, theta });
    }
    let n = s.dim();
    let r = solve_matrix(&s.b.shift(-lambda), &ComplexMatrix::identity(n))?;
    let norm = spectral_norm(&r);
    let distance_product = norm * distance;
    let mut report = ResolventReport {
        lambda,
        norm,
        distance,
        distance_product,
        distance_passed: distance_product <= 1.0 + RESOLVENT_SLACK,
        angle_bound: None,
        angle_passed: true,
    };
    if let Some(vt) = vartheta {
        if vt <= theta || vt >= std::f64::consts::PI {
            return Err(CalcError::Domain(format!("ϑ = {vt} must lie in (θ, π)")));
        }
        if lambda.arg().abs() > vt {
            let lhs = lambda.norm() * norm;
            let gap = vt - theta;
            let rhs = if gap >= FRAC_PI_2 { 1.0 } else { 1.0 / gap.sin() };
            report.angle_passed = lhs <= rhs * (1.0 + RESOLVENT_SLACK);
            report.angle_bound = Some((vt, lhs, rhs));
        }
    }
    Ok((r, report))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupReport {
    pub z: Complex64,
    pub norm: f64,
    /// Whether `z ∈ Σ_{π/2 − θ}`.
    pub in_contraction_sector: bool,
    pub passed: bool,
}

/// `expm(−zB)` for `Re z ≥ 0`, checking contractivity on `Σ_{π/2 − θ}`.
pub fn semigroup(s: &SectorialMatrix, z: Complex64) -> Result<(ComplexMatrix, SemigroupReport), CalcError> {
    if z.re < 0.0 {
        return Err(CalcError::Domain(format!("semigroup needs Re z ≥ 0, got {z}")));
    }
    let e = expm(&s.b.scale(-z))?;
    let norm = spectral_norm(&e);
    let half = FRAC_PI_2 - s.theta.radians();
    let in_sector = z == Complex64::new(0.0, 0.0) || z.arg().abs() <= half + 1e-15;
    let passed = !in_sector || norm <= 1.0 + CONTRACTION_SLACK;
    Ok((e, SemigroupReport { z, norm, in_contraction_sector: in_sector, passed }))
}

#[derive(Clone, Debug)]
pub struct ApproximantReport {
    pub eps: f64,
    pub theta: f64,
    pub theta_eps: f64,
    pub min_re_eps: f64,
    pub passed: bool,
}

/// `B_ε = (B + εI)(I + εB)⁻¹`, certified.
pub fn approximant(s: &SectorialMatrix, eps: f64) -> Result<(SectorialMatrix, ApproximantReport), CalcError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CalcError::Domain(format!("ε = {eps} must be positive")));
    }
    let n = s.dim();
    let num = s.b.shift(Complex64::new(eps, 0.0));
    let den = &s.b.scale_real(eps) + &ComplexMatrix::identity(n);
    // B + εI and I + εB commute
    let be = solve_matrix(&den, &num)?;
    let cert = certify(&be)?;
    let theta = s.theta.radians();
    let report = ApproximantReport {
        eps,
        theta,
        theta_eps: cert.theta.radians(),
        min_re_eps: cert.min_re,
        passed: cert.theta.radians() <= theta + 1e-8 && cert.min_re >= eps.min(1.0 / eps) - 1e-10,
    };
    Ok((cert, report))
}
