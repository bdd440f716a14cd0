use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use super::{certify, evaluate, CalcError, CalcFunction, SectorialMatrix};
use crate::numkernel::{spectral_norm, ComplexMatrix};
use crate::range::{optimal_angle, range_boundary};
use crate::util::{golden_max, logspace, sampled_max};

/// The proven Crouzeix–Palencia constant `1 + √2`.
pub const CROUZEIX_BOUND: f64 = 1.0 + SQRT_2;

/// Region over which `sup |f|` is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// Sampled convex hull of N(B), optionally fattened by a margin.
    Hull { fatten: f64, n_dirs: usize },
    /// The closed sector of the given half-angle.
    Sector { half_angle: f64 },
}

impl Region {
    pub fn hull() -> Self {
        Region::Hull { fatten: 0.0, n_dirs: 2048 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrouzeixReport {
    pub norm: f64,
    pub sup: f64,
    pub ratio: f64,
    pub passed: bool,
}

fn apply(f: &CalcFunction, b: &ComplexMatrix) -> Result<ComplexMatrix, CalcError> {
    match f.direct(b) {
        Some(m) => m,
        None => evaluate(f, &certify(b)?),
    }
}

fn ratio_of(norm: f64, sup: f64) -> f64 {
    if sup > 0.0 {
        norm / sup
    } else if norm <= 1e-15 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `‖f(B)‖ / sup_{∂Q} |f|` for a region `Q ⊇ N(B)`.
pub fn crouzeix_ratio(b: &ComplexMatrix, f: &CalcFunction, region: Region) -> Result<CrouzeixReport, CalcError> {
    let sup = match region {
        Region::Hull { fatten, n_dirs } => sup_on_hull(b, f, fatten, n_dirs)?,
        Region::Sector { half_angle } => {
            let theta = optimal_angle(b)?.radians();
            if theta > half_angle + 1e-12 {
                return Err(CalcError::Domain(format!(
                    "sector of half-angle {half_angle:.6} does not contain N(B) (θ = {theta:.6})"
                )));
            }
            sup_on_sector(f, half_angle)?
        }
    };
    let norm = spectral_norm(&apply(f, b)?);
    let ratio = ratio_of(norm, sup);
    Ok(CrouzeixReport { norm, sup, ratio, passed: ratio <= CROUZEIX_BOUND + 1e-6 })
}

fn sup_on_hull(b: &ComplexMatrix, f: &CalcFunction, fatten: f64, n_dirs: usize) -> Result<f64, CalcError> {
    let rb = range_boundary(b, n_dirs)?;
    let pts: Vec<Complex64> = rb
        .boundary_points
        .iter()
        .zip(&rb.directions)
        .map(|(z, phi)| z + Complex64::from_polar(fatten, *phi))
        .collect();
    let width = rb
        .support_values
        .iter()
        .zip(rb.support_values.iter().skip(n_dirs / 2))
        .map(|(a, b)| a + b)
        .fold(f64::INFINITY, f64::min);
    let m = pts.len();
    let edge = |k: usize, u: f64| pts[k] + (pts[(k + 1) % m] - pts[k]) * u;
    let mut edge_best = Vec::with_capacity(m);
    for k in 0..m {
        let mut best: f64 = 0.0;
        for u in [0.0, 0.5] {
            let v = f.eval(edge(k, u)).norm();
            if !v.is_finite() {
                return Err(if width <= 1e-12 {
                    CalcError::DegenerateRange
                } else {
                    CalcError::NotInClass(format!("{} is not finite on the region", f.name()))
                });
            }
            best = best.max(v);
        }
        edge_best.push((best, k));
    }
    edge_best.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut sup = edge_best[0].0;
    for &(_, k) in edge_best.iter().take(8) {
        let (_, v) = golden_max(|u| f.eval(edge(k, u)).norm(), 0.0, 1.0, 60);
        sup = sup.max(v);
    }
    Ok(sup)
}

fn sup_on_sector(f: &CalcFunction, half_angle: f64) -> Result<f64, CalcError> {
    let ts = logspace(1e-8, 1e8, 2001);
    let mut sup: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let dir = Complex64::from_polar(1.0, sign * half_angle);
        let (_, v) = sampled_max(|t| f.eval(dir * t).norm(), &ts);
        if !v.is_finite() {
            return Err(CalcError::NotInClass(format!("{} is unbounded on the sector", f.name())));
        }
        sup = sup.max(v);
    }
    for lim in [f.limit_zero(), f.limit_infinity()].into_iter().flatten() {
        sup = sup.max(lim.norm());
    }
    Ok(sup)
}

/// `sup_{t ∈ ℝ} |f(it)|` including the limits at 0 and infinity when known.
pub fn sup_on_imaginary_axis(f: &CalcFunction) -> Result<f64, CalcError> {
    let ts = logspace(1e-6, 1e6, 1201);
    let mut sup = f.eval(Complex64::new(0.0, 0.0)).norm();
    for sign in [1.0, -1.0] {
        let (_, v) = sampled_max(|t| f.eval(Complex64::new(0.0, sign * t)).norm(), &ts);
        sup = sup.max(v);
    }
    if let Some(l) = f.limit_infinity() {
        sup = sup.max(l.norm());
    }
    if !sup.is_finite() {
        return Err(CalcError::NotInClass(format!("{} is unbounded on the imaginary axis", f.name())));
    }
    Ok(sup)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VonNeumannReport {
    pub norm: f64,
    pub sup: f64,
    pub ratio: f64,
    pub passed: bool,
}

/// `‖f(B)‖ ≤ sup_{Re z > 0} |f|` for accretive B, the supremum taken on the
/// imaginary axis.
pub fn von_neumann_check(s: &SectorialMatrix, f: &CalcFunction) -> Result<VonNeumannReport, CalcError> {
    let sup = sup_on_imaginary_axis(f)?;
    let norm = spectral_norm(&apply(f, s.matrix())?);
    let ratio = ratio_of(norm, sup);
    Ok(VonNeumannReport { norm, sup, ratio, passed: norm <= (1.0 + 1e-9) * sup + 1e-15 })
}
