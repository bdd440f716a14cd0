use std::f64::consts::PI;

use num_complex::Complex64;

use super::{approximant, CalcError, CalcFunction, SectorialMatrix};
use crate::numkernel::{spectral_norm, ComplexMatrix, Lu};
use crate::range::SectorAngle;
use crate::util::{gauss_legendre, logspace};

/// Gauss–Legendre nodes per ray segment.
pub const DEFAULT_QUAD_NODES: usize = 200;
/// Smallest accepted gap between the contour and the certified sector.
pub const MIN_CONTOUR_MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourOptions {
    pub n_quad: usize,
    pub margin: f64,
    /// Bound on each of the two truncated tails.
    pub tail_tol: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self { n_quad: DEFAULT_QUAD_NODES, margin: MIN_CONTOUR_MARGIN, tail_tol: 2e-11 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContourReport {
    pub nu: f64,
    pub nu_prime: f64,
    pub envelope_c: f64,
    pub decay: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Sum of both analytic tail bounds.
    pub tail_bound: f64,
    pub segments: usize,
    pub nodes: usize,
}

/// `f(B)` by the Dunford–Riesz integral over `∂Σ_{ν′}`, `ν′ = (θ + ν)/2`.
pub fn dunford_riesz(
    f: &CalcFunction,
    s: &SectorialMatrix,
    nu: SectorAngle,
    n_quad: usize,
) -> Result<ComplexMatrix, CalcError> {
    let opts = ContourOptions { n_quad, ..ContourOptions::default() };
    dunford_riesz_with(f, s, nu.radians(), &opts).map(|(m, _)| m)
}

fn envelope(t: f64, s: f64) -> f64 {
    t.powf(s).min(t.powf(-s))
}

pub fn dunford_riesz_with(
    f: &CalcFunction,
    s: &SectorialMatrix,
    nu: f64,
    opts: &ContourOptions,
) -> Result<(ComplexMatrix, ContourReport), CalcError> {
    let (f0, finf) = match (f.limit_zero(), f.limit_infinity()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(CalcError::NotInClass(f.name())),
    };
    if s.min_re() <= 0.0 {
        return Err(CalcError::Domain(format!(
            "contour calculus needs min Re N(B) > 0, got {:.3e}",
            s.min_re()
        )));
    }
    let theta = s.theta().radians();
    if !(nu > theta && nu < PI) {
        return Err(CalcError::Domain(format!("contour angle ν = {nu} must lie in (θ, π) with θ = {theta}")));
    }
    if nu > f.max_angle() + 1e-15 {
        return Err(CalcError::NotInClass(format!("{} on a sector of half-angle {nu:.6}", f.name())));
    }
    if opts.n_quad < 2 {
        return Err(CalcError::Domain("at least 2 quadrature nodes are required".into()));
    }
    let nu_p = 0.5 * (theta + nu);
    let margin = nu_p - theta;
    if margin < opts.margin {
        return Err(CalcError::ContourTooTight { margin, min: opts.margin });
    }

    let b = s.matrix();
    let n = b.dim();
    let one = Complex64::new(1.0, 0.0);
    let id = ComplexMatrix::identity(n);
    let inv_shift = Lu::new(&b.shift(one))?.solve_mat(&id);
    let mut result = &id.scale(finf) + &inv_shift.scale(f0 - finf);

    let remainder = |z: Complex64| f.eval(z) - finf - (f0 - finf) / (one + z);
    let decay = f.decay();
    let rays = [Complex64::from_polar(1.0, nu_p), Complex64::from_polar(1.0, -nu_p), one];
    let mut c: f64 = 0.0;
    for t in logspace(1e-8, 1e8, 801) {
        for dir in rays {
            let v = remainder(dir * t).norm() / envelope(t, decay);
            if !v.is_finite() {
                return Err(CalcError::NotInClass(format!("{} is not finite at {}", f.name(), dir * t)));
            }
            c = c.max(v);
        }
    }
    let mut report = ContourReport {
        nu,
        nu_prime: nu_p,
        envelope_c: 0.0,
        decay,
        r_min: 0.0,
        r_max: 0.0,
        tail_bound: 0.0,
        segments: 0,
        nodes: 0,
    };
    // Möbius functions have a vanishing remainder up to rounding.
    if c <= 1e-14 * (f0.norm() + finf.norm()).max(1e-300) {
        return Ok((result, report));
    }
    let c = 1.25 * c;
    let sin_gap = margin.min(PI / 2.0).sin();
    let min_re = s.min_re();
    let r_max = (c / (PI * decay * sin_gap * opts.tail_tol)).powf(1.0 / decay);
    let r_min = (opts.tail_tol * PI * (decay + 1.0) * min_re / (2.0 * c))
        .powf(1.0 / (decay + 1.0))
        .min(0.5 * min_re);
    let (a, z_end) = (r_min.ln(), r_max.ln());
    if !(a.is_finite() && z_end.is_finite() && a < z_end) {
        return Err(CalcError::TruncationError(format!("cannot place the ray cut-offs (r₀ = {r_min:.3e}, R = {r_max:.3e})")));
    }
    let upper_tail = c * r_max.powf(-decay) / (PI * decay * sin_gap);
    let lower_tail = 2.0 * c * r_min.powf(decay + 1.0) / (PI * (decay + 1.0) * min_re);
    if upper_tail + lower_tail > 1e-10 {
        return Err(CalcError::TruncationError(format!("tail bound {:.3e}", upper_tail + lower_tail)));
    }

    // In u = ln t the nearest singularity sits at distance ≥ ν′ − θ from the
    // real axis, so segment widths scale with that gap.
    let gap = margin.min(f.max_angle() - nu_p).max(1e-3);
    let width = (gap * opts.n_quad as f64 / 25.0).min(2.0);
    let segments = ((z_end - a) / width).ceil().max(1.0) as usize;
    let h = (z_end - a) / segments as f64;
    let (xs, ws) = gauss_legendre(opts.n_quad);
    let e_up = Complex64::from_polar(1.0, nu_p);
    let e_dn = e_up.conj();
    let mut acc = ComplexMatrix::zeros(n);
    for k in 0..segments {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in xs.iter().zip(&ws) {
            let t = (mid + 0.5 * h * x).exp();
            let wt = 0.5 * h * w * t;
            let z_dn = e_dn * t;
            let z_up = e_up * t;
            let r_dn = Lu::new(&b.scale_real(-1.0).shift(z_dn))?.solve_mat(&id);
            let r_up = Lu::new(&b.scale_real(-1.0).shift(z_up))?.solve_mat(&id);
            let c_dn = remainder(z_dn) * e_dn * wt;
            let c_up = remainder(z_up) * e_up * wt;
            for i in 0..n {
                for j in 0..n {
                    acc[(i, j)] += c_dn * r_dn[(i, j)] - c_up * r_up[(i, j)];
                }
            }
        }
    }
    let factor = Complex64::new(0.0, -1.0 / (2.0 * PI));
    result = &result + &acc.scale(factor);
    report.envelope_c = c;
    report.r_min = r_min;
    report.r_max = r_max;
    report.tail_bound = upper_tail + lower_tail;
    report.segments = segments;
    report.nodes = segments * opts.n_quad * 2;
    Ok((result, report))
}

/// Default contour angle: midway between θ and the function's largest angle.
pub fn default_nu(f: &CalcFunction, s: &SectorialMatrix) -> f64 {
    let top = f.max_angle().min(PI - 1e-9);
    0.5 * (s.theta().radians() + top)
}

/// `f(B)` in closed form when available, otherwise by the contour integral at
/// the default angle.
pub fn evaluate(f: &CalcFunction, s: &SectorialMatrix) -> Result<ComplexMatrix, CalcError> {
    if let Some(m) = f.direct(s.matrix()) {
        return m;
    }
    let opts = ContourOptions::default();
    dunford_riesz_with(f, s, default_nu(f, s), &opts).map(|(m, _)| m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// `(ε, ‖f(B_ε) − f(B)‖)`.
    pub entries: Vec<(f64, f64)>,
    pub monotone: bool,
    pub final_difference: f64,
}

/// `‖f(B_ε) − f(B)‖` along a decreasing sequence of ε, all by the contour at
/// the same angle ν.
pub fn calculus_convergence(
    f: &CalcFunction,
    s: &SectorialMatrix,
    eps_sequence: &[f64],
    nu: Option<f64>,
) -> Result<ConvergenceReport, CalcError> {
    if eps_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CalcError::Domain("ε sequence must be strictly decreasing".into()));
    }
    let nu = nu.unwrap_or_else(|| default_nu(f, s));
    let opts = ContourOptions::default();
    let (fb, _) = dunford_riesz_with(f, s, nu, &opts)?;
    let mut entries = Vec::with_capacity(eps_sequence.len());
    for &eps in eps_sequence {
        let (se, _) = approximant(s, eps)?;
        let (fe, _) = dunford_riesz_with(f, &se, nu, &opts)?;
        entries.push((eps, spectral_norm(&(&fe - &fb))));
    }
    let monotone = entries.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-6) + 1e-12);
    let final_difference = entries.last().map(|e| e.1).unwrap_or(0.0);
    Ok(ConvergenceReport { entries, monotone, final_difference })
}
