//! Coefficient fields μ: Ω → C^{d×d}, piecewise constant on a rectangular grid,
//! with p-ellipticity and the L^p angle formulas built on them.

mod exponent;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::numkernel::{eigvalsh, spectral_norm, ComplexMatrix, NumError};
use crate::range::{
    operator_parts, optimal_angle, pair_angle, AngleRole, RangeError, SectorAngle,
};

pub use exponent::{psi, psi_inverse, psi_of, CriticalExponent, PExponent};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cell {cell} is not coercive (m = {m:.6e})")]
    NotCoercive { cell: usize, m: f64 },
    #[error("coefficient is not p-elliptic (Δ_p = {delta:.6e})")]
    NotPElliptic { delta: f64 },
    #[error("exponent p = {p} lies outside the admissible window ({low}, {high})")]
    OutOfRange { p: f64, low: f64, high: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Cached ellipticity data for one constant coefficient matrix.
#[derive(Clone, Debug)]
pub struct CoefficientCell {
    pub d: usize,
    pub mu: ComplexMatrix,
    /// λ_min(ReOp μ).
    pub m_x: f64,
    /// Spectral norm of the entrywise real part.
    pub re_norm: f64,
    /// Spectral norm of the entrywise imaginary part.
    pub im_norm: f64,
    pub omega_x: SectorAngle,
    /// n(ImOp μ).
    pub nimop: f64,
}

pub fn analyze_cell(mu: &ComplexMatrix) -> Result<CoefficientCell, FieldError> {
    analyze_cell_at(mu, 0)
}

fn analyze_cell_at(mu: &ComplexMatrix, index: usize) -> Result<CoefficientCell, FieldError> {
    let d = mu.dim();
    if !(1..=3).contains(&d) {
        return Err(FieldError::Domain(format!("spatial dimension {d} not in 1..=3")));
    }
    if !mu.is_finite() {
        return Err(FieldError::Numeric(NumError::NonFinite));
    }
    let parts = operator_parts(mu);
    let m_x = eigvalsh(&parts.re_part)?[0];
    if m_x <= 0.0 {
        return Err(FieldError::NotCoercive { cell: index, m: m_x });
    }
    let im_vals = eigvalsh(&parts.im_part)?;
    Ok(CoefficientCell {
        d,
        mu: mu.clone(),
        m_x,
        re_norm: spectral_norm(&mu.re_entries()),
        im_norm: spectral_norm(&mu.im_entries()),
        omega_x: optimal_angle(mu)?,
        nimop: im_vals[0].abs().max(im_vals[im_vals.len() - 1].abs()),
    })
}

/// Piecewise-constant field on an `nx × ny` grid, cells stored row-major
/// (x fastest).
#[derive(Clone, Debug)]
pub struct CoefficientField {
    nx: usize,
    ny: usize,
    cells: Vec<CoefficientCell>,
}

impl CoefficientField {
    pub fn new(nx: usize, ny: usize, mus: &[ComplexMatrix]) -> Result<Self, FieldError> {
        if nx == 0 || ny == 0 {
            return Err(FieldError::GridMismatch(format!("empty grid {nx}×{ny}")));
        }
        if mus.len() != nx * ny {
            return Err(FieldError::GridMismatch(format!(
                "grid {nx}×{ny} needs {} cells, got {}",
                nx * ny,
                mus.len()
            )));
        }
        let d = mus[0].dim();
        let cells = mus
            .iter()
            .enumerate()
            .map(|(k, mu)| {
                if mu.dim() != d {
                    return Err(FieldError::GridMismatch(format!(
                        "cell {k} has dimension {} but cell 0 has {d}",
                        mu.dim()
                    )));
                }
                analyze_cell_at(mu, k)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { nx, ny, cells })
    }

    /// A single constant cell.
    pub fn constant(mu: &ComplexMatrix) -> Result<Self, FieldError> {
        Self::new(1, 1, std::slice::from_ref(mu))
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn dim(&self) -> usize {
        self.cells[0].d
    }

    pub fn cells(&self) -> &[CoefficientCell] {
        &self.cells
    }

    /// Cell at column `i`, row `j`.
    pub fn cell(&self, i: usize, j: usize) -> &CoefficientCell {
        &self.cells[j * self.nx + i]
    }

    pub fn m_bullet(&self) -> f64 {
        self.cells.iter().map(|c| c.m_x).fold(f64::INFINITY, f64::min)
    }

    /// ω(μ), the largest cell angle.
    pub fn omega_mu(&self) -> SectorAngle {
        self.cells
            .iter()
            .map(|c| c.omega_x)
            .max_by(|a, b| a.radians().total_cmp(&b.radians()))
            .expect("field has cells")
    }

    pub fn max_re_norm(&self) -> f64 {
        self.cells.iter().map(|c| c.re_norm).fold(0.0, f64::max)
    }

    pub fn max_im_norm(&self) -> f64 {
        self.cells.iter().map(|c| c.im_norm).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.max_im_norm() == 0.0
    }
}

/// Coercivity-based field angle: `tan α = max_x n(ImOp μ(x))/m(x)`.
pub fn field_alpha(field: &CoefficientField) -> SectorAngle {
    let t = field
        .cells()
        .iter()
        .map(|c| c.nimop / c.m_x)
        .fold(0.0, f64::max);
    SectorAngle::from_tan(t, AngleRole::Estimate)
}

fn q_from_eta(eta: f64) -> Result<CriticalExponent, FieldError> {
    if eta == 0.0 {
        Ok(CriticalExponent::INFINITE)
    } else {
        psi_inverse(eta)
    }
}

/// `η = max_x ‖Im μ(x)‖/m(x)` and `q = Ψ⁻¹(η)` (infinite for real fields).
pub fn eta_and_q(field: &CoefficientField) -> Result<(f64, CriticalExponent), FieldError> {
    let eta = field
        .cells()
        .iter()
        .map(|c| c.im_norm / c.m_x)
        .fold(0.0, f64::max);
    Ok((eta, q_from_eta(eta)?))
}

/// Uniform-data variant `η_• = max ‖Im μ‖ / m_•`.
pub fn eta_and_q_uniform(field: &CoefficientField) -> Result<(f64, CriticalExponent), FieldError> {
    let eta = field.max_im_norm() / field.m_bullet();
    Ok((eta, q_from_eta(eta)?))
}

/// Real 2d×2d representation of ξ ↦ μξ on `(Re ξ, Im ξ)`.
fn real_representation(mu: &ComplexMatrix) -> Vec<Vec<f64>> {
    let d = mu.dim();
    let mut r = vec![vec![0.0; 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            let z = mu[(i, j)];
            r[i][j] = z.re;
            r[i][j + d] = -z.im;
            r[i + d][j] = z.im;
            r[i + d][j + d] = z.re;
        }
    }
    r
}

/// Symmetric real matrices of `ξ ↦ Re(μξ, J_p ξ)` and `ξ ↦ Im(μξ, J_p ξ)`.
pub fn p_form_pair(mu: &ComplexMatrix, p: PExponent) -> (ComplexMatrix, ComplexMatrix) {
    let d = mu.dim();
    let r = real_representation(mu);
    let a = 2.0 / p.conj();
    let b = 2.0 / p.p();
    let jw = |k: usize| if k < d { a } else { b };
    // Re = xᵀ J R x, Im = xᵀ J Q R x with Q = [[0, I], [−I, 0]]
    let jr = |i: usize, j: usize| jw(i) * r[i][j];
    let jqr = |i: usize, j: usize| {
        if i < d {
            jw(i) * r[i + d][j]
        } else {
            -jw(i) * r[i - d][j]
        }
    };
    let n = 2 * d;
    let sym = |f: &dyn Fn(usize, usize) -> f64| {
        ComplexMatrix::from_fn(n, |i, j| Complex64::new(0.5 * (f(i, j) + f(j, i)), 0.0))
    };
    (sym(&jr), sym(&jqr))
}

/// `Δ_p(μ) = min_{|ξ|=1} Re(μξ, J_p ξ)`, exactly as a symmetric eigenvalue.
pub fn delta_p(mu: &ComplexMatrix, p: PExponent) -> Result<f64, FieldError> {
    let (s_re, _) = p_form_pair(mu, p);
    Ok(eigvalsh(&s_re)?[0])
}

/// Field-level Δ_p, the minimum over cells.
pub fn delta_p_field(field: &CoefficientField, p: PExponent) -> Result<f64, FieldError> {
    field
        .cells()
        .iter()
        .map(|c| delta_p(&c.mu, p))
        .try_fold(f64::INFINITY, |acc, d| Ok(acc.min(d?)))
}

fn check_window(p: PExponent, q: CriticalExponent) -> Result<(), FieldError> {
    if q.admits(p) {
        Ok(())
    } else {
        Err(FieldError::OutOfRange {
            p: p.p(),
            low: q.conj(),
            high: q.value(),
        })
    }
}

/// `(1 ∧ (σ_q − σ_p)/σ_p)·m_•/p` with p reflected to `p ≥ 2`.
pub fn delta_p_lower_bound(field: &CoefficientField, p: PExponent) -> Result<f64, FieldError> {
    let (_, q) = eta_and_q(field)?;
    check_window(p, q)?;
    let sp = p.sigma();
    let factor = if sp == 0.0 || q.is_infinite() {
        1.0
    } else {
        ((q.sigma() - sp) / sp).min(1.0)
    };
    Ok(factor * field.m_bullet() / p.reflected())
}

/// Optimal angle ω_p(μ) of the p-numerical range.
pub fn p_range_angle(mu: &ComplexMatrix, p: PExponent) -> Result<SectorAngle, FieldError> {
    let (s_re, s_im) = p_form_pair(mu, p);
    let delta = eigvalsh(&s_re)?[0];
    if delta <= 0.0 {
        return Err(FieldError::NotPElliptic { delta });
    }
    let theta = pair_angle(&s_re, &s_im)?;
    Ok(SectorAngle::from_computed(theta, AngleRole::PRange))
}

/// How the real-coefficient L^p angle formula treats ω(μ) under the radical.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpAngleReading {
    /// `p² tan²(ω)`, consistent with α_2 = ω.
    Tangent,
    /// `p² ω²` as printed.
    Literal,
}

/// `tan α_p = √((p − 2)² + p² t²)/(2√(p − 1))` with `t = tan ω` (or `ω`, literally).
pub fn alpha_p_real(
    omega: SectorAngle,
    p: PExponent,
    reading: LpAngleReading,
) -> Result<SectorAngle, FieldError> {
    let w = omega.radians();
    if w >= FRAC_PI_2 {
        return Err(FieldError::Domain(format!("ω = {w} must be below π/2")));
    }
    let t = match reading {
        LpAngleReading::Tangent => w.tan(),
        LpAngleReading::Literal => w,
    };
    let pp = p.p();
    let num = ((pp - 2.0).powi(2) + pp * pp * t * t).sqrt();
    Ok(SectorAngle::from_tan(num / (2.0 * (pp - 1.0).sqrt()), AngleRole::AlphaP))
}

fn kappa_ratio(tan_omega: f64, m: f64, re_norm: f64, im_norm: f64, sigma: f64) -> Option<f64> {
    let den = m - sigma * im_norm;
    (den > 0.0).then(|| (tan_omega * m + sigma * re_norm) / den)
}

/// Pointwise complex-coefficient bound: the maximum over cells of
/// `(tan ω_x·m_x + σ_p‖Re μ‖)/(m_x − σ_p‖Im μ‖)`.
pub fn alpha_p_complex(field: &CoefficientField, p: PExponent) -> Result<SectorAngle, FieldError> {
    let (_, q) = eta_and_q(field)?;
    check_window(p, q)?;
    let sigma = p.sigma();
    let mut t = 0.0f64;
    for c in field.cells() {
        let r = kappa_ratio(c.omega_x.tan(), c.m_x, c.re_norm, c.im_norm, sigma).ok_or(
            FieldError::OutOfRange {
                p: p.p(),
                low: q.conj(),
                high: q.value(),
            },
        )?;
        t = t.max(r);
    }
    Ok(SectorAngle::from_tan(t, AngleRole::AlphaP))
}

/// Uniform-data bound built from m_•, ω(μ) and the maximal part norms.
pub fn alpha_p_uniform(field: &CoefficientField, p: PExponent) -> Result<SectorAngle, FieldError> {
    let (_, q) = eta_and_q_uniform(field)?;
    check_window(p, q)?;
    let t = kappa_ratio(
        field.omega_mu().tan(),
        field.m_bullet(),
        field.max_re_norm(),
        field.max_im_norm(),
        p.sigma(),
    )
    .ok_or(FieldError::OutOfRange {
        p: p.p(),
        low: q.conj(),
        high: q.value(),
    })?;
    Ok(SectorAngle::from_tan(t, AngleRole::AlphaPUniform))
}

/// Interpolated H∞ angle `(π/2)|1 − 2/p| + ω(1 − |1 − 2/p|)`.
pub fn hinf_angle_bound(omega: SectorAngle, p: PExponent) -> Result<SectorAngle, FieldError> {
    let w = omega.radians();
    if w >= FRAC_PI_2 {
        return Err(FieldError::Domain(format!("ω = {w} must be below π/2")));
    }
    let s = (1.0 - 2.0 / p.p()).abs();
    Ok(SectorAngle::from_computed(
        FRAC_PI_2 * s + w * (1.0 - s),
        AngleRole::HInf,
    ))
}

/// The value `(μξ, J_p ξ)` at one vector.
pub fn p_form_value(mu: &ComplexMatrix, xi: &[Complex64], p: PExponent) -> Complex64 {
    let a = 2.0 / p.conj();
    let b = 2.0 / p.p();
    let mxi = mu.matvec(xi);
    mxi.iter()
        .zip(xi)
        .map(|(u, x)| u * Complex64::new(a * x.re, b * x.im).conj())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hmat() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]).unwrap()
    }

    fn pe(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    fn random_coercive(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.4..0.4)));
        let m = eigvalsh(&g.hermitian_part()).unwrap()[0];
        g.shift(c(-m + rng.gen_range(0.5..1.5), 0.0))
    }

    #[test]
    fn cell_examples() {
        let id = analyze_cell(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!((id.m_x, id.re_norm, id.im_norm, id.omega_x.radians()), (1.0, 1.0, 0.0, 0.0));
        let h = analyze_cell(&hmat()).unwrap();
        assert!((h.m_x - 1.0).abs() < 1e-14);
        assert!((h.re_norm - 2.0).abs() < 1e-12);
        assert!((h.im_norm - 1.0).abs() < 1e-12);
        assert_eq!(h.omega_x.radians(), 0.0);
        let s = analyze_cell(&ComplexMatrix::identity(2).scale(c(1.0, 1.0))).unwrap();
        assert!((s.omega_x.radians() - PI / 4.0).abs() < 1e-12);
        assert!((s.im_norm - 1.0).abs() < 1e-12);
        let bad = ComplexMatrix::from_real_diag(&[1.0, -0.5]);
        assert!(matches!(analyze_cell(&bad), Err(FieldError::NotCoercive { .. })));
    }

    #[test]
    fn field_alpha_examples() {
        let f = CoefficientField::constant(&ComplexMatrix::from_diag(&[c(1.0, 0.0), c(10.0, 1.0)])).unwrap();
        assert!((field_alpha(&f).radians() - PI / 4.0).abs() < 1e-12);
        let f = CoefficientField::new(2, 1, &[ComplexMatrix::identity(2).scale(c(1.0, 1.0)), ComplexMatrix::from_real_diag(&[2.0, 2.0])]).unwrap();
        assert!((field_alpha(&f).radians() - PI / 4.0).abs() < 1e-12);
        let f = CoefficientField::constant(&hmat()).unwrap();
        assert_eq!(field_alpha(&f).radians(), 0.0);
    }

    #[test]
    fn eta_examples() {
        let f = CoefficientField::constant(&hmat()).unwrap();
        let (eta, q) = eta_and_q(&f).unwrap();
        assert!((eta - 1.0).abs() < 1e-12);
        assert!((q.value() - (4.0 + 2.0 * 2f64.sqrt())).abs() < 1e-10);
        let f = CoefficientField::constant(&ComplexMatrix::identity(2)).unwrap();
        let (eta, q) = eta_and_q(&f).unwrap();
        assert_eq!(eta, 0.0);
        assert!(q.is_infinite());
        let second = &ComplexMatrix::from_real_diag(&[4.0, 4.0])
            + &ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(0.0, 0.0)]]).unwrap();
        let f = CoefficientField::new(1, 2, &[hmat(), second]).unwrap();
        let (eta, _) = eta_and_q(&f).unwrap();
        assert!((eta - 1.0).abs() < 1e-12);
        let (eta_b, q_b) = eta_and_q_uniform(&f).unwrap();
        assert!(eta_b >= eta);
        assert!(q_b.value() <= eta_and_q(&f).unwrap().1.value());
    }

    #[test]
    fn delta_p_examples() {
        let mu = hmat();
        assert!((delta_p(&mu, pe(2.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((delta_p(&ComplexMatrix::identity(2), pe(4.0)).unwrap() - 0.5).abs() < 1e-14);
        for p in [1.5f64, 3.0, 10.0] {
            let want = 2.0 / p.max(p / (p - 1.0));
            assert!((delta_p(&ComplexMatrix::identity(3), pe(p)).unwrap() - want).abs() < 1e-14);
        }
        let q = psi_inverse(1.0).unwrap().value();
        assert!(delta_p(&mu, pe(q)).unwrap() >= -1e-9);
    }

    #[test]
    fn lower_bound_examples() {
        let f = CoefficientField::constant(&hmat()).unwrap();
        assert!((delta_p_lower_bound(&f, pe(2.0)).unwrap() - 0.5).abs() < 1e-12);
        let b = delta_p_lower_bound(&f, pe(4.0)).unwrap();
        assert!((b - (3f64.sqrt() - 1.0) / 4.0).abs() < 1e-10);
        assert!(delta_p(&hmat(), pe(4.0)).unwrap() >= b - 1e-9);
        assert!(matches!(delta_p_lower_bound(&f, pe(8.0)), Err(FieldError::OutOfRange { .. })));
        let real = CoefficientField::constant(&ComplexMatrix::from_real_diag(&[2.0, 3.0])).unwrap();
        assert!((delta_p_lower_bound(&real, pe(5.0)).unwrap() - 2.0 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn p_range_angle_examples() {
        let scalar = ComplexMatrix::identity(1);
        assert!((p_range_angle(&scalar, pe(4.0)).unwrap().radians() - PI / 6.0).abs() < 1e-12);
        assert!((p_range_angle(&ComplexMatrix::identity(2), pe(4.0)).unwrap().radians() - PI / 6.0).abs() < 1e-12);
        let mu = hmat();
        let w2 = p_range_angle(&mu, pe(2.0)).unwrap().radians();
        assert!((w2 - optimal_angle(&mu).unwrap().radians()).abs() < 1e-12);
        // a matrix that is not 8-elliptic
        let q = psi_inverse(1.0).unwrap().value();
        let beyond = pe(q + 3.0);
        let strongly = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 2.0)], vec![c(0.0, -2.0), c(1.0, 0.0)]]);
        let strongly = &strongly.unwrap() + &ComplexMatrix::from_real_diag(&[1.5, 1.5]);
        if delta_p(&strongly, beyond).unwrap() <= 0.0 {
            assert!(matches!(p_range_angle(&strongly, beyond), Err(FieldError::NotPElliptic { .. })));
        }
    }

    #[test]
    fn alpha_real_examples() {
        let zero = SectorAngle::new(0.0, AngleRole::Optimal).unwrap();
        let a4 = alpha_p_real(zero, pe(4.0), LpAngleReading::Tangent).unwrap();
        assert!((a4.radians() - PI / 6.0).abs() < 1e-14);
        let w = SectorAngle::new(0.4, AngleRole::Optimal).unwrap();
        assert!((alpha_p_real(w, pe(2.0), LpAngleReading::Tangent).unwrap().radians() - 0.4).abs() < 1e-14);
        let lit = alpha_p_real(w, pe(2.0), LpAngleReading::Literal).unwrap().radians();
        assert!((lit.tan() - 0.4).abs() < 1e-14);
        assert!(alpha_p_real(zero, pe(1e8), LpAngleReading::Tangent).unwrap().radians() > PI / 2.0 - 1e-3);
    }

    #[test]
    fn alpha_complex_examples() {
        let f = CoefficientField::constant(&hmat()).unwrap();
        let a4 = alpha_p_complex(&f, pe(4.0)).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((a4.tan() - (2.0 * s) / (1.0 - s)).abs() < 1e-10);
        assert!(p_range_angle(&hmat(), pe(4.0)).unwrap().radians() <= a4.radians() + 1e-8);
        let g = CoefficientField::constant(&ComplexMatrix::identity(2).scale(c(1.0, 1.0))).unwrap();
        assert!((alpha_p_complex(&g, pe(2.0)).unwrap().radians() - PI / 4.0).abs() < 1e-12);
        let two = CoefficientField::new(2, 1, &[ComplexMatrix::identity(2), hmat()]).unwrap();
        let a3 = alpha_p_complex(&two, pe(3.0)).unwrap();
        let u3 = alpha_p_uniform(&two, pe(3.0)).unwrap();
        assert!(a3.radians() <= u3.radians() + 1e-9);
        let u4 = alpha_p_uniform(&f, pe(4.0)).unwrap();
        assert!((u4.radians() - a4.radians()).abs() < 1e-12);
    }

    #[test]
    fn hinf_examples() {
        let w = SectorAngle::new(0.3, AngleRole::Optimal).unwrap();
        assert_eq!(hinf_angle_bound(w, pe(2.0)).unwrap().radians(), 0.3);
        let zero = SectorAngle::new(0.0, AngleRole::Optimal).unwrap();
        assert!((hinf_angle_bound(zero, pe(4.0)).unwrap().radians() - PI / 4.0).abs() < 1e-15);
        assert!(hinf_angle_bound(w, pe(1.0001)).unwrap().radians() < PI / 2.0);
    }

    #[test]
    fn real_fields_are_p_elliptic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let d = rng.gen_range(1..4);
            let g = ComplexMatrix::from_fn(d, |_, _| c(rng.gen_range(-1.0..1.0), 0.0));
            let m = eigvalsh(&g.hermitian_part()).unwrap()[0];
            let mu = g.shift(c(-m + 0.2, 0.0));
            for p in [1.1, 2.0, 10.0, 100.0] {
                assert!(delta_p(&mu, pe(p)).unwrap() > 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn delta_is_conjugation_symmetric(seed in 0u64..10_000, d in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = random_coercive(&mut rng, d);
            for p in [2.5, 3.0, 5.0] {
                let a = delta_p(&mu, pe(p)).unwrap();
                let b = delta_p(&mu, pe(p / (p - 1.0))).unwrap();
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn convex_combination_identity(seed in 0u64..10_000, d in 1usize..4, p in 1.05f64..20.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = random_coercive(&mut rng, d);
            let xi: Vec<Complex64> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let p = pe(p);
            let pc = pe(p.conj());
            let lhs = mu.quad_form(&xi);
            let rhs = (p_form_value(&mu, &xi, p) + p_form_value(&mu, &xi, pc)) * 0.5;
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
        }

        #[test]
        fn p_angle_dominates_two_angle(seed in 0u64..10_000, d in 1usize..4, p in 1.2f64..6.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = random_coercive(&mut rng, d);
            let p = pe(p);
            if let Ok(wp) = p_range_angle(&mu, p) {
                prop_assert!(optimal_angle(&mu).unwrap().radians() <= wp.radians() + 1e-9);
            }
        }

        #[test]
        fn window_gives_p_ellipticity(seed in 0u64..10_000, d in 1usize..4, frac in 0.0f64..0.999) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = CoefficientField::new(2, 1, &[random_coercive(&mut rng, d), random_coercive(&mut rng, d)]).unwrap();
            let (_, q) = eta_and_q(&f).unwrap();
            // p with |1/2 − 1/p| = frac·|1/2 − 1/q|
            let gap = frac * q.gap();
            let p = pe(1.0 / (0.5 - gap));
            prop_assert!(delta_p_field(&f, p).unwrap() > 0.0);
            let bound = delta_p_lower_bound(&f, p).unwrap();
            prop_assert!(delta_p_field(&f, p).unwrap() >= bound - 1e-9);
            let a = alpha_p_complex(&f, p).unwrap();
            for cell in f.cells() {
                prop_assert!(p_range_angle(&cell.mu, p).unwrap().radians() <= a.radians() + 1e-8);
            }
        }
    }
}
