//! Numerical range geometry of a single matrix.
//!
//! N(L) is never stored as a point cloud for angle purposes. The optimal angle
//! is the pair angle of the Hermitian parts: with ReOp L = C C*, N(L) ⊆ Σ_θ iff
//! ρ(C⁻¹ ImOp L C⁻*) ≤ tan θ. Sampled boundaries are for plotting and checks.

mod sector;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::numkernel::{
    cholesky, eig_hermitian, eigvalsh, min_singular_value, solve_lower, spectral_norm,
    ComplexMatrix, NumError,
};

pub use sector::{sector_distance, AngleRole, SectorAngle};

/// Default number of support directions for sampled boundaries.
pub const DEFAULT_DIRECTIONS: usize = 720;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RangeError {
    #[error("form is not coercive (m = {m:.6e})")]
    NotCoercive { m: f64 },
    #[error("numerical range leaves the closed right half-plane (witness {witness})")]
    NotSectorialValued { witness: Complex64 },
    #[error("at least 8 support directions are required, got {n_dirs}")]
    TooFewDirections { n_dirs: usize },
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// `L = re_part + i·im_part` with both parts Hermitian.
#[derive(Clone, Debug)]
pub struct HermitianParts {
    pub re_part: ComplexMatrix,
    pub im_part: ComplexMatrix,
}

impl HermitianParts {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.re_part + &self.im_part.scale(Complex64::new(0.0, 1.0))
    }

    /// `cos φ · Re + sin φ · Im`, the Hermitian part of `e^{−iφ} L`.
    pub fn rotated(&self, phi: f64) -> ComplexMatrix {
        &self.re_part.scale_real(phi.cos()) + &self.im_part.scale_real(phi.sin())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoercivityData {
    pub m: f64,
    pub numerical_radius_im: f64,
    pub numerical_radius: f64,
}

#[derive(Clone, Debug)]
pub struct RangeBoundary {
    pub directions: Vec<f64>,
    pub support_values: Vec<f64>,
    pub boundary_points: Vec<Complex64>,
}

impl RangeBoundary {
    /// Whether `z` satisfies every sampled supporting half-plane.
    pub fn outer_contains(&self, z: Complex64, tol: f64) -> bool {
        self.directions
            .iter()
            .zip(&self.support_values)
            .all(|(&phi, &h)| (Complex64::from_polar(1.0, -phi) * z).re <= h + tol)
    }
}

/// Rectangle `[m, n(ReOp)] × [−n(ImOp), n(ImOp)]` intersected with the disk of radius n(L).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfMoon {
    pub re_min: f64,
    pub re_max: f64,
    pub im_bound: f64,
    pub radius: f64,
}

impl HalfMoon {
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        z.re >= self.re_min - tol
            && z.re <= self.re_max + tol
            && z.im.abs() <= self.im_bound + tol
            && z.norm() <= self.radius + tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharpnessReport {
    /// An eigenvalue sits at `m ± i·n(ImOp L)`, so the coercivity estimate is attained.
    pub is_sharp_candidate: bool,
    pub witness: Option<Complex64>,
}

pub fn operator_parts(l: &ComplexMatrix) -> HermitianParts {
    HermitianParts {
        re_part: l.hermitian_part(),
        im_part: l.skew_part_over_i(),
    }
}

/// `m = λ_min(ReOp L)`; may be nonpositive.
pub fn coercivity_constant(l: &ComplexMatrix) -> Result<f64, RangeError> {
    Ok(eigvalsh(&l.hermitian_part())?[0])
}

fn hermitian_radius(h: &ComplexMatrix) -> Result<f64, RangeError> {
    let v = eigvalsh(h)?;
    Ok(v[0].abs().max(v[v.len() - 1].abs()))
}

fn top_eigenvalue(h: &ComplexMatrix) -> Result<f64, RangeError> {
    let v = eigvalsh(h)?;
    Ok(v[v.len() - 1])
}

/// Numerical radius `max_φ λ_max(cos φ·Re + sin φ·Im)`, sampled then refined.
pub fn numerical_radius(l: &ComplexMatrix) -> Result<f64, RangeError> {
    numerical_radius_of(&operator_parts(l))
}

fn numerical_radius_of(parts: &HermitianParts) -> Result<f64, RangeError> {
    let samples = 64;
    let step = 2.0 * PI / samples as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..samples {
        let phi = k as f64 * step;
        let h = top_eigenvalue(&parts.rotated(phi))?;
        if h > best.1 {
            best = (phi, h);
        }
    }
    let support = |phi: f64| top_eigenvalue(&parts.rotated(phi));
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = support(x1)?;
    let mut f2 = support(x2)?;
    for _ in 0..60 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = support(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = support(x1)?;
        }
    }
    Ok(best.1.max(f1).max(f2).max(0.0))
}

pub fn coercivity_data(l: &ComplexMatrix) -> Result<CoercivityData, RangeError> {
    let parts = operator_parts(l);
    Ok(CoercivityData {
        m: eigvalsh(&parts.re_part)?[0],
        numerical_radius_im: hermitian_radius(&parts.im_part)?,
        numerical_radius: numerical_radius_of(&parts)?,
    })
}

/// Support-function sampling of ∂N(L) at `n_dirs` equispaced directions.
pub fn range_boundary(l: &ComplexMatrix, n_dirs: usize) -> Result<RangeBoundary, RangeError> {
    if n_dirs < 8 {
        return Err(RangeError::TooFewDirections { n_dirs });
    }
    let parts = operator_parts(l);
    let mut out = RangeBoundary {
        directions: Vec::with_capacity(n_dirs),
        support_values: Vec::with_capacity(n_dirs),
        boundary_points: Vec::with_capacity(n_dirs),
    };
    for k in 0..n_dirs {
        let phi = 2.0 * PI * k as f64 / n_dirs as f64;
        let (h, z) = support_point(l, &parts, phi)?;
        out.directions.push(phi);
        out.support_values.push(h);
        out.boundary_points.push(z);
    }
    Ok(out)
}

/// Support value in direction `phi` and the touching point `v* L v`.
pub fn support_point(
    l: &ComplexMatrix,
    parts: &HermitianParts,
    phi: f64,
) -> Result<(f64, Complex64), RangeError> {
    let eig = eig_hermitian(&parts.rotated(phi))?;
    let top = eig.values.len() - 1;
    let v = eig.vector(top);
    Ok((eig.values[top], l.quad_form(&v)))
}

/// Smallest θ with `{x*(H_re + i H_im)x}` ⊆ Σ_θ for Hermitian `h_re`, `h_im`.
pub fn pair_angle(h_re: &ComplexMatrix, h_im: &ComplexMatrix) -> Result<f64, RangeError> {
    let n = h_re.dim();
    let scale = h_re.max_abs().max(h_im.max_abs()).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale * n as f64;
    if h_im.max_abs() <= tol {
        let m = eigvalsh(h_re)?[0];
        if m < -tol {
            return Err(RangeError::NotSectorialValued {
                witness: Complex64::new(m, 0.0),
            });
        }
        return Ok(0.0);
    }
    let m = eigvalsh(h_re)?[0];
    if m > tol {
        if let Ok(c) = cholesky(h_re) {
            let y = solve_lower(&c, h_im);
            let x = solve_lower(&c, &y.adjoint());
            if x.is_finite() {
                return Ok(hermitian_radius(&x.hermitian_part())?.atan());
            }
        }
    }
    let re_eig = eig_hermitian(h_re)?;
    let point_of = |v: &[Complex64]| Complex64::new(h_re.quad_form(v).re, h_im.quad_form(v).re);
    if re_eig.values[0] < -tol {
        return Err(RangeError::NotSectorialValued {
            witness: point_of(&re_eig.vector(0)),
        });
    }
    degenerate_pair_angle(h_re, h_im, &re_eig, tol, point_of)
}

fn degenerate_pair_angle(
    h_re: &ComplexMatrix,
    h_im: &ComplexMatrix,
    re_eig: &crate::numkernel::HermitianEigen,
    tol: f64,
    point_of: impl Fn(&[Complex64]) -> Complex64,
) -> Result<f64, RangeError> {
    let kernel: Vec<Vec<Complex64>> = (0..re_eig.values.len())
        .filter(|&k| re_eig.values[k] <= tol)
        .map(|k| re_eig.vector(k))
        .collect();
    if !kernel.is_empty() {
        let compressed = h_im.compress(&kernel).hermitian_part();
        let ke = eig_hermitian(&compressed)?;
        let last = ke.values.len() - 1;
        let idx = if ke.values[0].abs() > ke.values[last].abs() { 0 } else { last };
        if ke.values[idx].abs() > tol {
            let coeffs = ke.vector(idx);
            let n = h_re.dim();
            let v: Vec<Complex64> = (0..n)
                .map(|i| kernel.iter().zip(&coeffs).map(|(b, c)| b[i] * c).sum())
                .collect();
            return Err(RangeError::NotSectorialValued { witness: point_of(&v) });
        }
    }
    // With no kernel/kernel block, Im grows linearly along kernel-to-range
    // couplings while Re grows quadratically, forcing the right angle.
    let range_basis: Vec<Vec<Complex64>> = (0..re_eig.values.len())
        .filter(|&k| re_eig.values[k] > tol)
        .map(|k| re_eig.vector(k))
        .collect();
    if range_basis.is_empty() {
        return Ok(0.0);
    }
    if !kernel.is_empty() {
        let coupling = kernel
            .iter()
            .flat_map(|k| {
                let hk = h_im.matvec(k);
                range_basis
                    .iter()
                    .map(move |r| r.iter().zip(&hk).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        if coupling > tol {
            return Ok(FRAC_PI_2);
        }
    }
    let re_r = h_re.compress(&range_basis).hermitian_part();
    let im_r = h_im.compress(&range_basis).hermitian_part();
    let c = cholesky(&re_r)?;
    let y = solve_lower(&c, &im_r);
    let x = solve_lower(&c, &y.adjoint());
    Ok(hermitian_radius(&x.hermitian_part())?.atan())
}

/// Unit vector `x` maximizing `|arg(x* L x)|` for coercive `L`.
pub fn extremal_vector(l: &ComplexMatrix) -> Result<Vec<Complex64>, RangeError> {
    let parts = operator_parts(l);
    let c = cholesky(&parts.re_part).map_err(|_| RangeError::NotCoercive {
        m: eigvalsh(&parts.re_part).map(|v| v[0]).unwrap_or(f64::NAN),
    })?;
    let y = solve_lower(&c, &parts.im_part);
    let x = solve_lower(&c, &y.adjoint()).hermitian_part();
    let eig = eig_hermitian(&x)?;
    let last = eig.values.len() - 1;
    let k = if eig.values[0].abs() > eig.values[last].abs() { 0 } else { last };
    // x = C^{-*} w
    let w = eig.vector(k);
    let n = w.len();
    let mut v = w;
    for i in (0..n).rev() {
        let mut s = v[i];
        for j in i + 1..n {
            s -= c[(j, i)].conj() * v[j];
        }
        v[i] = s / c[(i, i)].conj();
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(v.into_iter().map(|z| z / norm).collect())
}

/// Optimal sector angle ω(L), exact up to the Hermitian eigensolver.
pub fn optimal_angle(l: &ComplexMatrix) -> Result<SectorAngle, RangeError> {
    let parts = operator_parts(l);
    let theta = pair_angle(&parts.re_part, &parts.im_part)?;
    Ok(SectorAngle::from_computed(theta, AngleRole::Optimal))
}

/// Coercivity estimate: `tan α = n(ImOp L)/m`.
pub fn angle_estimate_lemma(l: &ComplexMatrix) -> Result<SectorAngle, RangeError> {
    let parts = operator_parts(l);
    let m = eigvalsh(&parts.re_part)?[0];
    if m <= 0.0 {
        return Err(RangeError::NotCoercive { m });
    }
    let nim = hermitian_radius(&parts.im_part)?;
    Ok(SectorAngle::from_tan(nim / m, AngleRole::Estimate))
}

/// Norm comparison angle: `tan ᾱ = √(‖L‖²/m² − 1)`.
pub fn angle_estimate_norm(l: &ComplexMatrix) -> Result<SectorAngle, RangeError> {
    let m = coercivity_constant(l)?;
    if m <= 0.0 {
        return Err(RangeError::NotCoercive { m });
    }
    let norm = spectral_norm(l);
    let ratio = (norm / m).powi(2) - 1.0;
    Ok(SectorAngle::from_tan(ratio.max(0.0).sqrt(), AngleRole::Comparison))
}

pub fn halfmoon_region(l: &ComplexMatrix) -> Result<HalfMoon, RangeError> {
    let parts = operator_parts(l);
    let re_vals = eigvalsh(&parts.re_part)?;
    let m = re_vals[0];
    if m <= 0.0 {
        return Err(RangeError::NotCoercive { m });
    }
    Ok(HalfMoon {
        re_min: m,
        re_max: re_vals[re_vals.len() - 1],
        im_bound: hermitian_radius(&parts.im_part)?,
        radius: numerical_radius_of(&parts)?,
    })
}

/// Checks whether `m ± i·n(ImOp L)` is an eigenvalue. Only the sufficient
/// direction is certified; a negative answer is inconclusive.
pub fn sharpness_check(l: &ComplexMatrix) -> Result<SharpnessReport, RangeError> {
    let parts = operator_parts(l);
    let m = eigvalsh(&parts.re_part)?[0];
    if m <= 0.0 {
        return Err(RangeError::NotCoercive { m });
    }
    let nim = hermitian_radius(&parts.im_part)?;
    let scale = spectral_norm(l).max(1.0);
    for z in [Complex64::new(m, nim), Complex64::new(m, -nim)] {
        if min_singular_value(&l.shift(-z)) <= 1e-8 * scale {
            return Ok(SharpnessReport {
                is_sharp_candidate: true,
                witness: Some(z),
            });
        }
    }
    Ok(SharpnessReport {
        is_sharp_candidate: false,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag_example() -> ComplexMatrix {
        ComplexMatrix::from_diag(&[c(1.0, 0.0), c(10.0, 1.0)])
    }

    fn random_coercive(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let re = g.hermitian_part();
        let shift = -eigvalsh(&re).unwrap()[0] + rng.gen_range(0.05..1.0);
        g.shift(c(shift, 0.0))
    }

    #[test]
    fn parts_of_examples() {
        let p = operator_parts(&diag_example());
        assert!(p.re_part.max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 10.0])) < 1e-15);
        assert!(p.im_part.max_abs_diff(&ComplexMatrix::from_real_diag(&[0.0, 1.0])) < 1e-15);
        let a = 0.7;
        let l = ComplexMatrix::from_real_rows(&[&[1.0, -a], &[a, 1.0]]).unwrap();
        let p = operator_parts(&l);
        assert!(p.re_part.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        let want = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, a)], vec![c(0.0, -a), c(0.0, 0.0)]]).unwrap();
        assert!(p.im_part.max_abs_diff(&want) < 1e-15);
        assert!(p.reconstruct().max_abs_diff(&l) < 1e-15);
    }

    #[test]
    fn coercivity_examples() {
        assert!((coercivity_constant(&ComplexMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert!((coercivity_constant(&diag_example()).unwrap() - 1.0).abs() < 1e-14);
        let h = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]).unwrap();
        assert!((coercivity_constant(&h).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_example_angles() {
        let l = diag_example();
        assert!((optimal_angle(&l).unwrap().radians() - 0.1f64.atan()).abs() < 1e-12);
        assert!((angle_estimate_lemma(&l).unwrap().radians() - PI / 4.0).abs() < 1e-12);
        assert!((angle_estimate_norm(&l).unwrap().radians() - 10f64.atan()).abs() < 1e-10);
    }

    #[test]
    fn scalar_multiple_of_identity() {
        let l = ComplexMatrix::identity(3).scale(c(1.0, 1.0));
        assert!((optimal_angle(&l).unwrap().radians() - PI / 4.0).abs() < 1e-12);
        assert!((angle_estimate_norm(&l).unwrap().radians() - PI / 4.0).abs() < 1e-10);
        assert!((angle_estimate_lemma(&l).unwrap().radians() - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_block_estimate_angle() {
        let a = -0.6;
        let l = ComplexMatrix::from_real_rows(&[&[1.0, -a], &[a, 1.0]]).unwrap();
        assert!((angle_estimate_lemma(&l).unwrap().radians() - a.abs().atan()).abs() < 1e-12);
    }

    #[test]
    fn boundary_of_diagonal_example_is_segment() {
        let b = range_boundary(&diag_example(), 64).unwrap();
        for z in &b.boundary_points {
            // points on the segment from 1 to 10+i satisfy Im = (Re − 1)/9
            assert!((z.im - (z.re - 1.0) / 9.0).abs() < 1e-10, "{z}");
            assert!(z.re >= 1.0 - 1e-12 && z.re <= 10.0 + 1e-12);
        }
    }

    #[test]
    fn boundary_of_hermitian_is_real_segment() {
        let h = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let ev = eigvalsh(&h).unwrap();
        for z in range_boundary(&h, 16).unwrap().boundary_points {
            assert!(z.im.abs() < 1e-12);
            assert!(z.re >= ev[0] - 1e-12 && z.re <= ev[1] + 1e-12);
        }
    }

    #[test]
    fn boundary_of_jordan_block_is_disk() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let b = range_boundary(&j, 90).unwrap();
        for z in &b.boundary_points {
            assert!((z.norm() - 0.5).abs() < 1e-12);
        }
        // quadratic forms over random unit vectors stay inside the outer approximation
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let mut v = [c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)); 2];
            v[1] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let v: Vec<Complex64> = v.iter().map(|z| z / nv).collect();
            let z = j.quad_form(&v);
            assert!(z.norm() <= 0.5 + 1e-12);
            assert!(b.outer_contains(z, 1e-12));
        }
    }

    #[test]
    fn too_few_directions_rejected() {
        assert!(matches!(
            range_boundary(&ComplexMatrix::identity(2), 4),
            Err(RangeError::TooFewDirections { n_dirs: 4 })
        ));
    }

    #[test]
    fn not_sectorial_valued_detected() {
        let l = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.5)]);
        assert!(matches!(optimal_angle(&l), Err(RangeError::NotSectorialValued { .. })));
        let l = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 0.5)]);
        assert!(matches!(optimal_angle(&l), Err(RangeError::NotSectorialValued { .. })));
        let l = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(optimal_angle(&l), Err(RangeError::NotSectorialValued { .. })));
    }

    #[test]
    fn degenerate_but_sectorial() {
        // N = segment [0, 1 + 0.5i]
        let l = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(1.0, 0.5)]);
        assert!((optimal_angle(&l).unwrap().radians() - 0.5f64.atan()).abs() < 1e-12);
        let j = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!((optimal_angle(&j).unwrap().radians() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn extremal_vector_attains_optimal_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 3, 7] {
            let l = random_coercive(&mut rng, n);
            let v = extremal_vector(&l).unwrap();
            let z = l.quad_form(&v);
            assert!((z.arg().abs() - optimal_angle(&l).unwrap().radians()).abs() < 1e-10);
        }
    }

    #[test]
    fn sharpness_examples() {
        let l = ComplexMatrix::from_diag(&[c(2.0, 0.0), c(1.0, 1.0)]);
        let r = sharpness_check(&l).unwrap();
        assert!(r.is_sharp_candidate);
        assert!((r.witness.unwrap() - c(1.0, 1.0)).norm() < 1e-12);
        assert!(!sharpness_check(&diag_example()).unwrap().is_sharp_candidate);
        let h = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        assert!(sharpness_check(&h).unwrap().is_sharp_candidate);
    }

    #[test]
    fn halfmoon_examples() {
        let hm = halfmoon_region(&diag_example()).unwrap();
        assert!((hm.re_min - 1.0).abs() < 1e-14 && (hm.re_max - 10.0).abs() < 1e-12);
        assert!((hm.im_bound - 1.0).abs() < 1e-12);
        assert!((hm.radius - 101f64.sqrt()).abs() < 1e-9);
        let hm = halfmoon_region(&ComplexMatrix::identity(2)).unwrap();
        assert!((hm.radius - 1.0).abs() < 1e-12 && hm.im_bound.abs() < 1e-15);
        let h = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]).unwrap();
        let hm = halfmoon_region(&h).unwrap();
        assert!((hm.re_min - 1.0).abs() < 1e-12 && (hm.re_max - 3.0).abs() < 1e-12);
        assert!(hm.im_bound < 1e-15);
    }

    #[test]
    fn numerical_radius_of_jordan_block() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((numerical_radius(&j).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn random_coercive_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = rng.gen_range(1..9);
            let l = random_coercive(&mut rng, n);
            let omega = optimal_angle(&l).unwrap().radians();
            let alpha = angle_estimate_lemma(&l).unwrap();
            let abar = angle_estimate_norm(&l).unwrap().radians();
            assert!(omega <= alpha.radians() + 1e-9);
            assert!(alpha.radians() <= abar + 1e-9);
            let b = range_boundary(&l, 72).unwrap();
            let hm = halfmoon_region(&l).unwrap();
            let max_arg = b.boundary_points.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
            assert!(max_arg <= omega + 1e-10);
            for z in &b.boundary_points {
                assert!(alpha.contains(*z, 1e-9));
                assert!(hm.contains(*z, 1e-9));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn scale_invariance(seed in 0u64..10_000, n in 1usize..7, s in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = random_coercive(&mut rng, n);
            let a = optimal_angle(&l).unwrap().radians();
            let b = optimal_angle(&l.scale_real(s)).unwrap().radians();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn compression_does_not_enlarge_angle(seed in 0u64..10_000, n in 2usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = random_coercive(&mut rng, n);
            let k = rng.gen_range(1..n);
            // orthonormal basis of a random k-dimensional subspace by Gram–Schmidt
            let mut basis: Vec<Vec<Complex64>> = Vec::new();
            while basis.len() < k {
                let mut v: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                for b in &basis {
                    let d: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) { *vi -= d * bi; }
                }
                let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if nv > 1e-6 { basis.push(v.iter().map(|z| z / nv).collect()); }
            }
            let sub = l.compress(&basis);
            prop_assert!(optimal_angle(&sub).unwrap().radians() <= optimal_angle(&l).unwrap().radians() + 1e-9);
        }

        #[test]
        fn hermitian_has_zero_angle(seed in 0u64..10_000, n in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = random_coercive(&mut rng, n).hermitian_part();
            prop_assert_eq!(optimal_angle(&l).unwrap().radians(), 0.0);
            prop_assert!(operator_parts(&l).im_part.max_abs() == 0.0);
        }
    }
}
