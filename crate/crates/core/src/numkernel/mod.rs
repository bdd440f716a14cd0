//! Dense complex numerics consumed by every other module: Hermitian and general
//! eigenvalues, LU and Cholesky solves, spectral norm and the matrix exponential.
//!
//! Everything is a pure function of immutable inputs.

mod eig;
mod eigh;
mod expm;
mod lu;
mod matrix;

use thiserror::Error;

pub use eig::{eig_general, eig_general_with, min_singular_value};
pub use eigh::{eig_hermitian, eig_hermitian_with, eigvalsh, HermitianEigen};
pub use expm::{expm, expm_with};
pub use lu::{
    cholesky, inverse, solve, solve_lower, solve_lower_adjoint, solve_matrix, solve_matrix_with,
    solve_with, Lu,
};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;

/// Tolerances and iteration caps shared by the numerical kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative Hermitian defect accepted by `eig_hermitian`.
    pub hermitian: f64,
    /// Acceptable deviation of computed eigenvectors from unitarity.
    pub unitarity: f64,
    /// Pivots below `pivot * ‖A‖∞` are treated as singular.
    pub pivot: f64,
    /// `expm` refuses inputs whose 1-norm exceeds this cap.
    pub expm_norm_cap: f64,
    /// Relative residual certifying a computed eigenvalue in `eig_general`.
    pub eig_residual: f64,
    pub max_jacobi_sweeps: usize,
    pub max_qr_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            unitarity: 1e-10,
            pivot: 1e-14,
            expm_norm_cap: 1e4,
            eig_residual: 1e-8,
            max_jacobi_sweeps: 100,
            max_qr_iterations: 60,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("matrix is not Hermitian (max |H - H*| = {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("{routine} did not converge within {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },
    #[error("matrix is singular to working precision (pivot {pivot:.3e} below {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },
    #[error("matrix is not positive definite (failed at column {column})")]
    NotPositiveDefinite { column: usize },
    #[error("matrix norm {norm:.3e} exceeds the exponential cap {cap:.3e}")]
    Overflow { norm: f64, cap: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is empty")]
    Empty,
}

/// Spectral norm `sqrt(λ_max(A*A))`.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    if n == 1 {
        return a[(0, 0)].norm();
    }
    let ata = &a.adjoint() * a;
    // A*A is Hermitian by construction; symmetrize to kill rounding asymmetry.
    match eigvalsh(&ata.hermitian_part()) {
        Ok(vals) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => a.norm_fro(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn spectral_norm_examples() {
        assert_relative_eq!(spectral_norm(&ComplexMatrix::identity(3)), 1.0, epsilon = 1e-12);
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_relative_eq!(spectral_norm(&nil), 1.0, epsilon = 1e-12);
        let d = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(10.0, 1.0)]);
        assert_relative_eq!(spectral_norm(&d), 101f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 5, 9] {
            let a = random_matrix(&mut rng, n);
            let ata = &a.adjoint() * &a;
            let mut x: Vec<Complex64> = (0..n).map(|i| c(1.0 + i as f64, 0.5)).collect();
            let mut lambda = 0.0;
            for _ in 0..2000 {
                let y = ata.matvec(&x);
                lambda = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                x = y.iter().map(|z| z / lambda).collect();
            }
            assert_relative_eq!(spectral_norm(&a), lambda.sqrt(), max_relative = 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn spectral_norm_is_submultiplicative(seed in 0u64..10_000, n in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, n);
            let b = random_matrix(&mut rng, n);
            let ab = &a * &b;
            prop_assert!(spectral_norm(&ab) <= spectral_norm(&a) * spectral_norm(&b) + 1e-10);
        }

        #[test]
        fn expm_of_commuting_sum_factorizes(seed in 0u64..10_000, n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let da: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let db: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let a = ComplexMatrix::from_diag(&da);
            let b = ComplexMatrix::from_diag(&db);
            let lhs = expm(&(&a + &b)).unwrap();
            let rhs = &expm(&a).unwrap() * &expm(&b).unwrap();
            let scale = spectral_norm(&lhs).max(1.0);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * scale);
        }
    }
}
