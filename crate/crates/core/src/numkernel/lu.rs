#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use super::{ComplexMatrix, NumError, Tolerances};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    factors: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self, NumError> {
        Self::with_tolerances(a, &Tolerances::default())
    }

    pub fn with_tolerances(a: &ComplexMatrix, tol: &Tolerances) -> Result<Self, NumError> {
        if !a.is_finite() {
            return Err(NumError::NonFinite);
        }
        let n = a.dim();
        let threshold = tol.pivot * a.norm_inf();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pr, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= threshold || pmag == 0.0 {
                return Err(NumError::Singular {
                    pivot: pmag,
                    threshold,
                });
            }
            if pr != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pr, j)];
                    lu[(pr, j)] = tmp;
                }
                perm.swap(k, pr);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= factor * ukj;
                }
            }
        }
        Ok(Self { factors: lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.factors.dim()
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.factors[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.factors[(i, j)] * x[j];
            }
            x[i] = s / self.factors[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for j in 0..n {
            let col = self.solve_vec(&b.column(j));
            out.set_column(j, &col);
        }
        out
    }

    /// Solves `A* x = b`.
    pub fn solve_adjoint_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        // A* = U* L* P, so solve U* y = b, L* w = y, x = P^T w.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.factors[(j, i)].conj() * y[j];
            }
            y[i] = s / self.factors[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.factors[(j, i)].conj() * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}

pub fn solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>, NumError> {
    solve_with(a, b, &Tolerances::default())
}

pub fn solve_with(
    a: &ComplexMatrix,
    b: &[Complex64],
    tol: &Tolerances,
) -> Result<Vec<Complex64>, NumError> {
    if b.len() != a.dim() {
        return Err(NumError::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    Ok(Lu::with_tolerances(a, tol)?.solve_vec(b))
}

pub fn solve_matrix(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    solve_matrix_with(a, b, &Tolerances::default())
}

pub fn solve_matrix_with(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix, NumError> {
    if b.dim() != a.dim() {
        return Err(NumError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(Lu::with_tolerances(a, tol)?.solve_mat(b))
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    solve_matrix(a, &ComplexMatrix::identity(a.dim()))
}

/// Cholesky factor `L` (lower triangular, positive diagonal) with `H = L L*`.
pub fn cholesky(h: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    let n = h.dim();
    if !h.is_finite() {
        return Err(NumError::NonFinite);
    }
    let mut l = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mut diag = h[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(NumError::NotPositiveDefinite { column: j });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = h[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L X = B` for lower-triangular `L`, column by column.
pub fn solve_lower(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = l.dim();
    let mut x = b.clone();
    for col in 0..n {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Solves `L* X = B` for lower-triangular `L`.
pub fn solve_lower_adjoint(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = l.dim();
    let mut x = b.clone();
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)].conj();
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_solve_is_trivial() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 0.0)];
        let x = solve(&ComplexMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn scalar_solve() {
        let a = ComplexMatrix::from_real_diag(&[2.0]);
        let x = solve(&a, &[c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(x[0].re, 0.5);
    }

    #[test]
    fn back_substitution_example() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let x = solve(&a, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((x[0] - c(0.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(solve(&a, &[c(1.0, 0.0), c(0.0, 0.0)]), Err(NumError::Singular { .. })));
    }

    #[test]
    fn residual_bound_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 4, 12, 30] {
            let a = ComplexMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let b: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), 0.3)).collect();
            let x = solve(&a, &b).unwrap();
            let r: f64 = a
                .matvec(&x)
                .iter()
                .zip(&b)
                .map(|(p, q)| (p - q).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let xn: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(r <= 1e-10 * super::super::spectral_norm(&a) * xn);
            let lu = Lu::new(&a).unwrap();
            let y = lu.solve_adjoint_vec(&b);
            let r2 = a.adjoint().matvec(&y);
            for (p, q) in r2.iter().zip(&b) {
                assert!((p - q).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn cholesky_reconstructs_and_triangular_solves_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 6;
        let g = ComplexMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = (&(&g * &g.adjoint()) + &ComplexMatrix::identity(n)).hermitian_part();
        let l = cholesky(&h).unwrap();
        assert!((&l * &l.adjoint()).max_abs_diff(&h) < 1e-12);
        let x = solve_lower(&l, &h);
        assert!((&l * &x).max_abs_diff(&h) < 1e-11);
        let y = solve_lower_adjoint(&l, &h);
        assert!((&l.adjoint() * &y).max_abs_diff(&h) < 1e-11);
        let bad = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        assert!(matches!(cholesky(&bad), Err(NumError::NotPositiveDefinite { column: 1 })));
    }
}
