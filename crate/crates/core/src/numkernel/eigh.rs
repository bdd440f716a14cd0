use num_complex::Complex64;

use super::{ComplexMatrix, NumError, Tolerances};

/// Matrices up to this size are diagonalized by cyclic Jacobi; larger ones go
/// through Householder tridiagonalization and implicit QL.
const JACOBI_LIMIT: usize = 64;

/// Eigen-decomposition `H = V diag(λ) V*` with ascending eigenvalues and the
/// eigenvectors stored as columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut vl = self.vectors.clone();
        for i in 0..n {
            for j in 0..n {
                vl[(i, j)] *= self.values[j];
            }
        }
        &vl * &self.vectors.adjoint()
    }
}

pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen, NumError> {
    eig_hermitian_with(h, &Tolerances::default())
}

pub fn eig_hermitian_with(h: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen, NumError> {
    check_hermitian(h, tol)?;
    if h.dim() <= JACOBI_LIMIT {
        jacobi(h, tol)
    } else {
        let (mut d, mut e, q, phases) = tridiagonalize(h, true);
        let n = h.dim();
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        tql2(&mut d, &mut e, Some(&mut z))?;
        let q = q.expect("requested accumulation");
        // vectors = Q · diag(phases) · Z
        let mut qd = q;
        for i in 0..n {
            for j in 0..n {
                qd[(i, j)] *= phases[j];
            }
        }
        let zc = ComplexMatrix::from_fn(n, |i, j| Complex64::new(z[i * n + j], 0.0));
        Ok(HermitianEigen {
            values: d,
            vectors: &qd * &zc,
        })
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(h: &ComplexMatrix) -> Result<Vec<f64>, NumError> {
    let tol = Tolerances::default();
    check_hermitian(h, &tol)?;
    let n = h.dim();
    if n == 1 {
        return Ok(vec![h[(0, 0)].re]);
    }
    let (mut d, mut e, _, _) = tridiagonalize(h, false);
    tql2(&mut d, &mut e, None)?;
    Ok(d)
}

fn check_hermitian(h: &ComplexMatrix, tol: &Tolerances) -> Result<(), NumError> {
    if !h.is_finite() {
        return Err(NumError::NonFinite);
    }
    let defect = h.hermitian_defect();
    if defect > tol.hermitian * h.max_abs().max(1.0) {
        return Err(NumError::NotHermitian { defect });
    }
    Ok(())
}

fn jacobi(h: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen, NumError> {
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.norm_fro();
    if scale == 0.0 {
        return Ok(HermitianEigen {
            values: vec![0.0; n],
            vectors: v,
        });
    }
    let mut converged = false;
    for _ in 0..tol.max_jacobi_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 0.25 * f64::EPSILON * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-3 * f64::EPSILON * scale {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s], [-s·conj(e), c·conj(e)]] in the (p, q) plane.
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * jqp;
                    a[(k, q)] = akp * s + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * jqp.conj();
                    a[(q, k)] = apk * s + aqk * jqq.conj();
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * jqp;
                    v[(k, q)] = vkp * s + vkq * jqq;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }
    if !converged {
        return Err(NumError::NoConvergence {
            routine: "jacobi",
            iterations: tol.max_jacobi_sweeps,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Householder reduction `Q* H Q = T` followed by a diagonal phase change that
/// makes the off-diagonal of `T` real and nonnegative.
///
/// Returns `(d, e, Q, phases)` where `e[i]` is the (i, i-1) entry and `e[0] = 0`.
#[allow(clippy::type_complexity)]
fn tridiagonalize(
    h: &ComplexMatrix,
    accumulate: bool,
) -> (Vec<f64>, Vec<f64>, Option<ComplexMatrix>, Vec<Complex64>) {
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut q = if accumulate {
        Some(ComplexMatrix::identity(n))
    } else {
        None
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        for vi in v.iter_mut() {
            *vi = zero;
        }
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm = v[k + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in v[k + 1..].iter_mut() {
            *vi /= vnorm;
        }
        // p = A v on the trailing block, kappa = v* p, q = p - kappa v.
        for i in k..n {
            let mut s = zero;
            for j in k + 1..n {
                s += a[(i, j)] * v[j];
            }
            p[i] = s;
        }
        let kappa: f64 = (k + 1..n).map(|i| (v[i].conj() * p[i]).re).sum();
        for i in k..n {
            p[i] -= v[i] * kappa;
        }
        for i in k..n {
            for j in k..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                a[(i, j)] -= upd * 2.0;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }
        if let Some(qm) = q.as_mut() {
            for i in 0..n {
                let mut s = zero;
                for j in k + 1..n {
                    s += qm[(i, j)] * v[j];
                }
                for j in k + 1..n {
                    qm[(i, j)] -= s * v[j].conj() * 2.0;
                }
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let beta = a[(i + 1, i)];
        let mag = beta.norm();
        e[i + 1] = mag;
        phases[i + 1] = if mag == 0.0 {
            phases[i]
        } else {
            phases[i] * beta / mag
        };
    }
    (d, e, q, phases)
}

/// Implicit QL iteration for a real symmetric tridiagonal matrix (EISPACK tql2).
/// `z`, when present, is an n×n row-major matrix that accumulates the rotations.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<f64>>) -> Result<(), NumError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    let max_iter = 60 * n.max(10);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(NumError::NoConvergence {
                        routine: "tql2",
                        iterations: max_iter,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zk1 = z[k * n + i + 1];
                            let zk = z[k * n + i];
                            z[k * n + i + 1] = s * zk + c * zk1;
                            z[k * n + i] = c * zk - s * zk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // selection sort keeps the accumulated columns aligned
    for i in 0..n - 1 {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            if let Some(z) = z.as_deref_mut() {
                for r in 0..n {
                    z.swap(r * n + i, r * n + k);
                }
            }
        }
    }
    Ok(())
}
