use num_complex::Complex64;

use super::{spectral_norm, ComplexMatrix, NumError, Tolerances};

/// Eigenvalues of a general complex matrix, each certified by a small singular
/// value of `A - λI`.
pub fn eig_general(a: &ComplexMatrix) -> Result<Vec<Complex64>, NumError> {
    eig_general_with(a, &Tolerances::default())
}

pub fn eig_general_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<Complex64>, NumError> {
    if !a.is_finite() {
        return Err(NumError::NonFinite);
    }
    let n = a.dim();
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let mut h = hessenberg(a);
    let eigs = hessenberg_qr(&mut h, tol)?;
    let scale = spectral_norm(a);
    if scale > 0.0 {
        for &lambda in &eigs {
            let smin = min_singular_value(&a.shift(-lambda));
            if smin > tol.eig_residual * scale {
                return Err(NumError::NoConvergence {
                    routine: "eig_general (residual check)",
                    iterations: 0,
                });
            }
        }
    }
    Ok(eigs)
}

fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let mut h = a.clone();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let tail = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (tail + h[(k + 1, k)].norm_sqr()).sqrt();
        let x0 = h[(k + 1, k)];
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
            v[i] = h[(i, k)];
        }
        let vnorm = v[k + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in v[k + 1..].iter_mut() {
            *vi /= vnorm;
        }
        // H <- (I - 2vv*) H
        for j in 0..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * h[(i, j)]).sum();
            for i in k + 1..n {
                h[(i, j)] -= v[i] * s * 2.0;
            }
        }
        // H <- H (I - 2vv*)
        for i in 0..n {
            let s: Complex64 = (k + 1..n).map(|j| h[(i, j)] * v[j]).sum();
            for j in k + 1..n {
                h[(i, j)] -= s * v[j].conj() * 2.0;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = zero;
        }
    }
    h
}

/// Givens rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn hessenberg_qr(h: &mut ComplexMatrix, tol: &Tolerances) -> Result<Vec<Complex64>, NumError> {
    let n = h.dim();
    let norm = h.max_abs().max(f64::MIN_POSITIVE);
    let mut eigs = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let cap = tol.max_qr_iterations * n;
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            eigs[0] = h[(0, 0)];
            break;
        }
        // locate the start of the unreduced block ending at hi
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let reference = if diag == 0.0 { norm } else { diag };
            if sub <= f64::EPSILON * reference {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigs[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > cap {
            return Err(NumError::NoConvergence {
                routine: "hessenberg_qr",
                iterations: total,
            });
        }
        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let c = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let mu = if iter % 11 == 10 {
            // exceptional shift breaks symmetric stalls
            d + Complex64::new(1.5 * c.norm(), 0.7 * c.norm())
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        rots.clear();
        for k in lo..hi {
            let (cr, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rots.push((cr, s));
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * cr + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * cr;
            }
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (cr, s) = rots[idx];
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * cr + y * s.conj();
                h[(i, k + 1)] = -x * s + y * cr;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(eigs)
}

/// Smallest singular value by inverse iteration on `A*A` through an LU of `A`.
/// Exactly zero pivots are nudged, so singular input returns a tiny value
/// instead of failing.
pub fn min_singular_value(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let floor = f64::EPSILON * f64::EPSILON * scale;
    for k in 0..n {
        let pr = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
            .unwrap_or(k);
        if pr != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(pr, j)];
                lu[(pr, j)] = t;
            }
            perm.swap(k, pr);
        }
        if lu[(k, k)].norm() < floor {
            lu[(k, k)] = Complex64::new(floor, 0.0);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    let solve = |b: &[Complex64]| -> Vec<Complex64> {
        let mut x: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = lu[(i, j)] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = lu[(i, j)] * x[j];
                x[i] -= t;
            }
            x[i] /= lu[(i, i)];
        }
        x
    };
    let solve_adj = |b: &[Complex64]| -> Vec<Complex64> {
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let t = lu[(j, i)].conj() * y[j];
                y[i] -= t;
            }
            y[i] /= lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = lu[(j, i)].conj() * y[j];
                y[i] -= t;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (k, &p) in perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    };
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.37 * i as f64, 0.21 * ((i * 7) % 5) as f64))
        .collect();
    let mut growth = 0.0;
    for _ in 0..30 {
        let xn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in x.iter_mut() {
            *z /= xn;
        }
        let y = solve_adj(&solve(&x));
        let g = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !g.is_finite() {
            return 0.0;
        }
        let settled = (g - growth).abs() <= 1e-12 * g;
        growth = g;
        x = y;
        if settled {
            break;
        }
    }
    if growth == 0.0 {
        f64::INFINITY
    } else {
        1.0 / growth.sqrt()
    }
}
