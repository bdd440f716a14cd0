//! Brute-force reference computations used only for verification.
//!
//! Nothing here is called by the production paths; the acceptance suite and
//! the tests compare those paths against these independent evaluations.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::calculus::CalcFunction;
use crate::numkernel::{inverse, ComplexMatrix, NumError};

/// Quasi-random sample count used by the sphere oracles.
pub const SPHERE_SAMPLES: usize = 100_000;

const SEEDS_KEPT: usize = 6;

/// `(μξ, J_p ξ)` evaluated from the definition `J_p(a + ib) = 2a/p′ + i·2b/p`.
pub fn p_form_direct(mu: &ComplexMatrix, xi: &[Complex64], p: f64) -> Complex64 {
    let pc = p / (p - 1.0);
    let d = xi.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        let mut row = Complex64::new(0.0, 0.0);
        for (j, x) in xi.iter().enumerate() {
            row += mu[(i, j)] * x;
        }
        let jx = Complex64::new(2.0 * xi[i].re / pc, 2.0 * xi[i].im / p);
        acc += row * jx.conj();
    }
    acc
}

fn primes(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut k = 2u64;
    while out.len() < count {
        if (2..k).take_while(|d| d * d <= k).all(|d| !k.is_multiple_of(d)) {
            out.push(k as f64);
        }
        k += 1;
    }
    out
}

/// Points on the unit sphere of `C^d`: a Kronecker sequence in the cube mapped
/// through Box–Muller to Gaussians, then normalised.
pub fn sphere_points(d: usize, count: usize) -> Vec<Vec<Complex64>> {
    let alphas: Vec<f64> = primes(4 * d).iter().map(|q| q.sqrt().fract()).collect();
    (1..=count)
        .map(|k| {
            let u: Vec<f64> = alphas.iter().map(|a| (k as f64 * a).fract()).collect();
            let mut g = Vec::with_capacity(2 * d);
            for pair in u.chunks(2) {
                let r = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
                g.push(r * (2.0 * PI * pair[1]).cos());
            }
            let xi: Vec<Complex64> = g.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            normalized(xi)
        })
        .collect()
}

fn normalized(xi: Vec<Complex64>) -> Vec<Complex64> {
    let n = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    xi.into_iter().map(|z| z / n).collect()
}

fn nudge(xi: &[Complex64], k: usize, step: f64) -> Vec<Complex64> {
    let mut out = xi.to_vec();
    if k.is_multiple_of(2) {
        out[k / 2].re += step;
    } else {
        out[k / 2].im += step;
    }
    normalized(out)
}

/// Compass search on the sphere minimising `cost`.
fn pattern_search(cost: &impl Fn(&[Complex64]) -> f64, start: Vec<Complex64>) -> f64 {
    let dims = 2 * start.len();
    let mut x = start;
    let mut fx = cost(&x);
    let mut step = 0.05;
    let mut evals = 0;
    while step > 1e-9 && evals < 200_000 {
        let mut improved = false;
        for k in 0..dims {
            for s in [step, -step] {
                let y = nudge(&x, k, s);
                let fy = cost(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    fx
}

/// Sampled minimum of `cost` over the sphere, refined from the best samples.
fn sphere_min(points: &[Vec<Complex64>], cost: impl Fn(&[Complex64]) -> f64) -> f64 {
    let mut scored: Vec<(f64, usize)> = points.iter().enumerate().map(|(k, x)| (cost(x), k)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored
        .into_iter()
        .take(SEEDS_KEPT)
        .map(|(_, k)| pattern_search(&cost, points[k].clone()))
        .fold(f64::INFINITY, f64::min)
}

/// `Δ_p(μ)` as the minimum of `Re(μξ, J_p ξ)` over `points` from
/// [`sphere_points`], refined by a compass search.
pub fn delta_p_sampled(mu: &ComplexMatrix, p: f64, points: &[Vec<Complex64>]) -> f64 {
    sphere_min(points, |x| p_form_direct(mu, x, p).re)
}

/// `ω_p(μ)` as the largest `|arg (μξ, J_p ξ)|` over `points`, refined.
pub fn p_angle_sampled(mu: &ComplexMatrix, p: f64, points: &[Vec<Complex64>]) -> f64 {
    -sphere_min(points, |x| -p_form_direct(mu, x, p).arg().abs())
}

/// `V f(D) V⁻¹` for `B = V D V⁻¹`.
pub fn function_of_diagonalization(
    v: &ComplexMatrix,
    eigenvalues: &[Complex64],
    f: &CalcFunction,
) -> Result<ComplexMatrix, NumError> {
    let fd: Vec<Complex64> = eigenvalues.iter().map(|&z| f.eval(z)).collect();
    Ok(&(v * &ComplexMatrix::from_diag(&fd)) * &inverse(v)?)
}
