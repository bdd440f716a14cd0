use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::{GridFunction, PformError};

#[derive(Clone, Debug, PartialEq)]
struct Mode {
    kx: f64,
    ky: f64,
    a: f64,
    b: f64,
}

fn trig(modes: &[Mode], x: f64, y: f64) -> f64 {
    modes
        .iter()
        .map(|m| {
            let t = 2.0 * PI * (m.kx * x + m.ky * y);
            m.a * t.cos() + m.b * t.sin()
        })
        .sum()
}

/// A smooth complex function `u = r·e^{iφ}` on `[0,1]²` built from
/// trigonometric polynomials, with `r` spanning `[r_min, r_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothSample {
    modulus: Vec<Mode>,
    phase: Vec<Mode>,
    center: f64,
    spread: f64,
    phase_amp: f64,
}

impl SmoothSample {
    /// Modes with frequencies up to `max_freq`, modulus in `[0.3, 2.2]`.
    pub fn random(rng: &mut impl Rng, max_freq: u32) -> Self {
        let mut modes = |count: usize| -> Vec<Mode> {
            (0..count)
                .map(|_| {
                    let kx = rng.gen_range(0..=max_freq) as f64;
                    let ky = rng.gen_range(0..=max_freq) as f64;
                    let damp = 1.0 / (1.0 + kx * kx + ky * ky);
                    Mode {
                        kx,
                        ky,
                        a: rng.gen_range(-1.0..1.0) * damp,
                        b: rng.gen_range(-1.0..1.0) * damp,
                    }
                })
                .collect()
        };
        let modulus = modes(4);
        let phase = modes(4);
        let mut s = Self { modulus, phase, center: 1.25, spread: 0.95, phase_amp: 1.0 };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let (mut tm, mut tp) = (0.0f64, 0.0f64);
        let m = 64;
        for j in 0..=m {
            for i in 0..=m {
                let (x, y) = (i as f64 / m as f64, j as f64 / m as f64);
                tm = tm.max(trig(&self.modulus, x, y).abs());
                tp = tp.max(trig(&self.phase, x, y).abs());
            }
        }
        let scale = |modes: &mut Vec<Mode>, t: f64| {
            if t > 0.0 {
                for md in modes.iter_mut() {
                    md.a /= t;
                    md.b /= t;
                }
            }
        };
        scale(&mut self.modulus, tm);
        scale(&mut self.phase, tp);
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let r = self.center + self.spread * trig(&self.modulus, x, y);
        Complex64::from_polar(r, self.phase_amp * trig(&self.phase, x, y))
    }

    /// Samples on the `n × n` node grid, using separable exponential tables.
    pub fn grid(&self, n: usize) -> Result<GridFunction, PformError> {
        let h = 1.0 / (n.max(2) - 1) as f64;
        let table = |k: f64| -> Vec<Complex64> {
            (0..n).map(|i| Complex64::from_polar(1.0, 2.0 * PI * k * i as f64 * h)).collect()
        };
        let tables = |modes: &[Mode]| -> Vec<(Complex64, Vec<Complex64>, Vec<Complex64>)> {
            modes.iter().map(|m| (Complex64::new(m.a, -m.b), table(m.kx), table(m.ky))).collect()
        };
        let (tm, tp) = (tables(&self.modulus), tables(&self.phase));
        let sum = |t: &[(Complex64, Vec<Complex64>, Vec<Complex64>)], i: usize, j: usize| -> f64 {
            t.iter().map(|(c, ex, ey)| (c * ex[i] * ey[j]).re).sum()
        };
        let values = (0..n * n)
            .map(|k| {
                let (i, j) = (k % n, k / n);
                let r = self.center + self.spread * sum(&tm, i, j);
                Complex64::from_polar(r, self.phase_amp * sum(&tp, i, j))
            })
            .collect();
        GridFunction::new(n, values)
    }
}
