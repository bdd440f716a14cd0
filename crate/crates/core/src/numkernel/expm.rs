use super::{solve_matrix, ComplexMatrix, NumError, Tolerances};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by Padé scaling and squaring.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    expm_with(a, &Tolerances::default())
}

pub fn expm_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix, NumError> {
    if !a.is_finite() {
        return Err(NumError::NonFinite);
    }
    let norm = a.norm_one();
    if norm > tol.expm_norm_cap {
        return Err(NumError::Overflow {
            norm,
            cap: tol.expm_norm_cap,
        });
    }
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, coeffs);
        }
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(s));
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(NumError::Overflow {
            norm,
            cap: tol.expm_norm_cap,
        });
    }
    Ok(r)
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix, NumError> {
    let n = a.dim();
    let id = ComplexMatrix::identity(n);
    let a2 = a * a;
    let mut odd = id.scale_real(b[1]);
    let mut even = id.scale_real(b[0]);
    let mut power = id;
    let m = b.len() - 1;
    let mut k = 2;
    while k <= m {
        power = &power * &a2;
        even = &even + &power.scale_real(b[k]);
        odd = &odd + &power.scale_real(b[k + 1]);
        k += 2;
    }
    let u = a * &odd;
    finish(&even, &u)
}

fn pade13(a: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    let b = &B13;
    let n = a.dim();
    let id = ComplexMatrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &(&a6.scale_real(b[13]) + &a4.scale_real(b[11])) + &a2.scale_real(b[9]);
    let outer_u = &(&(&a6.scale_real(b[7]) + &a4.scale_real(b[5])) + &a2.scale_real(b[3]))
        + &id.scale_real(b[1]);
    let u = a * &(&(&a6 * &inner_u) + &outer_u);
    let inner_v = &(&a6.scale_real(b[12]) + &a4.scale_real(b[10])) + &a2.scale_real(b[8]);
    let outer_v = &(&(&a6.scale_real(b[6]) + &a4.scale_real(b[4])) + &a2.scale_real(b[2]))
        + &id.scale_real(b[0]);
    let v = &(&a6 * &inner_v) + &outer_v;
    finish(&v, &u)
}

fn finish(v: &ComplexMatrix, u: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    solve_matrix(&(v - u), &(v + u))
}
