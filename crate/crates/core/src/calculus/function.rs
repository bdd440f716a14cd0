use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use super::CalcError;
use crate::numkernel::{expm, solve_matrix, ComplexMatrix};

/// Test functions for the sectorial calculus.
#[derive(Clone, Debug, PartialEq)]
pub enum CalcFunction {
    /// `z/(1+z)²`.
    Rat1,
    /// `(1−z)/(1+z)`.
    Cayley,
    /// `z^{1/2}/(1+z)`, principal branch.
    SqrtRes,
    /// `e^{−z}`.
    Exp,
    /// `1/(z−λ)`.
    Res(Complex64),
    Constant(Complex64),
    /// Coefficients in ascending powers.
    Polynomial(Vec<Complex64>),
    Product(Box<CalcFunction>, Box<CalcFunction>),
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl CalcFunction {
    /// Parses `rat1`, `cayley`, `sqrtres`, `exp`, `res:λ`, `const:c` or `poly:c0,c1,...`.
    pub fn parse(spec: &str) -> Result<Self, CalcError> {
        let spec = spec.trim();
        match spec {
            "rat1" => return Ok(Self::Rat1),
            "cayley" => return Ok(Self::Cayley),
            "sqrtres" => return Ok(Self::SqrtRes),
            "exp" => return Ok(Self::Exp),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("res:") {
            return Ok(Self::Res(parse_complex(rest)?));
        }
        if let Some(rest) = spec.strip_prefix("const:") {
            return Ok(Self::Constant(parse_complex(rest)?));
        }
        if let Some(rest) = spec.strip_prefix("poly:") {
            let coeffs = rest
                .split(',')
                .map(parse_complex)
                .collect::<Result<Vec<_>, _>>()?;
            if coeffs.is_empty() {
                return Err(CalcError::Domain("empty polynomial".into()));
            }
            return Ok(Self::Polynomial(coeffs));
        }
        Err(CalcError::Domain(format!("unknown function {spec:?}")))
    }

    pub fn product(self, other: CalcFunction) -> Self {
        Self::Product(Box::new(self), Box::new(other))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Rat1 => z / ((one() + z) * (one() + z)),
            Self::Cayley => (one() - z) / (one() + z),
            Self::SqrtRes => z.sqrt() / (one() + z),
            Self::Exp => (-z).exp(),
            Self::Res(l) => one() / (z - l),
            Self::Constant(c) => *c,
            Self::Polynomial(c) => c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a),
            Self::Product(f, g) => f.eval(z) * g.eval(z),
        }
    }

    /// Limit at 0 along the sector, if the function belongs to the extended class.
    pub fn limit_zero(&self) -> Option<Complex64> {
        match self {
            Self::Rat1 | Self::SqrtRes => Some(Complex64::new(0.0, 0.0)),
            Self::Cayley | Self::Exp => Some(one()),
            Self::Res(l) => Some(-one() / l),
            Self::Constant(c) => Some(*c),
            Self::Polynomial(_) => None,
            Self::Product(f, g) => Some(f.limit_zero()? * g.limit_zero()?),
        }
    }

    /// Limit at infinity inside the admissible sector.
    pub fn limit_infinity(&self) -> Option<Complex64> {
        match self {
            Self::Rat1 | Self::SqrtRes | Self::Exp | Self::Res(_) => Some(Complex64::new(0.0, 0.0)),
            Self::Cayley => Some(-one()),
            Self::Constant(c) => Some(*c),
            Self::Polynomial(_) => None,
            Self::Product(f, g) => Some(f.limit_infinity()? * g.limit_infinity()?),
        }
    }

    /// Exponent s of the envelope `c·min(|z|^s, |z|^{−s})` of the regular remainder.
    pub fn decay(&self) -> f64 {
        match self {
            Self::SqrtRes => 0.5,
            Self::Product(f, g) => f.decay().min(g.decay()),
            _ => 1.0,
        }
    }

    /// Largest half-angle of a sector on which the function is holomorphic with
    /// the stated limits.
    pub fn max_angle(&self) -> f64 {
        match self {
            Self::Exp => PI / 2.0,
            Self::Res(l) => l.arg().abs(),
            Self::Polynomial(_) => 0.0,
            Self::Product(f, g) => f.max_angle().min(g.max_angle()),
            _ => PI,
        }
    }

    /// Closed-form `f(B)` for functions that do not need a contour.
    pub fn direct(&self, b: &ComplexMatrix) -> Option<Result<ComplexMatrix, CalcError>> {
        let n = b.dim();
        let id = ComplexMatrix::identity(n);
        let res = match self {
            Self::Rat1 => {
                let s = b.shift(one());
                solve_matrix(&s, b).and_then(|x| solve_matrix(&s, &x))
            }
            Self::Cayley => solve_matrix(&b.shift(one()), &(&id - b)),
            Self::Exp => expm(&-b),
            Self::Res(l) => solve_matrix(&b.shift(-l), &id),
            Self::Constant(c) => Ok(id.scale(*c)),
            Self::Polynomial(c) => {
                let mut acc = ComplexMatrix::zeros(n);
                for a in c.iter().rev() {
                    acc = (&acc * b).shift(*a);
                }
                Ok(acc)
            }
            Self::Product(f, g) => {
                let fb = f.direct(b)?;
                let gb = g.direct(b)?;
                return Some(fb.and_then(|x| gb.map(|y| &x * &y)));
            }
            Self::SqrtRes => return None,
        };
        Some(res.map_err(CalcError::from))
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CalcFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rat1 => f.write_str("rat1"),
            Self::Cayley => f.write_str("cayley"),
            Self::SqrtRes => f.write_str("sqrtres"),
            Self::Exp => f.write_str("exp"),
            Self::Res(l) => write!(f, "res:{}", format_complex(*l)),
            Self::Constant(c) => write!(f, "const:{}", format_complex(*c)),
            Self::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|z| format_complex(*z)).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            Self::Product(a, b) => write!(f, "({a})*({b})"),
        }
    }
}

fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Result<Complex64, CalcError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CalcError::Domain(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not an exponent sign or the leading sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => v.parse::<f64>().map_err(|_| bad())?,
        };
        let re = re.parse::<f64>().map_err(|_| bad())?;
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing_round_trips() {
        for s in ["rat1", "cayley", "sqrtres", "exp", "res:-1", "res:-2+0.5i", "const:3", "poly:-1,1"] {
            let f = CalcFunction::parse(s).unwrap();
            assert_eq!(CalcFunction::parse(&f.name()).unwrap(), f);
        }
        assert_eq!(parse_complex("2.5e-1-3i").unwrap(), Complex64::new(0.25, -3.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3").unwrap(), Complex64::new(1e-3, 0.0));
        assert!(CalcFunction::parse("sin").is_err());
        assert!(parse_complex("1+").is_err());
    }

    #[test]
    fn values_and_limits() {
        let z = Complex64::new(4.0, 0.0);
        assert!((CalcFunction::SqrtRes.eval(z).re - 0.4).abs() < 1e-15);
        assert!((CalcFunction::Rat1.eval(Complex64::new(1.0, 0.0)).re - 0.25).abs() < 1e-15);
        for f in [CalcFunction::Rat1, CalcFunction::Cayley, CalcFunction::SqrtRes, CalcFunction::Exp, CalcFunction::Res(Complex64::new(-2.0, 1.0))] {
            let tiny = f.eval(Complex64::new(1e-12, 1e-12));
            assert!((tiny - f.limit_zero().unwrap()).norm() < 1e-5, "{f}");
            let huge = f.eval(Complex64::new(1e9, 1e8));
            assert!((huge - f.limit_infinity().unwrap()).norm() < 1e-4, "{f}");
        }
    }

    #[test]
    fn direct_matches_scalar_evaluation() {
        let b = ComplexMatrix::from_diag(&[Complex64::new(2.0, 0.5)]);
        for f in [CalcFunction::Rat1, CalcFunction::Cayley, CalcFunction::Exp, CalcFunction::Res(Complex64::new(-1.0, 0.0)), CalcFunction::parse("poly:1,2,3").unwrap()] {
            let m = f.direct(&b).unwrap().unwrap();
            assert!((m[(0, 0)] - f.eval(b[(0, 0)])).norm() < 1e-13, "{f}");
        }
        assert!(CalcFunction::SqrtRes.direct(&b).is_none());
    }
}
