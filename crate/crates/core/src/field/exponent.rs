use super::FieldError;

/// An integrability exponent `p ∈ (1, ∞)` with its conjugate and σ_p.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PExponent {
    p: f64,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self, FieldError> {
        if p.is_finite() && p > 1.0 {
            Ok(Self { p })
        } else {
            Err(FieldError::Domain(format!("exponent p = {p} must lie in (1, ∞)")))
        }
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn conj(self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// The exponent of the pair {p, p′} that is at least 2.
    pub fn reflected(self) -> f64 {
        if self.p >= 2.0 {
            self.p
        } else {
            self.conj()
        }
    }

    /// `σ_p = |p − 2| / (2√(p − 1))`, which equals σ_{p′} and `1/Ψ(p)` for p > 2.
    pub fn sigma(self) -> f64 {
        (self.p - 2.0).abs() / (2.0 * (self.p - 1.0).sqrt())
    }

    /// `|1/2 − 1/p|`, the distance from the Hilbert space exponent.
    pub fn gap(self) -> f64 {
        (0.5 - 1.0 / self.p).abs()
    }
}

/// A critical exponent `q = 2 + excess` with `excess ∈ (0, ∞]`.
///
/// Stored through the excess so that Ψ and σ keep full relative precision even
/// when q is close to 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalExponent {
    excess: f64,
}

impl CriticalExponent {
    pub const INFINITE: Self = Self { excess: f64::INFINITY };

    pub fn from_excess(excess: f64) -> Result<Self, FieldError> {
        if excess > 0.0 {
            Ok(Self { excess })
        } else {
            Err(FieldError::Domain(format!("critical exponent excess {excess} must be positive")))
        }
    }

    pub fn excess(self) -> f64 {
        self.excess
    }

    pub fn value(self) -> f64 {
        2.0 + self.excess
    }

    pub fn is_infinite(self) -> bool {
        self.excess.is_infinite()
    }

    /// `q′ = q/(q − 1)`, equal to 1 for the infinite sentinel.
    pub fn conj(self) -> f64 {
        if self.is_infinite() {
            1.0
        } else {
            (2.0 + self.excess) / (1.0 + self.excess)
        }
    }

    /// `σ_q = (q − 2)/(2√(q − 1))`; infinite for the sentinel.
    pub fn sigma(self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            self.excess / (2.0 * (1.0 + self.excess).sqrt())
        }
    }

    /// `|1/2 − 1/q|`.
    pub fn gap(self) -> f64 {
        if self.is_infinite() {
            0.5
        } else {
            self.excess / (2.0 * (2.0 + self.excess))
        }
    }

    /// Whether `p` lies strictly inside `(q′, q)`.
    pub fn admits(self, p: PExponent) -> bool {
        p.gap() < self.gap()
    }
}

/// `Ψ(s) = 2√(s − 1)/(s − 2)` for `s ∈ (2, ∞]`.
pub fn psi(s: f64) -> Result<f64, FieldError> {
    if s.is_nan() || s <= 2.0 {
        return Err(FieldError::Domain(format!("Ψ is defined on (2, ∞], got {s}")));
    }
    if s.is_infinite() {
        return Ok(0.0);
    }
    Ok(2.0 * (s - 1.0).sqrt() / (s - 2.0))
}

/// Ψ evaluated through the excess representation.
pub fn psi_of(q: CriticalExponent) -> f64 {
    if q.is_infinite() {
        0.0
    } else {
        2.0 * (1.0 + q.excess).sqrt() / q.excess
    }
}

/// Solves `Ψ(q) = η` via `η²(s − 2)² = 4(s − 1)`, taking the root above 2.
pub fn psi_inverse(eta: f64) -> Result<CriticalExponent, FieldError> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(FieldError::Domain(format!("Ψ⁻¹ needs η > 0, got {eta}")));
    }
    if eta.is_infinite() {
        return Err(FieldError::Domain("Ψ⁻¹(∞) = 2 is not a valid critical exponent".into()));
    }
    // with t = s − 2: η² t² − 4t − 4 = 0, so t = 2(1 + √(1 + η²))/η²
    let e2 = eta * eta;
    let excess = if e2.is_finite() && e2 > 0.0 {
        2.0 * (1.0 + (1.0 + e2).sqrt()) / e2
    } else {
        2.0 / eta
    };
    CriticalExponent::from_excess(excess)
}
