//! Complex scalar coefficients in exact (Gaussian rational) or float mode.
//!
//! The imaginary unit lives in the coefficient, not in the variable space;
//! reality is a predicate, not a separate scalar type. Exact and float
//! coefficients never mix inside one series; callers check modes before
//! combining and the arithmetic here assumes matching modes.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

/// Coefficient arithmetic mode of a series: exact rationals or doubles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffMode {
    Exact,
    Float,
}

/// A complex scalar: a pair of arbitrary-precision rationals or of doubles.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact { re: BigRational, im: BigRational },
    Float { re: f64, im: f64 },
}

impl Coefficient {
    pub fn zero(mode: CoeffMode) -> Self {
        match mode {
            CoeffMode::Exact => Coefficient::Exact {
                re: BigRational::zero(),
                im: BigRational::zero(),
            },
            CoeffMode::Float => Coefficient::Float { re: 0.0, im: 0.0 },
        }
    }

    pub fn one(mode: CoeffMode) -> Self {
        match mode {
            CoeffMode::Exact => Coefficient::Exact {
                re: BigRational::one(),
                im: BigRational::zero(),
            },
            CoeffMode::Float => Coefficient::Float { re: 1.0, im: 0.0 },
        }
    }

    /// The exact imaginary unit.
    pub fn i() -> Self {
        Coefficient::Exact {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Coefficient::Exact {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// Exact real rational `num/den`. Panics if `den` is zero.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Coefficient::Exact {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn from_rationals(re: BigRational, im: BigRational) -> Self {
        Coefficient::Exact { re, im }
    }

    pub fn from_floats(re: f64, im: f64) -> Self {
        Coefficient::Float { re, im }
    }

    pub fn mode(&self) -> CoeffMode {
        match self {
            Coefficient::Exact { .. } => CoeffMode::Exact,
            Coefficient::Float { .. } => CoeffMode::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact { re, im } => re.is_zero() && im.is_zero(),
            Coefficient::Float { re, im } => *re == 0.0 && *im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coefficient::Exact { re, im } => re.is_one() && im.is_zero(),
            Coefficient::Float { re, im } => *re == 1.0 && *im == 0.0,
        }
    }

    /// Exact mode: imaginary part identically zero. Float mode: |Im| within
    /// 1e-10 of zero relative to max(1, |Re|).
    pub fn is_real(&self) -> bool {
        match self {
            Coefficient::Exact { im, .. } => im.is_zero(),
            Coefficient::Float { re, im } => im.abs() <= 1e-10 * re.abs().max(1.0),
        }
    }

    /// Exact real part; `None` in float mode.
    pub fn exact_re(&self) -> Option<&BigRational> {
        match self {
            Coefficient::Exact { re, .. } => Some(re),
            Coefficient::Float { .. } => None,
        }
    }

    /// Exact imaginary part; `None` in float mode.
    pub fn exact_im(&self) -> Option<&BigRational> {
        match self {
            Coefficient::Exact { im, .. } => Some(im),
            Coefficient::Float { .. } => None,
        }
    }

    pub fn to_floats(&self) -> (f64, f64) {
        match self {
            Coefficient::Exact { re, im } => (rational_to_f64(re), rational_to_f64(im)),
            Coefficient::Float { re, im } => (*re, *im),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Coefficient::Exact { re, im } => Coefficient::Exact {
                re: -re.clone(),
                im: -im.clone(),
            },
            Coefficient::Float { re, im } => Coefficient::Float { re: -re, im: -im },
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Coefficient::Exact { re, im } => Coefficient::Exact {
                re: re.clone(),
                im: -im.clone(),
            },
            Coefficient::Float { re, im } => Coefficient::Float { re: *re, im: -im },
        }
    }

    /// Sum. Modes must match.
    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Coefficient::Exact { re: a, im: b }, Coefficient::Exact { re: c, im: d }) => {
                Coefficient::Exact { re: a + c, im: b + d }
            }
            (Coefficient::Float { re: a, im: b }, Coefficient::Float { re: c, im: d }) => {
                Coefficient::Float { re: a + c, im: b + d }
            }
            _ => unreachable!("coefficient mode mismatch"),
        }
    }

    /// In-place sum. Modes must match.
    pub fn add_assign(&mut self, other: &Self) {
        match (self, other) {
            (Coefficient::Exact { re: a, im: b }, Coefficient::Exact { re: c, im: d }) => {
                if !c.is_zero() {
                    *a += c;
                }
                if !d.is_zero() {
                    *b += d;
                }
            }
            (Coefficient::Float { re: a, im: b }, Coefficient::Float { re: c, im: d }) => {
                *a += c;
                *b += d;
            }
            _ => unreachable!("coefficient mode mismatch"),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Product. Modes must match. Real factors skip the cross terms.
    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Coefficient::Exact { re: a, im: b }, Coefficient::Exact { re: c, im: d }) => {
                let b0 = b.is_zero();
                let d0 = d.is_zero();
                if b0 && d0 {
                    Coefficient::Exact { re: a * c, im: BigRational::zero() }
                } else if b0 {
                    Coefficient::Exact { re: a * c, im: a * d }
                } else if d0 {
                    Coefficient::Exact { re: a * c, im: b * c }
                } else {
                    Coefficient::Exact { re: a * c - b * d, im: a * d + b * c }
                }
            }
            (Coefficient::Float { re: a, im: b }, Coefficient::Float { re: c, im: d }) => {
                Coefficient::Float { re: a * c - b * d, im: a * d + b * c }
            }
            _ => unreachable!("coefficient mode mismatch"),
        }
    }

    /// `self += a * b`. Modes must match.
    pub fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        let prod = a.mul(b);
        self.add_assign(&prod);
    }

    /// i^j for the realification tables.
    pub fn imag_unit_pow(j: u32) -> Self {
        match j % 4 {
            0 => Coefficient::from_integer(1),
            1 => Coefficient::i(),
            2 => Coefficient::from_integer(-1),
            _ => Coefficient::i().neg(),
        }
    }
}

/// Convert without building intermediate floats from huge integers when
/// avoidable; falls back to a quotient of leading digits.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::MAX.copysign(1.0));
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Coefficient {
    /// Canonical text: real values as `p/q`, complex values as `(re, im)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact { re, im } => {
                if im.is_zero() {
                    fmt_rational(re, f)
                } else {
                    write!(f, "(")?;
                    fmt_rational(re, f)?;
                    write!(f, ", ")?;
                    fmt_rational(im, f)?;
                    write!(f, ")")
                }
            }
            Coefficient::Float { re, im } => {
                if *im == 0.0 {
                    write!(f, "{re}")
                } else {
                    write!(f, "({re}, {im})")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_mul_matches_complex_rule() {
        // (1 + 2i)(3 + 4i) = -5 + 10i
        let a = Coefficient::from_rationals(
            BigRational::from_integer(1.into()),
            BigRational::from_integer(2.into()),
        );
        let b = Coefficient::from_rationals(
            BigRational::from_integer(3.into()),
            BigRational::from_integer(4.into()),
        );
        let p = a.mul(&b);
        assert_eq!(
            p,
            Coefficient::from_rationals(
                BigRational::from_integer((-5).into()),
                BigRational::from_integer(10.into()),
            )
        );
    }

    #[test]
    fn conjugation_negates_imaginary_part() {
        let c = Coefficient::i();
        assert_eq!(c.conj(), c.neg());
        assert!(Coefficient::from_ratio(3, 2).is_real());
        assert!(!c.is_real());
    }

    #[test]
    fn float_reality_uses_relative_tolerance() {
        assert!(Coefficient::from_floats(1e6, 1e-5).is_real());
        assert!(!Coefficient::from_floats(1.0, 1e-9).is_real());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Coefficient::from_ratio(-3, 2).to_string(), "-3/2");
        assert_eq!(Coefficient::from_integer(7).to_string(), "7");
        let c = Coefficient::from_rationals(
            BigRational::new(1.into(), 2.into()),
            BigRational::from_integer((-1).into()),
        );
        assert_eq!(c.to_string(), "(1/2, -1)");
    }

    #[test]
    fn imag_unit_powers_cycle() {
        assert_eq!(Coefficient::imag_unit_pow(0), Coefficient::from_integer(1));
        assert_eq!(Coefficient::imag_unit_pow(1), Coefficient::i());
        assert_eq!(Coefficient::imag_unit_pow(2), Coefficient::from_integer(-1));
        assert_eq!(Coefficient::imag_unit_pow(3), Coefficient::i().neg());
        assert_eq!(Coefficient::imag_unit_pow(6), Coefficient::from_integer(-1));
    }
}
