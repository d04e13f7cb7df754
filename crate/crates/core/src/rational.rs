//! Exact rational helpers over `num::BigRational`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// 3^e for any integer e.
pub fn pow3(e: i64) -> Rational {
    let p = num::pow(BigInt::from(3), e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

pub fn pow2(e: i64) -> Rational {
    let p = num::pow(BigInt::from(2), e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Exponent e with x = 3^e, if x is an exact power of three.
pub fn log3_exact(x: &Rational) -> Option<i64> {
    if !x.is_positive() {
        return None;
    }
    let three = BigInt::from(3);
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    let mut e = 0i64;
    if n.is_one() {
        while d > BigInt::one() {
            if !(&d % &three).is_zero() {
                return None;
            }
            d /= &three;
            e -= 1;
        }
        Some(e)
    } else if d.is_one() {
        while n > BigInt::one() {
            if !(&n % &three).is_zero() {
                return None;
            }
            n /= &three;
            e += 1;
        }
        Some(e)
    } else {
        None
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to scaled division for huge numerators or denominators.
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift = nb - db;
    let scaled = if shift > 0 {
        Rational::new(x.numer().clone(), x.denom().clone() << (shift as usize))
    } else {
        Rational::new(x.numer().clone() << ((-shift) as usize), x.denom().clone())
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// "p/q" (or "p" when q = 1), always in lowest terms.
pub fn fmt(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot parse rational `{0}`")]
pub struct ParseRationalError(pub String);

/// Accepts "p/q", integers, and finite decimals such as "0.05".
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = ip.starts_with('-');
        let ip = if ip.is_empty() || ip == "-" { "0" } else { ip };
        let whole = BigInt::from_str(ip).map_err(|_| err())?;
        let frac_digits = BigInt::from_str(fp).map_err(|_| err())?;
        let scale = num::pow(BigInt::from(10), fp.len());
        let mut v = Rational::from_integer(whole.abs()) + Rational::new(frac_digits, scale);
        if neg {
            v = -v;
        }
        return Ok(v);
    }
    BigInt::from_str(t).map(Rational::from_integer).map_err(|_| err())
}

/// Floor of x as a BigInt.
pub fn floor(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_and_logs() {
        assert_eq!(pow3(2), int(9));
        assert_eq!(pow3(-2), frac(1, 9));
        assert_eq!(log3_exact(&frac(1, 27)), Some(-3));
        assert_eq!(log3_exact(&int(81)), Some(4));
        assert_eq!(log3_exact(&int(1)), Some(0));
        assert_eq!(log3_exact(&frac(2, 9)), None);
        assert_eq!(log3_exact(&int(-3)), None);
    }

    #[test]
    fn parsing() {
        assert_eq!(parse("1/20").unwrap(), frac(1, 20));
        assert_eq!(parse("0.05").unwrap(), frac(1, 20));
        assert_eq!(parse("-1.5").unwrap(), frac(-3, 2));
        assert_eq!(parse("7").unwrap(), int(7));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert_eq!(fmt(&frac(6, 4)), "3/2");
        assert_eq!(fmt(&int(-2)), "-2");
    }

    #[test]
    fn huge_to_f64() {
        let x = pow3(-800) * pow3(799);
        assert!((to_f64(&x) - 1.0 / 3.0).abs() < 1e-15);
        let tiny = pow3(-600);
        assert!(to_f64(&tiny) > 0.0);
    }
}
