//! Exact rational scalars and their textual form.
//!
//! Rationals print as `p/q` in lowest terms, or `p` when the denominator is 1.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed rational `{text}`")]
pub struct RationalError {
    pub text: String,
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `p`, `-p`, `p/q` or `-p/q` with decimal digits.
pub fn parse_rational(text: &str) -> Result<Q, RationalError> {
    let err = || RationalError { text: text.to_string() };
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let value = match body.split_once('/') {
        Some((p, q)) => {
            if !digits(p) || !digits(q) {
                return Err(err());
            }
            let q: BigInt = q.parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            Q::new(p.parse().map_err(|_| err())?, q)
        }
        None => {
            if !digits(body) {
                return Err(err());
            }
            Q::from_integer(body.parse().map_err(|_| err())?)
        }
    };
    Ok(if neg { -value } else { value })
}

pub fn format_rational(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// n! as a rational.
pub fn factorial(n: u32) -> Q {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Q::from_integer(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints_lowest_terms() {
        assert_eq!(parse_rational("4/6").unwrap(), ratio(2, 3));
        assert_eq!(format_rational(&parse_rational("-4/6").unwrap()), "-2/3");
        assert_eq!(format_rational(&parse_rational("8/4").unwrap()), "2");
        assert_eq!(format_rational(&int(0)), "0");
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "-", "1/", "/2", "1/0", "1.5", "a", "1/-2", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), int(1));
        assert_eq!(factorial(5), int(120));
    }
}
