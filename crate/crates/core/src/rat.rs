//! The scalar type: arbitrary-precision exact rationals.
//!
//! `Rat` is always stored in lowest terms with a positive denominator, so the
//! `Display` form is exactly the on-disk format: `p/q`, or `p` alone when the
//! denominator is 1, with the sign on the numerator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// Exact rational scalar.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `p/q`; panics on `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Parses the `p/q` form (or a plain integer).
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    s.trim()
        .parse::<Rat>()
        .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
}

/// n! as a rational.
pub fn factorial(n: u32) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

/// (2n+1)!! = 1 * 3 * 5 * ... * (2n+1); `double_factorial_odd(-1)` is 1.
pub fn double_factorial_odd(n: i64) -> Rat {
    let mut acc = BigInt::one();
    let mut k: i64 = 1;
    while k <= 2 * n + 1 {
        acc *= BigInt::from(k);
        k += 2;
    }
    Rat::from_integer(acc)
}

/// Best-effort decimal rendering, for the explicitly non-authoritative
/// `--decimal` output column.
pub fn to_f64(x: &Rat) -> f64 {
    let num = x.numer();
    let den = x.denom();
    // Scale down in tandem to avoid overflowing f64 on huge entries.
    let nf = bigint_to_f64(num);
    let df = bigint_to_f64(den);
    nf / df
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    let s = n.to_string();
    s.parse::<f64>().unwrap_or(if n.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// True when `x == 0`; convenience re-export for call sites without
/// `num_traits` in scope.
pub fn is_zero(x: &Rat) -> bool {
    x.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_lowest_terms() {
        assert_eq!(ratio(2, 4).to_string(), "1/2");
        assert_eq!(ratio(-2, 4).to_string(), "-1/2");
        assert_eq!(ratio(2, -4).to_string(), "-1/2");
        assert_eq!(ratio(8, 2).to_string(), "4");
        assert_eq!(rat(0).to_string(), "0");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["1/24", "-1/12", "0", "7", "-3/5"] {
            assert_eq!(parse_rat(s).unwrap().to_string(), s);
        }
        assert!(parse_rat("a/b").is_err());
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial_odd(-1), rat(1));
        assert_eq!(double_factorial_odd(0), rat(1));
        assert_eq!(double_factorial_odd(1), rat(3));
        assert_eq!(double_factorial_odd(3), rat(105));
    }
}
