//! Rational-number helpers: construction, parsing, formatting, and the
//! handful of combinatorial quantities (binomials, multinomials, integer
//! powers) used across the crate.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The coefficient field: arbitrary-precision rationals.
pub type Q = BigRational;

/// Rational from an `i64`.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational `p/q` from `i64`s. Panics on zero denominator.
pub fn qr(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

/// Integer power `base^exp` for possibly negative `exp`.
pub fn qpow(base: &Q, exp: i64) -> Q {
    if exp >= 0 {
        let mut acc = Q::one();
        for _ in 0..exp {
            acc *= base;
        }
        acc
    } else {
        let inv = base.recip();
        let mut acc = Q::one();
        for _ in 0..(-exp) {
            acc *= &inv;
        }
        acc
    }
}

/// Binomial coefficient with the usual convention that out-of-range lower
/// indices give zero.
pub fn binomial(n: i64, k: i64) -> Q {
    if k < 0 || k > n || n < 0 {
        return Q::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Q::from_integer(acc)
}

/// Multinomial coefficient `n! / (k_1! ⋯ k_m!)`. Returns zero when any part
/// is negative or when the parts do not sum to `n`.
pub fn multinomial(n: i64, parts: &[i64]) -> Q {
    if parts.iter().any(|&k| k < 0) || parts.iter().sum::<i64>() != n {
        return Q::zero();
    }
    let mut acc = Q::one();
    let mut rest = n;
    for &k in parts {
        acc *= binomial(rest, k);
        rest -= k;
    }
    acc
}

/// Render a rational as `p` or `p/q` (lowest terms, `q > 0`).
pub fn q_to_string(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `p` or `p/q` with optional sign and surrounding whitespace.
pub fn q_from_str(s: &str) -> Result<Q> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("not an integer: {t:?}")))
    };
    match s.split_once('/') {
        None => Ok(Q::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(parse_int(p)?, den))
        }
    }
}

/// Parse a JSON value that encodes a rational: either a JSON integer or a
/// string `"p"` / `"p/q"`. Floats are rejected — the toolkit is exact.
pub fn q_from_json(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(qi(i))
            } else {
                Err(Error::Parse(format!(
                    "non-integer JSON number {n} (encode exact rationals as strings)"
                )))
            }
        }
        serde_json::Value::String(s) => q_from_str(s),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

/// Decimal rendering for human consumption (`--approx`); never used in the
/// machine-readable payload.
pub fn q_to_f64(x: &Q) -> f64 {
    let num = x.numer();
    let den = x.denom();
    // Scale down in tandem to stay in f64 range for large entries.
    let bits = num.bits().max(den.bits());
    if bits <= 52 {
        let n = num.to_string().parse::<f64>().unwrap_or(f64::NAN);
        let d = den.to_string().parse::<f64>().unwrap_or(f64::NAN);
        n / d
    } else {
        let shift = bits - 52;
        let n = (num >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
        let d = (den >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
        n / d
    }
}

/// Absolute value.
pub fn qabs(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["3", "-7", "22/7", "-5/9", "0"] {
            let q = q_from_str(s).unwrap();
            assert_eq!(q_to_string(&q), s);
        }
        assert_eq!(q_to_string(&q_from_str(" 4/6 ").unwrap()), "2/3");
        assert!(q_from_str("1/0").is_err());
        assert!(q_from_str("a").is_err());
    }

    #[test]
    fn binomial_edge_cases() {
        assert_eq!(binomial(5, 2), qi(10));
        assert_eq!(binomial(5, -1), qi(0));
        assert_eq!(binomial(3, 7), qi(0));
        assert_eq!(binomial(0, 0), qi(1));
    }

    #[test]
    fn multinomial_matches_repeated_binomials() {
        assert_eq!(multinomial(5, &[2, 2, 1]), qi(30));
        assert_eq!(multinomial(5, &[2, 2, 2]), qi(0));
        assert_eq!(multinomial(3, &[3]), qi(1));
        assert_eq!(multinomial(3, &[-1, 4]), qi(0));
    }

    #[test]
    fn qpow_negative_exponent() {
        assert_eq!(qpow(&qi(2), -3), qr(1, 8));
        assert_eq!(qpow(&qi(5), 0), qi(1));
    }
}
