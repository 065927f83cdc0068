//! Text syntax for exact polynomials.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := rational | 'x' digits | '(' expr ')' | '-' atom
//! ```
//!
//! Variables are `x1 .. xn` (1-based); rationals are `p` or `p/q` with
//! decimal digits. Examples: `x1^3`, `(x1+x2)^2 - 1/2*x3`.
//!
//! Note that unary minus is part of the atom, so it binds tighter than
//! exponentiation: `-x1^2` parses as `(-x1)^2`; write `-(x1^2)` to negate.

use crate::error::{Error, Result};
use crate::num::Q;
use crate::poly::ExactPolynomial;
use num_bigint::BigInt;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: usize,
}

/// Parse a polynomial in variables `x1 .. x{vars}`.
pub fn parse_polynomial(src: &str, vars: usize) -> Result<ExactPolynomial> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err(&format!(
            "unexpected character '{}'",
            p.src[p.pos] as char
        )));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("at byte {}: {msg}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn expr(&mut self) -> Result<ExactPolynomial> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ExactPolynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ExactPolynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.bump();
            let e = self.uint()?;
            let e: u32 = e
                .try_into()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExactPolynomial> {
        match self.peek() {
            Some(b'-') => {
                self.bump();
                Ok(self.atom()?.neg())
            }
            Some(b'(') => {
                self.bump();
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.bump();
                Ok(e)
            }
            Some(b'x') => {
                self.bump();
                let idx = self.uint()?;
                if idx == 0 || idx as usize > self.vars {
                    return Err(self.err(&format!(
                        "variable x{idx} out of range (have x1..x{})",
                        self.vars
                    )));
                }
                Ok(ExactPolynomial::var(self.vars, idx as usize - 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.bigint()?;
                let den = if self.peek() == Some(b'/') {
                    self.bump();
                    let d = self.bigint()?;
                    if d == BigInt::from(0) {
                        return Err(self.err("zero denominator"));
                    }
                    d
                } else {
                    BigInt::from(1)
                };
                Ok(ExactPolynomial::constant(self.vars, Q::new(num, den)))
            }
            Some(c) => Err(self.err(&format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number too large"))
    }

    fn bigint(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{qi, qr};

    #[test]
    fn parses_basic_forms() {
        let p = parse_polynomial("x1^3", 2).unwrap();
        assert_eq!(p.coeff(&[3, 0]), qi(1));

        let p = parse_polynomial("(x1 + x2)^2 - 1/2 * x1", 2).unwrap();
        assert_eq!(p.coeff(&[1, 1]), qi(2));
        assert_eq!(p.coeff(&[1, 0]), qr(-1, 2));

        let p = parse_polynomial("-x1 * -x2", 2).unwrap();
        assert_eq!(p.coeff(&[1, 1]), qi(1));

        let p = parse_polynomial("3/4", 1).unwrap();
        assert_eq!(p.constant_term(), qr(3, 4));
    }

    #[test]
    fn precedence_and_associativity() {
        // x1 + x2 * x3 parses the product first
        let p = parse_polynomial("x1 + x2*x3", 3).unwrap();
        assert_eq!(p.coeff(&[1, 0, 0]), qi(1));
        assert_eq!(p.coeff(&[0, 1, 1]), qi(1));
        // Unary minus is part of the atom, so it binds tighter than '^':
        // -x1^2 reads as (-x1)^2. Negation of a power needs -(x1^2) or 0-x1^2.
        let p = parse_polynomial("-x1^2", 1).unwrap();
        assert_eq!(p.coeff(&[2]), qi(1));
        let p = parse_polynomial("-(x1^2)", 1).unwrap();
        assert_eq!(p.coeff(&[2]), qi(-1));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_polynomial("x0", 2).is_err());
        assert!(parse_polynomial("x3", 2).is_err());
        assert!(parse_polynomial("x1 +", 2).is_err());
        assert!(parse_polynomial("(x1", 2).is_err());
        assert!(parse_polynomial("1/0", 2).is_err());
        assert!(parse_polynomial("x1 $ x2", 2).is_err());
    }

    #[test]
    fn round_trips_render() {
        let p = parse_polynomial("x1^2 - 1/2*x2 + 3", 2).unwrap();
        let q = parse_polynomial(&p.render(), 2).unwrap();
        assert_eq!(p, q);
    }
}
