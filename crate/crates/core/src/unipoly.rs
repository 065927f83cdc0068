//! Dense univariate polynomials over the rationals.
//!
//! Small and boring on purpose: these show up as L-series numerators, as
//! characteristic polynomials, and as the expansion variable for closed-form
//! volume coefficients. Coefficients are stored in ascending order of degree
//! with no trailing zeros.

use crate::num::{qi, Q};
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    /// `coeffs[k]` is the coefficient of `t^k`; no trailing zeros.
    pub coeffs: Vec<Q>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        UniPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        UniPoly::new(vec![c])
    }

    /// The monomial `c·t^k`.
    pub fn monomial(c: Q, k: usize) -> Self {
        let mut coeffs = vec![Q::zero(); k + 1];
        coeffs[k] = c;
        UniPoly::new(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        UniPoly::new(coeffs.iter().map(|&c| qi(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports −1 for convenience in loops.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) + other.coeff(k));
        }
        UniPoly::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return UniPoly::zero();
        }
        UniPoly {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly::new(coeffs)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = UniPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, t: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Formal derivative d/dt.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * qi(k as i64))
                .collect(),
        )
    }

    /// Substitute `t ↦ c·t`.
    pub fn scale_var(&self, c: &Q) -> Self {
        let mut acc = Q::one();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for x in &self.coeffs {
            coeffs.push(x * &acc);
            acc *= c;
        }
        UniPoly::new(coeffs)
    }

    /// Substitute `t ↦ t^k` for `k ≥ 1`.
    pub fn stretch(&self, k: usize) -> Self {
        assert!(k >= 1);
        if self.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Q::zero(); (self.coeffs.len() - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = c.clone();
        }
        UniPoly::new(coeffs)
    }

    /// Exact division; returns `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(UniPoly::zero());
        }
        if self.degree() < other.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let d = other.coeffs.len() - 1;
        let lead = other.coeffs.last().unwrap();
        let mut quot = vec![Q::zero(); rem.len() - d];
        for k in (d..rem.len()).rev() {
            let c = std::mem::replace(&mut rem[k], Q::zero());
            if c.is_zero() {
                continue;
            }
            let qc = c / lead;
            for (j, b) in other.coeffs.iter().enumerate().take(d) {
                rem[k - d + j] -= &qc * b;
            }
            quot[k - d] = qc;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(UniPoly::new(quot))
    }

    /// Quotient and remainder with `deg rem < deg other`; panics on a zero
    /// divisor.
    pub fn div_rem(&self, other: &Self) -> (Self, Self) {
        assert!(!other.is_zero(), "division by the zero polynomial");
        if self.degree() < other.degree() {
            return (UniPoly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let d = other.coeffs.len() - 1;
        let lead = other.coeffs.last().unwrap();
        let mut quot = vec![Q::zero(); rem.len() - d];
        for k in (d..rem.len()).rev() {
            let c = rem[k].clone();
            if c.is_zero() {
                continue;
            }
            let qc = c / lead;
            for (j, b) in other.coeffs.iter().enumerate() {
                rem[k - d + j] -= &qc * b;
            }
            quot[k - d] = qc;
        }
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    /// Monic greatest common divisor (Euclid); gcd(0,0) = 0.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        match a.coeffs.last() {
            Some(lead) => {
                let inv = Q::one() / lead;
                a.scale(&inv)
            }
            None => a,
        }
    }

    /// The squarefree part `self / gcd(self, self′)`, monic up to the
    /// leading coefficient of the input.
    pub fn squarefree_part(&self) -> Self {
        if self.degree() <= 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_exact(&g)
            .expect("gcd divides the polynomial it was computed from")
    }

    /// Render with variable name `var`, ascending powers.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = crate::num::q_to_string(c);
            let term = match k {
                0 => cs,
                1 if c.is_one() => var.to_string(),
                1 => format!("{cs}*{var}"),
                _ if c.is_one() => format!("{var}^{k}"),
                _ => format!("{cs}*{var}^{k}"),
            };
            parts.push(term);
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::qr;

    #[test]
    fn arithmetic_round_trip() {
        let p = UniPoly::from_i64(&[1, -4, 4]); // (1-2t)^2
        let q = UniPoly::from_i64(&[1, -2]);
        assert_eq!(p.div_exact(&q).unwrap(), q);
        assert_eq!(q.mul(&q), p);
        assert!(p.div_exact(&UniPoly::from_i64(&[1, 1])).is_none());
    }

    #[test]
    fn eval_and_derivative() {
        let p = UniPoly::from_i64(&[2, 0, 3]); // 2 + 3t^2
        assert_eq!(p.eval(&qr(1, 2)), qr(11, 4));
        assert_eq!(p.derivative(), UniPoly::from_i64(&[0, 6]));
    }

    #[test]
    fn substitution() {
        let p = UniPoly::from_i64(&[1, 1]); // 1 + t
        assert_eq!(p.scale_var(&qi(3)), UniPoly::from_i64(&[1, 3]));
        assert_eq!(p.stretch(2), UniPoly::from_i64(&[1, 0, 1]));
    }
}
