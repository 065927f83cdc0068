//! Exact multivariate polynomials with arbitrary-precision rational
//! coefficients.
//!
//! Terms are kept in a `BTreeMap` from exponent vector to coefficient, so
//! iteration order (and hence printing, hashing of printed forms, etc.) is
//! deterministic. The `BTreeMap` key order — lexicographic on the exponent
//! vector — doubles as the monomial order for exact division.
//!
//! Grading convention: the *cohomological* degree of a polynomial is twice
//! its polynomial degree (variables sit in cohomological degree 2).

use crate::error::{Error, Result};
use crate::num::{q_to_string, Q};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPolynomial {
    vars: usize,
    /// exponent vector (length `vars`) → nonzero coefficient
    terms: BTreeMap<Vec<u32>, Q>,
}

impl ExactPolynomial {
    pub fn zero(vars: usize) -> Self {
        ExactPolynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: Q) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars], c);
        }
        p
    }

    pub fn one(vars: usize) -> Self {
        Self::constant(vars, Q::one())
    }

    /// The variable `x_{idx+1}` (0-based index).
    pub fn var(vars: usize, idx: usize) -> Self {
        assert!(idx < vars, "variable index out of range");
        let mut e = vec![0; vars];
        e[idx] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(e, Q::one());
        p
    }

    pub fn monomial(vars: usize, exponents: &[u32], c: Q) -> Self {
        assert_eq!(exponents.len(), vars);
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exponents.to_vec(), c);
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exponents: &[u32]) -> Q {
        self.terms.get(exponents).cloned().unwrap_or_else(Q::zero)
    }

    /// The constant term.
    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.vars])
    }

    fn insert_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ExactPolynomial {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars);
        }
        ExactPolynomial {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e.clone(), x * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars, "variable count mismatch");
        let mut out = Self::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Total polynomial degree (−1 for the zero polynomial).
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as i64).sum())
            .max()
            .unwrap_or(-1)
    }

    /// Cohomological degree = 2 × polynomial degree (−2 for zero, by the
    /// same convention).
    pub fn cohomological_degree(&self) -> i64 {
        2 * self.degree()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self
            .terms
            .keys()
            .map(|e| e.iter().map(|&x| x as i64).sum::<i64>());
        match degs.next() {
            None => true,
            Some(d0) => degs.all(|d| d == d0),
        }
    }

    /// Map polynomial degree → homogeneous component.
    pub fn homogeneous_components(&self) -> BTreeMap<i64, ExactPolynomial> {
        let mut out: BTreeMap<i64, ExactPolynomial> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d: i64 = e.iter().map(|&x| x as i64).sum();
            out.entry(d)
                .or_insert_with(|| Self::zero(self.vars))
                .insert_term(e.clone(), c.clone());
        }
        out
    }

    /// Homogeneous component of the given polynomial degree.
    pub fn homogeneous_part(&self, d: i64) -> ExactPolynomial {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            if e.iter().map(|&x| x as i64).sum::<i64>() == d {
                out.insert_term(e.clone(), c.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to `x_{idx+1}`.
    pub fn partial(&self, idx: usize) -> Self {
        assert!(idx < self.vars);
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[idx] -= 1;
            out.insert_term(e2, c * Q::from_integer(e[idx].into()));
        }
        out
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, point: &[Q]) -> Q {
        assert_eq!(point.len(), self.vars);
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term *= x;
                }
            }
            acc += term;
        }
        acc
    }

    /// Substitute `x_{i+1} ↦ subs[i]`; the substituted polynomials must all
    /// share a variable count, which becomes the output's.
    pub fn substitute(&self, subs: &[ExactPolynomial]) -> Self {
        assert_eq!(subs.len(), self.vars);
        let out_vars = subs.first().map(|p| p.vars).unwrap_or(0);
        assert!(subs.iter().all(|p| p.vars == out_vars));
        // Cache powers of each substituted polynomial.
        let mut powers: Vec<Vec<ExactPolynomial>> =
            subs.iter().map(|p| vec![Self::one(out_vars), p.clone()]).collect();
        let mut out = Self::zero(out_vars);
        for (e, c) in &self.terms {
            let mut term = Self::constant(out_vars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let cache = &mut powers[i];
                while cache.len() <= k as usize {
                    let next = cache.last().unwrap().mul(&subs[i]);
                    cache.push(next);
                }
                term = term.mul(&cache[k as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Leading term under the lexicographic order (largest exponent vector).
    fn leading_term(&self) -> Option<(&Vec<u32>, &Q)> {
        self.terms.iter().next_back()
    }

    /// Exact division: returns `self / divisor` when the division leaves no
    /// remainder, otherwise an error. Correct for any pair over a domain:
    /// with a single divisor, if `self = q·divisor` then every intermediate
    /// remainder's leading term is divisible by the divisor's leading term,
    /// so hitting an indivisible leading term proves inexactness.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self> {
        assert_eq!(self.vars, divisor.vars, "variable count mismatch");
        let Some((lt_e, lt_c)) = divisor.leading_term() else {
            return Err(Error::Internal("division by zero polynomial".into()));
        };
        let lt_e = lt_e.clone();
        let lt_c = lt_c.clone();
        let mut rem = self.clone();
        let mut quot = Self::zero(self.vars);
        while let Some((re, rc)) = rem.leading_term() {
            if re.iter().zip(&lt_e).any(|(a, b)| a < b) {
                return Err(Error::NonzeroRemainder(format!(
                    "leading term x^{re:?} not divisible by divisor leading term x^{lt_e:?}"
                )));
            }
            let qe: Vec<u32> = re.iter().zip(&lt_e).map(|(a, b)| a - b).collect();
            let qc = rc / &lt_c;
            let qterm = Self::monomial(self.vars, &qe, qc);
            rem = rem.sub(&qterm.mul(divisor));
            quot = quot.add(&qterm);
        }
        Ok(quot)
    }

    /// Render as a human-readable string, e.g. `x1^2*x2 - 1/2*x3`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        // Highest terms first reads more naturally.
        for (e, c) in self.terms.iter().rev() {
            let mut factors: Vec<String> = Vec::new();
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, k)),
                }
            }
            let body = factors.join("*");
            let piece = if body.is_empty() {
                q_to_string(c)
            } else if c.is_one() {
                body
            } else if (-c.clone()).is_one() {
                format!("-{body}")
            } else {
                format!("{}*{body}", q_to_string(c))
            };
            parts.push(piece);
        }
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else if let Some(stripped) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(stripped);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}

/// Elementary symmetric polynomial `e_k(x_1..x_n)`.
pub fn elementary_symmetric(vars: usize, k: usize) -> ExactPolynomial {
    assert!(k <= vars);
    let mut out = ExactPolynomial::zero(vars);
    // Iterate over k-subsets via a simple recursion on indices.
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let mut e = vec![0u32; vars];
        for &i in &subset {
            e[i] = 1;
        }
        out.insert_term(e, Q::one());
        // Next k-subset in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if subset[i] != i + vars - k {
                subset[i] += 1;
                for j in (i + 1)..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Complete homogeneous symmetric polynomial `h_k(x_1..x_n)`; `h_0 = 1`,
/// `h_k = 0` for negative `k`.
pub fn complete_homogeneous(vars: usize, k: i64) -> ExactPolynomial {
    if k < 0 {
        return ExactPolynomial::zero(vars);
    }
    let k = k as u32;
    let mut out = ExactPolynomial::zero(vars);
    // All exponent vectors summing to k.
    fn rec(e: &mut Vec<u32>, pos: usize, left: u32, vars: usize, out: &mut ExactPolynomial) {
        if pos + 1 == vars {
            e[pos] = left;
            *out = out.add(&ExactPolynomial::monomial(vars, e, Q::one()));
            return;
        }
        for v in 0..=left {
            e[pos] = v;
            rec(e, pos + 1, left - v, vars, out);
        }
        e[pos] = 0;
    }
    if vars == 0 {
        if k == 0 {
            return ExactPolynomial::one(0);
        }
        return out;
    }
    let mut e = vec![0u32; vars];
    rec(&mut e, 0, k, vars, &mut out);
    out
}

/// Power sum `p_k(x_1..x_n) = Σ x_i^k`, `k ≥ 1`.
pub fn power_sum(vars: usize, k: u32) -> ExactPolynomial {
    assert!(k >= 1);
    let mut out = ExactPolynomial::zero(vars);
    for i in 0..vars {
        let mut e = vec![0u32; vars];
        e[i] = k;
        out.insert_term(e, Q::one());
    }
    out
}
