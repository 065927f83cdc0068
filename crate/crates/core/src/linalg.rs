//! Dense exact linear algebra over the rationals: reduced row echelon form,
//! solving, nullspaces, determinants, characteristic polynomials, and
//! rational root extraction for eigenvalue work on small blocks.
//!
//! Matrices are plain `Vec<Vec<Q>>` in row-major order. Everything here is
//! Gaussian elimination at desk scale; no pivoting heuristics beyond "first
//! nonzero" are needed for exact arithmetic.

use crate::num::{qi, Q};
use crate::unipoly::UniPoly;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Mat = Vec<Vec<Q>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Mat {
    let n = a.len();
    let m = if n > 0 { a[0].len() } else { 0 };
    let p = if b.is_empty() { 0 } else { b[0].len() };
    assert_eq!(m, b.len(), "inner dimension mismatch");
    let mut out = vec![vec![Q::zero(); p]; n];
    for i in 0..n {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for j in 0..p {
                let prod = aik * &b[k][j];
                out[i][j] += prod;
            }
        }
    }
    out
}

pub fn mat_sub(a: &[Vec<Q>], b: &[Vec<Q>]) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn commute(a: &[Vec<Q>], b: &[Vec<Q>]) -> bool {
    mat_mul(a, b) == mat_mul(b, a)
}

/// In-place reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut Mat) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = std::mem::replace(&mut m[i][c], Q::zero());
                for j in (c + 1)..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &[Vec<Q>]) -> usize {
    let mut m = a.to_vec();
    rref(&mut m).len()
}

/// Solve `A x = b`; returns one solution if consistent.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut aug: Mat = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    // Inconsistent iff a pivot lands in the augmented column.
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

/// Basis of the right nullspace of `A`.
pub fn nullspace(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut m = a.to_vec();
    let pivots = rref(&mut m);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn invert(a: &[Vec<Q>]) -> Option<Mat> {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "invert expects a square matrix");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    // Invertible iff the pivots are exactly the left block's columns; a
    // pivot escaping into the augmented block means a rank deficiency.
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut sign = Q::one();
    let mut acc = Q::one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if pr != c {
            m.swap(c, pr);
            sign = -sign;
        }
        acc *= &m[c][c];
        let inv = m[c][c].recip();
        for i in (c + 1)..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                let sub = &f * &m[c][j];
                m[i][j] -= sub;
            }
        }
    }
    sign * acc
}

/// Characteristic polynomial `det(λI − A)` by the Faddeev–LeVerrier
/// recurrence; monic, coefficients ascending in λ.
pub fn char_poly(a: &[Vec<Q>]) -> UniPoly {
    let n = a.len();
    if n == 0 {
        return UniPoly::one();
    }
    // p(λ) = λ^n + c_{n−1} λ^{n−1} + … + c_0
    // M_1 = I, c_{n−1} = −tr(A M_1); M_{k+1} = A M_k + c_{n−k} I.
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut m = identity(n);
    for k in 1..=n {
        let am = mat_mul(a, &m);
        let tr: Q = (0..n).map(|i| am[i][i].clone()).sum();
        let c = -tr / qi(k as i64);
        coeffs[n - k] = c.clone();
        if k < n {
            m = am;
            for i in 0..n {
                m[i][i] += &c;
            }
        }
    }
    UniPoly::new(coeffs)
}

/// All roots of `p` with multiplicity, provided every root is rational;
/// `None` when some root is irrational (or could not be certified rational).
pub fn rational_roots(p: &UniPoly) -> Option<Vec<Q>> {
    if p.is_zero() || p.degree() == 0 {
        return Some(vec![]);
    }
    let mut roots = Vec::new();
    let mut cur = p.clone();
    // Strip factors of t.
    while cur.coeff(0).is_zero() && cur.degree() >= 1 {
        roots.push(Q::zero());
        cur = cur.div_exact(&UniPoly::monomial(Q::one(), 1)).unwrap();
    }
    while cur.degree() >= 1 {
        let root = match cur.degree() {
            1 => {
                // a t + b = 0
                Some(-cur.coeff(0) / cur.coeff(1))
            }
            2 => quadratic_rational_root(&cur),
            _ => divisor_search_root(&cur),
        }?;
        roots.push(root.clone());
        let lin = UniPoly::new(vec![-root, Q::one()]);
        cur = cur.div_exact(&lin).expect("verified root must divide");
    }
    roots.sort();
    Some(roots)
}

/// One rational root of a quadratic, if the discriminant is a perfect
/// square of a rational.
fn quadratic_rational_root(p: &UniPoly) -> Option<Q> {
    let (a, b, c) = (p.coeff(2), p.coeff(1), p.coeff(0));
    let disc = &b * &b - qi(4) * &a * &c;
    if disc.is_negative() {
        return None;
    }
    let sqrt = rational_sqrt(&disc)?;
    Some((-b + sqrt) / (qi(2) * a))
}

/// Exact square root of a nonnegative rational, if it exists.
fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer().sqrt();
    let den = x.denom().sqrt();
    if &(&num * &num) == x.numer() && &(&den * &den) == x.denom() {
        Some(Q::new(num, den))
    } else {
        None
    }
}

/// Rational-root search by divisor enumeration on the integerized
/// polynomial. Returns `None` when no rational root exists among the
/// candidates (degree ≥ 3 with no rational root, or divisors too large to
/// enumerate — callers treat this as "irrational spectrum").
fn divisor_search_root(p: &UniPoly) -> Option<Q> {
    // Clear denominators to an integer polynomial.
    let mut den = BigInt::one();
    for c in &p.coeffs {
        den = den.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p
        .coeffs
        .iter()
        .map(|c| c.numer() * (&den / c.denom()))
        .collect();
    let lead = ints.last()?.clone();
    let constant = ints[0].clone();
    debug_assert!(!constant.is_zero(), "zero roots stripped by caller");
    let num_divs = small_divisors(&constant.abs())?;
    let den_divs = small_divisors(&lead.abs())?;
    for a in &num_divs {
        for b in &den_divs {
            for sign in [1i64, -1] {
                let cand = Q::new(a * BigInt::from(sign), b.clone());
                if p.eval(&cand).is_zero() {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// All positive divisors, or `None` if the number is too large to factor by
/// trial division at desk scale.
fn small_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    const LIMIT: u64 = 1_000_000;
    let mut rest = n.clone();
    if rest.is_zero() {
        return Some(vec![BigInt::one()]);
    }
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut d = BigInt::from(2u32);
    while &d * &d <= rest {
        if d > BigInt::from(LIMIT) {
            return None;
        }
        let mut mult = 0u32;
        while (&rest % &d).is_zero() {
            rest /= &d;
            mult += 1;
        }
        if mult > 0 {
            factors.push((d.clone(), mult));
        }
        d += 1u32;
    }
    if rest > BigInt::one() {
        factors.push((rest, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (prime, mult) in factors {
        let mut next = Vec::new();
        for d in &divs {
            let mut p = BigInt::one();
            for _ in 0..=mult {
                next.push(d * &p);
                p *= &prime;
            }
        }
        divs = next;
    }
    divs.sort();
    divs.dedup();
    Some(divs)
}
