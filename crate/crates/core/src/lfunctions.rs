//! Curve data over 𝔽_q, zeta and Artin L-functions as exact rational
//! functions in t = q^{−s}, and the θ-derivative calculus used to evaluate
//! multivariate differential operators at s = 0.
//!
//! All s-derivatives are handled through θ = t·d/dt = −(log q)^{−1}·d/ds, so
//! every quantity stays in ℚ; theorem-level statements are implemented in
//! their (log q)-cleared form.

use crate::error::{Error, Result};
use crate::flag_calculus::GrossMotive;
use crate::linalg::{self, Mat};
use crate::num::{q_from_json, qi, qpow, Q};
use crate::unipoly::UniPoly;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// A smooth projective curve over 𝔽_q presented by its H¹ numerator
/// P(t) = det(1−tφ|H¹), optionally with an explicit rational Frobenius
/// matrix and symplectic pairing on H¹.
#[derive(Debug, Clone)]
pub struct CurveData {
    pub q: u64,
    pub g: u32,
    /// P(t): integer coefficients, degree 2g, P(0) = 1.
    pub h1_numerator: UniPoly,
    /// 2g×2g matrix of φ acting on H¹, when rational.
    pub frobenius: Option<Mat>,
    /// 2g×2g symplectic pairing matrix on H¹.
    pub pairing: Option<Mat>,
}

impl CurveData {
    pub fn new(
        q: u64,
        g: u32,
        h1_numerator: UniPoly,
        frobenius: Option<Mat>,
        pairing: Option<Mat>,
    ) -> Result<Self> {
        let c = CurveData {
            q,
            g,
            h1_numerator,
            frobenius,
            pairing,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn qq(&self) -> Q {
        qi(self.q as i64)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime_power(self.q) {
            return Err(Error::InconsistentData(format!(
                "q = {} is not a prime power",
                self.q
            )));
        }
        let p = &self.h1_numerator;
        let two_g = 2 * self.g as i64;
        if p.degree() != two_g {
            return Err(Error::InconsistentData(format!(
                "H¹ numerator has degree {}, expected 2g = {}",
                p.degree(),
                two_g
            )));
        }
        if p.coeff(0) != Q::one() {
            return Err(Error::InconsistentData("H¹ numerator must have P(0) = 1".into()));
        }
        if p.coeffs.iter().any(|c| !c.denom().is_one()) {
            return Err(Error::InconsistentData(
                "H¹ numerator must have integer coefficients".into(),
            ));
        }
        // Functional-equation symmetry a_{2g−i} = q^{g−i} a_i.
        for i in 0..=self.g as i64 {
            let lhs = p.coeff((two_g - i) as usize);
            let rhs = qpow(&self.qq(), self.g as i64 - i) * p.coeff(i as usize);
            if lhs != rhs {
                return Err(Error::InconsistentData(format!(
                    "functional equation fails: a_{} ≠ q^{}·a_{}",
                    two_g - i,
                    self.g as i64 - i,
                    i
                )));
            }
        }
        if let Some(f) = &self.frobenius {
            let n = two_g as usize;
            if f.len() != n || f.iter().any(|row| row.len() != n) {
                return Err(Error::DimensionMismatch(format!(
                    "Frobenius matrix must be {n}×{n}"
                )));
            }
            // det(1−tF) = P(t): reverse of the characteristic polynomial.
            let cp = linalg::char_poly(f);
            let mut rev: Vec<Q> = (0..=two_g as usize).map(|k| cp.coeff(two_g as usize - k)).collect();
            while rev.last().is_some_and(|c| c.is_zero()) {
                rev.pop();
            }
            if UniPoly::new(rev) != *p {
                return Err(Error::InconsistentData(
                    "det(1−tF) does not match the H¹ numerator".into(),
                ));
            }
        }
        if let Some(j) = &self.pairing {
            let n = two_g as usize;
            if j.len() != n || j.iter().any(|row| row.len() != n) {
                return Err(Error::DimensionMismatch(format!(
                    "pairing matrix must be {n}×{n}"
                )));
            }
            for a in 0..n {
                for b in 0..n {
                    if j[a][b] != -j[b][a].clone() {
                        return Err(Error::InconsistentData(
                            "pairing matrix is not antisymmetric".into(),
                        ));
                    }
                }
            }
            if n > 0 && linalg::invert(j).is_none() {
                return Err(Error::InconsistentData("pairing matrix is degenerate".into()));
            }
            if let Some(f) = &self.frobenius {
                // ⟨Fa, Fb⟩ = q⟨a,b⟩ ⟺ Fᵀ J F = qJ.
                let ft: Mat = (0..n).map(|a| (0..n).map(|b| f[b][a].clone()).collect()).collect();
                let lhs = linalg::mat_mul(&linalg::mat_mul(&ft, j), f);
                let rhs: Mat = j
                    .iter()
                    .map(|row| row.iter().map(|x| x * self.qq()).collect())
                    .collect();
                if lhs != rhs {
                    return Err(Error::InconsistentData(
                        "pairing is not scaled by q under Frobenius".into(),
                    ));
                }
            }
        }
        self.weil_numeric_check()?;
        Ok(())
    }

    /// Numeric sanity check that every inverse root α of P has |α| = √q
    /// (tolerance 1e−9). The main pipeline never consumes these floats.
    fn weil_numeric_check(&self) -> Result<()> {
        let sf = self.h1_numerator.squarefree_part();
        if sf.degree() < 1 {
            return Ok(());
        }
        // Inverse roots of P are the roots of the reversed polynomial.
        let deg = sf.degree() as usize;
        let rev: Vec<f64> = (0..=deg)
            .map(|k| {
                sf.coeff(deg - k)
                    .to_f64()
                    .ok_or_else(|| Error::Internal("coefficient out of f64 range".into()))
            })
            .collect::<Result<_>>()?;
        let sqrt_q = (self.q as f64).sqrt();
        for root in durand_kerner(&rev) {
            if (root.norm() - sqrt_q).abs() > 1e-9 {
                return Err(Error::InconsistentData(format!(
                    "inverse root of modulus {} violates |α| = √q = {}",
                    root.norm(),
                    sqrt_q
                )));
            }
        }
        Ok(())
    }

    /// The Frobenius matrix on H¹: as supplied, or derived for g ≤ 1 (empty
    /// for g = 0; the companion matrix of P for g = 1).
    pub fn frobenius_matrix(&self) -> Result<Mat> {
        if let Some(f) = &self.frobenius {
            return Ok(f.clone());
        }
        match self.g {
            0 => Ok(vec![]),
            1 => {
                // P = 1 + a₁t + qt²  ⇒  F = [[0, −q], [1, −a₁]].
                let a1 = self.h1_numerator.coeff(1);
                Ok(vec![vec![Q::zero(), -self.qq()], vec![Q::one(), -a1]])
            }
            _ => Err(Error::InvalidInput(
                "an explicit Frobenius matrix is required for g ≥ 2".into(),
            )),
        }
    }

    /// The symplectic pairing on H¹: as supplied, or the standard block
    /// ⟨a,b⟩ = a₁b₂ − a₂b₁ for g ≤ 1.
    pub fn pairing_matrix(&self) -> Result<Mat> {
        if let Some(j) = &self.pairing {
            return Ok(j.clone());
        }
        match self.g {
            0 => Ok(vec![]),
            1 => Ok(vec![vec![Q::zero(), Q::one()], vec![-Q::one(), Q::zero()]]),
            _ => Err(Error::InvalidInput(
                "an explicit pairing matrix is required for g ≥ 2".into(),
            )),
        }
    }

    /// Parse `{"q":4,"g":1,"h1":[1,-4,4],"frobenius":…,"pairing":…}`.
    /// Integers may be encoded as strings for bit-exactness.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::InvalidInput("curve must be a JSON object".into()))?;
        let q = match obj.get("q") {
            Some(x) => q_from_json(x)?,
            None => return Err(Error::InvalidInput("curve is missing \"q\"".into())),
        };
        let q = if q.denom().is_one() && q.numer().sign() == num_bigint::Sign::Plus {
            q.numer().to_u64().ok_or_else(|| Error::InvalidInput("q out of range".into()))?
        } else {
            return Err(Error::InvalidInput("q must be a positive integer".into()));
        };
        let g = match obj.get("g") {
            Some(x) => {
                let g = q_from_json(x)?;
                if !g.denom().is_one() || g.numer().sign() == num_bigint::Sign::Minus {
                    return Err(Error::InvalidInput("g must be a non-negative integer".into()));
                }
                g.numer().to_u32().ok_or_else(|| Error::InvalidInput("g out of range".into()))?
            }
            None => return Err(Error::InvalidInput("curve is missing \"g\"".into())),
        };
        let h1 = match obj.get("h1") {
            Some(serde_json::Value::Array(xs)) => {
                UniPoly::new(xs.iter().map(q_from_json).collect::<Result<Vec<Q>>>()?)
            }
            Some(_) => return Err(Error::InvalidInput("\"h1\" must be an array".into())),
            None => return Err(Error::InvalidInput("curve is missing \"h1\"".into())),
        };
        let parse_mat = |key: &str| -> Result<Option<Mat>> {
            match obj.get(key) {
                None | Some(serde_json::Value::Null) => Ok(None),
                Some(serde_json::Value::Array(rows)) => {
                    let mut m = Vec::with_capacity(rows.len());
                    for row in rows {
                        let row = row.as_array().ok_or_else(|| {
                            Error::InvalidInput(format!("\"{key}\" rows must be arrays"))
                        })?;
                        m.push(row.iter().map(q_from_json).collect::<Result<Vec<Q>>>()?);
                    }
                    Ok(Some(m))
                }
                Some(_) => Err(Error::InvalidInput(format!("\"{key}\" must be an array"))),
            }
        };
        CurveData::new(q, g, h1, parse_mat("frobenius")?, parse_mat("pairing")?)
    }
}

fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 0;
    for d in 2..=q {
        if d * d > q {
            p = q; // q itself is prime
            break;
        }
        if q.is_multiple_of(d) {
            p = d;
            break;
        }
    }
    let mut n = q;
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

/// Simultaneous root refinement for a complex polynomial given by ascending
/// real coefficients (assumed squarefree). Good enough for a 1e−9 sanity
/// check; never feeds the exact pipeline.
fn durand_kerner(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..500 {
        let mut max_move = 0.0f64;
        for j in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for k in 0..n {
                if k != j {
                    denom *= roots[j] - roots[k];
                }
            }
            let step = eval(roots[j]) / denom;
            roots[j] -= step;
            max_move = max_move.max(step.norm());
        }
        if max_move < 1e-13 {
            break;
        }
    }
    roots
}

/// The shipped genus-0 curve: ℙ¹ over 𝔽₂.
pub fn curve_p1_f2() -> CurveData {
    CurveData::new(2, 0, UniPoly::one(), None, None).expect("built-in curve is valid")
}

/// The shipped genus-1 curve over 𝔽₄ with P(t) = (1−2t)²: Frobenius acts as
/// the scalar 2 on H¹, keeping every downstream coefficient rational.
pub fn curve_elliptic_f4() -> CurveData {
    let two = qi(2);
    let f = vec![vec![two.clone(), Q::zero()], vec![Q::zero(), two]];
    let j = vec![vec![Q::zero(), Q::one()], vec![-Q::one(), Q::zero()]];
    CurveData::new(4, 1, UniPoly::from_i64(&[1, -4, 4]), Some(f), Some(j))
        .expect("built-in curve is valid")
}

/// An L-series t^{shift}·N(t)/∏ F_k(t)^{m_k} with every denominator factor
/// normalized to F(0) = 1, kept factored so poles can be inspected and
/// removed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct LSeries {
    pub q: Q,
    pub shift_power: i64,
    pub numerator: UniPoly,
    pub denominator: Vec<(UniPoly, u32)>,
}

/// A free-form rational function, the working representation for repeated
/// θ-derivatives.
#[derive(Debug, Clone)]
pub struct RationalFn {
    pub num: UniPoly,
    pub den: UniPoly,
}

impl RationalFn {
    /// θ = t·d/dt via the quotient rule.
    pub fn theta(&self) -> RationalFn {
        let t = UniPoly::monomial(Q::one(), 1);
        let num = t.mul(
            &self
                .num
                .derivative()
                .mul(&self.den)
                .sub(&self.num.mul(&self.den.derivative())),
        );
        RationalFn {
            num,
            den: self.den.mul(&self.den),
        }
    }

    pub fn eval(&self, t: &Q) -> Result<Q> {
        let d = self.den.eval(t);
        if d.is_zero() {
            return Err(Error::PoleOrZero(format!(
                "rational function has a pole at t = {}",
                crate::num::q_to_string(t)
            )));
        }
        Ok(self.num.eval(t) / d)
    }
}

impl LSeries {
    pub fn new(q: Q, numerator: UniPoly, denominator: Vec<(UniPoly, u32)>) -> Result<Self> {
        for (f, _) in &denominator {
            if f.coeff(0) != Q::one() {
                return Err(Error::InvalidInput(
                    "denominator factors must satisfy F(0) = 1".into(),
                ));
            }
        }
        Ok(LSeries {
            q,
            shift_power: 0,
            numerator,
            denominator,
        })
    }

    /// The constant series 1.
    pub fn one(q: Q) -> Self {
        LSeries {
            q,
            shift_power: 0,
            numerator: UniPoly::one(),
            denominator: vec![],
        }
    }

    /// Substitute s ↦ s + d, i.e. t ↦ q^{−d}t.
    pub fn shift(&self, d: i64) -> Self {
        let c = qpow(&self.q, -d);
        let scale = qpow(&c, self.shift_power);
        LSeries {
            q: self.q.clone(),
            shift_power: self.shift_power,
            numerator: self.numerator.scale_var(&c).scale(&scale),
            denominator: self
                .denominator
                .iter()
                .map(|(f, m)| (f.scale_var(&c), *m))
                .collect(),
        }
    }

    /// Substitute s ↦ 2s, i.e. t ↦ t².
    pub fn stretch_double(&self) -> Self {
        LSeries {
            q: self.q.clone(),
            shift_power: 2 * self.shift_power,
            numerator: self.numerator.stretch(2),
            denominator: self
                .denominator
                .iter()
                .map(|(f, m)| (f.stretch(2), *m))
                .collect(),
        }
    }

    /// Multiply by t^k (bookkeeping for operators of the form θ^r t^D·…).
    pub fn mul_power(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.shift_power += k;
        out
    }

    /// Remove every factor (1−t) from the denominator — the starred series.
    pub fn star(&self) -> Self {
        let one_minus_t = UniPoly::from_i64(&[1, -1]);
        let mut out = self.clone();
        out.denominator.retain(|(f, _)| *f != one_minus_t);
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::InvalidInput("L-series live over different fields".into()));
        }
        let mut denominator = self.denominator.clone();
        for (f, m) in &other.denominator {
            match denominator.iter_mut().find(|(g, _)| g == f) {
                Some((_, mm)) => *mm += m,
                None => denominator.push((f.clone(), *m)),
            }
        }
        Ok(LSeries {
            q: self.q.clone(),
            shift_power: self.shift_power + other.shift_power,
            numerator: self.numerator.mul(&other.numerator),
            denominator,
        })
    }

    /// Collapse to a plain rational function (negative shift powers move
    /// into the denominator).
    pub fn rational(&self) -> RationalFn {
        let mut den = UniPoly::one();
        for (f, m) in &self.denominator {
            den = den.mul(&f.pow(*m as usize));
        }
        let mut num = self.numerator.clone();
        if self.shift_power >= 0 {
            num = num.mul(&UniPoly::monomial(Q::one(), self.shift_power as usize));
        } else {
            den = den.mul(&UniPoly::monomial(Q::one(), (-self.shift_power) as usize));
        }
        RationalFn { num, den }
    }

    pub fn value_at_t(&self, t: &Q) -> Result<Q> {
        self.rational().eval(t)
    }

    /// Value at s = d, i.e. t = q^{−d}.
    pub fn value_at_s(&self, d: i64) -> Result<Q> {
        self.value_at_t(&qpow(&self.q, -d))
    }

    /// −(log q)^{−1}·L′/L at s = d, computed as (θL/L)(q^{−d}).
    /// Requires L to have neither zero nor pole there.
    pub fn log_derivative_at(&self, d: i64) -> Result<Q> {
        let t = qpow(&self.q, -d);
        let n = self.numerator.eval(&t);
        if n.is_zero() {
            return Err(Error::PoleOrZero(format!(
                "L-series vanishes at s = {d}"
            )));
        }
        let mut total = qi(self.shift_power) + &t * self.numerator.derivative().eval(&t) / n;
        for (f, m) in &self.denominator {
            let fv = f.eval(&t);
            if fv.is_zero() {
                return Err(Error::PoleOrZero(format!("L-series has a pole at s = {d}")));
            }
            total -= qi(*m as i64) * &t * f.derivative().eval(&t) / fv;
        }
        Ok(total)
    }
}

/// ζ_X(s) = P(t)/((1−t)(1−qt)) = det(1−q^{−s}φ|H*(X))^{−1}.
pub fn zeta_curve(c: &CurveData) -> LSeries {
    let q = c.qq();
    let one_minus_t = UniPoly::from_i64(&[1, -1]);
    let one_minus_qt = UniPoly::new(vec![Q::one(), -q.clone()]);
    LSeries::new(
        q,
        c.h1_numerator.clone(),
        vec![(one_minus_t, 1), (one_minus_qt, 1)],
    )
    .expect("zeta denominators are normalized")
}

/// (θ^k L) as a rational function, exact. The collapsed function carries
/// any t^D shift factor, so θ(t^D·R) = t^D(D·R + θR) needs no special case.
pub fn theta_derivative(l: &LSeries, k: u32) -> RationalFn {
    let mut f = l.rational();
    for _ in 0..k {
        f = f.theta();
    }
    f
}

/// The alternating-trace route to the zeta log-derivative:
/// Tr((q^dφ^{−1}−1)^{−1} | H*(X)) with the H¹ term entering negatively.
/// Requires a rational Frobenius (supplied or derivable).
pub fn log_derivative_trace_route(c: &CurveData, d: i64) -> Result<Q> {
    let q = c.qq();
    let qd = qpow(&q, d);
    let h0 = (qd.clone() - Q::one()).recip();
    let h2 = (qpow(&q, d - 1) - Q::one()).recip();
    let f = c.frobenius_matrix()?;
    let n = f.len();
    let mut h1 = Q::zero();
    if n > 0 {
        let f_inv = linalg::invert(&f)
            .ok_or_else(|| Error::InconsistentData("Frobenius matrix is singular".into()))?;
        // q^d F^{−1} − I
        let m: Mat = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut x = &f_inv[a][b] * &qd;
                        if a == b {
                            x -= Q::one();
                        }
                        x
                    })
                    .collect()
            })
            .collect();
        let m_inv = linalg::invert(&m).ok_or_else(|| {
            Error::PoleOrZero(format!("q^{d}φ^{{−1}}−1 is singular on H¹"))
        })?;
        for (a, row) in m_inv.iter().enumerate() {
            h1 += &row[a];
        }
    }
    Ok(h0 - h1 + h2)
}

/// One operator 𝔡 = c + Σ_i ε_i·θ_i acting on the line-indexed product
/// ℒ*(s₁,…,s_n) = ∏_i ζ^{(*)}(s_i + d_i).
#[derive(Debug, Clone)]
pub struct LegOperator {
    pub c: Q,
    /// ε_i, indexed like the motive lines.
    pub eps: Vec<Q>,
}

/// (∏_j 𝔡_j) ℒ*|_{s=0}: expand the operator product multilinearly into
/// per-line θ-powers and evaluate at t = 1. Lines with d_i = 1 use the
/// starred factor (1−t)·ζ(s+1).
pub fn apply_leg_operators(
    curve: &CurveData,
    motive: &GrossMotive,
    legs: &[LegOperator],
) -> Result<Q> {
    let degrees: Vec<i64> = motive.lines.iter().map(|l| l.degree).collect();
    let n = degrees.len();
    if let Some(d) = degrees.iter().find(|&&d| d < 1) {
        return Err(Error::InvalidInput(format!(
            "motive line of degree {d} < 1 has no convergent L-factor"
        )));
    }
    for leg in legs {
        if leg.eps.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "leg eigenvalue vector has length {}, expected {}",
                leg.eps.len(),
                n
            )));
        }
    }
    // Multilinear expansion: multi-index k ↦ coefficient of ∏ θ_i^{k_i}.
    let mut acc: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    acc.insert(vec![0; n], Q::one());
    for leg in legs {
        let mut next: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (idx, co) in &acc {
            if !leg.c.is_zero() {
                *next.entry(idx.clone()).or_insert_with(Q::zero) += co * &leg.c;
            }
            for (i, e) in leg.eps.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                let mut bumped = idx.clone();
                bumped[i] += 1;
                *next.entry(bumped).or_insert_with(Q::zero) += co * e;
            }
        }
        next.retain(|_, v| !v.is_zero());
        acc = next;
    }
    // θ-towers per line, up to the maximum power requested.
    let mut needed = vec![0u32; n];
    for idx in acc.keys() {
        for (i, &k) in idx.iter().enumerate() {
            needed[i] = needed[i].max(k);
        }
    }
    let zeta = zeta_curve(curve);
    let one = Q::one();
    let mut towers: Vec<Vec<Q>> = Vec::with_capacity(n);
    for (i, &d) in degrees.iter().enumerate() {
        let mut line = zeta.shift(d);
        if d == 1 {
            line = line.star();
        }
        let mut f = line.rational();
        let mut vals = Vec::with_capacity(needed[i] as usize + 1);
        vals.push(f.eval(&one)?);
        for _ in 0..needed[i] {
            f = f.theta();
            vals.push(f.eval(&one)?);
        }
        towers.push(vals);
    }
    let mut total = Q::zero();
    for (idx, co) in &acc {
        let mut term = co.clone();
        for (i, &k) in idx.iter().enumerate() {
            term *= &towers[i][k as usize];
        }
        total += term;
    }
    Ok(total)
}

/// One irreducible constituent of an Artin system: L_{Y,ρ} with its
/// numerator, plus zeta poles when ρ is trivial.
#[derive(Debug, Clone)]
pub struct ArtinRep {
    pub name: String,
    pub dim: usize,
    pub lseries: LSeries,
}

/// The Artin L-functions of a Galois cover X → Y with group Σ: the
/// factorization ∏_ρ L_{Y,ρ}^{dim ρ} recovers ζ_X.
#[derive(Debug, Clone)]
pub struct ArtinLSystem {
    pub q: u64,
    pub g_y: u32,
    pub group: String,
    pub reps: Vec<ArtinRep>,
}

impl ArtinLSystem {
    pub fn rep(&self, name: &str) -> Option<&ArtinRep> {
        self.reps.iter().find(|r| r.name == name)
    }

    /// ζ_X as the product ∏_ρ L_ρ^{dim ρ}.
    pub fn zeta_product(&self) -> Result<LSeries> {
        let mut acc = LSeries::one(qi(self.q as i64));
        for rep in &self.reps {
            for _ in 0..rep.dim {
                acc = acc.mul(&rep.lseries)?;
            }
        }
        Ok(acc)
    }

    /// Genus of the covering curve X, read off the factorization.
    pub fn g_x(&self) -> Result<u32> {
        let z = self.zeta_product()?;
        Ok((z.numerator.degree() / 2) as u32)
    }

    /// −(log q)^{−1} L′_ρ/L_ρ(d) for the rep at `idx`.
    pub fn log_derivative(&self, idx: usize, d: i64) -> Result<Q> {
        self.reps[idx].lseries.log_derivative_at(d)
    }

    /// Logarithmic L-derivative of a class function expanded as
    /// φ = Σ_ρ a_ρ·χ_ρ: Σ_ρ a_ρ·(θL_ρ/L_ρ)(d).
    pub fn log_derivative_class(&self, a: &[Q], d: i64) -> Result<Q> {
        if a.len() != self.reps.len() {
            return Err(Error::DimensionMismatch(format!(
                "class-function expansion has {} coefficients, expected {}",
                a.len(),
                self.reps.len()
            )));
        }
        let mut total = Q::zero();
        for (coef, rep) in a.iter().zip(&self.reps) {
            if !coef.is_zero() {
                total += coef * rep.lseries.log_derivative_at(d)?;
            }
        }
        Ok(total)
    }
}

/// Parse and validate `{"group":"Z2","gY":2,"reps":[{"name":"triv","dim":1,
/// "numerator":[…]},…]}`. The rep named "triv" carries the zeta poles.
pub fn build_artin_system(v: &serde_json::Value) -> Result<ArtinLSystem> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidInput("Artin system must be a JSON object".into()))?;
    let group = match obj.get("group") {
        Some(serde_json::Value::String(s)) => crate::characters::normalize_group_label(s)?,
        _ => return Err(Error::InvalidInput("Artin system is missing \"group\"".into())),
    };
    let group_data = crate::characters::group_by_name(&group)?;
    let (order, irrep_count) = (group_data.order(), group_data.num_irreps());
    let q = match obj.get("q") {
        Some(x) => {
            let q = q_from_json(x)?;
            q.numer()
                .to_u64()
                .filter(|_| q.denom().is_one())
                .ok_or_else(|| Error::InvalidInput("q must be a positive integer".into()))?
        }
        None => return Err(Error::InvalidInput("Artin system is missing \"q\"".into())),
    };
    if !is_prime_power(q) {
        return Err(Error::InconsistentData(format!("q = {q} is not a prime power")));
    }
    let g_y = match obj.get("gY") {
        Some(x) => q_from_json(x)?
            .numer()
            .to_u32()
            .ok_or_else(|| Error::InvalidInput("gY out of range".into()))?,
        None => return Err(Error::InvalidInput("Artin system is missing \"gY\"".into())),
    };
    let reps_json = match obj.get("reps") {
        Some(serde_json::Value::Array(xs)) => xs,
        _ => return Err(Error::InvalidInput("Artin system is missing \"reps\"".into())),
    };
    if reps_json.len() != irrep_count {
        return Err(Error::InconsistentData(format!(
            "group {group} has {irrep_count} irreducibles, got {} reps",
            reps_json.len()
        )));
    }
    let qq = qi(q as i64);
    let one_minus_t = UniPoly::from_i64(&[1, -1]);
    let one_minus_qt = UniPoly::new(vec![Q::one(), -qq.clone()]);
    let mut reps = Vec::with_capacity(reps_json.len());
    let mut dim_sq_sum = 0usize;
    for rv in reps_json {
        let ro = rv
            .as_object()
            .ok_or_else(|| Error::InvalidInput("each rep must be a JSON object".into()))?;
        let name = ro
            .get("name")
            .and_then(|x| x.as_str())
            .ok_or_else(|| Error::InvalidInput("rep is missing \"name\"".into()))?
            .to_string();
        let dim = ro
            .get("dim")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::InvalidInput("rep is missing \"dim\"".into()))?
            as usize;
        let numerator = match ro.get("numerator") {
            Some(serde_json::Value::Array(xs)) => {
                UniPoly::new(xs.iter().map(q_from_json).collect::<Result<Vec<Q>>>()?)
            }
            _ => return Err(Error::InvalidInput("rep is missing \"numerator\"".into())),
        };
        if numerator.coeff(0) != Q::one() {
            return Err(Error::InconsistentData(format!(
                "rep {name}: numerator must satisfy N(0) = 1"
            )));
        }
        if numerator.coeffs.iter().any(|c| !c.denom().is_one()) {
            return Err(Error::InconsistentData(format!(
                "rep {name}: numerator must have integer coefficients"
            )));
        }
        dim_sq_sum += dim * dim;
        let is_trivial = name == "triv";
        // Degree bookkeeping for an everywhere-unramified cover:
        // deg = 2g_Y for the trivial rep, (2g_Y−2)·dim ρ otherwise.
        let expected_deg = if is_trivial {
            2 * g_y as i64
        } else {
            (2 * g_y as i64 - 2) * dim as i64
        };
        if numerator.degree() != expected_deg {
            return Err(Error::InconsistentData(format!(
                "rep {name}: numerator degree {} ≠ expected {expected_deg}",
                numerator.degree()
            )));
        }
        // Coefficient symmetry a_{D−i} = ε·q^{D/2−i}·a_i with ε = ±1
        // (all supported groups have self-dual irreducibles).
        let deg = numerator.degree();
        if deg > 0 {
            let half = deg / 2;
            let eps_candidates = [Q::one(), -Q::one()];
            let ok = eps_candidates.iter().any(|eps| {
                (0..=half).all(|i| {
                    numerator.coeff((deg - i) as usize)
                        == eps * qpow(&qq, half - i) * numerator.coeff(i as usize)
                })
            });
            if !ok {
                return Err(Error::InconsistentData(format!(
                    "rep {name}: numerator violates the functional-equation symmetry"
                )));
            }
        }
        let lseries = if is_trivial {
            LSeries::new(
                qq.clone(),
                numerator,
                vec![(one_minus_t.clone(), 1), (one_minus_qt.clone(), 1)],
            )?
        } else {
            LSeries::new(qq.clone(), numerator, vec![])?
        };
        reps.push(ArtinRep { name, dim, lseries });
    }
    if reps.iter().filter(|r| r.name == "triv").count() != 1 {
        return Err(Error::InvalidInput(
            "exactly one rep must be named \"triv\"".into(),
        ));
    }
    if dim_sq_sum != order {
        return Err(Error::InconsistentData(format!(
            "Σ dim² = {dim_sq_sum} ≠ |Σ| = {order}"
        )));
    }
    let system = ArtinLSystem { q, g_y, group, reps };
    // Factorization check: ∏ L_ρ^{dim ρ} must be the zeta function of a
    // curve — integer numerator of even degree with functional-equation
    // symmetry over the zeta poles.
    let z = system.zeta_product()?;
    let p = &z.numerator;
    if p.coeffs.iter().any(|c| !c.denom().is_one()) || p.degree() % 2 != 0 || p.coeff(0) != Q::one()
    {
        return Err(Error::InconsistentData(
            "Artin factorization does not produce a curve zeta numerator".into(),
        ));
    }
    let gx = p.degree() / 2;
    for i in 0..=gx {
        if p.coeff((2 * gx - i) as usize) != qpow(&qq, gx - i) * p.coeff(i as usize) {
            return Err(Error::InconsistentData(
                "Artin factorization violates the zeta functional equation".into(),
            ));
        }
    }
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::qr;

    #[test]
    fn zeta_values() {
        let z = zeta_curve(&curve_p1_f2());
        assert_eq!(z.value_at_s(2).unwrap(), qr(8, 3));
        let e = curve_elliptic_f4();
        // numerator (1−2t)² has a double zero at t = 1/2
        assert!(e.h1_numerator.eval(&qr(1, 2)).is_zero());
        assert!(e.h1_numerator.derivative().eval(&qr(1, 2)).is_zero());
        // simple poles exactly at t = 1 and t = q^{−1}
        let z = zeta_curve(&e);
        assert_eq!(
            z.denominator,
            vec![
                (UniPoly::from_i64(&[1, -1]), 1),
                (UniPoly::from_i64(&[1, -4]), 1)
            ]
        );
    }

    #[test]
    fn curve_validation_rejects_bad_data() {
        // functional equation broken
        assert!(CurveData::new(2, 1, UniPoly::from_i64(&[1, 1, 1]), None, None).is_err());
        // Frobenius with the wrong characteristic reversal
        let id = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        assert!(CurveData::new(4, 1, UniPoly::from_i64(&[1, -4, 4]), Some(id), None).is_err());
        // real inverse roots off the |α| = √q circle (1−t)(1−4t)
        assert!(CurveData::new(4, 1, UniPoly::from_i64(&[1, -5, 4]), None, None).is_err());
        // symmetric "pairing"
        let sym = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        assert!(
            CurveData::new(4, 1, UniPoly::from_i64(&[1, -4, 4]), None, Some(sym)).is_err()
        );
        // q not a prime power
        assert!(CurveData::new(6, 0, UniPoly::one(), None, None).is_err());
    }

    #[test]
    fn theta_basics() {
        let one = LSeries::one(qi(2));
        assert!(theta_derivative(&one, 1).eval(&Q::one()).unwrap().is_zero());
        // θ²(t^D) at t = 1 → D²
        let td = LSeries::one(qi(2)).mul_power(5);
        assert_eq!(theta_derivative(&td, 2).eval(&Q::one()).unwrap(), qi(25));
        // θζ(s+2)|₀ for q=2, g=0
        let z2 = zeta_curve(&curve_p1_f2()).shift(2);
        assert_eq!(theta_derivative(&z2, 1).eval(&Q::one()).unwrap(), qr(32, 9));
    }

    #[test]
    fn log_derivative_examples_and_two_way() {
        let p1 = curve_p1_f2();
        assert_eq!(zeta_curve(&p1).log_derivative_at(2).unwrap(), qr(4, 3));
        let e = curve_elliptic_f4();
        // 1/15 + 1/3 − 2/7
        assert_eq!(zeta_curve(&e).log_derivative_at(2).unwrap(), qr(4, 35));
        for curve in [&p1, &e] {
            for d in 2..=4 {
                assert_eq!(
                    zeta_curve(curve).log_derivative_at(d).unwrap(),
                    log_derivative_trace_route(curve, d).unwrap(),
                    "two-way log-derivative at d={d}"
                );
            }
        }
        // constant series: log-derivative 0
        assert!(LSeries::one(qi(2)).log_derivative_at(3).unwrap().is_zero());
    }

    #[test]
    fn starring_is_exact_cancellation() {
        let z1 = zeta_curve(&curve_p1_f2()).shift(1);
        // unstarred: pole at t = 1
        assert!(z1.value_at_t(&Q::one()).is_err());
        let starred = z1.star();
        assert_eq!(starred.value_at_t(&Q::one()).unwrap(), qi(2));
        // the starred value agrees with cancelling (1−t) from the rational
        // function (1−t)·ζ(s+1) before evaluating
        let f = z1.rational();
        let one_minus_t = UniPoly::from_i64(&[1, -1]);
        let cancelled = RationalFn {
            num: f.num.clone(),
            den: f.den.div_exact(&one_minus_t).unwrap(),
        };
        assert_eq!(cancelled.eval(&Q::one()).unwrap(), qi(2));
    }

    #[test]
    fn leg_operator_examples() {
        use crate::flag_calculus::gross_motive;
        use crate::weyl_poly::{build_root_datum, Family};
        let p1 = curve_p1_f2();
        let gl1 = gross_motive(&build_root_datum(Family::Gl, 1).unwrap());
        assert_eq!(apply_leg_operators(&p1, &gl1, &[]).unwrap(), qi(2));
        let gl2 = gross_motive(&build_root_datum(Family::Gl, 2).unwrap());
        assert_eq!(apply_leg_operators(&p1, &gl2, &[]).unwrap(), qr(16, 3));
        // one leg, c=0, ε=(1), single line of degree 2 → θζ(s+2)|₀
        let sl2 = gross_motive(&build_root_datum(Family::Sl, 2).unwrap());
        let leg = LegOperator {
            c: Q::zero(),
            eps: vec![Q::one()],
        };
        assert_eq!(apply_leg_operators(&p1, &sl2, &[leg]).unwrap(), qr(32, 9));
    }

    fn z2_system_json() -> serde_json::Value {
        serde_json::json!({
            "group": "Z2",
            "q": 2,
            "gY": 2,
            "reps": [
                {"name": "triv", "dim": 1, "numerator": [1, 0, -4, 0, 4]},
                {"name": "sgn", "dim": 1, "numerator": [1, 0, 2]}
            ]
        })
    }

    #[test]
    fn artin_system_z2() {
        let sys = build_artin_system(&z2_system_json()).unwrap();
        assert_eq!(sys.g_x().unwrap(), 3);
        // factorization: ζ_X numerator = P_Y · N_sgn
        let z = sys.zeta_product().unwrap();
        let expected = UniPoly::from_i64(&[1, 0, -4, 0, 4]).mul(&UniPoly::from_i64(&[1, 0, 2]));
        assert_eq!(z.numerator, expected);
        // functional-equation consequence: θval_ρ(d) + θval_{ρ∨}(1−d)
        // = (2g_Y−2)·dim ρ for each self-dual rep, d = 2
        for idx in 0..sys.reps.len() {
            let lhs = sys.log_derivative(idx, 2).unwrap() + sys.log_derivative(idx, -1).unwrap();
            assert_eq!(lhs, qi(2), "rep {}", sys.reps[idx].name);
        }
    }

    #[test]
    fn artin_system_trivial_group_is_base_zeta() {
        let v = serde_json::json!({
            "group": "triv",
            "q": 4,
            "gY": 1,
            "reps": [{"name": "triv", "dim": 1, "numerator": [1, -4, 4]}]
        });
        let sys = build_artin_system(&v).unwrap();
        let z = sys.zeta_product().unwrap();
        let direct = zeta_curve(&curve_elliptic_f4());
        assert_eq!(z.numerator, direct.numerator);
        assert_eq!(z.value_at_s(2).unwrap(), direct.value_at_s(2).unwrap());
    }

    #[test]
    fn artin_system_rejects_inconsistent_numerators() {
        // sgn numerator with broken symmetry
        let mut v = z2_system_json();
        v["reps"][1]["numerator"] = serde_json::json!([1, 1]);
        assert!(build_artin_system(&v).is_err());
        // wrong rep count for the group
        let mut v = z2_system_json();
        v["reps"] = serde_json::json!([
            {"name": "triv", "dim": 1, "numerator": [1, 0, -4, 0, 4]}
        ]);
        assert!(build_artin_system(&v).is_err());
    }

    #[test]
    fn curve_json_round_trip() {
        let v = serde_json::json!({"q": 4, "g": 1, "h1": [1, -4, 4]});
        let c = CurveData::from_json(&v).unwrap();
        assert_eq!(c.q, 4);
        // derived companion Frobenius has the right characteristic reversal
        let f = c.frobenius_matrix().unwrap();
        let validated = CurveData::new(4, 1, c.h1_numerator.clone(), Some(f), None);
        assert!(validated.is_ok());
        // floats rejected
        let bad = serde_json::json!({"q": 4, "g": 1, "h1": [1.5, -4.0, 4.0]});
        assert!(CurveData::from_json(&bad).is_err());
    }
}
