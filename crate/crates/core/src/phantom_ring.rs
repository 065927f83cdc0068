//! Finitely presented models of the tautological class ring attached to a
//! tuple of minuscule modification legs over a curve.
//!
//! Two models are built.  The **split model** lives inside the truncated
//! graded ring H*(X)^{⊗r} ⊗ ⊗ᵢ R^{W_{μᵢ}}: every fundamental invariant f and
//! every leg i contribute one relation class D_i(f) that corrects the leg
//! class [f]_i by Frobenius-twisted diagonal classes, and the quotient is a
//! finite-dimensional graded ring, free over the curve classes, whose
//! one-dimensional top piece carries a volume functional normalized by the
//! leg-free volume of the same group.  The **collapsed model** replaces the
//! curve factor by ℚ[ξ]/(ξ²) for a tuple of legs indexed by Galois elements
//! of a covering curve; its relation constants are character-weighted
//! logarithmic derivatives of the covering L-functions, matching the pair
//! constants of the closed-form volume evaluation.
//!
//! Basis choice: each quotient is presented on the monomial basis left after
//! Gaussian elimination of the relation span, with monomials ordered first by
//! total degree, then curve part before leg part lexicographically.  This is
//! a convention — any complement of the relation span would do — and all
//! reported data (dimensions, pairings, volumes) are basis-independent.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::characters::{group_by_name, FiniteGroupData};
use crate::error::{Error, Result};
use crate::flag_calculus::integrate_flag;
use crate::lfunctions::{ArtinLSystem, CurveData};
use crate::linalg::{self, Mat};
use crate::num::{qi, qpow, Q};
use crate::poly::ExactPolynomial;
use crate::volume::{volume_gln, volume_split};
use crate::weyl_poly::{partial_derivative, weyl_cosets, Coweight, Family, RootDatum};

// ---------------------------------------------------------------------------
// Curve cohomology.
// ---------------------------------------------------------------------------

/// The cohomology ring of a smooth projective curve over 𝔽_q together with
/// its Frobenius action.  Basis indices: 0 is the unit, 1..=2g are the
/// degree-one classes ζ_k, and 2g+1 is the point class ξ.
#[derive(Debug, Clone)]
pub struct CurveCohomology {
    pub q: Q,
    pub g: usize,
    /// Frobenius on H¹ in column convention: φ(ζ_k) = Σ_j frobenius[j][k]·ζ_j.
    pub frobenius: Mat,
    /// Cup product on H¹: ζ_j·ζ_k = pairing[j−1][k−1]·ξ.
    pub pairing: Mat,
    pairing_inv: Mat,
}

impl CurveCohomology {
    pub fn build(curve: &CurveData) -> Result<Self> {
        let g = curve.g as usize;
        let frobenius = curve.frobenius_matrix()?;
        let pairing = curve.pairing_matrix()?;
        let pairing_inv = if g == 0 {
            Vec::new()
        } else {
            linalg::invert(&pairing).ok_or_else(|| {
                Error::InconsistentData("the intersection pairing on H¹ is singular".into())
            })?
        };
        Ok(CurveCohomology {
            q: curve.qq(),
            g,
            frobenius,
            pairing,
            pairing_inv,
        })
    }

    /// The two-class model {1, ξ} with no odd part, used by the collapsed
    /// ring where only the point class survives the common section.
    fn point_model(q: Q) -> Self {
        CurveCohomology {
            q,
            g: 0,
            frobenius: Vec::new(),
            pairing: Vec::new(),
            pairing_inv: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.g + 2
    }

    fn xi(&self) -> u8 {
        (2 * self.g + 1) as u8
    }

    fn class_degree(&self, id: u8) -> i64 {
        if id == 0 {
            0
        } else if (id as usize) <= 2 * self.g {
            1
        } else {
            2
        }
    }

    /// Product of two basis classes; at most one term survives.
    fn mul_basis(&self, a: u8, b: u8) -> Option<(u8, Q)> {
        if a == 0 {
            return Some((b, Q::one()));
        }
        if b == 0 {
            return Some((a, Q::one()));
        }
        if self.class_degree(a) + self.class_degree(b) > 2 {
            return None;
        }
        let c = self.pairing[(a - 1) as usize][(b - 1) as usize].clone();
        if c.is_zero() {
            None
        } else {
            Some((self.xi(), c))
        }
    }

    /// Frobenius image of one basis class as a sparse combination.
    fn frobenius_basis(&self, id: u8) -> Vec<(u8, Q)> {
        if id == 0 {
            return vec![(0, Q::one())];
        }
        if id == self.xi() {
            return vec![(id, self.q.clone())];
        }
        let k = (id - 1) as usize;
        (0..2 * self.g)
            .filter_map(|j| {
                let c = self.frobenius[j][k].clone();
                if c.is_zero() {
                    None
                } else {
                    Some(((j + 1) as u8, c))
                }
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Frobenius-twisted diagonal classes on X × X.
// ---------------------------------------------------------------------------

/// A degree-two class on X×X on the Künneth basis: a multiple of 1⊗ξ, a
/// matrix of ζ_j⊗ζ_k coefficients, and a multiple of ξ⊗1.
#[derive(Debug, Clone, PartialEq)]
pub struct XiClass {
    pub one_xi: Q,
    pub xi_one: Q,
    /// middle[j][k] is the coefficient of ζ_{j+1}⊗ζ_{k+1}.
    pub middle: Mat,
}

impl XiClass {
    /// Pullback along the diagonal X → X×X, as the coefficient of ξ.
    pub fn diagonal_restriction(&self, coh: &CurveCohomology) -> Q {
        let mut acc = &self.one_xi + &self.xi_one;
        for (j, row) in self.middle.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    acc += c * &coh.pairing[j][k];
                }
            }
        }
        acc
    }
}

/// Coefficient matrix of the diagonal class of X×X on the ζ⊗ζ part; the full
/// class is 1⊗ξ − Σ_a ζ_a⊗ζ^a + ξ⊗1 with ζ^a the pairing-dual basis, so the
/// coefficient of ζ_j⊗ζ_k is −(J⁻¹)[k][j].
fn diagonal_middle(coh: &CurveCohomology) -> Mat {
    let n = 2 * coh.g;
    (0..n)
        .map(|j| (0..n).map(|k| -coh.pairing_inv[k][j].clone()).collect())
        .collect()
}

fn scaled_mat(m: &Mat, c: &Q) -> Mat {
    m.iter()
        .map(|row| row.iter().map(|x| x * c).collect())
        .collect()
}

fn transpose(m: &Mat) -> Mat {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols)
        .map(|j| (0..rows).map(|i| m[i][j].clone()).collect())
        .collect()
}

/// (M − 1)⁻¹, or a pole error when 1 is an eigenvalue of M.
fn resolvent_at_one(m: &Mat) -> Result<Mat> {
    let n = m.len();
    let shifted: Mat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        &m[i][j] - Q::one()
                    } else {
                        m[i][j].clone()
                    }
                })
                .collect()
        })
        .collect();
    linalg::invert(&shifted)
        .ok_or_else(|| Error::PoleOrZero("the Frobenius twist has eigenvalue one on H¹".into()))
}

fn xi_class_from(coh: &CurveCohomology, d: i64) -> Result<XiClass> {
    if d == 0 || d == 1 {
        return Err(Error::PoleOrZero(format!(
            "the twisted diagonal class has a pole at weight {d}"
        )));
    }
    let one_xi = (qpow(&coh.q, d) - Q::one()).recip();
    let xi_one = (qpow(&coh.q, d - 1) - Q::one()).recip();
    let middle = if coh.g == 0 {
        Vec::new()
    } else {
        let m0 = diagonal_middle(coh);
        let f_inv = linalg::invert(&coh.frobenius)
            .ok_or_else(|| Error::InconsistentData("Frobenius on H¹ is singular".into()))?;
        // First-factor route: (q^d·φ⁻¹ − 1)⁻¹ ⊗ id applied to the diagonal.
        let first = linalg::mat_mul(
            &resolvent_at_one(&scaled_mat(&f_inv, &qpow(&coh.q, d)))?,
            &m0,
        );
        // Second-factor route: id ⊗ (q^{d−1}·φ − 1)⁻¹.
        let second = linalg::mat_mul(
            &m0,
            &transpose(&resolvent_at_one(&scaled_mat(
                &coh.frobenius,
                &qpow(&coh.q, d - 1),
            ))?),
        );
        if first != second {
            return Err(Error::Internal(
                "the two Frobenius-twist routes disagree on H¹⊗H¹".into(),
            ));
        }
        first
    };
    Ok(XiClass {
        one_xi,
        xi_one,
        middle,
    })
}

fn xi_star1_from(coh: &CurveCohomology) -> Result<XiClass> {
    let one_xi = (coh.q.clone() - Q::one()).recip();
    let middle = if coh.g == 0 {
        Vec::new()
    } else {
        linalg::mat_mul(
            &diagonal_middle(coh),
            &transpose(&resolvent_at_one(&coh.frobenius)?),
        )
    };
    Ok(XiClass {
        one_xi,
        xi_one: Q::zero(),
        middle,
    })
}

fn xi_star0_from(coh: &CurveCohomology) -> Result<XiClass> {
    let xi_one = (qpow(&coh.q, -1) - Q::one()).recip();
    let middle = if coh.g == 0 {
        Vec::new()
    } else {
        linalg::mat_mul(
            &diagonal_middle(coh),
            &transpose(&resolvent_at_one(&scaled_mat(
                &coh.frobenius,
                &qpow(&coh.q, -1),
            ))?),
        )
    };
    Ok(XiClass {
        one_xi: Q::zero(),
        xi_one,
        middle,
    })
}

/// The weight-d twisted diagonal class (q^d·φ⁻¹ − 1)⁻¹⊗id of the diagonal of
/// X×X.  Defined for d ∉ {0, 1}; both evaluation routes (resolvent on the
/// first or the second factor) are computed and must agree.
pub fn xi_class(curve: &CurveData, d: i64) -> Result<XiClass> {
    xi_class_from(&CurveCohomology::build(curve)?, d)
}

/// The weight-one reductive twist id⊗(φ−1)⁻¹ of (diagonal − ξ⊗1).
pub fn xi_star1(curve: &CurveData) -> Result<XiClass> {
    xi_star1_from(&CurveCohomology::build(curve)?)
}

/// The weight-zero reductive twist id⊗(q⁻¹φ−1)⁻¹ of (diagonal − 1⊗ξ).
pub fn xi_star0(curve: &CurveData) -> Result<XiClass> {
    xi_star0_from(&CurveCohomology::build(curve)?)
}

// ---------------------------------------------------------------------------
// Per-leg invariant algebras.
// ---------------------------------------------------------------------------

/// Exponent vectors of total degree `degree` over the first `active` of
/// `coords` coordinates, in lexicographic order.
fn enumerate_exponents(coords: usize, active: usize, degree: usize) -> Vec<Vec<u32>> {
    fn rec(
        out: &mut Vec<Vec<u32>>,
        cur: &mut Vec<u32>,
        pos: usize,
        active: usize,
        left: u32,
        coords: usize,
    ) {
        if pos + 1 == active {
            cur.push(left);
            let mut v = cur.clone();
            v.resize(coords, 0);
            out.push(v);
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(out, cur, pos + 1, active, left - e, coords);
            cur.pop();
        }
    }
    if active == 0 {
        return if degree == 0 {
            vec![vec![0; coords]]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    rec(&mut out, &mut Vec::new(), 0, active, degree as u32, coords);
    out
}

fn covector_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// The stabilizer-invariant polynomial algebra of one leg, carried up to a
/// polynomial-degree cap: graded basis, multiplication table, flag integrals
/// in degree D_μ, and the Schubert cell counts of the leg's flag variety.
struct LegAlgebra {
    mu: Coweight,
    d_mu: usize,
    cap: usize,
    /// Reduced homogeneous representatives; ids in weakly increasing degree,
    /// id 0 is the unit.
    basis: Vec<ExactPolynomial>,
    degree_of: Vec<usize>,
    by_degree: Vec<Vec<u16>>,
    /// Reduced monomial support per degree, for coordinate solves.
    monomials: Vec<Vec<Vec<u32>>>,
    mult: BTreeMap<(u16, u16), Vec<(u16, Q)>>,
    /// Flag integral of each basis element (nonzero only in degree D_μ).
    integrals: Vec<Q>,
    /// Number of Schubert cells of each dimension 0..=D_μ.
    schubert: Vec<usize>,
}

fn express_in(
    basis: &[ExactPolynomial],
    by_degree: &[Vec<u16>],
    monomials: &[Vec<Vec<u32>>],
    cap: usize,
    k: usize,
    p: &ExactPolynomial,
) -> Result<Vec<(u16, Q)>> {
    if p.is_zero() {
        return Ok(Vec::new());
    }
    if k > cap {
        return Err(Error::WrongDegree(format!(
            "leg class of degree {k} exceeds the carried cap {cap}"
        )));
    }
    let monos = &monomials[k];
    let index: BTreeMap<&Vec<u32>, usize> =
        monos.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut b = vec![Q::zero(); monos.len()];
    for (e, c) in p.terms() {
        let pos = index.get(e).ok_or_else(|| {
            Error::Internal("leg class is not supported on the reduced monomials".into())
        })?;
        b[*pos] = c.clone();
    }
    let ids = &by_degree[k];
    let a: Mat = (0..monos.len())
        .map(|row| {
            ids.iter()
                .map(|&id| basis[id as usize].coeff(&monos[row]))
                .collect()
        })
        .collect();
    let x = linalg::solve(&a, &b).ok_or_else(|| {
        Error::NotInvariant("class is not invariant under the leg stabilizer".into())
    })?;
    Ok(ids
        .iter()
        .zip(x)
        .filter(|(_, c)| !c.is_zero())
        .map(|(&id, c)| (id, c))
        .collect())
}

impl LegAlgebra {
    fn new(rd: &RootDatum, mu: &Coweight, cap: usize) -> Result<LegAlgebra> {
        let coords = rd.coordinates;
        let active = if rd.family.in_quotient_by_e1() {
            coords - 1
        } else {
            coords
        };
        let d_mu = rd.flag_dimension(mu);
        let stab = rd.stabilizer_generators(mu);

        let mut basis: Vec<ExactPolynomial> = Vec::new();
        let mut degree_of: Vec<usize> = Vec::new();
        let mut by_degree: Vec<Vec<u16>> = Vec::with_capacity(cap + 1);
        let mut monomials: Vec<Vec<Vec<u32>>> = Vec::with_capacity(cap + 1);
        for k in 0..=cap {
            let monos = enumerate_exponents(coords, active, k);
            let gens: Vec<ExactPolynomial> = if k == 0 {
                vec![ExactPolynomial::one(coords)]
            } else if stab.is_empty() {
                monos
                    .iter()
                    .map(|e| ExactPolynomial::monomial(coords, e, Q::one()))
                    .collect()
            } else {
                // Coefficient vectors fixed by each stabilizer generator:
                // stack the matrices of (w − 1) on the degree-k monomial
                // space and take the common nullspace.
                let index: BTreeMap<&Vec<u32>, usize> =
                    monos.iter().enumerate().map(|(i, e)| (e, i)).collect();
                let mut rows: Mat = Vec::new();
                for w in &stab {
                    let mut block: Mat = vec![vec![Q::zero(); monos.len()]; monos.len()];
                    for (s, e) in monos.iter().enumerate() {
                        let m = ExactPolynomial::monomial(coords, e, Q::one());
                        let image = rd.reduce(&w.act(&m));
                        for (exps, c) in image.terms() {
                            let t = *index.get(exps).ok_or_else(|| {
                                Error::Internal(
                                    "stabilizer image leaves the reduced monomial space".into(),
                                )
                            })?;
                            block[t][s] += c;
                        }
                        block[s][s] -= Q::one();
                    }
                    rows.extend(block);
                }
                linalg::nullspace(&rows)
                    .into_iter()
                    .map(|v| {
                        let mut p = ExactPolynomial::zero(coords);
                        for (i, c) in v.iter().enumerate() {
                            if !c.is_zero() {
                                p = p.add(&ExactPolynomial::monomial(coords, &monos[i], c.clone()));
                            }
                        }
                        p
                    })
                    .collect()
            };
            let start = basis.len();
            by_degree.push((start..start + gens.len()).map(|i| i as u16).collect());
            for g in gens {
                basis.push(g);
                degree_of.push(k);
            }
            monomials.push(monos);
        }

        let mut mult: BTreeMap<(u16, u16), Vec<(u16, Q)>> = BTreeMap::new();
        for a in 0..basis.len() {
            for b in a..basis.len() {
                let k = degree_of[a] + degree_of[b];
                if k > cap {
                    continue;
                }
                let p = rd.reduce(&basis[a].mul(&basis[b]));
                let prods = express_in(&basis, &by_degree, &monomials, cap, k, &p)?;
                if a != b {
                    mult.insert((b as u16, a as u16), prods.clone());
                }
                mult.insert((a as u16, b as u16), prods);
            }
        }

        let mut integrals = vec![Q::zero(); basis.len()];
        if d_mu <= cap {
            for &id in &by_degree[d_mu] {
                let value = integrate_flag(rd, mu, &basis[id as usize])?;
                integrals[id as usize] = value.constant_term();
            }
        }

        let mut schubert = vec![0usize; d_mu + 1];
        for w in weyl_cosets(rd, mu)? {
            let len = rd
                .roots
                .iter()
                .filter(|alpha| {
                    covector_positive(alpha) && !covector_positive(&w.act_covector(alpha))
                })
                .count();
            if len > d_mu {
                return Err(Error::Internal(
                    "coset representative length exceeds the flag dimension".into(),
                ));
            }
            schubert[len] += 1;
        }

        Ok(LegAlgebra {
            mu: mu.clone(),
            d_mu,
            cap,
            basis,
            degree_of,
            by_degree,
            monomials,
            mult,
            integrals,
            schubert,
        })
    }

    fn express(&self, k: usize, p: &ExactPolynomial) -> Result<Vec<(u16, Q)>> {
        express_in(
            &self.basis,
            &self.by_degree,
            &self.monomials,
            self.cap,
            k,
            p,
        )
    }
}

// ---------------------------------------------------------------------------
// The ambient graded ring and its quotients.
// ---------------------------------------------------------------------------

/// A class in one model, stored sparsely over the monomial basis of its
/// ambient ring.  Elements are only comparable within the ring they came
/// from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassElement {
    terms: BTreeMap<usize, Q>,
}

impl ClassElement {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// self += c·x.
    pub fn add_scaled(&mut self, x: &ClassElement, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (&id, xc) in &x.terms {
            self.insert_add(id, xc * c);
        }
    }

    pub fn scaled(&self, c: &Q) -> ClassElement {
        let mut out = ClassElement::default();
        out.add_scaled(self, c);
        out
    }

    fn insert_add(&mut self, id: usize, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(id) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

/// One ambient monomial: a curve basis class per curve slot and a leg basis
/// class per leg.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct MonomialKey {
    curve: Vec<u8>,
    legs: Vec<u16>,
}

/// The ambient graded ring: `curve_slots` tensor factors of H*(X) and one
/// stabilizer-invariant algebra per leg, truncated above cohomological
/// degree `top` (the quotient rings vanish there, so the truncation is
/// lossless for them).
struct AmbientRing {
    coh: CurveCohomology,
    curve_slots: usize,
    legs: Vec<LegAlgebra>,
    top: i64,
    keys: Vec<MonomialKey>,
    index: BTreeMap<MonomialKey, usize>,
    degree: Vec<i64>,
    by_degree: Vec<Vec<usize>>,
    pos_in_degree: Vec<usize>,
}

impl AmbientRing {
    fn new(coh: CurveCohomology, curve_slots: usize, legs: Vec<LegAlgebra>, top: i64) -> Self {
        fn rec_legs(
            out: &mut Vec<(MonomialKey, i64)>,
            curve: &[u8],
            legv: &mut Vec<u16>,
            legs: &[LegAlgebra],
            slot: usize,
            used: i64,
            top: i64,
        ) {
            if slot == legs.len() {
                out.push((
                    MonomialKey {
                        curve: curve.to_vec(),
                        legs: legv.clone(),
                    },
                    used,
                ));
                return;
            }
            for (id, &d) in legs[slot].degree_of.iter().enumerate() {
                let add = 2 * d as i64;
                if used + add > top {
                    break; // degrees are weakly increasing in id
                }
                legv.push(id as u16);
                rec_legs(out, curve, legv, legs, slot + 1, used + add, top);
                legv.pop();
            }
        }
        #[allow(clippy::too_many_arguments)]
        fn rec_curve(
            out: &mut Vec<(MonomialKey, i64)>,
            coh: &CurveCohomology,
            curve_slots: usize,
            curve: &mut Vec<u8>,
            legs: &[LegAlgebra],
            slot: usize,
            used: i64,
            top: i64,
        ) {
            if slot == curve_slots {
                rec_legs(out, curve, &mut Vec::new(), legs, 0, used, top);
                return;
            }
            for id in 0..coh.dim() as u8 {
                let add = coh.class_degree(id);
                if used + add > top {
                    break; // class degrees are weakly increasing in id
                }
                curve.push(id);
                rec_curve(out, coh, curve_slots, curve, legs, slot + 1, used + add, top);
                curve.pop();
            }
        }

        let mut raw: Vec<(MonomialKey, i64)> = Vec::new();
        rec_curve(
            &mut raw,
            &coh,
            curve_slots,
            &mut Vec::new(),
            &legs,
            0,
            0,
            top,
        );
        raw.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

        let mut keys = Vec::with_capacity(raw.len());
        let mut degree = Vec::with_capacity(raw.len());
        let mut index = BTreeMap::new();
        let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); top as usize + 1];
        let mut pos_in_degree = Vec::with_capacity(raw.len());
        for (i, (key, d)) in raw.into_iter().enumerate() {
            index.insert(key.clone(), i);
            let block = &mut by_degree[d as usize];
            pos_in_degree.push(block.len());
            block.push(i);
            keys.push(key);
            degree.push(d);
        }

        AmbientRing {
            coh,
            curve_slots,
            legs,
            top,
            keys,
            index,
            degree,
            by_degree,
            pos_in_degree,
        }
    }

    fn unit_legs(&self) -> Vec<u16> {
        vec![0u16; self.legs.len()]
    }

    fn one(&self) -> ClassElement {
        let key = MonomialKey {
            curve: vec![0u8; self.curve_slots],
            legs: self.unit_legs(),
        };
        let mut out = ClassElement::default();
        out.insert_add(self.index[&key], Q::one());
        out
    }

    /// out += scale · (monomial a)·(monomial b).
    fn mul_basis(&self, a: usize, b: usize, out: &mut ClassElement, scale: &Q) {
        let ka = &self.keys[a];
        let kb = &self.keys[b];
        // Sign from commuting the odd curve classes of b past those of a.
        let mut parity = 0usize;
        for i in 0..self.curve_slots {
            if self.coh.class_degree(kb.curve[i]) % 2 == 1 {
                parity += (i + 1..self.curve_slots)
                    .filter(|&j| self.coh.class_degree(ka.curve[j]) % 2 == 1)
                    .count();
            }
        }
        let mut coeff = if parity.is_multiple_of(2) {
            scale.clone()
        } else {
            -scale.clone()
        };
        let mut curve = Vec::with_capacity(self.curve_slots);
        for i in 0..self.curve_slots {
            match self.coh.mul_basis(ka.curve[i], kb.curve[i]) {
                Some((id, c)) => {
                    curve.push(id);
                    coeff *= c;
                }
                None => return,
            }
        }
        let mut partial: Vec<(Vec<u16>, Q)> =
            vec![(Vec::with_capacity(self.legs.len()), coeff)];
        for (i, leg) in self.legs.iter().enumerate() {
            let Some(prods) = leg.mult.get(&(ka.legs[i], kb.legs[i])) else {
                return; // leg product exceeds the cap ⇒ total exceeds top
            };
            if prods.is_empty() {
                return;
            }
            let mut next = Vec::with_capacity(partial.len() * prods.len());
            for (vecp, c) in &partial {
                for (id, pc) in prods {
                    let mut v = vecp.clone();
                    v.push(*id);
                    next.push((v, c * pc));
                }
            }
            partial = next;
        }
        for (legv, c) in partial {
            let key = MonomialKey {
                curve: curve.clone(),
                legs: legv,
            };
            if let Some(&id) = self.index.get(&key) {
                out.insert_add(id, c);
            }
        }
    }

    fn mul(&self, x: &ClassElement, y: &ClassElement) -> ClassElement {
        let mut out = ClassElement::default();
        for (&a, ca) in &x.terms {
            for (&b, cb) in &y.terms {
                self.mul_basis(a, b, &mut out, &(ca * cb));
            }
        }
        out
    }

    fn frobenius(&self, x: &ClassElement) -> ClassElement {
        let mut out = ClassElement::default();
        for (&id, c) in &x.terms {
            let key = &self.keys[id];
            let leg_weight: i64 = key
                .legs
                .iter()
                .enumerate()
                .map(|(i, &l)| self.legs[i].degree_of[l as usize] as i64)
                .sum();
            let base = c * qpow(&self.coh.q, leg_weight);
            let mut partial: Vec<(Vec<u8>, Q)> =
                vec![(Vec::with_capacity(self.curve_slots), base)];
            for i in 0..self.curve_slots {
                let images = self.coh.frobenius_basis(key.curve[i]);
                let mut next = Vec::with_capacity(partial.len() * images.len());
                for (v, cc) in &partial {
                    for (im, imc) in &images {
                        let mut nv = v.clone();
                        nv.push(*im);
                        next.push((nv, cc * imc));
                    }
                }
                partial = next;
            }
            for (curve, cc) in partial {
                let nk = MonomialKey {
                    curve,
                    legs: key.legs.clone(),
                };
                let nid = *self
                    .index
                    .get(&nk)
                    .expect("Frobenius preserves the grading");
                out.insert_add(nid, cc);
            }
        }
        out
    }

    /// The class of an invariant polynomial placed at leg i.
    fn leg_class(&self, rd: &RootDatum, i: usize, f: &ExactPolynomial) -> Result<ClassElement> {
        let f = rd.reduce(f);
        let mut out = ClassElement::default();
        let unit_curve = vec![0u8; self.curve_slots];
        for (deg, comp) in f.homogeneous_components() {
            let k = deg as usize;
            for (id, c) in self.legs[i].express(k, &comp)? {
                let mut legs = self.unit_legs();
                legs[i] = id;
                let key = MonomialKey {
                    curve: unit_curve.clone(),
                    legs,
                };
                let gid = *self.index.get(&key).ok_or_else(|| {
                    Error::WrongDegree(format!(
                        "class degree {} exceeds the model truncation {}",
                        2 * k,
                        self.top
                    ))
                })?;
                out.insert_add(gid, c);
            }
        }
        Ok(out)
    }

    fn curve_slot_class(&self, slot: usize, class_id: u8) -> ClassElement {
        let mut curve = vec![0u8; self.curve_slots];
        curve[slot] = class_id;
        let key = MonomialKey {
            curve,
            legs: self.unit_legs(),
        };
        let mut out = ClassElement::default();
        out.insert_add(self.index[&key], Q::one());
        out
    }

    fn xi_slot(&self, slot: usize) -> ClassElement {
        self.curve_slot_class(slot, self.coh.xi())
    }

    /// Place a degree-two twist class on the ordered pair of curve slots
    /// (lo, hi).  On the diagonal (lo == hi) the class restricts to a
    /// multiple of ξ at that slot.
    fn xi_pair(&self, cls: &XiClass, lo: usize, hi: usize) -> ClassElement {
        assert!(lo <= hi && hi < self.curve_slots);
        if lo == hi {
            return self
                .xi_slot(lo)
                .scaled(&cls.diagonal_restriction(&self.coh));
        }
        let mut out = ClassElement::default();
        out.add_scaled(&self.xi_slot(hi), &cls.one_xi);
        out.add_scaled(&self.xi_slot(lo), &cls.xi_one);
        for (j, row) in cls.middle.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut curve = vec![0u8; self.curve_slots];
                curve[lo] = (j + 1) as u8;
                curve[hi] = (k + 1) as u8;
                let key = MonomialKey {
                    curve,
                    legs: self.unit_legs(),
                };
                out.insert_add(self.index[&key], c.clone());
            }
        }
        out
    }

    /// Graded dimensions of the free-module prediction: one curve factor per
    /// curve slot and one Schubert polynomial per leg.
    fn expected_dims(&self) -> Vec<usize> {
        let mut acc = vec![1usize];
        let curve_factor = {
            let mut f = vec![1usize, 0, 1];
            f[1] = 2 * self.coh.g;
            f
        };
        for _ in 0..self.curve_slots {
            acc = convolve_dims(&acc, &curve_factor);
        }
        for leg in &self.legs {
            let mut f = vec![0usize; 2 * leg.d_mu + 1];
            for (l, &count) in leg.schubert.iter().enumerate() {
                f[2 * l] = count;
            }
            acc = convolve_dims(&acc, &f);
        }
        acc.resize(self.top as usize + 1, 0);
        acc
    }

    /// Graded dimensions of the leg-only prediction (curve classes killed).
    fn expected_reduction_dims(&self) -> Vec<usize> {
        let mut acc = vec![1usize];
        for leg in &self.legs {
            let mut f = vec![0usize; 2 * leg.d_mu + 1];
            for (l, &count) in leg.schubert.iter().enumerate() {
                f[2 * l] = count;
            }
            acc = convolve_dims(&acc, &f);
        }
        acc.resize(self.top as usize + 1, 0);
        acc
    }
}

fn convolve_dims(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Reduced row-echelon span of the relation ideal in one degree.
struct DegreeSpan {
    rows: Mat,
    pivots: Vec<usize>,
}

struct QuotientModel {
    spans: Vec<DegreeSpan>,
    dims: Vec<usize>,
    /// Per degree: positions (within the degree block) of the surviving
    /// basis monomials.
    basis_positions: Vec<Vec<usize>>,
}

fn build_quotient(
    amb: &AmbientRing,
    relations: &[&ClassElement],
    kill_positive_curve: bool,
) -> QuotientModel {
    let top = amb.top as usize;
    let mut spans = Vec::with_capacity(top + 1);
    let mut dims = Vec::with_capacity(top + 1);
    let mut basis_positions = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let width = amb.by_degree[k].len();
        let mut rows: Mat = Vec::new();
        for rel in relations {
            let Some((&first, _)) = rel.terms.iter().next() else {
                continue;
            };
            let dgen = amb.degree[first] as usize;
            if dgen > k {
                continue;
            }
            for &m in &amb.by_degree[k - dgen] {
                let mut prod = ClassElement::default();
                for (&t, c) in &rel.terms {
                    amb.mul_basis(m, t, &mut prod, c);
                }
                if prod.is_zero() {
                    continue;
                }
                let mut row = vec![Q::zero(); width];
                for (&id, c) in &prod.terms {
                    row[amb.pos_in_degree[id]] = c.clone();
                }
                rows.push(row);
            }
        }
        if kill_positive_curve {
            for (pos, &id) in amb.by_degree[k].iter().enumerate() {
                if amb.keys[id].curve.iter().any(|&c| c != 0) {
                    let mut row = vec![Q::zero(); width];
                    row[pos] = Q::one();
                    rows.push(row);
                }
            }
        }
        let pivots = linalg::rref(&mut rows);
        rows.truncate(pivots.len());
        let surviving: Vec<usize> = (0..width).filter(|p| !pivots.contains(p)).collect();
        dims.push(surviving.len());
        basis_positions.push(surviving);
        spans.push(DegreeSpan { rows, pivots });
    }
    QuotientModel {
        spans,
        dims,
        basis_positions,
    }
}

impl QuotientModel {
    /// Canonical representative of a class modulo the relation span.
    fn normal_form(&self, amb: &AmbientRing, x: &ClassElement) -> ClassElement {
        let mut by_deg: BTreeMap<usize, Vec<Q>> = BTreeMap::new();
        for (&id, c) in &x.terms {
            let k = amb.degree[id] as usize;
            let v = by_deg
                .entry(k)
                .or_insert_with(|| vec![Q::zero(); amb.by_degree[k].len()]);
            v[amb.pos_in_degree[id]] += c;
        }
        let mut out = ClassElement::default();
        for (k, mut v) in by_deg {
            let span = &self.spans[k];
            for (row, &p) in span.rows.iter().zip(&span.pivots) {
                let c = std::mem::replace(&mut v[p], Q::zero());
                if !c.is_zero() {
                    for (j, rv) in row.iter().enumerate() {
                        if j != p && !rv.is_zero() {
                            v[j] -= &c * rv;
                        }
                    }
                }
            }
            for (pos, c) in v.into_iter().enumerate() {
                if !c.is_zero() {
                    out.insert_add(amb.by_degree[k][pos], c);
                }
            }
        }
        out
    }

    /// Coordinates of a homogeneous class on the surviving monomial basis of
    /// one degree.
    fn coordinates(&self, amb: &AmbientRing, x: &ClassElement, k: usize) -> Vec<Q> {
        let nf = self.normal_form(amb, x);
        self.basis_positions[k]
            .iter()
            .map(|&pos| {
                let id = amb.by_degree[k][pos];
                nf.terms.get(&id).cloned().unwrap_or_else(Q::zero)
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Relation classes.
// ---------------------------------------------------------------------------

/// Construction summary of one relation class.
#[derive(Debug, Clone)]
pub struct RelationSummary {
    pub leg: usize,
    pub invariant: String,
    pub coh_degree: i64,
    /// The class is a Frobenius eigenvector of eigenvalue q^weight (asserted
    /// during construction).
    pub frobenius_weight: i64,
    pub terms: usize,
}

struct TwistCache {
    xi: BTreeMap<i64, XiClass>,
    star: Option<(XiClass, XiClass)>, // (weight-one, weight-zero)
}

impl TwistCache {
    fn new() -> Self {
        TwistCache {
            xi: BTreeMap::new(),
            star: None,
        }
    }

    fn xi_at(&mut self, coh: &CurveCohomology, d: i64) -> Result<XiClass> {
        if let Some(x) = self.xi.get(&d) {
            return Ok(x.clone());
        }
        let x = xi_class_from(coh, d)?;
        self.xi.insert(d, x.clone());
        Ok(x)
    }

    fn stars(&mut self, coh: &CurveCohomology) -> Result<(XiClass, XiClass)> {
        if self.star.is_none() {
            self.star = Some((xi_star1_from(coh)?, xi_star0_from(coh)?));
        }
        Ok(self.star.clone().unwrap())
    }
}

fn add_coweights(a: &Coweight, b: &Coweight) -> Coweight {
    Coweight::new(a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect())
}

/// The relation class attached to leg i and a homogeneous Weyl invariant f.
///
/// For deg f ≥ 2 it is
///   [f]_i − Σ_{i′≥i} Ξ_d(i,i′)·δ_{i′}(f) + Σ_{i′<i} Ξ_{1−d}(i′,i)·δ_{i′}(f)
/// with δ_{i′}(f) = [∂_{μ_{i′}}f]_{i′} + (1−g)·ξ_{i′}·[∂²_{μ_{i′}}f]_{i′};
/// for deg f = 1 (torus factors) the twists are replaced by the weight-one
/// and weight-zero reductive classes, with the extra correction
/// −⟨ω + μ₁ + … + μ_{i−1}, f⟩·ξ_i for the component shift ω.
fn relation_class(
    rd: &RootDatum,
    amb: &AmbientRing,
    omega: &Coweight,
    cache: &mut TwistCache,
    i: usize,
    f: &ExactPolynomial,
) -> Result<ClassElement> {
    let f = rd.reduce(f);
    if f.is_zero() || !f.is_homogeneous() {
        return Err(Error::InvalidInput(
            "relation input must be a nonzero homogeneous invariant".into(),
        ));
    }
    if !rd.is_weyl_invariant(&f) {
        return Err(Error::NotInvariant(
            "relation input is not Weyl-invariant".into(),
        ));
    }
    let d = f.degree();
    let r = amb.legs.len();
    let mut acc = amb.leg_class(rd, i, &f)?;
    if d == 1 {
        let (star1, star0) = cache.stars(&amb.coh)?;
        let pair = |mu: &Coweight| partial_derivative(&f, mu).constant_term();
        for ip in i..r {
            let c = pair(&amb.legs[ip].mu);
            if !c.is_zero() {
                acc.add_scaled(&amb.xi_pair(&star1, i, ip), &(-c));
            }
        }
        for ip in 0..i {
            let c = pair(&amb.legs[ip].mu);
            if !c.is_zero() {
                acc.add_scaled(&amb.xi_pair(&star0, ip, i), &c);
            }
        }
        let mut shift = omega.clone();
        for ip in 0..i {
            shift = add_coweights(&shift, &amb.legs[ip].mu);
        }
        let c = pair(&shift);
        if !c.is_zero() {
            acc.add_scaled(&amb.xi_slot(i), &(-c));
        }
    } else {
        let genus_term = qi(1 - amb.coh.g as i64);
        let mut deltas = Vec::with_capacity(r);
        for ip in 0..r {
            let d1 = partial_derivative(&f, &amb.legs[ip].mu);
            let mut delta = amb.leg_class(rd, ip, &d1)?;
            if !genus_term.is_zero() {
                let d2 = partial_derivative(&d1, &amb.legs[ip].mu);
                if !d2.is_zero() {
                    let term = amb.mul(&amb.xi_slot(ip), &amb.leg_class(rd, ip, &d2)?);
                    delta.add_scaled(&term, &genus_term);
                }
            }
            deltas.push(delta);
        }
        let xi_d = cache.xi_at(&amb.coh, d)?;
        let xi_comp = cache.xi_at(&amb.coh, 1 - d)?;
        for (ip, delta) in deltas.iter().enumerate() {
            if ip >= i {
                let t = amb.mul(&amb.xi_pair(&xi_d, i, ip), delta);
                acc.add_scaled(&t, &-Q::one());
            } else {
                let t = amb.mul(&amb.xi_pair(&xi_comp, ip, i), delta);
                acc.add_scaled(&t, &Q::one());
            }
        }
    }
    // Every relation class must be a Frobenius eigenvector of weight q^d.
    let expect = acc.scaled(&qpow(&amb.coh.q, d));
    if amb.frobenius(&acc) != expect {
        return Err(Error::Internal(format!(
            "relation class of degree {d} is not a Frobenius eigenvector"
        )));
    }
    Ok(acc)
}

fn build_relations(
    rd: &RootDatum,
    amb: &AmbientRing,
    omega: &Coweight,
) -> Result<Vec<(RelationSummary, ClassElement)>> {
    let mut cache = TwistCache::new();
    let mut out = Vec::new();
    for inv in &rd.fundamental_invariants {
        for i in 0..amb.legs.len() {
            let class = relation_class(rd, amb, omega, &mut cache, i, &inv.poly)?;
            out.push((
                RelationSummary {
                    leg: i,
                    invariant: inv.name.clone(),
                    coh_degree: inv.coh_degree,
                    frobenius_weight: inv.coh_degree / 2,
                    terms: class.num_terms(),
                },
                class,
            ));
        }
    }
    Ok(out)
}

fn validate_legs(rd: &RootDatum, mus: &[Coweight]) -> Result<()> {
    let mut total = Coweight::zero(rd.coordinates);
    for (i, mu) in mus.iter().enumerate() {
        if mu.len() != rd.coordinates {
            return Err(Error::InvalidInput(format!(
                "leg {i}: expected {} coordinates, got {}",
                rd.coordinates,
                mu.len()
            )));
        }
        if !rd.in_coweight_lattice(mu) {
            return Err(Error::InvalidInput(format!(
                "leg {i}: not in the coweight lattice"
            )));
        }
        if !rd.is_minuscule(mu) {
            return Err(Error::NotMinuscule(format!("leg {i}")));
        }
        total = add_coweights(&total, mu);
    }
    if !rd.in_coroot_lattice(&total) {
        return Err(Error::Inadmissible(
            "the leg coweights do not sum into the coroot lattice".into(),
        ));
    }
    Ok(())
}

/// Build the relation classes for a leg tuple without forming the quotient.
/// Each class is checked to be a Frobenius eigenvector of its weight.
pub fn relation_generators(
    rd: &RootDatum,
    mus: &[Coweight],
    curve: &CurveData,
    omega: &Coweight,
) -> Result<Vec<RelationSummary>> {
    validate_legs(rd, mus)?;
    if omega.len() != rd.coordinates {
        return Err(Error::InvalidInput(format!(
            "component shift: expected {} coordinates",
            rd.coordinates
        )));
    }
    let coh = CurveCohomology::build(curve)?;
    let cap = mus.len() + mus.iter().map(|mu| rd.flag_dimension(mu)).sum::<usize>();
    let legs = mus
        .iter()
        .map(|mu| LegAlgebra::new(rd, mu, cap))
        .collect::<Result<Vec<_>>>()?;
    let amb = AmbientRing::new(coh, mus.len(), legs, 2 * cap as i64);
    Ok(build_relations(rd, &amb, omega)?
        .into_iter()
        .map(|(s, _)| s)
        .collect())
}

// ---------------------------------------------------------------------------
// The split model.
// ---------------------------------------------------------------------------

/// The split tautological ring of a minuscule leg tuple over one curve:
/// the graded quotient, its free-module and flag-fiber structure, and the
/// volume functional on the top line.
pub struct PhantomRing {
    rd: RootDatum,
    amb: AmbientRing,
    model: QuotientModel,
    omega: Coweight,
    pub relations: Vec<RelationSummary>,
    /// Graded dimensions, indexed by cohomological degree 0..=top.
    pub dims: Vec<usize>,
    pub expected_dims: Vec<usize>,
    /// Graded dimensions after also collapsing the positive-degree curve
    /// classes; matches the product of the flag Poincaré polynomials.
    pub reduction_dims: Vec<usize>,
    pub dimension: usize,
    pub top_degree: i64,
    pub dim_bun: i64,
    /// The leg-free volume: q^{dim Bun}·(regularized ζ-product).
    pub vol_constant: Q,
    /// Volume of the surviving top basis monomial.
    top_unit_volume: Q,
    /// A curve-point-full top monomial calibrating the volume functional.
    calibration_key: usize,
}

fn calibrate_volume(
    amb: &AmbientRing,
    model: &QuotientModel,
    vol_constant: &Q,
) -> Result<(Q, usize)> {
    let top = amb.top as usize;
    if model.dims[top] != 1 {
        return Err(Error::Internal(
            "the top graded piece of the quotient is not a line".into(),
        ));
    }
    for &id in &amb.by_degree[top] {
        let key = &amb.keys[id];
        if key.curve.iter().any(|&c| c != amb.coh.xi()) {
            continue;
        }
        let mut integral = Q::one();
        let mut usable = true;
        for (i, &l) in key.legs.iter().enumerate() {
            let leg = &amb.legs[i];
            if leg.degree_of[l as usize] != leg.d_mu || leg.integrals[l as usize].is_zero() {
                usable = false;
                break;
            }
            integral *= &leg.integrals[l as usize];
        }
        if !usable {
            continue;
        }
        let mut elem = ClassElement::default();
        elem.insert_add(id, Q::one());
        let coords = model.coordinates(amb, &elem, top);
        if coords[0].is_zero() {
            continue;
        }
        return Ok((vol_constant * integral / &coords[0], id));
    }
    Err(Error::Internal(
        "no point-full top monomial with nonzero flag integral represents the top line".into(),
    ))
}

/// Build the split model: validate the legs, assemble the relation classes,
/// form the graded quotient, and check it is free over the curve classes
/// with flag-cohomology fibers.
pub fn build_phantom(
    rd: &RootDatum,
    mus: &[Coweight],
    curve: &CurveData,
    omega: &Coweight,
) -> Result<PhantomRing> {
    validate_legs(rd, mus)?;
    if omega.len() != rd.coordinates {
        return Err(Error::InvalidInput(format!(
            "component shift: expected {} coordinates",
            rd.coordinates
        )));
    }
    let coh = CurveCohomology::build(curve)?;
    let cap = mus.len() + mus.iter().map(|mu| rd.flag_dimension(mu)).sum::<usize>();
    let top = 2 * cap as i64;
    let legs = mus
        .iter()
        .map(|mu| LegAlgebra::new(rd, mu, cap))
        .collect::<Result<Vec<_>>>()?;
    let amb = AmbientRing::new(coh, mus.len(), legs, top);

    let built = build_relations(rd, &amb, omega)?;
    let relations: Vec<RelationSummary> = built.iter().map(|(s, _)| s.clone()).collect();
    let classes: Vec<&ClassElement> = built.iter().map(|(_, c)| c).collect();

    for (summary, class) in &built {
        if 2 * class_degree_of(&amb, class).unwrap_or(0) > 2 * top {
            return Err(Error::Internal(format!(
                "relation for {} exceeds the truncation",
                summary.invariant
            )));
        }
    }

    let model = build_quotient(&amb, &classes, false);
    let expected_dims = amb.expected_dims();
    if model.dims != expected_dims {
        return Err(Error::DimensionMismatch(format!(
            "the quotient is not free over the curve classes: graded dimensions {:?} differ from the predicted {:?}",
            model.dims, expected_dims
        )));
    }

    let reduction = build_quotient(&amb, &classes, true);
    let expected_reduction = amb.expected_reduction_dims();
    if reduction.dims != expected_reduction {
        return Err(Error::DimensionMismatch(format!(
            "collapsing the curve classes does not leave the flag cohomology: {:?} differ from {:?}",
            reduction.dims, expected_reduction
        )));
    }

    let (vol_constant, dim_bun) = if rd.family == Family::Gl {
        let v = volume_gln(rd.rank, 0, &[], &[], curve)?;
        (v.value, v.dim_bun)
    } else {
        let v = volume_split(rd, &[], curve, false)?;
        (v.value, v.dim_bun)
    };
    let (top_unit_volume, calibration_key) = calibrate_volume(&amb, &model, &vol_constant)?;

    let dimension = model.dims.iter().sum();
    Ok(PhantomRing {
        rd: rd.clone(),
        dims: model.dims.clone(),
        reduction_dims: reduction.dims,
        amb,
        model,
        omega: omega.clone(),
        relations,
        expected_dims,
        dimension,
        top_degree: top,
        dim_bun,
        vol_constant,
        top_unit_volume,
        calibration_key,
    })
}

fn class_degree_of(amb: &AmbientRing, x: &ClassElement) -> Option<i64> {
    x.terms.keys().next().map(|&id| amb.degree[id])
}

impl PhantomRing {
    pub fn one(&self) -> ClassElement {
        self.amb.one()
    }

    /// The class of an invariant polynomial placed at leg i.
    pub fn leg_class(&self, i: usize, f: &ExactPolynomial) -> Result<ClassElement> {
        if i >= self.amb.legs.len() {
            return Err(Error::InvalidInput(format!("no leg {i}")));
        }
        self.amb.leg_class(&self.rd, i, f)
    }

    /// The point class ξ of the curve factor at one slot.
    pub fn point_class(&self, slot: usize) -> ClassElement {
        self.amb.xi_slot(slot)
    }

    /// The weight-d twisted diagonal class placed on curve slots (lo, hi).
    pub fn twist_class(&self, d: i64, lo: usize, hi: usize) -> Result<ClassElement> {
        if lo > hi || hi >= self.amb.curve_slots {
            return Err(Error::InvalidInput(
                "twist slots must satisfy lo ≤ hi < slot count".into(),
            ));
        }
        Ok(self.amb.xi_pair(&xi_class_from(&self.amb.coh, d)?, lo, hi))
    }

    pub fn mul(&self, x: &ClassElement, y: &ClassElement) -> ClassElement {
        self.amb.mul(x, y)
    }

    pub fn frobenius(&self, x: &ClassElement) -> ClassElement {
        self.amb.frobenius(x)
    }

    pub fn normal_form(&self, x: &ClassElement) -> ClassElement {
        self.model.normal_form(&self.amb, x)
    }

    /// Whether a class lies in the relation ideal.
    pub fn is_trivial(&self, x: &ClassElement) -> bool {
        self.normal_form(x).is_zero()
    }

    /// Coordinates on the surviving monomial basis of one degree.
    pub fn class_coordinates(&self, x: &ClassElement, degree: i64) -> Vec<Q> {
        self.model.coordinates(&self.amb, x, degree as usize)
    }

    /// The relation class for an arbitrary homogeneous invariant at one leg
    /// (the stored generators are these classes at the fundamental
    /// invariants).
    pub fn relation(&self, leg: usize, f: &ExactPolynomial) -> Result<ClassElement> {
        if leg >= self.amb.legs.len() {
            return Err(Error::InvalidInput(format!("no leg {leg}")));
        }
        let mut cache = TwistCache::new();
        relation_class(&self.rd, &self.amb, &self.omega, &mut cache, leg, f)
    }

    /// The calibration monomial: every curve slot at ξ, every leg at a
    /// top-degree basis class of nonzero flag integral.
    pub fn canonical_top(&self) -> ClassElement {
        let mut out = ClassElement::default();
        out.insert_add(self.calibration_key, Q::one());
        out
    }

    /// The volume functional: vanishes below the top degree, and on the top
    /// line returns the leg-free volume times the product of flag integrals
    /// of the representative.
    pub fn volume(&self, x: &ClassElement) -> Q {
        let nf = self.normal_form(x);
        let mut acc = Q::zero();
        for (&id, c) in &nf.terms {
            if self.amb.degree[id] == self.top_degree {
                acc += c * &self.top_unit_volume;
            }
        }
        acc
    }

    /// Matrix of Frobenius on the quotient in one degree (column convention).
    pub fn frobenius_matrix(&self, degree: i64) -> Mat {
        let k = degree as usize;
        let n = self.dims[k];
        let mut cols = Vec::with_capacity(n);
        for &pos in &self.model.basis_positions[k] {
            let id = self.amb.by_degree[k][pos];
            let mut elem = ClassElement::default();
            elem.insert_add(id, Q::one());
            cols.push(self.model.coordinates(&self.amb, &self.amb.frobenius(&elem), k));
        }
        (0..n)
            .map(|row| (0..n).map(|col| cols[col][row].clone()).collect())
            .collect()
    }

    /// Direct product-formula volume of a monomial whose curve slots are all
    /// at ξ and whose legs are all in top degree; None otherwise.  Used to
    /// cross-check that the normal-form route factorizes.
    pub fn monomial_volumes(&self) -> Vec<(ClassElement, Q)> {
        let top = self.top_degree as usize;
        let mut out = Vec::new();
        for &id in &self.amb.by_degree[top] {
            let key = &self.amb.keys[id];
            if key.curve.iter().any(|&c| c != self.amb.coh.xi()) {
                continue;
            }
            let mut integral = Q::one();
            let mut usable = true;
            for (i, &l) in key.legs.iter().enumerate() {
                let leg = &self.amb.legs[i];
                if leg.degree_of[l as usize] != leg.d_mu {
                    usable = false;
                    break;
                }
                integral *= &leg.integrals[l as usize];
            }
            if !usable {
                continue;
            }
            let mut elem = ClassElement::default();
            elem.insert_add(id, Q::one());
            out.push((elem, &self.vol_constant * integral));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Duality report.
// ---------------------------------------------------------------------------

/// Gram data of the multiplication pairing into the top line, one block per
/// complementary pair of degrees.
#[derive(Debug, Clone)]
pub struct DualityReport {
    pub top_degree: i64,
    pub paired_degrees: Vec<i64>,
    pub blocks: Vec<Mat>,
    pub ranks: Vec<usize>,
    pub block_dims: Vec<(usize, usize)>,
    pub perfect: bool,
    pub vol_constant: Q,
    /// Volume of the calibration top monomial.
    pub vol_top: Q,
}

/// Compute the pairing (a, b) ↦ vol(a·b) on the quotient basis for every
/// complementary pair of degrees and report whether every block is
/// invertible.
pub fn duality_report(ring: &PhantomRing) -> DualityReport {
    let top = ring.top_degree;
    let mut paired_degrees = Vec::new();
    let mut blocks = Vec::new();
    let mut ranks = Vec::new();
    let mut block_dims = Vec::new();
    let mut perfect = true;
    for k in 0..=top / 2 {
        let rows = ring.quotient_basis(k);
        let cols = ring.quotient_basis(top - k);
        let block: Mat = rows
            .iter()
            .map(|a| {
                cols.iter()
                    .map(|b| ring.volume(&ring.mul(a, b)))
                    .collect()
            })
            .collect();
        let rank = linalg::rank(&block);
        perfect &= rows.len() == cols.len() && rank == rows.len();
        paired_degrees.push(k);
        ranks.push(rank);
        block_dims.push((rows.len(), cols.len()));
        blocks.push(block);
    }
    DualityReport {
        top_degree: top,
        paired_degrees,
        blocks,
        ranks,
        block_dims,
        perfect,
        vol_constant: ring.vol_constant.clone(),
        vol_top: ring.volume(&ring.canonical_top()),
    }
}

impl PhantomRing {
    /// The surviving monomial basis of one degree, as classes.
    pub fn quotient_basis(&self, degree: i64) -> Vec<ClassElement> {
        let k = degree as usize;
        self.model.basis_positions[k]
            .iter()
            .map(|&pos| {
                let mut elem = ClassElement::default();
                elem.insert_add(self.amb.by_degree[k][pos], Q::one());
                elem
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// The collapsed model over a Galois cover.
// ---------------------------------------------------------------------------

/// The collapsed tautological ring for legs indexed by Galois elements of a
/// covering curve: the curve factor degenerates to ℚ[ξ]/(ξ²), and the
/// relation constants are character-weighted logarithmic derivatives of the
/// covering L-functions.
pub struct SigmaRing {
    rd: RootDatum,
    amb: AmbientRing,
    model: QuotientModel,
    group: FiniteGroupData,
    sigma_idx: Vec<usize>,
    rep_row: Vec<usize>,
    artin: ArtinLSystem,
    pub relations: Vec<RelationSummary>,
    pub dims: Vec<usize>,
    pub expected_dims: Vec<usize>,
    pub reduction_dims: Vec<usize>,
    pub dimension: usize,
    pub top_degree: i64,
    pub dim_bun: i64,
    /// q^{dim Bun}·∏_j ζ_X(d_j) over the fundamental degrees.
    pub vol_constant: Q,
    top_unit_volume: Q,
    calibration_key: usize,
}

fn c_pair_value(
    group: &FiniteGroupData,
    sigma_idx: &[usize],
    rep_row: &[usize],
    artin: &ArtinLSystem,
    i: usize,
    ip: usize,
    d: i64,
) -> Result<Q> {
    let char_theta = |g: usize, dd: i64| -> Result<Q> {
        let mut acc = Q::zero();
        for (k, &row) in rep_row.iter().enumerate() {
            let w = group.chi(row, group.inverse(g));
            if !w.is_zero() {
                acc += &w * artin.log_derivative(k, dd)?;
            }
        }
        Ok(acc)
    };
    if ip >= i {
        char_theta(group.product(group.inverse(sigma_idx[i]), sigma_idx[ip]), d)
    } else {
        Ok(-char_theta(
            group.product(group.inverse(sigma_idx[ip]), sigma_idx[i]),
            1 - d,
        )?)
    }
}

#[allow(clippy::too_many_arguments)]
fn sigma_relation_class(
    rd: &RootDatum,
    amb: &AmbientRing,
    group: &FiniteGroupData,
    sigma_idx: &[usize],
    rep_row: &[usize],
    artin: &ArtinLSystem,
    i: usize,
    f: &ExactPolynomial,
) -> Result<ClassElement> {
    let f = rd.reduce(f);
    if f.is_zero() || !f.is_homogeneous() {
        return Err(Error::InvalidInput(
            "relation input must be a nonzero homogeneous invariant".into(),
        ));
    }
    if !rd.is_weyl_invariant(&f) {
        return Err(Error::NotInvariant(
            "relation input is not Weyl-invariant".into(),
        ));
    }
    let d = f.degree();
    if d < 2 {
        return Err(Error::WrongDegree(
            "collapsed relations need degree at least two".into(),
        ));
    }
    let mut acc = amb.leg_class(rd, i, &f)?;
    let xi = amb.xi_slot(0);
    for ip in 0..amb.legs.len() {
        let c = c_pair_value(group, sigma_idx, rep_row, artin, i, ip, d)?;
        if c.is_zero() {
            continue;
        }
        let dp = partial_derivative(&f, &amb.legs[ip].mu);
        let term = amb.mul(&xi, &amb.leg_class(rd, ip, &dp)?);
        acc.add_scaled(&term, &(-c));
    }
    let expect = acc.scaled(&qpow(&amb.coh.q, d));
    if amb.frobenius(&acc) != expect {
        return Err(Error::Internal(format!(
            "collapsed relation class of degree {d} is not a Frobenius eigenvector"
        )));
    }
    Ok(acc)
}

/// Build the collapsed model: semisimple family, legs indexed by Galois
/// elements of the covering described by the Artin system.
pub fn build_phantom_sigma(
    rd: &RootDatum,
    mus: &[Coweight],
    sigma: &[String],
    artin: &ArtinLSystem,
) -> Result<SigmaRing> {
    if rd
        .fundamental_invariants
        .iter()
        .any(|inv| inv.coh_degree < 4)
    {
        return Err(Error::UnsupportedFamily(format!(
            "{}: the collapsed model needs every fundamental degree at least two",
            rd.family.label()
        )));
    }
    if mus.is_empty() {
        return Err(Error::InvalidInput("at least one leg is required".into()));
    }
    if sigma.len() != mus.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} Galois elements, got {}",
            mus.len(),
            sigma.len()
        )));
    }
    validate_legs(rd, mus)?;
    let group = group_by_name(&artin.group)?;
    let sigma_idx: Vec<usize> = sigma
        .iter()
        .map(|name| {
            group.element_by_name(name).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "\"{name}\" is not an element of {}",
                    group.label
                ))
            })
        })
        .collect::<Result<_>>()?;
    let rep_row: Vec<usize> = artin
        .reps
        .iter()
        .map(|rep| {
            let row = group
                .irrep_names
                .iter()
                .position(|n| *n == rep.name)
                .ok_or_else(|| {
                    Error::InconsistentData(format!(
                        "L-factor \"{}\" does not match an irreducible character of {}",
                        rep.name, group.label
                    ))
                })?;
            if group.dim(row) != rep.dim as i64 {
                return Err(Error::InconsistentData(format!(
                    "L-factor \"{}\" has dimension {}, character table says {}",
                    rep.name,
                    rep.dim,
                    group.dim(row)
                )));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let q = qi(artin.q as i64);
    let cap = 1 + mus.iter().map(|mu| rd.flag_dimension(mu)).sum::<usize>();
    let top = 2 * cap as i64;
    let legs = mus
        .iter()
        .map(|mu| LegAlgebra::new(rd, mu, cap))
        .collect::<Result<Vec<_>>>()?;
    let amb = AmbientRing::new(CurveCohomology::point_model(q.clone()), 1, legs, top);

    let mut relations = Vec::new();
    let mut classes = Vec::new();
    for inv in &rd.fundamental_invariants {
        for i in 0..mus.len() {
            let class =
                sigma_relation_class(rd, &amb, &group, &sigma_idx, &rep_row, artin, i, &inv.poly)?;
            relations.push(RelationSummary {
                leg: i,
                invariant: inv.name.clone(),
                coh_degree: inv.coh_degree,
                frobenius_weight: inv.coh_degree / 2,
                terms: class.num_terms(),
            });
            classes.push(class);
        }
    }
    let class_refs: Vec<&ClassElement> = classes.iter().collect();
    let model = build_quotient(&amb, &class_refs, false);
    let expected_dims = amb.expected_dims();
    if model.dims != expected_dims {
        return Err(Error::DimensionMismatch(format!(
            "the collapsed quotient is not free over ℚ[ξ]/(ξ²): graded dimensions {:?} differ from the predicted {:?}",
            model.dims, expected_dims
        )));
    }
    let reduction = build_quotient(&amb, &class_refs, true);
    let expected_reduction = amb.expected_reduction_dims();
    if reduction.dims != expected_reduction {
        return Err(Error::DimensionMismatch(format!(
            "collapsing ξ does not leave the flag cohomology: {:?} differ from {:?}",
            reduction.dims, expected_reduction
        )));
    }

    let zeta_x = artin.zeta_product()?;
    let g_x = artin.g_x()? as i64;
    let dim_bun = (g_x - 1) * rd.dim_g;
    let mut vol_constant = qpow(&q, dim_bun);
    for inv in &rd.fundamental_invariants {
        vol_constant *= zeta_x.value_at_s(inv.coh_degree / 2)?;
    }
    let (top_unit_volume, calibration_key) = calibrate_volume(&amb, &model, &vol_constant)?;

    let dimension = model.dims.iter().sum();
    Ok(SigmaRing {
        rd: rd.clone(),
        dims: model.dims.clone(),
        reduction_dims: reduction.dims,
        amb,
        model,
        group,
        sigma_idx,
        rep_row,
        artin: artin.clone(),
        relations,
        expected_dims,
        dimension,
        top_degree: top,
        dim_bun,
        vol_constant,
        top_unit_volume,
        calibration_key,
    })
}

impl SigmaRing {
    pub fn one(&self) -> ClassElement {
        self.amb.one()
    }

    /// The pair constant c_{i,i′}(d) of this leg tuple.
    pub fn c_pair(&self, i: usize, ip: usize, d: i64) -> Result<Q> {
        c_pair_value(
            &self.group,
            &self.sigma_idx,
            &self.rep_row,
            &self.artin,
            i,
            ip,
            d,
        )
    }

    pub fn leg_class(&self, i: usize, f: &ExactPolynomial) -> Result<ClassElement> {
        if i >= self.amb.legs.len() {
            return Err(Error::InvalidInput(format!("no leg {i}")));
        }
        self.amb.leg_class(&self.rd, i, f)
    }

    /// The point class ξ of the base factor.
    pub fn point_class(&self) -> ClassElement {
        self.amb.xi_slot(0)
    }

    pub fn mul(&self, x: &ClassElement, y: &ClassElement) -> ClassElement {
        self.amb.mul(x, y)
    }

    pub fn normal_form(&self, x: &ClassElement) -> ClassElement {
        self.model.normal_form(&self.amb, x)
    }

    pub fn is_trivial(&self, x: &ClassElement) -> bool {
        self.normal_form(x).is_zero()
    }

    /// The collapsed relation class for an arbitrary invariant of degree ≥ 2.
    pub fn relation(&self, leg: usize, f: &ExactPolynomial) -> Result<ClassElement> {
        if leg >= self.amb.legs.len() {
            return Err(Error::InvalidInput(format!("no leg {leg}")));
        }
        sigma_relation_class(
            &self.rd,
            &self.amb,
            &self.group,
            &self.sigma_idx,
            &self.rep_row,
            &self.artin,
            leg,
            f,
        )
    }

    pub fn canonical_top(&self) -> ClassElement {
        let mut out = ClassElement::default();
        out.insert_add(self.calibration_key, Q::one());
        out
    }

    /// The volume functional on the collapsed ring.
    pub fn volume(&self, x: &ClassElement) -> Q {
        let nf = self.normal_form(x);
        let mut acc = Q::zero();
        for (&id, c) in &nf.terms {
            if self.amb.degree[id] == self.top_degree {
                acc += c * &self.top_unit_volume;
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Tests.
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::Sign;
    use crate::lfunctions::{
        build_artin_system, curve_elliptic_f4, curve_p1_f2, log_derivative_trace_route,
    };
    use crate::num::qr;
    use crate::volume::volume_colmez;
    use crate::weyl_poly::build_root_datum;

    fn pgl2() -> RootDatum {
        build_root_datum(Family::Pgl, 2).unwrap()
    }

    fn pgl2_mu() -> Coweight {
        Coweight::new(vec![qr(1, 2), qr(-1, 2)])
    }

    fn zero2() -> Coweight {
        Coweight::zero(2)
    }

    fn z2_cover_json() -> serde_json::Value {
        serde_json::json!({
            "group": "z2",
            "q": 2,
            "gY": 2,
            "reps": [
                {"name": "triv", "dim": 1, "numerator": ["1", "0", "-4", "0", "4"]},
                {"name": "sgn", "dim": 1, "numerator": ["1", "0", "2"]}
            ]
        })
    }

    fn trivial_cover_json() -> serde_json::Value {
        serde_json::json!({
            "group": "triv",
            "q": 2,
            "gY": 0,
            "reps": [
                {"name": "triv", "dim": 1, "numerator": ["1"]}
            ]
        })
    }

    // -- twisted diagonal classes ------------------------------------------

    #[test]
    fn twist_class_on_rational_curve_matches_hand_values() {
        let curve = curve_p1_f2();
        let coh = CurveCohomology::build(&curve).unwrap();
        let xi2 = xi_class(&curve, 2).unwrap();
        assert_eq!(xi2.one_xi, qr(1, 3));
        assert_eq!(xi2.xi_one, qi(1));
        assert!(xi2.middle.is_empty());
        // Three routes to the diagonal restriction.
        let diag = xi2.diagonal_restriction(&coh);
        assert_eq!(diag, qr(4, 3));
        assert_eq!(diag, log_derivative_trace_route(&curve, 2).unwrap());

        assert!(matches!(
            xi_class(&curve, 0),
            Err(Error::PoleOrZero(_))
        ));
        assert!(matches!(
            xi_class(&curve, 1),
            Err(Error::PoleOrZero(_))
        ));
    }

    #[test]
    fn twist_class_on_elliptic_curve_matches_eigenvalue_formula() {
        let curve = curve_elliptic_f4();
        let coh = CurveCohomology::build(&curve).unwrap();
        let xi2 = xi_class(&curve, 2).unwrap();
        assert_eq!(xi2.one_xi, qr(1, 15));
        assert_eq!(xi2.xi_one, qr(1, 3));
        // Frobenius is the scalar 2, so the middle part is
        // (1 − 2·q^{d−1})⁻¹ = −1/7 times the dual-basis matrix.
        assert_eq!(
            xi2.middle,
            vec![
                vec![Q::zero(), qr(-1, 7)],
                vec![qr(1, 7), Q::zero()],
            ]
        );
        assert_eq!(
            xi2.diagonal_restriction(&coh),
            log_derivative_trace_route(&curve, 2).unwrap()
        );
        // The same agreement at a different weight and at a negative weight.
        for d in [3, -1] {
            let x = xi_class(&curve, d).unwrap();
            assert_eq!(
                x.diagonal_restriction(&coh),
                log_derivative_trace_route(&curve, d).unwrap()
            );
        }
        // Reductive twists: scalar parts are forced, middles follow the
        // same resolvent pattern.
        let s1 = xi_star1(&curve).unwrap();
        assert_eq!(s1.one_xi, qr(1, 3));
        assert!(s1.xi_one.is_zero());
        let s0 = xi_star0(&curve).unwrap();
        assert!(s0.one_xi.is_zero());
        assert_eq!(s0.xi_one, qr(-4, 3));
    }

    #[test]
    fn curve_frobenius_scales_the_diagonal_class_by_q() {
        // (φ⊗φ) of the diagonal equals q times the diagonal; on the middle
        // matrix that is F·M₀·Fᵀ = q·M₀, a consequence of FᵀJF = qJ.
        let coh = CurveCohomology::build(&curve_elliptic_f4()).unwrap();
        let m0 = diagonal_middle(&coh);
        let lhs = linalg::mat_mul(
            &coh.frobenius,
            &linalg::mat_mul(&m0, &transpose(&coh.frobenius)),
        );
        assert_eq!(lhs, scaled_mat(&m0, &coh.q));
    }

    // -- the product identity for twisted diagonals -------------------------

    fn curve_power_ambient(curve: &CurveData, slots: usize) -> AmbientRing {
        let coh = CurveCohomology::build(curve).unwrap();
        AmbientRing::new(coh, slots, Vec::new(), 2 * slots as i64)
    }

    #[test]
    fn twisted_diagonal_product_identity() {
        for curve in [curve_p1_f2(), curve_elliptic_f4()] {
            let amb = curve_power_ambient(&curve, 3);
            let two_minus_2g = qi(2 - 2 * amb.coh.g as i64);
            let xi_at = |d: i64| xi_class_from(&amb.coh, d).unwrap();
            for d in [2i64, 3] {
                for e in [2i64, 3] {
                    // Slots below are 0-based; the identity pins the first
                    // factor of each product at slot 0.
                    // Distinct off-diagonal slots, increasing.
                    let lhs = amb.mul(&amb.xi_pair(&xi_at(d), 0, 1), &amb.xi_pair(&xi_at(e), 0, 2));
                    let mut rhs = amb.mul(
                        &amb.xi_pair(&xi_at(d + e), 0, 1),
                        &amb.xi_pair(&xi_at(e), 1, 2),
                    );
                    rhs.add_scaled(
                        &amb.mul(
                            &amb.xi_pair(&xi_at(d + e), 0, 2),
                            &amb.xi_pair(&xi_at(1 - d), 1, 2),
                        ),
                        &-Q::one(),
                    );
                    assert_eq!(lhs, rhs, "off-diagonal increasing, d={d} e={e}");

                    // Distinct off-diagonal slots, decreasing.
                    let lhs = amb.mul(&amb.xi_pair(&xi_at(d), 0, 2), &amb.xi_pair(&xi_at(e), 0, 1));
                    let mut rhs = amb
                        .mul(
                            &amb.xi_pair(&xi_at(d + e), 0, 2),
                            &amb.xi_pair(&xi_at(1 - e), 1, 2),
                        )
                        .scaled(&-Q::one());
                    rhs.add_scaled(
                        &amb.mul(
                            &amb.xi_pair(&xi_at(d + e), 0, 1),
                            &amb.xi_pair(&xi_at(d), 1, 2),
                        ),
                        &Q::one(),
                    );
                    assert_eq!(lhs, rhs, "off-diagonal decreasing, d={d} e={e}");

                    // Repeated slot away from the base point.
                    let lhs = amb.mul(&amb.xi_pair(&xi_at(d), 0, 1), &amb.xi_pair(&xi_at(e), 0, 1));
                    let mut bracket = amb.xi_pair(&xi_at(e), 1, 1);
                    bracket.add_scaled(&amb.xi_pair(&xi_at(d), 1, 1), &Q::one());
                    bracket.add_scaled(&amb.xi_slot(1), &two_minus_2g);
                    let rhs = amb.mul(&amb.xi_pair(&xi_at(d + e), 0, 1), &bracket);
                    assert_eq!(lhs, rhs, "repeated slot, d={d} e={e}");

                    // Fully diagonal: both sides vanish.
                    let lhs = amb.mul(&amb.xi_pair(&xi_at(d), 0, 0), &amb.xi_pair(&xi_at(e), 0, 0));
                    assert!(lhs.is_zero());
                }
            }
        }
    }

    // -- leg algebras --------------------------------------------------------

    #[test]
    fn leg_algebra_tracks_stabilizer_invariants() {
        // A leg with a symmetric-group stabilizer on the last two coordinates.
        let rd = build_root_datum(Family::Gl, 3).unwrap();
        let mu = Coweight::from_ints(&[1, 0, 0]);
        let leg = LegAlgebra::new(&rd, &mu, 3).unwrap();
        let dims: Vec<usize> = leg.by_degree.iter().map(|v| v.len()).collect();
        assert_eq!(dims, vec![1, 2, 4, 6]);
        assert_eq!(leg.d_mu, 2);
        assert_eq!(leg.schubert, vec![1, 1, 1]);

        // A leg with a sign-flip stabilizer.
        let rd = build_root_datum(Family::SoOdd, 2).unwrap();
        let mu = Coweight::from_ints(&[1, 0]);
        let leg = LegAlgebra::new(&rd, &mu, 4).unwrap();
        let dims: Vec<usize> = leg.by_degree.iter().map(|v| v.len()).collect();
        assert_eq!(dims, vec![1, 1, 2, 2, 3]);
        assert_eq!(leg.d_mu, 3);
        assert_eq!(leg.schubert, vec![1, 1, 1, 1]);
    }

    // -- the split model ------------------------------------------------------

    #[test]
    fn split_ring_dimensions_on_the_rational_curve() {
        let rd = pgl2();
        let ring = build_phantom(
            &rd,
            &[pgl2_mu(), pgl2_mu()],
            &curve_p1_f2(),
            &zero2(),
        )
        .unwrap();
        assert_eq!(ring.dims, vec![1, 0, 4, 0, 6, 0, 4, 0, 1]);
        assert_eq!(ring.dimension, 16);
        assert_eq!(ring.top_degree, 8);
        assert_eq!(ring.reduction_dims, vec![1, 0, 2, 0, 1, 0, 0, 0, 0]);
        assert_eq!(ring.relations.len(), 2);
        for rel in &ring.relations {
            assert_eq!(rel.coh_degree, 4);
            assert_eq!(rel.frobenius_weight, 2);
        }
        assert_eq!(ring.vol_constant, qr(1, 3));
        assert_eq!(ring.dim_bun, -3);
    }

    #[test]
    fn split_ring_dimensions_on_the_elliptic_curve() {
        let rd = pgl2();
        let ring = build_phantom(
            &rd,
            &[pgl2_mu(), pgl2_mu()],
            &curve_elliptic_f4(),
            &zero2(),
        )
        .unwrap();
        assert_eq!(ring.dimension, 64);
        assert_eq!(ring.dims[1], 4);
        assert_eq!(ring.dims[8], 1);
        assert_eq!(
            ring.reduction_dims[0..5].to_vec(),
            vec![1, 0, 2, 0, 1]
        );
    }

    #[test]
    fn split_ring_collapses_to_curve_power_for_torus_legs() {
        let rd = build_root_datum(Family::Gl, 1).unwrap();
        let mus = [Coweight::from_ints(&[1]), Coweight::from_ints(&[-1])];
        let omega = Coweight::zero(1);

        let ring = build_phantom(&rd, &mus, &curve_p1_f2(), &omega).unwrap();
        assert_eq!(ring.dims, vec![1, 0, 2, 0, 1]);
        // vol(ξ⊗ξ) is the full leg-free volume: both integrals are 1.
        let top = ring.mul(&ring.point_class(0), &ring.point_class(1));
        assert_eq!(ring.volume(&top), qi(1));

        let ring4 = build_phantom(&rd, &mus, &curve_elliptic_f4(), &omega).unwrap();
        assert_eq!(ring4.dims, vec![1, 4, 6, 4, 1]);
        assert_eq!(ring4.dimension, 16);

        // The component shift changes the relation classes but not the
        // graded dimensions.
        let omega5 = Coweight::from_ints(&[5]);
        let ring5 = build_phantom(&rd, &mus, &curve_elliptic_f4(), &omega5).unwrap();
        assert_eq!(ring5.dims, ring4.dims);
        let e1 = ExactPolynomial::var(1, 0);
        let rel4 = ring4.relation(0, &e1).unwrap();
        let rel5 = ring5.relation(0, &e1).unwrap();
        // Same ambient enumeration on both rings, so the classes compare:
        // the difference is −5·ξ at the first slot.
        let mut diff = rel5.clone();
        diff.add_scaled(&rel4, &-Q::one());
        assert_eq!(diff, ring4.point_class(0).scaled(&qi(-5)));
    }

    #[test]
    fn split_ring_for_two_full_legs_of_a_rank_two_group() {
        let rd = build_root_datum(Family::Gl, 2).unwrap();
        let mus = [Coweight::from_ints(&[1, 0]), Coweight::from_ints(&[0, -1])];
        let ring = build_phantom(&rd, &mus, &curve_p1_f2(), &zero2()).unwrap();
        assert_eq!(ring.dimension, 16);
        assert_eq!(ring.dims[8], 1);

        // Relation classes of products of invariants stay in the ideal.
        let e1 = &rd.fundamental_invariants[0].poly;
        let e2 = &rd.fundamental_invariants[1].poly;
        for leg in 0..2 {
            let d = ring.relation(leg, &e1.mul(e2)).unwrap();
            assert!(ring.is_trivial(&d), "leg {leg}: e1·e2");
            let d = ring.relation(leg, &e2.mul(e2)).unwrap();
            assert!(ring.is_trivial(&d), "leg {leg}: e2²");
            let d = ring.relation(leg, &e1.mul(e1)).unwrap();
            assert!(ring.is_trivial(&d), "leg {leg}: e1²");
        }
    }

    #[test]
    fn split_ring_relation_matches_its_assembled_form() {
        // Degree-two relation of the rank-one adjoint group, assembled by
        // hand from public pieces.
        let rd = pgl2();
        let ring = build_phantom(
            &rd,
            &[pgl2_mu(), pgl2_mu()],
            &curve_p1_f2(),
            &zero2(),
        )
        .unwrap();
        let f2 = &rd.fundamental_invariants[0].poly; // x₁x₂ ≡ −x₁²
        let t = ExactPolynomial::var(2, 0).neg(); // −x₁
        // δ_i(f₂) = [−x₁]_i − ½·ξ_i on a genus-zero curve (∂²f₂ = −½).
        let delta = |i: usize| {
            let mut d = ring.leg_class(i, &t).unwrap();
            d.add_scaled(&ring.point_class(i), &qr(-1, 2));
            d
        };
        let mut expected = ring.leg_class(0, f2).unwrap();
        expected.add_scaled(
            &ring.mul(&ring.twist_class(2, 0, 0).unwrap(), &delta(0)),
            &-Q::one(),
        );
        expected.add_scaled(
            &ring.mul(&ring.twist_class(2, 0, 1).unwrap(), &delta(1)),
            &-Q::one(),
        );
        assert_eq!(ring.relation(0, f2).unwrap(), expected);

        // The relation for the product f₂² is a consequence of the ideal.
        let d = ring.relation(0, &f2.mul(f2)).unwrap();
        assert!(ring.is_trivial(&d));
        let d = ring.relation(1, &f2.mul(f2)).unwrap();
        assert!(ring.is_trivial(&d));
    }

    #[test]
    fn relation_generators_summaries() {
        let rd = build_root_datum(Family::Gl, 2).unwrap();
        let mus = [Coweight::from_ints(&[1, 0]), Coweight::from_ints(&[0, -1])];
        let gens = relation_generators(&rd, &mus, &curve_elliptic_f4(), &zero2()).unwrap();
        assert_eq!(gens.len(), 4);
        assert_eq!(gens[0].invariant, "e1");
        assert_eq!(gens[0].frobenius_weight, 1);
        assert_eq!(gens[2].invariant, "e2");
        assert_eq!(gens[2].frobenius_weight, 2);
    }

    #[test]
    fn split_ring_frobenius_is_a_power_of_the_weil_number() {
        // Genus zero, q = 2: every surviving monomial has Frobenius weight
        // q^{k/2} in degree k.
        let rd = pgl2();
        let ring = build_phantom(&rd, &[pgl2_mu(), pgl2_mu()], &curve_p1_f2(), &zero2()).unwrap();
        for k in (0..=8).step_by(2) {
            let expect = scaled_mat(&linalg::identity(ring.dims[k]), &qpow(&qi(2), k as i64 / 2));
            assert_eq!(ring.frobenius_matrix(k as i64), expect, "degree {k}");
        }
        // The elliptic curve with scalar Frobenius 2 (q = 4): weight 2^k in
        // degree k, odd degrees included.
        let ring = build_phantom(&rd, &[pgl2_mu(), pgl2_mu()], &curve_elliptic_f4(), &zero2())
            .unwrap();
        for k in 0..=8usize {
            let expect = scaled_mat(&linalg::identity(ring.dims[k]), &qpow(&qi(2), k as i64));
            assert_eq!(ring.frobenius_matrix(k as i64), expect, "degree {k}");
        }
    }

    #[test]
    fn split_ring_duality_and_volume() {
        let rd = pgl2();
        for curve in [curve_p1_f2(), curve_elliptic_f4()] {
            let ring = build_phantom(&rd, &[pgl2_mu(), pgl2_mu()], &curve, &zero2()).unwrap();
            let report = duality_report(&ring);
            assert!(report.perfect, "duality over q={}", ring.amb.coh.q);
            // The volume factorizes over every point-full top monomial.
            for (elem, direct) in ring.monomial_volumes() {
                assert_eq!(ring.volume(&elem), direct);
            }
        }

        // vol(⊗ξ ⊗ top Schubert classes) with unit flag integrals = the
        // leg-free volume.
        let ring = build_phantom(&rd, &[pgl2_mu(), pgl2_mu()], &curve_p1_f2(), &zero2()).unwrap();
        let t = ExactPolynomial::var(2, 0).neg();
        let mut top = ring.mul(&ring.point_class(0), &ring.point_class(1));
        top = ring.mul(&top, &ring.leg_class(0, &t).unwrap());
        top = ring.mul(&top, &ring.leg_class(1, &t).unwrap());
        assert_eq!(ring.volume(&top), qr(1, 3));

        // The volume functional kills the ideal.
        let f2 = &rd.fundamental_invariants[0].poly;
        let rel = ring.relation(0, f2).unwrap();
        let shifted = ring.mul(&rel, &ring.mul(&ring.point_class(1), &ring.leg_class(1, &t).unwrap()));
        assert!(ring.volume(&shifted).is_zero());
        let mut perturbed = top.clone();
        perturbed.add_scaled(&shifted, &qi(7));
        assert_eq!(ring.volume(&perturbed), qr(1, 3));
    }

    #[test]
    fn split_ring_with_no_legs_recovers_the_leg_free_volume() {
        let rd = build_root_datum(Family::Sl, 2).unwrap();
        let ring = build_phantom(&rd, &[], &curve_p1_f2(), &zero2()).unwrap();
        assert_eq!(ring.dims, vec![1]);
        assert_eq!(ring.volume(&ring.one()), qr(1, 3));
    }

    #[test]
    fn isogenous_groups_share_graded_dimensions() {
        let so3 = build_root_datum(Family::SoOdd, 1).unwrap();
        let mu = Coweight::from_ints(&[1]);
        let ring_b = build_phantom(&so3, &[mu.clone(), mu], &curve_p1_f2(), &Coweight::zero(1))
            .unwrap();
        let ring_a = build_phantom(&pgl2(), &[pgl2_mu(), pgl2_mu()], &curve_p1_f2(), &zero2())
            .unwrap();
        assert_eq!(ring_b.dims, ring_a.dims);
        assert_eq!(ring_b.vol_constant, ring_a.vol_constant);
        // The isogeny identifies the odd-orthogonal generator e₁ with twice
        // the adjoint generator x₁, so matching top classes have volumes in
        // ratio 2·2 = 4.
        let x1 = ExactPolynomial::var(1, 0);
        let mut top_b = ring_b.mul(&ring_b.point_class(0), &ring_b.point_class(1));
        top_b = ring_b.mul(&top_b, &ring_b.leg_class(0, &x1).unwrap());
        top_b = ring_b.mul(&top_b, &ring_b.leg_class(1, &x1).unwrap());
        let y1 = ExactPolynomial::var(2, 0);
        let mut top_a = ring_a.mul(&ring_a.point_class(0), &ring_a.point_class(1));
        top_a = ring_a.mul(&top_a, &ring_a.leg_class(0, &y1).unwrap());
        top_a = ring_a.mul(&top_a, &ring_a.leg_class(1, &y1).unwrap());
        assert_eq!(ring_a.volume(&top_a), qr(1, 3));
        assert_eq!(ring_b.volume(&top_b), qi(4) * ring_a.volume(&top_a));
    }

    #[test]
    fn split_ring_rejects_bad_tuples() {
        let rd = pgl2();
        // One adjoint leg does not sum into the coroot lattice.
        assert!(matches!(
            build_phantom(&rd, &[pgl2_mu()], &curve_p1_f2(), &zero2()),
            Err(Error::Inadmissible(_))
        ));
        // A non-minuscule coweight.
        let gl2 = build_root_datum(Family::Gl, 2).unwrap();
        assert!(matches!(
            build_phantom(
                &gl2,
                &[Coweight::from_ints(&[2, 0]), Coweight::from_ints(&[-2, 0])],
                &curve_p1_f2(),
                &zero2()
            ),
            Err(Error::NotMinuscule(_))
        ));
        // A component shift of the wrong length.
        assert!(matches!(
            build_phantom(
                &gl2,
                &[Coweight::from_ints(&[1, 0]), Coweight::from_ints(&[0, -1])],
                &curve_p1_f2(),
                &Coweight::zero(1)
            ),
            Err(Error::InvalidInput(_))
        ));
    }

    // -- the collapsed model ---------------------------------------------------

    #[test]
    fn collapsed_ring_with_trivial_group_matches_zeta_constants() {
        let artin = build_artin_system(&trivial_cover_json()).unwrap();
        let rd = pgl2();
        let sigma = ["e".to_string(), "e".to_string()];
        let ring = build_phantom_sigma(&rd, &[pgl2_mu(), pgl2_mu()], &sigma, &artin).unwrap();
        assert_eq!(ring.dims, vec![1, 0, 3, 0, 3, 0, 1]);
        assert_eq!(ring.dimension, 8);
        assert_eq!(ring.reduction_dims, vec![1, 0, 2, 0, 1, 0, 0]);
        // For the trivial cover the diagonal pair constant is the ζ-value of
        // the twisted diagonal restriction.
        assert_eq!(ring.c_pair(0, 0, 2).unwrap(), qr(4, 3));
        assert_eq!(
            ring.c_pair(0, 0, 2).unwrap(),
            log_derivative_trace_route(&curve_p1_f2(), 2).unwrap()
        );
        assert_eq!(ring.c_pair(0, 1, 2).unwrap(), qr(4, 3));
        // Off-diagonal with i > i′ uses the reflected weight.
        assert_eq!(
            ring.c_pair(1, 0, 2).unwrap(),
            -log_derivative_trace_route(&curve_p1_f2(), -1).unwrap()
        );
    }

    #[test]
    fn collapsed_ring_top_products_follow_the_reduction_patterns() {
        let artin = build_artin_system(&z2_cover_json()).unwrap();
        let rd = pgl2();
        let sigma = ["e".to_string(), "a".to_string()];
        let ring = build_phantom_sigma(&rd, &[pgl2_mu(), pgl2_mu()], &sigma, &artin).unwrap();
        let t = ExactPolynomial::var(2, 0).neg();
        let t0 = ring.leg_class(0, &t).unwrap();
        let t1 = ring.leg_class(1, &t).unwrap();
        let xi = ring.point_class();
        let xi_t0_t1 = ring.mul(&xi, &ring.mul(&t0, &t1));

        // One leg two above its top, the other below: T₀³ reduces through
        // the off-diagonal constant.
        let lhs = ring.normal_form(&ring.mul(&t0, &ring.mul(&t0, &t0)));
        let c01 = ring.c_pair(0, 1, 2).unwrap();
        let rhs = ring.normal_form(&xi_t0_t1.scaled(&-c01));
        assert_eq!(lhs, rhs);

        // One leg exactly one above its top: T₀²·T₁ reduces through the
        // diagonal constant.
        let lhs = ring.normal_form(&ring.mul(&t0, &ring.mul(&t0, &t1)));
        let c00 = ring.c_pair(0, 0, 2).unwrap();
        let rhs = ring.normal_form(&xi_t0_t1.scaled(&-c00));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn collapsed_ring_volume_matches_the_closed_form() {
        let artin = build_artin_system(&z2_cover_json()).unwrap();
        let rd = pgl2();

        // Two legs.
        let sigma = ["e".to_string(), "a".to_string()];
        let ring = build_phantom_sigma(&rd, &[pgl2_mu(), pgl2_mu()], &sigma, &artin).unwrap();
        let t = ExactPolynomial::var(2, 0).neg();
        let mut moving = ring.leg_class(0, &t).unwrap();
        moving.add_scaled(&ring.leg_class(1, &t).unwrap(), &Q::one());
        let mut eta = ring.one();
        for _ in 0..3 {
            eta = ring.mul(&eta, &moving);
        }
        let closed = volume_colmez(2, 2, &[Sign::Sharp, Sign::Flat], &sigma, &artin, 2)
            .unwrap()
            .0;
        assert_eq!(ring.volume(&eta), closed.value);
        assert!(!closed.value.is_zero());

        // Four legs.
        let sigma4: Vec<String> = ["e", "a", "e", "a"].iter().map(|s| s.to_string()).collect();
        let mus4 = vec![pgl2_mu(); 4];
        let ring4 = build_phantom_sigma(&rd, &mus4, &sigma4, &artin).unwrap();
        let mut moving = ring4.leg_class(0, &t).unwrap();
        for i in 1..4 {
            moving.add_scaled(&ring4.leg_class(i, &t).unwrap(), &Q::one());
        }
        let mut eta = ring4.one();
        for _ in 0..5 {
            eta = ring4.mul(&eta, &moving);
        }
        let signs4 = [Sign::Sharp, Sign::Flat, Sign::Sharp, Sign::Flat];
        let closed = volume_colmez(2, 4, &signs4, &sigma4, &artin, 2).unwrap().0;
        assert_eq!(ring4.volume(&eta), closed.value);
    }

    #[test]
    fn collapsed_ring_kills_products_of_leg_classes() {
        // [f]_i·[g]_{i′} vanishes for invariants of degree ≥ 2, and the
        // relation of a non-fundamental invariant is a consequence.
        let artin = build_artin_system(&z2_cover_json()).unwrap();
        let rd = pgl2();
        let sigma4: Vec<String> = ["e", "a", "e", "a"].iter().map(|s| s.to_string()).collect();
        let mus4 = vec![pgl2_mu(); 4];
        let ring = build_phantom_sigma(&rd, &mus4, &sigma4, &artin).unwrap();
        let f2 = &rd.fundamental_invariants[0].poly;
        let c0 = ring.leg_class(0, f2).unwrap();
        let c1 = ring.leg_class(1, f2).unwrap();
        assert!(ring.is_trivial(&ring.mul(&c0, &c1)));
        assert!(ring.is_trivial(&ring.mul(&c0, &c0)));

        let d = ring.relation(0, &f2.mul(f2)).unwrap();
        assert!(ring.is_trivial(&d));

        // Vanishing patterns at the top: two legs above their tops, or two
        // strictly below while one is far above.
        let t = ExactPolynomial::var(2, 0).neg();
        let tc: Vec<ClassElement> = (0..4).map(|i| ring.leg_class(i, &t).unwrap()).collect();
        let sq = |i: usize| ring.mul(&tc[i], &tc[i]);
        let two_above = ring.mul(&sq(0), &ring.mul(&sq(1), &tc[2]));
        assert!(ring.is_trivial(&two_above));
        let two_below = ring.mul(&ring.mul(&sq(0), &sq(0)), &tc[1]);
        assert!(ring.is_trivial(&two_below));
    }

    #[test]
    fn collapsed_ring_rejects_unsupported_input() {
        let artin = build_artin_system(&z2_cover_json()).unwrap();
        // A family with a degree-one invariant.
        let gl2 = build_root_datum(Family::Gl, 2).unwrap();
        assert!(matches!(
            build_phantom_sigma(
                &gl2,
                &[Coweight::from_ints(&[1, 0])],
                &["e".to_string()],
                &artin
            ),
            Err(Error::UnsupportedFamily(_))
        ));
        // An odd number of adjoint legs is inadmissible.
        let rd = pgl2();
        assert!(matches!(
            build_phantom_sigma(
                &rd,
                &[pgl2_mu(), pgl2_mu(), pgl2_mu()],
                &["e".to_string(), "a".to_string(), "e".to_string()],
                &artin
            ),
            Err(Error::Inadmissible(_))
        ));
        // An unknown Galois element.
        assert!(matches!(
            build_phantom_sigma(
                &rd,
                &[pgl2_mu(), pgl2_mu()],
                &["e".to_string(), "b".to_string()],
                &artin
            ),
            Err(Error::InvalidInput(_))
        ));
    }
}
