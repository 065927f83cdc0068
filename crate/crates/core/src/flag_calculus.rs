//! Flag-variety pushforward ∫_{G/P_μ}, the derivation ∇^η_μ, the graded
//! space 𝕍 of fundamental-invariant lines, eigenweight matrices, and the
//! degree constants attached to a leg.
//!
//! The pushforward is the Weyl sum Σ_{w∈W/W_μ} w(f/𝔯_μ) with
//! 𝔯_μ = ∏_{⟨α,μ⟩<0} α, evaluated exactly: all coset terms are put over one
//! common denominator composed of sign-normalized root images, and the final
//! division must leave a zero remainder or the computation aborts.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::num::Q;
use crate::poly::ExactPolynomial;
use crate::unipoly::UniPoly;
use crate::weyl_poly::{
    express_in_invariants, partial_derivative, weyl_cosets, Coweight, Family, RootDatum,
};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// The graded space of fundamental-invariant lines: generator i of the root
/// datum contributes one line in degree dᵢ (half the cohomological degree).
#[derive(Debug, Clone)]
pub struct GrossMotive {
    pub lines: Vec<MotiveLine>,
}

#[derive(Debug, Clone)]
pub struct MotiveLine {
    pub name: String,
    /// dᵢ: the L-function for this line involves ζ(s + dᵢ).
    pub degree: i64,
    /// Index into `rd.fundamental_invariants`.
    pub generator_index: usize,
}

impl GrossMotive {
    pub fn dimension_in_degree(&self, d: i64) -> usize {
        self.lines.iter().filter(|l| l.degree == d).count()
    }

    pub fn degrees(&self) -> Vec<i64> {
        let mut ds: Vec<i64> = self.lines.iter().map(|l| l.degree).collect();
        ds.dedup();
        ds
    }
}

/// Lines sorted ascending by degree (ties in generator order).
pub fn gross_motive(rd: &RootDatum) -> GrossMotive {
    let mut lines: Vec<MotiveLine> = rd
        .fundamental_invariants
        .iter()
        .enumerate()
        .map(|(i, g)| MotiveLine {
            name: g.name.clone(),
            degree: g.coh_degree / 2,
            generator_index: i,
        })
        .collect();
    lines.sort_by_key(|l| (l.degree, l.generator_index));
    GrossMotive { lines }
}

/// A root covector as a linear polynomial in `vars` variables.
fn root_polynomial(root: &[i64], vars: usize) -> ExactPolynomial {
    let mut p = ExactPolynomial::zero(vars);
    for (i, &c) in root.iter().enumerate() {
        if c != 0 {
            p = p.add(&ExactPolynomial::var(vars, i).scale(&Q::from_integer(c.into())));
        }
    }
    p
}

/// 𝔯_μ = ∏_{⟨α,μ⟩<0} α, the equivariant top Chern class of T(G/P_μ);
/// degree D_μ.
pub fn attracting_chern(rd: &RootDatum, mu: &Coweight) -> ExactPolynomial {
    let vars = rd.coordinates;
    let mut p = ExactPolynomial::one(vars);
    for alpha in &rd.roots {
        if RootDatum::pairing(alpha, mu) < Q::zero() {
            p = p.mul(&root_polynomial(alpha, vars));
        }
    }
    p
}

/// Sign-normalize an integer covector: flip so the first nonzero entry is
/// positive; returns (canonical vector, sign flipped or not).
fn canonical_covector(v: &[i64]) -> (Vec<i64>, i8) {
    match v.iter().find(|&&c| c != 0) {
        Some(&c) if c < 0 => (v.iter().map(|&x| -x).collect(), -1),
        _ => (v.to_vec(), 1),
    }
}

/// ∫_{G/P_μ} f = Σ_{w∈W/W_μ} w(f/𝔯_μ) for W_μ-invariant f. The polynomial
/// may carry extra inert variables beyond the torus coordinates; the Weyl
/// group fixes them. Lowers cohomological degree by 2·D_μ; the result is
/// W-invariant.
pub fn integrate_flag(
    rd: &RootDatum,
    mu: &Coweight,
    f: &ExactPolynomial,
) -> Result<ExactPolynomial> {
    if f.vars() < rd.coordinates {
        return Err(Error::InvalidInput(
            "polynomial has fewer variables than the root datum".into(),
        ));
    }
    if !rd.is_stabilizer_invariant(mu, f) {
        return Err(Error::NotInvariant(
            "integrand is not W_μ-invariant".into(),
        ));
    }
    let vars = f.vars();
    let cosets = weyl_cosets(rd, mu)?;
    let neg_roots: Vec<Vec<i64>> = rd
        .roots
        .iter()
        .filter(|alpha| RootDatum::pairing(alpha, mu) < Q::zero())
        .cloned()
        .collect();

    // Per coset: the sign-normalized images of the attracting roots, and the
    // parity of the normalization. Within one coset the images are distinct
    // (w is injective and no pair ±α can both be attracting), so the common
    // denominator is the product over the union of canonical root images.
    let mut union: BTreeMap<Vec<i64>, ExactPolynomial> = BTreeMap::new();
    let mut per_coset: Vec<(i8, Vec<Vec<i64>>)> = Vec::new();
    for w in &cosets {
        let mut sign = 1i8;
        let mut keys = Vec::with_capacity(neg_roots.len());
        for alpha in &neg_roots {
            let (can, s) = canonical_covector(&w.act_covector(alpha));
            sign *= s;
            union
                .entry(can.clone())
                .or_insert_with(|| root_polynomial(&can, vars));
            keys.push(can);
        }
        per_coset.push((sign, keys));
    }

    let mut denominator = ExactPolynomial::one(vars);
    for poly in union.values() {
        denominator = denominator.mul(poly);
    }

    let mut numerator = ExactPolynomial::zero(vars);
    for (w, (sign, keys)) in cosets.iter().zip(&per_coset) {
        let key_set: std::collections::BTreeSet<&Vec<i64>> = keys.iter().collect();
        let mut term = w.act(f);
        if *sign == -1 {
            term = term.neg();
        }
        for (can, poly) in &union {
            if !key_set.contains(can) {
                term = term.mul(poly);
            }
        }
        numerator = numerator.add(&term);
    }

    let result = match numerator.div_exact(&denominator) {
        Ok(q) => q,
        Err(_) if rd.family == Family::Sl || rd.family == Family::Pgl => {
            // The integrand may be W_μ-invariant only modulo e₁; divide in
            // the quotient presentation instead.
            rd.reduce(&numerator)
                .div_exact(&rd.reduce(&denominator))
                .map_err(|_| {
                    Error::NonzeroRemainder(
                        "flag pushforward left a remainder (mod e1 as well)".into(),
                    )
                })?
        }
        Err(_) => {
            return Err(Error::NonzeroRemainder(
                "flag pushforward left a remainder".into(),
            ))
        }
    };
    if !rd.is_weyl_invariant(&result) {
        return Err(Error::Internal(
            "flag pushforward produced a non-invariant value".into(),
        ));
    }
    Ok(result)
}

/// Evaluate the coset sum Σ w(f/𝔯_μ) at a rational point (extra inert
/// coordinates included in `point`); `None` if some denominator vanishes.
/// This is the evaluation cross-check for `integrate_flag`, not a source of
/// truth.
pub fn coset_sum_at_point(
    rd: &RootDatum,
    mu: &Coweight,
    f: &ExactPolynomial,
    point: &[Q],
) -> Option<Q> {
    let cosets = weyl_cosets(rd, mu).ok()?;
    let neg_roots: Vec<Vec<i64>> = rd
        .roots
        .iter()
        .filter(|alpha| RootDatum::pairing(alpha, mu) < Q::zero())
        .cloned()
        .collect();
    let vars = f.vars();
    let mut total = Q::zero();
    for w in &cosets {
        let mut denom = Q::one();
        for alpha in &neg_roots {
            let v = root_polynomial(&w.act_covector(alpha), vars).eval(point);
            if v.is_zero() {
                return None;
            }
            denom *= v;
        }
        total += w.act(f).eval(point) / denom;
    }
    Some(total)
}

/// t_μ = ∂_μ(½Σx_k²) = Σ μ_k x_k.
pub fn casimir_direction(rd: &RootDatum, mu: &Coweight) -> ExactPolynomial {
    let mut p = ExactPolynomial::zero(rd.coordinates);
    for (k, c) in mu.coords.iter().enumerate() {
        if !c.is_zero() {
            p = p.add(&ExactPolynomial::var(rd.coordinates, k).scale(c));
        }
    }
    p
}

/// ∇^η_μ(f) = ∫_{G/P_μ} η·∂_μ f — a degree-preserving derivation on R^W.
pub fn nabla(
    rd: &RootDatum,
    mu: &Coweight,
    eta: &ExactPolynomial,
    f: &ExactPolynomial,
) -> Result<ExactPolynomial> {
    let d_mu = rd.flag_dimension(mu) as i64;
    if !eta.is_zero() && eta.degree() != d_mu + 1 {
        return Err(Error::WrongDegree(format!(
            "η must be homogeneous of cohomological degree {} (got polynomial degree {})",
            2 * (d_mu + 1),
            eta.degree()
        )));
    }
    let df = partial_derivative(f, mu);
    integrate_flag(rd, mu, &eta.mul(&df))
}

/// One graded block of the induced endomorphism ∇̄ on 𝕍.
#[derive(Debug, Clone)]
pub struct EigenweightBlock {
    /// d: the lines of this block sit in cohomological degree 2d.
    pub degree: i64,
    pub generator_indices: Vec<usize>,
    pub generator_names: Vec<String>,
    /// matrix[b][a] = coefficient of generator b in ∇(generator a).
    pub matrix: Mat,
    pub char_poly: UniPoly,
    /// Present when the whole spectrum is rational (with multiplicity,
    /// sorted); `None` means only the characteristic polynomial is reported.
    pub eigenvalues: Option<Vec<Q>>,
}

#[derive(Debug, Clone)]
pub struct EigenweightReport {
    /// Blocks in ascending degree.
    pub blocks: Vec<EigenweightBlock>,
}

impl EigenweightReport {
    /// Eigenvalue attached to each fundamental generator, in generator
    /// order. Requires every block to be triangular (in particular 1×1 or
    /// diagonal), so diagonal entries are the eigenvalues and the pairing
    /// with generators is canonical.
    pub fn eigenvalue_per_generator(&self) -> Result<Vec<(String, Q)>> {
        let mut out: Vec<(usize, String, Q)> = Vec::new();
        for block in &self.blocks {
            let k = block.generator_indices.len();
            let lower_zero = (0..k).all(|i| (0..i).all(|j| block.matrix[i][j].is_zero()));
            let upper_zero = (0..k).all(|i| ((i + 1)..k).all(|j| block.matrix[i][j].is_zero()));
            if !(lower_zero || upper_zero) {
                return Err(Error::IrrationalEigenvalue(format!(
                    "degree-{} block is not triangular; characteristic polynomial {}",
                    block.degree,
                    block.char_poly.render("z")
                )));
            }
            for i in 0..k {
                out.push((
                    block.generator_indices[i],
                    block.generator_names[i].clone(),
                    block.matrix[i][i].clone(),
                ));
            }
        }
        out.sort_by_key(|(gi, _, _)| *gi);
        Ok(out.into_iter().map(|(_, n, v)| (n, v)).collect())
    }

    /// All eigenvalues as a multiset (sorted), when every block is rational.
    pub fn all_eigenvalues(&self) -> Result<Vec<Q>> {
        let mut out = Vec::new();
        for block in &self.blocks {
            match &block.eigenvalues {
                Some(ev) => out.extend(ev.iter().cloned()),
                None => {
                    return Err(Error::IrrationalEigenvalue(format!(
                        "degree-{} block has irrational spectrum; characteristic polynomial {}",
                        block.degree,
                        block.char_poly.render("z")
                    )))
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

/// Compute ∇ on every fundamental generator, express the result back in the
/// generators, and collect the linear parts into per-degree matrices.
pub fn eigenweight_report(
    rd: &RootDatum,
    mu: &Coweight,
    eta: &ExactPolynomial,
) -> Result<EigenweightReport> {
    let motive = gross_motive(rd);
    let gens = &rd.fundamental_invariants;
    // image_coeffs[a][b] = coefficient of generator b in ∇(generator a)
    let mut image_coeffs: Vec<Vec<Q>> = Vec::with_capacity(gens.len());
    for g in gens {
        let image = nabla(rd, mu, eta, &g.poly)?;
        let expr = express_in_invariants(rd, &image)?;
        let mut row = vec![Q::zero(); gens.len()];
        for (b, _) in gens.iter().enumerate() {
            let mut unit = vec![0u32; gens.len()];
            unit[b] = 1;
            row[b] = expr.coeff(&unit);
        }
        image_coeffs.push(row);
    }
    let mut blocks = Vec::new();
    for d in motive.degrees() {
        let idx: Vec<usize> = motive
            .lines
            .iter()
            .filter(|l| l.degree == d)
            .map(|l| l.generator_index)
            .collect();
        let k = idx.len();
        let mut matrix = vec![vec![Q::zero(); k]; k];
        for (col, &a) in idx.iter().enumerate() {
            for (row, &b) in idx.iter().enumerate() {
                matrix[row][col] = image_coeffs[a][b].clone();
            }
        }
        let cp = linalg::char_poly(&matrix);
        let eigenvalues = linalg::rational_roots(&cp);
        blocks.push(EigenweightBlock {
            degree: d,
            generator_indices: idx.clone(),
            generator_names: idx
                .iter()
                .map(|&i| gens[i].name.clone())
                .collect(),
            matrix,
            char_poly: cp,
            eigenvalues,
        });
    }
    Ok(EigenweightReport { blocks })
}

/// Do the ∇̄ matrices of several legs commute degree-by-degree?
pub fn reports_commute(reports: &[&EigenweightReport]) -> bool {
    for i in 0..reports.len() {
        for j in (i + 1)..reports.len() {
            for (ba, bb) in reports[i].blocks.iter().zip(&reports[j].blocks) {
                debug_assert_eq!(ba.degree, bb.degree);
                if !linalg::commute(&ba.matrix, &bb.matrix) {
                    return false;
                }
            }
        }
    }
    true
}

/// The two scalar constants of a leg: d^ω_μ(η), non-zero only for GL where
/// ∫η = c·e₁ and the constant is c·ω; and d_μ(η′) = ∫η′ ∈ ℚ.
pub fn degree_constants(
    rd: &RootDatum,
    mu: &Coweight,
    eta: &ExactPolynomial,
    eta_prime: &ExactPolynomial,
    omega: i64,
) -> Result<(Q, Q)> {
    let d_mu = rd.flag_dimension(mu) as i64;
    if !eta.is_zero() && eta.degree() != d_mu + 1 {
        return Err(Error::WrongDegree(format!(
            "η must have polynomial degree {}",
            d_mu + 1
        )));
    }
    if !eta_prime.is_zero() && eta_prime.degree() != d_mu {
        return Err(Error::WrongDegree(format!(
            "η′ must have polynomial degree {d_mu}"
        )));
    }
    let first = match rd.family {
        Family::Gl => {
            let integral = integrate_flag(rd, mu, eta)?;
            // degree-1 W-invariant ⇒ multiple of e₁
            let expr = express_in_invariants(rd, &integral)?;
            let mut unit = vec![0u32; rd.fundamental_invariants.len()];
            unit[0] = 1;
            expr.coeff(&unit) * Q::from_integer(omega.into())
        }
        _ => Q::zero(),
    };
    let second = if eta_prime.is_zero() {
        Q::zero()
    } else {
        let integral = integrate_flag(rd, mu, eta_prime)?;
        if integral.degree() > 0 {
            return Err(Error::Internal(
                "∫η′ did not evaluate to a constant".into(),
            ));
        }
        integral.constant_term()
    };
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_polynomial;
    use crate::num::{qi, qr};
    use crate::poly::elementary_symmetric;
    use crate::weyl_poly::build_root_datum;

    fn x(vars: usize, i: usize) -> ExactPolynomial {
        ExactPolynomial::var(vars, i)
    }

    #[test]
    fn attracting_chern_examples() {
        let gl3 = build_root_datum(Family::Gl, 3).unwrap();
        let mu = Coweight::from_ints(&[1, 0, 0]);
        let r = attracting_chern(&gl3, &mu);
        let expect = parse_polynomial("(x2-x1)*(x3-x1)", 3).unwrap();
        assert_eq!(r, expect);

        let so4 = build_root_datum(Family::SoEven, 2).unwrap();
        let r = attracting_chern(&so4, &Coweight::from_ints(&[1, 0]));
        let expect = parse_polynomial("x1^2 - x2^2", 2).unwrap();
        assert_eq!(r, expect);

        let zero = Coweight::zero(3);
        assert_eq!(attracting_chern(&gl3, &zero), ExactPolynomial::one(3));
    }

    #[test]
    fn integrate_examples() {
        let gl2 = build_root_datum(Family::Gl, 2).unwrap();
        let mu = Coweight::from_ints(&[1, 0]);
        // ∫ x1² = −e₁ on ℙ¹
        let r = integrate_flag(&gl2, &mu, &x(2, 0).pow(2)).unwrap();
        assert_eq!(r, elementary_symmetric(2, 1).neg());
        // degree below D_μ pushes to zero
        let r = integrate_flag(&gl2, &mu, &ExactPolynomial::one(2)).unwrap();
        assert!(r.is_zero());
        // ∫ 𝔯_μ = |W/W_μ|
        for (rd, mu) in [
            (build_root_datum(Family::Gl, 3).unwrap(), Coweight::from_ints(&[1, 0, 0])),
            (build_root_datum(Family::Gl, 4).unwrap(), Coweight::from_ints(&[1, 1, 0, 0])),
            (build_root_datum(Family::SoOdd, 2).unwrap(), Coweight::from_ints(&[1, 0])),
            (build_root_datum(Family::SoEven, 3).unwrap(), Coweight::from_ints(&[1, 0, 0])),
        ] {
            let r = attracting_chern(&rd, &mu);
            let integral = integrate_flag(&rd, &mu, &r).unwrap();
            let cosets = weyl_cosets(&rd, &mu).unwrap();
            assert_eq!(
                integral,
                ExactPolynomial::constant(rd.coordinates, qi(cosets.len() as i64))
            );
        }
    }

    #[test]
    fn integrate_so4_regression_and_evaluation_check() {
        let so4 = build_root_datum(Family::SoEven, 2).unwrap();
        let mu = Coweight::from_ints(&[1, 0]);
        let f = parse_polynomial("x1^2*x2", 2).unwrap();
        let r = integrate_flag(&so4, &mu, &f).unwrap();
        // Direct coset sum gives zero (odd total degree).
        assert!(r.is_zero());
        // Quadric doubling: ∫ x1²·x1x2 = 2·(coefficient of x1 x2 seen as
        // the Pf-companion class); direct Weyl-sum value is 2·Pf/Pf… checked
        // numerically at sample points instead.
        let g = parse_polynomial("x1^3*x2", 2).unwrap();
        let rg = integrate_flag(&so4, &mu, &g).unwrap();
        let pts = [
            vec![qr(1, 2), qi(3)],
            vec![qi(2), qr(-5, 7)],
            vec![qr(9, 4), qr(1, 3)],
        ];
        for p in &pts {
            let direct = coset_sum_at_point(&so4, &mu, &g, p).unwrap();
            assert_eq!(direct, rg.eval(p));
        }
    }

    #[test]
    fn linearity_over_invariants() {
        let gl3 = build_root_datum(Family::Gl, 3).unwrap();
        let mu = Coweight::from_ints(&[1, 0, 0]);
        let f = parse_polynomial("x1^3*(x2+x3)", 3).unwrap();
        let g = elementary_symmetric(3, 2); // W-invariant
        let lhs = integrate_flag(&gl3, &mu, &f.mul(&g)).unwrap();
        let rhs = integrate_flag(&gl3, &mu, &f).unwrap().mul(&g);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn nabla_minimal_gl() {
        for n in 2..=3usize {
            let rd = build_root_datum(Family::Gl, n).unwrap();
            let mut mu = vec![0i64; n];
            mu[0] = 1;
            let mu = Coweight::from_ints(&mu);
            let eta = x(n, 0).pow(n as u32);
            let sign = if n % 2 == 1 { qi(1) } else { qi(-1) };
            for g in &rd.fundamental_invariants {
                let image = nabla(&rd, &mu, &eta, &g.poly).unwrap();
                assert_eq!(image, g.poly.scale(&sign), "n={n} gen {}", g.name);
            }
        }
    }

    #[test]
    fn nabla_so_odd() {
        let rd = build_root_datum(Family::SoOdd, 2).unwrap();
        let mu = Coweight::from_ints(&[1, 0]);
        let eta = x(2, 0).pow(4); // degree D_μ+1 = 4 (D_μ = 3)
        for g in &rd.fundamental_invariants {
            let image = nabla(&rd, &mu, &eta, &g.poly).unwrap();
            assert_eq!(image, g.poly.scale(&qi(-4)), "gen {}", g.name);
        }
        // ∇(1) = 0
        let one = ExactPolynomial::one(2);
        assert!(nabla(&rd, &mu, &eta, &one).unwrap().is_zero());
    }

    #[test]
    fn nabla_is_a_derivation() {
        let rd = build_root_datum(Family::Gl, 3).unwrap();
        let mu = Coweight::from_ints(&[1, 0, 0]);
        let eta = x(3, 0).pow(3);
        let f = elementary_symmetric(3, 1);
        let g = elementary_symmetric(3, 2);
        let lhs = nabla(&rd, &mu, &eta, &f.mul(&g)).unwrap();
        let rhs = nabla(&rd, &mu, &eta, &f)
            .unwrap()
            .mul(&g)
            .add(&f.mul(&nabla(&rd, &mu, &eta, &g).unwrap()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn casimir_examples() {
        let gl3 = build_root_datum(Family::Gl, 3).unwrap();
        assert_eq!(
            casimir_direction(&gl3, &Coweight::from_ints(&[1, 1, 0])),
            parse_polynomial("x1+x2", 3).unwrap()
        );
        assert_eq!(
            casimir_direction(&gl3, &Coweight::from_ints(&[1, 0, 0])),
            parse_polynomial("x1", 3).unwrap()
        );
        assert!(casimir_direction(&gl3, &Coweight::zero(3)).is_zero());
    }

    #[test]
    fn eigenweight_gl3_length_two() {
        let rd = build_root_datum(Family::Gl, 3).unwrap();
        let mu = Coweight::from_ints(&[1, 1, 0]);
        let eta = parse_polynomial("(x1+x2)^3", 3).unwrap();
        let report = eigenweight_report(&rd, &mu, &eta).unwrap();
        let pairs = report.eigenvalue_per_generator().unwrap();
        let values: Vec<Q> = pairs.iter().map(|(_, v)| v.clone()).collect();
        assert_eq!(values, vec![qi(4), qi(1), qi(1)]);
    }

    #[test]
    fn eigenweight_so_even_with_pfaffian() {
        let rd = build_root_datum(Family::SoEven, 2).unwrap();
        let mu = Coweight::from_ints(&[1, 0]);
        let eta = x(2, 0).pow(3); // 2m−1 = 3
        let report = eigenweight_report(&rd, &mu, &eta).unwrap();
        let pairs = report.eigenvalue_per_generator().unwrap();
        assert_eq!(pairs[0], ("e1^(2)".to_string(), qi(4)));
        assert_eq!(pairs[1], ("Pf".to_string(), qi(2)));

        let rd = build_root_datum(Family::SoEven, 3).unwrap();
        let mu = Coweight::from_ints(&[1, 0, 0]);
        let eta = x(3, 0).pow(5);
        let report = eigenweight_report(&rd, &mu, &eta).unwrap();
        let pairs = report.eigenvalue_per_generator().unwrap();
        let by_name: std::collections::BTreeMap<String, Q> = pairs.into_iter().collect();
        assert_eq!(by_name["e1^(2)"], qi(4));
        assert_eq!(by_name["e2^(2)"], qi(4));
        assert_eq!(by_name["Pf"], qi(2));
    }

    #[test]
    fn eigenweight_pgl2() {
        let rd = build_root_datum(Family::Pgl, 2).unwrap();
        let mu = Coweight::new(vec![qr(1, 2), qr(-1, 2)]);
        let eta = x(2, 0).pow(2);
        let report = eigenweight_report(&rd, &mu, &eta).unwrap();
        let pairs = report.eigenvalue_per_generator().unwrap();
        assert_eq!(pairs, vec![("e2".to_string(), qi(-1))]);
    }

    #[test]
    fn eigenweights_stable_under_negation_and_conjugation() {
        // With η attached to the coweight by the Casimir recipe
        // η_μ = t_μ^{D_μ+1}, the eigenweights agree for μ and −μ and under
        // Weyl conjugation of μ.
        let casimir_eta = |rd: &RootDatum, mu: &Coweight| {
            let d = rd.flag_dimension(mu) as u32;
            casimir_direction(rd, mu).pow(d + 1)
        };
        for (rd, mu) in [
            (build_root_datum(Family::Gl, 3).unwrap(), Coweight::from_ints(&[1, 0, 0])),
            (build_root_datum(Family::SoOdd, 2).unwrap(), Coweight::from_ints(&[1, 0])),
            (build_root_datum(Family::SoEven, 2).unwrap(), Coweight::from_ints(&[1, 0])),
        ] {
            let report = eigenweight_report(&rd, &mu, &casimir_eta(&rd, &mu)).unwrap();
            let neg = mu.neg();
            let report_neg = eigenweight_report(&rd, &neg, &casimir_eta(&rd, &neg)).unwrap();
            assert_eq!(
                report.all_eigenvalues().unwrap(),
                report_neg.all_eigenvalues().unwrap(),
                "{} negation",
                rd.family.label()
            );
        }
        // W-conjugate coweight, conjugated η.
        let rd = build_root_datum(Family::Gl, 3).unwrap();
        let report = eigenweight_report(
            &rd,
            &Coweight::from_ints(&[1, 0, 0]),
            &x(3, 0).pow(3),
        )
        .unwrap();
        let report_c = eigenweight_report(
            &rd,
            &Coweight::from_ints(&[0, 1, 0]),
            &x(3, 1).pow(3),
        )
        .unwrap();
        assert_eq!(
            report.all_eigenvalues().unwrap(),
            report_c.all_eigenvalues().unwrap()
        );
    }

    #[test]
    fn degree_constants_gl() {
        for n in 2..=3usize {
            let rd = build_root_datum(Family::Gl, n).unwrap();
            let mut mu = vec![0i64; n];
            mu[0] = 1;
            let mu = Coweight::from_ints(&mu);
            let eta = x(n, 0).pow(n as u32);
            // η′ = −D·x₁^{n−1} with D = 3
            let eta_p = x(n, 0).pow(n as u32 - 1).scale(&qi(-3));
            let (dw, dp) = degree_constants(&rd, &mu, &eta, &eta_p, 5).unwrap();
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(dw, qi(sign * 5), "n={n}");
            assert_eq!(dp, qi(if n % 2 == 0 { 3 } else { -3 }), "n={n}");
        }
        // semisimple groups have vanishing first constant
        let so5 = build_root_datum(Family::SoOdd, 2).unwrap();
        let mu = Coweight::from_ints(&[1, 0]);
        let eta = x(2, 0).pow(4);
        let (dw, _) = degree_constants(&so5, &mu, &eta, &ExactPolynomial::zero(2), 7).unwrap();
        assert_eq!(dw, qi(0));
    }

    #[test]
    fn lagrange_interpolation_identity() {
        // Σ_{w∈Sn/Sn−1} w(x1^n ∏_{j≥2}(t−x_j) / ∏_{j≥2}(x1−x_j))
        //   = t^n − ∏_i (t−x_i), with t an inert extra variable.
        for n in 2..=4usize {
            let rd = build_root_datum(Family::Gl, n).unwrap();
            let mut mu = vec![0i64; n];
            mu[0] = 1;
            let mu = Coweight::from_ints(&mu);
            let vars = n + 1;
            let t = ExactPolynomial::var(vars, n);
            let mut f = ExactPolynomial::var(vars, 0).pow(n as u32);
            for j in 1..n {
                f = f.mul(&t.sub(&ExactPolynomial::var(vars, j)));
            }
            // ∏_{j≥2}(x1−x_j) = (−1)^{n−1} 𝔯_μ, so the coset sum is
            // (−1)^{n−1} ∫ f.
            let integral = integrate_flag(&rd, &mu, &f).unwrap();
            let lhs = if n % 2 == 0 { integral.neg() } else { integral };
            let mut rhs = t.pow(n as u32);
            let mut prod = ExactPolynomial::one(vars);
            for i in 0..n {
                prod = prod.mul(&t.sub(&ExactPolynomial::var(vars, i)));
            }
            rhs = rhs.sub(&prod);
            assert_eq!(lhs, rhs, "n={n}");
        }
    }

    #[test]
    fn commutation_of_reports() {
        let rd = build_root_datum(Family::Gl, 3).unwrap();
        let eta1 = x(3, 0).pow(3);
        let r1 = eigenweight_report(&rd, &Coweight::from_ints(&[1, 0, 0]), &eta1).unwrap();
        let eta2 = parse_polynomial("(x1+x2)^3", 3).unwrap();
        let r2 = eigenweight_report(&rd, &Coweight::from_ints(&[1, 1, 0]), &eta2).unwrap();
        assert!(reports_commute(&[&r1, &r2]));
    }
}
