//! Closed-form arithmetic-volume evaluators.
//!
//! Four routes are implemented:
//!
//! * [`volume_split`] — the general split formula: per-component value
//!   `q^{dim Bun_G}·(∏_j 𝔡_j)ℒ*|₀`, where each leg contributes the operator
//!   `𝔡_j = c_j + Σ_i ε_i(j)·θ_i` built from flag-calculus constants and
//!   eigenweights, acting on the product of zeta factors attached to the
//!   motive lines.
//! * [`volume_gln`] — the GL(n) closed form: the leg operators collapse to a
//!   polynomial `Σ_i b_i·N^i` in the total derivative `N`, applied to the
//!   single-variable `L*(s) = (1−q^{−s})·∏_{i=1}^n ζ(s+i)`.
//! * [`volume_unitary`] — the quasi-split U(n) theorem for an étale double
//!   cover: `2·q^{n²(g−1)}·θ^r[t^D·∏_i L(2s+i, χ^i)]` at `t = 1`.
//! * [`volume_colmez`] — the one-moving-leg PGL(n) volume over a Galois
//!   cover, computed independently in two forms (multinomial sums against
//!   the pair constants `c_{i,i′}(j)`, and the class-function repackaging
//!   through `Φ_j ∗ Φ_j∨`), which are asserted equal.
//!
//! All values are exact rationals; `θ = t·d/dt = −(log q)^{−1}·d/ds`.

use crate::characters::{convolve, dual, group_by_name, inner, phi_tuple, Sign};
use crate::error::{Error, Result};
use crate::flag_calculus::{
    degree_constants, eigenweight_report, gross_motive, reports_commute, EigenweightReport,
    GrossMotive, MotiveLine,
};
use crate::lfunctions::{apply_leg_operators, zeta_curve, ArtinLSystem, CurveData, LegOperator};
use crate::linalg::{char_poly, mat_sub, nullspace, rational_roots, rref, Mat};
use crate::num::{multinomial, q_to_string, qi, qpow, Q};
use crate::poly::ExactPolynomial;
use crate::weyl_poly::{Coweight, Family, RootDatum};
use num_traits::{One, Zero};

/// One modification leg: coweight, numerator class η, correction class η′,
/// and the component label ω consumed by the degree constants (GL only;
/// ignored for semisimple groups, where d^ω ≡ 0).
#[derive(Debug, Clone)]
pub struct LegSpec {
    pub mu: Coweight,
    pub eta: ExactPolynomial,
    pub eta_prime: ExactPolynomial,
    pub omega: i64,
}

/// An evaluated volume together with the breakdown it was assembled from.
/// Invariant: `value = q_power × operator_value × multiplicity`.
#[derive(Debug, Clone)]
pub struct VolumeResult {
    /// Content tag for the evaluation route.
    pub formula: String,
    pub value: Q,
    /// `(g−1)·dim G` — exponent of the q-power prefactor.
    pub dim_bun: i64,
    pub q_power: Q,
    /// Component/π₁ multiplicity folded into `value` (1 when per-component).
    pub multiplicity: Q,
    /// The operator-applied L-value (everything except q-power and
    /// multiplicity).
    pub operator_value: Q,
    /// Per-leg scalar constants c_j.
    pub leg_constants: Vec<Q>,
    /// Per-leg eigenvalue vector, indexed like the motive lines.
    pub leg_eigenvalues: Vec<Vec<Q>>,
    /// Route-specific expansion coefficients (b_i for the GL(n) closed form,
    /// multinomial weights for the one-leg PGL route), ascending.
    pub coefficients: Vec<Q>,
}

impl VolumeResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "formula": self.formula,
            "value": q_to_string(&self.value),
            "dimBun": self.dim_bun,
            "qPower": q_to_string(&self.q_power),
            "multiplicity": q_to_string(&self.multiplicity),
            "operatorValue": q_to_string(&self.operator_value),
            "legConstants": self.leg_constants.iter().map(q_to_string).collect::<Vec<_>>(),
            "legEigenvalues": self.leg_eigenvalues.iter()
                .map(|v| v.iter().map(q_to_string).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "coefficients": self.coefficients.iter().map(q_to_string).collect::<Vec<_>>(),
        })
    }
}

/// Express `w` in the span of `basis` (vectors of equal length), or `None`
/// if it lies outside. Exact Gaussian elimination on the augmented system.
fn express_in_span(basis: &[Vec<Q>], w: &[Q]) -> Option<Vec<Q>> {
    let rows = w.len();
    let cols = basis.len();
    let mut aug: Mat = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut row: Vec<Q> = Vec::with_capacity(cols + 1);
        for b in basis {
            row.push(b[r].clone());
        }
        row.push(w[r].clone());
        aug.push(row);
    }
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None; // inconsistent: w has a component outside the span
    }
    let mut coeffs = vec![Q::zero(); cols];
    for (row_idx, &p) in pivots.iter().enumerate() {
        coeffs[p] = aug[row_idx][cols].clone();
    }
    Some(coeffs)
}

fn mat_vec(m: &Mat, v: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Q::zero(), |acc, (a, b)| acc + a * b)
        })
        .collect()
}

/// A joint eigenline of one degree block: basis vector plus one eigenvalue
/// per leg.
struct JointLine {
    eigenvalues: Vec<Q>,
}

/// Simultaneously diagonalize the per-leg matrices of one degree block.
/// The matrices are assumed to commute (checked by the caller); each
/// eigenspace of one matrix is then invariant under the rest, so iterated
/// splitting produces a joint eigenbasis whenever every matrix is
/// diagonalizable with rational spectrum.
fn joint_eigenlines(mats: &[&Mat], dim: usize, degree: i64) -> Result<Vec<JointLine>> {
    // Each space: a list of basis vectors (length-`dim` coordinates).
    let mut spaces: Vec<Vec<Vec<Q>>> = vec![(0..dim)
        .map(|i| {
            let mut v = vec![Q::zero(); dim];
            v[i] = Q::one();
            v
        })
        .collect()];
    for mat in mats {
        let mut next: Vec<Vec<Vec<Q>>> = Vec::new();
        for space in &spaces {
            let m = space.len();
            // Restrict the matrix to the invariant subspace.
            let mut restricted: Mat = vec![vec![Q::zero(); m]; m];
            for (b, vec_b) in space.iter().enumerate() {
                let image = mat_vec(mat, vec_b);
                let coords = express_in_span(space, &image).ok_or_else(|| {
                    Error::NonCommuting(format!(
                        "degree-{degree} eigenweight block does not preserve its joint eigenspaces"
                    ))
                })?;
                for (a, c) in coords.into_iter().enumerate() {
                    restricted[a][b] = c;
                }
            }
            let cp = char_poly(&restricted);
            let roots = rational_roots(&cp).ok_or_else(|| {
                Error::IrrationalEigenvalue(format!(
                    "degree-{degree} block has irrational joint spectrum; characteristic polynomial {}",
                    cp.render("z")
                ))
            })?;
            let mut distinct: Vec<Q> = roots.clone();
            distinct.dedup();
            let mut covered = 0usize;
            for lambda in &distinct {
                let shifted = mat_sub(&restricted, &scalar_matrix(m, lambda));
                let kernel = nullspace(&shifted);
                covered += kernel.len();
                for knull in kernel {
                    // Lift the kernel vector back to ambient coordinates.
                    let mut lifted = vec![Q::zero(); dim];
                    for (b, coef) in knull.iter().enumerate() {
                        for (r, lift) in lifted.iter_mut().enumerate() {
                            *lift += coef * &space[b][r];
                        }
                    }
                    next.push(vec![lifted]);
                }
            }
            if covered != m {
                return Err(Error::NonCommuting(format!(
                    "degree-{degree} eigenweight block is not diagonalizable"
                )));
            }
            // Merge kernel vectors with equal eigenvalue back into one space
            // so later legs can still split them. The loop above pushed each
            // eigenvector as its own space; regroup by eigenvalue.
            let pushed = next.split_off(next.len() - covered);
            let mut grouped: Vec<(Q, Vec<Vec<Q>>)> = Vec::new();
            let mut idx = 0usize;
            for lambda in &distinct {
                let shifted = mat_sub(&restricted, &scalar_matrix(m, lambda));
                let k = nullspace(&shifted).len();
                let mut vecs = Vec::with_capacity(k);
                for entry in pushed.iter().skip(idx).take(k) {
                    vecs.push(entry[0].clone());
                }
                idx += k;
                if !vecs.is_empty() {
                    grouped.push((lambda.clone(), vecs));
                }
            }
            for (_, vecs) in grouped {
                next.push(vecs);
            }
        }
        spaces = next;
    }
    // Read one eigenvalue per leg off each final space; every basis vector of
    // a space shares the same tuple.
    let mut lines = Vec::new();
    for space in &spaces {
        let mut eigenvalues = Vec::with_capacity(mats.len());
        for mat in mats {
            let image = mat_vec(mat, &space[0]);
            let pivot = space[0]
                .iter()
                .position(|c| !c.is_zero())
                .expect("joint eigenvector is nonzero");
            let lambda = &image[pivot] / &space[0][pivot];
            // Exactness check on every basis vector of the space.
            for v in space {
                let img = mat_vec(mat, v);
                for (a, b) in img.iter().zip(v) {
                    if a != &(&lambda * b) {
                        return Err(Error::NonCommuting(format!(
                            "degree-{degree} block failed the joint eigenvector check"
                        )));
                    }
                }
            }
            eigenvalues.push(lambda);
        }
        for _ in space {
            lines.push(JointLine {
                eigenvalues: eigenvalues.clone(),
            });
        }
    }
    // Deterministic order: sort by eigenvalue tuple.
    lines.sort_by(|a, b| a.eigenvalues.cmp(&b.eigenvalues));
    Ok(lines)
}

fn scalar_matrix(n: usize, lambda: &Q) -> Mat {
    let mut m = vec![vec![Q::zero(); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = lambda.clone();
    }
    m
}

/// Resolve the per-line eigenvalue vectors for all legs at once. Returns the
/// (possibly rotated) line list with degrees and per-leg eigenvalues.
fn resolve_lines(
    motive: &GrossMotive,
    reports: &[EigenweightReport],
) -> Result<Vec<(MotiveLine, Vec<Q>)>> {
    if reports.is_empty() {
        return Ok(motive
            .lines
            .iter()
            .map(|l| (l.clone(), Vec::new()))
            .collect());
    }
    let mut out: Vec<(MotiveLine, Vec<Q>)> = Vec::new();
    for (block_idx, block0) in reports[0].blocks.iter().enumerate() {
        let k = block0.generator_indices.len();
        let mats: Vec<&Mat> = reports
            .iter()
            .map(|r| &r.blocks[block_idx].matrix)
            .collect();
        if k == 1 {
            let line = motive
                .lines
                .iter()
                .find(|l| l.generator_index == block0.generator_indices[0])
                .expect("motive line exists for each generator");
            let eps: Vec<Q> = mats.iter().map(|m| m[0][0].clone()).collect();
            out.push((line.clone(), eps));
        } else {
            let joint = joint_eigenlines(&mats, k, block0.degree)?;
            for (pos, jl) in joint.into_iter().enumerate() {
                out.push((
                    MotiveLine {
                        name: format!("deg{}#{}", block0.degree, pos),
                        degree: block0.degree,
                        generator_index: block0.generator_indices[pos],
                    },
                    jl.eigenvalues,
                ));
            }
        }
    }
    out.sort_by_key(|(l, _)| (l.degree, l.generator_index));
    Ok(out)
}

/// The general split-group formula: per-component
/// `q^{dim Bun_G}·(∏_j 𝔡_j)ℒ*|₀`, multiplied by #π₁(G) when `total` is set
/// (GL(n) follows the per-component convention and never carries the
/// factor).
pub fn volume_split(
    rd: &RootDatum,
    legs: &[LegSpec],
    curve: &CurveData,
    total: bool,
) -> Result<VolumeResult> {
    let mut sum = Coweight::zero(rd.coordinates);
    for leg in legs {
        if !rd.is_minuscule(&leg.mu) {
            return Err(Error::NotMinuscule(leg.mu.render()));
        }
        if !rd.is_dominant(&leg.mu) {
            return Err(Error::NotDominant(leg.mu.render()));
        }
        sum = sum.add(&leg.mu);
    }
    if !rd.in_coroot_lattice(&sum) {
        return Err(Error::Inadmissible(format!(
            "coweight sum {} is not in the coroot lattice",
            sum.render()
        )));
    }

    let motive = gross_motive(rd);
    let mut reports = Vec::with_capacity(legs.len());
    let mut constants = Vec::with_capacity(legs.len());
    for leg in legs {
        reports.push(eigenweight_report(rd, &leg.mu, &leg.eta)?);
        let (d_omega, d_prime) = degree_constants(rd, &leg.mu, &leg.eta, &leg.eta_prime, leg.omega)?;
        constants.push(d_omega + d_prime);
    }
    let refs: Vec<&EigenweightReport> = reports.iter().collect();
    if !reports_commute(&refs) {
        return Err(Error::NonCommuting(
            "per-degree eigenweight matrices of the legs do not commute".into(),
        ));
    }

    let lines = resolve_lines(&motive, &reports)?;
    let resolved_motive = GrossMotive {
        lines: lines.iter().map(|(l, _)| l.clone()).collect(),
    };
    let leg_eigenvalues: Vec<Vec<Q>> = (0..legs.len())
        .map(|j| lines.iter().map(|(_, eps)| eps[j].clone()).collect())
        .collect();
    let ops: Vec<LegOperator> = constants
        .iter()
        .zip(&leg_eigenvalues)
        .map(|(c, eps)| LegOperator {
            c: c.clone(),
            eps: eps.clone(),
        })
        .collect();

    let operator_value = apply_leg_operators(curve, &resolved_motive, &ops)?;
    let dim_bun = (curve.g as i64 - 1) * rd.dim_g;
    let q_power = qpow(&curve.qq(), dim_bun);
    let multiplicity = if total && rd.family != Family::Gl {
        qi(rd.pi1_order as i64)
    } else {
        Q::one()
    };
    Ok(VolumeResult {
        formula: "volume-split".into(),
        value: &q_power * &operator_value * &multiplicity,
        dim_bun,
        q_power,
        multiplicity,
        operator_value,
        leg_constants: constants,
        leg_eigenvalues,
        coefficients: Vec::new(),
    })
}

/// The GL(n) closed form. The legs are colength-one modifications encoded by
/// their signs (♯ raises, ♭ lowers) and twisting degrees `D_j`; `d` is the
/// component degree. Expands `∏_j(ω_j − |μ_j|·D_j + |μ_j|·N)` into
/// coefficients `b_i` with `ω_j = d − Σ_{k≥j}|μ_k|`, then applies
/// `Σ_i b_i·θ^i` to `L*(s) = (1−q^{−s})·∏_{i=1}^n ζ(s+i)` at `t = 1`. The
/// sign `(−1)^{r/2}` collects the per-leg orientation factors
/// `(−1)^{n−1}` (♯) and `(−1)^n` (♭).
pub fn volume_gln(
    n: usize,
    d: i64,
    signs: &[Sign],
    degs: &[i64],
    curve: &CurveData,
) -> Result<VolumeResult> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if signs.len() != degs.len() {
        return Err(Error::InvalidInput(format!(
            "{} signs but {} twisting degrees",
            signs.len(),
            degs.len()
        )));
    }
    let r = signs.len();
    if !r.is_multiple_of(2) {
        return Err(Error::Inadmissible(format!(
            "r = {r} legs: colength-one modifications must come in raising/lowering pairs"
        )));
    }
    let sharps = signs.iter().filter(|s| **s == Sign::Sharp).count();
    if sharps * 2 != r {
        return Err(Error::Inadmissible(format!(
            "{sharps} raising vs {} lowering legs: the total modification degree must vanish",
            r - sharps
        )));
    }

    // b-coefficients: product of the per-leg linear polynomials in N.
    let mut b: Vec<Q> = vec![Q::one()];
    let mut suffix: i64 = 0; // Σ_{k≥j} |μ_k|, built from the right
    let mut leg_constants: Vec<Q> = vec![Q::zero(); r];
    for j in (0..r).rev() {
        let s_j = signs[j].value();
        suffix += s_j;
        let omega_j = d - suffix;
        let constant = qi(omega_j - s_j * degs[j]);
        let linear = qi(s_j);
        // The 𝔡_j scalar part, with its orientation sign, for the breakdown.
        let orient = if signs[j] == Sign::Sharp {
            if n % 2 == 1 { qi(1) } else { qi(-1) }
        } else if n.is_multiple_of(2) {
            qi(1)
        } else {
            qi(-1)
        };
        leg_constants[j] = &orient * &constant;
        let mut next = vec![Q::zero(); b.len() + 1];
        for (i, coeff) in b.iter().enumerate() {
            next[i] += coeff * &constant;
            next[i + 1] += coeff * &linear;
        }
        b = next;
    }

    // θ-tower of L*(s) = (1−q^{−s})·∏_{i=1}^n ζ(s+i) at t = 1.
    let mut lstar = zeta_curve(curve).shift(1).star();
    for i in 2..=(n as i64) {
        lstar = lstar.mul(&zeta_curve(curve).shift(i))?;
    }
    let mut f = lstar.rational();
    let one = Q::one();
    let mut tower = vec![f.eval(&one)?];
    for _ in 0..r {
        f = f.theta();
        tower.push(f.eval(&one)?);
    }
    let mut bracket = Q::zero();
    for (i, coeff) in b.iter().enumerate() {
        bracket += coeff * &tower[i];
    }
    let sign = if (r / 2) % 2 == 1 { qi(-1) } else { qi(1) };
    let operator_value = &sign * &bracket;

    let dim_bun = (curve.g as i64 - 1) * (n as i64) * (n as i64);
    let q_power = qpow(&curve.qq(), dim_bun);
    let eps = if n % 2 == 1 { qi(1) } else { qi(-1) }; // (−1)^{n−1}
    Ok(VolumeResult {
        formula: "volume-gln-closed-form".into(),
        value: &q_power * &operator_value,
        dim_bun,
        q_power,
        multiplicity: Q::one(),
        operator_value,
        leg_constants,
        leg_eigenvalues: vec![vec![eps; n]; r],
        coefficients: b,
    })
}

/// The U(n) theorem for an étale double cover supplied as a Z/2 Artin
/// system over the base curve: `2·q^{n²(g−1)}·θ^r[t^D·∏_{i=1}^n
/// L(2s+i, χ^i)]` at `t = 1`, where χ is the cover's quadratic character.
/// Even powers of χ contribute the base zeta (poles included), odd powers
/// the χ-numerator. The reported `multiplicity` 2 counts the two components;
/// `q_power × operator_value` is the per-component half.
pub fn volume_unitary(
    n: usize,
    r: usize,
    bundle_degree: i64,
    cover: &ArtinLSystem,
) -> Result<VolumeResult> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if !r.is_multiple_of(2) {
        return Err(Error::Inadmissible(format!(
            "r = {r}: the number of legs must be even"
        )));
    }
    if cover.group != "z2" {
        return Err(Error::InvalidInput(format!(
            "cover data must be a Z/2 system, got group \"{}\"",
            cover.group
        )));
    }
    let triv = cover
        .rep("triv")
        .ok_or_else(|| Error::InconsistentData("cover data lacks the trivial factor".into()))?;
    let chi = cover
        .rep("sgn")
        .ok_or_else(|| Error::InconsistentData("cover data lacks the quadratic character".into()))?;

    let q = qi(cover.q as i64);
    let mut total = crate::lfunctions::LSeries::one(q.clone());
    for i in 1..=(n as i64) {
        let base = if i % 2 == 0 { triv } else { chi };
        let factor = base.lseries.shift(i).stretch_double();
        total = total.mul(&factor)?;
    }
    total = total.mul_power(bundle_degree);

    let mut f = total.rational();
    let one = Q::one();
    for _ in 0..r {
        f = f.theta();
    }
    let operator_value = f.eval(&one)?;
    let g = cover.g_y as i64;
    let dim_bun = (g - 1) * (n as i64) * (n as i64);
    let q_power = qpow(&q, dim_bun);
    let multiplicity = qi(2);
    let eps2 = if n % 2 == 1 { qi(2) } else { qi(-2) }; // (−1)^{n−1}·2 per line
    let c = if n % 2 == 1 {
        qi(-bundle_degree)
    } else {
        qi(bundle_degree)
    };
    Ok(VolumeResult {
        formula: "volume-unitary".into(),
        value: &q_power * &operator_value * &multiplicity,
        dim_bun,
        q_power,
        multiplicity,
        operator_value,
        leg_constants: vec![c; r],
        leg_eigenvalues: vec![vec![eps2; n]; r],
        coefficients: Vec::new(),
    })
}

/// θ-logarithmic value `(θL/L)(q^{−d})` for one irreducible factor, equal to
/// `−(log q)^{−1}·L′/L` at `s = d`.
fn theta_log(artin: &ArtinLSystem, rep_idx: usize, d: i64) -> Result<Q> {
    artin.log_derivative(rep_idx, d)
}

/// The one-moving-leg PGL(n) volume over a Galois cover X → Y with group Σ,
/// legs at `σ_i(x)` with polarities `signs`, against
/// `η = (t₁+⋯+t_r)^{(n−1)r+1}`. Returns the two independent evaluations
/// (pair-constant form, class-function form); they are verified equal
/// before returning.
pub fn volume_colmez(
    n: usize,
    r: usize,
    signs: &[Sign],
    sigma: &[String],
    artin: &ArtinLSystem,
    g_y: u32,
) -> Result<(VolumeResult, VolumeResult)> {
    if n < 2 {
        return Err(Error::InvalidInput(
            "n must be at least 2 (no invariants, hence no relations, below rank 1)".into(),
        ));
    }
    if r == 0 {
        return Err(Error::InvalidInput(
            "at least one leg is required".into(),
        ));
    }
    if signs.len() != r || sigma.len() != r {
        return Err(Error::InvalidInput(format!(
            "expected {r} signs and {r} Galois elements, got {} and {}",
            signs.len(),
            sigma.len()
        )));
    }
    if g_y != artin.g_y {
        return Err(Error::InconsistentData(format!(
            "base genus {g_y} disagrees with the Artin system's {}",
            artin.g_y
        )));
    }
    let group = group_by_name(&artin.group)?;
    let sigma_idx: Vec<usize> = sigma
        .iter()
        .map(|name| {
            group.element_by_name(name).ok_or_else(|| {
                Error::InvalidInput(format!("\"{name}\" is not an element of {}", group.label))
            })
        })
        .collect::<Result<_>>()?;
    // Map each Artin factor to its row in the character table, by name.
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

    let zeta_x = artin.zeta_product()?;
    let g_x = artin.g_x()? as i64;
    let dim_g = (n * n - 1) as i64;
    let dim_bun = (g_x - 1) * dim_g;
    let q = qi(artin.q as i64);
    let q_power = qpow(&q, dim_bun);
    let mut zeta_values = Q::one();
    for dd in 2..=(n as i64) {
        zeta_values *= zeta_x.value_at_s(dd)?;
    }

    let dim_sht = ((n - 1) * r + 1) as i64;
    let m0_parts: Vec<i64> = std::iter::once(n as i64)
        .chain(std::iter::repeat_n(n as i64 - 1, r - 1))
        .collect();
    let m0 = multinomial(dim_sht, &m0_parts);
    let m_j = |j: i64| -> Q {
        let parts: Vec<i64> = [n as i64 + j - 1, n as i64 - j]
            .into_iter()
            .chain(std::iter::repeat_n(n as i64 - 1, r.saturating_sub(2)))
            .collect();
        multinomial(dim_sht, &parts)
    };

    // χ_{ρ∨}(g) = χ_ρ(g⁻¹).
    let chi_dual = |rho: usize, g: usize| -> Q { group.chi(rho, group.inverse(g)) };
    // Pair constant sums: Σ_ρ χ_{ρ∨}(g)·(θL_ρ/L_ρ)(d).
    let char_theta_sum = |g: usize, d: i64| -> Result<Q> {
        let mut acc = Q::zero();
        for (k, &row) in rep_row.iter().enumerate() {
            let w = chi_dual(row, g);
            if !w.is_zero() {
                acc += &w * theta_log(artin, k, d)?;
            }
        }
        Ok(acc)
    };
    // c_{i,i′}(j): the pair constants, in θ-convention
    // (L′/(log q·L) = −θ-value).
    let c_pair = |i: usize, ip: usize, j: i64| -> Result<Q> {
        if ip >= i {
            let g = group.product(group.inverse(sigma_idx[i]), sigma_idx[ip]);
            char_theta_sum(g, j)
        } else {
            let g = group.product(group.inverse(sigma_idx[ip]), sigma_idx[i]);
            Ok(-char_theta_sum(g, 1 - j)?)
        }
    };

    // ---- Form (a): multinomial sums against the pair constants. ----
    let mut s_a = Q::zero();
    let mut diag_constants = vec![Q::zero(); r];
    for j in 2..=(n as i64) {
        let mj = m_j(j);
        for i in 0..r {
            let cii = c_pair(i, i, j)?;
            diag_constants[i] += &cii;
            s_a -= &cii * &m0;
        }
        for i in 0..r {
            for ip in 0..r {
                if i == ip {
                    continue;
                }
                let parity = crate::characters::nu(signs[i], signs[ip]) as i64 * j;
                let sign = if parity % 2 == 0 { Q::one() } else { -Q::one() };
                s_a -= sign * c_pair(i, ip, j)? * &mj;
            }
        }
    }

    // ---- Form (b): class-function repackaging. ----
    let order = qi(group.order() as i64);
    let order_sq = &order * &order;
    let g_y_q = qi(g_y as i64);
    let mut s_b = Q::zero();
    for j in 2..=(n as i64) {
        let mj = m_j(j);
        let phi = phi_tuple(&group, &sigma_idx, signs, j)?;
        let conv = convolve(&group, &phi, &dual(&group, &phi))?;
        // Expansion coefficients a_ρ = ⟨Φ_j∗Φ_j∨, χ_{ρ∨}⟩, aligned with the
        // Artin factors.
        let class_coeffs: Vec<Q> = rep_row
            .iter()
            .map(|&row| {
                let mut chi_v = group.character(row);
                chi_v = dual(&group, &chi_v);
                inner(&group, &conv, &chi_v)
            })
            .collect();
        let theta_nat = artin.log_derivative_class(&class_coeffs, j)?;
        let theta_zeta = zeta_x.log_derivative_at(j)?;
        let conv_at_identity = conv.value(0);
        let defect = &conv_at_identity - qi(r as i64) / &order;
        // Direct substitution of the pair constants into the multinomial
        // sums yields, in θ-convention:
        //   −r(M₀−M_j)·θζ(j) − |Σ|²·M_j·θ_♮(j) + (g_Y−1)|Σ|²·M_j·defect.
        s_b += qi(-(r as i64)) * (&m0 - &mj) * &theta_zeta;
        s_b += -&order_sq * &mj * &theta_nat;
        s_b += (&g_y_q - Q::one()) * &order_sq * &mj * &defect;
    }

    let make = |formula: &str, s: &Q, constants: Vec<Q>| VolumeResult {
        formula: formula.into(),
        value: &q_power * &zeta_values * s,
        dim_bun,
        q_power: q_power.clone(),
        multiplicity: Q::one(),
        operator_value: &zeta_values * s,
        leg_constants: constants,
        leg_eigenvalues: Vec::new(),
        coefficients: std::iter::once(m0.clone())
            .chain((2..=(n as i64)).map(m_j))
            .collect(),
    };
    let result_a = make("colmez-multinomial", &s_a, diag_constants);
    let result_b = make("colmez-artin", &s_b, Vec::new());
    if result_a.value != result_b.value {
        return Err(Error::Internal(format!(
            "pair-constant and class-function evaluations disagree: {} vs {}",
            q_to_string(&result_a.value),
            q_to_string(&result_b.value)
        )));
    }
    Ok((result_a, result_b))
}
