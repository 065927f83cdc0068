//! Truncated-trace oracle for the volume values.
//!
//! Every closed-form volume in this crate is, by construction, an alternating
//! sum of Frobenius traces on a graded vector space: the free graded-commutative
//! algebra on one copy of the curve homology `H₀ ⊕ H₁ ⊕ H₂` per motive line,
//! with the degree-zero slot of each line removed.  This module evaluates that
//! sum directly — enumerating monomials degree by degree, applying the leg
//! operators as derivations, and contracting against the inverse Frobenius —
//! entirely in exact rational arithmetic.
//!
//! It consumes only the eigenweight matrices and the raw curve data (`q`, the
//! genus, and the Frobenius matrix on H¹); it never touches the L-series
//! machinery.  Agreement with the closed forms is therefore a genuine
//! two-route consistency check, certified by an observed geometric decay of
//! the truncated tail.
//!
//! Grading and operators:
//!
//! * a line of degree `d` contributes generators of cohomological weight `2d`
//!   (H₀ slot), `2d−1` (one odd generator per H¹ basis vector of the curve),
//!   and `2d−2` (H₂ slot, omitted when `d = 1` since that weight would be 0);
//! * a leg acts as `c·id + D` where `D` is the derivation extending the
//!   eigenweight block matrices slot-by-slot (the curve index is untouched);
//! * the inverse Frobenius is the algebra map scaling the H₀ slot by `q^{−d}`,
//!   the H₂ slot by `q^{1−d}`, and acting on the odd slots by `q^{−d}·Φ`,
//!   where `Φ` is the curve's Frobenius matrix on H¹.
//!
//! The composite is weight-preserving, so the trace splits by degree; the
//! alternating sum converges geometrically because every Frobenius eigenvalue
//! on a weight-`w` generator has absolute value `q^{−w/2}`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::flag_calculus::{EigenweightReport, GrossMotive};
use crate::lfunctions::CurveData;
use crate::linalg::{det, Mat};
use crate::num::{q_to_f64, q_to_string, qabs, qi, qpow, Q};

/// Relative tolerance used when comparing a truncated trace against an exact
/// closed-form value (see [`agrees`]).
pub const TRACE_RELATIVE_TOLERANCE: f64 = 1e-6;

/// Hard cap on the truncation degree, protecting the per-degree bucket table.
const MAX_DMAX: i64 = 100_000;

/// Hard cap on the number of basis monomials a single run may enumerate.
const MAX_BASIS: usize = 2_000_000;

/// Which side of the adjunction the trace is evaluated on.
///
/// The two routes compute the same per-degree numbers, but through different
/// bookkeeping: [`Normalization::Ordinary`] expands the leg image of each
/// basis monomial and *extracts* the inverse-Frobenius matrix entry (a minor
/// determinant on the odd slots), while [`Normalization::CompactSupport`]
/// expands the Frobenius twist *forward* (a signed wedge expansion, carrying
/// the `q^{dim Bun}` factor of the compactly-supported normalization) before
/// applying the legs.  Exact agreement is a strong regression check on the
/// sign conventions and the adjoint bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Ordinary,
    CompactSupport,
}

impl Normalization {
    pub fn label(&self) -> &'static str {
        match self {
            Normalization::Ordinary => "ordinary",
            Normalization::CompactSupport => "compact-support",
        }
    }
}

/// One leg's action on the generator space: the scalar part `c` and the
/// derivation matrices, one block per distinct motive degree in ascending
/// order, in the `matrix[target][source]` convention of the eigenweight
/// report.
#[derive(Debug, Clone)]
pub struct TraceLeg {
    pub c: Q,
    pub blocks: Vec<Mat>,
}

/// Package an eigenweight report and a scalar constant as a trace leg.
/// Report blocks are already ascending by degree with lines in motive order,
/// so the matrices carry over verbatim.
pub fn leg_from_report(report: &EigenweightReport, c: Q) -> TraceLeg {
    TraceLeg {
        c,
        blocks: report.blocks.iter().map(|b| b.matrix.clone()).collect(),
    }
}

/// The outcome of a truncated trace evaluation.
///
/// `per_degree[i]` is the signed, `q^{dim Bun}`-scaled trace contribution of
/// cohomological degree `i`; `partial_sums` accumulates them and `total` is
/// the last partial sum.  The certificate fields record the observed decay:
/// `decay_ratio` is the largest ratio `|a_i| / |a_{i−2}|` seen past the
/// burn-in degree, and `tail_bound` is the geometric-series bound
/// `(|a_dmax| + |a_{dmax−1}|)·ρ/(1−ρ)` it implies for the discarded tail
/// (absent when the observed ratio reaches 1, i.e. when decay could not be
/// certified).
#[derive(Debug, Clone)]
pub struct TraceRun {
    pub normalization: Normalization,
    pub dim_bun: i64,
    pub q_power: Q,
    pub dmax: i64,
    /// Number of basis monomials in each cohomological degree.
    pub basis_counts: Vec<usize>,
    pub per_degree: Vec<Q>,
    pub partial_sums: Vec<Q>,
    pub total: Q,
    pub burn_in: i64,
    pub decay_ratio: Option<f64>,
    pub tail_bound: Option<f64>,
}

impl TraceRun {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "normalization": self.normalization.label(),
            "dimBun": self.dim_bun,
            "qPower": q_to_string(&self.q_power),
            "dmax": self.dmax,
            "basisCounts": self.basis_counts,
            "perDegree": self.per_degree.iter().map(q_to_string).collect::<Vec<_>>(),
            "partialSums": self.partial_sums.iter().map(q_to_string).collect::<Vec<_>>(),
            "total": q_to_string(&self.total),
            "burnIn": self.burn_in,
            "decayRatio": self.decay_ratio.filter(|r| r.is_finite()),
            "tailBound": self.tail_bound,
        })
    }
}

/// Does the truncated total match a closed-form value, up to the larger of
/// the pinned relative tolerance and the certified tail bound?
pub fn agrees(run: &TraceRun, closed: &Q) -> bool {
    let diff = q_to_f64(&qabs(&(run.total.clone() - closed.clone())));
    let rel = TRACE_RELATIVE_TOLERANCE * q_to_f64(&qabs(closed));
    diff <= rel.max(run.tail_bound.unwrap_or(0.0))
}

// ---------------------------------------------------------------------------
// Generator-space model
// ---------------------------------------------------------------------------

/// Curve-homology slot of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    H0,
    H1(usize),
    H2,
}

#[derive(Debug, Clone)]
struct Generator {
    /// Index into `motive.lines`.
    line: usize,
    /// Index of this line's degree block, and the line's position inside it.
    block: usize,
    pos: usize,
    slot: Slot,
    /// Cohomological weight.
    weight: i64,
    odd: bool,
}

struct Ambient {
    gens: Vec<Generator>,
    /// Inverse-Frobenius multiplier of each even generator (unused for odd).
    even_scale: Vec<Q>,
    /// Inverse-Frobenius image of each odd generator: (target, coefficient).
    odd_image: Vec<Vec<(usize, Q)>>,
    /// Motive line indices grouped by degree block, ascending.
    block_lines: Vec<Vec<usize>>,
    /// First generator index of each line.
    line_start: Vec<usize>,
    two_g: usize,
    dim_bun: i64,
}

impl Ambient {
    fn gen_index(&self, line: usize, slot: Slot) -> usize {
        self.line_start[line]
            + match slot {
                Slot::H0 => 0,
                Slot::H1(k) => 1 + k,
                Slot::H2 => 1 + self.two_g,
            }
    }
}

fn build_ambient(curve: &CurveData, motive: &GrossMotive) -> Result<Ambient> {
    curve.validate()?;
    let phi = curve.frobenius_matrix()?;
    let two_g = 2 * curve.g as usize;
    let qq = curve.qq();

    let mut block_lines: Vec<Vec<usize>> = Vec::new();
    let mut last_degree: Option<i64> = None;
    let mut gens: Vec<Generator> = Vec::new();
    let mut even_scale: Vec<Q> = Vec::new();
    let mut line_start: Vec<usize> = Vec::new();

    for (l, line) in motive.lines.iter().enumerate() {
        let d = line.degree;
        if d <= 0 {
            return Err(Error::InconsistentData(format!(
                "motive line {} has non-positive degree {d}",
                line.name
            )));
        }
        match last_degree {
            Some(prev) if d < prev => {
                return Err(Error::InconsistentData(
                    "motive lines must be sorted ascending by degree".into(),
                ))
            }
            Some(prev) if d == prev => block_lines.last_mut().unwrap().push(l),
            _ => block_lines.push(vec![l]),
        }
        last_degree = Some(d);
        let block = block_lines.len() - 1;
        let pos = block_lines[block].len() - 1;

        line_start.push(gens.len());
        gens.push(Generator { line: l, block, pos, slot: Slot::H0, weight: 2 * d, odd: false });
        even_scale.push(qpow(&qq, -d));
        for k in 0..two_g {
            gens.push(Generator {
                line: l,
                block,
                pos,
                slot: Slot::H1(k),
                weight: 2 * d - 1,
                odd: true,
            });
            even_scale.push(Q::zero());
        }
        if d != 1 {
            gens.push(Generator { line: l, block, pos, slot: Slot::H2, weight: 2 * d - 2, odd: false });
            even_scale.push(qpow(&qq, 1 - d));
        }
    }

    // Odd images need the final generator layout, hence a second pass.
    let mut odd_image: Vec<Vec<(usize, Q)>> = vec![Vec::new(); gens.len()];
    for g in 0..gens.len() {
        if let Slot::H1(k) = gens[g].slot {
            let d = motive.lines[gens[g].line].degree;
            let scale = qpow(&qq, -d);
            let mut img = Vec::new();
            for (kp, row) in phi.iter().enumerate() {
                if !row[k].is_zero() {
                    img.push((
                        gen_offset(&line_start, gens[g].line, kp),
                        scale.clone() * &row[k],
                    ));
                }
            }
            odd_image[g] = img;
        }
    }

    let dim_g: i64 = motive.lines.iter().map(|l| 2 * l.degree - 1).sum();
    let dim_bun = (curve.g as i64 - 1) * dim_g;

    Ok(Ambient {
        gens,
        even_scale,
        odd_image,
        block_lines,
        line_start,
        two_g,
        dim_bun,
    })
}

fn gen_offset(line_start: &[usize], line: usize, k: usize) -> usize {
    line_start[line] + 1 + k
}

/// Expand one leg's block matrices into a per-generator image list
/// `images[g] = [(target, weight)]`, validating shapes against the motive.
fn leg_generator_images(amb: &Ambient, leg: &TraceLeg) -> Result<Vec<Vec<(usize, Q)>>> {
    if leg.blocks.len() != amb.block_lines.len() {
        return Err(Error::DimensionMismatch(format!(
            "leg has {} degree blocks, the motive has {}",
            leg.blocks.len(),
            amb.block_lines.len()
        )));
    }
    for (b, mat) in leg.blocks.iter().enumerate() {
        let size = amb.block_lines[b].len();
        if mat.len() != size || mat.iter().any(|row| row.len() != size) {
            return Err(Error::DimensionMismatch(format!(
                "degree block {b} must be a {size}×{size} matrix"
            )));
        }
    }
    let mut images = vec![Vec::new(); amb.gens.len()];
    for (g, ge) in amb.gens.iter().enumerate() {
        let mat = &leg.blocks[ge.block];
        let lines = &amb.block_lines[ge.block];
        let mut img = Vec::new();
        for (bpos, &lt) in lines.iter().enumerate() {
            let w = &mat[bpos][ge.pos];
            if !w.is_zero() {
                img.push((amb.gen_index(lt, ge.slot), w.clone()));
            }
        }
        images[g] = img;
    }
    Ok(images)
}

// ---------------------------------------------------------------------------
// Monomial basis
// ---------------------------------------------------------------------------

/// Enumerate exponent vectors (odd generators capped at 1) bucketed by total
/// cohomological weight `0..=dmax`.
fn monomials_by_degree(amb: &Ambient, dmax: i64) -> Result<Vec<Vec<Vec<u32>>>> {
    let mut buckets: Vec<Vec<Vec<u32>>> = vec![Vec::new(); (dmax + 1) as usize];
    let mut cur = vec![0u32; amb.gens.len()];
    let mut count = 0usize;
    enumerate_rec(amb, 0, 0, dmax, &mut cur, &mut buckets, &mut count)?;
    Ok(buckets)
}

fn enumerate_rec(
    amb: &Ambient,
    k: usize,
    used: i64,
    dmax: i64,
    cur: &mut Vec<u32>,
    out: &mut [Vec<Vec<u32>>],
    count: &mut usize,
) -> Result<()> {
    if k == amb.gens.len() {
        *count += 1;
        if *count > MAX_BASIS {
            return Err(Error::InvalidInput(format!(
                "monomial basis exceeds {MAX_BASIS} elements up to degree {dmax}; lower the truncation degree"
            )));
        }
        out[used as usize].push(cur.clone());
        return Ok(());
    }
    let w = amb.gens[k].weight;
    let mut cap = ((dmax - used) / w) as u32;
    if amb.gens[k].odd {
        cap = cap.min(1);
    }
    for e in 0..=cap {
        cur[k] = e;
        enumerate_rec(amb, k + 1, used + w * e as i64, dmax, cur, out, count)?;
    }
    cur[k] = 0;
    Ok(())
}

// ---------------------------------------------------------------------------
// Operator application
// ---------------------------------------------------------------------------

fn accumulate(map: &mut BTreeMap<Vec<u32>, Q>, key: Vec<u32>, val: Q) {
    if val.is_zero() {
        return;
    }
    *map.entry(key).or_insert_with(Q::zero) += val;
}

/// Apply `c·id + D` to a sparse combination of monomials, where `D` is the
/// derivation with the given generator images.  Replacing an odd generator by
/// another picks up the Koszul sign of resorting the wedge word: one `−1` per
/// odd generator present strictly between source and target.
fn apply_leg(
    amb: &Ambient,
    images: &[Vec<(usize, Q)>],
    c: &Q,
    state: &BTreeMap<Vec<u32>, Q>,
) -> BTreeMap<Vec<u32>, Q> {
    let mut next: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    for (m, coef) in state {
        if !c.is_zero() {
            accumulate(&mut next, m.clone(), coef.clone() * c);
        }
        for (g, &e) in m.iter().enumerate() {
            if e == 0 {
                continue;
            }
            for (t, w) in &images[g] {
                if *t == g {
                    accumulate(&mut next, m.clone(), coef.clone() * w * qi(e as i64));
                    continue;
                }
                if amb.gens[*t].odd && m[*t] > 0 {
                    continue; // wedge square vanishes
                }
                let mut val = coef.clone() * w * qi(e as i64);
                if amb.gens[g].odd {
                    let (lo, hi) = if g < *t { (g, *t) } else { (*t, g) };
                    let crossings = ((lo + 1)..hi)
                        .filter(|&s| amb.gens[s].odd && m[s] > 0)
                        .count();
                    if crossings % 2 == 1 {
                        val = -val;
                    }
                }
                let mut m2 = m.clone();
                m2[g] -= 1;
                m2[*t] += 1;
                accumulate(&mut next, m2, val);
            }
        }
    }
    next.retain(|_, v| !v.is_zero());
    next
}

/// Matrix entry `⟨m_out | Frob⁻¹ | m_in⟩`: even exponents must match (they are
/// only rescaled), and the odd sector contributes a minor determinant of the
/// generator-level Frobenius between the two sorted wedge words.
fn frob_extract(amb: &Ambient, m_out: &[u32], m_in: &[u32]) -> Q {
    let mut scale = Q::one();
    let mut s_in: Vec<usize> = Vec::new();
    let mut s_out: Vec<usize> = Vec::new();
    for (g, ge) in amb.gens.iter().enumerate() {
        if ge.odd {
            if m_in[g] == 1 {
                s_in.push(g);
            }
            if m_out[g] == 1 {
                s_out.push(g);
            }
        } else {
            if m_in[g] != m_out[g] {
                return Q::zero();
            }
            if m_in[g] > 0 {
                scale *= qpow(&amb.even_scale[g], m_in[g] as i64);
            }
        }
    }
    if s_in.len() != s_out.len() {
        return Q::zero();
    }
    if s_in.is_empty() {
        return scale;
    }
    let k = s_in.len();
    let mut a = vec![vec![Q::zero(); k]; k];
    for (j, &src) in s_in.iter().enumerate() {
        for (t, w) in &amb.odd_image[src] {
            if let Ok(i) = s_out.binary_search(t) {
                a[i][j] = w.clone();
            }
        }
    }
    scale * det(&a)
}

/// Expand `prefactor · Frob⁻¹(m)` as a sparse combination of monomials: the
/// even part is a diagonal rescaling, the odd part a signed wedge expansion
/// over injective target assignments.
fn frob_forward(amb: &Ambient, m: &[u32], prefactor: &Q) -> BTreeMap<Vec<u32>, Q> {
    let mut scale = prefactor.clone();
    let mut sources: Vec<usize> = Vec::new();
    for (g, ge) in amb.gens.iter().enumerate() {
        if m[g] == 0 {
            continue;
        }
        if ge.odd {
            sources.push(g);
        } else {
            scale *= qpow(&amb.even_scale[g], m[g] as i64);
        }
    }
    let mut out = BTreeMap::new();
    let mut chosen = Vec::with_capacity(sources.len());
    expand_odd(amb, m, &sources, &mut chosen, &scale, &mut out);
    out
}

fn expand_odd(
    amb: &Ambient,
    m: &[u32],
    sources: &[usize],
    chosen: &mut Vec<usize>,
    coef: &Q,
    out: &mut BTreeMap<Vec<u32>, Q>,
) {
    if coef.is_zero() {
        return;
    }
    let i = chosen.len();
    if i == sources.len() {
        // Sign of sorting the chosen targets into ascending order.
        let mut inversions = 0usize;
        for a in 0..i {
            for b in (a + 1)..i {
                if chosen[a] > chosen[b] {
                    inversions += 1;
                }
            }
        }
        let mut mono = m.to_vec();
        for &s in sources {
            mono[s] = 0;
        }
        for &t in chosen.iter() {
            mono[t] = 1;
        }
        let val = if inversions % 2 == 1 { -coef.clone() } else { coef.clone() };
        accumulate(out, mono, val);
        return;
    }
    for (t, w) in &amb.odd_image[sources[i]] {
        if chosen.contains(t) {
            continue;
        }
        chosen.push(*t);
        let c2 = coef.clone() * w;
        expand_odd(amb, m, sources, chosen, &c2, out);
        chosen.pop();
    }
}

/// Diagonal entry of `Frob⁻¹ ∘ Γ_1 ∘ … ∘ Γ_r` at `m` (legs applied last to
/// first, inverse Frobenius extracted against the result).
fn ordinary_term(
    amb: &Ambient,
    leg_images: &[Vec<Vec<(usize, Q)>>],
    legs: &[TraceLeg],
    m: &[u32],
) -> Q {
    let mut state = BTreeMap::new();
    state.insert(m.to_vec(), Q::one());
    for j in (0..legs.len()).rev() {
        state = apply_leg(amb, &leg_images[j], &legs[j].c, &state);
    }
    let mut out = Q::zero();
    for (mp, coef) in &state {
        let f = frob_extract(amb, m, mp);
        if !f.is_zero() {
            out += coef.clone() * f;
        }
    }
    out
}

/// Diagonal entry of the cyclically rotated composite
/// `Γ_1 ∘ … ∘ Γ_r ∘ (q^{dim Bun}·Frob⁻¹)` at `m` — the compactly-supported
/// normalization, which expands the Frobenius twist first.
fn compact_term(
    amb: &Ambient,
    leg_images: &[Vec<Vec<(usize, Q)>>],
    legs: &[TraceLeg],
    m: &[u32],
    q_power: &Q,
) -> Q {
    let mut state = frob_forward(amb, m, q_power);
    for j in (0..legs.len()).rev() {
        state = apply_leg(amb, &leg_images[j], &legs[j].c, &state);
    }
    state.get(m).cloned().unwrap_or_else(Q::zero)
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// Evaluate the alternating trace sum truncated at cohomological degree
/// `dmax`, with the decay certificate.
pub fn truncated_trace(
    curve: &CurveData,
    motive: &GrossMotive,
    legs: &[TraceLeg],
    dmax: i64,
    normalization: Normalization,
) -> Result<TraceRun> {
    if dmax < 0 {
        return Err(Error::InvalidInput("truncation degree must be nonnegative".into()));
    }
    if dmax > MAX_DMAX {
        return Err(Error::InvalidInput(format!(
            "truncation degree {dmax} exceeds the supported maximum {MAX_DMAX}"
        )));
    }
    let amb = build_ambient(curve, motive)?;
    let leg_images: Vec<Vec<Vec<(usize, Q)>>> = legs
        .iter()
        .map(|leg| leg_generator_images(&amb, leg))
        .collect::<Result<_>>()?;
    let buckets = monomials_by_degree(&amb, dmax)?;
    let q_power = qpow(&curve.qq(), amb.dim_bun);

    let mut per_degree = Vec::with_capacity(buckets.len());
    let mut basis_counts = Vec::with_capacity(buckets.len());
    for (i, bucket) in buckets.iter().enumerate() {
        basis_counts.push(bucket.len());
        let mut t = Q::zero();
        for m in bucket {
            t += match normalization {
                Normalization::Ordinary => ordinary_term(&amb, &leg_images, legs, m),
                Normalization::CompactSupport => {
                    compact_term(&amb, &leg_images, legs, m, &q_power)
                }
            };
        }
        if let Normalization::Ordinary = normalization {
            t *= &q_power;
        }
        per_degree.push(if i % 2 == 1 { -t } else { t });
    }

    let mut partial_sums = Vec::with_capacity(per_degree.len());
    let mut acc = Q::zero();
    for a in &per_degree {
        acc += a.clone();
        partial_sums.push(acc.clone());
    }
    let total = partial_sums.last().cloned().unwrap_or_else(Q::zero);

    let burn_in = dmax / 2;
    let mut decay_ratio: Option<f64> = None;
    for i in (burn_in + 2)..=dmax {
        let cur = q_to_f64(&qabs(&per_degree[i as usize]));
        let prev = q_to_f64(&qabs(&per_degree[(i - 2) as usize]));
        let ratio = if prev == 0.0 {
            if cur == 0.0 {
                continue;
            }
            f64::INFINITY
        } else {
            cur / prev
        };
        decay_ratio = Some(decay_ratio.map_or(ratio, |r| r.max(ratio)));
    }
    let window_nonempty = dmax >= burn_in + 2;
    let tail_bound = match decay_ratio {
        // Every sampled term past the burn-in vanished.
        None if window_nonempty => Some(0.0),
        None => None,
        Some(rho) if rho < 1.0 => {
            let mut last = q_to_f64(&qabs(&per_degree[dmax as usize]));
            if dmax >= 1 {
                last += q_to_f64(&qabs(&per_degree[(dmax - 1) as usize]));
            }
            Some(last * rho / (1.0 - rho))
        }
        Some(_) => None,
    };

    Ok(TraceRun {
        normalization,
        dim_bun: amb.dim_bun,
        q_power,
        dmax,
        basis_counts,
        per_degree,
        partial_sums,
        total,
        burn_in,
        decay_ratio,
        tail_bound,
    })
}

/// Second oracle for the fully split, genus-zero case: when every leg block
/// is diagonal and the curve has no odd cohomology, the trace of the degree-
/// `i` piece factors over exponent vectors as
/// `∏_j (c_j + Σ_g e_g·ε_{j,g}) · ∏_g λ_g^{e_g}`, with no operator algebra
/// involved.  Returns the same truncated sum as [`truncated_trace`].
pub fn factored_trace(
    curve: &CurveData,
    motive: &GrossMotive,
    legs: &[TraceLeg],
    dmax: i64,
) -> Result<Q> {
    if dmax < 0 {
        return Err(Error::InvalidInput("truncation degree must be nonnegative".into()));
    }
    if dmax > MAX_DMAX {
        return Err(Error::InvalidInput(format!(
            "truncation degree {dmax} exceeds the supported maximum {MAX_DMAX}"
        )));
    }
    if curve.g != 0 {
        return Err(Error::InvalidInput(
            "the factored trace requires a genus-zero curve".into(),
        ));
    }
    let amb = build_ambient(curve, motive)?;
    let mut eigen: Vec<Vec<Q>> = Vec::with_capacity(legs.len());
    for leg in legs {
        let images = leg_generator_images(&amb, leg)?;
        let mut eps = vec![Q::zero(); amb.gens.len()];
        for (g, img) in images.iter().enumerate() {
            for (t, w) in img {
                if *t != g {
                    return Err(Error::InvalidInput(
                        "the factored trace requires diagonal leg blocks".into(),
                    ));
                }
                eps[g] = w.clone();
            }
        }
        eigen.push(eps);
    }
    let buckets = monomials_by_degree(&amb, dmax)?;
    let mut total = Q::zero();
    for bucket in &buckets {
        // genus zero: every generator is even, so every degree contributes
        // with positive sign.
        for m in bucket {
            let mut term = Q::one();
            for (leg, eps) in legs.iter().zip(&eigen) {
                let mut weight = leg.c.clone();
                for (g, &e) in m.iter().enumerate() {
                    if e > 0 {
                        weight += eps[g].clone() * qi(e as i64);
                    }
                }
                term *= weight;
            }
            // ∏_g λ_g^{e_g}
            for (g, &e) in m.iter().enumerate() {
                if e > 0 {
                    term *= qpow(&amb.even_scale[g], e as i64);
                }
            }
            total += term;
        }
    }
    Ok(qpow(&curve.qq(), amb.dim_bun) * total)
}
