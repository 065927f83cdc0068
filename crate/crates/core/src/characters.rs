//! Class-function algebra on a finite Galois group Σ: convolution under the
//! normalized Haar measure (vol(Σ) = 1), duality, the natural projection
//! onto class functions, and the signed delta sums Φ_j built from leg data.
//!
//! Supported groups are those with rational character tables — elementary
//! abelian 2-groups and the small symmetric groups — so every identity here
//! stays in ℚ. For such tables every element is conjugate to its inverse and
//! every irreducible is self-dual, which the constructors validate.

use crate::error::{Error, Result};
use crate::num::{q_from_json, qi, Q};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// A finite group with its multiplication table, conjugacy classes, and
/// exact character table (rows = irreducibles, columns = classes; row 0 is
/// the trivial character).
#[derive(Debug, Clone)]
pub struct FiniteGroupData {
    pub label: String,
    pub elements: Vec<String>,
    /// `mult[a][b]` = index of a·b; element 0 is the identity.
    pub mult: Vec<Vec<usize>>,
    pub inverses: Vec<usize>,
    /// Partition of element indices into conjugacy classes.
    pub classes: Vec<Vec<usize>>,
    /// `class_of[g]` = index of the class containing g.
    pub class_of: Vec<usize>,
    /// `char_table[ρ][c]` = χ_ρ on class c.
    pub char_table: Vec<Vec<Q>>,
    pub irrep_names: Vec<String>,
}

/// Leg polarity: ♯ (dominant coweight) or ♭ (its negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Sharp,
    Flat,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Sharp => 1,
            Sign::Flat => -1,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sharp" | "#" | "♯" | "+" | "plus" => Ok(Sign::Sharp),
            "flat" | "b" | "♭" | "-" | "minus" => Ok(Sign::Flat),
            other => Err(Error::Parse(format!("unknown sign {other:?}"))),
        }
    }
}

/// ν(i,i′): 0 when the two legs share a polarity, 1 otherwise.
pub fn nu(a: Sign, b: Sign) -> u32 {
    if a == b {
        0
    } else {
        1
    }
}

/// An element of the group algebra ℚ[Σ], one coefficient per element.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAlgebraElement {
    pub coeffs: Vec<Q>,
}

impl GroupAlgebraElement {
    pub fn zero(g: &FiniteGroupData) -> Self {
        GroupAlgebraElement {
            coeffs: vec![Q::zero(); g.order()],
        }
    }

    pub fn value(&self, elem: usize) -> Q {
        self.coeffs[elem].clone()
    }
}

/// δ_g.
pub fn delta(g: &FiniteGroupData, elem: usize) -> GroupAlgebraElement {
    let mut out = GroupAlgebraElement::zero(g);
    out.coeffs[elem] = Q::one();
    out
}

impl FiniteGroupData {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn product(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn element_by_name(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn num_irreps(&self) -> usize {
        self.char_table.len()
    }

    /// χ_ρ(g).
    pub fn chi(&self, rho: usize, elem: usize) -> Q {
        self.char_table[rho][self.class_of[elem]].clone()
    }

    /// dim ρ = χ_ρ(e).
    pub fn dim(&self, rho: usize) -> i64 {
        let d = &self.char_table[rho][self.class_of[0]];
        debug_assert!(d.denom().is_one());
        d.numer().try_into().expect("irreducible dimension fits in i64")
    }

    /// χ_ρ as a group-algebra element.
    pub fn character(&self, rho: usize) -> GroupAlgebraElement {
        GroupAlgebraElement {
            coeffs: (0..self.order()).map(|g| self.chi(rho, g)).collect(),
        }
    }

    fn check_dimension(&self, phi: &GroupAlgebraElement) -> Result<()> {
        if phi.coeffs.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "group-algebra element has {} coefficients, group has order {}",
                phi.coeffs.len(),
                self.order()
            )));
        }
        Ok(())
    }

    /// Full structural validation: group axioms, class structure, and both
    /// orthogonality relations of the character table under the bilinear
    /// pairing with vol(Σ) = 1.
    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        let fail = |msg: String| Err(Error::InconsistentData(msg));
        if n == 0 || self.mult.len() != n || self.mult.iter().any(|r| r.len() != n) {
            return fail("multiplication table is not square".into());
        }
        if self.mult.iter().flatten().any(|&x| x >= n) {
            return fail("multiplication table entry out of range".into());
        }
        for a in 0..n {
            if self.mult[0][a] != a || self.mult[a][0] != a {
                return fail("element 0 is not the identity".into());
            }
            if self.mult[a][self.inverses[a]] != 0 || self.mult[self.inverses[a]][a] != 0 {
                return fail("inverse table is wrong".into());
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.mult[self.mult[a][b]][c] != self.mult[a][self.mult[b][c]] {
                        return fail("multiplication is not associative".into());
                    }
                }
            }
        }
        // classes partition the elements and are closed under conjugation
        // and inversion (the latter is what keeps every irrep self-dual)
        let mut seen = vec![false; n];
        for (ci, class) in self.classes.iter().enumerate() {
            for &g in class {
                if seen[g] || self.class_of[g] != ci {
                    return fail("classes do not partition the group".into());
                }
                seen[g] = true;
                if self.class_of[self.inverses[g]] != ci {
                    return fail(format!(
                        "class of {} is not inverse-closed (irrationality ahead)",
                        self.elements[g]
                    ));
                }
                for h in 0..n {
                    let conj = self.mult[self.mult[h][g]][self.inverses[h]];
                    if self.class_of[conj] != ci {
                        return fail("classes are not conjugation-closed".into());
                    }
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return fail("classes do not cover the group".into());
        }
        let k = self.classes.len();
        if self.char_table.len() != k
            || self.char_table.iter().any(|r| r.len() != k)
            || self.irrep_names.len() != k
        {
            return fail("character table must be square over the classes".into());
        }
        if self.char_table[0].iter().any(|x| !x.is_one()) {
            return fail("row 0 of the character table must be the trivial character".into());
        }
        // row orthogonality: (1/|Σ|) Σ_c |c|·χ_ρ(c)·χ_σ(c) = δ_{ρσ}
        for r in 0..k {
            for s in 0..k {
                let mut acc = Q::zero();
                for (c, class) in self.classes.iter().enumerate() {
                    acc += qi(class.len() as i64) * &self.char_table[r][c] * &self.char_table[s][c];
                }
                let expected = if r == s { qi(n as i64) } else { Q::zero() };
                if acc != expected {
                    return fail(format!("row orthogonality fails for irreps {r}, {s}"));
                }
            }
        }
        // column orthogonality: Σ_ρ χ_ρ(c)·χ_ρ(c′) = δ_{cc′}·|Σ|/|c|
        for c in 0..k {
            for cp in 0..k {
                let mut acc = Q::zero();
                for r in 0..k {
                    acc += &self.char_table[r][c] * &self.char_table[r][cp];
                }
                let expected = if c == cp {
                    qi(n as i64) / qi(self.classes[c].len() as i64)
                } else {
                    Q::zero()
                };
                if acc != expected {
                    return fail(format!("column orthogonality fails for classes {c}, {cp}"));
                }
            }
        }
        Ok(())
    }
}

/// (φ∗ψ)(g) = (1/|Σ|) Σ_h φ(gh^{−1})·ψ(h) — convolution as the average over
/// Σ, so the unit is |Σ|·δ_e.
pub fn convolve(
    g: &FiniteGroupData,
    phi: &GroupAlgebraElement,
    psi: &GroupAlgebraElement,
) -> Result<GroupAlgebraElement> {
    g.check_dimension(phi)?;
    g.check_dimension(psi)?;
    let n = g.order();
    let norm = qi(n as i64).recip();
    let mut out = GroupAlgebraElement::zero(g);
    for x in 0..n {
        let mut acc = Q::zero();
        for h in 0..n {
            let gh_inv = g.product(x, g.inverse(h));
            if !phi.coeffs[gh_inv].is_zero() && !psi.coeffs[h].is_zero() {
                acc += &phi.coeffs[gh_inv] * &psi.coeffs[h];
            }
        }
        out.coeffs[x] = acc * &norm;
    }
    Ok(out)
}

/// φ∨(g) = φ(g^{−1}); an involution.
pub fn dual(g: &FiniteGroupData, phi: &GroupAlgebraElement) -> GroupAlgebraElement {
    GroupAlgebraElement {
        coeffs: (0..g.order())
            .map(|x| phi.coeffs[g.inverse(x)].clone())
            .collect(),
    }
}

/// Bilinear pairing ⟨φ,ψ⟩ = (1/|Σ|) Σ_g φ(g)·ψ(g).
pub fn inner(g: &FiniteGroupData, phi: &GroupAlgebraElement, psi: &GroupAlgebraElement) -> Q {
    let mut acc = Q::zero();
    for (a, b) in phi.coeffs.iter().zip(&psi.coeffs) {
        acc += a * b;
    }
    acc / qi(g.order() as i64)
}

/// φ^♮ = Σ_ρ ⟨φ, χ_{ρ∨}⟩·χ_ρ — projection onto class functions. For the
/// supported rational tables χ_{ρ∨} = χ_ρ.
pub fn natural_projection(g: &FiniteGroupData, phi: &GroupAlgebraElement) -> GroupAlgebraElement {
    let mut out = GroupAlgebraElement::zero(g);
    for rho in 0..g.num_irreps() {
        let chi = g.character(rho);
        let coef = inner(g, phi, &chi);
        if coef.is_zero() {
            continue;
        }
        for (o, c) in out.coeffs.iter_mut().zip(&chi.coeffs) {
            *o += &coef * c;
        }
    }
    out
}

/// Φ_j = Σ_i sign(μ_i)^j·δ_{σ_i}; for even j this is Φ = Σ_i δ_{σ_i}.
pub fn phi_tuple(
    g: &FiniteGroupData,
    sigma: &[usize],
    signs: &[Sign],
    j: i64,
) -> Result<GroupAlgebraElement> {
    if sigma.len() != signs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} group elements but {} signs",
            sigma.len(),
            signs.len()
        )));
    }
    let mut out = GroupAlgebraElement::zero(g);
    for (&s, sign) in sigma.iter().zip(signs) {
        let w = if j % 2 == 0 { 1 } else { sign.value() };
        out.coeffs[s] += qi(w);
    }
    Ok(out)
}

// --- construction of the supported groups ---

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    fn rec(k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == current.len() {
            out.push(current.clone());
            return;
        }
        for i in k..current.len() {
            current.swap(k, i);
            rec(k + 1, current, out);
            current.swap(k, i);
        }
    }
    rec(0, &mut current, &mut out);
    out.sort();
    out
}

fn cycle_type(p: &[usize]) -> Vec<usize> {
    let n = p.len();
    let mut seen = vec![false; n];
    let mut lens = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        lens.push(len);
    }
    lens.sort();
    lens.reverse();
    lens
}

fn cycle_name(p: &[usize]) -> String {
    let n = p.len();
    let mut seen = vec![false; n];
    let mut name = String::new();
    for start in 0..n {
        if seen[start] || p[start] == start {
            seen[start] = true;
            continue;
        }
        name.push('(');
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            name.push_str(&(x + 1).to_string());
            x = p[x];
        }
        name.push(')');
    }
    if name.is_empty() {
        "e".into()
    } else {
        name
    }
}

/// S_n as FiniteGroupData with classes ordered by cycle type
/// (e, transpositions, …) and the given character rows per class.
fn symmetric_group(label: &str, n: usize, irrep_names: &[&str], rows: &[Vec<i64>]) -> FiniteGroupData {
    let perms = permutations(n);
    let index: BTreeMap<Vec<usize>, usize> =
        perms.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let order = perms.len();
    let identity: Vec<usize> = (0..n).collect();
    let id_pos = index[&identity];
    // relabel so the identity is element 0
    let mut relabel: Vec<usize> = (0..order).collect();
    relabel.swap(0, id_pos);
    let perms: Vec<Vec<usize>> = relabel.iter().map(|&i| perms[i].clone()).collect();
    let index: BTreeMap<Vec<usize>, usize> =
        perms.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let mult: Vec<Vec<usize>> = perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| {
                    // (a·b)(x) = a(b(x))
                    let prod: Vec<usize> = (0..n).map(|x| a[b[x]]).collect();
                    index[&prod]
                })
                .collect()
        })
        .collect();
    let inverses: Vec<usize> = perms
        .iter()
        .map(|p| {
            let mut inv = vec![0; n];
            for (i, &pi) in p.iter().enumerate() {
                inv[pi] = i;
            }
            index[&inv]
        })
        .collect();
    let mut types: Vec<Vec<usize>> = perms.iter().map(|p| cycle_type(p)).collect();
    let mut distinct: Vec<Vec<usize>> = types.clone();
    distinct.sort();
    distinct.dedup();
    // identity class first, then ascending cycle type: (2,1,..), (2,2,..), …
    let class_of: Vec<usize> = types
        .drain(..)
        .map(|t| distinct.iter().position(|d| *d == t).unwrap())
        .collect();
    let mut classes = vec![Vec::new(); distinct.len()];
    for (g, &c) in class_of.iter().enumerate() {
        classes[c].push(g);
    }
    let data = FiniteGroupData {
        label: label.into(),
        elements: perms.iter().map(|p| cycle_name(p)).collect(),
        mult,
        inverses,
        classes,
        class_of,
        char_table: rows
            .iter()
            .map(|row| row.iter().map(|&x| qi(x)).collect())
            .collect(),
        irrep_names: irrep_names.iter().map(|s| s.to_string()).collect(),
    };
    data.validate().expect("built-in group data is valid");
    data
}

fn elementary_abelian(label: &str, bits: usize) -> FiniteGroupData {
    let order = 1usize << bits;
    let names: Vec<String> = (0..order)
        .map(|m| match m {
            0 => "e".to_string(),
            _ => {
                let mut s = String::new();
                for (b, c) in [(1, 'a'), (2, 'b')] {
                    if m & b != 0 {
                        s.push(c);
                    }
                }
                s
            }
        })
        .collect();
    let mult: Vec<Vec<usize>> = (0..order).map(|a| (0..order).map(|b| a ^ b).collect()).collect();
    // characters χ_m(g) = (−1)^{popcount(m & g)}
    let char_table: Vec<Vec<Q>> = (0..order)
        .map(|m| {
            (0..order)
                .map(|g| {
                    if (m & g).count_ones() % 2 == 0 {
                        Q::one()
                    } else {
                        -Q::one()
                    }
                })
                .collect()
        })
        .collect();
    let irrep_names: Vec<String> = (0..order)
        .map(|m| match (bits, m) {
            (_, 0) => "triv".to_string(),
            (1, 1) => "sgn".to_string(),
            (2, 1) => "chi10".to_string(),
            (2, 2) => "chi01".to_string(),
            (2, 3) => "chi11".to_string(),
            _ => format!("chi{m}"),
        })
        .collect();
    let data = FiniteGroupData {
        label: label.into(),
        elements: names,
        mult,
        inverses: (0..order).collect(),
        classes: (0..order).map(|g| vec![g]).collect(),
        class_of: (0..order).collect(),
        char_table,
        irrep_names,
    };
    data.validate().expect("built-in group data is valid");
    data
}

/// Normalize a user-facing group label ("Z2", "Z2xZ2", "S4", …).
pub fn normalize_group_label(s: &str) -> Result<String> {
    let lower = s.trim().to_ascii_lowercase().replace(['/', '×'], "x");
    let canon = match lower.as_str() {
        "triv" | "trivial" | "1" => "triv",
        "z2" | "z_2" | "c2" => "z2",
        "z2xz2" | "z_2xz_2" | "klein" | "v4" => "z2xz2",
        "s3" | "s_3" => "s3",
        "s4" | "s_4" => "s4",
        _ => {
            return Err(Error::UnsupportedGroup(format!(
                "unsupported Galois group label {s:?}"
            )))
        }
    };
    Ok(canon.to_string())
}

/// Build one of the supported groups by label.
pub fn group_by_name(label: &str) -> Result<FiniteGroupData> {
    let canon = normalize_group_label(label)?;
    Ok(match canon.as_str() {
        "triv" => FiniteGroupData {
            label: canon,
            elements: vec!["e".into()],
            mult: vec![vec![0]],
            inverses: vec![0],
            classes: vec![vec![0]],
            class_of: vec![0],
            char_table: vec![vec![Q::one()]],
            irrep_names: vec!["triv".into()],
        },
        "z2" => elementary_abelian("z2", 1),
        "z2xz2" => elementary_abelian("z2xz2", 2),
        "s3" => symmetric_group(
            "s3",
            3,
            &["triv", "sgn", "std"],
            &[vec![1, 1, 1], vec![1, -1, 1], vec![2, 0, -1]],
        ),
        "s4" => symmetric_group(
            "s4",
            4,
            &["triv", "sgn", "std", "stdsgn", "plane"],
            &[
                vec![1, 1, 1, 1, 1],
                vec![1, -1, 1, 1, -1],
                vec![3, 1, -1, 0, -1],
                vec![3, -1, -1, 0, 1],
                vec![2, 0, 2, -1, 0],
            ],
        ),
        _ => unreachable!("normalize_group_label only returns supported labels"),
    })
}

/// Build a custom group from JSON:
/// `{"label":…, "elements":[…], "mult":[[…]], "classes":[[…]],
///   "char_table":[[…]], "irrep_names":[…]}` — fully validated.
pub fn group_from_json(v: &serde_json::Value) -> Result<FiniteGroupData> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidInput("group must be a JSON object".into()))?;
    let get = |key: &str| {
        obj.get(key)
            .ok_or_else(|| Error::InvalidInput(format!("group is missing \"{key}\"")))
    };
    let elements: Vec<String> = get("elements")?
        .as_array()
        .ok_or_else(|| Error::InvalidInput("\"elements\" must be an array".into()))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(String::from)
                .ok_or_else(|| Error::InvalidInput("element names must be strings".into()))
        })
        .collect::<Result<_>>()?;
    let parse_index_rows = |key: &str| -> Result<Vec<Vec<usize>>> {
        get(key)?
            .as_array()
            .ok_or_else(|| Error::InvalidInput(format!("\"{key}\" must be an array")))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::InvalidInput(format!("\"{key}\" rows must be arrays")))?
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .map(|u| u as usize)
                            .ok_or_else(|| Error::InvalidInput(format!("\"{key}\" entries must be indices")))
                    })
                    .collect()
            })
            .collect()
    };
    let mult = parse_index_rows("mult")?;
    let classes = parse_index_rows("classes")?;
    let char_table: Vec<Vec<Q>> = get("char_table")?
        .as_array()
        .ok_or_else(|| Error::InvalidInput("\"char_table\" must be an array".into()))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::InvalidInput("\"char_table\" rows must be arrays".into()))?
                .iter()
                .map(q_from_json)
                .collect()
        })
        .collect::<Result<_>>()?;
    let irrep_names: Vec<String> = get("irrep_names")?
        .as_array()
        .ok_or_else(|| Error::InvalidInput("\"irrep_names\" must be an array".into()))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(String::from)
                .ok_or_else(|| Error::InvalidInput("irrep names must be strings".into()))
        })
        .collect::<Result<_>>()?;
    let n = elements.len();
    if mult.len() != n || mult.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
        return Err(Error::InvalidInput("multiplication table shape is wrong".into()));
    }
    let mut inverses = vec![usize::MAX; n];
    for a in 0..n {
        for b in 0..n {
            if mult[a][b] == 0 && mult[b][a] == 0 {
                inverses[a] = b;
            }
        }
    }
    if inverses.contains(&usize::MAX) {
        return Err(Error::InconsistentData("some element has no inverse".into()));
    }
    let mut class_of = vec![usize::MAX; n];
    for (ci, class) in classes.iter().enumerate() {
        for &g in class {
            if g >= n {
                return Err(Error::InvalidInput("class entry out of range".into()));
            }
            class_of[g] = ci;
        }
    }
    if class_of.contains(&usize::MAX) {
        return Err(Error::InconsistentData("classes do not cover the group".into()));
    }
    let label = obj
        .get("label")
        .and_then(|x| x.as_str())
        .unwrap_or("custom")
        .to_string();
    let data = FiniteGroupData {
        label,
        elements,
        mult,
        inverses,
        classes,
        class_of,
        char_table,
        irrep_names,
    };
    data.validate()?;
    Ok(data)
}
