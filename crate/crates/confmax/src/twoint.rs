//! Block designs, two-intersection sets, and the construction engine: the
//! quadratic-residue translate design, the admissible-pair search, the sets
//! D_{ℓ,h}, their duals, and the generic dual-parameter law for 2-designs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::chars::CharsError;
use crate::gf::{Ambient, Class, FieldElement, GfError, Tower};

#[derive(Debug, Error)]
pub enum TwoIntError {
    #[error("q = {0} is not congruent to 1 mod 4")]
    BadQ(u64),
    #[error("not a tactical configuration: {0}")]
    NotTactical(String),
    #[error("two-intersection certification failed: {0}")]
    ProfileViolation(String),
    #[error("admissible-pair search exhausted the full (h, ℓ) range")]
    SearchExhausted,
    #[error("design carries no 2-design certificate")]
    NotTwoDesign,
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Chars(#[from] CharsError),
}

/// m with q = 4m² + 1, when q has that form.
pub fn m_of_q(q: u64) -> Option<u64> {
    if q < 5 || !(q - 1).is_multiple_of(4) {
        return None;
    }
    let m = crate::gf::isqrt((q - 1) / 4);
    (4 * m * m + 1 == q).then_some(m)
}

/// A block design on points 0..v with a tactical certificate (k, r) and an
/// optional 2-design certificate λ.
#[derive(Debug, Clone)]
pub struct BlockDesign {
    pub v: usize,
    pub blocks: Vec<Vec<usize>>,
    pub k: usize,
    pub r: usize,
    pub lambda: Option<u64>,
}

impl BlockDesign {
    /// Certifies the tactical configuration (constant block size and
    /// replication, vr = bk) and records λ when every point pair is covered
    /// equally often.
    pub fn new(v: usize, blocks: Vec<Vec<usize>>) -> Result<Self, TwoIntError> {
        if blocks.is_empty() {
            return Err(TwoIntError::NotTactical("no blocks".into()));
        }
        let mut blocks = blocks;
        for b in blocks.iter_mut() {
            b.sort_unstable();
            if b.windows(2).any(|w| w[0] == w[1]) {
                return Err(TwoIntError::NotTactical("repeated point in a block".into()));
            }
            if b.iter().any(|&p| p >= v) {
                return Err(TwoIntError::NotTactical("point label out of range".into()));
            }
        }
        let k = blocks[0].len();
        if blocks.iter().any(|b| b.len() != k) {
            return Err(TwoIntError::NotTactical("block sizes differ".into()));
        }
        let mut degree = vec![0usize; v];
        for b in &blocks {
            for &p in b {
                degree[p] += 1;
            }
        }
        let r = degree[0];
        if degree.iter().any(|&d| d != r) {
            return Err(TwoIntError::NotTactical("replication numbers differ".into()));
        }
        if v * r != blocks.len() * k {
            return Err(TwoIntError::NotTactical("vr ≠ bk".into()));
        }

        // Pair-coverage scan for the optional 2-design certificate.
        let mut lambda = None;
        if v >= 2 {
            let mut pair = vec![0u64; v * v];
            for b in &blocks {
                for (i, &x) in b.iter().enumerate() {
                    for &y in &b[i + 1..] {
                        pair[x * v + y] += 1;
                    }
                }
            }
            let mut seen = None;
            let mut constant = true;
            'outer: for x in 0..v {
                for y in x + 1..v {
                    let c = pair[x * v + y];
                    match seen {
                        None => seen = Some(c),
                        Some(s) if s != c => {
                            constant = false;
                            break 'outer;
                        }
                        _ => {}
                    }
                }
            }
            if constant {
                lambda = seen;
            }
        }
        Ok(BlockDesign { v, blocks, k, r, lambda })
    }

    pub fn b(&self) -> usize {
        self.blocks.len()
    }
}

/// Exact histogram {|B ∩ D| → #blocks} of a point subset against a design.
pub fn intersection_profile(elements: &[usize], design: &BlockDesign) -> BTreeMap<usize, usize> {
    let mut mask = vec![false; design.v];
    for &p in elements {
        mask[p] = true;
    }
    let mut hist = BTreeMap::new();
    for b in &design.blocks {
        let c = b.iter().filter(|&&p| mask[p]).count();
        *hist.entry(c).or_insert(0) += 1;
    }
    hist
}

/// A point subset certified to meet every block of a design in either
/// `alpha` or `beta` points (both values attained).
#[derive(Debug, Clone)]
pub struct TwoIntersectionSet {
    pub elements: Vec<usize>,
    pub j: usize,
    pub alpha: usize,
    pub beta: usize,
}

impl TwoIntersectionSet {
    pub fn certify(
        mut elements: Vec<usize>,
        alpha: usize,
        beta: usize,
        design: &BlockDesign,
    ) -> Result<Self, TwoIntError> {
        elements.sort_unstable();
        elements.dedup();
        if elements.iter().any(|&p| p >= design.v) {
            return Err(TwoIntError::ProfileViolation("element out of range".into()));
        }
        if alpha == beta {
            return Err(TwoIntError::ProfileViolation("α and β must differ".into()));
        }
        let hist = intersection_profile(&elements, design);
        let keys: Vec<usize> = hist.keys().copied().collect();
        let mut expected = [alpha, beta];
        expected.sort_unstable();
        if keys != expected {
            return Err(TwoIntError::ProfileViolation(format!(
                "intersection sizes {keys:?} differ from {{{alpha}, {beta}}}"
            )));
        }
        Ok(TwoIntersectionSet { j: elements.len(), elements, alpha, beta })
    }
}

/// The quadratic-residue translate design: points F_q, blocks {x + a : x ∈ S}
/// for each a, with S the nonzero squares. Points and blocks are indexed by
/// the subfield enumeration position of the element / translation amount.
pub fn qr_design_blocks(t: &Tower) -> Result<BlockDesign, TwoIntError> {
    let q = t.q();
    if q % 4 != 1 {
        return Err(TwoIntError::BadQ(q));
    }
    let spec = t.spec();
    let sub = t.subfield();
    let mut squares = Vec::new();
    for x in &sub.elements {
        if t.power_residue_class(Ambient::Sub, 2, x)? == Class::Nth(0) {
            squares.push(x.clone());
        }
    }
    let mut blocks = Vec::with_capacity(q as usize);
    for a in &sub.elements {
        let block: Vec<usize> = squares
            .iter()
            .map(|x| {
                sub.position(spec, &spec.add(x, a))
                    .expect("subfield is closed under addition")
            })
            .collect();
        blocks.push(block);
    }
    BlockDesign::new(q as usize, blocks)
}

/// Indices (h, ℓ) satisfying both admissibility conditions, together with the
/// derived field data n = ω^{ℓ(q+1)} and t = ω^ℓ + ω^{ℓq}.
#[derive(Debug, Clone)]
pub struct AdmissiblePair {
    pub h: u8,
    pub ell: u64,
    pub epsilon: i8,
    pub delta: i8,
    pub norm_param: FieldElement,
    pub t: FieldElement,
}

struct PairScan<'a> {
    tower: &'a Tower,
    epsilon: i8,
    delta: i8,
    /// (−εδ + 1)/2 ∈ {0, 1}.
    base: u8,
    /// target class of n − t²/4: ε + 2h + 2 (mod 4), indexed by h.
    cond2: [u8; 4],
    four_inv: FieldElement,
}

impl<'a> PairScan<'a> {
    fn new(tower: &'a Tower, epsilon: i8, delta: i8) -> Result<Self, TwoIntError> {
        let base = ((1 - epsilon as i64 * delta as i64) / 2) as u8;
        let mut cond2 = [0u8; 4];
        for (h, c) in cond2.iter_mut().enumerate() {
            *c = (epsilon as i64 + 2 * h as i64 + 2).rem_euclid(4) as u8;
        }
        let spec = tower.spec();
        let four_inv = spec.inv(&spec.from_u64(4))?;
        Ok(PairScan { tower, epsilon, delta, base, cond2, four_inv })
    }

    /// Checks one ℓ, given ω^ℓ; returns the matching h if the pair is
    /// admissible.
    fn check(&self, ell: u64, omega_ell: &FieldElement) -> Result<Option<AdmissiblePair>, TwoIntError> {
        let t = self.tower;
        let spec = t.spec();
        let q = t.q();
        let norm_param = spec.pow_u(&t.subfield().generator, ell % (q - 1));
        let t_el = spec.add(omega_ell, &spec.pow_u(omega_ell, q));
        let Class::Nth(c1) = t.power_residue_class(Ambient::Sub, 4, &norm_param)? else {
            unreachable!("n is a power of the subfield generator");
        };
        let shifted = spec.sub(
            &norm_param,
            &spec.mul(&spec.mul(&t_el, &t_el), &self.four_inv),
        );
        let Class::Nth(c2) = t.power_residue_class(Ambient::Sub, 4, &shifted)? else {
            // n − t²/4 = −(ω^ℓ − ω^{ℓq})²/4 vanishes only when (q+1) | ℓ.
            unreachable!("n − t²/4 is nonzero for (q+1) ∤ ℓ");
        };
        for h in 0..4u8 {
            if c1 == (self.base + h) % 4 && c2 == self.cond2[h as usize] {
                return Ok(Some(AdmissiblePair {
                    h,
                    ell,
                    epsilon: self.epsilon,
                    delta: self.delta,
                    norm_param,
                    t: t_el,
                }));
            }
        }
        Ok(None)
    }
}

/// First (smallest ℓ, then smallest h) pair satisfying the admissibility
/// conditions for the given Jacobi signs.
pub fn find_admissible_pair(t: &Tower, epsilon: i8, delta: i8) -> Result<AdmissiblePair, TwoIntError> {
    let scan = PairScan::new(t, epsilon, delta)?;
    let q = t.q();
    let spec = t.spec();
    let mut omega_ell = spec.one();
    for ell in 1..=q * q - 2 {
        omega_ell = spec.mul(&omega_ell, t.omega());
        if ell % (q + 1) == 0 {
            continue;
        }
        if let Some(pair) = scan.check(ell, &omega_ell)? {
            return Ok(pair);
        }
    }
    Err(TwoIntError::SearchExhausted)
}

/// Audit mode: every admissible (h, ℓ) over the full range ℓ ∈ [1, q² − 2].
pub fn enumerate_admissible_pairs(
    t: &Tower,
    epsilon: i8,
    delta: i8,
) -> Result<Vec<(u8, u64)>, TwoIntError> {
    let scan = PairScan::new(t, epsilon, delta)?;
    let q = t.q();
    let spec = t.spec();
    let mut omega_ell = spec.one();
    let mut out = Vec::new();
    for ell in 1..=q * q - 2 {
        omega_ell = spec.mul(&omega_ell, t.omega());
        if ell % (q + 1) == 0 {
            continue;
        }
        if let Some(pair) = scan.check(ell, &omega_ell)? {
            out.push((pair.h, pair.ell));
        }
    }
    Ok(out)
}

/// Sizes of the existence-witness sets T₀, T₁: odd powers ω^ℓ classified by
/// the quadratic class of Tr_{q²/q}(ω^{ℓ+(q+1)/2}). Each must come out to
/// (q² − 1)/4.
#[allow(clippy::manual_div_ceil)] // q is odd, so (q + 1)/2 is exact
pub fn count_t_sets(t: &Tower) -> Result<(u64, u64), TwoIntError> {
    let spec = t.spec();
    let q = t.q();
    let shift = spec.pow_u(t.omega(), (q + 1) / 2);
    let omega_sq = spec.mul(t.omega(), t.omega());
    let mut cur = t.omega().clone();
    let mut counts = (0u64, 0u64);
    let mut ell = 1u64;
    while ell <= q * q - 2 {
        let z = spec.mul(&cur, &shift);
        let tr = spec.add(&z, &spec.pow_u(&z, q));
        match t.power_residue_class(Ambient::Sub, 2, &tr)? {
            Class::Nth(0) => counts.0 += 1,
            Class::Nth(_) => counts.1 += 1,
            Class::Zero => {}
        }
        cur = spec.mul(&cur, &omega_sq);
        ell += 2;
    }
    Ok(counts)
}

/// Raw membership of D_{ℓ,h}: positions of x ∈ F_q with 1 + xω^ℓ in
/// C_h ∪ C_{h+1} of the quartic classes of F_{q²}.
pub fn d_membership(t: &Tower, ell: u64, h: u8) -> Result<Vec<usize>, TwoIntError> {
    let spec = t.spec();
    let omega_ell = spec.pow_u(t.omega(), ell % (t.q() * t.q() - 1));
    let one = spec.one();
    let mut out = Vec::new();
    for (pos, x) in t.subfield().elements.iter().enumerate() {
        let w = spec.add(&one, &spec.mul(&omega_ell, x));
        let Class::Nth(c) = t.power_residue_class(Ambient::Big, 4, &w)? else {
            unreachable!("1 + xω^ℓ ≠ 0 for (q+1) ∤ ℓ");
        };
        if c == h % 4 || c == (h + 1) % 4 {
            out.push(pos);
        }
    }
    Ok(out)
}

/// Builds D_{ℓ,h} for an admissible pair and certifies it as a
/// (2m²−m+1; m²−m, m²) two-intersection set for the given design.
pub fn build_d(
    t: &Tower,
    pair: &AdmissiblePair,
    design: &BlockDesign,
) -> Result<TwoIntersectionSet, TwoIntError> {
    let q = t.q();
    let m = m_of_q(q).ok_or(TwoIntError::BadQ(q))? as usize;
    let elements = d_membership(t, pair.ell, pair.h)?;
    let expected = 2 * m * m - m + 1;
    if elements.len() != expected {
        return Err(TwoIntError::ProfileViolation(format!(
            "|D| = {} instead of {expected}",
            elements.len()
        )));
    }
    TwoIntersectionSet::certify(elements, m * m - m, m * m, design)
}

/// Partitions the blocks by intersection size: (D_α^⊥, D_β^⊥), with the
/// sizes checked against the counting identities.
pub fn dual_sets(
    d: &TwoIntersectionSet,
    design: &BlockDesign,
) -> Result<(Vec<usize>, Vec<usize>), TwoIntError> {
    let mut mask = vec![false; design.v];
    for &p in &d.elements {
        mask[p] = true;
    }
    let mut alpha_perp = Vec::new();
    let mut beta_perp = Vec::new();
    for (i, b) in design.blocks.iter().enumerate() {
        let c = b.iter().filter(|&&p| mask[p]).count();
        if c == d.alpha {
            alpha_perp.push(i);
        } else if c == d.beta {
            beta_perp.push(i);
        } else {
            return Err(TwoIntError::ProfileViolation(format!(
                "block {i} meets D in {c} points"
            )));
        }
    }
    // |D_α^⊥| = (rj − βb)/(α − β), and the two sizes partition the blocks.
    let num = design.r as i128 * d.j as i128 - d.beta as i128 * design.b() as i128;
    let den = d.alpha as i128 - d.beta as i128;
    if num % den != 0 || alpha_perp.len() as i128 != num / den {
        return Err(TwoIntError::ProfileViolation(format!(
            "|D_α^⊥| = {} violates the size identity",
            alpha_perp.len()
        )));
    }
    if alpha_perp.len() + beta_perp.len() != design.b() {
        return Err(TwoIntError::ProfileViolation(
            "duals do not partition the blocks".into(),
        ));
    }
    Ok((alpha_perp, beta_perp))
}

/// Predicted block profile N_s = |D ∩ (S + s)| from the closed-form case
/// split on χ₄′(u), u = 1 + ts + ns².
pub fn predict_profile(
    t: &Tower,
    pair: &AdmissiblePair,
    s: &FieldElement,
) -> Result<u64, TwoIntError> {
    let q = t.q();
    let m = m_of_q(q).ok_or(TwoIntError::BadQ(q))?;
    let spec = t.spec();
    let one = spec.one();
    let u = spec.add(
        &spec.add(&one, &spec.mul(&pair.t, s)),
        &spec.mul(&pair.norm_param, &spec.mul(s, s)),
    );
    let Class::Nth(c) = t.power_residue_class(Ambient::Sub, 4, &u)? else {
        unreachable!("u = (1 + ω^ℓ s)^{{q+1}} is nonzero");
    };
    let rel = (c + 4 - pair.h % 4) % 4;
    let eps_delta = pair.epsilon as i64 * pair.delta as i64;
    let inner = rel == 1 || rel == 2; // χ₄′(u) ∈ {ζ₄^{h+1}, ζ₄^{h+2}}
    let low = m * m - m;
    let high = m * m;
    Ok(match (eps_delta, inner) {
        (-1, true) | (1, false) => low,
        _ => high,
    })
}

/// Dual parameters (j⊥, α⊥, β⊥) of D_α^⊥ for a certified 2-design, verified
/// against the actual dual-design histogram and the pairwise-balanced
/// identity C(j,2)λ = C(α,2)|D_α^⊥| + C(β,2)|D_β^⊥|.
pub fn dual_parameters_2design(
    design: &BlockDesign,
    d: &TwoIntersectionSet,
) -> Result<(u64, u64, u64), TwoIntError> {
    let lambda = design.lambda.ok_or(TwoIntError::NotTwoDesign)? as i128;
    let (j, alpha, beta) = (d.j as i128, d.alpha as i128, d.beta as i128);
    let (r, b) = (design.r as i128, design.b() as i128);
    let den = alpha - beta;
    let exact = |num: i128| -> Result<u64, TwoIntError> {
        if num % den != 0 || num / den < 0 {
            return Err(TwoIntError::ProfileViolation(
                "dual parameter is not a nonnegative integer".into(),
            ));
        }
        Ok((num / den) as u64)
    };
    let j_perp = exact(r * j - beta * b)?;
    let alpha_perp = exact(lambda * j - beta * r)?;
    let beta_perp = exact(lambda * (j - 1) + r - beta * r)?;

    let (alpha_blocks, beta_blocks) = dual_sets(d, design)?;
    if alpha_blocks.len() as u64 != j_perp {
        return Err(TwoIntError::ProfileViolation(format!(
            "|D_α^⊥| = {} but j⊥ = {j_perp}",
            alpha_blocks.len()
        )));
    }

    // Histogram of D_α^⊥ against the dual design (blocks of the dual are the
    // pencils of original blocks through each point).
    let pencils: Vec<Vec<usize>> = (0..design.v)
        .map(|p| {
            design
                .blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| b.binary_search(&p).is_ok())
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut in_alpha = vec![false; design.b()];
    for &i in &alpha_blocks {
        in_alpha[i] = true;
    }
    let mut keys = std::collections::BTreeSet::new();
    for pencil in &pencils {
        keys.insert(pencil.iter().filter(|&&i| in_alpha[i]).count() as u64);
    }
    let expected: std::collections::BTreeSet<u64> = [alpha_perp, beta_perp].into();
    if keys != expected {
        return Err(TwoIntError::ProfileViolation(format!(
            "dual histogram keys {keys:?} differ from {{{alpha_perp}, {beta_perp}}}"
        )));
    }

    let choose2 = |x: i128| x * (x - 1) / 2;
    let lhs = choose2(j) * lambda;
    let rhs = choose2(alpha) * alpha_blocks.len() as i128
        + choose2(beta) * beta_blocks.len() as i128;
    if lhs != rhs {
        return Err(TwoIntError::ProfileViolation(format!(
            "pairwise-balanced identity fails: {lhs} ≠ {rhs}"
        )));
    }
    Ok((j_perp, alpha_perp, beta_perp))
}
