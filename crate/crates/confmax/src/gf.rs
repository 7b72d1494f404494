//! Exact arithmetic in the tower F_p ⊂ F_q ⊂ F_{q²}.
//!
//! Elements are polynomial residues over the prime field; no discrete-log
//! tables are built. Power-residue classes are decided by comparing
//! x^((order-1)/k) against the k precomputed powers of the generator, so the
//! per-element cost stays logarithmic even when q² is large.

use thiserror::Error;

/// Default cap on the subfield order q. Keeps every exponent that appears in
/// tower arithmetic (up to q² − 1) comfortably inside u64.
pub const DEFAULT_MAX_Q: u64 = 1 << 16;

/// Hard cap: above this, p^d no longer fits the exponent arithmetic.
const HARD_MAX_Q: u64 = 1 << 31;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field order {q} exceeds the enumeration budget {budget}")]
    DegreeTooLarge { q: u128, budget: u64 },
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("k = {k} does not divide the group order {order}")]
    KNotDividing { k: u8, order: u64 },
    #[error("element does not lie in the ambient group")]
    WrongField,
    #[error("modulus is not irreducible over F_{p}")]
    NotIrreducible { p: u64 },
    #[error("modulus must be monic of degree {expected}")]
    BadModulus { expected: usize },
}

/// An element of F_{p^d}: coefficient vector of a polynomial residue,
/// constant term first, every coefficient reduced into [0, p).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub coeffs: Vec<u64>,
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// F_{p^d} presented as `F_p[X]` modulo a monic irreducible polynomial.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    p: u64,
    d: usize,
    /// Monic modulus of degree d, constant term first (length d + 1).
    modulus: Vec<u64>,
}

impl FieldSpec {
    /// Verifies primality of p and irreducibility of the modulus at
    /// construction (root check for d ≤ 3, gcd with X^{p^i} − X otherwise).
    pub fn new(p: u64, d: usize, modulus: Vec<u64>) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if d == 0 || modulus.len() != d + 1 || modulus[d] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(GfError::BadModulus { expected: d });
        }
        let spec = FieldSpec { p, d, modulus };
        if !spec.modulus_irreducible() {
            return Err(GfError::NotIrreducible { p });
        }
        Ok(spec)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// p^d as u64 (guarded by the construction budget).
    pub fn order(&self) -> u64 {
        self.p.pow(self.d as u32)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![0; self.d] }
    }

    pub fn one(&self) -> FieldElement {
        self.from_u64(1)
    }

    /// Embeds a prime-field residue as a constant.
    pub fn from_u64(&self, c: u64) -> FieldElement {
        let mut coeffs = vec![0; self.d];
        coeffs[0] = c % self.p;
        FieldElement { coeffs }
    }

    /// The fixed enumeration order: element #i has coefficients equal to the
    /// base-p digits of i, constant term least significant.
    pub fn element_at(&self, index: u64) -> FieldElement {
        let mut coeffs = vec![0; self.d];
        let mut rest = index;
        for c in coeffs.iter_mut() {
            *c = rest % self.p;
            rest /= self.p;
        }
        debug_assert_eq!(rest, 0, "index out of range");
        FieldElement { coeffs }
    }

    pub fn index_of(&self, x: &FieldElement) -> u64 {
        let mut idx = 0u64;
        for &c in x.coeffs.iter().rev() {
            idx = idx * self.p + c;
        }
        idx
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + y) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let d = self.d;
        let mut buf = vec![0u64; 2 * d - 1];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.coeffs.iter().enumerate() {
                buf[i + j] = (buf[i + j] + ai * bj) % self.p;
            }
        }
        // Fold X^{d+k} down using X^d ≡ −(m_0 + … + m_{d−1} X^{d−1}).
        for i in (d..2 * d - 1).rev() {
            let c = buf[i];
            if c == 0 {
                continue;
            }
            buf[i] = 0;
            for j in 0..d {
                let t = c * ((self.p - self.modulus[j]) % self.p) % self.p;
                buf[i - d + j] = (buf[i - d + j] + t) % self.p;
            }
        }
        buf.truncate(d);
        FieldElement { coeffs: buf }
    }

    /// x^e for e ≥ 0 by square-and-multiply; x^0 = 1 including x = 0.
    pub fn pow_u(&self, x: &FieldElement, e: u64) -> FieldElement {
        let mut acc = self.one();
        let mut base = x.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement, GfError> {
        if x.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        Ok(self.pow_u(x, self.order() - 2))
    }

    /// x^e with negative exponents inverting first.
    pub fn pow(&self, x: &FieldElement, e: i64) -> Result<FieldElement, GfError> {
        if e >= 0 {
            Ok(self.pow_u(x, e as u64))
        } else {
            let xi = self.inv(x)?;
            Ok(self.pow_u(&xi, e.unsigned_abs()))
        }
    }

    fn modulus_irreducible(&self) -> bool {
        poly_is_irreducible(self.p, &self.modulus)
    }
}

/// The view of F_q sitting inside F_{q²} as the fixed field of x ↦ x^q.
#[derive(Debug, Clone)]
pub struct SubfieldView {
    pub q: u64,
    /// ω^{q+1}: a generator of the subfield's multiplicative group.
    pub generator: FieldElement,
    /// All q fixed points of x ↦ x^q, sorted by enumeration index.
    pub elements: Vec<FieldElement>,
    indices: Vec<u64>,
}

impl SubfieldView {
    /// Position of a subfield element in the fixed enumeration, if present.
    pub fn position(&self, spec: &FieldSpec, x: &FieldElement) -> Option<usize> {
        let idx = spec.index_of(x);
        self.indices.binary_search(&idx).ok()
    }

    pub fn index_at(&self, pos: usize) -> u64 {
        self.indices[pos]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// The full field F_{q²}.
    Big,
    /// The subfield F_q.
    Sub,
}

/// Result of a power-residue classification: the cyclotomic class index
/// C_i^{(k,·)} of a nonzero element, or Zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Zero,
    Nth(u8),
}

#[derive(Debug, Clone)]
struct ClassTable {
    exp: u64,
    powers: Vec<FieldElement>,
}

/// The tower F_p ⊂ F_q ⊂ F_{q²} with its fixed primitive element and
/// power-residue tables.
#[derive(Debug, Clone)]
pub struct Tower {
    spec: FieldSpec,
    p: u64,
    r: u32,
    q: u64,
    omega: FieldElement,
    sub: SubfieldView,
    big2: Option<ClassTable>,
    big4: Option<ClassTable>,
    sub2: Option<ClassTable>,
    sub4: Option<ClassTable>,
}

impl Tower {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The stored primitive element of F_{q²}.
    pub fn omega(&self) -> &FieldElement {
        &self.omega
    }

    pub fn subfield(&self) -> &SubfieldView {
        &self.sub
    }

    /// Relative trace F_{q²} → F_q: x + x^q.
    pub fn trace_down(&self, x: &FieldElement) -> FieldElement {
        let xq = self.spec.pow_u(x, self.q);
        self.spec.add(x, &xq)
    }

    /// Absolute trace of the ambient field down to F_p, as a prime residue.
    pub fn abs_trace(&self, ambient: Ambient, x: &FieldElement) -> u64 {
        let steps = match ambient {
            Ambient::Big => 2 * self.r,
            Ambient::Sub => self.r,
        };
        let mut acc = x.clone();
        let mut t = x.clone();
        for _ in 1..steps {
            t = self.spec.pow_u(&t, self.p);
            acc = self.spec.add(&acc, &t);
        }
        debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0));
        acc.coeffs[0]
    }

    pub fn in_subfield(&self, x: &FieldElement) -> bool {
        self.spec.pow_u(x, self.q) == *x
    }

    fn table(&self, ambient: Ambient, k: u8) -> Option<&ClassTable> {
        match (ambient, k) {
            (Ambient::Big, 2) => self.big2.as_ref(),
            (Ambient::Big, 4) => self.big4.as_ref(),
            (Ambient::Sub, 2) => self.sub2.as_ref(),
            (Ambient::Sub, 4) => self.sub4.as_ref(),
            _ => None,
        }
    }

    fn group_order(&self, ambient: Ambient) -> u64 {
        match ambient {
            Ambient::Big => self.q * self.q - 1,
            Ambient::Sub => self.q - 1,
        }
    }

    /// Index i of the cyclotomic class C_i^{(k,·)} containing x, relative to
    /// the tower's generator (ω for the big field, ω^{q+1} for the subfield).
    /// Decided by comparing x^{(order−1)/k} against the k-entry table.
    pub fn power_residue_class(
        &self,
        ambient: Ambient,
        k: u8,
        x: &FieldElement,
    ) -> Result<Class, GfError> {
        if k == 1 {
            // Index in the trivial partition, but still detect non-membership.
            if x.is_zero() {
                return Ok(Class::Zero);
            }
            return if ambient == Ambient::Sub && !self.in_subfield(x) {
                Err(GfError::WrongField)
            } else {
                Ok(Class::Nth(0))
            };
        }
        let table = self.table(ambient, k).ok_or(GfError::KNotDividing {
            k,
            order: self.group_order(ambient),
        })?;
        if x.is_zero() {
            return Ok(Class::Zero);
        }
        let y = self.spec.pow_u(x, table.exp);
        for (i, g) in table.powers.iter().enumerate() {
            if y == *g {
                return Ok(Class::Nth(i as u8));
            }
        }
        // x^{(order−1)/k} lands outside the k-th roots of unity of the
        // ambient group exactly when x is not in that group.
        Err(GfError::WrongField)
    }
}

/// Finds the primitive element with the smallest enumeration index, verified
/// by ω^{(order−1)/ℓ} ≠ 1 for every prime ℓ dividing order − 1.
pub fn find_primitive(spec: &FieldSpec) -> FieldElement {
    let n = spec.order() - 1;
    let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();
    let one = spec.one();
    for idx in 1..spec.order() {
        let x = spec.element_at(idx);
        if primes.iter().all(|&l| spec.pow_u(&x, n / l) != one) {
            return x;
        }
    }
    unreachable!("every finite field has a primitive element")
}

/// Builds F_{q²} as a degree-2r extension of F_p (q = p^r) together with the
/// fixed subfield of x ↦ x^q, under the default budget.
pub fn build_tower(p: u64, r: u32) -> Result<Tower, GfError> {
    build_tower_budget(p, r, DEFAULT_MAX_Q)
}

pub fn build_tower_budget(p: u64, r: u32, max_q: u64) -> Result<Tower, GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    let budget = max_q.min(HARD_MAX_Q);
    if r == 0 {
        return Err(GfError::DegreeTooLarge { q: 0, budget });
    }
    let q = (p as u128).checked_pow(r).filter(|&q| q <= budget as u128);
    let q = match q {
        Some(q) => q as u64,
        None => {
            return Err(GfError::DegreeTooLarge {
                q: (p as u128).saturating_pow(r),
                budget,
            })
        }
    };
    let d = 2 * r as usize;
    let modulus = first_irreducible(p, d);
    let spec = FieldSpec::new(p, d, modulus)?;

    let omega = find_primitive(&spec);
    let generator = spec.pow_u(&omega, q + 1);

    // Subfield elements: 0 together with the cyclic group generated by
    // ω^{q+1}, then sorted into the global enumeration order.
    let mut elements = Vec::with_capacity(q as usize);
    elements.push(spec.zero());
    let mut cur = spec.one();
    for _ in 0..q - 1 {
        elements.push(cur.clone());
        cur = spec.mul(&cur, &generator);
    }
    debug_assert_eq!(cur, spec.one());
    let mut pairs: Vec<(u64, FieldElement)> =
        elements.into_iter().map(|e| (spec.index_of(&e), e)).collect();
    pairs.sort_by_key(|(i, _)| *i);
    pairs.dedup_by_key(|(i, _)| *i);
    assert_eq!(pairs.len(), q as usize, "subfield generation produced duplicates");
    let indices: Vec<u64> = pairs.iter().map(|(i, _)| *i).collect();
    let elements: Vec<FieldElement> = pairs.into_iter().map(|(_, e)| e).collect();

    let big_order = q * q - 1;
    let sub_order = q - 1;
    let big2 = class_table(&spec, &omega, big_order, 2);
    let big4 = class_table(&spec, &omega, big_order, 4);
    let sub2 = class_table(&spec, &generator, sub_order, 2);
    let sub4 = class_table(&spec, &generator, sub_order, 4);

    Ok(Tower {
        spec,
        p,
        r,
        q,
        omega,
        sub: SubfieldView { q, generator, elements, indices },
        big2,
        big4,
        sub2,
        sub4,
    })
}

fn class_table(spec: &FieldSpec, gen: &FieldElement, order: u64, k: u8) -> Option<ClassTable> {
    if !order.is_multiple_of(k as u64) {
        return None;
    }
    let exp = order / k as u64;
    let step = spec.pow_u(gen, exp);
    let mut powers = Vec::with_capacity(k as usize);
    let mut cur = spec.one();
    for _ in 0..k {
        powers.push(cur.clone());
        cur = spec.mul(&cur, &step);
    }
    Some(ClassTable { exp, powers })
}

/// First monic irreducible of the given degree, scanning coefficient tuples
/// (constant term first) in lexicographic order.
fn first_irreducible(p: u64, d: usize) -> Vec<u64> {
    if d == 1 {
        return vec![0, 1]; // X itself
    }
    let mut low = vec![0u64; d];
    loop {
        let mut modulus = low.clone();
        modulus.push(1);
        if poly_is_irreducible(p, &modulus) {
            return modulus;
        }
        // Lexicographic successor: bump the last coordinate first.
        let mut i = d;
        loop {
            debug_assert!(i > 0, "no irreducible polynomial found");
            i -= 1;
            low[i] += 1;
            if low[i] < p {
                break;
            }
            low[i] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Raw polynomial helpers over F_p (used only for modulus validation).
// ---------------------------------------------------------------------------

fn poly_deg(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn poly_rem(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let dm = poly_deg(m).expect("nonzero modulus");
    // m is monic here.
    while let Some(da) = poly_deg(&a) {
        if da < dm {
            break;
        }
        let c = a[da];
        a[da] = 0;
        for j in 0..dm {
            let t = c * ((p - m[j]) % p) % p;
            a[da - dm + j] = (a[da - dm + j] + t) % p;
        }
    }
    a.truncate(dm.max(1));
    a.resize(dm.max(1), 0);
    a
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut buf = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            buf[i + j] = (buf[i + j] + ai * bj) % p;
        }
    }
    poly_rem(buf, m, p)
}

fn poly_pow_mod(a: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![0u64; 1];
    acc[0] = 1;
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &base, m, p);
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul_mod(&base, &base, m, p);
        }
    }
    acc
}

fn mod_inv_prime(a: u64, p: u64) -> u64 {
    // Fermat; p prime, a ≠ 0 mod p.
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    loop {
        let Some(db) = poly_deg(&b) else {
            return a;
        };
        // Make b monic so poly_rem applies.
        let inv = mod_inv_prime(b[db], p);
        let monic: Vec<u64> = b.iter().map(|&c| c * inv % p).collect();
        let r = poly_rem(a, &monic[..=db], p);
        a = b;
        b = r;
    }
}

fn poly_eval(a: &[u64], x: u64, p: u64) -> u64 {
    let mut acc = 0u64;
    for &c in a.iter().rev() {
        acc = (acc * x + c) % p;
    }
    acc
}

fn poly_is_irreducible(p: u64, modulus: &[u64]) -> bool {
    let d = modulus.len() - 1;
    match d {
        0 => false,
        1 => true,
        2 | 3 => (0..p).all(|x| poly_eval(modulus, x, p) != 0),
        _ => {
            // gcd(f, X^{p^i} − X) must be constant for every i < d; any proper
            // factor has degree ≤ d/2 and would be caught at that i.
            let x = vec![0u64, 1];
            let mut h = x.clone();
            for _ in 1..d {
                h = poly_pow_mod(&h, p, modulus, p);
                let mut diff = h.clone();
                if diff.len() < 2 {
                    diff.resize(2, 0);
                }
                diff[1] = (diff[1] + p - 1) % p;
                let g = poly_gcd(modulus, &diff, p);
                if poly_deg(&g).unwrap_or(0) > 0 {
                    return false;
                }
            }
            true
        }
    }
}

// ---------------------------------------------------------------------------
// Small integer helpers shared across the crate.
// ---------------------------------------------------------------------------

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut f = 3u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

/// Trial-division factorization, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            let mut e = 0;
            while n.is_multiple_of(f) {
                n /= f;
                e += 1;
            }
            out.push((f, e));
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn isqrt(n: u64) -> u64 {
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}
