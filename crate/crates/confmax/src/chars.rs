//! Characters and character sums: multiplicative characters valued in `Z[ζ₄]`,
//! the canonical additive character, Gauss sums and periods, Jacobi sums, and
//! the two affine character-sum identities the construction rests on.
//!
//! Everything of order ≤ 4 is computed exactly in `CycZ4`; only sums that
//! involve p-th roots of unity go through floating point.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

use crate::gf::{Ambient, Class, FieldElement, GfError, Tower};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CharsError {
    #[error("element is not in the character's ambient field")]
    WrongField,
    #[error("characters live over different fields")]
    MismatchedFields,
    #[error("Jacobi sum {a} + {b}ζ₄ is not of the form ±1 + 2m(±1)ζ₄ for m = {m}")]
    MalformedJacobi { a: i64, b: i64, m: u64 },
    #[error("ℓ = {ell} is divisible by q + 1 = {q_plus_1}")]
    BadEll { ell: u64, q_plus_1: u64 },
    #[error("direct summation {direct:?} disagrees with the closed form {closed:?}")]
    IdentityMismatch { direct: CycZ4, closed: CycZ4 },
    #[error(transparent)]
    Gf(#[from] GfError),
}

/// Exact Gaussian integer a + b·ζ₄.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CycZ4 {
    pub a: i64,
    pub b: i64,
}

impl CycZ4 {
    pub const ZERO: CycZ4 = CycZ4 { a: 0, b: 0 };
    pub const ONE: CycZ4 = CycZ4 { a: 1, b: 0 };

    pub fn new(a: i64, b: i64) -> Self {
        CycZ4 { a, b }
    }

    /// ζ₄^i for any i (taken mod 4).
    pub fn zeta_pow(i: i64) -> Self {
        match i.rem_euclid(4) {
            0 => CycZ4::new(1, 0),
            1 => CycZ4::new(0, 1),
            2 => CycZ4::new(-1, 0),
            _ => CycZ4::new(0, -1),
        }
    }

    pub fn conj(self) -> Self {
        CycZ4::new(self.a, -self.b)
    }

    pub fn norm(self) -> i64 {
        self.a * self.a + self.b * self.b
    }

    pub fn is_zero(self) -> bool {
        self == CycZ4::ZERO
    }
}

impl Add for CycZ4 {
    type Output = CycZ4;
    fn add(self, rhs: CycZ4) -> CycZ4 {
        CycZ4::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl AddAssign for CycZ4 {
    fn add_assign(&mut self, rhs: CycZ4) {
        *self = *self + rhs;
    }
}

impl Sub for CycZ4 {
    type Output = CycZ4;
    fn sub(self, rhs: CycZ4) -> CycZ4 {
        CycZ4::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for CycZ4 {
    type Output = CycZ4;
    fn neg(self) -> CycZ4 {
        CycZ4::new(-self.a, -self.b)
    }
}

impl Mul for CycZ4 {
    type Output = CycZ4;
    fn mul(self, rhs: CycZ4) -> CycZ4 {
        CycZ4::new(
            self.a * rhs.a - self.b * rhs.b,
            self.a * rhs.b + self.b * rhs.a,
        )
    }
}

/// Complex value used only for sums over p-th roots of unity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexApprox {
    pub re: f64,
    pub im: f64,
}

impl ComplexApprox {
    pub fn new(re: f64, im: f64) -> Self {
        ComplexApprox { re, im }
    }

    pub fn conj(self) -> Self {
        ComplexApprox::new(self.re, -self.im)
    }

    pub fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn close_to(self, other: ComplexApprox, tol: f64) -> bool {
        (self.re - other.re).abs() <= tol && (self.im - other.im).abs() <= tol
    }
}

impl Add for ComplexApprox {
    type Output = ComplexApprox;
    fn add(self, rhs: ComplexApprox) -> ComplexApprox {
        ComplexApprox::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl AddAssign for ComplexApprox {
    fn add_assign(&mut self, rhs: ComplexApprox) {
        *self = *self + rhs;
    }
}

impl Mul for ComplexApprox {
    type Output = ComplexApprox;
    fn mul(self, rhs: ComplexApprox) -> ComplexApprox {
        ComplexApprox::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl From<CycZ4> for ComplexApprox {
    fn from(z: CycZ4) -> Self {
        ComplexApprox::new(z.a as f64, z.b as f64)
    }
}

/// Absolute tolerance for the floating-point character sums, scaled by √q
/// for the O(q·ulp) rounding accumulated when summing q unit vectors.
pub fn complex_tolerance(q: u64) -> f64 {
    1e-9 * (q as f64).sqrt()
}

/// A multiplicative character of order 1, 2, or 4 on one level of the tower,
/// with the fixed binding χ(generator) = ζ₄^{4/order}. Nontrivial characters
/// take the value 0 at 0; the trivial character takes 1 there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Character {
    pub order: u8,
    pub ambient: Ambient,
}

impl Character {
    pub fn trivial(ambient: Ambient) -> Self {
        Character { order: 1, ambient }
    }

    /// η: the quadratic character.
    pub fn quadratic(ambient: Ambient) -> Self {
        Character { order: 2, ambient }
    }

    /// χ₄ on the big field, χ₄′ on the subfield.
    pub fn quartic(ambient: Ambient) -> Self {
        Character { order: 4, ambient }
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
}

/// Evaluates χ(x) as an exact element of `Z[ζ₄]`.
pub fn eval_char(t: &Tower, chi: &Character, x: &FieldElement) -> Result<CycZ4, CharsError> {
    let class = t
        .power_residue_class(chi.ambient, chi.order, x)
        .map_err(|e| match e {
            GfError::WrongField => CharsError::WrongField,
            other => CharsError::Gf(other),
        })?;
    Ok(match class {
        Class::Zero => {
            if chi.is_trivial() {
                CycZ4::ONE
            } else {
                CycZ4::ZERO
            }
        }
        Class::Nth(i) => CycZ4::zeta_pow((4 / chi.order as i64) * i as i64),
    })
}

fn additive_char(t: &Tower, ambient: Ambient, x: &FieldElement) -> ComplexApprox {
    let tr = t.abs_trace(ambient, x);
    let angle = 2.0 * std::f64::consts::PI * tr as f64 / t.p() as f64;
    ComplexApprox::new(angle.cos(), angle.sin())
}

fn ambient_nonzero_elements<'a>(
    t: &'a Tower,
    ambient: Ambient,
) -> Box<dyn Iterator<Item = FieldElement> + 'a> {
    match ambient {
        Ambient::Sub => Box::new(t.subfield().elements.iter().filter(|x| !x.is_zero()).cloned()),
        Ambient::Big => Box::new((1..t.spec().order()).map(|i| t.spec().element_at(i))),
    }
}

/// Gauss sum G(χ) = Σ_{x ≠ 0} χ(x)ψ(x) with ψ the canonical additive
/// character of χ's ambient field. Returns −1 exactly for trivial χ.
pub fn gauss_sum(t: &Tower, chi: &Character) -> Result<ComplexApprox, CharsError> {
    if chi.is_trivial() {
        return Ok(ComplexApprox::new(-1.0, 0.0));
    }
    let mut acc = ComplexApprox::default();
    for x in ambient_nonzero_elements(t, chi.ambient) {
        let c = eval_char(t, chi, &x)?;
        acc += ComplexApprox::from(c) * additive_char(t, chi.ambient, &x);
    }
    Ok(acc)
}

/// Gauss period ψ(C_i^{(2,q)}) over the subfield, by direct summation.
pub fn gauss_period(t: &Tower, i: u8) -> Result<ComplexApprox, CharsError> {
    assert!(i < 2);
    let mut acc = ComplexApprox::default();
    for x in t.subfield().elements.iter() {
        match t.power_residue_class(Ambient::Sub, 2, x)? {
            Class::Nth(c) if c == i => acc += additive_char(t, Ambient::Sub, x),
            _ => {}
        }
    }
    Ok(acc)
}

/// Jacobi sum J(χ₁, χ₂) = Σ_x χ₁(x)χ₂(1 − x), exact in `Z[ζ₄]`.
pub fn jacobi_sum(t: &Tower, chi1: &Character, chi2: &Character) -> Result<CycZ4, CharsError> {
    if chi1.ambient != chi2.ambient {
        return Err(CharsError::MismatchedFields);
    }
    let spec = t.spec();
    let one = spec.one();
    let mut acc = CycZ4::ZERO;
    match chi1.ambient {
        Ambient::Sub => {
            for x in &t.subfield().elements {
                let u = eval_char(t, chi1, x)?;
                if u.is_zero() {
                    continue;
                }
                let v = eval_char(t, chi2, &spec.sub(&one, x))?;
                acc += u * v;
            }
        }
        Ambient::Big => {
            for i in 0..spec.order() {
                let x = spec.element_at(i);
                let u = eval_char(t, chi1, &x)?;
                if u.is_zero() {
                    continue;
                }
                let v = eval_char(t, chi2, &spec.sub(&one, &x))?;
                acc += u * v;
            }
        }
    }
    Ok(acc)
}

/// Reads the signs (ε, δ) out of J(η, χ₄′) = ε + 2mδ·ζ₄.
pub fn epsilon_delta(j: CycZ4, m: u64) -> Result<(i8, i8), CharsError> {
    let ok = m >= 1 && (j.a == 1 || j.a == -1) && j.b.unsigned_abs() == 2 * m;
    if !ok {
        return Err(CharsError::MalformedJacobi { a: j.a, b: j.b, m });
    }
    Ok((j.a as i8, if j.b > 0 { 1 } else { -1 }))
}

/// Data shared by the two affine character sums for a given ℓ.
struct AffineSetup {
    omega_ell: FieldElement,
    norm_param: FieldElement,
    t_el: FieldElement,
    /// χ₄′³(n − t²/4) · J(η, χ₄′), the ℓ-dependent unit times the Jacobi sum.
    tail: CycZ4,
    chi4_big: Character,
    chi4_sub: Character,
}

fn affine_setup(t: &Tower, ell: u64) -> Result<AffineSetup, CharsError> {
    let q = t.q();
    let big_order = q * q - 1;
    let ell_r = ell % big_order;
    if ell_r.is_multiple_of(q + 1) {
        return Err(CharsError::BadEll { ell, q_plus_1: q + 1 });
    }
    let spec = t.spec();
    let omega_ell = spec.pow_u(t.omega(), ell_r);
    // n = ω^{ℓ(q+1)} = g^ℓ and t = ω^ℓ + ω^{ℓq}.
    let norm_param = spec.pow_u(&t.subfield().generator, ell_r % (q - 1));
    let t_el = spec.add(&omega_ell, &spec.pow_u(&omega_ell, q));

    let chi4_sub = Character::quartic(Ambient::Sub);
    let four_inv = spec.inv(&spec.from_u64(4))?;
    let t2_over_4 = spec.mul(&spec.mul(&t_el, &t_el), &four_inv);
    let shifted = spec.sub(&norm_param, &t2_over_4);
    let v = eval_char(t, &chi4_sub, &shifted)?;
    let j = jacobi_sum(
        t,
        &Character::quadratic(Ambient::Sub),
        &chi4_sub,
    )?;
    Ok(AffineSetup {
        omega_ell,
        norm_param,
        t_el,
        tail: v * v * v * j,
        chi4_big: Character::quartic(Ambient::Big),
        chi4_sub,
    })
}

/// Σ_{x ∈ F_q} χ₄(1 + ω^ℓ x), computed directly and checked exactly against
/// the closed form χ₄′³(n)·χ₄′³(n − t²/4)·J(η, χ₄′).
pub fn character_sum_affine(t: &Tower, ell: u64) -> Result<CycZ4, CharsError> {
    let setup = affine_setup(t, ell)?;
    let spec = t.spec();
    let one = spec.one();

    let mut direct = CycZ4::ZERO;
    for x in &t.subfield().elements {
        let w = spec.add(&one, &spec.mul(&setup.omega_ell, x));
        direct += eval_char(t, &setup.chi4_big, &w)?;
    }

    let vn = eval_char(t, &setup.chi4_sub, &setup.norm_param)?;
    let closed = vn * vn * vn * setup.tail;
    if direct != closed {
        return Err(CharsError::IdentityMismatch { direct, closed });
    }
    Ok(direct)
}

/// Σ_{x ∈ F_q \ {s}} χ₄(1 + ω^ℓ x)·η(x − s), checked exactly against
/// χ₄′³(u)·χ₄′³(n − t²/4)·J(η, χ₄′) − χ₄′(n) with u = 1 + ts + ns².
pub fn character_sum_twisted(t: &Tower, ell: u64, s: &FieldElement) -> Result<CycZ4, CharsError> {
    let setup = affine_setup(t, ell)?;
    let spec = t.spec();
    let one = spec.one();
    let eta = Character::quadratic(Ambient::Sub);

    let mut direct = CycZ4::ZERO;
    for x in &t.subfield().elements {
        if x == s {
            continue;
        }
        let w = spec.add(&one, &spec.mul(&setup.omega_ell, x));
        let c = eval_char(t, &setup.chi4_big, &w)?;
        let e = eval_char(t, &eta, &spec.sub(x, s))?;
        direct += c * e;
    }

    let u = spec.add(
        &spec.add(&one, &spec.mul(&setup.t_el, s)),
        &spec.mul(&setup.norm_param, &spec.mul(s, s)),
    );
    debug_assert!(!u.is_zero(), "u = (1 + ω^ℓ s)^{{q+1}} is a norm of a nonzero element");
    let vu = eval_char(t, &setup.chi4_sub, &u)?;
    let vn = eval_char(t, &setup.chi4_sub, &setup.norm_param)?;
    let closed = vu * vu * vu * setup.tail - vn;
    if direct != closed {
        return Err(CharsError::IdentityMismatch { direct, closed });
    }
    Ok(direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_tower;

    #[test]
    fn cycz4_ring_ops() {
        let x = CycZ4::new(2, -3);
        let y = CycZ4::new(-1, 4);
        assert_eq!(x * y, CycZ4::new(-2 - -3 * 4, 2 * 4 + -3 * -1));
        assert_eq!(x + y, CycZ4::new(1, 1));
        assert_eq!(x.conj(), CycZ4::new(2, 3));
        assert_eq!(x.norm(), 13);
        assert_eq!(CycZ4::zeta_pow(1) * CycZ4::zeta_pow(1), CycZ4::new(-1, 0));
        assert_eq!(CycZ4::zeta_pow(-1), CycZ4::new(0, -1));
        assert_eq!(CycZ4::zeta_pow(6), CycZ4::new(-1, 0));
    }

    #[test]
    fn quadratic_character_on_f17() {
        let t = build_tower(17, 1).unwrap();
        let eta = Character::quadratic(Ambient::Sub);
        // Squares mod 17 derived by listing x².
        let squares: std::collections::BTreeSet<u64> = (1..17u64).map(|x| x * x % 17).collect();
        assert!(squares.contains(&16));
        for i in 1..17u64 {
            let x = t.spec().from_u64(i);
            let expected = if squares.contains(&i) { CycZ4::ONE } else { -CycZ4::ONE };
            assert_eq!(eval_char(&t, &eta, &x).unwrap(), expected, "η({i})");
        }
    }

    #[test]
    fn quartic_character_on_f17_even_classes() {
        // 2 = 6² is a square mod 17 with ind(2) ≡ 2 (mod 4) under any
        // generator, so χ₄′(2) = −1 independent of the tower's choice.
        let t = build_tower(17, 1).unwrap();
        let chi = Character::quartic(Ambient::Sub);
        assert_eq!(eval_char(&t, &chi, &t.spec().from_u64(2)).unwrap(), -CycZ4::ONE);
    }

    #[test]
    fn zero_conventions() {
        let t = build_tower(5, 1).unwrap();
        let zero = t.spec().zero();
        for amb in [Ambient::Sub, Ambient::Big] {
            assert_eq!(eval_char(&t, &Character::trivial(amb), &zero).unwrap(), CycZ4::ONE);
            assert_eq!(eval_char(&t, &Character::quadratic(amb), &zero).unwrap(), CycZ4::ZERO);
            assert_eq!(eval_char(&t, &Character::quartic(amb), &zero).unwrap(), CycZ4::ZERO);
        }
    }

    #[test]
    fn characters_are_multiplicative() {
        let t = build_tower(5, 1).unwrap();
        let spec = t.spec();
        for chi in [
            Character::quadratic(Ambient::Sub),
            Character::quartic(Ambient::Sub),
            Character::quartic(Ambient::Big),
        ] {
            let domain: Vec<FieldElement> = match chi.ambient {
                Ambient::Sub => t.subfield().elements.iter().filter(|x| !x.is_zero()).cloned().collect(),
                Ambient::Big => (1..25).map(|i| spec.element_at(i)).collect(),
            };
            for x in &domain {
                for y in &domain {
                    let lhs = eval_char(&t, &chi, &spec.mul(x, y)).unwrap();
                    let rhs = eval_char(&t, &chi, x).unwrap() * eval_char(&t, &chi, y).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn eval_rejects_foreign_elements() {
        let t = build_tower(5, 1).unwrap();
        let chi = Character::quartic(Ambient::Sub);
        assert_eq!(eval_char(&t, &chi, t.omega()).unwrap_err(), CharsError::WrongField);
    }

    #[test]
    fn gauss_sum_trivial_is_minus_one() {
        let t = build_tower(5, 1).unwrap();
        let g = gauss_sum(&t, &Character::trivial(Ambient::Sub)).unwrap();
        assert_eq!((g.re, g.im), (-1.0, 0.0));
    }

    #[test]
    fn quadratic_gauss_sum_closed_form() {
        // p ≡ 1 (mod 4), s = 1 exponent: G_q(η) = +√q.
        for p in [5u64, 13, 17, 29, 37] {
            let t = build_tower(p, 1).unwrap();
            let g = gauss_sum(&t, &Character::quadratic(Ambient::Sub)).unwrap();
            let tol = complex_tolerance(p);
            assert!(
                g.close_to(ComplexApprox::new((p as f64).sqrt(), 0.0), tol),
                "G_{p}(η) = {g:?}"
            );
        }
    }

    #[test]
    fn quadratic_gauss_sum_prime_square() {
        // q = 25 = 5²: the closed form (−1)^{s−1}√q gives −5 for s = 2.
        let t = build_tower(5, 2).unwrap();
        let g = gauss_sum(&t, &Character::quadratic(Ambient::Sub)).unwrap();
        assert!(g.close_to(ComplexApprox::new(-5.0, 0.0), complex_tolerance(25)), "{g:?}");
    }

    #[test]
    fn gauss_sum_modulus_squared_is_q() {
        for p in [5u64, 13, 17] {
            let t = build_tower(p, 1).unwrap();
            for chi in [Character::quadratic(Ambient::Sub), Character::quartic(Ambient::Sub)] {
                let g = gauss_sum(&t, &chi).unwrap();
                assert!((g.abs2() - p as f64).abs() <= complex_tolerance(p));
            }
        }
    }

    #[test]
    fn gauss_sum_inverse_conjugate_law() {
        // G(χ^{-1}) = χ(−1)·conj(G(χ)); the inverse of χ₄′ is summed directly.
        let t = build_tower(17, 1).unwrap();
        let chi = Character::quartic(Ambient::Sub);
        let g = gauss_sum(&t, &chi).unwrap();
        let spec = t.spec();
        let mut g_inv = ComplexApprox::default();
        for x in t.subfield().elements.iter().filter(|x| !x.is_zero()) {
            let c = eval_char(&t, &chi, x).unwrap().conj(); // χ^{-1} = conj on units
            let tr = t.abs_trace(Ambient::Sub, x);
            let angle = 2.0 * std::f64::consts::PI * tr as f64 / 17.0;
            g_inv += ComplexApprox::from(c) * ComplexApprox::new(angle.cos(), angle.sin());
        }
        let minus_one = spec.from_u64(16);
        let chi_m1 = eval_char(&t, &chi, &minus_one).unwrap();
        let rhs = ComplexApprox::from(chi_m1) * g.conj();
        assert!(g_inv.close_to(rhs, complex_tolerance(17)));
    }

    #[test]
    fn gauss_periods_q5() {
        let t = build_tower(5, 1).unwrap();
        // Oracle: C_0 = {1, 4}, C_1 = {2, 3} mod 5, summed explicitly.
        let psi = |x: u64| {
            let a = 2.0 * std::f64::consts::PI * x as f64 / 5.0;
            ComplexApprox::new(a.cos(), a.sin())
        };
        let expect0 = psi(1) + psi(4);
        let expect1 = psi(2) + psi(3);
        let tol = complex_tolerance(5);
        assert!(gauss_period(&t, 0).unwrap().close_to(expect0, tol));
        assert!(gauss_period(&t, 1).unwrap().close_to(expect1, tol));
        // Closed forms (−1 ± √5)/2.
        let root5 = 5f64.sqrt();
        assert!(gauss_period(&t, 0).unwrap().close_to(ComplexApprox::new((-1.0 + root5) / 2.0, 0.0), tol));
        assert!(gauss_period(&t, 1).unwrap().close_to(ComplexApprox::new((-1.0 - root5) / 2.0, 0.0), tol));
    }

    #[test]
    fn gauss_periods_sum_to_minus_one() {
        for p in [5u64, 17] {
            let t = build_tower(p, 1).unwrap();
            let s = gauss_period(&t, 0).unwrap() + gauss_period(&t, 1).unwrap();
            assert!(s.close_to(ComplexApprox::new(-1.0, 0.0), complex_tolerance(p)));
        }
    }

    #[test]
    fn jacobi_sum_q5_frozen() {
        // Hand derivation for the deterministic tower over F_5 (modulus
        // X² + X + 1, ω = X + 2, subfield generator 3): J(η, χ₄′) = 1 − 2ζ₄.
        let t = build_tower(5, 1).unwrap();
        let j = jacobi_sum(
            &t,
            &Character::quadratic(Ambient::Sub),
            &Character::quartic(Ambient::Sub),
        )
        .unwrap();
        assert_eq!(j, CycZ4::new(1, -2));
        assert_eq!(j.norm(), 5);
    }

    #[test]
    fn jacobi_sum_law_mod_eight() {
        for q in [5u64, 13, 17, 29, 37, 41, 53, 101] {
            let t = build_tower(q, 1).unwrap();
            let j = jacobi_sum(
                &t,
                &Character::quadratic(Ambient::Sub),
                &Character::quartic(Ambient::Sub),
            )
            .unwrap();
            assert_eq!(j.norm(), q as i64, "norm at q = {q}");
            assert_eq!(j.a.rem_euclid(2), 1, "a odd at q = {q}");
            let expected_a_mod4 = if q % 8 == 1 { 3 } else { 1 };
            assert_eq!(j.a.rem_euclid(4), expected_a_mod4, "mod-4 law at q = {q}");
        }
    }

    #[test]
    fn jacobi_sum_spec_pairs() {
        // a-values plus |b| = 2m for the first construction fields.
        for (q, a_abs1, b_abs) in [(5u64, 1i64, 2i64), (17, -1, 4), (37, 1, 6)] {
            let t = build_tower(q, 1).unwrap();
            let j = jacobi_sum(
                &t,
                &Character::quadratic(Ambient::Sub),
                &Character::quartic(Ambient::Sub),
            )
            .unwrap();
            assert_eq!(j.a, a_abs1);
            assert_eq!(j.b.abs(), b_abs);
        }
    }

    #[test]
    fn gauss_and_jacobi_over_the_big_field() {
        // Ambient::Big paths enumerate the whole field by index.
        let t = build_tower(5, 1).unwrap();
        let chi = Character::quartic(Ambient::Big);
        let g = gauss_sum(&t, &chi).unwrap();
        assert!((g.abs2() - 25.0).abs() <= complex_tolerance(25));
        let j = jacobi_sum(&t, &Character::quadratic(Ambient::Big), &chi).unwrap();
        // |J|² = q² for nontrivial χ₁, χ₂, χ₁χ₂.
        assert_eq!(j.norm(), 25);
    }

    #[test]
    fn jacobi_sum_rejects_mixed_ambients() {
        let t = build_tower(5, 1).unwrap();
        let err = jacobi_sum(
            &t,
            &Character::quadratic(Ambient::Sub),
            &Character::quartic(Ambient::Big),
        )
        .unwrap_err();
        assert_eq!(err, CharsError::MismatchedFields);
    }

    #[test]
    fn epsilon_delta_read_off() {
        assert_eq!(epsilon_delta(CycZ4::new(1, 2), 1).unwrap(), (1, 1));
        assert_eq!(epsilon_delta(CycZ4::new(-1, -4), 2).unwrap(), (-1, -1));
        assert!(matches!(
            epsilon_delta(CycZ4::new(3, 2), 1),
            Err(CharsError::MalformedJacobi { .. })
        ));
    }

    #[test]
    fn affine_sum_identity_q5_all_ell() {
        let t = build_tower(5, 1).unwrap();
        for ell in 1..24u64 {
            if ell % 6 == 0 {
                assert!(matches!(
                    character_sum_affine(&t, ell),
                    Err(CharsError::BadEll { .. })
                ));
            } else {
                let v = character_sum_affine(&t, ell).unwrap();
                assert_eq!(v.norm(), 5, "norm at ℓ = {ell}");
            }
        }
    }

    #[test]
    fn affine_sum_identity_q17() {
        let t = build_tower(17, 1).unwrap();
        let v = character_sum_affine(&t, 1).unwrap();
        assert_eq!(v.norm(), 17);
    }

    #[test]
    fn twisted_sum_identity_q5_exhaustive() {
        let t = build_tower(5, 1).unwrap();
        for ell in [1u64, 2, 3] {
            for s in &t.subfield().elements {
                character_sum_twisted(&t, ell, s).unwrap();
            }
        }
    }

    #[test]
    fn twisted_sum_at_zero_reduces_to_affine_tail() {
        // s = 0 gives u = 1, so the closed form is χ₄′³(n − t²/4)·J − χ₄′(n).
        let t = build_tower(17, 1).unwrap();
        let spec = t.spec();
        let got = character_sum_twisted(&t, 1, &spec.zero()).unwrap();

        let g = &t.subfield().generator;
        let n = g.clone();
        let omega_ell = t.omega().clone();
        let t_el = spec.add(&omega_ell, &spec.pow_u(&omega_ell, 17));
        let four_inv = spec.inv(&spec.from_u64(4)).unwrap();
        let shifted = spec.sub(&n, &spec.mul(&spec.mul(&t_el, &t_el), &four_inv));
        let chi = Character::quartic(Ambient::Sub);
        let v = eval_char(&t, &chi, &shifted).unwrap();
        let j = jacobi_sum(&t, &Character::quadratic(Ambient::Sub), &chi).unwrap();
        let vn = eval_char(&t, &chi, &n).unwrap();
        assert_eq!(got, v * v * v * j - vn);
    }

    #[test]
    fn bad_ell_rejected() {
        let t = build_tower(5, 1).unwrap();
        for ell in [0u64, 6, 12, 18] {
            assert!(matches!(
                character_sum_affine(&t, ell),
                Err(CharsError::BadEll { .. })
            ));
        }
    }
}
