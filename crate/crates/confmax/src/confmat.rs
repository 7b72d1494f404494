//! Conference matrices: the Paley construction, exact verification, excess,
//! the row-sum excess bounds, and the excess-maximizing switching driven by a
//! two-intersection set and its α-dual.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gf::{Ambient, Class, Tower};
use crate::twoint::{m_of_q, TwoIntersectionSet, TwoIntError};

#[derive(Debug, Error)]
pub enum ConfmatError {
    #[error("q = {0} is not congruent to 1 mod 4")]
    BadQ(u64),
    #[error("order {0} is not an even integer ≥ 2")]
    BadOrder(usize),
    #[error("n − 1 = {0} is a perfect square; the two-valued row-sum count does not apply")]
    SquareCase(usize),
    #[error("row-sum count a = {num}/{den} is not integral; the bound is not attainable in this pattern")]
    NonIntegralCount { num: u64, den: u64 },
    #[error("index {index} out of range for order {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error(transparent)]
    TwoInt(#[from] TwoIntError),
}

/// Square matrix over {−1, 0, +1}, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl SignedMatrix {
    pub fn zeros(n: usize) -> Self {
        SignedMatrix { n, entries: vec![0; n * n] }
    }

    pub fn from_entries(n: usize, entries: Vec<i8>) -> Self {
        assert_eq!(entries.len(), n * n);
        SignedMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i8) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }
}

/// Paley conference matrix of order q + 1: all-ones border in row/column 0,
/// then −M, where M_{i,j} follows the quadratic class of x_j − x_i. Core
/// rows/columns are indexed by the subfield enumeration.
pub fn paley_conference(t: &Tower) -> Result<SignedMatrix, ConfmatError> {
    let q = t.q();
    if q % 4 != 1 {
        return Err(ConfmatError::BadQ(q));
    }
    let spec = t.spec();
    let sub = t.subfield();
    let qe = q as usize;
    // Quadratic class of each subfield element, by position.
    let mut square = vec![false; qe];
    for (pos, x) in sub.elements.iter().enumerate() {
        square[pos] = matches!(
            t.power_residue_class(Ambient::Sub, 2, x).map_err(TwoIntError::from)?,
            Class::Nth(0)
        );
    }
    let pos_of = |x: &crate::gf::FieldElement| sub.position(spec, x).expect("closed");

    let n = qe + 1;
    let mut w = SignedMatrix::zeros(n);
    for j in 1..n {
        w.set(0, j, 1);
        w.set(j, 0, 1);
    }
    for (i, xi) in sub.elements.iter().enumerate() {
        for (j, xj) in sub.elements.iter().enumerate() {
            if i == j {
                continue;
            }
            let diff_pos = pos_of(&spec.sub(xj, xi));
            let m = if square[diff_pos] { 1 } else { -1 };
            w.set(1 + i, 1 + j, -m);
        }
    }
    Ok(w)
}

/// Structured result of the conference verification. Full off-diagonal
/// support is implied by the Gram identity and only reported.
#[derive(Debug, Clone)]
pub struct ConferenceCheck {
    pub ok: bool,
    pub zero_diagonal: bool,
    pub entries_in_range: bool,
    pub gram_ok: bool,
    pub full_offdiagonal_support: bool,
    pub first_diagonal_failure: Option<usize>,
    pub first_gram_failure: Option<GramFailure>,
}

#[derive(Debug, Clone, Copy)]
pub struct GramFailure {
    pub i: usize,
    pub j: usize,
    pub got: i64,
    pub expected: i64,
}

/// Checks the zero diagonal, the entry range, and W·Wᵀ = (n−1)I in exact
/// integer arithmetic.
pub fn verify_conference(w: &SignedMatrix) -> ConferenceCheck {
    let n = w.n();
    let mut zero_diagonal = true;
    let mut first_diagonal_failure = None;
    for i in 0..n {
        if w.get(i, i) != 0 {
            zero_diagonal = false;
            first_diagonal_failure = Some(i);
            break;
        }
    }
    let entries_in_range = w.entries().iter().all(|&e| (-1..=1).contains(&e));
    let mut full_offdiagonal_support = true;
    'support: for i in 0..n {
        for j in 0..n {
            if i != j && w.get(i, j) == 0 {
                full_offdiagonal_support = false;
                break 'support;
            }
        }
    }
    let mut gram_ok = true;
    let mut first_gram_failure = None;
    'gram: for i in 0..n {
        for j in i..n {
            let dot: i64 = (0..n)
                .map(|k| w.get(i, k) as i64 * w.get(j, k) as i64)
                .sum();
            let expected = if i == j { (n - 1) as i64 } else { 0 };
            if dot != expected {
                gram_ok = false;
                first_gram_failure = Some(GramFailure { i, j, got: dot, expected });
                break 'gram;
            }
        }
    }
    ConferenceCheck {
        ok: zero_diagonal && entries_in_range && gram_ok,
        zero_diagonal,
        entries_in_range,
        gram_ok,
        full_offdiagonal_support,
        first_diagonal_failure,
        first_gram_failure,
    }
}

/// Sum of all entries.
pub fn excess(w: &SignedMatrix) -> i64 {
    w.entries().iter().map(|&e| e as i64).sum()
}

pub fn row_sum_spectrum(w: &SignedMatrix) -> BTreeMap<i64, u64> {
    let mut hist = BTreeMap::new();
    for i in 0..w.n() {
        let s: i64 = w.row(i).iter().map(|&e| e as i64).sum();
        *hist.entry(s).or_insert(0) += 1;
    }
    hist
}

/// The excess upper bound n(k² + 2k + n − 1)/(2(k + 1)) as an exact reduced
/// fraction, with k the largest odd integer with k² ≤ n − 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExcessBound {
    pub n: usize,
    pub k: u64,
    pub num: u64,
    pub den: u64,
}

impl ExcessBound {
    pub fn attained_by(&self, excess: i64) -> bool {
        excess >= 0 && excess as u128 * self.den as u128 == self.num as u128
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn excess_bound(n: usize) -> Result<ExcessBound, ConfmatError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(ConfmatError::BadOrder(n));
    }
    let nm1 = (n - 1) as u64;
    let mut k = crate::gf::isqrt(nm1);
    if k.is_multiple_of(2) {
        k -= 1;
    }
    let num = n as u64 * (k * k + 2 * k + nm1);
    let den = 2 * (k + 1);
    let g = gcd(num, den);
    Ok(ExcessBound { n, k, num: num / g, den: den / g })
}

/// For nonsquare n − 1: the forced number a of rows with sum k in a matrix
/// attaining the bound, a = n((k+2)² − (n−1))/(4(k+1)).
pub fn optimal_row_sum_counts(n: usize) -> Result<(u64, u64), ConfmatError> {
    let bound = excess_bound(n)?;
    let nm1 = (n - 1) as u64;
    if bound.k * bound.k == nm1 {
        return Err(ConfmatError::SquareCase(n - 1));
    }
    let num = n as u64 * ((bound.k + 2) * (bound.k + 2) - nm1);
    let den = 4 * (bound.k + 1);
    if !num.is_multiple_of(den) {
        return Err(ConfmatError::NonIntegralCount { num, den });
    }
    let a = num / den;
    Ok((a, n as u64 - a))
}

/// Negates the selected rows, then the selected columns (an entry hit twice
/// is unchanged).
pub fn switch_signs(
    w: &SignedMatrix,
    neg_rows: &[usize],
    neg_cols: &[usize],
) -> Result<SignedMatrix, ConfmatError> {
    let n = w.n();
    if let Some(&index) = neg_rows.iter().chain(neg_cols).find(|&&i| i >= n) {
        return Err(ConfmatError::IndexOutOfRange { index, n });
    }
    let mut out = w.clone();
    for &i in neg_rows {
        for j in 0..n {
            out.set(i, j, -out.get(i, j));
        }
    }
    for &j in neg_cols {
        for i in 0..n {
            out.set(i, j, -out.get(i, j));
        }
    }
    Ok(out)
}

/// Full certificate for a switched matrix: bound data, the achieved excess,
/// the row-sum vector, and the predicted count of k-rows.
#[derive(Debug, Clone)]
pub struct ExcessCertificate {
    pub n: usize,
    pub k: u64,
    pub bound_num: u64,
    pub bound_den: u64,
    pub excess: i64,
    pub row_sums: Vec<i64>,
    pub a_count: u64,
}

impl ExcessCertificate {
    pub fn attained(&self) -> bool {
        self.excess >= 0 && self.excess as u128 * self.bound_den as u128 == self.bound_num as u128
    }
}

/// Switches the Paley matrix into its maximum-excess form: first the columns
/// indexed by D, then the rows indexed by D_α^⊥ (border row/column 0 is
/// never negated as a whole line). The result is certified: conference
/// property, row sums in {2m−1, 2m+1} with the forced counts, and excess
/// equal to the bound.
pub fn maximize_excess(
    t: &Tower,
    d: &TwoIntersectionSet,
    d_alpha_perp: &[usize],
) -> Result<(SignedMatrix, ExcessCertificate), ConfmatError> {
    let q = t.q();
    let m = m_of_q(q).ok_or(ConfmatError::BadQ(q))?;
    let expected = (2 * m * m - m + 1, m * m - m, m * m);
    if (d.j as u64, d.alpha as u64, d.beta as u64) != expected {
        return Err(ConfmatError::CertificationFailed(format!(
            "D has parameters ({}; {}, {}), expected ({}; {}, {})",
            d.j, d.alpha, d.beta, expected.0, expected.1, expected.2
        )));
    }
    let w = paley_conference(t)?;
    let cols: Vec<usize> = d.elements.iter().map(|&p| p + 1).collect();
    let rows: Vec<usize> = d_alpha_perp.iter().map(|&p| p + 1).collect();
    let w = switch_signs(&w, &[], &cols)?;
    let w = switch_signs(&w, &rows, &[])?;

    let n = w.n();
    let bound = excess_bound(n)?;
    let (a_count, rest) = optimal_row_sum_counts(n)?;
    let row_sums: Vec<i64> = (0..n)
        .map(|i| w.row(i).iter().map(|&e| e as i64).sum())
        .collect();
    let low = 2 * m as i64 - 1;
    let high = 2 * m as i64 + 1;
    let n_low = row_sums.iter().filter(|&&s| s == low).count() as u64;
    let n_high = row_sums.iter().filter(|&&s| s == high).count() as u64;
    if n_low + n_high != n as u64 || n_low != a_count || n_high != rest {
        return Err(ConfmatError::CertificationFailed(format!(
            "row-sum spectrum {{{low}: {n_low}, {high}: {n_high}}} differs from {{{low}: {a_count}, {high}: {rest}}}"
        )));
    }
    let cert = ExcessCertificate {
        n,
        k: bound.k,
        bound_num: bound.num,
        bound_den: bound.den,
        excess: row_sums.iter().sum(),
        row_sums,
        a_count,
    };
    if !cert.attained() {
        return Err(ConfmatError::CertificationFailed(format!(
            "excess {} misses the bound {}/{}",
            cert.excess, cert.bound_num, cert.bound_den
        )));
    }
    if !verify_conference(&w).ok {
        return Err(ConfmatError::CertificationFailed(
            "switched matrix lost the conference property".into(),
        ));
    }
    Ok((w, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chars::{epsilon_delta, jacobi_sum, Character};
    use crate::gf::build_tower;
    use crate::twoint::{build_d, dual_sets, find_admissible_pair, qr_design_blocks};

    fn pipeline(q: u64) -> (Tower, TwoIntersectionSet, Vec<usize>) {
        let t = build_tower(q, 1).unwrap();
        let j = jacobi_sum(
            &t,
            &Character::quadratic(Ambient::Sub),
            &Character::quartic(Ambient::Sub),
        )
        .unwrap();
        let m = m_of_q(q).unwrap();
        let (eps, delta) = epsilon_delta(j, m).unwrap();
        let pair = find_admissible_pair(&t, eps, delta).unwrap();
        let design = qr_design_blocks(&t).unwrap();
        let d = build_d(&t, &pair, &design).unwrap();
        let (alpha_perp, _) = dual_sets(&d, &design).unwrap();
        (t, d, alpha_perp)
    }

    #[test]
    fn paley_q5_is_conference() {
        let t = build_tower(5, 1).unwrap();
        let w = paley_conference(&t).unwrap();
        assert_eq!(w.n(), 6);
        let check = verify_conference(&w);
        assert!(check.ok && check.full_offdiagonal_support);
        // The core is symmetric with zero diagonal and zero row sums.
        for i in 0..5 {
            assert_eq!(w.get(1 + i, 1 + i), 0);
            let s: i64 = (0..5).map(|j| w.get(1 + i, 1 + j) as i64).sum();
            assert_eq!(s, 0);
            for j in 0..5 {
                assert_eq!(w.get(1 + i, 1 + j), w.get(1 + j, 1 + i));
            }
        }
    }

    #[test]
    fn paley_q17_is_conference() {
        let t = build_tower(17, 1).unwrap();
        let w = paley_conference(&t).unwrap();
        assert_eq!(w.n(), 18);
        assert!(verify_conference(&w).ok);
    }

    #[test]
    fn verify_rejects_nonzero_diagonal() {
        // Identity of order 2 passes the Gram identity ((n−1)I = I) but has a
        // nonzero diagonal.
        let mut w = SignedMatrix::zeros(2);
        w.set(0, 0, 1);
        w.set(1, 1, 1);
        let check = verify_conference(&w);
        assert!(check.gram_ok && !check.zero_diagonal && !check.ok);
        assert_eq!(check.first_diagonal_failure, Some(0));
    }

    #[test]
    fn passing_rows_have_full_support() {
        let t = build_tower(5, 1).unwrap();
        let w = paley_conference(&t).unwrap();
        for i in 0..6 {
            let nonzero = w.row(i).iter().filter(|&&e| e != 0).count();
            assert_eq!(nonzero, 5);
        }
    }

    #[test]
    fn excess_of_zero_matrix() {
        assert_eq!(excess(&SignedMatrix::zeros(4)), 0);
    }

    #[test]
    fn excess_of_unswitched_paley_q5() {
        // Border contributes 2q; the core M has zero row sums.
        let t = build_tower(5, 1).unwrap();
        let w = paley_conference(&t).unwrap();
        assert_eq!(excess(&w), 10);
        assert_eq!(
            row_sum_spectrum(&w),
            BTreeMap::from([(1, 5), (5, 1)])
        );
    }

    #[test]
    fn bound_values() {
        for (n, k, b) in [(6usize, 1u64, 12u64), (18, 3, 72), (38, 5, 228)] {
            let eb = excess_bound(n).unwrap();
            assert_eq!((eb.k, eb.num, eb.den), (k, b, 1));
        }
        // Square case n − 1 = 9: bound collapses to n√(n−1).
        let eb = excess_bound(10).unwrap();
        assert_eq!((eb.k, eb.num, eb.den), (3, 30, 1));
        assert!(matches!(excess_bound(7), Err(ConfmatError::BadOrder(7))));
        assert!(matches!(excess_bound(0), Err(ConfmatError::BadOrder(0))));
    }

    #[test]
    fn bound_reduces_fractions() {
        // n = 4: k = 1, bound = 4·(1+2+3)/4 = 6.
        let eb = excess_bound(4).unwrap();
        assert_eq!((eb.num, eb.den), (6, 1));
    }

    #[test]
    fn row_sum_counts() {
        assert_eq!(optimal_row_sum_counts(6).unwrap(), (3, 3));
        assert_eq!(optimal_row_sum_counts(18).unwrap(), (9, 9));
        assert_eq!(optimal_row_sum_counts(38).unwrap(), (19, 19));
        assert!(matches!(
            optimal_row_sum_counts(10),
            Err(ConfmatError::SquareCase(9))
        ));
    }

    #[test]
    fn switch_signs_identities() {
        let t = build_tower(5, 1).unwrap();
        let w = paley_conference(&t).unwrap();
        assert_eq!(switch_signs(&w, &[], &[]).unwrap(), w);
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(switch_signs(&w, &all, &all).unwrap(), w);
        assert!(matches!(
            switch_signs(&w, &[6], &[]),
            Err(ConfmatError::IndexOutOfRange { index: 6, n: 6 })
        ));
    }

    #[test]
    fn switching_preserves_conference_property() {
        let t = build_tower(17, 1).unwrap();
        let w = paley_conference(&t).unwrap();
        let out = switch_signs(&w, &[0, 3, 7], &[2, 3, 11]).unwrap();
        assert!(verify_conference(&out).ok);
        assert_eq!(
            verify_conference(&out).ok,
            verify_conference(&w).ok
        );
    }

    #[test]
    fn maximized_q5() {
        let (t, d, alpha_perp) = pipeline(5);
        let (w, cert) = maximize_excess(&t, &d, &alpha_perp).unwrap();
        assert_eq!(cert.excess, 12);
        assert!(cert.attained());
        assert_eq!(row_sum_spectrum(&w), BTreeMap::from([(1, 3), (3, 3)]));
    }

    #[test]
    fn maximized_q17() {
        let (t, d, alpha_perp) = pipeline(17);
        let (w, cert) = maximize_excess(&t, &d, &alpha_perp).unwrap();
        assert_eq!(cert.excess, 72);
        assert_eq!(row_sum_spectrum(&w), BTreeMap::from([(3, 9), (5, 9)]));
        assert!(verify_conference(&w).ok);
    }

    #[test]
    fn row_sum_square_identity() {
        for q in [5u64, 17] {
            let (t, d, alpha_perp) = pipeline(q);
            let w0 = paley_conference(&t).unwrap();
            let (w1, _) = maximize_excess(&t, &d, &alpha_perp).unwrap();
            for w in [&w0, &w1] {
                let n = w.n() as i64;
                let ssq: i64 = (0..w.n())
                    .map(|i| {
                        let s: i64 = w.row(i).iter().map(|&e| e as i64).sum();
                        s * s
                    })
                    .sum();
                assert_eq!(ssq, n * (n - 1));
            }
        }
    }

    #[test]
    fn row_sum_parity() {
        let (t, d, alpha_perp) = pipeline(17);
        let (w, _) = maximize_excess(&t, &d, &alpha_perp).unwrap();
        for (s, _) in row_sum_spectrum(&w) {
            assert_eq!(s.rem_euclid(2), (w.n() as i64 - 1).rem_euclid(2));
        }
    }
}
