//! Independent brute-force verifiers. Everything here is re-derived from raw
//! enumeration; none of the construction-side profile, excess, or character
//! logic is reused.

use thiserror::Error;

use crate::confmat::SignedMatrix;
use crate::gf::{FieldElement, FieldSpec};
use crate::twoint::BlockDesign;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration size {size} exceeds the budget {budget}")]
    BudgetExceeded { size: u128, budget: u64 },
    #[error("target is not in the multiplicative group")]
    NotInGroup,
}

/// Hard enumeration caps. Exceeding a cap is an error, never a truncation.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    /// Maximum number of j-subsets enumerated.
    pub max_subsets: u64,
    /// Maximum number of row/column sign patterns (2^{2n}).
    pub max_patterns: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_subsets: 10_000_000, max_patterns: 1 << 16 }
    }
}

fn binomial(v: usize, j: usize) -> u128 {
    if j > v {
        return 0;
    }
    let j = j.min(v - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        acc = acc * (v - i) as u128 / (i as u128 + 1);
    }
    acc
}

/// Every j-subset of the design's points whose block-intersection histogram
/// is exactly {alpha, beta} (both attained), by exhaustive enumeration.
pub fn brute_force_two_intersection_sets(
    design: &BlockDesign,
    j: usize,
    alpha: usize,
    beta: usize,
    budget: &OracleBudget,
) -> Result<Vec<Vec<usize>>, OracleError> {
    let v = design.v;
    let count = binomial(v, j);
    if count > budget.max_subsets as u128 {
        return Err(OracleError::BudgetExceeded { size: count, budget: budget.max_subsets });
    }
    let mut witnesses = Vec::new();
    if j > v {
        return Ok(witnesses);
    }
    let mut subset: Vec<usize> = (0..j).collect();
    let mut mask = vec![false; v];
    loop {
        for &p in &subset {
            mask[p] = true;
        }
        let mut saw_alpha = false;
        let mut saw_beta = false;
        let mut two_valued = true;
        for b in &design.blocks {
            let c = b.iter().filter(|&&p| mask[p]).count();
            if c == alpha {
                saw_alpha = true;
            } else if c == beta {
                saw_beta = true;
            } else {
                two_valued = false;
                break;
            }
        }
        if two_valued && saw_alpha && saw_beta {
            witnesses.push(subset.clone());
        }
        for &p in &subset {
            mask[p] = false;
        }
        // Lexicographic successor of the combination.
        if j == 0 {
            break;
        }
        let mut i = j;
        loop {
            if i == 0 {
                return Ok(witnesses);
            }
            i -= 1;
            if subset[i] < v - (j - i) {
                subset[i] += 1;
                for t in i + 1..j {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
    Ok(witnesses)
}

/// Exact maximum excess over all 2^{2n} row/column sign patterns, with every
/// maximizing (row-mask, column-mask) pair as witness.
pub fn brute_force_max_excess_switching(
    w: &SignedMatrix,
    budget: &OracleBudget,
) -> Result<(i64, Vec<(u64, u64)>), OracleError> {
    let n = w.n();
    assert!(n <= 32, "mask representation caps the order at 32");
    let patterns = 1u128 << (2 * n);
    if patterns > budget.max_patterns as u128 {
        return Err(OracleError::BudgetExceeded { size: patterns, budget: budget.max_patterns });
    }
    let mut best = i64::MIN;
    let mut witnesses = Vec::new();
    for r in 0u64..1 << n {
        // Column sums after the row flips.
        let colsum: Vec<i64> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let sign = if r >> i & 1 == 1 { -1 } else { 1 };
                        sign * w.get(i, j) as i64
                    })
                    .sum()
            })
            .collect();
        for c in 0u64..1 << n {
            let e: i64 = (0..n)
                .map(|j| if c >> j & 1 == 1 { -colsum[j] } else { colsum[j] })
                .sum();
            if e > best {
                best = e;
                witnesses.clear();
            }
            if e == best {
                witnesses.push((r, c));
            }
        }
    }
    Ok((best, witnesses))
}

/// Least e ≥ 0 with base^e = target, by linear scan up to `max_steps`.
pub fn naive_discrete_log(
    spec: &FieldSpec,
    base: &FieldElement,
    target: &FieldElement,
    max_steps: u64,
) -> Result<u64, OracleError> {
    if target.is_zero() {
        return Err(OracleError::NotInGroup);
    }
    let mut cur = spec.one();
    for e in 0..max_steps {
        if cur == *target {
            return Ok(e);
        }
        cur = spec.mul(&cur, base);
    }
    Err(OracleError::NotInGroup)
}
