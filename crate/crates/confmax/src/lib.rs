//! Construction of conference matrices of order q + 1 with maximum excess,
//! for prime powers q = 4m² + 1, p ≡ 1 (mod 4).
//!
//! The pipeline builds the tower F_p ⊂ F_q ⊂ F_{q²}, extracts the Jacobi-sum
//! signs (ε, δ), searches the smallest admissible pair (h, ℓ), constructs a
//! two-intersection set D for the quadratic-residue translate design, and
//! switches the Paley conference matrix by D and its α-dual. Every algebraic
//! identity along the way is checked exactly; floating point appears only in
//! the optional Gauss-sum verifications.

#![forbid(unsafe_code)]

pub mod chars;
pub mod confmat;
pub mod gf;
pub mod oracle;
pub mod report;
pub mod twoint;

pub use gf::{build_tower, build_tower_budget, Ambient, Class, FieldElement, FieldSpec, Tower};
pub use report::{construct, Construction, ConstructionReport, PipelineError};
