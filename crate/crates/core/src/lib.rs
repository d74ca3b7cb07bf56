//! Finite forest algebras, the ≈ⁿ_{τ,π} congruences on forests, derived
//! algebras, and recursive non-membership proofs.

pub mod algebra;
pub mod cli;
pub mod congruence;
pub mod derived;
pub mod fixtures;
pub mod proofsearch;
pub mod terms;
