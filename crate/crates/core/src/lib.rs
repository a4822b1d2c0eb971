//! Nested sequent proof search for the intuitionistic modal logics IK, IKt,
//! IK4 and IS4, and realisation of the resulting proofs into the matching
//! justification logics with Hilbert-style certificates.

pub mod calculus;
pub mod jl_hilbert;
pub mod nested;
pub mod realiser;
pub mod syntax;
