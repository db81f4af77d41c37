//! Dyadic interval sieve for inhomogeneous Diophantine approximation.

pub mod numerics;
pub mod funcsys;
pub mod admissibility;
pub mod sieve;
pub mod oracle;
pub mod cli;
