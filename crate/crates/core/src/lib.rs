//! Certified algebra for homologically trivial `Z_p × Z_p` actions on
//! simply-connected 4-manifolds.
//!
//! The crate works purely with algebraic certificates:
//!
//! * [`forms`]: exact integer symmetric forms, congruence and invariants.
//! * [`reduction`]: splitting unimodular chain forms into `(±1)` and
//!   hyperbolic blocks, with a brute-force oracle.
//! * [`plumbing`]: singular-set loops, their circular and cut intersection
//!   matrices, validation and enumeration.
//! * [`gluing`]: the `GL(2, Z)` torus-bundle gluing calculus.
//! * [`borel`]: rank bookkeeping for `H*(Z_p × Z_p)` and the Borel spectral
//!   sequence of the pair `(M, Σ)`.
//! * [`classify`]: homeomorphism types and equivariant decompositions.
//! * [`cli`]: document I/O and report assembly for the `zpzp` binary.

pub mod borel;
pub mod classify;
pub mod cli;
pub mod decimal;
pub mod forms;
pub mod gluing;
pub mod matrix;
pub mod plumbing;
pub mod primes;
pub mod reduction;

pub use forms::{FormInvariants, Parity, SymmetricForm, UnimodularMatrix};
pub use matrix::IntMatrix;
pub use plumbing::{ExceptionFlag, Sign, SingularSetData, Sphere};
pub use reduction::{Block, CongruenceCertificate};
