//! Exact finite-field computations for nonplanar tetranomial rational curves
//! on smooth Hermitian surfaces `ᵗx·A·x^(q) = 0` in projective 3-space.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf`]: finite fields GF(p^m), Frobenius, norms, embeddings.
//! * [`matff`]: dense matrices over those fields and the Hermitian
//!   decomposition `A = ᵗB·B^(q)`.
//! * [`tetra`]: tetranomial signatures, exponent matrices, symbolic
//!   containment tests, defining equations and Jacobian ranks.
//! * [`classify`]: brute-force classification of admissible signatures.
//! * [`orbit`]: the symmetric-power action, normal forms, twisted
//!   congruence solving, stabilizers and curve counts.

pub mod classify;
pub mod error;
pub mod gf;
pub mod matff;
pub mod numtheory;
pub mod orbit;
pub mod tetra;

pub use error::{Error, Result};
