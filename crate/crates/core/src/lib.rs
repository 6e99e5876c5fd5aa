//! Finite-dimensional matrix subalgebras and their complementarity.
//!
//! The crate covers:
//!
//! - [`matrix`]: dense complex matrices, normalized trace, Hilbert-Schmidt
//!   geometry, Pauli words and `tau(eta(.))`.
//! - [`subalgebra`]: *-subalgebras of `M_n(C)`, conditional expectations,
//!   minimal projections, commutants and the four-way complementarity report.
//! - [`constructions`]: Fourier bases, Weyl systems, the block-unitary
//!   criterion and the CAR model.
//! - [`entropy`]: conditional entropy `H(A|B)` over convex decompositions of the
//!   identity, pruning, the `-log d` bound and a multi-restart maximizer.
//! - [`four_level`]: P-unitaries and triplets in `M_4(C)`, Bell factorization
//!   and the search for complementary decompositions.
//! - [`cli`]: the JSON-emitting command surface used by the `quasiorth` binary.

pub mod cli;
pub mod constructions;
pub mod entropy;
pub mod error;
pub mod four_level;
pub mod matrix;
pub mod subalgebra;

pub use error::{Error, Result};
pub use matrix::{hs_inner, normalized_trace, spectral_eta, tensor, ComplexMatrix, PauliWord, C64, TOL};
pub use subalgebra::{
    complementarity_report, transition_is_hadamard, AlgebraKind, ComplementarityReport, Subalgebra,
};
