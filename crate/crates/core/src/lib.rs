//! Finite Markov chains interleaved with deterministic bijections.
//!
//! The crate builds a doubly stochastic kernel `P` on `{0, .., n-1}`, composes it
//! with a permutation `f` into `Q = ΠP` (apply `f`, then take a `P` step) and
//! provides the numerics needed to check how fast `Q` mixes:
//!
//! * [`chain`]: transition matrices, permutations, distributions, builders and
//!   the four standing assumptions on `P`.
//! * [`expansion`]: one-step expansion `E(A)`, the `|E∘f∘E(A)| ≥ (1+ε)|A|`
//!   condition, external boundaries and random-bijection scans.
//! * [`spectral`]: the symmetrized kernel `R = L²(Lᵀ)²` with `L = PΠ`, its second
//!   eigenvalue and Cheeger constant, and the resulting total variation bounds.
//! * [`mixing`]: exact distribution evolution and worst-start TV profiles.
//! * [`fibonacci`]: the second-order walk `X_{k+1} = X_k + X_{k-1} + ε` with its
//!   Fourier bound, the residue window property, and shift-register chains `P_f`.

pub mod chain;
pub mod error;
pub mod expansion;
pub mod fibonacci;
mod graph;
pub mod io;
pub mod mixing;
pub mod rng;
pub mod spectral;
pub mod stateset;

pub use chain::{
    compose, validate, Delta, Distribution, Permutation, PermutationKind, TransitionMatrix,
    ValidationReport,
};
pub use error::{Error, Result};
pub use expansion::{CheckMode, ExpansionReport, ExpansionStrategy};
pub use spectral::SpectralReport;
pub use stateset::StateSet;
