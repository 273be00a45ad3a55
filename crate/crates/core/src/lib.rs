//! Nonlocal boxes, maximally incompatible measurements and PR-channels.
//!
//! This crate builds the full chain from abstract state spaces to concrete
//! channel constructions:
//!
//! - [`linalg`] — dense complex matrix kernel (Kronecker products, partial
//!   trace/transpose, Hermitian eigenvalues, tolerance-aware positivity).
//! - [`lp`] — self-contained dense simplex solver used by all polytope
//!   feasibility and optimization queries.
//! - [`gpt`] — polytopic state spaces, effects, two-outcome measurements,
//!   compatibility and degree-of-compatibility programs, witness squares.
//! - [`boxes`] — nonlocal boxes, non-signaling conditions, CHSH, the PR box.
//! - [`composites`] — minimal/maximal tensor products, the canonical PR state
//!   on the square, embeddings and the decomposition of arbitrary PR states.
//! - [`classical`] — classical bit channels, the bipartite classical
//!   PR-channel and its sampling protocol.
//! - [`quantum`] — Choi matrices, testers (process POVMs), non-signaling
//!   bipartite channels and the measure-and-prepare PR-channel.
//! - [`prchannel`] — the complete qubit PR-channel family with its
//!   block structure and entanglement-breaking certification.
//! - [`builtins`] — named registry of the bundled objects (`phi_S`, `phi_C`,
//!   `example6`, ...) used by the CLI and the acceptance tests.

pub mod boxes;
pub mod builtins;
pub mod classical;
pub mod composites;
pub mod error;
pub mod gpt;
pub mod linalg;
pub mod lp;
pub mod prchannel;
pub mod quantum;
pub mod rng;
pub mod tol;

pub use error::{Error, Result};
pub use tol::TolerancePolicy;
