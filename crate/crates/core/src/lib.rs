//! Generating-function homology for Hamiltonian maps of weighted projective
//! spaces CP(q).
//!
//! The crate computes fixed points and action spectra of S^1-equivariant
//! maps of C^{d+1}, quadratic generating functions of tuples of small
//! factors, Z-periodic persistence barcodes of their sublevel sets over Q and
//! F_p, and the spectral invariants c_k, and checks the identities and
//! inequalities these objects satisfy.

pub mod catalog;
pub mod engine;
pub mod equivariant;
pub mod error;
pub mod flow;
pub mod index;
pub mod linalg;
pub mod persistence;
pub mod report;
pub mod scene;
pub mod spectrum;
pub mod svg;
pub mod weights;

pub use error::{GfhError, Result};

/// Deterministic generator used for all randomized probes.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
