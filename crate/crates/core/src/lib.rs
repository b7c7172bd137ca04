//! Sectorial forms, m-sectorial linear relations and monotone convergence of
//! sectorial form sequences, computed on finite-dimensional complex Hilbert
//! spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex linear algebra, subspaces, Loewner order.
//! - [`forms`]: sesquilinear forms on subspaces and their sector verdicts.
//! - [`relations`]: linear relations in `H ⊕ H`, resolvents, domination.
//! - [`association`]: form → relation constructions, closed and j-elliptic.
//! - [`convergence`]: monotone form sequences and strong resolvent limits.
//! - [`semigroups`]: degenerate holomorphic semigroups, spectral and contour.
//! - [`generators`]: the rank-one L₂ example, penalization and random families.
//! - [`selftest`]: the seeded randomized property suite.
//!
//! Sesquilinear convention: `a(u, v)` is linear in `u` and conjugate-linear in
//! `v`; in domain coordinates `a(u, v) = vᴴ·M·u`.

pub mod association;
pub mod convergence;
pub mod error;
pub mod forms;
pub mod generators;
pub mod linalg;
pub mod par;
pub mod random;
pub mod relations;
pub mod selftest;
pub mod semigroups;
pub mod serde_matrix;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, Subspace, Tolerance, C64};
pub use par::Execution;
