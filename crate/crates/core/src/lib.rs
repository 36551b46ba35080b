//! Explicit mixed-unitary decompositions of `p·Φ + (1-p)·Ω`.
//!
//! For any doubly stochastic channel `Φ` on `C^d` and `0 <= p <= 1/(d²-1)`,
//! the channel `p·Φ + (1-p)·Ω` (with `Ω` completely depolarizing) is a
//! convex combination of unitary conjugations. This crate builds such
//! combinations explicitly:
//!
//! - [`decomposer::decompose_exact`] weights each element `U` of a verified
//!   unitary 2-design by `vec(U)* J(Φ) vec(U)`, which reproduces
//!   `((d²-2)Ω + Φ)/(d²-1)` exactly.
//! - [`decomposer::monte_carlo_decompose`] does the same with Haar samples.
//! - [`decomposer::caratheodory_prune`] shrinks any ensemble to at most
//!   `d⁴ - 2d² + 2` terms.
//! - [`corpus::ball_decompose`] decomposes channels close enough to `Ω`
//!   directly.
//!
//! Channels are represented by their Choi matrices
//! `J(Φ) = Σ Φ(|i><j|) ⊗ |i><j|` ([`channels::ChoiMatrix`]).

pub mod channels;
pub mod corpus;
pub mod decomposer;
pub mod designs;
pub mod error;
pub mod format;
pub mod linalg;
pub mod moments;
pub mod tolerance;

pub use channels::{ChoiMatrix, KrausSet, UnitaryEnsemble, ValidityReport};

pub use decomposer::{DecompositionMode, DecompositionReport};
pub use designs::UnitaryDesign;
pub use error::{Error, Result};
pub use linalg::{CMatrix, RandomSource, C64};
