//! Constructive harmonic analysis on finite abelian groups.
//!
//! The centerpiece is `decompose`: writing an integer-valued function of
//! small algebra norm as a signed sum of coset indicators, with every
//! intermediate construction (Bohr/Bourgain systems, smoothing measures,
//! spectral refinement, weak Freiman structure) exposed as an
//! independently testable operation that emits a checkable certificate.

pub mod bourgain;
pub mod config;
pub mod corpus;
pub mod decompose;
pub mod freiman;
pub mod group;
pub mod io;
pub mod lca;
pub mod refine;
pub mod spectral;

pub use group::{Domain, FiniteAbelianGroup, Group, GroupError, GroupFunction, Subgroup};
