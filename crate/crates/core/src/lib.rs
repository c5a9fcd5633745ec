//! Decision procedures for profinite rigidity of low-dimensional
//! crystallographic groups.
//!
//! Two questions are answered for every arithmetic class in a catalog:
//!
//! * whether point groups of distinct ℤ-classes inside one ℚ-class become
//!   conjugate over the profinite integers (see [`conjugacy`]), and
//! * whether the orbits of the profinite normalizer on H²(G, M) are as
//!   numerous as the space-group types of the class (see [`cohomology`] and
//!   [`normalizer`]).
//!
//! All arithmetic is exact. [`linalg`] provides integer and modular matrices
//! with Smith normal forms, [`groups`] builds finite matrix groups from
//! generators and presentations, [`catalog`] reads the catalog file format
//! and [`pipeline`] strings everything together into per-dimension reports.

pub mod catalog;
pub mod cohomology;
pub mod conjugacy;
pub mod groups;
pub mod linalg;
pub mod normalizer;
pub mod pipeline;

pub use catalog::{Catalog, QClass, ZClassEntry, ZClassId};
pub use cohomology::{CocycleSpace, CohomologyGroup};
pub use conjugacy::{ConjugacyProblem, ConjugacyVerdict};
pub use groups::{PointGroup, Word};
pub use linalg::{IntMatrix, ModMatrix, PrimeSet, SnfResult};
pub use normalizer::{ModGroupGenSet, OrbitReport};
pub use pipeline::{SeparationResult, VerificationResult};
