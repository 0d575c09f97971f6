//! Finite-scale numerics for self-similar systems: dyadic-lattice measures
//! and their multiscale entropies, similarity-group arithmetic and
//! partitions, subspace calculus, concentration/saturation predicates,
//! inverse-theorem verdicts, IFS composition analysis, and parametrized
//! family scans.
//!
//! Everything is deterministic: reductions run in sorted key order, searches
//! break ties lexicographically, and parallel paths merge in fixed order, so
//! outputs are identical across thread counts.

pub mod config;
pub mod delta;
pub mod error;
pub mod family;
pub mod ifs;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod named;
pub mod rational;
pub mod satcon;
pub mod similitude;
pub mod simmeasure;
pub mod subspace;
pub mod verdict;

pub use config::Config;
pub use error::{FelError, Result};
pub use ifs::IFSSystem;
pub use measure::{CovSummary, LatticeMeasure};
pub use similitude::Similitude;
pub use simmeasure::SimMeasure;
pub use subspace::Subspace;
pub use verdict::{inverse_verdict, isometry_verdict, IsometryVerdict, Verdict};
