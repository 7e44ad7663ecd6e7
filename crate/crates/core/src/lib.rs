//! Finite models of orbit rewiring for free group actions.
//!
//! A measure-preserving action of a free group of rank `r` is modeled by `r`
//! permutations of `{0..n-1}` with the uniform measure. The crate provides
//!
//! * reduced words, balls and partition refinements ([`free_group`]);
//! * partition statistics and transport over balls ([`weak_topology`]);
//! * rearrangement of a labeled interval into one line with prescribed
//!   consecutive-label statistics ([`line`]);
//! * rewiring a permutation inside its own cycles toward a target coupling
//!   ([`rewire`]);
//! * the end-to-end construction and an experiment runner ([`pipeline`]).
//!
//! Numeric code is generic over [`Scalar`], implemented for `f32`, `f64` and
//! `Ratio<i64>`/`Ratio<i128>`. Positions and labels are 0-based throughout.

pub mod error;
pub mod free_group;
pub mod io;
pub mod line;
pub mod perm;
pub mod pipeline;
pub mod rewire;
pub mod scalar;
pub mod space;
mod union_find;
pub mod weak_topology;

pub use error::{Error, Result};
pub use free_group::{ball, evaluate, reduce, refine_partition, FiniteAction, GeneratorSet, Letter, ReducedWord};
pub use line::{rearrange_line, rearrange_line_unchecked, LineBijection, RearrangeReport};
pub use perm::Permutation;
pub use pipeline::{good_observable, oe_approximate, target_couplings, verify_oe, PipelineReport};
pub use rewire::{cycle_decomposition, rewire, rewire_with, verify_same_orbits, RewireReport};
pub use scalar::Scalar;
pub use space::{Coupling, Dist, FiniteSpace, Observable, PairCounts};
pub use weak_topology::{kechris_distance, stats_matrix, weak_distance, StatsMatrix, TransportCertificate};

/// Exact rationals used where results must not depend on rounding.
pub type Exact = num_rational::Ratio<i128>;

pub type CouplingF64 = Coupling<f64>;
pub type CouplingExact = Coupling<Exact>;
pub type RearrangeReportF64 = RearrangeReport<f64>;
pub type RewireReportF64 = RewireReport<f64>;
pub type PipelineReportF64 = PipelineReport<f64>;
