//! Large-deviation analysis of finite-state Markov chains by exhaustive
//! counting.
//!
//! The crate provides, end to end:
//!
//! * stationary k-tuple distributions, validation, and chain
//!   reconstruction ([`dist`], [`model`]);
//! * entropy, relative entropy, conditional variants, entropy rates, and
//!   the per-path likelihood statistic ([`information`]);
//! * the cyclic empirical estimators whose integer counts are exactly
//!   stationary, plus the follower-set decomposition ([`empirical`]);
//! * exact enumeration of empirical-measure classes with cardinality
//!   bounds and the Euler-circuit achievability test ([`type_classes`]);
//! * exact finite-length class probabilities with explicit convergence
//!   envelopes around the conditional-relative-entropy rate ([`ldp`]);
//! * the singleton-frequency rate function via two independent solvers
//!   ([`contraction`]);
//! * deterministic file formats ([`io`]).
//!
//! Numeric code is generic over the scalar ([`Scalar`]: `f32` or `f64`)
//! while all counting stays in exact integers. The commonly used `f64`
//! instantiations have aliases at the crate root. Randomized pieces
//! (path sampling, random positive models) run on a seeded ChaCha8 stream
//! and are reproducible bit for bit.
//!
//! ```
//! use markov_ldp::contraction::singleton_rate_variational;
//! use markov_ldp::information::entropy_rate;
//! use markov_ldp::{Dist64, Model64};
//!
//! let mu = Dist64::new(2, 2, vec![0.4, 0.2, 0.2, 0.2])?;
//! let model = Model64::from_distribution(mu)?;
//! assert!(entropy_rate(&model) > 0.0);
//!
//! // rate of observing 20/80 symbol frequencies under this chain
//! let phi = Dist64::new(2, 1, vec![0.2, 0.8])?;
//! let solution = singleton_rate_variational(&phi, &model)?;
//! assert!(solution.value > 0.0);
//! # Ok::<(), markov_ldp::Error>(())
//! ```

pub mod contraction;
pub mod dist;
pub mod empirical;
pub mod error;
pub mod index;
pub mod information;
pub mod io;
pub mod ldp;
pub mod model;
mod numeric;
pub mod scalar;
pub mod type_classes;

pub use dist::{KTupleDistribution, StationaryFlag};
pub use empirical::{EmpiricalMeasure, FollowerSets};
pub use error::{Error, Result};
pub use ldp::EventSet;
pub use model::{MarkovModel, SamplePath};
pub use numeric::KahanSum;
pub use scalar::Scalar;
pub use type_classes::{ScanOptions, TypeCensus};

/// f64 tuple distribution.
pub type Dist64 = KTupleDistribution<f64>;
/// f32 tuple distribution.
pub type Dist32 = KTupleDistribution<f32>;
/// f64 Markov model.
pub type Model64 = MarkovModel<f64>;
/// f32 Markov model.
pub type Model32 = MarkovModel<f32>;
