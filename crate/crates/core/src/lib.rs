//! Subsampled, randomized ensemble predictors viewed as generalized U-statistics.
//!
//! The crate is organised bottom-up:
//! - [`design`], [`data`], [`rng`]: data model, subsample designs and splittable seeding;
//! - [`learners`]: base learners (kernels);
//! - [`ensemble`]: complete and incomplete generalized U-statistics;
//! - [`variance`]: variance components, the exact H-decomposition, variance ratios, `c(k)`;
//! - [`inference`]: confidence intervals and Berry-Esseen bound evaluators;
//! - [`simlab`]: data generators, experiments and report emission.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod design;
pub mod ensemble;
pub mod error;
pub mod inference;
pub mod learners;
pub mod rng;
pub mod simlab;
pub mod stats;
pub mod variance;

pub use data::{Dataset, Sample};
pub use design::{draw_incomplete_design, enumerate_subsamples, EnsembleConfig, Scheme, SubsampleIndex};
pub use ensemble::{complete_u, generalized_incomplete_u, EnsembleResult};
pub use error::{Error, Result};
pub use inference::{BeInputs, ConfidenceInterval};
pub use learners::{KernelKind, KernelSpec};
pub use rng::{derive_omega, OmegaSeed, SeedPath};
pub use simlab::generators::GeneratorSpec;
pub use variance::{HDecomposition, VarianceComponents};
