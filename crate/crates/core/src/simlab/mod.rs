//! Data generators, simulation experiments and report emission.

pub mod experiments;
pub mod generators;
mod ks;
mod report;

pub use experiments::{
    run_ck_experiment, run_clt_experiment, run_coverage_experiment, run_ratio_experiment, ExperimentConfig,
};
pub use generators::{BoxResponse, CovariateLaw, GeneratorSpec, ResponseMoments};
pub use ks::{ks_se, ks_to_standard_normal};
pub use report::{emit_report, format_value, ExperimentReport, ReportMetadata, ReportRow, CSV_HEADER};

/// `n` i.i.d. observations from `generator` (pure function of the seed).
pub fn generate(generator: &GeneratorSpec, n: usize, seed: u64) -> crate::Result<crate::Dataset> {
    generator.generate(n, seed)
}
