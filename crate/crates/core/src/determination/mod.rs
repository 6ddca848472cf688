//! The determination experiment: two PLR functions with equal
//! subdifferentials near `x̄` differ by a constant on `B°(x̄; δ̂)`.

pub mod descent;
pub mod equality;
pub mod harness;
pub mod instance;
pub mod one_sided;

pub use descent::{slope_determination_core, CoreReport, DilationRun, OrbitRun, DEFAULT_DILATIONS};
pub use equality::{verify_subdifferential_equality, EqualityReport, EqualityWitness};
pub use harness::{
    refinement_study, run_determination, DeterminationConfig, DeterminationReport, DirectionSummary, Outcome,
    RefinementReport, RefinementRow, SamplePoint,
};
pub use instance::{builtin_instance, builtin_instances, DeterminationInstance, Expected, FieldSpec, InstanceFile, SMOOTH_POSITIVE};
pub use one_sided::{equality_tolerance, run_one_sided, OneSidedConfig, OneSidedReport};
