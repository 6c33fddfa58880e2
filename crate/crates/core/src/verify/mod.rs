//! Frozen-in checks: flow maps and pullbacks, PDE residuals, exact identity
//! suites and convergence studies.

pub mod convergence;
pub mod flowmap;
pub mod history;
pub mod identities;
pub mod residual;
pub mod scenarios;
pub mod wedge;

pub use convergence::{
    check_nested, convergence_study, fit_order, simulate_history, study_histories, ComponentRecord,
    Criterion, OrderFit, ResolutionRecord, StudyOptions, VerificationReport,
};
pub use flowmap::{
    advect_flowmap, advect_flowmap_with, pullback_error, pullback_error_with, FlowMap,
    FlowMapOptions, PullbackError,
};
pub use history::VelocityHistory;
pub use identities::{
    extension_check, extension_violation, form_gap, identity_suite, padding_check, IdentityOptions,
    IdentityRecord, IdentityReport,
};
pub use residual::{
    linearity_discrepancy, residual_form, residual_pde, residual_sweep, ResidualNorms,
    SnapshotResiduals,
};
pub use scenarios::{
    acoustic_frequency, cross_slice_deviation, kinematic_campaign, kinematic_config, mass_drift,
    wedge_campaign, AcousticResult, FrozenRsf4, WedgeCampaign,
};
pub use wedge::{wedge_invariants, WedgePair, WedgeReport, WedgeSnapshot};
