//! Poisson numerics, total variation, and the Chen–Stein estimators.

pub mod chen_stein;
pub mod distribution;
pub mod gamma;
pub mod poisson;
pub mod process;
pub mod tv;
pub mod wilson;

pub use chen_stein::{
    estimate_chen_stein, reconcile, reconcile_mu_nu, synthetic_agg_check, AggCheck,
    ChenSteinAccumulator, ChenSteinReport, Reconciliation, TrialObservation,
    DEFAULT_JOINT_SAMPLE_PAIRS,
};
pub use distribution::CountDistribution;
pub use gamma::{compute_gamma_and_dependencies, dependency_count, DependencySizes};
pub use poisson::{poisson_pmf, poisson_set_mass};
pub use process::{process_marginal_comparison, PairKind, ProcessAccumulator, ProcessReport};
pub use tv::{total_variation, tv_poisson_poisson, tv_to_poisson};
pub use wilson::{wilson_interval, Proportion, Z95};
