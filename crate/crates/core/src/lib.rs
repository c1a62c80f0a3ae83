//! Analysis toolkit for multi-setting Bell experiments on polarization-
//! entangled photon pairs: state modeling in the xz Bloch plane, a Bell
//! inequality catalog with exact local bounds, see-saw settings optimization,
//! no-signaling polytope bounds via linear programming, a Poissonian
//! coincidence-count simulator with error propagation, partial tomography,
//! local-content (EPR2) bounds and min-entropy randomness certificates.

pub mod epr2;
pub mod error;
pub mod experiment;
pub mod inequality;
pub mod optimizer;
pub mod polytope;
pub mod qstate;
pub mod randomness;
pub mod simplex;
pub mod tomography;

pub use epr2::{best_local_bound, local_content_bound, werner_chained_value, werner_plmax_curve, LocalContentBound};
pub use error::{Error, Result};
pub use experiment::{
    bell_value_from_counts, correlation_from_counts, marginal_from_counts, measurement_schedule,
    simulate_counts, CountRecord, Estimate, PolarizerPair, SourceConfig,
};
pub use inequality::{
    catalog_references, evaluate, local_bound_bruteforce, noise_tolerance, parse_reference,
    InequalityTable, SettingsVector,
};
pub use optimizer::{optimize_settings, OptimizationResult};
pub use polytope::{
    ns_marginal_bound, ns_marginal_bound_max, ns_max, quantum_marginal_bound_chsh, BehaviorLp,
    Outcome, Party,
};
pub use qstate::{werner_state, Angle, WernerParams, XZState};
pub use randomness::{min_entropy, report, RandomnessReport};
pub use tomography::{estimate_state, tomography_schedule, TomographyResult};
