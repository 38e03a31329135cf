//! Statistical checks that connect simulated ensembles to the limit laws,
//! with JSON reports.

mod checks;
mod ks;
mod report;

pub use checks::{
    ld_target, limit_process_for, marginal_window, sample_marginal, stratified_sample, verify_atom_mass,
    verify_large_deviation, verify_limit_marginal, verify_prelimit_convergence, verify_stratified_marginal,
    verify_tau_square_exponential, MarginalEnsemble, PrelimitCheck, RunOptions, Statistic, CONFIDENCE,
    DEFAULT_EPS, LD_RELATIVE_TOLERANCE, MAX_CAP_FRACTION, PRELIMIT_THRESHOLD,
};
pub use ks::{dkw_bound, ks_distance, ks_two_sample, ks_two_sample_critical, Cdf, ContinuousCdf, ExponentialCdf, KOLMOGOROV_SD};
pub use report::{VerificationReport, Verdict};
