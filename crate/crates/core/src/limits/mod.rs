//! The limit objects: Poisson random measures, the extremal processes X1..X4
//! built from them, their generalized inverses, and the eight marginal laws.

mod marginal;
mod measure;
mod path;
mod process;

pub use marginal::{LimitProcess, MarginalLaw};
pub use measure::{prm_intensity, sample_prm, MeasureTag, PointMeasure, Relevance, Truncation, Window, MAX_INTENSITY};
pub use path::{build_extremal_path, build_from_atoms, generalized_inverse, Crossing, ExtremalPath, Floor};
pub use process::{mark_truncation, measure_for, sample_limit_path, x4_past_horizon, LimitConfig, LimitSample};
