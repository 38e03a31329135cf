//! Increment laws with regularly varying tails, the regime taxonomy, and the
//! normalizing sequences of the limit theorems.

mod model;
mod normal;
mod normalize;

pub use model::{classify_regime, Regime, TailModel};
pub use normal::{normal_cdf, normal_pdf, normal_quantile, normal_sf, normal_upper_quantile, quantile_expansion};
pub use normalize::{a_m_regime3, a_regime4, solve_a_regime1, solve_a_regime2, GaussianNormalizer};
