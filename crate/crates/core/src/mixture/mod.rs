//! Confidence sets for the number of components of a univariate normal mixture.
//!
//! Data follow Y = M mu + diag(M sigma) U with U standard normal and M a hard membership.
//! Given M, the per-cluster means A and root residual sums of squares B are sufficient and
//! the within-cluster directions C are ancillary, so the law of any statistic given (A, B)
//! can be simulated without the unknown (mu, sigma).

pub mod confidence;
pub mod fit;
pub mod mbic;
pub mod membership;
pub mod simulate;
pub mod suff;

pub use confidence::{f_s, tau_confidence_set, TauSetConfig, TauSetReport};
pub use fit::{tau_hat, tau_hat_value, MixtureFit, TauHat, TauHatConfig, MIN_COMPONENT_SIZE};
pub use mbic::{candidate_set_mixture, mbic_objective, modified_bic_exhaustive, modified_bic_map, Candidate, MbicConfig, MbicFit};
pub use membership::Membership;
pub use simulate::{MixtureModel, MixtureParams, MixtureSample};
pub use suff::{conditional_from_normals, conditional_sample, suff_stats, SuffStats};
