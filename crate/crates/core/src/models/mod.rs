//! Worked models: binomial proportion, population quantile, uniform location and
//! censored quantile regression.

pub mod binomial;
pub mod crq;
pub mod quantile;
pub mod uniform;
