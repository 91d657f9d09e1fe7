//! Population quantile through the implicit equation sum 1(y_i <= theta) = sum u_i, u_i ~ Bernoulli(zeta).

use crate::error::{check_alpha, ReproError, Result};
use crate::model::{AuxDistribution, Feasibility, GenerativeModel, NuclearMapping, ParameterPoint, ParameterSchema};
use crate::models::binomial::{binomial_bounds, binomial_pmf};
use crate::region::{CloudRegion, DiscretePmf, LevelFamily};

/// Sorted sample with y_(0) and y_(n+1) set to the support bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedSample {
    sorted: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl OrderedSample {
    pub fn new(y: &[f64], support: (f64, f64)) -> Result<Self> {
        if y.is_empty() {
            return Err(ReproError::InvalidInput("empty sample".into()));
        }
        if y.iter().any(|v| v.is_nan()) {
            return Err(ReproError::InvalidInput("NaN in sample".into()));
        }
        let mut sorted = y.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { sorted, lower: support.0, upper: support.1 })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Order statistic y_(k) for k = 0..=n+1.
    pub fn get(&self, k: usize) -> f64 {
        if k == 0 {
            self.lower
        } else if k > self.sorted.len() {
            self.upper
        } else {
            self.sorted[k - 1]
        }
    }

    /// Number of observations at or below x.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|v| *v <= x)
    }
}

#[derive(Clone, Debug)]
pub struct QuantileModel {
    n: usize,
    zeta: f64,
    schema: ParameterSchema,
}

impl QuantileModel {
    pub fn new(n: usize, zeta: f64) -> Result<Self> {
        if n == 0 {
            return Err(ReproError::InvalidInput("sample size must be positive".into()));
        }
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(ReproError::InvalidInput(format!("quantile level {zeta} outside (0, 1)")));
        }
        Ok(Self { n, zeta, schema: ParameterSchema::real_line(&["theta"]) })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

impl GenerativeModel for QuantileModel {
    fn schema(&self) -> &ParameterSchema {
        &self.schema
    }

    fn data_len(&self) -> usize {
        self.n
    }

    fn aux_len(&self) -> usize {
        self.n
    }

    fn aux_distribution(&self) -> AuxDistribution {
        AuxDistribution::Bernoulli(self.zeta)
    }

    fn is_explicit(&self) -> bool {
        false
    }

    fn residual_raw(&self, z: &[f64], theta: &ParameterPoint, u: &[f64]) -> Result<Vec<f64>> {
        let t = theta.continuous[0];
        let below = z.iter().filter(|y| **y <= t).count() as f64;
        Ok(vec![below - u.iter().sum::<f64>()])
    }
}

/// T(u) = sum u_i, whose law Binomial(n, zeta) is free of theta.
#[derive(Clone, Copy, Debug, Default)]
pub struct BernoulliSum;

impl NuclearMapping<QuantileModel> for BernoulliSum {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, _model: &QuantileModel, u: &[f64], _theta: &ParameterPoint) -> Result<Vec<f64>> {
        Ok(vec![u.iter().sum()])
    }

    fn theta_free(&self) -> bool {
        true
    }

    fn feasibility(&self, _model: &QuantileModel, theta: &ParameterPoint, z_obs: &[f64]) -> Result<Feasibility> {
        let t = theta.continuous[0];
        Ok(Feasibility::Forced(vec![z_obs.iter().filter(|y| **y <= t).count() as f64]))
    }

    fn exact_law(&self, model: &QuantileModel, _theta: &ParameterPoint) -> Option<Result<Box<dyn LevelFamily>>> {
        Some(DiscretePmf::new(binomial_pmf(model.n, model.zeta), 0).map(|f| Box::new(f) as Box<dyn LevelFamily>))
    }

    fn cloud_region(&self) -> CloudRegion {
        CloudRegion::ShortestDiscrete
    }
}

/// Half-open interval [lo, hi) for the zeta-quantile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantileInterval {
    pub lo: f64,
    pub hi: f64,
    pub a_l: usize,
    pub a_u: usize,
}

impl QuantileInterval {
    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lo && theta < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// [y_(a_L), y_(a_U + 1)) with (a_L, a_U) the shortest Binomial(n, zeta) acceptance interval.
pub fn quantile_set(y: &[f64], zeta: f64, alpha: f64, support: (f64, f64)) -> Result<QuantileInterval> {
    check_alpha(alpha)?;
    QuantileModel::new(y.len(), zeta)?;
    let sample = OrderedSample::new(y, support)?;
    let (a_l, a_u) = binomial_bounds(sample.len(), zeta, alpha)?;
    Ok(QuantileInterval { lo: sample.get(a_l), hi: sample.get(a_u + 1), a_l, a_u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{residual, AuxiliaryDraw};

    #[test]
    fn residual_counts_observations_below() {
        let m = QuantileModel::new(3, 0.5).unwrap();
        let u = AuxiliaryDraw { dist: AuxDistribution::Bernoulli(0.5), values: vec![1.0, 0.0, 1.0] };
        let r = residual(&m, &[1.0, 2.0, 3.0], &ParameterPoint::scalar(2.5), &u).unwrap();
        assert_eq!(r, vec![0.0]);
    }

    #[test]
    fn order_statistics_use_support_bounds() {
        let s = OrderedSample::new(&[3.0, 1.0, 2.0], (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        assert_eq!(s.get(0), f64::NEG_INFINITY);
        assert_eq!(s.get(1), 1.0);
        assert_eq!(s.get(4), f64::INFINITY);
    }

    #[test]
    fn interval_uses_shortest_bounds() {
        let y: Vec<f64> = (1..=20).map(f64::from).collect();
        let iv = quantile_set(&y, 0.5, 0.95, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        assert_eq!((iv.a_l, iv.a_u), (6, 14));
        assert_eq!((iv.lo, iv.hi), (6.0, 15.0));
    }
}
