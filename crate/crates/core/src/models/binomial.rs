//! Binomial count Y = sum 1(U_i <= theta), U_i ~ U(0, 1).

use statrs::distribution::{Binomial, Discrete};

use crate::engine::{Axis, ConfidenceSet, GridSpec};
use crate::error::{check_alpha, ReproError, Result};
use crate::model::{AuxDistribution, Feasibility, GenerativeModel, NuclearMapping, ParameterPoint, ParameterSchema};
use crate::region::{shortest_discrete_region, CloudRegion, DiscretePmf, LevelFamily};

pub fn binomial_pmf(r: usize, p: f64) -> Vec<f64> {
    let b = Binomial::new(p, r as u64).expect("p in [0, 1]");
    (0..=r as u64).map(|k| b.pmf(k)).collect()
}

/// Shortest acceptance interval (a_L, a_U) of Binomial(r, p) at level alpha.
pub fn binomial_bounds(r: usize, p: f64, alpha: f64) -> Result<(usize, usize)> {
    shortest_discrete_region(&binomial_pmf(r, p), alpha)
}

#[derive(Clone, Debug)]
pub struct BinomialModel {
    r: usize,
    schema: ParameterSchema,
}

impl BinomialModel {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(ReproError::InvalidInput("number of trials must be positive".into()));
        }
        Ok(Self { r, schema: ParameterSchema::open_box(&["theta"], 0.0, 1.0) })
    }

    pub fn trials(&self) -> usize {
        self.r
    }
}

impl GenerativeModel for BinomialModel {
    fn schema(&self) -> &ParameterSchema {
        &self.schema
    }

    fn data_len(&self) -> usize {
        1
    }

    fn aux_len(&self) -> usize {
        self.r
    }

    fn aux_distribution(&self) -> AuxDistribution {
        AuxDistribution::Uniform01
    }

    fn is_explicit(&self) -> bool {
        true
    }

    fn generate_raw(&self, theta: &ParameterPoint, u: &[f64]) -> Result<Vec<f64>> {
        let p = theta.continuous[0];
        Ok(vec![u.iter().filter(|x| **x <= p).count() as f64])
    }
}

/// T(u, theta) = number of u_i at or below theta.
#[derive(Clone, Copy, Debug, Default)]
pub struct SuccessCount;

impl NuclearMapping<BinomialModel> for SuccessCount {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, model: &BinomialModel, u: &[f64], theta: &ParameterPoint) -> Result<Vec<f64>> {
        model.generate_raw(theta, u)
    }

    fn feasibility(&self, model: &BinomialModel, _theta: &ParameterPoint, z_obs: &[f64]) -> Result<Feasibility> {
        let y = z_obs[0];
        if y.fract() == 0.0 && y >= 0.0 && y <= model.r as f64 {
            Ok(Feasibility::Forced(vec![y]))
        } else {
            Ok(Feasibility::Infeasible)
        }
    }

    fn exact_law(&self, model: &BinomialModel, theta: &ParameterPoint) -> Option<Result<Box<dyn LevelFamily>>> {
        Some(DiscretePmf::new(binomial_pmf(model.r, theta.continuous[0]), 0).map(|f| Box::new(f) as Box<dyn LevelFamily>))
    }

    fn cloud_region(&self) -> CloudRegion {
        CloudRegion::ShortestDiscrete
    }
}

/// Acceptance bounds of every grid value, reusable across observations.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    pub r: usize,
    pub alpha: f64,
    pub axis: Axis,
    pub bounds: Vec<(usize, usize)>,
}

impl BinomialTable {
    pub fn new(r: usize, alpha: f64, axis: Axis) -> Result<Self> {
        check_alpha(alpha)?;
        if !(axis.lo > 0.0 && axis.value(axis.count() - 1) < 1.0) {
            return Err(ReproError::InvalidGrid("binomial grid must lie inside (0, 1)".into()));
        }
        let bounds = axis.values().into_iter().map(|p| binomial_bounds(r, p, alpha)).collect::<Result<Vec<_>>>()?;
        Ok(Self { r, alpha, axis, bounds })
    }

    /// {theta on the grid : a_L(theta) <= y <= a_U(theta)}.
    pub fn set(&self, y: usize) -> ConfidenceSet {
        let grid = GridSpec { discrete: Vec::new(), continuous: vec![self.axis] };
        let points = self.axis.values().into_iter().map(ParameterPoint::scalar).collect();
        let retained = self.bounds.iter().map(|(lo, hi)| *lo <= y && y <= *hi).collect();
        ConfidenceSet { alpha: self.alpha, grid, points, retained }
    }
}

/// Closed-form binomial set on a grid over (0, 1).
pub fn binomial_set(y: usize, r: usize, alpha: f64, axis: Axis) -> Result<ConfidenceSet> {
    if y > r {
        return Err(ReproError::InvalidInput(format!("count {y} exceeds trials {r}")));
    }
    Ok(BinomialTable::new(r, alpha, axis)?.set(y))
}
