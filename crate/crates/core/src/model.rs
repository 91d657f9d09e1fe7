//! Parameters, auxiliary draws, generative models and nuclear mappings.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ReproError, Result};
use crate::region::{CloudRegion, LevelFamily, MonteCarloCloud};
use crate::rng;

/// A point in a mixed discrete/continuous parameter space.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub discrete: Vec<i64>,
    pub continuous: Vec<f64>,
}

impl ParameterPoint {
    pub fn continuous(values: Vec<f64>) -> Self {
        Self { discrete: Vec::new(), continuous: values }
    }

    pub fn scalar(value: f64) -> Self {
        Self::continuous(vec![value])
    }

    pub fn discrete(values: Vec<i64>) -> Self {
        Self { discrete: values, continuous: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteComponent {
    pub label: String,
    pub min: i64,
    pub max: i64,
}

/// A continuous component living in the open interval (lo, hi); bounds may be infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousComponent {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchema {
    pub discrete: Vec<DiscreteComponent>,
    pub continuous: Vec<ContinuousComponent>,
}

impl ParameterSchema {
    pub fn real_line(labels: &[&str]) -> Self {
        Self::open_box(labels, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn open_box(labels: &[&str], lo: f64, hi: f64) -> Self {
        Self {
            discrete: Vec::new(),
            continuous: labels
                .iter()
                .map(|l| ContinuousComponent { label: (*l).to_string(), lo, hi })
                .collect(),
        }
    }

    pub fn validate(&self, theta: &ParameterPoint) -> Result<()> {
        if theta.discrete.len() != self.discrete.len() || theta.continuous.len() != self.continuous.len() {
            return Err(ReproError::InvalidParameter(format!(
                "expected {} discrete and {} continuous components, got {} and {}",
                self.discrete.len(),
                self.continuous.len(),
                theta.discrete.len(),
                theta.continuous.len()
            )));
        }
        for (c, v) in self.discrete.iter().zip(&theta.discrete) {
            if *v < c.min || *v > c.max {
                return Err(ReproError::InvalidParameter(format!("{} = {} outside [{}, {}]", c.label, v, c.min, c.max)));
            }
        }
        for (c, v) in self.continuous.iter().zip(&theta.continuous) {
            let inside = if c.lo.is_infinite() && c.hi.is_infinite() {
                v.is_finite()
            } else {
                *v > c.lo && *v < c.hi
            };
            if !inside {
                return Err(ReproError::InvalidParameter(format!("{} = {} outside ({}, {})", c.label, v, c.lo, c.hi)));
            }
        }
        Ok(())
    }
}

/// Distribution of each coordinate of the auxiliary vector (all coordinates iid).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AuxDistribution {
    StandardNormal,
    Uniform01,
    /// Uniform on (-1, 1).
    UniformSymmetric,
    Bernoulli(f64),
}

impl AuxDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            AuxDistribution::StandardNormal => rng.sample(StandardNormal),
            AuxDistribution::Uniform01 => rng::open01(rng),
            AuxDistribution::UniformSymmetric => 2.0 * rng::open01(rng) - 1.0,
            AuxDistribution::Bernoulli(p) => {
                if rng::open01(rng) < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn supports(&self, x: f64) -> bool {
        match *self {
            AuxDistribution::StandardNormal => x.is_finite(),
            AuxDistribution::Uniform01 => x > 0.0 && x < 1.0,
            AuxDistribution::UniformSymmetric => x > -1.0 && x < 1.0,
            AuxDistribution::Bernoulli(_) => x == 0.0 || x == 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryDraw {
    pub dist: AuxDistribution,
    pub values: Vec<f64>,
}

/// Result of matching observed data at a parameter value.
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// No auxiliary draw reproduces the data at this parameter.
    Infeasible,
    /// Every matching draw yields this statistic value.
    Forced(Vec<f64>),
    /// The statistic varies over the matching family; needs a search.
    FreeSearch,
}

/// A model Z = G(theta, U), or implicitly g(Z, theta, U) = 0.
pub trait GenerativeModel: Sync {
    fn schema(&self) -> &ParameterSchema;
    fn data_len(&self) -> usize;
    fn aux_len(&self) -> usize;
    fn aux_distribution(&self) -> AuxDistribution;
    fn is_explicit(&self) -> bool;

    /// G(theta, u) without validation. Implicit models keep the default.
    fn generate_raw(&self, _theta: &ParameterPoint, _u: &[f64]) -> Result<Vec<f64>> {
        Err(ReproError::ImplicitModel)
    }

    /// g(z, theta, u) without validation. Explicit models default to z - G(theta, u).
    fn residual_raw(&self, z: &[f64], theta: &ParameterPoint, u: &[f64]) -> Result<Vec<f64>> {
        let g = self.generate_raw(theta, u)?;
        Ok(z.iter().zip(&g).map(|(a, b)| a - b).collect())
    }
}

/// A statistic T(U, theta) whose law calibrates the Borel region.
pub trait NuclearMapping<M: GenerativeModel + ?Sized>: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, model: &M, u: &[f64], theta: &ParameterPoint) -> Result<Vec<f64>>;

    /// T at every draw; mappings with shared per-theta work override this.
    fn eval_cloud(&self, model: &M, draws: &[Vec<f64>], theta: &ParameterPoint) -> Result<MonteCarloCloud> {
        let mut points = Vec::with_capacity(draws.len() * self.dim());
        for u in draws {
            points.extend(self.eval(model, u, theta)?);
        }
        Ok(MonteCarloCloud { dim: self.dim(), points })
    }

    /// True when T(U, theta) does not depend on theta, so one region serves the whole grid.
    fn theta_free(&self) -> bool {
        false
    }

    /// Statistic value forced by matching the observed data at theta.
    fn feasibility(&self, _model: &M, _theta: &ParameterPoint, _z_obs: &[f64]) -> Result<Feasibility> {
        Ok(Feasibility::FreeSearch)
    }

    /// Data-based test statistic T~(z, theta), when one exists.
    fn data_statistic(&self, _model: &M, _z: &[f64], _theta: &ParameterPoint) -> Option<Result<Vec<f64>>> {
        None
    }

    /// A known law of T at theta, used instead of a Monte Carlo cloud.
    fn exact_law(&self, _model: &M, _theta: &ParameterPoint) -> Option<Result<Box<dyn LevelFamily>>> {
        None
    }

    /// Region family used when calibrating from a Monte Carlo cloud.
    fn cloud_region(&self) -> CloudRegion {
        if self.dim() == 1 {
            CloudRegion::EqualTail
        } else {
            CloudRegion::Depth
        }
    }
}

pub fn draw_auxiliary<M: GenerativeModel + ?Sized>(model: &M, seed: u64) -> AuxiliaryDraw {
    draw_auxiliary_from(model, &mut rng::stream(seed, 0))
}

pub fn draw_auxiliary_from<M: GenerativeModel + ?Sized, R: Rng + ?Sized>(model: &M, rng: &mut R) -> AuxiliaryDraw {
    let dist = model.aux_distribution();
    AuxiliaryDraw { dist, values: (0..model.aux_len()).map(|_| dist.sample(rng)).collect() }
}

fn check_aux<M: GenerativeModel + ?Sized>(model: &M, u: &AuxiliaryDraw) -> Result<()> {
    if u.dist != model.aux_distribution() {
        return Err(ReproError::InvalidAuxiliary(format!("expected {:?}, got {:?}", model.aux_distribution(), u.dist)));
    }
    if u.values.len() != model.aux_len() {
        return Err(ReproError::InvalidAuxiliary(format!("expected length {}, got {}", model.aux_len(), u.values.len())));
    }
    Ok(())
}

pub fn generate<M: GenerativeModel + ?Sized>(model: &M, theta: &ParameterPoint, u: &AuxiliaryDraw) -> Result<Vec<f64>> {
    if !model.is_explicit() {
        return Err(ReproError::ImplicitModel);
    }
    model.schema().validate(theta)?;
    check_aux(model, u)?;
    model.generate_raw(theta, &u.values)
}

pub fn residual<M: GenerativeModel + ?Sized>(model: &M, z: &[f64], theta: &ParameterPoint, u: &AuxiliaryDraw) -> Result<Vec<f64>> {
    model.schema().validate(theta)?;
    check_aux(model, u)?;
    if z.len() != model.data_len() {
        return Err(ReproError::InvalidInput(format!("data length {} != {}", z.len(), model.data_len())));
    }
    model.residual_raw(z, theta, &u.values)
}

pub fn feasible_stat<M, T>(model: &M, mapping: &T, theta: &ParameterPoint, z_obs: &[f64]) -> Result<Feasibility>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M> + ?Sized,
{
    model.schema().validate(theta)?;
    if z_obs.len() != model.data_len() {
        return Err(ReproError::InvalidInput(format!("data length {} != {}", z_obs.len(), model.data_len())));
    }
    mapping.feasibility(model, theta, z_obs)
}
