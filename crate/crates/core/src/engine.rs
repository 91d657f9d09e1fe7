//! Grid-search construction of repro-samples confidence sets and p-values.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, ReproError, Result};
use crate::model::{draw_auxiliary_from, feasible_stat, Feasibility, GenerativeModel, NuclearMapping, ParameterPoint};
use crate::par;
use crate::region::{cloud_family, CloudRegion, LevelFamily, MonteCarloCloud, Tail};
use crate::rng;

pub const MIN_V_SIZE: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let a = Self { lo, hi, step };
        a.check()?;
        Ok(a)
    }

    fn check(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step > 0.0 && self.hi >= self.lo) {
            return Err(ReproError::InvalidGrid(format!("{}:{}:{}", self.lo, self.hi, self.step)));
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count()).map(|i| self.value(i)).collect()
    }
}

/// Cartesian grid over discrete values and continuous axes (first component varies slowest).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub discrete: Vec<Vec<i64>>,
    pub continuous: Vec<Axis>,
}

impl GridSpec {
    pub fn line(lo: f64, hi: f64, step: f64) -> Result<Self> {
        Ok(Self { discrete: Vec::new(), continuous: vec![Axis::new(lo, hi, step)?] })
    }

    pub fn discrete_line(values: Vec<i64>) -> Self {
        Self { discrete: vec![values], continuous: Vec::new() }
    }

    pub fn points(&self) -> Result<Vec<ParameterPoint>> {
        for a in &self.continuous {
            a.check()?;
        }
        if self.discrete.iter().any(|d| d.is_empty()) || (self.discrete.is_empty() && self.continuous.is_empty()) {
            return Err(ReproError::InvalidGrid("empty grid".into()));
        }
        let dims: Vec<usize> = self
            .discrete
            .iter()
            .map(|d| d.len())
            .chain(self.continuous.iter().map(|a| a.count()))
            .collect();
        let total: usize = dims.iter().product();
        let nd = self.discrete.len();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..total {
            out.push(ParameterPoint {
                discrete: (0..nd).map(|k| self.discrete[k][idx[k]]).collect(),
                continuous: self.continuous.iter().enumerate().map(|(k, a)| a.value(idx[nd + k])).collect(),
            });
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }

    fn cell_volume(&self) -> f64 {
        self.continuous.iter().map(|a| a.step).product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub v_size: usize,
    pub seed: u64,
    /// Use a mapping's known law when it offers one.
    pub use_exact_law: bool,
    pub tail: Tail,
    /// Overrides the mapping's preferred cloud region.
    pub cloud_region: Option<CloudRegion>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { v_size: 1000, seed: 0, use_exact_law: true, tail: Tail::TwoSided, cloud_region: None }
    }
}

/// Retained grid points of a confidence set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSet {
    pub alpha: f64,
    pub grid: GridSpec,
    pub points: Vec<ParameterPoint>,
    pub retained: Vec<bool>,
}

impl ConfidenceSet {
    pub fn members(&self) -> impl Iterator<Item = &ParameterPoint> {
        self.points.iter().zip(&self.retained).filter(|(_, r)| **r).map(|(p, _)| p)
    }

    pub fn count(&self) -> usize {
        self.retained.iter().filter(|r| **r).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Membership of a grid point; continuous components match within 1e-9.
    pub fn contains(&self, theta: &ParameterPoint) -> bool {
        self.members().any(|p| same_point(p, theta))
    }

    /// Maximal runs of adjacent retained points on a one-dimensional continuous grid.
    pub fn runs(&self) -> Option<Vec<(f64, f64)>> {
        if !(self.grid.discrete.is_empty() && self.grid.continuous.len() == 1) {
            return None;
        }
        let mut runs = Vec::new();
        let mut start: Option<f64> = None;
        let mut last = 0.0;
        for (p, r) in self.points.iter().zip(&self.retained) {
            let x = p.continuous[0];
            if *r {
                if start.is_none() {
                    start = Some(x);
                }
                last = x;
            } else if let Some(s) = start.take() {
                runs.push((s, last));
            }
        }
        if let Some(s) = start {
            runs.push((s, last));
        }
        Some(runs)
    }

    /// Set size: total run length on a 1-d continuous grid, cardinality on a discrete grid,
    /// retained cells times cell volume otherwise.
    pub fn size(&self) -> f64 {
        if let Some(runs) = self.runs() {
            return runs.iter().map(|(a, b)| b - a).sum();
        }
        if self.grid.continuous.is_empty() {
            return self.count() as f64;
        }
        self.count() as f64 * self.grid.cell_volume()
    }

    /// Smallest and largest retained value of continuous component k.
    pub fn hull(&self, k: usize) -> Option<(f64, f64)> {
        let vals: Vec<f64> = self.members().map(|p| p.continuous[k]).collect();
        if vals.is_empty() {
            return None;
        }
        Some((
            vals.iter().cloned().fold(f64::INFINITY, f64::min),
            vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ))
    }

    /// Keep only points that also appear in `candidates`.
    pub fn intersect(&self, candidates: &[ParameterPoint]) -> ConfidenceSet {
        let mut out = self.clone();
        for (p, r) in out.points.iter().zip(out.retained.iter_mut()) {
            if *r && !candidates.iter().any(|c| same_point(c, p)) {
                *r = false;
            }
        }
        out
    }
}

fn same_point(a: &ParameterPoint, b: &ParameterPoint) -> bool {
    a.discrete == b.discrete
        && a.continuous.len() == b.continuous.len()
        && a.continuous.iter().zip(&b.continuous).all(|(x, y)| (x - y).abs() <= 1e-9)
}

/// Computes level families for T at each parameter value, sharing one simulated V.
pub struct Calibrator<'a, M: GenerativeModel + ?Sized, T: NuclearMapping<M> + ?Sized> {
    model: &'a M,
    mapping: &'a T,
    config: EngineConfig,
    draws: OnceLock<Vec<Vec<f64>>>,
    shared: OnceLock<Box<dyn LevelFamily>>,
}

impl<'a, M, T> Calibrator<'a, M, T>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M> + ?Sized,
{
    pub fn new(model: &'a M, mapping: &'a T, config: EngineConfig) -> Result<Self> {
        if config.v_size < MIN_V_SIZE {
            return Err(ReproError::InsufficientSamples { needed: MIN_V_SIZE, got: config.v_size });
        }
        Ok(Self { model, mapping, config, draws: OnceLock::new(), shared: OnceLock::new() })
    }

    /// The auxiliary draws u^1..u^|V|; draw s comes from stream s of the seed.
    pub fn draws(&self) -> &[Vec<f64>] {
        self.draws.get_or_init(|| {
            (0..self.config.v_size)
                .map(|s| draw_auxiliary_from(self.model, &mut rng::stream(self.config.seed, s as u64)).values)
                .collect()
        })
    }

    pub fn cloud(&self, theta: &ParameterPoint) -> Result<MonteCarloCloud> {
        self.mapping.eval_cloud(self.model, self.draws(), theta)
    }

    fn build(&self, theta: &ParameterPoint) -> Result<Box<dyn LevelFamily>> {
        if self.config.use_exact_law {
            if let Some(f) = self.mapping.exact_law(self.model, theta) {
                return f;
            }
        }
        let kind = self.config.cloud_region.unwrap_or_else(|| self.mapping.cloud_region());
        cloud_family(&self.cloud(theta)?, kind, self.config.tail)
    }

    /// Apply `f` to the level family at theta; theta-free mappings build it once.
    pub fn with_family<R>(&self, theta: &ParameterPoint, f: impl FnOnce(&dyn LevelFamily) -> R) -> Result<R> {
        if self.mapping.theta_free() {
            if self.shared.get().is_none() {
                let fam = self.build(theta)?;
                let _ = self.shared.set(fam);
            }
            Ok(f(self.shared.get().expect("initialised").as_ref()))
        } else {
            let fam = self.build(theta)?;
            Ok(f(fam.as_ref()))
        }
    }

    /// Level of theta for observed data; infeasible points get 1.
    pub fn member_level(&self, theta: &ParameterPoint, z_obs: &[f64]) -> Result<f64> {
        match feasible_stat(self.model, self.mapping, theta, z_obs)? {
            Feasibility::Infeasible => Ok(1.0),
            Feasibility::Forced(t) => self.with_family(theta, |fam| fam.level(&t)),
            Feasibility::FreeSearch => Err(free_search()),
        }
    }

    /// Whether theta belongs to the level-alpha set.
    pub fn retains(&self, theta: &ParameterPoint, z_obs: &[f64], alpha: f64) -> Result<bool> {
        match feasible_stat(self.model, self.mapping, theta, z_obs)? {
            Feasibility::Infeasible => Ok(false),
            Feasibility::Forced(t) => self.with_family(theta, |fam| fam.region(alpha).map(|r| r.contains(&t)))?,
            Feasibility::FreeSearch => Err(free_search()),
        }
    }
}

fn free_search() -> ReproError {
    ReproError::Unsupported("the matching family does not force a statistic value".into())
}

fn collect_mask(results: Vec<Result<bool>>) -> Result<Vec<bool>> {
    results.into_iter().collect()
}

/// Level-alpha repro-samples set over a grid.
pub fn algorithm1<M, T>(
    model: &M,
    mapping: &T,
    z_obs: &[f64],
    grid: &GridSpec,
    alpha: f64,
    config: &EngineConfig,
) -> Result<ConfidenceSet>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M> + ?Sized,
{
    check_alpha(alpha)?;
    let cal = Calibrator::new(model, mapping, config.clone())?;
    let points = grid.points()?;
    if mapping.theta_free() {
        // Build the shared family before fanning out.
        cal.with_family(&points[0], |_| ())?;
    }
    let retained = collect_mask(par::map_slice(&points, |theta| cal.retains(theta, z_obs, alpha)))?;
    Ok(ConfidenceSet { alpha, grid: grid.clone(), points, retained })
}

/// Member levels at every grid point.
pub fn member_levels<M, T>(model: &M, mapping: &T, z_obs: &[f64], grid: &GridSpec, config: &EngineConfig) -> Result<Vec<(ParameterPoint, f64)>>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M> + ?Sized,
{
    let cal = Calibrator::new(model, mapping, config.clone())?;
    let points = grid.points()?;
    if mapping.theta_free() {
        cal.with_family(&points[0], |_| ())?;
    }
    let levels: Result<Vec<f64>> = par::map_slice(&points, |theta| cal.member_level(theta, z_obs)).into_iter().collect();
    Ok(points.into_iter().zip(levels?).collect())
}

pub fn member_level<M, T>(model: &M, mapping: &T, z_obs: &[f64], theta: &ParameterPoint, config: &EngineConfig) -> Result<f64>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M> + ?Sized,
{
    Calibrator::new(model, mapping, config.clone())?.member_level(theta, z_obs)
}

/// p-value of H0: theta in `null_points`, equal to 1 - min level over the null.
pub fn pvalue<M, T>(model: &M, mapping: &T, z_obs: &[f64], null_points: &[ParameterPoint], config: &EngineConfig) -> Result<f64>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M> + ?Sized,
{
    if null_points.is_empty() {
        return Err(ReproError::InvalidInput("empty null set".into()));
    }
    let cal = Calibrator::new(model, mapping, config.clone())?;
    let levels: Result<Vec<f64>> = null_points.iter().map(|t| cal.member_level(t, z_obs)).collect();
    let min = levels?.into_iter().fold(1.0, f64::min);
    Ok(1.0 - min)
}

/// Classical inversion {theta : T~(z, theta) in B_alpha(theta)} using a data-based statistic.
pub fn test_statistic_set<M, T>(
    model: &M,
    mapping: &T,
    z_obs: &[f64],
    grid: &GridSpec,
    alpha: f64,
    config: &EngineConfig,
) -> Result<ConfidenceSet>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M> + ?Sized,
{
    check_alpha(alpha)?;
    let cal = Calibrator::new(model, mapping, config.clone())?;
    let points = grid.points()?;
    let retained = collect_mask(par::map_slice(&points, |theta| {
        let t = mapping
            .data_statistic(model, z_obs, theta)
            .ok_or_else(|| ReproError::Unsupported("mapping has no data-based statistic".into()))??;
        cal.with_family(theta, |fam| fam.region(alpha).map(|r| r.contains(&t)))?
    }))?;
    Ok(ConfidenceSet { alpha, grid: grid.clone(), points, retained })
}
