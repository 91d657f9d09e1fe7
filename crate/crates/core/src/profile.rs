//! Confidence sets for a target sub-parameter by profiling out nuisance components.
//!
//! For theta~ = (eta, xi~), nu(theta~) is the depth level of the forced target statistic
//! T_a at theta~. The profile statistic is the minimum of nu over xi~, and eta is retained
//! when that minimum is at most alpha.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::engine::{Calibrator, ConfidenceSet, EngineConfig, GridSpec};
use crate::error::{check_alpha, ReproError, Result};
use crate::model::{Feasibility, GenerativeModel, NuclearMapping, ParameterPoint};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::par;
use crate::region::{CloudRegion, MonteCarloCloud};
use crate::rng;

/// Split of the continuous components into target and nuisance indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSplit {
    pub target: Vec<usize>,
    pub nuisance: Vec<usize>,
}

impl ParameterSplit {
    pub fn new(target: Vec<usize>, nuisance: Vec<usize>) -> Result<Self> {
        let mut all: Vec<usize> = target.iter().chain(&nuisance).copied().collect();
        all.sort_unstable();
        if target.is_empty() || all.iter().enumerate().any(|(k, v)| k != *v) {
            return Err(ReproError::InvalidInput("target and nuisance indices must partition 0..p".into()));
        }
        Ok(Self { target, nuisance })
    }

    /// Target component k, everything else nuisance.
    pub fn single(k: usize, p: usize) -> Result<Self> {
        Self::new(vec![k], (0..p).filter(|j| *j != k).collect())
    }

    pub fn compose(&self, eta: &[f64], xi: &[f64]) -> ParameterPoint {
        let mut v = vec![0.0; self.target.len() + self.nuisance.len()];
        for (k, x) in self.target.iter().zip(eta) {
            v[*k] = *x;
        }
        for (k, x) in self.nuisance.iter().zip(xi) {
            v[*k] = *x;
        }
        ParameterPoint::continuous(v)
    }
}

/// Selected coordinates of another mapping, e.g. the target block T_a of T.
#[derive(Clone, Debug)]
pub struct Coordinates<T> {
    pub inner: T,
    pub keep: Vec<usize>,
}

impl<M, T> NuclearMapping<M> for Coordinates<T>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M>,
{
    fn dim(&self) -> usize {
        self.keep.len()
    }

    fn eval(&self, model: &M, u: &[f64], theta: &ParameterPoint) -> Result<Vec<f64>> {
        let t = self.inner.eval(model, u, theta)?;
        Ok(self.keep.iter().map(|k| t[*k]).collect())
    }

    fn eval_cloud(&self, model: &M, draws: &[Vec<f64>], theta: &ParameterPoint) -> Result<MonteCarloCloud> {
        let full = self.inner.eval_cloud(model, draws, theta)?;
        let mut points = Vec::with_capacity(full.len() * self.keep.len());
        for s in 0..full.len() {
            let row = full.row(s);
            points.extend(self.keep.iter().map(|k| row[*k]));
        }
        Ok(MonteCarloCloud { dim: self.keep.len(), points })
    }

    fn theta_free(&self) -> bool {
        self.inner.theta_free()
    }

    fn feasibility(&self, model: &M, theta: &ParameterPoint, z_obs: &[f64]) -> Result<Feasibility> {
        Ok(match self.inner.feasibility(model, theta, z_obs)? {
            Feasibility::Forced(t) => Feasibility::Forced(self.keep.iter().map(|k| t[*k]).collect()),
            other => other,
        })
    }
}

/// Where the nuisance value xi~ is searched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NuisanceSpace {
    Finite(Vec<Vec<f64>>),
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub restarts: usize,
    pub evals_per_dim: usize,
    pub tol: f64,
    /// First start; the box centre when absent.
    pub start: Option<Vec<f64>>,
    /// Further starts evaluated before the random restarts.
    pub extra_starts: Vec<Vec<f64>>,
    pub seed: u64,
    /// Stop once nu <= alpha is found (enough to decide retention).
    pub stop_at_alpha: bool,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { restarts: 5, evals_per_dim: 200, tol: 1e-6, start: None, extra_starts: Vec::new(), seed: 0, stop_at_alpha: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// False when some restart ran out of evaluations.
    pub converged: bool,
    pub evals: usize,
}

/// Profiles a target statistic T_a over the nuisance space using one shared V.
pub struct Profiler<'a, M: GenerativeModel + ?Sized, T: NuclearMapping<M>> {
    calibrator: Calibrator<'a, M, T>,
    z_obs: &'a [f64],
    split: ParameterSplit,
}

impl<'a, M, T> Profiler<'a, M, T>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M>,
{
    pub fn new(model: &'a M, target_mapping: &'a T, z_obs: &'a [f64], split: ParameterSplit, engine: &EngineConfig) -> Result<Self> {
        let config = EngineConfig { use_exact_law: false, cloud_region: Some(CloudRegion::Depth), ..engine.clone() };
        Ok(Self { calibrator: Calibrator::new(model, target_mapping, config)?, z_obs, split })
    }

    /// nu(eta, xi~).
    pub fn nu(&self, eta: &[f64], xi: &[f64]) -> Result<f64> {
        self.calibrator.member_level(&self.split.compose(eta, xi), self.z_obs)
    }

    pub fn profile(&self, eta: &[f64], space: &NuisanceSpace, alpha: f64, cfg: &ProfileConfig) -> Result<ProfileResult> {
        check_alpha(alpha)?;
        let stop = cfg.stop_at_alpha.then_some(alpha);
        match space {
            NuisanceSpace::Finite(points) => {
                if points.is_empty() {
                    return Err(ReproError::InvalidInput("empty nuisance set".into()));
                }
                let mut best = ProfileResult { value: f64::INFINITY, argmin: Vec::new(), converged: true, evals: 0 };
                for xi in points {
                    let v = self.nu(eta, xi)?;
                    best.evals += 1;
                    if v < best.value {
                        best.value = v;
                        best.argmin = xi.clone();
                    }
                    if stop.is_some_and(|a| v <= a) {
                        break;
                    }
                }
                Ok(best)
            }
            NuisanceSpace::Box { lo, hi } => self.profile_box(eta, lo, hi, stop, cfg),
        }
    }

    fn profile_box(&self, eta: &[f64], lo: &[f64], hi: &[f64], stop: Option<f64>, cfg: &ProfileConfig) -> Result<ProfileResult> {
        let d = lo.len();
        if d != self.split.nuisance.len() || hi.len() != d || lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
            return Err(ReproError::InvalidInput("nuisance box does not match the split".into()));
        }
        if d == 0 {
            let v = self.nu(eta, &[])?;
            return Ok(ProfileResult { value: v, argmin: Vec::new(), converged: true, evals: 1 });
        }
        let mut starts = vec![cfg.start.clone().unwrap_or_else(|| lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect())];
        starts.extend(cfg.extra_starts.iter().cloned());
        let mut g = rng::stream(cfg.seed, 0);
        for _ in 1..cfg.restarts.max(1) {
            starts.push(lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng::open01(&mut g)).collect());
        }
        let opts = NelderMeadOptions {
            max_evals: cfg.evals_per_dim * d,
            tol: cfg.tol,
            step: lo.iter().zip(hi).map(|(a, b)| 0.1 * (b - a)).collect(),
            stop_below: stop,
        };
        let failure: Mutex<Option<ReproError>> = Mutex::new(None);
        let objective = |xi: &[f64]| match self.nu(eta, xi) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().expect("lock").get_or_insert(e);
                f64::INFINITY
            }
        };
        let mut best = ProfileResult { value: f64::INFINITY, argmin: Vec::new(), converged: true, evals: 0 };
        for s in starts {
            let s: Vec<f64> = s.iter().zip(lo.iter().zip(hi)).map(|(x, (a, b))| x.clamp(*a, *b)).collect();
            let m = nelder_mead(objective, &s, lo, hi, &opts);
            best.evals += m.evals;
            best.converged &= m.converged;
            if m.value < best.value {
                best.value = m.value;
                best.argmin = m.x;
            }
            if let Some(e) = failure.lock().expect("lock").take() {
                return Err(e);
            }
            if stop.is_some_and(|a| best.value <= a) {
                break;
            }
        }
        Ok(best)
    }
}

/// Level of each target grid value and the retained set {eta : profile <= alpha}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub set: ConfidenceSet,
    pub profiles: Vec<ProfileResult>,
}

#[allow(clippy::too_many_arguments)]
pub fn target_confidence_set<M, T>(
    model: &M,
    target_mapping: &T,
    z_obs: &[f64],
    split: ParameterSplit,
    eta_grid: &GridSpec,
    space: &NuisanceSpace,
    alpha: f64,
    engine: &EngineConfig,
    cfg: &ProfileConfig,
) -> Result<TargetSet>
where
    M: GenerativeModel + ?Sized,
    T: NuclearMapping<M>,
{
    let profiler = Profiler::new(model, target_mapping, z_obs, split, engine)?;
    let points = eta_grid.points()?;
    let profiles: Result<Vec<ProfileResult>> =
        par::map_slice(&points, |p| profiler.profile(&p.continuous, space, alpha, cfg)).into_iter().collect();
    let profiles = profiles?;
    let retained = profiles.iter().map(|r| r.value <= alpha).collect();
    Ok(TargetSet { set: ConfidenceSet { alpha, grid: eta_grid.clone(), points, retained }, profiles })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_composes_in_place() {
        let s = ParameterSplit::single(1, 3).unwrap();
        assert_eq!(s.compose(&[9.0], &[1.0, 2.0]).continuous, vec![1.0, 9.0, 2.0]);
        assert!(ParameterSplit::new(vec![0], vec![0, 1]).is_err());
    }
}
