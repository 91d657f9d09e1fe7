//! Seeded coverage studies: simulate from the truth, build the set, record coverage and size.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rand_distr::{Cauchy, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use repro_core::engine::{algorithm1, member_level, Axis, EngineConfig, GridSpec};
use repro_core::mixture::{candidate_set_mixture, tau_confidence_set, MbicConfig, MixtureParams, TauHatConfig, TauSetConfig};
use repro_core::model::ParameterPoint;
use repro_core::models::binomial::{binomial_bounds, BinomialTable};
use repro_core::models::crq::{crq_design, crq_grid, pilot_fit, simulate_crq, CrqMapping, CrqModel, ErrorLaw};
use repro_core::models::quantile::quantile_set;
use repro_core::models::uniform::{order_stat_set, uniform_irwin_hall_set};
use repro_core::profile::{target_confidence_set, Coordinates, NuisanceSpace, ParameterSplit, ProfileConfig, Profiler};
use repro_core::rng::{self, child_seed};
use repro_core::stats::{mean, standard_error};

use crate::config::{ExperimentConfig, ModelId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub rep: usize,
    pub covered: u8,
    pub size: f64,
    pub runtime_ms: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: ModelId,
    pub alpha: f64,
    pub reps: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_size: f64,
    pub size_se: f64,
}

#[derive(Clone, Debug)]
pub struct CoverageRun {
    pub records: Vec<ExperimentRecord>,
    pub summary: Summary,
}

/// Coverage and size summary; standard errors are sd / sqrt(reps).
pub fn summarize(model: ModelId, alpha: f64, records: &[ExperimentRecord]) -> Summary {
    let covered: Vec<f64> = records.iter().map(|r| f64::from(r.covered)).collect();
    let sizes: Vec<f64> = records.iter().map(|r| r.size).collect();
    Summary {
        model,
        alpha,
        reps: records.len(),
        coverage: mean(&covered),
        coverage_se: standard_error(&covered),
        mean_size: mean(&sizes),
        size_se: standard_error(&sizes),
    }
}

/// Default binomial grid: 0.001 to 0.999 by 0.001.
pub fn binomial_axis() -> Axis {
    Axis { lo: 0.001, hi: 0.999, step: 0.001 }
}

/// Shared per-study state built once before the replications.
enum Setup {
    Binomial { table: BinomialTable, theta: f64 },
    Mixture(MixtureParams),
    Other,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    Ok(match cfg.model {
        ModelId::Binomial => {
            let axis = cfg.grid.map_or_else(binomial_axis, |g| g.0);
            Setup::Binomial { table: BinomialTable::new(cfg.trials, cfg.alpha, axis)?, theta: cfg.truth()[0] }
        }
        ModelId::Mixture | ModelId::MixtureCandidates => Setup::Mixture(cfg.mixture_truth()?),
        _ => Setup::Other,
    })
}

fn engine(cfg: &ExperimentConfig, seed: u64) -> EngineConfig {
    EngineConfig { v_size: cfg.v_size, seed, ..Default::default() }
}

pub fn tau_set_config(cfg: &ExperimentConfig, seed: u64) -> TauSetConfig {
    TauSetConfig {
        alpha: cfg.alpha,
        v_size: cfg.v_size,
        vc_size: cfg.vc_size,
        fit: TauHatConfig { tau_max: cfg.tau_max, ..Default::default() },
        mbic: MbicConfig { lambda: cfg.lambda, tau_max: cfg.tau_max, ..Default::default() },
        seed,
        exhaustive: false,
        only: None,
    }
}

/// Profile search settings for one crq coefficient around a pilot fit.
pub fn crq_profile_setup(pilot: &repro_core::models::crq::PilotFit, k: usize, seed: u64) -> (NuisanceSpace, ProfileConfig) {
    let others: Vec<usize> = (0..pilot.theta.len()).filter(|j| *j != k).collect();
    let lo = others.iter().map(|j| pilot.theta[*j] - 4.0 * pilot.se[*j]).collect();
    let hi = others.iter().map(|j| pilot.theta[*j] + 4.0 * pilot.se[*j]).collect();
    let start = others.iter().map(|j| pilot.theta[*j]).collect();
    let pc = ProfileConfig { start: Some(start), restarts: 2, seed, stop_at_alpha: true, ..Default::default() };
    (NuisanceSpace::Box { lo, hi }, pc)
}

/// Coverage indicator and set size for one replication.
fn replicate(cfg: &ExperimentConfig, setup: &Setup, seed: u64) -> Result<(bool, f64)> {
    let mut g = rng::stream(seed, 0);
    let eseed = child_seed(seed, 1);
    let truth = cfg.truth();
    let n = cfg.sample_size();
    match (cfg.model, setup) {
        (ModelId::Binomial, Setup::Binomial { table, theta }) => {
            let y = (0..cfg.trials).filter(|_| rng::open01(&mut g) <= *theta).count();
            let (lo, hi) = binomial_bounds(cfg.trials, *theta, cfg.alpha)?;
            Ok((lo <= y && y <= hi, table.set(y).size()))
        }
        (ModelId::Quantile, _) => {
            let c = Cauchy::new(truth[0], 1.0)?;
            let y: Vec<f64> = (0..n).map(|_| c.sample(&mut g)).collect();
            let target = truth[0] + (std::f64::consts::PI * (cfg.zeta - 0.5)).tan();
            let iv = quantile_set(&y, cfg.zeta, cfg.alpha, (f64::NEG_INFINITY, f64::INFINITY))?;
            Ok((iv.contains(target), iv.width()))
        }
        (ModelId::Uniform | ModelId::UniformOrderstat, _) => {
            let y: Vec<f64> = (0..n).map(|_| truth[0] + 2.0 * rng::open01(&mut g) - 1.0).collect();
            let iv = if cfg.model == ModelId::Uniform { uniform_irwin_hall_set(&y, cfg.alpha)?.repro } else { order_stat_set(&y, cfg.alpha)? };
            Ok((iv.contains(truth[0]), if iv.is_empty() { 0.0 } else { iv.len() }))
        }
        (ModelId::Crq, _) => {
            let x = crq_design(n, &mut g);
            let y = simulate_crq(&x, &truth, ErrorLaw::Normal, &mut g);
            let theta0 = ErrorLaw::Normal.true_coefficients(&truth, cfg.zeta);
            let model = CrqModel::new(x, cfg.zeta)?;
            let mapping = CrqMapping::for_model(&model);
            let ec = engine(cfg, eseed);
            let covered = member_level(&model, &mapping, &y, &ParameterPoint::continuous(theta0), &ec)? <= cfg.alpha;
            let grid = crq_grid(&pilot_fit(&model, &y)?, 3.0, cfg.grid_points)?;
            Ok((covered, algorithm1(&model, &mapping, &y, &grid, cfg.alpha, &ec)?.size()))
        }
        (ModelId::CrqCoef, _) => {
            let x = crq_design(n, &mut g);
            let y = simulate_crq(&x, &truth, ErrorLaw::Normal, &mut g);
            let theta0 = ErrorLaw::Normal.true_coefficients(&truth, cfg.zeta);
            let k = cfg.coefficient.unwrap_or(theta0.len() - 1);
            let model = CrqModel::new(x, cfg.zeta)?;
            let target = Coordinates { inner: CrqMapping::for_model(&model), keep: vec![k] };
            let split = ParameterSplit::single(k, theta0.len())?;
            let pilot = pilot_fit(&model, &y)?;
            let (space, pc) = crq_profile_setup(&pilot, k, child_seed(seed, 2));
            let ec = engine(cfg, eseed);
            let profiler = Profiler::new(&model, &target, &y, split.clone(), &ec)?;
            let covered = profiler.profile(&[theta0[k]], &space, cfg.alpha, &pc)?.value <= cfg.alpha;
            let half = 3.0 * pilot.se[k];
            let grid = GridSpec::line(pilot.theta[k] - half, pilot.theta[k] + half, 2.0 * half / (cfg.grid_points - 1) as f64)?;
            let set = target_confidence_set(&model, &target, &y, split, &grid, &space, cfg.alpha, &ec, &pc)?;
            Ok((covered, set.set.size()))
        }
        (ModelId::Mixture, Setup::Mixture(p)) => {
            let d = p.sample(n, &mut g)?;
            let report = tau_confidence_set(&d.y, &tau_set_config(cfg, eseed))?;
            Ok((report.set.contains(&p.tau()), report.set.len() as f64))
        }
        (ModelId::MixtureCandidates, Setup::Mixture(p)) => {
            let d = p.sample(n, &mut g)?;
            let mbic = MbicConfig { lambda: cfg.lambda, tau_max: cfg.tau_max, ..Default::default() };
            let cands = candidate_set_mixture(&d.y, cfg.vc_size, &mbic, eseed)?;
            Ok((cands.iter().any(|c| c.membership == d.membership), cands.len() as f64))
        }
        _ => unreachable!("setup matches model"),
    }
}

fn run_reps(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let setup = setup(cfg)?;
    (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = child_seed(cfg.seed, rep as u64);
            let start = Instant::now();
            let (covered, size) = replicate(cfg, &setup, seed).with_context(|| format!("replication {rep}"))?;
            let runtime_ms = if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 };
            Ok(ExperimentRecord { rep, covered: u8::from(covered), size, runtime_ms, seed })
        })
        .collect()
}

/// Runs the study and, with `out` set, writes `reps.csv` and `summary.json` there.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<CoverageRun> {
    cfg.validate()?;
    let records = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(|| run_reps(cfg))?,
        None => run_reps(cfg)?,
    };
    let summary = summarize(cfg.model, cfg.alpha, &records);
    if let Some(out) = &cfg.out {
        write_outputs(out, &records, &summary)?;
    }
    Ok(CoverageRun { records, summary })
}

pub fn write_outputs(dir: &Path, records: &[ExperimentRecord], summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("reps.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(summary)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().map(|x| x.map_err(anyhow::Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rep_summary_has_zero_se() {
        let r = ExperimentRecord { rep: 0, covered: 1, size: 0.4, runtime_ms: 0, seed: 3 };
        let s = summarize(ModelId::Binomial, 0.95, std::slice::from_ref(&r));
        assert_eq!((s.coverage, s.coverage_se, s.mean_size, s.size_se), (1.0, 0.0, 0.4, 0.0));
    }
}
