//! Confidence-set reports for an observed data file.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;
use serde_json::json;

use repro_core::engine::{algorithm1, member_levels, EngineConfig, GridSpec};
use repro_core::mixture::{candidate_set_mixture, tau_confidence_set, MbicConfig};
use repro_core::model::ParameterPoint;
use repro_core::models::binomial::{BinomialModel, BinomialTable, SuccessCount};
use repro_core::models::crq::{crq_grid, pilot_fit, CrqMapping, CrqModel, PilotFit};
use repro_core::models::quantile::{quantile_set, BernoulliSum, QuantileModel};
use repro_core::models::uniform::{
    c_alpha, feasible_interval, lrt_interval, order_stat_set, uniform_irwin_hall_set, ExtremesStatistic, MeanStatistic, UniformLocationModel,
};
use repro_core::profile::{target_confidence_set, Coordinates, ParameterSplit};
use repro_core::region::Interval;

use crate::config::{ExperimentConfig, ModelId};
use crate::coverage::{binomial_axis, crq_profile_setup, tau_set_config};
use crate::data::{read_column, read_table, Table};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetReport {
    /// Disjoint intervals of a scalar parameter.
    Intervals { intervals: Vec<[f64; 2]> },
    /// Retained integer values.
    Values { values: Vec<usize> },
    /// Per-coordinate range of the retained points; None when nothing is retained.
    Hulls { hulls: Vec<Option<[f64; 2]>> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub value: Vec<f64>,
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub model: ModelId,
    pub alpha: f64,
    pub n: usize,
    pub set: SetReport,
    pub diagnostics: serde_json::Value,
    pub levels: Vec<Level>,
}

pub enum Observed {
    Column(Vec<f64>),
    Table(Table),
}

pub fn load(model: ModelId, path: &Path) -> Result<Observed> {
    Ok(match model {
        ModelId::Crq | ModelId::CrqCoef => Observed::Table(read_table(path)?),
        _ => Observed::Column(read_column(path)?),
    })
}

pub(crate) fn engine(cfg: &ExperimentConfig) -> EngineConfig {
    EngineConfig { v_size: cfg.v_size, seed: cfg.seed, ..Default::default() }
}

pub(crate) fn binomial_count(y: &[f64], trials: usize) -> Result<usize> {
    if y.len() != 1 {
        bail!("binomial data is one success count, found {} values", y.len());
    }
    let c = y[0];
    if c.fract() != 0.0 || c < 0.0 || c > trials as f64 {
        bail!("success count {c} is not an integer in 0..={trials}");
    }
    Ok(c as usize)
}

fn interval_pair(iv: &Interval) -> Vec<[f64; 2]> {
    if iv.is_empty() {
        Vec::new()
    } else {
        vec![[iv.lo, iv.hi]]
    }
}

fn scalar_levels(levels: Vec<(ParameterPoint, f64)>) -> Vec<Level> {
    levels.into_iter().map(|(p, l)| Level { value: p.continuous, level: l }).collect()
}

/// Grid over [lo, hi] widened by `pad`, with `steps` intervals unless one is configured.
fn default_grid(cfg: &ExperimentConfig, lo: f64, hi: f64, pad: f64, steps: f64) -> Result<GridSpec> {
    if let Some(g) = cfg.grid {
        return Ok(g.spec());
    }
    let (a, b) = (lo - pad, hi + pad);
    let step = if b > a { (b - a) / steps } else { 1e-3 };
    Ok(GridSpec::line(a, b.max(a), step)?)
}

fn crq_model(t: &Table, cfg: &ExperimentConfig) -> Result<CrqModel> {
    Ok(CrqModel::new(t.x.clone(), cfg.zeta)?)
}

fn coefficient_grid(pilot: &PilotFit, k: usize, points: usize) -> Result<GridSpec> {
    let half = 3.0 * pilot.se[k];
    Ok(GridSpec::line(pilot.theta[k] - half, pilot.theta[k] + half, 2.0 * half / (points - 1) as f64)?)
}

pub fn analyze(cfg: &ExperimentConfig, data: &Observed) -> Result<AnalysisReport> {
    cfg.validate()?;
    let alpha = cfg.alpha;
    let ec = engine(cfg);
    let report = |n: usize, set: SetReport, diagnostics: serde_json::Value, levels: Vec<Level>| AnalysisReport {
        model: cfg.model,
        alpha,
        n,
        set,
        diagnostics,
        levels,
    };
    match (cfg.model, data) {
        (ModelId::Binomial, Observed::Column(y)) => {
            let count = binomial_count(y, cfg.trials)?;
            let axis = cfg.grid.map_or_else(binomial_axis, |g| g.0);
            let set = BinomialTable::new(cfg.trials, alpha, axis)?.set(count);
            let runs = set.runs().unwrap_or_default();
            let grid = GridSpec { discrete: Vec::new(), continuous: vec![axis] };
            let levels = member_levels(&BinomialModel::new(cfg.trials)?, &SuccessCount, &[count as f64], &grid, &ec)?;
            Ok(report(
                cfg.trials,
                SetReport::Intervals { intervals: runs.into_iter().map(|(a, b)| [a, b]).collect() },
                json!({ "trials": cfg.trials, "count": count, "grid_step": axis.step }),
                scalar_levels(levels),
            ))
        }
        (ModelId::Quantile, Observed::Column(y)) => {
            let iv = quantile_set(y, cfg.zeta, alpha, (f64::NEG_INFINITY, f64::INFINITY))?;
            let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let grid = default_grid(cfg, lo, hi, 0.0, 400.0)?;
            let levels = member_levels(&QuantileModel::new(y.len(), cfg.zeta)?, &BernoulliSum, y, &grid, &ec)?;
            Ok(report(
                y.len(),
                SetReport::Intervals { intervals: vec![[iv.lo, iv.hi]] },
                json!({ "zeta": cfg.zeta, "lower_rank": iv.a_l, "upper_rank": iv.a_u }),
                scalar_levels(levels),
            ))
        }
        (ModelId::Uniform, Observed::Column(y)) => {
            let s = uniform_irwin_hall_set(y, alpha)?;
            let f = feasible_interval(y);
            let grid = default_grid(cfg, f.lo, f.hi, 0.05, 1000.0)?;
            let levels = member_levels(&UniformLocationModel::new(y.len())?, &MeanStatistic, y, &grid, &ec)?;
            Ok(report(
                y.len(),
                SetReport::Intervals { intervals: interval_pair(&s.repro) },
                json!({
                    "irwin_hall_quantile": s.q,
                    "test_interval": [s.test.lo, s.test.hi],
                    "feasible_interval": [s.feasible.lo, s.feasible.hi],
                }),
                scalar_levels(levels),
            ))
        }
        (ModelId::UniformOrderstat, Observed::Column(y)) => {
            let iv = order_stat_set(y, alpha)?;
            let lrt = lrt_interval(y, alpha)?;
            let f = feasible_interval(y);
            let grid = default_grid(cfg, f.lo, f.hi, 0.05, 1000.0)?;
            let levels = member_levels(&UniformLocationModel::new(y.len())?, &ExtremesStatistic, y, &grid, &ec)?;
            Ok(report(
                y.len(),
                SetReport::Intervals { intervals: interval_pair(&iv) },
                json!({ "c_alpha": c_alpha(y.len(), alpha)?, "lrt_interval": [lrt.lo, lrt.hi], "feasible_interval": [f.lo, f.hi] }),
                scalar_levels(levels),
            ))
        }
        (ModelId::Crq, Observed::Table(t)) => {
            let model = crq_model(t, cfg)?;
            let mapping = CrqMapping::for_model(&model);
            let pilot = pilot_fit(&model, &t.y)?;
            let grid = crq_grid(&pilot, 3.0, cfg.grid_points)?;
            let set = algorithm1(&model, &mapping, &t.y, &grid, alpha, &ec)?;
            let hulls = (0..pilot.theta.len()).map(|k| set.hull(k).map(|(a, b)| [a, b])).collect();
            let levels = member_levels(&model, &mapping, &t.y, &grid, &ec)?;
            Ok(report(
                t.y.len(),
                SetReport::Hulls { hulls },
                json!({ "pilot": pilot.theta, "pilot_se": pilot.se, "grid_points": grid.points()?.len(), "retained": set.count() }),
                scalar_levels(levels),
            ))
        }
        (ModelId::CrqCoef, Observed::Table(t)) => {
            let model = crq_model(t, cfg)?;
            let pilot = pilot_fit(&model, &t.y)?;
            let p = pilot.theta.len();
            let coefs: Vec<usize> = match cfg.coefficient {
                Some(k) => vec![k],
                None => (0..p).collect(),
            };
            let mut hulls = vec![None; p];
            let mut levels = Vec::new();
            for k in coefs {
                let target = Coordinates { inner: CrqMapping::for_model(&model), keep: vec![k] };
                let (space, mut pc) = crq_profile_setup(&pilot, k, cfg.seed);
                pc.stop_at_alpha = false;
                let grid = coefficient_grid(&pilot, k, cfg.grid_points)?;
                let ts = target_confidence_set(&model, &target, &t.y, ParameterSplit::single(k, p)?, &grid, &space, alpha, &ec, &pc)?;
                hulls[k] = ts.set.hull(0).map(|(a, b)| [a, b]);
                for (pt, pr) in ts.set.points.iter().zip(&ts.profiles) {
                    levels.push(Level { value: vec![k as f64, pt.continuous[0]], level: pr.value });
                }
            }
            Ok(report(t.y.len(), SetReport::Hulls { hulls }, json!({ "pilot": pilot.theta, "pilot_se": pilot.se }), levels))
        }
        (ModelId::Mixture, Observed::Column(y)) => {
            let tc = tau_confidence_set(y, &tau_set_config(cfg, cfg.seed))?;
            let levels = tc.levels.iter().map(|(t, l)| Level { value: vec![*t as f64], level: *l }).collect();
            let cands: Vec<serde_json::Value> =
                tc.candidates.iter().map(|c| json!({ "tau": c.tau, "multiplicity": c.multiplicity, "level": c.level })).collect();
            Ok(report(
                y.len(),
                SetReport::Values { values: tc.set.clone() },
                json!({ "tau_hat": tc.w, "distinct_candidates": tc.candidates.len(), "draws": cfg.vc_size, "candidates": cands }),
                levels,
            ))
        }
        (ModelId::MixtureCandidates, Observed::Column(y)) => {
            let mbic = MbicConfig { lambda: cfg.lambda, tau_max: cfg.tau_max, ..Default::default() };
            let cands = candidate_set_mixture(y, cfg.vc_size, &mbic, cfg.seed)?;
            let mut taus: Vec<usize> = cands.iter().map(|c| c.membership.tau()).collect();
            taus.sort_unstable();
            taus.dedup();
            let list: Vec<serde_json::Value> = cands
                .iter()
                .map(|c| json!({ "tau": c.membership.tau(), "multiplicity": c.multiplicity, "sizes": c.membership.sizes() }))
                .collect();
            Ok(report(
                y.len(),
                SetReport::Values { values: taus },
                json!({ "distinct_candidates": cands.len(), "draws": cfg.vc_size, "candidates": list }),
                Vec::new(),
            ))
        }
        _ => bail!("data shape does not match model {}", cfg.model),
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.4}")
    }
}

pub fn render_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model: {}  alpha: {}  n: {}", r.model, r.alpha, r.n);
    let set = match &r.set {
        SetReport::Intervals { intervals } if intervals.is_empty() => "empty".to_string(),
        SetReport::Intervals { intervals } => {
            intervals.iter().map(|[a, b]| format!("[{}, {}]", fmt_num(*a), fmt_num(*b))).collect::<Vec<_>>().join(" U ")
        }
        SetReport::Values { values } => format!("{{{}}}", values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")),
        SetReport::Hulls { hulls } => hulls
            .iter()
            .enumerate()
            .map(|(k, h)| match h {
                Some([a, b]) => format!("theta{k} in [{}, {}]", fmt_num(*a), fmt_num(*b)),
                None => format!("theta{k}: -"),
            })
            .collect::<Vec<_>>()
            .join("; "),
    };
    let _ = writeln!(s, "set: {set}");
    if let Some(obj) = r.diagnostics.as_object() {
        for (k, v) in obj {
            if k != "candidates" {
                let _ = writeln!(s, "{k}: {v}");
            }
        }
        if let Some(c) = obj.get("candidates").and_then(|c| c.as_array()) {
            for c in c {
                let _ = writeln!(s, "  candidate {c}");
            }
        }
    }
    let _ = writeln!(s, "levels: {} values (JSON output lists them)", r.levels.len());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_three_points() {
        let cfg = ExperimentConfig { model: ModelId::Uniform, ..Default::default() };
        let r = analyze(&cfg, &Observed::Column(vec![-0.430, 0.049, 0.371])).unwrap();
        match &r.set {
            SetReport::Intervals { intervals } => {
                assert!((intervals[0][0] + 0.629).abs() < 5e-4 && (intervals[0][1] - 0.570).abs() < 5e-4);
            }
            other => panic!("{other:?}"),
        }
        assert!(render_text(&r).contains("[-0.6290, 0.5700]"));
    }

    #[test]
    fn binomial_count_checks() {
        assert_eq!(binomial_count(&[3.0], 20).unwrap(), 3);
        assert!(binomial_count(&[3.5], 20).is_err());
        assert!(binomial_count(&[21.0], 20).is_err());
        assert!(binomial_count(&[1.0, 2.0], 20).is_err());
    }
}
