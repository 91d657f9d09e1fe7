//! p-values of point or finite null hypotheses.

use anyhow::{bail, Result};
use serde::Serialize;

use repro_core::engine::{member_level, pvalue as engine_pvalue};
use repro_core::mixture::{tau_confidence_set, TauSetConfig};
use repro_core::model::ParameterPoint;
use repro_core::models::binomial::{BinomialModel, SuccessCount};
use repro_core::models::crq::{pilot_fit, CrqMapping, CrqModel};
use repro_core::models::quantile::{BernoulliSum, QuantileModel};
use repro_core::models::uniform::{ExtremesStatistic, MeanStatistic, UniformLocationModel};
use repro_core::profile::{Coordinates, ParameterSplit, Profiler};

use crate::analyze::{binomial_count, engine, Observed};
use crate::config::{ExperimentConfig, ModelId};
use crate::coverage::{crq_profile_setup, tau_set_config};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PValueReport {
    pub model: ModelId,
    pub null: Vec<f64>,
    pub p_value: f64,
}

fn scalars(null: &[f64]) -> Vec<ParameterPoint> {
    null.iter().map(|v| ParameterPoint::scalar(*v)).collect()
}

/// `null` lists the null values: scalar models take one or more values, crq a full
/// coefficient vector, crq-coef one coefficient value, mixture one or more orders.
pub fn pvalue(cfg: &ExperimentConfig, data: &Observed, null: &[f64]) -> Result<PValueReport> {
    cfg.validate()?;
    if null.is_empty() {
        bail!("empty null hypothesis");
    }
    let ec = engine(cfg);
    let p = match (cfg.model, data) {
        (ModelId::Binomial, Observed::Column(y)) => {
            let count = binomial_count(y, cfg.trials)?;
            engine_pvalue(&BinomialModel::new(cfg.trials)?, &SuccessCount, &[count as f64], &scalars(null), &ec)?
        }
        (ModelId::Quantile, Observed::Column(y)) => engine_pvalue(&QuantileModel::new(y.len(), cfg.zeta)?, &BernoulliSum, y, &scalars(null), &ec)?,
        (ModelId::Uniform, Observed::Column(y)) => engine_pvalue(&UniformLocationModel::new(y.len())?, &MeanStatistic, y, &scalars(null), &ec)?,
        (ModelId::UniformOrderstat, Observed::Column(y)) => {
            engine_pvalue(&UniformLocationModel::new(y.len())?, &ExtremesStatistic, y, &scalars(null), &ec)?
        }
        (ModelId::Crq, Observed::Table(t)) => {
            let model = CrqModel::new(t.x.clone(), cfg.zeta)?;
            if null.len() != t.x[0].len() {
                bail!("crq null needs {} coefficients", t.x[0].len());
            }
            1.0 - member_level(&model, &CrqMapping::for_model(&model), &t.y, &ParameterPoint::continuous(null.to_vec()), &ec)?
        }
        (ModelId::CrqCoef, Observed::Table(t)) => {
            if null.len() != 1 {
                bail!("crq-coef null is one coefficient value");
            }
            let model = CrqModel::new(t.x.clone(), cfg.zeta)?;
            let p = t.x[0].len();
            let k = cfg.coefficient.unwrap_or(p - 1);
            let pilot = pilot_fit(&model, &t.y)?;
            let (space, mut pc) = crq_profile_setup(&pilot, k, cfg.seed);
            pc.stop_at_alpha = false;
            let target = Coordinates { inner: CrqMapping::for_model(&model), keep: vec![k] };
            let profiler = Profiler::new(&model, &target, &t.y, ParameterSplit::single(k, p)?, &ec)?;
            1.0 - profiler.profile(null, &space, cfg.alpha, &pc)?.value
        }
        (ModelId::Mixture, Observed::Column(y)) => {
            let taus: Vec<usize> = null
                .iter()
                .map(|v| if v.fract() == 0.0 && *v >= 1.0 { Ok(*v as usize) } else { bail!("mixture null values must be orders, got {v}") })
                .collect::<Result<_>>()?;
            let r = tau_confidence_set(y, &TauSetConfig { exhaustive: true, ..tau_set_config(cfg, cfg.seed) })?;
            // Orders absent from the candidate set have level 1.
            let min = taus.iter().map(|t| r.levels.get(t).copied().unwrap_or(1.0)).fold(1.0, f64::min);
            1.0 - min
        }
        (ModelId::MixtureCandidates, _) => bail!("mixture-candidates has no p-value; use mixture"),
        _ => bail!("data shape does not match model {}", cfg.model),
    };
    Ok(PValueReport { model: cfg.model, null: null.to_vec(), p_value: p })
}
