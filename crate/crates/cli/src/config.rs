use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use repro_core::engine::{Axis, GridSpec};
use repro_core::mixture::MixtureParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    /// Success count of `trials` Bernoulli(theta) draws.
    Binomial,
    /// zeta-quantile of a Cauchy location sample.
    Quantile,
    /// Location of U(theta - 1, theta + 1), Irwin-Hall mean interval.
    Uniform,
    /// Location of U(theta - 1, theta + 1), order-statistic box interval.
    UniformOrderstat,
    /// Censored quantile regression, joint coefficient set.
    Crq,
    /// Censored quantile regression, one coefficient with the others profiled.
    CrqCoef,
    /// Normal mixture order.
    Mixture,
    /// Normal mixture (order, membership) candidate set.
    MixtureCandidates,
}

impl ModelId {
    pub const ALL: [ModelId; 8] = [
        ModelId::Binomial,
        ModelId::Quantile,
        ModelId::Uniform,
        ModelId::UniformOrderstat,
        ModelId::Crq,
        ModelId::CrqCoef,
        ModelId::Mixture,
        ModelId::MixtureCandidates,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelId::Binomial => "binomial",
            ModelId::Quantile => "quantile",
            ModelId::Uniform => "uniform",
            ModelId::UniformOrderstat => "uniform-orderstat",
            ModelId::Crq => "crq",
            ModelId::CrqCoef => "crq-coef",
            ModelId::Mixture => "mixture",
            ModelId::MixtureCandidates => "mixture-candidates",
        }
    }

    fn default_n(&self) -> Option<usize> {
        match self {
            ModelId::Binomial => None,
            ModelId::Quantile => Some(60),
            ModelId::Uniform => Some(3),
            ModelId::UniformOrderstat => Some(5),
            ModelId::Crq | ModelId::CrqCoef => Some(75),
            ModelId::Mixture => Some(190),
            ModelId::MixtureCandidates => Some(80),
        }
    }

    fn default_truth(&self) -> Vec<f64> {
        match self {
            ModelId::Binomial => vec![0.4],
            ModelId::Quantile | ModelId::Uniform | ModelId::UniformOrderstat => vec![0.0],
            ModelId::Crq | ModelId::CrqCoef => vec![0.5, 1.0, 1.0],
            ModelId::Mixture => vec![3.0],
            ModelId::MixtureCandidates => vec![0.2, 0.6, 0.04, 0.04, 0.5, 0.5],
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match ModelId::ALL.iter().find(|m| m.name() == s) {
            Some(m) => Ok(*m),
            None => {
                let known: Vec<&str> = ModelId::ALL.iter().map(|m| m.name()).collect();
                bail!("unknown model id '{s}' (known: {})", known.join(", "))
            }
        }
    }
}

/// One-dimensional grid written `lo:hi:step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridArg(pub Axis);

impl GridArg {
    pub fn spec(&self) -> GridSpec {
        GridSpec { discrete: Vec::new(), continuous: vec![self.0] }
    }
}

impl FromStr for GridArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("grid must be lo:hi:step, got '{s}'");
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad grid number '{p}'")))
            .collect::<Result<_>>()?;
        Ok(GridArg(Axis::new(v[0], v[1], v[2])?))
    }
}

impl TryFrom<String> for GridArg {
    type Error = anyhow::Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GridArg> for String {
    fn from(g: GridArg) -> String {
        format!("{}:{}:{}", g.0.lo, g.0.hi, g.0.step)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelId,
    /// True parameters; empty selects the model default.
    ///
    /// binomial: [theta]. quantile: [location]. uniform: [theta]. crq: beta.
    /// mixture: [tau0] for a reference fit, or means ++ sds ++ weights.
    pub truth: Vec<f64>,
    pub alpha: f64,
    pub reps: usize,
    /// Sample size; None selects the model default.
    pub n: Option<usize>,
    pub trials: usize,
    pub zeta: f64,
    /// Target coefficient of crq-coef; None selects the last one.
    pub coefficient: Option<usize>,
    pub grid: Option<GridArg>,
    /// Points per axis of the crq grids.
    pub grid_points: usize,
    pub v_size: usize,
    pub vc_size: usize,
    pub lambda: f64,
    pub tau_max: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Record wall-clock time per replication; off keeps output reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelId::Binomial,
            truth: Vec::new(),
            alpha: 0.95,
            reps: 1000,
            n: None,
            trials: 20,
            zeta: 0.5,
            coefficient: None,
            grid: None,
            grid_points: 7,
            v_size: 500,
            vc_size: 200,
            lambda: 1.0,
            tau_max: 8,
            seed: 0,
            out: None,
            threads: None,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn truth(&self) -> Vec<f64> {
        if self.truth.is_empty() {
            self.model.default_truth()
        } else {
            self.truth.clone()
        }
    }

    pub fn sample_size(&self) -> usize {
        self.n.or(self.model.default_n()).unwrap_or(self.trials)
    }

    pub fn mixture_truth(&self) -> Result<MixtureParams> {
        let t = self.truth();
        if t.len() == 1 {
            let tau = t[0];
            if tau.fract() != 0.0 || tau < 1.0 {
                bail!("mixture truth [{tau}] is not an order");
            }
            return MixtureParams::reference(tau as usize).with_context(|| format!("no reference fit with {tau} components (use 2, 3 or 4)"));
        }
        if t.len() % 3 != 0 {
            bail!("mixture truth must be [tau0] or means, sds and weights of equal length");
        }
        let k = t.len() / 3;
        Ok(MixtureParams::new(t[..k].to_vec(), t[k..2 * k].to_vec(), t[2 * k..].to_vec())?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            bail!("reps must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0, 1), got {}", self.alpha);
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            bail!("zeta must lie in (0, 1), got {}", self.zeta);
        }
        if !(self.lambda > 0.0) {
            bail!("lambda must be positive");
        }
        if self.tau_max == 0 || self.vc_size == 0 {
            bail!("tau_max and vc_size must be positive");
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        let t = self.truth();
        match self.model {
            ModelId::Binomial => {
                if t.len() != 1 || !(t[0] > 0.0 && t[0] < 1.0) {
                    bail!("binomial truth must be one value in (0, 1)");
                }
                if self.trials == 0 {
                    bail!("trials must be positive");
                }
            }
            ModelId::Quantile | ModelId::Uniform | ModelId::UniformOrderstat => {
                if t.len() != 1 {
                    bail!("{} truth must be one value", self.model);
                }
            }
            ModelId::Crq | ModelId::CrqCoef => {
                if t.len() != 3 {
                    bail!("crq truth must be (beta0, beta1, beta2)");
                }
                if self.coefficient.is_some_and(|k| k >= 3) {
                    bail!("coefficient index must be 0, 1 or 2");
                }
                if self.grid_points < 2 {
                    bail!("grid_points must be at least 2");
                }
            }
            ModelId::Mixture | ModelId::MixtureCandidates => {
                self.mixture_truth()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_ids_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.name().parse::<ModelId>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("normal".parse::<ModelId>().is_err());
    }

    #[test]
    fn grid_parses_and_serializes() {
        let g: GridArg = "0.1:0.9:0.1".parse().unwrap();
        assert_eq!(g.0.count(), 9);
        assert_eq!(String::from(g), "0.1:0.9:0.1");
        assert!("0.1:0.9".parse::<GridArg>().is_err());
        assert!("1:0:0.1".parse::<GridArg>().is_err());
    }

    #[test]
    fn json_config_uses_defaults_and_rejects_unknown_fields() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"model": "uniform", "reps": 5, "grid": "-1:1:0.5"}"#).unwrap();
        assert_eq!(c.reps, 5);
        assert_eq!(c.alpha, 0.95);
        assert_eq!(c.sample_size(), 3);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"modl": "uniform"}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"model": "nope"}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig { reps: 0, ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { truth: vec![1.5], ..Default::default() }.validate().is_err());
        let mix = ExperimentConfig { model: ModelId::Mixture, truth: vec![5.0], ..Default::default() };
        assert!(mix.validate().is_err());
        let mix = ExperimentConfig { model: ModelId::Mixture, truth: vec![0.0, 3.0, 1.0, 1.0, 0.4, 0.6], ..Default::default() };
        assert_eq!(mix.mixture_truth().unwrap().tau(), 2);
        assert!(ExperimentConfig::default().validate().is_ok());
    }
}
