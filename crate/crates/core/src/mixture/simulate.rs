use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ReproError, Result};
use crate::mixture::Membership;
use crate::model::{AuxDistribution, GenerativeModel, ParameterPoint, ParameterSchema};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSample {
    pub y: Vec<f64>,
    pub membership: Membership,
    pub u: Vec<f64>,
}

impl MixtureParams {
    pub fn new(means: Vec<f64>, sds: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let p = Self { means, sds, weights };
        p.validate()?;
        Ok(p)
    }

    /// Reference parameter sets with 2, 3 or 4 components.
    pub fn reference(tau: usize) -> Option<Self> {
        let (means, sds, weights) = match tau {
            2 => (vec![0.2206, 0.3654], vec![0.0571, 0.1012], vec![0.7057, 0.2943]),
            3 => (vec![0.1887, 0.4199, 0.2809], vec![0.0414, 0.0886, 0.0474], vec![0.4453, 0.168, 0.3866]),
            4 => (
                vec![0.1804, 0.3351, 0.2556, 0.4403],
                vec![0.0362, 0.0359, 0.0268, 0.086],
                vec![0.4018, 0.1742, 0.2941, 0.1299],
            ),
            _ => return None,
        };
        Some(Self { means, sds, weights })
    }

    pub fn tau(&self) -> usize {
        self.means.len()
    }

    fn validate(&self) -> Result<()> {
        let k = self.means.len();
        if k == 0 || self.sds.len() != k || self.weights.len() != k {
            return Err(ReproError::InvalidInput("means, sds and weights must share a positive length".into()));
        }
        if self.sds.iter().any(|s| !(*s > 0.0)) || self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(ReproError::InvalidInput("sds and weights must be positive".into()));
        }
        Ok(())
    }

    /// n draws with multinomial labels; redrawn until every component is present.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<MixtureSample> {
        self.validate()?;
        if n < self.tau() {
            return Err(ReproError::InvalidInput(format!("{n} points cannot fill {} components", self.tau())));
        }
        let total: f64 = self.weights.iter().sum();
        for _ in 0..1000 {
            let labels: Vec<usize> = (0..n)
                .map(|_| {
                    let mut t = rng::open01(rng) * total;
                    for (k, w) in self.weights.iter().enumerate() {
                        if t < *w {
                            return k;
                        }
                        t -= w;
                    }
                    self.tau() - 1
                })
                .collect();
            let mut seen = vec![false; self.tau()];
            for l in &labels {
                seen[*l] = true;
            }
            if seen.iter().all(|s| *s) {
                let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let y = labels.iter().zip(&u).map(|(l, e)| self.means[*l] + self.sds[*l] * e).collect();
                return Ok(MixtureSample { y, membership: Membership::from_labels(&labels)?, u });
            }
        }
        Err(ReproError::InvalidInput("could not draw every component; weights too small for n".into()))
    }
}

/// Y = M mu + diag(M sigma) U for a fixed membership M; theta = (mu_1..mu_tau, sigma_1..sigma_tau).
#[derive(Clone, Debug)]
pub struct MixtureModel {
    membership: Membership,
    schema: ParameterSchema,
}

impl MixtureModel {
    pub fn new(membership: Membership) -> Self {
        let tau = membership.tau();
        let mut schema = ParameterSchema::real_line(&vec!["mu"; tau]);
        schema.continuous.extend(ParameterSchema::open_box(&vec!["sigma"; tau], 0.0, f64::INFINITY).continuous);
        Self { membership, schema }
    }

    pub fn membership(&self) -> &Membership {
        &self.membership
    }

    pub fn theta(means: &[f64], sds: &[f64]) -> ParameterPoint {
        ParameterPoint::continuous(means.iter().chain(sds).copied().collect())
    }
}

impl GenerativeModel for MixtureModel {
    fn schema(&self) -> &ParameterSchema {
        &self.schema
    }

    fn data_len(&self) -> usize {
        self.membership.n()
    }

    fn aux_len(&self) -> usize {
        self.membership.n()
    }

    fn aux_distribution(&self) -> AuxDistribution {
        AuxDistribution::StandardNormal
    }

    fn is_explicit(&self) -> bool {
        true
    }

    fn generate_raw(&self, theta: &ParameterPoint, u: &[f64]) -> Result<Vec<f64>> {
        let tau = self.membership.tau();
        let th = &theta.continuous;
        Ok(self.membership.labels().iter().zip(u).map(|(k, e)| th[*k] + th[tau + k] * e).collect())
    }
}
