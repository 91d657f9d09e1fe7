//! Confidence set for the order tau from the conditional law of the BIC order estimate.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, ReproError, Result};
use crate::mixture::fit::{tau_hat_value, TauHatConfig};
use crate::mixture::mbic::{candidate_set_mixture, Candidate, MbicConfig};
use crate::mixture::suff::{conditional_from_normals, suff_stats, SuffStats};
use crate::mixture::Membership;
use crate::par;
use crate::rng::{self, child_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSetConfig {
    pub alpha: f64,
    pub v_size: usize,
    pub vc_size: usize,
    pub fit: TauHatConfig,
    pub mbic: MbicConfig,
    pub seed: u64,
    /// Evaluate every candidate; otherwise stop scoring an order once it is retained.
    pub exhaustive: bool,
    /// Restrict scoring to candidates of this order.
    pub only: Option<usize>,
}

impl Default for TauSetConfig {
    fn default() -> Self {
        Self {
            alpha: 0.95,
            v_size: 500,
            vc_size: 200,
            fit: TauHatConfig::default(),
            mbic: MbicConfig::default(),
            seed: 0,
            exhaustive: true,
            only: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateLevel {
    pub tau: usize,
    pub multiplicity: usize,
    /// Conditional level F^s(w); None when the candidate was skipped.
    pub level: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSetReport {
    pub alpha: f64,
    /// BIC order estimate on the observed data.
    pub w: usize,
    pub set: Vec<usize>,
    /// Smallest level seen per order among scored candidates.
    pub levels: BTreeMap<usize, f64>,
    pub candidates: Vec<CandidateLevel>,
}

impl TauSetReport {
    pub fn contains(&self, tau: usize) -> bool {
        self.set.contains(&tau)
    }
}

/// Monte Carlo law P^s(k), k = 1..=tau_max, of the BIC order estimate given (M, A = a, B = b).
pub fn conditional_tau_law(m: &Membership, stats: &SuffStats, v_size: usize, fit: &TauHatConfig, seed: u64) -> Result<Vec<f64>> {
    if v_size == 0 {
        return Err(ReproError::InsufficientSamples { needed: 1, got: 0 });
    }
    let draws: Result<Vec<usize>> = par::map_range(v_size, |s| {
        let mut g = rng::stream(seed, s as u64);
        let u: Vec<f64> = (0..m.n()).map(|_| g.sample(StandardNormal)).collect();
        let y = conditional_from_normals(m, stats, &u)?;
        tau_hat_value(&y, fit, child_seed(seed, s as u64))
    })
    .into_iter()
    .collect();
    let top = fit.tau_max;
    let mut p = vec![0.0; top];
    for t in draws? {
        p[t - 1] += 1.0;
    }
    for x in p.iter_mut() {
        *x /= v_size as f64;
    }
    Ok(p)
}

/// Mass of orders strictly more probable than w under a law P.
pub fn mass_above(p: &[f64], w: usize) -> f64 {
    let pw = p.get(w.wrapping_sub(1)).copied().unwrap_or(0.0);
    p.iter().filter(|x| **x > pw).fold(0.0, |s, x| s + x)
}

/// F^s(w | M, a, b).
pub fn f_s(w: usize, m: &Membership, stats: &SuffStats, v_size: usize, fit: &TauHatConfig, seed: u64) -> Result<f64> {
    Ok(mass_above(&conditional_tau_law(m, stats, v_size, fit, seed)?, w))
}

/// Orders tau with some candidate membership whose conditional level F^s(w) is at most alpha.
pub fn tau_confidence_set(y: &[f64], cfg: &TauSetConfig) -> Result<TauSetReport> {
    check_alpha(cfg.alpha)?;
    let w = tau_hat_value(y, &cfg.fit, child_seed(cfg.seed, 1))?;
    let candidates = candidate_set_mixture(y, cfg.vc_size, &cfg.mbic, child_seed(cfg.seed, 2))?;
    score_candidates(y, w, &candidates, cfg)
}

/// Score a given candidate list against the observed order estimate w.
pub fn score_candidates(y: &[f64], w: usize, candidates: &[Candidate], cfg: &TauSetConfig) -> Result<TauSetReport> {
    check_alpha(cfg.alpha)?;
    let fseed = child_seed(cfg.seed, 3);
    let mut levels: BTreeMap<usize, f64> = BTreeMap::new();
    let mut out = Vec::with_capacity(candidates.len());
    for c in candidates {
        let tau = c.tau();
        let wanted = cfg.only.map_or(true, |t| t == tau);
        let settled = !cfg.exhaustive && levels.get(&tau).is_some_and(|l| *l <= cfg.alpha);
        let level = if wanted && !settled {
            let stats = suff_stats(y, &c.membership)?;
            let f = f_s(w, &c.membership, &stats, cfg.v_size, &cfg.fit, fseed)?;
            let e = levels.entry(tau).or_insert(1.0);
            *e = e.min(f);
            Some(f)
        } else {
            None
        };
        out.push(CandidateLevel { tau, multiplicity: c.multiplicity, level });
    }
    let set = levels.iter().filter(|(_, l)| **l <= cfg.alpha).map(|(t, _)| *t).collect();
    Ok(TauSetReport { alpha: cfg.alpha, w, set, levels, candidates: out })
}
