//! Order selection for univariate normal mixtures by BIC over classification-EM fits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ReproError, Result};
use crate::mixture::Membership;
use crate::rng;
use crate::stats::sample_sd;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauHatConfig {
    pub tau_max: usize,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for TauHatConfig {
    fn default() -> Self {
        Self { tau_max: 8, restarts: 10, max_iter: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit {
    pub tau: usize,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub weights: Vec<f64>,
    pub membership: Membership,
    /// Classification log-likelihood sum_i log(pi_k(i) phi(y_i; mu_k(i), sigma_k(i))); -inf when every restart left a component below the minimum size.
    pub loglik: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauHat {
    pub tau: usize,
    /// BIC for tau = 1..=bic.len().
    pub bic: Vec<f64>,
    pub fits: Vec<MixtureFit>,
}

struct Params {
    means: Vec<f64>,
    sds: Vec<f64>,
    log_w: Vec<f64>,
    counts: Vec<usize>,
}

fn m_step(y: &[f64], labels: &[usize], tau: usize, floor: f64) -> Params {
    let mut counts = vec![0usize; tau];
    let mut sum = vec![0.0; tau];
    for (v, l) in y.iter().zip(labels) {
        counts[*l] += 1;
        sum[*l] += v;
    }
    let means: Vec<f64> = sum.iter().zip(&counts).map(|(s, c)| if *c > 0 { s / *c as f64 } else { 0.0 }).collect();
    let mut ss = vec![0.0; tau];
    for (v, l) in y.iter().zip(labels) {
        ss[*l] += (v - means[*l]).powi(2);
    }
    let n = y.len() as f64;
    let sds = ss.iter().zip(&counts).map(|(s, c)| if *c > 0 { (s / *c as f64).sqrt().max(floor) } else { floor }).collect();
    let log_w = counts.iter().map(|c| if *c > 0 { (*c as f64 / n).ln() } else { f64::NEG_INFINITY }).collect();
    Params { means, sds, log_w, counts }
}

fn loglik(y: &[f64], labels: &[usize], p: &Params) -> f64 {
    y.iter()
        .zip(labels)
        .map(|(v, l)| {
            let k = *l;
            let z = (v - p.means[k]) / p.sds[k];
            p.log_w[k] - LN_SQRT_2PI - p.sds[k].ln() - 0.5 * z * z
        })
        .sum()
}

/// Reassign every point to its most likely cluster; returns whether anything moved.
fn c_step(y: &[f64], labels: &mut [usize], p: &Params) -> bool {
    let tau = p.means.len();
    let consts: Vec<f64> = (0..tau).map(|k| p.log_w[k] - p.sds[k].ln()).collect();
    let inv: Vec<f64> = p.sds.iter().map(|s| 0.5 / (s * s)).collect();
    let mut moved = false;
    for (v, l) in y.iter().zip(labels.iter_mut()) {
        let mut best = *l;
        let mut best_score = consts[best] - inv[best] * (v - p.means[best]).powi(2);
        for k in 0..tau {
            if p.counts[k] == 0 {
                continue;
            }
            let s = consts[k] - inv[k] * (v - p.means[k]).powi(2);
            if s > best_score {
                best_score = s;
                best = k;
            }
        }
        if best != *l {
            *l = best;
            moved = true;
        }
    }
    moved
}

/// k-means++ centres on a univariate sample.
pub(crate) fn kmeanspp<R: Rng + ?Sized>(y: &[f64], tau: usize, rng: &mut R) -> Vec<f64> {
    let n = y.len();
    let mut centres = vec![y[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = y.iter().map(|v| (v - centres[0]).powi(2)).collect();
    while centres.len() < tau {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng::open01(rng) * total;
            let mut acc = 0.0;
            let mut idx = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc >= target {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        let c = y[pick];
        centres.push(c);
        for (d, v) in d2.iter_mut().zip(y) {
            *d = d.min((v - c).powi(2));
        }
    }
    centres
}

pub(crate) fn nearest(y: &[f64], centres: &[f64]) -> Vec<usize> {
    y.iter()
        .map(|v| {
            let mut best = 0;
            for k in 1..centres.len() {
                if (v - centres[k]).abs() < (v - centres[best]).abs() {
                    best = k;
                }
            }
            best
        })
        .collect()
}

fn sd_floor(y: &[f64]) -> f64 {
    let s = sample_sd(y);
    if s > 0.0 {
        1e-3 * s
    } else {
        1e-12
    }
}

fn run_cem(y: &[f64], mut labels: Vec<usize>, tau: usize, floor: f64, max_iter: usize) -> (f64, Vec<usize>, Params) {
    let mut p = m_step(y, &labels, tau, floor);
    for _ in 0..max_iter {
        if !c_step(y, &mut labels, &p) {
            break;
        }
        p = m_step(y, &labels, tau, floor);
    }
    (loglik(y, &labels, &p), labels, p)
}

/// Smallest admissible component under the classification likelihood.
///
/// Tiny tight components inflate the classification likelihood by more than the order penalty.
pub const MIN_COMPONENT_SIZE: usize = 5;

fn admissible(p: &Params) -> bool {
    p.counts.len() == 1 || p.counts.iter().all(|c| *c == 0 || *c >= MIN_COMPONENT_SIZE)
}

/// Admissible fits beat inadmissible ones; ties within a class go to the higher log-likelihood.
fn better(ll: f64, ok: bool, best: Option<(f64, bool)>) -> bool {
    best.map_or(true, |(b, bok)| (ok && !bok) || (ok == bok && ll > b))
}

/// Best classification-EM fit with `tau` components over k-means++ restarts.
pub fn cem_fit<R: Rng + ?Sized>(y: &[f64], tau: usize, cfg: &TauHatConfig, rng: &mut R) -> Result<MixtureFit> {
    if tau == 0 || tau > y.len() {
        return Err(ReproError::InvalidInput(format!("cannot fit {tau} components to {} points", y.len())));
    }
    let floor = sd_floor(y);
    let mut best: Option<(f64, Vec<usize>, Params)> = None;
    for _ in 0..cfg.restarts.max(1) {
        let labels = nearest(y, &kmeanspp(y, tau, rng));
        let run = run_cem(y, labels, tau, floor, cfg.max_iter);
        if better(run.0, admissible(&run.2), best.as_ref().map(|b| (b.0, admissible(&b.2)))) {
            best = Some(run);
        }
        if tau == 1 {
            break;
        }
    }
    let (ll, labels, p) = best.expect("one restart");
    let ll = if admissible(&p) { ll } else { f64::NEG_INFINITY };
    let membership = Membership::from_labels(&labels)?;
    // Report parameters in canonical cluster order.
    let mut order = Vec::new();
    for l in &labels {
        if !order.contains(l) {
            order.push(*l);
        }
    }
    let n = y.len() as f64;
    Ok(MixtureFit {
        tau: membership.tau(),
        means: order.iter().map(|k| p.means[*k]).collect(),
        sds: order.iter().map(|k| p.sds[*k]).collect(),
        weights: order.iter().map(|k| p.counts[*k] as f64 / n).collect(),
        membership,
        loglik: ll,
    })
}

fn bic(ll: f64, tau: usize, n: usize) -> f64 {
    -2.0 * ll + 2.0 * tau as f64 * (n as f64).ln()
}

fn check_sample(y: &[f64], cfg: &TauHatConfig) -> Result<()> {
    if cfg.tau_max == 0 {
        return Err(ReproError::InvalidInput("tau_max must be positive".into()));
    }
    if y.len() < 2 * cfg.tau_max {
        return Err(ReproError::InsufficientSamples { needed: 2 * cfg.tau_max, got: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ReproError::InvalidInput("non-finite value in sample".into()));
    }
    Ok(())
}

/// BIC-selected order with every per-order fit.
pub fn tau_hat(y: &[f64], cfg: &TauHatConfig, seed: u64) -> Result<TauHat> {
    check_sample(y, cfg)?;
    let mut g = rng::stream(seed, 0);
    let top = cfg.tau_max;
    let mut fits = Vec::with_capacity(top);
    for tau in 1..=top {
        fits.push(cem_fit(y, tau, cfg, &mut g)?);
    }
    let bics: Vec<f64> = fits.iter().enumerate().map(|(k, f)| bic(f.loglik, k + 1, y.len())).collect();
    let tau = argmin_first(&bics) + 1;
    Ok(TauHat { tau, bic: bics, fits })
}

/// Selected order only, without retaining fits.
pub fn tau_hat_value(y: &[f64], cfg: &TauHatConfig, seed: u64) -> Result<usize> {
    check_sample(y, cfg)?;
    let mut g = rng::stream(seed, 0);
    let floor = sd_floor(y);
    let top = cfg.tau_max;
    let mut best = (f64::INFINITY, 1);
    for tau in 1..=top {
        let mut ll = f64::NEG_INFINITY;
        for r in 0..cfg.restarts.max(1) {
            if tau == 1 && r > 0 {
                break;
            }
            let labels = nearest(y, &kmeanspp(y, tau, &mut g));
            let (run, _, p) = run_cem(y, labels, tau, floor, cfg.max_iter);
            if admissible(&p) {
                ll = ll.max(run);
            }
        }
        let b = bic(ll, tau, y.len());
        if b < best.0 {
            best = (b, tau);
        }
    }
    Ok(best.1)
}

fn argmin_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = k;
        }
    }
    best
}
