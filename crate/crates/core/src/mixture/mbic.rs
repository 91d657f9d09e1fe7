//! Candidate memberships from the modified BIC
//! n log((RSS + 1) / n) + 2 lambda tau log n, where RSS comes from per-cluster
//! least-squares fits of y on (1, u) for a proposed auxiliary draw u.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ReproError, Result};
use crate::mixture::Membership;
use crate::par;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbicConfig {
    pub lambda: f64,
    pub tau_max: usize,
    /// Uniformly random label starts per order, in addition to the sorted quantile split.
    pub restarts: usize,
    pub max_sweeps: usize,
}

impl Default for MbicConfig {
    fn default() -> Self {
        Self { lambda: 1.0, tau_max: 8, restarts: 10, max_sweeps: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbicFit {
    pub membership: Membership,
    pub objective: f64,
    pub rss: f64,
}

#[derive(Clone, Copy, Debug)]
struct Line {
    mu: f64,
    sigma: f64,
    used: bool,
}

/// Least-squares line y = mu + sigma u per cluster; RSS total.
fn fit_lines(y: &[f64], u: &[f64], labels: &[usize], tau: usize) -> (Vec<Line>, f64) {
    let mut acc = vec![[0.0f64; 5]; tau];
    let mut cnt = vec![0usize; tau];
    for i in 0..y.len() {
        let a = &mut acc[labels[i]];
        a[0] += u[i];
        a[1] += u[i] * u[i];
        a[2] += y[i];
        a[3] += u[i] * y[i];
        a[4] += y[i] * y[i];
        cnt[labels[i]] += 1;
    }
    let lines: Vec<Line> = (0..tau)
        .map(|k| {
            let m = cnt[k] as f64;
            if cnt[k] == 0 {
                return Line { mu: 0.0, sigma: 0.0, used: false };
            }
            let [su, suu, sy, suy, _] = acc[k];
            let suu_c = suu - su * su / m;
            let sigma = if cnt[k] >= 2 && suu_c > 1e-12 * (suu + 1.0) { (suy - su * sy / m) / suu_c } else { 0.0 };
            Line { mu: (sy - sigma * su) / m, sigma, used: true }
        })
        .collect();
    let rss = rss_of(y, u, labels, &lines);
    (lines, rss)
}

fn rss_of(y: &[f64], u: &[f64], labels: &[usize], lines: &[Line]) -> f64 {
    let mut cnt = vec![0usize; lines.len()];
    for l in labels {
        cnt[*l] += 1;
    }
    y.iter()
        .zip(u)
        .zip(labels)
        .filter(|(_, l)| cnt[**l] > 2)
        .map(|((v, w), l)| (v - lines[*l].mu - lines[*l].sigma * w).powi(2))
        .sum()
}

fn objective(rss: f64, tau: usize, n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    nf * ((rss + 1.0) / nf).ln() + 2.0 * lambda * tau as f64 * nf.ln()
}

fn used(labels: &[usize], tau: usize) -> usize {
    let mut seen = vec![false; tau];
    for l in labels {
        seen[*l] = true;
    }
    seen.iter().filter(|s| **s).count()
}

/// Modified-BIC objective of a membership for auxiliary draw u.
pub fn mbic_objective(y: &[f64], u: &[f64], m: &Membership, lambda: f64) -> f64 {
    let (_, rss) = fit_lines(y, u, m.labels(), m.tau());
    objective(rss, m.tau(), y.len(), lambda)
}

/// Alternate line fits and point reassignment until nothing moves.
///
/// Returns the final labels and the objective after each sweep.
pub(crate) fn descend(y: &[f64], u: &[f64], mut labels: Vec<usize>, tau: usize, lambda: f64, max_sweeps: usize) -> (Vec<usize>, Vec<f64>) {
    let n = y.len();
    let (mut lines, rss) = fit_lines(y, u, &labels, tau);
    let mut trace = vec![objective(rss, used(&labels, tau), n, lambda)];
    for _ in 0..max_sweeps {
        let mut moved = false;
        for i in 0..n {
            let cur = labels[i];
            let r = |k: usize| (y[i] - lines[k].mu - lines[k].sigma * u[i]).powi(2);
            let mut best = cur;
            let mut best_r = r(cur);
            for (k, line) in lines.iter().enumerate() {
                if line.used && r(k) < best_r {
                    best_r = r(k);
                    best = k;
                }
            }
            if best != cur {
                labels[i] = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
        let (l2, rss) = fit_lines(y, u, &labels, tau);
        lines = l2;
        trace.push(objective(rss, used(&labels, tau), n, lambda));
    }
    (labels, trace)
}

fn quantile_split(y: &[f64], tau: usize) -> Vec<usize> {
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| y[*a].total_cmp(&y[*b]));
    let mut labels = vec![0; n];
    for (rank, i) in order.into_iter().enumerate() {
        labels[i] = rank * tau / n;
    }
    labels
}

/// Minimiser of the modified BIC for a fixed draw u, over orders 1..=tau_max.
///
/// Ties in the objective go to the smaller order.
pub fn modified_bic_map<R: Rng + ?Sized>(y: &[f64], u: &[f64], cfg: &MbicConfig, rng: &mut R) -> Result<MbicFit> {
    if y.is_empty() || y.len() != u.len() {
        return Err(ReproError::InvalidInput("data and draw must be non-empty and equally long".into()));
    }
    let n = y.len();
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for tau in 1..=cfg.tau_max.min(n).max(1) {
        let mut starts = vec![quantile_split(y, tau)];
        if tau > 1 {
            for _ in 0..cfg.restarts {
                starts.push((0..n).map(|_| rng.random_range(0..tau)).collect());
            }
        }
        for s in starts {
            let (labels, trace) = descend(y, u, s, tau, cfg.lambda, cfg.max_sweeps);
            let obj = *trace.last().expect("non-empty trace");
            let t_eff = used(&labels, tau);
            let better = match &best {
                None => true,
                Some((b, bt, _)) => obj < *b || (obj == *b && t_eff < *bt),
            };
            if better {
                best = Some((obj, t_eff, labels));
            }
        }
    }
    let (objective, _, labels) = best.expect("at least one order");
    let membership = Membership::from_labels(&labels)?;
    let (_, rss) = fit_lines(y, u, membership.labels(), membership.tau());
    Ok(MbicFit { membership, objective, rss })
}

/// Exhaustive minimiser over all memberships with at most tau_max clusters (small n only).
pub fn modified_bic_exhaustive(y: &[f64], u: &[f64], lambda: f64, tau_max: usize) -> Result<MbicFit> {
    let n = y.len();
    if n == 0 || n > 12 || u.len() != n {
        return Err(ReproError::Unsupported("exhaustive search needs 1 <= n <= 12".into()));
    }
    // Enumerate restricted growth strings.
    let mut labels = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    loop {
        let tau = maxes[n - 1] + 1;
        if tau <= tau_max {
            let (_, rss) = fit_lines(y, u, &labels, tau);
            let obj = objective(rss, tau, n, lambda);
            let better = match &best {
                None => true,
                Some((b, bt, _)) => obj < *b || (obj == *b && tau < *bt),
            };
            if better {
                best = Some((obj, tau, labels.clone()));
            }
        }
        let mut i = n - 1;
        loop {
            if i == 0 {
                let (objective, _, l) = best.expect("one membership");
                let membership = Membership::from_labels(&l)?;
                let (_, rss) = fit_lines(y, u, membership.labels(), membership.tau());
                return Ok(MbicFit { membership, objective, rss });
            }
            let limit = maxes[i - 1] + 1;
            if labels[i] < limit && labels[i] + 1 < tau_max {
                labels[i] += 1;
                maxes[i] = maxes[i - 1].max(labels[i]);
                for j in i + 1..n {
                    labels[j] = 0;
                    maxes[j] = maxes[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub membership: Membership,
    /// Number of draws that produced this membership.
    pub multiplicity: usize,
}

impl Candidate {
    pub fn tau(&self) -> usize {
        self.membership.tau()
    }
}

/// Distinct modified-BIC memberships over `vc_size` standard-normal draws u_c.
///
/// Candidates are ordered by order tau, then by first appearance.
pub fn candidate_set_mixture(y: &[f64], vc_size: usize, cfg: &MbicConfig, seed: u64) -> Result<Vec<Candidate>> {
    if vc_size == 0 {
        return Err(ReproError::InvalidInput("need at least one candidate draw".into()));
    }
    let fits: Result<Vec<MbicFit>> = par::map_range(vc_size, |j| {
        let mut g = rng::stream(seed, j as u64);
        let u: Vec<f64> = (0..y.len()).map(|_| g.sample(StandardNormal)).collect();
        modified_bic_map(y, &u, cfg, &mut g)
    })
    .into_iter()
    .collect();
    let mut seen: BTreeMap<Membership, (usize, usize)> = BTreeMap::new();
    for (j, f) in fits?.into_iter().enumerate() {
        seen.entry(f.membership).or_insert((j, 0)).1 += 1;
    }
    let mut out: Vec<(usize, Candidate)> = seen
        .into_iter()
        .map(|(membership, (first, multiplicity))| (first, Candidate { membership, multiplicity }))
        .collect();
    out.sort_by_key(|(first, c)| (c.tau(), *first));
    Ok(out.into_iter().map(|(_, c)| c).collect())
}
