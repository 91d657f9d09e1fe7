use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ReproError, Result};
use crate::mixture::Membership;

/// Per-cluster mean a_k and root residual sum of squares b_k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuffStats {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn suff_stats(y: &[f64], m: &Membership) -> Result<SuffStats> {
    if y.len() != m.n() {
        return Err(ReproError::InvalidInput(format!("{} values for {} labels", y.len(), m.n())));
    }
    let sizes = m.sizes();
    let mut a = vec![0.0; m.tau()];
    for (v, l) in y.iter().zip(m.labels()) {
        a[*l] += v;
    }
    for (ak, nk) in a.iter_mut().zip(&sizes) {
        *ak /= *nk as f64;
    }
    let mut ss = vec![0.0; m.tau()];
    for (v, l) in y.iter().zip(m.labels()) {
        ss[*l] += (v - a[*l]).powi(2);
    }
    Ok(SuffStats { a, b: ss.into_iter().map(f64::sqrt).collect() })
}

/// Map standard normals u to y with y_i = a_k + b_k c_i, c the within-cluster direction of u.
///
/// The output has exactly the given sufficient statistics. Clusters of size one need b_k = 0.
pub fn conditional_from_normals(m: &Membership, stats: &SuffStats, u: &[f64]) -> Result<Vec<f64>> {
    let tau = m.tau();
    if stats.a.len() != tau || stats.b.len() != tau || u.len() != m.n() {
        return Err(ReproError::InvalidInput("statistics or draw do not match the membership".into()));
    }
    let sizes = m.sizes();
    for k in 0..tau {
        if sizes[k] == 1 && stats.b[k] > 0.0 {
            return Err(ReproError::InvalidInput(format!("cluster {k} has one member but b = {}", stats.b[k])));
        }
        if stats.b[k] < 0.0 {
            return Err(ReproError::InvalidInput(format!("negative b for cluster {k}")));
        }
    }
    let mut ubar = vec![0.0; tau];
    for (v, l) in u.iter().zip(m.labels()) {
        ubar[*l] += v;
    }
    for (x, nk) in ubar.iter_mut().zip(&sizes) {
        *x /= *nk as f64;
    }
    let mut norm = vec![0.0; tau];
    for (v, l) in u.iter().zip(m.labels()) {
        norm[*l] += (v - ubar[*l]).powi(2);
    }
    for x in norm.iter_mut() {
        *x = x.sqrt();
    }
    Ok(u
        .iter()
        .zip(m.labels())
        .map(|(v, l)| {
            let k = *l;
            if stats.b[k] == 0.0 || norm[k] == 0.0 {
                stats.a[k]
            } else {
                stats.a[k] + stats.b[k] * (v - ubar[k]) / norm[k]
            }
        })
        .collect())
}

/// One draw from the law of Y given (M, A = a, B = b).
pub fn conditional_sample<R: Rng + ?Sized>(m: &Membership, stats: &SuffStats, rng: &mut R) -> Result<Vec<f64>> {
    let u: Vec<f64> = (0..m.n()).map(|_| rng.sample(StandardNormal)).collect();
    conditional_from_normals(m, stats, &u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn pythagoras_per_cluster() {
        let y = [0.3, 1.2, -0.4, 2.2, 2.9, 3.1];
        let m = Membership::from_labels(&[0, 0, 0, 1, 1, 1]).unwrap();
        let s = suff_stats(&y, &m).unwrap();
        for k in 0..2 {
            let idx: Vec<f64> = y.iter().zip(m.labels()).filter(|(_, l)| **l == k).map(|(v, _)| *v).collect();
            let sq: f64 = idx.iter().map(|v| v * v).sum();
            assert!((s.b[k].powi(2) + idx.len() as f64 * s.a[k].powi(2) - sq).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_draw_keeps_statistics() {
        let m = Membership::from_labels(&[0, 1, 0, 1, 1, 2]).unwrap();
        let stats = SuffStats { a: vec![1.0, -2.0, 0.5], b: vec![0.7, 1.3, 0.0] };
        let y = conditional_sample(&m, &stats, &mut rng::stream(4, 0)).unwrap();
        let back = suff_stats(&y, &m).unwrap();
        for k in 0..3 {
            assert!((back.a[k] - stats.a[k]).abs() < 1e-12);
            assert!((back.b[k] - stats.b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_with_spread_is_rejected() {
        let m = Membership::from_labels(&[0, 1, 1]).unwrap();
        let stats = SuffStats { a: vec![0.0, 0.0], b: vec![0.5, 1.0] };
        assert!(conditional_sample(&m, &stats, &mut rng::stream(0, 0)).is_err());
    }
}
