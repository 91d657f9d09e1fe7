use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{ReproError, Result};

/// Hard cluster assignment of n observations into tau non-empty clusters.
///
/// Stored as labels in canonical form: clusters are numbered by first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Membership {
    labels: Vec<usize>,
    tau: usize,
}

impl Membership {
    /// Canonicalise arbitrary labels; empty label values are dropped.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(ReproError::InvalidMembership("no observations".into()));
        }
        let mut map: HashMap<usize, usize> = HashMap::new();
        let canon = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Ok(Self { labels: canon, tau: map.len() })
    }

    /// Build from an n x tau 0/1 matrix given row by row.
    pub fn from_matrix(rows: &[Vec<u8>]) -> Result<Self> {
        let tau = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut labels = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != tau || r.iter().filter(|v| **v == 1).count() != 1 || r.iter().any(|v| *v > 1) {
                return Err(ReproError::InvalidMembership(format!("row {i} must hold exactly one 1")));
            }
            labels.push(r.iter().position(|v| *v == 1).expect("one entry"));
        }
        let m = Self::from_labels(&labels)?;
        if m.tau != tau {
            return Err(ReproError::InvalidMembership("empty cluster column".into()));
        }
        Ok(m)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.tau];
        for l in &self.labels {
            s[*l] += 1;
        }
        s
    }

    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        self.labels
            .iter()
            .map(|l| (0..self.tau).map(|k| u8::from(k == *l)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_by_first_occurrence() {
        let m = Membership::from_labels(&[2, 2, 0, 5, 0]).unwrap();
        assert_eq!(m.labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(m.tau(), 3);
        assert_eq!(m.sizes(), vec![2, 2, 1]);
        assert_eq!(Membership::from_matrix(&m.to_matrix()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(Membership::from_matrix(&[vec![1, 1], vec![0, 1]]).is_err());
        assert!(Membership::from_matrix(&[vec![1, 0], vec![1, 0]]).is_err());
    }
}
