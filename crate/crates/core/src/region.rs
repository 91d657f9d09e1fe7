//! Borel regions for the nuclear statistic and their level functions.
//!
//! Quantiles use the lower nearest-rank rule: the p-quantile of a sorted sample of
//! size V is element ceil(p V) (1-indexed, clamped to [1, V]).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, ReproError, Result};

const RANK_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo || (self.hi == self.lo && !(self.lo_closed && self.hi_closed))
    }
}

/// Depth region {t : D(t) >= threshold} for Mahalanobis depth.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthRegion {
    pub center: DVector<f64>,
    pub precision: DMatrix<f64>,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BorelRegion {
    Interval(Interval),
    /// Integer values lo..=hi.
    DiscreteInterval { lo: i64, hi: i64 },
    /// Product of one interval per coordinate.
    Rectangle(Vec<Interval>),
    Depth(DepthRegion),
}

impl BorelRegion {
    pub fn contains(&self, t: &[f64]) -> bool {
        match self {
            BorelRegion::Interval(iv) => t.len() == 1 && iv.contains(t[0]),
            BorelRegion::DiscreteInterval { lo, hi } => {
                t.len() == 1 && t[0] >= *lo as f64 && t[0] <= *hi as f64 && t[0].fract() == 0.0
            }
            BorelRegion::Rectangle(ivs) => t.len() == ivs.len() && ivs.iter().zip(t).all(|(iv, x)| iv.contains(*x)),
            BorelRegion::Depth(r) => t.len() == r.center.len() && depth_with(&r.center, &r.precision, t) >= r.threshold,
        }
    }
}

/// How a Monte Carlo cloud is turned into a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CloudRegion {
    EqualTail,
    /// Shortest integer interval of the empirical pmf of an integer-valued statistic.
    ShortestDiscrete,
    Depth,
}

/// Which side(s) of a scalar statistic are trimmed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tail {
    #[default]
    TwoSided,
    /// Region [q_{1-alpha}, inf).
    Lower,
    /// Region (-inf, q_alpha].
    Upper,
}

/// A family of nested-by-level regions for T at one parameter value.
///
/// `level(t)` is the smallest alpha at which `t` enters the region (clamped to [0, 1]).
pub trait LevelFamily: Send + Sync {
    fn region(&self, alpha: f64) -> Result<BorelRegion>;
    fn level(&self, t: &[f64]) -> f64;
}

/// Simulated values of T(u^s, theta) for s = 1..|V|, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloCloud {
    pub dim: usize,
    pub points: Vec<f64>,
}

impl MonteCarloCloud {
    pub fn scalar(values: Vec<f64>) -> Self {
        Self { dim: 1, points: values }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(ReproError::InvalidInput("cloud rows must share a positive dimension".into()));
        }
        Ok(Self { dim, points: rows.iter().flatten().copied().collect() })
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.points.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.points[s * self.dim..(s + 1) * self.dim]
    }
}

fn rank_index(p: f64, v: usize) -> usize {
    ((p * v as f64 - RANK_EPS).ceil().max(1.0) as usize).min(v)
}

fn sorted_copy(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(ReproError::InsufficientSamples { needed: 1, got: 0 });
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(ReproError::InvalidInput("NaN in samples".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    Ok(s)
}

/// Closed equal-tail interval [q_{(1-alpha)/2}, q_{(1+alpha)/2}].
pub fn equal_tail_region(samples: &[f64], alpha: f64) -> Result<BorelRegion> {
    EmpiricalScalar::new(samples, Tail::TwoSided)?.region(alpha)
}

/// Empirical level family for a scalar statistic.
#[derive(Clone, Debug)]
pub struct EmpiricalScalar {
    sorted: Vec<f64>,
    tail: Tail,
}

impl EmpiricalScalar {
    pub fn new(samples: &[f64], tail: Tail) -> Result<Self> {
        Ok(Self { sorted: sorted_copy(samples)?, tail })
    }

    fn quantile(&self, p: f64) -> f64 {
        self.sorted[rank_index(p, self.sorted.len()) - 1]
    }
}

impl LevelFamily for EmpiricalScalar {
    fn region(&self, alpha: f64) -> Result<BorelRegion> {
        check_alpha(alpha)?;
        let iv = match self.tail {
            Tail::TwoSided => Interval::closed(self.quantile((1.0 - alpha) / 2.0), self.quantile((1.0 + alpha) / 2.0)),
            Tail::Lower => Interval::closed(self.quantile(1.0 - alpha), f64::INFINITY),
            Tail::Upper => Interval::closed(f64::NEG_INFINITY, self.quantile(alpha)),
        };
        Ok(BorelRegion::Interval(iv))
    }

    fn level(&self, t: &[f64]) -> f64 {
        let x = t[0];
        let v = self.sorted.len() as f64;
        let le = self.sorted.partition_point(|s| *s <= x) as f64;
        let ge = (self.sorted.len() - self.sorted.partition_point(|s| *s < x)) as f64;
        let level = match self.tail {
            Tail::TwoSided => 1.0 - 2.0 * le.min(ge) / v,
            Tail::Lower => 1.0 - le / v,
            Tail::Upper => 1.0 - ge / v,
        };
        level.clamp(0.0, 1.0)
    }
}

fn check_pmf(pmf: &[f64]) -> Result<()> {
    if pmf.is_empty() {
        return Err(ReproError::InvalidPmf("empty".into()));
    }
    if let Some(p) = pmf.iter().find(|p| !(**p >= 0.0)) {
        return Err(ReproError::InvalidPmf(format!("negative or NaN mass {p}")));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(ReproError::InvalidPmf(format!("masses sum to {total}")));
    }
    Ok(())
}

/// Shortest index interval (i, j) with pmf[i] + ... + pmf[j] >= alpha; ties go to the smallest i.
///
/// Masses are accumulated left to right, so the returned interval's mass re-summed in that
/// order is at least alpha.
pub fn shortest_discrete_region(pmf: &[f64], alpha: f64) -> Result<(usize, usize)> {
    check_alpha(alpha)?;
    check_pmf(pmf)?;
    shortest_unchecked(pmf, alpha)
        .ok_or_else(|| ReproError::InvalidPmf(format!("no interval reaches mass {alpha}")))
}

fn shortest_unchecked(pmf: &[f64], alpha: f64) -> Option<(usize, usize)> {
    let m = pmf.len();
    let mut best: Option<(usize, usize)> = None;
    for i in 0..m {
        let limit = best.map(|(a, b)| b - a).unwrap_or(m);
        let mut s = 0.0;
        for j in i..m {
            if j - i >= limit {
                break;
            }
            s += pmf[j];
            if s >= alpha {
                best = Some((i, j));
                break;
            }
        }
    }
    best
}

/// Shortest-interval regions for an integer statistic with support offset..offset+len-1.
///
/// Levels order support points by probability: level(k) is the mass of points strictly
/// more probable than k, which keeps p-values valid when shortest intervals are not nested.
#[derive(Clone, Debug)]
pub struct DiscretePmf {
    pmf: Vec<f64>,
    offset: i64,
}

impl DiscretePmf {
    pub fn new(pmf: Vec<f64>, offset: i64) -> Result<Self> {
        check_pmf(&pmf)?;
        Ok(Self { pmf, offset })
    }

    /// Empirical pmf of an integer-valued cloud.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(ReproError::InsufficientSamples { needed: 1, got: 0 });
        }
        if samples.iter().any(|x| x.fract() != 0.0) {
            return Err(ReproError::InvalidInput("discrete cloud must be integer valued".into()));
        }
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) as i64;
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) as i64;
        let mut counts = vec![0usize; (hi - lo + 1) as usize];
        for x in samples {
            counts[(*x as i64 - lo) as usize] += 1;
        }
        let v = samples.len() as f64;
        Ok(Self { pmf: counts.into_iter().map(|c| c as f64 / v).collect(), offset: lo })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Total mass of support points strictly more probable than index y.
    fn mass_above(&self, y: usize) -> f64 {
        let py = self.pmf[y];
        self.pmf.iter().filter(|p| **p > py).fold(0.0, |s, p| s + p)
    }
}

impl LevelFamily for DiscretePmf {
    fn region(&self, alpha: f64) -> Result<BorelRegion> {
        let (i, j) = shortest_discrete_region(&self.pmf, alpha)?;
        Ok(BorelRegion::DiscreteInterval { lo: self.offset + i as i64, hi: self.offset + j as i64 })
    }

    fn level(&self, t: &[f64]) -> f64 {
        let x = t[0];
        if x.fract() != 0.0 {
            return 1.0;
        }
        let k = x as i64 - self.offset;
        if k < 0 || k as usize >= self.pmf.len() {
            return 1.0;
        }
        self.mass_above(k as usize).clamp(0.0, 1.0)
    }
}

/// Mahalanobis depth 1 / (1 + (t - m)' S^{-1} (t - m)) relative to a cloud.
pub fn mahalanobis_depth(cloud: &MonteCarloCloud, t: &[f64]) -> Result<f64> {
    let c = DepthCloud::new(cloud)?;
    if t.len() != cloud.dim {
        return Err(ReproError::InvalidInput("depth point has the wrong dimension".into()));
    }
    Ok(c.depth(t))
}

/// Region {t : F_{V|D}(D(t)) >= 1 - alpha} with F the empirical cdf of in-cloud depths.
pub fn depth_region(cloud: &MonteCarloCloud, alpha: f64) -> Result<BorelRegion> {
    DepthCloud::new(cloud)?.region(alpha)
}

fn depth_with(center: &DVector<f64>, precision: &DMatrix<f64>, t: &[f64]) -> f64 {
    let q = center.len();
    let mut quad = 0.0;
    for a in 0..q {
        let da = t[a] - center[a];
        let mut row = 0.0;
        for b in 0..q {
            row += precision[(a, b)] * (t[b] - center[b]);
        }
        quad += da * row;
    }
    1.0 / (1.0 + quad)
}

/// Depth level family: sample mean and ridge-regularised inverse covariance of a cloud.
#[derive(Clone, Debug)]
pub struct DepthCloud {
    center: DVector<f64>,
    precision: DMatrix<f64>,
    sorted_depths: Vec<f64>,
}

impl DepthCloud {
    pub fn new(cloud: &MonteCarloCloud) -> Result<Self> {
        let v = cloud.len();
        let q = cloud.dim;
        if v < 2 {
            return Err(ReproError::InsufficientSamples { needed: 2, got: v });
        }
        if cloud.points.iter().any(|x| !x.is_finite()) {
            return Err(ReproError::InvalidInput("non-finite value in cloud".into()));
        }
        let mut center = DVector::zeros(q);
        for s in 0..v {
            for a in 0..q {
                center[a] += cloud.row(s)[a];
            }
        }
        center /= v as f64;
        let mut cov = DMatrix::zeros(q, q);
        for s in 0..v {
            let r = cloud.row(s);
            for a in 0..q {
                for b in 0..q {
                    cov[(a, b)] += (r[a] - center[a]) * (r[b] - center[b]);
                }
            }
        }
        cov /= (v - 1) as f64;
        let trace = cov.trace();
        if !(trace > 0.0) {
            return Err(ReproError::DegenerateCovariance);
        }
        let ridge = 1e-10 * trace / q as f64;
        for a in 0..q {
            cov[(a, a)] += ridge;
        }
        let precision = cov.cholesky().ok_or(ReproError::DegenerateCovariance)?.inverse();
        let mut sorted_depths: Vec<f64> = (0..v).map(|s| depth_with(&center, &precision, cloud.row(s))).collect();
        sorted_depths.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { center, precision, sorted_depths })
    }

    pub fn depth(&self, t: &[f64]) -> f64 {
        depth_with(&self.center, &self.precision, t)
    }

    /// Empirical cdf of in-cloud depths at D(t).
    pub fn depth_cdf(&self, t: &[f64]) -> f64 {
        let d = self.depth(t);
        self.sorted_depths.partition_point(|x| *x <= d) as f64 / self.sorted_depths.len() as f64
    }
}

impl LevelFamily for DepthCloud {
    fn region(&self, alpha: f64) -> Result<BorelRegion> {
        check_alpha(alpha)?;
        let v = self.sorted_depths.len();
        let k = ((1.0 - alpha) * v as f64 - RANK_EPS).ceil().max(0.0) as usize;
        let threshold = if k == 0 { 0.0 } else { self.sorted_depths[k.min(v) - 1] };
        Ok(BorelRegion::Depth(DepthRegion { center: self.center.clone(), precision: self.precision.clone(), threshold }))
    }

    fn level(&self, t: &[f64]) -> f64 {
        (1.0 - self.depth_cdf(t)).clamp(0.0, 1.0)
    }
}

/// Build the level family of a cloud according to `kind`.
pub fn cloud_family(cloud: &MonteCarloCloud, kind: CloudRegion, tail: Tail) -> Result<Box<dyn LevelFamily>> {
    match kind {
        CloudRegion::EqualTail => {
            if cloud.dim != 1 {
                return Err(ReproError::Unsupported("equal-tail regions need a scalar statistic".into()));
            }
            Ok(Box::new(EmpiricalScalar::new(&cloud.points, tail)?))
        }
        CloudRegion::ShortestDiscrete => {
            if cloud.dim != 1 {
                return Err(ReproError::Unsupported("discrete regions need a scalar statistic".into()));
            }
            Ok(Box::new(DiscretePmf::from_samples(&cloud.points)?))
        }
        CloudRegion::Depth => Ok(Box::new(DepthCloud::new(cloud)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_tail_on_one_to_hundred() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(equal_tail_region(&s, 0.9).unwrap(), BorelRegion::Interval(Interval::closed(5.0, 95.0)));
    }

    #[test]
    fn equal_tail_two_point_sample() {
        assert_eq!(equal_tail_region(&[0.0, 1.0], 0.99).unwrap(), BorelRegion::Interval(Interval::closed(0.0, 1.0)));
    }

    #[test]
    fn equal_tail_rejects_bad_alpha() {
        assert!(matches!(equal_tail_region(&[1.0, 2.0], 1.0), Err(ReproError::InvalidAlpha(_))));
        assert!(equal_tail_region(&[], 0.5).is_err());
    }

    #[test]
    fn shortest_binomial_three_half() {
        let pmf = [0.125, 0.375, 0.375, 0.125];
        assert_eq!(shortest_discrete_region(&pmf, 0.95).unwrap(), (0, 3));
        assert_eq!(shortest_discrete_region(&pmf, 0.7).unwrap(), (1, 2));
    }

    #[test]
    fn shortest_rejects_negative_mass() {
        assert!(matches!(shortest_discrete_region(&[0.5, -0.1, 0.6], 0.5), Err(ReproError::InvalidPmf(_))));
    }

    #[test]
    fn scalar_level_extremes() {
        let f = EmpiricalScalar::new(&(1..=101).map(f64::from).collect::<Vec<_>>(), Tail::TwoSided).unwrap();
        assert_eq!(f.level(&[51.0]), 0.0);
        assert_eq!(f.level(&[500.0]), 1.0);
        assert_eq!(f.level(&[-500.0]), 1.0);
    }

    #[test]
    fn discrete_level_at_mode_and_tail() {
        let f = DiscretePmf::new(vec![0.125, 0.375, 0.375, 0.125], 0).unwrap();
        assert_eq!(f.level(&[1.0]), 0.0);
        assert_eq!(f.level(&[2.0]), 0.0);
        assert_eq!(f.level(&[0.0]), 0.75);
        assert_eq!(f.level(&[3.0]), 0.75);
        assert_eq!(f.level(&[7.0]), 1.0);
    }

    #[test]
    fn depth_region_of_symmetric_cloud() {
        let rows: Vec<Vec<f64>> = (0..400)
            .map(|i| {
                let a = i as f64 * 0.1;
                vec![a.cos() * (1.0 + (i % 7) as f64), a.sin() * (1.0 + (i % 5) as f64)]
            })
            .collect();
        let cloud = MonteCarloCloud::from_rows(&rows).unwrap();
        let r = depth_region(&cloud, 0.9).unwrap();
        let inside = rows.iter().filter(|t| r.contains(t)).count();
        assert!(inside as f64 >= 0.9 * 400.0);
        assert!(r.contains(&[0.0, 0.0]));
        assert!(!r.contains(&[100.0, 100.0]));
    }

    #[test]
    fn constant_cloud_is_degenerate() {
        let cloud = MonteCarloCloud::scalar(vec![2.0; 10]);
        assert_eq!(DepthCloud::new(&cloud).unwrap_err(), ReproError::DegenerateCovariance);
    }
}
