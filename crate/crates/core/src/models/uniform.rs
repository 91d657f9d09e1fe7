//! Uniform location Y_i = theta + U_i, U_i ~ U(-1, 1).
//!
//! Two nuclear statistics are offered: the mean of U, calibrated by the Irwin-Hall law,
//! and the pair (min U, max U).

use statrs::function::factorial::binomial;

use crate::error::{check_alpha, ReproError, Result};
use crate::model::{AuxDistribution, Feasibility, GenerativeModel, NuclearMapping, ParameterPoint, ParameterSchema};
use crate::region::{BorelRegion, Interval, LevelFamily};

/// Largest n for which the Irwin-Hall alternating sum is evaluated.
pub const IRWIN_HALL_MAX_N: usize = 20;

#[derive(Clone, Debug)]
pub struct UniformLocationModel {
    n: usize,
    schema: ParameterSchema,
}

impl UniformLocationModel {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(ReproError::InvalidInput("sample size must be positive".into()));
        }
        Ok(Self { n, schema: ParameterSchema::real_line(&["theta"]) })
    }
}

impl GenerativeModel for UniformLocationModel {
    fn schema(&self) -> &ParameterSchema {
        &self.schema
    }

    fn data_len(&self) -> usize {
        self.n
    }

    fn aux_len(&self) -> usize {
        self.n
    }

    fn aux_distribution(&self) -> AuxDistribution {
        AuxDistribution::UniformSymmetric
    }

    fn is_explicit(&self) -> bool {
        true
    }

    fn generate_raw(&self, theta: &ParameterPoint, u: &[f64]) -> Result<Vec<f64>> {
        let t = theta.continuous[0];
        Ok(u.iter().map(|x| t + x).collect())
    }
}

fn extremes(y: &[f64]) -> (f64, f64) {
    y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

/// Parameters compatible with the data: (y_(n) - 1, y_(1) + 1).
pub fn feasible_interval(y: &[f64]) -> Interval {
    let (lo, hi) = extremes(y);
    Interval::open(hi - 1.0, lo + 1.0)
}

/// CDF of the sum of n independent U(0, 1) variables.
pub fn irwin_hall_cdf(n: usize, x: f64) -> Result<f64> {
    if n == 0 || n > IRWIN_HALL_MAX_N {
        return Err(ReproError::Unsupported(format!("Irwin-Hall order {n} outside 1..={IRWIN_HALL_MAX_N}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    if x >= nf {
        return Ok(1.0);
    }
    // Evaluate on the nearer half and reflect to limit cancellation.
    let (z, flip) = if x > nf / 2.0 { (nf - x, true) } else { (x, false) };
    let mut s = 0.0;
    for k in 0..=(z.floor() as usize) {
        let term = binomial(n as u64, k as u64) * (z - k as f64).powi(n as i32);
        s += if k % 2 == 0 { term } else { -term };
    }
    let f = (s / statrs::function::factorial::factorial(n as u64)).clamp(0.0, 1.0);
    Ok(if flip { 1.0 - f } else { f })
}

pub fn irwin_hall_quantile(n: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ReproError::InvalidInput(format!("probability {p} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (0.0, n as f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if irwin_hall_cdf(n, mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// T(u) = mean of u.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanStatistic;

/// Law of the mean of n U(-1, 1) variables via s = n (t + 1) / 2 ~ Irwin-Hall(n).
#[derive(Clone, Copy, Debug)]
pub struct IrwinHallMean {
    pub n: usize,
}

impl LevelFamily for IrwinHallMean {
    fn region(&self, alpha: f64) -> Result<BorelRegion> {
        check_alpha(alpha)?;
        let q = irwin_hall_quantile(self.n, (1.0 + alpha) / 2.0)?;
        let half = 2.0 * q / self.n as f64 - 1.0;
        Ok(BorelRegion::Interval(Interval::open(-half, half)))
    }

    fn level(&self, t: &[f64]) -> f64 {
        let s = self.n as f64 * (t[0] + 1.0) / 2.0;
        match irwin_hall_cdf(self.n, s) {
            Ok(f) => (2.0 * f - 1.0).abs(),
            Err(_) => f64::NAN,
        }
    }
}

impl NuclearMapping<UniformLocationModel> for MeanStatistic {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, _model: &UniformLocationModel, u: &[f64], _theta: &ParameterPoint) -> Result<Vec<f64>> {
        Ok(vec![mean(u)])
    }

    fn theta_free(&self) -> bool {
        true
    }

    fn feasibility(&self, _model: &UniformLocationModel, theta: &ParameterPoint, z_obs: &[f64]) -> Result<Feasibility> {
        let t = theta.continuous[0];
        if feasible_interval(z_obs).contains(t) {
            Ok(Feasibility::Forced(vec![mean(z_obs) - t]))
        } else {
            Ok(Feasibility::Infeasible)
        }
    }

    fn data_statistic(&self, _model: &UniformLocationModel, z: &[f64], theta: &ParameterPoint) -> Option<Result<Vec<f64>>> {
        Some(Ok(vec![mean(z) - theta.continuous[0]]))
    }

    fn exact_law(&self, model: &UniformLocationModel, _theta: &ParameterPoint) -> Option<Result<Box<dyn LevelFamily>>> {
        if model.n > IRWIN_HALL_MAX_N {
            return None;
        }
        Some(Ok(Box::new(IrwinHallMean { n: model.n })))
    }
}

/// Intervals produced from one uniform-location sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformSets {
    /// Irwin-Hall (1 + alpha) / 2 quantile.
    pub q: f64,
    /// (ybar - 2q/n + 1, ybar + 2q/n - 1).
    pub test: Interval,
    pub feasible: Interval,
    /// Intersection of `test` and `feasible`; may be empty.
    pub repro: Interval,
}

pub fn uniform_irwin_hall_set(y: &[f64], alpha: f64) -> Result<UniformSets> {
    check_alpha(alpha)?;
    if y.is_empty() {
        return Err(ReproError::InvalidInput("empty sample".into()));
    }
    let n = y.len();
    let q = irwin_hall_quantile(n, (1.0 + alpha) / 2.0)?;
    let half = 2.0 * q / n as f64 - 1.0;
    let ybar = mean(y);
    let test = Interval::open(ybar - half, ybar + half);
    let feasible = feasible_interval(y);
    let repro = Interval::open(test.lo.max(feasible.lo), test.hi.min(feasible.hi));
    Ok(UniformSets { q, test, feasible, repro })
}

/// P(U_(1) < -c, U_(n) > c) = 1 - 2((1 + c)/2)^n + max(c, 0)^n for c in (-1, 1).
fn box_coverage(n: usize, c: f64) -> f64 {
    1.0 - 2.0 * ((1.0 + c) / 2.0).powi(n as i32) + c.max(0.0).powi(n as i32)
}

/// Root equation 2((1 + c)/2)^n - max(c, 0)^n - (1 - alpha).
///
/// For c in (0, 1) this is (c + 1)^n - 2^(n-1) c^n - 2^(n-1)(1 - alpha) divided by 2^(n-1).
pub fn c_alpha_residual(n: usize, alpha: f64, c: f64) -> f64 {
    box_coverage(n, c) - alpha
}

/// The c in (-1, 1) with P(U_(1) < -c, U_(n) > c) = alpha.
///
/// The root is negative when alpha exceeds 1 - 2^(1-n), e.g. n = 5 at alpha = 0.95.
pub fn c_alpha(n: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(ReproError::NoRoot("empty sample".into()));
    }
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if box_coverage(n, mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// T(u) = (min u, max u).
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtremesStatistic;

/// Rectangle (-1, -c_alpha) x (c_alpha, 1) for (min U, max U).
#[derive(Clone, Copy, Debug)]
pub struct OrderStatBox {
    pub n: usize,
}

impl LevelFamily for OrderStatBox {
    fn region(&self, alpha: f64) -> Result<BorelRegion> {
        let c = c_alpha(self.n, alpha)?;
        Ok(BorelRegion::Rectangle(vec![Interval::open(-1.0, -c), Interval::open(c, 1.0)]))
    }

    fn level(&self, t: &[f64]) -> f64 {
        let m = (-t[0]).min(t[1]);
        if m <= -1.0 {
            1.0
        } else if m >= 1.0 {
            0.0
        } else {
            box_coverage(self.n, m).clamp(0.0, 1.0)
        }
    }
}

impl NuclearMapping<UniformLocationModel> for ExtremesStatistic {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, _model: &UniformLocationModel, u: &[f64], _theta: &ParameterPoint) -> Result<Vec<f64>> {
        let (lo, hi) = extremes(u);
        Ok(vec![lo, hi])
    }

    fn theta_free(&self) -> bool {
        true
    }

    fn feasibility(&self, _model: &UniformLocationModel, theta: &ParameterPoint, z_obs: &[f64]) -> Result<Feasibility> {
        let t = theta.continuous[0];
        if feasible_interval(z_obs).contains(t) {
            let (lo, hi) = extremes(z_obs);
            Ok(Feasibility::Forced(vec![lo - t, hi - t]))
        } else {
            Ok(Feasibility::Infeasible)
        }
    }

    fn exact_law(&self, model: &UniformLocationModel, _theta: &ParameterPoint) -> Option<Result<Box<dyn LevelFamily>>> {
        Some(Ok(Box::new(OrderStatBox { n: model.n })))
    }
}

/// (max{y_(1) + c, y_(n) - 1}, min{y_(n) - c, y_(1) + 1}); may be empty.
pub fn order_stat_set(y: &[f64], alpha: f64) -> Result<Interval> {
    let c = c_alpha(y.len(), alpha)?;
    let (lo, hi) = extremes(y);
    Ok(Interval::open((lo + c).max(hi - 1.0), (hi - c).min(lo + 1.0)))
}

/// Likelihood-ratio interval {theta : max |y_i - theta| < alpha^(1/n)}.
pub fn lrt_interval(y: &[f64], alpha: f64) -> Result<Interval> {
    check_alpha(alpha)?;
    if y.is_empty() {
        return Err(ReproError::InvalidInput("empty sample".into()));
    }
    let a = alpha.powf(1.0 / y.len() as f64);
    let (lo, hi) = extremes(y);
    Ok(Interval::open(hi - a, lo + a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irwin_hall_quantile_n3() {
        let q = irwin_hall_quantile(3, 0.975).unwrap();
        assert!((q - 2.4687).abs() < 5e-5, "{q}");
    }

    #[test]
    fn worked_uniform_sample() {
        let s = uniform_irwin_hall_set(&[-0.430, 0.049, 0.371], 0.95).unwrap();
        assert!((s.repro.lo + 0.629).abs() < 5e-4);
        assert!((s.repro.hi - 0.570).abs() < 5e-4);
        let half = 2.0 * s.q / 3.0 - 1.0;
        assert!((half - 0.6458).abs() < 1e-4);
    }

    #[test]
    fn c_alpha_solves_its_equation() {
        for n in [1, 2, 5, 20, 200] {
            let c = c_alpha(n, 0.95).unwrap();
            assert!(c > -1.0 && c < 1.0);
            assert!(c_alpha_residual(n, 0.95, c).abs() < 1e-12);
        }
        assert!(c_alpha(5, 0.95).unwrap() < 0.0);
        assert!(c_alpha(20, 0.95).unwrap() > 0.0);
    }

    #[test]
    fn order_box_level_matches_region() {
        let fam = OrderStatBox { n: 5 };
        let c = c_alpha(5, 0.9).unwrap();
        let inside = [-(c + 0.01), c + 0.02];
        assert!(fam.region(0.9).unwrap().contains(&inside));
        assert!(fam.level(&inside) < 0.9);
        let outside = [-(c - 0.01), 0.5];
        assert!(!fam.region(0.9).unwrap().contains(&outside));
        assert!(fam.level(&outside) > 0.9);
    }
}
