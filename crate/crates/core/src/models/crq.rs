//! Censored quantile regression y_i = max(0, x_i' beta + e_i) with ζ-quantile coefficients theta.
//!
//! Inference uses the estimating equation
//! g = sum_i x_i 1(x_i' theta > 0) {1(y_i - x_i' theta <= 0) - 1(u_i <= zeta)}, u_i ~ U(0, 1),
//! and T(u, theta) = {sum x x' 1(x' theta > 0)}^-1 sum x 1(x' theta > 0) 1(u_i <= zeta).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::engine::{Axis, GridSpec};
use crate::error::{ReproError, Result};
use crate::model::{AuxDistribution, Feasibility, GenerativeModel, NuclearMapping, ParameterPoint, ParameterSchema};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::region::MonteCarloCloud;
use crate::rng;

#[derive(Clone, Debug)]
pub struct CrqModel {
    x: Vec<Vec<f64>>,
    p: usize,
    zeta: f64,
    schema: ParameterSchema,
}

struct ActiveGram {
    active: Vec<usize>,
    chol: Cholesky<f64, Dyn>,
}

impl CrqModel {
    /// `x` holds one design row per observation, intercept included.
    pub fn new(x: Vec<Vec<f64>>, zeta: f64) -> Result<Self> {
        let p = x.first().map(|r| r.len()).unwrap_or(0);
        if p == 0 || x.iter().any(|r| r.len() != p) {
            return Err(ReproError::InvalidInput("design rows must share a positive length".into()));
        }
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(ReproError::InvalidInput(format!("quantile level {zeta} outside (0, 1)")));
        }
        let labels: Vec<String> = (0..p).map(|k| format!("theta{k}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Ok(Self { x, p, zeta, schema: ParameterSchema::real_line(&refs) })
    }

    pub fn design(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    fn index(&self, i: usize, theta: &[f64]) -> f64 {
        self.x[i].iter().zip(theta).map(|(a, b)| a * b).sum()
    }

    fn gram(&self, theta: &[f64]) -> Option<ActiveGram> {
        let active: Vec<usize> = (0..self.x.len()).filter(|&i| self.index(i, theta) > 0.0).collect();
        if active.len() < self.p {
            return None;
        }
        let mut g = DMatrix::zeros(self.p, self.p);
        for &i in &active {
            for a in 0..self.p {
                for b in 0..self.p {
                    g[(a, b)] += self.x[i][a] * self.x[i][b];
                }
            }
        }
        let scale = g.trace() / self.p as f64;
        let chol = g.cholesky()?;
        let l = chol.l_dirty();
        if (0..self.p).any(|k| !(l[(k, k)] * l[(k, k)] > 1e-10 * scale)) {
            return None;
        }
        Some(ActiveGram { active, chol })
    }

    fn solve_indicator(&self, g: &ActiveGram, hit: impl Fn(usize) -> bool) -> Vec<f64> {
        let mut rhs = DVector::zeros(self.p);
        for &i in &g.active {
            if hit(i) {
                for a in 0..self.p {
                    rhs[a] += self.x[i][a];
                }
            }
        }
        g.chol.solve(&rhs).iter().copied().collect()
    }
}

impl GenerativeModel for CrqModel {
    fn schema(&self) -> &ParameterSchema {
        &self.schema
    }

    fn data_len(&self) -> usize {
        self.x.len()
    }

    fn aux_len(&self) -> usize {
        self.x.len()
    }

    fn aux_distribution(&self) -> AuxDistribution {
        AuxDistribution::Uniform01
    }

    fn is_explicit(&self) -> bool {
        false
    }

    fn residual_raw(&self, z: &[f64], theta: &ParameterPoint, u: &[f64]) -> Result<Vec<f64>> {
        let th = &theta.continuous;
        let mut g = vec![0.0; self.p];
        for i in 0..self.x.len() {
            let xb = self.index(i, th);
            if xb > 0.0 {
                let d = f64::from(u8::from(z[i] - xb <= 0.0)) - f64::from(u8::from(u[i] <= self.zeta));
                for a in 0..self.p {
                    g[a] += self.x[i][a] * d;
                }
            }
        }
        Ok(g)
    }
}

/// T(u, theta) of dimension p, paired with depth regions.
#[derive(Clone, Copy, Debug)]
pub struct CrqMapping {
    pub p: usize,
}

impl CrqMapping {
    pub fn for_model(model: &CrqModel) -> Self {
        Self { p: model.p }
    }
}

impl NuclearMapping<CrqModel> for CrqMapping {
    fn dim(&self) -> usize {
        self.p
    }

    fn eval(&self, model: &CrqModel, u: &[f64], theta: &ParameterPoint) -> Result<Vec<f64>> {
        let g = model.gram(&theta.continuous).ok_or(ReproError::DegenerateCovariance)?;
        Ok(model.solve_indicator(&g, |i| u[i] <= model.zeta))
    }

    fn eval_cloud(&self, model: &CrqModel, draws: &[Vec<f64>], theta: &ParameterPoint) -> Result<MonteCarloCloud> {
        let g = model.gram(&theta.continuous).ok_or(ReproError::DegenerateCovariance)?;
        let mut points = Vec::with_capacity(draws.len() * model.p);
        for u in draws {
            points.extend(model.solve_indicator(&g, |i| u[i] <= model.zeta));
        }
        Ok(MonteCarloCloud { dim: model.p, points })
    }

    fn feasibility(&self, model: &CrqModel, theta: &ParameterPoint, z_obs: &[f64]) -> Result<Feasibility> {
        let th = &theta.continuous;
        match model.gram(th) {
            None => Ok(Feasibility::Infeasible),
            Some(g) => Ok(Feasibility::Forced(model.solve_indicator(&g, |i| z_obs[i] - model.index(i, th) <= 0.0))),
        }
    }
}

/// Error laws used in simulation studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ErrorLaw {
    /// N(0, 1).
    Normal,
    /// N(0, 1) with probability 0.75, otherwise N(0, 2) (variance 2).
    NormalMixture,
    /// (1 + 0.15 x_2) N(0, 1), with x_2 the last design column.
    Heteroscedastic,
}

const MIX_WEIGHT: f64 = 0.75;
const HETERO_SLOPE: f64 = 0.15;

impl ErrorLaw {
    pub fn sample<R: Rng + ?Sized>(&self, x_row: &[f64], rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        match self {
            ErrorLaw::Normal => z,
            ErrorLaw::NormalMixture => {
                if rng::open01(rng) < MIX_WEIGHT {
                    z
                } else {
                    z * 2f64.sqrt()
                }
            }
            ErrorLaw::Heteroscedastic => (1.0 + HETERO_SLOPE * x_row[x_row.len() - 1]) * z,
        }
    }

    /// zeta-quantile of the error for a unit-scale observation.
    pub fn quantile(&self, zeta: f64) -> f64 {
        let std = Normal::standard();
        match self {
            ErrorLaw::Normal | ErrorLaw::Heteroscedastic => std.inverse_cdf(zeta),
            ErrorLaw::NormalMixture => {
                let cdf = |e: f64| MIX_WEIGHT * std.cdf(e) + (1.0 - MIX_WEIGHT) * std.cdf(e / 2f64.sqrt());
                let (mut lo, mut hi) = (-20.0, 20.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if cdf(mid) < zeta {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Quantile-regression coefficients theta(zeta) implied by beta under this law.
    pub fn true_coefficients(&self, beta: &[f64], zeta: f64) -> Vec<f64> {
        let q = self.quantile(zeta);
        let mut t = beta.to_vec();
        t[0] += q;
        if *self == ErrorLaw::Heteroscedastic {
            let last = t.len() - 1;
            t[last] += HETERO_SLOPE * q;
        }
        t
    }
}

/// n rows of (1, x1 ~ Bernoulli(0.5), x2 ~ N(0, 1)).
pub fn crq_design<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let x1 = if rng::open01(rng) < 0.5 { 1.0 } else { 0.0 };
            let x2: f64 = rng.sample(StandardNormal);
            vec![1.0, x1, x2]
        })
        .collect()
}

pub fn simulate_crq<R: Rng + ?Sized>(x: &[Vec<f64>], beta: &[f64], law: ErrorLaw, rng: &mut R) -> Vec<f64> {
    x.iter()
        .map(|row| {
            let xb: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            (xb + law.sample(row, rng)).max(0.0)
        })
        .collect()
}

/// Censored quantile-regression fit with a sandwich standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct PilotFit {
    pub theta: Vec<f64>,
    pub se: Vec<f64>,
}

fn check_loss(r: f64, zeta: f64) -> f64 {
    if r >= 0.0 {
        zeta * r
    } else {
        (zeta - 1.0) * r
    }
}

/// Minimises sum rho_zeta(y_i - max(0, x_i' theta)) from a least-squares start.
pub fn pilot_fit(model: &CrqModel, y: &[f64]) -> Result<PilotFit> {
    let p = model.p;
    let n = model.x.len();
    let mut xtx = DMatrix::zeros(p, p);
    let mut xty = DVector::zeros(p);
    for i in 0..n {
        for a in 0..p {
            xty[a] += model.x[i][a] * y[i];
            for b in 0..p {
                xtx[(a, b)] += model.x[i][a] * model.x[i][b];
            }
        }
    }
    let start: Vec<f64> = xtx
        .clone()
        .cholesky()
        .ok_or(ReproError::DegenerateCovariance)?
        .solve(&xty)
        .iter()
        .copied()
        .collect();
    let zeta = model.zeta;
    let objective = |th: &[f64]| -> f64 { (0..n).map(|i| check_loss(y[i] - model.index(i, th).max(0.0), zeta)).sum() };
    let spread = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    let opts = NelderMeadOptions { max_evals: 400 * p, tol: 1e-8, step: vec![0.25 * spread; p], stop_below: None };
    let lo = vec![-1e6; p];
    let hi = vec![1e6; p];
    let mut best = nelder_mead(objective, &start, &lo, &hi, &opts);
    for _ in 0..3 {
        let again = nelder_mead(objective, &best.x, &lo, &hi, &opts);
        if again.value < best.value - 1e-12 {
            best = again;
        } else {
            break;
        }
    }
    let theta = best.x;
    let g = model.gram(&theta).ok_or(ReproError::DegenerateCovariance)?;
    let resid: Vec<f64> = g.active.iter().map(|&i| y[i] - model.index(i, &theta)).collect();
    let m = resid.len() as f64;
    let mean = resid.iter().sum::<f64>() / m;
    let sd = (resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0)).sqrt().max(1e-8);
    let h = 1.06 * sd * m.powf(-0.2);
    let dens = resid.iter().map(|r| (-(r / h).powi(2) / 2.0).exp()).sum::<f64>() / (m * h * (2.0 * std::f64::consts::PI).sqrt());
    let inv = g.chol.inverse();
    let se = (0..p).map(|k| (zeta * (1.0 - zeta) * inv[(k, k)]).sqrt() / dens.max(1e-8)).collect();
    Ok(PilotFit { theta, se })
}

/// Box grid centred at the pilot estimate with half-widths `mult` pilot standard errors.
pub fn crq_grid(pilot: &PilotFit, mult: f64, points_per_axis: usize) -> Result<GridSpec> {
    if points_per_axis < 2 {
        return Err(ReproError::InvalidGrid("need at least two points per axis".into()));
    }
    let continuous = pilot
        .theta
        .iter()
        .zip(&pilot.se)
        .map(|(t, s)| {
            let half = mult * s;
            Axis::new(t - half, t + half, 2.0 * half / (points_per_axis - 1) as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridSpec { discrete: Vec::new(), continuous })
}
