use repro_core::mixture::{Membership, MixtureModel};
use repro_core::model::{
    draw_auxiliary, draw_auxiliary_from, feasible_stat, generate, residual, AuxDistribution, AuxiliaryDraw, Feasibility, GenerativeModel,
    NuclearMapping, ParameterPoint,
};
use repro_core::models::binomial::{BinomialModel, SuccessCount};
use repro_core::models::quantile::QuantileModel;
use repro_core::models::uniform::{ExtremesStatistic, MeanStatistic, UniformLocationModel};
use repro_core::rng;
use repro_core::ReproError;

struct NormalModel {
    n: usize,
    schema: repro_core::model::ParameterSchema,
}

impl GenerativeModel for NormalModel {
    fn schema(&self) -> &repro_core::model::ParameterSchema {
        &self.schema
    }
    fn data_len(&self) -> usize {
        self.n
    }
    fn aux_len(&self) -> usize {
        self.n
    }
    fn aux_distribution(&self) -> AuxDistribution {
        AuxDistribution::StandardNormal
    }
    fn is_explicit(&self) -> bool {
        true
    }
    fn generate_raw(&self, theta: &ParameterPoint, u: &[f64]) -> repro_core::Result<Vec<f64>> {
        Ok(u.iter().map(|x| theta.continuous[0] + x).collect())
    }
}

fn normal(n: usize) -> NormalModel {
    NormalModel { n, schema: repro_core::model::ParameterSchema::real_line(&["mu"]) }
}

#[test]
fn draws_are_deterministic_per_seed() {
    let m = BinomialModel::new(1).unwrap();
    assert_eq!(draw_auxiliary(&m, 42), draw_auxiliary(&m, 42));
    assert_ne!(draw_auxiliary(&m, 42), draw_auxiliary(&m, 43));
    let u = UniformLocationModel::new(50).unwrap();
    assert_eq!(draw_auxiliary(&u, 7).values, draw_auxiliary(&u, 7).values);
}

#[test]
fn normal_draw_mean_is_near_zero() {
    let r = 10_000;
    let d = draw_auxiliary(&normal(r), 5);
    let mean: f64 = d.values.iter().sum::<f64>() / r as f64;
    assert!(mean.abs() < 4.0 / (r as f64).sqrt(), "{mean}");
}

#[test]
fn bernoulli_draw_is_binary() {
    let m = QuantileModel::new(20, 0.5).unwrap();
    let d = draw_auxiliary(&m, 3);
    assert_eq!(d.values.len(), 20);
    assert!(d.values.iter().all(|v| *v == 0.0 || *v == 1.0));
}

#[test]
fn uniform_draws_avoid_endpoints() {
    let m = BinomialModel::new(5000).unwrap();
    let d = draw_auxiliary(&m, 1);
    assert!(d.values.iter().all(|v| *v > 0.0 && *v < 1.0));
}

#[test]
fn generate_worked_cases() {
    let b = BinomialModel::new(3).unwrap();
    let u = AuxiliaryDraw { dist: AuxDistribution::Uniform01, values: vec![0.2, 0.7, 0.4] };
    assert_eq!(generate(&b, &ParameterPoint::scalar(0.5), &u).unwrap(), vec![2.0]);

    let ul = UniformLocationModel::new(2).unwrap();
    let u = AuxiliaryDraw { dist: AuxDistribution::UniformSymmetric, values: vec![0.5, -0.3] };
    assert_eq!(generate(&ul, &ParameterPoint::scalar(0.0), &u).unwrap(), vec![0.5, -0.3]);

    let mm = MixtureModel::new(Membership::from_labels(&[0; 6]).unwrap());
    let u = AuxiliaryDraw { dist: AuxDistribution::StandardNormal, values: vec![0.0; 6] };
    assert_eq!(generate(&mm, &MixtureModel::theta(&[2.0], &[1.0]), &u).unwrap(), vec![2.0; 6]);
}

#[test]
fn generate_rejects_bad_inputs() {
    let b = BinomialModel::new(3).unwrap();
    let short = AuxiliaryDraw { dist: AuxDistribution::Uniform01, values: vec![0.2] };
    assert!(matches!(generate(&b, &ParameterPoint::scalar(0.5), &short), Err(ReproError::InvalidAuxiliary(_))));
    let q = QuantileModel::new(3, 0.5).unwrap();
    let u = AuxiliaryDraw { dist: AuxDistribution::Bernoulli(0.5), values: vec![1.0, 0.0, 1.0] };
    assert!(matches!(generate(&q, &ParameterPoint::scalar(0.0), &u), Err(ReproError::ImplicitModel)));
}

#[test]
fn quantile_residual_cases() {
    let m = QuantileModel::new(3, 0.5).unwrap();
    let y = [1.0, 2.0, 3.0];
    let two = AuxiliaryDraw { dist: AuxDistribution::Bernoulli(0.5), values: vec![1.0, 1.0, 0.0] };
    let one = AuxiliaryDraw { dist: AuxDistribution::Bernoulli(0.5), values: vec![0.0, 1.0, 0.0] };
    assert_eq!(residual(&m, &y, &ParameterPoint::scalar(2.5), &two).unwrap(), vec![0.0]);
    assert_eq!(residual(&m, &y, &ParameterPoint::scalar(2.5), &one).unwrap(), vec![1.0]);
}

#[test]
fn explicit_models_have_zero_residual_at_their_output() {
    let mut g = rng::stream(17, 0);
    let b = BinomialModel::new(20).unwrap();
    let ul = UniformLocationModel::new(7).unwrap();
    let mm = MixtureModel::new(Membership::from_labels(&[0, 1, 1, 0, 2, 2, 1]).unwrap());
    for _ in 0..1000 {
        let th = ParameterPoint::scalar(rng::open01(&mut g));
        let u = draw_auxiliary_from(&b, &mut g);
        let z = generate(&b, &th, &u).unwrap();
        assert!(residual(&b, &z, &th, &u).unwrap().iter().all(|r| *r == 0.0));

        let th = ParameterPoint::scalar(10.0 * (rng::open01(&mut g) - 0.5));
        let u = draw_auxiliary_from(&ul, &mut g);
        let z = generate(&ul, &th, &u).unwrap();
        assert!(residual(&ul, &z, &th, &u).unwrap().iter().all(|r| *r == 0.0));

        let th = MixtureModel::theta(&[0.0, 1.0, 2.0], &[0.1, 0.5, 1.0 + rng::open01(&mut g)]);
        let u = draw_auxiliary_from(&mm, &mut g);
        let z = generate(&mm, &th, &u).unwrap();
        assert!(residual(&mm, &z, &th, &u).unwrap().iter().all(|r| *r == 0.0));
    }
}

#[test]
fn data_statistic_agrees_with_auxiliary_statistic() {
    let mut g = rng::stream(18, 0);
    let m = UniformLocationModel::new(5).unwrap();
    for _ in 0..1000 {
        let th = ParameterPoint::scalar(4.0 * (rng::open01(&mut g) - 0.5));
        let u = draw_auxiliary_from(&m, &mut g);
        let z = generate(&m, &th, &u).unwrap();
        let a = MeanStatistic.eval(&m, &u.values, &th).unwrap();
        let b = MeanStatistic.data_statistic(&m, &z, &th).unwrap().unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
    }
}

#[test]
fn feasibility_worked_cases() {
    let b = BinomialModel::new(20).unwrap();
    for th in [0.05, 0.5, 0.95] {
        assert_eq!(feasible_stat(&b, &SuccessCount, &ParameterPoint::scalar(th), &[7.0]).unwrap(), Feasibility::Forced(vec![7.0]));
    }
    let y = [-0.430, 0.049, 0.371];
    let ul = UniformLocationModel::new(3).unwrap();
    assert_eq!(feasible_stat(&ul, &MeanStatistic, &ParameterPoint::scalar(0.9), &y).unwrap(), Feasibility::Infeasible);
    match feasible_stat(&ul, &MeanStatistic, &ParameterPoint::scalar(0.0), &y).unwrap() {
        Feasibility::Forced(t) => assert!((t[0] - (-0.01 / 3.0)).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    match feasible_stat(&ul, &ExtremesStatistic, &ParameterPoint::scalar(0.1), &y).unwrap() {
        Feasibility::Forced(t) => assert!((t[0] + 0.53).abs() < 1e-12 && (t[1] - 0.271).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}
