use repro_core::engine::{algorithm1, member_level, member_levels, pvalue, test_statistic_set, Axis, ConfidenceSet, EngineConfig, GridSpec};
use repro_core::model::{draw_auxiliary_from, generate, ParameterPoint};
use repro_core::models::binomial::{binomial_set, BinomialModel, SuccessCount};
use repro_core::models::quantile::{quantile_set, BernoulliSum, QuantileModel};
use repro_core::models::uniform::{order_stat_set, uniform_irwin_hall_set, ExtremesStatistic, MeanStatistic, UniformLocationModel};
use repro_core::region::CloudRegion;
use repro_core::rng;

const Y3: [f64; 3] = [-0.430, 0.049, 0.371];

fn mc(seed: u64, v: usize) -> EngineConfig {
    EngineConfig { v_size: v, seed, use_exact_law: false, ..Default::default() }
}

fn exact() -> EngineConfig {
    EngineConfig::default()
}

/// Largest distance from a boundary of one set to the nearest boundary of the other.
fn boundary_gap(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
    a.iter().zip(b).map(|(x, y)| (x.0 - y.0).abs().max((x.1 - y.1).abs())).fold(0.0, f64::max)
}

#[test]
fn binomial_engine_matches_analytic_set() {
    let m = BinomialModel::new(20).unwrap();
    let axis = Axis::new(0.001, 0.999, 0.001).unwrap();
    let grid = GridSpec { discrete: vec![], continuous: vec![axis] };
    for y in [0usize, 7, 13, 20] {
        let engine = algorithm1(&m, &SuccessCount, &[y as f64], &grid, 0.95, &exact()).unwrap();
        let closed = binomial_set(y, 20, 0.95, axis).unwrap();
        assert_eq!(engine.retained, closed.retained, "y = {y}");
    }
    let zero = binomial_set(0, 20, 0.95, axis).unwrap();
    assert!(zero.contains(&ParameterPoint::scalar(0.001)));
}

#[test]
fn binomial_monte_carlo_route_tracks_analytic_set() {
    let m = BinomialModel::new(20).unwrap();
    let axis = Axis::new(0.01, 0.99, 0.01).unwrap();
    let grid = GridSpec { discrete: vec![], continuous: vec![axis] };
    let engine = algorithm1(&m, &SuccessCount, &[7.0], &grid, 0.95, &mc(3, 5000)).unwrap();
    let closed = binomial_set(7, 20, 0.95, axis).unwrap();
    let differ = engine.retained.iter().zip(&closed.retained).filter(|(a, b)| a != b).count();
    assert!(differ <= 4, "{differ} grid points differ");
}

#[test]
fn uniform_engine_reproduces_worked_interval() {
    let m = UniformLocationModel::new(3).unwrap();
    let grid = GridSpec::line(-1.0, 1.0, 0.001).unwrap();
    let set = algorithm1(&m, &MeanStatistic, &Y3, &grid, 0.95, &exact()).unwrap();
    let runs = set.runs().unwrap();
    assert_eq!(runs.len(), 1);
    assert!((runs[0].0 + 0.629).abs() <= 0.001 + 1e-9, "{runs:?}");
    assert!((runs[0].1 - 0.570).abs() <= 0.001 + 1e-9, "{runs:?}");
}

#[test]
fn levels_agree_with_retention() {
    let mut g = rng::stream(21, 0);
    let m = UniformLocationModel::new(4).unwrap();
    let grid = GridSpec::line(-1.5, 1.5, 0.05).unwrap();
    let mut checked = 0;
    for rep in 0..10u64 {
        let u = draw_auxiliary_from(&m, &mut g);
        let z = generate(&m, &ParameterPoint::scalar(0.0), &u).unwrap();
        for (mapping_is_mean, cfg) in [(true, mc(rep, 400)), (false, mc(rep, 400)), (false, exact())] {
            let alpha = 0.5 + 0.45 * rng::open01(&mut g);
            let (levels, set) = if mapping_is_mean {
                (
                    member_levels(&m, &MeanStatistic, &z, &grid, &cfg).unwrap(),
                    algorithm1(&m, &MeanStatistic, &z, &grid, alpha, &cfg).unwrap(),
                )
            } else {
                (
                    member_levels(&m, &ExtremesStatistic, &z, &grid, &cfg).unwrap(),
                    algorithm1(&m, &ExtremesStatistic, &z, &grid, alpha, &cfg).unwrap(),
                )
            };
            for ((_, l), r) in levels.iter().zip(&set.retained) {
                assert_eq!(*l <= alpha + 1e-12, *r);
                checked += 1;
            }
        }
    }
    assert!(checked >= 500);
}

#[test]
fn sets_are_nested_in_alpha() {
    let m = UniformLocationModel::new(6).unwrap();
    let mut g = rng::stream(5, 0);
    let z = generate(&m, &ParameterPoint::scalar(0.2), &draw_auxiliary_from(&m, &mut g)).unwrap();
    let grid = GridSpec::line(-1.0, 1.5, 0.01).unwrap();
    for cfg in [mc(9, 500), EngineConfig { cloud_region: Some(CloudRegion::Depth), ..mc(9, 500) }] {
        let mut prev: Option<ConfidenceSet> = None;
        for alpha in [0.5, 0.8, 0.9, 0.95, 0.99] {
            let set = if cfg.cloud_region.is_some() {
                algorithm1(&m, &ExtremesStatistic, &z, &grid, alpha, &cfg).unwrap()
            } else {
                algorithm1(&m, &MeanStatistic, &z, &grid, alpha, &cfg).unwrap()
            };
            if let Some(p) = &prev {
                assert!(p.retained.iter().zip(&set.retained).all(|(a, b)| !a || *b));
            }
            prev = Some(set);
        }
    }
}

#[test]
fn member_level_extremes() {
    let m = UniformLocationModel::new(3).unwrap();
    assert_eq!(member_level(&m, &MeanStatistic, &Y3, &ParameterPoint::scalar(0.9), &mc(1, 1001)).unwrap(), 1.0);
    // At theta = ybar the forced mean is 0, the centre of a symmetric law.
    let ybar = Y3.iter().sum::<f64>() / 3.0;
    assert!(member_level(&m, &MeanStatistic, &Y3, &ParameterPoint::scalar(ybar), &exact()).unwrap() < 1e-12);
    let l = member_level(&m, &MeanStatistic, &Y3, &ParameterPoint::scalar(ybar), &mc(1, 1001)).unwrap();
    assert!(l <= 0.1, "{l}");
}

#[test]
fn pvalue_rules() {
    let m = UniformLocationModel::new(3).unwrap();
    let cfg = mc(2, 500);
    assert_eq!(pvalue(&m, &MeanStatistic, &Y3, &[ParameterPoint::scalar(0.9)], &cfg).unwrap(), 0.0);
    assert!(pvalue(&m, &MeanStatistic, &Y3, &[], &cfg).is_err());
    let small: Vec<ParameterPoint> = [-0.5, 0.3].into_iter().map(ParameterPoint::scalar).collect();
    let big: Vec<ParameterPoint> = GridSpec::line(-1.0, 1.0, 0.01).unwrap().points().unwrap();
    let p_small = pvalue(&m, &MeanStatistic, &Y3, &small, &cfg).unwrap();
    let p_big = pvalue(&m, &MeanStatistic, &Y3, &[small.clone(), big].concat(), &cfg).unwrap();
    assert!(p_big >= p_small);
}

#[test]
fn candidate_intersection() {
    let m = UniformLocationModel::new(3).unwrap();
    let grid = GridSpec::line(-1.0, 1.0, 0.01).unwrap();
    let set = algorithm1(&m, &MeanStatistic, &Y3, &grid, 0.95, &exact()).unwrap();
    let all = grid.points().unwrap();
    assert_eq!(set.intersect(&all), set);
    let outside = vec![ParameterPoint::scalar(0.9), ParameterPoint::scalar(-0.95)];
    assert!(set.intersect(&outside).is_empty());
    let one = vec![ParameterPoint::scalar(0.1)];
    assert_eq!(set.intersect(&one).count(), 1);
}

#[test]
fn common_random_numbers_make_sets_reproducible() {
    let m = UniformLocationModel::new(5).unwrap();
    let mut g = rng::stream(8, 0);
    let z = generate(&m, &ParameterPoint::scalar(0.0), &draw_auxiliary_from(&m, &mut g)).unwrap();
    let grid = GridSpec::line(-1.0, 1.0, 0.01).unwrap();
    let a = algorithm1(&m, &ExtremesStatistic, &z, &grid, 0.9, &mc(4, 300)).unwrap();
    let b = algorithm1(&m, &ExtremesStatistic, &z, &grid, 0.9, &mc(4, 300)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn repro_set_is_inside_test_statistic_set() {
    let m = UniformLocationModel::new(3).unwrap();
    let grid = GridSpec::line(-1.5, 1.5, 0.002).unwrap();
    let mut g = rng::stream(12, 0);
    let mut strict = 0;
    for _ in 0..100 {
        let z = generate(&m, &ParameterPoint::scalar(0.0), &draw_auxiliary_from(&m, &mut g)).unwrap();
        let repro = algorithm1(&m, &MeanStatistic, &z, &grid, 0.95, &exact()).unwrap();
        let test = test_statistic_set(&m, &MeanStatistic, &z, &grid, 0.95, &exact()).unwrap();
        assert!(repro.retained.iter().zip(&test.retained).all(|(a, b)| !a || *b));
        if repro.count() < test.count() {
            strict += 1;
        }
    }
    assert!(strict > 0);
}

#[test]
fn near_one_alpha_always_covers() {
    let m = BinomialModel::new(20).unwrap();
    let grid = GridSpec { discrete: vec![], continuous: vec![Axis::new(0.05, 0.95, 0.05).unwrap()] };
    let mut g = rng::stream(13, 0);
    for _ in 0..50 {
        let theta = ParameterPoint::scalar(0.4);
        let z = generate(&m, &theta, &draw_auxiliary_from(&m, &mut g)).unwrap();
        let set = algorithm1(&m, &SuccessCount, &z, &grid, 0.999_999, &exact()).unwrap();
        assert!(set.contains(&theta));
    }
}

#[test]
fn closed_forms_match_engine_on_random_data() {
    let mut g = rng::stream(14, 0);
    let step = 0.002;
    for _ in 0..30 {
        let qm = QuantileModel::new(25, 0.3).unwrap();
        let y: Vec<f64> = (0..25).map(|_| 4.0 * (rng::open01(&mut g) - 0.5)).collect();
        let iv = quantile_set(&y, 0.3, 0.95, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        let grid = GridSpec::line(-3.0, 3.0, step).unwrap();
        let set = algorithm1(&qm, &BernoulliSum, &y, &grid, 0.95, &exact()).unwrap();
        for (p, r) in set.points.iter().zip(&set.retained) {
            assert_eq!(*r, iv.contains(p.continuous[0]), "theta {}", p.continuous[0]);
        }

        let um = UniformLocationModel::new(4).unwrap();
        let z = generate(&um, &ParameterPoint::scalar(0.0), &draw_auxiliary_from(&um, &mut g)).unwrap();
        let grid = GridSpec::line(-1.5, 1.5, step).unwrap();
        let closed = uniform_irwin_hall_set(&z, 0.95).unwrap().repro;
        let set = algorithm1(&um, &MeanStatistic, &z, &grid, 0.95, &exact()).unwrap();
        assert!(boundary_gap(&set.runs().unwrap(), &[(closed.lo, closed.hi)]) <= step + 1e-9);

        let closed = order_stat_set(&z, 0.95).unwrap();
        let set = algorithm1(&um, &ExtremesStatistic, &z, &grid, 0.95, &exact()).unwrap();
        if closed.is_empty() {
            assert!(set.count() <= 1);
        } else {
            assert!(boundary_gap(&set.runs().unwrap(), &[(closed.lo, closed.hi)]) <= step + 1e-9);
        }
    }
}

#[test]
fn monte_carlo_route_covers_at_nominal_rate() {
    let m = UniformLocationModel::new(5).unwrap();
    let grid = GridSpec::line(-1.0, 1.0, 0.02).unwrap();
    let theta = ParameterPoint::scalar(0.0);
    let reps = 400;
    let alpha = 0.9;
    let mut g = rng::stream(15, 0);
    let mut hits = 0;
    for rep in 0..reps {
        let z = generate(&m, &theta, &draw_auxiliary_from(&m, &mut g)).unwrap();
        if algorithm1(&m, &MeanStatistic, &z, &grid, alpha, &mc(rep, 500)).unwrap().contains(&theta) {
            hits += 1;
        }
    }
    let cov = hits as f64 / reps as f64;
    assert!(cov >= alpha - 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt(), "{cov}");
}
