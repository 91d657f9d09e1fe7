use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use repro_core::mixture::confidence::{conditional_tau_law, mass_above};
use repro_core::mixture::{
    candidate_set_mixture, conditional_from_normals, conditional_sample, f_s, mbic_objective, modified_bic_exhaustive, modified_bic_map,
    suff_stats, tau_confidence_set, tau_hat, tau_hat_value, MbicConfig, Membership, MIN_COMPONENT_SIZE, MixtureParams, SuffStats, TauHatConfig, TauSetConfig,
};
use repro_core::rng;
use repro_core::stats::chi_square_two_sample;

fn random_membership(n: usize, tau: usize, g: &mut impl Rng) -> Membership {
    // Every cluster gets at least two points.
    let mut labels: Vec<usize> = (0..n).map(|i| if i < 2 * tau { i / 2 } else { g.random_range(0..tau) }).collect();
    for i in (1..n).rev() {
        labels.swap(i, g.random_range(0..=i));
    }
    Membership::from_labels(&labels).unwrap()
}

#[test]
fn suff_stats_worked_cases() {
    let m = Membership::from_labels(&[0, 0, 0, 1, 1]).unwrap();
    let s = suff_stats(&[1.0, 2.0, 3.0, 10.0, 12.0], &m).unwrap();
    assert_eq!(s.a, vec![2.0, 11.0]);
    assert!((s.b[0] - 2f64.sqrt()).abs() < 1e-15 && (s.b[1] - 2f64.sqrt()).abs() < 1e-15);
    let one = Membership::from_labels(&[0; 4]).unwrap();
    assert_eq!(suff_stats(&[3.5; 4], &one).unwrap(), SuffStats { a: vec![3.5], b: vec![0.0] });
    let single = Membership::from_labels(&[0, 1, 1]).unwrap();
    assert_eq!(suff_stats(&[5.0, 1.0, 2.0], &single).unwrap().b[0], 0.0);
}

#[test]
fn conditional_sample_edge_cases() {
    let m = Membership::from_labels(&[0, 0, 1, 1, 1]).unwrap();
    let zero = SuffStats { a: vec![1.0, -2.0], b: vec![0.0, 0.0] };
    for seed in 0..5 {
        let y = conditional_sample(&m, &zero, &mut rng::stream(seed, 0)).unwrap();
        assert_eq!(y, vec![1.0, 1.0, -2.0, -2.0, -2.0]);
    }
    let bad = Membership::from_labels(&[0, 1, 1]).unwrap();
    assert!(conditional_sample(&bad, &SuffStats { a: vec![0.0, 0.0], b: vec![1.0, 1.0] }, &mut rng::stream(0, 0)).is_err());
}

#[test]
fn conditional_directions_are_centred() {
    let m = Membership::from_labels(&[0, 0, 0, 0, 1, 1, 1, 1, 1, 1]).unwrap();
    let stats = SuffStats { a: vec![0.0, 0.0], b: vec![1.0, 1.0] };
    let draws = 10_000;
    let mut g = rng::stream(41, 0);
    let mut sum = vec![0.0; m.n()];
    for _ in 0..draws {
        let y = conditional_sample(&m, &stats, &mut g).unwrap();
        for (s, v) in sum.iter_mut().zip(&y) {
            *s += v;
        }
    }
    let sizes = m.sizes();
    for (i, s) in sum.iter().enumerate() {
        let nk = sizes[m.labels()[i]] as f64;
        assert!((s / draws as f64).abs() < 4.0 / (draws as f64 * nk).sqrt(), "coordinate {i}");
    }
}

#[test]
fn a_thousand_random_preservations() {
    let mut g = rng::stream(42, 0);
    for _ in 0..10_000 {
        let tau = g.random_range(1..5);
        let n = g.random_range(2 * tau..30);
        let m = random_membership(n, tau, &mut g);
        let stats = SuffStats {
            a: (0..tau).map(|_| 10.0 * g.sample::<f64, _>(StandardNormal)).collect(),
            b: (0..tau).map(|_| 5.0 * g.random::<f64>()).collect(),
        };
        let y = conditional_sample(&m, &stats, &mut g).unwrap();
        let back = suff_stats(&y, &m).unwrap();
        for k in 0..tau {
            assert!((back.a[k] - stats.a[k]).abs() <= 1e-12 * (1.0 + stats.a[k].abs()));
            assert!((back.b[k] - stats.b[k]).abs() <= 1e-12 * (1.0 + stats.b[k]));
        }
    }
}

#[test]
fn canonical_form_by_first_occurrence() {
    let m = Membership::from_labels(&[7, 7, 2, 9, 2]).unwrap();
    assert_eq!(m.labels(), &[0, 0, 1, 2, 1]);
    assert_eq!(m.tau(), 3);
    assert_eq!(m.sizes(), vec![2, 2, 1]);
    let back = Membership::from_matrix(&m.to_matrix()).unwrap();
    assert_eq!(back, m);
    assert!(Membership::from_matrix(&[vec![1, 0, 0], vec![0, 1, 0]]).is_err());
    assert!(Membership::from_matrix(&[vec![1, 1], vec![0, 1]]).is_err());
}

#[test]
fn tau_hat_separates_clusters() {
    let p = MixtureParams::new(vec![0.0, 10.0], vec![1.0, 1.0], vec![0.5, 0.5]).unwrap();
    let cfg = TauHatConfig::default();
    let hits = (0..100u64)
        .filter(|s| {
            let d = p.sample(100, &mut rng::stream(*s, 43)).unwrap();
            tau_hat_value(&d.y, &cfg, *s).unwrap() == 2
        })
        .count();
    assert!(hits >= 95, "{hits}");
    let ones = (0..100u64)
        .filter(|s| {
            let mut g = rng::stream(*s, 44);
            let y: Vec<f64> = (0..100).map(|_| g.sample(StandardNormal)).collect();
            tau_hat_value(&y, &cfg, *s).unwrap() == 1
        })
        .count();
    assert!(ones >= 90, "{ones}");
}

#[test]
fn tau_hat_rarely_recovers_three_reference_components() {
    let p = MixtureParams::reference(3).unwrap();
    let cfg = TauHatConfig::default();
    let hits = (0..50u64)
        .filter(|s| {
            let d = p.sample(190, &mut rng::stream(*s, 45)).unwrap();
            tau_hat_value(&d.y, &cfg, *s).unwrap() == 3
        })
        .count();
    assert!(hits <= 15, "{hits}/50");
}

#[test]
fn tau_hat_reports_consistent_fits() {
    let p = MixtureParams::reference(2).unwrap();
    let d = p.sample(120, &mut rng::stream(1, 46)).unwrap();
    let cfg = TauHatConfig::default();
    let t = tau_hat(&d.y, &cfg, 9).unwrap();
    assert_eq!(t.tau, tau_hat_value(&d.y, &cfg, 9).unwrap());
    assert_eq!(t.bic.len(), cfg.tau_max);
    let floor = 1e-3 * repro_core::stats::sample_sd(&d.y);
    for f in &t.fits {
        assert!((f.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(f.sds.iter().all(|s| *s >= floor));
    }
    let best = t.bic.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(t.bic[t.tau - 1], best);
    assert!(t.bic[..t.tau - 1].iter().all(|b| *b > best));
    assert!(t.fits[t.tau - 1].membership.sizes().iter().all(|c| *c >= MIN_COMPONENT_SIZE));
    assert!(tau_hat(&d.y[..10], &cfg, 0).is_err());
}

#[test]
fn f_s_extremes() {
    let p = [0.1, 0.6, 0.3];
    assert_eq!(mass_above(&p, 2), 0.0);
    assert_eq!(mass_above(&p, 8), 1.0);
    let d = MixtureParams::reference(2).unwrap().sample(60, &mut rng::stream(3, 47)).unwrap();
    let stats = suff_stats(&d.y, &d.membership).unwrap();
    let cfg = TauHatConfig::default();
    let law = conditional_tau_law(&d.membership, &stats, 200, &cfg, 5).unwrap();
    let mode = law.iter().enumerate().fold((0, -1.0), |b, (k, p)| if *p > b.1 { (k + 1, *p) } else { b }).0;
    assert_eq!(f_s(mode, &d.membership, &stats, 200, &cfg, 5).unwrap(), 0.0);
    if let Some(k) = law.iter().position(|p| *p == 0.0) {
        assert_eq!(f_s(k + 1, &d.membership, &stats, 200, &cfg, 5).unwrap(), 1.0);
    }
}

#[test]
fn f_s_is_calibrated_at_the_truth() {
    let p = MixtureParams::new(vec![0.0, 3.0], vec![1.0, 0.7], vec![0.6, 0.4]).unwrap();
    let cfg = TauHatConfig { restarts: 4, ..Default::default() };
    let reps = 300;
    let alpha = 0.95;
    let hits = (0..reps as u64)
        .filter(|s| {
            let d = p.sample(40, &mut rng::stream(*s, 48)).unwrap();
            let stats = suff_stats(&d.y, &d.membership).unwrap();
            let w = tau_hat_value(&d.y, &cfg, *s).unwrap();
            f_s(w, &d.membership, &stats, 100, &cfg, 1000 + s).unwrap() <= alpha
        })
        .count();
    let rate = hits as f64 / reps as f64;
    assert!(rate >= alpha - 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt(), "{rate}");
}

#[test]
fn conditional_law_does_not_depend_on_parameters() {
    // Fixed (a, b); directions taken from data generated under two parameter pairs.
    let labels: Vec<usize> = (0..40).map(|i| usize::from(i >= 22)).collect();
    let m = Membership::from_labels(&labels).unwrap();
    let stats = SuffStats { a: vec![0.0, 2.5], b: vec![4.0, 3.0] };
    let cfg = TauHatConfig { restarts: 3, ..Default::default() };
    let hist = |mu: [f64; 2], sd: [f64; 2], seed: u64| {
        let mut h = vec![0usize; cfg.tau_max];
        for s in 0..2000u64 {
            let mut g = rng::stream(seed, s);
            let y0: Vec<f64> = labels.iter().map(|k| mu[*k] + sd[*k] * g.sample::<f64, _>(StandardNormal)).collect();
            let y = conditional_from_normals(&m, &stats, &y0).unwrap();
            h[tau_hat_value(&y, &cfg, s).unwrap() - 1] += 1;
        }
        h
    };
    let a = hist([0.0, 1.0], [1.0, 1.0], 49);
    let b = hist([-5.0, 30.0], [0.2, 7.0], 50);
    let t = chi_square_two_sample(&a, &b);
    assert!(t.p_value > 0.001, "{a:?} {b:?} {t:?}");
}

#[test]
fn modified_bic_limits() {
    let d = MixtureParams::new(vec![0.0, 5.0], vec![0.3, 0.3], vec![0.5, 0.5]).unwrap().sample(40, &mut rng::stream(2, 51)).unwrap();
    let u: Vec<f64> = {
        let mut g = rng::stream(2, 52);
        (0..40).map(|_| g.sample(StandardNormal)).collect()
    };
    let one = modified_bic_map(&d.y, &u, &MbicConfig { tau_max: 1, ..Default::default() }, &mut rng::stream(0, 0)).unwrap();
    assert_eq!(one.membership, Membership::from_labels(&[0; 40]).unwrap());
    let heavy = modified_bic_map(&d.y, &u, &MbicConfig { lambda: 1e6, ..Default::default() }, &mut rng::stream(0, 0)).unwrap();
    assert_eq!(heavy.membership.tau(), 1);
}

#[test]
fn modified_bic_recovers_planted_truth() {
    let p = MixtureParams::new(vec![0.0, 1.0], vec![0.05, 0.05], vec![0.5, 0.5]).unwrap();
    for s in 0..20u64 {
        let d = p.sample(80, &mut rng::stream(s, 53)).unwrap();
        let f = modified_bic_map(&d.y, &d.u, &MbicConfig::default(), &mut rng::stream(s, 54)).unwrap();
        assert_eq!(f.membership, d.membership, "seed {s}");
        assert!(f.rss < 1e-20);
    }
}

#[test]
fn heuristic_never_beats_exhaustive() {
    let mut worse = 0;
    for s in 0..60u64 {
        let mut g = rng::stream(s, 55);
        let n = g.random_range(5..=10);
        let y: Vec<f64> = (0..n).map(|i| (i % 3) as f64 + 0.2 * g.sample::<f64, _>(StandardNormal)).collect();
        let u: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
        let cfg = MbicConfig { tau_max: 3, ..Default::default() };
        let ex = modified_bic_exhaustive(&y, &u, 1.0, 3).unwrap();
        let he = modified_bic_map(&y, &u, &cfg, &mut g).unwrap();
        assert!(he.objective >= ex.objective - 1e-9);
        assert!((mbic_objective(&y, &u, &ex.membership, 1.0) - ex.objective).abs() < 1e-9);
        if he.objective > ex.objective + 1e-9 {
            worse += 1;
        }
    }
    assert!(worse <= 30, "{worse}/60 heuristic fits missed the optimum");
}

#[test]
fn candidate_set_bookkeeping() {
    let d = MixtureParams::reference(2).unwrap().sample(50, &mut rng::stream(4, 56)).unwrap();
    let cfg = MbicConfig { tau_max: 4, restarts: 3, ..Default::default() };
    let one = candidate_set_mixture(&d.y, 1, &cfg, 7).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].multiplicity, 1);
    let many = candidate_set_mixture(&d.y, 30, &cfg, 7).unwrap();
    assert_eq!(many.iter().map(|c| c.multiplicity).sum::<usize>(), 30);
    for (i, a) in many.iter().enumerate() {
        assert!(many[i + 1..].iter().all(|b| b.membership != a.membership));
    }
    assert!(candidate_set_mixture(&d.y, 0, &cfg, 7).is_err());
}

#[test]
fn tau_sets_are_nested_in_alpha() {
    let d = MixtureParams::reference(2).unwrap().sample(60, &mut rng::stream(5, 57)).unwrap();
    let base = TauSetConfig {
        v_size: 100,
        vc_size: 20,
        fit: TauHatConfig { restarts: 3, ..Default::default() },
        mbic: MbicConfig { restarts: 3, ..Default::default() },
        seed: 11,
        ..Default::default()
    };
    let mut prev: Option<Vec<usize>> = None;
    for alpha in [0.5, 0.8, 0.95, 0.999] {
        let r = tau_confidence_set(&d.y, &TauSetConfig { alpha, ..base.clone() }).unwrap();
        assert!(r.levels.values().all(|l| (0.0..=1.0).contains(l)));
        if let Some(p) = &prev {
            assert!(p.iter().all(|t| r.set.contains(t)), "{p:?} vs {:?}", r.set);
        }
        prev = Some(r.set);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pythagoras_holds(seed in 0u64..100_000, tau in 1usize..5, extra in 0usize..20) {
        let mut g = rng::stream(seed, 58);
        let m = random_membership(2 * tau + extra, tau, &mut g);
        let y: Vec<f64> = (0..m.n()).map(|_| 3.0 * g.sample::<f64, _>(StandardNormal) + 1.0).collect();
        let s = suff_stats(&y, &m).unwrap();
        let sizes = m.sizes();
        for k in 0..tau {
            let sq: f64 = y.iter().zip(m.labels()).filter(|(_, l)| **l == k).map(|(v, _)| v * v).sum();
            prop_assert!((s.b[k].powi(2) + sizes[k] as f64 * s.a[k].powi(2) - sq).abs() < 1e-10 * (1.0 + sq));
        }
    }

    #[test]
    fn canonicalisation_is_idempotent_and_label_free(labels in prop::collection::vec(0usize..6, 1..40), shift in 1usize..50) {
        let m = Membership::from_labels(&labels).unwrap();
        prop_assert_eq!(Membership::from_labels(m.labels()).unwrap(), m.clone());
        let renamed: Vec<usize> = labels.iter().map(|l| (l * 7 + shift) % 97).collect();
        prop_assert_eq!(Membership::from_labels(&renamed).unwrap(), m);
    }

    #[test]
    fn exhaustive_search_is_a_lower_bound(seed in 0u64..100_000) {
        let mut g = rng::stream(seed, 59);
        let n = g.random_range(3..=8);
        let y: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
        let u: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
        let ex = modified_bic_exhaustive(&y, &u, 1.0, 4).unwrap();
        for _ in 0..5 {
            let tau = g.random_range(1..=4.min(n));
            let m = random_membership(n.max(2 * tau), tau, &mut g);
            if m.n() == n {
                prop_assert!(mbic_objective(&y, &u, &m, 1.0) >= ex.objective - 1e-9);
            }
        }
    }
}
