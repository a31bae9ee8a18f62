use cwvsmix::engine::{run_ew_baseline, SweepConfig};
use cwvsmix::inference::{Verdict, WeightSelection, WindowDecision};
use cwvsmix::sim::{
    generate_dataset, run_study, score_amse_exp_alpha, score_amse_lambda, score_cw_accuracy, score_weight_selection,
    Method, SimScenario, SimTruth, StudyConfig, SubSetting,
};
use cwvsmix::{Error, Priors, RngStream};

fn decision(period: usize, verdict: Verdict) -> WindowDecision {
    WindowDecision {
        period,
        pip: 0.0,
        conditional_draws: 0,
        or_mean: None,
        or_lower: None,
        or_upper: None,
        verdict,
    }
}

fn nonzero_mains(w: &[f64], q: usize) -> usize {
    w[..q].iter().filter(|&&v| v > 0.0).count()
}

#[test]
fn setting_one_has_a_single_unit_main_weight() {
    for seed in 0..20 {
        let sc = SimScenario::new(1, SubSetting::A).with_size(50, 8, 5);
        let (_, truth) = generate_dataset(&sc, &mut RngStream::new(seed, 0)).unwrap();
        for t in 0..truth.m {
            let w = truth.weights_at(t);
            assert_eq!(nonzero_mains(w, 5), 1);
            assert!(w.iter().any(|&v| (v - 1.0).abs() < 1e-15));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn sub_setting_a_repeats_weights_over_time() {
    let sc = SimScenario::new(2, SubSetting::A).with_size(50, 10, 4);
    let (_, truth) = generate_dataset(&sc, &mut RngStream::new(3, 0)).unwrap();
    for t in 1..truth.m {
        assert_eq!(truth.weights_at(t), truth.weights_at(0));
    }
}

#[test]
fn sub_setting_b_keeps_support_and_varies_values() {
    let sc = SimScenario::new(3, SubSetting::B).with_size(50, 10, 4);
    let (_, truth) = generate_dataset(&sc, &mut RngStream::new(5, 0)).unwrap();
    let mains0: Vec<bool> = truth.weights_at(0)[..4].iter().map(|&v| v > 0.0).collect();
    for t in 1..truth.m {
        let mains: Vec<bool> = truth.weights_at(t)[..4].iter().map(|&v| v > 0.0).collect();
        assert_eq!(mains, mains0);
    }
    assert_ne!(truth.weights_at(0), truth.weights_at(1));
}

#[test]
fn sub_setting_c_keeps_the_number_of_important_pollutants() {
    let sc = SimScenario::new(2, SubSetting::C).with_size(50, 20, 5);
    let (_, truth) = generate_dataset(&sc, &mut RngStream::new(11, 0)).unwrap();
    let supports: Vec<Vec<bool>> = (0..truth.m)
        .map(|t| truth.weights_at(t)[..5].iter().map(|&v| v > 0.0).collect())
        .collect();
    for s in &supports {
        assert_eq!(s.iter().filter(|&&b| b).count(), 2);
    }
    assert!(supports.iter().any(|s| s != &supports[0]));
}

#[test]
fn weights_obey_strong_hierarchy_and_window_is_contiguous() {
    for (seed, setting) in (0..30).zip([2usize, 3, 4, 5].iter().cycle()) {
        let sub = [SubSetting::A, SubSetting::B, SubSetting::C][seed as usize % 3];
        let sc = SimScenario::new(*setting, sub).with_size(30, 12, 5);
        let (_, truth) = generate_dataset(&sc, &mut RngStream::new(seed, 0)).unwrap();
        for t in 0..truth.m {
            let w = truth.weights_at(t);
            let mut idx = 5;
            for j in 0..5 {
                for k in j + 1..5 {
                    if w[idx] > 0.0 {
                        assert!(w[j] > 0.0 && w[k] > 0.0);
                    }
                    idx += 1;
                }
            }
        }
        assert!((1..=7).contains(&truth.window_len));
        let crit: Vec<usize> = truth.critical_periods().map(|t| t + 1).collect();
        let expected: Vec<usize> = (truth.window_start..truth.window_start + truth.window_len).collect();
        assert_eq!(crit, expected);
        for t in 0..truth.m {
            let a = if truth.critical[t] { sc.effect_size } else { 0.0 };
            assert_eq!(truth.alpha[t], a);
        }
    }
}

#[test]
fn window_length_is_capped_by_period_count() {
    for seed in 0..50 {
        let sc = SimScenario::new(1, SubSetting::A).with_size(20, 3, 1);
        let (_, truth) = generate_dataset(&sc, &mut RngStream::new(seed, 0)).unwrap();
        assert!(truth.window_len <= 3);
        assert!(truth.window_start + truth.window_len - 1 <= 3);
    }
}

#[test]
fn outcome_prevalence_is_near_one_half() {
    for seed in 0..100 {
        let sc = SimScenario::new(2, SubSetting::B).with_size(1000, 10, 3);
        let (data, _) = generate_dataset(&sc, &mut RngStream::new(seed, 0)).unwrap();
        let prev = data.outcomes().iter().map(|&y| y as f64).sum::<f64>() / data.n() as f64;
        assert!((0.40..=0.60).contains(&prev), "seed {seed}: prevalence {prev}");
    }
}

#[test]
fn generated_exposures_are_iqr_standardized() {
    let sc = SimScenario::new(1, SubSetting::A).with_size(400, 5, 2);
    let (data, _) = generate_dataset(&sc, &mut RngStream::new(2, 0)).unwrap();
    let z = data.exposures();
    for t in 0..5 {
        for j in 0..2 {
            let mut v: Vec<f64> = (0..400).map(|i| z.get(i, t, j)).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q = |p: f64| cwvsmix::stats::quantile_sorted(&v, p);
            assert!(q(0.5).abs() < 1e-12);
            assert!((q(0.75) - q(0.25) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn generation_is_reproducible() {
    let sc = SimScenario::new(3, SubSetting::C).with_size(100, 6, 4);
    let (d1, t1) = generate_dataset(&sc, &mut RngStream::new(9, 4)).unwrap();
    let (d2, t2) = generate_dataset(&sc, &mut RngStream::new(9, 4)).unwrap();
    assert_eq!(t1, t2);
    assert_eq!(d1.outcomes(), d2.outcomes());
}

#[test]
fn infeasible_scenarios_are_rejected() {
    let sc = SimScenario::new(1, SubSetting::B);
    assert!(matches!(sc.validate(), Err(Error::InfeasibleScenario(_))));
    assert!(matches!(
        generate_dataset(&sc, &mut RngStream::new(0, 0)),
        Err(Error::InfeasibleScenario(_))
    ));
    let too_many = SimScenario::new(4, SubSetting::A).with_size(10, 5, 3);
    assert!(matches!(too_many.validate(), Err(Error::InfeasibleScenario(_))));
}

#[test]
fn scenario_json_round_trip() {
    let sc = SimScenario::new(4, SubSetting::C).with_size(100, 9, 5);
    let text = serde_json::to_string(&sc).unwrap();
    let back: SimScenario = serde_json::from_str(&text).unwrap();
    assert_eq!(sc, back);
    let minimal: SimScenario = serde_json::from_str(r#"{"setting": 2, "sub_setting": "B"}"#).unwrap();
    assert_eq!(minimal, SimScenario::new(2, SubSetting::B));
}

fn truth_single_period(m: usize, critical: &[usize]) -> SimTruth {
    SimTruth {
        m,
        q: 1,
        window_start: critical[0],
        window_len: critical.len(),
        critical: (1..=m).map(|t| critical.contains(&t)).collect(),
        alpha: (1..=m).map(|t| if critical.contains(&t) { 0.2 } else { 0.0 }).collect(),
        weights: vec![1.0; m],
    }
}

#[test]
fn cw_accuracy_counts_matching_periods() {
    let truth = truth_single_period(4, &[2]);
    let decisions = vec![
        decision(1, Verdict::Null),
        decision(2, Verdict::Harmful),
        decision(3, Verdict::Protective),
        decision(4, Verdict::Null),
    ];
    assert_eq!(score_cw_accuracy(&truth, &decisions).unwrap(), 0.75);
    assert!(score_cw_accuracy(&truth, &decisions[..3]).is_err());
}

#[test]
fn ew_weight_error_matches_closed_form() {
    let sc = SimScenario::new(1, SubSetting::A).with_size(200, 4, 5);
    let (data, truth) = generate_dataset(&sc, &mut RngStream::new(21, 0)).unwrap();
    let cfg = SweepConfig::simulation().with_counts(20, 20, 1);
    let samples = run_ew_baseline(&data, &Priors::default(), &cfg, RngStream::new(21, 1)).unwrap();
    let score = score_amse_lambda(&truth, &samples).unwrap();
    let expected = ((1.0 - 1.0 / 15.0_f64).powi(2) + 14.0 / 225.0) / 15.0;
    assert!((score.value - expected).abs() < 1e-12, "{} vs {expected}", score.value);
}

#[test]
fn single_pollutant_weight_error_counts_truncated_draws() {
    let sc = SimScenario::new(1, SubSetting::A).with_size(200, 4, 1);
    let (data, truth) = generate_dataset(&sc, &mut RngStream::new(4, 0)).unwrap();
    let cfg = SweepConfig::simulation().with_counts(20, 30, 1);
    let samples = cwvsmix::run_chain(&data, &Priors::default(), &cfg, RngStream::new(4, 1)).unwrap();
    let score = score_amse_lambda(&truth, &samples).unwrap();
    let mut total = 0.0;
    for t in truth.critical_periods() {
        let on: Vec<usize> = (0..samples.len()).filter(|&s| samples.gamma(s)[t]).collect();
        let draws: Vec<usize> = if on.is_empty() { (0..samples.len()).collect() } else { on };
        for &s in &draws {
            let w = samples.weights(s, t)[0];
            assert!(w == 0.0 || w == 1.0);
        }
        let est = draws.iter().map(|&s| samples.weights(s, t)[0]).sum::<f64>() / draws.len() as f64;
        total += (est - 1.0).powi(2);
    }
    assert!((score.value - total / truth.window_len as f64).abs() < 1e-12);
}

#[test]
fn exp_alpha_error_matches_direct_computation() {
    let sc = SimScenario::new(2, SubSetting::A).with_size(300, 5, 2);
    let (data, truth) = generate_dataset(&sc, &mut RngStream::new(8, 0)).unwrap();
    let cfg = SweepConfig::simulation().with_counts(100, 200, 1);
    let samples = cwvsmix::run_chain(&data, &Priors::default(), &cfg, RngStream::new(8, 1)).unwrap();
    let score = score_amse_exp_alpha(&truth, &samples).unwrap();
    let mut total = 0.0;
    let mut flagged = false;
    for t in 0..5 {
        let (mut sum, mut count) = (0.0, 0usize);
        for s in 0..samples.len() {
            if samples.gamma(s)[t] {
                sum += samples.alpha(s)[t].exp();
                count += 1;
            }
        }
        let est = if count > 0 {
            sum / count as f64
        } else {
            flagged = true;
            (0..samples.len()).map(|s| samples.alpha(s)[t].exp()).sum::<f64>() / samples.len() as f64
        };
        total += (est - truth.alpha[t].exp()).powi(2);
    }
    assert!((score.value - total / 5.0).abs() < 1e-12 * (1.0 + score.value));
    assert_eq!(score.flagged, flagged);
}

#[test]
fn selection_accuracy_examples() {
    let q = 5;
    let r = 15;
    let mut w = vec![0.0; r];
    w[0] = 1.0;
    let truth = SimTruth {
        m: 2,
        q,
        window_start: 1,
        window_len: 1,
        critical: vec![true, false],
        alpha: vec![0.2, 0.0],
        weights: [w.clone(), w].concat(),
    };
    let all = WeightSelection {
        m: 2,
        q,
        inclusion: vec![1.0; 2 * r],
        selected: vec![true; 2 * r],
    };
    let acc = score_weight_selection(&truth, &all).unwrap();
    assert!((acc.main - 0.2).abs() < 1e-15);
    assert_eq!(acc.interaction, Some(0.0));

    let mut exact_sel = vec![false; 2 * r];
    exact_sel[0] = true;
    let exact = WeightSelection {
        m: 2,
        q,
        inclusion: vec![0.0; 2 * r],
        selected: exact_sel,
    };
    let acc = score_weight_selection(&truth, &exact).unwrap();
    assert_eq!(acc.main, 1.0);
    assert_eq!(acc.interaction, Some(1.0));

    let t1 = truth_single_period(3, &[2, 3]);
    let one = WeightSelection {
        m: 3,
        q: 1,
        inclusion: vec![1.0; 3],
        selected: vec![true; 3],
    };
    let acc = score_weight_selection(&t1, &one).unwrap();
    assert_eq!(acc.main, 1.0);
    assert_eq!(acc.interaction, None);
}

fn small_study(workers: usize, replicates: usize) -> StudyConfig {
    StudyConfig {
        replicates,
        methods: vec![Method::CwvsMix, Method::Ew],
        priors: Priors::default(),
        sweep: SweepConfig::simulation().with_counts(40, 20, 1),
        ci_level: 0.9,
        master_seed: 17,
        workers,
    }
}

#[test]
fn study_is_identical_across_worker_counts() {
    let sc = SimScenario::new(2, SubSetting::A).with_size(150, 5, 2);
    let a = run_study(&sc, &small_study(1, 3)).unwrap();
    let b = run_study(&sc, &small_study(4, 3)).unwrap();
    assert_eq!(a.replicates, b.replicates);
    assert_eq!(a.summaries, b.summaries);
    assert_eq!(a.replicates.len(), 6);
    assert!(a.replicates.iter().all(|r| r.error.is_none()));
    let cw = a.summary(Method::CwvsMix).unwrap();
    assert_eq!(cw.succeeded, 3);
    assert!(cw.metric("cw_accuracy").unwrap().se.is_some());
    let ew = a.summary(Method::Ew).unwrap();
    assert_eq!(ew.metric("main_selection").unwrap().n, 0);
}

#[test]
fn single_replicate_has_no_standard_error() {
    let sc = SimScenario::new(1, SubSetting::A).with_size(100, 4, 2);
    let res = run_study(&sc, &small_study(2, 1)).unwrap();
    for s in &res.summaries {
        assert!(s.metrics.iter().all(|m| m.se.is_none()));
    }
    assert!(res.max_se.is_none());
}

#[test]
fn study_rejects_infeasible_scenario() {
    let sc = SimScenario::new(1, SubSetting::B).with_size(100, 4, 2);
    assert!(matches!(run_study(&sc, &small_study(1, 2)), Err(Error::InfeasibleScenario(_))));
}

#[test]
fn method_names_parse() {
    assert_eq!("CWVSmix".parse::<Method>().unwrap(), Method::CwvsMix);
    assert_eq!(" ew ".parse::<Method>().unwrap(), Method::Ew);
    assert!("bkmr".parse::<Method>().is_err());
}
