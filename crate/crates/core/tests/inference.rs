use cwvsmix::engine::{run_chain, SweepConfig};
use cwvsmix::inference::{
    all_pollutant_effect, classify, decide_windows, geweke_diagnostic, pollutant_effect, select_components,
    decide_windows_with, select_components_with, select_weights, summarize_chain, Thresholds, Verdict,
};
use cwvsmix::kernels::std_normal;
use cwvsmix::mixture::transform_weights;
use cwvsmix::sim::{generate_dataset, SimScenario, SubSetting};
use cwvsmix::{Error, Priors, RngStream};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn geweke_calibrated_on_iid_chains() {
    let chains = 1000;
    let mut rejections = 0;
    for k in 0..chains {
        let mut rng = RngStream::new(2718, k);
        let chain: Vec<f64> = (0..10_000).map(|_| std_normal(&mut rng)).collect();
        let z = geweke_diagnostic(&chain, 0.1, 0.5).unwrap();
        rejections += (z.abs() > 1.96) as usize;
    }
    let rate = rejections as f64 / chains as f64;
    println!("geweke rejection rate {rate}");
    assert!((0.03..=0.07).contains(&rate), "{rate}");
}

#[test]
fn geweke_detects_mean_shift() {
    let mut rng = RngStream::new(31, 0);
    let chain: Vec<f64> = (0..10_000)
        .map(|i| std_normal(&mut rng) + if i >= 5_000 { 2.0 } else { 0.0 })
        .collect();
    assert!(geweke_diagnostic(&chain, 0.1, 0.5).unwrap().abs() > 5.0);
}

#[test]
fn geweke_degenerate_inputs() {
    assert!(matches!(geweke_diagnostic(&[0.0; 99], 0.1, 0.5), Err(Error::ChainTooShort { .. })));
    let err = geweke_diagnostic(&[3.0; 500], 0.1, 0.5).unwrap_err();
    assert_eq!(err.to_string(), "zero variance");
    assert!(geweke_diagnostic(&[1.0; 500], 0.6, 0.5).is_err());
}

#[test]
fn decisions_from_a_fitted_chain() {
    let scenario = SimScenario::new(1, SubSetting::A).with_size(300, 5, 2);
    let (data, _) = generate_dataset(&scenario, &mut RngStream::new(5, 0)).unwrap();
    let cfg = SweepConfig::simulation().with_counts(300, 200, 1);
    let s = run_chain(&data, &Priors::default(), &cfg, RngStream::new(5, 1)).unwrap();
    let decisions = decide_windows(&s, 0.9).unwrap();
    assert_eq!(decisions.len(), 5);
    for d in &decisions {
        assert!((0.0..=1.0).contains(&d.pip));
        if d.verdict.is_critical() {
            assert!(d.pip > 0.5);
            let (lo, hi) = (d.or_lower.unwrap(), d.or_upper.unwrap());
            assert!(lo > 1.0 || hi < 1.0);
        }
        assert_eq!(d.no_conditional_draws(), d.or_mean.is_none());
    }
    assert!(decide_windows(&s, 1.0).is_err());
    let sel = select_weights(&s);
    for t in 0..5 {
        let flags = sel.selected_at(t);
        if flags[2] {
            assert!(flags[0] && flags[1]);
        }
    }
    let summary = summarize_chain(&s);
    assert!(summary.iter().any(|t| t.name == "alpha_3"));
    assert!(summary.iter().any(|t| t.name == "log_lik"));
}

#[test]
fn custom_thresholds_change_selection() {
    let probs = [0.6, 0.4, 0.2];
    assert_eq!(select_components(&probs, 2), vec![true, false, false]);
    let loose = Thresholds { window: 0.5, main: 0.3, interaction: 0.1 };
    assert_eq!(select_components_with(&probs, 2, &loose), vec![true, true, true]);
    let strict = Thresholds { window: 0.5, main: 0.3, interaction: 0.25 };
    assert_eq!(select_components_with(&probs, 2, &strict), vec![true, true, false]);
    for bad in [0.0, 1.0, -0.1, f64::NAN] {
        let t = Thresholds { window: bad, ..Thresholds::default() };
        assert!(t.validate().is_err());
    }
    assert!(Thresholds::default().validate().is_ok());
}

#[test]
fn window_threshold_near_one_nulls_every_window() {
    let scenario = SimScenario::new(1, SubSetting::A).with_size(200, 4, 2);
    let (data, _) = generate_dataset(&scenario, &mut RngStream::new(8, 0)).unwrap();
    let cfg = SweepConfig::simulation().with_counts(100, 100, 1);
    let s = run_chain(&data, &Priors::default(), &cfg, RngStream::new(8, 1)).unwrap();
    let t = Thresholds { window: 0.999_999, ..Thresholds::default() };
    let strict = decide_windows_with(&s, 0.9, &t).unwrap();
    let default = decide_windows(&s, 0.9).unwrap();
    for (a, b) in strict.iter().zip(&default) {
        assert_eq!(a.pip, b.pip);
        if a.pip <= 0.999_999 {
            assert_eq!(a.verdict, Verdict::Null);
        }
    }
    let bad = Thresholds { interaction: 1.5, ..Thresholds::default() };
    assert!(decide_windows_with(&s, 0.9, &bad).is_err());
}

proptest! {
    #[test]
    fn verdict_invariant_under_monotone_transform(pip in 0.0f64..1.0, a in 0.2f64..3.0, b in 0.2f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let direct = classify(pip, lo, hi);
        // log is strictly increasing and maps the threshold 1 to 0
        let logged = if !(pip > 0.5) {
            Verdict::Null
        } else if lo.ln() > 0.0 {
            Verdict::Harmful
        } else if hi.ln() < 0.0 {
            Verdict::Protective
        } else {
            Verdict::Null
        };
        prop_assert_eq!(direct, logged);
    }

    #[test]
    fn selection_respects_hierarchy(probs in prop::collection::vec(0.0f64..1.0, 10)) {
        let sel = select_components(&probs, 4);
        let mut idx = 4;
        for j in 0..4 {
            for k in j + 1..4 {
                if sel[idx] {
                    prop_assert!(sel[j] && sel[k]);
                }
                idx += 1;
            }
        }
    }
}

#[test]
fn single_pollutant_effects_sum_to_all_pollutant_effect() {
    let mut rng = RngStream::new(77, 0);
    for _ in 0..1000 {
        let q = rng.random_range(1..=5);
        let r = q * (q + 1) / 2;
        let latent: Vec<f64> = (0..r).map(|_| std_normal(&mut rng)).collect();
        let w = transform_weights(&latent, q).unwrap();
        let comps = w.components();
        let z: Vec<f64> = (0..q).map(|_| rng.random_range(-3.0..3.0)).collect();
        let alpha = rng.random_range(-1.0..1.0);
        let all = all_pollutant_effect(&comps, q, alpha, &z);
        if w.is_degenerate() {
            assert_eq!(all, 0.0);
            continue;
        }
        let per: f64 = (0..q).map(|j| pollutant_effect(&comps, q, alpha, &z, j)).sum();
        // each interaction weight is counted once more when every pollutant moves together
        let inter: f64 = w.inter.iter().sum();
        assert!((per + inter * alpha - all).abs() < 1e-10);
        let interactions: f64 = {
            let mut s = 0.0;
            let mut idx = q;
            for j in 0..q {
                for k in j + 1..q {
                    s += comps[idx] * (z[j] + z[k]);
                    idx += 1;
                }
            }
            s
        };
        assert!((all - (1.0 + interactions) * alpha).abs() < 1e-10);
    }
    // no active interactions: the effect of pollutant j is λ_j α
    let comps = [0.6, 0.4, 0.0];
    assert!((pollutant_effect(&comps, 2, 0.3, &[5.0, -4.0], 1) - 0.12).abs() < 1e-15);
    assert_eq!(all_pollutant_effect(&[0.25, 0.25, 0.5], 2, 0.2, &[0.0, 0.0]), 0.2);
}
