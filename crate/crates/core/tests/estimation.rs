mod common;

use common::{breslow_increments, cox_oracle, random_dataset};
use lmfrail::em::em_fixed_eta;
use lmfrail::profile::{breslow_lmm_update, profile_loglik};
use lmfrail::sim::{generate_dataset, run_comparison, FrailtySpec, Method, SimConfig};
use lmfrail::{em_fit, fit, BaselineHazard, EmConfig, FitConfig, LmmParams};

fn no_frailty_fit() -> FitConfig {
    FitConfig { fixed_lambda: Some(LmmParams::ORIGIN), ..FitConfig::default() }
}

#[test]
fn baseline_update_at_origin_is_breslow() {
    for k in 0..100 {
        let data = random_dataset(k, 5 + (k as usize % 46), 2, k % 3 == 0);
        let beta = [0.5, -0.25];
        let BaselineHazard::Nonparametric(jumps) = breslow_lmm_update(&data, &beta, &LmmParams::ORIGIN).unwrap()
        else {
            panic!("step baseline expected");
        };
        let oracle = breslow_increments(&data, &beta);
        assert_eq!(jumps.len(), oracle.len());
        for (j, (t, inc)) in jumps.iter().zip(oracle) {
            assert_eq!(j.time, t);
            assert!((j.increment - inc).abs() <= 1e-12 * inc, "{} vs {inc}", j.increment);
        }
    }
}

#[test]
fn fit_without_frailty_is_the_cox_estimate() {
    for k in 0..10 {
        let p = 1 + k as usize % 2;
        let data = random_dataset(40 + k, 60, p, k % 2 == 0);
        let oracle = cox_oracle(&data);
        let f = fit(&data, &no_frailty_fit()).unwrap();
        assert!(f.converged);
        for (a, b) in f.beta_hat.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-4, "{:?} vs {oracle:?}", f.beta_hat);
        }
    }
}

#[test]
fn em_without_frailty_is_the_cox_estimate() {
    for k in 0..10 {
        let data = random_dataset(70 + k, 60, 2, k % 2 == 1);
        let oracle = cox_oracle(&data);
        let f = em_fixed_eta(&data, 0.0, &EmConfig::default(), None).unwrap();
        assert!(f.converged);
        for (a, b) in f.beta.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-4, "{:?} vs {oracle:?}", f.beta);
        }
    }
}

#[test]
fn both_methods_are_consistent_without_frailty() {
    let sim = SimConfig { n: 2000, frailty: FrailtySpec::None, replicates: 4, master_seed: 5, ..SimConfig::default() };
    let report = run_comparison(&sim, &FitConfig::default(), &EmConfig::default(), &[Method::Lmm, Method::Em]).unwrap();
    for row in &report.rows {
        assert_eq!(row.failures, 0);
        assert!(row.bias.unwrap().abs() <= 0.05, "{row:?}");
    }
}

#[test]
fn profile_peaks_near_the_true_coefficient() {
    let sim = SimConfig { n: 300, ..SimConfig::default() };
    let data = generate_dataset(&sim, 2).unwrap();
    let cfg = FitConfig::default();
    let truth = profile_loglik(&data, &[sim.beta_true], &cfg).unwrap();
    assert!(truth > profile_loglik(&data, &[sim.beta_true + 2.0], &cfg).unwrap());
    assert!(truth > profile_loglik(&data, &[sim.beta_true - 2.0], &cfg).unwrap());
    let f = fit(&data, &cfg).unwrap();
    assert!(f.converged);
    assert!(f.profile_loglik >= truth - 1e-9);
}

#[test]
fn all_censored_data_is_refused() {
    let data = lmfrail::SurvivalDataset::new(vec![
        lmfrail::SurvivalRecord::new(1.0, false, vec![0.0]),
        lmfrail::SurvivalRecord::new(2.0, false, vec![1.0]),
    ])
    .unwrap();
    assert!(fit(&data, &FitConfig::default()).is_err());
    assert!(em_fit(&data, &EmConfig::default()).is_err());
}
