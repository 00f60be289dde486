mod common;

use common::random_instance;
use slc_core::evaluation::{monte_carlo_fidelity, sweep_bound, SweepSettings, TestReport, HISTOGRAM_BINS};
use slc_core::models::ModelFamily;
use slc_core::optimizer::{evaluate_sample, OptimizationConfig};
use slc_core::sampling::FluctuationSample;

#[test]
fn reports_are_deterministic() {
    let model = ModelFamily::CoupledPhase.build::<f64>();
    let (field, _) = random_instance(&model, 1, 0);
    let a = monte_carlo_fidelity(&field, &model, 300, 17).unwrap();
    let b = monte_carlo_fidelity(&field, &model, 300, 17).unwrap();
    assert_eq!(a.csv_fields(), b.csv_fields());
    assert_eq!(a.fidelities, b.fidelities);
    assert_eq!(a.histogram, b.histogram);
    let c = monte_carlo_fidelity(&field, &model, 300, 18).unwrap();
    assert_ne!(a.fidelities, c.fidelities);
}

#[test]
fn report_invariants() {
    for family in ModelFamily::ALL {
        let model = family.build::<f64>();
        let (field, _) = random_instance(&model, 2, 0);
        let r = monte_carlo_fidelity(&field, &model, 500, 3).unwrap();
        assert_eq!(r.n_samples, 500);
        assert_eq!(r.histogram.len(), HISTOGRAM_BINS);
        assert_eq!(r.histogram.iter().sum::<u64>(), 500);
        assert!(r.fidelities.iter().all(|f| (0.0..=1.0).contains(f)));
        assert!(r.min_fidelity <= r.mean_fidelity && r.mean_fidelity <= 1.0);
        assert!(r.std_fidelity >= 0.0);
    }
}

#[test]
fn combined_batches_have_weighted_mean() {
    let model = ModelFamily::SingleChargeSuperposition.build::<f64>();
    let (field, _) = random_instance(&model, 4, 0);
    let a = monte_carlo_fidelity(&field, &model, 123, 1).unwrap();
    let b = monte_carlo_fidelity(&field, &model, 457, 2).unwrap();
    let u = a.combine(&b).unwrap();
    let weighted = (123.0 * a.mean_fidelity + 457.0 * b.mean_fidelity) / 580.0;
    assert!((u.mean_fidelity - weighted).abs() < 1e-12);
    assert_eq!(u.n_samples, 580);
    assert_eq!(u.min_fidelity, a.min_fidelity.min(b.min_fidelity));
}

#[test]
fn single_sample_without_fluctuation_is_nominal() {
    let model = ModelFamily::CoupledCharge.build::<f64>().with_bound(0.0).unwrap();
    let (field, _) = random_instance(&model, 5, 0);
    let r = monte_carlo_fidelity(&field, &model, 1, 9).unwrap();
    let nominal = evaluate_sample(&field, &model, &FluctuationSample::nominal(model.fluctuations()), false).unwrap();
    assert_eq!(r.mean_fidelity, nominal.fidelity());
    assert_eq!(r.std_fidelity, 0.0);
}

#[test]
fn empty_reports_are_rejected() {
    assert!(TestReport::<f64>::from_fidelities(Vec::new(), Vec::new(), 0).is_err());
    let model = ModelFamily::SingleChargeExcited.build::<f64>();
    assert!(monte_carlo_fidelity(&model.initial_field(), &model, 0, 1).is_err());
}

#[test]
fn nominal_sweep_point_is_perfect() {
    let settings = SweepSettings { n_f: 1, n_test: 50, optimizer: OptimizationConfig::default(), ..Default::default() };
    let table = sweep_bound(ModelFamily::SingleChargeSuperposition, &[0.0], &settings).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert!(table.rows[0].report.mean_fidelity >= 0.9999);
    assert!(table.to_csv().starts_with("theta,mean_fidelity,std_fidelity,min_fidelity,n,seed\n"));
    assert!(sweep_bound(ModelFamily::SingleChargeSuperposition, &[0.1, 0.05], &settings).is_err());
}
