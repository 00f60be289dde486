use slc_core::models::{single_charge_qubit, ModelFamily, TargetChoice};
use slc_core::optimizer::{train, ControlField, OptimizationConfig, StopReason};
use slc_core::sampling::{training_grid, FluctuationSample};

fn short(max_iterations: usize) -> OptimizationConfig<f64> {
    OptimizationConfig { max_iterations, ..Default::default() }
}

#[test]
fn history_is_monotone_and_fields_stay_in_bounds() {
    let model = ModelFamily::SingleChargeSuperposition.build::<f64>().with_bound(0.15).unwrap();
    let ensemble = training_grid(model.fluctuations(), 3).unwrap();
    let result = train(&model, &ensemble, &model.initial_field(), &short(300)).unwrap();
    assert!(result.j_history.windows(2).all(|w| w[1] >= w[0]));
    assert!(result.j_history.iter().all(|j| (0.0..=1.0).contains(j)));
    assert!(result.field.is_within_bounds());
    assert_eq!(result.sample_fidelities.len(), ensemble.len());
    assert!(result.final_objective() > result.j_history[0]);
}

#[test]
fn training_is_deterministic() {
    let model = ModelFamily::CoupledCharge.build::<f64>();
    let ensemble = training_grid(model.fluctuations(), 3).unwrap();
    let a = train(&model, &ensemble, &model.initial_field(), &short(40)).unwrap();
    let b = train(&model, &ensemble, &model.initial_field(), &short(40)).unwrap();
    let bits = |h: &[f64]| h.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.j_history), bits(&b.j_history));
    assert_eq!(a.field, b.field);
}

#[test]
fn optimal_field_is_a_fixed_point() {
    let model = single_charge_qubit::<f64>(TargetChoice::Excited).with_bound(0.0).unwrap();
    let ensemble = vec![FluctuationSample::nominal(model.fluctuations())];
    let init = ControlField::from_fn(model.channel_bounds(), model.horizon(), model.intervals(), |c, _| {
        if c == 0 { 0.0 } else { std::f64::consts::FRAC_PI_2 }
    })
    .unwrap();
    let result = train(&model, &ensemble, &init, &OptimizationConfig::default()).unwrap();
    assert_eq!(result.stop_reason, StopReason::Converged);
    assert!(result.iterations <= 110, "{}", result.iterations);
    assert!(result.final_objective() >= 1.0 - 1e-12);
    for (a, b) in result.field.values().iter().flatten().zip(init.values().iter().flatten()) {
        assert!((a - b).abs() < 1e-3);
    }
}

#[test]
fn nominal_training_reaches_unit_objective() {
    let model = ModelFamily::SingleChargeExcited.build::<f64>().with_bound(0.0).unwrap();
    let ensemble = training_grid(model.fluctuations(), 1).unwrap();
    let result = train(&model, &ensemble, &model.initial_field(), &OptimizationConfig::default()).unwrap();
    assert!(result.converged);
    assert!(result.final_objective() >= 0.9999);
}

#[test]
fn max_iterations_is_reported() {
    let model = ModelFamily::SingleChargeExcited.build::<f64>();
    let ensemble = training_grid(model.fluctuations(), 3).unwrap();
    let result = train(&model, &ensemble, &model.initial_field(), &short(5)).unwrap();
    assert_eq!(result.stop_reason, StopReason::MaxIterations);
    assert!(!result.converged);
    assert_eq!(result.iterations, 5);
}

#[test]
fn invalid_configs_are_rejected() {
    let model = ModelFamily::SingleChargeExcited.build::<f64>();
    let ensemble = training_grid(model.fluctuations(), 1).unwrap();
    for cfg in [
        OptimizationConfig { epsilon: 0.0, ..Default::default() },
        OptimizationConfig { window: 0, ..Default::default() },
        OptimizationConfig { shrink: 1.0, ..Default::default() },
        OptimizationConfig { grow: 0.9, ..Default::default() },
    ] {
        assert!(train(&model, &ensemble, &model.initial_field(), &cfg).is_err());
    }
}
