#![allow(dead_code)]

use rand::Rng;
use slc_core::models::QubitModel;
use slc_core::optimizer::ControlField;
use slc_core::sampling::{draw_sample, stream_rng, FluctuationSample, Stream};

/// A field with every value in the middle 90% of its channel range.
pub fn random_field(model: &QubitModel<f64>, rng: &mut impl Rng) -> ControlField<f64> {
    let bounds = model.channel_bounds();
    let values = bounds
        .iter()
        .map(|&(lo, hi)| (0..model.intervals()).map(|_| lo + (hi - lo) * rng.random_range(0.05..0.95)).collect())
        .collect();
    ControlField::new(values, bounds, model.horizon()).unwrap()
}

/// A random field and `n` random fluctuation samples for `model`.
pub fn random_instance(model: &QubitModel<f64>, seed: u64, n: usize) -> (ControlField<f64>, Vec<FluctuationSample<f64>>) {
    let mut rng = stream_rng(seed, Stream::Training);
    let field = random_field(model, &mut rng);
    let ensemble = (0..n).map(|_| draw_sample(model.fluctuations(), &mut rng).unwrap()).collect();
    (field, ensemble)
}
