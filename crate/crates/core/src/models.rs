//! Fluctuating Hamiltonian families: drift terms plus bounded control
//! channels, each optionally scaled by a fluctuation multiplier `θ(t)`.
//!
//! All coefficients are `H/ħ` in 1/ns and the GHz figures of the device
//! literature are used as-is (no 2π factor).

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, invalid, Error, Result};
use crate::optimizer::ControlField;
use crate::quantum::{pauli, tensor, Axis, HermitianOperator, QuantumState};
use crate::sampling::{profile_value, tie_groups, Distribution, FluctuationParameter, FluctuationSample, Profile};
use crate::{Scalar, C};

/// A bounded, piecewise-constant control input.
#[derive(Clone, Debug)]
pub struct ControlChannel<T> {
    pub name: String,
    /// Contribution per unit control value (1/ns).
    pub generator: HermitianOperator<T>,
    /// `+1` or `-1`.
    pub sign: T,
    pub lower: T,
    pub upper: T,
    /// Index into [`QubitModel::fluctuations`].
    pub fluctuation: Option<usize>,
}

/// A fixed Hamiltonian term `coefficient · generator`.
#[derive(Clone, Debug)]
pub struct DriftTerm<T> {
    pub name: String,
    pub generator: HermitianOperator<T>,
    pub coefficient: T,
    pub fluctuation: Option<usize>,
}

/// The three model families (the single charge qubit comes with two targets).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    SingleChargeExcited,
    SingleChargeSuperposition,
    CoupledCharge,
    CoupledPhase,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::SingleChargeExcited,
        ModelFamily::SingleChargeSuperposition,
        ModelFamily::CoupledCharge,
        ModelFamily::CoupledPhase,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelFamily::SingleChargeExcited => "single_charge_excited",
            ModelFamily::SingleChargeSuperposition => "single_charge_superposition",
            ModelFamily::CoupledCharge => "coupled_charge",
            ModelFamily::CoupledPhase => "coupled_phase",
        }
    }

    /// The model with its default fluctuation bounds.
    pub fn build<T: Scalar>(self) -> QubitModel<T> {
        match self {
            ModelFamily::SingleChargeExcited => single_charge_qubit(TargetChoice::Excited),
            ModelFamily::SingleChargeSuperposition => single_charge_qubit(TargetChoice::Superposition),
            ModelFamily::CoupledCharge => coupled_charge_qubits(),
            ModelFamily::CoupledPhase => coupled_phase_qubits(),
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelFamily::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| invalid(format!("unknown model {s:?}")))
    }
}

/// Initial-field shapes used to seed training.
#[derive(Clone, Copy, Debug, PartialEq)]
enum InitialShape {
    /// `sin t + cos t + offset`
    SinCosPlus(f64),
    /// `offset + amplitude · sin t`
    SinAround { offset: f64, amplitude: f64 },
}

impl InitialShape {
    fn eval(self, t: f64) -> f64 {
        match self {
            InitialShape::SinCosPlus(offset) => t.sin() + t.cos() + offset,
            InitialShape::SinAround { offset, amplitude } => offset + amplitude * t.sin(),
        }
    }
}

/// A fluctuating qubit model over a fixed horizon split into `intervals`
/// equal steps.
#[derive(Clone, Debug)]
pub struct QubitModel<T> {
    pub family: ModelFamily,
    dim: usize,
    drifts: Vec<DriftTerm<T>>,
    channels: Vec<ControlChannel<T>>,
    fluctuations: Vec<FluctuationParameter<T>>,
    initial_state: QuantumState<T>,
    target_state: QuantumState<T>,
    horizon: T,
    intervals: usize,
    initial_shapes: Vec<InitialShape>,
}

impl<T: Scalar> QubitModel<T> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        family: ModelFamily,
        drifts: Vec<DriftTerm<T>>,
        channels: Vec<ControlChannel<T>>,
        fluctuations: Vec<FluctuationParameter<T>>,
        initial_state: QuantumState<T>,
        target_state: QuantumState<T>,
        horizon: T,
        intervals: usize,
        initial_shapes: Vec<InitialShape>,
    ) -> Result<Self> {
        let dim = initial_state.dim();
        check_dim(dim, target_state.dim())?;
        if !(horizon > T::zero()) || intervals == 0 {
            return Err(invalid("horizon must be positive and intervals at least 1"));
        }
        let mut bound = vec![false; fluctuations.len()];
        for (gen, fl) in drifts
            .iter()
            .map(|d| (&d.generator, d.fluctuation))
            .chain(channels.iter().map(|c| (&c.generator, c.fluctuation)))
        {
            check_dim(dim, gen.dim())?;
            if !gen.is_hermitian() {
                return Err(invalid("generator is not Hermitian"));
            }
            if let Some(i) = fl {
                *bound.get_mut(i).ok_or_else(|| invalid(format!("fluctuation index {i} out of range")))? = true;
            }
        }
        if let Some(i) = bound.iter().position(|b| !b) {
            return Err(invalid(format!("fluctuation {} is not bound to any term", fluctuations[i].name)));
        }
        for c in &channels {
            if !(c.lower <= c.upper) {
                return Err(invalid(format!("channel {} has lower bound above upper bound", c.name)));
            }
        }
        tie_groups(&fluctuations)?;
        Ok(Self { family, dim, drifts, channels, fluctuations, initial_state, target_state, horizon, intervals, initial_shapes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drifts(&self) -> &[DriftTerm<T>] {
        &self.drifts
    }

    pub fn channels(&self) -> &[ControlChannel<T>] {
        &self.channels
    }

    pub fn fluctuations(&self) -> &[FluctuationParameter<T>] {
        &self.fluctuations
    }

    pub fn initial_state(&self) -> &QuantumState<T> {
        &self.initial_state
    }

    pub fn target_state(&self) -> &QuantumState<T> {
        &self.target_state
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn dt(&self) -> T {
        self.horizon / T::from_usize_lossy(self.intervals)
    }

    /// Midpoint `(k + ½) Δt` of zero-based interval `k`, where time-varying
    /// multipliers are evaluated.
    pub fn interval_midpoint(&self, k: usize) -> T {
        (T::from_usize_lossy(k) + T::lit(0.5)) * self.dt()
    }

    pub fn channel_bounds(&self) -> Vec<(T, T)> {
        self.channels.iter().map(|c| (c.lower, c.upper)).collect()
    }

    /// Tie groups of the fluctuation parameters (indices into `fluctuations`).
    pub fn tie_groups(&self) -> Vec<Vec<usize>> {
        tie_groups(&self.fluctuations).expect("validated on construction")
    }

    /// Sets every fluctuation bound to `bound`.
    pub fn with_bound(self, bound: T) -> Result<Self> {
        let n = self.tie_groups().len();
        self.with_group_bounds(&vec![bound; n])
    }

    /// Sets the bound of each tie group.
    pub fn with_group_bounds(mut self, bounds: &[T]) -> Result<Self> {
        let groups = self.tie_groups();
        if bounds.len() != groups.len() {
            return Err(invalid(format!("expected {} bounds (one per tie group), got {}", groups.len(), bounds.len())));
        }
        for (members, &b) in groups.iter().zip(bounds) {
            for &i in members {
                self.fluctuations[i].bound = b;
                self.fluctuations[i].validate()?;
            }
        }
        Ok(self)
    }

    /// Overrides the test-time distribution of every parameter.
    pub fn with_test_distribution(mut self, distribution: Distribution) -> Self {
        for p in &mut self.fluctuations {
            p.distribution = distribution;
        }
        self
    }

    /// `θ_b(t)` for every fluctuation parameter.
    pub fn multipliers(&self, sample: &FluctuationSample<T>, t: T) -> Result<Vec<T>> {
        check_dim(self.fluctuations.len(), sample.len())?;
        Ok(self
            .fluctuations
            .iter()
            .zip(&sample.values)
            .map(|(p, &v)| profile_value(p, v, t))
            .collect())
    }

    /// `θ_b(t_k)` at every interval midpoint, indexed `[k][b]`.
    pub fn multiplier_schedule(&self, sample: &FluctuationSample<T>) -> Result<Vec<Vec<T>>> {
        (0..self.intervals).map(|k| self.multipliers(sample, self.interval_midpoint(k))).collect()
    }

    /// Hamiltonian for given control values and multipliers, without bound checks.
    pub(crate) fn assemble_with(&self, controls: &[T], multipliers: &[T]) -> HermitianOperator<T> {
        let mult = |b: Option<usize>| b.map_or(T::one(), |i| multipliers[i]);
        let mut h = HermitianOperator::zeros(self.dim);
        for d in &self.drifts {
            h.add_scaled(&d.generator, mult(d.fluctuation) * d.coefficient).expect("dims validated");
        }
        for (c, &u) in self.channels.iter().zip(controls) {
            h.add_scaled(&c.generator, mult(c.fluctuation) * c.sign * u).expect("dims validated");
        }
        h
    }

    /// `∂H/∂u_c` at the given multipliers.
    pub(crate) fn channel_derivative(&self, channel: usize, multipliers: &[T]) -> HermitianOperator<T> {
        let c = &self.channels[channel];
        let m = c.fluctuation.map_or(T::one(), |i| multipliers[i]);
        c.generator.scaled(m * c.sign)
    }

    /// The model's standard starting pulses sampled at interval midpoints and
    /// clamped to bounds.
    pub fn initial_field(&self) -> ControlField<T> {
        let shapes = self.initial_shapes.clone();
        ControlField::from_fn(self.channel_bounds(), self.horizon, self.intervals, |c, t| {
            T::lit(shapes[c].eval(t.to_f64().unwrap()))
        })
        .expect("model shape is valid")
    }

    /// Checks that `field` has this model's channel count, interval count and horizon.
    pub fn check_field(&self, field: &ControlField<T>) -> Result<()> {
        check_dim(self.channels.len(), field.channels())?;
        check_dim(self.intervals, field.intervals())?;
        let tol = T::lit(1e-12) * self.horizon.max(T::one());
        if (field.horizon() - self.horizon).abs() > tol {
            return Err(invalid(format!("field horizon {} does not match model horizon {}", field.horizon(), self.horizon)));
        }
        Ok(())
    }
}

/// `H/ħ = Σ θ_b(t)·c·G + Σ θ_b(t)·sign·u·G` for one interval.
pub fn assemble_hamiltonian<T: Scalar>(
    model: &QubitModel<T>,
    controls: &[T],
    sample: &FluctuationSample<T>,
    t: T,
) -> Result<HermitianOperator<T>> {
    check_dim(model.channels.len(), controls.len())?;
    for (c, &u) in model.channels.iter().zip(controls) {
        if !(u >= c.lower && u <= c.upper) {
            return Err(invalid(format!("control {} = {u} outside [{}, {}]", c.name, c.lower, c.upper)));
        }
    }
    let m = model.multipliers(sample, t)?;
    Ok(model.assemble_with(controls, &m))
}

/// Target of the single charge qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetChoice {
    /// `|e⟩`
    Excited,
    /// `(|g⟩ + |e⟩)/√2`
    Superposition,
}

fn on_qubit<T: Scalar>(qubit: usize, op: &HermitianOperator<T>) -> HermitianOperator<T> {
    let id = HermitianOperator::identity(2);
    if qubit == 1 {
        tensor(op, &id)
    } else {
        tensor(&id, op)
    }
}

fn ket<T: Scalar>(amps: &[(f64, f64)]) -> QuantumState<T> {
    let amps: Vec<C<T>> = amps.iter().map(|&(re, im)| C::new(T::lit(re), T::lit(im))).collect();
    QuantumState::new(amps.clone())
        .or_else(|_| QuantumState::normalized(amps))
        .expect("literal state is valid")
}

fn fluct<T: Scalar>(name: &str, bound: f64, distribution: Distribution, profile: Profile) -> FluctuationParameter<T> {
    FluctuationParameter::new(name, T::lit(bound), distribution, profile).expect("literal bound is valid")
}

/// `H/ħ = θ^z u_z σ_z − θ^x u_x σ_x`, `u_z ∈ [0, 40]`, `u_x ∈ [0, 9.1]`,
/// T = 1 ns in 100 steps, from `|g⟩`.
pub fn single_charge_qubit<T: Scalar>(target: TargetChoice) -> QubitModel<T> {
    let (family, target_state) = match target {
        TargetChoice::Excited => (ModelFamily::SingleChargeExcited, ket(&[(0.0, 0.0), (1.0, 0.0)])),
        TargetChoice::Superposition => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            (ModelFamily::SingleChargeSuperposition, ket(&[(h, 0.0), (h, 0.0)]))
        }
    };
    let channels = vec![
        ControlChannel { name: "u_z".into(), generator: pauli(Axis::Z), sign: T::one(), lower: T::zero(), upper: T::lit(40.0), fluctuation: Some(0) },
        ControlChannel { name: "u_x".into(), generator: pauli(Axis::X), sign: -T::one(), lower: T::zero(), upper: T::lit(9.1), fluctuation: Some(1) },
    ];
    let fluctuations = vec![
        fluct("theta_z", 0.25, Distribution::Uniform, Profile::Constant),
        fluct("theta_x", 0.25, Distribution::Uniform, Profile::Constant),
    ];
    QubitModel::new(
        family,
        Vec::new(),
        channels,
        fluctuations,
        ket(&[(1.0, 0.0), (0.0, 0.0)]),
        target_state,
        T::one(),
        100,
        vec![InitialShape::SinCosPlus(20.0), InitialShape::SinCosPlus(5.0)],
    )
    .expect("single charge qubit model is valid")
}

/// Coupling of the two charge qubits through `σ_x ⊗ σ_x`, with
/// `g/ħ = 9.1` fixed x-drifts, T = 2 ns in 200 steps and time-varying
/// fluctuations `θ = 1 − ϑ cos t` (θ₁ = θ₂, θ₃ = θ₄, θ₅ ≡ 1).
pub fn coupled_charge_qubits<T: Scalar>() -> QubitModel<T> {
    let (sx, sz) = (pauli::<T>(Axis::X), pauli::<T>(Axis::Z));
    let g = T::lit(9.1);
    let drifts = vec![
        DriftTerm { name: "g1".into(), generator: on_qubit(1, &sx), coefficient: -g, fluctuation: Some(2) },
        DriftTerm { name: "g2".into(), generator: on_qubit(2, &sx), coefficient: -g, fluctuation: Some(3) },
    ];
    let channels = vec![
        ControlChannel { name: "u1".into(), generator: on_qubit(1, &sz), sign: T::one(), lower: T::zero(), upper: T::lit(40.0), fluctuation: Some(0) },
        ControlChannel { name: "u2".into(), generator: on_qubit(2, &sz), sign: T::one(), lower: T::zero(), upper: T::lit(40.0), fluctuation: Some(1) },
        ControlChannel { name: "chi".into(), generator: tensor(&sx, &sx), sign: -T::one(), lower: T::lit(-0.5), upper: T::lit(0.5), fluctuation: None },
    ];
    let cos = Profile::OneMinusVarthetaCos;
    let fluctuations = vec![
        fluct("theta1", 0.2, Distribution::Uniform, cos).tied(0),
        fluct("theta2", 0.2, Distribution::Uniform, cos).tied(0),
        fluct("theta3", 0.2, Distribution::Uniform, cos).tied(1),
        fluct("theta4", 0.2, Distribution::Uniform, cos).tied(1),
    ];
    let psi0 = ket(&[(0.7, 0.0), (0.1, 0.0), (0.0, 0.7), (0.0, 0.1)]);
    let target = ket(&[(0.7, 0.0), (0.1, 0.0), (0.0, 0.7), (0.0, -0.1)]);
    QubitModel::new(
        ModelFamily::CoupledCharge,
        drifts,
        channels,
        fluctuations,
        psi0,
        target,
        T::lit(2.0),
        200,
        vec![
            InitialShape::SinCosPlus(5.0),
            InitialShape::SinCosPlus(5.0),
            InitialShape::SinAround { offset: 0.0, amplitude: 0.25 },
        ],
    )
    .expect("coupled charge model is valid")
}

/// Level count of each phase qubit's potential well.
const PHASE_LEVELS: f64 = 5.0;

/// `σ_z σ_z` weight `1/(6√(N₁N₂))` of the phase-qubit coupler.
pub fn phase_cross_term_factor() -> f64 {
    1.0 / (6.0 * (PHASE_LEVELS * PHASE_LEVELS).sqrt())
}

/// Two phase qubits with `ω_{1,2}/2 σ_z` controls, fixed `ω_{3,4}/2 σ_x`
/// drifts (ω = 2) and coupler `Ω_c/2 (σ_xσ_x + σ_zσ_z/30)`; T = 50 ns in 200
/// steps. Tested with truncated-Gaussian fluctuations.
pub fn coupled_phase_qubits<T: Scalar>() -> QubitModel<T> {
    let (sx, sz) = (pauli::<T>(Axis::X), pauli::<T>(Axis::Z));
    let half = T::lit(0.5);
    let omega_fixed = T::lit(2.0);
    let drifts = vec![
        DriftTerm { name: "omega3".into(), generator: on_qubit(1, &sx), coefficient: omega_fixed * half, fluctuation: None },
        DriftTerm { name: "omega4".into(), generator: on_qubit(2, &sx), coefficient: omega_fixed * half, fluctuation: None },
    ];
    let mut coupler = tensor(&sx, &sx);
    coupler.add_scaled(&tensor(&sz, &sz), T::lit(phase_cross_term_factor())).expect("4x4");
    let channels = vec![
        ControlChannel { name: "omega1".into(), generator: on_qubit(1, &sz).scaled(half), sign: T::one(), lower: T::zero(), upper: T::lit(5.0), fluctuation: Some(0) },
        ControlChannel { name: "omega2".into(), generator: on_qubit(2, &sz).scaled(half), sign: T::one(), lower: T::zero(), upper: T::lit(5.0), fluctuation: Some(1) },
        ControlChannel { name: "omega_c".into(), generator: coupler.scaled(half), sign: T::one(), lower: T::lit(-0.1), upper: T::lit(0.1), fluctuation: Some(2) },
    ];
    let tg = Distribution::TruncatedGaussian;
    let fluctuations = vec![
        fluct("theta1", 0.25, tg, Profile::Constant).tied(0),
        fluct("theta2", 0.25, tg, Profile::Constant).tied(0),
        fluct("theta3", 0.25, tg, Profile::Constant),
    ];
    let psi0 = ket(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
    let target = ket(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
    QubitModel::new(
        ModelFamily::CoupledPhase,
        drifts,
        channels,
        fluctuations,
        psi0,
        target,
        T::lit(50.0),
        200,
        vec![
            InitialShape::SinCosPlus(0.5),
            InitialShape::SinCosPlus(0.5),
            InitialShape::SinAround { offset: 0.05, amplitude: 0.05 },
        ],
    )
    .expect("coupled phase model is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    type Op = HermitianOperator<f64>;

    fn sample(v: &[f64]) -> FluctuationSample<f64> {
        FluctuationSample::new(v.to_vec())
    }

    fn lin(terms: &[(f64, &Op)]) -> Op {
        let mut h = Op::zeros(terms[0].1.dim());
        for (a, g) in terms {
            h.add_scaled(g, *a).unwrap();
        }
        h
    }

    fn assert_op_close(a: &Op, b: &Op, tol: f64) {
        let d = a.sub(b).unwrap().max_abs();
        assert!(d <= tol, "difference {d}\n{a}\n{b}");
    }

    #[test]
    fn single_qubit_targets() {
        let m = single_charge_qubit::<f64>(TargetChoice::Excited);
        assert_eq!(m.target_state().amplitudes(), &[C::new(0.0, 0.0), C::new(1.0, 0.0)]);
        assert_eq!(m.intervals(), 100);
        assert_eq!(m.horizon(), 1.0);
        let s = single_charge_qubit::<f64>(TargetChoice::Superposition);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.target_state().amplitudes()[0].re - h).abs() < 1e-16);
    }

    #[test]
    fn single_qubit_assembly() {
        let m = single_charge_qubit::<f64>(TargetChoice::Excited);
        let (sz, sx) = (pauli::<f64>(Axis::Z), pauli::<f64>(Axis::X));
        let h = assemble_hamiltonian(&m, &[20.0, 5.0], &sample(&[1.0, 1.0]), 0.3).unwrap();
        assert_eq!(h, lin(&[(20.0, &sz), (-5.0, &sx)]));
        let h = assemble_hamiltonian(&m, &[20.0, 5.0], &sample(&[0.8, 1.2]), 0.3).unwrap();
        assert_op_close(&h, &lin(&[(16.0, &sz), (-6.0, &sx)]), 1e-14);
    }

    #[test]
    fn out_of_bounds_control_rejected() {
        let m = single_charge_qubit::<f64>(TargetChoice::Excited);
        assert!(assemble_hamiltonian(&m, &[41.0, 5.0], &sample(&[1.0, 1.0]), 0.0).is_err());
        assert!(assemble_hamiltonian(&m, &[1.0], &sample(&[1.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn coupled_charge_initial_state() {
        let m = coupled_charge_qubits::<f64>();
        let a = m.initial_state().amplitudes();
        assert_eq!(a, &[C::new(0.7, 0.0), C::new(0.1, 0.0), C::new(0.0, 0.7), C::new(0.0, 0.1)]);
        assert!((m.initial_state().norm() - 1.0).abs() < 1e-15);
        assert_eq!(m.target_state().amplitudes()[3], C::new(0.0, -0.1));
        assert_eq!(m.tie_groups(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn coupled_charge_assembly() {
        let m = coupled_charge_qubits::<f64>();
        let sx = pauli::<f64>(Axis::X);
        let (x1, x2) = (on_qubit(1, &sx), on_qubit(2, &sx));
        let h = assemble_hamiltonian(&m, &[0.0, 0.0, 0.0], &sample(&[0.0; 4]), 1.0).unwrap();
        assert_op_close(&h, &lin(&[(-9.1, &x1), (-9.1, &x2)]), 1e-15);

        // θ₃ at t = π with ϑ₃ = 0.2 is 1.2, giving a -10.92 x-drift on qubit 1.
        let theta = m.multipliers(&sample(&[0.0, 0.0, 0.2, 0.2]), std::f64::consts::PI).unwrap();
        assert!((theta[2] - 1.2).abs() < 1e-15);
        let h = assemble_hamiltonian(&m, &[0.0, 0.0, 0.0], &sample(&[0.0, 0.0, 0.2, 0.2]), std::f64::consts::PI).unwrap();
        assert!((h.get(0, 2).re - (-10.92)).abs() < 1e-12);

        // θ₁ at t = 0 with ϑ₁ = 0.1 is 0.9.
        let z1 = on_qubit(1, &pauli::<f64>(Axis::Z));
        let h = assemble_hamiltonian(&m, &[10.0, 0.0, 0.0], &sample(&[0.1, 0.1, 0.0, 0.0]), 0.0).unwrap();
        assert_op_close(&h, &lin(&[(9.0, &z1), (-9.1, &x1), (-9.1, &x2)]), 1e-13);
    }

    #[test]
    fn phase_cross_factor() {
        assert!((phase_cross_term_factor() - 1.0 / 30.0).abs() < 1e-17);
    }

    #[test]
    fn coupled_phase_assembly() {
        let m = coupled_phase_qubits::<f64>();
        let (sx, sz) = (pauli::<f64>(Axis::X), pauli::<f64>(Axis::Z));
        let (x1, x2) = (on_qubit(1, &sx), on_qubit(2, &sx));
        let h = assemble_hamiltonian(&m, &[0.0, 0.0, 0.0], &sample(&[1.0; 3]), 0.0).unwrap();
        assert_op_close(&h, &lin(&[(1.0, &x1), (1.0, &x2)]), 1e-15);

        let h = assemble_hamiltonian(&m, &[0.0, 0.0, 0.1], &sample(&[1.0; 3]), 0.0).unwrap();
        let coupling = h.sub(&lin(&[(1.0, &x1), (1.0, &x2)])).unwrap();
        let expect = lin(&[(0.05, &tensor(&sx, &sx)), (0.05 / 30.0, &tensor(&sz, &sz))]);
        assert_op_close(&coupling, &expect, 1e-15);
        assert_eq!(m.intervals(), 200);
        assert_eq!(m.dt(), 0.25);
    }

    #[test]
    fn empty_assembly_is_zero() {
        let m = single_charge_qubit::<f64>(TargetChoice::Excited);
        let h = assemble_hamiltonian(&m, &[0.0, 0.0], &sample(&[1.0, 1.0]), 0.0).unwrap();
        assert_eq!(h, Op::zeros(2));
    }

    #[test]
    fn initial_fields_are_clamped_into_bounds() {
        for fam in ModelFamily::ALL {
            let m = fam.build::<f64>();
            let f = m.initial_field();
            m.check_field(&f).unwrap();
            for (c, (lo, hi)) in m.channel_bounds().into_iter().enumerate() {
                for k in 0..f.intervals() {
                    assert!(f.value(c, k) >= lo && f.value(c, k) <= hi);
                }
            }
        }
        let m = single_charge_qubit::<f64>(TargetChoice::Excited);
        let t0 = m.interval_midpoint(0);
        assert_eq!(m.initial_field().value(0, 0), t0.sin() + t0.cos() + 20.0);
    }

    #[test]
    fn bounds_can_be_overridden_per_group() {
        let m = coupled_phase_qubits::<f64>().with_group_bounds(&[0.1, 0.3]).unwrap();
        let b: Vec<f64> = m.fluctuations().iter().map(|p| p.bound).collect();
        assert_eq!(b, vec![0.1, 0.1, 0.3]);
        assert!(coupled_phase_qubits::<f64>().with_group_bounds(&[0.1]).is_err());
        assert!(coupled_phase_qubits::<f64>().with_bound(1.5).is_err());
    }

    #[test]
    fn family_ids_round_trip() {
        for fam in ModelFamily::ALL {
            assert_eq!(fam.id().parse::<ModelFamily>().unwrap(), fam);
        }
        assert!("transmon".parse::<ModelFamily>().is_err());
    }

    #[test]
    fn global_phase_channel_has_zero_gradient() {
        let base = single_charge_qubit::<f64>(TargetChoice::Superposition);
        let mut channels = base.channels().to_vec();
        channels.push(ControlChannel {
            name: "phase".into(),
            generator: Op::identity(2),
            sign: 1.0,
            lower: -5.0,
            upper: 5.0,
            fluctuation: None,
        });
        let mut shapes = base.initial_shapes.clone();
        shapes.push(InitialShape::SinAround { offset: 1.0, amplitude: 2.0 });
        let m = QubitModel::new(
            base.family,
            Vec::new(),
            channels,
            base.fluctuations().to_vec(),
            base.initial_state().clone(),
            base.target_state().clone(),
            base.horizon(),
            base.intervals(),
            shapes,
        )
        .unwrap();
        let ensemble = crate::sampling::training_grid(m.fluctuations(), 3).unwrap();
        let g = crate::optimizer::gradient(&m.initial_field(), &m, &ensemble).unwrap();
        assert!(g[0].iter().any(|v| v.abs() > 1e-3));
        for v in &g[2] {
            assert!(v.abs() < 1e-12, "{v}");
        }
    }
}
