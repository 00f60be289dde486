use num_complex::Complex64;
use proptest::prelude::*;
use slc_core::quantum::{evolve, fidelity, pauli, step_propagator, Axis, HermitianOperator, Propagator, QuantumState};

fn hermitian(dim: usize, raw: &[f64]) -> HermitianOperator<f64> {
    let mut e = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut it = raw.iter().copied();
    for i in 0..dim {
        e[i * dim + i] = Complex64::new(it.next().unwrap(), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(it.next().unwrap(), it.next().unwrap());
            e[i * dim + j] = z;
            e[j * dim + i] = z.conj();
        }
    }
    HermitianOperator::from_entries(dim, e).unwrap()
}

fn hermitian_strategy() -> impl Strategy<Value = HermitianOperator<f64>> {
    prop_oneof![Just(2usize), Just(4usize)]
        .prop_flat_map(|d| (Just(d), prop::collection::vec(-50.0..50.0f64, d * d)))
        .prop_map(|(d, raw)| hermitian(d, &raw))
}

/// `exp(-iH dt)` by Taylor series with scaling and squaring.
fn series_exp(h: &HermitianOperator<f64>, dt: f64) -> Vec<Complex64> {
    let d = h.dim();
    let norm = h.max_abs() * d as f64 * dt;
    let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
    let s = dt / f64::from(2u32.pow(squarings));
    let a: Vec<Complex64> = h.entries().iter().map(|z| Complex64::new(0.0, -s) * z).collect();
    let mul = |x: &[Complex64], y: &[Complex64]| {
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    out[i * d + j] += x[i * d + k] * y[k * d + j];
                }
            }
        }
        out
    };
    let mut sum = vec![Complex64::new(0.0, 0.0); d * d];
    let mut term = sum.clone();
    for i in 0..d {
        sum[i * d + i] = Complex64::new(1.0, 0.0);
        term[i * d + i] = Complex64::new(1.0, 0.0);
    }
    for n in 1..30 {
        term = mul(&term, &a).into_iter().map(|z| z / n as f64).collect();
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn step_propagators_are_unitary(h in hermitian_strategy(), dt in 1e-4..0.1f64) {
        let u = step_propagator(&h, dt).unwrap();
        prop_assert!(u.unitarity_error() < 1e-12, "{}", u.unitarity_error());
    }

    #[test]
    fn steps_compose(h in hermitian_strategy(), a in 1e-3..0.05f64, b in 1e-3..0.05f64) {
        let ua = step_propagator(&h, a).unwrap();
        let ub = step_propagator(&h, b).unwrap();
        let uab = step_propagator(&h, a + b).unwrap();
        prop_assert!(max_diff((&ua * &ub).entries(), uab.entries()) < 1e-11);
    }

    #[test]
    fn matches_series_exponential(h in hermitian_strategy(), dt in 1e-3..0.05f64) {
        let u = step_propagator(&h, dt).unwrap();
        prop_assert!(max_diff(u.entries(), &series_exp(&h, dt)) < 1e-11);
    }

    #[test]
    fn fidelity_ignores_global_phase(re in prop::collection::vec(-1.0..1.0f64, 8), alpha in -10.0..10.0f64) {
        let amps: Vec<Complex64> = re.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let a = QuantumState::normalized(amps).unwrap();
        let b = QuantumState::basis(4, 2).unwrap();
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((fidelity(&a.with_global_phase(alpha), &b).unwrap() - f).abs() < 1e-15);
        prop_assert!((fidelity(&a, &b.with_global_phase(alpha)).unwrap() - f).abs() < 1e-15);
    }

    #[test]
    fn evolution_preserves_norm(h in hermitian_strategy(), steps in 1usize..40) {
        let psi0 = QuantumState::basis(h.dim(), 0).unwrap();
        let schedule = vec![(h, 0.01); steps];
        let traj = evolve(&psi0, &schedule).unwrap();
        prop_assert_eq!(traj.states.len(), steps + 1);
        for s in &traj.states {
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn rabi_oscillation() {
    let g = 3.7;
    let h = pauli::<f64>(Axis::X).scaled(-g);
    let ground = QuantumState::basis(2, 0).unwrap();
    let excited = QuantumState::basis(2, 1).unwrap();
    for i in 1..=50 {
        let t = i as f64 * 0.02;
        let traj = evolve(&ground, &[(h.clone(), t)]).unwrap();
        let p = fidelity(traj.final_state(), &excited).unwrap().powi(2);
        assert!((p - (g * t).sin().powi(2)).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn identity_propagator_for_zero_hamiltonian() {
    let u = step_propagator(&HermitianOperator::<f64>::zeros(4), 0.3).unwrap();
    assert_eq!(u.entries(), Propagator::<f64>::identity(4).entries());
}

#[test]
fn rejects_nonpositive_step() {
    assert!(step_propagator(&pauli::<f64>(Axis::Z), 0.0).is_err());
    assert!(step_propagator(&pauli::<f64>(Axis::Z), -1.0).is_err());
}
