//! Fluctuation parameters and their realisations.
//!
//! Training uses deterministic equally spaced grids; testing draws from each
//! parameter's distribution. Random streams are ChaCha8 generators seeded
//! from a `u64` root seed, with one ChaCha stream id per purpose (see
//! [`Stream`]). This choice is part of the reproducibility contract and
//! will not change between releases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{invalid, Result};
use crate::Scalar;

/// Random generator used for all test sampling.
pub type SlcRng = ChaCha8Rng;

/// Purpose-specific sub-streams derived from one root seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Training = 0,
    Testing = 1,
}

/// ChaCha8 generator for `seed` on the stream reserved for `purpose`.
pub fn stream_rng(seed: u64, purpose: Stream) -> SlcRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// Test-time distribution of a fluctuation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    Uniform,
    /// `μ = 0`, `σ = Θ/3`, truncated to `[-Θ, Θ]` around the centre.
    TruncatedGaussian,
}

/// How a sampled value turns into the multiplier `θ(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// The sample is `θ` itself, in `[1-Θ, 1+Θ]`.
    Constant,
    /// The sample is `ϑ ∈ [-Θ, Θ]` and `θ(t) = 1 - ϑ cos t` (t in ns).
    OneMinusVarthetaCos,
}

impl Profile {
    /// Centre of the sampled value's support.
    pub fn center<T: Scalar>(self) -> T {
        match self {
            Profile::Constant => T::one(),
            Profile::OneMinusVarthetaCos => T::zero(),
        }
    }
}

/// A bounded multiplicative fluctuation on one Hamiltonian term.
#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationParameter<T> {
    pub name: String,
    /// Half-width `Θ` of the fluctuation interval.
    pub bound: T,
    pub distribution: Distribution,
    pub profile: Profile,
    /// Parameters sharing a group always receive the same sampled value.
    pub tie_group: Option<u32>,
}

impl<T: Scalar> FluctuationParameter<T> {
    pub fn new(name: impl Into<String>, bound: T, distribution: Distribution, profile: Profile) -> Result<Self> {
        let p = Self { name: name.into(), bound, distribution, profile, tie_group: None };
        p.validate()?;
        Ok(p)
    }

    pub fn tied(mut self, group: u32) -> Self {
        self.tie_group = Some(group);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bound >= T::zero() && self.bound < T::one()) {
            return Err(invalid(format!("fluctuation bound for {} must lie in [0, 1), got {}", self.name, self.bound)));
        }
        Ok(())
    }

    pub fn center(&self) -> T {
        self.profile.center()
    }

    /// Closed support of the sampled value.
    pub fn support(&self) -> (T, T) {
        let c = self.center();
        (c - self.bound, c + self.bound)
    }
}

/// One concrete realisation: a value per parameter, in parameter order.
#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationSample<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> FluctuationSample<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    /// Every parameter at the centre of its support (all `θ ≡ 1`).
    pub fn nominal(params: &[FluctuationParameter<T>]) -> Self {
        Self { values: params.iter().map(|p| p.center()).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Truncated normal with `μ = 0`, `σ = Θ/3` on `[-Θ, Θ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedGaussianSpec<T> {
    pub bound: T,
}

/// Truncation point in units of σ.
const CUT: f64 = 3.0;

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

impl<T: Scalar> TruncatedGaussianSpec<T> {
    pub fn new(bound: T) -> Result<Self> {
        if !(bound > T::zero()) {
            return Err(invalid("truncated Gaussian needs a positive bound"));
        }
        Ok(Self { bound })
    }

    pub fn mu(&self) -> T {
        T::zero()
    }

    pub fn sigma(&self) -> T {
        self.bound / T::lit(CUT)
    }

    pub fn support(&self) -> (T, T) {
        (-self.bound, self.bound)
    }

    /// `φ((x-μ)/σ) / (σ [Φ((r-μ)/σ) - Φ((l-μ)/σ)])` inside the support, 0 outside.
    pub fn pdf(&self, x: f64) -> f64 {
        let b = self.bound.to_f64().unwrap();
        if x < -b || x > b {
            return 0.0;
        }
        let sigma = b / CUT;
        std_normal_pdf(x / sigma) / (sigma * (std_normal_cdf(CUT) - std_normal_cdf(-CUT)))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let b = self.bound.to_f64().unwrap();
        if x <= -b {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        let sigma = b / CUT;
        let lo = std_normal_cdf(-CUT);
        (std_normal_cdf(x / sigma) - lo) / (std_normal_cdf(CUT) - lo)
    }

    /// Closed-form standard deviation of the truncated law,
    /// `σ √(1 - 2c φ(c) / (2Φ(c) - 1))` with `c = 3`.
    pub fn effective_std(&self) -> T {
        let mass = 2.0 * std_normal_cdf(CUT) - 1.0;
        let factor = (1.0 - 2.0 * CUT * std_normal_pdf(CUT) / mass).sqrt();
        self.sigma() * T::lit(factor)
    }
}

/// `center - Θ + (2m - 1) Θ / N` for `m = 1..=N`.
///
/// Computed as `center + (2m - 1 - N) Θ / N` so that mirrored points carry
/// exactly opposite offsets.
pub fn grid_values<T: Scalar>(bound: T, n: usize, center: T) -> Result<Vec<T>> {
    if n == 0 {
        return Err(invalid("grid needs at least one point"));
    }
    if !(bound >= T::zero()) {
        return Err(invalid(format!("grid bound must be non-negative, got {bound}")));
    }
    let nn = T::from_usize_lossy(n);
    Ok((1..=n)
        .map(|m| {
            let k = 2.0 * m as f64 - 1.0 - n as f64;
            center + T::lit(k) * bound / nn
        })
        .collect())
}

/// Indices of the parameters in each tie group, in order of first appearance.
/// Untied parameters form singleton groups.
pub fn tie_groups<T: Scalar>(params: &[FluctuationParameter<T>]) -> Result<Vec<Vec<usize>>> {
    let mut groups: Vec<(Option<u32>, Vec<usize>)> = Vec::new();
    for (i, p) in params.iter().enumerate() {
        p.validate()?;
        match p.tie_group.and_then(|g| groups.iter_mut().find(|(id, _)| *id == Some(g))) {
            Some((_, members)) => {
                let rep = &params[members[0]];
                if rep.bound != p.bound || rep.distribution != p.distribution || rep.profile != p.profile {
                    return Err(invalid(format!("tied parameters {} and {} disagree on bound/distribution/profile", rep.name, p.name)));
                }
                members.push(i);
            }
            None => groups.push((p.tie_group, vec![i])),
        }
    }
    Ok(groups.into_iter().map(|(_, m)| m).collect())
}

/// Cartesian product of per-group grids with `n_per_param` points each.
pub fn training_grid<T: Scalar>(params: &[FluctuationParameter<T>], n_per_param: usize) -> Result<Vec<FluctuationSample<T>>> {
    let groups = tie_groups(params)?;
    training_grid_per_group(params, &vec![n_per_param; groups.len()])
}

/// Cartesian product of per-group grids with `counts[g]` points for group `g`.
/// The first group varies slowest.
pub fn training_grid_per_group<T: Scalar>(params: &[FluctuationParameter<T>], counts: &[usize]) -> Result<Vec<FluctuationSample<T>>> {
    let groups = tie_groups(params)?;
    if counts.len() != groups.len() {
        return Err(invalid(format!("expected {} grid sizes (one per tie group), got {}", groups.len(), counts.len())));
    }
    let axes = groups
        .iter()
        .zip(counts)
        .map(|(members, &n)| {
            let rep = &params[members[0]];
            grid_values(rep.bound, n, rep.center())
        })
        .collect::<Result<Vec<_>>>()?;

    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut index = vec![0usize; axes.len()];
    for _ in 0..total {
        let mut values = vec![T::zero(); params.len()];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                values[i] = axes[g][index[g]];
            }
        }
        out.push(FluctuationSample { values });
        for g in (0..axes.len()).rev() {
            index[g] += 1;
            if index[g] < axes[g].len() {
                break;
            }
            index[g] = 0;
        }
    }
    Ok(out)
}

/// Uniform draw on `[center - Θ, center + Θ]`.
pub fn sample_uniform<T: Scalar, R: Rng + ?Sized>(bound: T, center: T, rng: &mut R) -> T {
    let u: f64 = rng.random();
    center + bound * T::lit(2.0 * u - 1.0)
}

/// Inverse-CDF draw from the truncated Gaussian, shifted by `center`.
pub fn sample_truncated_gaussian<T: Scalar, R: Rng + ?Sized>(spec: &TruncatedGaussianSpec<T>, center: T, rng: &mut R) -> T {
    let u: f64 = rng.random();
    let lo = std_normal_cdf(-CUT);
    let hi = std_normal_cdf(CUT);
    let z = std_normal_quantile(lo + u * (hi - lo)).clamp(-CUT, CUT);
    let x = (spec.sigma() * T::lit(z)).max(-spec.bound).min(spec.bound);
    center + x
}

/// Multiplier `θ(t)` for a sampled value.
pub fn profile_value<T: Scalar>(param: &FluctuationParameter<T>, sampled: T, t: T) -> T {
    match param.profile {
        Profile::Constant => sampled,
        Profile::OneMinusVarthetaCos => T::one() - sampled * t.cos(),
    }
}

/// One random realisation respecting tie groups; each group draws once
/// from its representative's distribution.
pub fn draw_sample<T: Scalar, R: Rng + ?Sized>(params: &[FluctuationParameter<T>], rng: &mut R) -> Result<FluctuationSample<T>> {
    let groups = tie_groups(params)?;
    let mut values = vec![T::zero(); params.len()];
    for members in &groups {
        let rep = &params[members[0]];
        let v = if rep.bound == T::zero() {
            rep.center()
        } else {
            match rep.distribution {
                Distribution::Uniform => sample_uniform(rep.bound, rep.center(), rng),
                Distribution::TruncatedGaussian => sample_truncated_gaussian(&TruncatedGaussianSpec::new(rep.bound)?, rep.center(), rng),
            }
        };
        for &i in members {
            values[i] = v;
        }
    }
    Ok(FluctuationSample { values })
}
