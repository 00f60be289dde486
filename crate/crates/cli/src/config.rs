//! Flat TOML experiment configuration.
//!
//! Every key is optional; missing keys take the defaults below. Unknown keys
//! are rejected. The resolved configuration (every key spelled out) is
//! echoed next to the outputs and can be fed back in unchanged.
//!
//! ```toml
//! model = "single_charge_superposition"
//! theta = 0.15            # bound for every tie group
//! n_f = 5                 # training grid points per tie group
//! n_test = 5000
//! seed_train = 1
//! seed_test = 2
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slc_core::models::{ModelFamily, QubitModel};
use slc_core::optimizer::OptimizationConfig;
use slc_core::sampling::Distribution;

use crate::error::CliError;

/// Test-time distribution selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestDistribution {
    /// Whatever the model family tests with by default.
    Model,
    Uniform,
    TruncatedGaussian,
}

impl TestDistribution {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "model" => Ok(Self::Model),
            "uniform" => Ok(Self::Uniform),
            "truncated_gaussian" => Ok(Self::TruncatedGaussian),
            other => Err(CliError::Config(format!(
                "test_distribution: unknown value {other:?} (expected model, uniform or truncated_gaussian)"
            ))),
        }
    }

    fn id(self) -> &'static str {
        match self {
            Self::Model => "model",
            Self::Uniform => "uniform",
            Self::TruncatedGaussian => "truncated_gaussian",
        }
    }

    pub fn resolve(self) -> Option<Distribution> {
        match self {
            Self::Model => None,
            Self::Uniform => Some(Distribution::Uniform),
            Self::TruncatedGaussian => Some(Distribution::TruncatedGaussian),
        }
    }
}

/// On-disk form: all keys optional, unknown keys rejected.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<String>,
    theta: Option<f64>,
    theta_groups: Option<Vec<f64>>,
    n_f: Option<usize>,
    n_f_groups: Option<Vec<usize>>,
    allow_even_n_f: Option<bool>,
    test_distribution: Option<String>,
    n_test: Option<usize>,
    seed_train: Option<u64>,
    seed_test: Option<u64>,
    out_dir: Option<String>,
    dump_samples: Option<bool>,
    initial_step: Option<f64>,
    shrink: Option<f64>,
    grow: Option<f64>,
    epsilon: Option<f64>,
    window: Option<usize>,
    max_iterations: Option<usize>,
    max_rejections: Option<usize>,
    sweep_thetas: Option<Vec<f64>>,
    sweep_n_f: Option<Vec<usize>>,
}

/// Fully resolved experiment settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelFamily,
    /// One bound per tie group of `model`.
    pub theta_groups: Vec<f64>,
    /// Training grid points per tie group.
    pub n_f_groups: Vec<usize>,
    pub allow_even_n_f: bool,
    pub test_distribution: TestDistribution,
    pub n_test: usize,
    pub seed_train: u64,
    pub seed_test: u64,
    pub out_dir: PathBuf,
    pub dump_samples: bool,
    pub optimizer: OptimizationConfig<f64>,
    pub sweep_thetas: Vec<f64>,
    pub sweep_n_f: Vec<usize>,
}

pub const DEFAULT_SWEEP_THETAS: [f64; 5] = [0.05, 0.10, 0.15, 0.20, 0.25];
pub const DEFAULT_SWEEP_N_F: [usize; 6] = [1, 3, 5, 7, 9, 11];

fn default_theta(model: ModelFamily) -> f64 {
    match model {
        ModelFamily::CoupledCharge => 0.20,
        _ => 0.25,
    }
}

fn check_theta(key: &str, theta: f64) -> Result<(), CliError> {
    if (0.0..1.0).contains(&theta) {
        Ok(())
    } else {
        Err(CliError::Config(format!("{key}: bound {theta} outside [0, 1)")))
    }
}

impl ExperimentConfig {
    /// Defaults for `model`.
    pub fn for_model(model: ModelFamily) -> Self {
        let groups = model.build::<f64>().tie_groups().len();
        Self {
            model,
            theta_groups: vec![default_theta(model); groups],
            n_f_groups: vec![5; groups],
            allow_even_n_f: false,
            test_distribution: TestDistribution::Model,
            n_test: 5000,
            seed_train: 1,
            seed_test: 2,
            out_dir: PathBuf::from("out"),
            dump_samples: false,
            optimizer: OptimizationConfig::default(),
            sweep_thetas: DEFAULT_SWEEP_THETAS.to_vec(),
            sweep_n_f: DEFAULT_SWEEP_N_F.to_vec(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        Self::resolve(raw)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    fn resolve(raw: RawConfig) -> Result<Self, CliError> {
        let model = match &raw.model {
            Some(m) => m.parse::<ModelFamily>().map_err(|_| {
                let ids: Vec<_> = ModelFamily::ALL.iter().map(|f| f.id()).collect();
                CliError::Config(format!("model: unknown value {m:?} (expected one of {})", ids.join(", ")))
            })?,
            None => return Err(CliError::Config("model: required key missing".into())),
        };
        let mut cfg = Self::for_model(model);
        let groups = cfg.theta_groups.len();

        match (raw.theta, raw.theta_groups) {
            (Some(_), Some(_)) => return Err(CliError::Config("theta_groups: give either theta or theta_groups, not both".into())),
            (Some(t), None) => {
                check_theta("theta", t)?;
                cfg.theta_groups = vec![t; groups];
            }
            (None, Some(v)) => {
                if v.len() != groups {
                    return Err(CliError::Config(format!("theta_groups: model {model} has {groups} tie groups, got {} values", v.len())));
                }
                for &t in &v {
                    check_theta("theta_groups", t)?;
                }
                cfg.theta_groups = v;
            }
            (None, None) => {}
        }

        cfg.allow_even_n_f = raw.allow_even_n_f.unwrap_or(false);
        match (raw.n_f, raw.n_f_groups) {
            (Some(_), Some(_)) => return Err(CliError::Config("n_f_groups: give either n_f or n_f_groups, not both".into())),
            (Some(n), None) => cfg.n_f_groups = vec![n; groups],
            (None, Some(v)) => {
                if v.len() != groups {
                    return Err(CliError::Config(format!("n_f_groups: model {model} has {groups} tie groups, got {} values", v.len())));
                }
                cfg.n_f_groups = v;
            }
            (None, None) => {}
        }
        for &n in &cfg.n_f_groups {
            cfg.check_n_f("n_f", n)?;
        }

        if let Some(d) = raw.test_distribution {
            cfg.test_distribution = TestDistribution::parse(&d)?;
        }
        if let Some(n) = raw.n_test {
            if n == 0 {
                return Err(CliError::Config("n_test: must be at least 1".into()));
            }
            cfg.n_test = n;
        }
        cfg.seed_train = raw.seed_train.unwrap_or(cfg.seed_train);
        cfg.seed_test = raw.seed_test.unwrap_or(cfg.seed_test);
        if let Some(o) = raw.out_dir {
            cfg.out_dir = PathBuf::from(o);
        }
        cfg.dump_samples = raw.dump_samples.unwrap_or(false);

        let opt = &mut cfg.optimizer;
        opt.initial_step = raw.initial_step;
        opt.shrink = raw.shrink.unwrap_or(opt.shrink);
        opt.grow = raw.grow.unwrap_or(opt.grow);
        opt.epsilon = raw.epsilon.unwrap_or(opt.epsilon);
        opt.window = raw.window.unwrap_or(opt.window);
        opt.max_iterations = raw.max_iterations.unwrap_or(opt.max_iterations);
        opt.max_rejections = raw.max_rejections.unwrap_or(opt.max_rejections);
        if let Some(eta) = opt.initial_step {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(CliError::Config(format!("initial_step: must be positive, got {eta}")));
            }
        }
        if !(opt.shrink > 0.0 && opt.shrink < 1.0) {
            return Err(CliError::Config(format!("shrink: must lie in (0, 1), got {}", opt.shrink)));
        }
        if !(opt.grow > 1.0 && opt.grow.is_finite()) {
            return Err(CliError::Config(format!("grow: must exceed 1, got {}", opt.grow)));
        }
        if !(opt.epsilon > 0.0 && opt.epsilon.is_finite()) {
            return Err(CliError::Config(format!("epsilon: must be positive, got {}", opt.epsilon)));
        }
        if opt.window == 0 {
            return Err(CliError::Config("window: must be at least 1".into()));
        }
        if opt.max_rejections == 0 {
            return Err(CliError::Config("max_rejections: must be at least 1".into()));
        }

        if let Some(v) = raw.sweep_thetas {
            if v.is_empty() || v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Config("sweep_thetas: must be non-empty and strictly increasing".into()));
            }
            for &t in &v {
                check_theta("sweep_thetas", t)?;
            }
            cfg.sweep_thetas = v;
        }
        if let Some(v) = raw.sweep_n_f {
            if v.is_empty() || v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Config("sweep_n_f: must be non-empty and strictly increasing".into()));
            }
            for &n in &v {
                cfg.check_n_f("sweep_n_f", n)?;
            }
            cfg.sweep_n_f = v;
        }
        Ok(cfg)
    }

    fn check_n_f(&self, key: &str, n: usize) -> Result<(), CliError> {
        if n == 0 {
            return Err(CliError::Config(format!("{key}: must be at least 1")));
        }
        if n.is_multiple_of(2) && !self.allow_even_n_f {
            return Err(CliError::Config(format!("{key}: {n} is even; grids use odd sizes (set allow_even_n_f = true to override)")));
        }
        Ok(())
    }

    /// Resolved configuration as TOML, every key explicit.
    pub fn to_toml_string(&self) -> String {
        let o = &self.optimizer;
        let raw = RawConfig {
            model: Some(self.model.id().to_string()),
            theta: None,
            theta_groups: Some(self.theta_groups.clone()),
            n_f: None,
            n_f_groups: Some(self.n_f_groups.clone()),
            allow_even_n_f: Some(self.allow_even_n_f),
            test_distribution: Some(self.test_distribution.id().to_string()),
            n_test: Some(self.n_test),
            seed_train: Some(self.seed_train),
            seed_test: Some(self.seed_test),
            out_dir: Some(self.out_dir.to_string_lossy().into_owned()),
            dump_samples: Some(self.dump_samples),
            initial_step: o.initial_step,
            shrink: Some(o.shrink),
            grow: Some(o.grow),
            epsilon: Some(o.epsilon),
            window: Some(o.window),
            max_iterations: Some(o.max_iterations),
            max_rejections: Some(o.max_rejections),
            sweep_thetas: Some(self.sweep_thetas.clone()),
            sweep_n_f: Some(self.sweep_n_f.clone()),
        };
        toml::to_string(&raw).expect("config serialises")
    }

    /// The configured model with per-group bounds and test distribution applied.
    pub fn build_model(&self) -> Result<QubitModel<f64>, CliError> {
        let model = self.model.build::<f64>().with_group_bounds(&self.theta_groups)?;
        Ok(match self.test_distribution.resolve() {
            Some(d) => model.with_test_distribution(d),
            None => model,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml_str("model = \"coupled_charge\"").unwrap();
        assert_eq!(c.theta_groups, vec![0.2, 0.2]);
        assert_eq!(c.n_f_groups, vec![5, 5]);
        assert_eq!(c.n_test, 5000);
        assert_eq!(c.optimizer.window, 100);
        assert_eq!(c.optimizer.epsilon, 1e-4);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::from_toml_str("model = \"coupled_phase\"\nthta = 0.1").unwrap_err();
        assert!(err.to_string().contains("thta"), "{err}");
    }

    #[test]
    fn even_grid_rejected_unless_allowed() {
        let err = ExperimentConfig::from_toml_str("model = \"coupled_phase\"\nn_f = 4").unwrap_err();
        assert!(err.to_string().contains("n_f"), "{err}");
        let ok = ExperimentConfig::from_toml_str("model = \"coupled_phase\"\nn_f = 4\nallow_even_n_f = true").unwrap();
        assert_eq!(ok.n_f_groups, vec![4, 4]);
    }

    #[test]
    fn invalid_values_name_their_key() {
        for (text, key) in [
            ("model = \"x\"", "model"),
            ("model = \"coupled_phase\"\ntheta = 1.5", "theta"),
            ("model = \"coupled_phase\"\ntheta_groups = [0.1]", "theta_groups"),
            ("model = \"coupled_phase\"\nshrink = 2.0", "shrink"),
            ("model = \"coupled_phase\"\nn_test = 0", "n_test"),
            ("model = \"coupled_phase\"\ntest_distribution = \"cauchy\"", "test_distribution"),
            ("model = \"coupled_phase\"\nsweep_thetas = [0.2, 0.1]", "sweep_thetas"),
            ("theta = 0.1", "model"),
        ] {
            let err = ExperimentConfig::from_toml_str(text).unwrap_err();
            assert!(matches!(err, CliError::Config(_)));
            assert!(err.to_string().contains(key), "{text}: {err}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let text = "model = \"single_charge_excited\"\ntheta = 0.15\nn_test = 10\ninitial_step = 0.5\nseed_test = 99";
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        let echoed = c.to_toml_string();
        let back = ExperimentConfig::from_toml_str(&echoed).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml_string(), echoed);
    }
}
