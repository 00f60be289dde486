//! The `train`, `test`, `sweep-bound`, `sweep-nf` and `reproduce` commands.
//!
//! Every output is a deterministic function of the resolved configuration:
//! no timestamps or thread-dependent values are written to files. Timing
//! goes to the log stream.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use slc_core::evaluation::{
    monte_carlo_fidelity, sweep_bound, sweep_sample_count, SweepSettings, SweepTable, TestReport, HISTOGRAM_BINS,
    REPORT_CSV_COLUMNS,
};
use slc_core::models::{ModelFamily, QubitModel};
use slc_core::optimizer::{train, ControlField, TrainingResult};
use slc_core::sampling::training_grid_per_group;

use crate::config::ExperimentConfig;
use crate::error::{CliError, ExitCode};
use crate::field_file::FieldFile;

/// Figures that `reproduce` knows how to regenerate.
pub const FIGURES: [u32; 5] = [1, 2, 4, 5, 6];

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Train,
    Test { field: PathBuf },
    SweepBound,
    SweepNf,
    Reproduce { figure: u32 },
}

/// Command-line flags that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed_train: Option<u64>,
    pub seed_test: Option<u64>,
    pub out: Option<PathBuf>,
    pub dump_samples: bool,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit: ExitCode,
    /// Human-readable summary lines for stdout.
    pub summary: Vec<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed_train {
            cfg.seed_train = s;
        }
        if let Some(s) = self.seed_test {
            cfg.seed_test = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if self.dump_samples {
            cfg.dump_samples = true;
        }
    }
}

/// Runs `command`. `config` is required for everything except `reproduce`,
/// where it only supplies seeds, test sizes, sweep grids and optimizer knobs.
pub fn run(command: &Command, config: Option<ExperimentConfig>, overrides: &Overrides) -> Result<Outcome, CliError> {
    if let Command::Reproduce { figure } = command {
        return reproduce(*figure, config, overrides);
    }
    let mut cfg = config.ok_or_else(|| CliError::Config("config: --config <path> is required for this command".into()))?;
    overrides.apply(&mut cfg);
    prepare_out_dir(&cfg)?;
    match command {
        Command::Train => cmd_train(&cfg),
        Command::Test { field } => cmd_test(&cfg, field),
        Command::SweepBound => cmd_sweep_bound(&cfg),
        Command::SweepNf => cmd_sweep_nf(&cfg),
        Command::Reproduce { .. } => unreachable!(),
    }
}

fn prepare_out_dir(cfg: &ExperimentConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
    write(&cfg.out_dir.join("config.resolved.toml"), &cfg.to_toml_string())
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn exit_for(converged: bool) -> ExitCode {
    if converged {
        ExitCode::Success
    } else {
        ExitCode::MaxIterations
    }
}

fn settings(cfg: &ExperimentConfig) -> Result<SweepSettings<f64>, CliError> {
    let n_f = cfg.n_f_groups[0];
    if cfg.n_f_groups.iter().any(|&n| n != n_f) {
        return Err(CliError::Config("n_f_groups: sweeps need the same grid size for every tie group".into()));
    }
    Ok(SweepSettings {
        n_f,
        n_test: cfg.n_test,
        seed_train: cfg.seed_train,
        seed_test: cfg.seed_test,
        optimizer: cfg.optimizer.clone(),
        test_distribution: cfg.test_distribution.resolve(),
    })
}

fn uniform_theta(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    let t = cfg.theta_groups[0];
    if cfg.theta_groups.iter().any(|&x| x != t) {
        return Err(CliError::Config("theta_groups: this command needs one bound shared by every tie group".into()));
    }
    Ok(t)
}

fn j_history_csv(result: &TrainingResult<f64>) -> String {
    let mut s = String::from("iteration,objective\n");
    for (i, j) in result.j_history.iter().enumerate() {
        writeln!(s, "{i},{j}").unwrap();
    }
    s
}

fn train_model(cfg: &ExperimentConfig, model: &QubitModel<f64>) -> Result<TrainingResult<f64>, CliError> {
    let ensemble = training_grid_per_group(model.fluctuations(), &cfg.n_f_groups)?;
    let start = Instant::now();
    let result = train(model, &ensemble, &model.initial_field(), &cfg.optimizer)?;
    info!(
        "trained {} on {} samples: {} iterations, J = {}, {:?}, {:.1?}",
        model.family,
        ensemble.len(),
        result.iterations,
        result.final_objective(),
        result.stop_reason,
        start.elapsed()
    );
    Ok(result)
}

fn training_summary(model: ModelFamily, result: &TrainingResult<f64>) -> String {
    format!(
        "model={} iterations={} final_j={} converged={} stop={:?}",
        model,
        result.iterations,
        result.final_objective(),
        result.converged,
        result.stop_reason
    )
}

fn cmd_train(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let model = cfg.build_model()?;
    let result = train_model(cfg, &model)?;
    FieldFile::from_field(&model, &result.field, cfg.seed_train, result.final_objective()).write(&cfg.out_dir.join("field.csv"))?;
    write(&cfg.out_dir.join("j_history.csv"), &j_history_csv(&result))?;
    Ok(Outcome { exit: exit_for(result.converged), summary: vec![training_summary(cfg.model, &result)] })
}

fn report_csv(report: &TestReport<f64>) -> String {
    format!("{REPORT_CSV_COLUMNS}\n{}\n", report.csv_fields())
}

fn histogram_csv(report: &TestReport<f64>) -> String {
    let mut s = String::from("bin_lower,bin_upper,count\n");
    let bins = HISTOGRAM_BINS as f64;
    for (i, c) in report.histogram.iter().enumerate() {
        writeln!(s, "{},{},{}", i as f64 / bins, (i + 1) as f64 / bins, c).unwrap();
    }
    s
}

fn samples_csv(model: &QubitModel<f64>, report: &TestReport<f64>) -> String {
    let names: Vec<&str> = model.fluctuations().iter().map(|p| p.name.as_str()).collect();
    let mut s = format!("index,{},fidelity\n", names.join(","));
    for (i, (sample, f)) in report.samples.iter().zip(&report.fidelities).enumerate() {
        let vals: Vec<String> = sample.values.iter().map(|v| v.to_string()).collect();
        writeln!(s, "{i},{},{f}", vals.join(",")).unwrap();
    }
    s
}

fn cmd_test(cfg: &ExperimentConfig, field_path: &Path) -> Result<Outcome, CliError> {
    let model = cfg.build_model()?;
    let file = FieldFile::read(field_path)?;
    file.check_model(&model)
        .map_err(|message| CliError::Config(format!("model: {message} ({})", field_path.display())))?;
    let field: ControlField<f64> = file.to_field()?;
    let start = Instant::now();
    let report = monte_carlo_fidelity(&field, &model, cfg.n_test, cfg.seed_test)?;
    info!("tested {} samples in {:.1?}", report.n_samples, start.elapsed());
    write(&cfg.out_dir.join("report.csv"), &report_csv(&report))?;
    write(&cfg.out_dir.join("histogram.csv"), &histogram_csv(&report))?;
    if cfg.dump_samples {
        write(&cfg.out_dir.join("samples.csv"), &samples_csv(&model, &report))?;
    }
    let line = format!(
        "mean_fidelity={} ± {} (n={}, min={})",
        report.mean_fidelity, report.std_fidelity, report.n_samples, report.min_fidelity
    );
    Ok(Outcome { exit: ExitCode::Success, summary: vec![line] })
}

fn training_table_csv(table: &SweepTable<f64>) -> String {
    let mut s = format!("{},iterations,final_j,converged\n", table.parameter.column());
    for r in &table.rows {
        writeln!(s, "{},{},{},{}", r.value, r.iterations, r.final_objective, r.converged).unwrap();
    }
    s
}

fn table_summary(label: &str, table: &SweepTable<f64>) -> Vec<String> {
    table
        .rows
        .iter()
        .map(|r| format!("{label} {}={} mean_fidelity={} iterations={}", table.parameter.column(), r.value, r.report.mean_fidelity, r.iterations))
        .collect()
}

fn all_converged(tables: &[&SweepTable<f64>]) -> bool {
    tables.iter().all(|t| t.rows.iter().all(|r| r.converged))
}

fn cmd_sweep_bound(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let table = sweep_bound(cfg.model, &cfg.sweep_thetas, &settings(cfg)?)?;
    write(&cfg.out_dir.join("sweep_bound.csv"), &table.to_csv())?;
    write(&cfg.out_dir.join("sweep_bound_training.csv"), &training_table_csv(&table))?;
    Ok(Outcome { exit: exit_for(all_converged(&[&table])), summary: table_summary(cfg.model.id(), &table) })
}

fn cmd_sweep_nf(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let table = sweep_sample_count(cfg.model, &cfg.sweep_n_f, uniform_theta(cfg)?, &settings(cfg)?)?;
    write(&cfg.out_dir.join("sweep_nf.csv"), &table.to_csv())?;
    write(&cfg.out_dir.join("sweep_nf_training.csv"), &training_table_csv(&table))?;
    Ok(Outcome { exit: exit_for(all_converged(&[&table])), summary: table_summary(cfg.model.id(), &table) })
}

/// Rebases a user config (or the defaults) onto a figure's model.
fn preset(base: &Option<ExperimentConfig>, model: ModelFamily, theta: Option<f64>, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::for_model(model);
    if let Some(b) = base {
        cfg.n_test = b.n_test;
        cfg.seed_train = b.seed_train;
        cfg.seed_test = b.seed_test;
        cfg.out_dir = b.out_dir.clone();
        cfg.optimizer = b.optimizer.clone();
        cfg.sweep_thetas = b.sweep_thetas.clone();
        cfg.sweep_n_f = b.sweep_n_f.clone();
        cfg.allow_even_n_f = b.allow_even_n_f;
        let n_f = b.n_f_groups[0];
        cfg.n_f_groups = vec![n_f; cfg.n_f_groups.len()];
    }
    if let Some(t) = theta {
        cfg.theta_groups = vec![t; cfg.theta_groups.len()];
    }
    overrides.apply(&mut cfg);
    Ok(cfg)
}

fn reproduce(figure: u32, base: Option<ExperimentConfig>, overrides: &Overrides) -> Result<Outcome, CliError> {
    let csv_name = format!("fig{figure}.csv");
    match figure {
        1 => {
            let cfg = preset(&base, ModelFamily::SingleChargeExcited, None, overrides)?;
            prepare_out_dir(&cfg)?;
            let s = settings(&cfg)?;
            let case1 = sweep_bound(ModelFamily::SingleChargeExcited, &cfg.sweep_thetas, &s)?;
            let case2 = sweep_bound(ModelFamily::SingleChargeSuperposition, &cfg.sweep_thetas, &s)?;
            let mut csv = format!("case,theta,{REPORT_CSV_COLUMNS}\n");
            for (case, table) in [(1, &case1), (2, &case2)] {
                for r in &table.rows {
                    writeln!(csv, "{case},{},{}", r.value, r.report.csv_fields()).unwrap();
                }
            }
            write(&cfg.out_dir.join(&csv_name), &csv)?;
            let mut summary = table_summary("case1", &case1);
            summary.extend(table_summary("case2", &case2));
            Ok(Outcome { exit: exit_for(all_converged(&[&case1, &case2])), summary })
        }
        2 => {
            let model = ModelFamily::SingleChargeSuperposition;
            let cfg = preset(&base, model, Some(0.15), overrides)?;
            prepare_out_dir(&cfg)?;
            let table = sweep_sample_count(model, &cfg.sweep_n_f, 0.15, &settings(&cfg)?)?;
            write(&cfg.out_dir.join(&csv_name), &table.to_csv())?;
            Ok(Outcome { exit: exit_for(all_converged(&[&table])), summary: table_summary(model.id(), &table) })
        }
        4 | 5 => {
            let model = if figure == 4 { ModelFamily::CoupledCharge } else { ModelFamily::CoupledPhase };
            let cfg = preset(&base, model, None, overrides)?;
            prepare_out_dir(&cfg)?;
            let table = sweep_bound(model, &cfg.sweep_thetas, &settings(&cfg)?)?;
            write(&cfg.out_dir.join(&csv_name), &table.to_csv())?;
            Ok(Outcome { exit: exit_for(all_converged(&[&table])), summary: table_summary(model.id(), &table) })
        }
        6 => {
            let cfg = preset(&base, ModelFamily::CoupledPhase, Some(0.25), overrides)?;
            prepare_out_dir(&cfg)?;
            let model = cfg.build_model()?;
            let result = train_model(&cfg, &model)?;
            let file = FieldFile::from_field(&model, &result.field, cfg.seed_train, result.final_objective());
            file.write(&cfg.out_dir.join("fig6_field.csv"))?;
            let names: Vec<&str> = file.channels.iter().map(|c| c.name.as_str()).collect();
            let mut csv = format!("k,t_ns,{}\n", names.join(","));
            for k in 0..result.field.intervals() {
                write!(csv, "{k},{}", model.interval_midpoint(k)).unwrap();
                for row in result.field.values() {
                    write!(csv, ",{}", row[k]).unwrap();
                }
                csv.push('\n');
            }
            write(&cfg.out_dir.join(&csv_name), &csv)?;
            Ok(Outcome { exit: exit_for(result.converged), summary: vec![training_summary(model.family, &result)] })
        }
        other => {
            let ids: Vec<String> = FIGURES.iter().map(u32::to_string).collect();
            Err(CliError::Config(format!("figure: unknown id {other} (valid: {})", ids.join(", "))))
        }
    }
}
