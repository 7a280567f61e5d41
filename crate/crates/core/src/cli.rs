//! Experiment configuration and the commands behind the `bbpl` binary.
//!
//! An experiment is one TOML file; every constant has a default that
//! `bbpl --dump-defaults` prints. Outputs land in `output_dir`:
//!
//! - `generate`: `model.toml` (true parameters), `data.csv` (Gibbs samples)
//!   and `manifest.toml`.
//! - `train`: `trace-<method>.csv` and `final-<method>.toml`.
//! - `compare`: a work-report CSV over trace files, or a block-count sweep.
//! - `validate`: graph, parameter, counting-number and partition checks.
//!
//! Every file embeds the resolved configuration, seeds included.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{distance_trace, load_trace_csv, trace_rows, write_trace_csv, write_work_csv, WorkRow};
use crate::inference::BpConfig;
use crate::learning::{
    train_bbpl, train_full_bp, train_inner_dual, BlockSchedule, LearnConfig, LearningTrace, Method, StepSchedule,
};
use crate::model::io::{load_samples, save_samples, ModelFile};
use crate::model::{empirical_statistics, frontier_marginals, CountingNumbers, CountingPreset, PotentialVector};
use crate::partition::PartitionSpec;
use crate::synth::{gibbs_sample, GeneratorConfig, GibbsConfig, GraphKind};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CRASH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSection {
    /// `grid:RxC` or `ba:N:M`.
    pub graph: String,
    pub states: usize,
    pub seed: u64,
    pub param_scale: f64,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        Self {
            graph: "grid:6x6".into(),
            states: 2,
            seed: 1,
            param_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for SamplingSection {
    fn default() -> Self {
        let g = GibbsConfig::default();
        Self {
            samples: g.samples,
            burn_in: g.burn_in,
            thin: g.thin,
            seed: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    /// `full`, `bbpl` or `inner-dual`.
    pub method: String,
    /// `grid:RxC` (tile counts), `index:D` or `whole`.
    pub partition: String,
    /// `uniform-convex` or `bethe`.
    pub counting: String,
    /// `samples` (empirical, from `data.csv`) or `exact` (marginals of the
    /// generating parameters).
    pub statistics: String,
    pub step: f64,
    /// `constant` or `inv-sqrt`.
    pub step_schedule: String,
    pub backtracking: bool,
    pub max_outer_iters: usize,
    pub grad_tol: f64,
    /// `sequential` or `random:SEED`.
    pub block_schedule: String,
    /// Fit a tight full-BP reference optimum and report `dist_to_opt`.
    pub reference: bool,
    pub probe_contraction: bool,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let l = LearnConfig::default();
        Self {
            method: "bbpl".into(),
            partition: "index:4".into(),
            counting: CountingPreset::UniformConvex.to_string(),
            statistics: "samples".into(),
            step: 0.1,
            step_schedule: "constant".into(),
            backtracking: l.backtracking,
            max_outer_iters: l.max_outer_iters,
            grad_tol: l.grad_tol,
            block_schedule: l.schedule.to_string(),
            reference: false,
            probe_contraction: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpSection {
    pub tol_msg: f64,
    pub max_iters: usize,
    pub damping: f64,
}

impl Default for BpSection {
    fn default() -> Self {
        let b = BpConfig::default();
        Self {
            tol_msg: b.tol_msg,
            max_iters: b.max_iters,
            damping: b.damping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub generator: GeneratorSection,
    pub sampling: SamplingSection,
    pub training: TrainingSection,
    pub bp: BpSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            generator: GeneratorSection::default(),
            sampling: SamplingSection::default(),
            training: TrainingSection::default(),
            bp: BpSection::default(),
        }
    }
}

/// How the data-side statistics `w̄` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticsSource {
    Samples,
    Exact,
}

/// Parsed and validated form of an [`ExperimentConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub generator: GeneratorConfig,
    pub gibbs: GibbsConfig,
    pub method: Method,
    pub partition: PartitionSpec,
    pub counting: CountingPreset,
    pub statistics: StatisticsSource,
    pub learn: LearnConfig,
    pub reference: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let g = &self.generator;
        let generator = GeneratorConfig {
            kind: g.graph.parse::<GraphKind>()?,
            k: g.states,
            seed: g.seed,
            param_scale: g.param_scale,
        };
        generator.validate()?;
        let s = &self.sampling;
        if s.samples == 0 || s.thin == 0 {
            return Err(Error::Config("sampling needs samples ≥ 1 and thin ≥ 1".into()));
        }
        let gibbs = GibbsConfig {
            samples: s.samples,
            burn_in: s.burn_in,
            thin: s.thin,
            seed: s.seed,
        };
        let t = &self.training;
        let method: Method = t.method.parse()?;
        if method == Method::CrfBbpl {
            return Err(Error::Config(
                "crf-bbpl needs feature models and is available through the library only".into(),
            ));
        }
        let statistics = match t.statistics.as_str() {
            "samples" => StatisticsSource::Samples,
            "exact" => StatisticsSource::Exact,
            other => {
                return Err(Error::Config(format!(
                    "unknown statistics source `{other}` (expected samples or exact)"
                )))
            }
        };
        let step = match t.step_schedule.as_str() {
            "constant" => StepSchedule::Constant(t.step),
            "inv-sqrt" => StepSchedule::InvSqrt(t.step),
            other => {
                return Err(Error::Config(format!(
                    "unknown step schedule `{other}` (expected constant or inv-sqrt)"
                )))
            }
        };
        let bp = BpConfig {
            tol_msg: self.bp.tol_msg,
            max_iters: self.bp.max_iters,
            damping: self.bp.damping,
        };
        let learn = LearnConfig {
            step,
            backtracking: t.backtracking,
            max_outer_iters: t.max_outer_iters,
            grad_tol: t.grad_tol,
            schedule: t.block_schedule.parse::<BlockSchedule>()?,
            bp,
            record_theta: t.reference,
            audit_gradient: false,
            probe_contraction: t.probe_contraction,
        };
        learn.validate()?;
        Ok(Experiment {
            generator,
            gibbs,
            method,
            partition: t.partition.parse()?,
            counting: t.counting.parse()?,
            statistics,
            learn,
            reference: t.reference,
        })
    }

    pub fn model_path(&self) -> PathBuf {
        self.output_dir.join("model.toml")
    }

    pub fn data_path(&self) -> PathBuf {
        self.output_dir.join("data.csv")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.output_dir.join("manifest.toml")
    }

    pub fn trace_path(&self, method: Method) -> PathBuf {
        self.output_dir.join(format!("trace-{method}.csv"))
    }

    pub fn final_model_path(&self, method: Method) -> PathBuf {
        self.output_dir.join(format!("final-{method}.toml"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateOutput {
    pub model: PathBuf,
    pub data: PathBuf,
    pub manifest: PathBuf,
    pub samples: usize,
}

/// Writes the generating model, the Gibbs dataset and the manifest.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<GenerateOutput> {
    let exp = cfg.resolve()?;
    let (graph, theta) = exp.generator.generate()?;
    let samples = gibbs_sample(&graph, &theta, &exp.gibbs)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let resolved = cfg.to_toml_string();

    let mut model = ModelFile::new(graph, theta);
    model.manifest = Some(resolved.clone());
    model.save(cfg.model_path())?;
    save_samples(cfg.data_path(), &samples, Some(&resolved))?;
    let manifest = format!(
        "# files: model.toml data.csv\n# graph seed = {}, parameter seed = {}, sampling seed = {}\n{resolved}",
        exp.generator.seed,
        exp.generator.seed.wrapping_add(1),
        exp.gibbs.seed
    );
    fs::write(cfg.manifest_path(), manifest)?;
    Ok(GenerateOutput {
        model: cfg.model_path(),
        data: cfg.data_path(),
        manifest: cfg.manifest_path(),
        samples: samples.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub trace_csv: PathBuf,
    pub final_model: PathBuf,
    pub trace: LearningTrace,
}

/// Full-BP learning at the tolerances used for reference optima.
pub fn reference_config(base: &LearnConfig) -> LearnConfig {
    LearnConfig {
        grad_tol: 1e-8,
        bp: BpConfig {
            tol_msg: 1e-10,
            ..base.bp
        },
        record_theta: false,
        probe_contraction: false,
        audit_gradient: false,
        ..base.clone()
    }
}

/// Trains on previously generated assets and writes the trace and final
/// parameters.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainOutput> {
    let exp = cfg.resolve()?;
    let model = ModelFile::load(cfg.model_path())?;
    let graph = model.graph;
    let stats = match exp.statistics {
        StatisticsSource::Samples => empirical_statistics(&graph, &load_samples(cfg.data_path())?)?,
        StatisticsSource::Exact => frontier_marginals(&graph, &model.potentials)?.into_vec(),
    };
    let rho = CountingNumbers::preset(&graph, exp.counting);
    let trace = match exp.method {
        Method::FullBp => train_full_bp(&graph, &stats, &rho, &exp.learn)?,
        Method::InnerDual => train_inner_dual(&graph, &stats, &rho, &exp.learn)?,
        Method::Bbpl | Method::CrfBbpl => {
            let partition = exp.partition.build(&graph, exp.generator.kind.grid_dims())?;
            train_bbpl(&graph, &stats, &rho, &partition, &exp.learn)?
        }
    };
    let distances = if exp.reference {
        let reference = train_full_bp(&graph, &stats, &rho, &reference_config(&exp.learn))?;
        Some(distance_trace(&trace, &reference.theta)?)
    } else {
        None
    };

    let resolved = cfg.to_toml_string();
    fs::create_dir_all(&cfg.output_dir)?;
    let trace_csv = cfg.trace_path(exp.method);
    let rows = trace_rows(&trace, distances.as_deref());
    write_trace_csv(fs::File::create(&trace_csv)?, &rows, &resolved)?;

    let final_model = cfg.final_model_path(exp.method);
    let mut out = ModelFile::new(graph.clone(), PotentialVector::from_flat(&graph, trace.theta.clone())?);
    out.manifest = Some(resolved);
    out.save(&final_model)?;
    Ok(TrainOutput {
        trace_csv,
        final_model,
        trace,
    })
}

/// Work-report rows for trace CSV files, labelled by file stem.
pub fn cmd_compare(traces: &[PathBuf], grad_tol: f64, output: &Path) -> Result<Vec<WorkRow>> {
    if traces.is_empty() {
        return Err(Error::Config("compare needs at least one trace file".into()));
    }
    let rows = traces
        .iter()
        .map(|p| {
            let label = p
                .file_stem()
                .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            WorkRow::from_rows(&label, &load_trace_csv(p)?, grad_tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let comment = format!(
        "grad_tol = {grad_tol}\ninputs = [{}]",
        traces
            .iter()
            .map(|p| format!("{:?}", p.display().to_string()))
            .collect::<Vec<_>>()
            .join(", ")
    );
    write_work_csv(fs::File::create(output)?, &rows, &comment)?;
    Ok(rows)
}

/// Block-count sensitivity: BBPL once per partition spec on the generated
/// problem, one work-report row per spec.
pub fn cmd_sweep(cfg: &ExperimentConfig, specs: &[PartitionSpec], output: &Path) -> Result<Vec<WorkRow>> {
    if specs.is_empty() {
        return Err(Error::Config("sweep needs at least one partition spec".into()));
    }
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut run = cfg.clone();
        run.training.method = Method::Bbpl.to_string();
        run.training.partition = spec.to_string();
        run.training.reference = false;
        let exp = run.resolve()?;
        let model = ModelFile::load(cfg.model_path())?;
        let graph = model.graph;
        let stats = match exp.statistics {
            StatisticsSource::Samples => empirical_statistics(&graph, &load_samples(cfg.data_path())?)?,
            StatisticsSource::Exact => frontier_marginals(&graph, &model.potentials)?.into_vec(),
        };
        let rho = CountingNumbers::preset(&graph, exp.counting);
        let partition = spec.build(&graph, exp.generator.kind.grid_dims())?;
        let trace = train_bbpl(&graph, &stats, &rho, &partition, &exp.learn)?;
        let label = format!("D={}", partition.num_blocks());
        rows.push(WorkRow::from_rows(
            &label,
            &trace_rows(&trace, None),
            exp.learn.grad_tol,
        )?);
    }
    let comment = format!(
        "sweep = [{}]\n{}",
        specs.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", "),
        cfg.to_toml_string()
    );
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_work_csv(fs::File::create(output)?, &rows, &comment)?;
    Ok(rows)
}

/// Invariant violations of the configured model and partition; empty when
/// everything checks out. Uses `model.toml` when present, otherwise the
/// generator's output.
pub fn cmd_validate(cfg: &ExperimentConfig) -> Result<Vec<String>> {
    let exp = cfg.resolve()?;
    let (graph, theta) = if cfg.model_path().exists() {
        let m = ModelFile::load(cfg.model_path())?;
        (m.graph, m.potentials)
    } else {
        exp.generator.generate()?
    };
    let mut problems = graph.check_invariants();
    if theta.len() != graph.dim() {
        problems.push(format!(
            "potential vector has {} entries, layout has {}",
            theta.len(),
            graph.dim()
        ));
    }
    let rho = CountingNumbers::preset(&graph, exp.counting);
    if !(0..graph.num_vertices()).all(|s| rho.temperature(s) > 0.0) {
        problems.push("counting numbers give a non-positive vertex temperature".into());
    }
    match exp.partition.build(&graph, exp.generator.kind.grid_dims()) {
        Ok(p) => problems.extend(p.validate(&graph).iter().map(|v| v.to_string())),
        Err(e) => problems.push(e.to_string()),
    }
    if cfg.data_path().exists() {
        if let Err(e) = empirical_statistics(&graph, &load_samples(cfg.data_path())?) {
            problems.push(format!("dataset: {e}"));
        }
    }
    Ok(problems)
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        Error::Config(_)
        | Error::Parse(_)
        | Error::InvalidPartition(_)
        | Error::InvalidGraph(_)
        | Error::Shape(_)
        | Error::EmptyDataset
        | Error::AssignmentOutOfRange { .. }
        | Error::StateSpaceTooLarge { .. } => EXIT_USAGE,
        _ => EXIT_CRASH,
    }
}

/// Convex BP / block BP learning experiments.
#[derive(Debug, Parser)]
#[command(name = "bbpl", version, about)]
pub struct Cli {
    /// Print the default experiment configuration and exit.
    #[arg(long)]
    pub dump_defaults: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic model and Gibbs dataset.
    Generate {
        /// Experiment configuration (TOML); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train on generated assets; writes the trace CSV and final parameters.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override `training.method` (full, bbpl, inner-dual).
        #[arg(long)]
        method: Option<String>,
        /// Override `training.partition` (grid:RxC, index:D, whole).
        #[arg(long)]
        partition: Option<String>,
    },
    /// Merge trace CSVs into a work report, or sweep BBPL over partitions.
    Compare {
        /// Trace CSV files to compare.
        traces: Vec<PathBuf>,
        /// Report file to write.
        #[arg(long, default_value = "compare.csv")]
        output: PathBuf,
        /// Gradient tolerance for the iterations-to-tolerance column.
        #[arg(long, default_value_t = 1e-6)]
        grad_tol: f64,
        /// Comma-separated partition specs to sweep instead of reading traces.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<String>,
        /// Configuration for sweep mode.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check graph, parameter, counting-number and partition invariants.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    Ok(cfg)
}

/// Runs a parsed command line, printing a short summary; returns the exit
/// code.
pub fn run(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    if cli.dump_defaults {
        print!("{}", ExperimentConfig::default().to_toml_string());
        return Ok(EXIT_OK);
    }
    let Some(command) = cli.command else {
        return Err(Error::Config("no command given (try --help)".into()));
    };
    match command {
        Command::Generate { config, out } => {
            let cfg = load_config(config.as_deref(), out)?;
            let o = cmd_generate(&cfg)?;
            println!(
                "wrote {} ({} samples), {}, {}",
                o.data.display(),
                o.samples,
                o.model.display(),
                o.manifest.display()
            );
            Ok(EXIT_OK)
        }
        Command::Train {
            config,
            out,
            method,
            partition,
        } => {
            let mut cfg = load_config(config.as_deref(), out)?;
            if let Some(m) = method {
                cfg.training.method = m;
            }
            if let Some(p) = partition {
                cfg.training.partition = p;
            }
            let o = cmd_train(&cfg)?;
            let t = &o.trace;
            println!(
                "{}: {} iterations, {} message updates, final |g|_inf = {:.3e}{}",
                t.method,
                t.iterations(),
                t.total_msg_updates(),
                t.final_grad_norm().unwrap_or(f64::NAN),
                if t.converged { "" } else { " (not converged)" }
            );
            println!("wrote {} and {}", o.trace_csv.display(), o.final_model.display());
            Ok(if t.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
        Command::Compare {
            traces,
            output,
            grad_tol,
            sweep,
            config,
        } => {
            let rows = if sweep.is_empty() {
                cmd_compare(&traces, grad_tol, &output)?
            } else {
                if !traces.is_empty() {
                    return Err(Error::Config("give either trace files or --sweep, not both".into()));
                }
                let cfg = load_config(config.as_deref(), None)?;
                let specs = sweep
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<Vec<PartitionSpec>>>()?;
                cmd_sweep(&cfg, &specs, &output)?
            };
            for r in &rows {
                println!(
                    "{:<20} {:<10} iters={:<8} msg_updates={:<12} to_tol={}",
                    r.label,
                    r.method,
                    r.iterations,
                    r.msg_updates_cum,
                    r.iters_to_tol.map_or("-".into(), |i| i.to_string())
                );
            }
            println!("wrote {}", output.display());
            Ok(EXIT_OK)
        }
        Command::Validate { config, out } => {
            let cfg = load_config(config.as_deref(), out)?;
            let problems = cmd_validate(&cfg)?;
            if problems.is_empty() {
                println!("ok");
                Ok(EXIT_OK)
            } else {
                for p in &problems {
                    println!("violation: {p}");
                }
                Ok(EXIT_USAGE)
            }
        }
    }
}

/// Entry point used by the binary.
pub fn main_from_env() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml_string();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
        let exp = cfg.resolve().unwrap();
        assert_eq!(exp.method, Method::Bbpl);
        assert_eq!(exp.gibbs.samples, 20);
        assert_eq!(exp.generator.kind, GraphKind::Grid { rows: 6, cols: 6 });
    }

    #[test]
    fn partial_configs_fill_defaults() {
        let cfg = ExperimentConfig::from_toml_str("[training]\nmethod = \"full\"\n").unwrap();
        assert_eq!(cfg.training.method, "full");
        assert_eq!(cfg.generator, GeneratorSection::default());
        assert!(ExperimentConfig::from_toml_str("[training]\nmethdo = \"full\"\n").is_err());
    }

    #[test]
    fn invalid_specs_name_the_token() {
        let mut cfg = ExperimentConfig::default();
        cfg.training.partition = "blocks:7".into();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("blocks:7"));
        assert_eq!(exit_code(&err), EXIT_USAGE);

        let mut cfg = ExperimentConfig::default();
        cfg.generator.graph = "ring:5".into();
        assert!(cfg.resolve().unwrap_err().to_string().contains("ring:5"));

        let mut cfg = ExperimentConfig::default();
        cfg.training.method = "crf-bbpl".into();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn io_errors_map_to_their_own_code() {
        let err = Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "x"));
        assert_eq!(exit_code(&err), EXIT_IO);
        assert_eq!(exit_code(&Error::NonFinite("x")), EXIT_CRASH);
    }

    #[test]
    fn reference_config_is_tight() {
        let r = reference_config(&LearnConfig::default());
        assert_eq!(r.grad_tol, 1e-8);
        assert_eq!(r.bp.tol_msg, 1e-10);
    }
}
