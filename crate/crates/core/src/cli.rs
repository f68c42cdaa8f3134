//! Command-line entry point: run configuration, train / evaluate / export /
//! interpolate / benchmark commands, checkpointing and plot-ready field
//! export.
//!
//! Exit codes: `0` success, `2` configuration error (with line/field
//! diagnostics), `3` numerical divergence, `1` other runtime failures.
//!
//! File outputs are written atomically (write to a temporary sibling, then
//! rename). The metrics summary deliberately contains no wall-clock numbers
//! so that identical seeded runs produce byte-identical summaries; timing
//! lives in its own report next to it.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::models::{Model, ModelConfig, ModelKind};
use crate::pde::Problem;
use crate::sampling::SampleSet;
use crate::training::{
    evaluate, interpolate_eval, train, InterpReport, Metrics, StepRecord, TrainConfig, TrainError,
    Trainer,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("training diverged at step {0}")]
    Diverged(usize),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Diverged { step } => CliError::Diverged(step),
            TrainError::InvalidConfig(msg) => CliError::Config(msg),
            TrainError::Model(inner) => CliError::Config(inner.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// One experiment run: training settings plus output and benchmark knobs.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Checkpoint path; defaults to `<out_dir>/checkpoint.dgn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[serde(default = "default_export_resolution")]
    pub export_resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkConfig>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_export_resolution() -> usize {
    101
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Training steps timed per model; the report takes the median.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub models: Vec<ModelConfig>,
}

fn default_repetitions() -> usize {
    3
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint
            .clone()
            .unwrap_or_else(|| self.out_dir.join("checkpoint.dgn"))
    }
}

// ---- checkpoints -----------------------------------------------------------

const CHECKPOINT_MAGIC: &[u8; 4] = b"DGNC";
const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to rebuild the model and its frozen quadrature set.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CheckpointMeta {
    pub format_version: u32,
    pub train: TrainConfig,
    pub trained_steps: usize,
}

/// Binary layout: magic, version, meta JSON (length-prefixed), then each
/// component network's parameters as little-endian doubles (length-prefixed),
/// in [`Model::nets`] order. Save -> load -> save is byte-identical.
pub fn save_checkpoint(path: &Path, meta: &CheckpointMeta, model: &Model) -> Result<(), CliError> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(CHECKPOINT_MAGIC);
    bytes.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let meta_json =
        serde_json::to_vec(meta).map_err(|e| CliError::Runtime(format!("meta encode: {e}")))?;
    bytes.extend_from_slice(&(meta_json.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&meta_json);
    for (_, net) in model.nets() {
        let params = net.params_flat();
        bytes.extend_from_slice(&(params.len() as u64).to_le_bytes());
        for p in params {
            bytes.extend_from_slice(&p.to_le_bytes());
        }
    }
    atomic_write(path, &bytes)
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointMeta, Model), CliError> {
    let bytes = std::fs::read(path).map_err(|e| {
        CliError::Runtime(format!("cannot read checkpoint {}: {e}", path.display()))
    })?;
    let fail = |msg: &str| CliError::Runtime(format!("{}: {msg}", path.display()));
    if bytes.len() < 16 || &bytes[0..4] != CHECKPOINT_MAGIC {
        return Err(fail("not a checkpoint file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(fail(&format!("unsupported checkpoint version {version}")));
    }
    let meta_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let meta_end = 16usize.checked_add(meta_len).ok_or_else(|| fail("bad length"))?;
    if bytes.len() < meta_end {
        return Err(fail("truncated metadata"));
    }
    let meta: CheckpointMeta = serde_json::from_slice(&bytes[16..meta_end])
        .map_err(|e| fail(&format!("bad metadata: {e}")))?;
    let mut model = Model::new(meta.train.model.clone(), meta.train.seed)
        .map_err(|e| fail(&format!("bad model config: {e}")))?;
    let mut off = meta_end;
    for (_, net) in model.nets_mut() {
        if bytes.len() < off + 8 {
            return Err(fail("truncated parameter block"));
        }
        let n = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()) as usize;
        off += 8;
        if n != net.param_count() {
            return Err(fail(&format!(
                "parameter count {n} does not match the architecture ({})",
                net.param_count()
            )));
        }
        if bytes.len() < off + 8 * n {
            return Err(fail("truncated parameters"));
        }
        let params: Vec<f64> = (0..n)
            .map(|i| f64::from_le_bytes(bytes[off + 8 * i..off + 8 * i + 8].try_into().unwrap()))
            .collect();
        net.set_params_flat(&params)
            .map_err(|e| fail(&format!("parameter load: {e}")))?;
        off += 8 * n;
    }
    if off != bytes.len() {
        return Err(fail("trailing bytes"));
    }
    Ok((meta, model))
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

// ---- field export ----------------------------------------------------------

/// Write the `x,y,u_exact,u_pred,abs_error` grid CSV. Row-major grid order;
/// 17 significant digits so the file round-trips to the exact doubles.
pub fn export_field_csv(
    path: &Path,
    model: &Model,
    problem: Problem,
    quadrature: &[crate::autodiff::jet::Point2],
    a: f64,
    resolution: usize,
) -> Result<(), CliError> {
    let pts = crate::sampling::grid(&problem.domain(), resolution)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let gvals: Vec<f64> = quadrature.iter().map(|&y| problem.source(y, a)).collect();
    let prep = model
        .prepare(quadrature, &gvals)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let vals = model
        .eval_values(&prep, &pts)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = String::with_capacity(pts.len() * 96 + 64);
    out.push_str("x,y,u_exact,u_pred,abs_error\n");
    for (&p, &v) in pts.iter().zip(vals.iter()) {
        let exact = problem.exact(p, a);
        let err = (exact - v).abs();
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            p[0], p[1], exact, v, err
        ));
    }
    atomic_write(path, out.as_bytes())
}

// ---- summaries ---------------------------------------------------------------

/// Deterministic run summary (no wall-clock content).
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct RunSummary {
    pub method: String,
    pub network_structure: String,
    pub p: usize,
    pub problem: String,
    pub a_values: Vec<f64>,
    pub steps_run: usize,
    pub early_stopped: bool,
    pub final_residual: f64,
    pub final_boundary: f64,
    pub final_total: f64,
    /// `(a, grid MSE)` pairs.
    pub test_mse: Vec<(f64, f64)>,
    pub eval_counts: Vec<(String, u64)>,
    pub train_config: TrainConfig,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct TimingReport {
    pub wall_clock_sec: f64,
    pub steps_run: usize,
    pub sec_per_step: f64,
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("encode {}: {e}", path.display())))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

// ---- commands ----------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "decgreen",
    about = "Train and evaluate factorized Green's-function PDE solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model from a run configuration and write checkpoint + metrics.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (1 = bit-reproducible mode).
        #[arg(long)]
        threads: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid MSE of a checkpointed model against the analytic solution.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Source parameter; defaults to the first trained value.
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Export the exact/predicted/error field as CSV.
    Export {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate an unseen source parameter on a multi-parameter checkpoint.
    Interpolate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time training steps for every model in the benchmark list.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// CLI entry; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train {
            config,
            seed,
            threads,
            out,
        } => cmd_train(&config, seed, threads, out),
        Command::Evaluate {
            checkpoint,
            a,
            resolution,
        } => cmd_evaluate(&checkpoint, a, resolution),
        Command::Export {
            checkpoint,
            a,
            resolution,
            out,
        } => cmd_export(&checkpoint, a, resolution, out),
        Command::Interpolate {
            checkpoint,
            a,
            resolution,
            out,
        } => cmd_interpolate(&checkpoint, a, resolution, out),
        Command::Benchmark {
            config,
            threads,
            out,
        } => cmd_benchmark(&config, threads, out),
    }
}

pub fn cmd_train(
    config_path: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = RunConfig::from_file(config_path)?;
    if let Some(seed) = seed {
        cfg.train.seed = seed;
    }
    if let Some(threads) = threads {
        cfg.train.threads = threads;
    }
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    cfg.train.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;

    let mut records: Vec<StepRecord> = Vec::new();
    let (model, metrics) = train(&cfg.train, |rec| {
        println!(
            "step {:>7}  residual {:.6e}  boundary {:.6e}  total {:.6e}  elapsed {:.1}s",
            rec.step, rec.residual, rec.boundary, rec.total, rec.elapsed_sec
        );
        records.push(rec.clone());
    })?;

    let mut stream = String::new();
    for rec in &records {
        stream
            .push_str(&serde_json::to_string(rec).map_err(|e| CliError::Runtime(e.to_string()))?);
        stream.push('\n');
    }
    atomic_write(&cfg.out_dir.join("metrics.jsonl"), stream.as_bytes())?;

    let meta = CheckpointMeta {
        format_version: CHECKPOINT_VERSION,
        train: cfg.train.clone(),
        trained_steps: metrics.steps_run,
    };
    save_checkpoint(&cfg.checkpoint_path(), &meta, &model)?;
    write_summary(&cfg, &metrics)?;
    println!(
        "trained {} steps; test MSE {:?}; checkpoint {}",
        metrics.steps_run,
        metrics.test_mse,
        cfg.checkpoint_path().display()
    );
    Ok(())
}

fn write_summary(cfg: &RunConfig, metrics: &Metrics) -> Result<(), CliError> {
    let summary = RunSummary {
        method: cfg.train.model.kind.name().to_string(),
        network_structure: cfg.train.model.structure_string(),
        p: cfg.train.model.p,
        problem: cfg.train.problem.name().to_string(),
        a_values: cfg.train.a_values.clone(),
        steps_run: metrics.steps_run,
        early_stopped: metrics.early_stopped,
        final_residual: metrics.final_residual,
        final_boundary: metrics.final_boundary,
        final_total: metrics.final_total,
        test_mse: metrics.test_mse.clone(),
        eval_counts: metrics.eval_counts.clone(),
        train_config: cfg.train.clone(),
    };
    write_json(&cfg.out_dir.join("summary.json"), &summary)?;
    let timing = TimingReport {
        wall_clock_sec: metrics.wall_clock_sec,
        steps_run: metrics.steps_run,
        sec_per_step: metrics.wall_clock_sec / metrics.steps_run.max(1) as f64,
    };
    write_json(&cfg.out_dir.join("timing.json"), &timing)?;
    Ok(())
}

fn load_for_eval(checkpoint: &Path) -> Result<(CheckpointMeta, Model, Vec<[f64; 2]>), CliError> {
    let (meta, model) = load_checkpoint(checkpoint)?;
    let quad = SampleSet::quadrature_only(
        &meta.train.problem.domain(),
        meta.train.model.p,
        meta.train.seed,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok((meta, model, quad))
}

pub fn cmd_evaluate(
    checkpoint: &Path,
    a: Option<f64>,
    resolution: Option<usize>,
) -> Result<(), CliError> {
    let (meta, model, quad) = load_for_eval(checkpoint)?;
    let a = a.unwrap_or(meta.train.a_values[0]);
    let resolution = resolution.unwrap_or(meta.train.eval_resolution);
    let mse = evaluate(&model, meta.train.problem, &quad, a, resolution)?;
    println!(
        "{{\"problem\":\"{}\",\"a\":{},\"resolution\":{},\"mse\":{:e}}}",
        meta.train.problem.name(),
        a,
        resolution,
        mse
    );
    Ok(())
}

pub fn cmd_export(
    checkpoint: &Path,
    a: Option<f64>,
    resolution: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let (meta, model, quad) = load_for_eval(checkpoint)?;
    let a = a.unwrap_or(meta.train.a_values[0]);
    let resolution = resolution.unwrap_or(101);
    let dir = out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("field_a{a}_r{resolution}.csv"));
    export_field_csv(&path, &model, meta.train.problem, &quad, a, resolution)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_interpolate(
    checkpoint: &Path,
    a_new: f64,
    resolution: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let (meta, model, quad) = load_for_eval(checkpoint)?;
    if meta.train.a_values.len() < 2 {
        return Err(CliError::Config(format!(
            "checkpoint was trained on a single source parameterization (a = {:?}); \
             interpolation requires a multi-parameter run",
            meta.train.a_values
        )));
    }
    let resolution = resolution.unwrap_or(meta.train.eval_resolution);
    let report: InterpReport = interpolate_eval(
        &model,
        meta.train.problem,
        &quad,
        &meta.train.a_values,
        a_new,
        resolution,
    )?;
    let dir = out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("interpolate_a{a_new}_r{resolution}.csv"));
    export_field_csv(&csv_path, &model, meta.train.problem, &quad, a_new, resolution)?;
    write_json(&dir.join(format!("interpolate_a{a_new}.json")), &report)?;
    if report.extrapolation {
        println!(
            "warning: a = {a_new} lies outside the trained range {:?} (extrapolation)",
            meta.train.a_values
        );
    }
    println!(
        "interpolation at a = {a_new}: mse {:e}, relative L2 {:.4}",
        report.mse, report.rel_l2
    );
    Ok(())
}

/// Per-model benchmark entry.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct BenchEntry {
    pub kind: String,
    pub network_structure: String,
    pub p: usize,
    pub median_step_sec: f64,
    pub step_secs: Vec<f64>,
    /// Evaluation counts per component network for a single step.
    pub per_step_counts: Vec<(String, u64)>,
    /// Exact evaluation-count law satisfied (`P` for H, `P*(N+M)` for G).
    pub counter_law_ok: bool,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct BenchReport {
    pub n_interior: usize,
    pub m_boundary: usize,
    pub threads: usize,
    pub entries: Vec<BenchEntry>,
    /// `(slow kind, fast kind, wall-clock ratio, counter ratio)` for every
    /// kernel-pair vs factorized pairing.
    pub ratios: Vec<(String, String, f64, f64)>,
}

pub fn cmd_benchmark(
    config_path: &Path,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = RunConfig::from_file(config_path)?;
    if let Some(threads) = threads {
        cfg.train.threads = threads;
    }
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    let bench = cfg
        .benchmark
        .clone()
        .ok_or_else(|| CliError::Config("benchmark section missing".into()))?;
    if bench.models.len() < 2 {
        return Err(CliError::Config(
            "benchmark needs at least 2 model kinds to compare".into(),
        ));
    }
    if bench.repetitions < 1 {
        return Err(CliError::Config("repetitions must be >= 1".into()));
    }
    std::fs::create_dir_all(&cfg.out_dir)?;

    let report = run_benchmark(&cfg, &bench)?;
    write_json(&cfg.out_dir.join("benchmark.json"), &report)?;

    println!(
        "benchmark: N={} M={} threads={}",
        report.n_interior, report.m_boundary, report.threads
    );
    for e in &report.entries {
        println!(
            "  {:12} P={:<5} median {:8.3} s/step  counts {:?}  law_ok {}",
            e.kind, e.p, e.median_step_sec, e.per_step_counts, e.counter_law_ok
        );
    }
    for (slow, fast, wall, count) in &report.ratios {
        println!("  ratio {slow}/{fast}: wall-clock {wall:.1}x, counters {count:.0}x");
    }
    Ok(())
}

pub fn run_benchmark(cfg: &RunConfig, bench: &BenchmarkConfig) -> Result<BenchReport, CliError> {
    let mut entries = Vec::new();
    for model_cfg in &bench.models {
        let mut tcfg = cfg.train.clone();
        tcfg.model = model_cfg.clone();
        tcfg.steps = bench.repetitions;
        tcfg.validate()?;
        let mut trainer = Trainer::new(&tcfg)?;

        // Untimed warmup step so allocator effects do not skew the first
        // measurement.
        trainer.step()?;
        trainer.model().reset_eval_counts();

        let mut step_secs = Vec::with_capacity(bench.repetitions);
        for _ in 0..bench.repetitions {
            let t = Instant::now();
            trainer.step()?;
            step_secs.push(t.elapsed().as_secs_f64());
        }
        let counts = trainer.model().eval_counts();
        let reps = bench.repetitions as u64;
        let per_step_counts: Vec<(String, u64)> = counts
            .iter()
            .map(|(r, c)| (r.to_string(), c / reps))
            .collect();
        let exact_division = counts.iter().all(|(_, c)| c % reps == 0);

        let p = tcfg.model.p as u64;
        let nm = (tcfg.n_interior + tcfg.m_boundary) as u64 * tcfg.a_values.len() as u64;
        let law = |role: &str, per_step: u64| -> bool {
            match role {
                "h" => per_step == p,
                "g" => per_step == p * nm,
                _ => true,
            }
        };
        let counter_law_ok =
            exact_division && per_step_counts.iter().all(|(r, c)| law(r.as_str(), *c));

        let mut sorted = step_secs.clone();
        sorted.sort_by(f64::total_cmp);
        let median = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2]
        } else {
            0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
        };

        entries.push(BenchEntry {
            kind: model_cfg.kind.name().to_string(),
            network_structure: model_cfg.structure_string(),
            p: model_cfg.p,
            median_step_sec: median,
            step_secs,
            per_step_counts,
            counter_law_ok,
        });
    }

    let mut ratios = Vec::new();
    for (i, slow) in bench.models.iter().enumerate() {
        if !matches!(slow.kind, ModelKind::Modnet | ModelKind::ModnetNl) {
            continue;
        }
        for (j, fast) in bench.models.iter().enumerate() {
            if !fast.kind.factorized() {
                continue;
            }
            let wall = entries[i].median_step_sec / entries[j].median_step_sec;
            let g_count = entries[i]
                .per_step_counts
                .iter()
                .find(|(r, _)| r == "g")
                .map(|(_, c)| *c)
                .unwrap_or(0);
            let h_count = entries[j]
                .per_step_counts
                .iter()
                .find(|(r, _)| r == "h")
                .map(|(_, c)| *c)
                .unwrap_or(1);
            ratios.push((
                entries[i].kind.clone(),
                entries[j].kind.clone(),
                wall,
                g_count as f64 / h_count as f64,
            ));
        }
    }

    Ok(BenchReport {
        n_interior: cfg.train.n_interior,
        m_boundary: cfg.train.m_boundary,
        threads: cfg.train.threads,
        entries,
        ratios,
    })
}
