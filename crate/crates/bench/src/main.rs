use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bpr_bench::config::parse_snr;
use bpr_bench::select::reference_row;
use bpr_bench::sweep::{sweep, write_report};
use bpr_bench::trial::trial_specs;
use bpr_bench::{
    emit_report, gen_instance, BenchError, ExperimentConfig, KChoice, KMode, MatrixKind, ReportFormat, Result,
    SweepTable, SweepVariable,
};
use bpr_core::io::{load_bpr, save_bpr, BprObject};
use bpr_core::{
    block_pr_solve, nmse, residual, BlockPRInstance, BlockSolveOutput, ComplexVec, MeasurementKind, PRInstance,
    SolverKind, SolverReport, StageTimes,
};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "bpr", version, about = "Block-based phase retrieval experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance and write it as BPR1 files into a directory.
    Gen {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance (generated from the config, or loaded with
    /// `--instance`) and print a JSON report.
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Directory written by `gen`.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Write the estimate to this BPR1 file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the signal length.
    SweepN {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Sweep the number of blocks at fixed N.
    SweepK {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<usize>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Auto-K speedup table against the monolithic solver.
    Table1 {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048")]
        n_list: Vec<usize>,
        /// Also write the sweep table here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
}

#[derive(Args)]
struct ReportArgs {
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `csv` or `json`; defaults from the `--out` extension, else csv.
    #[arg(long)]
    format: Option<String>,
    /// Time the monolithic solver on every trial too.
    #[arg(long)]
    compare_monolithic: bool,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Positive integer or `auto`.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// dB, or `inf` for noiseless.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Block solver: `wf`, `alt_proj` or `unit_modulus`.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Iteration cap of the block solver.
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tune_solver: Option<String>,
    #[arg(long)]
    tune_restarts: Option<usize>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// `gaussian` or `binary01`.
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long)]
    noisy_tuning: Option<bool>,
    #[arg(long)]
    baseline_include_tuning_rows: bool,
    /// `empirical` or `theoretical`.
    #[arg(long)]
    k_mode: Option<String>,
    #[arg(long)]
    k_constant: Option<f64>,
}

fn config_err(e: impl std::fmt::Display) -> BenchError {
    BenchError::Config(e.to_string())
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(k) = &self.k {
            cfg.k = k.parse::<KChoice>()?;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if let Some(s) = &self.snr {
            cfg.snr_db = parse_snr(s)?;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = &self.solver {
            cfg.solver.kind = s.parse::<SolverKind>().map_err(config_err)?;
        }
        if let Some(r) = self.restarts {
            cfg.solver.restarts = r;
        }
        if let Some(it) = self.max_iters {
            cfg.solver.wf.max_iters = it;
            cfg.solver.ap.max_iters = it;
        }
        if let Some(s) = &self.tune_solver {
            cfg.tune_solver.kind = s.parse::<SolverKind>().map_err(config_err)?;
        }
        if let Some(r) = self.tune_restarts {
            cfg.tune_solver.restarts = r;
        }
        if let Some(p) = self.parallelism {
            cfg.parallelism = Some(p);
        }
        if let Some(m) = &self.matrix {
            cfg.matrix_kind = m.parse::<MatrixKind>()?;
        }
        if let Some(flag) = self.noisy_tuning {
            cfg.noisy_tuning = flag;
        }
        if self.baseline_include_tuning_rows {
            cfg.baseline_include_tuning_rows = true;
        }
        if let Some(m) = &self.k_mode {
            cfg.k_mode = m.parse::<KMode>()?;
        }
        if let Some(c) = self.k_constant {
            cfg.k_constant = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report_format(format: Option<&str>, out: Option<&Path>) -> Result<ReportFormat> {
    match format {
        Some(f) => f.parse(),
        None => Ok(match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }),
    }
}

/// Sidecar written next to the BPR1 files of a generated instance.
#[derive(Serialize, Deserialize)]
struct InstanceMeta {
    n: usize,
    k: usize,
    beta: f64,
    snr_db: Option<f64>,
    trial_seed: u64,
    config: ExperimentConfig,
}

const FILE_H: &str = "h.bpr";
const FILE_Y: &str = "y.bpr";
const FILE_A: &str = "a.bpr";
const FILE_YT: &str = "yt.bpr";
const FILE_X: &str = "x.bpr";
const FILE_META: &str = "meta.json";

fn real_vector(values: &[f64]) -> Result<BprObject> {
    Ok(BprObject::Vector(ComplexVec::new(
        values.iter().map(|&v| bpr_core::C64::new(v, 0.0)).collect(),
    )?))
}

fn read_real_vector(path: &Path) -> Result<Vec<f64>> {
    match load_bpr(path)? {
        BprObject::Vector(v) => Ok(v.iter().map(|c| c.re).collect()),
        _ => Err(bpr_core::Error::Format(format!("{}: expected a vector", path.display())).into()),
    }
}

fn cmd_gen(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let g = gen_instance(cfg, cfg.seed)?;
    let inst = &g.instance;
    fs::create_dir_all(out)?;
    save_bpr(out.join(FILE_H), &BprObject::Krbd(inst.krbd().clone()))?;
    save_bpr(out.join(FILE_Y), &real_vector(&inst.base.measurements)?)?;
    save_bpr(out.join(FILE_A), &BprObject::Dense(inst.tuning_matrix.clone()))?;
    save_bpr(out.join(FILE_YT), &real_vector(&inst.tuning_measurements)?)?;
    save_bpr(out.join(FILE_X), &BprObject::Vector(g.truth.clone()))?;
    let meta = InstanceMeta {
        n: cfg.n,
        k: inst.num_blocks(),
        beta: inst.beta,
        snr_db: cfg.snr_db,
        trial_seed: cfg.seed,
        config: cfg.clone(),
    };
    fs::write(out.join(FILE_META), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn load_instance(dir: &Path) -> Result<(BlockPRInstance, Option<ComplexVec>)> {
    let krbd = match load_bpr(dir.join(FILE_H))? {
        BprObject::Krbd(h) => h,
        _ => return Err(bpr_core::Error::Format(format!("{FILE_H}: expected a KRBD matrix")).into()),
    };
    let a = match load_bpr(dir.join(FILE_A))? {
        BprObject::Dense(a) => a,
        _ => return Err(bpr_core::Error::Format(format!("{FILE_A}: expected a dense matrix")).into()),
    };
    let y = read_real_vector(&dir.join(FILE_Y))?;
    let y_t = read_real_vector(&dir.join(FILE_YT))?;
    let snr_db = match fs::read_to_string(dir.join(FILE_META)) {
        Ok(text) => serde_json::from_str::<InstanceMeta>(&text)?.snr_db,
        Err(e) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let truth = match load_bpr(dir.join(FILE_X)) {
        Ok(BprObject::Vector(x)) => Some(x),
        Ok(_) => return Err(bpr_core::Error::Format(format!("{FILE_X}: expected a vector")).into()),
        Err(bpr_core::Error::Io(e)) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let beta = a.rows() as f64 / krbd.num_blocks() as f64;
    let base = PRInstance::new(krbd, y, MeasurementKind::Intensity, snr_db)?;
    Ok((BlockPRInstance::new(base, a, y_t, beta)?, truth))
}

#[derive(Serialize)]
struct SolveSummary {
    n: usize,
    k: usize,
    nmse: Option<f64>,
    residual: f64,
    d_hat: ComplexVec,
    stage_times: StageTimes,
    total_s: f64,
    tuning_report: SolverReport,
    per_block_reports: Vec<SolverReport>,
}

fn cmd_solve(cfg: &ExperimentConfig, instance_dir: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let (instance, truth) = match instance_dir {
        Some(dir) => load_instance(dir)?,
        None => {
            let g = gen_instance(cfg, cfg.seed)?;
            (g.instance, Some(g.truth))
        }
    };
    let k = instance.num_blocks();
    let (block_spec, tune_spec) = trial_specs(cfg, cfg.seed);
    let (x_hat, output) = block_pr_solve(&instance, &block_spec, &tune_spec, cfg.parallelism_for(k))?;
    let BlockSolveOutput {
        per_block_reports,
        d_hat,
        tuning_report,
        stage_times,
        ..
    } = output;
    let magnitudes = instance.base.measurements_as(MeasurementKind::Magnitude);
    let summary = SolveSummary {
        n: x_hat.len(),
        k,
        nmse: truth.as_ref().map(|x| nmse(x, &x_hat)).transpose()?,
        residual: residual(instance.krbd(), &magnitudes, &x_hat)?,
        d_hat,
        total_s: stage_times.total(),
        stage_times,
        tuning_report,
        per_block_reports,
    };
    if let Some(path) = out {
        save_bpr(path, &BprObject::Vector(x_hat))?;
    }
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &summary)?;
    writeln!(stdout)?;
    Ok(())
}

fn write_table(table: &SweepTable, report: &ReportArgs) -> Result<()> {
    let format = report_format(report.format.as_deref(), report.out.as_deref())?;
    match &report.out {
        Some(path) => emit_report(table, format, path),
        None => write_report(table, format, &mut io::stdout().lock()),
    }
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"))
}

fn cmd_table1(cfg: &ExperimentConfig, n_list: &[usize], out: Option<&Path>, format: Option<&str>) -> Result<()> {
    let template = ExperimentConfig {
        k: KChoice::Auto,
        ..cfg.clone()
    };
    let table = sweep(&template, &SweepVariable::N(n_list.to_vec()), true)?;
    let mut stdout = io::stdout().lock();
    writeln!(
        stdout,
        "{:>6} {:>4} {:>6} {:>10} {:>12} {:>12}",
        "N", "K", "ref_K", "speedup", "ref_speedup", "nmse_median"
    )?;
    for row in &table.rows {
        let reference = reference_row(row.n);
        writeln!(
            stdout,
            "{:>6} {:>4} {:>6} {:>10} {:>12} {:>12}",
            row.n,
            row.k.map_or_else(|| "-".to_string(), |k| k.to_string()),
            reference.map_or_else(|| "-".to_string(), |r| r.0.to_string()),
            fmt_opt(row.speedup, 2),
            fmt_opt(reference.map(|r| r.1), 1),
            row.nmse_median.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}")),
        )?;
        if let Some(e) = &row.error {
            writeln!(stdout, "       N={} failed: {e}", row.n)?;
        }
    }
    if let Some(path) = out {
        emit_report(&table, report_format(format, Some(path))?, path)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { cfg, out } => cmd_gen(&cfg.resolve()?, &out),
        Command::Solve { cfg, instance, out } => cmd_solve(&cfg.resolve()?, instance.as_deref(), out.as_deref()),
        Command::SweepN { cfg, n_list, report } => {
            let table = sweep(&cfg.resolve()?, &SweepVariable::N(n_list), report.compare_monolithic)?;
            write_table(&table, &report)
        }
        Command::SweepK { cfg, k_list, report } => {
            let table = sweep(&cfg.resolve()?, &SweepVariable::K(k_list), report.compare_monolithic)?;
            write_table(&table, &report)
        }
        Command::Table1 {
            cfg,
            n_list,
            out,
            format,
        } => cmd_table1(&cfg.resolve()?, &n_list, out.as_deref(), format.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bpr: {e}");
            e.exit_code()
        }
    }
}
