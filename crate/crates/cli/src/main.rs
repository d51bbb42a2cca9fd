//! `gdrop`: reduce benchmark or user-supplied structured models with DROP or
//! GDROP and write plot-ready CSV/JSON.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mor_core::config::{self, FrequencyConfig, LoadedModel};
use mor_core::dominant::ORDER_RULE;
use mor_core::models::{BenchmarkKind, DELAY_TAU, FADING_GAMMA, SECOND_ORDER_DAMPING};
use mor_core::pipeline::{self, Method, ReduceOptions, Reduction, RunReport};
use mor_core::Spacing;

#[derive(Parser, Debug)]
#[command(name = "gdrop", version, about = "Structure-preserving model reduction with actively sampled interpolation points")]
struct Cli {
    /// Print iteration records and summaries as JSON lines on stdout.
    #[arg(long, global = true)]
    log_json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build one ROM and evaluate it against the full model.
    Reduce(ReduceCmd),
    /// Build DROP and GDROP ROMs of the same order and compare them.
    Compare(CompareCmd),
    /// Time both methods over several training grid sizes.
    Sweep(SweepCmd),
    /// Build a ROM and write it as a loadable system directory.
    ExportRom(ReduceCmd),
    /// Write a benchmark model as Matrix Market files plus system.json.
    Gen(GenCmd),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Benchmark {
    Fom,
    DelayRod,
    FadingMemory,
    SecondOrder,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Drop,
    Gdrop,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    TwoSided,
    Galerkin,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// System description (JSON, or TOML by extension).
    #[arg(long, conflicts_with = "benchmark")]
    config: Option<PathBuf>,
    /// Built-in benchmark.
    #[arg(long, value_enum)]
    benchmark: Option<Benchmark>,
    /// Benchmark size: n (fom, delay-rod), grid side (fading-memory) or degrees of freedom (second-order).
    #[arg(long)]
    size: Option<usize>,
    /// Seed for randomized benchmark inputs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training grid size N.
    #[arg(long)]
    grid: Option<usize>,
    /// Frequency band `wmin:wmax` in rad/s.
    #[arg(long, value_parser = parse_range_arg)]
    range: Option<(f64, f64)>,
}

#[derive(Args, Debug, Clone)]
struct ReductionArgs {
    /// Relative mean-residual tolerance for active sampling.
    #[arg(long, default_value_t = 1e-3)]
    tol_sample: f64,
    /// Relative tail-energy tolerance for the reduced order.
    #[arg(long, default_value_t = 1e-8)]
    tol_svd: f64,
    /// Fixed reduced order (capped at the numerical rank).
    #[arg(long)]
    order: Option<usize>,
    /// Projection mode; defaults to galerkin for second-order and two-sided otherwise.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Points selected per sampling iteration.
    #[arg(long, default_value_t = 3)]
    batch: usize,
    /// Budget on selected representatives (default N/4).
    #[arg(long)]
    max_points: Option<usize>,
}

#[derive(Args, Debug)]
struct ReduceCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    reduction: ReductionArgs,
    #[arg(long, value_enum, default_value = "gdrop")]
    method: MethodArg,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    reduction: ReductionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    reduction: ReductionArgs,
    /// Training grid sizes.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    grids: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenCmd {
    #[arg(long, value_enum)]
    benchmark: Benchmark,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_range_arg(s: &str) -> Result<(f64, f64), String> {
    config::parse_range(s).map_err(|e| e.to_string())
}

fn benchmark_kind(b: Benchmark, size: Option<usize>, seed: u64) -> BenchmarkKind {
    match b {
        Benchmark::Fom => {
            let n = size.unwrap_or(mor_core::models::FOM_N);
            BenchmarkKind::Fom {
                n,
                scaled: n != mor_core::models::FOM_N,
            }
        }
        Benchmark::DelayRod => BenchmarkKind::DelayRod {
            n: size.unwrap_or(300),
            tau: DELAY_TAU,
        },
        Benchmark::FadingMemory => BenchmarkKind::FadingMemory {
            grid_side: size.unwrap_or(32),
            gamma: FADING_GAMMA,
            seed,
        },
        Benchmark::SecondOrder => BenchmarkKind::SecondOrder {
            n_dof: size.unwrap_or(400),
            damping: SECOND_ORDER_DAMPING,
        },
    }
}

impl ModelArgs {
    fn load(&self) -> Result<LoadedModel> {
        let mut model = match (&self.config, self.benchmark) {
            (Some(path), _) => config::load_external(path).with_context(|| format!("loading {}", path.display()))?,
            (None, Some(b)) => {
                let cfg = config::SystemConfig {
                    benchmark: Some(benchmark_kind(b, self.size, self.seed)),
                    ..Default::default()
                };
                cfg.build(Path::new("."))?
            }
            (None, None) => bail!("give --config FILE or --benchmark NAME"),
        };
        if let Some((lo, hi)) = self.range {
            model.frequency.omega_min = lo;
            model.frequency.omega_max = hi;
        }
        if let Some(n) = self.grid {
            if n == 0 {
                bail!("--grid must be positive");
            }
            model.frequency.n = n;
        }
        Ok(model)
    }
}

impl ReductionArgs {
    fn options(&self, method: Method, model: &LoadedModel) -> Result<ReduceOptions> {
        if !(self.tol_sample > 0.0) || !(self.tol_svd > 0.0) {
            bail!("tolerances must be positive");
        }
        if self.batch == 0 {
            bail!("--batch must be at least 1");
        }
        Ok(ReduceOptions {
            method,
            tol_sample: self.tol_sample,
            tol_svd: self.tol_svd,
            order: self.order,
            galerkin: match self.mode {
                Some(Mode::Galerkin) => true,
                Some(Mode::TwoSided) => false,
                None => model.galerkin,
            },
            batch: self.batch,
            max_points: self.max_points,
        })
    }
}

fn method_of(m: MethodArg) -> Method {
    match m {
        MethodArg::Drop => Method::Drop,
        MethodArg::Gdrop => Method::Gdrop,
    }
}

fn range_of(f: &FrequencyConfig) -> (f64, f64) {
    (f.omega_min, f.omega_max)
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run_reduce(cmd: &ReduceCmd, log_json: bool) -> Result<(LoadedModel, Reduction, RunReport)> {
    let model = cmd.model.load()?;
    let training = model.training()?;
    let opts = cmd.reduction.options(method_of(cmd.method), &model)?;
    let red = pipeline::reduce(&model.system, &training, &opts).with_context(|| format!("reducing {}", model.name))?;
    let (lo, hi) = range_of(&model.frequency);
    let grid = pipeline::evaluation_grid(lo, hi, training.len())?;
    let evaluation = pipeline::evaluate(&model.system, &red.rom.system, &grid)?;
    let report = RunReport::new(&model.name, &model.system, &training, &red, evaluation);
    print_warnings(&report.warnings);
    if log_json {
        for rec in &report.eps_history {
            json_line(rec)?;
        }
        json_line(&serde_json::json!({
            "model": report.model,
            "method": report.method,
            "order_rule": report.order_rule,
            "rom_order": report.rom_order,
            "solve_count_large": report.solve_count_large,
            "selected": report.selected_points.len(),
            "max_error": report.evaluation.max_error,
            "time_s": report.timings.total(),
        }))?;
    } else {
        println!("model {} (n = {}), {} training points", report.model, report.n, report.training_points);
        println!("method {:?}, projection {}", report.method, if report.galerkin { "galerkin" } else { "two-sided" });
        println!("order rule: {}", report.order_rule);
        println!("reduced order {}", report.rom_order);
        println!(
            "large solves {}, selected points {} (+{} observability)",
            report.solve_count_large,
            report.selected_points.len(),
            report.selected_points_w.len(),
        );
        println!("max relative error {:.3e} on {} points", report.evaluation.max_error, report.evaluation.omega.len());
        println!(
            "time {:.3}s (basis {:.3}s, svd {:.3}s, projection {:.3}s)",
            report.timings.total(),
            report.timings.basis_s,
            report.timings.svd_s,
            report.timings.projection_s
        );
    }
    Ok((model, red, report))
}

fn cmd_reduce(cmd: &ReduceCmd, log_json: bool) -> Result<()> {
    let (_, _, report) = run_reduce(cmd, log_json)?;
    if let Some(dir) = &cmd.out {
        pipeline::write_run(dir, &report)?;
    }
    Ok(())
}

fn cmd_export_rom(cmd: &ReduceCmd, log_json: bool) -> Result<()> {
    let Some(dir) = &cmd.out else { bail!("export-rom needs --out DIR") };
    let (model, red, report) = run_reduce(cmd, log_json)?;
    let path = config::write_system(dir, &red.rom.system, Some(&model.frequency), Some(red.galerkin))?;
    pipeline::write_run(dir, &report)?;
    if !log_json {
        println!("reduced model written to {}", path.display());
    }
    Ok(())
}

fn cmd_compare(cmd: &CompareCmd, log_json: bool) -> Result<()> {
    let model = cmd.model.load()?;
    let training = model.training()?;
    let opts = cmd.reduction.options(Method::Gdrop, &model)?;
    let cmp = pipeline::compare(&model.name, &model.system, &training, range_of(&model.frequency), &opts)
        .with_context(|| format!("comparing on {}", model.name))?;
    print_warnings(&cmp.gdrop.warnings);
    print_warnings(&cmp.drop.warnings);
    let s = &cmp.summary;
    if log_json {
        for rec in &cmp.gdrop.history {
            json_line(rec)?;
        }
        json_line(s)?;
    } else {
        println!("model {} (n = {}), {} training points", s.model, model.system.n(), s.training_points);
        println!("order rule: {ORDER_RULE}");
        println!("reduced order {} for both methods", s.order);
        println!("max error  drop {:.3e}  gdrop {:.3e}", s.max_error_drop, s.max_error_gdrop);
        println!("max |H_gdrop - H_drop| / max |H| = {:.3e}", s.max_difference);
        println!("large solves  drop {}  gdrop {}", s.solves_drop, s.solves_gdrop);
        println!("time  drop {:.3}s  gdrop {:.3}s  speedup {:.1}x", s.time_drop_s, s.time_gdrop_s, s.speedup);
    }
    if let Some(dir) = &cmd.out {
        pipeline::write_comparison(dir, &training, &cmp)?;
    }
    Ok(())
}

fn cmd_sweep(cmd: &SweepCmd, log_json: bool) -> Result<()> {
    if cmd.grids.is_empty() || cmd.grids.contains(&0) {
        bail!("--grids needs positive sizes");
    }
    let model = cmd.model.load()?;
    let opts = cmd.reduction.options(Method::Gdrop, &model)?;
    let rows = pipeline::sweep(&model.system, range_of(&model.frequency), &cmd.grids, &opts)
        .with_context(|| format!("sweeping {}", model.name))?;
    if log_json {
        for row in &rows {
            json_line(row)?;
        }
    } else {
        print!("{}", pipeline::sweep_csv(&rows));
    }
    if let Some(dir) = &cmd.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("sweep.csv"), pipeline::sweep_csv(&rows))?;
    }
    Ok(())
}

fn cmd_gen(cmd: &GenCmd) -> Result<()> {
    let kind = benchmark_kind(cmd.benchmark, cmd.size, cmd.seed);
    let spec = kind.spec();
    let sys = kind.build()?;
    let frequency = FrequencyConfig {
        omega_min: spec.omega_min,
        omega_max: spec.omega_max,
        n: spec.grid,
        spacing: Spacing::Log,
    };
    let path = config::write_system(&cmd.out, &sys, Some(&frequency), Some(kind.galerkin_default()))?;
    println!("{} (n = {}) written to {}", kind.name(), sys.n(), path.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Reduce(c) => cmd_reduce(c, cli.log_json),
        Command::ExportRom(c) => cmd_export_rom(c, cli.log_json),
        Command::Compare(c) => cmd_compare(c, cli.log_json),
        Command::Sweep(c) => cmd_sweep(c, cli.log_json),
        Command::Gen(c) => cmd_gen(c),
    }
}
