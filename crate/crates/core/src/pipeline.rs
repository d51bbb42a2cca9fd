//! End-to-end runs: build a ROM with DROP or GDROP, evaluate it against the
//! full model and compare or sweep the two methods.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::dominant::{self, LowRankFactors, RomRealization, ORDER_RULE};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sylvester::{active_sample, IterationRecord, SamplingOptions, SylvesterProblem, DEFAULT_BATCH};
use crate::system::StructuredSystem;
use crate::training::{FrequencyPoint, Spacing, TrainingSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Drop,
    Gdrop,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop" => Ok(Method::Drop),
            "gdrop" => Ok(Method::Gdrop),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}' (drop|gdrop)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReduceOptions {
    pub method: Method,
    /// Relative mean-residual threshold for active sampling.
    pub tol_sample: f64,
    /// Tail-energy threshold for the order.
    pub tol_svd: f64,
    pub order: Option<usize>,
    pub galerkin: bool,
    pub batch: usize,
    pub max_points: Option<usize>,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            method: Method::Gdrop,
            tol_sample: 1e-3,
            tol_svd: 1e-8,
            order: None,
            galerkin: false,
            batch: DEFAULT_BATCH,
            max_points: None,
        }
    }
}

/// Wall-clock seconds per phase; model generation and I/O are excluded.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub basis_s: f64,
    pub svd_s: f64,
    pub projection_s: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.basis_s + self.svd_s + self.projection_s
    }
}

/// A ROM plus what it took to build it.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub method: Method,
    pub rom: RomRealization,
    pub galerkin: bool,
    pub solve_count_large: usize,
    pub selected_v: Vec<usize>,
    pub selected_w: Vec<usize>,
    pub history: Vec<IterationRecord>,
    pub timings: PhaseTimings,
    pub warnings: Vec<String>,
}

pub fn reduce(sys: &StructuredSystem, training: &TrainingSet, opts: &ReduceOptions) -> Result<Reduction> {
    match opts.method {
        Method::Drop => reduce_drop(sys, training, opts),
        Method::Gdrop => reduce_gdrop(sys, training, opts),
    }
}

fn reduce_drop(sys: &StructuredSystem, training: &TrainingSet, opts: &ReduceOptions) -> Result<Reduction> {
    let t0 = Instant::now();
    let pair = dominant::build_bases_direct(sys, training, opts.galerkin).map_err(|e| e.context("drop basis construction"))?;
    let t1 = Instant::now();
    let (row_side, col_side) = dominant::dominant_svd_direct(sys, &pair).map_err(|e| e.context("drop svd"))?;
    let r = dominant::choose_order(&row_side.s, &col_side.s, opts.tol_svd, opts.order);
    let t2 = Instant::now();
    let rom = dominant::project(sys, &pair, &row_side, &col_side, r).map_err(|e| e.context("drop projection"))?;
    let t3 = Instant::now();
    let sides = if opts.galerkin { 1 } else { 2 };
    let all: Vec<usize> = (0..training.len()).collect();
    Ok(Reduction {
        method: Method::Drop,
        warnings: order_warnings(opts.order, rom.order),
        rom,
        galerkin: opts.galerkin,
        solve_count_large: sides * training.len(),
        selected_v: all.clone(),
        selected_w: if opts.galerkin { Vec::new() } else { all },
        history: Vec::new(),
        timings: PhaseTimings {
            basis_s: (t1 - t0).as_secs_f64(),
            svd_s: (t2 - t1).as_secs_f64(),
            projection_s: (t3 - t2).as_secs_f64(),
        },
    })
}

fn reduce_gdrop(sys: &StructuredSystem, training: &TrainingSet, opts: &ReduceOptions) -> Result<Reduction> {
    let t0 = Instant::now();
    let sampling = SamplingOptions {
        tol: opts.tol_sample,
        batch: opts.batch,
        max_points: opts.max_points,
        initial_points: Vec::new(),
    };
    let pv = SylvesterProblem::reachability(sys, training)?;
    let bv = active_sample(&pv, &sampling).map_err(|e| e.context("reachability sampling"))?;
    let mut warnings = bv.warnings.clone();
    let mut history = bv.log.clone();
    let mut solves = bv.solve_count;
    let fv = LowRankFactors::from_basis(&bv, training);
    let (fw, selected_w) = if opts.galerkin {
        (None, Vec::new())
    } else {
        let pw = SylvesterProblem::observability(sys, training)?;
        let sampling_w = SamplingOptions {
            initial_points: bv.selected_points.clone(),
            ..sampling
        };
        let bw = active_sample(&pw, &sampling_w).map_err(|e| e.context("observability sampling"))?;
        warnings.extend(bw.warnings.iter().cloned());
        history.extend(bw.log.iter().cloned());
        solves += bw.solve_count;
        (Some(LowRankFactors::from_basis(&bw, training)), bw.selected_points.clone())
    };
    let t1 = Instant::now();
    let bases = dominant::dominant_svd_lowrank(sys, &fv, fw.as_ref(), opts.tol_svd, opts.order)
        .map_err(|e| e.context("low-rank svd"))?;
    let t2 = Instant::now();
    let rom = bases.realize(sys).map_err(|e| e.context("gdrop projection"))?;
    let t3 = Instant::now();
    warnings.extend(order_warnings(opts.order, rom.order));
    Ok(Reduction {
        method: Method::Gdrop,
        rom,
        galerkin: opts.galerkin,
        solve_count_large: solves,
        selected_v: bv.selected_points.clone(),
        selected_w,
        history,
        timings: PhaseTimings {
            basis_s: (t1 - t0).as_secs_f64(),
            svd_s: (t2 - t1).as_secs_f64(),
            projection_s: (t3 - t2).as_secs_f64(),
        },
        warnings,
    })
}

fn order_warnings(requested: Option<usize>, got: usize) -> Vec<String> {
    match requested {
        Some(r) if r > got => vec![format!("requested order {r} capped at numerical rank {got}")],
        _ => Vec::new(),
    }
}

/// Log-spaced evaluation grid with `2N` points over the training band.
pub fn evaluation_grid(omega_min: f64, omega_max: f64, n_training: usize) -> Result<TrainingSet> {
    TrainingSet::imaginary_grid(omega_min, omega_max, 2 * n_training.max(1), Spacing::Log)
}

/// Largest singular values of the full and reduced transfer functions and
/// the relative error on a grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub omega: Vec<f64>,
    pub h: Vec<f64>,
    pub h_rom: Vec<f64>,
    pub error: Vec<f64>,
    pub max_error: f64,
}

pub fn evaluate(fom: &StructuredSystem, rom: &StructuredSystem, grid: &TrainingSet) -> Result<Evaluation> {
    let profile = dominant::rom_error_metric(fom, rom, grid)?;
    let mut h = Vec::with_capacity(grid.len());
    let mut h_rom = Vec::with_capacity(grid.len());
    for &s in grid.points() {
        h.push(sv_max(fom.eval_transfer(s)?)?);
        h_rom.push(sv_max(rom.eval_transfer(s)?)?);
    }
    Ok(Evaluation {
        omega: grid.points().iter().map(|s| s.im).collect(),
        h,
        h_rom,
        error: profile.errors,
        max_error: profile.max_error,
    })
}

fn sv_max(m: faer::Mat<c64>) -> Result<f64> {
    Ok(linalg::singular_values_c(m.as_ref())?.first().copied().unwrap_or(0.0))
}

/// Everything a run produced, as written to `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub method: Method,
    pub n: usize,
    pub training_points: usize,
    pub galerkin: bool,
    pub solve_count_large: usize,
    pub selected_points: Vec<FrequencyPoint>,
    pub selected_points_w: Vec<FrequencyPoint>,
    pub rom_order: usize,
    pub order_rule: String,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub timings: PhaseTimings,
    pub eps_history: Vec<IterationRecord>,
    pub evaluation: Evaluation,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(model: &str, sys: &StructuredSystem, training: &TrainingSet, red: &Reduction, evaluation: Evaluation) -> Self {
        let pts = |idx: &[usize]| idx.iter().map(|&j| training.point(j).into()).collect();
        RunReport {
            model: model.to_string(),
            method: red.method,
            n: sys.n(),
            training_points: training.len(),
            galerkin: red.galerkin,
            solve_count_large: red.solve_count_large,
            selected_points: pts(&red.selected_v),
            selected_points_w: pts(&red.selected_w),
            rom_order: red.rom.order,
            order_rule: ORDER_RULE.to_string(),
            sigma1: red.rom.sigma1.clone(),
            sigma2: red.rom.sigma2.clone(),
            timings: red.timings.clone(),
            eps_history: red.history.clone(),
            evaluation,
            warnings: red.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "report.json".into(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// `printf("%.17g")`: 17 significant digits, trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    strip_zeros(&format!("{x:.prec$}", prec = (16 - exp) as usize))
}

fn strip_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Header row plus one line per record, comma separated, `%.17g` floats.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_g17(v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, `response.csv` and `history.jsonl` into `dir`.
pub fn write_run(dir: &Path, report: &RunReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("report.json"), &report.to_json())?;
    let ev = &report.evaluation;
    let rows: Vec<Vec<f64>> = (0..ev.omega.len())
        .map(|k| vec![ev.omega[k], ev.h[k], ev.h_rom[k], ev.error[k]])
        .collect();
    write(&dir.join("response.csv"), &csv_table(&["omega", "h", "h_rom", "error"], &rows))?;
    write(&dir.join("history.jsonl"), &history_jsonl(&report.eps_history))
}

pub fn history_jsonl(history: &[IterationRecord]) -> String {
    let mut out = String::new();
    for rec in history {
        out.push_str(&serde_json::to_string(rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Both methods at the same order on the same model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub model: String,
    pub order: usize,
    pub training_points: usize,
    pub evaluation_points: usize,
    pub max_error_drop: f64,
    pub max_error_gdrop: f64,
    /// `max |Ĥ_gdrop − Ĥ_drop| / max |H|` over the evaluation grid.
    pub max_difference: f64,
    pub time_drop_s: f64,
    pub time_gdrop_s: f64,
    pub speedup: f64,
    pub solves_drop: usize,
    pub solves_gdrop: usize,
    pub selected_gdrop: usize,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub summary: CompareSummary,
    pub drop: Reduction,
    pub gdrop: Reduction,
    pub eval_drop: Evaluation,
    pub eval_gdrop: Evaluation,
}

/// Runs GDROP, then DROP at the order GDROP ended up with (or the
/// requested one), and evaluates both on a grid twice as dense as the
/// training set.
pub fn compare(
    model: &str,
    sys: &StructuredSystem,
    training: &TrainingSet,
    range: (f64, f64),
    opts: &ReduceOptions,
) -> Result<Comparison> {
    let gdrop = reduce(sys, training, &ReduceOptions { method: Method::Gdrop, ..opts.clone() })?;
    let drop = reduce(
        sys,
        training,
        &ReduceOptions {
            method: Method::Drop,
            order: Some(gdrop.rom.order),
            ..opts.clone()
        },
    )?;
    let grid = evaluation_grid(range.0, range.1, training.len())?;
    let eval_drop = evaluate(sys, &drop.rom.system, &grid)?;
    let eval_gdrop = evaluate(sys, &gdrop.rom.system, &grid)?;
    let diff = dominant::rom_error_metric(&drop.rom.system, &gdrop.rom.system, &grid)?;
    let h_max = eval_drop.h.iter().copied().fold(0.0, f64::max);
    let max_difference = diff.max_error * diff.h_max / if h_max > 0.0 { h_max } else { 1.0 };
    let (td, tg) = (drop.timings.total(), gdrop.timings.total());
    let summary = CompareSummary {
        model: model.to_string(),
        order: gdrop.rom.order,
        training_points: training.len(),
        evaluation_points: grid.len(),
        max_error_drop: eval_drop.max_error,
        max_error_gdrop: eval_gdrop.max_error,
        max_difference,
        time_drop_s: td,
        time_gdrop_s: tg,
        speedup: if tg > 0.0 { td / tg } else { f64::INFINITY },
        solves_drop: drop.solve_count_large,
        solves_gdrop: gdrop.solve_count_large,
        selected_gdrop: gdrop.selected_v.len(),
    };
    Ok(Comparison {
        summary,
        drop,
        gdrop,
        eval_drop,
        eval_gdrop,
    })
}

/// Writes `compare.csv`, `selected.csv` and `summary.json` into `dir`.
pub fn write_comparison(dir: &Path, training: &TrainingSet, cmp: &Comparison) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (d, g) = (&cmp.eval_drop, &cmp.eval_gdrop);
    let rows: Vec<Vec<f64>> = (0..d.omega.len())
        .map(|k| vec![d.omega[k], d.h[k], d.h_rom[k], g.h_rom[k], d.error[k], g.error[k]])
        .collect();
    write(
        &dir.join("compare.csv"),
        &csv_table(&["omega", "h", "h_drop", "h_gdrop", "e_drop", "e_gdrop"], &rows),
    )?;
    let mut sel = Vec::new();
    for (side, idx) in [(0.0, &cmp.gdrop.selected_v), (1.0, &cmp.gdrop.selected_w)] {
        for (order, &j) in idx.iter().enumerate() {
            let s = training.point(j);
            sel.push(vec![side, order as f64, s.re, s.im]);
        }
    }
    write(&dir.join("selected.csv"), &csv_table(&["side", "order", "sigma_re", "sigma_im"], &sel))?;
    let json = serde_json::to_string_pretty(&cmp.summary).expect("summary serializes");
    write(&dir.join("summary.json"), &json)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_training: usize,
    pub time_drop_s: f64,
    pub time_gdrop_s: f64,
    pub solves_drop: usize,
    pub solves_gdrop: usize,
    pub order: usize,
}

/// Timings and solve counts of both methods over several training sizes.
pub fn sweep(sys: &StructuredSystem, range: (f64, f64), sizes: &[usize], opts: &ReduceOptions) -> Result<Vec<SweepRow>> {
    sizes
        .iter()
        .map(|&n| {
            let training = TrainingSet::imaginary_grid(range.0, range.1, n, Spacing::Log)?;
            let gdrop = reduce(sys, &training, &ReduceOptions { method: Method::Gdrop, ..opts.clone() })?;
            let drop = reduce(
                sys,
                &training,
                &ReduceOptions {
                    method: Method::Drop,
                    order: Some(gdrop.rom.order),
                    ..opts.clone()
                },
            )?;
            Ok(SweepRow {
                n_training: training.len(),
                time_drop_s: drop.timings.total(),
                time_gdrop_s: gdrop.timings.total(),
                solves_drop: drop.solve_count_large,
                solves_gdrop: gdrop.solve_count_large,
                order: gdrop.rom.order,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_training as f64,
                r.time_drop_s,
                r.time_gdrop_s,
                r.solves_drop as f64,
                r.solves_gdrop as f64,
                r.order as f64,
            ]
        })
        .collect();
    csv_table(&["n_training", "t_drop", "t_gdrop", "solves_drop", "solves_gdrop", "order"], &data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gen_delay_rod, gen_fom};
    use crate::sylvester::Side;

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(123456.0), "123456");
        for x in [std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -4.9e-300] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn drop_solve_count_is_points_times_sides() {
        let sys = gen_delay_rod(30, 3.0).unwrap();
        let ts = TrainingSet::log_imaginary(1e-3, 1e3, 20).unwrap();
        let two = reduce(&sys, &ts, &ReduceOptions { method: Method::Drop, order: Some(4), ..Default::default() }).unwrap();
        assert_eq!(two.solve_count_large, 40);
        let one = reduce(
            &sys,
            &ts,
            &ReduceOptions { method: Method::Drop, order: Some(4), galerkin: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(one.solve_count_large, 20);
        assert_eq!(one.rom.v_p, one.rom.w_p);
    }

    #[test]
    fn report_round_trips_and_is_reproducible() {
        let sys = gen_fom(60, true).unwrap();
        let ts = TrainingSet::log_imaginary(0.1, 1e3, 60).unwrap();
        let opts = ReduceOptions { order: Some(8), ..Default::default() };
        let run = || {
            let red = reduce(&sys, &ts, &opts).unwrap();
            let grid = evaluation_grid(0.1, 1e3, 20).unwrap();
            let ev = evaluate(&sys, &red.rom.system, &grid).unwrap();
            RunReport::new("fom", &sys, &ts, &red, ev)
        };
        let a = run();
        assert_eq!(RunReport::from_json(&a.to_json()).unwrap(), a);
        let b = run();
        assert_eq!(a.selected_points, b.selected_points);
        assert_eq!(a.rom_order, b.rom_order);
        let last = |side| a.eps_history.iter().filter(|r| r.side == side).map(|r| r.linear_solves).last().unwrap();
        assert_eq!(a.solve_count_large, last(Side::Reachability) + last(Side::Observability));
    }

    #[test]
    fn self_compare_has_equal_error_columns() {
        let sys = gen_fom(40, true).unwrap();
        let ts = TrainingSet::log_imaginary(0.1, 1e3, 40).unwrap();
        let red = reduce(&sys, &ts, &ReduceOptions { method: Method::Drop, order: Some(6), ..Default::default() }).unwrap();
        let grid = evaluation_grid(0.1, 1e3, 10).unwrap();
        let a = evaluate(&sys, &red.rom.system, &grid).unwrap();
        let b = evaluate(&sys, &red.rom.system, &grid).unwrap();
        assert_eq!(a.error, b.error);
    }
}
