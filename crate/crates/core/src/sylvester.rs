//! Low-rank solution of the interpolatory generalized Sylvester equations
//!
//! ```text
//! A_1 V F_1 + … + A_l V F_l = B 1ᵀ,      F_i = diag(f_i(σ_1), …, f_i(σ_N))
//! ```
//!
//! (and the transposed counterpart for `W` with right-hand side `Cᵀ`) by
//! greedy active sampling: the basis `S` is grown only at the training
//! points where the column-wise residual of `V ≈ S Z` is largest.

use std::borrow::Cow;
use std::time::Instant;

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, orth_append};
use crate::system::{FunctionDiagonals, StructuredSystem};
use crate::training::{FrequencyPoint, TrainingSet};

/// Filter sharpness.
pub const FILTER_BETA: f64 = 0.6;
/// Guards the logarithm at `s = 0`.
pub const FILTER_EPS: f64 = 1e-15;
/// Points per greedy round after the first.
pub const DEFAULT_BATCH: usize = 3;

const RESIDUAL_CHUNK: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Reachability,
    Observability,
}

/// Whether the equation uses `A_i` or `A_iᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorMode {
    Plain,
    Transposed,
}

/// One of the two Sylvester equations of a structured system over a
/// training set.
pub struct SylvesterProblem<'a> {
    side: Side,
    operators: Cow<'a, StructuredSystem>,
    training: &'a TrainingSet,
    f_diag: FunctionDiagonals,
    rhs_norm: f64,
}

impl<'a> SylvesterProblem<'a> {
    /// `Σ A_i V F_i = B 1ᵀ`
    pub fn reachability(system: &'a StructuredSystem, training: &'a TrainingSet) -> Result<Self> {
        Self::build(Side::Reachability, Cow::Borrowed(system), training)
    }

    /// `Σ A_iᵀ W F_i = Cᵀ 1ᵀ`
    pub fn observability(system: &'a StructuredSystem, training: &'a TrainingSet) -> Result<Self> {
        Self::build(Side::Observability, Cow::Owned(system.dual()), training)
    }

    fn build(side: Side, operators: Cow<'a, StructuredSystem>, training: &'a TrainingSet) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::InvalidArgument("training set is empty".into()));
        }
        let f_diag = operators.evaluate_f_diag(training)?;
        let rhs_norm = linalg::frobenius(operators.b());
        Ok(SylvesterProblem {
            side,
            operators,
            training,
            f_diag,
            rhs_norm,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn op_mode(&self) -> OperatorMode {
        match self.side {
            Side::Reachability => OperatorMode::Plain,
            Side::Observability => OperatorMode::Transposed,
        }
    }

    /// The system whose pencil and input matrix define this equation
    /// (the dual system on the observability side).
    pub fn operators(&self) -> &StructuredSystem {
        &self.operators
    }

    pub fn training(&self) -> &TrainingSet {
        self.training
    }

    pub fn f_diag(&self) -> &FunctionDiagonals {
        &self.f_diag
    }

    /// `B` or `Cᵀ`.
    pub fn rhs(&self) -> MatRef<'_, f64> {
        self.operators.b()
    }

    pub fn rhs_norm(&self) -> f64 {
        self.rhs_norm
    }

    /// Number of right-hand-side columns per training point.
    pub fn block(&self) -> usize {
        self.operators.m()
    }

    /// The large-scale solve `K(σ_j)⁻¹ rhs` (or `K(σ_j)⁻ᵀ Cᵀ`).
    pub fn large_solve(&self, j: usize) -> Result<Mat<c64>> {
        self.operators.solve_at(self.training.point(j), self.rhs())
    }

    /// Real basis columns `[Re v, Im v]` of a solve at point `j`
    /// (`Re v` only for real points).
    fn real_columns(&self, j: usize, v: MatRef<'_, c64>) -> Mat<f64> {
        let real = vec![self.training.is_real(j); v.ncols()];
        linalg::split_real_imag(v, &real)
    }
}

/// `V ≈ S Z` with orthonormal real `S` and the cached products `A_i S`.
#[derive(Clone, Debug)]
pub struct LowRankBasis {
    /// `n × n_p`, orthonormal columns.
    pub s: Mat<f64>,
    /// `n_p × (N·m)`; block `j` holds the coefficients at training point `j`.
    pub z: Mat<c64>,
    /// `A_i S` for every term.
    pub cached_products: Vec<Mat<f64>>,
    /// Training indices in the order they were added.
    pub selected_points: Vec<usize>,
    /// Points whose `K(σ)` could not be factorized.
    pub skipped_points: Vec<usize>,
    /// Large-scale solves performed.
    pub solve_count: usize,
    /// Candidate columns dropped as numerically dependent.
    pub deflated: usize,
    pub log: Vec<IterationRecord>,
    pub converged: bool,
    pub budget_exceeded: bool,
    pub exhausted: bool,
    pub warnings: Vec<String>,
}

impl LowRankBasis {
    pub fn empty(problem: &SylvesterProblem<'_>) -> Self {
        let n = problem.operators.n();
        LowRankBasis {
            s: Mat::zeros(n, 0),
            z: Mat::zeros(0, problem.training.len() * problem.block()),
            cached_products: vec![Mat::zeros(n, 0); problem.operators.l()],
            selected_points: Vec::new(),
            skipped_points: Vec::new(),
            solve_count: 0,
            deflated: 0,
            log: Vec::new(),
            converged: false,
            budget_exceeded: false,
            exhausted: false,
            warnings: Vec::new(),
        }
    }

    /// Basis built from an arbitrary matrix (orthonormalized), with fresh
    /// cached products.
    pub fn from_columns(problem: &SylvesterProblem<'_>, cols: MatRef<'_, f64>) -> Result<Self> {
        let mut basis = Self::empty(problem);
        basis.append(problem, cols)?;
        Ok(basis)
    }

    pub fn rank(&self) -> usize {
        self.s.ncols()
    }

    /// Orthonormally appends the range of `cols`; returns the number of
    /// columns actually added.
    pub fn append(&mut self, problem: &SylvesterProblem<'_>, cols: MatRef<'_, f64>) -> Result<usize> {
        let out = orth_append(self.s.as_ref(), cols)?;
        self.deflated += out.deflated;
        self.cached_products = update_cached_products(&self.cached_products, problem.operators(), out.appended.as_ref())?;
        self.s = out.basis;
        Ok(out.appended.ncols())
    }

    /// `‖SᵀS − I‖_F`
    pub fn orthonormality_defect(&self) -> f64 {
        linalg::orthonormality_defect(self.s.as_ref())
    }

    /// The selected points as frequency values.
    pub fn selected_sigmas(&self, training: &TrainingSet) -> Vec<FrequencyPoint> {
        self.selected_points.iter().map(|&j| training.point(j).into()).collect()
    }
}

/// Appends `A_i · appended` to each cached `A_i S`.
pub fn update_cached_products(
    cached: &[Mat<f64>],
    operators: &StructuredSystem,
    appended: MatRef<'_, f64>,
) -> Result<Vec<Mat<f64>>> {
    if cached.len() != operators.l() {
        return Err(Error::dims("cached products", operators.l(), cached.len()));
    }
    if appended.nrows() != operators.n() {
        return Err(Error::dims("appended columns", operators.n(), appended.nrows()));
    }
    cached
        .iter()
        .zip(operators.terms())
        .map(|(old, term)| {
            if old.nrows() != operators.n() {
                return Err(Error::dims("cached product", operators.n(), old.nrows()));
            }
            if appended.ncols() == 0 {
                return Ok(old.clone());
            }
            let fresh = term.matrix.mul_dense(appended);
            let k = old.ncols();
            Ok(Mat::from_fn(old.nrows(), k + fresh.ncols(), |i, j| {
                if j < k {
                    old[(i, j)]
                } else {
                    fresh[(i, j - k)]
                }
            }))
        })
        .collect()
}

/// Projected coefficient matrices `Â_i = Sᵀ A_i S` and `B̂ = Sᵀ rhs`.
fn projected(problem: &SylvesterProblem<'_>, basis: &LowRankBasis) -> (Vec<Mat<f64>>, Mat<c64>) {
    let st = basis.s.transpose();
    let a_hat = basis.cached_products.iter().map(|p| st * p).collect();
    let b_hat = linalg::to_complex((st * problem.rhs()).as_ref());
    (a_hat, b_hat)
}

fn projected_pencil(a_hat: &[Mat<f64>], weights: &[c64]) -> Mat<c64> {
    let k = a_hat[0].nrows();
    let mut pencil = Mat::<c64>::zeros(k, k);
    for (a, &w) in a_hat.iter().zip(weights) {
        for j in 0..k {
            for i in 0..k {
                pencil[(i, j)] += w * a[(i, j)];
            }
        }
    }
    pencil
}

/// Coefficients minimizing the projected Sylvester residual; column block
/// `j` is `(Σ f_i(σ_j) Â_i)⁻¹ B̂`.
pub fn solve_projected(problem: &SylvesterProblem<'_>, basis: &LowRankBasis) -> Result<Mat<c64>> {
    let np = basis.rank();
    let m = problem.block();
    let n_pts = problem.training.len();
    let mut z = Mat::<c64>::zeros(np, n_pts * m);
    if np == 0 {
        return Ok(z);
    }
    let (a_hat, b_hat) = projected(problem, basis);
    let mut weights = vec![c64::new(0.0, 0.0); a_hat.len()];
    for j in 0..n_pts {
        for (i, w) in weights.iter_mut().enumerate() {
            *w = problem.f_diag.at(i, j);
        }
        let pencil = projected_pencil(&a_hat, &weights);
        let s = problem.training.point(j);
        let col = linalg::factorize(pencil.as_ref())
            .and_then(|h| h.solve(b_hat.as_ref()))
            .map_err(|_| Error::SingularProjectedPencil { index: j, s })?;
        z.as_mut().submatrix_mut(0, j * m, np, m).copy_from(&col);
    }
    Ok(z)
}

/// The projected solution at an arbitrary point `s` (not necessarily in
/// the training set).
pub fn projected_column(problem: &SylvesterProblem<'_>, basis: &LowRankBasis, s: c64) -> Result<Mat<c64>> {
    let (a_hat, b_hat) = projected(problem, basis);
    let weights = problem.operators.weights(s)?;
    let pencil = projected_pencil(&a_hat, &weights);
    linalg::factorize(pencil.as_ref())
        .and_then(|h| h.solve(b_hat.as_ref()))
        .map_err(|_| Error::SingularProjectedPencil { index: usize::MAX, s })
}

/// Column-wise residual norms of `Σ A_i S Z F_i − rhs 1ᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `r_j`, one per training representative.
    pub column_norms: Vec<f64>,
    /// `ε = (1/N) Σ r_j`
    pub mean_error: f64,
    /// `ε / ‖rhs‖_F`
    pub relative_error: f64,
    /// First index attaining `max r_j`.
    pub max_index: usize,
}

impl ResidualReport {
    fn from_norms(column_norms: Vec<f64>, rhs_norm: f64) -> Self {
        let n = column_norms.len();
        let mean_error = column_norms.iter().sum::<f64>() / n as f64;
        let relative_error = if rhs_norm > 0.0 { mean_error / rhs_norm } else { mean_error };
        let max_index = argmax(&column_norms).unwrap_or(0);
        ResidualReport {
            column_norms,
            mean_error,
            relative_error,
            max_index,
        }
    }
}

fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(j),
        }
    }
    best
}

/// Residual of the current low-rank approximation, assembled in column
/// chunks from the cached products. The dense `n × (N·m)` residual is only
/// materialized when `want_raw` is set.
pub fn residual(
    problem: &SylvesterProblem<'_>,
    basis: &LowRankBasis,
    z: MatRef<'_, c64>,
    want_raw: bool,
) -> Result<(ResidualReport, Option<Mat<c64>>)> {
    let n = problem.operators.n();
    let m = problem.block();
    let l = problem.operators.l();
    let np = basis.rank();
    let n_pts = problem.training.len();
    if z.nrows() != np || z.ncols() != n_pts * m {
        return Err(Error::dims(
            "residual coefficients",
            format!("{np}x{}", n_pts * m),
            format!("{}x{}", z.nrows(), z.ncols()),
        ));
    }
    let rhs = problem.rhs();
    let stack = Mat::from_fn(n, l * np, |i, c| basis.cached_products[c / np.max(1)][(i, c % np.max(1))]);

    let mut norms = vec![0.0; n_pts];
    let mut raw = want_raw.then(|| Mat::<c64>::zeros(n, n_pts * m));
    let mut start = 0;
    while start < n_pts {
        let end = (start + RESIDUAL_CHUNK).min(n_pts);
        let width = (end - start) * m;
        let mut block = Mat::<c64>::zeros(n, width);
        if np > 0 {
            // Weighted coefficients [f_1(σ_j) z_j; …; f_l(σ_j) z_j] for the chunk.
            let weighted = Mat::from_fn(l * np, width, |r, c| {
                let (term, row) = (r / np, r % np);
                let j = start + c / m;
                problem.f_diag.at(term, j) * z[(row, start * m + c)]
            });
            block = linalg::real_times_complex(stack.as_ref(), weighted.as_ref());
        }
        for c in 0..width {
            let k = c % m;
            for i in 0..n {
                block[(i, c)] -= c64::new(rhs[(i, k)], 0.0);
            }
        }
        for j in start..end {
            let mut acc = 0.0;
            for c in (j - start) * m..(j - start + 1) * m {
                for i in 0..n {
                    acc += block[(i, c)].norm_sqr();
                }
            }
            norms[j] = acc.sqrt();
        }
        if let Some(raw) = raw.as_mut() {
            raw.as_mut().submatrix_mut(0, start * m, n, width).copy_from(&block);
        }
        start = end;
    }
    Ok((ResidualReport::from_norms(norms, problem.rhs_norm), raw))
}

/// `1 − exp(−β (log(|s|+ε) − log(|σ_sel|+ε))²)`: zero at the selected
/// magnitude and approaching one away from it.
pub fn filter_value(s: c64, sigma_sel: c64) -> f64 {
    let d = (s.norm() + FILTER_EPS).ln() - (sigma_sel.norm() + FILTER_EPS).ln();
    1.0 - (-FILTER_BETA * d * d).exp()
}

/// Greedy batch selection. The first pick is the largest residual among
/// eligible points; every later pick maximizes the residual damped by the
/// product of the filters of all earlier picks in this round.
pub fn select_points(
    report: &ResidualReport,
    training: &TrainingSet,
    count: usize,
    excluded: &[bool],
) -> Result<Vec<usize>> {
    let n = training.len();
    if report.column_norms.len() != n || excluded.len() != n {
        return Err(Error::dims("select_points", n, report.column_norms.len()));
    }
    if excluded.iter().all(|&e| e) {
        return Err(Error::Exhausted);
    }
    let mut work: Vec<f64> = (0..n)
        .map(|j| if excluded[j] { f64::NAN } else { report.column_norms[j] })
        .collect();
    let mut picks = Vec::with_capacity(count);
    while picks.len() < count {
        let Some(idx) = argmax(&work) else { break };
        picks.push(idx);
        work[idx] = f64::NAN;
        let chosen = training.point(idx);
        for (j, w) in work.iter_mut().enumerate() {
            if !w.is_nan() {
                *w *= filter_value(training.point(j), chosen);
            }
        }
    }
    Ok(picks)
}

/// One greedy iteration, emitted as a JSON line by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub side: Side,
    pub iteration: usize,
    /// Points whose solves entered the basis in this iteration.
    pub selected: Vec<FrequencyPoint>,
    pub n_p: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub wall_time_s: f64,
    pub linear_solves: usize,
}

#[derive(Clone, Debug)]
pub struct SamplingOptions {
    /// Stopping threshold on the relative mean residual `ε/‖rhs‖`.
    pub tol: f64,
    pub batch: usize,
    /// Maximum number of selected representatives; `None` means `N/4`.
    pub max_points: Option<usize>,
    /// Starting points; empty means the smallest-magnitude representative.
    pub initial_points: Vec<usize>,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            tol: 1e-3,
            batch: DEFAULT_BATCH,
            max_points: None,
            initial_points: Vec::new(),
        }
    }
}

/// Greedy active sampling of interpolation points until the relative mean
/// residual drops below `tol`, the point budget is used up or no eligible
/// point is left.
pub fn active_sample(problem: &SylvesterProblem<'_>, options: &SamplingOptions) -> Result<LowRankBasis> {
    if !(options.tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if options.batch == 0 {
        return Err(Error::InvalidArgument("batch must be at least 1".into()));
    }
    let training = problem.training;
    let n_pts = training.len();
    let max_points = options.max_points.unwrap_or((n_pts / 4).max(1)).max(1);
    let started = Instant::now();

    let mut basis = LowRankBasis::empty(problem);
    let mut excluded = vec![false; n_pts];

    let mut first: Vec<usize> = options.initial_points.iter().copied().filter(|&j| j < n_pts).collect();
    first.dedup();
    if first.is_empty() {
        first.extend(training.smallest_magnitude());
    }
    first.truncate(max_points);
    let mut added = add_points(problem, &mut basis, &mut excluded, &first)?;
    // A singular start point is skipped in favour of the next smallest one.
    while basis.rank() == 0 {
        let mut order: Vec<usize> = (0..n_pts).filter(|&j| !excluded[j]).collect();
        order.sort_by(|&a, &b| training.point(a).norm().total_cmp(&training.point(b).norm()));
        let Some(&next) = order.first() else {
            basis.exhausted = true;
            return Err(Error::Exhausted);
        };
        added = add_points(problem, &mut basis, &mut excluded, &[next])?;
    }

    let mut iteration = 0;
    loop {
        iteration += 1;
        let z = solve_projected(problem, &basis)?;
        let (report, _) = residual(problem, &basis, z.as_ref(), false)?;
        basis.z = z;
        basis.log.push(IterationRecord {
            side: problem.side,
            iteration,
            selected: added.iter().map(|&j| training.point(j).into()).collect(),
            n_p: basis.rank(),
            eps_abs: report.mean_error,
            eps_rel: report.relative_error,
            wall_time_s: started.elapsed().as_secs_f64(),
            linear_solves: basis.solve_count,
        });
        if report.relative_error <= options.tol {
            basis.converged = true;
            break;
        }
        let budget = max_points.saturating_sub(basis.selected_points.len());
        if budget == 0 {
            basis.budget_exceeded = true;
            basis.warnings.push(format!(
                "point budget of {max_points} reached with relative residual {:.3e} > {:.1e}",
                report.relative_error, options.tol
            ));
            break;
        }
        let picks = match select_points(&report, training, options.batch.min(budget), &excluded) {
            Ok(p) if !p.is_empty() => p,
            Ok(_) | Err(Error::Exhausted) => {
                basis.exhausted = true;
                basis.warnings.push("training set exhausted before reaching tol".into());
                break;
            }
            Err(e) => return Err(e),
        };
        added = add_points(problem, &mut basis, &mut excluded, &picks)?;
    }
    Ok(basis)
}

/// Large-scale solves at `points`, appended as real column pairs. Points
/// with a singular `K(σ)` are skipped and excluded from later rounds.
fn add_points(
    problem: &SylvesterProblem<'_>,
    basis: &mut LowRankBasis,
    excluded: &mut [bool],
    points: &[usize],
) -> Result<Vec<usize>> {
    let mut cols: Vec<Mat<f64>> = Vec::new();
    let mut added = Vec::new();
    for &j in points {
        if excluded[j] {
            continue;
        }
        excluded[j] = true;
        basis.solve_count += 1;
        match problem.large_solve(j) {
            Ok(v) => {
                cols.push(problem.real_columns(j, v.as_ref()));
                basis.selected_points.push(j);
                added.push(j);
            }
            Err(e @ Error::SingularK { .. }) => {
                basis.skipped_points.push(j);
                basis.warnings.push(format!("skipped training point {j}: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    if !cols.is_empty() {
        let n = problem.operators.n();
        let total: usize = cols.iter().map(|c| c.ncols()).sum();
        let mut all = Mat::<f64>::zeros(n, total);
        let mut at = 0;
        for c in &cols {
            all.as_mut().submatrix_mut(0, at, n, c.ncols()).copy_from(c);
            at += c.ncols();
        }
        basis.append(problem, all.as_ref())?;
    }
    Ok(added)
}

/// `[K(σ_1)⁻¹ rhs, …, K(σ_N)⁻¹ rhs]` by direct solves at every representative.
pub fn shifted_solves(problem: &SylvesterProblem<'_>) -> Result<Mat<c64>> {
    let n = problem.operators.n();
    let m = problem.block();
    let n_pts = problem.training.len();
    let mut v = Mat::<c64>::zeros(n, n_pts * m);
    for j in 0..n_pts {
        let col = problem.large_solve(j)?;
        v.as_mut().submatrix_mut(0, j * m, n, m).copy_from(&col);
    }
    Ok(v)
}

/// Exact `V` for small instances (`N ≤ 64`, `n ≤ 200`).
pub fn dense_oracle_solve(problem: &SylvesterProblem<'_>) -> Result<Mat<c64>> {
    let n = problem.operators.n();
    let n_pts = problem.training.len();
    if n_pts > 64 || n > 200 {
        return Err(Error::InvalidArgument(format!(
            "dense oracle is limited to N <= 64 and n <= 200 (got N = {n_pts}, n = {n})"
        )));
    }
    shifted_solves(problem)
}

/// `Σ A_i V F_i − rhs 1ᵀ` for a full (not low-rank) `V`.
pub fn sylvester_residual(problem: &SylvesterProblem<'_>, v: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let ops = problem.operators();
    let n = ops.n();
    let m = problem.block();
    let n_pts = problem.training.len();
    if v.nrows() != n || v.ncols() != n_pts * m {
        return Err(Error::dims("sylvester_residual", format!("{n}x{}", n_pts * m), format!("{}x{}", v.nrows(), v.ncols())));
    }
    let rhs = problem.rhs();
    let mut r = Mat::from_fn(n, n_pts * m, |i, c| c64::new(-rhs[(i, c % m)], 0.0));
    for (i, term) in ops.terms().iter().enumerate() {
        let scaled = Mat::from_fn(n, n_pts * m, |row, c| v[(row, c)] * problem.f_diag.at(i, c / m));
        let re = Mat::from_fn(n, n_pts * m, |row, c| scaled[(row, c)].re);
        let im = Mat::from_fn(n, n_pts * m, |row, c| scaled[(row, c)].im);
        let pr = term.matrix.mul_dense(re.as_ref());
        let pi = term.matrix.mul_dense(im.as_ref());
        for c in 0..n_pts * m {
            for row in 0..n {
                r[(row, c)] += c64::new(pr[(row, c)], pi[(row, c)]);
            }
        }
    }
    Ok(r)
}
