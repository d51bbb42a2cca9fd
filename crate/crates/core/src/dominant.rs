//! Dominant reachable/observable subspaces and the structure-preserving
//! Petrov-Galerkin projection built from them.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{self, SvdBundle};
use crate::sylvester::{shifted_solves, LowRankBasis, SylvesterProblem};
use crate::system::{StructuredSystem, Term};
use crate::training::TrainingSet;

/// Singular values below this fraction of the largest are treated as zero
/// when capping the order.
pub const RANK_TOL: f64 = 1e-13;

/// Name of the truncation rule, printed by the CLI.
pub const ORDER_RULE: &str = "relative tail energy";

/// One side of the projection: the full real basis, or a low-rank
/// factorization `S · Zr`.
#[derive(Clone, Debug)]
pub enum SideData {
    Dense(Mat<f64>),
    LowRank(LowRankFactors),
}

/// `V ≈ S Zr` where `Zr` is the real representation (Re/Im column pairs)
/// of the coefficient matrix.
#[derive(Clone, Debug)]
pub struct LowRankFactors {
    pub s: Mat<f64>,
    pub zr: Mat<f64>,
}

impl LowRankFactors {
    pub fn from_basis(basis: &LowRankBasis, training: &TrainingSet) -> Self {
        let m = if training.is_empty() { 0 } else { basis.z.ncols() / training.len() };
        LowRankFactors {
            s: basis.s.clone(),
            zr: linalg::split_real_imag(basis.z.as_ref(), &real_flags(training, m)),
        }
    }

    pub fn expand(&self) -> Mat<f64> {
        &self.s * &self.zr
    }
}

fn real_flags(training: &TrainingSet, m: usize) -> Vec<bool> {
    (0..training.len())
        .flat_map(|j| std::iter::repeat_n(training.is_real(j), m))
        .collect()
}

impl SideData {
    pub fn dense(&self) -> Mat<f64> {
        match self {
            SideData::Dense(v) => v.clone(),
            SideData::LowRank(f) => f.expand(),
        }
    }

    pub fn nrows(&self) -> usize {
        match self {
            SideData::Dense(v) => v.nrows(),
            SideData::LowRank(f) => f.s.nrows(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum WSide {
    Data(SideData),
    /// One-sided projection: every formula uses `W := V`.
    GalerkinSameAsV,
}

#[derive(Clone, Debug)]
pub struct SubspacePair {
    pub v: SideData,
    pub w: WSide,
}

impl SubspacePair {
    pub fn is_galerkin(&self) -> bool {
        matches!(self.w, WSide::GalerkinSameAsV)
    }

    fn w_data(&self) -> &SideData {
        match &self.w {
            WSide::Data(d) => d,
            WSide::GalerkinSameAsV => &self.v,
        }
    }
}

/// A reduced model together with the projection that produced it.
#[derive(Clone, Debug)]
pub struct RomRealization {
    /// Terms `(W_pᵀ A_i V_p, f_i)`, `B̂ = W_pᵀ B`, `Ĉ = C V_p`.
    pub system: StructuredSystem,
    /// Orthonormal `n×r` projection matrices.
    pub v_p: Mat<f64>,
    pub w_p: Mat<f64>,
    pub order: usize,
    /// Singular values of the horizontal (`W`-side) and vertical
    /// (`V`-side) concatenations.
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
}

/// Real basis of the shifted solves at every training representative:
/// `V` from `K(σ)⁻¹B`, and `W` from `K(σ)⁻ᵀCᵀ` unless `galerkin`.
pub fn build_bases_direct(sys: &StructuredSystem, training: &TrainingSet, galerkin: bool) -> Result<SubspacePair> {
    let v = dense_side(&SylvesterProblem::reachability(sys, training)?)?;
    let w = if galerkin {
        WSide::GalerkinSameAsV
    } else {
        WSide::Data(dense_side(&SylvesterProblem::observability(sys, training)?)?)
    };
    Ok(SubspacePair { v, w })
}

fn dense_side(problem: &SylvesterProblem<'_>) -> Result<SideData> {
    let v = shifted_solves(problem)?;
    let flags = real_flags(problem.training(), problem.block());
    Ok(SideData::Dense(linalg::split_real_imag(v.as_ref(), &flags)))
}

fn hcat(blocks: &[Mat<f64>]) -> Mat<f64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.as_mut().submatrix_mut(0, at, rows, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    out
}

fn vcat(blocks: &[Mat<f64>]) -> Mat<f64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.as_mut().submatrix_mut(at, 0, b.nrows(), cols).copy_from(b);
        at += b.nrows();
    }
    out
}

/// SVDs of `[WᵀA_1V, …, WᵀA_lV]` (left factor `W_1`, values `Σ_1`) and
/// of the vertical stack of the same blocks (right factor `V_2`, `Σ_2`).
pub fn dominant_svd_direct(sys: &StructuredSystem, pair: &SubspacePair) -> Result<(SvdBundle, SvdBundle)> {
    let v = pair.v.dense();
    let w = pair.w_data().dense();
    if v.nrows() != sys.n() || w.nrows() != sys.n() {
        return Err(Error::dims("dominant_svd_direct", sys.n(), v.nrows().max(w.nrows())));
    }
    let wt = w.transpose();
    let blocks: Vec<Mat<f64>> = sys.terms().iter().map(|t| wt * t.matrix.mul_dense(v.as_ref())).collect();
    svd_pair(&blocks)
}

fn svd_pair(blocks: &[Mat<f64>]) -> Result<(SvdBundle, SvdBundle)> {
    let row_side = linalg::svd(hcat(blocks).as_ref())?;
    let col_side = linalg::svd(vcat(blocks).as_ref())?;
    Ok((row_side, col_side))
}

/// Smallest `r` whose discarded tail `Σ_{j>r} λ_j / Σ_j λ_j` is below `tol`.
pub fn tail_order(sv: &[f64], tol: f64) -> usize {
    let total: f64 = sv.iter().sum();
    if !(total > 0.0) {
        return 0;
    }
    let mut tail = total;
    for (r, &s) in sv.iter().enumerate() {
        if tail / total < tol {
            return r;
        }
        tail -= s;
    }
    sv.len()
}

/// Count of singular values above `RANK_TOL` relative to the largest.
pub fn numerical_rank(sv: &[f64]) -> usize {
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

/// `r = min(r_1, r_2)` by the tail rule, or `fixed` when given; either way
/// capped at the numerical rank of both traces.
pub fn choose_order(sigma1: &[f64], sigma2: &[f64], tol: f64, fixed: Option<usize>) -> usize {
    let cap = numerical_rank(sigma1).min(numerical_rank(sigma2));
    let r = fixed.unwrap_or_else(|| tail_order(sigma1, tol).min(tail_order(sigma2, tol)));
    r.min(cap)
}

fn leading_cols(m: &Mat<f64>, r: usize) -> MatRef<'_, f64> {
    m.as_ref().submatrix(0, 0, m.nrows(), r)
}

/// `V_p = V V_2(:, 1:r)`, `W_p = W W_1(:, 1:r)` (or `W_p = V_p` in Galerkin
/// mode) followed by the projection of every term.
pub fn project(
    sys: &StructuredSystem,
    pair: &SubspacePair,
    w1: &SvdBundle,
    v2: &SvdBundle,
    r: usize,
) -> Result<RomRealization> {
    let v = pair.v.dense();
    if r > v2.v.ncols() || (!pair.is_galerkin() && r > w1.u.ncols()) {
        return Err(Error::dims("project order", v2.v.ncols().min(w1.u.ncols()), r));
    }
    if v.ncols() != v2.v.nrows() {
        return Err(Error::dims("project V", v2.v.nrows(), v.ncols()));
    }
    let v_p = &v * leading_cols(&v2.v, r);
    let w_p = match &pair.w {
        WSide::GalerkinSameAsV => None,
        WSide::Data(d) => {
            let w = d.dense();
            if w.ncols() != w1.u.nrows() {
                return Err(Error::dims("project W", w1.u.nrows(), w.ncols()));
            }
            Some(&w * leading_cols(&w1.u, r))
        }
    };
    realize(sys, v_p.as_ref(), w_p.as_ref().map(|w| w.as_ref()), w1.s.clone(), v2.s.clone())
}

/// Projection matrices before orthonormalization, with the singular value
/// traces they were truncated from.
#[derive(Clone, Debug)]
pub struct ProjectionBases {
    pub v_p: Mat<f64>,
    /// `None` in Galerkin mode.
    pub w_p: Option<Mat<f64>>,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl ProjectionBases {
    pub fn order(&self) -> usize {
        self.v_p.ncols()
    }

    pub fn realize(self, sys: &StructuredSystem) -> Result<RomRealization> {
        realize(sys, self.v_p.as_ref(), self.w_p.as_ref().map(|w| w.as_ref()), self.sigma1, self.sigma2)
    }
}

/// Low-rank version of the SVD step and projection matrices: only the
/// small factors enter the SVDs, whose sizes depend on the basis ranks and
/// not on `n` or the number of training points. `w = None` is the Galerkin
/// case `S_w = S_v`, `Y = Z`.
pub fn dominant_svd_lowrank(
    sys: &StructuredSystem,
    v: &LowRankFactors,
    w: Option<&LowRankFactors>,
    tol: f64,
    fixed: Option<usize>,
) -> Result<ProjectionBases> {
    let n = sys.n();
    if v.s.nrows() != n || w.is_some_and(|w| w.s.nrows() != n) {
        return Err(Error::dims("dominant_svd_lowrank", n, v.s.nrows()));
    }
    let (uz, sz) = scaled_left(&v.zr)?;
    let (uy, sy) = match w {
        Some(w) => scaled_left(&w.zr)?,
        None => (uz.clone(), sz.clone()),
    };
    let s_w = w.map_or(&v.s, |w| &w.s);
    // Left and right factors of the small blocks: Σ_y U_yᵀ S_wᵀ and S_v U_z Σ_z.
    let left = scale_cols(&(s_w * &uy), &sy).transpose().to_owned();
    let right = scale_cols(&(&v.s * &uz), &sz);
    let blocks: Vec<Mat<f64>> = sys
        .terms()
        .iter()
        .map(|t| &left * t.matrix.mul_dense(right.as_ref()))
        .collect();
    let (row_side, col_side) = svd_pair(&blocks)?;
    let r = choose_order(&row_side.s, &col_side.s, tol, fixed);
    let v_p = &right * leading_cols(&col_side.v, r);
    let w_p = w.map(|_| left.transpose() * leading_cols(&row_side.u, r));
    Ok(ProjectionBases {
        v_p,
        w_p,
        sigma1: row_side.s,
        sigma2: col_side.s,
    })
}

/// `(U, Σ)` of a thin SVD, dropping exactly zero singular directions.
fn scaled_left(m: &Mat<f64>) -> Result<(Mat<f64>, Vec<f64>)> {
    let svd = linalg::svd(m.as_ref())?;
    let k = svd.s.iter().filter(|&&s| s > 0.0).count();
    Ok((leading_cols(&svd.u, k).to_owned(), svd.s[..k].to_vec()))
}

fn scale_cols(m: &Mat<f64>, d: &[f64]) -> Mat<f64> {
    Mat::from_fn(m.nrows(), d.len(), |i, j| m[(i, j)] * d[j])
}

/// Thin QR factor: same range, orthonormal columns.
fn orthonormal_factor(m: MatRef<'_, f64>) -> Mat<f64> {
    if m.ncols() == 0 {
        return Mat::zeros(m.nrows(), 0);
    }
    m.qr().compute_thin_Q()
}

/// Projects every term onto `(V_p, W_p)`; `w_p = None` means `W_p = V_p`.
/// Both are orthonormalized first, which leaves the reduced transfer
/// function unchanged.
pub fn realize(
    sys: &StructuredSystem,
    v_p: MatRef<'_, f64>,
    w_p: Option<MatRef<'_, f64>>,
    sigma1: Vec<f64>,
    sigma2: Vec<f64>,
) -> Result<RomRealization> {
    if v_p.nrows() != sys.n() {
        return Err(Error::dims("realize V_p", sys.n(), v_p.nrows()));
    }
    let r = v_p.ncols();
    let v_p = orthonormal_factor(v_p);
    let w_p = match w_p {
        Some(w) => {
            if w.nrows() != sys.n() || w.ncols() != r {
                return Err(Error::dims("realize W_p", format!("{}x{r}", sys.n()), format!("{}x{}", w.nrows(), w.ncols())));
            }
            orthonormal_factor(w)
        }
        None => v_p.clone(),
    };
    let wt = w_p.transpose();
    let terms = sys
        .terms()
        .iter()
        .map(|t| Term::new(wt * t.matrix.mul_dense(v_p.as_ref()), t.function.clone()))
        .collect();
    let b = wt * sys.b();
    let c = sys.c() * &v_p;
    let system = StructuredSystem::new(terms, b, c)?;
    Ok(RomRealization {
        system,
        v_p,
        w_p,
        order: r,
        sigma1,
        sigma2,
    })
}

/// DROP on the full training set: direct solves at every point, the two
/// SVDs, order selection and projection.
pub fn drop_reduce(
    sys: &StructuredSystem,
    training: &TrainingSet,
    galerkin: bool,
    tol: f64,
    fixed: Option<usize>,
) -> Result<RomRealization> {
    let pair = build_bases_direct(sys, training, galerkin)?;
    let (row_side, col_side) = dominant_svd_direct(sys, &pair)?;
    let r = choose_order(&row_side.s, &col_side.s, tol, fixed);
    project(sys, &pair, &row_side, &col_side, r)
}

/// Pointwise relative error `σ_max(Ĥ(s) − H(s)) / max_grid σ_max(H)`.
#[derive(Clone, Debug)]
pub struct ErrorProfile {
    pub points: Vec<c64>,
    pub errors: Vec<f64>,
    /// `max_grid σ_max(H)`
    pub h_max: f64,
    pub max_error: f64,
}

pub fn rom_error_metric(fom: &StructuredSystem, rom: &StructuredSystem, grid: &TrainingSet) -> Result<ErrorProfile> {
    if fom.m() != rom.m() || fom.p() != rom.p() {
        return Err(Error::dims("rom_error_metric", format!("{}x{}", fom.p(), fom.m()), format!("{}x{}", rom.p(), rom.m())));
    }
    let mut diffs = Vec::with_capacity(grid.len());
    let mut h_max = 0.0f64;
    for &s in grid.points() {
        let h = fom.eval_transfer(s)?;
        let hr = rom.eval_transfer(s)?;
        h_max = h_max.max(largest_sv(h.as_ref())?);
        diffs.push(largest_sv((&hr - &h).as_ref())?);
    }
    let scale = if h_max > 0.0 { h_max } else { 1.0 };
    let errors: Vec<f64> = diffs.into_iter().map(|d| d / scale).collect();
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(ErrorProfile {
        points: grid.points().to_vec(),
        errors,
        h_max,
        max_error,
    })
}

fn largest_sv(m: MatRef<'_, c64>) -> Result<f64> {
    Ok(linalg::singular_values_c(m)?.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::ScalarFunction;
    use crate::matrix::SysMatrix;
    use crate::sylvester::{active_sample, SamplingOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lti(n: usize, m: usize, p: usize, seed: u64) -> StructuredSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Mat::from_fn(n, n, |i, j| {
            let v: f64 = rng.random_range(-1.0..1.0);
            if i == j {
                v - 1.0 - i as f64
            } else {
                0.2 * v
            }
        });
        let b = Mat::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        let c = Mat::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
        StructuredSystem::new(
            vec![
                Term::new(SysMatrix::identity(n), ScalarFunction::power(1)),
                Term::new(SysMatrix::Dense(a), ScalarFunction::constant(-1.0)),
            ],
            b,
            c,
        )
        .unwrap()
    }

    #[test]
    fn tail_rule_examples() {
        assert_eq!(tail_order(&[1.0, 1e-12], 1e-8), 1);
        assert_eq!(tail_order(&[1.0; 10], 1e-8), 10);
        assert_eq!(tail_order(&[], 1e-8), 0);
        assert_eq!(choose_order(&[1.0; 10], &[1.0; 4], 1e-8, None), 4);
        assert_eq!(choose_order(&[1.0; 10], &[1.0; 10], 1e-8, Some(3)), 3);
        // overrides are capped at the numerical rank
        assert_eq!(choose_order(&[1.0, 1.0, 1e-16], &[1.0; 3], 1e-8, Some(3)), 2);
    }

    #[test]
    fn orthonormal_identity_case() {
        let n = 5;
        let sys = StructuredSystem::new(
            vec![Term::new(SysMatrix::identity(n), ScalarFunction::constant(1.0))],
            Mat::from_fn(n, 1, |_, _| 1.0),
            Mat::from_fn(1, n, |_, _| 1.0),
        )
        .unwrap();
        let q = Mat::<f64>::identity(n, n);
        let pair = SubspacePair {
            v: SideData::Dense(q.clone()),
            w: WSide::Data(SideData::Dense(q)),
        };
        let (a, b) = dominant_svd_direct(&sys, &pair).unwrap();
        assert!(a.s.iter().chain(&b.s).all(|&s| (s - 1.0).abs() < 1e-14));
    }

    #[test]
    fn duplicated_point_adds_no_rank() {
        let sys = random_lti(12, 1, 1, 1);
        let ts = TrainingSet::conjugate_closure(&[c64::new(0.0, 1.0), c64::new(0.0, 3.0)]);
        let mut pair = build_bases_direct(&sys, &ts, false).unwrap();
        if let SideData::Dense(v) = &mut pair.v {
            *v = hcat(&[v.clone(), v.clone()]);
        }
        let (row_side, col_side) = dominant_svd_direct(&sys, &pair).unwrap();
        assert_eq!(col_side.s.len(), 8);
        assert!(col_side.s[4..].iter().all(|&s| s <= 1e-12 * col_side.s[0]));
        assert_eq!(numerical_rank(&row_side.s), 4);
    }

    #[test]
    fn full_order_projection_is_exact() {
        let sys = random_lti(6, 1, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = linalg::orthonormalize(Mat::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0)).as_ref());
        let rom = realize(&sys, q.as_ref(), Some(q.as_ref()), vec![], vec![]).unwrap();
        let grid = TrainingSet::log_imaginary(0.01, 100.0, 20).unwrap();
        let err = rom_error_metric(&sys, &rom.system, &grid).unwrap();
        assert!(err.max_error < 1e-12);
    }

    #[test]
    fn untruncated_drop_interpolates_with_derivative() {
        let sys = random_lti(20, 1, 1, 4);
        let pts = [c64::new(0.0, 0.5), c64::new(0.0, 4.0)];
        let ts = TrainingSet::conjugate_closure(&pts);
        let rom = drop_reduce(&sys, &ts, false, 1e-300, None).unwrap();
        assert_eq!(rom.order, 4);
        let h = 1e-5;
        for &s in &pts {
            let full = sys.eval_transfer(s).unwrap()[(0, 0)];
            let red = rom.system.eval_transfer(s).unwrap()[(0, 0)];
            assert!((full - red).norm() <= 1e-10 * full.norm());
            let d = |sys: &StructuredSystem| {
                let up = sys.eval_transfer(s + c64::new(0.0, h)).unwrap()[(0, 0)];
                let dn = sys.eval_transfer(s - c64::new(0.0, h)).unwrap()[(0, 0)];
                (up - dn) / c64::new(0.0, 2.0 * h)
            };
            let (df, dr) = (d(&sys), d(&rom.system));
            assert!((df - dr).norm() <= 1e-6 * df.norm());
        }
    }

    #[test]
    fn lowrank_path_matches_direct_path() {
        let sys = random_lti(40, 1, 1, 5);
        let ts = TrainingSet::log_imaginary(0.1, 100.0, 30).unwrap();
        let pv = SylvesterProblem::reachability(&sys, &ts).unwrap();
        let pw = SylvesterProblem::observability(&sys, &ts).unwrap();
        let opts = SamplingOptions {
            tol: 1e-4,
            max_points: Some(30),
            ..Default::default()
        };
        let bv = active_sample(&pv, &opts).unwrap();
        let bw = active_sample(&pw, &opts).unwrap();
        let fv = LowRankFactors::from_basis(&bv, &ts);
        let fw = LowRankFactors::from_basis(&bw, &ts);

        let low = dominant_svd_lowrank(&sys, &fv, Some(&fw), 1e-8, Some(4)).unwrap().realize(&sys).unwrap();
        let pair = SubspacePair {
            v: SideData::LowRank(fv),
            w: WSide::Data(SideData::LowRank(fw)),
        };
        let (a, b) = dominant_svd_direct(&sys, &pair).unwrap();
        let direct = project(&sys, &pair, &a, &b, 4).unwrap();
        assert!(linalg::max_principal_angle(low.v_p.as_ref(), direct.v_p.as_ref()).unwrap() < 1e-8);
        assert!(linalg::max_principal_angle(low.w_p.as_ref(), direct.w_p.as_ref()).unwrap() < 1e-8);
        for (x, y) in low.sigma1.iter().zip(&a.s) {
            assert!((x - y).abs() <= 1e-10 * a.s[0]);
        }
    }

    #[test]
    fn galerkin_keeps_symmetry() {
        let n = 15;
        let m_diag: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
        let mut k = Vec::new();
        for i in 0..n {
            k.push((i, i, 2.0));
            if i + 1 < n {
                k.push((i, i + 1, -1.0));
                k.push((i + 1, i, -1.0));
            }
        }
        let kmat = SysMatrix::from_triplets(n, n, &k).unwrap();
        let sys = StructuredSystem::new(
            vec![
                Term::new(SysMatrix::diagonal(&m_diag), ScalarFunction::power(2)),
                Term::new(kmat, ScalarFunction::constant(1.0)),
            ],
            Mat::from_fn(n, 1, |i, _| if i == 0 { 1.0 } else { 0.0 }),
            Mat::from_fn(1, n, |_, j| if j == n - 1 { 1.0 } else { 0.0 }),
        )
        .unwrap();
        let ts = TrainingSet::log_imaginary(0.01, 1.0, 6).unwrap();
        let rom = drop_reduce(&sys, &ts, true, 1e-8, Some(5)).unwrap();
        assert_eq!(rom.v_p, rom.w_p);
        for t in rom.system.terms() {
            let a = t.matrix.to_dense();
            let asym = linalg::frobenius((&a - a.transpose()).as_ref());
            assert!(asym <= 1e-10 * linalg::frobenius(a.as_ref()));
        }
        assert_eq!(rom.system.functions(), sys.functions());
    }

    #[test]
    fn siso_metric_is_a_modulus_ratio() {
        let sys = random_lti(8, 1, 1, 6);
        let ts = TrainingSet::conjugate_closure(&[c64::new(0.0, 1.0)]);
        let rom = drop_reduce(&sys, &ts, false, 1e-8, Some(1)).unwrap();
        let grid = TrainingSet::log_imaginary(0.1, 10.0, 7).unwrap();
        let prof = rom_error_metric(&sys, &rom.system, &grid).unwrap();
        let hmax = grid
            .points()
            .iter()
            .map(|&s| sys.eval_transfer(s).unwrap()[(0, 0)].norm())
            .fold(0.0, f64::max);
        for (j, &s) in grid.points().iter().enumerate() {
            let d = (rom.system.eval_transfer(s).unwrap()[(0, 0)] - sys.eval_transfer(s).unwrap()[(0, 0)]).norm();
            assert!((prof.errors[j] - d / hmax).abs() < 1e-14);
        }
    }
}
