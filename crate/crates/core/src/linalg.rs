//! Numerical kernels: complex factorizations, incremental orthonormal bases,
//! thin SVDs and principal angles.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::SparseColMat;
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

/// Columns whose norm shrinks below this fraction during projection are
/// treated as numerically dependent.
pub const DEFLATION_TOL: f64 = 1e-10;

// Backward-error bound above which a sparse solve is reported as singular.
const SPARSE_BACKWARD_TOL: f64 = 1e-8;

/// A reusable factorization of a complex square matrix.
pub struct SolveHandle {
    factor: Factor,
    s: Option<c64>,
}

enum Factor {
    Dense(PartialPivLu<c64>),
    Sparse {
        lu: Lu<usize, c64>,
        matrix: SparseColMat<usize, c64>,
        norm_inf: f64,
    },
}

/// Dense LU with partial pivoting.
pub fn factorize(k: MatRef<'_, c64>) -> Result<SolveHandle> {
    factorize_at(k, None)
}

pub(crate) fn factorize_at(k: MatRef<'_, c64>, s: Option<c64>) -> Result<SolveHandle> {
    if k.nrows() != k.ncols() {
        return Err(Error::dims("factorize", "square matrix", format!("{}x{}", k.nrows(), k.ncols())));
    }
    let n = k.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factorize an empty matrix".into()));
    }
    if !all_finite_c(k) {
        return Err(Error::SingularK { s });
    }
    let lu = k.partial_piv_lu();
    let u = lu.U();
    let mut max_pivot = 0.0f64;
    let mut min_pivot = f64::INFINITY;
    for i in 0..n {
        let p = u[(i, i)].norm();
        max_pivot = max_pivot.max(p);
        min_pivot = min_pivot.min(p);
    }
    if !(min_pivot > (n as f64) * f64::EPSILON * max_pivot) {
        return Err(Error::SingularK { s });
    }
    Ok(SolveHandle {
        factor: Factor::Dense(lu),
        s,
    })
}

/// Sparse LU, optionally reusing a symbolic analysis of the same pattern.
pub fn factorize_sparse(
    k: SparseColMat<usize, c64>,
    symbolic: Option<&SymbolicLu<usize>>,
    s: Option<c64>,
) -> Result<SolveHandle> {
    if k.nrows() != k.ncols() {
        return Err(Error::dims("factorize", "square matrix", format!("{}x{}", k.nrows(), k.ncols())));
    }
    let symbolic = match symbolic {
        Some(sym) => sym.clone(),
        None => SymbolicLu::try_new(k.symbolic()).map_err(|_| Error::SingularK { s })?,
    };
    let lu = Lu::try_new_with_symbolic(symbolic, k.as_ref()).map_err(|_| Error::SingularK { s })?;
    let mut row_sums = vec![0.0f64; k.nrows()];
    for t in k.as_ref().triplet_iter() {
        row_sums[t.row] += t.val.norm();
    }
    let norm_inf = row_sums.into_iter().fold(0.0, f64::max);
    Ok(SolveHandle {
        factor: Factor::Sparse {
            lu,
            matrix: k,
            norm_inf,
        },
        s,
    })
}

/// Symbolic analysis for a sparsity pattern, shared across shifts.
pub fn analyze_pattern(k: &SparseColMat<usize, c64>) -> Result<SymbolicLu<usize>> {
    SymbolicLu::try_new(k.symbolic()).map_err(|_| Error::SingularK { s: None })
}

impl SolveHandle {
    pub fn dim(&self) -> usize {
        match &self.factor {
            Factor::Dense(lu) => lu.L().nrows(),
            Factor::Sparse { matrix, .. } => matrix.nrows(),
        }
    }

    /// Solves `K x = b`.
    pub fn solve(&self, b: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.solve_impl(b, false)
    }

    /// Solves `Kᵀ x = b`.
    pub fn solve_transpose(&self, b: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.solve_impl(b, true)
    }

    fn solve_impl(&self, b: MatRef<'_, c64>, transpose: bool) -> Result<Mat<c64>> {
        if b.nrows() != self.dim() {
            return Err(Error::dims("solve", self.dim(), b.nrows()));
        }
        let mut x = b.to_owned();
        match &self.factor {
            Factor::Dense(lu) => {
                if transpose {
                    lu.solve_transpose_in_place(x.as_mut());
                } else {
                    lu.solve_in_place(x.as_mut());
                }
            }
            Factor::Sparse { lu, .. } => {
                if transpose {
                    lu.solve_transpose_in_place(x.as_mut());
                } else {
                    lu.solve_in_place(x.as_mut());
                }
            }
        }
        if !all_finite_c(x.as_ref()) {
            return Err(Error::SingularK { s: self.s });
        }
        if let Factor::Sparse {
            matrix, norm_inf, ..
        } = &self.factor
        {
            // Sparse LU does not report tiny pivots, so check the backward error.
            let kx = if transpose {
                sparse_c_mul(&transposed(matrix), x.as_ref())
            } else {
                sparse_c_mul(matrix, x.as_ref())
            };
            for j in 0..x.ncols() {
                let mut r = 0.0f64;
                let mut xn = 0.0f64;
                let mut bn = 0.0f64;
                for i in 0..x.nrows() {
                    r = r.max((kx[(i, j)] - b[(i, j)]).norm());
                    xn = xn.max(x[(i, j)].norm());
                    bn = bn.max(b[(i, j)].norm());
                }
                if r > SPARSE_BACKWARD_TOL * (norm_inf * xn + bn) {
                    return Err(Error::SingularK { s: self.s });
                }
            }
        }
        Ok(x)
    }
}

fn transposed(m: &SparseColMat<usize, c64>) -> SparseColMat<usize, c64> {
    let t: Vec<_> = m
        .as_ref()
        .triplet_iter()
        .map(|t| faer::sparse::Triplet::new(t.col, t.row, *t.val))
        .collect();
    SparseColMat::try_new_from_triplets(m.ncols(), m.nrows(), &t).expect("transposed pattern is valid")
}

fn sparse_c_mul(m: &SparseColMat<usize, c64>, x: MatRef<'_, c64>) -> Mat<c64> {
    let mut out = Mat::zeros(m.nrows(), x.ncols());
    faer::sparse::linalg::matmul::sparse_dense_matmul(
        out.as_mut(),
        faer::Accum::Replace,
        m.as_ref(),
        x,
        c64::new(1.0, 0.0),
        faer::Par::Seq,
    );
    out
}

fn all_finite_c(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

/// Result of growing an orthonormal basis.
#[derive(Clone, Debug)]
pub struct OrthAppend {
    /// `[S_old, appended]`
    pub basis: Mat<f64>,
    /// The new orthonormal columns only.
    pub appended: Mat<f64>,
    /// Number of candidate columns dropped as dependent.
    pub deflated: usize,
}

/// Extends an orthonormal basis by the range of `new_cols` using classical
/// Gram-Schmidt with one full reorthogonalization pass.
pub fn orth_append(s_old: MatRef<'_, f64>, new_cols: MatRef<'_, f64>) -> Result<OrthAppend> {
    let n = if s_old.ncols() > 0 { s_old.nrows() } else { new_cols.nrows() };
    if s_old.ncols() > 0 && new_cols.ncols() > 0 && s_old.nrows() != new_cols.nrows() {
        return Err(Error::dims("orth_append", s_old.nrows(), new_cols.nrows()));
    }
    let mut accepted: Vec<Vec<f64>> = Vec::new();
    let mut deflated = 0;
    for c in 0..new_cols.ncols() {
        let mut v: Vec<f64> = (0..n).map(|i| new_cols[(i, c)]).collect();
        let pre = norm2(&v);
        if !(pre > 0.0) || !pre.is_finite() {
            deflated += 1;
            continue;
        }
        for _ in 0..2 {
            if s_old.ncols() > 0 {
                let vm = MatRef::from_column_major_slice(&v, n, 1);
                let h = s_old.transpose() * vm;
                let proj = s_old * &h;
                for i in 0..n {
                    v[i] -= proj[(i, 0)];
                }
            }
            for q in &accepted {
                let h = dot(q, &v);
                for i in 0..n {
                    v[i] -= h * q[i];
                }
            }
        }
        let post = norm2(&v);
        if post < DEFLATION_TOL * pre {
            deflated += 1;
            continue;
        }
        for x in &mut v {
            *x /= post;
        }
        accepted.push(v);
    }
    let k = s_old.ncols();
    let appended = Mat::from_fn(n, accepted.len(), |i, j| accepted[j][i]);
    let basis = Mat::from_fn(n, k + accepted.len(), |i, j| {
        if j < k {
            s_old[(i, j)]
        } else {
            accepted[j - k][i]
        }
    });
    Ok(OrthAppend {
        basis,
        appended,
        deflated,
    })
}

/// Orthonormal basis for the range of `m` (dependent columns dropped).
pub fn orthonormalize(m: MatRef<'_, f64>) -> Mat<f64> {
    let empty = Mat::<f64>::zeros(m.nrows(), 0);
    orth_append(empty.as_ref(), m).expect("row counts agree").basis
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Thin singular value decomposition `M = U diag(S) Vᵀ`.
#[derive(Clone, Debug)]
pub struct SvdBundle {
    pub u: Mat<f64>,
    /// Nonincreasing.
    pub s: Vec<f64>,
    /// Right singular vectors as columns (the rows of `Vᵀ`).
    pub v: Mat<f64>,
}

impl SvdBundle {
    pub fn vt(&self) -> Mat<f64> {
        self.v.transpose().to_owned()
    }

    pub fn reconstruct(&self) -> Mat<f64> {
        let us = Mat::from_fn(self.u.nrows(), self.s.len(), |i, j| self.u[(i, j)] * self.s[j]);
        &us * self.v.transpose()
    }
}

pub fn svd(m: MatRef<'_, f64>) -> Result<SvdBundle> {
    if m.nrows() == 0 || m.ncols() == 0 {
        let k = 0;
        return Ok(SvdBundle {
            u: Mat::zeros(m.nrows(), k),
            s: Vec::new(),
            v: Mat::zeros(m.ncols(), k),
        });
    }
    if !(0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite())) {
        return Err(Error::ConvergenceFailure);
    }
    let dec = m.thin_svd().map_err(|_| Error::ConvergenceFailure)?;
    let k = m.nrows().min(m.ncols());
    let diag = dec.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| diag[b].partial_cmp(&diag[a]).unwrap_or(std::cmp::Ordering::Equal));
    let u = dec.U();
    let v = dec.V();
    Ok(SvdBundle {
        u: Mat::from_fn(m.nrows(), k, |i, j| u[(i, order[j])]),
        s: order.iter().map(|&j| diag[j].max(0.0)).collect(),
        v: Mat::from_fn(m.ncols(), k, |i, j| v[(i, order[j])]),
    })
}

/// Singular values of a complex matrix, nonincreasing.
pub fn singular_values_c(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        let mut acc = 0.0f64;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                acc += m[(i, j)].norm_sqr();
            }
        }
        return Ok(vec![acc.sqrt()]);
    }
    let mut s = m.singular_values().map_err(|_| Error::ConvergenceFailure)?;
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// Principal angles (ascending, in `[0, π/2]`) between the ranges of two
/// matrices with orthonormal columns. Returns `min(cols)` angles.
///
/// Small angles come from the sines of the projection residual, large ones
/// from the cosines, so both ends are resolved to working precision.
pub fn principal_angles(x: MatRef<'_, f64>, y: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if x.nrows() != y.nrows() {
        return Err(Error::dims("principal_angles", x.nrows(), y.nrows()));
    }
    let (small, large) = if x.ncols() <= y.ncols() { (x, y) } else { (y, x) };
    let k = small.ncols();
    if k == 0 {
        return Ok(Vec::new());
    }
    let coupling = large.transpose() * small;
    let cos = svd(coupling.as_ref())?.s;
    let residual = small - large * &coupling;
    let mut sin = svd(residual.as_ref())?.s;
    sin.reverse();
    let angles = (0..k)
        .map(|i| {
            let s = sin.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            if s < std::f64::consts::FRAC_1_SQRT_2 {
                s.asin()
            } else {
                cos.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0).acos()
            }
        })
        .collect();
    Ok(angles)
}

/// Largest principal angle, or zero for empty inputs.
pub fn max_principal_angle(x: MatRef<'_, f64>, y: MatRef<'_, f64>) -> Result<f64> {
    Ok(principal_angles(x, y)?.into_iter().fold(0.0, f64::max))
}

/// `[Re v_1, Im v_1, Re v_2, Im v_2, ...]`, skipping imaginary parts of the
/// columns flagged as real.
pub fn split_real_imag(v: MatRef<'_, c64>, real_columns: &[bool]) -> Mat<f64> {
    assert_eq!(real_columns.len(), v.ncols());
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..v.ncols() {
        cols.push((0..v.nrows()).map(|i| v[(i, j)].re).collect());
        if !real_columns[j] {
            cols.push((0..v.nrows()).map(|i| v[(i, j)].im).collect());
        }
    }
    Mat::from_fn(v.nrows(), cols.len(), |i, j| cols[j][i])
}

pub fn to_complex(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// `real · complex` without promoting the real factor.
pub fn real_times_complex(a: MatRef<'_, f64>, z: MatRef<'_, c64>) -> Mat<c64> {
    let re = Mat::from_fn(z.nrows(), z.ncols(), |i, j| z[(i, j)].re);
    let im = Mat::from_fn(z.nrows(), z.ncols(), |i, j| z[(i, j)].im);
    let pr = a * &re;
    let pi = a * &im;
    Mat::from_fn(a.nrows(), z.ncols(), |i, j| c64::new(pr[(i, j)], pi[(i, j)]))
}

pub fn frobenius(m: MatRef<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)] * m[(i, j)];
        }
    }
    f64::sqrt(acc)
}

pub fn frobenius_c(m: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    f64::sqrt(acc)
}

/// `‖QᵀQ − I‖_F`
pub fn orthonormality_defect(q: MatRef<'_, f64>) -> f64 {
    let g = q.transpose() * q;
    let d = Mat::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] - if i == j { 1.0 } else { 0.0 });
    frobenius(d.as_ref())
}

/// Cholesky test for symmetric positive definiteness.
pub fn is_positive_definite(m: MatRef<'_, f64>) -> bool {
    m.nrows() == m.ncols() && m.nrows() > 0 && m.llt(faer::Side::Lower).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_real(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat<f64> {
        Mat::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn cplx(m: &Mat<f64>) -> Mat<c64> {
        to_complex(m.as_ref())
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let k = cplx(&Mat::<f64>::identity(4, 4));
        let h = factorize(k.as_ref()).unwrap();
        let b = Mat::from_fn(4, 1, |i, _| c64::new(i as f64, 1.0));
        assert_eq!(h.solve(b.as_ref()).unwrap(), b);
    }

    #[test]
    fn diagonal_solve() {
        let k = cplx(&Mat::from_fn(3, 3, |i, j| if i == j { (i + 1) as f64 } else { 0.0 }));
        let h = factorize(k.as_ref()).unwrap();
        let b = cplx(&Mat::from_fn(3, 1, |i, _| [2.0, 2.0, 3.0][i]));
        let x = h.solve(b.as_ref()).unwrap();
        for (i, want) in [2.0, 1.0, 1.0].into_iter().enumerate() {
            assert!((x[(i, 0)] - c64::new(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn random_complex_solve_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let k = Mat::from_fn(n, n, |i, j| {
            let d = if i == j { 10.0 } else { 0.0 };
            c64::new(rng.random_range(-1.0..1.0) + d, rng.random_range(-1.0..1.0))
        });
        let b = Mat::from_fn(n, 1, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let h = factorize(k.as_ref()).unwrap();
        let x = h.solve(b.as_ref()).unwrap();
        let r = &k * &x - &b;
        assert!(frobenius_c(r.as_ref()) <= 1e-12 * frobenius_c(b.as_ref()));
        let xt = h.solve_transpose(b.as_ref()).unwrap();
        let rt = k.transpose() * &xt - &b;
        assert!(frobenius_c(rt.as_ref()) <= 1e-12 * frobenius_c(b.as_ref()));
    }

    #[test]
    fn singular_matrices_are_reported() {
        let k = cplx(&Mat::from_fn(3, 3, |i, j| (i + j) as f64));
        assert!(matches!(factorize(k.as_ref()), Err(Error::SingularK { .. })));

        let t = vec![
            faer::sparse::Triplet::new(0usize, 0usize, c64::new(1.0, 0.0)),
            faer::sparse::Triplet::new(1, 1, c64::new(0.0, 0.0)),
            faer::sparse::Triplet::new(2, 2, c64::new(2.0, 0.0)),
        ];
        let sp = SparseColMat::try_new_from_triplets(3, 3, &t).unwrap();
        let b = Mat::from_fn(3, 1, |_, _| c64::new(1.0, 0.0));
        let res = factorize_sparse(sp, None, None).and_then(|h| h.solve(b.as_ref()));
        assert!(matches!(res, Err(Error::SingularK { .. })));
    }

    #[test]
    fn sparse_and_dense_factorizations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push(faer::sparse::Triplet::new(i, i, c64::new(4.0, rng.random_range(-1.0..1.0))));
            if i + 1 < n {
                t.push(faer::sparse::Triplet::new(i, i + 1, c64::new(-1.0, 0.0)));
                t.push(faer::sparse::Triplet::new(i + 1, i, c64::new(rng.random_range(-1.0..1.0), 0.0)));
            }
        }
        let sp = SparseColMat::try_new_from_triplets(n, n, &t).unwrap();
        let dense = sp.as_ref().to_dense();
        let b = Mat::from_fn(n, 2, |i, j| c64::new(i as f64, j as f64));
        let xs = factorize_sparse(sp.clone(), None, None).unwrap().solve(b.as_ref()).unwrap();
        let xd = factorize(dense.as_ref()).unwrap().solve(b.as_ref()).unwrap();
        assert!(frobenius_c((&xs - &xd).as_ref()) <= 1e-12 * frobenius_c(xd.as_ref()));
        let xst = factorize_sparse(sp, None, None).unwrap().solve_transpose(b.as_ref()).unwrap();
        let xdt = factorize(dense.as_ref()).unwrap().solve_transpose(b.as_ref()).unwrap();
        assert!(frobenius_c((&xst - &xdt).as_ref()) <= 1e-12 * frobenius_c(xdt.as_ref()));
    }

    fn e(n: usize, k: usize) -> Mat<f64> {
        Mat::from_fn(n, 1, |i, _| if i == k { 1.0 } else { 0.0 })
    }

    #[test]
    fn orth_append_basic_cases() {
        let out = orth_append(e(3, 0).as_ref(), e(3, 1).as_ref()).unwrap();
        assert_eq!(out.basis.ncols(), 2);
        assert_eq!(out.deflated, 0);
        assert!(orthonormality_defect(out.basis.as_ref()) < 1e-15);

        let twice = Mat::from_fn(3, 1, |i, _| if i == 0 { 2.0 } else { 0.0 });
        let out = orth_append(e(3, 0).as_ref(), twice.as_ref()).unwrap();
        assert_eq!(out.basis.ncols(), 1);
        assert_eq!(out.deflated, 1);
        assert_eq!(out.appended.ncols(), 0);
    }

    #[test]
    fn orth_append_random_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = orthonormalize(random_real(&mut rng, 100, 10).as_ref());
        let out = orth_append(s.as_ref(), random_real(&mut rng, 100, 2).as_ref()).unwrap();
        assert_eq!(out.basis.ncols(), 12);
        assert!(orthonormality_defect(out.basis.as_ref()) <= 1e-12);
    }

    #[test]
    fn orth_append_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = orthonormalize(random_real(&mut rng, 40, 5).as_ref());
        let combo = &s * random_real(&mut rng, 5, 3);
        let out = orth_append(s.as_ref(), combo.as_ref()).unwrap();
        assert_eq!(out.basis.ncols(), 5);
        assert!(max_principal_angle(s.as_ref(), out.basis.as_ref()).unwrap() <= 1e-10);
    }

    #[test]
    fn svd_small_cases() {
        let d = Mat::from_fn(2, 2, |i, j| if i == j { [3.0, 1.0][i] } else { 0.0 });
        let b = svd(d.as_ref()).unwrap();
        assert!((b.s[0] - 3.0).abs() < 1e-14 && (b.s[1] - 1.0).abs() < 1e-14);

        let u = [1.0, 2.0, 2.0];
        let v = [3.0, 4.0];
        let outer = Mat::from_fn(3, 2, |i, j| u[i] * v[j]);
        let b = svd(outer.as_ref()).unwrap();
        assert!((b.s[0] - 15.0).abs() < 1e-13);
        assert!(b.s[1].abs() < 1e-13);
    }

    #[test]
    fn svd_reconstructs_random_wide_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_real(&mut rng, 20, 60);
        let b = svd(m.as_ref()).unwrap();
        assert!(b.s.windows(2).all(|w| w[0] >= w[1]));
        let err = frobenius((&m - b.reconstruct()).as_ref());
        assert!(err <= 1e-10 * b.s[0]);
        assert!(orthonormality_defect(b.u.as_ref()) < 1e-12);
        assert!(orthonormality_defect(b.vt().transpose()) < 1e-12);
    }

    #[test]
    fn principal_angle_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = orthonormalize(random_real(&mut rng, 30, 4).as_ref());
        assert!(max_principal_angle(x.as_ref(), x.as_ref()).unwrap() <= 1e-14);

        let a = principal_angles(e(2, 0).as_ref(), e(2, 1).as_ref()).unwrap();
        assert!((a[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);

        let q = orthonormalize(random_real(&mut rng, 4, 4).as_ref());
        let xq = &x * &q;
        assert!(max_principal_angle(x.as_ref(), xq.as_ref()).unwrap() <= 1e-10);

        assert!(matches!(
            principal_angles(e(2, 0).as_ref(), e(3, 0).as_ref()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn principal_angles_resolve_tiny_rotations() {
        // Rotating e1 towards e2 by 1e-11 must be visible, which arccos alone cannot do.
        let t = 1e-11f64;
        let x = e(3, 0);
        let y = Mat::from_fn(3, 1, |i, _| [t.cos(), t.sin(), 0.0][i]);
        let a = principal_angles(x.as_ref(), y.as_ref()).unwrap();
        assert!((a[0] - t).abs() < 1e-20);
    }
}
