//! Linear structured systems `H(s) = C K(s)⁻¹ B` with an affine pencil
//! `K(s) = f_1(s) A_1 + … + f_l(s) A_l`.

use faer::sparse::linalg::solvers::SymbolicLu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::linalg::{self, SolveHandle};
use crate::matrix::SysMatrix;
use crate::training::TrainingSet;

#[derive(Clone, Debug)]
pub struct Term {
    pub matrix: SysMatrix,
    pub function: ScalarFunction,
}

impl Term {
    pub fn new(matrix: impl Into<SysMatrix>, function: ScalarFunction) -> Self {
        Term {
            matrix: matrix.into(),
            function,
        }
    }
}

/// `K(s)` in the storage of its terms.
pub enum PencilMatrix {
    Dense(Mat<c64>),
    Sparse(SparseColMat<usize, c64>),
}

impl PencilMatrix {
    pub fn to_dense(&self) -> Mat<c64> {
        match self {
            PencilMatrix::Dense(m) => m.clone(),
            PencilMatrix::Sparse(m) => m.as_ref().to_dense(),
        }
    }
}

/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct StructuredSystem {
    terms: Vec<Term>,
    b: Mat<f64>,
    c: Mat<f64>,
    // Symbolic LU of the union pattern when every term is sparse.
    symbolic: Option<SymbolicLu<usize>>,
}

impl StructuredSystem {
    pub fn new(terms: Vec<Term>, b: Mat<f64>, c: Mat<f64>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("a structured system needs at least one term".into()));
        }
        let n = terms[0].matrix.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("system dimension must be positive".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.matrix.nrows() != n || t.matrix.ncols() != n {
                return Err(Error::dims(
                    format!("term {}", i + 1),
                    format!("{n}x{n}"),
                    format!("{}x{}", t.matrix.nrows(), t.matrix.ncols()),
                ));
            }
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::dims("B", format!("{n}xm, m >= 1"), format!("{}x{}", b.nrows(), b.ncols())));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::dims("C", format!("pxn with n = {n}, p >= 1"), format!("{}x{}", c.nrows(), c.ncols())));
        }
        let mut sys = StructuredSystem {
            terms,
            b,
            c,
            symbolic: None,
        };
        if sys.all_sparse() {
            let pattern = sys.assemble_sparse(&vec![c64::new(1.0, 0.0); sys.l()]);
            sys.symbolic = Some(linalg::analyze_pattern(&pattern)?);
        }
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn l(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn functions(&self) -> Vec<ScalarFunction> {
        self.terms.iter().map(|t| t.function.clone()).collect()
    }

    pub fn b(&self) -> MatRef<'_, f64> {
        self.b.as_ref()
    }

    pub fn c(&self) -> MatRef<'_, f64> {
        self.c.as_ref()
    }

    fn all_sparse(&self) -> bool {
        self.terms.iter().all(|t| t.matrix.is_sparse())
    }

    /// `(f_1(s), …, f_l(s))`
    pub fn weights(&self, s: c64) -> Result<Vec<c64>> {
        self.terms.iter().map(|t| t.function.eval(s)).collect()
    }

    fn assemble_sparse(&self, weights: &[c64]) -> SparseColMat<usize, c64> {
        let mut triplets = Vec::new();
        for (t, &w) in self.terms.iter().zip(weights) {
            if let SysMatrix::Sparse(a) = &t.matrix {
                triplets.extend(a.as_ref().triplet_iter().map(|e| Triplet::new(e.row, e.col, w * *e.val)));
            }
        }
        SparseColMat::try_new_from_triplets(self.n(), self.n(), &triplets).expect("term patterns are in range")
    }

    fn assemble_dense(&self, weights: &[c64]) -> Mat<c64> {
        let n = self.n();
        let mut k = Mat::<c64>::zeros(n, n);
        for (t, &w) in self.terms.iter().zip(weights) {
            for (i, j, v) in t.matrix.triplets() {
                k[(i, j)] += w * v;
            }
        }
        k
    }

    /// `K(s) = Σ f_i(s) A_i`, sparse when every `A_i` is.
    pub fn eval_k(&self, s: c64) -> Result<PencilMatrix> {
        let w = self.weights(s)?;
        Ok(if self.all_sparse() {
            PencilMatrix::Sparse(self.assemble_sparse(&w))
        } else {
            PencilMatrix::Dense(self.assemble_dense(&w))
        })
    }

    pub fn factorize_at(&self, s: c64) -> Result<SolveHandle> {
        match self.eval_k(s)? {
            PencilMatrix::Sparse(k) => linalg::factorize_sparse(k, self.symbolic.as_ref(), Some(s)),
            PencilMatrix::Dense(k) => linalg::factorize_at(k.as_ref(), Some(s)),
        }
    }

    /// `K(s)⁻¹ rhs`
    pub fn solve_at(&self, s: c64, rhs: MatRef<'_, f64>) -> Result<Mat<c64>> {
        let handle = self.factorize_at(s)?;
        handle.solve(linalg::to_complex(rhs).as_ref())
    }

    /// `H(s) = C K(s)⁻¹ B`, via a solve rather than an explicit inverse.
    pub fn eval_transfer(&self, s: c64) -> Result<Mat<c64>> {
        let x = self.solve_at(s, self.b())?;
        Ok(linalg::real_times_complex(self.c(), x.as_ref()))
    }

    /// `f_i(σ_j)` for every term `i` and training point `j`.
    pub fn evaluate_f_diag(&self, ts: &TrainingSet) -> Result<FunctionDiagonals> {
        let values = self
            .terms
            .iter()
            .map(|t| ts.points().iter().map(|&s| t.function.eval(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionDiagonals { values })
    }

    /// The dual system `(A_iᵀ, Cᵀ, Bᵀ)`, whose reachability is the
    /// observability of `self`.
    pub fn dual(&self) -> StructuredSystem {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.matrix.transpose(), t.function.clone()))
            .collect();
        StructuredSystem::new(terms, self.c.transpose().to_owned(), self.b.transpose().to_owned())
            .expect("dual of a valid system is valid")
    }
}

/// The diagonals of `F_i^Λ = diag(f_i(σ_1), …, f_i(σ_N))`, never stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDiagonals {
    /// `values[i][j] = f_i(σ_j)`
    pub values: Vec<Vec<c64>>,
}

impl FunctionDiagonals {
    pub fn at(&self, term: usize, point: usize) -> c64 {
        self.values[term][point]
    }

    pub fn num_points(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::linalg::solvers::DenseSolveCore;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lti(a: Mat<f64>, b: Mat<f64>, c: Mat<f64>) -> StructuredSystem {
        let n = a.nrows();
        StructuredSystem::new(
            vec![
                Term::new(Mat::<f64>::identity(n, n), ScalarFunction::power(1)),
                Term::new(a, ScalarFunction::constant(-1.0)),
            ],
            b,
            c,
        )
        .unwrap()
    }

    #[test]
    fn resolvent_pencil() {
        let a = Mat::from_fn(2, 2, |i, j| [[1.0, 2.0], [3.0, 4.0]][i][j]);
        let sys = lti(a.clone(), Mat::ones(2, 1), Mat::ones(1, 2));
        let s = c64::new(0.5, 2.0);
        let k = sys.eval_k(s).unwrap().to_dense();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { s } else { c64::new(0.0, 0.0) } - a[(i, j)];
                assert_eq!(k[(i, j)], want);
            }
        }
    }

    #[test]
    fn scalar_transfer() {
        let sys = StructuredSystem::new(
            vec![Term::new(Mat::from_fn(1, 1, |_, _| 2.0), ScalarFunction::constant(1.0))],
            Mat::from_fn(1, 1, |_, _| 1.0),
            Mat::from_fn(1, 1, |_, _| 3.0),
        )
        .unwrap();
        for s in [c64::new(0.0, 1.0), c64::new(5.0, -3.0)] {
            let h = sys.eval_transfer(s).unwrap();
            assert!((h[(0, 0)] - c64::new(1.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn transfer_matches_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = Mat::from_fn(3, 3, |i, j| rng.random_range(-0.5..0.5) - if i == j { 3.0 } else { 0.0 });
        let b = Mat::from_fn(3, 1, |_, _| rng.random_range(-1.0..1.0));
        let c = Mat::from_fn(1, 3, |_, _| rng.random_range(-1.0..1.0));
        let sys = lti(a.clone(), b.clone(), c.clone());
        let s = c64::new(0.0, 1.0);
        let h = sys.eval_transfer(s).unwrap();

        let k = sys.eval_k(s).unwrap().to_dense();
        let inv = k.partial_piv_lu().inverse();
        let want = linalg::to_complex(c.as_ref()) * inv * linalg::to_complex(b.as_ref());
        assert!((h[(0, 0)] - want[(0, 0)]).norm() <= 1e-12 * want[(0, 0)].norm());
    }

    #[test]
    fn sparse_and_dense_terms_give_same_transfer() {
        let a = SysMatrix::from_triplets(3, 3, &[(0, 0, -1.0), (1, 1, -2.0), (2, 2, -3.0), (0, 2, 0.5)]).unwrap();
        let sparse = StructuredSystem::new(
            vec![
                Term::new(SysMatrix::identity(3), ScalarFunction::power(1)),
                Term::new(a.clone(), ScalarFunction::constant(-1.0)),
            ],
            Mat::ones(3, 1),
            Mat::ones(1, 3),
        )
        .unwrap();
        let dense = lti(a.to_dense(), Mat::ones(3, 1), Mat::ones(1, 3));
        let s = c64::new(0.0, 0.7);
        let hs = sparse.eval_transfer(s).unwrap();
        let hd = dense.eval_transfer(s).unwrap();
        assert!((hs[(0, 0)] - hd[(0, 0)]).norm() < 1e-14);
    }

    #[test]
    fn transfer_is_conjugate_symmetric() {
        let a = Mat::from_fn(4, 4, |i, j| if i == j { -(i as f64) - 1.0 } else { 0.1 * (i as f64 - j as f64) });
        let sys = lti(a, Mat::ones(4, 1), Mat::ones(1, 4));
        let s = c64::new(0.2, 3.0);
        let h1 = sys.eval_transfer(s).unwrap();
        let h2 = sys.eval_transfer(s.conj()).unwrap();
        assert!((h1[(0, 0)].conj() - h2[(0, 0)]).norm() < 1e-14);
    }

    #[test]
    fn pencil_is_linear_in_each_term() {
        let a = Mat::from_fn(2, 2, |i, j| (i * 2 + j) as f64);
        let s = c64::new(0.0, 1.3);
        let k1 = lti(a.clone(), Mat::ones(2, 1), Mat::ones(1, 2)).eval_k(s).unwrap().to_dense();
        let k2 = lti(&a * 2.0, Mat::ones(2, 1), Mat::ones(1, 2)).eval_k(s).unwrap().to_dense();
        // Doubling A doubles exactly the -A summand.
        for i in 0..2 {
            for j in 0..2 {
                let ident = if i == j { s } else { c64::new(0.0, 0.0) };
                assert_eq!(k2[(i, j)] - ident, (k1[(i, j)] - ident) * 2.0);
            }
        }
    }

    #[test]
    fn f_diagonals() {
        let sys = StructuredSystem::new(
            vec![
                Term::new(SysMatrix::identity(2), ScalarFunction::power(1)),
                Term::new(SysMatrix::identity(2), ScalarFunction::shifted_rational(1.05)),
            ],
            Mat::ones(2, 1),
            Mat::ones(1, 2),
        )
        .unwrap();
        let ts = TrainingSet::conjugate_closure(&[c64::new(0.0, 1.0), c64::new(0.0, 2.0)]);
        let f = sys.evaluate_f_diag(&ts).unwrap();
        assert_eq!(f.values[0], vec![c64::new(0.0, 1.0), c64::new(0.0, 2.0)]);
        assert_eq!(f.at(1, 0), c64::new(1.0, 0.0) / c64::new(1.05, 1.0));
    }

    #[test]
    fn singular_function_propagates() {
        let sys = StructuredSystem::new(
            vec![Term::new(SysMatrix::identity(2), ScalarFunction::shifted_rational(1.0))],
            Mat::ones(2, 1),
            Mat::ones(1, 2),
        )
        .unwrap();
        assert!(matches!(sys.eval_k(c64::new(-1.0, 0.0)), Err(Error::SingularFunction { .. })));
    }

    #[test]
    fn construction_checks_dimensions() {
        let bad = StructuredSystem::new(
            vec![
                Term::new(SysMatrix::identity(2), ScalarFunction::power(1)),
                Term::new(SysMatrix::identity(3), ScalarFunction::constant(1.0)),
            ],
            Mat::ones(2, 1),
            Mat::ones(1, 2),
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
        let bad_b = StructuredSystem::new(
            vec![Term::new(SysMatrix::identity(2), ScalarFunction::power(1))],
            Mat::ones(3, 1),
            Mat::ones(1, 2),
        );
        assert!(bad_b.is_err());
    }
}
