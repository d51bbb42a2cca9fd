//! Benchmark generators: a first-order LTI model with three resonances, a
//! heated rod with delayed feedback, a 2-D heat equation with fading
//! memory and a damped mass-spring chain.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::matrix::SysMatrix;
use crate::system::{StructuredSystem, Term};
use crate::training::{Spacing, TrainingSet};

pub const FOM_N: usize = 1006;
pub const DELAY_TAU: f64 = 3.0;
pub const FADING_GAMMA: f64 = 1.05;
pub const SECOND_ORDER_DAMPING: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchmarkKind {
    Fom {
        #[serde(default = "fom_n")]
        n: usize,
        /// Allows sizes other than 1006 (the diagonal part is resized).
        #[serde(default)]
        scaled: bool,
    },
    DelayRod {
        n: usize,
        #[serde(default = "delay_tau")]
        tau: f64,
    },
    FadingMemory {
        grid_side: usize,
        #[serde(default = "fading_gamma")]
        gamma: f64,
        #[serde(default)]
        seed: u64,
    },
    SecondOrder {
        n_dof: usize,
        #[serde(default = "second_order_damping")]
        damping: f64,
    },
}

fn fom_n() -> usize {
    FOM_N
}
fn delay_tau() -> f64 {
    DELAY_TAU
}
fn fading_gamma() -> f64 {
    FADING_GAMMA
}
fn second_order_damping() -> f64 {
    SECOND_ORDER_DAMPING
}

/// A benchmark together with its frequency band and training grid size.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSpec {
    pub kind: BenchmarkKind,
    pub omega_min: f64,
    pub omega_max: f64,
    pub grid: usize,
}

impl BenchmarkKind {
    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkKind::Fom { .. } => "fom",
            BenchmarkKind::DelayRod { .. } => "delay_rod",
            BenchmarkKind::FadingMemory { .. } => "fading_memory",
            BenchmarkKind::SecondOrder { .. } => "second_order",
        }
    }

    pub fn build(&self) -> Result<StructuredSystem> {
        match *self {
            BenchmarkKind::Fom { n, scaled } => gen_fom(n, scaled),
            BenchmarkKind::DelayRod { n, tau } => gen_delay_rod(n, tau),
            BenchmarkKind::FadingMemory { grid_side, gamma, seed } => gen_fading_memory(grid_side, gamma, seed),
            BenchmarkKind::SecondOrder { n_dof, damping } => gen_second_order(n_dof, damping),
        }
    }

    pub fn has_finite_params(&self) -> bool {
        match *self {
            BenchmarkKind::Fom { .. } => true,
            BenchmarkKind::DelayRod { tau, .. } => tau.is_finite(),
            BenchmarkKind::FadingMemory { gamma, .. } => gamma.is_finite(),
            BenchmarkKind::SecondOrder { damping, .. } => damping.is_finite(),
        }
    }

    /// One-sided projection is the default for the symmetric second-order model.
    pub fn galerkin_default(&self) -> bool {
        matches!(self, BenchmarkKind::SecondOrder { .. })
    }

    pub fn spec(&self) -> BenchmarkSpec {
        let (omega_min, omega_max, grid) = match *self {
            BenchmarkKind::Fom { n, .. } => (1e-1, 1e3, n),
            BenchmarkKind::DelayRod { n, .. } => (1e-3, 1e3, n),
            BenchmarkKind::FadingMemory { .. } => (1e-2, 1e4, 100),
            BenchmarkKind::SecondOrder { .. } => (1e-1, 1e2, 100),
        };
        BenchmarkSpec {
            kind: self.clone(),
            omega_min,
            omega_max,
            grid,
        }
    }
}

impl BenchmarkSpec {
    pub fn training(&self) -> Result<TrainingSet> {
        TrainingSet::imaginary_grid(self.omega_min, self.omega_max, self.grid, Spacing::Log)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// First-order LTI model `sI − A` with oscillatory blocks at 100, 200, 400
/// rad/s and real poles spread over `[−1000, −1]`.
pub fn gen_fom(n: usize, scaled: bool) -> Result<StructuredSystem> {
    if (n != FOM_N && !scaled) || n < 7 {
        return Err(Error::UnsupportedSize { kind: "fom", n });
    }
    let mut entries = Vec::with_capacity(n + 6);
    for (k, w) in [100.0, 200.0, 400.0].into_iter().enumerate() {
        let i = 2 * k;
        entries.extend([(i, i, -1.0), (i, i + 1, w), (i + 1, i, -w), (i + 1, i + 1, -1.0)]);
    }
    for (k, d) in linspace(-1.0, -1000.0, n - 6).into_iter().enumerate() {
        entries.push((6 + k, 6 + k, d));
    }
    let a = SysMatrix::from_triplets(n, n, &entries)?;
    let b = Mat::from_fn(n, 1, |i, _| if i < 6 { 10.0 } else { 1.0 });
    let c = b.transpose().to_owned();
    StructuredSystem::new(
        vec![
            Term::new(SysMatrix::identity(n), ScalarFunction::power(1)),
            Term::new(a, ScalarFunction::constant(-1.0)),
        ],
        b,
        c,
    )
}

/// `(1/h²) tridiag(1, −2, 1)` with Dirichlet ends, `h = 1/(n+1)`.
fn laplacian_1d(n: usize) -> (Vec<(usize, usize, f64)>, f64) {
    let h = 1.0 / (n + 1) as f64;
    let s = 1.0 / (h * h);
    let mut e = Vec::with_capacity(3 * n);
    for i in 0..n {
        e.push((i, i, -2.0 * s));
        if i + 1 < n {
            e.push((i, i + 1, s));
            e.push((i + 1, i, s));
        }
    }
    (e, h)
}

/// Heated rod `K(s) = sI − A − e^{−τs} A_τ` with `A_τ = −κI`, where `κ` is
/// half the magnitude of the slowest mode of `A`. Input is distributed
/// along the rod, output is the mean temperature.
pub fn gen_delay_rod(n: usize, tau: f64) -> Result<StructuredSystem> {
    if n < 3 {
        return Err(Error::UnsupportedSize { kind: "delay_rod", n });
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("delay must be nonnegative, got {tau}")));
    }
    let (entries, h) = laplacian_1d(n);
    let slowest = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    let kappa = 0.5 * slowest;
    let a = SysMatrix::from_triplets(n, n, &entries)?;
    let a_tau = SysMatrix::diagonal(&vec![-kappa; n]);
    StructuredSystem::new(
        vec![
            Term::new(SysMatrix::identity(n), ScalarFunction::power(1)),
            Term::new(a, ScalarFunction::constant(-1.0)),
            Term::new(a_tau, ScalarFunction::scaled(-1.0, ScalarFunction::exponential(-tau))),
        ],
        Mat::from_fn(n, 1, |_, _| h),
        Mat::from_fn(1, n, |_, _| 1.0 / n as f64),
    )
}

/// 2-D heat equation with memory kernel: `K(s) = sI − A + A/(s+γ)` on a
/// `side × side` grid. `B` and `C` are unit-norm ±1 vectors from `seed`.
pub fn gen_fading_memory(side: usize, gamma: f64, seed: u64) -> Result<StructuredSystem> {
    if side < 4 {
        return Err(Error::UnsupportedSize { kind: "fading_memory", n: side });
    }
    let n = side * side;
    let (line, _) = laplacian_1d(side);
    let mut entries = Vec::with_capacity(5 * n);
    for &(i, j, v) in &line {
        for k in 0..side {
            // T ⊗ I and I ⊗ T
            entries.push((i * side + k, j * side + k, v));
            entries.push((k * side + i, k * side + j, v));
        }
    }
    let a = SysMatrix::from_triplets(n, n, &entries)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let mut sign = || if rng.random::<bool>() { scale } else { -scale };
    let b = Mat::from_fn(n, 1, |_, _| sign());
    let c = Mat::from_fn(1, n, |_, _| sign());
    StructuredSystem::new(
        vec![
            Term::new(SysMatrix::identity(n), ScalarFunction::power(1)),
            Term::new(a.clone(), ScalarFunction::constant(-1.0)),
            Term::new(a, ScalarFunction::shifted_rational(gamma)),
        ],
        b,
        c,
    )
}

/// Mass-spring-damper chain `s²M + sE + K` with fixed ends, masses in
/// `[1, 2)`, unit stiffness and proportional damping `E = damping · K`.
/// Force enters at the first mass; the output is the last displacement.
pub fn gen_second_order(n_dof: usize, damping: f64) -> Result<StructuredSystem> {
    if n_dof < 1 {
        return Err(Error::UnsupportedSize { kind: "second_order", n: n_dof });
    }
    let n = n_dof;
    let masses: Vec<f64> = (0..n).map(|i| 1.0 + (i % 5) as f64 / 5.0).collect();
    let mut k = Vec::with_capacity(3 * n);
    for i in 0..n {
        k.push((i, i, 2.0));
        if i + 1 < n {
            k.push((i, i + 1, -1.0));
            k.push((i + 1, i, -1.0));
        }
    }
    let stiffness = SysMatrix::from_triplets(n, n, &k)?;
    let damp: Vec<_> = k.iter().map(|&(i, j, v)| (i, j, damping * v)).collect();
    StructuredSystem::new(
        vec![
            Term::new(SysMatrix::diagonal(&masses), ScalarFunction::power(2)),
            Term::new(SysMatrix::from_triplets(n, n, &damp)?, ScalarFunction::power(1)),
            Term::new(stiffness, ScalarFunction::constant(1.0)),
        ],
        Mat::from_fn(n, 1, |i, _| if i == 0 { 1.0 } else { 0.0 }),
        Mat::from_fn(1, n, |_, j| if j == n - 1 { 1.0 } else { 0.0 }),
    )
}
