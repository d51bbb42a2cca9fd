//! Candidate interpolation points, stored as conjugate-pair representatives.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A complex frequency `σ`; benchmark grids use `σ = jω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub re: f64,
    pub im: f64,
}

impl FrequencyPoint {
    pub fn sigma(self) -> c64 {
        c64::new(self.re, self.im)
    }
}

impl From<c64> for FrequencyPoint {
    fn from(s: c64) -> Self {
        FrequencyPoint { re: s.re, im: s.im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// Training points closed under conjugation.
///
/// Only representatives with `Im σ ≥ 0` are stored; each complex
/// representative stands for the pair `{σ, conj(σ)}`, a real one for itself.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    points: Vec<c64>,
    selected: Vec<bool>,
}

impl TrainingSet {
    /// Deduplicates and folds the lower half plane onto its conjugates,
    /// keeping first-appearance order.
    pub fn conjugate_closure(points: &[c64]) -> TrainingSet {
        let mut reps: Vec<c64> = Vec::with_capacity(points.len());
        for &p in points {
            let rep = if p.im < 0.0 { p.conj() } else { p };
            let rep = if rep.im == 0.0 { c64::new(rep.re, 0.0) } else { rep };
            let dup = reps.iter().any(|&q| {
                let scale = q.norm().max(rep.norm());
                (q - rep).norm() <= 1e-15 * scale
            });
            if !dup {
                reps.push(rep);
            }
        }
        let n = reps.len();
        TrainingSet {
            points: reps,
            selected: vec![false; n],
        }
    }

    /// `n` points `σ = jω` with `ω` spaced over `[omega_min, omega_max]`.
    pub fn imaginary_grid(omega_min: f64, omega_max: f64, n: usize, spacing: Spacing) -> Result<TrainingSet> {
        let omegas = omega_grid(omega_min, omega_max, n, spacing)?;
        let pts: Vec<c64> = omegas.into_iter().map(|w| c64::new(0.0, w)).collect();
        Ok(Self::conjugate_closure(&pts))
    }

    pub fn log_imaginary(omega_min: f64, omega_max: f64, n: usize) -> Result<TrainingSet> {
        Self::imaginary_grid(omega_min, omega_max, n, Spacing::Log)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[c64] {
        &self.points
    }

    pub fn point(&self, j: usize) -> c64 {
        self.points[j]
    }

    pub fn is_real(&self, j: usize) -> bool {
        self.points[j].im == 0.0
    }

    /// 2 for a complex representative, 1 for a real point.
    pub fn multiplicity(&self, j: usize) -> usize {
        if self.is_real(j) {
            1
        } else {
            2
        }
    }

    pub fn selected_mask(&self) -> &[bool] {
        &self.selected
    }

    pub fn mark_selected(&mut self, j: usize) {
        self.selected[j] = true;
    }

    /// Index of the representative of smallest modulus (lowest index on ties).
    pub fn smallest_magnitude(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (j, p) in self.points.iter().enumerate() {
            match best {
                Some(b) if self.points[b].norm() <= p.norm() => {}
                _ => best = Some(j),
            }
        }
        best
    }
}

pub fn omega_grid(omega_min: f64, omega_max: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    if !(omega_min.is_finite() && omega_max.is_finite()) || omega_max < omega_min {
        return Err(Error::InvalidArgument(format!(
            "invalid frequency range [{omega_min}, {omega_max}]"
        )));
    }
    if n == 1 {
        return Ok(vec![omega_min]);
    }
    let t = |k: usize| k as f64 / (n - 1) as f64;
    Ok(match spacing {
        Spacing::Log => {
            if omega_min <= 0.0 {
                return Err(Error::InvalidArgument("log spacing needs omega_min > 0".into()));
            }
            let (a, b) = (omega_min.log10(), omega_max.log10());
            (0..n)
                .map(|k| if k == n - 1 { omega_max } else { 10f64.powf(a + (b - a) * t(k)) })
                .collect()
        }
        Spacing::Linear => (0..n)
            .map(|k| if k == n - 1 { omega_max } else { omega_min + (omega_max - omega_min) * t(k) })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(w: f64) -> c64 {
        c64::new(0.0, w)
    }

    #[test]
    fn conjugates_fold_onto_representatives() {
        let ts = TrainingSet::conjugate_closure(&[j(1.0), j(-1.0), j(2.0)]);
        assert_eq!(ts.points(), &[j(1.0), j(2.0)]);
        assert_eq!(ts.multiplicity(0), 2);
    }

    #[test]
    fn real_point_is_its_own_pair() {
        let ts = TrainingSet::conjugate_closure(&[c64::new(1.0, 0.0)]);
        assert_eq!(ts.len(), 1);
        assert!(ts.is_real(0));
        assert_eq!(ts.multiplicity(0), 1);
    }

    #[test]
    fn log_grid_has_requested_count() {
        let ts = TrainingSet::log_imaginary(1e-2, 1e4, 100).unwrap();
        assert_eq!(ts.len(), 100);
        assert_eq!(ts.point(0), j(1e-2));
        assert_eq!(ts.point(99), j(1e4));
        assert_eq!(ts.smallest_magnitude(), Some(0));
        assert!(ts.selected_mask().iter().all(|&s| !s));
    }

    #[test]
    fn invalid_ranges() {
        assert!(omega_grid(0.0, 1.0, 10, Spacing::Log).is_err());
        assert!(omega_grid(2.0, 1.0, 10, Spacing::Linear).is_err());
        assert!(omega_grid(1.0, 2.0, 0, Spacing::Linear).is_err());
    }
}
