use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{FieldVector, FieldsError, MomentumGrid, RegularizedPropagator};
use crate::rng;

/// Centered Gaussian measure with diagonal covariance in momentum space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianMeasure {
    propagator: RegularizedPropagator,
}

impl GaussianMeasure {
    pub fn new(propagator: RegularizedPropagator) -> Self {
        GaussianMeasure { propagator }
    }

    /// Measure with an explicit per-mode covariance.
    pub fn from_covariance(grid: &MomentumGrid, covariance: Vec<f64>) -> Result<Self, FieldsError> {
        if covariance.len() != grid.len() {
            return Err(FieldsError::LengthMismatch { expected: grid.len(), got: covariance.len() });
        }
        for (k, w) in covariance.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 || *w != covariance[grid.neg(k)] {
                return Err(FieldsError::BadCovariance(k));
            }
        }
        Ok(GaussianMeasure { propagator: RegularizedPropagator::composite(*grid, covariance) })
    }

    /// The point mass at the zero field, unit of convolution.
    pub fn point_mass(grid: &MomentumGrid) -> Self {
        GaussianMeasure { propagator: RegularizedPropagator::composite(*grid, vec![0.0; grid.len()]) }
    }

    pub fn grid(&self) -> &MomentumGrid {
        self.propagator.grid()
    }

    pub fn propagator(&self) -> &RegularizedPropagator {
        &self.propagator
    }

    pub fn covariance(&self) -> &[f64] {
        self.propagator.weights()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.grid().len()).filter(|k| self.covariance()[*k] > 0.0).collect()
    }

    /// Law of `φ + η` for independent `φ ~ self`, `η ~ other`.
    pub fn convolve(&self, other: &GaussianMeasure) -> Result<GaussianMeasure, FieldsError> {
        if self.grid() != other.grid() {
            return Err(FieldsError::GridMismatch);
        }
        let cov = self.covariance().iter().zip(other.covariance()).map(|(a, b)| a + b).collect();
        Ok(GaussianMeasure { propagator: RegularizedPropagator::composite(*self.grid(), cov) })
    }

    /// `E[e^{i⟨J,φ⟩}] = exp(−½ Σ_p w(p) J̃(p) J̃(−p))`.
    pub fn characteristic_function(&self, j: &FieldVector) -> Complex64 {
        let grid = self.grid();
        let mut exponent = Complex64::new(0.0, 0.0);
        for k in 0..grid.len() {
            let w = self.covariance()[k];
            if w != 0.0 {
                exponent += w * j.amplitude(k) * j.amplitude(grid.neg(k));
            }
        }
        (-0.5 * exponent).exp()
    }

    /// Draw number `i` uses stream `i` of `seed`, so the output does not
    /// depend on the thread count.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<FieldVector> {
        (0..count).into_par_iter().map(|i| self.draw(seed, i as u64)).collect()
    }

    fn draw(&self, seed: u64, index: u64) -> FieldVector {
        let grid = self.grid();
        let n = grid.len();
        let cov = self.covariance();
        let mut r = rng::stream(seed, index);
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..=n / 2 {
            let w = cov[k];
            if grid.is_self_conjugate(k) {
                let x: f64 = StandardNormal.sample(&mut r);
                amps[k] = Complex64::new(w.sqrt() * x, 0.0);
            } else {
                let x: f64 = StandardNormal.sample(&mut r);
                let y: f64 = StandardNormal.sample(&mut r);
                let z = Complex64::new(x, y) * (w / 2.0).sqrt();
                amps[k] = z;
                amps[grid.neg(k)] = z.conj();
            }
        }
        FieldVector::from_amplitudes(grid, amps, true).expect("draws satisfy the reality constraint")
    }
}

/// Isserlis sum over perfect pairings of `cov(p_i, p_j) = w(p_i) δ(p_i + p_j)`.
pub fn wick_correlator(mu: &GaussianMeasure, modes: &[usize]) -> f64 {
    if modes.len() % 2 == 1 {
        return 0.0;
    }
    let grid = mu.grid();
    if modes.iter().any(|k| *k >= grid.len()) {
        return 0.0;
    }
    fn pairings(mu: &GaussianMeasure, rest: &mut Vec<usize>) -> f64 {
        if rest.is_empty() {
            return 1.0;
        }
        let first = rest.remove(0);
        let mut total = 0.0;
        for i in 0..rest.len() {
            if rest[i] != mu.grid().neg(first) {
                continue;
            }
            let partner = rest.remove(i);
            total += mu.covariance()[first] * pairings(mu, rest);
            rest.insert(i, partner);
        }
        rest.insert(0, first);
        total
    }
    pairings(mu, &mut modes.to_vec())
}

/// Monte Carlo estimate of `E[φ̃(p)φ̃(−p)]` per mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub mode: usize,
    pub momentum: f64,
    pub weight: f64,
    pub mean: f64,
    pub std_error: f64,
}

impl MomentRow {
    /// Deviation from the covariance in units of the standard error; zero
    /// when both the estimate and its error vanish exactly.
    pub fn z_score(&self) -> f64 {
        let d = (self.mean - self.weight).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

pub fn moment_table(mu: &GaussianMeasure, samples: &[FieldVector]) -> Vec<MomentRow> {
    let grid = mu.grid();
    let count = samples.len() as f64;
    (0..grid.len())
        .map(|k| {
            let values: Vec<f64> = samples
                .iter()
                .map(|s| (s.amplitude(k) * s.amplitude(grid.neg(k))).re)
                .collect();
            let mean = values.iter().sum::<f64>() / count;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
            MomentRow {
                mode: k,
                momentum: grid.momentum(k),
                weight: mu.covariance()[k],
                mean,
                std_error: (var / count).sqrt(),
            }
        })
        .collect()
}
