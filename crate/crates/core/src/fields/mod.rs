//! Finite model of the space of fields on a 1D periodic lattice.
//!
//! A field is stored through its Fourier amplitudes `φ̃(p)` on the momentum
//! grid `p_j = 2πj/N`, `j ∈ {−N/2+1, …, N/2}`. Amplitudes are indexed by the
//! DFT index `k = j mod N`; the Nyquist mode `k = N/2` counts as positive.
//! Position-space values use the unitary convention
//! `φ(x) = N^{-1/2} Σ_k φ̃(k) e^{i p_k x}`.

mod gauge;
mod measure;
mod perturbative;

pub use gauge::{gauge_partition, GaugeModel, GaugeReport, QuadratureSettings, SigmaFamily};
pub use measure::{moment_table, wick_correlator, GaussianMeasure, MomentRow};
pub use perturbative::{perturbative_partition, PerturbativeSeries, MAX_PERTURBATIVE_ORDER};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldsError {
    #[error("mode count must be even and at least 2, got {0}")]
    BadModeCount(usize),
    #[error("mass must be positive and finite, got {0}")]
    BadMass(f64),
    #[error("cutoffs must satisfy 0 <= IR <= UV, got IR={ir}, UV={uv}")]
    BadCutoffs { ir: f64, uv: f64 },
    #[error("expected {expected} amplitudes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("reality constraint violated at mode {0}")]
    RealityViolated(usize),
    #[error("mode outside regularization band: {0}")]
    OutsideBand(usize),
    #[error("mode index {0} is not on the grid")]
    NoSuchMode(usize),
    #[error("covariance must be finite, nonnegative and symmetric under p -> -p (mode {0})")]
    BadCovariance(usize),
    #[error("measures live on different grids")]
    GridMismatch,
    #[error("perturbative order must be at most {max}, got {got}")]
    OrderTooHigh { got: usize, max: usize },
    #[error("gauge model: {0}")]
    Gauge(String),
}

/// Momentum grid of a periodic lattice with `n` sites and mass `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    n: usize,
    mass: f64,
}

impl MomentumGrid {
    pub fn new(n: usize, mass: f64) -> Result<Self, FieldsError> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(FieldsError::BadModeCount(n));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(FieldsError::BadMass(mass));
        }
        Ok(MomentumGrid { n, mass })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Signed mode number `j` of DFT index `k`.
    pub fn mode_number(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn momentum(&self, k: usize) -> f64 {
        2.0 * PI * self.mode_number(k) as f64 / self.n as f64
    }

    /// Index of `−p_k`.
    pub fn neg(&self, k: usize) -> usize {
        (self.n - k) % self.n
    }

    pub fn is_self_conjugate(&self, k: usize) -> bool {
        self.neg(k) == k
    }

    /// Free kernel `K̃(p) = p² + m²`.
    pub fn kernel(&self, k: usize) -> f64 {
        let p = self.momentum(k);
        p * p + self.mass * self.mass
    }

    /// `e^{i p_k x}` with the phase reduced exactly modulo `N`.
    fn phase(&self, k: usize, x: usize) -> Complex64 {
        let r = (k * x) % self.n;
        Complex64::from_polar(1.0, 2.0 * PI * r as f64 / self.n as f64)
    }
}

/// Fourier amplitudes of a field, optionally constrained to be real in
/// position space (`φ̃(−p) = conj φ̃(p)`).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVector {
    amps: Vec<Complex64>,
    real: bool,
}

const REALITY_TOL: f64 = 1e-12;

impl FieldVector {
    pub fn zeros(grid: &MomentumGrid, real: bool) -> Self {
        FieldVector { amps: vec![Complex64::new(0.0, 0.0); grid.len()], real }
    }

    pub fn from_amplitudes(grid: &MomentumGrid, amps: Vec<Complex64>, real: bool) -> Result<Self, FieldsError> {
        if amps.len() != grid.len() {
            return Err(FieldsError::LengthMismatch { expected: grid.len(), got: amps.len() });
        }
        let v = FieldVector { amps, real };
        if real {
            for k in 0..grid.len() {
                let d = v.amps[k] - v.amps[grid.neg(k)].conj();
                if d.norm() > REALITY_TOL * (1.0 + v.amps[k].norm()) {
                    return Err(FieldsError::RealityViolated(k));
                }
            }
        }
        Ok(v)
    }

    /// Real field from amplitudes on the nonnegative modes `k = 0..=N/2`;
    /// the remaining modes are filled by conjugation.
    pub fn real_from_half(grid: &MomentumGrid, half: &[Complex64]) -> Result<Self, FieldsError> {
        let n = grid.len();
        if half.len() != n / 2 + 1 {
            return Err(FieldsError::LengthMismatch { expected: n / 2 + 1, got: half.len() });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        for (k, z) in half.iter().enumerate() {
            if grid.is_self_conjugate(k) && z.im.abs() > REALITY_TOL {
                return Err(FieldsError::RealityViolated(k));
            }
            amps[k] = *z;
            amps[grid.neg(k)] = z.conj();
        }
        if grid.is_self_conjugate(0) {
            amps[0] = Complex64::new(half[0].re, 0.0);
        }
        amps[n / 2] = Complex64::new(half[n / 2].re, 0.0);
        Ok(FieldVector { amps, real: true })
    }

    /// Caller guarantees the reality constraint.
    pub(crate) fn real_unchecked(amps: Vec<Complex64>) -> Self {
        FieldVector { amps, real: true }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Modes with a nonzero amplitude.
    pub fn support(&self) -> Vec<usize> {
        (0..self.amps.len()).filter(|k| self.amps[*k] != Complex64::new(0.0, 0.0)).collect()
    }

    pub fn add(&self, other: &FieldVector) -> FieldVector {
        FieldVector {
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
            real: self.real && other.real,
        }
    }

    /// Keeps only the modes where `mask` is true.
    pub fn restrict(&self, mask: &[bool]) -> FieldVector {
        FieldVector {
            amps: self
                .amps
                .iter()
                .zip(mask)
                .map(|(a, m)| if *m { *a } else { Complex64::new(0.0, 0.0) })
                .collect(),
            real: self.real,
        }
    }

    /// Position-space values `φ(x)`, `x = 0..N`.
    pub fn to_position(&self, grid: &MomentumGrid) -> Vec<Complex64> {
        let n = grid.len();
        let norm = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|x| (0..n).map(|k| self.amps[k] * grid.phase(k, x)).sum::<Complex64>() * norm)
            .collect()
    }
}

/// Regularization scheme of a propagator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularization {
    /// `1/(p²+m²)` on `Λ_IR² ≤ p² < Λ_UV²`, zero elsewhere.
    Sharp { ir: f64, uv: f64 },
    /// `(σ(p;Λ_UV) − σ(p;Λ_IR))/(p²+m²)` with `σ(p;Λ) = exp(−p²/Λ²)`.
    Smooth { ir: f64, uv: f64 },
    /// Sum of other propagators.
    Composite,
}

/// Low-pass cutoff profile: 0 at `Λ = 0`, 1 at `Λ = ∞`.
pub fn cutoff_profile(p: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else if lambda.is_infinite() {
        1.0
    } else {
        (-(p * p) / (lambda * lambda)).exp()
    }
}

/// Per-mode regularized covariance `K̃⁻¹(p)` with its band mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedPropagator {
    grid: MomentumGrid,
    weights: Vec<f64>,
    band: Vec<bool>,
    regularization: Regularization,
}

fn check_cutoffs(ir: f64, uv: f64) -> Result<(), FieldsError> {
    if ir.is_nan() || uv.is_nan() || ir < 0.0 || ir > uv || ir.is_infinite() {
        return Err(FieldsError::BadCutoffs { ir, uv });
    }
    Ok(())
}

impl RegularizedPropagator {
    /// Sharp band `Λ_IR² ≤ p² < Λ_UV²`; `uv` may be infinite.
    pub fn sharp(grid: &MomentumGrid, ir: f64, uv: f64) -> Result<Self, FieldsError> {
        check_cutoffs(ir, uv)?;
        let band: Vec<bool> = (0..grid.len())
            .map(|k| {
                let p2 = grid.momentum(k).powi(2);
                ir * ir <= p2 && (uv.is_infinite() || p2 < uv * uv)
            })
            .collect();
        let weights = (0..grid.len())
            .map(|k| if band[k] { 1.0 / grid.kernel(k) } else { 0.0 })
            .collect();
        Ok(RegularizedPropagator { grid: *grid, weights, band, regularization: Regularization::Sharp { ir, uv } })
    }

    /// Smooth shell between `ir` and `uv` as a difference of cutoff profiles.
    pub fn smooth(grid: &MomentumGrid, ir: f64, uv: f64) -> Result<Self, FieldsError> {
        check_cutoffs(ir, uv)?;
        let weights: Vec<f64> = (0..grid.len())
            .map(|k| {
                let p = grid.momentum(k);
                let full = 1.0 / grid.kernel(k);
                if ir == 0.0 {
                    full * cutoff_profile(p, uv)
                } else if uv.is_infinite() {
                    full - full * cutoff_profile(p, ir)
                } else {
                    full * cutoff_profile(p, uv) - full * cutoff_profile(p, ir)
                }
            })
            .collect();
        let band = weights.iter().map(|w| *w > 0.0).collect();
        Ok(RegularizedPropagator { grid: *grid, weights, band, regularization: Regularization::Smooth { ir, uv } })
    }

    /// Unregularized `1/(p²+m²)` on every mode.
    pub fn full(grid: &MomentumGrid) -> Self {
        Self::sharp(grid, 0.0, f64::INFINITY).expect("valid cutoffs")
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn band(&self) -> &[bool] {
        &self.band
    }

    pub fn in_band(&self, k: usize) -> bool {
        self.band[k]
    }

    pub fn regularization(&self) -> Regularization {
        self.regularization
    }

    pub(crate) fn composite(grid: MomentumGrid, weights: Vec<f64>) -> Self {
        let band = weights.iter().map(|w| *w > 0.0).collect();
        RegularizedPropagator { grid, weights, band, regularization: Regularization::Composite }
    }
}

/// `Σ_{x,y} K(x−y) φ(x) φ(y)` with the translation-invariant kernel built
/// from `K̃(p) = p² + m²` by discrete Fourier transform.
pub fn free_action_position(phi: &FieldVector, grid: &MomentumGrid) -> Result<f64, FieldsError> {
    let n = grid.len();
    if phi.len() != n {
        return Err(FieldsError::LengthMismatch { expected: n, got: phi.len() });
    }
    let field = phi.to_position(grid);
    let kernel: Vec<Complex64> = (0..n)
        .map(|r| (0..n).map(|k| grid.kernel(k) * grid.phase(k, r)).sum::<Complex64>() / n as f64)
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for x in 0..n {
        for y in 0..n {
            total += kernel[(x + n - y) % n] * field[x] * field[y];
        }
    }
    Ok(total.re)
}

/// `Σ_p K̃⁻¹(p)^{-1} φ̃(p) φ̃(−p)` over the propagator's band.
pub fn free_action_momentum(phi: &FieldVector, prop: &RegularizedPropagator) -> Result<f64, FieldsError> {
    let grid = prop.grid();
    if phi.len() != grid.len() {
        return Err(FieldsError::LengthMismatch { expected: grid.len(), got: phi.len() });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..grid.len() {
        let a = phi.amplitude(k);
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        if !prop.in_band(k) {
            return Err(FieldsError::OutsideBand(k));
        }
        total += a * phi.amplitude(grid.neg(k)) / prop.weight(k);
    }
    Ok(total.re)
}

/// Real field with amplitudes uniform in `[−1, 1]` (real and imaginary
/// parts) on the modes allowed by `mask`.
pub fn random_real_field<R: Rng>(grid: &MomentumGrid, rng: &mut R, mask: Option<&[bool]>) -> FieldVector {
    let half: Vec<Complex64> = (0..=grid.len() / 2)
        .map(|k| {
            if !mask.is_none_or(|m| m[k]) {
                Complex64::new(0.0, 0.0)
            } else if grid.is_self_conjugate(k) {
                Complex64::new(rng.random_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }
        })
        .collect();
    FieldVector::real_from_half(grid, &half).expect("half-spectrum has the right length")
}

/// Cross term `S(φ+η) − S(φ) − S(η) = 2 Σ_p K̃(p) φ̃(p) η̃(−p)`; it vanishes
/// identically when `(−supp φ̃) ∩ supp η̃ = ∅`.
pub fn support_cross_term(phi: &FieldVector, eta: &FieldVector, grid: &MomentumGrid) -> f64 {
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..grid.len() {
        total += grid.kernel(k) * phi.amplitude(k) * eta.amplitude(grid.neg(k));
    }
    2.0 * total.re
}

/// True when `(−supp φ̃) ∩ supp η̃ = ∅`.
pub fn supports_separated(phi: &FieldVector, eta: &FieldVector, grid: &MomentumGrid) -> bool {
    let eta_support = eta.support();
    phi.support().iter().all(|k| !eta_support.contains(&grid.neg(*k)))
}
