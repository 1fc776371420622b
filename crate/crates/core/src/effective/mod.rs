//! Wilson effective action (integrating out a momentum shell) and the
//! Legendre effective action of a one-dimensional measure.

mod legendre;
mod mean_law;

pub use legendre::{
    cumulant_generator, legendre_transform, zeta_with_rate, CumulantGenerator, Cumulants, LegendrePoint, MeasureSpec, RateFunction,
};
pub use mean_law::{empirical_mean_law, star_l_associativity, AssociativityReport, MeanLawConfig, MeanLawHistogram};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{FieldVector, FieldsError, GaussianMeasure, MomentumGrid, RegularizedPropagator};
use crate::quadrature::{gauss_hermite_normal, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EffectiveError {
    #[error(transparent)]
    Fields(#[from] FieldsError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid interaction: {0}")]
    InvalidSpec(String),
    #[error("cutoffs must satisfy 0 <= Lambda <= Lambda0, got {lambda} and {lambda0}")]
    BadCutoffs { lambda: f64, lambda0: f64 },
    #[error("quadrature method supports at most {max} shell modes, got {got}")]
    TooManyShellModes { got: usize, max: usize },
    #[error("quadrature over {got} real dimensions exceeds the limit of {max}")]
    TooManyDimensions { got: usize, max: usize },
    #[error("exact-quadratic method needs a purely quadratic interaction")]
    NotQuadratic,
    #[error("integrand is unbounded below on the quadrature box")]
    Unbounded,
    #[error("source must be low-band (mode {0} is outside)")]
    SourceNotLowBand(usize),
    #[error("zeta not attained: {zeta} is outside the range of W' found on [{lo}, {hi}]")]
    ZetaNotAttained { zeta: f64, lo: f64, hi: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Local polynomial interaction `S_int(φ) = Σ_terms c_d Σ_x φ(x)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    terms: Vec<(u32, f64)>,
}

impl InteractionSpec {
    pub fn new(terms: Vec<(u32, f64)>) -> Result<Self, EffectiveError> {
        for (d, c) in &terms {
            if !(2..=4).contains(d) {
                return Err(EffectiveError::InvalidSpec(format!("unsupported degree {d}")));
            }
            if !c.is_finite() {
                return Err(EffectiveError::InvalidSpec(format!("coefficient {c} of degree {d}")));
            }
        }
        Ok(InteractionSpec { terms: terms.into_iter().filter(|(_, c)| *c != 0.0).collect() })
    }

    /// From couplings `g_m` in the normalization `g_m/m! Q_m(φ,…,φ)`.
    pub fn from_couplings(couplings: &[(u32, f64)]) -> Result<Self, EffectiveError> {
        let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
        Self::new(couplings.iter().map(|(m, g)| (*m, g / fact(*m))).collect())
    }

    pub fn zero() -> Self {
        InteractionSpec { terms: Vec::new() }
    }

    pub fn quadratic(q: f64) -> Result<Self, EffectiveError> {
        Self::new(vec![(2, q)])
    }

    pub fn quartic(g: f64) -> Result<Self, EffectiveError> {
        Self::new(vec![(4, g)])
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total coefficient `q` when the interaction is `q Σ_x φ(x)²`.
    pub fn quadratic_coefficient(&self) -> Option<f64> {
        self.terms.iter().all(|(d, _)| *d == 2).then(|| self.terms.iter().map(|(_, c)| c).sum())
    }

    /// Whether `e^{−S_int}` is integrable against a Gaussian with the given
    /// per-mode weights: the top-degree term must be even with a positive
    /// coefficient, or the quadratic part must not cancel the Gaussian.
    pub fn integrable_against(&self, weights: &[f64]) -> bool {
        let top = self.terms.iter().map(|(d, _)| *d).max();
        match top {
            None => true,
            Some(2) => {
                let q = self.quadratic_coefficient().unwrap_or(0.0);
                weights.iter().all(|w| *w == 0.0 || 1.0 + 2.0 * q * w > 0.0)
            }
            Some(d) => {
                let c: f64 = self.terms.iter().filter(|(e, _)| *e == d).map(|(_, c)| c).sum();
                d % 2 == 0 && c > 0.0
            }
        }
    }

    pub fn eval(&self, phi: &FieldVector, grid: &MomentumGrid) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let values = phi.to_position(grid);
        values
            .iter()
            .map(|v| self.terms.iter().map(|(d, c)| c * v.re.powi(*d as i32)).sum::<f64>())
            .sum()
    }
}

/// One real Gaussian coordinate of a band: the real part of a
/// self-conjugate mode, or the real/imaginary part of a conjugate pair.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Coord {
    mode: usize,
    imag: bool,
    variance: f64,
}

fn coords(prop: &RegularizedPropagator) -> Vec<Coord> {
    let grid = prop.grid();
    let mut out = Vec::new();
    for k in 0..=grid.len() / 2 {
        if !prop.in_band(k) {
            continue;
        }
        let w = prop.weight(k);
        if grid.is_self_conjugate(k) {
            out.push(Coord { mode: k, imag: false, variance: w });
        } else {
            out.push(Coord { mode: k, imag: false, variance: w / 2.0 });
            out.push(Coord { mode: k, imag: true, variance: w / 2.0 });
        }
    }
    out
}

fn assemble(grid: &MomentumGrid, base: &FieldVector, cs: &[Coord], x: &[f64]) -> FieldVector {
    let mut amps = base.amplitudes().to_vec();
    for (c, v) in cs.iter().zip(x) {
        let z = if c.imag { Complex64::new(0.0, *v) } else { Complex64::new(*v, 0.0) };
        amps[c.mode] += z;
        if !grid.is_self_conjugate(c.mode) {
            amps[grid.neg(c.mode)] += z.conj();
        }
    }
    FieldVector::real_unchecked(amps)
}

/// `⟨J, φ⟩ = Σ_p J̃(p) φ̃(−p)`.
pub fn pairing(j: &FieldVector, phi: &FieldVector, grid: &MomentumGrid) -> f64 {
    (0..grid.len())
        .map(|k| j.amplitude(k) * phi.amplitude(grid.neg(k)))
        .sum::<Complex64>()
        .re
}

/// Calls `f` at every node of a tensor Gauss–Hermite rule over the given
/// coordinates and returns `ln E[exp(f)]`, computed with a max shift.
fn log_gaussian_expectation(cs: &[Coord], nodes: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let (xs, ws) = gauss_hermite_normal(nodes);
    let d = cs.len();
    let sd: Vec<f64> = cs.iter().map(|c| c.variance.sqrt()).collect();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut logs = Vec::with_capacity(nodes.pow(d as u32));
    loop {
        let mut lw = 0.0;
        for k in 0..d {
            point[k] = sd[k] * xs[idx[k]];
            lw += ws[idx[k]].ln();
        }
        logs.push(lw + f(&point));
        let mut k = 0;
        loop {
            if k == d {
                let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                return m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
            }
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Rejects integrands whose log grows towards the edge of the ±8σ box.
fn check_box(cs: &[Coord], log_integrand: impl Fn(&[f64]) -> f64) -> Result<(), EffectiveError> {
    let d = cs.len();
    let centre = log_integrand(&vec![0.0; d]);
    let sd: Vec<f64> = cs.iter().map(|c| c.variance.sqrt()).collect();
    let mut probes: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        for s in [-8.0, 8.0] {
            let mut p = vec![0.0; d];
            p[k] = s * sd[k];
            probes.push(p);
        }
    }
    for mask in 0..(1usize << d) {
        probes.push((0..d).map(|k| if mask >> k & 1 == 1 { 8.0 * sd[k] } else { -8.0 * sd[k] }).collect());
    }
    for p in probes {
        let l = log_integrand(&p);
        if !l.is_finite() || l > centre {
            return Err(EffectiveError::Unbounded);
        }
    }
    Ok(())
}

pub const MAX_SHELL_MODES: usize = 3;
pub const MAX_WEQ_DIMENSIONS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum WilsonMethod {
    ExactQuadratic,
    Quadrature { nodes: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl WilsonMethod {
    pub fn name(&self) -> &'static str {
        match self {
            WilsonMethod::ExactQuadratic => "exact-quadratic",
            WilsonMethod::Quadrature { .. } => "quadrature",
            WilsonMethod::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// `S_eff(φ)` and, for Monte Carlo, its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffValue {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Wilson effective action on the low band `[0, Λ)` after integrating out
/// the sharp shell `[Λ, Λ₀)`.
#[derive(Clone, Debug)]
pub struct EffectiveAction {
    spec: InteractionSpec,
    grid: MomentumGrid,
    lambda: f64,
    lambda0: f64,
    method: WilsonMethod,
    low: RegularizedPropagator,
    shell: RegularizedPropagator,
    constant: f64,
    shell_draws: Vec<FieldVector>,
}

pub fn wilson_effective(
    spec: &InteractionSpec,
    grid: &MomentumGrid,
    lambda: f64,
    lambda0: f64,
    method: WilsonMethod,
) -> Result<EffectiveAction, EffectiveError> {
    if !(lambda >= 0.0 && lambda <= lambda0) {
        return Err(EffectiveError::BadCutoffs { lambda, lambda0 });
    }
    let low = RegularizedPropagator::sharp(grid, 0.0, lambda)?;
    let shell = RegularizedPropagator::sharp(grid, lambda, lambda0)?;
    let shell_modes = shell.band().iter().filter(|b| **b).count();
    if !spec.integrable_against(shell.weights()) {
        return Err(EffectiveError::Unbounded);
    }
    let mut constant = 0.0;
    let mut shell_draws = Vec::new();
    match method {
        WilsonMethod::ExactQuadratic => {
            let q = spec.quadratic_coefficient().ok_or(EffectiveError::NotQuadratic)?;
            for k in 0..grid.len() {
                if shell.in_band(k) {
                    constant += 0.5 * (1.0 + 2.0 * q * shell.weight(k)).ln();
                }
            }
        }
        WilsonMethod::Quadrature { nodes } => {
            if shell_modes > MAX_SHELL_MODES {
                return Err(EffectiveError::TooManyShellModes { got: shell_modes, max: MAX_SHELL_MODES });
            }
            if nodes < 2 {
                return Err(EffectiveError::Invalid("quadrature needs at least 2 nodes".into()));
            }
        }
        WilsonMethod::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(EffectiveError::Invalid("Monte Carlo needs at least 2 samples".into()));
            }
            shell_draws = GaussianMeasure::new(shell.clone()).sample(seed, samples);
        }
    }
    Ok(EffectiveAction {
        spec: spec.clone(),
        grid: *grid,
        lambda,
        lambda0,
        method,
        low,
        shell,
        constant,
        shell_draws,
    })
}

impl EffectiveAction {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn method(&self) -> WilsonMethod {
        self.method
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn low_band(&self) -> &RegularizedPropagator {
        &self.low
    }

    pub fn shell_band(&self) -> &RegularizedPropagator {
        &self.shell
    }

    /// Field-independent part of `S_eff`, reported separately for the
    /// closed-form method and folded into the values otherwise.
    pub fn additive_constant(&self) -> f64 {
        self.constant
    }

    /// `S_eff(φ) = −ln ∫ dμ_shell(η) e^{−S_int(φ+η)}` for a low-band `φ`.
    pub fn evaluate(&self, phi: &FieldVector) -> Result<EffValue, EffectiveError> {
        for k in phi.support() {
            if !self.low.in_band(k) {
                return Err(FieldsError::OutsideBand(k).into());
            }
        }
        let grid = &self.grid;
        if self.spec.is_zero() {
            return Ok(EffValue { value: 0.0, std_error: None });
        }
        match self.method {
            WilsonMethod::ExactQuadratic => {
                let q = self.spec.quadratic_coefficient().ok_or(EffectiveError::NotQuadratic)?;
                let norm: f64 = (0..grid.len())
                    .map(|k| (phi.amplitude(k) * phi.amplitude(grid.neg(k))).re)
                    .sum();
                Ok(EffValue { value: q * norm + self.constant, std_error: None })
            }
            WilsonMethod::Quadrature { nodes } => {
                let cs = coords(&self.shell);
                let s_int = |x: &[f64]| self.spec.eval(&assemble(grid, phi, &cs, x), grid);
                check_box(&cs, |x| {
                    -0.5 * cs.iter().zip(x).map(|(c, v)| v * v / c.variance).sum::<f64>() - s_int(x)
                })?;
                let log_e = log_gaussian_expectation(&cs, nodes, |x| -s_int(x));
                Ok(EffValue { value: -log_e, std_error: None })
            }
            WilsonMethod::MonteCarlo { .. } => {
                let logs: Vec<f64> = self
                    .shell_draws
                    .iter()
                    .map(|eta| -self.spec.eval(&phi.add(eta), grid))
                    .collect();
                let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let vals: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
                let count = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / count;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
                Ok(EffValue { value: -(mean.ln() + m), std_error: Some((var / count).sqrt() / mean) })
            }
        }
    }

    /// `S_eff` along the real amplitude of low-band mode `k`.
    pub fn tabulate_mode(&self, k: usize, amplitudes: &[f64]) -> Result<Vec<TableRow>, EffectiveError> {
        if k >= self.grid.len() {
            return Err(FieldsError::NoSuchMode(k).into());
        }
        amplitudes
            .iter()
            .map(|a| {
                let mut amps = vec![Complex64::new(0.0, 0.0); self.grid.len()];
                amps[k] = Complex64::new(*a, 0.0);
                amps[self.grid.neg(k)] = Complex64::new(*a, 0.0);
                let phi = FieldVector::real_unchecked(amps);
                let v = self.evaluate(&phi)?;
                Ok(TableRow { amplitude: *a, s_eff: v.value, s_int: self.spec.eval(&phi, &self.grid), std_error: v.std_error })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub amplitude: f64,
    pub s_eff: f64,
    pub s_int: f64,
    pub std_error: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeqReport {
    /// `∫ dμ_{[0,Λ)}(φ) e^{−S_eff(φ) + ⟨J,φ⟩}`.
    pub z_lambda: f64,
    /// `∫ dμ_{[0,Λ₀)}(ψ) e^{−S_int(ψ) + ⟨J,ψ⟩}`.
    pub z_lambda0: f64,
    pub deviation: f64,
}

/// Compares both sides of the effective-action identity for a low-band
/// source. Closed forms are used for the exact-quadratic method, tensor
/// Gauss–Hermite with `nodes` per axis otherwise.
pub fn check_weq(spec: &InteractionSpec, eff: &EffectiveAction, j: &FieldVector, nodes: usize) -> Result<WeqReport, EffectiveError> {
    let grid = eff.grid();
    if j.len() != grid.len() {
        return Err(FieldsError::LengthMismatch { expected: grid.len(), got: j.len() }.into());
    }
    if let Some(k) = j.support().into_iter().find(|k| !eff.low.in_band(*k)) {
        return Err(EffectiveError::SourceNotLowBand(k));
    }
    let full = RegularizedPropagator::sharp(grid, 0.0, eff.lambda0)?;
    let low_cs = coords(&eff.low);
    let full_cs = coords(&full);
    let (log_low, log_full) = match (eff.method, spec.quadratic_coefficient()) {
        (WilsonMethod::ExactQuadratic, Some(q)) => (
            closed_form_log(&low_cs, q, j, grid) - eff.constant,
            closed_form_log(&full_cs, q, j, grid),
        ),
        _ => {
            if full_cs.len() > MAX_WEQ_DIMENSIONS {
                return Err(EffectiveError::TooManyDimensions { got: full_cs.len(), max: MAX_WEQ_DIMENSIONS });
            }
            let zero = FieldVector::zeros(grid, true);
            let mut failure = None;
            let log_low = log_gaussian_expectation(&low_cs, nodes, |x| {
                let phi = assemble(grid, &zero, &low_cs, x);
                match eff.evaluate(&phi) {
                    Ok(v) => pairing(j, &phi, grid) - v.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NEG_INFINITY
                    }
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            let log_full = log_gaussian_expectation(&full_cs, nodes, |x| {
                let psi = assemble(grid, &zero, &full_cs, x);
                pairing(j, &psi, grid) - spec.eval(&psi, grid)
            });
            (log_low, log_full)
        }
    };
    let (z_lambda, z_lambda0) = (log_low.exp(), log_full.exp());
    Ok(WeqReport { z_lambda, z_lambda0, deviation: (log_low - log_full).exp_m1().abs() })
}

/// `ln E[exp(−q Σ_x φ² + ⟨J,φ⟩)]`, one independent Gaussian factor per
/// real coordinate.
fn closed_form_log(cs: &[Coord], q: f64, j: &FieldVector, grid: &MomentumGrid) -> f64 {
    cs.iter()
        .map(|c| {
            let pair = !grid.is_self_conjugate(c.mode);
            let jz = j.amplitude(c.mode);
            let (alpha, beta) = if pair {
                (2.0 * q, 2.0 * if c.imag { jz.im } else { jz.re })
            } else {
                (q, jz.re)
            };
            let s = 1.0 + 2.0 * alpha * c.variance;
            -0.5 * s.ln() + beta * beta * c.variance / (2.0 * s)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn toy_grid() -> MomentumGrid {
        MomentumGrid::new(2, 1.0).unwrap()
    }

    fn low_source(grid: &MomentumGrid, value: f64) -> FieldVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); grid.len()];
        amps[0] = Complex64::new(value, 0.0);
        FieldVector::from_amplitudes(grid, amps, true).unwrap()
    }

    #[test]
    fn zero_interaction_gives_zero() {
        let g = toy_grid();
        let eff = wilson_effective(&InteractionSpec::zero(), &g, 1.0, 4.0, WilsonMethod::Quadrature { nodes: 8 }).unwrap();
        let v = eff.evaluate(&low_source(&g, 0.7)).unwrap();
        assert_eq!(v.value, 0.0);
        let r = check_weq(&InteractionSpec::zero(), &eff, &low_source(&g, 0.4), 16).unwrap();
        assert!(r.deviation < 1e-14);
    }

    #[test]
    fn quadratic_closed_form() {
        let g = MomentumGrid::new(8, 1.0).unwrap();
        let q = 0.3;
        let spec = InteractionSpec::quadratic(q).unwrap();
        let eff = wilson_effective(&spec, &g, 1.0, 10.0, WilsonMethod::ExactQuadratic).unwrap();
        let shell = eff.shell_band();
        let want: f64 = (0..8).filter(|k| shell.in_band(*k)).map(|k| 0.5 * (1.0 + 2.0 * q * shell.weight(k)).ln()).sum();
        assert!((eff.additive_constant() - want).abs() < 1e-15);
        let j = low_source(&g, 0.8);
        let r = check_weq(&spec, &eff, &j, 0).unwrap();
        assert!(r.deviation < 1e-8);
    }

    #[test]
    fn quadratic_quadrature_matches_closed_form() {
        let g = toy_grid();
        let spec = InteractionSpec::quadratic(0.2).unwrap();
        let exact = wilson_effective(&spec, &g, 1.0, 4.0, WilsonMethod::ExactQuadratic).unwrap();
        let quad = wilson_effective(&spec, &g, 1.0, 4.0, WilsonMethod::Quadrature { nodes: 20 }).unwrap();
        let phi = low_source(&g, 0.9);
        assert!((exact.evaluate(&phi).unwrap().value - quad.evaluate(&phi).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn quartic_toy_identity() {
        let g = toy_grid();
        assert!((g.momentum(1) - PI).abs() < 1e-15);
        let spec = InteractionSpec::quartic(0.1).unwrap();
        let eff = wilson_effective(&spec, &g, 1.0, 4.0, WilsonMethod::Quadrature { nodes: 40 }).unwrap();
        let r = check_weq(&spec, &eff, &low_source(&g, 0.3), 48).unwrap();
        assert!(r.deviation < 1e-6, "{r:?}");
    }

    #[test]
    fn empty_shell_returns_interaction() {
        let g = toy_grid();
        let spec = InteractionSpec::quartic(0.1).unwrap();
        let eff = wilson_effective(&spec, &g, 4.0, 4.0, WilsonMethod::Quadrature { nodes: 10 }).unwrap();
        let phi = low_source(&g, 1.3);
        assert!((eff.evaluate(&phi).unwrap().value - spec.eval(&phi, &g)).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_reports_error() {
        let g = toy_grid();
        let spec = InteractionSpec::quartic(0.1).unwrap();
        let mc = wilson_effective(&spec, &g, 1.0, 4.0, WilsonMethod::MonteCarlo { samples: 20_000, seed: 3 }).unwrap();
        let quad = wilson_effective(&spec, &g, 1.0, 4.0, WilsonMethod::Quadrature { nodes: 40 }).unwrap();
        let phi = low_source(&g, 0.5);
        let a = mc.evaluate(&phi).unwrap();
        let b = quad.evaluate(&phi).unwrap();
        let se = a.std_error.unwrap();
        assert!(se > 0.0 && (a.value - b.value).abs() < 5.0 * se);
    }

    #[test]
    fn errors() {
        let g = toy_grid();
        let quartic = InteractionSpec::quartic(0.1).unwrap();
        assert!(matches!(
            wilson_effective(&quartic, &g, 1.0, 4.0, WilsonMethod::ExactQuadratic),
            Err(EffectiveError::NotQuadratic)
        ));
        assert!(wilson_effective(&quartic, &g, 5.0, 4.0, WilsonMethod::ExactQuadratic).is_err());
        let big = MomentumGrid::new(8, 1.0).unwrap();
        assert!(matches!(
            wilson_effective(&quartic, &big, 0.5, 10.0, WilsonMethod::Quadrature { nodes: 4 }),
            Err(EffectiveError::TooManyShellModes { .. })
        ));
        let negative = InteractionSpec::quartic(-0.1).unwrap();
        assert!(matches!(
            wilson_effective(&negative, &g, 1.0, 4.0, WilsonMethod::Quadrature { nodes: 8 }),
            Err(EffectiveError::Unbounded)
        ));
        let cubic = InteractionSpec::new(vec![(3, 0.5)]).unwrap();
        assert!(wilson_effective(&cubic, &g, 1.0, 4.0, WilsonMethod::Quadrature { nodes: 8 }).is_err());
        let steep = InteractionSpec::quadratic(-20.0).unwrap();
        assert!(wilson_effective(&steep, &g, 1.0, 4.0, WilsonMethod::ExactQuadratic).is_err());

        let eff = wilson_effective(&quartic, &g, 1.0, 4.0, WilsonMethod::Quadrature { nodes: 8 }).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 2];
        amps[1] = Complex64::new(1.0, 0.0);
        let shell_source = FieldVector::from_amplitudes(&g, amps, true).unwrap();
        assert_eq!(check_weq(&quartic, &eff, &shell_source, 8).unwrap_err(), EffectiveError::SourceNotLowBand(1));
        assert!(InteractionSpec::new(vec![(5, 1.0)]).is_err());
    }

    #[test]
    fn couplings_normalization() {
        let s = InteractionSpec::from_couplings(&[(4, 2.4)]).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].0, 4);
        assert!((s.terms()[0].1 - 0.1).abs() < 1e-16);
    }
}
