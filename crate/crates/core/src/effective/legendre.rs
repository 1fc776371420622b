use serde::{Deserialize, Serialize};

use super::EffectiveError;
use crate::quadrature::moments_peaked;

/// One-dimensional measure `dμ_S ∝ e^{−S(φ)} dφ` with
/// `S(φ) = φ²/(2σ²) + c₃ φ³ + c₄ φ⁴`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub variance: f64,
    pub cubic: f64,
    pub quartic: f64,
}

impl MeasureSpec {
    pub fn gaussian(variance: f64) -> Self {
        MeasureSpec { variance, cubic: 0.0, quartic: 0.0 }
    }

    /// `½φ² + g φ⁴`.
    pub fn quartic(g: f64) -> Self {
        MeasureSpec { variance: 1.0, cubic: 0.0, quartic: g }
    }

    pub fn validate(&self) -> Result<(), EffectiveError> {
        let finite = self.variance.is_finite() && self.cubic.is_finite() && self.quartic.is_finite();
        if !finite || self.variance <= 0.0 {
            return Err(EffectiveError::InvalidSpec(format!("variance {} must be positive", self.variance)));
        }
        if self.quartic < 0.0 || (self.quartic == 0.0 && self.cubic != 0.0) {
            return Err(EffectiveError::InvalidSpec("action is unbounded below".into()));
        }
        Ok(())
    }

    pub fn action(&self, x: f64) -> f64 {
        let x2 = x * x;
        0.5 * x2 / self.variance + self.cubic * x2 * x + self.quartic * x2 * x2
    }

    pub fn is_gaussian(&self) -> bool {
        self.cubic == 0.0 && self.quartic == 0.0
    }
}

/// `W(J) = ln E_{μ_S}[e^{Jφ}]` by adaptive quadrature around the mode of
/// the tilted density.
#[derive(Clone, Copy, Debug)]
pub struct CumulantGenerator {
    spec: MeasureSpec,
    log_z0: f64,
}

/// `W`, `W'` and `W''` at one source value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cumulants {
    pub w: f64,
    pub mean: f64,
    pub variance: f64,
}

impl CumulantGenerator {
    pub fn new(spec: MeasureSpec) -> Result<Self, EffectiveError> {
        spec.validate()?;
        let mut g = CumulantGenerator { spec, log_z0: 0.0 };
        g.log_z0 = g.tilted(0.0)?.w;
        Ok(g)
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    fn tilted(&self, j: f64) -> Result<Cumulants, EffectiveError> {
        let spec = self.spec;
        let scale = spec.variance.sqrt();
        // Mode of the dominant term of the tilted action.
        let mut guess = j * spec.variance;
        if spec.quartic > 0.0 {
            let quartic_mode = (j.abs() / (4.0 * spec.quartic)).cbrt();
            guess = guess.signum() * guess.abs().min(quartic_mode);
        }
        let m = moments_peaked(|x| j * x - spec.action(x), guess, scale)?;
        Ok(Cumulants { w: m.log_integral - self.log_z0, mean: m.mean, variance: m.variance })
    }

    pub fn w(&self, j: f64) -> Result<f64, EffectiveError> {
        Ok(self.tilted(j)?.w)
    }

    pub fn cumulants(&self, j: f64) -> Result<Cumulants, EffectiveError> {
        self.tilted(j)
    }

    /// `⟨φ⟩ = W'(0)`.
    pub fn mean(&self) -> Result<f64, EffectiveError> {
        Ok(self.tilted(0.0)?.mean)
    }

    pub fn legendre(&self, zeta: f64) -> Result<LegendrePoint, EffectiveError> {
        legendre_transform(|j| self.cumulants(j), zeta)
    }

    pub fn rate_function(&self, zetas: &[f64]) -> Result<RateFunction, EffectiveError> {
        let points = zetas.iter().map(|z| self.legendre(*z)).collect::<Result<Vec<_>, _>>()?;
        Ok(RateFunction { points })
    }
}

pub fn cumulant_generator(spec: &MeasureSpec, j: f64) -> Result<f64, EffectiveError> {
    CumulantGenerator::new(*spec)?.w(j)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LegendrePoint {
    pub zeta: f64,
    pub gamma: f64,
    /// Maximizing source; equals `Γ'(ζ)`.
    pub j_star: f64,
    pub iterations: usize,
}

const MAX_SOURCE: f64 = 1e6;

/// `Γ(ζ) = sup_J {ζJ − W(J)}` by safeguarded Newton on `W'(J) = ζ`.
pub fn legendre_transform<F>(w: F, zeta: f64) -> Result<LegendrePoint, EffectiveError>
where
    F: Fn(f64) -> Result<Cumulants, EffectiveError>,
{
    if !zeta.is_finite() {
        return Err(EffectiveError::ZetaNotAttained { zeta, lo: 0.0, hi: 0.0 });
    }
    let not_attained = |lo: f64, hi: f64| EffectiveError::ZetaNotAttained { zeta, lo, hi };
    let mut lo = -1.0;
    while w(lo).map_err(|_| not_attained(lo, 1.0))?.mean > zeta {
        lo *= 2.0;
        if lo < -MAX_SOURCE {
            return Err(not_attained(lo, 1.0));
        }
    }
    let mut hi = 1.0;
    while w(hi).map_err(|_| not_attained(lo, hi))?.mean < zeta {
        hi *= 2.0;
        if hi > MAX_SOURCE {
            return Err(not_attained(lo, hi));
        }
    }

    let mut j = 0.5 * (lo + hi);
    let mut c = w(j)?;
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let resid = c.mean - zeta;
        if resid.abs() <= 1e-13 * zeta.abs().max(1.0) {
            break;
        }
        if resid > 0.0 {
            hi = j;
        } else {
            lo = j;
        }
        let newton = j - resid / c.variance;
        let next = if c.variance > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - j).abs() <= 1e-15 * j.abs().max(1.0) {
            break;
        }
        j = next;
        c = w(j)?;
    }
    Ok(LegendrePoint { zeta, gamma: zeta * j - c.w, j_star: j, iterations })
}

/// `Γ` sampled on a grid of `ζ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFunction {
    pub points: Vec<LegendrePoint>,
}

impl RateFunction {
    /// Discrete midpoint convexity on consecutive equally spaced triples.
    pub fn is_midpoint_convex(&self, tol: f64) -> bool {
        self.points.windows(3).all(|t| {
            let spaced = ((t[1].zeta - t[0].zeta) - (t[2].zeta - t[1].zeta)).abs() < 1e-12;
            !spaced || t[1].gamma <= 0.5 * (t[0].gamma + t[2].gamma) + tol
        })
    }

    pub fn argmin(&self) -> Option<&LegendrePoint> {
        self.points.iter().min_by(|a, b| a.gamma.total_cmp(&b.gamma))
    }
}

/// Smallest `ζ > ⟨φ⟩` with `Γ(ζ) = target`, by bisection on `ζ`.
pub fn zeta_with_rate(generator: &CumulantGenerator, target: f64) -> Result<f64, EffectiveError> {
    if !(target > 0.0) {
        return Err(EffectiveError::Invalid("target rate must be positive".into()));
    }
    let mean = generator.mean()?;
    let sd = generator.cumulants(0.0)?.variance.sqrt();
    let mut lo = mean;
    let mut hi = mean + sd;
    while generator.legendre(hi)?.gamma < target {
        lo = hi;
        hi += 2.0 * (hi - mean);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if generator.legendre(mid)?.gamma < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
