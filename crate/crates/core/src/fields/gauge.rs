//! Two-field Gaussian toy: `φ ∈ ℝ²` coupled to `A ∈ ℝ` only through a
//! linear map `Σ(A)` acting on `φ`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::FieldsError;
use crate::quadrature::{gauss_hermite_normal, integrate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaFamily {
    Identity,
    /// Rotation by angle `A`.
    Rotation,
    /// `diag(e^A, e^{−A})`.
    Squeeze,
    /// `e^A · I`; changes the determinant.
    Dilation,
}

impl SigmaFamily {
    pub fn matrix(self, a: f64) -> Matrix2<f64> {
        match self {
            SigmaFamily::Identity => Matrix2::identity(),
            SigmaFamily::Rotation => Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos()),
            SigmaFamily::Squeeze => Matrix2::new(a.exp(), 0.0, 0.0, (-a).exp()),
            SigmaFamily::Dilation => Matrix2::identity() * a.exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SigmaFamily::Identity => "identity",
            SigmaFamily::Rotation => "rotation",
            SigmaFamily::Squeeze => "squeeze",
            SigmaFamily::Dilation => "dilation",
        }
    }
}

impl std::str::FromStr for SigmaFamily {
    type Err = FieldsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(SigmaFamily::Identity),
            "rotation" => Ok(SigmaFamily::Rotation),
            "squeeze" => Ok(SigmaFamily::Squeeze),
            "dilation" => Ok(SigmaFamily::Dilation),
            other => Err(FieldsError::Gauge(format!("unknown Sigma family '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeModel {
    /// Symmetric positive-definite form on `φ`.
    pub b_m: [[f64; 2]; 2],
    /// Positive form on `A`.
    pub b_g: f64,
    pub sigma: SigmaFamily,
}

impl GaugeModel {
    pub fn new(sigma: SigmaFamily) -> Self {
        GaugeModel { b_m: [[2.0, 0.5], [0.5, 1.0]], b_g: 1.5, sigma }
    }

    fn b_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.b_m[0][0], self.b_m[0][1], self.b_m[1][0], self.b_m[1][1])
    }

    fn validate(&self) -> Result<(), FieldsError> {
        let b = self.b_matrix();
        if b[(0, 1)] != b[(1, 0)] || b.cholesky().is_none() {
            return Err(FieldsError::Gauge("B_m must be symmetric positive definite".into()));
        }
        if !(self.b_g.is_finite() && self.b_g > 0.0) {
            return Err(FieldsError::Gauge("B_g must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Gauss–Hermite nodes for `A`.
    pub outer_nodes: usize,
    /// Gauss–Hermite nodes per axis for `φ` after whitening.
    pub inner_nodes: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { outer_nodes: 80, inner_nodes: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeReport {
    pub sigma: SigmaFamily,
    pub z: f64,
    pub z_m: f64,
    pub z_g: f64,
    /// `|Z − Z_m Z_g| / (Z_m Z_g)`.
    pub relative_deviation: f64,
    pub det_preserving: bool,
    pub factorization_asserted: bool,
    pub warning: Option<String>,
}

/// `∫dφ e^{−½ φᵀ Q φ}` by Gauss–Hermite after whitening with the Cholesky
/// factor of `Q`; the integrand itself is evaluated through `form`.
fn inner_integral(q: &Matrix2<f64>, nodes: &[f64], weights: &[f64], form: impl Fn(&Vector2<f64>) -> f64) -> Result<f64, FieldsError> {
    let chol = q
        .cholesky()
        .ok_or_else(|| FieldsError::Gauge("quadratic form is not positive definite".into()))?;
    let l = chol.l();
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| FieldsError::Gauge("singular Cholesky factor".into()))?;
    let det_l = l[(0, 0)] * l[(1, 1)];
    let mut acc = 0.0;
    for (x, wx) in nodes.iter().zip(weights) {
        for (y, wy) in nodes.iter().zip(weights) {
            let u = Vector2::new(*x, *y);
            let phi = lt_inv * u;
            acc += wx * wy * (-0.5 * form(&phi) + 0.5 * u.norm_squared()).exp();
        }
    }
    Ok(2.0 * PI * acc / det_l)
}

/// `Z = ∫dφ ∫dA e^{−½ B_m(Σ(A)φ, Σ(A)φ)} e^{−½ B_g A²}` together with the
/// decoupled factors `Z_m`, `Z_g`.
pub fn gauge_partition(model: &GaugeModel, settings: &QuadratureSettings) -> Result<GaugeReport, FieldsError> {
    model.validate()?;
    if settings.outer_nodes < 2 || settings.inner_nodes < 2 {
        return Err(FieldsError::Gauge("at least 2 quadrature nodes per axis".into()));
    }
    let b = model.b_matrix();
    let (inner_x, inner_w) = gauss_hermite_normal(settings.inner_nodes);
    let (outer_x, outer_w) = gauss_hermite_normal(settings.outer_nodes);
    let sd_a = 1.0 / model.b_g.sqrt();

    let z_m = inner_integral(&b, &inner_x, &inner_w, |phi| (phi.transpose() * b * phi)[(0, 0)])?;
    let z_g = integrate(|a| (-0.5 * model.b_g * a * a).exp(), -12.0 * sd_a, 12.0 * sd_a, 0.0, 1e-14)
        .map_err(|e| FieldsError::Gauge(e.to_string()))?
        .value;

    let det_ref = (b * 1.0).determinant() * model.sigma.matrix(0.0).determinant().powi(2);
    let mut det_preserving = true;
    let mut expectation = 0.0;
    for (x, w) in outer_x.iter().zip(&outer_w) {
        let a = x * sd_a;
        let s = model.sigma.matrix(a);
        let q = s.transpose() * b * s;
        if (q.determinant() - det_ref).abs() > 1e-12 * det_ref.abs() {
            det_preserving = false;
        }
        expectation += w * inner_integral(&q, &inner_x, &inner_w, |phi| {
            let v = s * phi;
            (v.transpose() * b * v)[(0, 0)]
        })?;
    }
    let z = (2.0 * PI).sqrt() * sd_a * expectation;
    let product = z_m * z_g;
    let relative_deviation = (z - product).abs() / product.abs();
    let warning = (!det_preserving).then(|| {
        format!("det(Sigma(A)^T B_m Sigma(A)) depends on A for the {} family; factorization not asserted", model.sigma.name())
    });
    Ok(GaugeReport {
        sigma: model.sigma,
        z,
        z_m,
        z_g,
        relative_deviation,
        det_preserving,
        factorization_asserted: det_preserving,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(sigma: SigmaFamily) -> GaugeReport {
        gauge_partition(&GaugeModel::new(sigma), &QuadratureSettings::default()).unwrap()
    }

    #[test]
    fn decoupled_factors() {
        let r = run(SigmaFamily::Identity);
        let det: f64 = 2.0 * 1.0 - 0.25;
        assert!((r.z_m - 2.0 * PI / det.sqrt()).abs() < 1e-12);
        assert!((r.z_g - (2.0 * PI / 1.5).sqrt()).abs() < 1e-12);
        assert!(r.relative_deviation < 1e-12 && r.factorization_asserted);
    }

    #[test]
    fn det_preserving_families_factorize() {
        let rot = run(SigmaFamily::Rotation);
        assert!(rot.det_preserving && rot.relative_deviation < 1e-10);
        let sq = run(SigmaFamily::Squeeze);
        assert!(sq.det_preserving && sq.relative_deviation < 1e-8);
    }

    #[test]
    fn dilation_is_flagged() {
        let r = run(SigmaFamily::Dilation);
        assert!(!r.det_preserving && !r.factorization_asserted && r.warning.is_some());
        // Inner integral is Z_m e^{−2A}; averaging over A gives e^{2/B_g}.
        assert!((r.z / (r.z_m * r.z_g) - (2.0 / 1.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn invalid_models() {
        let mut m = GaugeModel::new(SigmaFamily::Identity);
        m.b_m = [[1.0, 2.0], [2.0, 1.0]];
        assert!(gauge_partition(&m, &QuadratureSettings::default()).is_err());
        m = GaugeModel::new(SigmaFamily::Identity);
        m.b_g = 0.0;
        assert!(gauge_partition(&m, &QuadratureSettings::default()).is_err());
    }
}
