use num_bigint::BigInt;
use serde::Serialize;

use super::FieldsError;
use crate::rational::{double_factorial_odd, factorial, fmt_q, to_f64, Q};

pub const MAX_PERTURBATIVE_ORDER: usize = 6;

/// Truncated series `Z(g) = Σ_m c_m g^m` for a single unit-variance mode
/// with interaction `g φ⁴`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbativeSeries {
    coefficients: Vec<Q>,
}

impl PerturbativeSeries {
    pub fn coefficients(&self) -> &[Q] {
        &self.coefficients
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, g: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * g + to_f64(c))
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Out {
            order: usize,
            coefficients: Vec<String>,
        }
        serde_json::to_value(Out { order: self.order(), coefficients: self.coefficients.iter().map(fmt_q).collect() })
            .expect("serializable")
    }
}

/// `c_m = (−1)^m E[φ^{4m}]/m! = (−1)^m (4m−1)!!/m!`.
pub fn perturbative_partition(order: usize) -> Result<PerturbativeSeries, FieldsError> {
    if order > MAX_PERTURBATIVE_ORDER {
        return Err(FieldsError::OrderTooHigh { got: order, max: MAX_PERTURBATIVE_ORDER });
    }
    let coefficients = (0..=order as u32)
        .map(|m| {
            let sign = if m % 2 == 0 { 1 } else { -1 };
            Q::new(BigInt::from(sign) * double_factorial_odd(2 * m), factorial(m))
        })
        .collect();
    Ok(PerturbativeSeries { coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{wick_correlator, GaussianMeasure, MomentumGrid};
    use crate::rational::{q, qi};

    #[test]
    fn low_orders() {
        assert_eq!(perturbative_partition(0).unwrap().coefficients(), &[qi(1)]);
        assert_eq!(perturbative_partition(1).unwrap().coefficients(), &[qi(1), qi(-3)]);
        assert_eq!(perturbative_partition(2).unwrap().coefficients(), &[qi(1), qi(-3), q(105, 2)]);
        assert!(perturbative_partition(7).is_err());
    }

    #[test]
    fn matches_wick_pairing_count() {
        let grid = MomentumGrid::new(2, 1.0).unwrap();
        let mu = GaussianMeasure::from_covariance(&grid, vec![1.0, 0.0]).unwrap();
        let series = perturbative_partition(4).unwrap();
        let mut fact = 1.0;
        for m in 0..=4usize {
            if m > 0 {
                fact *= m as f64;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let oracle = sign * wick_correlator(&mu, &vec![0; 4 * m]) / fact;
            assert!((to_f64(&series.coefficients()[m]) - oracle).abs() < 1e-9 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn eval_horner() {
        let s = perturbative_partition(2).unwrap();
        assert!((s.eval(0.1) - (1.0 - 0.3 + 0.525)).abs() < 1e-15);
    }
}
