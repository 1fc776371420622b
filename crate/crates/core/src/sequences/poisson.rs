use serde::Serialize;
use statrs::distribution::{Discrete, Poisson};
use statrs::function::factorial::ln_binomial;

use super::SequencesError;

/// Omitted Poisson tail mass.
const TAIL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoissonReport {
    pub n: u64,
    pub lambda: f64,
    pub p: f64,
    /// `a_n = λ/(np)`.
    pub a: f64,
    /// `b_n` solving `a_n p + b_n (1−p) = 1`.
    pub b: f64,
    pub total_variation: f64,
    /// Poisson mass beyond the truncation point, an error bound on `total_variation`.
    pub tail_bound: f64,
    pub truncation: u64,
    /// Le Cam bound `λ²/n`.
    pub le_cam_bound: f64,
}

impl PoissonReport {
    pub fn within_le_cam(&self) -> bool {
        self.total_variation <= self.le_cam_bound
    }
}

pub fn poisson_limit_check(n: u64, lambda: f64) -> Result<PoissonReport, SequencesError> {
    poisson_limit_check_with(n, lambda, 0.5)
}

/// Total variation between the pointwise-interaction law with
/// `a_n = λ/(np)` (which is `Bin(n, λ/n)`) and `Poisson(λ)`.
pub fn poisson_limit_check_with(n: u64, lambda: f64, p: f64) -> Result<PoissonReport, SequencesError> {
    if n == 0 || !(lambda > 0.0) || lambda > n as f64 {
        return Err(SequencesError::BadParameter(format!("need 0 < lambda <= n, got lambda = {lambda}, n = {n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(SequencesError::BadParameter(format!("p = {p} must lie in (0, 1)")));
    }
    let a = lambda / (n as f64 * p);
    let b = (1.0 - a * p) / (1.0 - p);
    let pois = Poisson::new(lambda).map_err(|e| SequencesError::BadParameter(e.to_string()))?;

    // Smallest K with Σ_{k>K} π(k) < TAIL, summing the tail directly.
    let mut truncation = lambda.ceil() as u64;
    loop {
        let tail: f64 = (truncation + 1..truncation + 400).map(|k| pois.pmf(k)).sum();
        if tail < TAIL {
            break;
        }
        truncation += 1;
    }
    let tail_bound: f64 = (truncation + 1..truncation + 400).map(|k| pois.pmf(k)).sum();

    let (ap, bq) = (a * p, b * (1.0 - p));
    let law = |k: u64| {
        let mut ln = ln_binomial(n, k);
        if k > 0 {
            ln += k as f64 * ap.ln();
        }
        if k < n {
            ln += (n - k) as f64 * bq.ln();
        }
        ln.exp()
    };
    let mut sum = 0.0;
    for k in 0..=truncation.max(n) {
        let bk = if k <= n { law(k) } else { 0.0 };
        let pk = if k <= truncation { pois.pmf(k) } else { 0.0 };
        sum += (bk - pk).abs();
    }
    Ok(PoissonReport {
        n,
        lambda,
        p,
        a,
        b,
        total_variation: 0.5 * sum,
        tail_bound,
        truncation,
        le_cam_bound: lambda * lambda / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::sequences::{binomial_closed_form, pointwise_interaction};

    #[test]
    fn le_cam_examples() {
        let r10 = poisson_limit_check(10, 1.0).unwrap();
        let r100 = poisson_limit_check(100, 1.0).unwrap();
        let r1000 = poisson_limit_check(1000, 1.0).unwrap();
        assert!(r10.total_variation <= 0.1 && r10.within_le_cam());
        assert!(r1000.total_variation <= 0.001);
        assert!(r1000.total_variation < r100.total_variation && r100.total_variation < r10.total_variation);
        assert!(r1000.tail_bound < 1e-12);
    }

    #[test]
    fn case_b_law_is_binomial_exactly() {
        // a = λ/(np), b = (1 − λ/n)/(1 − p) with λ = 2, n = 9, p = 1/2.
        let (n, p) = (9usize, q(1, 2));
        let a = q(2, 9) / p.clone();
        let b = (qi(1) - q(2, 9)) / (qi(1) - p.clone());
        assert_eq!(pointwise_interaction(n, p, a, b).unwrap(), binomial_closed_form(n, q(2, 9)).unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(poisson_limit_check(5, 6.0).is_err());
        assert!(poisson_limit_check(5, 0.0).is_err());
        assert!(poisson_limit_check_with(5, 1.0, 1.0).is_err());
    }
}
