//! Interacting sequences of discrete laws on ℕ: convolution, pointwise and
//! convolutional interaction terms, and their combinatorics.

mod density;
mod poisson;
mod xi;

pub use density::{density_conv, DensityConv, Kernel, SampledDensity};
pub use poisson::{poisson_limit_check, poisson_limit_check_with, PoissonReport};
pub use xi::{conf_interacting, xi_representation};

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::rational::{binomial, fmt_q, to_f64, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequencesError {
    #[error("negative mass {value} at k = {k}")]
    NegativeMass { k: usize, value: String },
    #[error("mass {value} at k = {k} exceeds 1")]
    MassAboveOne { k: usize, value: String },
    #[error("masses sum to {total}, not 1")]
    MassNotOne { total: String },
    #[error("law has empty support")]
    EmptyLaw,
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("pointwise weights violate {0}")]
    BadWeights(String),
    #[error("k = {k} is outside the interacting configuration space 0..={max}")]
    OutsideConf { k: usize, max: usize },
    #[error("density grids are incompatible: {0}")]
    GridMismatch(String),
}

/// Probability values: exact rationals or floats.
pub trait Weight:
    Clone + Debug + PartialEq + PartialOrd + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn to_f64(&self) -> f64;
    fn render(&self) -> String;
    /// Exact equality for rationals, `|a − b| < 1e−12` for floats.
    fn close_to(&self, other: &Self) -> bool;
    fn from_bigint(n: &BigInt) -> Self;
}

impl Weight for Q {
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }

    fn render(&self) -> String {
        fmt_q(self)
    }

    fn close_to(&self, other: &Self) -> bool {
        self == other
    }

    fn from_bigint(n: &BigInt) -> Self {
        Q::from_integer(n.clone())
    }
}

impl Weight for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn render(&self) -> String {
        format!("{self:e}")
    }

    fn close_to(&self, other: &Self) -> bool {
        (self - other).abs() < 1e-12
    }

    fn from_bigint(n: &BigInt) -> Self {
        n.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Law on ℕ with finite support; `masses[k] = p(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLaw<W> {
    masses: Vec<W>,
}

fn trimmed<W: Weight>(mut masses: Vec<W>) -> Vec<W> {
    while masses.len() > 1 && masses.last().is_some_and(Zero::is_zero) {
        masses.pop();
    }
    masses
}

fn validate<W: Weight>(masses: &[W]) -> Result<(), SequencesError> {
    if masses.is_empty() {
        return Err(SequencesError::EmptyLaw);
    }
    let mut total = W::zero();
    for (k, m) in masses.iter().enumerate() {
        if *m < W::zero() {
            return Err(SequencesError::NegativeMass { k, value: m.render() });
        }
        if *m > W::one() && !m.close_to(&W::one()) {
            return Err(SequencesError::MassAboveOne { k, value: m.render() });
        }
        total = total + m.clone();
    }
    if !total.close_to(&W::one()) {
        return Err(SequencesError::MassNotOne { total: total.render() });
    }
    Ok(())
}

impl<W: Weight> DiscreteLaw<W> {
    pub fn new(masses: Vec<W>) -> Result<Self, SequencesError> {
        validate(&masses)?;
        Ok(DiscreteLaw { masses: trimmed(masses) })
    }

    /// Point mass at `k`.
    pub fn delta(k: usize) -> Self {
        let mut masses = vec![W::zero(); k + 1];
        masses[k] = W::one();
        DiscreteLaw { masses }
    }

    pub fn bernoulli(p: W) -> Result<Self, SequencesError> {
        check_probability(&p)?;
        Ok(DiscreteLaw { masses: trimmed(vec![W::one() - p.clone(), p]) })
    }

    pub fn masses(&self) -> &[W] {
        &self.masses
    }

    pub fn mass(&self, k: usize) -> W {
        self.masses.get(k).cloned().unwrap_or_else(W::zero)
    }

    pub fn total(&self) -> W {
        self.masses.iter().cloned().fold(W::zero(), |a, b| a + b)
    }

    /// Largest `m` with `p(m) ≠ 0`.
    pub fn order(&self) -> usize {
        order_of(&self.masses).expect("laws have nonempty support")
    }

    /// Configuration space `{0, …, order}`.
    pub fn conf(&self) -> Vec<usize> {
        (0..=self.order()).collect()
    }

    pub fn range(&self) -> usize {
        self.order() + 1
    }

    pub fn to_f64(&self) -> DiscreteLaw<f64> {
        DiscreteLaw { masses: self.masses.iter().map(Weight::to_f64).collect() }
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        let n = self.masses.len().max(other.masses.len());
        0.5 * (0..n).map(|k| (self.mass(k).to_f64() - other.mass(k).to_f64()).abs()).sum::<f64>()
    }
}

/// Order of an arbitrary mass vector; errors when every entry is zero.
pub fn order_of<W: Weight>(masses: &[W]) -> Result<usize, SequencesError> {
    masses.iter().rposition(|m| !m.is_zero()).ok_or(SequencesError::EmptyLaw)
}

fn check_probability<W: Weight>(p: &W) -> Result<(), SequencesError> {
    if *p < W::zero() || *p > W::one() {
        return Err(SequencesError::BadParameter(format!("p = {} must lie in [0, 1]", p.render())));
    }
    Ok(())
}

/// `(f ∗ g)(k) = Σ_{a+b=k} f(a) g(b)`.
pub fn conv_nat<W: Weight>(f: &DiscreteLaw<W>, g: &DiscreteLaw<W>) -> DiscreteLaw<W> {
    DiscreteLaw { masses: trimmed(convolve_raw(&f.masses, &g.masses)) }
}

fn convolve_raw<W: Weight>(f: &[W], g: &[W]) -> Vec<W> {
    let mut out = vec![W::zero(); f.len() + g.len() - 1];
    for (a, fa) in f.iter().enumerate() {
        if fa.is_zero() {
            continue;
        }
        for (b, gb) in g.iter().enumerate() {
            out[a + b] = out[a + b].clone() + fa.clone() * gb.clone();
        }
    }
    out
}

/// `n`-fold convolution of Bernoulli(`p`).
pub fn binomial_free<W: Weight>(n: usize, p: W) -> Result<DiscreteLaw<W>, SequencesError> {
    let be = DiscreteLaw::bernoulli(p)?;
    Ok((0..n).fold(DiscreteLaw::delta(0), |acc, _| conv_nat(&acc, &be)))
}

/// `C(n,k) p^k (1−p)^{n−k}` computed directly.
pub fn binomial_closed_form<W: Weight>(n: usize, p: W) -> Result<DiscreteLaw<W>, SequencesError> {
    check_probability(&p)?;
    let q = W::one() - p.clone();
    let masses = (0..=n)
        .map(|k| W::from_bigint(&binomial(n as u32, k as u32)) * pow(&p, k) * pow(&q, n - k))
        .collect();
    Ok(DiscreteLaw { masses: trimmed(masses) })
}

fn pow<W: Weight>(x: &W, e: usize) -> W {
    (0..e).fold(W::one(), |acc, _| acc * x.clone())
}

/// Pointwise interaction weights `w(k) = a^k b^{n−k} / (ap + b(1−p))^n`.
pub fn pointwise_weights<W: Weight>(n: usize, p: &W, a: &W, b: &W) -> Result<Vec<W>, SequencesError> {
    check_probability(p)?;
    if *a <= W::zero() || *b <= W::zero() {
        return Err(SequencesError::BadParameter("a and b must be positive".into()));
    }
    let norm = pow(&(a.clone() * p.clone() + b.clone() * (W::one() - p.clone())), n);
    Ok((0..=n).map(|k| pow(a, k) * pow(b, n - k) / norm.clone()).collect())
}

/// Multiplies `p_free` by pointwise weights after checking
/// `Σ p_free·w = 1` and `0 ≤ p_free·w ≤ 1`.
pub fn apply_pointwise<W: Weight>(p_free: &DiscreteLaw<W>, weights: &[W]) -> Result<DiscreteLaw<W>, SequencesError> {
    if weights.iter().any(|w| *w < W::zero()) {
        return Err(SequencesError::BadWeights("w(k) >= 0".into()));
    }
    let n = p_free.masses.len().max(weights.len());
    let masses: Vec<W> = (0..n)
        .map(|k| p_free.mass(k) * weights.get(k).cloned().unwrap_or_else(W::zero))
        .collect();
    if masses.iter().any(|m| *m > W::one() && !m.close_to(&W::one())) {
        return Err(SequencesError::BadWeights("0 <= p_free(k) w(k) <= 1".into()));
    }
    let total = masses.iter().cloned().fold(W::zero(), |a, b| a + b);
    if !total.close_to(&W::one()) {
        return Err(SequencesError::BadWeights(format!("sum p_free(k) w(k) = 1 (got {})", total.render())));
    }
    Ok(DiscreteLaw { masses: trimmed(masses) })
}

/// Law `k ↦ C(n,k)(ap)^k (b(1−p))^{n−k} / (ap + b(1−p))^n`.
pub fn pointwise_interaction<W: Weight>(n: usize, p: W, a: W, b: W) -> Result<DiscreteLaw<W>, SequencesError> {
    let weights = pointwise_weights(n, &p, &a, &b)?;
    apply_pointwise(&binomial_closed_form(n, p)?, &weights)
}

/// `p_free ∗ p̂_int` after validating `p̂_int` as a probability law.
///
/// Since `Σ (f∗g) = Σf · Σg`, a nonnegative `p̂_int` produces a law exactly
/// when its own mass is 1; the rejection reports which condition failed.
pub fn conv_interaction<W: Weight>(p_free: &DiscreteLaw<W>, p_hat_int: &[W]) -> Result<DiscreteLaw<W>, SequencesError> {
    validate(p_hat_int)?;
    let product = convolve_raw(&p_free.masses, p_hat_int);
    validate(&product)?;
    Ok(DiscreteLaw { masses: trimmed(product) })
}

/// CSV rows `k,mass,mass_f64`.
pub fn law_rows<W: Weight>(law: &DiscreteLaw<W>) -> Vec<(usize, String, f64)> {
    law.masses.iter().enumerate().map(|(k, m)| (k, m.render(), m.to_f64())).collect()
}
