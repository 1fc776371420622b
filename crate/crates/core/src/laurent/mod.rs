//! Truncated Laurent series in the regulator ε.
//!
//! Coefficients are polynomials in the scale logarithm `L` with exact
//! rational coefficients. A series carries its truncation order: every
//! coefficient above it is unknown, and `None` means the series is an exact
//! Laurent polynomial. Orders propagate pessimistically through arithmetic.

mod poly;

pub use poly::Poly;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::algebra::CommutativeAlgebra;
use crate::rational::{factorial, fmt_q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("window underflow: coefficient of eps^{requested} requested but series is only known through eps^{order}")]
    WindowUnderflow { requested: i32, order: i32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    terms: BTreeMap<i32, Poly>,
    order: Option<i32>,
}

impl LaurentSeries {
    pub fn zero() -> Self {
        LaurentSeries { terms: BTreeMap::new(), order: None }
    }

    pub fn one() -> Self {
        Self::monomial(0, Poly::one())
    }

    /// Exact `c · ε^k`.
    pub fn monomial(k: i32, c: Poly) -> Self {
        Self::from_terms([(k, c)], None)
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(0, Poly::constant(c))
    }

    /// Builds a series; zero coefficients and terms above `order` are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (i32, Poly)>, order: Option<i32>) -> Self {
        let mut map: BTreeMap<i32, Poly> = BTreeMap::new();
        for (k, c) in terms {
            if order.is_some_and(|o| k > o) {
                continue;
            }
            let slot = map.entry(k).or_default();
            *slot += &c;
        }
        map.retain(|_, c| !c.is_zero());
        LaurentSeries { terms: map, order }
    }

    pub fn from_rationals(lowest: i32, coeffs: &[Q], order: Option<i32>) -> Self {
        Self::from_terms(
            coeffs.iter().enumerate().map(|(i, c)| (lowest + i as i32, Poly::constant(c.clone()))),
            order,
        )
    }

    /// Highest exponent whose coefficient is known; `None` for exact series.
    pub fn order(&self) -> Option<i32> {
        self.order
    }

    pub fn is_exact(&self) -> bool {
        self.order.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn lowest_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Poly)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    /// Coefficient of `ε^k`. Reading above the truncation order is an error.
    pub fn coeff(&self, k: i32) -> Result<Poly, LaurentError> {
        if let Some(order) = self.order {
            if k > order {
                return Err(LaurentError::WindowUnderflow { requested: k, order });
            }
        }
        Ok(self.terms.get(&k).cloned().unwrap_or_default())
    }

    /// Fails unless every coefficient through `ε^k` is known.
    pub fn ensure_known_through(&self, k: i32) -> Result<(), LaurentError> {
        self.coeff(k).map(|_| ())
    }

    /// Drops everything above `ε^order` (never raises the order).
    pub fn truncate(&self, order: i32) -> Self {
        let order = self.order.map_or(order, |o| o.min(order));
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c.clone())), Some(order))
    }

    /// Minimal subtraction projector: keeps strictly negative powers.
    ///
    /// The pole part is exact when the series is known through `ε^-1`.
    pub fn pole_part(&self) -> Self {
        let order = match self.order {
            Some(o) if o < -1 => Some(o),
            _ => None,
        };
        Self::from_terms(
            self.terms.range(..0).map(|(k, c)| (*k, c.clone())),
            order,
        )
    }

    /// Everything at `ε^0` and above.
    pub fn regular_part(&self) -> Self {
        Self::from_terms(self.terms.range(0..).map(|(k, c)| (*k, c.clone())), self.order)
    }

    /// Coefficient of `ε^0`.
    pub fn finite_part(&self) -> Result<Poly, LaurentError> {
        self.coeff(0)
    }

    /// True when every known negative-power coefficient vanishes and the
    /// series is known at least through `ε^-1`.
    pub fn is_finite_at_zero(&self) -> bool {
        self.ensure_known_through(-1).is_ok() && self.terms.range(..0).next().is_none()
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.scale_poly(&Poly::constant(c.clone()))
    }

    pub fn scale_poly(&self, c: &Poly) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(k, x)| (*k, x * c)), self.order)
    }

    /// Substitutes a rational value for `L` in every coefficient.
    pub fn eval_scale_log(&self, l: &Q) -> Self {
        Self::from_terms(
            self.terms.iter().map(|(k, c)| (*k, Poly::constant(c.eval(l)))),
            self.order,
        )
    }

    /// Equality of every coefficient both operands know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let order = match (self.order, other.order) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let a = self.terms.iter().filter(|(k, _)| order.is_none_or(|o| **k <= o));
        let b = other.terms.iter().filter(|(k, _)| order.is_none_or(|o| **k <= o));
        a.eq(b)
    }

    // Effective lowest exponent for order propagation: a truncated zero series
    // behaves like O(ε^{order+1}).
    fn leading_for_order(&self) -> Option<i32> {
        self.lowest_exponent().or(self.order.map(|o| o + 1))
    }

    pub fn to_json(&self) -> Value {
        let mut terms = Map::new();
        for (k, c) in &self.terms {
            let mut poly = Map::new();
            for (p, x) in c.coeffs().iter().enumerate() {
                if !num_traits::Zero::is_zero(x) {
                    poly.insert(p.to_string(), Value::String(fmt_q(x)));
                }
            }
            terms.insert(k.to_string(), Value::Object(poly));
        }
        json!({ "order": self.order, "terms": terms })
    }
}

/// `Σ_{k=0..order} (c ε)^k / k!`, the expansion of `a^ε` when `c = ln a`.
pub fn exp_eps_log(c: &Poly, order: u32) -> LaurentSeries {
    LaurentSeries::from_terms(
        (0..=order).map(|k| {
            let inv = Q::new(1.into(), factorial(k));
            (k as i32, c.pow(k).scale(&inv))
        }),
        Some(order as i32),
    )
}

pub fn l_add(x: &LaurentSeries, y: &LaurentSeries) -> LaurentSeries {
    x + y
}

pub fn l_mul(x: &LaurentSeries, y: &LaurentSeries) -> LaurentSeries {
    x * y
}

pub fn l_scale(x: &LaurentSeries, c: &Q) -> LaurentSeries {
    x.scale(c)
}

pub fn pole_part(x: &LaurentSeries) -> LaurentSeries {
    x.pole_part()
}

fn min_order(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (None, o) | (o, None) => o,
        (Some(a), Some(b)) => Some(a.min(b)),
    }
}

impl Add<&LaurentSeries> for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        let order = min_order(self.order, rhs.order);
        LaurentSeries::from_terms(
            self.terms.iter().chain(rhs.terms.iter()).map(|(k, c)| (*k, c.clone())),
            order,
        )
    }
}

impl Sub<&LaurentSeries> for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self + &(-rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        LaurentSeries {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
            order: self.order,
        }
    }
}

impl Mul<&LaurentSeries> for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        let exact_zero = |s: &LaurentSeries| s.is_zero() && s.is_exact();
        if exact_zero(self) || exact_zero(rhs) {
            return LaurentSeries::zero();
        }
        let order = match (self.order, rhs.order) {
            (None, None) => None,
            (None, Some(hb)) => self.lowest_exponent().map(|la| la + hb),
            (Some(ha), None) => rhs.lowest_exponent().map(|lb| lb + ha),
            (Some(ha), Some(hb)) => {
                let la = self.leading_for_order().expect("truncated series has an order");
                let lb = rhs.leading_for_order().expect("truncated series has an order");
                Some((la + hb).min(lb + ha))
            }
        };
        let mut out: BTreeMap<i32, Poly> = BTreeMap::new();
        for (i, a) in &self.terms {
            for (j, b) in &rhs.terms {
                let k = i + j;
                if order.is_some_and(|o| k > o) {
                    continue;
                }
                *out.entry(k).or_default() += &(a * b);
            }
        }
        LaurentSeries::from_terms(out, order)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: LaurentSeries) -> LaurentSeries {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl CommutativeAlgebra for LaurentSeries {
    fn zero_value() -> Self {
        LaurentSeries::zero()
    }
    fn unit_value() -> Self {
        LaurentSeries::one()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scaled(&self, c: &Q) -> Self {
        LaurentSeries::scale(self, c)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (k, c) in &self.terms {
            let coeff = c.to_string();
            let coeff = if c.coeffs().iter().filter(|x| !num_traits::Zero::is_zero(*x)).count() > 1 {
                format!("({coeff})")
            } else {
                coeff
            };
            parts.push(match k {
                0 => coeff,
                1 => format!("{coeff} eps"),
                _ => format!("{coeff} eps^{k}"),
            });
        }
        if let Some(o) = self.order {
            parts.push(format!("O(eps^{})", o + 1));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn eps(k: i32) -> LaurentSeries {
        LaurentSeries::monomial(k, Poly::one())
    }

    #[test]
    fn add_example() {
        let x = eps(-1);
        let y = LaurentSeries::from_rationals(0, &[qi(2), qi(1)], None);
        let s = &x + &y;
        assert_eq!(s, LaurentSeries::from_rationals(-1, &[qi(1), qi(2), qi(1)], None));
    }

    #[test]
    fn inverse_pair() {
        assert_eq!(&eps(-1) * &eps(1), LaurentSeries::one());
    }

    #[test]
    fn hand_cauchy_product() {
        // (1/ε + 1)(1/ε − 1) = 1/ε² − 1
        let a = LaurentSeries::from_rationals(-1, &[qi(1), qi(1)], None);
        let b = LaurentSeries::from_rationals(-1, &[qi(1), qi(-1)], None);
        let want = LaurentSeries::from_rationals(-2, &[qi(1), qi(0), qi(-1)], None);
        assert_eq!(&a * &b, want);
    }

    #[test]
    fn exp_series() {
        assert!(exp_eps_log(&Poly::zero(), 3).agrees_with(&LaurentSeries::one()));
        let l = Poly::l();
        let e = exp_eps_log(&l, 2);
        assert_eq!(e.coeff(1).unwrap(), l);
        assert_eq!(e.coeff(2).unwrap(), l.pow(2).scale(&q(1, 2)));
        let e2 = exp_eps_log(&l.scale(&qi(2)), 2);
        assert_eq!(e2.coeff(1).unwrap(), l.scale(&qi(2)));
        assert_eq!(e2.coeff(2).unwrap(), l.pow(2).scale(&qi(2)));
        assert!(e2.coeff(3).is_err());
    }

    #[test]
    fn pole_projection() {
        let x = LaurentSeries::from_rationals(-1, &[qi(1), qi(2), qi(1)], None);
        assert_eq!(x.pole_part(), eps(-1));
        let y = &LaurentSeries::constant(qi(3)) + &eps(2);
        assert!(y.pole_part().is_zero());
        let z = LaurentSeries::from_rationals(-2, &[qi(1), qi(1), qi(7)], None);
        assert_eq!(z.pole_part(), LaurentSeries::from_rationals(-2, &[qi(1), qi(1)], None));
    }

    #[test]
    fn truncation_propagates() {
        let a = exp_eps_log(&Poly::l(), 2); // known through ε^2
        let p = &eps(-2) * &a;
        assert_eq!(p.order(), Some(0));
        let s = &a + &exp_eps_log(&Poly::l(), 1);
        assert_eq!(s.order(), Some(1));
        // O(ε^3)·O(ε^2) with zero known parts
        let z1 = LaurentSeries::from_terms([], Some(2));
        let z2 = LaurentSeries::from_terms([], Some(1));
        assert_eq!((&z1 * &z2).order(), Some(4));
    }

    #[test]
    fn underflow_is_an_error() {
        let a = exp_eps_log(&Poly::l(), 1);
        assert_eq!(a.coeff(2), Err(LaurentError::WindowUnderflow { requested: 2, order: 1 }));
    }

    #[test]
    fn pole_part_idempotent() {
        let z = LaurentSeries::from_rationals(-3, &[qi(1), q(-1, 2), qi(5), qi(2)], Some(0));
        assert_eq!(z.pole_part().pole_part(), z.pole_part());
    }

    #[test]
    fn rendering() {
        let x = &exp_eps_log(&Poly::l(), 1) * &eps(-1);
        assert_eq!(x.to_string(), "1 eps^-1 + L + O(eps^1)");
        let j = x.to_json();
        assert_eq!(j["order"], json!(0));
        assert_eq!(j["terms"]["0"]["1"], json!("1"));
    }

    use proptest::prelude::*;

    fn window() -> impl Strategy<Value = LaurentSeries> {
        prop::collection::vec((-9i64..=9, 1i64..=6), 7)
            .prop_map(|cs| LaurentSeries::from_rationals(-3, &cs.iter().map(|(n, d)| q(*n, *d)).collect::<Vec<_>>(), None))
    }

    proptest! {
        #[test]
        fn rota_baxter(x in window(), y in window()) {
            let t = |s: &LaurentSeries| s.pole_part();
            let lhs = &(&t(&x) * &t(&y)) + &t(&(&x * &y));
            let rhs = &t(&(&t(&x) * &y)) + &t(&(&x * &t(&y)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ring_axioms(x in window(), y in window(), z in window()) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!(&(&x + &y) - &y, x);
        }
    }
}
