//! Commutative target algebras for characters and the convolution product.

use num_traits::{One, Zero};

use crate::rational::Q;

/// A commutative unital algebra over the rationals, as needed to evaluate
/// `m ∘ (f ⊗ g) ∘ Δ`.
pub trait CommutativeAlgebra: Clone + PartialEq {
    fn zero_value() -> Self;
    fn unit_value() -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn scaled(&self, c: &Q) -> Self;
}

impl CommutativeAlgebra for Q {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn unit_value() -> Self {
        One::one()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scaled(&self, c: &Q) -> Self {
        self * c
    }
}
