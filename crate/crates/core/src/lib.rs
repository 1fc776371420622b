//! Convolution constructions of perturbative quantum field theory on
//! finite, exactly checkable models.
//!
//! * [`hopf`], [`laurent`], [`renorm`]: rooted-forest Hopf algebra, Laurent
//!   series in the regulator and BPHZ renormalization `R = C ∗ F`.
//! * [`fields`], [`effective`]: Gaussian measures on a momentum grid, their
//!   convolution, Wilson and Legendre effective actions.
//! * [`sequences`]: interacting laws on ℕ built from convolutions.
//! * [`hierarchy`]: discretized hierarchy of state spaces.
//! * [`cli`]: the `qftconv` command-line front end.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod effective;
pub mod fields;
pub mod hierarchy;
pub mod hopf;
pub mod laurent;
pub mod quadrature;
pub mod rational;
pub mod renorm;
pub mod rng;
pub mod sequences;
