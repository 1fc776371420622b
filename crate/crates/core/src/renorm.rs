//! BPHZ renormalization on rooted trees with minimal subtraction.
//!
//! The toy Feynman rules give every vertex `v` the factor
//! `a^ε / (ω(v) ε)`, where `ω(v)` is the size of the subtree rooted at `v`.
//! Counterterms follow the Bogoliubov recursion over proper admissible cuts.

use std::cell::RefCell;
use std::collections::HashMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::hopf::{self, proper_cuts, Forest, Tree};
use crate::laurent::{exp_eps_log, LaurentSeries, Poly};
use crate::rational::{fmt_q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenormError {
    #[error("window overflow: tree with {size} vertices needs truncation order >= {size}, got {order}")]
    WindowOverflow { size: usize, order: i32 },
    #[error("max_nodes must be at most {max}, got {got}")]
    TooManyNodes { got: usize, max: usize },
}

pub const Z_REN_MAX_NODES: usize = 6;

/// Scale logarithm and truncation order of the toy model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToyModelParams {
    /// `L = ln a`; `None` keeps `L` symbolic in the coefficients.
    pub scale_log: Option<Q>,
    /// Highest ε power tracked in each amplitude.
    pub order: i32,
}

impl ToyModelParams {
    pub fn symbolic(order: i32) -> Self {
        ToyModelParams { scale_log: None, order }
    }

    pub fn with_scale_log(scale_log: Q, order: i32) -> Self {
        ToyModelParams { scale_log: Some(scale_log), order }
    }

    /// Default window for trees up to `max_size` vertices.
    pub fn default_for(max_size: usize) -> Self {
        Self::symbolic(max_size as i32 + 2)
    }
}

/// Multiplicative map from forests to Laurent series.
pub trait Character {
    fn on_tree(&self, t: &Tree) -> Result<LaurentSeries, RenormError>;

    fn on_forest(&self, f: &Forest) -> Result<LaurentSeries, RenormError> {
        f.trees()
            .iter()
            .try_fold(LaurentSeries::one(), |acc, t| Ok(&acc * &self.on_tree(t)?))
    }
}

/// Tree-factorial Feynman rules `F(t) = a^{|t|ε} / (t! ε^{|t|})`.
#[derive(Clone, Debug)]
pub struct ToyFeynmanRules {
    params: ToyModelParams,
}

impl ToyFeynmanRules {
    pub fn new(params: ToyModelParams) -> Self {
        ToyFeynmanRules { params }
    }

    pub fn params(&self) -> &ToyModelParams {
        &self.params
    }
}

impl Character for ToyFeynmanRules {
    fn on_tree(&self, t: &Tree) -> Result<LaurentSeries, RenormError> {
        toy_amplitude(t, &self.params)
    }
}

pub fn toy_amplitude(t: &Tree, params: &ToyModelParams) -> Result<LaurentSeries, RenormError> {
    let n = t.size();
    if params.order < n as i32 {
        return Err(RenormError::WindowOverflow { size: n, order: params.order });
    }
    // a^{nε} expanded far enough that the ε^{-n} shift lands on `order`.
    let log = Poly::l().scale(&Q::from_integer((n as i64).into()));
    let exp = exp_eps_log(&log, (params.order + n as i32) as u32);
    let pref = Poly::constant(Q::new(One::one(), t.tree_factorial()));
    let amp = &LaurentSeries::monomial(-(n as i32), pref) * &exp;
    Ok(match &params.scale_log {
        Some(l) => amp.eval_scale_log(l),
        None => amp,
    })
}

/// Bogoliubov preparation, counterterm and renormalized value for a
/// Feynman-rules character. Counterterms are cached per tree; the cache is
/// confined to this value (not `Sync`).
pub struct Bphz<F: Character> {
    rules: F,
    counterterms: RefCell<HashMap<Tree, LaurentSeries>>,
}

impl<F: Character> Bphz<F> {
    pub fn new(rules: F) -> Self {
        Bphz { rules, counterterms: RefCell::new(HashMap::new()) }
    }

    pub fn rules(&self) -> &F {
        &self.rules
    }

    pub fn feynman(&self, f: &Forest) -> Result<LaurentSeries, RenormError> {
        self.rules.on_forest(f)
    }

    /// `P(t) = F(t) + Σ_{proper cuts} C(P^c t) F(R^c t)`.
    pub fn prepare(&self, t: &Tree) -> Result<LaurentSeries, RenormError> {
        let mut out = self.rules.on_tree(t)?;
        for (pruned, trunk) in proper_cuts(t) {
            let c = self.counterterm_forest(&pruned)?;
            let f = self.rules.on_tree(&trunk)?;
            out = &out + &(&c * &f);
        }
        Ok(out)
    }

    /// `C(t) = −T(P(t))` with `T` the pole-part projector.
    pub fn counterterm(&self, t: &Tree) -> Result<LaurentSeries, RenormError> {
        if let Some(c) = self.counterterms.borrow().get(t) {
            return Ok(c.clone());
        }
        let c = -&self.prepare(t)?.pole_part();
        self.counterterms.borrow_mut().insert(t.clone(), c.clone());
        Ok(c)
    }

    pub fn counterterm_forest(&self, f: &Forest) -> Result<LaurentSeries, RenormError> {
        f.trees()
            .iter()
            .try_fold(LaurentSeries::one(), |acc, t| Ok(&acc * &self.counterterm(t)?))
    }

    /// `R(t) = P(t) + C(t)`.
    pub fn renormalize(&self, t: &Tree) -> Result<LaurentSeries, RenormError> {
        Ok(&self.prepare(t)? + &self.counterterm(t)?)
    }

    pub fn renormalize_forest(&self, f: &Forest) -> Result<LaurentSeries, RenormError> {
        f.trees()
            .iter()
            .try_fold(LaurentSeries::one(), |acc, t| Ok(&acc * &self.renormalize(t)?))
    }

    /// Evaluates `C ∗ F` through the generic convolution product.
    pub fn convolution(&self, x: &Forest) -> Result<LaurentSeries, RenormError> {
        // Every forest appearing in Δ(x) is built from subtrees of x, so
        // evaluating all of them up front surfaces any window error.
        let mut c_vals = HashMap::new();
        let mut f_vals = HashMap::new();
        for (l, r, _) in hopf::coproduct(x).iter() {
            if !c_vals.contains_key(l) {
                c_vals.insert(l.clone(), self.counterterm_forest(l)?);
            }
            if !f_vals.contains_key(r) {
                f_vals.insert(r.clone(), self.feynman(r)?);
            }
        }
        Ok(hopf::convolve(|l: &Forest| c_vals[l].clone(), |r: &Forest| f_vals[r].clone(), x))
    }

    /// True iff `C ∗ F` and `R` agree on every coefficient both know.
    pub fn check_convolution_identity(&self, x: &Forest) -> Result<bool, RenormError> {
        Ok(self.convolution(x)?.agrees_with(&self.renormalize_forest(x)?))
    }
}

/// A forest of the partition sum with its coupling power and symmetry weight
/// `1/|Aut|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedForest {
    pub forest: Forest,
    pub coupling_power: usize,
    pub weight: Q,
}

pub fn weighted_forests(max_nodes: usize) -> Vec<WeightedForest> {
    hopf::forests_up_to(max_nodes)
        .into_iter()
        .map(|forest| WeightedForest {
            coupling_power: forest.size(),
            weight: Q::new(One::one(), forest.symmetry_factor()),
            forest,
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ZRenReport {
    pub coupling: Q,
    pub max_nodes: usize,
    pub series: LaurentSeries,
    pub finite_part: Poly,
    pub pole_free: bool,
    /// Multiplicative constant bringing the finite part to 1, when the
    /// finite part is a nonzero number.
    pub normalization: Option<Q>,
}

impl ZRenReport {
    pub fn to_json(&self) -> Value {
        json!({
            "coupling": fmt_q(&self.coupling),
            "max_nodes": self.max_nodes,
            "series": self.series.to_json(),
            "finite_part": self.finite_part.to_string(),
            "pole_free": self.pole_free,
            "normalization": self.normalization.as_ref().map(fmt_q),
        })
    }
}

/// Truncated `Σ_forests g^{|f|} / |Aut f| · (C∗F)(f)`.
pub fn z_ren<F: Character>(g: &Q, max_nodes: usize, bphz: &Bphz<F>) -> Result<ZRenReport, RenormError> {
    if max_nodes > Z_REN_MAX_NODES {
        return Err(RenormError::TooManyNodes { got: max_nodes, max: Z_REN_MAX_NODES });
    }
    let mut series = LaurentSeries::zero();
    for wf in weighted_forests(max_nodes) {
        let r = bphz.convolution(&wf.forest)?;
        let w = &wf.weight * num_traits::pow(g.clone(), wf.coupling_power);
        series = &series + &r.scale(&w);
    }
    let finite_part = series.finite_part().unwrap_or_default();
    let pole_free = series.is_finite_at_zero();
    let normalization = finite_part
        .as_constant()
        .filter(|c| !c.is_zero())
        .map(|c| Q::one() / c);
    Ok(ZRenReport { coupling: g.clone(), max_nodes, series, finite_part, pole_free, normalization })
}
