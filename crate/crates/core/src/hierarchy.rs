//! Discretized state-space hierarchy `SC^i(X)` over a finite base `X`.
//!
//! Level 0 is the base with `n` points. Level `i ≥ 1` is the barycentric
//! grid of resolution `m` on the simplex of states over level `i−1`: a state
//! is a vector of integer counts summing to `m`, with weights `count/m`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::rational::{binomial, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("base must have at least one point")]
    EmptyBase,
    #[error("resolution must be at least 1")]
    ZeroResolution,
    #[error("at most {max} levels are supported, got {got}")]
    TooManyLevels { got: usize, max: usize },
    #[error("level {level} would have {size} grid states, above the limit {max}")]
    GridTooLarge { level: usize, size: String, max: usize },
    #[error("level {0} does not exist")]
    NoSuchLevel(usize),
    #[error("function has {got} values but level {level} has {expected} points")]
    LengthMismatch { level: usize, expected: usize, got: usize },
    #[error("state is not a point of the level-{0} grid")]
    NotGridPoint(usize),
    #[error("input is not idempotent at grid point {point} (deviation {deviation:e})")]
    NotIdempotent { point: usize, deviation: f64 },
    #[error("projector matrices must be square and of equal size")]
    BadProjector,
}

pub const MAX_LEVELS: usize = 3;
pub const MAX_GRID: usize = 50_000;

/// A level-`i` grid point: counts over the points of level `i−1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    counts: Vec<u32>,
}

impl State {
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn weights(&self, resolution: u32) -> Vec<f64> {
        self.counts.iter().map(|c| *c as f64 / resolution as f64).collect()
    }
}

#[derive(Clone, Debug)]
struct Level {
    states: Vec<State>,
    index: HashMap<State, usize>,
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    base: usize,
    resolution: u32,
    levels: Vec<Level>,
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `C(m + n − 1, n − 1)`, the number of resolution-`m` grid states over `n` points.
pub fn simplex_grid_size(n: usize, m: u32) -> num_bigint::BigInt {
    binomial(m + n as u32 - 1, n as u32 - 1)
}

impl Hierarchy {
    /// Base with `n` points and grids up to level `levels`.
    pub fn new(n: usize, resolution: u32, levels: usize) -> Result<Self, HierarchyError> {
        if n == 0 {
            return Err(HierarchyError::EmptyBase);
        }
        if resolution == 0 {
            return Err(HierarchyError::ZeroResolution);
        }
        if levels > MAX_LEVELS {
            return Err(HierarchyError::TooManyLevels { got: levels, max: MAX_LEVELS });
        }
        let mut h = Hierarchy { base: n, resolution, levels: Vec::new() };
        let mut below = n;
        for level in 1..=levels {
            let size = simplex_grid_size(below, resolution);
            if size > num_bigint::BigInt::from(MAX_GRID) {
                return Err(HierarchyError::GridTooLarge { level, size: size.to_string(), max: MAX_GRID });
            }
            let states: Vec<State> = compositions(resolution, below).into_iter().map(|counts| State { counts }).collect();
            let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
            below = states.len();
            h.levels.push(Level { states, index });
        }
        Ok(h)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn top_level(&self) -> usize {
        self.levels.len()
    }

    /// Number of grid points of level `i`.
    pub fn size(&self, level: usize) -> usize {
        if level == 0 {
            self.base
        } else {
            self.levels[level - 1].states.len()
        }
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        (0..=self.top_level()).map(|i| self.size(i)).collect()
    }

    pub fn state(&self, level: usize, idx: usize) -> Result<&State, HierarchyError> {
        if level == 0 || level > self.top_level() {
            return Err(HierarchyError::NoSuchLevel(level));
        }
        self.levels[level - 1].states.get(idx).ok_or(HierarchyError::NotGridPoint(level))
    }

    fn check_level(&self, level: usize) -> Result<(), HierarchyError> {
        if level > self.top_level() {
            return Err(HierarchyError::NoSuchLevel(level));
        }
        Ok(())
    }

    fn check_len(&self, level: usize, len: usize) -> Result<(), HierarchyError> {
        self.check_level(level)?;
        if len != self.size(level) {
            return Err(HierarchyError::LengthMismatch { level, expected: self.size(level), got: len });
        }
        Ok(())
    }

    /// Level-`level` grid index of a state given by its weights; the
    /// weights must be exactly `count/m`.
    pub fn locate(&self, level: usize, weights: &[f64]) -> Result<usize, HierarchyError> {
        if level == 0 || level > self.top_level() {
            return Err(HierarchyError::NoSuchLevel(level));
        }
        self.check_len(level - 1, weights.len())?;
        let m = self.resolution as f64;
        let mut counts = Vec::with_capacity(weights.len());
        for w in weights {
            let c = (w * m).round();
            if !(c >= 0.0) || c / m != *w {
                return Err(HierarchyError::NotGridPoint(level));
            }
            counts.push(c as u32);
        }
        self.levels[level - 1].index.get(&State { counts }).copied().ok_or(HierarchyError::NotGridPoint(level))
    }

    /// `δ_w`: index of the point mass at level-`level` point `w` in the
    /// level-`level+1` grid.
    pub fn delta(&self, level: usize, w: usize) -> Result<usize, HierarchyError> {
        if level >= self.top_level() {
            return Err(HierarchyError::NoSuchLevel(level + 1));
        }
        if w >= self.size(level) {
            return Err(HierarchyError::NotGridPoint(level));
        }
        let mut counts = vec![0; self.size(level)];
        counts[w] = self.resolution;
        Ok(self.levels[level].index[&State { counts }])
    }

    /// `tg(f)(μ) = Σ_w μ(w) f(w)` for `f` on level `level − 1`.
    pub fn gelfand_transform(&self, level: usize, f: &[f64]) -> Result<Vec<f64>, HierarchyError> {
        if level == 0 {
            return Err(HierarchyError::NoSuchLevel(0));
        }
        self.check_level(level)?;
        self.check_len(level - 1, f.len())?;
        let m = self.resolution as f64;
        Ok(self.levels[level - 1]
            .states
            .iter()
            .map(|s| s.counts.iter().zip(f).map(|(c, v)| *c as f64 / m * v).sum())
            .collect())
    }

    /// Exact-rational version of [`Hierarchy::gelfand_transform`].
    pub fn gelfand_transform_exact(&self, level: usize, f: &[Q]) -> Result<Vec<Q>, HierarchyError> {
        if level == 0 {
            return Err(HierarchyError::NoSuchLevel(0));
        }
        self.check_level(level)?;
        self.check_len(level - 1, f.len())?;
        let m = Q::from_integer(self.resolution.into());
        Ok(self.levels[level - 1]
            .states
            .iter()
            .map(|s| {
                s.counts
                    .iter()
                    .zip(f)
                    .fold(Q::zero(), |acc, (c, v)| acc + Q::from_integer((*c).into()) / &m * v)
            })
            .collect())
    }

    /// `max_w |tg(f)(δ_w) − f(w)|` for `f` on level `level`.
    pub fn pullback_identity_check(&self, level: usize, f: &[f64]) -> Result<f64, HierarchyError> {
        let lifted = self.gelfand_transform(level + 1, f)?;
        let mut worst: f64 = 0.0;
        for (w, fw) in f.iter().enumerate() {
            worst = worst.max((lifted[self.delta(level, w)?] - fw).abs());
        }
        Ok(worst)
    }

    /// Exact check that `tg(f)∘δ = f`.
    pub fn pullback_identity_exact(&self, level: usize, f: &[Q]) -> Result<bool, HierarchyError> {
        let lifted = self.gelfand_transform_exact(level + 1, f)?;
        for (w, fw) in f.iter().enumerate() {
            if lifted[self.delta(level, w)?] != *fw {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Lifts a matrix-valued idempotent `p` on level `level` to the operator
    /// `F ↦ tg(p · F∘δ)` on `C(level+1)^k`.
    pub fn lift_idempotent(&self, level: usize, p: &[DMatrix<f64>]) -> Result<LiftedIdempotent, HierarchyError> {
        self.check_len(level, p.len())?;
        if level >= self.top_level() {
            return Err(HierarchyError::NoSuchLevel(level + 1));
        }
        let k = p.first().map(|m| m.nrows()).ok_or(HierarchyError::BadProjector)?;
        if p.iter().any(|m| m.nrows() != k || m.ncols() != k) {
            return Err(HierarchyError::BadProjector);
        }
        for (point, pw) in p.iter().enumerate() {
            let deviation = (pw * pw - pw).amax();
            if !(deviation <= 1e-10) {
                return Err(HierarchyError::NotIdempotent { point, deviation });
            }
        }
        let upper = self.size(level + 1);
        let dim = k * upper;
        let m = self.resolution as f64;
        let mut op = DMatrix::zeros(dim, dim);
        for (mu, state) in self.levels[level].states.iter().enumerate() {
            for (w, c) in state.counts.iter().enumerate() {
                if *c == 0 {
                    continue;
                }
                let dw = self.delta(level, w)?;
                let weight = *c as f64 / m;
                for a in 0..k {
                    for b in 0..k {
                        op[(mu * k + a, dw * k + b)] += weight * p[w][(a, b)];
                    }
                }
            }
        }
        let embedded = (0..self.size(level)).map(|w| self.delta(level, w)).collect::<Result<Vec<_>, _>>()?;
        Ok(LiftedIdempotent { k, states: upper, operator: op, embedded, base: p.to_vec() })
    }

    /// Compares `F_i ∘ δ^{i−k}` with `F_k` for all `i ≥ k`.
    pub fn check_observable(&self, family: &[Vec<f64>], tol: f64) -> Result<ObservableReport, HierarchyError> {
        if family.len() != self.top_level() + 1 {
            return Err(HierarchyError::NoSuchLevel(family.len().saturating_sub(1)));
        }
        for (i, f) in family.iter().enumerate() {
            self.check_len(i, f.len())?;
        }
        let mut max_deviation: f64 = 0.0;
        let mut worst = None;
        for k in 0..family.len() {
            for w in 0..self.size(k) {
                let mut idx = w;
                for i in k + 1..family.len() {
                    idx = self.delta(i - 1, idx)?;
                    let d = (family[i][idx] - family[k][w]).abs();
                    if d > max_deviation {
                        max_deviation = d;
                        worst = Some(Violation { level: i, restricted_to: k, point: w });
                    }
                }
            }
        }
        Ok(ObservableReport { compatible: max_deviation <= tol, max_deviation, worst })
    }

    /// `F_0 = f`, `F_i = tg(F_{i−1})`.
    pub fn observable_from_base(&self, f: &[f64]) -> Result<Vec<Vec<f64>>, HierarchyError> {
        self.check_len(0, f.len())?;
        let mut family = vec![f.to_vec()];
        for level in 1..=self.top_level() {
            let next = self.gelfand_transform(level, family.last().expect("nonempty"))?;
            family.push(next);
        }
        Ok(family)
    }
}

#[derive(Clone, Debug)]
pub struct LiftedIdempotent {
    k: usize,
    states: usize,
    operator: DMatrix<f64>,
    embedded: Vec<usize>,
    base: Vec<DMatrix<f64>>,
}

impl LiftedIdempotent {
    pub fn operator(&self) -> &DMatrix<f64> {
        &self.operator
    }

    /// `max |P² − P|` over all entries, i.e. over every grid state.
    pub fn idempotency_defect(&self) -> f64 {
        (&self.operator * &self.operator - &self.operator).amax()
    }

    /// `k × k` block of the lifted operator at the state `δ_w`.
    pub fn block_at_embedded(&self, w: usize) -> DMatrix<f64> {
        let d = self.embedded[w];
        self.operator.view((d * self.k, d * self.k), (self.k, self.k)).into_owned()
    }

    /// Pairs `(rank lift(p)(δ_w), rank p(w))` for every base point.
    pub fn ranks(&self) -> Vec<(usize, usize)> {
        (0..self.embedded.len())
            .map(|w| (self.block_at_embedded(w).rank(1e-10), self.base[w].rank(1e-10)))
            .collect()
    }

    pub fn states(&self) -> usize {
        self.states
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub level: usize,
    pub restricted_to: usize,
    pub point: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableReport {
    pub compatible: bool,
    pub max_deviation: f64,
    pub worst: Option<Violation>,
}

/// Rank-one projector onto `(cos θ, sin θ)`.
pub fn rotation_projector(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c * c, c * s, c * s, s * s])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use rand::Rng;

    fn random_f(len: usize, seed: u64) -> Vec<f64> {
        let mut r = crate::rng::stream(seed, 0);
        (0..len).map(|_| r.random_range(-5.0..5.0)).collect()
    }

    #[test]
    fn level_sizes_match_simplex_count() {
        let h = Hierarchy::new(3, 2, 3).unwrap();
        assert_eq!(h.level_sizes(), vec![3, 6, 21, 231]);
        let h = Hierarchy::new(4, 50, 1).unwrap();
        assert_eq!(h.size(1), 23_426);
        assert_eq!(simplex_grid_size(4, 50), num_bigint::BigInt::from(23_426));
        assert!(matches!(Hierarchy::new(4, 3, 3), Err(HierarchyError::GridTooLarge { .. })));
        assert!(Hierarchy::new(2, 2, 4).is_err());
    }

    #[test]
    fn gelfand_examples() {
        let h = Hierarchy::new(2, 2, 1).unwrap();
        assert!(h.gelfand_transform(1, &[3.0, 3.0]).unwrap().iter().all(|v| *v == 3.0));
        let uniform = h.locate(1, &[0.5, 0.5]).unwrap();
        assert_eq!(h.gelfand_transform(1, &[0.0, 2.0]).unwrap()[uniform], 1.0);
        let d = h.delta(0, 1).unwrap();
        assert_eq!(h.gelfand_transform(1, &[0.7, -1.3]).unwrap()[d], -1.3);
        assert_eq!(h.locate(1, &[0.3, 0.7]), Err(HierarchyError::NotGridPoint(1)));
    }

    #[test]
    fn positivity() {
        let h = Hierarchy::new(3, 3, 2).unwrap();
        let f: Vec<f64> = random_f(3, 4).iter().map(|v| v.abs()).collect();
        assert!(h.gelfand_transform(1, &f).unwrap().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn delta_is_injective() {
        let h = Hierarchy::new(3, 2, 2).unwrap();
        for level in 0..2 {
            let mut images: Vec<usize> = (0..h.size(level)).map(|w| h.delta(level, w).unwrap()).collect();
            images.sort();
            images.dedup();
            assert_eq!(images.len(), h.size(level));
        }
    }

    #[test]
    fn pullback_identity() {
        let h = Hierarchy::new(4, 50, 1).unwrap();
        assert!(h.pullback_identity_check(0, &random_f(4, 1)).unwrap() < 1e-14);
        assert_eq!(h.pullback_identity_check(0, &[2.5; 4]).unwrap(), 0.0);
        let h = Hierarchy::new(3, 2, 3).unwrap();
        for level in 0..3 {
            let f: Vec<Q> = (0..h.size(level)).map(|i| q(i as i64 * 7 - 3, 11)).collect();
            assert!(h.pullback_identity_exact(level, &f).unwrap());
            assert_eq!(h.pullback_identity_check(level, &random_f(h.size(level), 9)).unwrap(), 0.0);
        }
    }

    #[test]
    fn lifted_projectors() {
        let h = Hierarchy::new(3, 2, 2).unwrap();
        let n0 = h.size(0);
        let identity = vec![DMatrix::identity(2, 2); n0];
        let rank_one = vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]); n0];
        let varying: Vec<_> = (0..n0).map(|w| rotation_projector(0.4 + 0.9 * w as f64)).collect();
        for p in [identity, rank_one, varying] {
            let lifted = h.lift_idempotent(0, &p).unwrap();
            assert!(lifted.idempotency_defect() < 1e-12);
            assert!(lifted.ranks().iter().all(|(a, b)| a == b));
        }
        let id = h.lift_idempotent(0, &vec![DMatrix::identity(2, 2); n0]).unwrap();
        assert_eq!(id.block_at_embedded(1), DMatrix::identity(2, 2));
        // Level 1 to level 2, projector varying over level-1 states.
        let p1: Vec<_> = (0..h.size(1)).map(|w| rotation_projector(0.3 * w as f64)).collect();
        assert!(h.lift_idempotent(1, &p1).unwrap().idempotency_defect() < 1e-12);
        let bad = vec![DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.5]); n0];
        assert!(matches!(h.lift_idempotent(0, &bad), Err(HierarchyError::NotIdempotent { .. })));
    }

    #[test]
    fn observables() {
        let h = Hierarchy::new(2, 3, 3).unwrap();
        let family = h.observable_from_base(&[1.5, -0.25]).unwrap();
        assert!(h.check_observable(&family, 1e-10).unwrap().compatible);
        let mut broken = family.clone();
        let d = h.delta(0, 0).unwrap();
        broken[1][d] += 1e-6;
        let r = h.check_observable(&broken, 1e-10).unwrap();
        assert!(!r.compatible);
        assert_eq!(r.worst.unwrap().level, 1);
    }

    #[test]
    fn point_base_is_trivial() {
        let h = Hierarchy::new(1, 4, 3).unwrap();
        assert_eq!(h.level_sizes(), vec![1, 1, 1, 1]);
        let family = h.observable_from_base(&[2.0]).unwrap();
        assert!(h.check_observable(&family, 1e-10).unwrap().compatible);
        assert!(h.pullback_identity_exact(2, &[qi(5)]).unwrap());
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn pullback_on_random_functions(n in 1usize..=4, m in 1u32..=3, seed in any::<u64>()) {
            let h = Hierarchy::new(n, m, 2).unwrap();
            for level in 0..2 {
                prop_assert!(h.pullback_identity_check(level, &random_f(h.size(level), seed)).unwrap() < 1e-14);
            }
            let family = h.observable_from_base(&random_f(n, seed)).unwrap();
            prop_assert!(h.check_observable(&family, 1e-12).unwrap().compatible);
        }
    }
}
