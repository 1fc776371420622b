//! Connes–Kreimer Hopf algebra of rooted forests over the rationals.
//!
//! A rooted tree stands for a graph with its nested subdivergences; a cut
//! of the tree removes a subdivergence (the cut-off forest) and leaves the
//! quotient (the trunk containing the root). Everything here is exact.

mod tree;

pub use tree::{trees_of_size, Tree};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::CommutativeAlgebra;
use crate::rational::{factorial, fmt_q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HopfError {
    #[error("cannot parse tree/forest {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// Commutative product of rooted trees; the empty forest is the unit `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Forest {
    trees: Vec<Tree>,
}

impl Forest {
    pub fn unit() -> Forest {
        Forest { trees: Vec::new() }
    }

    pub fn from_trees(mut trees: Vec<Tree>) -> Forest {
        trees.sort();
        Forest { trees }
    }

    pub fn single(t: Tree) -> Forest {
        Forest { trees: vec![t] }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn is_unit(&self) -> bool {
        self.trees.is_empty()
    }

    /// Total vertex count (the grading).
    pub fn size(&self) -> usize {
        self.trees.iter().map(Tree::size).sum()
    }

    /// Product of the tree symmetry factors times the factorials of the
    /// multiplicities of identical trees.
    pub fn symmetry_factor(&self) -> num_bigint::BigInt {
        let mut acc: num_bigint::BigInt = self.trees.iter().map(Tree::symmetry_factor).product();
        for run in tree::multiplicities(&self.trees) {
            acc *= factorial(run as u32);
        }
        acc
    }

    /// Parses `1`, a single tree, or a juxtaposition of trees such as
    /// `"()(())"` (whitespace and `*` separators are ignored).
    pub fn parse(s: &str) -> Result<Forest, HopfError> {
        let trimmed = s.trim();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(Forest::unit());
        }
        let bytes: Vec<u8> = trimmed
            .bytes()
            .filter(|b| !b.is_ascii_whitespace() && *b != b'*')
            .collect();
        let mut pos = 0;
        let mut trees = Vec::new();
        while pos < bytes.len() {
            trees.push(tree::parse_tree(&bytes, &mut pos, s)?);
        }
        Ok(Forest::from_trees(trees))
    }
}

impl From<Tree> for Forest {
    fn from(t: Tree) -> Self {
        Forest::single(t)
    }
}

impl FromStr for Forest {
    type Err = HopfError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Forest::parse(s)
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trees.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<&str> = self.trees.iter().map(Tree::encoding).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Multiset union of forests.
pub fn forest_mul(a: &Forest, b: &Forest) -> Forest {
    let mut trees = a.trees.clone();
    trees.extend(b.trees.iter().cloned());
    Forest::from_trees(trees)
}

/// Element of `H`: finite rational combination of forests.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinComb {
    terms: BTreeMap<Forest, Q>,
}

impl LinComb {
    pub fn zero() -> Self {
        LinComb::default()
    }

    pub fn basis(f: Forest) -> Self {
        LinComb::term(f, Q::one())
    }

    pub fn term(f: Forest, c: Q) -> Self {
        let mut out = LinComb::zero();
        out.add_term(f, c);
        out
    }

    pub fn add_term(&mut self, f: Forest, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(f).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn coeff(&self, f: &Forest) -> Q {
        self.terms.get(f).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Forest, &Q)> {
        self.terms.iter()
    }

    pub fn plus(&self, rhs: &LinComb) -> LinComb {
        let mut out = self.clone();
        for (f, c) in &rhs.terms {
            out.add_term(f.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &Q) -> LinComb {
        if c.is_zero() {
            return LinComb::zero();
        }
        LinComb { terms: self.terms.iter().map(|(f, x)| (f.clone(), x * c)).collect() }
    }

    /// Bilinear extension of the forest product.
    pub fn times(&self, rhs: &LinComb) -> LinComb {
        let mut out = LinComb::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(forest_mul(a, b), x * y);
            }
        }
        out
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(forest, c)| format!("{}·[{}]", fmt_q(c), forest))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl CommutativeAlgebra for LinComb {
    fn zero_value() -> Self {
        LinComb::zero()
    }
    fn unit_value() -> Self {
        LinComb::basis(Forest::unit())
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.plus(rhs)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.times(rhs)
    }
    fn scaled(&self, c: &Q) -> Self {
        self.scaled(c)
    }
}

/// Element of `H ⊗ H`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TensorLinComb {
    terms: BTreeMap<(Forest, Forest), Q>,
}

impl TensorLinComb {
    pub fn zero() -> Self {
        TensorLinComb::default()
    }

    pub fn add_term(&mut self, left: Forest, right: Forest, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = (left, right);
        let slot = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn coeff(&self, left: &Forest, right: &Forest) -> Q {
        self.terms
            .get(&(left.clone(), right.clone()))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Forest, &Forest, &Q)> {
        self.terms.iter().map(|((l, r), c)| (l, r, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(a ⊗ b)(c ⊗ d) = ac ⊗ bd`, extended bilinearly.
    pub fn times(&self, rhs: &TensorLinComb) -> TensorLinComb {
        let mut out = TensorLinComb::zero();
        for ((a, b), x) in &self.terms {
            for ((c, d), y) in &rhs.terms {
                out.add_term(forest_mul(a, c), forest_mul(b, d), x * y);
            }
        }
        out
    }
}

impl fmt::Display for TensorLinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((l, r), c)| format!("{}·[{} ⊗ {}]", fmt_q(c), l, r))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// All admissible cuts of `t`, the empty cut included, as
/// `(cut-off forest, trunk)` pairs. A cut removes at most one edge on any
/// root-to-leaf path.
pub fn admissible_cuts(t: &Tree) -> Vec<(Forest, Tree)> {
    // Partial states: (pruned trees so far, trunk children so far).
    let mut states: Vec<(Vec<Tree>, Vec<Tree>)> = vec![(Vec::new(), Vec::new())];
    for child in t.children() {
        let child_cuts = admissible_cuts(child);
        let mut next = Vec::with_capacity(states.len() * (child_cuts.len() + 1));
        for (pruned, kept) in &states {
            // Cut the edge above `child`: the whole subtree is pruned.
            let mut p = pruned.clone();
            p.push(child.clone());
            next.push((p, kept.clone()));
            // Keep the edge and cut inside the child.
            for (cp, ctrunk) in &child_cuts {
                let mut p = pruned.clone();
                p.extend(cp.trees().iter().cloned());
                let mut k = kept.clone();
                k.push(ctrunk.clone());
                next.push((p, k));
            }
        }
        states = next;
    }
    states
        .into_iter()
        .map(|(pruned, kept)| (Forest::from_trees(pruned), Tree::graft(kept)))
        .collect()
}

/// Proper (nonempty) admissible cuts.
pub fn proper_cuts(t: &Tree) -> Vec<(Forest, Tree)> {
    admissible_cuts(t).into_iter().filter(|(p, _)| !p.is_unit()).collect()
}

/// `Δ(t) = t ⊗ 1 + Σ_{admissible c} P^c(t) ⊗ R^c(t)`.
pub fn coproduct_tree(t: &Tree) -> TensorLinComb {
    let mut out = TensorLinComb::zero();
    out.add_term(Forest::single(t.clone()), Forest::unit(), Q::one());
    for (pruned, trunk) in admissible_cuts(t) {
        out.add_term(pruned, Forest::single(trunk), Q::one());
    }
    out
}

/// Coproduct of a forest, using multiplicativity `Δ(ab) = Δ(a)Δ(b)`.
pub fn coproduct(f: &Forest) -> TensorLinComb {
    let mut out = TensorLinComb::zero();
    out.add_term(Forest::unit(), Forest::unit(), Q::one());
    for t in f.trees() {
        out = out.times(&coproduct_tree(t));
    }
    out
}

pub fn coproduct_lin(x: &LinComb) -> TensorLinComb {
    let mut out = TensorLinComb::zero();
    for (f, c) in x.iter() {
        for (l, r, d) in coproduct(f).iter() {
            out.add_term(l.clone(), r.clone(), c * d);
        }
    }
    out
}

/// Coefficient of the empty forest.
pub fn counit(x: &LinComb) -> Q {
    x.coeff(&Forest::unit())
}

/// Antipode with a per-tree cache; use one instance for many evaluations.
#[derive(Default)]
pub struct Antipode {
    cache: HashMap<Tree, LinComb>,
}

impl Antipode {
    pub fn new() -> Self {
        Self::default()
    }

    /// `S(t) = −t − Σ_{proper cuts} S(P^c(t)) · R^c(t)`.
    pub fn tree(&mut self, t: &Tree) -> LinComb {
        if let Some(s) = self.cache.get(t) {
            return s.clone();
        }
        let mut out = LinComb::term(Forest::single(t.clone()), -Q::one());
        for (pruned, trunk) in proper_cuts(t) {
            let s = self.forest(&pruned);
            let prod = s.times(&LinComb::basis(Forest::single(trunk)));
            out = out.plus(&prod.scaled(&-Q::one()));
        }
        self.cache.insert(t.clone(), out.clone());
        out
    }

    pub fn forest(&mut self, f: &Forest) -> LinComb {
        let mut out = LinComb::basis(Forest::unit());
        for t in f.trees() {
            out = out.times(&self.tree(t));
        }
        out
    }
}

pub fn antipode(f: &Forest) -> LinComb {
    Antipode::new().forest(f)
}

/// `(f ∗ g)(x) = m ∘ (f ⊗ g) ∘ Δ(x)`.
pub fn convolve<A, F, G>(f: F, g: G, x: &Forest) -> A
where
    A: CommutativeAlgebra,
    F: Fn(&Forest) -> A,
    G: Fn(&Forest) -> A,
{
    coproduct(x)
        .iter()
        .fold(A::zero_value(), |acc, (l, r, c)| acc.plus(&f(l).times(&g(r)).scaled(c)))
}

/// Linear extension of [`convolve`] to combinations of forests.
pub fn convolve_lin<A, F, G>(f: F, g: G, x: &LinComb) -> A
where
    A: CommutativeAlgebra,
    F: Fn(&Forest) -> A,
    G: Fn(&Forest) -> A,
{
    x.iter()
        .fold(A::zero_value(), |acc, (forest, c)| acc.plus(&convolve(&f, &g, forest).scaled(c)))
}

/// Convolution unit `u ∘ ε`: sends `1` to `1` and every nonempty forest to 0.
pub fn counit_unit<A: CommutativeAlgebra>(x: &Forest) -> A {
    if x.is_unit() {
        A::unit_value()
    } else {
        A::zero_value()
    }
}

/// Extends a map on trees multiplicatively to forests.
pub fn multiplicative<A, T>(on_tree: T) -> impl Fn(&Forest) -> A
where
    A: CommutativeAlgebra,
    T: Fn(&Tree) -> A,
{
    move |f: &Forest| f.trees().iter().fold(A::unit_value(), |acc, t| acc.times(&on_tree(t)))
}

type Triple = BTreeMap<(Forest, Forest, Forest), Q>;

fn add_triple(m: &mut Triple, key: (Forest, Forest, Forest), c: Q) {
    let slot = m.entry(key.clone()).or_insert_with(Q::zero);
    *slot += c;
    if slot.is_zero() {
        m.remove(&key);
    }
}

/// Exact check of `(Δ ⊗ id) ∘ Δ = (id ⊗ Δ) ∘ Δ` on one forest.
pub fn is_coassociative_on(f: &Forest) -> bool {
    let d = coproduct(f);
    let mut left = Triple::new();
    let mut right = Triple::new();
    for (l, r, c) in d.iter() {
        for (ll, lr, c2) in coproduct(l).iter() {
            add_triple(&mut left, (ll.clone(), lr.clone(), r.clone()), c * c2);
        }
        for (rl, rr, c2) in coproduct(r).iter() {
            add_triple(&mut right, (l.clone(), rl.clone(), rr.clone()), c * c2);
        }
    }
    left == right
}

/// Exact check of `Δ(ab) = Δ(a)Δ(b)`.
pub fn is_multiplicative_on(a: &Forest, b: &Forest) -> bool {
    coproduct(&forest_mul(a, b)) == coproduct(a).times(&coproduct(b))
}

/// Exact check of `m ∘ (S ⊗ id) ∘ Δ(x) = ε(x)·1`.
pub fn antipode_axiom_holds(f: &Forest, s: &mut Antipode) -> bool {
    let mut lhs = LinComb::zero();
    for (l, r, c) in coproduct(f).iter() {
        lhs = lhs.plus(&s.forest(l).times(&LinComb::basis(r.clone())).scaled(c));
    }
    let rhs = if f.is_unit() { LinComb::basis(Forest::unit()) } else { LinComb::zero() };
    lhs == rhs
}

/// Every term `γ ⊗ Γ/γ` of `Δ(Γ)` satisfies `|γ| + |Γ/γ| = |Γ|`.
pub fn is_graded_on(f: &Forest) -> bool {
    coproduct(f).iter().all(|(l, r, _)| l.size() + r.size() == f.size())
}

/// All canonical forests with exactly `n` vertices, sorted.
pub fn forests_of_size(n: usize) -> Vec<Forest> {
    if n == 0 {
        return vec![Forest::unit()];
    }
    let mut pool: Vec<Tree> = (1..=n).flat_map(trees_of_size).collect();
    pool.sort();
    let mut out = Vec::new();
    let mut current = Vec::new();
    build_forests(&pool, 0, n, &mut current, &mut out);
    out.sort();
    out
}

fn build_forests(pool: &[Tree], start: usize, remaining: usize, current: &mut Vec<Tree>, out: &mut Vec<Forest>) {
    if remaining == 0 {
        out.push(Forest::from_trees(current.clone()));
        return;
    }
    for i in start..pool.len() {
        if pool[i].size() <= remaining {
            current.push(pool[i].clone());
            build_forests(pool, i, remaining - pool[i].size(), current, out);
            current.pop();
        }
    }
}

/// All canonical forests with at most `n` vertices (the empty forest included).
pub fn forests_up_to(n: usize) -> Vec<Forest> {
    (0..=n).flat_map(forests_of_size).collect()
}

/// All canonical trees with at most `n` vertices.
pub fn trees_up_to(n: usize) -> Vec<Tree> {
    (1..=n).flat_map(trees_of_size).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn f(s: &str) -> Forest {
        Forest::parse(s).unwrap()
    }

    #[test]
    fn forest_product_examples() {
        let dot = f("()");
        let t2 = f("(())");
        assert_eq!(forest_mul(&Forest::unit(), &t2), t2);
        assert_eq!(forest_mul(&dot, &dot), f("()()"));
        assert_eq!(forest_mul(&f("() (())"), &dot), f("()()(())"));
        assert_eq!(forest_mul(&dot, &t2), forest_mul(&t2, &dot));
    }

    #[test]
    fn forest_parse_and_display() {
        assert_eq!(f("1"), Forest::unit());
        assert_eq!(f("()(())").to_string(), "(()) ()");
        assert_eq!(Forest::unit().to_string(), "1");
        assert!(Forest::parse("(()").is_err());
    }

    #[test]
    fn coproduct_examples() {
        let d1 = coproduct(&Forest::unit());
        assert_eq!(d1.len(), 1);
        assert_eq!(d1.coeff(&Forest::unit(), &Forest::unit()), qi(1));

        let dot = f("()");
        let d = coproduct(&dot);
        assert_eq!(d.len(), 2);
        assert_eq!(d.coeff(&dot, &Forest::unit()), qi(1));
        assert_eq!(d.coeff(&Forest::unit(), &dot), qi(1));

        // Brute-force enumeration of admissible single-edge cuts of the chain.
        let t2 = f("(())");
        let d = coproduct(&t2);
        assert_eq!(d.len(), 3);
        assert_eq!(d.coeff(&t2, &Forest::unit()), qi(1));
        assert_eq!(d.coeff(&Forest::unit(), &t2), qi(1));
        assert_eq!(d.coeff(&dot, &dot), qi(1));
    }

    #[test]
    fn cherry_coproduct() {
        // Δ(cherry) = c⊗1 + 1⊗c + 2 •⊗t₂ + •·•⊗•
        let c = f("(()())");
        let d = coproduct(&c);
        assert_eq!(d.coeff(&f("()"), &f("(())")), qi(2));
        assert_eq!(d.coeff(&f("()()"), &f("()")), qi(1));
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn counit_examples() {
        assert_eq!(counit(&LinComb::basis(Forest::unit())), qi(1));
        assert_eq!(counit(&LinComb::basis(f("()"))), qi(0));
        let x = LinComb::term(Forest::unit(), qi(3)).plus(&LinComb::term(f("(())"), qi(2)));
        assert_eq!(counit(&x), qi(3));
    }

    #[test]
    fn antipode_examples() {
        assert_eq!(antipode(&Forest::unit()), LinComb::basis(Forest::unit()));
        assert_eq!(antipode(&f("()")), LinComb::term(f("()"), qi(-1)));
        let want = LinComb::term(f("(())"), qi(-1)).plus(&LinComb::basis(f("()()")));
        assert_eq!(antipode(&f("(())")), want);
    }

    #[test]
    fn convolution_unit_and_antipode() {
        let id = |x: &Forest| LinComb::basis(x.clone());
        let mut s = Antipode::new();
        let t2 = f("(())");
        let sx: Vec<(Forest, LinComb)> = forests_up_to(2).into_iter().map(|x| (x.clone(), s.forest(&x))).collect();
        let sv = convolve(|x: &Forest| sx.iter().find(|(k, _)| k == x).unwrap().1.clone(), id, &t2);
        assert!(sv.is_zero());

        let g = multiplicative(|t: &Tree| q(1, t.size() as i64 + 1));
        for x in forests_up_to(3) {
            assert_eq!(convolve(counit_unit::<Q>, &g, &x), g(&x));
        }
    }

    #[test]
    fn convolution_expands_coproduct() {
        // (C ∗ F)(t₂) = C(t₂) + F(t₂) + C(•)F(•)
        let c = multiplicative(|t: &Tree| qi(t.size() as i64 * 10 + 1));
        let fr = multiplicative(|t: &Tree| q(1, 1 + t.size() as i64));
        let t2 = f("(())");
        let dot = f("()");
        let want = c(&t2) + fr(&t2) + c(&dot) * fr(&dot);
        assert_eq!(convolve(&c, &fr, &t2), want);
    }

    #[test]
    fn forest_counts() {
        let counts: Vec<usize> = (0..=5).map(|n| forests_of_size(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20]);
    }

    #[test]
    fn grading_holds_small() {
        for x in forests_up_to(5) {
            assert!(is_graded_on(&x), "grading fails on {x}");
        }
    }

    use proptest::prelude::*;

    fn small_forest() -> impl Strategy<Value = Forest> {
        let all = forests_up_to(4);
        (0..all.len()).prop_map(move |i| all[i].clone())
    }

    proptest! {
        #[test]
        fn axioms_on_products(a in small_forest(), b in small_forest()) {
            let ab = forest_mul(&a, &b);
            prop_assert!(is_multiplicative_on(&a, &b));
            prop_assert!(is_coassociative_on(&ab));
            prop_assert!(antipode_axiom_holds(&ab, &mut Antipode::new()));
            prop_assert!(is_graded_on(&ab));
        }
    }
}
