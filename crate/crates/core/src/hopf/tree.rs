use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;

use super::HopfError;
use crate::rational::factorial;

/// Unlabelled rooted tree in canonical form.
///
/// Children are kept sorted by their canonical encoding, so two trees are
/// equal iff they are isomorphic. The encoding is nested parentheses:
/// `()` is the single vertex, `(())` the two-vertex chain.
#[derive(Clone, Debug)]
pub struct Tree {
    children: Vec<Tree>,
    size: usize,
    encoding: String,
}

impl Tree {
    /// The single vertex `•`.
    pub fn leaf() -> Tree {
        Tree::graft(Vec::new())
    }

    /// Attaches the given trees below a fresh root (the `B+` operator).
    pub fn graft(mut children: Vec<Tree>) -> Tree {
        children.sort();
        let size = 1 + children.iter().map(Tree::size).sum::<usize>();
        let mut encoding = String::with_capacity(2 * size);
        encoding.push('(');
        for c in &children {
            encoding.push_str(&c.encoding);
        }
        encoding.push(')');
        Tree { children, size, encoding }
    }

    /// Linear chain with `n ≥ 1` vertices.
    pub fn chain(n: usize) -> Tree {
        assert!(n >= 1, "a tree has at least one vertex");
        (1..n).fold(Tree::leaf(), |t, _| Tree::graft(vec![t]))
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn encoding(&self) -> &str {
        &self.encoding
    }

    /// Tree factorial: product over vertices of the size of the subtree
    /// rooted there.
    pub fn tree_factorial(&self) -> BigInt {
        self.children
            .iter()
            .fold(BigInt::from(self.size), |acc, c| acc * c.tree_factorial())
    }

    /// Subtree sizes, one per vertex, in pre-order.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut out = vec![self.size];
        for c in &self.children {
            out.extend(c.subtree_sizes());
        }
        out
    }

    /// Order of the automorphism group: product over vertices of the
    /// factorials of identical-child multiplicities, times the children's
    /// own symmetries.
    pub fn symmetry_factor(&self) -> BigInt {
        let mut acc = BigInt::one();
        for c in &self.children {
            acc *= c.symmetry_factor();
        }
        for run in multiplicities(&self.children) {
            acc *= factorial(run as u32);
        }
        acc
    }

    /// Parses a canonical or non-canonical parenthesis encoding.
    pub fn parse(s: &str) -> Result<Tree, HopfError> {
        let bytes: Vec<u8> = s.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let mut pos = 0;
        let t = parse_tree(&bytes, &mut pos, s)?;
        if pos != bytes.len() {
            return Err(HopfError::Parse { input: s.to_string(), reason: "trailing input after tree".into() });
        }
        Ok(t)
    }
}

pub(super) fn multiplicities<T: PartialEq>(sorted: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

pub(super) fn parse_tree(bytes: &[u8], pos: &mut usize, src: &str) -> Result<Tree, HopfError> {
    let err = |reason: &str| HopfError::Parse { input: src.to_string(), reason: reason.to_string() };
    if bytes.get(*pos) != Some(&b'(') {
        return Err(err("expected '('"));
    }
    *pos += 1;
    let mut children = Vec::new();
    loop {
        match bytes.get(*pos) {
            Some(b'(') => children.push(parse_tree(bytes, pos, src)?),
            Some(b')') => {
                *pos += 1;
                return Ok(Tree::graft(children));
            }
            Some(_) => return Err(err("unexpected character")),
            None => return Err(err("unbalanced parentheses")),
        }
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.encoding == other.encoding
    }
}

impl Eq for Tree {}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.encoding.hash(state);
    }
}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.encoding.cmp(&other.encoding)
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encoding)
    }
}

impl FromStr for Tree {
    type Err = HopfError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tree::parse(s)
    }
}

/// All canonical trees with exactly `n` vertices, sorted.
pub fn trees_of_size(n: usize) -> Vec<Tree> {
    if n == 0 {
        return Vec::new();
    }
    let mut out: Vec<Tree> = super::forests_of_size(n - 1)
        .into_iter()
        .map(|f| Tree::graft(f.trees().to_vec()))
        .collect();
    out.sort();
    out
}
