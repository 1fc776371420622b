use super::SequencesError;

/// `Conf_{free∗int} = {0, …, n + r}` for a free law of order `n` and an
/// interaction of order `r`.
pub fn conf_interacting(n: usize, r: usize) -> Vec<usize> {
    (0..=n + r).collect()
}

/// The `(r+1)`-tuple of nondecreasing successive free states attached to an
/// interacting state `k`: entry `i` is `clamp(k − r + i, 0, n)`.
///
/// This gives `(a, …, a+r)` in the interior, `(0, …, 0, 1, …, k)` near 0 and
/// `(k−r, …, n, n, …)` near `n + r`.
pub fn xi_representation(k: usize, n: usize, r: usize) -> Result<Vec<usize>, SequencesError> {
    if k > n + r {
        return Err(SequencesError::OutsideConf { k, max: n + r });
    }
    Ok((0..=r).map(|i| (k + i).saturating_sub(r).min(n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashSet};

    #[test]
    fn examples() {
        assert_eq!(xi_representation(2, 4, 1).unwrap(), vec![1, 2]);
        assert_eq!(xi_representation(1, 4, 2).unwrap(), vec![0, 0, 1]);
        assert_eq!(xi_representation(5, 4, 2).unwrap(), vec![3, 4, 4]);
        assert!(xi_representation(7, 4, 2).is_err());
    }

    #[test]
    fn injective_and_bounded() {
        for n in 0..=10 {
            for r in 0..=n {
                let mut seen = HashSet::new();
                for k in conf_interacting(n, r) {
                    let t = xi_representation(k, n, r).unwrap();
                    assert!(t.windows(2).all(|w| w[0] <= w[1] && w[1] - w[0] <= 1));
                    assert!(t.iter().collect::<BTreeSet<_>>().len() <= r + 1);
                    assert!(seen.insert(t));
                }
                assert!(conf_interacting(n, r).len() > n || r == 0);
            }
        }
    }
}
