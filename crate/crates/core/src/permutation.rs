use std::fmt;

use crate::error::{Error, Result};
use crate::graph::HybridGraph;
use crate::vertex_set::VertexSet;

/// A bijection of `{0, .., m-1}`; `images[v]` is the image of `v`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Permutation {
            images: (0..m).collect(),
        }
    }

    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &v in &images {
            if v >= m || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(m));
            }
        }
        Ok(Permutation { images })
    }

    /// From 1-based one-line notation, e.g. `[3, 2, 1]`.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidPermutation(labels.len()));
        }
        Permutation::new(labels.iter().map(|&l| l - 1).collect())
    }

    /// The transposition of `a` and `b` (0-based) on `m` points.
    pub fn transposition(m: usize, a: usize, b: usize) -> Self {
        let mut p = Permutation::identity(m);
        p.images.swap(a, b);
        p
    }

    pub fn m(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// 1-based one-line notation.
    pub fn labels(&self) -> Vec<usize> {
        self.images.iter().map(|&v| v + 1).collect()
    }

    pub fn apply(&self, v: usize) -> usize {
        self.images[v]
    }

    pub fn apply_set(&self, s: VertexSet) -> VertexSet {
        s.iter().map(|v| self.images[v]).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.m()];
        for (v, &w) in self.images.iter().enumerate() {
            inv[w] = v;
        }
        Permutation { images: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation {
            images: other.images.iter().map(|&v| self.images[v]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(v, &w)| v == w)
    }

    /// Maps arrows to arrows and undirected edges to undirected edges.
    pub fn is_automorphism_of(&self, h: &HybridGraph) -> bool {
        self.m() == h.m() && h.relabel(&self.images) == *h
    }

    /// Every permutation of `m` points in lexicographic order.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..m).collect();
        loop {
            out.push(Permutation {
                images: current.clone(),
            });
            // next lexicographic permutation
            let Some(k) = (1..m).rev().find(|&k| current[k - 1] < current[k]) else {
                return out;
            };
            let l = (k..m).rev().find(|&l| current[l] > current[k - 1]).expect("exists");
            current.swap(k - 1, l);
            current[k..].reverse();
        }
    }
}

/// One-line notation with 1-based labels: `[3 2 1]`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, v) in self.images.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_operations() {
        let p = Permutation::from_labels(&[2, 3, 1]).unwrap();
        assert_eq!(p.apply(0), 1);
        assert_eq!(p.inverse().compose(&p), Permutation::identity(3));
        assert_eq!(
            p.apply_set(VertexSet::from_labels(&[1, 2])),
            VertexSet::from_labels(&[2, 3])
        );
        assert_eq!(p.to_string(), "[2 3 1]");
        assert!(Permutation::from_labels(&[1, 1, 2]).is_err());
        assert!(Permutation::from_labels(&[0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn enumerates_all_permutations() {
        assert_eq!(Permutation::all(0).len(), 1);
        assert_eq!(Permutation::all(4).len(), 24);
        let all = Permutation::all(5);
        assert_eq!(all.len(), 120);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all);
    }

    #[test]
    fn automorphism_check() {
        let collider = HybridGraph::from_labels(3, &[(1, 2), (3, 2)], &[]).unwrap();
        assert!(Permutation::transposition(3, 0, 2).is_automorphism_of(&collider));
        assert!(!Permutation::transposition(3, 0, 1).is_automorphism_of(&collider));
    }
}
