//! Truncated normal closure of a relator set: a semidecision procedure for the word
//! problem that never refutes.

use std::collections::{HashSet, VecDeque};

use super::{symmetrize, Decision, Presentation};
use crate::words::{reduce_letters, Letter, Word};

/// Elements of the normal closure of `p`'s relators of freely reduced length at most
/// `max_len`, reachable from `1` through words of length at most `max_len`.
///
/// Each step inserts a cyclic conjugate of a relator or its inverse at some position
/// of the current word, i.e. multiplies it by `g r^{+-1} g^{-1}` where `g` is a suffix
/// of the word (so `|g| <= max_len`) composed with a rotation.
#[derive(Debug, Clone)]
pub struct NormalClosureBall {
    rank: usize,
    max_len: usize,
    elements: HashSet<Vec<Letter>>,
}

impl NormalClosureBall {
    pub fn new(p: &Presentation, max_len: usize) -> NormalClosureBall {
        let rotations: Vec<Vec<Letter>> = symmetrize(p)
            .elements()
            .map(Word::into_letters)
            .filter(|r| r.len() <= 2 * max_len)
            .collect();
        let mut elements: HashSet<Vec<Letter>> = HashSet::new();
        let mut queue = VecDeque::new();
        elements.insert(Vec::new());
        queue.push_back(Vec::new());
        while let Some(current) = queue.pop_front() {
            for split in 0..=current.len() {
                for r in &rotations {
                    let next = reduce_letters(
                        current[..split]
                            .iter()
                            .chain(r.iter())
                            .chain(current[split..].iter())
                            .copied(),
                    );
                    if next.len() <= max_len && !elements.contains(&next) {
                        elements.insert(next.clone());
                        queue.push_back(next);
                    }
                }
            }
        }
        NormalClosureBall {
            rank: p.rank(),
            max_len,
            elements,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// `Identity` if `w` was reached, `Unknown` otherwise.
    pub fn decide(&self, w: &Word) -> Decision {
        assert_eq!(w.rank(), self.rank);
        if self.elements.contains(w.free_reduce().letters()) {
            Decision::Identity
        } else {
            Decision::Unknown
        }
    }
}

/// Semidecision: `Identity` if `w` lies in the truncated normal closure with length
/// budget `length_budget`, otherwise `Unknown`. Never answers `NonIdentity`.
pub fn brute_force_is_identity(w: &Word, p: &Presentation, length_budget: usize) -> Decision {
    NormalClosureBall::new(p, length_budget).decide(w)
}
