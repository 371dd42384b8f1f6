//! Word-problem oracles: the computational stand-in for a normal subgroup of `F_n`,
//! and hence for a marked group.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::words::{Letter, Word};

mod closure;
mod presentation;
mod small_cancellation;

pub use closure::{brute_force_is_identity, NormalClosureBall};
pub use presentation::{Presentation, PresentationError};
pub use small_cancellation::{
    check_metric_condition, dehn_is_identity, dehn_oracle, dehn_reduce, symmetrize, DehnMode, MetricReport,
    SmallCancellationError, SymmetrizedRelatorSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Decision {
    Identity,
    NonIdentity,
    Unknown,
}

/// Injective encoding of a group element, when an oracle can produce one.
pub type NormalForm = Vec<i64>;

/// A solver for the word problem of one marked group.
pub trait WordProblem: Send + Sync {
    /// `word` is freely reduced and non-empty.
    fn decide(&self, word: &[Letter]) -> Decision;

    /// Whether [`WordProblem::normal_form`] is implemented. When it is, two words have
    /// equal normal forms exactly when they represent the same element.
    fn has_normal_form(&self) -> bool {
        false
    }

    fn normal_form(&self, _word: &[Letter]) -> Option<NormalForm> {
        None
    }

    /// Exact oracles never answer [`Decision::Unknown`].
    fn is_exact(&self) -> bool {
        true
    }
}

/// A rank-`n` word-problem oracle with a provenance label.
#[derive(Clone)]
pub struct GroupOracle {
    rank: usize,
    label: String,
    solver: Arc<dyn WordProblem>,
}

impl GroupOracle {
    pub fn new(rank: usize, label: impl Into<String>, solver: impl WordProblem + 'static) -> Self {
        assert!(rank >= 1, "rank must be positive");
        GroupOracle {
            rank,
            label: label.into(),
            solver: Arc::new(solver),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_exact(&self) -> bool {
        self.solver.is_exact()
    }

    pub fn has_normal_form(&self) -> bool {
        self.solver.has_normal_form()
    }

    /// Panics if `word` has a different rank.
    pub fn decide(&self, word: &Word) -> Decision {
        assert_eq!(word.rank(), self.rank, "word rank does not match oracle rank");
        let reduced = word.free_reduce();
        if reduced.is_empty() {
            Decision::Identity
        } else {
            self.solver.decide(reduced.letters())
        }
    }

    /// Whether `u` and `v` represent the same element, i.e. `decide(u v^{-1})`.
    pub fn equal(&self, u: &Word, v: &Word) -> Decision {
        self.decide(&u.mul(&v.inverse()))
    }

    pub fn normal_form(&self, word: &Word) -> Option<NormalForm> {
        assert_eq!(word.rank(), self.rank, "word rank does not match oracle rank");
        let reduced = word.free_reduce();
        self.solver.normal_form(reduced.letters())
    }
}

impl fmt::Debug for GroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupOracle")
            .field("rank", &self.rank)
            .field("label", &self.label)
            .finish()
    }
}

struct FreeGroup;

impl WordProblem for FreeGroup {
    fn decide(&self, _word: &[Letter]) -> Decision {
        Decision::NonIdentity
    }

    fn has_normal_form(&self) -> bool {
        true
    }

    fn normal_form(&self, word: &[Letter]) -> Option<NormalForm> {
        Some(word.iter().map(|l| l.code() as i64).collect())
    }
}

struct FreeAbelian {
    rank: usize,
}

impl FreeAbelian {
    fn exponents(&self, word: &[Letter]) -> Vec<i64> {
        let mut sums = vec![0i64; self.rank];
        for l in word {
            sums[l.generator() - 1] += l.sign() as i64;
        }
        sums
    }
}

impl WordProblem for FreeAbelian {
    fn decide(&self, word: &[Letter]) -> Decision {
        if self.exponents(word).iter().all(|&e| e == 0) {
            Decision::Identity
        } else {
            Decision::NonIdentity
        }
    }

    fn has_normal_form(&self) -> bool {
        true
    }

    fn normal_form(&self, word: &[Letter]) -> Option<NormalForm> {
        Some(self.exponents(word))
    }
}

/// `Z` (or `Z/m`) marked by the integers `weights`: generator `i` maps to `weights[i]`.
struct IntegerMarking {
    weights: Vec<i64>,
    modulus: Option<i64>,
}

impl IntegerMarking {
    fn value(&self, word: &[Letter]) -> i64 {
        let v: i64 = word
            .iter()
            .map(|l| self.weights[l.generator() - 1] * l.sign() as i64)
            .sum();
        match self.modulus {
            Some(m) => v.rem_euclid(m),
            None => v,
        }
    }
}

impl WordProblem for IntegerMarking {
    fn decide(&self, word: &[Letter]) -> Decision {
        if self.value(word) == 0 {
            Decision::Identity
        } else {
            Decision::NonIdentity
        }
    }

    fn has_normal_form(&self) -> bool {
        true
    }

    fn normal_form(&self, word: &[Letter]) -> Option<NormalForm> {
        Some(vec![self.value(word)])
    }
}

struct TrivialGroup;

impl WordProblem for TrivialGroup {
    fn decide(&self, _word: &[Letter]) -> Decision {
        Decision::Identity
    }

    fn has_normal_form(&self) -> bool {
        true
    }

    fn normal_form(&self, _word: &[Letter]) -> Option<NormalForm> {
        Some(Vec::new())
    }
}

/// The free group `F_n`.
pub fn free_oracle(rank: usize) -> GroupOracle {
    GroupOracle::new(rank, format!("free:{rank}"), FreeGroup)
}

/// The free abelian group `Z^n` with its standard basis.
pub fn abelian_oracle(rank: usize) -> GroupOracle {
    GroupOracle::new(rank, format!("abelian:{rank}"), FreeAbelian { rank })
}

/// The trivial group marked by `rank` copies of the identity.
pub fn trivial_oracle(rank: usize) -> GroupOracle {
    GroupOracle::new(rank, format!("trivial:{rank}"), TrivialGroup)
}

/// `Z` marked by the integers `weights`, e.g. `[2, 3]` for `(Z, (x^2, x^3))`.
pub fn integer_marking_oracle(weights: &[i64]) -> GroupOracle {
    let label = format!(
        "zmark:{}",
        weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
    );
    GroupOracle::new(
        weights.len(),
        label,
        IntegerMarking {
            weights: weights.to_vec(),
            modulus: None,
        },
    )
}

/// The cyclic group `Z/m` marked by a single generator.
pub fn cyclic_oracle(modulus: u32) -> GroupOracle {
    assert!(modulus >= 1);
    GroupOracle::new(
        1,
        format!("cyclic:{modulus}"),
        IntegerMarking {
            weights: vec![1],
            modulus: Some(modulus as i64),
        },
    )
}
