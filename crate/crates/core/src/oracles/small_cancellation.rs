//! Symmetrized relator sets, the metric small-cancellation condition `C'(lambda)`,
//! and Dehn's algorithm.
//!
//! A symmetrized set is stored as its cyclic classes (each relator and its inverse,
//! as cyclic words). An element of the set is a rotation of a class. Pieces are
//! common prefixes of two rotations taken at distinct positions, so a proper power
//! produces a piece as long as itself.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use super::{Decision, GroupOracle, Presentation, WordProblem};
use crate::words::{reduce_letters, Letter, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmallCancellationError {
    #[error("lambda must lie strictly between 0 and 1, got {0}")]
    InvalidLambda(Ratio<u64>),
    #[error("relator set fails C'(1/6): piece {piece:?} of length {max_piece_length}")]
    PreconditionViolated {
        max_piece_length: usize,
        piece: String,
    },
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Debug, Clone)]
struct CyclicClass {
    /// The cyclic word written out twice, so every rotation is a contiguous slice.
    doubled: Vec<Letter>,
    len: usize,
    period: usize,
}

impl CyclicClass {
    fn new(word: &[Letter]) -> CyclicClass {
        let len = word.len();
        let mut doubled = Vec::with_capacity(2 * len);
        doubled.extend_from_slice(word);
        doubled.extend_from_slice(word);
        let period = (1..=len)
            .find(|&p| len.is_multiple_of(p) && doubled[p..p + len] == doubled[..len])
            .unwrap_or(len);
        CyclicClass {
            doubled,
            len,
            period,
        }
    }

    fn rotation(&self, offset: usize) -> &[Letter] {
        &self.doubled[offset..offset + self.len]
    }

    fn canonical(&self) -> &[Letter] {
        (0..self.len).map(|p| self.rotation(p)).min().unwrap_or(&[])
    }
}

/// The closure of a relator set under cyclic permutation and inversion.
#[derive(Debug)]
pub struct SymmetrizedRelatorSet {
    rank: usize,
    classes: Vec<CyclicClass>,
    sixth: OnceLock<MetricReport>,
    dehn_index: OnceLock<DehnIndex>,
}

/// Builds the symmetrized set of `p`'s relators.
pub fn symmetrize(p: &Presentation) -> SymmetrizedRelatorSet {
    let mut classes = Vec::new();
    let mut seen: HashSet<Vec<Letter>> = HashSet::new();
    for r in p.relators() {
        for word in [r.clone(), r.inverse()] {
            let class = CyclicClass::new(word.letters());
            if seen.insert(class.canonical().to_vec()) {
                classes.push(class);
            }
        }
    }
    SymmetrizedRelatorSet {
        rank: p.rank(),
        classes,
        sixth: OnceLock::new(),
        dehn_index: OnceLock::new(),
    }
}

impl SymmetrizedRelatorSet {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of distinct elements.
    pub fn len(&self) -> usize {
        self.classes.iter().map(|c| c.period).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// All distinct elements, class by class.
    pub fn elements(&self) -> impl Iterator<Item = Word> + '_ {
        self.classes.iter().flat_map(move |c| {
            (0..c.period).map(move |p| Word::from_letters_unchecked(self.rank, c.rotation(p).to_vec()))
        })
    }

    pub fn contains(&self, word: &Word) -> bool {
        word.rank() == self.rank
            && self
                .classes
                .iter()
                .any(|c| c.len == word.len() && (0..c.period).any(|p| c.rotation(p) == word.letters()))
    }

    /// `ceil(|r| / 2)` for each cyclic class, in class order.
    pub fn half_lengths(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.len.div_ceil(2)).collect()
    }

    /// Metric report for `lambda = 1/6`, computed once.
    pub fn sixth_report(&self) -> &MetricReport {
        self.sixth.get_or_init(|| metric_report(self, Ratio::new(1, 6)))
    }

    fn dehn_index(&self) -> &DehnIndex {
        self.dehn_index.get_or_init(|| DehnIndex::new(&self.classes))
    }
}

/// Result of checking `C'(lambda)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricReport {
    pub max_piece_length: usize,
    pub shortest_relator: usize,
    pub satisfied: bool,
    /// A longest piece violating the condition; present iff not satisfied.
    pub witness_piece: Option<Word>,
}

impl Serialize for MetricReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("MetricReport", 4)?;
        s.serialize_field("max_piece_length", &self.max_piece_length)?;
        s.serialize_field("shortest_relator", &self.shortest_relator)?;
        s.serialize_field("satisfied", &self.satisfied)?;
        s.serialize_field("witness_piece", &self.witness_piece.as_ref().map(|w| w.to_string()))?;
        s.end()
    }
}

/// Checks `C'(lambda)`: every piece that is a prefix of an element `r` is shorter
/// than `lambda * |r|`.
pub fn check_metric_condition(
    s: &SymmetrizedRelatorSet,
    lambda: Ratio<u64>,
) -> Result<MetricReport, SmallCancellationError> {
    if *lambda.numer() == 0 || lambda >= Ratio::from_integer(1) {
        return Err(SmallCancellationError::InvalidLambda(lambda));
    }
    if lambda == Ratio::new(1, 6) {
        return Ok(s.sixth_report().clone());
    }
    Ok(metric_report(s, lambda))
}

fn metric_report(s: &SymmetrizedRelatorSet, lambda: Ratio<u64>) -> MetricReport {
    let classes = &s.classes;
    let shortest_relator = classes.iter().map(|c| c.len).min().unwrap_or(0);

    // Every rotation at every position, sorted; the longest common prefix of an
    // occurrence with any other occurrence is attained at a sorted neighbour.
    let mut occurrences: Vec<(u32, u32)> = classes
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.len as u32).map(move |p| (ci as u32, p)))
        .collect();
    let rot = |&(c, p): &(u32, u32)| classes[c as usize].rotation(p as usize);
    occurrences.sort_by(|a, b| rot(a).cmp(rot(b)).then(a.cmp(b)));

    let neighbour_lcp: Vec<usize> = occurrences
        .windows(2)
        .map(|pair| common_prefix(rot(&pair[0]), rot(&pair[1])))
        .collect();
    let max_piece_length = neighbour_lcp.iter().copied().max().unwrap_or(0);

    let (num, den) = (*lambda.numer() as u128, *lambda.denom() as u128);
    let mut witness: Option<&[Letter]> = None;
    for (i, occ) in occurrences.iter().enumerate() {
        let left = if i > 0 { neighbour_lcp[i - 1] } else { 0 };
        let right = neighbour_lcp.get(i).copied().unwrap_or(0);
        let piece = left.max(right);
        let len = classes[occ.0 as usize].len;
        if (piece as u128) * den >= num * (len as u128) {
            let candidate = &rot(occ)[..piece];
            let better = match witness {
                None => true,
                Some(w) => candidate.len() > w.len() || (candidate.len() == w.len() && candidate < w),
            };
            if better {
                witness = Some(candidate);
            }
        }
    }
    MetricReport {
        max_piece_length,
        shortest_relator,
        satisfied: witness.is_none(),
        witness_piece: witness.map(|w| Word::from_letters_unchecked(s.rank, w.to_vec())),
    }
}

fn common_prefix(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

const HASH_MOD: u64 = (1 << 61) - 1;
const HASH_BASE: u64 = 0x1d3f_84a5_b7c9_2e61 % HASH_MOD;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % HASH_MOD as u128) as u64
}

/// Polynomial prefix hashes, so any window hash is O(1).
struct PrefixHashes {
    prefix: Vec<u64>,
    powers: Vec<u64>,
}

impl PrefixHashes {
    fn new(letters: &[Letter]) -> PrefixHashes {
        let mut prefix = Vec::with_capacity(letters.len() + 1);
        let mut powers = Vec::with_capacity(letters.len() + 1);
        prefix.push(0);
        powers.push(1);
        for (i, l) in letters.iter().enumerate() {
            prefix.push((mul_mod(prefix[i], HASH_BASE) + l.code() as u64 + 1) % HASH_MOD);
            powers.push(mul_mod(powers[i], HASH_BASE));
        }
        PrefixHashes { prefix, powers }
    }

    fn window(&self, start: usize, len: usize) -> u64 {
        let hi = self.prefix[start + len];
        let lo = mul_mod(self.prefix[start], self.powers[len]);
        (hi + HASH_MOD - lo) % HASH_MOD
    }
}

/// For each class, the rotations keyed by the hash of their first `floor(|r|/2) + 1`
/// letters: the shortest prefix that exceeds half the relator.
#[derive(Debug)]
struct DehnIndex {
    thresholds: Vec<usize>,
    by_prefix: HashMap<(usize, u64), Vec<(u32, u32)>>,
}

impl DehnIndex {
    fn new(classes: &[CyclicClass]) -> DehnIndex {
        let mut by_prefix: HashMap<(usize, u64), Vec<(u32, u32)>> = HashMap::new();
        let mut thresholds = Vec::new();
        for (ci, c) in classes.iter().enumerate() {
            let h = c.len / 2 + 1;
            thresholds.push(h);
            let hashes = PrefixHashes::new(&c.doubled);
            for p in 0..c.len {
                by_prefix
                    .entry((h, hashes.window(p, h)))
                    .or_default()
                    .push((ci as u32, p as u32));
            }
        }
        thresholds.sort_unstable();
        thresholds.dedup();
        DehnIndex {
            thresholds,
            by_prefix,
        }
    }
}

/// Whether Dehn reduction first verifies `C'(1/6)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DehnMode {
    #[default]
    Checked,
    Unchecked,
}

/// Dehn's algorithm: repeatedly replace the leftmost, then longest, subword `u` that is
/// more than half of some element `r = u v` by `v^{-1}`, ties going to the shortlex-least
/// replacement, freely reducing after every step.
pub fn dehn_reduce(
    w: &Word,
    s: &SymmetrizedRelatorSet,
    mode: DehnMode,
) -> Result<Word, SmallCancellationError> {
    Ok(dehn_trace(w, s, mode)?.pop().expect("trace is never empty"))
}

/// Every intermediate word of the reduction, starting with `free_reduce(w)`.
pub(crate) fn dehn_trace(
    w: &Word,
    s: &SymmetrizedRelatorSet,
    mode: DehnMode,
) -> Result<Vec<Word>, SmallCancellationError> {
    if w.rank() != s.rank {
        return Err(WordError::RankMismatch {
            left: w.rank(),
            right: s.rank,
        }
        .into());
    }
    if mode == DehnMode::Checked {
        let report = s.sixth_report();
        if !report.satisfied {
            return Err(SmallCancellationError::PreconditionViolated {
                max_piece_length: report.max_piece_length,
                piece: report
                    .witness_piece
                    .as_ref()
                    .map(|p| p.to_string())
                    .unwrap_or_default(),
            });
        }
    }
    let index = s.dehn_index();
    let mut current = w.free_reduce().into_letters();
    let mut trace = vec![Word::from_letters_unchecked(s.rank, current.clone())];
    while let Some((start, matched, replacement)) = find_rewrite(&current, s, index) {
        let next = reduce_letters(
            current[..start]
                .iter()
                .copied()
                .chain(replacement)
                .chain(current[start + matched..].iter().copied()),
        );
        debug_assert!(next.len() < current.len());
        current = next;
        trace.push(Word::from_letters_unchecked(s.rank, current.clone()));
    }
    Ok(trace)
}

/// The leftmost-longest-least applicable rewrite: (start, matched length, replacement).
fn find_rewrite(
    word: &[Letter],
    s: &SymmetrizedRelatorSet,
    index: &DehnIndex,
) -> Option<(usize, usize, Vec<Letter>)> {
    if word.is_empty() || s.classes.is_empty() {
        return None;
    }
    let hashes = PrefixHashes::new(word);
    for start in 0..word.len() {
        let mut best: Option<(usize, Vec<Letter>)> = None;
        for &h in &index.thresholds {
            if start + h > word.len() {
                break;
            }
            let Some(candidates) = index.by_prefix.get(&(h, hashes.window(start, h))) else {
                continue;
            };
            for &(ci, p) in candidates {
                let class = &s.classes[ci as usize];
                let rotation = class.rotation(p as usize);
                let matched = common_prefix(&word[start..], rotation);
                if matched * 2 <= class.len {
                    continue;
                }
                let replacement: Vec<Letter> =
                    rotation[matched..].iter().rev().map(|l| l.inverse()).collect();
                let better = match &best {
                    None => true,
                    Some((m, r)) => {
                        matched > *m
                            || (matched == *m
                                && (replacement.len(), &replacement) < (r.len(), r))
                    }
                };
                if better {
                    best = Some((matched, replacement));
                }
            }
        }
        if let Some((matched, replacement)) = best {
            return Some((start, matched, replacement));
        }
    }
    None
}

/// Whether `w` is trivial in the group presented by `s`, via Dehn's algorithm.
pub fn dehn_is_identity(w: &Word, s: &SymmetrizedRelatorSet) -> Result<bool, SmallCancellationError> {
    Ok(dehn_reduce(w, s, DehnMode::Checked)?.is_empty())
}

struct DehnSolver {
    set: Arc<SymmetrizedRelatorSet>,
}

impl WordProblem for DehnSolver {
    fn decide(&self, word: &[Letter]) -> Decision {
        let w = Word::from_letters_unchecked(self.set.rank, word.to_vec());
        match dehn_reduce(&w, &self.set, DehnMode::Unchecked) {
            Ok(r) if r.is_empty() => Decision::Identity,
            Ok(_) => Decision::NonIdentity,
            Err(_) => Decision::Unknown,
        }
    }
}

/// Exact oracle for a `C'(1/6)` presentation, deciding by Dehn's algorithm.
pub fn dehn_oracle(
    p: &Presentation,
    label: impl Into<String>,
) -> Result<GroupOracle, SmallCancellationError> {
    let set = symmetrize(p);
    let report = set.sixth_report();
    if !report.satisfied {
        return Err(SmallCancellationError::PreconditionViolated {
            max_piece_length: report.max_piece_length,
            piece: report
                .witness_piece
                .as_ref()
                .map(|w| w.to_string())
                .unwrap_or_default(),
        });
    }
    Ok(GroupOracle::new(
        p.rank(),
        label,
        DehnSolver { set: Arc::new(set) },
    ))
}
