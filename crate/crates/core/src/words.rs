//! Words in the free group `F_n` on a marked alphabet.
//!
//! A [`Letter`] is stored as a compact code `2 * (generator - 1) + inverse`, so the
//! derived ordering on codes is exactly the alphabet order `x1 < X1 < x2 < X2 < ...`.
//! [`Word`] orders shortlex: first by length, then lexicographically.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("invalid token {token:?} at byte {position}")]
    InvalidToken { token: String, position: usize },
    #[error("generator {generator} out of range for rank {rank}")]
    GeneratorOutOfRange { generator: usize, rank: usize },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
}

/// A generator or inverse generator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u16);

impl Letter {
    /// `generator` is 1-based.
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(generator >= 1 && generator <= (u16::MAX as usize) / 2);
        Letter(((generator - 1) * 2) as u16 | inverse as u16)
    }

    pub fn from_code(code: u16) -> Letter {
        Letter(code)
    }

    pub fn code(self) -> u16 {
        self.0
    }

    pub fn generator(self) -> usize {
        (self.0 / 2) as usize + 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    /// `+1` for a generator, `-1` for its inverse.
    pub fn sign(self) -> i8 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// All `2n` letters of a rank-`n` alphabet in alphabet order.
    pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> + Clone {
        (0..2 * rank as u16).map(Letter)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.is_inverse() { 'X' } else { 'x' };
        write!(f, "{}{}", c, self.generator())
    }
}

/// A word over the alphabet of rank `rank`. Not necessarily reduced.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty(rank: usize) -> Word {
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    pub fn from_letters(rank: usize, letters: Vec<Letter>) -> Result<Word, WordError> {
        if rank == 0 {
            return Err(WordError::ZeroRank);
        }
        if let Some(l) = letters.iter().find(|l| l.generator() > rank) {
            return Err(WordError::GeneratorOutOfRange {
                generator: l.generator(),
                rank,
            });
        }
        Ok(Word { rank, letters })
    }

    /// Crate-internal constructor for letter sequences already known to fit the rank.
    pub(crate) fn from_letters_unchecked(rank: usize, letters: Vec<Letter>) -> Word {
        debug_assert!(letters.iter().all(|l| l.generator() <= rank));
        Word { rank, letters }
    }

    /// A single generator letter.
    pub fn generator(rank: usize, generator: usize, inverse: bool) -> Result<Word, WordError> {
        Word::from_letters(rank, vec![Letter::new(generator, inverse)])
    }

    /// Parses whitespace-separated letters. Tokens are `x<i>` / `X<i>`, or runs of
    /// single-character aliases `a..z` / `A..Z` (generator 1 is `a`).
    pub fn parse(rank: usize, text: &str) -> Result<Word, WordError> {
        if rank == 0 {
            return Err(WordError::ZeroRank);
        }
        let mut letters = Vec::new();
        let mut offset = 0;
        for token in text.split_whitespace() {
            let position = offset + text[offset..].find(token).unwrap_or(0);
            offset = position + token.len();
            let invalid = || WordError::InvalidToken {
                token: token.to_string(),
                position,
            };
            let bytes = token.as_bytes();
            if bytes.len() > 1 && (bytes[0] == b'x' || bytes[0] == b'X') && bytes[1].is_ascii_digit()
            {
                let generator: usize = token[1..].parse().map_err(|_| invalid())?;
                if generator == 0 {
                    return Err(invalid());
                }
                if generator > rank {
                    return Err(WordError::GeneratorOutOfRange { generator, rank });
                }
                letters.push(Letter::new(generator, bytes[0] == b'X'));
            } else if bytes.iter().all(|b| b.is_ascii_alphabetic()) {
                for &b in bytes {
                    let generator = (b.to_ascii_lowercase() - b'a') as usize + 1;
                    if generator > rank {
                        return Err(WordError::GeneratorOutOfRange { generator, rank });
                    }
                    letters.push(Letter::new(generator, b.is_ascii_uppercase()));
                }
            } else {
                return Err(invalid());
            }
        }
        Ok(Word { rank, letters })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|p| p[0] != p[1].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.letters.first(), self.letters.last()) {
                (Some(&f), Some(&l)) if self.letters.len() > 1 => f != l.inverse(),
                _ => true,
            }
    }

    /// The freely reduced form of this word.
    pub fn free_reduce(&self) -> Word {
        Word {
            rank: self.rank,
            letters: reduce_letters(self.letters.iter().copied()),
        }
    }

    /// Free reduction followed by cancelling matching first/last letters.
    pub fn cyclic_reduce(&self) -> Word {
        let reduced = reduce_letters(self.letters.iter().copied());
        let (mut lo, mut hi) = (0, reduced.len());
        while hi - lo >= 2 && reduced[lo] == reduced[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        Word {
            rank: self.rank,
            letters: reduced[lo..hi].to_vec(),
        }
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Freely reduced product `self * other`.
    pub fn concat(&self, other: &Word) -> Result<Word, WordError> {
        if self.rank != other.rank {
            return Err(WordError::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(self.mul(other))
    }

    /// Freely reduced product; panics on rank mismatch.
    pub(crate) fn mul(&self, other: &Word) -> Word {
        assert_eq!(self.rank, other.rank, "rank mismatch");
        Word {
            rank: self.rank,
            letters: reduce_letters(self.letters.iter().chain(other.letters.iter()).copied()),
        }
    }

    /// `self * letter`, freely reduced (assuming `self` is reduced).
    pub(crate) fn push_reduced(&self, letter: Letter) -> Word {
        let mut letters = self.letters.clone();
        if letters.last() == Some(&letter.inverse()) {
            letters.pop();
        } else {
            letters.push(letter);
        }
        Word {
            rank: self.rank,
            letters,
        }
    }

    /// Exponent sum of each generator.
    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut sums = vec![0i64; self.rank];
        for l in &self.letters {
            sums[l.generator() - 1] += l.sign() as i64;
        }
        sums
    }

    /// `self^k` for `k >= 0`, freely reduced.
    pub fn pow(&self, k: usize) -> Word {
        let mut out = Word::empty(self.rank);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Commutator `u v u^{-1} v^{-1}`, freely reduced.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        u.mul(v).mul(&u.inverse()).mul(&v.inverse())
    }
}

pub(crate) fn reduce_letters(letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl Ord for Word {
    fn cmp(&self, other: &Word) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
            .then_with(|| self.rank.cmp(&other.rank))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Word) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", l)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({:?})", self.to_string())
    }
}

/// Number of freely reduced words of length at most `max_len` in rank `rank`.
pub fn reduced_word_count(rank: usize, max_len: usize) -> u128 {
    let mut total: u128 = 1;
    let mut layer: u128 = 2 * rank as u128;
    for _ in 0..max_len {
        total += layer;
        layer *= 2 * rank as u128 - 1;
    }
    total
}

/// Every freely reduced word of length `<= max_len`, in shortlex order.
pub fn enumerate_words(rank: usize, max_len: usize) -> ShortlexWords {
    assert!(rank >= 1, "rank must be positive");
    ShortlexWords {
        rank,
        max_len,
        current: Some(Vec::new()),
    }
}

/// Odometer over reduced words in shortlex order; holds only the current word.
#[derive(Debug, Clone)]
pub struct ShortlexWords {
    rank: usize,
    max_len: usize,
    current: Option<Vec<Letter>>,
}

impl ShortlexWords {
    fn smallest_after(&self, prev: Option<Letter>) -> Letter {
        match prev {
            Some(p) if p.inverse().code() == 0 => Letter::from_code(1),
            _ => Letter::from_code(0),
        }
    }

    fn advance(&self, word: &[Letter]) -> Option<Vec<Letter>> {
        let top = 2 * self.rank as u16;
        let mut next = word.to_vec();
        for pos in (0..next.len()).rev() {
            let prev = if pos == 0 { None } else { Some(next[pos - 1]) };
            let mut code = next[pos].code() + 1;
            if prev.map(|p| p.inverse().code()) == Some(code) {
                code += 1;
            }
            if code < top {
                next[pos] = Letter::from_code(code);
                for fill in pos + 1..next.len() {
                    next[fill] = self.smallest_after(Some(next[fill - 1]));
                }
                return Some(next);
            }
        }
        let len = word.len() + 1;
        if len > self.max_len {
            return None;
        }
        let mut first = Vec::with_capacity(len);
        for i in 0..len {
            first.push(self.smallest_after(if i == 0 { None } else { Some(first[i - 1]) }));
        }
        Some(first)
    }
}

impl Iterator for ShortlexWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let word = self.current.take()?;
        self.current = self.advance(&word);
        Some(Word {
            rank: self.rank,
            letters: word,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn w(rank: usize, s: &str) -> Word {
        Word::parse(rank, s).unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(w(2, "x1 X1").free_reduce(), Word::empty(2));
        assert_eq!(w(2, "x1 x2 X2 x1").free_reduce(), w(2, "x1 x1"));
        assert_eq!(w(2, "").free_reduce(), Word::empty(2));
    }

    #[test]
    fn cyclic_reduce_examples() {
        assert_eq!(w(2, "X1 x2 x1").cyclic_reduce(), w(2, "x2"));
        assert_eq!(w(2, "x1 x2").cyclic_reduce(), w(2, "x1 x2"));
        assert_eq!(w(2, "X2 x1 x1 x2").cyclic_reduce(), w(2, "x1 x1"));
    }

    #[test]
    fn invert_and_concat_examples() {
        assert_eq!(w(2, "x1 x2").inverse(), w(2, "X2 X1"));
        assert_eq!(Word::empty(2).inverse(), Word::empty(2));
        assert_eq!(w(2, "x1").concat(&w(2, "X1 x2")).unwrap(), w(2, "x2"));
        assert_eq!(w(2, "x1").concat(&w(2, "x1")).unwrap(), w(2, "x1 x1"));
        assert_eq!(
            w(2, "x1").concat(&w(3, "x1")),
            Err(WordError::RankMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn parse_aliases_and_errors() {
        assert_eq!(w(2, "abAB"), w(2, "x1 x2 X1 X2"));
        assert_eq!(w(2, "a  X2"), w(2, "x1 X2"));
        assert!(matches!(
            Word::parse(2, "x3"),
            Err(WordError::GeneratorOutOfRange { generator: 3, rank: 2 })
        ));
        assert!(matches!(
            Word::parse(2, "x1 y-"),
            Err(WordError::InvalidToken { position: 3, .. })
        ));
        assert!(Word::parse(2, "x0").is_err());
        assert_eq!(w(2, "x1 X2").to_string(), "x1 X2");
        assert_eq!(Word::empty(1).to_string(), "");
    }

    #[test]
    fn enumeration_examples() {
        let words: Vec<String> = enumerate_words(1, 2).map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["", "x1", "X1", "x1 x1", "X1 X1"]);
        assert_eq!(enumerate_words(2, 1).count(), 5);
        assert_eq!(enumerate_words(2, 2).count(), 17);
    }

    /// Brute force: all letter strings up to length L, reduced, deduplicated.
    fn brute_reduced_words(rank: usize, max_len: usize) -> BTreeSet<Word> {
        let mut all = BTreeSet::new();
        let mut layer = vec![Vec::<Letter>::new()];
        for _ in 0..=max_len {
            let mut next = Vec::new();
            for letters in &layer {
                all.insert(Word::from_letters(rank, reduce_letters(letters.iter().copied())).unwrap());
                for l in Letter::alphabet(rank) {
                    let mut n = letters.clone();
                    n.push(l);
                    next.push(n);
                }
            }
            layer = next;
        }
        all
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for (rank, len) in [(1, 4), (2, 2), (2, 4), (3, 3)] {
            let brute: Vec<Word> = brute_reduced_words(rank, len).into_iter().collect();
            let fast: Vec<Word> = enumerate_words(rank, len).collect();
            assert_eq!(fast, brute, "rank {rank} len {len}");
            assert_eq!(fast.len() as u128, reduced_word_count(rank, len));
        }
    }

    #[test]
    fn enumeration_strictly_increasing() {
        for rank in 1..=3 {
            for len in 0..=6 {
                let words: Vec<Word> = enumerate_words(rank, len).collect();
                assert!(words.windows(2).all(|p| p[0] < p[1]));
                assert!(words.iter().all(|w| w.is_reduced()));
                assert_eq!(words.len() as u128, reduced_word_count(rank, len));
            }
        }
    }

    fn arb_word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0..(2 * rank as u16), 0..max_len).prop_map(move |codes| {
            Word::from_letters(rank, codes.into_iter().map(Letter::from_code).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn free_reduce_idempotent_and_shortening(word in arb_word(3, 24)) {
            let r = word.free_reduce();
            prop_assert_eq!(r.free_reduce(), r.clone());
            prop_assert!(r.len() <= word.len());
            prop_assert_eq!(r.len() % 2, word.len() % 2);
            prop_assert!(r.is_reduced());
        }

        #[test]
        fn inverse_is_involution(word in arb_word(3, 24)) {
            prop_assert_eq!(word.inverse().inverse(), word.clone());
            prop_assert!(word.concat(&word.inverse()).unwrap().is_empty());
        }

        #[test]
        fn concat_associative(u in arb_word(2, 12), v in arb_word(2, 12), x in arb_word(2, 12)) {
            let left = u.concat(&v).unwrap().concat(&x).unwrap();
            let right = u.concat(&v.concat(&x).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn cyclic_reduce_is_cyclically_reduced(word in arb_word(2, 20)) {
            prop_assert!(word.cyclic_reduce().is_cyclically_reduced());
        }

        #[test]
        fn display_parse_roundtrip(word in arb_word(4, 16)) {
            prop_assert_eq!(Word::parse(4, &word.to_string()).unwrap(), word);
        }
    }
}
