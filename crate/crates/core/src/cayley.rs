//! Finite-radius geometry of marked groups: rooted labeled Cayley balls, `r`-local
//! isomorphism, and kernel agreement.
//!
//! Ball vertices are named by their shortlex-least representative word. Because a
//! prefix of a shortlex-least geodesic is again shortlex-least, expanding vertices in
//! shortlex order and letters in alphabet order discovers every new vertex through its
//! least representative, and the vertex list comes out sorted.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::oracles::{Decision, GroupOracle, NormalForm};
use crate::words::{enumerate_words, Letter, Word};

pub const DEFAULT_WORD_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CayleyError {
    #[error("oracle {label} answered Unknown on {query:?}")]
    OracleUnknown { label: String, query: String },
    #[error("oracle {label} is not exact")]
    InexactOracle { label: String },
    #[error("radius {radius} needs more than the word budget of {budget} words")]
    RadiusGuard { radius: usize, budget: u64 },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("local isomorphism not monotone in the radius: fails at {fails} but holds at {holds}")]
    NotMonotone { fails: usize, holds: usize },
}

/// A marked group `(G, X)`, given by an exact word-problem oracle.
#[derive(Debug, Clone)]
pub struct MarkedGroup {
    oracle: GroupOracle,
}

impl MarkedGroup {
    pub fn new(oracle: GroupOracle) -> MarkedGroup {
        MarkedGroup { oracle }
    }

    pub fn rank(&self) -> usize {
        self.oracle.rank()
    }

    pub fn oracle(&self) -> &GroupOracle {
        &self.oracle
    }

    pub fn label(&self) -> &str {
        self.oracle.label()
    }

    fn decide(&self, word: &Word) -> Result<Decision, CayleyError> {
        match self.oracle.decide(word) {
            Decision::Unknown => Err(CayleyError::OracleUnknown {
                label: self.label().to_string(),
                query: word.to_string(),
            }),
            d => Ok(d),
        }
    }

    fn same(&self, u: &Word, v: &Word) -> Result<bool, CayleyError> {
        Ok(self.decide(&u.mul(&v.inverse()))? == Decision::Identity)
    }
}

impl From<GroupOracle> for MarkedGroup {
    fn from(oracle: GroupOracle) -> MarkedGroup {
        MarkedGroup::new(oracle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallOptions {
    /// Maximum number of candidate words (vertex times letter) examined.
    pub word_budget: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
}

impl Default for BallOptions {
    fn default() -> BallOptions {
        BallOptions {
            word_budget: DEFAULT_WORD_BUDGET,
            threads: None,
        }
    }
}

/// The induced subgraph of the Cayley graph on `B(r)`, rooted at the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    radius: usize,
    rank: usize,
    vertices: Vec<Word>,
    /// `edges[v * 2n + letter.code()]` is the vertex `v * letter`, if inside the ball.
    edges: Vec<Option<u32>>,
}

/// Canonical byte encoding of a ball; equal exactly when the balls are identical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BallSignature(Vec<u8>);

impl BallSignature {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Hex SHA-256 of the encoding, for reports.
    pub fn fingerprint(&self) -> String {
        Sha256::digest(&self.0)
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}

impl Ball {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Shortlex-least representatives, strictly increasing; index 0 is the root.
    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Word length of vertex `v`.
    pub fn level(&self, v: usize) -> usize {
        self.vertices[v].len()
    }

    /// Number of vertices of word length at most `r`; they form a prefix of the list.
    pub fn count_within(&self, r: usize) -> usize {
        self.vertices.partition_point(|w| w.len() <= r)
    }

    pub fn neighbour(&self, v: usize, letter: Letter) -> Option<usize> {
        self.edges[v * 2 * self.rank + letter.code() as usize].map(|u| u as usize)
    }

    /// Index of the vertex whose representative is exactly `word`.
    pub fn index_of_representative(&self, word: &Word) -> Option<usize> {
        self.vertices.binary_search(word).ok()
    }

    /// Edges `(v, generator, sign, u)` sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize, i8, usize)> {
        let mut out: Vec<(usize, usize, i8, usize)> = Vec::new();
        for v in 0..self.vertices.len() {
            for l in Letter::alphabet(self.rank) {
                if let Some(u) = self.neighbour(v, l) {
                    out.push((v, l.generator(), l.sign(), u));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_some()).count()
    }

    /// The ball of radius `r <= self.radius()`, as an induced subgraph.
    pub fn restrict(&self, r: usize) -> Ball {
        assert!(r <= self.radius, "cannot restrict to a larger radius");
        let n = self.count_within(r);
        let n2 = 2 * self.rank;
        let edges = self.edges[..n * n2]
            .iter()
            .map(|e| e.filter(|&u| (u as usize) < n))
            .collect();
        Ball {
            radius: r,
            rank: self.rank,
            vertices: self.vertices[..n].to_vec(),
            edges,
        }
    }

    pub fn signature(&self) -> BallSignature {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"MGB1");
        bytes.extend_from_slice(&(self.rank as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.radius as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.vertices.len() as u32).to_le_bytes());
        for w in &self.vertices {
            bytes.extend_from_slice(&(w.len() as u32).to_le_bytes());
            for l in w.letters() {
                bytes.extend_from_slice(&l.code().to_le_bytes());
            }
        }
        let edges = self.edges();
        bytes.extend_from_slice(&(edges.len() as u32).to_le_bytes());
        for (v, g, s, u) in edges {
            bytes.extend_from_slice(&(v as u32).to_le_bytes());
            bytes.extend_from_slice(&(g as u32).to_le_bytes());
            bytes.push(s as u8);
            bytes.extend_from_slice(&(u as u32).to_le_bytes());
        }
        BallSignature(bytes)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "rank": self.rank,
            "radius": self.radius,
            "vertices": self.vertices.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "edges": self.edges().into_iter().map(|(v, g, s, u)| json!([v, g, s, u])).collect::<Vec<_>>(),
        })
    }

    /// Graphviz rendering: root double-circled, one undirected edge per generator pair.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph ball {\n  node [shape=circle];\n");
        for (v, w) in self.vertices.iter().enumerate() {
            let label = if w.is_empty() { "1".to_string() } else { w.to_string() };
            let shape = if v == 0 { ", shape=doublecircle" } else { "" };
            let _ = writeln!(out, "  {v} [label=\"{label}\"{shape}];");
        }
        let mut seen = BTreeSet::new();
        for (v, g, _, u) in self.edges() {
            if seen.insert((v.min(u), v.max(u), g)) {
                let _ = writeln!(out, "  {} -- {} [label=\"x{g}\"];", v.min(u), v.max(u));
            }
        }
        out.push_str("}\n");
        out
    }

    #[cfg(test)]
    pub(crate) fn from_parts(radius: usize, rank: usize, vertices: Vec<Word>, edges: Vec<Option<u32>>) -> Ball {
        Ball { radius, rank, vertices, edges }
    }

    /// A copy with the edge `(v, letter)` and its reverse removed.
    pub(crate) fn with_edge_removed(&self, v: usize, letter: Letter) -> Ball {
        let mut out = self.clone();
        let n2 = 2 * self.rank;
        if let Some(u) = out.edges[v * n2 + letter.code() as usize].take() {
            out.edges[u as usize * n2 + letter.inverse().code() as usize] = None;
        }
        out
    }
}

/// A ball together with a way to locate arbitrary words among its vertices.
#[derive(Debug, Clone)]
pub(crate) struct IndexedBall {
    pub ball: Ball,
    group: MarkedGroup,
    keys: Option<HashMap<NormalForm, u32>>,
}

impl IndexedBall {
    /// The vertex representing the same element as `word`, if it lies in the ball.
    pub fn locate(&self, word: &Word) -> Result<Option<usize>, CayleyError> {
        let reduced = word.free_reduce();
        if let Some(i) = self.ball.index_of_representative(&reduced) {
            return Ok(Some(i));
        }
        if let Some(keys) = &self.keys {
            let nf = self.group.oracle().normal_form(&reduced).expect("normal form");
            return Ok(keys.get(&nf).map(|&i| i as usize));
        }
        for (i, v) in self.ball.vertices.iter().enumerate() {
            if self.group.same(&reduced, v)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

enum Resolution {
    Existing(u32),
    Fresh(Word, Option<NormalForm>),
}

pub fn build_ball(g: &MarkedGroup, r: usize, opts: &BallOptions) -> Result<Ball, CayleyError> {
    Ok(build_indexed(g, r, opts)?.ball)
}

pub(crate) fn build_indexed(
    g: &MarkedGroup,
    r: usize,
    opts: &BallOptions,
) -> Result<IndexedBall, CayleyError> {
    if !g.oracle().is_exact() {
        return Err(CayleyError::InexactOracle {
            label: g.label().to_string(),
        });
    }
    match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CayleyError::ThreadPool(e.to_string()))?
            .install(|| build_inner(g, r, opts.word_budget)),
        None => build_inner(g, r, opts.word_budget),
    }
}

fn build_inner(g: &MarkedGroup, r: usize, budget: u64) -> Result<IndexedBall, CayleyError> {
    let rank = g.rank();
    let n2 = 2 * rank;
    let oracle = g.oracle();
    let keyed = oracle.has_normal_form();
    let root = Word::empty(rank);

    let mut vertices = vec![root.clone()];
    let mut edges: Vec<Option<u32>> = vec![None; n2];
    let mut keys: Option<HashMap<NormalForm, u32>> = keyed.then(|| {
        let mut m = HashMap::new();
        m.insert(oracle.normal_form(&root).expect("normal form"), 0);
        m
    });
    let mut level_start = vec![0usize, 1];
    let mut work: u64 = 0;

    for k in 0..=r {
        let (lo, hi) = (level_start[k], level_start[k + 1]);
        if lo == hi {
            level_start.push(hi);
            continue;
        }
        work += ((hi - lo) * n2) as u64;
        if work > budget {
            return Err(CayleyError::RadiusGuard { radius: r, budget });
        }
        // Resolve every candidate against levels <= k, in parallel and in order.
        let earlier_lo = if k == 0 { 0 } else { level_start[k - 1] };
        let resolved: Vec<Result<Resolution, CayleyError>> = (lo * n2..hi * n2)
            .into_par_iter()
            .map(|slot| {
                let v = slot / n2;
                let letter = Letter::from_code((slot % n2) as u16);
                let cand = vertices[v].push_reduced(letter);
                if cand.len() <= k {
                    if let Ok(i) = vertices[..hi].binary_search(&cand) {
                        return Ok(Resolution::Existing(i as u32));
                    }
                }
                if let Some(keys) = &keys {
                    let nf = oracle.normal_form(&cand).expect("normal form");
                    return Ok(match keys.get(&nf) {
                        Some(&i) => Resolution::Existing(i),
                        None => Resolution::Fresh(cand, Some(nf)),
                    });
                }
                for (i, u) in vertices[earlier_lo..hi].iter().enumerate() {
                    if g.same(&cand, u)? {
                        return Ok(Resolution::Existing((earlier_lo + i) as u32));
                    }
                }
                Ok(Resolution::Fresh(cand, None))
            })
            .collect();

        edges.reserve(n2 * 8);
        for (slot, res) in (lo * n2..hi * n2).zip(resolved) {
            let target = match res? {
                Resolution::Existing(i) => Some(i),
                Resolution::Fresh(word, nf) => {
                    let found = match (&keys, &nf) {
                        (Some(keys), Some(nf)) => keys.get(nf).copied(),
                        _ => {
                            let mut hit = None;
                            for (i, u) in vertices[hi..].iter().enumerate() {
                                if g.same(&word, u)? {
                                    hit = Some((hi + i) as u32);
                                    break;
                                }
                            }
                            hit
                        }
                    };
                    match found {
                        Some(i) => Some(i),
                        None if k < r => {
                            let i = vertices.len() as u32;
                            vertices.push(word);
                            edges.extend(std::iter::repeat_n(None, n2));
                            if let (Some(keys), Some(nf)) = (keys.as_mut(), nf) {
                                keys.insert(nf, i);
                            }
                            Some(i)
                        }
                        None => None,
                    }
                }
            };
            edges[slot] = target;
        }
        level_start.push(vertices.len());
    }

    Ok(IndexedBall {
        ball: Ball {
            radius: r,
            rank,
            vertices,
            edges,
        },
        group: g.clone(),
        keys,
    })
}

pub fn signature(b: &Ball) -> BallSignature {
    b.signature()
}

fn check_ranks(a: &MarkedGroup, b: &MarkedGroup) -> Result<(), CayleyError> {
    if a.rank() != b.rank() {
        return Err(CayleyError::RankMismatch {
            left: a.rank(),
            right: b.rank(),
        });
    }
    Ok(())
}

/// Whether the radius-`r` balls admit a root- and label-preserving isomorphism. Such an
/// isomorphism is forced along geodesic label paths, so it exists exactly when the
/// canonical balls coincide.
pub fn r_locally_isomorphic(
    a: &MarkedGroup,
    b: &MarkedGroup,
    r: usize,
    opts: &BallOptions,
) -> Result<bool, CayleyError> {
    check_ranks(a, b)?;
    Ok(build_ball(a, r, opts)?.signature() == build_ball(b, r, opts)?.signature())
}

/// Largest `r <= max_radius` at which `a` and `b` are `r`-locally isomorphic, or `-1`.
/// Every radius is compared, so a non-monotone answer is reported as an error.
pub fn local_agreement_radius(
    a: &MarkedGroup,
    b: &MarkedGroup,
    max_radius: usize,
    opts: &BallOptions,
) -> Result<i64, CayleyError> {
    check_ranks(a, b)?;
    let ball_a = build_ball(a, max_radius, opts)?;
    let ball_b = build_ball(b, max_radius, opts)?;
    let agrees: Vec<bool> = (0..=max_radius)
        .map(|r| ball_a.restrict(r).signature() == ball_b.restrict(r).signature())
        .collect();
    let first_failure = agrees.iter().position(|&x| !x);
    if let Some(fails) = first_failure {
        if let Some(holds) = agrees.iter().rposition(|&x| x).filter(|&h| h > fails) {
            return Err(CayleyError::NotMonotone { fails, holds });
        }
    }
    Ok(match first_failure {
        Some(f) => f as i64 - 1,
        None => max_radius as i64,
    })
}

/// First freely reduced word of length `<= max_len` (shortlex) on which the oracles
/// disagree.
pub fn kernel_disagreement(
    a: &MarkedGroup,
    b: &MarkedGroup,
    max_len: usize,
) -> Result<Option<Word>, CayleyError> {
    check_ranks(a, b)?;
    for w in enumerate_words(a.rank(), max_len) {
        if a.decide(&w)? != b.decide(&w)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Whether the kernels agree on every freely reduced word of length `<= max_len`.
pub fn kernel_agreement(a: &MarkedGroup, b: &MarkedGroup, max_len: usize) -> Result<bool, CayleyError> {
    Ok(kernel_disagreement(a, b, max_len)?.is_none())
}

/// Least `i0` such that every `chain[i]`, `i >= i0`, agrees with `limit` on the kernel
/// up to length `2r`; `None` when even the last element disagrees.
pub fn convergence_check(
    chain: &[MarkedGroup],
    limit: &MarkedGroup,
    r: usize,
) -> Result<Option<usize>, CayleyError> {
    let mut start = None;
    for (i, g) in chain.iter().enumerate().rev() {
        if kernel_agreement(g, limit, 2 * r)? {
            start = Some(i);
        } else {
            break;
        }
    }
    Ok(start)
}
