//! Finite-scale `C`-quasi-isometry between marked groups: checking and searching for
//! witnessing pairs `(phi_M, psi_M)` on radius-`M` balls, counting certificates of
//! non-existence, and explicit witnesses for quotients by finite central subgroups.
//!
//! A witnessing pair satisfies
//! (a) `phi(1) = 1` and `psi(1) = 1`;
//! (b) `d(phi g1, phi g2) <= C d(g1, g2) + C` on `B_G(M)`, and likewise for `psi`;
//! (c) `d(psi phi g, g) <= C` whenever `phi g` lies in `B_H(M)`, and likewise for `phi psi`.

use std::collections::HashMap;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::cayley::{build_ball, build_indexed, BallOptions, CayleyError, IndexedBall, MarkedGroup};
use crate::oracles::Decision;
use crate::words::{enumerate_words, Word};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Printed with every scan: finitely many `C` never decide quasi-isometry.
pub const SCAN_NOTE: &str = "certified not C-quasi-isometric for all C <= C_max does NOT certify \
non-quasi-isometry (quasi-isometry is the union of the relations ~_C over all C in N, an infinite union)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QiError {
    #[error(transparent)]
    Cayley(#[from] CayleyError),
    #[error("distance evaluation needs a ball of radius {radius}, beyond the evaluation limit: {reason}")]
    EvaluationBall { radius: usize, reason: String },
    #[error("malformed witness: {0}")]
    InvalidWitness(String),
    #[error("oracles are inconsistent with a quotient map: {0}")]
    InconsistentOracles(String),
    #[error("C and M must be positive")]
    NonPositive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPair {
    pub c: u64,
    pub m: usize,
    /// `(vertex of B_G(M), image word over H)`, in ball order.
    pub phi: Vec<(Word, Word)>,
    /// `(vertex of B_H(M), image word over G)`, in ball order.
    pub psi: Vec<(Word, Word)>,
}

impl WitnessPair {
    pub fn to_json(&self) -> serde_json::Value {
        let map = |m: &[(Word, Word)]| {
            m.iter()
                .map(|(v, i)| json!([v.to_string(), i.to_string()]))
                .collect::<Vec<_>>()
        };
        json!({"C": self.c, "M": self.m, "phi": map(&self.phi), "psi": map(&self.psi)})
    }

    /// Reads the format written by [`WitnessPair::to_json`]; `rank_g`, `rank_h` are the
    /// ranks of the source and target of `phi`.
    pub fn from_json(v: &serde_json::Value, rank_g: usize, rank_h: usize) -> Result<WitnessPair, QiError> {
        let bad = |what: &str| QiError::InvalidWitness(format!("witness JSON: {what}"));
        let num = |key: &str| v.get(key).and_then(serde_json::Value::as_u64).ok_or_else(|| bad(key));
        let map = |key: &str, src: usize, dst: usize| -> Result<Vec<(Word, Word)>, QiError> {
            let entries = v.get(key).and_then(|e| e.as_array()).ok_or_else(|| bad(key))?;
            entries
                .iter()
                .map(|e| {
                    let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad(key))?;
                    let word = |x: &serde_json::Value, rank| {
                        let text = x.as_str().ok_or_else(|| bad(key))?;
                        Word::parse(rank, text).map_err(|err| bad(&format!("{key}: {err}")))
                    };
                    Ok((word(&pair[0], src)?, word(&pair[1], dst)?))
                })
                .collect()
        };
        Ok(WitnessPair {
            c: num("C")?,
            m: num("M")? as usize,
            phi: map("phi", rank_g, rank_h)?,
            psi: map("psi", rank_h, rank_g)?,
        })
    }

    /// The pair restricted to radius `m <= self.m`.
    pub fn restrict(&self, m: usize) -> WitnessPair {
        assert!(m <= self.m);
        let keep = |v: &[(Word, Word)]| v.iter().filter(|(s, _)| s.len() <= m).cloned().collect();
        WitnessPair {
            c: self.c,
            m,
            phi: keep(&self.phi),
            psi: keep(&self.psi),
        }
    }

    /// The same maps, read as a witness for a larger constant.
    pub fn with_constant(&self, c: u64) -> WitnessPair {
        WitnessPair { c, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: char,
    pub map: &'static str,
    pub source: Vec<String>,
    /// Exact distance, or `None` when it only is known to exceed `bound`.
    pub measured: Option<u64>,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

/// Exact word-metric comparisons, backed by a ball grown on demand up to `limit`.
struct Metric<'g> {
    group: &'g MarkedGroup,
    opts: BallOptions,
    limit: usize,
    ball: Option<IndexedBall>,
}

impl<'g> Metric<'g> {
    fn new(group: &'g MarkedGroup, limit: usize, opts: &BallOptions) -> Metric<'g> {
        Metric {
            group,
            opts: *opts,
            limit,
            ball: None,
        }
    }

    fn ensure(&mut self, r: usize) -> Result<&IndexedBall, QiError> {
        if r > self.limit {
            return Err(QiError::EvaluationBall {
                radius: r,
                reason: format!("limit {}", self.limit),
            });
        }
        let current = self.ball.as_ref().map(|b| b.ball.radius());
        if current.is_none_or(|c| c < r) {
            let target = r.max(current.map_or(0, |c| (2 * c).min(self.limit)));
            let ball = build_indexed(self.group, target, &self.opts).map_err(|e| match e {
                CayleyError::RadiusGuard { .. } => QiError::EvaluationBall {
                    radius: target,
                    reason: e.to_string(),
                },
                e => e.into(),
            })?;
            self.ball = Some(ball);
        }
        Ok(self.ball.as_ref().expect("ball built above"))
    }

    /// Whether `|w| <= bound` in the group.
    fn within(&mut self, w: &Word, bound: usize) -> Result<bool, QiError> {
        let w = w.free_reduce();
        if w.len() <= bound {
            return Ok(true);
        }
        let ball = self.ensure(bound)?;
        Ok(ball.locate(&w)?.is_some_and(|i| ball.ball.level(i) <= bound))
    }

    /// `|w|` if it is at most `cap`.
    fn length(&mut self, w: &Word, cap: usize) -> Result<Option<usize>, QiError> {
        let w = w.free_reduce();
        let ball = self.ensure(cap.min(w.len()))?;
        Ok(ball.locate(&w)?.map(|i| ball.ball.level(i)).filter(|&d| d <= cap))
    }
}

fn quotient(u: &Word, v: &Word) -> Word {
    u.inverse().mul(v)
}

/// Maps each source word onto its ball vertex; the domain must be exactly the ball.
fn align<'w>(ball: &IndexedBall, map: &'w [(Word, Word)], name: &str) -> Result<Vec<&'w Word>, QiError> {
    let mut images: Vec<Option<&Word>> = vec![None; ball.ball.len()];
    for (source, image) in map {
        let i = ball
            .locate(source)?
            .ok_or_else(|| QiError::InvalidWitness(format!("{name}: {source} lies outside the ball")))?;
        if images[i].replace(image).is_some() {
            return Err(QiError::InvalidWitness(format!("{name}: vertex {source} assigned twice")));
        }
    }
    images
        .into_iter()
        .enumerate()
        .map(|(i, im)| {
            im.ok_or_else(|| QiError::InvalidWitness(format!("{name}: vertex {} unassigned", ball.ball.vertices()[i])))
        })
        .collect()
}

struct Side<'g> {
    name: &'static str,
    ball: IndexedBall,
    metric: Metric<'g>,
}

fn check_lipschitz(
    c: usize,
    src: &mut Side,
    dst: &mut Metric,
    images: &[&Word],
    out: &mut Vec<Violation>,
) -> Result<(), QiError> {
    let n = images.len();
    for i in 0..n {
        for j in i + 1..n {
            let u = quotient(images[i], images[j]);
            if u.len() <= 2 * c {
                continue;
            }
            let (gi, gj) = (&src.ball.ball.vertices()[i], &src.ball.ball.vertices()[j]);
            let d = src
                .metric
                .length(&quotient(gi, gj), gi.len() + gj.len())?
                .expect("vertices of a ball are within twice its radius");
            let bound = c * d + c;
            if !dst.within(&u, bound)? {
                out.push(Violation {
                    condition: 'b',
                    map: src.name,
                    source: vec![gi.to_string(), gj.to_string()],
                    measured: None,
                    bound: bound as u64,
                });
            }
        }
    }
    Ok(())
}

/// Condition (c) for `back . forth`, where `forth` goes from `src` into `dst`.
fn check_inverse(
    c: usize,
    src: &mut Side,
    dst_ball: &IndexedBall,
    forth: &[&Word],
    back: &[&Word],
    out: &mut Vec<Violation>,
) -> Result<(), QiError> {
    for (i, image) in forth.iter().enumerate() {
        if let Some(h) = dst_ball.locate(image)? {
            let g = &src.ball.ball.vertices()[i];
            if !src.metric.within(&quotient(back[h], g), c)? {
                out.push(Violation {
                    condition: 'c',
                    map: src.name,
                    source: vec![g.to_string()],
                    measured: None,
                    bound: c as u64,
                });
            }
        }
    }
    Ok(())
}

/// Verifies conditions (a), (b), (c) for `p` between `a = (G, X)` and `b = (H, Y)`.
/// Distances are exact: whenever the reduced word does not already certify an
/// inequality, the element is located in a ball of the needed radius.
pub fn check_witness(
    a: &MarkedGroup,
    b: &MarkedGroup,
    p: &WitnessPair,
    opts: &BallOptions,
) -> Result<CheckReport, QiError> {
    if p.c == 0 || p.m == 0 {
        return Err(QiError::NonPositive);
    }
    for (name, map, src, dst) in [("phi", &p.phi, a, b), ("psi", &p.psi, b, a)] {
        if let Some((s, i)) = map.iter().find(|(s, i)| s.rank() != src.rank() || i.rank() != dst.rank()) {
            return Err(QiError::InvalidWitness(format!("{name}: rank mismatch at {s} -> {i}")));
        }
    }
    let c = p.c as usize;
    let limit = 2 * c * p.m + c;
    let mut ga = Side {
        name: "phi",
        ball: build_indexed(a, p.m, opts)?,
        metric: Metric::new(a, limit, opts),
    };
    let mut hb = Side {
        name: "psi",
        ball: build_indexed(b, p.m, opts)?,
        metric: Metric::new(b, limit, opts),
    };
    let phi = align(&ga.ball, &p.phi, "phi")?;
    let psi = align(&hb.ball, &p.psi, "psi")?;

    let mut violations = Vec::new();
    for (name, group, metric, image) in [("phi", b, &mut hb.metric, phi[0]), ("psi", a, &mut ga.metric, psi[0])] {
        if group.oracle().decide(image) != Decision::Identity {
            violations.push(Violation {
                condition: 'a',
                map: name,
                source: vec![String::new()],
                measured: metric.length(image, image.len().min(limit))?.map(|d| d as u64),
                bound: 0,
            });
        }
    }

    check_lipschitz(c, &mut ga, &mut hb.metric, &phi, &mut violations)?;
    check_lipschitz(c, &mut hb, &mut ga.metric, &psi, &mut violations)?;
    let hb_ball = hb.ball.clone();
    check_inverse(c, &mut ga, &hb_ball, &phi, &psi, &mut violations)?;
    let ga_ball = ga.ball.clone();
    check_inverse(c, &mut hb, &ga_ball, &psi, &phi, &mut violations)?;

    Ok(CheckReport {
        passed: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingCertificate {
    /// `"a->b"` bounds the fibers of `psi`, `"b->a"` those of `phi`.
    pub direction: &'static str,
    /// Radius `M'` on which the fibers are controlled.
    pub radius: usize,
    pub domain_size: usize,
    pub fiber_radius: usize,
    pub fiber_size: usize,
    pub image_radius: usize,
    pub image_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Precheck {
    Feasible,
    Impossible(CountingCertificate),
}

/// Sound counting test. For `|h| <= M' = floor((M - C) / C)` the image `psi(h)` lies in
/// `B_G(C M' + C)`, inside `B_G(M)`, so (c) applies to it: `h` is within `C` of
/// `phi(psi(h))`. Each fiber of `psi` on `B_H(M')` therefore sits in one `C`-ball and
/// `|B_H(M')| <= |B_H(C)| |B_G(C M' + C)|`. Symmetrically with the roles swapped.
pub fn counting_precheck(
    a: &MarkedGroup,
    b: &MarkedGroup,
    c: u64,
    m: usize,
    opts: &BallOptions,
) -> Result<Precheck, QiError> {
    if c == 0 || m == 0 {
        return Err(QiError::NonPositive);
    }
    let c = c as usize;
    if m < c {
        return Ok(Precheck::Feasible);
    }
    let radius = (m - c) / c;
    let image_radius = c * radius + c;
    for (direction, dom, img) in [("a->b", b, a), ("b->a", a, b)] {
        let domain_size = build_ball(dom, radius, opts)?.len();
        let fiber_size = build_ball(dom, c, opts)?.len();
        let image_size = build_ball(img, image_radius, opts)?.len();
        if domain_size > fiber_size * image_size {
            return Ok(Precheck::Impossible(CountingCertificate {
                direction,
                radius,
                domain_size,
                fiber_radius: c,
                fiber_size,
                image_radius,
                image_size,
            }));
        }
    }
    Ok(Precheck::Feasible)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Counting(CountingCertificate),
    Exhaustive { nodes: u64 },
}

impl Certificate {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Certificate::Counting(c) => json!({"kind": "counting", "details": c}),
            Certificate::Exhaustive { nodes } => json!({"kind": "exhaustive", "details": {"nodes": nodes}}),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(WitnessPair),
    NonExistent(Certificate),
    BudgetExceeded { nodes: u64 },
}

impl SearchOutcome {
    pub fn status(&self) -> &'static str {
        match self {
            SearchOutcome::Found(_) => "Found",
            SearchOutcome::NonExistent(_) => "NonExistent",
            SearchOutcome::BudgetExceeded { .. } => "BudgetExceeded",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            SearchOutcome::Found(w) => json!({"status": "Found", "witness": w.to_json()}),
            SearchOutcome::NonExistent(c) => json!({"status": "NonExistent", "certificate": c.to_json()}),
            SearchOutcome::BudgetExceeded { nodes } => json!({"status": "BudgetExceeded", "nodes": nodes}),
        }
    }
}

/// One group's half of the search: its `M`-ball as a prefix of the candidate ball
/// `B(CM + C)`, and memoised distance tests between candidates.
struct Space<'g> {
    cands: IndexedBall,
    inner: usize,
    metric: Metric<'g>,
    memo: HashMap<(u32, u32, u32), bool>,
}

impl<'g> Space<'g> {
    fn new(
        group: &'g MarkedGroup,
        radius: usize,
        m: usize,
        limit: usize,
        opts: &BallOptions,
    ) -> Result<Space<'g>, QiError> {
        let cands = build_indexed(group, radius, opts)?;
        let inner = cands.ball.count_within(m);
        Ok(Space {
            cands,
            inner,
            metric: Metric::new(group, limit, opts),
            memo: HashMap::new(),
        })
    }

    fn word(&self, i: u32) -> &Word {
        &self.cands.ball.vertices()[i as usize]
    }

    fn within(&mut self, x: u32, y: u32, bound: usize) -> Result<bool, QiError> {
        let key = (x.min(y), x.max(y), bound as u32);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let w = quotient(self.word(x), self.word(y));
        let v = self.metric.within(&w, bound)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    fn distance(&mut self, x: u32, y: u32) -> Result<usize, QiError> {
        let w = quotient(self.word(x), self.word(y));
        let cap = self.word(x).len() + self.word(y).len();
        Ok(self.metric.length(&w, cap)?.expect("within the sum of lengths"))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Which {
    Phi,
    Psi,
}

struct Search<'g> {
    c: usize,
    g: Space<'g>,
    h: Space<'g>,
    /// Assignments indexed by source vertex; values index the other side's candidates.
    phi: Vec<Option<u32>>,
    psi: Vec<Option<u32>>,
    phi_done: Vec<u32>,
    psi_done: Vec<u32>,
    /// `phi_pre[h]`: assigned `g` with `phi(g) = h`, for `h` in `B_H(M)`.
    phi_pre: Vec<Vec<u32>>,
    psi_pre: Vec<Vec<u32>>,
    src_dist: HashMap<(Which, u32, u32), usize>,
}

impl Search<'_> {
    fn src_distance(&mut self, which: Which, x: u32, y: u32) -> Result<usize, QiError> {
        let key = (which, x.min(y), x.max(y));
        if let Some(&d) = self.src_dist.get(&key) {
            return Ok(d);
        }
        let d = match which {
            Which::Phi => self.g.distance(x, y)?,
            Which::Psi => self.h.distance(x, y)?,
        };
        self.src_dist.insert(key, d);
        Ok(d)
    }

    fn consistent(&mut self, which: Which, v: u32, x: u32) -> Result<bool, QiError> {
        let c = self.c;
        let done = match which {
            Which::Phi => self.phi_done.clone(),
            Which::Psi => self.psi_done.clone(),
        };
        for &u in &done {
            let bound = c * self.src_distance(which, v, u)? + c;
            let ok = match which {
                Which::Phi => {
                    let y = self.phi[u as usize].expect("assigned");
                    self.h.within(x, y, bound)?
                }
                Which::Psi => {
                    let y = self.psi[u as usize].expect("assigned");
                    self.g.within(x, y, bound)?
                }
            };
            if !ok {
                return Ok(false);
            }
        }
        match which {
            Which::Phi => {
                if (x as usize) < self.h.inner {
                    if let Some(y) = self.psi[x as usize] {
                        if !self.g.within(y, v, c)? {
                            return Ok(false);
                        }
                    }
                }
                for h in self.psi_pre[v as usize].clone() {
                    if !self.h.within(x, h, c)? {
                        return Ok(false);
                    }
                }
            }
            Which::Psi => {
                if (x as usize) < self.g.inner {
                    if let Some(y) = self.phi[x as usize] {
                        if !self.h.within(y, v, c)? {
                            return Ok(false);
                        }
                    }
                }
                for g in self.phi_pre[v as usize].clone() {
                    if !self.g.within(x, g, c)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    fn assign(&mut self, which: Which, v: u32, x: u32) {
        match which {
            Which::Phi => {
                self.phi[v as usize] = Some(x);
                self.phi_done.push(v);
                if (x as usize) < self.h.inner {
                    self.phi_pre[x as usize].push(v);
                }
            }
            Which::Psi => {
                self.psi[v as usize] = Some(x);
                self.psi_done.push(v);
                if (x as usize) < self.g.inner {
                    self.psi_pre[x as usize].push(v);
                }
            }
        }
    }

    fn unassign(&mut self, which: Which, v: u32) {
        match which {
            Which::Phi => {
                let x = self.phi[v as usize].take().expect("assigned");
                self.phi_done.pop();
                if (x as usize) < self.h.inner {
                    self.phi_pre[x as usize].pop();
                }
            }
            Which::Psi => {
                let x = self.psi[v as usize].take().expect("assigned");
                self.psi_done.pop();
                if (x as usize) < self.g.inner {
                    self.psi_pre[x as usize].pop();
                }
            }
        }
    }
}

/// Exhaustive backtracking search for a witnessing pair at `(C, M)`, after the counting
/// precheck. Variables are taken level by level (`phi` on level `k`, then `psi` on
/// level `k`), candidates in shortlex order, so a found witness is deterministic.
pub fn search_witness(
    a: &MarkedGroup,
    b: &MarkedGroup,
    c: u64,
    m: usize,
    node_budget: u64,
    opts: &BallOptions,
) -> Result<SearchOutcome, QiError> {
    if let Precheck::Impossible(cert) = counting_precheck(a, b, c, m, opts)? {
        return Ok(SearchOutcome::NonExistent(Certificate::Counting(cert)));
    }
    let cu = c as usize;
    let cand_radius = cu * m + cu;
    let limit = 2 * cu * m + cu;
    let (g, h) = (
        Space::new(a, cand_radius, m, limit, opts)?,
        Space::new(b, cand_radius, m, limit, opts)?,
    );
    let (ng, nh) = (g.inner, h.inner);

    let mut vars: Vec<(Which, u32, usize)> = Vec::new();
    for k in 1..=m {
        for (which, side) in [(Which::Phi, &g), (Which::Psi, &h)] {
            let other = if which == Which::Phi { &h } else { &g };
            for v in 0..side.inner {
                if side.cands.ball.level(v) == k {
                    vars.push((which, v as u32, other.cands.ball.count_within(cu * k + cu)));
                }
            }
        }
    }

    let mut s = Search {
        c: cu,
        g,
        h,
        phi: vec![None; ng],
        psi: vec![None; nh],
        phi_done: Vec::new(),
        psi_done: Vec::new(),
        phi_pre: vec![Vec::new(); nh],
        psi_pre: vec![Vec::new(); ng],
        src_dist: HashMap::new(),
    };
    s.assign(Which::Phi, 0, 0);
    s.assign(Which::Psi, 0, 0);

    let mut next = vec![0usize; vars.len() + 1];
    let mut pos = 0usize;
    let mut nodes: u64 = 0;
    while pos < vars.len() {
        let (which, v, domain) = vars[pos];
        let mut placed = false;
        while next[pos] < domain {
            let x = next[pos] as u32;
            next[pos] += 1;
            if s.consistent(which, v, x)? {
                nodes += 1;
                if nodes > node_budget {
                    return Ok(SearchOutcome::BudgetExceeded { nodes: node_budget });
                }
                s.assign(which, v, x);
                placed = true;
                break;
            }
        }
        if placed {
            pos += 1;
            next[pos] = 0;
        } else if pos == 0 {
            return Ok(SearchOutcome::NonExistent(Certificate::Exhaustive { nodes }));
        } else {
            pos -= 1;
            let (w, u, _) = vars[pos];
            s.unassign(w, u);
        }
    }

    let pair = |map: &[Option<u32>], src: &Space, dst: &Space| {
        map.iter()
            .enumerate()
            .map(|(v, x)| (src.word(v as u32).clone(), dst.word(x.expect("complete")).clone()))
            .collect()
    };
    let witness = WitnessPair {
        c,
        m,
        phi: pair(&s.phi, &s.g, &s.h),
        psi: pair(&s.psi, &s.h, &s.g),
    };
    let report = check_witness(a, b, &witness, opts)?;
    assert!(report.passed, "search produced a failing witness: {:?}", report.violations);
    Ok(SearchOutcome::Found(witness))
}

/// `phi` and `psi` both read vertex words verbatim in the other group. Valid with
/// constant `C` whenever the two groups are central extensions of a common quotient
/// whose kernels consist of elements of length below `C` (for instance a group and
/// its quotient by a finite central subgroup).
pub fn identity_witness(
    a: &MarkedGroup,
    b: &MarkedGroup,
    c: u64,
    m: usize,
    opts: &BallOptions,
) -> Result<WitnessPair, QiError> {
    if a.rank() != b.rank() {
        return Err(CayleyError::RankMismatch {
            left: a.rank(),
            right: b.rank(),
        }
        .into());
    }
    let map = |g: &MarkedGroup| -> Result<Vec<(Word, Word)>, QiError> {
        Ok(build_ball(g, m, opts)?
            .vertices()
            .iter()
            .map(|v| (v.clone(), v.clone()))
            .collect())
    };
    Ok(WitnessPair {
        c,
        m,
        phi: map(a)?,
        psi: map(b)?,
    })
}

/// Witness for `G -> G/N` with `N` finite central, listed in full by `kernel_words`:
/// `phi` is the quotient map on vertex words and `psi` sends each vertex of `G/N` to
/// its shortlex-least preimage, which is its own representative word. `C` is one more
/// than the longest kernel word.
pub fn quotient_witness(
    g: &MarkedGroup,
    q: &MarkedGroup,
    kernel_words: &[Word],
    m: usize,
    opts: &BallOptions,
) -> Result<WitnessPair, QiError> {
    if g.rank() != q.rank() {
        return Err(CayleyError::RankMismatch {
            left: g.rank(),
            right: q.rank(),
        }
        .into());
    }
    for k in kernel_words {
        if q.oracle().decide(k) != Decision::Identity {
            return Err(QiError::InconsistentOracles(format!("kernel word {k} survives in the quotient")));
        }
    }
    for w in enumerate_words(g.rank(), 4) {
        if g.oracle().decide(&w) == Decision::Identity && q.oracle().decide(&w) != Decision::Identity {
            return Err(QiError::InconsistentOracles(format!("{w} is trivial in G but not in G/N")));
        }
    }
    let ell = kernel_words.iter().map(Word::len).max().unwrap_or(0);
    identity_witness(g, q, ell as u64 + 1, m, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    #[serde(rename = "C")]
    pub c: u64,
    #[serde(rename = "M")]
    pub m: usize,
    pub status: &'static str,
    pub outcome: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    #[serde(rename = "C")]
    pub c: u64,
    pub verdict: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub entries: Vec<ScanEntry>,
    pub summary: Vec<ScanSummary>,
    pub note: &'static str,
}

pub fn qi_scan(
    a: &MarkedGroup,
    b: &MarkedGroup,
    c_max: u64,
    schedule: &[usize],
    node_budget: u64,
    opts: &BallOptions,
) -> Result<ScanReport, QiError> {
    let mut entries = Vec::new();
    let mut summary = Vec::new();
    for c in 1..=c_max {
        let mut found = None;
        let mut refuted = None;
        let mut inconclusive = false;
        for &m in schedule {
            let outcome = search_witness(a, b, c, m, node_budget, opts)?;
            match &outcome {
                SearchOutcome::Found(_) => found = Some(m),
                SearchOutcome::NonExistent(_) => refuted = refuted.or(Some(m)),
                SearchOutcome::BudgetExceeded { .. } => inconclusive = true,
            }
            entries.push(ScanEntry {
                c,
                m,
                status: outcome.status(),
                outcome: outcome.to_json(),
            });
        }
        let (verdict, message) = match (refuted, inconclusive, found) {
            (Some(m), _, _) => ("certified", format!("certified not {c}-quasi-isometric (NonExistent at M={m})")),
            (None, true, _) => ("inconclusive", "inconclusive (budget)".to_string()),
            (None, false, Some(m)) => ("found", format!("witness found at (C,M)=({c},{m})")),
            (None, false, None) => ("inconclusive", "inconclusive (empty schedule)".to_string()),
        };
        summary.push(ScanSummary { c, verdict, message });
    }
    Ok(ScanReport {
        entries,
        summary,
        note: SCAN_NOTE,
    })
}
