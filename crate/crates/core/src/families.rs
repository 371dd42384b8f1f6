//! Explicit families of marked groups: a two-generated central extension of the
//! lamplighter by `Z_2^infinity` (Hall type) with its central quotients, the quotients
//! identifying central coordinates with one another, and a small-cancellation family
//! on two generators.
//!
//! Hall-type elements are triples `(shift, lamps, center)` standing for
//! `c * a_{j1} a_{j2} ... * t^shift` with `j1 < j2 < ...`, where `a_j = t^j a t^-j`
//! and `c` is a product of distinct central `e_k`. Reordering `a_j a_k` with `j > k`
//! produces `e_{j-k}`.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::oracles::{
    abelian_oracle, check_metric_condition, cyclic_oracle, dehn_oracle, free_oracle, integer_marking_oracle,
    symmetrize, trivial_oracle, Decision, GroupOracle, MetricReport, NormalForm, Presentation, WordProblem,
};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("subset: {0}")]
    Subset(#[from] SubsetParseError),
    #[error("pqi subsets must avoid 1")]
    PqiContainsOne,
    #[error("Bowditch relators w_1..w_{m} fail C'(1/6): piece of length {} vs shortest relator {}", report.max_piece_length, report.shortest_relator)]
    MetricConditionFailed { m: usize, report: MetricReport },
    #[error("unknown group selector {0:?}")]
    UnknownSelector(String),
    #[error("selector {selector:?}: {message}")]
    BadSelector { selector: String, message: String },
}

/// An element of the Hall-type group, in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HallElement {
    pub shift: i64,
    pub lamps: BTreeSet<i64>,
    pub center: BTreeSet<u64>,
}

impl HallElement {
    pub fn identity() -> HallElement {
        HallElement::default()
    }

    /// The lamp generator `a`.
    pub fn a() -> HallElement {
        HallElement {
            lamps: BTreeSet::from([0]),
            ..HallElement::default()
        }
    }

    /// The shift generator `t`.
    pub fn t() -> HallElement {
        HallElement {
            shift: 1,
            ..HallElement::default()
        }
    }

    /// The central element `e_k`.
    pub fn e(k: u64) -> HallElement {
        assert!(k >= 1);
        HallElement {
            center: BTreeSet::from([k]),
            ..HallElement::default()
        }
    }

    pub fn is_identity(&self) -> bool {
        self.shift == 0 && self.lamps.is_empty() && self.center.is_empty()
    }

    /// Image in the lamplighter: the center forgotten.
    pub fn project(&self) -> HallElement {
        HallElement {
            center: BTreeSet::new(),
            ..self.clone()
        }
    }
}

impl fmt::Display for HallElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?}, {:?})", self.shift, self.lamps, self.center)
    }
}

fn toggle<T: Ord>(set: &mut BTreeSet<T>, x: T) {
    if !set.remove(&x) {
        set.insert(x);
    }
}

/// Toggles `e_{j-k}` in `center` for every `j` in `left`, `k` in `right`, `j > k`.
fn add_cocycle(center: &mut BTreeSet<u64>, left: &BTreeSet<i64>, right: &BTreeSet<i64>) {
    for &j in left {
        for &k in right.range(..j) {
            toggle(center, (j - k) as u64);
        }
    }
}

pub fn hall_mul(x: &HallElement, y: &HallElement) -> HallElement {
    let shifted: BTreeSet<i64> = y.lamps.iter().map(|k| k + x.shift).collect();
    let mut center: BTreeSet<u64> = x.center.symmetric_difference(&y.center).copied().collect();
    add_cocycle(&mut center, &x.lamps, &shifted);
    HallElement {
        shift: x.shift + y.shift,
        lamps: x.lamps.symmetric_difference(&shifted).copied().collect(),
        center,
    }
}

pub fn hall_inv(x: &HallElement) -> HallElement {
    let mut center = x.center.clone();
    add_cocycle(&mut center, &x.lamps, &x.lamps);
    HallElement {
        shift: -x.shift,
        lamps: x.lamps.iter().map(|j| j - x.shift).collect(),
        center,
    }
}

/// Image of a rank-2 word under `x1 -> a`, `x2 -> t`.
pub fn hall_eval(w: &Word) -> HallElement {
    assert_eq!(w.rank(), 2, "Hall words have rank 2");
    eval_letters(w.letters())
}

fn eval_letters(letters: &[Letter]) -> HallElement {
    let mut shift = 0i64;
    let mut lamps = BTreeSet::new();
    let mut center = BTreeSet::new();
    for l in letters {
        if l.generator() == 2 {
            shift += l.sign() as i64;
        } else {
            // Right multiplication by a_shift: it moves left past every larger lamp.
            for &j in lamps.range(shift + 1..) {
                toggle(&mut center, (j - shift) as u64);
            }
            toggle(&mut lamps, shift);
        }
    }
    HallElement { shift, lamps, center }
}

/// The word `a (T^k a t^k) a (T^k a t^k)` of length `4k + 4`, evaluating to `e_k`
/// (`e_0` is the identity).
pub fn e_word(k: usize) -> Word {
    let mut text = String::from("x1");
    text.push_str(&" X2".repeat(k));
    text.push_str(" x1");
    text.push_str(&" x2".repeat(k));
    let half = Word::parse(2, &text).expect("valid word");
    half.mul(&half)
}

/// A subset of `N = {1, 2, ...}` with constant-time membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SubsetSpec {
    Finite(BTreeSet<u64>),
    Cofinite(BTreeSet<u64>),
    Arithmetic { modulus: u64, residues: BTreeSet<u64> },
    BitPrefix { bits: Vec<bool>, default: bool },
    /// `base` together with finitely many extra elements.
    With { base: Box<SubsetSpec>, extra: BTreeSet<u64> },
}

impl SubsetSpec {
    pub fn empty() -> SubsetSpec {
        SubsetSpec::Finite(BTreeSet::new())
    }

    pub fn all() -> SubsetSpec {
        SubsetSpec::Cofinite(BTreeSet::new())
    }

    pub fn contains(&self, i: u64) -> bool {
        if i == 0 {
            return false;
        }
        match self {
            SubsetSpec::Finite(s) => s.contains(&i),
            SubsetSpec::Cofinite(s) => !s.contains(&i),
            SubsetSpec::Arithmetic { modulus, residues } => residues.contains(&(i % modulus)),
            SubsetSpec::BitPrefix { bits, default } => bits.get(i as usize - 1).copied().unwrap_or(*default),
            SubsetSpec::With { base, extra } => extra.contains(&i) || base.contains(i),
        }
    }

    /// `self ∪ {k}`.
    pub fn union_with(&self, k: u64) -> SubsetSpec {
        assert!(k >= 1);
        match self.clone() {
            SubsetSpec::Finite(mut s) => {
                s.insert(k);
                SubsetSpec::Finite(s)
            }
            SubsetSpec::Cofinite(mut s) => {
                s.remove(&k);
                SubsetSpec::Cofinite(s)
            }
            SubsetSpec::BitPrefix { mut bits, default } => {
                if (k as usize) > bits.len() {
                    if default {
                        return SubsetSpec::BitPrefix { bits, default };
                    }
                    bits.resize(k as usize, false);
                }
                bits[k as usize - 1] = true;
                SubsetSpec::BitPrefix { bits, default }
            }
            SubsetSpec::With { base, mut extra } => {
                extra.insert(k);
                SubsetSpec::With { base, extra }
            }
            arith @ SubsetSpec::Arithmetic { .. } => SubsetSpec::With {
                base: Box::new(arith),
                extra: BTreeSet::from([k]),
            },
        }
    }

    /// Members in `[1, m]`.
    pub fn truncate(&self, m: u64) -> Vec<u64> {
        (1..=m).filter(|&i| self.contains(i)).collect()
    }
}

fn fmt_set(f: &mut fmt::Formatter<'_>, s: &BTreeSet<u64>) -> fmt::Result {
    let items: Vec<String> = s.iter().map(|i| i.to_string()).collect();
    write!(f, "{{{}}}", items.join(","))
}

impl fmt::Display for SubsetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetSpec::Finite(s) => {
                f.write_str("finite:")?;
                fmt_set(f, s)
            }
            SubsetSpec::Cofinite(s) => {
                f.write_str("cofinite:")?;
                fmt_set(f, s)
            }
            SubsetSpec::Arithmetic { modulus, residues } => {
                write!(f, "arith:{modulus}")?;
                residues.iter().try_for_each(|r| write!(f, ",{r}"))
            }
            SubsetSpec::BitPrefix { bits, default } => {
                let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                write!(f, "bits:{s},default={}", u8::from(*default))
            }
            SubsetSpec::With { base, extra } => {
                write!(f, "{base}+")?;
                fmt_set(f, extra)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at position {position}: {message}")]
pub struct SubsetParseError {
    pub position: usize,
    pub message: String,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, SubsetParseError> {
        Err(SubsetParseError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), SubsetParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.fail(format!("expected {token:?}"))
        }
    }

    fn number(&mut self) -> Result<u64, SubsetParseError> {
        self.skip_ws();
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return self.fail("expected a number");
        }
        let value = self.rest()[..digits].parse().or_else(|_| self.fail("number too large"))?;
        self.pos += digits;
        Ok(value)
    }

    fn index(&mut self) -> Result<u64, SubsetParseError> {
        let start = self.pos;
        let i = self.number()?;
        if i == 0 {
            self.pos = start;
            self.skip_ws();
            return self.fail("indices start at 1");
        }
        Ok(i)
    }

    fn set(&mut self) -> Result<BTreeSet<u64>, SubsetParseError> {
        self.expect("{")?;
        let mut out = BTreeSet::new();
        if self.eat("}") {
            return Ok(out);
        }
        loop {
            out.insert(self.index()?);
            if self.eat("}") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn done(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }
}

/// Parses `finite:{1,5}`, `cofinite:{2}`, `arith:<mod>,<res>[,<res>...]`,
/// `bits:<01...>[,default=<0|1>]`, optionally followed by `+{...}` extra elements.
pub fn parse_subset(s: &str) -> Result<SubsetSpec, SubsetParseError> {
    let mut c = Cursor { text: s, pos: 0 };
    let base = if c.eat("finite:") {
        SubsetSpec::Finite(c.set()?)
    } else if c.eat("cofinite:") {
        SubsetSpec::Cofinite(c.set()?)
    } else if c.eat("arith:") {
        let modulus = c.number()?;
        if modulus == 0 {
            return c.fail("modulus must be positive");
        }
        let mut residues = BTreeSet::new();
        while c.eat(",") {
            let r = c.number()?;
            if r >= modulus {
                return c.fail(format!("residue {r} is not below the modulus {modulus}"));
            }
            residues.insert(r);
        }
        if residues.is_empty() {
            return c.fail("expected at least one residue");
        }
        SubsetSpec::Arithmetic { modulus, residues }
    } else if c.eat("bits:") {
        let len = c.rest().bytes().take_while(|b| *b == b'0' || *b == b'1').count();
        let bits = c.rest()[..len].bytes().map(|b| b == b'1').collect();
        c.pos += len;
        let mut default = false;
        if c.eat(",") {
            c.expect("default=")?;
            default = match c.number()? {
                0 => false,
                1 => true,
                _ => return c.fail("default must be 0 or 1"),
            };
        }
        SubsetSpec::BitPrefix { bits, default }
    } else {
        c.skip_ws();
        return c.fail("expected one of finite:, cofinite:, arith:, bits:");
    };
    let spec = if c.eat("+") {
        SubsetSpec::With {
            base: Box::new(base),
            extra: c.set()?,
        }
    } else {
        base
    };
    if !c.done() {
        return c.fail("unexpected trailing input");
    }
    Ok(spec)
}

fn hall_key(shift: i64, lamps: &BTreeSet<i64>, center: impl Iterator<Item = i64>) -> NormalForm {
    let mut out = Vec::with_capacity(2 + lamps.len());
    out.push(shift);
    out.push(lamps.len() as i64);
    out.extend(lamps.iter().copied());
    out.extend(center);
    out
}

/// Quotient of the Hall-type group by the central coordinates in `killed`.
struct HallQuotient {
    killed: SubsetSpec,
}

impl WordProblem for HallQuotient {
    fn decide(&self, word: &[Letter]) -> Decision {
        let x = eval_letters(word);
        if x.shift == 0 && x.lamps.is_empty() && x.center.iter().all(|&k| self.killed.contains(k)) {
            Decision::Identity
        } else {
            Decision::NonIdentity
        }
    }

    fn has_normal_form(&self) -> bool {
        true
    }

    fn normal_form(&self, word: &[Letter]) -> Option<NormalForm> {
        let x = eval_letters(word);
        let kept = x.center.iter().filter(|&&k| !self.killed.contains(k)).map(|&k| k as i64);
        Some(hall_key(x.shift, &x.lamps, kept))
    }
}

/// `G_I`: the Hall-type group with `e_k` killed for every `k` in `subset`.
pub fn hall_oracle(subset: &SubsetSpec) -> GroupOracle {
    GroupOracle::new(
        2,
        format!("hall:{subset}"),
        HallQuotient {
            killed: subset.clone(),
        },
    )
}

/// The lamplighter `Z_2 wr Z` marked by `(a, t)`.
pub fn lamplighter_oracle() -> GroupOracle {
    GroupOracle::new(2, "lamplighter", SolverRef(hall_oracle(&SubsetSpec::all())))
}

/// Delegates to another oracle under a new label.
struct SolverRef(GroupOracle);

impl WordProblem for SolverRef {
    fn decide(&self, word: &[Letter]) -> Decision {
        self.0.decide(&Word::from_letters_unchecked(self.0.rank(), word.to_vec()))
    }

    fn has_normal_form(&self) -> bool {
        self.0.has_normal_form()
    }

    fn normal_form(&self, word: &[Letter]) -> Option<NormalForm> {
        self.0.normal_form(&Word::from_letters_unchecked(self.0.rank(), word.to_vec()))
    }

    fn is_exact(&self) -> bool {
        self.0.is_exact()
    }
}

/// `e_i = 1` for `i` in `I`, `e_j = e_1` for every other `j >= 2`.
struct PqiQuotient {
    killed: SubsetSpec,
}

impl PqiQuotient {
    fn parity(&self, center: &BTreeSet<u64>) -> bool {
        center.iter().filter(|&&k| k == 1 || !self.killed.contains(k)).count() % 2 == 1
    }
}

impl WordProblem for PqiQuotient {
    fn decide(&self, word: &[Letter]) -> Decision {
        let x = eval_letters(word);
        if x.shift == 0 && x.lamps.is_empty() && !self.parity(&x.center) {
            Decision::Identity
        } else {
            Decision::NonIdentity
        }
    }

    fn has_normal_form(&self) -> bool {
        true
    }

    fn normal_form(&self, word: &[Letter]) -> Option<NormalForm> {
        let x = eval_letters(word);
        let p = self.parity(&x.center) as i64;
        Some(hall_key(x.shift, &x.lamps, std::iter::once(p)))
    }
}

/// `Q_I` for `I` a subset of `{2, 3, ...}`; coordinate 1 is the surviving central one.
pub fn pqi_oracle(subset: &SubsetSpec) -> Result<GroupOracle, FamilyError> {
    if subset.contains(1) {
        return Err(FamilyError::PqiContainsOne);
    }
    Ok(GroupOracle::new(
        2,
        format!("pqi:{subset}"),
        PqiQuotient {
            killed: subset.clone(),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BowditchParams {
    pub block_count: usize,
}

impl Default for BowditchParams {
    fn default() -> BowditchParams {
        BowditchParams { block_count: 50 }
    }
}

impl BowditchParams {
    /// Exponent of `b` in block `j` (from 1) of `w_i`.
    pub fn exponent(&self, i: usize, j: usize) -> usize {
        self.block_count * (i - 1) + j + 1
    }
}

/// `w_i = prod_{j=1..B} a b^(B(i-1)+j+1)` over `a = x1`, `b = x2`.
pub fn bowditch_word(i: usize, params: &BowditchParams) -> Word {
    assert!(i >= 1);
    let a = Letter::new(1, false);
    let b = Letter::new(2, false);
    let mut letters = Vec::new();
    for j in 1..=params.block_count {
        letters.push(a);
        letters.extend(std::iter::repeat_n(b, params.exponent(i, j)));
    }
    Word::from_letters(2, letters).expect("rank 2 letters")
}

/// Metric report for `{w_1, ..., w_m}` at `lambda = 1/6`.
pub fn bowditch_metric_report(m: usize, params: &BowditchParams) -> MetricReport {
    let all = Presentation::new(2, (1..=m).map(|i| bowditch_word(i, params)).collect())
        .expect("Bowditch words are cyclically reduced");
    check_metric_condition(&symmetrize(&all), Ratio::new(1, 6)).expect("1/6 is a valid lambda")
}

/// Relators `w_i` for `i` in `subset` and `i <= m`, after checking `C'(1/6)` for all
/// of `w_1..w_m`.
pub fn bowditch_relators(
    subset: &SubsetSpec,
    m: usize,
    params: &BowditchParams,
) -> Result<Presentation, FamilyError> {
    let report = bowditch_metric_report(m, params);
    if !report.satisfied {
        return Err(FamilyError::MetricConditionFailed { m, report });
    }
    let relators = subset
        .truncate(m as u64)
        .into_iter()
        .map(|i| bowditch_word(i as usize, params))
        .collect();
    Ok(Presentation::new(2, relators).expect("Bowditch words are cyclically reduced"))
}

pub fn bowditch_oracle(subset: &SubsetSpec, m: usize, params: &BowditchParams) -> Result<GroupOracle, FamilyError> {
    let p = bowditch_relators(subset, m, params)?;
    let label = if params.block_count == BowditchParams::default().block_count {
        format!("bowditch:{subset}:{m}")
    } else {
        format!("bowditch[B={}]:{subset}:{m}", params.block_count)
    };
    Ok(dehn_oracle(&p, label).expect("checked C'(1/6) above"))
}

fn bad(selector: &str, message: impl Into<String>) -> FamilyError {
    FamilyError::BadSelector {
        selector: selector.to_string(),
        message: message.into(),
    }
}

fn positive(selector: &str, text: &str) -> Result<usize, FamilyError> {
    match text.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(bad(selector, format!("expected a positive integer, got {text:?}"))),
    }
}

/// A parsed group selector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Hall(SubsetSpec),
    Pqi(SubsetSpec),
    Bowditch { subset: SubsetSpec, m: usize },
    Lamplighter,
    Free(usize),
    Abelian(usize),
    Trivial(usize),
    Cyclic(u32),
    IntegerMarking(Vec<i64>),
}

impl Selector {
    /// Parses `hall:<subset>`, `pqi:<subset>`, `bowditch:<subset>:<m>`, `lamplighter`,
    /// `free:<n>`, `abelian:<n>`, `trivial:<n>`, `cyclic:<m>` or `zmark:<w1>,<w2>,...`.
    pub fn parse(selector: &str) -> Result<Selector, FamilyError> {
        let s = selector.trim();
        if s == "lamplighter" {
            return Ok(Selector::Lamplighter);
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| FamilyError::UnknownSelector(selector.to_string()))?;
        Ok(match kind {
            "hall" => Selector::Hall(parse_subset(arg)?),
            "pqi" => Selector::Pqi(parse_subset(arg)?),
            "bowditch" => {
                let (subset, m) = arg
                    .rsplit_once(':')
                    .ok_or_else(|| bad(selector, "expected bowditch:<subset>:<m>"))?;
                let m = m
                    .trim()
                    .parse()
                    .map_err(|_| bad(selector, format!("expected a truncation m, got {m:?}")))?;
                Selector::Bowditch {
                    subset: parse_subset(subset)?,
                    m,
                }
            }
            "free" => Selector::Free(positive(selector, arg)?),
            "abelian" => Selector::Abelian(positive(selector, arg)?),
            "trivial" => Selector::Trivial(positive(selector, arg)?),
            "cyclic" => Selector::Cyclic(
                u32::try_from(positive(selector, arg)?).map_err(|_| bad(selector, "modulus too large"))?,
            ),
            "zmark" => {
                let weights = arg
                    .split(',')
                    .map(|w| w.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad(selector, "expected comma-separated integers"))?;
                Selector::IntegerMarking(weights)
            }
            _ => return Err(FamilyError::UnknownSelector(selector.to_string())),
        })
    }

    pub fn oracle(&self) -> Result<GroupOracle, FamilyError> {
        Ok(match self {
            Selector::Hall(s) => hall_oracle(s),
            Selector::Pqi(s) => pqi_oracle(s)?,
            Selector::Bowditch { subset, m } => bowditch_oracle(subset, *m, &BowditchParams::default())?,
            Selector::Lamplighter => lamplighter_oracle(),
            Selector::Free(n) => free_oracle(*n),
            Selector::Abelian(n) => abelian_oracle(*n),
            Selector::Trivial(n) => trivial_oracle(*n),
            Selector::Cyclic(m) => cyclic_oracle(*m),
            Selector::IntegerMarking(w) => integer_marking_oracle(w),
        })
    }
}

/// Parses a selector and builds its oracle.
pub fn parse_selector(selector: &str) -> Result<GroupOracle, FamilyError> {
    Selector::parse(selector)?.oracle()
}
