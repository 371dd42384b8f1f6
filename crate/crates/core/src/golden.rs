//! Regression suite: recomputes reference values through independent means (direct
//! BFS, lattice counting, hashed piece enumeration, arithmetic witness enumeration)
//! and compares them with the library.

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cayley::{build_ball, kernel_disagreement, r_locally_isomorphic, BallOptions, MarkedGroup};
use crate::families::{bowditch_oracle, bowditch_word, e_word, hall_eval, hall_oracle, lamplighter_oracle};
use crate::families::{BowditchParams, HallElement, SubsetSpec};
use crate::oracles::{
    abelian_oracle, check_metric_condition, cyclic_oracle, dehn_is_identity, free_oracle,
    integer_marking_oracle, symmetrize, NormalClosureBall, trivial_oracle, Decision, GroupOracle, Presentation,
};
use crate::qiwitness::{
    check_witness, counting_precheck, quotient_witness, search_witness, Precheck, SearchOutcome, DEFAULT_NODE_BUDGET,
};
use crate::words::{enumerate_words, Letter, Word};

#[derive(Debug, Clone, Serialize)]
pub struct GoldenCheck {
    pub name: &'static str,
    pub passed: bool,
    pub expected: Value,
    pub actual: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoldenSummary {
    pub passed: bool,
    pub checks: Vec<GoldenCheck>,
}

fn check(name: &'static str, expected: Value, actual: Value) -> GoldenCheck {
    GoldenCheck {
        name,
        passed: expected == actual,
        expected,
        actual,
    }
}

fn failed(name: &'static str, expected: Value, error: impl ToString) -> GoldenCheck {
    GoldenCheck {
        name,
        passed: false,
        expected,
        actual: json!({"error": error.to_string()}),
    }
}

/// Number of elements of `F_n` of length at most `r`, by BFS on freely reduced words.
pub fn free_ball_by_bfs(rank: usize, r: usize) -> usize {
    let mut seen: HashSet<Vec<u16>> = HashSet::from([Vec::new()]);
    let mut frontier = vec![Vec::new()];
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &frontier {
            for code in 0..2 * rank as u16 {
                let mut v: Vec<u16> = w.clone();
                if v.last() == Some(&(code ^ 1)) {
                    v.pop();
                } else {
                    v.push(code);
                }
                if seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    seen.len()
}

/// Number of lattice points of `Z^2` at `l1` distance at most `r`, by BFS on the lattice.
pub fn lattice_ball_by_bfs(r: i64) -> usize {
    let mut seen = HashSet::from([(0i64, 0i64)]);
    let mut queue = VecDeque::from([((0i64, 0i64), 0i64)]);
    while let Some(((x, y), d)) = queue.pop_front() {
        if d == r {
            continue;
        }
        for p in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if seen.insert(p) {
                queue.push_back((p, d + 1));
            }
        }
    }
    seen.len()
}

/// Longest piece and per-relator `C'(lambda)` verdict for `p`, by hashing every cyclic
/// window of each length. A window of length `l` starting at an offset is a piece
/// when the same letters start at another offset (of any rotation of any relator or
/// inverse), so the longest piece is the largest `l` with a repeated window.
pub fn pieces_by_hashing(p: &Presentation, lambda: Ratio<u64>) -> (usize, bool) {
    let mut cyclic: Vec<Vec<u16>> = Vec::new();
    for r in p.relators() {
        for w in [r.clone(), r.inverse()] {
            let codes: Vec<u16> = w.letters().iter().map(|l| l.code()).collect();
            let rotations: HashSet<Vec<u16>> = (0..codes.len())
                .map(|i| [&codes[i..], &codes[..i]].concat())
                .collect();
            if !cyclic.iter().any(|c| rotations.contains(c)) {
                cyclic.push(codes);
            }
        }
    }
    // Windows of length `l` at every (word, offset), with the word doubled to wrap.
    let doubled: Vec<Vec<u16>> = cyclic.iter().map(|c| [c.as_slice(), c.as_slice()].concat()).collect();
    let repeated = |l: usize| -> HashSet<(usize, usize)> {
        let mut owners: HashMap<&[u16], Vec<(usize, usize)>> = HashMap::new();
        for (ci, d) in doubled.iter().enumerate() {
            let n = cyclic[ci].len();
            if l > n {
                continue;
            }
            for off in 0..n {
                owners.entry(&d[off..off + l]).or_default().push((ci, off));
            }
        }
        owners.into_values().filter(|v| v.len() > 1).flatten().collect()
    };
    let longest = cyclic.iter().map(Vec::len).max().unwrap_or(0);
    let (mut lo, mut hi) = (0usize, longest);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if repeated(mid).is_empty() {
            hi = mid - 1;
        } else {
            lo = mid;
        }
    }
    let satisfied = cyclic.iter().enumerate().all(|(ci, c)| {
        // Smallest piece length violating the bound for a word of this length.
        let limit = (c.len() as u64 * lambda.numer()).div_ceil(*lambda.denom()) as usize;
        limit > c.len() || limit == 0 || repeated(limit).iter().all(|&(cj, _)| cj != ci)
    });
    (lo, satisfied)
}

/// `Z` (`None`) or `Z/n`, with elements as integers and the word metric computed
/// arithmetically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cyclic(pub Option<i64>);

impl Cyclic {
    pub fn norm(self, x: i64) -> i64 {
        match self.0 {
            None => x.abs(),
            Some(n) => {
                let r = x.rem_euclid(n);
                r.min(n - r)
            }
        }
    }

    pub fn ball(self, r: i64) -> Vec<i64> {
        match self.0 {
            None => (-r..=r).collect(),
            Some(n) => (0..n).filter(|&x| self.norm(x) <= r).collect(),
        }
    }

    pub fn oracle(self) -> GroupOracle {
        match self.0 {
            None => abelian_oracle(1),
            Some(1) => trivial_oracle(1),
            Some(n) => cyclic_oracle(n as u32),
        }
    }
}

/// Whether a witnessing pair exists, by enumerating every pair of maps with images in
/// `B(C|g| + C)` and testing the conditions directly.
pub fn witness_exists_unpruned(a: Cyclic, b: Cyclic, c: i64, m: i64) -> bool {
    let maps = |src: Cyclic, dst: Cyclic, dom: &[i64]| -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &x in dom {
            let choices: Vec<i64> = if x == 0 { vec![0] } else { dst.ball(c * src.norm(x) + c) };
            out = out
                .into_iter()
                .flat_map(|f| choices.iter().map(move |&y| [f.clone(), vec![y]].concat()))
                .collect();
        }
        out
    };
    let lipschitz = |src: Cyclic, dst: Cyclic, dom: &[i64], f: &[i64]| {
        (0..dom.len()).all(|i| (0..dom.len()).all(|j| dst.norm(f[i] - f[j]) <= c * src.norm(dom[i] - dom[j]) + c))
    };
    let (dom_a, dom_b) = (a.ball(m), b.ball(m));
    let position = |s: Cyclic, dom: &[i64], x: i64| dom.iter().position(|&y| s.norm(y - x) == 0);
    let phis: Vec<Vec<i64>> = maps(a, b, &dom_a).into_iter().filter(|f| lipschitz(a, b, &dom_a, f)).collect();
    let psis: Vec<Vec<i64>> = maps(b, a, &dom_b).into_iter().filter(|f| lipschitz(b, a, &dom_b, f)).collect();
    phis.iter().any(|phi| {
        psis.iter().any(|psi| {
            let fwd = dom_a.iter().enumerate().all(|(i, &x)| match position(b, &dom_b, phi[i]) {
                Some(j) => a.norm(psi[j] - x) <= c,
                None => true,
            });
            let bwd = dom_b.iter().enumerate().all(|(i, &y)| match position(a, &dom_a, psi[i]) {
                Some(j) => b.norm(phi[j] - y) <= c,
                None => true,
            });
            fwd && bwd
        })
    })
}

pub fn golden_suite() -> GoldenSummary {
    let opts = BallOptions::default();
    let g = MarkedGroup::new;
    let mut checks = Vec::new();

    let sizes = |o: GroupOracle, radii: std::ops::RangeInclusive<usize>| -> Result<Vec<usize>, String> {
        radii.map(|r| build_ball(&g(o.clone()), r, &opts).map(|b| b.len()).map_err(|e| e.to_string())).collect()
    };
    let expected: Vec<usize> = (1..=6).map(|r| free_ball_by_bfs(2, r)).collect();
    checks.push(match sizes(free_oracle(2), 1..=6) {
        Ok(v) => check("free rank-2 ball sizes r=1..6", json!(expected), json!(v)),
        Err(e) => failed("free rank-2 ball sizes r=1..6", json!(expected), e),
    });
    let expected: Vec<usize> = (1..=20).map(lattice_ball_by_bfs).collect();
    checks.push(match sizes(abelian_oracle(2), 1..=20) {
        Ok(v) => check("abelian rank-2 ball sizes r=1..20", json!(expected), json!(v)),
        Err(e) => failed("abelian rank-2 ball sizes r=1..20", json!(expected), e),
    });
    checks.push(match sizes(lamplighter_oracle(), 1..=1) {
        Ok(v) => check("lamplighter |B(1)|", json!([4]), json!(v)),
        Err(e) => failed("lamplighter |B(1)|", json!([4]), e),
    });

    let mutation = build_ball(&g(free_oracle(2)), 2, &opts).map(|b| {
        let rebuilt = build_ball(&g(free_oracle(2)), 2, &opts).expect("same ball builds twice");
        let mutated = b.with_edge_removed(1, Letter::new(2, false));
        json!({"rebuilt_equal": rebuilt.signature() == b.signature(), "mutation_detected": mutated.signature() != b.signature()})
    });
    let expected = json!({"rebuilt_equal": true, "mutation_detected": true});
    checks.push(match mutation {
        Ok(v) => check("ball signature detects a dropped edge", expected, v),
        Err(e) => failed("ball signature detects a dropped edge", expected, e),
    });

    let (f, z) = (g(free_oracle(2)), g(abelian_oracle(2)));
    let local = (1..=2).map(|r| r_locally_isomorphic(&f, &z, r, &opts)).collect::<Result<Vec<_>, _>>();
    checks.push(match local {
        Ok(v) => check("free(2) vs abelian(2) local isomorphism r=1,2", json!([true, false]), json!(v)),
        Err(e) => failed("free(2) vs abelian(2) local isomorphism r=1,2", json!([true, false]), e),
    });
    let kernel = (3..=4)
        .map(|l| kernel_disagreement(&f, &z, l).map(|w| w.map(|w| w.to_string())))
        .collect::<Result<Vec<_>, _>>();
    checks.push(match kernel {
        Ok(v) => check("free(2) vs abelian(2) kernel witness L=3,4", json!([null, "x1 x2 X1 X2"]), json!(v)),
        Err(e) => failed("free(2) vs abelian(2) kernel witness L=3,4", json!([null, "x1 x2 X1 X2"]), e),
    });

    let commutators: Vec<bool> = (1..=6usize)
        .map(|k| {
            let conj = Word::parse(2, &format!("{}x1{}", "X2 ".repeat(k), " x2".repeat(k))).expect("valid word");
            hall_eval(&Word::commutator(&Word::parse(2, "x1").expect("valid word"), &conj)) == HallElement::e(k as u64)
        })
        .collect();
    checks.push(check("Hall commutators [a, T^k a t^k] = e_k, k<=6", json!(vec![true; 6]), json!(commutators)));
    let e1_killed: Vec<Decision> = [SubsetSpec::empty(), SubsetSpec::Finite([1].into())]
        .iter()
        .map(|s| hall_oracle(s).decide(&e_word(1)))
        .collect();
    checks.push(check(
        "e_1 word in G_{} and G_{1}",
        json!(["NonIdentity", "Identity"]),
        serde_json::to_value(e1_killed).expect("decisions serialize"),
    ));

    let params = BowditchParams::default();
    let all8 = Presentation::new(2, (1..=8).map(|i| bowditch_word(i, &params)).collect()).expect("non-empty relators");
    let sixth = Ratio::new(1, 6);
    let (piece, ok) = pieces_by_hashing(&all8, sixth);
    let report = check_metric_condition(&symmetrize(&all8), sixth).expect("1/6 is valid");
    checks.push(check(
        "Bowditch w_1..w_8 C'(1/6), hashed piece enumeration",
        json!({"max_piece_length": piece, "satisfied": ok}),
        json!({"max_piece_length": report.max_piece_length, "satisfied": report.satisfied}),
    ));

    let membership: Result<Vec<Vec<bool>>, String> = (0u32..32)
        .map(|mask| {
            let subset = SubsetSpec::Finite((1..=5).filter(|i| mask >> (i - 1) & 1 == 1).collect());
            let oracle = bowditch_oracle(&subset, 5, &params).map_err(|e| e.to_string())?;
            Ok((1..=5).map(|i| oracle.decide(&bowditch_word(i, &params)) == Decision::Identity).collect())
        })
        .collect();
    let indicator: Vec<Vec<bool>> = (0u32..32).map(|mask| (0..5).map(|i| mask >> i & 1 == 1).collect()).collect();
    checks.push(match membership {
        Ok(v) => check("Bowditch membership is the indicator of I, I within [1..5]", json!(indicator), json!(v)),
        Err(e) => failed("Bowditch membership is the indicator of I, I within [1..5]", json!(indicator), e),
    });

    let one = Presentation::new(2, vec![bowditch_word(1, &params)]).expect("non-empty relator");
    let one_set = symmetrize(&one);
    let closure = NormalClosureBall::new(&one, 10);
    let mut disagreements = 0usize;
    let mut words = 0usize;
    for w in enumerate_words(2, 10) {
        words += 1;
        let dehn = dehn_is_identity(&w, &one_set).unwrap_or(false);
        let brute = closure.decide(&w) == Decision::Identity;
        if dehn != brute {
            disagreements += 1;
        }
    }
    checks.push(check(
        "Dehn vs normal-closure enumeration, one Bowditch relator, |w|<=10",
        json!({"words": 2 * 3usize.pow(10) - 1, "disagreements": 0}),
        json!({"words": words, "disagreements": disagreements}),
    ));

    let (z1, z2) = (g(abelian_oracle(1)), g(abelian_oracle(2)));
    let lattice = |r: i64| lattice_ball_by_bfs(r);
    let expected = json!({"status": "Impossible", "counts": [lattice(13), lattice(1), 2 * 14 + 1]});
    checks.push(match counting_precheck(&z1, &z2, 1, 14, &opts) {
        Ok(Precheck::Impossible(c)) => check(
            "counting certificate Z vs Z^2, C=1, M=14",
            expected,
            json!({"status": "Impossible", "counts": [c.domain_size, c.fiber_size, c.image_size]}),
        ),
        Ok(Precheck::Feasible) => check("counting certificate Z vs Z^2, C=1, M=14", expected, json!("Feasible")),
        Err(e) => failed("counting certificate Z vs Z^2, C=1, M=14", expected, e),
    });

    let z23 = g(integer_marking_oracle(&[2, 3]));
    let found = search_witness(&z1, &z23, 3, 4, DEFAULT_NODE_BUDGET, &opts).and_then(|o| match o {
        SearchOutcome::Found(p) => check_witness(&z1, &z23, &p, &opts).map(|r| json!({"found": true, "passes": r.passed})),
        other => Ok(json!({"found": false, "status": other.status()})),
    });
    let expected = json!({"found": true, "passes": true});
    checks.push(match found {
        Ok(v) => check("witness Z vs (Z,(x^2,x^3)), C=3, M=4", expected, v),
        Err(e) => failed("witness Z vs (Z,(x^2,x^3)), C=3, M=4", expected, e),
    });

    let mut tiny = Vec::new();
    let cyclics: Vec<Cyclic> = [None, Some(1), Some(2), Some(3), Some(4)].into_iter().map(Cyclic).collect();
    for &x in &cyclics {
        for &y in &cyclics {
            let unpruned = witness_exists_unpruned(x, y, 1, 1);
            let pruned = search_witness(&g(x.oracle()), &g(y.oracle()), 1, 1, DEFAULT_NODE_BUDGET, &opts)
                .map(|o| matches!(o, SearchOutcome::Found(_)))
                .unwrap_or(!unpruned);
            tiny.push(pruned == unpruned);
        }
    }
    checks.push(check(
        "pruned vs unpruned witness search, cyclic groups, C=1, M=1",
        json!(vec![true; tiny.len()]),
        json!(tiny),
    ));

    let hall = g(hall_oracle(&SubsetSpec::empty()));
    let quot = g(hall_oracle(&SubsetSpec::Finite([1].into())));
    let qw = quotient_witness(&hall, &quot, &[e_word(1)], 3, &opts)
        .and_then(|p| check_witness(&hall, &quot, &p, &opts).map(|r| json!({"C": p.c, "passed": r.passed})));
    checks.push(match qw {
        Ok(v) => check("quotient witness G_{} -> G_{1}, M=3", json!({"C": 9, "passed": true}), v),
        Err(e) => failed("quotient witness G_{} -> G_{1}, M=3", json!({"C": 9, "passed": true}), e),
    });

    GoldenSummary {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_counts_match_closed_forms() {
        for r in 0..=6 {
            assert_eq!(free_ball_by_bfs(2, r), 2 * 3usize.pow(r as u32) - 1);
        }
        for r in 0..=20 {
            assert_eq!(lattice_ball_by_bfs(r), (2 * r * r + 2 * r + 1) as usize);
        }
    }

    #[test]
    fn hashed_pieces_agree_with_the_checker() {
        let cases = [
            (2, "x1 x2 X1 X2"),
            (3, "x1 x1 x2 x1 X2 x1 x3"),
            (2, "x1 x1 x1 x2 x2 x2 x1 x2 x2 x1 x2"),
        ];
        for (rank, text) in cases {
            let p = Presentation::new(rank, vec![Word::parse(rank, text).unwrap()]).unwrap();
            for lambda in [Ratio::new(1, 6), Ratio::new(1, 4), Ratio::new(1, 2)] {
                let r = check_metric_condition(&symmetrize(&p), lambda).unwrap();
                assert_eq!(pieces_by_hashing(&p, lambda), (r.max_piece_length, r.satisfied), "{text} {lambda}");
            }
        }
    }

    #[test]
    fn suite_passes() {
        let s = golden_suite();
        for c in &s.checks {
            assert!(c.passed, "{}: expected {} got {}", c.name, c.expected, c.actual);
        }
        assert!(s.passed);
    }
}
