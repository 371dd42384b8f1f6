//! Acceptance criteria, one line each.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use marked_groups::cayley::{
    build_ball, kernel_agreement, r_locally_isomorphic, BallOptions, MarkedGroup,
};
use marked_groups::families::{
    bowditch_oracle, bowditch_word, e_word, hall_eval, hall_inv, hall_mul, hall_oracle, BowditchParams, HallElement,
    SubsetSpec,
};
use marked_groups::golden::{free_ball_by_bfs, lattice_ball_by_bfs, pieces_by_hashing, witness_exists_unpruned, Cyclic};
use marked_groups::oracles::{
    abelian_oracle, check_metric_condition, dehn_is_identity, free_oracle, integer_marking_oracle, symmetrize,
    Decision, NormalClosureBall, Presentation,
};
use marked_groups::qiwitness::{
    check_witness, counting_precheck, quotient_witness, search_witness, Precheck, SearchOutcome, DEFAULT_NODE_BUDGET,
};
use marked_groups::words::{enumerate_words, Letter, Word};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:.2?}, limit {limit:?}"))
}

fn g(o: marked_groups::GroupOracle) -> MarkedGroup {
    MarkedGroup::new(o)
}

fn opts() -> BallOptions {
    BallOptions::default()
}

fn ball_counts() -> Outcome {
    let start = Instant::now();
    let free = build_ball(&g(free_oracle(2)), 6, &opts()).map_err(|e| e.to_string())?;
    let got: Vec<usize> = (1..=6).map(|r| free.count_within(r)).collect();
    within(start, Duration::from_secs(1), "free rank-2 balls")?;
    let bfs_free: Vec<usize> = (1..=6).map(|r| free_ball_by_bfs(2, r)).collect();
    let formula: Vec<usize> = (1..=6u32).map(|r| 2 * 3usize.pow(r) - 1).collect();
    ensure(got == bfs_free && got == formula, || format!("free: {got:?} vs BFS {bfs_free:?}"))?;

    let start = Instant::now();
    let z2 = build_ball(&g(abelian_oracle(2)), 20, &opts()).map_err(|e| e.to_string())?;
    let got: Vec<usize> = (1..=20).map(|r| z2.count_within(r)).collect();
    within(start, Duration::from_secs(1), "abelian rank-2 balls")?;
    let bfs: Vec<usize> = (1..=20).map(lattice_ball_by_bfs).collect();
    let formula: Vec<usize> = (1..=20usize).map(|r| 2 * r * r + 2 * r + 1).collect();
    ensure(got == bfs && got == formula, || format!("abelian: {got:?} vs BFS {bfs:?}"))?;
    Ok(format!("free r<=6 {:?}, abelian r<=20 up to {}", bfs_free, formula[19]))
}

fn random_hall(rng: &mut ChaCha8Rng) -> HallElement {
    let len = rng.random_range(0..24);
    let letters: Vec<Letter> = (0..len).map(|_| Letter::new(rng.random_range(1..=2), rng.random())).collect();
    hall_eval(&Word::from_letters(2, letters).expect("rank 2 letters"))
}

fn lamplighter_mul(x: &HallElement, y: &HallElement) -> HallElement {
    let shifted: BTreeSet<i64> = y.lamps.iter().map(|j| j + x.shift).collect();
    HallElement {
        shift: x.shift + y.shift,
        lamps: x.lamps.symmetric_difference(&shifted).copied().collect(),
        center: BTreeSet::new(),
    }
}

fn hall_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a11);
    let id = HallElement::identity();
    for _ in 0..10_000 {
        let (x, y, z) = (random_hall(&mut rng), random_hall(&mut rng), random_hall(&mut rng));
        ensure(hall_mul(&hall_mul(&x, &y), &z) == hall_mul(&x, &hall_mul(&y, &z)), || format!("associativity at {x} {y} {z}"))?;
        ensure(hall_mul(&x, &id) == x && hall_mul(&id, &x) == x, || format!("identity at {x}"))?;
        ensure(hall_mul(&x, &hall_inv(&x)).is_identity() && hall_mul(&hall_inv(&x), &x).is_identity(), || {
            format!("inverse at {x}")
        })?;
    }
    for k in 1..=12u64 {
        let e = HallElement::e(k);
        ensure(hall_mul(&e, &e).is_identity() && !e.is_identity(), || format!("e_{k} does not have order 2"))?;
        for _ in 0..50 {
            let x = random_hall(&mut rng);
            ensure(hall_mul(&e, &x) == hall_mul(&x, &e), || format!("e_{k} does not commute with {x}"))?;
        }
    }
    for _ in 0..1_000 {
        let (x, y) = (random_hall(&mut rng), random_hall(&mut rng));
        ensure(hall_mul(&x, &y).project() == lamplighter_mul(&x.project(), &y.project()), || {
            format!("projection at {x} {y}")
        })?;
    }
    let a = Word::parse(2, "x1").expect("valid");
    for k in 1..=6 {
        let conj = Word::parse(2, &format!("{}x1{}", "X2 ".repeat(k), " x2".repeat(k))).expect("valid");
        let value = hall_eval(&Word::commutator(&a, &conj));
        ensure(value == HallElement::e(k as u64), || format!("[a, t^-{k} a t^{k}] evaluates to {value}"))?;
    }
    within(start, Duration::from_secs(10), "Hall axioms")?;
    Ok("10^4 triples, e_k for k<=12, 10^3 projections, commutators k<=6".into())
}

fn random_subset(rng: &mut ChaCha8Rng) -> SubsetSpec {
    let small: BTreeSet<u64> = (1..=8).filter(|_| rng.random_bool(0.5)).collect();
    match rng.random_range(0..4) {
        0 => SubsetSpec::Finite(small),
        1 => SubsetSpec::Cofinite(small),
        2 => SubsetSpec::Arithmetic {
            modulus: rng.random_range(2..5),
            residues: BTreeSet::from([rng.random_range(0..2)]),
        },
        _ => SubsetSpec::BitPrefix {
            bits: (0..6).map(|_| rng.random()).collect(),
            default: rng.random(),
        },
    }
}

fn kernel_implies_local() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x96);
    let mut checked = 0;
    for _ in 0..200 {
        let (i, j) = (random_subset(&mut rng), random_subset(&mut rng));
        let (a, b) = (g(hall_oracle(&i)), g(hall_oracle(&j)));
        for r in 1..=3 {
            let agree = kernel_agreement(&a, &b, 2 * r).map_err(|e| e.to_string())?;
            if agree {
                checked += 1;
                let local = r_locally_isomorphic(&a, &b, r, &opts()).map_err(|e| e.to_string())?;
                ensure(local, || format!("counterexample: I={i} J={j} r={r}"))?;
            }
        }
    }
    within(start, Duration::from_secs(60), "implication check")?;
    Ok(format!("200 pairs, r<=3, {checked} implications verified, 0 counterexamples"))
}

fn continuity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5);
    let mut checked = 0;
    for _ in 0..50 {
        let (i, j) = (random_subset(&mut rng), random_subset(&mut rng));
        let (a, b) = (g(hall_oracle(&i)), g(hall_oracle(&j)));
        for r in 0..=4usize {
            let k = (1..).take_while(|&k| 4 * k + 4 <= 2 * r as u64).last().unwrap_or(0);
            if i.truncate(k) == j.truncate(k) {
                checked += 1;
                let local = r_locally_isomorphic(&a, &b, r, &opts()).map_err(|e| e.to_string())?;
                ensure(local, || format!("counterexample: I={i} J={j} r={r}"))?;
            }
        }
    }
    within(start, Duration::from_secs(60), "continuity check")?;
    Ok(format!("50 pairs, r<=4, {checked} agreeing instances locally isomorphic"))
}

fn small_cancellation() -> Outcome {
    let start = Instant::now();
    let params = BowditchParams::default();
    let eight = Presentation::new(2, (1..=8).map(|i| bowditch_word(i, &params)).collect()).map_err(|e| e.to_string())?;
    let sixth = Ratio::new(1, 6);
    let report = check_metric_condition(&symmetrize(&eight), sixth).map_err(|e| e.to_string())?;
    let (piece, ok) = pieces_by_hashing(&eight, sixth);
    ensure(report.satisfied, || format!("w_1..w_8 fail C'(1/6): {report:?}"))?;
    ensure(ok && piece == report.max_piece_length, || {
        format!("piece enumeration disagrees: {piece}/{ok} vs {}", report.max_piece_length)
    })?;

    let one = Presentation::new(2, vec![bowditch_word(1, &params)]).map_err(|e| e.to_string())?;
    let set = symmetrize(&one);
    let closure = NormalClosureBall::new(&one, 10);
    let mut words = 0;
    for w in enumerate_words(2, 10) {
        words += 1;
        let dehn = dehn_is_identity(&w, &set).map_err(|e| e.to_string())?;
        let brute = closure.decide(&w) == Decision::Identity;
        ensure(dehn == brute, || format!("Dehn and normal closure disagree on {w}"))?;
    }

    for mask in 0u32..32 {
        let subset = SubsetSpec::Finite((1..=5).filter(|i| mask >> (i - 1) & 1 == 1).collect());
        let oracle = bowditch_oracle(&subset, 5, &params).map_err(|e| e.to_string())?;
        for i in 1..=5u64 {
            let trivial = oracle.decide(&bowditch_word(i as usize, &params)) == Decision::Identity;
            ensure(trivial == subset.contains(i), || format!("w_{i} in G_{subset}: {trivial}"))?;
        }
    }
    within(start, Duration::from_secs(300), "small cancellation")?;
    Ok(format!(
        "max piece {} of shortest {}, {words} words agree, 32 subsets",
        report.max_piece_length, report.shortest_relator
    ))
}

fn qi_certificates() -> Outcome {
    let (z, z2) = (g(abelian_oracle(1)), g(abelian_oracle(2)));
    match counting_precheck(&z, &z2, 1, 14, &opts()).map_err(|e| e.to_string())? {
        Precheck::Impossible(_) => {}
        Precheck::Feasible => return Err("counting precheck did not refute Z vs Z^2 at C=1, M=14".into()),
    }
    let counts = (
        build_ball(&z2, 14, &opts()).map_err(|e| e.to_string())?.len(),
        build_ball(&z, 6, &opts()).map_err(|e| e.to_string())?.len(),
        build_ball(&z, 15, &opts()).map_err(|e| e.to_string())?.len(),
    );
    ensure(counts == (421, 13, 31), || format!("ball counts {counts:?}"))?;

    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_marked-groups"))
        .args(["qi-search", "--a", "abelian:1", "--b", "abelian:2", "--C", "1", "--M", "14"])
        .output()
        .map_err(|e| e.to_string())?;
    let cli_time = start.elapsed();
    ensure(out.status.code() == Some(3), || format!("qi-search exited with {:?}", out.status.code()))?;
    ensure(cli_time < Duration::from_secs(1), || format!("qi-search took {cli_time:.2?}"))?;

    let start = Instant::now();
    let z23 = g(integer_marking_oracle(&[2, 3]));
    let found = search_witness(&z, &z23, 3, 4, DEFAULT_NODE_BUDGET, &opts()).map_err(|e| e.to_string())?;
    let SearchOutcome::Found(p) = found else {
        return Err(format!("Z vs (Z,(x^2,x^3)) at C=3, M=4: {}", found.status()));
    };
    let report = check_witness(&z, &z23, &p, &opts()).map_err(|e| e.to_string())?;
    ensure(report.passed, || format!("found witness fails: {:?}", report.violations))?;
    within(start, Duration::from_secs(300), "witness search")?;

    let groups: Vec<Cyclic> = [None, Some(1), Some(2), Some(3), Some(4), Some(5), Some(6), Some(7)]
        .into_iter()
        .map(Cyclic)
        .collect();
    let mut instances = 0;
    for &x in &groups {
        for &y in &groups {
            for m in 1..=2 {
                if x.ball(m).len() > 7 || y.ball(m).len() > 7 {
                    continue;
                }
                instances += 1;
                let expected = witness_exists_unpruned(x, y, 1, m);
                let out = search_witness(&g(x.oracle()), &g(y.oracle()), 1, m as usize, DEFAULT_NODE_BUDGET, &opts())
                    .map_err(|e| e.to_string())?;
                ensure(matches!(out, SearchOutcome::Found(_)) == expected, || {
                    format!("{:?} vs {:?} at M={m}: pruned {} unpruned {expected}", x.0, y.0, out.status())
                })?;
            }
        }
    }
    Ok(format!("421 > 13*31, CLI exit 3 in {cli_time:.2?}, witness found, {instances} tiny instances agree"))
}

fn quotient_witnesses() -> Outcome {
    let start = Instant::now();
    let evens = SubsetSpec::Arithmetic { modulus: 2, residues: BTreeSet::from([0]) };
    let mut count = 0;
    for base in [SubsetSpec::empty(), evens] {
        for k in 1..=3u64 {
            let (gi, gj) = (g(hall_oracle(&base)), g(hall_oracle(&base.union_with(k))));
            for m in 1..=6 {
                let p = quotient_witness(&gi, &gj, &[e_word(k as usize)], m, &opts()).map_err(|e| e.to_string())?;
                ensure(p.c == 4 * k + 5, || format!("constant {} for k={k}", p.c))?;
                let report = check_witness(&gi, &gj, &p, &opts()).map_err(|e| e.to_string())?;
                ensure(report.passed, || format!("I={base} k={k} M={m}: {:?}", report.violations))?;
                count += 1;
            }
        }
    }
    within(start, Duration::from_secs(120), "quotient witnesses")?;
    Ok(format!("{count} witnesses pass with C=4k+5"))
}

fn cli_report(args: &[&str]) -> Result<serde_json::Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_marked-groups"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    marked_groups::cli::strip_timing(&text).map_err(|e| format!("{args:?}: {e}"))
}

fn determinism() -> Outcome {
    let dot = std::env::temp_dir().join(format!("marked-groups-acceptance-{}.dot", std::process::id()));
    let dot = dot.to_str().ok_or("temporary path is not UTF-8")?.to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec!["ball", "--group", "hall:finite:{1}", "--radius", "4"],
        vec!["ball", "--group", "free:2", "--radius", "3", "--dot", &dot],
        vec!["compare", "--a", "free:2", "--b", "abelian:2", "--radius", "2"],
        vec!["agree-radius", "--a", "hall:finite:{}", "--b", "hall:cofinite:{}", "--radius", "5"],
        vec!["kernel-agree", "--a", "free:2", "--b", "abelian:2", "--length", "4"],
        vec!["converge", "--limit", "hall:cofinite:{}", "--chain", "hall:finite:{1}", "--chain", "hall:finite:{1,2}", "--radius", "2"],
        vec!["qi-check", "--a", "abelian:1", "--b", "abelian:1", "--C", "1", "--M", "3"],
        vec!["qi-search", "--a", "abelian:1", "--b", "zmark:2,3", "--C", "3", "--M", "4"],
        vec!["qi-scan", "--a", "abelian:1", "--b", "abelian:2", "--Cmax", "1", "--M-list", "13,14", "--budget", "100000"],
        vec!["check-sc", "--group", "bowditch:finite:{1}:3"],
        vec!["family-info", "--group", "pqi:finite:{2}"],
        vec!["golden"],
    ];
    for args in &commands {
        let (first, second) = (cli_report(args)?, cli_report(args)?);
        ensure(first == second, || format!("{args:?} differs between runs"))?;
        ensure(!first.is_null(), || format!("{args:?} produced no report"))?;
    }
    let groups = [free_oracle(2), abelian_oracle(2), hall_oracle(&SubsetSpec::empty())];
    for o in groups {
        let group = g(o);
        let signatures: Vec<_> = [1, 4, 8]
            .into_iter()
            .map(|t| {
                let opts = BallOptions { threads: Some(t), ..opts() };
                build_ball(&group, 5, &opts).map(|b| b.signature())
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(signatures.windows(2).all(|w| w[0] == w[1]), || format!("{} differs across thread counts", group.label()))?;
    }
    let _ = std::fs::remove_file(&dot);
    Ok(format!("{} commands byte-identical, signatures equal for 1/4/8 threads", commands.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("ball counts", ball_counts),
        ("Hall group axioms", hall_axioms),
        ("kernel agreement implies local isomorphism", kernel_implies_local),
        ("continuity of I -> (G_I, X_I)", continuity),
        ("small cancellation", small_cancellation),
        ("QI certificates", qi_certificates),
        ("quotient witnesses", quotient_witnesses),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("[PASS] {} {name}: {detail} ({t:.2?})", n + 1),
            Err(why) => {
                failures += 1;
                println!("[FAIL] {} {name}: {why} ({t:.2?})", n + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
