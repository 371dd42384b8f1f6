use std::process::Command;

use marked_groups::cayley::{build_ball, kernel_agreement, local_agreement_radius, r_locally_isomorphic, BallOptions, MarkedGroup};
use marked_groups::families::{hall_oracle, parse_selector, parse_subset, SubsetSpec};
use marked_groups::oracles::{abelian_oracle, cyclic_oracle, free_oracle};
use proptest::prelude::*;

fn g(selector: &str) -> MarkedGroup {
    MarkedGroup::new(parse_selector(selector).unwrap())
}

fn opts() -> BallOptions {
    BallOptions::default()
}

fn subset_strategy() -> impl Strategy<Value = SubsetSpec> {
    prop_oneof![
        prop::collection::btree_set(1u64..8, 0..4).prop_map(SubsetSpec::Finite),
        prop::collection::btree_set(1u64..8, 0..4).prop_map(SubsetSpec::Cofinite),
        (2u64..5, 0u64..2).prop_map(|(m, r)| SubsetSpec::Arithmetic { modulus: m, residues: [r].into() }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_agreement_gives_local_isomorphism(i in subset_strategy(), j in subset_strategy(), r in 1usize..=3) {
        let (a, b) = (MarkedGroup::new(hall_oracle(&i)), MarkedGroup::new(hall_oracle(&j)));
        if kernel_agreement(&a, &b, 2 * r).unwrap() {
            prop_assert!(r_locally_isomorphic(&a, &b, r, &opts()).unwrap());
        }
    }

    #[test]
    fn subset_display_parses_back(i in subset_strategy()) {
        prop_assert_eq!(parse_subset(&i.to_string()).unwrap(), i);
    }
}

#[test]
fn local_isomorphism_is_an_equivalence() {
    let groups = [
        MarkedGroup::new(free_oracle(2)),
        MarkedGroup::new(abelian_oracle(2)),
        g("hall:finite:{}"),
        g("hall:cofinite:{}"),
        g("lamplighter"),
        g("zmark:1,2"),
    ];
    for r in 0..=3 {
        let iso = |x: usize, y: usize| r_locally_isomorphic(&groups[x], &groups[y], r, &opts()).unwrap();
        for x in 0..groups.len() {
            assert!(iso(x, x));
            for y in 0..groups.len() {
                assert_eq!(iso(x, y), iso(y, x));
                for z in 0..groups.len() {
                    if iso(x, y) && iso(y, z) {
                        assert!(iso(x, z), "r={r}: {x} {y} {z}");
                    }
                }
            }
        }
    }
}

#[test]
fn finite_cyclic_groups_approach_the_integers() {
    let z = MarkedGroup::new(abelian_oracle(1));
    for n in 3..=12u32 {
        let radius = local_agreement_radius(&z, &MarkedGroup::new(cyclic_oracle(n)), 10, &opts()).unwrap();
        assert_eq!(radius, (n as i64 - 2) / 2, "Z/{n}");
    }
}

#[test]
fn hall_balls_shrink_with_more_relations() {
    let full = build_ball(&g("hall:finite:{}"), 9, &opts()).unwrap();
    let killed = build_ball(&g("hall:finite:{1}"), 9, &opts()).unwrap();
    let lamp = build_ball(&g("lamplighter"), 9, &opts()).unwrap();
    assert!(full.len() > killed.len());
    assert!(killed.len() >= lamp.len());
    assert_eq!(full.restrict(3).signature(), killed.restrict(3).signature());
    assert_ne!(full.restrict(4).signature(), killed.restrict(4).signature());
}

#[test]
fn binary_reports_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_marked-groups");
    let out = Command::new(bin).args(["ball", "--group", "abelian:2", "--radius", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = marked_groups::cli::strip_timing(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(v["outputs"]["vertex_count"], 25);
    assert_eq!(v["tool"], "marked-groups");
    let out = Command::new(bin).args(["ball"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(bin)
        .args(["--word-budget", "100", "ball", "--group", "free:3", "--radius", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}
