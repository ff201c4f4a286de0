//! Star-reduction invariants: print-abstraction completeness against full
//! star exploration, monotonicity of print successors under larger
//! configurations, and agreement between the procedures.

mod common;

use bpcov::semantics::explore::{brute_force_cover_family, SearchOptions, TopologyFamily};
use bpcov::star_cover::{
    bprint, cover_1pb, initial_prints, reachable_prints, BroadcastPrint, PRINT_BUDGET,
};
use bpcov::topology::make_star;
use common::*;
use std::collections::BTreeSet;

/// The print closure equals the prints of reachable b-configurations over
/// concrete stars with up to four leaves (both sides brute-forced).
#[test]
fn reachable_prints_match_concrete_star_reachability() {
    for seed in 0..60u64 {
        let mut r = rng(0x88 + seed);
        let p = random_phase_bounded(&mut r, 1, 4, 2, 6);
        let part = partition_of(&p);
        let closure = reachable_prints(&p, &part, PRINT_BUDGET);
        assert!(closure.complete);

        // concrete side: every reachable configuration of stars with
        // 0..=4 leaves, abstracted
        let mut concrete: BTreeSet<BroadcastPrint> = BTreeSet::new();
        for leaves in 0..=4usize {
            let star = make_star(leaves);
            let topo = star.topology();
            for (root, ls) in star_full_reach(&p, leaves, 200_000) {
                if part.in_qb(root) {
                    let mut labels = vec![root];
                    labels.extend(ls);
                    let cfg = bpcov::semantics::Configuration::new(labels);
                    if let Some(pr) = bprint(&part, topo, &cfg).unwrap() {
                        concrete.insert(pr);
                    }
                }
            }
        }
        // the abstraction is exact for small stars in one direction and
        // complete in the other: everything concrete appears in the
        // closure, and every print of the closure is realized by some
        // star (possibly needing more leaves than four, so only the
        // inclusion is asserted, plus equality of the initial prints)
        for pr in &concrete {
            assert!(
                closure.prints.contains(pr),
                "seed {seed}: concrete print {} missing from the closure",
                pr.render(&p)
            );
        }
        for pr in initial_prints(&p) {
            assert!(closure.prints.contains(&pr));
        }
        // completeness at small sizes: prints whose leaf sets have at
        // most 2 elements are realizable within 4 leaves (each state
        // needs at most 2 copies for the keep/drop distinction)
        for pr in &closure.prints {
            if pr.leaves.len() <= 2 {
                assert!(
                    concrete.contains(pr),
                    "seed {seed}: closure print {} not realized by any star up to 4 leaves",
                    pr.render(&p)
                );
            }
        }
    }
}

/// Monotonicity: the print successors computed from a configuration with
/// more copies per leaf state include everything the smaller one reaches
/// (checked through the brute-force successor sets).
#[test]
fn print_successors_monotone_in_multiplicity() {
    for seed in 0..40u64 {
        let mut r = rng(0x99 + seed);
        let p = random_phase_bounded(&mut r, 1, 4, 2, 6);
        let part = partition_of(&p);
        let closure = reachable_prints(&p, &part, PRINT_BUDGET);
        for pr in closure.prints.iter().take(8) {
            let small = brute_force_print_successors(&p, &part, pr, 1);
            let large = brute_force_print_successors(&p, &part, pr, 3);
            for s in &small {
                assert!(
                    large.contains(s),
                    "seed {seed}: successor lost when adding copies"
                );
            }
        }
    }
}

/// The star procedure agrees with the concrete family search whenever the
/// family search covers.
#[test]
fn cover_1pb_agrees_with_star_family_search() {
    for seed in 0..60u64 {
        let mut r = rng(0xAA + seed);
        let p = random_phase_bounded(&mut r, 1, 4, 3, 8);
        for target in p.states() {
            let family = brute_force_cover_family(
                &p,
                target,
                &TopologyFamily::Stars { max: 4 },
                &SearchOptions::default(),
            );
            if family.is_coverable() {
                let out = cover_1pb(&p, target).expect("1-PB");
                assert!(
                    out.verdict.is_coverable(),
                    "seed {seed}: {} covered on a star but cover_1pb says no",
                    p.state_name(target)
                );
            }
        }
    }
}

/// And conversely on this corpus: a positive star answer is realized by a
/// concrete star of bounded size (the converse direction is one-sided in
/// general, so a failure here only escalates the leaf bound).
#[test]
fn cover_1pb_positive_answers_confirmed_by_families() {
    for seed in 0..60u64 {
        let mut r = rng(0xAB + seed);
        let p = random_phase_bounded(&mut r, 1, 4, 2, 6);
        for target in p.states() {
            let out = cover_1pb(&p, target).expect("1-PB");
            if out.verdict.is_coverable() {
                let mut confirmed = false;
                for max in [4usize, 8, 12] {
                    if brute_force_cover_family(
                        &p,
                        target,
                        &TopologyFamily::Stars { max },
                        &SearchOptions::default(),
                    )
                    .is_coverable()
                    {
                        confirmed = true;
                        break;
                    }
                }
                assert!(
                    confirmed,
                    "seed {seed}: cover_1pb covers {} but stars up to 12 do not",
                    p.state_name(target)
                );
            }
        }
    }
}

/// The print (q1, {qin, q1, q2}) is reachable in the print-example
/// protocol, and a concrete four-step star execution realizes it.
#[test]
fn known_print_reachable_with_concrete_witness() {
    use bpcov::semantics::{replay, Configuration, Execution};
    use bpcov::protocol::Action;

    let p = bpcov::protocol::parse_protocol(
        "protocol prints\nmessages a b c\nstates qin q1 q2 q3 q4 q5\ninit qin\n\
         trans qin !!a q1\ntrans q1 ?c q5\ntrans q1 ?b q5\ntrans q1 !!b q1\n\
         trans q1 !!a q2\ntrans q2 !!c q3\ntrans q2 ?c q4\n",
    )
    .unwrap();
    let part = partition_of(&p);
    let s = |n: &str| p.state_id(n).unwrap();
    let target = BroadcastPrint {
        root: s("q1"),
        leaves: [s("qin"), s("q1"), s("q2")].into_iter().collect(),
    };
    let closure = reachable_prints(&p, &part, PRINT_BUDGET);
    assert!(closure.prints.contains(&target));

    // the hand-built witness: root climbs to q1, two leaves climb to q1
    // and one of them on to q2, the third leaf stays put
    let star = make_star(3);
    let topo = star.topology();
    let mut exec = Execution {
        initial: Configuration::initial(&p, topo),
        steps: Vec::new(),
        from_scratch: true,
    };
    let m = |n: &str| p.message_id(n).unwrap();
    for (v, src, msg, dst) in [
        ("ε", "qin", "a", "q1"),
        ("2", "qin", "a", "q1"),
        ("3", "qin", "a", "q1"),
        ("3", "q1", "a", "q2"),
    ] {
        exec.steps.push(common_step(&p, topo, v, src, Action::Broadcast(m(msg)), dst));
    }
    let final_cfg = replay(&p, topo, &exec).expect("hand witness replays");
    let pr = bprint(&part, topo, &final_cfg).unwrap().unwrap();
    assert_eq!(pr, target);
}

fn common_step(
    p: &bpcov::protocol::Protocol,
    topo: &bpcov::topology::Topology,
    vertex: &str,
    src: &str,
    action: bpcov::protocol::Action,
    dst: &str,
) -> bpcov::semantics::Step {
    step(p, topo, vertex, src, action, dst, &[])
}

/// The VASS built from a print decides exactly the restricted star
/// relation: the goal control state is reachable iff some configuration
/// covering the target at the root is reachable from a star realizing the
/// print by steps in which the root never broadcasts.
#[test]
fn vass_from_print_matches_restricted_star_oracle() {
    use bpcov::star_cover::reduce::vass_from_print;
    use bpcov::star_cover::{vass_control_reach, VassReach, VASS_BUDGET};

    for seed in 0..50u64 {
        let mut r = rng(0xAC + seed);
        let p = random_phase_bounded(&mut r, 1, 4, 2, 6);
        let part = partition_of(&p);
        let closure = reachable_prints(&p, &part, PRINT_BUDGET);
        for pr in closure.prints.iter().take(6) {
            for target in p.states() {
                let (vass, init, goal, _) = vass_from_print(&p, target, pr);
                let fast = matches!(
                    vass_control_reach(&vass, &init, goal, VASS_BUDGET),
                    VassReach::Reachable(_)
                );
                // oracle: restricted reachability from stars realizing the
                // print with one or two copies per leaf state
                let mut slow = false;
                'outer: for copies in 1..=2usize {
                    let mut leaves = Vec::new();
                    for &q in &pr.leaves {
                        for _ in 0..copies {
                            leaves.push(q);
                        }
                    }
                    for (root, _) in star_restricted_reach(&p, pr.root, &leaves) {
                        if root == target {
                            slow = true;
                            break 'outer;
                        }
                    }
                }
                if slow {
                    assert!(
                        fast,
                        "seed {seed}: oracle covers {} from {} but the VASS says no",
                        p.state_name(target),
                        pr.render(&p)
                    );
                }
                if fast && !slow {
                    // the VASS may need more copies than the oracle tried;
                    // escalate once before declaring a mismatch
                    let mut leaves = Vec::new();
                    for &q in &pr.leaves {
                        for _ in 0..4 {
                            leaves.push(q);
                        }
                    }
                    let confirmed = star_restricted_reach(&p, pr.root, &leaves)
                        .into_iter()
                        .any(|(root, _)| root == target);
                    assert!(
                        confirmed,
                        "seed {seed}: VASS reaches {} from {} but stars with 4 copies do not",
                        p.state_name(target),
                        pr.render(&p)
                    );
                }
            }
        }
    }
}

/// On one-phase protocols both deciders apply: anything coverable over
/// lines is coverable over graphs, never the other way around.
#[test]
fn line_coverability_implies_graph_coverability() {
    use bpcov::line_cover::cover_lines;
    let mut strict = 0;
    for seed in 0..80u64 {
        let mut r = rng(0xAD + seed);
        let p = random_phase_bounded(&mut r, 1, 4, 3, 8);
        for target in p.states() {
            let lines = cover_lines(&p, target).expect("1-PB is within 2 phases");
            let graphs = cover_1pb(&p, target).expect("1-PB");
            if lines.verdict.is_coverable() {
                assert!(
                    graphs.verdict.is_coverable(),
                    "seed {seed}: {} coverable on lines but not on graphs",
                    p.state_name(target)
                );
            }
            if graphs.verdict.is_coverable() && !lines.verdict.is_coverable() {
                strict += 1;
            }
        }
    }
    // the corpus contains targets needing branching beyond a line
    println!("{strict} targets coverable on graphs only");
}

/// A hand-built separation: the target needs three one-shot senders, so
/// no line vertex (two neighbors, each broadcasting at most once) can
/// cover it, while a three-leaf star does.
#[test]
fn star_coverable_target_beyond_lines() {
    use bpcov::line_cover::cover_lines;
    let p = bpcov::protocol::parse_protocol(
        "protocol fanin\nmessages m1 m2 m3\nstates qin a b goal d1 d2 d3\ninit qin\n\
         trans qin ?m1 a\ntrans a ?m2 b\ntrans b ?m3 goal\n\
         trans qin !!m1 d1\ntrans qin !!m2 d2\ntrans qin !!m3 d3\n",
    )
    .unwrap();
    assert_eq!(partition_of(&p).k(), 1);
    let goal = p.state_id("goal").unwrap();
    let lines = cover_lines(&p, goal).unwrap();
    assert!(lines.verdict.is_not_coverable(), "{:?}", lines.verdict);
    // the exhaustive line search agrees with the polynomial procedure
    let oracle = brute_force_cover_family(
        &p,
        goal,
        &TopologyFamily::Lines { max: 6 },
        &SearchOptions::default(),
    );
    assert!(!oracle.is_coverable());
    let graphs = cover_1pb(&p, goal).unwrap();
    assert!(graphs.verdict.is_coverable(), "{:?}", graphs.verdict);
    if let bpcov::semantics::CoverVerdict::Coverable { topology, .. } = &graphs.verdict {
        assert!(topology.num_vertices() >= 4, "needs three leaves");
    }
}
