//! Shared helpers for the integration suites: fixture loading, seeded
//! random generators, and the independent reference implementations the
//! properties are checked against.

#![allow(dead_code)]

use bpcov::protocol::phase::{infer_phase_partition, PhaseInference, PhasePartition};
use bpcov::protocol::{parse_protocol, Action, Protocol, ProtocolBuilder, StateId, TransId};
use bpcov::semantics::{Configuration, Execution, Step};
use bpcov::star_cover::{BroadcastPrint, Vass, VassConfig, VassOp, VassStateId};
use bpcov::topology::{Topology, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

pub fn data(name: &str) -> String {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fig1() -> Protocol {
    parse_protocol(&data("fig1.bp")).unwrap()
}

pub fn p_prime() -> Protocol {
    parse_protocol(&data("p_prime.bp")).unwrap()
}

pub fn pbar() -> Protocol {
    parse_protocol(&data("pbar.bp")).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random protocol: up to the given number of states, messages and
/// transitions, drawn uniformly. Most samples are not phase-bounded.
pub fn random_protocol(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_msgs: usize,
    max_trans: usize,
) -> Protocol {
    let n = rng.gen_range(1..=max_states);
    let m = rng.gen_range(1..=max_msgs);
    let t = rng.gen_range(0..=max_trans);
    let mut b = ProtocolBuilder::new("random");
    for i in 0..m {
        b.message(format!("m{i}")).unwrap();
    }
    for i in 0..n {
        b.state(format!("s{i}")).unwrap();
    }
    b.init("s0");
    let mut seen = HashSet::new();
    for _ in 0..t {
        let src = format!("s{}", rng.gen_range(0..n));
        let dst = format!("s{}", rng.gen_range(0..n));
        let kind = rng.gen_range(0..3);
        let msg = format!("m{}", rng.gen_range(0..m));
        let key_msg = if kind == 2 { String::new() } else { msg.clone() };
        if !seen.insert((src.clone(), kind, key_msg, dst.clone())) {
            continue;
        }
        match kind {
            0 => b.broadcast(src, msg, dst),
            1 => b.receive(src, msg, dst),
            _ => b.internal(src, dst),
        };
    }
    b.build().unwrap()
}

/// A random protocol that is phase-bounded with k at most `k_max`:
/// states get classes first, transitions are then drawn among the legal
/// shapes of the definition.
pub fn random_phase_bounded(
    rng: &mut ChaCha8Rng,
    k_max: u32,
    max_states: usize,
    max_msgs: usize,
    max_trans: usize,
) -> Protocol {
    #[derive(Clone, Copy, PartialEq)]
    enum Class {
        Zero,
        B(u32),
        R(u32),
    }
    loop {
        let n = rng.gen_range(2..=max_states);
        let m = rng.gen_range(1..=max_msgs);
        let classes: Vec<Class> = (0..n)
            .map(|i| {
                if i == 0 {
                    Class::Zero
                } else {
                    match rng.gen_range(0..=(2 * k_max)) {
                        0 => Class::Zero,
                        c if c % 2 == 1 => Class::B(c / 2 + 1),
                        c => Class::R(c / 2),
                    }
                }
            })
            .collect();
        let mut b = ProtocolBuilder::new("randpb");
        for i in 0..m {
            b.message(format!("m{i}")).unwrap();
        }
        for i in 0..n {
            b.state(format!("s{i}")).unwrap();
        }
        b.init("s0");
        let mut seen = HashSet::new();
        let mut added = 0;
        for _ in 0..(max_trans * 4) {
            if added >= max_trans {
                break;
            }
            let si = rng.gen_range(0..n);
            let di = rng.gen_range(0..n);
            let (src, dst) = (format!("s{si}"), format!("s{di}"));
            let msg = format!("m{}", rng.gen_range(0..m));
            // legal actions between the two classes
            let mut options: Vec<u8> = Vec::new();
            match (classes[si], classes[di]) {
                (a, b2) if a == b2 => options.push(2), // tau
                _ => {}
            }
            match (classes[si], classes[di]) {
                (Class::B(i), Class::B(j)) if i == j => options.push(0),
                (Class::Zero, Class::B(1)) => options.push(0),
                (Class::R(i), Class::B(j)) if j == i + 1 && j <= k_max => options.push(0),
                _ => {}
            }
            match (classes[si], classes[di]) {
                (Class::R(i), Class::R(j)) if i == j => options.push(1),
                (Class::Zero, Class::R(1)) => options.push(1),
                (Class::B(i), Class::R(j)) if j == i + 1 && j <= k_max => options.push(1),
                (Class::B(i), Class::R(j)) if i == k_max && j == k_max => options.push(1),
                _ => {}
            }
            if options.is_empty() {
                continue;
            }
            let kind = options[rng.gen_range(0..options.len())];
            let key_msg = if kind == 2 { String::new() } else { msg.clone() };
            if !seen.insert((si, kind, key_msg, di)) {
                continue;
            }
            match kind {
                0 => b.broadcast(src, msg, dst),
                1 => b.receive(src, msg, dst),
                _ => b.internal(src, dst),
            };
            added += 1;
        }
        let p = b.build().unwrap();
        if let PhaseInference::Bounded(part) = infer_phase_partition(&p) {
            if part.k() <= k_max {
                return p;
            }
        }
    }
}

pub fn partition_of(p: &Protocol) -> PhasePartition {
    infer_phase_partition(p)
        .partition()
        .expect("protocol is phase-bounded")
        .clone()
}

/// Reference successor enumeration: all (vertex, transition,
/// receiver-choice) tuples filtered by the definition, written as simply
/// as possible and independent of the library's enumerator.
pub fn naive_successors(
    p: &Protocol,
    topo: &Topology,
    cfg: &Configuration,
) -> BTreeSet<Vec<StateId>> {
    let mut out = BTreeSet::new();
    for v in topo.vertices() {
        for (ti, t) in p.transitions().iter().enumerate() {
            if t.src != cfg.get(v) {
                continue;
            }
            match t.action {
                Action::Internal => {
                    let mut labels = cfg.labels().to_vec();
                    labels[v.idx()] = t.dst;
                    out.insert(labels);
                }
                Action::Broadcast(m) => {
                    // enumerate every total choice of receptions over the
                    // receiving neighbors
                    let receivers: Vec<VertexId> = topo
                        .neighbors(v)
                        .iter()
                        .copied()
                        .filter(|&u| {
                            p.transitions().iter().any(|r| {
                                r.src == cfg.get(u) && r.action == Action::Receive(m)
                            })
                        })
                        .collect();
                    let choices: Vec<Vec<TransId>> = receivers
                        .iter()
                        .map(|&u| {
                            p.transitions()
                                .iter()
                                .enumerate()
                                .filter(|(_, r)| {
                                    r.src == cfg.get(u) && r.action == Action::Receive(m)
                                })
                                .map(|(i, _)| TransId(i as u32))
                                .collect()
                        })
                        .collect();
                    let mut combos: Vec<Vec<TransId>> = vec![Vec::new()];
                    for c in &choices {
                        let mut next = Vec::new();
                        for combo in &combos {
                            for &rt in c {
                                let mut e = combo.clone();
                                e.push(rt);
                                next.push(e);
                            }
                        }
                        combos = next;
                    }
                    for combo in combos {
                        let mut labels = cfg.labels().to_vec();
                        labels[v.idx()] = t.dst;
                        for (slot, &u) in receivers.iter().enumerate() {
                            labels[u.idx()] = p.transition(combo[slot]).dst;
                        }
                        out.insert(labels);
                    }
                }
                Action::Receive(_) => {}
            }
            let _ = ti;
        }
    }
    out
}

/// Bounded forward reachability for star configurations under the
/// root-never-broadcasts restriction, collecting every reachable
/// configuration (as root state plus leaf multiset).
fn star_configs_key(root: StateId, leaves: &[StateId]) -> (StateId, Vec<StateId>) {
    let mut l = leaves.to_vec();
    l.sort();
    (root, l)
}

/// All configurations reachable from (root, leaves) on a star where only
/// leaves broadcast or act internally and the root may receive or act
/// internally (the restricted relation of the VASS phase).
pub fn star_restricted_reach(
    p: &Protocol,
    root: StateId,
    leaves: &[StateId],
) -> BTreeSet<(StateId, Vec<StateId>)> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    let start = star_configs_key(root, leaves);
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some((r, ls)) = queue.pop_front() {
        for t in p.transitions() {
            match t.action {
                Action::Internal => {
                    if t.src == r {
                        let key = star_configs_key(t.dst, &ls);
                        if seen.insert(key.clone()) {
                            queue.push_back(key);
                        }
                    }
                    for (i, &l) in ls.iter().enumerate() {
                        if l == t.src {
                            let mut nl = ls.clone();
                            nl[i] = t.dst;
                            let key = star_configs_key(r, &nl);
                            if seen.insert(key.clone()) {
                                queue.push_back(key);
                            }
                        }
                    }
                }
                Action::Broadcast(m) => {
                    for (i, &l) in ls.iter().enumerate() {
                        if l != t.src {
                            continue;
                        }
                        let receptions: Vec<StateId> = p
                            .transitions()
                            .iter()
                            .filter(|x| x.src == r && x.action == Action::Receive(m))
                            .map(|x| x.dst)
                            .collect();
                        let roots: Vec<StateId> = if receptions.is_empty() {
                            vec![r]
                        } else {
                            receptions
                        };
                        for nr in roots {
                            let mut nl = ls.clone();
                            nl[i] = t.dst;
                            let key = star_configs_key(nr, &nl);
                            if seen.insert(key.clone()) {
                                queue.push_back(key);
                            }
                        }
                    }
                }
                Action::Receive(_) => {}
            }
        }
    }
    seen
}

/// Brute-force star reachability (unrestricted): BFS over star
/// configurations with a bounded leaf count, returning every reachable
/// configuration as (root, sorted leaves).
pub fn star_full_reach(
    p: &Protocol,
    leaves: usize,
    max_configs: usize,
) -> BTreeSet<(StateId, Vec<StateId>)> {
    use bpcov::semantics::successors;
    use bpcov::topology::make_star;
    let star = make_star(leaves);
    let topo = star.topology();
    let init = Configuration::initial(p, topo);
    let mut seen: BTreeSet<(StateId, Vec<StateId>)> = BTreeSet::new();
    let mut visited: HashSet<Configuration> = HashSet::new();
    let mut queue = VecDeque::new();
    visited.insert(init.clone());
    seen.insert(star_configs_key(init.get(VertexId(0)), &init.labels()[1..]));
    queue.push_back(init);
    while let Some(cfg) = queue.pop_front() {
        if visited.len() > max_configs {
            panic!("star_full_reach exceeded {max_configs} configurations");
        }
        for (_, next) in successors(p, topo, &cfg) {
            if visited.insert(next.clone()) {
                seen.insert(star_configs_key(next.get(VertexId(0)), &next.labels()[1..]));
                queue.push_back(next);
            }
        }
    }
    seen
}

/// The print-successor relation computed by brute force over concrete
/// stars: for every leaf multiset over the print's leaf set with 1..=cap
/// copies each, take every one-step successor that is a b-configuration
/// again, and collect its print.
pub fn brute_force_print_successors(
    p: &Protocol,
    partition: &PhasePartition,
    pr: &BroadcastPrint,
    cap: usize,
) -> BTreeSet<BroadcastPrint> {
    use bpcov::semantics::successors;
    use bpcov::star_cover::bprint;
    use bpcov::topology::make_star;

    let leaves: Vec<StateId> = pr.leaves.iter().copied().collect();
    let mut out = BTreeSet::new();
    // all multiplicity vectors in {1..cap}^|leaves|
    let mut counts = vec![1usize; leaves.len()];
    loop {
        let mut leaf_states = Vec::new();
        for (i, &q) in leaves.iter().enumerate() {
            for _ in 0..counts[i] {
                leaf_states.push(q);
            }
        }
        let star = make_star(leaf_states.len());
        let topo = star.topology();
        let mut labels = vec![pr.root];
        labels.extend(leaf_states);
        let cfg = Configuration::new(labels);
        debug_assert_eq!(
            bprint(partition, topo, &cfg).unwrap().as_ref(),
            Some(pr),
            "enumerated configuration realizes the print"
        );
        for (_, next) in successors(p, topo, &cfg) {
            if let Some(npr) = bprint(partition, topo, &next).unwrap() {
                out.insert(npr);
            }
        }
        // advance the odometer
        let mut slot = counts.len();
        loop {
            if slot == 0 {
                return out;
            }
            slot -= 1;
            counts[slot] += 1;
            if counts[slot] <= cap {
                break;
            }
            counts[slot] = 1;
            if slot == 0 {
                return out;
            }
        }
    }
}

/// Karp–Miller style forward exploration with ω-acceleration; a second
/// opinion for control-state reachability (exact for the yes/no answer).
pub fn karp_miller_reach(v: &Vass, init: &VassConfig, goal: VassStateId) -> bool {
    const OMEGA: u64 = u64::MAX;
    type Node = (VassStateId, Vec<u64>);
    let mut tree: Vec<(Node, Option<usize>)> = Vec::new();
    let mut work: Vec<usize> = Vec::new();
    tree.push(((init.state, init.valuation.clone()), None));
    work.push(0);
    let mut seen: HashSet<Node> = HashSet::new();
    seen.insert(tree[0].0.clone());
    if init.state == goal {
        return true;
    }
    while let Some(at) = work.pop() {
        let (state, vals) = tree[at].0.clone();
        for t in v.transitions() {
            if t.src != state {
                continue;
            }
            let mut nv = vals.clone();
            match t.op {
                VassOp::Skip => {}
                VassOp::Inc(x) => {
                    if nv[x.idx()] != OMEGA {
                        nv[x.idx()] += 1;
                    }
                }
                VassOp::Dec(x) => {
                    if nv[x.idx()] == 0 {
                        continue;
                    }
                    if nv[x.idx()] != OMEGA {
                        nv[x.idx()] -= 1;
                    }
                }
            }
            // acceleration: if an ancestor is dominated, pump to omega
            let mut cursor = Some(at);
            while let Some(c) = cursor {
                let (cs, cv) = &tree[c].0;
                if *cs == t.dst
                    && cv.iter().zip(&nv).all(|(a, b)| a <= b)
                    && cv.iter().zip(&nv).any(|(a, b)| a < b)
                {
                    for (slot, (a, b)) in cv.iter().zip(nv.clone().iter()).enumerate() {
                        if a < b {
                            nv[slot] = OMEGA;
                        }
                    }
                }
                cursor = tree[c].1;
            }
            if t.dst == goal {
                return true;
            }
            let node = (t.dst, nv);
            if seen.insert(node.clone()) {
                tree.push((node, Some(at)));
                work.push(tree.len() - 1);
            }
        }
    }
    false
}

/// Bounded forward search: exact reachability when every counter stays
/// within `cap`. One-sided: `true` is definitive, `false` only says no
/// path exists within the cap.
pub fn bounded_forward_reach(v: &Vass, init: &VassConfig, goal: VassStateId, cap: u64) -> bool {
    let mut seen: HashSet<(VassStateId, Vec<u64>)> = HashSet::new();
    let mut queue = VecDeque::new();
    let start = (init.state, init.valuation.clone());
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some((s, vals)) = queue.pop_front() {
        if s == goal {
            return true;
        }
        for t in v.transitions() {
            if t.src != s {
                continue;
            }
            let mut nv = vals.clone();
            match t.op {
                VassOp::Skip => {}
                VassOp::Inc(x) => {
                    nv[x.idx()] += 1;
                    if nv[x.idx()] > cap {
                        continue;
                    }
                }
                VassOp::Dec(x) => {
                    if nv[x.idx()] == 0 {
                        continue;
                    }
                    nv[x.idx()] -= 1;
                }
            }
            let node = (t.dst, nv);
            if seen.insert(node.clone()) {
                queue.push_back(node);
            }
        }
    }
    false
}

/// A random VASS with the given number of states and counters.
pub fn random_vass(rng: &mut ChaCha8Rng, max_states: usize, counters: usize, max_trans: usize) -> Vass {
    let n = rng.gen_range(2..=max_states);
    let mut v = Vass::new("random");
    for i in 0..n {
        v.add_state(format!("s{i}")).unwrap();
    }
    for i in 0..counters {
        v.add_counter(format!("x{i}")).unwrap();
    }
    let t = rng.gen_range(1..=max_trans);
    for _ in 0..t {
        let src = VassStateId(rng.gen_range(0..n) as u32);
        let dst = VassStateId(rng.gen_range(0..n) as u32);
        let op = match rng.gen_range(0..3) {
            0 => VassOp::Inc(bpcov::star_cover::CounterId(
                rng.gen_range(0..counters) as u32
            )),
            1 => VassOp::Dec(bpcov::star_cover::CounterId(
                rng.gen_range(0..counters) as u32
            )),
            _ => VassOp::Skip,
        };
        v.add_transition(src, op, dst);
    }
    v
}

/// Per-vertex alternation bound observed along an execution: a broadcast
/// out of the neutral or reception mode opens a new broadcast phase, a
/// reception in broadcast mode opens a new reception phase; the result is
/// the highest phase index any vertex reaches.
pub fn observed_alternation_bound(p: &Protocol, exec: &Execution) -> u32 {
    #[derive(Clone, Copy, PartialEq)]
    enum Mode {
        Neutral,
        B,
        R,
    }
    let n = exec.initial.len();
    let mut phase = vec![0u32; n];
    let mut mode = vec![Mode::Neutral; n];
    let bump_b = |phase: &mut Vec<u32>, mode: &mut Vec<Mode>, v: usize| {
        if mode[v] != Mode::B {
            phase[v] += 1;
            mode[v] = Mode::B;
        }
    };
    let mut max = 0;
    for step in &exec.steps {
        let t = p.transition(step.transition);
        match t.action {
            Action::Internal => {}
            Action::Broadcast(_) => {
                bump_b(&mut phase, &mut mode, step.vertex.idx());
                for &u in step.receivers.keys() {
                    if mode[u.idx()] != Mode::R {
                        phase[u.idx()] += 1;
                        mode[u.idx()] = Mode::R;
                    }
                }
            }
            Action::Receive(_) => unreachable!("steps are internal or broadcasts"),
        }
        max = max.max(*phase.iter().max().unwrap_or(&0));
    }
    max
}

/// The naive k-unfolding that drops the final-phase reception rule; used
/// to reproduce the counterexample showing why that rule is needed.
pub fn naive_unfold(p: &Protocol, k: u32) -> Protocol {
    use bpcov::protocol::unfold::{unfolded_copy, unfolded_zero};
    let mut b = ProtocolBuilder::new(format!("{}_naive{}", p.name(), k));
    for m in p.messages() {
        b.message(p.message_name(m)).unwrap();
    }
    let zero = |q: StateId| unfolded_zero(p.state_name(q));
    let copy = |q: StateId, ty: char, j: u32| unfolded_copy(p.state_name(q), ty, j);
    for q in p.states() {
        b.state(zero(q)).unwrap();
    }
    for j in 1..=k {
        for q in p.states() {
            b.state(copy(q, 'b', j)).unwrap();
        }
        for q in p.states() {
            b.state(copy(q, 'r', j)).unwrap();
        }
    }
    b.init(zero(p.init()));
    let msg = |m| p.message_name(m).to_string();
    for t in p.transitions() {
        if t.action.is_internal() {
            b.internal(zero(t.src), zero(t.dst));
        }
    }
    for j in 1..=k {
        for t in p.transitions() {
            match t.action {
                Action::Internal => {
                    b.internal(copy(t.src, 'r', j), copy(t.dst, 'r', j));
                }
                Action::Receive(m) => {
                    b.receive(copy(t.src, 'r', j), msg(m), copy(t.dst, 'r', j));
                }
                Action::Broadcast(_) => {}
            }
        }
    }
    for j in 1..=k {
        for t in p.transitions() {
            match t.action {
                Action::Internal => {
                    b.internal(copy(t.src, 'b', j), copy(t.dst, 'b', j));
                }
                Action::Broadcast(m) => {
                    b.broadcast(copy(t.src, 'b', j), msg(m), copy(t.dst, 'b', j));
                }
                Action::Receive(_) => {}
            }
        }
    }
    let rcopy = |q: StateId, j: u32| if j == 0 { zero(q) } else { copy(q, 'r', j) };
    let bcopy = |q: StateId, j: u32| if j == 0 { zero(q) } else { copy(q, 'b', j) };
    for j in 0..k {
        for t in p.transitions() {
            if let Action::Broadcast(m) = t.action {
                b.broadcast(rcopy(t.src, j), msg(m), copy(t.dst, 'b', j + 1));
            }
        }
    }
    for j in 0..k {
        for t in p.transitions() {
            if let Action::Receive(m) = t.action {
                b.receive(bcopy(t.src, j), msg(m), copy(t.dst, 'r', j + 1));
            }
        }
    }
    // final-phase receptions deliberately omitted
    b.build().unwrap()
}

/// Hand-built step helper for witness assertions.
pub fn step(
    p: &Protocol,
    topo: &Topology,
    vertex: &str,
    src: &str,
    action: Action,
    dst: &str,
    receivers: &[(&str, &str, &str)],
) -> Step {
    let tid = |s: &str, a: Action, d: &str| -> TransId {
        let si = p.state_id(s).unwrap();
        let di = p.state_id(d).unwrap();
        TransId(
            p.transitions()
                .iter()
                .position(|t| t.src == si && t.action == a && t.dst == di)
                .unwrap() as u32,
        )
    };
    let msg = match action {
        Action::Broadcast(m) => Some(m),
        _ => None,
    };
    let mut recv = BTreeMap::new();
    for (u, s, d) in receivers {
        recv.insert(
            topo.vertex_id(u).unwrap(),
            tid(s, Action::Receive(msg.unwrap()), d),
        );
    }
    Step {
        vertex: topo.vertex_id(vertex).unwrap(),
        transition: tid(src, action, dst),
        receivers: recv,
    }
}
