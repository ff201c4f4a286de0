//! Reduction from Minsky-machine halting to coverability, producing a
//! 6-phase-bounded protocol, together with a replayable witness for
//! halting machines.
//!
//! The generated protocol first forces a line structure: the head takes
//! the machine's locations, middle nodes cycle through three position
//! classes 0/1/2 (so each can tell its left neighbor from its right one),
//! and the tail watches for errors. Instructions travel rightwards purely
//! by broadcasts: a node relays the instruction of its class, then
//! acknowledges it leftwards with the instruction's done-marker. One node
//! may execute the instruction, switching the relayed message from its
//! todo form to its done form; the tail only accepts done forms. A wrong
//! guess anywhere sends some node into a dead sink, breaking the final
//! `done` relay chain that covers the target.

use super::{Counter, MinskyConfig, MinskyMachine, MinskyOp};
use crate::protocol::{Action, Protocol, ProtocolBuilder, StateId, TransId};
use crate::semantics::{apply_step, Configuration, Execution, Step};
use crate::topology::{make_line, Topology, VertexId};
use std::collections::BTreeMap;
use thiserror::Error;

/// The instruction messages: raw test, todo-increment/decrement and the
/// already-done forms of the latter two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Test(Counter),
    TodoInc(Counter),
    TodoDec(Counter),
    DoneInc(Counter),
    DoneDec(Counter),
}

pub const OPS: [Op; 10] = [
    Op::Test(Counter::X1),
    Op::TodoInc(Counter::X1),
    Op::TodoDec(Counter::X1),
    Op::DoneInc(Counter::X1),
    Op::DoneDec(Counter::X1),
    Op::Test(Counter::X2),
    Op::TodoInc(Counter::X2),
    Op::TodoDec(Counter::X2),
    Op::DoneInc(Counter::X2),
    Op::DoneDec(Counter::X2),
];

impl Op {
    /// Message name of the instruction at a position class.
    pub fn msg(self, class: u8) -> String {
        let stem = match self {
            Op::Test(c) => format!("test_{}", c.name()),
            Op::TodoInc(c) => format!("ti_{}", c.name()),
            Op::TodoDec(c) => format!("td_{}", c.name()),
            Op::DoneInc(c) => format!("ov_ti_{}", c.name()),
            Op::DoneDec(c) => format!("ov_td_{}", c.name()),
        };
        format!("{stem}_{class}")
    }

    /// Message name of the instruction's done-marker (the acknowledgment a
    /// node broadcasts leftwards after relaying or executing it).
    pub fn marker(self, class: u8) -> String {
        let stem = match self {
            Op::Test(c) => format!("ov_test_{}", c.name()),
            Op::TodoInc(c) => format!("d_ti_{}", c.name()),
            Op::TodoDec(c) => format!("d_td_{}", c.name()),
            Op::DoneInc(c) => format!("ov_di_{}", c.name()),
            Op::DoneDec(c) => format!("ov_dd_{}", c.name()),
        };
        format!("{stem}_{class}")
    }

    /// Short tag used inside state names.
    fn tag(self) -> String {
        match self {
            Op::Test(c) => format!("test_{}", c.name()),
            Op::TodoInc(c) => format!("ti_{}", c.name()),
            Op::TodoDec(c) => format!("td_{}", c.name()),
            Op::DoneInc(c) => format!("ov_ti_{}", c.name()),
            Op::DoneDec(c) => format!("ov_td_{}", c.name()),
        }
    }
}

fn left(class: u8) -> u8 {
    (class + 2) % 3
}

fn right(class: u8) -> u8 {
    (class + 1) % 3
}

/// State names of the generated protocol.
pub struct Names;

impl Names {
    pub fn loc(m: &MinskyMachine, l: super::LocId) -> String {
        format!("loc_{}", m.location_name(l))
    }

    pub fn machine_trans(i: usize) -> String {
        format!("tr_{i}")
    }

    pub fn zero(class: u8) -> String {
        format!("z_{class}")
    }

    pub fn counter_unit(c: Counter, class: u8) -> String {
        format!("c_{}_{class}", c.name())
    }

    pub fn inc_pending(c: Counter, class: u8) -> String {
        format!("qi_{}_{class}", c.name())
    }

    pub fn dec_pending(c: Counter, class: u8) -> String {
        format!("qd_{}_{class}", c.name())
    }

    pub fn relay(op: Op, class: u8) -> String {
        format!("r_{}_{class}", op.tag())
    }

    pub fn relay_holding(c: Counter, op: Op, class: u8) -> String {
        format!("rx_{}_{}_{class}", c.name(), op.tag())
    }

    pub fn tail_relay(op: Op) -> String {
        format!("t_{}", op.tag())
    }

    pub fn frown(phase: u8) -> String {
        format!("frown_{phase}_r")
    }
}

/// All messages of the alphabet, in declaration order.
fn alphabet() -> Vec<String> {
    let mut msgs = vec![
        "done".to_string(),
        "m0".to_string(),
        "m1".to_string(),
        "m2".to_string(),
        "dollar".to_string(),
    ];
    for class in 0..3u8 {
        for op in OPS {
            msgs.push(op.msg(class));
        }
    }
    for class in 0..3u8 {
        for op in OPS {
            msgs.push(op.marker(class));
        }
    }
    msgs
}

fn op_messages(class: u8) -> Vec<String> {
    OPS.iter().map(|op| op.msg(class)).collect()
}

fn marker_messages(class: u8) -> Vec<String> {
    OPS.iter().map(|op| op.marker(class)).collect()
}

/// Generates the reduction protocol for a two-counter machine. The target
/// of the coverability question is the state `qf`.
///
/// The result is 6-phase-bounded; the dead sink is duplicated per
/// reception phase (`frown_1_r` .. `frown_6_r`) so that the partition
/// exists.
pub fn protocol_from_minsky(m: &MinskyMachine) -> Protocol {
    let mut b = ProtocolBuilder::new(format!("{}_protocol", m.name()));
    let sigma = alphabet();
    for msg in &sigma {
        b.message(msg.clone()).expect("alphabet names are unique");
    }

    // states
    b.state("qin").unwrap();
    b.state("hd1").unwrap();
    b.state("hd2").unwrap();
    for class in 0..3u8 {
        b.state(format!("mid1_{class}")).unwrap();
        b.state(format!("mid2_{class}")).unwrap();
        b.state(format!("mid3_{class}")).unwrap();
    }
    b.state("tl1").unwrap();
    b.state("tl2").unwrap();
    b.state("tail").unwrap();
    b.state("qf").unwrap();
    for l in m.locations() {
        b.state(Names::loc(m, l)).unwrap();
    }
    for i in 0..m.transitions().len() {
        b.state(Names::machine_trans(i)).unwrap();
    }
    b.state("doneM").unwrap();
    for class in 0..3u8 {
        b.state(Names::zero(class)).unwrap();
        for c in [Counter::X1, Counter::X2] {
            b.state(Names::inc_pending(c, class)).unwrap();
            b.state(Names::counter_unit(c, class)).unwrap();
            b.state(Names::dec_pending(c, class)).unwrap();
        }
        for op in OPS {
            b.state(Names::relay(op, class)).unwrap();
        }
        for c in [Counter::X1, Counter::X2] {
            for op in OPS {
                if op == Op::Test(c) {
                    continue;
                }
                b.state(Names::relay_holding(c, op, class)).unwrap();
            }
        }
        b.state(format!("d_{class}")).unwrap();
        b.state(format!("dd_{class}")).unwrap();
    }
    for op in [
        Op::DoneInc(Counter::X1),
        Op::DoneDec(Counter::X1),
        Op::Test(Counter::X1),
        Op::DoneInc(Counter::X2),
        Op::DoneDec(Counter::X2),
        Op::Test(Counter::X2),
    ] {
        b.state(Names::tail_relay(op)).unwrap();
    }
    for phase in 1..=6u8 {
        b.state(Names::frown(phase)).unwrap();
    }
    b.init("qin");

    let all_msgs = sigma.clone();
    // receptions into a sink for every message outside the tolerated set
    let frown_all_except =
        |b: &mut ProtocolBuilder, state: &str, tolerated: &[String], sink: &str| {
            for msg in &all_msgs {
                if !tolerated.contains(msg) {
                    b.receive(state, msg.clone(), sink);
                }
            }
        };

    // --- initialization ---
    b.broadcast("qin", "m0", "hd1");
    b.receive("hd1", "m1", "hd2");
    frown_all_except(&mut b, "hd1", &[], "frown_2_r");
    b.broadcast("hd2", "dollar", Names::loc(m, m.init()));
    frown_all_except(&mut b, "hd2", &[], "frown_2_r");
    for class in 0..3u8 {
        b.receive("qin", format!("m{}", left(class)), format!("mid1_{class}"));
        b.broadcast(format!("mid1_{class}"), format!("m{class}"), format!("mid2_{class}"));
        frown_all_except(&mut b, &format!("mid1_{class}"), &[], "frown_1_r");
        b.receive(
            format!("mid2_{class}"),
            format!("m{}", right(class)),
            format!("mid3_{class}"),
        );
        frown_all_except(&mut b, &format!("mid2_{class}"), &[], "frown_3_r");
        b.broadcast(format!("mid3_{class}"), "dollar", Names::zero(class));
        frown_all_except(&mut b, &format!("mid3_{class}"), &["dollar".to_string()], "frown_3_r");
    }
    b.receive("qin", "m1", "tl1");
    b.broadcast("tl1", "m2", "tl2");
    frown_all_except(&mut b, "tl1", &[], "frown_1_r");
    b.receive("tl2", "dollar", "tail");
    frown_all_except(&mut b, "tl2", &[], "frown_3_r");

    // --- machine component (the head) ---
    // tolerated at every location: the class-1 done-markers, plus the
    // dollar handed over at the end of the initialization
    let loc_tolerated: Vec<String> = marker_messages(1)
        .into_iter()
        .chain(["dollar".to_string()])
        .collect();
    for l in m.locations() {
        frown_all_except(&mut b, &Names::loc(m, l), &loc_tolerated, "frown_4_r");
    }
    for (i, t) in m.transitions().iter().enumerate() {
        let (op, fwd) = match t.op {
            MinskyOp::Inc(c) => (Op::TodoInc(c), Op::TodoInc(c)),
            MinskyOp::Dec(c) => (Op::TodoDec(c), Op::TodoDec(c)),
            MinskyOp::Test0(c) => (Op::Test(c), Op::Test(c)),
        };
        let tr = Names::machine_trans(i);
        b.broadcast(Names::loc(m, t.src), op.msg(0), tr.clone());
        b.broadcast(tr.clone(), op.marker(0), Names::loc(m, t.dst));
        let tolerated: Vec<String> = match t.op {
            // a fresh instruction comes back as its todo form or as the
            // already-done form announced by the executing node downstream
            MinskyOp::Inc(c) => vec![fwd.msg(1), Op::DoneInc(c).msg(1)],
            MinskyOp::Dec(c) => vec![fwd.msg(1), Op::DoneDec(c).msg(1)],
            MinskyOp::Test0(_) => vec![fwd.msg(1)],
        };
        frown_all_except(&mut b, &tr, &tolerated, "frown_4_r");
    }
    b.broadcast(Names::loc(m, m.fin()), "done", "doneM");
    for mi in ["m0", "m1", "m2"] {
        b.receive("doneM", mi, "frown_4_r");
    }

    // --- middle component, one copy per position class ---
    for class in 0..3u8 {
        let l = left(class);
        let r = right(class);
        let z = Names::zero(class);
        // idle node: tolerate instructions from the left, markers from the
        // right, the initialization dollar; receive done productively
        let mut z_tol: Vec<String> = op_messages(l);
        z_tol.extend(marker_messages(r));
        z_tol.push("dollar".to_string());
        z_tol.push("done".to_string());
        frown_all_except(&mut b, &z, &z_tol, "frown_5_r");
        b.receive(&z, "done", format!("d_{class}"));

        for c in [Counter::X1, Counter::X2] {
            // execute an increment
            b.broadcast(&z, Op::TodoInc(c).msg(class), Names::inc_pending(c, class));
            b.broadcast(
                Names::inc_pending(c, class),
                Op::DoneInc(c).marker(class),
                Names::counter_unit(c, class),
            );
            frown_all_except(
                &mut b,
                &Names::inc_pending(c, class),
                &[Op::TodoInc(c).marker(l), Op::DoneInc(c).msg(r)],
                "frown_5_r",
            );
            // execute a decrement
            b.broadcast(
                Names::counter_unit(c, class),
                Op::TodoDec(c).msg(class),
                Names::dec_pending(c, class),
            );
            b.broadcast(
                Names::dec_pending(c, class),
                Op::DoneDec(c).marker(class),
                &z,
            );
            frown_all_except(
                &mut b,
                &Names::dec_pending(c, class),
                &[Op::TodoDec(c).marker(l), Op::DoneDec(c).msg(r)],
                "frown_5_r",
            );
            // holding a unit: a test of this counter kills the node
            let unit = Names::counter_unit(c, class);
            let mut unit_tol: Vec<String> = op_messages(l);
            unit_tol.extend(marker_messages(r));
            unit_tol.retain(|msg| *msg != Op::Test(c).msg(l));
            frown_all_except(&mut b, &unit, &unit_tol, "frown_5_r");
        }
        // relays
        for op in OPS {
            b.broadcast(&z, op.msg(class), Names::relay(op, class));
            b.broadcast(Names::relay(op, class), op.marker(class), &z);
            frown_all_except(
                &mut b,
                &Names::relay(op, class),
                &[op.marker(l), op.msg(r)],
                "frown_5_r",
            );
        }
        for c in [Counter::X1, Counter::X2] {
            let unit = Names::counter_unit(c, class);
            for op in OPS {
                if op == Op::Test(c) {
                    continue;
                }
                b.broadcast(&unit, op.msg(class), Names::relay_holding(c, op, class));
                b.broadcast(Names::relay_holding(c, op, class), op.marker(class), &unit);
                frown_all_except(
                    &mut b,
                    &Names::relay_holding(c, op, class),
                    &[op.marker(l), op.msg(r)],
                    "frown_5_r",
                );
            }
        }
        // the done chain
        b.broadcast(format!("d_{class}"), "done", format!("dd_{class}"));
        frown_all_except(&mut b, &format!("d_{class}"), &[], "frown_5_r");
        for mi in ["m0", "m1", "m2"] {
            b.receive(format!("dd_{class}"), mi, "frown_6_r");
        }
    }

    // --- tail component ---
    for c in [Counter::X1, Counter::X2] {
        b.receive("tail", Op::TodoInc(c).msg(1), "frown_3_r");
        b.receive("tail", Op::TodoDec(c).msg(1), "frown_3_r");
        for op in [Op::DoneInc(c), Op::DoneDec(c), Op::Test(c)] {
            b.receive("tail", op.msg(1), Names::tail_relay(op));
            b.receive(Names::tail_relay(op), op.marker(1), "tail");
            frown_all_except(&mut b, &Names::tail_relay(op), &[], "frown_3_r");
        }
    }
    b.receive("tail", "done", "qf");
    for mi in ["m0", "m1", "m2"] {
        b.receive("tail", mi, "frown_3_r");
        b.receive("qf", mi, "frown_3_r");
    }

    b.build().expect("generated protocol is valid")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("the run is not a halting run (must end at the final location with both counters zero)")]
    NotHalting,
    #[error("witness construction produced an illegal step: {0}")]
    Illegal(#[from] crate::semantics::ReplayError),
}

/// Line length parameter: the first integer past the maximal counter sum
/// of the run that is congruent to 1 modulo 3.
pub fn line_parameter(m: &MinskyMachine, run: &[usize]) -> Result<usize, WitnessError> {
    let mut cfg = MinskyConfig {
        loc: m.init(),
        x1: 0,
        x2: 0,
    };
    let mut max_sum = 0u64;
    for (i, &ti) in run.iter().enumerate() {
        cfg = super::minsky_step(m, &cfg, &m.transitions()[ti], i)
            .map_err(|_| WitnessError::NotHalting)?;
        max_sum = max_sum.max(cfg.x1 + cfg.x2);
    }
    if cfg.loc != m.fin() || cfg.x1 != 0 || cfg.x2 != 0 {
        return Err(WitnessError::NotHalting);
    }
    let mut param = max_sum as usize + 1;
    while param % 3 != 1 {
        param += 1;
    }
    Ok(param)
}

/// Builds the canonical covering execution for a halting run: the line has
/// `line_parameter + 2` vertices (head, middles, tail); after the
/// initialization and hand-over phases, each machine step becomes one
/// sweep of instruction relays and acknowledgments, and a final `done`
/// chain brings the tail to `qf`.
pub fn build_halting_witness(
    m: &MinskyMachine,
    p: &Protocol,
    run: &[usize],
) -> Result<(Topology, Execution), WitnessError> {
    let lp = line_parameter(m, run)?;
    let n = lp + 2; // head + lp middles ... head is v0, middles v1..v_lp, tail
    let topo = make_line(n);
    let mut exec = Execution::from_scratch(p, &topo);
    let mut cfg = exec.initial.clone();

    let sid = |name: &str| -> StateId {
        p.state_id(name)
            .unwrap_or_else(|| panic!("state `{name}` exists in the generated protocol"))
    };
    let tid = |src: &str, action: Action, dst: &str| -> TransId {
        let s = sid(src);
        let d = sid(dst);
        TransId(
            p.transitions()
                .iter()
                .position(|t| t.src == s && t.action == action && t.dst == d)
                .unwrap_or_else(|| panic!("transition `{src}` .. `{dst}` exists")) as u32,
        )
    };
    let msg = |name: &str| p.message_id(name).unwrap_or_else(|| panic!("message `{name}`"));
    let bcast = |src: &str, mname: &str, dst: &str| -> (TransId, crate::protocol::MsgId) {
        (tid(src, Action::Broadcast(msg(mname)), dst), msg(mname))
    };

    let class_of = |pos: usize| -> u8 { (pos % 3) as u8 };

    // pushes one broadcast step; receivers are every neighbor that can
    // receive, each resolved through `choice` (falling back to the unique
    // reception when only one exists)
    let push = |exec: &mut Execution,
                    cfg: &mut Configuration,
                    vertex: usize,
                    transition: TransId,
                    message: crate::protocol::MsgId,
                    choice: &dyn Fn(VertexId, StateId) -> Option<TransId>|
     -> Result<(), WitnessError> {
        let v = VertexId(vertex as u32);
        let mut receivers = BTreeMap::new();
        for &u in topo.neighbors(v) {
            let state = cfg.get(u);
            if p.can_receive(state, message) {
                let rt = match choice(u, state) {
                    Some(rt) => rt,
                    None => {
                        let opts = p.receptions(state, message);
                        debug_assert_eq!(opts.len(), 1, "ambiguous reception needs a choice");
                        opts[0]
                    }
                };
                receivers.insert(u, rt);
            }
        }
        let step = Step {
            vertex: v,
            transition,
            receivers,
        };
        *cfg = apply_step(p, &topo, cfg, &step, exec.steps.len())?;
        exec.steps.push(step);
        Ok(())
    };
    let no_choice = |_: VertexId, _: StateId| -> Option<TransId> { None };

    // --- phase A: elect the line ---
    {
        let (t, mm) = bcast("qin", "m0", "hd1");
        // v1 hears m0 = left(1): unique reception into mid1_1
        push(&mut exec, &mut cfg, 0, t, mm, &no_choice)?;
    }
    for i in 1..=lp {
        let class = class_of(i);
        let (t, mm) = bcast(
            &format!("mid1_{class}"),
            &format!("m{class}"),
            &format!("mid2_{class}"),
        );
        // the right neighbor at qin must pick the proper branch of ?m1
        let pick_right = |u: VertexId, state: StateId| -> Option<TransId> {
            if u.idx() != i + 1 || state != sid("qin") {
                return None;
            }
            let target = if i < lp {
                format!("mid1_{}", class_of(i + 1))
            } else {
                "tl1".to_string()
            };
            Some(tid("qin", Action::Receive(mm), &target))
        };
        // the left neighbor consumes the class message productively, but
        // its sink receptions make the choice ambiguous
        let pick = |u: VertexId, state: StateId| -> Option<TransId> {
            if u.idx() + 1 == i {
                if state == sid("hd1") {
                    return Some(tid("hd1", Action::Receive(mm), "hd2"));
                }
                let lcls = class_of(i - 1);
                if state == sid(&format!("mid2_{lcls}")) {
                    return Some(tid(
                        &format!("mid2_{lcls}"),
                        Action::Receive(mm),
                        &format!("mid3_{lcls}"),
                    ));
                }
            }
            pick_right(u, state)
        };
        push(&mut exec, &mut cfg, i, t, mm, &pick)?;
    }
    {
        let (t, mm) = bcast("tl1", "m2", "tl2");
        let pick = |u: VertexId, state: StateId| -> Option<TransId> {
            if u.idx() == lp && state == sid("mid2_1") {
                return Some(tid("mid2_1", Action::Receive(mm), "mid3_1"));
            }
            None
        };
        push(&mut exec, &mut cfg, lp + 1, t, mm, &pick)?;
    }

    // --- phase B: hand over with the dollar ---
    {
        let (t, mm) = bcast("hd2", "dollar", &Names::loc(m, m.init()));
        push(&mut exec, &mut cfg, 0, t, mm, &no_choice)?;
    }
    for i in 1..=lp {
        let class = class_of(i);
        let (t, mm) = bcast(&format!("mid3_{class}"), "dollar", &Names::zero(class));
        let pick = |u: VertexId, state: StateId| -> Option<TransId> {
            if u.idx() == lp + 1 && state == sid("tl2") {
                return Some(tid("tl2", Action::Receive(mm), "tail"));
            }
            None
        };
        push(&mut exec, &mut cfg, i, t, mm, &pick)?;
    }

    // --- phase C: simulate the machine ---
    for &ti in run.iter() {
        let t = m.transitions()[ti];
        // the executing position: for increments the first idle middle
        // strictly left of the last middle, for decrements the first
        // holder of the counter, for tests none
        let executor: Option<usize> = match t.op {
            MinskyOp::Inc(c) => {
                let f = (1..lp)
                    .find(|&i| cfg.get(VertexId(i as u32)) == sid(&Names::zero(class_of(i))))
                    .expect("a free middle node exists below the bound");
                let _ = c;
                Some(f)
            }
            MinskyOp::Dec(c) => Some(
                (1..lp)
                    .find(|&i| {
                        cfg.get(VertexId(i as u32)) == sid(&Names::counter_unit(c, class_of(i)))
                    })
                    .expect("a holder exists when the counter is positive"),
            ),
            MinskyOp::Test0(_) => None,
        };
        let (todo, done) = match t.op {
            MinskyOp::Inc(c) => (Op::TodoInc(c), Op::DoneInc(c)),
            MinskyOp::Dec(c) => (Op::TodoDec(c), Op::DoneDec(c)),
            MinskyOp::Test0(c) => (Op::Test(c), Op::Test(c)),
        };
        // what each position relays: the todo form left of the executor,
        // the done form right of it (tests relay unchanged)
        let op_at = |i: usize| -> Op {
            match executor {
                Some(f) if i > f => done,
                _ => todo,
            }
        };

        // first message of position i (the head is position 0)
        let first = |exec: &mut Execution, cfg: &mut Configuration, i: usize| {
            if i == 0 {
                let (tt, mm) = bcast(&Names::loc(m, t.src), &todo.msg(0), &Names::machine_trans(ti));
                return push(exec, cfg, 0, tt, mm, &no_choice);
            }
            let class = class_of(i);
            let op = op_at(i);
            let cur = cfg.get(VertexId(i as u32));
            let (src_name, dst_name) = if executor == Some(i) {
                match t.op {
                    MinskyOp::Inc(c) => (Names::zero(class), Names::inc_pending(c, class)),
                    MinskyOp::Dec(c) => {
                        (Names::counter_unit(c, class), Names::dec_pending(c, class))
                    }
                    MinskyOp::Test0(_) => unreachable!("tests have no executor"),
                }
            } else if cur == sid(&Names::zero(class)) {
                (Names::zero(class), Names::relay(op, class))
            } else {
                let holder = [Counter::X1, Counter::X2]
                    .into_iter()
                    .find(|&c| cur == sid(&Names::counter_unit(c, class)))
                    .expect("non-idle middles hold a counter unit");
                (
                    Names::counter_unit(holder, class),
                    Names::relay_holding(holder, op, class),
                )
            };
            let (tt, mm) = bcast(&src_name, &op.msg(class), &dst_name);
            let pick = |u: VertexId, state: StateId| -> Option<TransId> {
                // the tail accepts done forms and tests into its relay state
                if u.idx() == lp + 1 && state == sid("tail") {
                    return Some(tid("tail", Action::Receive(mm), &Names::tail_relay(op)));
                }
                None
            };
            push(exec, cfg, i, tt, mm, &pick)
        };
        // acknowledgment of position i
        let ack = |exec: &mut Execution, cfg: &mut Configuration, i: usize| {
            if i == 0 {
                let (tt, mm) = bcast(
                    &Names::machine_trans(ti),
                    &todo.marker(0),
                    &Names::loc(m, t.dst),
                );
                return push(exec, cfg, 0, tt, mm, &no_choice);
            }
            let class = class_of(i);
            let op = op_at(i);
            let cur = cfg.get(VertexId(i as u32));
            let (src_name, dst_name, marker) = if executor == Some(i) {
                match t.op {
                    MinskyOp::Inc(c) => (
                        Names::inc_pending(c, class),
                        Names::counter_unit(c, class),
                        Op::DoneInc(c).marker(class),
                    ),
                    MinskyOp::Dec(c) => (
                        Names::dec_pending(c, class),
                        Names::zero(class),
                        Op::DoneDec(c).marker(class),
                    ),
                    MinskyOp::Test0(_) => unreachable!(),
                }
            } else if cur == sid(&Names::relay(op, class)) {
                (
                    Names::relay(op, class),
                    Names::zero(class),
                    op.marker(class),
                )
            } else {
                let holder = [Counter::X1, Counter::X2]
                    .into_iter()
                    .find(|&c| cur == sid(&Names::relay_holding(c, op, class)))
                    .expect("ack source is a relay state");
                (
                    Names::relay_holding(holder, op, class),
                    Names::counter_unit(holder, class),
                    op.marker(class),
                )
            };
            let (tt, mm) = bcast(&src_name, &marker, &dst_name);
            let pick = |u: VertexId, state: StateId| -> Option<TransId> {
                if u.idx() == lp + 1 && state == sid(&Names::tail_relay(op)) {
                    return Some(tid(
                        &Names::tail_relay(op),
                        Action::Receive(mm),
                        "tail",
                    ));
                }
                None
            };
            push(exec, cfg, i, tt, mm, &pick)
        };

        // interleaving: head, relay 1, head ack, relay 2, ack 1, ...,
        // relay m, ack m-1, ack m
        first(&mut exec, &mut cfg, 0)?;
        first(&mut exec, &mut cfg, 1)?;
        ack(&mut exec, &mut cfg, 0)?;
        for i in 2..=lp {
            first(&mut exec, &mut cfg, i)?;
            ack(&mut exec, &mut cfg, i - 1)?;
        }
        ack(&mut exec, &mut cfg, lp)?;
    }

    // --- phase D: propagate done ---
    {
        let (t, mm) = bcast(&Names::loc(m, m.fin()), "done", "doneM");
        push(&mut exec, &mut cfg, 0, t, mm, &no_choice)?;
    }
    for i in 1..=lp {
        let class = class_of(i);
        let (t, mm) = bcast(&format!("d_{class}"), "done", &format!("dd_{class}"));
        push(&mut exec, &mut cfg, i, t, mm, &no_choice)?;
    }
    debug_assert_eq!(cfg.get(VertexId((lp + 1) as u32)), sid("qf"));
    Ok((topo, exec))
}
