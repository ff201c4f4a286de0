//! The two reductions between one-phase coverability and VASS
//! control-state reachability.
//!
//! Forward: from a broadcast print, a VASS whose control state tracks the
//! root and whose counters count leaves per Q^b-state decides whether the
//! root can be driven to the target while it only receives.
//!
//! Backward (lower bound): from a VASS, a one-phase protocol whose root
//! plays the control state and whose leaves broadcast counter updates.

use super::vass::{CounterId, Vass, VassConfig, VassOp, VassStateId};
use super::BroadcastPrint;
use crate::protocol::{Action, Protocol, ProtocolBuilder, StateId, TransId};

/// How each VASS transition of [`vass_from_print`] maps back onto a star
/// move, used to turn VASS witness paths into star executions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarMove {
    /// Initialization: add one leaf in the given state.
    InitLeaf(StateId),
    /// Initialization ends; the root takes over.
    Start,
    /// The root performs an internal transition.
    RootTau(TransId),
    /// First half of a leaf move: the leaf takes `delta` (internal or
    /// broadcast); a broadcast may carry the root's reception.
    LeafBegin {
        delta: TransId,
        reception: Option<TransId>,
    },
    /// Second half of a leaf move (counter increment); no star step.
    LeafEnd,
}

#[derive(Debug, Clone)]
pub struct VassTags {
    /// Indexed like the VASS transition list.
    pub moves: Vec<StarMove>,
}

fn fresh_name(v: &Vass, base: String) -> String {
    let mut name = base;
    while v.state_id(&name).is_some() {
        name.push('\'');
    }
    name
}

/// Builds the VASS deciding whether, from some star configuration with
/// print `pr`, the root can reach `target` along steps where it never
/// broadcasts.
///
/// Control states: one per protocol state, one intermediate per
/// (state, transition) pair, plus an initialization state. Every protocol
/// state gets a counter slot, but only Q^b states are ever incremented
/// (initialization pumps the print's leaf states, and for one-phase
/// protocols every countable move stays inside Q^b), so the extra slots
/// stay at zero and the transitions touching them never fire.
///
/// The initial valuation is all-zero; the initialization loop puts the
/// choice of leaf multiplicities on the witness path itself. Because VASS
/// steps are monotone in the valuation, reachability from the all-zero
/// start coincides with reachability from the one-per-leaf-state start.
pub fn vass_from_print(
    p: &Protocol,
    target: StateId,
    pr: &BroadcastPrint,
) -> (Vass, VassConfig, VassStateId, VassTags) {
    let mut v = Vass::new(format!("{}_print", p.name()));
    let mut moves = Vec::new();

    // counters: one per protocol state (Q^b states are the live ones)
    for q in p.states() {
        let name = p.state_name(q).to_string();
        v.add_counter(name).expect("state names are unique");
    }
    let counter = |q: StateId| CounterId(q.0);

    // control states mirroring Q
    for q in p.states() {
        let name = fresh_name(&v, p.state_name(q).to_string());
        v.add_state(name).expect("fresh");
    }
    let control = |q: StateId| VassStateId(q.0);
    // intermediates, one per (root state, transition) pair
    let n = p.num_states() as u32;
    for q in p.states() {
        for (ti, _) in p.transitions().iter().enumerate() {
            let name = fresh_name(&v, format!("{}^d{}", p.state_name(q), ti));
            v.add_state(name).expect("fresh");
        }
    }
    let mid = |q: StateId, ti: usize| {
        VassStateId(n + q.0 * p.transitions().len() as u32 + ti as u32)
    };
    let s_in = {
        let name = fresh_name(&v, "s_in".to_string());
        v.add_state(name).expect("fresh")
    };

    // initialization: pump the leaf states of the print, then hand over
    for &q in &pr.leaves {
        v.add_transition(s_in, VassOp::Inc(counter(q)), s_in);
        moves.push(StarMove::InitLeaf(q));
    }
    v.add_transition(s_in, VassOp::Skip, control(pr.root));
    moves.push(StarMove::Start);

    for (ti, t) in p.transitions().iter().enumerate() {
        let tid = TransId(ti as u32);
        match t.action {
            Action::Internal => {
                // the root moves internally
                v.add_transition(control(t.src), VassOp::Skip, control(t.dst));
                moves.push(StarMove::RootTau(tid));
                // a leaf moves internally, for any root state, provided the
                // leaf is still counted (source in Q^b)
                for q in p.states() {
                    v.add_transition(control(q), VassOp::Dec(counter(t.src)), mid(q, ti));
                    moves.push(StarMove::LeafBegin {
                        delta: tid,
                        reception: None,
                    });
                    v.add_transition(mid(q, ti), VassOp::Inc(counter(t.dst)), control(q));
                    moves.push(StarMove::LeafEnd);
                }
            }
            Action::Broadcast(m) => {
                for q in p.states() {
                    let receptions = p.receptions(q, m);
                    if receptions.is_empty() {
                        // broadcast the root cannot hear
                        v.add_transition(control(q), VassOp::Dec(counter(t.src)), mid(q, ti));
                        moves.push(StarMove::LeafBegin {
                            delta: tid,
                            reception: None,
                        });
                        v.add_transition(mid(q, ti), VassOp::Inc(counter(t.dst)), control(q));
                        moves.push(StarMove::LeafEnd);
                    } else {
                        // the root must take one of its receptions
                        for &rt in receptions {
                            let r = p.transition(rt);
                            v.add_transition(
                                control(q),
                                VassOp::Dec(counter(t.src)),
                                mid(r.dst, ti),
                            );
                            moves.push(StarMove::LeafBegin {
                                delta: tid,
                                reception: Some(rt),
                            });
                            v.add_transition(
                                mid(r.dst, ti),
                                VassOp::Inc(counter(t.dst)),
                                control(r.dst),
                            );
                            moves.push(StarMove::LeafEnd);
                        }
                    }
                }
            }
            Action::Receive(_) => {}
        }
    }

    let init = VassConfig {
        state: s_in,
        valuation: vec![0; v.num_counters()],
    };
    (v, init, control(target), VassTags { moves })
}

/// Builds a one-phase protocol covering the VASS goal state iff the VASS
/// reaches it from the all-zero valuation.
///
/// The root enters the control component by receiving a boot message that
/// a dedicated leaf broadcasts while parking itself as an idle counter
/// node; counter leaves announce increments and decrements by broadcast,
/// and a root that hears an update its control state cannot take falls
/// into an error sink. When the VASS has no counters the construction
/// degenerates to internal transitions only. Control states keep their
/// VASS names (primed on collision with qin/err/counter states), so the
/// goal state of the VASS is the cover target of the protocol.
pub fn protocol_from_vass(v: &Vass, s_in: VassStateId) -> Protocol {
    let mut b = ProtocolBuilder::new(format!("{}_protocol", v.name()));
    let inc_msg = |x: CounterId| format!("inc_{}", v.counter_name(x));
    let dec_msg = |x: CounterId| format!("dec_{}", v.counter_name(x));
    for x in v.counters() {
        b.message(inc_msg(x)).expect("unique counters");
        b.message(dec_msg(x)).expect("unique counters");
    }
    let has_counters = v.num_counters() > 0;
    if has_counters {
        b.message("boot").expect("fresh message");
    }

    let mut used: std::collections::BTreeSet<String> = ["qin", "err"]
        .into_iter()
        .map(String::from)
        .collect();
    let x0 = |x: CounterId| format!("{}_0", v.counter_name(x));
    let x1 = |x: CounterId| format!("{}_1", v.counter_name(x));
    for x in v.counters() {
        used.insert(x0(x));
        used.insert(x1(x));
    }
    // VASS control states keep their names unless they collide
    let mut control: Vec<String> = Vec::new();
    for s in v.states() {
        let mut name = v.state_name(s).to_string();
        while used.contains(&name) {
            name.push('\'');
        }
        used.insert(name.clone());
        control.push(name);
    }

    b.state("qin").expect("fresh");
    b.state("err").expect("fresh");
    for name in &control {
        b.state(name.clone()).expect("names deduplicated above");
    }
    for x in v.counters() {
        b.state(x0(x)).expect("fresh");
        b.state(x1(x)).expect("fresh");
    }
    b.init("qin");

    let sname = |s: VassStateId| control[s.idx()].clone();

    if has_counters {
        // root entry by reception; boot also reaches the error sink, the
        // choice is the root's
        b.receive("qin", "boot", sname(s_in));
        for x in v.counters() {
            b.receive("qin", inc_msg(x), "err");
            b.receive("qin", dec_msg(x), "err");
        }
        b.receive("qin", "boot", "err");
        // counter leaves: enter by broadcasting the first increment, or
        // park as an idle counter node by broadcasting boot
        for x in v.counters() {
            b.broadcast("qin", inc_msg(x), x1(x));
            b.broadcast(x0(x), inc_msg(x), x1(x));
            b.broadcast(x1(x), dec_msg(x), x0(x));
        }
        let first = CounterId(0);
        b.broadcast("qin", "boot", x0(first));
    } else {
        b.internal("qin", sname(s_in));
    }

    // duplicate VASS transitions collapse onto one protocol transition
    let mut emitted: std::collections::BTreeSet<(VassStateId, VassOp, VassStateId)> =
        std::collections::BTreeSet::new();
    for t in v.transitions() {
        if !emitted.insert((t.src, t.op, t.dst)) {
            continue;
        }
        match t.op {
            VassOp::Inc(x) => b.receive(sname(t.src), inc_msg(x), sname(t.dst)),
            VassOp::Dec(x) => b.receive(sname(t.src), dec_msg(x), sname(t.dst)),
            VassOp::Skip => b.internal(sname(t.src), sname(t.dst)),
        };
    }
    // updates a control state cannot take go to the error sink
    for s in v.states() {
        for x in v.counters() {
            if !v
                .transitions()
                .iter()
                .any(|t| t.src == s && t.op == VassOp::Inc(x))
            {
                b.receive(sname(s), inc_msg(x), "err");
            }
            if !v
                .transitions()
                .iter()
                .any(|t| t.src == s && t.op == VassOp::Dec(x))
            {
                b.receive(sname(s), dec_msg(x), "err");
            }
        }
    }
    b.build().expect("generated protocol is valid")
}
