//! k-unfolding: annotates states with a phase counter and type so that the
//! result is k-phase-bounded while under-approximating the coverable states
//! of the original protocol.

use super::{Action, Protocol, ProtocolBuilder, StateId};

/// Name of the phase-0 copy of a state.
pub fn unfolded_zero(name: &str) -> String {
    format!("{name}^0")
}

/// Name of the broadcast (`b`) or reception (`r`) copy of a state at phase j.
pub fn unfolded_copy(name: &str, ty: char, j: u32) -> String {
    format!("{name}^{ty},{j}")
}

/// Builds the k-unfolding: states {q^0} ∪ {q^b,j, q^r,j | 1 ≤ j ≤ k} over
/// the same alphabet, with initial state qin^0. Internal transitions stay
/// inside a copy, broadcasts move from reception copies to the next
/// broadcast copy (or stay inside one), receptions move from broadcast
/// copies to the next reception copy (or stay inside one), and receptions
/// remain enabled in the final broadcast phase: a reception never becomes
/// blocked by the phase annotation.
pub fn k_unfold(p: &Protocol, k: u32) -> Protocol {
    assert!(k >= 1, "k_unfold requires k >= 1");
    let mut b = ProtocolBuilder::new(format!("{}_unfold{}", p.name(), k));
    for m in p.messages() {
        b.message(p.message_name(m)).expect("fresh message");
    }
    let zero = |q: StateId| unfolded_zero(p.state_name(q));
    let copy = |q: StateId, ty: char, j: u32| unfolded_copy(p.state_name(q), ty, j);
    for q in p.states() {
        b.state(zero(q)).expect("fresh state");
    }
    for j in 1..=k {
        for q in p.states() {
            b.state(copy(q, 'b', j)).expect("fresh state");
        }
        for q in p.states() {
            b.state(copy(q, 'r', j)).expect("fresh state");
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
    // phase-advancing rules; the r-copy at level 0 is the 0 copy itself
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
    for t in p.transitions() {
        if let Action::Receive(m) = t.action {
            b.receive(copy(t.src, 'b', k), msg(m), copy(t.dst, 'r', k));
        }
    }
    b.build().expect("unfolding of a valid protocol is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::protocol::phase::{infer_phase_partition, PhaseInference};
    use crate::protocol::{parse_protocol, print_protocol, ProtocolBuilder};

    #[test]
    fn fig1_two_unfolding_has_thirty_states() {
        let p = fixtures::fig1_protocol();
        let u = k_unfold(&p, 2);
        assert_eq!(u.num_states(), 30);
        assert_eq!(u.num_messages(), p.num_messages());
        assert_eq!(u.state_name(u.init()), "qin^0");
    }

    #[test]
    fn final_phase_keeps_receptions() {
        // From (q4, ?c, q5) the last rule family yields (q4^b,2, ?c, q5^r,2):
        // even in the final broadcast phase the reception stays enabled.
        let p = fixtures::fig1_protocol();
        let u = k_unfold(&p, 2);
        let src = u.state_id("q4^b,2").unwrap();
        let dst = u.state_id("q5^r,2").unwrap();
        let c = u.message_id("c").unwrap();
        assert!(u
            .transitions()
            .iter()
            .any(|t| t.src == src && t.dst == dst && t.action == Action::Receive(c)));
        // the broadcast-phase copy of q3 can also still reach q5^r,2 via ?a
        let q3b2 = u.state_id("q3^b,2").unwrap();
        let a = u.message_id("a").unwrap();
        assert!(u
            .transitions()
            .iter()
            .any(|t| t.src == q3b2 && t.dst == dst && t.action == Action::Receive(a)));
    }

    #[test]
    fn empty_delta_unfolding() {
        let mut b = ProtocolBuilder::new("e");
        b.state("qin").unwrap();
        b.init("qin");
        let p = b.build().unwrap();
        let u = k_unfold(&p, 3);
        assert_eq!(u.num_states(), 7);
        assert_eq!(u.transitions().len(), 0);
    }

    #[test]
    fn unfolding_is_phase_bounded_within_k() {
        for (p, k) in [
            (fixtures::fig1_protocol(), 1),
            (fixtures::fig1_protocol(), 2),
            (fixtures::fig1_protocol(), 3),
            (fixtures::pbar_protocol(), 1),
            (fixtures::pbar_protocol(), 2),
        ] {
            let u = k_unfold(&p, k);
            match infer_phase_partition(&u) {
                PhaseInference::Bounded(part) => {
                    assert!(part.k() <= k, "{} unfold {}: got k'={}", p.name(), k, part.k())
                }
                PhaseInference::NotPhaseBounded => {
                    panic!("{} unfold {} must be phase-bounded", p.name(), k)
                }
            }
        }
    }

    #[test]
    fn unfolding_round_trips_through_dsl() {
        let u = k_unfold(&fixtures::fig1_protocol(), 2);
        let printed = print_protocol(&u);
        assert_eq!(parse_protocol(&printed).unwrap(), u);
    }
}
