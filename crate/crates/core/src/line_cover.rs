//! Polynomial coverability over line topologies for protocols with at most
//! two phases.
//!
//! The procedure computes a fixpoint S of coverable state pairs
//! (extremity, neighbor) where the extremity never broadcasts, projects it
//! to the frontier set H, and then explores, for every pair of frontier
//! states, the configurations of the fixed five-vertex line that starts
//! with those states at its ends and the initial state in the middle.

use crate::protocol::phase::{infer_phase_partition, PhaseInference, PhaseLabel, PhasePartition};
use crate::protocol::{Action, Protocol, StateId};
use crate::semantics::{for_each_successor, Configuration, CoverVerdict, Execution};
use crate::topology::make_line;
use std::collections::{BTreeSet, HashMap, VecDeque};
use thiserror::Error;

/// The fixpoint S ⊆ Q × Q of coverable extremity pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    pairs: BTreeSet<(StateId, StateId)>,
    rounds: usize,
}

impl PairSet {
    pub fn contains(&self, a: StateId, b: StateId) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of saturation rounds until the fixpoint was reached.
    pub fn rounds(&self) -> usize {
        self.rounds
    }
}

/// Least fixpoint of the five derivation rules over state pairs, starting
/// from {(qin, qin)}:
/// internal moves on either component, a broadcast on the second component
/// received by the first, a broadcast on the second component the first
/// cannot hear, and the reset rule turning a known pair (q, q') into
/// (qin, q).
pub fn compute_s(p: &Protocol) -> PairSet {
    let mut pairs: BTreeSet<(StateId, StateId)> = BTreeSet::new();
    pairs.insert((p.init(), p.init()));
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut added: Vec<(StateId, StateId)> = Vec::new();
        for &(q1, q2) in &pairs {
            for t in p.transitions() {
                match t.action {
                    Action::Internal => {
                        if t.src == q1 && !pairs.contains(&(t.dst, q2)) {
                            added.push((t.dst, q2));
                        }
                        if t.src == q2 && !pairs.contains(&(q1, t.dst)) {
                            added.push((q1, t.dst));
                        }
                    }
                    Action::Broadcast(m) => {
                        if t.src == q2 {
                            // matched: the first component takes a reception
                            for &rt in p.transitions_from(q1) {
                                let r = p.transition(rt);
                                if r.action == Action::Receive(m)
                                    && !pairs.contains(&(r.dst, t.dst))
                                {
                                    added.push((r.dst, t.dst));
                                }
                            }
                            // unmatched: the first component cannot hear m
                            if !p.can_receive(q1, m) && !pairs.contains(&(q1, t.dst)) {
                                added.push((q1, t.dst));
                            }
                        }
                    }
                    Action::Receive(_) => {}
                }
            }
            // reset rule: extend the line with a fresh initial vertex
            if !pairs.contains(&(p.init(), q1)) {
                added.push((p.init(), q1));
            }
        }
        if added.is_empty() {
            break;
        }
        pairs.extend(added);
    }
    PairSet { pairs, rounds }
}

/// H: the states that appear as first component of a pair in S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierSet {
    states: Vec<StateId>,
}

impl FrontierSet {
    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn contains(&self, q: StateId) -> bool {
        self.states.contains(&q)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LineCoverError {
    #[error("protocol is not phase-bounded within 2 phases (k = {0:?})")]
    NotPhaseBoundedWithin2(Option<u32>),
    #[error("frontier invariant violated: state `{0}` is outside Q0 ∪ Q1r")]
    FrontierInvariant(String),
}

/// Projects S to H and asserts H ⊆ Q0 ∪ Q1r; a violation signals a bug in
/// the fixpoint, not bad input.
pub fn compute_h(
    p: &Protocol,
    s: &PairSet,
    partition: &PhasePartition,
) -> Result<FrontierSet, LineCoverError> {
    let mut states: Vec<StateId> = Vec::new();
    for q in p.states() {
        if s.iter().any(|(a, _)| a == q) {
            states.push(q);
        }
    }
    for &q in &states {
        match partition.label(q) {
            PhaseLabel::Zero | PhaseLabel::R(1) => {}
            _ => {
                return Err(LineCoverError::FrontierInvariant(
                    p.state_name(q).to_string(),
                ))
            }
        }
    }
    Ok(FrontierSet { states })
}

/// Reachable configurations of the five-vertex line from C_{q1,q2}
/// (ends at q1 and q2, middle at the initial state); stops as soon as a
/// configuration covers `target`. Returns the covering configuration chain.
fn explore_gamma5(
    p: &Protocol,
    q1: StateId,
    q2: StateId,
    target: StateId,
) -> Option<(Execution, crate::topology::VertexId)> {
    let topo = make_line(5);
    let start = Configuration::new(vec![q1, p.init(), p.init(), p.init(), q2]);
    if let Some(v) = start.find(target) {
        return Some((Execution::fragment(start), v));
    }
    let mut parents: Vec<(Configuration, usize)> = vec![(start.clone(), 0)];
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    index.insert(start, 0);
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    let mut found: Option<usize> = None;
    'bfs: while let Some(at) = queue.pop_front() {
        let cfg = parents[at].0.clone();
        let mut hit = None;
        for_each_successor(p, &topo, &cfg, usize::MAX, &mut |_, succ| {
            if !index.contains_key(succ) {
                let id = parents.len();
                parents.push((succ.clone(), at));
                index.insert(succ.clone(), id);
                if succ.find(target).is_some() {
                    hit = Some(id);
                    return false;
                }
                queue.push_back(id);
            }
            true
        })
        .expect("no cap");
        if let Some(id) = hit {
            found = Some(id);
            break 'bfs;
        }
    }
    let mut at = found?;
    let mut chain = Vec::new();
    loop {
        chain.push(parents[at].0.clone());
        let up = parents[at].1;
        if up == at {
            break;
        }
        at = up;
    }
    chain.reverse();
    // rebuild the steps along the chain
    let mut exec = Execution::fragment(chain[0].clone());
    for window in chain.windows(2) {
        let (cur, next) = (&window[0], &window[1]);
        let mut matched = None;
        for_each_successor(p, &topo, cur, usize::MAX, &mut |step, succ| {
            if succ == next {
                matched = Some(step.clone());
                false
            } else {
                true
            }
        })
        .expect("no cap");
        exec.steps.push(matched.expect("chain step exists"));
    }
    let last = chain.last().unwrap();
    let v = last.find(target).unwrap();
    Some((exec, v))
}

/// Result of [`cover_lines`]: the verdict plus, on success, the frontier
/// pair whose five-vertex exploration covered the target.
#[derive(Debug, Clone)]
pub struct LineCoverOutcome {
    pub verdict: CoverVerdict,
    pub pair: Option<(StateId, StateId)>,
}

/// Decides coverability over line topologies for a protocol that is
/// phase-bounded within two phases. The witness is the five-vertex line
/// fragment starting from the frontier pair, not a from-scratch execution.
pub fn cover_lines(p: &Protocol, target: StateId) -> Result<LineCoverOutcome, LineCoverError> {
    let partition = match infer_phase_partition(p) {
        PhaseInference::Bounded(part) if part.k() <= 2 => part,
        PhaseInference::Bounded(part) => {
            return Err(LineCoverError::NotPhaseBoundedWithin2(Some(part.k())))
        }
        PhaseInference::NotPhaseBounded => {
            return Err(LineCoverError::NotPhaseBoundedWithin2(None))
        }
    };
    let s = compute_s(p);
    let h = compute_h(p, &s, &partition)?;
    for &q1 in h.states() {
        for &q2 in h.states() {
            if let Some((witness, vertex)) = explore_gamma5(p, q1, q2, target) {
                return Ok(LineCoverOutcome {
                    verdict: CoverVerdict::Coverable {
                        topology: make_line(5),
                        witness,
                        vertex,
                    },
                    pair: Some((q1, q2)),
                });
            }
        }
    }
    Ok(LineCoverOutcome {
        verdict: CoverVerdict::NotCoverable,
        pair: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::semantics::replay;

    fn sid(p: &Protocol, n: &str) -> StateId {
        p.state_id(n).unwrap()
    }

    #[test]
    fn s_contains_initial_pair() {
        let p = fixtures::p_prime_protocol();
        let s = compute_s(&p);
        assert!(s.contains(p.init(), p.init()));
    }

    #[test]
    fn s_contains_matched_broadcast_pair() {
        // from (qin,qin): qin broadcasts b to q4 while the extremity
        // receives b into q1
        let p = fixtures::p_prime_protocol();
        let s = compute_s(&p);
        assert!(s.contains(sid(&p, "q1"), sid(&p, "q4")));
    }

    #[test]
    fn empty_delta_fixpoint_is_singleton() {
        use crate::protocol::ProtocolBuilder;
        let mut b = ProtocolBuilder::new("empty");
        b.state("qin").unwrap();
        b.init("qin");
        let p = b.build().unwrap();
        let s = compute_s(&p);
        assert_eq!(s.len(), 1);
        assert!(s.contains(p.init(), p.init()));
    }

    #[test]
    fn fixpoint_terminates_within_q_squared_rounds() {
        let p = fixtures::p_prime_protocol();
        let s = compute_s(&p);
        assert!(s.rounds() <= p.num_states() * p.num_states() + 1);
        assert!(s.len() <= p.num_states() * p.num_states());
    }

    #[test]
    fn h_projection_and_invariant() {
        let p = fixtures::p_prime_protocol();
        let part = infer_phase_partition(&p).partition().unwrap().clone();
        let s = compute_s(&p);
        let h = compute_h(&p, &s, &part).unwrap();
        assert!(h.contains(p.init()));
        assert!(h.contains(sid(&p, "q1")));
        for &q in h.states() {
            assert!(matches!(
                part.label(q),
                PhaseLabel::Zero | PhaseLabel::R(1)
            ));
        }
    }

    #[test]
    fn p_prime_q5_coverable_on_lines() {
        let p = fixtures::p_prime_protocol();
        let out = cover_lines(&p, sid(&p, "q5")).unwrap();
        assert!(out.verdict.is_coverable());
        let (q1, q2) = out.pair.unwrap();
        let CoverVerdict::Coverable {
            witness,
            vertex,
            topology,
        } = out.verdict
        else {
            unreachable!()
        };
        // the witness fragment starts from C_{q1,q2} and replays to the target
        assert_eq!(witness.initial.get(crate::topology::VertexId(0)), q1);
        assert_eq!(witness.initial.get(crate::topology::VertexId(4)), q2);
        let final_cfg = replay(&p, &topology, &witness).unwrap();
        assert_eq!(final_cfg.get(vertex), sid(&p, "q5"));
    }

    #[test]
    fn initial_state_always_coverable() {
        let p = fixtures::p_prime_protocol();
        let out = cover_lines(&p, p.init()).unwrap();
        assert!(out.verdict.is_coverable());
        let CoverVerdict::Coverable { witness, .. } = out.verdict else {
            unreachable!()
        };
        assert!(witness.steps.is_empty());
    }

    #[test]
    fn unreachable_state_not_coverable() {
        use crate::protocol::{parse_protocol, print_protocol};
        // extend P' with a fresh state that has no incoming transition
        let p = fixtures::p_prime_protocol();
        let mut text = print_protocol(&p);
        text = text.replace("states qin q1 q2 q3 q4 q5", "states qin q1 q2 q3 q4 q5 q_dead");
        let p = parse_protocol(&text).unwrap();
        let out = cover_lines(&p, sid(&p, "q_dead")).unwrap();
        assert!(out.verdict.is_not_coverable());
    }

    #[test]
    fn non_phase_bounded_input_rejected() {
        let p = fixtures::fig1_protocol();
        let err = cover_lines(&p, sid(&p, "q5")).unwrap_err();
        assert_eq!(err, LineCoverError::NotPhaseBoundedWithin2(None));
    }
}
