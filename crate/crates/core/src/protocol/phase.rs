//! Phase partitions and the phase-boundedness check.
//!
//! A protocol is k-phase-bounded when its states split into classes
//! Q0, Q1b, Q1r, ..., Qkb, Qkr (with Q0 doubling as Q0b and Q0r) such that
//! every transition falls into one of six shapes: tau inside a class,
//! broadcasts inside a b-class, receptions inside an r-class, receptions
//! from Qib into Q(i+1)r, broadcasts from Qir into Q(i+1)b, and receptions
//! inside the final broadcast class Qkb into Qkr.
//!
//! Inference runs a deterministic forward label propagation for each
//! candidate k = 0, 1, ..., |Q|+1 and returns the first k that admits a
//! consistent labeling. States not reached by propagation from the initial
//! state are labeled component by component, trying each class in a fixed
//! order and keeping the first consistent choice.

use super::{Action, Protocol, StateId};
use std::fmt;

/// Class of a state inside a phase partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseLabel {
    Zero,
    /// Broadcast phase i, 1-based.
    B(u32),
    /// Reception phase i, 1-based.
    R(u32),
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseLabel::Zero => write!(f, "Q0"),
            PhaseLabel::B(i) => write!(f, "Q{i}b"),
            PhaseLabel::R(i) => write!(f, "Q{i}r"),
        }
    }
}

/// Assignment of every state to a class of a k-phase partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePartition {
    k: u32,
    labels: Vec<PhaseLabel>,
}

impl PhasePartition {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn label(&self, q: StateId) -> PhaseLabel {
        self.labels[q.idx()]
    }

    pub fn labels(&self) -> &[PhaseLabel] {
        &self.labels
    }

    /// States in Q0 or Q1b, the set written Q^b in the star constructions.
    pub fn in_qb(&self, q: StateId) -> bool {
        matches!(self.label(q), PhaseLabel::Zero | PhaseLabel::B(1))
    }
}

/// Outcome of [`infer_phase_partition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhaseInference {
    Bounded(PhasePartition),
    NotPhaseBounded,
}

impl PhaseInference {
    pub fn partition(&self) -> Option<&PhasePartition> {
        match self {
            PhaseInference::Bounded(p) => Some(p),
            PhaseInference::NotPhaseBounded => None,
        }
    }
}

/// Label forced on the target of a transition by the label of its source,
/// for a candidate bound `k`. `None` means the transition cannot exist in
/// any k-phase partition extending the source label.
fn forced(label: PhaseLabel, action: Action, k: u32) -> Option<PhaseLabel> {
    use PhaseLabel::*;
    match action {
        Action::Internal => Some(label),
        Action::Broadcast(_) => match label {
            Zero => (k >= 1).then_some(B(1)),
            R(i) => (i < k).then_some(B(i + 1)),
            B(i) => Some(B(i)),
        },
        Action::Receive(_) => match label {
            Zero => (k >= 1).then_some(R(1)),
            R(i) => Some(R(i)),
            B(i) => {
                if i < k {
                    Some(R(i + 1))
                } else {
                    Some(R(k))
                }
            }
        },
    }
}

/// Propagates labels forward from every already-labeled state; fails on a
/// conflicting assignment. Newly labeled states are pushed onto `work`.
fn propagate(
    p: &Protocol,
    k: u32,
    labels: &mut [Option<PhaseLabel>],
    mut work: Vec<StateId>,
) -> bool {
    while let Some(q) = work.pop() {
        let lq = labels[q.idx()].expect("worklist states are labeled");
        for &tid in p.transitions_from(q) {
            let t = p.transition(tid);
            let Some(ld) = forced(lq, t.action, k) else {
                return false;
            };
            match labels[t.dst.idx()] {
                None => {
                    labels[t.dst.idx()] = Some(ld);
                    work.push(t.dst);
                }
                Some(existing) if existing == ld => {}
                Some(_) => return false,
            }
        }
    }
    true
}

fn candidate_labels(k: u32) -> impl Iterator<Item = PhaseLabel> {
    std::iter::once(PhaseLabel::Zero)
        .chain((1..=k).flat_map(|i| [PhaseLabel::B(i), PhaseLabel::R(i)]))
}

/// Work cap for labeling the states propagation cannot reach; candidates
/// whose free part would need more search than this are rejected.
const FREE_SEARCH_BUDGET: usize = 1 << 20;

/// Labels the states not reached by the forced propagation: chronological
/// backtracking over the unlabeled states in declaration order, trying the
/// classes in a fixed order and propagating each choice forward. Finds the
/// lexicographically least satisfying assignment, if one exists within the
/// budget.
fn solve_free(
    p: &Protocol,
    k: u32,
    labels: &mut Vec<Option<PhaseLabel>>,
    budget: &mut usize,
) -> bool {
    let Some(idx) = labels.iter().position(|l| l.is_none()) else {
        return true;
    };
    for base in candidate_labels(k) {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let mut scratch = labels.clone();
        scratch[idx] = Some(base);
        if propagate(p, k, &mut scratch, vec![StateId(idx as u32)])
            && solve_free(p, k, &mut scratch, budget)
        {
            *labels = scratch;
            return true;
        }
    }
    false
}

fn try_candidate(p: &Protocol, k: u32) -> Option<PhasePartition> {
    let mut labels: Vec<Option<PhaseLabel>> = vec![None; p.num_states()];
    labels[p.init().idx()] = Some(PhaseLabel::Zero);
    if !propagate(p, k, &mut labels, vec![p.init()]) {
        return None;
    }
    let mut budget = FREE_SEARCH_BUDGET;
    if !solve_free(p, k, &mut labels, &mut budget) {
        return None;
    }
    let labels: Vec<PhaseLabel> = labels.into_iter().map(|l| l.unwrap()).collect();
    let partition = PhasePartition { k, labels };
    debug_assert!(check_partition(p, &partition).is_ok());
    Some(partition)
}

/// Decides phase-boundedness, returning a partition with the smallest k
/// accepted by the propagation procedure, or `NotPhaseBounded` when no
/// k ≤ |Q|+1 admits a consistent labeling.
pub fn infer_phase_partition(p: &Protocol) -> PhaseInference {
    for k in 0..=(p.num_states() as u32 + 1) {
        if let Some(partition) = try_candidate(p, k) {
            return PhaseInference::Bounded(partition);
        }
    }
    PhaseInference::NotPhaseBounded
}

/// Which of the six definitional clauses a transition satisfies under a
/// partition. Returns the 1-based clause indices; a valid partition yields
/// exactly one per transition.
pub fn satisfied_clauses(
    partition: &PhasePartition,
    src: PhaseLabel,
    action: Action,
    dst: PhaseLabel,
) -> Vec<u8> {
    use PhaseLabel::*;
    let k = partition.k;
    let mut out = Vec::new();
    match action {
        Action::Internal => {
            // clause 1: same class (Q0 counting as both Q0b and Q0r)
            if src == dst {
                out.push(1);
            }
        }
        Action::Broadcast(_) => {
            // clause 2: inside Qib, 1 <= i <= k
            if let (B(i), B(j)) = (src, dst) {
                if i == j && i >= 1 {
                    out.push(2);
                }
            }
            // clause 5: Qir -> Q(i+1)b, 0 <= i < k (Q0 = Q0r)
            let src_r = match src {
                Zero => Some(0),
                R(i) => Some(i),
                B(_) => None,
            };
            if let (Some(i), B(j)) = (src_r, dst) {
                if i < k && j == i + 1 {
                    out.push(5);
                }
            }
        }
        Action::Receive(_) => {
            // clause 3: inside Qir, 1 <= i <= k
            if let (R(i), R(j)) = (src, dst) {
                if i == j && i >= 1 {
                    out.push(3);
                }
            }
            let src_b = match src {
                Zero => Some(0),
                B(i) => Some(i),
                R(_) => None,
            };
            // clause 4: Qib -> Q(i+1)r, 0 <= i < k (Q0 = Q0b)
            if let (Some(i), R(j)) = (src_b, dst) {
                if i < k && j == i + 1 {
                    out.push(4);
                }
            }
            // clause 6: Qkb -> Qkr (with Q0 = Q0b = Q0r when k = 0)
            let dst_r = match dst {
                Zero => Some(0),
                R(i) => Some(i),
                B(_) => None,
            };
            if src_b == Some(k) && dst_r == Some(k) {
                out.push(6);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("initial state is not in Q0")]
    InitNotZero,
    #[error("transition `{0}` satisfies no clause of the definition")]
    NoClause(String),
}

/// Checks that a partition witnesses k-phase-boundedness: the initial state
/// is in Q0 and every transition satisfies one of the six clauses.
pub fn check_partition(p: &Protocol, partition: &PhasePartition) -> Result<(), PartitionError> {
    if partition.label(p.init()) != PhaseLabel::Zero {
        return Err(PartitionError::InitNotZero);
    }
    for t in p.transitions() {
        let clauses = satisfied_clauses(
            partition,
            partition.label(t.src),
            t.action,
            partition.label(t.dst),
        );
        if clauses.is_empty() {
            return Err(PartitionError::NoClause(p.display_transition(*t)));
        }
    }
    Ok(())
}
