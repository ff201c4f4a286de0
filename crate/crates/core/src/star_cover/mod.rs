//! Coverability for one-phase protocols via the star reduction.
//!
//! For a protocol with at most one phase, a state is coverable over some
//! graph iff it is coverable with a star whose root reaches the target.
//! Executions split into a phase where the root only broadcasts or moves
//! internally — summarized by broadcast prints — and a phase where the
//! root only receives — decided by control-state reachability of a VASS
//! whose counters count leaves per state.

pub mod reduce;
pub mod vass;

use crate::protocol::phase::{infer_phase_partition, PhaseInference, PhasePartition};
use crate::protocol::{Action, Protocol, StateId};
use crate::semantics::{Configuration, CoverVerdict, Execution, Step};
use crate::topology::{make_star, Topology, VertexId};
use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

pub use vass::{
    parse_vass, print_vass, replay_vass_path, vass_control_reach, vass_step, CounterId, Vass,
    VassConfig, VassError, VassOp, VassReach, VassStateId, VassTransition,
};

/// Abstraction of a star configuration whose root is still in
/// Q^b = Q0 ∪ Q1b: the root state plus the set of leaf states inside Q^b.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BroadcastPrint {
    pub root: StateId,
    pub leaves: BTreeSet<StateId>,
}

impl BroadcastPrint {
    pub fn render(&self, p: &Protocol) -> String {
        let leaves: Vec<&str> = self.leaves.iter().map(|&q| p.state_name(q)).collect();
        format!("{}:{{{}}}", p.state_name(self.root), leaves.join(","))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StarCoverError {
    #[error("topology is not a star rooted at its first vertex")]
    NotAStar,
    #[error("protocol is not phase-bounded within 1 phase (k = {0:?})")]
    NotPhaseBoundedWithin1(Option<u32>),
}

/// Checks that the topology is a star (tree of height ≤ 1) rooted at
/// vertex 0 and returns the root. A single vertex counts as a star.
pub fn star_root(topo: &Topology) -> Result<VertexId, StarCoverError> {
    let n = topo.num_vertices();
    let root = VertexId(0);
    if topo.neighbors(root).len() != n - 1 {
        return Err(StarCoverError::NotAStar);
    }
    for v in topo.vertices() {
        if v != root && topo.neighbors(v) != [root] {
            return Err(StarCoverError::NotAStar);
        }
    }
    Ok(root)
}

/// The broadcast print of a star configuration, or `None` when the root
/// has already left Q^b (the configuration is not a b-configuration).
pub fn bprint(
    partition: &PhasePartition,
    topo: &Topology,
    cfg: &Configuration,
) -> Result<Option<BroadcastPrint>, StarCoverError> {
    let root = star_root(topo)?;
    if !partition.in_qb(cfg.get(root)) {
        return Ok(None);
    }
    let leaves = cfg
        .labels()
        .iter()
        .enumerate()
        .filter(|&(i, _)| VertexId(i as u32) != root)
        .map(|(_, &q)| q)
        .filter(|&q| partition.in_qb(q))
        .collect();
    Ok(Some(BroadcastPrint {
        root: cfg.get(root),
        leaves,
    }))
}

/// The print successors of `pr`: either the root acts (internal action, or
/// a broadcast removing every leaf state that can receive the message), or
/// a leaf acts (internal action, or a broadcast the root cannot receive),
/// in which case both the keep-the-source and drop-the-source variants are
/// produced since the print does not count multiplicities.
pub fn print_successors(
    pr: &BroadcastPrint,
    p: &Protocol,
    partition: &PhasePartition,
) -> BTreeSet<BroadcastPrint> {
    let mut out = BTreeSet::new();
    let leaf_move = |out: &mut BTreeSet<BroadcastPrint>, src: StateId, dst: StateId| {
        let mut keep = pr.leaves.clone();
        keep.insert(dst);
        out.insert(BroadcastPrint {
            root: pr.root,
            leaves: keep,
        });
        let mut drop = pr.leaves.clone();
        drop.remove(&src);
        drop.insert(dst);
        out.insert(BroadcastPrint {
            root: pr.root,
            leaves: drop,
        });
    };
    for t in p.transitions() {
        match t.action {
            Action::Internal => {
                if t.src == pr.root {
                    out.insert(BroadcastPrint {
                        root: t.dst,
                        leaves: pr.leaves.clone(),
                    });
                }
                if pr.leaves.contains(&t.src) {
                    leaf_move(&mut out, t.src, t.dst);
                }
            }
            Action::Broadcast(m) => {
                if t.src == pr.root {
                    let leaves = pr
                        .leaves
                        .iter()
                        .copied()
                        .filter(|&q| !p.can_receive(q, m))
                        .collect();
                    out.insert(BroadcastPrint {
                        root: t.dst,
                        leaves,
                    });
                }
                if pr.leaves.contains(&t.src) && !p.can_receive(pr.root, m) {
                    leaf_move(&mut out, t.src, t.dst);
                }
            }
            Action::Receive(_) => {}
        }
    }
    if cfg!(debug_assertions) {
        for s in &out {
            debug_assert!(partition.in_qb(s.root));
            debug_assert!(s.leaves.iter().all(|&q| partition.in_qb(q)));
        }
    }
    out
}

/// The two initial prints: a lone root, and a root with at least one leaf.
pub fn initial_prints(p: &Protocol) -> [BroadcastPrint; 2] {
    [
        BroadcastPrint {
            root: p.init(),
            leaves: BTreeSet::new(),
        },
        BroadcastPrint {
            root: p.init(),
            leaves: [p.init()].into_iter().collect(),
        },
    ]
}

/// Closure of the print-successor relation from the initial prints.
#[derive(Debug, Clone)]
pub struct PrintReach {
    pub prints: BTreeSet<BroadcastPrint>,
    /// False when the budget stopped the closure early.
    pub complete: bool,
}

/// Breadth-first closure of [`print_successors`]; at most
/// |Q^b| · 2^|Q^b| prints exist, `budget` caps the enumeration.
pub fn reachable_prints(p: &Protocol, partition: &PhasePartition, budget: usize) -> PrintReach {
    let mut prints: BTreeSet<BroadcastPrint> = BTreeSet::new();
    let mut queue: VecDeque<BroadcastPrint> = VecDeque::new();
    for pr in initial_prints(p) {
        if prints.insert(pr.clone()) {
            queue.push_back(pr);
        }
    }
    while let Some(pr) = queue.pop_front() {
        for next in print_successors(&pr, p, partition) {
            if prints.len() >= budget && !prints.contains(&next) {
                return PrintReach {
                    prints,
                    complete: false,
                };
            }
            if prints.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    PrintReach {
        prints,
        complete: true,
    }
}

/// Result of [`cover_1pb`]: the verdict plus, on success, the reachable
/// print from which the VASS phase covers the target.
#[derive(Debug, Clone)]
pub struct StarCoverOutcome {
    pub verdict: CoverVerdict,
    pub print: Option<BroadcastPrint>,
}

/// Default budget for the print closure (exponential in the worst case).
pub const PRINT_BUDGET: usize = 1 << 20;

/// Default budget for each backward-coverability run.
pub const VASS_BUDGET: usize = 1 << 20;

/// Decides coverability (over all graphs) for a protocol that is
/// phase-bounded within one phase: enumerate the reachable broadcast
/// prints in order and, for each, decide by VASS control-state
/// reachability whether the root can be driven to the target by leaf
/// broadcasts and internal moves only. The witness is a star execution
/// fragment starting from a configuration realizing the chosen print.
pub fn cover_1pb(p: &Protocol, target: StateId) -> Result<StarCoverOutcome, StarCoverError> {
    let partition = match infer_phase_partition(p) {
        PhaseInference::Bounded(part) if part.k() <= 1 => part,
        PhaseInference::Bounded(part) => {
            return Err(StarCoverError::NotPhaseBoundedWithin1(Some(part.k())))
        }
        PhaseInference::NotPhaseBounded => {
            return Err(StarCoverError::NotPhaseBoundedWithin1(None))
        }
    };
    let reach = reachable_prints(p, &partition, PRINT_BUDGET);
    let mut unknown: Option<String> = None;
    for pr in &reach.prints {
        let (vass, init, goal, tags) = reduce::vass_from_print(p, target, pr);
        match vass_control_reach(&vass, &init, goal, VASS_BUDGET) {
            VassReach::Reachable(path) => {
                let (witness, vertex) = star_witness_from_path(p, target, pr, &path, &tags);
                let leaves = witness.initial.len() - 1;
                return Ok(StarCoverOutcome {
                    verdict: CoverVerdict::Coverable {
                        topology: make_star(leaves).topology().clone(),
                        witness,
                        vertex,
                    },
                    print: Some(pr.clone()),
                });
            }
            VassReach::Unreachable => {}
            VassReach::Unknown(r) => unknown = Some(r),
        }
    }
    if let Some(reason) = unknown {
        return Ok(StarCoverOutcome {
            verdict: CoverVerdict::Unknown { reason },
            print: None,
        });
    }
    if !reach.complete {
        return Ok(StarCoverOutcome {
            verdict: CoverVerdict::Unknown {
                reason: format!("print closure exceeded the budget of {PRINT_BUDGET}"),
            },
            print: None,
        });
    }
    Ok(StarCoverOutcome {
        verdict: CoverVerdict::NotCoverable,
        print: None,
    })
}

/// Turns a VASS witness path into a star execution fragment: the path's
/// initialization phase fixes the leaf multiset, then every simulated move
/// becomes a root internal step or a leaf step (a broadcast possibly
/// received by the root, or an internal move).
fn star_witness_from_path(
    p: &Protocol,
    target: StateId,
    pr: &BroadcastPrint,
    path: &[usize],
    tags: &reduce::VassTags,
) -> (Execution, VertexId) {
    use reduce::StarMove;

    let mut leaf_states: Vec<StateId> = Vec::new();
    let mut at = 0;
    while at < path.len() {
        match tags.moves[path[at]] {
            StarMove::InitLeaf(q) => {
                leaf_states.push(q);
                at += 1;
            }
            StarMove::Start => {
                at += 1;
                break;
            }
            _ => unreachable!("simulation move before the start marker"),
        }
    }
    let star = make_star(leaf_states.len());
    let topo = star.topology().clone();
    let mut labels = vec![pr.root];
    labels.extend(leaf_states.iter().copied());
    let mut exec = Execution::fragment(Configuration::new(labels.clone()));

    while at < path.len() {
        match tags.moves[path[at]] {
            StarMove::RootTau(tid) => {
                exec.steps.push(Step::internal(VertexId(0), tid));
                labels[0] = p.transition(tid).dst;
                at += 1;
            }
            StarMove::LeafBegin { delta, reception } => {
                let src = p.transition(delta).src;
                let leaf = labels[1..]
                    .iter()
                    .position(|&q| q == src)
                    .map(|i| VertexId(i as u32 + 1))
                    .expect("a leaf realizes the decremented counter");
                let mut receivers = std::collections::BTreeMap::new();
                if let Some(rt) = reception {
                    receivers.insert(VertexId(0), rt);
                    labels[0] = p.transition(rt).dst;
                }
                exec.steps.push(Step {
                    vertex: leaf,
                    transition: delta,
                    receivers,
                });
                labels[leaf.idx()] = p.transition(delta).dst;
                debug_assert!(matches!(
                    tags.moves[path[at + 1]],
                    StarMove::LeafEnd
                ));
                at += 2; // skip the paired counter-restoring half
            }
            StarMove::LeafEnd => unreachable!("leaf end without begin"),
            StarMove::InitLeaf(_) | StarMove::Start => {
                unreachable!("initialization move after the start marker")
            }
        }
    }
    let final_cfg = crate::semantics::replay(p, &topo, &exec).expect("star witness replays");
    debug_assert_eq!(final_cfg.get(VertexId(0)), target);
    (exec, VertexId(0))
}
