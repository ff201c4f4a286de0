//! Lifting an execution from a graph to its tree unfolding.
//!
//! Every original step is mirrored by a batch of tree steps: all copies of
//! the acting vertex that are still deep enough to matter act in turn, in
//! lexicographic word order. After mirroring step i of an n-step execution
//! the tree configuration agrees with the graph configuration on all
//! vertices of depth at most n-i, which at the end pins the root to the
//! state reached by the unfolding's root vertex.

use super::unfold::UnfoldingLabel;
use super::{Topology, TreeTopology, VertexId};
use crate::protocol::{Action, Protocol};
use crate::semantics::{apply_step, replay, Execution, ReplayError, Step};
use std::collections::BTreeMap;

/// Lifts a from-scratch execution over `g` onto the tree produced by
/// `unfold_to_tree(g, root, exec.len())`. The result replays on the tree
/// topology; its final configuration labels the tree root with the state
/// the unfolding root reached in the original execution.
pub fn lift_execution(
    p: &Protocol,
    g: &Topology,
    exec: &Execution,
    tree: &TreeTopology,
    labels: &UnfoldingLabel,
) -> Result<Execution, ReplayError> {
    let n = exec.steps.len();
    let topo = tree.topology();

    // copies of each graph vertex, in lexicographic word order
    let mut copies: Vec<Vec<VertexId>> = vec![Vec::new(); g.num_vertices()];
    let mut by_word: Vec<VertexId> = topo.vertices().collect();
    by_word.sort_by(|&a, &b| tree.word(a).cmp(tree.word(b)));
    for tv in by_word {
        copies[labels.get(tv).idx()].push(tv);
    }

    let mut lifted = Execution::from_scratch(p, topo);
    let mut tree_cfg = lifted.initial.clone();
    let mut orig_cfg = exec.initial.clone();

    for (i, step) in exec.steps.iter().enumerate() {
        let h = n - i;
        let t = p.transition(step.transition);
        let msg = match t.action {
            Action::Broadcast(m) => Some(m),
            _ => None,
        };
        for &u in &copies[step.vertex.idx()] {
            if tree.depth(u) > h {
                continue;
            }
            let mut receivers = BTreeMap::new();
            if let Some(m) = msg {
                for &w in topo.neighbors(u) {
                    let state = tree_cfg.get(w);
                    if !p.can_receive(state, m) {
                        continue;
                    }
                    let rt = if tree.depth(w) <= h {
                        // mirror the choice of the receiving graph vertex
                        *step.receivers.get(&labels.get(w)).ok_or_else(|| ReplayError {
                            index: i,
                            reason: format!(
                                "graph vertex {} should receive in the original step",
                                g.vertex_name(labels.get(w))
                            ),
                        })?
                    } else {
                        // too deep to matter; any reception keeps the step legal
                        p.receptions(state, m)[0]
                    };
                    receivers.insert(w, rt);
                }
            }
            let tree_step = Step {
                vertex: u,
                transition: step.transition,
                receivers,
            };
            tree_cfg = apply_step(p, topo, &tree_cfg, &tree_step, lifted.steps.len())?;
            lifted.steps.push(tree_step);
        }
        orig_cfg = apply_step(p, g, &orig_cfg, step, i)?;
        // h-correctness: depth <= n-i-1 vertices agree with the original
        for tv in topo.vertices() {
            if tree.depth(tv) + i < n && tree_cfg.get(tv) != orig_cfg.get(labels.get(tv)) {
                return Err(ReplayError {
                    index: i,
                    reason: format!(
                        "lifted configuration disagrees at tree vertex {}",
                        topo.vertex_name(tv)
                    ),
                });
            }
        }
    }
    debug_assert!(replay(p, topo, &lifted).is_ok());
    Ok(lifted)
}
