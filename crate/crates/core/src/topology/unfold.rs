//! Unfolding a graph into a tree of bounded depth.
//!
//! The tree rooted at a chosen vertex v_f mirrors the graph locally: the
//! root's children enumerate the neighbors of v_f, and the children of any
//! deeper vertex enumerate the neighbors of its labeling vertex except the
//! one already used by its parent. Every tree vertex of depth < n therefore
//! sees, through the labeling, exactly the neighborhood of its graph
//! vertex.

use super::{Topology, TreeTopology, VertexId};
use std::collections::HashMap;

/// Map from tree vertices to the graph vertices they mirror.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnfoldingLabel {
    labels: Vec<VertexId>,
}

impl UnfoldingLabel {
    pub fn get(&self, tree_vertex: VertexId) -> VertexId {
        self.labels[tree_vertex.idx()]
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.labels
    }
}

/// Unfolds `g` around `root` into a tree of depth at most `n`.
///
/// Children are ordered by the sorted neighbor order of the graph, so the
/// construction is deterministic.
pub fn unfold_to_tree(g: &Topology, root: VertexId, n: usize) -> (TreeTopology, UnfoldingLabel) {
    assert!(root.idx() < g.num_vertices(), "root vertex in range");
    let mut words: Vec<Vec<u32>> = vec![vec![]];
    let mut labels: Vec<(Vec<u32>, VertexId)> = vec![(vec![], root)];
    // frontier of (word, graph vertex, parent graph vertex)
    let mut frontier: Vec<(Vec<u32>, VertexId, Option<VertexId>)> = vec![(vec![], root, None)];
    for _depth in 0..n {
        let mut next = Vec::new();
        for (word, v, parent) in frontier {
            let mut i = 0u32;
            for &u in g.neighbors(v) {
                if Some(u) == parent {
                    continue;
                }
                i += 1;
                let mut w = word.clone();
                w.push(i);
                words.push(w.clone());
                labels.push((w.clone(), u));
                next.push((w, u, Some(v)));
            }
        }
        frontier = next;
    }
    let tree = TreeTopology::new(words).expect("unfolding is prefix closed");
    let by_word: HashMap<&[u32], VertexId> = labels
        .iter()
        .map(|(w, v)| (w.as_slice(), *v))
        .collect();
    let ordered = tree
        .topology()
        .vertices()
        .map(|tv| by_word[tree.word(tv)])
        .collect();
    (
        tree,
        UnfoldingLabel {
            labels: ordered,
        },
    )
}

/// Checks the local-bijection property: for every tree vertex of depth < n,
/// the labeling restricted to its neighborhood is a bijection onto the
/// neighborhood of its graph vertex.
pub fn check_local_bijection(
    g: &Topology,
    tree: &TreeTopology,
    labels: &UnfoldingLabel,
    n: usize,
) -> bool {
    for tv in tree.topology().vertices() {
        if tree.depth(tv) >= n {
            continue;
        }
        let mut image: Vec<VertexId> = tree
            .topology()
            .neighbors(tv)
            .iter()
            .map(|&u| labels.get(u))
            .collect();
        image.sort_unstable();
        let mut expected: Vec<VertexId> = g.neighbors(labels.get(tv)).to_vec();
        expected.sort_unstable();
        if image != expected {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{make_clique, make_line};

    #[test]
    fn clique3_depth2_unfolds_to_five_vertices() {
        let g = make_clique(3);
        let (tree, labels) = unfold_to_tree(&g, VertexId(0), 2);
        // root with 2 children, each child with the one remaining neighbor
        assert_eq!(tree.topology().num_vertices(), 5);
        assert_eq!(tree.height(), 2);
        assert_eq!(labels.get(tree.root()), VertexId(0));
        assert!(check_local_bijection(&g, &tree, &labels, 2));
    }

    #[test]
    fn clique3_depth3_unfolds_to_seven_vertices() {
        let g = make_clique(3);
        let (tree, labels) = unfold_to_tree(&g, VertexId(0), 3);
        assert_eq!(tree.topology().num_vertices(), 7);
        assert!(check_local_bijection(&g, &tree, &labels, 3));
    }

    #[test]
    fn depth_zero_is_single_vertex() {
        let g = make_line(4);
        let (tree, labels) = unfold_to_tree(&g, VertexId(2), 0);
        assert_eq!(tree.topology().num_vertices(), 1);
        assert_eq!(labels.get(tree.root()), VertexId(2));
    }

    #[test]
    fn line2_unfolding_stops_at_the_other_end() {
        // From v1 the only neighbor is v2, whose only neighbor is the parent
        // again: the unfolding is the two-vertex path regardless of depth.
        let g = make_line(2);
        let (tree, labels) = unfold_to_tree(&g, VertexId(0), 3);
        assert_eq!(tree.topology().num_vertices(), 2);
        assert_eq!(labels.get(VertexId(1)), VertexId(1));
        assert!(check_local_bijection(&g, &tree, &labels, 1));
    }

    #[test]
    fn words_are_prefix_closed_and_bounded() {
        let g = make_clique(4);
        let n = 3;
        let (tree, _) = unfold_to_tree(&g, VertexId(1), n);
        for v in tree.topology().vertices() {
            assert!(tree.depth(v) <= n);
            if let Some(parent) = tree.parent(v) {
                assert_eq!(tree.word(parent), &tree.word(v)[..tree.word(v).len() - 1]);
            }
        }
        // indices stay within 1..=max degree
        for v in tree.topology().vertices() {
            for &x in tree.word(v) {
                assert!(x >= 1 && x as usize <= g.max_degree());
            }
        }
    }
}
