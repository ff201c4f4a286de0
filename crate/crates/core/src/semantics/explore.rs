//! Exhaustive coverability search: breadth-first exploration of the full
//! configuration space of one fixed topology, and a one-sided search over
//! families of topologies.

use super::{
    for_each_successor, for_each_successor_fast, Configuration, CoverVerdict, Execution,
};
use crate::protocol::{Protocol, StateId};
use crate::topology::{make_line, make_star, Topology, TreeTopology, VertexId};
use std::collections::HashMap;
use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Stop expanding configurations at this depth; `None` = unbounded.
    pub depth_bound: Option<usize>,
    /// Give up (verdict Unknown) after this many distinct configurations.
    pub node_budget: usize,
    /// Per-broadcast receiver-choice product cap; exceeding it gives Unknown.
    pub choice_cap: usize,
    /// Canonicalize star configurations by sorting leaf labels. Off by
    /// default; never changes the verdict, only the search size.
    pub star_symmetry: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            depth_bound: None,
            node_budget: 10_000_000,
            choice_cap: 1_000_000,
            star_symmetry: false,
        }
    }
}

impl SearchOptions {
    pub fn with_depth(depth: usize) -> Self {
        SearchOptions {
            depth_bound: Some(depth),
            ..Default::default()
        }
    }
}

/// Is the topology a star with vertex 0 as center (or a single vertex)?
fn star_center(topo: &Topology) -> Option<VertexId> {
    let n = topo.num_vertices();
    if n == 1 {
        return Some(VertexId(0));
    }
    let center = VertexId(0);
    if topo.neighbors(center).len() != n - 1 {
        return None;
    }
    for v in topo.vertices() {
        if v != center && topo.neighbors(v) != [center] {
            return None;
        }
    }
    Some(center)
}

trait ConfigKey: Eq + std::hash::Hash + Clone {
    fn encode(labels: &[StateId], bits: u32) -> Self;
    fn decode(&self, n: usize, bits: u32) -> Vec<StateId>;
}

impl ConfigKey for u64 {
    fn encode(labels: &[StateId], bits: u32) -> u64 {
        let mut k = 0u64;
        for &q in labels {
            k = (k << bits) | q.0 as u64;
        }
        k
    }

    fn decode(&self, n: usize, bits: u32) -> Vec<StateId> {
        let mask = (1u64 << bits) - 1;
        let mut out = vec![StateId(0); n];
        let mut k = *self;
        for slot in (0..n).rev() {
            out[slot] = StateId((k & mask) as u32);
            k >>= bits;
        }
        out
    }
}

impl ConfigKey for Box<[u32]> {
    fn encode(labels: &[StateId], _bits: u32) -> Box<[u32]> {
        labels.iter().map(|q| q.0).collect()
    }

    fn decode(&self, _n: usize, _bits: u32) -> Vec<StateId> {
        self.iter().map(|&x| StateId(x)).collect()
    }
}

struct BfsOutcome {
    /// Chain of configurations from the initial one to a covering one.
    chain: Option<Vec<Vec<StateId>>>,
    exhausted: bool,
    reason: String,
}

fn bfs<K: ConfigKey>(
    p: &Protocol,
    topo: &Topology,
    target: StateId,
    opts: &SearchOptions,
    bits: u32,
    canon: Option<VertexId>,
) -> BfsOutcome {
    let n = topo.num_vertices();
    let canonical = |labels: &mut Vec<StateId>| {
        if let Some(center) = canon {
            debug_assert_eq!(center, VertexId(0));
            labels[1..].sort_unstable();
        }
    };

    let mut initial = vec![p.init(); n];
    canonical(&mut initial);
    if initial.contains(&target) {
        return BfsOutcome {
            chain: Some(vec![initial]),
            exhausted: true,
            reason: String::new(),
        };
    }

    // entries[i] = (config, parent index); the parent of the root is itself
    let mut entries: Vec<(K, u32)> = Vec::new();
    let mut index: HashMap<K, u32> = HashMap::new();
    let root = K::encode(&initial, bits);
    entries.push((root.clone(), 0));
    index.insert(root, 0);
    let mut queue: VecDeque<(u32, u32)> = VecDeque::new(); // (entry idx, depth)
    queue.push_back((0, 0));

    let mut truncated = false;
    let mut reason = String::new();
    let mut found: Option<u32> = None;

    'outer: while let Some((at, depth)) = queue.pop_front() {
        if let Some(bound) = opts.depth_bound {
            if depth as usize >= bound {
                truncated = true;
                if reason.is_empty() {
                    reason = format!("depth bound {bound} reached");
                }
                continue;
            }
        }
        let labels = entries[at as usize].0.decode(n, bits);
        let res = for_each_successor_fast(p, topo, &labels, opts.choice_cap, &mut |succ| {
            let mut succ = succ.to_vec();
            canonical(&mut succ);
            let key = K::encode(&succ, bits);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key.clone()) {
                let id = entries.len() as u32;
                entries.push((key, at));
                e.insert(id);
                if succ.contains(&target) {
                    found = Some(id);
                    return false;
                }
                queue.push_back((id, depth + 1));
            }
            true
        });
        match res {
            Err(blowup) => {
                truncated = true;
                reason = blowup.to_string();
            }
            Ok(false) => break 'outer,
            Ok(true) => {}
        }
        if entries.len() >= opts.node_budget {
            truncated = true;
            reason = format!("node budget {} exhausted", opts.node_budget);
            break;
        }
    }

    match found {
        Some(mut at) => {
            let mut chain = Vec::new();
            loop {
                chain.push(entries[at as usize].0.decode(n, bits));
                let parent = entries[at as usize].1;
                if parent == at {
                    break;
                }
                at = parent;
            }
            chain.reverse();
            BfsOutcome {
                chain: Some(chain),
                exhausted: !truncated,
                reason,
            }
        }
        None => BfsOutcome {
            chain: None,
            exhausted: !truncated,
            reason,
        },
    }
}

/// Reconstructs an execution along a chain of configurations.
///
/// With star canonicalization the stored chain holds canonical forms, so
/// each link is re-resolved against the concrete frontier configuration:
/// the first successor whose canonical form matches the recorded one is
/// taken. Without canonicalization this picks exactly the BFS step.
fn chain_to_execution(
    p: &Protocol,
    topo: &Topology,
    chain: &[Vec<StateId>],
    canon: Option<VertexId>,
    choice_cap: usize,
) -> Execution {
    let canonical = |labels: &[StateId]| -> Vec<StateId> {
        let mut l = labels.to_vec();
        if canon.is_some() {
            l[1..].sort_unstable();
        }
        l
    };
    let mut exec = Execution {
        initial: Configuration::new(chain[0].clone()),
        steps: Vec::new(),
        from_scratch: true,
    };
    let mut current = Configuration::new(chain[0].clone());
    for next_canon in &chain[1..] {
        let mut matched = None;
        for_each_successor(p, topo, &current, choice_cap, &mut |step, succ| {
            if &canonical(succ.labels()) == next_canon {
                matched = Some((step.clone(), succ.clone()));
                false
            } else {
                true
            }
        })
        .expect("choice cap was respected during search");
        let (step, succ) = matched.expect("chain link must be a successor");
        exec.steps.push(step);
        current = succ;
    }
    exec
}

/// Exhaustive breadth-first coverability check on one topology.
///
/// Returns a minimal-length witness on success, `NotCoverable` when the
/// whole (finite) configuration space was exhausted, and `Unknown` when a
/// depth bound, the node budget or the receiver-choice cap truncated the
/// search.
pub fn brute_force_cover(
    p: &Protocol,
    target: StateId,
    topo: &Topology,
    opts: &SearchOptions,
) -> CoverVerdict {
    let canon = if opts.star_symmetry {
        star_center(topo)
    } else {
        None
    };
    let bits = (usize::BITS - (p.num_states().max(2) - 1).leading_zeros()).max(1);
    let fits64 = (bits as usize) * topo.num_vertices() <= 64;
    let outcome = if fits64 {
        bfs::<u64>(p, topo, target, opts, bits, canon)
    } else {
        bfs::<Box<[u32]>>(p, topo, target, opts, bits, canon)
    };
    match outcome.chain {
        Some(chain) => {
            let exec = chain_to_execution(p, topo, &chain, canon, opts.choice_cap);
            let final_cfg = super::replay(p, topo, &exec).expect("reconstructed witness replays");
            let vertex = final_cfg.find(target).expect("witness covers the target");
            CoverVerdict::Coverable {
                topology: topo.clone(),
                witness: exec,
                vertex,
            }
        }
        None if outcome.exhausted => CoverVerdict::NotCoverable,
        None => CoverVerdict::Unknown {
            reason: outcome.reason,
        },
    }
}

/// Families of topologies for the one-sided coverability search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyFamily {
    /// Lines with 1..=max vertices.
    Lines { max: usize },
    /// Stars with 1..=max leaves.
    Stars { max: usize },
    /// Trees with bounded height, degree and node count.
    Trees {
        max_height: usize,
        max_degree: usize,
        max_nodes: usize,
    },
}

impl TopologyFamily {
    /// Deterministic enumeration of the family's topologies.
    pub fn topologies(&self) -> Vec<Topology> {
        match *self {
            TopologyFamily::Lines { max } => (1..=max).map(make_line).collect(),
            TopologyFamily::Stars { max } => (1..=max)
                .map(|n| make_star(n).topology().clone())
                .collect(),
            TopologyFamily::Trees {
                max_height,
                max_degree,
                max_nodes,
            } => {
                let shapes = tree_shapes(max_height, max_degree, max_nodes);
                shapes
                    .into_iter()
                    .map(|words| {
                        TreeTopology::new(words)
                            .expect("generated shapes are prefix closed")
                            .topology()
                            .clone()
                    })
                    .collect()
            }
        }
    }
}

/// Canonical tree shapes as word sets, ordered by node count and shape.
/// Canonical means the ordered children of each vertex enumerate a
/// non-decreasing sequence of subtree shapes, so no two listed trees are
/// isomorphic.
fn tree_shapes(max_height: usize, max_degree: usize, max_nodes: usize) -> Vec<Vec<Vec<u32>>> {
    // by_height[h] = all canonical shapes of height <= h within the bounds
    let mut by_height: Vec<Vec<Vec<Vec<u32>>>> = Vec::new();
    // height 0: single vertex
    by_height.push(vec![vec![vec![]]]);
    for h in 1..=max_height {
        let pool = &by_height[h - 1];
        let mut shapes: Vec<Vec<Vec<u32>>> = Vec::new();
        // choose a multiset of child shapes from `pool` (size <= degree bound)
        fn pick(
            pool: &[Vec<Vec<u32>>],
            from: usize,
            children_left: usize,
            nodes_left: usize,
            acc: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            out.push(acc.clone());
            if children_left == 0 {
                return;
            }
            for i in from..pool.len() {
                let sz = pool[i].len();
                if sz <= nodes_left {
                    acc.push(i);
                    pick(pool, i, children_left - 1, nodes_left - sz, acc, out);
                    acc.pop();
                }
            }
        }
        let mut combos = Vec::new();
        // the root has `max_degree` child slots; inner vertices use one slot
        // for their parent, which the recursive generation already accounts
        // for because children of children come from `pool` built the same way
        pick(
            pool,
            0,
            max_degree,
            max_nodes.saturating_sub(1),
            &mut Vec::new(),
            &mut combos,
        );
        for combo in combos {
            let mut words: Vec<Vec<u32>> = vec![vec![]];
            for (ci, &pi) in combo.iter().enumerate() {
                for w in &pool[pi] {
                    let mut nw = vec![ci as u32 + 1];
                    nw.extend_from_slice(w);
                    words.push(nw);
                }
            }
            if words.len() <= max_nodes {
                shapes.push(words);
            }
        }
        by_height.push(shapes);
    }
    let mut all: Vec<Vec<Vec<u32>>> = by_height.pop().unwrap_or_default();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all.dedup();
    all
}

/// One-sided coverability over a family: `Coverable` as soon as one member
/// covers, otherwise `Unknown` (a family never certifies non-coverability).
pub fn brute_force_cover_family(
    p: &Protocol,
    target: StateId,
    family: &TopologyFamily,
    opts: &SearchOptions,
) -> CoverVerdict {
    for topo in family.topologies() {
        match brute_force_cover(p, target, &topo, opts) {
            v @ CoverVerdict::Coverable { .. } => return v,
            CoverVerdict::NotCoverable | CoverVerdict::Unknown { .. } => {}
        }
    }
    CoverVerdict::Unknown {
        reason: "no topology in the family covers within the explored bounds".into(),
    }
}
