//! Operational semantics of broadcast networks: configurations, steps,
//! executions, the successor relation and the replay validator.
//!
//! A step is either an internal move of one vertex or a broadcast: the
//! sender takes its transition and every neighbor that can receive the
//! message must take one of its reception transitions (the choice among
//! several is part of the step); neighbors that cannot receive it and all
//! non-neighbors are unchanged.

pub mod explore;
pub mod trace;

use crate::protocol::{Action, Protocol, StateId, TransId};
use crate::topology::{Topology, VertexId};
use std::collections::BTreeMap;
use thiserror::Error;

/// A labeling of every vertex of some topology by a protocol state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    labels: Box<[StateId]>,
}

impl Configuration {
    pub fn new(labels: Vec<StateId>) -> Configuration {
        Configuration {
            labels: labels.into_boxed_slice(),
        }
    }

    /// Every vertex in the protocol's initial state.
    pub fn initial(p: &Protocol, topo: &Topology) -> Configuration {
        Configuration::new(vec![p.init(); topo.num_vertices()])
    }

    pub fn get(&self, v: VertexId) -> StateId {
        self.labels[v.idx()]
    }

    pub fn labels(&self) -> &[StateId] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// First vertex labeled `q`, in vertex order.
    pub fn find(&self, q: StateId) -> Option<VertexId> {
        self.labels
            .iter()
            .position(|&l| l == q)
            .map(|i| VertexId(i as u32))
    }

    pub fn render(&self, p: &Protocol, topo: &Topology) -> String {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                format!(
                    "{}={}",
                    topo.vertex_name(VertexId(i as u32)),
                    p.state_name(q)
                )
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// One move of the network: the acting vertex, its transition, and for a
/// broadcast the reception transition chosen by each receiving neighbor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub vertex: VertexId,
    pub transition: TransId,
    pub receivers: BTreeMap<VertexId, TransId>,
}

impl Step {
    pub fn internal(vertex: VertexId, transition: TransId) -> Step {
        Step {
            vertex,
            transition,
            receivers: BTreeMap::new(),
        }
    }
}

/// A finite execution: an initial configuration plus the steps taken.
/// `from_scratch` records that the initial configuration labels every
/// vertex with the protocol's initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub initial: Configuration,
    pub steps: Vec<Step>,
    pub from_scratch: bool,
}

impl Execution {
    pub fn from_scratch(p: &Protocol, topo: &Topology) -> Execution {
        Execution {
            initial: Configuration::initial(p, topo),
            steps: Vec::new(),
            from_scratch: true,
        }
    }

    pub fn fragment(initial: Configuration) -> Execution {
        Execution {
            initial,
            steps: Vec::new(),
            from_scratch: false,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("illegal step at index {index}: {reason}")]
pub struct ReplayError {
    pub index: usize,
    pub reason: String,
}

fn step_error(index: usize, reason: impl Into<String>) -> ReplayError {
    ReplayError {
        index,
        reason: reason.into(),
    }
}

/// Applies one step to a configuration, checking every side condition of
/// the transition relation.
pub fn apply_step(
    p: &Protocol,
    topo: &Topology,
    cfg: &Configuration,
    step: &Step,
    index: usize,
) -> Result<Configuration, ReplayError> {
    if step.vertex.idx() >= cfg.len() {
        return Err(step_error(index, "vertex out of range"));
    }
    if step.transition.idx() >= p.transitions().len() {
        return Err(step_error(index, "transition out of range"));
    }
    let t = p.transition(step.transition);
    if cfg.get(step.vertex) != t.src {
        return Err(step_error(
            index,
            format!(
                "vertex {} is at {}, transition starts at {}",
                topo.vertex_name(step.vertex),
                p.state_name(cfg.get(step.vertex)),
                p.state_name(t.src)
            ),
        ));
    }
    let mut labels = cfg.labels.to_vec();
    match t.action {
        Action::Internal => {
            if !step.receivers.is_empty() {
                return Err(step_error(index, "internal step cannot have receivers"));
            }
            labels[step.vertex.idx()] = t.dst;
        }
        Action::Receive(_) => {
            return Err(step_error(
                index,
                "a reception cannot be scheduled on its own; it is part of a broadcast step",
            ));
        }
        Action::Broadcast(m) => {
            labels[step.vertex.idx()] = t.dst;
            for (&u, &rt) in &step.receivers {
                if !topo.are_neighbors(step.vertex, u) {
                    return Err(step_error(
                        index,
                        format!("receiver {} is not a neighbor", topo.vertex_name(u)),
                    ));
                }
                let r = p.transition(rt);
                if r.src != cfg.get(u) || r.action != Action::Receive(m) {
                    return Err(step_error(
                        index,
                        format!(
                            "receiver {} cannot take `{}`",
                            topo.vertex_name(u),
                            p.display_transition(r)
                        ),
                    ));
                }
                labels[u.idx()] = r.dst;
            }
            for &u in topo.neighbors(step.vertex) {
                if p.can_receive(cfg.get(u), m) && !step.receivers.contains_key(&u) {
                    return Err(step_error(
                        index,
                        format!(
                            "neighbor {} can receive {} and must take a reception",
                            topo.vertex_name(u),
                            p.message_name(m)
                        ),
                    ));
                }
            }
        }
    }
    Ok(Configuration::new(labels))
}

/// Replays an execution, validating every step; returns the final
/// configuration.
pub fn replay(
    p: &Protocol,
    topo: &Topology,
    exec: &Execution,
) -> Result<Configuration, ReplayError> {
    if exec.initial.len() != topo.num_vertices() {
        return Err(step_error(0, "initial configuration has wrong arity"));
    }
    if exec.from_scratch && exec.initial.labels().iter().any(|&q| q != p.init()) {
        return Err(step_error(
            0,
            "execution is flagged from-scratch but does not start all-initial",
        ));
    }
    let mut cfg = exec.initial.clone();
    for (i, step) in exec.steps.iter().enumerate() {
        cfg = apply_step(p, topo, &cfg, step, i)?;
    }
    Ok(cfg)
}

/// All →-successors of a configuration, each with the step producing it.
///
/// Enumeration order is deterministic: vertices in topology order,
/// transitions in declaration order, and for broadcasts the cartesian
/// product of reception choices with receiving neighbors in sorted order.
pub fn successors(
    p: &Protocol,
    topo: &Topology,
    cfg: &Configuration,
) -> Vec<(Step, Configuration)> {
    let mut out = Vec::new();
    for_each_successor(p, topo, cfg, usize::MAX, &mut |step, next| {
        out.push((step.clone(), next.clone()));
        true
    })
    .expect("no cap");
    out
}

/// Error raised when one broadcast admits more receiver-choice
/// combinations than the configured cap.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("receiver-choice product of a single step exceeds the cap of {cap}")]
pub struct ChoiceBlowup {
    pub cap: usize,
}

/// Visits every successor; the visitor returns `false` to stop early.
/// Per-broadcast receiver-choice products larger than `cap` abort with
/// [`ChoiceBlowup`] rather than silently truncating.
pub fn for_each_successor(
    p: &Protocol,
    topo: &Topology,
    cfg: &Configuration,
    cap: usize,
    visit: &mut dyn FnMut(&Step, &Configuration) -> bool,
) -> Result<bool, ChoiceBlowup> {
    for v in topo.vertices() {
        let q = cfg.get(v);
        for &tid in p.transitions_from(q) {
            let t = p.transition(tid);
            match t.action {
                Action::Receive(_) => {}
                Action::Internal => {
                    let mut labels = cfg.labels.to_vec();
                    labels[v.idx()] = t.dst;
                    let step = Step::internal(v, tid);
                    if !visit(&step, &Configuration::new(labels)) {
                        return Ok(false);
                    }
                }
                Action::Broadcast(m) => {
                    let receivers: Vec<(VertexId, &[TransId])> = topo
                        .neighbors(v)
                        .iter()
                        .filter(|&&u| p.can_receive(cfg.get(u), m))
                        .map(|&u| (u, p.receptions(cfg.get(u), m)))
                        .collect();
                    let mut count: usize = 1;
                    for (_, choices) in &receivers {
                        count = match count.checked_mul(choices.len()) {
                            Some(c) if c <= cap => c,
                            _ => return Err(ChoiceBlowup { cap }),
                        };
                    }
                    // odometer over reception choices
                    let mut idx = vec![0usize; receivers.len()];
                    loop {
                        let mut labels = cfg.labels.to_vec();
                        labels[v.idx()] = t.dst;
                        let mut chosen = BTreeMap::new();
                        for (slot, &(u, choices)) in receivers.iter().enumerate() {
                            let rt = choices[idx[slot]];
                            chosen.insert(u, rt);
                            labels[u.idx()] = p.transition(rt).dst;
                        }
                        let step = Step {
                            vertex: v,
                            transition: tid,
                            receivers: chosen,
                        };
                        if !visit(&step, &Configuration::new(labels)) {
                            return Ok(false);
                        }
                        // advance odometer
                        let mut slot = receivers.len();
                        loop {
                            if slot == 0 {
                                break;
                            }
                            slot -= 1;
                            idx[slot] += 1;
                            if idx[slot] < receivers[slot].1.len() {
                                break;
                            }
                            idx[slot] = 0;
                            if slot == 0 {
                                slot = usize::MAX;
                                break;
                            }
                        }
                        if slot == usize::MAX || receivers.is_empty() {
                            break;
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Successor enumeration for state-space search: same order as
/// [`for_each_successor`] but hands out raw label slices from a reused
/// scratch buffer instead of building steps.
pub(crate) fn for_each_successor_fast(
    p: &Protocol,
    topo: &Topology,
    labels: &[StateId],
    cap: usize,
    visit: &mut dyn FnMut(&[StateId]) -> bool,
) -> Result<bool, ChoiceBlowup> {
    let mut scratch = labels.to_vec();
    for v in topo.vertices() {
        let q = labels[v.idx()];
        for &tid in p.transitions_from(q) {
            let t = p.transition(tid);
            match t.action {
                Action::Receive(_) => {}
                Action::Internal => {
                    scratch[v.idx()] = t.dst;
                    let go = visit(&scratch);
                    scratch[v.idx()] = q;
                    if !go {
                        return Ok(false);
                    }
                }
                Action::Broadcast(m) => {
                    let receivers: Vec<(VertexId, &[TransId])> = topo
                        .neighbors(v)
                        .iter()
                        .filter(|&&u| p.can_receive(labels[u.idx()], m))
                        .map(|&u| (u, p.receptions(labels[u.idx()], m)))
                        .collect();
                    let mut count: usize = 1;
                    for (_, choices) in &receivers {
                        count = match count.checked_mul(choices.len()) {
                            Some(c) if c <= cap => c,
                            _ => return Err(ChoiceBlowup { cap }),
                        };
                    }
                    let mut idx = vec![0usize; receivers.len()];
                    loop {
                        scratch[v.idx()] = t.dst;
                        for (slot, &(u, choices)) in receivers.iter().enumerate() {
                            scratch[u.idx()] = p.transition(choices[idx[slot]]).dst;
                        }
                        let go = visit(&scratch);
                        scratch[v.idx()] = q;
                        for &(u, _) in &receivers {
                            scratch[u.idx()] = labels[u.idx()];
                        }
                        if !go {
                            return Ok(false);
                        }
                        let mut slot = receivers.len();
                        loop {
                            if slot == 0 {
                                break;
                            }
                            slot -= 1;
                            idx[slot] += 1;
                            if idx[slot] < receivers[slot].1.len() {
                                break;
                            }
                            idx[slot] = 0;
                            if slot == 0 {
                                slot = usize::MAX;
                                break;
                            }
                        }
                        if slot == usize::MAX || receivers.is_empty() {
                            break;
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Answer to a coverability query.
#[derive(Debug, Clone)]
pub enum CoverVerdict {
    Coverable {
        topology: Topology,
        witness: Execution,
        vertex: VertexId,
    },
    NotCoverable,
    Unknown {
        reason: String,
    },
}

impl CoverVerdict {
    pub fn is_coverable(&self) -> bool {
        matches!(self, CoverVerdict::Coverable { .. })
    }

    pub fn is_not_coverable(&self) -> bool {
        matches!(self, CoverVerdict::NotCoverable)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, CoverVerdict::Unknown { .. })
    }
}
