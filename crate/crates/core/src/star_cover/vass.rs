//! Vector addition systems with states: model, textual format, and
//! control-state reachability by backward coverability over upward-closed
//! sets.

use indexmap::IndexSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VassStateId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CounterId(pub u32);

impl VassStateId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl CounterId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VassOp {
    Inc(CounterId),
    Dec(CounterId),
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VassTransition {
    pub src: VassStateId,
    pub op: VassOp,
    pub dst: VassStateId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VassError {
    #[error("duplicate vass state `{0}`")]
    DuplicateState(String),
    #[error("duplicate counter `{0}`")]
    DuplicateCounter(String),
    #[error("unknown vass state `{0}`")]
    UnknownState(String),
    #[error("unknown counter `{0}`")]
    UnknownCounter(String),
    #[error("vass parse error at line {0}: {1}")]
    Parse(usize, String),
}

/// A VASS: control states, counters, and transitions that increment,
/// decrement (blocked at zero) or skip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vass {
    name: String,
    states: IndexSet<String>,
    counters: IndexSet<String>,
    transitions: Vec<VassTransition>,
}

impl Vass {
    pub fn new(name: impl Into<String>) -> Vass {
        Vass {
            name: name.into(),
            states: IndexSet::new(),
            counters: IndexSet::new(),
            transitions: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> Result<VassStateId, VassError> {
        let name = name.into();
        let (i, fresh) = self.states.insert_full(name.clone());
        if !fresh {
            return Err(VassError::DuplicateState(name));
        }
        Ok(VassStateId(i as u32))
    }

    pub fn add_counter(&mut self, name: impl Into<String>) -> Result<CounterId, VassError> {
        let name = name.into();
        let (i, fresh) = self.counters.insert_full(name.clone());
        if !fresh {
            return Err(VassError::DuplicateCounter(name));
        }
        Ok(CounterId(i as u32))
    }

    pub fn add_transition(&mut self, src: VassStateId, op: VassOp, dst: VassStateId) {
        assert!(src.idx() < self.states.len() && dst.idx() < self.states.len());
        if let VassOp::Inc(x) | VassOp::Dec(x) = op {
            assert!(x.idx() < self.counters.len());
        }
        self.transitions.push(VassTransition { src, op, dst });
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_counters(&self) -> usize {
        self.counters.len()
    }

    pub fn states(&self) -> impl Iterator<Item = VassStateId> + '_ {
        (0..self.states.len() as u32).map(VassStateId)
    }

    pub fn counters(&self) -> impl Iterator<Item = CounterId> + '_ {
        (0..self.counters.len() as u32).map(CounterId)
    }

    pub fn state_name(&self, s: VassStateId) -> &str {
        self.states.get_index(s.idx()).expect("state in range")
    }

    pub fn counter_name(&self, x: CounterId) -> &str {
        self.counters.get_index(x.idx()).expect("counter in range")
    }

    pub fn state_id(&self, name: &str) -> Option<VassStateId> {
        self.states.get_index_of(name).map(|i| VassStateId(i as u32))
    }

    pub fn counter_id(&self, name: &str) -> Option<CounterId> {
        self.counters.get_index_of(name).map(|i| CounterId(i as u32))
    }

    pub fn transitions(&self) -> &[VassTransition] {
        &self.transitions
    }
}

/// A VASS configuration: control state plus a nonnegative valuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VassConfig {
    pub state: VassStateId,
    pub valuation: Vec<u64>,
}

impl VassConfig {
    pub fn zero(v: &Vass, state: VassStateId) -> VassConfig {
        VassConfig {
            state,
            valuation: vec![0; v.num_counters()],
        }
    }
}

/// Applies a transition if enabled (decrements are blocked at zero).
pub fn vass_step(v: &Vass, cfg: &VassConfig, t: &VassTransition) -> Option<VassConfig> {
    if cfg.state != t.src {
        return None;
    }
    let mut val = cfg.valuation.clone();
    match t.op {
        VassOp::Skip => {}
        VassOp::Inc(x) => val[x.idx()] += 1,
        VassOp::Dec(x) => {
            if val[x.idx()] == 0 {
                return None;
            }
            val[x.idx()] -= 1;
        }
    }
    let _ = v;
    Some(VassConfig {
        state: t.dst,
        valuation: val,
    })
}

/// Outcome of the control-state reachability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VassReach {
    /// Reachable, with a transition sequence from the initial configuration.
    Reachable(Vec<usize>),
    Unreachable,
    /// Resource budget exceeded before an answer was found.
    Unknown(String),
}

impl VassReach {
    pub fn is_reachable(&self) -> bool {
        matches!(self, VassReach::Reachable(_))
    }
}

/// Decides whether some configuration with control state `goal` is
/// reachable from `init`, by backward coverability: saturate the minimal
/// basis of the upward-closed set of configurations that can reach the
/// goal, and test whether the initial configuration is above some basis
/// element. Termination is guaranteed by the well-quasi-ordering on
/// valuation vectors; `budget` caps the number of basis elements kept.
pub fn vass_control_reach(
    v: &Vass,
    init: &VassConfig,
    goal: VassStateId,
    budget: usize,
) -> VassReach {
    assert_eq!(init.valuation.len(), v.num_counters());

    // arena of (state, lower bound, producing transition + successor element)
    struct Elem {
        state: VassStateId,
        bound: Vec<u64>,
        via: Option<(usize, usize)>, // (transition index, successor element)
    }
    let dominates = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x <= y);

    let mut arena: Vec<Elem> = Vec::new();
    // minimal elements per state, as indices into the arena
    let mut basis: Vec<Vec<usize>> = vec![Vec::new(); v.num_states()];
    let mut work: Vec<usize> = Vec::new();

    let goal_elem = Elem {
        state: goal,
        bound: vec![0; v.num_counters()],
        via: None,
    };
    arena.push(goal_elem);
    basis[goal.idx()].push(0);
    work.push(0);

    let covered = |e: &Elem, init: &VassConfig| -> bool {
        e.state == init.state && dominates(&e.bound, &init.valuation)
    };
    if covered(&arena[0], init) {
        return VassReach::Reachable(Vec::new());
    }

    while let Some(at) = work.pop() {
        // the element may have been pruned from the basis since queued
        if !basis[arena[at].state.idx()].contains(&at) {
            continue;
        }
        for (ti, t) in v.transitions().iter().enumerate() {
            if t.dst != arena[at].state {
                continue;
            }
            let mut bound = arena[at].bound.clone();
            match t.op {
                VassOp::Skip => {}
                VassOp::Inc(x) => bound[x.idx()] = bound[x.idx()].saturating_sub(1),
                VassOp::Dec(x) => bound[x.idx()] += 1,
            }
            let slot = t.src.idx();
            if basis[slot]
                .iter()
                .any(|&i| dominates(&arena[i].bound, &bound))
            {
                continue; // already covered by a smaller element
            }
            basis[slot].retain(|&i| !dominates(&bound, &arena[i].bound));
            let elem = Elem {
                state: t.src,
                bound,
                via: Some((ti, at)),
            };
            let id = arena.len();
            let hit = covered(&elem, init);
            arena.push(elem);
            basis[slot].push(id);
            if hit {
                // walk the chain of producing transitions forward
                let mut path = Vec::new();
                let mut cur = id;
                while let Some((ti, next)) = arena[cur].via {
                    path.push(ti);
                    cur = next;
                }
                return VassReach::Reachable(path);
            }
            work.push(id);
            if arena.len() > budget {
                return VassReach::Unknown(format!(
                    "backward-coverability basis exceeded {budget} elements"
                ));
            }
        }
    }
    VassReach::Unreachable
}

/// Replays a transition-index path from `init`; returns the final
/// configuration if every step is enabled.
pub fn replay_vass_path(v: &Vass, init: &VassConfig, path: &[usize]) -> Option<VassConfig> {
    let mut cfg = init.clone();
    for &ti in path {
        cfg = vass_step(v, &cfg, v.transitions().get(ti)?)?;
    }
    Some(cfg)
}

/// Parses the VASS file format:
///
/// ```text
/// vass <name>
/// counters x y
/// states s0 s1
/// init s0
/// trans s0 x++ s1
/// trans s1 skip s2
/// trans s2 x-- s0
/// ```
///
/// Returns the VASS and the declared initial state.
pub fn parse_vass(text: &str) -> Result<(Vass, VassStateId), VassError> {
    let mut vass: Option<Vass> = None;
    let mut init: Option<String> = None;
    let mut pending: Vec<(usize, String, String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "vass" if toks.len() == 2 => {
                if vass.is_some() {
                    return Err(VassError::Parse(lineno, "duplicate `vass` line".into()));
                }
                vass = Some(Vass::new(toks[1]));
            }
            "counters" => {
                let v = vass
                    .as_mut()
                    .ok_or_else(|| VassError::Parse(lineno, "`vass <name>` must come first".into()))?;
                for c in &toks[1..] {
                    v.add_counter(*c)?;
                }
            }
            "states" => {
                let v = vass
                    .as_mut()
                    .ok_or_else(|| VassError::Parse(lineno, "`vass <name>` must come first".into()))?;
                for s in &toks[1..] {
                    v.add_state(*s)?;
                }
            }
            "init" if toks.len() == 2 => {
                if init.is_some() {
                    return Err(VassError::Parse(lineno, "duplicate `init` line".into()));
                }
                init = Some(toks[1].to_string());
            }
            "trans" if toks.len() == 4 => {
                pending.push((
                    lineno,
                    toks[1].to_string(),
                    toks[2].to_string(),
                    toks[3].to_string(),
                ));
            }
            other => {
                return Err(VassError::Parse(
                    lineno,
                    format!("unrecognized directive `{other}`"),
                ))
            }
        }
    }
    let mut v = vass.ok_or_else(|| VassError::Parse(1, "missing `vass` line".into()))?;
    for (lineno, src, op, dst) in pending {
        let s = v
            .state_id(&src)
            .ok_or_else(|| VassError::UnknownState(src.clone()))?;
        let d = v
            .state_id(&dst)
            .ok_or_else(|| VassError::UnknownState(dst.clone()))?;
        let op = if op == "skip" {
            VassOp::Skip
        } else if let Some(x) = op.strip_suffix("++") {
            VassOp::Inc(
                v.counter_id(x)
                    .ok_or_else(|| VassError::UnknownCounter(x.to_string()))?,
            )
        } else if let Some(x) = op.strip_suffix("--") {
            VassOp::Dec(
                v.counter_id(x)
                    .ok_or_else(|| VassError::UnknownCounter(x.to_string()))?,
            )
        } else {
            return Err(VassError::Parse(
                lineno,
                format!("expected `x++`, `x--` or `skip`, got `{op}`"),
            ));
        };
        v.add_transition(s, op, d);
    }
    let init = init.ok_or_else(|| VassError::Parse(1, "missing `init` line".into()))?;
    let init_id = v
        .state_id(&init)
        .ok_or(VassError::UnknownState(init))?;
    Ok((v, init_id))
}

/// Prints a VASS in the canonical file format.
pub fn print_vass(v: &Vass, init: VassStateId) -> String {
    let mut out = format!("vass {}\n", v.name());
    let counters: Vec<&str> = v.counters().map(|x| v.counter_name(x)).collect();
    if counters.is_empty() {
        out.push_str("counters\n");
    } else {
        out.push_str(&format!("counters {}\n", counters.join(" ")));
    }
    let states: Vec<&str> = v.states().map(|s| v.state_name(s)).collect();
    out.push_str(&format!("states {}\n", states.join(" ")));
    out.push_str(&format!("init {}\n", v.state_name(init)));
    for t in v.transitions() {
        let op = match t.op {
            VassOp::Inc(x) => format!("{}++", v.counter_name(x)),
            VassOp::Dec(x) => format!("{}--", v.counter_name(x)),
            VassOp::Skip => "skip".to_string(),
        };
        out.push_str(&format!(
            "trans {} {} {}\n",
            v.state_name(t.src),
            op,
            v.state_name(t.dst)
        ));
    }
    out
}
