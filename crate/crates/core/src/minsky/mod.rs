//! Two-counter Minsky machines: model, interpreter and textual format.

pub mod reduce;

use indexmap::IndexSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocId(pub u32);

impl LocId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// The two counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Counter {
    X1,
    X2,
}

impl Counter {
    pub fn name(self) -> &'static str {
        match self {
            Counter::X1 => "x1",
            Counter::X2 => "x2",
        }
    }

    pub fn parse(s: &str) -> Option<Counter> {
        match s {
            "x1" => Some(Counter::X1),
            "x2" => Some(Counter::X2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinskyOp {
    Inc(Counter),
    Dec(Counter),
    /// Enabled only when the counter is zero.
    Test0(Counter),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MinskyTransition {
    pub src: LocId,
    pub op: MinskyOp,
    pub dst: LocId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinskyError {
    #[error("minsky parse error at line {0}: {1}")]
    Parse(usize, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinskyMachine {
    name: String,
    locations: IndexSet<String>,
    transitions: Vec<MinskyTransition>,
    init: LocId,
    fin: LocId,
}

impl MinskyMachine {
    /// Locations are collected in order of appearance: initial, final,
    /// then transition endpoints, which makes the textual format
    /// round-trip exactly.
    pub fn new(
        name: impl Into<String>,
        init: &str,
        fin: &str,
        transitions: Vec<(String, MinskyOp, String)>,
    ) -> MinskyMachine {
        let mut locs: IndexSet<String> = IndexSet::new();
        locs.insert(init.to_string());
        locs.insert(fin.to_string());
        for (s, _, d) in &transitions {
            locs.insert(s.clone());
            locs.insert(d.clone());
        }
        let lookup = |locs: &IndexSet<String>, n: &str| -> LocId {
            LocId(locs.get_index_of(n).expect("inserted above") as u32)
        };
        let init = lookup(&locs, init);
        let fin = lookup(&locs, fin);
        let transitions = transitions
            .into_iter()
            .map(|(s, op, d)| MinskyTransition {
                src: lookup(&locs, &s),
                op,
                dst: lookup(&locs, &d),
            })
            .collect();
        MinskyMachine {
            name: name.into(),
            locations: locs,
            transitions,
            init,
            fin,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn locations(&self) -> impl Iterator<Item = LocId> + '_ {
        (0..self.locations.len() as u32).map(LocId)
    }

    pub fn location_name(&self, l: LocId) -> &str {
        self.locations.get_index(l.idx()).expect("loc in range")
    }

    pub fn location_id(&self, name: &str) -> Option<LocId> {
        self.locations.get_index_of(name).map(|i| LocId(i as u32))
    }

    pub fn transitions(&self) -> &[MinskyTransition] {
        &self.transitions
    }

    pub fn init(&self) -> LocId {
        self.init
    }

    pub fn fin(&self) -> LocId {
        self.fin
    }
}

/// A machine configuration: location plus the two counter values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinskyConfig {
    pub loc: LocId,
    pub x1: u64,
    pub x2: u64,
}

impl MinskyConfig {
    pub fn counter(&self, c: Counter) -> u64 {
        match c {
            Counter::X1 => self.x1,
            Counter::X2 => self.x2,
        }
    }

    fn counter_mut(&mut self, c: Counter) -> &mut u64 {
        match c {
            Counter::X1 => &mut self.x1,
            Counter::X2 => &mut self.x2,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("illegal machine step at index {index}: {reason}")]
pub struct MinskyStepError {
    pub index: usize,
    pub reason: String,
}

/// Applies one transition if enabled.
pub fn minsky_step(
    m: &MinskyMachine,
    cfg: &MinskyConfig,
    t: &MinskyTransition,
    index: usize,
) -> Result<MinskyConfig, MinskyStepError> {
    let fail = |reason: String| MinskyStepError { index, reason };
    if cfg.loc != t.src {
        return Err(fail(format!(
            "machine is at {}, transition starts at {}",
            m.location_name(cfg.loc),
            m.location_name(t.src)
        )));
    }
    let mut next = *cfg;
    next.loc = t.dst;
    match t.op {
        MinskyOp::Inc(c) => *next.counter_mut(c) += 1,
        MinskyOp::Dec(c) => {
            if cfg.counter(c) == 0 {
                return Err(fail(format!("decrement of {} at zero", c.name())));
            }
            *next.counter_mut(c) -= 1;
        }
        MinskyOp::Test0(c) => {
            if cfg.counter(c) != 0 {
                return Err(fail(format!(
                    "zero test of {} at value {}",
                    c.name(),
                    cfg.counter(c)
                )));
            }
        }
    }
    Ok(next)
}

/// Runs a transition-index sequence from (init, 0, 0); returns the final
/// configuration or the first illegal step.
pub fn simulate_minsky(m: &MinskyMachine, run: &[usize]) -> Result<MinskyConfig, MinskyStepError> {
    let mut cfg = MinskyConfig {
        loc: m.init(),
        x1: 0,
        x2: 0,
    };
    for (i, &ti) in run.iter().enumerate() {
        let t = m.transitions().get(ti).ok_or_else(|| MinskyStepError {
            index: i,
            reason: format!("transition index {ti} out of range"),
        })?;
        cfg = minsky_step(m, &cfg, t, i)?;
    }
    Ok(cfg)
}

/// Does the run end in the final location with both counters zero?
pub fn is_halting_run(m: &MinskyMachine, run: &[usize]) -> bool {
    matches!(
        simulate_minsky(m, run),
        Ok(MinskyConfig { loc, x1: 0, x2: 0 }) if loc == m.fin()
    )
}

/// Parses the Minsky file format:
///
/// ```text
/// minsky <name>
/// init l0
/// final lf
/// trans l0 inc x1 l1
/// trans l1 dec x1 l2
/// trans l2 test0 x1 lf
/// ```
pub fn parse_minsky(text: &str) -> Result<MinskyMachine, MinskyError> {
    let mut name: Option<String> = None;
    let mut init: Option<String> = None;
    let mut fin: Option<String> = None;
    let mut transitions: Vec<(String, MinskyOp, String)> = Vec::new();
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
        match toks.as_slice() {
            ["minsky", n] => {
                if name.is_some() {
                    return Err(MinskyError::Parse(lineno, "duplicate `minsky` line".into()));
                }
                name = Some(n.to_string());
            }
            ["init", l] => {
                init = Some(l.to_string());
            }
            ["final", l] => {
                fin = Some(l.to_string());
            }
            ["trans", src, op, ctr, dst] => {
                let c = Counter::parse(ctr).ok_or_else(|| {
                    MinskyError::Parse(lineno, format!("unknown counter `{ctr}`"))
                })?;
                let op = match *op {
                    "inc" => MinskyOp::Inc(c),
                    "dec" => MinskyOp::Dec(c),
                    "test0" => MinskyOp::Test0(c),
                    other => {
                        return Err(MinskyError::Parse(
                            lineno,
                            format!("unknown operation `{other}`"),
                        ))
                    }
                };
                transitions.push((src.to_string(), op, dst.to_string()));
            }
            _ => {
                return Err(MinskyError::Parse(
                    lineno,
                    format!("unrecognized line `{}`", line.trim()),
                ))
            }
        }
    }
    let name = name.ok_or_else(|| MinskyError::Parse(1, "missing `minsky` line".into()))?;
    let init = init.ok_or_else(|| MinskyError::Parse(1, "missing `init` line".into()))?;
    let fin = fin.ok_or_else(|| MinskyError::Parse(1, "missing `final` line".into()))?;
    Ok(MinskyMachine::new(name, &init, &fin, transitions))
}

/// Prints a machine in the canonical file format.
pub fn print_minsky(m: &MinskyMachine) -> String {
    let mut out = format!("minsky {}\n", m.name());
    out.push_str(&format!("init {}\n", m.location_name(m.init())));
    out.push_str(&format!("final {}\n", m.location_name(m.fin())));
    for t in m.transitions() {
        let (op, c) = match t.op {
            MinskyOp::Inc(c) => ("inc", c),
            MinskyOp::Dec(c) => ("dec", c),
            MinskyOp::Test0(c) => ("test0", c),
        };
        out.push_str(&format!(
            "trans {} {} {} {}\n",
            m.location_name(t.src),
            op,
            c.name(),
            m.location_name(t.dst)
        ));
    }
    out
}

/// The three-step halting machine used throughout the tests:
/// inc x1, dec x1, test0 x1.
pub fn example_machine() -> MinskyMachine {
    MinskyMachine::new(
        "M1",
        "l0",
        "lf",
        vec![
            ("l0".into(), MinskyOp::Inc(Counter::X1), "l1".into()),
            ("l1".into(), MinskyOp::Dec(Counter::X1), "l2".into()),
            ("l2".into(), MinskyOp::Test0(Counter::X1), "lf".into()),
        ],
    )
}
