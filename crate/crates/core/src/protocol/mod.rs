//! Protocol data model: states, messages, transitions and validation.
//!
//! A protocol is a finite automaton whose transitions either broadcast a
//! message to every neighbor, receive a message, or act internally. All
//! values are immutable once built; iteration order over states, messages
//! and transitions is always the declaration order.

mod dsl;
pub mod phase;
pub mod unfold;

pub use dsl::{parse_protocol, print_protocol, ParseError};

use indexmap::IndexSet;
use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Index of a state in its protocol's declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

/// Index of a message in its protocol's declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MsgId(pub u32);

/// Index of a transition in its protocol's declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransId(pub u32);

impl StateId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl MsgId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl TransId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Transition label: broadcast, reception or internal (tau).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Broadcast(MsgId),
    Receive(MsgId),
    Internal,
}

impl Action {
    pub fn message(self) -> Option<MsgId> {
        match self {
            Action::Broadcast(m) | Action::Receive(m) => Some(m),
            Action::Internal => None,
        }
    }

    pub fn is_broadcast(self) -> bool {
        matches!(self, Action::Broadcast(_))
    }

    pub fn is_receive(self) -> bool {
        matches!(self, Action::Receive(_))
    }

    pub fn is_internal(self) -> bool {
        matches!(self, Action::Internal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: StateId,
    pub action: Action,
    pub dst: StateId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate message `{0}`")]
    DuplicateMessage(String),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown message `{0}`")]
    UnknownMessage(String),
    #[error("initial state is not declared")]
    MissingInit,
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("protocol has no states")]
    NoStates,
}

/// `[A-Za-z_][A-Za-z0-9_^',-]*`; permissive enough that unfolded state
/// names like `q4^b,1` need no escaping.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '^' | '\'' | ',' | '-'))
}

/// A finite-state broadcast protocol.
///
/// Construction goes through [`ProtocolBuilder`], which enforces the
/// invariants: the initial state and all transition endpoints are declared
/// states, transition messages are declared messages, and there are no
/// duplicate declarations.
#[derive(Debug, Clone)]
pub struct Protocol {
    name: String,
    states: IndexSet<String>,
    messages: IndexSet<String>,
    init: StateId,
    transitions: Vec<Transition>,
    /// R(q): messages with an outgoing reception at q.
    receive_sets: Vec<BTreeSet<MsgId>>,
    /// Reception transitions indexed by (state, message), declaration order.
    receptions: HashMap<(StateId, MsgId), Vec<TransId>>,
    /// Transitions with a given source state, declaration order.
    by_src: Vec<Vec<TransId>>,
}

impl PartialEq for Protocol {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.states == other.states
            && self.messages == other.messages
            && self.init == other.init
            && self.transitions == other.transitions
    }
}

impl Eq for Protocol {}

impl Protocol {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn init(&self) -> StateId {
        self.init
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_messages(&self) -> usize {
        self.messages.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        self.states.get_index(q.idx()).expect("state id in range")
    }

    pub fn message_name(&self, m: MsgId) -> &str {
        self.messages.get_index(m.idx()).expect("message id in range")
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.get_index_of(name).map(|i| StateId(i as u32))
    }

    pub fn message_id(&self, name: &str) -> Option<MsgId> {
        self.messages.get_index_of(name).map(|i| MsgId(i as u32))
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn messages(&self) -> impl Iterator<Item = MsgId> + '_ {
        (0..self.messages.len() as u32).map(MsgId)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransId) -> Transition {
        self.transitions[t.idx()]
    }

    /// R(q) = { m | (q, ?m, q') ∈ Δ for some q' }.
    pub fn receive_set(&self, q: StateId) -> &BTreeSet<MsgId> {
        &self.receive_sets[q.idx()]
    }

    pub fn can_receive(&self, q: StateId, m: MsgId) -> bool {
        self.receive_sets[q.idx()].contains(&m)
    }

    /// Reception transitions of message `m` at state `q`, declaration order.
    pub fn receptions(&self, q: StateId, m: MsgId) -> &[TransId] {
        self.receptions
            .get(&(q, m))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Transitions whose source is `q`, declaration order.
    pub fn transitions_from(&self, q: StateId) -> &[TransId] {
        &self.by_src[q.idx()]
    }

    pub fn display_transition(&self, t: Transition) -> String {
        let action = match t.action {
            Action::Broadcast(m) => format!("!!{}", self.message_name(m)),
            Action::Receive(m) => format!("?{}", self.message_name(m)),
            Action::Internal => "tau".to_string(),
        };
        format!(
            "{} {} {}",
            self.state_name(t.src),
            action,
            self.state_name(t.dst)
        )
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_protocol(self))
    }
}

/// Incremental, validating constructor for [`Protocol`].
#[derive(Debug, Clone)]
pub struct ProtocolBuilder {
    name: String,
    states: IndexSet<String>,
    messages: IndexSet<String>,
    init: Option<String>,
    transitions: Vec<(String, RawAction, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum RawAction {
    Broadcast(String),
    Receive(String),
    Internal,
}

impl ProtocolBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ProtocolBuilder {
            name: name.into(),
            states: IndexSet::new(),
            messages: IndexSet::new(),
            init: None,
            transitions: Vec::new(),
        }
    }

    pub fn state(&mut self, name: impl Into<String>) -> Result<&mut Self, ProtocolError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(ProtocolError::InvalidIdentifier(name));
        }
        if !self.states.insert(name.clone()) {
            return Err(ProtocolError::DuplicateState(name));
        }
        Ok(self)
    }

    pub fn message(&mut self, name: impl Into<String>) -> Result<&mut Self, ProtocolError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(ProtocolError::InvalidIdentifier(name));
        }
        if !self.messages.insert(name.clone()) {
            return Err(ProtocolError::DuplicateMessage(name));
        }
        Ok(self)
    }

    /// Declares the state if it has not been declared yet.
    pub fn ensure_state(&mut self, name: impl Into<String>) -> Result<&mut Self, ProtocolError> {
        let name = name.into();
        if !self.states.contains(&name) {
            self.state(name)?;
        }
        Ok(self)
    }

    pub fn ensure_message(&mut self, name: impl Into<String>) -> Result<&mut Self, ProtocolError> {
        let name = name.into();
        if !self.messages.contains(&name) {
            self.message(name)?;
        }
        Ok(self)
    }

    pub fn init(&mut self, name: impl Into<String>) -> &mut Self {
        self.init = Some(name.into());
        self
    }

    pub fn broadcast(
        &mut self,
        src: impl Into<String>,
        msg: impl Into<String>,
        dst: impl Into<String>,
    ) -> &mut Self {
        self.transitions
            .push((src.into(), RawAction::Broadcast(msg.into()), dst.into()));
        self
    }

    pub fn receive(
        &mut self,
        src: impl Into<String>,
        msg: impl Into<String>,
        dst: impl Into<String>,
    ) -> &mut Self {
        self.transitions
            .push((src.into(), RawAction::Receive(msg.into()), dst.into()));
        self
    }

    pub fn internal(&mut self, src: impl Into<String>, dst: impl Into<String>) -> &mut Self {
        self.transitions
            .push((src.into(), RawAction::Internal, dst.into()));
        self
    }

    pub fn build(self) -> Result<Protocol, ProtocolError> {
        if self.states.is_empty() {
            return Err(ProtocolError::NoStates);
        }
        let init_name = self.init.ok_or(ProtocolError::MissingInit)?;
        let init = self
            .states
            .get_index_of(&init_name)
            .map(|i| StateId(i as u32))
            .ok_or_else(|| ProtocolError::UnknownState(init_name.clone()))?;

        let lookup_state = |name: &str| -> Result<StateId, ProtocolError> {
            self.states
                .get_index_of(name)
                .map(|i| StateId(i as u32))
                .ok_or_else(|| ProtocolError::UnknownState(name.to_string()))
        };
        let lookup_msg = |name: &str| -> Result<MsgId, ProtocolError> {
            self.messages
                .get_index_of(name)
                .map(|i| MsgId(i as u32))
                .ok_or_else(|| ProtocolError::UnknownMessage(name.to_string()))
        };

        let mut transitions = Vec::with_capacity(self.transitions.len());
        let mut seen = std::collections::HashSet::new();
        for (src, action, dst) in &self.transitions {
            let t = Transition {
                src: lookup_state(src)?,
                action: match action {
                    RawAction::Broadcast(m) => Action::Broadcast(lookup_msg(m)?),
                    RawAction::Receive(m) => Action::Receive(lookup_msg(m)?),
                    RawAction::Internal => Action::Internal,
                },
                dst: lookup_state(dst)?,
            };
            if !seen.insert(t) {
                let action_str = match action {
                    RawAction::Broadcast(m) => format!("!!{m}"),
                    RawAction::Receive(m) => format!("?{m}"),
                    RawAction::Internal => "tau".to_string(),
                };
                return Err(ProtocolError::DuplicateTransition(format!(
                    "{src} {action_str} {dst}"
                )));
            }
            transitions.push(t);
        }

        let n = self.states.len();
        let mut receive_sets = vec![BTreeSet::new(); n];
        let mut receptions: HashMap<(StateId, MsgId), Vec<TransId>> = HashMap::new();
        let mut by_src = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            let id = TransId(i as u32);
            by_src[t.src.idx()].push(id);
            if let Action::Receive(m) = t.action {
                receive_sets[t.src.idx()].insert(m);
                receptions.entry((t.src, m)).or_default().push(id);
            }
        }

        Ok(Protocol {
            name: self.name,
            states: self.states,
            messages: self.messages,
            init,
            transitions,
            receive_sets,
            receptions,
            by_src,
        })
    }
}
