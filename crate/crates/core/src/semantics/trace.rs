//! Witness trace format.
//!
//! One step per line:
//!
//! ```text
//! COVERABLE vertex=v1 len=3
//! step v=v1 t=qin|!!b|q4 recv=v2:qin|?b|q1,v3:qin|?b|q1
//! ```
//!
//! Executions that do not start from the all-initial configuration carry an
//! `init v1=q1,v2=qin,...` line before the steps. The `recv=` field is
//! omitted for steps without receivers.

use super::{Configuration, Execution, Step};
use crate::protocol::{Action, Protocol, StateId, TransId};
use crate::topology::{Topology, VertexId};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("trace line {line}: {msg}")]
pub struct TraceError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError {
        line,
        msg: msg.into(),
    }
}

fn render_action(p: &Protocol, action: Action) -> String {
    match action {
        Action::Broadcast(m) => format!("!!{}", p.message_name(m)),
        Action::Receive(m) => format!("?{}", p.message_name(m)),
        Action::Internal => "tau".into(),
    }
}

fn render_transition(p: &Protocol, t: TransId) -> String {
    let tr = p.transition(t);
    format!(
        "{}|{}|{}",
        p.state_name(tr.src),
        render_action(p, tr.action),
        p.state_name(tr.dst)
    )
}

/// Renders the steps of an execution (without any verdict line).
pub fn render_execution(p: &Protocol, topo: &Topology, exec: &Execution) -> String {
    let mut out = String::new();
    if !exec.from_scratch {
        out.push_str(&format!("init {}\n", exec.initial.render(p, topo)));
    }
    for step in &exec.steps {
        out.push_str(&format!(
            "step v={} t={}",
            topo.vertex_name(step.vertex),
            render_transition(p, step.transition)
        ));
        if !step.receivers.is_empty() {
            let recv: Vec<String> = step
                .receivers
                .iter()
                .map(|(&u, &rt)| format!("{}:{}", topo.vertex_name(u), render_transition(p, rt)))
                .collect();
            out.push_str(&format!(" recv={}", recv.join(",")));
        }
        out.push('\n');
    }
    out
}

fn lookup_transition(
    p: &Protocol,
    spec: &str,
    line: usize,
) -> Result<TransId, TraceError> {
    let parts: Vec<&str> = spec.split('|').collect();
    if parts.len() != 3 {
        return Err(err(line, format!("expected `src|action|dst`, got `{spec}`")));
    }
    let src = p
        .state_id(parts[0])
        .ok_or_else(|| err(line, format!("unknown state `{}`", parts[0])))?;
    let dst = p
        .state_id(parts[2])
        .ok_or_else(|| err(line, format!("unknown state `{}`", parts[2])))?;
    let action = if let Some(m) = parts[1].strip_prefix("!!") {
        Action::Broadcast(
            p.message_id(m)
                .ok_or_else(|| err(line, format!("unknown message `{m}`")))?,
        )
    } else if let Some(m) = parts[1].strip_prefix('?') {
        Action::Receive(
            p.message_id(m)
                .ok_or_else(|| err(line, format!("unknown message `{m}`")))?,
        )
    } else if parts[1] == "tau" {
        Action::Internal
    } else {
        return Err(err(line, format!("bad action `{}`", parts[1])));
    };
    p.transitions()
        .iter()
        .position(|t| t.src == src && t.action == action && t.dst == dst)
        .map(|i| TransId(i as u32))
        .ok_or_else(|| err(line, format!("transition `{spec}` is not declared")))
}

fn lookup_vertex(topo: &Topology, name: &str, line: usize) -> Result<VertexId, TraceError> {
    topo.vertex_id(name)
        .ok_or_else(|| err(line, format!("unknown vertex `{name}`")))
}

/// Parses a trace produced by [`render_execution`], ignoring verdict and
/// annotation lines (`COVERABLE ...`, `pair=...`, `print=...`).
pub fn parse_execution(
    p: &Protocol,
    topo: &Topology,
    text: &str,
) -> Result<Execution, TraceError> {
    let mut initial: Option<Configuration> = None;
    let mut steps: Vec<Step> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("init ") {
            if initial.is_some() || !steps.is_empty() {
                return Err(err(lineno, "misplaced `init` line"));
            }
            let mut labels = vec![None; topo.num_vertices()];
            for item in rest.split(',') {
                let (vn, qn) = item
                    .split_once('=')
                    .ok_or_else(|| err(lineno, format!("expected `vertex=state`, got `{item}`")))?;
                let v = lookup_vertex(topo, vn.trim(), lineno)?;
                let q = p
                    .state_id(qn.trim())
                    .ok_or_else(|| err(lineno, format!("unknown state `{qn}`")))?;
                labels[v.idx()] = Some(q);
            }
            let labels: Option<Vec<StateId>> = labels.into_iter().collect();
            initial = Some(Configuration::new(labels.ok_or_else(|| {
                err(lineno, "init line must label every vertex")
            })?));
            continue;
        }
        if let Some(rest) = line.strip_prefix("step ") {
            let mut vertex = None;
            let mut transition = None;
            let mut receivers = std::collections::BTreeMap::new();
            for field in rest.split_whitespace() {
                if let Some(v) = field.strip_prefix("v=") {
                    vertex = Some(lookup_vertex(topo, v, lineno)?);
                } else if let Some(t) = field.strip_prefix("t=") {
                    transition = Some(lookup_transition(p, t, lineno)?);
                } else if let Some(rs) = field.strip_prefix("recv=") {
                    for r in rs.split(',') {
                        let (vn, tspec) = r
                            .split_once(':')
                            .ok_or_else(|| err(lineno, format!("bad receiver `{r}`")))?;
                        let u = lookup_vertex(topo, vn, lineno)?;
                        let rt = lookup_transition(p, tspec, lineno)?;
                        receivers.insert(u, rt);
                    }
                } else {
                    return Err(err(lineno, format!("unknown field `{field}`")));
                }
            }
            steps.push(Step {
                vertex: vertex.ok_or_else(|| err(lineno, "step without v="))?,
                transition: transition.ok_or_else(|| err(lineno, "step without t="))?,
                receivers,
            });
            continue;
        }
        // verdict, annotation and topology lines are tolerated so a full
        // CLI report can be replayed as-is
        if line.starts_with("COVERABLE")
            || line.starts_with("NOT_COVERABLE")
            || line.starts_with("UNKNOWN")
            || line.starts_with("pair=")
            || line.starts_with("print=")
            || line.starts_with("PHASE_BOUNDED")
            || line.starts_with("vertex ")
            || line.starts_with("edge ")
        {
            continue;
        }
        return Err(err(lineno, format!("unrecognized line `{line}`")));
    }
    match initial {
        Some(cfg) => Ok(Execution {
            initial: cfg,
            steps,
            from_scratch: false,
        }),
        None => {
            let mut exec = Execution {
                initial: Configuration::new(vec![p.init(); topo.num_vertices()]),
                steps,
                from_scratch: true,
            };
            exec.from_scratch = true;
            Ok(exec)
        }
    }
}
