//! Textual protocol format: parsing and deterministic printing.
//!
//! The format is UTF-8, line oriented, with `#` starting a comment:
//!
//! ```text
//! protocol <name>
//! messages <m1> <m2> ...
//! states <s1> <s2> ...
//! init <s>
//! trans <src> !!<m> <dst>
//! trans <src> ?<m>  <dst>
//! trans <src> tau   <dst>
//! ```

use super::{is_identifier, Action, Protocol, ProtocolBuilder, ProtocolError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut toks = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (byte offset, 1-based char column)
    let mut col = 0;
    for (i, c) in line.char_indices() {
        col += 1;
        if c.is_whitespace() {
            if let Some((s, sc)) = start.take() {
                toks.push(Tok {
                    text: &line[s..i],
                    col: sc,
                });
            }
        } else if start.is_none() {
            start = Some((i, col));
        }
    }
    if let Some((s, sc)) = start {
        toks.push(Tok {
            text: &line[s..],
            col: sc,
        });
    }
    toks
}

/// Parses protocol-DSL source into a validated [`Protocol`].
pub fn parse_protocol(text: &str) -> Result<Protocol, ParseError> {
    let mut builder: Option<ProtocolBuilder> = None;
    let mut saw_init = false;

    let err_of = |line: usize, col: usize, e: ProtocolError| -> ParseError {
        ParseError::new(line, col, e.to_string())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        let kw = &toks[0];
        match kw.text {
            "protocol" => {
                if builder.is_some() {
                    return Err(ParseError::new(lineno, kw.col, "duplicate `protocol` line"));
                }
                if toks.len() != 2 {
                    return Err(ParseError::new(
                        lineno,
                        kw.col,
                        "expected `protocol <name>`",
                    ));
                }
                if !is_identifier(toks[1].text) {
                    return Err(ParseError::new(
                        lineno,
                        toks[1].col,
                        format!("invalid identifier `{}`", toks[1].text),
                    ));
                }
                builder = Some(ProtocolBuilder::new(toks[1].text));
            }
            "messages" => {
                let b = builder.as_mut().ok_or_else(|| {
                    ParseError::new(lineno, kw.col, "`protocol <name>` must come first")
                })?;
                for t in &toks[1..] {
                    b.message(t.text).map_err(|e| err_of(lineno, t.col, e))?;
                }
            }
            "states" => {
                let b = builder.as_mut().ok_or_else(|| {
                    ParseError::new(lineno, kw.col, "`protocol <name>` must come first")
                })?;
                for t in &toks[1..] {
                    b.state(t.text).map_err(|e| err_of(lineno, t.col, e))?;
                }
            }
            "init" => {
                let b = builder.as_mut().ok_or_else(|| {
                    ParseError::new(lineno, kw.col, "`protocol <name>` must come first")
                })?;
                if toks.len() != 2 {
                    return Err(ParseError::new(lineno, kw.col, "expected `init <state>`"));
                }
                if saw_init {
                    return Err(ParseError::new(lineno, kw.col, "duplicate `init` line"));
                }
                saw_init = true;
                b.init(toks[1].text);
            }
            "trans" => {
                let b = builder.as_mut().ok_or_else(|| {
                    ParseError::new(lineno, kw.col, "`protocol <name>` must come first")
                })?;
                if toks.len() != 4 {
                    return Err(ParseError::new(
                        lineno,
                        kw.col,
                        "expected `trans <src> <action> <dst>`",
                    ));
                }
                let (src, act, dst) = (&toks[1], &toks[2], &toks[3]);
                if let Some(m) = act.text.strip_prefix("!!").filter(|m| !m.is_empty()) {
                    b.broadcast(src.text, m, dst.text);
                } else if let Some(m) = act.text.strip_prefix('?').filter(|m| !m.is_empty()) {
                    b.receive(src.text, m, dst.text);
                } else if act.text == "tau" {
                    b.internal(src.text, dst.text);
                } else {
                    return Err(ParseError::new(
                        lineno,
                        act.col,
                        format!("expected `!!<msg>`, `?<msg>` or `tau`, got `{}`", act.text),
                    ));
                }
            }
            other => {
                return Err(ParseError::new(
                    lineno,
                    kw.col,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    let builder = builder.ok_or_else(|| ParseError::new(1, 1, "missing `protocol` line"))?;
    let lines = text.lines().count().max(1);
    builder.build().map_err(|e| ParseError::new(lines, 1, e.to_string()))
}

/// Prints a protocol in the canonical declaration-ordered form.
/// `parse_protocol(print_protocol(p))` reproduces `p` exactly.
pub fn print_protocol(p: &Protocol) -> String {
    let mut out = String::new();
    out.push_str(&format!("protocol {}\n", p.name()));
    let msgs: Vec<&str> = p.messages().map(|m| p.message_name(m)).collect();
    if msgs.is_empty() {
        out.push_str("messages\n");
    } else {
        out.push_str(&format!("messages {}\n", msgs.join(" ")));
    }
    let states: Vec<&str> = p.states().map(|q| p.state_name(q)).collect();
    out.push_str(&format!("states {}\n", states.join(" ")));
    out.push_str(&format!("init {}\n", p.state_name(p.init())));
    for t in p.transitions() {
        let action = match t.action {
            Action::Broadcast(m) => format!("!!{}", p.message_name(m)),
            Action::Receive(m) => format!("?{}", p.message_name(m)),
            Action::Internal => "tau".to_string(),
        };
        out.push_str(&format!(
            "trans {} {} {}\n",
            p.state_name(t.src),
            action,
            p.state_name(t.dst)
        ));
    }
    out
}
