//! Plain-text instance and flow files.
//!
//! Instance files are line oriented; `#` starts a comment:
//!
//! ```text
//! n 4          # sources and relays, ids 0..n
//! m 1          # destinations, ids n..n+m
//! rate 0 2     # generation rate of a node (default 0)
//! edge 0 1 1.5 3   # tail head cost capacity
//! pos 0 0.25 0.75  # optional coordinates, all or none
//! ```
//!
//! Flow files hold one `flow tail head x` line per edge.

use std::collections::HashMap;
use std::fmt::Write as _;

use balroute_core::{Edge, FlowAssignment, NetworkError, NetworkInstance};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error("positions must be given for every node or none")]
    PartialPositions,
    #[error("invalid instance")]
    Network(#[from] NetworkError),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| syntax(line, format!("bad {what} `{tok}`")))
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn no_trailing(toks: &[&str], expected: usize, line: usize) -> Result<(), FormatError> {
    if toks.len() > expected {
        return Err(syntax(line, format!("unexpected `{}`", toks[expected])));
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<NetworkInstance, FormatError> {
    let mut n: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut rates: Vec<(usize, usize, i64)> = Vec::new();
    let mut edges = Vec::new();
    let mut pos: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (ln, toks) in lines(text) {
        let mut it = toks.iter().copied();
        match it.next().unwrap() {
            "n" => {
                n = Some(field(it.next(), ln, "n")?);
                no_trailing(&toks, 2, ln)?;
            }
            "m" => {
                m = Some(field(it.next(), ln, "m")?);
                no_trailing(&toks, 2, ln)?;
            }
            "rate" => {
                rates.push((ln, field(it.next(), ln, "node")?, field(it.next(), ln, "rate")?));
                no_trailing(&toks, 3, ln)?;
            }
            "edge" => {
                edges.push(Edge {
                    tail: field(it.next(), ln, "tail")?,
                    head: field(it.next(), ln, "head")?,
                    cost: field(it.next(), ln, "cost")?,
                    capacity: field(it.next(), ln, "capacity")?,
                });
                no_trailing(&toks, 5, ln)?;
            }
            "pos" => {
                pos.push((ln, field(it.next(), ln, "node")?, field(it.next(), ln, "x")?, field(it.next(), ln, "y")?));
                no_trailing(&toks, 4, ln)?;
            }
            other => return Err(syntax(ln, format!("unknown keyword `{other}`"))),
        }
    }
    let n = n.ok_or(FormatError::Missing("n"))?;
    let m = m.ok_or(FormatError::Missing("m"))?;
    let total = n + m;
    let mut rate = vec![0; n];
    for (ln, v, r) in rates {
        if v >= n {
            return Err(syntax(ln, format!("rate for node {v}, which is not a source or relay")));
        }
        rate[v] = r;
    }
    let mut inst = NetworkInstance::new(n, m, rate, edges)?;
    if !pos.is_empty() {
        let mut coords = vec![None; total];
        for (ln, v, x, y) in pos {
            let slot = coords.get_mut(v).ok_or_else(|| syntax(ln, format!("position for unknown node {v}")))?;
            *slot = Some((x, y));
        }
        let coords: Option<Vec<(f64, f64)>> = coords.into_iter().collect();
        inst = inst.with_positions(coords.ok_or(FormatError::PartialPositions)?);
    }
    Ok(inst)
}

pub fn write_instance(inst: &NetworkInstance) -> String {
    let mut s = String::new();
    writeln!(s, "n {}", inst.num_sources()).unwrap();
    writeln!(s, "m {}", inst.num_destinations()).unwrap();
    for (v, r) in inst.rates().iter().enumerate() {
        if *r != 0 {
            writeln!(s, "rate {v} {r}").unwrap();
        }
    }
    for e in inst.edges() {
        writeln!(s, "edge {} {} {} {}", e.tail, e.head, e.cost, e.capacity).unwrap();
    }
    if let Some(p) = inst.positions() {
        for (v, (x, y)) in p.iter().enumerate() {
            writeln!(s, "pos {v} {x} {y}").unwrap();
        }
    }
    s
}

/// Reads a flow file against `inst`. Edges not mentioned carry no flow.
pub fn parse_flow(inst: &NetworkInstance, text: &str) -> Result<FlowAssignment, FormatError> {
    let ids: HashMap<(usize, usize), usize> = inst.edges().iter().enumerate().map(|(i, e)| ((e.tail, e.head), i)).collect();
    let mut flow = FlowAssignment::zero(inst);
    let mut seen = vec![false; inst.edges().len()];
    for (ln, toks) in lines(text) {
        if toks[0] != "flow" {
            return Err(syntax(ln, format!("unknown keyword `{}`", toks[0])));
        }
        let mut it = toks[1..].iter().copied();
        let tail: usize = field(it.next(), ln, "tail")?;
        let head: usize = field(it.next(), ln, "head")?;
        let x: i64 = field(it.next(), ln, "flow")?;
        no_trailing(&toks, 4, ln)?;
        let e = *ids.get(&(tail, head)).ok_or_else(|| syntax(ln, format!("no edge {tail} -> {head}")))?;
        if std::mem::replace(&mut seen[e], true) {
            return Err(syntax(ln, format!("edge {tail} -> {head} listed twice")));
        }
        flow.flows[e] = x;
    }
    Ok(flow)
}

pub fn write_flow(inst: &NetworkInstance, flow: &FlowAssignment) -> String {
    let mut s = String::new();
    for (e, x) in inst.edges().iter().zip(&flow.flows) {
        writeln!(s, "flow {} {} {}", e.tail, e.head, x).unwrap();
    }
    s
}
