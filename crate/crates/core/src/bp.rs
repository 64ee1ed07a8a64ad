//! Synchronous min-sum belief propagation for flow problems with convex
//! piecewise-linear edge costs and node-load penalties.
//!
//! Every edge variable `x_e` has two neighbouring node factors, so the
//! factor-to-variable and variable-to-factor messages collapse into one
//! message `m_{i->e}` per (node, incident edge) pair. A message is a
//! [`Plc`] on `[0, u_e]`, or `None` when node `i` cannot satisfy its
//! conservation constraint for any value of `x_e`.
//!
//! Updating `m_{i->e}` for an outgoing edge `e` runs in two stages:
//!
//! 1. `H(y)`: cheapest way to bring load `y` to node `i` from the incoming
//!    messages (an infimal convolution shifted by the rate `r_i`), plus the
//!    weighted load penalty.
//! 2. `m(z) = g_e(z) + (H □ neg(m_k) for the other outgoing edges)(z)`,
//!    where `neg` reflects the argument so the convolution enforces
//!    `y - sum z_k = z`.
//!
//! Incoming edges are symmetric: stage 1 convolves the outgoing messages,
//! stage 2 subtracts the other incoming edges and the rate.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::network::{EdgeId, FlowAssignment, NetworkError, NetworkInstance, NodeId, PenaltySpec};
use crate::oracle::{self, OracleError};
use crate::plc::{inf_convolve, merge_slopes, Plc};

#[derive(Clone, Debug, PartialEq)]
pub enum BpError {
    Network(NetworkError),
    Oracle(OracleError),
    /// The two messages on this edge admit no common flow value.
    InfeasibleBelief { edge: EdgeId },
    /// No iteration produced a consistent flow estimate.
    NoEstimate,
    BadConfig(&'static str),
}

impl fmt::Display for BpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BpError::Network(e) => write!(f, "{e}"),
            BpError::Oracle(e) => write!(f, "{e}"),
            BpError::InfeasibleBelief { edge } => write!(f, "belief of edge {edge} is identically +inf"),
            BpError::NoEstimate => f.write_str("no iteration produced a flow estimate"),
            BpError::BadConfig(what) => write!(f, "invalid solver configuration: {what}"),
        }
    }
}

impl core::error::Error for BpError {}

impl From<NetworkError> for BpError {
    fn from(e: NetworkError) -> Self {
        BpError::Network(e)
    }
}

impl From<OracleError> for BpError {
    fn from(e: OracleError) -> Self {
        BpError::Oracle(e)
    }
}

/// One edge of a [`BpProblem`]: its endpoints and its cost function `g_e`,
/// whose domain `[0, u_e]` also fixes the capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct BpEdge {
    pub tail: NodeId,
    pub head: NodeId,
    pub cost: Plc,
}

/// The factor graph BP runs on.
///
/// Terminal nodes (destinations) accept any flow and never update their
/// messages. Every other node enforces `out - in = rate` and may carry a
/// load cost on its total outgoing flow.
#[derive(Clone, Debug, PartialEq)]
pub struct BpProblem {
    edges: Vec<BpEdge>,
    terminal: Vec<bool>,
    rates: Vec<i64>,
    load_cost: Vec<Option<Plc>>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
}

impl BpProblem {
    pub fn new(terminal: Vec<bool>, rates: Vec<i64>, edges: Vec<BpEdge>, load_cost: Vec<Option<Plc>>) -> Self {
        let n = terminal.len();
        assert_eq!(rates.len(), n, "one rate per node");
        assert_eq!(load_cost.len(), n, "one load cost slot per node");
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            assert_eq!(e.cost.lo(), 0, "edge cost domains start at zero flow");
            out_edges[e.tail].push(id);
            in_edges[e.head].push(id);
        }
        BpProblem {
            edges,
            terminal,
            rates,
            load_cost,
            out_edges,
            in_edges,
        }
    }

    /// The balanced-routing problem: `g_e(z) = (1 - w) c_e z` on
    /// `[0, u_e]` and load cost `w phi_i` on every source/relay node.
    pub fn direct(inst: &NetworkInstance, pen: &PenaltySpec) -> Result<Self, NetworkError> {
        let w = pen.weight();
        let edges = inst
            .edges()
            .iter()
            .map(|e| BpEdge {
                tail: e.tail,
                head: e.head,
                cost: Plc::linear(0, e.capacity, 0.0, (1.0 - w) * e.cost),
            })
            .collect();
        let n = inst.num_nodes();
        let mut load_cost = vec![None; n];
        for (v, slot) in load_cost.iter_mut().enumerate().take(inst.num_sources()) {
            *slot = Some(pen.phi(inst, v)?.scale(w));
        }
        Ok(BpProblem::new(
            (0..n).map(|v| inst.is_destination(v)).collect(),
            (0..n).map(|v| inst.rate(v)).collect(),
            edges,
            load_cost,
        ))
    }

    pub fn num_nodes(&self) -> usize {
        self.terminal.len()
    }

    pub fn edges(&self) -> &[BpEdge] {
        &self.edges
    }

    pub fn is_terminal(&self, v: NodeId) -> bool {
        self.terminal[v]
    }

    pub fn rate(&self, v: NodeId) -> i64 {
        self.rates[v]
    }

    pub fn load_cost(&self, v: NodeId) -> Option<&Plc> {
        self.load_cost[v].as_ref()
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    pub fn capacity(&self, e: EdgeId) -> i64 {
        self.edges[e].cost.hi()
    }

    fn with_load_cost(&self, v: NodeId, h: Plc) -> Option<Plc> {
        match &self.load_cost[v] {
            Some(phi) => h.add(phi),
            None => Some(h),
        }
    }
}

/// All messages `m_{i->e}` at iteration `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageState {
    t: usize,
    from_tail: Vec<Option<Plc>>,
    from_head: Vec<Option<Plc>>,
}

impl MessageState {
    pub fn iteration(&self) -> usize {
        self.t
    }

    /// `m_{node->edge}`; `None` is the identically `+inf` message.
    pub fn message(&self, problem: &BpProblem, node: NodeId, edge: EdgeId) -> Option<&Plc> {
        let e = &problem.edges[edge];
        if e.tail == node {
            self.from_tail[edge].as_ref()
        } else if e.head == node {
            self.from_head[edge].as_ref()
        } else {
            panic!("node {node} is not an endpoint of edge {edge}")
        }
    }

    /// Overwrites one message; used to set up isolated neighbourhoods.
    pub fn set_message(&mut self, problem: &BpProblem, node: NodeId, edge: EdgeId, m: Option<Plc>) {
        let e = &problem.edges[edge];
        if e.tail == node {
            self.from_tail[edge] = m;
        } else if e.head == node {
            self.from_head[edge] = m;
        } else {
            panic!("node {node} is not an endpoint of edge {edge}")
        }
    }
}

/// Every message starts as the edge cost `g_e`.
pub fn init_messages(problem: &BpProblem) -> MessageState {
    let g: Vec<Option<Plc>> = problem.edges.iter().map(|e| Some(e.cost.clone())).collect();
    MessageState {
        t: 0,
        from_tail: g.clone(),
        from_head: g,
    }
}

/// Recomputes `m_{i->e}` from the messages in `state`, straight from the
/// two-stage decomposition. [`sweep`] computes the same values in batches.
pub fn update_message(problem: &BpProblem, state: &MessageState, i: NodeId, e: EdgeId) -> Option<Plc> {
    assert!(!problem.terminal[i], "terminal nodes do not update");
    let edge = &problem.edges[e];
    let r = problem.rates[i];
    let incoming = || -> Option<Vec<&Plc>> {
        problem.in_edges[i]
            .iter()
            .map(|&f| state.from_tail[f].as_ref())
            .collect()
    };
    let outgoing = || -> Option<Vec<&Plc>> {
        problem.out_edges[i]
            .iter()
            .map(|&f| state.from_head[f].as_ref())
            .collect()
    };
    let combined = if edge.tail == i {
        let h = problem.with_load_cost(i, inf_convolve(incoming()?).shift_argument(r))?;
        let others: Vec<Plc> = problem.out_edges[i]
            .iter()
            .filter(|&&f| f != e)
            .map(|&f| state.from_head[f].as_ref().map(Plc::negate_argument))
            .collect::<Option<_>>()?;
        inf_convolve(core::iter::once(&h).chain(&others))
    } else {
        assert_eq!(edge.head, i, "node {i} is not an endpoint of edge {e}");
        let h = problem.with_load_cost(i, inf_convolve(outgoing()?))?;
        let others: Vec<Plc> = problem.in_edges[i]
            .iter()
            .filter(|&&f| f != e)
            .map(|&f| state.from_tail[f].as_ref().map(Plc::negate_argument))
            .collect::<Option<_>>()?;
        inf_convolve(core::iter::once(&h).chain(&others)).shift_argument(-r)
    };
    combined.restrict(0, problem.capacity(e))?.add(&edge.cost)
}

/// Stage 2 for every edge on one side of a node at once.
///
/// `base` is the stage-1 function `H`; `items[p]` is the reflected message
/// of the `p`-th edge on that side. The slopes of `base` and all items are
/// merged once; the output for edge `p` reads its window off the merge,
/// stepping over the positions of item `p`'s own slopes.
fn leave_one_out(
    problem: &BpProblem,
    base: Option<Plc>,
    items: &[Option<Plc>],
    edges: &[EdgeId],
    shift: i64,
    out: &mut [Option<Plc>],
) {
    let missing: Vec<usize> = (0..items.len()).filter(|&p| items[p].is_none()).collect();
    let base = match base {
        Some(b) if missing.len() <= 1 => b,
        _ => {
            for &e in edges {
                out[e] = None;
            }
            return;
        }
    };
    const BASE: usize = usize::MAX;
    let mut lists: Vec<&[f64]> = Vec::with_capacity(items.len() + 1);
    let mut tags: Vec<usize> = Vec::with_capacity(items.len() + 1);
    lists.push(base.slopes());
    tags.push(BASE);
    let mut lo_all = base.lo();
    for (p, item) in items.iter().enumerate() {
        if let Some(f) = item {
            lists.push(f.slopes());
            tags.push(p);
            lo_all += f.lo();
        }
    }
    // Merged slopes and where each item's slopes landed.
    let tagged = merge_slopes(&lists);
    let mut merged: Vec<f64> = Vec::with_capacity(tagged.len());
    let mut positions: Vec<Vec<usize>> = items.iter().map(|f| Vec::with_capacity(f.as_ref().map_or(0, |f| f.slopes().len()))).collect();
    for (k, &(s, list)) in tagged.iter().enumerate() {
        if tags[list] != BASE {
            positions[tags[list]].push(k);
        }
        merged.push(s);
    }

    for (p, &e) in edges.iter().enumerate() {
        out[e] = match (&items[p], missing.first()) {
            (Some(_), Some(_)) => None,
            (item, _) => {
                let (skip_lo, own): (i64, &[f64]) = match item {
                    Some(f) => (f.lo(), f.slopes()),
                    None => (0, &[]),
                };
                let lo = lo_all - skip_lo + shift;
                let hi = lo + (merged.len() - own.len()) as i64;
                without_item(&problem.edges[e].cost, lo, hi, &merged, &positions[p])
            }
        };
    }
}

/// Restricts the function starting at `lo` with the slopes of `merged`
/// minus those at `own_pos` to the domain of `cost`, adds `cost`, and
/// shifts the result to have minimum 0.
fn without_item(cost: &Plc, lo: i64, hi: i64, merged: &[f64], own_pos: &[usize]) -> Option<Plc> {
    let a = lo.max(cost.lo());
    let b = hi.min(cost.hi());
    if a > b {
        return None;
    }
    let skip = (a - lo) as usize;
    let take = (b - a) as usize;
    // The first kept slope after `skip` kept ones sits at `skip + q`, where
    // `q` counts the own slopes in front of it.
    let mut q = 0;
    while q < own_pos.len() && own_pos[q] < skip + q {
        q += 1;
    }
    let mut j = skip + q;
    let offset = (a - cost.lo()) as usize;
    let g = &cost.slopes()[offset..offset + take];
    let mut window = Vec::with_capacity(take);
    while window.len() < take {
        if q < own_pos.len() && own_pos[q] == j {
            q += 1;
        } else {
            window.push(merged[j] + g[window.len()]);
        }
        j += 1;
    }
    // Min-sum values grow geometrically on loopy graphs and overflow within
    // a few hundred sweeps; only differences matter, so the minimum is
    // pinned to 0.
    let to_min: f64 = window.iter().take_while(|s| **s < 0.0).sum();
    Some(Plc::from_sorted(a, -to_min, window))
}

fn update_node(problem: &BpProblem, state: &MessageState, i: NodeId, from_tail: &mut [Option<Plc>], from_head: &mut [Option<Plc>]) {
    let outs = &problem.out_edges[i];
    let ins = &problem.in_edges[i];
    let r = problem.rates[i];

    if !outs.is_empty() {
        let incoming: Option<Vec<&Plc>> = ins.iter().map(|&f| state.from_tail[f].as_ref()).collect();
        let base = incoming.and_then(|m| problem.with_load_cost(i, inf_convolve(m).shift_argument(r)));
        let items: Vec<Option<Plc>> = outs
            .iter()
            .map(|&f| state.from_head[f].as_ref().map(Plc::negate_argument))
            .collect();
        leave_one_out(problem, base, &items, outs, 0, from_tail);
    }
    if !ins.is_empty() {
        let outgoing: Option<Vec<&Plc>> = outs.iter().map(|&f| state.from_head[f].as_ref()).collect();
        let base = outgoing.and_then(|m| problem.with_load_cost(i, inf_convolve(m)));
        let items: Vec<Option<Plc>> = ins
            .iter()
            .map(|&f| state.from_tail[f].as_ref().map(Plc::negate_argument))
            .collect();
        leave_one_out(problem, base, &items, ins, -r, from_head);
    }
}

/// One synchronous iteration: every non-terminal node recomputes all its
/// messages from the previous state only; terminal messages are copied.
/// New messages equal [`update_message`] shifted to have minimum 0.
pub fn sweep(problem: &BpProblem, state: &MessageState) -> MessageState {
    let mut from_tail = state.from_tail.clone();
    let mut from_head = state.from_head.clone();
    for i in 0..problem.num_nodes() {
        if !problem.terminal[i] {
            update_node(problem, state, i, &mut from_tail, &mut from_head);
        }
    }
    MessageState {
        t: state.t + 1,
        from_tail,
        from_head,
    }
}

/// `b_e = m_{tail->e} + m_{head->e} - g_e`.
pub fn belief(problem: &BpProblem, state: &MessageState, e: EdgeId) -> Option<Plc> {
    let (a, b) = (state.from_tail[e].as_ref()?, state.from_head[e].as_ref()?);
    let sum = a.add(b)?;
    // Both messages already contain g_e, so the difference is convex up to rounding.
    sum.subtract_within(&problem.edges[e].cost).ok()
}

/// Per-edge flow estimate: the smallest minimizer of every belief.
pub fn extract_flows(problem: &BpProblem, state: &MessageState) -> Result<Vec<i64>, BpError> {
    (0..problem.edges.len())
        .map(|e| {
            belief(problem, state, e)
                .map(|b| b.argmin().0)
                .ok_or(BpError::InfeasibleBelief { edge: e })
        })
        .collect()
}

pub fn extract_flow(problem: &BpProblem, state: &MessageState) -> Result<FlowAssignment, BpError> {
    extract_flows(problem, state).map(FlowAssignment::new)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Consecutive iterations with an unchanged, conserving flow estimate
    /// required to stop.
    pub stability_window: usize,
    /// Check the final flow with the residual-graph certificate.
    pub certificate_check: bool,
    /// Keep every iteration's estimate in [`SolveResult::trace`].
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 200,
            stability_window: 5,
            certificate_check: false,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), BpError> {
        if self.stability_window == 0 {
            return Err(BpError::BadConfig("stability window must be at least 1"));
        }
        if self.max_iterations < self.stability_window {
            return Err(BpError::BadConfig("max iterations must be at least the stability window"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub flow: FlowAssignment,
    /// First iteration from which the estimate equals the returned flow.
    pub t_star: usize,
    pub converged: bool,
    pub certified_optimal: Option<bool>,
    /// Sweeps performed.
    pub iterations: usize,
    /// Estimate after each iteration `0..=iterations` (`None` where some
    /// belief was infeasible); empty unless requested.
    pub trace: Vec<Option<FlowAssignment>>,
}

/// Runs sweeps until the projected estimate has been identical and
/// conserving for `stability_window` consecutive iterations.
///
/// `project` maps problem-edge flows to the reported edges; `conserves`
/// and `certify` judge reported flows.
pub(crate) fn iterate<P, C, K>(problem: &BpProblem, cfg: &SolverConfig, project: P, conserves: C, certify: K) -> Result<SolveResult, BpError>
where
    P: Fn(Vec<i64>) -> Vec<i64>,
    C: Fn(&[i64]) -> bool,
    K: Fn(&[i64]) -> Result<bool, BpError>,
{
    cfg.validate()?;
    let estimate = |s: &MessageState| extract_flows(problem, s).ok().map(&project);
    let mut state = init_messages(problem);
    let mut current = estimate(&state);
    let mut run_start = 0usize;
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(current.clone().map(FlowAssignment::new));
    }
    let stable = |t: usize, current: &Option<Vec<i64>>, run_start: usize| {
        t + 1 - run_start >= cfg.stability_window && current.as_deref().is_some_and(&conserves)
    };
    let mut converged = stable(0, &current, run_start);
    let mut t = 0;
    while !converged && t < cfg.max_iterations {
        t += 1;
        state = sweep(problem, &state);
        let next = estimate(&state);
        if next != current {
            run_start = t;
            current = next;
        }
        if cfg.record_trace {
            trace.push(current.clone().map(FlowAssignment::new));
        }
        converged = stable(t, &current, run_start);
    }
    let flow = current.ok_or(BpError::NoEstimate)?;
    let certified_optimal = if cfg.certificate_check {
        Some(conserves(&flow) && certify(&flow)?)
    } else {
        None
    };
    Ok(SolveResult {
        flow: FlowAssignment::new(flow),
        t_star: run_start,
        converged,
        certified_optimal,
        iterations: t,
        trace,
    })
}

/// Runs BP on the balanced-routing problem until the flow estimate settles.
pub fn solve(inst: &NetworkInstance, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<SolveResult, BpError> {
    let problem = BpProblem::direct(inst, pen)?;
    iterate(
        &problem,
        cfg,
        |x| x,
        |x| FlowAssignment::new(x.to_vec()).is_feasible(inst),
        |x| Ok(oracle::certify(inst, pen, &FlowAssignment::new(x.to_vec()))?),
    )
}
