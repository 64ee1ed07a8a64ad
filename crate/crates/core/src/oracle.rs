//! Ground truth for small instances and an optimality certificate for any
//! instance.
//!
//! [`brute_force`] enumerates every integer flow within capacities.
//! [`certify`] builds the residual graph of a flow and looks for a
//! negative-cost directed cycle; a feasible flow is optimal iff none exists.
//!
//! The residual graph gives every source/relay node `i` an out-copy
//! `i'`: original edges leave from `i'`, and the arcs `i -> i'` / `i' -> i`
//! carry the marginal load penalty. Rerouting flow between two outgoing
//! edges of the same node then costs only the edge-cost difference, since
//! the load of `i` does not change. A super-sink joined to every
//! destination by free arcs in both directions lets flow move between
//! destinations.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bp::BpProblem;
use crate::network::{EdgeId, FlowAssignment, NetworkError, NetworkInstance, NodeId, PenaltySpec};

/// Default cap on `prod (u_e + 1)` for exhaustive enumeration.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// Objective values closer than this count as a tie.
pub const TIE_TOL: f64 = 1e-12;

/// Cycles cheaper than `-NEGATIVE_CYCLE_TOL` refute optimality.
pub const NEGATIVE_CYCLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum OracleError {
    BudgetExceeded { size: u128, budget: u128 },
    /// No flow satisfies conservation within capacities.
    Infeasible,
    /// The candidate flow breaks capacities or conservation.
    InfeasibleFlow,
    Network(NetworkError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BudgetExceeded { size, budget } => {
                write!(f, "enumeration space {size} exceeds budget {budget}")
            }
            OracleError::Infeasible => f.write_str("instance has no feasible flow"),
            OracleError::InfeasibleFlow => f.write_str("flow violates capacities or conservation"),
            OracleError::Network(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OracleError {}

impl From<NetworkError> for OracleError {
    fn from(e: NetworkError) -> Self {
        OracleError::Network(e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForce {
    pub flow: FlowAssignment,
    pub value: f64,
    /// False when another feasible flow is within [`TIE_TOL`] of the optimum.
    pub unique: bool,
    pub feasible_count: u64,
}

struct Enumerator<'a, F> {
    edges: &'a [(NodeId, NodeId, i64)],
    rates: &'a [i64],
    checkable: Vec<Vec<NodeId>>,
    balance: Vec<i64>,
    flows: Vec<i64>,
    objective: F,
    best: Option<(f64, Vec<i64>)>,
    tied: bool,
    count: u64,
}

impl<F: FnMut(&[i64]) -> f64> Enumerator<'_, F> {
    fn visit(&mut self, e: usize) {
        if e == self.edges.len() {
            self.count += 1;
            let value = (self.objective)(&self.flows);
            match &self.best {
                Some((best, _)) if value > *best + TIE_TOL => {}
                Some((best, _)) if value >= *best - TIE_TOL => {
                    self.tied = true;
                    if value < *best {
                        self.best = Some((value, self.flows.clone()));
                    }
                }
                _ => {
                    self.best = Some((value, self.flows.clone()));
                    self.tied = false;
                }
            }
            return;
        }
        let (tail, head, cap) = self.edges[e];
        for x in 0..=cap {
            self.flows[e] = x;
            self.balance[tail] += x;
            self.balance[head] -= x;
            if self.checkable[e].iter().all(|&v| self.balance[v] == self.rates[v]) {
                self.visit(e + 1);
            }
            self.balance[tail] -= x;
            self.balance[head] += x;
        }
        self.flows[e] = 0;
    }
}

/// Minimizes `objective` over integer flows with `0 <= x_e <= cap` and
/// `out - in = rate` at every constrained node. A node's balance is checked
/// as soon as its last incident edge is assigned.
pub fn enumerate_min<F: FnMut(&[i64]) -> f64>(
    edges: &[(NodeId, NodeId, i64)],
    rates: &[i64],
    constrained: &[bool],
    budget: u128,
    objective: F,
) -> Result<(Vec<i64>, f64, bool, u64), OracleError> {
    let size = edges
        .iter()
        .try_fold(1u128, |acc, &(_, _, u)| acc.checked_mul(u as u128 + 1))
        .unwrap_or(u128::MAX);
    if size > budget {
        return Err(OracleError::BudgetExceeded { size, budget });
    }
    let nodes = rates.len();
    let mut last = vec![None; nodes];
    for (id, &(t, h, _)) in edges.iter().enumerate() {
        last[t] = Some(id);
        last[h] = Some(id);
    }
    let mut checkable = vec![Vec::new(); edges.len()];
    for v in 0..nodes {
        if !constrained[v] {
            continue;
        }
        match last[v] {
            Some(e) => checkable[e].push(v),
            None if rates[v] != 0 => return Err(OracleError::Infeasible),
            None => {}
        }
    }
    let mut en = Enumerator {
        edges,
        rates,
        checkable,
        balance: vec![0; nodes],
        flows: vec![0; edges.len()],
        objective,
        best: None,
        tied: false,
        count: 0,
    };
    en.visit(0);
    let (value, flows) = en.best.ok_or(OracleError::Infeasible)?;
    Ok((flows, value, !en.tied, en.count))
}

/// Exhaustive optimum of the balanced-routing objective.
pub fn brute_force(inst: &NetworkInstance, pen: &PenaltySpec) -> Result<BruteForce, OracleError> {
    brute_force_with_budget(inst, pen, ENUMERATION_BUDGET)
}

pub fn brute_force_with_budget(inst: &NetworkInstance, pen: &PenaltySpec, budget: u128) -> Result<BruteForce, OracleError> {
    let edges: Vec<(NodeId, NodeId, i64)> = inst.edges().iter().map(|e| (e.tail, e.head, e.capacity)).collect();
    let rates: Vec<i64> = (0..inst.num_nodes()).map(|v| inst.rate(v)).collect();
    let constrained: Vec<bool> = (0..inst.num_nodes()).map(|v| !inst.is_destination(v)).collect();
    let w = pen.weight();
    let phis: Vec<Vec<f64>> = (0..inst.num_sources())
        .map(|v| pen.phi(inst, v).map(|p| p.samples()))
        .collect::<Result<_, _>>()?;
    let (flows, value, unique, feasible_count) = enumerate_min(&edges, &rates, &constrained, budget, |x| {
        let mut value = 0.0;
        for (e, flow) in inst.edges().iter().zip(x) {
            value += (1.0 - w) * e.cost * *flow as f64;
        }
        for (v, phi) in phis.iter().enumerate() {
            let load: i64 = inst.out_edges(v).iter().map(|&e| x[e]).sum();
            value += w * phi[load as usize];
        }
        value
    })?;
    Ok(BruteForce {
        flow: FlowAssignment::new(flows),
        value,
        unique,
        feasible_count,
    })
}

/// Exhaustive optimum of a general [`BpProblem`]: sum of edge costs plus
/// load costs, under conservation at non-terminal nodes.
pub fn brute_force_problem(problem: &BpProblem, budget: u128) -> Result<BruteForce, OracleError> {
    let edges: Vec<(NodeId, NodeId, i64)> = problem
        .edges()
        .iter()
        .enumerate()
        .map(|(id, e)| (e.tail, e.head, problem.capacity(id)))
        .collect();
    let n = problem.num_nodes();
    let rates: Vec<i64> = (0..n).map(|v| problem.rate(v)).collect();
    let constrained: Vec<bool> = (0..n).map(|v| !problem.is_terminal(v)).collect();
    let (flows, value, unique, feasible_count) = enumerate_min(&edges, &rates, &constrained, budget, |x| {
        let mut value: f64 = problem.edges().iter().zip(x).map(|(e, f)| e.cost.value_at(*f)).sum();
        for v in 0..n {
            if let Some(cost) = problem.load_cost(v) {
                let load: i64 = problem.out_edges(v).iter().map(|&e| x[e]).sum();
                value += cost.value_at(load);
            }
        }
        value
    })?;
    Ok(BruteForce {
        flow: FlowAssignment::new(flows),
        value,
        unique,
        feasible_count,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArcKind {
    /// Push more flow along original edge `e`.
    Forward(EdgeId),
    /// Pull flow back along original edge `e`.
    Backward(EdgeId),
    /// Raise the load of node `v` by one unit.
    LoadUp(NodeId),
    /// Lower the load of node `v` by one unit.
    LoadDown(NodeId),
    /// Let destination `d` absorb one more unit.
    Absorb(NodeId),
    /// Let destination `d` absorb one unit less.
    Release(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualArc {
    pub from: usize,
    pub to: usize,
    /// `None` for unbounded arcs.
    pub capacity: Option<i64>,
    pub cost: f64,
    pub kind: ArcKind,
}

/// Residual graph of a feasible flow with unit marginal costs.
///
/// Vertices: `0..N` are the nodes of the instance, `N..N + n` the out-copies
/// of the source/relay nodes, and `N + n` the super-sink.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualGraph {
    num_vertices: usize,
    arcs: Vec<ResidualArc>,
}

impl ResidualGraph {
    pub fn build(inst: &NetworkInstance, pen: &PenaltySpec, x: &FlowAssignment) -> Result<Self, OracleError> {
        if !x.is_feasible(inst) {
            return Err(OracleError::InfeasibleFlow);
        }
        let w = pen.weight();
        let nodes = inst.num_nodes();
        let n = inst.num_sources();
        let out_copy = |v: NodeId| if inst.is_destination(v) { v } else { nodes + v };
        let sink = nodes + n;
        let mut arcs = Vec::new();
        for (id, e) in inst.edges().iter().enumerate() {
            let flow = x.flows[id];
            let cost = (1.0 - w) * e.cost;
            if flow < e.capacity {
                arcs.push(ResidualArc {
                    from: out_copy(e.tail),
                    to: e.head,
                    capacity: Some(e.capacity - flow),
                    cost,
                    kind: ArcKind::Forward(id),
                });
            }
            if flow > 0 {
                arcs.push(ResidualArc {
                    from: e.head,
                    to: out_copy(e.tail),
                    capacity: Some(flow),
                    cost: -cost,
                    kind: ArcKind::Backward(id),
                });
            }
        }
        for (v, load) in x.loads(inst).into_iter().enumerate() {
            let phi = pen.phi(inst, v)?;
            if let Some(up) = phi.right_slope(load) {
                arcs.push(ResidualArc {
                    from: v,
                    to: nodes + v,
                    capacity: Some(phi.hi() - load),
                    cost: w * up,
                    kind: ArcKind::LoadUp(v),
                });
            }
            if let Some(down) = phi.left_slope(load) {
                arcs.push(ResidualArc {
                    from: nodes + v,
                    to: v,
                    capacity: Some(load),
                    cost: -w * down,
                    kind: ArcKind::LoadDown(v),
                });
            }
        }
        for d in n..nodes {
            for (from, to, kind) in [(d, sink, ArcKind::Absorb(d)), (sink, d, ArcKind::Release(d))] {
                arcs.push(ResidualArc {
                    from,
                    to,
                    capacity: None,
                    cost: 0.0,
                    kind,
                });
            }
        }
        Ok(ResidualGraph {
            num_vertices: sink + 1,
            arcs,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn arcs(&self) -> &[ResidualArc] {
        &self.arcs
    }

    /// Arc indices of a directed cycle with negative cost, if one exists.
    ///
    /// Bellman-Ford from a virtual source, relaxing only on improvements
    /// larger than `tol / V`: every cycle cheaper than `-tol` keeps some arc
    /// relaxable forever and is found; cycles of non-negative cost never are.
    pub fn negative_cycle(&self, tol: f64) -> Option<Vec<usize>> {
        let v = self.num_vertices;
        let margin = tol / v as f64;
        let mut dist = vec![0.0f64; v];
        let mut pred: Vec<Option<usize>> = vec![None; v];
        let mut last = None;
        for _ in 0..v {
            last = None;
            for (id, arc) in self.arcs.iter().enumerate() {
                let cand = dist[arc.from] + arc.cost;
                if cand < dist[arc.to] - margin {
                    dist[arc.to] = cand;
                    pred[arc.to] = Some(id);
                    last = Some(arc.to);
                }
            }
            last?;
        }
        // Still relaxing after V rounds: walk back V steps to land on the cycle.
        let mut at = last?;
        for _ in 0..v {
            at = self.arcs[pred[at]?].from;
        }
        let start = at;
        let mut cycle = Vec::new();
        loop {
            let id = pred[at]?;
            cycle.push(id);
            at = self.arcs[id].from;
            if at == start {
                break;
            }
        }
        cycle.reverse();
        Some(cycle)
    }

    pub fn cycle_cost(&self, cycle: &[usize]) -> f64 {
        cycle.iter().map(|&a| self.arcs[a].cost).sum()
    }
}

/// True iff the feasible flow `x` has no residual cycle cheaper than
/// [`NEGATIVE_CYCLE_TOL`], i.e. `x` is optimal.
pub fn certify(inst: &NetworkInstance, pen: &PenaltySpec, x: &FlowAssignment) -> Result<bool, OracleError> {
    let g = ResidualGraph::build(inst, pen, x)?;
    Ok(g.negative_cycle(NEGATIVE_CYCLE_TOL).is_none())
}

/// Marginal objective change of pushing one more unit through edge `e`
/// and of pulling one unit back, counting the tail's load change. `None`
/// where the capacity bound or zero flow forbids the move.
pub fn edge_marginal_costs(inst: &NetworkInstance, pen: &PenaltySpec, x: &FlowAssignment, e: EdgeId) -> Result<(Option<f64>, Option<f64>), OracleError> {
    let edge = inst.edge(e);
    let w = pen.weight();
    let base = (1.0 - w) * edge.cost;
    let (up, down) = if inst.is_destination(edge.tail) {
        (Some(0.0), Some(0.0))
    } else {
        let load = x.loads(inst)[edge.tail];
        let phi = pen.phi(inst, edge.tail)?;
        (phi.right_slope(load), phi.left_slope(load))
    };
    let forward = if x.flows[e] < edge.capacity { up.map(|s| base + w * s) } else { None };
    let backward = if x.flows[e] > 0 { down.map(|s| -base - w * s) } else { None };
    Ok((forward, backward))
}
