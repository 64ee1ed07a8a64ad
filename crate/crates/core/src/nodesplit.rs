//! The node-splitting baseline: turn node-load penalties into edge costs
//! and run the same BP engine on the transformed graph.
//!
//! Each source/relay node `v` becomes `v_in` (keeps id `v` and the rate)
//! and `v_out` (id `N + v`), joined by an internal edge `v_in -> v_out`
//! whose cost is `w phi_v` and whose capacity is the sum of `v`'s outgoing
//! capacities. Original edges keep their ids and leave from `v_out`;
//! internal edges follow them. Destinations are not split.

use alloc::vec::Vec;

use crate::bp::{iterate, BpEdge, BpError, BpProblem, SolveResult, SolverConfig};
use crate::network::{EdgeId, FlowAssignment, NetworkError, NetworkInstance, NodeId, PenaltySpec};
use crate::oracle;
use crate::plc::Plc;

#[derive(Clone, Debug, PartialEq)]
pub struct SplitInstance {
    problem: BpProblem,
    original: NetworkInstance,
    penalty: PenaltySpec,
}

impl SplitInstance {
    pub fn problem(&self) -> &BpProblem {
        &self.problem
    }

    pub fn original(&self) -> &NetworkInstance {
        &self.original
    }

    pub fn penalty(&self) -> &PenaltySpec {
        &self.penalty
    }

    /// Id of the out-copy of source/relay node `v`.
    pub fn out_copy(&self, v: NodeId) -> NodeId {
        assert!(!self.original.is_destination(v));
        self.original.num_nodes() + v
    }

    /// Id of the internal edge of source/relay node `v`.
    pub fn internal_edge(&self, v: NodeId) -> EdgeId {
        assert!(!self.original.is_destination(v));
        self.original.edges().len() + v
    }

    /// Split-graph flow carrying the same routes as `x`: internal edges
    /// carry the node loads.
    pub fn lift(&self, x: &FlowAssignment) -> Vec<i64> {
        let mut flows = x.flows.clone();
        flows.extend(x.loads(&self.original));
        flows
    }

    /// Original-edge part of a split-graph flow.
    pub fn project(&self, flows: &[i64]) -> FlowAssignment {
        FlowAssignment::new(flows[..self.original.edges().len()].to_vec())
    }

    /// Sum of split-graph edge costs, `+inf` if conservation or a capacity
    /// fails anywhere in the split graph.
    pub fn objective(&self, flows: &[i64]) -> f64 {
        let p = &self.problem;
        if flows.len() != p.edges().len() {
            return f64::INFINITY;
        }
        for v in 0..p.num_nodes() {
            if p.is_terminal(v) {
                continue;
            }
            let out: i64 = p.out_edges(v).iter().map(|&e| flows[e]).sum();
            let inn: i64 = p.in_edges(v).iter().map(|&e| flows[e]).sum();
            if out - inn != p.rate(v) {
                return f64::INFINITY;
            }
        }
        p.edges().iter().zip(flows).map(|(e, x)| e.cost.value_at(*x)).sum()
    }
}

pub fn split(inst: &NetworkInstance, pen: &PenaltySpec) -> Result<SplitInstance, NetworkError> {
    let nodes = inst.num_nodes();
    let n = inst.num_sources();
    let w = pen.weight();
    let out_copy = |v: NodeId| if inst.is_destination(v) { v } else { nodes + v };

    let mut edges: Vec<BpEdge> = inst
        .edges()
        .iter()
        .map(|e| BpEdge {
            tail: out_copy(e.tail),
            head: e.head,
            cost: Plc::linear(0, e.capacity, 0.0, (1.0 - w) * e.cost),
        })
        .collect();
    for v in 0..n {
        edges.push(BpEdge {
            tail: v,
            head: nodes + v,
            cost: pen.phi(inst, v)?.scale(w),
        });
    }
    let total = nodes + n;
    let terminal = (0..total).map(|v| v < nodes && inst.is_destination(v)).collect();
    let rates = (0..total).map(|v| if v < nodes { inst.rate(v) } else { 0 }).collect();
    Ok(SplitInstance {
        problem: BpProblem::new(terminal, rates, edges, alloc::vec![None; total]),
        original: inst.clone(),
        penalty: pen.clone(),
    })
}

/// Runs BP on the split graph. Stability, `t_star` and the certificate are
/// judged on the original-edge flows.
pub fn solve_split(s: &SplitInstance, cfg: &SolverConfig) -> Result<SolveResult, BpError> {
    let m = s.original.edges().len();
    iterate(
        &s.problem,
        cfg,
        |mut x| {
            x.truncate(m);
            x
        },
        |x| FlowAssignment::new(x.to_vec()).is_feasible(&s.original),
        |x| Ok(oracle::certify(&s.original, &s.penalty, &FlowAssignment::new(x.to_vec()))?),
    )
}
