//! Load-balanced routing by min-sum belief propagation.
//!
//! Routes integer flows from source nodes to destinations, minimizing
//! `(1 - w) sum c_e x_e + w sum_i phi_i(load_i)` where `phi_i` is a convex
//! penalty on the outgoing flow of node `i`. Every BP message is a
//! piecewise-linear convex function ([`plc::Plc`]), so updates are exact.
//!
//! Besides the solver ([`bp`]) the crate carries the node-splitting
//! baseline ([`nodesplit`]), exhaustive and residual-graph oracles
//! ([`oracle`]), instance generation ([`network`]) and Jain's index
//! ([`metrics`]). It is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod bp;
mod maxflow;
pub mod metrics;
pub mod network;
pub mod nodesplit;
pub mod oracle;
pub mod plc;

pub use bp::{solve, BpError, BpProblem, MessageState, SolveResult, SolverConfig};
pub use network::{
    check_feasible, generate_geometric, generate_random, objective_value, perturb_costs, Edge, FlowAssignment, GeometricParams,
    NetworkError, NetworkInstance, PenaltySpec, RandomParams,
};
pub use nodesplit::{solve_split, split, SplitInstance};
pub use oracle::{brute_force, certify, OracleError};
pub use plc::{inf_convolve, Plc, PlcError};
