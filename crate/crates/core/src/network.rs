//! Problem instances: directed graph, costs, capacities, rates, and the
//! node-load penalty.
//!
//! Node ids are `0..n` for sources and relays and `n..n + m` for
//! destinations.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::maxflow::MaxFlow;
use crate::plc::{Plc, PlcError};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkError {
    NodeOutOfRange { node: NodeId },
    SelfLoop { node: NodeId },
    ParallelEdge { tail: NodeId, head: NodeId },
    BadCost { edge: EdgeId, cost: f64 },
    BadCapacity { edge: EdgeId, capacity: i64 },
    BadRate { node: NodeId, rate: i64 },
    RateCount { expected: usize, got: usize },
    BadParameter(&'static str),
    /// No connected realization within the attempt budget.
    GenerationFailed { attempts: usize },
    Penalty { node: NodeId, source: PlcError },
    PenaltyTooShort { node: NodeId, needed: usize, got: usize },
    PenaltyNotIncreasing { node: NodeId },
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::NodeOutOfRange { node } => write!(f, "node {node} out of range"),
            NetworkError::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            NetworkError::ParallelEdge { tail, head } => {
                write!(f, "duplicate edge {tail} -> {head}")
            }
            NetworkError::BadCost { edge, cost } => {
                write!(f, "edge {edge} has non-positive or non-finite cost {cost}")
            }
            NetworkError::BadCapacity { edge, capacity } => {
                write!(f, "edge {edge} has non-positive capacity {capacity}")
            }
            NetworkError::BadRate { node, rate } => write!(f, "node {node} has negative rate {rate}"),
            NetworkError::RateCount { expected, got } => {
                write!(f, "expected {expected} rates, got {got}")
            }
            NetworkError::BadParameter(what) => write!(f, "invalid parameter: {what}"),
            NetworkError::GenerationFailed { attempts } => {
                write!(f, "no connected network after {attempts} attempts")
            }
            NetworkError::Penalty { node, source } => {
                write!(f, "penalty for node {node}: {source}")
            }
            NetworkError::PenaltyTooShort { node, needed, got } => write!(
                f,
                "penalty samples for node {node} cover {got} loads, need {needed}"
            ),
            NetworkError::PenaltyNotIncreasing { node } => {
                write!(f, "penalty for node {node} is not strictly increasing")
            }
        }
    }
}

impl core::error::Error for NetworkError {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub tail: NodeId,
    pub head: NodeId,
    pub cost: f64,
    pub capacity: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkInstance {
    num_sources: usize,
    num_destinations: usize,
    rates: Vec<i64>,
    edges: Vec<Edge>,
    positions: Option<Vec<(f64, f64)>>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
}

impl NetworkInstance {
    /// `rates` has one entry per source/relay node (`n` entries).
    pub fn new(n: usize, m: usize, rates: Vec<i64>, edges: Vec<Edge>) -> Result<Self, NetworkError> {
        if rates.len() != n {
            return Err(NetworkError::RateCount {
                expected: n,
                got: rates.len(),
            });
        }
        if let Some(node) = rates.iter().position(|r| *r < 0) {
            return Err(NetworkError::BadRate {
                node,
                rate: rates[node],
            });
        }
        let total = n + m;
        let mut out_edges = vec![Vec::new(); total];
        let mut in_edges = vec![Vec::new(); total];
        for (id, e) in edges.iter().enumerate() {
            for node in [e.tail, e.head] {
                if node >= total {
                    return Err(NetworkError::NodeOutOfRange { node });
                }
            }
            if e.tail == e.head {
                return Err(NetworkError::SelfLoop { node: e.tail });
            }
            if !(e.cost > 0.0 && e.cost.is_finite()) {
                return Err(NetworkError::BadCost { edge: id, cost: e.cost });
            }
            if e.capacity < 1 {
                return Err(NetworkError::BadCapacity {
                    edge: id,
                    capacity: e.capacity,
                });
            }
            if out_edges[e.tail].iter().any(|&o: &EdgeId| edges[o].head == e.head) {
                return Err(NetworkError::ParallelEdge {
                    tail: e.tail,
                    head: e.head,
                });
            }
            out_edges[e.tail].push(id);
            in_edges[e.head].push(id);
        }
        Ok(NetworkInstance {
            num_sources: n,
            num_destinations: m,
            rates,
            edges,
            positions: None,
            out_edges,
            in_edges,
        })
    }

    pub fn with_positions(mut self, positions: Vec<(f64, f64)>) -> Self {
        assert_eq!(positions.len(), self.num_nodes(), "one position per node");
        self.positions = Some(positions);
        self
    }

    /// Number of source/relay nodes, `n`.
    pub fn num_sources(&self) -> usize {
        self.num_sources
    }

    /// Number of destination nodes, `m`.
    pub fn num_destinations(&self) -> usize {
        self.num_destinations
    }

    pub fn num_nodes(&self) -> usize {
        self.num_sources + self.num_destinations
    }

    pub fn is_destination(&self, v: NodeId) -> bool {
        v >= self.num_sources
    }

    /// Generation rate; zero for relays and destinations.
    pub fn rate(&self, v: NodeId) -> i64 {
        self.rates.get(v).copied().unwrap_or(0)
    }

    pub fn rates(&self) -> &[i64] {
        &self.rates
    }

    pub fn total_rate(&self) -> i64 {
        self.rates.iter().sum()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    /// Largest load node `v` can carry: the sum of its outgoing capacities.
    pub fn max_load(&self, v: NodeId) -> i64 {
        self.out_edges[v].iter().map(|&e| self.edges[e].capacity).sum()
    }

    pub fn positions(&self) -> Option<&[(f64, f64)]> {
        self.positions.as_deref()
    }

    /// Copy with every edge cost replaced by `f(edge_id, edge)`.
    pub fn map_costs<F: FnMut(EdgeId, &Edge) -> f64>(&self, mut f: F) -> Self {
        let mut out = self.clone();
        for (id, e) in out.edges.iter_mut().enumerate() {
            e.cost = f(id, &self.edges[id]);
        }
        out
    }

    /// Copy with every edge capacity set to `capacity`.
    pub fn with_uniform_capacity(&self, capacity: i64) -> Result<Self, NetworkError> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { capacity, ..*e })
            .collect();
        let inst = NetworkInstance::new(self.num_sources, self.num_destinations, self.rates.clone(), edges)?;
        Ok(match &self.positions {
            Some(p) => inst.with_positions(p.clone()),
            None => inst,
        })
    }
}

/// Which penalty function to realize on each node.
#[derive(Clone, Debug, PartialEq)]
pub enum PenaltyKind {
    /// `y^alpha` at every integer load, linear in between.
    PowerLaw { alpha: f64 },
    /// Explicit values at loads `0, 1, 2, ...`, one list per source/relay node.
    Samples(Vec<Vec<f64>>),
}

/// The load penalty and the cost/load trade-off weight `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltySpec {
    kind: PenaltyKind,
    weight: f64,
}

impl PenaltySpec {
    pub fn power_law(alpha: f64, weight: f64) -> Result<Self, NetworkError> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(NetworkError::BadParameter("alpha must be >= 1"));
        }
        Self::with_kind(PenaltyKind::PowerLaw { alpha }, weight)
    }

    pub fn samples(per_node: Vec<Vec<f64>>, weight: f64) -> Result<Self, NetworkError> {
        Self::with_kind(PenaltyKind::Samples(per_node), weight)
    }

    /// Pure minimum-cost routing (`w = 0`).
    pub fn min_cost() -> Self {
        PenaltySpec {
            kind: PenaltyKind::PowerLaw { alpha: 1.0 },
            weight: 0.0,
        }
    }

    fn with_kind(kind: PenaltyKind, weight: f64) -> Result<Self, NetworkError> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(NetworkError::BadParameter("w must lie in [0, 1]"));
        }
        Ok(PenaltySpec { kind, weight })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn kind(&self) -> &PenaltyKind {
        &self.kind
    }

    /// The unweighted penalty of node `v` on loads `0..=max_load(v)`.
    pub fn phi(&self, inst: &NetworkInstance, v: NodeId) -> Result<Plc, NetworkError> {
        let top = inst.max_load(v) as usize;
        let values: Vec<f64> = match &self.kind {
            PenaltyKind::PowerLaw { alpha } => {
                (0..=top).map(|y| libm::pow(y as f64, *alpha)).collect()
            }
            PenaltyKind::Samples(per_node) => {
                let s = per_node.get(v).map(Vec::as_slice).unwrap_or(&[]);
                if s.len() < top + 1 {
                    return Err(NetworkError::PenaltyTooShort {
                        node: v,
                        needed: top + 1,
                        got: s.len(),
                    });
                }
                s[..=top].to_vec()
            }
        };
        if values.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(core::cmp::Ordering::Greater)) {
            return Err(NetworkError::PenaltyNotIncreasing { node: v });
        }
        Plc::from_integer_samples(&values).map_err(|source| NetworkError::Penalty { node: v, source })
    }
}

/// Integer flow on every edge, indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlowAssignment {
    pub flows: Vec<i64>,
}

impl FlowAssignment {
    pub fn new(flows: Vec<i64>) -> Self {
        FlowAssignment { flows }
    }

    pub fn zero(inst: &NetworkInstance) -> Self {
        FlowAssignment {
            flows: vec![0; inst.edges().len()],
        }
    }

    /// Outgoing flow of every source/relay node.
    pub fn loads(&self, inst: &NetworkInstance) -> Vec<i64> {
        (0..inst.num_sources())
            .map(|v| inst.out_edges(v).iter().map(|&e| self.flows[e]).sum())
            .collect()
    }

    pub fn max_load(&self, inst: &NetworkInstance) -> i64 {
        self.loads(inst).into_iter().max().unwrap_or(0)
    }

    /// `sum c_e x_e`.
    pub fn total_cost(&self, inst: &NetworkInstance) -> f64 {
        inst.edges()
            .iter()
            .zip(&self.flows)
            .map(|(e, x)| e.cost * *x as f64)
            .sum()
    }

    pub fn within_capacity(&self, inst: &NetworkInstance) -> bool {
        self.flows.len() == inst.edges().len()
            && inst
                .edges()
                .iter()
                .zip(&self.flows)
                .all(|(e, x)| (0..=e.capacity).contains(x))
    }

    /// Out-flow minus in-flow equals the rate at every source/relay node.
    pub fn conserves(&self, inst: &NetworkInstance) -> bool {
        self.flows.len() == inst.edges().len()
            && (0..inst.num_sources()).all(|v| {
                let out: i64 = inst.out_edges(v).iter().map(|&e| self.flows[e]).sum();
                let inn: i64 = inst.in_edges(v).iter().map(|&e| self.flows[e]).sum();
                out - inn == inst.rate(v)
            })
    }

    pub fn is_feasible(&self, inst: &NetworkInstance) -> bool {
        self.within_capacity(inst) && self.conserves(inst)
    }
}

/// `(1 - w) sum c_e x_e + w sum_i phi_i(y_i)`, or `+inf` when `x` breaks
/// capacities or conservation.
pub fn objective_value(inst: &NetworkInstance, pen: &PenaltySpec, x: &FlowAssignment) -> f64 {
    if !x.is_feasible(inst) {
        return f64::INFINITY;
    }
    let w = pen.weight();
    let mut value = (1.0 - w) * x.total_cost(inst);
    if w > 0.0 {
        for (v, load) in x.loads(inst).into_iter().enumerate() {
            let phi = match pen.phi(inst, v) {
                Ok(phi) => phi,
                Err(_) => return f64::INFINITY,
            };
            value += w * phi.value_at(load);
        }
    }
    value
}

/// Whether some flow meets every rate within the capacities: max-flow from a
/// super-source feeding each node its rate to a super-sink fed by every
/// destination must saturate the total rate.
pub fn check_feasible(inst: &NetworkInstance) -> bool {
    let nodes = inst.num_nodes();
    let (source, sink) = (nodes, nodes + 1);
    let mut g = MaxFlow::new(nodes + 2);
    for e in inst.edges() {
        g.add_arc(e.tail, e.head, e.capacity);
    }
    let demand = inst.total_rate();
    for v in 0..inst.num_sources() {
        if inst.rate(v) > 0 {
            g.add_arc(source, v, inst.rate(v));
        }
    }
    for d in inst.num_sources()..nodes {
        g.add_arc(d, sink, demand.max(1));
    }
    g.run(source, sink) == demand
}

/// Adds an independent uniform draw from `(0, epsilon)` to every edge cost.
pub fn perturb_costs(inst: &NetworkInstance, epsilon: f64, seed: u64) -> NetworkInstance {
    assert!(epsilon > 0.0, "perturbation size must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    inst.map_costs(|_, e| {
        let delta = loop {
            let d = rng.gen_range(0.0..epsilon);
            if d > 0.0 {
                break d;
            }
        };
        e.cost + delta
    })
}

/// Parameters of the random geometric network.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricParams {
    pub n: usize,
    pub m: usize,
    /// Number of nodes generating one unit each.
    pub k: usize,
    /// Nodes closer than `radius_coeff / sqrt(n)` are linked both ways.
    pub radius_coeff: f64,
    pub cost_range: (f64, f64),
    /// Capacity of every edge; `None` means the total rate `k`.
    pub capacity: Option<i64>,
    pub max_attempts: usize,
}

impl Default for GeometricParams {
    fn default() -> Self {
        GeometricParams {
            n: 50,
            m: 1,
            k: 15,
            radius_coeff: 1.6,
            cost_range: (1.0, 3.0),
            capacity: None,
            max_attempts: 1000,
        }
    }
}

impl GeometricParams {
    pub fn radius(&self) -> f64 {
        self.radius_coeff / libm::sqrt(self.n as f64)
    }
}

/// Random geometric network in the unit square.
///
/// Sources/relays are uniform in the square. A single destination sits at
/// the centre; with several, they are uniform too. Realizations whose
/// undirected graph is disconnected are discarded and redrawn from the same
/// RNG stream. Sources are then chosen uniformly and every directed edge
/// gets an independent uniform cost.
pub fn generate_geometric(p: &GeometricParams, seed: u64) -> Result<NetworkInstance, NetworkError> {
    if p.n == 0 || p.m == 0 {
        return Err(NetworkError::BadParameter("need n >= 1 and m >= 1"));
    }
    if p.k > p.n {
        return Err(NetworkError::BadParameter("k must not exceed n"));
    }
    let (cmin, cmax) = p.cost_range;
    if !(cmin > 0.0 && cmin <= cmax && cmax.is_finite()) {
        return Err(NetworkError::BadParameter("cost range must satisfy 0 < min <= max"));
    }
    let capacity = p.capacity.unwrap_or(p.k as i64).max(1);
    let total = p.n + p.m;
    let radius = p.radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..p.max_attempts {
        let mut positions: Vec<(f64, f64)> = (0..p.n).map(|_| (rng.gen(), rng.gen())).collect();
        if p.m == 1 {
            positions.push((0.5, 0.5));
        } else {
            positions.extend((0..p.m).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())));
        }
        let mut pairs = Vec::new();
        for i in 0..total {
            for j in i + 1..total {
                let (dx, dy) = (positions[i].0 - positions[j].0, positions[i].1 - positions[j].1);
                if libm::sqrt(dx * dx + dy * dy) < radius {
                    pairs.push((i, j));
                }
            }
        }
        if !connected(total, &pairs) {
            continue;
        }
        let mut rates = vec![0i64; p.n];
        for v in index::sample(&mut rng, p.n, p.k) {
            rates[v] = 1;
        }
        let mut edges = Vec::with_capacity(2 * pairs.len());
        for &(i, j) in &pairs {
            for (tail, head) in [(i, j), (j, i)] {
                let cost = if cmin == cmax { cmin } else { rng.gen_range(cmin..cmax) };
                edges.push(Edge {
                    tail,
                    head,
                    cost,
                    capacity,
                });
            }
        }
        return Ok(NetworkInstance::new(p.n, p.m, rates, edges)?.with_positions(positions));
    }
    Err(NetworkError::GenerationFailed {
        attempts: p.max_attempts,
    })
}

fn connected(nodes: usize, pairs: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut components = nodes;
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components <= 1
}

/// Parameters of a small arbitrary directed network, used where exhaustive
/// search must stay cheap.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    /// Upper bound on the total node count `n + m`; at least 2.
    pub max_nodes: usize,
    pub max_destinations: usize,
    pub max_edges: usize,
    pub max_capacity: i64,
    pub max_rate: i64,
    pub cost_range: (f64, f64),
    pub max_attempts: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            max_nodes: 6,
            max_destinations: 2,
            max_edges: 10,
            max_capacity: 3,
            max_rate: 2,
            cost_range: (1.0, 3.0),
            max_attempts: 10_000,
        }
    }
}

/// A random feasible network within the limits of `p`: node counts, edge
/// set, capacities, rates (some positive) and costs are uniform draws;
/// infeasible draws are redrawn.
pub fn generate_random(p: &RandomParams, seed: u64) -> Result<NetworkInstance, NetworkError> {
    if p.max_nodes < 2 || p.max_destinations == 0 || p.max_capacity < 1 || p.max_rate < 1 || p.max_edges == 0 {
        return Err(NetworkError::BadParameter("random network limits too small"));
    }
    let (cmin, cmax) = p.cost_range;
    if !(cmin > 0.0 && cmin <= cmax && cmax.is_finite()) {
        return Err(NetworkError::BadParameter("cost range must satisfy 0 < min <= max"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..p.max_attempts {
        let total = rng.gen_range(2..=p.max_nodes);
        let m = rng.gen_range(1..=p.max_destinations.min(total - 1));
        let n = total - m;
        // Destinations only receive, so every candidate edge leaves V_s.
        let candidates: Vec<(usize, usize)> = (0..n)
            .flat_map(|t| (0..total).filter(move |&h| h != t).map(move |h| (t, h)))
            .collect();
        let count = rng.gen_range(1..=p.max_edges.min(candidates.len()));
        let mut picked: Vec<usize> = index::sample(&mut rng, candidates.len(), count).into_vec();
        picked.sort_unstable();
        let edges: Vec<Edge> = picked
            .iter()
            .map(|&c| Edge {
                tail: candidates[c].0,
                head: candidates[c].1,
                cost: if cmin == cmax { cmin } else { rng.gen_range(cmin..cmax) },
                capacity: rng.gen_range(1..=p.max_capacity),
            })
            .collect();
        let rates: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=p.max_rate)).collect();
        if rates.iter().all(|&r| r == 0) {
            continue;
        }
        let inst = NetworkInstance::new(n, m, rates, edges)?;
        if check_feasible(&inst) {
            return Ok(inst);
        }
    }
    Err(NetworkError::GenerationFailed {
        attempts: p.max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(tail: NodeId, head: NodeId, cost: f64, capacity: i64) -> Edge {
        Edge {
            tail,
            head,
            cost,
            capacity,
        }
    }

    #[test]
    fn rejects_malformed_instances() {
        let bad = |edges, rates| NetworkInstance::new(2, 1, rates, edges);
        assert_eq!(
            bad(vec![edge(0, 0, 1.0, 1)], vec![0, 0]),
            Err(NetworkError::SelfLoop { node: 0 })
        );
        assert!(matches!(
            bad(vec![edge(0, 1, 0.0, 1)], vec![0, 0]),
            Err(NetworkError::BadCost { .. })
        ));
        assert!(matches!(
            bad(vec![edge(0, 1, 1.0, 0)], vec![0, 0]),
            Err(NetworkError::BadCapacity { .. })
        ));
        assert!(matches!(
            bad(vec![edge(0, 1, 1.0, 1), edge(0, 1, 2.0, 1)], vec![0, 0]),
            Err(NetworkError::ParallelEdge { .. })
        ));
        assert!(matches!(
            bad(vec![edge(0, 5, 1.0, 1)], vec![0, 0]),
            Err(NetworkError::NodeOutOfRange { node: 5 })
        ));
        assert!(matches!(bad(vec![], vec![0]), Err(NetworkError::RateCount { .. })));
        assert!(matches!(bad(vec![], vec![-1, 0]), Err(NetworkError::BadRate { .. })));
    }

    #[test]
    fn random_networks_respect_limits() {
        let p = RandomParams::default();
        for seed in 0..50 {
            let inst = generate_random(&p, seed).unwrap();
            assert!(inst.num_nodes() <= 6 && inst.edges().len() <= 10);
            assert!(inst.edges().iter().all(|e| (1..=3).contains(&e.capacity) && !inst.is_destination(e.tail)));
            assert!(inst.rates().iter().all(|r| (0..=2).contains(r)) && inst.total_rate() > 0);
            assert!(check_feasible(&inst));
            assert_eq!(inst, generate_random(&p, seed).unwrap());
        }
    }

    #[test]
    fn feasibility_by_max_flow() {
        let single = |r, u| NetworkInstance::new(1, 1, vec![r], vec![edge(0, 1, 1.0, u)]).unwrap();
        assert!(check_feasible(&single(1, 1)));
        assert!(!check_feasible(&single(2, 1)));
        // s -> a -> d: edge a->d would have to carry both units.
        let path = NetworkInstance::new(2, 1, vec![1, 1], vec![edge(0, 1, 1.0, 1), edge(1, 2, 1.0, 1)]).unwrap();
        assert!(!check_feasible(&path));
        let wider = path.with_uniform_capacity(2).unwrap();
        assert!(check_feasible(&wider));
    }

    #[test]
    fn objective_on_a_path() {
        let inst = NetworkInstance::new(2, 1, vec![1, 0], vec![edge(0, 1, 1.0, 1), edge(1, 2, 2.0, 1)]).unwrap();
        let x = FlowAssignment::new(vec![1, 1]);
        let pen = PenaltySpec::power_law(2.0, 0.5).unwrap();
        assert!((objective_value(&inst, &pen, &x) - 2.5).abs() < 1e-12);
        assert_eq!(objective_value(&inst, &PenaltySpec::min_cost(), &x), 3.0);
        let bad = FlowAssignment::new(vec![1, 0]);
        assert_eq!(objective_value(&inst, &pen, &bad), f64::INFINITY);
    }

    #[test]
    fn zero_flow_objective_is_penalty_at_zero() {
        let inst = NetworkInstance::new(2, 1, vec![0, 0], vec![edge(0, 2, 1.0, 2), edge(1, 2, 1.0, 2)]).unwrap();
        let pen = PenaltySpec::samples(vec![vec![1.0, 2.0, 4.0], vec![0.5, 1.0, 3.0]], 0.25).unwrap();
        let v = objective_value(&inst, &pen, &FlowAssignment::zero(&inst));
        assert!((v - 0.25 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn penalty_validation() {
        let inst = NetworkInstance::new(1, 1, vec![1], vec![edge(0, 1, 1.0, 2)]).unwrap();
        let short = PenaltySpec::samples(vec![vec![0.0, 1.0]], 0.5).unwrap();
        assert!(matches!(short.phi(&inst, 0), Err(NetworkError::PenaltyTooShort { .. })));
        let flat = PenaltySpec::samples(vec![vec![0.0, 1.0, 1.0]], 0.5).unwrap();
        assert!(matches!(flat.phi(&inst, 0), Err(NetworkError::PenaltyNotIncreasing { .. })));
        assert!(PenaltySpec::power_law(0.5, 0.5).is_err());
        assert!(PenaltySpec::power_law(2.0, 1.5).is_err());
        let phi = PenaltySpec::power_law(2.0, 0.5).unwrap().phi(&inst, 0).unwrap();
        assert_eq!(phi.slopes(), &[1.0, 3.0]);
    }

    #[test]
    fn paper_radius() {
        let p = GeometricParams::default();
        assert!((p.radius() - 0.226_274_169_979_695_2).abs() < 1e-12);
    }

    #[test]
    fn geometric_generation_is_deterministic_and_bidirectional() {
        let p = GeometricParams::default();
        let a = generate_geometric(&p, 7).unwrap();
        let b = generate_geometric(&p, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_nodes(), 51);
        assert_eq!(a.total_rate(), 15);
        assert_eq!(a.positions().unwrap()[50], (0.5, 0.5));
        for e in a.edges() {
            assert_eq!(e.capacity, 15);
            assert!((1.0..3.0).contains(&e.cost));
            assert!(a.out_edges(e.head).iter().any(|&r| a.edge(r).head == e.tail));
        }
        assert!(check_feasible(&a));
        assert_ne!(a, generate_geometric(&p, 8).unwrap());
    }

    #[test]
    fn two_close_nodes_form_one_pair() {
        let p = GeometricParams {
            n: 2,
            k: 1,
            radius_coeff: 10.0,
            ..GeometricParams::default()
        };
        let inst = generate_geometric(&p, 3).unwrap();
        // Radius 7.07 covers the whole square: three bidirectional pairs.
        assert_eq!(inst.edges().len(), 6);
    }

    #[test]
    fn hopeless_radius_exhausts_attempts() {
        let p = GeometricParams {
            radius_coeff: 1e-6,
            max_attempts: 5,
            ..GeometricParams::default()
        };
        assert_eq!(
            generate_geometric(&p, 1),
            Err(NetworkError::GenerationFailed { attempts: 5 })
        );
    }

    #[test]
    fn perturbation_is_small_seeded_and_breaks_ties() {
        let inst = NetworkInstance::new(2, 1, vec![1, 0], vec![edge(0, 2, 1.0, 1), edge(1, 2, 1.0, 1)]).unwrap();
        let a = perturb_costs(&inst, 1e-6, 11);
        let b = perturb_costs(&inst, 1e-6, 11);
        assert_eq!(a, b);
        for (orig, new) in inst.edges().iter().zip(a.edges()) {
            assert!(new.cost > orig.cost && new.cost - orig.cost < 1e-6);
        }
        assert_ne!(a.edge(0).cost, a.edge(1).cost);
        assert_eq!(inst.edge(0).cost, 1.0);
    }
}
