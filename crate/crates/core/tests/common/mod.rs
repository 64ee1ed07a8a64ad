//! Random inputs and independent exhaustive references shared by the
//! integration tests (and included by the harness acceptance suite).
#![allow(dead_code)]

use balroute_core::bp::{init_messages, sweep, update_message, BpEdge, BpProblem};
use balroute_core::oracle::brute_force;
use balroute_core::{
    certify, generate_random, perturb_costs, solve, FlowAssignment, NetworkInstance, PenaltySpec, Plc, RandomParams,
    SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random convex function on a random sub-interval of `[lo, hi]`. Half the
/// draws use small integer slopes so that ties between slopes are common.
pub fn random_plc(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Plc {
    let a = rng.gen_range(lo..=hi);
    let b = rng.gen_range(a..=hi);
    random_plc_on(rng, a, b)
}

/// Random convex function with domain exactly `[a, b]`.
pub fn random_plc_on(rng: &mut ChaCha8Rng, a: i64, b: i64) -> Plc {
    let integral = rng.gen_bool(0.5);
    let mut slopes: Vec<f64> = (a..b)
        .map(|_| {
            if integral {
                rng.gen_range(-3..=3) as f64
            } else {
                rng.gen_range(-5.0..5.0)
            }
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    Plc::new(a, rng.gen_range(-5.0..5.0), slopes).unwrap()
}

/// Every integer vector with `0 <= x[j] <= caps[j]`, in odometer order.
pub fn for_each_vector(caps: &[i64], mut f: impl FnMut(&[i64])) {
    let mut x = vec![0i64; caps.len()];
    loop {
        f(&x);
        let mut j = 0;
        loop {
            if j == caps.len() {
                return;
            }
            if x[j] < caps[j] {
                x[j] += 1;
                break;
            }
            x[j] = 0;
            j += 1;
        }
    }
}

/// A star around node 0 with random edge directions, capacities, costs,
/// load cost, rate and incoming messages.
pub struct Neighbourhood {
    pub problem: BpProblem,
    pub state: balroute_core::MessageState,
}

pub fn random_neighbourhood(rng: &mut ChaCha8Rng) -> Neighbourhood {
    let degree = rng.gen_range(1..=4);
    let mut edges = Vec::new();
    for j in 1..=degree {
        let u = rng.gen_range(1..=3);
        let cost = random_plc_on(rng, 0, u);
        let (tail, head) = if rng.gen_bool(0.5) { (0, j) } else { (j, 0) };
        edges.push(BpEdge { tail, head, cost });
    }
    let max_load: i64 = edges.iter().filter(|e| e.tail == 0).map(|e| e.cost.hi()).sum();
    let load_cost = if rng.gen_bool(0.7) {
        Some(random_plc_on(rng, 0, max_load))
    } else {
        None
    };
    let mut terminal = vec![true; degree + 1];
    terminal[0] = false;
    let mut rates = vec![0; degree + 1];
    rates[0] = rng.gen_range(0..=2);
    let mut slots = vec![None; degree + 1];
    slots[0] = load_cost;
    let problem = BpProblem::new(terminal, rates, edges, slots);
    let mut state = init_messages(&problem);
    for (id, e) in problem.edges().iter().enumerate() {
        let other = if e.tail == 0 { e.head } else { e.tail };
        let m = if rng.gen_bool(0.05) {
            None
        } else {
            Some(random_plc(rng, 0, e.cost.hi()))
        };
        state.set_message(&problem, other, id, m);
    }
    Neighbourhood { problem, state }
}

/// `m_{0->e}(z)` by direct minimization over all integer flows on the other
/// edges: `g_e(z) + min { phi(out) + sum_f m_f(x_f) : out - in = r }`.
pub fn exhaustive_message(nb: &Neighbourhood, e: usize) -> Vec<f64> {
    let p = &nb.problem;
    let edges = p.edges();
    let others: Vec<usize> = (0..edges.len()).filter(|&f| f != e).collect();
    let caps: Vec<i64> = others.iter().map(|&f| p.capacity(f)).collect();
    let r = p.rate(0);
    let mut out = Vec::new();
    for z in 0..=p.capacity(e) {
        let mut best = f64::INFINITY;
        for_each_vector(&caps, |x| {
            let mut flow = vec![0i64; edges.len()];
            flow[e] = z;
            for (k, &f) in others.iter().enumerate() {
                flow[f] = x[k];
            }
            let outgoing: i64 = (0..edges.len()).filter(|&f| edges[f].tail == 0).map(|f| flow[f]).sum();
            let incoming: i64 = (0..edges.len()).filter(|&f| edges[f].head == 0).map(|f| flow[f]).sum();
            if outgoing - incoming != r {
                return;
            }
            let mut v = p.load_cost(0).map_or(0.0, |phi| phi.value_at(outgoing));
            for (k, &f) in others.iter().enumerate() {
                let other = if edges[f].tail == 0 { edges[f].head } else { edges[f].tail };
                v += nb.state.message(p, other, f).map_or(f64::INFINITY, |m| m.value_at(x[k]));
            }
            best = best.min(v);
        });
        out.push(best + edges[e].cost.value_at(z));
    }
    out
}

/// Compares `update_message` (and the batched sweep, up to its additive
/// normalization) against [`exhaustive_message`] on every edge; returns the
/// largest deviation, or an error describing a structural mismatch.
pub fn check_neighbourhood(nb: &Neighbourhood, tol: f64) -> Result<f64, String> {
    let p = &nb.problem;
    let swept = sweep(p, &nb.state);
    let mut worst: f64 = 0.0;
    for e in 0..p.edges().len() {
        let want = exhaustive_message(nb, e);
        let got = update_message(p, &nb.state, 0, e);
        let batched = swept.message(p, 0, e).cloned();
        let finite: Vec<i64> = (0..want.len() as i64).filter(|&z| want[z as usize].is_finite()).collect();
        match (&got, &batched) {
            (None, None) if finite.is_empty() => continue,
            (Some(g), Some(b)) if !finite.is_empty() => {
                if (g.lo(), g.hi()) != (finite[0], *finite.last().unwrap()) || (b.lo(), b.hi()) != (g.lo(), g.hi()) {
                    return Err(format!("edge {e}: domain {:?}/{:?} vs finite points {finite:?}", (g.lo(), g.hi()), (b.lo(), b.hi())));
                }
                let shift = g.value_at(g.lo()) - b.value_at(b.lo());
                for z in 0..want.len() as i64 {
                    let d = (g.value_at(z) - want[z as usize]).abs();
                    let db = (b.value_at(z) + shift - want[z as usize]).abs();
                    if want[z as usize].is_finite() {
                        worst = worst.max(d).max(db);
                    } else if g.value_at(z).is_finite() {
                        return Err(format!("edge {e}: finite at {z} where the minimum is infeasible"));
                    }
                }
            }
            _ => return Err(format!("edge {e}: feasibility mismatch, got {got:?}, want {want:?}")),
        }
    }
    if worst > tol {
        return Err(format!("deviation {worst}"));
    }
    Ok(worst)
}

/// Penalty used for the `seed`-th small instance: a spread of exponents and
/// weights, including pure min-cost routing.
pub fn small_penalty(seed: u64) -> PenaltySpec {
    let alpha = [1.0, 1.5, 2.0, 3.0][(seed % 4) as usize];
    let w = [0.5, 0.3, 0.8, 0.0, 0.5][(seed % 5) as usize];
    PenaltySpec::power_law(alpha, w).unwrap()
}

/// Small random network with `1e-6` cost perturbation.
pub fn small_instance(seed: u64) -> NetworkInstance {
    let inst = generate_random(&RandomParams::default(), seed).unwrap();
    perturb_costs(&inst, 1e-6, seed.wrapping_mul(0x9E37_79B9) ^ 0xABCD)
}

#[derive(Debug)]
pub struct OracleOutcome {
    pub unique: bool,
    pub converged: bool,
    pub same_flow: bool,
    pub objective_gap: f64,
}

/// Solves instance `seed` with BP and by brute force.
pub fn bp_vs_brute_force(seed: u64, cfg: &SolverConfig) -> OracleOutcome {
    let inst = small_instance(seed);
    let pen = small_penalty(seed);
    let exact = brute_force(&inst, &pen).unwrap();
    let res = solve(&inst, &pen, cfg).unwrap();
    let value = balroute_core::objective_value(&inst, &pen, &res.flow);
    OracleOutcome {
        unique: exact.unique,
        converged: res.converged,
        same_flow: res.flow == exact.flow,
        objective_gap: (value - exact.value).abs(),
    }
}

/// All feasible flows of a small instance, by independent enumeration.
pub fn feasible_flows(inst: &NetworkInstance) -> Vec<FlowAssignment> {
    let caps: Vec<i64> = inst.edges().iter().map(|e| e.capacity).collect();
    let mut out = Vec::new();
    for_each_vector(&caps, |x| {
        let f = FlowAssignment::new(x.to_vec());
        if f.is_feasible(inst) {
            out.push(f);
        }
    });
    out
}

/// Checks on instance `seed` that the certificate accepts exactly the
/// brute-force optimum among all feasible flows. Returns the number of
/// flows checked, or `None` when the optimum is not unique.
pub fn certificate_iff_optimal(seed: u64) -> Result<Option<usize>, String> {
    let inst = small_instance(seed);
    let pen = small_penalty(seed);
    let exact = brute_force(&inst, &pen).unwrap();
    if !exact.unique {
        return Ok(None);
    }
    let flows = feasible_flows(&inst);
    for f in &flows {
        let verdict = certify(&inst, &pen, f).map_err(|e| e.to_string())?;
        let optimal = *f == exact.flow;
        if verdict != optimal {
            return Err(format!("seed {seed}: certify = {verdict} for {:?}, optimum {:?}", f.flows, exact.flow.flows));
        }
    }
    Ok(Some(flows.len()))
}
