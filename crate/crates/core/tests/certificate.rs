mod common;

use balroute_core::oracle::{ArcKind, ResidualGraph, NEGATIVE_CYCLE_TOL};
use balroute_core::{certify, generate_geometric, perturb_costs, solve, GeometricParams, PenaltySpec, SolverConfig};
use common::{certificate_iff_optimal, small_instance, small_penalty};

#[test]
fn certificate_accepts_exactly_the_optimum() {
    let mut checked = 0;
    let mut instances = 0;
    for seed in 4000..4120 {
        if let Some(n) = certificate_iff_optimal(seed).unwrap() {
            checked += n;
            instances += 1;
        }
    }
    assert!(instances >= 100, "{instances} uniquely solvable instances");
    assert!(checked > 1000, "only {checked} candidate flows");
}

#[test]
fn improving_cycle_lowers_the_objective() {
    // Pushing one unit around a reported negative cycle must improve the
    // true objective by about the cycle's cost.
    for seed in 5000..5040 {
        let inst = small_instance(seed);
        let pen = small_penalty(seed);
        let x = balroute_core::FlowAssignment::new(
            common::feasible_flows(&inst).into_iter().last().unwrap().flows,
        );
        let g = ResidualGraph::build(&inst, &pen, &x).unwrap();
        let Some(cycle) = g.negative_cycle(NEGATIVE_CYCLE_TOL) else {
            assert!(certify(&inst, &pen, &x).unwrap());
            continue;
        };
        let mut y = x.clone();
        for &a in &cycle {
            let arc = &g.arcs()[a];
            match arc.kind {
                ArcKind::Forward(e) => y.flows[e] += 1,
                ArcKind::Backward(e) => y.flows[e] -= 1,
                _ => {}
            }
        }
        assert!(y.is_feasible(&inst), "seed {seed}");
        let before = balroute_core::objective_value(&inst, &pen, &x);
        let after = balroute_core::objective_value(&inst, &pen, &y);
        assert!(after < before - 1e-9, "seed {seed}: {before} -> {after}");
    }
}

#[test]
fn bp_results_on_geometric_networks_are_certified() {
    let cfg = SolverConfig {
        certificate_check: true,
        max_iterations: 2000,
        ..SolverConfig::default()
    };
    for seed in 0..6 {
        let p = GeometricParams {
            n: 20,
            k: 6,
            ..GeometricParams::default()
        };
        let inst = perturb_costs(&generate_geometric(&p, seed).unwrap(), 1e-6, seed + 99);
        for pen in [PenaltySpec::min_cost(), PenaltySpec::power_law(2.0, 0.5).unwrap()] {
            let res = solve(&inst, &pen, &cfg).unwrap();
            assert!(res.converged, "seed {seed}");
            assert_eq!(res.certified_optimal, Some(true), "seed {seed}");
        }
    }
}
