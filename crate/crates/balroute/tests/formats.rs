use balroute::config::ExperimentConfig;
use balroute::dot::to_dot;
use balroute::format::{parse_flow, parse_instance, write_flow, write_instance, FormatError};
use balroute_core::{generate_geometric, solve, GeometricParams, PenaltySpec, SolverConfig};

#[test]
fn instance_round_trip_is_exact() {
    let p = GeometricParams {
        n: 15,
        k: 4,
        ..GeometricParams::default()
    };
    let inst = generate_geometric(&p, 7).unwrap();
    let text = write_instance(&inst);
    let back = parse_instance(&text).unwrap();
    assert_eq!(back, inst);
    assert_eq!(write_instance(&back), text);
}

#[test]
fn hand_written_instance() {
    let text = "# diamond\nn 3\nm 1\nrate 0 2\nedge 0 1 1.0 1\nedge 0 2 3 1   # costly\nedge 1 3 1 1\nedge 2 3 1 1\n";
    let inst = parse_instance(text).unwrap();
    assert_eq!(inst.num_sources(), 3);
    assert_eq!(inst.rates(), &[2, 0, 0]);
    assert_eq!(inst.edges()[1].cost, 3.0);
    assert!(inst.positions().is_none());

    let res = solve(&inst, &PenaltySpec::min_cost(), &SolverConfig::default()).unwrap();
    let flow_text = write_flow(&inst, &res.flow);
    assert_eq!(flow_text, "flow 0 1 1\nflow 0 2 1\nflow 1 3 1\nflow 2 3 1\n");
    assert_eq!(parse_flow(&inst, &flow_text).unwrap(), res.flow);
    // Omitted edges carry nothing.
    assert_eq!(parse_flow(&inst, "flow 0 2 1\n").unwrap().flows, vec![0, 1, 0, 0]);
}

#[test]
fn malformed_files_are_reported_with_lines() {
    let err = |t: &str| parse_instance(t).unwrap_err();
    assert!(matches!(err("m 1\n"), FormatError::Missing("n")));
    assert!(matches!(err("n 1\nm 1\nnode 0\n"), FormatError::Syntax { line: 3, .. }));
    assert!(matches!(err("n 1\nm 1\nedge 0 1 x 1\n"), FormatError::Syntax { line: 3, .. }));
    assert!(matches!(err("n 1\nm 1\nedge 0 1 1 1 9\n"), FormatError::Syntax { line: 3, .. }));
    assert!(matches!(err("n 1\nm 1\nrate 1 1\n"), FormatError::Syntax { line: 3, .. }));
    assert!(matches!(err("n 1\nm 1\nedge 0 0 1 1\n"), FormatError::Network(_)));
    assert!(matches!(err("n 1\nm 1\npos 0 0 0\n"), FormatError::PartialPositions));

    let inst = parse_instance("n 1\nm 1\nrate 0 1\nedge 0 1 1 1\n").unwrap();
    assert!(parse_flow(&inst, "flow 1 0 1\n").is_err());
    assert!(parse_flow(&inst, "flow 0 1 1\nflow 0 1 1\n").is_err());
    assert!(parse_flow(&inst, "edge 0 1 1\n").is_err());
}

#[test]
fn dot_marks_destinations_sources_and_flow() {
    let inst = parse_instance("n 2\nm 1\nrate 0 1\nedge 0 1 1 2\nedge 1 2 1 2\nedge 0 2 5 2\n").unwrap();
    let res = solve(&inst, &PenaltySpec::min_cost(), &SolverConfig::default()).unwrap();
    let dot = to_dot(&inst, Some(&res.flow));
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("2 [shape=doublecircle]"));
    assert!(dot.contains("0 [style=filled"));
    assert!(dot.contains("0 -> 1 [label=\"1/2\""));
    assert!(dot.contains("0 -> 2 [color=gray]"));
    let plain = to_dot(&inst, None);
    assert!(plain.contains("0 -> 2 [label=\"5.00\"]"));
}

#[test]
fn config_text_round_trip() {
    let mut cfg = ExperimentConfig::default();
    cfg.set("fractions", "0.1, 0.35").unwrap();
    cfg.set("alpha", "2").unwrap();
    cfg.set("capacity", "4").unwrap();
    cfg.set("certify", "true").unwrap();
    cfg.set("out_dir", " out/x ").unwrap();
    let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.source_fractions, vec![0.1, 0.35]);
    assert_eq!(back.capacity, Some(4));

    assert!(ExperimentConfig::parse("bogus = 1").is_err());
    assert!(ExperimentConfig::parse("trials = 0").is_err());
    assert!(ExperimentConfig::parse("fractions = 0.5, 1.5").is_err());
    assert!(ExperimentConfig::parse("w = 2").is_err());
    assert!(ExperimentConfig::parse("n 50").is_err());
    let c = ExperimentConfig::parse("# comment only\n\ncapacity = auto\n").unwrap();
    assert_eq!(c, ExperimentConfig::default());
}
