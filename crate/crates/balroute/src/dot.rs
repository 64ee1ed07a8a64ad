//! Graphviz export.

use std::fmt::Write as _;

use balroute_core::{FlowAssignment, NetworkInstance};

/// DOT text for `inst`. Destinations are double circles, sources are
/// filled. With a flow, loaded edges are bold and labelled `x/u`.
pub fn to_dot(inst: &NetworkInstance, flow: Option<&FlowAssignment>) -> String {
    let mut s = String::from("digraph balroute {\n");
    let scale = 10.0;
    for v in 0..inst.num_nodes() {
        let mut attrs = Vec::new();
        if inst.is_destination(v) {
            attrs.push("shape=doublecircle".to_string());
        } else if inst.rate(v) > 0 {
            attrs.push("style=filled".to_string());
            attrs.push(format!("xlabel=\"r={}\"", inst.rate(v)));
        }
        if let Some(p) = inst.positions() {
            let (x, y) = p[v];
            attrs.push(format!("pos=\"{:.3},{:.3}!\"", x * scale, y * scale));
        }
        writeln!(s, "  {v} [{}];", attrs.join(", ")).unwrap();
    }
    for (i, e) in inst.edges().iter().enumerate() {
        match flow.map(|f| f.flows[i]) {
            Some(x) if x > 0 => {
                writeln!(s, "  {} -> {} [label=\"{}/{}\", penwidth={}];", e.tail, e.head, x, e.capacity, 1 + x).unwrap()
            }
            Some(_) => writeln!(s, "  {} -> {} [color=gray];", e.tail, e.head).unwrap(),
            None => writeln!(s, "  {} -> {} [label=\"{:.2}\"];", e.tail, e.head, e.cost).unwrap(),
        }
    }
    s.push_str("}\n");
    s
}
