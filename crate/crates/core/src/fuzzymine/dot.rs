use std::fmt::Write;

use super::ProcessModel;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn fmt_sig(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        format!("{w:.3}")
    }
}

/// Render the model as a DOT digraph. Virtual nodes are folded back into a
/// dashed self-loop on the activity they stand for.
pub fn export_dot(model: &ProcessModel) -> String {
    let mut s = String::from("digraph process {\n");
    if !model.nodes.is_empty() {
        s.push_str("  rankdir=LR;\n  node [shape=box];\n");
    }
    for n in &model.nodes {
        let _ = writeln!(s, "  {} [label={}];", quote(n), quote(n));
    }
    for ((a, b), w) in &model.edges {
        if let Some(owner) = model.virtual_nodes.get(b) {
            let _ = writeln!(
                s,
                "  {} -> {} [label={}, style=dashed];",
                quote(owner),
                quote(owner),
                quote(&fmt_sig(*w))
            );
        } else if model.kept_loops.contains(&(b.clone(), a.clone())) {
            let _ = writeln!(
                s,
                "  {} -> {} [label={}, constraint=false];",
                quote(a),
                quote(b),
                quote(&fmt_sig(*w))
            );
        } else {
            let _ = writeln!(
                s,
                "  {} -> {} [label={}];",
                quote(a),
                quote(b),
                quote(&fmt_sig(*w))
            );
        }
    }
    s.push_str("}\n");
    s
}
