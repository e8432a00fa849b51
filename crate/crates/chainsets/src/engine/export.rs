//! File-format exports: graph JSON, chain-set CSV, and plain point files for
//! plotting. All outputs are UTF-8 with LF line endings and deterministic.

use serde_json::{json, Value};

use super::covering::BoxCovering;
use super::graph::TransitionGraph;
use super::sets::ChainSetResult;

/// {nodes: [{id, center, radius, face?}], edges: [[src,dst],…], sink_edges}.
pub fn graph_json(graph: &TransitionGraph) -> Value {
    let nodes: Vec<Value> = graph
        .covering
        .boxes
        .iter()
        .enumerate()
        .map(|(id, b)| {
            let mut node = json!({
                "id": id,
                "center": b.center,
                "radius": b.radius,
            });
            if let Some(f) = b.face {
                node["face"] = json!(f);
            }
            node
        })
        .collect();
    let edges: Vec<[usize; 2]> = graph
        .edges
        .iter()
        .enumerate()
        .flat_map(|(src, dsts)| dsts.iter().map(move |&d| [src, d]))
        .collect();
    json!({
        "nodes": nodes,
        "edges": edges,
        "sink_edges": graph.sink_edges,
    })
}

/// One row per box: id, center coordinates, set id, classification, flags.
pub fn chain_sets_csv(covering: &BoxCovering, sets: &[ChainSetResult]) -> String {
    let dim = covering.ambient_dim();
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["box_id".to_string()];
    header.extend((0..dim).map(|i| format!("center_{i}")));
    header.extend(
        ["set_id", "classification", "flags"]
            .iter()
            .map(|s| s.to_string()),
    );
    wtr.write_record(&header).expect("csv header");
    for (sid, set) in sets.iter().enumerate() {
        let flags = format!(
            "touches_equator={};hemisphere_sign={};antipodal_class={}",
            set.touches_equator,
            set.hemisphere_sign,
            set.antipodal_class.label()
        );
        for &b in &set.boxes {
            let mut row = vec![b.to_string()];
            row.extend(covering.boxes[b].center.iter().map(|c| format!("{c:.17e}")));
            row.push(sid.to_string());
            row.push(set.classification.label());
            row.push(flags.clone());
            wtr.write_record(&row).expect("csv row");
        }
    }
    String::from_utf8(wtr.into_inner().expect("csv buffer")).expect("csv is utf-8")
}

/// Whitespace-separated box centers of one chain set, one point per line
/// (these are the approximation's representative points for plotting).
pub fn plot_points(covering: &BoxCovering, set: &ChainSetResult) -> String {
    let mut out = String::new();
    for &b in &set.boxes {
        let line: Vec<String> = covering.boxes[b]
            .center
            .iter()
            .map(|c| format!("{c:.12}"))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
