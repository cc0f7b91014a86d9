//! Deterministic renderers: SVG chord pictures for disk diagrams and DOT
//! text for hyperplane contact graphs. Output depends only on the input
//! values, so golden files stay byte-identical.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::contact::{ContactError, Hyperplane};
use crate::diagram::DiskDiagram;

/// One fill color per vertex index, cycled when the graph is larger.
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

const SIZE: f64 = 500.0;
const RADIUS: f64 = 200.0;
const LABEL_RADIUS: f64 = 225.0;

fn point(n: usize, k: usize, radius: f64) -> (f64, f64) {
    let angle = -PI / 2.0 + 2.0 * PI * k as f64 / n as f64;
    (
        SIZE / 2.0 + radius * angle.cos(),
        SIZE / 2.0 + radius * angle.sin(),
    )
}

/// Renders the boundary as a circle with its letters as labels and each
/// block as a chord bundle through its roots, colored by vertex.
pub fn diagram_svg(diagram: &DiskDiagram) -> String {
    let n = diagram.len().max(1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(
        out,
        "  <circle cx=\"{}\" cy=\"{}\" r=\"{RADIUS}\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>",
        SIZE / 2.0,
        SIZE / 2.0
    );
    for block in diagram.blocks() {
        let color = PALETTE[block.vertex.index() % PALETTE.len()];
        let k = block.roots.len();
        for (i, &from) in block.roots.iter().enumerate() {
            if k == 2 && i == 1 {
                break;
            }
            let to = block.roots[(i + 1) % k];
            let (x1, y1) = point(n, from, RADIUS);
            let (x2, y2) = point(n, to, RADIUS);
            let _ = writeln!(
                out,
                "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>"
            );
        }
    }
    let graph = diagram.boundary().graph().clone();
    for (k, letter) in diagram.boundary().letters().iter().enumerate() {
        let (x, y) = point(n, k, LABEL_RADIUS);
        let color = PALETTE[letter.vertex.index() % PALETTE.len()];
        let _ = writeln!(
            out,
            "  <text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\" text-anchor=\"middle\">{}</text>",
            escape_xml(&format!(
                "{}:{}",
                graph.name(letter.vertex),
                graph.group(letter.vertex).serialize_payload(&letter.element)
            ))
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn escape_dot(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders hyperplanes as DOT nodes, with an edge wherever two carriers
/// intersect. Node order and edge order follow the input slice.
pub fn contact_dot(hyperplanes: &[Hyperplane]) -> Result<String, ContactError> {
    let mut out = String::from("graph contact {\n");
    for (i, h) in hyperplanes.iter().enumerate() {
        let graph = h.carrier_rep.graph();
        let rep = if h.carrier_rep.letters().is_empty() {
            "1".to_string()
        } else {
            h.carrier_rep.serialize()
        };
        let _ = writeln!(
            out,
            "  h{i} [label=\"{}\"];",
            escape_dot(&format!("{} | {rep}", graph.name(h.vertex)))
        );
    }
    for i in 0..hyperplanes.len() {
        for j in i + 1..hyperplanes.len() {
            if hyperplanes[i].carriers_intersect(&hyperplanes[j])? {
                let _ = writeln!(out, "  h{i} -- h{j};");
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}
