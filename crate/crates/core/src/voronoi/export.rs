//! JSON and SVG renderings of a diagram.

use super::{FaceLabel, VoronoiDiagram};
use crate::geometry::Region;
use crate::geometry::Point;
use serde_json::{json, Value};
use std::fmt::Write;

pub fn diagram_json(d: &VoronoiDiagram) -> Value {
    let cells: Vec<Value> = (0..d.len())
        .map(|i| {
            let faces: Vec<Value> = d
                .faces(i)
                .map(|f| json!({ "neighbor": f.neighbor, "shift": f.shift, "a": f.a, "b": f.b }))
                .collect();
            let boundary: Vec<bool> = d.cells[i]
                .iter()
                .map(|v| v.label == FaceLabel::Boundary)
                .collect();
            json!({
                "site": d.sites[i],
                "vertices": d.cell_polygon(i),
                "boundary_edges": boundary,
                "area": d.cell_volume(i),
                "neighbors": d.neighbors[i],
                "faces": faces,
            })
        })
        .collect();
    json!({
        "mode": d.mode,
        "cells": cells,
        "diagnostics": d.diagnostics,
    })
}

/// SVG of the cells, coloured by whether each site lies in `region`.
pub fn diagram_svg(d: &VoronoiDiagram, region: Option<&Region>, size: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 1 1">"#
    );
    let _ = writeln!(s, r##"<g transform="translate(0,1) scale(1,-1)" stroke="#333" stroke-width="{}">"##, 0.6 / size);
    for i in 0..d.len() {
        if d.cells[i].is_empty() {
            continue;
        }
        let inside = region.is_some_and(|r| r.contains(&Point::xy(d.sites[i][0], d.sites[i][1])));
        let fill = if inside { "#9ecae1" } else { "#f7f7f7" };
        let pts: Vec<String> = d
            .cell_polygon(i)
            .iter()
            .map(|p| format!("{:.6},{:.6}", p[0], p[1]))
            .collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="{fill}"/>"##, pts.join(" "));
    }
    for p in &d.sites {
        let _ = writeln!(s, r##"<circle cx="{:.6}" cy="{:.6}" r="{}" fill="#000"/>"##, p[0], p[1], 1.5 / size);
    }
    s.push_str("</g>\n</svg>\n");
    s
}
