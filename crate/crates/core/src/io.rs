//! Plain-text serialization: OFF and OBJ mesh writers, the
//! fundamental-domain sidecar, and the float formatting shared by every
//! JSON and table emitter.
//!
//! All numeric output goes through [`f17`], which prints 17 significant
//! digits so values round-trip to the exact double and repeated runs are
//! byte-identical.

use crate::mesh::{ArcLabel, FundamentalDomain, TriangleMesh};

/// Render a float with 17 significant digits in a JSON-compatible form.
pub fn f17(x: f64) -> String {
    debug_assert!(x.is_finite(), "refusing to serialize {x}");
    format!("{x:.16e}")
}

/// Minimal JSON string escaping; catalog names and labels only ever use a
/// safe subset, but quoting is cheap insurance.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

pub fn json_opt_f64(x: Option<f64>) -> String {
    match x {
        Some(v) => f17(v),
        None => "null".to_string(),
    }
}

/// Serialize a mesh in OFF format.
pub fn write_off(mesh: &TriangleMesh) -> String {
    let mut out = String::from("OFF\n");
    out.push_str(&format!(
        "{} {} 0\n",
        mesh.vertex_count(),
        mesh.triangle_count()
    ));
    for p in &mesh.vertices {
        out.push_str(&format!("{} {} {}\n", f17(p[0]), f17(p[1]), f17(p[2])));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    out
}

/// Serialize a mesh in Wavefront OBJ format (1-based indices).
pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for p in &mesh.vertices {
        out.push_str(&format!("v {} {} {}\n", f17(p[0]), f17(p[1]), f17(p[2])));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    out
}

/// JSON sidecar naming the fundamental domain's boundary arcs by full-mesh
/// vertex ids: `{"gamma": [...], "e1": [...], "e2": [...], "e3": [...]}`.
/// Labels absent from the domain (e.g. `e3` for planar surfaces) come out
/// as empty arrays; if a label consists of several arcs their chains are
/// concatenated in order.
pub fn fundamental_domain_sidecar(fd: &FundamentalDomain) -> String {
    let chain_for = |label: ArcLabel| -> String {
        let ids: Vec<String> = fd
            .arcs
            .iter()
            .filter(|a| a.label == label)
            .flat_map(|a| a.vertices.iter().map(|&s| fd.lift[s].to_string()))
            .collect();
        format!("[{}]", ids.join(","))
    };
    format!(
        "{{\"gamma\":{},\"e1\":{},\"e2\":{},\"e3\":{}}}",
        chain_for(ArcLabel::Gamma),
        chain_for(ArcLabel::Plane(0)),
        chain_for(ArcLabel::Plane(1)),
        chain_for(ArcLabel::Plane(2)),
    )
}
