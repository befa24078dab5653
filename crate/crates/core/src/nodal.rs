//! Nodal sets of vertex functions: sign pattern, connected nodal domains,
//! zero-crossing polylines, Courant sampling of first-cluster combinations,
//! restriction of nodal lines to a fundamental domain, and the count of
//! nodal domains produced by reflecting a single line through the full
//! symmetry group.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::f17;
use crate::mesh::{ArcLabel, FundamentalDomain, TriangleMesh};
use crate::steklov::Spectrum;
use crate::symmetry::Parity;

/// Default relative threshold below which a vertex value is treated as an
/// exact zero of the nodal pattern.
pub const DEFAULT_NODAL_TAU: f64 = 1e-8;

/// Seed of the random Courant samples; fixed so reruns are identical.
const COURANT_SAMPLE_SEED: u64 = 0xC0A41;
const COURANT_RANDOM_DRAWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

/// A point of the nodal set: either a transversal crossing of an edge
/// (parametrized by `t` from vertex `a` to vertex `b`, `a < b`) or a vertex
/// where the function is below threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodalNode {
    EdgeCross { a: usize, b: usize, t: f64 },
    ZeroVertex(usize),
}

impl NodalNode {
    pub fn position(&self, vertices: &[[f64; 3]]) -> [f64; 3] {
        match *self {
            NodalNode::ZeroVertex(v) => vertices[v],
            NodalNode::EdgeCross { a, b, t } => {
                let p = vertices[a];
                let q = vertices[b];
                [
                    p[0] + t * (q[0] - p[0]),
                    p[1] + t * (q[1] - p[1]),
                    p[2] + t * (q[2] - p[2]),
                ]
            }
        }
    }

    fn key(&self) -> NodeKey {
        match *self {
            NodalNode::ZeroVertex(v) => NodeKey::Vertex(v),
            NodalNode::EdgeCross { a, b, .. } => NodeKey::Edge(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum NodeKey {
    Vertex(usize),
    Edge(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Polyline {
    pub nodes: Vec<NodalNode>,
    pub closed: bool,
}

impl Polyline {
    pub fn points(&self, vertices: &[[f64; 3]]) -> Vec<[f64; 3]> {
        self.nodes.iter().map(|n| n.position(vertices)).collect()
    }
}

/// Sign pattern, connected sign domains, and zero-set polylines of a
/// vertex function.
#[derive(Debug, Clone)]
pub struct NodalDecomposition {
    pub signs: Vec<Sign>,
    /// Component id of each strictly signed vertex.
    pub domain_labels: Vec<Option<usize>>,
    pub domain_count: usize,
    pub polylines: Vec<Polyline>,
    pub tau: f64,
    /// Crossing parameter of every sign-changing edge, keyed by the sorted
    /// vertex pair; retained so restrictions reuse identical geometry.
    crossings: HashMap<(usize, usize), f64>,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

fn classify_signs(u: &[f64], tau: f64) -> Result<Vec<Sign>> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Nodal(format!(
            "zero threshold tau = {tau} must lie in [0, 1)"
        )));
    }
    let umax = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if umax == 0.0 || !umax.is_finite() {
        return Err(Error::Nodal(
            "function vanishes identically (or is not finite); nodal pattern undefined".into(),
        ));
    }
    let cut = tau * umax;
    Ok(u.iter()
        .map(|&v| {
            if v.abs() <= cut {
                Sign::Zero
            } else if v > 0.0 {
                Sign::Pos
            } else {
                Sign::Neg
            }
        })
        .collect())
}

/// Decompose a vertex function into nodal domains and zero polylines.
/// Values within `tau * max|u|` of zero are treated as exact zeros; strict
/// sign domains are the connected components of same-sign vertices under
/// edge adjacency.
pub fn nodal_domains(mesh: &TriangleMesh, u: &[f64], tau: f64) -> Result<NodalDecomposition> {
    if u.len() != mesh.vertex_count() {
        return Err(Error::Nodal(format!(
            "function has {} values for {} vertices",
            u.len(),
            mesh.vertex_count()
        )));
    }
    let signs = classify_signs(u, tau)?;

    let mut uf = UnionFind::new(mesh.vertex_count());
    for tri in &mesh.triangles {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            if signs[a] == signs[b] && signs[a] != Sign::Zero {
                uf.union(a, b);
            }
        }
    }
    let mut compact: BTreeMap<usize, usize> = BTreeMap::new();
    let mut domain_labels = vec![None; mesh.vertex_count()];
    for v in 0..mesh.vertex_count() {
        if signs[v] == Sign::Zero {
            continue;
        }
        let root = uf.find(v);
        let next = compact.len();
        let id = *compact.entry(root).or_insert(next);
        domain_labels[v] = Some(id);
    }
    let domain_count = compact.len();

    let mut crossings: HashMap<(usize, usize), f64> = HashMap::new();
    let mut edges = BTreeSet::new();
    for tri in &mesh.triangles {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    for &(a, b) in &edges {
        let opposite = matches!(
            (signs[a], signs[b]),
            (Sign::Pos, Sign::Neg) | (Sign::Neg, Sign::Pos)
        );
        if opposite {
            crossings.insert((a, b), u[a] / (u[a] - u[b]));
        }
    }

    let polylines = build_polylines(&mesh.triangles, &signs, |a, b| {
        crossings.get(&(a, b)).copied()
    })?;

    Ok(NodalDecomposition {
        signs,
        domain_labels,
        domain_count,
        polylines,
        tau,
        crossings,
    })
}

/// Trace the nodal set through the triangles: every triangle carrying both
/// strict signs contributes one segment between its two nodal nodes, and
/// every edge with two zero endpoints is itself a segment. Segments are
/// then concatenated into maximal polylines, breaking at junctions.
fn build_polylines(
    triangles: &[[usize; 3]],
    signs: &[Sign],
    crossing_t: impl Fn(usize, usize) -> Option<f64>,
) -> Result<Vec<Polyline>> {
    let mut nodes: BTreeMap<NodeKey, NodalNode> = BTreeMap::new();
    let mut segments: BTreeSet<(NodeKey, NodeKey)> = BTreeSet::new();
    let mut zero_edges: BTreeSet<(usize, usize)> = BTreeSet::new();

    for tri in triangles {
        let has_pos = tri.iter().any(|&v| signs[v] == Sign::Pos);
        let has_neg = tri.iter().any(|&v| signs[v] == Sign::Neg);
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            if signs[a] == Sign::Zero && signs[b] == Sign::Zero {
                zero_edges.insert((a.min(b), a.max(b)));
            }
        }
        if !(has_pos && has_neg) {
            continue;
        }
        let mut here: Vec<NodalNode> = Vec::with_capacity(2);
        for &v in tri {
            if signs[v] == Sign::Zero {
                here.push(NodalNode::ZeroVertex(v));
            }
        }
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let opposite = matches!(
                (signs[a], signs[b]),
                (Sign::Pos, Sign::Neg) | (Sign::Neg, Sign::Pos)
            );
            if opposite {
                let (lo, hi) = (a.min(b), a.max(b));
                let t = crossing_t(lo, hi).ok_or_else(|| {
                    Error::Nodal(format!(
                        "missing crossing parameter for edge ({lo}, {hi}); decomposition does not match this triangulation"
                    ))
                })?;
                here.push(NodalNode::EdgeCross { a: lo, b: hi, t });
            }
        }
        if here.len() != 2 {
            return Err(Error::Nodal(format!(
                "triangle {tri:?} produced {} nodal nodes; sign pattern is inconsistent",
                here.len()
            )));
        }
        let (k0, k1) = (here[0].key(), here[1].key());
        for n in here {
            nodes.insert(n.key(), n);
        }
        segments.insert((k0.min(k1), k0.max(k1)));
    }
    for &(a, b) in &zero_edges {
        nodes.insert(NodeKey::Vertex(a), NodalNode::ZeroVertex(a));
        nodes.insert(NodeKey::Vertex(b), NodalNode::ZeroVertex(b));
        let (k0, k1) = (NodeKey::Vertex(a), NodeKey::Vertex(b));
        segments.insert((k0.min(k1), k0.max(k1)));
    }

    let mut adj: BTreeMap<NodeKey, Vec<NodeKey>> = BTreeMap::new();
    for &(a, b) in &segments {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for ns in adj.values_mut() {
        ns.sort_unstable();
    }

    let mut used: BTreeSet<(NodeKey, NodeKey)> = BTreeSet::new();
    let take = |used: &mut BTreeSet<(NodeKey, NodeKey)>, a: NodeKey, b: NodeKey| -> bool {
        used.insert((a.min(b), a.max(b)))
    };
    let mut polylines = Vec::new();

    // Open chains start and end at nodes of degree != 2.
    let junctions: Vec<NodeKey> = adj
        .iter()
        .filter(|(_, ns)| ns.len() != 2)
        .map(|(&k, _)| k)
        .collect();
    for &start in &junctions {
        let neighbors = adj[&start].clone();
        for first in neighbors {
            if !take(&mut used, start, first) {
                continue;
            }
            let mut chain = vec![nodes[&start], nodes[&first]];
            let mut prev = start;
            let mut cur = first;
            while adj[&cur].len() == 2 {
                let nxt = if adj[&cur][0] == prev { adj[&cur][1] } else { adj[&cur][0] };
                if !take(&mut used, cur, nxt) {
                    break;
                }
                chain.push(nodes[&nxt]);
                prev = cur;
                cur = nxt;
            }
            polylines.push(Polyline {
                nodes: chain,
                closed: false,
            });
        }
    }
    // Whatever remains consists of simple cycles.
    for (&start, ns) in &adj {
        for &first in ns {
            if !take(&mut used, start, first) {
                continue;
            }
            let mut chain = vec![nodes[&start], nodes[&first]];
            let mut prev = start;
            let mut cur = first;
            while cur != start {
                let nxt = if adj[&cur][0] == prev { adj[&cur][1] } else { adj[&cur][0] };
                take(&mut used, cur, nxt);
                prev = cur;
                cur = nxt;
                if cur != start {
                    chain.push(nodes[&cur]);
                }
            }
            polylines.push(Polyline {
                nodes: chain,
                closed: true,
            });
        }
    }
    Ok(polylines)
}

/// Result of sampling nodal-domain counts across a first-cluster subspace.
#[derive(Debug, Clone)]
pub struct CourantReport {
    pub cluster_value: f64,
    pub multiplicity: usize,
    pub samples: usize,
    pub violations: Vec<CourantViolation>,
}

#[derive(Debug, Clone)]
pub struct CourantViolation {
    pub coefficients: Vec<f64>,
    pub domain_count: usize,
}

/// Check that every sampled combination of the first nonzero eigenvalue
/// cluster has exactly two nodal domains. Samples the basis modes, all
/// pairwise sums and differences, and a fixed-seed batch of random
/// combinations.
pub fn courant_check(
    spectrum: &Spectrum,
    mesh: &TriangleMesh,
    tau: f64,
    cluster_tol: f64,
) -> Result<CourantReport> {
    let cluster = spectrum.sigma1_cluster(cluster_tol).ok_or_else(|| {
        Error::Solver("spectrum does not reach past the zero cluster".into())
    })?;
    let d = cluster.multiplicity;
    let basis: Vec<&Vec<f64>> = (0..d)
        .map(|k| &spectrum.extensions[cluster.start + k])
        .collect();

    let mut coeff_sets: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        let mut c = vec![0.0; d];
        c[k] = 1.0;
        coeff_sets.push(c);
    }
    for i in 0..d {
        for j in i + 1..d {
            for s in [1.0, -1.0] {
                let mut c = vec![0.0; d];
                c[i] = 1.0;
                c[j] = s;
                coeff_sets.push(c);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(COURANT_SAMPLE_SEED);
    for _ in 0..COURANT_RANDOM_DRAWS {
        let mut c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            c[0] = 1.0;
        }
        coeff_sets.push(c);
    }

    let mut violations = Vec::new();
    let samples = coeff_sets.len();
    for coefficients in coeff_sets {
        let mut u = vec![0.0; mesh.vertex_count()];
        for (k, c) in coefficients.iter().enumerate() {
            for (uv, bv) in u.iter_mut().zip(basis[k]) {
                *uv += c * bv;
            }
        }
        let decomp = nodal_domains(mesh, &u, tau)?;
        if decomp.domain_count != 2 {
            violations.push(CourantViolation {
                coefficients,
                domain_count: decomp.domain_count,
            });
        }
    }
    Ok(CourantReport {
        cluster_value: cluster.value,
        multiplicity: d,
        samples,
        violations,
    })
}

/// Which fundamental-domain boundary arc a nodal line ends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndingEdge {
    Gamma,
    E1,
    E2,
    E3,
}

impl EndingEdge {
    pub fn as_str(self) -> &'static str {
        match self {
            EndingEdge::Gamma => "gamma",
            EndingEdge::E1 => "e1",
            EndingEdge::E2 => "e2",
            EndingEdge::E3 => "e3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(EndingEdge::Gamma),
            "e1" => Ok(EndingEdge::E1),
            "e2" => Ok(EndingEdge::E2),
            "e3" => Ok(EndingEdge::E3),
            other => Err(Error::Config(format!(
                "unknown ending edge {other:?}; expected gamma, e1, e2, or e3"
            ))),
        }
    }
}

/// Abstract description of one nodal line in a fundamental domain of the
/// order-8 reflection group: it starts in the interior of the boundary arc
/// gamma and ends on `ending_edge`. The count of nodal domains of the
/// fully reflected function only depends on this datum when the function is
/// even under all three reflections.
#[derive(Debug, Clone, Copy)]
pub struct OrbitPattern {
    pub ending_edge: EndingEdge,
    pub group_order: usize,
    pub parities: [Parity; 3],
}

impl OrbitPattern {
    pub fn new(ending_edge: EndingEdge) -> Self {
        OrbitPattern {
            ending_edge,
            group_order: 8,
            parities: [Parity::Even; 3],
        }
    }
}

/// Count the nodal domains of the reflected configuration: the fundamental
/// domain is split by the line into two faces, eight copies of each face
/// are glued along the plane arcs they retain, and the connected components
/// of the glued complex are counted.
pub fn orbit_nodal_count(pattern: &OrbitPattern) -> Result<usize> {
    if pattern.group_order != 8 {
        return Err(Error::Nodal(format!(
            "orbit complex is defined for the order-8 reflection group, got order {}",
            pattern.group_order
        )));
    }
    if pattern.parities.iter().any(|&p| p != Parity::Even) {
        return Err(Error::Nodal(
            "orbit insertion requires the function to be even under all three reflections".into(),
        ));
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Side {
        Gamma,
        Plane(usize),
    }
    // Cyclic boundary of the fundamental domain. Gamma meets e1 and e2 at
    // its endpoints; e3 (the equatorial arc) is opposite to gamma.
    let cyclic = [Side::Gamma, Side::Plane(0), Side::Plane(2), Side::Plane(1)];
    let ending = match pattern.ending_edge {
        EndingEdge::Gamma => Side::Gamma,
        EndingEdge::E1 => Side::Plane(0),
        EndingEdge::E2 => Side::Plane(1),
        EndingEdge::E3 => Side::Plane(2),
    };

    // Walk the boundary, splitting sides at the line endpoints: p always
    // lies in the interior of gamma, q in the interior of the ending side
    // (after p when both are on gamma). Record the subarc sequence and the
    // two cut positions.
    let mut subarcs: Vec<Side> = Vec::new();
    let mut p_pos = None;
    let mut q_pos = None;
    for side in cyclic {
        let cuts = match (side, ending == side) {
            (Side::Gamma, true) => 2,  // both p and q
            (Side::Gamma, false) => 1, // p only
            (_, true) => 1,            // q only
            (_, false) => 0,
        };
        for c in 0..=cuts {
            subarcs.push(side);
            if c < cuts {
                let here = subarcs.len() - 1;
                if side == Side::Gamma && p_pos.is_none() {
                    p_pos = Some(here);
                } else {
                    q_pos = Some(here);
                }
            }
        }
    }
    let (p, q) = (p_pos.unwrap(), q_pos.unwrap());
    // Face A collects the subarcs strictly between p and q in walk order;
    // the rest bound face B.
    let face_of = |s: usize| usize::from(s > p && s <= q);

    let cells = 2 * pattern.group_order;
    let mut uf = UnionFind::new(cells);
    for (s, side) in subarcs.iter().enumerate() {
        if let Side::Plane(g) = side {
            let f = face_of(s);
            for copy in 0..pattern.group_order {
                uf.union(copy * 2 + f, (copy ^ (1 << g)) * 2 + f);
            }
        }
    }
    let roots: BTreeSet<usize> = (0..cells).map(|c| uf.find(c)).collect();
    Ok(roots.len())
}

/// Classification of one endpoint of a restricted nodal polyline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointClass {
    Arc(ArcLabel),
    /// Endpoint strictly inside the domain (a pinch point).
    Interior,
    /// Endpoint at a corner shared by two arcs.
    Ambiguous,
}

impl EndpointClass {
    pub fn as_str(&self) -> String {
        match self {
            EndpointClass::Arc(l) => l.as_str(),
            EndpointClass::Interior => "interior".to_string(),
            EndpointClass::Ambiguous => "ambiguous".to_string(),
        }
    }
}

/// A nodal polyline of the restriction to the fundamental domain, in
/// submesh indices.
#[derive(Debug, Clone)]
pub struct RestrictedPolyline {
    pub polyline: Polyline,
    pub kind: RestrictionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictionKind {
    Open {
        start: EndpointClass,
        end: EndpointClass,
    },
    Closed,
    /// The entire line runs along a symmetry-plane arc instead of crossing
    /// the domain.
    PlaneCoincident(ArcLabel),
}

/// Restrict a nodal decomposition to a fundamental domain and classify
/// where each nodal polyline begins and ends: on gamma, on a plane arc, at
/// an ambiguous corner, or nowhere (closed loops and lines coinciding with
/// a plane).
pub fn nodal_line_endpoints(
    decomp: &NodalDecomposition,
    domain: &FundamentalDomain,
) -> Result<Vec<RestrictedPolyline>> {
    let sub = &domain.submesh;
    if domain.lift.iter().any(|&f| f >= decomp.signs.len()) {
        return Err(Error::Nodal(
            "fundamental domain does not belong to the decomposed mesh".into(),
        ));
    }
    let signs_sub: Vec<Sign> = domain.lift.iter().map(|&f| decomp.signs[f]).collect();
    let polylines = build_polylines(&sub.triangles, &signs_sub, |a, b| {
        let (fa, fb) = (domain.lift[a], domain.lift[b]);
        decomp.crossings.get(&(fa.min(fb), fa.max(fb))).copied()
    })?;

    // Label lookup tables for arc edges and arc vertices.
    let mut edge_label: BTreeMap<(usize, usize), ArcLabel> = BTreeMap::new();
    let mut vertex_labels: BTreeMap<usize, BTreeSet<ArcLabel>> = BTreeMap::new();
    for arc in &domain.arcs {
        for w in arc.vertices.windows(2) {
            edge_label.insert((w[0].min(w[1]), w[0].max(w[1])), arc.label);
        }
        if arc.closed && arc.vertices.len() >= 2 {
            let (a, b) = (arc.vertices[0], *arc.vertices.last().unwrap());
            edge_label.insert((a.min(b), a.max(b)), arc.label);
        }
        for &v in &arc.vertices {
            vertex_labels.entry(v).or_default().insert(arc.label);
        }
    }

    let classify_node = |node: &NodalNode| -> EndpointClass {
        match *node {
            NodalNode::EdgeCross { a, b, .. } => match edge_label.get(&(a, b)) {
                Some(&l) => EndpointClass::Arc(l),
                None => EndpointClass::Interior,
            },
            NodalNode::ZeroVertex(v) => {
                let labels = vertex_labels.get(&v);
                match labels.map(|s| s.len()).unwrap_or(0) {
                    0 => EndpointClass::Interior,
                    1 => EndpointClass::Arc(*labels.unwrap().iter().next().unwrap()),
                    _ => EndpointClass::Ambiguous,
                }
            }
        }
    };

    let mut out = Vec::new();
    for pl in polylines {
        // A line whose nodes all sit on one plane arc is reported as
        // coinciding with that arc.
        let mut common: Option<BTreeSet<ArcLabel>> = None;
        let mut all_zero_vertices = true;
        for node in &pl.nodes {
            match node {
                NodalNode::ZeroVertex(v) => {
                    let labels = vertex_labels.get(v).cloned().unwrap_or_default();
                    common = Some(match common {
                        None => labels,
                        Some(prev) => prev.intersection(&labels).copied().collect(),
                    });
                }
                _ => {
                    all_zero_vertices = false;
                    break;
                }
            }
        }
        let coincident = if all_zero_vertices {
            common
                .filter(|s| s.len() == 1)
                .and_then(|s| s.into_iter().next())
                .filter(|l| matches!(l, ArcLabel::Plane(_)))
        } else {
            None
        };
        let kind = if let Some(label) = coincident {
            RestrictionKind::PlaneCoincident(label)
        } else if pl.closed {
            RestrictionKind::Closed
        } else {
            RestrictionKind::Open {
                start: classify_node(pl.nodes.first().unwrap()),
                end: classify_node(pl.nodes.last().unwrap()),
            }
        };
        out.push(RestrictedPolyline { polyline: pl, kind });
    }
    Ok(out)
}

/// JSON nodal report: domain count of the full decomposition plus the
/// restricted polylines with their endpoint labels. Closed loops are
/// labeled `interior` on both ends; a plane-coincident line carries its
/// arc label on both ends.
pub fn nodal_report_json(
    decomp: &NodalDecomposition,
    restricted: &[RestrictedPolyline],
    domain: &FundamentalDomain,
) -> String {
    let mut polylines = Vec::new();
    let mut endpoints = Vec::new();
    for rp in restricted {
        let pts: Vec<String> = rp
            .polyline
            .points(&domain.submesh.vertices)
            .iter()
            .map(|p| format!("[{},{},{}]", f17(p[0]), f17(p[1]), f17(p[2])))
            .collect();
        polylines.push(format!("[{}]", pts.join(",")));
        let (s, e) = match &rp.kind {
            RestrictionKind::Open { start, end } => (start.as_str(), end.as_str()),
            RestrictionKind::Closed => ("interior".to_string(), "interior".to_string()),
            RestrictionKind::PlaneCoincident(l) => (l.as_str(), l.as_str()),
        };
        endpoints.push(format!("[\"{s}\",\"{e}\"]"));
    }
    format!(
        "{{\"schema\":1,\"domain_count\":{},\"polylines\":[{}],\"endpoints\":[{}]}}",
        decomp.domain_count,
        polylines.join(","),
        endpoints.join(",")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_symmetric_mesh, fundamental_domain};
    use crate::steklov::steklov_spectrum;
    use crate::surfaces::catalog;

    fn build(name: &str, res: (usize, usize)) -> TriangleMesh {
        build_symmetric_mesh(&catalog(name).unwrap(), res).unwrap().0
    }

    #[test]
    fn constant_function_has_one_domain_and_no_lines() {
        let mesh = build("unit-disk", (4, 16));
        let u = vec![3.0; mesh.vertex_count()];
        let d = nodal_domains(&mesh, &u, 1e-8).unwrap();
        assert_eq!(d.domain_count, 1);
        assert!(d.polylines.is_empty());
        assert!(d.domain_labels.iter().all(|l| *l == Some(0)));
    }

    #[test]
    fn coordinate_function_splits_the_disk_in_two() {
        let mesh = build("unit-disk", (6, 24));
        let u: Vec<f64> = mesh.vertices.iter().map(|p| p[1]).collect();
        let d = nodal_domains(&mesh, &u, 1e-8).unwrap();
        assert_eq!(d.domain_count, 2);
        // The zero set is the horizontal diameter: one open chain of
        // exactly-zero vertices.
        assert_eq!(d.polylines.len(), 1);
        assert!(!d.polylines[0].closed);
        assert!(d.polylines[0]
            .nodes
            .iter()
            .all(|n| matches!(n, NodalNode::ZeroVertex(_))));
        let pts = d.polylines[0].points(&mesh.vertices);
        assert!(pts.iter().all(|p| p[1] == 0.0));
        assert_eq!(pts.len(), 2 * 6 + 1);
    }

    #[test]
    fn equator_of_the_catenoid_is_a_closed_nodal_line() {
        let mesh = build("critical-catenoid", (6, 16));
        let u: Vec<f64> = mesh.vertices.iter().map(|p| p[2]).collect();
        let d = nodal_domains(&mesh, &u, 1e-8).unwrap();
        assert_eq!(d.domain_count, 2);
        assert_eq!(d.polylines.len(), 1);
        assert!(d.polylines[0].closed);
        assert_eq!(d.polylines[0].nodes.len(), 16);
    }

    #[test]
    fn sign_and_scale_invariance() {
        let mesh = build("critical-catenoid", (4, 12));
        let u: Vec<f64> = mesh
            .vertices
            .iter()
            .map(|p| p[0] + 0.3 * p[2] - 0.1)
            .collect();
        let d0 = nodal_domains(&mesh, &u, 1e-8).unwrap();
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let scaled: Vec<f64> = u.iter().map(|v| 17.25 * v).collect();
        assert_eq!(nodal_domains(&mesh, &neg, 1e-8).unwrap().domain_count, d0.domain_count);
        let ds = nodal_domains(&mesh, &scaled, 1e-8).unwrap();
        assert_eq!(ds.domain_count, d0.domain_count);
        assert_eq!(ds.signs.iter().filter(|s| **s == Sign::Zero).count(),
                   d0.signs.iter().filter(|s| **s == Sign::Zero).count());
    }

    #[test]
    fn identically_zero_functions_are_rejected() {
        let mesh = build("unit-disk", (2, 8));
        let u = vec![0.0; mesh.vertex_count()];
        assert!(nodal_domains(&mesh, &u, 1e-8).is_err());
        assert!(nodal_domains(&mesh, &[1.0], 1e-8).is_err());
        let ones = vec![1.0; mesh.vertex_count()];
        assert!(nodal_domains(&mesh, &ones, 1.5).is_err());
    }

    #[test]
    fn union_find_agrees_with_breadth_first_search() {
        use rand::Rng;
        let mesh = build("critical-catenoid", (4, 16));
        let n = mesh.vertex_count();
        let mut adj = vec![Vec::new(); n];
        for tri in &mesh.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let d = nodal_domains(&mesh, &u, 0.05).unwrap();
            // BFS oracle over strictly signed vertices.
            let mut seen = vec![false; n];
            let mut count = 0;
            for s in 0..n {
                if d.signs[s] == Sign::Zero || seen[s] {
                    continue;
                }
                count += 1;
                let mut queue = vec![s];
                seen[s] = true;
                while let Some(v) = queue.pop() {
                    assert_eq!(d.domain_labels[v].is_some(), true);
                    for &w in &adj[v] {
                        if !seen[w] && d.signs[w] == d.signs[v] {
                            seen[w] = true;
                            assert_eq!(d.domain_labels[w], d.domain_labels[v]);
                            queue.push(w);
                        }
                    }
                }
            }
            assert_eq!(count, d.domain_count);
        }
    }

    #[test]
    fn courant_holds_for_the_disk_first_cluster() {
        let mesh = build("unit-disk", (8, 32));
        let spec = steklov_spectrum(&mesh, 3).unwrap();
        let report = courant_check(&spec, &mesh, DEFAULT_NODAL_TAU, 1e-2).unwrap();
        assert_eq!(report.multiplicity, 2);
        assert_eq!(report.samples, 2 + 2 + 8);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert!((report.cluster_value - 1.0).abs() < 2e-2);
    }

    #[test]
    fn orbit_counts_match_the_four_ending_edges() {
        let cases = [
            (EndingEdge::Gamma, 9),
            (EndingEdge::E1, 5),
            (EndingEdge::E2, 5),
            (EndingEdge::E3, 4),
        ];
        for (edge, want) in cases {
            let got = orbit_nodal_count(&OrbitPattern::new(edge)).unwrap();
            assert_eq!(got, want, "{}", edge.as_str());
        }
    }

    #[test]
    fn orbit_pattern_validation() {
        let mut p = OrbitPattern::new(EndingEdge::Gamma);
        p.group_order = 4;
        assert!(orbit_nodal_count(&p).is_err());
        let mut p = OrbitPattern::new(EndingEdge::E1);
        p.parities[1] = Parity::Odd;
        assert!(orbit_nodal_count(&p).is_err());
        assert!(EndingEdge::parse("e9").is_err());
        assert_eq!(EndingEdge::parse("gamma").unwrap(), EndingEdge::Gamma);
    }

    #[test]
    fn plane_coincident_line_on_the_disk() {
        let (mesh, action) = build_symmetric_mesh(&catalog("unit-disk").unwrap(), (6, 24)).unwrap();
        let fd = fundamental_domain(&mesh, &action).unwrap();
        let u: Vec<f64> = mesh.vertices.iter().map(|p| p[1]).collect();
        let d = nodal_domains(&mesh, &u, 1e-8).unwrap();
        let restricted = nodal_line_endpoints(&d, &fd).unwrap();
        assert_eq!(restricted.len(), 1);
        match restricted[0].kind {
            RestrictionKind::PlaneCoincident(ArcLabel::Plane(1)) => {}
            ref k => panic!("expected coincidence with e2, got {k:?}"),
        }
    }

    #[test]
    fn equator_restricts_to_a_plane_coincident_arc() {
        let (mesh, action) =
            build_symmetric_mesh(&catalog("critical-catenoid").unwrap(), (6, 16)).unwrap();
        let fd = fundamental_domain(&mesh, &action).unwrap();
        let u: Vec<f64> = mesh.vertices.iter().map(|p| p[2]).collect();
        let d = nodal_domains(&mesh, &u, 1e-8).unwrap();
        let restricted = nodal_line_endpoints(&d, &fd).unwrap();
        assert_eq!(restricted.len(), 1);
        match restricted[0].kind {
            RestrictionKind::PlaneCoincident(ArcLabel::Plane(2)) => {}
            ref k => panic!("expected coincidence with e3, got {k:?}"),
        }
    }

    #[test]
    fn diagonal_line_runs_from_corner_to_gamma() {
        // x^2 - y^2 vanishes on the diagonal x = y of the quarter disk,
        // which enters at the center corner and exits through gamma.
        let (mesh, action) = build_symmetric_mesh(&catalog("unit-disk").unwrap(), (6, 24)).unwrap();
        let fd = fundamental_domain(&mesh, &action).unwrap();
        let u: Vec<f64> = mesh
            .vertices
            .iter()
            .map(|p| p[0] * p[0] - p[1] * p[1])
            .collect();
        let d = nodal_domains(&mesh, &u, 1e-8).unwrap();
        let restricted = nodal_line_endpoints(&d, &fd).unwrap();
        assert_eq!(restricted.len(), 1);
        match restricted[0].kind {
            RestrictionKind::Open { start, end } => {
                let set = [start, end];
                assert!(set.contains(&EndpointClass::Ambiguous), "{set:?}");
                assert!(set.contains(&EndpointClass::Arc(ArcLabel::Gamma)), "{set:?}");
            }
            ref k => panic!("expected an open chain, got {k:?}"),
        }
    }

    #[test]
    fn report_json_shape() {
        let (mesh, action) = build_symmetric_mesh(&catalog("unit-disk").unwrap(), (4, 16)).unwrap();
        let fd = fundamental_domain(&mesh, &action).unwrap();
        let u: Vec<f64> = mesh.vertices.iter().map(|p| p[1]).collect();
        let d = nodal_domains(&mesh, &u, 1e-8).unwrap();
        let restricted = nodal_line_endpoints(&d, &fd).unwrap();
        let json = nodal_report_json(&d, &restricted, &fd);
        assert!(json.starts_with("{\"schema\":1,\"domain_count\":2,"));
        assert!(json.contains("\"polylines\":[[["));
        assert!(json.contains("\"endpoints\":[[\"e2\",\"e2\"]]"));
        assert_eq!(json, nodal_report_json(&d, &restricted, &fd));
    }
}
