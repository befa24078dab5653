//! Reflection-symmetric triangulations of the surface catalog.
//!
//! The chart is evaluated only on a canonical fundamental patch of the
//! parameter grid; every other vertex is produced by flipping coordinate
//! signs. Coordinates lying on a symmetry plane are snapped to exact zeros
//! and negative zeros are normalized away, so each reflection acts on the
//! vertex array as a permutation that reproduces it bitwise. The diagonal
//! pattern of the quad split is chosen so the triangle set is preserved as
//! well, which makes assembled operators exactly equivariant instead of
//! equivariant up to rounding.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::surfaces::{Axis, ParametricSurface, SurfaceKind};

/// Triangles whose area falls below this fraction of the mean are treated
/// as degenerate during construction and assembly.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub name: String,
    pub vertices: Vec<[f64; 3]>,
    /// Positively oriented vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary cycles, each listed once in traversal order.
    pub boundary_loops: Vec<Vec<usize>>,
    /// Bit `g` set when the vertex lies exactly on the fixed plane of
    /// symmetry generator `g`.
    pub plane_tags: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQuality {
    pub min_area: f64,
    pub mean_area: f64,
    /// Circumradius over twice the inradius, worst triangle; 1 for
    /// equilateral.
    pub max_aspect_ratio: f64,
}

impl TriangleMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Sorted, deduplicated list of vertices on the boundary.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_loops.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let u = sub3(self.vertices[b], self.vertices[a]);
        let v = sub3(self.vertices[c], self.vertices[a]);
        0.5 * norm3(cross3(u, v))
    }

    /// Total length of the polygonal boundary.
    pub fn boundary_length(&self) -> f64 {
        self.boundary_loops
            .iter()
            .flat_map(|lp| {
                (0..lp.len()).map(|k| {
                    norm3(sub3(self.vertices[lp[(k + 1) % lp.len()]], self.vertices[lp[k]]))
                })
            })
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        let mut edges = BTreeSet::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.triangle_count() as i64
    }

    pub fn quality(&self) -> MeshQuality {
        let mut min_area = f64::INFINITY;
        let mut total = 0.0;
        let mut max_aspect = 0.0_f64;
        for (t, tri) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(t);
            min_area = min_area.min(area);
            total += area;
            let la = norm3(sub3(self.vertices[tri[1]], self.vertices[tri[0]]));
            let lb = norm3(sub3(self.vertices[tri[2]], self.vertices[tri[1]]));
            let lc = norm3(sub3(self.vertices[tri[0]], self.vertices[tri[2]]));
            if area > 0.0 {
                // R / (2 r) = abc * (a + b + c) / (16 A^2)
                max_aspect = max_aspect.max(la * lb * lc * (la + lb + lc) / (16.0 * area * area));
            } else {
                max_aspect = f64::INFINITY;
            }
        }
        MeshQuality {
            min_area,
            mean_area: total / self.triangles.len().max(1) as f64,
            max_aspect_ratio: max_aspect,
        }
    }

    /// Structural soundness: index ranges, distinct triangle corners,
    /// stored boundary loops agreeing with the connectivity, tag array
    /// length.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertex_count();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} repeats a vertex")));
            }
        }
        if self.plane_tags.len() != n {
            return Err(Error::Mesh("plane tag array length mismatch".into()));
        }
        let recomputed = boundary_loops(self)?;
        if recomputed != self.boundary_loops {
            return Err(Error::Mesh("stored boundary loops are stale".into()));
        }
        Ok(())
    }
}

/// Vertex permutation realizing one reflection generator.
#[derive(Debug, Clone)]
pub struct ReflectionGenerator {
    pub axis: Axis,
    pub permutation: Vec<usize>,
}

/// The reflection group acting on a mesh, presented by commuting involutive
/// generators.
#[derive(Debug, Clone)]
pub struct GroupAction {
    pub generators: Vec<ReflectionGenerator>,
    /// Group order, `2^(number of generators)`.
    pub orbit_count: usize,
}

impl GroupAction {
    /// Vertex permutations of all group elements (one per generator
    /// subset), identity first.
    pub fn element_permutations(&self, n: usize) -> Vec<Vec<usize>> {
        let mut elems: Vec<Vec<usize>> = vec![(0..n).collect()];
        for g in &self.generators {
            let prior: Vec<Vec<usize>> = elems.clone();
            for e in prior {
                elems.push(e.iter().map(|&k| g.permutation[k]).collect());
            }
        }
        elems
    }
}

/// Side of a fundamental-domain boundary arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArcLabel {
    /// Lies on the boundary of the full mesh.
    Gamma,
    /// Lies in the fixed plane of symmetry generator `g` (0-based).
    Plane(usize),
}

impl ArcLabel {
    pub fn as_str(&self) -> String {
        match self {
            ArcLabel::Gamma => "gamma".to_string(),
            ArcLabel::Plane(g) => format!("e{}", g + 1),
        }
    }
}

/// A connected labeled arc of the fundamental-domain boundary, stored as a
/// vertex chain in submesh indices.
#[derive(Debug, Clone)]
pub struct LabeledArc {
    pub label: ArcLabel,
    pub vertices: Vec<usize>,
    pub closed: bool,
}

/// One closed fundamental domain of the group action: the triangles whose
/// vertices have nonnegative coordinates along every generator normal.
#[derive(Debug, Clone)]
pub struct FundamentalDomain {
    pub submesh: TriangleMesh,
    /// Submesh vertex index -> full mesh vertex index (strictly increasing).
    pub lift: Vec<usize>,
    /// Boundary arcs sorted gamma-first, then by generator.
    pub arcs: Vec<LabeledArc>,
}

impl FundamentalDomain {
    pub fn arc(&self, label: ArcLabel) -> Option<&LabeledArc> {
        self.arcs.iter().find(|a| a.label == label)
    }
}

/// Check that a grid resolution respects the surface's reflection group:
/// the angular count must be divisible by 4 so the quarter-turn sectors
/// match up, and a catenoid needs an even axial count for the equatorial
/// reflection.
pub fn resolution_compatible(surface: &ParametricSurface, resolution: (usize, usize)) -> Result<()> {
    let (nr, nt) = resolution;
    if nr == 0 || nt == 0 {
        return Err(Error::Mesh(format!("resolution {nr}x{nt} must be positive")));
    }
    if nt % 4 != 0 || nt < 4 {
        return Err(Error::Mesh(format!(
            "angular resolution {nt} is not divisible by 4; quarter-plane reflections would not act on the grid"
        )));
    }
    match surface.kind {
        SurfaceKind::Catenoid(_) => {
            if nr % 2 != 0 || nr < 2 {
                return Err(Error::Mesh(format!(
                    "axial resolution {nr} must be even for the equatorial reflection of {}",
                    surface.name
                )));
            }
        }
        SurfaceKind::Disk | SurfaceKind::FlatAnnulus { .. } => {}
    }
    Ok(())
}

fn signed(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        s * x
    }
}

/// Fold an angular index into the first quadrant: returns the canonical
/// index in `[0, m]` (where `m = nt/4` spans a quarter turn) and the sign
/// flips recovering the original quadrant.
fn canonical_angle(j: usize, m: usize) -> (usize, f64, f64) {
    debug_assert!(j < 4 * m);
    match j / m {
        0 => (j, 1.0, 1.0),
        1 => (2 * m - j, -1.0, 1.0),
        2 => (j - 2 * m, -1.0, -1.0),
        _ => (4 * m - j, 1.0, -1.0),
    }
}

/// Checkerboard quad split: alternating diagonals so that every grid
/// reflection (which mirrors a quad and swaps its diagonals) maps the
/// triangle set to itself.
fn push_quad(triangles: &mut Vec<[usize; 3]>, parity: usize, a: usize, b: usize, c: usize, d: usize) {
    if parity % 2 == 0 {
        triangles.push([a, b, c]);
        triangles.push([a, c, d]);
    } else {
        triangles.push([a, b, d]);
        triangles.push([b, c, d]);
    }
}

/// Build a reflection-symmetric mesh of a catalog surface on an
/// `nr x ntheta` parameter grid, together with the group action on its
/// vertices. The returned mesh is exactly invariant: each generator's
/// permutation composed with the coordinate reflection reproduces the
/// vertex array bitwise and maps triangles onto triangles.
pub fn build_symmetric_mesh(
    surface: &ParametricSurface,
    resolution: (usize, usize),
) -> Result<(TriangleMesh, GroupAction)> {
    resolution_compatible(surface, resolution)?;
    let (nr, nt) = resolution;
    let m = nt / 4;
    let tau = std::f64::consts::TAU;

    let mut vertices: Vec<[f64; 3]>;
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut generators: Vec<ReflectionGenerator> = Vec::new();

    match &surface.kind {
        SurfaceKind::Catenoid(p) => {
            let half = nr / 2;
            vertices = Vec::with_capacity((nr + 1) * nt);
            for i in 0..=nr {
                let (ci, sz) = if i < half { (nr - i, -1.0) } else { (i, 1.0) };
                let u = p.rho * (2.0 * ci as f64 - nr as f64) / nr as f64;
                let ch = u.cosh();
                for j in 0..nt {
                    let (cj, sx, sy) = canonical_angle(j, m);
                    let theta = tau * cj as f64 / nt as f64;
                    let mut x = p.scale * ch * theta.cos();
                    let mut y = p.scale * ch * theta.sin();
                    let mut z = p.scale * u;
                    if cj == m {
                        x = 0.0;
                    }
                    if cj == 0 {
                        y = 0.0;
                    }
                    if ci == half {
                        z = 0.0;
                    }
                    vertices.push([signed(x, sx), signed(y, sy), signed(z, sz)]);
                }
            }
            for i in 0..nr {
                for j in 0..nt {
                    let jp = (j + 1) % nt;
                    push_quad(
                        &mut triangles,
                        i + j,
                        i * nt + j,
                        (i + 1) * nt + j,
                        (i + 1) * nt + jp,
                        i * nt + jp,
                    );
                }
            }
            let id = |i: usize, j: usize| i * nt + j;
            let mut px = vec![0; (nr + 1) * nt];
            let mut py = vec![0; (nr + 1) * nt];
            let mut pz = vec![0; (nr + 1) * nt];
            for i in 0..=nr {
                for j in 0..nt {
                    px[id(i, j)] = id(i, (2 * m + nt - j) % nt);
                    py[id(i, j)] = id(i, (nt - j) % nt);
                    pz[id(i, j)] = id(nr - i, j);
                }
            }
            generators.push(ReflectionGenerator { axis: Axis::X, permutation: px });
            generators.push(ReflectionGenerator { axis: Axis::Y, permutation: py });
            generators.push(ReflectionGenerator { axis: Axis::Z, permutation: pz });
        }
        SurfaceKind::Disk | SurfaceKind::FlatAnnulus { .. } => {
            // Radii of the grid rings; the disk additionally has a center
            // vertex fanned to the innermost ring.
            let (radii, has_center): (Vec<f64>, bool) = match surface.kind {
                SurfaceKind::Disk => ((1..=nr).map(|k| k as f64 / nr as f64).collect(), true),
                SurfaceKind::FlatAnnulus { inner_radius } => (
                    (0..=nr)
                        .map(|k| inner_radius + (1.0 - inner_radius) * k as f64 / nr as f64)
                        .collect(),
                    false,
                ),
                _ => unreachable!(),
            };
            let base = usize::from(has_center);
            let rid = |k: usize, j: usize| base + k * nt + j;
            vertices = Vec::with_capacity(base + radii.len() * nt);
            if has_center {
                vertices.push([0.0, 0.0, 0.0]);
            }
            for &r in &radii {
                for j in 0..nt {
                    let (cj, sx, sy) = canonical_angle(j, m);
                    let theta = tau * cj as f64 / nt as f64;
                    let mut x = r * theta.cos();
                    let mut y = r * theta.sin();
                    if cj == m {
                        x = 0.0;
                    }
                    if cj == 0 {
                        y = 0.0;
                    }
                    vertices.push([signed(x, sx), signed(y, sy), 0.0]);
                }
            }
            if has_center {
                for j in 0..nt {
                    triangles.push([0, rid(0, j), rid(0, (j + 1) % nt)]);
                }
            }
            for k in 0..radii.len() - 1 {
                for j in 0..nt {
                    let jp = (j + 1) % nt;
                    push_quad(
                        &mut triangles,
                        k + j,
                        rid(k, j),
                        rid(k + 1, j),
                        rid(k + 1, jp),
                        rid(k, jp),
                    );
                }
            }
            let n = vertices.len();
            let mut px = vec![0; n];
            let mut py = vec![0; n];
            for k in 0..radii.len() {
                for j in 0..nt {
                    px[rid(k, j)] = rid(k, (2 * m + nt - j) % nt);
                    py[rid(k, j)] = rid(k, (nt - j) % nt);
                }
            }
            generators.push(ReflectionGenerator { axis: Axis::X, permutation: px });
            generators.push(ReflectionGenerator { axis: Axis::Y, permutation: py });
        }
    }

    debug_assert_eq!(
        generators.iter().map(|g| g.axis).collect::<Vec<_>>(),
        surface.symmetry_planes
    );

    let mut mesh = TriangleMesh {
        name: format!("{}:{}x{}", surface.name, nr, nt),
        vertices,
        triangles,
        boundary_loops: Vec::new(),
        plane_tags: Vec::new(),
    };
    mesh.boundary_loops = boundary_loops(&mesh)?;
    mesh.plane_tags = compute_plane_tags(&mesh.vertices, &generators);

    let mean = mesh.triangles.len() as f64;
    let mean_area = (0..mesh.triangles.len())
        .map(|t| mesh.triangle_area(t))
        .sum::<f64>()
        / mean;
    for t in 0..mesh.triangles.len() {
        if mesh.triangle_area(t) <= DEGENERATE_AREA_FRACTION * mean_area {
            return Err(Error::Mesh(format!(
                "triangle {t} is degenerate (area {} against mean {mean_area})",
                mesh.triangle_area(t)
            )));
        }
    }

    let action = GroupAction {
        orbit_count: 1 << generators.len(),
        generators,
    };
    verify_group_invariance(&mesh, &action)?;
    Ok((mesh, action))
}

fn compute_plane_tags(vertices: &[[f64; 3]], generators: &[ReflectionGenerator]) -> Vec<u8> {
    vertices
        .iter()
        .map(|v| {
            let mut tag = 0u8;
            for (g, gen) in generators.iter().enumerate() {
                if v[gen.axis.index()] == 0.0 {
                    tag |= 1 << g;
                }
            }
            tag
        })
        .collect()
}

/// Verify that every generator is an involutive permutation whose
/// composition with the coordinate reflection reproduces the vertex array
/// bitwise and maps the triangle set onto itself.
pub fn verify_group_invariance(mesh: &TriangleMesh, action: &GroupAction) -> Result<()> {
    let n = mesh.vertex_count();
    let tri_set: BTreeSet<[usize; 3]> = mesh
        .triangles
        .iter()
        .map(|t| {
            let mut s = *t;
            s.sort_unstable();
            s
        })
        .collect();
    for gen in &action.generators {
        let p = &gen.permutation;
        if p.len() != n {
            return Err(Error::Mesh(format!(
                "{:?} permutation length {} does not match vertex count {n}",
                gen.axis,
                p.len()
            )));
        }
        for k in 0..n {
            if p[k] >= n || p[p[k]] != k {
                return Err(Error::Mesh(format!(
                    "{:?} permutation is not an involution at vertex {k}",
                    gen.axis
                )));
            }
            let expect = gen.axis.reflect(mesh.vertices[p[k]]);
            let got = mesh.vertices[k];
            if (0..3).any(|i| expect[i].to_bits() != got[i].to_bits()) {
                return Err(Error::Mesh(format!(
                    "mesh is not bitwise invariant under {:?} at vertex {k}",
                    gen.axis
                )));
            }
        }
        for tri in &mesh.triangles {
            let mut img = [p[tri[0]], p[tri[1]], p[tri[2]]];
            img.sort_unstable();
            if !tri_set.contains(&img) {
                return Err(Error::Mesh(format!(
                    "triangle {tri:?} is not mapped to a triangle by {:?}",
                    gen.axis
                )));
            }
        }
    }
    if action.orbit_count != 1 << action.generators.len() {
        return Err(Error::Mesh("orbit count does not match generator count".into()));
    }
    Ok(())
}

/// Extract the boundary cycles of a triangle mesh from its connectivity.
///
/// Errors on non-manifold edges (more than two incident triangles),
/// inconsistent orientation (an interior edge traversed twice the same
/// way), and boundary that fails to decompose into disjoint simple cycles.
pub fn boundary_loops(mesh: &TriangleMesh) -> Result<Vec<Vec<usize>>> {
    // (count, tail, head, duplicated direction)
    let mut edges: BTreeMap<(usize, usize), (u32, usize, usize, bool)> = BTreeMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for e in 0..3 {
            let a = tri[e];
            let b = tri[(e + 1) % 3];
            if a == b {
                return Err(Error::Mesh(format!("triangle {t} repeats vertex {a}")));
            }
            let key = (a.min(b), a.max(b));
            let entry = edges.entry(key).or_insert((0, a, b, false));
            if entry.0 > 0 && (entry.1, entry.2) == (a, b) {
                entry.3 = true;
            }
            entry.0 += 1;
        }
    }
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for (&(a, b), &(count, tail, head, dup)) in &edges {
        match count {
            1 => {
                if next.insert(tail, head).is_some() {
                    return Err(Error::Mesh(format!(
                        "boundary branches at vertex {tail}; not a manifold-with-boundary"
                    )));
                }
            }
            2 => {
                if dup {
                    return Err(Error::Mesh(format!(
                        "edge ({a}, {b}) is traversed twice in the same direction; orientation is inconsistent"
                    )));
                }
            }
            n => {
                return Err(Error::Mesh(format!(
                    "edge ({a}, {b}) belongs to {n} triangles; not a manifold"
                )));
            }
        }
    }
    let mut loops = Vec::new();
    let mut visited = BTreeSet::new();
    for (&start, _) in &next {
        if visited.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        visited.insert(start);
        let mut cur = next[&start];
        while cur != start {
            if !visited.insert(cur) {
                return Err(Error::Mesh(
                    "boundary walk does not close into disjoint simple cycles".into(),
                ));
            }
            cycle.push(cur);
            cur = *next
                .get(&cur)
                .ok_or_else(|| Error::Mesh("boundary chain ends abruptly".into()))?;
        }
        loops.push(cycle);
    }
    Ok(loops)
}

/// Cut out the closed fundamental domain of the action: triangles whose
/// vertices lie in the intersection of the nonnegative half-spaces of all
/// generator planes. Returns the submesh, the lift back to full-mesh
/// indices, and the boundary arcs labeled gamma (on the surface boundary)
/// or by the plane they lie in.
pub fn fundamental_domain(mesh: &TriangleMesh, action: &GroupAction) -> Result<FundamentalDomain> {
    verify_group_invariance(mesh, action)?;
    let axes: Vec<usize> = action.generators.iter().map(|g| g.axis.index()).collect();
    let keep: Vec<[usize; 3]> = mesh
        .triangles
        .iter()
        .filter(|tri| {
            tri.iter().all(|&v| axes.iter().all(|&a| mesh.vertices[v][a] >= 0.0))
        })
        .copied()
        .collect();
    if keep.is_empty() {
        return Err(Error::Mesh("fundamental domain contains no triangles".into()));
    }
    if keep.len() * action.orbit_count != mesh.triangle_count() {
        return Err(Error::Mesh(format!(
            "fundamental domain with {} triangles does not tile the {} triangles of the mesh under {} copies",
            keep.len(),
            mesh.triangle_count(),
            action.orbit_count
        )));
    }

    let used: BTreeSet<usize> = keep.iter().flatten().copied().collect();
    let lift: Vec<usize> = used.iter().copied().collect();
    let mut to_sub: BTreeMap<usize, usize> = BTreeMap::new();
    for (s, &f) in lift.iter().enumerate() {
        to_sub.insert(f, s);
    }
    let sub_tris: Vec<[usize; 3]> = keep
        .iter()
        .map(|t| [to_sub[&t[0]], to_sub[&t[1]], to_sub[&t[2]]])
        .collect();
    let mut submesh = TriangleMesh {
        name: format!("{}:fundamental-domain", mesh.name),
        vertices: lift.iter().map(|&f| mesh.vertices[f]).collect(),
        triangles: sub_tris,
        boundary_loops: Vec::new(),
        plane_tags: lift.iter().map(|&f| mesh.plane_tags[f]).collect(),
    };
    submesh.boundary_loops = boundary_loops(&submesh)?;

    let full_boundary: BTreeSet<(usize, usize)> = mesh
        .boundary_loops
        .iter()
        .flat_map(|lp| {
            lp.iter()
                .zip(lp.iter().cycle().skip(1))
                .map(|(&a, &b)| (a.min(b), a.max(b)))
                .take(lp.len())
        })
        .collect();
    let gen_mask: u8 = ((1u16 << action.generators.len()) - 1) as u8;

    let mut per_label: BTreeMap<ArcLabel, Vec<(usize, usize)>> = BTreeMap::new();
    for lp in &submesh.boundary_loops {
        for k in 0..lp.len() {
            let (sa, sb) = (lp[k], lp[(k + 1) % lp.len()]);
            let (fa, fb) = (lift[sa], lift[sb]);
            let key = (fa.min(fb), fa.max(fb));
            let label = if full_boundary.contains(&key) {
                ArcLabel::Gamma
            } else {
                let shared = mesh.plane_tags[fa] & mesh.plane_tags[fb] & gen_mask;
                match shared.count_ones() {
                    1 => ArcLabel::Plane(shared.trailing_zeros() as usize),
                    0 => {
                        return Err(Error::Mesh(format!(
                            "fundamental-domain edge ({fa}, {fb}) lies neither on the boundary nor in a symmetry plane"
                        )))
                    }
                    _ => {
                        return Err(Error::Mesh(format!(
                            "ambiguous arc label: edge ({fa}, {fb}) lies in two symmetry planes"
                        )))
                    }
                }
            };
            per_label.entry(label).or_default().push((sa, sb));
        }
    }

    let mut arcs = Vec::new();
    for (label, edges) in per_label {
        for arc in chain_edges(label, &edges)? {
            arcs.push(arc);
        }
    }
    arcs.sort_by_key(|a| (a.label, a.vertices.iter().copied().min().unwrap_or(0)));

    Ok(FundamentalDomain {
        submesh,
        lift,
        arcs,
    })
}

/// Assemble a label's edges into simple chains (or cycles), one
/// `LabeledArc` per connected component.
fn chain_edges(label: ArcLabel, edges: &[(usize, usize)]) -> Result<Vec<LabeledArc>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for (v, ns) in &adj {
        if ns.len() > 2 {
            return Err(Error::Mesh(format!(
                "labeled arc {} branches at vertex {v}",
                label.as_str()
            )));
        }
    }
    let mut arcs = Vec::new();
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    // Open chains first, started from their smallest endpoint.
    let mut starts: Vec<usize> = adj
        .iter()
        .filter(|(_, ns)| ns.len() == 1)
        .map(|(&v, _)| v)
        .collect();
    starts.sort_unstable();
    for &start in &starts {
        if visited.contains(&start) {
            continue;
        }
        arcs.push(walk_chain(label, &adj, &mut visited, start, false));
    }
    // Remaining components are cycles.
    for (&start, _) in &adj {
        if !visited.contains(&start) {
            arcs.push(walk_chain(label, &adj, &mut visited, start, true));
        }
    }
    Ok(arcs)
}

fn walk_chain(
    label: ArcLabel,
    adj: &BTreeMap<usize, Vec<usize>>,
    visited: &mut BTreeSet<usize>,
    start: usize,
    closed: bool,
) -> LabeledArc {
    let mut chain = vec![start];
    visited.insert(start);
    let mut cur = start;
    loop {
        let mut ns: Vec<usize> = adj[&cur]
            .iter()
            .copied()
            .filter(|v| !visited.contains(v))
            .collect();
        ns.sort_unstable();
        match ns.first() {
            Some(&nxt) => {
                visited.insert(nxt);
                chain.push(nxt);
                cur = nxt;
            }
            None => break,
        }
    }
    LabeledArc {
        label,
        vertices: chain,
        closed,
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}
