//! The primal side: polycube quad meshes with integer corners, construction
//! from a valid loop structure by level-graph layering, corner
//! classification, order-equivalence, and OBJ export.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::structure::{Axis, LoopStructure, RegionIx, AXES};
use crate::validate::{check_polycube, ValidationReport};

/// Quad mesh with integer corner positions. Closed, connected, orientable,
/// with axis-aligned rectangle faces and corner degrees between 3 and 6; all
/// of it verified at construction. Faces are wound counterclockwise as seen
/// from outside.
#[derive(Debug, Clone)]
pub struct PolycubeMesh {
    positions: Vec<[i64; 3]>,
    quads: Vec<[usize; 4]>,
    darts: MeshDarts,
}

impl PartialEq for PolycubeMesh {
    fn eq(&self, other: &Self) -> bool {
        self.positions == other.positions && self.quads == other.quads
    }
}

impl Eq for PolycubeMesh {}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh has no faces")]
    Empty,
    #[error("quad {0} references corner {1} out of range")]
    CornerOutOfRange(usize, usize),
    #[error("quad {0} is not an axis-aligned rectangle")]
    NotRectangle(usize),
    #[error("directed edge {0}->{1} appears in more than one face; orientation inconsistent or non-manifold")]
    DuplicateDirectedEdge(usize, usize),
    #[error("edge {0}->{1} has no partner edge; mesh not closed")]
    OpenEdge(usize, usize),
    #[error("corner {corner} has degree {degree}, outside 3..=6")]
    BadDegree { corner: usize, degree: usize },
    #[error("corner {0} has two incident edges in the same direction")]
    OverlappingEdges(usize),
    #[error("corner {0} is non-manifold: incident faces form more than one fan")]
    NonManifoldCorner(usize),
    #[error("mesh is not connected")]
    Disconnected,
    #[error("corner {0} is isolated")]
    IsolatedCorner(usize),
}

/// Dart tables for a mesh: dart `4q + i` is the directed edge of quad `q`
/// from corner slot `i` to slot `i+1`.
#[derive(Debug, Clone)]
pub(crate) struct MeshDarts {
    pub next: Vec<usize>,
    pub twin: Vec<usize>,
    pub origin: Vec<usize>,
}

impl MeshDarts {
    pub fn prev(&self, d: usize) -> usize {
        self.next[self.next[self.next[d]]]
    }
}

/// Pair every directed edge with its reverse. Fails when a directed edge
/// appears twice (inconsistent orientation or an edge shared by more than two
/// faces) or has no partner (open boundary).
fn build_darts(quads: &[[usize; 4]]) -> Result<MeshDarts, MeshError> {
    let n = 4 * quads.len();
    let mut next = vec![0usize; n];
    let mut origin = vec![0usize; n];
    // Directed edges packed as (from << 42) | (to << 21) | dart, so matching
    // a reverse edge is a plain integer search.
    const BITS: u32 = 21;
    const MASK: u64 = (1 << BITS) - 1;
    assert!(
        n < (1 << BITS) as usize && quads.iter().flatten().all(|&v| v < (1 << BITS) as usize),
        "mesh too large for packed edge keys"
    );
    let mut edges: Vec<u64> = Vec::with_capacity(n);
    for (qi, q) in quads.iter().enumerate() {
        for i in 0..4 {
            let d = 4 * qi + i;
            next[d] = 4 * qi + (i + 1) % 4;
            origin[d] = q[i];
            edges.push(((q[i] as u64) << (2 * BITS)) | ((q[(i + 1) % 4] as u64) << BITS) | d as u64);
        }
    }
    edges.sort_unstable();
    for w in edges.windows(2) {
        if w[0] >> BITS == w[1] >> BITS {
            return Err(MeshError::DuplicateDirectedEdge(
                (w[0] >> (2 * BITS)) as usize,
                ((w[0] >> BITS) & MASK) as usize,
            ));
        }
    }
    let mut twin = vec![0usize; n];
    for &e in &edges {
        let (u, v, d) = (e >> (2 * BITS), (e >> BITS) & MASK, (e & MASK) as usize);
        let probe = (v << (2 * BITS)) | (u << BITS);
        let ix = edges.partition_point(|&o| o < probe);
        if ix < edges.len() && edges[ix] >> BITS == probe >> BITS {
            twin[d] = (edges[ix] & MASK) as usize;
        } else {
            return Err(MeshError::OpenEdge(u as usize, v as usize));
        }
    }
    Ok(MeshDarts { next, twin, origin })
}

impl PolycubeMesh {
    pub fn new(positions: Vec<[i64; 3]>, quads: Vec<[usize; 4]>) -> Result<PolycubeMesh, MeshError> {
        if quads.is_empty() {
            return Err(MeshError::Empty);
        }
        for (qi, q) in quads.iter().enumerate() {
            for &v in q {
                if v >= positions.len() {
                    return Err(MeshError::CornerOutOfRange(qi, v));
                }
            }
            // Axis-aligned rectangle: opposite sides are negatives, adjacent
            // sides use two different axes, each side moves along one axis.
            let p = |i: usize| positions[q[i]];
            let sub = |a: [i64; 3], b: [i64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            let e0 = sub(p(1), p(0));
            let e1 = sub(p(2), p(1));
            let e2 = sub(p(3), p(2));
            let e3 = sub(p(0), p(3));
            let axis_of = |e: [i64; 3]| -> Option<usize> {
                match (e[0] != 0, e[1] != 0, e[2] != 0) {
                    (true, false, false) => Some(0),
                    (false, true, false) => Some(1),
                    (false, false, true) => Some(2),
                    _ => None,
                }
            };
            match (axis_of(e0), axis_of(e1)) {
                (Some(a), Some(b)) if a != b => {}
                _ => return Err(MeshError::NotRectangle(qi)),
            }
            let neg = |e: [i64; 3]| [-e[0], -e[1], -e[2]];
            if e2 != neg(e0) || e3 != neg(e1) {
                return Err(MeshError::NotRectangle(qi));
            }
        }

        let darts = build_darts(&quads)?;
        let mesh = PolycubeMesh {
            positions,
            quads,
            darts,
        };
        mesh.verify_topology()?;
        Ok(mesh)
    }

    /// Assemble a mesh whose validity is guaranteed by the caller's
    /// construction (and re-checked in debug builds). Used where a theorem,
    /// not luck, makes verification redundant.
    pub(crate) fn new_prevalidated(
        positions: Vec<[i64; 3]>,
        quads: Vec<[usize; 4]>,
    ) -> PolycubeMesh {
        debug_assert!(PolycubeMesh::new(positions.clone(), quads.clone()).is_ok());
        let darts = build_darts(&quads).expect("prevalidated mesh has paired edges");
        PolycubeMesh {
            positions,
            quads,
            darts,
        }
    }

    fn verify_topology(&self) -> Result<(), MeshError> {
        let darts = &self.darts;

        // Degrees, overlap, vertex fans. Group darts by origin with a
        // counting sort.
        let nv = self.positions.len();
        let nd = darts.origin.len();
        let mut degree = vec![0usize; nv];
        for d in 0..nd {
            degree[darts.origin[d]] += 1;
        }
        let mut offset = vec![0usize; nv + 1];
        for v in 0..nv {
            offset[v + 1] = offset[v] + degree[v];
        }
        let mut incident = vec![0usize; nd];
        let mut fill = offset.clone();
        for d in 0..nd {
            let v = darts.origin[d];
            incident[fill[v]] = d;
            fill[v] += 1;
        }
        for v in 0..nv {
            let inc = &incident[offset[v]..offset[v + 1]];
            if inc.is_empty() {
                return Err(MeshError::IsolatedCorner(v));
            }
            let degree = inc.len();
            if !(3..=6).contains(&degree) {
                return Err(MeshError::BadDegree { corner: v, degree });
            }
            // At most one outgoing edge per signed axis direction.
            let mut used = [false; 6];
            for &d in inc {
                let u = darts.origin[d];
                let w = darts.origin[darts.next[d]];
                let p = self.positions[u];
                let q = self.positions[w];
                let axis = if q[0] != p[0] {
                    0
                } else if q[1] != p[1] {
                    1
                } else {
                    2
                };
                let slot = 2 * axis + usize::from(q[axis] > p[axis]);
                if used[slot] {
                    return Err(MeshError::OverlappingEdges(v));
                }
                used[slot] = true;
            }
            // Fan: orbit of next(twin(d)) over darts with this origin.
            let mut seen = 1usize;
            let mut d = inc[0];
            loop {
                d = darts.next[darts.twin[d]];
                if d == inc[0] {
                    break;
                }
                seen += 1;
                if seen > degree {
                    break;
                }
            }
            if seen != degree {
                return Err(MeshError::NonManifoldCorner(v));
            }
        }

        // Connectivity over faces.
        let mut reach = vec![false; self.quads.len()];
        let mut stack = vec![0usize];
        reach[0] = true;
        while let Some(q) = stack.pop() {
            for i in 0..4 {
                let t = darts.twin[4 * q + i] / 4;
                if !reach[t] {
                    reach[t] = true;
                    stack.push(t);
                }
            }
        }
        if reach.iter().any(|&r| !r) {
            return Err(MeshError::Disconnected);
        }
        Ok(())
    }

    pub(crate) fn darts(&self) -> &MeshDarts {
        &self.darts
    }

    pub fn corners(&self) -> &[[i64; 3]] {
        &self.positions
    }

    pub fn quads(&self) -> &[[usize; 4]] {
        &self.quads
    }

    pub fn edge_count(&self) -> usize {
        // Closed quad mesh: each of the 4F directed edges pairs up.
        2 * self.quads.len()
    }

    pub fn genus(&self) -> u32 {
        let chi =
            self.positions.len() as i64 - self.edge_count() as i64 + self.quads.len() as i64;
        ((2 - chi) / 2) as u32
    }

    /// Outward unit normal of a face (faces are planar axis-aligned
    /// rectangles, so the cross product of two adjacent sides is exact).
    pub fn face_normal(&self, q: usize) -> [i64; 3] {
        let quad = self.quads[q];
        let p = |i: usize| self.positions[quad[i]];
        let sub = |a: [i64; 3], b: [i64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        let e0 = sub(p(1), p(0));
        let e1 = sub(p(2), p(1));
        let n = [
            e0[1] * e1[2] - e0[2] * e1[1],
            e0[2] * e1[0] - e0[0] * e1[2],
            e0[0] * e1[1] - e0[1] * e1[0],
        ];
        let len = n.iter().map(|c| c.abs()).max().unwrap();
        [n[0] / len, n[1] / len, n[2] / len]
    }
}

/// The six polycube corner categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CornerCategory {
    Simple,
    Edge,
    Flat,
    Bent,
    ComplexSymmetric,
    ComplexAsymmetric,
}

pub const CORNER_CATEGORIES: [CornerCategory; 6] = [
    CornerCategory::Simple,
    CornerCategory::Edge,
    CornerCategory::Flat,
    CornerCategory::Bent,
    CornerCategory::ComplexSymmetric,
    CornerCategory::ComplexAsymmetric,
];

/// Classify a corner from its cyclic sequence of incident edge directions,
/// given as (axis, points toward positive) pairs.
pub fn classify_directions(dirs: &[(Axis, bool)]) -> CornerCategory {
    let axes: std::collections::BTreeSet<Axis> = dirs.iter().map(|&(a, _)| a).collect();
    match dirs.len() {
        3 => CornerCategory::Simple,
        4 if axes.len() == 3 => CornerCategory::Edge,
        4 => CornerCategory::Flat,
        5 => CornerCategory::Bent,
        6 => {
            let symmetric = (0..3).all(|i| dirs[i].0 == dirs[i + 3].0);
            if symmetric {
                CornerCategory::ComplexSymmetric
            } else {
                CornerCategory::ComplexAsymmetric
            }
        }
        other => panic!("corner with {other} incident edges cannot appear in a valid structure"),
    }
}

/// Edge directions incident to a region's primal corner, in boundary order.
/// Crossing a boundary segment moves toward the positive side of its loop,
/// so the edge points up the axis exactly when the region lies on the
/// negative side.
pub fn corner_directions(s: &LoopStructure, r: RegionIx) -> Vec<(Axis, bool)> {
    s.region_slots(r)
        .iter()
        .map(|&(seg, rel)| {
            (
                s.segment_axis(seg),
                rel == crate::structure::RelSide::Left,
            )
        })
        .collect()
}

pub fn classify_corner(s: &LoopStructure, r: RegionIx) -> CornerCategory {
    classify_directions(&corner_directions(s, r))
}

/// One abstract corner configuration: a cyclic direction sequence in
/// canonical (lexicographically minimal) rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CornerConfig {
    pub directions: Vec<(Axis, bool)>,
    pub category: CornerCategory,
}

/// Enumerate the corner configurations: cyclic sequences of 3 to 6 distinct
/// signed axis directions with no two cyclically adjacent directions on the
/// same axis, up to rotation.
pub fn enumerate_corner_configurations() -> Vec<CornerConfig> {
    let labels: Vec<(Axis, bool)> = AXES
        .iter()
        .flat_map(|&a| [(a, false), (a, true)])
        .collect();
    let mut out = Vec::new();
    let mut seq: Vec<(Axis, bool)> = Vec::new();
    fn canonical(seq: &[(Axis, bool)]) -> Vec<(Axis, bool)> {
        let mut best = seq.to_vec();
        for r in 1..seq.len() {
            let rot: Vec<_> = seq[r..].iter().chain(&seq[..r]).copied().collect();
            if rot < best {
                best = rot;
            }
        }
        best
    }
    fn extend(
        labels: &[(Axis, bool)],
        seq: &mut Vec<(Axis, bool)>,
        out: &mut Vec<CornerConfig>,
    ) {
        if seq.len() >= 3 && seq[0].0 != seq[seq.len() - 1].0 && canonical(seq) == *seq {
            out.push(CornerConfig {
                directions: seq.clone(),
                category: classify_directions(seq),
            });
        }
        if seq.len() == 6 {
            return;
        }
        for &l in labels {
            if seq.contains(&l) {
                continue;
            }
            if let Some(&last) = seq.last() {
                if last.0 == l.0 {
                    continue;
                }
            }
            seq.push(l);
            extend(labels, seq, out);
            seq.pop();
        }
    }
    extend(&labels, &mut seq, &mut out);
    out.sort_by(|a, b| {
        (a.directions.len(), &a.directions).cmp(&(b.directions.len(), &b.directions))
    });
    out
}

pub fn corner_configuration_counts() -> BTreeMap<CornerCategory, usize> {
    let mut counts = BTreeMap::new();
    for c in enumerate_corner_configurations() {
        *counts.entry(c.category).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Error)]
pub enum PrimalizeError {
    #[error("structure is not a valid polycube loop structure: {0:?}")]
    InvalidStructure(ValidationReport),
    #[error("loop {0} carries no orientation")]
    Unoriented(u32),
    #[error("layer assignment does not respect the {axis}-graph: edge {from} -> {to}")]
    BadLayers { axis: Axis, from: usize, to: usize },
}

/// Per-axis integer level for every zone, indexed `[axis][zone]`.
pub type ZoneLayers = [Vec<i64>; 3];

/// Canonical layering: longest path from the sources of each level graph.
pub fn longest_path_layers(s: &LoopStructure) -> Result<ZoneLayers, PrimalizeError> {
    let mut layers: ZoneLayers = [Vec::new(), Vec::new(), Vec::new()];
    for axis in AXES {
        let lg = s
            .level_graph(axis)
            .map_err(|e| PrimalizeError::Unoriented(e.0))?;
        layers[axis.index()] = lg.longest_path_layers().ok_or_else(|| {
            let cyc = lg.find_cycle().unwrap();
            PrimalizeError::BadLayers {
                axis,
                from: cyc[0],
                to: cyc[1 % cyc.len()],
            }
        })?;
    }
    Ok(layers)
}

/// Build the primal mesh from explicit zone layers. Layers must strictly
/// increase along every level-graph edge. Corners are regions, faces are
/// crossings; face winding follows the crossing rotation, which runs
/// counterclockwise seen from outside, so normals point outward.
pub fn mesh_from_layers(s: &LoopStructure, layers: &ZoneLayers) -> Result<PolycubeMesh, PrimalizeError> {
    let report = check_polycube(s).map_err(|e| PrimalizeError::Unoriented(e.0))?;
    if !report.valid {
        return Err(PrimalizeError::InvalidStructure(report));
    }
    let mut zone_maps = Vec::new();
    for axis in AXES {
        let (zones, map) = s.region_zone_map(axis);
        let lg = s.level_graph(axis).expect("oriented");
        for &(u, v, _) in &lg.edges {
            if layers[axis.index()][u] >= layers[axis.index()][v] {
                return Err(PrimalizeError::BadLayers { axis, from: u, to: v });
            }
        }
        debug_assert_eq!(zones.len(), layers[axis.index()].len());
        zone_maps.push(map);
    }
    let positions: Vec<[i64; 3]> = (0..s.regions().len())
        .map(|r| {
            [
                layers[0][zone_maps[0][r]],
                layers[1][zone_maps[1][r]],
                layers[2][zone_maps[2][r]],
            ]
        })
        .collect();
    let quads: Vec<[usize; 4]> = (0..s.crossings().len())
        .map(|c| s.regions_around(c))
        .collect();
    // A valid structure with strictly increasing layers always primalizes to
    // a valid mesh, so the expensive topology re-verification is skipped.
    Ok(PolycubeMesh::new_prevalidated(positions, quads))
}

/// The unique polycube of a valid structure, with the canonical longest-path
/// coordinates.
pub fn assign_coordinates(s: &LoopStructure) -> Result<PolycubeMesh, PrimalizeError> {
    let layers = longest_path_layers(s)?;
    mesh_from_layers(s, &layers)
}

/// Signed axis of a mesh dart, ignoring length.
fn dart_label(mesh: &PolycubeMesh, darts: &MeshDarts, d: usize) -> (usize, bool) {
    let u = mesh.corners()[darts.origin[d]];
    let v = mesh.corners()[darts.origin[darts.next[d]]];
    for i in 0..3 {
        if v[i] != u[i] {
            return (i, v[i] > u[i]);
        }
    }
    unreachable!("mesh edges never degenerate to a point")
}

/// Decide order-equivalence: a quad-mesh isomorphism preserving directed
/// axis labels on edges. Coordinates only matter through edge directions, so
/// the relation is invariant under per-axis monotone re-spacing. Both
/// orientation modes are tried — the corner map of an orientation-reversing
/// isomorphism still carries +X edges to +X edges, which is exactly how a
/// polycube matches its inverse.
pub fn order_equivalent(a: &PolycubeMesh, b: &PolycubeMesh) -> bool {
    if a.quads().len() != b.quads().len() || a.corners().len() != b.corners().len() {
        return false;
    }
    let da = a.darts();
    let db = b.darts();
    let n = da.origin.len();
    let la: Vec<(usize, bool)> = (0..n).map(|d| dart_label(a, &da, d)).collect();
    let lb: Vec<(usize, bool)> = (0..n).map(|d| dart_label(b, &db, d)).collect();

    // Propagate a seed dart correspondence through next and twin. A dart
    // maps to the dart with the images of its endpoints; when the
    // isomorphism reverses orientation, the image of next(x) is found by
    // walking the image's face backwards on the other side:
    // twin . prev . twin. Buffers are stamped per attempt instead of being
    // reallocated.
    let mut map: Vec<(u32, usize)> = vec![(0, 0); n];
    let mut used: Vec<u32> = vec![0; n];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut stamp = 0u32;
    for seed in 0..n {
        if lb[seed] != la[0] {
            continue;
        }
        for reversed in [false, true] {
            stamp += 1;
            stack.clear();
            stack.push((0usize, seed));
            map[0] = (stamp, seed);
            let mut ok = true;
            while let Some((x, y)) = stack.pop() {
                let next_y = if reversed {
                    db.twin[db.prev(db.twin[y])]
                } else {
                    db.next[y]
                };
                for (nx, ny) in [(da.next[x], next_y), (da.twin[x], db.twin[y])] {
                    if lb[ny] != la[nx] {
                        ok = false;
                        break;
                    }
                    if map[nx].0 == stamp {
                        if map[nx].1 != ny {
                            ok = false;
                            break;
                        }
                    } else {
                        map[nx] = (stamp, ny);
                        stack.push((nx, ny));
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                continue;
            }
            // Both meshes are connected, so the propagation reached every
            // dart of `a`; injectivity makes it an isomorphism.
            let bijective = map.iter().all(|&(st, y)| {
                st == stamp && used[y] != stamp && {
                    used[y] = stamp;
                    true
                }
            });
            if bijective {
                return true;
            }
        }
    }
    false
}

/// Write a mesh as OBJ: integer vertex lines and 1-indexed quad faces, in
/// mesh order. An empty mesh is refused.
pub fn export_obj<W: Write>(mesh: &PolycubeMesh, w: &mut W) -> io::Result<()> {
    if mesh.quads().is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "refusing to export an empty mesh",
        ));
    }
    for p in mesh.corners() {
        writeln!(w, "v {} {} {}", p[0], p[1], p[2])?;
    }
    for q in mesh.quads() {
        writeln!(w, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1)?;
    }
    Ok(())
}

pub fn export_obj_to_path(mesh: &PolycubeMesh, path: &std::path::Path) -> io::Result<()> {
    let mut buf = Vec::new();
    export_obj(mesh, &mut buf)?;
    std::fs::write(path, buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::cube_structure;

    #[test]
    fn cube_assigns_unit_coordinates() {
        let s = cube_structure();
        let mesh = assign_coordinates(&s).unwrap();
        assert_eq!(mesh.corners().len(), 8);
        assert_eq!(mesh.quads().len(), 6);
        assert_eq!(mesh.edge_count(), 12);
        assert_eq!(mesh.genus(), 0);
        let mut coords: Vec<[i64; 3]> = mesh.corners().to_vec();
        coords.sort_unstable();
        let expect: Vec<[i64; 3]> = (0..8)
            .map(|i| [(i >> 2) & 1, (i >> 1) & 1, i & 1])
            .collect();
        assert_eq!(coords, expect);
    }

    #[test]
    fn cube_mesh_normals_point_outward() {
        let mesh = assign_coordinates(&cube_structure()).unwrap();
        for q in 0..mesh.quads().len() {
            let n = mesh.face_normal(q);
            // Center of the face minus solid center (1/2, 1/2, 1/2), doubled
            // to stay integral, must align with the normal.
            let quad = mesh.quads()[q];
            let mut c = [0i64; 3];
            for &v in &quad {
                for i in 0..3 {
                    c[i] += 2 * mesh.corners()[v][i];
                }
            }
            let off = [c[0] - 4, c[1] - 4, c[2] - 4];
            let dot: i64 = (0..3).map(|i| off[i] * n[i]).sum();
            assert!(dot > 0, "face {q} normal {n:?} offset {off:?}");
        }
    }

    #[test]
    fn corner_configuration_census() {
        let configs = enumerate_corner_configurations();
        assert_eq!(configs.len(), 126);
        let counts = corner_configuration_counts();
        assert_eq!(counts[&CornerCategory::Simple], 16);
        assert_eq!(counts[&CornerCategory::Edge], 24);
        assert_eq!(counts[&CornerCategory::Flat], 6);
        assert_eq!(counts[&CornerCategory::Bent], 48);
        assert_eq!(counts[&CornerCategory::ComplexSymmetric], 8);
        assert_eq!(counts[&CornerCategory::ComplexAsymmetric], 24);
    }

    #[test]
    fn cube_corners_are_simple() {
        let s = cube_structure();
        for r in 0..s.regions().len() {
            assert_eq!(classify_corner(&s, r), CornerCategory::Simple);
        }
    }

    #[test]
    fn scaling_preserves_order_equivalence() {
        let mesh = assign_coordinates(&cube_structure()).unwrap();
        let scaled = PolycubeMesh::new(
            mesh.corners().iter().map(|p| [2 * p[0], 2 * p[1], 2 * p[2]]).collect(),
            mesh.quads().to_vec(),
        )
        .unwrap();
        assert!(order_equivalent(&mesh, &scaled));
        assert!(order_equivalent(&mesh, &mesh));
    }

    #[test]
    fn inverse_cube_is_order_equivalent() {
        let mesh = assign_coordinates(&cube_structure()).unwrap();
        // The inverse polycube: same corners, faces rewound the other way.
        let inv = PolycubeMesh::new(
            mesh.corners().to_vec(),
            mesh.quads()
                .iter()
                .map(|q| [q[3], q[2], q[1], q[0]])
                .collect(),
        )
        .unwrap();
        assert!(order_equivalent(&mesh, &inv));
    }

    #[test]
    fn export_refuses_empty_mesh() {
        let empty = PolycubeMesh {
            positions: vec![],
            quads: vec![],
            darts: MeshDarts {
                next: vec![],
                twin: vec![],
                origin: vec![],
            },
        };
        let mut buf = Vec::new();
        let err = export_obj(&empty, &mut buf).unwrap_err();
        assert_eq!(err.kind(), io::ErrorKind::InvalidInput);
    }

    #[test]
    fn cube_obj_line_counts() {
        let mesh = assign_coordinates(&cube_structure()).unwrap();
        let mut buf = Vec::new();
        export_obj(&mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 6);
    }
}
