//! Realizing loop structures on triangle meshes as crossing polylines.
//!
//! Every loop becomes a closed polyline through mesh edge interiors. The
//! first loop is routed along a level-set ring: the boundary of the set of
//! faces below a threshold along the loop's axis, with the threshold read
//! off the loop's position in its axis level graph. Every later loop is
//! routed leg by leg between its crossings with already placed loops. A
//! crossing is realized inside a single triangle: the new polyline enters
//! and leaves through the two edges carrying the partner's chord, offset to
//! the side that matches the stored chirality, so the two chords cross
//! transversally exactly once. Legs only travel through unoccupied edges and
//! never cross existing chords, so no crossings appear beyond the recorded
//! ones.

use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edit::{add_loop, remove_loop, EditError, LoopCandidate};
use crate::structure::{
    Axis, CrossingIx, Handedness, LoopIx, LoopStructure, RelSide, StructureDoc,
};
use crate::trimesh::{add3, cross3, dot3, norm3, scale3, sub3, TriMesh};
use crate::validate::check_polycube;

/// Default weight multiplier penalizing polyline motion along the loop's
/// own axis.
pub const DEFAULT_BETA: f64 = 5.0;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("structure genus {structure} does not match mesh genus {mesh}")]
    GenusMismatch { structure: u32, mesh: u32 },
    #[error("structure fails validation: {0}")]
    InvalidStructure(String),
    #[error("embedding failed: {0}")]
    EmbeddingFailed(String),
    #[error(transparent)]
    Edit(#[from] EditError),
}

/// A polyline vertex: the interior of mesh edge `edge` at parameter `t`
/// along the edge's canonical direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgePoint {
    pub edge: usize,
    pub t: f64,
}

/// Where a realized crossing sits along a loop's polyline: on the chord
/// leaving polyline point `pos`, at fraction `t` of that chord.
#[derive(Debug, Clone, Copy)]
struct Mark {
    crossing: u32,
    pos: usize,
    t: f64,
}

/// Serializable image of an embedding; the mesh is an input, not part of it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddedDoc {
    pub structure: StructureDoc,
    pub polylines: Vec<Vec<EdgePoint>>,
    pub crossing_faces: Vec<(u32, usize)>,
}

/// A loop structure realized on a mesh: one closed polyline per loop, in
/// loop order, plus the triangle where each crossing is realized.
#[derive(Debug, Clone)]
pub struct EmbeddedStructure {
    structure: LoopStructure,
    mesh: TriMesh,
    polylines: Vec<Vec<EdgePoint>>,
    /// Points per mesh edge as (t, loop, position), sorted by t.
    edge_points: Vec<Vec<(f64, usize, usize)>>,
    /// Chords per face as (loop, position): the chord from polyline point
    /// `position` to its cyclic successor.
    face_chords: Vec<Vec<(usize, usize)>>,
    /// Realized crossings per loop, sorted along the polyline.
    marks: Vec<Vec<Mark>>,
    /// (crossing id, face) sorted by id.
    crossing_faces: Vec<(u32, usize)>,
}

fn orient_in_face(n: [f64; 3], a: [f64; 3], b: [f64; 3], x: [f64; 3]) -> f64 {
    dot3(cross3(sub3(b, a), sub3(x, a)), n)
}

/// Proper intersection of chords a-b and c-d inside a face with normal `n`;
/// returns the parameters along each. Touching configurations do not count.
fn cross_params(
    n: [f64; 3],
    a: [f64; 3],
    b: [f64; 3],
    c: [f64; 3],
    d: [f64; 3],
) -> Option<(f64, f64)> {
    let o1 = orient_in_face(n, a, b, c);
    let o2 = orient_in_face(n, a, b, d);
    let o3 = orient_in_face(n, c, d, a);
    let o4 = orient_in_face(n, c, d, b);
    let eps = 1e-14;
    if o1 * o2 < -eps && o3 * o4 < -eps {
        Some((o3 / (o3 - o4), o1 / (o1 - o2)))
    } else {
        None
    }
}

/// Weighted length of a straight hop for a loop of the given axis.
fn chord_weight(a: [f64; 3], b: [f64; 3], axis: Axis, beta: f64) -> f64 {
    let d = sub3(b, a);
    let len = norm3(d);
    if len == 0.0 {
        return 0.0;
    }
    len * (1.0 + beta * (d[axis.index()] / len).abs())
}

#[derive(PartialEq)]
struct Cost(f64);

impl Eq for Cost {}
impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl EmbeddedStructure {
    pub fn structure(&self) -> &LoopStructure {
        &self.structure
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn polyline(&self, li: LoopIx) -> &[EdgePoint] {
        &self.polylines[li]
    }

    pub fn polyline_points(&self, li: LoopIx) -> Vec<[f64; 3]> {
        self.polylines[li]
            .iter()
            .map(|p| self.mesh.point_on_edge(p.edge, p.t))
            .collect()
    }

    /// Face where the crossing with this document id is realized.
    pub fn crossing_face(&self, id: u32) -> Option<usize> {
        self.crossing_faces
            .binary_search_by_key(&id, |&(c, _)| c)
            .ok()
            .map(|i| self.crossing_faces[i].1)
    }

    pub fn to_doc(&self) -> EmbeddedDoc {
        EmbeddedDoc {
            structure: self.structure.to_doc(),
            polylines: self.polylines.clone(),
            crossing_faces: self.crossing_faces.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("embedding serializes")
    }

    /// Polylines as OBJ line elements, one closed `l` record per loop.
    pub fn loops_to_obj(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let mut base = 1usize;
        for li in 0..self.polylines.len() {
            for p in self.polyline_points(li) {
                writeln!(out, "v {} {} {}", p[0], p[1], p[2]).unwrap();
            }
            let k = self.polylines[li].len();
            let ids: Vec<String> = (0..k).chain([0]).map(|i| (base + i).to_string()).collect();
            writeln!(out, "l {}", ids.join(" ")).unwrap();
            base += k;
        }
        out
    }

    fn chord_pts(&self, li: usize, pos: usize) -> ([f64; 3], [f64; 3]) {
        let pl = &self.polylines[li];
        let a = pl[pos];
        let b = pl[(pos + 1) % pl.len()];
        (
            self.mesh.point_on_edge(a.edge, a.t),
            self.mesh.point_on_edge(b.edge, b.t),
        )
    }

    fn chord_face(&self, li: usize, pos: usize) -> usize {
        let pl = &self.polylines[li];
        let a = pl[pos].edge;
        let b = pl[(pos + 1) % pl.len()].edge;
        self.mesh
            .common_face(a, b)
            .expect("consecutive polyline points share a face")
    }

    /// Whether a chord between two concrete points inside face `f` avoids
    /// every existing chord there except an optional designated one.
    fn chord_clear(&self, f: usize, a: [f64; 3], b: [f64; 3], skip: Option<(usize, usize)>) -> bool {
        let n = self.mesh.face_normal(f);
        for &(l, p) in &self.face_chords[f] {
            if Some((l, p)) == skip {
                continue;
            }
            let (c, d) = self.chord_pts(l, p);
            if cross_params(n, a, b, c, d).is_some() {
                return false;
            }
        }
        true
    }

    fn register_point(&mut self, li: usize, p: EdgePoint) {
        let pos = self.polylines[li].len();
        self.polylines[li].push(p);
        let list = &mut self.edge_points[p.edge];
        let at = list.partition_point(|&(t, _, _)| t < p.t);
        list.insert(at, (p.t, li, pos));
        if pos > 0 {
            let f = self.chord_face(li, pos - 1);
            self.face_chords[f].push((li, pos - 1));
        }
    }

    fn close_polyline(&mut self, li: usize) {
        let last = self.polylines[li].len() - 1;
        let f = self.chord_face(li, last);
        self.face_chords[f].push((li, last));
    }

    /// Re-derive the per-edge and per-face indexes from the polylines.
    fn rebuild_index(&mut self) {
        for l in &mut self.edge_points {
            l.clear();
        }
        for l in &mut self.face_chords {
            l.clear();
        }
        for li in 0..self.polylines.len() {
            for pos in 0..self.polylines[li].len() {
                let p = self.polylines[li][pos];
                let list = &mut self.edge_points[p.edge];
                let at = list.partition_point(|&(t, _, _)| t < p.t);
                list.insert(at, (p.t, li, pos));
            }
            for pos in 0..self.polylines[li].len() {
                let f = self.chord_face(li, pos);
                self.face_chords[f].push((li, pos));
            }
        }
    }

    /// Verify that the polylines realize exactly the structure's crossing
    /// pattern: the same crossings in the same per-loop cyclic order with the
    /// same chirality, in the recorded faces, and nothing else.
    pub fn verify_pattern(&self) -> Result<(), String> {
        let s = &self.structure;
        // Geometric crossings, one per unordered chord pair that intersects.
        let mut found: Vec<(usize, usize, f64, usize, usize, f64, usize)> = Vec::new();
        for f in 0..self.mesh.tris().len() {
            let n = self.mesh.face_normal(f);
            let ch = &self.face_chords[f];
            for i in 0..ch.len() {
                for j in 0..i {
                    let (la, pa) = ch[j];
                    let (lb, pb) = ch[i];
                    let (a1, a2) = self.chord_pts(la, pa);
                    let (b1, b2) = self.chord_pts(lb, pb);
                    if let Some((ta, tb)) = cross_params(n, a1, a2, b1, b2) {
                        found.push((la, pa, ta, lb, pb, tb, f));
                    }
                }
            }
        }
        if found.len() != s.crossings().len() {
            return Err(format!(
                "{} geometric crossings, structure has {}",
                found.len(),
                s.crossings().len()
            ));
        }
        let find_mark = |li: usize, pos: usize, t: f64| -> Option<u32> {
            self.marks[li]
                .iter()
                .find(|m| m.pos == pos && (m.t - t).abs() < 1e-6)
                .map(|m| m.crossing)
        };
        let mut seen = vec![false; s.crossings().len()];
        for &(la, pa, ta, lb, pb, tb, f) in &found {
            let ca = find_mark(la, pa, ta)
                .ok_or_else(|| format!("crossing on loop {la} chord {pa} has no record"))?;
            let cb = find_mark(lb, pb, tb)
                .ok_or_else(|| format!("crossing on loop {lb} chord {pb} has no record"))?;
            if ca != cb {
                return Err(format!("records disagree at face {f}: {ca} vs {cb}"));
            }
            if self.crossing_face(ca) != Some(f) {
                return Err(format!("crossing {ca} recorded in a different face"));
            }
            let ci = s
                .crossings()
                .iter()
                .position(|c| c.id == ca)
                .ok_or_else(|| format!("no structure crossing with id {ca}"))?;
            if seen[ci] {
                return Err(format!("crossing {ca} realized twice"));
            }
            seen[ci] = true;
            let pair = s.crossings()[ci]
                .passages
                .map(|(l, at)| (l, s.loops()[l].handed[at]));
            if pair.iter().all(|&(l, _)| l != lb) {
                return Err(format!("crossing {ca} does not involve loop {lb}"));
            }
            // Chirality from geometry: the bit of the first chord's loop.
            let (a1, a2) = self.chord_pts(la, pa);
            let (b1, b2) = self.chord_pts(lb, pb);
            let n = self.mesh.face_normal(f);
            let sign = dot3(cross3(sub3(a2, a1), sub3(b2, b1)), n);
            let bit_a = if sign > 0.0 {
                Handedness::Plus
            } else {
                Handedness::Minus
            };
            let want = pair
                .iter()
                .find(|&&(l, _)| l == la)
                .map(|&(_, h)| h)
                .ok_or_else(|| format!("crossing {ca} does not involve loop {la}"))?;
            if bit_a != want {
                return Err(format!("crossing {ca} has the wrong chirality"));
            }
        }
        // Realized crossings along each polyline must come in the stored
        // cyclic order.
        for li in 0..s.loops().len() {
            let stored: Vec<u32> = s.loops()[li]
                .crossings
                .iter()
                .map(|&c| s.crossings()[c].id)
                .collect();
            let walked: Vec<u32> = self.marks[li].iter().map(|m| m.crossing).collect();
            if stored.len() != walked.len() {
                return Err(format!(
                    "loop {li} realizes {} of {} crossings",
                    walked.len(),
                    stored.len()
                ));
            }
            let k = stored.len();
            let ok = k == 0 || (0..k).any(|r| (0..k).all(|i| walked[(r + i) % k] == stored[i]));
            if !ok {
                return Err(format!("loop {li} crossing order differs"));
            }
            let sorted = self.marks[li]
                .windows(2)
                .all(|w| (w[0].pos, w[0].t) <= (w[1].pos, w[1].t));
            if !sorted {
                return Err(format!("loop {li} marks out of traversal order"));
            }
        }
        Ok(())
    }

    /// After inserting an empty polyline slot at `li`, loop indices stored
    /// in the per-edge and per-face tables are stale; shift them.
    fn shift_loop_indices_from(&mut self, li: usize) {
        for list in &mut self.edge_points {
            for p in list {
                if p.1 >= li {
                    p.1 += 1;
                }
            }
        }
        for list in &mut self.face_chords {
            for c in list {
                if c.0 >= li {
                    c.0 += 1;
                }
            }
        }
    }
}

/// Embed every loop of a valid structure on a genus-matched mesh.
pub fn embed_structure(s: &LoopStructure, mesh: &TriMesh) -> Result<EmbeddedStructure, EmbedError> {
    embed_structure_with(s, mesh, DEFAULT_BETA)
}

pub fn embed_structure_with(
    s: &LoopStructure,
    mesh: &TriMesh,
    beta: f64,
) -> Result<EmbeddedStructure, EmbedError> {
    match check_polycube(s) {
        Ok(rep) if rep.valid => {}
        Ok(rep) => {
            return Err(EmbedError::InvalidStructure(format!(
                "{} violations",
                rep.violations.len()
            )))
        }
        Err(e) => return Err(EmbedError::InvalidStructure(e.to_string())),
    }
    if s.genus() != mesh.genus() {
        return Err(EmbedError::GenusMismatch {
            structure: s.genus(),
            mesh: mesh.genus(),
        });
    }
    let mut emb = EmbeddedStructure {
        structure: s.clone(),
        mesh: mesh.clone(),
        polylines: vec![Vec::new(); s.loops().len()],
        edge_points: vec![Vec::new(); mesh.edge_count()],
        face_chords: vec![Vec::new(); mesh.tris().len()],
        marks: vec![Vec::new(); s.loops().len()],
        crossing_faces: Vec::new(),
    };
    // Loops whose level cut bounds a single ring make unambiguous anchors,
    // so one of them goes first when nothing is placed yet.
    let single: Vec<bool> = (0..s.loops().len())
        .map(|l| {
            level_routes(s, mesh, l)
                .map(|(_, r)| r.len() == 1)
                .unwrap_or(false)
        })
        .collect();
    let mut done = vec![false; s.loops().len()];
    for _ in 0..s.loops().len() {
        // Most constrained next: the loop with the most placed partners.
        let (li, partners) = (0..s.loops().len())
            .filter(|&l| !done[l])
            .map(|l| {
                let placed = s.loops()[l]
                    .crossings
                    .iter()
                    .filter(|&&c| {
                        let [p, q] = s.crossings()[c].passages;
                        let other = if p.0 == l { q.0 } else { p.0 };
                        done[other]
                    })
                    .count();
                (l, placed)
            })
            .max_by_key(|&(l, placed)| {
                let tie = if placed == 0 && single[l] { 1 } else { 0 };
                (placed, tie, usize::MAX - l)
            })
            .expect("an unplaced loop remains");
        if partners == 0 {
            route_level_ring(&mut emb, li)?;
        } else {
            route_constrained_loop(&mut emb, li, beta)?;
        }
        done[li] = true;
        if std::env::var("EMBED_DEBUG").is_ok() {
            let worst = emb.face_chords.iter().map(Vec::len).max().unwrap_or(0);
            eprintln!(
                "placed loop {li} ({:?}, {} partners): {} points, worst face {} chords",
                s.loops()[li].axis,
                partners,
                emb.polylines[li].len(),
                worst
            );
        }
    }
    emb.crossing_faces.sort_unstable();
    emb.verify_pattern()
        .map_err(|e| EmbedError::EmbeddingFailed(format!("pattern check: {e}")))?;
    Ok(emb)
}

/// Draw one enumerated candidate loop onto an existing embedding. On any
/// failure the input embedding is left untouched.
pub fn embed_candidate(
    emb: &EmbeddedStructure,
    cand: &LoopCandidate,
) -> Result<EmbeddedStructure, EmbedError> {
    embed_candidate_with(emb, cand, DEFAULT_BETA)
}

pub fn embed_candidate_with(
    emb: &EmbeddedStructure,
    cand: &LoopCandidate,
    beta: f64,
) -> Result<EmbeddedStructure, EmbedError> {
    let (grown, new_id) = add_loop(&emb.structure, cand)?;
    let li = grown.loop_by_id(new_id).expect("fresh loop exists");
    let mut next = EmbeddedStructure {
        structure: grown,
        mesh: emb.mesh.clone(),
        polylines: emb.polylines.clone(),
        edge_points: emb.edge_points.clone(),
        face_chords: emb.face_chords.clone(),
        marks: emb.marks.clone(),
        crossing_faces: emb.crossing_faces.clone(),
    };
    next.polylines.insert(li, Vec::new());
    next.marks.insert(li, Vec::new());
    if li != next.polylines.len() - 1 {
        next.shift_loop_indices_from(li);
    }
    route_constrained_loop(&mut next, li, beta)?;
    next.crossing_faces.sort_unstable();
    next.verify_pattern()
        .map_err(|e| EmbedError::EmbeddingFailed(format!("pattern check: {e}")))?;
    Ok(next)
}

/// Remove a loop and its polyline, refusing if the structure would not stay
/// valid. On failure the input embedding is left untouched.
pub fn remove_embedded(
    emb: &EmbeddedStructure,
    loop_id: u32,
) -> Result<EmbeddedStructure, EmbedError> {
    let li = emb
        .structure
        .loop_by_id(loop_id)
        .ok_or(EditError::UnknownLoop(loop_id))?;
    let shrunk = remove_loop(&emb.structure, loop_id)?;
    let dead: Vec<u32> = emb
        .structure
        .crossings()
        .iter()
        .filter(|c| c.passages.iter().any(|&(l, _)| l == li))
        .map(|c| c.id)
        .collect();
    let mut next = EmbeddedStructure {
        structure: shrunk,
        mesh: emb.mesh.clone(),
        polylines: emb.polylines.clone(),
        edge_points: vec![Vec::new(); emb.mesh.edge_count()],
        face_chords: vec![Vec::new(); emb.mesh.tris().len()],
        marks: emb.marks.clone(),
        crossing_faces: emb.crossing_faces.clone(),
    };
    next.polylines.remove(li);
    next.marks.remove(li);
    for ms in &mut next.marks {
        ms.retain(|m| !dead.contains(&m.crossing));
    }
    next.crossing_faces.retain(|(c, _)| !dead.contains(c));
    next.rebuild_index();
    debug_assert!(next.verify_pattern().is_ok());
    Ok(next)
}

// ---------------------------------------------------------------------------
// First loop: the boundary ring of a sublevel set along the loop's axis.

/// Fraction of the mesh's axis extent where the loop belongs, read off the
/// zone layers on its two sides.
fn level_fraction(s: &LoopStructure, li: LoopIx) -> Result<f64, EmbedError> {
    let axis = s.loops()[li].axis;
    let lg = s
        .level_graph(axis)
        .map_err(|e| EmbedError::InvalidStructure(e.to_string()))?;
    let layers = lg
        .longest_path_layers()
        .ok_or_else(|| EmbedError::InvalidStructure(format!("cyclic {axis:?} level graph")))?;
    let (_, map) = s.region_zone_map(axis);
    let u = layers[map[s.loop_side_region(li, RelSide::Left)]] as f64;
    let v = layers[map[s.loop_side_region(li, RelSide::Right)]] as f64;
    let n = (*layers.iter().max().unwrap_or(&0) + 1) as f64;
    Ok((u + v + 1.0) / (2.0 * n))
}

/// Threshold for the loop's level plane, centered in the gap between the
/// distinct vertex and centroid levels surrounding the nominal fraction so
/// no mesh feature sits exactly on the cut.
fn nudged_cut(mesh: &TriMesh, ai: usize, frac: f64) -> f64 {
    let mut levels: Vec<f64> = mesh.positions().iter().map(|p| p[ai]).collect();
    levels.extend((0..mesh.tris().len()).map(|t| mesh.face_centroid(t)[ai]));
    levels.sort_by(f64::total_cmp);
    let lo = levels[0];
    let hi = *levels.last().unwrap();
    let span = (hi - lo).max(1e-12);
    levels.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * span);
    let t0 = lo + frac * (hi - lo);
    if levels.len() < 2 {
        return t0;
    }
    let i = levels
        .partition_point(|&v| v <= t0 + 1e-9 * span)
        .clamp(1, levels.len() - 1);
    (levels[i - 1] + levels[i]) / 2.0
}

/// Boundary cycles of the sublevel set at the loop's level fraction, each
/// as the edge route a polyline would take. Boundary darts keep the
/// sublevel set on their left, so lower coordinates lie on the loop's
/// negative side; each pivot vertex between consecutive boundary edges
/// contributes its fan of interior edges so the route hops triangle by
/// triangle.
fn level_routes(
    s: &LoopStructure,
    mesh: &TriMesh,
    li: LoopIx,
) -> Result<(f64, Vec<Vec<usize>>), EmbedError> {
    let axis = s.loops()[li].axis;
    let ai = axis.index();
    let frac = level_fraction(s, li)?;
    let cut = nudged_cut(mesh, ai, frac);
    let nf = mesh.tris().len();
    let below = |t: usize| mesh.face_centroid(t)[ai] < cut;
    if (0..nf).all(below) || !(0..nf).any(below) {
        return Err(EmbedError::EmbeddingFailed(format!(
            "no level ring at {frac:.3} of axis {axis:?}"
        )));
    }
    let nd = 3 * nf;
    let next_in_face = |d: usize| 3 * (d / 3) + (d + 1) % 3;
    let is_boundary = |d: usize| below(d / 3) && !below(mesh.dart_twin(d) / 3);
    let next_boundary = |d: usize| {
        let mut g = next_in_face(d);
        while below(mesh.dart_twin(g) / 3) {
            g = next_in_face(mesh.dart_twin(g));
        }
        g
    };
    let mut used = vec![false; nd];
    let mut routes: Vec<Vec<usize>> = Vec::new();
    for d0 in 0..nd {
        if !is_boundary(d0) || used[d0] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut d = d0;
        loop {
            used[d] = true;
            cyc.push(d);
            d = next_boundary(d);
            if d == d0 {
                break;
            }
        }
        let mut route: Vec<usize> = Vec::new();
        for (i, &d) in cyc.iter().enumerate() {
            route.push(mesh.dart_edge(d));
            let stop = cyc[(i + 1) % cyc.len()];
            let mut g = next_in_face(d);
            while g != stop && below(mesh.dart_twin(g) / 3) {
                route.push(mesh.dart_edge(g));
                g = next_in_face(mesh.dart_twin(g));
            }
        }
        routes.push(route);
    }
    if routes.is_empty() {
        return Err(EmbedError::EmbeddingFailed(
            "empty level-set boundary".into(),
        ));
    }
    Ok((cut, routes))
}

/// Route a loop with no placed crossing partner along the boundary of the
/// sublevel set of its axis coordinate.
fn route_level_ring(emb: &mut EmbeddedStructure, li: LoopIx) -> Result<(), EmbedError> {
    let mesh = emb.mesh.clone();
    let fail = |msg: String| EmbedError::EmbeddingFailed(msg);
    let (_, routes) = level_routes(&emb.structure, &mesh, li)?;
    let route = routes
        .iter()
        .min_by_key(|r| r.iter().copied().min().unwrap())
        .unwrap()
        .clone();
    // A narrow strip in the sublevel set makes the ring cross an interior
    // edge twice, once per endpoint fan; each pass then hugs its own pivot
    // vertex. More than two passes cannot happen.
    let mut passes = vec![0u8; mesh.edge_count()];
    for &e in &route {
        if !emb.edge_points[e].is_empty() {
            return Err(fail(format!("level ring for loop {li} is blocked")));
        }
        passes[e] += 1;
        if passes[e] > 2 {
            return Err(fail(format!("level ring for loop {li} pinches an edge")));
        }
    }
    for (i, &e) in route.iter().enumerate() {
        let t = if passes[e] == 1 {
            0.5
        } else {
            let (a, b) = mesh.edge_ends(e);
            let nxt = route[(i + 1) % route.len()];
            let (c, d) = mesh.edge_ends(nxt);
            let pivot = if a == c || a == d { a } else { b };
            if pivot == a {
                0.3
            } else {
                0.7
            }
        };
        emb.register_point(li, EdgePoint { edge: e, t });
    }
    emb.close_polyline(li);
    // The fresh ring must be clear of every earlier polyline.
    for pos in 0..emb.polylines[li].len() {
        let f = emb.chord_face(li, pos);
        let (a, b) = emb.chord_pts(li, pos);
        let n = mesh.face_normal(f);
        for &(l, p) in &emb.face_chords[f] {
            if l == li {
                continue;
            }
            let (c, d) = emb.chord_pts(l, p);
            if cross_params(n, a, b, c, d).is_some() {
                return Err(fail(format!("level ring for loop {li} crosses loop {l}")));
            }
        }
    }
    Ok(())
}

/// A spot where a placed polyline crosses from the level cut's below faces
/// to its above faces or back. Ascending partners pass from the new loop's
/// negative side to its positive side, which is what a Plus bit on the
/// partner encodes. Face status is used rather than the raw coordinates of
/// the polyline, because a polyline hugging the cut wiggles across the
/// plane while its face path crosses the level boundary cleanly.
struct LevelLocus {
    p_loop: usize,
    p_plus: bool,
    point: [f64; 3],
}

fn level_loci(emb: &EmbeddedStructure, ai: usize, cut: f64) -> Vec<LevelLocus> {
    let mesh = &emb.mesh;
    let below = |f: usize| mesh.face_centroid(f)[ai] < cut;
    let mut out = Vec::new();
    for (l, pl) in emb.polylines.iter().enumerate() {
        let n = pl.len();
        if n < 2 {
            continue;
        }
        for pos in 0..n {
            let ba = below(emb.chord_face(l, pos));
            let bb = below(emb.chord_face(l, (pos + 1) % n));
            if ba == bb {
                continue;
            }
            let p = pl[(pos + 1) % n];
            out.push(LevelLocus {
                p_loop: l,
                p_plus: ba,
                point: mesh.point_on_edge(p.edge, p.t),
            });
        }
    }
    out
}

/// Pick the boundary cycle the loop will follow and target points for its
/// mandated crossings: where its level plane crosses each placed partner.
/// The cycle whose loci agree with the mandated partners and chiralities is
/// selected, and every mandate whose partner-chirality pair is unique gets
/// that locus as its target.
fn ring_targets(
    emb: &EmbeddedStructure,
    li: LoopIx,
    mandated: &[(usize, CrossingIx)],
) -> Result<(Vec<usize>, Vec<Option<[f64; 3]>>), EmbedError> {
    let s = &emb.structure;
    let (cut, routes) = level_routes(s, &emb.mesh, li)?;
    let ai = s.loops()[li].axis.index();
    let keys: Vec<(usize, bool)> = mandated
        .iter()
        .map(|&(_, c)| {
            let [p, q] = s.crossings()[c].passages;
            let (pl, pk) = if p.0 == li { q } else { p };
            (pl, s.loops()[pl].handed[pk] == Handedness::Plus)
        })
        .collect();
    let loci = level_loci(emb, ai, cut);
    // Every locus lies on some boundary cycle of the cut; sort them out by
    // proximity to the candidate routes.
    let route_pts: Vec<Vec<[f64; 3]>> = routes
        .iter()
        .map(|r| {
            r.iter()
                .map(|&e| emb.mesh.point_on_edge(e, 0.5))
                .collect()
        })
        .collect();
    let dist_to = |r: usize, x: [f64; 3]| -> f64 {
        route_pts[r]
            .iter()
            .map(|&p| norm3(sub3(p, x)))
            .fold(f64::INFINITY, f64::min)
    };
    let mut per_route: Vec<Vec<&LevelLocus>> = vec![Vec::new(); routes.len()];
    for lc in &loci {
        let r = (0..routes.len())
            .min_by(|&a, &b| dist_to(a, lc.point).total_cmp(&dist_to(b, lc.point)))
            .unwrap();
        per_route[r].push(lc);
    }
    let mut want: BTreeMap<(usize, bool), usize> = BTreeMap::new();
    for &k in &keys {
        *want.entry(k).or_insert(0) += 1;
    }
    let mut order: Vec<usize> = (0..routes.len()).collect();
    order.sort_by_key(|&r| routes[r].iter().copied().min().unwrap());
    if std::env::var("EMBED_DEBUG").is_ok() {
        eprintln!("ring_targets loop{li}: cut {cut:.3}, want {want:?}");
        for &r in &order {
            let mut have: BTreeMap<(usize, bool), usize> = BTreeMap::new();
            for lc in &per_route[r] {
                *have.entry((lc.p_loop, lc.p_plus)).or_insert(0) += 1;
            }
            eprintln!("  route {r} ({} edges): have {have:?}", routes[r].len());
            for lc in &per_route[r] {
                eprintln!(
                    "    locus ({}, {}) at [{:.2}, {:.2}, {:.2}] (dist {:.3})",
                    lc.p_loop,
                    lc.p_plus,
                    lc.point[0],
                    lc.point[1],
                    lc.point[2],
                    dist_to(r, lc.point)
                );
            }
        }
    }
    let chosen = order.into_iter().find(|&r| {
        let mut have: BTreeMap<(usize, bool), usize> = BTreeMap::new();
        for lc in &per_route[r] {
            *have.entry((lc.p_loop, lc.p_plus)).or_insert(0) += 1;
        }
        have == want
    });
    let Some(r) = chosen else {
        return Err(EmbedError::EmbeddingFailed(format!(
            "no level cycle of loop {li} meets its placed partners as mandated"
        )));
    };
    let targets = keys
        .iter()
        .map(|&k| {
            if want[&k] != 1 {
                return None;
            }
            per_route[r]
                .iter()
                .find(|lc| (lc.p_loop, lc.p_plus) == k)
                .map(|lc| lc.point)
        })
        .collect();
    Ok((routes.swap_remove(r), targets))
}

// ---------------------------------------------------------------------------
// Constrained loops: legs between crossing constructs.

/// One admissible way to realize a crossing: enter the partner's chord face
/// through `e_in`, leave through `e_out`, crossing the partner chord
/// `(p_loop, p_pos)` at fraction `s_partner` of it.
#[derive(Clone)]
struct ConstructPlan {
    face: usize,
    e_in: usize,
    t_in: f64,
    e_out: usize,
    t_out: f64,
    p_loop: usize,
    p_pos: usize,
    s_partner: f64,
    s_own: f64,
}

fn route_constrained_loop(
    emb: &mut EmbeddedStructure,
    li: LoopIx,
    beta: f64,
) -> Result<(), EmbedError> {
    let s = emb.structure.clone();
    let axis = s.loops()[li].axis;
    let fail = |msg: String| EmbedError::EmbeddingFailed(msg);
    // Crossings to realize, in traversal order, against partners that
    // already have polylines.
    let mandated: Vec<(usize, CrossingIx)> = s.loops()[li]
        .crossings
        .iter()
        .enumerate()
        .filter(|&(_, &c)| {
            let [p, q] = s.crossings()[c].passages;
            let other = if p.0 == li { q.0 } else { p.0 };
            !emb.polylines[other].is_empty()
        })
        .map(|(k, &c)| (k, c))
        .collect();
    if mandated.is_empty() {
        return route_level_ring(emb, li);
    }

    // Each mandated crossing is pulled toward the spot where this loop's
    // level plane crosses the partner polyline, which spreads the crossings
    // to their geometrically distinct stations around the partner.
    let targets = ring_targets(emb, li, &mandated);
    let kappa = 16.0 * (1.0 + beta);

    let mut first_entry: Option<(usize, f64)> = None;
    let mut start: Option<(usize, f64)> = None; // exit point of the last construct
    let m = mandated.len();
    for (step, &(k, c)) in mandated.iter().enumerate() {
        let plans = construct_plans(emb, li, k, c);
        if plans.is_empty() {
            return Err(fail(format!(
                "no room to realize crossing {} on loop {li}",
                s.crossings()[c].id
            )));
        }
        let extras: Vec<f64> = plans
            .iter()
            .map(|p| match targets[step] {
                Some(t) => kappa * norm3(sub3(plan_cross_point(&emb.mesh, p), t)),
                None => 0.0,
            })
            .collect();
        let chosen = if let Some(from) = start {
            route_leg(emb, li, axis, beta, from, &plans, &extras, None)?
        } else {
            // The very first construct anchors the loop.
            let mut best = 0;
            for i in 1..plans.len() {
                if extras[i] < extras[best] {
                    best = i;
                }
            }
            LegResult {
                path: Vec::new(),
                plan: Some(plans[best].clone()),
            }
        };
        let plan = chosen.plan.expect("leg ends in a construct");
        for &p in &chosen.path {
            emb.register_point(li, p);
        }
        if first_entry.is_none() {
            first_entry = Some((plan.e_in, plan.t_in));
        }
        let entry_pos = emb.polylines[li].len();
        emb.register_point(
            li,
            EdgePoint {
                edge: plan.e_in,
                t: plan.t_in,
            },
        );
        emb.register_point(
            li,
            EdgePoint {
                edge: plan.e_out,
                t: plan.t_out,
            },
        );
        let id = s.crossings()[c].id;
        insert_mark(
            &mut emb.marks[plan.p_loop],
            Mark {
                crossing: id,
                pos: plan.p_pos,
                t: plan.s_partner,
            },
        );
        insert_mark(
            &mut emb.marks[li],
            Mark {
                crossing: id,
                pos: entry_pos,
                t: plan.s_own,
            },
        );
        emb.crossing_faces.push((id, plan.face));
        start = Some((plan.e_out, plan.t_out));
        if step == m - 1 {
            // Close back to the very first entry point.
            let res = route_leg(emb, li, axis, beta, start.unwrap(), &[], &[], first_entry)?;
            for &p in &res.path {
                emb.register_point(li, p);
            }
            emb.close_polyline(li);
        }
    }
    Ok(())
}

fn insert_mark(list: &mut Vec<Mark>, m: Mark) {
    let at = list.partition_point(|o| (o.pos, o.t) < (m.pos, m.t));
    list.insert(at, m);
}

/// Enumerate admissible constructs for crossing `c`, the `k`-th crossing of
/// loop `li`, against its already placed partner.
fn construct_plans(
    emb: &EmbeddedStructure,
    li: LoopIx,
    k: usize,
    c: CrossingIx,
) -> Vec<ConstructPlan> {
    let s = &emb.structure;
    let mesh = &emb.mesh;
    let [pa, pb] = s.crossings()[c].passages;
    let (p_loop, p_at) = if pa.0 == li { pb } else { pa };
    let bit = s.loops()[li].handed[k];
    let want_left = bit == Handedness::Plus;
    let dbg = std::env::var("EMBED_DEBUG").is_ok();
    if dbg {
        let id = s.crossings()[c].id;
        eprintln!(
            "construct c{id} loop{li} on partner{p_loop}@{p_at} want_left={want_left}"
        );
        eprintln!("  partner marks: {:?}", emb.marks[p_loop]
            .iter().map(|m| (m.crossing, m.pos, m.t)).collect::<Vec<_>>());
        eprintln!("  arc: {:?}", partner_arc(emb, p_loop, p_at));
    }
    let mut plans = Vec::new();
    let mut rej = [0usize; 5];
    for (pos, lo, hi) in partner_arc(emb, p_loop, p_at) {
        let f = emb.chord_face(p_loop, pos);
        let (a, b) = emb.chord_pts(p_loop, pos);
        let n = mesh.face_normal(f);
        let pl = &emb.polylines[p_loop];
        let ea = pl[pos].edge;
        let eb = pl[(pos + 1) % pl.len()].edge;
        // Enter through either of the chord's edges; the entry gap must lie
        // on the side matching the stored chirality, the exit on the other.
        for (e_in, e_out) in [(ea, eb), (eb, ea)] {
            for t_in in gap_midpoints(emb, e_in) {
                let x_in = mesh.point_on_edge(e_in, t_in);
                let side_in = orient_in_face(n, a, b, x_in);
                if (side_in > 0.0) != want_left || side_in.abs() < 1e-12 {
                    rej[0] += 1;
                    continue;
                }
                for t_out in gap_midpoints(emb, e_out) {
                    let x_out = mesh.point_on_edge(e_out, t_out);
                    let side_out = orient_in_face(n, a, b, x_out);
                    if (side_out > 0.0) == (side_in > 0.0) || side_out.abs() < 1e-12 {
                        rej[1] += 1;
                        continue;
                    }
                    let Some((s_own, s_partner)) = cross_params(n, x_in, x_out, a, b) else {
                        rej[2] += 1;
                        continue;
                    };
                    if s_partner <= lo + 1e-9 || s_partner >= hi - 1e-9 {
                        rej[3] += 1;
                        continue;
                    }
                    if !emb.chord_clear(f, x_in, x_out, Some((p_loop, pos))) {
                        rej[4] += 1;
                        continue;
                    }
                    plans.push(ConstructPlan {
                        face: f,
                        e_in,
                        t_in,
                        e_out,
                        t_out,
                        p_loop,
                        p_pos: pos,
                        s_partner,
                        s_own,
                    });
                }
            }
        }
    }
    if dbg {
        eprintln!(
            "  plans={} rejected: side_in={} side_out={} no_cross={} window={} clear={}",
            plans.len(),
            rej[0],
            rej[1],
            rej[2],
            rej[3],
            rej[4]
        );
    }
    plans
}

/// Midpoints of the free intervals of an edge, in order along it.
fn gap_midpoints(emb: &EmbeddedStructure, e: usize) -> Vec<f64> {
    let pts = &emb.edge_points[e];
    let mut cuts = vec![0.0];
    cuts.extend(pts.iter().map(|&(t, _, _)| t));
    cuts.push(1.0);
    cuts.windows(2)
        .filter(|w| w[1] - w[0] > 1e-9)
        .map(|w| (w[0] + w[1]) / 2.0)
        .collect()
}

/// The stretch of partner polyline `p_loop` available to a new crossing at
/// structural position `p_at`, as chord ranges (chord, from, to): strictly
/// between the realized crossings that precede and follow that position.
fn partner_arc(emb: &EmbeddedStructure, p_loop: usize, p_at: usize) -> Vec<(usize, f64, f64)> {
    let s = &emb.structure;
    let marks = &emb.marks[p_loop];
    let nch = emb.polylines[p_loop].len();
    if marks.is_empty() {
        return (0..nch).map(|p| (p, 0.0, 1.0)).collect();
    }
    let lp = &s.loops()[p_loop];
    let len = lp.crossings.len();
    let id_at = |q: usize| s.crossings()[lp.crossings[q]].id;
    let mark_of = |q: usize| marks.iter().find(|m| m.crossing == id_at(q));
    let mut prev = None;
    let mut next = None;
    for o in 1..=len {
        if prev.is_none() {
            if let Some(m) = mark_of((p_at + len - o) % len) {
                prev = Some(*m);
            }
        }
        if next.is_none() {
            if let Some(m) = mark_of((p_at + o) % len) {
                next = Some(*m);
            }
        }
    }
    let (pm, nm) = (prev.expect("a mark exists"), next.expect("a mark exists"));
    if pm.pos == nm.pos && pm.t < nm.t && pm.crossing != nm.crossing {
        return vec![(pm.pos, pm.t, nm.t)];
    }
    // Forward from pm, wrapping around to nm.
    let mut out = vec![(pm.pos, pm.t, 1.0)];
    let mut p = (pm.pos + 1) % nch;
    while p != nm.pos {
        out.push((p, 0.0, 1.0));
        p = (p + 1) % nch;
    }
    out.push((nm.pos, 0.0, nm.t));
    out
}

struct LegResult {
    path: Vec<EdgePoint>,
    plan: Option<ConstructPlan>,
}

/// Where a construct plan's own chord crosses the partner chord.
fn plan_cross_point(mesh: &TriMesh, p: &ConstructPlan) -> [f64; 3] {
    let x_in = mesh.point_on_edge(p.e_in, p.t_in);
    let x_out = mesh.point_on_edge(p.e_out, p.t_out);
    add3(x_in, scale3(sub3(x_out, x_in), p.s_own))
}

/// Shortest admissible leg from a concrete start point to the cheapest of
/// the candidate constructs (each surcharged by its entry in `extras`), or
/// to a fixed closing point. Nodes are the free gaps of mesh edges, entered
/// at their midpoints; every hop is a straight chord within one face,
/// rejected if it crosses any chord already there. The cheapest such walk
/// never crosses itself: rerouting through a self-crossing point would be
/// strictly cheaper.
fn route_leg(
    emb: &EmbeddedStructure,
    li: LoopIx,
    axis: Axis,
    beta: f64,
    start: (usize, f64),
    plans: &[ConstructPlan],
    extras: &[f64],
    close_at: Option<(usize, f64)>,
) -> Result<LegResult, EmbedError> {
    let mesh = &emb.mesh;
    let ne = mesh.edge_count();
    let gaps: Vec<Vec<f64>> = (0..ne).map(|e| gap_midpoints(emb, e)).collect();
    // Flattened gap nodes, then goal nodes.
    let mut span = Vec::with_capacity(ne);
    let mut node_edge = Vec::new();
    let mut node_t = Vec::new();
    for (e, g) in gaps.iter().enumerate() {
        let at = node_t.len();
        span.push(at..at + g.len());
        node_edge.extend(std::iter::repeat(e).take(g.len()));
        node_t.extend(g.iter().copied());
    }
    let goal_base = node_t.len();
    let n_goals = plans.len() + close_at.iter().len();
    let total = goal_base + n_goals;
    let mut dist = vec![f64::INFINITY; total];
    let mut from: Vec<Option<usize>> = vec![None; total];
    let mut heap: BinaryHeap<std::cmp::Reverse<(Cost, usize)>> = BinaryHeap::new();
    let start_pt = mesh.point_on_edge(start.0, start.1);

    let goal_pt = |gi: usize| -> ([f64; 3], usize, f64) {
        if gi < plans.len() {
            let p = &plans[gi];
            let x_in = mesh.point_on_edge(p.e_in, p.t_in);
            let x_out = mesh.point_on_edge(p.e_out, p.t_out);
            (
                x_in,
                p.e_in,
                chord_weight(x_in, x_out, axis, beta) + extras[gi],
            )
        } else {
            let (e, t) = close_at.expect("goal index in range");
            (mesh.point_on_edge(e, t), e, 0.0)
        }
    };

    // A hop from a point on edge `src` relaxes every free gap and every
    // goal that shares one of src's faces.
    let relax = |src: usize,
                     src_pt: [f64; 3],
                     base: f64,
                     origin: Option<usize>,
                     dist: &mut Vec<f64>,
                     from: &mut Vec<Option<usize>>,
                     heap: &mut BinaryHeap<std::cmp::Reverse<(Cost, usize)>>| {
        for f in mesh.edge_faces(src) {
            for e in mesh.face_edges(f) {
                if e == src {
                    continue;
                }
                for n in span[e].clone() {
                    let x = mesh.point_on_edge(e, node_t[n]);
                    if !emb.chord_clear(f, src_pt, x, None) {
                        continue;
                    }
                    let w = base + chord_weight(src_pt, x, axis, beta);
                    if w < dist[n] {
                        dist[n] = w;
                        from[n] = origin;
                        heap.push(std::cmp::Reverse((Cost(w), n)));
                    }
                }
            }
            for gi in 0..n_goals {
                let (gp, ge, extra) = goal_pt(gi);
                if ge == src || !mesh.face_edges(f).contains(&ge) {
                    continue;
                }
                if !emb.chord_clear(f, src_pt, gp, None) {
                    continue;
                }
                let w = base + chord_weight(src_pt, gp, axis, beta) + extra;
                let g = goal_base + gi;
                if w < dist[g] {
                    dist[g] = w;
                    from[g] = origin;
                    heap.push(std::cmp::Reverse((Cost(w), g)));
                }
            }
        }
    };

    relax(start.0, start_pt, 0.0, None, &mut dist, &mut from, &mut heap);
    while let Some(std::cmp::Reverse((Cost(du), u))) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        if u >= goal_base {
            let mut path = Vec::new();
            let mut at = from[u];
            while let Some(n) = at {
                path.push(EdgePoint {
                    edge: node_edge[n],
                    t: node_t[n],
                });
                at = from[n];
            }
            path.reverse();
            let gi = u - goal_base;
            return Ok(LegResult {
                path,
                plan: if gi < plans.len() {
                    Some(plans[gi].clone())
                } else {
                    None
                },
            });
        }
        let xu = mesh.point_on_edge(node_edge[u], node_t[u]);
        relax(node_edge[u], xu, du, Some(u), &mut dist, &mut from, &mut heap);
    }
    if std::env::var("EMBED_DEBUG").is_ok() {
        let settled = (0..goal_base).filter(|&n| dist[n].is_finite()).count();
        eprintln!(
            "leg fail loop{li}: start=({},{:.2}) plans={} close={:?} settled={settled}/{goal_base}",
            start.0,
            start.1,
            plans.len(),
            close_at
        );
        for gi in 0..n_goals {
            let (gp, ge, extra) = goal_pt(gi);
            eprintln!("  goal {gi}: entry edge {ge} extra={extra:.3} pt={gp:?}");
            for f in mesh.edge_faces(ge) {
                eprintln!("    face {f} chords: {:?}", emb.face_chords[f]);
                for e in mesh.face_edges(f) {
                    if e == ge {
                        continue;
                    }
                    for n in span[e].clone() {
                        let x = mesh.point_on_edge(e, node_t[n]);
                        eprintln!(
                            "      via edge {e} gap t={:.3}: dist={:.3} clear={}",
                            node_t[n],
                            dist[n],
                            emb.chord_clear(f, x, gp, None)
                        );
                    }
                }
            }
        }
    }
    Err(EmbedError::EmbeddingFailed(format!(
        "no route for a leg of loop {li}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::cube_structure;
    use crate::trimesh::{icosphere, torus, tri_cube};
    use crate::voxel::{extract_dual, voxel_to_polycube, VoxelSolid};

    fn dual_of(cells: &[[i32; 3]]) -> LoopStructure {
        let solid = VoxelSolid::new(cells.iter().copied());
        extract_dual(&voxel_to_polycube(&solid).unwrap())
    }

    fn frame() -> LoopStructure {
        let cells: Vec<[i32; 3]> = (0..3)
            .flat_map(|x| (0..3).map(move |y| [x, y, 0]))
            .filter(|&c| c != [1, 1, 0])
            .collect();
        dual_of(&cells)
    }

    #[test]
    fn cube_structure_embeds_on_a_cube_mesh() {
        let s = cube_structure();
        let emb = embed_structure(&s, &tri_cube(4)).unwrap();
        assert_eq!(emb.polylines.len(), 3);
        for li in 0..3 {
            assert!(emb.polyline(li).len() >= 4, "loop {li} too short");
        }
        emb.verify_pattern().unwrap();
        for c in emb.structure().crossings() {
            assert!(emb.crossing_face(c.id).is_some());
        }
    }

    #[test]
    fn cube_structure_embeds_on_an_icosphere() {
        let s = cube_structure();
        let emb = embed_structure(&s, &icosphere(2)).unwrap();
        emb.verify_pattern().unwrap();
    }

    #[test]
    fn genus_mismatch_is_reported() {
        let s = cube_structure();
        let r = embed_structure(&s, &torus(16, 8, 2.0, 0.6));
        assert!(matches!(
            r,
            Err(EmbedError::GenusMismatch {
                structure: 0,
                mesh: 1
            })
        ));
    }

    #[test]
    fn frame_structure_embeds_on_a_torus() {
        let s = frame();
        let emb = embed_structure(&s, &torus(28, 14, 2.0, 0.7)).unwrap();
        assert_eq!(emb.polylines.len(), 10);
        emb.verify_pattern().unwrap();
    }

    #[test]
    fn embedding_is_deterministic() {
        let s = cube_structure();
        let mesh = tri_cube(4);
        let a = embed_structure(&s, &mesh).unwrap().to_json();
        let b = embed_structure(&s, &mesh).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn candidates_embed_and_remove_cleanly() {
        let s = cube_structure();
        let mesh = tri_cube(4);
        let emb = embed_structure(&s, &mesh).unwrap();
        let cands = crate::edit::enumerate_valid_loops(&s, 12);
        assert!(!cands.is_empty());
        let grown = embed_candidate(&emb, &cands[0]).unwrap();
        assert_eq!(grown.polylines.len(), 4);
        grown.verify_pattern().unwrap();
        let new_id = grown
            .structure()
            .loops()
            .iter()
            .map(|l| l.id)
            .max()
            .unwrap();
        let back = remove_embedded(&grown, new_id).unwrap();
        back.verify_pattern().unwrap();
        assert!(back.structure().isomorphic(&s));
    }

    #[test]
    fn failed_candidates_leave_the_input_unchanged() {
        let s = cube_structure();
        let mesh = tri_cube(4);
        let emb = embed_structure(&s, &mesh).unwrap();
        let before = emb.to_json();
        let stale = LoopCandidate {
            axis: Axis::X,
            steps: vec![],
        };
        assert!(embed_candidate(&emb, &stale).is_err());
        assert_eq!(emb.to_json(), before);
    }
}
