//! Structure editing: enumerate the loops that can be drawn onto a valid
//! structure, draw one, and remove a loop when the remainder stays valid.
//!
//! A new loop of a given axis is a closed walk that crosses one segment at a
//! time, never enters a region twice, and respects the side labels: regions
//! split by the walk must not end up with two boundary slots facing the same
//! direction of the walk's axis. Removal is predicted without rebuilding by
//! checking the merged regions, merged segments, and the contracted level
//! graph that removal would leave behind.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{
    dart_reverse, dart_segment, Axis, CrossingRef, Dart, Handedness, LevelGraph, LoopIx,
    LoopSpec, LoopStructure, RegionIx, RelSide, SegmentIx, Side, AXES,
};
use crate::validate::check_polycube;

/// One step of a candidate loop: cross `segment` and enter `region`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct CandidateStep {
    pub segment: SegmentIx,
    pub region: RegionIx,
}

/// A closed walk that can be drawn as a new loop. Steps are cyclic and
/// canonicalized to start at the smallest (segment, region) step; the two
/// traversal directions of a walk are distinct candidates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LoopCandidate {
    pub axis: Axis,
    pub steps: Vec<CandidateStep>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EditError {
    #[error("no loop with id {0}")]
    UnknownLoop(u32),
    #[error("candidate does not fit the structure: {0}")]
    StaleCandidate(&'static str),
    #[error("removing loop {0} would leave an invalid structure")]
    NotRemovable(u32),
}

/// Default search depth: generous room above the crossing count a loop of a
/// small structure typically needs.
pub fn default_max_len(s: &LoopStructure) -> usize {
    2 * s.loops().len() + 8
}

/// Whether a walk may enter a region through `entry` and leave through
/// `exit` when drawing a loop of `axis`. The walk's right side faces the
/// positive axis direction, so slots counterclockwise from entry to exit
/// must not already face positive, and the others must not face negative.
fn chord_ok(s: &LoopStructure, axis: Axis, r: RegionIx, entry: Dart, exit: Dart) -> bool {
    let se = dart_segment(entry);
    let sx = dart_segment(exit);
    if se == sx {
        return false;
    }
    if s.segment_axis(se) == axis || s.segment_axis(sx) == axis {
        return false;
    }
    let b = &s.regions()[r].boundary;
    let pi = b.iter().position(|&d| d == entry).expect("entry slot in region");
    let pj = b.iter().position(|&d| d == exit).expect("exit slot in region");
    let len = b.len();
    let mut k = (pi + 1) % len;
    while k != pj {
        let d = b[k];
        if s.segment_axis(dart_segment(d)) == axis
            && s.dart_facing(d).as_side() == Side::Plus
        {
            return false;
        }
        k = (k + 1) % len;
    }
    let mut k = (pj + 1) % len;
    while k != pi {
        let d = b[k];
        if s.segment_axis(dart_segment(d)) == axis
            && s.dart_facing(d).as_side() == Side::Minus
        {
            return false;
        }
        k = (k + 1) % len;
    }
    true
}

/// All loops of every axis that can be drawn onto the structure with at most
/// `max_len` crossings, each directed cycle exactly once. Meaningful on
/// structures that pass validation.
pub fn enumerate_valid_loops(s: &LoopStructure, max_len: usize) -> Vec<LoopCandidate> {
    let mut out = Vec::new();
    for axis in AXES {
        let mut visited = vec![false; s.regions().len()];
        let mut path: Vec<Dart> = Vec::new();
        for s0 in 0..s.segments().len() {
            if s.segment_axis(s0) == axis {
                continue;
            }
            for d0 in [2 * s0, 2 * s0 + 1] {
                let r0 = s.dart_region(d0);
                visited[r0] = true;
                path.push(d0);
                extend_walk(s, axis, d0, &mut visited, &mut path, max_len, &mut out);
                path.pop();
                visited[r0] = false;
            }
        }
    }
    out
}

/// Depth-first growth of a candidate walk. The walk is kept canonical by
/// only appending steps greater than the start step, so every directed cycle
/// is reached from exactly one start.
fn extend_walk(
    s: &LoopStructure,
    axis: Axis,
    d0: Dart,
    visited: &mut Vec<bool>,
    path: &mut Vec<Dart>,
    max_len: usize,
    out: &mut Vec<LoopCandidate>,
) {
    let e = *path.last().unwrap();
    let r = s.dart_region(e);
    // Close the walk by crossing the start segment back into the start
    // region.
    let f0 = dart_reverse(d0);
    if path.len() >= 2 && s.dart_region(f0) == r && chord_ok(s, axis, r, e, f0) {
        out.push(LoopCandidate {
            axis,
            steps: path
                .iter()
                .map(|&d| CandidateStep {
                    segment: dart_segment(d),
                    region: s.dart_region(d),
                })
                .collect(),
        });
    }
    if path.len() >= max_len {
        return;
    }
    let start_key = (dart_segment(d0), s.dart_region(d0));
    for i in 0..s.regions()[r].boundary.len() {
        let f = s.regions()[r].boundary[i];
        let ne = dart_reverse(f);
        let nr = s.dart_region(ne);
        if visited[nr] || (dart_segment(f), nr) <= start_key {
            continue;
        }
        if !chord_ok(s, axis, r, e, f) {
            continue;
        }
        visited[nr] = true;
        path.push(ne);
        extend_walk(s, axis, d0, visited, path, max_len, out);
        path.pop();
        visited[nr] = false;
    }
}

/// Draw a candidate onto the structure, returning the grown structure and
/// the id of the new loop. Only the walk's fit is checked here — whether the
/// result passes validation is the caller's question to ask.
pub fn add_loop(
    s: &LoopStructure,
    cand: &LoopCandidate,
) -> Result<(LoopStructure, u32), EditError> {
    let m = cand.steps.len();
    if m < 2 {
        return Err(EditError::StaleCandidate("a loop needs at least two crossings"));
    }
    for st in &cand.steps {
        if st.segment >= s.segments().len() {
            return Err(EditError::StaleCandidate("segment index out of range"));
        }
        if st.region >= s.regions().len() {
            return Err(EditError::StaleCandidate("region index out of range"));
        }
    }
    for i in 0..m {
        for j in 0..i {
            if cand.steps[i].region == cand.steps[j].region {
                return Err(EditError::StaleCandidate("walk enters a region twice"));
            }
        }
    }
    for t in 0..m {
        if cand.steps[t].segment == cand.steps[(t + 1) % m].segment {
            return Err(EditError::StaleCandidate(
                "consecutive steps cross the same segment",
            ));
        }
    }
    // Entry darts: crossing the step's segment out of the previous region
    // into the step's region. Distinct consecutive regions make this unique.
    let mut entry = Vec::with_capacity(m);
    for t in 0..m {
        let u = cand.steps[t].segment;
        let r = cand.steps[t].region;
        let prev = cand.steps[(t + m - 1) % m].region;
        let d = [2 * u, 2 * u + 1].into_iter().find(|&d| {
            s.dart_region(d) == r && s.dart_region(dart_reverse(d)) == prev
        });
        let Some(d) = d else {
            return Err(EditError::StaleCandidate(
                "segment does not separate the claimed regions",
            ));
        };
        entry.push(d);
    }

    let new_loop_id = s.loops().iter().map(|l| l.id).max().unwrap() + 1;
    let crossing_base = s.crossings().iter().map(|c| c.id).max().map_or(0, |v| v + 1);
    let mut specs = s.to_specs();
    // Hosts gain one crossing per step, inserted after the crossing their
    // crossed segment leaves; within a host, inserting from the back keeps
    // earlier positions stable. The host's passage is positive when the walk
    // crosses it left to right.
    let mut insertions: Vec<(LoopIx, usize, CrossingRef)> = Vec::with_capacity(m);
    for t in 0..m {
        let seg = &s.segments()[cand.steps[t].segment];
        let host_free = s.loops()[seg.loop_ix].crossings.is_empty();
        let at = if host_free { 0 } else { seg.pos + 1 };
        let handed = if s.dart_facing(entry[t]) == RelSide::Left {
            Handedness::Plus
        } else {
            Handedness::Minus
        };
        insertions.push((
            seg.loop_ix,
            at,
            CrossingRef {
                crossing: crossing_base + t as u32,
                handed,
            },
        ));
    }
    insertions.sort_by(|a, b| (a.0, b.1).cmp(&(b.0, a.1)));
    for (li, at, cref) in insertions {
        specs[li].crossings.insert(at, cref);
    }
    specs.push(LoopSpec {
        id: new_loop_id,
        axis: cand.axis,
        oriented: true,
        crossings: (0..m)
            .map(|t| CrossingRef {
                crossing: crossing_base + t as u32,
                handed: if s.dart_facing(entry[t]) == RelSide::Left {
                    Handedness::Minus
                } else {
                    Handedness::Plus
                },
            })
            .collect(),
    });
    let grown = LoopStructure::build(s.genus(), specs)
        .expect("a fitting walk always yields a buildable document");
    Ok((grown, new_loop_id))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Predict, without rebuilding, whether removing the loop leaves a structure
/// that still passes validation. Meaningful on structures that pass
/// validation themselves.
pub fn removable(s: &LoopStructure, loop_id: u32) -> Result<bool, EditError> {
    let li = s
        .loop_by_id(loop_id)
        .ok_or(EditError::UnknownLoop(loop_id))?;
    Ok(removal_verdict(s, li))
}

fn removal_verdict(s: &LoopStructure, li: LoopIx) -> bool {
    // Some loop must survive, no survivor may end up crossing-free, and the
    // survivors must stay connected through their remaining crossings.
    if s.loops().len() == 1 {
        return false;
    }
    let involves = |cx: usize| s.crossings()[cx].passages.iter().any(|&(lx, _)| lx == li);
    for (mi, m) in s.loops().iter().enumerate() {
        if mi == li {
            continue;
        }
        if m.crossings.is_empty() || m.crossings.iter().all(|&cx| involves(cx)) {
            return false;
        }
    }
    let nl = s.loops().len();
    let mut adj: Vec<Vec<LoopIx>> = vec![Vec::new(); nl];
    for c in s.crossings() {
        let [(a, _), (b, _)] = c.passages;
        if a != li && b != li {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let start = (0..nl).find(|&i| i != li).unwrap();
    let mut seen = vec![false; nl];
    let mut stack = vec![start];
    seen[start] = true;
    let mut reached = 1;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                reached += 1;
                stack.push(j);
            }
        }
    }
    if reached != nl - 1 {
        return false;
    }

    let lam = &s.loops()[li];
    let is_lam_dart = |d: Dart| s.segments()[dart_segment(d)].loop_ix == li;

    // Regions merged across the removed loop's segments must form disks:
    // gluing |C| disks along one arc per removed segment leaves Euler
    // characteristic |C| minus the arcs, which must be 1.
    let nr = s.regions().len();
    let mut uf = UnionFind::new(nr);
    for &u in &lam.segments {
        let [a, b] = s.segment_regions(u);
        uf.union(a, b);
    }
    let mut chi = vec![0i64; nr];
    for r in 0..nr {
        chi[uf.find(r)] += 1;
    }
    for &u in &lam.segments {
        chi[uf.find(s.segment_regions(u)[0])] -= 1;
    }
    for r in 0..nr {
        if uf.find(r) == r && chi[r] != 1 {
            return false;
        }
    }

    // Segments merged at dissolving crossings: the partner's incoming and
    // outgoing segments fuse where the removed loop used to cross it.
    let ns = s.segments().len();
    let mut seg_uf = UnionFind::new(ns);
    for &cx in &lam.crossings {
        let (mx, q) = s.crossings()[cx]
            .passages
            .into_iter()
            .find(|&(lx, _)| lx != li)
            .expect("crossings pair two distinct loops");
        let m = &s.loops()[mx];
        let k = m.crossings.len();
        seg_uf.union(m.segments[q], m.segments[(q + k - 1) % k]);
    }

    // Walk every merged region boundary: skipping a removed-loop dart jumps
    // to the far side of its arc. Each merged region needs three distinct
    // merged segments, and its slots (maximal runs between surviving
    // corners) must not repeat a side label.
    let nd = 2 * ns;
    let mut pos_in_region = vec![0usize; nd];
    for reg in s.regions() {
        for (i, &d) in reg.boundary.iter().enumerate() {
            pos_in_region[d] = i;
        }
    }
    let next_in_region = |d: Dart| {
        let b = &s.regions()[s.dart_region(d)].boundary;
        b[(pos_in_region[d] + 1) % b.len()]
    };
    let mut walked = vec![false; nd];
    let mut circle: Vec<Dart> = Vec::new();
    let mut living_after: Vec<bool> = Vec::new();
    let mut segs: Vec<usize> = Vec::new();
    let mut labels: Vec<(Axis, Side)> = Vec::new();
    for d0 in 0..nd {
        if walked[d0] || is_lam_dart(d0) {
            continue;
        }
        circle.clear();
        living_after.clear();
        let mut d = d0;
        loop {
            walked[d] = true;
            circle.push(d);
            let g = next_in_region(d);
            if is_lam_dart(g) {
                living_after.push(false);
                d = next_in_region(dart_reverse(g));
            } else {
                living_after.push(true);
                d = g;
            }
            if d == d0 {
                break;
            }
        }
        segs.clear();
        for &d in &circle {
            let sg = seg_uf.find(dart_segment(d));
            if !segs.contains(&sg) {
                segs.push(sg);
            }
        }
        if segs.len() < 3 {
            return false;
        }
        // One slot per maximal run between surviving corners; a run's darts
        // share a merged segment, so the first dart's label speaks for it.
        labels.clear();
        for i in 0..circle.len() {
            if living_after[(i + circle.len() - 1) % circle.len()] {
                let d = circle[i];
                labels.push((s.segment_axis(dart_segment(d)), s.dart_facing(d).as_side()));
            }
        }
        for i in 0..labels.len() {
            for j in 0..i {
                if labels[i] == labels[j] {
                    return false;
                }
            }
        }
    }

    // The removed loop's level-graph edge contracts; the survivors' edges
    // must still admit a topological order. The other two axes' graphs are
    // untouched by the removal.
    let Ok(lg) = s.level_graph(lam.axis) else {
        return false;
    };
    let mut zone_uf = UnionFind::new(lg.zone_count);
    for &(u, v, lx) in &lg.edges {
        if lx == li {
            zone_uf.union(u, v);
        }
    }
    let contracted = LevelGraph {
        axis: lam.axis,
        zone_count: lg.zone_count,
        edges: lg
            .edges
            .iter()
            .filter(|&&(_, _, lx)| lx != li)
            .map(|&(u, v, lx)| (zone_uf.find(u), zone_uf.find(v), lx))
            .collect(),
    };
    contracted.is_acyclic()
}

/// Remove a loop without asking whether the result stays valid; crossings
/// with the removed loop dissolve. The sole loop of a structure cannot be
/// removed.
pub fn remove_loop_unchecked(
    s: &LoopStructure,
    loop_id: u32,
) -> Result<LoopStructure, EditError> {
    let li = s
        .loop_by_id(loop_id)
        .ok_or(EditError::UnknownLoop(loop_id))?;
    if s.loops().len() == 1 {
        return Err(EditError::NotRemovable(loop_id));
    }
    let mut dead: Vec<u32> = s
        .crossings()
        .iter()
        .filter(|c| c.passages.iter().any(|&(lx, _)| lx == li))
        .map(|c| c.id)
        .collect();
    dead.sort_unstable();
    let mut specs = s.to_specs();
    specs.remove(li);
    for spec in &mut specs {
        spec.crossings
            .retain(|cr| dead.binary_search(&cr.crossing).is_err());
    }
    Ok(LoopStructure::build(s.genus(), specs)
        .expect("removing a loop keeps the remaining document buildable"))
}

/// Remove a loop, refusing when the remainder would not pass validation.
pub fn remove_loop(s: &LoopStructure, loop_id: u32) -> Result<LoopStructure, EditError> {
    if !removable(s, loop_id)? {
        return Err(EditError::NotRemovable(loop_id));
    }
    let shrunk = remove_loop_unchecked(s, loop_id)?;
    debug_assert!(check_polycube(&shrunk).map_or(false, |rep| rep.valid));
    Ok(shrunk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::cube_structure;
    use crate::voxel::{extract_dual, voxel_to_polycube, VoxelSolid};

    fn dual_of(cells: &[[i32; 3]]) -> LoopStructure {
        extract_dual(&voxel_to_polycube(&VoxelSolid::new(cells.iter().copied())).unwrap())
    }

    #[test]
    fn cube_has_six_chord_pairs_per_region() {
        // Every region of the cube has three slots on three distinct
        // segments, so six ordered entry/exit pairs.
        let s = cube_structure();
        let pairs: usize = (0..s.regions().len())
            .map(|r| {
                let b = &s.regions()[r].boundary;
                (0..b.len())
                    .flat_map(|i| (0..b.len()).map(move |j| (i, j)))
                    .filter(|&(i, j)| {
                        i != j && dart_segment(b[i]) != dart_segment(b[j])
                    })
                    .count()
            })
            .sum();
        assert_eq!(pairs, 48);
    }

    #[test]
    fn cube_admits_two_walks_per_axis() {
        let s = cube_structure();
        let cands = enumerate_valid_loops(&s, 12);
        let mut per_axis = [0; 3];
        for c in &cands {
            per_axis[c.axis.index()] += 1;
            assert_eq!(c.steps.len(), 4);
        }
        assert_eq!(per_axis, [2, 2, 2]);
        assert_eq!(enumerate_valid_loops(&s, default_max_len(&s)), cands);
        assert!(enumerate_valid_loops(&s, 3).is_empty());
    }

    #[test]
    fn drawing_a_cube_walk_gives_the_tall_box() {
        let s = cube_structure();
        let box_dual = dual_of(&[[0, 0, 0], [1, 0, 0]]);
        for cand in enumerate_valid_loops(&s, 12) {
            let (grown, id) = add_loop(&s, &cand).unwrap();
            assert!(check_polycube(&grown).unwrap().valid);
            assert_eq!(grown.crossings().len(), 10);
            if cand.axis == Axis::X {
                assert!(grown.isomorphic(&box_dual));
            }
            // Undoing the drawing restores the cube.
            assert_eq!(removable(&grown, id), Ok(true));
            let back = remove_loop(&grown, id).unwrap();
            assert!(back.isomorphic(&cube_structure()));
        }
    }

    #[test]
    fn cube_loops_are_not_removable() {
        let s = cube_structure();
        for l in s.loops() {
            assert_eq!(removable(&s, l.id), Ok(false));
            assert_eq!(
                remove_loop(&s, l.id).unwrap_err(),
                EditError::NotRemovable(l.id)
            );
        }
        assert_eq!(removable(&s, 99).unwrap_err(), EditError::UnknownLoop(99));
    }

    #[test]
    fn box_duplicate_axis_loops_are_removable() {
        let s = dual_of(&[[0, 0, 0], [1, 0, 0]]);
        let mut removed_any = false;
        for l in s.loops() {
            let expect = l.axis == Axis::X;
            assert_eq!(removable(&s, l.id), Ok(expect), "loop {}", l.id);
            if expect {
                let shrunk = remove_loop(&s, l.id).unwrap();
                assert!(shrunk.isomorphic(&cube_structure()));
                removed_any = true;
            }
        }
        assert!(removed_any);
    }

    #[test]
    fn stale_candidates_are_rejected() {
        let s = cube_structure();
        let mut cand = enumerate_valid_loops(&s, 12).remove(0);
        let good = cand.clone();
        cand.steps[0].region = good.steps[1].region;
        assert!(matches!(
            add_loop(&s, &cand),
            Err(EditError::StaleCandidate(_))
        ));
        cand = good.clone();
        cand.steps[0].segment = s.segments().len();
        assert!(matches!(
            add_loop(&s, &cand),
            Err(EditError::StaleCandidate(_))
        ));
        cand = good.clone();
        cand.steps.truncate(1);
        assert!(matches!(
            add_loop(&s, &cand),
            Err(EditError::StaleCandidate(_))
        ));
        // The unmodified candidate still applies.
        assert!(add_loop(&s, &good).is_ok());
    }

    #[test]
    fn frame_ring_loops_fail_only_the_level_graph() {
        // Both loops around the frame's hole span the same two zones of
        // their axis; removing either would leave the other spanning a
        // single zone, a cycle of length one.
        let frame = dual_of(
            &(0..3)
                .flat_map(|x| (0..3).map(move |y| [x, y, 0]))
                .filter(|c| !(c[0] == 1 && c[1] == 1))
                .collect::<Vec<_>>(),
        );
        let ring_axis = Axis::Z;
        for l in frame.loops() {
            if l.axis == ring_axis {
                assert_eq!(removable(&frame, l.id), Ok(false));
                let blind = remove_loop_unchecked(&frame, l.id).unwrap();
                let report = check_polycube(&blind).unwrap();
                assert!(!report.valid);
                assert!(report.has(crate::validate::Condition::P5));
            }
        }
    }

    #[test]
    fn removal_prediction_matches_blind_removal_on_small_structures() {
        for cells in [
            vec![[0, 0, 0], [1, 0, 0]],
            vec![[0, 0, 0], [1, 0, 0], [0, 1, 0]],
            (0..3)
                .flat_map(|x| (0..3).map(move |y| [x, y, 0]))
                .filter(|c| !(c[0] == 1 && c[1] == 1))
                .collect(),
        ] {
            let s = dual_of(&cells);
            for l in s.loops() {
                let predicted = removable(&s, l.id).unwrap();
                let blind = remove_loop_unchecked(&s, l.id).unwrap();
                let actual = check_polycube(&blind).unwrap().valid;
                assert_eq!(predicted, actual, "loop {} of {:?}", l.id, cells);
            }
        }
    }

    #[test]
    fn random_walk_of_edits_stays_valid() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut s = cube_structure();
        for _ in 0..40 {
            let cands = enumerate_valid_loops(&s, 12);
            let mut removable_ids: Vec<u32> = s
                .loops()
                .iter()
                .map(|l| l.id)
                .filter(|&id| removable(&s, id).unwrap())
                .collect();
            removable_ids.sort_unstable();
            let grow = removable_ids.is_empty()
                || (s.loops().len() < 6 && rng.gen_bool(0.7))
                || (!cands.is_empty() && rng.gen_bool(0.5));
            s = if grow && !cands.is_empty() {
                let cand = &cands[rng.gen_range(0..cands.len())];
                add_loop(&s, cand).unwrap().0
            } else if !removable_ids.is_empty() {
                let id = removable_ids[rng.gen_range(0..removable_ids.len())];
                remove_loop(&s, id).unwrap()
            } else {
                continue;
            };
            assert!(check_polycube(&s).unwrap().valid);
        }
    }
}
