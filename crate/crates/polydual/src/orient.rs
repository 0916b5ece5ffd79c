//! Choosing loop directions.
//!
//! A loop's stored traversal direction doubles as its orientation: the right
//! side faces the positive axis direction once the loop is marked oriented.
//! Reversing a loop re-expresses the same surface, so direction choices are
//! free parameters; this module finds the choice vector that makes the side
//! labels around every region consistent and all three level graphs acyclic,
//! preferring to keep the stored direction of earlier loops.
//!
//! Only two validity conditions depend on directions. Repeated side labels
//! couple the choices pairwise (two same-axis slots on one region must face
//! opposite ways), which is a graph 2-coloring per axis. Acyclicity cuts the
//! surviving colorings further and is checked per candidate, cheapest first.

use thiserror::Error;

use crate::structure::{
    dart_segment, Axis, LevelGraph, LoopStructure, RelSide, AXES,
};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OrientError {
    /// Some region forces two sides of one axis to face the same way; no
    /// direction assignment can satisfy the side labels.
    #[error("side constraints of the {axis} loops are contradictory")]
    NonBipartite { axis: Axis },
    /// Side labels can be satisfied, but every satisfying assignment leaves a
    /// directed cycle in the axis' level graph.
    #[error("every consistent direction choice for the {axis} loops leaves a level-graph cycle")]
    AllColoringsCyclic { axis: Axis },
}

/// Free direction choices of one axis: the side-conflict graph's connected
/// components, each colorable exactly two ways. Nodes 2j and 2j+1 are the
/// left and right side of the axis' j-th loop.
struct SideChoices {
    axis_loops: Vec<usize>,
    /// Node color relative to its component seed.
    rel: Vec<bool>,
    /// Component of each node; components are numbered by ascending seed, so
    /// component order follows the loop order.
    comp: Vec<usize>,
    ncomp: usize,
}

impl SideChoices {
    /// Flip vector (over all loops) selected by one counter value. Bit 0 of
    /// a component keeps the stored direction of its earliest loop, so
    /// counting up enumerates flip vectors in lexicographic order.
    fn flips_for(&self, m: u64, loop_count: usize) -> Vec<bool> {
        let mut flips = vec![false; loop_count];
        for (j, &li) in self.axis_loops.iter().enumerate() {
            let swap = m >> (self.ncomp - 1 - self.comp[2 * j]) & 1 == 1;
            flips[li] = self.rel[2 * j] ^ swap;
        }
        flips
    }
}

/// Build the side-conflict graph of one axis and 2-color it. Each loop's two
/// sides must face opposite ways, and two same-axis slots on one region's
/// boundary must too (at most one slot per axis and side is allowed).
fn side_components(s: &LoopStructure, axis: Axis) -> Result<SideChoices, OrientError> {
    let axis_loops: Vec<usize> = (0..s.loops().len())
        .filter(|&li| s.loops()[li].axis == axis)
        .collect();
    let nl = axis_loops.len();
    let mut local = vec![usize::MAX; s.loops().len()];
    for (j, &li) in axis_loops.iter().enumerate() {
        local[li] = j;
    }

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 2 * nl];
    for j in 0..nl {
        adj[2 * j].push(2 * j + 1);
        adj[2 * j + 1].push(2 * j);
    }
    let mut slots = Vec::new();
    for r in s.regions() {
        slots.clear();
        for &d in &r.boundary {
            let li = s.segments()[dart_segment(d)].loop_ix;
            if s.loops()[li].axis != axis {
                continue;
            }
            // The region lies left of its boundary darts, so a forward dart
            // shows the region the loop's left side.
            let side = match s.dart_facing(d) {
                RelSide::Left => 0,
                RelSide::Right => 1,
            };
            slots.push(2 * local[li] + side);
        }
        for i in 0..slots.len() {
            for k in i + 1..slots.len() {
                if slots[i] == slots[k] {
                    // The same side shows twice; no choice can separate it.
                    return Err(OrientError::NonBipartite { axis });
                }
                adj[slots[i]].push(slots[k]);
                adj[slots[k]].push(slots[i]);
            }
        }
    }

    let mut rel = vec![false; 2 * nl];
    let mut comp = vec![usize::MAX; 2 * nl];
    let mut ncomp = 0;
    let mut stack = Vec::new();
    for seed in 0..2 * nl {
        if comp[seed] != usize::MAX {
            continue;
        }
        comp[seed] = ncomp;
        stack.push(seed);
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = ncomp;
                    rel[v] = !rel[u];
                    stack.push(v);
                } else if rel[v] == rel[u] {
                    return Err(OrientError::NonBipartite { axis });
                }
            }
        }
        ncomp += 1;
    }
    assert!(ncomp < 64, "too many independent direction choices to search");
    Ok(SideChoices {
        axis_loops,
        rel,
        comp,
        ncomp,
    })
}

/// Whether the axis' level graph is acyclic when the given loops are
/// reversed. Works on the stored geometry without rebuilding the structure.
fn axis_is_acyclic(s: &LoopStructure, axis: Axis, flips: &[bool]) -> bool {
    let (zones, map) = s.region_zone_map(axis);
    let edges = s
        .loops()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.axis == axis)
        .map(|(li, _)| {
            let (lo, hi) = if flips[li] {
                (RelSide::Right, RelSide::Left)
            } else {
                (RelSide::Left, RelSide::Right)
            };
            (
                map[s.loop_side_region(li, lo)],
                map[s.loop_side_region(li, hi)],
                li,
            )
        })
        .collect();
    LevelGraph {
        axis,
        zone_count: zones.len(),
        edges,
    }
    .is_acyclic()
}

/// Rebuild with the flagged loops traversed the other way: their crossing
/// sequences reverse, and every crossing where exactly one participant
/// reverses swaps its recorded chirality on both passages. Orientation marks
/// are forced to `oriented` or carried over unchanged when `None`.
fn rebuilt_with_flips(s: &LoopStructure, flip: &[bool], oriented: Option<bool>) -> LoopStructure {
    let mut xor_at: Vec<(u32, bool)> = s
        .crossings()
        .iter()
        .map(|c| (c.id, flip[c.passages[0].0] != flip[c.passages[1].0]))
        .collect();
    xor_at.sort_unstable_by_key(|&(id, _)| id);
    let mut specs = s.to_specs();
    for (li, spec) in specs.iter_mut().enumerate() {
        for e in &mut spec.crossings {
            let k = xor_at
                .binary_search_by_key(&e.crossing, |&(id, _)| id)
                .expect("every referenced crossing exists");
            if xor_at[k].1 {
                e.handed = e.handed.flipped();
            }
        }
        if flip[li] && spec.crossings.len() > 1 {
            spec.crossings[1..].reverse();
        }
        if let Some(o) = oriented {
            spec.oriented = o;
        }
    }
    LoopStructure::build(s.genus(), specs)
        .expect("reversing loop directions keeps the document buildable")
}

/// The same surface with the flagged loops traversed the other way.
/// Orientation marks are carried over: a flipped oriented loop is oriented
/// the other way.
pub fn flip_loops(s: &LoopStructure, flip: &[bool]) -> LoopStructure {
    assert_eq!(flip.len(), s.loops().len(), "one flag per loop");
    rebuilt_with_flips(s, flip, None)
}

/// The same structure with every orientation mark cleared.
pub fn strip_orientations(s: &LoopStructure) -> LoopStructure {
    rebuilt_with_flips(s, &vec![false; s.loops().len()], Some(false))
}

/// Every direction choice satisfying the side constraints of one axis, in
/// lexicographic order of the flip vector, each with the verdict of the
/// level-graph acyclicity check. The flip vector spans all loops; entries of
/// other axes stay false.
pub fn axis_orientation_outcomes(
    s: &LoopStructure,
    axis: Axis,
) -> Result<Vec<(Vec<bool>, bool)>, OrientError> {
    let choices = side_components(s, axis)?;
    Ok((0..1u64 << choices.ncomp)
        .map(|m| {
            let flips = choices.flips_for(m, s.loops().len());
            let acyclic = axis_is_acyclic(s, axis, &flips);
            (flips, acyclic)
        })
        .collect())
}

/// Orient every loop: choose directions so that the side labels around every
/// region are consistent and all three level graphs are acyclic, then mark
/// all loops oriented. Among all workable choices this returns the one
/// flipping the lexicographically least set of loops, so a structure whose
/// stored directions already work comes back unchanged. Choices for
/// different axes never interact, so each axis is settled independently.
pub fn orient(s: &LoopStructure) -> Result<LoopStructure, OrientError> {
    let mut flips = vec![false; s.loops().len()];
    for axis in AXES {
        let choices = side_components(s, axis)?;
        let found = (0..1u64 << choices.ncomp)
            .map(|m| choices.flips_for(m, s.loops().len()))
            .find(|cand| axis_is_acyclic(s, axis, cand));
        let Some(cand) = found else {
            return Err(OrientError::AllColoringsCyclic { axis });
        };
        for (li, f) in cand.into_iter().enumerate() {
            flips[li] |= f;
        }
    }
    Ok(rebuilt_with_flips(s, &flips, Some(true)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{cube_structure, CrossingRef, Handedness, LoopSpec};
    use crate::validate::{check_polycube, Condition};
    use crate::voxel::{extract_dual, voxel_to_polycube, VoxelSolid};

    fn dual_of(cells: &[[i32; 3]]) -> LoopStructure {
        extract_dual(&voxel_to_polycube(&VoxelSolid::new(cells.iter().copied())).unwrap())
    }

    fn frame() -> LoopStructure {
        let ring: Vec<[i32; 3]> = (0..3)
            .flat_map(|x| (0..3).map(move |y| [x, y, 0]))
            .filter(|&c| c != [1, 1, 0])
            .collect();
        dual_of(&ring)
    }

    #[test]
    fn oriented_structures_come_back_unchanged() {
        let s = cube_structure();
        assert_eq!(orient(&s).unwrap().to_specs(), s.to_specs());
        let f = frame();
        assert_eq!(orient(&f).unwrap().to_specs(), f.to_specs());
    }

    #[test]
    fn stripping_and_reorienting_round_trips() {
        for s in [cube_structure(), dual_of(&[[0, 0, 0], [0, 0, 1]]), frame()] {
            let bare = strip_orientations(&s);
            assert!(bare.loops().iter().all(|l| !l.oriented));
            assert!(check_polycube(&bare).is_err(), "unoriented must not validate");
            let again = orient(&bare).unwrap();
            assert_eq!(again.to_specs(), s.to_specs());
            assert!(check_polycube(&again).unwrap().valid);
        }
    }

    #[test]
    fn flipping_twice_is_the_identity() {
        let s = frame();
        let mut flip = vec![false; s.loops().len()];
        flip[0] = true;
        flip[3] = true;
        let twice = flip_loops(&flip_loops(&s, &flip), &flip);
        assert_eq!(twice.to_specs(), s.to_specs());
    }

    #[test]
    fn orienting_repairs_a_flipped_ring() {
        // Reversing one ring of a stacked pair puts a two-cycle in its level
        // graph; the lexicographically least repair is to flip it back.
        let f = frame();
        let (zi, _) = f
            .loops()
            .iter()
            .enumerate()
            .filter(|(_, l)| l.axis == Axis::Z)
            .nth(1)
            .unwrap();
        let mut flip = vec![false; f.loops().len()];
        flip[zi] = true;
        let broken = flip_loops(&f, &flip);
        let report = check_polycube(&broken).unwrap();
        assert!(!report.valid);
        assert!(report.violations.iter().all(|v| v.condition() == Condition::P5));
        assert_eq!(orient(&broken).unwrap().to_specs(), f.to_specs());
    }

    #[test]
    fn ring_pair_admits_two_of_four_direction_choices() {
        let f = frame();
        let outcomes = axis_orientation_outcomes(&f, Axis::Z).unwrap();
        assert_eq!(outcomes.len(), 4);
        assert_eq!(outcomes.iter().filter(|(_, ok)| *ok).count(), 2);
        // Both workable choices flip the rings together.
        for (flips, ok) in &outcomes {
            let z: Vec<bool> = f
                .loops()
                .iter()
                .enumerate()
                .filter(|(_, l)| l.axis == Axis::Z)
                .map(|(li, _)| flips[li])
                .collect();
            assert_eq!(*ok, z[0] == z[1]);
        }
        // The four X rings chain through shared regions into one component:
        // all keep or all flip, and both choices work.
        let x = axis_orientation_outcomes(&f, Axis::X).unwrap();
        assert_eq!(x.len(), 2);
        assert!(x.iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn clashing_axis_labels_are_not_orientable() {
        // Relabel the cube's Z loop as a second X loop: every region then
        // sees two X slots, and the constraints close an odd cycle.
        let mut specs = cube_structure().to_specs();
        specs[2].axis = Axis::X;
        let s = LoopStructure::build(0, specs).unwrap();
        assert_eq!(
            orient(&s).unwrap_err(),
            OrientError::NonBipartite { axis: Axis::X }
        );
    }

    #[test]
    fn nonseparating_loops_cannot_be_directed() {
        // Meridian and longitude on the torus cross once; either side of the
        // meridian reaches the other, so its level edge closes on one zone
        // whichever way it points.
        let lp = |id, axis, handed| LoopSpec {
            id,
            axis,
            oriented: true,
            crossings: vec![CrossingRef {
                crossing: 0,
                handed,
            }],
        };
        let s = LoopStructure::build(
            1,
            vec![
                lp(0, Axis::X, Handedness::Plus),
                lp(1, Axis::Y, Handedness::Minus),
            ],
        )
        .unwrap();
        assert_eq!(
            orient(&s).unwrap_err(),
            OrientError::AllColoringsCyclic { axis: Axis::X }
        );
    }

    #[test]
    fn choice_lists_start_from_the_stored_directions() {
        let s = cube_structure();
        for axis in AXES {
            let outcomes = axis_orientation_outcomes(&s, axis).unwrap();
            assert_eq!(outcomes.len(), 2);
            assert!(outcomes[0].0.iter().all(|&f| !f));
            assert!(outcomes.iter().all(|(_, ok)| *ok));
        }
    }
}
