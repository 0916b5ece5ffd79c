//! Validity checks for loop structures: the four quad-structure conditions
//! and the five polycube-structure conditions, reported with concrete
//! witnesses in a deterministic order.

use serde::Serialize;

use crate::structure::{
    dart_segment, Axis, LoopStructure, RegionIx, Side, ZoneIx, AXES,
};

/// Condition identifiers. Q1-Q4 define a quad loop structure, P1-P5 a
/// polycube loop structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Condition {
    Q1,
    Q2,
    Q3,
    Q4,
    P1,
    P2,
    P3,
    P4,
    P5,
}

/// One violation with its locus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// Q1: a crossing whose rotation does not alternate between the two
    /// loops. Unreachable for built structures; kept as a guard.
    NonTransversal { crossing: u32 },
    /// Q2/P1: a triple point. Unreachable for built structures.
    TriplePoint { crossing: u32 },
    /// Q3/P4: a region that is not a disk. Unreachable for built structures,
    /// whose face tracing matches the declared genus by construction.
    NonDiskRegion { region: RegionIx },
    /// Q4: region bounded by fewer than two distinct segments.
    TooFewSegmentsQuad { region: RegionIx, distinct: usize },
    /// P2: region bounded by fewer than three distinct segments.
    TooFewSegments { region: RegionIx, distinct: usize },
    /// P3: two boundary slots of one region carry the same axis and side.
    RepeatedSideLabel {
        region: RegionIx,
        axis: Axis,
        side: Side,
    },
    /// P5: a directed cycle in one axis' level graph, listed as zone ids.
    LevelGraphCycle { axis: Axis, zones: Vec<ZoneIx> },
}

impl Violation {
    pub fn condition(&self) -> Condition {
        match self {
            Violation::NonTransversal { .. } => Condition::Q1,
            Violation::TriplePoint { .. } => Condition::Q2,
            Violation::NonDiskRegion { .. } => Condition::Q3,
            Violation::TooFewSegmentsQuad { .. } => Condition::Q4,
            Violation::TooFewSegments { .. } => Condition::P2,
            Violation::RepeatedSideLabel { .. } => Condition::P3,
            Violation::LevelGraphCycle { .. } => Condition::P5,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Violation::NonTransversal { crossing } => {
                format!("crossing {crossing} is not transversal")
            }
            Violation::TriplePoint { crossing } => {
                format!("crossing {crossing} is a triple point")
            }
            Violation::NonDiskRegion { region } => {
                format!("region {region} is not a disk")
            }
            Violation::TooFewSegmentsQuad { region, distinct } => {
                format!("region {region} is bounded by {distinct} distinct segments, need at least 2")
            }
            Violation::TooFewSegments { region, distinct } => {
                format!("region {region} is bounded by {distinct} distinct segments, need at least 3")
            }
            Violation::RepeatedSideLabel { region, axis, side } => {
                format!("region {region} sees side {axis}{side} on two boundary segments")
            }
            Violation::LevelGraphCycle { axis, zones } => {
                format!(
                    "{axis}-graph has a directed cycle through zones {}",
                    zones
                        .iter()
                        .map(|z| z.to_string())
                        .collect::<Vec<_>>()
                        .join(" -> ")
                )
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(mut violations: Vec<Violation>) -> ValidationReport {
        violations.sort_by(|a, b| {
            a.condition()
                .cmp(&b.condition())
                .then_with(|| format!("{a:?}").cmp(&format!("{b:?}")))
        });
        ValidationReport {
            valid: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, c: Condition) -> bool {
        self.violations.iter().any(|v| v.condition() == c)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("loop {0} carries no orientation; orient the structure first")]
pub struct UnorientedLoop(pub u32);

/// Representational guards Q1 and Q2. Built structures satisfy both by
/// construction; the checks exist so corrupted data cannot slip through.
fn representational_violations(s: &LoopStructure) -> Vec<Violation> {
    let mut out = Vec::new();
    for c in s.crossings() {
        let strand = |d: crate::structure::Dart| s.segments()[dart_segment(d)].loop_ix;
        let [a, b, c2, d] = c.rotation;
        if !(strand(a) == strand(c2) && strand(b) == strand(d) && strand(a) != strand(b)) {
            out.push(Violation::NonTransversal { crossing: c.id });
        }
        if c.passages[0].0 == c.passages[1].0 {
            out.push(Violation::TriplePoint { crossing: c.id });
        }
    }
    out
}

/// Check the quad-structure conditions: transversal crossings (Q1), no
/// triple points (Q2), disk regions (Q3), and at least two distinct boundary
/// segments per region (Q4).
pub fn check_quad(s: &LoopStructure) -> ValidationReport {
    let mut violations = representational_violations(s);
    // Q3: face tracing on a rotation system always produces disks, and the
    // builder has already matched chi against the declared genus, so this
    // cannot fire on a built structure.
    for r in 0..s.regions().len() {
        let distinct = s.region_distinct_segments(r);
        if distinct < 2 {
            violations.push(Violation::TooFewSegmentsQuad {
                region: r,
                distinct,
            });
        }
    }
    ValidationReport::from_violations(violations)
}

/// Check the polycube-structure conditions P1-P5. Requires every loop to be
/// oriented, since side labels and level graphs depend on orientation.
pub fn check_polycube(s: &LoopStructure) -> Result<ValidationReport, UnorientedLoop> {
    if let Some(l) = s.loops().iter().find(|l| !l.oriented) {
        return Err(UnorientedLoop(l.id));
    }
    let mut violations = representational_violations(s);

    for r in 0..s.regions().len() {
        let distinct = s.region_distinct_segments(r);
        if distinct < 3 {
            violations.push(Violation::TooFewSegments {
                region: r,
                distinct,
            });
        }
        // P3: count (axis, facing side) labels over the boundary slots; any
        // label seen twice is a violation.
        let mut counts = [0u8; 6];
        for &d in &s.regions()[r].boundary {
            let axis = s.segment_axis(dart_segment(d));
            let side = s.dart_facing(d).as_side();
            let slot = 2 * axis.index() + usize::from(side == Side::Plus);
            counts[slot] = counts[slot].saturating_add(1);
        }
        for (slot, &count) in counts.iter().enumerate() {
            if count >= 2 {
                violations.push(Violation::RepeatedSideLabel {
                    region: r,
                    axis: Axis::from_index(slot / 2),
                    side: if slot % 2 == 1 { Side::Plus } else { Side::Minus },
                });
            }
        }
    }

    for axis in AXES {
        let lg = s
            .level_graph(axis)
            .expect("all loops oriented, checked above");
        if let Some(zones) = lg.find_cycle() {
            violations.push(Violation::LevelGraphCycle { axis, zones });
        }
    }

    // Derived theorem: loops of one axis never cross in a valid structure.
    // A same-axis crossing must therefore show up as a P3 violation.
    let same_axis_crossing = s.crossings().iter().any(|c| {
        let (l0, _) = c.passages[0];
        let (l1, _) = c.passages[1];
        s.loops()[l0].axis == s.loops()[l1].axis
    });
    if same_axis_crossing {
        debug_assert!(
            violations
                .iter()
                .any(|v| v.condition() == Condition::P3),
            "same-axis crossing without a P3 violation"
        );
    }

    Ok(ValidationReport::from_violations(violations))
}

/// The orientation-independent subset of the polycube conditions (P1, P2,
/// P4) together with the quad conditions; what orientation search requires
/// before it can run.
pub fn check_orientable_preconditions(s: &LoopStructure) -> ValidationReport {
    let mut violations = representational_violations(s);
    for r in 0..s.regions().len() {
        let distinct = s.region_distinct_segments(r);
        if distinct < 3 {
            violations.push(Violation::TooFewSegments {
                region: r,
                distinct,
            });
        }
    }
    ValidationReport::from_violations(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{cube_structure, CrossingRef, Handedness, LoopSpec, LoopStructure};

    #[test]
    fn cube_is_valid() {
        let s = cube_structure();
        assert!(check_quad(&s).valid);
        let report = check_polycube(&s).unwrap();
        assert!(report.valid, "{:?}", report.violations);
    }

    #[test]
    fn free_loop_fails_q4_on_both_regions() {
        let s = LoopStructure::build(
            0,
            vec![LoopSpec {
                id: 0,
                axis: Axis::Z,
                oriented: true,
                crossings: vec![],
            }],
        )
        .unwrap();
        let report = check_quad(&s);
        assert!(!report.valid);
        let q4: Vec<_> = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::TooFewSegmentsQuad { .. }))
            .collect();
        assert_eq!(q4.len(), 2);
    }

    #[test]
    fn unoriented_loop_is_rejected() {
        let mut specs = cube_structure().to_specs();
        specs[1].oriented = false;
        let s = LoopStructure::build(0, specs).unwrap();
        assert!(check_quad(&s).valid);
        match check_polycube(&s) {
            Err(UnorientedLoop(1)) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn same_axis_crossings_violate_p3() {
        // Relabel the cube's Z-loop to axis X: it crosses the X-loop, and
        // the regions seeing equal sides of both loops now repeat a label.
        let mut specs = cube_structure().to_specs();
        specs[2].axis = Axis::X;
        let s = LoopStructure::build(0, specs).unwrap();
        let report = check_polycube(&s).unwrap();
        assert!(!report.valid);
        assert!(report.has(Condition::P3));
        assert!(!report.has(Condition::P5) || report.has(Condition::P3));
    }

    #[test]
    fn sphere_bigons_fail_p2() {
        use Handedness::{Minus, Plus};
        // Two great circles crossing twice: four bigon regions.
        let specs = vec![
            LoopSpec {
                id: 0,
                axis: Axis::X,
                oriented: true,
                crossings: vec![
                    CrossingRef { crossing: 0, handed: Plus },
                    CrossingRef { crossing: 1, handed: Minus },
                ],
            },
            LoopSpec {
                id: 1,
                axis: Axis::Y,
                oriented: true,
                crossings: vec![
                    CrossingRef { crossing: 0, handed: Minus },
                    CrossingRef { crossing: 1, handed: Plus },
                ],
            },
        ];
        let s = LoopStructure::build(0, specs).unwrap();
        assert_eq!(s.regions().len(), 4);
        let report = check_polycube(&s).unwrap();
        assert!(!report.valid);
        assert!(report.has(Condition::P2));
        assert!(check_quad(&s).valid, "bigons satisfy the quad conditions");
    }

    #[test]
    fn torus_double_crossing_fails_p5() {
        use Handedness::{Minus, Plus};
        // Parallel handedness at both crossings puts the pair on the torus:
        // two square regions, valid under P1-P4, but each axis' single zone
        // carries a self-loop in its level graph.
        let specs = vec![
            LoopSpec {
                id: 0,
                axis: Axis::X,
                oriented: true,
                crossings: vec![
                    CrossingRef { crossing: 0, handed: Plus },
                    CrossingRef { crossing: 1, handed: Plus },
                ],
            },
            LoopSpec {
                id: 1,
                axis: Axis::Y,
                oriented: true,
                crossings: vec![
                    CrossingRef { crossing: 0, handed: Minus },
                    CrossingRef { crossing: 1, handed: Minus },
                ],
            },
        ];
        let s = LoopStructure::build(1, specs).unwrap();
        assert_eq!(s.regions().len(), 2);
        let report = check_polycube(&s).unwrap();
        assert!(!report.valid);
        assert!(report.has(Condition::P5));
        assert!(!report.has(Condition::P2));
        assert!(!report.has(Condition::P3));
        // The cut along either loop is an annulus: zone genus 0, two
        // boundary sides, Euler characteristic 0.
        for axis in [Axis::X, Axis::Y] {
            let zones = s.zones(axis);
            assert_eq!(zones.len(), 1);
            assert_eq!(zones[0].chi, 0);
            assert_eq!(zones[0].boundary_sides, 2);
            assert_eq!(zones[0].genus(), Some(0));
        }
        for id in s.genus_identity() {
            assert!(id.holds, "{id:?}");
        }
    }
}
