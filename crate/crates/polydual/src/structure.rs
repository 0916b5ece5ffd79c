//! Loop structures on closed orientable surfaces, encoded as abstract rotation
//! systems. A structure is a set of labeled loops together with their pairwise
//! crossings; the crossing order along each loop plus one handedness bit per
//! passage determines the surface embedding up to homeomorphism, so regions,
//! zones and level graphs are all derived combinatorially.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coordinate axis a loop is labeled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        AXES[i]
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "X"),
            Axis::Y => write!(f, "Y"),
            Axis::Z => write!(f, "Z"),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X" | "x" => Ok(Axis::X),
            "Y" | "y" => Ok(Axis::Y),
            "Z" | "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis {other:?}, expected X, Y or Z")),
        }
    }
}

/// Per-passage crossing bit: whether the other loop crosses from right to
/// left when read along this loop's traversal direction. The two records of
/// one crossing must carry opposite bits on an orientable surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Handedness {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Handedness {
    pub fn flipped(self) -> Handedness {
        match self {
            Handedness::Plus => Handedness::Minus,
            Handedness::Minus => Handedness::Plus,
        }
    }
}

impl fmt::Display for Handedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Handedness::Plus => write!(f, "+"),
            Handedness::Minus => write!(f, "-"),
        }
    }
}

/// Side of an oriented loop. Following the traversal direction, the right
/// side is the positive side: primal coordinates increase when stepping off
/// the loop to its right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Side {
    pub fn flipped(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Plus => write!(f, "+"),
            Side::Minus => write!(f, "-"),
        }
    }
}

/// Side of a loop relative to its stored traversal direction, independent of
/// whether that direction has been committed to as an orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelSide {
    Left,
    Right,
}

impl RelSide {
    /// Signed side under the convention that the right side is positive.
    pub fn as_side(self) -> Side {
        match self {
            RelSide::Left => Side::Minus,
            RelSide::Right => Side::Plus,
        }
    }
}

/// One crossing record inside a loop's crossing list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingRef {
    pub crossing: u32,
    pub handed: Handedness,
}

/// Input description of one loop: its label, whether the stored traversal
/// direction is meant as an orientation, and the cyclic crossing sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub id: u32,
    pub axis: Axis,
    pub oriented: bool,
    pub crossings: Vec<CrossingRef>,
}

fn default_version() -> u32 {
    1
}

/// On-disk document: a genus plus the loop list. Serialized as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDoc {
    #[serde(default = "default_version")]
    pub version: u32,
    pub genus: u32,
    pub loops: Vec<LoopSpec>,
}

pub const DOC_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("structure has no loops")]
    EmptyStructure,
    #[error("duplicate loop id {0}")]
    DuplicateLoopId(u32),
    #[error("crossing {crossing} appears {count} times, expected exactly 2")]
    DanglingCrossing { crossing: u32, count: usize },
    #[error("crossing {crossing} appears three or more times; triple points are not representable")]
    TripleCrossing { crossing: u32 },
    #[error("crossing {crossing} pairs loop {loop_id} with itself; self-crossings are not representable")]
    SelfCrossing { crossing: u32, loop_id: u32 },
    #[error("crossing {crossing} carries the same handedness bit on both records")]
    InconsistentHandedness { crossing: u32 },
    #[error("loop {loop_id} has no crossings but is not the only loop; its placement would be ambiguous")]
    UnanchoredLoop { loop_id: u32 },
    #[error("loops do not form a single connected arrangement")]
    Disconnected,
    #[error("declared genus {declared} needs Euler characteristic {expected}, traced {traced}")]
    GenusMismatch {
        declared: u32,
        expected: i64,
        traced: i64,
    },
    #[error("unsupported document version {0}")]
    UnsupportedVersion(u32),
}

pub type LoopIx = usize;
pub type CrossingIx = usize;
pub type SegmentIx = usize;
pub type RegionIx = usize;
pub type ZoneIx = usize;

/// Darts are directed segment sides: dart `2*s` runs along segment `s` in
/// loop direction, dart `2*s + 1` runs against it.
pub type Dart = usize;

pub fn dart_segment(d: Dart) -> SegmentIx {
    d / 2
}

pub fn dart_is_forward(d: Dart) -> bool {
    d % 2 == 0
}

/// Reversal involution on darts.
pub fn dart_reverse(d: Dart) -> Dart {
    d ^ 1
}

#[derive(Debug, Clone)]
pub struct Loop {
    pub id: u32,
    pub axis: Axis,
    pub oriented: bool,
    /// Crossings in traversal order (internal indices). Empty only for the
    /// lone-loop structure with no crossings at all.
    pub crossings: Vec<CrossingIx>,
    pub handed: Vec<Handedness>,
    /// Segment `segments[j]` runs from `crossings[j]` to `crossings[j+1]`
    /// cyclically. A crossing-free loop owns exactly one closed segment.
    pub segments: Vec<SegmentIx>,
}

#[derive(Debug, Clone)]
pub struct Crossing {
    /// Id as it appears in the document; preserved across analyses.
    pub id: u32,
    /// The two passages through this crossing, in first-appearance order when
    /// scanning loops by id and sequence position.
    pub passages: [(LoopIx, usize); 2],
    /// Incident darts in counterclockwise rotation order as seen from outside
    /// the surface. Faces traced from this rotation lie to the left of their
    /// darts.
    pub rotation: [Dart; 4],
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub loop_ix: LoopIx,
    /// Position within the owning loop: the segment leaves
    /// `loop.crossings[pos]`.
    pub pos: usize,
}

#[derive(Debug, Clone)]
pub struct Region {
    /// Boundary darts in face-trace order; the region lies to the left of
    /// each dart.
    pub boundary: Vec<Dart>,
}

impl Region {
    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }
}

/// A zone for one axis: a connected component of regions glued across every
/// segment not labeled with that axis.
#[derive(Debug, Clone)]
pub struct Zone {
    pub axis: Axis,
    /// Member regions, ascending.
    pub regions: Vec<RegionIx>,
    /// Euler characteristic of the zone as a bordered subsurface.
    pub chi: i64,
    /// Number of (loop, side) pairs of this axis bounding the zone.
    pub boundary_sides: usize,
}

impl Zone {
    /// Genus from chi = 2 - 2g - b; `None` when the accounting is not that of
    /// a genuine bordered surface (possible only for structures that fail
    /// validation elsewhere).
    pub fn genus(&self) -> Option<u32> {
        let num = 2 - self.chi - self.boundary_sides as i64;
        if num < 0 || num % 2 != 0 {
            return None;
        }
        Some((num / 2) as u32)
    }
}

/// Directed multigraph on one axis' zones: one edge per loop of the axis,
/// running from the zone on its negative side to the zone on its positive
/// side. Parallel edges are legitimate.
#[derive(Debug, Clone)]
pub struct LevelGraph {
    pub axis: Axis,
    pub zone_count: usize,
    /// (minus-side zone, plus-side zone, loop) per loop of the axis.
    pub edges: Vec<(ZoneIx, ZoneIx, LoopIx)>,
}

impl LevelGraph {
    /// Kahn's algorithm; `None` when acyclic, otherwise a witness cycle as a
    /// zone sequence (first zone repeated at the end is implied). Zone and
    /// edge counts are tiny, so edges are rescanned instead of building an
    /// adjacency table.
    pub fn find_cycle(&self) -> Option<Vec<ZoneIx>> {
        let mut indeg = vec![0usize; self.zone_count];
        for &(_, v, _) in &self.edges {
            indeg[v] += 1;
        }
        let mut queue: Vec<ZoneIx> = (0..self.zone_count).filter(|&z| indeg[z] == 0).collect();
        let mut seen = 0;
        while let Some(z) = queue.pop() {
            seen += 1;
            for &(u, v, _) in &self.edges {
                if u == z {
                    indeg[v] -= 1;
                    if indeg[v] == 0 {
                        queue.push(v);
                    }
                }
            }
        }
        if seen == self.zone_count {
            return None;
        }
        // Some zone lies on a cycle; walk forward through still-saturated
        // vertices until one repeats, then cut the tail.
        let start = (0..self.zone_count).find(|&z| indeg[z] > 0).unwrap();
        let mut path = vec![start];
        let mut at = start;
        loop {
            let next = self
                .edges
                .iter()
                .filter(|&&(u, v, _)| u == at && indeg[v] > 0)
                .map(|&(_, v, _)| v)
                .min()
                .unwrap();
            if let Some(pos) = path.iter().position(|&z| z == next) {
                return Some(path[pos..].to_vec());
            }
            path.push(next);
            at = next;
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Longest-path layer per zone. Requires acyclicity.
    pub fn longest_path_layers(&self) -> Option<Vec<i64>> {
        let mut indeg = vec![0usize; self.zone_count];
        for &(_, v, _) in &self.edges {
            indeg[v] += 1;
        }
        let mut layer = vec![0i64; self.zone_count];
        let mut queue: Vec<ZoneIx> = (0..self.zone_count).filter(|&z| indeg[z] == 0).collect();
        let mut head = 0;
        while head < queue.len() {
            let z = queue[head];
            head += 1;
            for &(u, v, _) in &self.edges {
                if u == z {
                    layer[v] = layer[v].max(layer[z] + 1);
                    indeg[v] -= 1;
                    if indeg[v] == 0 {
                        queue.push(v);
                    }
                }
            }
        }
        if head == self.zone_count {
            Some(layer)
        } else {
            None
        }
    }
}

/// Per-axis check of |E| = g + |V| - 1 - Gamma on the level graph, where
/// Gamma sums the zone genera of the axis.
#[derive(Debug, Clone, Serialize)]
pub struct GenusIdentity {
    pub axis: Axis,
    pub loops: usize,
    pub zones: usize,
    pub zone_genus_sum: Option<u32>,
    pub holds: bool,
}

#[derive(Debug, Error)]
#[error("loop {0} carries no orientation")]
pub struct UnorientedLoop(pub u32);

/// Lazily computed zone decomposition per axis. Cloning a structure starts
/// with a cold cache; the data is recomputed on demand.
#[derive(Debug, Default)]
struct ZoneCache([OnceLock<(Vec<Zone>, Vec<ZoneIx>)>; 3]);

impl Clone for ZoneCache {
    fn clone(&self) -> ZoneCache {
        ZoneCache::default()
    }
}

/// A built loop structure. Immutable; all derived data is computed in the
/// constructor and kept consistent by construction.
#[derive(Debug, Clone)]
pub struct LoopStructure {
    genus: u32,
    loops: Vec<Loop>,
    crossings: Vec<Crossing>,
    segments: Vec<Segment>,
    regions: Vec<Region>,
    /// Region owning each dart (the face to the dart's left).
    dart_region: Vec<RegionIx>,
    zone_cache: ZoneCache,
}

impl LoopStructure {
    /// Assemble a structure from loop descriptions. Checks representability:
    /// each crossing id appears exactly twice in two distinct loops with
    /// opposite handedness bits, the arrangement is connected, and the traced
    /// Euler characteristic matches the declared genus.
    pub fn build(genus: u32, specs: Vec<LoopSpec>) -> Result<LoopStructure, BuildError> {
        if specs.is_empty() {
            return Err(BuildError::EmptyStructure);
        }
        let mut specs = specs;
        specs.sort_by_key(|s| s.id);
        for pair in specs.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(BuildError::DuplicateLoopId(pair[0].id));
            }
        }

        // Collect crossing occurrences; sorting by (id, loop, position) keeps
        // the two passages of each id in canonical scan order.
        let mut occ_list: Vec<(u32, u32, u32)> = Vec::new();
        for (li, spec) in specs.iter().enumerate() {
            for (pos, cr) in spec.crossings.iter().enumerate() {
                occ_list.push((cr.crossing, li as u32, pos as u32));
            }
        }
        occ_list.sort_unstable();
        // Validated pairs: (id, first passage, second passage) in id order.
        let mut pairs: Vec<(u32, (LoopIx, usize), (LoopIx, usize))> = Vec::new();
        let mut i = 0;
        while i < occ_list.len() {
            let id = occ_list[i].0;
            let mut j = i + 1;
            while j < occ_list.len() && occ_list[j].0 == id {
                j += 1;
            }
            match j - i {
                2 => {}
                1 => {
                    return Err(BuildError::DanglingCrossing {
                        crossing: id,
                        count: 1,
                    })
                }
                _ => return Err(BuildError::TripleCrossing { crossing: id }),
            }
            let (l0, p0) = (occ_list[i].1 as LoopIx, occ_list[i].2 as usize);
            let (l1, p1) = (occ_list[i + 1].1 as LoopIx, occ_list[i + 1].2 as usize);
            if l0 == l1 {
                return Err(BuildError::SelfCrossing {
                    crossing: id,
                    loop_id: specs[l0].id,
                });
            }
            if specs[l0].crossings[p0].handed == specs[l1].crossings[p1].handed {
                return Err(BuildError::InconsistentHandedness { crossing: id });
            }
            pairs.push((id, (l0, p0), (l1, p1)));
            i = j;
        }

        let free_loops: Vec<LoopIx> = specs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.crossings.is_empty())
            .map(|(i, _)| i)
            .collect();
        if !free_loops.is_empty() && specs.len() > 1 {
            return Err(BuildError::UnanchoredLoop {
                loop_id: specs[free_loops[0]].id,
            });
        }

        // Internal crossing indices in first-appearance order over the
        // canonical loop scan; a pair's first appearance is its first passage.
        let mut appearance: Vec<usize> = (0..pairs.len()).collect();
        appearance.sort_unstable_by_key(|&p| pairs[p].1);
        let mut pair_to_ix: Vec<CrossingIx> = vec![0; pairs.len()];
        for (ix, &p) in appearance.iter().enumerate() {
            pair_to_ix[p] = ix;
        }
        // Map a document id to its internal index via the id-sorted pairs.
        let crossing_ix = |id: u32| -> CrossingIx {
            let p = pairs.partition_point(|pr| pr.0 < id);
            pair_to_ix[p]
        };

        // Segments in canonical order: loops by id, positions ascending.
        let mut segments = Vec::new();
        let mut loops = Vec::with_capacity(specs.len());
        for (li, spec) in specs.iter().enumerate() {
            let k = spec.crossings.len().max(1);
            let mut segs = Vec::with_capacity(k);
            for pos in 0..k {
                segs.push(segments.len());
                segments.push(Segment { loop_ix: li, pos });
            }
            loops.push(Loop {
                id: spec.id,
                axis: spec.axis,
                oriented: spec.oriented,
                crossings: spec
                    .crossings
                    .iter()
                    .map(|c| crossing_ix(c.crossing))
                    .collect(),
                handed: spec.crossings.iter().map(|c| c.handed).collect(),
                segments: segs,
            });
        }

        // Rotation per crossing. With A the passage recording '+' (the other
        // loop crosses right to left) and B the one recording '-', the darts
        // in counterclockwise order seen from outside are
        // [out_A, out_B, in_A, in_B], where out is the forward dart of the
        // segment leaving the crossing and in is the backward dart of the
        // segment arriving at it.
        let mut crossings = Vec::with_capacity(pairs.len());
        for &p in &appearance {
            let (id, (l0, p0), (l1, p1)) = pairs[p];
            let (a, b) = if specs[l0].crossings[p0].handed == Handedness::Plus {
                ((l0, p0), (l1, p1))
            } else {
                ((l1, p1), (l0, p0))
            };
            let out = |(li, pos): (LoopIx, usize)| -> Dart { 2 * loops[li].segments[pos] };
            let inc = |(li, pos): (LoopIx, usize)| -> Dart {
                let k = loops[li].segments.len();
                let prev = (pos + k - 1) % k;
                2 * loops[li].segments[prev] + 1
            };
            crossings.push(Crossing {
                id,
                passages: [(l0, p0), (l1, p1)],
                rotation: [out(a), out(b), inc(a), inc(b)],
            });
        }

        // Next-clockwise dart at each dart's source crossing (the inverse of
        // the counterclockwise rotation).
        let dart_count = 2 * segments.len();
        const UNSET: usize = usize::MAX;
        let mut sigma_inv: Vec<Dart> = vec![UNSET; dart_count];
        for c in &crossings {
            for i in 0..4 {
                sigma_inv[c.rotation[(i + 1) % 4]] = c.rotation[i];
            }
        }

        // Face tracing: the next boundary dart of the face left of `d` is the
        // clockwise-next dart at the far end, sigma_inv(reverse(d)). This walks
        // each region counterclockwise, keeping it on the left. A crossing-free
        // loop has no rotation; each of its two darts bounds its own region
        // alone.
        let mut dart_region: Vec<RegionIx> = vec![UNSET; dart_count];
        let mut regions: Vec<Region> = Vec::new();
        for start in 0..dart_count {
            if dart_region[start] != UNSET {
                continue;
            }
            let rix = regions.len();
            let mut boundary = Vec::new();
            let mut d = start;
            loop {
                debug_assert_eq!(dart_region[d], UNSET);
                dart_region[d] = rix;
                boundary.push(d);
                d = match sigma_inv[dart_reverse(d)] {
                    UNSET => start, // free loop: single-dart face closes immediately
                    next => next,
                };
                if d == start {
                    break;
                }
            }
            regions.push(Region { boundary });
        }

        // Connectivity of the arrangement: loops joined by shared crossings.
        let mut reach = vec![false; loops.len()];
        let mut stack = vec![0usize];
        reach[0] = true;
        while let Some(li) = stack.pop() {
            for &cx in &loops[li].crossings {
                for &(lj, _) in &crossings[cx].passages {
                    if !reach[lj] {
                        reach[lj] = true;
                        stack.push(lj);
                    }
                }
            }
        }
        if reach.iter().any(|&r| !r) {
            return Err(BuildError::Disconnected);
        }

        // Euler characteristic. A crossing-free loop is a circle without
        // crossings; it carries one virtual vertex so the cell structure is
        // genuine (V=1, E=1, F=2 on the sphere).
        let v_eff = crossings.len() as i64 + free_loops.len() as i64;
        let traced = v_eff - segments.len() as i64 + regions.len() as i64;
        let expected = 2 - 2 * genus as i64;
        if traced != expected {
            return Err(BuildError::GenusMismatch {
                declared: genus,
                expected,
                traced,
            });
        }

        Ok(LoopStructure {
            genus,
            loops,
            crossings,
            segments,
            regions,
            dart_region,
            zone_cache: ZoneCache::default(),
        })
    }

    pub fn from_doc(doc: StructureDoc) -> Result<LoopStructure, BuildError> {
        if doc.version != DOC_VERSION {
            return Err(BuildError::UnsupportedVersion(doc.version));
        }
        LoopStructure::build(doc.genus, doc.loops)
    }

    pub fn to_doc(&self) -> StructureDoc {
        StructureDoc {
            version: DOC_VERSION,
            genus: self.genus,
            loops: self.to_specs(),
        }
    }

    /// Loop descriptions equivalent to this structure, in loop-id order.
    pub fn to_specs(&self) -> Vec<LoopSpec> {
        self.loops
            .iter()
            .map(|l| LoopSpec {
                id: l.id,
                axis: l.axis,
                oriented: l.oriented,
                crossings: l
                    .crossings
                    .iter()
                    .zip(&l.handed)
                    .map(|(&cx, &h)| CrossingRef {
                        crossing: self.crossings[cx].id,
                        handed: h,
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn loop_by_id(&self, id: u32) -> Option<LoopIx> {
        self.loops.iter().position(|l| l.id == id)
    }

    pub fn all_oriented(&self) -> bool {
        self.loops.iter().all(|l| l.oriented)
    }

    pub fn segment_axis(&self, s: SegmentIx) -> Axis {
        self.loops[self.segments[s].loop_ix].axis
    }

    /// Region to the left of the dart.
    pub fn dart_region(&self, d: Dart) -> RegionIx {
        self.dart_region[d]
    }

    /// Regions on the two sides of a segment: `[left, right]` relative to the
    /// owning loop's traversal direction. Both entries may name the same
    /// region in structures that fail validation.
    pub fn segment_regions(&self, s: SegmentIx) -> [RegionIx; 2] {
        [self.dart_region[2 * s], self.dart_region[2 * s + 1]]
    }

    /// Side of the owning loop that faces the region a boundary dart belongs
    /// to: a forward dart has its region on the loop's left.
    pub fn dart_facing(&self, d: Dart) -> RelSide {
        if dart_is_forward(d) {
            RelSide::Left
        } else {
            RelSide::Right
        }
    }

    /// Boundary of a region as (segment, side of the owning loop facing this
    /// region) in cyclic order.
    pub fn region_slots(&self, r: RegionIx) -> Vec<(SegmentIx, RelSide)> {
        self.regions[r]
            .boundary
            .iter()
            .map(|&d| (dart_segment(d), self.dart_facing(d)))
            .collect()
    }

    /// Number of distinct segments on a region's boundary (a segment can
    /// appear with both sides on one region in degenerate structures).
    /// Boundaries are short, so the quadratic scan beats sorting.
    pub fn region_distinct_segments(&self, r: RegionIx) -> usize {
        let b = &self.regions[r].boundary;
        (0..b.len())
            .filter(|&i| {
                let seg = dart_segment(b[i]);
                b[..i].iter().all(|&e| dart_segment(e) != seg)
            })
            .count()
    }

    /// The crossing a dart emanates from; `None` for the darts of a
    /// crossing-free loop.
    pub fn dart_source(&self, d: Dart) -> Option<CrossingIx> {
        let seg = &self.segments[dart_segment(d)];
        let l = &self.loops[seg.loop_ix];
        if l.crossings.is_empty() {
            return None;
        }
        let k = l.crossings.len();
        if dart_is_forward(d) {
            Some(l.crossings[seg.pos])
        } else {
            Some(l.crossings[(seg.pos + 1) % k])
        }
    }

    /// The four regions around a crossing in counterclockwise order as seen
    /// from outside; entry `i` lies between rotation darts `i` and `i+1`.
    pub fn regions_around(&self, c: CrossingIx) -> [RegionIx; 4] {
        let rot = self.crossings[c].rotation;
        [
            self.dart_region[rot[0]],
            self.dart_region[rot[1]],
            self.dart_region[rot[2]],
            self.dart_region[rot[3]],
        ]
    }

    /// Region on the given side of a loop, read off its first segment. For
    /// structures free of same-axis crossings every segment agrees.
    pub fn loop_side_region(&self, li: LoopIx, side: RelSide) -> RegionIx {
        let s = self.loops[li].segments[0];
        match side {
            RelSide::Left => self.dart_region[2 * s],
            RelSide::Right => self.dart_region[2 * s + 1],
        }
    }

    /// Zones of one axis: connected components of regions under adjacency
    /// across every segment whose loop is not labeled with the axis. Computed
    /// once per axis and cached.
    pub fn zones(&self, axis: Axis) -> &[Zone] {
        &self.zone_pair(axis).0
    }

    fn zone_pair(&self, axis: Axis) -> &(Vec<Zone>, Vec<ZoneIx>) {
        self.zone_cache.0[axis.index()].get_or_init(|| self.compute_zones(axis))
    }

    fn compute_zones(&self, axis: Axis) -> (Vec<Zone>, Vec<ZoneIx>) {
        const UNSET: usize = usize::MAX;
        let mut region_zone: Vec<ZoneIx> = vec![UNSET; self.regions.len()];
        let mut zones_regions: Vec<Vec<RegionIx>> = Vec::new();
        for seed in 0..self.regions.len() {
            if region_zone[seed] != UNSET {
                continue;
            }
            let zi = zones_regions.len();
            let mut members = Vec::new();
            let mut stack = vec![seed];
            region_zone[seed] = zi;
            while let Some(r) = stack.pop() {
                members.push(r);
                for &d in &self.regions[r].boundary {
                    let s = dart_segment(d);
                    if self.segment_axis(s) == axis {
                        continue;
                    }
                    let other = self.dart_region[dart_reverse(d)];
                    if region_zone[other] == UNSET {
                        region_zone[other] = zi;
                        stack.push(other);
                    }
                }
            }
            members.sort_unstable();
            zones_regions.push(members);
        }

        // Cell accounting per zone, on the subsurface obtained by cutting
        // along every loop of the axis. Faces are member regions; edges are
        // interior (non-axis) segments plus one boundary copy per axis
        // segment side; vertices are crossing wedges, where a crossing splits
        // into one copy per side of each axis strand through it.
        let nz = zones_regions.len();
        let mut faces = vec![0i64; nz];
        for (zi, members) in zones_regions.iter().enumerate() {
            faces[zi] = members.len() as i64;
        }
        let mut edges = vec![0i64; nz];
        let mut verts = vec![0i64; nz];
        for s in 0..self.segments.len() {
            let [left, right] = self.segment_regions(s);
            if self.segment_axis(s) == axis {
                edges[region_zone[left]] += 1;
                edges[region_zone[right]] += 1;
            } else {
                debug_assert_eq!(region_zone[left], region_zone[right]);
                edges[region_zone[left]] += 1;
            }
        }
        for c in 0..self.crossings.len() {
            let rot = self.crossings[c].rotation;
            let on_axis = |d: Dart| self.segment_axis(dart_segment(d)) == axis;
            let strand0 = on_axis(rot[0]); // strand occupying rotation slots 0 and 2
            let strand1 = on_axis(rot[1]); // strand occupying rotation slots 1 and 3
            let around = self.regions_around(c);
            match (strand0, strand1) {
                (false, false) => {
                    verts[region_zone[around[0]]] += 1;
                }
                (true, true) => {
                    for &r in &around {
                        verts[region_zone[r]] += 1;
                    }
                }
                (true, false) => {
                    // Wedges on the two sides of strand 0: faces {0,1} and {2,3}.
                    verts[region_zone[around[0]]] += 1;
                    verts[region_zone[around[2]]] += 1;
                }
                (false, true) => {
                    // Wedges on the two sides of strand 1: faces {1,2} and {3,0}.
                    verts[region_zone[around[1]]] += 1;
                    verts[region_zone[around[3]]] += 1;
                }
            }
        }
        // Crossing-free loops carry their virtual vertex: one interior vertex
        // if the loop is glued over, one vertex per boundary circle copy if
        // the loop is cut along.
        for l in &self.loops {
            if !l.crossings.is_empty() {
                continue;
            }
            let s = l.segments[0];
            let [left, right] = self.segment_regions(s);
            if l.axis == axis {
                verts[region_zone[left]] += 1;
                verts[region_zone[right]] += 1;
            } else {
                verts[region_zone[left]] += 1;
            }
        }

        let mut boundary_sides = vec![0usize; nz];
        for (li, l) in self.loops.iter().enumerate() {
            if l.axis != axis {
                continue;
            }
            boundary_sides[region_zone[self.loop_side_region(li, RelSide::Left)]] += 1;
            boundary_sides[region_zone[self.loop_side_region(li, RelSide::Right)]] += 1;
        }

        let zones = zones_regions
            .into_iter()
            .enumerate()
            .map(|(zi, regions)| Zone {
                axis,
                regions,
                chi: verts[zi] - edges[zi] + faces[zi],
                boundary_sides: boundary_sides[zi],
            })
            .collect();
        (zones, region_zone)
    }

    /// Zones of one axis together with the zone index of every region.
    pub fn region_zone_map(&self, axis: Axis) -> (&[Zone], &[ZoneIx]) {
        let pair = self.zone_pair(axis);
        (&pair.0, &pair.1)
    }

    /// Level graph of one axis. Every loop of the axis must be oriented.
    pub fn level_graph(&self, axis: Axis) -> Result<LevelGraph, UnorientedLoop> {
        let (zones, map) = self.region_zone_map(axis);
        let mut edges = Vec::new();
        for (li, l) in self.loops.iter().enumerate() {
            if l.axis != axis {
                continue;
            }
            if !l.oriented {
                return Err(UnorientedLoop(l.id));
            }
            let minus = map[self.loop_side_region(li, RelSide::Left)];
            let plus = map[self.loop_side_region(li, RelSide::Right)];
            edges.push((minus, plus, li));
        }
        Ok(LevelGraph {
            axis,
            zone_count: zones.len(),
            edges,
        })
    }

    /// Per-axis check of |E| = g + |V| - 1 - Gamma, relating loop count, zone
    /// count, surface genus and total zone genus.
    pub fn genus_identity(&self) -> [GenusIdentity; 3] {
        AXES.map(|axis| {
            let zones = self.zones(axis);
            let loops = self
                .loops
                .iter()
                .filter(|l| l.axis == axis)
                .count();
            let gamma = zones.iter().map(|z| z.genus()).sum::<Option<u32>>();
            let holds = match gamma {
                Some(g) => {
                    loops as i64 == self.genus as i64 + zones.len() as i64 - 1 - g as i64
                }
                None => false,
            };
            GenusIdentity {
                axis,
                loops,
                zones: zones.len(),
                zone_genus_sum: gamma,
                holds,
            }
        })
    }

    /// The same arrangement with one loop's traversal direction reversed.
    /// Reversal flips the loop's own handedness bits and the partner bit at
    /// each of its crossings, leaving the embedding untouched.
    pub fn with_loop_flipped(&self, loop_id: u32) -> Option<LoopStructure> {
        let li = self.loop_by_id(loop_id)?;
        let mut specs = self.to_specs();
        let flipped_crossings: std::collections::BTreeSet<u32> = self.loops[li]
            .crossings
            .iter()
            .map(|&c| self.crossings[c].id)
            .collect();
        for spec in &mut specs {
            if spec.id == loop_id {
                spec.crossings.reverse();
                for cr in &mut spec.crossings {
                    cr.handed = cr.handed.flipped();
                }
            } else {
                for cr in &mut spec.crossings {
                    if flipped_crossings.contains(&cr.crossing) {
                        cr.handed = cr.handed.flipped();
                    }
                }
            }
        }
        Some(LoopStructure::build(self.genus, specs).expect("flip preserves representability"))
    }

    /// The same arrangement with orientation flags adjusted; flips are given
    /// per loop id.
    pub fn with_orientations(
        &self,
        oriented: bool,
        flips: &std::collections::BTreeSet<u32>,
    ) -> LoopStructure {
        let mut out = self.clone();
        for l in &mut out.loops {
            l.oriented = oriented;
        }
        let mut s = out;
        for &id in flips {
            s = s
                .with_loop_flipped(id)
                .expect("flip target exists");
            for l in &mut s.loops {
                l.oriented = oriented;
            }
        }
        s
    }

    /// Structural isomorphism up to relabeling of loops and crossings,
    /// preserving axes, traversal directions and handedness.
    pub fn isomorphic(&self, other: &LoopStructure) -> bool {
        if self.genus != other.genus
            || self.loops.len() != other.loops.len()
            || self.crossings.len() != other.crossings.len()
        {
            return false;
        }
        let sig = |s: &LoopStructure, li: LoopIx| (s.loops[li].axis, s.loops[li].crossings.len());
        let mut loop_map: Vec<Option<LoopIx>> = vec![None; self.loops.len()];
        let mut used: Vec<bool> = vec![false; other.loops.len()];
        let mut cross_map: BTreeMap<CrossingIx, CrossingIx> = BTreeMap::new();

        fn backtrack(
            a: &LoopStructure,
            b: &LoopStructure,
            li: LoopIx,
            loop_map: &mut Vec<Option<LoopIx>>,
            used: &mut Vec<bool>,
            cross_map: &mut BTreeMap<CrossingIx, CrossingIx>,
            sig: &dyn Fn(&LoopStructure, LoopIx) -> (Axis, usize),
        ) -> bool {
            if li == a.loops.len() {
                return true;
            }
            for cand in 0..b.loops.len() {
                if used[cand] || sig(a, li) != sig(b, cand) {
                    continue;
                }
                let k = a.loops[li].crossings.len();
                let rotations: Vec<usize> = if k == 0 { vec![0] } else { (0..k).collect() };
                'rot: for rot in rotations {
                    // Tentatively align crossing sequences under this rotation.
                    let mut added: Vec<CrossingIx> = Vec::new();
                    let mut ok = true;
                    for j in 0..k {
                        let ca = a.loops[li].crossings[j];
                        let cb = b.loops[cand].crossings[(j + rot) % k];
                        if a.loops[li].handed[j] != b.loops[cand].handed[(j + rot) % k] {
                            ok = false;
                        } else {
                            match cross_map.get(&ca) {
                                Some(&mapped) if mapped != cb => ok = false,
                                Some(_) => {}
                                None => {
                                    if cross_map.values().any(|&v| v == cb) {
                                        ok = false;
                                    } else {
                                        cross_map.insert(ca, cb);
                                        added.push(ca);
                                    }
                                }
                            }
                        }
                        if !ok {
                            break;
                        }
                    }
                    if ok {
                        loop_map[li] = Some(cand);
                        used[cand] = true;
                        if backtrack(a, b, li + 1, loop_map, used, cross_map, sig) {
                            return true;
                        }
                        loop_map[li] = None;
                        used[cand] = false;
                    }
                    for ca in added {
                        cross_map.remove(&ca);
                    }
                    if !ok {
                        continue 'rot;
                    }
                }
            }
            false
        }

        backtrack(
            self,
            other,
            0,
            &mut loop_map,
            &mut used,
            &mut cross_map,
            &sig,
        )
    }
}

/// Hand-built three-loop structure on the sphere: the dual of the unit cube.
/// Each pair of loops crosses twice; every loop is oriented with its positive
/// side toward the higher coordinate.
pub fn cube_structure() -> LoopStructure {
    use Handedness::{Minus, Plus};
    let lp = |id, axis, crossings: Vec<(u32, Handedness)>| LoopSpec {
        id,
        axis,
        oriented: true,
        crossings: crossings
            .into_iter()
            .map(|(crossing, handed)| CrossingRef { crossing, handed })
            .collect(),
    };
    // Crossings: 0 top, 1 north, 2 bottom, 3 south, 4 east, 5 west.
    LoopStructure::build(
        0,
        vec![
            lp(0, Axis::X, vec![(0, Plus), (1, Minus), (2, Minus), (3, Plus)]),
            lp(1, Axis::Y, vec![(4, Plus), (0, Minus), (5, Minus), (2, Plus)]),
            lp(2, Axis::Z, vec![(1, Plus), (4, Minus), (3, Minus), (5, Plus)]),
        ],
    )
    .expect("cube structure is representable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_counts() {
        let s = cube_structure();
        assert_eq!(s.crossings().len(), 6);
        assert_eq!(s.segments().len(), 12);
        assert_eq!(s.regions().len(), 8);
        for r in 0..s.regions().len() {
            assert_eq!(s.regions()[r].boundary_len(), 3);
            assert_eq!(s.region_distinct_segments(r), 3);
        }
    }

    #[test]
    fn cube_zones_and_level_graphs() {
        let s = cube_structure();
        for axis in AXES {
            let zones = s.zones(axis);
            assert_eq!(zones.len(), 2, "{axis}");
            for z in zones {
                assert_eq!(z.regions.len(), 4);
                assert_eq!(z.boundary_sides, 1);
                assert_eq!(z.chi, 1, "{axis} zone should be a disk");
                assert_eq!(z.genus(), Some(0));
            }
            let lg = s.level_graph(axis).unwrap();
            assert_eq!(lg.zone_count, 2);
            assert_eq!(lg.edges.len(), 1);
            let (u, v, _) = lg.edges[0];
            assert_ne!(u, v);
            assert!(lg.is_acyclic());
        }
        for id in s.genus_identity() {
            assert!(id.holds, "{:?}", id);
            assert_eq!(id.zone_genus_sum, Some(0));
        }
    }

    #[test]
    fn single_free_loop_is_representable() {
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
        assert_eq!(s.regions().len(), 2);
        for r in 0..2 {
            assert_eq!(s.regions()[r].boundary_len(), 1);
        }
        // Z sees two disk zones split by the loop; X and Y see one sphere zone.
        let zz = s.zones(Axis::Z);
        assert_eq!(zz.len(), 2);
        for z in zz {
            assert_eq!(z.chi, 1);
            assert_eq!(z.boundary_sides, 1);
            assert_eq!(z.genus(), Some(0));
        }
        let zx = s.zones(Axis::X);
        assert_eq!(zx.len(), 1);
        assert_eq!(zx[0].chi, 2);
        assert_eq!(zx[0].genus(), Some(0));
        for id in s.genus_identity() {
            assert!(id.holds);
        }
    }

    #[test]
    fn free_loop_next_to_others_is_rejected() {
        let mut specs = cube_structure().to_specs();
        specs.push(LoopSpec {
            id: 9,
            axis: Axis::Z,
            oriented: false,
            crossings: vec![],
        });
        match LoopStructure::build(0, specs) {
            Err(BuildError::UnanchoredLoop { loop_id: 9 }) => {}
            other => panic!("expected UnanchoredLoop, got {other:?}"),
        }
    }

    #[test]
    fn bad_crossing_multiplicities_are_rejected() {
        use Handedness::{Minus, Plus};
        let lp = |id, crossings: Vec<(u32, Handedness)>| LoopSpec {
            id,
            axis: Axis::X,
            oriented: false,
            crossings: crossings
                .into_iter()
                .map(|(crossing, handed)| CrossingRef { crossing, handed })
                .collect(),
        };
        match LoopStructure::build(0, vec![lp(0, vec![(7, Plus)])]) {
            Err(BuildError::DanglingCrossing { crossing: 7, count: 1 }) => {}
            other => panic!("{other:?}"),
        }
        match LoopStructure::build(0, vec![lp(0, vec![(7, Plus), (7, Minus)])]) {
            Err(BuildError::SelfCrossing { crossing: 7, loop_id: 0 }) => {}
            other => panic!("{other:?}"),
        }
        let two = vec![lp(0, vec![(7, Plus)]), lp(1, vec![(7, Plus)])];
        match LoopStructure::build(0, two) {
            Err(BuildError::InconsistentHandedness { crossing: 7 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn torus_pair_with_one_crossing() {
        use Handedness::{Minus, Plus};
        // Two loops crossing once only embed on the torus: chi = 1-2+1 = 0.
        let specs = vec![
            LoopSpec {
                id: 0,
                axis: Axis::X,
                oriented: false,
                crossings: vec![CrossingRef { crossing: 0, handed: Plus }],
            },
            LoopSpec {
                id: 1,
                axis: Axis::Y,
                oriented: false,
                crossings: vec![CrossingRef { crossing: 0, handed: Minus }],
            },
        ];
        assert!(matches!(
            LoopStructure::build(0, specs.clone()),
            Err(BuildError::GenusMismatch { .. })
        ));
        let s = LoopStructure::build(1, specs).unwrap();
        assert_eq!(s.regions().len(), 1);
        assert_eq!(s.regions()[0].boundary_len(), 4);
        assert_eq!(s.region_distinct_segments(0), 2);
    }

    #[test]
    fn flip_preserves_arrangement_and_round_trips() {
        let s = cube_structure();
        let f = s.with_loop_flipped(2).unwrap();
        assert_eq!(f.regions().len(), 8);
        let back = f.with_loop_flipped(2).unwrap();
        assert!(back.isomorphic(&s));
        // Flipping reverses the level-graph edge of the flipped loop's axis.
        let lg = s.level_graph(Axis::Z).unwrap();
        let lgf = f.level_graph(Axis::Z).unwrap();
        let zone_of = |g: &LevelGraph, s_: &LoopStructure| {
            let (_, map) = s_.region_zone_map(Axis::Z);
            let li = s_.loop_by_id(2).unwrap();
            (
                map[s_.loop_side_region(li, RelSide::Left)],
                g.edges.len(),
            )
        };
        assert_eq!(zone_of(&lg, &s).1, 1);
        assert_eq!(zone_of(&lgf, &f).1, 1);
    }

    #[test]
    fn doc_round_trip() {
        let s = cube_structure();
        let doc = s.to_doc();
        let json = serde_json::to_string_pretty(&doc).unwrap();
        let doc2: StructureDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, doc2);
        let s2 = LoopStructure::from_doc(doc2).unwrap();
        assert!(s.isomorphic(&s2));
    }

    #[test]
    fn isomorphism_respects_handedness() {
        let s = cube_structure();
        let f = s.with_loop_flipped(0).unwrap();
        // Same abstract arrangement, but traversal direction of loop 0
        // differs, so the directed encodings are not isomorphic.
        assert!(!s.isomorphic(&f));
    }
}
