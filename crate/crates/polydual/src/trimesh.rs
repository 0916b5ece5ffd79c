//! Triangle meshes: loading, topology checks, geometry queries, and the
//! generators used by tests and examples.
//!
//! Meshes must be closed, connected, orientable manifolds; the constructor
//! verifies all of it and derives the genus from the Euler characteristic.
//! Darts are directed triangle sides (dart `3t + i` runs from corner `i` to
//! corner `i + 1` of triangle `t`); an edge is a dart paired with its twin.

use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshLoadError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge {0}-{1} borders only one triangle; the mesh is not closed")]
    NotClosed(usize, usize),
    #[error("directed edge {0}-{1} appears twice; inconsistent winding or more than two triangles per edge")]
    NonManifold(usize, usize),
    #[error("vertex {0} is not surrounded by a single triangle fan")]
    NonManifoldVertex(usize),
    #[error("vertex {0} belongs to no triangle")]
    IsolatedVertex(usize),
    #[error("the triangles do not form one connected surface")]
    Disconnected,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A closed, connected, orientable manifold triangle mesh.
#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<[f64; 3]>,
    tris: Vec<[usize; 3]>,
    /// Opposite dart of each dart.
    twin: Vec<usize>,
    /// Undirected edge index of each dart.
    dart_edge: Vec<usize>,
    /// Per edge, the canonical dart (the lower-numbered of the pair).
    edge_dart: Vec<usize>,
}

pub fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let n = norm3(a);
    scale3(a, 1.0 / n)
}

impl TriMesh {
    pub fn new(positions: Vec<[f64; 3]>, tris: Vec<[usize; 3]>) -> Result<TriMesh, MeshLoadError> {
        let nd = 3 * tris.len();
        // Pair directed sides, as (from, to, dart) sorted by endpoints.
        let mut sides: Vec<(usize, usize, usize)> = Vec::with_capacity(nd);
        for (t, tri) in tris.iter().enumerate() {
            for i in 0..3 {
                sides.push((tri[i], tri[(i + 1) % 3], 3 * t + i));
            }
        }
        sides.sort_unstable();
        for w in sides.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(MeshLoadError::NonManifold(w[0].0, w[0].1));
            }
        }
        let mut twin = vec![usize::MAX; nd];
        for &(u, v, d) in &sides {
            match sides.binary_search_by(|p| (p.0, p.1).cmp(&(v, u))) {
                Ok(ix) => twin[d] = sides[ix].2,
                Err(_) => return Err(MeshLoadError::NotClosed(u, v)),
            }
        }
        let mut dart_edge = vec![usize::MAX; nd];
        let mut edge_dart = Vec::with_capacity(nd / 2);
        for d in 0..nd {
            if d < twin[d] {
                dart_edge[d] = edge_dart.len();
                dart_edge[twin[d]] = edge_dart.len();
                edge_dart.push(d);
            }
        }
        let mesh = TriMesh {
            positions,
            tris,
            twin,
            dart_edge,
            edge_dart,
        };
        mesh.verify_vertices()?;
        mesh.verify_connected()?;
        Ok(mesh)
    }

    fn verify_vertices(&self) -> Result<(), MeshLoadError> {
        // Every vertex must carry one full fan: walking twin-then-next
        // around the origin visits all incident darts.
        let nd = 3 * self.tris.len();
        let mut degree = vec![0usize; self.positions.len()];
        let mut some_dart = vec![usize::MAX; self.positions.len()];
        for d in 0..nd {
            let v = self.dart_origin(d);
            degree[v] += 1;
            some_dart[v] = d;
        }
        for v in 0..self.positions.len() {
            if degree[v] == 0 {
                return Err(MeshLoadError::IsolatedVertex(v));
            }
            let d0 = some_dart[v];
            let mut d = d0;
            let mut seen = 0;
            loop {
                seen += 1;
                // Next outgoing dart counterclockwise: previous side's twin.
                d = self.twin[3 * (d / 3) + (d + 2) % 3];
                if d == d0 || seen > degree[v] {
                    break;
                }
            }
            if seen != degree[v] {
                return Err(MeshLoadError::NonManifoldVertex(v));
            }
        }
        Ok(())
    }

    fn verify_connected(&self) -> Result<(), MeshLoadError> {
        let mut reach = vec![false; self.tris.len()];
        let mut stack = vec![0usize];
        reach[0] = true;
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let o = self.twin[3 * t + i] / 3;
                if !reach[o] {
                    reach[o] = true;
                    stack.push(o);
                }
            }
        }
        if reach.iter().all(|&r| r) {
            Ok(())
        } else {
            Err(MeshLoadError::Disconnected)
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn tris(&self) -> &[[usize; 3]] {
        &self.tris
    }

    pub fn edge_count(&self) -> usize {
        self.edge_dart.len()
    }

    pub fn genus(&self) -> u32 {
        let chi = self.positions.len() as i64 - self.edge_count() as i64 + self.tris.len() as i64;
        debug_assert!(chi <= 2 && chi % 2 == 0);
        ((2 - chi) / 2) as u32
    }

    pub fn dart_origin(&self, d: usize) -> usize {
        self.tris[d / 3][d % 3]
    }

    pub fn dart_head(&self, d: usize) -> usize {
        self.tris[d / 3][(d + 1) % 3]
    }

    pub fn dart_twin(&self, d: usize) -> usize {
        self.twin[d]
    }

    pub fn dart_edge(&self, d: usize) -> usize {
        self.dart_edge[d]
    }

    /// Canonical endpoints of an edge; parameters along the edge measure
    /// from `a` to `b`.
    pub fn edge_ends(&self, e: usize) -> (usize, usize) {
        let d = self.edge_dart[e];
        (self.dart_origin(d), self.dart_head(d))
    }

    /// The two triangles along an edge, canonical dart's first.
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        let d = self.edge_dart[e];
        [d / 3, self.twin[d] / 3]
    }

    pub fn face_edges(&self, t: usize) -> [usize; 3] {
        [
            self.dart_edge[3 * t],
            self.dart_edge[3 * t + 1],
            self.dart_edge[3 * t + 2],
        ]
    }

    /// The edge of triangle `t` shared with triangle `o`.
    pub fn shared_edge(&self, t: usize, o: usize) -> Option<usize> {
        self.face_edges(t)
            .into_iter()
            .find(|&e| self.edge_faces(e).contains(&o) && t != o)
    }

    /// The face adjacent to both edges, when they belong to one triangle.
    pub fn common_face(&self, e1: usize, e2: usize) -> Option<usize> {
        let [a, b] = self.edge_faces(e1);
        let [c, d] = self.edge_faces(e2);
        [a, b].into_iter().find(|&f| f == c || f == d)
    }

    pub fn point_on_edge(&self, e: usize, t: f64) -> [f64; 3] {
        let (a, b) = self.edge_ends(e);
        add3(scale3(self.positions[a], 1.0 - t), scale3(self.positions[b], t))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (a, b) = self.edge_ends(e);
        norm3(sub3(self.positions[b], self.positions[a]))
    }

    /// Unit outward normal under counterclockwise winding.
    pub fn face_normal(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.tris[t];
        normalize3(cross3(
            sub3(self.positions[b], self.positions[a]),
            sub3(self.positions[c], self.positions[a]),
        ))
    }

    pub fn face_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.tris[t];
        0.5 * norm3(cross3(
            sub3(self.positions[b], self.positions[a]),
            sub3(self.positions[c], self.positions[a]),
        ))
    }

    pub fn face_centroid(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.tris[t];
        scale3(
            add3(add3(self.positions[a], self.positions[b]), self.positions[c]),
            1.0 / 3.0,
        )
    }

    pub fn to_obj(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for p in &self.positions {
            writeln!(out, "v {} {} {}", p[0], p[1], p[2]).unwrap();
        }
        for t in &self.tris {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
        }
        out
    }
}

/// Parse an OBJ with triangular faces. Only `v` and `f` records matter;
/// normals, texture coordinates and grouping lines are skipped.
pub fn parse_obj(text: &str) -> Result<TriMesh, MeshLoadError> {
    let mut positions = Vec::new();
    let mut tris = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut coord = [0.0; 3];
                for c in &mut coord {
                    *c = it
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or(MeshLoadError::Parse {
                            line: ln + 1,
                            msg: "vertex needs three coordinates".into(),
                        })?;
                }
                positions.push(coord);
            }
            Some("f") => {
                let corners: Vec<usize> = it
                    .map(|w| {
                        let ix: i64 = w
                            .split('/')
                            .next()
                            .unwrap_or("")
                            .parse()
                            .map_err(|_| MeshLoadError::Parse {
                                line: ln + 1,
                                msg: format!("bad face corner {w:?}"),
                            })?;
                        let n = positions.len() as i64;
                        let ix = if ix < 0 { n + ix } else { ix - 1 };
                        if ix < 0 || ix >= n {
                            return Err(MeshLoadError::Parse {
                                line: ln + 1,
                                msg: format!("face corner {w:?} out of range"),
                            });
                        }
                        Ok(ix as usize)
                    })
                    .collect::<Result<_, _>>()?;
                if corners.len() != 3 {
                    return Err(MeshLoadError::Parse {
                        line: ln + 1,
                        msg: format!("face has {} corners, need 3", corners.len()),
                    });
                }
                tris.push([corners[0], corners[1], corners[2]]);
            }
            _ => {}
        }
    }
    TriMesh::new(positions, tris)
}

pub fn load_trimesh(path: &Path) -> Result<TriMesh, MeshLoadError> {
    parse_obj(&fs::read_to_string(path)?)
}

/// Axis-aligned unit cube surface with an n-by-n grid per face.
pub fn tri_cube(n: usize) -> TriMesh {
    assert!(n >= 1);
    let mut positions: Vec<[f64; 3]> = Vec::new();
    let mut index: Vec<([i64; 3], usize)> = Vec::new();
    let mut vertex = |p: [i64; 3], positions: &mut Vec<[f64; 3]>| -> usize {
        match index.binary_search_by_key(&p, |&(q, _)| q) {
            Ok(i) => index[i].1,
            Err(i) => {
                let id = positions.len();
                positions.push(p.map(|c| c as f64 / n as f64));
                index.insert(i, (p, id));
                id
            }
        }
    };
    let mut tris = Vec::new();
    let n = n as i64;
    // One face per axis and side; u and v are chosen so the triangles wind
    // counterclockwise seen from outside.
    for axis in 0..3 {
        for side in 0..2 {
            let w = side as i64 * n;
            for i in 0..n {
                for j in 0..n {
                    let at = |u: i64, v: i64| {
                        let mut p = [0i64; 3];
                        p[axis] = w;
                        p[(axis + 1) % 3] = u;
                        p[(axis + 2) % 3] = v;
                        p
                    };
                    let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                    let quad = if side == 1 {
                        [a, b, c, d]
                    } else {
                        [a, d, c, b]
                    };
                    let q: Vec<usize> = quad.iter().map(|&p| vertex(p, &mut positions)).collect();
                    tris.push([q[0], q[1], q[2]]);
                    tris.push([q[0], q[2], q[3]]);
                }
            }
        }
    }
    TriMesh::new(positions, tris).expect("generated cube is a closed manifold")
}

/// Unit icosphere: subdivided icosahedron re-projected onto the sphere.
pub fn icosphere(subdivisions: usize) -> TriMesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut positions: Vec<[f64; 3]> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize3)
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: Vec<((usize, usize), usize)> = Vec::new();
        let mut mid = |a: usize, b: usize, positions: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            match midpoint.binary_search_by_key(&key, |&(k, _)| k) {
                Ok(i) => midpoint[i].1,
                Err(i) => {
                    let id = positions.len();
                    positions.push(normalize3(scale3(add3(positions[a], positions[b]), 0.5)));
                    midpoint.insert(i, (key, id));
                    id
                }
            }
        };
        let mut next = Vec::with_capacity(4 * tris.len());
        for [a, b, c] in tris {
            let ab = mid(a, b, &mut positions);
            let bc = mid(b, c, &mut positions);
            let ca = mid(c, a, &mut positions);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    TriMesh::new(positions, tris).expect("generated icosphere is a closed manifold")
}

/// Torus around the z axis: `nu` segments around the hole, `nv` around the
/// tube, major radius `rr`, tube radius `r`.
pub fn torus(nu: usize, nv: usize, rr: f64, r: f64) -> TriMesh {
    assert!(nu >= 3 && nv >= 3);
    let mut positions = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            positions.push([
                (rr + r * v.cos()) * u.cos(),
                (rr + r * v.cos()) * u.sin(),
                r * v.sin(),
            ]);
        }
    }
    let mut tris = Vec::with_capacity(2 * nu * nv);
    let at = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    TriMesh::new(positions, tris).expect("generated torus is a closed manifold")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_meshes_have_the_right_genus() {
        assert_eq!(tri_cube(2).genus(), 0);
        let ico = icosphere(2);
        assert_eq!(ico.tris().len(), 320);
        assert_eq!(ico.genus(), 0);
        assert_eq!(torus(16, 8, 2.0, 0.6).genus(), 1);
    }

    #[test]
    fn obj_round_trip_preserves_the_mesh() {
        let m = icosphere(1);
        let again = parse_obj(&m.to_obj()).unwrap();
        assert_eq!(again.tris(), m.tris());
        assert_eq!(again.vertex_count(), m.vertex_count());
        assert_eq!(again.genus(), 0);
    }

    #[test]
    fn open_meshes_are_rejected() {
        // A single triangle has three open edges.
        let r = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        );
        assert!(matches!(r, Err(MeshLoadError::NotClosed(..))));
        // An open grid patch parses but fails the same invariant.
        let patch = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2 4 3\n";
        assert!(matches!(parse_obj(patch), Err(MeshLoadError::NotClosed(..))));
    }

    #[test]
    fn inconsistent_winding_is_rejected() {
        // Two tetrahedron faces flipped against each other.
        let r = TriMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            vec![[0, 2, 1], [0, 1, 3], [1, 3, 2], [0, 3, 2]],
        );
        assert!(matches!(r, Err(MeshLoadError::NonManifold(..))));
    }

    #[test]
    fn bad_obj_lines_are_reported() {
        assert!(matches!(
            parse_obj("v 0 0\n"),
            Err(MeshLoadError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_obj("v 0 0 0\nf 1 2 9\n"),
            Err(MeshLoadError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3 4\n"),
            Err(MeshLoadError::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn normals_point_outward() {
        let m = tri_cube(2);
        for t in 0..m.tris().len() {
            let n = m.face_normal(t);
            let c = m.face_centroid(t);
            // The cube is [0,1]^3 around centroid (.5,.5,.5); outward means
            // away from the center.
            assert!(dot3(n, sub3(c, [0.5, 0.5, 0.5])) > 0.0, "face {t}");
        }
        let ico = icosphere(1);
        for t in 0..ico.tris().len() {
            assert!(dot3(ico.face_normal(t), ico.face_centroid(t)) > 0.9);
        }
    }
}
