// temporary debug probe
use polydual::embed::embed_structure;
use polydual::structure::cube_structure;
use polydual::trimesh::{icosphere, torus, tri_cube};
use polydual::voxel::{extract_dual, voxel_to_polycube, VoxelSolid};

fn main() {
    let s = cube_structure();
    println!("== cube on tri_cube(4)");
    let r = embed_structure(&s, &tri_cube(4));
    println!("embed: {:?}", r.as_ref().err());

    println!("== cube on icosphere(2)");
    let sphere = icosphere(2);
    // Pole vertex fan.
    let vp = (0..sphere.positions().len())
        .min_by(|&a, &b| {
            let da = 1.0 - sphere.positions()[a][2];
            let db = 1.0 - sphere.positions()[b][2];
            da.total_cmp(&db)
        })
        .unwrap();
    println!("pole vertex {vp} at {:?}", sphere.positions()[vp]);
    for (f, t) in sphere.tris().iter().enumerate() {
        if t.contains(&vp) {
            let edges: Vec<usize> = sphere.face_edges(f).to_vec();
            let named: Vec<(usize, (usize, usize))> =
                edges.iter().map(|&e| (e, sphere.edge_ends(e))).collect();
            println!("fan face {f}: verts {t:?} edges {named:?}");
        }
    }
    let r = embed_structure(&s, &sphere);
    println!("embed: {:?}", r.as_ref().err());

    println!("== frame on torus(28,14)");
    let cells: Vec<[i32; 3]> = (0..3)
        .flat_map(|x| (0..3).map(move |y| [x, y, 0]))
        .filter(|&[x, y, _]| !(x == 1 && y == 1))
        .collect();
    let solid = VoxelSolid::new(cells.iter().copied());
    let f = extract_dual(&voxel_to_polycube(&solid).unwrap());
    let r = embed_structure(&f, &torus(28, 14, 2.0, 0.7));
    println!("embed: {:?}", r.as_ref().err());
}
