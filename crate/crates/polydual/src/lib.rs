//! Dual loop structures for polycubes: representation and validation of loop
//! arrangements on closed surfaces, editing by loop insertion and removal,
//! canonical orientation, primalization to quad meshes, and embedding on
//! triangle meshes.

pub mod edit;
pub mod embed;
pub mod evolve;
pub mod orient;
pub mod polycube;
pub mod segment;
pub mod trimesh;
pub mod voxel;
pub mod structure;
pub mod validate;

pub use structure::{
    Axis, BuildError, CrossingRef, Handedness, LoopSpec, LoopStructure, RelSide, Side,
    StructureDoc,
};
