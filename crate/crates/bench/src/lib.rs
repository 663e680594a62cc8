//! Shared fixtures for the criterion benchmarks.
//!
//! Sizes are chosen so a full `cargo bench` finishes in a few minutes on a
//! single core while still exercising every hot path at realistic density.

use maxfeec::{generate_unit_cube, generate_unit_square, get_problem, Mesh, ProblemSpec};

/// Standard 2D benchmark mesh: 8 x 8 unit square, 128 triangles.
pub fn square_mesh() -> Mesh {
    generate_unit_square(8)
}

/// Standard 3D benchmark mesh: 2 x 2 x 2 unit cube, 48 tetrahedra.
pub fn cube_mesh() -> Mesh {
    generate_unit_cube(2)
}

/// Homogeneous 2D cavity problem used for the stepping benchmarks.
pub fn square_problem() -> ProblemSpec {
    get_problem("example1").expect("built-in problem")
}

/// Homogeneous 3D cavity problem used for the stepping benchmarks.
pub fn cube_problem() -> ProblemSpec {
    get_problem("example2").expect("built-in problem")
}
