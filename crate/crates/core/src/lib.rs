//! Finite element exterior calculus (FEEC) solver for the mixed (p, E, H)
//! formulation of Maxwell's equations.
//!
//! The library discretizes the first-order system
//!
//! ```text
//!   dp/dt + div(eps E)            = f_p
//!   grad p + eps dE/dt - curl H   = f_E
//!   mu dH/dt + curl E             = f_H
//! ```
//!
//! on the unit square (2D) or unit cube (3D) with essential boundary
//! conditions `p = 0`, `E x n = 0`, `H . n = 0` (or their nonhomogeneous
//! traces), using trimmed polynomial differential forms (Whitney forms) of
//! order `r` in {1, 2}: `p` as a 0-form, `E` as a 1-form, and `H` as a
//! 2-form. Three implicit one-solve-per-step integrators are provided:
//! Crank-Nicholson and an implicit leapfrog, both of which conserve the
//! discrete energy `||p||^2_{1/eps} + ||E||^2_eps + ||H||^2_mu` exactly in
//! exact arithmetic, and a dissipative backward Euler control scheme.
//!
//! Module map:
//! - [`mesh`]: simplicial meshes, skeletons, generators, text file I/O
//! - [`whitney`]: local bases, degrees of freedom, simplex quadrature
//! - [`assembly`]: DOF maps, mass/coupling matrices, projections, traces
//! - [`linalg`]: CSR sparse matrices, block composition, sparse LU
//! - [`problems`]: the six analytic benchmark problems
//! - [`system`]: the three time steppers and the simulation driver
//! - [`analysis`]: discrete energy, error norms, convergence orders

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod system;
pub mod whitney;

pub use assembly::{assemble_system, build_dof_map, DofMap, SystemMatrices};
pub use error::Error;
pub use linalg::{block_compose, Factorization, SparseMatrix};
pub use analysis::{
    discrete_energy, discrete_energy_parts, error_norms, estimate_order, EnergySample,
    EnergyTrace, ErrorReport,
};
pub use mesh::{generate_unit_cube, generate_unit_square, read_mesh, write_mesh, Mesh};
pub use problems::{exact_energy, get_problem, manufactured_problem, problem_ids, ProblemSpec};
pub use system::{run_simulation, FieldState, Scheme, SchemeConfig, Simulation};
