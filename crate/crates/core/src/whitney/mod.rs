//! Whitney-form local finite elements on simplices.
//!
//! Submodules:
//! - [`poly`]: polynomials in barycentric coordinates
//! - [`quadrature`]: Gauss rules on the unit segment/triangle/tetrahedron
//! - [`basis`]: local trimmed-form bases `P_r^- Lambda^k`, their degrees of
//!   freedom, and local exterior derivative matrices

pub mod basis;
pub mod poly;
pub mod quadrature;

pub use basis::{
    cell_basis, dof_layout, dofs_per_entity, eval_basis, local_exterior_derivative,
    reference_basis, space_dimension, CellGeometry, DofFunctional, DofKind, DofWeight, LocalBasis,
    LocalDof, PolyForm,
};
pub use poly::BaryPoly;
pub use quadrature::{gauss_legendre, quadrature_rule, QuadratureRule};
