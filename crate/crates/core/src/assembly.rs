//! Global degree-of-freedom maps and finite element assembly.
//!
//! Global DOFs are grouped by entity dimension (vertices, then edges, then
//! faces, then cells), by entity index within each skeleton, and by slot
//! within each entity, mirroring the local layout of
//! [`crate::whitney::dof_layout`]. Since both orderings follow ascending
//! vertex tuples, a local DOF and its global counterpart always represent
//! the same functional and assembly needs no orientation corrections.

use crate::error::Result;
use crate::linalg::{Factorization, SparseMatrix};
use crate::mesh::Mesh;
use crate::whitney::{
    cell_basis, dof_layout, dofs_per_entity, quadrature_rule, CellGeometry, LocalBasis, LocalDof,
    QuadratureRule,
};

/// Quadrature degree used for all assembly and projection integrals with
/// order-r elements; exact for products of two local basis functions, with
/// margin for the coupling terms.
pub fn assembly_quad_degree(r: usize) -> usize {
    2 * r + 2
}

/// Map between local and global degrees of freedom for one form space.
#[derive(Debug, Clone)]
pub struct DofMap {
    /// Form degree.
    pub k: usize,
    /// Polynomial order.
    pub r: usize,
    /// Total number of global DOFs.
    pub total_dofs: usize,
    /// `cell_dofs[c][i]`: global index of local DOF i on cell c.
    pub cell_dofs: Vec<Vec<usize>>,
    /// The local DOF layout shared by every cell.
    pub layout: Vec<LocalDof>,
    /// True for DOFs attached to boundary entities.
    pub is_boundary: Vec<bool>,
    /// Sorted global indices of boundary DOFs.
    pub boundary_dofs: Vec<usize>,
    /// Sorted global indices of interior DOFs.
    pub interior_dofs: Vec<usize>,
    /// For each boundary DOF: one (cell, local index) that carries it.
    pub boundary_rep: Vec<(usize, usize)>,
}

/// Builds the DOF map of `P_r^- Lambda^k` over the mesh.
pub fn build_dof_map(mesh: &Mesh, k: usize, r: usize) -> DofMap {
    let dim = mesh.dim();
    let counts = dofs_per_entity(dim, k, r);
    let mut offsets = vec![0usize; dim + 2];
    for m in 0..=dim {
        offsets[m + 1] = offsets[m] + counts[m] * mesh.num_simplices(m);
    }
    let total_dofs = offsets[dim + 1];
    let layout = dof_layout(dim, k, r);

    let cell_dofs: Vec<Vec<usize>> = (0..mesh.num_cells())
        .map(|c| {
            layout
                .iter()
                .map(|ld| {
                    let ent = mesh.skeleton(ld.entity_dim).cell_subsimplices[c][ld.entity_index];
                    offsets[ld.entity_dim] + ent * counts[ld.entity_dim] + ld.slot
                })
                .collect()
        })
        .collect();

    let mut is_boundary = vec![false; total_dofs];
    for m in 0..=dim {
        if counts[m] == 0 {
            continue;
        }
        for (e, &b) in mesh.skeleton(m).on_boundary.iter().enumerate() {
            if b {
                for slot in 0..counts[m] {
                    is_boundary[offsets[m] + e * counts[m] + slot] = true;
                }
            }
        }
    }
    let boundary_dofs: Vec<usize> = (0..total_dofs).filter(|&i| is_boundary[i]).collect();
    let interior_dofs: Vec<usize> = (0..total_dofs).filter(|&i| !is_boundary[i]).collect();

    let mut pos = vec![usize::MAX; total_dofs];
    for (bi, &d) in boundary_dofs.iter().enumerate() {
        pos[d] = bi;
    }
    let mut boundary_rep = vec![(usize::MAX, usize::MAX); boundary_dofs.len()];
    for (c, dofs) in cell_dofs.iter().enumerate() {
        for (li, &gd) in dofs.iter().enumerate() {
            let bi = pos[gd];
            if bi != usize::MAX && boundary_rep[bi].0 == usize::MAX {
                boundary_rep[bi] = (c, li);
            }
        }
    }

    DofMap {
        k,
        r,
        total_dofs,
        cell_dofs,
        layout,
        is_boundary,
        boundary_dofs,
        interior_dofs,
        boundary_rep,
    }
}

/// Geometry of one mesh cell.
pub fn cell_geometry(mesh: &Mesh, c: usize) -> CellGeometry {
    CellGeometry::new(mesh.dim(), mesh.cell_coords(c))
}

/// Proxy values of every basis form at every quadrature point.
fn tabulate_values(basis: &LocalBasis, rule: &QuadratureRule) -> Vec<Vec<[f64; 3]>> {
    basis
        .forms
        .iter()
        .map(|f| rule.points.iter().map(|pt| f.eval(pt)).collect())
        .collect()
}

/// Proxy values of the exterior derivative of every basis form.
fn tabulate_derivatives(
    geom: &CellGeometry,
    basis: &LocalBasis,
    rule: &QuadratureRule,
) -> Vec<Vec<[f64; 3]>> {
    basis
        .forms
        .iter()
        .map(|f| {
            let df = f.exterior_derivative(geom, basis.k);
            rule.points.iter().map(|pt| df.eval(pt)).collect()
        })
        .collect()
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Assembles the mass matrix of `P_r^- Lambda^k` scaled by a constant weight.
pub fn assemble_mass(mesh: &Mesh, k: usize, r: usize, weight: f64) -> SparseMatrix {
    let map = build_dof_map(mesh, k, r);
    assemble_mass_with(mesh, &map, weight)
}

fn assemble_mass_with(mesh: &Mesh, map: &DofMap, weight: f64) -> SparseMatrix {
    let rule = quadrature_rule(mesh.dim(), assembly_quad_degree(map.r));
    let mut triplets = Vec::new();
    for c in 0..mesh.num_cells() {
        let geom = cell_geometry(mesh, c);
        let basis = cell_basis(&geom, map.k, map.r);
        let vals = tabulate_values(&basis, &rule);
        let dofs = &map.cell_dofs[c];
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let mut acc = 0.0;
                for (q, w) in rule.weights.iter().enumerate() {
                    acc += w * dot3(&vals[i][q], &vals[j][q]);
                }
                triplets.push((dofs[i], dofs[j], weight * geom.det_j * acc));
            }
        }
    }
    SparseMatrix::from_triplets(map.total_dofs, map.total_dofs, &triplets)
}

/// Assembles `G[i, j] = integral of phi1_i . grad phi0_j` (rows: 1-forms,
/// columns: 0-forms).
pub fn assemble_grad_coupling(mesh: &Mesh, r: usize) -> SparseMatrix {
    let map0 = build_dof_map(mesh, 0, r);
    let map1 = build_dof_map(mesh, 1, r);
    coupling(mesh, &map1, &map0, 1.0, CouplingKind::RowAgainstColDerivative)
}

/// Assembles `C[i, j] = eps * integral of grad phi0_i . phi1_j` (rows:
/// 0-forms, columns: 1-forms), the adjoint-shaped divergence coupling.
pub fn assemble_grad_adjoint(mesh: &Mesh, r: usize, eps: f64) -> SparseMatrix {
    let map0 = build_dof_map(mesh, 0, r);
    let map1 = build_dof_map(mesh, 1, r);
    coupling(mesh, &map0, &map1, eps, CouplingKind::RowDerivativeAgainstCol)
}

/// Assembles `K[i, j] = integral of phi2_i . curl phi1_j` (rows: 2-forms,
/// columns: 1-forms; the scalar curl in 2D).
pub fn assemble_curl_coupling(mesh: &Mesh, r: usize) -> SparseMatrix {
    let map1 = build_dof_map(mesh, 1, r);
    let map2 = build_dof_map(mesh, 2, r);
    coupling(mesh, &map2, &map1, 1.0, CouplingKind::RowAgainstColDerivative)
}

enum CouplingKind {
    /// `integral of phi_i . d(psi_j)`: rows plain, columns differentiated.
    RowAgainstColDerivative,
    /// `integral of d(phi_i) . psi_j`: rows differentiated, columns plain.
    RowDerivativeAgainstCol,
}

fn coupling(
    mesh: &Mesh,
    rows: &DofMap,
    cols: &DofMap,
    weight: f64,
    kind: CouplingKind,
) -> SparseMatrix {
    let rule = quadrature_rule(mesh.dim(), assembly_quad_degree(rows.r.max(cols.r)));
    let mut triplets = Vec::new();
    for c in 0..mesh.num_cells() {
        let geom = cell_geometry(mesh, c);
        let row_basis = cell_basis(&geom, rows.k, rows.r);
        let col_basis = cell_basis(&geom, cols.k, cols.r);
        let (row_vals, col_vals) = match kind {
            CouplingKind::RowAgainstColDerivative => (
                tabulate_values(&row_basis, &rule),
                tabulate_derivatives(&geom, &col_basis, &rule),
            ),
            CouplingKind::RowDerivativeAgainstCol => (
                tabulate_derivatives(&geom, &row_basis, &rule),
                tabulate_values(&col_basis, &rule),
            ),
        };
        for (i, rv) in row_vals.iter().enumerate() {
            for (j, cv) in col_vals.iter().enumerate() {
                let mut acc = 0.0;
                for (q, w) in rule.weights.iter().enumerate() {
                    acc += w * dot3(&rv[q], &cv[q]);
                }
                triplets.push((
                    rows.cell_dofs[c][i],
                    cols.cell_dofs[c][j],
                    weight * geom.det_j * acc,
                ));
            }
        }
    }
    SparseMatrix::from_triplets(rows.total_dofs, cols.total_dofs, &triplets)
}

/// Assembles the global exterior derivative from k-forms to (k+1)-forms in
/// the DOF bases. Shared entities receive identical coefficients from every
/// adjacent cell; this is asserted during assembly.
pub fn global_derivative(mesh: &Mesh, k: usize, r: usize) -> SparseMatrix {
    use crate::whitney::local_exterior_derivative;
    use std::collections::HashMap;
    let from = build_dof_map(mesh, k, r);
    let to = build_dof_map(mesh, k + 1, r);
    let mut entries: HashMap<(usize, usize), f64> = HashMap::new();
    for c in 0..mesh.num_cells() {
        let geom = cell_geometry(mesh, c);
        let d = local_exterior_derivative(&geom, k, r);
        for li in 0..from.layout.len() {
            for lj in 0..to.layout.len() {
                let v = d[(lj, li)];
                let key = (to.cell_dofs[c][lj], from.cell_dofs[c][li]);
                if let Some(prev) = entries.insert(key, v) {
                    assert!(
                        (prev - v).abs() <= 1e-8 * (1.0 + v.abs()),
                        "inconsistent derivative entry at {key:?}: {prev} vs {v}"
                    );
                }
            }
        }
    }
    let triplets: Vec<(usize, usize, f64)> =
        entries.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    SparseMatrix::from_triplets(to.total_dofs, from.total_dofs, &triplets)
}

/// Load vector `b_i = integral of field . phi_i` for a proxy field given in
/// physical coordinates (scalar proxies read the first component).
pub fn load_vector(
    mesh: &Mesh,
    map: &DofMap,
    field: &dyn Fn(&[f64; 3]) -> [f64; 3],
) -> Vec<f64> {
    let rule = quadrature_rule(mesh.dim(), assembly_quad_degree(map.r));
    let mut b = vec![0.0; map.total_dofs];
    for c in 0..mesh.num_cells() {
        let geom = cell_geometry(mesh, c);
        let basis = cell_basis(&geom, map.k, map.r);
        let vals = tabulate_values(&basis, &rule);
        let fx: Vec<[f64; 3]> = rule.points.iter().map(|pt| field(&geom.point(pt))).collect();
        for (i, vi) in vals.iter().enumerate() {
            let mut acc = 0.0;
            for (q, w) in rule.weights.iter().enumerate() {
                acc += w * dot3(&vi[q], &fx[q]);
            }
            b[map.cell_dofs[c][i]] += geom.det_j * acc;
        }
    }
    b
}

/// L2 projection of a field onto `P_r^- Lambda^k`, without boundary
/// conditions.
pub fn l2_project(
    mesh: &Mesh,
    map: &DofMap,
    field: &dyn Fn(&[f64; 3]) -> [f64; 3],
) -> Result<Vec<f64>> {
    let mass = assemble_mass_with(mesh, map, 1.0);
    let b = load_vector(mesh, map, field);
    Factorization::new(&mass)?.solve(&b)
}

/// L2 projection with the boundary DOFs pinned to the given values
/// (parallel to `map.boundary_dofs`); interior coefficients are L2-optimal
/// subject to that constraint. Produces admissible initial data: an
/// unconstrained projection of a zero-trace field still carries small
/// nonzero boundary coefficients, which a first time step would snap to the
/// exact traces at the cost of a spurious one-time energy jump.
pub fn l2_project_with_boundary(
    mesh: &Mesh,
    map: &DofMap,
    field: &dyn Fn(&[f64; 3]) -> [f64; 3],
    boundary: &[f64],
) -> Result<Vec<f64>> {
    assert_eq!(boundary.len(), map.boundary_dofs.len());
    let mass = assemble_mass_with(mesh, map, 1.0);
    let b = load_vector(mesh, map, field);
    let m_ii = mass.submatrix(&map.interior_dofs, &map.interior_dofs);
    let m_ib = mass.submatrix(&map.interior_dofs, &map.boundary_dofs);
    let mut rhs: Vec<f64> = map.interior_dofs.iter().map(|&g| b[g]).collect();
    m_ib.gaxpy(boundary, -1.0, &mut rhs);
    let x = Factorization::new(&m_ii)?.solve(&rhs)?;
    let mut out = vec![0.0; map.total_dofs];
    for (j, &g) in map.interior_dofs.iter().enumerate() {
        out[g] = x[j];
    }
    for (j, &g) in map.boundary_dofs.iter().enumerate() {
        out[g] = boundary[j];
    }
    Ok(out)
}

/// Applies each boundary DOF functional to the field; returns values
/// parallel to `map.boundary_dofs`.
pub fn boundary_values(
    mesh: &Mesh,
    map: &DofMap,
    field: &dyn Fn(&[f64; 3]) -> [f64; 3],
) -> Vec<f64> {
    map.boundary_rep
        .iter()
        .map(|&(c, li)| {
            let geom = cell_geometry(mesh, c);
            map.layout[li].functional.apply_fn(&geom, &mut |x| field(x))
        })
        .collect()
}

/// Reconstructs the proxy value of a coefficient vector on one cell; scalar
/// proxies return their value in the first slot. Intended for tests and
/// error integration, not for hot loops.
pub fn eval_field_on_cell(
    mesh: &Mesh,
    map: &DofMap,
    coeffs: &[f64],
    c: usize,
    lam: &[f64; 4],
) -> [f64; 3] {
    let geom = cell_geometry(mesh, c);
    let basis = cell_basis(&geom, map.k, map.r);
    let mut out = [0.0; 3];
    for (i, form) in basis.forms.iter().enumerate() {
        let v = form.eval(lam);
        let coef = coeffs[map.cell_dofs[c][i]];
        for axis in 0..3 {
            out[axis] += coef * v[axis];
        }
    }
    out
}

/// Everything the time steppers need: the DOF maps of the three unknowns and
/// the constant matrices of the spatial discretization.
pub struct SystemMatrices {
    /// DOF map of p (0-forms).
    pub dof0: DofMap,
    /// DOF map of E (1-forms).
    pub dof1: DofMap,
    /// DOF map of H (2-forms).
    pub dof2: DofMap,
    /// Unweighted 0-form mass matrix (the p-row time derivative).
    pub m0: SparseMatrix,
    /// 0-form mass weighted by 1/eps (the conserved p-norm).
    pub m0_inv_eps: SparseMatrix,
    /// 1-form mass weighted by eps.
    pub m1_eps: SparseMatrix,
    /// 2-form mass weighted by mu.
    pub m2_mu: SparseMatrix,
    /// `G[i, j] = integral of phi1_i . grad phi0_j`.
    pub grad: SparseMatrix,
    /// `C[i, j] = eps * integral of grad phi0_i . phi1_j`.
    pub grad_adjoint: SparseMatrix,
    /// `K[i, j] = integral of phi2_i . curl phi1_j`.
    pub curl: SparseMatrix,
    /// Material constants.
    pub eps: f64,
    /// See `eps`.
    pub mu: f64,
}

impl SystemMatrices {
    /// Sizes of the (p, E, H) blocks.
    pub fn block_sizes(&self) -> [usize; 3] {
        [self.dof0.total_dofs, self.dof1.total_dofs, self.dof2.total_dofs]
    }
}

/// Assembles all system matrices in one pass over the cells.
pub fn assemble_system(mesh: &Mesh, r: usize, eps: f64, mu: f64) -> SystemMatrices {
    let dof0 = build_dof_map(mesh, 0, r);
    let dof1 = build_dof_map(mesh, 1, r);
    let dof2 = build_dof_map(mesh, 2, r);
    let rule = quadrature_rule(mesh.dim(), assembly_quad_degree(r));

    let mut t_m0 = Vec::new();
    let mut t_m1 = Vec::new();
    let mut t_m2 = Vec::new();
    let mut t_g = Vec::new();
    let mut t_c = Vec::new();
    let mut t_k = Vec::new();
    for c in 0..mesh.num_cells() {
        let geom = cell_geometry(mesh, c);
        let basis0 = cell_basis(&geom, 0, r);
        let basis1 = cell_basis(&geom, 1, r);
        let basis2 = cell_basis(&geom, 2, r);
        let v0 = tabulate_values(&basis0, &rule);
        let v1 = tabulate_values(&basis1, &rule);
        let v2 = tabulate_values(&basis2, &rule);
        let g0 = tabulate_derivatives(&geom, &basis0, &rule);
        let c1 = tabulate_derivatives(&geom, &basis1, &rule);
        let quad = |a: &Vec<[f64; 3]>, b: &Vec<[f64; 3]>| -> f64 {
            let mut acc = 0.0;
            for (q, w) in rule.weights.iter().enumerate() {
                acc += w * dot3(&a[q], &b[q]);
            }
            acc * geom.det_j
        };
        let (d0, d1, d2) = (&dof0.cell_dofs[c], &dof1.cell_dofs[c], &dof2.cell_dofs[c]);
        for i in 0..basis0.len() {
            for j in 0..basis0.len() {
                t_m0.push((d0[i], d0[j], quad(&v0[i], &v0[j])));
            }
            for j in 0..basis1.len() {
                t_c.push((d0[i], d1[j], eps * quad(&g0[i], &v1[j])));
            }
        }
        for i in 0..basis1.len() {
            for j in 0..basis1.len() {
                t_m1.push((d1[i], d1[j], eps * quad(&v1[i], &v1[j])));
            }
            for j in 0..basis0.len() {
                t_g.push((d1[i], d0[j], quad(&v1[i], &g0[j])));
            }
        }
        for i in 0..basis2.len() {
            for j in 0..basis2.len() {
                t_m2.push((d2[i], d2[j], mu * quad(&v2[i], &v2[j])));
            }
            for j in 0..basis1.len() {
                t_k.push((d2[i], d1[j], quad(&v2[i], &c1[j])));
            }
        }
    }
    let (n0, n1, n2) = (dof0.total_dofs, dof1.total_dofs, dof2.total_dofs);
    let m0 = SparseMatrix::from_triplets(n0, n0, &t_m0);
    let m0_inv_eps = m0.scaled(1.0 / eps);
    SystemMatrices {
        m0,
        m0_inv_eps,
        m1_eps: SparseMatrix::from_triplets(n1, n1, &t_m1),
        m2_mu: SparseMatrix::from_triplets(n2, n2, &t_m2),
        grad: SparseMatrix::from_triplets(n1, n0, &t_g),
        grad_adjoint: SparseMatrix::from_triplets(n0, n1, &t_c),
        curl: SparseMatrix::from_triplets(n2, n1, &t_k),
        dof0,
        dof1,
        dof2,
        eps,
        mu,
    }
}
