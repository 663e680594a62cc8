//! Local trimmed polynomial differential form spaces `P_r^- Lambda^k` on a
//! single simplex, with their degrees of freedom and exterior derivatives.
//!
//! Forms are stored through their scalar or vector proxies in physical
//! coordinates: 0-forms and top forms are scalars, 1-forms are vector
//! fields, and 2-forms in 3D are vector fields acting by flux. Every basis
//! is built directly on the physical cell: a spanning set of Whitney-type
//! generators is evaluated under the degree-of-freedom functionals and the
//! dual basis is recovered with a least-norm solve (the generator relations
//! are annihilated because the functionals are unisolvent on the span).
//!
//! All degrees of freedom are integrals over subsimplices oriented by
//! ascending vertex order, so a functional depends only on the subsimplex
//! itself and two cells sharing it induce the same global functional.

use super::poly::{BaryPoly, MAX_VARS};
use super::quadrature::{gauss_legendre, quadrature_rule};
use crate::mesh::simplex_subsets;
use nalgebra::DMatrix;

/// Quadrature degree used when applying degree-of-freedom functionals.
/// Exact for every polynomial integrand appearing with `r <= 2`; for
/// non-polynomial fields (boundary traces) the edge/face rules of this
/// degree leave errors far below the solver tolerances.
const FUNCTIONAL_QUAD_DEGREE: usize = 7;

/// Affine geometry of a single simplex in physical coordinates.
#[derive(Debug, Clone)]
pub struct CellGeometry {
    /// Simplex dimension (2 or 3).
    pub dim: usize,
    /// The `dim + 1` vertices (third coordinate zero in 2D).
    pub vertices: Vec<[f64; 3]>,
    /// Constant gradient of each barycentric coordinate.
    pub grad_lambda: Vec<[f64; 3]>,
    /// Measure of the simplex.
    pub volume: f64,
    /// Jacobian determinant magnitude of the reference map, `dim! * volume`.
    pub det_j: f64,
}

impl CellGeometry {
    /// Builds the geometry of the simplex with the given vertices.
    pub fn new(dim: usize, vertices: Vec<[f64; 3]>) -> Self {
        assert!(dim == 2 || dim == 3);
        assert_eq!(vertices.len(), dim + 1);
        let n = dim + 1;
        // Row j of `m` is (1, p_j); column i of its inverse holds the affine
        // coefficients of lambda_i.
        let mut m = DMatrix::zeros(n, n);
        for (j, p) in vertices.iter().enumerate() {
            m[(j, 0)] = 1.0;
            for d in 0..dim {
                m[(j, d + 1)] = p[d];
            }
        }
        let inv = m.lu().try_inverse().expect("degenerate simplex");
        let mut grad_lambda = vec![[0.0; 3]; n];
        for i in 0..n {
            for d in 0..dim {
                grad_lambda[i][d] = inv[(d + 1, i)];
            }
        }
        let e = |i: usize| {
            [
                vertices[i][0] - vertices[0][0],
                vertices[i][1] - vertices[0][1],
                vertices[i][2] - vertices[0][2],
            ]
        };
        let det = match dim {
            2 => {
                let (a, b) = (e(1), e(2));
                (a[0] * b[1] - a[1] * b[0]).abs()
            }
            _ => {
                let (a, b, c) = (e(1), e(2), e(3));
                dot(&a, &cross(&b, &c)).abs()
            }
        };
        let factorial: f64 = (1..=dim).map(|i| i as f64).product();
        CellGeometry { dim, vertices, grad_lambda, volume: det / factorial, det_j: det }
    }

    /// The reference simplex: origin plus the unit coordinate vectors.
    pub fn reference(dim: usize) -> Self {
        let mut vertices = vec![[0.0; 3]];
        for d in 0..dim {
            let mut p = [0.0; 3];
            p[d] = 1.0;
            vertices.push(p);
        }
        Self::new(dim, vertices)
    }

    /// Physical point with the given barycentric coordinates.
    pub fn point(&self, lam: &[f64]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (i, p) in self.vertices.iter().enumerate() {
            for d in 0..3 {
                x[d] += lam[i] * p[d];
            }
        }
        x
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A polynomial differential form given by its proxy components: one
/// `BaryPoly` for scalar proxies (0-forms and top forms), three for vector
/// proxies (1-forms, and 2-forms in 3D).
#[derive(Debug, Clone)]
pub struct PolyForm {
    /// Proxy components in physical axes.
    pub components: Vec<BaryPoly>,
}

impl PolyForm {
    /// The zero form with `ncomp` proxy components in `nvars` variables.
    pub fn zero(nvars: usize, ncomp: usize) -> Self {
        PolyForm { components: vec![BaryPoly::zero(nvars); ncomp] }
    }

    /// Adds `s * other` componentwise.
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        assert_eq!(self.components.len(), other.components.len());
        for (c, o) in self.components.iter_mut().zip(&other.components) {
            c.add_scaled(o, s);
        }
    }

    /// Evaluates the proxy at barycentric coordinates; scalars are returned
    /// in the first slot.
    pub fn eval(&self, lam: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, comp) in self.components.iter().enumerate() {
            out[c] = comp.eval(lam);
        }
        out
    }

    /// Exterior derivative of a k-form proxy: gradient, curl (scalar in 2D),
    /// or divergence.
    pub fn exterior_derivative(&self, geom: &CellGeometry, k: usize) -> PolyForm {
        let nv = geom.dim + 1;
        let g = &geom.grad_lambda;
        let partial = |poly: &BaryPoly, axis: usize| -> BaryPoly {
            let mut out = BaryPoly::zero(nv);
            for i in 0..nv {
                out.add_scaled(&poly.dlambda(i), g[i][axis]);
            }
            out
        };
        match (geom.dim, k) {
            (_, 0) => {
                let u = &self.components[0];
                let mut out = PolyForm::zero(nv, 3);
                for axis in 0..geom.dim {
                    out.components[axis] = partial(u, axis);
                }
                out
            }
            (2, 1) => {
                // Scalar curl d(u_x dx + u_y dy) = (dx u_y - dy u_x) dx^dy.
                let mut curl = partial(&self.components[1], 0);
                curl.add_scaled(&partial(&self.components[0], 1), -1.0);
                PolyForm { components: vec![curl] }
            }
            (3, 1) => {
                let mut out = PolyForm::zero(nv, 3);
                for axis in 0..3 {
                    let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
                    let mut c = partial(&self.components[b], a);
                    c.add_scaled(&partial(&self.components[a], b), -1.0);
                    out.components[axis] = c;
                }
                out
            }
            (3, 2) => {
                let mut div = BaryPoly::zero(nv);
                for axis in 0..3 {
                    div.add_scaled(&partial(&self.components[axis], axis), 1.0);
                }
                PolyForm { components: vec![div] }
            }
            _ => panic!("no exterior derivative for k = {k} in dimension {}", geom.dim),
        }
    }
}

/// Barycentric weight multiplying a moment functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofWeight {
    /// Constant weight 1.
    One,
    /// `lambda_{entity[j]} - lambda_{entity[0]}` for the stored `j`.
    LambdaDiff(usize),
}

impl DofWeight {
    fn eval(&self, entity: &[usize], lam: &[f64]) -> f64 {
        match *self {
            DofWeight::One => 1.0,
            DofWeight::LambdaDiff(j) => lam[entity[j]] - lam[entity[0]],
        }
    }
}

/// The integrand of a degree-of-freedom functional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DofKind {
    /// Point value at a vertex (0-forms).
    Value,
    /// Mean value over an edge (0-forms, r = 2).
    Average,
    /// Circulation along the ascending edge against a weight (1-forms).
    TangentMoment(DofWeight),
    /// Moment of `u . (p_entity[j] - p_entity[0])` over a triangle entity
    /// (1-form face/interior moments); stores `j`.
    VectorMoment(usize),
    /// Flux moment through a face against a weight, unit normal along
    /// `(p_b - p_a) x (p_c - p_a)` (2-forms in 3D).
    FluxMoment(DofWeight),
    /// Moment of a proxy component over the cell (2-forms in 3D, r = 2).
    AxisMoment(usize),
    /// Moment of the scalar proxy over the cell against a weight (top forms).
    ScalarMoment(DofWeight),
}

/// A degree-of-freedom functional attached to a subsimplex of the cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofFunctional {
    /// Local vertex indices of the subsimplex, ascending.
    pub entity: Vec<usize>,
    /// What the functional integrates.
    pub kind: DofKind,
}

impl DofFunctional {
    /// Applies the functional to a polynomial form on the cell.
    pub fn apply_poly(&self, geom: &CellGeometry, form: &PolyForm) -> f64 {
        self.apply_impl(geom, &mut |lam| form.eval(lam))
    }

    /// Applies the functional to a proxy field given in physical coordinates
    /// (scalar fields return their value in the first slot).
    pub fn apply_fn(&self, geom: &CellGeometry, f: &mut dyn FnMut(&[f64; 3]) -> [f64; 3]) -> f64 {
        self.apply_impl(geom, &mut |lam| f(&geom.point(lam)))
    }

    fn apply_impl(&self, geom: &CellGeometry, eval: &mut dyn FnMut(&[f64; 4]) -> [f64; 3]) -> f64 {
        let ent = &self.entity;
        let p = |i: usize| geom.vertices[ent[i]];
        match &self.kind {
            DofKind::Value => {
                let mut lam = [0.0; 4];
                lam[ent[0]] = 1.0;
                eval(&lam)[0]
            }
            DofKind::Average | DofKind::TangentMoment(_) => {
                let (a, b) = (p(0), p(1));
                let t = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let m = FUNCTIONAL_QUAD_DEGREE / 2 + 1;
                let (xs, ws) = gauss_legendre(m);
                let mut acc = 0.0;
                for (s, w) in xs.iter().zip(&ws) {
                    let mut lam = [0.0; 4];
                    lam[ent[0]] = 1.0 - s;
                    lam[ent[1]] = *s;
                    let u = eval(&lam);
                    acc += w * match &self.kind {
                        DofKind::Average => u[0],
                        DofKind::TangentMoment(wt) => dot(&u, &t) * wt.eval(ent, &lam),
                        _ => unreachable!(),
                    };
                }
                acc
            }
            DofKind::VectorMoment(j) => {
                let c = {
                    let (a, b) = (p(0), p(*j));
                    [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
                };
                self.triangle_entity_integral(geom, eval, &mut |u, _| dot(u, &c))
            }
            DofKind::FluxMoment(wt) => {
                let (a, b, c) = (p(0), p(1), p(2));
                let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let n = cross(&e1, &e2);
                let len = dot(&n, &n).sqrt();
                let nhat = [n[0] / len, n[1] / len, n[2] / len];
                let wt = *wt;
                let ent2 = ent.clone();
                self.triangle_entity_integral(geom, eval, &mut |u, lam| {
                    dot(u, &nhat) * wt.eval(&ent2, lam)
                })
            }
            DofKind::AxisMoment(axis) => {
                let rule = quadrature_rule(geom.dim, FUNCTIONAL_QUAD_DEGREE);
                let mut acc = 0.0;
                for (pt, w) in rule.points.iter().zip(&rule.weights) {
                    acc += w * geom.det_j * eval(pt)[*axis];
                }
                acc
            }
            DofKind::ScalarMoment(wt) => {
                let rule = quadrature_rule(geom.dim, FUNCTIONAL_QUAD_DEGREE);
                let mut acc = 0.0;
                for (pt, w) in rule.points.iter().zip(&rule.weights) {
                    acc += w * geom.det_j * eval(pt)[0] * wt.eval(ent, pt);
                }
                acc
            }
        }
    }

    /// Physical-measure integral over the triangle entity (a face in 3D or
    /// the whole cell in 2D) of `f(u, lam)`.
    fn triangle_entity_integral(
        &self,
        geom: &CellGeometry,
        eval: &mut dyn FnMut(&[f64; 4]) -> [f64; 3],
        f: &mut dyn FnMut(&[f64; 3], &[f64; 4]) -> f64,
    ) -> f64 {
        let ent = &self.entity;
        let p = |i: usize| geom.vertices[ent[i]];
        let (a, b, c) = (p(0), p(1), p(2));
        let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = cross(&e1, &e2);
        let area = 0.5 * dot(&n, &n).sqrt();
        let rule = quadrature_rule(2, FUNCTIONAL_QUAD_DEGREE);
        let mut acc = 0.0;
        for (pt, w) in rule.points.iter().zip(&rule.weights) {
            let mut lam = [0.0; 4];
            for i in 0..3 {
                lam[ent[i]] = pt[i];
            }
            let u = eval(&lam);
            // Reference-triangle weights sum to 1/2; scale to physical area.
            acc += 2.0 * area * w * f(&u, &lam);
        }
        acc
    }
}

/// A degree of freedom with its position in the local entity layout.
#[derive(Debug, Clone)]
pub struct LocalDof {
    /// Dimension of the subsimplex carrying the DOF.
    pub entity_dim: usize,
    /// Index of the subsimplex within `simplex_subsets(dim, entity_dim)`.
    pub entity_index: usize,
    /// Position among the DOFs sharing this entity.
    pub slot: usize,
    /// The functional itself.
    pub functional: DofFunctional,
}

/// The local basis of `P_r^- Lambda^k` on one cell, dual to its DOFs.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    /// Spatial dimension.
    pub dim: usize,
    /// Form degree.
    pub k: usize,
    /// Polynomial order (1 or 2).
    pub r: usize,
    /// Degrees of freedom, grouped by entity dimension then entity index.
    pub dofs: Vec<LocalDof>,
    /// Basis forms, `forms[i]` dual to `dofs[i]`.
    pub forms: Vec<PolyForm>,
}

impl LocalBasis {
    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    /// True if the basis is empty (never the case for valid inputs).
    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// Dimension of `P_r^- Lambda^k` on a `dim`-simplex.
pub fn space_dimension(dim: usize, k: usize, r: usize) -> usize {
    binomial(r + k - 1, k) * binomial(dim + r, dim - k)
}

/// Number of DOFs per subsimplex of each dimension, indexed 0..=dim.
pub fn dofs_per_entity(dim: usize, k: usize, r: usize) -> Vec<usize> {
    assert!(r == 1 || r == 2, "order must be 1 or 2");
    assert!(k <= dim);
    let mut c = vec![0usize; dim + 1];
    if k == 0 {
        c[0] = 1;
        if r == 2 {
            c[1] = 1;
        }
    } else if k == dim {
        c[dim] = if r == 1 { 1 } else { dim + 1 };
    } else if k == 1 {
        c[1] = r;
        if r == 2 {
            c[2] = 2;
        }
    } else if k == 2 && dim == 3 {
        c[2] = if r == 1 { 1 } else { 3 };
        if r == 2 {
            c[3] = 3;
        }
    } else {
        panic!("unsupported space: dim {dim}, k {k}");
    }
    c
}

fn make_functional(dim: usize, k: usize, entity: &[usize], slot: usize) -> DofFunctional {
    let m = entity.len() - 1;
    let kind = if k == 0 {
        match m {
            0 => DofKind::Value,
            _ => DofKind::Average,
        }
    } else if k == dim {
        if slot == 0 {
            DofKind::ScalarMoment(DofWeight::One)
        } else {
            DofKind::ScalarMoment(DofWeight::LambdaDiff(slot))
        }
    } else if k == 1 {
        match m {
            1 => DofKind::TangentMoment(if slot == 0 {
                DofWeight::One
            } else {
                DofWeight::LambdaDiff(1)
            }),
            _ => DofKind::VectorMoment(slot + 1),
        }
    } else {
        // k = 2, dim = 3
        match m {
            2 => DofKind::FluxMoment(if slot == 0 {
                DofWeight::One
            } else {
                DofWeight::LambdaDiff(slot)
            }),
            _ => DofKind::AxisMoment(slot),
        }
    };
    DofFunctional { entity: entity.to_vec(), kind }
}

/// The DOF layout of `P_r^- Lambda^k`: entities by ascending dimension, then
/// lexicographic entity order, then slot.
pub fn dof_layout(dim: usize, k: usize, r: usize) -> Vec<LocalDof> {
    let counts = dofs_per_entity(dim, k, r);
    let mut out = Vec::new();
    for (m, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        for (ei, entity) in simplex_subsets(dim, m).iter().enumerate() {
            for slot in 0..count {
                out.push(LocalDof {
                    entity_dim: m,
                    entity_index: ei,
                    slot,
                    functional: make_functional(dim, k, entity, slot),
                });
            }
        }
    }
    debug_assert_eq!(out.len(), space_dimension(dim, k, r));
    out
}

/// All exponent tuples over `nv` variables with the given total, in
/// lexicographic order.
fn monomial_exponents(nv: usize, total: usize) -> Vec<[u8; MAX_VARS]> {
    let mut out = Vec::new();
    let mut cur = [0u8; MAX_VARS];
    fn rec(slot: usize, nv: usize, left: u8, cur: &mut [u8; MAX_VARS], out: &mut Vec<[u8; MAX_VARS]>) {
        if slot == nv - 1 {
            cur[slot] = left;
            out.push(*cur);
            cur[slot] = 0;
            return;
        }
        for e in 0..=left {
            cur[slot] = e;
            rec(slot + 1, nv, left - e, cur, out);
        }
        cur[slot] = 0;
    }
    rec(0, nv, total as u8, &mut cur, &mut out);
    out
}

/// Whitney-type spanning set of `P_r^- Lambda^k` on the cell.
fn generators(geom: &CellGeometry, k: usize, r: usize) -> Vec<PolyForm> {
    let d = geom.dim;
    let nv = d + 1;
    let g = &geom.grad_lambda;
    let scalar_monomials = |total: usize| -> Vec<PolyForm> {
        monomial_exponents(nv, total)
            .into_iter()
            .map(|e| PolyForm { components: vec![BaryPoly::monomial(nv, e, 1.0)] })
            .collect()
    };
    if k == 0 {
        return scalar_monomials(r);
    }
    if k == d {
        return scalar_monomials(r - 1);
    }
    let betas = monomial_exponents(nv, r - 1);
    let mut out = Vec::new();
    if k == 1 {
        for pair in simplex_subsets(d, 1) {
            let (i, j) = (pair[0], pair[1]);
            // Whitney edge form W_ij = lambda_i grad lambda_j - lambda_j grad lambda_i.
            let mut w = PolyForm::zero(nv, 3);
            for axis in 0..3 {
                let mut c = BaryPoly::lambda(nv, i).scaled(g[j][axis]);
                c.add_scaled(&BaryPoly::lambda(nv, j), -g[i][axis]);
                w.components[axis] = c;
            }
            for beta in &betas {
                let mono = BaryPoly::monomial(nv, *beta, 1.0);
                let mut form = PolyForm::zero(nv, 3);
                for axis in 0..3 {
                    form.components[axis] = mono.mul(&w.components[axis]);
                }
                out.push(form);
            }
        }
    } else {
        // k = 2, d = 3: Whitney face forms
        // W_ijk = 2 (l_i gj x gk + l_j gk x gi + l_k gi x gj).
        for triple in simplex_subsets(d, 2) {
            let (i, j, kk) = (triple[0], triple[1], triple[2]);
            let (a, b, c) = (cross(&g[j], &g[kk]), cross(&g[kk], &g[i]), cross(&g[i], &g[j]));
            let mut w = PolyForm::zero(nv, 3);
            for axis in 0..3 {
                let mut comp = BaryPoly::lambda(nv, i).scaled(2.0 * a[axis]);
                comp.add_scaled(&BaryPoly::lambda(nv, j), 2.0 * b[axis]);
                comp.add_scaled(&BaryPoly::lambda(nv, kk), 2.0 * c[axis]);
                w.components[axis] = comp;
            }
            for beta in &betas {
                let mono = BaryPoly::monomial(nv, *beta, 1.0);
                let mut form = PolyForm::zero(nv, 3);
                for axis in 0..3 {
                    form.components[axis] = mono.mul(&w.components[axis]);
                }
                out.push(form);
            }
        }
    }
    out
}

/// Builds the basis of `P_r^- Lambda^k` on the given cell, dual to the DOFs
/// of [`dof_layout`].
pub fn cell_basis(geom: &CellGeometry, k: usize, r: usize) -> LocalBasis {
    let dofs = dof_layout(geom.dim, k, r);
    let gens = generators(geom, k, r);
    let nd = dofs.len();
    let ng = gens.len();
    assert!(ng >= nd);
    let mut v = DMatrix::zeros(nd, ng);
    for (fi, dof) in dofs.iter().enumerate() {
        for (gi, gen) in gens.iter().enumerate() {
            v[(fi, gi)] = dof.functional.apply_poly(geom, gen);
        }
    }
    // Row-equilibrated least-norm solve of V X = I. Unisolvence makes every
    // solution represent the same dual basis functions.
    let mut scale = vec![0.0f64; nd];
    for fi in 0..nd {
        let norm = v.row(fi).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm > 0.0, "zero DOF row for dim {}, k {k}, r {r}", geom.dim);
        scale[fi] = 1.0 / norm;
        for gi in 0..ng {
            v[(fi, gi)] *= scale[fi];
        }
    }
    let vvt = &v * v.transpose();
    let y = vvt
        .lu()
        .solve(&DMatrix::identity(nd, nd))
        .expect("degrees of freedom are not unisolvent");
    let x = v.transpose() * y;

    let ncomp = if k == 0 || k == geom.dim { 1 } else { 3 };
    let nvars = geom.dim + 1;
    let mut forms = vec![PolyForm::zero(nvars, ncomp); nd];
    for fi in 0..nd {
        for gi in 0..ng {
            let c = x[(gi, fi)] * scale[fi];
            if c != 0.0 {
                forms[fi].add_scaled(&gens[gi], c);
            }
        }
    }
    LocalBasis { dim: geom.dim, k, r, dofs, forms }
}

/// The basis on the reference simplex.
pub fn reference_basis(dim: usize, k: usize, r: usize) -> LocalBasis {
    cell_basis(&CellGeometry::reference(dim), k, r)
}

/// Evaluates every basis form at the given barycentric point.
pub fn eval_basis(basis: &LocalBasis, lam: &[f64; 4]) -> Vec<[f64; 3]> {
    basis.forms.iter().map(|f| f.eval(lam)).collect()
}

/// Matrix of the exterior derivative from `P_r^- Lambda^k` to
/// `P_r^- Lambda^{k+1}` in the DOF bases: column i holds the (k+1)-DOF
/// coefficients of the derivative of the i-th k-basis function.
pub fn local_exterior_derivative(geom: &CellGeometry, k: usize, r: usize) -> DMatrix<f64> {
    let from = cell_basis(geom, k, r);
    let to_dofs = dof_layout(geom.dim, k + 1, r);
    let mut d = DMatrix::zeros(to_dofs.len(), from.len());
    for (i, form) in from.forms.iter().enumerate() {
        let df = form.exterior_derivative(geom, k);
        for (j, dof) in to_dofs.iter().enumerate() {
            d[(j, i)] = dof.functional.apply_poly(geom, &df);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skewed_geometry(dim: usize) -> CellGeometry {
        match dim {
            2 => CellGeometry::new(
                2,
                vec![[0.1, 0.2, 0.0], [1.3, 0.15, 0.0], [0.4, 1.7, 0.0]],
            ),
            _ => CellGeometry::new(
                3,
                vec![
                    [0.0, 0.0, 0.05],
                    [1.1, 0.1, 0.2],
                    [0.2, 1.2, 0.1],
                    [0.3, 0.25, 1.4],
                ],
            ),
        }
    }

    fn all_spaces() -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for dim in [2, 3] {
            for k in 0..=dim {
                for r in [1, 2] {
                    out.push((dim, k, r));
                }
            }
        }
        out
    }

    #[test]
    fn space_dimensions() {
        let expected = [
            ((2, 0, 1), 3),
            ((2, 0, 2), 6),
            ((2, 1, 1), 3),
            ((2, 1, 2), 8),
            ((2, 2, 1), 1),
            ((2, 2, 2), 3),
            ((3, 0, 1), 4),
            ((3, 0, 2), 10),
            ((3, 1, 1), 6),
            ((3, 1, 2), 20),
            ((3, 2, 1), 4),
            ((3, 2, 2), 15),
            ((3, 3, 1), 1),
            ((3, 3, 2), 4),
        ];
        for ((dim, k, r), n) in expected {
            assert_eq!(space_dimension(dim, k, r), n, "dim {dim} k {k} r {r}");
            assert_eq!(dof_layout(dim, k, r).len(), n, "dim {dim} k {k} r {r}");
        }
    }

    /// Duality of basis and DOFs, on the reference and a skewed cell.
    #[test]
    fn unisolvence() {
        for (dim, k, r) in all_spaces() {
            for geom in [CellGeometry::reference(dim), skewed_geometry(dim)] {
                let basis = cell_basis(&geom, k, r);
                for (i, dof) in basis.dofs.iter().enumerate() {
                    for (j, form) in basis.forms.iter().enumerate() {
                        let v = dof.functional.apply_poly(&geom, form);
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (v - expect).abs() < 1e-10,
                            "dim {dim} k {k} r {r}: F_{i}(phi_{j}) = {v}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lowest_order_edge_basis_is_whitney() {
        // On the reference triangle the basis function of edge (0,1) is
        // W_01 = l0 grad l1 - l1 grad l0 = (1 - y, x).
        let geom = CellGeometry::reference(2);
        let basis = cell_basis(&geom, 1, 1);
        for lam in [[0.2, 0.5, 0.3, 0.0], [0.6, 0.1, 0.3, 0.0]] {
            let v = basis.forms[0].eval(&lam);
            let (x, y) = (lam[1], lam[2]);
            assert!((v[0] - (1.0 - y)).abs() < 1e-12);
            assert!((v[1] - x).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_of_unity_for_vertex_basis() {
        for dim in [2, 3] {
            let geom = skewed_geometry(dim);
            let basis = cell_basis(&geom, 0, 1);
            let lam = if dim == 2 { [0.3, 0.45, 0.25, 0.0] } else { [0.3, 0.25, 0.2, 0.25] };
            let sum: f64 = eval_basis(&basis, &lam).iter().map(|v| v[0]).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn whitney_face_form_flux_and_divergence() {
        // On the reference tetrahedron the form dual to the flux through face
        // (1,2,3) is W_123 = 2(x, y, z), whose divergence is 6.
        let geom = CellGeometry::reference(3);
        let basis = cell_basis(&geom, 2, 1);
        let dof_123 = basis
            .dofs
            .iter()
            .position(|d| d.functional.entity == vec![1, 2, 3])
            .unwrap();
        let lam = [0.1, 0.3, 0.4, 0.2];
        let v = basis.forms[dof_123].eval(&lam);
        for axis in 0..3 {
            assert!((v[axis] - 2.0 * lam[axis + 1]).abs() < 1e-11);
        }
        let div = basis.forms[dof_123].exterior_derivative(&geom, 2);
        assert!((div.components[0].eval(&lam) - 6.0).abs() < 1e-10);
    }

    #[test]
    fn curl_of_whitney_edge_form() {
        // curl W_ij = 2 grad l_i x grad l_j, constant.
        let geom = skewed_geometry(3);
        let basis = cell_basis(&geom, 1, 1);
        for (e, pair) in simplex_subsets(3, 1).iter().enumerate() {
            let (i, j) = (pair[0], pair[1]);
            let curl = basis.forms[e].exterior_derivative(&geom, 1);
            let expect = cross(&geom.grad_lambda[i], &geom.grad_lambda[j]);
            let v = curl.eval(&[0.4, 0.3, 0.2, 0.1]);
            for axis in 0..3 {
                assert!((v[axis] - 2.0 * expect[axis]).abs() < 1e-10);
            }
        }
    }

    /// Full polynomial vector fields of degree r - 1 (and degree r scalars
    /// for 0-forms) lie in the trimmed space: interpolating them through the
    /// DOFs reproduces them exactly.
    #[test]
    fn interpolation_reproduces_contained_polynomials() {
        for (dim, k, r) in all_spaces() {
            let geom = skewed_geometry(dim);
            let basis = cell_basis(&geom, k, r);
            let scalar = k == 0 || k == dim;
            // A fixed polynomial field of the largest fully contained degree:
            // degree r for 0-forms, r - 1 otherwise.
            let deg = if k == 0 { r } else { r - 1 };
            let field = |x: &[f64; 3]| -> [f64; 3] {
                let poly = |a: f64, b: f64, c: f64| {
                    let lin = 0.7 + 0.3 * x[0] - 0.8 * x[1] + 0.5 * x[2] + a;
                    match deg {
                        0 => a + 1.0,
                        1 => lin,
                        _ => lin + b * x[0] * x[1] - c * x[2] * x[0] + 0.4 * x[1] * x[1],
                    }
                };
                if scalar {
                    [poly(0.1, 0.6, 0.2), 0.0, 0.0]
                } else {
                    [poly(0.1, 0.6, 0.2), poly(-0.4, 0.3, 0.8), poly(0.9, -0.5, 0.1)]
                }
            };
            let coeffs: Vec<f64> = basis
                .dofs
                .iter()
                .map(|d| d.functional.apply_fn(&geom, &mut |x| field(x)))
                .collect();
            for lam in [[0.5, 0.2, 0.2, 0.1], [0.1, 0.4, 0.3, 0.2]] {
                let lam = if dim == 2 {
                    [lam[0] + lam[3], lam[1], lam[2], 0.0]
                } else {
                    lam
                };
                let x = geom.point(&lam);
                let expect = field(&x);
                let mut got = [0.0; 3];
                for (c, form) in coeffs.iter().zip(&basis.forms) {
                    let v = form.eval(&lam);
                    for axis in 0..3 {
                        got[axis] += c * v[axis];
                    }
                }
                // Vector proxies have no third component in 2D.
                let ncomp = if scalar { 1 } else { dim };
                for axis in 0..ncomp {
                    assert!(
                        (got[axis] - expect[axis]).abs() < 1e-10,
                        "dim {dim} k {k} r {r} axis {axis}: {} vs {}",
                        got[axis],
                        expect[axis]
                    );
                }
            }
        }
    }

    #[test]
    fn exterior_derivative_squares_to_zero() {
        for dim in [2, 3] {
            for r in [1, 2] {
                let geom = skewed_geometry(dim);
                for k in 0..dim - 1 {
                    let d1 = local_exterior_derivative(&geom, k + 1, r);
                    let d0 = local_exterior_derivative(&geom, k, r);
                    let prod = d1 * d0;
                    assert!(
                        prod.iter().all(|x| x.abs() < 1e-12),
                        "d compose d != 0 for dim {dim} k {k} r {r}"
                    );
                }
            }
        }
    }

    #[test]
    fn lowest_order_gradient_matrix_is_incidence() {
        let geom = skewed_geometry(2);
        let d0 = local_exterior_derivative(&geom, 0, 1);
        let edges = simplex_subsets(2, 1);
        for (e, pair) in edges.iter().enumerate() {
            for v in 0..3 {
                let expect = if v == pair[1] {
                    1.0
                } else if v == pair[0] {
                    -1.0
                } else {
                    0.0
                };
                assert!((d0[(e, v)] - expect).abs() < 1e-12);
            }
        }
    }
}
