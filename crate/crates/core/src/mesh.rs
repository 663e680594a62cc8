//! Simplicial meshes of the unit square and unit cube, their skeletons,
//! and a plain-text file format.
//!
//! Cells are stored with ascending vertex indices, and every k-subsimplex is
//! identified by its ascending vertex tuple. Because the local subsimplices
//! of an ascending cell are taken in lexicographic order, local and global
//! orientations always agree and no orientation signs are needed anywhere.
//!
//! The mesh file format is line-oriented text. `#` starts a comment. The
//! first three numbers are `dim num_vertices num_cells`, followed by
//! `num_vertices` lines of `dim` coordinates and `num_cells` lines of
//! `dim + 1` vertex indices.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// All (k+1)-element subsets of {0, ..., d} in lexicographic order.
///
/// This is the canonical local ordering of the k-subsimplices of a
/// d-simplex, shared by the mesh skeletons and the local bases.
pub fn simplex_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    assert!(k <= d);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k + 1);
    fn rec(start: usize, d: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in start..=d {
            cur.push(v);
            rec(v + 1, d, size, cur, out);
            cur.pop();
        }
    }
    rec(0, d, k + 1, &mut cur, &mut out);
    out
}

/// The k-simplices of a mesh together with cell incidence and boundary flags.
#[derive(Debug, Clone)]
pub struct Skeleton {
    /// Ascending vertex tuples, sorted lexicographically.
    pub simplices: Vec<Vec<usize>>,
    /// `cell_subsimplices[c][j]`: global index of the j-th local k-subsimplex
    /// of cell `c` (local order given by [`simplex_subsets`]).
    pub cell_subsimplices: Vec<Vec<usize>>,
    /// True for simplices contained in the domain boundary.
    pub on_boundary: Vec<bool>,
}

impl Skeleton {
    /// Number of k-simplices.
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    /// True if the skeleton holds no simplices.
    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }
}

/// A conforming simplicial mesh in 2D (triangles) or 3D (tetrahedra).
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    cells: Vec<Vec<usize>>,
    skeletons: Vec<Skeleton>,
}

impl Mesh {
    /// Builds a mesh from vertices and cells, sorting each cell ascending
    /// and deriving all skeletons and boundary flags.
    pub fn new(dim: usize, vertices: Vec<[f64; 3]>, mut cells: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::MeshData(format!("dimension must be 2 or 3, got {dim}")));
        }
        if vertices.is_empty() || cells.is_empty() {
            return Err(Error::MeshData("mesh must have vertices and cells".into()));
        }
        let nv = vertices.len();
        let mut referenced = vec![false; nv];
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.len() != dim + 1 {
                return Err(Error::MeshData(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.len(),
                    dim + 1
                )));
            }
            cell.sort_unstable();
            if cell.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::MeshData(format!("cell {c} has repeated vertices")));
            }
            for &v in cell.iter() {
                if v >= nv {
                    return Err(Error::MeshData(format!(
                        "cell {c} references vertex {v}, but there are only {nv} vertices"
                    )));
                }
                referenced[v] = true;
            }
        }
        if let Some(v) = referenced.iter().position(|&r| !r) {
            return Err(Error::MeshData(format!("vertex {v} is not used by any cell")));
        }

        let mut mesh = Mesh { dim, vertices, cells, skeletons: Vec::new() };
        for c in 0..mesh.cells.len() {
            if mesh.cell_volume(c) <= 0.0 {
                return Err(Error::MeshData(format!("cell {c} is degenerate")));
            }
        }
        mesh.build_skeletons();
        Ok(mesh)
    }

    fn build_skeletons(&mut self) {
        let dim = self.dim;
        let mut skeletons = Vec::with_capacity(dim + 1);
        for k in 0..=dim {
            let subsets = simplex_subsets(dim, k);
            let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
            if k == 0 {
                for v in 0..self.vertices.len() {
                    set.insert(vec![v]);
                }
            } else {
                for cell in &self.cells {
                    for sub in &subsets {
                        set.insert(sub.iter().map(|&s| cell[s]).collect());
                    }
                }
            }
            let simplices: Vec<Vec<usize>> = set.into_iter().collect();
            let index: BTreeMap<&[usize], usize> =
                simplices.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
            let cell_subsimplices: Vec<Vec<usize>> = self
                .cells
                .iter()
                .map(|cell| {
                    subsets
                        .iter()
                        .map(|sub| {
                            let tuple: Vec<usize> = sub.iter().map(|&s| cell[s]).collect();
                            index[tuple.as_slice()]
                        })
                        .collect()
                })
                .collect();
            let on_boundary = vec![false; simplices.len()];
            skeletons.push(Skeleton { simplices, cell_subsimplices, on_boundary });
        }

        // A facet is on the boundary iff it belongs to exactly one cell; every
        // subsimplex of a boundary facet is then also on the boundary.
        let mut facet_count = vec![0usize; skeletons[dim - 1].len()];
        for subs in &skeletons[dim - 1].cell_subsimplices {
            for &f in subs {
                facet_count[f] += 1;
            }
        }
        for (f, &count) in facet_count.iter().enumerate() {
            if count == 1 {
                skeletons[dim - 1].on_boundary[f] = true;
            }
        }
        let boundary_facets: Vec<Vec<usize>> = skeletons[dim - 1]
            .simplices
            .iter()
            .zip(&skeletons[dim - 1].on_boundary)
            .filter(|(_, &b)| b)
            .map(|(s, _)| s.clone())
            .collect();
        for k in 0..dim - 1 {
            let mut marks = Vec::new();
            {
                let index: BTreeMap<&[usize], usize> = skeletons[k]
                    .simplices
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.as_slice(), i))
                    .collect();
                let subsets = simplex_subsets(dim - 1, k);
                for facet in &boundary_facets {
                    for sub in &subsets {
                        let tuple: Vec<usize> = sub.iter().map(|&s| facet[s]).collect();
                        marks.push(index[tuple.as_slice()]);
                    }
                }
            }
            for i in marks {
                skeletons[k].on_boundary[i] = true;
            }
        }
        self.skeletons = skeletons;
    }

    /// Spatial dimension (2 or 3).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vertices.
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of top-dimensional cells.
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Number of k-simplices.
    pub fn num_simplices(&self, k: usize) -> usize {
        self.skeletons[k].len()
    }

    /// Coordinates of vertex `v` (third entry zero in 2D).
    pub fn vertex(&self, v: usize) -> [f64; 3] {
        self.vertices[v]
    }

    /// Ascending vertex indices of cell `c`.
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    /// The k-skeleton.
    pub fn skeleton(&self, k: usize) -> &Skeleton {
        &self.skeletons[k]
    }

    /// Vertex coordinates of cell `c` in ascending-index order.
    pub fn cell_coords(&self, c: usize) -> Vec<[f64; 3]> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Measure (area or volume) of cell `c`.
    pub fn cell_volume(&self, c: usize) -> f64 {
        let p: Vec<[f64; 3]> = self.cell_coords(c);
        let e = |i: usize, j: usize| {
            [p[i][0] - p[0][0], p[i][1] - p[0][1], p[i][2] - p[0][2]][j]
        };
        match self.dim {
            2 => 0.5 * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)).abs(),
            3 => {
                let det = e(1, 0) * (e(2, 1) * e(3, 2) - e(2, 2) * e(3, 1))
                    - e(1, 1) * (e(2, 0) * e(3, 2) - e(2, 2) * e(3, 0))
                    + e(1, 2) * (e(2, 0) * e(3, 1) - e(2, 1) * e(3, 0));
                det.abs() / 6.0
            }
            _ => unreachable!(),
        }
    }

    /// Largest cell diameter (the mesh size h).
    pub fn max_diameter(&self) -> f64 {
        let mut h: f64 = 0.0;
        for cell in &self.cells {
            for i in 0..cell.len() {
                for j in i + 1..cell.len() {
                    let a = self.vertices[cell[i]];
                    let b = self.vertices[cell[j]];
                    let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
                    h = h.max(d2.sqrt());
                }
            }
        }
        h
    }

    /// Euler characteristic `sum_k (-1)^k N_k`; 1 for a mesh of a box.
    pub fn euler_characteristic(&self) -> i64 {
        let mut chi = 0i64;
        for k in 0..=self.dim {
            let n = self.num_simplices(k) as i64;
            chi += if k % 2 == 0 { n } else { -n };
        }
        chi
    }
}

/// Uniform triangulation of the unit square with `n` squares per side, each
/// split along the diagonal from its lower-left to upper-right corner.
pub fn generate_unit_square(n: usize) -> Mesh {
    assert!(n >= 1);
    let nv = n + 1;
    let v = |i: usize, j: usize| j * nv + i;
    let mut vertices = Vec::with_capacity(nv * nv);
    for j in 0..nv {
        for i in 0..nv {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64, 0.0]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            cells.push(vec![v(i, j), v(i, j + 1), v(i + 1, j + 1)]);
        }
    }
    Mesh::new(2, vertices, cells).expect("generated square mesh is valid")
}

/// Uniform tetrahedralization of the unit cube with `n` cubes per side, each
/// split into six tetrahedra sharing the main diagonal (Kuhn split).
pub fn generate_unit_cube(n: usize) -> Mesh {
    assert!(n >= 1);
    let nv = n + 1;
    let v = |i: usize, j: usize, k: usize| (k * nv + j) * nv + i;
    let mut vertices = Vec::with_capacity(nv * nv * nv);
    for k in 0..nv {
        for j in 0..nv {
            for i in 0..nv {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in &PERMS {
                    let mut p = [i, j, k];
                    let mut tet = vec![v(p[0], p[1], p[2])];
                    for &axis in perm {
                        p[axis] += 1;
                        tet.push(v(p[0], p[1], p[2]));
                    }
                    cells.push(tet);
                }
            }
        }
    }
    Mesh::new(3, vertices, cells).expect("generated cube mesh is valid")
}

/// Reads a mesh from the plain-text format described in the module docs.
pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    let tokens: Vec<&str> = text
        .lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(|line| line.split_whitespace())
        .collect();
    let mut pos = 0usize;
    let mut next = |what: &str| -> Result<&str> {
        let t = tokens
            .get(pos)
            .ok_or_else(|| Error::MeshFormat(format!("unexpected end of file, expected {what}")))?;
        pos += 1;
        Ok(t)
    };
    let parse_usize = |t: &str, what: &str| -> Result<usize> {
        t.parse()
            .map_err(|_| Error::MeshFormat(format!("invalid {what}: {t:?}")))
    };
    let parse_f64 = |t: &str, what: &str| -> Result<f64> {
        t.parse()
            .map_err(|_| Error::MeshFormat(format!("invalid {what}: {t:?}")))
    };

    let dim = parse_usize(next("dimension")?, "dimension")?;
    if dim != 2 && dim != 3 {
        return Err(Error::MeshFormat(format!("dimension must be 2 or 3, got {dim}")));
    }
    let nv = parse_usize(next("vertex count")?, "vertex count")?;
    let nc = parse_usize(next("cell count")?, "cell count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut p = [0.0f64; 3];
        for coord in p.iter_mut().take(dim) {
            *coord = parse_f64(next("coordinate")?, "coordinate")?;
        }
        vertices.push(p);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let mut cell = Vec::with_capacity(dim + 1);
        for _ in 0..=dim {
            cell.push(parse_usize(next("vertex index")?, "vertex index")?);
        }
        cells.push(cell);
    }
    if pos != tokens.len() {
        return Err(Error::MeshFormat(format!(
            "{} trailing tokens after mesh data",
            tokens.len() - pos
        )));
    }
    Mesh::new(dim, vertices, cells)
}

/// Writes a mesh in the plain-text format described in the module docs.
pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "# dim num_vertices num_cells");
    let _ = writeln!(out, "{} {} {}", mesh.dim(), mesh.num_vertices(), mesh.num_cells());
    for v in 0..mesh.num_vertices() {
        let p = mesh.vertex(v);
        for d in 0..mesh.dim() {
            if d > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", p[d]);
        }
        out.push('\n');
    }
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let strs: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", strs.join(" "));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(simplex_subsets(2, 1), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(
            simplex_subsets(3, 2),
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
        assert_eq!(simplex_subsets(3, 0).len(), 4);
        assert_eq!(simplex_subsets(3, 3), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn square_counts() {
        for (n, nv, ne, nt) in [(1, 4, 5, 2), (3, 16, 33, 18), (30, 961, 2760, 1800)] {
            let mesh = generate_unit_square(n);
            assert_eq!(mesh.num_vertices(), nv, "n = {n}");
            assert_eq!(mesh.num_simplices(1), ne, "n = {n}");
            assert_eq!(mesh.num_cells(), nt, "n = {n}");
            assert_eq!(mesh.euler_characteristic(), 1, "n = {n}");
        }
    }

    #[test]
    fn cube_counts() {
        for (n, nv, ne, nf, nt) in [(1, 8, 19, 18, 6), (3, 64, 279, 378, 162)] {
            let mesh = generate_unit_cube(n);
            assert_eq!(mesh.num_vertices(), nv, "n = {n}");
            assert_eq!(mesh.num_simplices(1), ne, "n = {n}");
            assert_eq!(mesh.num_simplices(2), nf, "n = {n}");
            assert_eq!(mesh.num_cells(), nt, "n = {n}");
            assert_eq!(mesh.euler_characteristic(), 1, "n = {n}");
        }
    }

    #[test]
    fn boundary_counts() {
        let sq = generate_unit_square(3);
        let bdry_edges = sq.skeleton(1).on_boundary.iter().filter(|&&b| b).count();
        let bdry_verts = sq.skeleton(0).on_boundary.iter().filter(|&&b| b).count();
        assert_eq!(bdry_edges, 12);
        assert_eq!(bdry_verts, 12);
        assert!(sq.skeleton(2).on_boundary.iter().all(|&b| !b));

        let cube = generate_unit_cube(3);
        let bdry_faces = cube.skeleton(2).on_boundary.iter().filter(|&&b| b).count();
        let bdry_verts = cube.skeleton(0).on_boundary.iter().filter(|&&b| b).count();
        assert_eq!(bdry_faces, 108);
        assert_eq!(bdry_verts, 64 - 8);
    }

    #[test]
    fn volumes_fill_the_box() {
        let sq = generate_unit_square(4);
        let area: f64 = (0..sq.num_cells()).map(|c| sq.cell_volume(c)).sum();
        assert!((area - 1.0).abs() < 1e-13);
        assert!((sq.max_diameter() - 2f64.sqrt() / 4.0).abs() < 1e-13);

        let cube = generate_unit_cube(2);
        let vol: f64 = (0..cube.num_cells()).map(|c| cube.cell_volume(c)).sum();
        assert!((vol - 1.0).abs() < 1e-13);
        assert!((cube.max_diameter() - 3f64.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn cells_ascending_and_subsimplices_consistent() {
        let mesh = generate_unit_cube(2);
        for c in 0..mesh.num_cells() {
            let cell = mesh.cell(c);
            assert!(cell.windows(2).all(|w| w[0] < w[1]));
            for k in 0..=3 {
                let subsets = simplex_subsets(3, k);
                let skel = mesh.skeleton(k);
                for (j, sub) in subsets.iter().enumerate() {
                    let tuple: Vec<usize> = sub.iter().map(|&s| cell[s]).collect();
                    let g = skel.cell_subsimplices[c][j];
                    assert_eq!(skel.simplices[g], tuple);
                }
            }
        }
    }

    #[test]
    fn interior_facets_shared_by_two_cells() {
        for mesh in [generate_unit_square(3), generate_unit_cube(2)] {
            let k = mesh.dim() - 1;
            let mut count = vec![0usize; mesh.num_simplices(k)];
            for subs in &mesh.skeleton(k).cell_subsimplices {
                for &f in subs {
                    count[f] += 1;
                }
            }
            for (f, &c) in count.iter().enumerate() {
                let expected = if mesh.skeleton(k).on_boundary[f] { 1 } else { 2 };
                assert_eq!(c, expected, "facet {f}");
            }
        }
    }

    #[test]
    fn roundtrip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        for mesh in [generate_unit_square(3), generate_unit_cube(2)] {
            let path = dir.path().join("mesh.txt");
            write_mesh(&mesh, &path).unwrap();
            let back = read_mesh(&path).unwrap();
            assert_eq!(back.dim(), mesh.dim());
            assert_eq!(back.num_vertices(), mesh.num_vertices());
            assert_eq!(back.num_cells(), mesh.num_cells());
            for v in 0..mesh.num_vertices() {
                assert_eq!(back.vertex(v), mesh.vertex(v));
            }
            for c in 0..mesh.num_cells() {
                assert_eq!(back.cell(c), mesh.cell(c));
            }
        }
    }

    #[test]
    fn read_rejects_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        // Vertex index out of range.
        std::fs::write(&path, "2 3 1\n0 0\n1 0\n0 1\n0 1 9\n").unwrap();
        assert!(read_mesh(&path).is_err());
        // Degenerate cell.
        std::fs::write(&path, "2 3 1\n0 0\n1 0\n0 1\n0 1 1\n").unwrap();
        assert!(read_mesh(&path).is_err());
        // Truncated file.
        std::fs::write(&path, "2 3 1\n0 0\n1 0\n").unwrap();
        assert!(read_mesh(&path).is_err());
        // Trailing garbage.
        std::fs::write(&path, "2 3 1\n0 0\n1 0\n0 1\n0 1 2\n7\n").unwrap();
        assert!(read_mesh(&path).is_err());
        // Comments and odd whitespace are fine.
        std::fs::write(&path, "# mesh\n 2 3 1 # header\n0 0\n1 0\n0 1 # last\n0 1 2\n").unwrap();
        assert!(read_mesh(&path).is_ok());
    }
}
