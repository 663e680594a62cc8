//! Legacy ASCII VTK export of the final state, one sample per cell.

use maxfeec::assembly::eval_field_on_cell;
use maxfeec::{build_dof_map, FieldState, Mesh, ProblemSpec};

/// Renders the final (p, E, H) state as an unstructured-grid VTK file with
/// per-cell values sampled at the barycenters. In 2D, H is the scalar proxy
/// of a 2-form and is written as a scalar field.
pub fn final_state(mesh: &Mesh, r: usize, prob: &ProblemSpec, state: &FieldState) -> String {
    let dim = mesh.dim();
    let (nv, nc) = (mesh.num_vertices(), mesh.num_cells());
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(&format!("maxfeec {} final state, cell barycenter samples\n", prob.id));
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");

    out.push_str(&format!("POINTS {nv} double\n"));
    for v in 0..nv {
        let x = mesh.vertex(v);
        out.push_str(&format!("{} {} {}\n", x[0], x[1], x[2]));
    }
    out.push_str(&format!("CELLS {nc} {}\n", nc * (dim + 2)));
    for c in 0..nc {
        let verts = mesh.cell(c);
        out.push_str(&format!("{}", dim + 1));
        for v in verts {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("CELL_TYPES {nc}\n"));
    let vtk_type = if dim == 2 { 5 } else { 10 };
    for _ in 0..nc {
        out.push_str(&format!("{vtk_type}\n"));
    }

    let maps = [
        build_dof_map(mesh, 0, r),
        build_dof_map(mesh, 1, r),
        build_dof_map(mesh, 2, r),
    ];
    let coeffs = [&state.p, &state.e, &state.h];
    let center = if dim == 2 {
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]
    } else {
        [0.25, 0.25, 0.25, 0.25]
    };
    let samples: Vec<[[f64; 3]; 3]> = (0..nc)
        .map(|c| {
            [
                eval_field_on_cell(mesh, &maps[0], coeffs[0], c, &center),
                eval_field_on_cell(mesh, &maps[1], coeffs[1], c, &center),
                eval_field_on_cell(mesh, &maps[2], coeffs[2], c, &center),
            ]
        })
        .collect();

    out.push_str(&format!("CELL_DATA {nc}\n"));
    out.push_str("SCALARS p double 1\nLOOKUP_TABLE default\n");
    for s in &samples {
        out.push_str(&format!("{}\n", s[0][0]));
    }
    out.push_str("VECTORS E double\n");
    for s in &samples {
        out.push_str(&format!("{} {} {}\n", s[1][0], s[1][1], s[1][2]));
    }
    if dim == 2 {
        out.push_str("SCALARS H double 1\nLOOKUP_TABLE default\n");
        for s in &samples {
            out.push_str(&format!("{}\n", s[2][0]));
        }
    } else {
        out.push_str("VECTORS H double\n");
        for s in &samples {
            out.push_str(&format!("{} {} {}\n", s[2][0], s[2][1], s[2][2]));
        }
    }
    out
}
