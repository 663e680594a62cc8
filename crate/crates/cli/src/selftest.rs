//! Fast named invariant checks for `maxfeec selftest`.
//!
//! Each check is independent, takes at most a few seconds, and reports its
//! name so a failure points at the broken layer directly.

use maxfeec::assembly::global_derivative;
use maxfeec::whitney::{cell_basis, quadrature_rule, CellGeometry};
use maxfeec::{
    assemble_system, generate_unit_cube, generate_unit_square, read_mesh, run_simulation,
    write_mesh, ProblemSpec, Scheme, SchemeConfig,
};
use std::time::Instant;

/// Runs every check; returns the process exit code (0 = all passed).
pub fn run() -> i32 {
    let checks: [(&str, fn() -> Result<(), String>); 6] = [
        ("quadrature-moments", quadrature_moments),
        ("element-unisolvence", element_unisolvence),
        ("derivative-nilpotent", derivative_nilpotent),
        ("mass-spd", mass_spd),
        ("zero-state-invariance", zero_state_invariance),
        ("mesh-io-euler", mesh_io_euler),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let started = Instant::now();
        match check() {
            Ok(()) => println!("{name}: ok ({:.0} ms)", started.elapsed().as_secs_f64() * 1e3),
            Err(why) => {
                failed += 1;
                println!("{name}: FAIL - {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("selftest: {failed} check(s) failed");
        1
    } else {
        println!("selftest: all checks passed");
        0
    }
}

/// Simplex rules integrate barycentric monomials exactly:
/// integral of lambda^a over the reference d-simplex = prod(a_i!) / (|a|+d)!.
fn quadrature_moments() -> Result<(), String> {
    let factorial = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
    for dim in [2usize, 3] {
        for degree in 1..=6 {
            let rule = quadrature_rule(dim, degree);
            let mut exps = vec![vec![0usize; dim + 1]];
            for _ in 0..degree {
                let mut next = Vec::new();
                for e in &exps {
                    for slot in 0..=dim {
                        let mut e2 = e.clone();
                        e2[slot] += 1;
                        next.push(e2);
                    }
                }
                exps = next;
            }
            for e in exps {
                let total: usize = e.iter().sum();
                let exact = e.iter().map(|&a| factorial(a)).product::<f64>()
                    / factorial(total + dim);
                let got: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(lam, w)| {
                        w * e
                            .iter()
                            .enumerate()
                            .map(|(i, &a)| lam[i].powi(a as i32))
                            .product::<f64>()
                    })
                    .sum();
                if (got - exact).abs() > 1e-12 {
                    return Err(format!(
                        "dim {dim} degree {degree} moment {e:?}: {got} vs {exact}"
                    ));
                }
            }
        }
    }
    Ok(())
}

/// DOF functionals applied to the basis give the identity on a skewed cell.
fn element_unisolvence() -> Result<(), String> {
    let cells = [
        CellGeometry::new(2, vec![[0.1, 0.2, 0.0], [1.3, 0.15, 0.0], [0.4, 1.7, 0.0]]),
        CellGeometry::new(
            3,
            vec![[0.0, 0.0, 0.05], [1.1, 0.1, 0.2], [0.2, 1.2, 0.1], [0.3, 0.25, 1.4]],
        ),
    ];
    for geom in &cells {
        for k in 0..=geom.dim {
            for r in [1, 2] {
                let basis = cell_basis(geom, k, r);
                for (i, dof) in basis.dofs.iter().enumerate() {
                    for (j, form) in basis.forms.iter().enumerate() {
                        let v = dof.functional.apply_poly(geom, form);
                        let expect = if i == j { 1.0 } else { 0.0 };
                        if (v - expect).abs() > 1e-10 {
                            return Err(format!(
                                "dim {} k {k} r {r}: F_{i}(phi_{j}) = {v}",
                                geom.dim
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// The discrete derivative chain is nilpotent: d1 (d0 q) = 0.
fn derivative_nilpotent() -> Result<(), String> {
    for mesh in [generate_unit_square(2), generate_unit_cube(2)] {
        for r in [1, 2] {
            let d0 = global_derivative(&mesh, 0, r);
            let d1 = global_derivative(&mesh, 1, r);
            let q: Vec<f64> = (0..d0.ncols()).map(|i| (i as f64).sin()).collect();
            let worst = d1
                .matvec(&d0.matvec(&q))
                .iter()
                .fold(0.0f64, |a, &v| a.max(v.abs()));
            if worst > 1e-12 {
                return Err(format!("dim {} r {r}: |d1 d0 q| = {worst}", mesh.dim()));
            }
        }
    }
    Ok(())
}

/// All weighted mass matrices are symmetric positive definite.
fn mass_spd() -> Result<(), String> {
    for mesh in [generate_unit_square(2), generate_unit_cube(1)] {
        let sys = assemble_system(&mesh, 2, 2.0, 1.5);
        for (name, m) in [
            ("M0", &sys.m0),
            ("M0/eps", &sys.m0_inv_eps),
            ("M1*eps", &sys.m1_eps),
            ("M2*mu", &sys.m2_mu),
        ] {
            let d = m.to_dense();
            let asym = (&d - d.transpose()).abs().max();
            if asym > 1e-12 {
                return Err(format!("{name} asymmetry {asym} (dim {})", mesh.dim()));
            }
            if d.cholesky().is_none() {
                return Err(format!("{name} is not positive definite (dim {})", mesh.dim()));
            }
        }
    }
    Ok(())
}

/// All three steppers keep exact zero data at exactly zero.
fn zero_state_invariance() -> Result<(), String> {
    let zero = ProblemSpec {
        id: "zero",
        dim: 2,
        eps: 1.0,
        mu: 1.0,
        t_min: 0.0,
        t_max: 1.0,
        homogeneous_bc: true,
        has_forcing: false,
        exact_p: Box::new(|_, _| 0.0),
        exact_e: Box::new(|_, _| [0.0; 3]),
        exact_h: Box::new(|_, _| [0.0; 3]),
        dp_dt: Box::new(|_, _| 0.0),
        de_dt: Box::new(|_, _| [0.0; 3]),
        dh_dt: Box::new(|_, _| [0.0; 3]),
        grad_p: Box::new(|_, _| [0.0; 3]),
        div_eps_e: Box::new(|_, _| 0.0),
        curl_e: Box::new(|_, _| [0.0; 3]),
        curl_h: Box::new(|_, _| [0.0; 3]),
        f_p: Box::new(|_, _| 0.0),
        f_e: Box::new(|_, _| [0.0; 3]),
        f_h: Box::new(|_, _| [0.0; 3]),
        exact_energy: Box::new(|_| 0.0),
        energy_parts: Box::new(|_| [0.0; 3]),
    };
    let mesh = generate_unit_square(2);
    for scheme in [Scheme::CrankNicholson, Scheme::Leapfrog, Scheme::BackwardEuler] {
        let cfg = SchemeConfig::new(scheme, 2, 0.25, 0.0, 1.0)
            .map_err(|e| e.to_string())?;
        let (_, state, _) = run_simulation(&cfg, &zero, &mesh).map_err(|e| e.to_string())?;
        let peak = state
            .p
            .iter()
            .chain(&state.e)
            .chain(&state.h)
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        if peak != 0.0 {
            return Err(format!("{scheme} perturbed the zero state by {peak}"));
        }
    }
    Ok(())
}

/// Generated meshes are contractible (Euler characteristic 1) and survive a
/// text round trip.
fn mesh_io_euler() -> Result<(), String> {
    for mesh in [generate_unit_square(3), generate_unit_cube(2)] {
        if mesh.euler_characteristic() != 1 {
            return Err(format!(
                "dim {}: Euler characteristic {}",
                mesh.dim(),
                mesh.euler_characteristic()
            ));
        }
        let path = std::env::temp_dir()
            .join(format!("maxfeec-selftest-{}-{}d.mesh", std::process::id(), mesh.dim()));
        let roundtrip = write_mesh(&mesh, &path)
            .and_then(|_| read_mesh(&path))
            .map_err(|e| e.to_string());
        let _ = std::fs::remove_file(&path);
        let back = roundtrip?;
        if back.num_vertices() != mesh.num_vertices() || back.num_cells() != mesh.num_cells() {
            return Err(format!("dim {}: round trip changed the mesh", mesh.dim()));
        }
    }
    Ok(())
}
