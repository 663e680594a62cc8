//! Energy bookkeeping, error norms, and convergence-order estimation.
//!
//! The discrete energy is the weighted quadratic form
//!
//! ```text
//!   E(p, E, H) = p' M0_{1/eps} p + E' M1_eps E + H' M2_mu H
//! ```
//!
//! matching the continuous energy of the mixed system. Error norms are
//! weighted L2 norms of the difference between the discrete field and the
//! exact solution, integrated cell by cell with the assembly quadrature.
//!
//! Staggered time labels: the leapfrog scheme holds (p, E) at half-integer
//! steps once bootstrapped, so each trace row carries both the step time
//! `t = n dt` and the field time `t_field` at which the stored state
//! approximates the exact solution (`t - dt/2` for leapfrog rows after the
//! initial one, `t` for every single-time scheme).

use crate::assembly::{assembly_quad_degree, cell_geometry, SystemMatrices};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;
use crate::whitney::{cell_basis, quadrature_rule};

/// One row of an energy trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    /// Step time n dt.
    pub t: f64,
    /// Time at which the stored state approximates the exact solution.
    pub t_field: f64,
    /// Discrete energy of the stored state.
    pub energy: f64,
}

/// Discrete energy history of one simulation.
#[derive(Debug, Clone)]
pub struct EnergyTrace {
    /// Problem identifier.
    pub problem: String,
    /// Scheme name.
    pub scheme: String,
    /// Time step.
    pub dt: f64,
    /// Samples at t = n dt, in step order.
    pub rows: Vec<EnergySample>,
}

impl EnergyTrace {
    /// Largest deviation of the energy from its initial value.
    pub fn max_drift(&self) -> f64 {
        let e0 = self.rows[0].energy;
        self.rows
            .iter()
            .map(|r| (r.energy - e0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest single-step energy increase (negative if strictly decaying).
    pub fn max_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Total energy lost between the first and last sample.
    pub fn total_decay(&self) -> f64 {
        self.rows[0].energy - self.rows[self.rows.len() - 1].energy
    }

    /// Largest relative deviation from an exact energy, each row compared
    /// at its field time.
    pub fn max_tracking_error(&self, exact: &dyn Fn(f64) -> f64) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let target = exact(r.t_field);
                (r.energy - target).abs() / target.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// Renders the trace as `t,energy` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,energy\n");
        for r in &self.rows {
            out.push_str(&format!("{},{}\n", r.t, r.energy));
        }
        out
    }
}

/// Weighted discrete energy of a coefficient state.
pub fn discrete_energy(sys: &SystemMatrices, p: &[f64], e: &[f64], h: &[f64]) -> f64 {
    let parts = discrete_energy_parts(sys, p, e, h);
    parts[0] + parts[1] + parts[2]
}

/// The three weighted quadratic forms (p, E, H) separately.
pub fn discrete_energy_parts(
    sys: &SystemMatrices,
    p: &[f64],
    e: &[f64],
    h: &[f64],
) -> [f64; 3] {
    [
        quadratic_form(&sys.m0_inv_eps, p),
        quadratic_form(&sys.m1_eps, e),
        quadratic_form(&sys.m2_mu, h),
    ]
}

fn quadratic_form(m: &crate::linalg::SparseMatrix, x: &[f64]) -> f64 {
    m.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Errors of a simulation at one instant: weighted L2 norms per field.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Weighted L2 error of p.
    pub e_p: f64,
    /// Weighted L2 error of E.
    pub e_e: f64,
    /// Weighted L2 error of H.
    pub e_h: f64,
    /// Sum of the three errors.
    pub total: f64,
    /// Largest cell diameter of the mesh.
    pub h: f64,
    /// Time step used.
    pub dt: f64,
    /// Polynomial order of the spaces.
    pub r: usize,
    /// Scheme name.
    pub scheme: String,
}

impl ErrorReport {
    /// Assembles a report from the three field errors and run metadata.
    pub fn new(errs: [f64; 3], h: f64, dt: f64, r: usize, scheme: &str) -> Self {
        ErrorReport {
            e_p: errs[0],
            e_e: errs[1],
            e_h: errs[2],
            total: errs[0] + errs[1] + errs[2],
            h,
            dt,
            r,
            scheme: scheme.to_string(),
        }
    }

    /// Renders the report as a JSON object.
    pub fn to_json(&self) -> String {
        format!(
            "{{\n  \"e_p\": {},\n  \"e_E\": {},\n  \"e_H\": {},\n  \"total\": {},\n  \"h\": {},\n  \"dt\": {},\n  \"r\": {},\n  \"scheme\": \"{}\"\n}}\n",
            self.e_p, self.e_e, self.e_h, self.total, self.h, self.dt, self.r, self.scheme
        )
    }
}

/// Weighted L2 errors (p, E, H) of a coefficient state against the exact
/// solution at time `t`.
pub fn error_norms(
    mesh: &Mesh,
    sys: &SystemMatrices,
    prob: &ProblemSpec,
    p: &[f64],
    e: &[f64],
    h: &[f64],
    t: f64,
) -> [f64; 3] {
    let rule = quadrature_rule(mesh.dim(), assembly_quad_degree(sys.dof0.r));
    let maps = [&sys.dof0, &sys.dof1, &sys.dof2];
    let coeffs = [p, e, h];
    let weights = [1.0 / sys.eps, sys.eps, sys.mu];
    let mut acc = [0.0; 3];
    for c in 0..mesh.num_cells() {
        let geom = cell_geometry(mesh, c);
        for field in 0..3 {
            let basis = cell_basis(&geom, maps[field].k, maps[field].r);
            let cd = &maps[field].cell_dofs[c];
            for (pt, w) in rule.points.iter().zip(&rule.weights) {
                let mut uh = [0.0; 3];
                for (i, form) in basis.forms.iter().enumerate() {
                    let v = form.eval(pt);
                    for axis in 0..3 {
                        uh[axis] += coeffs[field][cd[i]] * v[axis];
                    }
                }
                let x = geom.point(pt);
                let ex = match field {
                    0 => [(prob.exact_p)(&x, t), 0.0, 0.0],
                    1 => (prob.exact_e)(&x, t),
                    _ => (prob.exact_h)(&x, t),
                };
                let d2: f64 = (0..3).map(|a| (uh[a] - ex[a]) * (uh[a] - ex[a])).sum();
                acc[field] += w * geom.det_j * weights[field] * d2;
            }
        }
    }
    [acc[0].sqrt(), acc[1].sqrt(), acc[2].sqrt()]
}

/// Least-squares slope of log(error) against log(parameter).
///
/// With errors behaving like `C * param^s` the returned value estimates s.
pub fn estimate_order(params: &[f64], errors: &[f64]) -> Result<f64> {
    if params.len() != errors.len() || params.len() < 2 {
        return Err(Error::Config(
            "order estimate needs equally many parameters and errors, at least two".into(),
        ));
    }
    if params.iter().chain(errors).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::Config(
            "order estimate needs positive finite parameters and errors".into(),
        ));
    }
    let xs: Vec<f64> = params.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("order estimate needs distinct parameters".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_system, l2_project};
    use crate::mesh::{generate_unit_cube, generate_unit_square};
    use crate::problems::get_problem;

    /// Projection of exact initial data reproduces the exact energy and has
    /// small error norms; both shrink under refinement.
    #[test]
    fn projected_energy_and_errors_converge() {
        let prob = get_problem("example1").unwrap();
        let mut last_energy_err = f64::INFINITY;
        let mut last_field_err = f64::INFINITY;
        for n in [4, 8] {
            let mesh = generate_unit_square(n);
            let sys = assemble_system(&mesh, 2, prob.eps, prob.mu);
            let t = 0.3;
            let p = l2_project(&mesh, &sys.dof0, &|x| [(prob.exact_p)(x, t), 0.0, 0.0]).unwrap();
            let e = l2_project(&mesh, &sys.dof1, &|x| (prob.exact_e)(x, t)).unwrap();
            let h = l2_project(&mesh, &sys.dof2, &|x| (prob.exact_h)(x, t)).unwrap();
            let energy_err = (discrete_energy(&sys, &p, &e, &h) - (prob.exact_energy)(t)).abs();
            let errs = error_norms(&mesh, &sys, &prob, &p, &e, &h, t);
            let field_err = errs[0] + errs[1] + errs[2];
            // Fields converge at order two in these spaces, the energy of
            // the projection at order four.
            assert!(energy_err < last_energy_err / 8.0, "energy error not shrinking");
            assert!(field_err < last_field_err / 3.5, "field error not shrinking");
            last_energy_err = energy_err;
            last_field_err = field_err;
        }
        assert!(last_energy_err < 1e-4);
        assert!(last_field_err < 1e-2);
    }

    /// Energy parts of projected data match the exact split in 3D with
    /// nonunit weights.
    #[test]
    fn energy_parts_match_weighted_split() {
        let prob = get_problem("example2").unwrap();
        let mesh = generate_unit_cube(3);
        let sys = assemble_system(&mesh, 2, prob.eps, prob.mu);
        let t = 0.4;
        let p = l2_project(&mesh, &sys.dof0, &|x| [(prob.exact_p)(x, t), 0.0, 0.0]).unwrap();
        let e = l2_project(&mesh, &sys.dof1, &|x| (prob.exact_e)(x, t)).unwrap();
        let h = l2_project(&mesh, &sys.dof2, &|x| (prob.exact_h)(x, t)).unwrap();
        let parts = discrete_energy_parts(&sys, &p, &e, &h);
        let exact = (prob.energy_parts)(t);
        for i in 0..3 {
            assert!(
                (parts[i] - exact[i]).abs() < 5e-3,
                "part {i}: {} vs {}",
                parts[i],
                exact[i]
            );
        }
    }

    #[test]
    fn order_estimate_recovers_synthetic_slope() {
        let params: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
        let errors: Vec<f64> = params.iter().map(|&h| 3.7 * h.powf(2.1)).collect();
        let s = estimate_order(&params, &errors).unwrap();
        assert!((s - 2.1).abs() < 1e-12);
        assert!(estimate_order(&params, &[1.0, 1.0, 1.0]).is_err());
        assert!(estimate_order(&params, &[1.0, -1.0, 1.0, 1.0]).is_err());
        assert!(estimate_order(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(estimate_order(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn trace_statistics_and_csv() {
        let trace = EnergyTrace {
            problem: "example1".into(),
            scheme: "cn".into(),
            dt: 0.5,
            rows: vec![
                EnergySample { t: 0.0, t_field: 0.0, energy: 2.0 },
                EnergySample { t: 0.5, t_field: 0.25, energy: 1.75 },
                EnergySample { t: 1.0, t_field: 0.75, energy: 1.8 },
            ],
        };
        assert!((trace.max_drift() - 0.25).abs() < 1e-15);
        assert!((trace.max_increase() - 0.05).abs() < 1e-15);
        assert!((trace.total_decay() - 0.2).abs() < 1e-15);
        // Tracking compares at field times: exact(t_field) = 2 - t_field,
        // so the worst row is the third, |1.8 - 1.25| / 1.25.
        let err = trace.max_tracking_error(&|t| 2.0 - t);
        assert!((err - 0.55 / 1.25).abs() < 1e-15);
        let csv = trace.to_csv();
        assert!(csv.starts_with("t,energy\n0,2\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
