//! Implicit time steppers for the mixed (p, E, H) system.
//!
//! All three schemes solve one sparse linear system per step,
//!
//! ```text
//!   A x_new = B x_old + F,    x = (p; E; H),
//! ```
//!
//! with essential boundary DOFs eliminated: the factored system acts on
//! interior DOFs, boundary DOFs are set from the exact traces at the
//! unknown's own time, and their coupling moves to the right-hand side.
//!
//! Crank-Nicholson averages the couplings and the forcing between the old
//! and new time. The implicit leapfrog staggers (p, E) onto half-integer
//! steps with a dedicated bootstrap solve; every later step reuses the
//! Crank-Nicholson operator on the staggered state, whose fields are all
//! second-order accurate at t - dt/2 (including H, whose bootstrap advances
//! it only half a step in effect; see the analysis module on time labels).
//! Backward Euler takes all couplings and data at the new time and is
//! strictly energy-dissipative.

use crate::analysis::{discrete_energy, error_norms, EnergySample, EnergyTrace, ErrorReport};
use crate::assembly::{
    assemble_system, boundary_values, l2_project_with_boundary, load_vector, SystemMatrices,
};
use crate::error::{Error, Result};
use crate::linalg::{block_compose, Factorization, SparseMatrix};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;

/// Tolerance on (t_max - t_min) / dt being an integer step count.
const STEP_COUNT_TOL: f64 = 1e-9;

/// The three time integrators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Trapezoidal averaging of both couplings; exactly energy-conserving.
    CrankNicholson,
    /// Staggered two-step form with a bootstrap solve; exactly conserving.
    Leapfrog,
    /// Fully implicit first-order scheme; strictly dissipative.
    BackwardEuler,
}

impl Scheme {
    /// Canonical command-line name.
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::CrankNicholson => "cn",
            Scheme::Leapfrog => "leapfrog",
            Scheme::BackwardEuler => "backward-euler",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cn" => Ok(Scheme::CrankNicholson),
            "leapfrog" => Ok(Scheme::Leapfrog),
            "backward-euler" => Ok(Scheme::BackwardEuler),
            _ => Err(Error::Config(format!(
                "unknown scheme {s:?}; expected cn, leapfrog, or backward-euler"
            ))),
        }
    }
}

/// A validated time-stepping configuration.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    /// Integrator to use.
    pub scheme: Scheme,
    /// Polynomial order of the spaces (1 or 2).
    pub r: usize,
    /// Time step.
    pub dt: f64,
    /// Initial time.
    pub t_min: f64,
    /// Final time; must be an integer number of steps past `t_min`.
    pub t_max: f64,
}

impl SchemeConfig {
    /// Validates order, step size, and interval.
    pub fn new(scheme: Scheme, r: usize, dt: f64, t_min: f64, t_max: f64) -> Result<Self> {
        if r != 1 && r != 2 {
            return Err(Error::Config(format!("order must be 1 or 2, got {r}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if !(t_max > t_min) {
            return Err(Error::Config(format!(
                "empty time interval [{t_min}, {t_max}]"
            )));
        }
        let cfg = SchemeConfig { scheme, r, dt, t_min, t_max };
        cfg.num_steps()?;
        Ok(cfg)
    }

    /// Configuration covering a problem's full time interval.
    pub fn for_problem(scheme: Scheme, r: usize, dt: f64, prob: &ProblemSpec) -> Result<Self> {
        SchemeConfig::new(scheme, r, dt, prob.t_min, prob.t_max)
    }

    /// Number of steps; errors unless (t_max - t_min) / dt is an integer
    /// within `STEP_COUNT_TOL`.
    pub fn num_steps(&self) -> Result<usize> {
        let raw = (self.t_max - self.t_min) / self.dt;
        let n = raw.round();
        if (raw - n).abs() > STEP_COUNT_TOL || n < 1.0 {
            return Err(Error::Config(format!(
                "time interval [{}, {}] is not an integer number of steps of {}",
                self.t_min, self.t_max, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Coefficient state of the three fields with their time labels.
#[derive(Debug, Clone)]
pub struct FieldState {
    /// Coefficients of p.
    pub p: Vec<f64>,
    /// Coefficients of E.
    pub e: Vec<f64>,
    /// Coefficients of H.
    pub h: Vec<f64>,
    /// Nominal times of (p, E, H) in units of dt past t_min; the leapfrog
    /// holds p and E half a step behind H.
    pub time_labels: [f64; 3],
}

/// Which linear system a stepper applies.
#[derive(Clone, Copy, PartialEq, Eq)]
enum StepKind {
    /// Trapezoidal step; also every leapfrog step after the bootstrap.
    Average,
    /// The leapfrog starter producing (p, E) at dt/2 and H at dt.
    Bootstrap,
    /// Fully implicit step.
    Implicit,
}

/// One factored implicit step operator with boundary elimination.
pub struct BlockStepper {
    interior: Vec<usize>,
    boundary: Vec<usize>,
    a_interior: Factorization,
    a_coupling: SparseMatrix,
    rhs_matrix: SparseMatrix,
}

impl BlockStepper {
    fn new(sys: &SystemMatrices, dt: f64, kind: StepKind) -> Result<Self> {
        let sizes = sys.block_sizes();
        let curl_t = sys.curl.transpose();
        let m = 1.0 / dt;
        // Per-kind coefficients: cg scales the C and G couplings, k_h the
        // curl in the H row, kt_e the transposed curl in the E row, and pm
        // the p and E masses. The bootstrap halves the step for (p, E),
        // which doubles their mass scale and quarters their couplings, but
        // keeps the E row's full-strength K^T against H.
        let (cg, k_h, kt_e, pm) = match kind {
            StepKind::Average => (0.5, 0.5, 0.5, m),
            StepKind::Bootstrap => (0.25, 0.25, 0.5, 2.0 * m),
            StepKind::Implicit => (1.0, 1.0, 1.0, m),
        };
        let a = block_compose(
            &sizes,
            &sizes,
            &[
                (0, 0, &sys.m0, pm),
                (0, 1, &sys.grad_adjoint, -cg),
                (1, 0, &sys.grad, cg),
                (1, 1, &sys.m1_eps, pm),
                (1, 2, &curl_t, -kt_e),
                (2, 1, &sys.curl, k_h),
                (2, 2, &sys.m2_mu, m),
            ],
        );
        let rhs_blocks: Vec<(usize, usize, &SparseMatrix, f64)> = match kind {
            StepKind::Implicit => vec![
                (0, 0, &sys.m0, pm),
                (1, 1, &sys.m1_eps, pm),
                (2, 2, &sys.m2_mu, m),
            ],
            _ => vec![
                (0, 0, &sys.m0, pm),
                (0, 1, &sys.grad_adjoint, cg),
                (1, 0, &sys.grad, -cg),
                (1, 1, &sys.m1_eps, pm),
                (1, 2, &curl_t, kt_e),
                (2, 1, &sys.curl, -k_h),
                (2, 2, &sys.m2_mu, m),
            ],
        };
        let rhs_matrix = block_compose(&sizes, &sizes, &rhs_blocks);
        let offsets = [0, sizes[0], sizes[0] + sizes[1]];
        let maps = [&sys.dof0, &sys.dof1, &sys.dof2];
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (field, map) in maps.iter().enumerate() {
            interior.extend(map.interior_dofs.iter().map(|&d| offsets[field] + d));
            boundary.extend(map.boundary_dofs.iter().map(|&d| offsets[field] + d));
        }
        let a_interior = Factorization::new(&a.submatrix(&interior, &interior))?;
        let a_coupling = a.submatrix(&interior, &boundary);
        Ok(BlockStepper { interior, boundary, a_interior, a_coupling, rhs_matrix })
    }

    /// Advances one step: full old state, optional forcing loads, and the
    /// boundary values at the new time produce the full new state.
    fn advance(
        &self,
        old: &[f64],
        loads: Option<&[f64]>,
        boundary_new: &[f64],
    ) -> Result<Vec<f64>> {
        let mut rhs = self.rhs_matrix.matvec(old);
        if let Some(f) = loads {
            for (r, v) in rhs.iter_mut().zip(f) {
                *r += v;
            }
        }
        let mut rhs_interior: Vec<f64> =
            self.interior.iter().map(|&g| rhs[g]).collect();
        self.a_coupling.gaxpy(boundary_new, -1.0, &mut rhs_interior);
        let x = self.a_interior.solve(&rhs_interior)?;
        let mut out = vec![0.0; old.len()];
        for (j, &g) in self.interior.iter().enumerate() {
            out[g] = x[j];
        }
        for (j, &g) in self.boundary.iter().enumerate() {
            out[g] = boundary_new[j];
        }
        Ok(out)
    }
}

/// Splits a concatenated state vector into (p, E, H) slices.
fn split(sizes: &[usize; 3], x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        x[..sizes[0]].to_vec(),
        x[sizes[0]..sizes[0] + sizes[1]].to_vec(),
        x[sizes[0] + sizes[1]..].to_vec(),
    )
}

/// Assembles the forcing loads (f_p, f_E, f_H) at the given per-field times
/// into one concatenated vector.
fn forcing_loads(
    mesh: &Mesh,
    sys: &SystemMatrices,
    prob: &ProblemSpec,
    t_pe: f64,
    t_h: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(sys.block_sizes().iter().sum());
    out.extend(load_vector(mesh, &sys.dof0, &|x| [(prob.f_p)(x, t_pe), 0.0, 0.0]));
    out.extend(load_vector(mesh, &sys.dof1, &|x| (prob.f_e)(x, t_pe)));
    out.extend(load_vector(mesh, &sys.dof2, &|x| (prob.f_h)(x, t_h)));
    out
}

/// Boundary trace values (p, E at `t_pe`; H at `t_h`) concatenated in the
/// stepper's boundary DOF order.
fn boundary_traces(
    mesh: &Mesh,
    sys: &SystemMatrices,
    prob: &ProblemSpec,
    n_boundary: usize,
    t_pe: f64,
    t_h: f64,
) -> Vec<f64> {
    if prob.homogeneous_bc {
        return vec![0.0; n_boundary];
    }
    let mut out = Vec::with_capacity(n_boundary);
    out.extend(boundary_values(mesh, &sys.dof0, &|x| [(prob.exact_p)(x, t_pe), 0.0, 0.0]));
    out.extend(boundary_values(mesh, &sys.dof1, &|x| (prob.exact_e)(x, t_pe)));
    out.extend(boundary_values(mesh, &sys.dof2, &|x| (prob.exact_h)(x, t_h)));
    out
}

/// A running simulation: assembled system, factored step operator, current
/// state, and the energy history collected so far.
pub struct Simulation<'a> {
    config: SchemeConfig,
    prob: &'a ProblemSpec,
    mesh: &'a Mesh,
    sys: SystemMatrices,
    sizes: [usize; 3],
    stepper: BlockStepper,
    n_steps: usize,
    steps_taken: usize,
    state: Vec<f64>,
    trace: EnergyTrace,
}

impl<'a> Simulation<'a> {
    /// Assembles the system, factors the main step operator, and projects
    /// the initial data (L2 projection constrained to the exact boundary
    /// traces at t_min, so the initial state is admissible for the steppers).
    pub fn new(config: &SchemeConfig, prob: &'a ProblemSpec, mesh: &'a Mesh) -> Result<Self> {
        if mesh.dim() != prob.dim {
            return Err(Error::Dimension(format!(
                "problem {} is {}D but the mesh is {}D",
                prob.id,
                prob.dim,
                mesh.dim()
            )));
        }
        let n_steps = config.num_steps()?;
        let t_min = config.t_min;
        let sys = assemble_system(mesh, config.r, prob.eps, prob.mu);
        let sizes = sys.block_sizes();

        let maps = [&sys.dof0, &sys.dof1, &sys.dof2];
        let fields: [Box<dyn Fn(&[f64; 3]) -> [f64; 3]>; 3] = [
            Box::new(|x| [(prob.exact_p)(x, t_min), 0.0, 0.0]),
            Box::new(|x| (prob.exact_e)(x, t_min)),
            Box::new(|x| (prob.exact_h)(x, t_min)),
        ];
        let mut state = Vec::with_capacity(sizes.iter().sum());
        for (map, field) in maps.iter().zip(&fields) {
            let traces = if prob.homogeneous_bc {
                vec![0.0; map.boundary_dofs.len()]
            } else {
                boundary_values(mesh, map, field)
            };
            state.extend(l2_project_with_boundary(mesh, map, field, &traces)?);
        }

        let main_kind = match config.scheme {
            Scheme::BackwardEuler => StepKind::Implicit,
            _ => StepKind::Average,
        };
        let stepper = BlockStepper::new(&sys, config.dt, main_kind)?;

        let mut trace = EnergyTrace {
            problem: prob.id.to_string(),
            scheme: config.scheme.name().to_string(),
            dt: config.dt,
            rows: Vec::with_capacity(n_steps + 1),
        };
        let (p, e, h) = split(&sizes, &state);
        trace.rows.push(EnergySample {
            t: t_min,
            t_field: t_min,
            energy: discrete_energy(&sys, &p, &e, &h),
        });

        Ok(Simulation {
            config: config.clone(),
            prob,
            mesh,
            sys,
            sizes,
            stepper,
            n_steps,
            steps_taken: 0,
            state,
            trace,
        })
    }

    /// True once the state has reached t_max.
    pub fn is_done(&self) -> bool {
        self.steps_taken >= self.n_steps
    }

    /// Advances one step and records the energy row.
    pub fn step(&mut self) -> Result<()> {
        if self.is_done() {
            return Err(Error::Config("simulation already reached t_max".into()));
        }
        let n = self.steps_taken + 1;
        let (dt, t_min) = (self.config.dt, self.config.t_min);
        let t_new = t_min + n as f64 * dt;
        let t_old = t_new - dt;
        let (t_traces, t_loads, t_field): ([f64; 2], [f64; 2], f64);
        let bootstrap = self.config.scheme == Scheme::Leapfrog && n == 1;
        match self.config.scheme {
            Scheme::CrankNicholson => {
                t_traces = [t_new, t_new];
                // Trapezoidal forcing, split below.
                t_loads = [t_old, t_new];
                t_field = t_new;
            }
            Scheme::BackwardEuler => {
                t_traces = [t_new, t_new];
                t_loads = [t_new, t_new];
                t_field = t_new;
            }
            Scheme::Leapfrog => {
                t_loads = if bootstrap {
                    [t_min, t_min + 0.5 * dt]
                } else {
                    [t_old, t_new - 0.5 * dt]
                };
                t_traces = [t_new - 0.5 * dt, t_new];
                t_field = t_new - 0.5 * dt;
            }
        }
        let loads = if self.prob.has_forcing {
            Some(match self.config.scheme {
                Scheme::CrankNicholson => {
                    let a = forcing_loads(self.mesh, &self.sys, self.prob, t_loads[0], t_loads[0]);
                    let b = forcing_loads(self.mesh, &self.sys, self.prob, t_loads[1], t_loads[1]);
                    a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect::<Vec<f64>>()
                }
                _ => forcing_loads(self.mesh, &self.sys, self.prob, t_loads[0], t_loads[1]),
            })
        } else {
            None
        };
        let traces = boundary_traces(
            self.mesh,
            &self.sys,
            self.prob,
            self.stepper.boundary.len(),
            t_traces[0],
            t_traces[1],
        );
        let new_state = if bootstrap {
            let boot = BlockStepper::new(&self.sys, dt, StepKind::Bootstrap)?;
            boot.advance(&self.state, loads.as_deref(), &traces)?
        } else {
            self.stepper.advance(&self.state, loads.as_deref(), &traces)?
        };
        self.state = new_state;
        self.steps_taken = n;
        let (p, e, h) = split(&self.sizes, &self.state);
        self.trace.rows.push(EnergySample {
            t: t_new,
            t_field,
            energy: discrete_energy(&self.sys, &p, &e, &h),
        });
        Ok(())
    }

    /// The energy history collected so far.
    pub fn trace(&self) -> &EnergyTrace {
        &self.trace
    }

    /// The assembled system matrices.
    pub fn system(&self) -> &SystemMatrices {
        &self.sys
    }

    /// A copy of the current field coefficients with their time labels.
    pub fn state(&self) -> FieldState {
        let (p, e, h) = split(&self.sizes, &self.state);
        let n = self.steps_taken as f64;
        let time_labels = match self.config.scheme {
            Scheme::Leapfrog if self.steps_taken > 0 => [n - 0.5, n - 0.5, n],
            _ => [n; 3],
        };
        FieldState { p, e, h, time_labels }
    }

    /// Consumes the simulation: energy history, final state, and error norms
    /// against the exact solution at the final field time.
    pub fn finish(self) -> (EnergyTrace, FieldState, ErrorReport) {
        let state = self.state();
        let t_eval = self.trace.rows.last().unwrap().t_field;
        let errs = error_norms(
            self.mesh, &self.sys, self.prob, &state.p, &state.e, &state.h, t_eval,
        );
        let report = ErrorReport::new(
            errs,
            self.mesh.max_diameter(),
            self.config.dt,
            self.config.r,
            self.config.scheme.name(),
        );
        (self.trace, state, report)
    }
}

/// Runs one simulation to t_max: projects the initial data, steps, and
/// reports the energy history, the final state, and the error norms at the
/// final field time.
pub fn run_simulation(
    config: &SchemeConfig,
    prob: &ProblemSpec,
    mesh: &Mesh,
) -> Result<(EnergyTrace, FieldState, ErrorReport)> {
    let mut sim = Simulation::new(config, prob, mesh)?;
    while !sim.is_done() {
        sim.step()?;
    }
    Ok(sim.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_unit_cube, generate_unit_square};
    use crate::problems::{get_problem, manufactured_problem, ProblemSpec};

    const CONSERVE_TOL: f64 = 1e-11;

    fn run(
        id: &str,
        scheme: Scheme,
        r: usize,
        dt: f64,
        t_max: f64,
        mesh: &Mesh,
    ) -> (EnergyTrace, FieldState, ErrorReport) {
        let prob = get_problem(id).unwrap();
        let cfg = SchemeConfig::new(scheme, r, dt, prob.t_min, t_max).unwrap();
        run_simulation(&cfg, &prob, mesh).unwrap()
    }

    /// Both conserving schemes hold the discrete energy to rounding on a
    /// homogeneous problem, including the leapfrog bootstrap row.
    #[test]
    fn conserving_schemes_have_flat_energy() {
        let mesh = generate_unit_square(4);
        for scheme in [Scheme::CrankNicholson, Scheme::Leapfrog] {
            let (trace, _, _) = run("example1", scheme, 1, 0.05, 0.5, &mesh);
            assert_eq!(trace.rows.len(), 11);
            assert!(
                trace.max_drift() < CONSERVE_TOL * trace.rows[0].energy,
                "{scheme}: drift {}",
                trace.max_drift()
            );
        }
    }

    /// Backward Euler decays monotonically and much faster than rounding.
    #[test]
    fn backward_euler_dissipates() {
        let mesh = generate_unit_square(4);
        let (trace, _, _) = run("example1", Scheme::BackwardEuler, 1, 0.05, 0.5, &mesh);
        assert!(trace.max_increase() <= 1e-14);
        assert!(trace.total_decay() > 1e-3);
    }

    /// A 3D homogeneous problem with nonunit permittivity conserves too.
    #[test]
    fn conservation_in_three_dimensions() {
        let mesh = generate_unit_cube(2);
        let (trace, _, _) = run("example2", Scheme::Leapfrog, 1, 0.1, 0.5, &mesh);
        assert!(trace.max_drift() < CONSERVE_TOL * trace.rows[0].energy);
    }

    /// Errors against the exact solution shrink under mesh refinement for
    /// every scheme on a problem with nonhomogeneous boundary traces.
    #[test]
    fn errors_shrink_under_refinement_with_traces() {
        for scheme in [Scheme::CrankNicholson, Scheme::Leapfrog, Scheme::BackwardEuler] {
            let mut last = f64::INFINITY;
            for n in [4, 8] {
                let mesh = generate_unit_square(n);
                let (_, _, report) = run("example3", scheme, 2, 0.005, 0.1, &mesh);
                assert!(
                    report.total < last,
                    "{scheme} error grew: {} then {}",
                    last,
                    report.total
                );
                last = report.total;
            }
            assert!(last < 0.05, "{scheme} final error {last}");
        }
    }

    /// The staggered state's fields all approximate the exact solution at
    /// t - dt/2; evaluating H at its integer label instead is visibly worse.
    #[test]
    fn leapfrog_fields_sit_at_half_time() {
        // Stop where dH/dt is large so the half-step offset is visible
        // (H ~ sin(pi t) barely moves near t = 1/2).
        let mesh = generate_unit_square(8);
        let prob = get_problem("example1").unwrap();
        let cfg = SchemeConfig::new(Scheme::Leapfrog, 2, 0.02, 0.0, 0.26).unwrap();
        let (_, state, report) = run_simulation(&cfg, &prob, &mesh).unwrap();
        assert_eq!(state.time_labels, [12.5, 12.5, 13.0]);
        let sys = assemble_system(&mesh, 2, prob.eps, prob.mu);
        let at_integer = error_norms(&mesh, &sys, &prob, &state.p, &state.e, &state.h, 0.26);
        assert!(report.e_h < 0.2 * at_integer[2], "H is not staggered");
    }

    /// Zero data stays exactly zero through all three steppers.
    #[test]
    fn zero_state_is_invariant() {
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
        let mesh = generate_unit_square(3);
        for scheme in [Scheme::CrankNicholson, Scheme::Leapfrog, Scheme::BackwardEuler] {
            let cfg = SchemeConfig::new(scheme, 2, 0.25, 0.0, 1.0).unwrap();
            let (trace, state, _) = run_simulation(&cfg, &zero, &mesh).unwrap();
            let peak = state
                .p
                .iter()
                .chain(&state.e)
                .chain(&state.h)
                .fold(0.0f64, |a, &v| a.max(v.abs()));
            assert_eq!(peak, 0.0, "{scheme} perturbed the zero state");
            assert_eq!(trace.rows.last().unwrap().energy, 0.0);
        }
    }

    /// Forcing terms are honored: the manufactured solution is reproduced
    /// to discretization accuracy.
    #[test]
    fn manufactured_forcing_is_reproduced() {
        let prob = manufactured_problem(2);
        let mesh = generate_unit_square(6);
        for scheme in [Scheme::CrankNicholson, Scheme::Leapfrog, Scheme::BackwardEuler] {
            let cfg = SchemeConfig::new(scheme, 2, 0.02, 0.0, 0.2).unwrap();
            let (_, _, report) = run_simulation(&cfg, &prob, &mesh).unwrap();
            assert!(report.total < 0.02, "{scheme} error {}", report.total);
        }
    }

    /// Driving a Simulation step by step reproduces run_simulation exactly
    /// and refuses to step past t_max.
    #[test]
    fn stepwise_driver_matches_batch_run() {
        let prob = get_problem("example3").unwrap();
        let mesh = generate_unit_square(3);
        let cfg = SchemeConfig::new(Scheme::Leapfrog, 1, 0.1, 0.0, 0.4).unwrap();
        let (trace, state, report) = run_simulation(&cfg, &prob, &mesh).unwrap();
        let mut sim = Simulation::new(&cfg, &prob, &mesh).unwrap();
        assert_eq!(sim.state().time_labels, [0.0; 3]);
        for _ in 0..4 {
            assert!(!sim.is_done());
            sim.step().unwrap();
        }
        assert!(sim.is_done());
        assert!(sim.step().is_err());
        let (trace2, state2, report2) = sim.finish();
        assert_eq!(state.p, state2.p);
        assert_eq!(state.e, state2.e);
        assert_eq!(state.h, state2.h);
        assert_eq!(state.time_labels, state2.time_labels);
        assert_eq!(report.total, report2.total);
        let energies: Vec<f64> = trace.rows.iter().map(|r| r.energy).collect();
        let energies2: Vec<f64> = trace2.rows.iter().map(|r| r.energy).collect();
        assert_eq!(energies, energies2);
    }

    #[test]
    fn configuration_validation() {
        assert!(SchemeConfig::new(Scheme::CrankNicholson, 3, 0.1, 0.0, 1.0).is_err());
        assert!(SchemeConfig::new(Scheme::CrankNicholson, 1, -0.1, 0.0, 1.0).is_err());
        assert!(SchemeConfig::new(Scheme::CrankNicholson, 1, 0.1, 1.0, 1.0).is_err());
        assert!(SchemeConfig::new(Scheme::CrankNicholson, 1, 0.3, 0.0, 1.0).is_err());
        let cfg = SchemeConfig::new(Scheme::CrankNicholson, 1, 0.01, 0.0, 3.14).unwrap();
        assert_eq!(cfg.num_steps().unwrap(), 314);
        assert_eq!("leapfrog".parse::<Scheme>().unwrap(), Scheme::Leapfrog);
        assert_eq!("backward-euler".parse::<Scheme>().unwrap(), Scheme::BackwardEuler);
        assert!("euler".parse::<Scheme>().is_err());
        let prob = get_problem("example2").unwrap();
        let mesh = generate_unit_square(2);
        let cfg = SchemeConfig::for_problem(Scheme::CrankNicholson, 1, 0.5, &prob).unwrap();
        assert!(matches!(
            run_simulation(&cfg, &prob, &mesh),
            Err(Error::Dimension(_))
        ));
    }
}
