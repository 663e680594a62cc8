//! The six analytic benchmark problems for the mixed (p, E, H) system.
//!
//! Every problem provides closed-form fields, their time and space
//! derivatives, forcing terms (identically zero for the six benchmarks:
//! each is an exact solution of the homogeneous system), and the exact
//! weighted energy
//!
//! ```text
//!   (1/eps) ||p||^2 + eps ||E||^2 + mu ||H||^2
//! ```
//!
//! split into its three parts. In 2D the H field and its curl-as-source
//! counterpart use the scalar proxy convention: scalar values live in the
//! first slot of the returned triple, and `curl_h` is the vector
//! `(dH/dy, -dH/dx)`.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Scalar field of space and time.
pub type ScalarField = Box<dyn Fn(&[f64; 3], f64) -> f64 + Send + Sync>;
/// Vector (or scalar-proxy) field of space and time.
pub type VectorField = Box<dyn Fn(&[f64; 3], f64) -> [f64; 3] + Send + Sync>;
/// Scalar function of time.
pub type TimeFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
/// Energy split (p part, E part, H part) as a function of time.
pub type EnergyParts = Box<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// An analytic benchmark problem.
pub struct ProblemSpec {
    /// Identifier, `example1` through `example6`.
    pub id: &'static str,
    /// Spatial dimension (2 or 3).
    pub dim: usize,
    /// Permittivity (constant).
    pub eps: f64,
    /// Permeability (constant).
    pub mu: f64,
    /// Start of the time interval.
    pub t_min: f64,
    /// End of the time interval.
    pub t_max: f64,
    /// True if all essential boundary traces vanish identically.
    pub homogeneous_bc: bool,
    /// True if any forcing term is not identically zero.
    pub has_forcing: bool,
    /// Exact pressure-like scalar p.
    pub exact_p: ScalarField,
    /// Exact electric field E.
    pub exact_e: VectorField,
    /// Exact magnetic field H (scalar proxy in 2D).
    pub exact_h: VectorField,
    /// Time derivative of p.
    pub dp_dt: ScalarField,
    /// Time derivative of E.
    pub de_dt: VectorField,
    /// Time derivative of H.
    pub dh_dt: VectorField,
    /// Gradient of p.
    pub grad_p: VectorField,
    /// Divergence of eps E.
    pub div_eps_e: ScalarField,
    /// Curl of E (scalar proxy in 2D).
    pub curl_e: VectorField,
    /// Curl of H (always a vector; from the scalar proxy in 2D).
    pub curl_h: VectorField,
    /// Forcing in the p equation.
    pub f_p: ScalarField,
    /// Forcing in the E equation.
    pub f_e: VectorField,
    /// Forcing in the H equation.
    pub f_h: VectorField,
    /// Exact total energy at time t.
    pub exact_energy: TimeFn,
    /// Exact energy parts (p, E, H) at time t.
    pub energy_parts: EnergyParts,
}

fn zero_scalar() -> ScalarField {
    Box::new(|_, _| 0.0)
}

fn zero_vector() -> VectorField {
    Box::new(|_, _| [0.0; 3])
}

/// The identifiers of the six benchmark problems.
pub fn problem_ids() -> [&'static str; 6] {
    ["example1", "example2", "example3", "example4", "example5", "example6"]
}

/// Looks up a benchmark problem by identifier.
pub fn get_problem(id: &str) -> Result<ProblemSpec> {
    match id {
        "example1" => Ok(example1()),
        "example2" => Ok(example2()),
        "example3" => Ok(example3()),
        "example4" => Ok(example4()),
        "example5" => Ok(example5()),
        "example6" => Ok(example6()),
        _ => Err(Error::Config(format!(
            "unknown problem {id:?}; expected one of {:?}",
            problem_ids()
        ))),
    }
}

/// Exact energy of a benchmark problem at time t.
pub fn exact_energy(id: &str, t: f64) -> Result<f64> {
    Ok((get_problem(id)?.exact_energy)(t))
}

/// 2D standing wave with p = 0 and constant unit energy.
fn example1() -> ProblemSpec {
    ProblemSpec {
        id: "example1",
        dim: 2,
        eps: 1.0,
        mu: 1.0,
        t_min: 0.0,
        t_max: 2.0,
        homogeneous_bc: true,
        has_forcing: false,
        exact_p: zero_scalar(),
        exact_e: Box::new(|x, t| {
            let c = (PI * t).cos();
            [(PI * x[1]).sin() * c, (PI * x[0]).sin() * c, 0.0]
        }),
        exact_h: Box::new(|x, t| {
            [((PI * x[1]).cos() - (PI * x[0]).cos()) * (PI * t).sin(), 0.0, 0.0]
        }),
        dp_dt: zero_scalar(),
        de_dt: Box::new(|x, t| {
            let s = -PI * (PI * t).sin();
            [(PI * x[1]).sin() * s, (PI * x[0]).sin() * s, 0.0]
        }),
        dh_dt: Box::new(|x, t| {
            [PI * ((PI * x[1]).cos() - (PI * x[0]).cos()) * (PI * t).cos(), 0.0, 0.0]
        }),
        grad_p: zero_vector(),
        div_eps_e: zero_scalar(),
        curl_e: Box::new(|x, t| {
            [PI * ((PI * x[0]).cos() - (PI * x[1]).cos()) * (PI * t).cos(), 0.0, 0.0]
        }),
        curl_h: Box::new(|x, t| {
            let s = (PI * t).sin();
            [-PI * (PI * x[1]).sin() * s, -PI * (PI * x[0]).sin() * s, 0.0]
        }),
        f_p: zero_scalar(),
        f_e: zero_vector(),
        f_h: zero_vector(),
        exact_energy: Box::new(|_| 1.0),
        energy_parts: Box::new(|t| {
            [0.0, (PI * t).cos().powi(2), (PI * t).sin().powi(2)]
        }),
    }
}

/// 3D standing wave with p = 0, eps = 2, and constant energy 3/2.
fn example2() -> ProblemSpec {
    let e_amp = |x: &[f64; 3]| {
        [
            (PI * x[1]).sin() * (PI * x[2]).sin(),
            (PI * x[0]).sin() * (PI * x[2]).sin(),
            (PI * x[0]).sin() * (PI * x[1]).sin(),
        ]
    };
    let h_amp = |x: &[f64; 3]| {
        [
            (PI * x[0]).sin() * ((PI * x[2]).cos() - (PI * x[1]).cos()),
            (PI * x[1]).sin() * ((PI * x[0]).cos() - (PI * x[2]).cos()),
            (PI * x[2]).sin() * ((PI * x[1]).cos() - (PI * x[0]).cos()),
        ]
    };
    ProblemSpec {
        id: "example2",
        dim: 3,
        eps: 2.0,
        mu: 1.0,
        t_min: 0.0,
        t_max: 2.0,
        homogeneous_bc: true,
        has_forcing: false,
        exact_p: zero_scalar(),
        exact_e: Box::new(move |x, t| {
            let a = e_amp(x);
            let c = (PI * t).cos();
            [a[0] * c, a[1] * c, a[2] * c]
        }),
        exact_h: Box::new(move |x, t| {
            let a = h_amp(x);
            let s = (PI * t).sin();
            [a[0] * s, a[1] * s, a[2] * s]
        }),
        dp_dt: zero_scalar(),
        de_dt: Box::new(move |x, t| {
            let a = e_amp(x);
            let s = -PI * (PI * t).sin();
            [a[0] * s, a[1] * s, a[2] * s]
        }),
        dh_dt: Box::new(move |x, t| {
            let a = h_amp(x);
            let c = PI * (PI * t).cos();
            [a[0] * c, a[1] * c, a[2] * c]
        }),
        grad_p: zero_vector(),
        div_eps_e: zero_scalar(),
        curl_e: Box::new(move |x, t| {
            let a = h_amp(x);
            let c = -PI * (PI * t).cos();
            [a[0] * c, a[1] * c, a[2] * c]
        }),
        curl_h: Box::new(move |x, t| {
            let a = e_amp(x);
            let s = -2.0 * PI * (PI * t).sin();
            [a[0] * s, a[1] * s, a[2] * s]
        }),
        f_p: zero_scalar(),
        f_e: zero_vector(),
        f_h: zero_vector(),
        exact_energy: Box::new(|_| 1.5),
        energy_parts: Box::new(|t| {
            [0.0, 1.5 * (PI * t).cos().powi(2), 1.5 * (PI * t).sin().powi(2)]
        }),
    }
}

/// 2D traveling plus standing wave with nonzero p and nonhomogeneous traces.
fn example3() -> ProblemSpec {
    let sqrt2 = 2f64.sqrt();
    let w = move |x: &[f64; 3], t: f64| (PI * (sqrt2 * t - x[0] - x[1])).sin();
    let wc = move |x: &[f64; 3], t: f64| (PI * (sqrt2 * t - x[0] - x[1])).cos();
    ProblemSpec {
        id: "example3",
        dim: 2,
        eps: 1.0,
        mu: 1.0,
        t_min: 0.0,
        t_max: 2.0,
        homogeneous_bc: false,
        has_forcing: false,
        exact_p: Box::new(|x, t| ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).sin()),
        exact_e: Box::new(move |x, t| {
            let c = (PI * t).cos();
            [
                w(x, t) - (PI * x[0]).sin() * c,
                -w(x, t) - (PI * x[1]).sin() * c,
                0.0,
            ]
        }),
        exact_h: Box::new(move |x, t| [-sqrt2 * w(x, t), 0.0, 0.0]),
        dp_dt: Box::new(|x, t| PI * ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).cos()),
        de_dt: Box::new(move |x, t| {
            let s = PI * (PI * t).sin();
            [
                sqrt2 * PI * wc(x, t) + (PI * x[0]).sin() * s,
                -sqrt2 * PI * wc(x, t) + (PI * x[1]).sin() * s,
                0.0,
            ]
        }),
        dh_dt: Box::new(move |x, t| [-2.0 * PI * wc(x, t), 0.0, 0.0]),
        grad_p: Box::new(|x, t| {
            let s = (PI * t).sin();
            [-PI * (PI * x[0]).sin() * s, -PI * (PI * x[1]).sin() * s, 0.0]
        }),
        div_eps_e: Box::new(|x, t| {
            -PI * ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).cos()
        }),
        curl_e: Box::new(move |x, t| [2.0 * PI * wc(x, t), 0.0, 0.0]),
        curl_h: Box::new(move |x, t| {
            [sqrt2 * PI * wc(x, t), -sqrt2 * PI * wc(x, t), 0.0]
        }),
        f_p: zero_scalar(),
        f_e: zero_vector(),
        f_h: zero_vector(),
        exact_energy: Box::new(|_| 3.0),
        energy_parts: Box::new(|t| {
            let s2 = (PI * t).sin().powi(2);
            [s2, 2.0 - s2, 1.0]
        }),
    }
}

/// 3D extension of the traveling-wave problem, constant in z.
fn example4() -> ProblemSpec {
    let base = example3();
    let sqrt2 = 2f64.sqrt();
    let w = move |x: &[f64; 3], t: f64| (PI * (sqrt2 * t - x[0] - x[1])).sin();
    let wc = move |x: &[f64; 3], t: f64| (PI * (sqrt2 * t - x[0] - x[1])).cos();
    ProblemSpec {
        id: "example4",
        dim: 3,
        exact_h: Box::new(move |x, t| [0.0, 0.0, -sqrt2 * w(x, t)]),
        dh_dt: Box::new(move |x, t| [0.0, 0.0, -2.0 * PI * wc(x, t)]),
        curl_e: Box::new(move |x, t| [0.0, 0.0, 2.0 * PI * wc(x, t)]),
        ..base
    }
}

/// 2D variant of the traveling-wave problem with unit-scale standing parts
/// and oscillating total energy; runs to t = 3.14.
fn example5() -> ProblemSpec {
    let sqrt2 = 2f64.sqrt();
    let w = move |x: &[f64; 3], t: f64| (PI * (sqrt2 * t - x[0] - x[1])).sin();
    let wc = move |x: &[f64; 3], t: f64| (PI * (sqrt2 * t - x[0] - x[1])).cos();
    let sin2 = 2f64.sin();
    let cos2 = 2f64.cos();
    ProblemSpec {
        id: "example5",
        dim: 2,
        eps: 1.0,
        mu: 1.0,
        t_min: 0.0,
        t_max: 3.14,
        homogeneous_bc: false,
        has_forcing: false,
        exact_p: Box::new(|x, t| (x[0].cos() + x[1].cos()) * t.sin()),
        exact_e: Box::new(move |x, t| {
            let c = t.cos();
            [w(x, t) - x[0].sin() * c, -w(x, t) - x[1].sin() * c, 0.0]
        }),
        exact_h: Box::new(move |x, t| [-sqrt2 * w(x, t), 0.0, 0.0]),
        dp_dt: Box::new(|x, t| (x[0].cos() + x[1].cos()) * t.cos()),
        de_dt: Box::new(move |x, t| {
            let s = t.sin();
            [
                sqrt2 * PI * wc(x, t) + x[0].sin() * s,
                -sqrt2 * PI * wc(x, t) + x[1].sin() * s,
                0.0,
            ]
        }),
        dh_dt: Box::new(move |x, t| [-2.0 * PI * wc(x, t), 0.0, 0.0]),
        grad_p: Box::new(|x, t| {
            let s = t.sin();
            [-x[0].sin() * s, -x[1].sin() * s, 0.0]
        }),
        div_eps_e: Box::new(|x, t| -(x[0].cos() + x[1].cos()) * t.cos()),
        curl_e: Box::new(move |x, t| [2.0 * PI * wc(x, t), 0.0, 0.0]),
        curl_h: Box::new(move |x, t| {
            [sqrt2 * PI * wc(x, t), -sqrt2 * PI * wc(x, t), 0.0]
        }),
        f_p: zero_scalar(),
        f_e: zero_vector(),
        f_h: zero_vector(),
        exact_energy: Box::new(move |t| {
            3.0 - sin2 / 2.0 + (1.0 + sin2 - cos2) * t.sin().powi(2)
        }),
        energy_parts: Box::new(move |t| {
            let s2 = t.sin().powi(2);
            let c2 = t.cos().powi(2);
            [
                (2.0 + sin2 / 2.0 - cos2) * s2,
                1.0 + (1.0 - sin2 / 2.0) * c2,
                1.0,
            ]
        }),
    }
}

/// 3D standing wave with unit-scale trigonometry, eps = 2, and oscillating
/// total energy; runs to t = 3.
fn example6() -> ProblemSpec {
    let e_amp = |x: &[f64; 3]| {
        [
            x[1].sin() * x[2].sin(),
            x[0].sin() * x[2].sin(),
            x[0].sin() * x[1].sin(),
        ]
    };
    let h_amp = |x: &[f64; 3]| {
        [
            x[0].sin() * (x[2].cos() - x[1].cos()),
            x[1].sin() * (x[0].cos() - x[2].cos()),
            x[2].sin() * (x[1].cos() - x[0].cos()),
        ]
    };
    let sin2 = 2f64.sin();
    let cos2 = 2f64.cos();
    let a6 = 3.0 / 8.0 * (2.0 - sin2).powi(2);
    let b6 = 3.0 / 4.0 * (2.0 - sin2) * (sin2 / 2.0 + cos2);
    ProblemSpec {
        id: "example6",
        dim: 3,
        eps: 2.0,
        mu: 1.0,
        t_min: 0.0,
        t_max: 3.0,
        homogeneous_bc: false,
        has_forcing: false,
        exact_p: zero_scalar(),
        exact_e: Box::new(move |x, t| {
            let a = e_amp(x);
            let c = t.cos();
            [a[0] * c, a[1] * c, a[2] * c]
        }),
        exact_h: Box::new(move |x, t| {
            let a = h_amp(x);
            let s = t.sin();
            [a[0] * s, a[1] * s, a[2] * s]
        }),
        dp_dt: zero_scalar(),
        de_dt: Box::new(move |x, t| {
            let a = e_amp(x);
            let s = -t.sin();
            [a[0] * s, a[1] * s, a[2] * s]
        }),
        dh_dt: Box::new(move |x, t| {
            let a = h_amp(x);
            let c = t.cos();
            [a[0] * c, a[1] * c, a[2] * c]
        }),
        grad_p: zero_vector(),
        div_eps_e: zero_scalar(),
        curl_e: Box::new(move |x, t| {
            let a = h_amp(x);
            let c = -t.cos();
            [a[0] * c, a[1] * c, a[2] * c]
        }),
        curl_h: Box::new(move |x, t| {
            let a = e_amp(x);
            let s = -2.0 * t.sin();
            [a[0] * s, a[1] * s, a[2] * s]
        }),
        f_p: zero_scalar(),
        f_e: zero_vector(),
        f_h: zero_vector(),
        exact_energy: Box::new(move |t| a6 * t.cos().powi(2) + b6 * t.sin().powi(2)),
        energy_parts: Box::new(move |t| {
            [0.0, a6 * t.cos().powi(2), b6 * t.sin().powi(2)]
        }),
    }
}

/// A synthetic smooth problem with nonzero forcing and nonhomogeneous
/// traces, for exercising every term of the steppers against independent
/// solvers. Not part of the benchmark set.
pub fn manufactured_problem(dim: usize) -> ProblemSpec {
    assert!(dim == 2 || dim == 3);
    let eps = 1.5;
    let mu = 2.0;
    if dim == 2 {
        ProblemSpec {
            id: "manufactured2",
            dim: 2,
            eps,
            mu,
            t_min: 0.0,
            t_max: 1.0,
            homogeneous_bc: false,
            has_forcing: true,
            exact_p: Box::new(|x, t| t.sin() * x[0] * x[1]),
            exact_e: Box::new(|x, t| [t.cos() * x[0] * x[0], t.sin() * x[1] * x[1], 0.0]),
            exact_h: Box::new(|x, t| [t.sin() * x[0] * x[1], 0.0, 0.0]),
            dp_dt: Box::new(|x, t| t.cos() * x[0] * x[1]),
            de_dt: Box::new(|x, t| [-t.sin() * x[0] * x[0], t.cos() * x[1] * x[1], 0.0]),
            dh_dt: Box::new(|x, t| [t.cos() * x[0] * x[1], 0.0, 0.0]),
            grad_p: Box::new(|x, t| [t.sin() * x[1], t.sin() * x[0], 0.0]),
            div_eps_e: Box::new(move |x, t| eps * 2.0 * (x[0] * t.cos() + x[1] * t.sin())),
            curl_e: Box::new(|_, _| [0.0; 3]),
            curl_h: Box::new(|x, t| [t.sin() * x[0], -t.sin() * x[1], 0.0]),
            f_p: Box::new(move |x, t| {
                t.cos() * x[0] * x[1] + eps * 2.0 * (x[0] * t.cos() + x[1] * t.sin())
            }),
            f_e: Box::new(move |x, t| {
                [
                    t.sin() * x[1] - eps * t.sin() * x[0] * x[0] - t.sin() * x[0],
                    t.sin() * x[0] + eps * t.cos() * x[1] * x[1] + t.sin() * x[1],
                    0.0,
                ]
            }),
            f_h: Box::new(move |x, t| [mu * t.cos() * x[0] * x[1], 0.0, 0.0]),
            exact_energy: Box::new(move |t| {
                t.sin().powi(2) / (eps * 9.0) + eps / 5.0 + mu * t.sin().powi(2) / 9.0
            }),
            energy_parts: Box::new(move |t| {
                [
                    t.sin().powi(2) / (eps * 9.0),
                    eps / 5.0,
                    mu * t.sin().powi(2) / 9.0,
                ]
            }),
        }
    } else {
        ProblemSpec {
            id: "manufactured3",
            dim: 3,
            eps,
            mu,
            t_min: 0.0,
            t_max: 1.0,
            homogeneous_bc: false,
            has_forcing: true,
            exact_p: Box::new(|x, t| t.sin() * x[0] * x[1] * x[2]),
            exact_e: Box::new(|x, t| {
                [t.cos() * x[0] * x[0], t.sin() * x[1] * x[1], t.cos() * x[2] * x[2]]
            }),
            exact_h: Box::new(|x, t| {
                [t.sin() * x[1] * x[2], t.sin() * x[2] * x[0], t.sin() * x[0] * x[1]]
            }),
            dp_dt: Box::new(|x, t| t.cos() * x[0] * x[1] * x[2]),
            de_dt: Box::new(|x, t| {
                [-t.sin() * x[0] * x[0], t.cos() * x[1] * x[1], -t.sin() * x[2] * x[2]]
            }),
            dh_dt: Box::new(|x, t| {
                [t.cos() * x[1] * x[2], t.cos() * x[2] * x[0], t.cos() * x[0] * x[1]]
            }),
            grad_p: Box::new(|x, t| {
                [
                    t.sin() * x[1] * x[2],
                    t.sin() * x[0] * x[2],
                    t.sin() * x[0] * x[1],
                ]
            }),
            div_eps_e: Box::new(move |x, t| {
                eps * 2.0 * (x[0] * t.cos() + x[1] * t.sin() + x[2] * t.cos())
            }),
            curl_e: Box::new(|_, _| [0.0; 3]),
            curl_h: Box::new(|_, _| [0.0; 3]),
            f_p: Box::new(move |x, t| {
                t.cos() * x[0] * x[1] * x[2]
                    + eps * 2.0 * (x[0] * t.cos() + x[1] * t.sin() + x[2] * t.cos())
            }),
            f_e: Box::new(move |x, t| {
                [
                    t.sin() * x[1] * x[2] - eps * t.sin() * x[0] * x[0],
                    t.sin() * x[0] * x[2] + eps * t.cos() * x[1] * x[1],
                    t.sin() * x[0] * x[1] - eps * t.sin() * x[2] * x[2],
                ]
            }),
            f_h: Box::new(move |x, t| {
                [
                    mu * t.cos() * x[1] * x[2],
                    mu * t.cos() * x[2] * x[0],
                    mu * t.cos() * x[0] * x[1],
                ]
            }),
            exact_energy: Box::new(move |t| {
                t.sin().powi(2) / (eps * 27.0)
                    + eps * (2.0 * t.cos().powi(2) + t.sin().powi(2)) / 5.0
                    + mu * t.sin().powi(2) / 3.0
            }),
            energy_parts: Box::new(move |t| {
                [
                    t.sin().powi(2) / (eps * 27.0),
                    eps * (2.0 * t.cos().powi(2) + t.sin().powi(2)) / 5.0,
                    mu * t.sin().powi(2) / 3.0,
                ]
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_unit_cube, generate_unit_square};
    use crate::whitney::quadrature_rule;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn all_problems() -> Vec<ProblemSpec> {
        let mut v: Vec<ProblemSpec> =
            problem_ids().iter().map(|id| get_problem(id).unwrap()).collect();
        v.push(manufactured_problem(2));
        v.push(manufactured_problem(3));
        v
    }

    fn sample_points(p: &ProblemSpec, n: usize) -> Vec<([f64; 3], f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        (0..n)
            .map(|_| {
                let mut x = [0.0; 3];
                for d in 0..p.dim {
                    x[d] = rng.random_range(0.05..0.95);
                }
                let t = rng.random_range(p.t_min..p.t_max);
                (x, t)
            })
            .collect()
    }

    /// The defining identity of each problem: the closed-form derivative
    /// fields satisfy the three equations with the stored forcing.
    #[test]
    fn residuals_vanish_at_sample_points() {
        for p in all_problems() {
            let mut forcing_seen: f64 = 0.0;
            for (x, t) in sample_points(&p, 20) {
                forcing_seen = forcing_seen
                    .max((p.f_p)(&x, t).abs())
                    .max((p.f_e)(&x, t)[0].abs())
                    .max((p.f_h)(&x, t)[0].abs());
                let rp = (p.dp_dt)(&x, t) + (p.div_eps_e)(&x, t) - (p.f_p)(&x, t);
                assert!(rp.abs() < 1e-8, "{} p-residual {rp} at {x:?}, {t}", p.id);
                let gp = (p.grad_p)(&x, t);
                let de = (p.de_dt)(&x, t);
                let ch = (p.curl_h)(&x, t);
                let fe = (p.f_e)(&x, t);
                for axis in 0..p.dim {
                    let re = gp[axis] + p.eps * de[axis] - ch[axis] - fe[axis];
                    assert!(re.abs() < 1e-8, "{} E-residual {re}", p.id);
                }
                let dh = (p.dh_dt)(&x, t);
                let ce = (p.curl_e)(&x, t);
                let fh = (p.f_h)(&x, t);
                let ncomp = if p.dim == 2 { 1 } else { 3 };
                for axis in 0..ncomp {
                    let rh = p.mu * dh[axis] + ce[axis] - fh[axis];
                    assert!(rh.abs() < 1e-8, "{} H-residual {rh}", p.id);
                }
            }
            assert_eq!(p.has_forcing, forcing_seen > 1e-12, "{} forcing flag", p.id);
        }
    }

    /// Every derivative closure matches central differences of the fields.
    #[test]
    fn derivatives_match_finite_differences() {
        let d = 1e-5;
        for p in all_problems() {
            for (x, t) in sample_points(&p, 8) {
                let fd_t_scalar =
                    ((p.exact_p)(&x, t + d) - (p.exact_p)(&x, t - d)) / (2.0 * d);
                assert!((fd_t_scalar - (p.dp_dt)(&x, t)).abs() < 1e-7, "{} dp_dt", p.id);
                for axis in 0..3 {
                    let fd = ((p.exact_e)(&x, t + d)[axis] - (p.exact_e)(&x, t - d)[axis])
                        / (2.0 * d);
                    assert!((fd - (p.de_dt)(&x, t)[axis]).abs() < 1e-7, "{} de_dt", p.id);
                    let fd = ((p.exact_h)(&x, t + d)[axis] - (p.exact_h)(&x, t - d)[axis])
                        / (2.0 * d);
                    assert!((fd - (p.dh_dt)(&x, t)[axis]).abs() < 1e-7, "{} dh_dt", p.id);
                }
                let shift = |x: &[f64; 3], axis: usize, by: f64| {
                    let mut y = *x;
                    y[axis] += by;
                    y
                };
                // grad p and div(eps E).
                let mut div = 0.0;
                for axis in 0..p.dim {
                    let fd = ((p.exact_p)(&shift(&x, axis, d), t)
                        - (p.exact_p)(&shift(&x, axis, -d), t))
                        / (2.0 * d);
                    assert!((fd - (p.grad_p)(&x, t)[axis]).abs() < 1e-7, "{} grad_p", p.id);
                    div += p.eps
                        * ((p.exact_e)(&shift(&x, axis, d), t)[axis]
                            - (p.exact_e)(&shift(&x, axis, -d), t)[axis])
                        / (2.0 * d);
                }
                assert!((div - (p.div_eps_e)(&x, t)).abs() < 1e-6, "{} div_eps_e", p.id);
                // curl E and curl H under the 2D scalar-proxy convention.
                let pdx = |f: &VectorField, comp: usize, axis: usize| {
                    (f(&shift(&x, axis, d), t)[comp] - f(&shift(&x, axis, -d), t)[comp])
                        / (2.0 * d)
                };
                if p.dim == 2 {
                    let ce = pdx(&p.exact_e, 1, 0) - pdx(&p.exact_e, 0, 1);
                    assert!((ce - (p.curl_e)(&x, t)[0]).abs() < 1e-6, "{} curl_e", p.id);
                    let ch = [pdx(&p.exact_h, 0, 1), -pdx(&p.exact_h, 0, 0)];
                    for axis in 0..2 {
                        assert!(
                            (ch[axis] - (p.curl_h)(&x, t)[axis]).abs() < 1e-6,
                            "{} curl_h",
                            p.id
                        );
                    }
                } else {
                    for axis in 0..3 {
                        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
                        let ce = pdx(&p.exact_e, b, a) - pdx(&p.exact_e, a, b);
                        assert!((ce - (p.curl_e)(&x, t)[axis]).abs() < 1e-6, "{} curl_e", p.id);
                        let ch = pdx(&p.exact_h, b, a) - pdx(&p.exact_h, a, b);
                        assert!((ch - (p.curl_h)(&x, t)[axis]).abs() < 1e-6, "{} curl_h", p.id);
                    }
                }
            }
        }
    }

    /// The stored energy functions agree with quadrature of the fields.
    #[test]
    fn exact_energy_matches_quadrature() {
        for p in all_problems() {
            let (mesh, rule) = if p.dim == 2 {
                (generate_unit_square(4), quadrature_rule(2, 12))
            } else {
                (generate_unit_cube(2), quadrature_rule(3, 12))
            };
            for t in [p.t_min, 0.37, 1.0, p.t_max] {
                let mut parts = [0.0; 3];
                for c in 0..mesh.num_cells() {
                    let geom = crate::assembly::cell_geometry(&mesh, c);
                    for (pt, w) in rule.points.iter().zip(&rule.weights) {
                        let x = geom.point(pt);
                        let scale = w * geom.det_j;
                        let pv = (p.exact_p)(&x, t);
                        parts[0] += scale * pv * pv / p.eps;
                        let e = (p.exact_e)(&x, t);
                        parts[1] += scale * p.eps * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
                        let h = (p.exact_h)(&x, t);
                        parts[2] += scale * p.mu * (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]);
                    }
                }
                let expect = (p.energy_parts)(t);
                for i in 0..3 {
                    assert!(
                        (parts[i] - expect[i]).abs() < 1e-6,
                        "{} part {i} at t = {t}: {} vs {}",
                        p.id,
                        parts[i],
                        expect[i]
                    );
                }
                let total: f64 = parts.iter().sum();
                assert!(
                    (total - (p.exact_energy)(t)).abs() < 1e-6,
                    "{} total at t = {t}",
                    p.id
                );
            }
        }
    }

    /// Pinned values of the oscillating energies.
    #[test]
    fn oscillating_energy_values() {
        let p5 = get_problem("example5").unwrap();
        for (t, expect) in [
            (0.0, 2.5453512865871590),
            (1.0, 4.1919365551582217),
            (PI / 2.0, 4.8707955499599835),
            (2.0, 4.4680793224873350),
        ] {
            assert!(
                ((p5.exact_energy)(t) - expect).abs() < 1e-12,
                "example5 energy at t = {t}"
            );
        }
        let p6 = get_problem("example6").unwrap();
        for (t, expect) in [
            (0.0, 0.44611203867340465),
            (0.4, 0.38323684242456391),
            (1.0, 0.15253313993344841),
            (PI / 2.0, 0.031495572127093550),
            (2.0, 0.10329810116874541),
        ] {
            assert!(
                ((p6.exact_energy)(t) - expect).abs() < 1e-12,
                "example6 energy at t = {t}"
            );
        }
    }

    /// Problems marked homogeneous really have vanishing essential traces.
    #[test]
    fn homogeneous_flags_are_accurate() {
        for p in all_problems() {
            let mut worst: f64 = 0.0;
            for i in 0..20 {
                let s = i as f64 / 19.0;
                let t = p.t_min + 0.6 * (p.t_max - p.t_min) * (i as f64 + 0.3) / 20.0;
                // Walk each boundary facet of the box.
                let faces: Vec<([f64; 3], usize)> = if p.dim == 2 {
                    vec![
                        ([s, 0.0, 0.0], 1),
                        ([s, 1.0, 0.0], 1),
                        ([0.0, s, 0.0], 0),
                        ([1.0, s, 0.0], 0),
                    ]
                } else {
                    vec![
                        ([0.0, s, 0.4], 0),
                        ([1.0, s, 0.4], 0),
                        ([s, 0.0, 0.4], 1),
                        ([s, 1.0, 0.4], 1),
                        ([s, 0.4, 0.0], 2),
                        ([s, 0.4, 1.0], 2),
                    ]
                };
                for (x, normal_axis) in faces {
                    worst = worst.max((p.exact_p)(&x, t).abs());
                    let e = (p.exact_e)(&x, t);
                    let h = (p.exact_h)(&x, t);
                    for axis in 0..p.dim {
                        if axis != normal_axis {
                            worst = worst.max(e[axis].abs());
                        }
                    }
                    if p.dim == 3 {
                        worst = worst.max(h[normal_axis].abs());
                    }
                }
            }
            if p.homogeneous_bc {
                assert!(worst < 1e-12, "{} claims homogeneous but trace {worst}", p.id);
            } else {
                assert!(worst > 1e-3, "{} claims nonhomogeneous but trace {worst}", p.id);
            }
        }
    }

    #[test]
    fn lookup_and_energy_op() {
        assert!(get_problem("example0").is_err());
        assert!(get_problem("example3").is_ok());
        assert!((exact_energy("example1", 0.77).unwrap() - 1.0).abs() < 1e-15);
        for id in problem_ids() {
            let p = get_problem(id).unwrap();
            assert_eq!(p.id, id);
            assert!(p.t_max > p.t_min);
        }
    }
}
