//! Quadrature on reference simplices via conical (Duffy) product rules.
//!
//! The triangle and tetrahedron rules are tensor products of Gauss-Legendre
//! and Gauss-Jacobi rules under the collapsed-coordinate map, so a rule of
//! requested degree `q` uses `(floor(q/2)+1)^dim` points and integrates all
//! polynomials of total degree `q` exactly.

use nalgebra::DMatrix;

/// Quadrature rule on the reference d-simplex, points in barycentric form.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Simplex dimension (2 or 3).
    pub dim: usize,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
    /// Barycentric coordinates of each node (trailing entries zero).
    pub points: Vec<[f64; 4]>,
    /// Weights; they sum to the reference simplex measure `1/d!`.
    pub weights: Vec<f64>,
}

/// Builds a rule exact for total degree `degree` on the reference d-simplex.
pub fn quadrature_rule(dim: usize, degree: usize) -> QuadratureRule {
    let m = degree / 2 + 1;
    match dim {
        2 => {
            let (xu, wu) = gauss_jacobi_01(m, 0.0);
            let (xv, wv) = gauss_jacobi_01(m, 1.0);
            let mut points = Vec::with_capacity(m * m);
            let mut weights = Vec::with_capacity(m * m);
            for (v, bv) in xv.iter().zip(&wv) {
                for (u, bu) in xu.iter().zip(&wu) {
                    let x = u * (1.0 - v);
                    let y = *v;
                    points.push([1.0 - x - y, x, y, 0.0]);
                    weights.push(bu * bv);
                }
            }
            QuadratureRule { dim, degree, points, weights }
        }
        3 => {
            let (xu, wu) = gauss_jacobi_01(m, 0.0);
            let (xv, wv) = gauss_jacobi_01(m, 1.0);
            let (xw, ww) = gauss_jacobi_01(m, 2.0);
            let mut points = Vec::with_capacity(m * m * m);
            let mut weights = Vec::with_capacity(m * m * m);
            for (w, bw) in xw.iter().zip(&ww) {
                for (v, bv) in xv.iter().zip(&wv) {
                    for (u, bu) in xu.iter().zip(&wu) {
                        let x = u * (1.0 - v) * (1.0 - w);
                        let y = v * (1.0 - w);
                        let z = *w;
                        points.push([1.0 - x - y - z, x, y, z]);
                        weights.push(bu * bv * bw);
                    }
                }
            }
            QuadratureRule { dim, degree, points, weights }
        }
        _ => panic!("quadrature_rule: dim must be 2 or 3, got {dim}"),
    }
}

/// Gauss-Legendre rule with `n` points on [0, 1] (weight 1).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi_01(n, 0.0)
}

/// Gauss-Jacobi rule with `n` points on [0, 1] for the weight `(1-x)^alpha`.
///
/// Computed by the Golub-Welsch eigenvalue method from the three-term
/// recurrence of the monic Jacobi polynomials on [-1, 1] (beta = 0), then
/// mapped to [0, 1].
fn gauss_jacobi_01(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let a = alpha;
    // Monic recurrence coefficients for weight (1-x)^a on [-1, 1].
    let diag = |k: usize| -> f64 {
        let kf = k as f64;
        if k == 0 {
            -a / (a + 2.0)
        } else {
            (-a * a) / ((2.0 * kf + a) * (2.0 * kf + a + 2.0))
        }
    };
    let offdiag_sq = |k: usize| -> f64 {
        let kf = k as f64;
        4.0 * kf * (kf + a) * kf * (kf + a)
            / ((2.0 * kf + a).powi(2) * (2.0 * kf + a + 1.0) * (2.0 * kf + a - 1.0))
    };
    // Total weight: 2^(a+1) * B(a+1, 1) = 2^(a+1) / (a+1).
    let mu0 = 2f64.powf(a + 1.0) / (a + 1.0);

    let mut jac = DMatrix::zeros(n, n);
    for k in 0..n {
        jac[(k, k)] = diag(k);
        if k + 1 < n {
            let b = offdiag_sq(k + 1).sqrt();
            jac[(k, k + 1)] = b;
            jac[(k + 1, k)] = b;
        }
    }
    let eig = jac.symmetric_eigen();
    let mut nodes_weights: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let x = eig.eigenvalues[j];
            let v0 = eig.eigenvectors[(0, j)];
            (x, mu0 * v0 * v0)
        })
        .collect();
    nodes_weights.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    // Map [-1, 1] with weight (1-x)^a onto [0, 1] with weight (1-t)^a.
    let scale = 2f64.powf(a + 1.0);
    let nodes = nodes_weights.iter().map(|&(x, _)| 0.5 * (x + 1.0)).collect();
    let weights = nodes_weights.iter().map(|&(_, w)| w / scale).collect();
    (nodes, weights)
}
