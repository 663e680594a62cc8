//! Polynomials in the barycentric coordinates of a simplex.
//!
//! A `BaryPoly` over a d-simplex is a finite sum of monomials
//! `c * lambda_0^{a_0} ... lambda_d^{a_d}` stored with canonicalized exponent
//! keys. No normal form modulo the relation `sum lambda_i = 1` is attempted;
//! two representations are compared by evaluation, not by coefficients.

use std::collections::BTreeMap;

/// Maximum number of barycentric variables (tetrahedron: 4).
pub const MAX_VARS: usize = 4;

/// Sparse polynomial in barycentric coordinates `lambda_0 .. lambda_{nvars-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaryPoly {
    nvars: usize,
    terms: BTreeMap<[u8; MAX_VARS], f64>,
}

impl BaryPoly {
    /// The zero polynomial in `nvars` barycentric variables.
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars >= 1 && nvars <= MAX_VARS);
        Self { nvars, terms: BTreeMap::new() }
    }

    /// The constant polynomial `c`.
    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        if c != 0.0 {
            p.terms.insert([0; MAX_VARS], c);
        }
        p
    }

    /// The coordinate polynomial `lambda_i`.
    pub fn lambda(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut exps = [0u8; MAX_VARS];
        exps[i] = 1;
        Self::monomial(nvars, exps, 1.0)
    }

    /// The monomial `c * prod_i lambda_i^{exps[i]}`.
    pub fn monomial(nvars: usize, exps: [u8; MAX_VARS], c: f64) -> Self {
        assert!(exps[nvars..].iter().all(|&e| e == 0));
        let mut p = Self::zero(nvars);
        if c != 0.0 {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Number of barycentric variables.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// True if no terms are stored.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Adds `s * other` in place.
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        assert_eq!(self.nvars, other.nvars);
        for (&exps, &c) in &other.terms {
            let entry = self.terms.entry(exps).or_insert(0.0);
            *entry += s * c;
            if *entry == 0.0 {
                self.terms.remove(&exps);
            }
        }
    }

    /// Returns `self * s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut p = self.clone();
        if s == 0.0 {
            p.terms.clear();
        } else {
            for c in p.terms.values_mut() {
                *c *= s;
            }
        }
        p
    }

    /// Returns the product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut p = Self::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let mut e = [0u8; MAX_VARS];
                for i in 0..MAX_VARS {
                    e[i] = ea[i] + eb[i];
                }
                let entry = p.terms.entry(e).or_insert(0.0);
                *entry += ca * cb;
                if *entry == 0.0 {
                    p.terms.remove(&e);
                }
            }
        }
        p
    }

    /// Partial derivative with respect to `lambda_i`.
    pub fn dlambda(&self, i: usize) -> Self {
        assert!(i < self.nvars);
        let mut p = Self::zero(self.nvars);
        for (&exps, &c) in &self.terms {
            if exps[i] == 0 {
                continue;
            }
            let mut e = exps;
            e[i] -= 1;
            let entry = p.terms.entry(e).or_insert(0.0);
            *entry += c * exps[i] as f64;
            if *entry == 0.0 {
                p.terms.remove(&e);
            }
        }
        p
    }

    /// Evaluates at barycentric coordinates `lam` (length >= `nvars`).
    pub fn eval(&self, lam: &[f64]) -> f64 {
        debug_assert!(lam.len() >= self.nvars);
        let mut acc = 0.0;
        for (&exps, &c) in &self.terms {
            let mut m = c;
            for i in 0..self.nvars {
                for _ in 0..exps[i] {
                    m *= lam[i];
                }
            }
            acc += m;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lam3(a: f64, b: f64) -> [f64; 4] {
        [1.0 - a - b, a, b, 0.0]
    }

    #[test]
    fn constant_and_lambda_evaluate() {
        let c = BaryPoly::constant(3, 2.5);
        let l1 = BaryPoly::lambda(3, 1);
        assert_eq!(c.eval(&lam3(0.2, 0.3)), 2.5);
        assert_eq!(l1.eval(&lam3(0.2, 0.3)), 0.2);
    }

    #[test]
    fn product_and_degree() {
        let l0 = BaryPoly::lambda(3, 0);
        let l2 = BaryPoly::lambda(3, 2);
        let p = l0.mul(&l2);
        assert_eq!(p.degree(), 2);
        let lam = lam3(0.25, 0.5);
        assert!((p.eval(&lam) - lam[0] * lam[2]).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_product() {
        // d/dl0 (l0^2 l1) = 2 l0 l1
        let l0 = BaryPoly::lambda(4, 0);
        let l1 = BaryPoly::lambda(4, 1);
        let p = l0.mul(&l0).mul(&l1);
        let d = p.dlambda(0);
        let lam = [0.3, 0.4, 0.2, 0.1];
        assert!((d.eval(&lam) - 2.0 * lam[0] * lam[1]).abs() < 1e-15);
        assert!(p.dlambda(3).is_zero(), "derivative in an unused variable");
    }

    #[test]
    fn add_scaled_cancels_to_zero() {
        let l1 = BaryPoly::lambda(4, 1);
        let mut p = l1.clone();
        p.add_scaled(&l1, -1.0);
        assert!(p.is_zero());
        assert_eq!(p.eval(&[0.1, 0.2, 0.3, 0.4]), 0.0);
    }

    proptest! {
        #[test]
        fn mul_matches_pointwise(a in 0.0..0.5f64, b in 0.0..0.5f64,
                                 c1 in -3.0..3.0f64, c2 in -3.0..3.0f64) {
            let mut p = BaryPoly::lambda(3, 0).scaled(c1);
            p.add_scaled(&BaryPoly::lambda(3, 2), c2);
            let q = BaryPoly::lambda(3, 1);
            let prod = p.mul(&q);
            let lam = lam3(a, b);
            let expect = p.eval(&lam) * q.eval(&lam);
            prop_assert!((prod.eval(&lam) - expect).abs() <= 1e-12);
        }

        #[test]
        fn derivative_matches_finite_difference(a in 0.05..0.4f64, b in 0.05..0.4f64) {
            // p = l0 l1 + l1^2 l2; central difference in the l1 slot.
            let l0 = BaryPoly::lambda(3, 0);
            let l1 = BaryPoly::lambda(3, 1);
            let l2 = BaryPoly::lambda(3, 2);
            let mut p = l0.mul(&l1);
            p.add_scaled(&l1.mul(&l1).mul(&l2), 1.0);
            let d = p.dlambda(1);
            let h = 1e-6;
            let lamp = [1.0 - a - b, a + h, b, 0.0];
            let lamm = [1.0 - a - b, a - h, b, 0.0];
            let fd = (p.eval(&lamp) - p.eval(&lamm)) / (2.0 * h);
            prop_assert!((d.eval(&lam3(a, b)) - fd).abs() <= 1e-8);
        }
    }
}
