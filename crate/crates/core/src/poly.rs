//! Multivariate polynomials with real coefficients, keyed by exponent vectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(vec![0; dim], c)
    }

    pub fn monomial(exponents: Vec<u32>, c: f64) -> Self {
        let mut p = Polynomial::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// `x_i` (0-based axis).
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Polynomial::zero(dim);
        for (e, c) in terms {
            assert_eq!(e.len(), dim, "exponent length must equal dimension");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, f64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree if every term has the same total degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let d = degs.next()?;
        degs.all(|x| x == d).then_some(d)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::from_terms(self.dim, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                p.add_term(ea.iter().zip(eb).map(|(a, b)| a + b).collect(), ca * cb);
            }
        }
        p
    }

    pub fn derivative(&self, axis: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut f = e.clone();
                f[axis] -= 1;
                p.add_term(f, c * e[axis] as f64);
            }
        }
        p
    }

    pub fn laplacian(&self) -> Polynomial {
        (0..self.dim)
            .map(|i| self.derivative(i).derivative(i))
            .fold(Polynomial::zero(self.dim), |acc, q| acc.add(&q))
    }

    pub fn laplacian_pow(&self, k: usize) -> Polynomial {
        (0..k).fold(self.clone(), |p, _| p.laplacian())
    }

    /// `∫_{S^{N−1}} P²` over the unit sphere, exact up to rounding.
    pub fn sphere_norm_sq(&self) -> f64 {
        self.mul(self).terms.iter().map(|(e, c)| c * sphere_monomial_integral(e)).sum()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// `∫_{S^{N−1}} x^α dS = 2∏Γ(β_i)/Γ(Σβ_i)` with `β_i = (α_i+1)/2`, zero for odd `α_i`.
pub fn sphere_monomial_integral(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let betas: Vec<f64> = alpha.iter().map(|&a| (a as f64 + 1.0) / 2.0).collect();
    let num: f64 = betas.iter().map(|&b| libm::lgamma(b)).sum();
    2.0 * (num - libm::lgamma(betas.iter().sum())).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_integrals() {
        assert!((sphere_monomial_integral(&[0, 0, 0]) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_monomial_integral(&[2, 0, 0]) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(sphere_monomial_integral(&[1, 0, 0]), 0.0);
        let x = Polynomial::coordinate(5, 0);
        let s4 = 8.0 * PI * PI / 3.0;
        assert!((x.sphere_norm_sq() - s4 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_quadratics() {
        let p = Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], -1.0)]);
        assert!(p.laplacian().is_zero());
        let r2 = Polynomial::from_terms(3, [(vec![2, 0, 0], 1.0), (vec![0, 2, 0], 1.0), (vec![0, 0, 2], 1.0)]);
        assert_eq!(r2.laplacian(), Polynomial::constant(3, 6.0));
        assert_eq!(r2.homogeneous_degree(), Some(2));
        assert!((r2.eval(&[1.0, 2.0, 2.0]) - 9.0).abs() < 1e-15);
    }
}
