//! Radial models on balls and annuli `{ε < |x| < 1}` in any dimension.
//!
//! Functions are `f(r)·Y_ℓ` with `Y_ℓ` a spherical harmonic of degree ℓ whose
//! mean square over the sphere is 1, so `∫_{S^{N−1}} Y² = |S^{N−1}|`. The
//! radial operator is `L_ℓ f = f'' + (N−1)f'/r − ℓ(ℓ+N−2)f/r²`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use crate::bessel::bessel_zero;
use crate::bessel::clamped_ball_root;
use crate::error::{invalid, Error, Result};
use crate::grid::sphere_area;
use crate::operator::BcKind;
use crate::quadrature::{gauss_legendre_on, legendre_table};

/// Whole-space capacity of the closed unit ball with data 1.
pub fn ball_capacity_exact(m: usize, n: usize) -> Result<f64> {
    if !(m == 1 || m == 2) {
        return invalid("ball capacity closed form covers m = 1, 2");
    }
    if n <= 2 * m {
        return invalid(format!("whole-space {m}-capacity vanishes for N = {n} <= 2m"));
    }
    let nf = n as f64;
    let s = sphere_area(n);
    Ok(match m {
        1 => (nf - 2.0) * s,
        _ => (nf - 2.0).powi(2) * (nf - 4.0) * s,
    })
}

/// `κ = ℓ(ℓ+N−2)`.
fn kappa(n: usize, ell: usize) -> f64 {
    (ell * (ell + n - 2)) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub m: usize,
    pub n: usize,
    pub ell: usize,
    pub inner: f64,
    pub outer: f64,
    /// `f(inner)`.
    pub value: f64,
    /// `f'(inner)` (ignored for m = 1).
    pub slope: f64,
    pub outer_bc: BcKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialCapacity {
    pub value: f64,
    pub exponents: Vec<f64>,
    /// Coefficients of `r^a` in the minimizer.
    pub coefficients: Vec<f64>,
}

impl RadialCapacity {
    pub fn profile(&self, r: f64) -> f64 {
        self.exponents.iter().zip(&self.coefficients).map(|(a, c)| c * r.powf(*a)).sum()
    }
}

/// `m`-capacity of `B̄_ε` in `B_1` with data `(v, s)` at `r = ε`, ℓ = 0.
pub fn annulus_weighted_capacity(
    m: usize,
    n: usize,
    eps: f64,
    v: f64,
    s: f64,
    outer_bc: BcKind,
) -> Result<RadialCapacity> {
    annulus_capacity(&AnnulusSpec {
        m,
        n,
        ell: 0,
        inner: eps,
        outer: 1.0,
        value: v,
        slope: s,
        outer_bc,
    })
}

/// Minimizes `|S^{N−1}|∫(L_ℓ f)² r^{N−1}dr` (m = 2) or
/// `|S^{N−1}|∫(f'² + κf²/r²) r^{N−1}dr` (m = 1) over the annulus, in closed
/// form over the basis of radial solutions `r^a`.
pub fn annulus_capacity(spec: &AnnulusSpec) -> Result<RadialCapacity> {
    let AnnulusSpec {
        m,
        n,
        ell,
        inner: a,
        outer: b,
        value,
        slope,
        outer_bc,
    } = *spec;
    if !(0.0 < a && a < b) {
        return invalid("annulus needs 0 < inner < outer");
    }
    if n < 2 {
        return invalid("radial capacity needs N >= 2");
    }
    let nf = n as f64;
    let l = ell as f64;
    let exponents: Vec<f64> = match m {
        1 => vec![l, 2.0 - nf - l],
        2 => vec![l, l + 2.0, 2.0 - nf - l, 4.0 - nf - l],
        _ => return invalid("radial capacity covers m = 1, 2"),
    };
    for i in 0..exponents.len() {
        for j in 0..i {
            if exponents[i] == exponents[j] {
                return invalid(format!("logarithmic radial solutions for N = {n}, l = {ell}"));
            }
        }
    }
    if value == 0.0 && (m == 1 || slope == 0.0) {
        return Ok(RadialCapacity {
            value: 0.0,
            exponents,
            coefficients: vec![0.0; 2 * m],
        });
    }
    let k = kappa(n, ell);
    let mu: Vec<f64> = exponents.iter().map(|&e| e * (e + nf - 2.0) - k).collect();
    // scale r^e to be O(1) where it is largest on [a, b]
    let scale: Vec<f64> = exponents.iter().map(|&e| if e < 0.0 { a.powf(-e) } else { b.powf(-e) }).collect();
    let dim = exponents.len();
    let mut sys = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    for (j, (&e, &sc)) in exponents.iter().zip(&scale).enumerate() {
        sys[(0, j)] = sc * a.powf(e);
        sys[(1, j)] = sc * if m == 2 { e * a.powf(e - 1.0) } else { b.powf(e) };
        if m == 2 {
            sys[(2, j)] = sc * b.powf(e);
            sys[(3, j)] = sc
                * match outer_bc {
                    BcKind::Dirichlet => e * b.powf(e - 1.0),
                    BcKind::Navier => mu[j] * b.powf(e - 2.0),
                };
        }
    }
    rhs[0] = value;
    if m == 2 {
        rhs[1] = slope;
    }
    let c = sys
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Invalid("singular radial capacity system".into()))?;
    let coeff: Vec<f64> = (0..dim).map(|j| c[j] * scale[j]).collect();

    let power_integral = |p: f64| -> f64 {
        if (p + 1.0).abs() < 1e-12 {
            (b / a).ln()
        } else {
            (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
        }
    };
    let mut energy = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let (ei, ej) = (exponents[i], exponents[j]);
            let (ci, cj) = (c[i] * scale[i], c[j] * scale[j]);
            energy += match m {
                1 => ci * cj * (ei * ej + k) * power_integral(ei + ej - 2.0 + nf - 1.0),
                _ => ci * cj * mu[i] * mu[j] * power_integral(ei + ej - 4.0 + nf - 1.0),
            };
        }
    }
    Ok(RadialCapacity {
        value: sphere_area(n) * energy,
        exponents,
        coefficients: coeff,
    })
}

/// Whole-space capacity of `B̄_ρ` with data `(v, s)` for the profile on
/// `|x| = ρ`: the exterior minimizer lives in the span of the decaying
/// solutions `r^{2−N−ℓ}` (and `r^{4−N−ℓ}` for m = 2).
pub fn exterior_capacity(m: usize, n: usize, ell: usize, rho: f64, v: f64, s: f64) -> Result<RadialCapacity> {
    if !(rho > 0.0) {
        return invalid("exterior capacity needs rho > 0");
    }
    if !(m == 1 || m == 2) {
        return invalid("radial capacity covers m = 1, 2");
    }
    let nf = n as f64;
    let l = ell as f64;
    let exponents: Vec<f64> = match m {
        1 => vec![2.0 - nf - l],
        _ => vec![2.0 - nf - l, 4.0 - nf - l],
    };
    // energy integrand ~ r^{2a_max − 2m + N − 1} must be integrable at ∞
    let amax = exponents.iter().cloned().fold(f64::MIN, f64::max);
    if !(2.0 * amax - 2.0 * m as f64 + nf < 0.0) || (m == 2 && exponents[0] == exponents[1]) {
        return invalid(format!("no finite exterior capacity for m = {m}, N = {n}, l = {ell}"));
    }
    let k = kappa(n, ell);
    let coefficients: Vec<f64> = if m == 1 {
        vec![v * rho.powf(-exponents[0])]
    } else {
        let (a3, a4) = (exponents[0], exponents[1]);
        let sys = nalgebra::Matrix2::new(rho.powf(a3), rho.powf(a4), a3 * rho.powf(a3 - 1.0), a4 * rho.powf(a4 - 1.0));
        let c = sys
            .lu()
            .solve(&nalgebra::Vector2::new(v, s))
            .ok_or_else(|| Error::Invalid("singular exterior system".into()))?;
        vec![c[0], c[1]]
    };
    let tail = |p: f64| -rho.powf(p + 1.0) / (p + 1.0);
    let mu: Vec<f64> = exponents.iter().map(|&e| e * (e + nf - 2.0) - k).collect();
    let mut energy = 0.0;
    for i in 0..exponents.len() {
        for j in 0..exponents.len() {
            let (ei, ej) = (exponents[i], exponents[j]);
            let cc = coefficients[i] * coefficients[j];
            energy += match m {
                1 => cc * (ei * ej + k) * tail(ei + ej - 2.0 + nf - 1.0),
                _ => cc * mu[i] * mu[j] * tail(ei + ej - 4.0 + nf - 1.0),
            };
        }
    }
    Ok(RadialCapacity {
        value: sphere_area(n) * energy,
        exponents,
        coefficients,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub n: usize,
    pub m: usize,
    pub ell: usize,
    /// Hole radius ε; 0 for the unperturbed ball.
    pub inner_radius: f64,
    pub outer_bc: BcKind,
}

#[derive(Clone, Copy, Debug)]
pub struct RadialOptions {
    /// Polynomial degrees tried in turn.
    pub degrees: &'static [usize],
    /// Relative Cauchy change at which refinement stops.
    pub target: f64,
    /// Largest relative change accepted at the finest degree.
    pub accept: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            degrees: &[16, 32, 48, 64, 96],
            target: 1e-11,
            accept: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Geometry {
    /// `f = r^ℓ g(r²)`, `g = Σ c_i (1−r²)^b P_i(2r²−1)`.
    Ball,
    /// `f = Σ c_i t^m (1−t)^b P_i(2t−1)`, `r = ε^{1−t}`.
    Annulus { eps: f64 },
}

/// A radial eigenfunction profile `f(r)`, normalized so that
/// `|S^{N−1}|∫f² r^{N−1}dr = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    geometry: Geometry,
    n: usize,
    m: usize,
    ell: usize,
    b: i32,
    coefficients: Vec<f64>,
}

impl RadialProfile {
    /// Returns `(f, f', f'')` at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        match self.geometry {
            Geometry::Ball => {
                let rho = r * r;
                let (g, dg, ddg) = ball_basis_combo(&self.coefficients, self.b, rho);
                // h(r) = g(r²), f = r^ℓ h
                let h = g;
                let dh = 2.0 * r * dg;
                let ddh = 2.0 * dg + 4.0 * rho * ddg;
                let l = self.ell as i32;
                let lf = self.ell as f64;
                let rl = r.powi(l);
                let drl = if l == 0 { 0.0 } else { lf * r.powi(l - 1) };
                let ddrl = if l < 2 { 0.0 } else { lf * (lf - 1.0) * r.powi(l - 2) };
                (rl * h, drl * h + rl * dh, ddrl * h + 2.0 * drl * dh + rl * ddh)
            }
            Geometry::Annulus { eps } => {
                let big_l = -eps.ln();
                let t = 1.0 + r.ln() / big_l;
                let (f, ft, ftt) = annulus_basis_combo(&self.coefficients, self.m as i32, self.b, t);
                let fr = ft / (r * big_l);
                let frr = (ftt / (big_l * big_l) - ft / big_l) / (r * r);
                (f, fr, frr)
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    /// Leading coefficient `a` in `f(r) = a r^ℓ + O(r^{ℓ+2})` (ball only).
    pub fn leading_coefficient(&self) -> Option<f64> {
        match self.geometry {
            Geometry::Ball => Some(ball_basis_combo(&self.coefficients, self.b, 0.0).0),
            Geometry::Annulus { .. } => None,
        }
    }

    pub fn negated(&self) -> RadialProfile {
        RadialProfile {
            coefficients: self.coefficients.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn dimension(&self) -> usize {
        self.n
    }
}

fn ball_basis_combo(c: &[f64], b: i32, rho: f64) -> (f64, f64, f64) {
    let (p, dp, ddp) = legendre_table(c.len(), 2.0 * rho - 1.0);
    let (w, dw, ddw) = weight_factor(0, b, rho);
    let mut out = (0.0, 0.0, 0.0);
    for i in 0..c.len() {
        let (v, d, dd) = product(w, dw, ddw, p[i], 2.0 * dp[i], 4.0 * ddp[i]);
        out.0 += c[i] * v;
        out.1 += c[i] * d;
        out.2 += c[i] * dd;
    }
    out
}

fn annulus_basis_combo(c: &[f64], m: i32, b: i32, t: f64) -> (f64, f64, f64) {
    let (p, dp, ddp) = legendre_table(c.len(), 2.0 * t - 1.0);
    let (w, dw, ddw) = weight_factor(m, b, t);
    let mut out = (0.0, 0.0, 0.0);
    for i in 0..c.len() {
        let (v, d, dd) = product(w, dw, ddw, p[i], 2.0 * dp[i], 4.0 * ddp[i]);
        out.0 += c[i] * v;
        out.1 += c[i] * d;
        out.2 += c[i] * dd;
    }
    out
}

/// `t^a (1−t)^b` and its first two derivatives.
fn weight_factor(a: i32, b: i32, t: f64) -> (f64, f64, f64) {
    let pw = |x: f64, k: i32| if k <= 0 { if k == 0 { 1.0 } else { 0.0 } } else { x.powi(k) };
    let (af, bf) = (a as f64, b as f64);
    let s = 1.0 - t;
    let u = pw(t, a);
    let du = af * pw(t, a - 1);
    let ddu = af * (af - 1.0) * pw(t, a - 2);
    let v = pw(s, b);
    let dv = -bf * pw(s, b - 1);
    let ddv = bf * (bf - 1.0) * pw(s, b - 2);
    (u * v, du * v + u * dv, ddu * v + 2.0 * du * dv + u * ddv)
}

fn product(a: f64, da: f64, dda: f64, p: f64, dp: f64, ddp: f64) -> (f64, f64, f64) {
    (a * p, da * p + a * dp, dda * p + 2.0 * da * dp + a * ddp)
}

#[derive(Clone, Debug)]
pub struct RadialEigenResult {
    pub eigenvalues: Vec<f64>,
    pub profiles: Vec<RadialProfile>,
    /// Degree of the accepted discretization.
    pub degree: usize,
    /// Largest relative change against the previous degree.
    pub cauchy_change: f64,
}

/// Lowest `count` eigenvalues of `(−L_ℓ)^m` with the hole clamped (order
/// m−1) at `r = ε` and `outer_bc` at `r = 1`, by a Galerkin method whose
/// degree is doubled until the eigenvalues settle.
pub fn radial_eigs(problem: &RadialProblem, count: usize) -> Result<RadialEigenResult> {
    radial_eigs_with(problem, count, &RadialOptions::default())
}

pub fn radial_eigs_with(problem: &RadialProblem, count: usize, opts: &RadialOptions) -> Result<RadialEigenResult> {
    let RadialProblem {
        n,
        m,
        inner_radius: eps,
        ..
    } = *problem;
    if !(m == 1 || m == 2) {
        return invalid("radial eigenproblems cover m = 1, 2");
    }
    if n < 2 {
        return invalid("radial eigenproblems need N >= 2");
    }
    if !(0.0..1.0).contains(&eps) {
        return invalid("hole radius must lie in [0, 1)");
    }
    if count == 0 {
        return invalid("count must be at least 1");
    }
    let mut prev: Option<Vec<f64>> = None;
    let mut last_change = f64::INFINITY;
    let mut last = None;
    for &deg in opts.degrees {
        if deg < count + 2 {
            continue;
        }
        let (vals, profiles) = galerkin(problem, deg, count)?;
        if let Some(p) = &prev {
            last_change = vals.iter().zip(p).map(|(a, b)| ((a - b) / a).abs()).fold(0.0, f64::max);
        }
        prev = Some(vals.clone());
        last = Some((vals, profiles, deg));
        if last_change <= opts.target {
            break;
        }
    }
    let (eigenvalues, profiles, degree) = last.ok_or_else(|| Error::Invalid("no usable degree".into()))?;
    if !(last_change <= opts.accept) {
        return Err(Error::NoConvergence(format!(
            "radial eigenvalues changed by {last_change:.2e} at degree {degree}"
        )));
    }
    Ok(RadialEigenResult {
        eigenvalues,
        profiles,
        degree,
        cauchy_change: last_change,
    })
}

fn galerkin(problem: &RadialProblem, deg: usize, count: usize) -> Result<(Vec<f64>, Vec<RadialProfile>)> {
    let RadialProblem {
        n,
        m,
        ell,
        inner_radius: eps,
        outer_bc,
    } = *problem;
    let b: i32 = match (m, outer_bc) {
        (2, BcKind::Navier) => 1,
        _ => m as i32,
    };
    let nf = n as f64;
    let k = kappa(n, ell);
    let lf = ell as f64;
    let nq = 2 * deg + ell + n + 24;
    let rows_a = if m == 1 { 2 * nq } else { nq };
    let mut f = DMatrix::zeros(rows_a, deg);
    let mut g = DMatrix::zeros(nq, deg);
    let geometry;
    match eps {
        e if e == 0.0 => {
            geometry = Geometry::Ball;
            let (rs, ws) = gauss_legendre_on(nq, 0.0, 1.0);
            for (q, (&r, &w)) in rs.iter().zip(&ws).enumerate() {
                let rho = r * r;
                let (p, dp, ddp) = legendre_table(deg, 2.0 * rho - 1.0);
                let (wv, dwv, ddwv) = weight_factor(0, b, rho);
                let jac = r.powi(2 * ell as i32 + n as i32 - 1);
                for i in 0..deg {
                    let (gv, dg, ddg) = product(wv, dwv, ddwv, p[i], 2.0 * dp[i], 4.0 * ddp[i]);
                    g[(q, i)] = (w * jac).sqrt() * gv;
                    if m == 2 {
                        let lu = 4.0 * rho * ddg + (2.0 * nf + 4.0 * lf) * dg;
                        f[(q, i)] = (w * jac).sqrt() * lu;
                    } else {
                        // f = r^ℓ g(r²): f' = r^{ℓ−1}(ℓ g + 2ρ g')
                        let fr = lf * gv + 2.0 * rho * dg;
                        let jr = r.powi(2 * ell as i32 + n as i32 - 3);
                        f[(q, i)] = (w * jr).sqrt() * fr;
                        f[(nq + q, i)] = (w * k * jr).sqrt() * gv;
                    }
                }
            }
        }
        _ => {
            geometry = Geometry::Annulus { eps };
            let big_l = -eps.ln();
            let (ts, ws) = gauss_legendre_on(nq, 0.0, 1.0);
            for (q, (&t, &w)) in ts.iter().zip(&ws).enumerate() {
                let r = (-big_l * (1.0 - t)).exp();
                let (p, dp, ddp) = legendre_table(deg, 2.0 * t - 1.0);
                let (wv, dwv, ddwv) = weight_factor(m as i32, b, t);
                let mass_w = w * big_l * r.powf(nf);
                for i in 0..deg {
                    let (u, ut, utt) = product(wv, dwv, ddwv, p[i], 2.0 * dp[i], 4.0 * ddp[i]);
                    g[(q, i)] = mass_w.sqrt() * u;
                    if m == 2 {
                        let lu = utt / (big_l * big_l) + (nf - 2.0) * ut / big_l - k * u;
                        f[(q, i)] = (w * big_l * r.powf(nf - 4.0)).sqrt() * lu;
                    } else {
                        let jw = w * big_l * r.powf(nf - 2.0);
                        f[(q, i)] = jw.sqrt() * ut / big_l;
                        f[(nq + q, i)] = (jw * k).sqrt() * u;
                    }
                }
            }
        }
    }
    // A = FᵀF = RᵀR; the pencil (A, GᵀG) reduces to the SVD of G R⁻¹.
    let r_mat = f.qr().r();
    let gt = g.transpose();
    let y = r_mat
        .transpose()
        .solve_lower_triangular(&gt)
        .ok_or_else(|| Error::NoConvergence("radial Galerkin basis is rank deficient".into()))?;
    // y = R⁻ᵀGᵀ = (G R⁻¹)ᵀ
    let svd = y.transpose().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::NoConvergence("radial SVD failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let area = sphere_area(n);
    let mut vals = Vec::with_capacity(count);
    let mut profiles = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let sigma = svd.singular_values[idx];
        vals.push(1.0 / (sigma * sigma));
        let v = v_t.row(idx).transpose();
        let mut c = r_mat
            .solve_upper_triangular(&v)
            .ok_or_else(|| Error::NoConvergence("radial back-substitution failed".into()))?;
        let mass = (&g * &c).norm_squared();
        c /= (area * mass).sqrt();
        // largest-magnitude sample positive
        let samples = &g * &c;
        let imax = samples.iamax();
        if samples[imax] < 0.0 {
            c = -c;
        }
        profiles.push(RadialProfile {
            geometry: geometry.clone(),
            n,
            m,
            ell,
            b,
            coefficients: c.iter().cloned().collect(),
        });
    }
    Ok((vals, profiles))
}

/// Ball eigenvalue from Bessel zeros: Navier (or m = 1) uses `j_{ν,k}^{2m}`,
/// clamped m = 2 the cross-determinant root to the fourth power.
pub fn ball_eigenvalue_bessel(n: usize, m: usize, ell: usize, k: usize, bc: BcKind) -> Result<f64> {
    if n < 2 || !(m == 1 || m == 2) || k == 0 {
        return invalid("ball eigenvalue oracle needs N >= 2, m in {1, 2}, k >= 1");
    }
    let nu = n as f64 / 2.0 - 1.0 + ell as f64;
    Ok(match (m, bc) {
        (2, BcKind::Dirichlet) => clamped_ball_root(nu, k).powi(4),
        _ => bessel_zero(nu, k).powi(2 * m as i32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_capacities() {
        assert!((ball_capacity_exact(1, 3).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((ball_capacity_exact(2, 5).unwrap() - 24.0 * PI * PI).abs() < 1e-11);
        assert!((ball_capacity_exact(1, 4).unwrap() - 4.0 * PI * PI).abs() < 1e-12);
        assert!(ball_capacity_exact(2, 4).is_err());
    }

    #[test]
    fn exterior_matches_ball_closed_form() {
        let c = exterior_capacity(2, 5, 0, 1.0, 1.0, 0.0).unwrap();
        assert!((c.value - 24.0 * PI * PI).abs() < 1e-10);
        // W = (3/2)r^{-1} − (1/2)r^{-3}
        assert!((c.coefficients[0] + 0.5).abs() < 1e-12 && (c.coefficients[1] - 1.5).abs() < 1e-12);
        let c = exterior_capacity(1, 3, 0, 1.0, 1.0, 0.0).unwrap();
        assert!((c.value - 4.0 * PI).abs() < 1e-12);
        // scaling: cap(εK) = ε^{N−2m} cap(K)
        let c = exterior_capacity(2, 5, 0, 0.5, 1.0, 0.0).unwrap();
        assert!((c.value - 12.0 * PI * PI).abs() < 1e-10);
        assert!(exterior_capacity(2, 4, 0, 1.0, 1.0, 0.0).is_err());
        // large annuli approach the exterior value from above
        let ext = exterior_capacity(2, 5, 1, 1.0, 1.0, 1.0).unwrap().value;
        let spec = AnnulusSpec { m: 2, n: 5, ell: 1, inner: 1.0, outer: 1e4, value: 1.0, slope: 1.0, outer_bc: BcKind::Dirichlet };
        let ann = annulus_capacity(&spec).unwrap().value;
        assert!(ann >= ext && (ann - ext) / ext < 1e-3, "{ann} {ext}");
    }

    #[test]
    fn annulus_second_order_closed_form() {
        // harmonic W = (r^{-1} − 1)/(ε^{-1} − 1) in R³
        let eps = 0.25;
        let c = annulus_weighted_capacity(1, 3, eps, 1.0, 0.0, BcKind::Dirichlet).unwrap();
        let exact = 4.0 * PI / (1.0 / eps - 1.0);
        assert!((c.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn annulus_biharmonic_limit_and_homogeneity() {
        for bc in [BcKind::Dirichlet, BcKind::Navier] {
            let c = annulus_weighted_capacity(2, 5, 1e-3, 1.0, 0.0, bc).unwrap();
            assert!((c.value / 1e-3 / (24.0 * PI * PI) - 1.0).abs() < 0.05, "{bc}: {}", c.value);
            let c2 = annulus_weighted_capacity(2, 5, 0.1, 2.0, 1.0, bc).unwrap();
            let c1 = annulus_weighted_capacity(2, 5, 0.1, 1.0, 0.5, bc).unwrap();
            assert!((c2.value - 4.0 * c1.value).abs() < 1e-12 * c2.value);
        }
        let z = annulus_weighted_capacity(2, 5, 0.1, 0.0, 0.0, BcKind::Navier).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(annulus_weighted_capacity(2, 4, 0.1, 1.0, 0.0, BcKind::Navier).is_err());
    }

    #[test]
    fn annulus_energy_matches_quadrature() {
        let spec = AnnulusSpec {
            m: 2,
            n: 5,
            ell: 1,
            inner: 0.05,
            outer: 1.0,
            value: 0.3,
            slope: -0.7,
            outer_bc: BcKind::Dirichlet,
        };
        let c = annulus_capacity(&spec).unwrap();
        // boundary data reproduced
        assert!((c.profile(0.05) - 0.3).abs() < 1e-10);
        assert!(c.profile(1.0).abs() < 1e-10);
        // quadrature of (L_1 W)² r⁴ in t = ln r
        let k = 4.0;
        let (ts, ws) = gauss_legendre_on(400, 0.05f64.ln(), 0.0);
        let mut e = 0.0;
        for (&t, &w) in ts.iter().zip(&ws) {
            let r = t.exp();
            let mut lw = 0.0;
            for (a, co) in c.exponents.iter().zip(&c.coefficients) {
                lw += co * (a * (a + 3.0) - k) * r.powf(a - 2.0);
            }
            e += w * lw * lw * r.powi(4) * r;
        }
        let q = sphere_area(5) * e;
        assert!((q - c.value).abs() < 1e-9 * q, "{q} vs {}", c.value);
    }

    #[test]
    fn ball_eigenvalues_against_bessel() {
        let p = RadialProblem {
            n: 3,
            m: 1,
            ell: 0,
            inner_radius: 0.0,
            outer_bc: BcKind::Dirichlet,
        };
        let r = radial_eigs(&p, 2).unwrap();
        assert!((r.eigenvalues[0] - PI * PI).abs() < 1e-10);
        assert!((r.eigenvalues[1] - 4.0 * PI * PI).abs() < 1e-9);
        // u = sin(πr)/r /‖·‖ with |S²|∫u²r² = 1 gives u(0)² = π/2
        let u0 = r.profiles[0].leading_coefficient().unwrap();
        assert!((u0 * u0 - PI / 2.0).abs() < 1e-10);

        for (bc, ell) in [(BcKind::Navier, 0), (BcKind::Dirichlet, 0), (BcKind::Navier, 1), (BcKind::Dirichlet, 2)] {
            let p = RadialProblem {
                n: 5,
                m: 2,
                ell,
                inner_radius: 0.0,
                outer_bc: bc,
            };
            let got = radial_eigs(&p, 1).unwrap().eigenvalues[0];
            let exact = ball_eigenvalue_bessel(5, 2, ell, 1, bc).unwrap();
            assert!((got - exact).abs() < 1e-9 * exact, "{bc} l={ell}: {got} vs {exact}");
        }
        assert!((ball_eigenvalue_bessel(5, 2, 0, 1, BcKind::Navier).unwrap() - 407.665_519_639_301_8).abs() < 1e-8);
        assert!((ball_eigenvalue_bessel(5, 2, 0, 1, BcKind::Dirichlet).unwrap() - 769.963_483_241_901_8).abs() < 1e-8);
    }

    #[test]
    fn annulus_second_order_in_three_dimensions() {
        // u = sin(π(r−ε)/(1−ε))/r, λ = (π/(1−ε))²
        let eps = 0.1;
        let p = RadialProblem {
            n: 3,
            m: 1,
            ell: 0,
            inner_radius: eps,
            outer_bc: BcKind::Dirichlet,
        };
        let r = radial_eigs(&p, 1).unwrap();
        let exact = (PI / (1.0 - eps)).powi(2);
        assert!((r.eigenvalues[0] - exact).abs() < 1e-10 * exact);
        let prof = &r.profiles[0];
        let x = 0.4;
        let shape = |r: f64| (PI * (r - eps) / (1.0 - eps)).sin() / r;
        let ratio = prof.value(x) / shape(x);
        assert!((prof.value(0.7) / shape(0.7) - ratio).abs() < 1e-9);
        let d = prof.derivative(x);
        let h = 1e-5;
        assert!((d - (prof.value(x + h) - prof.value(x - h)) / (2.0 * h)).abs() < 1e-6);
    }

    #[test]
    fn small_hole_eigenvalue_is_close_to_ball() {
        let mut p = RadialProblem {
            n: 5,
            m: 2,
            ell: 0,
            inner_radius: 0.01,
            outer_bc: BcKind::Navier,
        };
        let pert = radial_eigs(&p, 1).unwrap().eigenvalues[0];
        p.inner_radius = 0.0;
        let base = radial_eigs(&p, 1).unwrap().eigenvalues[0];
        assert!(pert > base && (pert - base) / base < 0.03);
        // exact difference from the Bessel determinant
        assert!((pert - base - 8.863_737_04).abs() < 1e-6, "{}", pert - base);
    }
}
