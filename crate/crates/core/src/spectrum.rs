//! Lowest eigenpairs of the pencil `(S, M)` with hole nodes clamped to zero.
//!
//! Block inverse iteration (shift 0) with Rayleigh-Ritz; every application of
//! `S⁻¹` is a Jacobi-preconditioned CG solve warm-started from `u/θ`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::NodeMask;
use crate::operator::{DiscreteForm, GridFunction, MassWeights};
use crate::sparse::{axpy, conjugate_gradient, dot, norm, CgOptions, Csr};

/// Relative gap below which an eigenvalue is not treated as simple.
pub const SIMPLICITY_GAP: f64 = 1e-4;
/// Relative gap below which a multiplicity warning is raised.
pub const CLUSTER_GAP: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Relative residual `‖Su − λMu‖ / (λ‖Mu‖)` required of each pair.
    pub tol: f64,
    pub max_outer: usize,
    /// Extra block vectors beyond `J + 1`.
    pub guard: usize,
    pub cg: CgOptions,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            max_outer: 400,
            guard: 2,
            cg: CgOptions {
                rel_tol: 1e-11,
                max_iter: 50_000,
            },
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal, largest-magnitude entry positive.
    pub eigenvectors: Vec<GridFunction>,
    pub residuals: Vec<f64>,
    /// Relative distance of each eigenvalue to its nearest computed neighbor.
    pub multiplicity_gaps: Vec<f64>,
    pub warnings: Vec<String>,
    pub outer_iterations: usize,
    pub cg_iterations: usize,
}

impl EigenResult {
    pub fn is_simple(&self, index: usize) -> bool {
        self.multiplicity_gaps.get(index).is_some_and(|g| *g >= SIMPLICITY_GAP)
    }

    /// `Ok` when eigenvalue `index` (0-based) is simple.
    pub fn require_simple(&self, index: usize) -> Result<()> {
        if self.is_simple(index) {
            Ok(())
        } else {
            Err(Error::NotSimple {
                index: index + 1,
                gap: self.multiplicity_gaps.get(index).copied().unwrap_or(0.0),
            })
        }
    }
}

/// Local indices (into the form's Ω ordering) of nodes that are not in `hole`.
pub fn free_indices(form: &DiscreteForm, hole: Option<&NodeMask>) -> Result<Vec<usize>> {
    match hole {
        None => Ok((0..form.len()).collect()),
        Some(h) => {
            if !h.matches(form.grid()) {
                return Err(Error::GridMismatch("hole mask does not match the form's grid".into()));
            }
            Ok(form
                .nodes()
                .iter()
                .enumerate()
                .filter(|(_, &g)| !h.contains(g))
                .map(|(l, _)| l)
                .collect())
        }
    }
}

pub fn solve_eigs(
    form: &DiscreteForm,
    mass: &MassWeights,
    hole: Option<&NodeMask>,
    count: usize,
    tol: f64,
) -> Result<EigenResult> {
    let opts = EigenOptions {
        tol,
        ..EigenOptions::default()
    };
    solve_eigs_with(form, mass, hole, count, &opts, None)
}

/// As [`solve_eigs`], optionally starting from previously computed vectors
/// (e.g. the unperturbed eigenfunctions of a sweep).
pub fn solve_eigs_with(
    form: &DiscreteForm,
    mass: &MassWeights,
    hole: Option<&NodeMask>,
    count: usize,
    opts: &EigenOptions,
    warm: Option<&[GridFunction]>,
) -> Result<EigenResult> {
    if count == 0 {
        return invalid("number of eigenpairs must be at least 1");
    }
    let w = mass.weight();
    if !(w > 0.0) || mass.weights.len() != form.len() {
        return invalid("mass weights must be positive, one per omega node");
    }
    let free = free_indices(form, hole)?;
    if free.is_empty() {
        return invalid("hole covers the whole domain interior");
    }
    if free.len() < count {
        return invalid(format!("{} free nodes for {} eigenpairs", free.len(), count));
    }
    let s = form.stiffness().submatrix(&free);
    let n = free.len();
    let p = (count + 1 + opts.guard).min(n);
    let nev = (count + 1).min(p);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(p);
    if let Some(vs) = warm {
        for v in vs.iter().take(p) {
            if !v.matches(form.grid()) {
                return Err(Error::GridMismatch("warm-start vector does not match grid".into()));
            }
            x.push(free.iter().map(|&l| v.values[form.nodes()[l]]).collect());
        }
    }
    while x.len() < p {
        x.push((0..n).map(|_| rng.random::<f64>() - 0.5).collect());
    }
    orthonormalize(&mut x, w);
    if x.len() < p {
        return invalid("could not build an independent starting block");
    }

    // Rayleigh-Ritz on the starting block gives the first θ for warm starts
    let (mut theta, ritz) = rayleigh_ritz(&s, &x);
    x = ritz;
    let mut cg_iterations = 0;
    let mut residuals = vec![f64::INFINITY; p];
    let mut outer = 0;
    loop {
        for (j, xj) in x.iter().enumerate() {
            residuals[j] = relative_residual(&s, xj, theta[j], w);
        }
        let head_ok = residuals[..count].iter().all(|r| *r <= opts.tol);
        let tail_ok = residuals[count..nev].iter().all(|r| *r <= opts.tol.sqrt());
        if head_ok && tail_ok {
            break;
        }
        if outer >= opts.max_outer {
            return Err(Error::NoConvergence(format!(
                "eigensolver: {} outer steps, eigenvalues {:?}, residuals {:?}",
                outer,
                &theta[..count],
                &residuals[..count]
            )));
        }
        outer += 1;
        let solves: Vec<(Vec<f64>, usize, bool)> = x
            .par_iter()
            .zip(theta.par_iter())
            .map(|(xj, &th)| {
                let rhs: Vec<f64> = xj.iter().map(|v| w * v).collect();
                let mut y: Vec<f64> = xj.iter().map(|v| v / th).collect();
                let out = conjugate_gradient(&s, &rhs, &mut y, opts.cg);
                (y, out.iterations, out.converged)
            })
            .collect();
        let mut y = Vec::with_capacity(p);
        for (v, its, ok) in solves {
            cg_iterations += its;
            if !ok {
                return Err(Error::NoConvergence("eigensolver inner CG solve".into()));
            }
            y.push(v);
        }
        orthonormalize(&mut y, w);
        if y.len() < p {
            // refill a collapsed direction
            while y.len() < p {
                y.push((0..n).map(|_| rng.random::<f64>() - 0.5).collect());
            }
            orthonormalize(&mut y, w);
        }
        let rr = rayleigh_ritz(&s, &y);
        theta = rr.0;
        x = rr.1;
    }

    let eigenvalues = theta[..count].to_vec();
    let mut eigenvectors = Vec::with_capacity(count);
    for xj in x.iter().take(count) {
        let imax = (0..n)
            .max_by(|&a, &b| xj[a].abs().partial_cmp(&xj[b].abs()).unwrap())
            .unwrap();
        let sign = if xj[imax] < 0.0 { -1.0 } else { 1.0 };
        let mut local = vec![0.0; form.len()];
        for (k, &l) in free.iter().enumerate() {
            local[l] = sign * xj[k];
        }
        eigenvectors.push(form.extend(&local));
    }
    let all = &theta[..nev];
    let multiplicity_gaps: Vec<f64> = (0..count)
        .map(|i| {
            let mut g = f64::INFINITY;
            if i > 0 {
                g = g.min((all[i] - all[i - 1]).abs());
            }
            if i + 1 < all.len() {
                g = g.min((all[i + 1] - all[i]).abs());
            }
            g / all[i].abs()
        })
        .collect();
    let warnings = multiplicity_gaps
        .iter()
        .enumerate()
        .filter(|(_, g)| **g < CLUSTER_GAP)
        .map(|(i, g)| format!("eigenvalue {} clustered (relative gap {:.2e})", i + 1, g))
        .collect();
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
        residuals: residuals[..count].to_vec(),
        multiplicity_gaps,
        warnings,
        outer_iterations: outer,
        cg_iterations,
    })
}

/// `uᵀSu / uᵀMu` with `u` zero-extended outside Ω.
pub fn rayleigh_quotient(form: &DiscreteForm, mass: &MassWeights, u: &GridFunction) -> Result<f64> {
    let local = form.restrict(u)?;
    let m: f64 = local.iter().zip(&mass.weights).map(|(v, w)| w * v * v).sum();
    if m == 0.0 {
        return invalid("Rayleigh quotient of the zero vector");
    }
    Ok(form.energy_local(&local) / m)
}

fn relative_residual(s: &Csr, x: &[f64], theta: f64, w: f64) -> f64 {
    let mut r = s.matvec(x);
    axpy(-theta * w, x, &mut r);
    norm(&r) / (theta.abs() * w * norm(x))
}

/// Twice-applied modified Gram-Schmidt in the `w`-weighted inner product;
/// numerically dependent vectors are dropped.
fn orthonormalize(vs: &mut Vec<Vec<f64>>, w: f64) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs.drain(..) {
        let n0 = norm(&v);
        for _ in 0..2 {
            for q in &out {
                let c = w * dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * n0 && nv > 0.0 {
            let s = 1.0 / (nv * w.sqrt());
            v.iter_mut().for_each(|x| *x *= s);
            out.push(v);
        }
    }
    *vs = out;
}

/// Ritz values and vectors of `S/w` on the span of a w-orthonormal block.
fn rayleigh_ritz(s: &Csr, q: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = q.len();
    let sq: Vec<Vec<f64>> = q.par_iter().map(|v| s.matvec(v)).collect();
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let v = 0.5 * (dot(&q[i], &sq[j]) + dot(&q[j], &sq[i]));
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    // qᵀMq = I, so the projected pencil is (a, I)
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let n = q[0].len();
    let mut theta = Vec::with_capacity(p);
    let mut x = Vec::with_capacity(p);
    for &k in &order {
        theta.push(eig.eigenvalues[k]);
        let mut v = vec![0.0; n];
        for i in 0..p {
            axpy(eig.eigenvectors[(i, k)], &q[i], &mut v);
        }
        x.push(v);
    }
    (theta, x)
}
