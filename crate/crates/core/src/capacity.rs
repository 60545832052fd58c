//! Condenser, weighted, obstacle and whole-space capacities.
//!
//! A weighted capacity clamps the hole's nodes to the data and minimizes the
//! energy over the remaining Ω nodes: one SPD solve `S_FF x = −S_FC d`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{build_grid, rasterize, rasterize_interior, sphere_area, BoundingBox, Grid, NodeMask, RegionSpec};
use crate::operator::{assemble_form, BcKind, DiscreteForm, GridFunction};
use crate::poly::Polynomial;
use crate::radial::{annulus_capacity, exterior_capacity, AnnulusSpec};
use crate::sparse::{conjugate_gradient, CgOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityFlag {
    Clipped,
    EmptyHole,
    Regularized,
    NoExtrapolation,
    NonMonotone,
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub value: f64,
    pub potential: GridFunction,
    pub iterations: usize,
    pub residual: f64,
    pub flags: Vec<CapacityFlag>,
}

impl CapacityResult {
    pub fn has(&self, flag: CapacityFlag) -> bool {
        self.flags.contains(&flag)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CapacityOptions {
    pub cg: CgOptions,
    /// Also clamp nodes within `collar` grid steps of the hole.
    pub collar: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            cg: CgOptions::default(),
            collar: 0,
        }
    }
}

/// `t^{n+1} Σ_k C(n+k,k) C(2n+1,n−k) (−t)^k`: rises from 0 to 1 on [0,1]
/// with `n` vanishing derivatives at both ends.
pub fn smoothstep(n: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let binom = |a: usize, b: usize| -> f64 { (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64) };
    let mut s = 0.0;
    for k in 0..=n {
        s += binom(n + k, k) * binom(2 * n + 1, n - k) * (-t).powi(k as i32);
    }
    t.powi(n as i32 + 1) * s
}

/// Radial plateau cutoff: 1 on `r ≤ r_inner`, 0 on `r ≥ r_outer`, a
/// degree `2m+1` smoothstep in between.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub center: Vec<f64>,
    pub r_inner: f64,
    pub r_outer: f64,
    pub smoothness: usize,
}

impl CutoffSpec {
    pub fn plateau_ball(center: Vec<f64>, r_inner: f64, r_outer: f64, m: usize) -> Result<Self> {
        if !(0.0 <= r_inner && r_inner < r_outer) {
            return invalid(format!("cutoff radii must satisfy 0 <= {r_inner} < {r_outer}"));
        }
        Ok(CutoffSpec {
            center,
            r_inner,
            r_outer,
            smoothness: m,
        })
    }

    /// `r_inner = 1.1·circumradius`, `r_outer = min(2 r_inner, boundary_distance/2)`.
    pub fn for_hole(hole: &RegionSpec, boundary_distance: f64, m: usize) -> Result<Self> {
        let (center, radius) = hole.bounding_ball();
        let r_inner = 1.1 * radius;
        let r_outer = (2.0 * r_inner).min(0.5 * boundary_distance);
        if r_outer <= r_inner {
            return invalid("hole too close to the boundary for a plateau cutoff");
        }
        Self::plateau_ball(center, r_inner, r_outer, m)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        1.0 - smoothstep(self.smoothness, (r - self.r_inner) / (self.r_outer - self.r_inner))
    }

    pub fn on_grid(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }
}

/// Distance from `center` to the nearest grid node outside Ω.
pub fn boundary_distance(grid: &Grid, omega: &NodeMask, center: &[f64]) -> f64 {
    let mut x = vec![0.0; grid.dim()];
    let mut best = f64::INFINITY;
    for i in 0..grid.len() {
        if !omega.contains(i) {
            grid.coord_into(i, &mut x);
            let d = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            best = best.min(d);
        }
    }
    best.sqrt()
}

/// Local mask of clamped nodes; errors when the hole reaches ∂Ω.
fn clamped_nodes(form: &DiscreteForm, hole: &NodeMask, collar: usize) -> Result<Vec<bool>> {
    let grid = form.grid();
    if !hole.matches(grid) {
        return Err(Error::GridMismatch("hole mask does not match the form's grid".into()));
    }
    let omega = form.omega();
    let mut clamped = vec![false; form.len()];
    for g in hole.indices() {
        let Some(l) = form.local_index(g) else {
            return invalid("hole touches the boundary of omega");
        };
        for axis in 0..grid.dim() {
            for s in [-1isize, 1] {
                if !grid.neighbor(g, axis, s).is_some_and(|nb| omega.contains(nb)) {
                    return invalid("hole touches the boundary of omega");
                }
            }
        }
        clamped[l] = true;
    }
    if collar > 0 {
        let dim = grid.dim();
        let c = collar as i64;
        let mut offsets = Vec::new();
        let mut off = vec![-c; dim];
        loop {
            if off.iter().map(|v| v * v).sum::<i64>() <= c * c {
                offsets.push(off.clone());
            }
            let mut k = 0;
            while k < dim {
                off[k] += 1;
                if off[k] <= c {
                    break;
                }
                off[k] = -c;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
        let res = grid.resolution();
        for g in hole.indices() {
            let mi = grid.multi_index(g);
            'off: for o in &offsets {
                let mut q = vec![0usize; dim];
                for a in 0..dim {
                    let v = mi[a] as i64 + o[a];
                    if v < 0 || v >= res[a] as i64 {
                        continue 'off;
                    }
                    q[a] = v as usize;
                }
                if let Some(l) = form.local_index(grid.index(&q)) {
                    clamped[l] = true;
                }
            }
        }
    }
    Ok(clamped)
}

/// Minimizes the energy with `full[i]` fixed where `clamped[i]`; the free
/// entries of `full` are the CG starting guess and receive the solution.
fn solve_clamped(form: &DiscreteForm, clamped: &[bool], full: &mut [f64], cg: CgOptions) -> Result<(usize, f64)> {
    let free: Vec<usize> = (0..form.len()).filter(|&i| !clamped[i]).collect();
    let fixed: Vec<usize> = (0..form.len()).filter(|&i| clamped[i]).collect();
    if free.is_empty() {
        return Ok((0, 0.0));
    }
    let s = form.stiffness();
    let sff = s.submatrix(&free);
    let sfc = s.block(&free, &fixed);
    let dc: Vec<f64> = fixed.iter().map(|&i| full[i]).collect();
    let mut rhs = sfc.matvec(&dc);
    rhs.iter_mut().for_each(|v| *v = -*v);
    let mut x: Vec<f64> = free.iter().map(|&i| full[i]).collect();
    let out = conjugate_gradient(&sff, &rhs, &mut x, cg);
    if !out.converged {
        return Err(Error::NoConvergence(format!(
            "capacity CG: residual {:.3e} after {} iterations",
            out.rel_residual, out.iterations
        )));
    }
    for (k, &i) in free.iter().enumerate() {
        full[i] = x[k];
    }
    Ok((out.iterations, out.rel_residual))
}

pub fn weighted_capacity(form: &DiscreteForm, hole: &NodeMask, data: &GridFunction) -> Result<CapacityResult> {
    weighted_capacity_with(form, hole, data, &CapacityOptions::default())
}

pub fn weighted_capacity_with(
    form: &DiscreteForm,
    hole: &NodeMask,
    data: &GridFunction,
    opts: &CapacityOptions,
) -> Result<CapacityResult> {
    if !data.matches(form.grid()) {
        return Err(Error::GridMismatch("data does not match the form's grid".into()));
    }
    let mut flags = Vec::new();
    if hole.clipped {
        flags.push(CapacityFlag::Clipped);
    }
    if hole.is_empty() {
        flags.push(CapacityFlag::EmptyHole);
        return Ok(CapacityResult {
            value: 0.0,
            potential: GridFunction::zeros(form.grid()),
            iterations: 0,
            residual: 0.0,
            flags,
        });
    }
    let clamped = clamped_nodes(form, hole, opts.collar)?;
    let mut full = vec![0.0; form.len()];
    for (l, &g) in form.nodes().iter().enumerate() {
        if clamped[l] {
            let v = data.values[g];
            if !v.is_finite() {
                return invalid("data must be finite on the hole");
            }
            full[l] = v;
        }
    }
    let (iterations, residual) = solve_clamped(form, &clamped, &mut full, opts.cg)?;
    Ok(CapacityResult {
        value: form.energy_local(&full),
        potential: form.extend(&full),
        iterations,
        residual,
        flags,
    })
}

/// Condenser capacity: data = the cutoff evaluated on the grid.
pub fn condenser_capacity(form: &DiscreteForm, hole: &NodeMask, cutoff: &CutoffSpec) -> Result<CapacityResult> {
    weighted_capacity(form, hole, &cutoff.on_grid(form.grid()))
}

#[derive(Clone, Copy, Debug)]
pub struct ObstacleOptions {
    pub cg: CgOptions,
    pub max_iter: usize,
    /// KKT tolerance: multipliers relative to their largest magnitude,
    /// constraint violation absolute.
    pub tol: f64,
}

impl Default for ObstacleOptions {
    fn default() -> Self {
        ObstacleOptions {
            cg: CgOptions::default(),
            max_iter: 500,
            tol: 1e-8,
        }
    }
}

pub fn obstacle_capacity(form: &DiscreteForm, hole: &NodeMask) -> Result<CapacityResult> {
    obstacle_capacity_with(form, hole, &ObstacleOptions::default())
}

/// Minimizes the energy subject to `f ≥ 1` on the hole by a primal active-set
/// method started from the condenser potential.
pub fn obstacle_capacity_with(form: &DiscreteForm, hole: &NodeMask, opts: &ObstacleOptions) -> Result<CapacityResult> {
    let mut flags = Vec::new();
    if hole.clipped {
        flags.push(CapacityFlag::Clipped);
    }
    if hole.is_empty() {
        flags.push(CapacityFlag::EmptyHole);
        return Ok(CapacityResult {
            value: 0.0,
            potential: GridFunction::zeros(form.grid()),
            iterations: 0,
            residual: 0.0,
            flags,
        });
    }
    let in_hole = clamped_nodes(form, hole, 0)?;
    let hole_local: Vec<usize> = (0..form.len()).filter(|&i| in_hole[i]).collect();
    let mut active = in_hole.clone();
    let mut f = vec![0.0; form.len()];
    for &i in &hole_local {
        f[i] = 1.0;
    }
    let (mut iterations, mut residual) = solve_clamped(form, &active, &mut f, opts.cg)?;
    let s = form.stiffness();
    let mut kkt = f64::INFINITY;
    for _ in 0..opts.max_iter {
        // multipliers on the active set
        let g = s.matvec(&f);
        let scale = hole_local
            .iter()
            .filter(|&&i| active[i])
            .map(|&i| g[i].abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut worst_mu: f64 = 0.0;
        let mut release = Vec::new();
        for &i in &hole_local {
            if active[i] && g[i] < -opts.tol * scale {
                worst_mu = worst_mu.max(-g[i] / scale);
                release.push(i);
            }
        }
        let infeasible = hole_local
            .iter()
            .filter(|&&i| !active[i])
            .map(|&i| (1.0 - f[i]).max(0.0))
            .fold(0.0, f64::max);
        kkt = worst_mu.max(infeasible);
        if release.is_empty() {
            break;
        }
        for i in release {
            active[i] = false;
        }
        // re-solve, taking blocking steps until the trial point is feasible
        loop {
            let mut trial = f.clone();
            let (it, res) = solve_clamped(form, &active, &mut trial, opts.cg)?;
            iterations += it;
            residual = res;
            let mut alpha = 1.0;
            let mut blocking = Vec::new();
            for &i in &hole_local {
                if !active[i] && trial[i] < 1.0 - opts.tol {
                    let a = (f[i] - 1.0) / (f[i] - trial[i]);
                    if a < alpha - 1e-14 {
                        alpha = a;
                        blocking.clear();
                    }
                    if a <= alpha + 1e-14 {
                        blocking.push(i);
                    }
                }
            }
            if blocking.is_empty() {
                f = trial;
                break;
            }
            let alpha = alpha.max(0.0);
            for i in 0..f.len() {
                f[i] += alpha * (trial[i] - f[i]);
            }
            for i in blocking {
                active[i] = true;
                f[i] = 1.0;
            }
        }
    }
    if kkt > opts.tol {
        return Err(Error::NoConvergence(format!(
            "obstacle active set: KKT residual {kkt:.3e} after {} steps",
            opts.max_iter
        )));
    }
    Ok(CapacityResult {
        value: form.energy_local(&f),
        potential: form.extend(&f),
        iterations,
        residual: kkt.max(residual),
        flags,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `‖∇^m(W_a − W_b)‖ ≤ ‖∇^m(η(a − b))‖` for weighted potentials on the same hole.
pub fn potential_stability_check(
    form: &DiscreteForm,
    hole: &NodeMask,
    data_a: &GridFunction,
    data_b: &GridFunction,
    cutoff: &GridFunction,
    tol: f64,
) -> Result<StabilityCheck> {
    let wa = weighted_capacity(form, hole, data_a)?;
    let wb = weighted_capacity(form, hole, data_b)?;
    let lhs = form.energy_local(&form.restrict(&wa.potential.sub(&wb.potential))?).sqrt();
    let rhs = form.energy_local(&form.restrict(&cutoff.mul(&data_a.sub(data_b)))?).sqrt();
    Ok(StabilityCheck {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + tol),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WholeSpacePath {
    Radial,
    Grid,
}

#[derive(Clone, Debug)]
pub struct WholeSpaceOptions {
    /// Grid spacing for the grid path.
    pub h: f64,
    pub cg: CgOptions,
    /// Relative slack allowed before a rise in R is flagged.
    pub monotone_tol: f64,
}

impl Default for WholeSpaceOptions {
    fn default() -> Self {
        WholeSpaceOptions {
            h: 0.1,
            cg: CgOptions::default(),
            monotone_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WholeSpaceResult {
    pub value: f64,
    /// `(R, cap_{m,B_R}(K, U0))`.
    pub per_radius: Vec<(f64, f64)>,
    /// Fitted decay exponent `p` of `c_R − c_∞`.
    pub exponent: Option<f64>,
    pub path: WholeSpacePath,
    /// Closed-form exterior value, available on the radial path.
    pub exact: Option<f64>,
    pub flags: Vec<CapacityFlag>,
}

impl WholeSpaceResult {
    pub fn has(&self, flag: CapacityFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn monotone(&self) -> bool {
        !self.has(CapacityFlag::NonMonotone)
    }
}

/// Centered-ball radius when `k` is a ball about the origin.
fn centered_ball_radius(k: &RegionSpec) -> Option<f64> {
    match k.simplified() {
        RegionSpec::Ball { center, radius } if center.iter().all(|c| *c == 0.0) => Some(radius),
        _ => None,
    }
}

/// `cap_{m,R^N}(K, U0)` from Dirichlet truncations to `B_R` and the fit
/// `c_R = c_∞ + a R^{−p}` through the last three radii.
pub fn whole_space_capacity(
    k: &RegionSpec,
    u0: &Polynomial,
    m: usize,
    n: usize,
    radii: &[f64],
    opts: &WholeSpaceOptions,
) -> Result<WholeSpaceResult> {
    k.validate()?;
    if k.dim() != n || u0.dim() != n {
        return invalid("K and U0 must live in R^N");
    }
    if n <= 2 * m {
        return invalid(format!("whole-space capacity needs N > 2m (N = {n}, m = {m})"));
    }
    if radii.len() < 3 || radii.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid("need at least three strictly increasing radii");
    }
    let (c, rad) = k.bounding_ball();
    let reach = c.iter().map(|v| v * v).sum::<f64>().sqrt() + rad;
    if !(reach < radii[0]) {
        return invalid("K must fit inside the smallest radius");
    }
    let ball_radius = centered_ball_radius(k);
    let harmonic_degree = u0.homogeneous_degree().filter(|_| u0.laplacian().is_zero());
    let radial_ok = (m == 1 || m == 2) && ball_radius.is_some() && harmonic_degree.is_some();
    let path = if u0.is_zero() || radial_ok {
        WholeSpacePath::Radial
    } else if n <= crate::grid::MAX_GRID_DIM {
        WholeSpacePath::Grid
    } else {
        return Err(Error::DimensionUnsupported(n));
    };
    let mut per_radius = Vec::with_capacity(radii.len());
    for &big_r in radii {
        let value = if u0.is_zero() {
            0.0
        } else if path == WholeSpacePath::Radial {
            let rho = ball_radius.unwrap();
            let ell = harmonic_degree.unwrap() as usize;
            let angular = u0.sphere_norm_sq() / sphere_area(n);
            let cap = annulus_capacity(&AnnulusSpec {
                m,
                n,
                ell,
                inner: rho,
                outer: big_r,
                value: rho.powi(ell as i32),
                slope: ell as f64 * rho.powi(ell as i32 - 1),
                outer_bc: BcKind::Dirichlet,
            })?;
            angular * cap.value
        } else {
            truncated_grid_capacity(k, u0, m, n, big_r, opts)?
        };
        per_radius.push((big_r, value));
    }
    let mut flags = Vec::new();
    if per_radius.windows(2).any(|w| w[1].1 > w[0].1 * (1.0 + opts.monotone_tol) + 1e-300) {
        flags.push(CapacityFlag::NonMonotone);
    }
    let (value, exponent) = match extrapolate_tail(&per_radius) {
        Some((v, p)) => (v, Some(p)),
        None => {
            let last = per_radius.last().unwrap().1;
            if per_radius.iter().any(|(_, c)| *c != last) {
                flags.push(CapacityFlag::NoExtrapolation);
            }
            (last, None)
        }
    };
    let exact = match (path, ball_radius, harmonic_degree) {
        (WholeSpacePath::Radial, Some(rho), Some(ell)) if !u0.is_zero() => {
            let ell = ell as usize;
            let angular = u0.sphere_norm_sq() / sphere_area(n);
            exterior_capacity(m, n, ell, rho, rho.powi(ell as i32), ell as f64 * rho.powi(ell as i32 - 1))
                .ok()
                .map(|c| angular * c.value)
        }
        (WholeSpacePath::Radial, _, _) => Some(0.0),
        _ => None,
    };
    Ok(WholeSpaceResult {
        value,
        per_radius,
        exponent,
        path,
        exact,
        flags,
    })
}

fn truncated_grid_capacity(
    k: &RegionSpec,
    u0: &Polynomial,
    m: usize,
    n: usize,
    big_r: f64,
    opts: &WholeSpaceOptions,
) -> Result<f64> {
    let mut res = (2.0 * big_r / opts.h).round() as usize + 1;
    if res % 2 == 0 {
        res += 1;
    }
    let grid = build_grid(&BoundingBox::cube(n, -big_r, big_r)?, &[res])?;
    let omega = rasterize_interior(&grid, &RegionSpec::centered_ball(n, big_r))?;
    let form = assemble_form(&grid, &omega, m, BcKind::Dirichlet)?;
    let hole = rasterize(&grid, k)?;
    let data = GridFunction::from_fn(&grid, |x| u0.eval(x));
    let opts = CapacityOptions {
        cg: opts.cg,
        collar: 0,
    };
    Ok(weighted_capacity_with(&form, &hole, &data, &opts)?.value)
}

/// Fits `c = c_∞ + a R^{−p}` exactly through the last three points; `None`
/// when no `p > 0` matches.
pub fn extrapolate_tail(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let k = points.len();
    if k < 3 {
        return None;
    }
    let [(r1, c1), (r2, c2), (r3, c3)] = [points[k - 3], points[k - 2], points[k - 1]];
    let (d1, d2) = (c1 - c2, c2 - c3);
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let target = d1 / d2;
    let phi = |p: f64| (r1.powf(-p) - r2.powf(-p)) / (r2.powf(-p) - r3.powf(-p));
    let (mut lo, mut hi) = (1e-9, 60.0);
    if !(phi(lo) < target && target < phi(hi)) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let a = d1 / (r1.powf(-p) - r2.powf(-p));
    Some((c3 - a * r3.powf(-p), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, rasterize, rasterize_interior, BoundingBox};
    use std::f64::consts::PI;

    fn disk(res: usize, m: usize, bc: BcKind) -> (Grid, DiscreteForm) {
        let g = build_grid(&BoundingBox::cube(2, -1.0, 1.0).unwrap(), &[res]).unwrap();
        let omega = rasterize_interior(&g, &RegionSpec::centered_ball(2, 1.0)).unwrap();
        let f = assemble_form(&g, &omega, m, bc).unwrap();
        (g, f)
    }

    #[test]
    fn smoothstep_shape() {
        for n in 1..4 {
            assert_eq!(smoothstep(n, 0.0), 0.0);
            assert_eq!(smoothstep(n, 1.0), 1.0);
            assert!((smoothstep(n, 0.5) - 0.5).abs() < 1e-14);
            let h = 1e-3;
            assert!(smoothstep(n, h) < h.powi(n as i32) * 1e3);
        }
        assert!((smoothstep(1, 0.3) - 0.09 * (3.0 - 0.6)).abs() < 1e-15);
    }

    #[test]
    fn zero_data_and_empty_hole() {
        let (g, f) = disk(21, 2, BcKind::Dirichlet);
        let hole = rasterize(&g, &RegionSpec::centered_ball(2, 0.2)).unwrap();
        let r = weighted_capacity(&f, &hole, &GridFunction::zeros(&g)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.potential.values.iter().all(|v| *v == 0.0));
        let empty = rasterize(&g, &RegionSpec::centered_ball(2, 0.0)).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let e = weighted_capacity(&f, &empty, &one).unwrap();
        assert!(e.has(CapacityFlag::EmptyHole) && e.value == 0.0);
        assert_eq!(obstacle_capacity(&f, &empty).unwrap().value, 0.0);
    }

    #[test]
    fn potential_matches_data_and_energy() {
        let (g, f) = disk(25, 2, BcKind::Navier);
        let hole = rasterize(&g, &RegionSpec::centered_ball(2, 0.25)).unwrap();
        let data = GridFunction::from_fn(&g, |x| 1.0 + x[0]);
        let r = weighted_capacity(&f, &hole, &data).unwrap();
        for i in hole.indices() {
            assert_eq!(r.potential.values[i], data.values[i]);
        }
        let e = crate::operator::energy(&f, &r.potential).unwrap();
        assert!((e - r.value).abs() <= 1e-12 * e);
    }

    #[test]
    fn hole_touching_boundary_is_rejected() {
        let (g, f) = disk(21, 1, BcKind::Dirichlet);
        let hole = rasterize(&g, &RegionSpec::ball(vec![0.95, 0.0], 0.1)).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        assert!(weighted_capacity(&f, &hole, &one).is_err());
    }

    #[test]
    fn monotone_homogeneous_and_navier_below_dirichlet() {
        let (g, fd) = disk(25, 2, BcKind::Dirichlet);
        let (_, fnv) = disk(25, 2, BcKind::Navier);
        let small = rasterize(&g, &RegionSpec::centered_ball(2, 0.15)).unwrap();
        let big = rasterize(&g, &RegionSpec::centered_ball(2, 0.3)).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let a = weighted_capacity(&fd, &small, &one).unwrap().value;
        let b = weighted_capacity(&fd, &big, &one).unwrap().value;
        assert!(a <= b);
        let three = one.scaled(3.0);
        let c = weighted_capacity(&fd, &small, &three).unwrap().value;
        assert!((c - 9.0 * a).abs() < 1e-8 * c);
        let nv = weighted_capacity(&fnv, &small, &one).unwrap().value;
        assert!(nv <= a * (1.0 + 1e-9));
    }

    #[test]
    fn condenser_equals_weighted_with_cutoff() {
        let (g, f) = disk(25, 2, BcKind::Dirichlet);
        let k = RegionSpec::centered_ball(2, 0.2);
        let hole = rasterize(&g, &k).unwrap();
        let cut = CutoffSpec::for_hole(&k, boundary_distance(&g, f.omega(), &[0.0, 0.0]), 2).unwrap();
        assert!((cut.r_inner - 0.22).abs() < 1e-12 && (cut.r_outer - 0.44).abs() < 1e-12);
        let a = condenser_capacity(&f, &hole, &cut).unwrap().value;
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let b = weighted_capacity(&f, &hole, &one).unwrap().value;
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn obstacle_equals_condenser_for_laplacian_and_is_below_for_bilaplacian() {
        let one_hole = |m| {
            let (g, f) = disk(25, m, BcKind::Dirichlet);
            let hole = rasterize(&g, &RegionSpec::centered_ball(2, 0.25)).unwrap();
            let one = GridFunction::from_fn(&g, |_| 1.0);
            let cond = weighted_capacity(&f, &hole, &one).unwrap().value;
            let obs = obstacle_capacity(&f, &hole).unwrap().value;
            (cond, obs)
        };
        let (c1, o1) = one_hole(1);
        assert!((c1 - o1).abs() < 1e-8 * c1, "{c1} {o1}");
        let (c2, o2) = one_hole(2);
        assert!(o2 <= c2 * (1.0 + 1e-9), "{c2} {o2}");
    }

    #[test]
    fn stability_bound_and_homogeneity() {
        let (g, f) = disk(25, 2, BcKind::Dirichlet);
        let k = RegionSpec::centered_ball(2, 0.2);
        let hole = rasterize(&g, &k).unwrap();
        let eta = CutoffSpec::plateau_ball(vec![0.0, 0.0], 0.22, 0.44, 2).unwrap().on_grid(&g);
        let a = GridFunction::from_fn(&g, |x| 1.0 + x[0] * x[1]);
        let same = potential_stability_check(&f, &hole, &a, &a, &eta, 0.0).unwrap();
        assert_eq!(same.lhs, 0.0);
        let b = GridFunction::from_fn(&g, |x| 1.0 + x[0] * x[1] + 0.3 * (2.0 * x[1]).sin());
        let st = potential_stability_check(&f, &hole, &a, &b, &eta, 1e-9).unwrap();
        assert!(st.ok, "{st:?}");
        let twice = potential_stability_check(&f, &hole, &a, &a.scaled(2.0), &eta, 1e-9).unwrap();
        let wa = weighted_capacity(&f, &hole, &a).unwrap().value.sqrt();
        assert!((twice.lhs - wa).abs() < 1e-8 * wa);
    }

    #[test]
    fn tail_extrapolation_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&r: &f64| (r, 5.0 + 3.0 * r.powf(-1.5))).collect();
        let (c, p) = extrapolate_tail(&pts).unwrap();
        assert!((c - 5.0).abs() < 1e-10 && (p - 1.5).abs() < 1e-8);
        assert!(extrapolate_tail(&[(1.0, 1.0), (2.0, 2.0), (3.0, 1.5)]).is_none());
    }

    #[test]
    fn whole_space_ball_capacities_radial() {
        let radii = [4.0, 8.0, 16.0, 32.0, 64.0];
        let opts = WholeSpaceOptions::default();
        let r = whole_space_capacity(&RegionSpec::centered_ball(3, 1.0), &Polynomial::constant(3, 1.0), 1, 3, &radii, &opts)
            .unwrap();
        assert_eq!(r.path, WholeSpacePath::Radial);
        assert!(r.monotone());
        assert!((r.value / (4.0 * PI) - 1.0).abs() < 0.02, "{}", r.value);
        let r = whole_space_capacity(&RegionSpec::centered_ball(5, 1.0), &Polynomial::constant(5, 1.0), 2, 5, &radii, &opts)
            .unwrap();
        assert!((r.value / (24.0 * PI * PI) - 1.0).abs() < 0.02, "{}", r.value);
        assert!((r.exact.unwrap() - 24.0 * PI * PI).abs() < 1e-9);
        let z = whole_space_capacity(&RegionSpec::centered_ball(5, 1.0), &Polynomial::zero(5), 2, 5, &radii, &opts).unwrap();
        assert_eq!(z.value, 0.0);
    }
}
