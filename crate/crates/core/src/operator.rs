//! Discrete polyharmonic energy `q_m(u,u) = ∫|∇^m u|²` on grid masks.
//!
//! The energy is `cell · ‖D u‖²` where `D` is the composed centered stencil
//! (`(-Δ_h)^k` for `m = 2k`, forward gradient of `(-Δ_h)^k` for `m = 2k+1`)
//! acting on `u` zero-extended outside Ω. Dirichlet and Navier differ only
//! in the rows of `D`:
//!
//! * Dirichlet: every position the composed stencil reaches, including the
//!   ghost band outside Ω. The band penalizes normal-derivative jumps.
//! * Navier: intermediate Laplacians are restricted to Ω before the next
//!   application, so `S = A_Ω^m` with `A_Ω` the Dirichlet Laplacian.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, NodeMask};
use crate::quadrature::gauss_legendre_on;
use crate::sparse::{dot, Csr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Dirichlet,
    Navier,
}

impl std::fmt::Display for BcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Navier => "navier",
        })
    }
}

/// One value per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        GridFunction {
            shape: grid.resolution().to_vec(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction {
            shape: grid.resolution().to_vec(),
            values,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.coord_into(i, &mut x);
                f(&x)
            })
            .collect();
        GridFunction {
            shape: grid.resolution().to_vec(),
            values,
        }
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        self.shape == grid.resolution()
    }

    pub fn scaled(&self, s: f64) -> GridFunction {
        GridFunction {
            shape: self.shape.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        GridFunction {
            shape: self.shape.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &GridFunction) -> GridFunction {
        GridFunction {
            shape: self.shape.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }
}

/// Lumped mass: the cell volume at every node of Ω.
#[derive(Clone, Debug, PartialEq)]
pub struct MassWeights {
    pub weights: Vec<f64>,
}

impl MassWeights {
    pub fn lumped(form: &DiscreteForm) -> Self {
        MassWeights {
            weights: vec![form.grid.cell_volume(); form.len()],
        }
    }

    /// The common weight (grids are uniform).
    pub fn weight(&self) -> f64 {
        self.weights.first().copied().unwrap_or(0.0)
    }
}

/// Assembled stiffness for `(−Δ)^m` on a node mask Ω. Vectors passed to
/// the `*_local` methods are indexed by Ω's nodes in lexicographic order.
#[derive(Clone, Debug)]
pub struct DiscreteForm {
    grid: Grid,
    m: usize,
    bc: BcKind,
    omega: NodeMask,
    nodes: Vec<usize>,
    local: Vec<usize>,
    difference: Csr,
    stiffness: Csr,
}

const NONE: usize = usize::MAX;

pub fn assemble_form(grid: &Grid, omega: &NodeMask, m: usize, bc: BcKind) -> Result<DiscreteForm> {
    if m == 0 {
        return invalid("operator order m must be at least 1");
    }
    if !omega.matches(grid) {
        return Err(Error::GridMismatch("omega mask does not match grid".into()));
    }
    if omega.is_empty() {
        return invalid("omega mask is empty");
    }
    let layers = omega.interior_layers(grid, m);
    if layers < m {
        return Err(Error::UnderResolved { layers, m });
    }
    let nodes: Vec<usize> = omega.indices().collect();
    let mut local = vec![NONE; grid.len()];
    for (k, &g) in nodes.iter().enumerate() {
        local[g] = k;
    }
    let difference = match bc {
        BcKind::Dirichlet => dirichlet_difference(grid, &nodes, m),
        BcKind::Navier => navier_difference(grid, &nodes, &local, m),
    };
    let mut stiffness = difference.transpose().matmul(&difference);
    stiffness.scale(grid.cell_volume());
    Ok(DiscreteForm {
        grid: grid.clone(),
        m,
        bc,
        omega: omega.clone(),
        nodes,
        local,
        difference,
        stiffness,
    })
}

/// Stencil of `(-Δ_h)^k` as offset → weight.
fn laplacian_power_stencil(spacing: &[f64], k: usize) -> BTreeMap<Vec<i64>, f64> {
    let dim = spacing.len();
    let mut st = BTreeMap::new();
    st.insert(vec![0i64; dim], 1.0);
    for _ in 0..k {
        let mut next: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (off, &w) in &st {
            for (axis, h) in spacing.iter().enumerate() {
                let c = w / (h * h);
                *next.entry(off.clone()).or_insert(0.0) += 2.0 * c;
                for s in [-1i64, 1] {
                    let mut o = off.clone();
                    o[axis] += s;
                    *next.entry(o).or_insert(0.0) -= c;
                }
            }
        }
        st = next;
    }
    st
}

struct Padded {
    dims: Vec<i64>,
    pad: i64,
}

impl Padded {
    fn new(grid: &Grid, pad: usize) -> Self {
        Padded {
            dims: grid.resolution().iter().map(|&n| n as i64 + 2 * pad as i64).collect(),
            pad: pad as i64,
        }
    }

    fn linear(&self, multi: &[usize], off: &[i64]) -> usize {
        let mut idx = 0i64;
        for axis in 0..self.dims.len() {
            let q = multi[axis] as i64 + off[axis] + self.pad;
            debug_assert!(q >= 0 && q < self.dims[axis]);
            idx = idx * self.dims[axis] + q;
        }
        idx as usize
    }
}

fn compress_rows(triplets: Vec<(usize, usize, f64)>, n_cols: usize) -> Csr {
    let mut rows: Vec<usize> = triplets.iter().map(|t| t.0).collect();
    rows.sort_unstable();
    rows.dedup();
    let remapped = triplets
        .into_iter()
        .map(|(r, c, v)| (rows.binary_search(&r).unwrap(), c, v))
        .collect();
    Csr::from_triplets(rows.len(), n_cols, remapped)
}

fn dirichlet_difference(grid: &Grid, nodes: &[usize], m: usize) -> Csr {
    let dim = grid.dim();
    let k = m / 2;
    let stencil = laplacian_power_stencil(grid.spacing(), k);
    let odd = m % 2 == 1;
    let padded = Padded::new(grid, if odd { k + 1 } else { k });
    let mut triplets = Vec::with_capacity(nodes.len() * stencil.len() * if odd { 2 * dim } else { 1 });
    let mut multi = vec![0usize; dim];
    for (col, &g) in nodes.iter().enumerate() {
        grid.multi_index_into(g, &mut multi);
        for (off, &w) in &stencil {
            let q = padded.linear(&multi, off);
            if odd {
                // edge (q, axis) carries (v(q + e_axis) − v(q)) / h
                for (axis, h) in grid.spacing().iter().enumerate() {
                    triplets.push((q * dim + axis, col, -w / h));
                    let mut back = off.clone();
                    back[axis] -= 1;
                    let qb = padded.linear(&multi, &back);
                    triplets.push((qb * dim + axis, col, w / h));
                }
            } else {
                triplets.push((q, col, w));
            }
        }
    }
    compress_rows(triplets, nodes.len())
}

fn navier_difference(grid: &Grid, nodes: &[usize], local: &[usize], m: usize) -> Csr {
    let dim = grid.dim();
    let n = nodes.len();
    let mut lap = Vec::with_capacity(n * (2 * dim + 1));
    for (row, &g) in nodes.iter().enumerate() {
        let mut diag = 0.0;
        for (axis, h) in grid.spacing().iter().enumerate() {
            let c = 1.0 / (h * h);
            diag += 2.0 * c;
            for s in [-1isize, 1] {
                if let Some(nb) = grid.neighbor(g, axis, s) {
                    if local[nb] != NONE {
                        lap.push((row, local[nb], -c));
                    }
                }
            }
        }
        lap.push((row, row, diag));
    }
    let a_omega = Csr::from_triplets(n, n, lap);
    let k = m / 2;
    let mut power = if k == 0 { Csr::identity(n) } else { a_omega.clone() };
    for _ in 1..k {
        power = a_omega.matmul(&power);
    }
    if m % 2 == 0 {
        return power;
    }
    let padded = Padded::new(grid, 1);
    let zero = vec![0i64; dim];
    let mut edges = Vec::with_capacity(n * 2 * dim);
    let mut multi = vec![0usize; dim];
    for (col, &g) in nodes.iter().enumerate() {
        grid.multi_index_into(g, &mut multi);
        let q = padded.linear(&multi, &zero);
        for (axis, h) in grid.spacing().iter().enumerate() {
            edges.push((q * dim + axis, col, -1.0 / h));
            let mut back = zero.clone();
            back[axis] = -1;
            let qb = padded.linear(&multi, &back);
            edges.push((qb * dim + axis, col, 1.0 / h));
        }
    }
    compress_rows(edges, n).matmul(&power)
}

impl DiscreteForm {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn omega(&self) -> &NodeMask {
        &self.omega
    }

    /// Number of Ω nodes (the unconstrained set before holes are cut).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Global node index of each local unknown.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Local index of a global node, if it lies in Ω.
    pub fn local_index(&self, global: usize) -> Option<usize> {
        let l = self.local[global];
        (l != NONE).then_some(l)
    }

    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    /// The composed difference operator `D` (rows = summation set).
    pub fn difference_operator(&self) -> &Csr {
        &self.difference
    }

    pub fn summation_len(&self) -> usize {
        self.difference.n_rows()
    }

    /// Values of `u` on Ω in local order.
    pub fn restrict(&self, u: &GridFunction) -> Result<Vec<f64>> {
        if !u.matches(&self.grid) {
            return Err(Error::GridMismatch("grid function does not match the form's grid".into()));
        }
        Ok(self.nodes.iter().map(|&g| u.values[g]).collect())
    }

    /// Zero extension of a local vector to the whole grid.
    pub fn extend(&self, local: &[f64]) -> GridFunction {
        let mut values = vec![0.0; self.grid.len()];
        for (&g, &v) in self.nodes.iter().zip(local) {
            values[g] = v;
        }
        GridFunction {
            shape: self.grid.resolution().to_vec(),
            values,
        }
    }

    pub fn energy_local(&self, u: &[f64]) -> f64 {
        let du = self.difference.matvec(u);
        self.grid.cell_volume() * dot(&du, &du)
    }

    pub fn energy_bilinear_local(&self, u: &[f64], v: &[f64]) -> f64 {
        let du = self.difference.matvec(u);
        let dv = self.difference.matvec(v);
        self.grid.cell_volume() * dot(&du, &dv)
    }

    /// Dumps the stiffness as `row col value` triplets.
    pub fn write_stiffness<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        self.stiffness.write_triplets(w)
    }
}

/// `q_m(u,u)` with `u` zero-extended outside Ω.
pub fn energy(form: &DiscreteForm, u: &GridFunction) -> Result<f64> {
    Ok(form.energy_local(&form.restrict(u)?))
}

/// `q_m(u,v)`.
pub fn energy_bilinear(form: &DiscreteForm, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    Ok(form.energy_bilinear_local(&form.restrict(u)?, &form.restrict(v)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardyRellich {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    /// Some node with `|x| < h/2` carried a nonzero value.
    pub regularized: bool,
}

/// Grid evaluation of `(N−4)²∫u²/|x|⁴ + 2(N−4)∫|∇u|²/|x|² ≤ ∫(Δu)²` for a
/// grid function vanishing outside Ω. `|x|` is replaced by `max(|x|, h/2)`.
pub fn hardy_rellich_check(
    grid: &Grid,
    omega: &NodeMask,
    u: &GridFunction,
    n: usize,
    tol: f64,
) -> Result<HardyRellich> {
    if n <= 4 {
        return invalid("Hardy-Rellich check needs N > 4");
    }
    if grid.dim() != n {
        return Err(Error::GridMismatch(format!("grid dimension {} but N = {n}", grid.dim())));
    }
    if !u.matches(grid) || !omega.matches(grid) {
        return Err(Error::GridMismatch("u or omega does not match the grid".into()));
    }
    let val = |i: usize| if omega.contains(i) { u.values[i] } else { 0.0 };
    let hmax = grid.spacing().iter().cloned().fold(0.0, f64::max);
    let floor = 0.5 * hmax;
    let c = (n - 4) as f64;
    let mut x = vec![0.0; n];
    let (mut a, mut b, mut rhs) = (0.0, 0.0, 0.0);
    let mut regularized = false;
    for i in omega.indices() {
        let ui = val(i);
        grid.coord_into(i, &mut x);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < floor && ui != 0.0 {
            regularized = true;
        }
        let r = r.max(floor);
        let mut grad2 = 0.0;
        let mut lap = 0.0;
        for (axis, h) in grid.spacing().iter().enumerate() {
            let up = grid.neighbor(i, axis, 1).map_or(0.0, val);
            let dn = grid.neighbor(i, axis, -1).map_or(0.0, val);
            grad2 += ((up - dn) / (2.0 * h)).powi(2);
            lap += (up - 2.0 * ui + dn) / (h * h);
        }
        a += ui * ui / r.powi(4);
        b += grad2 / (r * r);
        rhs += lap * lap;
    }
    let cell = grid.cell_volume();
    let lhs = cell * (c * c * a + 2.0 * c * b);
    let rhs = cell * rhs;
    Ok(HardyRellich {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + tol),
        regularized,
    })
}

/// The same inequality for a radial profile on the unit ball of R^N, by
/// Gauss-Legendre quadrature. `profile(r)` returns `(u, u', u'')`.
pub fn hardy_rellich_radial(
    profile: impl Fn(f64) -> (f64, f64, f64),
    n: usize,
    tol: f64,
) -> Result<HardyRellich> {
    if n <= 4 {
        return invalid("Hardy-Rellich check needs N > 4");
    }
    let (u1, _, _) = profile(1.0);
    if u1.abs() > 1e-12 {
        return invalid("radial profile must vanish at r = 1");
    }
    let nf = n as f64;
    let c = nf - 4.0;
    let area = crate::grid::sphere_area(n);
    let (rs, ws) = gauss_legendre_on(200, 0.0, 1.0);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (&r, &w) in rs.iter().zip(&ws) {
        let (u, du, ddu) = profile(r);
        let jac = r.powi(n as i32 - 1);
        lhs += w * (c * c * u * u / r.powi(4) + 2.0 * c * du * du / (r * r)) * jac;
        let lap = ddu + (nf - 1.0) * du / r;
        rhs += w * lap * lap * jac;
    }
    let lhs = area * lhs;
    let rhs = area * rhs;
    Ok(HardyRellich {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + tol),
        regularized: false,
    })
}
