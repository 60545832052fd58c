//! Cartesian grids, region specifications and node masks.
//!
//! Nodes are ordered lexicographically with the last axis varying fastest.
//! That ordering is global: sparse patterns, CSV dumps and masks all rely on
//! it, so two runs with the same inputs produce identical node numbering.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest dimension accepted by [`build_grid`].
pub const MAX_GRID_DIM: usize = 4;

/// Node budget for [`Grid::spot_check`] grids in higher dimension.
pub const SPOT_CHECK_MAX_NODES: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return invalid("bounding box corners must have the same nonzero length");
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return invalid("bounding box needs lo[i] < hi[i] on every axis");
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[a, b]^dim`.
    pub fn cube(dim: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a; dim], vec![b; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }
}

/// Uniform tensor-product grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    bbox: BoundingBox,
    resolution: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

/// Builds a grid with `resolution[i]` nodes on axis `i` (a single entry is
/// broadcast to every axis).
pub fn build_grid(bbox: &BoundingBox, resolution: &[usize]) -> Result<Grid> {
    if bbox.dim() > MAX_GRID_DIM {
        return Err(Error::DimensionUnsupported(bbox.dim()));
    }
    Grid::with_limits(bbox, resolution, usize::MAX)
}

impl Grid {
    /// Grid in dimension up to 6 with a hard node budget. Used for pointwise
    /// spot checks (the Hardy-Rellich residual in N = 5), never for solves.
    pub fn spot_check(bbox: &BoundingBox, resolution: &[usize]) -> Result<Grid> {
        if bbox.dim() > 6 {
            return Err(Error::DimensionUnsupported(bbox.dim()));
        }
        Grid::with_limits(bbox, resolution, SPOT_CHECK_MAX_NODES)
    }

    fn with_limits(bbox: &BoundingBox, resolution: &[usize], max_nodes: usize) -> Result<Grid> {
        let dim = bbox.dim();
        let resolution: Vec<usize> = match resolution.len() {
            1 => vec![resolution[0]; dim],
            n if n == dim => resolution.to_vec(),
            n => return invalid(format!("resolution has {n} entries for a {dim}-dimensional box")),
        };
        if resolution.iter().any(|&r| r < 3) {
            return invalid("resolution must be at least 3 nodes per axis");
        }
        let len = resolution
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r))
            .filter(|&n| n <= max_nodes)
            .ok_or_else(|| Error::Invalid("grid node count exceeds budget".into()))?;
        let spacing = (0..dim)
            .map(|i| (bbox.hi[i] - bbox.lo[i]) / (resolution[i] - 1) as f64)
            .collect();
        let mut strides = vec![1usize; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * resolution[i + 1];
        }
        Ok(Grid {
            bbox: bbox.clone(),
            resolution,
            spacing,
            strides,
            len,
        })
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Product of the spacings: the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index_into(&self, idx: usize, out: &mut [usize]) {
        let mut rest = idx;
        for (axis, s) in self.strides.iter().enumerate() {
            out[axis] = rest / s;
            rest %= s;
        }
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        self.multi_index_into(idx, &mut out);
        out
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        self.bbox.lo[axis] + i as f64 * self.spacing[axis]
    }

    pub fn coord_into(&self, idx: usize, out: &mut [f64]) {
        let mut rest = idx;
        for (axis, s) in self.strides.iter().enumerate() {
            out[axis] = self.axis_coord(axis, rest / s);
            rest %= s;
        }
    }

    pub fn coord(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.coord_into(idx, &mut out);
        out
    }

    /// Neighbor `step` nodes away along `axis`, if it lies on the grid.
    pub fn neighbor(&self, idx: usize, axis: usize, step: isize) -> Option<usize> {
        let i = (idx / self.strides[axis]) % self.resolution[axis];
        let j = i as isize + step;
        if j < 0 || j >= self.resolution[axis] as isize {
            None
        } else {
            Some((idx as isize + step * self.strides[axis] as isize) as usize)
        }
    }

    /// Node closest to `x`, or `None` when `x` lies outside the box.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        let mut multi = vec![0; self.dim()];
        for axis in 0..self.dim() {
            let t = (x[axis] - self.bbox.lo[axis]) / self.spacing[axis];
            let i = t.round();
            if i < 0.0 || i > (self.resolution[axis] - 1) as f64 {
                return None;
            }
            multi[axis] = i as usize;
        }
        Some(self.index(&multi))
    }

    /// Multilinear interpolation of node values at `x` (zero outside the box).
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let dim = self.dim();
        let mut base = vec![0usize; dim];
        let mut frac = vec![0.0; dim];
        for axis in 0..dim {
            let t = (x[axis] - self.bbox.lo[axis]) / self.spacing[axis];
            let last = (self.resolution[axis] - 1) as f64;
            if !(0.0..=last).contains(&t) {
                return 0.0;
            }
            let i = t.floor().min(last - 1.0);
            base[axis] = i as usize;
            frac[axis] = t - i;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut idx = 0;
            for axis in 0..dim {
                let bit = (corner >> axis) & 1;
                w *= if bit == 1 { frac[axis] } else { 1.0 - frac[axis] };
                idx += (base[axis] + bit) * self.strides[axis];
            }
            if w != 0.0 {
                acc += w * values[idx];
            }
        }
        acc
    }
}

/// Region in R^N, all coordinates in domain units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ellipsoid { center: Vec<f64>, semiaxes: Vec<f64> },
    Union { parts: Vec<RegionSpec> },
    Scaled { inner: std::boxed::Box<RegionSpec>, factor: f64 },
}

impl RegionSpec {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        RegionSpec::Ball { center, radius }
    }

    pub fn centered_ball(dim: usize, radius: f64) -> Self {
        RegionSpec::Ball {
            center: vec![0.0; dim],
            radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegionSpec::Ball { radius, .. } if *radius < 0.0 || !radius.is_finite() => {
                invalid("ball radius must be a finite nonnegative number")
            }
            RegionSpec::Box { lo, hi } if lo.len() != hi.len() => {
                invalid("box corners differ in dimension")
            }
            RegionSpec::Ellipsoid { center, semiaxes } => {
                if center.len() != semiaxes.len() {
                    invalid("ellipsoid center and semiaxes differ in dimension")
                } else if semiaxes.iter().any(|a| *a < 0.0) {
                    invalid("ellipsoid semiaxes must be nonnegative")
                } else {
                    Ok(())
                }
            }
            RegionSpec::Union { parts } => {
                if parts.is_empty() {
                    return invalid("union must have at least one part");
                }
                parts.iter().try_for_each(RegionSpec::validate)
            }
            RegionSpec::Scaled { inner, factor } => {
                if !(*factor > 0.0) {
                    return invalid("scale factor must be positive");
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RegionSpec::Ball { center, .. } => center.len(),
            RegionSpec::Box { lo, .. } => lo.len(),
            RegionSpec::Ellipsoid { center, .. } => center.len(),
            RegionSpec::Union { parts } => parts.first().map_or(0, RegionSpec::dim),
            RegionSpec::Scaled { inner, .. } => inner.dim(),
        }
    }

    /// Closed-set membership; boundary points are members.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            // a zero-radius ball is a point, rasterized as empty
            RegionSpec::Ball { center, radius } => *radius > 0.0 && dist2(x, center) <= radius * radius,
            RegionSpec::Box { lo, hi } => (0..lo.len()).all(|i| lo[i] <= x[i] && x[i] <= hi[i]),
            RegionSpec::Ellipsoid { center, semiaxes } => {
                semiaxes.iter().all(|a| *a > 0.0) && ellipsoid_level(x, center, semiaxes) <= 1.0
            }
            RegionSpec::Union { parts } => parts.iter().any(|p| p.contains(x)),
            RegionSpec::Scaled { inner, factor } => {
                let y: Vec<f64> = x.iter().map(|v| v / factor).collect();
                inner.contains(&y)
            }
        }
    }

    /// Open-set membership (strict inequalities).
    pub fn contains_open(&self, x: &[f64]) -> bool {
        match self {
            RegionSpec::Ball { center, radius } => dist2(x, center) < radius * radius,
            RegionSpec::Box { lo, hi } => (0..lo.len()).all(|i| lo[i] < x[i] && x[i] < hi[i]),
            RegionSpec::Ellipsoid { center, semiaxes } => ellipsoid_level(x, center, semiaxes) < 1.0,
            RegionSpec::Union { parts } => parts.iter().any(|p| p.contains_open(x)),
            RegionSpec::Scaled { inner, factor } => {
                let y: Vec<f64> = x.iter().map(|v| v / factor).collect();
                inner.contains_open(&y)
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            RegionSpec::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            RegionSpec::Box { lo, hi } => (lo.clone(), hi.clone()),
            RegionSpec::Ellipsoid { center, semiaxes } => (
                center.iter().zip(semiaxes).map(|(c, a)| c - a).collect(),
                center.iter().zip(semiaxes).map(|(c, a)| c + a).collect(),
            ),
            RegionSpec::Union { parts } => {
                let (mut lo, mut hi) = parts[0].bounds();
                for p in &parts[1..] {
                    let (l, h) = p.bounds();
                    for i in 0..lo.len() {
                        lo[i] = lo[i].min(l[i]);
                        hi[i] = hi[i].max(h[i]);
                    }
                }
                (lo, hi)
            }
            RegionSpec::Scaled { inner, factor } => {
                let (lo, hi) = inner.bounds();
                (
                    lo.iter().map(|v| v * factor).collect(),
                    hi.iter().map(|v| v * factor).collect(),
                )
            }
        }
    }

    /// A ball containing the region: `(center, radius)`.
    pub fn bounding_ball(&self) -> (Vec<f64>, f64) {
        match self.simplified() {
            RegionSpec::Ball { center, radius } => (center, radius),
            RegionSpec::Ellipsoid { center, semiaxes } => {
                let r = semiaxes.iter().cloned().fold(0.0, f64::max);
                (center, r)
            }
            other => {
                let (lo, hi) = other.bounds();
                let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let r = dist2(&lo, &center).sqrt();
                (center, r)
            }
        }
    }

    /// Exact volume for balls, boxes and ellipsoids; `None` for unions.
    pub fn exact_volume(&self) -> Option<f64> {
        match self.simplified() {
            RegionSpec::Ball { center, radius } => {
                Some(unit_ball_volume(center.len()) * radius.powi(center.len() as i32))
            }
            RegionSpec::Box { lo, hi } => Some(lo.iter().zip(&hi).map(|(a, b)| (b - a).max(0.0)).product()),
            RegionSpec::Ellipsoid { semiaxes, .. } => {
                Some(unit_ball_volume(semiaxes.len()) * semiaxes.iter().product::<f64>())
            }
            _ => None,
        }
    }

    /// Pushes every `Scaled` wrapper into the primitives it wraps.
    pub fn simplified(&self) -> RegionSpec {
        match self {
            RegionSpec::Scaled { inner, factor } => inner.simplified().scaled_by(*factor),
            RegionSpec::Union { parts } => RegionSpec::Union {
                parts: parts.iter().map(RegionSpec::simplified).collect(),
            },
            other => other.clone(),
        }
    }

    fn scaled_by(&self, f: f64) -> RegionSpec {
        let s = |v: &Vec<f64>| v.iter().map(|x| x * f).collect::<Vec<_>>();
        match self {
            RegionSpec::Ball { center, radius } => RegionSpec::Ball {
                center: s(center),
                radius: radius * f,
            },
            RegionSpec::Box { lo, hi } => RegionSpec::Box { lo: s(lo), hi: s(hi) },
            RegionSpec::Ellipsoid { center, semiaxes } => RegionSpec::Ellipsoid {
                center: s(center),
                semiaxes: s(semiaxes),
            },
            RegionSpec::Union { parts } => RegionSpec::Union {
                parts: parts.iter().map(|p| p.scaled_by(f)).collect(),
            },
            RegionSpec::Scaled { inner, factor } => inner.scaled_by(factor * f),
        }
    }
}

/// Maps every point `x` of the region to `eps * x`.
pub fn scale_region(region: &RegionSpec, eps: f64) -> Result<RegionSpec> {
    if !(eps > 0.0) || !eps.is_finite() {
        return invalid("scale factor must be positive");
    }
    region.validate()?;
    Ok(region.simplified().scaled_by(eps))
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn ellipsoid_level(x: &[f64], center: &[f64], semiaxes: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..center.len() {
        let d = x[i] - center[i];
        if semiaxes[i] == 0.0 {
            if d != 0.0 {
                return f64::INFINITY;
            }
        } else {
            acc += (d / semiaxes[i]).powi(2);
        }
    }
    acc
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Surface measure |S^{n-1}| of the unit sphere in R^n.
pub fn sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / libm::tgamma(half)
}

/// Boolean membership per grid node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeMask {
    shape: Vec<usize>,
    members: Vec<bool>,
    /// The rasterized region extended past the grid box.
    pub clipped: bool,
}

impl NodeMask {
    pub fn empty(grid: &Grid) -> Self {
        NodeMask {
            shape: grid.resolution().to_vec(),
            members: vec![false; grid.len()],
            clipped: false,
        }
    }

    pub fn full(grid: &Grid) -> Self {
        NodeMask {
            shape: grid.resolution().to_vec(),
            members: vec![true; grid.len()],
            clipped: false,
        }
    }

    pub fn from_members(grid: &Grid, members: Vec<bool>) -> Result<Self> {
        if members.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "mask has {} entries, grid has {} nodes",
                members.len(),
                grid.len()
            )));
        }
        Ok(NodeMask {
            shape: grid.resolution().to_vec(),
            members,
            clipped: false,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        self.shape == grid.resolution()
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members[idx]
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        self.members[idx] = value;
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn is_subset_of(&self, other: &NodeMask) -> bool {
        self.shape == other.shape && self.members.iter().zip(&other.members).all(|(&a, &b)| !a || b)
    }

    pub fn union(&self, other: &NodeMask) -> NodeMask {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &NodeMask) -> NodeMask {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &NodeMask) -> NodeMask {
        self.combine(other, |a, b| a && !b)
    }

    fn combine(&self, other: &NodeMask, f: impl Fn(bool, bool) -> bool) -> NodeMask {
        assert_eq!(self.shape, other.shape, "mask shapes differ");
        NodeMask {
            shape: self.shape.clone(),
            members: self.members.iter().zip(&other.members).map(|(&a, &b)| f(a, b)).collect(),
            clipped: self.clipped || other.clipped,
        }
    }

    /// Number of erosion steps (axis-neighbor stencil) before the mask
    /// vanishes, capped at `cap`.
    pub fn interior_layers(&self, grid: &Grid, cap: usize) -> usize {
        let mut current = self.members.clone();
        for layer in 0..cap {
            if !current.iter().any(|&b| b) {
                return layer;
            }
            let next: Vec<bool> = (0..current.len())
                .map(|i| {
                    current[i]
                        && (0..grid.dim()).all(|axis| {
                            [-1isize, 1].iter().all(|&s| {
                                grid.neighbor(i, axis, s).map_or(false, |j| current[j])
                            })
                        })
                })
                .collect();
            current = next;
        }
        cap
    }
}

/// Closed-set rasterization: a node belongs to the mask iff its coordinate
/// lies in the closed region.
pub fn rasterize(grid: &Grid, region: &RegionSpec) -> Result<NodeMask> {
    rasterize_with(grid, region, RegionSpec::contains)
}

/// Open-set rasterization, used for domains Ω so that nodes on ∂Ω are not
/// free.
pub fn rasterize_interior(grid: &Grid, region: &RegionSpec) -> Result<NodeMask> {
    rasterize_with(grid, region, RegionSpec::contains_open)
}

fn rasterize_with(
    grid: &Grid,
    region: &RegionSpec,
    test: fn(&RegionSpec, &[f64]) -> bool,
) -> Result<NodeMask> {
    region.validate()?;
    if region.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "region is {}-dimensional, grid is {}-dimensional",
            region.dim(),
            grid.dim()
        )));
    }
    let region = region.simplified();
    let members: Vec<bool> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.dim()],
            |x, idx| {
                grid.coord_into(idx, x);
                test(&region, x)
            },
        )
        .collect();
    let (lo, hi) = region.bounds();
    let clipped = BoundingBox { lo, hi };
    let clipped = !grid.bbox().contains_box(&clipped);
    Ok(NodeMask {
        shape: grid.resolution().to_vec(),
        members,
        clipped,
    })
}

/// Node-count quadrature of the region: members × cell volume.
pub fn region_volume(region: &RegionSpec, grid: &Grid) -> Result<f64> {
    Ok(rasterize(grid, region)?.count() as f64 * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_three_nodes() {
        let g = build_grid(&BoundingBox::cube(1, -1.0, 1.0).unwrap(), &[3]).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.spacing(), &[1.0]);
        let xs: Vec<f64> = (0..3).map(|i| g.coord(i)[0]).collect();
        assert_eq!(xs, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn unit_square_spacing() {
        let g = build_grid(&BoundingBox::cube(2, 0.0, 1.0).unwrap(), &[3, 3]).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.spacing(), &[0.5, 0.5]);
    }

    #[test]
    fn cube_node_count() {
        let g = build_grid(&BoundingBox::cube(3, -1.0, 1.0).unwrap(), &[65]).unwrap();
        assert_eq!(g.len(), 274_625);
    }

    #[test]
    fn rejects_bad_inputs() {
        let b5 = BoundingBox::cube(5, 0.0, 1.0).unwrap();
        assert!(matches!(build_grid(&b5, &[3]), Err(Error::DimensionUnsupported(5))));
        let b2 = BoundingBox::cube(2, 0.0, 1.0).unwrap();
        assert!(build_grid(&b2, &[2, 3]).is_err());
        assert!(BoundingBox::new(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn index_roundtrip_is_lexicographic() {
        let g = build_grid(&BoundingBox::cube(3, 0.0, 1.0).unwrap(), &[3, 4, 5]).unwrap();
        assert_eq!(g.index(&[0, 0, 1]), 1);
        assert_eq!(g.index(&[0, 1, 0]), 5);
        for idx in 0..g.len() {
            assert_eq!(g.index(&g.multi_index(idx)), idx);
        }
    }

    #[test]
    fn zero_radius_ball_is_empty() {
        let g = build_grid(&BoundingBox::cube(2, -1.0, 1.0).unwrap(), &[5]).unwrap();
        let m = rasterize(&g, &RegionSpec::centered_ball(2, 0.0)).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn whole_box_is_full() {
        let b = BoundingBox::cube(2, -1.0, 1.0).unwrap();
        let g = build_grid(&b, &[7]).unwrap();
        let r = RegionSpec::Box { lo: b.lo.clone(), hi: b.hi.clone() };
        let m = rasterize(&g, &r).unwrap();
        assert_eq!(m.count(), g.len());
        assert!(!m.clipped);
    }

    #[test]
    fn half_ball_on_coarse_grid_hits_five_nodes() {
        let g = build_grid(&BoundingBox::cube(2, -1.0, 1.0).unwrap(), &[5]).unwrap();
        let m = rasterize(&g, &RegionSpec::centered_ball(2, 0.5)).unwrap();
        let mut hits: Vec<Vec<f64>> = m.indices().map(|i| g.coord(i)).collect();
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            hits,
            vec![vec![-0.5, 0.0], vec![0.0, -0.5], vec![0.0, 0.0], vec![0.0, 0.5], vec![0.5, 0.0]]
        );
    }

    #[test]
    fn scaling_examples() {
        let b = RegionSpec::centered_ball(2, 1.0);
        assert_eq!(scale_region(&b, 1.0).unwrap(), b);
        assert_eq!(scale_region(&b, 0.25).unwrap(), RegionSpec::centered_ball(2, 0.25));
        let twice = scale_region(&scale_region(&b, 0.5).unwrap(), 0.5).unwrap();
        assert_eq!(twice, RegionSpec::centered_ball(2, 0.25));
        assert!(scale_region(&b, 0.0).is_err());
        assert!(scale_region(&b, -1.0).is_err());
    }

    #[test]
    fn volumes_by_node_count() {
        let g = build_grid(&BoundingBox::cube(2, 0.0, 1.0).unwrap(), &[101]).unwrap();
        let empty = RegionSpec::centered_ball(2, 0.0);
        assert_eq!(region_volume(&empty, &g).unwrap(), 0.0);
        let sq = RegionSpec::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        let v = region_volume(&sq, &g).unwrap();
        assert!((v - 1.0).abs() < 0.03, "{v}");

        let g = build_grid(&BoundingBox::cube(2, -1.0, 1.0).unwrap(), &[201]).unwrap();
        let v = region_volume(&RegionSpec::centered_ball(2, 0.5), &g).unwrap();
        let exact = std::f64::consts::PI * 0.25;
        assert!((v - exact).abs() / exact < 0.02, "{v}");
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let g = build_grid(&BoundingBox::cube(2, -1.0, 1.0).unwrap(), &[9]).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| {
            let x = g.coord(i);
            1.0 + 2.0 * x[0] - 3.0 * x[1]
        }).collect();
        let v = g.interpolate(&vals, &[0.13, -0.41]);
        assert!((v - (1.0 + 0.26 + 1.23)).abs() < 1e-12);
    }
}
