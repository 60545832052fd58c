use proptest::prelude::*;

use polycap::asymptotics::{fit_rate, is_polyharmonic, polyharmonic_basis, SweepRow};
use polycap::capacity::weighted_capacity;
use polycap::cli::{read_csv, write_csv};
use polycap::grid::{build_grid, rasterize, rasterize_interior, scale_region, BoundingBox, Grid, RegionSpec};
use polycap::operator::{assemble_form, energy, energy_bilinear, BcKind, GridFunction};
use polycap::radial::{exterior_capacity, radial_eigs, RadialProblem};

fn square(res: usize) -> Grid {
    build_grid(&BoundingBox::cube(2, -1.0, 1.0).unwrap(), &[res, res]).unwrap()
}

fn disc(grid: &Grid) -> polycap::grid::NodeMask {
    rasterize_interior(grid, &RegionSpec::centered_ball(2, 1.0)).unwrap()
}

fn smooth(grid: &Grid, a: f64, b: f64, c: f64) -> GridFunction {
    GridFunction::from_fn(grid, |x| a + b * x[0] + c * x[0] * x[1] + (3.0 * x[1]).sin())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nested_regions_give_nested_masks(r1 in 0.05f64..0.9, dr in 0.0f64..0.5, cx in -0.1f64..0.1, res in 9usize..40) {
        let grid = square(res);
        let a = rasterize(&grid, &RegionSpec::ball(vec![cx, 0.0], r1)).unwrap();
        let b = rasterize(&grid, &RegionSpec::ball(vec![cx, 0.0], r1 + dr)).unwrap();
        prop_assert!(a.is_subset_of(&b));
        prop_assert_eq!(a.len(), res * res);
        prop_assert_eq!(a, rasterize(&grid, &RegionSpec::ball(vec![cx, 0.0], r1)).unwrap());
    }

    #[test]
    fn node_index_roundtrip(nx in 3usize..12, ny in 3usize..12, nz in 3usize..6) {
        let grid = build_grid(&BoundingBox::new(vec![0.0, -1.0, 2.0], vec![1.0, 3.0, 2.5]).unwrap(), &[nx, ny, nz]).unwrap();
        prop_assert_eq!(grid.len(), nx * ny * nz);
        for i in 0..grid.len() {
            let mi = grid.multi_index(i);
            prop_assert_eq!(grid.index(&mi), i);
            prop_assert_eq!(grid.nearest_node(&grid.coord(i)), Some(i));
        }
    }

    #[test]
    fn scaled_ball_rasterizes_exactly(eps in 0.05f64..1.0, res in 9usize..33) {
        let grid = square(res);
        let k = RegionSpec::centered_ball(2, 0.8);
        let direct = rasterize(&grid, &RegionSpec::centered_ball(2, 0.8 * eps)).unwrap();
        prop_assert_eq!(rasterize(&grid, &scale_region(&k, eps).unwrap()).unwrap(), direct);
    }

    #[test]
    fn energy_is_symmetric_and_nonnegative(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, m in 1usize..3, navier in any::<bool>()) {
        let grid = square(21);
        let omega = disc(&grid);
        let bc = if navier { BcKind::Navier } else { BcKind::Dirichlet };
        let form = assemble_form(&grid, &omega, m, bc).unwrap();
        let u = smooth(&grid, a, b, c);
        let v = smooth(&grid, c, a, b);
        prop_assert_eq!(energy_bilinear(&form, &u, &v).unwrap(), energy_bilinear(&form, &v, &u).unwrap());
        prop_assert!(energy(&form, &u).unwrap() >= 0.0);
    }

    #[test]
    fn navier_and_dirichlet_agree_on_interior_support(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let grid = square(25);
        let omega = disc(&grid);
        let u = GridFunction::from_fn(&grid, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 < 0.25 { (0.25 - r2).powi(3) * (1.0 + a * x[0] + b * x[1]) } else { 0.0 }
        });
        let d = energy(&assemble_form(&grid, &omega, 2, BcKind::Dirichlet).unwrap(), &u).unwrap();
        let n = energy(&assemble_form(&grid, &omega, 2, BcKind::Navier).unwrap(), &u).unwrap();
        prop_assert_eq!(d, n);
    }

    #[test]
    fn capacity_is_quadratic_and_monotone(r in 0.1f64..0.3, dr in 0.02f64..0.2, scale in 0.1f64..5.0) {
        let grid = square(25);
        let omega = disc(&grid);
        let form = assemble_form(&grid, &omega, 1, BcKind::Dirichlet).unwrap();
        let data = GridFunction::from_fn(&grid, |x| 1.0 + 0.3 * x[0]);
        let small = rasterize(&grid, &RegionSpec::centered_ball(2, r)).unwrap();
        let large = rasterize(&grid, &RegionSpec::centered_ball(2, r + dr)).unwrap();
        let a = weighted_capacity(&form, &small, &data).unwrap().value;
        let b = weighted_capacity(&form, &large, &data).unwrap().value;
        let c = weighted_capacity(&form, &small, &data.scaled(scale)).unwrap().value;
        prop_assert!(a <= b * (1.0 + 1e-8));
        prop_assert!(((c - scale * scale * a) / (scale * scale * a)).abs() < 1e-8);
    }

    #[test]
    fn navier_capacity_below_dirichlet(r in 0.1f64..0.4, cx in -0.2f64..0.2) {
        let grid = square(25);
        let omega = disc(&grid);
        let hole = rasterize(&grid, &RegionSpec::ball(vec![cx, 0.1], r)).unwrap();
        let data = GridFunction::from_fn(&grid, |_| 1.0);
        let d = weighted_capacity(&assemble_form(&grid, &omega, 2, BcKind::Dirichlet).unwrap(), &hole, &data).unwrap().value;
        let n = weighted_capacity(&assemble_form(&grid, &omega, 2, BcKind::Navier).unwrap(), &hole, &data).unwrap().value;
        prop_assert!(n <= d * (1.0 + 1e-8));
    }

    #[test]
    fn exterior_capacity_scaling_law(rho in 0.05f64..3.0, m in 1usize..3) {
        let n = 2 * m + 1 + (m - 1) * 2;
        let base = exterior_capacity(m, n, 0, 1.0, 1.0, 0.0).unwrap().value;
        let scaled = exterior_capacity(m, n, 0, rho, 1.0, 0.0).unwrap().value;
        let expected = rho.powi(n as i32 - 2 * m as i32) * base;
        prop_assert!(((scaled - expected) / expected).abs() < 1e-6);
    }

    #[test]
    fn annulus_eigenvalue_grows_with_hole(e1 in 0.01f64..0.3, de in 0.01f64..0.3) {
        let lam = |eps: f64| radial_eigs(&RadialProblem { n: 5, m: 2, ell: 0, inner_radius: eps, outer_bc: BcKind::Navier }, 1).unwrap().eigenvalues[0];
        prop_assert!(lam(e1) <= lam(e1 + de) * (1.0 + 1e-9));
    }

    #[test]
    fn power_laws_are_fitted_exactly(c in 0.01f64..1000.0, p in -1.0f64..4.0, e0 in 0.05f64..0.5) {
        let pts: Vec<_> = (0..6).map(|k| { let e = e0 * 0.6f64.powi(k); (e, c * e.powf(p)) }).collect();
        let f = fit_rate(&pts).unwrap();
        prop_assert!((f.rate - p).abs() < 1e-12 * (1.0 + p.abs()) * 10.0);
        prop_assert!(((f.coefficient - c) / c).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&f.r_squared));
    }

    #[test]
    fn noisy_fits_keep_r_squared_in_range(noise in prop::collection::vec(-0.5f64..0.5, 5)) {
        let pts: Vec<_> = noise.iter().enumerate().map(|(k, z)| { let e = 0.1 / (k + 1) as f64; (e, e * z.exp()) }).collect();
        let f = fit_rate(&pts).unwrap();
        prop_assert!((0.0..=1.0).contains(&f.r_squared));
    }

    #[test]
    fn sweep_rows_roundtrip_through_csv(
        vals in prop::collection::vec((1e-4f64..1.0, 0.0f64..1e3, -1e3f64..1e3, 0.0f64..1e4, 0.0f64..1e4, 0usize..10_000), 1..6)
    ) {
        let rows: Vec<SweepRow> = vals.iter().map(|&(e, cc, cw, lb, lp, it)| SweepRow::new(e, cc, cw, lb, lp, it)).collect();
        for r in &rows {
            prop_assert_eq!(r.diff, r.lambda_pert - r.lambda_base);
            if r.cap_weighted > 0.0 { prop_assert_eq!(r.ratio, r.diff / r.cap_weighted); } else { prop_assert!(r.ratio.is_nan()); }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        write_csv(&rows, &path).unwrap();
        let back = read_csv(&path).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            for (x, y) in [(a.eps, b.eps), (a.cap_cond, b.cap_cond), (a.cap_weighted, b.cap_weighted), (a.lambda_base, b.lambda_base), (a.lambda_pert, b.lambda_pert), (a.diff, b.diff), (a.ratio, b.ratio)] {
                prop_assert!(x == y || (x.is_nan() && y.is_nan()));
            }
            prop_assert_eq!(a.solver_iters, b.solver_iters);
        }
    }
}

#[test]
fn polyharmonic_bases_are_exact() {
    for (gamma, m, n) in [(2, 1, 2), (3, 1, 3), (4, 2, 3), (3, 2, 5), (4, 1, 4)] {
        for p in polyharmonic_basis(gamma, m, n) {
            assert!(is_polyharmonic(&p, m));
            assert_eq!(p.homogeneous_degree(), Some(gamma));
        }
    }
}
