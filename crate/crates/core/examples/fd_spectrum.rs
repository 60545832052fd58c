//! Lowest eigenvalues of the discrete Laplacian and bilaplacian on the unit
//! square against the closed forms of the 5-point stencil.
use polycap::grid::{build_grid, rasterize_interior, BoundingBox, RegionSpec};
use polycap::operator::{assemble_form, BcKind, MassWeights};
use polycap::spectrum::solve_eigs;
use std::f64::consts::PI;

fn main() -> polycap::Result<()> {
    let res = 33;
    let grid = build_grid(&BoundingBox::cube(2, 0.0, 1.0)?, &[res])?;
    let omega = rasterize_interior(&grid, &RegionSpec::Box { lo: vec![0.0; 2], hi: vec![1.0; 2] })?;
    let h = grid.spacing()[0];
    let mu = |k: usize| 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2);
    let exact = [mu(1) + mu(1), mu(1) + mu(2), mu(2) + mu(1), mu(2) + mu(2)];

    for (m, bc) in [(1, BcKind::Dirichlet), (2, BcKind::Navier)] {
        let form = assemble_form(&grid, &omega, m, bc)?;
        let eig = solve_eigs(&form, &MassWeights::lumped(&form), None, 4, 1e-10)?;
        println!("m = {m} ({bc})");
        for (l, e) in eig.eigenvalues.iter().zip(exact) {
            let e = e.powi(m as i32);
            println!("  {l:>16.8}  closed form {e:>16.8}  rel err {:.1e}", (l - e).abs() / e);
        }
    }
    Ok(())
}
