//! Clamped-plate condenser capacity of shrinking discs in the unit disc.
//! In the plane the biharmonic capacity of a point is positive, so the
//! values level off instead of vanishing.
use polycap::capacity::{boundary_distance, condenser_capacity, CutoffSpec};
use polycap::grid::{build_grid, rasterize, rasterize_interior, scale_region, BoundingBox, RegionSpec};
use polycap::operator::{assemble_form, BcKind};

fn main() -> polycap::Result<()> {
    let grid = build_grid(&BoundingBox::cube(2, -1.0, 1.0)?, &[81])?;
    let omega = rasterize_interior(&grid, &RegionSpec::centered_ball(2, 1.0))?;
    let form = assemble_form(&grid, &omega, 2, BcKind::Dirichlet)?;
    let dist = boundary_distance(&grid, &omega, &[0.0, 0.0]);
    let k = RegionSpec::centered_ball(2, 1.0);
    for eps in [0.4, 0.2, 0.1, 0.05, 0.025] {
        let ke = scale_region(&k, eps)?;
        let hole = rasterize(&grid, &ke)?;
        let cutoff = CutoffSpec::for_hole(&ke, dist, 2)?;
        let cap = condenser_capacity(&form, &hole, &cutoff)?;
        println!("eps {eps:<6} nodes {:>4}  cap {:.6}  cg iters {}", hole.count(), cap.value, cap.iterations);
    }
    Ok(())
}
