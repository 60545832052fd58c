//! Obstacle capacity (f >= 1 on the hole) against the condenser capacity.
//! They agree for the Laplacian; for the bilaplacian the obstacle value is smaller.
use polycap::capacity::{boundary_distance, condenser_capacity, obstacle_capacity, CutoffSpec};
use polycap::grid::{build_grid, rasterize, rasterize_interior, BoundingBox, RegionSpec};
use polycap::operator::{assemble_form, BcKind};

fn main() -> polycap::Result<()> {
    let grid = build_grid(&BoundingBox::cube(2, -1.0, 1.0)?, &[49])?;
    let omega = rasterize_interior(&grid, &RegionSpec::centered_ball(2, 1.0))?;
    let k = RegionSpec::Box { lo: vec![-0.2, -0.1], hi: vec![0.2, 0.1] };
    let hole = rasterize(&grid, &k)?;
    for m in [1, 2] {
        let form = assemble_form(&grid, &omega, m, BcKind::Dirichlet)?;
        let cutoff = CutoffSpec::for_hole(&k, boundary_distance(&grid, &omega, &[0.0, 0.0]), m)?;
        let cond = condenser_capacity(&form, &hole, &cutoff)?;
        let obst = obstacle_capacity(&form, &hole)?;
        println!("m = {m}: condenser {:.8}  obstacle {:.8}  active-set steps {}", cond.value, obst.value, obst.iterations);
    }
    Ok(())
}
