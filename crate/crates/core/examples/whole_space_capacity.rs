//! Capacity in R^N by truncation to balls B_R and extrapolation in R.
use polycap::capacity::{whole_space_capacity, WholeSpaceOptions};
use polycap::grid::RegionSpec;
use polycap::poly::Polynomial;
use polycap::radial::ball_capacity_exact;

fn main() -> polycap::Result<()> {
    let radii = [4.0, 8.0, 16.0, 32.0, 64.0];
    for (m, n) in [(1, 3), (2, 5), (2, 7)] {
        let ws = whole_space_capacity(
            &RegionSpec::centered_ball(n, 1.0),
            &Polynomial::constant(n, 1.0),
            m,
            n,
            &radii,
            &WholeSpaceOptions::default(),
        )?;
        let exact = ball_capacity_exact(m, n)?;
        println!("m = {m}, N = {n}: extrapolated {:.6}  exact {exact:.6}  decay exponent {:?}", ws.value, ws.exponent);
        for (r, c) in &ws.per_radius {
            println!("    R = {r:<4} {c:.8}");
        }
    }

    // A box is not radial: the grid path in R^3, coarse spacing.
    let cube = RegionSpec::Box { lo: vec![-0.5; 3], hi: vec![0.5; 3] };
    let opts = WholeSpaceOptions { h: 0.1, ..WholeSpaceOptions::default() };
    let ws = whole_space_capacity(&cube, &Polynomial::constant(3, 1.0), 1, 3, &[1.5, 2.0, 3.0], &opts)?;
    println!("unit cube, m = 1: {:.4} (flags {:?})", ws.value, ws.flags);
    Ok(())
}
