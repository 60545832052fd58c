//! Closed-form annulus capacities, and the point-capacity dichotomy:
//! eps^(N-4) decay in R^5, a positive floor in R^3.
use polycap::operator::BcKind;
use polycap::radial::{annulus_weighted_capacity, ball_capacity_exact, exterior_capacity};

fn main() -> polycap::Result<()> {
    let c5 = ball_capacity_exact(2, 5)?;
    println!("cap of the unit ball in R^5, m = 2: {c5:.8} (24 pi^2)");
    println!("exterior form: {:.8}", exterior_capacity(2, 5, 0, 1.0, 1.0, 0.0)?.value);
    for eps in [0.1, 0.01, 0.001] {
        let n5 = annulus_weighted_capacity(2, 5, eps, 1.0, 0.0, BcKind::Navier)?.value;
        let n3 = annulus_weighted_capacity(2, 3, eps, 1.0, 0.0, BcKind::Dirichlet)?.value;
        println!("eps {eps:<6} N=5: cap/eps {:.6}   N=3: cap {n3:.6}", n5 / eps);
    }
    Ok(())
}
