//! Radial eigenvalues of balls and annuli against Bessel-function roots.
use polycap::operator::BcKind;
use polycap::radial::{ball_eigenvalue_bessel, bessel_zero, radial_eigs, RadialProblem};

fn main() -> polycap::Result<()> {
    println!("j_(3/2),1 = {:.12}", bessel_zero(1.5, 1));
    for (n, m, bc) in [(3, 1, BcKind::Dirichlet), (5, 2, BcKind::Navier), (5, 2, BcKind::Dirichlet)] {
        for ell in 0..3 {
            let p = RadialProblem { n, m, ell, inner_radius: 0.0, outer_bc: bc };
            let r = radial_eigs(&p, 2)?;
            let b = ball_eigenvalue_bessel(n, m, ell, 1, bc)?;
            println!("N={n} m={m} {bc:<9} l={ell}: {:>14.6} {:>14.6}  bessel {b:>14.6}  degree {}", r.eigenvalues[0], r.eigenvalues[1], r.degree);
        }
    }
    println!("annulus, N=5 navier l=0:");
    for eps in [0.3, 0.1, 0.03, 0.01] {
        let p = RadialProblem { n: 5, m: 2, ell: 0, inner_radius: eps, outer_bc: BcKind::Navier };
        println!("  eps {eps:<5} lambda_1 {:.8}", radial_eigs(&p, 1)?.eigenvalues[0]);
    }
    Ok(())
}
