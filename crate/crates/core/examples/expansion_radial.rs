//! Eigenvalue shift of the biharmonic operator on the unit ball of R^5 when
//! a ball of radius eps is removed, compared with the weighted capacity and
//! its whole-space limit.
use polycap::asymptotics::{expansion_report_radial, RadialExpansion};
use polycap::operator::BcKind;

fn main() -> polycap::Result<()> {
    for (ell, bc) in [(0, BcKind::Navier), (0, BcKind::Dirichlet), (1, BcKind::Navier)] {
        let r = expansion_report_radial(&RadialExpansion::new(5, 2, ell, bc))?;
        println!("{bc}, l = {ell}: lambda {:.6}  gamma {}", r.lambda_base, r.vanishing.as_ref().map_or(0, |v| v.gamma));
        for row in &r.sweep {
            println!("  eps {:<7} diff {:.6e}  cap {:.6e}  ratio {:.5}", row.eps, row.diff, row.cap_weighted, row.ratio);
        }
        for c in &r.checks {
            println!("  {:<16} {} {:.6} (target {:.6})", c.name, if c.passed { "ok  " } else { "FAIL" }, c.measured, c.target);
        }
    }
    Ok(())
}
