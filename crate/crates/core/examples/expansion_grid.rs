//! The classical case on a grid: Dirichlet Laplacian in the unit ball of R^3
//! minus eps-balls, two resolutions and Richardson extrapolation. A coarse
//! version of the full check; pass a larger resolution as the first argument.
use polycap::asymptotics::{expansion_report_grid, GridExpansion};
use polycap::grid::RegionSpec;
use polycap::operator::BcKind;
use polycap::sparse::CgOptions;
use polycap::spectrum::EigenOptions;

fn main() -> polycap::Result<()> {
    let res: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(33);
    let ball = RegionSpec::centered_ball(3, 1.0);
    let mut cfg = GridExpansion::new(ball.clone(), ball, 1, BcKind::Dirichlet, vec![(res - 1) / 2 + 1, res]);
    cfg.eps = vec![0.4, 0.35, 0.3, 0.25, 0.2, 0.15];
    cfg.jitter = 4;
    cfg.eigen = EigenOptions { tol: 1e-4, guard: 0, cg: CgOptions { rel_tol: 1e-6, max_iter: 50_000 }, ..EigenOptions::default() };
    let r = expansion_report_grid(&cfg)?;
    println!("lambda_1 (extrapolated) {:.6}, pi^2 = {:.6}", r.lambda_base, std::f64::consts::PI.powi(2));
    for row in &r.sweep {
        let exact = std::f64::consts::PI.powi(2) * ((1.0 - row.eps).powi(-2) - 1.0);
        println!("eps {:<5} diff {:.5}  exact {exact:.5}  ratio to cap {:.4}", row.eps, row.diff, row.ratio);
    }
    for c in &r.checks {
        println!("{:<16} {} {:.5} (target {:.5})", c.name, if c.passed { "ok  " } else { "FAIL" }, c.measured, c.target);
    }
    Ok(())
}
