//! End-to-end acceptance run. One line per criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use polycap::asymptotics::{
    expansion_report_radial, fit_rate, polyharmonic_basis, sample_shells, vanishing_order, ExpansionReport, RadialExpansion,
};
use polycap::capacity::{whole_space_capacity, WholeSpaceOptions};
use polycap::cli::{property_suite, run, ExperimentConfig, ExperimentKind, RunOptions};
use polycap::grid::{build_grid, rasterize_interior, BoundingBox, RegionSpec};
use polycap::operator::{assemble_form, BcKind, MassWeights};
use polycap::poly::Polynomial;
use polycap::radial::{annulus_weighted_capacity, radial_eigs, RadialProblem};
use polycap::spectrum::solve_eigs;

const C1_RATE_TOL: f64 = 0.05;
const C1_COEF_TOL: f64 = 0.10;
const C1_TIME: Duration = Duration::from_secs(60);
const C2_RATE_TOL: f64 = 0.1;
const C2_TIME: Duration = Duration::from_secs(60);
const C3_RANGE: (f64, f64) = (0.9, 1.1);
const C4_TOL: f64 = 0.15;
const C5_RATE_TOL: f64 = 0.1;
const C5_COEF_TOL: f64 = 0.15;
const C5_TIME: Duration = Duration::from_secs(600);
const C6_TOL: f64 = 0.02;
const C7_TIME: Duration = Duration::from_secs(300);
const C8_FD_TOL: f64 = 1e-12;
const C8_SOLVER_TOL: f64 = 1e-10;

struct Line {
    id: usize,
    passed: bool,
    text: String,
}

fn line(id: usize, passed: bool, text: String) -> Line {
    Line { id, passed, text }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// First positive root of tan x = x, i.e. j_{3/2,1}.
fn tan_root() -> f64 {
    let mut x: f64 = 4.49;
    for _ in 0..50 {
        let f = x.sin() - x * x.cos();
        let df = x * x.sin();
        x -= f / df;
    }
    x
}

/// u_1(0)^2 for the L2-normalized first Dirichlet Laplacian eigenfunction of B_1 in R^5,
/// u = r^{-3/2} J_{3/2}(j r): u(0) = (j/2)^{3/2}/Gamma(5/2), ||u||^2 = |S^4| J_{5/2}(j)^2 / 2.
fn center_value_sq_r5() -> f64 {
    let j = tan_root();
    let j52 = (2.0 / (PI * j)).sqrt() * ((3.0 / (j * j) - 1.0) * j.sin() - 3.0 * j.cos() / j);
    let gamma_52 = 0.75 * PI.sqrt();
    let u0 = (j / 2.0).powf(1.5) / gamma_52;
    let sphere = 8.0 * PI * PI / 3.0;
    u0 * u0 / (sphere * j52 * j52 / 2.0)
}

fn radial(ell: usize, bc: BcKind) -> (polycap::Result<ExpansionReport>, Duration) {
    let t = Instant::now();
    let r = expansion_report_radial(&RadialExpansion::new(5, 2, ell, bc));
    (r, t.elapsed())
}

fn criteria_1_3_4(out: &mut Vec<Line>) {
    let (navier, t_n) = radial(0, BcKind::Navier);
    let (dirichlet, _) = radial(0, BcKind::Dirichlet);
    let (navier, dirichlet) = match (navier, dirichlet) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            let msg = format!("pipeline error: {:?} / {:?}", a.err(), b.err());
            for id in [1, 3, 4] {
                out.push(line(id, false, msg.clone()));
            }
            return;
        }
    };

    let fit = navier.rate_fit.clone().expect("rate fit");
    let coef = navier.coefficient_fit.as_ref().expect("coefficient fit").coefficient;
    let u0sq = navier.u_center * navier.u_center;
    let oracle = center_value_sq_r5();
    let target = u0sq * 24.0 * PI * PI;
    let ok = (fit.rate - 1.0).abs() <= C1_RATE_TOL && rel(coef, target) <= C1_COEF_TOL && t_n < C1_TIME && rel(u0sq, oracle) < 1e-6;
    out.push(line(
        1,
        ok,
        format!(
            "rate {:.4} (1 +- {C1_RATE_TOL}), coefficient {coef:.2} vs u(0)^2 24pi^2 = {target:.2} ({:.2}% <= {:.0}%), u(0)^2 {u0sq:.8} vs Bessel {oracle:.8}, {:.2?} < {C1_TIME:?}",
            fit.rate,
            100.0 * rel(coef, target),
            100.0 * C1_COEF_TOL,
            t_n
        ),
    ));

    let last = navier.sweep.last().expect("sweep");
    let base = radial_eigs(&RadialProblem { n: 5, m: 2, ell: 0, inner_radius: 0.0, outer_bc: BcKind::Navier }, 1)
        .expect("base eigenpair");
    let mut profile = base.profiles[0].clone();
    if profile.value(0.0) < 0.0 {
        profile = profile.negated();
    }
    let cap = annulus_weighted_capacity(2, 5, last.eps, profile.value(last.eps), profile.derivative(last.eps), BcKind::Navier)
        .expect("annulus capacity")
        .value;
    let ratio = last.diff / cap;
    let ok = ratio >= C3_RANGE.0 && ratio <= C3_RANGE.1 && rel(cap, last.cap_weighted) < 1e-8;
    out.push(line(
        3,
        ok,
        format!(
            "eps {}: diff/cap = {ratio:.5} in [{}, {}] (cap {cap:.6e}, sweep cap {:.6e})",
            last.eps, C3_RANGE.0, C3_RANGE.1, last.cap_weighted
        ),
    ));

    let norm = |r: &ExpansionReport| r.coefficient_fit.as_ref().expect("coefficient fit").coefficient / (r.u_center * r.u_center);
    let (a, b) = (norm(&navier), norm(&dirichlet));
    let drate = dirichlet.rate_fit.as_ref().map_or(f64::NAN, |f| f.rate);
    let spread = (a - b).abs() / (0.5 * (a + b));
    let ok = spread <= C4_TOL && (drate - 1.0).abs() <= C1_RATE_TOL;
    out.push(line(
        4,
        ok,
        format!(
            "coefficient/u(0)^2: navier {a:.3}, dirichlet {b:.3}, spread {:.3}% <= {:.0}%; dirichlet rate {drate:.4}",
            100.0 * spread,
            100.0 * C4_TOL
        ),
    ));
}

fn criterion_2(out: &mut Vec<Line>) {
    let (r, t) = radial(1, BcKind::Navier);
    match r {
        Ok(r) => {
            let rate = r.rate_fit.as_ref().map_or(f64::NAN, |f| f.rate);
            let gamma = r.vanishing.as_ref().map(|v| v.gamma);
            let ok = (rate - 3.0).abs() <= C2_RATE_TOL && gamma == Some(1) && t < C2_TIME;
            out.push(line(2, ok, format!("gamma {gamma:?}, rate {rate:.4} (3 +- {C2_RATE_TOL}), {t:.2?} < {C2_TIME:?}")));
        }
        Err(e) => out.push(line(2, false, format!("pipeline error: {e}"))),
    }
}

fn criterion_5(out: &mut Vec<Line>) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/expand_grid_r3_laplace.toml");
    let dir = tempfile::tempdir().expect("tempdir");
    let t = Instant::now();
    let outcome = ExperimentConfig::from_file(&path).and_then(|cfg| {
        run(&cfg, ExperimentKind::Expand, &RunOptions { out: dir.path().to_path_buf(), ..RunOptions::default() })
    });
    let elapsed = t.elapsed();
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            out.push(line(5, false, format!("pipeline error: {e}")));
            return;
        }
    };
    let get = |name: &str| outcome.checks.iter().find(|c| c.name == name).map_or(f64::NAN, |c| c.measured);
    let rate = get("rate");
    let coef = get("coefficient");
    // Continuum eigenfunction sin(pi r)/(r sqrt(2 pi)): u(0)^2 = pi/2.
    let target = PI / 2.0 * 4.0 * PI;
    let ok = (rate - 1.0).abs() <= C5_RATE_TOL && rel(coef, target) <= C5_COEF_TOL && elapsed < C5_TIME;
    out.push(line(
        5,
        ok,
        format!(
            "rate {rate:.4} (1 +- {C5_RATE_TOL}), coefficient {coef:.3} vs u(0)^2 4pi = {target:.3} ({:.2}% <= {:.0}%), {elapsed:.1?} < {C5_TIME:?}",
            100.0 * rel(coef, target),
            100.0 * C5_COEF_TOL
        ),
    ));
}

fn criterion_6(out: &mut Vec<Line>) {
    let radii = [4.0, 8.0, 16.0, 32.0, 64.0];
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, n, exact) in [(1, 3, 4.0 * PI), (2, 5, 24.0 * PI * PI)] {
        let ws = whole_space_capacity(
            &RegionSpec::centered_ball(n, 1.0),
            &Polynomial::constant(n, 1.0),
            m,
            n,
            &radii,
            &WholeSpaceOptions::default(),
        );
        match ws {
            Ok(ws) => {
                let monotone = ws.per_radius.windows(2).all(|w| w[1].1 <= w[0].1);
                let err = rel(ws.value, exact);
                ok &= monotone && ws.monotone() && err <= C6_TOL;
                parts.push(format!("m={m} N={n}: {:.4} vs {exact:.4} ({:.3}%), monotone {monotone}", ws.value, 100.0 * err));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("m={m} N={n}: {e}"));
            }
        }
    }
    out.push(line(6, ok, format!("{}; tolerance {:.0}%", parts.join("; "), 100.0 * C6_TOL)));
}

fn criterion_7(out: &mut Vec<Line>) {
    let t = Instant::now();
    match property_suite(42) {
        Ok((_, checks)) => {
            let elapsed = t.elapsed();
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let ok = failed.is_empty() && checks.len() == 7 && elapsed < C7_TIME;
            out.push(line(7, ok, format!("{}/{} properties hold, failed {failed:?}, {elapsed:.2?} < {C7_TIME:?}", checks.len() - failed.len(), checks.len())));
        }
        Err(e) => out.push(line(7, false, format!("suite error: {e}"))),
    }
}

fn fd_spectrum_error() -> polycap::Result<f64> {
    let mut worst: f64 = 0.0;
    for (dim, res) in [(1, 65), (2, 33), (3, 17)] {
        let grid = build_grid(&BoundingBox::cube(dim, 0.0, 1.0)?, &vec![res; dim])?;
        let omega = rasterize_interior(&grid, &RegionSpec::Box { lo: vec![0.0; dim], hi: vec![1.0; dim] })?;
        let form = assemble_form(&grid, &omega, 1, BcKind::Dirichlet)?;
        let eig = solve_eigs(&form, &MassWeights::lumped(&form), None, 3, C8_SOLVER_TOL)?;
        let h = 1.0 / (res - 1) as f64;
        let mu = |k: usize| 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2);
        let mut exact: Vec<f64> = match dim {
            1 => (1..=3).map(mu).collect(),
            2 => vec![2.0 * mu(1), mu(1) + mu(2), mu(1) + mu(2)],
            _ => vec![3.0 * mu(1), 2.0 * mu(1) + mu(2), 2.0 * mu(1) + mu(2)],
        };
        exact.sort_by(f64::total_cmp);
        for (l, e) in eig.eigenvalues.iter().zip(&exact) {
            worst = worst.max(rel(*l, *e));
        }
    }
    Ok(worst)
}

fn navier_squared_error() -> polycap::Result<f64> {
    let grid = build_grid(&BoundingBox::cube(2, -1.0, 1.0)?, &[33])?;
    let omega = rasterize_interior(&grid, &RegionSpec::centered_ball(2, 1.0))?;
    let lap = assemble_form(&grid, &omega, 1, BcKind::Dirichlet)?;
    let bil = assemble_form(&grid, &omega, 2, BcKind::Navier)?;
    let a = solve_eigs(&lap, &MassWeights::lumped(&lap), None, 4, C8_SOLVER_TOL)?;
    let b = solve_eigs(&bil, &MassWeights::lumped(&bil), None, 4, C8_SOLVER_TOL)?;
    Ok(a.eigenvalues.iter().zip(&b.eigenvalues).map(|(l, n)| rel(*n, l * l)).fold(0.0, f64::max))
}

fn vanishing_error() -> polycap::Result<f64> {
    let cases: Vec<(usize, usize, u32, Polynomial)> = vec![
        (2, 1, 0, Polynomial::constant(2, 2.5)),
        (2, 1, 2, Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], -1.0)])),
        (3, 1, 3, Polynomial::monomial(vec![1, 1, 1], 0.7)),
        (3, 2, 3, Polynomial::from_terms(3, [(vec![3, 0, 0], 1.0), (vec![1, 2, 0], 1.0), (vec![1, 0, 2], 1.0)])),
        (2, 2, 2, polyharmonic_basis(2, 2, 2)[0].scale(-1.3)),
    ];
    let mut worst: f64 = 0.0;
    for (n, m, gamma, p) in cases {
        let s = sample_shells(|x| p.eval(x), &vec![0.0; n], 0.2, 4, 48, 3);
        let v = vanishing_order(&s, m, 4)?;
        if v.gamma != gamma {
            return Ok(f64::INFINITY);
        }
        let diff = v.u0.add(&p.scale(-1.0)).max_abs_coefficient() / p.max_abs_coefficient();
        worst = worst.max(diff).max(v.fit_residual);
    }
    Ok(worst)
}

fn fit_rate_error() -> polycap::Result<f64> {
    let eps = [0.2, 0.1, 0.05, 0.02, 0.01, 0.001];
    let mut worst: f64 = 0.0;
    for (c, p) in [(3.0, 2.0), (0.25, 0.5), (855.0, 1.0), (7.0, 3.0)] {
        let pts: Vec<_> = eps.iter().map(|&e: &f64| (e, c * e.powf(p))).collect();
        let f = fit_rate(&pts)?;
        worst = worst.max((f.rate - p).abs()).max(rel(f.coefficient, c));
    }
    Ok(worst)
}

fn criterion_8(out: &mut Vec<Line>) {
    let r = (|| Ok::<_, polycap::Error>((fd_spectrum_error()?, navier_squared_error()?, vanishing_error()?, fit_rate_error()?)))();
    match r {
        Ok((fd, nav, van, fit)) => {
            let ok = fd <= C8_FD_TOL && nav <= 1e-8 && van <= 1e-8 && fit <= 1e-10;
            out.push(line(
                8,
                ok,
                format!("fd spectrum {fd:.1e} (<= {C8_FD_TOL:.0e}), navier vs dirichlet^2 {nav:.1e}, vanishing order {van:.1e}, fit_rate {fit:.1e}"),
            ));
        }
        Err(e) => out.push(line(8, false, format!("oracle error: {e}"))),
    }
}

fn main() {
    // `cargo test` passes harness flags such as --list; only run on a plain invocation or a filter.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut lines = Vec::new();
    criteria_1_3_4(&mut lines);
    criterion_2(&mut lines);
    criterion_6(&mut lines);
    criterion_8(&mut lines);
    criterion_7(&mut lines);
    criterion_5(&mut lines);
    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!("criterion {}: {} {}", l.id, if l.passed { "PASS" } else { "FAIL" }, l.text);
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
