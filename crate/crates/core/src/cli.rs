//! Experiment configuration, orchestration, CSV/SVG output and the bundled
//! property suite.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crate::asymptotics::SweepRow;
use crate::asymptotics::{
    expansion_report_grid, expansion_report_radial, fill_running_rates, Check, ExpansionReport,
    GridExpansion, RadialExpansion, RateFit, ReportTolerances,
};
use crate::capacity::{
    boundary_distance, obstacle_capacity, weighted_capacity, weighted_capacity_with, whole_space_capacity,
    CapacityOptions, CutoffSpec, WholeSpaceOptions,
};
use crate::error::{Error, Result};
use crate::grid::{build_grid, rasterize, rasterize_interior, scale_region, BoundingBox, Grid, NodeMask, RegionSpec};
use crate::operator::{assemble_form, hardy_rellich_radial, BcKind, GridFunction, MassWeights};
use crate::poly::Polynomial;
use crate::radial::{annulus_weighted_capacity, radial_eigs, RadialProblem};
use crate::sparse::CgOptions;
use crate::spectrum::{solve_eigs_with, EigenOptions};

pub const CSV_HEADER: [&str; 9] = [
    "eps",
    "cap_cond",
    "cap_weighted",
    "lambda_base",
    "lambda_pert",
    "diff",
    "ratio",
    "rate_running",
    "solver_iters",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Cap,
    Eig,
    Sweep,
    Expand,
    Radial,
    Check,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ExperimentKind::Cap => "cap",
            ExperimentKind::Eig => "eig",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Expand => "expand",
            ExperimentKind::Radial => "radial",
            ExperimentKind::Check => "check",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Grid,
    Radial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainSection {
    #[serde(default)]
    pub model: Model,
    /// Nodes per axis (grid model).
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Add a coarser level with half the cells and extrapolate.
    #[serde(default)]
    pub richardson: bool,
    #[serde(flatten)]
    pub region: RegionSpec,
}

fn default_resolution() -> usize {
    33
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoleSection {
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    /// Random sub-cell shifts of the hole center averaged per ε.
    #[serde(default)]
    pub jitter: usize,
    #[serde(flatten)]
    pub region: RegionSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSection {
    pub m: usize,
    pub bc: BcKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSection {
    pub tol: f64,
    pub cg_tol: f64,
    pub max_iter: usize,
    pub max_outer: usize,
    pub guard: usize,
    pub threads: Option<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol: 1e-8,
            cg_tol: 1e-10,
            max_iter: 20_000,
            max_outer: 400,
            guard: 2,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    pub kind: Option<ExperimentKind>,
    pub name: String,
    /// 1-based eigenvalue index J.
    pub target: usize,
    pub count: usize,
    pub gamma_max: u32,
    pub ell: usize,
    pub seed: u64,
    pub correction_terms: usize,
    pub ratio_tol: f64,
    pub rate_tol: Option<f64>,
    pub coefficient_tol: f64,
    pub plot: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            kind: None,
            name: "run".into(),
            target: 1,
            count: 3,
            gamma_max: 4,
            ell: 0,
            seed: 42,
            correction_terms: 2,
            ratio_tol: 0.1,
            rate_tol: None,
            coefficient_tol: 0.1,
            plot: true,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: Option<DomainSection>,
    pub hole: Option<HoleSection>,
    pub operator: Option<OperatorSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Position of `key` inside `[section]`, else of the section header, else 1:1.
fn locate(text: &str, section: &str, key: Option<&str>) -> (usize, usize) {
    let mut in_section = false;
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_start();
        if line.starts_with('[') {
            in_section = line.trim_end().trim_end_matches(']').trim_start_matches('[').trim() == section;
            if in_section && header.is_none() {
                header = Some((i + 1, raw.len() - line.len() + 1));
            }
            continue;
        }
        if let (true, Some(k)) = (in_section, key) {
            if line.strip_prefix(k).is_some_and(|rest| rest.trim_start().starts_with('=')) {
                return (i + 1, raw.len() - line.len() + 1);
            }
        }
    }
    header.unwrap_or((1, 1))
}

fn config_error(text: &str, section: &str, key: Option<&str>, message: impl Into<String>) -> Error {
    let (line, column) = locate(text, section, key);
    Error::Config {
        line,
        column,
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates; every failure is an [`Error::Config`] with a position.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
            Error::Config {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(&fs::read_to_string(path)?)
    }

    fn validate(&self, text: &str) -> Result<()> {
        let e = &self.experiment;
        if e.target == 0 {
            return Err(config_error(text, "experiment", Some("target"), "target must be at least 1"));
        }
        if e.name.is_empty() || e.name.contains(['/', '\\']) {
            return Err(config_error(text, "experiment", Some("name"), "name must be a plain file stem"));
        }
        if let Some(h) = &self.hole {
            if let Some(eps) = &h.eps {
                if eps.is_empty() || eps.iter().any(|x| !(*x > 0.0)) || eps.windows(2).any(|w| !(w[0] > w[1])) {
                    return Err(config_error(
                        text,
                        "hole",
                        Some("eps"),
                        "eps must be positive and strictly decreasing",
                    ));
                }
            }
            h.region
                .validate()
                .map_err(|err| config_error(text, "hole", None, err.to_string()))?;
        }
        if let Some(d) = &self.domain {
            d.region
                .validate()
                .map_err(|err| config_error(text, "domain", None, err.to_string()))?;
            if let Some(h) = &self.hole {
                if h.region.dim() != d.region.dim() {
                    return Err(config_error(text, "hole", None, "hole and domain dimensions differ"));
                }
            }
        }
        if let Some(op) = &self.operator {
            if op.m == 0 {
                return Err(config_error(text, "operator", Some("m"), "m must be at least 1"));
            }
        }
        if let Some(t) = self.solver.threads {
            if t == 0 {
                return Err(config_error(text, "solver", Some("threads"), "threads must be at least 1"));
            }
        }
        Ok(())
    }

    fn require(&self, kind: ExperimentKind) -> Result<()> {
        let need = |present: bool, section: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config {
                    line: 1,
                    column: 1,
                    message: format!("experiment {kind} needs a [{section}] section"),
                })
            }
        };
        match kind {
            ExperimentKind::Check => Ok(()),
            ExperimentKind::Eig => {
                need(self.domain.is_some(), "domain")?;
                need(self.operator.is_some(), "operator")
            }
            ExperimentKind::Radial => {
                need(self.hole.is_some(), "hole")?;
                need(self.operator.is_some(), "operator")?;
                need(self.domain.is_some(), "domain")
            }
            _ => {
                need(self.domain.is_some(), "domain")?;
                need(self.hole.is_some(), "hole")?;
                need(self.operator.is_some(), "operator")
            }
        }
    }

    fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.solver.tol,
            max_outer: self.solver.max_outer,
            guard: self.solver.guard,
            cg: self.cg(),
            seed: self.experiment.seed,
        }
    }

    fn cg(&self) -> CgOptions {
        CgOptions {
            rel_tol: self.solver.cg_tol,
            max_iter: self.solver.max_iter,
        }
    }

    fn tolerances(&self) -> ReportTolerances {
        ReportTolerances {
            ratio: self.experiment.ratio_tol,
            rate: self.experiment.rate_tol,
            coefficient: self.experiment.coefficient_tol,
        }
    }
}

/// Options that come from the command line rather than the config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub dump_matrix: bool,
    pub dump_potential: bool,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub rows: Vec<SweepRow>,
    pub checks: Vec<Check>,
    pub summary: String,
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Process exit code for an error: 2 for configuration problems, 3 otherwise.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => 2,
        _ => 3,
    }
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let mut rec: Vec<String> = [
            r.eps,
            r.cap_cond,
            r.cap_weighted,
            r.lambda_base,
            r.lambda_pert,
            r.diff,
            r.ratio,
            r.rate_running,
        ]
        .iter()
        .map(|v| format_value(*v))
        .collect();
        rec.push(r.solver_iters.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(Error::Invalid(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| Error::Invalid(format!("column {}: {e}", CSV_HEADER[i])))
        };
        rows.push(SweepRow {
            eps: f(0)?,
            cap_cond: f(1)?,
            cap_weighted: f(2)?,
            lambda_base: f(3)?,
            lambda_pert: f(4)?,
            diff: f(5)?,
            ratio: f(6)?,
            rate_running: f(7)?,
            solver_iters: rec[8]
                .parse()
                .map_err(|e| Error::Invalid(format!("column solver_iters: {e}")))?,
        });
    }
    Ok(rows)
}

/// Log-log SVG of `diff` and `cap_weighted` against ε with the fitted line.
pub fn emit_plot(rows: &[SweepRow], fit: Option<&RateFit>, path: &Path) -> Result<()> {
    let (w, h, pad) = (640.0, 440.0, 60.0);
    let mut series: Vec<(&str, &str, Vec<(f64, f64)>)> = vec![
        ("diff", "#1f77b4", rows.iter().map(|r| (r.eps, r.diff)).collect()),
        ("cap_weighted", "#d62728", rows.iter().map(|r| (r.eps, r.cap_weighted)).collect()),
    ];
    let mut dropped = 0;
    for s in series.iter_mut() {
        let before = s.2.len();
        s.2.retain(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite());
        dropped += before - s.2.len();
    }
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.2.iter().cloned()).collect();
    if rows.is_empty() || all.len() < 2 {
        return Err(Error::Invalid("plot needs at least two positive points".into()));
    }
    let lx = |x: f64| x.log10();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in &all {
        x0 = x0.min(lx(*x));
        x1 = x1.max(lx(*x));
        y0 = y0.min(lx(*y));
        y1 = y1.max(lx(*y));
    }
    let (dx, dy) = ((x1 - x0).max(1e-9) * 0.05, (y1 - y0).max(1e-9) * 0.05);
    let (x0, x1, y0, y1) = (x0 - dx, x1 + dx, y0 - dy, y1 + dy);
    let px = |x: f64| pad + (lx(x) - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (lx(y) - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">eps</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">value</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, (label, color, pts)) in series.iter().enumerate() {
        for (x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#, px(*x), py(*y));
        }
        let ly = pad + 18.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="3.5" fill="{color}"/>"#, pad + 12.0, ly - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{label}</text>"#, pad + 22.0);
    }
    if let Some(f) = fit {
        let xs = series[0].2.iter().map(|p| p.0);
        let (a, b) = xs.fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)));
        if a < b {
            let line = |x: f64| f.coefficient * x.powf(f.rate) * (f.corrections.iter().enumerate().map(|(k, c)| c * x.powi(k as i32 + 1)).sum::<f64>()).exp();
            let pts: Vec<String> = (0..=40)
                .map(|i| {
                    let x = a * (b / a).powf(i as f64 / 40.0);
                    format!("{:.2},{:.2}", px(x), py(line(x)))
                })
                .collect();
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-dasharray="5,3"/>"##,
                pts.join(" ")
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">slope {:.4}</text>"#,
            w - pad - 110.0,
            pad + 18.0,
            f.rate
        );
    }
    if dropped > 0 {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{dropped} nonpositive point(s) omitted</text>"#,
            pad + 12.0,
            h - pad - 10.0
        );
    }
    s.push_str("</svg>\n");
    fs::write(path, s)?;
    Ok(())
}

fn grid_for(domain: &DomainSection, res: usize) -> Result<(Grid, NodeMask)> {
    let (lo, hi) = domain.region.bounds();
    let grid = build_grid(&BoundingBox::new(lo, hi)?, &[res])?;
    let omega = rasterize_interior(&grid, &domain.region)?;
    Ok((grid, omega))
}

fn dump_function(grid: &Grid, u: &GridFunction, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..grid.dim()).map(|i| format!("x{i}")).collect();
    header.push("value".into());
    w.write_record(&header)?;
    let mut x = vec![0.0; grid.dim()];
    for (i, v) in u.values.iter().enumerate() {
        grid.coord_into(i, &mut x);
        let mut rec: Vec<String> = x.iter().map(|c| format_value(*c)).collect();
        rec.push(format_value(*v));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn render_checks(s: &mut String, checks: &[Check]) {
    for c in checks {
        let _ = writeln!(
            s,
            "check {:<16} {}  measured {:.6e}  target {:.6e}  tol {:.3e}  ({})",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.measured,
            c.target,
            c.tolerance,
            c.detail
        );
    }
}

fn verdict(checks: &[Check]) -> String {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        "PASS".into()
    } else {
        format!("FAIL: {}", failed.join(", "))
    }
}

/// Runs one experiment and writes its artifacts under `opts.out`.
pub fn run(cfg: &ExperimentConfig, kind: ExperimentKind, opts: &RunOptions) -> Result<Outcome> {
    cfg.require(kind)?;
    fs::create_dir_all(&opts.out)?;
    let name = &cfg.experiment.name;
    let mut summary = String::new();
    let _ = writeln!(summary, "experiment {kind} ({name})");
    let (rows, checks, fit) = match kind {
        ExperimentKind::Cap => run_cap(cfg, opts, &mut summary)?,
        ExperimentKind::Eig => run_eig(cfg, opts, &mut summary)?,
        ExperimentKind::Sweep | ExperimentKind::Radial | ExperimentKind::Expand => {
            let report = run_report(cfg, kind, opts)?;
            summarize_report(&report, &mut summary);
            let checks = if kind == ExperimentKind::Expand {
                report.checks.clone()
            } else {
                report.checks.iter().filter(|c| c.name == "ratio").cloned().collect()
            };
            (report.sweep.clone(), checks, report.rate_fit.clone())
        }
        ExperimentKind::Check => {
            let (rows, checks) = property_suite(cfg.experiment.seed)?;
            (rows, checks, None)
        }
    };
    render_checks(&mut summary, &checks);
    let csv = opts.out.join(format!("{name}.csv"));
    write_csv(&rows, &csv)?;
    let mut svg = None;
    if cfg.experiment.plot && rows.iter().filter(|r| r.diff > 0.0 || r.cap_weighted > 0.0).count() >= 2 {
        let path = opts.out.join(format!("{name}.svg"));
        if emit_plot(&rows, fit.as_ref(), &path).is_ok() {
            svg = Some(path);
        }
    }
    summary.push_str(&verdict(&checks));
    summary.push('\n');
    Ok(Outcome {
        rows,
        checks,
        summary,
        csv,
        svg,
    })
}

type Produced = (Vec<SweepRow>, Vec<Check>, Option<RateFit>);

fn run_cap(cfg: &ExperimentConfig, opts: &RunOptions, summary: &mut String) -> Result<Produced> {
    let domain = cfg.domain.as_ref().unwrap();
    let hole = cfg.hole.as_ref().unwrap();
    let op = cfg.operator.as_ref().unwrap();
    let (grid, omega) = grid_for(domain, domain.resolution)?;
    let form = assemble_form(&grid, &omega, op.m, op.bc)?;
    if opts.dump_matrix {
        form.write_stiffness(fs::File::create(opts.out.join(format!("{}_stiffness.txt", cfg.experiment.name)))?)?;
    }
    let eps = hole.eps.clone().unwrap_or_else(|| vec![1.0]);
    let (center, _) = hole.region.bounding_ball();
    let dist = boundary_distance(&grid, &omega, &center);
    let capopts = CapacityOptions {
        cg: cfg.cg(),
        collar: 0,
    };
    let mut rows = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        let k = scale_region(&hole.region, e)?;
        let mask = rasterize(&grid, &k)?;
        let (value, iters, potential) = if mask.is_empty() {
            (0.0, 0, GridFunction::zeros(&grid))
        } else {
            let cutoff = CutoffSpec::for_hole(&k, dist, op.m)?;
            let r = weighted_capacity_with(&form, &mask, &cutoff.on_grid(&grid), &capopts)?;
            (r.value, r.iterations, r.potential)
        };
        if opts.dump_potential {
            dump_function(&grid, &potential, &opts.out.join(format!("{}_potential_{i}.csv", cfg.experiment.name)))?;
        }
        let _ = writeln!(summary, "eps {e:.6e}  hole nodes {}  cap_cond {value:.12e}", mask.count());
        rows.push(SweepRow {
            eps: e,
            cap_cond: value,
            cap_weighted: f64::NAN,
            lambda_base: f64::NAN,
            lambda_pert: f64::NAN,
            diff: f64::NAN,
            ratio: f64::NAN,
            rate_running: f64::NAN,
            solver_iters: iters,
        });
    }
    Ok((rows, Vec::new(), None))
}

fn run_eig(cfg: &ExperimentConfig, opts: &RunOptions, summary: &mut String) -> Result<Produced> {
    let domain = cfg.domain.as_ref().unwrap();
    let op = cfg.operator.as_ref().unwrap();
    let j = cfg.experiment.target - 1;
    let count = cfg.experiment.count.max(cfg.experiment.target);
    let eps = cfg.hole.as_ref().and_then(|h| h.eps.clone()).unwrap_or_default();
    let mut rows = Vec::new();
    if domain.model == Model::Radial {
        let n = domain.region.dim();
        let problem = |inner: f64| RadialProblem {
            n,
            m: op.m,
            ell: cfg.experiment.ell,
            inner_radius: inner,
            outer_bc: op.bc,
        };
        let base = radial_eigs(&problem(0.0), count)?;
        let _ = writeln!(summary, "eigenvalues (l = {}): {:?}", cfg.experiment.ell, base.eigenvalues);
        let rho = cfg.hole.as_ref().map_or(0.0, |h| h.region.bounding_ball().1);
        for &e in &eps {
            let pert = radial_eigs(&problem(e * rho), count)?;
            rows.push(SweepRow::new(
                e,
                f64::NAN,
                f64::NAN,
                base.eigenvalues[j],
                pert.eigenvalues[j],
                pert.degree,
            ));
        }
        if rows.is_empty() {
            rows.push(SweepRow::new(0.0, f64::NAN, f64::NAN, base.eigenvalues[j], base.eigenvalues[j], base.degree));
        }
    } else {
        let (grid, omega) = grid_for(domain, domain.resolution)?;
        let form = assemble_form(&grid, &omega, op.m, op.bc)?;
        if opts.dump_matrix {
            form.write_stiffness(fs::File::create(opts.out.join(format!("{}_stiffness.txt", cfg.experiment.name)))?)?;
        }
        let mass = MassWeights::lumped(&form);
        let eo = cfg.eigen_options();
        let base = solve_eigs_with(&form, &mass, None, count, &eo, None)?;
        let _ = writeln!(summary, "eigenvalues: {:?}", base.eigenvalues);
        for w in &base.warnings {
            let _ = writeln!(summary, "warning: {w}");
        }
        if opts.dump_potential {
            for (i, v) in base.eigenvectors.iter().enumerate() {
                dump_function(&grid, v, &opts.out.join(format!("{}_eigenvector_{}.csv", cfg.experiment.name, i + 1)))?;
            }
        }
        for &e in &eps {
            let hole = cfg.hole.as_ref().unwrap();
            let mask = rasterize(&grid, &scale_region(&hole.region, e)?)?;
            let pert = solve_eigs_with(&form, &mass, Some(&mask), j + 1, &eo, Some(&base.eigenvectors))?;
            rows.push(SweepRow::new(
                e,
                f64::NAN,
                f64::NAN,
                base.eigenvalues[j],
                pert.eigenvalues[j],
                pert.cg_iterations,
            ));
        }
        if rows.is_empty() {
            let l = base.eigenvalues[j];
            rows.push(SweepRow::new(0.0, f64::NAN, f64::NAN, l, l, base.cg_iterations));
        }
    }
    fill_running_rates(&mut rows);
    for r in &rows {
        let _ = writeln!(
            summary,
            "eps {:.4e}  lambda_{} {:.12e} -> {:.12e}  diff {:.6e}",
            r.eps,
            j + 1,
            r.lambda_base,
            r.lambda_pert,
            r.diff
        );
    }
    Ok((rows, Vec::new(), None))
}

fn run_report(cfg: &ExperimentConfig, kind: ExperimentKind, opts: &RunOptions) -> Result<ExpansionReport> {
    let domain = cfg.domain.as_ref().unwrap();
    let hole = cfg.hole.as_ref().unwrap();
    let op = cfg.operator.as_ref().unwrap();
    let ex = &cfg.experiment;
    let radial = kind == ExperimentKind::Radial || domain.model == Model::Radial;
    if radial {
        let n = domain.region.dim();
        let (center, radius) = hole.region.bounding_ball();
        let centered_ball = matches!(hole.region.simplified(), RegionSpec::Ball { .. }) && center.iter().all(|c| *c == 0.0);
        if !centered_ball {
            return Err(Error::Invalid("radial model needs a ball hole centered at the origin".into()));
        }
        let mut rc = RadialExpansion::new(n, op.m, ex.ell, op.bc);
        rc.hole_radius = radius;
        if let Some(e) = &hole.eps {
            rc.eps = e.clone();
        }
        rc.gamma_max = ex.gamma_max;
        rc.correction_terms = ex.correction_terms;
        rc.tolerances = cfg.tolerances();
        rc.seed = ex.seed;
        return expansion_report_radial(&rc);
    }
    let res = domain.resolution;
    let resolutions = if domain.richardson { vec![(res - 1) / 2 + 1, res] } else { vec![res] };
    let mut gc = GridExpansion::new(domain.region.clone(), hole.region.clone(), op.m, op.bc, resolutions);
    gc.target = ex.target;
    if let Some(e) = &hole.eps {
        gc.eps = e.clone();
    }
    gc.jitter = hole.jitter;
    gc.gamma_max = ex.gamma_max;
    gc.correction_terms = ex.correction_terms;
    gc.eigen = cfg.eigen_options();
    gc.capacity = CapacityOptions {
        cg: cfg.cg(),
        collar: 0,
    };
    gc.tolerances = cfg.tolerances();
    gc.seed = ex.seed;
    if opts.dump_matrix {
        let (grid, omega) = grid_for(domain, res)?;
        let form = assemble_form(&grid, &omega, op.m, op.bc)?;
        form.write_stiffness(fs::File::create(opts.out.join(format!("{}_stiffness.txt", ex.name)))?)?;
    }
    expansion_report_grid(&gc)
}

fn summarize_report(r: &ExpansionReport, s: &mut String) {
    let _ = writeln!(s, "lambda_base {:.12e}", r.lambda_base);
    if let Some(v) = &r.vanishing {
        let _ = writeln!(s, "vanishing order {}  (fit residual {:.2e})  u(0) {:.9e}", v.gamma, v.fit_residual, r.u_center);
    }
    if let Some(p) = r.expected_rate {
        let _ = writeln!(s, "expected rate {p}");
    }
    if let Some(f) = &r.rate_fit {
        let _ = writeln!(s, "rate {:.6}  (r^2 {:.8}, {} correction terms)", f.rate, f.r_squared, f.corrections.len());
    }
    if let Some(f) = &r.plain_fit {
        let _ = writeln!(s, "plain log-log rate {:.6}  coefficient {:.6e}", f.rate, f.coefficient);
    }
    if let Some(f) = &r.coefficient_fit {
        let _ = writeln!(s, "coefficient {:.9e}  prediction {:.9e}", f.coefficient, r.coefficient_prediction);
    }
    for row in &r.sweep {
        let _ = writeln!(
            s,
            "eps {:.4e}  diff {:.9e}  cap_weighted {:.9e}  ratio {:.6}",
            row.eps, row.diff, row.cap_weighted, row.ratio
        );
    }
}

fn pass_fail(name: &str, passed: bool, measured: f64, target: f64, tolerance: f64, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        measured,
        target,
        tolerance,
        detail,
    }
}

/// Random mask: union of a few small balls inside `B_0.5` of a 2-D grid.
fn random_blobs(grid: &Grid, rng: &mut ChaCha8Rng, count: usize) -> Result<NodeMask> {
    let parts: Vec<RegionSpec> = (0..count)
        .map(|_| {
            let c = vec![rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
            RegionSpec::ball(c, rng.random_range(0.05..0.15))
        })
        .collect();
    rasterize(grid, &RegionSpec::Union { parts })
}

fn disc_form(res: usize, m: usize, bc: BcKind) -> Result<crate::operator::DiscreteForm> {
    let grid = build_grid(&BoundingBox::cube(2, -1.0, 1.0)?, &[res])?;
    let omega = rasterize_interior(&grid, &RegionSpec::centered_ball(2, 1.0))?;
    assemble_form(&grid, &omega, m, bc)
}

/// The bundled property suite (a)–(g). Returns the stability sweep rows and
/// one check per property.
pub fn property_suite(seed: u64) -> Result<(Vec<SweepRow>, Vec<Check>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // (a) nested holes
    {
        let mut worst: f64 = f64::MIN;
        let mut ok = true;
        for i in 0..20 {
            let m = 1 + i % 2;
            let form = disc_form(25, m, BcKind::Dirichlet)?;
            let grid = form.grid().clone();
            let a = random_blobs(&grid, &mut rng, 1)?;
            let b = a.union(&random_blobs(&grid, &mut rng, 2)?);
            let one = GridFunction::from_fn(&grid, |_| 1.0);
            let (ca, cb) = (weighted_capacity(&form, &a, &one)?.value, weighted_capacity(&form, &b, &one)?.value);
            let mass = MassWeights::lumped(&form);
            let eo = EigenOptions::default();
            let la = solve_eigs_with(&form, &mass, Some(&a), 1, &eo, None)?.eigenvalues[0];
            let lb = solve_eigs_with(&form, &mass, Some(&b), 1, &eo, None)?.eigenvalues[0];
            let slack = ((ca - cb) / cb).max((la - lb) / lb);
            worst = worst.max(slack);
            ok &= ca <= cb * (1.0 + 1e-8) && la <= lb * (1.0 + 1e-7);
        }
        checks.push(pass_fail(
            "hole_monotonicity",
            ok,
            worst,
            0.0,
            1e-7,
            "cap and lambda_1 nondecreasing under hole inclusion, 20 nested pairs".into(),
        ));
    }

    // (b) Navier below Dirichlet
    {
        let mut worst: f64 = f64::MIN;
        let fd = disc_form(25, 2, BcKind::Dirichlet)?;
        let fnv = disc_form(25, 2, BcKind::Navier)?;
        for _ in 0..10 {
            let k = random_blobs(fd.grid(), &mut rng, 2)?;
            let data = GridFunction::from_fn(fd.grid(), |x| 1.0 + 0.3 * x[0] - 0.2 * x[1]);
            let cd = weighted_capacity(&fd, &k, &data)?.value;
            let cn = weighted_capacity(&fnv, &k, &data)?.value;
            worst = worst.max((cn - cd) / cd);
        }
        checks.push(pass_fail(
            "navier_below_dirichlet",
            worst <= 1e-8,
            worst,
            0.0,
            1e-8,
            "max (cap_navier - cap_dirichlet)/cap_dirichlet over 10 holes".into(),
        ));
    }

    // (c) scaling law on the radial path
    {
        let mut worst: f64 = 0.0;
        for (m, n) in [(1usize, 3usize), (2, 5), (1, 4), (2, 6)] {
            let e: f64 = rng.random_range(0.05..0.9);
            let radii = [4.0, 8.0, 16.0];
            let one = Polynomial::constant(n, 1.0);
            let opts = WholeSpaceOptions::default();
            let c1 = whole_space_capacity(&RegionSpec::centered_ball(n, 1.0), &one, m, n, &radii, &opts)?;
            let ce = whole_space_capacity(&RegionSpec::centered_ball(n, e), &one, m, n, &radii, &opts)?;
            let (v1, ve) = (c1.exact.unwrap_or(c1.value), ce.exact.unwrap_or(ce.value));
            let expected = e.powi(n as i32 - 2 * m as i32) * v1;
            worst = worst.max(((ve - expected) / expected).abs());
        }
        checks.push(pass_fail(
            "scaling_law",
            worst <= 1e-6,
            worst,
            0.0,
            1e-6,
            "cap(eps K) against eps^(N-2m) cap(K), four (m, N)".into(),
        ));
    }

    // (d) Hardy-Rellich on random radial profiles in R^5
    {
        let mut worst: f64 = f64::MAX;
        let mut ok = true;
        for _ in 0..100 {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            // u = (1 − r²) Σ c_k r^{2k}
            let profile = |r: f64| {
                let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
                for (k, ck) in c.iter().enumerate() {
                    let k2 = 2 * k as i32;
                    p += ck * r.powi(k2);
                    if k > 0 {
                        dp += ck * k2 as f64 * r.powi(k2 - 1);
                        ddp += ck * (k2 * (k2 - 1)) as f64 * r.powi(k2 - 2);
                    }
                }
                let (q, dq, ddq) = (1.0 - r * r, -2.0 * r, -2.0);
                (q * p, dq * p + q * dp, ddq * p + 2.0 * dq * dp + q * ddp)
            };
            let hr = hardy_rellich_radial(profile, 5, 1e-10)?;
            ok &= hr.ok;
            worst = worst.min(hr.rhs - hr.lhs);
        }
        checks.push(pass_fail(
            "hardy_rellich",
            ok,
            worst,
            0.0,
            1e-10,
            "smallest rhs - lhs over 100 random profiles".into(),
        ));
    }

    // (e) obstacle against condenser
    {
        let mut worst2: f64 = f64::MIN;
        let mut worst1: f64 = 0.0;
        for m in [1usize, 2] {
            let form = disc_form(33, m, BcKind::Dirichlet)?;
            let grid = form.grid().clone();
            let omega = form.omega().clone();
            for _ in 0..3 {
                let c = vec![rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)];
                let k = RegionSpec::ball(c.clone(), rng.random_range(0.08..0.2));
                let mask = rasterize(&grid, &k)?;
                let cutoff = CutoffSpec::for_hole(&k, boundary_distance(&grid, &omega, &c), m)?;
                let cond = weighted_capacity(&form, &mask, &cutoff.on_grid(&grid))?.value;
                let obst = obstacle_capacity(&form, &mask)?.value;
                if m == 1 {
                    worst1 = worst1.max(((obst - cond) / cond).abs());
                } else {
                    worst2 = worst2.max((obst - cond) / cond);
                }
            }
        }
        checks.push(pass_fail(
            "obstacle_condenser",
            worst2 <= 1e-8 && worst1 <= 1e-6,
            worst2.max(worst1),
            0.0,
            1e-6,
            format!("m=2: max (obst - cond)/cond = {worst2:.3e}; m=1: max |obst - cond|/cond = {worst1:.3e}"),
        ));
    }

    // (f) stability ratio along sweeps
    let mut rows = Vec::new();
    {
        let mut worst: f64 = 0.0;
        for (ell, bc) in [(0usize, BcKind::Navier), (0, BcKind::Dirichlet), (1, BcKind::Navier)] {
            let mut cfg = RadialExpansion::new(5, 2, ell, bc);
            cfg.seed = seed;
            let report = expansion_report_radial(&cfg)?;
            worst = worst.max(stability_growth(&report.sweep));
            if ell == 0 && bc == BcKind::Navier {
                rows = report.sweep.clone();
            }
        }
        let mut gc = GridExpansion::new(
            RegionSpec::centered_ball(2, 1.0),
            RegionSpec::centered_ball(2, 1.0),
            1,
            BcKind::Dirichlet,
            vec![41],
        );
        gc.eps = vec![0.3, 0.25, 0.2, 0.15, 0.1];
        gc.seed = seed;
        let report = expansion_report_grid(&gc)?;
        worst = worst.max(stability_growth(&report.sweep));
        checks.push(pass_fail(
            "stability_bound",
            worst <= 2.0,
            worst,
            2.0,
            0.0,
            "max over sweeps of |diff|/cap^(1/2) relative to its largest-eps value".into(),
        ));
    }

    // (g) point capacity: vanishing for N > 2m, floor below
    {
        let cap = |n: usize, e: f64| annulus_weighted_capacity(2, n, e, 1.0, 0.0, BcKind::Dirichlet).map(|c| c.value);
        let decay = cap(5, 1e-3)? / cap(5, 0.1)?;
        let floor = cap(3, 1e-3)? / cap(3, 0.1)?;
        checks.push(pass_fail(
            "point_capacity",
            decay < 0.05 && floor > 0.1,
            floor,
            0.1,
            0.0,
            format!("N=5: cap(1e-3)/cap(0.1) = {decay:.3e} -> 0; N=3: ratio {floor:.3e} stays above 0.1"),
        ));
    }
    Ok((rows, checks))
}

/// Largest `(|diff|/cap_cond^{1/2}) / (same at the largest ε)` along a sweep.
pub fn stability_growth(rows: &[SweepRow]) -> f64 {
    let ratio = |r: &SweepRow| r.diff.abs() / r.cap_cond.sqrt();
    let Some(first) = rows.first() else {
        return 0.0;
    };
    let base = ratio(first);
    if !(base > 0.0) {
        return 0.0;
    }
    rows.iter().map(|r| ratio(r) / base).fold(0.0, f64::max)
}
