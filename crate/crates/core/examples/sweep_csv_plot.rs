//! Writes a radial sweep as CSV and a log-log SVG, then reads the CSV back.
use polycap::asymptotics::{expansion_report_radial, RadialExpansion};
use polycap::cli::{emit_plot, read_csv, write_csv};
use polycap::operator::BcKind;

fn main() -> polycap::Result<()> {
    let out = std::env::temp_dir().join("polycap_sweep");
    std::fs::create_dir_all(&out)?;
    let r = expansion_report_radial(&RadialExpansion::new(5, 2, 0, BcKind::Navier))?;
    let csv = out.join("sweep.csv");
    write_csv(&r.sweep, &csv)?;
    emit_plot(&r.sweep, r.rate_fit.as_ref(), &out.join("sweep.svg"))?;
    let back = read_csv(&csv)?;
    println!("{} rows written to {}, round trip exact: {}", back.len(), out.display(), back == r.sweep || back.iter().zip(&r.sweep).all(|(a, b)| a.eps == b.eps && a.diff == b.diff));
    print!("{}", std::fs::read_to_string(&csv)?);
    Ok(())
}
