//! Hardy-Rellich inequality for radial profiles vanishing on the unit sphere.
use polycap::operator::hardy_rellich_radial;

fn main() -> polycap::Result<()> {
    for n in [5, 6, 8] {
        let hr = hardy_rellich_radial(|r| (1.0 - r * r, -2.0 * r, -2.0), n, 0.0)?;
        println!("u = 1 - r^2, N = {n}: lhs {:.6}  rhs {:.6}  holds {}", hr.lhs, hr.rhs, hr.ok);
        // (1 - r^2)^2 r^2
        let hr = hardy_rellich_radial(
            |r| {
                let s = 1.0 - r * r;
                (s * s * r * r, 2.0 * r * s * s - 4.0 * r.powi(3) * s, 2.0 * s * s - 20.0 * r * r * s + 8.0 * r.powi(4))
            },
            n,
            0.0,
        )?;
        println!("u = r^2 (1 - r^2)^2, N = {n}: lhs {:.6}  rhs {:.6}  ratio {:.4}", hr.lhs, hr.rhs, hr.lhs / hr.rhs);
    }
    Ok(())
}
