//! Polyharmonic bases and the vanishing order of sampled functions.
use polycap::asymptotics::{polyharmonic_basis, sample_shells, vanishing_order};

fn main() -> polycap::Result<()> {
    for (gamma, m, n) in [(2, 1, 2), (3, 1, 3), (4, 2, 3), (5, 2, 4)] {
        println!("gamma={gamma} m={m} N={n}: dim {}", polyharmonic_basis(gamma, m, n).len());
    }
    let samples = [
        ("cos(x) cosh(y)", sample_shells(|x| x[0].cos() * x[1].cosh(), &[0.0, 0.0], 0.1, 4, 64, 1)),
        ("sin(x) e^y", sample_shells(|x| x[0].sin() * x[1].exp(), &[0.0, 0.0], 0.1, 4, 64, 1)),
        ("x y + |x|^4", sample_shells(|x| x[0] * x[1] + (x[0] * x[0] + x[1] * x[1]).powi(2), &[0.0, 0.0], 0.1, 4, 64, 1)),
    ];
    for (label, s) in samples {
        let v = vanishing_order(&s, 1, 4)?;
        println!("{label:<16} gamma {}  U0 {:?}  residual {:.1e}", v.gamma, v.u0.terms(), v.fit_residual);
    }
    Ok(())
}
