//! Power-law fits. A plain log-log fit is biased by an O(eps) relative
//! correction; adding analytic correction terms removes most of the bias.
use polycap::asymptotics::{fit_coefficient, fit_rate, fit_rate_corrected};

fn main() -> polycap::Result<()> {
    let eps = [0.1, 0.075, 0.05, 0.0375, 0.025, 0.0125];
    let exact: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 3.0 * e * e)).collect();
    let f = fit_rate(&exact)?;
    println!("3 eps^2: rate {:.12} coefficient {:.12} r2 {}", f.rate, f.coefficient, f.r_squared);

    let biased: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 2.0 * e * (1.0 + 1.5 * e + e * e))).collect();
    for k in 0..3 {
        let f = fit_rate_corrected(&biased, k)?;
        println!("2 eps (1 + 1.5 eps + eps^2), {k} terms: rate {:.5} coefficient {:.5}", f.rate, f.coefficient);
    }
    println!("rate held at 1: coefficient {:.6}", fit_coefficient(&biased, 1.0, 2)?.coefficient);
    Ok(())
}
