//! Bessel functions `J_ν`, `I_ν` of real order and their zeros.

/// `J_ν(x)` for `ν ≥ 0`, `x ≥ 0`, by Miller's backward recurrence normalized
/// with `(x/2)^ν = Γ(ν+1) Σ_k e_k J_{ν+2k}(x)`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x >= 0.0, "bessel_j needs nu >= 0 and x >= 0");
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let top = 2 * ((x.max(nu) + 40.0 + 10.0 * x.sqrt()) as usize / 2) + 2;
    // f[k] ∝ J_{ν+k}
    let mut f = vec![0.0; top + 2];
    f[top] = 1e-280;
    for k in (1..=top).rev() {
        f[k - 1] = 2.0 * (nu + k as f64) / x * f[k] - f[k + 1];
        if f[k - 1].abs() > 1e250 {
            for v in f.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let mut sum = f[0];
    let mut prod = 1.0; // ∏_{i=1}^{k-1} (ν+i)
    let mut fact = 1.0; // k!
    let mut k = 1;
    while 2 * k <= top {
        fact *= k as f64;
        if k > 1 {
            prod *= nu + (k - 1) as f64;
        }
        let e = (nu + 2.0 * k as f64) / fact * prod;
        sum += e * f[2 * k];
        k += 1;
    }
    let lhs = (nu * (0.5 * x).ln() - libm::lgamma(nu + 1.0)).exp();
    f[0] * lhs / sum
}

/// `I_ν(x)` by its power series (`x` moderate).
pub fn bessel_i(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x >= 0.0);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let q = 0.25 * x * x;
    let mut term = (nu * (0.5 * x).ln() - libm::lgamma(nu + 1.0)).exp();
    let mut sum = term;
    for k in 1..500 {
        term *= q / (k as f64 * (nu + k as f64));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// k-th positive root of `f`, found by scanning from `start` then bisecting.
pub fn kth_root(f: impl Fn(f64) -> f64, start: f64, step: f64, k: usize) -> f64 {
    assert!(k >= 1);
    let mut found = 0;
    let mut a = start;
    let mut fa = f(a);
    loop {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == k {
                return bisect(&f, a, b, fa);
            }
        }
        a = b;
        fa = fb;
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            break;
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

/// k-th positive zero `j_{ν,k}` of `J_ν`.
pub fn bessel_zero(nu: f64, k: usize) -> f64 {
    // j_{ν,1} > ν, and consecutive zeros are more than π apart
    kth_root(|x| bessel_j(nu, x), nu.max(1e-3), 0.05, k)
}

/// k-th positive root of `J_ν I_{ν+1} + J_{ν+1} I_ν`, whose fourth power is
/// a clamped-plate eigenvalue of the unit ball.
pub fn clamped_ball_root(nu: f64, k: usize) -> f64 {
    let f = |x: f64| bessel_j(nu, x) * bessel_i(nu + 1.0, x) + bessel_j(nu + 1.0, x) * bessel_i(nu, x);
    // scale away the exponential growth of I so the scan sees sign changes cleanly
    kth_root(move |x| f(x) * (-x).exp(), nu.max(1e-3), 0.05, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn half_order_closed_forms() {
        for &x in &[0.3, 1.0, 4.0, 12.5] {
            let j12 = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x) - j12).abs() < 1e-13, "x={x}");
            let j32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x) - j32).abs() < 1e-13);
            let i12 = (2.0 / (PI * x)).sqrt() * x.sinh();
            assert!((bessel_i(0.5, x) - i12).abs() < 1e-12 * i12);
        }
    }

    #[test]
    fn integer_order_values() {
        assert!((bessel_j(0.0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1.0, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-14);
        assert!((bessel_i(0.0, 1.0) - 1.266_065_877_752_008_4).abs() < 1e-14);
    }

    #[test]
    fn zeros() {
        assert!((bessel_zero(0.5, 1) - PI).abs() < 1e-10);
        assert!((bessel_zero(0.5, 3) - 3.0 * PI).abs() < 1e-10);
        assert!((bessel_zero(1.5, 1) - 4.493_409_457_909_064).abs() < 1e-10);
        assert!((bessel_zero(0.0, 1) - 2.404_825_557_695_773).abs() < 1e-10);
    }

    #[test]
    fn clamped_root_matches_tabulated_plate_frequency() {
        // clamped circular plate (N = 2, ℓ = 0): root 3.19622
        assert!((clamped_ball_root(0.0, 1) - 3.196_220_616_582_541).abs() < 1e-9);
    }
}
