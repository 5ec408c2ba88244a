//! The sine integral `Si(x) = ∫₀^x sin(u)/u du`.

use std::f64::consts::FRAC_PI_2;

use super::quadrature::gauss_legendre;

pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x <= 4.0 {
        series(x)
    } else if x < 40.0 {
        let panels = ((x - 4.0) / 2.0).ceil() as usize;
        let h = (x - 4.0) / panels as f64;
        let g = gauss_legendre(20);
        let tail: f64 = (0..panels)
            .map(|i| {
                let a = 4.0 + h * i as f64;
                g.integrate(a, a + h, |u| u.sin() / u)
            })
            .sum();
        series(4.0) + tail
    } else {
        let (f, g) = auxiliary(x);
        let (s, c) = x.sin_cos();
        FRAC_PI_2 - f * c - g * s
    }
}

fn series(x: f64) -> f64 {
    let q = -x * x;
    let mut term = x;
    let mut sum = x;
    for k in 1..40 {
        let kf = k as f64;
        term *= q / ((2.0 * kf) * (2.0 * kf + 1.0));
        let add = term / (2.0 * kf + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Asymptotic auxiliary functions `f(x) ~ x⁻¹ Σ (−1)^k (2k)!/x^{2k}` and
/// `g(x) ~ x⁻² Σ (−1)^k (2k+1)!/x^{2k}`, truncated at the smallest term.
fn auxiliary(x: f64) -> (f64, f64) {
    let inv2 = 1.0 / (x * x);
    let (mut f, mut g) = (1.0, 1.0);
    let (mut tf, mut tg) = (1.0f64, 1.0f64);
    for k in 1..60 {
        let kf = k as f64;
        let nf = -tf * (2.0 * kf - 1.0) * (2.0 * kf) * inv2;
        let ng = -tg * (2.0 * kf) * (2.0 * kf + 1.0) * inv2;
        if nf.abs() > tf.abs() || ng.abs() > tg.abs() {
            break;
        }
        tf = nf;
        tg = ng;
        f += tf;
        g += tg;
        if tf.abs() < 1e-17 && tg.abs() < 1e-17 {
            break;
        }
    }
    (f / x, g * inv2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(x: f64) -> f64 {
        let panels = (x / 0.5).ceil().max(1.0) as usize;
        let h = x / panels as f64;
        let g = gauss_legendre(24);
        (0..panels).map(|i| g.integrate(h * i as f64, h * (i + 1) as f64, |u| if u == 0.0 { 1.0 } else { u.sin() / u })).sum()
    }

    #[test]
    fn matches_dense_quadrature() {
        for &x in &[1e-3, 0.5, 2.0, 3.999, 4.001, 10.0, 39.9, 40.1, 75.0, 300.0] {
            assert!((sine_integral(x) - dense(x)).abs() < 2e-14, "x = {x}");
        }
    }

    #[test]
    fn odd_and_limit() {
        assert_eq!(sine_integral(-2.5), -sine_integral(2.5));
        assert!((sine_integral(1e6) - FRAC_PI_2).abs() < 2e-6);
        assert_eq!(sine_integral(0.0), 0.0);
    }
}
