//! Gamma, digamma and Hurwitz zeta for real and complex arguments.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 10.900511;
const LANCZOS_D: [f64; 11] = [
    2.485_740_891_387_535_6e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077e-9,
];
// 2 * sqrt(e / pi)
const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_7;

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_D
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_D[0], |s, (i, &d)| s + d / (x + i as f64 - 1.0))
}

/// Gamma function on the real line. Poles return NaN.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        lanczos_sum(x)
            * TWO_SQRT_E_OVER_PI
            * ((x - 0.5 + LANCZOS_G) / std::f64::consts::E).powf(x - 0.5)
    }
}

/// 1/Gamma, which is entire: returns 0 at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else if x < 0.5 {
        (PI * x).sin() * gamma(1.0 - x) / PI
    } else {
        1.0 / gamma(x)
    }
}

/// Complex Gamma via the same Lanczos sum with reflection for Re z < 1/2.
pub fn gamma_c(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::new(PI, 0.0) / (s * gamma_c(1.0 - z));
    }
    let mut sum = Complex64::new(LANCZOS_D[0], 0.0);
    for (i, &d) in LANCZOS_D.iter().enumerate().skip(1) {
        sum += d / (z + (i as f64 - 1.0));
    }
    let base = (z - 0.5 + LANCZOS_G) / std::f64::consts::E;
    sum * TWO_SQRT_E_OVER_PI * (base.ln() * (z - 0.5)).exp()
}

/// Digamma for x > 0 via recurrence and the asymptotic series.
pub fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    let series = x2
        * (1.0 / 12.0
            - x2 * (1.0 / 120.0 - x2 * (1.0 / 252.0 - x2 * (1.0 / 240.0 - x2 / 132.0))));
    acc + x.ln() - 0.5 / x - series
}

// B_{2k} / (2k)!
const BERN_OVER_FACT: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
    854513.0 / 138.0 / 1.124_000_727_777_607_7e21,
    -236364091.0 / 2730.0 / 6.204_484_017_332_394e23,
];

/// Hurwitz zeta ζ(s, a) for complex s ≠ 1 and a > 0 (analytic continuation in s).
pub fn hurwitz_zeta_c(s: Complex64, a: f64) -> Complex64 {
    let n_direct = (s.norm() + 12.0).ceil() as usize;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..n_direct {
        sum += cpow_real(n as f64 + a, -s);
    }
    let b = n_direct as f64 + a;
    let b_pow = cpow_real(b, -s);
    sum += b_pow * b / (s - 1.0) + 0.5 * b_pow;
    // Euler-Maclaurin correction: B_{2k}/(2k)! (s)_{2k-1} b^{-s-2k+1}
    let mut rising = s;
    let mut pw = b_pow / b;
    for (k, &c) in BERN_OVER_FACT.iter().enumerate() {
        let term = rising * pw * c;
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
        let j = 2.0 * k as f64;
        rising = rising * (s + j + 1.0) * (s + j + 2.0);
        pw /= b * b;
    }
    sum
}

/// Real Hurwitz zeta, s ≠ 1, a > 0.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    hurwitz_zeta_c(Complex64::new(s, 0.0), a).re
}

/// x^z for real x > 0.
#[inline]
pub fn cpow_real(x: f64, z: Complex64) -> Complex64 {
    let l = x.ln();
    Complex64::from_polar((z.re * l).exp(), z.im * l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(1e-3) - 999.423_772_484_595_5).abs() / 999.42 < 1e-13);
        assert!(gamma(-2.0).is_nan());
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
    }

    #[test]
    fn gamma_recurrence_on_grid() {
        for i in 1..100 {
            let x = 0.1 * i as f64;
            let r = gamma(x + 1.0) / (x * gamma(x));
            assert!((r - 1.0).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn complex_gamma_matches_real_and_modulus_identity() {
        for &x in &[0.3, 1.7, 4.2] {
            let g = gamma_c(Complex64::new(x, 0.0));
            assert!((g.re - gamma(x)).abs() < 1e-13 * gamma(x));
        }
        // |Γ(iy)|^2 = π / (y sinh(πy))
        for &y in &[0.5, 1.0, 3.0] {
            let g = gamma_c(Complex64::new(0.0, y));
            let want = PI / (y * (PI * y).sinh());
            assert!((g.norm_sqr() - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-13);
        assert!((digamma(0.5) + euler + 2.0 * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn hurwitz_reduces_to_riemann() {
        let z2 = hurwitz_zeta(2.0, 1.0);
        assert!((z2 - PI * PI / 6.0).abs() < 1e-14);
        // ζ(1/2) = -1.4603545088095868
        assert!((hurwitz_zeta(0.5, 1.0) + 1.460_354_508_809_586_8).abs() < 1e-13);
        // ζ(s, 1/2) = (2^s - 1) ζ(s)
        let s = 3.5;
        let r = hurwitz_zeta(s, 0.5) / ((2f64.powf(s) - 1.0) * hurwitz_zeta(s, 1.0));
        assert!((r - 1.0).abs() < 1e-13);
    }

    #[test]
    fn hurwitz_shift_identity_complex() {
        for &(re, im) in &[(0.5, 3.0), (0.3, 40.0), (2.5, -7.0), (0.5, 200.0)] {
            let s = Complex64::new(re, im);
            for &a in &[0.1, 0.7, 1.3] {
                let lhs = hurwitz_zeta_c(s, a) - hurwitz_zeta_c(s, a + 1.0);
                let rhs = cpow_real(a, -s);
                assert!((lhs - rhs).norm() < 1e-11 * (1.0 + rhs.norm()), "s={s} a={a}");
            }
        }
    }

    #[test]
    fn first_riemann_zero() {
        let z = hurwitz_zeta_c(Complex64::new(0.5, 14.134_725_141_734_693), 1.0);
        assert!(z.norm() < 1e-12, "{z}");
    }
}
