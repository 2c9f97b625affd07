//! Quadrature rules: Gauss-Legendre panels, adaptive Gauss-Kronrod,
//! tanh-sinh for endpoint singularities, and a log-coordinate driver for
//! oscillatory integrals of the form ∫₀¹ f(x) dx with f ~ x^{iλ}·(...).

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

/// Scalar types the integrators accept.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn abs(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

/// 16-point Gauss-Legendre on [a, b]; also returns Σ|f|·w as a size scale.
pub fn gl16_panel<T: Scalar, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let (x, w) = gl16();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = T::zero();
    let mut mag = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let v = f(c + h * xi) * (wi * h);
        mag += v.abs();
        s = s + v;
    }
    (s, mag)
}

/// Composite Gauss-Legendre with `panels` equal panels of `order` nodes.
pub fn gl_composite<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> T {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut total = T::zero();
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let (c, h) = (lo + 0.5 * width, 0.5 * width);
        let mut s = T::zero();
        for (xi, wi) in x.iter().zip(&w) {
            s = s + f(c + h * xi) * (wi * h);
        }
        total = total + s;
    }
    total
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_87,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_99,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_6,
    0.123_491_976_262_065_9,
    0.134_709_217_311_473_3,
    0.142_775_938_577_060_1,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_1,
    0.269_266_719_309_996_4,
    0.295_524_224_714_752_9,
];

fn gk21<T: Scalar, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut k = fc * WGK[10];
    let mut g = T::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let kk = k * h;
    let gg = g * h;
    (kk, (kk - gg).abs())
}

/// Adaptive 21-point Gauss-Kronrod with global bisection.
/// Returns (value, error estimate). Deterministic subdivision order.
pub fn gk_adaptive<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> (T, f64) {
    let (v, e) = gk21(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total = pieces.iter().fold(T::zero(), |s, p| s + p.2);
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || pieces.len() >= max_intervals {
            return (total, err);
        }
        // split the worst interval; first index wins ties
        let mut worst = 0;
        for (i, p) in pieces.iter().enumerate() {
            if p.3 > pieces[worst].3 {
                worst = i;
            }
        }
        let (lo, hi, _, _) = pieces[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return (total, err);
        }
        let (v1, e1) = gk21(&mut f, lo, mid);
        let (v2, e2) = gk21(&mut f, mid, hi);
        pieces[worst] = (lo, mid, v1, e1);
        pieces.insert(worst + 1, (mid, hi, v2, e2));
    }
}

/// Tanh-sinh quadrature on [a, b]. The integrand receives
/// (x, distance to a, distance to b) so that endpoint singularities can be
/// evaluated without cancellation.
pub fn tanh_sinh<T: Scalar, F: FnMut(f64, f64, f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> T {
    let half = 0.5 * (b - a);
    let hpi = std::f64::consts::FRAC_PI_2;
    let t_max = 6.5;
    // Node at parameter t: returns weighted contribution of both mirror points.
    let mut eval = |t: f64| -> T {
        let u = hpi * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let d = 2.0 * half * e / (1.0 + e);
        let wgt = half * hpi * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if d <= f64::MIN_POSITIVE * 1e6 || wgt == 0.0 {
            return T::zero();
        }
        if t == 0.0 {
            return f(a + half, half, half) * wgt;
        }
        let right = f(b - d, 2.0 * half - d, d);
        let left = f(a + d, d, 2.0 * half - d);
        (right + left) * wgt
    };
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum = sum + eval(k as f64 * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum = sum + eval(k as f64 * h);
            k += 2;
        }
        let cur = sum * h;
        let diff = (cur - prev).abs();
        prev = cur;
        if diff <= rel_tol * cur.abs() || diff < 1e-300 {
            break;
        }
    }
    prev
}

/// ∫₀¹ f(x) dx in the coordinate t = −log x. `f(x, h)` receives x and
/// h = 1 − x computed without cancellation. The integrand may carry an
/// integrable singularity at x = 1 and oscillation with frequency `freq`
/// in log x; it must decay as x → 0.
pub fn log_coord_01<T: Scalar, F: FnMut(f64, f64) -> T>(mut f: F, freq: f64, rel_tol: f64) -> T {
    let width = (std::f64::consts::PI / freq.abs().max(1e-300)).min(1.0);
    let mut g = |t: f64, dt: f64| {
        let x = (-t).exp();
        f(x, -(-dt).exp_m1()) * x
    };
    // first panel carries the x = 1 singularity
    let mut total = tanh_sinh(|t, dl, _| g(t, dl), 0.0, width, rel_tol);
    let mut lo = width;
    let mut quiet = 0;
    while lo < 80.0 {
        let (s, mag) = gl16_panel(&mut |t: f64| g(t, t), lo, lo + width);
        total = total + s;
        lo += width;
        if mag <= 1e-18 * total.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        assert!(x[3].abs() < 1e-15);
    }

    #[test]
    fn gk_handles_smooth_and_sqrt() {
        let (v, _) = gk_adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14, 100);
        assert!((v - 2.0).abs() < 1e-13);
        let (v, _) = gk_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13, 500);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // ∫₀¹ x^{-1/2}(1-x)^{-0.9} dx = B(1/2, 1/10)
        let v = tanh_sinh(|_, dl, dr| dl.powf(-0.5) * dr.powf(-0.9), 0.0, 1.0, 1e-14);
        let want = crate::special::gamma(0.5) * crate::special::gamma(0.1)
            / crate::special::gamma(0.6);
        assert!((v - want).abs() / want < 1e-11, "{v} vs {want}");
    }

    #[test]
    fn log_coord_mellin_of_indicator() {
        // ∫₀¹ x^{iλ-1+a} dx = 1/(iλ+a)
        for &lam in &[0.0, 2.0, 50.0] {
            let a = 0.7;
            let s = Complex64::new(a, lam);
            let v = log_coord_01(
                |x, _| crate::special::cpow_real(x, s - 1.0),
                lam,
                1e-13,
            );
            let want = 1.0 / s;
            assert!((v - want).norm() < 1e-12, "lam={lam}: {v} vs {want}");
        }
    }

    #[test]
    fn log_coord_singular_at_one() {
        // ∫₀¹ x (1-x)^{-1/2} dx = 4/3
        let v = log_coord_01(|x, h| x * h.powf(-0.5), 0.0, 1e-14);
        assert!((v - 4.0 / 3.0).abs() < 1e-12);
    }
}
