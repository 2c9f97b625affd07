//! Closed-form kernel functions on (0,1) used by the multiplier routes and
//! the positivity scans. Every function takes both x and h = 1 − x so that
//! the endpoint singularity at x = 1 is evaluated without cancellation;
//! below x = 1/2 power series replace the closed forms, which cancel there.

use crate::field::c_of;

const SERIES_SWITCH: f64 = 0.5;
const SERIES_TERMS: usize = 160;

/// D_e(x) = (1−x)^{−e} − (1+x)^{−e} and its companions for one exponent e.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub e: f64,
    // Taylor coefficients of D_e; only odd powers are nonzero
    d: Vec<f64>,
}

fn poch(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |p, i| p * (a + i as f64))
}

impl Kernel {
    pub fn new(e: f64) -> Self {
        let mut d = vec![0.0; SERIES_TERMS];
        let mut c = 1.0;
        for (j, dj) in d.iter_mut().enumerate().skip(1) {
            c *= (e + j as f64 - 1.0) / j as f64;
            if j % 2 == 1 {
                *dj = 2.0 * c;
            }
        }
        Kernel { e, d }
    }

    /// Σ_{j ≥ from} w(j) d_j x^{j−shift}.
    fn series(&self, x: f64, from: usize, shift: i32, w: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        let mut j = from;
        if j % 2 == 0 {
            j += 1;
        }
        let mut p = x.powi(j as i32 - shift);
        let x2 = x * x;
        while j < SERIES_TERMS {
            let t = w(j as f64) * self.d[j] * p;
            s += t;
            if t.abs() < 1e-18 * s.abs() && j > 8 {
                break;
            }
            p *= x2;
            j += 2;
        }
        s
    }

    /// k-th x-derivative of (1−x)^{−e} and of (1+x)^{−e}.
    fn parts(&self, x: f64, h: f64, k: usize) -> (f64, f64) {
        let pk = poch(self.e, k);
        let a = pk * h.powf(-self.e - k as f64);
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        let b = sgn * pk * (1.0 + x).powf(-self.e - k as f64);
        (a, b)
    }

    /// k-th derivative of D_e.
    pub fn dk(&self, x: f64, h: f64, k: usize) -> f64 {
        if x < SERIES_SWITCH {
            return self.series(x, k.max(1), k as i32, |j| poch(j - k as f64 + 1.0, k));
        }
        let (a, b) = self.parts(x, h, k);
        a - b
    }

    pub fn d(&self, x: f64, h: f64) -> f64 {
        self.dk(x, h, 0)
    }

    /// D_e(x) − 2e·x, accurate as x → 0.
    pub fn d_minus_linear(&self, x: f64, h: f64) -> f64 {
        if x < SERIES_SWITCH {
            self.series(x, 3, 0, |_| 1.0)
        } else {
            self.d(x, h) - 2.0 * self.e * x
        }
    }

    /// S_e(x) = (1−x)^{−e} + (1+x)^{−e}.
    pub fn s(&self, x: f64, h: f64) -> f64 {
        h.powf(-self.e) + (1.0 + x).powf(-self.e)
    }

    /// P(x, β) = c_β D_β(x).
    pub fn p_line(&self, x: f64, h: f64) -> f64 {
        c_of(self.e) * self.d(x, h)
    }

    /// G₀(x,β) = ∂ₓ(xF(x,0,β)) for the line kernel.
    pub fn g0(&self, x: f64, h: f64) -> f64 {
        let b = self.e;
        let xb = x.powf(1.0 + b);
        if x < SERIES_SWITCH {
            let first = self.series(x, 3, 2, |j| (j - 1.0) * (j + b));
            let d1 = self.dk(x, h, 1);
            let d2 = self.dk(x, h, 2);
            return first - xb * ((2.0 + b) * d1 + x * d2);
        }
        let (d0, d1, d2) = (self.dk(x, h, 0), self.dk(x, h, 1), self.dk(x, h, 2));
        let om = one_minus_pow(h, 2.0 + b);
        b * (d1 / x - d0 / (x * x)) + om * d2 - (2.0 + b) * xb * d1
    }

    /// ∂ₓ(xG₀(x,β)).
    pub fn dx_xg0(&self, x: f64, h: f64) -> f64 {
        let b = self.e;
        let xb = x.powf(1.0 + b);
        if x < SERIES_SWITCH {
            let first = self.series(x, 3, 2, |j| (j - 1.0) * (j - 1.0) * (j + b));
            let d1 = self.dk(x, h, 1);
            let d2 = self.dk(x, h, 2);
            let d3 = self.dk(x, h, 3);
            return first - xb * (x * x * d3 + (5.0 + 2.0 * b) * x * d2 + (2.0 + b).powi(2) * d1);
        }
        let (d0, d1, d2, d3) =
            (self.dk(x, h, 0), self.dk(x, h, 1), self.dk(x, h, 2), self.dk(x, h, 3));
        let om = one_minus_pow(h, 2.0 + b);
        b * d0 / (x * x) - b * d1 / x + (1.0 + b) * d2 - (5.0 + 2.0 * b) * x * xb * d2
            + x * om * d3
            - (2.0 + b).powi(2) * xb * d1
    }

    /// G(x,α) = ∂ₓ(xF(x,0,α)) for the periodic kernel, xF = p/x + x^{1+α}S
    /// with p = −D_α on (0,1).
    pub fn g_periodic(&self, x: f64, h: f64) -> f64 {
        let a = self.e;
        if x < SERIES_SWITCH {
            let first = -self.series(x, 3, 2, |j| j - 1.0);
            let s0 = self.s(x, h);
            let s1 = self.parts(x, h, 1);
            return first + x.powf(a) * ((1.0 + a) * s0 + x * (s1.0 + s1.1));
        }
        let (a0, b0) = self.parts(x, h, 0);
        let (a1, b1) = self.parts(x, h, 1);
        let xa = x.powf(a);
        // singular pieces grouped so that x^{2+α} − 1 is formed accurately
        let sing = a1 * (-one_minus_pow(h, 2.0 + a)) / x + a0 * (1.0 / (x * x) + (1.0 + a) * xa);
        let reg = b1 / x - b0 / (x * x) + (1.0 + a) * xa * b0 + x * xa * b1;
        sing + reg
    }

    /// ∂ₓ(xG(x,α)) for the periodic kernel.
    pub fn dx_xg_periodic(&self, x: f64, h: f64) -> f64 {
        let a = self.e;
        if x < SERIES_SWITCH {
            let first = -self.series(x, 3, 2, |j| (j - 1.0) * (j - 1.0));
            let s0 = self.s(x, h);
            let s1 = self.parts(x, h, 1);
            let s2 = self.parts(x, h, 2);
            let (s1, s2) = (s1.0 + s1.1, s2.0 + s2.1);
            return first
                + x.powf(a) * ((1.0 + a).powi(2) * s0 + (3.0 + 2.0 * a) * x * s1 + x * x * s2);
        }
        let (a0, b0) = self.parts(x, h, 0);
        let (a1, b1) = self.parts(x, h, 1);
        let (a2, b2) = self.parts(x, h, 2);
        let xa = x.powf(a);
        let sing = -a2 * one_minus_pow(h, 2.0 + a)
            + a1 * (1.0 / x + (3.0 + 2.0 * a) * x * xa)
            + a0 * ((1.0 + a).powi(2) * xa - 1.0 / (x * x));
        let reg = b2 - b1 / x
            + b0 / (x * x)
            + xa * ((1.0 + a).powi(2) * b0 + (3.0 + 2.0 * a) * x * b1 + x * x * b2);
        sing + reg
    }
}

/// 1 − (1−h)^q without cancellation.
pub fn one_minus_pow(h: f64, q: f64) -> f64 {
    -(q * (-h).ln_1p()).exp_m1()
}

/// f(x,β) = (1−x)^{−3−β}(2 + (3+β)x(−2+(2+β)x) − (1+β)(2+β)x|x|^{2+β}), x ∈ (−1,1).
pub fn f_line(x: f64, b: f64) -> f64 {
    let bracket = 2.0 + (3.0 + b) * x * (-2.0 + (2.0 + b) * x)
        - (1.0 + b) * (2.0 + b) * x * x.abs().powf(2.0 + b);
    (1.0 - x).powf(-3.0 - b) * bracket
}

/// ∂ₛ f(sx,β) = (1+β)(2+β)(3+β)s²x³(1−sx)^{−4−β}(1−|s|^β x^β).
pub fn ds_f(s: f64, x: f64, b: f64) -> f64 {
    (1.0 + b) * (2.0 + b) * (3.0 + b) * s * s * x.powi(3) * (1.0 - s * x).powf(-4.0 - b)
        * (1.0 - s.abs().powf(b) * x.powf(b))
}
