//! Grids, sampled fields with their Fourier coefficients, problem
//! parameters, closed-form constants and the hypothesis checks on data.

use crate::error::{LabError, Result};
use crate::special::{gamma, rgamma};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Domain {
    /// Period 2π.
    Torus,
    /// Window [−L, L], realised as a torus of period 2L.
    Line { half_width: f64 },
}

impl Domain {
    pub fn period(&self) -> f64 {
        match *self {
            Domain::Torus => 2.0 * PI,
            Domain::Line { half_width } => 2.0 * half_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub alpha: f64,
    pub domain: Domain,
    pub n_points: usize,
    pub epsilon: f64,
    pub holder_bump: f64,
    pub dt_safety: f64,
    pub tol: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            alpha: 0.5,
            domain: Domain::Torus,
            n_points: 1024,
            epsilon: 1e-3,
            holder_bump: 0.05,
            dt_safety: 0.25,
            tol: 1e-10,
        }
    }
}

impl Params {
    pub fn beta(&self) -> f64 {
        self.alpha - 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::ParameterRange(m));
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return bad(format!("alpha = {} not in (0,2)", self.alpha));
        }
        if self.n_points < 16 || !self.n_points.is_power_of_two() {
            return bad(format!("n_points = {} must be a power of two ≥ 16", self.n_points));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety < 1.0) {
            return bad(format!("dt_safety = {} not in (0,1)", self.dt_safety));
        }
        if self.epsilon <= 0.0 || self.tol <= 0.0 || self.holder_bump <= 0.0 {
            return bad("epsilon, tol and holder_bump must be positive".into());
        }
        if let Domain::Line { half_width } = self.domain {
            if half_width <= 0.0 {
                return bad(format!("half_width = {half_width} must be positive"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n_points, self.domain.period())
    }
}

/// Uniform nodes x_j = j·h on one period. `node` returns the representative
/// in [−P/2, P/2) so that line data can be sampled directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub period: f64,
}

impl Grid {
    pub fn new(n: usize, period: f64) -> Self {
        Grid { n, period }
    }
    pub fn torus(n: usize) -> Self {
        Grid::new(n, 2.0 * PI)
    }
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }
    pub fn node(&self, j: usize) -> f64 {
        let x = j as f64 * self.spacing();
        if 2 * j < self.n {
            x
        } else {
            x - self.period
        }
    }
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
    /// Signed mode number of FFT slot k.
    pub fn mode(&self, k: usize) -> i64 {
        if 2 * k < self.n {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }
    /// Physical wavenumber of FFT slot k.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * PI * self.mode(k) as f64 / self.period
    }
    pub fn is_nyquist(&self, k: usize) -> bool {
        2 * k == self.n
    }
    /// Index of the node mirrored through x = 0.
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward transform normalised so that u(x_j) = Σ_k c_k e^{iκ_k x_j}.
pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Inverse of `forward`, keeping the real part.
pub fn inverse(coeffs: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    buf.iter().map(|c| c.re).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
    pub coeffs: Vec<Complex64>,
    pub grid: Grid,
    pub parity: Parity,
}

impl Field {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n);
        let coeffs = forward(&values);
        Field { values, coeffs, grid, parity: Parity::None }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.n);
        let values = inverse(&coeffs);
        Field { values, coeffs, grid, parity: Parity::None }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Field::from_values(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Field::from_values(grid, vec![0.0; grid.n])
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    /// Declared parity measured on node pairs (x, −x): max deviation.
    pub fn parity_defect(&self, parity: Parity) -> f64 {
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
            Parity::None => return 0.0,
        };
        (0..self.grid.n)
            .map(|j| (self.values[j] - sign * self.values[self.grid.mirror(j)]).abs())
            .fold(0.0, f64::max)
    }

    /// Apply a Fourier symbol given as a function of the physical wavenumber.
    /// `odd_symbol` zeroes the Nyquist slot so real fields stay real.
    pub fn apply(&self, symbol: impl Fn(f64) -> Complex64, odd_symbol: bool) -> Field {
        let g = self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if odd_symbol && g.is_nyquist(k) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * symbol(g.wavenumber(k))
                }
            })
            .collect();
        Field::from_coeffs(g, coeffs)
    }

    pub fn derivative(&self) -> Field {
        self.apply(|k| Complex64::new(0.0, k), true)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.period
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trigonometric interpolant at an arbitrary point.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with(x, false)
    }

    /// Derivative of the trigonometric interpolant.
    pub fn eval_deriv(&self, x: f64) -> f64 {
        self.eval_with(x, true)
    }

    fn eval_with(&self, x: f64, deriv: bool) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let kap = g.wavenumber(k);
            let e = Complex64::from_polar(1.0, kap * x);
            if g.is_nyquist(k) {
                // split evenly between ±N/2 so the interpolant is real
                if !deriv {
                    s += c.re * (kap * x).cos();
                }
                continue;
            }
            let t = if deriv { c * e * Complex64::new(0.0, kap) } else { c * e };
            s += t.re;
        }
        s
    }

    pub fn scale(&self, a: f64) -> Field {
        Field::from_coeffs(self.grid, self.coeffs.iter().map(|c| c * a).collect())
            .with_parity(self.parity)
    }

    pub fn add(&self, other: &Field) -> Field {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Field::from_coeffs(self.grid, coeffs)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.add(&other.scale(-1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub alpha: f64,
    pub c_alpha: f64,
    pub c_bar_alpha: f64,
    pub k_alpha: f64,
    pub blowup_const: f64,
}

/// c_a = Γ(a/2) / (√π 2^{1−a} Γ((1−a)/2)); vanishes at a = 1.
pub fn c_of(a: f64) -> f64 {
    gamma(a / 2.0) * rgamma((1.0 - a) / 2.0) / (PI.sqrt() * 2f64.powf(1.0 - a))
}

/// c̄_a = Γ(a) sin(πa/2) / π.
pub fn c_bar_of(a: f64) -> f64 {
    gamma(a) * (PI * a / 2.0).sin() / PI
}

/// (1+e)·e·c_e, written with eΓ(e/2) = 2Γ(1+e/2) so that e → 0 is regular.
pub fn blowup_const_of(e: f64) -> f64 {
    (1.0 + e) * 2.0 * gamma(1.0 + e / 2.0) * rgamma((1.0 - e) / 2.0)
        / (PI.sqrt() * 2f64.powf(1.0 - e))
}

/// Constants for exponent α. The blow-up constant uses β = α − 1 when
/// α ≥ 1 and α itself below 1.
pub fn make_constants(alpha: f64) -> Result<Constants> {
    let e = if alpha >= 1.0 { alpha - 1.0 } else { alpha };
    make_constants_with(alpha, e)
}

pub fn make_constants_with(alpha: f64, exponent: f64) -> Result<Constants> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(LabError::ParameterRange(format!("alpha = {alpha} not in (0,2)")));
    }
    let k_alpha =
        -2f64.powf(alpha) * gamma((1.0 + alpha) / 2.0) * rgamma(-alpha / 2.0) / PI.sqrt();
    let c = Constants {
        alpha,
        c_alpha: c_of(alpha),
        c_bar_alpha: c_bar_of(alpha),
        k_alpha,
        blowup_const: blowup_const_of(exponent),
    };
    if [c.c_alpha, c.c_bar_alpha, c.k_alpha, c.blowup_const].iter().any(|v| !v.is_finite()) {
        return Err(LabError::ParameterRange(format!("Gamma pole hit at alpha = {alpha}")));
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Line,
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub h4: bool,
    pub diagnostics: Vec<(String, f64)>,
}

/// Measure H1–H4 on the grid. On the torus H1 reduces to positivity; H4 is
/// measured on [0, π] (torus) or [0, L] (line).
pub fn validate_hypotheses(u0: &Field, setting: Setting, tol: f64) -> HypothesisReport {
    let g = u0.grid;
    let half = g.period / 2.0;
    let neg = (-u0.min()).max(0.0);
    let h1_violation = match setting {
        Setting::Torus => neg,
        Setting::Line => {
            let edge = u0
                .values
                .iter()
                .zip(g.nodes())
                .filter(|(_, x)| x.abs() >= 0.9 * half)
                .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
            neg.max(edge)
        }
    };
    let ux = u0.derivative();
    let h2_violation = u0.values[0].abs().max(ux.values[0].abs());
    let h3_violation = u0.parity_defect(Parity::Even);
    let h4_violation = ux
        .values
        .iter()
        .zip(g.nodes())
        .filter(|(_, x)| *x >= 0.0)
        .fold(0.0, |m: f64, (v, _)| m.max(-v));
    let d = [h1_violation, h2_violation, h3_violation, h4_violation];
    HypothesisReport {
        h1: d[0] <= tol,
        h2: d[1] <= tol,
        h3: d[2] <= tol,
        h4: d[3] <= tol,
        diagnostics: ["H1", "H2", "H3", "H4"]
            .iter()
            .zip(d)
            .map(|(n, v)| (n.to_string(), v))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_reference_values() {
        let c = make_constants(1.0).unwrap();
        assert!((c.k_alpha - 1.0 / PI).abs() < 1e-14);
        assert_eq!(c.c_alpha, 0.0);
        let c = make_constants(0.5).unwrap();
        let r = 1.0 / (2.0 * PI).sqrt();
        assert!((c.c_bar_alpha - r).abs() < 1e-14);
        assert!((c.c_alpha - r).abs() < 1e-14);
        let c = make_constants(1.5).unwrap();
        assert!((c.blowup_const - 0.75 * r).abs() < 1e-14);
        assert!((c.blowup_const - 0.299_206_7).abs() < 1e-7);
        assert!(make_constants(2.0).is_err());
        assert!(make_constants(0.0).is_err());
    }

    #[test]
    fn c_bar_is_derivative_partner_of_c() {
        // c̄_a / (a − 1) = c_{a−1}: differentiating the kernel of Λ^{a−2}
        for &a in &[1.2, 1.5, 1.8] {
            let lhs = c_bar_of(a) / (a - 1.0);
            assert!((lhs - c_of(a - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn riesz_constant_matches_fourier_normalisation() {
        // kernel c|x|^{-a} has symbol 2cΓ(1−a)sin(πa/2)|k|^{a−1}
        for &a in &[0.2, 0.5, 0.8] {
            let sym = 2.0 * c_of(a) * gamma(1.0 - a) * (PI * a / 2.0).sin();
            assert!((sym - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn blowup_const_continuous_at_zero() {
        let at0 = blowup_const_of(0.0);
        assert!((at0 - 1.0 / PI).abs() < 1e-14);
        assert!((blowup_const_of(1e-7) - at0).abs() < 1e-6);
    }

    #[test]
    fn round_trip_and_mirror() {
        let g = Grid::torus(64);
        let u = Field::from_fn(g, |x| (3.0 * x).cos() + 0.2 * x.sin());
        let back = inverse(&forward(&u.values));
        for (a, b) in back.iter().zip(&u.values) {
            assert!((a - b).abs() < 1e-14);
        }
        let even = Field::from_fn(g, |x| x.cos());
        assert!(even.parity_defect(Parity::Even) < 1e-15);
        assert!((even.eval(0.3) - 0.3f64.cos()).abs() < 1e-14);
        assert!((even.eval_deriv(0.3) + 0.3f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn hypothesis_examples() {
        let tol = 1e-10;
        let g = Grid::new(256, 16.0);
        let bump = Field::from_fn(g, |x| {
            let s = 1.0 - x * x;
            if s > 0.0 {
                x * x * s * s
            } else {
                0.0
            }
        });
        let r = validate_hypotheses(&bump, Setting::Line, tol);
        assert!(r.h1 && r.h2 && r.h3, "{r:?}");
        let t = Grid::torus(64);
        let r = validate_hypotheses(&Field::from_fn(t, |x| 1.0 - x.cos()), Setting::Torus, tol);
        assert!(r.h2 && r.h3 && r.h4);
        let r = validate_hypotheses(&Field::from_fn(t, |x| 1.0 + x.cos()), Setting::Torus, tol);
        assert!(!r.h2);
        assert!((r.diagnostics[1].1 - 2.0).abs() < 1e-12);
    }
}
