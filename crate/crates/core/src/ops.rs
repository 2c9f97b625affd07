//! Nonlocal operators as Fourier multipliers, and a real-space quadrature
//! oracle for Λ^{α−1}H and Λ^{α−1} that shares no code with the spectral path.

use crate::error::{LabError, Result};
use crate::field::{c_bar_of, c_of, Field, Parity};
use crate::quad::tanh_sinh;
use crate::special::{digamma, hurwitz_zeta};
use num_complex::Complex64;
use std::f64::consts::PI;

fn sign(k: f64) -> f64 {
    if k > 0.0 {
        1.0
    } else if k < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Symbol of Λ^s: |k|^s with the zero mode removed.
pub fn lambda_symbol(k: f64, s: f64) -> Complex64 {
    if k == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(k.abs().powf(s), 0.0)
    }
}

/// Symbol of H: −i·sign(k).
pub fn hilbert_symbol(k: f64) -> Complex64 {
    Complex64::new(0.0, -sign(k))
}

fn flip(p: Parity) -> Parity {
    match p {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
        Parity::None => Parity::None,
    }
}

pub fn hilbert(u: &Field) -> Field {
    u.apply(hilbert_symbol, true).with_parity(flip(u.parity))
}

/// Λ^s for s ∈ (−1, 2]; mode 0 is always set to zero.
pub fn lambda_power(u: &Field, s: f64) -> Field {
    assert!(s > -1.0 && s <= 2.0, "lambda_power: s = {s} outside (-1, 2]");
    u.apply(|k| lambda_symbol(k, s), false).with_parity(u.parity)
}

/// v = Λ^{α−1}Hu.
pub fn velocity(u: &Field, alpha: f64) -> Field {
    let s = alpha - 1.0;
    let g = u.grid;
    let coeffs = u
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            if g.is_nyquist(k) {
                return Complex64::new(0.0, 0.0);
            }
            let kap = g.wavenumber(k);
            (c * lambda_symbol(kap, s)) * hilbert_symbol(kap)
        })
        .collect();
    Field::from_coeffs(g, coeffs).with_parity(flip(u.parity))
}

/// Where a profile lives: periodic with a period, or supported in [−R, R].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extent {
    Periodic(f64),
    Compact(f64),
}

/// A function of one variable the oracle can integrate against.
pub trait Profile {
    fn value(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
    fn extent(&self) -> Extent;
    /// Points where the profile is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    /// Mean over one period (periodic profiles only).
    fn mean(&self) -> f64 {
        0.0
    }
}

impl Profile for Field {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn deriv(&self, x: f64) -> f64 {
        self.eval_deriv(x)
    }
    fn extent(&self) -> Extent {
        Extent::Periodic(self.grid.period)
    }
    fn mean(&self) -> f64 {
        Field::mean(self)
    }
}

/// Profile built from closures.
pub struct FnProfile<F, D> {
    pub f: F,
    pub df: D,
    pub extent: Extent,
    pub breaks: Vec<f64>,
    pub mean: f64,
}

impl<F: Fn(f64) -> f64, D: Fn(f64) -> f64> Profile for FnProfile<F, D> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn deriv(&self, x: f64) -> f64 {
        (self.df)(x)
    }
    fn extent(&self) -> Extent {
        self.extent
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
    fn mean(&self) -> f64 {
        self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// Λ^{α−1}u, α ∈ (0,1).
    Lambda,
    /// Λ^{α−1}Hu, α ∈ (0,2).
    LambdaHilbert,
}

const ORACLE_TOL: f64 = 1e-13;

/// ∫₀^∞ t^{−a} g(t) dt for a ∈ (0,1], over panels with a singular first panel.
fn weighted_half_line(
    a: f64,
    g: &dyn Fn(f64) -> f64,
    extent: Extent,
    mut breaks: Vec<f64>,
) -> f64 {
    let first_panel = |hi: f64| -> f64 {
        if a == 1.0 {
            tanh_sinh(|t, _, _| g(t) / t, 0.0, hi, ORACLE_TOL)
        } else {
            // t = τ^{1/(1−a)} turns t^{−a} dt into dτ/(1−a)
            let q = 1.0 / (1.0 - a);
            tanh_sinh(|tau, _, _| g(tau.powf(q)), 0.0, hi.powf(1.0 - a), ORACLE_TOL) * q
        }
    };
    let plain = |lo: f64, hi: f64| -> f64 {
        tanh_sinh(|t, _, _| t.powf(-a) * g(t), lo, hi, ORACLE_TOL)
    };
    let end = match extent {
        Extent::Periodic(p) => p,
        Extent::Compact(r) => r,
    };
    breaks.retain(|&b| b > 0.0 && b < end);
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup();
    let mut edges = vec![0.0];
    edges.extend(breaks);
    edges.push(end);
    let mut total = first_panel(edges[1]);
    for w in edges.windows(2).skip(1) {
        total += plain(w[0], w[1]);
    }
    if let Extent::Periodic(p) = extent {
        // remaining periods summed exactly through the Hurwitz zeta function
        let weight = |t: f64| {
            if a == 1.0 {
                -digamma(1.0 + t / p) / p
            } else {
                p.powf(-a) * hurwitz_zeta(a, 1.0 + t / p)
            }
        };
        total += tanh_sinh(|t, _, _| weight(t) * g(t), 0.0, p, ORACLE_TOL);
    }
    total
}

/// Real-space evaluation of Λ^{α−1}Hu(x) or Λ^{α−1}u(x).
///
/// Periodic profiles use the exact period sum; compact ones integrate over
/// the support. For α ∈ (1,2) the Hilbert branch uses Λ^βH = −Λ^{β−1}∂.
pub fn kernel_oracle<P: Profile + ?Sized>(u: &P, alpha: f64, x: f64, which: Which) -> Result<f64> {
    let extent = u.extent();
    let (radius, periodic) = match extent {
        Extent::Periodic(p) => (p, true),
        Extent::Compact(r) => (r, false),
    };
    // t-breakpoints: where x ± t crosses a kink of u
    let mut kinks = u.breakpoints();
    if !periodic {
        kinks.push(radius);
        kinks.push(-radius);
    }
    let tb: Vec<f64> = kinks.iter().flat_map(|b| [(b - x).abs(), (x - b).abs()]).collect();
    let ext = if periodic { extent } else { Extent::Compact(radius + x.abs()) };
    let mean = if periodic { u.mean() } else { 0.0 };
    let value = match which {
        Which::Lambda => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(LabError::ParameterRange(format!("Lambda branch needs alpha in (0,1), got {alpha}")));
            }
            let g = |t: f64| u.value(x - t) + u.value(x + t) - 2.0 * mean;
            c_of(alpha) * weighted_half_line(alpha, &g, ext, tb)
        }
        Which::LambdaHilbert => {
            if !(alpha > 0.0 && alpha < 2.0) {
                return Err(LabError::ParameterRange(format!("alpha = {alpha} not in (0,2)")));
            }
            if alpha <= 1.0 {
                let g = |t: f64| u.value(x - t) - u.value(x + t);
                let pref = if alpha == 1.0 { 1.0 / PI } else { c_bar_of(alpha) };
                pref * weighted_half_line(alpha, &g, ext, tb)
            } else {
                let b = alpha - 1.0;
                let g = |t: f64| u.deriv(x - t) + u.deriv(x + t);
                -c_of(b) * weighted_half_line(b, &g, ext, tb)
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(LabError::OracleDivergence(format!("non-finite value at x = {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn close(a: &Field, f: impl Fn(f64) -> f64, tol: f64) {
        for (v, x) in a.values.iter().zip(a.grid.nodes()) {
            assert!((v - f(x)).abs() < tol, "x={x}: {v} vs {}", f(x));
        }
    }

    #[test]
    fn hilbert_of_cosines_and_constants() {
        let g = Grid::torus(32);
        for n in 1..5 {
            let u = Field::from_fn(g, |x| (n as f64 * x).cos());
            close(&hilbert(&u), |x| (n as f64 * x).sin(), 1e-13);
        }
        close(&hilbert(&Field::from_fn(g, |_| 3.0)), |_| 0.0, 1e-15);
    }

    #[test]
    fn velocity_examples() {
        let g = Grid::torus(64);
        for &a in &[0.3, 0.5, 1.0, 1.5] {
            let v = velocity(&Field::from_fn(g, |x| 1.0 - x.cos()), a);
            close(&v, |x| -x.sin(), 1e-13);
            let v = velocity(&Field::from_fn(g, |x| (2.0 * x).cos()), a);
            close(&v, |x| 2f64.powf(a - 1.0) * (2.0 * x).sin(), 1e-13);
        }
    }

    #[test]
    fn velocity_is_composition_bitwise() {
        let g = Grid::torus(128);
        let u = Field::from_fn(g, |x| (x.cos() * 2.0).exp() - 1.0 + 0.3 * (5.0 * x).sin());
        for &al in &[0.2, 0.7, 1.4] {
            let v = velocity(&u, al);
            let w = hilbert(&lambda_power(&u, al - 1.0));
            assert_eq!(v.coeffs, w.coeffs);
        }
    }

    #[test]
    fn oracle_matches_spectral_on_cosine() {
        let g = Grid::torus(32);
        let u = Field::from_fn(g, |x| 1.0 - x.cos());
        for &a in &[0.3, 0.5, 0.7, 1.0, 1.3] {
            for &x in &[0.4, PI / 2.0, 2.5] {
                let o = kernel_oracle(&u, a, x, Which::LambdaHilbert).unwrap();
                assert!((o + x.sin()).abs() < 1e-9, "a={a} x={x}: {o}");
            }
        }
        let w = Field::from_fn(g, |x| (2.0 * x).cos() + 0.5);
        for &a in &[0.3, 0.8] {
            let o = kernel_oracle(&w, a, 0.9, Which::Lambda).unwrap();
            let want = 2f64.powf(a - 1.0) * 1.8f64.cos();
            assert!((o - want).abs() < 1e-9, "a={a}: {o} vs {want}");
        }
    }

    #[test]
    fn oracle_zero_field() {
        let u = Field::zeros(Grid::torus(16));
        assert_eq!(kernel_oracle(&u, 0.5, 1.0, Which::LambdaHilbert).unwrap(), 0.0);
    }
}
