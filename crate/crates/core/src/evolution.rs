//! Pseudospectral time integration of the transport equation
//! ∂ₜu + (u Λ^{α−1}Hu)ₓ = 0 and of the two-field system in which the
//! velocity is recovered from vₓ = G + Λ^α u.

use crate::error::{LabError, Result};
use crate::field::{Domain, Field, Grid, Parity, Params};
use crate::monitor::{MonitorRow, MonitorSeries, Scenario};
use crate::ops::{kernel_oracle, velocity, Extent, FnProfile, Which};
use crate::special::gamma;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub t: f64,
    pub u: Field,
    pub g: Option<Field>,
    pub v_mean: f64,
}

impl EvolutionState {
    pub fn new(u: Field, g: Option<Field>) -> Self {
        EvolutionState { t: 0.0, u, g, v_mean: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxTime,
    ResolutionLoss,
    Threshold,
    NonFinite,
    BoundaryGuard,
    MaxSteps,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::MaxTime => "max-time",
            StopReason::ResolutionLoss => "resolution-loss",
            StopReason::Threshold => "threshold",
            StopReason::NonFinite => "non-finite",
            StopReason::BoundaryGuard => "boundary-guard",
            StopReason::MaxSteps => "max-steps",
        }
    }
}

/// Stop rules for a fixed-step RK4 march; the step itself is
/// dt = dt_safety·Δx / max(1, max|v|) with dt_safety taken from [`Params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepPolicy {
    pub t_max: f64,
    /// Stop when the energy fraction in the upper third of the retained band exceeds this.
    pub tail_threshold: f64,
    /// Stop once max|uₓ| exceeds this multiple of its initial value.
    pub growth_stop: Option<f64>,
    pub max_steps: usize,
    /// Line runs: stop when |u| near the window edge exceeds this fraction of max|u|.
    pub boundary_tol: f64,
    /// Data with u(0) = 0 keep it exactly; if set, stop as unresolved once
    /// |u(0)| exceeds this fraction of max|u|.
    pub pin_tol: Option<f64>,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            t_max: 1.0,
            tail_threshold: 1e-6,
            growth_stop: None,
            max_steps: 2_000_000,
            boundary_tol: 1e-10,
            pin_tol: None,
        }
    }
}

/// Number of retained modes per side under the two-thirds rule.
pub fn dealias_cutoff(n: usize) -> i64 {
    (n / 3) as i64
}

/// Zero every mode with |k| > N/3.
pub fn dealias(f: &Field) -> Field {
    let g = f.grid;
    let kc = dealias_cutoff(g.n);
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| if g.mode(k).abs() > kc || g.is_nyquist(k) { Complex64::new(0.0, 0.0) } else { c })
        .collect();
    Field::from_coeffs(g, coeffs).with_parity(f.parity)
}

fn product(a: &Field, b: &Field) -> Field {
    let v = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
    dealias(&Field::from_values(a.grid, v))
}

/// −∂ₓ(dealias(u·Λ^{α−1}Hu)).
pub fn rhs_cht(u: &Field, alpha: f64) -> Field {
    product(u, &velocity(u, alpha)).derivative().scale(-1.0)
}

/// v with vₓ = G + Λ^α u and mean v_mean.
pub fn velocity_from_g(u: &Field, g: &Field, alpha: f64, v_mean: f64) -> Result<Field> {
    let grid = u.grid;
    let scale = g.max_abs().max(u.max_abs()).max(1.0);
    if g.mean().abs() > 1e-12 * scale {
        return Err(LabError::NonzeroMean(g.mean()));
    }
    let coeffs = (0..grid.n)
        .map(|k| {
            if k == 0 {
                return Complex64::new(v_mean, 0.0);
            }
            if grid.is_nyquist(k) {
                return Complex64::new(0.0, 0.0);
            }
            let kap = grid.wavenumber(k);
            (g.coeffs[k] + u.coeffs[k] * kap.abs().powf(alpha)) / Complex64::new(0.0, kap)
        })
        .collect();
    Ok(Field::from_coeffs(grid, coeffs))
}

/// (−(vu)ₓ, −(vG)ₓ) for the two-field system.
pub fn rhs_ea(state: &EvolutionState, alpha: f64) -> Result<(Field, Field)> {
    let g = state.g.clone().unwrap_or_else(|| Field::zeros(state.u.grid));
    let v = velocity_from_g(&state.u, &g, alpha, state.v_mean)?;
    Ok((product(&v, &state.u).derivative().scale(-1.0), product(&v, &g).derivative().scale(-1.0)))
}

fn axpy(a: &Field, s: f64, b: &Field) -> Field {
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y * s).collect();
    Field::from_coeffs(a.grid, coeffs)
}

fn combine(u: &Field, k: [&Field; 4], dt: f64) -> Field {
    let coeffs = (0..u.grid.n)
        .map(|i| u.coeffs[i] + (k[0].coeffs[i] + k[1].coeffs[i] * 2.0 + k[2].coeffs[i] * 2.0 + k[3].coeffs[i]) * (dt / 6.0))
        .collect();
    Field::from_coeffs(u.grid, coeffs).with_parity(u.parity)
}

/// One classical RK4 step of size dt.
pub fn rk4_step(state: &EvolutionState, alpha: f64, dt: f64) -> Result<EvolutionState> {
    let eval = |u: &Field, g: &Option<Field>| -> Result<(Field, Option<Field>)> {
        match g {
            None => Ok((rhs_cht(u, alpha), None)),
            Some(g) => {
                let s = EvolutionState { t: state.t, u: u.clone(), g: Some(g.clone()), v_mean: state.v_mean };
                let (a, b) = rhs_ea(&s, alpha)?;
                Ok((a, Some(b)))
            }
        }
    };
    let shift = |f: &Option<Field>, s: f64, k: &Option<Field>| match (f, k) {
        (Some(f), Some(k)) => Some(axpy(f, s, k)),
        _ => None,
    };
    let (u, g) = (&state.u, &state.g);
    let (k1, l1) = eval(u, g)?;
    let (k2, l2) = eval(&axpy(u, dt / 2.0, &k1), &shift(g, dt / 2.0, &l1))?;
    let (k3, l3) = eval(&axpy(u, dt / 2.0, &k2), &shift(g, dt / 2.0, &l2))?;
    let (k4, l4) = eval(&axpy(u, dt, &k3), &shift(g, dt, &l3))?;
    let u_new = dealias(&combine(u, [&k1, &k2, &k3, &k4], dt));
    let g_new = match (g, l1, l2, l3, l4) {
        (Some(g), Some(a), Some(b), Some(c), Some(d)) => Some(dealias(&combine(g, [&a, &b, &c, &d], dt))),
        _ => None,
    };
    Ok(EvolutionState { t: state.t + dt, u: u_new, g: g_new, v_mean: state.v_mean })
}

/// Fraction of the non-mean energy of u in the upper third of the retained band.
pub fn tail_fraction(u: &Field) -> f64 {
    let g = u.grid;
    let kc = dealias_cutoff(g.n);
    let lo = 2 * kc / 3;
    let (mut tail, mut total) = (0.0, 0.0);
    for (k, c) in u.coeffs.iter().enumerate() {
        let m = g.mode(k).abs();
        if m == 0 {
            continue;
        }
        let e = c.norm_sqr();
        total += e;
        if m > lo {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

fn finite(f: &Field) -> bool {
    f.values.iter().all(|v| v.is_finite())
}

/// Largest |u| at the outer tenth of the periodic window, relative to max|u|.
fn boundary_fraction(u: &Field) -> f64 {
    let half = u.grid.period / 2.0;
    let edge = u
        .values
        .iter()
        .zip(u.grid.nodes())
        .filter(|(_, x)| x.abs() >= 0.9 * half)
        .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    let top = u.max_abs();
    if top == 0.0 {
        0.0
    } else {
        edge / top
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: MonitorSeries,
    pub state: EvolutionState,
    pub stop_reason: StopReason,
    pub steps: usize,
    /// Set when the run was aborted on a non-finite state; `state` is then
    /// the last finite one.
    pub aborted: bool,
}

/// March from the initial data until a stop rule fires. Monitors are
/// sampled after every step.
pub fn evolve(u0: &Field, g0: Option<&Field>, params: &Params, policy: &StepPolicy) -> Result<RunOutcome> {
    evolve_observed(u0, g0, params, policy, |_| {})
}

/// [`evolve`] with a callback that sees every accepted state, the initial one included.
pub fn evolve_observed(
    u0: &Field,
    g0: Option<&Field>,
    params: &Params,
    policy: &StepPolicy,
    mut observe: impl FnMut(&EvolutionState),
) -> Result<RunOutcome> {
    params.validate()?;
    let alpha = params.alpha;
    let scenario = Scenario::from_params(params)?;
    let line = matches!(params.domain, Domain::Line { .. });
    let mut state = EvolutionState::new(dealias(u0).with_parity(u0.parity), g0.map(dealias));
    if let Some(g) = &state.g {
        velocity_from_g(&state.u, g, alpha, 0.0)?;
    }
    let mut series = MonitorSeries::new(scenario);
    observe(&state);
    let first: MonitorRow = series.sample(&state);
    let ux0 = first.max_ux;
    series.push(first);
    let dx = state.u.grid.spacing();
    let pinned = state.u.values[0].abs() <= 1e-12 * state.u.max_abs();
    let mut steps = 0;
    let stop_reason = loop {
        if state.t >= policy.t_max * (1.0 - 1e-14) {
            break StopReason::MaxTime;
        }
        if steps >= policy.max_steps {
            break StopReason::MaxSteps;
        }
        let vmax = match &state.g {
            None => velocity(&state.u, alpha).max_abs(),
            Some(g) => velocity_from_g(&state.u, g, alpha, state.v_mean)?.max_abs(),
        };
        let mut dt = params.dt_safety * dx / vmax.max(1.0);
        if state.t + dt > policy.t_max {
            dt = policy.t_max - state.t;
        }
        let next = rk4_step(&state, alpha, dt)?;
        if !finite(&next.u) || next.g.as_ref().is_some_and(|g| !finite(g)) {
            series.stop_reason = Some(StopReason::NonFinite);
            return Ok(RunOutcome { series, state, stop_reason: StopReason::NonFinite, steps, aborted: true });
        }
        state = next;
        steps += 1;
        observe(&state);
        let row = series.sample(&state);
        let tail = row.tail_fraction;
        let ux = row.max_ux;
        series.push(row);
        if tail > policy.tail_threshold || policy.pin_tol.is_some_and(|p| pinned && state.u.values[0].abs() > p * state.u.max_abs()) {
            break StopReason::ResolutionLoss;
        }
        if line && boundary_fraction(&state.u) > policy.boundary_tol {
            break StopReason::BoundaryGuard;
        }
        if let Some(f) = policy.growth_stop {
            if ux >= f * ux0 {
                break StopReason::Threshold;
            }
        }
    };
    series.stop_reason = Some(stop_reason);
    Ok(RunOutcome { series, state, stop_reason, steps, aborted: false })
}

// ---------------------------------------------------------------------------
// Checkpoints

const MAGIC: &[u8; 4] = b"FLCK";
const VERSION: u32 = 1;

/// Binary record: magic, version, t, v_mean, grid (n, period), u
/// coefficients, then a flag and the G coefficients. Little endian.
pub fn write_checkpoint(path: &Path, state: &EvolutionState) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&state.t.to_le_bytes());
    buf.extend_from_slice(&state.v_mean.to_le_bytes());
    buf.extend_from_slice(&(state.u.grid.n as u64).to_le_bytes());
    buf.extend_from_slice(&state.u.grid.period.to_le_bytes());
    let put = |buf: &mut Vec<u8>, f: &Field| {
        for c in &f.coeffs {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    };
    put(&mut buf, &state.u);
    match &state.g {
        Some(g) => {
            buf.push(1);
            put(&mut buf, g);
        }
        None => buf.push(0),
    }
    let mut f = std::fs::File::create(path).map_err(|e| LabError::Checkpoint(e.to_string()))?;
    f.write_all(&buf).map_err(|e| LabError::Checkpoint(e.to_string()))
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self.buf.get(self.pos..self.pos + n).ok_or_else(|| LabError::Checkpoint("truncated record".into()))?;
        self.pos += n;
        Ok(s)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn coeffs(&mut self, n: usize) -> Result<Vec<Complex64>> {
        (0..n).map(|_| Ok(Complex64::new(self.f64()?, self.f64()?))).collect()
    }
}

pub fn read_checkpoint(path: &Path) -> Result<EvolutionState> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| LabError::Checkpoint(e.to_string()))?;
    let mut cur = Cursor { buf: &buf, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(LabError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(LabError::Checkpoint(format!("unsupported version {version}")));
    }
    let t = cur.f64()?;
    let v_mean = cur.f64()?;
    let n = u64::from_le_bytes(cur.take(8)?.try_into().unwrap()) as usize;
    let period = cur.f64()?;
    if n == 0 || n > 1 << 26 {
        return Err(LabError::Checkpoint(format!("implausible grid size {n}")));
    }
    let grid = Grid::new(n, period);
    let u = Field::from_coeffs(grid, cur.coeffs(n)?);
    let g = match cur.take(1)?[0] {
        0 => None,
        1 => Some(Field::from_coeffs(grid, cur.coeffs(n)?)),
        x => return Err(LabError::Checkpoint(format!("bad G flag {x}"))),
    };
    Ok(EvolutionState { t, u: u.with_parity(Parity::None), g, v_mean })
}

// ---------------------------------------------------------------------------
// Self-similar profile

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfSimReport {
    pub alpha: f64,
    pub slope: f64,
    pub fit_residual: f64,
    pub holder_exponent: f64,
    pub linear_pass: bool,
    pub holder_pass: bool,
}

/// φ(x) = K(1−x²)₊^{α/2} with unit mass.
pub fn selfsim_profile(alpha: f64, scale: f64) -> FnProfile<impl Fn(f64) -> f64, impl Fn(f64) -> f64> {
    let a = alpha / 2.0;
    // ∫(1−x²)^a dx = B(1/2, a+1)
    let k = scale * gamma(a + 1.5) / (gamma(0.5) * gamma(a + 1.0));
    FnProfile {
        f: move |x: f64| {
            let w = 1.0 - x * x;
            if w > 0.0 {
                k * w.powf(a)
            } else {
                0.0
            }
        },
        df: move |x: f64| {
            let w = 1.0 - x * x;
            if w > 0.0 {
                -2.0 * a * k * x * w.powf(a - 1.0)
            } else {
                0.0
            }
        },
        extent: Extent::Compact(1.0),
        breaks: vec![-1.0, 1.0],
        mean: 0.0,
    }
}

/// Linearity of Λ^{α−1}Hφ on (−0.9, 0.9) and the Hölder exponent of φ at x = 1.
pub fn selfsim_profile_check(alpha: f64, scale: f64) -> Result<SelfSimReport> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(LabError::ParameterRange(format!("alpha {alpha} not in (0,2)")));
    }
    let phi = selfsim_profile(alpha, scale);
    let xs: Vec<f64> = (0..37).map(|i| -0.9 + 0.05 * i as f64).collect();
    let vs = xs.iter().map(|&x| kernel_oracle(&phi, alpha, x, Which::LambdaHilbert)).collect::<Result<Vec<f64>>>()?;
    let slope = xs.iter().zip(&vs).map(|(x, v)| x * v).sum::<f64>() / xs.iter().map(|x| x * x).sum::<f64>();
    let vmax = vs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let fit_residual = xs.iter().zip(&vs).map(|(x, v)| (v - slope * x).abs()).fold(0.0, f64::max) / vmax;
    let hs: Vec<f64> = (0..9).map(|i| 1e-6 * 10f64.powf(i as f64 / 2.0)).collect();
    let ph: Vec<f64> = hs.iter().map(|h| (phi.f)(1.0 - h)).collect();
    let holder_exponent = crate::inequalities::power_fit(&hs, &ph);
    Ok(SelfSimReport {
        alpha,
        slope,
        fit_residual,
        holder_exponent,
        linear_pass: fit_residual <= 1e-3,
        holder_pass: (holder_exponent - alpha / 2.0).abs() <= 0.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rhs_of_one_minus_cos() {
        let g = Grid::torus(64);
        let u = Field::from_fn(g, |x| 1.0 - x.cos());
        for &a in &[0.4, 1.0, 1.6] {
            let r = rhs_cht(&u, a);
            for (v, x) in r.values.iter().zip(g.nodes()) {
                assert!((v - (x.cos() - (2.0 * x).cos())).abs() < 1e-12);
            }
            assert_eq!(r.coeffs[0].re, 0.0);
        }
        assert_eq!(rhs_cht(&Field::zeros(g), 0.5).max_abs(), 0.0);
    }

    #[test]
    fn two_field_rhs_reduces_with_zero_g() {
        let g = Grid::torus(128);
        let u = Field::from_fn(g, |x| (x.cos() * 1.5).exp() - 0.4 * (3.0 * x).cos());
        let s = EvolutionState::new(u.clone(), Some(Field::zeros(g)));
        let (a, b) = rhs_ea(&s, 0.6).unwrap();
        let c = rhs_cht(&u, 0.6);
        for (x, y) in a.values.iter().zip(&c.values) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(b.max_abs(), 0.0);
        let bad = EvolutionState::new(u, Some(Field::from_fn(g, |_| 1.0)));
        assert!(matches!(rhs_ea(&bad, 0.6), Err(LabError::NonzeroMean(_))));
    }

    #[test]
    fn checkpoint_round_trip() {
        let g = Grid::new(32, 4.0 * PI);
        let u = Field::from_fn(g, |x| (0.5 * x).cos());
        let s = EvolutionState { t: 0.125, u: u.clone(), g: Some(u.scale(0.0)), v_mean: 0.0 };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.bin");
        write_checkpoint(&p, &s).unwrap();
        let r = read_checkpoint(&p).unwrap();
        assert_eq!(r.t, 0.125);
        assert_eq!(r.u.coeffs, s.u.coeffs);
        assert_eq!(r.u.grid, g);
        assert!(r.g.is_some());
        std::fs::write(&p, b"FLCK\x02\0\0\0").unwrap();
        assert!(read_checkpoint(&p).is_err());
    }
}
