//! Time series of blow-up diagnostics, differential-inequality margins
//! and a simple blow-up time estimator.

use crate::error::{LabError, Result};
use crate::evolution::{tail_fraction, EvolutionState, StopReason};
use crate::field::{Constants, Domain, Params, Setting};
use crate::inequalities::WeightedFunctional;
use crate::mellin::linear_fit;
use crate::ops::lambda_power;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// What gets monitored: the weighted functional ∫₀^∞ u/x^{1+α} (which is
/// I_β on the line with β = α−1, J_α on the torus) and, at α = 1, Λu(0,t).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub alpha: f64,
    pub setting: Setting,
    functional: Option<WeightedFunctional>,
}

impl Scenario {
    pub fn from_params(p: &Params) -> Result<Self> {
        let setting = match p.domain {
            Domain::Torus => Setting::Torus,
            Domain::Line { .. } => Setting::Line,
        };
        let functional = Some(WeightedFunctional::new(p.grid(), 1.0 + p.alpha, setting)?);
        Ok(Scenario { alpha: p.alpha, setting, functional })
    }

    pub fn power(&self) -> f64 {
        1.0 + self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MonitorRow {
    pub t: f64,
    pub mass: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub max_ux: f64,
    pub weighted_functional: Option<f64>,
    pub lambda_u0: Option<f64>,
    pub tail_fraction: f64,
    pub g_linf: Option<f64>,
}

impl MonitorRow {
    /// max|u| + max|uₓ|.
    pub fn c1_proxy(&self) -> f64 {
        self.max_u.abs().max(self.min_u.abs()) + self.max_ux
    }
}

/// The weighted functional is only recorded while u(0) vanishes, which the
/// flow preserves for data with u(0) = uₓ(0) = 0.
pub fn sample_monitors(state: &EvolutionState, scenario: &Scenario) -> MonitorRow {
    let u = &state.u;
    let scale = u.max_abs();
    let wf = scenario
        .functional
        .as_ref()
        .filter(|_| u.values[0].abs() <= 1e-6 * scale.max(f64::MIN_POSITIVE))
        .map(|w| w.eval(u));
    let lambda_u0 = (scenario.alpha == 1.0).then(|| lambda_power(u, 1.0).values[0]);
    MonitorRow {
        t: state.t,
        mass: u.integral(),
        min_u: u.min(),
        max_u: u.max(),
        max_ux: u.derivative().max_abs(),
        weighted_functional: if scale == 0.0 { Some(0.0) } else { wf },
        lambda_u0,
        tail_fraction: tail_fraction(u),
        g_linf: state.g.as_ref().map(|g| g.max_abs()),
    }
}

#[derive(Debug, Clone)]
pub struct MonitorSeries {
    pub scenario: Option<Scenario>,
    pub rows: Vec<MonitorRow>,
    pub stop_reason: Option<StopReason>,
}

impl MonitorSeries {
    pub fn new(scenario: Scenario) -> Self {
        MonitorSeries { scenario: Some(scenario), rows: Vec::new(), stop_reason: None }
    }

    pub fn from_rows(rows: Vec<MonitorRow>, stop_reason: Option<StopReason>) -> Self {
        MonitorSeries { scenario: None, rows, stop_reason }
    }

    pub fn sample(&self, state: &EvolutionState) -> MonitorRow {
        let sc = self.scenario.as_ref().expect("series without a scenario cannot sample");
        sample_monitors(state, sc)
    }

    pub fn push(&mut self, row: MonitorRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, f: impl Fn(&MonitorRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Weighted functional, erroring if any sample lacks it.
    pub fn functional(&self) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                r.weighted_functional
                    .ok_or_else(|| LabError::InsufficientData(format!("no weighted functional at t = {}", r.t)))
            })
            .collect()
    }

    /// Samples before the one that triggered a resolution stop.
    pub fn resolved(&self) -> &[MonitorRow] {
        match self.stop_reason {
            Some(StopReason::ResolutionLoss) | Some(StopReason::NonFinite) if self.rows.len() > 1 => {
                &self.rows[..self.rows.len() - 1]
            }
            _ => &self.rows,
        }
    }

    pub const CSV_HEADER: &'static str = "t,mass,min_u,max_u,max_ux,weighted_functional,lambda_u0,tail_fraction,G_linf";

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_num(r.t),
                fmt_num(r.mass),
                fmt_num(r.min_u),
                fmt_num(r.max_u),
                fmt_num(r.max_ux),
                opt(r.weighted_functional),
                opt(r.lambda_u0),
                fmt_num(r.tail_fraction),
                opt(r.g_linf)
            )?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let bad = |m: String| LabError::InsufficientData(m);
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers().map_err(|e| bad(e.to_string()))?.iter().collect::<Vec<_>>().join(",");
        if header != Self::CSV_HEADER {
            return Err(bad(format!("unexpected CSV header {header:?}")));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let num = |j: usize| -> Result<Option<f64>> {
                let s = rec.get(j).unwrap_or("");
                if s.is_empty() {
                    return Ok(None);
                }
                s.parse().map(Some).map_err(|_| bad(format!("line {}: bad number {s:?}", i + 2)))
            };
            let req = |j: usize| num(j)?.ok_or_else(|| bad(format!("line {}: missing column {}", i + 2, j + 1)));
            rows.push(MonitorRow {
                t: req(0)?,
                mass: req(1)?,
                min_u: req(2)?,
                max_u: req(3)?,
                max_ux: req(4)?,
                weighted_functional: num(5)?,
                lambda_u0: num(6)?,
                tail_fraction: req(7)?,
                g_linf: num(8)?,
            });
        }
        Ok(MonitorSeries::from_rows(rows, None))
    }
}

/// Shortest round-trip text for a float; scientific notation outside [1e-4, 1e15).
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Three-point derivative on a nonuniform grid: centered inside, one-sided at the ends.
pub fn time_derivative(t: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    if n < 3 || y.len() != n {
        return Err(LabError::InsufficientData(format!("need at least 3 samples, got {n}")));
    }
    let d3 = |i0: usize, at: usize| {
        let (x0, x1, x2) = (t[i0], t[i0 + 1], t[i0 + 2]);
        let x = t[at];
        y[i0] * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y[i0 + 1] * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y[i0 + 2] * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    Ok((0..n)
        .map(|i| match i {
            0 => d3(0, 0),
            _ if i == n - 1 => d3(n - 3, n - 1),
            _ => d3(i - 1, i),
        })
        .collect())
}

/// dI/dt − (2+β)·blowup_const·I² per sample.
pub fn ode_inequality_residual(series: &MonitorSeries, beta: f64, constants: &Constants) -> Result<Vec<f64>> {
    let rows = series.resolved();
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let i = MonitorSeries::from_rows(rows.to_vec(), None).functional()?;
    let di = time_derivative(&t, &i)?;
    Ok(di.iter().zip(&i).map(|(d, i)| d - (2.0 + beta) * constants.blowup_const * i * i).collect())
}

/// dJ/dt − (C₁J² − C₂‖u₀‖J − C₃‖u₀‖²/α) per sample.
pub fn periodic_ode_check(
    series: &MonitorSeries,
    alpha: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    norm_u0: f64,
) -> Result<Vec<f64>> {
    let rows = series.resolved();
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let j = MonitorSeries::from_rows(rows.to_vec(), None).functional()?;
    let dj = time_derivative(&t, &j)?;
    Ok(dj
        .iter()
        .zip(&j)
        .map(|(d, j)| d - (c1 * j * j - c2 * norm_u0 * j - c3 * norm_u0 * norm_u0 / alpha))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub detected: bool,
    pub t_estimate: Option<f64>,
    pub growth_factor: f64,
    pub stop_reason: Option<StopReason>,
    pub ode_margin_min: Option<f64>,
}

pub const GROWTH_FACTOR: f64 = 10.0;
pub const FIT_R2: f64 = 0.99;
/// Fraction of the resolved time span used for the 1/max|uₓ| fit.
pub const FIT_WINDOW: f64 = 0.25;

/// Fit 1/max|uₓ| by a line over the tail of the resolved samples and
/// extrapolate its root.
pub fn blowup_fit(series: &MonitorSeries) -> BlowupReport {
    let rows = series.resolved();
    let stop_reason = series.stop_reason;
    let growth_factor = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if a.max_ux > 0.0 => b.max_ux / a.max_ux,
        _ => 1.0,
    };
    let t_estimate = fit_root(rows);
    let stopped_on_resolution = matches!(stop_reason, Some(StopReason::ResolutionLoss) | Some(StopReason::Threshold));
    BlowupReport {
        detected: stopped_on_resolution && growth_factor >= GROWTH_FACTOR,
        t_estimate,
        growth_factor,
        stop_reason,
        ode_margin_min: None,
    }
}

fn fit_root(rows: &[MonitorRow]) -> Option<f64> {
    let (t0, t1) = (rows.first()?.t, rows.last()?.t);
    let cut = t1 - FIT_WINDOW * (t1 - t0);
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.t >= cut && r.max_ux > 0.0).map(|r| (r.t, 1.0 / r.max_ux)).collect();
    if pts.len() < 5 {
        return None;
    }
    let (slope, icpt) = linear_fit(&pts);
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - icpt).powi(2)).sum();
    if ss_tot <= 0.0 || !(slope < 0.0) {
        return None;
    }
    let r2 = 1.0 - ss_res / ss_tot;
    (r2 >= FIT_R2).then(|| -icpt / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, Grid};
    use std::f64::consts::PI;

    fn torus_scenario(alpha: f64, n: usize) -> Scenario {
        Scenario::from_params(&Params { alpha, n_points: n, ..Params::default() }).unwrap()
    }

    #[test]
    fn row_of_one_minus_cos() {
        let g = Grid::torus(64);
        let s = EvolutionState::new(Field::from_fn(g, |x| 1.0 - x.cos()), None);
        let r = sample_monitors(&s, &torus_scenario(1.0, 64));
        assert!((r.mass - 2.0 * PI).abs() < 1e-12);
        assert!((r.max_ux - 1.0).abs() < 1e-12);
        assert!((r.lambda_u0.unwrap() + 1.0).abs() < 1e-12);
        // ∫₀^∞ u/x² = (π/2)·(−Λu(0)) for even u with u(0) = 0
        assert!((r.weighted_functional.unwrap() - PI / 2.0).abs() < 1e-10);
        let z = sample_monitors(&EvolutionState::new(Field::zeros(g), None), &torus_scenario(0.5, 64));
        assert_eq!((z.mass, z.max_ux, z.weighted_functional, z.tail_fraction), (0.0, 0.0, Some(0.0), 0.0));
    }

    #[test]
    fn derivative_stencil_is_exact_on_quadratics() {
        let t = [0.0, 0.1, 0.25, 0.3, 0.5];
        let y: Vec<f64> = t.iter().map(|t| 3.0 * t * t - t + 2.0).collect();
        for (d, t) in time_derivative(&t, &y).unwrap().iter().zip(t) {
            assert!((d - (6.0 * t - 1.0)).abs() < 1e-12);
        }
        assert!(time_derivative(&t[..2], &y[..2]).is_err());
    }

    #[test]
    fn fit_recovers_pole() {
        let rows: Vec<MonitorRow> = (0..100)
            .map(|i| {
                let t = 0.0096 * i as f64;
                MonitorRow { t, max_ux: 2.0 / (1.0 - t), ..Default::default() }
            })
            .collect();
        let rep = blowup_fit(&MonitorSeries::from_rows(rows, Some(StopReason::ResolutionLoss)));
        assert!((rep.t_estimate.unwrap() - 1.0).abs() < 1e-9);
        assert!(rep.detected);
        let flat: Vec<MonitorRow> = (0..50).map(|i| MonitorRow { t: i as f64, max_ux: 1.0, ..Default::default() }).collect();
        let rep = blowup_fit(&MonitorSeries::from_rows(flat, Some(StopReason::MaxTime)));
        assert!(!rep.detected && rep.t_estimate.is_none());
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            MonitorRow { t: 0.0, mass: 1.5, weighted_functional: Some(0.1), ..Default::default() },
            MonitorRow { t: 1e-3, mass: 1.0 / 3.0, lambda_u0: Some(-1.0), g_linf: Some(0.0), ..Default::default() },
        ];
        let s = MonitorSeries::from_rows(rows.clone(), None);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,mass,min_u,max_u,max_ux,weighted_functional,lambda_u0,tail_fraction,G_linf\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(",0.1,,0,"));
        assert_eq!(MonitorSeries::read_csv(&buf[..]).unwrap().rows, rows);
    }
}
