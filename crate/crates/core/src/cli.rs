//! Configuration-driven experiment runner behind the `fraclab` binary.
//!
//! A run is described by one JSON file. Every section is optional and
//! falls back to defaults, or to a named preset when `preset` is given;
//! keys written in the file override the preset.

use crate::error::{LabError, Result};
use crate::evolution::{evolve, write_checkpoint, RunOutcome, StepPolicy, StopReason};
use crate::field::{make_constants, validate_hypotheses, Domain, Field, Parity, Params, Setting};
use crate::inequalities::{
    alpha1_weighted_identity, c1_of_alpha, c1_with_profile, c2_c3_with, ccfi_ratio, cotlar_residual,
    first_bracket_integral, g0_positivity_scan, hurwitz_envelope, maincoro_check, random_trig_poly, A0Profile,
    BumpSum, InequalityReport,
};
use crate::mellin::{
    bump_profile, decay_certificate, eval_a0, eval_b0, log_grid, mellin_lemma_check, CertificateRecord,
    MultiplierKind, MultiplierTable,
};
use crate::monitor::{blowup_fit, ode_inequality_residual, periodic_ode_check, BlowupReport, MonitorSeries};
use crate::ops::{kernel_oracle, velocity, Which};
use crate::plot::LineChart;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Selftest,
    Mellin,
    Inequalities,
    Evolve,
    BlowupScan,
    Report,
}

impl Command {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "selftest" => Command::Selftest,
            "mellin" => Command::Mellin,
            "inequalities" => Command::Inequalities,
            "evolve" => Command::Evolve,
            "blowup-scan" => Command::BlowupScan,
            "report" => Command::Report,
            _ => return None,
        })
    }
}

/// Initial data, either a named profile or a cosine coefficient list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// A(1 − cos x).
    OneMinusCos { amplitude: f64 },
    /// m + cos x.
    MeanPlusCos { mean: f64 },
    /// A·x²·exp(−x²/w²), numerically compact on a wide window.
    LineGauss { amplitude: f64, width: f64 },
    /// A·x²(1 − x²)₊².
    LinePoly { amplitude: f64 },
    /// Σ a_k cos(kx).
    Cosine { coefficients: Vec<f64> },
    /// Seeded mean-zero trigonometric polynomial.
    RandomTrig { degree: usize },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::OneMinusCos { amplitude: 1.0 }
    }
}

impl InitialData {
    pub fn field(&self, params: &Params, seed: u64) -> Field {
        let g = params.grid();
        match self {
            InitialData::OneMinusCos { amplitude: a } => Field::from_fn(g, |x| a * (1.0 - x.cos())),
            InitialData::MeanPlusCos { mean } => Field::from_fn(g, |x| mean + x.cos()),
            InitialData::LineGauss { amplitude: a, width: w } => {
                Field::from_fn(g, |x| a * x * x * (-(x * x) / (w * w)).exp())
            }
            InitialData::LinePoly { amplitude: a } => {
                Field::from_fn(g, |x| if x.abs() < 1.0 { a * x * x * (1.0 - x * x).powi(2) } else { 0.0 })
            }
            InitialData::Cosine { coefficients } => Field::from_fn(g, |x| {
                coefficients.iter().enumerate().map(|(k, a)| a * (k as f64 * x).cos()).sum()
            }),
            InitialData::RandomTrig { degree } => return random_trig_poly(g, *degree, seed),
        }
        .with_parity(Parity::Even)
    }

    /// Same profile with its amplitude replaced.
    fn with_amplitude(&self, amp: f64) -> Self {
        match self {
            InitialData::OneMinusCos { .. } => InitialData::OneMinusCos { amplitude: amp },
            InitialData::LineGauss { width, .. } => InitialData::LineGauss { amplitude: amp, width: *width },
            InitialData::LinePoly { .. } => InitialData::LinePoly { amplitude: amp },
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    pub alphas: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep { alphas: vec![0.3, 0.5, 0.7], amplitudes: vec![1.0, 2.0, 5.0, 10.0, 20.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MellinConfig {
    pub alphas: Vec<f64>,
    /// Points per side of the symmetric log grid on |λ| ∈ [5, 200].
    pub n_lambda: usize,
    /// ε used for the tables of A.
    pub a_epsilon: f64,
    /// Points of the uniform sign grid on [−50, 50].
    pub n_sign: usize,
    pub lemma: bool,
    pub lemma_beta: f64,
    pub lemma_eps: Vec<f64>,
}

impl Default for MellinConfig {
    fn default() -> Self {
        MellinConfig {
            alphas: vec![0.3, 0.5, 0.7],
            n_lambda: 48,
            a_epsilon: 0.05,
            n_sign: 41,
            lemma: true,
            lemma_beta: 0.5,
            lemma_eps: vec![1e-1, 1e-2, 1e-3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalityConfig {
    pub betas: Vec<f64>,
    pub family_size: usize,
    pub alphas: Vec<f64>,
    /// ε in the Hurwitz envelope used for C₂ and C₃.
    pub envelope_eps: f64,
    pub ccfi_delta: f64,
}

impl Default for InequalityConfig {
    fn default() -> Self {
        InequalityConfig {
            betas: vec![0.25, 0.5, 0.75],
            family_size: 20,
            alphas: vec![0.3, 0.5, 0.7],
            envelope_eps: 0.25,
            ccfi_delta: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    /// Directory scanned for CSV/JSON artifacts; defaults to the output directory.
    pub input_dir: Option<PathBuf>,
    pub log_scale: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { input_dir: None, log_scale: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub params: Params,
    pub policy: StepPolicy,
    pub initial_data: InitialData,
    /// Run the two-field system with G₀ = 0.
    pub two_field: bool,
    pub seed: u64,
    pub sweep: Sweep,
    pub output_dir: Option<PathBuf>,
    pub mellin: MellinConfig,
    pub inequalities: InequalityConfig,
    pub report: ReportConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: None,
            params: Params::default(),
            policy: StepPolicy::default(),
            initial_data: InitialData::default(),
            two_field: false,
            seed: 0,
            sweep: Sweep::default(),
            output_dir: None,
            mellin: MellinConfig::default(),
            inequalities: InequalityConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

pub const PRESETS: [&str; 4] = ["line-beta", "periodic-alpha", "riccati", "positive-control"];

/// Scenario presets: line β = 0.5, periodic α = 0.5 with large H4 data,
/// the α = 1 Riccati run and the positive-density control.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let base = ExperimentConfig::default();
    Some(match name {
        "line-beta" => ExperimentConfig {
            params: Params { alpha: 1.5, n_points: 2048, domain: Domain::Line { half_width: 8.0 }, ..Params::default() },
            policy: StepPolicy { t_max: 2.0, ..StepPolicy::default() },
            initial_data: InitialData::LineGauss { amplitude: 1.0, width: 0.5 },
            ..base
        },
        "periodic-alpha" => ExperimentConfig {
            params: Params { alpha: 0.5, n_points: 4096, ..Params::default() },
            policy: StepPolicy { t_max: 1.0, pin_tol: Some(1e-6), ..StepPolicy::default() },
            initial_data: InitialData::OneMinusCos { amplitude: 10.0 },
            ..base
        },
        "riccati" => ExperimentConfig {
            params: Params { alpha: 1.0, n_points: 1024, ..Params::default() },
            policy: StepPolicy { t_max: 2.0, ..StepPolicy::default() },
            initial_data: InitialData::OneMinusCos { amplitude: 1.0 },
            ..base
        },
        "positive-control" => ExperimentConfig {
            params: Params { alpha: 0.5, n_points: 1024, ..Params::default() },
            policy: StepPolicy { t_max: 5.0, ..StepPolicy::default() },
            initial_data: InitialData::MeanPlusCos { mean: 2.0 },
            ..base
        },
        _ => return None,
    })
}

/// Why a configuration was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey { key: String, line: usize, column: usize },
    Invalid { message: String, line: usize, column: usize },
    UnknownPreset(String),
    Io(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey { key, line, column } => {
                write!(f, "config line {line}, column {column}: unknown key `{key}`")
            }
            ConfigError::Invalid { message, line, column } => write!(f, "config line {line}, column {column}: {message}"),
            ConfigError::UnknownPreset(p) => write!(f, "unknown preset `{p}` (known: {})", PRESETS.join(", ")),
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
        }
    }
}

fn classify(e: serde_json::Error) -> ConfigError {
    let (line, column) = (e.line(), e.column());
    let msg = e.to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some(end) = rest.find('`') {
            return ConfigError::UnknownKey { key: rest[..end].to_string(), line, column };
        }
    }
    let message = msg.split(" at line ").next().unwrap_or(&msg).to_string();
    ConfigError::Invalid { message, line, column }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    // tagged enums are replaced wholesale
                    Some(slot) if slot.is_object() && v.is_object() && v.get("kind").is_none() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Parse a configuration text; keys present override the chosen preset.
pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, ConfigError> {
    let own: ExperimentConfig = serde_json::from_str(text).map_err(classify)?;
    let Some(name) = own.preset.clone() else {
        return Ok(own);
    };
    let base = preset(&name).ok_or(ConfigError::UnknownPreset(name.clone()))?;
    let mut merged = serde_json::to_value(&base).expect("config serializes");
    merge(&mut merged, serde_json::from_str(text).map_err(classify)?);
    let mut cfg: ExperimentConfig = serde_json::from_value(merged).map_err(classify)?;
    cfg.preset = Some(name);
    Ok(cfg)
}

pub fn load_config(path: &Path) -> std::result::Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

// ---------------------------------------------------------------------------
// Check bookkeeping

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn add(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    /// Record an error as a failed check.
    pub fn add_result<T>(&mut self, name: &str, r: Result<T>, f: impl FnOnce(&T) -> (bool, String)) -> Option<T> {
        match r {
            Ok(v) => {
                let (pass, detail) = f(&v);
                self.add(name, pass, detail);
                Some(v)
            }
            Err(e) => {
                self.add(name, false, format!("error: {e}"));
                None
            }
        }
    }

    pub fn all_pass(&self) -> bool {
        self.0.iter().all(|c| c.pass)
    }
}

pub struct Outcome {
    pub checks: Checks,
    pub files: Vec<PathBuf>,
    /// One-line summary for the terminal.
    pub note: Option<String>,
}

fn write_json(dir: &Path, name: &str, v: &impl Serialize, files: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    let text = serde_json::to_string_pretty(v).map_err(|e| LabError::Checkpoint(e.to_string()))?;
    std::fs::write(&p, text + "\n").map_err(|e| LabError::Checkpoint(format!("{}: {e}", p.display())))?;
    files.push(p);
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| LabError::Checkpoint(format!("{}: {e}", p.display())))?;
    files.push(p);
    Ok(())
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(out).map_err(|e| LabError::Checkpoint(format!("{}: {e}", out.display())))?;
    match cmd {
        Command::Selftest => selftest(out),
        Command::Mellin => mellin_cmd(cfg, out),
        Command::Inequalities => inequalities_cmd(cfg, out),
        Command::Evolve => evolve_cmd(cfg, out),
        Command::BlowupScan => scan_cmd(cfg, out),
        Command::Report => report_cmd(cfg, out),
    }
}

// ---------------------------------------------------------------------------
// selftest

fn selftest(out: &Path) -> Result<Outcome> {
    let mut ck = Checks::default();
    let g = crate::field::Grid::torus(256);
    let u = Field::from_fn(g, |x| 1.0 - x.cos());
    let v = velocity(&u, 0.5);
    let worst = (0..8)
        .map(|j| {
            let x = 0.1 + 0.7 * j as f64;
            let o = kernel_oracle(&u, 0.5, x, Which::LambdaHilbert)?;
            Ok((v.eval(x) - o).abs() / v.max_abs())
        })
        .collect::<Result<Vec<f64>>>()
        .map(|e| e.into_iter().fold(0.0, f64::max));
    ck.add_result("velocity vs kernel oracle", worst, |e| (*e <= 1e-4, format!("max rel err {e:.2e}")));

    let res = (0..5).map(|s| cotlar_residual(&random_trig_poly(g, 12, s)).0).fold(0.0, f64::max);
    ck.add("cotlar identity", res <= 1e-10, format!("residual {res:.2e}"));

    let poly = BumpSum::single(1, 2, 1.0);
    ck.add_result("alpha=1 weighted identity", alpha1_weighted_identity(&poly), |r| {
        (r.pass, format!("lhs {:.10} rhs {:.10}", r.lhs, r.rhs))
    });

    let fi = first_bracket_integral(0.5);
    let exact = 2f64.powf(0.5) / -0.5;
    ck.add("closed-form bracket integral", (fi - exact).abs() <= 1e-8, format!("{fi:.12} vs {exact:.12}"));

    let signs: Result<(f64, f64)> = (|| {
        let mut b = f64::INFINITY;
        let mut a = f64::NEG_INFINITY;
        for l in [-20.0, -1.0, 0.0, 0.5, 3.0, 40.0] {
            b = b.min(eval_b0(l, 0.5)?);
            a = a.max(eval_a0(l, 0.5)?);
        }
        Ok((b, a))
    })();
    ck.add_result("multiplier signs", signs, |(b, a)| (*b >= -1e-8 && *a <= 1e-8, format!("min B0 {b:.3e}, max A0 {a:.3e}")));

    ck.add_result("C1 dual route", c1_of_alpha(0.5), |r| (r.c1 > 0.0, format!("C1 {:.6}", r.c1)));

    let p = Params { alpha: 1.0, n_points: 256, ..Params::default() };
    let u0 = InitialData::OneMinusCos { amplitude: 1.0 }.field(&p, 0);
    let pol = StepPolicy { t_max: 0.5, ..StepPolicy::default() };
    ck.add_result("riccati short run", evolve(&u0, None, &p, &pol), |o| {
        let err = o
            .series
            .rows
            .iter()
            .map(|r| {
                let ex = -1.0 / (1.0 - r.t);
                ((r.lambda_u0.unwrap_or(f64::NAN) - ex) / ex).abs()
            })
            .fold(0.0, f64::max);
        (err <= 1e-3, format!("max rel deviation {err:.2e}"))
    });

    let ss = crate::evolution::selfsim_profile_check(1.0, 1.0);
    ck.add_result("self-similar profile", ss, |r| {
        (r.linear_pass && r.holder_pass, format!("fit residual {:.2e}, exponent {:.3}", r.fit_residual, r.holder_exponent))
    });

    let mut files = Vec::new();
    write_json(out, "selftest.json", &ck.0, &mut files)?;
    Ok(Outcome { checks: ck, files, note: None })
}

// ---------------------------------------------------------------------------
// mellin

fn mellin_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mc = &cfg.mellin;
    let mut ck = Checks::default();
    let mut files = Vec::new();
    let mut certs: Vec<CertificateRecord> = Vec::new();
    let grid = log_grid(5.0, 200.0, mc.n_lambda);
    let sign_grid: Vec<f64> =
        (0..mc.n_sign).map(|i| -50.0 + 100.0 * i as f64 / (mc.n_sign - 1).max(1) as f64).collect();
    for &alpha in &mc.alphas {
        let a0 = MultiplierTable::build(MultiplierKind::A0, &grid, 0.0, alpha)?;
        write_json(out, &format!("table_A0_alpha{alpha}.json"), &a0, &mut files)?;
        if let Some(c) = ck.add_result(&format!("A0 decay alpha={alpha}"), decay_certificate(&a0, alpha - 2.0), |c| {
            (c.pass, format!("exponent {:.4} (bound {:.2})", c.exponent_fit, alpha - 2.0))
        }) {
            certs.push(c.record(&format!("A0 alpha={alpha}"), &grid));
        }
        let a = MultiplierTable::build(MultiplierKind::A, &grid, mc.a_epsilon, alpha)?;
        write_json(out, &format!("table_A_alpha{alpha}.json"), &a, &mut files)?;
        for (part, tab, expected) in [("Re A", a.real_part(), alpha - 2.0), ("Im A", a.imag_part(), alpha - 1.0)] {
            if let Some(c) = ck.add_result(&format!("{part} decay alpha={alpha}"), decay_certificate(&tab, expected), |c| {
                (c.pass, format!("exponent {:.4} (bound {:.2})", c.exponent_fit, expected))
            }) {
                certs.push(c.record(&format!("{part} alpha={alpha} eps={}", mc.a_epsilon), &grid));
            }
        }
        let b0 = MultiplierTable::build(MultiplierKind::B0, &sign_grid, 0.0, alpha)?;
        let a0s = MultiplierTable::build(MultiplierKind::A0, &sign_grid, 0.0, alpha)?;
        let min_b = b0.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let max_a = a0s.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        ck.add(format!("B0 >= 0 at beta={alpha}"), min_b >= -1e-8, format!("min {min_b:.3e}"));
        ck.add(format!("A0 <= 0 at alpha={alpha}"), max_a <= 1e-8, format!("max {max_a:.3e}"));
        write_json(out, &format!("table_B0_beta{alpha}.json"), &b0, &mut files)?;
    }
    write_json(out, "certificates.json", &certs, &mut files)?;
    if mc.lemma {
        let rep = mellin_lemma_check(&bump_profile(), mc.lemma_beta, &mc.lemma_eps);
        if let Some(r) = ck.add_result("epsilon-limit identity", rep, |r| {
            (r.pass, format!("errors {:?}, rhs {:.10}", r.errors, r.rhs))
        }) {
            write_json(out, "lemma.json", &r, &mut files)?;
        }
    }
    Ok(Outcome { checks: ck, files, note: None })
}

// ---------------------------------------------------------------------------
// inequalities

#[derive(Serialize)]
struct NamedReport {
    name: String,
    #[serde(flatten)]
    report: InequalityReport,
}

#[derive(Serialize)]
struct ConstantRow {
    alpha: f64,
    c1: f64,
    c1_closed: f64,
    c1_integral: f64,
    c2: f64,
    c3: f64,
}

fn inequalities_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let ic = &cfg.inequalities;
    let mut ck = Checks::default();
    let mut files = Vec::new();
    let mut reports = Vec::new();
    let family = BumpSum::family(cfg.seed, ic.family_size);
    for &beta in &ic.betas {
        let rs = family.par_iter().map(|u| maincoro_check(u, beta, 1e-8)).collect::<Result<Vec<_>>>();
        if let Some(rs) = ck.add_result(&format!("corollary family beta={beta}"), rs, |rs| {
            let m = rs.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
            (rs.iter().all(|r| r.pass), format!("min margin {m:.4e}"))
        }) {
            for (i, r) in rs.into_iter().enumerate() {
                reports.push(NamedReport { name: format!("corollary beta={beta} member={i}"), report: r });
            }
        }
    }
    let poly = BumpSum::single(1, 2, 1.0);
    if let Some(r) = ck.add_result("alpha=1 weighted identity", alpha1_weighted_identity(&poly), |r| {
        (r.pass, format!("margin {:.3e}", r.margin))
    }) {
        reports.push(NamedReport { name: "alpha=1 identity".into(), report: r });
    }
    ck.add_result("CCF-type ratio", ccfi_ratio(&poly, ic.ccfi_delta, 1e-10), |r| {
        (r.lhs_nonnegative, format!("lhs {:.6}, ratio {:?}", r.lhs, r.ratio))
    });
    let xs: Vec<f64> = (1..50).map(|i| i as f64 / 50.0).collect();
    let ss: Vec<f64> = (1..50).map(|i| -1.0 + 2.0 * i as f64 / 50.0).collect();
    for &beta in &ic.betas {
        let s = g0_positivity_scan(beta, &xs, &ss, 1e-10);
        ck.add(format!("kernel positivity beta={beta}"), s.pass, format!("min d_s f {:.3e}", s.min_ds_f));
    }
    let mut rows = Vec::new();
    for &alpha in &ic.alphas {
        let a0 = match A0Profile::compute(alpha) {
            Ok(a) => a,
            Err(e) => {
                ck.add(format!("A0 profile alpha={alpha}"), false, e.to_string());
                continue;
            }
        };
        let Some(c1) = ck.add_result(&format!("C1 alpha={alpha}"), c1_with_profile(&a0), |r| {
            (r.c1 > 0.0, format!("C1 {:.6} (routes {:.8} / {:.8})", r.c1, r.bracket_closed, r.bracket_integral))
        }) else {
            continue;
        };
        let (c, c_eps) = hurwitz_envelope(alpha, ic.envelope_eps);
        let cc = c2_c3_with(&a0, ic.envelope_eps, c, c_eps);
        ck.add(
            format!("C2, C3 finite alpha={alpha}"),
            cc.c2.is_finite() && cc.c3.is_finite() && cc.c2 > 0.0 && cc.c3 > 0.0,
            format!("C2 {:.4}, C3 {:.4}", cc.c2, cc.c3),
        );
        rows.push(ConstantRow {
            alpha,
            c1: c1.c1,
            c1_closed: c1.bracket_closed,
            c1_integral: c1.bracket_integral,
            c2: cc.c2,
            c3: cc.c3,
        });
    }
    write_json(out, "inequalities.json", &reports, &mut files)?;
    write_json(out, "constants.json", &rows, &mut files)?;
    Ok(Outcome { checks: ck, files, note: None })
}

// ---------------------------------------------------------------------------
// evolve

fn setting_of(p: &Params) -> Setting {
    match p.domain {
        Domain::Torus => Setting::Torus,
        Domain::Line { .. } => Setting::Line,
    }
}

struct Run {
    outcome: RunOutcome,
    report: BlowupReport,
    checks: Checks,
}

/// One evolution with its consistency checks. `quiet` suppresses the
/// per-check lines (used inside sweeps).
fn run_one(cfg: &ExperimentConfig, quiet: bool) -> Result<Run> {
    let p = &cfg.params;
    p.validate()?;
    let u0 = cfg.initial_data.field(p, cfg.seed);
    let g0 = cfg.two_field.then(|| Field::zeros(p.grid()));
    let outcome = evolve(&u0, g0.as_ref(), p, &cfg.policy)?;
    let mut checks = Checks::default();
    let mut add = |name: &str, pass: bool, detail: String| {
        if quiet {
            checks.0.push(Check { name: name.into(), pass, detail });
        } else {
            checks.add(name, pass, detail);
        }
    };
    add("run completed", !outcome.aborted, format!("stop {}", outcome.stop_reason.as_str()));
    let m0 = outcome.series.rows[0].mass;
    let drift = outcome.series.rows.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    let scale = m0.abs().max(u0.max_abs() * p.domain.period() * 1e-3);
    add("mass conservation", drift <= 1e-8 * scale, format!("max drift {drift:.3e}"));
    if cfg.two_field {
        let gmax = outcome.series.rows.iter().filter_map(|r| r.g_linf).fold(0.0, f64::max);
        add("G stays zero", gmax <= 1e-8, format!("max |G| {gmax:.3e}"));
    }
    let mut report = blowup_fit(&outcome.series);
    let hyp = validate_hypotheses(&u0, setting_of(p), 1e-8);
    let admissible = hyp.h2 && hyp.h3 && u0.max_abs() > 0.0;
    let functional = MonitorSeries::from_rows(outcome.series.resolved().to_vec(), None).functional();
    if admissible && functional.is_ok() && outcome.series.resolved().len() >= 3 {
        let j = functional.unwrap_or_default();
        let margins = match p.domain {
            Domain::Line { .. } if p.alpha > 1.0 => {
                let beta = p.beta();
                Some(ode_inequality_residual(&outcome.series, beta, &make_constants(p.alpha)?)?)
            }
            Domain::Torus if p.alpha < 1.0 => {
                let a0 = A0Profile::compute(p.alpha)?;
                let c1 = c1_with_profile(&a0)?;
                let (c, c_eps) = hurwitz_envelope(p.alpha, cfg.inequalities.envelope_eps);
                let cc = c2_c3_with(&a0, cfg.inequalities.envelope_eps, c, c_eps);
                Some(periodic_ode_check(&outcome.series, p.alpha, c1.c1, cc.c2, cc.c3, u0.max_abs())?)
            }
            _ => None,
        };
        if let Some(m) = margins {
            let rel = m.iter().zip(&j).map(|(m, j)| m / (j * j).max(f64::MIN_POSITIVE)).fold(f64::INFINITY, f64::min);
            let tol = if p.alpha > 1.0 { 1e-6 } else { 1e-3 };
            report.ode_margin_min = m.iter().copied().reduce(f64::min);
            add("differential inequality", rel >= -tol, format!("min margin / functional² {rel:.3e}"));
        }
    }
    Ok(Run { outcome, report, checks })
}

fn evolve_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let run = run_one(cfg, false)?;
    let mut files = Vec::new();
    let mut csv = Vec::new();
    run.outcome.series.write_csv(&mut csv).map_err(|e| LabError::Checkpoint(e.to_string()))?;
    write_text(out, "monitors.csv", &String::from_utf8_lossy(&csv), &mut files)?;
    write_json(out, "blowup.json", &run.report, &mut files)?;
    let ck = out.join("final.ckpt");
    write_checkpoint(&ck, &run.outcome.state)?;
    files.push(ck);
    let estimate = match (run.report.detected, run.report.t_estimate) {
        (true, Some(t)) => format!(", blow-up time estimate {t:.4}"),
        _ => String::new(),
    };
    let note = format!(
        "stopped at t = {} ({}) after {} steps, max|u_x| grew {:.3}x{estimate}",
        run.outcome.state.t,
        run.outcome.stop_reason.as_str(),
        run.outcome.steps,
        run.report.growth_factor,
    );
    Ok(Outcome { checks: run.checks, files, note: Some(note) })
}

// ---------------------------------------------------------------------------
// blowup-scan

#[derive(Serialize)]
struct ScanRow {
    alpha: f64,
    amplitude: f64,
    t_final: f64,
    stop_reason: StopReason,
    growth_factor: f64,
    detected: bool,
    t_estimate: Option<f64>,
    checks_pass: bool,
}

pub fn cell_name(alpha: f64, amplitude: f64) -> String {
    format!("cell_alpha{alpha}_amp{amplitude}")
}

fn scan_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let cells: Vec<(f64, f64)> =
        cfg.sweep.alphas.iter().flat_map(|&a| cfg.sweep.amplitudes.iter().map(move |&m| (a, m))).collect();
    if cells.is_empty() {
        return Err(LabError::ParameterRange("sweep grids must be non-empty".into()));
    }
    let results: Vec<Result<(ScanRow, Vec<PathBuf>)>> = cells
        .par_iter()
        .map(|&(alpha, amp)| {
            let mut c = cfg.clone();
            c.params.alpha = alpha;
            c.initial_data = cfg.initial_data.with_amplitude(amp);
            let run = run_one(&c, true)?;
            let name = cell_name(alpha, amp);
            let mut files = Vec::new();
            let mut csv = Vec::new();
            run.outcome.series.write_csv(&mut csv).map_err(|e| LabError::Checkpoint(e.to_string()))?;
            write_text(out, &format!("{name}.csv"), &String::from_utf8_lossy(&csv), &mut files)?;
            write_json(out, &format!("{name}.json"), &run.report, &mut files)?;
            Ok((
                ScanRow {
                    alpha,
                    amplitude: amp,
                    t_final: run.outcome.state.t,
                    stop_reason: run.outcome.stop_reason,
                    growth_factor: run.report.growth_factor,
                    detected: run.report.detected,
                    t_estimate: run.report.t_estimate,
                    checks_pass: run.checks.all_pass(),
                },
                files,
            ))
        })
        .collect();
    let mut ck = Checks::default();
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for ((alpha, amp), r) in cells.iter().zip(results) {
        match r {
            Ok((row, f)) => {
                files.extend(f);
                rows.push(row);
            }
            Err(e) => ck.add(format!("cell alpha={alpha} amp={amp}"), false, e.to_string()),
        }
    }
    let mut table = String::from("| alpha | amplitude | t_final | stop | growth | detected | T estimate | checks |\n");
    table.push_str("|---|---|---|---|---|---|---|---|\n");
    let mut summary = String::from("alpha,amplitude,t_final,stop_reason,growth_factor,detected,t_estimate,checks_pass\n");
    for r in &rows {
        let te = r.t_estimate.map(|t| format!("{t:.4}")).unwrap_or_default();
        table.push_str(&format!(
            "| {} | {} | {:.4} | {} | {:.3} | {} | {} | {} |\n",
            r.alpha,
            r.amplitude,
            r.t_final,
            r.stop_reason.as_str(),
            r.growth_factor,
            r.detected,
            if te.is_empty() { "-" } else { &te },
            if r.checks_pass { "pass" } else { "FAIL" }
        ));
        summary.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.alpha,
            r.amplitude,
            r.t_final,
            r.stop_reason.as_str(),
            r.growth_factor,
            r.detected,
            r.t_estimate.map(|t| t.to_string()).unwrap_or_default(),
            r.checks_pass
        ));
        ck.add(format!("cell alpha={} amp={}", r.alpha, r.amplitude), r.checks_pass, r.stop_reason.as_str());
    }
    print!("{table}");
    write_text(out, "summary.md", &table, &mut files)?;
    write_text(out, "summary.csv", &summary, &mut files)?;
    Ok(Outcome { checks: ck, files, note: None })
}

// ---------------------------------------------------------------------------
// report

fn chart_series(series: &MonitorSeries, log: bool, name: &str) -> Vec<(String, String)> {
    let t = series.times();
    let col = |f: &dyn Fn(&crate::monitor::MonitorRow) -> Option<f64>| -> Vec<(f64, f64)> {
        series.rows.iter().zip(&t).filter_map(|(r, &t)| f(r).map(|v| (t, v))).collect()
    };
    let mut out = Vec::new();
    let mut push = |file: &str, title: &str, y: &str, log_y: bool, s: Vec<(String, Vec<(f64, f64)>)>| {
        if s.iter().any(|s| !s.1.is_empty()) {
            let c = LineChart {
                title: format!("{name}: {title}"),
                x_label: "t".into(),
                y_label: y.into(),
                log_y,
                series: s,
                ..Default::default()
            };
            out.push((format!("{name}_{file}.svg"), c.render()));
        }
    };
    push("max_ux", "max |u_x|", "max |u_x|", log, vec![("max |u_x|".into(), col(&|r| Some(r.max_ux)))]);
    push(
        "functional",
        "weighted functional",
        "integral of u / x^(1+alpha)",
        log,
        vec![("functional".into(), col(&|r| r.weighted_functional))],
    );
    push("lambda_u0", "Lambda u(0,t)", "Lambda u(0,t)", false, vec![("Lambda u(0,t)".into(), col(&|r| r.lambda_u0))]);
    push(
        "extrema",
        "extrema and mass",
        "value",
        false,
        vec![
            ("min u".into(), col(&|r| Some(r.min_u))),
            ("max u".into(), col(&|r| Some(r.max_u))),
            ("mass".into(), col(&|r| Some(r.mass))),
        ],
    );
    push("tail", "spectral tail fraction", "fraction", true, vec![("tail".into(), col(&|r| Some(r.tail_fraction)))]);
    out
}

fn table_chart(t: &MultiplierTable, name: &str, log: bool) -> (String, String) {
    let pos = |f: &dyn Fn(num_complex::Complex64) -> f64| -> Vec<(f64, f64)> {
        t.lambda_grid.iter().zip(&t.values).filter(|(l, _)| **l > 0.0).map(|(l, v)| (*l, f(*v))).collect()
    };
    let all = |f: &dyn Fn(num_complex::Complex64) -> f64| -> Vec<(f64, f64)> {
        t.lambda_grid.iter().zip(&t.values).map(|(l, v)| (*l, f(*v))).collect()
    };
    let has_neg = t.lambda_grid.iter().any(|l| *l < 0.0);
    let log_axes = log && !(has_neg && t.lambda_grid.iter().all(|l| l.abs() <= 50.0));
    let series = if log_axes {
        vec![("|value|".into(), pos(&|z| z.norm())), ("|Re|".into(), pos(&|z| z.re.abs())), ("|Im|".into(), pos(&|z| z.im.abs()))]
    } else {
        vec![("Re".into(), all(&|z| z.re)), ("Im".into(), all(&|z| z.im))]
    };
    let c = LineChart {
        title: format!("{:?} multiplier, exponent {}", t.kind, t.exponent),
        x_label: "lambda".into(),
        y_label: "value".into(),
        log_x: log_axes,
        log_y: log_axes,
        series,
    };
    (format!("{name}.svg"), c.render())
}

fn report_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let input = cfg.report.input_dir.clone().unwrap_or_else(|| out.to_path_buf());
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&input)
        .map_err(|e| LabError::Checkpoint(format!("{}: {e}", input.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    let mut ck = Checks::default();
    let mut files = Vec::new();
    let mut read = 0;
    for path in entries {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("x").to_string();
        let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("");
        let text = match ext {
            "csv" | "json" => std::fs::read_to_string(&path).map_err(|e| LabError::Checkpoint(e.to_string()))?,
            _ => continue,
        };
        if ext == "csv" {
            if !text.starts_with(MonitorSeries::CSV_HEADER) {
                continue;
            }
            match MonitorSeries::read_csv(text.as_bytes()) {
                Ok(s) => {
                    for (name, svg) in chart_series(&s, cfg.report.log_scale, &stem) {
                        write_text(out, &name, &svg, &mut files)?;
                    }
                    read += 1;
                }
                Err(e) => ck.add(format!("read {}", path.display()), false, e.to_string()),
            }
            continue;
        }
        let v: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                ck.add(format!("read {}", path.display()), false, e.to_string());
                continue;
            }
        };
        if v.get("lambda_grid").is_some() {
            match serde_json::from_value::<MultiplierTable>(v) {
                Ok(t) => {
                    let (name, svg) = table_chart(&t, &stem, cfg.report.log_scale);
                    write_text(out, &name, &svg, &mut files)?;
                    read += 1;
                }
                Err(e) => ck.add(format!("read {}", path.display()), false, e.to_string()),
            }
        } else if v.get("growth_factor").is_some() {
            match serde_json::from_value::<BlowupReport>(v) {
                Ok(_) => read += 1,
                Err(e) => ck.add(format!("read {}", path.display()), false, e.to_string()),
            }
        } else {
            read += 1;
        }
    }
    ck.add("artifacts read", read > 0, format!("{read} artifacts from {}", input.display()));
    Ok(Outcome { checks: ck, files, note: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let e = parse_config("{\n  \"params\": {\n    \"alpah\": 0.5\n  }\n}").unwrap_err();
        match e {
            ConfigError::UnknownKey { key, line, .. } => {
                assert_eq!(key, "alpah");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("{\"bogus\": 1}"), Err(ConfigError::UnknownKey { .. })));
    }

    #[test]
    fn invalid_values_report_lines() {
        let e = parse_config("{\n\"seed\": \"x\"\n}").unwrap_err();
        assert!(matches!(e, ConfigError::Invalid { line: 2, .. }), "{e:?}");
        assert!(e.to_string().starts_with("config line 2"));
    }

    #[test]
    fn presets_merge_with_overrides() {
        let c = parse_config(r#"{"preset": "riccati", "params": {"n_points": 256}}"#).unwrap();
        assert_eq!(c.params.alpha, 1.0);
        assert_eq!(c.params.n_points, 256);
        assert_eq!(c.policy.t_max, 2.0);
        let c = parse_config(r#"{"preset": "line-beta", "initial_data": {"kind": "line_poly", "amplitude": 2}}"#).unwrap();
        assert_eq!(c.initial_data, InitialData::LinePoly { amplitude: 2.0 });
        assert!(matches!(parse_config(r#"{"preset": "nope"}"#), Err(ConfigError::UnknownPreset(_))));
        for p in PRESETS {
            assert!(preset(p).unwrap().params.validate().is_ok());
        }
    }
}
