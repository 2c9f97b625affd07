use fraclab::error::LabError;
use fraclab::evolution::{
    evolve, evolve_observed, read_checkpoint, rhs_cht, rk4_step, velocity_from_g, write_checkpoint, EvolutionState,
    StepPolicy, StopReason,
};
use fraclab::field::{Domain, Field, Grid, Params, Parity, Setting};
use fraclab::inequalities::{random_trig_poly, WeightedFunctional};
use proptest::prelude::*;

fn torus(alpha: f64, n: usize) -> Params {
    Params { alpha, n_points: n, ..Params::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rhs_has_no_mean_mode(seed in any::<u64>(), degree in 1usize..16, alpha in 0.1..1.9f64, c in 0.0..3.0f64) {
        let u = random_trig_poly(Grid::torus(128), degree, seed);
        let u = u.add(&Field::from_fn(u.grid, |_| c));
        let r = rhs_cht(&u, alpha);
        prop_assert!(r.coeffs[0].norm() < 1e-12 * (1.0 + u.max_abs()).powi(2) * 128.0);
    }
}

#[test]
fn mass_is_conserved_and_evenness_kept() {
    let p = torus(0.6, 256);
    let u0 = Field::from_fn(p.grid(), |x| 2.0 * (1.0 - x.cos()) + 0.3 * (1.0 - (3.0 * x).cos()));
    let pol = StepPolicy { t_max: 0.2, ..StepPolicy::default() };
    let mut worst_parity: f64 = 0.0;
    let out = evolve_observed(&u0, None, &p, &pol, |s| worst_parity = worst_parity.max(s.u.parity_defect(Parity::Even)))
        .unwrap();
    let m0 = out.series.rows[0].mass;
    for r in &out.series.rows {
        assert!((r.mass - m0).abs() < 1e-12 * m0);
    }
    assert!(worst_parity < 1e-12, "parity defect {worst_parity}");
    assert_eq!(out.stop_reason, StopReason::MaxTime);
}

#[test]
fn zero_at_origin_and_positivity_persist() {
    let p = torus(0.5, 512);
    let u0 = Field::from_fn(p.grid(), |x| 3.0 * (1.0 - x.cos()));
    let pol = StepPolicy { t_max: 0.1, ..StepPolicy::default() };
    let mut worst_pin: f64 = 0.0;
    let mut worst_min: f64 = 0.0;
    evolve_observed(&u0, None, &p, &pol, |s| {
        worst_pin = worst_pin.max(s.u.eval(0.0).abs() / s.u.max_abs());
        worst_min = worst_min.min(s.u.min() / s.u.max_abs());
    })
    .unwrap();
    assert!(worst_pin < 1e-10, "u(0) drift {worst_pin}");
    assert!(worst_min > -1e-10, "negative dip {worst_min}");
}

#[test]
fn rk4_is_fourth_order() {
    let alpha = 0.7;
    let g = Grid::torus(64);
    let u0 = Field::from_fn(g, |x| 1.0 + 0.5 * x.cos() + 0.2 * (2.0 * x).sin());
    let run = |steps: usize| {
        let dt = 0.4 / steps as f64;
        let mut s = EvolutionState::new(u0.clone(), None);
        for _ in 0..steps {
            s = rk4_step(&s, alpha, dt).unwrap();
        }
        s.u
    };
    let reference = run(640);
    let e1 = run(10).sub(&reference).max_abs();
    let e2 = run(20).sub(&reference).max_abs();
    let e3 = run(40).sub(&reference).max_abs();
    let (o1, o2) = ((e1 / e2).log2(), (e2 / e3).log2());
    assert!(o1 > 3.5 && o2 > 3.5, "observed orders {o1:.2}, {o2:.2}");
}

#[test]
fn two_field_velocity_rejects_mean_of_g() {
    let g = Grid::torus(32);
    let u = Field::from_fn(g, |x| 1.0 - x.cos());
    let bad = Field::from_fn(g, |_| 0.1);
    assert!(matches!(velocity_from_g(&u, &bad, 0.5, 0.0), Err(LabError::NonzeroMean(_))));
    let v = velocity_from_g(&u, &Field::zeros(g), 0.5, 0.25).unwrap();
    assert!((v.mean() - 0.25).abs() < 1e-14);
}

#[test]
fn checkpoint_keeps_both_fields_and_rejects_other_versions() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(64, 10.0);
    let mut s = EvolutionState::new(Field::from_fn(g, |x| (-x * x).exp()), Some(Field::from_fn(g, |x| x.sin() * 0.1)));
    s.t = 0.375;
    s.v_mean = -1.5;
    let path = dir.path().join("s.ckpt");
    write_checkpoint(&path, &s).unwrap();
    let back = read_checkpoint(&path).unwrap();
    assert_eq!(back.t, s.t);
    assert_eq!(back.v_mean, s.v_mean);
    assert_eq!(back.u.coeffs, s.u.coeffs);
    assert_eq!(back.g.unwrap().coeffs, s.g.unwrap().coeffs);

    let mut bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"FLCK");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    bytes[4] = 9;
    std::fs::write(&path, &bytes).unwrap();
    assert!(read_checkpoint(&path).is_err());
    std::fs::write(&path, &bytes[..20]).unwrap();
    assert!(read_checkpoint(&path).is_err());
}

#[test]
fn weighted_functional_rate_matches_finite_difference() {
    // line, α = 1.5: dI/dt at t = 0 from the right-hand side vs a central difference in time
    let alpha = 1.5;
    let p = Params { alpha, n_points: 2048, domain: Domain::Line { half_width: 4.0 }, ..Params::default() };
    let bump = |x: f64| {
        let w = 1.0 - x * x;
        if w > 0.0 { x * x * w * w } else { 0.0 }
    };
    let u0 = Field::from_fn(p.grid(), bump);
    let wf = WeightedFunctional::new(p.grid(), 1.0 + alpha, Setting::Line).unwrap();
    let rate = wf.eval(&rhs_cht(&u0, alpha));
    let dt = 1e-4;
    let s = EvolutionState::new(u0, None);
    let fwd = wf.eval(&rk4_step(&s, alpha, dt).unwrap().u);
    let bwd = wf.eval(&rk4_step(&s, alpha, -dt).unwrap().u);
    let fd = (fwd - bwd) / (2.0 * dt);
    assert!(rate > 0.0);
    assert!((fd - rate).abs() < 1e-3 * rate.abs(), "fd {fd} vs rhs {rate}");
}

#[test]
fn boundary_guard_stops_line_runs_with_mass_at_the_edge() {
    let p = Params { alpha: 1.5, n_points: 256, domain: Domain::Line { half_width: 4.0 }, ..Params::default() };
    let u0 = Field::from_fn(p.grid(), |x| 1.0 - (std::f64::consts::PI * x / 4.0).cos());
    let out = evolve(&u0, None, &p, &StepPolicy { t_max: 1.0, ..StepPolicy::default() }).unwrap();
    assert_eq!(out.stop_reason, StopReason::BoundaryGuard);
}
