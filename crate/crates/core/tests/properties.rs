use fraclab::field::{Field, Grid, Setting};
use fraclab::inequalities::{
    cotlar_residual, maincoro_check, random_trig_poly, weighted_functional_quadrature, BumpSum, WeightedFunctional,
};
use fraclab::ops::{hilbert, lambda_power, velocity};
use proptest::prelude::*;

fn trig(coeffs: &[(f64, f64)]) -> impl Fn(f64) -> f64 + '_ {
    move |x| coeffs.iter().enumerate().map(|(k, (a, b))| a * ((k + 1) as f64 * x).cos() + b * ((k + 1) as f64 * x).sin()).sum()
}

fn coeff_vec() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn velocity_of_a_single_mode(k in 1usize..40, alpha in 0.05..1.95f64, phase in 0.0..6.3f64) {
        let g = Grid::torus(128);
        let u = Field::from_fn(g, |x| (k as f64 * x + phase).cos());
        let v = velocity(&u, alpha);
        // H cos = sin, Λ^{α−1} multiplies mode k by k^{α−1}
        let amp = (k as f64).powf(alpha - 1.0);
        for (j, x) in g.nodes().into_iter().enumerate() {
            prop_assert!((v.values[j] - amp * (k as f64 * x + phase).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_is_linear(a in coeff_vec(), b in coeff_vec(), s in -3.0..3.0f64, alpha in 0.1..1.9f64) {
        let g = Grid::torus(64);
        let u = Field::from_fn(g, trig(&a));
        let w = Field::from_fn(g, trig(&b));
        let lhs = velocity(&u.scale(s).add(&w), alpha);
        let rhs = velocity(&u, alpha).scale(s).add(&velocity(&w, alpha));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12 * (1.0 + s.abs()) * 12.0);
    }

    #[test]
    fn hilbert_squared_is_minus_identity_off_the_mean(a in coeff_vec(), c in -2.0..2.0f64) {
        let g = Grid::torus(64);
        let u = Field::from_fn(g, |x| c + trig(&a)(x));
        let hh = hilbert(&hilbert(&u));
        let expect = Field::from_fn(g, |x| -trig(&a)(x));
        prop_assert!(hh.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn lambda_powers_compose(a in coeff_vec(), s1 in -0.45..0.9f64, s2 in -0.45..0.9f64) {
        let g = Grid::torus(64);
        let u = Field::from_fn(g, trig(&a));
        let two = lambda_power(&lambda_power(&u, s1), s2);
        let one = lambda_power(&u, s1 + s2);
        prop_assert!(two.sub(&one).max_abs() < 1e-11);
    }

    #[test]
    fn cotlar_holds_on_seeded_polynomials(seed in any::<u64>(), degree in 1usize..24) {
        let u = random_trig_poly(Grid::torus(256), degree, seed);
        prop_assert!(cotlar_residual(&u).0 < 1e-10);
    }

    #[test]
    fn corollary_sides_are_quadratic(seed in 0u64..1000, s in 0.2..5.0f64, beta in 0.2..0.8f64) {
        let u = BumpSum::seeded(seed);
        let r1 = maincoro_check(&u, beta, 1e-8).unwrap();
        let r2 = maincoro_check(&u.scaled(s), beta, 1e-8).unwrap();
        prop_assert!((r2.lhs - s * s * r1.lhs).abs() <= 1e-7 * (s * s * r1.lhs).abs().max(1e-12));
        prop_assert!((r2.rhs - s * s * r1.rhs).abs() <= 1e-7 * (s * s * r1.rhs).abs().max(1e-12));
        prop_assert!(r2.margin >= -1e-8);
    }
}

#[test]
fn weighted_functional_spectral_converges_to_quadrature() {
    // finite smoothness at |x| = 1 limits the spectral route to algebraic convergence
    for seed in [1, 5, 9] {
        let u = BumpSum::seeded(seed);
        for power in [1.5, 2.0, 2.5] {
            let quad = weighted_functional_quadrature(&u, power).unwrap();
            let err = |n: usize| {
                let g = Grid::new(n, 8.0);
                let f = Field::from_fn(g, |x| fraclab::ops::Profile::value(&u, x));
                (WeightedFunctional::new(g, power, Setting::Line).unwrap().eval(&f) - quad).abs() / quad.abs()
            };
            let (coarse, fine) = (err(1024), err(8192));
            assert!(fine < 2e-5 && fine < coarse, "seed {seed} p {power}: {coarse:e} -> {fine:e}");
        }
    }
}

#[test]
fn periodic_c3_grows_slower_than_inverse_square() {
    // numerical C₃ with fitted Hurwitz constants; α²C₃ must fall as α → 0 and the growth of αC₃ must slow down
    let alphas = [0.2, 0.1, 0.05];
    let mut a_c3 = Vec::new();
    let mut a2_c3 = Vec::new();
    for alpha in alphas {
        let r = fraclab::inequalities::c2_c3_bounds(alpha, 0.25).unwrap();
        assert!(r.c2.is_finite() && r.c2 > 0.0 && r.c3.is_finite() && r.c3 > 0.0, "alpha {alpha}: {r:?}");
        a_c3.push(alpha * r.c3);
        a2_c3.push(alpha * alpha * r.c3);
    }
    assert!(a2_c3[1] < a2_c3[0] && a2_c3[2] < a2_c3[1], "alpha^2 C3 {a2_c3:?}");
    assert!(a_c3[2] - a_c3[1] < a_c3[1] - a_c3[0], "alpha C3 {a_c3:?}");
}
