use proptest::prelude::*;
use susyq::seeds::{make_seed, seed_derivs, seed_value, Parity, SeedSolution};

fn fd2(u: &SeedSolution, x: f64, h: f64) -> f64 {
    let f = |t: f64| u.value(t).unwrap();
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

fn fd1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn parity_of(odd: bool) -> Parity {
    if odd {
        Parity::Odd
    } else {
        Parity::Even
    }
}

proptest! {
    #[test]
    fn seeds_solve_the_oscillator_equation(eps in -8.0f64..6.0, odd: bool, x in 0.1f64..5.0) {
        let u = make_seed(eps, parity_of(odd));
        let u0 = u.value(x).unwrap();
        let lhs = -0.5 * fd2(&u, x, 1e-3) + (0.5 * x * x - eps) * u0;
        let scale = u0.abs() * (1.0 + 0.5 * x * x + eps.abs());
        prop_assert!(lhs.abs() <= 1e-6 * scale, "residual {lhs} scale {scale}");
    }

    #[test]
    fn derivatives_agree_with_finite_differences(eps in -8.0f64..6.0, odd: bool, x in 0.2f64..5.0) {
        let u = make_seed(eps, parity_of(odd));
        let d = seed_derivs(&u, x, 3).unwrap();
        let h = 1e-3;
        let fd = fd1(|t| seed_value(&u, t).unwrap(), x, h);
        let scale = d[0].abs().max(d[1].abs());
        prop_assert!((d[1] - fd).abs() <= 1e-8 * scale);
        prop_assert!((d[0] - u.value(x).unwrap()).abs() <= 1e-13 * d[0].abs().max(1e-300));
        // third derivative through the equation against FD of u″
        let fd3 = fd1(|t| seed_derivs(&u, t, 2).unwrap()[2], x, h);
        let scale3 = d[3].abs().max(d[2].abs()).max(scale);
        prop_assert!((d[3] - fd3).abs() <= 1e-7 * scale3);
    }

    #[test]
    fn reduced_derivatives_are_consistent(eps in -8.0f64..6.0, odd: bool, x in 0.2f64..6.0) {
        let u = make_seed(eps, parity_of(odd));
        let d = u.derivs(x, 2).unwrap();
        let v = u.reduced_derivs(x, 2).unwrap();
        let g = (-0.5 * x * x).exp();
        // v = g u, v′ = g (u′ - x u), v″ = g (u″ - 2x u′ + (x² - 1) u)
        let expect = [
            g * d[0],
            g * (d[1] - x * d[0]),
            g * (d[2] - 2.0 * x * d[1] + (x * x - 1.0) * d[0]),
        ];
        let scale = expect.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        for (a, b) in v.iter().zip(&expect) {
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{v:?} vs {expect:?}");
        }
    }
}

#[test]
fn definite_parity_at_the_origin() {
    for eps in [-3.3, 0.2, 1.1, 4.7] {
        let even = make_seed(eps, Parity::Even);
        let odd = make_seed(eps, Parity::Odd);
        assert_eq!(even.value(0.0).unwrap(), 1.0);
        assert_eq!(odd.value(0.0).unwrap(), 0.0);
        // u′(0⁺) is 0 for even and 1 for odd seeds
        assert!(even.derivs(1e-6, 1).unwrap()[1].abs() < 1e-5);
        assert!((odd.derivs(1e-6, 1).unwrap()[1] - 1.0).abs() < 1e-9);
        // even Taylor coefficients of the reduced odd seed vanish: v(-x) = -v(x)
        let r = odd.reduced_derivs(0.0, 4).unwrap();
        assert!(r[0] == 0.0 && r[2] == 0.0 && r[4] == 0.0);
        let r = even.reduced_derivs(0.0, 3).unwrap();
        assert!(r[1] == 0.0 && r[3] == 0.0);
    }
}

#[test]
fn generic_seeds_grow_and_stay_finite() {
    for eps in [-5.5 + 0.01, 0.3, 2.2] {
        for p in [Parity::Even, Parity::Odd] {
            let u = make_seed(eps, p);
            let big = u.value(10.0).unwrap();
            assert!(big.is_finite() && big.abs() > 1e10, "{eps} {p:?}: {big}");
            let v = u.reduced_derivs(10.0, 9).unwrap();
            assert!(v.iter().all(|d| d.is_finite()));
        }
    }
}

#[test]
fn mixed_seed_is_sum_of_parts() {
    let x = 1.7;
    let u = SeedSolution::general(0.4, 2.0, -3.0);
    assert_eq!(u.parity(), None);
    let e = make_seed(0.4, Parity::Even).value(x).unwrap();
    let o = make_seed(0.4, Parity::Odd).value(x).unwrap();
    assert!((u.value(x).unwrap() - (2.0 * e - 3.0 * o)).abs() < 1e-13 * e.abs().max(o.abs()));
}

#[test]
fn rejects_bad_arguments() {
    let u = make_seed(0.4, Parity::Odd);
    assert!(u.value(-1.0).is_err());
    assert!(u.derivs(0.0, 2).is_err());
    assert!(make_seed(f64::NAN, Parity::Odd).value(1.0).is_err());
}
