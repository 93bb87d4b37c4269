use susyq::design::TransformationPlan;
use susyq::oracle::{residual, Grid};
use susyq::partner::{normalize, simpson, BaseState, Branch, PartnerPotential};
use susyq::seeds::{make_seed, Parity};

fn sample() -> Vec<f64> {
    (1..=24).map(|i| 0.25 * i as f64).collect()
}

fn plans() -> Vec<TransformationPlan> {
    [
        vec![-5.5, -4.5, -3.5, -2.5],
        vec![0.6, 0.9, 1.0, 1.3],
        vec![-3.2, -1.1, 0.2],
        vec![0.7, 1.2, 1.4],
        vec![1.7, 2.3],
        vec![2.7, 3.1],
    ]
    .into_iter()
    .map(|e| TransformationPlan::auto(e).unwrap())
    .collect()
}

#[test]
fn transformed_states_are_eigenfunctions() {
    for plan in plans() {
        let p = plan.partner().unwrap();
        let branch = susyq::design::validate(&plan)
            .unwrap()
            .predicted_isospectral_branch;
        for n in 0..4 {
            let s = BaseState::new(branch, n);
            let r = residual(
                |x| p.value(x),
                |x| p.transformed_eigenfunction(&s, x),
                s.energy(),
                &sample(),
            )
            .unwrap();
            assert!(r < 1e-5, "{:?} n={n}: {r}", plan.epsilons());
        }
    }
}

#[test]
fn added_states_solve_at_their_energy() {
    for plan in plans() {
        let p = plan.partner().unwrap();
        for j in 1..=plan.order() {
            let e = plan.epsilons()[j - 1];
            let r = residual(|x| p.value(x), |x| p.added_state(j, x), e, &sample()).unwrap();
            assert!(r < 1e-5, "{:?} j={j}: {r}", plan.epsilons());
        }
    }
}

fn overlap(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, grid: &Grid) -> f64 {
    let vals: Vec<f64> = grid.nodes().map(|x| f(x) * g(x)).collect();
    simpson(&vals, grid.h())
}

#[test]
fn crum_normalization_and_orthogonality() {
    let grid = Grid::default();
    for plan in plans() {
        let p = plan.partner().unwrap();
        let branch = susyq::design::validate(&plan)
            .unwrap()
            .predicted_isospectral_branch;
        let states: Vec<BaseState> = (0..3).map(|n| BaseState::new(branch, n)).collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let o = overlap(
                    |x| p.transformed_eigenfunction(a, x).unwrap(),
                    |x| p.transformed_eigenfunction(b, x).unwrap(),
                    &grid,
                );
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (o - expect).abs() < 2e-6,
                    "{:?} ({i},{j}): {o}",
                    plan.epsilons()
                );
            }
        }
    }
}

#[test]
fn physical_added_states_are_orthogonal_to_the_rest() {
    let grid = Grid::default();
    let plan = TransformationPlan::auto(vec![-5.5, -4.5, -3.5, -2.5]).unwrap();
    let p = plan.partner().unwrap();
    let n2 = normalize(|x| p.added_state(2, x), &grid).unwrap();
    let n4 = normalize(|x| p.added_state(4, x), &grid).unwrap();
    let phi2 = |x: f64| n2 * p.added_state(2, x).unwrap();
    let phi4 = |x: f64| n4 * p.added_state(4, x).unwrap();
    assert!(overlap(phi2, phi4, &grid).abs() < 1e-6);
    for n in 0..3 {
        let s = BaseState::new(Branch::OddBase, n);
        let t = |x: f64| p.transformed_eigenfunction(&s, x).unwrap();
        assert!(overlap(phi2, t, &grid).abs() < 1e-6);
        assert!(overlap(phi4, t, &grid).abs() < 1e-6);
    }
}

#[test]
fn first_order_adds_no_state() {
    for (eps, parity) in [
        (1.0, Parity::Odd),
        (0.3, Parity::Even),
        (-2.2, Parity::Even),
    ] {
        let p = PartnerPotential::new(vec![make_seed(eps, parity)]).unwrap();
        let grid = Grid::default();
        // φ = 1/u either misses the boundary condition or is not normalizable
        let at_origin = p.added_state(1, 1e-4).unwrap().abs();
        let vanishes = at_origin < 1e-3;
        let normalizable = normalize(|x| p.added_state(1, x), &grid).is_ok();
        assert!(!(vanishes && normalizable), "ε={eps}");
    }
}

#[test]
fn worked_example_potential_beyond_the_plotted_range() {
    let plan = TransformationPlan::auto(vec![-5.5, -4.5, -3.5, -2.5]).unwrap();
    let p = plan.partner().unwrap();
    let closed = |x: f64| {
        let c = [
            256.0, -4096.0, 28416.0, -99328.0, 172512.0, -224640.0, 91440.0, 86400.0, -127575.0,
            -16200.0,
        ];
        let x2 = x * x;
        let num = c.iter().fold(0.0, |acc, v| acc * x2 + v);
        let den = 16.0 * x2.powi(4) - 64.0 * x2.powi(3) + 120.0 * x2 * x2 + 45.0;
        num / (2.0 * den * den)
    };
    for i in 60..=100 {
        let x = 0.1 * i as f64;
        let v = p.value(x).unwrap();
        assert!((v - closed(x)).abs() < 1e-8 * closed(x).abs(), "x={x}");
    }
}
