use approx::assert_relative_eq;
use proptest::prelude::*;

use stochrate::montecarlo::trajectory;
use stochrate::processes::{
    counterexample_model, km_model, prox_model, resolvent, rm_model, shrink, splitting_model,
    star_distance, star_geodesic, prox_parameter, Field, RobbinsMonro,
};
use stochrate::{Error, Process, RandomSource, Schedule, Space, StatePoint};

fn rng() -> RandomSource {
    RandomSource::new(7, 0)
}

fn stepped(model: &impl Process, x: StatePoint, n: u64) -> StatePoint {
    let mut x = x;
    model.step(&mut x, n, &mut rng());
    x
}

#[test]
fn single_steps() {
    let lin = rm_model(
        Field::Linear { beta: 1.0, dim: 1 },
        0.0,
        Schedule::Harmonic { beta: 1.0, r: 2.0 },
        StatePoint::scalar(1.0),
    )
    .unwrap();
    assert_eq!(stepped(&lin, StatePoint::scalar(1.0), 0), StatePoint::scalar(0.5));

    let cubic = rm_model(Field::Cubic, 0.0, Schedule::Const(0.1), StatePoint::scalar(2.0)).unwrap();
    let x = stepped(&cubic, StatePoint::scalar(2.0), 0);
    assert_relative_eq!(x.first(), 1.2, max_relative = 1e-15);

    let km = km_model(0.5, Schedule::Const(0.5), Schedule::Const(0.0), Space::Euclidean { dim: 1 }, StatePoint::scalar(4.0)).unwrap();
    assert_eq!(stepped(&km, StatePoint::scalar(4.0), 0), StatePoint::scalar(3.0));
    assert_eq!(km.functional(&StatePoint::scalar(4.0)), 2.0);

    let star_km = km_model(0.0, Schedule::Const(0.5), Schedule::Const(0.0), Space::Star { legs: 3 }, StatePoint::star(2, 1.0)).unwrap();
    assert_eq!(stepped(&star_km, StatePoint::star(2, 1.0), 0), StatePoint::star(2, 0.5));

    let prox = prox_model(Schedule::Const(1.0), Schedule::Const(0.0), StatePoint::scalar(0.0), StatePoint::scalar(2.0)).unwrap();
    assert_eq!(stepped(&prox, StatePoint::scalar(2.0), 0), StatePoint::scalar(1.0));

    let split = splitting_model(
        vec![(StatePoint::scalar(1.0), 1.0)],
        Schedule::Const(0.5),
        Space::Euclidean { dim: 1 },
        StatePoint::scalar(0.0),
    )
    .unwrap();
    assert_eq!(stepped(&split, StatePoint::scalar(0.0), 0), StatePoint::scalar(0.5));

    assert_eq!(shrink(&[5.0], &[0.0], 1.0), vec![4.0]);
    assert_eq!(shrink(&[0.5], &[0.0], 1.0), vec![0.0]);
}

#[test]
fn star_geometry_examples() {
    let d = |x, y| star_distance(3, &x, &y).unwrap();
    assert_eq!(d(StatePoint::star(0, 1.0), StatePoint::star(0, 2.5)), 1.5);
    assert_eq!(d(StatePoint::star(1, 2.0), StatePoint::star(2, 1.0)), 3.0);
    let (x, y) = (StatePoint::star(1, 2.0), StatePoint::star(2, 1.0));
    assert_eq!(star_geodesic(3, &x, &y, 2.0 / 3.0).unwrap(), StatePoint::star(0, 0.0));
    let p = star_geodesic(3, &x, &y, 5.0 / 6.0).unwrap();
    assert!(matches!(p, StatePoint::Star { leg: 2, .. }));
    assert_relative_eq!(p.first(), 0.5, max_relative = 1e-12);
    assert!(star_distance(3, &StatePoint::star(3, 1.0), &x).is_err());
    assert!(star_geodesic(3, &x, &y, 1.5).is_err());
}

#[test]
fn constructors_reject_bad_input() {
    assert!(matches!(
        splitting_model(
            vec![(StatePoint::scalar(1.0), 0.6), (StatePoint::scalar(0.0), 0.6)],
            Schedule::Const(0.5),
            Space::Euclidean { dim: 1 },
            StatePoint::scalar(0.0),
        ),
        Err(Error::Config { .. })
    ));
    assert!(km_model(1.0, Schedule::Const(0.5), Schedule::Const(0.0), Space::Euclidean { dim: 1 }, StatePoint::scalar(0.0)).is_err());
    assert!(rm_model(Field::Cubic, 1.0, Schedule::Const(0.1), StatePoint::star(0, 1.0)).is_err());
}

#[test]
fn counterexample_paths_stay_on_support() {
    let m = counterexample_model(false);
    for trial in 0..200 {
        let mut r = RandomSource::new(3, trial);
        let mut x = m.initial(&mut r);
        for n in 0..20 {
            let v = x.first();
            assert!(v == 0.0 || (v - 2f64.powi(n as i32 + 1)).abs() < 1e-9, "n={n} v={v}");
            m.step(&mut x, n, &mut r);
        }
    }
}

#[test]
fn rm_noise_matches_conditional_moment() {
    let rm = RobbinsMonro::new(Field::Linear { beta: 2.0, dim: 3 }, 0.5, Schedule::Const(0.1), StatePoint::Euclidean(vec![1.0, 0.0, -1.0])).unwrap();
    let x = [1.0, -0.5, 2.0];
    let n = 200_000;
    let mut r = rng();
    let samples: Vec<f64> = (0..n).map(|_| rm.observe(&x, &mut r).iter().map(|v| v * v).sum()).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let exact = rm.conditional_second_moment(&x);
    // β²‖x‖² + dim·σ²
    assert_relative_eq!(exact, 4.0 * 5.25 + 3.0 * 0.25, max_relative = 1e-12);
    assert!((mean - exact).abs() < 4.0 * (var / n as f64).sqrt());
    let (c, d) = rm.growth().unwrap();
    assert!(c * 5.25 + d >= exact * (1.0 - 1e-12));
    assert!(RobbinsMonro::new(Field::Cubic, 0.5, Schedule::Const(0.1), StatePoint::scalar(1.0)).unwrap().growth().is_none());
}

#[test]
fn noiseless_fejer_iterations_are_monotone() {
    let models = [
        km_model(0.7, Schedule::Const(0.5), Schedule::Const(0.0), Space::Star { legs: 4 }, StatePoint::star(3, 2.0)).unwrap(),
        km_model(0.3, Schedule::Harmonic { beta: 2.0, r: 2.0 }, Schedule::Const(0.0), Space::Euclidean { dim: 2 }, StatePoint::Euclidean(vec![1.0, -3.0])).unwrap(),
        prox_model(Schedule::Const(0.5), Schedule::Const(0.0), StatePoint::Euclidean(vec![1.0, 1.0]), StatePoint::Euclidean(vec![-2.0, 4.0])).unwrap(),
    ];
    for m in &models {
        let path = trajectory(m, 200, 11, 0);
        assert_eq!(path.len(), 201);
        for w in path.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "{}: {:?}", m.name(), w);
        }
        assert!(path[200].1 < 0.5 * path[0].1, "{}", m.name());
    }
}

/// Brute-force minimiser of `w·d²(y,a) + d²(y,x)/(2λ)` over a fine grid of
/// star points.
fn grid_prox(legs: usize, x: &StatePoint, a: &StatePoint, w: f64, lambda: f64) -> StatePoint {
    let obj = |y: &StatePoint| {
        w * star_distance(legs, y, a).unwrap().powi(2) + star_distance(legs, y, x).unwrap().powi(2) / (2.0 * lambda)
    };
    let mut best = (f64::INFINITY, StatePoint::star(0, 0.0));
    for leg in 0..legs {
        for i in 0..=6000 {
            let y = StatePoint::star(leg, i as f64 * 1e-3);
            let v = obj(&y);
            if v < best.0 {
                best = (v, y);
            }
        }
    }
    best.1
}

#[test]
fn splitting_step_is_the_proximal_point() {
    let legs = 3;
    let cases = [
        (StatePoint::star(0, 2.0), StatePoint::star(1, 1.5), 0.5, 1.0),
        (StatePoint::star(2, 0.4), StatePoint::star(2, 3.0), 0.2, 0.7),
        (StatePoint::star(1, 1.0), StatePoint::star(0, 0.5), 1.0, 0.1),
    ];
    for (x, a, w, lambda) in cases {
        let step = star_geodesic(legs, &x, &a, prox_parameter(lambda, w)).unwrap();
        let grid = grid_prox(legs, &x, &a, w, lambda);
        assert!(star_distance(legs, &step, &grid).unwrap() < 2e-3, "{step:?} vs {grid:?}");
    }
}

fn arb_star(legs: usize) -> impl Strategy<Value = StatePoint> {
    (0..legs, 0.0f64..5.0).prop_map(|(l, t)| StatePoint::star(l, t))
}

fn arb_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
}

fn norm(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn shrink_moves_exactly_c_toward_z(x in arb_vec(3), z in arb_vec(3), c in 0.0f64..20.0) {
        let y = shrink(&x, &z, c);
        let before = norm(&x, &z);
        prop_assert!((norm(&y, &z) - (before - c).max(0.0)).abs() <= 1e-9 * before.max(1.0));
    }

    #[test]
    fn shrink_is_nonexpansive(x in arb_vec(2), y in arb_vec(2), z in arb_vec(2), c in 0.0f64..5.0) {
        let (sx, sy) = (shrink(&x, &z, c), shrink(&y, &z, c));
        prop_assert!(norm(&sx, &sy) <= norm(&x, &y) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn resolvent_contracts_toward_z(x in arb_vec(3), z in arb_vec(3), g in 0.01f64..10.0) {
        let j = resolvent(&x, &z, g);
        prop_assert!(norm(&j, &z) <= norm(&x, &z) / (1.0 + g) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn resolvent_is_firmly_nonexpansive(x in arb_vec(3), y in arb_vec(3), z in arb_vec(3), g in 0.01f64..10.0) {
        let (jx, jy) = (resolvent(&x, &z, g), resolvent(&y, &z, g));
        let lhs: f64 = jx.iter().zip(&jy).map(|(a, b)| (a - b).powi(2)).sum();
        let rhs: f64 = jx.iter().zip(&jy).zip(x.iter().zip(&y)).map(|((a, b), (c, d))| (a - b) * (c - d)).sum();
        prop_assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn star_satisfies_cn(x in arb_star(4), x2 in arb_star(4), y in arb_star(4)) {
        let d = |p: &StatePoint, q: &StatePoint| star_distance(4, p, q).unwrap();
        let m = star_geodesic(4, &x, &x2, 0.5).unwrap();
        let lhs = d(&m, &y).powi(2);
        let rhs = 0.5 * d(&x, &y).powi(2) + 0.5 * d(&x2, &y).powi(2) - 0.25 * d(&x, &x2).powi(2);
        prop_assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn star_geodesics_have_constant_speed(x in arb_star(3), y in arb_star(3), t in 0.0f64..=1.0) {
        let d = |p: &StatePoint, q: &StatePoint| star_distance(3, p, q).unwrap();
        let p = star_geodesic(3, &x, &y, t).unwrap();
        let total = d(&x, &y);
        prop_assert!((d(&x, &p) - t * total).abs() <= 1e-9 * total.max(1.0));
        prop_assert!((d(&p, &y) - (1.0 - t) * total).abs() <= 1e-9 * total.max(1.0));
    }
}
