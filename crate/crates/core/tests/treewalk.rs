mod common;

use common::*;
use num_rational::BigRational;
use proptest::prelude::*;
use ust3d::treewalk::{
    bk06_bound_check, bk06_scan, evolve, heat_kernel_between, heat_kernel_exact, heat_kernel_mc,
    return_probability_bounds, Evolution, DRIFT_TOLERANCE,
};
use ust3d::ust::TreeMeta;
use ust3d::wilson::{sample_window_ust, UstWindowConfig};
use ust3d::{Error, LatticePoint, RngConfig, SpanningTree};

fn single_edge() -> SpanningTree {
    let o = LatticePoint::ORIGIN;
    SpanningTree::from_edges(o, &[(o, p(1, 0, 0))], TreeMeta::default()).unwrap()
}

fn star() -> SpanningTree {
    let o = LatticePoint::ORIGIN;
    SpanningTree::from_edges(o, &[(o, p(1, 0, 0)), (o, p(0, 1, 0)), (o, p(0, 0, 1))], TreeMeta::default()).unwrap()
}

#[test]
fn exact_examples() {
    let o = LatticePoint::ORIGIN;
    for n in [2u64, 4, 100] {
        assert_eq!(heat_kernel_exact(&single_edge(), &o, n).unwrap().value, 1.0);
    }
    let v = heat_kernel_exact(&star(), &o, 2).unwrap();
    assert!((v.value - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!((v.stderr, v.trials, v.n), (0.0, 0, 2));
    assert_eq!(heat_kernel_exact(&star(), &o, 0).unwrap().value, 1.0 / 3.0);
}

#[test]
fn exact_matches_dense_power() {
    for s in 0..5 {
        let t = SpanningTree::random_growth(50, &RngConfig::new(s, 0));
        let x = t.point(7);
        for n in [0u64, 1, 2, 7, 10, 31, 40] {
            let dense = dense_transition_power(&t, &x, n);
            let ev = evolve(&t, &x, n).unwrap();
            for id in 0..50u32 {
                let y = t.point(id);
                assert!((ev.probability(&y) - dense[&y]).abs() < 1e-12);
            }
            let hk = heat_kernel_exact(&t, &x, n).unwrap().value;
            assert!((hk - dense[&x] / t.degree(7) as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn mc_examples() {
    let o = LatticePoint::ORIGIN;
    let r = RngConfig::new(1, 0);
    let e = heat_kernel_mc(&single_edge(), &o, 6, 1000, &r).unwrap();
    assert_eq!((e.value, e.stderr), (1.0, 0.0));
    let t = SpanningTree::random_growth(80, &RngConfig::new(2, 0));
    assert_eq!(heat_kernel_mc(&t, &o, 9, 1000, &r).unwrap().value, 0.0);
}

#[test]
fn mc_agrees_with_exact() {
    let mut within = 0;
    let mut total = 0;
    for s in 0..6 {
        let t = SpanningTree::random_growth(100, &RngConfig::new(10 + s, 0));
        let x = t.point(3);
        for n in [2u64, 10, 50] {
            let exact = heat_kernel_exact(&t, &x, n).unwrap().value;
            let mc = heat_kernel_mc(&t, &x, n, 100_000, &RngConfig::new(20 + s, n)).unwrap();
            total += 1;
            within += ((mc.value - exact).abs() <= 3.0 * mc.stderr) as usize;
        }
    }
    assert!(within as f64 >= 0.9 * total as f64, "{within}/{total}");
}

#[test]
fn mc_does_not_depend_on_threads() {
    let t = SpanningTree::random_growth(60, &RngConfig::new(3, 0));
    let r = RngConfig::new(4, 0);
    let a = heat_kernel_mc(&t, &LatticePoint::ORIGIN, 20, 5000, &r).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let b = pool.install(|| heat_kernel_mc(&t, &LatticePoint::ORIGIN, 20, 5000, &r).unwrap());
    assert_eq!(a, b);
}

#[test]
fn bk06_examples() {
    let o = LatticePoint::ORIGIN;
    let c = bk06_bound_check(&single_edge(), &o, 1).unwrap();
    assert_eq!((c.volume, c.n, c.lhs, c.rhs, c.holds), (2, 4, 1.0, 1.0, true));
    let c = bk06_bound_check(&star(), &o, 1).unwrap();
    assert_eq!((c.volume, c.n), (4, 8));
    assert!((c.lhs - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(c.rhs, 0.5);
    assert!(c.holds);
}

#[test]
fn bk06_on_sampled_windows() {
    for s in 0..20 {
        let t = sample_window_ust(&UstWindowConfig::new(4, 8), &RngConfig::new(s, 0)).unwrap();
        let scan = bk06_scan(&t, &LatticePoint::ORIGIN, 3).unwrap();
        assert!(scan.all_hold());
        assert!(scan.reached >= 1);
    }
}

#[test]
fn clipped_ball_is_an_error() {
    let t = sample_window_ust(&UstWindowConfig::new(2, 2), &RngConfig::new(1, 0)).unwrap();
    assert!(matches!(heat_kernel_exact(&t, &LatticePoint::ORIGIN, 400), Err(Error::ClippedBall { .. })));
}

#[test]
fn parity_on_many_trees() {
    for s in 0..10 {
        let t = SpanningTree::random_growth(60, &RngConfig::new(s, 5));
        for id in [0u32, 11, 59] {
            for n in (1..40).step_by(2) {
                assert_eq!(heat_kernel_exact(&t, &t.point(id), n).unwrap().value, 0.0);
                assert_eq!(evolve(&t, &t.point(id), n).unwrap().probability(&t.point(id)), 0.0);
            }
        }
    }
}

#[test]
fn drift_over_long_runs() {
    let t = SpanningTree::random_growth(400, &RngConfig::new(8, 0));
    let mut ev = Evolution::new(&t, &LatticePoint::ORIGIN, 1000).unwrap();
    ev.run(10_000);
    assert!(ev.drift() < DRIFT_TOLERANCE, "drift {}", ev.drift());
    assert_eq!(ev.leaked(), 0.0);
}

#[test]
fn symmetry_is_exact_in_rationals() {
    for s in 0..4 {
        let t = SpanningTree::random_growth(40, &RngConfig::new(s, 9));
        let (a, b) = (t.point(5), t.point(33));
        for n in [4u64, 9, 12] {
            let from_a = rational_distribution(&t, &a, n);
            let from_b = rational_distribution(&t, &b, n);
            let mu = |id: u32| BigRational::from_integer((t.degree(id) as i64).into());
            let (ia, ib) = (t.id(&a).unwrap(), t.id(&b).unwrap());
            assert_eq!(&from_a[ib as usize] / mu(ib), &from_b[ia as usize] / mu(ia));
            let fa = heat_kernel_between(&t, &a, &b, n).unwrap();
            let fb = heat_kernel_between(&t, &b, &a, n).unwrap();
            assert!((fa - fb).abs() < 1e-15);
        }
    }
}

#[test]
fn bracket_contains_exact_value() {
    let t = sample_window_ust(&UstWindowConfig::new(8, 4), &RngConfig::new(2, 0)).unwrap();
    let o = LatticePoint::ORIGIN;
    let ns = [2u64, 4, 8, 12];
    for (n, lo, hi) in return_probability_bounds(&t, &o, &ns, 6).unwrap() {
        assert!(lo <= hi);
        if let Ok(exact) = heat_kernel_exact(&t, &o, 2 * n) {
            assert!(lo <= exact.value + 1e-15 && exact.value <= hi + 1e-15, "{n}: {lo} {} {hi}", exact.value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn even_returns_decrease(seed in 0u64..1000, x in 0u32..50) {
        let t = SpanningTree::random_growth(50, &RngConfig::new(seed, 3));
        let v: Vec<f64> = (0..30u64).map(|m| heat_kernel_exact(&t, &t.point(x), 2 * m).unwrap().value).collect();
        for w in v.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn mass_is_conserved(seed in 0u64..1000, n in 0u64..200) {
        let t = SpanningTree::random_growth(50, &RngConfig::new(seed, 4));
        let ev = evolve(&t, &LatticePoint::ORIGIN, n).unwrap();
        let total: f64 = ev.iter().map(|(_, q)| q).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
