use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lwrnet::dg::{project_initial, Mesh1D};
use lwrnet::flux::FluxModel;
use lwrnet::junction::{JunctionKind, JunctionRule};
use lwrnet::verification::{
    convergence_order, error_norms, exact_smooth_solution, format_csv,
    jam_threshold, lp_junction_oracle, random_junction_instance, ErrorReport, ORACLE_BASE_STEP,
};

fn rho0(x: f64) -> f64 {
    0.5 + 0.5 * (2.0 * std::f64::consts::PI * x).sin()
}

/// Foot of the characteristic through `(x, t)` by bisection. Before the
/// shock forms `x0 + (1 − 2ρ0(x0)) t` is increasing, and the foot lies
/// within `t` of `x`.
fn bracketed(x: f64, t: f64) -> f64 {
    let g = |x0: f64| x0 + (1.0 - 2.0 * rho0(x0)) * t - x;
    let (mut lo, mut hi) = (x - t - 1e-12, x + t + 1e-12);
    assert!(g(lo) <= 0.0 && g(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    rho0(0.5 * (lo + hi))
}

#[test]
fn exact_solution_matches_characteristic_bracketing() {
    assert_abs_diff_eq!(exact_smooth_solution(0.3, 0.1).unwrap(), bracketed(0.3, 0.1), epsilon = 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let x: f64 = rng.gen_range(0.0..1.0);
        let t: f64 = rng.gen_range(0.0..0.15);
        let rho = exact_smooth_solution(x, t).unwrap();
        assert_abs_diff_eq!(rho, bracketed(x, t), epsilon = 1e-12);
        // implicit characteristic equation
        let resid = rho - rho0(x - (1.0 - 2.0 * rho) * t);
        assert!(resid.abs() <= 1e-13, "residual {resid} at ({x}, {t})");
    }
}

#[test]
fn exact_solution_trivia() {
    for x in [0.0, 0.13, 0.5, 0.77] {
        assert_abs_diff_eq!(exact_smooth_solution(x, 0.0).unwrap(), rho0(x), epsilon = 1e-15);
    }
    for x in [0.0, 0.5] {
        assert_abs_diff_eq!(exact_smooth_solution(x, 0.1).unwrap(), 0.5, epsilon = 1e-14);
    }
}

#[test]
fn norms_of_exact_projection() {
    let mesh = Mesh1D::uniform(0.0, 2.0, 7).unwrap();
    let s = project_initial(mesh, 2, |x| 0.3 + 0.1 * x * x).unwrap();
    let (l1, linf) = error_norms(&s, |x| 0.3 + 0.1 * x * x);
    assert!(l1 < 1e-15 && linf < 1e-14, "{l1} {linf}");
}

#[test]
fn table_orders_and_csv() {
    let data: Vec<(usize, f64, f64, f64, f64)> = [10usize, 20, 40]
        .iter()
        .map(|&n| (n, 3.0 * (n as f64).powi(-2), 5.0 * (n as f64).powi(-3), 0.0, 1.0))
        .collect();
    let r = ErrorReport::from_measurements(1, false, &data);
    assert!(r.rows[0].l1_order.is_none());
    assert_abs_diff_eq!(r.rows[2].l1_order.unwrap(), 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.rows[2].linf_order.unwrap(), 3.0, epsilon = 1e-12);
    let csv = format_csv(&[r]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "degree,bp,n,l1_error,l1_order,linf_error,linf_order,min,max");
    assert_eq!(lines.count(), 3);
}

#[test]
fn two_two_oracle_example() {
    let rule = JunctionRule::TwoTwo { alpha: 0.4, beta: 0.3 };
    let d = [0.25, 0.25];
    let s = [0.25, 0.25];
    let exact = rule.solve(&d, &s).unwrap();
    let oracle = lp_junction_oracle(&rule, &d, &s, ORACLE_BASE_STEP);
    assert_abs_diff_eq!(exact.incoming()[0], 0.25, epsilon = 1e-12);
    assert_abs_diff_eq!(exact.incoming()[1], 1.0 / 7.0, epsilon = 1e-6);
    for (a, b) in exact.incoming().iter().zip(oracle.incoming()) {
        assert!((a - b).abs() <= 2e-3);
    }
}

#[test]
fn jam_threshold_value() {
    let t = jam_threshold(&FluxModel::unit(), &FluxModel::BottleneckNarrow);
    // f1(ρ̄) = max f2 = 1/6 on the free branch
    assert_abs_diff_eq!(t, 0.5 - (1.0f64 / 12.0).sqrt(), epsilon = 1e-10);
    assert_abs_diff_eq!(t, 0.2113, epsilon = 1e-3);
}

proptest! {
    #[test]
    fn synthetic_orders(c in 1e-3..1e3f64, p in 0.5..5.0f64, n in 5usize..500) {
        let e = |n: usize| c * (n as f64).powf(-p);
        prop_assert!((convergence_order(e(n), e(2 * n)) - p).abs() <= 1e-12);
    }

    #[test]
    fn oracle_agrees_with_solvers(seed in any::<u64>(), kind_ix in 0usize..4) {
        let kind = JunctionKind::ALL[kind_ix];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_junction_instance(kind, &mut rng);
        let exact = inst.rule.solve(inst.demands(), inst.supplies()).unwrap();
        let oracle = lp_junction_oracle(&inst.rule, inst.demands(), inst.supplies(), ORACLE_BASE_STEP);
        for (a, b) in exact.incoming().iter().chain(exact.outgoing()).zip(oracle.incoming().iter().chain(oracle.outgoing())) {
            prop_assert!((a - b).abs() <= 2e-3, "{:?}: {:?} vs {:?}", inst, exact, oracle);
        }
        prop_assert!((exact.total_in() - exact.total_out()).abs() <= 1e-13);
    }
}
