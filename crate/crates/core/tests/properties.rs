use proptest::prelude::*;

use varorder::barrier::{select_p, sphere_margin, verify_capped, CappedBarrier, Phi1};
use varorder::harnack::{discretize, solve_dirichlet, DataBump, ExteriorData, Grid1D};
use varorder::kernel::{check_weak_scaling, moment_inequalities, RatioGrid};
use varorder::{Kernel, ScalingFunction};

fn family() -> impl Strategy<Value = ScalingFunction> {
    (0usize..4, 0.1f64..1.5, 0.05f64..0.45).prop_map(|(f, lo, gap)| {
        let hi = lo + gap;
        match f {
            0 => ScalingFunction::power(lo).unwrap(),
            1 => ScalingFunction::sum_powers(lo, hi).unwrap(),
            2 => ScalingFunction::log_lower(lo, hi).unwrap(),
            _ => ScalingFunction::log_upper(lo, hi).unwrap(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_moments_closed_form(s in 0.05f64..1.95, lr in -4.0f64..4.0) {
        let r = 10f64.powf(lr);
        let k = Kernel::natural(ScalingFunction::power(s).unwrap(), None).unwrap();
        let lo = k.lower_moment(r, 1e-10).unwrap();
        let up = k.upper_moment(r, 1e-10).unwrap();
        let lo_exact = r.powf(2.0 - s) / (2.0 - s);
        let up_exact = r.powf(-s) / s;
        prop_assert!((lo.value - lo_exact).abs() <= lo.error + 1e-9 * lo_exact);
        prop_assert!((up.value - up_exact).abs() <= up.error + 1e-9 * up_exact);
    }

    #[test]
    fn moments_are_monotone(phi in family(), lr in -3.0f64..3.0, step in 1.01f64..4.0) {
        let k = Kernel::natural(phi, None).unwrap();
        let r = 10f64.powf(lr);
        let a = k.lower(r).unwrap().value;
        let b = k.lower(r * step).unwrap().value;
        let c = k.upper(r).unwrap().value;
        let d = k.upper(r * step).unwrap().value;
        prop_assert!(a < b);
        prop_assert!(c > d);
    }

    #[test]
    fn natural_certificate_holds(phi in family()) {
        let k = Kernel::natural(phi.clone(), None).unwrap();
        let rep = check_weak_scaling(&phi, &k.cert, &RatioGrid { points: 49, ..RatioGrid::default() }).unwrap();
        prop_assert!(rep.certified(), "{:?}", rep.violations.first());
    }

    #[test]
    fn moment_inequalities_hold(phi in family(), lr in -3.0f64..3.0, t in 0.01f64..0.99) {
        let k = Kernel::natural(phi, None).unwrap();
        let m = moment_inequalities(&k, 10f64.powf(lr), t, 1e-10).unwrap();
        prop_assert!(m.all_pass());
    }

    #[test]
    fn selected_exponent_is_tight(n in 1usize..5, lambda in 0.1f64..2.0, ratio in 1.0f64..8.0) {
        let big = lambda * ratio;
        let p = select_p(n, lambda, big).unwrap();
        prop_assert!(sphere_margin(n, lambda, big, p) >= -1e-9 * p.max(1.0));
        prop_assert!(p > n as f64 + 1.0);
        if p > n as f64 + 1.0 + 1e-6 {
            prop_assert!(sphere_margin(n, lambda, big, 0.99 * p) < 0.0);
        }
    }

    #[test]
    fn barrier_profile_decreases(p in 2.0f64..12.0, k0 in 0.01f64..0.2, r in 0.001f64..0.999) {
        let phi = Phi1::new(2, p, k0, 1.0);
        prop_assert!(phi.radial(r) >= phi.radial(r + 0.001));
    }

    #[test]
    fn capped_barrier_is_consistent(n in 1usize..4, p in 2.5f64..10.0, k0 in 0.01f64..0.2) {
        let phi = CappedBarrier::new(p, k0, 1.0).unwrap();
        let rep = verify_capped(&phi, n).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discrete_comparison_principle(s in 0.3f64..1.9, c in 0.0f64..2.0, centre in 3.0f64..5.0, height in 0.0f64..3.0, f in 0.0f64..1.0) {
        let k = Kernel::natural(ScalingFunction::power(s).unwrap(), Some(0.25)).unwrap();
        let grid = Grid1D::new(1.0, 0.05, 8.0).unwrap();
        let op = discretize(&k, 1.0, grid, 1e-9).unwrap();
        let low = ExteriorData::constant(c);
        let high = ExteriorData {
            constant: c,
            bumps: vec![DataBump { center: centre, width: 1.0, height }],
        };
        let src = vec![-f; grid.unknowns()];
        let u = solve_dirichlet(&op, &src, &low).unwrap();
        let v = solve_dirichlet(&op, &src, &high).unwrap();
        for (a, b) in u.values.iter().zip(&v.values) {
            prop_assert!(*a >= c - 1e-9);
            prop_assert!(*b >= *a - 1e-9);
        }
    }
}
