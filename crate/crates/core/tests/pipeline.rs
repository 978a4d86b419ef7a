use approx::assert_relative_eq;

use varorder::asymptotics::{limit_product_upper, KernelSequence, SequenceFamily, Target};
use varorder::barrier::{find_kappa0, select_p};
use varorder::functions::{Bump, Cosine};
use varorder::harnack::{discretize, run_case, solve_dirichlet, ExteriorData, Grid1D, HarnackConfig};
use varorder::normalizer::{cphi_direct, cphi_power_closed_form, cphi_reduced};
use varorder::operator::{ExtremalParams, Operator, OperatorOptions};
use varorder::{Kernel, ScalingFunction};

fn power(s: f64) -> Kernel {
    Kernel::natural(ScalingFunction::power(s).unwrap(), None).unwrap()
}

#[test]
fn routes_agree_with_the_closed_form() {
    for n in 1..=3 {
        let k = power(0.8);
        let exact = cphi_power_closed_form(n, 0.8).unwrap();
        let d = cphi_direct(&k, n, 1e-10).unwrap();
        let r = cphi_reduced(&k, n, 1e-10).unwrap();
        assert_relative_eq!(d.value, exact, max_relative = 1e-8);
        assert!(d.agrees_with(&r));
    }
}

#[test]
fn fractional_laplacian_of_cosine_in_any_direction() {
    let k = Kernel::natural(ScalingFunction::log_lower(0.6, 1.4).unwrap(), None).unwrap();
    let op = Operator::new(&k, 2, OperatorOptions::default()).unwrap();
    for x in [[0.0, 0.0], [0.7, -0.2], [std::f64::consts::PI, 1.0]] {
        let v = op.linear_apply(&Cosine { n: 2 }, &x).unwrap();
        assert!((v.value + x[0].cos()).abs() <= v.error + 1e-7, "{x:?}: {}", v.value);
    }
}

#[test]
fn extremal_operators_bracket_the_linear_one() {
    let k = power(1.2);
    let op = Operator::new(&k, 1, OperatorOptions::default()).unwrap();
    let equal = ExtremalParams::new(1.0, 1.0).unwrap();
    let wide = ExtremalParams::new(0.5, 2.0).unwrap();
    let u = Bump { n: 1 };
    for x in [0.0, 0.4, 1.5] {
        let lin = op.linear_apply(&u, &[x]).unwrap();
        let plus = op.pucci_plus(&u, &[x], &equal).unwrap();
        let minus = op.pucci_minus(&u, &[x], &equal).unwrap();
        let tol = 2.0 * lin.error + plus.error + minus.error + 1e-7;
        assert!((plus.value - 2.0 * lin.value).abs() <= tol);
        assert!((minus.value - 2.0 * lin.value).abs() <= tol);
        let hi = op.pucci_plus(&u, &[x], &wide).unwrap().value;
        let lo = op.pucci_minus(&u, &[x], &wide).unwrap().value;
        assert!(lo <= 2.0 * lin.value + tol && 2.0 * lin.value <= hi + tol);
    }
}

#[test]
fn upper_limit_converges() {
    let seq = KernelSequence::new(SequenceFamily::SumPowers, Target::ToZero, (4..=10).collect()).unwrap();
    let rep = limit_product_upper(&seq, 2, 1.0, 1e-10).unwrap();
    assert!(rep.final_deviation < 0.01);
}

#[test]
fn barrier_search_for_the_fractional_laplacian() {
    let p = select_p(1, 1.0, 1.0).unwrap();
    let s = find_kappa0(&power(1.0), 1, &ExtremalParams::new(1.0, 1.0).unwrap(), 0.5, 1.0, p, 1e-6).unwrap();
    assert!(s.mesh_stable);
    assert!(s.evidence.iter().all(|r| r.accepted()));
    assert!(s.kappa0 > 0.0 && s.kappa0 < 0.5);
}

#[test]
fn constants_are_harmonic_in_the_discrete_scheme() {
    let k = power(1.0);
    let grid = Grid1D::new(1.0, 0.05, 8.0).unwrap();
    let op = discretize(&k, 1.0, grid, 1e-10).unwrap();
    let u = solve_dirichlet(&op, &vec![0.0; grid.unknowns()], &ExteriorData::constant(3.0)).unwrap();
    for v in &u.values {
        assert_relative_eq!(*v, 3.0, max_relative = 1e-9);
    }
}

#[test]
fn harnack_case_is_stable_under_refinement() {
    let k = Kernel::natural(ScalingFunction::power(1.0).unwrap(), Some(0.5)).unwrap();
    let cfg = HarnackConfig {
        h: 0.02,
        ..HarnackConfig::standard(1.0)
    };
    let case = run_case(&k, &ExteriorData::bump(3.0, 1.0), &cfg).unwrap();
    assert!(case.positive());
    assert!(case.quotient_change < 0.05);
}
