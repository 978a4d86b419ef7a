use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use varorder::asymptotics::{self, KernelSequence, SequenceFamily, Target};
use varorder::barrier::{self, CappedBarrier, Phi1};
use varorder::functions::{Bump, Cosine, PointFunction, QuadraticCap};
use varorder::harnack::{self, DataBump, ExteriorData, HarnackConfig, HarnackReport};
use varorder::kernel::{check_weak_scaling, moment_inequalities, RatioGrid};
use varorder::normalizer::{self, bound_check, geometric_radii};
use varorder::operator::{ExtremalParams, Operator, OperatorOptions};
use varorder::{Kernel, ScalingFunction};

use crate::failure::Failure;
use crate::output::{num, Artifacts};
use crate::settings::{parse_list, Settings};
use crate::Common;

fn artifacts(common: &Common, s: &Settings) -> Result<Artifacts, Failure> {
    Artifacts::new(&common.out, s.resolved())
}

fn dimension(s: &mut Settings, flag: Option<usize>, max: usize) -> Result<usize, Failure> {
    let n = s.usize("n", flag, 1)?;
    if n == 0 || n > max {
        return Err(Failure::Config(format!("n must lie in 1..={max}, got {n}")));
    }
    Ok(n)
}

pub fn constant(common: &Common, n: Option<usize>, method: Option<String>) -> Result<(), Failure> {
    let mut s = Settings::load(common)?;
    let kernel = s.kernel()?;
    let n = dimension(&mut s, n, 5)?;
    let tol = s.tol(common, normalizer::DEFAULT_TOL)?;
    let method = method.unwrap_or_else(|| "direct".into());
    s.note("method", method.as_str());
    let result = match method.as_str() {
        "direct" => normalizer::cphi_direct(&kernel, n, tol)?,
        "reduced" => normalizer::cphi_reduced(&kernel, n, tol)?,
        "closed-form" => match kernel.phi {
            ScalingFunction::Power { sigma } => normalizer::cphi_closed_form_result(n, sigma)?,
            _ => return Err(Failure::Config("closed-form needs family=power".into())),
        },
        other => return Err(Failure::Config(format!("unknown method {other:?}"))),
    };
    let out = artifacts(common, &s)?;
    let text = out.json(
        "constant.json",
        json!({
            "cphi": result.value,
            "err": result.error,
            "method": result.method.as_str(),
            "n": n,
        }),
    )?;
    print!("{text}");
    Ok(())
}

pub fn moments(common: &Common, radii: Option<String>) -> Result<(), Failure> {
    let mut s = Settings::load(common)?;
    let kernel = s.kernel()?;
    let tol = s.tol(common, 1e-10)?;
    let radii_text = radii.unwrap_or_else(|| "0.001,0.01,0.1,1,10,100,1000".into());
    let radii = parse_list("radii", &radii_text)?;
    if radii.iter().any(|&r| r <= 0.0) {
        return Err(Failure::Config("radii must be positive".into()));
    }
    s.note("radii", radii_text.as_str());
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &r in &radii {
        let lo = kernel.lower_moment(r, tol)?;
        let up = kernel.upper_moment(r, tol)?;
        values.push((r, lo.value, up.value));
        rows.push(vec![
            kernel.phi.family_name().to_string(),
            kernel.phi.params_string(),
            num(r),
            num(lo.value),
            num(lo.error),
            num(up.value),
            num(up.error),
        ]);
    }
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted
        .windows(2)
        .all(|w| w[0].0 == w[1].0 || (w[1].1 > w[0].1 && w[1].2 < w[0].2));
    let out = artifacts(common, &s)?;
    out.csv(
        "moments.csv",
        &["family", "params", "R", "lowerC", "lowerC_err", "upperC", "upperC_err"],
        &rows,
    )?;
    out.json("moments.json", json!({ "rows": rows.len(), "monotone": monotone }))?;
    if !monotone {
        return Err(Failure::Property("C̲ must increase and C̄ decrease in R".into()));
    }
    Ok(())
}

pub fn bounds(common: &Common, n: Option<usize>, cases: Option<usize>) -> Result<(), Failure> {
    let mut s = Settings::load(common)?;
    let kernel = s.kernel()?;
    let n = dimension(&mut s, n, 5)?;
    let tol = s.tol(common, 1e-10)?;
    let cases = cases.unwrap_or(200);
    s.note("cases", cases);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut rows = Vec::new();
    let mut all_pass = true;
    for _ in 0..cases {
        let r = 10f64.powf(rng.random_range(-3.0..3.0));
        let t = rng.random_range(0.01..0.99);
        let m = moment_inequalities(&kernel, r, t, tol)?;
        all_pass &= m.all_pass();
        for c in [m.lower, m.upper, m.ratio] {
            rows.push(vec![
                num(r),
                num(t),
                c.name.to_string(),
                num(c.value),
                num(c.error),
                num(c.lower_bound),
                num(c.upper_bound),
                c.pass.to_string(),
            ]);
        }
    }
    let scaling = check_weak_scaling(&kernel.phi, &kernel.cert, &RatioGrid::default())?;
    let cphi = normalizer::cphi_direct(&kernel, n, 1e-10)?;
    let envelope = bound_check(&kernel, &cphi, &geometric_radii(1e-3, 1e3, 25), tol)?;
    let out = artifacts(common, &s)?;
    out.csv(
        "bounds.csv",
        &["R", "t", "check", "value", "err", "lower_bound", "upper_bound", "pass"],
        &rows,
    )?;
    out.json(
        "bounds.json",
        json!({
            "inequalities_pass": all_pass,
            "certificate": {
                "certified": scaling.certified(),
                "pairs_checked": scaling.pairs_checked,
                "violations": scaling.violations.len(),
                "empirical_sigma_lower": scaling.empirical_sigma_lower,
                "empirical_sigma_upper": scaling.empirical_sigma_upper,
                "empirical_a": scaling.empirical_a,
            },
            "envelope": envelope,
        }),
    )?;
    if !all_pass {
        return Err(Failure::Property("a moment inequality failed (see bounds.csv)".into()));
    }
    if !scaling.certified() {
        return Err(Failure::Property(format!(
            "weak-scaling certificate violated at {} pairs",
            scaling.violations.len()
        )));
    }
    if !envelope.lower_holds {
        return Err(Failure::Property("C_φ(C̲+C̄) falls below the lower envelope".into()));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn asymptotics(
    common: &Common,
    family: Option<String>,
    target: Option<String>,
    n: Option<usize>,
    k_min: Option<u32>,
    k_max: Option<u32>,
    quantity: Option<String>,
) -> Result<(), Failure> {
    let mut s = Settings::load(common)?;
    let family_name = family.unwrap_or_else(|| "power".into());
    let target_name = target.unwrap_or_else(|| "to-2".into());
    let quantity = quantity.unwrap_or_else(|| "moment".into());
    let fam = SequenceFamily::parse(&family_name)?;
    let tgt = Target::parse(&target_name)?;
    let (k_min, k_max) = (k_min.unwrap_or(1), k_max.unwrap_or(12));
    s.note("sequence", family_name.as_str());
    s.note("target", tgt.as_str());
    s.note("quantity", quantity.as_str());
    s.note("k_min", k_min);
    s.note("k_max", k_max);
    if k_min > k_max {
        return Err(Failure::Config("k_min must not exceed k_max".into()));
    }
    let seq = KernelSequence::new(fam, tgt, (k_min..=k_max).collect())?;
    let report = match quantity.as_str() {
        "moment" => {
            let n = dimension(&mut s, n, 5)?;
            let tol = s.tol(common, 1e-10)?;
            let r = s.positive("R", None, 1.0)?;
            match tgt {
                Target::ToTwo => asymptotics::limit_product_lower(&seq, n, r, tol)?,
                Target::ToZero => asymptotics::limit_product_upper(&seq, n, r, tol)?,
            }
        }
        "operator" => {
            let n = dimension(&mut s, n, 3)?;
            let tol = s.tol(common, 1e-7)?;
            asymptotics::operator_limit(&seq, n, &vec![0.0; n], tol)?
        }
        other => return Err(Failure::Config(format!("unknown quantity {other:?}"))),
    };
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), num(r.value), num(r.target), num(r.deviation)])
        .collect();
    let out = artifacts(common, &s)?;
    out.csv("asymptotics.csv", &["k", "value", "target", "deviation"], &rows)?;
    out.json(
        "asymptotics.json",
        json!({
            "quantity": report.quantity,
            "n": report.n,
            "final_deviation": report.final_deviation,
            "threshold": report.threshold,
            "passed": report.passed(),
        }),
    )?;
    if !report.passed() {
        return Err(Failure::Property(format!(
            "final deviation {} exceeds {}",
            report.final_deviation, report.threshold
        )));
    }
    Ok(())
}

fn parse_points(text: &str, n: usize) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|p| {
            let v = parse_list("points", p)?;
            if v.len() != n {
                return Err(Failure::Config(format!("point {p:?} has {} coordinates, n = {n}", v.len())));
            }
            Ok(v)
        })
        .collect()
}

pub fn operator(
    common: &Common,
    function: Option<String>,
    points: Option<String>,
    kind: Option<String>,
    n: Option<usize>,
) -> Result<(), Failure> {
    let mut s = Settings::load(common)?;
    let kernel = s.kernel()?;
    let n = dimension(&mut s, n, 3)?;
    let tol = s.tol(common, 1e-8)?;
    let function = function.unwrap_or_else(|| "cos".into());
    let kind = kind.unwrap_or_else(|| "linear".into());
    s.note("function", function.as_str());
    s.note("kind", kind.as_str());
    let lambda = s.positive("lambda", None, 1.0)?;
    let big_lambda = s.positive("Lambda", None, 1.0)?;
    let ext = ExtremalParams::new(lambda, big_lambda)?;
    let radius = s.positive("R", None, 1.0)?;
    let u: Box<dyn PointFunction> = match function.as_str() {
        "cos" => Box::new(Cosine { n }),
        "bump" => Box::new(Bump { n }),
        "quadratic-cap" => Box::new(QuadraticCap {
            n,
            height: 1.0,
            radius,
        }),
        "w_R" => Box::new(QuadraticCap::w_r(n, radius)),
        "barrier" => {
            let kappa1 = s.positive("kappa1", None, 0.5)?;
            let p = barrier::select_p(n, lambda, big_lambda)?;
            Box::new(Phi1::new(n, p, kappa1 / 16.0, radius))
        }
        other => return Err(Failure::Config(format!("unknown function {other:?}"))),
    };
    let default_points = if function == "barrier" {
        let mut x = vec![0.0; n];
        x[0] = 0.5 * radius;
        x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
    } else {
        vec!["0"; n].join(",")
    };
    let points_text = points.unwrap_or(default_points);
    s.note("points", points_text.as_str());
    let pts = parse_points(&points_text, n)?;
    let op = Operator::new(
        &kernel,
        n,
        OperatorOptions {
            tol,
            ..Default::default()
        },
    )?;
    let mut rows = Vec::new();
    for x in &pts {
        let v = match kind.as_str() {
            "linear" => op.linear_apply(u.as_ref(), x)?,
            "plus" => op.pucci_plus(u.as_ref(), x, &ext)?,
            "minus" => op.pucci_minus(u.as_ref(), x, &ext)?,
            other => return Err(Failure::Config(format!("unknown kind {other:?}"))),
        };
        let coords: Vec<String> = x.iter().map(|c| num(*c)).collect();
        rows.push(vec![
            coords.join(" "),
            num(v.value),
            num(v.error),
            num(v.inner),
            num(v.annulus),
            num(v.tail),
        ]);
    }
    let out = artifacts(common, &s)?;
    out.csv("operator.csv", &["x", "value", "err", "inner", "annulus", "tail"], &rows)?;
    Ok(())
}

pub fn barrier(
    common: &Common,
    n: Option<usize>,
    lambda: Option<f64>,
    big_lambda: Option<f64>,
    radius: Option<f64>,
    kappa1: Option<f64>,
) -> Result<(), Failure> {
    let mut s = Settings::load(common)?;
    let kernel = s.kernel()?;
    let n = dimension(&mut s, n, 3)?;
    let tol = s.tol(common, 1e-6)?;
    let lambda = s.positive("lambda", lambda, 1.0)?;
    let big_lambda = s.positive("Lambda", big_lambda, 1.0)?;
    let radius = s.positive("R", radius, 1.0)?;
    let kappa1 = s.positive("kappa1", kappa1, 0.5)?;
    let ext = ExtremalParams::new(lambda, big_lambda)?;
    let p = barrier::select_p(n, lambda, big_lambda)?;
    let search = barrier::find_kappa0(&kernel, n, &ext, kappa1, radius, p, tol)?;
    let params = barrier::BarrierParams::new(n, ext, radius, kappa1, p, search.kappa0, kernel.cert.sigma0)?;
    let capped = CappedBarrier::from_params(&params)?;
    let check = barrier::verify_capped(&capped, n)?;
    let r_k: Vec<f64> = (0..4)
        .map(|k| barrier::r_k(n, kernel.cert.sigma_lower, radius, k))
        .collect();
    let rows: Vec<Vec<String>> = search
        .evidence
        .iter()
        .map(|r| vec![num(r.r0), num(r.m_minus), num(r.err), num(r.i1), num(r.i2_plus_i3)])
        .collect();
    let out = artifacts(common, &s)?;
    out.csv("barrier_evidence.csv", &["R0", "Mminus", "err", "I1", "I2plusI3"], &rows)?;
    out.json(
        "barrier.json",
        json!({
            "p": p,
            "kappa0": search.kappa0,
            "sphere_margin": barrier::sphere_margin(n, lambda, big_lambda, p),
            "attempts": search.attempts,
            "mesh_stable": search.mesh_stable,
            "params": params,
            "capped": capped,
            "capped_check": check,
            "r_k": r_k,
        }),
    )?;
    if !search.mesh_stable {
        return Err(Failure::Property("M⁻Φ₁ evidence changes sign under refinement".into()));
    }
    if !check.passed {
        return Err(Failure::Property("capped barrier checks failed (see barrier.json)".into()));
    }
    Ok(())
}

fn parse_data(text: &str, radius: f64) -> Result<Vec<ExteriorData>, Failure> {
    text.split(';')
        .map(|datum| {
            let mut d = ExteriorData::constant(0.0);
            for item in datum.split('+') {
                let (kind, value) = item
                    .trim()
                    .split_once(':')
                    .ok_or_else(|| Failure::Config(format!("data item {item:?} should be kind:value")))?;
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| Failure::Config(format!("data item {item:?}: bad number")))?;
                match kind {
                    "bump" => d.bumps.push(DataBump {
                        center: v * radius,
                        width: radius,
                        height: 1.0,
                    }),
                    "const" => d.constant += v,
                    other => return Err(Failure::Config(format!("unknown data kind {other:?}"))),
                }
            }
            Ok(d)
        })
        .collect()
}

fn report_row(r: &HarnackReport) -> Vec<String> {
    let mut row = vec![
        r.kernel.clone(),
        r.data.clone(),
        num(r.h),
        num(r.radius),
        num(r.sup),
        num(r.inf),
        num(r.quotient),
        num(r.c0),
        num(r.rhs_scale),
        num(r.c_emp),
        r.level_sets.epsilon.map(num).unwrap_or_default(),
        r.level_sets.r_squared.map(num).unwrap_or_default(),
    ];
    row.extend(r.holder.iter().map(|p| num(p.scaled)));
    row
}

pub fn harnack(
    common: &Common,
    family: Option<String>,
    sigma_grid: Option<String>,
    radius: Option<f64>,
    h: Option<f64>,
    data: Option<String>,
) -> Result<(), Failure> {
    let mut s = Settings::load(common)?;
    let family = family
        .or_else(|| s.kernel_key("family").map(str::to_string))
        .unwrap_or_else(|| "power".into());
    let grid_text = sigma_grid.unwrap_or_else(|| "0.5,1,1.5,1.9".into());
    let sigmas = parse_list("sigma_grid", &grid_text)?;
    s.note("family", family.as_str());
    s.note("sigma_grid", grid_text.as_str());
    let radius = s.positive("R", radius, 1.0)?;
    let h = s.positive("h", h, radius / 200.0)?;
    let tol = s.tol(common, 1e-10)?;
    let data_text = data.unwrap_or_else(|| "bump:3".into());
    s.note("data", data_text.as_str());
    let data = parse_data(&data_text, radius)?;
    let floor = sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    let kernels = sigmas
        .iter()
        .map(|&sig| -> Result<Kernel, Failure> {
            Ok(match family.as_str() {
                "power" => Kernel::natural(ScalingFunction::power(sig)?, Some(floor))?,
                "sum_powers" => Kernel::natural(ScalingFunction::sum_powers(0.5 * sig, sig)?, Some(0.5 * floor))?,
                other => return Err(Failure::Config(format!("unknown family {other:?}"))),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = HarnackConfig {
        h,
        tol,
        ..HarnackConfig::standard(radius)
    };
    harnack::Grid1D::new(radius, h, cfg.truncation)?;
    let summary = harnack::harnack_sweep(&kernels, &data, &cfg);
    let mut header: Vec<String> = [
        "kernel", "data", "h", "R", "sup", "inf", "quotient", "C0", "rhs_scale", "C_emp", "epsilon", "epsilon_r2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(harnack::HOLDER_ALPHAS.iter().map(|a| format!("holder_{a}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    let mut cases = Vec::new();
    for c in &summary.cases {
        match &c.case {
            Some(case) => {
                rows.push(report_row(&case.coarse));
                rows.push(report_row(&case.fine));
                cases.push(json!({
                    "kernel": c.kernel,
                    "data": c.data,
                    "quotient": case.coarse.quotient,
                    "quotient_change": case.quotient_change,
                    "holder_change": case.holder_change,
                    "epsilon": case.coarse.level_sets.epsilon,
                    "c_emp": case.coarse.c_emp,
                }));
            }
            None => cases.push(json!({ "kernel": c.kernel, "data": c.data, "error": c.error })),
        }
    }
    let out = artifacts(common, &s)?;
    out.csv("harnack.csv", &header, &rows)?;
    out.json(
        "harnack.json",
        json!({
            "cases": Value::Array(cases),
            "max_c_emp": summary.max_c_emp,
            "median_c_emp": summary.median_c_emp,
            "max_over_median": summary.max_over_median,
            "uniformity_factor": harnack::UNIFORMITY_FACTOR,
            "uniform": summary.uniform,
            "quotients_stable": summary.quotients_stable,
            "holder_stable": summary.holder_stable,
            "epsilon_positive": summary.epsilon_positive,
            "failures": summary.failures,
            "passed": summary.passed(),
        }),
    )?;
    if summary.failures > 0 {
        return Err(Failure::Tolerance(format!("{} sweep cases failed", summary.failures)));
    }
    if !summary.passed() {
        return Err(Failure::Property("Harnack sweep properties failed (see harnack.json)".into()));
    }
    Ok(())
}
