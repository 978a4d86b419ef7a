use std::path::Path;
use std::process::{Command, Output};

fn varorder(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varorder"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn constant_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = varorder(&out, &["constant", "--set", "family=power", "--set", "sigma=1", "--n", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out.join("constant.json"));
    let c = doc["cphi"].as_f64().unwrap();
    assert!((c - 1.0 / std::f64::consts::PI).abs() < 1e-9);
    assert_eq!(doc["config"]["n"], 1);
    assert!(doc["tool"].as_str().unwrap().starts_with("varorder"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k.cfg");
    std::fs::write(&cfg, "# kernel\nfamily = sum_powers\nsigma_lower = 0.5\nsigma_upper = 1.5\nn = 2\n").unwrap();
    let out = dir.path().join("m");
    let o = varorder(&out, &["moments", "--config", cfg.to_str().unwrap(), "--radii", "0.1,1,10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("moments.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# varorder"));
    assert!(lines.next().unwrap().contains("family=sum_powers"));
    assert_eq!(lines.filter(|l| !l.is_empty()).count(), 4);
}

#[test]
fn bounds_pass_on_sum_powers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let o = varorder(
        &out,
        &["bounds", "--set", "family=sum_powers", "--set", "sigma_lower=0.5", "--set", "sigma_upper=1.5", "--cases", "50"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(out.join("bounds.csv")).unwrap().lines().count();
    assert!(rows > 2 + 50);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    let o = varorder(&out, &["constant", "--set", "famly=power"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn invalid_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = varorder(&dir.path().join("x"), &["constant", "--set", "family=power", "--set", "sigma=2.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = varorder(&dir.path().join("x"), &["constant", "--config", "/nonexistent/k.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn short_sequence_fails_the_limit_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = varorder(&out, &["asymptotics", "--target", "to-2", "--k-max", "2"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(out.join("asymptotics.csv").exists());
}

#[test]
fn cosine_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = varorder(&out, &["operator", "--set", "family=log_upper", "--set", "sigma_lower=0.5", "--set", "sigma_upper=1.5", "--function", "cos", "--points", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("operator.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "value").unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    let v: f64 = row[col].parse().unwrap();
    assert!((v + 1.0).abs() < 1e-5, "{v}");
}

#[test]
fn seeded_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bounds", "--set", "family=log_lower", "--set", "sigma_lower=1", "--set", "sigma_upper=1.5", "--seed", "5", "--cases", "30"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(varorder(&a, &args).status.success());
    assert!(varorder(&b, &args).status.success());
    for name in ["bounds.csv", "bounds.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let c = dir.path().join("c");
    let mut other = args;
    other[8] = "6";
    assert!(varorder(&c, &other).status.success());
    assert_ne!(std::fs::read(a.join("bounds.csv")).unwrap(), std::fs::read(c.join("bounds.csv")).unwrap());
}
