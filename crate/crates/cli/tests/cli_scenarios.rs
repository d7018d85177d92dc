use std::process::{Command, Output};

use hybrid_witness::numeric::minimize_scalar;
use hybrid_witness::witness::{closed_form_hybrid, HybridTag, WitnessCoefficients};
use hybrid_witness_cli::{
    cmd_gaussian, cmd_hybrid, cmd_sweep, cmd_thermal, CoefficientChoice, Method, Scenario, SweepRange, SweepRequest,
    SweepResult, SweepSettings,
};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-witness"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn request(scenario: Scenario, s: SweepSettings) -> SweepRequest {
    SweepRequest::resolve(Some(scenario), s).unwrap()
}

fn range(s: &str) -> Option<SweepRange> {
    Some(s.parse().unwrap())
}

fn curve<'a>(results: &'a [SweepResult], name: &str, method: Method) -> &'a SweepResult {
    results
        .iter()
        .find(|r| r.curve == name && r.method == method)
        .unwrap_or_else(|| panic!("no curve {name}"))
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = format!("{}/schema/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

// ------------------------------------------------------------------ gaussian

#[test]
fn damped_curve_stays_inside_envelope() {
    let req = request(Scenario::Gaussian, SweepSettings { y: Some(1.2), range: range("-4:4:301"), ..Default::default() });
    let out = cmd_gaussian(&req).unwrap();
    let one = curve(&out, "psi1", Method::ClosedForm).values();
    let two = curve(&out, "psi2", Method::ClosedForm).values();
    assert_eq!(one.len(), 301);
    for (a, b) in one.iter().zip(&two) {
        assert!((b - 1.0).abs() <= (a - 1.0).abs() + 1e-15);
    }
}

#[test]
fn well_separated_state_three_never_detects() {
    let req = request(Scenario::Gaussian, SweepSettings { y: Some(10.0), range: range("-4:4:801"), ..Default::default() });
    let out = cmd_gaussian(&req).unwrap();
    let min = curve(&out, "psi3", Method::ClosedForm).values().into_iter().fold(f64::INFINITY, f64::min);
    // The exact minimum is −2e^{−25} ≈ −2.8e−11 at x = 0.
    assert!(min >= -1e-10, "min = {min:e}");
}

#[test]
fn nearly_overlapping_wells_make_three_track_two() {
    let req = request(Scenario::Gaussian, SweepSettings { y: Some(0.05), range: range("-4:4:8001"), ..Default::default() });
    let out = cmd_gaussian(&req).unwrap();
    let two = curve(&out, "psi2", Method::ClosedForm).values();
    let three = curve(&out, "psi3", Method::ClosedForm).values();
    let worst = two.iter().zip(&three).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "max |W3 - W2| = {worst:e}");
}

#[test]
fn gaussian_oracle_overlay_matches_closed_form() {
    let req = request(
        Scenario::Gaussian,
        SweepSettings { y: Some(1.2), range: range("-4:4:41"), oracle: Some(true), ..Default::default() },
    );
    let out = cmd_gaussian(&req).unwrap();
    assert_eq!(out.len(), 6);
    for name in ["psi1", "psi2", "psi3"] {
        let a = curve(&out, name, Method::ClosedForm).values();
        let b = curve(&out, name, Method::Oracle).values();
        let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-6, "{name}: {dev:e}");
    }
}

// ------------------------------------------------------------------- thermal

fn thermal_defaults() -> Vec<SweepResult> {
    cmd_thermal(&request(Scenario::Thermal, SweepSettings::default())).unwrap()
}

#[test]
fn thermal_curves_start_at_minus_two() {
    let out = thermal_defaults();
    assert_eq!(out.len(), 3);
    for r in &out {
        assert_eq!(r.points.len(), 301);
        let v = r.value_at(0.0).unwrap();
        assert!((v + 2.0).abs() < 1e-10, "{}: {v}", r.curve);
    }
}

fn negativity_width(r: &SweepResult) -> f64 {
    let neg: Vec<f64> = r.points.iter().filter(|p| p.value < 0.0).map(|p| p.parameter).collect();
    neg.last().unwrap() - neg.first().unwrap()
}

#[test]
fn thermal_negativity_window_shrinks_with_temperature() {
    let out = thermal_defaults();
    let widths: Vec<f64> = ["delta=100", "delta=1", "delta=0.01"]
        .iter()
        .map(|n| negativity_width(curve(&out, n, Method::ClosedForm)))
        .collect();
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
}

#[test]
fn cold_curve_is_the_zero_temperature_limit() {
    let out = thermal_defaults();
    let c = WitnessCoefficients::PLUS_PLUS_MINUS;
    for p in &curve(&out, "delta=100", Method::ClosedForm).points {
        let q = p.parameter;
        let limit = 1.0 - (-0.5 * q * q).exp() * (c.x + c.y - c.z) * q.cos();
        assert!((p.value - limit).abs() < 1e-4);
    }
}

#[test]
fn thermal_oracle_overlay_matches_closed_form() {
    let req = request(
        Scenario::Thermal,
        SweepSettings { range: range("-3:3:13"), delta: vec![1.0, 0.01], oracle: Some(true), ..Default::default() },
    );
    let out = cmd_thermal(&req).unwrap();
    for name in ["delta=1", "delta=0.01"] {
        let a = curve(&out, name, Method::ClosedForm).values();
        let b = curve(&out, name, Method::Oracle).values();
        let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-6, "{name}: {dev:e}");
    }
}

// -------------------------------------------------------------------- hybrid

#[test]
fn phi2_curve_has_symmetric_minima_and_zero_origin() {
    let out = cmd_hybrid(&request(Scenario::Hybrid, SweepSettings::default())).unwrap();
    let phi2 = curve(&out, "phi2", Method::ClosedForm);
    assert!(phi2.value_at(0.0).unwrap().abs() < 1e-12);
    let n = phi2.points.len();
    let argmin = |ps: &[hybrid_witness_cli::SweepPoint]| {
        ps.iter().min_by(|a, b| a.value.total_cmp(&b.value)).copied().unwrap()
    };
    let left = argmin(&phi2.points[..n / 2]);
    let right = argmin(&phi2.points[n / 2 + 1..]);
    assert!(left.value < 0.0 && right.value < 0.0);
    assert!((left.parameter + right.parameter).abs() < 1e-12);
    // Off-grid refinement of the minima.
    let c = WitnessCoefficients::PLUS_PLUS_MINUS;
    let f = |q: f64| closed_form_hybrid(&HybridTag::Phi2, q, 1.0, c).unwrap();
    let (qp, _) = minimize_scalar(f, 0.05, 3.0, 1e-12);
    let (qm, _) = minimize_scalar(f, -3.0, -0.05, 1e-12);
    assert!((qp + qm).abs() < 1e-6);
}

#[test]
fn displaced_phi1_detects_on_a_smaller_set() {
    let out = cmd_hybrid(&request(Scenario::Hybrid, SweepSettings::default())).unwrap();
    let zero = curve(&out, "phi1(alpha=0)", Method::ClosedForm);
    let one = curve(&out, "phi1(alpha=1)", Method::ClosedForm);
    let mut strictly = false;
    for (a, b) in zero.points.iter().zip(&one.points) {
        if b.value < 0.0 {
            assert!(a.value < 0.0, "alpha = 1 detects at {} where alpha = 0 does not", b.parameter);
        }
        strictly |= a.value < 0.0 && b.value >= 0.0;
    }
    assert!(strictly);
}

#[test]
fn phi3_below_threshold_does_not_detect() {
    let out = cmd_hybrid(&request(Scenario::Hybrid, SweepSettings { p: Some(0.4), ..Default::default() })).unwrap();
    let v = curve(&out, "phi3(p=0.4)", Method::ClosedForm).value_at(0.0).unwrap();
    assert!((v - 0.4).abs() < 1e-12, "{v}");
}

#[test]
fn hybrid_oracle_overlay_matches_closed_form() {
    let req = request(
        Scenario::Hybrid,
        SweepSettings { range: range("-3:3:13"), oracle: Some(true), alpha_im: Some(0.5), ..Default::default() },
    );
    let out = cmd_hybrid(&req).unwrap();
    assert_eq!(out.len(), 8);
    for pair in out.chunks(2) {
        assert_eq!(pair[0].curve, pair[1].curve);
        let dev = pair[0]
            .values()
            .iter()
            .zip(pair[1].values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-6, "{}: {dev:e}", pair[0].curve);
    }
}

#[test]
fn auto_coefficients_never_do_worse_than_fixed() {
    for scenario in [Scenario::Gaussian, Scenario::Thermal, Scenario::Hybrid, Scenario::Custom] {
        let fixed = cmd_sweep(&request(scenario, SweepSettings { range: range("-3:3:31"), ..Default::default() })).unwrap();
        let auto = cmd_sweep(&request(
            scenario,
            SweepSettings { range: range("-3:3:31"), c: Some(CoefficientChoice::Auto), ..Default::default() },
        ))
        .unwrap();
        for (f, a) in fixed.iter().zip(&auto) {
            for (pf, pa) in f.points.iter().zip(&a.points) {
                assert!(pa.value <= pf.value + 1e-12, "{scenario} {}: {} > {}", f.curve, pa.value, pf.value);
            }
        }
    }
}

#[test]
fn custom_scenario_agrees_with_oracle() {
    for settings in [
        SweepSettings { alpha_re: Some(0.6), alpha_im: Some(-0.4), ..Default::default() },
        SweepSettings { delta: vec![2.0], ..Default::default() },
    ] {
        let req = request(Scenario::Custom, SweepSettings { range: range("-3:3:13"), oracle: Some(true), ..settings });
        let out = cmd_sweep(&req).unwrap();
        assert_eq!(out.len(), 2);
        let dev = out[0]
            .values()
            .iter()
            .zip(out[1].values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "{}: {dev:e}", out[0].curve);
    }
}

// ------------------------------------------------------------------ requests

#[test]
fn flags_override_config_which_overrides_defaults() {
    let file = SweepSettings::from_json(r#"{"y": 10.0, "range": "-1:1:11", "c": "auto"}"#).unwrap();
    let flags = SweepSettings { y: Some(2.0), ..Default::default() };
    let req = request(Scenario::Gaussian, flags.over(file.clone()));
    assert_eq!(req.y, 2.0);
    assert_eq!(req.range.steps, 11);
    assert_eq!(req.c, CoefficientChoice::Auto);
    let req = request(Scenario::Gaussian, file);
    assert_eq!(req.y, 10.0);
    let req = request(Scenario::Thermal, SweepSettings::default());
    assert_eq!(req.deltas, vec![100.0, 1.0, 0.01]);
    assert_eq!((req.range.min, req.range.max, req.range.steps), (-3.0, 3.0, 301));
}

#[test]
fn bad_requests_are_rejected() {
    assert!("1:-1:10".parse::<SweepRange>().is_err());
    assert!("0:1:1".parse::<SweepRange>().is_err());
    assert!("0:inf:10".parse::<SweepRange>().is_err());
    assert!("0:1:x".parse::<SweepRange>().is_err());
    assert!("2,0,0".parse::<CoefficientChoice>().is_err());
    assert!(SweepSettings::from_json(r#"{"colour": 1}"#).is_err());
    assert!(SweepRequest::resolve(None, SweepSettings::default()).is_err());
    assert!(SweepRequest::resolve(Some(Scenario::Thermal), SweepSettings { delta: vec![-1.0], ..Default::default() }).is_err());
    assert!(SweepRequest::resolve(Some(Scenario::Gaussian), SweepSettings { y: Some(0.0), ..Default::default() }).is_err());
}

// -------------------------------------------------------------------- binary

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["gaussian", "--range", "0:1:1"],
        vec!["thermal", "--delta", "0"],
        vec!["hybrid", "--p", "1.5"],
        vec!["hybrid", "--alpha-re", "9"],
        vec!["gaussian", "--format", "xml"],
        vec!["sweep"],
        vec!["verify", "--suite", "nonsense"],
        vec!["launch"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let args = ["hybrid", "--seed", "7", "--c", "auto"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,curve,value,method"));
    assert_eq!(lines.count(), 4 * 301);
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fig.json");
    let out = dir.path().join("fig.json.out");
    std::fs::write(&config, r#"{"scenario": "thermal", "delta": [5.0], "range": "-2:2:5", "format": "json"}"#).unwrap();
    let status = run(&["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--range", "-1:1:3"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let doc: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(schema("sweep.schema.json").is_valid(&doc));
    assert_eq!(doc["scenario"], "thermal");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    assert_eq!(doc["rows"][0]["curve"], "delta=5");
}

#[test]
fn every_emitted_value_is_finite() {
    for sub in ["gaussian", "thermal", "hybrid"] {
        let out = run(&[sub, "--format", "json", "--range", "-6:6:61"]);
        assert!(out.status.success());
        let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(schema("sweep.schema.json").is_valid(&doc));
        for row in doc["rows"].as_array().unwrap() {
            assert!(row["value"].as_f64().unwrap().is_finite());
        }
    }
}

const QUICK: [&str; 8] = [
    "--grid-points",
    "512",
    "--sweep-points",
    "31",
    "--random-samples",
    "50",
    "--factorization-samples",
    "20",
];

#[test]
fn quick_verification_passes_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let mut args = vec!["verify", "--seed", "42", "--out", report.to_str().unwrap()];
    args.extend(QUICK);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    let validator = schema("verification_report.schema.json");
    if let Err(e) = validator.validate(&doc) {
        panic!("schema violation: {e}");
    }
    assert!(doc["suites"].as_array().unwrap().len() >= 9);
    assert_eq!(doc["passed"], true);
}

#[test]
fn injected_thermal_sign_error_fails_verification() {
    let mut args = vec!["verify", "--inject-fault", "flip-thermal-sign", "--suite", "thermal_closed_form"];
    args.extend(QUICK);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["passed"], false);
    assert!(schema("verification_report.schema.json").is_valid(&doc));
}
