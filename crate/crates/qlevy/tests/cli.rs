use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qlevy::format::{parse_input, parse_law, to_json, Input, LawDoc, TripletDoc};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn qlevy(args: &[&str]) -> Output {
    qlevy_env(args, &[])
}

fn qlevy_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qlevy"));
    cmd.args(args);
    for key in ["QLEVY_TOL", "QLEVY_N_INIT", "QLEVY_N_MAX", "QLEVY_MAX_DEPTH", "QLEVY_ZERO_TOL", "QLEVY_THREADS"] {
        cmd.env_remove(key);
    }
    cmd.envs(env.iter().copied());
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn lambda(doc: &Value, k: i64) -> f64 {
    doc["lambdas"]
        .as_array()
        .unwrap()
        .iter()
        .find(|l| l["freq"][0].as_i64() == Some(k))
        .map_or(0.0, |l| l["value"].as_f64().unwrap())
}

#[test]
fn triplet_of_skewed_bernoulli_has_negative_weight() {
    let out = qlevy(&["triplet", path(&fixture("bernoulli_08.json"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json_of(&out);
    assert_eq!(doc["gamma_coords"][0].as_i64(), Some(0));
    assert!((lambda(&doc, 1) - 0.25).abs() < 1e-9);
    assert!((lambda(&doc, 2) + 0.03125).abs() < 1e-9);
    assert!(doc["tail_bound"].as_f64().unwrap() < 1e-9);
}

#[test]
fn fair_coin_has_a_zero_at_pi() {
    let out = qlevy(&["check-s", path(&fixture("bernoulli_half.json"))]);
    assert_eq!(code(&out), 1);
    let doc = json_of(&out);
    assert_eq!(doc["verdict"], "ZeroFound");
    assert_eq!(doc["kind"], "RealZero");
    assert!((doc["t"].as_f64().unwrap() - PI).abs() < 1e-6);
}

#[test]
fn tv_of_a_law_with_itself_is_zero() {
    let a = fixture("two_generator.json");
    let out = qlevy(&["tv", path(&a), path(&a)]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["tv"].as_f64(), Some(0.0));
}

#[test]
fn dominant_law_is_certified() {
    let out = qlevy(&["check-s", path(&fixture("bernoulli_08.json"))]);
    assert_eq!(code(&out), 0);
    let doc = json_of(&out);
    assert_eq!(doc["verdict"], "Certified");
    let mu = doc["mu"].as_f64().unwrap();
    assert!(mu > 0.0 && mu <= 0.6 + 1e-12);
}

#[test]
fn undecided_separation_exits_with_two() {
    let law = r#"{"lattice": {"offset": 0, "span": 1, "masses": [0.5000001, 0.4999999]}}"#;
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("near_fair.json");
    std::fs::write(&file, law).unwrap();
    let out = qlevy(&["check-s", path(&file), "--max-depth", "2"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json_of(&out)["verdict"], "Undecided");
    let out = qlevy(&["triplet", path(&file), "--max-depth", "2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("SpectralError::SeparationUndecided"));
}

#[test]
fn h_law_is_outside_the_separated_class() {
    let h = fixture("h_law.json");
    let out = qlevy(&["check-s", path(&h)]);
    assert_eq!(code(&out), 1);
    let doc = json_of(&out);
    assert_eq!(doc["kind"], "TorusInfimum");
    assert_eq!(doc["torus_dim"].as_u64(), Some(2));
    let out = qlevy(&["triplet", path(&h)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("SpectralError::NotSeparated"));
    assert!(out.stdout.is_empty());
}

#[test]
fn two_generator_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let law = fixture("two_generator.json");
    let t = dir.path().join("t.json");
    let back = dir.path().join("back.json");
    let curves = dir.path().join("curves.csv");
    let out = qlevy(&["triplet", path(&law), "-o", path(&t), "--emit-curves", path(&curves), "--samples", "64"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&curves).unwrap().lines().count(), 65);
    assert_eq!(code(&qlevy(&["reconstruct", path(&t), "-o", path(&back)])), 0);
    let out = qlevy(&["tv", path(&back), path(&law)]);
    assert!(json_of(&out)["tv"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn rational_lattice_keeps_exact_shift() {
    let out = qlevy(&["triplet", path(&fixture("rational_lattice.json"))]);
    assert_eq!(code(&out), 0);
    let doc = json_of(&out);
    assert_eq!(doc["basis"]["generators"][0], serde_json::json!({"num": 1, "den": 6}));
    assert_eq!(doc["gamma_coords"][0].as_i64(), Some(7));
    for l in doc["lambdas"].as_array().unwrap() {
        assert_eq!(l["freq"][0].as_i64().unwrap() % 4, 0);
    }
}

#[test]
fn square_root_of_skewed_bernoulli_is_signed() {
    let out = qlevy(&["power", path(&fixture("bernoulli_08.json")), "--s", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json_of(&out);
    assert_eq!(doc["classification"], "Signed");
    let atom2 = doc["measure"]["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["coords"][0].as_i64() == Some(2))
        .unwrap()["mass"]
        .as_f64()
        .unwrap();
    // Binomial series: (0.8 + 0.2 z)^{1/2} at z^2 is C(1/2, 2) 0.8^{-3/2} 0.2^2.
    let oracle = (0.5 * -0.5 / 2.0) * 0.8f64.powf(-1.5) * 0.04;
    assert!((atom2 - oracle).abs() < 1e-7);
}

#[test]
fn classification_of_infinite_divisibility() {
    let out = qlevy(&["classify-id", path(&fixture("bernoulli_08.json"))]);
    assert_eq!(code(&out), 0);
    let doc = json_of(&out);
    assert_eq!(doc["infinitely_divisible"], false);
    assert!(!doc["negative_lambdas"].as_array().unwrap().is_empty());
    let out = qlevy(&["classify-id", path(&fixture("poisson_triplet.json"))]);
    assert_eq!(json_of(&out)["infinitely_divisible"], true);
}

#[test]
fn converging_family_holds_and_short_prefix_is_inconclusive() {
    let limit = fixture("bernoulli_08.json");
    let family = fixture("converging_family.json");
    let out = qlevy(&["converge-check", "--limit", path(&limit), path(&family)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json_of(&out);
    assert_eq!(doc["verdict"], "Holds");
    assert_eq!(doc["trend_agreement"], true);

    let all: Vec<Value> = serde_json::from_str(&std::fs::read_to_string(&family).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.json");
    std::fs::write(&short, serde_json::to_string(&all[..6]).unwrap()).unwrap();
    let out = qlevy(&["converge-check", "--limit", path(&limit), path(&short)]);
    assert_eq!(code(&out), 2);
    assert_eq!(json_of(&out)["verdict"], "Inconclusive");
}

#[test]
fn g_n_family_fails_compactness() {
    let dir = tempfile::tempdir().unwrap();
    let trends = dir.path().join("trends.csv");
    let out = qlevy(&["compact-check", path(&fixture("g_n_family.json")), "--emit-trends", path(&trends)]);
    assert_eq!(code(&out), 1);
    let doc = json_of(&out);
    assert_eq!(doc["sup_pass"], false);
    assert_eq!(doc["certified_from"].as_u64(), Some(1));
    let csv = std::fs::read_to_string(&trends).unwrap();
    assert!(csv.starts_with("n,gamma,ell1_norm,running_sup\n"));
    assert_eq!(csv.lines().count(), 51);
    assert!(stderr(&out).contains("running_sup"));
}

#[test]
fn converging_family_is_stochastically_compact() {
    let out = qlevy(&["stoch-check", path(&fixture("converging_family.json"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json_of(&out);
    assert_eq!(doc["passes"], true);
    assert_eq!(doc["nondegenerate_pass"], true);
}

#[test]
fn curves_of_geometric_law() {
    let out = qlevy(&["curves", path(&fixture("geometric_half.json")), "--samples", "257"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 257);
    let min = rows.iter().min_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
    assert!((min[0] - PI).abs() < 1e-12);
    assert!((min[3] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn curves_of_point_mass_wind_linearly() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("delta3.json");
    std::fs::write(&file, r#"{"atoms": [{"coords": [3], "mass": 1.0}]}"#).unwrap();
    let out = qlevy(&["curves", path(&file), "--t-max", "6.283185307179586", "--samples", "100", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = json_of(&out);
    let last = rows.as_array().unwrap().last().unwrap();
    assert!((last["arg"].as_f64().unwrap() - 6.0 * PI).abs() < 1e-12);
}

#[test]
fn outputs_are_byte_stable() {
    let law = fixture("two_generator.json");
    let a = qlevy(&["triplet", path(&law)]);
    let b = qlevy(&["triplet", path(&law)]);
    assert_eq!(a.stdout, b.stdout);
    let limit = fixture("bernoulli_08.json");
    let family = fixture("converging_family.json");
    let one = qlevy(&["converge-check", "--threads", "1", "--limit", path(&limit), path(&family)]);
    let four = qlevy(&["converge-check", "--threads", "4", "--limit", path(&limit), path(&family)]);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn environment_overrides_defaults() {
    let law = fixture("bernoulli_08.json");
    let out = qlevy_env(&["triplet", path(&law)], &[("QLEVY_N_INIT", "4096")]);
    assert_eq!(json_of(&out)["diagnostics"]["grid"].as_u64(), Some(4096));
    let out = qlevy_env(&["triplet", path(&law)], &[("QLEVY_TOL", "0")]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("ConfigError"));
    // Flags win over the environment.
    let out = qlevy_env(&["triplet", path(&law), "--n-init", "2048"], &[("QLEVY_N_INIT", "4096")]);
    assert_eq!(json_of(&out)["diagnostics"]["grid"].as_u64(), Some(2048));
}

#[test]
fn malformed_inputs_are_hard_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = qlevy(&["check-s", path(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("ParseError"));

    std::fs::write(&bad, r#"{"atoms": [{"coords": [0], "mass": 0.4}]}"#).unwrap();
    let out = qlevy(&["tv", path(&bad), path(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("MeasureError::MassSumNotOne"));

    let out = qlevy(&["tv", path(&fixture("bernoulli_08.json")), path(&fixture("two_generator.json"))]);
    assert!(stderr(&out).contains("MeasureError::BasisMismatch"));
}

#[test]
fn every_fixture_survives_a_file_round_trip() {
    for name in ["bernoulli_08.json", "bernoulli_half.json", "h_law.json", "two_generator.json", "rational_lattice.json", "geometric_half.json"] {
        let law = parse_law(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let text = to_json(&LawDoc::from_law(&law)).unwrap();
        assert_eq!(parse_law(&text).unwrap(), law, "{name}");
        assert_eq!(to_json(&LawDoc::from_law(&parse_law(&text).unwrap())).unwrap(), text);
    }
    let out = qlevy(&["triplet", path(&fixture("geometric_half.json"))]);
    let text = String::from_utf8(out.stdout).unwrap();
    let Input::Triplet(t) = parse_input(&text).unwrap() else { panic!("expected a triplet") };
    assert_eq!(to_json(&TripletDoc::from_triplet(&t)).unwrap(), text);
}
