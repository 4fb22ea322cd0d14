use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use hqx_core::family::{build_lambda_h, specialize_h, HilbertFamily};
use hqx_core::{HilbertQExp, ModularQExp, QuadField};
use num_bigint::BigInt;
use serde_json::{json, Value};

fn hqx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqx")).args(args).env_remove("PREC_DEFAULT").output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = hqx(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn err_json(args: &[&str], code: i32) -> Value {
    let out = hqx(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    let doc: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(doc["schema"], "hqx/1");
    doc["error"].clone()
}

fn mantissa_residue(v: &Value, p: u64, digits: u32) -> BigInt {
    let m: BigInt = v["mantissa"].as_str().unwrap().parse().unwrap();
    let val = v["val"].as_i64().unwrap();
    let modulus = BigInt::from(p).pow(digits);
    let shifted = m * BigInt::from(p).pow(val.max(0) as u32);
    ((shifted % &modulus) + &modulus) % modulus
}

fn eigenform_json(dir: &Path, bound: u64) -> Value {
    let b = bound.to_string();
    let f = ok_json(&[
        "eigenform", "--D", "5", "--p", "11", "--prec", "4", "--a-pi", "5", "--a-pi-prime", "7", "--k", "2",
        "--bound", &b, "--seed", "3",
    ]);
    fs::write(dir.join("f.json"), f.to_string()).unwrap();
    f
}

fn run_spec(dir: &Path, spec: &Value) -> Output {
    let path = dir.join("spec.json");
    fs::write(&path, spec.to_string()).unwrap();
    hqx(&["apply", path.to_str().unwrap()])
}

#[test]
fn field_examples() {
    let f = ok_json(&["field", "--D", "5"]);
    assert_eq!(f["disc"], 5);
    assert_eq!(f["fund_unit"], json!([0, 1]));
    assert_eq!(f["has_norm_minus_one"], true);
    let f = ok_json(&["field", "--D", "2"]);
    assert_eq!(f["disc"], 8);
    assert_eq!(f["fund_unit"], json!([1, 1]));
    assert_eq!(err_json(&["field", "--D", "12"], 2)["kind"], "NotSquarefree");
    assert_eq!(err_json(&["field", "--D", "3"], 2)["kind"], "NoUnitOfNormMinusOne");
    assert_eq!(ok_json(&["field", "--D", "3", "--allow-norm-plus-one"])["fund_unit_norm"], 1);
}

#[test]
fn split_and_enumerate() {
    let a = hqx(&["split", "--D", "5", "--p", "11", "--prec", "3"]);
    let b = hqx(&["split", "--D", "5", "--p", "11", "--prec", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let s: Value = serde_json::from_slice(&a.stdout).unwrap();
    let r: u64 = s["sqrt_d_mod"].as_str().unwrap().parse().unwrap();
    assert_eq!((r * r) % 1331, 5);
    assert_eq!(err_json(&["split", "--D", "5", "--p", "7"], 2)["kind"], "PrimeDoesNotSplit");
    let e = ok_json(&["enumerate", "--D", "5", "--bound", "3"]);
    assert_eq!(e["count"], 3);
}

#[test]
fn precision_default_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_hqx"))
        .args(["split", "--D", "5", "--p", "11"])
        .env("PREC_DEFAULT", "4")
        .output()
        .unwrap();
    let s: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["prec"], 4);
    assert_eq!(ok_json(&["split", "--D", "5", "--p", "11"])["prec"], 6);
}

#[test]
fn eigenform_is_seeded() {
    let args = |seed: &'static str| {
        ["eigenform", "--D", "5", "--p", "11", "--prec", "3", "--a-pi", "5", "--a-pi-prime", "-4", "--k", "2", "--bound", "12", "--seed", seed]
    };
    assert_eq!(hqx(&args("1")).stdout, hqx(&args("1")).stdout);
    assert_ne!(hqx(&args("1")).stdout, hqx(&args("2")).stdout);
    let f = HilbertQExp::from_json(&ok_json(&args("1"))).unwrap();
    assert!(!f.coeffs().is_empty());
}

#[test]
fn explicit_seed_table() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = dir.path().join("seeds.json");
    fs::write(&seeds, json!([{"nu": [1, 0], "value": "1"}]).to_string()).unwrap();
    let f = ok_json(&[
        "eigenform", "--D", "5", "--p", "11", "--prec", "3", "--a-pi", "5", "--a-pi-prime", "7", "--k", "2",
        "--bound", "20", "--seeds", seeds.to_str().unwrap(),
    ]);
    let f = HilbertQExp::from_json(&f).unwrap();
    let field = f.field().clone();
    // only the multiples of 1 by powers of pi and pi' survive
    assert_eq!(f.coeff(&field.int(1, 0)).unwrap().residue(3).unwrap(), BigInt::from(1));
    assert_eq!(f.coeff(f.split().pi()).unwrap().residue(3).unwrap(), BigInt::from(5));
    assert_eq!(f.coeff(f.split().pi_conj()).unwrap().residue(3).unwrap(), BigInt::from(7));
    assert!(f.coeff(&field.int(2, 0)).is_none());
}

#[test]
fn apply_round_trip_and_identities() {
    let dir = tempfile::tempdir().unwrap();
    let f = eigenform_json(dir.path(), 40);
    let spec = json!({"source": {"kind": "expansion", "expansion": f}, "ops": []});
    let out = run_spec(dir.path(), &spec);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"], f);

    let spec = json!({"source": {"kind": "expansion", "expansion": f}, "ops": ["v_p", "u_p"]});
    let doc: Value = serde_json::from_slice(&run_spec(dir.path(), &spec).stdout).unwrap();
    assert_eq!(doc["result"], f);
    assert_eq!(doc["provenance"][0]["output_bound"], "440");
    assert_eq!(doc["provenance"][1]["output_bound"], "40");
}

#[test]
fn apply_integrand_half() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.json");
    let spec = json!({
        "D": 5, "p": 11, "precision": 4,
        "source": {"kind": "eigenform", "a_pi": "5", "a_pi_prime": "7", "k": 2, "bound": 40, "seed": 3},
        "ops": ["deplete_pi_prime", "theta_prime_inverse:1", "restrict"],
        "output": out_path,
    });
    let out = run_spec(dir.path(), &spec);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let written: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(written, doc);
    let got = ModularQExp::from_json(&doc["result"]).unwrap();
    let f = HilbertQExp::from_json(&eigenform_json(dir.path(), 40)).unwrap();
    let expected = f.deplete_pi_prime().theta_prime_inverse(1).unwrap().restrict();
    assert_eq!(got, expected);
    assert_eq!(doc["provenance"].as_array().unwrap().len(), 3);
    assert_eq!(doc["provenance"][2]["op"], "restrict");
}

#[test]
fn apply_error_contract() {
    let dir = tempfile::tempdir().unwrap();
    let f = eigenform_json(dir.path(), 30);
    let spec = json!({"source": {"kind": "expansion", "expansion": f}, "ops": ["u_p", "u_p"]});
    let out = run_spec(dir.path(), &spec);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["op_index"], 1);
    assert_eq!(err["error"]["kind"], "InsufficientBound");

    let spec = json!({"source": {"kind": "expansion", "expansion": f}, "ops": ["frobnicate"]});
    assert_eq!(run_spec(dir.path(), &spec).status.code(), Some(2));
    let spec = json!({"source": {"kind": "expansion", "expansion": f}, "ops": ["theta_inverse"]});
    assert_eq!(run_spec(dir.path(), &spec).status.code(), Some(2));
    let spec = json!({"source": {"kind": "expansion", "expansion": f}, "ops": ["theta_inverse:1"]});
    let out = run_spec(dir.path(), &spec);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "NotDepleted");
    assert_eq!(err["error"]["op_index"], 0);
}

#[test]
fn verify_suites() {
    let r = ok_json(&["verify", "euler-summation", "--k", "2", "--t", "0"]);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
    ok_json(&["verify", "scholl", "--n", "3"]);
    let r = ok_json(&["verify", "kernel-lemma", "--trials", "100", "--D", "5", "--p", "11"]);
    assert_eq!(r["checks"].as_array().unwrap().len(), 3);
    ok_json(&["verify", "operator-identities", "--trials", "2", "--seed", "4"]);
    assert_eq!(hqx(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(err_json(&["verify", "kernel-lemma", "--D", "5"], 2)["kind"], "InvalidInput");
}

#[test]
fn euler_against_residue_oracle() {
    let doc = ok_json(&["euler", "--bp", "3", "--k0", "2", "--p", "11", "--prec", "3"]);
    // unit root of x^2 - 3x + 11 modulo 11^3 by exhaustive search
    let beta0 = (0..1331u64).find(|x| x % 11 != 0 && (x * x + 11 + 1331 * 3 - 3 * x) % 1331 == 0).unwrap();
    let beta1 = (3 + 1331 - beta0) % 1331;
    let m = beta1 / 11;
    assert_eq!(mantissa_residue(&doc["beta0"], 11, 3), BigInt::from(beta0));
    assert_eq!(mantissa_residue(&doc["beta1"], 11, 3), BigInt::from(beta1));
    let e0 = (1 + 121 * 121 - (11 * m * m) % 121) % 121;
    let e1 = (1 + 121 * 121 - (m * m) % 121) % 121;
    assert_eq!(mantissa_residue(&doc["E0"], 11, 2), BigInt::from(e0));
    assert_eq!(mantissa_residue(&doc["E1"], 11, 2), BigInt::from(e1));
    assert_eq!(doc["ramanujan"], true);

    let doc = ok_json(&["euler", "--bp", "0", "--k0", "2", "--p", "11"]);
    assert_eq!(doc["ordinary"], false);
    assert_eq!(doc["E1_over_both_roots"]["val"], -2);
}

#[test]
fn aj_scalar_twist_and_sign() {
    let doc = ok_json(&[
        "aj-scalar", "--k", "3", "--k0", "2", "--p", "11", "--prec", "4", "--a-pi", "5", "--a-pi-prime", "7", "--bp", "3",
    ]);
    assert_eq!(doc["t"], 1);
    assert_eq!(doc["sign"], -1);
    assert!(doc["aj_side"].is_object() && doc["l_side"].is_object());
    let odd = err_json(
        &["aj-scalar", "--k", "3", "--k0", "3", "--p", "11", "--a-pi", "5", "--a-pi-prime", "7", "--bp", "3"],
        2,
    );
    assert_eq!(odd["kind"], "InvalidWeights");
}

#[test]
fn family_specialize_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let f = HilbertQExp::from_json(&eigenform_json(dir.path(), 30)).unwrap();
    let fam = HilbertFamily::constant(&f, 0, 0).unwrap();
    let path = dir.path().join("fam.json");
    fs::write(&path, fam.to_json().to_string()).unwrap();
    let file = path.to_str().unwrap();
    let doc = ok_json(&["family-specialize", "--file", file, "--j", "-1", "--s", "0", "--depth", "1"]);
    let expected = specialize_h(&build_lambda_h(&fam).unwrap(), -1, 0, Some(1)).unwrap();
    assert_eq!(ModularQExp::from_json(&doc).unwrap(), expected);
    assert_eq!(err_json(&["family-specialize", "--file", file, "--j", "0", "--s", "0"], 2)["kind"], "BadTwist");
    let deep = err_json(&["family-specialize", "--file", file, "--j", "-1", "--s", "0", "--depth", "3"], 3);
    assert_eq!(deep["kind"], "InsufficientBound");

    let spec = json!({"source": {"kind": "family", "file": "fam.json", "s": 0}, "ops": ["restrict"]});
    let out = run_spec(dir.path(), &spec);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let split = Arc::new(QuadField::new(5).unwrap().split_prime(11, 4).unwrap());
    assert_eq!(f.split(), &split);
}
