use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use jreal_cli::run;

fn jreal(args: &[&str]) -> (i32, String, String) {
    let argv = std::iter::once("jreal").chain(args.iter().copied()).map(std::ffi::OsString::from);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jreal-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn forget_prints_the_modal_skeleton() {
    let (code, out, _) = jreal(&["forget", "x0:p -> p"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "[]p -> p");
}

#[test]
fn exit_codes() {
    assert_eq!(jreal(&["parse", "p -> [](q & r)"]).0, 0);
    let (code, _, err) = jreal(&["parse", "p -> -> q"]);
    assert_eq!(code, 1);
    assert!(err.contains("line 1, column 6"), "{err}");
    assert_eq!(jreal(&["prove", "p"]).0, 2);
    assert_eq!(jreal(&["prove", "box p -> p"]).0, 2);
    assert_eq!(jreal(&["--logic", "ikt", "prove", "box p -> p"]).0, 0);
    assert_eq!(jreal(&["--logic", "kd45", "prove", "p -> p"]).0, 1);
    assert_eq!(jreal(&["check-jl", "/nonexistent/cert.json"]).0, 1);
}

#[test]
fn proofs_round_trip_through_the_checker() {
    let dir = scratch("proof");
    let (code, json, _) = jreal(&["--format", "json", "prove", "box (p -> q) -> box p -> box q"]);
    assert_eq!(code, 0);
    let path = dir.join("proof.json");
    fs::write(&path, &json).unwrap();
    assert_eq!(jreal(&["check-proof", path.to_str().unwrap()]).0, 0);
    // The logic recorded in the file conflicts with an explicit flag.
    assert_eq!(jreal(&["--logic", "is4", "check-proof", path.to_str().unwrap()]).0, 1);

    let tampered = json.replacen("\"out\": \"q\"", "\"out\": \"p\"", 1);
    assert_ne!(tampered, json);
    let bad = dir.join("bad.json");
    fs::write(&bad, tampered).unwrap();
    assert_eq!(jreal(&["check-proof", bad.to_str().unwrap()]).0, 1);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn realised_certificates_check() {
    let dir = scratch("realise");
    let proof = dir.join("proof.json");
    let (code, json, _) = jreal(&["--format", "json", "prove", "dia (p | q) -> dia p | dia q"]);
    assert_eq!(code, 0);
    fs::write(&proof, json).unwrap();
    let ann = dir.join("ann.json");
    assert_eq!(jreal(&["--emit", ann.to_str().unwrap(), "annotate", proof.to_str().unwrap()]).0, 0);
    let cert = dir.join("cert.json");
    let (code, out, _) = jreal(&["--emit", cert.to_str().unwrap(), "realise", ann.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("checked"), "{out}");
    let (code, out, _) = jreal(&["check-jl", cert.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");

    // A certificate whose last step is dropped no longer proves the claim.
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    v["certificate"]["steps"].as_array_mut().unwrap().pop();
    fs::write(&cert, v.to_string()).unwrap();
    assert_eq!(jreal(&["check-jl", cert.to_str().unwrap()]).0, 1);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn corpus_reports_each_row() {
    let dir = scratch("corpus");
    let file = dir.join("corpus.txt");
    fs::write(&file, "% reflexivity\nikt: box p -> p\n\nbox p -> box p\n").unwrap();
    let (code, out, _) = jreal(&["corpus", file.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let header = out.lines().next().unwrap();
    for col in ["formula", "logic", "proof found", "realisation ok", "cert ok", "round-trip ok"] {
        assert!(header.contains(col), "{header}");
    }
    assert!(out.contains("2/2 passed"), "{out}");

    fs::write(&file, "p\nbox p -> box p\n").unwrap();
    let (code, json, _) = jreal(&["--format", "json", "corpus", file.to_str().unwrap()]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!((v["passed"].as_u64(), v["total"].as_u64()), (Some(1), Some(2)));
    let rows = v["rows"].as_array().expect("rows");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["proof_found"], false);
    assert_eq!(rows[1]["cert_ok"], true);
    fs::remove_dir_all(dir).unwrap();
}

fn binary(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jreal"));
    cmd.args(args);
    match seed {
        Some(s) => cmd.env("JREAL_SEED", s),
        None => cmd.env_remove("JREAL_SEED"),
    };
    cmd.output().unwrap()
}

#[test]
fn seed_moves_the_first_constant() {
    let dir = scratch("seed");
    let proof = dir.join("proof.json");
    let out = binary(&["--format", "json", "prove", "box p -> box p"], None);
    assert!(out.status.success());
    fs::write(&proof, out.stdout).unwrap();
    let p = proof.to_str().unwrap();

    let plain = String::from_utf8(binary(&["realise", p], None).stdout).unwrap();
    let seeded = String::from_utf8(binary(&["realise", p], Some("40")).stdout).unwrap();
    assert!(plain.contains("c0"), "{plain}");
    assert!(seeded.contains("c40") && !seeded.contains("c0*"), "{seeded}");
    assert_eq!(binary(&["realise", p], Some("forty")).status.code(), Some(1));
    fs::remove_dir_all(dir).unwrap();
}
