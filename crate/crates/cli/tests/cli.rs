use std::path::Path;
use std::process::{Command, Output};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::Value;

fn pyth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pyth"))
        .args(args)
        .env_remove("PYTH_TOL")
        .output()
        .expect("spawn pyth")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write_output(dir: &Path, name: &str, args: &[&str]) -> String {
    let o = pyth(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let path = dir.join(name);
    std::fs::write(&path, &o.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn necklaces_six() {
    let o = pyth(&["necklaces", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "9");
    assert_eq!(json(&pyth(&["necklaces", "6", "--json"]))["count"], 9);
}

#[test]
fn classify_bernoulli_is_diffuse_pdim_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_output(dir.path(), "b.json", &["bernoulli", "0.3", "0.25"]);
    let o = pyth(&["classify", &m, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["pdim"], 1);
    assert_eq!(r["diffuseness"], "diffuse");
}

#[test]
fn equiv_conjugated_pair_returns_intertwiner() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_output(dir.path(), "a.json", &["sample", "3", "--seed", "11"]);
    let text = std::fs::read_to_string(&a).unwrap();
    let m = pyth_core::PModule::from_json_str(&text).unwrap();
    let u = pyth_core::linalg::haar_unitary(3, &mut ChaCha20Rng::seed_from_u64(5));
    let b = dir.path().join("b.json");
    std::fs::write(&b, m.conjugate(&u).unwrap().to_json_string()).unwrap();

    let o = pyth(&["equiv", &a, b.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["equivalent"], true);
    assert!(r["intertwiner"].is_object(), "{r}");

    let c = write_output(dir.path(), "c.json", &["sample", "3", "--seed", "12"]);
    let r = json(&pyth(&["equiv", &a, &c, "--json"]));
    assert_eq!(r["equivalent"], false);
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_output(dir.path(), "m.json", &["sample", "2", "--seed", "3"]);
    for args in [
        vec!["classify", m.as_str(), "--json"],
        vec!["decompose", m.as_str(), "--seed", "9"],
        vec!["orbit-dist", m.as_str(), m.as_str(), "--json"],
        vec!["sample", "4", "--json"],
    ] {
        let x = pyth(&args);
        let y = pyth(&args);
        assert!(x.status.success(), "{args:?}");
        assert_eq!(x.stdout, y.stdout, "{args:?}");
    }
}

#[test]
fn every_json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_output(dir.path(), "m.json", &["sample", "2"]);
    let k = write_output(dir.path(), "k.json", &["bernoulli", "0.5"]);
    let v = dir.path().join("v.json");
    std::fs::write(&v, r#"{"d": 2, "leaves": {"0": [[1.0, 0.0], [0.0, 0.0]], "1": [[0.0, 0.0], [0.0, 1.0]]}}"#).unwrap();
    let v = v.to_str().unwrap();
    let x0 = "[00,01,1]->[0,10,11]";
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", &m],
        vec!["pdim", &m],
        vec!["decompose", &m],
        vec!["tangent", &m],
        vec!["atomic", "01", "--turns", "0.25,-0.125"],
        vec!["gp", "[[[1,0],[0,0]],[[0,0],[1,0]]]"],
        vec!["eval-coeff", &k, x0],
        vec!["cesaro", &k, x0, "20", "--series"],
        vec!["two-adic", &m, v, "4"],
    ];
    for mut args in runs {
        args.push("--json");
        let o = pyth(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(json(&o).is_object(), "{args:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pyth(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(pyth(&["necklaces", "6", "--no-such-flag"]).status.code(), Some(64));
    assert_eq!(pyth(&["--help"]).status.code(), Some(0));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"d": 1, "A": [[[1.0, 0.0]]], "B": [[[1.0, 0.0]]]}"#).unwrap();
    let o = pyth(&["validate", bad.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["valid"], false);
    assert_eq!(pyth(&["pdim", bad.to_str().unwrap()]).status.code(), Some(1));

    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{ not json").unwrap();
    let o = pyth(&["pdim", garbled.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"], "parse");
    assert_eq!(pyth(&["eval-coeff", garbled.to_str().unwrap(), "[0,1"]).status.code(), Some(1));

    let k = write_output(dir.path(), "k.json", &["bernoulli", "0.5"]);
    let o = pyth(&["cesaro", &k, "[00,01,1]->[0,10,11]", "16", "--leaf-bound", "8"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn tolerance_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_output(dir.path(), "m.json", &["sample", "3"]);
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_pyth"));
        c.env_remove("PYTH_TOL").args(["validate", &m, "--json"]);
        if let Some(e) = env {
            c.env("PYTH_TOL", e);
        }
        if let Some(f) = flag {
            c.args(["--tol", f]);
        }
        let o = c.output().unwrap();
        (o.status.code(), json(&o)["tolerance"].as_f64().unwrap())
    };
    assert_eq!(run(None, None), (Some(0), 3e-10));
    assert_eq!(run(Some("1e-30"), None), (Some(1), 1e-30));
    assert_eq!(run(Some("1e-30"), Some("1e-6")), (Some(0), 1e-6));
}

#[test]
fn catalog_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("catalog");
    let cat = cat.to_str().unwrap();
    let b = write_output(dir.path(), "b.json", &["bernoulli", "0.3"]);
    let a = write_output(dir.path(), "a.json", &["atomic", "011"]);
    for m in [&b, &a] {
        assert!(pyth(&["catalog-add", cat, m]).status.success());
    }

    let index: Value = serde_json::from_str(&std::fs::read_to_string(Path::new(cat).join("index.json")).unwrap()).unwrap();
    let entries = index["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert!(Path::new(cat).join(e["file"].as_str().unwrap()).exists());
        assert!(Path::new(cat).join(e["report"].as_str().unwrap()).exists());
    }
    assert_eq!(entries[0]["kind"], "diffuse");
    assert_eq!(entries[1]["kind"], "atomic");
    assert_eq!(entries[1]["pdim"], 3);

    let hits = json(&pyth(&["catalog-query", cat, &b, "--json"]));
    let hits = hits["entries"].as_array().unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0]["equivalent"], true);
    assert_eq!(hits[0]["fingerprint_hash"], entries[0]["fingerprint_hash"]);

    let by_pdim = json(&pyth(&["catalog-query", cat, "--pdim", "3", "--json"]));
    assert_eq!(by_pdim["entries"].as_array().unwrap().len(), 1);
    let prefix = &entries[1]["fingerprint_hash"].as_str().unwrap()[..8];
    let by_hash = json(&pyth(&["catalog-query", cat, "--hash", prefix, "--json"]));
    assert_eq!(by_hash["entries"][0]["kind"], "atomic");
}
