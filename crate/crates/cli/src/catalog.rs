//! Flat-directory module catalog: one module file and one report file per
//! entry, listed in `index.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pyth_core::classify::{classification_report, ClassificationReport, ComponentKind, Fingerprint};
use pyth_core::{unitary_equivalent, PModule};

use crate::{fingerprint_hash, load_module, Failure};

pub const INDEX: &str = "index.json";
/// Word length of the hashed fingerprint.
pub const HASH_MAXLEN: usize = 4;
/// Traces are rounded to this many decimal places before hashing.
const HASH_DIGITS: i32 = 6;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Index {
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Entry {
    pub file: String,
    pub fingerprint_hash: String,
    pub pdim: Option<usize>,
    pub kind: String,
    pub report: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub equivalent: Option<bool>,
}

/// SHA-256 of the traces rounded to `HASH_DIGITS` decimals, in word order.
/// Rounding makes the hash insensitive to floating-point noise but not to
/// traces that straddle a rounding boundary.
pub fn hash_fingerprint(f: &Fingerprint) -> Result<String, Failure> {
    let scale = 10f64.powi(HASH_DIGITS);
    let mut h = Sha256::new();
    for (w, t) in f.words.iter().zip(&f.traces) {
        let q = |x: f64| {
            let r = (x * scale).round() as i64;
            // fold -0 into 0
            if r == 0 {
                0
            } else {
                r
            }
        };
        h.update(w.describe().as_bytes());
        h.update(q(t.re).to_le_bytes());
        h.update(q(t.im).to_le_bytes());
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn kind_of(report: &ClassificationReport) -> String {
    let kinds: Vec<ComponentKind> = report.components.iter().map(|c| c.kind).collect();
    if kinds.is_empty() {
        "residual".into()
    } else if kinds.iter().all(|k| *k == ComponentKind::Diffuse) {
        "diffuse".into()
    } else if kinds.iter().all(|k| *k == ComponentKind::Atomic) {
        "atomic".into()
    } else if kinds.contains(&ComponentKind::Indeterminate) {
        "indeterminate".into()
    } else {
        "mixed".into()
    }
}

pub fn load_index(dir: &Path) -> Result<Index, Failure> {
    let path = dir.join(INDEX);
    if !path.exists() {
        return Ok(Index::default());
    }
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn save_index(dir: &Path, index: &Index) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(index)?;
    let tmp = dir.join(format!("{INDEX}.tmp"));
    fs::write(&tmp, text + "\n")?;
    fs::rename(tmp, dir.join(INDEX))?;
    Ok(())
}

pub fn add(dir: &Path, m: &PModule, seed: u64) -> Result<Entry, Failure> {
    fs::create_dir_all(dir)?;
    let mut index = load_index(dir)?;
    let hash = fingerprint_hash(m)?;
    let report = classification_report(m, seed);
    let n = index.entries.iter().filter(|e| e.fingerprint_hash == hash).count();
    let stem = format!("{}-{n}", &hash[..16]);
    let file = format!("{stem}.json");
    let report_file = format!("{stem}.report.json");
    fs::write(dir.join(&file), m.to_json_string() + "\n")?;
    fs::write(dir.join(&report_file), serde_json::to_string_pretty(&report)? + "\n")?;
    let entry = Entry {
        file,
        fingerprint_hash: hash,
        pdim: report.pdim,
        kind: kind_of(&report),
        report: report_file,
        equivalent: None,
    };
    index.entries.push(entry.clone());
    save_index(dir, &index)?;
    Ok(entry)
}

/// Entries matching every given filter. With a probe module, entries are
/// matched by fingerprint hash and then confirmed by a constructive
/// equivalence test.
pub fn query(
    dir: &Path,
    probe: Option<&PModule>,
    hash: Option<&str>,
    pdim: Option<usize>,
    kind: Option<&str>,
    tol: Option<f64>,
) -> Result<Vec<Entry>, Failure> {
    let index = load_index(dir)?;
    let probe_hash = probe.map(fingerprint_hash).transpose()?;
    let mut out = Vec::new();
    for e in index.entries {
        if hash.is_some_and(|h| !e.fingerprint_hash.starts_with(h))
            || pdim.is_some_and(|p| e.pdim != Some(p))
            || kind.is_some_and(|k| e.kind != k)
            || probe_hash.as_ref().is_some_and(|h| *h != e.fingerprint_hash)
        {
            continue;
        }
        let mut e = e;
        if let Some(m) = probe {
            let stored = load_module(&dir.join(&e.file), tol)?;
            e.equivalent = Some(stored.dim() == m.dim() && unitary_equivalent(m, &stored)?.is_some());
        }
        out.push(e);
    }
    Ok(out)
}
