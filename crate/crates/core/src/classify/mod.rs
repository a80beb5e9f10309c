//! Diffuse/atomic classification, atomic normal forms, fingerprints,
//! unitary equivalence and the aggregated report.

pub mod atomic;
pub mod equivalence;
pub mod fingerprint;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{self, ModulePredicates};
use crate::linalg;
use crate::pmodule::PModule;
use crate::words::{self, BinaryWord};
use crate::{Error, Result, C64};

pub use atomic::{atomic_canonical_form, AtomicForm, ThompsonKey};
pub use equivalence::{unitary_equivalent, Intertwiner};
pub use fingerprint::{fingerprint, fingerprints_agree, Fingerprint};

/// A word operator with spectral radius above `1 − SPECTRAL_TOL` certifies an
/// atomic sub-module.
pub const SPECTRAL_TOL: f64 = 1e-7;

/// Depth of the decay cross-check in [`is_diffuse`].
pub const DECAY_DEPTH: usize = 12;

/// Decay values at least `1 − DECAY_TOL` count as non-decaying.
pub const DECAY_TOL: f64 = 1e-6;

/// Largest depth accepted by [`decay_oracle`].
pub const MAX_DECAY_DEPTH: usize = 16;

/// Fingerprint length used in reports.
pub const REPORT_FINGERPRINT_LENGTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diffuseness {
    Diffuse,
    Atomic,
    Indeterminate,
}

/// Largest spectral radius of `word_operator(m, w)` over cyclic
/// representatives `w` of prime words of length at most `d`, with the word
/// attaining it.
pub fn spectral_scan(m: &PModule) -> Result<(f64, BinaryWord)> {
    let d = m.dim();
    if d > words::MAX_ENUMERATION_LENGTH {
        return Err(Error::Resource(format!(
            "prime word scan limited to dimension {}",
            words::MAX_ENUMERATION_LENGTH
        )));
    }
    let mut all = Vec::new();
    for n in 1..=d {
        all.extend(words::prime_classes(n)?);
    }
    let radii: Vec<f64> = all
        .par_iter()
        .map(|w| linalg::spectral_radius(&m.word_operator(w)))
        .collect();
    let (i, r) = radii
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    Ok((r, all[i].clone()))
}

/// Largest operator norm of `word_operator(m, w)` over all words of length
/// `n`.
pub fn decay_oracle(m: &PModule, n: usize) -> Result<f64> {
    if n > MAX_DECAY_DEPTH {
        return Err(Error::Resource(format!("decay depth limited to {MAX_DECAY_DEPTH}")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    // split on the first few letters for parallelism, then walk depth first
    let split = n.min(4);
    let heads: Vec<u32> = (0..1u32 << split).collect();
    let best = heads
        .par_iter()
        .map(|&h| {
            let letters: Vec<u8> = (0..split).map(|i| ((h >> i) & 1) as u8).collect();
            let w = BinaryWord::from_letters(letters).expect("binary letters");
            let start = m.word_operator(&w);
            walk_max(m, start, n - split)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

fn walk_max(m: &PModule, prod: crate::CMatrix, remaining: usize) -> f64 {
    if remaining == 0 {
        return linalg::op_norm(&prod);
    }
    if prod.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return 0.0;
    }
    walk_max(m, m.a() * &prod, remaining - 1).max(walk_max(m, m.b() * &prod, remaining - 1))
}

/// Diffuse iff no prime word of length `<= d` has a word operator with
/// spectral radius `>= 1 − 1e-7`, cross-checked against
/// `decay_oracle(m, 12)`; disagreement yields `Indeterminate`.
pub fn is_diffuse(m: &PModule) -> Result<Diffuseness> {
    let (rho, _) = spectral_scan(m)?;
    let decay = decay_oracle(m, DECAY_DEPTH)?;
    let spectral_atomic = rho >= 1.0 - SPECTRAL_TOL;
    let decay_atomic = decay >= 1.0 - DECAY_TOL;
    Ok(match (spectral_atomic, decay_atomic) {
        (false, false) => Diffuseness::Diffuse,
        (true, true) => Diffuseness::Atomic,
        _ => Diffuseness::Indeterminate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Diffuse,
    Atomic,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub dim: usize,
    pub kind: ComponentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atomic_form: Option<AtomicForm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thompson_equivalence_key: Option<ThompsonKey>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub valid: bool,
    pub dim: usize,
    pub validation_residual: f64,
    pub seed: u64,
    /// `None` when the decomposition could not be certified.
    pub pdim: Option<usize>,
    pub component_dims: Vec<usize>,
    pub residual_dim: Option<usize>,
    pub predicates: Option<ModulePredicates>,
    pub diffuseness: Diffuseness,
    pub components: Vec<ComponentReport>,
    pub fingerprint_maxlen: usize,
    pub fingerprint: Vec<[f64; 2]>,
    /// Reasons for every field reported as indeterminate or missing.
    pub notes: Vec<String>,
}

fn component_report(sub: &PModule) -> ComponentReport {
    let mut rep = ComponentReport {
        dim: sub.dim(),
        kind: ComponentKind::Indeterminate,
        atomic_form: None,
        thompson_equivalence_key: None,
        note: None,
    };
    match is_diffuse(sub) {
        Ok(Diffuseness::Diffuse) => rep.kind = ComponentKind::Diffuse,
        Ok(Diffuseness::Atomic) => match atomic_canonical_form(sub) {
            Ok(Some(f)) => {
                rep.kind = ComponentKind::Atomic;
                rep.thompson_equivalence_key = Some(f.thompson_equivalence_key());
                rep.atomic_form = Some(f);
            }
            Ok(None) => rep.note = Some("atomic by spectral test but no normal form found".into()),
            Err(e) => rep.note = Some(e.to_string()),
        },
        Ok(Diffuseness::Indeterminate) => {
            rep.note = Some("spectral test and decay oracle disagree".into())
        }
        Err(e) => rep.note = Some(e.to_string()),
    }
    rep
}

/// Decomposition, per-component kinds and normal forms, P-dimension and a
/// short fingerprint. Failures are recorded in the report, not raised.
pub fn classification_report(m: &PModule, seed: u64) -> ClassificationReport {
    let mut notes = Vec::new();
    let diffuseness = match is_diffuse(m) {
        Ok(x) => x,
        Err(e) => {
            notes.push(format!("diffuseness: {e}"));
            Diffuseness::Indeterminate
        }
    };
    let (mut pdim, mut component_dims, mut residual_dim, mut predicates, mut components) =
        (None, Vec::new(), None, None, Vec::new());
    match decompose::decompose_with_seed(m, seed) {
        Ok(dec) => {
            pdim = Some(dec.component_dims().iter().sum());
            component_dims = dec.component_dims();
            residual_dim = Some(dec.residual.dim());
            predicates = Some(decompose::predicates_of(&dec));
            for h in &dec.irreducibles {
                match m.restrict(h.matrix()) {
                    Ok(sub) => components.push(component_report(&sub)),
                    Err(e) => components.push(ComponentReport {
                        dim: h.dim(),
                        kind: ComponentKind::Indeterminate,
                        atomic_form: None,
                        thompson_equivalence_key: None,
                        note: Some(e.to_string()),
                    }),
                }
            }
        }
        Err(e) => notes.push(format!("decomposition: {e}")),
    }
    let fp = fingerprint(m, REPORT_FINGERPRINT_LENGTH).expect("report fingerprint length is in range");
    ClassificationReport {
        valid: true,
        dim: m.dim(),
        validation_residual: m.residual(),
        seed,
        pdim,
        component_dims,
        residual_dim,
        predicates,
        diffuseness,
        components,
        fingerprint_maxlen: REPORT_FINGERPRINT_LENGTH,
        fingerprint: fp.traces.iter().map(|z: &C64| [z.re, z.im]).collect(),
        notes,
    }
}
