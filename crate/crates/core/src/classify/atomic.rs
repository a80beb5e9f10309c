//! Normal forms `Z · m_w` for irreducible atomic modules.

use serde::{Deserialize, Serialize};

use crate::decompose;
use crate::json::MatrixJson;
use crate::linalg::{self, c};
use crate::pmodule::{atomic_module, PModule, PhaseDiagonal};
use crate::words::{self, BinaryWord};
use crate::{CMatrix, CVector, Error, Result, C64};

/// A word operator eigenvalue counts as unit modulus above this.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-7;

/// Reconstruction tolerance for the recovered normal form.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// `conjugate(atomic_module(word, phases), conjugator)` equals the module
/// this form was computed from.
///
/// The word is a cyclic representative and the phases are normalised to
/// `(1, …, 1, det Z)`: diagonal unitary conjugation rescales the individual
/// phases of `Z · m_w` while keeping their product, so only `det Z` is a
/// unitary invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicForm {
    pub word: BinaryWord,
    pub phases: PhaseDiagonal,
    #[serde(with = "matrix_serde")]
    pub conjugator: CMatrix,
}

/// Invariant `(cyclic word class, det Z)` that decides equivalence of the
/// induced representations of the Thompson groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThompsonKey {
    pub word: BinaryWord,
    pub det: [f64; 2],
}

impl AtomicForm {
    pub fn det(&self) -> C64 {
        self.phases.det()
    }

    pub fn thompson_equivalence_key(&self) -> ThompsonKey {
        let z = self.det();
        ThompsonKey {
            word: self.word.clone(),
            det: [z.re, z.im],
        }
    }

    pub fn module(&self) -> Result<PModule> {
        atomic_module(&self.word, &self.phases)?.conjugate(&self.conjugator)
    }
}

mod matrix_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let rows = j.0.len();
        j.to_matrix(rows, rows).map_err(serde::de::Error::custom)
    }
}

/// Orthonormal chain `ξ_1, …, ξ_d` with `L_{w_k} ξ_k = ξ_{k+1}` for `k < d`
/// and `L_{w_d} ξ_d = λ ξ_1`, started from an eigenvector of the word
/// operator for the unit-modulus eigenvalue `λ`.
fn chain(m: &PModule, w: &BinaryWord, lambda: C64, xi: CVector) -> Result<CMatrix> {
    let d = m.dim();
    let mut cols = vec![xi];
    for (k, &l) in w.letters().iter().enumerate() {
        let cur = &cols[k];
        let off = (m.letter(1 - l) * cur).norm();
        if off > 1e-6 {
            return Err(Error::Indeterminate(format!(
                "complementary letter does not annihilate chain vector {k} (norm {off:.2e})"
            )));
        }
        let next = m.letter(l) * cur;
        if k + 1 < d {
            cols.push(next);
        } else if (next - &cols[0] * lambda).norm() > 1e-6 {
            return Err(Error::Indeterminate("eigenvector chain does not close".into()));
        }
    }
    let u = linalg::columns_to_matrix(d, &cols);
    if linalg::unitarity_residual(&u) > 1e-6 {
        return Err(Error::Indeterminate("eigenvector chain is not orthonormal".into()));
    }
    // Re-orthonormalise to remove the accumulated rounding, keeping phases
    // of the leading entries.
    Ok(linalg::q_factor(&u))
}

/// Normal form of an irreducible module, or `None` if no word operator of a
/// prime word of length `d` has a unit-modulus eigenvalue.
pub fn atomic_canonical_form(m: &PModule) -> Result<Option<AtomicForm>> {
    let d = m.dim();
    if d > words::MAX_ENUMERATION_LENGTH {
        return Err(Error::Resource(format!(
            "atomic word scan limited to dimension {}",
            words::MAX_ENUMERATION_LENGTH
        )));
    }
    if !decompose::module_predicates(m)?.irreducible {
        return Err(Error::invalid("atomic normal form requires an irreducible module"));
    }
    for w in words::prime_classes(d)? {
        let x = m.word_operator(&w);
        let Some(lambda) = linalg::eigenvalues(&x)
            .into_iter()
            .filter(|z| z.norm() >= 1.0 - UNIT_EIGENVALUE_TOL)
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        else {
            continue;
        };
        let kernel = linalg::null_space(&(&x - CMatrix::identity(d, d) * lambda), 1e-6);
        if kernel.ncols() != 1 {
            return Err(Error::Indeterminate(format!(
                "unit eigenvalue of word {w} has {} eigenvectors",
                kernel.ncols()
            )));
        }
        let lambda = lambda / lambda.norm();
        let u = chain(m, &w, lambda, kernel.column(0).into_owned())?;
        // make every interior link positive, leaving the twist on the last one
        let mut u = u;
        for k in 0..d - 1 {
            let link = u.column(k + 1).dotc(&(m.letter(w.letters()[k]) * u.column(k)));
            let mut col = u.column_mut(k + 1);
            col *= link / link.norm();
        }
        let mut phases = vec![c(1.0, 0.0); d];
        let last = m.letter(w.letters()[d - 1]) * u.column(d - 1);
        let z = u.column(0).dotc(&last);
        phases[d - 1] = z / z.norm();
        let form = AtomicForm {
            word: w.clone(),
            phases: PhaseDiagonal::new(phases)?,
            conjugator: u,
        };
        let rebuilt = form.module()?;
        let err = (rebuilt.a() - m.a()).norm().max((rebuilt.b() - m.b()).norm());
        if !(err <= RECONSTRUCTION_TOL) {
            return Err(Error::Indeterminate(format!(
                "normal form reconstruction error {err:.2e}"
            )));
        }
        return Ok(Some(form));
    }
    Ok(None)
}
