//! Unitary equivalence of modules through their smallest complete
//! sub-modules.

use serde::Serialize;

use super::fingerprint::{default_maxlen, fingerprints_agree};
use crate::decompose::{self, Decomposition};
use crate::json::MatrixJson;
use crate::linalg::{self, c};
use crate::pmodule::PModule;
use crate::{CMatrix, Error, Result};

/// Kernel and unitarity tolerance of the constructive test.
pub const EQUIVALENCE_TOL: f64 = 1e-7;

/// Required separation between a zero and a nonzero singular value.
pub const KERNEL_GAP: f64 = 10.0;

/// A partial isometry `X : C^{d1} → C^{d2}` mapping the smallest complete
/// sub-module of the first module onto that of the second and intertwining
/// `A`, `B` there. For full modules it is unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Intertwiner {
    pub matrix: CMatrix,
    /// `max_L ‖X L₁ P₁ − L₂ X P₁‖_F` with `P₁` the complete part projector.
    pub residual: f64,
    pub complete_dim: usize,
}

#[derive(Serialize)]
struct IntertwinerJson {
    matrix: MatrixJson,
    residual: f64,
    complete_dim: usize,
}

impl Serialize for Intertwiner {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IntertwinerJson {
            matrix: MatrixJson::from(&self.matrix),
            residual: self.residual,
            complete_dim: self.complete_dim,
        }
        .serialize(s)
    }
}

/// Stacked Sylvester operator `vec X ↦ vec(X A₁ − A₂ X, X B₁ − B₂ X)`.
fn sylvester(m1: &PModule, m2: &PModule) -> CMatrix {
    let k = m1.dim();
    let id = CMatrix::identity(k, k);
    let block = |x: &CMatrix, y: &CMatrix| linalg::kron(&x.transpose(), &id) - linalg::kron(&id, y);
    linalg::vstack(&[&block(m1.a(), m2.a()), &block(m1.b(), m2.b())])
}

/// Unitary `W` with `W A₁ W* = A₂`, `W B₁ W* = B₂` for irreducible modules
/// of equal dimension, or `None`.
pub fn irreducible_intertwiner(m1: &PModule, m2: &PModule) -> Result<Option<CMatrix>> {
    let k = m1.dim();
    if k != m2.dim() {
        return Ok(None);
    }
    if !fingerprints_agree(m1, m2, default_maxlen(k))? {
        return Ok(None);
    }
    let (_, sv, v) = linalg::svd_full(&sylvester(m1, m2));
    let n = k * k;
    let s0 = sv[n - 1];
    let s1 = if n >= 2 { sv[n - 2] } else { f64::INFINITY };
    if s0 > KERNEL_GAP * EQUIVALENCE_TOL {
        return Ok(None);
    }
    if !(s0 <= EQUIVALENCE_TOL && s1 > KERNEL_GAP * EQUIVALENCE_TOL) {
        return Err(Error::Indeterminate(format!(
            "intertwiner kernel not separated: smallest singular values {s0:.2e}, {s1:.2e}"
        )));
    }
    let x = linalg::unvec(&v.column(n - 1).into_owned(), k, k);
    let scale = (x.norm_squared() / k as f64).sqrt();
    let x = x / c(scale, 0.0);
    if linalg::unitarity_residual(&x) > EQUIVALENCE_TOL {
        return Ok(None);
    }
    Ok(Some(x))
}

fn restricted(m: &PModule, dec: &Decomposition) -> Result<Vec<PModule>> {
    dec.irreducibles.iter().map(|h| m.restrict(h.matrix())).collect()
}

/// Constructive equivalence test of the smallest complete sub-modules:
/// components are matched greedily by fingerprint and then by an explicit
/// intertwiner.
pub fn unitary_equivalent(m1: &PModule, m2: &PModule) -> Result<Option<Intertwiner>> {
    let dec1 = decompose::decompose(m1)?;
    let dec2 = decompose::decompose(m2)?;
    let mut dims1 = dec1.component_dims();
    let mut dims2 = dec2.component_dims();
    dims1.sort_unstable();
    dims2.sort_unstable();
    if dims1 != dims2 {
        return Ok(None);
    }
    let r1 = restricted(m1, &dec1)?;
    let r2 = restricted(m2, &dec2)?;
    let mut used = vec![false; r2.len()];
    let mut x = CMatrix::zeros(m2.dim(), m1.dim());
    for (i, a) in r1.iter().enumerate() {
        let mut found = false;
        let mut pending: Option<Error> = None;
        for (j, b) in r2.iter().enumerate() {
            if used[j] || a.dim() != b.dim() {
                continue;
            }
            match irreducible_intertwiner(a, b) {
                Ok(Some(w)) => {
                    x += dec2.irreducibles[j].matrix() * w * dec1.irreducibles[i].matrix().adjoint();
                    used[j] = true;
                    found = true;
                    break;
                }
                Ok(None) => {}
                Err(e) => pending = pending.or(Some(e)),
            }
        }
        if !found {
            return match pending {
                Some(e) => Err(e),
                None => Ok(None),
            };
        }
    }
    let p1 = dec1.complete_part().projector();
    let residual = (&x * m1.a() * &p1 - m2.a() * &x * &p1)
        .norm()
        .max((&x * m1.b() * &p1 - m2.b() * &x * &p1).norm());
    if !(residual <= EQUIVALENCE_TOL) {
        return Err(Error::Indeterminate(format!(
            "assembled intertwiner has residual {residual:.2e}"
        )));
    }
    Ok(Some(Intertwiner {
        matrix: x,
        residual,
        complete_dim: dims1.iter().sum(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use crate::pmodule::{atomic_module, random_module, PhaseDiagonal};
    use crate::words::BinaryWord;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn w(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    #[test]
    fn conjugated_pair_is_recovered() {
        let m = random_module(3, 21).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let u = haar_unitary(3, &mut rng);
        let c = m.conjugate(&u).unwrap();
        let x = unitary_equivalent(&m, &c).unwrap().unwrap();
        let wa = &x.matrix * m.a() * x.matrix.adjoint();
        assert!((wa - c.a()).norm() <= 1e-7);
        assert!(linalg::unitarity_residual(&x.matrix) < 1e-7);
    }

    #[test]
    fn atomic_examples() {
        let m01 = atomic_module(&w("01"), &PhaseDiagonal::identity(2)).unwrap();
        let m10 = atomic_module(&w("10"), &PhaseDiagonal::identity(2)).unwrap();
        let x = unitary_equivalent(&m01, &m10).unwrap().unwrap();
        assert!((&x.matrix * m01.b() * x.matrix.adjoint() - m10.b()).norm() < 1e-9);

        // same determinant, phases not a rotation: still conjugate by a diagonal unitary
        let z1 = PhaseDiagonal::from_turns(&[0.25, 0.0]).unwrap();
        let z2 = PhaseDiagonal::from_turns(&[0.125, 0.125]).unwrap();
        let a = atomic_module(&w("01"), &z1).unwrap();
        let b = atomic_module(&w("01"), &z2).unwrap();
        assert!(unitary_equivalent(&a, &b).unwrap().is_some());

        let z3 = PhaseDiagonal::from_turns(&[0.5, 0.0]).unwrap();
        let c3 = atomic_module(&w("01"), &z3).unwrap();
        assert!(unitary_equivalent(&a, &c3).unwrap().is_none());
    }

    #[test]
    fn distinct_modules_are_not_equivalent() {
        let a = random_module(2, 1).unwrap();
        let b = random_module(2, 2).unwrap();
        assert!(unitary_equivalent(&a, &b).unwrap().is_none());
        let c = random_module(3, 2).unwrap();
        assert!(unitary_equivalent(&a, &c).unwrap().is_none());
    }

    #[test]
    fn reducible_sums_match_componentwise() {
        let a = random_module(1, 4).unwrap();
        let b = random_module(2, 5).unwrap();
        let s1 = a.direct_sum(&b);
        let s2 = b.direct_sum(&a);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let s2 = s2.conjugate(&haar_unitary(3, &mut rng)).unwrap();
        let x = unitary_equivalent(&s1, &s2).unwrap().unwrap();
        assert!(x.residual <= 1e-7);
        assert!(linalg::unitarity_residual(&x.matrix) < 1e-7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn symmetric_and_reflexive(d in 1usize..3, s1 in any::<u64>(), s2 in any::<u64>()) {
            let a = random_module(d, s1).unwrap();
            let b = random_module(d, s2).unwrap();
            prop_assert!(unitary_equivalent(&a, &a).unwrap().is_some());
            let ab = unitary_equivalent(&a, &b).unwrap().is_some();
            let ba = unitary_equivalent(&b, &a).unwrap().is_some();
            prop_assert_eq!(ab, ba);
        }
    }
}
