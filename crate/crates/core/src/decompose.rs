//! Sub-module lattice: closures, the largest sub-module inside a subspace,
//! decomposition into irreducible sub-modules plus a residual subspace, and
//! the Pythagorean dimension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::json::VectorJson;
use crate::linalg::{self, c, RANK_TOL};
use crate::pmodule::PModule;
use crate::{CMatrix, CVector, Error, Result};

/// Retries of the randomised minimal sub-module search.
pub const SEARCH_RETRIES: usize = 32;

/// Random vectors used to confirm minimality of each component.
pub const MINIMALITY_SAMPLES: usize = 8;

/// Invariance tolerance `‖(I − P) L P‖` asserted on results.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// Seed used by the seedless entry points.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Orthonormal basis of a subspace of `C^d`, stored as the columns of a
/// `d × k` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    basis: CMatrix,
}

impl SubspaceBasis {
    pub fn zero(d: usize) -> Self {
        SubspaceBasis {
            basis: CMatrix::zeros(d, 0),
        }
    }

    pub fn full(d: usize) -> Self {
        SubspaceBasis {
            basis: CMatrix::identity(d, d),
        }
    }

    /// Span of arbitrary columns.
    pub fn span_of(m: &CMatrix) -> Self {
        SubspaceBasis {
            basis: linalg::orthonormalize(m, RANK_TOL),
        }
    }

    /// Wraps columns that must already be orthonormal (Gram residual 1e-10).
    pub fn from_orthonormal(m: CMatrix) -> Result<Self> {
        let r = linalg::unitarity_residual(&m);
        if !(r <= 1e-10) {
            return Err(Error::Validation {
                what: "orthonormal basis".into(),
                residual: r,
                tolerance: 1e-10,
            });
        }
        Ok(SubspaceBasis { basis: m })
    }

    pub fn from_vectors(d: usize, vs: &[CVector]) -> Self {
        SubspaceBasis::span_of(&linalg::columns_to_matrix(d, vs))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<CVector> {
        (0..self.dim()).map(|j| self.basis.column(j).into_owned()).collect()
    }

    pub fn projector(&self) -> CMatrix {
        linalg::projector(&self.basis)
    }

    pub fn complement(&self) -> SubspaceBasis {
        SubspaceBasis {
            basis: linalg::complement(&self.basis),
        }
    }

    /// Largest principal-angle sine between the two subspaces (1 when the
    /// dimensions differ).
    pub fn distance(&self, other: &SubspaceBasis) -> f64 {
        if self.dim() != other.dim() || self.ambient_dim() != other.ambient_dim() {
            return 1.0;
        }
        let d = self.ambient_dim();
        let resid = (CMatrix::identity(d, d) - other.projector()) * &self.basis;
        linalg::op_norm(&resid)
    }

    /// Equality up to principal angles of `1e-8`.
    pub fn same_subspace(&self, other: &SubspaceBasis) -> bool {
        self.distance(other) <= 1e-8
    }

    /// `‖(I − P) L P‖` maximised over `L ∈ {A, B}`.
    pub fn invariance_defect(&self, m: &PModule) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let d = self.ambient_dim();
        let out = CMatrix::identity(d, d) - self.projector();
        let q = &self.basis;
        linalg::op_norm(&(&out * m.a() * q)).max(linalg::op_norm(&(&out * m.b() * q)))
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    ambient_dim: usize,
    basis: Vec<VectorJson>,
}

impl Serialize for SubspaceBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceJson {
            ambient_dim: self.ambient_dim(),
            basis: self.vectors().iter().map(VectorJson::from).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubspaceBasis {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = SubspaceJson::deserialize(de)?;
        let vs = j
            .basis
            .iter()
            .map(|v| v.to_vector(j.ambient_dim))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        SubspaceBasis::from_orthonormal(linalg::columns_to_matrix(j.ambient_dim, &vs))
            .map_err(serde::de::Error::custom)
    }
}

/// Irreducible sub-modules plus a residual subspace, mutually orthogonal and
/// spanning `C^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub irreducibles: Vec<SubspaceBasis>,
    pub residual: SubspaceBasis,
}

impl Decomposition {
    pub fn component_dims(&self) -> Vec<usize> {
        self.irreducibles.iter().map(|s| s.dim()).collect()
    }

    /// Direct sum of the irreducible components.
    pub fn complete_part(&self) -> SubspaceBasis {
        let d = self.residual.ambient_dim();
        let parts: Vec<&CMatrix> = self.irreducibles.iter().map(|s| s.matrix()).collect();
        if parts.is_empty() {
            return SubspaceBasis::zero(d);
        }
        SubspaceBasis {
            basis: linalg::hstack(&parts),
        }
    }
}

/// Smallest subspace containing the columns of `q` and closed under `A`, `B`.
pub fn closure_of_subspace(m: &PModule, q: &CMatrix) -> SubspaceBasis {
    let mut cur = linalg::orthonormalize(q, RANK_TOL);
    loop {
        let next = linalg::orthonormalize(
            &linalg::hstack(&[&cur, &(m.a() * &cur), &(m.b() * &cur)]),
            RANK_TOL,
        );
        if next.ncols() == cur.ncols() {
            return SubspaceBasis { basis: cur };
        }
        cur = next;
    }
}

/// Smallest sub-module containing `v`.
pub fn closure_of(m: &PModule, v: &CVector) -> Result<SubspaceBasis> {
    if v.len() != m.dim() {
        return Err(Error::invalid("vector dimension does not match module"));
    }
    if v.norm() == 0.0 {
        return Err(Error::invalid("closure of the zero vector"));
    }
    Ok(closure_of_subspace(m, &CMatrix::from_column_slice(v.len(), 1, v.as_slice())))
}

/// Smallest subspace containing `q` and closed under `A*`, `B*`.
fn adjoint_closure(m: &PModule, q: &CMatrix) -> SubspaceBasis {
    let a = m.a().adjoint();
    let b = m.b().adjoint();
    let mut cur = linalg::orthonormalize(q, RANK_TOL);
    loop {
        let next = linalg::orthonormalize(&linalg::hstack(&[&cur, &(&a * &cur), &(&b * &cur)]), RANK_TOL);
        if next.ncols() == cur.ncols() {
            return SubspaceBasis { basis: cur };
        }
        cur = next;
    }
}

/// Largest sub-module contained in `s`.
pub fn largest_submodule_within(m: &PModule, s: &SubspaceBasis) -> Result<SubspaceBasis> {
    if s.ambient_dim() != m.dim() {
        return Err(Error::invalid("subspace dimension does not match module"));
    }
    let d = m.dim();
    let mut q = s.matrix().clone();
    while q.ncols() > 0 {
        let out = CMatrix::identity(d, d) - linalg::projector(&q);
        let stacked = linalg::vstack(&[&(&out * m.a() * &q), &(&out * m.b() * &q)]);
        let kernel = linalg::null_space(&stacked, RANK_TOL);
        if kernel.ncols() == q.ncols() {
            break;
        }
        q = linalg::orthonormalize(&(&q * kernel), RANK_TOL);
    }
    Ok(SubspaceBasis { basis: q })
}

/// Orthonormal basis (flattened, column-major) of the unital algebra
/// generated by `A` and `B`.
pub fn algebra_basis(m: &PModule) -> Vec<CMatrix> {
    let d = m.dim();
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut frontier = vec![CMatrix::identity(d, d)];
    while !frontier.is_empty() && basis.len() < d * d {
        let mut next = Vec::new();
        for x in frontier {
            let mut r = x.clone();
            let n0 = r.norm();
            if n0 == 0.0 {
                continue;
            }
            r /= c(n0, 0.0);
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for e in &basis {
                    let ip = e.dotc(&r);
                    r -= e * ip;
                }
            }
            let nr = r.norm();
            if nr > 1e-8 {
                r /= c(nr, 0.0);
                next.push(m.a() * &r);
                next.push(m.b() * &r);
                basis.push(r);
                if basis.len() == d * d {
                    break;
                }
            }
        }
        frontier = next;
    }
    basis
}

/// Dimension of the unital algebra generated by `A` and `B`; equals `d²`
/// exactly when there is no proper nonzero sub-module.
pub fn algebra_dimension(m: &PModule) -> usize {
    algebra_basis(m).len()
}

fn random_algebra_element<R: Rng>(basis: &[CMatrix], rng: &mut R) -> CMatrix {
    let d = basis[0].nrows();
    let mut x = CMatrix::zeros(d, d);
    let coeffs = linalg::gaussian_vector(basis.len(), rng);
    for (e, z) in basis.iter().zip(coeffs.iter()) {
        x += e * *z;
    }
    x
}

/// Candidate vectors whose closures are tried: eigenvectors of `x`.
fn eigen_candidates(x: &CMatrix) -> Vec<CVector> {
    let d = x.nrows();
    let mut out = Vec::new();
    for lambda in linalg::eigenvalues(x) {
        let shifted = x - CMatrix::identity(d, d) * lambda;
        let sv = linalg::singular_values(&shifted);
        // loosest threshold that still leaves a nontrivial kernel
        let mut k = linalg::null_space(&shifted, 1e-7);
        if k.ncols() == 0 {
            let smin = sv.last().copied().unwrap_or(0.0);
            k = linalg::null_space(&shifted, (smin * 1.000001 + 1e-300) / sv[0].max(1.0));
        }
        for j in 0..k.ncols() {
            out.push(k.column(j).into_owned());
        }
    }
    out
}

/// A proper nonzero sub-module of a reducible module, in its coordinates.
fn proper_submodule<R: Rng>(m: &PModule, basis: &[CMatrix], rng: &mut R) -> Option<CMatrix> {
    let d = m.dim();
    for _ in 0..SEARCH_RETRIES {
        let x = random_algebra_element(basis, rng);
        for v in eigen_candidates(&x) {
            let cl = closure_of_subspace(m, &CMatrix::from_column_slice(d, 1, v.as_slice()));
            if cl.dim() > 0 && cl.dim() < d && cl.invariance_defect(m) <= INVARIANCE_TOL {
                return Some(cl.basis);
            }
        }
        // Left eigenvectors: a proper subspace closed under A*, B* has an
        // A, B-invariant orthogonal complement.
        for v in eigen_candidates(&x.adjoint()) {
            let cl = adjoint_closure(m, &CMatrix::from_column_slice(d, 1, v.as_slice()));
            if cl.dim() > 0 && cl.dim() < d {
                let comp = cl.complement();
                if comp.invariance_defect(m) <= INVARIANCE_TOL {
                    return Some(comp.basis);
                }
            }
        }
    }
    None
}

/// A minimal (irreducible) sub-module of `m`, in its coordinates.
fn minimal_submodule<R: Rng>(m: &PModule, rng: &mut R) -> Result<CMatrix> {
    let d = m.dim();
    if d == 1 {
        return Ok(CMatrix::identity(1, 1));
    }
    let basis = algebra_basis(m);
    if basis.len() == d * d {
        return Ok(CMatrix::identity(d, d));
    }
    let q = proper_submodule(m, &basis, rng).ok_or_else(|| {
        Error::Unresolved(format!(
            "algebra has dimension {} < {} but no proper sub-module was found in {SEARCH_RETRIES} attempts",
            basis.len(),
            d * d
        ))
    })?;
    let sub = m.restrict(&q)?;
    let inner = minimal_submodule(&sub, rng)?;
    Ok(linalg::orthonormalize(&(q * inner), RANK_TOL))
}

/// Confirms that every sampled vector of `h` generates all of `h`.
fn confirm_minimal<R: Rng>(m: &PModule, h: &SubspaceBasis, rng: &mut R) -> bool {
    (0..MINIMALITY_SAMPLES).all(|_| {
        let coeffs = linalg::gaussian_vector(h.dim(), rng);
        let v = h.matrix() * coeffs;
        closure_of_subspace(m, &CMatrix::from_column_slice(v.len(), 1, v.as_slice())).dim() == h.dim()
    })
}

pub fn decompose(m: &PModule) -> Result<Decomposition> {
    decompose_with_seed(m, DEFAULT_SEED)
}

/// Greedy decomposition: repeatedly extract a minimal sub-module from the
/// largest sub-module orthogonal to the components found so far.
pub fn decompose_with_seed(m: &PModule, seed: u64) -> Result<Decomposition> {
    let d = m.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut comps: Vec<SubspaceBasis> = Vec::new();
    let residual = loop {
        let rest = if comps.is_empty() {
            SubspaceBasis::full(d)
        } else {
            let parts: Vec<&CMatrix> = comps.iter().map(|s| s.matrix()).collect();
            SubspaceBasis {
                basis: linalg::complement(&linalg::hstack(&parts)),
            }
        };
        if rest.is_zero() {
            break rest;
        }
        let k = largest_submodule_within(m, &rest)?;
        if k.is_zero() {
            break rest;
        }
        let sub = m.restrict(k.matrix())?;
        let local = minimal_submodule(&sub, &mut rng)?;
        let h = SubspaceBasis::span_of(&(k.matrix() * &local));
        if !confirm_minimal(m, &h, &mut rng) {
            return Err(Error::Unresolved(format!(
                "component of dimension {} failed the minimality check",
                h.dim()
            )));
        }
        comps.push(h);
    };
    let dec = Decomposition {
        irreducibles: comps,
        residual,
    };
    check_decomposition(m, &dec)?;
    Ok(dec)
}

fn check_decomposition(m: &PModule, dec: &Decomposition) -> Result<()> {
    let d = m.dim();
    for (i, h) in dec.irreducibles.iter().enumerate() {
        let r = h.invariance_defect(m);
        if !(r <= INVARIANCE_TOL) {
            return Err(Error::Unresolved(format!("component {i} is not invariant (defect {r:.2e})")));
        }
    }
    let mut parts: Vec<&CMatrix> = dec.irreducibles.iter().map(|s| s.matrix()).collect();
    parts.push(dec.residual.matrix());
    let all = linalg::hstack(&parts);
    if all.ncols() != d || linalg::unitarity_residual(&all) > 1e-9 {
        return Err(Error::Unresolved("components and residual are not an orthogonal splitting".into()));
    }
    if !largest_submodule_within(m, &dec.residual)?.is_zero() {
        return Err(Error::Unresolved("residual contains a sub-module".into()));
    }
    Ok(())
}

/// The direct sum of the irreducible components, verified complete.
pub fn smallest_complete_submodule(m: &PModule) -> Result<SubspaceBasis> {
    let dec = decompose(m)?;
    let k = dec.complete_part();
    if !largest_submodule_within(m, &k.complement())?.is_zero() {
        return Err(Error::Unresolved("complement of the complete part contains a sub-module".into()));
    }
    Ok(k)
}

/// Pythagorean dimension: dimension of the smallest complete sub-module.
pub fn pdim(m: &PModule) -> Result<usize> {
    Ok(smallest_complete_submodule(m)?.dim())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulePredicates {
    pub irreducible: bool,
    pub indecomposable: bool,
    pub full: bool,
}

pub fn predicates_of(dec: &Decomposition) -> ModulePredicates {
    let d = dec.residual.ambient_dim();
    let n = dec.irreducibles.len();
    ModulePredicates {
        irreducible: n == 1 && dec.irreducibles[0].dim() == d,
        indecomposable: n == 1,
        full: dec.residual.is_zero(),
    }
}

pub fn module_predicates(m: &PModule) -> Result<ModulePredicates> {
    Ok(predicates_of(&decompose(m)?))
}
