//! Pythagorean modules `(A, B)` on `C^d` with `A*A + B*B = I`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::json::MatrixJson;
use crate::linalg::{self, c};
use crate::words::{self, BinaryWord};
use crate::{CMatrix, Error, Result, C64};

/// Default validation tolerance per unit of dimension.
pub const VALIDATION_TOL_PER_DIM: f64 = 1e-10;

/// Tolerance on `|phase| = 1`.
pub const PHASE_TOL: f64 = 1e-12;

/// Tolerance on unitarity of conjugating matrices.
pub const UNITARY_TOL: f64 = 1e-10;

/// Default validation tolerance `1e-10 * d`.
pub fn default_tolerance(d: usize) -> f64 {
    VALIDATION_TOL_PER_DIM * d as f64
}

/// A validated Pythagorean module.
///
/// Invariant: `‖A*A + B*B − I‖_F <= tol` for the tolerance used at
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PModule {
    a: CMatrix,
    b: CMatrix,
}

/// Unit-modulus diagonal matrix, stored as its phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PhaseDiagonal {
    phases: Vec<C64>,
}

impl PhaseDiagonal {
    pub fn new(phases: Vec<C64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::invalid("phase diagonal must be non-empty"));
        }
        for (k, z) in phases.iter().enumerate() {
            let r = (z.norm() - 1.0).abs();
            if !(r <= PHASE_TOL) {
                return Err(Error::Validation {
                    what: format!("phase {k} has modulus {}", z.norm()),
                    residual: r,
                    tolerance: PHASE_TOL,
                });
            }
        }
        Ok(PhaseDiagonal { phases })
    }

    /// Phases `exp(2 pi i t_k)`.
    pub fn from_turns(turns: &[f64]) -> Result<Self> {
        PhaseDiagonal::new(
            turns
                .iter()
                .map(|t| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t))
                .collect(),
        )
    }

    pub fn identity(d: usize) -> Self {
        PhaseDiagonal {
            phases: vec![c(1.0, 0.0); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[C64] {
        &self.phases
    }

    pub fn det(&self) -> C64 {
        self.phases.iter().product()
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&crate::CVector::from_vec(self.phases.clone()))
    }

    /// Phases shifted so that entry `k` of the result is entry `k + s` of `self`.
    pub fn rotate_left(&self, s: usize) -> Self {
        let mut p = self.phases.clone();
        let n = p.len();
        p.rotate_left(s % n);
        PhaseDiagonal { phases: p }
    }
}

impl TryFrom<Vec<[f64; 2]>> for PhaseDiagonal {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        PhaseDiagonal::new(v.into_iter().map(|z| C64::new(z[0], z[1])).collect())
    }
}

impl From<PhaseDiagonal> for Vec<[f64; 2]> {
    fn from(p: PhaseDiagonal) -> Self {
        p.phases.iter().map(|z| [z.re, z.im]).collect()
    }
}

fn check_square(name: &str, m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::invalid(format!(
            "{name} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::invalid(format!("{name} has non-finite entries")));
    }
    Ok(m.nrows())
}

/// `‖A*A + B*B − I‖_F`.
pub fn pythagorean_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.ncols();
    (a.adjoint() * a + b.adjoint() * b - CMatrix::identity(d, d)).norm()
}

impl PModule {
    /// Validates with the default tolerance `1e-10 * d`.
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        let d = check_square("A", &a)?;
        PModule::with_tolerance(a, b, default_tolerance(d))
    }

    pub fn with_tolerance(a: CMatrix, b: CMatrix, tol: f64) -> Result<Self> {
        let d = check_square("A", &a)?;
        let db = check_square("B", &b)?;
        if d != db {
            return Err(Error::invalid(format!("A is {d}x{d} but B is {db}x{db}")));
        }
        let r = pythagorean_residual(&a, &b);
        if !(r <= tol) {
            return Err(Error::Validation {
                what: "A*A + B*B = I".into(),
                residual: r,
                tolerance: tol,
            });
        }
        Ok(PModule { a, b })
    }

    /// Splits a `2d × d` isometry into its top (`A`) and bottom (`B`) halves.
    pub fn from_isometry(r: &CMatrix) -> Result<Self> {
        if r.nrows() != 2 * r.ncols() || r.ncols() == 0 {
            return Err(Error::invalid(format!(
                "isometry must be 2d x d, got {}x{}",
                r.nrows(),
                r.ncols()
            )));
        }
        let d = r.ncols();
        let res = linalg::unitarity_residual(r);
        let tol = default_tolerance(d);
        if !(res <= tol) {
            return Err(Error::Validation {
                what: "R*R = I".into(),
                residual: res,
                tolerance: tol,
            });
        }
        PModule::new(r.rows(0, d).into_owned(), r.rows(d, d).into_owned())
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    /// `A` for letter 0, `B` for letter 1.
    pub fn letter(&self, l: u8) -> &CMatrix {
        if l == 0 {
            &self.a
        } else {
            &self.b
        }
    }

    /// The stacked isometry `[A; B]`.
    pub fn isometry(&self) -> CMatrix {
        linalg::vstack(&[&self.a, &self.b])
    }

    pub fn residual(&self) -> f64 {
        pythagorean_residual(&self.a, &self.b)
    }

    /// `L_{w_n} ··· L_{w_1}`: the first letter acts first.
    pub fn word_operator(&self, w: &BinaryWord) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::identity(d, d);
        for &l in w.letters() {
            m = self.letter(l) * m;
        }
        m
    }

    pub fn direct_sum(&self, other: &PModule) -> PModule {
        let (d1, d2) = (self.dim(), other.dim());
        let block = |x: &CMatrix, y: &CMatrix| {
            let mut m = CMatrix::zeros(d1 + d2, d1 + d2);
            m.view_mut((0, 0), (d1, d1)).copy_from(x);
            m.view_mut((d1, d1), (d2, d2)).copy_from(y);
            m
        };
        PModule {
            a: block(&self.a, &other.a),
            b: block(&self.b, &other.b),
        }
    }

    /// `(U A U*, U B U*)`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<PModule> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::invalid("conjugating matrix has wrong shape"));
        }
        let r = linalg::unitarity_residual(u);
        if !(r <= UNITARY_TOL) {
            return Err(Error::Validation {
                what: "U*U = I".into(),
                residual: r,
                tolerance: UNITARY_TOL,
            });
        }
        let ua = u * &self.a * u.adjoint();
        let ub = u * &self.b * u.adjoint();
        PModule::new(ua, ub)
    }

    /// Restriction to a sub-module with orthonormal basis `q`
    /// (`Q* A Q`, `Q* B Q`).
    pub fn restrict(&self, q: &CMatrix) -> Result<PModule> {
        if q.ncols() == 0 {
            return Err(Error::invalid("cannot restrict to the zero subspace"));
        }
        let a = q.adjoint() * &self.a * q;
        let b = q.adjoint() * &self.b * q;
        PModule::with_tolerance(a, b, 1e-7 * q.ncols() as f64)
    }
}

#[derive(Serialize, Deserialize)]
struct PModuleJson {
    d: usize,
    #[serde(rename = "A")]
    a: MatrixJson,
    #[serde(rename = "B")]
    b: MatrixJson,
}

impl Serialize for PModule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PModuleJson {
            d: self.dim(),
            a: MatrixJson::from(&self.a),
            b: MatrixJson::from(&self.b),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PModule {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = PModuleJson::deserialize(de)?;
        PModule::from_json_parts(j, None).map_err(serde::de::Error::custom)
    }
}

impl PModule {
    fn from_json_parts(j: PModuleJson, tol: Option<f64>) -> Result<Self> {
        if j.d == 0 {
            return Err(Error::invalid("d must be positive"));
        }
        let tol = tol.unwrap_or_else(|| default_tolerance(j.d));
        PModule::with_tolerance(j.a.to_matrix(j.d, j.d)?, j.b.to_matrix(j.d, j.d)?, tol)
    }

    /// Parses the JSON form, keeping validation errors distinct from
    /// syntax errors.
    pub fn from_json_str(s: &str) -> Result<Self> {
        PModule::from_json_str_with_tolerance(s, None)
    }

    /// As [`PModule::from_json_str`], validating against `tol` when given.
    pub fn from_json_str_with_tolerance(s: &str, tol: Option<f64>) -> Result<Self> {
        let j: PModuleJson = serde_json::from_str(s)?;
        PModule::from_json_parts(j, tol)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrices serialize")
    }
}

/// Module from a `2d × d` matrix with standard complex Gaussian entries
/// orthonormalised by QR; deterministic in `seed`.
pub fn random_module(d: usize, seed: u64) -> Result<PModule> {
    if d == 0 {
        return Err(Error::invalid("d must be positive"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let r = linalg::q_factor(&linalg::gaussian_matrix(2 * d, d, &mut rng));
    PModule::from_isometry(&r)
}

/// The cyclic partial shifts `A_w`, `B_w`: `e_k ↦ e_{k+1}` under `A_w` when
/// letter `k` of `w` is 0 and under `B_w` otherwise (indices mod `|w|`).
pub fn shift_pair(w: &BinaryWord) -> (CMatrix, CMatrix) {
    let d = w.len();
    let mut a = CMatrix::zeros(d, d);
    let mut b = CMatrix::zeros(d, d);
    for (k, &l) in w.letters().iter().enumerate() {
        let target = if l == 0 { &mut a } else { &mut b };
        target[((k + 1) % d, k)] = c(1.0, 0.0);
    }
    (a, b)
}

/// `Z · m_w = (A_w Z, B_w Z)` for a prime word `w`.
pub fn atomic_module(w: &BinaryWord, z: &PhaseDiagonal) -> Result<PModule> {
    if !words::is_prime(w)? {
        return Err(Error::invalid(format!("word {w} is not prime")));
    }
    if z.dim() != w.len() {
        return Err(Error::invalid(format!(
            "phase diagonal has dimension {} but word has length {}",
            z.dim(),
            w.len()
        )));
    }
    let (a, b) = shift_pair(w);
    let zm = z.matrix();
    PModule::new(a * &zm, b * &zm)
}

/// Weighted shift `A e_k = a_{k+1} e_{k+1}`, `B e_k = b_{k+1} e_{k+1}`
/// (indices mod `d`), where `z[k]` holds `(a_{k+1}, b_{k+1})` in 0-based
/// storage. Letter `k` of the matching atomic word is 0 exactly when
/// `z[(k + 1) % d] = (1, 0)`.
pub fn gp_module(z: &[(C64, C64)]) -> Result<PModule> {
    let d = z.len();
    if d == 0 {
        return Err(Error::invalid("gp vector must be non-empty"));
    }
    let mut a = CMatrix::zeros(d, d);
    let mut b = CMatrix::zeros(d, d);
    for (k, (ak, bk)) in z.iter().enumerate() {
        let r = (ak.norm_sqr() + bk.norm_sqr() - 1.0).abs();
        if !(r <= 1e-12) {
            return Err(Error::Validation {
                what: format!("|a_{0}|^2 + |b_{0}|^2 = 1", k + 1),
                residual: r,
                tolerance: 1e-12,
            });
        }
        // entry k feeds e_k from e_{k-1}
        let src = (k + d - 1) % d;
        a[(k, src)] = *ak;
        b[(k, src)] = *bk;
    }
    PModule::new(a, b)
}

/// `(p^{1/2 + is}, (1 − p)^{1/2 + is})` on `C`.
pub fn bernoulli_module(p: f64, s: f64) -> Result<PModule> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p = {p} must lie in (0, 1)")));
    }
    let e = c(0.5, s);
    let a = c(p, 0.0).powc(e);
    let b = c(1.0 - p, 0.0).powc(e);
    PModule::new(
        CMatrix::from_element(1, 1, a),
        CMatrix::from_element(1, 1, b),
    )
}

/// One-dimensional module `(a, b)`.
pub fn scalar_module(a: C64, b: C64) -> Result<PModule> {
    PModule::new(CMatrix::from_element(1, 1, a), CMatrix::from_element(1, 1, b))
}
