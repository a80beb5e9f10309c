//! The induced representation on the dense subspace of finite tree vectors.
//!
//! A tree vector `[t, ξ]` carries one vector of `C^d` per leaf of `t`.
//! Splitting a leaf replaces `ξ_ℓ` by `Aξ_ℓ` at `ℓ0` and `Bξ_ℓ` at `ℓ1`;
//! this is an isometry, and vectors are compared after refining both to a
//! common tree. Every operation here maps finite tree vectors to finite tree
//! vectors, so results are exact up to floating point.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forest::{common_refinement, Tree, VElement};
use crate::json::VectorJson;
use crate::linalg::gaussian_vector;
use crate::pmodule::PModule;
use crate::words::BinaryWord;
use crate::{CVector, Error, Result, C64};

/// Largest leaf count any refinement may produce.
pub const DEFAULT_LEAF_BOUND: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeVector {
    d: usize,
    tree: Tree,
    values: Vec<CVector>,
}

impl TreeVector {
    pub fn new(d: usize, tree: Tree, values: Vec<CVector>) -> Result<Self> {
        if values.len() != tree.len() {
            return Err(Error::invalid(format!(
                "{} decorations for a tree with {} leaves",
                values.len(),
                tree.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.len() != d) {
            return Err(Error::invalid(format!("decoration of length {} in dimension {d}", v.len())));
        }
        Ok(TreeVector { d, tree, values })
    }

    /// `[I, ξ]` on the trivial tree.
    pub fn embed(xi: &CVector) -> Self {
        TreeVector {
            d: xi.len(),
            tree: Tree::trivial(),
            values: vec![xi.clone()],
        }
    }

    pub fn zero(d: usize) -> Self {
        TreeVector::embed(&CVector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn values(&self) -> &[CVector] {
        &self.values
    }

    pub fn leaves(&self) -> impl Iterator<Item = (&BinaryWord, &CVector)> {
        self.tree.leaves().iter().zip(&self.values)
    }

    /// Decoration at a leaf address, if it is a leaf.
    pub fn get(&self, address: &BinaryWord) -> Option<&CVector> {
        let i = self.tree.leaves().binary_search(address).ok()?;
        Some(&self.values[i])
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> TreeVector {
        TreeVector {
            d: self.d,
            tree: self.tree.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Random tree with `n` leaves and Gaussian decorations.
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Self {
        let tree = Tree::random(n, rng);
        let values = (0..tree.len()).map(|_| gaussian_vector(d, rng)).collect();
        TreeVector { d, tree, values }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("tree vectors serialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: TreeVectorJson = serde_json::from_str(s)?;
        j.build()
    }
}

#[derive(Serialize, Deserialize)]
struct TreeVectorJson {
    d: usize,
    leaves: BTreeMap<String, VectorJson>,
}

impl TreeVectorJson {
    fn build(self) -> Result<TreeVector> {
        let mut leaves = Vec::with_capacity(self.leaves.len());
        let mut values = Vec::with_capacity(self.leaves.len());
        for (k, v) in self.leaves {
            leaves.push(k.parse::<BinaryWord>()?);
            values.push(v.to_vector(self.d)?);
        }
        let mut order: Vec<usize> = (0..leaves.len()).collect();
        order.sort_by(|&i, &j| leaves[i].cmp(&leaves[j]));
        let tree = Tree::new(order.iter().map(|&i| leaves[i].clone()).collect())?;
        let values = order.iter().map(|&i| values[i].clone()).collect();
        TreeVector::new(self.d, tree, values)
    }
}

impl Serialize for TreeVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TreeVectorJson {
            d: self.d,
            leaves: self
                .leaves()
                .map(|(k, v)| (k.to_string(), VectorJson::from_vector(v)))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TreeVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        TreeVectorJson::deserialize(de)?.build().map_err(serde::de::Error::custom)
    }
}

fn check_dim(m: &PModule, v: &TreeVector) -> Result<()> {
    if m.dim() != v.d {
        return Err(Error::invalid(format!(
            "tree vector of dimension {} for a module of dimension {}",
            v.d,
            m.dim()
        )));
    }
    Ok(())
}

fn apply_word(m: &PModule, w: &BinaryWord, x: &CVector) -> CVector {
    let mut x = x.clone();
    for &l in w.letters() {
        x = m.letter(l) * x;
    }
    x
}

/// Pushes decorations down to `target`, which must refine `v.tree()`.
pub fn refine(m: &PModule, v: &TreeVector, target: &Tree) -> Result<TreeVector> {
    check_dim(m, v)?;
    if target.len() > DEFAULT_LEAF_BOUND {
        return Err(Error::Resource(format!(
            "refinement to {} leaves exceeds the bound {DEFAULT_LEAF_BOUND}",
            target.len()
        )));
    }
    let mut values = Vec::with_capacity(target.len());
    for l in target.leaves() {
        let i = v
            .tree
            .leaf_above(l)
            .ok_or_else(|| Error::invalid(format!("target leaf {l} is not below a leaf of the vector's tree")))?;
        let suffix = l.strip_prefix(&v.tree.leaves()[i]).expect("prefix");
        values.push(apply_word(m, &suffix, &v.values[i]));
    }
    Ok(TreeVector {
        d: v.d,
        tree: target.clone(),
        values,
    })
}

/// Both vectors on their common refinement.
fn aligned(m: &PModule, x: &TreeVector, y: &TreeVector) -> Result<(TreeVector, TreeVector)> {
    check_dim(m, x)?;
    check_dim(m, y)?;
    if x.tree == y.tree {
        return Ok((x.clone(), y.clone()));
    }
    let (u, _, _) = common_refinement(&x.tree, &y.tree);
    Ok((refine(m, x, &u)?, refine(m, y, &u)?))
}

/// `⟨x, y⟩`, linear in `x`.
pub fn inner_product(m: &PModule, x: &TreeVector, y: &TreeVector) -> Result<C64> {
    let (x, y) = aligned(m, x, y)?;
    Ok(x.values.iter().zip(&y.values).map(|(a, b)| b.dotc(a)).sum())
}

pub fn add(m: &PModule, x: &TreeVector, y: &TreeVector) -> Result<TreeVector> {
    let (x, y) = aligned(m, x, y)?;
    let values = x.values.iter().zip(&y.values).map(|(a, b)| a + b).collect();
    Ok(TreeVector { values, ..x })
}

pub fn sub(m: &PModule, x: &TreeVector, y: &TreeVector) -> Result<TreeVector> {
    add(m, x, &y.scale(C64::new(-1.0, 0.0)))
}

/// `‖x − y‖` computed on the common refinement.
pub fn distance(m: &PModule, x: &TreeVector, y: &TreeVector) -> Result<f64> {
    Ok(sub(m, x, y)?.norm())
}

/// `τ_ν v` (snip the subtree at `ν`) or, with `adjoint`, `τ*_ν v` (graft
/// `v` under `ν` and decorate every other leaf by zero).
pub fn tau(m: &PModule, nu: &BinaryWord, v: &TreeVector, adjoint: bool) -> Result<TreeVector> {
    check_dim(m, v)?;
    if adjoint {
        let outside = Tree::containing(nu);
        let mut pairs: Vec<(BinaryWord, CVector)> = outside
            .leaves()
            .iter()
            .filter(|l| *l != nu)
            .map(|l| (l.clone(), CVector::zeros(v.d)))
            .collect();
        pairs.extend(v.leaves().map(|(l, x)| (nu.concat(l), x.clone())));
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (leaves, values) = pairs.into_iter().unzip();
        return Ok(TreeVector {
            d: v.d,
            tree: Tree::from_sorted_unchecked(leaves),
            values,
        });
    }
    let (u, _, _) = common_refinement(&v.tree, &Tree::containing(nu));
    let x = refine(m, v, &u)?;
    let (leaves, values): (Vec<_>, Vec<_>) = x
        .leaves()
        .filter_map(|(l, val)| l.strip_prefix(nu).map(|s| (s, val.clone())))
        .unzip();
    Ok(TreeVector {
        d: v.d,
        tree: Tree::from_sorted_unchecked(leaves),
        values,
    })
}

/// `ρ_ν v = τ*_ν τ_ν v`.
pub fn rho(m: &PModule, nu: &BinaryWord, v: &TreeVector) -> Result<TreeVector> {
    tau(m, nu, &tau(m, nu, v, false)?, true)
}

/// `σ(g) v`: the decoration on `μ_j x` moves to `ν_{π(j)} x`.
pub fn act(m: &PModule, g: &VElement, v: &TreeVector) -> Result<TreeVector> {
    check_dim(m, v)?;
    let (u, _, _) = common_refinement(&v.tree, g.domain());
    let x = refine(m, v, &u)?;
    let pairs = g.expand_domain(&u).expect("u refines the domain");
    let mut moved: Vec<(BinaryWord, CVector)> = pairs
        .into_iter()
        .zip(x.values)
        .map(|((_, image), val)| (image, val))
        .collect();
    moved.sort_by(|a, b| a.0.cmp(&b.0));
    let (leaves, values) = moved.into_iter().unzip();
    Ok(TreeVector {
        d: v.d,
        tree: Tree::from_sorted_unchecked(leaves),
        values,
    })
}

/// `S_ν S_μ* v = τ*_ν τ_μ v`.
pub fn cuntz_apply(m: &PModule, word: (&BinaryWord, &BinaryWord), v: &TreeVector) -> Result<TreeVector> {
    let (nu, mu) = word;
    tau(m, nu, &tau(m, mu, v, false)?, true)
}

/// `⟨σ(g)[I, ξ], [I, η]⟩`.
pub fn matrix_coefficient(m: &PModule, g: &VElement, xi: &CVector, eta: &CVector) -> Result<C64> {
    inner_product(m, &act(m, g, &TreeVector::embed(xi))?, &TreeVector::embed(eta))
}

/// Running averages `(1/n) Σ_{k<n} ⟨σ(g^k) x, y⟩` for `n = 1..=count`.
/// Fails with a resource error once a power of `g` has more than
/// `leaf_bound` leaves.
pub fn cesaro_series(
    m: &PModule,
    g: &VElement,
    x: &TreeVector,
    y: &TreeVector,
    count: usize,
    leaf_bound: usize,
) -> Result<Vec<C64>> {
    if count == 0 {
        return Err(Error::invalid("Cesàro average needs n ≥ 1"));
    }
    let mut powers = Vec::with_capacity(count);
    let mut p = VElement::identity();
    for k in 0..count {
        if p.domain().len() > leaf_bound {
            return Err(Error::Resource(format!(
                "g^{k} has {} leaves, above the bound {leaf_bound}",
                p.domain().len()
            )));
        }
        let next = g.multiply(&p);
        powers.push(p);
        p = next;
    }
    let terms: Vec<C64> = powers
        .par_iter()
        .map(|gk| inner_product(m, &act(m, gk, x)?, y))
        .collect::<Result<_>>()?;
    let mut acc = C64::new(0.0, 0.0);
    Ok(terms
        .iter()
        .enumerate()
        .map(|(k, t)| {
            acc += t;
            acc / (k + 1) as f64
        })
        .collect())
}

pub fn cesaro_average(m: &PModule, g: &VElement, x: &TreeVector, y: &TreeVector, n: usize) -> Result<C64> {
    Ok(*cesaro_series(m, g, x, y, n, DEFAULT_LEAF_BOUND)?.last().expect("n ≥ 1"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoAdic {
    /// `U_K v = τ₀*τ₁ v + Σ_{k=1}^{K} τ*_{1^k0} τ_{0^k1} v`.
    pub vector: TreeVector,
    /// `‖τ_{0^K} v‖`, bounding both the unprocessed part and the relation
    /// residual.
    pub tail_bound: f64,
    /// `‖τ_{0^{K+1}} v‖`, the exact norm of the unprocessed part: the initial
    /// spaces of the summands and this remainder are orthogonal, so
    /// `‖U_K v‖² + remainder² = ‖v‖²`.
    pub remainder: f64,
}

pub fn two_adic_unitary(m: &PModule, v: &TreeVector, k: usize) -> Result<TwoAdic> {
    if k == 0 {
        return Err(Error::invalid("truncation K must be at least 1"));
    }
    let zero = BinaryWord::from_letters(vec![0])?;
    let one = BinaryWord::from_letters(vec![1])?;
    let mut out = cuntz_apply(m, (&zero, &one), v)?;
    for j in 1..=k {
        let target = BinaryWord::repeated(1, j).child(0);
        let source = BinaryWord::repeated(0, j).child(1);
        out = add(m, &out, &cuntz_apply(m, (&target, &source), v)?)?;
    }
    Ok(TwoAdic {
        vector: out,
        tail_bound: tau(m, &BinaryWord::repeated(0, k), v, false)?.norm(),
        remainder: tau(m, &BinaryWord::repeated(0, k + 1), v, false)?.norm(),
    })
}

/// `‖s₁ U_K v − U_K² s₁ v‖` with `s₁ = τ₁*`, and the tail bound of `v`.
/// The difference telescopes to `τ*_{1^{K+1}0} τ_{0^K1} v`, so the residual
/// is `‖τ_{0^K1} v‖ ≤ ‖τ_{0^K} v‖`; it tends to zero for diffuse modules but
/// need not decrease with `K`.
pub fn two_adic_relation(m: &PModule, v: &TreeVector, k: usize) -> Result<(f64, f64)> {
    let one = BinaryWord::from_letters(vec![1])?;
    let uv = two_adic_unitary(m, v, k)?;
    let lhs = tau(m, &one, &uv.vector, true)?;
    let s1v = tau(m, &one, v, true)?;
    let u1 = two_adic_unitary(m, &s1v, k)?.vector;
    let rhs = two_adic_unitary(m, &u1, k)?.vector;
    Ok((distance(m, &lhs, &rhs)?, uv.tail_bound))
}
