//! Finite rooted binary trees as standard dyadic partitions, and reduced
//! tree-pair diagrams for elements of Thompson's groups `F ⊂ T ⊂ V`.
//!
//! A tree is the sorted list of its leaf addresses. An element
//! `(domain, range, perm)` maps `μ_j · x ↦ ν_{perm[j]} · x` for the domain
//! leaves `μ_j` and range leaves `ν_k`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::words::BinaryWord;
use crate::{Error, Result};

/// Sorted leaf addresses of a finite rooted binary tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    leaves: Vec<BinaryWord>,
}

/// For each leaf of a tree, the leaves of the subtree grafted onto it
/// (as suffixes). A trivial forest has `[""]` at every leaf.
pub type Forest = Vec<Vec<BinaryWord>>;

/// Checks the partition property: consecutive leaves `p01^k`, `p10^j`,
/// first leaf `0^j`, last leaf `1^k`. Returns the index of the first
/// offending leaf on failure.
fn partition_defect(leaves: &[BinaryWord]) -> Option<(usize, &'static str)> {
    if leaves.is_empty() {
        return Some((0, "a tree has at least one leaf"));
    }
    if leaves[0].letters().iter().any(|&l| l != 0) {
        return Some((0, "first leaf must be of the form 0^j"));
    }
    let n = leaves.len();
    if leaves[n - 1].letters().iter().any(|&l| l != 1) {
        return Some((n - 1, "last leaf must be of the form 1^k"));
    }
    for i in 0..n - 1 {
        let a = leaves[i].letters();
        let b = leaves[i + 1].letters();
        let ones = a.iter().rev().take_while(|&&l| l == 1).count();
        if ones == a.len() {
            return Some((i, "leaf 1^k must be last"));
        }
        let p = &a[..a.len() - ones - 1];
        let ok = b.len() > p.len()
            && &b[..p.len()] == p
            && b[p.len()] == 1
            && b[p.len() + 1..].iter().all(|&l| l == 0);
        if !ok {
            return Some((i + 1, "leaves are not adjacent dyadic intervals"));
        }
    }
    None
}

impl Tree {
    /// The tree with a single leaf at the root.
    pub fn trivial() -> Self {
        Tree {
            leaves: vec![BinaryWord::empty()],
        }
    }

    pub fn new(leaves: Vec<BinaryWord>) -> Result<Self> {
        if let Some((i, msg)) = partition_defect(&leaves) {
            return Err(Error::invalid(format!("leaf {i}: {msg}")));
        }
        Ok(Tree { leaves })
    }

    /// Wraps leaves already known to form a sorted partition.
    pub(crate) fn from_sorted_unchecked(leaves: Vec<BinaryWord>) -> Self {
        debug_assert!(partition_defect(&leaves).is_none());
        Tree { leaves }
    }

    /// Smallest tree having `w` as a leaf.
    pub fn containing(w: &BinaryWord) -> Self {
        let mut leaves = vec![w.clone()];
        let mut prefix = w.clone();
        while let Some(parent) = prefix.parent() {
            let last = prefix.letters()[prefix.len() - 1];
            leaves.push(parent.child(1 - last));
            prefix = parent;
        }
        leaves.sort();
        Tree { leaves }
    }

    /// Complete tree of depth `n`.
    pub fn complete(n: usize) -> Self {
        let mut t = Tree::trivial();
        for _ in 0..n {
            t = Tree {
                leaves: t.leaves.iter().flat_map(|l| [l.child(0), l.child(1)]).collect(),
            };
        }
        t
    }

    pub fn leaves(&self) -> &[BinaryWord] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_trivial(&self) -> bool {
        self.leaves.len() == 1
    }

    pub fn depth(&self) -> usize {
        self.leaves.iter().map(|l| l.len()).max().unwrap_or(0)
    }

    /// Adds a caret at leaf `i`.
    pub fn split(&self, i: usize) -> Tree {
        let mut leaves = self.leaves.clone();
        let l = leaves.remove(i);
        leaves.insert(i, l.child(1));
        leaves.insert(i, l.child(0));
        Tree { leaves }
    }

    /// Index of the leaf that is a prefix of `w`.
    pub fn leaf_above(&self, w: &BinaryWord) -> Option<usize> {
        // the candidate is the last leaf sorting at or before w
        let i = match self.leaves.binary_search(w) {
            Ok(i) => return Some(i),
            Err(0) => return None,
            Err(i) => i - 1,
        };
        self.leaves[i].is_prefix_of(w).then_some(i)
    }

    /// True iff every leaf of `other` lies below a leaf of `self`.
    pub fn is_refined_by(&self, other: &Tree) -> bool {
        other.leaves.iter().all(|l| self.leaf_above(l).is_some())
    }

    /// Forest `f` with `f ∘ self = finer`; `None` unless `finer` refines `self`.
    pub fn forest_to(&self, finer: &Tree) -> Option<Forest> {
        let mut forest: Forest = vec![Vec::new(); self.len()];
        for l in &finer.leaves {
            let i = self.leaf_above(l)?;
            forest[i].push(l.strip_prefix(&self.leaves[i]).expect("prefix"));
        }
        Some(forest)
    }

    /// Random tree with `n` leaves made by splitting uniformly chosen leaves.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Tree {
        let mut t = Tree::trivial();
        while t.len() < n.max(1) {
            let i = rng.random_range(0..t.len());
            t = t.split(i);
        }
        t
    }
}

/// Coarsest common refinement `u` of two trees together with the forests
/// `p`, `q` such that `p ∘ t1 = u = q ∘ t2`.
pub fn common_refinement(t1: &Tree, t2: &Tree) -> (Tree, Forest, Forest) {
    let mut all: Vec<BinaryWord> = t1.leaves.iter().chain(&t2.leaves).cloned().collect();
    all.sort();
    all.dedup();
    // drop every address that has an extension in the list; extensions sort
    // directly after their prefix
    let leaves: Vec<BinaryWord> = (0..all.len())
        .filter(|&i| i + 1 == all.len() || !all[i].is_prefix_of(&all[i + 1]))
        .map(|i| all[i].clone())
        .collect();
    let u = Tree { leaves };
    let p = t1.forest_to(&u).expect("refines t1");
    let q = t2.forest_to(&u).expect("refines t2");
    (u, p, q)
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("[]");
        }
        let parts: Vec<String> = self.leaves.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    F,
    T,
    V,
}

/// A reduced tree-pair diagram with leaf permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VElement {
    domain: Tree,
    range: Tree,
    perm: Vec<usize>,
}

impl VElement {
    pub fn identity() -> Self {
        VElement {
            domain: Tree::trivial(),
            range: Tree::trivial(),
            perm: vec![0],
        }
    }

    /// Validates and reduces.
    pub fn new(domain: Tree, range: Tree, perm: Vec<usize>) -> Result<Self> {
        if domain.len() != range.len() {
            return Err(Error::invalid(format!(
                "domain has {} leaves but range has {}",
                domain.len(),
                range.len()
            )));
        }
        if perm.len() != domain.len() {
            return Err(Error::invalid("permutation length does not match leaf count"));
        }
        let mut seen = vec![false; perm.len()];
        for &k in &perm {
            if k >= perm.len() || seen[k] {
                return Err(Error::invalid("leaf permutation is not a bijection"));
            }
            seen[k] = true;
        }
        Ok(VElement { domain, range, perm }.reduced())
    }

    /// Family element `μ_j ↦ ν_j` with the identity permutation.
    pub fn from_trees(domain: Tree, range: Tree) -> Result<Self> {
        let n = domain.len();
        VElement::new(domain, range, (0..n).collect())
    }

    pub fn domain(&self) -> &Tree {
        &self.domain
    }

    pub fn range(&self) -> &Tree {
        &self.range
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Pairs `(μ_j, ν_{perm[j]})` in domain order.
    pub fn leaf_map(&self) -> Vec<(BinaryWord, BinaryWord)> {
        (0..self.perm.len())
            .map(|j| (self.domain.leaves[j].clone(), self.range.leaves[self.perm[j]].clone()))
            .collect()
    }

    /// Builds from leaf pairs whose first and second entries each form a
    /// partition, then reduces.
    fn from_pairs(mut pairs: Vec<(BinaryWord, BinaryWord)>) -> Self {
        pairs.sort();
        let domain = Tree {
            leaves: pairs.iter().map(|p| p.0.clone()).collect(),
        };
        let mut range_leaves: Vec<BinaryWord> = pairs.iter().map(|p| p.1.clone()).collect();
        range_leaves.sort();
        let perm = pairs
            .iter()
            .map(|p| range_leaves.binary_search(&p.1).expect("range leaf"))
            .collect();
        VElement {
            domain,
            range: Tree { leaves: range_leaves },
            perm,
        }
        .reduced()
    }

    /// Repeatedly cancels domain siblings `x0, x1` mapped onto range siblings
    /// `y0, y1` in order.
    fn reduced(self) -> Self {
        let mut pairs = self.leaf_map();
        loop {
            let mut merged = false;
            let mut i = 0;
            let mut next = Vec::with_capacity(pairs.len());
            while i < pairs.len() {
                if i + 1 < pairs.len() {
                    let (x0, y0) = &pairs[i];
                    let (x1, y1) = &pairs[i + 1];
                    let sib = |a: &BinaryWord, b: &BinaryWord| {
                        !a.is_empty()
                            && a.len() == b.len()
                            && a.parent() == b.parent()
                            && a.letters()[a.len() - 1] == 0
                            && b.letters()[b.len() - 1] == 1
                    };
                    if sib(x0, x1) && sib(y0, y1) {
                        next.push((x0.parent().unwrap(), y0.parent().unwrap()));
                        i += 2;
                        merged = true;
                        continue;
                    }
                }
                next.push(pairs[i].clone());
                i += 1;
            }
            pairs = next;
            if !merged {
                break;
            }
        }
        let domain = Tree {
            leaves: pairs.iter().map(|p| p.0.clone()).collect(),
        };
        let mut range_leaves: Vec<BinaryWord> = pairs.iter().map(|p| p.1.clone()).collect();
        range_leaves.sort();
        let perm = pairs
            .iter()
            .map(|p| range_leaves.binary_search(&p.1).expect("range leaf"))
            .collect();
        VElement {
            domain,
            range: Tree { leaves: range_leaves },
            perm,
        }
    }

    /// Leaf pairs after refining the domain to `u` (which must refine it).
    pub fn expand_domain(&self, u: &Tree) -> Option<Vec<(BinaryWord, BinaryWord)>> {
        let forest = self.domain.forest_to(u)?;
        let map = self.leaf_map();
        Some(
            map.iter()
                .zip(&forest)
                .flat_map(|((mu, nu), suffixes)| suffixes.iter().map(move |s| (mu.concat(s), nu.concat(s))))
                .collect(),
        )
    }

    /// Group product `self · h` (`h` acts first).
    pub fn multiply(&self, h: &VElement) -> VElement {
        let (u, _, _) = common_refinement(&h.range, &self.domain);
        let inv = h.inverse();
        // h^{-1} expanded on u gives pairs (y in u, h^{-1}(y))
        let h_pairs = inv.expand_domain(&u).expect("u refines h range");
        let g_pairs = self.expand_domain(&u).expect("u refines g domain");
        let g_map: std::collections::HashMap<BinaryWord, BinaryWord> = g_pairs.into_iter().collect();
        let pairs = h_pairs
            .into_iter()
            .map(|(y, x)| {
                let gy = g_map.get(&y).expect("same refinement").clone();
                (x, gy)
            })
            .collect();
        VElement::from_pairs(pairs)
    }

    pub fn inverse(&self) -> VElement {
        let mut inv = vec![0; self.perm.len()];
        for (j, &k) in self.perm.iter().enumerate() {
            inv[k] = j;
        }
        VElement {
            domain: self.range.clone(),
            range: self.domain.clone(),
            perm: inv,
        }
    }

    pub fn pow(&self, k: usize) -> VElement {
        let mut r = VElement::identity();
        for _ in 0..k {
            r = self.multiply(&r);
        }
        r
    }

    pub fn is_identity(&self) -> bool {
        self.domain.is_trivial()
    }

    pub fn kind(&self) -> GroupKind {
        let n = self.perm.len();
        if self.perm.iter().enumerate().all(|(j, &k)| j == k) {
            GroupKind::F
        } else if self.perm.iter().enumerate().all(|(j, &k)| k == (j + self.perm[0]) % n) {
            GroupKind::T
        } else {
            GroupKind::V
        }
    }

    /// Image of a finite word under prefix replacement, if its domain leaf
    /// is determined.
    pub fn apply_to_word(&self, x: &BinaryWord) -> Option<BinaryWord> {
        let j = self.domain.leaf_above(x)?;
        let rest = x.strip_prefix(&self.domain.leaves[j])?;
        Some(self.range.leaves[self.perm[j]].concat(&rest))
    }

    /// Domain leaves that are not mapped identically; their union contains
    /// the support and the remaining leaves are fixed pointwise.
    pub fn support_partition(&self) -> Vec<BinaryWord> {
        self.leaf_map()
            .into_iter()
            .filter(|(mu, nu)| mu != nu)
            .map(|(mu, _)| mu)
            .collect()
    }

    /// Element acting as `g` below address `p` and as the identity elsewhere.
    pub fn graft(p: &BinaryWord, g: &VElement) -> VElement {
        let outside = Tree::containing(p);
        let mut pairs: Vec<(BinaryWord, BinaryWord)> = outside
            .leaves
            .iter()
            .filter(|l| *l != p)
            .map(|l| (l.clone(), l.clone()))
            .collect();
        for (mu, nu) in g.leaf_map() {
            pairs.push((p.concat(&mu), p.concat(&nu)));
        }
        VElement::from_pairs(pairs)
    }

    /// Random element with `n` leaves in each tree.
    pub fn random<R: Rng + ?Sized>(n: usize, kind: GroupKind, rng: &mut R) -> VElement {
        let n = n.max(1);
        let domain = Tree::random(n, rng);
        let range = Tree::random(n, rng);
        let perm: Vec<usize> = match kind {
            GroupKind::F => (0..n).collect(),
            GroupKind::T => {
                let s = rng.random_range(0..n);
                (0..n).map(|j| (j + s) % n).collect()
            }
            GroupKind::V => {
                let mut p: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    let j = rng.random_range(0..=i);
                    p.swap(i, j);
                }
                p
            }
        };
        VElement::new(domain, range, perm).expect("valid random element")
    }
}

impl fmt::Display for VElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.domain, self.range)?;
        if self.kind() != GroupKind::F {
            let p: Vec<String> = self.perm.iter().map(|k| k.to_string()).collect();
            write!(f, " perm=({})", p.join(","))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        self.ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected `{tok}`")))
        }
    }

    fn tree(&mut self) -> Result<Tree> {
        self.ws();
        let start = self.pos;
        self.expect("[")?;
        let mut leaves = Vec::new();
        self.ws();
        if self.s.get(self.pos) == Some(&b']') {
            self.pos += 1;
            return Ok(Tree::trivial());
        }
        loop {
            self.ws();
            let w0 = self.pos;
            while self.pos < self.s.len() && (self.s[self.pos] == b'0' || self.s[self.pos] == b'1') {
                self.pos += 1;
            }
            if self.pos == w0 {
                return Err(Error::parse(self.pos, "expected a binary word"));
            }
            let text = std::str::from_utf8(&self.s[w0..self.pos]).expect("ascii");
            leaves.push(text.parse::<BinaryWord>()?);
            self.ws();
            match self.s.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(Error::parse(self.pos, "expected `,` or `]`")),
            }
        }
        if let Some((i, msg)) = partition_defect(&leaves) {
            return Err(Error::parse(start, format!("leaf {i}: {msg}")));
        }
        Ok(Tree { leaves })
    }

    fn perm(&mut self) -> Result<Option<(usize, Vec<usize>)>> {
        self.ws();
        if self.pos == self.s.len() {
            return Ok(None);
        }
        let start = self.pos;
        self.expect("perm=")?;
        self.expect("(")?;
        let mut out = Vec::new();
        loop {
            self.ws();
            let n0 = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == n0 {
                return Err(Error::parse(self.pos, "expected a leaf index"));
            }
            let text = std::str::from_utf8(&self.s[n0..self.pos]).expect("ascii");
            out.push(text.parse::<usize>().map_err(|e| Error::parse(n0, e.to_string()))?);
            self.ws();
            match self.s.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(Error::parse(self.pos, "expected `,` or `)`")),
            }
        }
        Ok(Some((start, out)))
    }
}

/// Parses `[μ_1,…]->[ν_1,…]` with an optional ` perm=(k_1,…)`.
pub fn parse_element(text: &str) -> Result<VElement> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let domain = p.tree()?;
    p.expect("->")?;
    let range_pos = p.pos;
    let range = p.tree()?;
    let perm = p.perm()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(Error::parse(p.pos, "trailing input"));
    }
    if domain.len() != range.len() {
        return Err(Error::parse(
            range_pos,
            format!("domain has {} leaves but range has {}", domain.len(), range.len()),
        ));
    }
    let n = domain.len();
    let (pos, perm) = perm.unwrap_or((text.len(), (0..n).collect()));
    VElement::new(domain, range, perm).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::parse(pos, m),
        other => other,
    })
}

impl FromStr for VElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_element(s)
    }
}

#[derive(Serialize, Deserialize)]
struct VElementJson {
    domain: Vec<BinaryWord>,
    range: Vec<BinaryWord>,
    perm: Vec<usize>,
}

impl Serialize for VElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VElementJson {
            domain: self.domain.leaves.clone(),
            range: self.range.leaves.clone(),
            perm: self.perm.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VElement {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = VElementJson::deserialize(de)?;
        let build = || -> Result<VElement> { VElement::new(Tree::new(j.domain)?, Tree::new(j.range)?, j.perm) };
        build().map_err(serde::de::Error::custom)
    }
}
