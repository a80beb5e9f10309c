//! Word-trace fingerprints over the four letters `A, B, A*, B*`.
//!
//! A trace is invariant under cyclic rotation of its word, so only necklace
//! representatives (least rotations) are evaluated. They are enumerated by a
//! depth-first walk over prenecklaces, carrying the running product.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pmodule::PModule;
use crate::{Error, Result, C64};

/// Longest word length accepted.
pub const MAX_FINGERPRINT_LENGTH: usize = 12;

/// Fingerprints agree when every trace differs by at most this much.
pub const FINGERPRINT_TOL: f64 = 1e-7;

/// Letter `0 = A`, `1 = B`, `2 = A*`, `3 = B*`.
pub const LETTERS: usize = 4;

/// Default fingerprint length `min(2d², 12)`.
pub fn default_maxlen(d: usize) -> usize {
    (2 * d * d).min(MAX_FINGERPRINT_LENGTH)
}

/// Row-major dense copies of the four letter operators.
struct Letters {
    d: usize,
    mats: [Vec<C64>; LETTERS],
}

impl Letters {
    fn new(m: &PModule) -> Self {
        let d = m.dim();
        let flat = |x: &crate::CMatrix| {
            let mut v = Vec::with_capacity(d * d);
            for i in 0..d {
                for j in 0..d {
                    v.push(x[(i, j)]);
                }
            }
            v
        };
        let adj_a = m.a().adjoint();
        let adj_b = m.b().adjoint();
        Letters {
            d,
            mats: [flat(m.a()), flat(m.b()), flat(&adj_a), flat(&adj_b)],
        }
    }

    /// `out = L_letter · prev`.
    fn apply(&self, letter: usize, prev: &[C64], out: &mut [C64]) -> bool {
        let d = self.d;
        let l = &self.mats[letter];
        let mut nonzero = false;
        for i in 0..d {
            for j in 0..d {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..d {
                    s += l[i * d + k] * prev[k * d + j];
                }
                nonzero |= s.re != 0.0 || s.im != 0.0;
                out[i * d + j] = s;
            }
        }
        nonzero
    }

    fn trace(&self, m: &[C64]) -> C64 {
        (0..self.d).map(|i| m[i * self.d + i]).sum()
    }

    fn identity(&self) -> Vec<C64> {
        let d = self.d;
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = C64::new(1.0, 0.0);
        }
        v
    }
}

/// A word over the four letters, packed two bits per letter with the first
/// letter most significant; ordering is by length, then lexicographic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PackedWord {
    pub len: u8,
    pub code: u32,
}

impl PackedWord {
    pub fn from_letters(letters: &[u8]) -> Self {
        let mut code = 0u32;
        for &l in letters {
            code = (code << 2) | l as u32;
        }
        PackedWord {
            len: letters.len() as u8,
            code,
        }
    }

    pub fn letters(&self) -> Vec<u8> {
        (0..self.len as u32)
            .rev()
            .map(|i| ((self.code >> (2 * i)) & 3) as u8)
            .collect()
    }

    /// Human-readable form such as `A B* A`.
    pub fn describe(&self) -> String {
        if self.len == 0 {
            return "I".into();
        }
        self.letters()
            .iter()
            .map(|l| ["A", "B", "A*", "B*"][*l as usize])
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Least rotation of a word.
fn least_rotation(w: &[u8]) -> Vec<u8> {
    let n = w.len();
    (0..n)
        .map(|k| {
            let mut r = w.to_vec();
            r.rotate_left(k);
            r
        })
        .min()
        .unwrap_or_default()
}

/// Traces `tr(L_{w_n} ··· L_{w_1})` for all necklace words of length
/// `<= maxlen`, including the empty word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub maxlen: usize,
    pub words: Vec<PackedWord>,
    pub traces: Vec<C64>,
}

impl Fingerprint {
    /// Trace of any word, looked up through its least rotation.
    pub fn trace_of(&self, letters: &[u8]) -> Option<C64> {
        if letters.len() > self.maxlen || letters.iter().any(|&l| l > 3) {
            return None;
        }
        let key = PackedWord::from_letters(&least_rotation(letters));
        self.words.binary_search(&key).ok().map(|i| self.traces[i])
    }

    /// Largest trace difference; infinite when the word lists differ.
    pub fn distance(&self, other: &Fingerprint) -> f64 {
        if self.words != other.words {
            return f64::INFINITY;
        }
        self.traces
            .iter()
            .zip(&other.traces)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn agrees_with(&self, other: &Fingerprint) -> bool {
        self.distance(other) <= FINGERPRINT_TOL
    }
}

fn check_maxlen(maxlen: usize) -> Result<()> {
    if maxlen == 0 {
        return Err(Error::invalid("fingerprint length must be positive"));
    }
    if maxlen > MAX_FINGERPRINT_LENGTH {
        return Err(Error::Resource(format!(
            "fingerprint length limited to {MAX_FINGERPRINT_LENGTH}"
        )));
    }
    Ok(())
}

/// Walks prenecklaces below a fixed first letter, calling `visit` on every
/// necklace. `prods[t]` holds the product of the first `t` letters.
struct Walk<'a> {
    letters: &'a Letters,
    maxlen: usize,
    word: Vec<u8>,
    prods: Vec<Vec<C64>>,
}

impl<'a> Walk<'a> {
    fn new(letters: &'a Letters, maxlen: usize) -> Self {
        let dd = letters.d * letters.d;
        let mut prods = vec![vec![C64::new(0.0, 0.0); dd]; maxlen + 1];
        prods[0] = letters.identity();
        Walk {
            letters,
            maxlen,
            word: Vec::with_capacity(maxlen),
            prods,
        }
    }

    /// Places `letter` at position `t` (1-based) with period `p` and descends.
    fn descend(&mut self, t: usize, p: usize, letter: u8, zero: bool, out: &mut Vec<(PackedWord, C64)>) {
        self.word.push(letter);
        let (head, tail) = self.prods.split_at_mut(t);
        let now_zero = zero || !self.letters.apply(letter as usize, &head[t - 1], &mut tail[0]);
        if t.is_multiple_of(p) {
            let tr = if now_zero {
                C64::new(0.0, 0.0)
            } else {
                self.letters.trace(&self.prods[t])
            };
            out.push((PackedWord::from_letters(&self.word), tr));
        }
        if t < self.maxlen {
            let base = self.word[t - p];
            self.descend(t + 1, p, base, now_zero, out);
            for b in base + 1..LETTERS as u8 {
                self.descend(t + 1, t + 1, b, now_zero, out);
            }
        }
        self.word.pop();
    }
}

/// Fingerprint with `maxlen` letters at most.
pub fn fingerprint(m: &PModule, maxlen: usize) -> Result<Fingerprint> {
    check_maxlen(maxlen)?;
    let letters = Letters::new(m);
    let mut all: Vec<(PackedWord, C64)> = (0..LETTERS as u8)
        .into_par_iter()
        .map(|first| {
            let mut walk = Walk::new(&letters, maxlen);
            let mut out = Vec::new();
            walk.descend(1, 1, first, false, &mut out);
            out
        })
        .flatten()
        .collect();
    all.push((PackedWord::from_letters(&[]), C64::new(m.dim() as f64, 0.0)));
    all.sort_by_key(|(w, _)| *w);
    let (words, traces) = all.into_iter().unzip();
    Ok(Fingerprint {
        maxlen,
        words,
        traces,
    })
}

/// Simultaneous walk over two modules, aborting on the first trace mismatch.
struct PairWalk<'a> {
    l1: &'a Letters,
    l2: &'a Letters,
    target: usize,
    word: Vec<u8>,
    p1: Vec<Vec<C64>>,
    p2: Vec<Vec<C64>>,
    stop: &'a AtomicBool,
}

impl<'a> PairWalk<'a> {
    /// Returns false on a mismatch at a necklace of length `target`.
    fn descend(&mut self, t: usize, p: usize, letter: u8) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return false;
        }
        self.word.push(letter);
        let nz1 = {
            let (h, tl) = self.p1.split_at_mut(t);
            self.l1.apply(letter as usize, &h[t - 1], &mut tl[0])
        };
        let nz2 = {
            let (h, tl) = self.p2.split_at_mut(t);
            self.l2.apply(letter as usize, &h[t - 1], &mut tl[0])
        };
        let mut ok = true;
        if !nz1 && !nz2 {
            // every extension has zero trace in both modules
        } else if t == self.target {
            if t.is_multiple_of(p) {
                let d = (self.l1.trace(&self.p1[t]) - self.l2.trace(&self.p2[t])).norm();
                ok = d <= FINGERPRINT_TOL;
            }
        } else {
            let base = self.word[t - p];
            ok = self.descend(t + 1, p, base);
            let mut b = base + 1;
            while ok && b < LETTERS as u8 {
                ok = self.descend(t + 1, t + 1, b);
                b += 1;
            }
        }
        self.word.pop();
        if !ok {
            self.stop.store(true, Ordering::Relaxed);
        }
        ok
    }
}

/// True iff the fingerprints of length `maxlen` agree within
/// [`FINGERPRINT_TOL`]. Lengths are checked in increasing order so that
/// mismatches on short words exit early.
pub fn fingerprints_agree(m1: &PModule, m2: &PModule, maxlen: usize) -> Result<bool> {
    check_maxlen(maxlen)?;
    if m1.dim() != m2.dim() {
        return Ok(false);
    }
    let l1 = Letters::new(m1);
    let l2 = Letters::new(m2);
    let stop = AtomicBool::new(false);
    for target in 1..=maxlen {
        let ok = (0..LETTERS as u8).into_par_iter().all(|first| {
            let dd = l1.d * l1.d;
            let mut p1 = vec![vec![C64::new(0.0, 0.0); dd]; target + 1];
            let mut p2 = p1.clone();
            p1[0] = l1.identity();
            p2[0] = l2.identity();
            let mut w = PairWalk {
                l1: &l1,
                l2: &l2,
                target,
                word: Vec::with_capacity(target),
                p1,
                p2,
                stop: &stop,
            };
            w.descend(1, 1, first)
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use crate::pmodule::{atomic_module, random_module, PhaseDiagonal};
    use crate::words::BinaryWord;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// Number of k-ary necklaces of length n (periodic ones included), by
    /// brute force over all words.
    fn brute_necklaces(k: u32, n: u32) -> usize {
        let mut reps = std::collections::BTreeSet::new();
        for x in 0..k.pow(n) {
            let w: Vec<u8> = (0..n).map(|i| ((x / k.pow(i)) % k) as u8).collect();
            reps.insert(least_rotation(&w));
        }
        reps.len()
    }

    #[test]
    fn enumerates_all_necklaces_once() {
        let m = random_module(1, 3).unwrap();
        let f = fingerprint(&m, 5).unwrap();
        for n in 1..=5 {
            let count = f.words.iter().filter(|w| w.len as u32 == n).count();
            assert_eq!(count, brute_necklaces(4, n), "n={n}");
        }
        assert_eq!(f.words[0].len, 0);
        let mut sorted = f.words.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), f.words.len());
    }

    #[test]
    fn traces_match_direct_products() {
        let m = random_module(3, 5).unwrap();
        let f = fingerprint(&m, 4).unwrap();
        let mats = [m.a().clone(), m.b().clone(), m.a().adjoint(), m.b().adjoint()];
        for (w, tr) in f.words.iter().zip(&f.traces) {
            let mut p = crate::CMatrix::identity(3, 3);
            for l in w.letters() {
                p = &mats[l as usize] * p;
            }
            assert!((p.trace() - tr).norm() < 1e-12);
        }
        // rotation lookup
        let t1 = f.trace_of(&[2, 0, 1]).unwrap();
        let t2 = f.trace_of(&[0, 1, 2]).unwrap();
        assert!((t1 - t2).norm() < 1e-12);
    }

    #[test]
    fn atomic_examples() {
        let m = atomic_module(&"01".parse::<BinaryWord>().unwrap(), &PhaseDiagonal::identity(2)).unwrap();
        let f = fingerprint(&m, 2).unwrap();
        let one = C64::new(1.0, 0.0);
        assert!(f.trace_of(&[0]).unwrap().norm() < 1e-15);
        assert!(f.trace_of(&[1]).unwrap().norm() < 1e-15);
        assert!((f.trace_of(&[0, 2]).unwrap() - one).norm() < 1e-15);
        assert!((f.trace_of(&[1, 3]).unwrap() - one).norm() < 1e-15);

        let twisted = atomic_module(
            &"01".parse::<BinaryWord>().unwrap(),
            &PhaseDiagonal::new(vec![C64::new(0.0, 1.0); 2]).unwrap(),
        )
        .unwrap();
        let g = fingerprint(&twisted, 4).unwrap();
        assert!(f.distance(&fingerprint(&m, 2).unwrap()) == 0.0);
        assert!(!fingerprint(&m, 4).unwrap().agrees_with(&g));
        assert!(!fingerprints_agree(&m, &twisted, 4).unwrap());
    }

    #[test]
    fn conjugation_invariance_and_pairwise_agreement() {
        let m = random_module(2, 8).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let c = m.conjugate(&haar_unitary(2, &mut rng)).unwrap();
        let f1 = fingerprint(&m, 6).unwrap();
        let f2 = fingerprint(&c, 6).unwrap();
        assert!(f1.distance(&f2) <= 1e-9);
        assert!(fingerprints_agree(&m, &c, 8).unwrap());
        assert!(!fingerprints_agree(&m, &random_module(2, 9).unwrap(), 8).unwrap());
    }

    #[test]
    fn length_bounds() {
        let m = random_module(1, 1).unwrap();
        assert!(matches!(fingerprint(&m, 13), Err(Error::Resource(_))));
        assert!(matches!(fingerprint(&m, 0), Err(Error::InvalidArgument(_))));
        assert_eq!(default_maxlen(1), 2);
        assert_eq!(default_maxlen(2), 8);
        assert_eq!(default_maxlen(3), 12);
    }
}
