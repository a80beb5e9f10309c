//! Finite binary words, prime (aperiodic) words, cyclic classes and
//! eventually periodic rays.
//!
//! Letters are stored as `0`/`1` bytes. Repo-wide convention: letter `0`
//! stands for the operator `A`, letter `1` for `B`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Exhaustive enumeration in [`necklace_count`] is limited to this length.
pub const MAX_ENUMERATION_LENGTH: usize = 20;

/// A finite word over `{0, 1}`, possibly empty.
///
/// Ordering is lexicographic with a proper prefix sorting before its
/// extensions, which is also the left-to-right order of the leaves of a tree.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryWord(Vec<u8>);

impl BinaryWord {
    pub fn empty() -> Self {
        BinaryWord(Vec::new())
    }

    /// Builds a word from letters; every letter must be 0 or 1.
    pub fn from_letters(letters: impl Into<Vec<u8>>) -> Result<Self> {
        let letters = letters.into();
        if let Some(pos) = letters.iter().position(|&l| l > 1) {
            return Err(Error::parse(pos, "letters must be 0 or 1"));
        }
        Ok(BinaryWord(letters))
    }

    /// The word `letter^n`.
    pub fn repeated(letter: u8, n: usize) -> Self {
        assert!(letter <= 1);
        BinaryWord(vec![letter; n])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, letter: u8) -> Self {
        let mut v = self.0.clone();
        v.push(letter);
        BinaryWord(v)
    }

    pub fn concat(&self, other: &BinaryWord) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BinaryWord(v)
    }

    pub fn is_prefix_of(&self, other: &BinaryWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// The suffix `x` with `prefix · x == self`, if `prefix` is a prefix.
    pub fn strip_prefix(&self, prefix: &BinaryWord) -> Option<BinaryWord> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|s| BinaryWord(s.to_vec()))
    }

    /// Cyclic rotation moving the first `k` letters to the end.
    pub fn rotate_left(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        BinaryWord(v)
    }

    /// Parent vertex in the infinite binary tree (drops the last letter).
    pub fn parent(&self) -> Option<BinaryWord> {
        if self.0.is_empty() {
            None
        } else {
            Some(BinaryWord(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            f.write_str(if l == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BinaryWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => v.push(0),
                '1' => v.push(1),
                _ => return Err(Error::parse(i, format!("unexpected character {c:?} in binary word"))),
            }
        }
        Ok(BinaryWord(v))
    }
}

impl Serialize for BinaryWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BinaryWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn require_nonempty(w: &BinaryWord) -> Result<()> {
    if w.is_empty() {
        Err(Error::invalid("empty word"))
    } else {
        Ok(())
    }
}

/// Length of the shortest `v` with `w = v^k`.
fn primitive_period(letters: &[u8]) -> usize {
    let n = letters.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| letters[i] == letters[i - p]))
        .unwrap_or(n)
}

/// True iff `w` is not a proper power `v^k`, `k >= 2`.
pub fn is_prime(w: &BinaryWord) -> Result<bool> {
    require_nonempty(w)?;
    Ok(primitive_period(w.letters()) == w.len())
}

/// Lexicographically least cyclic rotation of `w`.
pub fn cyclic_representative(w: &BinaryWord) -> Result<BinaryWord> {
    require_nonempty(w)?;
    Ok((0..w.len()).map(|k| w.rotate_left(k)).min().expect("non-empty"))
}

/// Index `k` such that `w.rotate_left(k)` equals the cyclic representative.
/// The smallest such index is returned.
pub fn representative_rotation(w: &BinaryWord) -> Result<usize> {
    require_nonempty(w)?;
    let rep = cyclic_representative(w)?;
    Ok((0..w.len()).find(|&k| w.rotate_left(k) == rep).expect("rotation exists"))
}

/// Sorted cyclic representatives of the prime words of length `d`
/// (the Lyndon words of length `d`).
///
/// Generated with Duval's successor rule rather than by filtering all `2^d`
/// words, so [`necklace_count`] stays an independent check.
pub fn prime_classes(d: usize) -> Result<Vec<BinaryWord>> {
    if d == 0 {
        return Err(Error::invalid("length must be positive"));
    }
    let mut out = Vec::new();
    // Lyndon words of length <= d in lexicographic order; keep those of length d.
    let mut w: Vec<u8> = vec![0];
    loop {
        if w.len() == d {
            out.push(BinaryWord(w.clone()));
        }
        // Extend periodically to length d.
        let m = w.len();
        while w.len() < d {
            let c = w[w.len() - m];
            w.push(c);
        }
        // Strip trailing maximal letters.
        while w.last() == Some(&1) {
            w.pop();
        }
        match w.last_mut() {
            None => break,
            Some(last) => *last += 1,
        }
    }
    Ok(out)
}

/// Number of aperiodic binary necklaces of length `d`, by exhaustive
/// enumeration of all `2^d` words.
pub fn necklace_count(d: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::invalid("length must be positive"));
    }
    if d > MAX_ENUMERATION_LENGTH {
        return Err(Error::Resource(format!(
            "necklace enumeration limited to length {MAX_ENUMERATION_LENGTH}"
        )));
    }
    let mask: u32 = if d == 32 { u32::MAX } else { (1u32 << d) - 1 };
    let rot = |x: u32| ((x << 1) | (x >> (d - 1))) & mask;
    let mut count = 0;
    for x in 0..=mask {
        // x is counted iff it is the unique minimum of its rotation orbit
        // (orbit of full size d).
        let mut y = x;
        let mut smallest = true;
        let mut period = d;
        for k in 1..d {
            y = rot(y);
            if y == x {
                period = k;
                break;
            }
            if y < x {
                smallest = false;
                break;
            }
        }
        if smallest && period == d {
            count += 1;
        }
    }
    Ok(count)
}

/// An eventually periodic infinite word `head · period^∞`.
///
/// Stored canonically: the period is primitive and the head does not end with
/// the last letter of the period (that letter can always be absorbed by
/// rotating the period), so equal rays have equal fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ray {
    head: BinaryWord,
    period: BinaryWord,
}

impl Ray {
    pub fn new(head: BinaryWord, period: BinaryWord) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::invalid("ray period must be non-empty"));
        }
        let p = primitive_period(period.letters());
        let mut period: Vec<u8> = period.letters()[..p].to_vec();
        let mut head = head.0;
        while let (Some(&h), Some(&t)) = (head.last(), period.last()) {
            if h != t {
                break;
            }
            head.pop();
            period.rotate_right(1);
        }
        Ok(Ray {
            head: BinaryWord(head),
            period: BinaryWord(period),
        })
    }

    /// The purely periodic ray `w^∞`.
    pub fn periodic(w: &BinaryWord) -> Result<Self> {
        Ray::new(BinaryWord::empty(), w.clone())
    }

    pub fn head(&self) -> &BinaryWord {
        &self.head
    }

    pub fn period(&self) -> &BinaryWord {
        &self.period
    }

    /// The first `n` letters.
    pub fn prefix(&self, n: usize) -> BinaryWord {
        let h = self.head.letters();
        let p = self.period.letters();
        BinaryWord(
            (0..n)
                .map(|i| if i < h.len() { h[i] } else { p[(i - h.len()) % p.len()] })
                .collect(),
        )
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^inf", self.head, self.period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    #[test]
    fn primality() {
        assert!(is_prime(&w("01")).unwrap());
        assert!(!is_prime(&w("0101")).unwrap());
        assert!(is_prime(&w("0")).unwrap());
        assert!(!is_prime(&w("111")).unwrap());
        assert!(is_prime(&w("0010")).unwrap());
        assert!(matches!(is_prime(&BinaryWord::empty()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn representatives() {
        assert_eq!(cyclic_representative(&w("10")).unwrap(), w("01"));
        assert_eq!(cyclic_representative(&w("110")).unwrap(), w("011"));
        assert_eq!(cyclic_representative(&w("0")).unwrap(), w("0"));
        assert!(cyclic_representative(&BinaryWord::empty()).is_err());
        assert_eq!(representative_rotation(&w("10")).unwrap(), 1);
    }

    /// Brute force: all words of length d, keep prime ones, dedupe by rotation.
    fn brute_classes(d: usize) -> Vec<BinaryWord> {
        let mut reps: Vec<BinaryWord> = (0u32..(1 << d))
            .map(|x| BinaryWord((0..d).map(|i| ((x >> (d - 1 - i)) & 1) as u8).collect()))
            .filter(|x| is_prime(x).unwrap())
            .map(|x| cyclic_representative(&x).unwrap())
            .collect();
        reps.sort();
        reps.dedup();
        reps
    }

    #[test]
    fn classes_small() {
        assert_eq!(prime_classes(1).unwrap(), vec![w("0"), w("1")]);
        assert_eq!(prime_classes(2).unwrap(), vec![w("01")]);
        assert_eq!(prime_classes(4).unwrap().len(), 3);
        assert_eq!(prime_classes(3).unwrap(), vec![w("001"), w("011")]);
        for d in 1..=10 {
            assert_eq!(prime_classes(d).unwrap(), brute_classes(d), "d={d}");
        }
        assert!(prime_classes(0).is_err());
    }

    /// Möbius-inversion closed form, used only as an oracle.
    fn mobius_count(d: u64) -> u64 {
        fn mu(mut n: u64) -> i64 {
            let mut r = 1;
            let mut p = 2;
            while p * p <= n {
                if n.is_multiple_of(p) {
                    n /= p;
                    if n.is_multiple_of(p) {
                        return 0;
                    }
                    r = -r;
                }
                p += 1;
            }
            if n > 1 {
                r = -r;
            }
            r
        }
        let s: i64 = (1..=d).filter(|k| d.is_multiple_of(*k)).map(|k| mu(d / k) * (1i64 << k)).sum();
        (s / d as i64) as u64
    }

    #[test]
    fn necklaces() {
        assert_eq!(necklace_count(1).unwrap(), 2);
        assert_eq!(necklace_count(3).unwrap(), 2);
        assert_eq!(necklace_count(6).unwrap(), 9);
        for d in 1..=16 {
            assert_eq!(necklace_count(d).unwrap(), mobius_count(d as u64));
        }
        assert!(necklace_count(0).is_err());
        assert!(matches!(necklace_count(21), Err(Error::Resource(_))));
    }

    #[test]
    fn rays_are_canonical() {
        let a = Ray::new(w("1"), w("01")).unwrap(); // 1 01 01 ... = (10)^inf
        let b = Ray::periodic(&w("10")).unwrap();
        assert_eq!(a, b);
        let c = Ray::new(w(""), w("0101")).unwrap();
        assert_eq!(c.period(), &w("01"));
        assert_eq!(c.prefix(5), w("01010"));
        assert!(Ray::new(w("0"), BinaryWord::empty()).is_err());
    }

    fn word_strategy() -> impl Strategy<Value = BinaryWord> {
        prop::collection::vec(0u8..2, 1..14).prop_map(BinaryWord)
    }

    proptest! {
        #[test]
        fn primality_is_rotation_invariant(x in word_strategy(), k in 0usize..14) {
            prop_assert_eq!(is_prime(&x).unwrap(), is_prime(&x.rotate_left(k)).unwrap());
        }

        #[test]
        fn representative_idempotent_and_invariant(x in word_strategy(), k in 0usize..14) {
            let r = cyclic_representative(&x).unwrap();
            prop_assert_eq!(cyclic_representative(&r).unwrap(), r.clone());
            prop_assert_eq!(cyclic_representative(&x.rotate_left(k)).unwrap(), r.clone());
            prop_assert_eq!(x.rotate_left(representative_rotation(&x).unwrap()), r);
        }

        #[test]
        fn ray_prefixes_match_definition(h in prop::collection::vec(0u8..2, 0..5), p in word_strategy()) {
            let head = BinaryWord(h);
            let ray = Ray::new(head.clone(), p.clone()).unwrap();
            let n = head.len() + 3 * p.len();
            let mut expect = head.letters().to_vec();
            while expect.len() < n {
                expect.extend_from_slice(p.letters());
            }
            expect.truncate(n);
            prop_assert_eq!(ray.prefix(n), BinaryWord(expect));
        }
    }
}
