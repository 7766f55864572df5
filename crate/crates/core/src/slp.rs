//! Straight-line programs over a finite alphabet: concatenation circuits that
//! describe words of length up to `2^64 - 1` in space proportional to the
//! circuit.
//!
//! Every node caches its length and a Karp-Rabin style fingerprint
//! `h(w) = sum_i (w_i + 1) x^(i-1) mod q` at a fixed set of evaluation points
//! (`q = 2^61 - 1`). Fingerprints compose along concatenation, so prefix and
//! range fingerprints cost `O(depth)`.
//!
//! [`WordComparer`] answers equality and mismatch queries. Below a length
//! threshold it expands the words and is exact; above it, "unequal" answers
//! still carry a verified mismatch position while "equal" answers have a
//! bounded error probability.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::Rng;
use thiserror::Error;

use crate::field::seeded_rng;

/// Fingerprint modulus, the Mersenne prime `2^61 - 1`.
pub const FINGERPRINT_MODULUS: u64 = (1 << 61) - 1;
/// Evaluation points carried by every [`FingerprintKey`].
pub const MAX_POINTS: usize = 16;
/// Words up to this length are compared by full expansion.
pub const DEFAULT_EXACT_THRESHOLD: u64 = 1 << 16;
const DEFAULT_KEY_SEED: u64 = 0x5eed_f00d;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlpError {
    #[error("letter {letter} outside alphabet of size {alphabet}")]
    LetterOutOfRange { letter: u32, alphabet: u32 },
    #[error("node {0} does not exist (forward reference)")]
    UnknownNode(usize),
    #[error("word length overflows 64 bits")]
    LengthOverflow,
    #[error("position {position} outside 1..={len}")]
    OutOfRange { position: u64, len: u64 },
    #[error("words have different lengths ({left} vs {right})")]
    LengthMismatch { left: u64, right: u64 },
    #[error("word of length {0} is too long to expand")]
    TooLongToExpand(u64),
    #[error("word of length {len} needs more than {MAX_POINTS} fingerprint points at error {epsilon:e}")]
    FingerprintCapacity { len: u64, epsilon: f64 },
}

#[inline]
fn mulq(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % FINGERPRINT_MODULUS as u128) as u64
}

#[inline]
fn addq(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= FINGERPRINT_MODULUS {
        s - FINGERPRINT_MODULUS
    } else {
        s
    }
}

#[inline]
fn subq(a: u64, b: u64) -> u64 {
    addq(a, FINGERPRINT_MODULUS - b)
}

/// The evaluation points of a fingerprinting session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerprintKey {
    points: [u64; MAX_POINTS],
}

impl FingerprintKey {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let mut points = [0u64; MAX_POINTS];
        for p in &mut points {
            *p = rng.gen_range(2..FINGERPRINT_MODULUS);
        }
        Self { points }
    }

    pub fn points(&self) -> &[u64; MAX_POINTS] {
        &self.points
    }
}

impl Default for FingerprintKey {
    fn default() -> Self {
        Self::from_seed(DEFAULT_KEY_SEED)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlpNode {
    Letter(u32),
    Concat(usize, usize),
}

#[derive(Clone, Copy)]
struct Print {
    h: [u64; MAX_POINTS],
    pow: [u64; MAX_POINTS],
}

/// Immutable node storage shared by any number of [`Slp`] roots.
pub struct SlpArena {
    alphabet: u32,
    nodes: Vec<SlpNode>,
    lens: Vec<u64>,
    depth: Vec<u32>,
    prints: Vec<Print>,
    key: Arc<FingerprintKey>,
}

impl fmt::Debug for SlpArena {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlpArena")
            .field("alphabet", &self.alphabet)
            .field("nodes", &self.nodes)
            .finish()
    }
}

impl SlpArena {
    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn nodes(&self) -> &[SlpNode] {
        &self.nodes
    }

    pub fn len_of(&self, node: usize) -> u64 {
        self.lens[node]
    }

    pub fn key(&self) -> &Arc<FingerprintKey> {
        &self.key
    }
}

/// Incrementally builds an [`SlpArena`]; fingerprints are computed as nodes
/// are added.
pub struct SlpBuilder {
    arena: SlpArena,
}

impl SlpBuilder {
    pub fn new(alphabet: u32) -> Self {
        Self::with_key(alphabet, Arc::new(FingerprintKey::default()))
    }

    pub fn with_key(alphabet: u32, key: Arc<FingerprintKey>) -> Self {
        Self {
            arena: SlpArena {
                alphabet,
                nodes: Vec::new(),
                lens: Vec::new(),
                depth: Vec::new(),
                prints: Vec::new(),
                key,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.arena.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arena.nodes.is_empty()
    }

    pub fn len_of(&self, node: usize) -> u64 {
        self.arena.lens[node]
    }

    pub fn letter(&mut self, a: u32) -> Result<usize, SlpError> {
        if a >= self.arena.alphabet {
            return Err(SlpError::LetterOutOfRange {
                letter: a,
                alphabet: self.arena.alphabet,
            });
        }
        let key = &self.arena.key;
        let mut print = Print {
            h: [0; MAX_POINTS],
            pow: key.points,
        };
        print.h = [a as u64 + 1; MAX_POINTS];
        Ok(self.push(SlpNode::Letter(a), 1, 0, print))
    }

    pub fn concat(&mut self, left: usize, right: usize) -> Result<usize, SlpError> {
        let n = self.arena.nodes.len();
        for id in [left, right] {
            if id >= n {
                return Err(SlpError::UnknownNode(id));
            }
        }
        let len = self.arena.lens[left]
            .checked_add(self.arena.lens[right])
            .ok_or(SlpError::LengthOverflow)?;
        let (l, r) = (self.arena.prints[left], self.arena.prints[right]);
        let mut print = l;
        for i in 0..MAX_POINTS {
            print.h[i] = addq(l.h[i], mulq(l.pow[i], r.h[i]));
            print.pow[i] = mulq(l.pow[i], r.pow[i]);
        }
        let depth = 1 + self.arena.depth[left].max(self.arena.depth[right]);
        Ok(self.push(SlpNode::Concat(left, right), len, depth, print))
    }

    /// `node` repeated `times >= 1` times, by binary doubling.
    pub fn power(&mut self, node: usize, times: u64) -> Result<usize, SlpError> {
        assert!(times >= 1, "empty words are not representable");
        let mut acc: Option<usize> = None;
        let mut base = node;
        let mut e = times;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base,
                    Some(a) => self.concat(a, base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = self.concat(base, base)?;
        }
        Ok(acc.expect("times >= 1"))
    }

    /// Balanced concatenation tree for an explicit nonempty word.
    pub fn word(&mut self, letters: &[u32]) -> Result<usize, SlpError> {
        assert!(!letters.is_empty(), "empty words are not representable");
        if letters.len() == 1 {
            return self.letter(letters[0]);
        }
        let mid = letters.len() / 2;
        let l = self.word(&letters[..mid])?;
        let r = self.word(&letters[mid..])?;
        self.concat(l, r)
    }

    fn push(&mut self, node: SlpNode, len: u64, depth: u32, print: Print) -> usize {
        let a = &mut self.arena;
        a.nodes.push(node);
        a.lens.push(len);
        a.depth.push(depth);
        a.prints.push(print);
        a.nodes.len() - 1
    }

    pub fn finish(self) -> Arc<SlpArena> {
        Arc::new(self.arena)
    }

    /// Finishes the arena and returns the word rooted at `root`.
    pub fn build(self, root: usize) -> Slp {
        assert!(root < self.arena.nodes.len(), "root out of range");
        Slp {
            arena: self.finish(),
            root,
        }
    }
}

/// A word given by a root node in a shared arena.
#[derive(Clone)]
pub struct Slp {
    arena: Arc<SlpArena>,
    root: usize,
}

impl fmt::Debug for Slp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_letters(64) {
            Ok(w) => write!(f, "Slp({w:?})"),
            Err(_) => write!(f, "Slp(len = {}, root = {})", self.len(), self.root),
        }
    }
}

impl Slp {
    pub fn new(arena: Arc<SlpArena>, root: usize) -> Self {
        assert!(root < arena.nodes.len(), "root out of range");
        Self { arena, root }
    }

    /// Single-word convenience constructor from explicit letters.
    pub fn from_letters(alphabet: u32, letters: &[u32]) -> Result<Self, SlpError> {
        let mut b = SlpBuilder::new(alphabet);
        let root = b.word(letters)?;
        Ok(b.build(root))
    }

    pub fn arena(&self) -> &Arc<SlpArena> {
        &self.arena
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn alphabet(&self) -> u32 {
        self.arena.alphabet
    }

    /// Exact word length.
    pub fn len(&self) -> u64 {
        self.arena.lens[self.root]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Word length as an arbitrary-precision integer.
    pub fn length(&self) -> BigUint {
        BigUint::from(self.len())
    }

    pub fn depth(&self) -> u32 {
        self.arena.depth[self.root]
    }

    /// Number of nodes in the backing arena.
    pub fn size(&self) -> usize {
        self.arena.nodes.len()
    }

    fn check_position(&self, k: u64) -> Result<(), SlpError> {
        if k == 0 || k > self.len() {
            Err(SlpError::OutOfRange {
                position: k,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// The letter at 1-based position `k`, found by descending the DAG.
    pub fn letter_at(&self, k: u64) -> Result<u32, SlpError> {
        self.check_position(k)?;
        let a = &self.arena;
        let mut node = self.root;
        let mut k = k;
        loop {
            match a.nodes[node] {
                SlpNode::Letter(c) => return Ok(c),
                SlpNode::Concat(l, r) => {
                    if k <= a.lens[l] {
                        node = l;
                    } else {
                        k -= a.lens[l];
                        node = r;
                    }
                }
            }
        }
    }

    /// Expands the word, refusing lengths above `limit`.
    pub fn to_letters(&self, limit: u64) -> Result<Vec<u32>, SlpError> {
        if self.len() > limit {
            return Err(SlpError::TooLongToExpand(self.len()));
        }
        let a = &self.arena;
        let mut out = Vec::with_capacity(self.len() as usize);
        let mut stack = vec![self.root];
        while let Some(node) = stack.pop() {
            match a.nodes[node] {
                SlpNode::Letter(c) => out.push(c),
                SlpNode::Concat(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        Ok(out)
    }

    /// An Slp for the subword `w[k..=k2]` (1-based, inclusive), sharing the
    /// original nodes and adding at most `2 * depth + 1` new ones.
    pub fn subword(&self, k: u64, k2: u64) -> Result<Slp, SlpError> {
        self.check_position(k)?;
        self.check_position(k2)?;
        if k > k2 {
            return Err(SlpError::OutOfRange {
                position: k,
                len: k2,
            });
        }
        let mut b = SlpBuilder {
            arena: SlpArena {
                alphabet: self.arena.alphabet,
                nodes: self.arena.nodes.clone(),
                lens: self.arena.lens.clone(),
                depth: self.arena.depth.clone(),
                prints: self.arena.prints.clone(),
                key: self.arena.key.clone(),
            },
        };
        let root = sub_range(&mut b, self.root, k, k2)?;
        Ok(b.build(root))
    }

    /// The same word with fingerprints recomputed under `key`.
    pub fn rekeyed(&self, key: Arc<FingerprintKey>) -> Slp {
        let mut b = SlpBuilder::with_key(self.arena.alphabet, key);
        for node in &self.arena.nodes {
            match *node {
                SlpNode::Letter(c) => b.letter(c),
                SlpNode::Concat(l, r) => b.concat(l, r),
            }
            .expect("valid arena");
        }
        b.build(self.root)
    }

    /// Fingerprint `h` of the prefix of length `k` (0 allowed) for the first
    /// `points` evaluation points.
    fn prefix_hash(&self, k: u64, points: usize) -> [u64; MAX_POINTS] {
        let a = &self.arena;
        let mut acc_h = [0u64; MAX_POINTS];
        let mut acc_pow = [1u64; MAX_POINTS];
        if k == 0 {
            return acc_h;
        }
        let mut node = self.root;
        let mut k = k;
        loop {
            if k == a.lens[node] {
                let p = &a.prints[node];
                for i in 0..points {
                    acc_h[i] = addq(acc_h[i], mulq(acc_pow[i], p.h[i]));
                }
                return acc_h;
            }
            match a.nodes[node] {
                SlpNode::Letter(_) => unreachable!("0 < k < 1"),
                SlpNode::Concat(l, r) => {
                    if k <= a.lens[l] {
                        node = l;
                    } else {
                        let p = &a.prints[l];
                        for i in 0..points {
                            acc_h[i] = addq(acc_h[i], mulq(acc_pow[i], p.h[i]));
                            acc_pow[i] = mulq(acc_pow[i], p.pow[i]);
                        }
                        k -= a.lens[l];
                        node = r;
                    }
                }
            }
        }
    }

    fn root_hash(&self) -> [u64; MAX_POINTS] {
        self.arena.prints[self.root].h
    }
}

fn suffix_from(b: &mut SlpBuilder, node: usize, k: u64) -> Result<usize, SlpError> {
    if k == 1 {
        return Ok(node);
    }
    match b.arena.nodes[node] {
        SlpNode::Letter(_) => unreachable!("suffix of a letter from k > 1"),
        SlpNode::Concat(l, r) => {
            let ll = b.arena.lens[l];
            if k > ll {
                suffix_from(b, r, k - ll)
            } else {
                let s = suffix_from(b, l, k)?;
                b.concat(s, r)
            }
        }
    }
}

fn prefix_to(b: &mut SlpBuilder, node: usize, k: u64) -> Result<usize, SlpError> {
    if k == b.arena.lens[node] {
        return Ok(node);
    }
    match b.arena.nodes[node] {
        SlpNode::Letter(_) => unreachable!("proper prefix of a letter"),
        SlpNode::Concat(l, r) => {
            let ll = b.arena.lens[l];
            if k <= ll {
                prefix_to(b, l, k)
            } else {
                let p = prefix_to(b, r, k - ll)?;
                b.concat(l, p)
            }
        }
    }
}

fn sub_range(b: &mut SlpBuilder, node: usize, k: u64, k2: u64) -> Result<usize, SlpError> {
    if k == 1 && k2 == b.arena.lens[node] {
        return Ok(node);
    }
    match b.arena.nodes[node] {
        SlpNode::Letter(_) => Ok(node),
        SlpNode::Concat(l, r) => {
            let ll = b.arena.lens[l];
            if k2 <= ll {
                sub_range(b, l, k, k2)
            } else if k > ll {
                sub_range(b, r, k - ll, k2 - ll)
            } else {
                let s = suffix_from(b, l, k)?;
                let p = prefix_to(b, r, k2 - ll)?;
                b.concat(s, p)
            }
        }
    }
}

/// Why two words are unequal; every variant is an exact certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnequalCertificate {
    LengthDiffers { left: u64, right: u64 },
    MismatchAt { position: u64, left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordEquality {
    /// `exact` is false when the answer rests on fingerprints.
    Equal { exact: bool },
    Unequal(UnequalCertificate),
}

impl WordEquality {
    pub fn is_equal(&self) -> bool {
        matches!(self, WordEquality::Equal { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mismatches {
    /// All mismatch positions, ascending, each verified by `letter_at`.
    Positions(Vec<u64>),
    TooMany,
}

/// Equality and mismatch queries on pairs of words.
#[derive(Debug, Clone, Copy)]
pub struct WordComparer {
    epsilon: f64,
    exact_threshold: u64,
}

impl Default for WordComparer {
    fn default() -> Self {
        Self::new(2f64.powi(-40))
    }
}

impl WordComparer {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
        }
    }

    /// Words no longer than `threshold` are expanded and compared exactly.
    pub fn with_exact_threshold(mut self, threshold: u64) -> Self {
        self.exact_threshold = threshold;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn exact_threshold(&self) -> u64 {
        self.exact_threshold
    }

    /// True if words of this length are compared deterministically.
    pub fn is_exact_for(&self, len: u64) -> bool {
        len <= self.exact_threshold
    }

    /// Fingerprint points needed so that a false "equal" at length `len` has
    /// probability at most `epsilon / len`.
    pub fn points_needed(&self, len: u64) -> Result<usize, SlpError> {
        let l = len.max(2) as f64;
        let q = FINGERPRINT_MODULUS as f64;
        let cap = SlpError::FingerprintCapacity {
            len,
            epsilon: self.epsilon,
        };
        if l * 4.0 >= q {
            return Err(cap);
        }
        let k = ((l / self.epsilon).ln() / (q / l).ln()).ceil().max(1.0);
        if k > MAX_POINTS as f64 {
            return Err(cap);
        }
        Ok(k as usize)
    }

    fn aligned(u: &Slp, v: &Slp) -> Slp {
        if Arc::ptr_eq(&u.arena.key, &v.arena.key) || u.arena.key == v.arena.key {
            v.clone()
        } else {
            v.rekeyed(u.arena.key.clone())
        }
    }

    pub fn equals(&self, u: &Slp, v: &Slp) -> Result<WordEquality, SlpError> {
        if u.len() != v.len() {
            return Ok(WordEquality::Unequal(UnequalCertificate::LengthDiffers {
                left: u.len(),
                right: v.len(),
            }));
        }
        match self.leftmost_mismatch(u, v)? {
            None => Ok(WordEquality::Equal {
                exact: self.is_exact_for(u.len()),
            }),
            Some(position) => Ok(WordEquality::Unequal(UnequalCertificate::MismatchAt {
                position,
                left: u.letter_at(position)?,
                right: v.letter_at(position)?,
            })),
        }
    }

    fn same_length(u: &Slp, v: &Slp) -> Result<u64, SlpError> {
        if u.len() != v.len() {
            Err(SlpError::LengthMismatch {
                left: u.len(),
                right: v.len(),
            })
        } else {
            Ok(u.len())
        }
    }

    /// Leftmost position where the words differ. A returned position always
    /// holds different letters; `None` carries the fingerprint error bound
    /// above the exact threshold.
    pub fn leftmost_mismatch(&self, u: &Slp, v: &Slp) -> Result<Option<u64>, SlpError> {
        let len = Self::same_length(u, v)?;
        if Arc::ptr_eq(&u.arena, &v.arena) && u.root == v.root {
            return Ok(None);
        }
        if self.is_exact_for(len) {
            let (a, b) = (u.to_letters(len)?, v.to_letters(len)?);
            return Ok(a.iter().zip(&b).position(|(x, y)| x != y).map(|i| i as u64 + 1));
        }
        let k = self.points_needed(len)?;
        let v = Self::aligned(u, &v.clone());
        let ranges = RangeDiff { u, v: &v, points: k };
        if !ranges.root_differs() {
            return Ok(None);
        }
        Ok(Some(ranges.descend_leftmost(1, len)))
    }

    /// All mismatch positions if there are at most `bound` of them.
    pub fn mismatch_positions_up_to(
        &self,
        u: &Slp,
        v: &Slp,
        bound: usize,
    ) -> Result<Mismatches, SlpError> {
        let len = Self::same_length(u, v)?;
        if Arc::ptr_eq(&u.arena, &v.arena) && u.root == v.root {
            return Ok(Mismatches::Positions(Vec::new()));
        }
        if self.is_exact_for(len) {
            let (a, b) = (u.to_letters(len)?, v.to_letters(len)?);
            let mut out = Vec::new();
            for (i, (x, y)) in a.iter().zip(&b).enumerate() {
                if x != y {
                    if out.len() == bound {
                        return Ok(Mismatches::TooMany);
                    }
                    out.push(i as u64 + 1);
                }
            }
            return Ok(Mismatches::Positions(out));
        }
        let k = self.points_needed(len)?;
        let v = Self::aligned(u, &v.clone());
        let ranges = RangeDiff { u, v: &v, points: k };
        if !ranges.root_differs() {
            return Ok(Mismatches::Positions(Vec::new()));
        }
        // depth-first, left before right, over ranges with a nonzero difference
        let mut out = Vec::new();
        let mut stack = vec![(1u64, len)];
        while let Some((a, b)) = stack.pop() {
            if a == b {
                debug_assert_ne!(u.letter_at(a)?, v.letter_at(a)?);
                if out.len() == bound {
                    return Ok(Mismatches::TooMany);
                }
                out.push(a);
                continue;
            }
            let mid = a + (b - a) / 2;
            let left = ranges.differs(a, mid);
            // the parent differs, so the right half differs whenever the left does not
            let right = !left || ranges.differs(mid + 1, b);
            if right {
                stack.push((mid + 1, b));
            }
            if left {
                stack.push((a, mid));
            }
        }
        Ok(Mismatches::Positions(out))
    }
}

/// Range fingerprint differences between two equal-length words.
struct RangeDiff<'a> {
    u: &'a Slp,
    v: &'a Slp,
    points: usize,
}

impl RangeDiff<'_> {
    fn root_differs(&self) -> bool {
        let (a, b) = (self.u.root_hash(), self.v.root_hash());
        (0..self.points).any(|i| a[i] != b[i])
    }

    /// `x^(a-1) * (h(u[a..=b]) - h(v[a..=b]))` is nonzero at some point.
    fn differs(&self, a: u64, b: u64) -> bool {
        let k = self.points;
        let (ub, ua) = (self.u.prefix_hash(b, k), self.u.prefix_hash(a - 1, k));
        let (vb, va) = (self.v.prefix_hash(b, k), self.v.prefix_hash(a - 1, k));
        (0..k).any(|i| subq(ub[i], ua[i]) != subq(vb[i], va[i]))
    }

    /// Given that `[a, b]` differs, finds a position whose letters differ,
    /// preferring the left half at every split.
    fn descend_leftmost(&self, mut a: u64, mut b: u64) -> u64 {
        while a < b {
            let mid = a + (b - a) / 2;
            if self.differs(a, mid) {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: u32 = 0;
    const B: u32 = 1;

    fn abab_power(times: u64) -> Slp {
        let mut b = SlpBuilder::new(2);
        let x = b.letter(A).unwrap();
        let y = b.letter(B).unwrap();
        let xy = b.concat(x, y).unwrap();
        let root = b.power(xy, times).unwrap();
        b.build(root)
    }

    fn fingerprinting() -> WordComparer {
        WordComparer::default().with_exact_threshold(0)
    }

    #[test]
    fn lengths() {
        let mut b = SlpBuilder::new(1);
        let a = b.letter(0).unwrap();
        let mut x = a;
        for _ in 0..10 {
            x = b.concat(x, x).unwrap();
        }
        assert_eq!(b.len_of(x), 1024);
        assert_eq!(b.len_of(a), 1);
        let three = b.power(a, 3).unwrap();
        let five = b.power(a, 5).unwrap();
        let eight = b.concat(three, five).unwrap();
        assert_eq!(b.len_of(eight), 8);
    }

    #[test]
    fn length_overflow_is_reported() {
        let mut b = SlpBuilder::new(1);
        let mut x = b.letter(0).unwrap();
        for _ in 0..63 {
            x = b.concat(x, x).unwrap();
        }
        assert_eq!(b.len_of(x), 1 << 63);
        assert_eq!(b.concat(x, x), Err(SlpError::LengthOverflow));
    }

    #[test]
    fn bad_nodes() {
        let mut b = SlpBuilder::new(2);
        assert!(matches!(b.letter(2), Err(SlpError::LetterOutOfRange { .. })));
        let a = b.letter(0).unwrap();
        assert_eq!(b.concat(a, 5), Err(SlpError::UnknownNode(5)));
    }

    #[test]
    fn letter_queries() {
        let w = abab_power(2);
        assert_eq!(w.letter_at(3).unwrap(), A);
        assert_eq!(w.letter_at(1).unwrap(), A);
        assert_eq!(w.letter_at(4).unwrap(), B);
        assert!(matches!(w.letter_at(0), Err(SlpError::OutOfRange { .. })));
        assert!(matches!(w.letter_at(5), Err(SlpError::OutOfRange { .. })));

        let mut b = SlpBuilder::new(1);
        let a = b.letter(0).unwrap();
        let root = b.power(a, 1 << 20).unwrap();
        assert_eq!(b.build(root).letter_at(777).unwrap(), 0);
    }

    #[test]
    fn subwords() {
        let w = abab_power(4);
        let s = w.subword(2, 5).unwrap();
        assert_eq!(s.to_letters(100).unwrap(), vec![B, A, B, A]);
        for j in 1..=8 {
            let single = w.subword(j, j).unwrap();
            assert_eq!(single.to_letters(1).unwrap(), vec![w.letter_at(j).unwrap()]);
        }
        let full = w.subword(1, 8).unwrap();
        assert!(fingerprinting().equals(&full, &w).unwrap().is_equal());
        assert!(w.subword(3, 2).is_err());
        assert!(w.subword(1, 9).is_err());
    }

    #[test]
    fn subword_size_bound() {
        let mut b = SlpBuilder::new(2);
        let a = b.letter(0).unwrap();
        let c = b.letter(1).unwrap();
        let ac = b.concat(a, c).unwrap();
        let root = b.power(ac, 1_000_003).unwrap();
        let w = b.build(root);
        let s = w.subword(12_345, 987_654).unwrap();
        assert_eq!(s.len(), 987_654 - 12_345 + 1);
        assert!(s.size() <= w.size() + 2 * w.depth() as usize + 1);
        for k in [1, 2, 3, 500_000, s.len()] {
            assert_eq!(s.letter_at(k).unwrap(), w.letter_at(k + 12_344).unwrap());
        }
    }

    #[test]
    fn equality_shapes() {
        // (ab)^8 built by doubling vs. by a left comb
        let doubled = abab_power(8);
        let comb = Slp::from_letters(2, &[A, B].repeat(8)).unwrap();
        for cmp in [WordComparer::default(), fingerprinting()] {
            assert!(cmp.equals(&doubled, &comb).unwrap().is_equal());
            let short = abab_power(7);
            assert_eq!(
                cmp.equals(&doubled, &short).unwrap(),
                WordEquality::Unequal(UnequalCertificate::LengthDiffers { left: 16, right: 14 })
            );
            let u = Slp::from_letters(2, &[A, B, A, B]).unwrap();
            let v = Slp::from_letters(2, &[A, B, B, B]).unwrap();
            assert_eq!(
                cmp.equals(&u, &v).unwrap(),
                WordEquality::Unequal(UnequalCertificate::MismatchAt { position: 3, left: A, right: B })
            );
            assert_eq!(cmp.leftmost_mismatch(&u, &v).unwrap(), Some(3));
            assert_eq!(cmp.leftmost_mismatch(&u, &u.clone()).unwrap(), None);
        }
        assert_eq!(
            WordComparer::default().equals(&doubled, &comb).unwrap(),
            WordEquality::Equal { exact: true }
        );
        assert_eq!(
            fingerprinting().equals(&doubled, &comb).unwrap(),
            WordEquality::Equal { exact: false }
        );
    }

    #[test]
    fn long_leftmost_mismatch() {
        // a^1000 b vs a^1001
        let mut b = SlpBuilder::new(2);
        let a = b.letter(A).unwrap();
        let bb = b.letter(B).unwrap();
        let a1000 = b.power(a, 1000).unwrap();
        let u_root = b.concat(a1000, bb).unwrap();
        let v_root = b.power(a, 1001).unwrap();
        let arena = b.finish();
        let (u, v) = (Slp::new(arena.clone(), u_root), Slp::new(arena, v_root));
        for cmp in [WordComparer::default(), fingerprinting()] {
            assert_eq!(cmp.leftmost_mismatch(&u, &v).unwrap(), Some(1001));
        }
        assert!(matches!(
            fingerprinting().leftmost_mismatch(&u, &abab_power(2)),
            Err(SlpError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn bounded_mismatches() {
        let u = abab_power(4);
        let v = Slp::from_letters(2, &[A, B, A, B, A, A, A, B]).unwrap();
        let all_b = Slp::from_letters(2, &[B, A, B, A, B, A, B, A]).unwrap();
        for cmp in [WordComparer::default(), fingerprinting()] {
            assert_eq!(
                cmp.mismatch_positions_up_to(&u, &v, 2).unwrap(),
                Mismatches::Positions(vec![6])
            );
            assert_eq!(
                cmp.mismatch_positions_up_to(&u, &u, 3).unwrap(),
                Mismatches::Positions(vec![])
            );
            assert_eq!(cmp.mismatch_positions_up_to(&u, &all_b, 3).unwrap(), Mismatches::TooMany);
            assert_eq!(
                cmp.mismatch_positions_up_to(&u, &all_b, 8).unwrap(),
                Mismatches::Positions((1..=8).collect())
            );
        }
    }

    #[test]
    fn different_keys_are_aligned() {
        let mut b1 = SlpBuilder::with_key(2, Arc::new(FingerprintKey::from_seed(1)));
        let r1 = b1.word(&[A, B, B, A, B]).unwrap();
        let u = b1.build(r1);
        let mut b2 = SlpBuilder::with_key(2, Arc::new(FingerprintKey::from_seed(2)));
        let r2 = b2.word(&[A, B, A, A, B]).unwrap();
        let v = b2.build(r2);
        assert_eq!(fingerprinting().leftmost_mismatch(&u, &v).unwrap(), Some(3));
        assert!(fingerprinting().equals(&u, &u.rekeyed(Arc::new(FingerprintKey::from_seed(9)))).unwrap().is_equal());
    }

    #[test]
    fn point_budget() {
        let cmp = WordComparer::new(2f64.powi(-40));
        assert_eq!(cmp.points_needed(1 << 30).unwrap(), 3);
        assert!(cmp.points_needed(1 << 40).unwrap() <= MAX_POINTS);
        assert!(cmp.points_needed(1 << 60).is_err());
    }
}
