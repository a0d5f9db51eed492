//! Profiles, effect coding and the second-order interactions regression
//! vector, plus enumeration of the orbits `X_d` of pairs with depth `d`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `K` accepted by the closed-form paths.
pub const MAX_CLOSED_FORM_K: usize = 1000;

/// Default cap on `K` for anything that enumerates `X_d` explicitly.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Environment variable overriding [`DEFAULT_ENUMERATION_CAP`].
pub const ENUMERATION_CAP_ENV: &str = "PAIRDESIGN_MAX_K";

/// Hard ceiling for the enumeration cap; profiles are packed into a `u64`.
const ENUMERATION_CEILING: usize = 31;

/// The enumeration cap in effect: `PAIRDESIGN_MAX_K` if set and parseable,
/// otherwise 20. Never above 31.
pub fn enumeration_cap() -> usize {
    std::env::var(ENUMERATION_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(DEFAULT_ENUMERATION_CAP)
        .min(ENUMERATION_CEILING)
}

pub(crate) fn check_enumerable(k: usize) -> Result<()> {
    let cap = enumeration_cap();
    if k > cap {
        return Err(Error::Capacity { k, cap });
    }
    Ok(())
}

/// Binomial coefficient, zero when `r > n`.
pub fn binomial(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Parameter blocks of the model, in the order they appear in `f(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    Main,
    FirstOrder,
    SecondOrder,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Main, Block::FirstOrder, Block::SecondOrder];

    pub fn index(self) -> usize {
        match self {
            Block::Main => 0,
            Block::FirstOrder => 1,
            Block::SecondOrder => 2,
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Main => "main-effect",
            Block::FirstOrder => "first-order interaction",
            Block::SecondOrder => "second-order interaction",
        })
    }
}

/// Number of attributes and the derived block dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    k: usize,
}

impl ModelSpec {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("K must be at least 1"));
        }
        if k > MAX_CLOSED_FORM_K {
            return Err(Error::domain(format!(
                "K = {k} exceeds the supported maximum {MAX_CLOSED_FORM_K}"
            )));
        }
        Ok(ModelSpec { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p1(&self) -> usize {
        self.k
    }

    pub fn p2(&self) -> usize {
        binomial(self.k, 2) as usize
    }

    pub fn p3(&self) -> usize {
        binomial(self.k, 3) as usize
    }

    /// Total parameter count, `K(K^2 + 5) / 6`.
    pub fn p(&self) -> usize {
        self.k * (self.k * self.k + 5) / 6
    }

    pub fn block_dims(&self) -> [usize; 3] {
        [self.p1(), self.p2(), self.p3()]
    }

    pub fn block_dim(&self, block: Block) -> usize {
        self.block_dims()[block.index()]
    }

    /// `|X_d| = 2^K C(K, d)`.
    pub fn orbit_size(&self, d: usize) -> u64 {
        if d > self.k || self.k >= 64 {
            return 0;
        }
        (1u64 << self.k) * binomial(self.k, d)
    }
}

/// `g(1) = 1`, `g(2) = -1`.
pub fn effect_code(level: u8) -> Result<f64> {
    match level {
        1 => Ok(1.0),
        2 => Ok(-1.0),
        other => Err(Error::domain(format!("level must be 1 or 2, got {other}"))),
    }
}

/// One alternative: a level in `{1, 2}` for every attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile {
    levels: Vec<u8>,
}

impl Profile {
    pub fn new(levels: Vec<u8>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::domain("profile must have at least one attribute"));
        }
        if let Some(bad) = levels.iter().find(|&&l| l != 1 && l != 2) {
            return Err(Error::domain(format!("level must be 1 or 2, got {bad}")));
        }
        Ok(Profile { levels })
    }

    /// Profile from its packed index: bit `K-1-k` set means attribute `k`
    /// is at level 2, so numeric order equals lexicographic order.
    pub fn from_index(index: u64, k: usize) -> Self {
        let levels = (0..k)
            .map(|a| if index >> (k - 1 - a) & 1 == 1 { 2 } else { 1 })
            .collect();
        Profile { levels }
    }

    pub fn index(&self) -> u64 {
        self.levels
            .iter()
            .fold(0u64, |acc, &l| (acc << 1) | u64::from(l == 2))
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Coded values `g(i_k)` as `+1` / `-1`.
    pub(crate) fn signs(&self) -> Vec<i8> {
        self.levels.iter().map(|&l| if l == 1 { 1 } else { -1 }).collect()
    }

    fn check_spec(&self, spec: &ModelSpec) -> Result<()> {
        if self.k() != spec.k() {
            return Err(Error::domain(format!(
                "profile has {} attributes, model has K = {}",
                self.k(),
                spec.k()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (n, l) in self.levels.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// An ordered pair of profiles together with its comparison depth.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairedComparison {
    first: Profile,
    second: Profile,
    depth: usize,
}

impl PairedComparison {
    pub fn new(first: Profile, second: Profile) -> Result<Self> {
        if first.k() != second.k() {
            return Err(Error::domain(format!(
                "profiles have different lengths {} and {}",
                first.k(),
                second.k()
            )));
        }
        let depth = first
            .levels
            .iter()
            .zip(&second.levels)
            .filter(|(a, b)| a != b)
            .count();
        Ok(PairedComparison { first, second, depth })
    }

    pub(crate) fn from_indices(i: u64, j: u64, k: usize) -> Self {
        PairedComparison {
            first: Profile::from_index(i, k),
            second: Profile::from_index(j, k),
            depth: (i ^ j).count_ones() as usize,
        }
    }

    pub fn first(&self) -> &Profile {
        &self.first
    }

    pub fn second(&self) -> &Profile {
        &self.second
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn k(&self) -> usize {
        self.first.k()
    }

    pub fn swapped(&self) -> Self {
        PairedComparison {
            first: self.second.clone(),
            second: self.first.clone(),
            depth: self.depth,
        }
    }
}

/// Number of attributes in which the two profiles differ.
pub fn comparison_depth(pair: &PairedComparison) -> usize {
    pair.depth()
}

/// Products of the coded values over every index tuple of length 1, 2 and 3,
/// in lexicographic tuple order.
pub(crate) fn coded_terms(signs: &[i8]) -> Vec<i8> {
    let k = signs.len();
    let spec_p = k * (k * k + 5) / 6;
    let mut out = Vec::with_capacity(spec_p);
    out.extend_from_slice(signs);
    for a in 0..k {
        for b in a + 1..k {
            out.push(signs[a] * signs[b]);
        }
    }
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                out.push(signs[a] * signs[b] * signs[c]);
            }
        }
    }
    out
}

/// `f(i)`: main effects, then `g(i_k) g(i_l)` for `k < l`, then
/// `g(i_k) g(i_l) g(i_m)` for `k < l < m`, each block in lexicographic order.
pub fn regression_vector(profile: &Profile, spec: &ModelSpec) -> Result<Vec<f64>> {
    profile.check_spec(spec)?;
    Ok(coded_terms(&profile.signs())
        .into_iter()
        .map(f64::from)
        .collect())
}

/// Integer form of `f(i) - f(j)`; entries are in `{-2, 0, 2}`.
pub(crate) fn difference_terms(pair: &PairedComparison) -> Vec<i8> {
    let a = coded_terms(&pair.first.signs());
    let b = coded_terms(&pair.second.signs());
    a.into_iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `f(i) - f(j)` for the pair `(i, j)`.
pub fn difference_vector(pair: &PairedComparison, spec: &ModelSpec) -> Result<Vec<f64>> {
    pair.first.check_spec(spec)?;
    pair.second.check_spec(spec)?;
    Ok(difference_terms(pair).into_iter().map(f64::from).collect())
}

/// All `C(K, d)` bit masks with `d` bits set among the low `k` bits.
fn masks_with_popcount(k: usize, d: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(binomial(k, d) as usize);
    if d == 0 {
        out.push(0);
        return out;
    }
    let limit = 1u64 << k;
    let mut m: u64 = (1u64 << d) - 1;
    while m < limit {
        out.push(m);
        // Gosper's hack: next integer with the same popcount.
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

/// Lazy iterator over the ordered pairs of `X_d`, lexicographic in
/// `(first, second)`.
#[derive(Debug, Clone)]
pub struct Orbit {
    k: usize,
    masks: Vec<u64>,
    next_first: u64,
    seconds: Vec<u64>,
    pos: usize,
    current: u64,
    remaining: u64,
}

impl Orbit {
    fn new(k: usize, d: usize) -> Self {
        let masks = masks_with_popcount(k, d);
        let remaining = (1u64 << k) * masks.len() as u64;
        Orbit {
            k,
            masks,
            next_first: 0,
            seconds: Vec::new(),
            pos: 0,
            current: 0,
            remaining,
        }
    }
}

impl Iterator for Orbit {
    type Item = PairedComparison;

    fn next(&mut self) -> Option<PairedComparison> {
        if self.pos == self.seconds.len() {
            if self.next_first >= 1u64 << self.k {
                return None;
            }
            self.current = self.next_first;
            self.next_first += 1;
            let i = self.current;
            self.seconds.clear();
            self.seconds.extend(self.masks.iter().map(|m| i ^ m));
            self.seconds.sort_unstable();
            self.pos = 0;
        }
        let j = self.seconds[self.pos];
        self.pos += 1;
        self.remaining -= 1;
        Some(PairedComparison::from_indices(self.current, j, self.k))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Orbit {}

/// Every ordered pair with comparison depth `d`, exactly once.
pub fn enumerate_orbit(spec: &ModelSpec, d: usize) -> Result<Orbit> {
    if d > spec.k() {
        return Err(Error::domain(format!(
            "depth {d} is outside 0..={}",
            spec.k()
        )));
    }
    check_enumerable(spec.k())?;
    Ok(Orbit::new(spec.k(), d))
}
