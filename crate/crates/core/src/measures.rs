//! Approximate designs and their information matrices.
//!
//! An invariant design is a mixture `sum_d w_d xi_d` of the uniform designs
//! `xi_d` on the orbits `X_d`. Its information matrix is diagonal with one
//! value per parameter block, so [`DepthDesign`] plus [`DiagonalInfo`] is all
//! the optimizer needs. [`PairDesign`] and [`ExactDesign`] exist for the
//! oracle checks, for export and for simulation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, Block, ModelSpec, PairedComparison};
use crate::oracle::DenseMatrix;

/// Tolerance on `sum w = 1` for design weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_weights(weights: impl IntoIterator<Item = f64> + Clone) -> Result<()> {
    for w in weights.clone() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::domain(format!("weight {w} is not a nonnegative number")));
        }
    }
    let total = compensated_sum(weights);
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::domain(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Invariant approximate design: weight `w_d` on each comparison depth
/// `d = 1..=K`. Depth 0 carries no information and never carries weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthDesign {
    k: usize,
    /// `weights[d - 1] = w_d`.
    weights: Vec<f64>,
}

impl DepthDesign {
    pub fn new(k: usize, weights: Vec<f64>) -> Result<Self> {
        ModelSpec::new(k)?;
        if weights.len() != k {
            return Err(Error::domain(format!(
                "expected {k} depth weights, got {}",
                weights.len()
            )));
        }
        check_weights(weights.iter().copied())?;
        Ok(DepthDesign { k, weights })
    }

    /// Design from `(depth, weight)` entries; unspecified depths get zero.
    pub fn from_entries(k: usize, entries: &[(usize, f64)]) -> Result<Self> {
        let mut weights = vec![0.0; k];
        for &(d, w) in entries {
            if d == 0 || d > k {
                return Err(Error::domain(format!("depth {d} is outside 1..={k}")));
            }
            weights[d - 1] += w;
        }
        Self::new(k, weights)
    }

    /// The uniform design `xi_d` on a single orbit.
    pub fn point_mass(k: usize, d: usize) -> Result<Self> {
        Self::from_entries(k, &[(d, 1.0)])
    }

    /// `lambda * a + (1 - lambda) * b`.
    pub fn mixture(a: &DepthDesign, b: &DepthDesign, lambda: f64) -> Result<Self> {
        if a.k != b.k {
            return Err(Error::domain("mixture of designs with different K"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain(format!("mixing weight {lambda} outside [0, 1]")));
        }
        let weights = a
            .weights
            .iter()
            .zip(&b.weights)
            .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
            .collect();
        Self::new(a.k, weights)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `w_d`; zero for `d = 0` and for depths beyond `K`.
    pub fn weight(&self, d: usize) -> f64 {
        if d == 0 || d > self.k {
            0.0
        } else {
            self.weights[d - 1]
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Depths with positive weight, ascending.
    pub fn support(&self) -> Vec<usize> {
        (1..=self.k).filter(|&d| self.weight(d) > 0.0).collect()
    }

    /// `(depth, weight)` for every supported depth.
    pub fn entries(&self) -> Vec<(usize, f64)> {
        self.support().into_iter().map(|d| (d, self.weight(d))).collect()
    }
}

/// Diagonal values of `M` on the main-effect, first-order and second-order
/// interaction blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalInfo {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl DiagonalInfo {
    pub fn get(&self, block: Block) -> f64 {
        self.as_array()[block.index()]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.h1, self.h2, self.h3]
    }

    fn from_array(h: [f64; 3]) -> Self {
        DiagonalInfo { h1: h[0], h2: h[1], h3: h[2] }
    }

    /// First block (in model order) with a zero value and a nonzero
    /// dimension, if any.
    pub fn vanishing_block(&self, spec: &ModelSpec) -> Option<Block> {
        Block::ALL
            .into_iter()
            .find(|&b| spec.block_dim(b) > 0 && self.get(b) <= 0.0)
    }
}

fn check_k_for_h(k: usize) -> Result<ModelSpec> {
    if k < 3 {
        return Err(Error::domain(format!(
            "the second-order block needs K >= 3, got K = {k}"
        )));
    }
    ModelSpec::new(k)
}

/// `3K^2 - 6dK + 4d^2 - 3K + 2`, which is `6 (C(d,3) + d C(K-d,2)) / d`.
pub(crate) fn cubic_factor(d: i128, k: i128) -> i128 {
    3 * k * k - 6 * d * k + 4 * d * d - 3 * k + 2
}

/// Exact `(numerator, denominator)` of `h_1(d)`, `h_2(d)`, `h_3(d)`.
///
/// Denominators depend only on `K`, so numerators compare exactly across `d`.
pub fn h_fractions(d: usize, k: usize) -> Result<[(i128, i128); 3]> {
    check_k_for_h(k)?;
    if d > k {
        return Err(Error::domain(format!("depth {d} is outside 0..={k}")));
    }
    let (d, k) = (d as i128, k as i128);
    Ok([
        (4 * d, k),
        (8 * d * (k - d), k * (k - 1)),
        (4 * d * cubic_factor(d, k), k * (k - 1) * (k - 2)),
    ])
}

/// Diagonal information of the uniform design on `X_d`.
pub fn h_values(d: usize, k: usize) -> Result<DiagonalInfo> {
    let f = h_fractions(d, k)?;
    Ok(DiagonalInfo::from_array(f.map(|(n, q)| n as f64 / q as f64)))
}

/// Diagonal information of an invariant design: `h_r = sum_d w_d h_r(d)`.
pub fn info_diagonal(design: &DepthDesign) -> Result<DiagonalInfo> {
    check_k_for_h(design.k())?;
    let mut h = [0.0; 3];
    for (d, w) in design.entries() {
        let hd = h_values(d, design.k())?.as_array();
        for r in 0..3 {
            h[r] += w * hd[r];
        }
    }
    Ok(DiagonalInfo::from_array(h))
}

/// `ln det M`, or the block that makes `M` singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogDet {
    Finite(f64),
    Singular(Block),
}

impl LogDet {
    pub fn is_singular(&self) -> bool {
        matches!(self, LogDet::Singular(_))
    }

    /// The log-determinant, `-inf` when singular.
    pub fn value(&self) -> f64 {
        match self {
            LogDet::Finite(v) => *v,
            LogDet::Singular(_) => f64::NEG_INFINITY,
        }
    }
}

/// `p_1 ln h_1 + p_2 ln h_2 + p_3 ln h_3` for diagonal information `h`.
pub fn log_det_of(h: &DiagonalInfo, spec: &ModelSpec) -> LogDet {
    if let Some(b) = h.vanishing_block(spec) {
        return LogDet::Singular(b);
    }
    let v = Block::ALL
        .into_iter()
        .filter(|&b| spec.block_dim(b) > 0)
        .map(|b| spec.block_dim(b) as f64 * h.get(b).ln())
        .sum();
    LogDet::Finite(v)
}

pub fn log_det(design: &DepthDesign) -> Result<LogDet> {
    let h = info_diagonal(design)?;
    Ok(log_det_of(&h, &ModelSpec::new(design.k())?))
}

/// Approximate design on individual ordered pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDesign {
    k: usize,
    support: Vec<(PairedComparison, f64)>,
}

impl PairDesign {
    /// Builds a pair design; repeated pairs are merged at their first
    /// position. Order of first appearance is kept.
    pub fn new(k: usize, entries: Vec<(PairedComparison, f64)>) -> Result<Self> {
        ModelSpec::new(k)?;
        if entries.is_empty() {
            return Err(Error::domain("pair design has empty support"));
        }
        let mut index: HashMap<PairedComparison, usize> = HashMap::new();
        let mut support: Vec<(PairedComparison, f64)> = Vec::with_capacity(entries.len());
        for (pair, w) in entries {
            if pair.k() != k {
                return Err(Error::domain(format!(
                    "pair has {} attributes, design has K = {k}",
                    pair.k()
                )));
            }
            match index.get(&pair) {
                Some(&at) => support[at].1 += w,
                None => {
                    index.insert(pair.clone(), support.len());
                    support.push((pair, w));
                }
            }
        }
        check_weights(support.iter().map(|(_, w)| *w))?;
        Ok(PairDesign { k, support })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn support(&self) -> &[(PairedComparison, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// `M(xi) = sum xi(i,j) (f(i) - f(j)) (f(i) - f(j))^T` in floating point.
pub fn info_matrix_full(design: &PairDesign, spec: &ModelSpec) -> Result<DenseMatrix> {
    if design.k() != spec.k() {
        return Err(Error::domain("design and model have different K"));
    }
    let p = spec.p();
    let mut m = DenseMatrix::zeros(p);
    for (pair, w) in design.support() {
        let diff = model::difference_vector(pair, spec)?;
        m.add_outer(&diff, *w);
    }
    Ok(m)
}

/// Spreads each `w_d` uniformly over the `N_d` ordered pairs of `X_d`.
/// Pairs come in ascending depth, lexicographic within a depth.
pub fn depth_to_pair_design(design: &DepthDesign) -> Result<PairDesign> {
    let spec = ModelSpec::new(design.k())?;
    model::check_enumerable(spec.k())?;
    let mut entries = Vec::new();
    for (d, w) in design.entries() {
        let per_pair = w / spec.orbit_size(d) as f64;
        entries.extend(model::enumerate_orbit(&spec, d)?.map(|p| (p, per_pair)));
    }
    PairDesign::new(spec.k(), entries)
}

/// A finite list of `N` comparisons, with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDesign {
    k: usize,
    pairs: Vec<PairedComparison>,
    /// Set when `N` was smaller than the support of the approximate design.
    pub undersized: bool,
}

impl ExactDesign {
    pub fn new(k: usize, pairs: Vec<PairedComparison>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::domain("exact design needs at least one comparison"));
        }
        if let Some(p) = pairs.iter().find(|p| p.k() != k) {
            return Err(Error::domain(format!(
                "pair has {} attributes, design has K = {k}",
                p.k()
            )));
        }
        Ok(ExactDesign { k, pairs, undersized: false })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[PairedComparison] {
        &self.pairs
    }

    /// `M(xi_N) = (1/N) sum_n (f(i_n) - f(j_n)) (f(i_n) - f(j_n))^T`.
    pub fn info_matrix(&self) -> Result<DenseMatrix> {
        let spec = ModelSpec::new(self.k)?;
        let w = 1.0 / self.n() as f64;
        let mut m = DenseMatrix::zeros(spec.p());
        for pair in &self.pairs {
            m.add_outer(&model::difference_vector(pair, &spec)?, w);
        }
        Ok(m)
    }

    /// Multiplicity of every distinct pair, in first-appearance order.
    pub fn multiplicities(&self) -> Vec<(PairedComparison, usize)> {
        let mut out: Vec<(PairedComparison, usize)> = Vec::new();
        for p in &self.pairs {
            match out.last_mut() {
                Some((q, c)) if q == p => *c += 1,
                _ => out.push((p.clone(), 1)),
            }
        }
        out
    }
}

/// Largest-remainder apportionment of `n` comparisons over a pair design.
pub fn realize_pair_design(design: &PairDesign, n: usize) -> Result<ExactDesign> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    const SNAP: f64 = 1e-9;
    let support = design.support();
    let mut counts = Vec::with_capacity(support.len());
    let mut fracs = Vec::with_capacity(support.len());
    for (_, w) in support {
        let mut x = n as f64 * w;
        if (x - x.round()).abs() < SNAP {
            x = x.round();
        }
        let base = x.floor();
        counts.push(base as usize);
        // Quantized so that equal weights tie exactly and fall back to order.
        fracs.push(((x - base) / SNAP).round() as i64);
    }
    let assigned: usize = counts.iter().sum();
    let remaining = n.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_by(|&a, &b| fracs[b].cmp(&fracs[a]).then(a.cmp(&b)));
    for &idx in order.iter().take(remaining) {
        counts[idx] += 1;
    }
    let mut pairs = Vec::with_capacity(n);
    for ((pair, _), &c) in support.iter().zip(&counts) {
        pairs.extend(std::iter::repeat(pair.clone()).take(c));
    }
    let mut exact = ExactDesign::new(design.k(), pairs)?;
    exact.undersized = n < support.len();
    if exact.undersized {
        log::warn!(
            "N = {n} is smaller than the design support ({} pairs)",
            support.len()
        );
    }
    Ok(exact)
}

/// Rounds an invariant design to `n` comparisons; see [`realize_pair_design`].
pub fn realize_exact(design: &DepthDesign, n: usize) -> Result<ExactDesign> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    realize_pair_design(&depth_to_pair_design(design)?, n)
}
