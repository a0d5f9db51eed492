//! Brute-force checks for the closed forms.
//!
//! Everything here is deliberately naive: full `p x p` matrices summed over
//! every pair, integer accumulation, and a plain LU with partial pivoting.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measures::PairDesign;
use crate::model::{self, binomial, ModelSpec};

/// Largest `K` the oracle enumerates (`4^8` pairs, `p = 92`).
pub const ORACLE_MAX_K: usize = 8;

/// Pivots below this magnitude are treated as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

fn check_oracle_k(k: usize) -> Result<()> {
    if k > ORACLE_MAX_K {
        return Err(Error::Capacity { k, cap: ORACLE_MAX_K });
    }
    Ok(())
}

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain("matrix rows must form a square"));
        }
        Ok(DenseMatrix { n, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    /// `self += w * x x^T`.
    pub fn add_outer(&mut self, x: &[f64], w: f64) {
        debug_assert_eq!(x.len(), self.n);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            let row = &mut self.data[r * self.n..(r + 1) * self.n];
            for (slot, &xc) in row.iter_mut().zip(x) {
                *slot += w * xr * xc;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.mul_vec(x)).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.n {
            for c in 0..self.n {
                if r != c {
                    m = m.max(self.get(r, c).abs());
                }
            }
        }
        m
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|r| (0..r).all(|c| (self.get(r, c) - self.get(c, r)).abs() <= tol))
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    /// Packed L (unit diagonal, below) and U (on and above the diagonal).
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        let n = m.n;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for col in 0..n {
            let (piv, best) = (col..n)
                .map(|r| (r, lu[r * n + col].abs()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best < PIVOT_THRESHOLD {
                return Err(Error::Singular { block: None });
            }
            if piv != col {
                for c in 0..n {
                    lu.swap(piv * n + c, col * n + c);
                }
                perm.swap(piv, col);
                sign = -sign;
            }
            let pivot = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / pivot;
                lu[r * n + col] = factor;
                if factor != 0.0 {
                    for c in col + 1..n {
                        lu[r * n + c] -= factor * lu[col * n + c];
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        self.sign * (0..self.n).map(|i| self.lu[i * self.n + i]).product::<f64>()
    }

    /// `ln |det A|` and the sign of `det A`.
    pub fn log_abs_det(&self) -> (f64, f64) {
        let mut sign = self.sign;
        let mut acc = 0.0;
        for i in 0..self.n {
            let u = self.lu[i * self.n + i];
            if u < 0.0 {
                sign = -sign;
            }
            acc += u.abs().ln();
        }
        (acc, sign)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let s: f64 = (0..r).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] = (x[r] - s) / self.lu[r * n + r];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut inv = DenseMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for c in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[c] = 1.0;
            let col = self.solve(&e);
            for (r, v) in col.into_iter().enumerate() {
                inv.set(r, c, v);
            }
        }
        inv
    }
}

pub fn dense_det(m: &DenseMatrix) -> Result<f64> {
    Ok(Lu::new(m)?.det())
}

pub fn dense_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(Lu::new(m)?.inverse())
}

/// `M(xi) = sum xi(i,j) (f(i) - f(j)) (f(i) - f(j))^T` by exhaustive
/// summation.
///
/// Pairs sharing a weight are accumulated in integers (entries of each outer
/// product are in `{-4, 0, 4}`) and scaled once, so uniform orbit designs are
/// computed exactly up to the final division.
pub fn brute_force_info(design: &PairDesign, spec: &ModelSpec) -> Result<DenseMatrix> {
    check_oracle_k(spec.k())?;
    if design.k() != spec.k() {
        return Err(Error::domain("design and model have different K"));
    }
    let p = spec.p();
    let mut buckets: BTreeMap<u64, Vec<i64>> = BTreeMap::new();
    for (pair, w) in design.support() {
        if *w == 0.0 {
            continue;
        }
        let acc = buckets.entry(w.to_bits()).or_insert_with(|| vec![0; p * p]);
        let diff = model::difference_terms(pair);
        let nz: Vec<usize> = (0..p).filter(|&i| diff[i] != 0).collect();
        for &r in &nz {
            for &c in &nz {
                acc[r * p + c] += i64::from(diff[r]) * i64::from(diff[c]);
            }
        }
    }
    let mut m = DenseMatrix::zeros(p);
    for (bits, acc) in buckets {
        let w = f64::from_bits(bits);
        for (slot, v) in m.data.iter_mut().zip(acc) {
            *slot += w * v as f64;
        }
    }
    Ok(m)
}

/// How often each coefficient of `f(i) - f(j)` is nonzero over `X_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCensus {
    pub k: usize,
    pub d: usize,
    pub pairs: u64,
    /// Nonzero counts per main-effect column.
    pub main: Vec<u64>,
    /// Nonzero counts per first-order column.
    pub first_order: Vec<u64>,
    /// Nonzero counts per second-order column.
    pub second_order: Vec<u64>,
    /// For attribute pair (1,2): pairs in which exactly 0, 1, 2 of its
    /// attributes differ.
    pub first_order_pattern: [u64; 3],
    /// For attribute triple (1,2,3): pairs in which exactly 0..=3 of its
    /// attributes differ.
    pub second_order_pattern: [u64; 4],
}

impl OrbitCensus {
    /// `C(K-1, d-1) 2^K`.
    pub fn expected_main(k: usize, d: usize) -> u64 {
        if d == 0 {
            return 0;
        }
        binomial(k - 1, d - 1) << k
    }

    /// `2 C(K-2, d-1) 2^K`.
    pub fn expected_first_order(k: usize, d: usize) -> u64 {
        if d == 0 || k < 2 {
            return 0;
        }
        2 * binomial(k - 2, d - 1) << k
    }

    /// `(C(K-3, d-3) + 3 C(K-3, d-1)) 2^K`.
    pub fn expected_second_order(k: usize, d: usize) -> u64 {
        if d == 0 || k < 3 {
            return 0;
        }
        let three = if d >= 3 { binomial(k - 3, d - 3) } else { 0 };
        (three + 3 * binomial(k - 3, d - 1)) << k
    }

    /// Pairs where exactly `c` of `m` given attributes differ:
    /// `C(m, c) C(K-m, d-c) 2^K`.
    pub fn expected_pattern(k: usize, d: usize, m: usize, c: usize) -> u64 {
        if c > d || c > m || m > k {
            return 0;
        }
        (binomial(m, c) * binomial(k - m, d - c)) << k
    }
}

/// Counts, by enumeration, the nonzero coefficients of every column over the
/// orbit `X_d`.
pub fn census(k: usize, d: usize) -> Result<OrbitCensus> {
    check_oracle_k(k)?;
    let spec = ModelSpec::new(k)?;
    let [p1, p2, p3] = spec.block_dims();
    let mut out = OrbitCensus {
        k,
        d,
        pairs: 0,
        main: vec![0; p1],
        first_order: vec![0; p2],
        second_order: vec![0; p3],
        first_order_pattern: [0; 3],
        second_order_pattern: [0; 4],
    };
    for pair in model::enumerate_orbit(&spec, d)? {
        out.pairs += 1;
        let diff = model::difference_terms(&pair);
        for (col, &v) in diff.iter().enumerate() {
            if v == 0 {
                continue;
            }
            if col < p1 {
                out.main[col] += 1;
            } else if col < p1 + p2 {
                out.first_order[col - p1] += 1;
            } else {
                out.second_order[col - p1 - p2] += 1;
            }
        }
        let differs: Vec<bool> = pair
            .first()
            .levels()
            .iter()
            .zip(pair.second().levels())
            .map(|(a, b)| a != b)
            .collect();
        if k >= 2 {
            out.first_order_pattern[differs[..2].iter().filter(|&&x| x).count()] += 1;
        }
        if k >= 3 {
            out.second_order_pattern[differs[..3].iter().filter(|&&x| x).count()] += 1;
        }
    }
    Ok(out)
}
