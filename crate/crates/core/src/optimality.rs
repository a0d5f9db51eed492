//! D-optimal invariant designs and their certification.
//!
//! For an invariant design with diagonal information `(h1, h2, h3)` the
//! variance function depends on a pair only through its depth `d`:
//!
//! ```text
//! v(d) = 4d (1/h1 + (K-d)/h2 + (3K^2 - 6dK + 4d^2 - 3K + 2) / (6 h3))
//! ```
//!
//! A design is D-optimal iff `v(d) <= p` for every depth, with equality on
//! the support. `v(d)` is also the partial derivative of `ln det M` with
//! respect to `w_d`, which is what the weight search uses.
//!
//! The D-optimal design is supported on at most three depths: `{K, d, d+1}`,
//! `{K, d}` or `{d, d+1}`. [`d_optimal_design`] optimizes the weights on each
//! such family and keeps the best.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::measures::{
    self, cubic_factor, h_values, info_diagonal, log_det_of, DepthDesign, DiagonalInfo,
};
use crate::model::{Block, ModelSpec};

/// Relative tolerance on `max_d v(d) / p <= 1`.
pub const CERTIFY_TOL: f64 = 1e-9;

/// Tolerance for `v(d) / p = 1` when reporting equality depths.
pub const EQUALITY_TOL: f64 = 1e-6;

/// Log-det differences below this count as ties (fewer depths win).
pub const LOGDET_TIE_TOL: f64 = 1e-10;

/// Weights below this are dropped from a returned design.
const PRUNE_TOL: f64 = 1e-12;

/// Maximum bisection steps; the interval reaches machine precision first.
const BISECTION_STEPS: usize = 200;

fn check_depth(d: usize, k: usize) -> Result<()> {
    if d > k {
        return Err(Error::domain(format!("depth {d} is outside 0..={k}")));
    }
    Ok(())
}

/// Variance function from the diagonal information directly. Callers make
/// sure the relevant blocks are nonzero.
pub(crate) fn variance_from_h(d: usize, k: usize, h: &DiagonalInfo) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let df = d as f64;
    let main = 1.0 / h.h1;
    let first = if k >= 2 { (k - d) as f64 / h.h2 } else { 0.0 };
    let second = if k >= 3 {
        cubic_factor(d as i128, k as i128) as f64 / (6.0 * h.h3)
    } else {
        0.0
    };
    4.0 * df * (main + first + second)
}

fn nonsingular_info(design: &DepthDesign) -> Result<(ModelSpec, DiagonalInfo)> {
    let spec = ModelSpec::new(design.k())?;
    let h = info_diagonal(design)?;
    if let Some(block) = h.vanishing_block(&spec) {
        return Err(Error::Singular { block: Some(block) });
    }
    Ok((spec, h))
}

/// `v(d, xi)` for an invariant design.
pub fn variance_function(d: usize, design: &DepthDesign) -> Result<f64> {
    check_depth(d, design.k())?;
    let (_, h) = nonsingular_info(design)?;
    Ok(variance_from_h(d, design.k(), &h))
}

/// `v(d, xi_{d'})` for the uniform design on the single depth `d'`, written
/// in terms of the block dimensions.
pub fn variance_single_depth(d: usize, d_prime: usize, k: usize) -> Result<f64> {
    let spec = ModelSpec::new(k)?;
    if k < 3 {
        return Err(Error::domain("variance function needs K >= 3"));
    }
    check_depth(d, k)?;
    if d_prime == 0 || d_prime > k {
        return Err(Error::domain(format!("depth d' = {d_prime} is outside 1..={k}")));
    }
    if d_prime == k {
        return Err(Error::Singular { block: Some(Block::FirstOrder) });
    }
    let denom3 = cubic_factor(d_prime as i128, k as i128);
    if denom3 == 0 {
        return Err(Error::Singular { block: Some(Block::SecondOrder) });
    }
    let [p1, p2, p3] = spec.block_dims().map(|x| x as f64);
    let ratio = d as f64 / d_prime as f64;
    let first = p2 * (k - d) as f64 / (k - d_prime) as f64;
    let second = p3 * cubic_factor(d as i128, k as i128) as f64 / denom3 as f64;
    Ok(ratio * (p1 + first + second))
}

/// `v(d)` for `d = 0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub k: usize,
    pub p: usize,
    /// `values[d] = v(d, xi)`.
    pub values: Vec<f64>,
}

impl VarianceProfile {
    pub fn value(&self, d: usize) -> f64 {
        self.values[d]
    }

    /// `v(d) / p` for `d = 0..=K`.
    pub fn normalized(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.p as f64).collect()
    }

    pub fn max_ratio(&self) -> f64 {
        self.normalized().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Outcome of the equivalence-theorem check.
#[derive(Debug, Clone, PartialEq)]
pub struct Certification {
    pub profile: VarianceProfile,
    /// `max_d v(d) / p`.
    pub kw_max: f64,
    pub certified: bool,
    /// Depths with `|v(d)/p - 1| <= 1e-6`.
    pub equality_depths: Vec<usize>,
}

/// Evaluates `v(d)` for every depth and checks `v(d) <= p (1 + 1e-9)`.
pub fn kw_certify(design: &DepthDesign) -> Result<Certification> {
    let (spec, h) = nonsingular_info(design)?;
    let k = design.k();
    let profile = VarianceProfile {
        k,
        p: spec.p(),
        values: (0..=k).map(|d| variance_from_h(d, k, &h)).collect(),
    };
    let normalized = profile.normalized();
    let kw_max = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let equality_depths = (1..=k)
        .filter(|&d| (normalized[d] - 1.0).abs() <= EQUALITY_TOL)
        .collect();
    Ok(Certification {
        certified: kw_max <= 1.0 + CERTIFY_TOL,
        kw_max,
        profile,
        equality_depths,
    })
}

/// Depth maximizing `h1`: always `K`.
pub fn optimal_depth_main(k: usize) -> Result<usize> {
    ModelSpec::new(k)?;
    Ok(k)
}

/// Depths maximizing `h2`: `K/2` for even `K`, both `(K-1)/2` and
/// `(K+1)/2` for odd `K` (smaller first).
pub fn optimal_depth_first_order(k: usize) -> Result<Vec<usize>> {
    ModelSpec::new(k)?;
    if k < 2 {
        return Err(Error::domain("first-order interactions need K >= 2"));
    }
    Ok(if k % 2 == 0 { vec![k / 2] } else { vec![(k - 1) / 2, (k + 1) / 2] })
}

/// Depths maximizing `h3`: `{1, 3}` for `K = 3`, `{K}` otherwise.
pub fn optimal_depth_second_order(k: usize) -> Result<Vec<usize>> {
    ModelSpec::new(k)?;
    if k < 3 {
        return Err(Error::domain("second-order interactions need K >= 3"));
    }
    Ok(if k == 3 { vec![1, 3] } else { vec![k] })
}

/// Closed-form optimal two-depth design `{K, d*}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticWeight {
    pub d_star: usize,
    /// Weight on depth `K`; depth `d*` gets `1 - w_k`.
    pub w_k: f64,
}

/// Closed-form weight on depth `K` for `K = 4..=10`, `None` elsewhere.
pub fn analytic_weight(k: usize) -> Option<AnalyticWeight> {
    let kf = k as f64;
    let pow = |e: i32| kf.powi(e);
    match k {
        5 | 7 | 9 => {
            let radicand = pow(6) - 12.0 * pow(5) + 64.0 * pow(4) - 198.0 * pow(3)
                + 448.0 * pow(2)
                - 636.0 * kf
                + 369.0;
            let num = 2.0 * pow(3) - 6.0 * pow(2) + 7.0 * kf - kf * radicand.sqrt() + 15.0;
            let den = -pow(4) + 2.0 * pow(3) - 2.0 * pow(2) + 10.0 * kf + 15.0;
            Some(AnalyticWeight { d_star: (k - 1) / 2, w_k: num / den })
        }
        4 | 6 => Some(AnalyticWeight {
            d_star: k / 2,
            w_k: (pow(2) - 6.0 * kf + 11.0) / (pow(2) + 5.0),
        }),
        8 | 10 => {
            let radicand = pow(4) - 10.0 * pow(3) + 37.0 * pow(2) - 60.0 * kf + 180.0;
            let num = pow(3) + 5.0 * kf + (kf - pow(2)) * radicand.sqrt() + 30.0;
            let den = -pow(4) + pow(3) + pow(2) + 5.0 * kf + 30.0;
            Some(AnalyticWeight { d_star: k / 2 - 1, w_k: num / den })
        }
        _ => None,
    }
}

/// [`analytic_weight`] cross-checked against [`optimize_weights`] on
/// `{K, d*}`. On a disagreement above `1e-6` the numeric weight is returned
/// and a warning is logged.
pub fn checked_analytic_weight(k: usize) -> Result<Option<AnalyticWeight>> {
    let Some(analytic) = analytic_weight(k) else {
        return Ok(None);
    };
    let numeric = optimize_weights(k, &[k, analytic.d_star])?.weight(k);
    if (numeric - analytic.w_k).abs() > 1e-6 {
        log::warn!(
            "closed-form weight for K = {k} ({}) disagrees with the optimizer ({numeric}); using the optimizer",
            analytic.w_k
        );
        return Ok(Some(AnalyticWeight { w_k: numeric, ..analytic }));
    }
    Ok(Some(analytic))
}

/// `num / den` with the conventions used by the weight search: a zero
/// denominator gives `+-inf` by the sign of the numerator, or 0.
fn ratio_term(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else if num < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

/// Block dimensions as floats, with empty blocks zeroed.
fn dims(spec: &ModelSpec) -> [f64; 3] {
    spec.block_dims().map(|x| x as f64)
}

/// Derivative of `sum_r p_r ln h_r` along `dir` at `h`.
fn directional(p: &[f64; 3], h: &[f64; 3], dir: &[f64; 3]) -> f64 {
    (0..3)
        .filter(|&r| p[r] > 0.0)
        .map(|r| p[r] * ratio_term(dir[r], h[r]))
        .sum()
}

fn lerp(base: &[f64; 3], s: f64, u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| base[r] + s * u[r] + (1.0 - s) * v[r])
}

/// Maximizes `sum_r p_r ln(base + s u + (1 - s) v)` over `s in [0, 1]` by
/// bisection on the sign of the derivative, which is nonincreasing.
fn maximize_segment(p: &[f64; 3], base: &[f64; 3], u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let dir = [0, 1, 2].map(|r| u[r] - v[r]);
    let slope = |s: f64| directional(p, &lerp(base, s, u, v), &dir);
    if slope(0.0) <= 0.0 {
        return 0.0;
    }
    if slope(1.0) >= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximizes `ln det M` over weights on the given depths (at most three).
///
/// Two depths: bisection on the stationarity condition. Three depths: outer
/// bisection on the first weight, with the split of the remainder maximized
/// by an inner bisection; the partially maximized objective is concave in
/// the outer weight, so the envelope derivative is monotone.
pub fn optimize_weights(k: usize, depths: &[usize]) -> Result<DepthDesign> {
    if k < 3 {
        return Err(Error::domain("the weight search needs K >= 3"));
    }
    let spec = ModelSpec::new(k)?;
    let mut depths = depths.to_vec();
    depths.sort_unstable();
    depths.dedup();
    if depths.is_empty() || depths.len() > 3 {
        return Err(Error::domain(format!(
            "expected one to three depths, got {}",
            depths.len()
        )));
    }
    if let Some(&d) = depths.iter().find(|&&d| d == 0 || d > k) {
        return Err(Error::domain(format!("depth {d} is outside 1..={k}")));
    }
    let p = dims(&spec);
    let hs: Vec<[f64; 3]> = depths
        .iter()
        .map(|&d| h_values(d, k).map(|h| h.as_array()))
        .collect::<Result<_>>()?;
    for block in Block::ALL {
        let r = block.index();
        if p[r] > 0.0 && hs.iter().all(|h| h[r] <= 0.0) {
            return Err(Error::Singular { block: Some(block) });
        }
    }
    let zero = [0.0; 3];
    let weights: Vec<f64> = match hs.len() {
        1 => vec![1.0],
        2 => {
            let s = maximize_segment(&p, &zero, &hs[0], &hs[1]);
            vec![s, 1.0 - s]
        }
        _ => {
            let (ha, hb, hc) = (hs[0], hs[1], hs[2]);
            let inner = |t: f64| {
                let base = ha.map(|x| t * x);
                let u = hb.map(|x| (1.0 - t) * x);
                let v = hc.map(|x| (1.0 - t) * x);
                maximize_segment(&p, &base, &u, &v)
            };
            let outer_slope = |t: f64| {
                let s = inner(t);
                let rest = [0, 1, 2].map(|r| s * hb[r] + (1.0 - s) * hc[r]);
                let h = [0, 1, 2].map(|r| t * ha[r] + (1.0 - t) * rest[r]);
                let dir = [0, 1, 2].map(|r| ha[r] - rest[r]);
                directional(&p, &h, &dir)
            };
            let t = if outer_slope(0.0) <= 0.0 {
                0.0
            } else if outer_slope(1.0) >= 0.0 {
                1.0
            } else {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if outer_slope(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let s = inner(t);
            vec![t, (1.0 - t) * s, 1.0 - t - (1.0 - t) * s]
        }
    };
    let entries: Vec<(usize, f64)> = depths.iter().copied().zip(weights).collect();
    let design = DepthDesign::from_entries(k, &entries)?;
    if let Some(block) = info_diagonal(&design)?.vanishing_block(&spec) {
        return Err(Error::Singular { block: Some(block) });
    }
    Ok(design)
}

/// Projected-gradient residual of `ln det M` on the simplex restricted to the
/// design's support: the spread of `v(d)` over supported depths.
pub fn stationarity_residual(design: &DepthDesign) -> Result<f64> {
    let (_, h) = nonsingular_info(design)?;
    let vs: Vec<f64> = design
        .support()
        .into_iter()
        .map(|d| variance_from_h(d, design.k(), &h))
        .collect();
    let max = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// A certified D-optimal invariant design.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalDesignResult {
    pub design: DepthDesign,
    pub h: DiagonalInfo,
    pub logdet: f64,
    /// `max_d v(d) / p`.
    pub kw_max: f64,
    pub certified: bool,
    pub support_depths: Vec<usize>,
    pub profile: VarianceProfile,
    /// Exact weights, when the design is known in closed rational form.
    pub exact_weights: Option<Vec<(usize, Fraction)>>,
}

impl OptimalDesignResult {
    /// `d*` when the support is exactly `{d*, K}` with `d* < K`.
    pub fn intermediate_depth(&self) -> Option<usize> {
        match self.support_depths.as_slice() {
            [d, k] if *k == self.design.k() => Some(*d),
            _ => None,
        }
    }

    fn from_design(
        design: DepthDesign,
        exact_weights: Option<Vec<(usize, Fraction)>>,
    ) -> Result<Self> {
        let spec = ModelSpec::new(design.k())?;
        let h = info_diagonal(&design)?;
        let cert = kw_certify(&design)?;
        Ok(OptimalDesignResult {
            logdet: log_det_of(&h, &spec).value(),
            h,
            kw_max: cert.kw_max,
            certified: cert.certified,
            support_depths: design.support(),
            profile: cert.profile,
            design,
            exact_weights,
        })
    }
}

/// Candidate supports, two-depth families first.
pub fn candidate_supports(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for d in 1..k {
        out.push(vec![d, k]);
    }
    for d in 1..k.saturating_sub(1) {
        out.push(vec![d, d + 1]);
    }
    for d in 1..k.saturating_sub(1) {
        out.push(vec![d, d + 1, k]);
    }
    out
}

fn prune(design: &DepthDesign) -> Result<DepthDesign> {
    let kept: Vec<(usize, f64)> = design
        .entries()
        .into_iter()
        .filter(|&(_, w)| w >= PRUNE_TOL)
        .collect();
    let total: f64 = kept.iter().map(|(_, w)| w).sum();
    let mut entries: Vec<(usize, f64)> = kept.iter().map(|&(d, w)| (d, w / total)).collect();
    // Put any rounding residue on the largest weight.
    let residue = 1.0 - measures::compensated_sum(entries.iter().map(|(_, w)| *w));
    if let Some(top) = entries.iter_mut().max_by(|a, b| a.1.total_cmp(&b.1)) {
        top.1 += residue;
    }
    DepthDesign::from_entries(design.k(), &entries)
}

/// Searches every support family allowed for the optimum, for any `K >= 3`.
pub fn search_optimal_design(k: usize) -> Result<OptimalDesignResult> {
    if k < 3 {
        return Err(Error::domain(format!("D-optimal search needs K >= 3, got {k}")));
    }
    let spec = ModelSpec::new(k)?;
    let mut candidates: Vec<(DepthDesign, f64)> = Vec::new();
    for support in candidate_supports(k) {
        match optimize_weights(k, &support) {
            Ok(design) => {
                let design = prune(&design)?;
                let ld = log_det_of(&info_diagonal(&design)?, &spec).value();
                candidates.push((design, ld));
            }
            Err(Error::Singular { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if candidates.is_empty() {
        return Err(Error::Singular { block: None });
    }
    let mut best = 0;
    for (i, (_, ld)) in candidates.iter().enumerate() {
        if *ld > candidates[best].1 + LOGDET_TIE_TOL {
            best = i;
        }
    }
    let result = OptimalDesignResult::from_design(candidates[best].0.clone(), None)?;
    if result.certified {
        return Ok(result);
    }
    // The tie rule may have picked a smaller support whose log-det is within
    // tolerance of a better one; retry with the strict maximum.
    let strict = candidates
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(d, _)| d.clone())
        .expect("nonempty");
    let result = OptimalDesignResult::from_design(strict, None)?;
    if result.certified {
        Ok(result)
    } else {
        Err(Error::Certification {
            k,
            kw_max: result.kw_max,
            profile: result.profile.normalized(),
        })
    }
}

/// The uniform design with weights `3/7, 3/7, 1/7` on depths 1, 2, 3.
pub fn k3_optimal_design() -> Result<OptimalDesignResult> {
    let exact = vec![
        (1, Fraction::new(3, 7)),
        (2, Fraction::new(3, 7)),
        (3, Fraction::new(1, 7)),
    ];
    let entries: Vec<(usize, f64)> = exact
        .iter()
        .map(|(d, f)| (*d, crate::fraction::to_f64(f)))
        .collect();
    let design = DepthDesign::from_entries(3, &entries)?;
    OptimalDesignResult::from_design(design, Some(exact))
}

/// Certified D-optimal invariant design for `K >= 3` attributes.
pub fn d_optimal_design(k: usize) -> Result<OptimalDesignResult> {
    let result = if k == 3 {
        k3_optimal_design()?
    } else {
        search_optimal_design(k)?
    };
    if !result.certified {
        return Err(Error::Certification {
            k,
            kw_max: result.kw_max,
            profile: result.profile.normalized(),
        });
    }
    Ok(result)
}

/// Intermediate depth predicted for `K >= 4`: `(K-1)/2` for odd `K`, `K/2`
/// for `K` in `{4, 6}`, `K/2 - 1` for even `K >= 8`.
pub fn predicted_intermediate_depth(k: usize) -> usize {
    if k % 2 == 1 {
        (k - 1) / 2
    } else if k <= 6 {
        k / 2
    } else {
        k / 2 - 1
    }
}

/// One row of [`conjecture_probe`].
#[derive(Debug, Clone)]
pub struct ProbeRow {
    pub k: usize,
    pub predicted_d_star: usize,
    pub outcome: Result<OptimalDesignResult>,
}

impl ProbeRow {
    /// Support is exactly `{d*, K}` with the predicted `d*`.
    pub fn matches_prediction(&self) -> bool {
        match &self.outcome {
            Ok(r) => r.support_depths == vec![self.predicted_d_star, self.k],
            Err(_) => false,
        }
    }

    pub fn certified(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.certified)
    }
}

/// Runs [`d_optimal_design`] for `K = 4..=k_max` and compares each support
/// against [`predicted_intermediate_depth`]. Failures are kept per row.
pub fn conjecture_probe(k_max: usize) -> Result<Vec<ProbeRow>> {
    if k_max < 4 {
        return Err(Error::domain(format!("K_max must be at least 4, got {k_max}")));
    }
    ModelSpec::new(k_max)?;
    Ok((4..=k_max)
        .into_par_iter()
        .map(|k| ProbeRow {
            k,
            predicted_d_star: predicted_intermediate_depth(k),
            outcome: d_optimal_design(k),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3_star() -> DepthDesign {
        DepthDesign::new(3, vec![3.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0]).unwrap()
    }

    #[test]
    fn variance_at_zero() {
        assert_eq!(variance_function(0, &k3_star()).unwrap(), 0.0);
        assert_eq!(variance_single_depth(0, 2, 6).unwrap(), 0.0);
    }

    #[test]
    fn k3_optimum_variance() {
        let d = k3_star();
        for depth in 1..=3 {
            let v = variance_function(depth, &d).unwrap();
            assert!((v - 7.0).abs() < 1e-12);
            let closed = 7.0 * depth as f64 * ((depth * depth) as f64 - 6.0 * depth as f64 + 11.0) / 6.0;
            assert!((v - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_variance() {
        let d = DepthDesign::point_mass(5, 5).unwrap();
        assert_eq!(
            variance_function(1, &d),
            Err(Error::Singular { block: Some(Block::FirstOrder) })
        );
        assert!(matches!(kw_certify(&d), Err(Error::Singular { .. })));
        assert!(variance_function(6, &DepthDesign::point_mass(5, 1).unwrap()).is_err());
    }

    #[test]
    fn single_depth_fixed_point() {
        assert_eq!(
            variance_single_depth(2, 6, 6),
            Err(Error::Singular { block: Some(Block::FirstOrder) })
        );
        assert!(variance_single_depth(1, 2, 3).is_err());
        for k in 3..=10 {
            let p = ModelSpec::new(k).unwrap().p() as f64;
            for dp in 1..k {
                let Ok(v) = variance_single_depth(dp, dp, k) else { continue };
                assert!((v - p).abs() < 1e-10, "K={k} d'={dp}");
                for d in 0..=k {
                    let general =
                        variance_function(d, &DepthDesign::point_mass(k, dp).unwrap()).unwrap();
                    let special = variance_single_depth(d, dp, k).unwrap();
                    assert!((general - special).abs() < 1e-12 * general.max(1.0));
                }
            }
        }
    }

    #[test]
    fn certify_k3_optimum() {
        let c = kw_certify(&k3_star()).unwrap();
        assert!(c.certified);
        assert_eq!(c.equality_depths, vec![1, 2, 3]);
    }

    #[test]
    fn certify_single_depth_one_fails() {
        let d = DepthDesign::point_mass(4, 1).unwrap();
        let c = kw_certify(&d).unwrap();
        assert!(!c.certified);
        // Single-depth formula at d = 4, d' = 1 against p = 14.
        let v4 = variance_single_depth(4, 1, 4).unwrap();
        assert!(v4 > 14.0);
        assert!((c.profile.value(4) - v4).abs() < 1e-12);
    }

    #[test]
    fn block_optima() {
        assert_eq!(optimal_depth_main(3).unwrap(), 3);
        assert_eq!(optimal_depth_main(10).unwrap(), 10);
        assert_eq!(optimal_depth_first_order(4).unwrap(), vec![2]);
        assert_eq!(optimal_depth_first_order(5).unwrap(), vec![2, 3]);
        assert!(optimal_depth_first_order(1).is_err());
        assert_eq!(optimal_depth_second_order(3).unwrap(), vec![1, 3]);
        assert_eq!(optimal_depth_second_order(4).unwrap(), vec![4]);
        assert!(optimal_depth_second_order(2).is_err());
    }

    #[test]
    fn analytic_weights_table_values() {
        let w4 = analytic_weight(4).unwrap();
        assert_eq!(w4.d_star, 2);
        assert!((w4.w_k - 3.0 / 21.0).abs() < 1e-15);
        let w5 = analytic_weight(5).unwrap();
        assert_eq!(w5.d_star, 2);
        assert!((w5.w_k - 0.167).abs() < 5e-4);
        let w8 = analytic_weight(8).unwrap();
        assert_eq!(w8.d_star, 3);
        assert!((w8.w_k - 0.356).abs() < 5e-4);
        assert!(analytic_weight(3).is_none());
        assert!(analytic_weight(11).is_none());
    }

    #[test]
    fn optimize_examples() {
        assert!(matches!(
            optimize_weights(6, &[6]),
            Err(Error::Singular { block: Some(Block::FirstOrder) })
        ));
        let d = optimize_weights(4, &[4, 2]).unwrap();
        assert!((d.weight(4) - 1.0 / 7.0).abs() < 1e-12);
        assert!((d.weight(2) - 6.0 / 7.0).abs() < 1e-12);
        let d = optimize_weights(3, &[1, 2, 3]).unwrap();
        for (got, want) in d.weights().iter().zip([3.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(optimize_weights(4, &[]).is_err());
        assert!(optimize_weights(4, &[1, 2, 3, 4]).is_err());
        assert!(optimize_weights(4, &[0, 2]).is_err());
    }

    #[test]
    fn optimize_stationarity() {
        for k in 4..=12 {
            let d_star = predicted_intermediate_depth(k);
            let d = optimize_weights(k, &[d_star, k]).unwrap();
            assert!(stationarity_residual(&d).unwrap() < 1e-10 * ModelSpec::new(k).unwrap().p() as f64);
        }
    }

    #[test]
    fn search_recovers_k3() {
        let r = search_optimal_design(3).unwrap();
        assert_eq!(r.support_depths, vec![1, 2, 3]);
        for (got, want) in r.design.weights().iter().zip([3.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0]) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn d_optimal_k3_exact() {
        let r = d_optimal_design(3).unwrap();
        assert!(r.certified);
        assert_eq!(r.design.weights(), &[3.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0]);
        assert_eq!(r.exact_weights.as_ref().unwrap()[2].1, Fraction::new(1, 7));
        assert!(d_optimal_design(2).is_err());
    }

    #[test]
    fn d_optimal_k7_k10() {
        let r = d_optimal_design(7).unwrap();
        assert_eq!(r.support_depths, vec![3, 7]);
        assert!((r.design.weight(7) - 0.303).abs() < 5e-4);
        let r = d_optimal_design(10).unwrap();
        assert_eq!(r.support_depths, vec![4, 10]);
        assert!((r.design.weight(10) - 0.462).abs() < 5e-4);
    }

    #[test]
    fn k8_optimum_is_depths_four_and_eight() {
        let r = d_optimal_design(8).unwrap();
        assert_eq!(r.support_depths, vec![4, 8]);
        assert!((r.design.weight(8) - 9.0 / 23.0).abs() < 1e-12);
        // The {3, 8} design is worse and violates the variance bound at d = 4.
        let alt = optimize_weights(8, &[3, 8]).unwrap();
        let alt_cert = kw_certify(&alt).unwrap();
        assert!(!alt_cert.certified);
        assert!((alt_cert.profile.normalized()[4] - 1.00392).abs() < 1e-5);
    }

    #[test]
    fn cubic_third_difference() {
        for k in 3..=15 {
            let d = if k == 3 { k3_star() } else { d_optimal_design(k).unwrap().design };
            let h = info_diagonal(&d).unwrap();
            let v: Vec<f64> = (0..=k).map(|x| variance_function(x, &d).unwrap()).collect();
            for i in 0..v.len().saturating_sub(3) {
                let third = v[i + 3] - 3.0 * v[i + 2] + 3.0 * v[i + 1] - v[i];
                assert!(third > 0.0);
                assert!((third - 16.0 / h.h3).abs() < 1e-8 * third.abs().max(1.0));
            }
        }
    }

    #[test]
    fn probe_small() {
        assert!(conjecture_probe(3).is_err());
        let rows = conjecture_probe(7).unwrap();
        assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![4, 5, 6, 7]);
        assert!(rows.iter().all(|r| r.certified() && r.matches_prediction()));
    }

    #[test]
    fn candidates_cover_families() {
        let c = candidate_supports(5);
        assert!(c.contains(&vec![2, 5]));
        assert!(c.contains(&vec![2, 3]));
        assert!(c.contains(&vec![2, 3, 5]));
        assert!(!c.contains(&vec![4, 5, 5]));
    }
}
