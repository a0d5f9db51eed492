//! Simulated paired-comparison responses and least-squares recovery.
//!
//! Responses follow `Y_n = (f(i_n) - f(j_n))^T beta + e_n` with i.i.d.
//! normal errors. Replication `r` draws from a ChaCha stream derived from
//! `(seed, r)`, so results do not depend on how replications are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::ExactDesign;
use crate::model::{self, ModelSpec};
use crate::oracle::{DenseMatrix, Lu};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub beta: Vec<f64>,
    /// Noise standard deviation; zero gives noiseless responses.
    pub sigma: f64,
    pub seed: u64,
    pub replications: usize,
}

impl SimulationConfig {
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        if self.beta.len() != spec.p() {
            return Err(Error::domain(format!(
                "beta has length {}, model has p = {}",
                self.beta.len(),
                spec.p()
            )));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::domain(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if self.replications == 0 {
            return Err(Error::domain("at least one replication is required"));
        }
        Ok(())
    }
}

/// The `N x p` matrix of difference vectors, row-major.
fn design_rows(design: &ExactDesign) -> Result<Vec<Vec<f64>>> {
    let spec = ModelSpec::new(design.k())?;
    design
        .pairs()
        .iter()
        .map(|p| model::difference_vector(p, &spec))
        .collect()
}

fn rng_for(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

fn responses_with(rows: &[Vec<f64>], cfg: &SimulationConfig, replication: u64) -> Vec<f64> {
    let mut rng = rng_for(cfg.seed, replication);
    // sigma >= 0 is validated; Normal::new only fails on non-finite sigma.
    let noise = Normal::new(0.0, cfg.sigma).expect("valid sigma");
    rows.iter()
        .map(|x| {
            let mean: f64 = x.iter().zip(&cfg.beta).map(|(a, b)| a * b).sum();
            mean + noise.sample(&mut rng)
        })
        .collect()
}

/// Responses for replication `replication` of the configuration.
pub fn simulate_replication(
    design: &ExactDesign,
    cfg: &SimulationConfig,
    replication: u64,
) -> Result<Vec<f64>> {
    cfg.validate(&ModelSpec::new(design.k())?)?;
    Ok(responses_with(&design_rows(design)?, cfg, replication))
}

/// One response per comparison, from replication 0 of the seed.
pub fn simulate_responses(design: &ExactDesign, cfg: &SimulationConfig) -> Result<Vec<f64>> {
    simulate_replication(design, cfg, 0)
}

/// Least-squares estimate and its estimated covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub beta_hat: Vec<f64>,
    /// `RSS / (N - p)`; zero when `N = p`.
    pub sigma2_hat: f64,
    /// `sigma2_hat (X^T X)^{-1}` where `X^T X = N M(xi_N)`.
    pub covariance: DenseMatrix,
}

/// Ordinary least squares on a fixed exact design, with `(X^T X)^{-1}`
/// factored once.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    rows: Vec<Vec<f64>>,
    gram_inv: DenseMatrix,
}

impl LeastSquares {
    pub fn new(design: &ExactDesign) -> Result<Self> {
        let rows = design_rows(design)?;
        let p = ModelSpec::new(design.k())?.p();
        let mut gram = DenseMatrix::zeros(p);
        for x in &rows {
            gram.add_outer(x, 1.0);
        }
        let gram_inv = Lu::new(&gram)?.inverse();
        Ok(LeastSquares { rows, gram_inv })
    }

    /// `(X^T X)^{-1} = (N M(xi_N))^{-1}`.
    pub fn unscaled_covariance(&self) -> &DenseMatrix {
        &self.gram_inv
    }

    pub fn estimate(&self, responses: &[f64]) -> Result<Vec<f64>> {
        if responses.len() != self.rows.len() {
            return Err(Error::domain(format!(
                "expected {} responses, got {}",
                self.rows.len(),
                responses.len()
            )));
        }
        let p = self.gram_inv.dim();
        let mut xty = vec![0.0; p];
        for (x, y) in self.rows.iter().zip(responses) {
            for (acc, xi) in xty.iter_mut().zip(x) {
                *acc += xi * y;
            }
        }
        Ok(self.gram_inv.mul_vec(&xty))
    }

    pub fn fit(&self, responses: &[f64]) -> Result<LeastSquaresFit> {
        let beta_hat = self.estimate(responses)?;
        let n = self.rows.len();
        let p = beta_hat.len();
        let rss: f64 = self
            .rows
            .iter()
            .zip(responses)
            .map(|(x, y)| {
                let fitted: f64 = x.iter().zip(&beta_hat).map(|(a, b)| a * b).sum();
                (y - fitted).powi(2)
            })
            .sum();
        let sigma2_hat = if n > p { rss / (n - p) as f64 } else { 0.0 };
        let mut covariance = self.gram_inv.clone();
        covariance.scale(sigma2_hat);
        Ok(LeastSquaresFit { beta_hat, sigma2_hat, covariance })
    }
}

pub fn least_squares(design: &ExactDesign, responses: &[f64]) -> Result<LeastSquaresFit> {
    LeastSquares::new(design)?.fit(responses)
}

/// Aggregate of repeated simulate-and-fit runs.
#[derive(Debug, Clone)]
pub struct MonteCarloSummary {
    pub replications: usize,
    pub beta_hat_mean: Vec<f64>,
    /// Standard error of each coordinate of `beta_hat_mean`.
    pub beta_hat_se: Vec<f64>,
    pub empirical_covariance: DenseMatrix,
    /// `sigma^2 (N M(xi_N))^{-1}`.
    pub theoretical_covariance: DenseMatrix,
    /// `||empirical - theoretical||_F / ||theoretical||_F`; `None` when the
    /// theoretical covariance is zero.
    pub frobenius_rel_error: Option<f64>,
    /// `ln det` of the empirical covariance; `None` if it is singular.
    pub log_generalized_variance: Option<f64>,
    pub log_generalized_variance_theoretical: Option<f64>,
    /// Largest `|beta_hat - beta|` over replications and coordinates.
    pub max_abs_error: f64,
}

pub fn monte_carlo(design: &ExactDesign, cfg: &SimulationConfig) -> Result<MonteCarloSummary> {
    let spec = ModelSpec::new(design.k())?;
    cfg.validate(&spec)?;
    let ls = LeastSquares::new(design)?;
    let estimates: Vec<Vec<f64>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| ls.estimate(&responses_with(&ls.rows, cfg, r)))
        .collect::<Result<_>>()?;

    let p = spec.p();
    let reps = estimates.len() as f64;
    let mut mean = vec![0.0; p];
    for b in &estimates {
        for (m, x) in mean.iter_mut().zip(b) {
            *m += x / reps;
        }
    }
    let mut cov = DenseMatrix::zeros(p);
    let mut max_abs_error = 0.0f64;
    for b in &estimates {
        let centered: Vec<f64> = b.iter().zip(&mean).map(|(x, m)| x - m).collect();
        cov.add_outer(&centered, 1.0);
        for (x, t) in b.iter().zip(&cfg.beta) {
            max_abs_error = max_abs_error.max((x - t).abs());
        }
    }
    if estimates.len() > 1 {
        cov.scale(1.0 / (reps - 1.0));
    }
    let beta_hat_se = (0..p).map(|i| (cov.get(i, i) / reps).sqrt()).collect();

    let mut theory = ls.unscaled_covariance().clone();
    theory.scale(cfg.sigma * cfg.sigma);
    let theory_norm = theory.frobenius();
    let frobenius_rel_error =
        (theory_norm > 0.0).then(|| cov.sub(&theory).frobenius() / theory_norm);
    let log_gv = |m: &DenseMatrix| {
        Lu::new(m)
            .ok()
            .map(|lu| lu.log_abs_det())
            .filter(|(_, sign)| *sign > 0.0)
            .map(|(v, _)| v)
    };
    Ok(MonteCarloSummary {
        replications: estimates.len(),
        beta_hat_mean: mean,
        beta_hat_se,
        log_generalized_variance: log_gv(&cov),
        log_generalized_variance_theoretical: log_gv(&theory),
        empirical_covariance: cov,
        theoretical_covariance: theory,
        frobenius_rel_error,
        max_abs_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{realize_exact, DepthDesign};
    use crate::model::{PairedComparison, Profile};

    fn k4_design(n: usize) -> ExactDesign {
        let d = DepthDesign::from_entries(4, &[(4, 1.0 / 7.0), (2, 6.0 / 7.0)]).unwrap();
        realize_exact(&d, n).unwrap()
    }

    fn cfg(sigma: f64, seed: u64, reps: usize) -> SimulationConfig {
        SimulationConfig {
            beta: (0..14).map(|i| 0.1 * i as f64 - 0.5).collect(),
            sigma,
            seed,
            replications: reps,
        }
    }

    #[test]
    fn noiseless_responses_are_means() {
        let design = k4_design(112);
        let c = cfg(0.0, 1, 1);
        let y = simulate_responses(&design, &c).unwrap();
        let spec = ModelSpec::new(4).unwrap();
        for (pair, yi) in design.pairs().iter().zip(&y) {
            let x = model::difference_vector(pair, &spec).unwrap();
            let mean: f64 = x.iter().zip(&c.beta).map(|(a, b)| a * b).sum();
            assert_eq!(*yi, mean);
        }
        let fit = least_squares(&design, &y).unwrap();
        for (b, t) in fit.beta_hat.iter().zip(&c.beta) {
            assert!((b - t).abs() < 1e-10);
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let design = k4_design(200);
        let a = simulate_responses(&design, &cfg(1.0, 42, 1)).unwrap();
        let b = simulate_responses(&design, &cfg(1.0, 42, 1)).unwrap();
        let c = simulate_responses(&design, &cfg(1.0, 43, 1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let r1 = simulate_replication(&design, &cfg(1.0, 42, 1), 1).unwrap();
        assert_ne!(a, r1);
    }

    #[test]
    fn identical_pair_has_zero_mean() {
        let p = Profile::new(vec![1, 2, 1, 2]).unwrap();
        let pair = PairedComparison::new(p.clone(), p).unwrap();
        let design = ExactDesign::new(4, vec![pair; 2000]).unwrap();
        let y = simulate_responses(&design, &cfg(0.5, 3, 1)).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!(mean.abs() < 4.0 * 0.5 / (y.len() as f64).sqrt());
    }

    #[test]
    fn pure_noise_variance() {
        let design = k4_design(20000);
        let mut c = cfg(2.0, 9, 1);
        c.beta = vec![0.0; 14];
        let y = simulate_responses(&design, &c).unwrap();
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 4.0).abs() < 0.15);
    }

    #[test]
    fn config_errors() {
        let design = k4_design(50);
        let mut c = cfg(1.0, 0, 1);
        c.beta.pop();
        assert!(simulate_responses(&design, &c).is_err());
        assert!(simulate_responses(&design, &cfg(-1.0, 0, 1)).is_err());
        assert!(monte_carlo(&design, &cfg(1.0, 0, 0)).is_err());
    }

    #[test]
    fn singular_design_is_rejected() {
        let design = realize_exact(&DepthDesign::point_mass(4, 4).unwrap(), 64).unwrap();
        assert!(matches!(LeastSquares::new(&design), Err(Error::Singular { .. })));
    }

    #[test]
    fn estimator_is_unbiased() {
        let design = k4_design(168);
        let c = cfg(1.0, 11, 2000);
        let s = monte_carlo(&design, &c).unwrap();
        for ((m, se), t) in s.beta_hat_mean.iter().zip(&s.beta_hat_se).zip(&c.beta) {
            assert!((m - t).abs() <= 3.5 * se, "{m} vs {t} (se {se})");
        }
    }

    #[test]
    fn residual_variance_estimate() {
        let design = k4_design(840);
        let c = cfg(1.5, 5, 1);
        let y = simulate_responses(&design, &c).unwrap();
        let fit = least_squares(&design, &y).unwrap();
        assert!((fit.sigma2_hat - 2.25).abs() < 0.35);
        assert!(fit.covariance.is_symmetric(1e-12));
    }
}
