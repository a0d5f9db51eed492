//! Design documents and the commands behind the `pairdesign` binary.
//!
//! Every command returns its output as a string together with an
//! [`ExitStatus`], so the binary only parses flags and prints.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraction::{self, Fraction};
use crate::measures::{self, realize_exact, DepthDesign, DiagonalInfo};
use crate::model::{enumerate_orbit, ModelSpec};
use crate::oracle::DenseMatrix;
use crate::optimality::{self, kw_certify, OptimalDesignResult};
use crate::sim::{self, SimulationConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const NORMALIZATION_NOTE: &str = "per-observation: M(xi) = sum_(i,j) xi(i,j) (f(i)-f(j)) (f(i)-f(j))^T";

/// Tolerance on the weight sum of a parsed document (weights carry 12
/// significant digits).
pub const DOCUMENT_SUM_TOL: f64 = 1e-10;

/// First and last `K` of the published comparison tables.
pub const TABLE_K_RANGE: std::ops::RangeInclusive<usize> = 4..=10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Uncertified = 1,
    Usage = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Exit status for a library error.
pub fn status_for(err: &Error) -> ExitStatus {
    match err {
        Error::Certification { .. } | Error::Singular { .. } => ExitStatus::Uncertified,
        _ => ExitStatus::Usage,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub stdout: String,
    pub status: ExitStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub depth: usize,
    /// Decimal with 12 significant digits.
    pub weight: String,
    /// Exact fraction such as `"3/7"`, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<String>,
}

/// Serialized form of an invariant design and its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub k: usize,
    pub support: Vec<SupportEntry>,
    pub h: DiagonalInfo,
    /// `null` when the information matrix is singular.
    pub logdet: Option<f64>,
    pub kw_max: f64,
    pub certified: bool,
    pub tool_version: String,
    pub normalization: String,
}

/// `x` with 12 significant digits in positional notation.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (11 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

impl DesignDocument {
    pub fn from_result(result: &OptimalDesignResult) -> Self {
        let support = result
            .design
            .entries()
            .into_iter()
            .map(|(d, w)| {
                let exact = result
                    .exact_weights
                    .as_ref()
                    .and_then(|ws| ws.iter().find(|(dd, _)| *dd == d).map(|(_, f)| *f))
                    .or_else(|| {
                        fraction::rational_form(
                            w,
                            fraction::MAX_DENOMINATOR,
                            fraction::RATIONAL_TOLERANCE,
                        )
                    });
                SupportEntry {
                    depth: d,
                    weight: format_significant(w),
                    rational: exact.map(|f| f.to_string()),
                }
            })
            .collect();
        DesignDocument {
            k: result.design.k(),
            support,
            h: result.h,
            logdet: result.logdet.is_finite().then_some(result.logdet),
            kw_max: result.kw_max,
            certified: result.certified,
            tool_version: TOOL_VERSION.to_string(),
            normalization: NORMALIZATION_NOTE.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Rebuilds the design. Rational forms take precedence over decimals;
    /// the weights must sum to 1 within [`DOCUMENT_SUM_TOL`] and are then
    /// renormalized.
    pub fn to_design(&self) -> Result<DepthDesign> {
        let spec = ModelSpec::new(self.k).map_err(|e| Error::Parse(e.to_string()))?;
        if self.support.is_empty() {
            return Err(Error::Parse("document has an empty support".into()));
        }
        let mut entries = Vec::with_capacity(self.support.len());
        for entry in &self.support {
            if entry.depth == 0 || entry.depth > spec.k() {
                return Err(Error::Parse(format!(
                    "depth {} is outside 1..={}",
                    entry.depth,
                    spec.k()
                )));
            }
            if entries.iter().any(|(d, _)| *d == entry.depth) {
                return Err(Error::Parse(format!("depth {} appears twice", entry.depth)));
            }
            let w = match &entry.rational {
                Some(r) => {
                    let f = Fraction::from_str(r.trim())
                        .map_err(|_| Error::Parse(format!("bad rational weight {r:?}")))?;
                    fraction::to_f64(&f)
                }
                None => entry
                    .weight
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad weight {:?}", entry.weight)))?,
            };
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Parse(format!("weight {w} is not a nonnegative number")));
            }
            entries.push((entry.depth, w));
        }
        let total = measures::compensated_sum(entries.iter().map(|(_, w)| *w));
        if (total - 1.0).abs() > DOCUMENT_SUM_TOL {
            return Err(Error::Parse(format!("weights sum to {total}, not 1")));
        }
        for e in entries.iter_mut() {
            e.1 /= total;
        }
        let residue = 1.0 - measures::compensated_sum(entries.iter().map(|(_, w)| *w));
        if let Some(top) = entries.iter_mut().max_by(|a, b| a.1.total_cmp(&b.1)) {
            top.1 += residue;
        }
        DepthDesign::from_entries(spec.k(), &entries).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `design --k K`: the certified D-optimal design as a JSON document.
pub fn cmd_design(k: usize) -> Result<DesignDocument> {
    if k < 3 {
        return Err(Error::domain(format!("K must be at least 3, got {k}")));
    }
    Ok(DesignDocument::from_result(&optimality::d_optimal_design(k)?))
}

/// One column of the optimal-weights table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub k: usize,
    pub w_k: f64,
    pub d_star: Option<usize>,
    pub w_d_star: f64,
    pub support: Vec<(usize, f64)>,
}

pub fn table1_rows() -> Result<Vec<Table1Row>> {
    TABLE_K_RANGE
        .map(|k| {
            let r = optimality::d_optimal_design(k)?;
            let d_star = r.intermediate_depth();
            Ok(Table1Row {
                k,
                w_k: r.design.weight(k),
                d_star,
                w_d_star: d_star.map(|d| r.design.weight(d)).unwrap_or(0.0),
                support: r.design.entries(),
            })
        })
        .collect()
}

/// One row of the normalized-variance table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub k: usize,
    /// `v(d)/p` for `d = 1..=K`.
    pub values: Vec<f64>,
    pub support: Vec<usize>,
}

pub fn table2_rows() -> Result<Vec<Table2Row>> {
    TABLE_K_RANGE
        .map(|k| {
            let r = optimality::d_optimal_design(k)?;
            Ok(Table2Row {
                k,
                values: r.profile.normalized()[1..].to_vec(),
                support: r.support_depths.clone(),
            })
        })
        .collect()
}

pub fn cmd_table1(csv: bool) -> Result<String> {
    let rows = table1_rows()?;
    let mut out = String::new();
    let depth = |r: &Table1Row| r.d_star.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
    if csv {
        out.push_str("k,w_k,d_star,w_d_star\n");
        for r in &rows {
            writeln!(out, "{},{:.3},{},{:.3}", r.k, r.w_k, depth(r), r.w_d_star).unwrap();
        }
        return Ok(out);
    }
    let line = |label: &str, cells: Vec<String>| {
        let mut l = format!("{label:<6}|");
        for c in cells {
            l.push_str(&format!("{c:>7}"));
        }
        l
    };
    writeln!(out, "{}", line("K", rows.iter().map(|r| r.k.to_string()).collect())).unwrap();
    writeln!(out, "{}", line("w_K*", rows.iter().map(|r| format!("{:.3}", r.w_k)).collect()))
        .unwrap();
    writeln!(out, "{}", line("d*", rows.iter().map(depth).collect())).unwrap();
    writeln!(out, "{}", line("w_d*", rows.iter().map(|r| format!("{:.3}", r.w_d_star)).collect()))
        .unwrap();
    Ok(out)
}

pub fn cmd_table2(csv: bool) -> Result<String> {
    let rows = table2_rows()?;
    let mut out = String::new();
    if csv {
        out.push_str("k,d,v_over_p,supported\n");
        for r in &rows {
            for (i, v) in r.values.iter().enumerate() {
                let d = i + 1;
                writeln!(out, "{},{},{:.3},{}", r.k, d, v, r.support.contains(&d)).unwrap();
            }
        }
        return Ok(out);
    }
    let k_max = *TABLE_K_RANGE.end();
    let mut header = format!("{:<4}|", "K");
    for d in 1..=k_max {
        header.push_str(&format!("{d:>8}"));
    }
    writeln!(out, "{header}").unwrap();
    for r in &rows {
        let mut l = format!("{:<4}|", r.k);
        for (i, v) in r.values.iter().enumerate() {
            let mark = if r.support.contains(&(i + 1)) { "*" } else { " " };
            l.push_str(&format!("{:>7.3}{mark}", v));
        }
        writeln!(out, "{}", l.trim_end()).unwrap();
    }
    out.push_str("(* marks supported depths)\n");
    Ok(out)
}

/// `check FILE`: variance profile and verdict for a document.
pub fn cmd_check(text: &str) -> Result<CommandOutput> {
    let doc = DesignDocument::from_json(text)?;
    let design = doc.to_design()?;
    let mut out = String::new();
    match kw_certify(&design) {
        Ok(cert) => {
            writeln!(out, "K = {}, p = {}", design.k(), cert.profile.p).unwrap();
            out.push_str("d,v_over_p\n");
            for (d, v) in cert.profile.normalized().iter().enumerate() {
                writeln!(out, "{d},{v:.12}").unwrap();
            }
            writeln!(out, "kw_max = {:.12}", cert.kw_max).unwrap();
            let verdict = if cert.certified { "certified" } else { "NOT certified" };
            writeln!(out, "{verdict}").unwrap();
            Ok(CommandOutput {
                stdout: out,
                status: if cert.certified { ExitStatus::Success } else { ExitStatus::Uncertified },
            })
        }
        Err(e @ Error::Singular { .. }) => {
            writeln!(out, "{e}\nNOT certified").unwrap();
            Ok(CommandOutput { stdout: out, status: ExitStatus::Uncertified })
        }
        Err(e) => Err(e),
    }
}

/// `realize FILE --n N`: CSV listing of an exact design with `N` rows.
pub fn cmd_realize(text: &str, n: usize) -> Result<String> {
    let design = DesignDocument::from_json(text)?.to_design()?;
    let exact = realize_exact(&design, n)?;
    let k = design.k();
    let mut out = String::new();
    let header: Vec<String> = (1..=k)
        .map(|a| format!("i_{a}"))
        .chain((1..=k).map(|a| format!("j_{a}")))
        .collect();
    writeln!(out, "{}", header.join(",")).unwrap();
    for pair in exact.pairs() {
        let cells: Vec<String> = pair
            .first()
            .levels()
            .iter()
            .chain(pair.second().levels())
            .map(|l| l.to_string())
            .collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    Ok(out)
}

/// Parameters of `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
    pub reps: usize,
    pub compare_naive: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NaiveComparison {
    pub depth: usize,
    pub log_generalized_variance: Option<f64>,
    pub log_generalized_variance_theoretical: Option<f64>,
    /// `(GV_naive / GV_design)^(1/p)` from the empirical covariances.
    pub efficiency_ratio: Option<f64>,
    pub efficiency_ratio_theoretical: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SimulationSummary {
    pub k: usize,
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
    pub replications: usize,
    pub beta: Vec<f64>,
    pub beta_hat_mean: Vec<f64>,
    pub beta_hat_se: Vec<f64>,
    pub max_abs_error: f64,
    pub exact_recovery: bool,
    pub frobenius_rel_error: Option<f64>,
    pub log_generalized_variance: Option<f64>,
    pub log_generalized_variance_theoretical: Option<f64>,
    pub empirical_covariance: Vec<Vec<f64>>,
    /// `sigma^2 (N M)^{-1}` for the realized design.
    pub theoretical_covariance: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naive: Option<NaiveComparison>,
    pub tool_version: String,
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.dim()).map(|r| m.row(r).to_vec()).collect()
}

fn ratio(naive: Option<f64>, opt: Option<f64>, p: usize) -> Option<f64> {
    Some(((naive? - opt?) / p as f64).exp())
}

/// Simulation summary for a design; the true parameters are all ones.
pub fn simulate_summary(design: &DepthDesign, args: &SimulateArgs) -> Result<SimulationSummary> {
    let spec = ModelSpec::new(design.k())?;
    let cfg = SimulationConfig {
        beta: vec![1.0; spec.p()],
        sigma: args.sigma,
        seed: args.seed,
        replications: args.reps,
    };
    let exact = realize_exact(design, args.n)?;
    let mc = sim::monte_carlo(&exact, &cfg)?;
    let naive = if args.compare_naive {
        let baseline = realize_exact(&DepthDesign::point_mass(spec.k(), 1)?, args.n)?;
        let nmc = sim::monte_carlo(&baseline, &cfg)?;
        Some(NaiveComparison {
            depth: 1,
            efficiency_ratio: ratio(nmc.log_generalized_variance, mc.log_generalized_variance, spec.p()),
            efficiency_ratio_theoretical: ratio(
                nmc.log_generalized_variance_theoretical,
                mc.log_generalized_variance_theoretical,
                spec.p(),
            ),
            log_generalized_variance: nmc.log_generalized_variance,
            log_generalized_variance_theoretical: nmc.log_generalized_variance_theoretical,
        })
    } else {
        None
    };
    Ok(SimulationSummary {
        k: spec.k(),
        n: args.n,
        sigma: args.sigma,
        seed: args.seed,
        replications: mc.replications,
        exact_recovery: mc.max_abs_error < 1e-10,
        max_abs_error: mc.max_abs_error,
        beta: cfg.beta,
        beta_hat_mean: mc.beta_hat_mean,
        beta_hat_se: mc.beta_hat_se,
        empirical_covariance: rows(&mc.empirical_covariance),
        theoretical_covariance: rows(&mc.theoretical_covariance),
        frobenius_rel_error: mc.frobenius_rel_error,
        log_generalized_variance: mc.log_generalized_variance,
        log_generalized_variance_theoretical: mc.log_generalized_variance_theoretical,
        naive,
        tool_version: TOOL_VERSION.to_string(),
    })
}

/// `simulate FILE ...`: JSON summary.
pub fn cmd_simulate(text: &str, args: &SimulateArgs) -> Result<String> {
    let design = DesignDocument::from_json(text)?.to_design()?;
    let summary = simulate_summary(&design, args)?;
    let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
    s.push('\n');
    Ok(s)
}

/// `orbit --k K --d D`: CSV of every ordered pair of depth `D`.
pub fn cmd_orbit(k: usize, d: usize) -> Result<String> {
    let spec = ModelSpec::new(k)?;
    let mut out = String::new();
    let header: Vec<String> = (1..=k)
        .map(|a| format!("i_{a}"))
        .chain((1..=k).map(|a| format!("j_{a}")))
        .collect();
    writeln!(out, "{}", header.join(",")).unwrap();
    for pair in enumerate_orbit(&spec, d)? {
        let cells: Vec<String> = pair
            .first()
            .levels()
            .iter()
            .chain(pair.second().levels())
            .map(|l| l.to_string())
            .collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    Ok(out)
}

/// `probe --kmax K`: support of the optimum for `K = 4..=kmax` against the
/// predicted single intermediate depth. Exit 0 iff every `K` certified.
pub fn cmd_probe(k_max: usize) -> Result<CommandOutput> {
    let rows = optimality::conjecture_probe(k_max)?;
    let mut out = String::from("k,support,predicted_d_star,matches,certified,kw_max\n");
    let mut all_certified = true;
    for row in &rows {
        match &row.outcome {
            Ok(r) => {
                let support: Vec<String> = r
                    .design
                    .entries()
                    .iter()
                    .map(|(d, w)| format!("{d}:{w:.6}"))
                    .collect();
                writeln!(
                    out,
                    "{},{},{},{},{},{:.12}",
                    row.k,
                    support.join(" "),
                    row.predicted_d_star,
                    row.matches_prediction(),
                    r.certified,
                    r.kw_max
                )
                .unwrap();
                all_certified &= r.certified;
            }
            Err(e) => {
                writeln!(out, "{},error: {e},{},false,false,", row.k, row.predicted_d_star).unwrap();
                all_certified = false;
            }
        }
    }
    let mismatches: Vec<usize> = rows.iter().filter(|r| !r.matches_prediction()).map(|r| r.k).collect();
    if !mismatches.is_empty() {
        writeln!(out, "# support differs from the predicted depth at K = {mismatches:?}").unwrap();
    }
    Ok(CommandOutput {
        stdout: out,
        status: if all_certified { ExitStatus::Success } else { ExitStatus::Uncertified },
    })
}
