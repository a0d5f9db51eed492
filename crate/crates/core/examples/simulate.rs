//! Monte Carlo check of the least-squares covariance under the optimal
//! design, against the design that only compares profiles one attribute apart.

use pairdesign::cli::{simulate_summary, SimulateArgs};
use pairdesign::d_optimal_design;

fn main() -> pairdesign::Result<()> {
    let design = d_optimal_design(4)?.design;
    let args = SimulateArgs { n: 840, sigma: 1.0, seed: 11, reps: 5000, compare_naive: true };
    let s = simulate_summary(&design, &args)?;

    println!("replications: {}", s.replications);
    println!("relative Frobenius error: {:.4}", s.frobenius_rel_error.unwrap_or(f64::NAN));
    println!(
        "log generalized variance: {:.3} (theory {:.3})",
        s.log_generalized_variance.unwrap_or(f64::NAN),
        s.log_generalized_variance_theoretical.unwrap_or(f64::NAN)
    );
    if let Some(naive) = &s.naive {
        println!(
            "depth-1 design: log GV {:.3}, efficiency ratio {:.3} (theory {:.3})",
            naive.log_generalized_variance.unwrap_or(f64::NAN),
            naive.efficiency_ratio.unwrap_or(f64::NAN),
            naive.efficiency_ratio_theoretical.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
