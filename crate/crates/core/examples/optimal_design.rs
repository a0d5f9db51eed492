//! Build the D-optimal paired comparison design for K attributes.
//!
//! cargo run --example optimal_design -- 6

use pairdesign::cli::DesignDocument;
use pairdesign::d_optimal_design;

fn main() -> pairdesign::Result<()> {
    let k: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let result = d_optimal_design(k)?;

    println!("K = {k}, p = {}", result.profile.p);
    for (d, w) in result.design.entries() {
        println!("  depth {d:>2}: weight {w:.6}");
    }
    println!("h = ({:.6}, {:.6}, {:.6})", result.h.h1, result.h.h2, result.h.h3);
    println!("log det M = {:.6}", result.logdet);
    println!("max v(d)/p = {:.12} (certified: {})", result.kw_max, result.certified);

    println!("\n{}", DesignDocument::from_result(&result).to_json());
    Ok(())
}
