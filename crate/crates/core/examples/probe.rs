//! Which depths does the optimum use as K grows?

use pairdesign::optimality::conjecture_probe;

fn main() -> pairdesign::Result<()> {
    let k_max: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(40);
    for row in conjecture_probe(k_max)? {
        match &row.outcome {
            Ok(r) => {
                let entries: Vec<String> =
                    r.design.entries().iter().map(|(d, w)| format!("{d}:{w:.4}")).collect();
                let note = if row.matches_prediction() { "" } else { "  <- differs from the predicted depth" };
                println!(
                    "K = {:>3}  {:<22} predicted d* = {:>2}{note}",
                    row.k,
                    entries.join(" "),
                    row.predicted_d_star
                );
            }
            Err(e) => println!("K = {:>3}  {e}", row.k),
        }
    }
    Ok(())
}
