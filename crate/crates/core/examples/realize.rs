//! Round an approximate design to N comparisons and list them.

use pairdesign::measures::realize_exact;
use pairdesign::d_optimal_design;

fn main() -> pairdesign::Result<()> {
    let design = d_optimal_design(3)?.design;
    let exact = realize_exact(&design, 14)?;
    println!("N = {}, undersized = {}", exact.n(), exact.undersized);
    for (pair, count) in exact.multiplicities() {
        println!("  {:?} vs {:?}  x{count}  (depth {})", pair.first().levels(), pair.second().levels(), pair.depth());
    }

    // 56 comparisons realize the K = 3 optimum exactly.
    let m = realize_exact(&design, 56)?.info_matrix()?;
    println!("N = 56: diagonal {:.6}, off-diagonal {:.1e}", m.get(0, 0), m.max_off_diagonal());
    Ok(())
}
