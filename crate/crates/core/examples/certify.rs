//! Kiefer-Wolfowitz check of a few designs: the optimum, a single depth,
//! and the best design restricted to a given pair of depths.

use pairdesign::optimality::optimize_weights;
use pairdesign::{kw_certify, DepthDesign};

fn report(label: &str, design: &DepthDesign) -> pairdesign::Result<()> {
    match kw_certify(design) {
        Ok(c) => {
            let profile: Vec<String> =
                c.profile.normalized().iter().map(|v| format!("{v:.4}")).collect();
            println!("{label}");
            println!("  v(d)/p, d = 0..K: {}", profile.join(" "));
            println!("  max = {:.9}, certified = {}", c.kw_max, c.certified);
        }
        Err(e) => println!("{label}\n  {e}"),
    }
    Ok(())
}

fn main() -> pairdesign::Result<()> {
    let k = 8;
    report("optimum, K = 8", &pairdesign::d_optimal_design(k)?.design)?;
    report("best on depths {3, 8}", &optimize_weights(k, &[3, k])?)?;
    report("all weight on depth 1", &DepthDesign::point_mass(k, 1)?)?;
    report("all weight on depth 8", &DepthDesign::point_mass(k, k)?)?;
    Ok(())
}
