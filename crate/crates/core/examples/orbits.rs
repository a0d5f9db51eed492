//! Pairs at each comparison depth, and how often each model term is touched.

use pairdesign::model::enumerate_orbit;
use pairdesign::oracle::census;
use pairdesign::ModelSpec;

fn main() -> pairdesign::Result<()> {
    let spec = ModelSpec::new(3)?;
    for pair in enumerate_orbit(&spec, 2)?.take(6) {
        println!("{:?} vs {:?}", pair.first().levels(), pair.second().levels());
    }
    println!("...");

    let k = 6;
    println!("\nK = {k}");
    println!(" d  pairs  main  first  second");
    for d in 0..=k {
        let c = census(k, d)?;
        println!(
            "{d:>2} {:>6} {:>5} {:>6} {:>7}",
            c.pairs, c.main[0], c.first_order[0], c.second_order[0]
        );
    }
    Ok(())
}
